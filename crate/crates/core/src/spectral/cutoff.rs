use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    Sharp,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Low,
    High,
}

/// Radial low-frequency cut-off `χ̂₁(|ξ|)` with `χ̂∞ = 1 - χ̂₁`.
///
/// Radii are angular frequencies (`|ξ| = 2π|κ|`), the same variable the
/// Green symbol is written in, so `r0 < 1/2` puts the whole low band in the
/// real-eigenvalue regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    r0: f64,
    #[serde(rename = "R0")]
    r_big: f64,
    kind: CutoffKind,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self { r0: 0.25, r_big: 0.45, kind: CutoffKind::Smooth }
    }
}

impl CutoffProfile {
    /// For the sharp kind `r_big` is ignored and recorded as `r0`.
    pub fn new(r0: f64, r_big: f64, kind: CutoffKind) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 0.5) {
            return Err(Error::InvalidCutoff(format!("r0 = {r0} must lie in (0, 1/2)")));
        }
        match kind {
            CutoffKind::Sharp => Ok(Self { r0, r_big: r0, kind }),
            CutoffKind::Smooth => {
                if !(r_big.is_finite() && r_big > r0) {
                    return Err(Error::InvalidCutoff(format!("R0 = {r_big} must exceed r0 = {r0}")));
                }
                Ok(Self { r0, r_big, kind })
            }
        }
    }

    pub fn sharp(r0: f64) -> Result<Self> {
        Self::new(r0, r0, CutoffKind::Sharp)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r_big(&self) -> f64 {
        self.r_big
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    /// Re-validates after deserialization.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.r0, self.r_big, self.kind)
    }

    pub fn check_resolved(&self, grid: &Grid) -> Result<()> {
        let limit = grid.max_axis_xi();
        if self.r_big < limit {
            Ok(())
        } else {
            Err(Error::UnresolvedCutoff { r_big: self.r_big, limit })
        }
    }

    /// `χ̂₁` at angular frequency magnitude `xi`.
    pub fn low(&self, xi: f64) -> f64 {
        match self.kind {
            CutoffKind::Sharp => {
                if xi <= self.r0 {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffKind::Smooth => {
                if xi <= self.r0 {
                    1.0
                } else if xi >= self.r_big {
                    0.0
                } else {
                    let s = (xi - self.r0) / (self.r_big - self.r0);
                    0.5 * (1.0 + (PI * s).cos())
                }
            }
        }
    }

    pub fn weight(&self, xi: f64, part: Part) -> f64 {
        match part {
            Part::Low => self.low(xi),
            Part::High => 1.0 - self.low(xi),
        }
    }
}
