use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Periodic box `[0, L)^d` sampled at `N` points per axis.
///
/// Flat indices are row-major with the last axis fastest. Spectral
/// coefficients share the same layout in FFT order: axis index `i` carries
/// the signed mode `i` for `i < N/2` and `i - N` otherwise, so the Nyquist
/// index `N/2` maps to `-N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {n} must be a power of two and at least 4"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {length} must be positive")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Number of lattice points, `N^d`.
    pub fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Per-axis indices of a flat index; unused axes are zero.
    pub fn coords(&self, flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % self.n;
            rem /= self.n;
        }
        out
    }

    pub fn flat(&self, coords: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.n + coords[axis])
    }

    /// Physical position `i * h` of a sample.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        let c = self.coords(flat);
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Signed mode number of an axis index.
    pub fn signed_mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Wavevector `κ` in cycles per unit length.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let c = self.coords(flat);
        let mut k = [0.0; 3];
        for axis in 0..self.dim {
            k[axis] = self.signed_mode(c[axis]) as f64 / self.length;
        }
        k
    }

    /// Flat index of the mode `-κ`.
    pub fn negated(&self, flat: usize) -> usize {
        let c = self.coords(flat);
        let mut m = [0; 3];
        for axis in 0..self.dim {
            m[axis] = (self.n - c[axis]) % self.n;
        }
        self.flat(m)
    }

    /// Nyquist frequency `N / (2L)` in cycles per unit length.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.length)
    }

    /// Largest fully resolved angular frequency `2π · N/(2L)` along an axis.
    pub fn max_axis_xi(&self) -> f64 {
        2.0 * PI * self.nyquist()
    }

    /// Largest resolved frequency magnitude in cycles, `√d · N/(2L)`.
    pub fn max_frequency(&self) -> f64 {
        (self.dim as f64).sqrt() * self.nyquist()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0, 8, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(1, 2, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new(1, 8, 0.0).is_err());
        assert!(Grid::new(1, 8, f64::NAN).is_err());
    }

    #[test]
    fn index_round_trip_and_negation() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        for flat in 0..g.points() {
            assert_eq!(g.flat(g.coords(flat)), flat);
            let neg = g.negated(flat);
            assert_eq!(g.negated(neg), flat);
            let (k, kn) = (g.wavevector(flat), g.wavevector(neg));
            for axis in 0..3 {
                let c = g.coords(flat)[axis];
                if g.is_nyquist(c) {
                    assert_eq!(k[axis], kn[axis]);
                } else {
                    assert_eq!(k[axis], -kn[axis]);
                }
            }
        }
        assert_eq!(g.signed_mode(4), -4);
        assert_eq!(g.nyquist(), 2.0);
    }
}
