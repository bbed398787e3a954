//! Fourier symbol of the Green function of the linearized damped system
//!
//! ```text
//! ∂t U + L U = 0,   L̂_ξ = [[0, iξᵀ], [iξ, I]],
//! ```
//!
//! whose non-trivial eigenvalues solve `λ² + λ + |ξ|² = 0`. The symbol is
//! assembled from three scalar functions of `(t, |ξ|)`:
//!
//! ```text
//! ψ = (λ3 e^{λ4 t} − λ4 e^{λ3 t}) / (λ3 − λ4)     g11
//! φ = (e^{λ3 t} − e^{λ4 t}) / (λ3 − λ4)           g12 = g21ᵀ = −iξ φ
//! χ = (λ3 e^{λ3 t} − λ4 e^{λ4 t}) / (λ3 − λ4)     g22 = e^{−t} I + (χ − e^{−t}) ξξᵀ/|ξ|²
//! ```
//!
//! All three are evaluated in real arithmetic in each regime. Writing
//! `λ = −1/2 ± η` (`η = √(1−4|ξ|²)/2`, or `η = iω` past the double root), the
//! half-gap forms `e^{−t/2}(cosh ηt ± (t/2) sinh(ηt)/(ηt))` stay finite at
//! `|ξ| = 1/2` and avoid complex exponentials. Away from the double root the
//! real branch uses `e^{λ3 t}`-factored forms with `expm1`, which keep the
//! slow diffusive mode accurate for large `t`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{CutoffProfile, Spectral, SpectralField};
use crate::stats::least_squares;

/// `|1 − 4|ξ|²|` below which the pair is labelled degenerate.
pub const DEGENERATE_TOL: f64 = 1e-10;
/// Gap `|λ3 − λ4|` below which the half-gap series forms are used.
pub const SERIES_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    RealDistinct,
    Degenerate,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum HalfGap {
    /// `η = (λ3 − λ4)/2 ≥ 0`.
    Real(f64),
    /// `ω = Im λ3 > 0`.
    Imag(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    xi: f64,
    lambda3: Complex64,
    lambda4: Complex64,
    regime: Regime,
    gap: HalfGap,
}

impl EigenPair {
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn lambda3(&self) -> Complex64 {
        self.lambda3
    }

    pub fn lambda4(&self) -> Complex64 {
        self.lambda4
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }
}

/// Roots of `λ² + λ + |ξ|² = 0` with `Re λ3 ≥ Re λ4`.
pub fn eigenvalues(xi: f64) -> Result<EigenPair> {
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(Error::InvalidFrequency(xi));
    }
    let disc = (1.0 - 2.0 * xi) * (1.0 + 2.0 * xi);
    let regime = if disc.abs() < DEGENERATE_TOL {
        Regime::Degenerate
    } else if disc > 0.0 {
        Regime::RealDistinct
    } else {
        Regime::Complex
    };
    let pair = if disc >= 0.0 {
        let s = disc.sqrt();
        let l3 = -2.0 * xi * xi / (1.0 + s);
        EigenPair {
            xi,
            lambda3: Complex64::new(l3, 0.0),
            // one rounding instead of three; λ4 = −1 − λ3
            lambda4: Complex64::new(-1.0 - l3, 0.0),
            regime,
            gap: HalfGap::Real(0.5 * s),
        }
    } else {
        let omega = 0.5 * (-disc).sqrt();
        EigenPair {
            xi,
            lambda3: Complex64::new(-0.5, omega),
            lambda4: Complex64::new(-0.5, -omega),
            regime,
            gap: HalfGap::Imag(omega),
        }
    };
    Ok(pair)
}

/// `ψ`, `φ`, `χ` and `e^{−t}` at one `(t, |ξ|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolCoefficients {
    pub psi: f64,
    pub phi: f64,
    pub chi: f64,
    pub damping: f64,
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl SymbolCoefficients {
    pub fn new(t: f64, pair: &EigenPair) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        if t == 0.0 {
            return Ok(Self { psi: 1.0, phi: 0.0, chi: 1.0, damping: 1.0 });
        }
        let damping = (-t).exp();
        let (even, odd) = match pair.gap {
            HalfGap::Real(eta) if 2.0 * eta >= SERIES_GUARD && pair.regime == Regime::RealDistinct => {
                let s = 2.0 * eta;
                let l3 = pair.lambda3.re;
                let l4 = pair.lambda4.re;
                let e3 = (l3 * t).exp();
                let decay = (-s * t).exp();
                return Ok(Self {
                    psi: e3 * (l3 * decay - l4) / s,
                    phi: e3 * (-(-s * t).exp_m1()) / s,
                    chi: e3 * (l3 - l4 * decay) / s,
                    damping,
                });
            }
            HalfGap::Real(eta) => ((eta * t).cosh(), t * sinhc(eta * t)),
            HalfGap::Imag(omega) => ((omega * t).cos(), t * sinc(omega * t)),
        };
        let envelope = (-0.5 * t).exp();
        Ok(Self {
            psi: envelope * (even + 0.5 * odd),
            phi: envelope * odd,
            chi: envelope * (even - 0.5 * odd),
            damping,
        })
    }
}

/// `(e^{λ3 t} − e^{λ4 t}) / (λ3 − λ4)`, real for every regime.
pub fn divided_difference(t: f64, pair: &EigenPair) -> Result<f64> {
    Ok(SymbolCoefficients::new(t, pair)?.phi)
}

/// Green symbol `Ĝ(t, ξ)` on every lattice mode of a grid.
///
/// The vector `ξ` is the first-derivative multiplier of the grid (Nyquist
/// entries zeroed), so the symbol is the exact propagator of the
/// semi-discrete linear system the integrators see.
pub struct GreenSymbol {
    t: f64,
    damping: f64,
    dim: usize,
    xi: Vec<[f64; 3]>,
    psi: Vec<f64>,
    phi: Vec<f64>,
    chi: Vec<f64>,
}

impl GreenSymbol {
    pub(crate) fn from_parts(
        t: f64,
        damping: f64,
        dim: usize,
        xi: Vec<[f64; 3]>,
        psi: Vec<f64>,
        phi: Vec<f64>,
        chi: Vec<f64>,
    ) -> Self {
        Self { t, damping, dim, xi, psi, phi, chi }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn modes(&self) -> usize {
        self.psi.len()
    }

    pub fn g11(&self, flat: usize) -> f64 {
        self.psi[flat]
    }

    /// `g12 = −iξᵀφ`; `g21` is the same vector read as a column.
    pub fn g12(&self, flat: usize) -> [Complex64; 3] {
        let x = self.xi[flat];
        let p = self.phi[flat];
        [0, 1, 2].map(|j| Complex64::new(0.0, -x[j] * p))
    }

    pub fn g21(&self, flat: usize) -> [Complex64; 3] {
        self.g12(flat)
    }

    /// Coefficients `(α, β)` of `g22 = α I + β ξξᵀ/|ξ|²`.
    pub fn g22_coefficients(&self, flat: usize) -> (f64, f64) {
        (self.damping, self.chi[flat] - self.damping)
    }

    pub fn g22(&self, flat: usize) -> [[f64; 3]; 3] {
        let x = self.xi[flat];
        let x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let (alpha, beta) = self.g22_coefficients(flat);
        let mut m = [[0.0; 3]; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let proj = if x2 > 0.0 { x[i] * x[j] / x2 } else { 0.0 };
                m[i][j] = if i == j { alpha } else { 0.0 } + beta * proj;
            }
        }
        m
    }

    /// Dense `(1+d) × (1+d)` block matrix at one mode, row-major.
    pub fn block_matrix(&self, flat: usize) -> Vec<Vec<Complex64>> {
        let d = self.dim;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); d + 1]; d + 1];
        m[0][0] = Complex64::new(self.g11(flat), 0.0);
        let g12 = self.g12(flat);
        let g22 = self.g22(flat);
        for i in 0..d {
            m[0][i + 1] = g12[i];
            m[i + 1][0] = g12[i];
            for j in 0..d {
                m[i + 1][j + 1] = Complex64::new(g22[i][j], 0.0);
            }
        }
        m
    }

    /// Multiplies a `(a, u)` spectrum mode by mode.
    pub fn apply(&self, state: &SpectralField) -> Result<SpectralField> {
        let d = self.dim;
        if state.components() != d + 1 {
            return Err(Error::ComponentMismatch { expected: d + 1, found: state.components() });
        }
        if state.grid().points() != self.modes() || state.grid().dim() != d {
            return Err(Error::GridMismatch);
        }
        let mut out = state.clone();
        let comps: Vec<&[Complex64]> = (0..=d).map(|c| state.component(c)).collect();
        let mut buffers: Vec<Vec<Complex64>> = Vec::with_capacity(d + 1);
        for c in 0..=d {
            buffers.push(par::map_collect(self.modes(), |i| self.apply_mode(i, c, &comps)));
        }
        for (c, buf) in buffers.into_iter().enumerate() {
            out.component_mut(c).copy_from_slice(&buf);
        }
        Ok(out)
    }

    #[inline]
    pub(crate) fn apply_mode(&self, i: usize, c: usize, comps: &[&[Complex64]]) -> Complex64 {
        let d = self.dim;
        let x = self.xi[i];
        let mut div = Complex64::new(0.0, 0.0);
        for j in 0..d {
            div += comps[j + 1][i] * x[j];
        }
        let a = comps[0][i];
        let phi = self.phi[i];
        if c == 0 {
            // ψ a − iφ ξ·u
            return a * self.psi[i] + Complex64::new(div.im, -div.re) * phi;
        }
        let j = c - 1;
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let beta = self.chi[i] - self.damping;
        let long = if x2 > 0.0 { div * (beta * x[j] / x2) } else { Complex64::new(0.0, 0.0) };
        let ia = Complex64::new(a.im, -a.re) * (x[j] * phi);
        comps[c][i] * self.damping + long + ia
    }
}

/// Green symbol at time `t` on the lattice of `spectral`.
pub fn assemble_symbol(t: f64, spectral: &Spectral) -> Result<GreenSymbol> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let lat = spectral.lattice();
    let modes = spectral.grid().points();
    let coeffs: Vec<SymbolCoefficients> = par::map_collect(modes, |i| {
        let pair = eigenvalues(lat.derivative_xi_magnitude(i)).expect("finite lattice frequency");
        SymbolCoefficients::new(t, &pair).expect("non-negative time")
    });
    Ok(GreenSymbol {
        t,
        damping: (-t).exp(),
        dim: spectral.grid().dim(),
        xi: (0..modes).map(|i| lat.derivative_xi(i)).collect(),
        psi: coeffs.iter().map(|c| c.psi).collect(),
        phi: coeffs.iter().map(|c| c.phi).collect(),
        chi: coeffs.iter().map(|c| c.chi).collect(),
    })
}

/// Exact linear evolution `U(t) = Ĝ(t) U0` of a `(a, u)` spectrum.
pub fn apply_semigroup(t: f64, spectral: &Spectral, state: &SpectralField) -> Result<SpectralField> {
    if state.grid() != spectral.grid() {
        return Err(Error::GridMismatch);
    }
    assemble_symbol(t, spectral)?.apply(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    #[serde(rename = "11")]
    G11,
    #[serde(rename = "12")]
    G12,
    #[serde(rename = "21")]
    G21,
    #[serde(rename = "22")]
    G22,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::G11, Block::G12, Block::G21, Block::G22];

    /// Algebraic decay exponent of the `k`-th derivative of the low-frequency
    /// block.
    pub fn expected_slope(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            Block::G11 => -k / 2.0,
            Block::G12 | Block::G21 => -(k + 1.0) / 2.0,
            Block::G22 => -(k + 2.0) / 2.0,
        }
    }

    /// Magnitude of the block at `(t, |ξ|)`; for `g22` only the tensor part
    /// `|χ − e^{−t}|` (the `e^{−t} I` part decays exponentially).
    pub fn magnitude(self, t: f64, xi: f64) -> f64 {
        let pair = eigenvalues(xi).expect("valid frequency");
        let c = SymbolCoefficients::new(t, &pair).expect("valid time");
        match self {
            Block::G11 => c.psi.abs(),
            Block::G12 | Block::G21 => xi * c.phi.abs(),
            Block::G22 => (c.chi - c.damping).abs(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Block::G11 => "11",
            Block::G12 => "12",
            Block::G21 => "21",
            Block::G22 => "22",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupSample {
    pub t: f64,
    /// `sup_{|ξ| ≤ r0} |ξ|^k |block|`.
    pub sup: f64,
    /// Frequency where the supremum is attained.
    pub argmax: f64,
    /// `e^{−t}`, the identity part of `g22`, reported separately.
    pub identity_part: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierFit {
    pub block: Block,
    pub k: usize,
    pub r0: f64,
    pub table: Vec<SupSample>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub expected_slope: f64,
}

impl MultiplierFit {
    pub fn deviation(&self) -> f64 {
        (self.slope - self.expected_slope).abs()
    }
}

/// Uniform sample count over `[0, r0]` before local refinement.
const SUP_SAMPLES: usize = 4096;

fn low_frequency_sup(block: Block, k: usize, r0: f64, t: f64) -> (f64, f64) {
    let f = |xi: f64| xi.powi(k as i32) * block.magnitude(t, xi);
    let step = r0 / SUP_SAMPLES as f64;
    let (mut best_i, mut best) = (0, f(0.0));
    for i in 1..=SUP_SAMPLES {
        let v = f(i as f64 * step);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement between the neighbouring samples
    let mut lo = (best_i.saturating_sub(1)) as f64 * step;
    let mut hi = ((best_i + 1).min(SUP_SAMPLES)) as f64 * step;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut arg = best_i as f64 * step;
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best {
            best = v;
            arg = x;
        }
    }
    (best, arg)
}

/// Fits the algebraic decay of the low-frequency supremum of one symbol
/// block, restricted sharply to `|ξ| ≤ r0`.
pub fn verify_multiplier_bound(block: Block, k: usize, cutoff: &CutoffProfile, times: &[f64]) -> Result<MultiplierFit> {
    if times.len() < 8 {
        return Err(Error::Fit(format!("{} time samples given, at least 8 required", times.len())));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 1.0 && t.is_finite())) {
        return Err(Error::Fit(format!("time sample {t} outside [1, ∞)")));
    }
    if k > 3 {
        return Err(Error::SobolevOrder(k));
    }
    let r0 = cutoff.r0();
    let table: Vec<SupSample> = par::map_collect(times.len(), |i| {
        let t = times[i];
        let (sup, argmax) = low_frequency_sup(block, k, r0, t);
        SupSample { t, sup, argmax, identity_part: (-t).exp() }
    });
    if let Some(s) = table.iter().find(|s| !(s.sup > 0.0)) {
        return Err(Error::Fit(format!("supremum underflowed at t = {}", s.t)));
    }
    let x: Vec<f64> = table.iter().map(|s| s.t.ln_1p()).collect();
    let y: Vec<f64> = table.iter().map(|s| s.sup.ln()).collect();
    let fit = least_squares(&x, &y).ok_or_else(|| Error::Fit("degenerate time samples".into()))?;
    Ok(MultiplierFit {
        block,
        k,
        r0,
        table,
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        expected_slope: block.expected_slope(k),
    })
}

/// `count` equally spaced times on `[t_lo, t_hi]`.
pub fn uniform_times(t_lo: f64, t_hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| t_lo + (t_hi - t_lo) * i as f64 / (count.max(2) - 1) as f64)
        .collect()
}
