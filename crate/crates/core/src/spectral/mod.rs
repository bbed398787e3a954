//! Periodic grids, scaled discrete Fourier transforms, spectral derivatives,
//! low/high frequency projectors and Parseval norms.
//!
//! Transforms follow the `e^{-i2πx·ξ}` convention: the forward sum is scaled
//! by `h^d` so coefficients approximate the continuum Fourier integral of
//! box-supported data, and the inverse carries `1/L^d`. Derivatives are
//! multipliers `i2πκ`; all frequency magnitudes handed to the Green symbol and
//! to the cut-off profiles are angular, `|ξ| = 2π|κ|`.

mod cutoff;
mod fft;
mod field;
mod grid;

pub use cutoff::{CutoffKind, CutoffProfile, Part};
pub use field::{RealField, SpectralField};
pub use grid::Grid;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par;
use fft::FftPlan;

/// Relative tolerance for the Hermitian-symmetry check on inverse transforms.
pub const HERMITIAN_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-mode frequency tables for one grid.
pub struct Lattice {
    xi: Vec<[f64; 3]>,
    dxi: Vec<[f64; 3]>,
    xi_mag: Vec<f64>,
    dxi_mag: Vec<f64>,
    neg: Vec<usize>,
    dealias_keep: Vec<bool>,
}

impl Lattice {
    fn new(grid: &Grid) -> Self {
        let points = grid.points();
        let cut = (grid.n() / 3) as i64;
        let mut xi = Vec::with_capacity(points);
        let mut dxi = Vec::with_capacity(points);
        let mut keep = Vec::with_capacity(points);
        for flat in 0..points {
            let c = grid.coords(flat);
            let k = grid.wavevector(flat);
            let mut full = [0.0; 3];
            let mut deriv = [0.0; 3];
            let mut inside = true;
            for axis in 0..grid.dim() {
                full[axis] = 2.0 * PI * k[axis];
                deriv[axis] = if grid.is_nyquist(c[axis]) { 0.0 } else { full[axis] };
                inside &= grid.signed_mode(c[axis]).abs() <= cut;
            }
            xi.push(full);
            dxi.push(deriv);
            keep.push(inside);
        }
        let norm = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        Self {
            xi_mag: xi.iter().map(norm).collect(),
            dxi_mag: dxi.iter().map(norm).collect(),
            neg: (0..points).map(|i| grid.negated(i)).collect(),
            dealias_keep: keep,
            xi,
            dxi,
        }
    }

    /// Angular wavevector `2πκ`.
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        self.xi[flat]
    }

    /// First-derivative multiplier vector (`2πκ` with Nyquist entries zeroed).
    pub fn derivative_xi(&self, flat: usize) -> [f64; 3] {
        self.dxi[flat]
    }

    pub fn xi_magnitude(&self, flat: usize) -> f64 {
        self.xi_mag[flat]
    }

    pub fn derivative_xi_magnitude(&self, flat: usize) -> f64 {
        self.dxi_mag[flat]
    }

    pub fn negated(&self, flat: usize) -> usize {
        self.neg[flat]
    }

    /// Whether the mode survives 2/3-rule truncation.
    pub fn dealias_keep(&self, flat: usize) -> bool {
        self.dealias_keep[flat]
    }
}

/// Transform engine for one grid: FFT plans plus lattice tables.
pub struct Spectral {
    grid: Grid,
    lattice: Lattice,
    plan: FftPlan,
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        Self { lattice: Lattice::new(&grid), plan: FftPlan::new(grid), grid }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn same_grid(&self, other: &Grid) -> Result<()> {
        if *other == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Forward transforms of real component slices, two at a time through one
    /// complex FFT. The unpacked spectra are exactly Hermitian.
    pub(crate) fn forward_reals(&self, comps: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let scale = self.grid.cell_volume();
        let mut out = Vec::with_capacity(comps.len());
        for pair in comps.chunks(2) {
            let first = pair[0];
            let second = pair.get(1).copied();
            let mut z: Vec<Complex64> = match second {
                Some(g) => first.iter().zip(g).map(|(&a, &b)| Complex64::new(a, b)).collect(),
                None => first.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            };
            self.plan.forward(&mut z);
            let neg = &self.lattice.neg;
            let zr: &[Complex64] = &z;
            let mut f = vec![ZERO; zr.len()];
            par::for_each_indexed(&mut f, |i, v| {
                *v = (zr[i] + zr[neg[i]].conj()) * (0.5 * scale);
            });
            out.push(f);
            if second.is_some() {
                let mut g = vec![ZERO; zr.len()];
                par::for_each_indexed(&mut g, |i, v| {
                    let d = zr[i] - zr[neg[i]].conj();
                    *v = Complex64::new(d.im, -d.re) * (0.5 * scale);
                });
                out.push(g);
            }
        }
        out
    }

    /// Inverse transforms of Hermitian spectra, two at a time; only the real
    /// part is kept.
    pub(crate) fn inverse_reals(&self, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let scale = 1.0 / self.grid.volume();
        let mut out = Vec::with_capacity(comps.len());
        for pair in comps.chunks(2) {
            let first = pair[0];
            let mut z: Vec<Complex64> = match pair.get(1) {
                Some(g) => first
                    .iter()
                    .zip(g.iter())
                    .map(|(a, b)| Complex64::new(a.re - b.im, a.im + b.re))
                    .collect(),
                None => first.to_vec(),
            };
            self.plan.inverse(&mut z);
            out.push(z.iter().map(|v| v.re * scale).collect());
            if pair.len() == 2 {
                out.push(z.iter().map(|v| v.im * scale).collect());
            }
        }
        out
    }

    pub fn forward(&self, f: &RealField) -> Result<SpectralField> {
        self.same_grid(f.grid())?;
        if let Some((component, index)) = f.first_non_finite() {
            return Err(Error::NonFinite { component, index });
        }
        let comps: Vec<&[f64]> = (0..f.components()).map(|c| f.component(c)).collect();
        let data = self.forward_reals(&comps).concat();
        SpectralField::new(self.grid, f.components(), data)
    }

    pub fn inverse(&self, spec: &SpectralField) -> Result<RealField> {
        self.same_grid(spec.grid())?;
        let (defect, index) = spec.hermitian_defect();
        let scale = spec.max_abs();
        if !(defect <= HERMITIAN_TOL * scale) {
            return Err(Error::NotHermitian { index, defect });
        }
        Ok(self.inverse_unchecked(spec))
    }

    pub(crate) fn inverse_unchecked(&self, spec: &SpectralField) -> RealField {
        let comps: Vec<&[Complex64]> = (0..spec.components()).map(|c| spec.component(c)).collect();
        let data = self.inverse_reals(&comps).concat();
        RealField::new(self.grid, spec.components(), data).expect("component layout")
    }

    /// Mixed partial derivative `D^α`, applied to every component.
    pub fn derivative(&self, spec: &SpectralField, alpha: [usize; 3]) -> Result<SpectralField> {
        self.same_grid(spec.grid())?;
        let order: usize = alpha.iter().sum();
        if order > 4 {
            return Err(Error::DerivativeOrder(order));
        }
        let dim = self.grid.dim();
        if alpha.iter().skip(dim).any(|&a| a > 0) {
            return Err(Error::DerivativeOrder(order));
        }
        let mut out = spec.clone();
        let lat = &self.lattice;
        let points = self.grid.points();
        par::for_each_indexed(out.data_mut(), |i, v| {
            let flat = i % points;
            let mut real = 1.0;
            for axis in 0..dim {
                let a = alpha[axis] as i32;
                if a > 0 {
                    let x = if a % 2 == 1 { lat.dxi[flat][axis] } else { lat.xi[flat][axis] };
                    real *= x.powi(a);
                }
            }
            *v = times_i_pow(*v * real, order);
        });
        Ok(out)
    }

    /// Gradient of every component: output component `c * d + j` is `∂_j F_c`.
    pub fn gradient(&self, spec: &SpectralField) -> Result<SpectralField> {
        self.same_grid(spec.grid())?;
        let dim = self.grid.dim();
        let points = self.grid.points();
        let mut data = Vec::with_capacity(spec.components() * dim * points);
        for c in 0..spec.components() {
            let comp = spec.component(c);
            for axis in 0..dim {
                data.extend(
                    comp.iter()
                        .zip(&self.lattice.dxi)
                        .map(|(v, k)| Complex64::new(-v.im * k[axis], v.re * k[axis])),
                );
            }
        }
        SpectralField::new(self.grid, spec.components() * dim, data)
    }

    /// Low and high parts. `high = F - χ̂₁F` and `low = F - high` per real
    /// and imaginary part; both subtractions are exact in binary floating
    /// point, so `low + high == F` holds bit for bit.
    pub fn split(&self, spec: &SpectralField, cutoff: &CutoffProfile) -> Result<(SpectralField, SpectralField)> {
        self.same_grid(spec.grid())?;
        cutoff.check_resolved(&self.grid)?;
        let points = self.grid.points();
        let mut high = spec.clone();
        let src = spec.data();
        let lat = &self.lattice;
        par::for_each_indexed(high.data_mut(), |i, v| {
            let w = cutoff.low(lat.xi_mag[i % points]);
            let f = src[i];
            *v = Complex64::new(f.re - f.re * w, f.im - f.im * w);
        });
        let mut low = spec.clone();
        let hi = high.data();
        par::for_each_indexed(low.data_mut(), |i, v| {
            *v = src[i] - hi[i];
        });
        Ok((low, high))
    }

    pub fn project(&self, spec: &SpectralField, cutoff: &CutoffProfile, part: Part) -> Result<SpectralField> {
        let (low, high) = self.split(spec, cutoff)?;
        Ok(match part {
            Part::Low => low,
            Part::High => high,
        })
    }

    /// `‖D^k f‖_{L²}` by Parseval, `(Σ |ξ|^{2k} |F|² / L^d)^{1/2}` summed over
    /// components.
    pub fn sobolev_norm(&self, spec: &SpectralField, k: usize) -> Result<f64> {
        if k > 3 {
            return Err(Error::SobolevOrder(k));
        }
        self.same_grid(spec.grid())?;
        Ok(self.sobolev_norms(spec)[k])
    }

    /// `‖D^k f‖_{L²}` for `k = 0..=3` in one call.
    pub fn sobolev_norms(&self, spec: &SpectralField) -> [f64; 4] {
        let points = self.grid.points();
        let data = spec.data();
        let mag = &self.lattice.xi_mag;
        let inv_vol = 1.0 / self.grid.volume();
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let s = par::sum(data.len(), |i| {
                let x2 = mag[i % points] * mag[i % points];
                data[i].norm_sqr() * x2.powi(k as i32)
            });
            *slot = (s * inv_vol).sqrt();
        }
        out
    }

    /// Full `H^k` norm, the root-sum-square of `‖D^j f‖` for `j = 0..=k`.
    pub fn h_norm(&self, spec: &SpectralField, k: usize) -> Result<f64> {
        if k > 3 {
            return Err(Error::SobolevOrder(k));
        }
        self.same_grid(spec.grid())?;
        let norms = self.sobolev_norms(spec);
        Ok(norms[..=k].iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// Largest pointwise Euclidean norm of the spectral gradient, all
    /// components stacked.
    pub fn linf_gradient(&self, f: &RealField) -> Result<f64> {
        let spec = self.forward(f)?;
        let grad = self.gradient(&spec)?;
        Ok(self.linf_pointwise(&self.inverse_unchecked(&grad)))
    }

    /// `max_x (Σ_c f_c(x)²)^{1/2}`.
    pub(crate) fn linf_pointwise(&self, f: &RealField) -> f64 {
        let points = self.grid.points();
        let comps = f.components();
        let data = f.data();
        par::max(points, |i| (0..comps).map(|c| data[c * points + i].powi(2)).sum::<f64>().sqrt())
    }
}

fn times_i_pow(v: Complex64, order: usize) -> Complex64 {
    match order % 4 {
        0 => v,
        1 => Complex64::new(-v.im, v.re),
        2 => -v,
        _ => Complex64::new(v.im, -v.re),
    }
}

#[cfg(test)]
mod tests;
