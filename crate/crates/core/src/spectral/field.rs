use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples of a scalar or vector field, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    components: usize,
    data: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, components: usize, data: Vec<f64>) -> Result<Self> {
        if components == 0 || data.len() != components * grid.points() {
            return Err(Error::ComponentMismatch {
                expected: components * grid.points(),
                found: data.len(),
            });
        }
        Ok(Self { grid, components, data })
    }

    pub fn zeros(grid: Grid, components: usize) -> Self {
        Self { grid, components, data: vec![0.0; components * grid.points()] }
    }

    /// Samples `f(component, x)` at every lattice point.
    pub fn from_fn(grid: Grid, components: usize, f: impl Fn(usize, [f64; 3]) -> f64) -> Self {
        let points = grid.points();
        let mut data = Vec::with_capacity(components * points);
        for c in 0..components {
            data.extend((0..points).map(|i| f(c, grid.position(i))));
        }
        Self { grid, components, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let p = self.grid.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let p = self.grid.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// First non-finite sample as `(component, flat index)`.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        let p = self.grid.points();
        self.data.iter().position(|v| !v.is_finite()).map(|i| (i / p, i % p))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `L²` norm by the rectangle rule, which is spectrally accurate for
    /// periodic data.
    pub fn l2_quadrature(&self) -> f64 {
        let s = crate::par::sum(self.data.len(), |i| self.data[i] * self.data[i]);
        (s * self.grid.cell_volume()).sqrt()
    }

    /// Integral of each component over the box.
    pub fn integral(&self, c: usize) -> f64 {
        let comp = self.component(c);
        crate::par::sum(comp.len(), |i| comp[i]) * self.grid.cell_volume()
    }
}

/// Fourier coefficients on the wavenumber lattice, component-major, FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    components: usize,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, components: usize, data: Vec<Complex64>) -> Result<Self> {
        if components == 0 || data.len() != components * grid.points() {
            return Err(Error::ComponentMismatch {
                expected: components * grid.points(),
                found: data.len(),
            });
        }
        Ok(Self { grid, components, data })
    }

    pub fn zeros(grid: Grid, components: usize) -> Self {
        Self { grid, components, data: vec![Complex64::new(0.0, 0.0); components * grid.points()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let p = self.grid.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let p = self.grid.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// Coefficient at the lattice point with the given signed mode numbers.
    pub fn mode(&self, c: usize, modes: [i64; 3]) -> Complex64 {
        let n = self.grid.n() as i64;
        let mut coords = [0usize; 3];
        for axis in 0..self.grid.dim() {
            coords[axis] = modes[axis].rem_euclid(n) as usize;
        }
        self.component(c)[self.grid.flat(coords)]
    }

    pub fn set_mode(&mut self, c: usize, modes: [i64; 3], value: Complex64) {
        let n = self.grid.n() as i64;
        let mut coords = [0usize; 3];
        for axis in 0..self.grid.dim() {
            coords[axis] = modes[axis].rem_euclid(n) as usize;
        }
        let flat = self.grid.flat(coords);
        self.component_mut(c)[flat] = value;
    }

    /// Largest `|F(ξ) - conj F(-ξ)|` and where it occurs.
    pub fn hermitian_defect(&self) -> (f64, usize) {
        let p = self.grid.points();
        let mut worst = (0.0, 0);
        for c in 0..self.components {
            let comp = self.component(c);
            for (i, v) in comp.iter().enumerate() {
                let d = (v - comp[self.grid.negated(i)].conj()).norm();
                if !(d <= worst.0) {
                    worst = (d, c * p + i);
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }
}
