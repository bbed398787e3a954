//! Time series of norms, integrals and bounds, with decay-exponent fitting.
//!
//! Every record carries Parseval norms `‖D^k·‖_{L²}` (`k = 0..=3`) of `a`,
//! `u` and `ρ − ρ*`, their low/high frequency parts, the gradient maxima,
//! running time integrals of those maxima, and the mass and momentum.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Observer, State};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{CutoffProfile, RealField, Spectral, SpectralField};
use crate::stats::least_squares;

/// Column order of the CSV time series.
pub const CSV_HEADER: &str = "t,d0_a,d1_a,d2_a,d3_a,d0_u,d1_u,d2_u,d3_u,d0_rho,d1_rho,d2_rho,d3_rho,\
d0_a_low,d1_a_low,d2_a_low,d3_a_low,d0_u_low,d1_u_low,d2_u_low,d3_u_low,\
d0_a_high,d1_a_high,d2_a_high,d3_a_high,d0_u_high,d1_u_high,d2_u_high,d3_u_high,\
linf_grad_a,linf_grad_u,linf_div_u,criterion_integral,divu_integral,mass,\
momentum_1,momentum_2,momentum_3,rho_min,rho_max";

/// Smallest usable fit value relative to the first sample.
pub const FLOOR_FACTOR: f64 = 1e3 * f64::EPSILON;

/// Largest `(2π/L)²·t_hi` for which algebraic decay is still visible on the
/// torus.
pub const BOX_VALIDITY: f64 = 0.2;

pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub d_a: [f64; 4],
    pub d_u: [f64; 4],
    pub d_rho: [f64; 4],
    pub d_a_low: [f64; 4],
    pub d_u_low: [f64; 4],
    pub d_a_high: [f64; 4],
    pub d_u_high: [f64; 4],
    pub linf_grad_a: f64,
    pub linf_grad_u: f64,
    pub linf_div_u: f64,
    pub criterion_integral: f64,
    pub divu_integral: f64,
    pub mass: f64,
    /// Unused trailing entries are zero for `d < 3`.
    pub momentum: [f64; 3],
    pub rho_min: f64,
    pub rho_max: f64,
}

impl DiagnosticsRecord {
    /// `‖(a, u)‖_{H³}`.
    pub fn h3_norm(&self) -> f64 {
        self.d_a.iter().chain(&self.d_u).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t];
        for group in [&self.d_a, &self.d_u, &self.d_rho, &self.d_a_low, &self.d_u_low, &self.d_a_high, &self.d_u_high] {
            v.extend_from_slice(group);
        }
        v.extend([self.linf_grad_a, self.linf_grad_u, self.linf_div_u, self.criterion_integral, self.divu_integral, self.mass]);
        v.extend_from_slice(&self.momentum);
        v.extend([self.rho_min, self.rho_max]);
        v
    }

    fn from_values(v: &[f64]) -> Self {
        let arr = |o: usize| [v[o], v[o + 1], v[o + 2], v[o + 3]];
        Self {
            t: v[0],
            d_a: arr(1),
            d_u: arr(5),
            d_rho: arr(9),
            d_a_low: arr(13),
            d_u_low: arr(17),
            d_a_high: arr(21),
            d_u_high: arr(25),
            linf_grad_a: v[29],
            linf_grad_u: v[30],
            linf_div_u: v[31],
            criterion_integral: v[32],
            divu_integral: v[33],
            mass: v[34],
            momentum: [v[35], v[36], v[37]],
            rho_min: v[38],
            rho_max: v[39],
        }
    }

    /// Column value by CSV name.
    pub fn get(&self, column: &str) -> Option<f64> {
        let idx = CSV_HEADER.split(',').position(|c| c == column)?;
        Some(self.values()[idx])
    }
}

fn single(spec: &SpectralField, range: std::ops::Range<usize>) -> SpectralField {
    let mut data = Vec::with_capacity(range.len() * spec.grid().points());
    for c in range.clone() {
        data.extend_from_slice(spec.component(c));
    }
    SpectralField::new(*spec.grid(), range.len(), data).expect("layout")
}

/// Diagnostics of `state` whose spectrum `(â, û)` is already known.
pub fn record_spectrum(
    sp: &Spectral,
    state: &State,
    spectrum: &SpectralField,
    cutoff: &CutoffProfile,
    prev: Option<&DiagnosticsRecord>,
) -> Result<DiagnosticsRecord> {
    let grid = *sp.grid();
    if state.grid() != &grid || spectrum.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let d = grid.dim();
    let p = grid.points();
    if let Some((component, index)) = state.a().first_non_finite().or(state.u().first_non_finite()) {
        return Err(Error::NonFinite { component, index });
    }
    let a_hat = single(spectrum, 0..1);
    let u_hat = single(spectrum, 1..d + 1);
    let rho_star = state.rho_star();
    let a = state.a().data();
    let perturbation: Vec<f64> = par::map_collect(p, |i| rho_star * a[i].exp_m1());
    let rho_hat = sp.forward(&RealField::new(grid, 1, perturbation.clone())?)?;

    let (a_low, a_high) = sp.split(&a_hat, cutoff)?;
    let (u_low, u_high) = sp.split(&u_hat, cutoff)?;

    let grad_a = sp.inverse_unchecked(&sp.gradient(&a_hat)?);
    let grad_u_spec = sp.gradient(&u_hat)?;
    let mut div = vec![num_complex::Complex64::new(0.0, 0.0); p];
    for j in 0..d {
        let comp = grad_u_spec.component(j * d + j);
        par::for_each_indexed(&mut div, |i, v| *v += comp[i]);
    }
    let grad_u = sp.inverse_unchecked(&grad_u_spec);
    let div_u = sp.inverse_unchecked(&SpectralField::new(grid, 1, div)?);
    let linf_grad_a = sp.linf_pointwise(&grad_a);
    let linf_grad_u = sp.linf_pointwise(&grad_u);
    let linf_div_u = div_u.max_abs();

    let cell = grid.cell_volume();
    let mass = par::sum(p, |i| perturbation[i]) * cell;
    let mut momentum = [0.0; 3];
    for (j, m) in momentum.iter_mut().enumerate().take(d) {
        let u = state.u().component(j);
        *m = par::sum(p, |i| rho_star * (1.0 + perturbation[i] / rho_star) * u[i]) * cell;
    }
    let amax = par::max(p, |i| a[i]);
    let amin = -par::max(p, |i| -a[i]);

    let g = linf_grad_a + linf_grad_u;
    let (criterion_integral, divu_integral) = match prev {
        Some(r) => {
            let dt = state.t() - r.t;
            (
                r.criterion_integral + 0.5 * dt * (g + r.linf_grad_a + r.linf_grad_u),
                r.divu_integral + 0.5 * dt * (linf_div_u + r.linf_div_u),
            )
        }
        None => (0.0, 0.0),
    };

    Ok(DiagnosticsRecord {
        t: state.t(),
        d_a: sp.sobolev_norms(&a_hat),
        d_u: sp.sobolev_norms(&u_hat),
        d_rho: sp.sobolev_norms(&rho_hat),
        d_a_low: sp.sobolev_norms(&a_low),
        d_u_low: sp.sobolev_norms(&u_low),
        d_a_high: sp.sobolev_norms(&a_high),
        d_u_high: sp.sobolev_norms(&u_high),
        linf_grad_a,
        linf_grad_u,
        linf_div_u,
        criterion_integral,
        divu_integral,
        mass,
        momentum,
        rho_min: rho_star * amin.exp(),
        rho_max: rho_star * amax.exp(),
    })
}

/// Diagnostics of `state`, extending the running integrals from `prev`.
pub fn record(sp: &Spectral, state: &State, cutoff: &CutoffProfile, prev: Option<&DiagnosticsRecord>) -> Result<DiagnosticsRecord> {
    let spectrum = state.to_spectral(sp)?;
    record_spectrum(sp, state, &spectrum, cutoff, prev)
}

/// Collects records during a run and optionally streams them as CSV rows.
pub struct Recorder<'a> {
    sp: &'a Spectral,
    cutoff: CutoffProfile,
    records: Vec<DiagnosticsRecord>,
    sink: Option<Box<dyn Write + 'a>>,
}

impl<'a> Recorder<'a> {
    pub fn new(sp: &'a Spectral, cutoff: CutoffProfile) -> Result<Self> {
        cutoff.check_resolved(sp.grid())?;
        Ok(Self { sp, cutoff, records: Vec::new(), sink: None })
    }

    /// Writes the header now and one flushed row per record.
    pub fn with_csv(mut self, mut sink: Box<dyn Write + 'a>) -> Result<Self> {
        writeln!(sink, "{CSV_HEADER}")?;
        sink.flush()?;
        self.sink = Some(sink);
        Ok(self)
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord> {
        self.records
    }
}

impl Observer for Recorder<'_> {
    fn observe(&mut self, state: &State, spectrum: &SpectralField) -> Result<()> {
        let rec = record_spectrum(self.sp, state, spectrum, &self.cutoff, self.records.last())?;
        if let Some(sink) = self.sink.as_mut() {
            write_row(sink, &rec)?;
            sink.flush()?;
        }
        self.records.push(rec);
        Ok(())
    }
}

fn write_row(w: &mut dyn Write, rec: &DiagnosticsRecord) -> Result<()> {
    let row: Vec<String> = rec.values().iter().map(|v| v.to_string()).collect();
    writeln!(w, "{}", row.join(","))?;
    Ok(())
}

pub fn write_csv(w: &mut dyn Write, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for rec in records {
        write_row(w, rec)?;
    }
    Ok(())
}

/// Reads a record CSV; columns may appear in any order, but all must be
/// present.
pub fn read_csv(r: &mut dyn BufRead) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))??;
    let columns: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    let mut index = Vec::new();
    let mut missing = Vec::new();
    for name in CSV_HEADER.split(',') {
        match columns.iter().position(|c| *c == name) {
            Some(i) => index.push(i),
            None => missing.push(name),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Csv(format!("missing column(s): {}", missing.join(", "))));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.trim().split(',').collect();
        if cells.len() != columns.len() {
            return Err(Error::Csv(format!("row {}: expected {} fields, found {}", n + 2, columns.len(), cells.len())));
        }
        let mut values = Vec::with_capacity(index.len());
        for (&i, name) in index.iter().zip(CSV_HEADER.split(',')) {
            let v = cells[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Csv(format!("row {}, column {name}: cannot parse {:?}", n + 2, cells[i])))?;
            values.push(v);
        }
        out.push(DiagnosticsRecord::from_values(&values));
    }
    Ok(out)
}

/// Decay exponent predicted for a norm column: `−k/2` for `dk_a`, `dk_rho`
/// and `−(k+1)/2` for `dk_u`, including their low/high parts.
pub fn expected_slope(column: &str) -> Option<f64> {
    let rest = column.strip_prefix('d')?;
    let k = rest.chars().next()?.to_digit(10)? as f64;
    let field = rest[1..].strip_prefix('_')?;
    let base = field.split('_').next()?;
    match base {
        "a" | "rho" => Some(-k / 2.0),
        "u" => Some(-(k + 1.0) / 2.0),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl FitWindow {
    /// Rejects windows starting before `t = 1` or reaching past the box
    /// validity limit when `length` is known.
    pub fn validate(&self, length: Option<f64>) -> Result<()> {
        if !(self.t_lo >= 1.0 && self.t_hi > self.t_lo && self.t_hi.is_finite()) {
            return Err(Error::Fit(format!(
                "window [{}, {}] must satisfy 1 <= t_lo < t_hi",
                self.t_lo, self.t_hi
            )));
        }
        if let Some(l) = length {
            let q = (2.0 * std::f64::consts::PI / l).powi(2) * self.t_hi;
            if q > BOX_VALIDITY {
                return Err(Error::Fit(format!(
                    "window [{}, {}] violates (2π/L)²·t_hi <= {BOX_VALIDITY} for L = {l}: value {q:.4}",
                    self.t_lo, self.t_hi
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub quantity: String,
    pub window: FitWindow,
    /// Samples actually used after the norm floor.
    pub samples: usize,
    pub slope: f64,
    pub slope_stderr: f64,
    pub expected_slope: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
}

impl DecayFit {
    /// Sets the verdict `|slope − expected| ≤ tolerance`.
    pub fn judge(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self.passed = self.expected_slope.map(|e| (self.slope - e).abs() <= tolerance);
        self
    }
}

/// Least-squares slope of `ln value` against `ln(1 + t)` over `window`.
///
/// Samples after the first value below `FLOOR_FACTOR` times the series' first
/// value are dropped. `length` enables the box-validity check.
pub fn fit_exponent(quantity: &str, series: &[(f64, f64)], window: FitWindow, length: Option<f64>) -> Result<DecayFit> {
    window.validate(length)?;
    let floor = series.first().map(|s| s.1.abs() * FLOOR_FACTOR).unwrap_or(0.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in series.iter().filter(|(t, _)| *t >= window.t_lo && *t <= window.t_hi) {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Fit(format!("{quantity}: non-positive value {v} at t = {t}")));
        }
        if v < floor {
            break;
        }
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{quantity}: {} usable samples in [{}, {}], need {MIN_FIT_SAMPLES}",
            xs.len(),
            window.t_lo,
            window.t_hi
        )));
    }
    let line = least_squares(&xs, &ys).ok_or_else(|| Error::Fit(format!("{quantity}: degenerate abscissae")))?;
    Ok(DecayFit {
        quantity: quantity.to_string(),
        window,
        samples: xs.len(),
        slope: line.slope,
        slope_stderr: line.slope_stderr,
        expected_slope: expected_slope(quantity),
        tolerance: None,
        passed: None,
    })
}

/// `(t, column)` pairs from a record series.
pub fn series(records: &[DiagnosticsRecord], column: &str) -> Result<Vec<(f64, f64)>> {
    if !CSV_HEADER.split(',').any(|c| c == column) {
        return Err(Error::Csv(format!("unknown column {column}")));
    }
    Ok(records.iter().map(|r| (r.t, r.get(column).expect("known column"))).collect())
}

/// Relative slack granted to the envelope comparison for transform roundoff.
pub const ENVELOPE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub passed: bool,
    pub divu_integral: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `rho_min − lower_bound`, non-negative when the bound holds.
    pub lower_margin: f64,
    /// `upper_bound − rho_max`.
    pub upper_margin: f64,
}

/// `e^{−I}·ρ0_min ≤ ρ_min` and `ρ_max ≤ e^{I}·ρ0_max` with `I` the running
/// integral of `‖div u‖_∞`.
pub fn density_envelope_check(rec: &DiagnosticsRecord, rho0_min: f64, rho0_max: f64) -> EnvelopeCheck {
    let i = rec.divu_integral;
    let lower_bound = (-i).exp() * rho0_min;
    let upper_bound = i.exp() * rho0_max;
    let lower_margin = rec.rho_min - lower_bound;
    let upper_margin = upper_bound - rec.rho_max;
    let passed = lower_margin >= -ENVELOPE_SLACK * lower_bound && upper_margin >= -ENVELOPE_SLACK * upper_bound;
    EnvelopeCheck { passed, divu_integral: i, lower_bound, upper_bound, lower_margin, upper_margin }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessCheck {
    pub passed: bool,
    pub n0: f64,
    pub sup: f64,
    pub factor: f64,
    pub ratio: f64,
}

/// `sup_t ‖(a,u)‖_{H³} ≤ factor · N0`.
pub fn boundedness_check(h3: &[f64], n0: f64, factor: f64) -> BoundednessCheck {
    let sup = h3.iter().copied().fold(0.0, f64::max);
    let ratio = if n0 > 0.0 { sup / n0 } else if sup == 0.0 { 0.0 } else { f64::INFINITY };
    BoundednessCheck { passed: sup <= factor * n0, n0, sup, factor, ratio }
}

/// `sup_t Σ_k ((1+t)^{k/2}‖D^k a‖ + (1+t)^{(k+1)/2}‖D^k u‖)`: the decay
/// weights applied to every norm at once. Reported, never judged.
pub fn weighted_norm_aggregate(records: &[DiagnosticsRecord]) -> f64 {
    records
        .iter()
        .map(|r| {
            let w = 1.0 + r.t;
            (0..4)
                .map(|k| w.powf(k as f64 / 2.0) * r.d_a[k] + w.powf((k as f64 + 1.0) / 2.0) * r.d_u[k])
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}
