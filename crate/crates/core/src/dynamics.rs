//! Time integration of the log-density system
//!
//! ```text
//! ∂t a + u·∇a + div u = 0,   ∂t u + u·∇u + ∇a + u = 0.
//! ```
//!
//! The state is advanced in spectral space. Products are formed
//! pseudo-spectrally (spectral gradients, pointwise products) and optionally
//! truncated by the 2/3 rule.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{assemble_symbol, eigenvalues, GreenSymbol, SymbolCoefficients};
use crate::par;
use crate::spectral::{Grid, RealField, Spectral, SpectralField};

/// `‖(a, u)‖_∞` above which a run is declared blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Log-density deviation `a = ln ρ − ln ρ*` and velocity `u` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    a: RealField,
    u: RealField,
    t: f64,
    rho_star: f64,
}

impl State {
    pub fn new(a: RealField, u: RealField, t: f64, rho_star: f64) -> Result<Self> {
        if a.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        if a.components() != 1 {
            return Err(Error::ComponentMismatch { expected: 1, found: a.components() });
        }
        let d = a.grid().dim();
        if u.components() != d {
            return Err(Error::ComponentMismatch { expected: d, found: u.components() });
        }
        if !(rho_star.is_finite() && rho_star > 0.0) {
            return Err(Error::Config(format!("rho_star = {rho_star} must be positive")));
        }
        Ok(Self { a, u, t, rho_star })
    }

    pub fn zeros(grid: Grid, rho_star: f64) -> Result<Self> {
        Self::new(RealField::zeros(grid, 1), RealField::zeros(grid, grid.dim()), 0.0, rho_star)
    }

    /// Builds the state from a strictly positive density.
    pub fn from_density(rho: &RealField, u: RealField, t: f64, rho_star: f64) -> Result<Self> {
        if let Some(v) = rho.data().iter().find(|v| !(**v > 0.0)) {
            return Err(Error::Config(format!("density sample {v} is not positive")));
        }
        let a = rho.data().iter().map(|r| (r / rho_star).ln()).collect();
        Self::new(RealField::new(*rho.grid(), 1, a)?, u, t, rho_star)
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    pub fn a(&self) -> &RealField {
        &self.a
    }

    pub fn u(&self) -> &RealField {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn rho_star(&self) -> f64 {
        self.rho_star
    }

    /// `ρ = ρ* e^a`.
    pub fn density(&self) -> RealField {
        let data = self.a.data().iter().map(|a| self.rho_star * a.exp()).collect();
        RealField::new(*self.grid(), 1, data).expect("layout")
    }

    pub fn max_abs(&self) -> f64 {
        self.a.max_abs().max(self.u.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.first_non_finite().is_none() && self.u.first_non_finite().is_none()
    }

    /// `(â, û)` as one `1 + d` component spectrum.
    pub fn to_spectral(&self, sp: &Spectral) -> Result<SpectralField> {
        let a = sp.forward(&self.a)?;
        let u = sp.forward(&self.u)?;
        let mut data = a.into_data();
        data.extend(u.into_data());
        SpectralField::new(*self.grid(), 1 + self.grid().dim(), data)
    }

    pub fn from_spectral(sp: &Spectral, spec: &SpectralField, t: f64, rho_star: f64) -> Result<Self> {
        let d = sp.grid().dim();
        if spec.components() != d + 1 {
            return Err(Error::ComponentMismatch { expected: d + 1, found: spec.components() });
        }
        let real = sp.inverse_unchecked(spec).into_data();
        let p = sp.grid().points();
        let a = RealField::new(*sp.grid(), 1, real[..p].to_vec())?;
        let u = RealField::new(*sp.grid(), d, real[p..].to_vec())?;
        Self::new(a, u, t, rho_star)
    }

    pub(crate) fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    StrangExponential,
    Rk4,
    ExponentialEuler,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::StrangExponential => 2,
            Scheme::Rk4 => 4,
            Scheme::ExponentialEuler => 1,
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_output_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Time step; `None` selects `0.5·h / (1 + max|u0| + 1)`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_true")]
    pub dealias: bool,
    pub t_end: f64,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    /// Drops the transport terms `u·∇a`, `u·∇u`.
    #[serde(default)]
    pub linear_only: bool,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self { scheme, dt: Some(dt), dealias: true, t_end, output_every: 1, linear_only: false }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidIntegrator(format!("dt = {dt} must be positive")));
            }
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidIntegrator(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidIntegrator("output_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Step actually taken: `dt` as configured, or the heuristic default.
    pub fn resolved_dt(&self, s0: &State) -> f64 {
        self.dt.unwrap_or_else(|| default_dt(s0))
    }
}

/// `0.5·h / (1 + max|u0| + 1)`: advective plus unit sound speed.
pub fn default_dt(s0: &State) -> f64 {
    0.5 * s0.grid().spacing() / (1.0 + s0.u().max_abs() + 1.0)
}

/// Advisory explicit stability bound `0.5·h / (max|u| + 1)`.
pub fn cfl_limit(s: &State) -> f64 {
    0.5 * s.grid().spacing() / (s.u().max_abs() + 1.0)
}

/// 8-point Gauss–Legendre rule on `[-1, 1]`.
const GAUSS_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GAUSS_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `∫_0^dt Ĝ(s) ds` as a block multiplier with the same structure as the
/// symbol itself; composite Gauss–Legendre with panels short against the
/// fastest oscillation.
fn integrated_symbol(dt: f64, sp: &Spectral) -> GreenSymbol {
    let lat = sp.lattice();
    let modes = sp.grid().points();
    let parts: Vec<(f64, f64, f64)> = par::map_collect(modes, |i| {
        let xi = lat.derivative_xi_magnitude(i);
        let pair = eigenvalues(xi).expect("finite lattice frequency");
        let panels = (xi * dt).ceil().max(1.0) as usize;
        let width = dt / panels as f64;
        let mut acc = (0.0, 0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                let c = SymbolCoefficients::new(mid + 0.5 * width * x, &pair).expect("t >= 0");
                let wt = 0.5 * width * w;
                acc.0 += wt * c.psi;
                acc.1 += wt * c.phi;
                acc.2 += wt * c.chi;
            }
        }
        acc
    });
    GreenSymbol::from_parts(
        dt,
        -(-dt).exp_m1(),
        sp.grid().dim(),
        (0..modes).map(|i| lat.derivative_xi(i)).collect(),
        parts.iter().map(|p| p.0).collect(),
        parts.iter().map(|p| p.1).collect(),
        parts.iter().map(|p| p.2).collect(),
    )
}

/// Steps one grid with a fixed scheme and step size; symbols are assembled
/// once up front.
pub struct Integrator<'a> {
    sp: &'a Spectral,
    scheme: Scheme,
    dt: f64,
    dealias: bool,
    linear_only: bool,
    propagator: Option<GreenSymbol>,
    integrated: Option<GreenSymbol>,
}

impl<'a> Integrator<'a> {
    pub fn new(sp: &'a Spectral, scheme: Scheme, dt: f64, dealias: bool, linear_only: bool) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidIntegrator(format!("dt = {dt} must be positive")));
        }
        let (propagator, integrated) = match scheme {
            Scheme::StrangExponential => (Some(assemble_symbol(0.5 * dt, sp)?), None),
            Scheme::ExponentialEuler => (Some(assemble_symbol(dt, sp)?), Some(integrated_symbol(dt, sp))),
            Scheme::Rk4 => (None, None),
        };
        Ok(Self { sp, scheme, dt, dealias, linear_only, propagator, integrated })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `(−u·∇a, −u·∇u)` in spectral space.
    pub fn nonlinear(&self, spec: &SpectralField) -> SpectralField {
        let sp = self.sp;
        let grid = *sp.grid();
        let d = grid.dim();
        let p = grid.points();
        let lat = sp.lattice();
        // u_k, ∂_k a, ∂_k u_j
        let mut fields: Vec<Vec<Complex64>> = Vec::with_capacity(d + d + d * d);
        for k in 0..d {
            fields.push(spec.component(1 + k).to_vec());
        }
        for c in 0..=d {
            let src = spec.component(c);
            for k in 0..d {
                fields.push(par::map_collect(p, |i| {
                    let v = src[i] * lat.derivative_xi(i)[k];
                    Complex64::new(-v.im, v.re)
                }));
            }
        }
        let refs: Vec<&[Complex64]> = fields.iter().map(|f| f.as_slice()).collect();
        let real = sp.inverse_reals(&refs);
        let u = &real[..d];
        let grad = |c: usize, k: usize| &real[d + c * d + k];
        let mut products: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
        for c in 0..=d {
            let mut out = vec![0.0; p];
            par::for_each_indexed(&mut out, |i, v| {
                let mut s = 0.0;
                for k in 0..d {
                    s += u[k][i] * grad(c, k)[i];
                }
                *v = -s;
            });
            products.push(out);
        }
        let refs: Vec<&[f64]> = products.iter().map(|f| f.as_slice()).collect();
        let mut data = sp.forward_reals(&refs).concat();
        if self.dealias {
            par::for_each_indexed(&mut data, |i, v| {
                if !lat.dealias_keep(i % p) {
                    *v = ZERO;
                }
            });
        }
        SpectralField::new(grid, d + 1, data).expect("layout")
    }

    /// `−L̂ U`: `(−iξ·û, −iξâ − û)`.
    fn linear(&self, spec: &SpectralField) -> SpectralField {
        let d = self.sp.grid().dim();
        let p = self.sp.grid().points();
        let lat = self.sp.lattice();
        let comps: Vec<&[Complex64]> = (0..=d).map(|c| spec.component(c)).collect();
        let mut data = vec![ZERO; (d + 1) * p];
        par::for_each_indexed(&mut data, |idx, v| {
            let (c, i) = (idx / p, idx % p);
            let x = lat.derivative_xi(i);
            *v = if c == 0 {
                let mut div = ZERO;
                for k in 0..d {
                    div += comps[k + 1][i] * x[k];
                }
                Complex64::new(div.im, -div.re)
            } else {
                let a = comps[0][i] * x[c - 1];
                Complex64::new(a.im, -a.re) - comps[c][i]
            };
        });
        SpectralField::new(*spec.grid(), d + 1, data).expect("layout")
    }

    fn full_rhs(&self, spec: &SpectralField) -> SpectralField {
        let mut lin = self.linear(spec);
        if !self.linear_only {
            let nl = self.nonlinear(spec);
            axpy(&mut lin, 1.0, &nl);
        }
        lin
    }

    fn rk4<F: Fn(&SpectralField) -> SpectralField>(&self, y: &SpectralField, h: f64, f: F) -> SpectralField {
        let k1 = f(y);
        let k2 = f(&combine(y, &[(0.5 * h, &k1)]));
        let k3 = f(&combine(y, &[(0.5 * h, &k2)]));
        let k4 = f(&combine(y, &[(h, &k3)]));
        combine(y, &[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)])
    }

    /// One step of the configured scheme.
    pub fn step(&self, spec: &SpectralField) -> SpectralField {
        let h = self.dt;
        match self.scheme {
            Scheme::Rk4 => self.rk4(spec, h, |y| self.full_rhs(y)),
            Scheme::StrangExponential => {
                let half = self.propagator.as_ref().expect("strang propagator");
                let mut y = half.apply(spec).expect("layout");
                if !self.linear_only {
                    y = self.rk4(&y, h, |v| self.nonlinear(v));
                }
                half.apply(&y).expect("layout")
            }
            Scheme::ExponentialEuler => {
                let full = self.propagator.as_ref().expect("propagator");
                let mut y = full.apply(spec).expect("layout");
                if !self.linear_only {
                    let forcing = self.integrated.as_ref().expect("integrated symbol").apply(&self.nonlinear(spec)).expect("layout");
                    axpy(&mut y, 1.0, &forcing);
                }
                y
            }
        }
    }
}

fn axpy(y: &mut SpectralField, w: f64, x: &SpectralField) {
    let src = x.data();
    par::for_each_indexed(y.data_mut(), |i, v| *v += src[i] * w);
}

fn combine(y: &SpectralField, terms: &[(f64, &SpectralField)]) -> SpectralField {
    let mut out = y.clone();
    par::for_each_indexed(out.data_mut(), |i, v| {
        for (w, k) in terms {
            *v += k.data()[i] * *w;
        }
    });
    out
}

/// Upper bound `Σ|F|/L^d ≥ ‖f‖_∞` per component; NaN if any coefficient is.
pub(crate) fn linf_bound(sp: &Spectral, spec: &SpectralField) -> f64 {
    let p = sp.grid().points();
    let inv = 1.0 / sp.grid().volume();
    (0..spec.components())
        .map(|c| {
            let comp = spec.component(c);
            par::sum(p, |i| comp[i].norm()) * inv
        })
        .fold(0.0, |m: f64, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Non-finite coefficients or `‖(a,u)‖_∞` past the threshold.
pub(crate) fn blowup_reason(sp: &Spectral, spec: &SpectralField) -> Option<String> {
    let bound = linf_bound(sp, spec);
    if !bound.is_finite() {
        return Some("non-finite values in the state".into());
    }
    if bound > BLOWUP_THRESHOLD {
        let real = sp.inverse_unchecked(spec);
        let m = real.max_abs();
        if !m.is_finite() {
            return Some("non-finite values in the state".into());
        }
        if m > BLOWUP_THRESHOLD {
            return Some(format!("‖(a,u)‖_∞ = {m:e} exceeds {BLOWUP_THRESHOLD:e}"));
        }
    }
    None
}

/// Physical-space `(−u·∇a, −u·∇u)` of a state.
pub fn nonlinear_rhs(sp: &Spectral, s: &State, dealias: bool) -> Result<(RealField, RealField)> {
    let spec = s.to_spectral(sp)?;
    let integ = Integrator::new(sp, Scheme::Rk4, 1.0, dealias, false)?;
    let out = State::from_spectral(sp, &integ.nonlinear(&spec), s.t(), s.rho_star())?;
    Ok((out.a, out.u))
}

fn single_step(sp: &Spectral, s: &State, dt: f64, scheme: Scheme, dealias: bool) -> Result<State> {
    let integ = Integrator::new(sp, scheme, dt, dealias, false)?;
    let spec = integ.step(&s.to_spectral(sp)?);
    if let Some(reason) = blowup_reason(sp, &spec) {
        return Err(Error::InvalidIntegrator(format!("blow-up at t = {}: {reason}", s.t() + dt)));
    }
    State::from_spectral(sp, &spec, s.t() + dt, s.rho_star())
}

/// Strang splitting: half linear flow, RK4 transport step, half linear flow.
pub fn step_strang(sp: &Spectral, s: &State, dt: f64, dealias: bool) -> Result<State> {
    single_step(sp, s, dt, Scheme::StrangExponential, dealias)
}

/// Classical RK4 on the full right-hand side.
pub fn step_rk4(sp: &Spectral, s: &State, dt: f64, dealias: bool) -> Result<State> {
    single_step(sp, s, dt, Scheme::Rk4, dealias)
}

/// Exponential Euler: exact linear flow plus `∫_0^dt Ĝ(s) ds` on the frozen
/// transport term.
pub fn step_exponential_euler(sp: &Spectral, s: &State, dt: f64, dealias: bool) -> Result<State> {
    single_step(sp, s, dt, Scheme::ExponentialEuler, dealias)
}

/// Receives the state at every output time.
pub trait Observer {
    fn observe(&mut self, state: &State, spectrum: &SpectralField) -> Result<()>;
}

impl<F: FnMut(&State, &SpectralField) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &State, spectrum: &SpectralField) -> Result<()> {
        self(state, spectrum)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    BlowUp { t: f64, reason: String },
    Aborted { reason: String },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Final state, or the last finite one for a blow-up.
    pub state: State,
    pub status: RunStatus,
    pub steps: usize,
    pub dt: f64,
    pub warnings: Vec<String>,
}

/// Advances `s0` to `t_end`, handing the state to `observer` at `t = 0`,
/// every `output_every` steps, and at `t_end`.
///
/// The step is `t_end / ceil(t_end / dt)` so the run lands on `t_end`.
pub fn run(sp: &Spectral, s0: &State, cfg: &IntegratorConfig, observer: &mut dyn Observer) -> Result<RunOutcome> {
    cfg.validate()?;
    if s0.grid() != sp.grid() {
        return Err(Error::GridMismatch);
    }
    let mut warnings = Vec::new();
    let requested = cfg.resolved_dt(s0);
    let steps = if cfg.t_end == 0.0 { 0 } else { ((cfg.t_end / requested) - 1e-9).ceil().max(1.0) as usize };
    let dt = if steps == 0 { requested } else { cfg.t_end / steps as f64 };
    if cfg.scheme == Scheme::Rk4 && dt > cfl_limit(s0) {
        let msg = format!("dt = {dt} exceeds the advisory explicit bound {}", cfl_limit(s0));
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let t0 = s0.t();
    let mut spec = s0.to_spectral(sp)?;
    let mut current = s0.clone();
    if let Err(e) = observer.observe(&current, &spec) {
        return Ok(RunOutcome { state: current, status: RunStatus::Aborted { reason: e.to_string() }, steps: 0, dt, warnings });
    }
    let integ = Integrator::new(sp, cfg.scheme, dt, cfg.dealias, cfg.linear_only)?;
    for n in 1..=steps {
        let next = integ.step(&spec);
        let t = t0 + n as f64 * dt;
        if let Some(reason) = blowup_reason(sp, &next) {
            log::warn!("blow-up at t = {t}: {reason}");
            return Ok(RunOutcome { state: current, status: RunStatus::BlowUp { t, reason }, steps: n - 1, dt, warnings });
        }
        spec = next;
        if n % cfg.output_every == 0 || n == steps {
            current = State::from_spectral(sp, &spec, t, s0.rho_star())?;
            if let Err(e) = observer.observe(&current, &spec) {
                return Ok(RunOutcome { state: current, status: RunStatus::Aborted { reason: e.to_string() }, steps: n, dt, warnings });
            }
        }
    }
    if steps > 0 && current.t() != t0 + steps as f64 * dt {
        current = State::from_spectral(sp, &spec, t0 + steps as f64 * dt, s0.rho_star())?;
    }
    Ok(RunOutcome { state: current.with_time(t0 + steps as f64 * dt), status: RunStatus::Completed, steps, dt, warnings })
}
