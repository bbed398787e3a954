//! Initial conditions.

use anyhow::{bail, Result};
use dampflow::dynamics::State;
use dampflow::spectral::{Grid, RealField};
use std::f64::consts::PI;

use crate::config::{InitialCondition, RunConfig};
use crate::snapshot;

/// Largest admissible ratio of a centred profile at the box face to its peak.
pub const TAIL_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub state: State,
    pub warnings: Vec<String>,
}

fn squared_offset(grid: &Grid, x: [f64; 3]) -> f64 {
    let c = 0.5 * grid.length();
    (0..grid.dim()).map(|j| (x[j] - c).powi(2)).sum()
}

/// Density bump plus identical velocity bump, both `amp·e^{−rate·|x−c|²}`.
fn bump_state(grid: Grid, rho_star: f64, amp_rho: f64, amp_u: f64, rate: f64) -> Result<State> {
    let bump = |x: [f64; 3]| (-rate * squared_offset(&grid, x)).exp();
    let a = RealField::from_fn(grid, 1, |_, x| (amp_rho * bump(x) / rho_star).ln_1p());
    let u = RealField::from_fn(grid, grid.dim(), |_, x| amp_u * bump(x));
    Ok(State::new(a, u, 0.0, rho_star)?)
}

fn tail_warning(grid: &Grid, rate: f64) -> Option<String> {
    let face = (-rate * (0.5 * grid.length()).powi(2)).exp();
    (face >= TAIL_LIMIT).then(|| {
        format!("initial profile at the box face is {face:.3e} of its peak (limit {TAIL_LIMIT:e}); enlarge L")
    })
}

/// `ρ0 = ρ* + ε^{5/11} e^{−ε^{8/11}|x−c|²}` and `u0_j = ε^{5/11} e^{−ε^{8/11}|x−c|²}`
/// with `c` the box centre. A large `L²` norm, `O(ε^{−1/11})`, carried by a
/// small amplitude and a wide profile.
pub fn make_remark1_ic(epsilon: f64, grid: Grid, rho_star: f64) -> Result<Scenario> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        bail!("epsilon = {epsilon} must lie in (0, 1]");
    }
    let amp = epsilon.powf(5.0 / 11.0);
    let rate = epsilon.powf(8.0 / 11.0);
    let state = bump_state(grid, rho_star, amp, amp, rate)?;
    let warnings = tail_warning(&grid, rate).into_iter().collect::<Vec<_>>();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Scenario { state, warnings })
}

pub fn make_gaussian_ic(amp_a: f64, amp_u: f64, width: f64, grid: Grid, rho_star: f64) -> Result<Scenario> {
    let rate = 1.0 / (width * width);
    let bump = |x: [f64; 3]| (-rate * squared_offset(&grid, x)).exp();
    let a = RealField::from_fn(grid, 1, |_, x| amp_a * bump(x));
    let u = RealField::from_fn(grid, grid.dim(), |_, x| amp_u * bump(x));
    let warnings = tail_warning(&grid, rate).into_iter().collect::<Vec<_>>();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Scenario { state: State::new(a, u, 0.0, rho_star)?, warnings })
}

pub fn make_single_mode_ic(kappa: &[i64], amp_a: f64, amp_u: f64, grid: Grid, rho_star: f64) -> Result<Scenario> {
    if kappa.len() != grid.dim() {
        bail!("kappa has {} entries for a {}-dimensional grid", kappa.len(), grid.dim());
    }
    let w = 2.0 * PI / grid.length();
    let phase = |x: [f64; 3]| w * kappa.iter().zip(x).map(|(k, x)| *k as f64 * x).sum::<f64>();
    let a = RealField::from_fn(grid, 1, |_, x| amp_a * phase(x).cos());
    let u = RealField::from_fn(grid, grid.dim(), |_, x| amp_u * phase(x).sin());
    Ok(Scenario { state: State::new(a, u, 0.0, rho_star)?, warnings: Vec::new() })
}

pub fn build(cfg: &RunConfig) -> Result<Scenario> {
    let grid = cfg.grid()?;
    match &cfg.ic {
        InitialCondition::Remark1 { epsilon } => make_remark1_ic(*epsilon, grid, cfg.rho_star),
        InitialCondition::Gaussian { amp_a, amp_u, width } => make_gaussian_ic(*amp_a, *amp_u, *width, grid, cfg.rho_star),
        InitialCondition::SingleMode { kappa, amp_a, amp_u } => make_single_mode_ic(kappa, *amp_a, *amp_u, grid, cfg.rho_star),
        InitialCondition::File { path } => {
            let state = snapshot::load(path)?;
            if state.grid() != &grid {
                bail!(
                    "snapshot {} holds d = {}, N = {}, L = {}; config asks for d = {}, N = {}, L = {}",
                    path.display(),
                    state.grid().dim(),
                    state.grid().n(),
                    state.grid().length(),
                    grid.dim(),
                    grid.n(),
                    grid.length()
                );
            }
            let mut warnings = Vec::new();
            if state.rho_star() != cfg.rho_star {
                warnings.push(format!("snapshot rho_star = {} overrides config value {}", state.rho_star(), cfg.rho_star));
            }
            Ok(Scenario { state, warnings })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remark1_peak_and_centre() {
        let grid = Grid::new(1, 64, 200.0).unwrap();
        let s = make_remark1_ic(1e-2, grid, 1.0).unwrap();
        assert!(s.warnings.is_empty());
        let rho = s.state.density();
        let peak = rho.data()[32];
        assert!((peak - 1.0 - 10f64.powf(-10.0 / 11.0)).abs() < 1e-14);
        assert!((10f64.powf(-10.0 / 11.0) - 0.1233).abs() < 1e-4);
        assert_eq!(rho.data().iter().cloned().fold(0.0, f64::max), peak);
        assert_eq!(s.state.u().data()[32], 10f64.powf(-10.0 / 11.0));
    }

    #[test]
    fn remark1_unit_epsilon_collapses() {
        let grid = Grid::new(2, 32, 16.0).unwrap();
        let s = make_remark1_ic(1.0, grid, 2.0).unwrap();
        // x − c = (1, 0): ρ = 2 + e^{−1}
        let i = grid.flat([18, 16, 0]);
        assert!((s.state.density().data()[i] - 2.0 - (-1f64).exp()).abs() < 1e-14);
        assert!((s.state.u().component(1)[i] - (-1f64).exp()).abs() < 1e-15);
        assert!(make_remark1_ic(0.0, grid, 1.0).is_err());
        assert!(make_remark1_ic(1.5, grid, 1.0).is_err());
    }

    #[test]
    fn remark1_density_norm() {
        // ‖ρ0 − ρ*‖ = (π/2)^{3/4} ε^{−1/11} in 3D; in 1D (π/2)^{1/4} ε^{5/11 − 2/11}
        let eps: f64 = 1e-2;
        let grid = Grid::new(1, 256, 200.0).unwrap();
        let s = make_remark1_ic(eps, grid, 1.0).unwrap();
        let pert: f64 = s.state.density().data().iter().map(|r| (r - 1.0).powi(2)).sum::<f64>() * grid.spacing();
        let expected = (PI / 2.0).powf(0.25) * eps.powf(5.0 / 11.0 - 2.0 / 11.0);
        assert!((pert.sqrt() / expected - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tail_warning_on_small_box() {
        let grid = Grid::new(1, 64, 20.0).unwrap();
        let s = make_remark1_ic(1e-2, grid, 1.0).unwrap();
        assert_eq!(s.warnings.len(), 1);
        assert!(s.warnings[0].contains("box face"));
    }

    #[test]
    fn single_mode_layout() {
        let grid = Grid::new(2, 16, 8.0).unwrap();
        let s = make_single_mode_ic(&[1, 0], 0.5, 0.2, grid, 1.0).unwrap();
        let i = grid.flat([4, 3, 0]);
        assert!(s.state.a().data()[i].abs() < 1e-15);
        assert!((s.state.u().component(0)[i] - 0.2).abs() < 1e-15);
        assert!(make_single_mode_ic(&[1], 0.5, 0.2, grid, 1.0).is_err());
    }
}
