//! Subcommand implementations. Each returns a JSON report and whether every
//! enabled check passed; the binary maps that to the exit status.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use dampflow::diagnostics::{
    self, boundedness_check, density_envelope_check, fit_exponent, BoundednessCheck, DecayFit, DiagnosticsRecord,
    EnvelopeCheck, FitWindow, Recorder,
};
use dampflow::dynamics::{run, RunStatus};
use dampflow::greens::{uniform_times, verify_multiplier_bound, Block, SupSample};
use dampflow::spectral::Spectral;
use serde::Serialize;

use crate::config::{FitConfig, RunConfig, SymbolCheckConfig};
use crate::{scenario, snapshot};

#[derive(Debug, Clone)]
pub struct Outcome<R> {
    pub report: R,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitEntry {
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    /// Why no fit was produced.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl FitEntry {
    fn passed(&self) -> bool {
        self.fit.as_ref().and_then(|f| f.passed).unwrap_or(true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict<T> {
    pub enabled: bool,
    pub passed: bool,
    #[serde(flatten)]
    pub detail: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub value: f64,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    /// Relative unless the reference is zero.
    pub residual: f64,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeSummary {
    pub final_record: EnvelopeCheck,
    /// Records breaking the envelope.
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub config: RunConfig,
    pub status: RunStatus,
    pub steps: usize,
    pub dt: f64,
    pub records: usize,
    pub final_time: f64,
    pub warnings: Vec<String>,
    /// `‖(a0, u0)‖_{H³}`.
    pub n0: f64,
    pub fits: Vec<FitEntry>,
    pub boundedness: Verdict<Option<BoundednessCheck>>,
    pub density_envelope: Verdict<Option<EnvelopeSummary>>,
    pub criterion_integral: Verdict<Criterion>,
    pub momentum_law: Verdict<Residual>,
    pub mass_drift: Verdict<Residual>,
    /// Decay-weighted norm aggregate; informational.
    pub weighted_norm_aggregate: f64,
    pub final_record: Option<DiagnosticsRecord>,
    pub wall_seconds: f64,
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn relative(residual: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        residual
    } else {
        residual / reference.abs()
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fits every window whose end was reached by the records.
pub fn fit_windows(
    records: &[DiagnosticsRecord],
    windows: &std::collections::BTreeMap<String, FitWindow>,
    length: Option<f64>,
    tolerance: Option<f64>,
) -> Result<Vec<FitEntry>> {
    let last_t = records.last().map(|r| r.t).unwrap_or(0.0);
    let mut out = Vec::new();
    for (name, window) in windows {
        let series = diagnostics::series(records, name)?;
        if window.t_hi > last_t * (1.0 + 1e-12) {
            out.push(FitEntry {
                quantity: name.clone(),
                fit: None,
                skipped: Some(format!("window ends at t = {} but records stop at t = {last_t}", window.t_hi)),
            });
            continue;
        }
        let fit = fit_exponent(name, &series, *window, length)?;
        let fit = match tolerance {
            Some(tol) => fit.judge(tol),
            None => fit,
        };
        out.push(FitEntry { quantity: name.clone(), fit: Some(fit), skipped: None });
    }
    Ok(out)
}

/// Builds the initial state, runs it, writes CSV and report.
pub fn simulate(cfg: &RunConfig) -> Result<Outcome<SimulateReport>> {
    let started = Instant::now();
    let cfg = RunConfig { cutoff: cfg.cutoff.validated()?, ..cfg.clone() };
    let scenario = scenario::build(&cfg)?;
    let sp = Spectral::new(cfg.grid()?);
    let mut recorder = Recorder::new(&sp, cfg.cutoff)?;
    if let Some(path) = &cfg.output.csv_path {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        recorder = recorder.with_csv(Box::new(BufWriter::new(file)))?;
    }
    let outcome = run(&sp, &scenario.state, &cfg.integrator, &mut recorder)?;
    let records = recorder.into_records();
    let mut warnings = scenario.warnings;
    warnings.extend(outcome.warnings.iter().cloned());
    let completed = outcome.status == RunStatus::Completed;

    let first = records.first().copied();
    let last = records.last().copied();
    let n0 = first.map(|r| r.h3_norm()).unwrap_or(0.0);

    let fits = if completed {
        fit_windows(&records, &cfg.fit_windows, Some(cfg.grid.length), cfg.checks.fit_tolerance)?
    } else {
        cfg.fit_windows
            .keys()
            .map(|q| FitEntry { quantity: q.clone(), fit: None, skipped: Some("run did not complete".into()) })
            .collect()
    };

    let boundedness = match (cfg.checks.boundedness_factor, first) {
        (Some(factor), Some(_)) => {
            let h3: Vec<f64> = records.iter().map(|r| r.h3_norm()).collect();
            let check = boundedness_check(&h3, n0, factor);
            Verdict { enabled: true, passed: check.passed, detail: Some(check) }
        }
        _ => Verdict { enabled: false, passed: true, detail: None },
    };

    let density_envelope = match (cfg.checks.density_envelope, first, last) {
        (true, Some(f), Some(l)) => {
            let violations = records.iter().filter(|r| !density_envelope_check(r, f.rho_min, f.rho_max).passed).count();
            let summary = EnvelopeSummary { final_record: density_envelope_check(&l, f.rho_min, f.rho_max), violations };
            Verdict { enabled: true, passed: violations == 0, detail: Some(summary) }
        }
        _ => Verdict { enabled: false, passed: true, detail: None },
    };

    let value = last.map(|r| r.criterion_integral).unwrap_or(0.0);
    let threshold = cfg.checks.criterion_threshold;
    let criterion_integral = Verdict {
        enabled: threshold.is_some(),
        passed: value.is_finite() && threshold.is_none_or(|th| value < th),
        detail: Criterion { value, threshold },
    };

    let (momentum_residual, mass_residual) = match (first, last) {
        (Some(f), Some(l)) => {
            let decay = (-(l.t - f.t)).exp();
            let diff = [0, 1, 2].map(|j| l.momentum[j] - decay * f.momentum[j]);
            (relative(norm3(diff), norm3(f.momentum)), relative((l.mass - f.mass).abs(), f.mass))
        }
        _ => (0.0, 0.0),
    };
    let residual_verdict = |residual: f64, tolerance: Option<f64>| Verdict {
        enabled: tolerance.is_some(),
        passed: tolerance.is_none_or(|tol| residual <= tol),
        detail: Residual { residual, tolerance },
    };
    let momentum_law = residual_verdict(momentum_residual, cfg.checks.momentum_tolerance);
    let mass_drift = residual_verdict(mass_residual, cfg.checks.mass_tolerance);

    let passed = completed
        && fits.iter().all(FitEntry::passed)
        && boundedness.passed
        && density_envelope.passed
        && criterion_integral.passed
        && momentum_law.passed
        && mass_drift.passed;

    let report = SimulateReport {
        status: outcome.status.clone(),
        steps: outcome.steps,
        dt: outcome.dt,
        records: records.len(),
        final_time: last.map(|r| r.t).unwrap_or(0.0),
        warnings,
        n0,
        fits,
        boundedness,
        density_envelope,
        criterion_integral,
        momentum_law,
        mass_drift,
        weighted_norm_aggregate: diagnostics::weighted_norm_aggregate(&records),
        final_record: last,
        wall_seconds: started.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    write_json(cfg.output.json_report_path.as_deref(), &report)?;
    Ok(Outcome { report, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolEntry {
    pub block: Block,
    pub k: usize,
    pub r0: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Times the window end was multiplied by ten.
    pub extensions: usize,
    pub slope: f64,
    pub slope_stderr: f64,
    pub expected_slope: f64,
    pub deviation: f64,
    pub passed: bool,
    pub table: Vec<SupSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolReport {
    pub cutoff: dampflow::spectral::CutoffProfile,
    pub tolerance: f64,
    pub entries: Vec<SymbolEntry>,
}

/// Decay slopes of every symbol block and derivative order `k ≤ 3`.
pub fn symbol_check(cfg: &SymbolCheckConfig) -> Result<Outcome<SymbolReport>> {
    let spec = &cfg.symbol_check;
    let cutoff = cfg.cutoff.validated()?;
    let mut entries = Vec::new();
    for block in Block::ALL {
        for k in 0..=3 {
            let mut t_hi = spec.t_hi;
            let mut extensions = 0;
            let fit = loop {
                let fit = verify_multiplier_bound(block, k, &cutoff, &uniform_times(spec.t_lo, t_hi, spec.count))?;
                if fit.deviation() <= spec.tolerance || extensions == spec.max_extensions {
                    break fit;
                }
                extensions += 1;
                t_hi *= 10.0;
            };
            entries.push(SymbolEntry {
                block,
                k,
                r0: fit.r0,
                t_lo: spec.t_lo,
                t_hi,
                extensions,
                slope: fit.slope,
                slope_stderr: fit.slope_stderr,
                expected_slope: fit.expected_slope,
                deviation: fit.deviation(),
                passed: fit.deviation() <= spec.tolerance,
                table: fit.table,
            });
        }
    }
    let passed = entries.iter().all(|e| e.passed);
    let report = SymbolReport { cutoff, tolerance: spec.tolerance, entries };
    write_json(cfg.output.json_report_path.as_deref(), &report)?;
    Ok(Outcome { report, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub csv: PathBuf,
    pub records: usize,
    pub fits: Vec<FitEntry>,
}

/// Refits decay exponents from a previously written CSV.
pub fn decay_fit(csv: &Path, cfg: &FitConfig) -> Result<Outcome<FitReport>> {
    let file = File::open(csv).with_context(|| format!("opening {}", csv.display()))?;
    let records = diagnostics::read_csv(&mut BufReader::new(file)).with_context(|| format!("reading {}", csv.display()))?;
    let fits = fit_windows(&records, &cfg.windows, cfg.length, cfg.tolerance).context("fit refused")?;
    let passed = fits.iter().all(FitEntry::passed);
    let report = FitReport { csv: csv.to_path_buf(), records: records.len(), fits };
    write_json(cfg.output.as_deref(), &report)?;
    Ok(Outcome { report, passed })
}

/// Writes the configured initial condition as a snapshot.
pub fn make_ic(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let scenario = scenario::build(cfg)?;
    snapshot::save(out, &scenario.state)?;
    let mut stderr = std::io::stderr();
    for w in &scenario.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    Ok(scenario.warnings)
}
