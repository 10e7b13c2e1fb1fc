//! Scenario runner behind the `quasi-c` binary.
//!
//! Each run samples a scenario on a uniform time grid, writes one CSV per
//! `(λ, κ)` pair and appends a JSON-lines verification report.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use quasi_c_core::biortho::biortho_system;
use quasi_c_core::coperator::{
    c_from_system, closed_form_metric, dyson_map, static_constraint_suite, MetricOperator,
};
use quasi_c_core::lr_solver::{lr_residual, time_ordered_propagate};
use quasi_c_core::model::{hamiltonian_at, parity};
use quasi_c_core::{
    Check, ClosedFormInvariant, ComplexMatrix2, DriveKind, Error, HamiltonianParams,
    InvariantState, InvariantVariant, MetricForm, Regime, Signature, VerificationReport,
    DEFAULT_TOL,
};

pub const CSV_HEADER: &str =
    "t,rho_eig_hi,rho_eig_lo,det_rho,lr_residual,quasi_residual,c_sq_residual";

/// Figure sweep: panel (a) pairs and their transposes for panel (b), as `(λ, κ)`.
pub const DEFAULT_SWEEP: [(f64, f64); 6] = [
    (2.0, 1.0),
    (3.0, 1.0),
    (2.0, 1.5),
    (1.0, 2.0),
    (1.0, 3.0),
    (1.5, 2.0),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Static,
    MetricPicture,
    FullTd,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::Static => "static",
            Self::MetricPicture => "metric-picture",
            Self::FullTd => "full-td",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities: `𝒞² = 𝕀`, commutators, `det ρ`.
    pub algebraic: f64,
    /// Finite-difference residuals.
    pub derivative: f64,
    /// Time-ordered propagation against the closed form.
    pub propagation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: DEFAULT_TOL,
            derivative: 1e-8,
            propagation: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub params: HamiltonianParams,
    pub signature: Signature,
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub steps_per_sample: usize,
    pub fd_step: f64,
    pub tolerances: Tolerances,
    /// Output files are `<prefix>_<scenario>_<λ>_<κ>.csv` and `<prefix>_report.jsonl`.
    pub prefix: PathBuf,
    /// `(λ, κ)` pairs; empty means the single pair in `params`.
    pub sweep: Vec<(f64, f64)>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("i/o on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::InvalidDrive(_)
            | Error::DriveRange { .. }
            | Error::SignatureLength { .. }
            | Error::InvalidSignature(_)
            | Error::RegimeMismatch { .. }
            | Error::InvalidSteps => Self::Config(e.to_string()),
            other => Self::Numerical(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// One CSV row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub rho_eig_hi: f64,
    pub rho_eig_lo: f64,
    pub det_rho: f64,
    pub lr_residual: f64,
    pub quasi_residual: f64,
    pub c_sq_residual: f64,
}

impl Sample {
    fn csv_row(&self, out: &mut String) {
        let cols = [
            self.t,
            self.rho_eig_hi,
            self.rho_eig_lo,
            self.det_rho,
            self.lr_residual,
            self.quasi_residual,
            self.c_sq_residual,
        ];
        for (k, v) in cols.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{}", fmt17(*v)).unwrap();
        }
        out.push('\n');
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Sampled series and per-sample checks for one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRun {
    pub params: HamiltonianParams,
    pub samples: Vec<Sample>,
    pub report: VerificationReport,
}

/// Outcome of [`run_scenario`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub csv_paths: Vec<PathBuf>,
    pub report_path: PathBuf,
    pub runs: Vec<ScenarioRun>,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.runs.iter().all(|r| r.report.all_pass())
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.t1 > self.t0) {
            return Err(CliError::Config(format!(
                "t1 must exceed t0 (got t0 = {}, t1 = {})",
                self.t0, self.t1
            )));
        }
        if self.samples < 2 {
            return Err(CliError::Config(format!(
                "samples must be at least 2 (got {})",
                self.samples
            )));
        }
        if self.steps_per_sample == 0 {
            return Err(CliError::Config("steps-per-sample must be positive".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(CliError::Config(format!(
                "fd-step must be positive (got {})",
                self.fd_step
            )));
        }
        if self.signature.len() != 2 {
            return Err(CliError::Config(format!(
                "signature needs 2 signs (got {})",
                self.signature.len()
            )));
        }
        let t = self.tolerances;
        for (name, v) in [
            ("tolerance", t.algebraic),
            ("fd tolerance", t.derivative),
            ("propagation tolerance", t.propagation),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Config(format!(
                    "{name} must be positive (got {v})"
                )));
            }
        }
        if self.scenario == Scenario::Static && self.params.drive.kind != DriveKind::Constant(1.0) {
            return Err(CliError::Config(
                "the static scenario needs the constant drive".into(),
            ));
        }
        self.params.validate()?;
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.samples - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.t1
                } else {
                    self.t0 + (self.t1 - self.t0) * k as f64 / n as f64
                }
            })
            .collect()
    }

    fn parameter_sets(&self) -> Vec<HamiltonianParams> {
        if self.sweep.is_empty() {
            return vec![self.params.clone()];
        }
        self.sweep
            .iter()
            .map(|&(lambda, kappa)| HamiltonianParams {
                lambda,
                kappa,
                ..self.params.clone()
            })
            .collect()
    }

    pub fn csv_path(&self, p: &HamiltonianParams) -> PathBuf {
        suffixed(
            &self.prefix,
            &format!("_{}_{}_{}.csv", self.scenario.name(), p.lambda, p.kappa),
        )
    }

    pub fn report_path(&self) -> PathBuf {
        suffixed(&self.prefix, "_report.jsonl")
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs every parameter set of `cfg`, writing CSVs and the report.
pub fn run_scenario(cfg: &ScenarioConfig) -> CliResult<RunSummary> {
    cfg.validate()?;
    let started = Instant::now();
    let mut runs = Vec::new();
    for p in cfg.parameter_sets() {
        let mut single = cfg.clone();
        single.params = p;
        single.validate()?;
        runs.push(sample_scenario(&single)?);
    }
    let mut csv_paths = Vec::new();
    for run in &runs {
        let path = cfg.csv_path(&run.params);
        write_file(&path, &render_csv(&run.samples))?;
        csv_paths.push(path);
    }
    let report_path = cfg.report_path();
    let report = render_report(cfg, &runs, started.elapsed().as_secs_f64());
    write_file(&report_path, &report)?;
    Ok(RunSummary {
        csv_paths,
        report_path,
        runs,
    })
}

/// Figure data only: one CSV per pair of `cfg.sweep`, or [`DEFAULT_SWEEP`]
/// when it is empty.
pub fn emit_figure_data(cfg: &ScenarioConfig) -> CliResult<Vec<PathBuf>> {
    if cfg.scenario == Scenario::Static {
        return Err(CliError::Config(
            "figure data needs the metric-picture or full-td scenario".into(),
        ));
    }
    let mut sweep_cfg = cfg.clone();
    if sweep_cfg.sweep.is_empty() {
        sweep_cfg.sweep = DEFAULT_SWEEP.to_vec();
    }
    sweep_cfg.validate()?;
    let mut paths = Vec::new();
    for p in sweep_cfg.parameter_sets() {
        let mut single = sweep_cfg.clone();
        single.params = p;
        single.validate()?;
        let run = sample_scenario(&single)?;
        let path = sweep_cfg.csv_path(&run.params);
        write_file(&path, &render_csv(&run.samples))?;
        paths.push(path);
    }
    Ok(paths)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(contents.as_bytes()).map_err(io_err)
}

pub fn render_csv(samples: &[Sample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1) * 7 / 4);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in samples {
        s.csv_row(&mut out);
    }
    out
}

#[derive(Serialize)]
struct MetaLine<'a> {
    kind: &'static str,
    version: &'static str,
    scenario: &'a str,
    omega: f64,
    hbar: f64,
    drive: &'a quasi_c_core::DriveSpec,
    signature: String,
    t0: f64,
    t1: f64,
    samples: usize,
    steps_per_sample: usize,
    fd_step: f64,
    tolerance: f64,
    fd_tolerance: f64,
    propagation_tolerance: f64,
    pairs: Vec<(f64, f64)>,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct CheckLine<'a> {
    kind: &'static str,
    scenario: &'a str,
    lambda: f64,
    kappa: f64,
    name: &'a str,
    /// Worst value over the samples.
    value: f64,
    tolerance: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    samples: usize,
    failed: usize,
}

/// A metadata line, then one line per check name and parameter set carrying
/// the worst sample.
pub fn render_report(cfg: &ScenarioConfig, runs: &[ScenarioRun], wall_time_s: f64) -> String {
    let meta = MetaLine {
        kind: "meta",
        version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.scenario.name(),
        omega: cfg.params.omega,
        hbar: cfg.params.hbar,
        drive: &cfg.params.drive,
        signature: cfg.signature.to_string(),
        t0: cfg.t0,
        t1: cfg.t1,
        samples: cfg.samples,
        steps_per_sample: cfg.steps_per_sample,
        fd_step: cfg.fd_step,
        tolerance: cfg.tolerances.algebraic,
        fd_tolerance: cfg.tolerances.derivative,
        propagation_tolerance: cfg.tolerances.propagation,
        pairs: runs
            .iter()
            .map(|r| (r.params.lambda, r.params.kappa))
            .collect(),
        wall_time_s,
    };
    let mut out = serde_json::to_string(&meta).expect("serializable");
    out.push('\n');
    for run in runs {
        let mut names: Vec<&str> = Vec::new();
        for c in &run.report.checks {
            if !names.contains(&c.name.as_str()) {
                names.push(&c.name);
            }
        }
        for name in names {
            let group: Vec<&Check> = run
                .report
                .checks
                .iter()
                .filter(|c| c.name == name)
                .collect();
            let worst = group
                .iter()
                .copied()
                .reduce(|a, b| {
                    if b.value > a.value || b.value.is_nan() {
                        b
                    } else {
                        a
                    }
                })
                .expect("non-empty group");
            let line = CheckLine {
                kind: "check",
                scenario: cfg.scenario.name(),
                lambda: run.params.lambda,
                kappa: run.params.kappa,
                name,
                value: worst.value,
                tolerance: worst.tolerance,
                pass: group.iter().all(|c| c.pass),
                t: worst.time,
                samples: group.len(),
                failed: group.iter().filter(|c| !c.pass).count(),
            };
            out.push_str(&serde_json::to_string(&line).expect("serializable"));
            out.push('\n');
        }
    }
    out
}

/// Samples one parameter set without touching the filesystem.
pub fn sample_scenario(cfg: &ScenarioConfig) -> CliResult<ScenarioRun> {
    match cfg.scenario {
        Scenario::Static => sample_static(cfg),
        Scenario::MetricPicture | Scenario::FullTd => sample_dynamic(cfg),
    }
}

fn sample_static(cfg: &ScenarioConfig) -> CliResult<ScenarioRun> {
    let p = &cfg.params;
    let tol = cfg.tolerances.algebraic;
    let h = hamiltonian_at(p, cfg.t0)?;
    let c_op = c_from_system(&biortho_system(&h)?, &cfg.signature)?;
    let mut report = static_constraint_suite(&c_op, &h, tol);

    // A static metric is required here: a non-Hermitian or indefinite ρ is a
    // numerical failure rather than a failed check.
    let rho = MetricOperator::new(parity() * c_op.matrix, None, tol)?;
    let eta = dyson_map(&rho, tol)?;
    let h_phys = eta.similarity(&h)?;
    let quasi = (h.adjoint() * rho.matrix - rho.matrix * h).frobenius_norm();
    report.push(Check::new("quasi_hermiticity", quasi, tol));
    report.push(Check::new(
        "dyson_hermitian",
        h_phys.anti_hermitian_residual(),
        tol,
    ));
    report.push(Check::new(
        "dyson_metric",
        eta.metric_residual(&rho.matrix),
        tol,
    ));

    let lr = (h * c_op.matrix - c_op.matrix * h).frobenius_norm();
    let c_sq = (c_op.matrix * c_op.matrix - ComplexMatrix2::identity()).frobenius_norm();
    let samples = cfg
        .grid()
        .into_iter()
        .map(|t| Sample {
            t,
            rho_eig_hi: rho.max_eigenvalue,
            rho_eig_lo: rho.min_eigenvalue,
            det_rho: rho.det,
            lr_residual: lr,
            quasi_residual: quasi,
            c_sq_residual: c_sq,
        })
        .collect();
    Ok(ScenarioRun {
        params: p.clone(),
        samples,
        report,
    })
}

fn dynamic_variant(cfg: &ScenarioConfig) -> CliResult<InvariantVariant> {
    Ok(match cfg.scenario {
        Scenario::FullTd => InvariantVariant::FullTd,
        _ => match cfg.params.regime() {
            Regime::PtSymmetric => InvariantVariant::PtForm,
            Regime::SpontaneouslyBroken => InvariantVariant::BrokenForm,
            Regime::ExceptionalPoint => InvariantVariant::EpForm,
        },
    })
}

fn sample_dynamic(cfg: &ScenarioConfig) -> CliResult<ScenarioRun> {
    let p = &cfg.params;
    let tols = cfg.tolerances;
    let cf = ClosedFormInvariant::new(dynamic_variant(cfg)?, p.clone())?;
    // The invariants are involutions, so 𝒞 = s₊(𝕀 + I)/2 + s₋(𝕀 − I)/2 with
    // the signature ordered as (Λ = +1, Λ = −1). Rebuilding from eigenvectors
    // instead loses ε‖I‖² when I is large.
    let (s_plus, s_minus) = match cfg.signature.signs() {
        [a, b] => (f64::from(*a), f64::from(*b)),
        _ => unreachable!("validated"),
    };
    let c_at = |t: f64| -> quasi_c_core::Result<ComplexMatrix2> {
        let i = cf.matrix(t)?;
        let id = ComplexMatrix2::identity();
        Ok((id + i).scale_real(0.5 * s_plus) + (id - i).scale_real(0.5 * s_minus))
    };
    let rho_at = |t: f64| c_at(t).map(|c| parity() * c);
    let sz = parity();
    let t_ref = p.drive.t_ref;

    let grid = cfg.grid();
    let mut samples = Vec::with_capacity(grid.len());
    let mut report = VerificationReport::new();
    let mut state = InvariantState::from_matrix(&cf.matrix(grid[0])?, grid[0]);
    for (k, &t) in grid.iter().enumerate() {
        let c_t = c_at(t)?;
        let c_scale = c_t.frobenius_norm().max(1.0);
        let rho = MetricOperator::new(sz * c_t, Some(t), tols.algebraic)?;
        let rho_scale = rho.matrix.frobenius_norm().max(1.0);

        let c_sq = (c_t * c_t - ComplexMatrix2::identity()).frobenius_norm() / (c_scale * c_scale);
        let lr = lr_residual(c_at, p, t, cfg.fd_step)? / c_scale;
        let drho =
            (rho_at(t + cfg.fd_step)? - rho_at(t - cfg.fd_step)?).scale_real(0.5 / cfg.fd_step);
        let h = hamiltonian_at(p, t)?;
        let quasi = (drho.scale(quasi_c_core::Complex::new(0.0, p.hbar))
            - h.adjoint() * rho.matrix
            + rho.matrix * h)
            .frobenius_norm()
            / rho_scale;
        let [a, b, c, d] = rho.matrix.entries();
        let det_scale = (a * d).norm().max((b * c).norm()).max(1.0);

        report.push(Check::new("c_squared", c_sq, tols.algebraic).at(t));
        report.push(Check::new("lr_equation", lr, tols.derivative).at(t));
        report.push(Check::new("quasi_hermiticity", quasi, tols.derivative).at(t));
        report.push(Check::new("det_rho", (rho.det - 1.0).abs() / det_scale, tols.algebraic).at(t));
        report.push(Check::new("rho_positivity", -rho.min_eigenvalue, 0.0).at(t));
        if cfg.scenario == Scenario::FullTd {
            let reflected = c_at(2.0 * t_ref - t)?;
            let pt = (sz * reflected.conj() * sz - c_t).frobenius_norm() / c_scale;
            report.push(Check::new("pt_commutation", pt, tols.algebraic).at(t));
        }
        if k > 0 {
            state = time_ordered_propagate(p, &state, grid[k - 1], t, cfg.steps_per_sample)?;
            let exact = cf.matrix(t)?;
            let err = (state.matrix() - exact).max_abs() / exact.max_abs().max(1.0);
            report.push(Check::new("propagation", err, tols.propagation).at(t));
        }

        samples.push(Sample {
            t,
            rho_eig_hi: rho.max_eigenvalue,
            rho_eig_lo: rho.min_eigenvalue,
            det_rho: rho.det,
            lr_residual: lr,
            quasi_residual: quasi,
            c_sq_residual: c_sq,
        });
    }
    Ok(ScenarioRun {
        params: p.clone(),
        samples,
        report,
    })
}

/// The metric of `cfg` at `t` from the closed form, for cross-checks.
pub fn closed_form_rho(cfg: &ScenarioConfig, t: f64) -> CliResult<MetricOperator> {
    let form = match dynamic_variant(cfg)? {
        InvariantVariant::PtForm => MetricForm::PtSymmetric,
        InvariantVariant::BrokenForm => MetricForm::Broken,
        InvariantVariant::EpForm => MetricForm::ExceptionalPoint,
        InvariantVariant::FullTd => MetricForm::FullTd,
    };
    Ok(closed_form_metric(form, &cfg.params, t)?)
}

/// Parses `λ:κ` pairs separated by commas; `default` selects [`DEFAULT_SWEEP`].
pub fn parse_sweep(s: &str) -> CliResult<Vec<(f64, f64)>> {
    if s.trim() == "default" {
        return Ok(DEFAULT_SWEEP.to_vec());
    }
    s.split(',')
        .map(|item| {
            let (l, k) = item.split_once(':').ok_or_else(|| {
                CliError::Config(format!("sweep entry {item:?} is not lambda:kappa"))
            })?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Config(format!("sweep entry {item:?}: {e}")))
            };
            Ok((parse(l)?, parse(k)?))
        })
        .collect()
}

/// `QUASI_C_TOL`, when set, overrides the algebraic tolerance.
pub fn tolerance_from_env(value: Option<&str>) -> CliResult<Option<f64>> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<f64>() {
            Ok(t) if t > 0.0 => Ok(Some(t)),
            _ => Err(CliError::Config(format!(
                "QUASI_C_TOL={v:?} is not a positive number"
            ))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quasi_c_core::DriveSpec;

    fn config(scenario: Scenario, lambda: f64, kappa: f64) -> ScenarioConfig {
        ScenarioConfig {
            scenario,
            params: HamiltonianParams::new(1.0, lambda, kappa),
            signature: Signature::plus_minus(),
            t0: 0.0,
            t1: 3.0,
            samples: 31,
            steps_per_sample: 200,
            fd_step: 1e-5,
            tolerances: Tolerances::default(),
            prefix: PathBuf::from("out"),
            sweep: Vec::new(),
        }
    }

    #[test]
    fn fmt17_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn paths_follow_prefix() {
        let cfg = config(Scenario::FullTd, 2.0, 1.5);
        assert_eq!(
            cfg.csv_path(&cfg.params),
            PathBuf::from("out_full-td_2_1.5.csv")
        );
        assert_eq!(cfg.report_path(), PathBuf::from("out_report.jsonl"));
    }

    #[test]
    fn config_errors() {
        let mut cfg = config(Scenario::FullTd, 2.0, 1.0);
        cfg.t1 = cfg.t0;
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
        let mut cfg = config(Scenario::FullTd, 2.0, 1.0);
        cfg.samples = 1;
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
        let mut cfg = config(Scenario::Static, 2.0, 1.0);
        cfg.params = cfg.params.with_drive(DriveSpec::sine(1.0, 1.0));
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn static_constraints_pass_in_pt_regime() {
        let run = sample_scenario(&config(Scenario::Static, 2.0, 1.0)).unwrap();
        assert!(run.report.all_pass(), "{:?}", run.report);
        for name in ["c_squared", "pt_commutation", "h_commutator"] {
            assert!(run.report.get(name).unwrap().pass);
        }
    }

    #[test]
    fn static_broken_is_numerical_failure() {
        let err = sample_scenario(&config(Scenario::Static, 1.0, 2.0)).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn dynamic_rho_matches_closed_form() {
        for (scenario, l, k) in [
            (Scenario::FullTd, 2.0, 1.0),
            (Scenario::FullTd, 1.0, 2.0),
            (Scenario::MetricPicture, 2.0, 1.0),
            (Scenario::MetricPicture, 1.0, 2.0),
            (Scenario::MetricPicture, 1.0, 1.0),
        ] {
            let mut cfg = config(scenario, l, k);
            cfg.params = cfg.params.with_drive(DriveSpec::sine(1.0, 1.0));
            let run = sample_scenario(&cfg).unwrap();
            let bad: Vec<_> = run
                .report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .take(3)
                .collect();
            assert!(bad.is_empty(), "{scenario:?} {l} {k} {bad:?}");
            for s in &run.samples {
                let rho = closed_form_rho(&cfg, s.t).unwrap();
                assert!((rho.min_eigenvalue - s.rho_eig_lo).abs() < 1e-9);
                assert!((rho.max_eigenvalue - s.rho_eig_hi).abs() < 1e-9 * rho.max_eigenvalue);
            }
        }
    }

    #[test]
    fn wrong_signature_fails_positivity() {
        let mut cfg = config(Scenario::FullTd, 2.0, 1.0);
        cfg.signature = "-+".parse().unwrap();
        let run = sample_scenario(&cfg).unwrap();
        assert!(!run.report.get("rho_positivity").unwrap().pass);
        assert!(run.report.get("c_squared").unwrap().pass);
    }

    #[test]
    fn sweep_parsing() {
        assert_eq!(
            parse_sweep("2:1, 1:2").unwrap(),
            vec![(2.0, 1.0), (1.0, 2.0)]
        );
        assert_eq!(parse_sweep("default").unwrap().len(), 6);
        assert!(parse_sweep("2;1").is_err());
        assert!(parse_sweep("a:1").is_err());
    }

    #[test]
    fn env_tolerance() {
        assert_eq!(tolerance_from_env(None).unwrap(), None);
        assert_eq!(tolerance_from_env(Some("1e-8")).unwrap(), Some(1e-8));
        assert!(tolerance_from_env(Some("-1")).is_err());
        assert!(tolerance_from_env(Some("x")).is_err());
    }

    #[test]
    fn report_groups_checks() {
        let cfg = config(Scenario::FullTd, 2.0, 1.0);
        let run = sample_scenario(&cfg).unwrap();
        let text = render_report(&cfg, std::slice::from_ref(&run), 0.0);
        let lines: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines[0]["kind"], "meta");
        let names: Vec<&str> = lines[1..]
            .iter()
            .map(|l| l["name"].as_str().unwrap())
            .collect();
        assert_eq!(
            names,
            [
                "c_squared",
                "lr_equation",
                "quasi_hermiticity",
                "det_rho",
                "rho_positivity",
                "pt_commutation",
                "propagation"
            ]
        );
        for l in &lines[1..] {
            let pass = l["value"].as_f64().unwrap() <= l["tolerance"].as_f64().unwrap();
            assert_eq!(l["pass"].as_bool().unwrap(), pass);
        }
    }
}
