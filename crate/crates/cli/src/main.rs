use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use quasi_c_cli::{
    emit_figure_data, parse_sweep, run_scenario, tolerance_from_env, CliError, Scenario,
    ScenarioConfig, Tolerances,
};
use quasi_c_core::{DriveSpec, HamiltonianParams, Signature};

#[derive(Parser)]
#[command(
    name = "quasi-c",
    version,
    about = "C-operators and metrics for quasi-Hermitian two-level systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-independent Hamiltonian: static C, metric and Dyson map.
    Static(Common),
    /// Time-independent Hamiltonian with a time-dependent metric.
    MetricPicture(Common),
    /// Explicitly time-dependent Hamiltonian.
    FullTd(Common),
    /// Figure data for a (lambda, kappa) sweep, CSV only.
    Figure {
        #[arg(long, value_enum, default_value_t = FigureScenario::FullTd)]
        scenario: FigureScenario,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureScenario {
    MetricPicture,
    FullTd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Drive {
    Const,
    Sin,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    omega: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    kappa: f64,
    /// tau(t) = 1 or sin(t).
    #[arg(long, value_enum, default_value_t = Drive::Const)]
    drive: Drive,
    /// Lower limit of the drive integral; defaults to 0 for const and pi/2 for sin.
    #[arg(long, allow_negative_numbers = true)]
    t_ref: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, default_value_t = 1001)]
    samples: usize,
    /// Midpoint steps per sample interval for the propagation check.
    #[arg(long, default_value_t = 20)]
    steps_per_sample: usize,
    /// Signs of C, e.g. "+-".
    #[arg(long, default_value = "+-")]
    signature: String,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = 1e-5)]
    fd_step: f64,
    /// Tolerance of finite-difference checks.
    #[arg(long, default_value_t = 1e-8)]
    fd_tol: f64,
    /// Tolerance of the propagation check.
    #[arg(long, default_value_t = 1e-6)]
    prop_tol: f64,
    /// Comma-separated lambda:kappa pairs, or "default".
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, default_value = "quasi_c")]
    prefix: PathBuf,
}

impl Common {
    fn into_config(self, scenario: Scenario) -> Result<ScenarioConfig, CliError> {
        let mut drive = match self.drive {
            Drive::Const => DriveSpec::constant(1.0),
            Drive::Sin => DriveSpec::sine(1.0, 1.0),
        };
        if let Some(t_ref) = self.t_ref {
            drive = drive.with_t_ref(t_ref);
        }
        let signature: Signature = self
            .signature
            .parse()
            .map_err(|e| CliError::Config(format!("signature {:?}: {e}", self.signature)))?;
        let algebraic = tolerance_from_env(std::env::var("QUASI_C_TOL").ok().as_deref())?
            .unwrap_or(Tolerances::default().algebraic);
        Ok(ScenarioConfig {
            scenario,
            params: HamiltonianParams::new(self.omega, self.lambda, self.kappa)
                .with_drive(drive)
                .with_hbar(self.hbar),
            signature,
            t0: self.t0,
            t1: self.t1,
            samples: self.samples,
            steps_per_sample: self.steps_per_sample,
            fd_step: self.fd_step,
            tolerances: Tolerances {
                algebraic,
                derivative: self.fd_tol,
                propagation: self.prop_tol,
            },
            prefix: self.prefix,
            sweep: match self.sweep {
                Some(s) => parse_sweep(&s)?,
                None => Vec::new(),
            },
        })
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (scenario, common, figure) = match cli.command {
        Command::Static(c) => (Scenario::Static, c, false),
        Command::MetricPicture(c) => (Scenario::MetricPicture, c, false),
        Command::FullTd(c) => (Scenario::FullTd, c, false),
        Command::Figure { scenario, common } => {
            let s = match scenario {
                FigureScenario::MetricPicture => Scenario::MetricPicture,
                FigureScenario::FullTd => Scenario::FullTd,
            };
            (s, common, true)
        }
    };
    let cfg = common.into_config(scenario)?;
    if figure {
        for path in emit_figure_data(&cfg)? {
            println!("{}", path.display());
        }
        return Ok(true);
    }
    let summary = run_scenario(&cfg)?;
    for path in &summary.csv_paths {
        println!("{}", path.display());
    }
    println!("{}", summary.report_path.display());
    for run in &summary.runs {
        for check in run.report.checks.iter().filter(|c| !c.pass) {
            eprintln!(
                "FAIL lambda={} kappa={} {} = {:e} > {:e}{}",
                run.params.lambda,
                run.params.kappa,
                check.name,
                check.value,
                check.tolerance,
                check.time.map(|t| format!(" at t={t}")).unwrap_or_default()
            );
        }
    }
    Ok(summary.all_pass())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("quasi-c: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
