//! `zeno-herald`: CSV sweeps of the heralded single-photon source.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zeno_herald::sweep::{
    run_fig2a, run_fig2b, run_fig4, run_fig5, run_point, Experiment, Grid, Overrides, SweepSpec,
};
use zeno_herald::verify::{run_verify, VerifyOptions};

use config::ConfigFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("verification failed")]
    Verify,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Verify => 1,
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl From<zeno_herald::Error> for CliError {
    fn from(e: zeno_herald::Error) -> Self {
        Self::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "zeno-herald",
    version,
    about = "Heralded single-photon source sweeps (CSV output)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter output P0, P1, P(n>1) against the input mean photon number.
    Fig2a(Common),
    /// Filter output P0, P1 against the relative single-photon loss.
    Fig2b(Common),
    /// P_s, P_e and H against the gate TPA strength, both detector presets.
    Fig4(Common),
    /// Source fidelity F against the gate TPA strength, realistic detectors.
    Fig5(Common),
    /// A single operating point, as a one-row CSV plus a summary.
    Point(Common),
    /// Run the property suite and report each check with its margin.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// Output CSV path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all available cores [default: 0]
    #[arg(long)]
    workers: Option<usize>,
    /// key=value file setting any of the options below; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input mean photon number [default: 3.5]
    #[arg(long)]
    mu: Option<f64>,
    /// Single-photon loss relative to TPA, R1/R2 [default: 1e-3; fig4/fig5 sweep 0, 1e-2, 1e-3, 1e-4]
    #[arg(long)]
    loss_ratio: Option<f64>,
    /// Filter TPA strength [default: 15]
    #[arg(long)]
    gamma2_filter: Option<f64>,
    /// Gate TPA strength for `point` [default: 100]
    #[arg(long)]
    gamma2_gate: Option<f64>,
    /// Detector efficiency of the realistic preset [default: 0.75]
    #[arg(long)]
    eta: Option<f64>,
    /// Dark-count probability of the realistic preset [default: 1e-5]
    #[arg(long)]
    dark: Option<f64>,
    /// Sweep axis start:stop:count:lin|log [default: fig2a 0:5:101:lin, fig2b 1e-4:1:41:log, fig4/fig5 0.1:1000:61:log plus 0]
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Output report path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Negative control: corrupt one two-photon Hadamard entry
    #[arg(long, hide = true)]
    corrupt_u2: bool,
}

fn build_spec(experiment: Experiment, args: &Common) -> Result<SweepSpec, CliError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let pick = |flag: Option<f64>, key: &str| -> Result<Option<f64>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => file.parsed(key),
        }
    };
    let mut spec = SweepSpec::new(experiment);
    spec.fixed = Overrides {
        mu: pick(args.mu, "mu")?,
        loss_ratio: pick(args.loss_ratio, "loss-ratio")?,
        gamma2_filter: pick(args.gamma2_filter, "gamma2-filter")?,
        gamma2_gate: pick(args.gamma2_gate, "gamma2-gate")?,
        eta: pick(args.eta, "eta")?,
        dark: pick(args.dark, "dark")?,
    };
    spec.workers = match args.workers {
        Some(w) => w,
        None => file.parsed("workers")?.unwrap_or(0),
    };
    let grid = match &args.grid {
        Some(g) => Some(g.parse::<Grid>()?),
        None => file.parsed::<Grid>("grid")?,
    };
    spec.grid = grid;
    Ok(spec)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (experiment, args) = match cli.command {
        Command::Verify(v) => {
            let report = run_verify(&VerifyOptions {
                corrupt_u2: v.corrupt_u2,
            })?;
            write_output(v.out.as_ref(), &format!("{report}\n"))?;
            return if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::Verify)
            };
        }
        Command::Fig2a(a) => (Experiment::Fig2a, a),
        Command::Fig2b(a) => (Experiment::Fig2b, a),
        Command::Fig4(a) => (Experiment::Fig4, a),
        Command::Fig5(a) => (Experiment::Fig5, a),
        Command::Point(a) => (Experiment::Point, a),
    };
    let spec = build_spec(experiment, &args)?;
    let table = match experiment {
        Experiment::Fig2a => run_fig2a(&spec)?,
        Experiment::Fig2b => run_fig2b(&spec)?,
        Experiment::Fig4 => run_fig4(&spec)?,
        Experiment::Fig5 => run_fig5(&spec)?,
        Experiment::Point => {
            let (table, m) = run_point(&spec)?;
            write_output(args.out.as_ref(), &table.to_csv())?;
            let summary = format!(
                "P_s = {:.6e}\nP_e = {:.6e}\nH   = {:.6}\nF   = {:.6}\np_multi_input = {:.6e}\n",
                m.p_s, m.p_e, m.h, m.f, m.p_multi_input
            );
            // keep stdout pure CSV when no output file is given
            if args.out.is_some() {
                print!("{summary}");
            } else {
                eprint!("{summary}");
            }
            return Ok(());
        }
        Experiment::Verify => unreachable!("handled above"),
    };
    write_output(args.out.as_ref(), &table.to_csv())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Verify) {
                eprintln!("zeno-herald: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
