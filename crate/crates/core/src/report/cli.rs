use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{cmd_compare, cmd_formulas, cmd_markov, cmd_sim, CmdError, CmdOutput, Status};
use crate::markov::{BuiltinModel, DEFAULT_TOL};
use crate::pipeline::CoreConfig;
use crate::workload::{canonical_cases, CANONICAL_SOURCE};

#[derive(Debug, Parser)]
#[command(
    name = "ifr",
    version,
    about = "Fault-injectable repairable pipeline and mission-reliability tools"
)]
pub struct Cli {
    /// Seed for every randomized step; overrides `rng_seed` from --config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the CSV report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// File of `key = value` machine configuration overrides.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a program on the repairable core under fault scenarios.
    Sim(SimArgs),
    /// Tabulate closed-form dependability formulas.
    Formulas(FormulaArgs),
    /// Bracket the death probability of a Markov model.
    Markov(MarkovArgs),
    /// Compare simplex, TMR, standby and the repairable pipeline.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// Assembly program; the built-in loop workload when omitted.
    pub program: Option<PathBuf>,
    /// Fault scenario file, one case per use.
    #[arg(long)]
    pub scenario: Vec<PathBuf>,
    /// Also run the four stuck-at and delay recovery cases.
    #[arg(long)]
    pub canonical: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FormulaArgs {
    #[arg(long)]
    pub tmr: bool,
    #[arg(long)]
    pub standby: bool,
    /// Block with `s` spares.
    #[arg(long)]
    pub ifr: bool,
    /// Pipeline composite with coverage, switch and controller terms.
    #[arg(long)]
    pub ifr_pipeline: bool,
    /// Component reliability: a value, `a..b` stepped by --step, or `a,b,c`.
    #[arg(short = 'R', long = "r", visible_aliases = ["rb", "rp"], default_value = "0..1")]
    pub r: String,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Spare count grid (integers).
    #[arg(short = 's', long, default_value = "1")]
    pub spares: String,
    #[arg(long, default_value_t = 1.0)]
    pub coverage: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rsw: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rctrl: f64,
    /// Steady-state availability from --mttf and --mttr.
    #[arg(long)]
    pub availability: bool,
    #[arg(long, default_value = "1")]
    pub mttf: String,
    #[arg(long, default_value = "0")]
    pub mttr: String,
    /// Exponential reliability from --lambda and --time.
    #[arg(long)]
    pub exp: bool,
    #[arg(long, default_value = "1e-6")]
    pub lambda: String,
    #[arg(long, default_value = "1000")]
    pub time: String,
}

impl Default for FormulaArgs {
    fn default() -> Self {
        FormulaArgs {
            tmr: false,
            standby: false,
            ifr: false,
            ifr_pipeline: false,
            r: "0..1".into(),
            step: 0.1,
            spares: "1".into(),
            coverage: 1.0,
            rsw: 1.0,
            rctrl: 1.0,
            availability: false,
            mttf: "1".into(),
            mttr: "0".into(),
            exp: false,
            lambda: "1e-6".into(),
            time: "1000".into(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MarkovArgs {
    /// Model description file.
    #[arg(long, conflicts_with = "builtin")]
    pub model: Option<PathBuf>,
    /// simplex, tmr, standby or ifr-pipeline.
    #[arg(long)]
    pub builtin: Option<BuiltinModel>,
    /// Mission time in hours.
    #[arg(short = 'T', long = "time", default_value_t = 1000.0)]
    pub time: f64,
    /// Relative bracket width.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Value of the swept constant for a single-point solve.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Constant that --lambda and --sweep set.
    #[arg(long)]
    pub constant: Option<String>,
    /// Log-spaced sweep `lo..hi`.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    /// Add a Monte-Carlo estimate with this many trials.
    #[arg(long)]
    pub mc: Option<u64>,
    #[arg(long, default_value_t = BuiltinModel::DEFAULT_AUX_RATIO)]
    pub sw_ratio: f64,
    #[arg(long, default_value_t = BuiltinModel::DEFAULT_AUX_RATIO)]
    pub ctrl_ratio: f64,
}

impl Default for MarkovArgs {
    fn default() -> Self {
        MarkovArgs {
            model: None,
            builtin: None,
            time: 1000.0,
            tol: DEFAULT_TOL,
            lambda: None,
            constant: None,
            sweep: None,
            points: 25,
            mc: None,
            sw_ratio: BuiltinModel::DEFAULT_AUX_RATIO,
            ctrl_ratio: BuiltinModel::DEFAULT_AUX_RATIO,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(short = 'T', long = "time", default_value_t = 1000.0)]
    pub time: f64,
    /// Log-spaced failure-rate range `lo..hi`.
    #[arg(long, default_value = "1e-6..1e-2")]
    pub range: String,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    /// Single failure rate instead of a range.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = BuiltinModel::DEFAULT_AUX_RATIO)]
    pub sw_ratio: f64,
    #[arg(long, default_value_t = BuiltinModel::DEFAULT_AUX_RATIO)]
    pub ctrl_ratio: f64,
}

impl Default for CompareArgs {
    fn default() -> Self {
        CompareArgs {
            time: 1000.0,
            range: "1e-6..1e-2".into(),
            points: 25,
            lambda: None,
            tol: DEFAULT_TOL,
            sw_ratio: BuiltinModel::DEFAULT_AUX_RATIO,
            ctrl_ratio: BuiltinModel::DEFAULT_AUX_RATIO,
        }
    }
}

fn read(path: &Path) -> Result<String, CmdError> {
    fs::read_to_string(path).map_err(|e| CmdError::new(Status::Io, format!("{}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> Result<CmdOutput, CmdError> {
    let mut config = CoreConfig::default();
    if let Some(path) = &cli.config {
        config
            .apply_overrides(&read(path)?)
            .map_err(|e| CmdError::parse(format!("{}: {e}", path.display())))?;
    }
    if let Some(seed) = cli.seed {
        config.rng_seed = seed;
    }
    match &cli.command {
        Command::Sim(args) => {
            let (name, source) = match &args.program {
                Some(p) => (p.display().to_string(), read(p)?),
                None => ("canonical".to_string(), CANONICAL_SOURCE.to_string()),
            };
            let mut cases = Vec::new();
            for p in &args.scenario {
                cases.push((p.display().to_string(), read(p)?));
            }
            if args.canonical {
                for c in canonical_cases() {
                    cases.push((c.name.to_string(), c.scenario.to_string()));
                }
            }
            if cases.is_empty() {
                cases.push(("fault-free".to_string(), String::new()));
            }
            cmd_sim(&name, &source, &cases, &config)
        }
        Command::Formulas(args) => cmd_formulas(args, &config),
        Command::Markov(args) => {
            let text = match &args.model {
                Some(p) => Some((p.display().to_string(), read(p)?)),
                None => None,
            };
            cmd_markov(args, text.as_ref().map(|(n, t)| (n.as_str(), t.as_str())), &config)
        }
        Command::Compare(args) => cmd_compare(args, &config),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. The report goes to `--out` or stdout; the summary goes
/// to stderr, or stdout when the report is in a file.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = match dispatch(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return e.status.code();
        }
    };
    let csv = out.report.render();
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, csv) {
                eprintln!("error: {}: {e}", path.display());
                return Status::Io.code();
            }
            print!("{}", out.summary);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(csv.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return Status::Io.code();
            }
            eprint!("{}", out.summary);
        }
    }
    out.status.code()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn reliability_aliases() {
        let cli = Cli::try_parse_from(["ifr", "formulas", "--ifr", "--rb", "0.9", "-s", "0..3"]).unwrap();
        let Command::Formulas(f) = cli.command else { panic!() };
        assert_eq!(f.r, "0.9");
        assert_eq!(f.spares, "0..3");
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["ifr", "compare", "--seed", "9", "--lambda", "1e-6"]).unwrap();
        assert_eq!(cli.seed, Some(9));
    }

    #[test]
    fn unknown_builtin_is_a_usage_error() {
        assert!(Cli::try_parse_from(["ifr", "markov", "--builtin", "quad"]).is_err());
    }
}
