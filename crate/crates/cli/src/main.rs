use std::path::PathBuf;
use std::process::ExitCode;

use ch_core::config::ConfigBuilder;
use ch_core::harness::{cmd_compare, cmd_convergence, cmd_run, scheme_gap, Case, TABLE_NU};
use ch_core::{Error, RunConfig, Scheme};
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 1;
const EXIT_UNSTABLE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "chsolve", version, about = "Staggered-grid upwind solvers for the Camassa-Holm equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme and write snapshot and diagnostics CSV files.
    Run(RunArgs),
    /// Build an L1 error table under mesh refinement.
    Convergence(ConvergenceArgs),
    /// Run both schemes on the same problem and compare at the final time.
    Compare(RunArgs),
}

/// Flags mirror the config-file keys and override values loaded with
/// `--config`.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// first | second
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// refinement level, nx = 2^k
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    /// strict | practical
    #[arg(long)]
    cfl: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long = "big-c")]
    big_c: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    /// speed | amplitude (practical step rule)
    #[arg(long = "cfl-rule")]
    cfl_rule: Option<String>,
    /// single_peakon | two_peakon | antipeakon_pair | file
    #[arg(long)]
    ic: Option<String>,
    #[arg(long = "ic-file")]
    ic_file: Option<String>,
    /// comma-separated output times
    #[arg(long = "snapshot-times")]
    snapshot_times: Option<String>,
    /// number of evenly spaced output times
    #[arg(long)]
    snapshots: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long = "track-q")]
    track_q: Option<String>,
    /// point | average
    #[arg(long = "cell-init")]
    cell_init: Option<String>,
    /// half_level | predictor
    #[arg(long = "flux-pressure")]
    flux_pressure: Option<String>,
    /// left | right: pressure node in the second-order flux
    #[arg(long = "pressure-node")]
    pressure_node: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let pairs = [
            ("scheme", &self.scheme),
            ("a", &self.a),
            ("b", &self.b),
            ("k", &self.k),
            ("nx", &self.nx),
            ("t_final", &self.t_final),
            ("cfl", &self.cfl),
            ("theta", &self.theta),
            ("big_c", &self.big_c),
            ("nu", &self.nu),
            ("cfl_rule", &self.cfl_rule),
            ("ic", &self.ic),
            ("ic_file", &self.ic_file),
            ("snapshot_times", &self.snapshot_times),
            ("snapshots", &self.snapshots),
            ("output", &self.output),
            ("track_q", &self.track_q),
            ("cell_init", &self.cell_init),
            ("flux_pressure", &self.flux_pressure),
            ("pressure_node", &self.pressure_node),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
            .collect()
    }

    fn builder(&self) -> Result<ConfigBuilder, Error> {
        let mut b = match &self.config {
            Some(path) => ConfigBuilder::from_text(&std::fs::read_to_string(path)?)?,
            None => ConfigBuilder::new(),
        };
        for (key, value) in self.overrides() {
            b.set(key, value.as_str())?;
        }
        Ok(b)
    }

    fn build(&self) -> Result<RunConfig, Error> {
        self.builder()?.build()
    }
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    /// single | two_peakon
    #[arg(long, default_value = "single")]
    case: String,
    #[arg(long = "k-min", default_value_t = 5)]
    k_min: u32,
    #[arg(long = "k-max", default_value_t = 10)]
    k_max: u32,
    /// comma-separated subset of first,second
    #[arg(long, default_value = "first,second")]
    schemes: String,
    /// strict | practical
    #[arg(long, default_value = "practical")]
    cfl: String,
    #[arg(long, default_value_t = TABLE_NU)]
    nu: f64,
    /// speed | amplitude
    #[arg(long = "cfl-rule", default_value = "amplitude")]
    cfl_rule: String,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long = "big-c", default_value_t = 1.0)]
    big_c: f64,
    /// half_level | predictor
    #[arg(long = "flux-pressure", default_value = "half_level")]
    flux_pressure: String,
    /// left | right
    #[arg(long = "pressure-node", default_value = "left")]
    pressure_node: String,
    /// point | average (second-order cell data)
    #[arg(long = "cell-init", default_value = "average")]
    cell_init: String,
    /// where to write convergence_<case>.csv
    #[arg(long, default_value = "output")]
    output: PathBuf,
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Unstable { .. } => EXIT_UNSTABLE,
        _ => EXIT_CONFIG,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_for(&err))
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match args.build() {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    match cmd_run(&cfg) {
        Ok(report) => {
            print!("{}", report.summary());
            println!("wrote {} and {}", report.snapshots_csv.display(), report.diagnostics_csv.display());
            if report.unstable.is_some() {
                ExitCode::from(EXIT_UNSTABLE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => fail(e),
    }
}

fn compare(args: RunArgs) -> ExitCode {
    let mut builder = match args.builder() {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    // the scheme key is irrelevant here
    if args.scheme.is_none() {
        let _ = builder.set("scheme", "first");
    }
    let cfg = match builder.build() {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    match cmd_compare(&cfg) {
        Ok(c) => {
            print!("{}", c.summary());
            println!("L1 distance between schemes: {:.6}", scheme_gap(&c));
            println!("wrote {}", cfg.output.join("compare.csv").display());
            if c.unstable_first.is_some() || c.unstable_second.is_some() {
                ExitCode::from(EXIT_UNSTABLE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => fail(e),
    }
}

fn convergence(args: ConvergenceArgs) -> ExitCode {
    let parsed = (|| -> Result<_, Error> {
        let case: Case = args.case.parse()?;
        if args.k_min > args.k_max || args.k_max > 24 {
            return Err(Error::InvalidParameter(format!(
                "bad k range {}..={}",
                args.k_min, args.k_max
            )));
        }
        let mut schemes = Vec::new();
        for s in args.schemes.split(',').map(str::trim) {
            schemes.push(match s {
                "first" => Scheme::First,
                "second" => Scheme::Second,
                other => return Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
            });
        }
        // reuse the config validation for the CFL keys
        let mut b = ConfigBuilder::new();
        for (k, v) in [
            ("scheme", "first".to_string()),
            ("ic", "single_peakon".to_string()),
            ("k", args.k_min.max(2).to_string()),
            ("t_final", "1".to_string()),
            ("cfl", args.cfl.clone()),
            ("nu", args.nu.to_string()),
            ("cfl_rule", args.cfl_rule.clone()),
            ("pressure_node", args.pressure_node.clone()),
            ("theta", args.theta.to_string()),
            ("big_c", args.big_c.to_string()),
            ("flux_pressure", args.flux_pressure.clone()),
            ("cell_init", args.cell_init.clone()),
        ] {
            b.set(k, v)?;
        }
        Ok((case, schemes, b.build()?))
    })();
    let (case, schemes, base) = match parsed {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let ks: Vec<u32> = (args.k_min..=args.k_max).collect();
    let table = match cmd_convergence(case, &ks, &schemes, &base) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    print!("{}", table.render());
    let path = args.output.join(format!("convergence_{}.csv", case.name()));
    if let Err(e) = table.write_csv(&path) {
        return fail(e);
    }
    println!("wrote {}", path.display());
    let failed = table
        .rows
        .iter()
        .any(|r| schemes.iter().any(|s| match s {
            Scheme::First => r.err_first.is_none(),
            Scheme::Second => r.err_second.is_none(),
        }));
    if failed {
        ExitCode::from(EXIT_UNSTABLE)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
        Command::Convergence(args) => convergence(args),
        Command::Compare(args) => compare(args),
    }
}
