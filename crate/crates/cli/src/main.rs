use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mhdeoct::{DeMode, Error, WarmStartPolicy};
use mhdeoct_cli::{emit_report, run_experiment, AlphaSpec, ExperimentConfig, Method, ReportFormat};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Cart,
    Deoct,
    MhDeoct,
    OracleD1,
    OracleD2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Normal,
    Long,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum WarmArg {
    /// CART tree seeds the full-depth DEOCT population.
    CartInDe,
    /// Moving-horizon subtrees are seeded from a full-depth DEOCT run.
    De,
    /// Moving-horizon subtrees are seeded from CART solutions.
    Cart,
    None,
}

/// Train classification trees by moving-horizon differential evolution and
/// report accuracy over repeated random splits.
#[derive(Debug, Parser)]
#[command(name = "mhdeoct", version)]
struct Args {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "class")]
    label_col: String,
    /// Comma-separated names of columns to one-hot encode.
    #[arg(long, value_delimiter = ',')]
    categorical_cols: Vec<String>,
    #[arg(long, value_enum, default_value = "mh-deoct")]
    method: MethodArg,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Moving-horizon depth; defaults to min(depth, 3).
    #[arg(long)]
    mh_depth: Option<usize>,
    /// Complexity penalty per active split.
    #[arg(long, default_value_t = 0.0, conflicts_with = "alpha_grid")]
    alpha: f64,
    /// Tune the penalty on a validation split. Values are penalties per
    /// training sample; `default` selects 21 points over [0, 0.05].
    #[arg(long)]
    alpha_grid: Option<String>,
    /// Minimum samples per non-empty leaf.
    #[arg(long, default_value_t = 1)]
    nmin: usize,
    #[arg(long, value_enum, default_value = "normal")]
    mode: ModeArg,
    /// Population size (overrides --mode).
    #[arg(long)]
    pop: Option<usize>,
    /// Generations (overrides --mode).
    #[arg(long)]
    gens: Option<usize>,
    #[arg(long, default_value_t = mhdeoct::de::DEFAULT_CROSSOVER_RATE)]
    cr: f64,
    /// Warm starts to use, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cart-in-de,de,cart")]
    warm_starts: Vec<WarmArg>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Base seed; repetition i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for fitness evaluation; all cores when unset.
    #[arg(long, env = "MHDEOCT_WORKERS")]
    workers: Option<usize>,
    /// Samples per fitness stride.
    #[arg(long, default_value_t = mhdeoct::fitness::DEFAULT_STRIDE)]
    stride: usize,
    /// Report path; stdout when unset.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

fn parse_grid(text: &str) -> Result<AlphaSpec, Error> {
    if text == "default" {
        return Ok(AlphaSpec::Grid(AlphaSpec::default_grid()));
    }
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad alpha grid value {v:?}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(AlphaSpec::Grid)
}

fn config(args: Args) -> Result<(ExperimentConfig, ReportFormat, Option<PathBuf>), Error> {
    let method = match args.method {
        MethodArg::Cart => Method::Cart,
        MethodArg::Deoct => Method::Deoct,
        MethodArg::MhDeoct => Method::MhDeoct,
        MethodArg::OracleD1 => Method::OracleD1,
        MethodArg::OracleD2 => Method::OracleD2,
    };
    let warm = if args.warm_starts.contains(&WarmArg::None) {
        WarmStartPolicy::NONE
    } else {
        WarmStartPolicy {
            cart_in_de: args.warm_starts.contains(&WarmArg::CartInDe),
            de_warm: args.warm_starts.contains(&WarmArg::De),
            cart_warm: args.warm_starts.contains(&WarmArg::Cart),
        }
    };
    let cfg = ExperimentConfig {
        label_col: args.label_col,
        categorical: args.categorical_cols,
        depth: args.depth,
        mh_depth: args.mh_depth.unwrap_or(args.depth.min(3)),
        alpha: match args.alpha_grid {
            Some(text) => parse_grid(&text)?,
            None => AlphaSpec::Fixed(args.alpha),
        },
        n_min: args.nmin,
        mode: match args.mode {
            ModeArg::Normal => DeMode::Normal,
            ModeArg::Long => DeMode::Long,
        },
        pop: args.pop,
        gens: args.gens,
        crossover_rate: args.cr,
        warm,
        reps: args.reps,
        seed: args.seed,
        workers: args.workers,
        stride: args.stride,
        ..ExperimentConfig::new(args.data, method)
    };
    let format = match args.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
    };
    Ok((cfg, format, args.out))
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 1,
        Error::Budget(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = config(args).and_then(|(cfg, format, out)| {
        let report = run_experiment(&cfg)?;
        emit_report(&report, format, out.as_deref())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
