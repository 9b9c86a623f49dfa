//! `mis-lab`: command-line front end for the mis-lab library.

mod commands;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use mis_lab::{Budgets, MisError, OutputFormat, Result, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "mis-lab", version, about = "Entropy, boundary complexity and surface corrections of multiplicative integer systems")]
struct Cli {
    /// JSON run configuration describing the system.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format; overrides the configuration.
    #[arg(long = "out", alias = "format", global = true, value_enum)]
    out: Option<Format>,

    /// Write the result to this file (atomically) instead of stdout.
    #[arg(short = 'o', long = "output-file", global = true)]
    output_file: Option<PathBuf>,

    /// Honour the budget overrides in the configuration; with none given,
    /// lift every guard.
    #[arg(long, global = true)]
    unsafe_budgets: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pattern count on a box, or log count on a boundary region.
    Count {
        /// Box side lengths (decimal integers).
        #[arg(long = "box", num_args = 1.., required = true)]
        sides: Vec<String>,
        /// Inner box; counts projections onto outer \ inner.
        #[arg(long, num_args = 1..)]
        inner: Option<Vec<String>>,
        /// Fail instead of falling back to the logarithm when the exact count is too large.
        #[arg(long)]
        exact: bool,
    },
    /// Topological entropy.
    Entropy {
        #[arg(long, default_value = "1e-15")]
        tol: f64,
    },
    /// Boundary complexity for speed ratios tau, with an optional finite-box estimate.
    Boundary {
        /// Speed ratios, e.g. 1/3 or 0.6 (repeat or separate by commas).
        #[arg(long, required = true, value_delimiter = ',')]
        tau: Vec<String>,
        /// Outer box sides for the empirical value.
        #[arg(long, num_args = 1..)]
        m: Option<Vec<String>>,
    },
    /// Speed ratio tau realizing a target boundary complexity.
    Realize {
        #[arg(long, required = true, value_delimiter = ',')]
        target: Vec<String>,
        #[arg(long, default_value_t = 128)]
        prec: u32,
    },
    /// Two-dimensional SFT tools.
    #[command(group(ArgGroup::new("mode").required(true).args(["strip", "mix", "frame", "glue_probe"])))]
    Sft2d {
        /// Strip entropy in direction K (1 or 2) with thickness I.
        #[arg(long, num_args = 2, value_names = ["K", "I"])]
        strip: Option<Vec<usize>>,
        /// Boundary complexity ((1-t) h_V + t h_H) / i for mixing parameter t.
        #[arg(long)]
        mix: Option<String>,
        /// Strip thickness used by --mix.
        #[arg(long, default_value_t = 1)]
        thickness: usize,
        /// Frame count for width M, height N, thickness I.
        #[arg(long, num_args = 3, value_names = ["M", "N", "I"])]
        frame: Option<Vec<usize>>,
        /// Bounded block-gluing check with gap N on W x W blocks.
        #[arg(long = "glue-probe", num_args = 2, value_names = ["N", "W"])]
        glue_probe: Option<Vec<usize>>,
    },
    /// Surface corrections along a box sequence.
    Surface {
        /// `power k1 k2 ...` or `offset p k sign` with sign `+` or `-`.
        #[arg(long, num_args = 2.., required = true)]
        seq: Vec<String>,
        /// Values of n: comma list, ranges like 3..40 allowed.
        #[arg(long, default_value = "1,10,100")]
        n: String,
        /// `auto` or a bit count; overrides the configuration.
        #[arg(long)]
        prec: Option<String>,
    },
    /// Quick built-in oracle checks.
    Selftest,
}

pub struct Context {
    pub config: Option<RunConfig>,
    pub budgets: Budgets,
}

impl Context {
    pub fn config(&self) -> Result<&RunConfig> {
        self.config.as_ref().ok_or_else(|| MisError::InvalidSpec {
            field: "config".into(),
            reason: "this command needs --config".into(),
        })
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("MIS_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| MisError::InvalidSpec {
        field: "MIS_LAB_THREADS".into(),
        reason: format!("{v:?} is not a positive integer"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| MisError::Io(e.to_string()))
}

fn run(cli: &Cli, format: &mut OutputFormat) -> Result<(String, bool)> {
    let explicit = cli.out.map(|f| match f {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    });
    if let Some(f) = explicit {
        *format = f;
    }
    init_threads()?;
    let config = cli.config.as_ref().map(mis_lab::parse_config).transpose()?;
    if let (Some(cfg), None) = (&config, explicit) {
        *format = cfg.output;
    }
    let budgets = match (cli.unsafe_budgets, config.as_ref().and_then(|c| c.budgets.as_ref())) {
        (false, Some(_)) => {
            eprintln!("warning: budget overrides in the configuration are ignored without --unsafe-budgets");
            Budgets::default()
        }
        (false, None) => Budgets::default(),
        (true, Some(b)) => b.apply(Budgets::default()),
        (true, None) => Budgets::unlimited(),
    };
    let ctx = Context { config, budgets };
    let (table, ok) = commands::dispatch(&cli.command, &ctx)?;
    Ok((table.render(*format), ok))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut format = OutputFormat::Csv;
    let result = run(&cli, &mut format).and_then(|(text, ok)| {
        match &cli.output_file {
            Some(path) => output::write_atomic(path, &text)?,
            None => print!("{text}"),
        }
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let msg = output::render_error(&e, format);
            match format {
                OutputFormat::Json => print!("{msg}"),
                OutputFormat::Csv => eprint!("{msg}"),
            }
            ExitCode::from(if e.is_budget() { 3 } else { 2 })
        }
    }
}
