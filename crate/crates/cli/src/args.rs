use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "wpvol", version, about = "Weil-Petersson volumes, intersection brackets and their large-genus asymptotics")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Float precision in bits, for float mode and printed floats.
    #[arg(long, global = true, default_value_t = 512)]
    pub precision: u32,
    /// Bracket arithmetic.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Refuse brackets above this level 2g - 2 + n.
    #[arg(long, global = true)]
    pub max_level: Option<u32>,
    /// Directory holding the persistent bracket cache (exact mode only).
    #[arg(long, global = true, env = "WPVOL_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Leave timestamps out of all output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
    /// The bracket cache record format (`table` only).
    Cache,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One bracket [tau_d1 ... tau_dn]_{g,n}.
    Bracket {
        #[arg(long)]
        g: i64,
        /// Comma-separated psi exponents; empty for n = 0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        d: Vec<i64>,
    },
    /// The volume V_{g,n}.
    Volume {
        #[arg(long)]
        g: i64,
        #[arg(long)]
        n: i64,
    },
    /// Coefficients of the volume polynomial V_{g,n}(L).
    Poly {
        #[arg(long)]
        g: i64,
        #[arg(long)]
        n: i64,
    },
    /// All volumes V_{g,n} with g <= g-max, n <= n-max.
    Table {
        #[arg(long)]
        g_max: u32,
        #[arg(long)]
        n_max: u32,
    },
    /// A ratio sequence over a genus range.
    Series(SeriesArgs),
    /// A 1/g expansion fitted to a ratio sequence.
    Fit {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value = "richardson")]
        method: String,
    },
    /// Runs a verification suite; exit status 2 on failure.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Run the full-size identity sweep instead of the quick one.
        #[arg(long)]
        full: bool,
        /// Genus window for the expansion suite.
        #[arg(long, default_value = "8:16")]
        grange: String,
    },
    /// Persistent bracket cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SeriesArgs {
    /// v-ratio-n, v-ratio-n-inverse, v-ratio-g, euler-ratio, tau-ratio,
    /// tau-step, norm-volume or genus-step.
    #[arg(long)]
    pub series: String,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long)]
    pub k: Option<u32>,
    /// Inclusive genus range lo:hi.
    #[arg(long)]
    pub grange: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Recursions,
    Moments,
    Expansions,
    Conventions,
    All,
}

#[derive(Subcommand, Debug)]
pub enum CacheAction {
    /// Validates a cache file and merges it into the cache directory.
    Load {
        #[arg(long)]
        file: PathBuf,
    },
    /// Writes the cache directory's brackets (after optionally computing a
    /// volume table) to a file.
    Store {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        g_max: Option<u32>,
        #[arg(long, default_value_t = 0)]
        n_max: u32,
    },
}
