use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "timearrow", version, about = "Forward and backward estimation error for rank-one processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Fwd,
    Bwd,
}

impl From<DirectionArg> for timearrow::Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Fwd => timearrow::Direction::Forward,
            DirectionArg::Bwd => timearrow::Direction::Backward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Catalog name or path to a model JSON file.
    #[arg(long)]
    pub model: String,
    /// Alpha for the `ma` catalog entry.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List or show catalog models.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Autocovariance lags as CSV or JSON.
    Autocov {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        lags: usize,
        /// Filter truncation (model default when absent).
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Finite-window predictor or postdictor.
    Predict {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        window: usize,
        #[arg(long, value_enum, default_value_t = DirectionArg::Fwd)]
        direction: DirectionArg,
        #[arg(long, default_value_t = timearrow::estimation::DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Error covariance over a list of windows.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// `1..64`, `1..=64` or `1,2,4,8`.
        #[arg(long, default_value = "1..=32")]
        windows: String,
        #[arg(long, value_enum, default_value_t = DirectionArg::Bwd)]
        direction: DirectionArg,
        #[arg(long, default_value_t = timearrow::estimation::DEFAULT_RANK_TOL)]
        rank_tol: f64,
        #[arg(long, value_enum, default_value_t = Precision::Double)]
        precision: Precision,
        /// Working precision in bits for `--precision extended`.
        #[arg(long)]
        bits: Option<u32>,
    },
    /// Geometric mean of a scalar model's spectral density.
    Szego {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = timearrow::spectral::DEFAULT_GRID)]
        grid: usize,
    },
    /// Geometric mean of det of the spectral density matrix.
    WmDet {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = timearrow::spectral::DEFAULT_GRID)]
        grid: usize,
    },
    /// Cyclicity label of a symbol, or of every channel of a model.
    Cyclicity {
        /// Symbol record (JSON text or file) or `harmonic`.
        #[arg(long, conflicts_with = "model")]
        symbol: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Span residuals of backward shifts of a symbol against a unit target.
    Probe {
        /// Symbol record (JSON text or file) or `harmonic`.
        #[arg(long)]
        symbol: String,
        /// Index `k` of the unit target `e_k`.
        #[arg(long, default_value_t = 0)]
        target: usize,
        #[arg(long, default_value_t = 200)]
        shifts: usize,
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Singular values of the finite Hilbert matrix.
    Hilbert {
        #[arg(long)]
        n: usize,
    },
    /// Seeded sample path.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "T", default_value_t = 1000)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Empirical moments and prediction errors against analytic values.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "T", default_value_t = 100_000)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        lags: usize,
        #[arg(long, default_value_t = 1)]
        window: usize,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Forward and backward errors, rule verdict and numerical verdict.
    Dichotomy {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "1..=64")]
        windows: String,
        #[arg(long, default_value_t = timearrow::estimation::DEFAULT_DETERMINISM_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = timearrow::estimation::DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show {
        name: String,
        #[arg(long)]
        alpha: Option<f64>,
    },
}
