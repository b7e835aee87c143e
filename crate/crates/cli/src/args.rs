use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "abelint", version, about = "Abelian integrals of quintic Hamiltonians and their zeros")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the output to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<std::path::PathBuf>,

    /// Relative quadrature tolerance, in (0, 1e-2].
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// Largest number of quadrature nodes.
    #[arg(long, global = true, default_value_t = 1 << 16)]
    pub max_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Clone)]
pub struct Point {
    /// Real λ (with --mu).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Complex λ; μ is its conjugate.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_im: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct Family {
    #[command(flatten)]
    pub point: Point,
    /// Period annulus: O1, OMu or OE.
    #[arg(long, default_value = "O1")]
    pub annulus: String,
}

#[derive(Debug, Args, Clone)]
pub struct Energy {
    /// A number, or hc+, hc-, hs-, hs+ for a level next to an end of Σ.
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    /// Distance from the end of Σ for the symbolic levels, relative to |Σ|.
    #[arg(long, default_value_t = 1e-8)]
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AsymptoteKind {
    Reverse,
    Center,
    Endpoint,
    Infinity,
    Limits,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region, period annuli, critical values and Dynkin data of a point.
    Classify {
        #[command(flatten)]
        point: Point,
    },
    /// Samples of a bifurcation curve.
    Curves {
        /// gamma, Gamma, gamma_c_real, gamma_c_complex or gamma_s.
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 50)]
        n: usize,
    },
    /// I_k(h) on a real oval.
    Integrate {
        #[command(flatten)]
        family: Family,
        #[command(flatten)]
        energy: Energy,
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// I_k(h) continued below h_c, or above h_s on the determination δ+.
    Continue {
        #[command(flatten)]
        family: Family,
        #[command(flatten)]
        energy: Energy,
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// Zeros of a0·I0 + a1·I1 on Σ.
    Zeros {
        #[command(flatten)]
        family: Family,
        #[arg(long, allow_hyphen_values = true)]
        a0: f64,
        #[arg(long, allow_hyphen_values = true)]
        a1: f64,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        #[arg(long)]
        no_refine: bool,
    },
    /// Largest zero count over all (a0, a1).
    Maxzeros {
        #[command(flatten)]
        family: Family,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Series reversion, center expansions and endpoint or infinity fits.
    Asymptote {
        #[arg(long, value_enum)]
        kind: AsymptoteKind,
        #[command(flatten)]
        family: Family,
        /// Center-family coefficients a1,a2,…, as decimals or p/q (reverse, center).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<String>,
        #[arg(long, default_value_t = 6)]
        order: usize,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 1e2)]
        h_min: f64,
        #[arg(long, default_value_t = 1e5)]
        h_max: f64,
        #[arg(long, default_value_t = 31)]
        points: usize,
    },
    /// Δ(h) for h > h_s, or both evaluations at a critical level.
    Delta {
        #[command(flatten)]
        family: Family,
        #[arg(long, allow_hyphen_values = true)]
        h: Option<f64>,
        /// Use the first real critical value above h_s.
        #[arg(long)]
        critical: bool,
    },
    /// Argument increase of I0 and F along the boundary of the cut domain.
    Winding {
        #[command(flatten)]
        family: Family,
        #[arg(long, default_value_t = 1e-4)]
        r: f64,
    },
    /// Two small zeros near a center of H = y² + x²(1 + a1 x + a2 x² + a3 x³).
    Cyclicity {
        #[arg(long, allow_hyphen_values = true)]
        a1: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        a2: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        a3: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha0: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        alpha1: f64,
    },
    /// [3g/2] − 1 small zeros on a center family of degree n.
    Nocheb {
        /// Coefficients a1,…,a_{n−2}; the odd ones are replaced.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
    },
    /// Seeded scan of a parameter region.
    Scan {
        /// omega_mu, omega_e, omega_1, exceptional, above_gamma, below_gamma or disk:RE,IM,R.
        #[arg(long)]
        region: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 20240611)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        grid: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Curves { .. } => "curves",
            Command::Integrate { .. } => "integrate",
            Command::Continue { .. } => "continue",
            Command::Zeros { .. } => "zeros",
            Command::Maxzeros { .. } => "maxzeros",
            Command::Asymptote { .. } => "asymptote",
            Command::Delta { .. } => "delta",
            Command::Winding { .. } => "winding",
            Command::Cyclicity { .. } => "cyclicity",
            Command::Nocheb { .. } => "nocheb",
            Command::Scan { .. } => "scan",
        }
    }
}
