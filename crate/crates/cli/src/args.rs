use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "lab",
    version,
    about = "Littlewood products, lattice orbits and rigidity checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct GlobalOpts {
    /// Write the data file (CSV or JSON) here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the run manifest (JSON) here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Worker thread cap; falls back to LAB_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Littlewood products along `n` and the orbit round trip.
    #[command(subcommand)]
    Littlewood(LittlewoodCmd),
    #[command(subcommand)]
    Orbit(OrbitCmd),
    #[command(subcommand)]
    Forms(FormsCmd),
    #[command(subcommand)]
    Shear(ShearCmd),
    #[command(subcommand)]
    Exceptional(ExceptionalCmd),
    #[command(subcommand)]
    Eig(EigCmd),
    #[command(subcommand)]
    Dim(DimCmd),
    #[command(subcommand)]
    Entropy(EntropyCmd),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LittlewoodCmd {
    /// Running minima of n <nu> <nv> for n = 1..N (CSV).
    Scan {
        /// First coordinate, e.g. `cbrt(2)` or `1/3`.
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long = "N", alias = "n")]
        n: u64,
    },
    /// Orbit excursions to witnesses and back (JSON).
    Roundtrip {
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Grid covers 0 <= r, s <= extent.
        #[arg(long, default_value_t = 6.0)]
        extent: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = 40.0)]
        r_max: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitCmd {
    /// delta along a cone of diagonal directions (CSV).
    Trace {
        /// Basis JSON (`rows` or `columns`); alternatively give --u and --v.
        #[arg(long, conflicts_with_all = ["u", "v"])]
        basis: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, requires = "v")]
        u: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "u")]
        v: Option<String>,
        /// Cone directions as `t11,t12,...;t21,...`; defaults to the Littlewood quadrant for k = 3.
        #[arg(long, allow_hyphen_values = true)]
        dirs: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        #[arg(long, default_value_t = 2.0)]
        extent: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormsCmd {
    /// min |f_m(x)| over 0 < |x|_inf <= N (JSON).
    Scan {
        /// Matrix JSON whose rows are the linear forms.
        #[arg(long, required_unless_present = "cubic")]
        m: Option<PathBuf>,
        /// Use the built-in totally real cubic norm form.
        #[arg(long, conflicts_with = "m")]
        cubic: bool,
        #[arg(long = "N", alias = "n")]
        n: u64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShearCmd {
    /// Closed-form shear against direct products, kappa and a shear time (JSON).
    Demo {
        /// Displacement matrix JSON; defaults to the bundled example.
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExceptionalCmd {
    /// Exhaustive exceptional-return test over SL(k, Z) with bounded entries (JSON).
    Scan {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        entry_bound: i64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigCmd {
    /// Seeded trials of the eigenvalue perturbation check (JSON).
    Lemma {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "3,1.5,0"
        )]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0.01)]
        radius: f64,
    },
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CloudKind {
    Cantor,
    Grid,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimCmd {
    /// Box-dimension fit on a point set (CSV epsilon,count).
    Estimate {
        /// CSV file with one point per line.
        #[arg(long, conflicts_with = "set")]
        points: Option<PathBuf>,
        /// Built-in set: Cantor endpoints (size = level) or unit grid (size = intervals).
        #[arg(long, value_enum, requires = "size")]
        set: Option<CloudKind>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 0.125)]
        eps0: f64,
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        #[arg(long, default_value_t = 9)]
        scales: usize,
    },
    /// Transversal scan of pairs whose orbit stays in K_rho (CSV epsilon,count).
    ScanBad {
        #[arg(long)]
        rho: f64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Also write the surviving (u, v) points as CSV.
        #[arg(long)]
        survivors: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Doubling,
    Rotation,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyCmd {
    /// (N, eps)-separated counts of a circle map (CSV N,epsilon,count,rate).
    Estimate {
        #[arg(long, value_enum, default_value = "doubling")]
        map: MapKind,
        /// Rotation angle for `--map rotation`.
        #[arg(long, default_value = "sqrt(2) - 1", allow_hyphen_values = true)]
        alpha: String,
        /// Seed points i / points for i < points.
        #[arg(long, default_value_t = 4096)]
        points: usize,
        #[arg(long = "N", alias = "n", default_value_t = 12)]
        n: usize,
        #[arg(long, default_value = "1/64")]
        eps: String,
    },
    /// sum_ij s_ij (t_i - t_j)^+ (JSON).
    Formula {
        /// Rows separated by `;`, entries by `,`.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
    },
}
