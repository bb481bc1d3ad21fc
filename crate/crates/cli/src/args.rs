use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Finite-model experiments for eigenvalue multiplicity bounds.
#[derive(Debug, Parser)]
#[command(name = "specmult", version)]
pub struct Cli {
    /// key=value file supplying defaults for any long option (flags win).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory receiving a copy of every report [env: SPECMULT_OUT_DIR].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of a graph operator with multiplicity groups.
    Spectrum(SpectrumArgs),
    /// Multiplicity pipeline: m <= m' + rank(Id - P).
    Bound(BoundArgs),
    /// Certify heat-kernel bounds on the constant-curvature plane.
    KernelCert(KernelArgs),
    /// Star-graph construction reports.
    Construct(ConstructArgs),
    /// Seeded interlacing, trace, telescoping and gain suites.
    Identities(IdentityArgs),
    /// Evaluate a closed-form bound.
    Formula(FormulaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    Laplacian,
    Adjacency,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub operator: Option<OperatorKind>,
    /// Spectrum of exp(-t L) instead, with the matrix itself.
    #[arg(long)]
    pub heat: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    pub graph: PathBuf,
    /// Target index; repeat or comma-separate for a sweep.
    #[arg(long = "j", value_delimiter = ',')]
    pub j: Vec<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    #[arg(long)]
    pub chi_cut: Option<f64>,
    #[arg(long)]
    pub heat_cut: Option<f64>,
    #[arg(long)]
    pub t_unit: Option<f64>,
    #[arg(long)]
    pub cell_separation: Option<usize>,
    #[arg(long)]
    pub net_radius: Option<usize>,
    #[arg(long)]
    pub curvature_floor: Option<f64>,
    /// Include per-vertex localized diagnostics.
    #[arg(long)]
    pub diagnostics: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelCheck {
    All,
    Mass,
    Sandwich,
    Tail,
    Variation,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub curvature: Option<f64>,
    #[arg(long)]
    pub heat_cut: Option<f64>,
    /// Comma list or start:end:step (inclusive).
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long)]
    pub eta_grid: Option<String>,
    #[arg(long, value_enum)]
    pub check: Option<KernelCheck>,
    #[arg(long)]
    pub quad_points: Option<usize>,
    #[arg(long)]
    pub quad_cutoff: Option<f64>,
    /// Write the (t, eta, lhs, rhs) matrix dump here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Inclusive range `lo..hi`.
    #[arg(long)]
    pub n_range: Option<String>,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub dim_max: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulaName {
    MultiplicityGenus,
    MultiplicityVolume,
    RemarkConstants,
    ScaleFree,
    GaussBonnet,
    Chromatic,
    CdvTarget,
    Colbois,
    Diameter,
    Window,
    Constants,
}

#[derive(Debug, Args)]
pub struct FormulaArgs {
    #[arg(value_enum)]
    pub name: FormulaName,
    #[arg(long)]
    pub g: Option<i64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub vol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub inj: Option<f64>,
    /// Window constant `K`.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Heat-semigroup eigenvalue floor for `constants`.
    #[arg(long)]
    pub c2: Option<f64>,
    /// Print the bare value instead of JSON.
    #[arg(long)]
    pub plain: bool,
}
