use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elastica_core::imgio::ImageFormat;
use elastica_core::SolverKind;

#[derive(Debug, Parser)]
#[command(name = "elastica", version, about = "Euler's elastica image denoising")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise an image file or a generated rings image.
    Denoise(DenoiseArgs),
    /// Write a clean and a noisy concentric-rings image.
    Synth(SynthArgs),
    /// Print PSNR, NRMSE and NMAD of a test image against a reference.
    Metrics(MetricsArgs),
    /// Run several (solver, parameter) cells on one shared input.
    Compare(CompareArgs),
}

/// Solver weights and stopping rule; unset flags fall back to the config
/// file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Length (TV) weight.
    #[arg(long)]
    pub a: Option<f64>,
    /// Curvature weight.
    #[arg(long)]
    pub b: Option<f64>,
    /// Fidelity weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    #[arg(long)]
    pub r3: Option<f64>,
    /// Proximal weight of the n update.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Step size of the u update.
    #[arg(long)]
    pub delta1: Option<f64>,
    /// Step size of the n update.
    #[arg(long)]
    pub delta2: Option<f64>,
    /// Regularization of |p| (default 1e-4).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Stop once the relative residual drops below this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap (default 10000).
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

impl ParamArgs {
    /// `(key, value)` pairs for the flags that were given.
    pub fn given(&self) -> Vec<(&'static str, String)> {
        let reals = [
            ("a", self.a),
            ("b", self.b),
            ("lambda", self.lambda),
            ("r1", self.r1),
            ("r2", self.r2),
            ("r3", self.r3),
            ("gamma", self.gamma),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("epsilon", self.epsilon),
            ("tol", self.tol),
        ];
        let mut out: Vec<_> = reals
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, format!("{v:e}"))))
            .collect();
        if let Some(m) = self.max_iter {
            out.push(("max-iter", m.to_string()));
        }
        out
    }
}

/// Geometry of a generated rings image; defaults to the standard 512x512
/// phantom scaled to `--size`.
#[derive(Debug, Clone, Default, Args)]
pub struct RingArgs {
    /// Side length of the generated rings image.
    #[arg(long)]
    pub size: Option<usize>,
    /// Ring radii in pixels, comma-separated and ascending.
    #[arg(long)]
    pub radii: Option<String>,
    /// One intensity per annulus plus the background, comma-separated.
    #[arg(long)]
    pub intensities: Option<String>,
    /// Center as `row,col`.
    #[arg(long)]
    pub center: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NoiseArgs {
    /// Gaussian noise variance. Rings inputs default to 0.01; file inputs
    /// get noise only when this is given.
    #[arg(long)]
    pub variance: Option<f64>,
    /// Noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Where the image to denoise comes from.
#[derive(Debug, Clone, Default, Args)]
pub struct SourceArgs {
    /// Image file to denoise (PGM or 8-bit grayscale PNG).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Generate a rings image instead of reading a file. Its clean version
    /// is the reference unless --reference is given.
    #[arg(long)]
    pub rings: bool,
    /// Clean image for PSNR/NRMSE/NMAD.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub ring: RingArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Pgm,
    PgmAscii,
    Png,
}

impl From<FormatArg> for ImageFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Pgm => ImageFormat::PgmBinary,
            FormatArg::PgmAscii => ImageFormat::PgmAscii,
            FormatArg::Png => ImageFormat::Png,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DenoiseArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ralm, lalmn, lalm or rof-alm (default ralm).
    #[arg(long)]
    pub solver: Option<SolverKind>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Denoised image path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-iteration trace CSV path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Output format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Also save the (possibly noisy) solver input here.
    #[arg(long)]
    pub save_input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub ring: RingArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Clean image path.
    #[arg(long)]
    pub clean: PathBuf,
    /// Noisy image path.
    #[arg(long)]
    pub noisy: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// Clean reference image.
    pub reference: PathBuf,
    /// Image to score.
    pub test: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// RALM and LALMn at b = 0 with r1 in {50, 500, 5000}.
    B0Consistency,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in cell list.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// A cell as comma-separated `key=value` pairs on top of the shared
    /// parameters, e.g. `solver=lalmn,r1=500`. Repeatable.
    #[arg(long = "cell")]
    pub cells: Vec<String>,
    /// Solver for cells that do not name one (default ralm).
    #[arg(long)]
    pub solver: Option<SolverKind>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Directory for per-cell traces and images.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}
