//! Command-line grammar.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};
use num_complex::Complex64;

/// Complex number written as `re` or `re,im`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cplx(pub Complex64);

impl FromStr for Cplx {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = floats::<2>(s, 1)?;
        Ok(Cplx(Complex64::new(v[0], v[1])))
    }
}

/// Comma-separated list of `N` floats; missing trailing entries are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Floats<const N: usize>(pub [f64; N]);

impl<const N: usize> FromStr for Floats<N> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        floats::<N>(s, N).map(Floats)
    }
}

fn floats<const N: usize>(s: &str, min: usize) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() < min || parts.len() > N {
        return Err(format!(
            "expected {min} to {N} comma-separated numbers, got `{s}`"
        ));
    }
    let mut out = [0.0f64; N];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

/// Inclusive level range written as `lo,hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Levels(pub u32, pub u32);

impl FromStr for Levels {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
        let lo: u32 = a
            .trim()
            .parse()
            .map_err(|_| format!("`{a}` is not a level"))?;
        let hi: u32 = b
            .trim()
            .parse()
            .map_err(|_| format!("`{b}` is not a level"))?;
        if lo > hi {
            return Err(format!("empty level range {lo},{hi}"));
        }
        Ok(Levels(lo, hi))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ejulia",
    version,
    about = "Entire functions with prescribed Julia structure"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON object of option values; flags on the command line win.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Seed for sampled computations.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a schedule and write schedule.json.
    Schedule(ScheduleArgs),
    /// Run every structural and mapping check and write report.json.
    Verify(ScheduleFile),
    /// Region label of one point.
    Classify(ClassifyArgs),
    /// Itinerary of one orbit.
    Orbit(OrbitArgs),
    /// Raster images of regions or orbit fates.
    #[command(subcommand)]
    Render(RenderKind),
    /// Dimension estimates.
    #[command(subcommand)]
    Dim(DimKind),
    /// Search the real multiplier ray for a target Julia-set dimension.
    FindC(FindCArgs),
    /// Fate statistics of seeds on a circle.
    Fates(FatesArgs),
    /// Maximum-modulus sequence S_{n+1} = max_{|z| = S_n} |f(z)|.
    SSeq(SSeqArgs),
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Multiplier of the attracting fixed point, `re[,im]`, |mu| < 1.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub mu: Cplx,
    /// Iterate count of the quadratic base.
    #[arg(long = "N", default_value_t = 10)]
    pub n: u32,
    /// First radius; the smallest valid one when absent.
    #[arg(long = "R")]
    pub r: Option<f64>,
    /// Number of product levels.
    #[arg(long = "K", default_value_t = 6)]
    pub k: u32,
    /// Accept parameters outside the certified regime.
    #[arg(long)]
    pub exploratory: bool,
}

#[derive(Debug, Args)]
pub struct ScheduleFile {
    #[arg(long, value_name = "JSON")]
    pub schedule: PathBuf,
}

/// A point given in cartesian form, by log-modulus, or relative to a radius.
#[derive(Debug, Args)]
#[command(group(ArgGroup::new("point").required(true).args(["z", "log_abs", "level"])))]
pub struct PointArgs {
    /// Cartesian point `re[,im]`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<Cplx>,
    /// Natural log of the modulus.
    #[arg(long, allow_hyphen_values = true)]
    pub log_abs: Option<f64>,
    /// Measure the log-modulus from log R_level.
    #[arg(long, requires = "t")]
    pub level: Option<u32>,
    /// Offset from log R_level.
    #[arg(long, allow_hyphen_values = true, requires = "level")]
    pub t: Option<f64>,
    /// Argument in radians, with --log-abs or --level.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub arg: f64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub file: ScheduleFile,
    #[command(flatten)]
    pub point: PointArgs,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub file: ScheduleFile,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 64)]
    pub max_iter: usize,
    /// Keep iterating through the B bands after escape.
    #[arg(long)]
    pub follow_escape: bool,
}

#[derive(Debug, Subcommand)]
pub enum RenderKind {
    /// Region codes: core, A_k with U/V/petal subzones, B_k.
    Regions(RenderArgs),
    /// Fate codes of the orbit of every pixel, plus their boundary.
    Fates(FateRenderArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("window").required(true).args(["annulus_k", "cartesian"])))]
pub struct RenderArgs {
    #[command(flatten)]
    pub file: ScheduleFile,
    /// Full-turn log-polar window around |z| = R_k.
    #[arg(long, value_name = "K")]
    pub annulus_k: Option<u32>,
    /// Log-radius range of the annulus relative to log R_k.
    #[arg(
        long,
        value_name = "LO,HI",
        requires = "annulus_k",
        allow_hyphen_values = true
    )]
    pub log_r: Option<Floats<2>>,
    /// Cartesian window `cx,cy,width,height`.
    #[arg(long, value_name = "CX,CY,W,H", allow_hyphen_values = true)]
    pub cartesian: Option<Floats<4>>,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
}

#[derive(Debug, Args)]
pub struct FateRenderArgs {
    #[command(flatten)]
    pub render: RenderArgs,
    #[arg(long, default_value_t = 64)]
    pub max_iter: usize,
}

#[derive(Debug, Subcommand)]
pub enum DimKind {
    /// Box-counting dimension of a PGM mask or a CSV point set.
    Box(BoxArgs),
    /// Whitney critical exponent of the complement of a PGM mask.
    Whitney(WhitneyArgs),
    /// Box-counting dimension of the quadratic Julia set of z^2 + c.
    Quad(QuadArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["mask", "points"])))]
pub struct BoxArgs {
    /// Square power-of-two PGM; nonzero pixels form the set.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// CSV with `re,im` columns and a header row.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Fit levels; defaults suit the input resolution.
    #[arg(long, value_name = "LO,HI")]
    pub levels: Option<Levels>,
}

#[derive(Debug, Args)]
pub struct WhitneyArgs {
    /// Square power-of-two PGM; nonzero pixels form the set.
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long, value_name = "LO,HI")]
    pub levels: Option<Levels>,
    /// Tested exponents `lo,hi,step`.
    #[arg(long, default_value = "-0.5,2.5,0.1", allow_hyphen_values = true)]
    pub alphas: Floats<3>,
    /// Keep squares within this distance of the set, in window units;
    /// defaults to the diameter of the set's bounding box.
    #[arg(long)]
    pub near: Option<f64>,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: Cplx,
    #[arg(long, default_value_t = 1_000_000)]
    pub points: usize,
    #[arg(long, default_value = "5,11", value_name = "LO,HI")]
    pub levels: Levels,
    /// Also write the sampled points to points.csv.
    #[arg(long)]
    pub save_points: bool,
}

#[derive(Debug, Args)]
pub struct FindCArgs {
    /// Target dimension.
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub points: usize,
    #[arg(long, default_value = "5,11", value_name = "LO,HI")]
    pub levels: Levels,
}

#[derive(Debug, Args)]
pub struct FatesArgs {
    #[command(flatten)]
    pub file: ScheduleFile,
    /// Seeds lie on |z| = R_level · e^t.
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 4096)]
    pub seeds: usize,
    #[arg(long, default_value_t = 64)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct SSeqArgs {
    #[command(flatten)]
    pub file: ScheduleFile,
    /// Starting radius S_0 as a multiple of R_1; must lie in B_1.
    #[arg(long, default_value_t = 8.0)]
    pub s0: f64,
    #[arg(long, default_value_t = 12)]
    pub length: usize,
}
