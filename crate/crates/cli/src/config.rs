//! Run configuration: TOML with sections `[grid]`, `[kernel1]`, `[kernel2]`,
//! `[f]`, `[g]`, `[cone]`, `[ball]`, `[solver]` and an optional `[sampling]`.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use nehari_fp::solver::{Method, OracleConfig, SolveConfig};
use nehari_fp::verify::SamplingConfig;
use nehari_fp::{
    BallSpec, ConeSpec, Grid, GridFunction, Kernel, KernelPreset, Nonlinearity, ProblemSpec, Profile, QuadratureRule,
    RootConfig, ShapeArg,
};
use serde::Deserialize;

/// A profile written either as a number (constant) or by name.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProfileValue {
    Number(f64),
    Name(String),
}

impl ProfileValue {
    pub fn to_profile(&self) -> Result<Profile> {
        Ok(match self {
            ProfileValue::Number(x) => Profile::Constant(*x),
            ProfileValue::Name(name) => match name.as_str() {
                "identity" => Profile::Identity,
                "two_plus_sin" => Profile::TwoPlusSin,
                "one_plus_square" => Profile::OnePlusSquare,
                "logistic" => Profile::Logistic,
                other => bail!(
                    "unknown profile `{other}`, expected a number or one of identity, two_plus_sin, one_plus_square, logistic"
                ),
            },
        })
    }
}

fn one() -> ProfileValue {
    ProfileValue::Number(1.0)
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RuleName {
    GaussLegendre,
    Trapezoid,
}

fn default_rule() -> RuleName {
    RuleName::GaussLegendre
}
fn default_order() -> usize {
    4
}
fn default_b() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    n: usize,
    #[serde(default = "default_rule")]
    rule: RuleName,
    #[serde(default = "default_order")]
    order: usize,
    #[serde(default)]
    a: f64,
    #[serde(default = "default_b")]
    b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
enum KernelSection {
    Constant {
        #[serde(default = "default_b")]
        value: f64,
    },
    SeparableProduct {
        #[serde(default = "one")]
        left: ProfileValue,
        #[serde(default = "one")]
        right: ProfileValue,
    },
    /// CSV with `i,j,value` rows, path relative to the config file.
    Table { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
enum NonlinearitySection {
    PowerProduct {
        p: f64,
        #[serde(default = "one")]
        coeff: ProfileValue,
    },
    LinearGain {
        gain: f64,
    },
    BoundedG {
        alpha: f64,
        #[serde(default = "one")]
        shape: ProfileValue,
        #[serde(default)]
        arg: ShapeArg,
    },
    Constant {
        value: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeSection {
    c1: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BallSection {
    radius: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    method: Option<Method>,
    max_iter: Option<usize>,
    damping: Option<f64>,
    residual_tol: Option<f64>,
    homotopy_steps: Option<usize>,
    auto_damping: Option<bool>,
    root_atol: Option<f64>,
    root_rtol: Option<f64>,
    oracle_lattice_points: Option<usize>,
    /// Initial `u`, `v` and the homotopy anchor `omega`, as profiles of `t`.
    u0: Option<ProfileValue>,
    v0: Option<ProfileValue>,
    omega: Option<ProfileValue>,
    /// Extended radius for the `schaefer` method; defaults to `2 R`.
    extended_radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingSection {
    cone_samples: Option<usize>,
    ball_samples: Option<usize>,
    points_per_decade: Option<usize>,
    y_points: Option<usize>,
    x_min: Option<f64>,
    x_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    grid: Option<GridSection>,
    kernel1: Option<KernelSection>,
    kernel2: Option<KernelSection>,
    f: Option<NonlinearitySection>,
    g: Option<NonlinearitySection>,
    cone: Option<ConeSection>,
    ball: Option<BallSection>,
    solver: Option<SolverSection>,
    sampling: Option<SamplingSection>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSource {
    Preset(KernelPreset),
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub rule: QuadratureRule,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Profile,
    pub v0: Profile,
    pub omega: Profile,
    pub extended_radius: Option<f64>,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub grid: GridConfig,
    pub kernel1: KernelSource,
    pub kernel2: KernelSource,
    pub f: Nonlinearity,
    pub g: Nonlinearity,
    pub c1: f64,
    pub radius: f64,
    pub solver: SolveConfig,
    pub initial: InitialData,
    pub sampling: SamplingConfig,
}

fn require<T>(section: Option<T>, name: &str) -> Result<T> {
    section.ok_or_else(|| anyhow!("missing section [{name}]"))
}

fn kernel_source(section: KernelSection) -> Result<KernelSource> {
    Ok(match section {
        KernelSection::Constant { value } => KernelSource::Preset(KernelPreset::Constant { value }),
        KernelSection::SeparableProduct { left, right } => KernelSource::Preset(KernelPreset::SeparableProduct {
            left: left.to_profile()?,
            right: right.to_profile()?,
        }),
        KernelSection::Table { path } => KernelSource::Table(path),
    })
}

fn nonlinearity(section: NonlinearitySection) -> Result<Nonlinearity> {
    Ok(match section {
        NonlinearitySection::PowerProduct { p, coeff } => Nonlinearity::power_product(p, coeff.to_profile()?)?,
        NonlinearitySection::LinearGain { gain } => Nonlinearity::linear_gain(gain)?,
        NonlinearitySection::BoundedG { alpha, shape, arg } => {
            Nonlinearity::bounded_g(alpha, shape.to_profile()?, arg)?
        }
        NonlinearitySection::Constant { value } => Nonlinearity::constant(value)?,
    })
}

/// Parses and validates a configuration. Errors carry the TOML line number
/// or name the offending section and key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;

    let grid = require(raw.grid, "grid")?;
    let rule = match grid.rule {
        RuleName::GaussLegendre => QuadratureRule::GaussLegendre { order: grid.order },
        RuleName::Trapezoid => QuadratureRule::Trapezoid,
    };
    let grid = GridConfig {
        n: grid.n,
        rule,
        a: grid.a,
        b: grid.b,
    };
    Grid::build(grid.n, grid.rule, grid.a, grid.b).context("in section [grid]")?;

    let kernel1 = kernel_source(require(raw.kernel1, "kernel1")?).context("in section [kernel1]")?;
    let kernel2 = kernel_source(require(raw.kernel2, "kernel2")?).context("in section [kernel2]")?;
    let f = nonlinearity(require(raw.f, "f")?).context("in section [f]")?;
    let g = nonlinearity(require(raw.g, "g")?).context("in section [g]")?;
    let c1 = require(raw.cone, "cone")?.c1;
    ConeSpec::new(c1, grid.a, grid.b).context("in section [cone]")?;
    let radius = require(raw.ball, "ball")?.radius;
    BallSpec::new(radius).context("in section [ball]")?;

    let s = require(raw.solver, "solver")?;
    let defaults = SolveConfig::default();
    let root_defaults = RootConfig::default();
    let solver = SolveConfig {
        method: s.method.unwrap_or(defaults.method),
        max_iter: s.max_iter.unwrap_or(defaults.max_iter),
        damping: s.damping.unwrap_or(defaults.damping),
        residual_tol: s.residual_tol.unwrap_or(defaults.residual_tol),
        homotopy_steps: s.homotopy_steps.unwrap_or(defaults.homotopy_steps),
        auto_damping: s.auto_damping.unwrap_or(defaults.auto_damping),
        root: RootConfig {
            atol: s.root_atol.unwrap_or(root_defaults.atol),
            rtol: s.root_rtol.unwrap_or(root_defaults.rtol),
            ..root_defaults
        },
        oracle: OracleConfig {
            lattice_points: s.oracle_lattice_points.unwrap_or(defaults.oracle.lattice_points),
            ..defaults.oracle
        },
    };
    solver.validate().context("in section [solver]")?;
    let profile = |v: Option<ProfileValue>, default: f64, key: &str| -> Result<Profile> {
        v.map(|p| p.to_profile())
            .transpose()
            .with_context(|| format!("in section [solver], key `{key}`"))
            .map(|p| p.unwrap_or(Profile::Constant(default)))
    };
    let initial = InitialData {
        u0: profile(s.u0, 1.0, "u0")?,
        v0: profile(s.v0, 0.0, "v0")?,
        omega: profile(s.omega, 0.0, "omega")?,
        extended_radius: s.extended_radius,
    };
    if let Some(r) = initial.extended_radius {
        if !(r >= radius) {
            bail!("in section [solver], key `extended_radius`: {r} is below the ball radius {radius}");
        }
    }

    let sp = raw.sampling.unwrap_or_default();
    let sd = SamplingConfig::default();
    let sampling = SamplingConfig {
        seed: 0,
        cone_samples: sp.cone_samples.unwrap_or(sd.cone_samples),
        ball_samples: sp.ball_samples.unwrap_or(sd.ball_samples),
        points_per_decade: sp.points_per_decade.unwrap_or(sd.points_per_decade),
        y_points: sp.y_points.unwrap_or(sd.y_points),
        x_min: sp.x_min.unwrap_or(sd.x_min),
        x_max: sp.x_max.unwrap_or(sd.x_max),
        root: solver.root,
    };
    if !(sampling.x_min > 0.0 && sampling.x_min < 1.0 && sampling.x_max > 1.0) {
        bail!("in section [sampling]: need 0 < x_min < 1 < x_max");
    }
    if sampling.cone_samples == 0 || sampling.ball_samples == 0 || sampling.points_per_decade == 0 {
        bail!("in section [sampling]: sample counts must be positive");
    }

    Ok(RunConfig {
        seed: raw.seed.unwrap_or(0),
        output_dir: raw.output_dir,
        grid,
        kernel1,
        kernel2,
        f,
        g,
        c1,
        radius,
        solver,
        initial,
        sampling,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("invalid config {}", path.display()))
}

impl RunConfig {
    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::build(
            self.grid.n,
            self.grid.rule,
            self.grid.a,
            self.grid.b,
        )?))
    }

    /// Builds the discretized problem; table paths resolve against `base_dir`.
    pub fn build_spec(&self, base_dir: &Path) -> Result<ProblemSpec> {
        let grid = self.build_grid()?;
        let kernel = |source: &KernelSource, name: &str| -> Result<Kernel> {
            match source {
                KernelSource::Preset(p) => Ok(Kernel::from_preset(&grid, *p)?),
                KernelSource::Table(path) => {
                    let path = base_dir.join(path);
                    let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
                    Kernel::read_csv(&grid, file).with_context(|| format!("reading [{name}] table {}", path.display()))
                }
            }
        };
        let k1 = kernel(&self.kernel1, "kernel1")?;
        let k2 = kernel(&self.kernel2, "kernel2")?;
        let cone = ConeSpec::on_grid(self.c1, &grid)?;
        Ok(ProblemSpec::new(
            grid,
            k1,
            k2,
            self.f,
            self.g,
            cone,
            BallSpec::new(self.radius)?,
        )?)
    }

    pub fn initial_function(grid: &Arc<Grid>, profile: Profile) -> GridFunction {
        GridFunction::from_fn(Arc::clone(grid), |t| profile.eval(t))
    }
}
