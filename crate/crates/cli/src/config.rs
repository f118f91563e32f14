//! Experiment configuration. Relative paths resolve against the config file's directory.

use holozeros::bounds::BudgetForm;
use holozeros::files::{self, DomainFile, DomainSpec, ModelFile, WeightSpec};
use holozeros::holofunc::{ExponentialSum, HolomorphicModel, Polynomial, PolynomialModel};
use holozeros::measure::SampledFunction;
use holozeros::{Error, Point, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_grid: Vec<f64>,
    #[serde(default)]
    pub geometry: GeometrySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green: Option<GreenSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `cosh(z/h)` written as `e^{z/h} + e^{-z/h}`.
    Cosh,
    /// `sin z` as a two-term exponential sum at `h = 1`.
    Sine,
    ExpSum { phases: Vec<Vec<[f64; 2]>> },
    ModelFile { path: PathBuf },
    /// Either roots or ascending coefficients, as `[re, im]` pairs.
    Polynomial {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        roots: Option<Vec<[f64; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    LogIntegral,
    Averaged,
    GrowthProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Phi,
    Psi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySpec {
    /// Constant boundary weight; ignored when `weight` is given.
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    /// The band is the union of disks of radius `band_factor * r` around the boundary.
    pub band_factor: f64,
    pub c1: f64,
    /// Fitted from the sweep when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    pub form: FormKind,
    /// Growth-profile form only.
    pub rho0: f64,
    /// Growth-profile form only: `t = rtil^exponent`.
    pub exponent: f64,
    pub potential: Potential,
    /// Tie-curve tracing resolution for the assumption check and the `psi` potential.
    pub resolution: f64,
    /// Optional budget-vs-epsilon study at the first `h`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
}

impl GeometrySpec {
    pub fn budget_form(&self) -> BudgetForm {
        match self.form {
            FormKind::LogIntegral => BudgetForm::LogIntegral,
            FormKind::Averaged => BudgetForm::Averaged,
            FormKind::GrowthProfile => BudgetForm::GrowthProfile { rho0: self.rho0, exponent: self.exponent },
        }
    }
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec {
            r: 0.2,
            weight: None,
            band_factor: 1.0,
            c1: 1.0,
            c2: None,
            form: FormKind::LogIntegral,
            rho0: 2.0,
            exponent: 2.0,
            potential: Potential::Phi,
            resolution: 0.05,
            epsilons: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    pub theta: f64,
    pub vartheta: f64,
    #[serde(default = "one")]
    pub rho: f64,
    pub profile: ProfileSpec,
}

fn one() -> f64 {
    1.0
}

/// Angular profile `g` of a homogeneous weight `r^rho g(theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `|sin theta|`, sampled on the sector widened by half its opening on each side.
    AbsSin {
        #[serde(default = "default_profile_samples")]
        samples: usize,
    },
    Samples { start: f64, end: f64, values: Vec<f64> },
}

fn default_profile_samples() -> usize {
    2001
}

impl ProfileSpec {
    pub fn build(&self, theta: f64, vartheta: f64) -> Result<SampledFunction> {
        match self {
            ProfileSpec::AbsSin { samples } => {
                let pad = 0.5 * (vartheta - theta);
                SampledFunction::from_fn(theta - pad, vartheta + pad, *samples, |w| w.sin().abs())
            }
            ProfileSpec::Samples { start, end, values } => SampledFunction::new(*start, *end, values.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "benchmark", rename_all = "snake_case", deny_unknown_fields)]
pub enum GreenSpec {
    /// Unit disk against `-ln|x| / 2 pi`; `spacing` defaults to `2/256`.
    Disk {
        #[serde(default = "default_disk_spacing")]
        spacing: f64,
        #[serde(default = "default_disk_tolerance")]
        tolerance: f64,
    },
    /// Decay along a `width x length` strip against `pi / width`.
    Strip {
        width: f64,
        length: f64,
        spacing: f64,
        #[serde(default = "default_strip_tolerance")]
        tolerance: f64,
    },
    /// The configured domain with a source at `source`; fits the logarithmic constant with
    /// `r` from `geometry.r`.
    Domain { spacing: f64, source: [f64; 2] },
}

fn default_disk_spacing() -> f64 {
    2.0 / 256.0
}

fn default_disk_tolerance() -> f64 {
    0.02
}

fn default_strip_tolerance() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub plot: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out"), plot: false }
    }
}

/// The model a family resolves to.
pub enum Family {
    Sum(ExponentialSum),
    Poly(PolynomialModel),
}

impl Family {
    pub fn model(&self) -> &dyn HolomorphicModel {
        match self {
            Family::Sum(s) => s,
            Family::Poly(p) => p,
        }
    }

    pub fn sum(&self) -> Result<&ExponentialSum> {
        match self {
            Family::Sum(s) => Ok(s),
            Family::Poly(_) => Err(Error::Parse("this command needs an exponential-sum family".into())),
        }
    }
}

fn complex(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// A parsed config with external files loaded and the canonical hash computed.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub family: Family,
    pub domain: Option<DomainFile>,
    pub out_dir: PathBuf,
    pub hash: String,
}

#[derive(Serialize)]
struct Canonical<'a> {
    config: &'a ExperimentConfig,
    model: Option<ModelFile>,
    domain: Option<&'a DomainFile>,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Io(format!("{}: no such file", path.display())));
        }
        let config: ExperimentConfig = files::read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

        let (family, model) = match &config.family {
            FamilySpec::Cosh => (Family::Sum(ExponentialSum::cosh_family()), None),
            FamilySpec::Sine => (Family::Sum(ExponentialSum::sine()), None),
            FamilySpec::ExpSum { phases } => {
                let m = ModelFile { n: phases.len(), phases: phases.clone(), h_grid: Vec::new() };
                (Family::Sum(m.to_sum()?), None)
            }
            FamilySpec::ModelFile { path } => {
                let m: ModelFile = files::read(&resolve(path))?;
                (Family::Sum(m.to_sum()?), Some(m))
            }
            FamilySpec::Polynomial { roots, coeffs } => {
                let poly = match (roots, coeffs) {
                    (Some(r), None) => Polynomial::from_roots(&r.iter().map(complex).collect::<Vec<Point>>()),
                    (None, Some(c)) => Polynomial::new(c.iter().map(complex).collect())?,
                    _ => return Err(Error::Parse("polynomial family needs exactly one of `roots` or `coeffs`".into())),
                };
                (Family::Poly(PolynomialModel::new(poly)), None)
            }
        };

        let domain = match (&config.domain, &config.domain_file) {
            (Some(_), Some(_)) => return Err(Error::Parse("give either `domain` or `domain_file`, not both".into())),
            (Some(d), None) => Some(DomainFile { domain: d.clone(), weight: None }),
            (None, Some(p)) => Some(files::read(&resolve(p))?),
            (None, None) => None,
        };

        if config.h_grid.iter().chain(&config.r_grid).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Parse("grid entries must be positive and finite".into()));
        }

        // where results go does not change what they are
        let hashed = ExperimentConfig { output: OutputSpec::default(), ..config.clone() };
        let canonical = Canonical { config: &hashed, model, domain: domain.as_ref() };
        let hash = hex::encode(Sha256::digest(serde_json::to_vec(&canonical)?));
        let out_dir = resolve(&config.output.dir);
        Ok(Experiment { config, family, domain, out_dir, hash })
    }

    pub fn domain_file(&self) -> Result<&DomainFile> {
        self.domain.as_ref().ok_or_else(|| Error::Parse("this command needs a `domain` or `domain_file`".into()))
    }

    pub fn h_grid(&self) -> Result<&[f64]> {
        nonempty(&self.config.h_grid, "h_grid")
    }

    pub fn r_grid(&self) -> Result<&[f64]> {
        nonempty(&self.config.r_grid, "r_grid")
    }
}

fn nonempty<'a>(v: &'a [f64], name: &str) -> Result<&'a [f64]> {
    if v.is_empty() {
        Err(Error::Parse(format!("`{name}` must be nonempty")))
    } else {
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use holozeros::files::{from_str, Format};

    const COSH: &str = r#"
h_grid = [0.1, 0.05]

[family]
kind = "cosh"

[domain]
kind = "rectangle"
x0 = -1.0
x1 = 1.0
y0 = -1.0
y1 = 1.0
"#;

    #[test]
    fn defaults_fill_in() {
        let c: ExperimentConfig = from_str(COSH, Format::Toml).unwrap();
        assert_eq!(c.geometry, GeometrySpec::default());
        assert_eq!(c.output, OutputSpec::default());
        assert_eq!(c.family, FamilySpec::Cosh);
    }

    #[test]
    fn hash_ignores_formatting() {
        let dir = std::env::temp_dir().join(format!("hz-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let a = dir.join("a.toml");
        let b = dir.join("b.toml");
        std::fs::write(&a, COSH).unwrap();
        std::fs::write(&b, format!("# comment\n{}", COSH.replace("0.05", "5e-2"))).unwrap();
        let (ea, eb) = (Experiment::load(&a).unwrap(), Experiment::load(&b).unwrap());
        assert_eq!(ea.hash, eb.hash);
        assert_eq!(ea.hash.len(), 64);
        std::fs::write(&b, format!("{COSH}\n[output]\ndir = \"elsewhere\"\n")).unwrap();
        assert_eq!(Experiment::load(&b).unwrap().hash, ea.hash);
        std::fs::write(&b, COSH.replace("0.05", "0.02")).unwrap();
        assert_ne!(Experiment::load(&b).unwrap().hash, ea.hash);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(from_str::<ExperimentConfig>(&format!("{COSH}\nbogus = 1\n"), Format::Toml).is_err());
        assert!(matches!(Experiment::load(Path::new("/nonexistent/x.toml")), Err(Error::Io(_))));
        let both: ExperimentConfig =
            from_str("[family]\nkind = \"polynomial\"\nroots = [[0.0, 0.0]]\ncoeffs = [[1.0, 0.0]]\n", Format::Toml).unwrap();
        assert!(matches!(both.family, FamilySpec::Polynomial { .. }));
    }
}
