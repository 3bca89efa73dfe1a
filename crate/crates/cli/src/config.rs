//! Strict JSON run configuration and its translation into core types.

use std::path::{Path, PathBuf};

use maxess_core::coefficients::{GridTensor, RadialProfile, RadialTerm};
use maxess_core::oracle::GridParams;
use maxess_core::weyl::{ScheduleRule, TestFunction};
use maxess_core::{AtInfinity, CoefficientField, DomainSpec, Mat3, Point, TensorField};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub coefficients: CoefficientsConfig,
    pub command: Command,
    #[serde(default)]
    pub command_params: serde_json::Value,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Symbol,
    Divform,
    Helmholtz,
    Weyl,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Symbol => "symbol",
            Command::Divform => "divform",
            Command::Helmholtz => "helmholtz",
            Command::Weyl => "weyl",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Emit CSV sample clouds of spectrum sets.
    #[serde(default = "yes")]
    pub samples_csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, samples_csv: true }
    }
}

fn yes() -> bool {
    true
}

/// A scalar (multiple of the identity) or a row-major 3×3 matrix.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixValue {
    Scalar(f64),
    Matrix([[f64; 3]; 3]),
}

impl MatrixValue {
    pub fn to_mat(&self) -> Mat3 {
        match self {
            MatrixValue::Scalar(s) => Mat3::identity() * *s,
            MatrixValue::Matrix(m) => Mat3::from_fn(|i, j| m[i][j]),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub amplitude: MatrixValue,
    /// `{"profile": "gaussian", "width": ..}` and the other radial profiles.
    pub shape: RadialProfile,
    #[serde(default)]
    pub center: [f64; 3],
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TensorConfig {
    Constant {
        value: MatrixValue,
    },
    Radial {
        base: MatrixValue,
        terms: Vec<TermConfig>,
    },
    /// Sidecar defaults to the data path with a `.json` extension; off the grid
    /// the tensor equals `outside`, by default the value at infinity.
    Grid {
        data: PathBuf,
        #[serde(default)]
        sidecar: Option<PathBuf>,
        #[serde(default)]
        outside: Option<MatrixValue>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    pub eps: TensorConfig,
    pub mu: TensorConfig,
    pub sigma: TensorConfig,
    /// Ellipticity constant `Λ`.
    pub lambda: f64,
    /// Required on unbounded domains, rejected on bounded ones.
    #[serde(default)]
    pub at_infinity: Option<AtInfinity>,
}

impl TensorConfig {
    fn paths(&self) -> Vec<PathBuf> {
        match self {
            TensorConfig::Grid { data, sidecar, .. } => vec![data.clone(), sidecar.clone().unwrap_or_else(|| data.with_extension("json"))],
            _ => Vec::new(),
        }
    }

    fn build(&self, base: &Path, limit: f64) -> Result<TensorField, CliError> {
        Ok(match self {
            TensorConfig::Constant { value } => TensorField::constant(value.to_mat()),
            TensorConfig::Radial { base, terms } => TensorField::radial(
                base.to_mat(),
                terms.iter().map(|t| RadialTerm::new(t.amplitude.to_mat(), t.shape).centered(Point::from(t.center))).collect(),
            ),
            TensorConfig::Grid { data, sidecar, outside } => {
                let data = resolve(base, data);
                let side = sidecar.as_ref().map(|s| resolve(base, s)).unwrap_or_else(|| data.with_extension("json"));
                let outside = outside.as_ref().map(MatrixValue::to_mat).unwrap_or_else(|| Mat3::identity() * limit);
                TensorField::grid(GridTensor::read(&data, &side, outside).map_err(|e| CliError::validation("coefficients", e.to_string()))?)
            }
        })
    }
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl CoefficientsConfig {
    pub fn build(&self, domain: &DomainSpec, base: &Path) -> Result<CoefficientField, CliError> {
        let bounded = domain.is_bounded();
        let inf = match (bounded, self.at_infinity) {
            (true, Some(_)) => return Err(CoefficientsConfig::err("at_infinity", "bounded domains take no values at infinity")),
            (true, None) => AtInfinity::BOUNDED,
            (false, Some(a)) => a,
            (false, None) => return Err(CoefficientsConfig::err("at_infinity", "required on unbounded domains")),
        };
        let eps = self.eps.build(base, inf.eps0)?;
        let mu = self.mu.build(base, inf.mu0)?;
        let sigma = self.sigma.build(base, inf.sigma0)?;
        let field = if bounded {
            CoefficientField::bounded(eps, mu, sigma, self.lambda)
        } else {
            AtInfinity::new(inf.eps0, inf.mu0, inf.sigma0).map_err(|e| CoefficientsConfig::err("at_infinity", &e.to_string()))?;
            CoefficientField::new(eps, mu, sigma, self.lambda, inf)
        };
        field.map_err(|e| CliError::validation("coefficients", e.to_string()))
    }

    fn err(field: &str, msg: &str) -> CliError {
        CliError::validation(&format!("coefficients.{field}"), msg.to_string())
    }

    pub fn paths(&self) -> Vec<PathBuf> {
        [&self.eps, &self.mu, &self.sigma].iter().flat_map(|t| t.paths()).collect()
    }
}

// ---- command parameters ----

fn default_samples() -> usize {
    2000
}
fn default_extent() -> f64 {
    10.0
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_cloud() -> usize {
    200
}
fn default_cloud_extent() -> f64 {
    20.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    /// Interior sample points for the pointwise criterion.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Half-width of the sampled region along unbounded axes.
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_cloud")]
    pub cloud_points: usize,
    #[serde(default = "default_cloud_extent")]
    pub cloud_extent: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivformParams {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderMode {
    pub n: [u32; 2],
    pub xi: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolParams {
    /// `[re, im]`
    pub omega: [f64; 2],
    #[serde(default)]
    pub xi: Option<[f64; 3]>,
    #[serde(default)]
    pub cylinder_mode: Option<CylinderMode>,
    #[serde(default = "default_cloud")]
    pub cloud_points: usize,
    #[serde(default = "default_cloud_extent")]
    pub cloud_extent: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HelmholtzOperator {
    Potential,
    TN,
    TT,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomField {
    pub modes: [usize; 3],
    /// Periods of the unbounded axes; entries for walled axes are ignored.
    pub periods: [f64; 3],
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSource {
    /// Coefficient file with its `.json` sidecar next to it.
    File(PathBuf),
    /// Band-limited solenoidal field drawn from `--seed`.
    Random(RandomField),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelmholtzParams {
    pub field: FieldSource,
    pub operator: HelmholtzOperator,
    #[serde(default)]
    pub bc: Option<maxess_core::helmholtz::BoundaryCondition>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfinityParams {
    pub n_max: usize,
    pub radii: Vec<f64>,
}

fn default_box_n() -> usize {
    128
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylParams {
    pub x0: [f64; 3],
    pub nu: f64,
    pub schedule: ScheduleRule,
    #[serde(default = "default_box_n")]
    pub box_n: usize,
    #[serde(default)]
    pub test_functions: Vec<TestFunction>,
    #[serde(default)]
    pub infinity: Option<InfinityParams>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaWindow {
    pub re: [f64; 2],
    pub im: [f64; 2],
    /// Samples along the real and imaginary directions.
    pub n: [usize; 2],
}

fn default_iterations() -> usize {
    300
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub grid: GridParams,
    #[serde(default)]
    pub omegas: Vec<[f64; 2]>,
    #[serde(default)]
    pub window: Option<OmegaWindow>,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "yes")]
    pub allow_dense: bool,
}

/// Parsed command parameters.
#[derive(Clone, Debug)]
pub enum Params {
    Spectrum(SpectrumParams),
    Symbol(SymbolParams),
    Divform(DivformParams),
    Helmholtz(HelmholtzParams),
    Weyl(WeylParams),
    Sweep(SweepParams),
}

fn parse<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T, CliError> {
    let v = if v.is_null() { serde_json::Value::Object(Default::default()) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| CliError::validation("command_params", e.to_string()))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::validation(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation("config", e.to_string()))
    }

    /// Checks every field that can be checked without computing, and parses the command block.
    pub fn validate(&self, base: &Path) -> Result<Params, CliError> {
        // the message starts with the offending field, e.g. `domain.L[1] must be ...`
        self.domain.check().map_err(|m| CliError::validation(m.split_whitespace().next().unwrap_or("domain"), m.clone()))?;
        positive("coefficients.lambda", self.coefficients.lambda)?;
        let params = match self.command {
            Command::Spectrum => {
                let p: SpectrumParams = parse(&self.command_params)?;
                positive("command_params.extent", p.extent)?;
                positive("command_params.tolerance", p.tolerance)?;
                Params::Spectrum(p)
            }
            Command::Divform => {
                let p: DivformParams = parse(&self.command_params)?;
                positive("command_params.extent", p.extent)?;
                positive("command_params.tolerance", p.tolerance)?;
                if p.samples == 0 {
                    return Err(CliError::validation("command_params.samples", "must be at least 1".into()));
                }
                Params::Divform(p)
            }
            Command::Symbol => {
                let p: SymbolParams = parse(&self.command_params)?;
                match (&p.xi, &p.cylinder_mode, &self.domain) {
                    (Some(_), None, _) => {}
                    (None, Some(_), DomainSpec::Cylinder { .. }) => {}
                    (None, Some(_), _) => return Err(CliError::validation("command_params.cylinder_mode", "needs a cylinder domain".into())),
                    _ => return Err(CliError::validation("command_params", "give exactly one of xi and cylinder_mode".into())),
                }
                Params::Symbol(p)
            }
            Command::Helmholtz => {
                let p: HelmholtzParams = parse(&self.command_params)?;
                if p.operator == HelmholtzOperator::Potential && p.bc.is_none() {
                    return Err(CliError::validation("command_params.bc", "required for the potential operator".into()));
                }
                Params::Helmholtz(p)
            }
            Command::Weyl => {
                let p: WeylParams = parse(&self.command_params)?;
                p.schedule.entries().map_err(|e| CliError::validation("command_params.schedule", e.to_string()))?;
                Params::Weyl(p)
            }
            Command::Sweep => {
                let p: SweepParams = parse(&self.command_params)?;
                if p.omegas.is_empty() && p.window.is_none() {
                    return Err(CliError::validation("command_params", "give omegas or window".into()));
                }
                if p.grid.cells.iter().any(|&c| c < 2) {
                    return Err(CliError::validation("command_params.grid.cells", "need at least two cells per axis".into()));
                }
                for (a, &pd) in p.grid.periods.iter().enumerate() {
                    positive(&format!("command_params.grid.periods[{a}]"), pd)?;
                }
                Params::Sweep(p)
            }
        };
        let mut paths = self.coefficients.paths();
        if let Params::Helmholtz(HelmholtzParams { field: FieldSource::File(f), .. }) = &params {
            paths.push(f.clone());
            paths.push(f.with_extension("json"));
        }
        for p in paths {
            let full = resolve(base, &p);
            if !full.exists() {
                return Err(CliError::validation("path", format!("referenced file {} does not exist", full.display())));
            }
        }
        Ok(params)
    }
}

impl OmegaWindow {
    pub fn samples(&self) -> Vec<maxess_core::Complex64> {
        let lin = |r: [f64; 2], n: usize, i: usize| if n <= 1 { r[0] } else { r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64 };
        let mut out = Vec::with_capacity(self.n[0] * self.n[1]);
        for j in 0..self.n[1].max(1) {
            for i in 0..self.n[0].max(1) {
                out.push(maxess_core::Complex64::new(lin(self.re, self.n[0], i), lin(self.im, self.n[1], j)));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_value_forms() {
        let s: MatrixValue = serde_json::from_str("2.5").unwrap();
        assert_eq!(s.to_mat(), Mat3::identity() * 2.5);
        let m: MatrixValue = serde_json::from_str("[[1,2,3],[4,5,6],[7,8,9]]").unwrap();
        assert_eq!(m.to_mat()[(1, 2)], 6.0);
        assert!(serde_json::from_str::<MatrixValue>("[1,2,3]").is_err());
    }

    #[test]
    fn window_samples_cover_corners() {
        let w = OmegaWindow { re: [0.0, 2.0], im: [-1.0, 0.0], n: [3, 2] };
        let s = w.samples();
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], maxess_core::Complex64::new(0.0, -1.0));
        assert_eq!(s[5], maxess_core::Complex64::new(2.0, 0.0));
    }

    #[test]
    fn unknown_command_is_rejected() {
        let text = r#"{"domain":{"kind":"full-space"},"coefficients":{"eps":{"kind":"constant","value":1},"mu":{"kind":"constant","value":1},"sigma":{"kind":"constant","value":0},"lambda":1},"command":"eigs"}"#;
        assert!(RunConfig::from_json(text).is_err());
    }
}
