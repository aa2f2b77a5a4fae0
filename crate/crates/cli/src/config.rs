//! JSON run configuration.

use std::path::Path;
use std::sync::Arc;

use adshiggs::domains::{ChartGrid, ComplexField, RealField};
use adshiggs::higgs::{HarmonicMetric, HiggsData, MAX_NEWTON_STEPS};
use adshiggs::symbolic::parse;
use adshiggs::Complex64;
use serde::Deserialize;

use crate::Failure;

pub const SCHEMA: u32 = 1;

pub const BUNDLED: [(&str, &str); 2] = [
    ("fuchsian-genus2", include_str!("../configs/fuchsian-genus2.json")),
    ("torus-constants", include_str!("../configs/torus-constants.json")),
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: u32,
    pub domain: DomainSpec,
    pub higgs: HiggsSpec,
    pub metric: MetricSpec,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Torus { n: usize, modulus: [f64; 2] },
    Disk { n: usize, radius: f64 },
    Octagon { n: usize },
}

/// A number, an expression in `z`, or one sample per grid node.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Number(f64),
    Expr(String),
    Samples {
        re: Vec<f64>,
        #[serde(default)]
        im: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiggsSpec {
    pub alpha: FieldSpec,
    pub beta: FieldSpec,
    pub gamma: FieldSpec,
    pub delta: FieldSpec,
    pub e1: i64,
    pub e2: i64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Keyword(String),
    Fields { h: FieldSpec, k: FieldSpec },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Flatness tolerance for the torus solver.
    pub tolerance: f64,
    pub max_iter: usize,
    pub n_theta: usize,
    /// Threshold below which the Pfaffian counts as vanishing.
    pub pfaffian_tol: f64,
    pub fiber_nodes: usize,
    pub output: Option<String>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            tolerance: 1e-10,
            max_iter: MAX_NEWTON_STEPS,
            n_theta: 16,
            pfaffian_tol: 1e-10,
            fiber_nodes: 3,
            output: None,
        }
    }
}

/// A parsed config plus the name it was loaded under.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub name: String,
    pub config: Config,
}

/// Reads `arg` as a file path, falling back to a bundled config name.
pub fn load(arg: &str) -> Result<Loaded, Failure> {
    let path = Path::new(arg);
    let (name, text) = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{arg}: {e}")))?;
        let name = path.file_stem().map_or(arg.to_string(), |s| s.to_string_lossy().into_owned());
        (name, text)
    } else {
        let key = arg.strip_suffix(".json").unwrap_or(arg);
        let Some((name, text)) = BUNDLED.iter().find(|(n, _)| *n == key) else {
            let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
            return Err(Failure::Config(format!(
                "{arg}: no such file and no bundled config of that name (bundled: {})",
                names.join(", ")
            )));
        };
        (name.to_string(), text.to_string())
    };
    let config = from_str(&text).map_err(|e| match e {
        Failure::Config(m) => Failure::Config(format!("{name}: {m}")),
        other => other,
    })?;
    Ok(Loaded { name, config })
}

pub fn from_str(text: &str) -> Result<Config, Failure> {
    let config: Config = serde_json::from_str(text).map_err(|e| {
        Failure::Config(format!("line {}, column {}: {}", e.line(), e.column(), strip_position(&e)))
    })?;
    if config.schema != SCHEMA {
        return Err(Failure::Config(format!("schema: unsupported version {} (expected {SCHEMA})", config.schema)));
    }
    Ok(config)
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(cut) => s[..cut].to_string(),
        None => s,
    }
}

impl DomainSpec {
    pub fn build(&self) -> Result<Arc<ChartGrid>, Failure> {
        let grid = match *self {
            DomainSpec::Torus { n, modulus } => ChartGrid::torus(n, Complex64::new(modulus[0], modulus[1])),
            DomainSpec::Disk { n, radius } => ChartGrid::disk_patch(radius, n),
            DomainSpec::Octagon { n } => ChartGrid::genus2_octagon(n),
        };
        grid.map(Arc::new).map_err(|e| Failure::Config(format!("domain: {e}")))
    }
}

impl FieldSpec {
    pub fn build(&self, grid: &Arc<ChartGrid>, key: &str) -> Result<ComplexField, Failure> {
        match self {
            FieldSpec::Number(v) => Ok(ComplexField::constant(grid, Complex64::new(*v, 0.0))),
            FieldSpec::Expr(text) => {
                let expr = parse(text).map_err(|e| {
                    Failure::Config(format!("{key}: position {}: {} in \"{text}\"", e.position, e.message))
                })?;
                ComplexField::try_from_fn(grid, |z| expr.eval(z)).map_err(|e| Failure::Config(format!("{key}: {e}")))
            }
            FieldSpec::Samples { re, im } => {
                let im = im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
                if re.len() != grid.len() || im.len() != grid.len() {
                    return Err(Failure::Config(format!(
                        "{key}: {} real and {} imaginary samples for a grid of {} nodes",
                        re.len(),
                        im.len(),
                        grid.len()
                    )));
                }
                let values = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
                let valid = (0..grid.len()).map(|i| grid.in_support(i)).collect();
                ComplexField::new(grid.clone(), values, valid).map_err(|e| Failure::Config(format!("{key}: {e}")))
            }
        }
    }

    fn build_real(&self, grid: &Arc<ChartGrid>, key: &str) -> Result<RealField, Failure> {
        self.build(grid, key)?
            .to_real(1e-12)
            .map_err(|e| Failure::Config(format!("{key}: {e}")))
    }
}

/// Either an explicit metric or a request to solve for one.
pub enum MetricChoice {
    Explicit(HarmonicMetric),
    Solve,
}

pub struct Problem {
    pub grid: Arc<ChartGrid>,
    pub data: HiggsData,
    pub metric: MetricChoice,
}

impl Config {
    pub fn build(&self) -> Result<Problem, Failure> {
        let grid = self.domain.build()?;
        let h = &self.higgs;
        let data = HiggsData::new(
            h.alpha.build(&grid, "higgs.alpha")?,
            h.beta.build(&grid, "higgs.beta")?,
            h.gamma.build(&grid, "higgs.gamma")?,
            h.delta.build(&grid, "higgs.delta")?,
            h.e1,
            h.e2,
        )
        .map_err(|e| Failure::Config(format!("higgs: {e}")))?;
        let metric = match &self.metric {
            MetricSpec::Keyword(k) if k == "solve" => MetricChoice::Solve,
            MetricSpec::Keyword(k) => {
                return Err(Failure::Config(format!("metric: unknown keyword \"{k}\" (expected \"solve\")")))
            }
            MetricSpec::Fields { h, k } => MetricChoice::Explicit(
                HarmonicMetric::new(h.build_real(&grid, "metric.h")?, k.build_real(&grid, "metric.k")?)
                    .map_err(|e| Failure::Config(format!("metric: {e}")))?,
            ),
        };
        Ok(Problem { grid, data, metric })
    }
}
