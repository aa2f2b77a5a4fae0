//! The report, fields and solve commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use adshiggs::ads::{ads_volume, fiber_report, volume_density, xw_minus_yz_field, FiberReport, JetSampler, VolumeReport};
use adshiggs::domains::{write_csv, ChartGrid, GridMeta, RealField};
use adshiggs::error::{AdsError, HiggsError};
use adshiggs::grassmann::{conformality_report, ConformalityReport};
use adshiggs::higgs::{
    assemble_connection, domination_report, euler_number, pfaffian_and_hopf, pullback_metric, pullback_volume_form,
    solve_hitchin_torus, splitting_euler_classes, DominationReport, EulerNumber, Factor, HarmonicMetric, HiggsData,
    Rank, SolveReport,
};
use adshiggs::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Loaded, MetricChoice, Params, Problem, SCHEMA};
use crate::Failure;

impl From<HiggsError> for Failure {
    fn from(e: HiggsError) -> Self {
        match e {
            HiggsError::NoConvergence { .. } | HiggsError::Obstruction { .. } => Failure::NonConvergence(e.to_string()),
            HiggsError::StencilTooSmall => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<AdsError> for Failure {
    fn from(e: AdsError) -> Self {
        match e {
            AdsError::Higgs(h) => h.into(),
            AdsError::TooFewAngles(_) => Failure::Config(format!("params.n_theta: {e}")),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

/// Explicit metrics pass through; `"solve"` runs the torus solver from the
/// constant metric `h = k = 1`.
fn resolve_metric(problem: &Problem, params: &Params) -> Result<(HarmonicMetric, Option<SolveReport>), Failure> {
    match &problem.metric {
        MetricChoice::Explicit(m) => Ok((m.clone(), None)),
        MetricChoice::Solve => {
            let init = HarmonicMetric::constant(&problem.grid, 1.0, 1.0)?;
            let (m, rep) = solve_hitchin_torus(&problem.data, &init, params.tolerance, params.max_iter)?;
            Ok((m, Some(rep)))
        }
    }
}

#[derive(Serialize)]
struct Claim<T: Serialize> {
    anchor: &'static str,
    #[serde(flatten)]
    value: T,
}

fn claim<T: Serialize>(anchor: &'static str, value: T) -> Claim<T> {
    Claim { anchor, value }
}

#[derive(Serialize)]
struct Flatness {
    first: f64,
    second: f64,
    full: f64,
}

#[derive(Serialize)]
struct Euler {
    declared: [i64; 2],
    first: Option<EulerNumber>,
    second: Option<EulerNumber>,
    consistent: Option<bool>,
}

#[derive(Serialize)]
struct Splitting {
    classes: [i64; 2],
}

#[derive(Serialize)]
struct Pfaffian {
    sup: f64,
    vanishes: bool,
    hopf_sup: f64,
}

#[derive(Serialize)]
struct TransversalityMin {
    n_theta: usize,
    min_abs_xw_minus_yz: f64,
    /// Smallest `|XW − YZ|` relative to the per-node threshold.
    min_over_threshold: f64,
    non_transverse_nodes: usize,
    transverse: bool,
}

#[derive(Serialize)]
struct Fibers {
    nodes: Vec<FiberReport>,
}

#[derive(Serialize)]
struct Claims {
    flatness: Claim<Flatness>,
    euler: Claim<Euler>,
    domination: Claim<DominationReport>,
    splitting: Claim<Splitting>,
    pfaffian: Claim<Pfaffian>,
    transversality: Claim<TransversalityMin>,
    volume: Claim<Option<VolumeReport>>,
    fibers: Claim<Fibers>,
    conformality: Claim<ConformalityReport>,
}

#[derive(Serialize)]
pub struct Report {
    schema: u32,
    config: String,
    grid: GridMeta,
    solver: Option<SolveReport>,
    claims: Claims,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    files: Vec<FileEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub rows: usize,
}

fn flatness(data: &HiggsData, metric: &HarmonicMetric) -> Result<Flatness, Failure> {
    let sup = |rank| -> Result<f64, Failure> { Ok(assemble_connection(data, metric, rank)?.flatness_residual()?.sup) };
    Ok(Flatness {
        first: sup(Rank::First)?,
        second: sup(Rank::Second)?,
        full: sup(Rank::Full)?,
    })
}

fn transversality_min(data: &HiggsData, metric: &HarmonicMetric, n_theta: usize) -> Result<TransversalityMin, Failure> {
    let sampler = JetSampler::new(data, metric)?;
    let grid = data.grid();
    let per_node: Vec<(f64, f64, bool)> = (0..grid.len())
        .into_par_iter()
        .filter(|&i| data.alpha.is_valid(i))
        .map(|i| {
            let input = sampler.input_without_c(i);
            let threshold = input.transversality_threshold();
            let m = (0..n_theta)
                .map(|j| input.xw_minus_yz(std::f64::consts::TAU * j as f64 / n_theta as f64).abs())
                .fold(f64::INFINITY, f64::min);
            (m, m / threshold, m <= threshold)
        })
        .collect();
    let non_transverse = per_node.iter().filter(|p| p.2).count();
    Ok(TransversalityMin {
        n_theta,
        min_abs_xw_minus_yz: per_node.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        min_over_threshold: per_node.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        non_transverse_nodes: non_transverse,
        transverse: non_transverse == 0,
    })
}

/// The node nearest the chart center plus evenly spread jet nodes.
fn fiber_nodes(sampler: &JetSampler, grid: &ChartGrid, count: usize) -> Vec<usize> {
    let candidates: Vec<usize> = (0..grid.len()).filter(|&i| sampler.has_jet(i)).collect();
    if candidates.is_empty() || count == 0 {
        return Vec::new();
    }
    let center = grid.nearest(Complex64::new(0.0, 0.0));
    let mut nodes = vec![if sampler.has_jet(center) { center } else { candidates[0] }];
    for k in 1..count {
        let idx = candidates[k * candidates.len() / count];
        if !nodes.contains(&idx) {
            nodes.push(idx);
        }
    }
    nodes
}

pub fn report(loaded: &Loaded, out: Option<&Path>) -> Result<Report, Failure> {
    let params = &loaded.config.params;
    let problem = loaded.config.build()?;
    let (metric, solver) = resolve_metric(&problem, params)?;
    let data = &problem.data;
    let grid = &problem.grid;

    let g1 = pullback_metric(data, &metric, Factor::First)?;
    let g2 = pullback_metric(data, &metric, Factor::Second)?;
    let (e_first, e_second) = if grid.is_closed() {
        (
            Some(euler_number(data, &metric, Factor::First)?),
            Some(euler_number(data, &metric, Factor::Second)?),
        )
    } else {
        (None, None)
    };
    let consistent = e_first
        .zip(e_second)
        .map(|(a, b)| a.nearest_even == data.e1 && b.nearest_even == data.e2);
    let (s1, s2) = splitting_euler_classes(data.e1, data.e2)?;
    let ph = pfaffian_and_hopf(data, params.pfaffian_tol)?;
    let volume = if grid.is_closed() {
        Some(ads_volume(data, &metric, params.n_theta)?)
    } else {
        None
    };
    let sampler = JetSampler::new(data, &metric)?;
    let fibers = fiber_nodes(&sampler, grid, params.fiber_nodes)
        .into_iter()
        .map(|i| fiber_report(&sampler, i, params.n_theta.max(64)))
        .collect::<Result<Vec<_>, _>>()?;
    let (conformality, _) = conformality_report(data, &metric, params.pfaffian_tol)?;

    let claims = Claims {
        flatness: claim("flat connection: sup |F(A)| per factor and for the tensor sum", flatness(data, &metric)?),
        euler: claim(
            "e_i = (1/2π) ∫ Vol(g_i)",
            Euler {
                declared: [data.e1, data.e2],
                first: e_first,
                second: e_second,
                consistent,
            },
        ),
        domination: claim("g_2 < g_1 on nonzero tangent vectors", domination_report(&g1, &g2)?),
        splitting: claim(
            "Euler classes of the rank-2 splitting: |e_1 − e_2|, |e_1 + e_2|",
            Splitting { classes: [s1, s2] },
        ),
        pfaffian: claim(
            "Pfaffian αβ − γδ and Hopf differential of the Higgs field",
            Pfaffian {
                sup: ph.pfaffian.sup_norm(),
                vanishes: ph.pfaffian_vanishes,
                hopf_sup: ph.hopf.sup_norm(),
            },
        ),
        transversality: claim(
            "XW − YZ ≠ 0 along every fiber",
            transversality_min(data, &metric, params.n_theta)?,
        ),
        volume: claim("Vol = π² |e_1 + e_2|", volume),
        fibers: claim("fibers are closed time-like geodesics of length 2π", Fibers { nodes: fibers }),
        conformality: claim("⟨f_z, f_z⟩ = −8(αβ − γδ); minimal iff the Pfaffian vanishes", conformality),
    };
    let files = match out {
        Some(dir) => write_fields(dir, data, &metric, params)?,
        None => Vec::new(),
    };
    Ok(Report {
        schema: SCHEMA,
        config: loaded.name.clone(),
        grid: grid.meta(),
        solver,
        claims,
        files,
    })
}

fn write_one(dir: &Path, name: &str, columns: &[(&str, &RealField)]) -> Result<FileEntry, Failure> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
    let mut w = BufWriter::new(file);
    let rows = write_csv(&mut w, columns).map_err(|e| io_failure(&path, e))?;
    w.flush().map_err(|e| io_failure(&path, e))?;
    Ok(FileEntry {
        name: name.to_string(),
        rows,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| io_failure(path, e))
}

/// Dumps the per-node fields as CSV into `dir`, plus `grid.json`.
pub fn write_fields(
    dir: &Path,
    data: &HiggsData,
    metric: &HarmonicMetric,
    params: &Params,
) -> Result<Vec<FileEntry>, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    write_json(&dir.join("grid.json"), &data.grid().meta())?;
    let mut files = Vec::new();
    for (which, tag) in [(Factor::First, "g1"), (Factor::Second, "g2")] {
        let g = pullback_metric(data, metric, which)?;
        let (p_re, p_im) = (g.p.map(|v| v.re), g.p.map(|v| v.im));
        files.push(write_one(dir, &format!("{tag}.csv"), &[("p_re", &p_re), ("p_im", &p_im), ("m", &g.m)])?);
        let vol = pullback_volume_form(data, metric, which)?;
        files.push(write_one(dir, &format!("vol_{tag}.csv"), &[("vol", &vol)])?);
    }
    let ph = pfaffian_and_hopf(data, params.pfaffian_tol)?;
    let (re, im) = (ph.pfaffian.map(|v| v.re), ph.pfaffian.map(|v| v.im));
    files.push(write_one(dir, "pfaffian.csv", &[("re", &re), ("im", &im)])?);
    let at_zero = xw_minus_yz_field(data, metric, 0.0)?;
    let density = volume_density(data, metric, params.n_theta)?;
    files.push(write_one(dir, "xw_minus_yz.csv", &[("abs_theta0", &at_zero), ("theta_integral", &density)])?);
    let (_, wedge) = conformality_report(data, metric, params.pfaffian_tol)?;
    let (re, im) = (wedge.map(|v| v.re), wedge.map(|v| v.im));
    files.push(write_one(dir, "fz_wedge.csv", &[("re", &re), ("im", &im)])?);
    files.push(write_one(dir, "metric.csv", &[("h", &metric.h), ("k", &metric.k)])?);
    Ok(files)
}

#[derive(Serialize)]
pub struct FieldsSummary {
    schema: u32,
    config: String,
    grid: GridMeta,
    solver: Option<SolveReport>,
    files: Vec<FileEntry>,
}

pub fn fields(loaded: &Loaded, out: &Path) -> Result<FieldsSummary, Failure> {
    let params = &loaded.config.params;
    let problem = loaded.config.build()?;
    let (metric, solver) = resolve_metric(&problem, params)?;
    let files = write_fields(out, &problem.data, &metric, params)?;
    Ok(FieldsSummary {
        schema: SCHEMA,
        config: loaded.name.clone(),
        grid: problem.grid.meta(),
        solver,
        files,
    })
}

#[derive(Serialize)]
struct Stats {
    min: f64,
    max: f64,
    mean: f64,
}

fn stats(f: &RealField) -> Stats {
    let vals: Vec<f64> = (0..f.grid().len()).filter(|&i| f.is_valid(i)).map(|i| f.value(i)).collect();
    Stats {
        min: vals.iter().copied().fold(f64::INFINITY, f64::min),
        max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: vals.iter().sum::<f64>() / vals.len() as f64,
    }
}

/// Constant solution of the decoupled equations, when both sides are nonzero.
#[derive(Serialize)]
struct Balance {
    k: Option<f64>,
    h: Option<f64>,
}

#[derive(Serialize)]
pub struct SolveSummary {
    schema: u32,
    config: String,
    grid: GridMeta,
    solver: SolveReport,
    h: Stats,
    k: Stats,
    balance: Balance,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    files: Vec<FileEntry>,
}

pub fn solve(loaded: &Loaded, out: Option<&Path>) -> Result<SolveSummary, Failure> {
    let params = &loaded.config.params;
    let problem = loaded.config.build()?;
    let init = match &problem.metric {
        MetricChoice::Explicit(m) => m.clone(),
        MetricChoice::Solve => HarmonicMetric::constant(&problem.grid, 1.0, 1.0)?,
    };
    let data = &problem.data;
    let (metric, solver) = solve_hitchin_torus(data, &init, params.tolerance, params.max_iter)?;
    let root = |num: Complex64, den: Complex64| (num.norm() > 0.0 && den.norm() > 0.0).then(|| (num.norm() / den.norm()).sqrt());
    let balance = Balance {
        k: root(data.alpha.value(0), data.beta.value(0)),
        h: root(data.gamma.value(0), data.delta.value(0)),
    };
    let files = match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            vec![write_one(dir, "metric.csv", &[("h", &metric.h), ("k", &metric.k)])?]
        }
        None => Vec::new(),
    };
    Ok(SolveSummary {
        schema: SCHEMA,
        config: loaded.name.clone(),
        grid: problem.grid.meta(),
        solver,
        h: stats(&metric.h),
        k: stats(&metric.k),
        balance,
        files,
    })
}
