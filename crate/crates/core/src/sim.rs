//! Simulation study: scenario models, method sweeps over the number of
//! layers, and aggregation of the resulting accuracy curves.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::Method;
use crate::cluster::KMeansConfig;
use crate::error::{Error, Result};
use crate::joint::DcMaseConfig;
use crate::linalg::Matrix;
use crate::metrics::{ari, misclustering_rate};
use crate::model::{CommunityAssignment, EdgeMode, MultilayerModel};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    /// Unit diagonal, 0.4 off the diagonal, shared by all layers.
    Same,
    /// Per layer, diagonal `p ~ U(0,1)` and off-diagonal `q ~ U(0,1)`.
    Different,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMode {
    /// One `Exp(1) + 0.2` draw per vertex shared by all layers.
    Same,
    /// Fresh `Exp(1) + 0.2` draws in every layer.
    Different,
    /// 0.8 when the vertex and layer numbers have equal parity, else 0.15.
    Alternating,
}

fn default_n() -> usize {
    150
}
fn default_k() -> usize {
    3
}
fn default_degree() -> f64 {
    10.0
}
fn default_grid() -> Vec<usize> {
    vec![2, 4, 8, 16, 32, 64]
}
fn default_reps() -> usize {
    20
}
fn default_edge_mode() -> EdgeMode {
    EdgeMode::ClippedBernoulli
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub b_mode: BlockMode,
    pub theta_mode: ThetaMode,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_degree")]
    pub target_degree: f64,
    #[serde(default = "default_grid", rename = "L_grid")]
    pub l_grid: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// `clipped_bernoulli` saturates expectations above one; `bernoulli`
    /// rejects such models and the replication is reported as failed.
    #[serde(default = "default_edge_mode")]
    pub edge_mode: EdgeMode,
    /// Feed the expected matrices to the methods instead of samples.
    #[serde(default)]
    pub population: bool,
    /// Record wall-clock time per run; off keeps outputs byte-reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub kmeans: KMeansConfig,
}

impl Scenario {
    pub fn new(name: &str, b_mode: BlockMode, theta_mode: ThetaMode) -> Self {
        Self {
            name: name.to_string(),
            b_mode,
            theta_mode,
            n: default_n(),
            k: default_k(),
            target_degree: default_degree(),
            l_grid: default_grid(),
            reps: default_reps(),
            seed: 0,
            edge_mode: default_edge_mode(),
            population: false,
            timing: false,
            kmeans: KMeansConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(Error::Config(format!(
                "k = {} must be in 1..=n ({})",
                self.k, self.n
            )));
        }
        if self.target_degree.is_nan() || self.target_degree <= 0.0 {
            return Err(Error::Config("target_degree must be positive".into()));
        }
        if self.l_grid.is_empty() || self.l_grid.contains(&0) {
            return Err(Error::Config(
                "L_grid must hold positive layer counts".into(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be positive".into()));
        }
        Ok(())
    }

    /// Seed of one `(L, rep)` cell.
    pub fn cell_seed(&self, layers: usize, rep: usize) -> u64 {
        rng::derive_seed(self.seed, &[layers as u64, rep as u64])
    }
}

fn exp_plus(rng: &mut rng::Rng, n: usize) -> Vec<f64> {
    let exp = Exp::new(1.0).expect("unit rate");
    (0..n).map(|_| exp.sample(rng) + 0.2).collect()
}

fn open_unit(rng: &mut rng::Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Scenario model with `layers` layers, rescaled to the target mean degree.
pub fn generate_scenario_model(
    s: &Scenario,
    layers: usize,
    rep_seed: u64,
) -> Result<MultilayerModel> {
    s.validate()?;
    let mut rng = rng::stream(rep_seed, &[0]);
    let assignment = CommunityAssignment::balanced(s.n, s.k)?;
    let k = s.k;

    let blocks: Vec<Matrix> = match s.b_mode {
        BlockMode::Same => {
            let b = Matrix::from_fn(k, k, |r, c| if r == c { 1.0 } else { 0.4 });
            vec![b; layers]
        }
        BlockMode::Different => (0..layers)
            .map(|_| {
                let p = open_unit(&mut rng);
                let q = open_unit(&mut rng);
                Matrix::from_fn(k, k, |r, c| if r == c { p } else { q })
            })
            .collect(),
    };
    let theta: Vec<Vec<f64>> = match s.theta_mode {
        ThetaMode::Same => vec![exp_plus(&mut rng, s.n); layers],
        ThetaMode::Different => (0..layers).map(|_| exp_plus(&mut rng, s.n)).collect(),
        ThetaMode::Alternating => (0..layers)
            .map(|l| {
                (0..s.n)
                    .map(|i| if i % 2 == l % 2 { 0.8 } else { 0.15 })
                    .collect()
            })
            .collect(),
    };
    MultilayerModel::new(assignment, theta, blocks, EdgeMode::Poisson)?
        .rescale_to_average_degree(s.target_degree)?
        .with_edge_mode(s.edge_mode)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub scenario: String,
    pub method: Method,
    #[serde(rename = "L")]
    pub layers: usize,
    pub rep: usize,
    pub ari: f64,
    pub misclustering: f64,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

fn run_cell(s: &Scenario, methods: &[Method], layers: usize, rep: usize) -> Vec<RunRecord> {
    let seed = s.cell_seed(layers, rep);
    let record = |method: Method, ari: f64, mis: f64, ms: f64, error: Option<String>| RunRecord {
        scenario: s.name.clone(),
        method,
        layers,
        rep,
        ari,
        misclustering: mis,
        wall_time_ms: if s.timing { ms } else { 0.0 },
        error,
    };
    let data = generate_scenario_model(s, layers, seed).and_then(|m| {
        let mats = if s.population {
            m.expected_matrices()?
        } else {
            m.sample(seed, 1)?
        };
        Ok((m, mats))
    });
    let (model, mats) = match data {
        Ok(d) => d,
        Err(e) => {
            return methods
                .iter()
                .map(|&m| record(m, f64::NAN, f64::NAN, 0.0, Some(e.to_string())))
                .collect();
        }
    };
    let truth = model.assignment().labels();
    let cfg = DcMaseConfig {
        kmeans: s.kmeans.with_seed(rng::derive_seed(seed, &[2])),
        ..Default::default()
    };
    methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let fit = method.fit(&mats, s.k, &cfg, true);
            let ms = start.elapsed().as_secs_f64() * 1e3;
            match fit.and_then(|f| {
                Ok((
                    ari(&f.labels, truth)?,
                    misclustering_rate(&f.labels, truth)?,
                ))
            }) {
                Ok((a, m)) => record(method, a, m, ms, None),
                Err(e) => record(method, f64::NAN, f64::NAN, ms, Some(e.to_string())),
            }
        })
        .collect()
}

/// Run every method on every `(L, rep)` cell. Records are ordered by `L`,
/// then replication, then the order of `methods`.
pub fn run_sweep(s: &Scenario, methods: &[Method]) -> Result<Vec<RunRecord>> {
    s.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    let cells: Vec<(usize, usize)> = s
        .l_grid
        .iter()
        .flat_map(|&l| (0..s.reps).map(move |r| (l, r)))
        .collect();
    Ok(cells
        .into_par_iter()
        .flat_map_iter(|(l, r)| run_cell(s, methods, l, r))
        .collect())
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

/// CSV with columns `scenario,method,L,rep,ari,misclustering,wall_time_ms`.
pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("scenario,method,L,rep,ari,misclustering,wall_time_ms\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scenario,
            r.method,
            r.layers,
            r.rep,
            fmt_f64(r.ari),
            fmt_f64(r.misclustering),
            fmt_f64(r.wall_time_ms)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryCell {
    pub method: Method,
    #[serde(rename = "L")]
    pub layers: usize,
    pub runs: usize,
    pub failures: usize,
    pub mean_ari: f64,
    pub se_ari: f64,
    pub mean_misclustering: f64,
    pub se_misclustering: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub note: String,
    pub cells: Vec<SummaryCell>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-`(method, L)` means and standard errors over successful runs.
pub fn summarize(s: &Scenario, methods: &[Method], records: &[RunRecord]) -> Summary {
    let mut cells = Vec::new();
    for &method in methods {
        for &layers in &s.l_grid {
            let runs: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.method == method && r.layers == layers)
                .collect();
            let ok: Vec<&&RunRecord> = runs.iter().filter(|r| r.error.is_none()).collect();
            let aris: Vec<f64> = ok.iter().map(|r| r.ari).collect();
            let mis: Vec<f64> = ok.iter().map(|r| r.misclustering).collect();
            let (mean_ari, se_ari) = mean_se(&aris);
            let (mean_misclustering, se_misclustering) = mean_se(&mis);
            cells.push(SummaryCell {
                method,
                layers,
                runs: runs.len(),
                failures: runs.len() - ok.len(),
                mean_ari,
                se_ari,
                mean_misclustering,
                se_misclustering,
            });
        }
    }
    Summary {
        scenario: s.clone(),
        methods: methods.to_vec(),
        note: format!("{} replications per (method, L) cell", s.reps),
        cells,
    }
}

const PALETTE: [&str; 4] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a"];

/// Line chart of mean ARI against the number of layers, one line per method.
pub fn summary_svg(summary: &Summary) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let grid = &summary.scenario.l_grid;
    let xs: Vec<f64> = grid.iter().map(|l| (*l as f64).log2()).collect();
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(*x), b.max(*x))
        });
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let px = |x: f64| pad + (x - xmin) / span * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y.clamp(-0.1, 1.0) + 0.1) / 1.1 * (h - 2.0 * pad);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{} — mean ARI vs L</text>"#,
        w / 2.0,
        summary.scenario.name
    );
    let _ = writeln!(
        out,
        r#"<polyline points="{},{} {},{} {},{}" fill="none" stroke="black"/>"#,
        pad,
        pad,
        pad,
        h - pad,
        w - pad,
        h - pad
    );
    for (x, l) in xs.iter().zip(grid) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{l}</text>"#,
            px(*x),
            h - pad + 16.0
        );
    }
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{tick:.1}</text>"#,
            pad - 6.0,
            py(tick) + 4.0
        );
    }
    for (mi, method) in summary.methods.iter().enumerate() {
        let colour = PALETTE[mi % PALETTE.len()];
        let pts: Vec<String> = summary
            .cells
            .iter()
            .filter(|c| c.method == *method && c.mean_ari.is_finite())
            .map(|c| format!("{:.1},{:.1}", px((c.layers as f64).log2()), py(c.mean_ari)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" fill="{colour}">{method}</text>"#,
            w - pad - 70.0,
            pad + 16.0 * mi as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Configuration file of the `simulate` command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    #[serde(default = "all_method_names")]
    pub methods: Vec<String>,
}

fn all_method_names() -> Vec<String> {
    Method::ALL.iter().map(|m| m.as_str().to_string()).collect()
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.scenario.validate()?;
        Ok(cfg)
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        self.methods.iter().map(|m| m.parse()).collect()
    }
}
