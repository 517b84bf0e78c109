//! Reproducible experiment presets and their file outputs.
//!
//! A run is fully determined by `(preset, master seed, replicates)`.
//! Replicate `r` samples its graph with seed `stream_seed(master, r)`.
//! Wall-clock timings go to `timings.csv`, which is the only output that is
//! not byte-identical across re-runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::appr::{acl_parameters, appr_push, sweep, PushRule, SweepResult};
use crate::diagnostics::relative_l2;
use crate::graph::{
    conductance, log_squared_p, sample_planted_er, Graph, NodeSet, PlantedGraphConfig,
};
use crate::mean_field::{mean_conductance_community, mean_field_ppr, optimal_alpha, ModelShape};
use crate::plot::{scores_plot, Marker, Plot, Series, Style};
use crate::ppr::{classification_error, ppr, rank_top, RestartVector};
use crate::rng::stream_seed;
use crate::stats::{mean_estimate, Estimate};
use crate::{Error, Result};

pub const DEFAULT_MASTER_SEED: u64 = 2019;
pub const DEFAULT_REPLICATES: usize = 10;

/// Graph size used by every preset.
pub const PRESET_N: usize = 10_000;
/// Community size of the figure and table presets.
pub const PRESET_M: usize = 2000;
/// Damping factor of the score figures.
pub const FIGURE_ALPHA: f64 = 0.8;
/// Seed count for the table and conductance presets.
pub const TABLE_K: usize = 20;
/// Push rule of the table and conductance presets (the original lazy-walk push).
pub const TABLE_PUSH_RULE: PushRule = PushRule::Lazy;
/// Precision level `b` in the ACL threshold formula.
pub const ACL_B: u32 = 13;

/// Preset names and one-line descriptions.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1", "PPR vs mean field, k = 200, alpha = 0.8"),
    ("fig2", "PPR vs mean field, k = 20, alpha = 0.8"),
    ("fig3", "PPR vs mean field, k = 2, alpha = 0.8"),
    ("fig4", "mean-field gap curves and optimal alpha, m = 3000"),
    ("fig5", "mean-field gap curves and optimal alpha, m = 300"),
    (
        "table1",
        "exact PPR and APPR errors at alpha = 0.85, eps = 1e-8",
    ),
    (
        "table2",
        "exact PPR and APPR errors at alpha = 0.99, eps = 1e-7",
    ),
    (
        "small_community",
        "degree ranking vs PPR for m = 200, k = 20",
    ),
    (
        "conductance_sweep",
        "community, PPR top-m and APPR sweep conductances",
    ),
];

/// How a replicate turns a graph into a predicted community.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Ppr,
    Appr,
    Meanfield,
    DegreeRank,
}

/// An explicit experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub config: PlantedGraphConfig,
    pub alpha: f64,
    pub method: Method,
    pub replicates: usize,
    /// APPR threshold; `None` derives it from the ACL formula with `b`.
    pub eps: Option<f64>,
    pub b: u32,
    pub degree_scaling: bool,
    pub rule: PushRule,
}

impl ExperimentSpec {
    /// PPR at `alpha` on the default planted model with `k` seeds.
    pub fn standard(name: &str, k: usize, alpha: f64) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            config: PlantedGraphConfig::log_squared(PRESET_N, PRESET_M, k, DEFAULT_MASTER_SEED)?,
            alpha,
            method: Method::Ppr,
            replicates: DEFAULT_REPLICATES,
            eps: None,
            b: ACL_B,
            degree_scaling: true,
            rule: PushRule::NonLazy,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.replicates == 0 {
            return Err(Error::InvalidArgument(
                "replicates must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::OutOfRange(format!(
                "alpha = {} must lie in [0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// The JSON configuration file. Every key is optional and overrides the base spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub b: Option<u32>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub method: Option<Method>,
    pub degree_scaling: Option<bool>,
    pub lazy: Option<bool>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Applies the overrides to `base`.
    ///
    /// When `n` changes and `p`/`q` are absent they follow `p = 5 ln²n / n`, `q = 2p`.
    pub fn apply(&self, base: &ExperimentSpec) -> Result<ExperimentSpec> {
        let mut spec = base.clone();
        let c = &mut spec.config;
        if let Some(n) = self.n {
            c.n = n;
            c.p = log_squared_p(n);
            c.q = 2.0 * c.p;
        }
        c.m = self.m.unwrap_or(c.m);
        c.k = self.k.unwrap_or(c.k);
        c.p = self.p.unwrap_or(c.p);
        c.q = self.q.unwrap_or(c.q);
        c.seed = self.seed.unwrap_or(c.seed);
        spec.alpha = self.alpha.unwrap_or(spec.alpha);
        spec.eps = self.eps.or(spec.eps);
        spec.b = self.b.unwrap_or(spec.b);
        spec.replicates = self.replicates.unwrap_or(spec.replicates);
        spec.method = self.method.unwrap_or(spec.method);
        spec.degree_scaling = self.degree_scaling.unwrap_or(spec.degree_scaling);
        if let Some(lazy) = self.lazy {
            spec.rule = if lazy {
                PushRule::Lazy
            } else {
                PushRule::NonLazy
            };
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Metrics of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub preset: String,
    pub master_seed: u64,
    pub replicates: usize,
    pub rows: Vec<ReplicateRow>,
    /// Mean and standard error of every metric present in all rows.
    pub aggregates: BTreeMap<String, Estimate>,
    /// Run-level values that do not vary by replicate.
    pub scalars: BTreeMap<String, f64>,
    /// Additional text artifacts keyed by file name.
    #[serde(skip)]
    pub files: BTreeMap<String, String>,
}

impl ExperimentReport {
    pub fn from_rows(preset: &str, master_seed: u64, rows: Vec<ReplicateRow>) -> Self {
        let aggregates = aggregate(&rows);
        Self {
            preset: preset.into(),
            master_seed,
            replicates: rows.len(),
            rows,
            aggregates,
            scalars: BTreeMap::new(),
            files: BTreeMap::new(),
        }
    }

    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.aggregates.get(metric).map(|e| e.value)
    }

    /// Header `replicate,seed,<metrics...>`; values use the shortest exact decimal form.
    pub fn rows_csv(&self) -> Result<String> {
        let keys = metric_keys(&self.rows);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["replicate".to_string(), "seed".to_string()];
        header.extend(keys.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.replicate.to_string(), row.seed.to_string()];
            rec.extend(
                keys.iter()
                    .map(|k| row.metrics.get(k).map_or(String::new(), |v| v.to_string())),
            );
            w.write_record(&rec)?;
        }
        csv_string(w)
    }

    pub fn aggregate_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            preset: &'a str,
            master_seed: u64,
            replicates: usize,
            aggregates: &'a BTreeMap<String, Estimate>,
            scalars: &'a BTreeMap<String, f64>,
        }
        let summary = Summary {
            preset: &self.preset,
            master_seed: self.master_seed,
            replicates: self.replicates,
            aggregates: &self.aggregates,
            scalars: &self.scalars,
        };
        Ok(serde_json::to_string_pretty(&summary)? + "\n")
    }

    pub fn timings_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["replicate", "runtime_ms"])?;
        for row in &self.rows {
            w.write_record([row.replicate.to_string(), format!("{:.3}", row.runtime_ms)])?;
        }
        csv_string(w)
    }

    /// Writes `rows.csv`, `aggregate.json`, `timings.csv` and every extra file into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("rows.csv"), self.rows_csv()?)?;
        fs::write(dir.join("aggregate.json"), self.aggregate_json()?)?;
        fs::write(dir.join("timings.csv"), self.timings_csv()?)?;
        for (name, body) in &self.files {
            fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn metric_keys(rows: &[ReplicateRow]) -> Vec<String> {
    let mut keys: Vec<String> = rows
        .iter()
        .flat_map(|r| r.metrics.keys().cloned())
        .collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Mean and standard error per metric, over the rows that carry it, in row order.
pub fn aggregate(rows: &[ReplicateRow]) -> BTreeMap<String, Estimate> {
    metric_keys(rows)
        .into_iter()
        .filter(|k| rows.iter().all(|r| r.metrics.contains_key(k)))
        .map(|k| {
            let xs: Vec<f64> = rows.iter().map(|r| r.metrics[&k]).collect();
            (k, mean_estimate(&xs))
        })
        .collect()
}

/// Runs `body` once per replicate on its own graph, in parallel, with rows in replicate order.
fn run_replicates<F>(
    base: &PlantedGraphConfig,
    master_seed: u64,
    replicates: usize,
    body: F,
) -> Result<Vec<ReplicateRow>>
where
    F: Fn(&Graph, &PlantedGraphConfig) -> Result<BTreeMap<String, f64>> + Sync,
{
    if replicates == 0 {
        return Err(Error::InvalidArgument(
            "replicates must be at least 1".into(),
        ));
    }
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let start = Instant::now();
            let seed = stream_seed(master_seed, r as u64);
            let config = base.clone().with_seed(seed);
            let graph = sample_planted_er(&config)?;
            let metrics = body(&graph, &config)?;
            Ok(ReplicateRow {
                replicate: r,
                seed,
                metrics,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

fn metrics<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Top-`m` prediction from a dense score vector, with its error and conductance.
fn top_m_metrics(
    graph: &Graph,
    config: &PlantedGraphConfig,
    scores: &[f64],
) -> Result<(NodeSet, f64, f64)> {
    let predicted = rank_top(scores, config.m)?;
    let error = classification_error(&predicted, config);
    let phi = conductance(graph, &predicted)?;
    Ok((predicted, error, phi))
}

/// Sweep set cut back to the `m` best-ranked nodes when it is larger.
fn truncated_sweep_set(result: &SweepResult, m: usize) -> NodeSet {
    if result.best_prefix > m {
        result.prefix_set(m)
    } else {
        result.best_set()
    }
}

fn appr_eps(spec: &ExperimentSpec, graph: &Graph) -> Result<(f64, f64)> {
    match spec.eps {
        Some(eps) => Ok((spec.alpha, eps)),
        None => {
            let phi = mean_conductance_community(
                spec.config.m as f64 / spec.config.n as f64,
                spec.config.q / spec.config.p,
            );
            let params = acl_parameters(phi, graph.edge_count(), spec.b)?;
            Ok((spec.alpha, params.eps))
        }
    }
}

/// One replicate of an explicit spec.
fn spec_replicate(
    spec: &ExperimentSpec,
    graph: &Graph,
    config: &PlantedGraphConfig,
) -> Result<BTreeMap<String, f64>> {
    let scores: Vec<f64> = match spec.method {
        Method::Ppr => ppr(graph, &RestartVector::from_config(config), spec.alpha)?.values,
        Method::Meanfield => mean_field_ppr(config, spec.alpha)?.expand().values,
        Method::DegreeRank => graph.degrees().iter().map(|&d| d as f64).collect(),
        Method::Appr => {
            let (alpha, eps) = appr_eps(spec, graph)?;
            let res = appr_push(
                graph,
                &RestartVector::from_config(config),
                alpha,
                eps,
                spec.rule,
            )?;
            let entries = res.p.entries();
            let sw = sweep(graph, &entries, spec.degree_scaling, None)?;
            let cluster = truncated_sweep_set(&sw, config.m);
            return Ok(metrics([
                ("error", classification_error(&cluster, config)),
                ("best_conductance", sw.best_conductance),
                ("best_prefix", sw.best_prefix as f64),
                ("pushes", res.pushes as f64),
                ("support", entries.len() as f64),
            ]));
        }
    };
    let (_, error, phi) = top_m_metrics(graph, config, &scores)?;
    let mut out = metrics([("error", error), ("best_conductance", phi)]);
    if let Ok(mf) = mean_field_ppr(config, spec.alpha) {
        out.insert("rel_l2".into(), relative_l2(&scores, &mf.expand().values)?);
    }
    Ok(out)
}

/// Runs an explicit spec.
pub fn run_spec(spec: &ExperimentSpec, master_seed: u64) -> Result<ExperimentReport> {
    spec.validate()?;
    let rows = run_replicates(&spec.config, master_seed, spec.replicates, |g, c| {
        spec_replicate(spec, g, c)
    })?;
    Ok(ExperimentReport::from_rows(&spec.name, master_seed, rows))
}

/// Runs a registered preset and writes its outputs into `out_dir` when given.
pub fn run_preset(
    name: &str,
    replicates: usize,
    master_seed: u64,
    out_dir: Option<&Path>,
) -> Result<ExperimentReport> {
    let report = match name {
        "fig1" => run_figure(name, 200, replicates, master_seed)?,
        "fig2" => run_figure(name, 20, replicates, master_seed)?,
        "fig3" => run_figure(name, 2, replicates, master_seed)?,
        "fig4" => gap_report(name, 3000)?,
        "fig5" => gap_report(name, 300)?,
        "table1" => run_table(Table::One, replicates, master_seed)?,
        "table2" => run_table(Table::Two, replicates, master_seed)?,
        "small_community" => run_small_community(replicates, master_seed)?,
        "conductance_sweep" => run_conductance_sweep(replicates, master_seed)?,
        _ => return Err(Error::UnknownPreset(name.into())),
    };
    if let Some(dir) = out_dir {
        report.write(dir)?;
    }
    Ok(report)
}

/// PPR against its mean-field model; the first replicate is plotted.
fn run_figure(
    name: &str,
    k: usize,
    replicates: usize,
    master_seed: u64,
) -> Result<ExperimentReport> {
    let base = PlantedGraphConfig::log_squared(PRESET_N, PRESET_M, k, master_seed)?;
    let first_scores = std::sync::Mutex::new(None);
    let rows = run_replicates(&base, master_seed, replicates, |graph, config| {
        let scores = ppr(graph, &RestartVector::from_config(config), FIGURE_ALPHA)?;
        let mf = mean_field_ppr(config, FIGURE_ALPHA)?.expand();
        let (_, error, phi) = top_m_metrics(graph, config, &scores.values)?;
        let rel = relative_l2(&scores.values, &mf.values)?;
        if config.seed == stream_seed(master_seed, 0) {
            *first_scores.lock().expect("poisoned") = Some((scores.values, mf.values));
        }
        Ok(metrics([
            ("error", error),
            ("rel_l2", rel),
            ("best_conductance", phi),
        ]))
    })?;
    let mut report = ExperimentReport::from_rows(name, master_seed, rows);
    let (scores, mf) = first_scores
        .into_inner()
        .expect("poisoned")
        .expect("replicate 0 ran");
    let title = format!("PPR and mean field, k = {k}, alpha = {FIGURE_ALPHA}");
    report.files.insert(
        "scores.svg".into(),
        plot_scores(&scores, &mf, PRESET_M, &title)?,
    );
    report.scalars.insert("k".into(), k as f64);
    report.scalars.insert("alpha".into(), FIGURE_ALPHA);
    Ok(report)
}

/// SVG of a realized score vector over its mean-field step function.
pub fn plot_scores(scores: &[f64], meanfield: &[f64], m: usize, title: &str) -> Result<String> {
    if scores.len() != meanfield.len() {
        return Err(Error::InvalidShape(format!(
            "{} scores vs {} mean-field values",
            scores.len(),
            meanfield.len()
        )));
    }
    Ok(scores_plot(scores, meanfield, m, title).render())
}

/// Mean-field gap `π̄1 - π̄2` against α for two seed counts.
#[derive(Debug, Clone, PartialEq)]
pub struct GapCurves {
    pub m: usize,
    pub alphas: Vec<f64>,
    pub gap_k2: Vec<f64>,
    pub gap_k200: Vec<f64>,
    pub alpha_opt: f64,
    pub clamped: bool,
}

impl GapCurves {
    pub fn max_abs_difference(&self) -> f64 {
        self.gap_k2
            .iter()
            .zip(&self.gap_k200)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Grid point with the largest `k = 2` gap.
    pub fn grid_argmax(&self) -> f64 {
        let best = (0..self.alphas.len())
            .max_by(|&a, &b| self.gap_k2[a].total_cmp(&self.gap_k2[b]))
            .unwrap_or(0);
        self.alphas[best]
    }

    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["alpha", "gap_k2", "gap_k200"])?;
        for i in 0..self.alphas.len() {
            w.write_record([
                self.alphas[i].to_string(),
                self.gap_k2[i].to_string(),
                self.gap_k200[i].to_string(),
            ])?;
        }
        csv_string(w)
    }

    pub fn svg(&self) -> String {
        let mut plot = Plot::new(&format!("Mean-field gap, m = {}", self.m), "alpha", "gap");
        plot.x_range = (0.0, 1.0);
        for (label, color, values) in [
            ("k = 2", "#1f5fbf", &self.gap_k2),
            ("k = 200", "#d62728", &self.gap_k200),
        ] {
            plot.series.push(Series {
                label: label.into(),
                color,
                style: Style::Line,
                points: self
                    .alphas
                    .iter()
                    .copied()
                    .zip(values.iter().copied())
                    .collect(),
            });
        }
        plot.markers.push(Marker {
            x: self.alpha_opt,
            label: format!("alpha_opt = {:.4}", self.alpha_opt),
        });
        plot.fit_y_from_zero();
        plot.render()
    }
}

/// Gap curves on `α ∈ {0, 0.001, ..., 0.999}` at `n = 10⁴` with the default `p`, `q`.
///
/// Both curves come from the full mean-field solution, so their agreement is
/// a check rather than a consequence of the gap formula.
pub fn gap_curves(m: usize) -> Result<GapCurves> {
    let config_k2 = PlantedGraphConfig::log_squared(PRESET_N, m, 2, 0)?;
    let config_k200 = PlantedGraphConfig::log_squared(PRESET_N, m, 200, 0)?;
    let alphas: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
    let gap = |config: &PlantedGraphConfig| -> Result<Vec<f64>> {
        alphas
            .iter()
            .map(|&a| {
                let mf = mean_field_ppr(config, a)?;
                Ok(mf.pi1 - mf.pi2)
            })
            .collect()
    };
    let opt = optimal_alpha(ModelShape::from_config(&config_k2)?)?;
    Ok(GapCurves {
        m,
        gap_k2: gap(&config_k2)?,
        gap_k200: gap(&config_k200)?,
        alphas,
        alpha_opt: opt.alpha,
        clamped: opt.clamped,
    })
}

/// Writes `gap_m<m>.csv` and `gap_m<m>.svg` into `out`.
pub fn plot_gap_curves(m: usize, out: &Path) -> Result<GapCurves> {
    let curves = gap_curves(m)?;
    fs::create_dir_all(out)?;
    fs::write(out.join(format!("gap_m{m}.csv")), curves.csv()?)?;
    fs::write(out.join(format!("gap_m{m}.svg")), curves.svg())?;
    Ok(curves)
}

fn gap_report(name: &str, m: usize) -> Result<ExperimentReport> {
    let curves = gap_curves(m)?;
    let mut report = ExperimentReport::from_rows(name, 0, Vec::new());
    report.scalars.insert("m".into(), m as f64);
    report.scalars.insert("alpha_opt".into(), curves.alpha_opt);
    report
        .scalars
        .insert("grid_argmax".into(), curves.grid_argmax());
    report.scalars.insert(
        "curves_max_abs_difference".into(),
        curves.max_abs_difference(),
    );
    report.files.insert("gap.csv".into(), curves.csv()?);
    report.files.insert("gap.svg".into(), curves.svg());
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    One,
    Two,
}

impl Table {
    /// `(alpha, eps)` of the table.
    pub fn parameters(self) -> (f64, f64) {
        match self {
            Table::One => (0.85, 1e-8),
            Table::Two => (0.99, 1e-7),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Table::One => "table1",
            Table::Two => "table2",
        }
    }
}

/// Exact PPR top-`m` error and APPR sweep errors with and without degree scaling.
///
/// One push run per replicate feeds both sweeps. Emits `table.csv` with
/// the replicate means laid out as two rows by three columns.
pub fn run_table(which: Table, replicates: usize, master_seed: u64) -> Result<ExperimentReport> {
    run_table_with_seeds(which, TABLE_K, TABLE_PUSH_RULE, replicates, master_seed)
}

/// [`run_table`] with `k` seeds and an explicit push rule.
pub fn run_table_with_seeds(
    which: Table,
    k: usize,
    rule: PushRule,
    replicates: usize,
    master_seed: u64,
) -> Result<ExperimentReport> {
    let (alpha, eps) = which.parameters();
    let base = PlantedGraphConfig::log_squared(PRESET_N, PRESET_M, k, master_seed)?;
    let rows = run_replicates(&base, master_seed, replicates, |graph, config| {
        let seeds = RestartVector::from_config(config);
        let exact = ppr(graph, &seeds, alpha)?;
        let (_, ppr_error, _) = top_m_metrics(graph, config, &exact.values)?;
        let res = appr_push(graph, &seeds, alpha, eps, rule)?;
        let entries = res.p.entries();
        let plain = sweep(graph, &entries, false, None)?;
        let scaled = sweep(graph, &entries, true, None)?;
        Ok(metrics([
            ("ppr_error", ppr_error),
            (
                "appr_error",
                classification_error(&truncated_sweep_set(&plain, config.m), config),
            ),
            (
                "appr_scaled_error",
                classification_error(&truncated_sweep_set(&scaled, config.m), config),
            ),
            ("appr_best_prefix", plain.best_prefix as f64),
            ("appr_scaled_best_prefix", scaled.best_prefix as f64),
            ("pushes", res.pushes as f64),
            ("support", entries.len() as f64),
        ]))
    })?;
    let mut report = ExperimentReport::from_rows(which.name(), master_seed, rows);
    report.scalars.insert("alpha".into(), alpha);
    report.scalars.insert("eps".into(), eps);
    report.scalars.insert("k".into(), k as f64);
    let table = table_csv(&report, alpha, eps)?;
    report.files.insert("table.csv".into(), table);
    Ok(report)
}

fn table_csv(report: &ExperimentReport, alpha: f64, eps: f64) -> Result<String> {
    let cell = |k: &str| {
        report
            .mean(k)
            .map_or("-".to_string(), |v| format!("{v:.4}"))
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        format!("alpha={alpha} eps={eps:e}"),
        "without degree scaling".into(),
        "with degree scaling".into(),
    ])?;
    w.write_record(["PPR".to_string(), cell("ppr_error"), "-".to_string()])?;
    w.write_record([
        "APPR".to_string(),
        cell("appr_error"),
        cell("appr_scaled_error"),
    ])?;
    csv_string(w)
}

/// Small-community parameters: `m = 200`, `k = 20`, PPR at α = 0.7.
pub const SMALL_M: usize = 200;
pub const SMALL_K: usize = 20;
pub const SMALL_ALPHA: f64 = 0.7;

/// Degree ranking, the random-guess baseline `1 - m/n`, and PPR on a small community.
pub fn run_small_community(replicates: usize, master_seed: u64) -> Result<ExperimentReport> {
    let base = PlantedGraphConfig::log_squared(PRESET_N, SMALL_M, SMALL_K, master_seed)?;
    let rows = run_replicates(&base, master_seed, replicates, |graph, config| {
        let degrees: Vec<f64> = graph.degrees().iter().map(|&d| d as f64).collect();
        let (_, degree_error, _) = top_m_metrics(graph, config, &degrees)?;
        let scores = ppr(graph, &RestartVector::from_config(config), SMALL_ALPHA)?;
        let (_, ppr_error, _) = top_m_metrics(graph, config, &scores.values)?;
        Ok(metrics([
            ("degree_error", degree_error),
            ("ppr_error", ppr_error),
        ]))
    })?;
    let mut report = ExperimentReport::from_rows("small_community", master_seed, rows);
    report.scalars.insert(
        "baseline_error".into(),
        1.0 - SMALL_M as f64 / PRESET_N as f64,
    );
    Ok(report)
}

/// Conductance of the planted community, of the exact PPR top-`m` set, and
/// of the APPR sweep set before and after truncation to `m`.
///
/// Uses the second table's settings (α = 0.99, ε = 10⁻⁷) and sweeps both
/// with (`appr_scaled_*`) and without (`appr_*`) degree scaling.
pub fn run_conductance_sweep(replicates: usize, master_seed: u64) -> Result<ExperimentReport> {
    run_conductance_sweep_with_seeds(TABLE_K, replicates, master_seed)
}

/// [`run_conductance_sweep`] with `k` seeds.
pub fn run_conductance_sweep_with_seeds(
    k: usize,
    replicates: usize,
    master_seed: u64,
) -> Result<ExperimentReport> {
    let (alpha, eps) = Table::Two.parameters();
    let base = PlantedGraphConfig::log_squared(PRESET_N, PRESET_M, k, master_seed)?;
    let rows = run_replicates(&base, master_seed, replicates, |graph, config| {
        let seeds = RestartVector::from_config(config);
        let community = conductance(graph, &config.community())?;
        let exact = ppr(graph, &seeds, alpha)?;
        let (_, _, ppr_phi) = top_m_metrics(graph, config, &exact.values)?;
        let res = appr_push(graph, &seeds, alpha, eps, TABLE_PUSH_RULE)?;
        let entries = res.p.entries();
        let mut out = metrics([
            ("community_conductance", community),
            ("ppr_top_m_conductance", ppr_phi),
        ]);
        for (prefix, scaling) in [("appr", false), ("appr_scaled", true)] {
            let sw = sweep(graph, &entries, scaling, None)?;
            let truncated = conductance(graph, &sw.prefix_set(sw.best_prefix.min(config.m)))?;
            out.insert(format!("{prefix}_best_conductance"), sw.best_conductance);
            out.insert(format!("{prefix}_best_size"), sw.best_prefix as f64);
            out.insert(format!("{prefix}_truncated_conductance"), truncated);
        }
        Ok(out)
    })?;
    let mut report = ExperimentReport::from_rows("conductance_sweep", master_seed, rows);
    let kappa = PRESET_M as f64 / PRESET_N as f64;
    report.scalars.insert(
        "mean_field_community_conductance".into(),
        mean_conductance_community(kappa, 2.0),
    );
    Ok(report)
}
