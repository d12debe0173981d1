//! Experiment drivers. Every experiment produces a report with a row table
//! (also written as CSV) and a summary object.

use super::data::{builtin, load_csv, LabelColumn, LabelMapping};
use super::leakage::{leakage_analysis, DEFAULT_PAIR_SAMPLE};
use super::synth::gen_synthetic;
use super::HarnessError;
use crate::boost::cv::{accuracy, cv_folds, FoldEval, DEFAULT_CV_SEED};
use crate::boost::rlc::INTERCEPT_RANGE;
use crate::boost::{boost_ds, boost_lmc, boost_rlc, InvalidPolicy, RlcOptions};
use crate::dataset::Dataset;
use crate::encoding::{fold_labels, max_abs, standardize, FixedPointParams};
use crate::protocol::{run_learning, transcript_report, Construction, ProtocolConfig, TransportKind};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    CvAccuracy,
    Convergence,
    PrecisionSweep,
    CostScaling,
    Leakage,
    BaselineCompare,
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(Value::String(s.to_ascii_uppercase().replace('-', "_")))
            .map_err(|_| format!("unknown experiment {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Rlc,
    Ds,
    Lmc,
}

impl std::str::FromStr for BaseKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rlc" => Ok(BaseKind::Rlc),
            "ds" => Ok(BaseKind::Ds),
            "lmc" => Ok(BaseKind::Lmc),
            _ => Err(format!("unknown base learner {s:?} (rlc, ds or lmc)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DatasetRef {
    Builtin { name: String },
    Csv {
        path: PathBuf,
        /// "last", a 0-based index or a header name.
        label: String,
        positive: Option<String>,
    },
    Synthetic { n: usize, k: usize, seed: u64 },
}

impl DatasetRef {
    /// A bundled name, "synthetic" (desk-scale 10^4 x 10), or a CSV path
    /// with the label in the last column.
    pub fn parse(s: &str) -> Self {
        if super::data::BUILTIN.contains(&s) {
            DatasetRef::Builtin { name: s.into() }
        } else if s == "synthetic" {
            DatasetRef::Synthetic {
                n: 10_000,
                k: 10,
                seed: 7,
            }
        } else {
            DatasetRef::Csv {
                path: s.into(),
                label: "last".into(),
                positive: None,
            }
        }
    }

    pub fn load(&self) -> Result<Dataset, HarnessError> {
        match self {
            DatasetRef::Builtin { name } => builtin(name),
            DatasetRef::Csv {
                path,
                label,
                positive,
            } => load_csv(
                path,
                &label.parse::<LabelColumn>().expect("infallible"),
                &LabelMapping {
                    positive: positive.clone(),
                },
            ),
            DatasetRef::Synthetic { n, k, seed } => gen_synthetic(*n, *k, *seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub dataset: DatasetRef,
    pub base: BaseKind,
    /// Boosting rounds (accepted classifiers for RLC).
    pub tau: usize,
    /// RLC tries; None means 2 tau.
    pub p_max: Option<usize>,
    pub policy: InvalidPolicy,
    pub folds: usize,
    /// CV split seed.
    pub seed: u64,
    /// RLC pool seed.
    pub rlc_seed: u64,
    /// CONVERGENCE checkpoints.
    pub taus: Vec<usize>,
    /// PRECISION_SWEEP fractional bit counts.
    pub bits: Vec<u32>,
    /// COST_SCALING record counts.
    pub sizes: Vec<usize>,
    /// COST_SCALING feature counts; empty keeps all features.
    pub dims: Vec<usize>,
    pub constructions: Vec<Construction>,
    /// Protocol settings for COST_SCALING (tau and p_max are overridden).
    pub protocol: ProtocolConfig,
    /// LEAKAGE: number of classifiers in the characterization vectors.
    pub leakage_p: usize,
    pub pair_sample: usize,
    /// Written as `<output>.json` and `<output>.csv` when set.
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, dataset: DatasetRef) -> Self {
        Self {
            kind,
            dataset,
            base: BaseKind::Rlc,
            tau: 200,
            p_max: None,
            policy: InvalidPolicy::default(),
            folds: 10,
            seed: DEFAULT_CV_SEED,
            rlc_seed: 1,
            taus: vec![10, 25, 50, 100, 150, 200],
            bits: vec![3, 5, 7, 9, 11],
            sizes: vec![50, 100, 200, 400],
            dims: Vec::new(),
            constructions: vec![Construction::HeGc, Construction::SecShGc],
            protocol: ProtocolConfig::new(Construction::HeGc, 2),
            leakage_p: 200,
            pair_sample: DEFAULT_PAIR_SAMPLE,
            output: None,
        }
    }

    fn p_max(&self, tau: usize) -> usize {
        self.p_max.unwrap_or(2 * tau)
    }

    fn rlc_options(&self, tau: usize) -> RlcOptions {
        let mut o = RlcOptions::new(tau);
        o.p_max = self.p_max(tau).max(tau);
        o.policy = self.policy;
        o
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub dataset: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub params: Value,
    pub rows: Vec<Map<String, Value>>,
    pub summary: Value,
}

fn row(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("rows are built from json objects"),
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n.max(1.0);
    let s = if xs.len() > 1 {
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (m, s)
}

/// Slope, intercept and R^2 of a least-squares line.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if sxx > 0.0 && syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, my - slope * mx, r2)
}

/// RLC boosting with the fold's p_used recorded.
fn rlc_folds(
    data: &Dataset,
    spec: &ExperimentSpec,
    opts: &RlcOptions,
    quantize_bits: Option<u32>,
) -> Result<(Vec<FoldEval>, Vec<usize>), HarnessError> {
    let mut used = Vec::new();
    let evals = cv_folds(data, spec.folds, spec.seed, |s| {
        let z = fold_labels(s.x, s.y)?;
        let mut o = *opts;
        if let Some(b) = quantize_bits {
            o.quantize = Some(FixedPointParams::for_products(
                b,
                z.cols(),
                max_abs(&z),
                INTERCEPT_RANGE,
            )?);
        }
        let out = boost_rlc(&z, &o, spec.rlc_seed)?;
        used.push(out.p_used);
        Ok(out.model)
    })?;
    Ok((evals, used))
}

fn fold_accuracies(evals: &[FoldEval]) -> Vec<f64> {
    evals
        .iter()
        .map(|e| accuracy(&e.model, &e.x_test, &e.y_test))
        .collect()
}

fn base_cv(data: &Dataset, spec: &ExperimentSpec, base: BaseKind) -> Result<(Vec<f64>, Vec<usize>), HarnessError> {
    Ok(match base {
        BaseKind::Rlc => {
            let (e, used) = rlc_folds(data, spec, &spec.rlc_options(spec.tau), None)?;
            (fold_accuracies(&e), used)
        }
        BaseKind::Ds => {
            let e = cv_folds(data, spec.folds, spec.seed, |s| boost_ds(s.x, s.y, spec.tau))?;
            (fold_accuracies(&e), Vec::new())
        }
        BaseKind::Lmc => {
            let e = cv_folds(data, spec.folds, spec.seed, |s| boost_lmc(s.x, s.y, spec.tau))?;
            (fold_accuracies(&e), Vec::new())
        }
    })
}

fn cv_accuracy_exp(data: &Dataset, spec: &ExperimentSpec) -> Result<(Vec<Map<String, Value>>, Value), HarnessError> {
    let (accs, used) = base_cv(data, spec, spec.base)?;
    let rows = accs
        .iter()
        .enumerate()
        .map(|(f, a)| {
            row(json!({
                "fold": f,
                "accuracy": a,
                "p_used": used.get(f).copied(),
            }))
        })
        .collect();
    let (m, s) = mean_std(&accs);
    let p_mean = if used.is_empty() {
        Value::Null
    } else {
        json!(used.iter().sum::<usize>() as f64 / used.len() as f64)
    };
    let ratio = p_mean.as_f64().map(|p| p / spec.tau as f64);
    Ok((
        rows,
        json!({"mean": m, "std": s, "p_used_mean": p_mean, "p_over_tau": ratio}),
    ))
}

fn convergence_exp(data: &Dataset, spec: &ExperimentSpec) -> Result<(Vec<Map<String, Value>>, Value), HarnessError> {
    let top = spec.taus.iter().copied().max().unwrap_or(spec.tau);
    let (evals, _) = rlc_folds(data, spec, &spec.rlc_options(top), None)?;
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for &t in &spec.taus {
        let accs: Vec<f64> = evals
            .iter()
            .map(|e| {
                let hits = e
                    .x_test
                    .iter_rows()
                    .zip(&e.y_test)
                    .filter(|(r, &y)| (if e.model.score_prefix(r, t) > 0.0 { 1 } else { -1 }) == y)
                    .count();
                hits as f64 / e.y_test.len().max(1) as f64
            })
            .collect();
        let (m, s) = mean_std(&accs);
        curve.push(m);
        rows.push(row(json!({"tau": t, "mean": m, "std": s})));
    }
    // Plateau: accuracy gain over the second half of the checkpoints.
    let half = curve.len() / 2;
    let gain = curve.last().copied().unwrap_or(0.0) - curve.get(half).copied().unwrap_or(0.0);
    Ok((rows, json!({"final": curve.last(), "late_gain": gain})))
}

fn precision_exp(data: &Dataset, spec: &ExperimentSpec) -> Result<(Vec<Map<String, Value>>, Value), HarnessError> {
    let opts = spec.rlc_options(spec.tau);
    let (real, _) = rlc_folds(data, spec, &opts, None)?;
    let (rm, rs) = mean_std(&fold_accuracies(&real));
    let mut rows = vec![row(json!({"bits": Value::Null, "mean": rm, "std": rs, "delta": 0.0}))];
    for &b in &spec.bits {
        let (e, _) = rlc_folds(data, spec, &opts, Some(b))?;
        let (m, s) = mean_std(&fold_accuracies(&e));
        rows.push(row(json!({"bits": b, "mean": m, "std": s, "delta": m - rm})));
    }
    Ok((rows, json!({"real_mean": rm, "real_std": rs})))
}

fn cost_exp(data: &Dataset, spec: &ExperimentSpec) -> Result<(Vec<Map<String, Value>>, Value), HarnessError> {
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(spec.seed));
    let dims = if spec.dims.is_empty() {
        vec![data.k()]
    } else {
        spec.dims.clone()
    };
    let mut rows = Vec::new();
    let mut summary = Map::new();
    for &c in &spec.constructions {
        for &k in &dims {
            let mut ns = Vec::new();
            let mut gc = Vec::new();
            let mut hom = Vec::new();
            for &n in &spec.sizes {
                if n > data.n() || k > data.k() {
                    return Err(HarnessError::Config(format!(
                        "cost point n={n} k={k} exceeds the dataset ({}x{})",
                        data.n(),
                        data.k()
                    )));
                }
                let cols: Vec<usize> = (0..k).collect();
                let sub = data.subset(&order[..n]);
                let (x, _) = standardize(&sub.features.select_cols(&cols))?;
                let z = fold_labels(&x, &sub.labels)?;
                let mut cfg = spec.protocol.clone();
                cfg.construction = c;
                // Equal tau and p_max fix the iteration count.
                cfg.p_max = cfg.tau;
                let start = Instant::now();
                let out = run_learning(&cfg, &z, TransportKind::InProcess)?;
                let ms = start.elapsed().as_secs_f64() * 1e3;
                let r = transcript_report(&out.transcript);
                ns.push(n as f64);
                gc.push(r.gc_bytes as f64);
                hom.push(r.cloud.hom_ops() as f64);
                rows.push(row(json!({
                    "construction": c.name(),
                    "n": n,
                    "k": x.cols(),
                    "ring_bits": r.ring_bits,
                    "iterations": r.iterations,
                    "cloud_hom_ops": r.cloud.hom_ops(),
                    "cloud_encryptions": r.cloud.encryptions,
                    "cloud_decryptions": r.cloud.decryptions,
                    "csp_hom_ops": r.csp.hom_ops(),
                    "csp_encryptions": r.csp.encryptions,
                    "csp_decryptions": r.csp.decryptions,
                    "and_gates": r.csp.and_gates_garbled,
                    "ots": r.cloud.ot_received,
                    "gc_bytes": r.gc_bytes,
                    "total_bytes": r.bytes_cloud_to_csp + r.bytes_csp_to_cloud,
                    "elapsed_ms": ms,
                })));
            }
            let (_, _, r2_gc) = linear_fit(&ns, &gc);
            let (_, _, r2_hom) = linear_fit(&ns, &hom);
            summary.insert(
                format!("{}_k{}", c.name(), k),
                json!({"gc_bytes_r2": r2_gc, "cloud_hom_ops_r2": r2_hom}),
            );
        }
    }
    Ok((rows, Value::Object(summary)))
}

fn leakage_exp(data: &Dataset, spec: &ExperimentSpec) -> Result<(Vec<Map<String, Value>>, Value), HarnessError> {
    let rep = leakage_analysis(data, spec.leakage_p, spec.rlc_seed, spec.pair_sample)?;
    let rows = rep
        .buckets
        .iter()
        .map(|b| row(serde_json::to_value(b).expect("bucket serializes")))
        .collect();
    let quarter = (spec.leakage_p / 4).max(1);
    let near: Vec<f64> = (1..=quarter).filter_map(|d| rep.separation(d)).collect();
    Ok((
        rows,
        json!({
            "global_mean": rep.global_mean,
            "global_std": rep.global_std,
            "sampled_pairs": rep.sampled_pairs,
            "exhaustive": rep.exhaustive,
            "identical_separation": rep.separation(0),
            "identical_pairs": rep.bucket(0).map_or(0, |b| b.pairs),
            "max_separation_up_to_quarter": near.iter().copied().fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v)))),
        }),
    ))
}

fn baseline_exp(data: &Dataset, spec: &ExperimentSpec) -> Result<(Vec<Map<String, Value>>, Value), HarnessError> {
    let mut rows = Vec::new();
    let mut summary = Map::new();
    for base in [BaseKind::Rlc, BaseKind::Ds, BaseKind::Lmc] {
        let (accs, _) = base_cv(data, spec, base)?;
        let (m, s) = mean_std(&accs);
        rows.push(row(json!({"base": base, "rounds": spec.tau, "mean": m, "std": s})));
        summary.insert(format!("{base:?}").to_lowercase(), json!(m));
    }
    Ok((rows, Value::Object(summary)))
}

/// Runs one experiment, writing `<output>.json` / `.csv` if requested.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    let data = spec.dataset.load()?;
    let (rows, summary) = match spec.kind {
        ExperimentKind::CvAccuracy => cv_accuracy_exp(&data, spec)?,
        ExperimentKind::Convergence => convergence_exp(&data, spec)?,
        ExperimentKind::PrecisionSweep => precision_exp(&data, spec)?,
        ExperimentKind::CostScaling => cost_exp(&data, spec)?,
        ExperimentKind::Leakage => leakage_exp(&data, spec)?,
        ExperimentKind::BaselineCompare => baseline_exp(&data, spec)?,
    };
    let mut params = serde_json::to_value(spec).expect("spec serializes");
    if let Value::Object(m) = &mut params {
        m.remove("output");
    }
    let report = ExperimentReport {
        kind: spec.kind,
        dataset: data.name.clone(),
        n: data.n(),
        k: data.k(),
        seed: spec.seed,
        params,
        rows,
        summary,
    };
    if let Some(out) = &spec.output {
        write_report(&report, out)?;
    }
    Ok(report)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `<prefix>.json` and `<prefix>.csv` (columns from the first row).
pub fn write_report(r: &ExperimentReport, prefix: &Path) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", prefix.display()));
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let json = serde_json::to_string_pretty(r).expect("report serializes");
    std::fs::write(prefix.with_extension("json"), json + "\n").map_err(io)?;
    let mut w = csv::Writer::from_path(prefix.with_extension("csv"))
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    if let Some(first) = r.rows.first() {
        let cols: Vec<&String> = first.keys().collect();
        w.write_record(cols.iter().map(|c| c.as_str()))
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        for row in &r.rows {
            w.write_record(cols.iter().map(|c| row.get(*c).map(cell).unwrap_or_default()))
                .map_err(|e| HarnessError::Io(e.to_string()))?;
        }
    }
    w.flush().map_err(io)
}

/// Drops wall-clock fields so reports can be compared byte for byte.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.retain(|k, _| !k.starts_with("elapsed"));
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
