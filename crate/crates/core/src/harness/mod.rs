//! Experiment driver: trials over a stream, ground truth, MAPE, CSV output.

mod config;
mod validate;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

pub use config::{load_config, parse_config};
pub use validate::{
    builtin_fixtures, ts4c2_case_fixtures, validate_prob, Fixture, Kernel, PathReport,
    ValidationReport,
};

use crate::error::{Error, Result};
use crate::estimators::{build_estimator, EstimatorSpec};
use crate::oracle::{compute_mape, ExactGraph};
use crate::stream::{read_stream, RngHandle, StreamOrder, VertexId};
use crate::synth::{generate_ba, BaConfig};

pub const THREADS_ENV: &str = "MOTIFSTREAM_THREADS";

#[derive(Clone, Debug, PartialEq)]
pub enum StreamSpec {
    File {
        path: PathBuf,
        order: StreamOrder,
    },
    /// Generated stream in creation order, or a seeded permutation of it.
    Ba {
        config: BaConfig,
        shuffle: Option<u64>,
    },
}

impl StreamSpec {
    pub fn load(&self) -> Result<Vec<(VertexId, VertexId)>> {
        Ok(match self {
            StreamSpec::File { path, order } => read_stream(path, *order)?
                .into_iter()
                .map(|e| (e.u, e.v))
                .collect(),
            StreamSpec::Ba { config, shuffle } => {
                let mut e: Vec<_> = generate_ba(config)?
                    .into_iter()
                    .map(|(a, b)| (VertexId(a), VertexId(b)))
                    .collect();
                if let Some(seed) = shuffle {
                    RngHandle::new(*seed).shuffle(&mut e);
                }
                e
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: StreamSpec,
    pub estimator: EstimatorSpec,
    pub trials: u32,
    pub base_seed: u64,
    pub stride: u64,
    pub ground_truth: bool,
    pub parallel: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub t: u64,
    pub estimate: f64,
    pub truth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialSeries {
    pub rows: Vec<SeriesRow>,
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub trial: u32,
    pub seed: u64,
    pub series: TrialSeries,
    pub final_estimate: f64,
    pub mape: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentSummary {
    pub trials: Vec<TrialResult>,
    pub edges: u64,
    pub final_truth: Option<u64>,
    pub mean_mape: Option<f64>,
    pub mean_final: f64,
    pub var_final: f64,
    /// Wall-clock seconds per processed edge, averaged over trials.
    pub seconds_per_edge: f64,
}

/// Steps recorded in the time series: multiples of `stride` and the last.
pub fn grid(n: u64, stride: u64) -> Vec<u64> {
    let stride = stride.max(1);
    let mut g: Vec<u64> = (1..=n / stride).map(|i| i * stride).collect();
    if n > 0 && g.last() != Some(&n) {
        g.push(n);
    }
    g
}

/// Exact clique counts (of size `k`) at every grid step.
pub fn ground_truth(edges: &[(VertexId, VertexId)], steps: &[u64], k: usize) -> Result<Vec<u64>> {
    let mut g = ExactGraph::new();
    let mut out = Vec::with_capacity(steps.len());
    let mut next = steps.iter().peekable();
    for (i, &(u, v)) in edges.iter().enumerate() {
        g.insert_edge(u, v)?;
        if next.peek() == Some(&&(i as u64 + 1)) {
            next.next();
            out.push(g.counts().cliques(k));
        }
    }
    Ok(out)
}

fn run_trial(
    cfg: &ExperimentConfig,
    edges: &[(VertexId, VertexId)],
    steps: &[u64],
    truth: Option<&[u64]>,
    trial: u32,
) -> Result<TrialResult> {
    let seed = cfg.base_seed.wrapping_add(trial as u64);
    let mut est = build_estimator(&cfg.estimator, seed)?;
    let mut rows = Vec::with_capacity(steps.len());
    let mut next = 0;
    let start = Instant::now();
    for (i, &(u, v)) in edges.iter().enumerate() {
        let k = est.process_edge(u, v);
        if next < steps.len() && steps[next] == i as u64 + 1 {
            rows.push(SeriesRow {
                t: steps[next],
                estimate: k,
                truth: truth.map(|tr| tr[next] as f64),
            });
            next += 1;
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let mape = match truth {
        Some(_) => {
            let e: Vec<f64> = rows.iter().map(|r| r.estimate).collect();
            let t: Vec<f64> = rows.iter().map(|r| r.truth.unwrap()).collect();
            compute_mape(&e, &t).ok()
        }
        None => None,
    };
    Ok(TrialResult {
        trial,
        seed,
        final_estimate: est.estimate(),
        series: TrialSeries { rows },
        mape,
        seconds,
    })
}

/// Thread cap from `MOTIFSTREAM_THREADS`, if set.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .parse()
        .ok()
        .filter(|&n: &usize| n > 0)
}

pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExperimentSummary> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    build_estimator(&cfg.estimator, 0)?;
    let edges = cfg.source.load()?;
    let steps = grid(edges.len() as u64, cfg.stride);
    let truth = if cfg.ground_truth {
        Some(ground_truth(
            &edges,
            &steps,
            cfg.estimator.kind.clique_size(),
        )?)
    } else {
        None
    };
    let one = |i: u32| run_trial(cfg, &edges, &steps, truth.as_deref(), i);
    let trials: Vec<TrialResult> = if cfg.parallel {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap() {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(one)
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        (0..cfg.trials).map(one).collect::<Result<Vec<_>>>()?
    };

    let n = trials.len() as f64;
    let mean_final = trials.iter().map(|t| t.final_estimate).sum::<f64>() / n;
    let var_final = if trials.len() > 1 {
        trials
            .iter()
            .map(|t| (t.final_estimate - mean_final).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let mapes: Vec<f64> = trials.iter().filter_map(|t| t.mape).collect();
    let mean_mape =
        (!mapes.is_empty() && mapes.len() == trials.len()).then(|| mapes.iter().sum::<f64>() / n);
    let seconds_per_edge = if edges.is_empty() {
        0.0
    } else {
        trials.iter().map(|t| t.seconds).sum::<f64>() / n / edges.len() as f64
    };
    let summary = ExperimentSummary {
        edges: edges.len() as u64,
        final_truth: truth.as_ref().and_then(|t| t.last().copied()),
        trials,
        mean_mape,
        mean_final,
        var_final,
        seconds_per_edge,
    };
    if let Some(dir) = out_dir {
        write_outputs(&summary, dir)?;
    }
    Ok(summary)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Per-trial series, `summary.csv` and `aggregate.csv`. Timing is left out so
/// the files depend only on inputs and seeds.
pub fn write_outputs(s: &ExperimentSummary, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for t in &s.trials {
        let mut w = csv::Writer::from_path(dir.join(format!("trial_{:03}.csv", t.trial)))?;
        let with_truth = t.series.rows.first().is_some_and(|r| r.truth.is_some());
        if with_truth {
            w.write_record(["t", "estimate", "truth"])?;
        } else {
            w.write_record(["t", "estimate"])?;
        }
        for r in &t.series.rows {
            let mut rec = vec![r.t.to_string(), r.estimate.to_string()];
            if with_truth {
                rec.push(fmt_opt(r.truth));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(["trial", "seed", "final_estimate", "mape"])?;
    for t in &s.trials {
        w.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            t.final_estimate.to_string(),
            fmt_opt(t.mape),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("aggregate.csv"))?;
    w.write_record(["key", "value"])?;
    let rows = [
        ("trials", s.trials.len().to_string()),
        ("edges", s.edges.to_string()),
        (
            "final_truth",
            s.final_truth.map(|x| x.to_string()).unwrap_or_default(),
        ),
        ("mean_mape", fmt_opt(s.mean_mape)),
        ("mean_final_estimate", s.mean_final.to_string()),
        ("var_final_estimate", s.var_final.to_string()),
    ];
    for (k, v) in rows {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// MAPE of a series CSV with `estimate` and `truth` columns.
pub fn mape_from_csv(series: &Path, truth: Option<&Path>) -> Result<f64> {
    fn column(path: &Path, name: &str) -> Result<Vec<f64>> {
        let mut r = csv::Reader::from_path(path)?;
        let idx = r
            .headers()?
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: no column {name:?}", path.display())))?;
        let mut out = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let v = rec[idx].parse::<f64>().map_err(|_| {
                Error::Config(format!("{}: bad number {:?}", path.display(), &rec[idx]))
            })?;
            out.push(v);
        }
        Ok(out)
    }
    let est = column(series, "estimate")?;
    let tru = match truth {
        Some(p) => column(p, "truth")?,
        None => column(series, "truth")?,
    };
    Ok(compute_mape(&est, &tru)?)
}
