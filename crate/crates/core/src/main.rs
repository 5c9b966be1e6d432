use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use motifstream::harness::{
    builtin_fixtures, load_config, mape_from_csv, run_experiment, validate_prob, ExperimentConfig,
    StreamSpec,
};
use motifstream::oracle::{count_overlap_pairs, ExactGraph};
use motifstream::stream::{dedup_stream, read_stream, StreamOrder};
use motifstream::synth::{write_ba, BaConfig};
use motifstream::{Error, EstimatorKind, EstimatorSpec, Result};

#[derive(Parser)]
#[command(
    name = "motifstream",
    version,
    about = "Streaming 4-clique and 5-clique count estimation"
)]
struct Cli {
    /// Base seed; trial i uses seed + i.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Record every STRIDE-th step (the last step is always recorded).
    #[arg(long, global = true)]
    stride: Option<u64>,
    /// key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a Barabási–Albert edge stream.
    Generate {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Drop duplicate edges, keeping first occurrences.
    Dedup {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Exact triangle, 4-clique and 5-clique counts.
    Exact {
        #[arg(long)]
        input: PathBuf,
        /// Also count 4-clique pairs sharing one or three edges.
        #[arg(long)]
        overlaps: bool,
    },
    /// Run estimator trials and write CSV series.
    Run {
        #[arg(long)]
        estimator: Option<String>,
        #[arg(long)]
        memory: Option<u64>,
        /// Edge share of memory for two-tier estimators.
        #[arg(long)]
        edge_fraction: Option<f64>,
        #[arg(long)]
        trials: Option<u32>,
        /// Edge list; use --ba-n/--ba-m for a generated stream instead.
        #[arg(long)]
        input: Option<PathBuf>,
        /// file, timestamp or shuffle
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        ba_n: Option<u64>,
        #[arg(long)]
        ba_m: Option<u64>,
        #[arg(long)]
        ba_seed: Option<u64>,
        #[arg(long)]
        no_truth: bool,
        /// Run trials on a thread pool (capped by MOTIFSTREAM_THREADS).
        #[arg(long)]
        parallel: bool,
    },
    /// MAPE of an estimate series against ground truth.
    Mape {
        #[arg(long)]
        input: PathBuf,
        /// Series with a `truth` column; defaults to the input itself.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Monte-Carlo check of the detection probability formulas.
    ValidateProb {
        /// Fixture name; all built-in fixtures when omitted.
        #[arg(long)]
        fixture: Vec<String>,
        #[arg(long, default_value_t = 1_000_000)]
        runs: u64,
        #[arg(long)]
        list: bool,
    },
}

struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad value for {key}: {s:?}"))),
        }
    }

    fn flag(&self, set: bool, key: &str) -> Result<bool> {
        Ok(set || self.get::<bool>(None, key)?.unwrap_or(false))
    }
}

fn parse_order(s: &str, seed: u64) -> Result<StreamOrder> {
    match s {
        "file" => Ok(StreamOrder::File),
        "timestamp" => Ok(StreamOrder::Timestamp),
        "shuffle" => Ok(StreamOrder::Shuffle(seed)),
        _ => Err(Error::Config(format!("unknown order {s:?}"))),
    }
}

fn real_main(cli: Cli) -> Result<bool> {
    let cfg = Settings {
        file: cli
            .config
            .as_deref()
            .map(load_config)
            .transpose()?
            .unwrap_or_default(),
    };
    let seed = cfg.get(cli.seed, "seed")?.unwrap_or(1);
    let out_dir: PathBuf = cfg
        .get(cli.out_dir, "out-dir")?
        .unwrap_or_else(|| "out".into());
    let stride = cfg.get(cli.stride, "stride")?.unwrap_or(100);

    match cli.cmd {
        Cmd::Generate { n, m, output } => {
            let n = cfg
                .get(n, "n")?
                .ok_or_else(|| Error::Config("--n is required".into()))?;
            let m = cfg
                .get(m, "m")?
                .ok_or_else(|| Error::Config("--m is required".into()))?;
            let path = match cfg.get(output, "output")? {
                Some(p) => p,
                None => {
                    std::fs::create_dir_all(&out_dir)?;
                    out_dir.join(format!("ba_n{n}_m{m}_s{seed}.txt"))
                }
            };
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            let edges = write_ba(&BaConfig { n, m, seed }, &path)?;
            println!("edges={edges} path={}", path.display());
        }
        Cmd::Dedup { input, output } => {
            let removed = dedup_stream(&input, &output)?;
            println!("removed={removed}");
        }
        Cmd::Exact { input, overlaps } => {
            let mut g = ExactGraph::new();
            for e in read_stream(&input, StreamOrder::File)? {
                g.insert_edge(e.u, e.v)?;
            }
            let c = g.counts();
            println!(
                "triangles={} cliques4={} cliques5={}",
                c.triangles, c.cliques4, c.cliques5
            );
            if overlaps {
                let o = count_overlap_pairs(&g)?;
                println!(
                    "pairs_one_shared_edge={} pairs_three_shared_edges={}",
                    o.a, o.b
                );
            }
        }
        Cmd::Run {
            estimator,
            memory,
            edge_fraction,
            trials,
            input,
            order,
            ba_n,
            ba_m,
            ba_seed,
            no_truth,
            parallel,
        } => {
            let kind: EstimatorKind = cfg
                .get(estimator, "estimator")?
                .ok_or_else(|| Error::Config("--estimator is required".into()))?
                .parse()
                .map_err(Error::from)?;
            let memory = cfg
                .get(memory, "memory")?
                .ok_or_else(|| Error::Config("--memory is required".into()))?;
            let source = match (
                cfg.get(input, "input")?,
                cfg.get(ba_n, "ba-n")?,
                cfg.get(ba_m, "ba-m")?,
            ) {
                (Some(path), None, None) => {
                    let order = cfg.get(order, "order")?.unwrap_or_else(|| "file".into());
                    StreamSpec::File {
                        path,
                        order: parse_order(&order, seed)?,
                    }
                }
                (None, Some(n), Some(m)) => {
                    let order = cfg.get(order, "order")?.unwrap_or_else(|| "file".into());
                    let shuffle = match parse_order(&order, seed)? {
                        StreamOrder::File => None,
                        StreamOrder::Shuffle(s) => Some(s),
                        StreamOrder::Timestamp => {
                            return Err(Error::Config(
                                "generated streams have no timestamps".into(),
                            ))
                        }
                    };
                    StreamSpec::Ba {
                        config: BaConfig {
                            n,
                            m,
                            seed: cfg.get(ba_seed, "ba-seed")?.unwrap_or(seed),
                        },
                        shuffle,
                    }
                }
                _ => {
                    return Err(Error::Config(
                        "give either --input or both --ba-n and --ba-m".into(),
                    ))
                }
            };
            let exp = ExperimentConfig {
                source,
                estimator: EstimatorSpec {
                    kind,
                    memory,
                    edge_fraction: cfg.get(edge_fraction, "edge-fraction")?,
                },
                trials: cfg.get(trials, "trials")?.unwrap_or(1),
                base_seed: seed,
                stride,
                ground_truth: !cfg.flag(no_truth, "no-truth")?,
                parallel: cfg.flag(parallel, "parallel")?,
            };
            let s = run_experiment(&exp, Some(&out_dir))?;
            eprintln!("seconds_per_edge={:.3e}", s.seconds_per_edge);
            println!("edges={} trials={}", s.edges, s.trials.len());
            if let Some(t) = s.final_truth {
                println!("truth={t}");
            }
            println!(
                "mean_final_estimate={} var_final_estimate={}",
                s.mean_final, s.var_final
            );
            if let Some(m) = s.mean_mape {
                println!("mean_mape={m}");
            }
            println!("out_dir={}", out_dir.display());
        }
        Cmd::Mape { input, truth } => {
            println!("{}", mape_from_csv(&input, truth.as_deref())?);
        }
        Cmd::ValidateProb {
            fixture,
            runs,
            list,
        } => {
            let all = builtin_fixtures();
            if list {
                for f in &all {
                    println!("{}", f.name);
                }
                return Ok(true);
            }
            let chosen: Vec<_> = if fixture.is_empty() {
                all
            } else {
                fixture
                    .iter()
                    .map(|n| {
                        all.iter()
                            .find(|f| &f.name == n)
                            .cloned()
                            .ok_or_else(|| Error::Config(format!("unknown fixture {n:?}")))
                    })
                    .collect::<Result<_>>()?
            };
            let mut ok = true;
            for f in &chosen {
                let r = validate_prob(f, runs, seed)?;
                println!("{r}");
                ok &= r.passed();
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
