//! Seeded Barabási–Albert edge streams.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{DomainError, Error};
use crate::stream::{write_edges, RngHandle};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaConfig {
    pub n: u64,
    pub m: u64,
    pub seed: u64,
}

impl BaConfig {
    pub fn edge_count(&self) -> u64 {
        self.m * (self.m + 1) / 2 + self.m * (self.n - self.m - 1)
    }
}

/// Clique on vertices `0..=m`, then every new vertex picks `m` distinct
/// targets with probability proportional to degree (endpoint list with
/// rejection). Edges come out in creation order as `(new, target)`.
pub fn generate_ba(cfg: &BaConfig) -> Result<Vec<(u64, u64)>, DomainError> {
    if cfg.m < 1 || cfg.n <= cfg.m {
        return Err(DomainError::new(format!(
            "BA needs n > m >= 1, got n={} m={}",
            cfg.n, cfg.m
        )));
    }
    let mut rng = RngHandle::new(cfg.seed);
    let mut edges = Vec::with_capacity(cfg.edge_count() as usize);
    let mut ends: Vec<u64> = Vec::with_capacity(2 * cfg.edge_count() as usize);
    for a in 0..=cfg.m {
        for b in a + 1..=cfg.m {
            edges.push((a, b));
            ends.push(a);
            ends.push(b);
        }
    }
    let mut picked = Vec::with_capacity(cfg.m as usize);
    for v in cfg.m + 1..cfg.n {
        picked.clear();
        while picked.len() < cfg.m as usize {
            let x = ends[rng.below(ends.len() as u64) as usize];
            if !picked.contains(&x) {
                picked.push(x);
            }
        }
        for &x in &picked {
            edges.push((v, x));
            ends.push(v);
            ends.push(x);
        }
    }
    Ok(edges)
}

pub fn write_ba(cfg: &BaConfig, path: &Path) -> Result<u64, Error> {
    let edges = generate_ba(cfg)?;
    write_edges(BufWriter::new(File::create(path)?), &edges)?;
    Ok(edges.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustc_hash::FxHashSet;

    #[test]
    fn small_counts() {
        let e = generate_ba(&BaConfig {
            n: 5,
            m: 1,
            seed: 9,
        })
        .unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e[0], (0, 1));
        let cfg = BaConfig {
            n: 500,
            m: 5,
            seed: 1,
        };
        assert_eq!(generate_ba(&cfg).unwrap().len() as u64, cfg.edge_count());
        assert_eq!(cfg.edge_count(), 15 + 5 * 494);
    }

    #[test]
    fn invalid_config() {
        assert!(generate_ba(&BaConfig {
            n: 3,
            m: 3,
            seed: 0
        })
        .is_err());
        assert!(generate_ba(&BaConfig {
            n: 3,
            m: 0,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn simple_and_causal() {
        let e = generate_ba(&BaConfig {
            n: 400,
            m: 7,
            seed: 3,
        })
        .unwrap();
        let mut seen = FxHashSet::default();
        let mut born = FxHashSet::default();
        for v in 0..=7u64 {
            born.insert(v);
        }
        for &(a, b) in &e {
            assert_ne!(a, b);
            assert!(seen.insert((a.min(b), a.max(b))));
            assert!(born.contains(&a) || born.contains(&b));
            born.insert(a);
            born.insert(b);
        }
    }

    #[test]
    fn deterministic_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = BaConfig {
            n: 200,
            m: 4,
            seed: 77,
        };
        let (p, q) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
        write_ba(&cfg, &p).unwrap();
        write_ba(&cfg, &q).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
        let out = dir.path().join("d.txt");
        assert_eq!(crate::stream::dedup_stream(&p, &out).unwrap(), 0);
    }
}
