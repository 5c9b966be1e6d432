use super::sample::EdgeSample;
use super::{should_check, usize_cap, CliqueEstimator, EstimatorKind};
use crate::error::DomainError;
use crate::prob::prob_clique_fiveest;
use crate::stream::{RngHandle, VertexId};

/// Single edge reservoir for 5-cliques: nine resident edges plus the closing one.
#[derive(Debug)]
pub struct FiveEst {
    m: u64,
    t: u64,
    kappa: f64,
    edges: EdgeSample,
    rng: RngHandle,
    common: Vec<(VertexId, u64, u64)>,
}

impl FiveEst {
    pub fn new(m: u64, seed: u64) -> Result<Self, DomainError> {
        if m < 9 {
            return Err(DomainError::new("FiveEst needs M >= 9"));
        }
        Ok(FiveEst {
            m,
            t: 0,
            kappa: 0.0,
            edges: EdgeSample::new(usize_cap(m)?)?,
            rng: RngHandle::new(seed),
            common: Vec::new(),
        })
    }
}

impl CliqueEstimator for FiveEst {
    fn process_edge(&mut self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return self.kappa;
        }
        self.t += 1;
        self.edges.common_neighbors(u, v, &mut self.common);
        let c = &self.common;
        let mut n = 0u64;
        for i in 0..c.len() {
            let Some(ni) = self.edges.neighbors(c[i].0) else {
                continue;
            };
            for j in i + 1..c.len() {
                if !ni.contains_key(&c[j].0) {
                    continue;
                }
                for k in j + 1..c.len() {
                    if ni.contains_key(&c[k].0) && self.edges.contains(c[j].0, c[k].0) {
                        n += 1;
                    }
                }
            }
        }
        if n > 0 {
            self.kappa += n as f64 / prob_clique_fiveest(self.t, self.m).unwrap();
        }
        self.edges.offer(u, v, self.t, &mut self.rng);
        if should_check(self.t, self.m) {
            self.edges.check_index().expect("edge index");
        }
        self.kappa
    }

    fn estimate(&self) -> f64 {
        self.kappa
    }

    fn time(&self) -> u64 {
        self.t
    }

    fn kind(&self) -> EstimatorKind {
        EstimatorKind::FiveEst
    }

    fn check_indexes(&self) -> Result<(), String> {
        self.edges.check_index()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::run_stream;
    use crate::estimators::test_graphs::complete;

    #[test]
    fn k5_and_k7_exact() {
        let mut e = FiveEst::new(10, 1).unwrap();
        assert_eq!(run_stream(&mut e, &complete(5), |_, _| {}), 1.0);
        let mut e = FiveEst::new(100, 1).unwrap();
        assert_eq!(run_stream(&mut e, &complete(7), |_, _| {}), 21.0);
    }

    #[test]
    fn k4_has_no_five_clique() {
        let mut e = FiveEst::new(9, 1).unwrap();
        assert_eq!(run_stream(&mut e, &complete(4), |_, _| {}), 0.0);
    }

    #[test]
    fn unbiased_on_k7() {
        let edges = complete(7);
        let runs = 20_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for seed in 0..runs {
            let mut e = FiveEst::new(14, seed).unwrap();
            let k = run_stream(&mut e, &edges, |_, _| {});
            sum += k;
            sq += k * k;
        }
        let mean = sum / runs as f64;
        let se = ((sq / runs as f64 - mean * mean) / runs as f64).sqrt();
        assert!((mean - 21.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }
}
