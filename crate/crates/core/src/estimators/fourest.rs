use super::sample::EdgeSample;
use super::{should_check, usize_cap, CliqueEstimator, EstimatorKind};
use crate::error::DomainError;
use crate::prob::prob_clique_fourest;
use crate::stream::{RngHandle, VertexId};

/// Single edge reservoir; a 4-clique is counted when its sixth edge arrives
/// and the other five are resident.
#[derive(Debug)]
pub struct FourEst {
    m: u64,
    t: u64,
    kappa: f64,
    edges: EdgeSample,
    rng: RngHandle,
    common: Vec<(VertexId, u64, u64)>,
}

impl FourEst {
    pub fn new(m: u64, seed: u64) -> Result<Self, DomainError> {
        if m < 5 {
            return Err(DomainError::new("FourEst needs M >= 5"));
        }
        Ok(FourEst {
            m,
            t: 0,
            kappa: 0.0,
            edges: EdgeSample::new(usize_cap(m)?)?,
            rng: RngHandle::new(seed),
            common: Vec::new(),
        })
    }
}

/// Unordered pairs of `common` joined by a sampled edge.
pub(crate) fn pairs_connected(edges: &EdgeSample, common: &[(VertexId, u64, u64)]) -> u64 {
    let mut n = 0;
    for (i, a) in common.iter().enumerate() {
        let Some(na) = edges.neighbors(a.0) else {
            continue;
        };
        for b in &common[i + 1..] {
            n += na.contains_key(&b.0) as u64;
        }
    }
    n
}

impl CliqueEstimator for FourEst {
    fn process_edge(&mut self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return self.kappa;
        }
        self.t += 1;
        self.edges.common_neighbors(u, v, &mut self.common);
        let n = pairs_connected(&self.edges, &self.common);
        if n > 0 {
            self.kappa += n as f64 / prob_clique_fourest(self.t, self.m).unwrap();
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
        EstimatorKind::FourEst
    }

    fn check_indexes(&self) -> Result<(), String> {
        self.edges.check_index()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::run_stream;
    use crate::estimators::test_graphs::{complete, cycle};

    #[test]
    fn k4_counts_one() {
        let mut e = FourEst::new(6, 1).unwrap();
        assert_eq!(run_stream(&mut e, &complete(4), |_, _| {}), 1.0);
    }

    #[test]
    fn k6_exact_without_eviction() {
        let mut e = FourEst::new(100, 1).unwrap();
        assert_eq!(run_stream(&mut e, &complete(6), |_, _| {}), 15.0);
    }

    #[test]
    fn triangle_free_stays_zero() {
        let mut e = FourEst::new(5, 3).unwrap();
        run_stream(&mut e, &cycle(50), |_, k| assert_eq!(k, 0.0));
    }

    #[test]
    fn small_memory_rejected() {
        assert!(FourEst::new(4, 0).is_err());
    }

    #[test]
    fn unbiased_on_k7() {
        // K7 has 35 4-cliques; M=8 forces heavy eviction.
        let edges = complete(7);
        let runs = 20_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for seed in 0..runs {
            let mut e = FourEst::new(8, seed).unwrap();
            let k = run_stream(&mut e, &edges, |_, _| {});
            sum += k;
            sq += k * k;
        }
        let mean = sum / runs as f64;
        let se = ((sq / runs as f64 - mean * mean) / runs as f64).sqrt();
        assert!((mean - 35.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }
}
