use super::sample::{EdgeSample, SampledStore, TriangleRecord};
use super::{should_check, usize_cap, CliqueEstimator, EstimatorKind};
use crate::error::DomainError;
use crate::prob::{prob_clique_ts4c1, CliqueTimestamps4C1};
use crate::stream::{RngHandle, VertexId};

/// Edge reservoir plus a reservoir of observed triangles. A 4-clique is seen
/// when its closing edge (u,v) meets a resident triangle on one endpoint and
/// two resident edges from the other; each of the two paths counts half.
#[derive(Debug)]
pub struct Ts4c1 {
    me: u64,
    md: u64,
    t: u64,
    kappa: f64,
    edges: EdgeSample,
    tris: SampledStore<TriangleRecord>,
    rng: RngHandle,
    common: Vec<(VertexId, u64, u64)>,
}

impl Ts4c1 {
    pub fn new(me: u64, md: u64, seed: u64) -> Result<Self, DomainError> {
        if me < 5 || md < 1 {
            return Err(DomainError::new("TS4C1 needs M_e >= 5 and M_d >= 1"));
        }
        Ok(Ts4c1 {
            me,
            md,
            t: 0,
            kappa: 0.0,
            edges: EdgeSample::new(usize_cap(me)?)?,
            tris: SampledStore::new(usize_cap(md)?, false)?,
            rng: RngHandle::new(seed),
            common: Vec::new(),
        })
    }

    pub fn triangles_seen(&self) -> u64 {
        self.tris.offered
    }

    fn scan(&self, a: VertexId, b: VertexId) -> f64 {
        let mut add = 0.0;
        for &id in self.tris.store.at_vertex(a) {
            let rec = self.tris.store.get(id).unwrap();
            if rec.contains(b) {
                debug_assert!(
                    false,
                    "resident triangle holds both endpoints of a new edge"
                );
                continue;
            }
            let (w, z) = rec.others(a);
            let (Some(t3), Some(t5)) = (self.edges.edge_time(b, w), self.edges.edge_time(b, z))
            else {
                continue;
            };
            let p = prob_clique_ts4c1(&CliqueTimestamps4C1 {
                triangle: rec.ts,
                companions: [t3, t5],
                t6: self.t,
                edge_capacity: self.me,
                triangle_capacity: self.md,
                triangles_seen: self.tris.offered,
            })
            .unwrap();
            add += 0.5 / p;
        }
        add
    }
}

impl CliqueEstimator for Ts4c1 {
    fn process_edge(&mut self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return self.kappa;
        }
        self.t += 1;
        self.kappa += self.scan(u, v) + self.scan(v, u);

        self.edges.common_neighbors(u, v, &mut self.common);
        for &(w, tu, tv) in &self.common {
            let rec = TriangleRecord::closed_by(u, v, w, self.t, tu, tv);
            self.tris.offer(rec, &mut self.rng);
        }

        self.edges.offer(u, v, self.t, &mut self.rng);
        if should_check(self.t, self.me + self.md) {
            self.check_indexes().expect("index");
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
        EstimatorKind::Ts4c1
    }

    fn check_indexes(&self) -> Result<(), String> {
        self.edges.check_index()?;
        self.tris.check_index()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::run_stream;
    use crate::estimators::test_graphs::{complete, cycle};

    #[test]
    fn both_paths_add_half() {
        let mut e = Ts4c1::new(10, 10, 1).unwrap();
        let mut seen = Vec::new();
        run_stream(&mut e, &complete(4), |_, k| seen.push(k));
        assert_eq!(seen, vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn exact_before_saturation() {
        let mut e = Ts4c1::new(100, 100, 1).unwrap();
        assert_eq!(run_stream(&mut e, &complete(6), |_, _| {}), 15.0);
    }

    #[test]
    fn no_cliques_no_count() {
        let mut e = Ts4c1::new(5, 1, 1).unwrap();
        assert_eq!(run_stream(&mut e, &cycle(40), |_, _| {}), 0.0);
        assert_eq!(e.triangles_seen(), 0);
    }

    #[test]
    fn unbiased_on_k7() {
        let edges = complete(7);
        let runs = 20_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for seed in 0..runs {
            let mut e = Ts4c1::new(8, 6, seed).unwrap();
            let k = run_stream(&mut e, &edges, |_, _| {});
            sum += k;
            sq += k * k;
        }
        let mean = sum / runs as f64;
        let se = ((sq / runs as f64 - mean * mean) / runs as f64).sqrt();
        assert!((mean - 35.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }
}
