use super::sample::{EdgeSample, HasTriangle, RecordStore, SampledStore, TriangleRecord};
use super::{should_check, usize_cap, CliqueEstimator, EstimatorKind};
use crate::error::DomainError;
use crate::prob::{prob_clique_ts4c2, CliqueTimestamps4C2};
use crate::stream::{EdgeKey, RngHandle, VertexId};

/// Edge reservoir plus triangle reservoir; a 4-clique is seen when its
/// closing edge (u,v) joins two resident triangles {u,w,z} and {v,w,z}.
#[derive(Debug)]
pub struct Ts4c2 {
    me: u64,
    md: u64,
    t: u64,
    kappa: f64,
    edges: EdgeSample,
    tris: SampledStore<TriangleRecord>,
    rng: RngHandle,
    common: Vec<(VertexId, u64, u64)>,
}

impl Ts4c2 {
    pub fn new(me: u64, md: u64, seed: u64) -> Result<Self, DomainError> {
        if me < 5 || md < 2 {
            return Err(DomainError::new("TS4C2 needs M_e >= 5 and M_d >= 2"));
        }
        Ok(Ts4c2 {
            me,
            md,
            t: 0,
            kappa: 0.0,
            edges: EdgeSample::new(usize_cap(me)?)?,
            tris: SampledStore::new(usize_cap(md)?, true)?,
            rng: RngHandle::new(seed),
            common: Vec::new(),
        })
    }

    pub fn triangles_seen(&self) -> u64 {
        self.tris.offered
    }
}

/// Resident triangle pairs {u,w,z}, {v,w,z}, each reported once as
/// `(pair timestamps without t6, ids)`.
pub(crate) fn triangle_pairs<R: HasTriangle, F>(
    store: &RecordStore<R>,
    u: VertexId,
    v: VertexId,
    mut f: F,
) where
    F: FnMut([u64; 5], u64, u64),
{
    for &a in store.at_vertex(u) {
        let ta = store.get(a).unwrap().triangle();
        if ta.contains(v) {
            debug_assert!(
                false,
                "resident triangle holds both endpoints of a new edge"
            );
            continue;
        }
        let (w, z) = ta.others(u);
        for &b in store.on_edge(EdgeKey::new(w, z)) {
            let tb = store.get(b).unwrap().triangle();
            if !tb.contains(v) {
                continue;
            }
            let t1 = ta.edge_time(w, z).unwrap();
            let t2 = ta.edge_time(u, w).unwrap();
            let t4 = ta.edge_time(u, z).unwrap();
            let t3 = tb.edge_time(v, w).unwrap();
            let t5 = tb.edge_time(v, z).unwrap();
            f([t1, t2, t3, t4, t5], a, b);
        }
    }
}

impl CliqueEstimator for Ts4c2 {
    fn process_edge(&mut self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return self.kappa;
        }
        self.t += 1;
        let mut add = 0.0;
        let (t6, me, md, tau) = (self.t, self.me, self.md, self.tris.offered);
        triangle_pairs(&self.tris.store, u, v, |[t1, t2, t3, t4, t5], _, _| {
            let p = prob_clique_ts4c2(&CliqueTimestamps4C2 {
                t1,
                t2,
                t3,
                t4,
                t5,
                t6,
                edge_capacity: me,
                triangle_capacity: md,
                triangles_seen: tau,
            })
            .unwrap();
            add += 1.0 / p;
        });
        self.kappa += add;

        self.edges.common_neighbors(u, v, &mut self.common);
        for &(w, tu, tv) in &self.common {
            self.tris.offer(
                TriangleRecord::closed_by(u, v, w, self.t, tu, tv),
                &mut self.rng,
            );
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
        EstimatorKind::Ts4c2
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
    fn k4_once() {
        let mut e = Ts4c2::new(10, 10, 1).unwrap();
        assert_eq!(run_stream(&mut e, &complete(4), |_, _| {}), 1.0);
    }

    #[test]
    fn exact_before_saturation() {
        let mut e = Ts4c2::new(100, 100, 1).unwrap();
        assert_eq!(run_stream(&mut e, &complete(6), |_, _| {}), 15.0);
    }

    #[test]
    fn no_cliques_no_count() {
        let mut e = Ts4c2::new(5, 2, 1).unwrap();
        assert_eq!(run_stream(&mut e, &cycle(40), |_, _| {}), 0.0);
    }

    #[test]
    fn unbiased_on_k7() {
        let edges = complete(7);
        let runs = 20_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for seed in 0..runs {
            let mut e = Ts4c2::new(8, 6, seed).unwrap();
            let k = run_stream(&mut e, &edges, |_, _| {});
            sum += k;
            sq += k * k;
        }
        let mean = sum / runs as f64;
        let se = ((sq / runs as f64 - mean * mean) / runs as f64).sqrt();
        assert!((mean - 35.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }
}
