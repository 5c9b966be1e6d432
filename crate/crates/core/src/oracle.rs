//! Exact clique counts over the whole graph, overlap-pair counts, and the
//! closed-form variance and memory bounds that use them.

use std::ops::AddAssign;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::DomainError;
use crate::stream::{EdgeKey, VertexId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExactCounts {
    pub triangles: u64,
    pub cliques4: u64,
    pub cliques5: u64,
}

impl ExactCounts {
    pub fn cliques(&self, k: usize) -> u64 {
        match k {
            3 => self.triangles,
            4 => self.cliques4,
            5 => self.cliques5,
            _ => panic!("no count kept for {k}-cliques"),
        }
    }
}

impl AddAssign for ExactCounts {
    fn add_assign(&mut self, o: Self) {
        self.triangles += o.triangles;
        self.cliques4 += o.cliques4;
        self.cliques5 += o.cliques5;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OverlapCounts {
    /// Unordered 4-clique pairs sharing exactly one edge.
    pub a: u64,
    /// Unordered 4-clique pairs sharing exactly three edges.
    pub b: u64,
}

fn intersect(a: &[VertexId], b: &[VertexId], out: &mut Vec<VertexId>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Full graph with sorted adjacency lists and running counts.
#[derive(Clone, Debug, Default)]
pub struct ExactGraph {
    adj: FxHashMap<VertexId, Vec<VertexId>>,
    counts: ExactCounts,
    edges: u64,
}

impl ExactGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn neighbors(&self, x: VertexId) -> &[VertexId] {
        self.adj.get(&x).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn counts(&self) -> ExactCounts {
        self.counts
    }

    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds an edge and returns the counts it creates.
    pub fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<ExactCounts, DomainError> {
        if u == v {
            return Err(DomainError::new(format!("self-loop on {u}")));
        }
        if self.has_edge(u, v) {
            return Err(DomainError::new(format!("duplicate edge ({u}, {v})")));
        }
        let mut common = Vec::new();
        intersect(self.neighbors(u), self.neighbors(v), &mut common);
        let mut delta = ExactCounts {
            triangles: common.len() as u64,
            ..Default::default()
        };
        let (mut cx, mut cxy) = (Vec::new(), Vec::new());
        for &x in &common {
            intersect(self.neighbors(x), &common, &mut cx);
            let after: &[VertexId] = &cx[cx.partition_point(|&y| y <= x)..];
            delta.cliques4 += after.len() as u64;
            for &y in after {
                intersect(after, self.neighbors(y), &mut cxy);
                delta.cliques5 += cxy.iter().filter(|&&z| z > y).count() as u64;
            }
        }
        for (a, b) in [(u, v), (v, u)] {
            let n = self.adj.entry(a).or_default();
            let at = n.partition_point(|&x| x < b);
            n.insert(at, b);
        }
        self.edges += 1;
        self.counts += delta;
        Ok(delta)
    }

    /// Every 4-clique once, vertices ascending.
    pub fn cliques4(&self) -> Vec<[VertexId; 4]> {
        let mut out = Vec::new();
        let (mut ab, mut abc) = (Vec::new(), Vec::new());
        let mut verts: Vec<VertexId> = self.adj.keys().copied().collect();
        verts.sort_unstable();
        for &a in &verts {
            let na = self.neighbors(a);
            for &b in &na[na.partition_point(|&x| x <= a)..] {
                intersect(na, self.neighbors(b), &mut ab);
                let ab_hi: Vec<VertexId> = ab.iter().copied().filter(|&x| x > b).collect();
                for (i, &c) in ab_hi.iter().enumerate() {
                    intersect(&ab_hi[i + 1..], self.neighbors(c), &mut abc);
                    for &d in &abc {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    }
}

pub const MAX_OVERLAP_CLIQUES: usize = 100_000;

fn clique_edges(c: &[VertexId; 4]) -> [EdgeKey; 6] {
    [
        EdgeKey::new(c[0], c[1]),
        EdgeKey::new(c[0], c[2]),
        EdgeKey::new(c[0], c[3]),
        EdgeKey::new(c[1], c[2]),
        EdgeKey::new(c[1], c[3]),
        EdgeKey::new(c[2], c[3]),
    ]
}

/// Classifies every unordered pair of 4-cliques sharing at least one edge.
pub fn count_overlap_pairs(g: &ExactGraph) -> Result<OverlapCounts, DomainError> {
    let cliques = g.cliques4();
    if cliques.len() > MAX_OVERLAP_CLIQUES {
        return Err(DomainError::new(format!(
            "{} 4-cliques exceeds the overlap limit of {MAX_OVERLAP_CLIQUES}",
            cliques.len()
        )));
    }
    let mut by_edge: FxHashMap<EdgeKey, Vec<u32>> = FxHashMap::default();
    for (i, c) in cliques.iter().enumerate() {
        for k in clique_edges(c) {
            by_edge.entry(k).or_default().push(i as u32);
        }
    }
    let mut pairs: FxHashSet<(u32, u32)> = FxHashSet::default();
    for ids in by_edge.values() {
        for (x, &i) in ids.iter().enumerate() {
            for &j in &ids[x + 1..] {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
    }
    let mut out = OverlapCounts::default();
    for (i, j) in pairs {
        let ei = clique_edges(&cliques[i as usize]);
        let ej = clique_edges(&cliques[j as usize]);
        let shared = ei.iter().filter(|k| ej.contains(k)).count();
        match shared {
            1 => out.a += 1,
            3 => out.b += 1,
            n => panic!("4-cliques sharing {n} edges cannot exist"),
        }
    }
    Ok(out)
}

fn me_constant(me: f64) -> f64 {
    me.powi(3) / ((me - 1.0) * (me - 2.0) * (me - 3.0))
}

pub fn variance_bound_ts4c1(
    c4: f64,
    a: f64,
    b: f64,
    t: u64,
    tau: f64,
    me: u64,
    md: u64,
) -> Result<f64, DomainError> {
    if me < 5 || md < 1 {
        return Err(DomainError::new("bound needs M_e >= 5 and M_d >= 1"));
    }
    let c = me_constant(me as f64);
    let r = (t as f64 - 1.0) / me as f64;
    let q = tau / md as f64;
    Ok(c4 * (c * r.powi(4) * q - 1.0)
        + 2.0 * a * (c * r - 1.0)
        + 2.0 * b * (c * r * r * (0.25 * q + 0.75 * r) - 1.0))
}

pub fn variance_bound_fourest(c4: f64, a: f64, b: f64, t: u64, m: u64) -> Result<f64, DomainError> {
    if m < 5 {
        return Err(DomainError::new("bound needs M >= 5"));
    }
    let r = (t as f64 - 1.0) / m as f64;
    Ok(c4 * (r.powi(5) - 1.0) + a * (r - 1.0) + b * (r.powi(3) - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryRequirement {
    pub terms: [f64; 3],
    pub c: f64,
    pub memory: u64,
}

/// Memory sufficient for an (epsilon, delta) guarantee of the two-tier
/// estimator with the 4/5 split.
pub fn required_memory_ts4c1(
    c4: f64,
    a: f64,
    b: f64,
    t: u64,
    tau: f64,
    eps: f64,
    delta: f64,
) -> Result<MemoryRequirement, DomainError> {
    if c4 <= 0.0 {
        return Err(DomainError::new("no 4-cliques: requirement undefined"));
    }
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(DomainError::new("epsilon and delta must lie in (0,1)"));
    }
    let t1 = t as f64 - 1.0;
    let de = delta * eps * eps;
    let terms = |c: f64| {
        [
            1.25 * (12.0 * c * t1.powi(4) * tau / (de * c4)).powf(0.2),
            15.0 * c * a * t1 / (de * c4 * c4),
            1.25 * (3.0 * b * c * t1 * t1 * (4.0 * tau + 3.0 * t1) / (2.0 * de * c4 * c4)).cbrt(),
        ]
    };
    let max = |x: [f64; 3]| x.into_iter().fold(0.0, f64::max);
    let first = max(terms(1.1));
    let me = 0.8 * first;
    let c = if me > 3.0 { me_constant(me) } else { 1.1 };
    let ts = terms(c);
    Ok(MemoryRequirement {
        terms: ts,
        c,
        memory: max(ts).floor() as u64 + 1,
    })
}

/// Mean absolute percentage error over the steps with non-zero truth.
pub fn compute_mape(estimates: &[f64], truths: &[f64]) -> Result<f64, DomainError> {
    if estimates.len() != truths.len() {
        return Err(DomainError::new("series lengths differ"));
    }
    let (mut sum, mut n) = (0.0, 0u64);
    for (e, t) in estimates.iter().zip(truths) {
        if *t > 0.0 {
            sum += (e - t).abs() / t;
            n += 1;
        }
    }
    if n == 0 {
        return Err(DomainError::new("every truth is zero; MAPE undefined"));
    }
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::RngHandle;
    use proptest::prelude::*;

    fn graph(edges: &[(u64, u64)]) -> ExactGraph {
        let mut g = ExactGraph::new();
        for &(a, b) in edges {
            g.insert_edge(VertexId(a), VertexId(b)).unwrap();
        }
        g
    }

    fn complete(n: u64) -> Vec<(u64, u64)> {
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect()
    }

    #[test]
    fn complete_graph_counts() {
        let g = graph(&complete(4));
        assert_eq!(
            g.counts(),
            ExactCounts {
                triangles: 4,
                cliques4: 1,
                cliques5: 0
            }
        );
        let g = graph(&complete(5));
        assert_eq!(
            g.counts(),
            ExactCounts {
                triangles: 10,
                cliques4: 5,
                cliques5: 1
            }
        );
        assert_eq!(
            count_overlap_pairs(&g).unwrap(),
            OverlapCounts { a: 0, b: 10 }
        );
    }

    #[test]
    fn duplicates_rejected() {
        let mut g = graph(&[(1, 2)]);
        assert!(g.insert_edge(VertexId(2), VertexId(1)).is_err());
        assert!(g.insert_edge(VertexId(3), VertexId(3)).is_err());
    }

    #[test]
    fn overlap_shapes() {
        // Two K4s glued on edge (0,1).
        let mut e = complete(4);
        e.extend([(0, 4), (0, 5), (1, 4), (1, 5), (4, 5)]);
        assert_eq!(
            count_overlap_pairs(&graph(&e)).unwrap(),
            OverlapCounts { a: 1, b: 0 }
        );
        let mut e = complete(4);
        e.extend(complete(4).into_iter().map(|(a, b)| (a + 10, b + 10)));
        assert_eq!(
            count_overlap_pairs(&graph(&e)).unwrap(),
            OverlapCounts::default()
        );
    }

    fn brute(n: u64, edges: &[(u64, u64)]) -> (u64, u64, u64) {
        let adj = |a: u64, b: u64| edges.contains(&(a.min(b), a.max(b)));
        let mut c = [0u64; 6];
        for mask in 0u32..(1 << n) {
            let vs: Vec<u64> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if !(3..=5).contains(&vs.len()) {
                continue;
            }
            let ok = vs
                .iter()
                .enumerate()
                .all(|(i, &a)| vs[i + 1..].iter().all(|&b| adj(a, b)));
            if ok {
                c[vs.len()] += 1;
            }
        }
        (c[3], c[4], c[5])
    }

    /// a and b from per-edge and per-triangle clique multiplicities.
    fn overlap_by_multiplicity(g: &ExactGraph) -> OverlapCounts {
        let mut per_edge: FxHashMap<EdgeKey, u64> = FxHashMap::default();
        let mut per_tri: FxHashMap<[VertexId; 3], u64> = FxHashMap::default();
        for c in g.cliques4() {
            for k in clique_edges(&c) {
                *per_edge.entry(k).or_default() += 1;
            }
            for skip in 0..4 {
                let t: Vec<VertexId> = (0..4).filter(|&i| i != skip).map(|i| c[i]).collect();
                *per_tri.entry([t[0], t[1], t[2]]).or_default() += 1;
            }
        }
        let pairs = |k: u64| k * k.saturating_sub(1) / 2;
        let b: u64 = per_tri.values().map(|&k| pairs(k)).sum();
        let a = per_edge.values().map(|&k| pairs(k)).sum::<u64>() - 3 * b;
        OverlapCounts { a, b }
    }

    #[test]
    fn random_graphs_match_brute_force() {
        let mut rng = RngHandle::new(2024);
        for i in 0..200 {
            let n = 5 + rng.below(10);
            let p = 0.3 + 0.6 * rng.uniform();
            let mut edges: Vec<(u64, u64)> = complete(n)
                .into_iter()
                .filter(|_| rng.bernoulli(p))
                .collect();
            rng.shuffle(&mut edges);
            let g = graph(&edges);
            let mut sorted: Vec<(u64, u64)> =
                edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            sorted.sort_unstable();
            let (t, c4, c5) = brute(n, &sorted);
            assert_eq!(
                g.counts(),
                ExactCounts {
                    triangles: t,
                    cliques4: c4,
                    cliques5: c5
                },
                "graph {i}"
            );
            assert_eq!(g.cliques4().len() as u64, c4);
            assert_eq!(
                count_overlap_pairs(&g).unwrap(),
                overlap_by_multiplicity(&g)
            );
        }
    }

    #[test]
    fn bounds_zero_and_unit_cases() {
        assert_eq!(
            variance_bound_ts4c1(0.0, 0.0, 0.0, 1000, 50.0, 100, 50).unwrap(),
            0.0
        );
        assert_eq!(
            variance_bound_fourest(0.0, 0.0, 0.0, 1000, 100).unwrap(),
            0.0
        );
        let c = 100f64.powi(3) / (99.0 * 98.0 * 97.0);
        let v = variance_bound_ts4c1(1.0, 0.0, 0.0, 101, 50.0, 100, 50).unwrap();
        assert!((v - (c - 1.0)).abs() < 1e-12);
        assert_eq!(
            variance_bound_fourest(1.0, 0.0, 0.0, 101, 100).unwrap(),
            0.0
        );
    }

    #[test]
    fn bound_regressions() {
        let (c4, a, b, t, tau, me, md) = (100.0, 50.0, 20.0, 10_000u64, 500.0, 4000u64, 1000u64);
        let mef = me as f64;
        let c = mef * mef * mef / ((mef - 1.0) * (mef - 2.0) * (mef - 3.0));
        let x = 9999.0 / 4000.0;
        let y = 500.0 / 1000.0;
        let want = 100.0 * (c * x * x * x * x * y - 1.0)
            + 100.0 * (c * x - 1.0)
            + 40.0 * (c * x * x * (y / 4.0 + 3.0 * x / 4.0) - 1.0);
        let got = variance_bound_ts4c1(c4, a, b, t, tau, me, md).unwrap();
        assert!((got - want).abs() < 1e-9 * want);

        let x = 9999.0 / 5000.0;
        let want = 100.0 * (x * x * x * x * x - 1.0) + 50.0 * (x - 1.0) + 20.0 * (x * x * x - 1.0);
        let got = variance_bound_fourest(c4, a, b, t, 5000).unwrap();
        assert!((got - want).abs() < 1e-9 * want);
    }

    #[test]
    fn memory_requirement() {
        let base =
            required_memory_ts4c1(1000.0, 5000.0, 800.0, 100_000, 20_000.0, 0.1, 0.1).unwrap();
        let half =
            required_memory_ts4c1(1000.0, 5000.0, 800.0, 100_000, 20_000.0, 0.05, 0.1).unwrap();
        assert!(base.memory > 0);
        assert!(((half.terms[1] / half.c) / (base.terms[1] / base.c) - 4.0).abs() < 1e-9);
        assert!(half.memory >= base.memory);
        assert!(required_memory_ts4c1(0.0, 1.0, 1.0, 10, 1.0, 0.1, 0.1).is_err());
        assert!(required_memory_ts4c1(1.0, 1.0, 1.0, 10, 1.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn mape_cases() {
        assert_eq!(compute_mape(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(compute_mape(&[2.0, 4.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert!((compute_mape(&[90.0], &[100.0]).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(
            compute_mape(&[5.0, 90.0], &[0.0, 100.0]).unwrap(),
            compute_mape(&[90.0], &[100.0]).unwrap()
        );
        assert!(compute_mape(&[1.0], &[0.0]).is_err());
        assert!(compute_mape(&[1.0], &[]).is_err());
    }

    proptest! {
        #[test]
        fn bounds_monotone(t in 600u64..5000, dt in 1u64..1000, m in 100u64..500, dm in 1u64..100) {
            let (c4, a, b) = (10.0, 5.0, 3.0);
            let f = |t, m| variance_bound_fourest(c4, a, b, t, m).unwrap();
            prop_assert!(f(t + dt, m) >= f(t, m));
            prop_assert!(f(t, m + dm) <= f(t, m));
            let g = |t, me, md| variance_bound_ts4c1(c4, a, b, t, 400.0, me, md).unwrap();
            prop_assert!(g(t + dt, m, 50) >= g(t, m, 50));
            prop_assert!(g(t, m + dm, 50) <= g(t, m, 50));
            prop_assert!(g(t, m, 50 + dm) <= g(t, m, 50));
        }
    }
}
