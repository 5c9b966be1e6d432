//! Adaptive tiered sampling. Starts as a single edge reservoir (R1); once a
//! two-tier split promises a higher detection probability it switches for
//! good to an edge sample plus a triangle tier (R2), seeding the tier with
//! the triangles already present in the edge sample.
//!
//! The triangle tier is a chain of regions. Each region behaves like a
//! reservoir over a virtual offer count `v` with `C` slots, some of which
//! may be empty: an offer is taken with probability `C/v` and lands in a
//! uniform slot. Every item of a region is then resident with probability
//! `min(1, C/v)`, and two items offered directly to it with probability
//! `C(C-1)/(v(v-1))`. When memory moves from edges to triangles a fresh
//! region is opened; it is merged back into the old one as soon as its
//! inclusion probability drops to the old region's, thinning the old items
//! to that probability.

use super::fourest::pairs_connected;
use super::sample::{EdgeSample, HasTriangle, Record, RecordStore, TriangleRecord};
use super::ts4c2::triangle_pairs;
use super::{should_check, usize_cap, CliqueEstimator, EstimatorKind};
use crate::error::DomainError;
use crate::prob::{prob_clique_fourest, staged_inclusion, CapacitySchedule, SampleState};
use crate::stream::{EdgeKey, RngHandle, VertexId};

/// Fixed switch and expansion schedule, for diagnostics. With a plan the
/// memory layout no longer depends on the stream, which makes the estimate
/// exactly unbiased.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcedPlan {
    pub switch_at: u64,
    pub edge_fraction: f64,
    /// One move of memory from edges to triangles: (step, new edge fraction).
    pub expansion: Option<(u64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Single,
    Tiered,
}

const ALPHA_MIN: f64 = 2.0 / 3.0;

/// Grid search of the edge fraction maximizing
/// `min(1, aM/t)^4 * min(1, (1-a)M/tau)^2`; ties go to the smaller fraction.
pub fn best_split(m: u64, t: u64, tau: f64) -> (f64, f64) {
    let mut best = (ALPHA_MIN, two_tier_prob(ALPHA_MIN, m, t, tau));
    for k in 1.. {
        let a = ALPHA_MIN + 0.01 * k as f64;
        if a >= 1.0 {
            break;
        }
        let p = two_tier_prob(a, m, t, tau);
        if p > best.1 {
            best = (a, p);
        }
    }
    best
}

pub fn two_tier_prob(alpha: f64, m: u64, t: u64, tau: f64) -> f64 {
    let m = m as f64;
    let e = (alpha * m / t as f64).min(1.0);
    let d = if tau <= 0.0 {
        1.0
    } else {
        ((1.0 - alpha) * m / tau).min(1.0)
    };
    e.powi(4) * d.powi(2)
}

pub fn single_prob(m: u64, t: u64) -> f64 {
    (m as f64 / t as f64).min(1.0).powi(5)
}

#[derive(Clone, Debug)]
struct AtsTriangle {
    rec: TriangleRecord,
    seed: bool,
    /// Regions the triangle has lived in; the first received it as an offer,
    /// the others through merges.
    chain: Vec<usize>,
}

impl Record for AtsTriangle {
    fn vertices(&self) -> &[VertexId] {
        &self.rec.v
    }
    fn edge_keys(&self) -> Vec<EdgeKey> {
        self.rec.edges().to_vec()
    }
}

impl HasTriangle for AtsTriangle {
    fn triangle(&self) -> &TriangleRecord {
        &self.rec
    }
}

#[derive(Clone, Debug)]
struct Region {
    cap: usize,
    count: f64,
    slots: Vec<Option<u64>>,
    filled: usize,
    /// Virtual count right after the merge that created this region.
    merged_at: Option<f64>,
    /// Retention probability applied to this region's items when it was merged.
    thin: f64,
}

impl Region {
    fn fresh(cap: usize) -> Self {
        Region {
            cap,
            count: 0.0,
            slots: vec![None; cap],
            filled: 0,
            merged_at: None,
            thin: 1.0,
        }
    }

    fn marginal(&self) -> f64 {
        (self.cap as f64 / self.count).min(1.0)
    }

    fn direct_pair(&self) -> f64 {
        let c = self.cap as f64;
        let v = self.count;
        if v <= c {
            1.0
        } else {
            (c * (c - 1.0) / (v * (v - 1.0))).min(1.0)
        }
    }

    fn is_full(&self) -> bool {
        self.filled == self.cap
    }
}

/// Edge capacity over time: `m` up to the switch, then piecewise constant.
#[derive(Clone, Debug)]
struct Schedule {
    m: u64,
    switch_at: u64,
    changes: Vec<(u64, u64)>,
}

impl CapacitySchedule for Schedule {
    fn capacity(&self, s: SampleState) -> u64 {
        if s.step < self.switch_at || (s.step == self.switch_at && s.before_resize) {
            return self.m;
        }
        let mut cap = self.m;
        for &(step, c) in &self.changes {
            if step < s.step || (step == s.step && !s.before_resize) {
                cap = c;
            }
        }
        cap
    }
}

#[derive(Debug)]
struct Tier {
    schedule: Schedule,
    regions: Vec<Region>,
    store: RecordStore<AtsTriangle>,
    active: usize,
    /// (old, new) while a fresh region waits to be merged.
    pending: Option<(usize, usize)>,
    offered: u64,
    offered_prev_check: u64,
}

impl Tier {
    fn capacity(&self) -> usize {
        let mut c = self.regions[self.active].cap;
        if let Some((old, _)) = self.pending {
            c += self.regions[old].cap;
        }
        c
    }

    fn offer(&mut self, tri: AtsTriangle, rng: &mut RngHandle) {
        self.offered += 1;
        let ri = self.active;
        let r = &mut self.regions[ri];
        r.count += 1.0;
        let p = (r.cap as f64 / r.count).min(1.0);
        let slot = if p >= 1.0 {
            let free = r
                .slots
                .iter()
                .position(|s| s.is_none())
                .expect("free slot below capacity");
            Some(free)
        } else if rng.bernoulli(p) {
            Some(rng.below(r.cap as u64) as usize)
        } else {
            None
        };
        let Some(slot) = slot else { return };
        let id = self.store.next_id();
        let old = self.regions[ri].slots[slot].replace(id);
        match old {
            Some(old) => {
                self.store.remove(old);
            }
            None => self.regions[ri].filled += 1,
        }
        let mut tri = tri;
        tri.chain = vec![ri];
        self.store.insert(id, tri);
    }

    /// Probability both triangles are resident, given the offer history.
    fn pair(&self, a: &AtsTriangle, b: &AtsTriangle) -> f64 {
        self.pair_on(&a.chain, &b.chain)
    }

    fn pair_on(&self, ca: &[usize], cb: &[usize]) -> f64 {
        let (ra, rb) = (*ca.last().unwrap(), *cb.last().unwrap());
        if ra != rb {
            return self.regions[ra].marginal() * self.regions[rb].marginal();
        }
        let r = &self.regions[ra];
        if ca.len() == 1 || cb.len() == 1 {
            return r.direct_pair();
        }
        let (qa, qb) = (ca[ca.len() - 2], cb[cb.len() - 2]);
        let at_merge = if qa == qb {
            let q = &self.regions[qa];
            self.pair_on(&ca[..ca.len() - 1], &cb[..cb.len() - 1]) * q.thin * q.thin
        } else {
            let (a, b) = (&self.regions[qa], &self.regions[qb]);
            a.marginal() * a.thin * b.marginal() * b.thin
        };
        let vm = r.merged_at.unwrap();
        let v = r.count;
        at_merge * (vm * (vm - 1.0)) / (v * (v - 1.0))
    }

    fn try_merge(&mut self, rng: &mut RngHandle) {
        let Some((old, new)) = self.pending else {
            return;
        };
        let p_old = self.regions[old].marginal();
        let p_new = self.regions[new].marginal();
        if p_new > p_old {
            return;
        }
        let rho = p_new / p_old;
        let cap = self.regions[old].cap + self.regions[new].cap;
        let merged = self.regions.len();
        let mut slots: Vec<Option<u64>> = Vec::with_capacity(cap);
        for id in self.regions[old].slots.clone().into_iter().flatten() {
            if rng.bernoulli(rho) {
                slots.push(Some(id));
            } else {
                self.store.remove(id);
            }
        }
        slots.extend(self.regions[new].slots.iter().flatten().map(|&id| Some(id)));
        for id in slots.iter().flatten() {
            if let Some(t) = self.store.get_mut(*id) {
                t.chain.push(merged);
            }
        }
        let filled = slots.len();
        slots.resize(cap, None);
        self.regions[old].thin = rho;
        self.regions[new].thin = 1.0;
        self.regions.push(Region {
            cap,
            count: cap as f64 / p_new,
            slots,
            filled,
            merged_at: Some(cap as f64 / p_new),
            thin: 1.0,
        });
        self.active = merged;
        self.pending = None;
    }

    fn check(&self) -> Result<(), String> {
        self.store.check_index()?;
        let mut live: Vec<u64> = Vec::new();
        let mut regions = vec![self.active];
        if let Some((old, _)) = self.pending {
            regions.push(old);
        }
        for &ri in &regions {
            let r = &self.regions[ri];
            let ids: Vec<u64> = r.slots.iter().flatten().copied().collect();
            if ids.len() != r.filled {
                return Err("region fill count out of sync".into());
            }
            for id in &ids {
                match self.store.get(*id) {
                    Some(t) if *t.chain.last().unwrap() == ri => {}
                    _ => return Err(format!("slot id {id} not stored in region {ri}")),
                }
            }
            live.extend(ids);
        }
        if live.len() != self.store.len() {
            return Err("triangle store holds records outside live regions".into());
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct Ats4c {
    m: u64,
    t: u64,
    kappa: f64,
    edges: EdgeSample,
    rng: RngHandle,
    common: Vec<(VertexId, u64, u64)>,
    observed: u64,
    tier: Option<Tier>,
    plan: Option<ForcedPlan>,
}

impl Ats4c {
    pub fn new(m: u64, seed: u64) -> Result<Self, DomainError> {
        if m < 8 {
            return Err(DomainError::new("ATS4C needs M >= 8"));
        }
        Ok(Ats4c {
            m,
            t: 0,
            kappa: 0.0,
            edges: EdgeSample::new(usize_cap(m)?)?,
            rng: RngHandle::new(seed),
            common: Vec::new(),
            observed: 0,
            tier: None,
            plan: None,
        })
    }

    pub fn with_plan(m: u64, seed: u64, plan: ForcedPlan) -> Result<Self, DomainError> {
        if !(plan.edge_fraction > 0.0 && plan.edge_fraction < 1.0) {
            return Err(DomainError::new("forced edge fraction must lie in (0,1)"));
        }
        if let Some((step, f)) = plan.expansion {
            if step <= plan.switch_at || !(f > 0.0 && f < plan.edge_fraction) {
                return Err(DomainError::new(
                    "forced expansion must follow the switch and shrink edges",
                ));
            }
        }
        let mut a = Ats4c::new(m, seed)?;
        a.plan = Some(plan);
        Ok(a)
    }

    pub fn regime(&self) -> Regime {
        if self.tier.is_some() {
            Regime::Tiered
        } else {
            Regime::Single
        }
    }

    pub fn switched_at(&self) -> Option<u64> {
        self.tier.as_ref().map(|t| t.schedule.switch_at)
    }

    pub fn edge_capacity(&self) -> usize {
        self.edges.capacity()
    }

    pub fn triangles_observed(&self) -> u64 {
        self.observed
    }

    fn edge_caps(&self, alpha: f64) -> usize {
        let me = ((alpha * self.m as f64) + 1e-9).floor() as u64;
        me.clamp(5, self.m - 2) as usize
    }

    fn step_single(&mut self, u: VertexId, v: VertexId) {
        self.edges.common_neighbors(u, v, &mut self.common);
        self.observed += self.common.len() as u64;
        let n = pairs_connected(&self.edges, &self.common);
        if n > 0 {
            self.kappa += n as f64 / prob_clique_fourest(self.t, self.m).unwrap();
        }
    }

    fn switch_decision(&self) -> Option<f64> {
        if let Some(plan) = &self.plan {
            return (self.t == plan.switch_at).then_some(plan.edge_fraction);
        }
        if !self.t.is_multiple_of(self.m) || self.observed == 0 {
            return None;
        }
        let (alpha, p) = best_split(self.m, self.t, self.observed as f64);
        (p > single_prob(self.m, self.t)).then_some(alpha)
    }

    fn switch(&mut self, alpha: f64) {
        let me = self.edge_caps(alpha);
        let md = self.m as usize - me;
        let ts = self.t;
        let mut tier = Tier {
            schedule: Schedule {
                m: self.m,
                switch_at: ts,
                changes: vec![(ts, me as u64)],
            },
            regions: vec![Region::fresh(md)],
            store: RecordStore::new(true),
            active: 0,
            pending: None,
            offered: 0,
            offered_prev_check: 0,
        };
        let mut seeds = Vec::new();
        for e in self.edges.items() {
            let (a, b) = (e.key.0, e.key.1);
            self.edges.common_neighbors(a, b, &mut self.common);
            for &(c, ta, tb) in &self.common {
                if c > b {
                    seeds.push(TriangleRecord {
                        v: [a, b, c],
                        ts: [e.t, ta, tb],
                        observed: ts,
                    });
                }
            }
        }
        for rec in seeds {
            tier.offer(
                AtsTriangle {
                    rec,
                    seed: true,
                    chain: Vec::new(),
                },
                &mut self.rng,
            );
        }
        tier.offered_prev_check = tier.offered;
        self.edges.shrink(me, &mut self.rng);
        self.tier = Some(tier);
    }

    /// Edge-side probability that both triangles were resident when needed.
    fn edge_factor(&self, sched: &Schedule, a: &AtsTriangle, b: &AtsTriangle) -> f64 {
        let stage = |x: &AtsTriangle| -> (Vec<u64>, SampleState) {
            if x.seed {
                (
                    x.rec.ts.to_vec(),
                    SampleState {
                        step: sched.switch_at,
                        before_resize: true,
                    },
                )
            } else {
                let close = x.rec.closing_time();
                let rest = x.rec.ts.iter().copied().filter(|&t| t != close).collect();
                (rest, SampleState::after(close - 1))
            }
        };
        let (mut s1, mut s2) = (stage(a), stage(b));
        if s2.1.order_key() < s1.1.order_key() {
            std::mem::swap(&mut s1, &mut s2);
        }
        staged_inclusion(&s1.0, s1.1, &s2.0, s2.1, sched)
    }

    fn step_tiered(&mut self, u: VertexId, v: VertexId) {
        let tier = self.tier.as_ref().unwrap();
        let mut add = 0.0;
        triangle_pairs(&tier.store, u, v, |_, ia, ib| {
            let a = tier.store.get(ia).unwrap();
            let b = tier.store.get(ib).unwrap();
            let p = self.edge_factor(&tier.schedule, a, b) * tier.pair(a, b);
            debug_assert!(p > 0.0 && p <= 1.0 + 1e-12, "pair probability {p}");
            add += 1.0 / p;
        });
        self.kappa += add;

        self.edges.common_neighbors(u, v, &mut self.common);
        self.observed += self.common.len() as u64;
        let tier = self.tier.as_mut().unwrap();
        for &(w, tu, tv) in &self.common {
            let rec = TriangleRecord::closed_by(u, v, w, self.t, tu, tv);
            tier.offer(
                AtsTriangle {
                    rec,
                    seed: false,
                    chain: Vec::new(),
                },
                &mut self.rng,
            );
        }
    }

    fn expansion_decision(&mut self) -> Option<usize> {
        let tier = self.tier.as_mut().unwrap();
        let me = self.edges.capacity();
        if let Some(plan) = &self.plan {
            let (step, f) = plan.expansion?;
            if step != self.t {
                return None;
            }
            let target = ((f * self.m as f64) + 1e-9).floor() as usize;
            return (target >= 5 && target < me).then_some(me - target);
        }
        if !self.t.is_multiple_of(self.m) {
            return None;
        }
        let now = tier.offered;
        let prev = std::mem::replace(&mut tier.offered_prev_check, now);
        let tri_cap = tier.capacity();
        if 3 * tri_cap as u64 >= self.m
            || tier.pending.is_some()
            || !tier.regions[tier.active].is_full()
        {
            return None;
        }
        let predicted = 2.0 * now as f64 - prev as f64;
        let (alpha, _) = best_split(self.m, self.t + self.m, predicted);
        let current = me as f64 / self.m as f64;
        if alpha >= current {
            return None;
        }
        let d = ((current - alpha) * self.m as f64 + 1e-9).floor() as usize;
        let d = d.min(me.saturating_sub(5));
        (d >= 2).then_some(d)
    }

    fn expand(&mut self, d: usize) {
        let me = self.edges.capacity() - d;
        self.edges.shrink(me, &mut self.rng);
        let tier = self.tier.as_mut().unwrap();
        tier.schedule.changes.push((self.t, me as u64));
        let new = tier.regions.len();
        tier.regions.push(Region::fresh(d));
        tier.pending = Some((tier.active, new));
        tier.active = new;
    }
}

impl CliqueEstimator for Ats4c {
    fn process_edge(&mut self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return self.kappa;
        }
        self.t += 1;
        if self.tier.is_none() {
            self.step_single(u, v);
        } else {
            self.step_tiered(u, v);
        }
        self.edges.offer(u, v, self.t, &mut self.rng);

        if self.tier.is_none() {
            if let Some(alpha) = self.switch_decision() {
                self.switch(alpha);
            }
        } else {
            self.tier.as_mut().unwrap().try_merge(&mut self.rng);
            if let Some(d) = self.expansion_decision() {
                self.expand(d);
            }
        }
        if should_check(self.t, self.m) {
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
        EstimatorKind::Ats4c
    }

    fn check_indexes(&self) -> Result<(), String> {
        self.edges.check_index()?;
        match &self.tier {
            Some(t) => t.check(),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::test_graphs::{complete, cycle};
    use crate::estimators::{run_stream, FourEst};
    use crate::reservoir::joint_inclusion;

    #[test]
    fn grid_prefers_smaller_alpha_on_ties() {
        // Everything clamps to 1: every alpha ties.
        let (a, p) = best_split(100, 50, 10.0);
        assert_eq!(p, 1.0);
        assert!((a - ALPHA_MIN).abs() < 1e-12);
    }

    #[test]
    fn no_triangles_no_switch_and_same_as_fourest() {
        let edges = cycle(500);
        let mut a = Ats4c::new(20, 3).unwrap();
        let mut f = FourEst::new(20, 3).unwrap();
        for &(x, y) in &edges {
            assert_eq!(a.process_edge(x, y), f.process_edge(x, y));
        }
        assert_eq!(a.regime(), Regime::Single);
    }

    #[test]
    fn exact_without_eviction() {
        let mut a = Ats4c::new(100, 1).unwrap();
        assert_eq!(run_stream(&mut a, &complete(7), |_, _| {}), 35.0);
    }

    /// Many small cliques spread among sparse noise: triangles are rare
    /// relative to edges, so the adaptive rule wants two tiers.
    pub(crate) fn sparse_cliques(seed: u64) -> Vec<(VertexId, VertexId)> {
        let mut rng = RngHandle::new(seed);
        let mut edges = Vec::new();
        let mut next = 0u64;
        for _ in 0..12 {
            let base = next;
            next += 5;
            for a in 0..5 {
                for b in a + 1..5 {
                    edges.push((VertexId(base + a), VertexId(base + b)));
                }
            }
        }
        for _ in 0..480 {
            edges.push((VertexId(next), VertexId(next + 1)));
            next += 2;
        }
        rng.shuffle(&mut edges);
        edges
    }

    fn mean_and_se(f: impl Fn(u64) -> f64, runs: u64) -> (f64, f64) {
        let (mut s, mut q) = (0.0, 0.0);
        for seed in 0..runs {
            let k = f(seed);
            s += k;
            q += k * k;
        }
        let mean = s / runs as f64;
        (mean, ((q / runs as f64 - mean * mean) / runs as f64).sqrt())
    }

    #[test]
    fn forced_switch_is_unbiased() {
        let edges = sparse_cliques(7);
        // 12 copies of K5.
        let truth = 60.0;
        let plan = ForcedPlan {
            switch_at: 150,
            edge_fraction: 0.75,
            expansion: None,
        };
        let (mean, se) = mean_and_se(
            |seed| {
                let mut a = Ats4c::with_plan(60, seed, plan.clone()).unwrap();
                let k = run_stream(&mut a, &edges, |_, _| {});
                assert_eq!(a.regime(), Regime::Tiered);
                k
            },
            20_000,
        );
        assert!((mean - truth).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn forced_expansion_and_merge_are_unbiased() {
        let edges = sparse_cliques(7);
        let truth = 60.0;
        let plan = ForcedPlan {
            switch_at: 120,
            edge_fraction: 0.85,
            expansion: Some((300, 0.7)),
        };
        let mut merged = 0;
        let (mean, se) = mean_and_se(
            |seed| {
                let mut a = Ats4c::with_plan(60, seed, plan.clone()).unwrap();
                let k = run_stream(&mut a, &edges, |_, _| {});
                a.check_indexes().unwrap();
                k
            },
            20_000,
        );
        for seed in 0..50 {
            let mut a = Ats4c::with_plan(60, seed, plan.clone()).unwrap();
            run_stream(&mut a, &edges, |_, _| {});
            let tier = a.tier.as_ref().unwrap();
            merged += tier
                .regions
                .iter()
                .filter(|r| r.merged_at.is_some())
                .count();
        }
        assert!(merged > 0, "merge path never exercised");
        assert!((mean - truth).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn adaptive_switches_on_sparse_stream() {
        let edges = sparse_cliques(3);
        let mut a = Ats4c::new(60, 1).unwrap();
        run_stream(&mut a, &edges, |_, _| {});
        assert_eq!(a.regime(), Regime::Tiered);
        a.check_indexes().unwrap();
    }

    #[test]
    fn region_pair_probabilities() {
        let mut r = Region::fresh(4);
        r.count = 3.0;
        assert_eq!(r.direct_pair(), 1.0);
        r.count = 10.0;
        assert!((r.direct_pair() - joint_inclusion(2, 10, 4)).abs() < 1e-15);
        assert!((r.marginal() - 0.4).abs() < 1e-15);
    }
}
