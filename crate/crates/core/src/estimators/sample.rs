use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::DomainError;
use crate::reservoir::Reservoir;
use crate::stream::{EdgeKey, RngHandle, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampledEdge {
    pub key: EdgeKey,
    pub t: u64,
}

/// Edge reservoir plus an adjacency index carrying arrival indexes.
#[derive(Debug)]
pub struct EdgeSample {
    res: Reservoir<SampledEdge>,
    adj: FxHashMap<VertexId, FxHashMap<VertexId, u64>>,
}

impl EdgeSample {
    pub fn new(capacity: usize) -> Result<Self, DomainError> {
        Ok(EdgeSample {
            res: Reservoir::new(capacity)?,
            adj: FxHashMap::default(),
        })
    }

    pub fn offer(&mut self, u: VertexId, v: VertexId, t: u64, rng: &mut RngHandle) {
        let out = self.res.offer(
            SampledEdge {
                key: EdgeKey::new(u, v),
                t,
            },
            rng,
        );
        if let Some(old) = out.evicted {
            self.unlink(old.key);
        }
        if out.inserted {
            self.link(u, v, t);
        }
    }

    /// Uniformly evicts edges down to `capacity`.
    pub fn shrink(&mut self, capacity: usize, rng: &mut RngHandle) {
        for old in self.res.shrink(capacity, rng) {
            self.unlink(old.key);
        }
    }

    fn link(&mut self, u: VertexId, v: VertexId, t: u64) {
        self.adj.entry(u).or_default().insert(v, t);
        self.adj.entry(v).or_default().insert(u, t);
    }

    fn unlink(&mut self, k: EdgeKey) {
        for (a, b) in [(k.0, k.1), (k.1, k.0)] {
            if let Some(n) = self.adj.get_mut(&a) {
                n.remove(&b);
                if n.is_empty() {
                    self.adj.remove(&a);
                }
            }
        }
    }

    pub fn edge_time(&self, a: VertexId, b: VertexId) -> Option<u64> {
        self.adj.get(&a).and_then(|n| n.get(&b)).copied()
    }

    pub fn contains(&self, a: VertexId, b: VertexId) -> bool {
        self.edge_time(a, b).is_some()
    }

    pub fn neighbors(&self, a: VertexId) -> Option<&FxHashMap<VertexId, u64>> {
        self.adj.get(&a)
    }

    /// Common sampled neighbours `w` of `u` and `v` as `(w, t_uw, t_vw)`,
    /// sorted by vertex id.
    pub fn common_neighbors(&self, u: VertexId, v: VertexId, out: &mut Vec<(VertexId, u64, u64)>) {
        out.clear();
        let (Some(nu), Some(nv)) = (self.adj.get(&u), self.adj.get(&v)) else {
            return;
        };
        if nu.len() <= nv.len() {
            for (w, &tu) in nu {
                if let Some(&tv) = nv.get(w) {
                    out.push((*w, tu, tv));
                }
            }
        } else {
            for (w, &tv) in nv {
                if let Some(&tu) = nu.get(w) {
                    out.push((*w, tu, tv));
                }
            }
        }
        out.sort_unstable_by_key(|x| x.0);
    }

    pub fn items(&self) -> &[SampledEdge] {
        self.res.items()
    }

    pub fn len(&self) -> usize {
        self.res.len()
    }

    pub fn is_empty(&self) -> bool {
        self.res.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.res.capacity()
    }

    /// Rebuilds the adjacency from the reservoir and compares.
    pub fn check_index(&self) -> Result<(), String> {
        let mut fresh: FxHashMap<VertexId, FxHashMap<VertexId, u64>> = FxHashMap::default();
        for e in self.res.items() {
            fresh.entry(e.key.0).or_default().insert(e.key.1, e.t);
            fresh.entry(e.key.1).or_default().insert(e.key.0, e.t);
        }
        if fresh != self.adj {
            return Err("edge adjacency index out of sync".into());
        }
        Ok(())
    }
}

/// Triangle with the arrival index of each of its edges. `ts[0]` belongs to
/// (v0,v1), `ts[1]` to (v0,v2), `ts[2]` to (v1,v2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriangleRecord {
    pub v: [VertexId; 3],
    pub ts: [u64; 3],
    pub observed: u64,
}

impl TriangleRecord {
    /// Triangle closed by edge (u,v) at step `t` through common neighbour `w`.
    pub fn closed_by(u: VertexId, v: VertexId, w: VertexId, t: u64, t_uw: u64, t_vw: u64) -> Self {
        TriangleRecord {
            v: [u, v, w],
            ts: [t, t_uw, t_vw],
            observed: t,
        }
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.v.contains(&x)
    }

    pub fn edge_time(&self, a: VertexId, b: VertexId) -> Option<u64> {
        let [x, y, z] = self.v;
        let k = EdgeKey::new(a, b);
        if k == EdgeKey::new(x, y) {
            Some(self.ts[0])
        } else if k == EdgeKey::new(x, z) {
            Some(self.ts[1])
        } else if k == EdgeKey::new(y, z) {
            Some(self.ts[2])
        } else {
            None
        }
    }

    /// The two vertices other than `x`.
    pub fn others(&self, x: VertexId) -> (VertexId, VertexId) {
        let [a, b, c] = self.v;
        if x == a {
            (b, c)
        } else if x == b {
            (a, c)
        } else {
            (a, b)
        }
    }

    pub fn edges(&self) -> [EdgeKey; 3] {
        let [x, y, z] = self.v;
        [EdgeKey::new(x, y), EdgeKey::new(x, z), EdgeKey::new(y, z)]
    }

    pub fn closing_time(&self) -> u64 {
        self.ts.into_iter().max().unwrap()
    }
}

pub trait HasTriangle: Record {
    fn triangle(&self) -> &TriangleRecord;
}

impl HasTriangle for TriangleRecord {
    fn triangle(&self) -> &TriangleRecord {
        self
    }
}

/// Id-addressed record store with a vertex index and, optionally, an index
/// from each edge to the records that contain it.
#[derive(Debug)]
pub struct RecordStore<R> {
    records: FxHashMap<u64, R>,
    by_vertex: FxHashMap<VertexId, Vec<u64>>,
    by_edge: Option<FxHashMap<EdgeKey, Vec<u64>>>,
    next_id: u64,
}

pub trait Record {
    fn vertices(&self) -> &[VertexId];
    fn edge_keys(&self) -> Vec<EdgeKey>;
}

impl Record for TriangleRecord {
    fn vertices(&self) -> &[VertexId] {
        &self.v
    }
    fn edge_keys(&self) -> Vec<EdgeKey> {
        self.edges().to_vec()
    }
}

fn remove_id(list: &mut Vec<u64>, id: u64) {
    if let Some(i) = list.iter().position(|&x| x == id) {
        list.swap_remove(i);
    }
}

impl<R: Record> RecordStore<R> {
    pub fn new(edge_index: bool) -> Self {
        RecordStore {
            records: FxHashMap::default(),
            by_vertex: FxHashMap::default(),
            by_edge: edge_index.then(FxHashMap::default),
            next_id: 0,
        }
    }

    pub fn next_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    pub fn insert(&mut self, id: u64, rec: R) {
        for &x in rec.vertices() {
            self.by_vertex.entry(x).or_default().push(id);
        }
        if let Some(idx) = self.by_edge.as_mut() {
            for k in rec.edge_keys() {
                idx.entry(k).or_default().push(id);
            }
        }
        self.records.insert(id, rec);
    }

    pub fn remove(&mut self, id: u64) -> Option<R> {
        let rec = self.records.remove(&id)?;
        for x in rec.vertices() {
            if let Some(l) = self.by_vertex.get_mut(x) {
                remove_id(l, id);
                if l.is_empty() {
                    self.by_vertex.remove(x);
                }
            }
        }
        if let Some(idx) = self.by_edge.as_mut() {
            for k in rec.edge_keys() {
                if let Some(l) = idx.get_mut(&k) {
                    remove_id(l, id);
                    if l.is_empty() {
                        idx.remove(&k);
                    }
                }
            }
        }
        Some(rec)
    }

    pub fn get(&self, id: u64) -> Option<&R> {
        self.records.get(&id)
    }

    pub fn get_mut(&mut self, id: u64) -> Option<&mut R> {
        self.records.get_mut(&id)
    }

    pub fn at_vertex(&self, x: VertexId) -> &[u64] {
        self.by_vertex.get(&x).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn on_edge(&self, k: EdgeKey) -> &[u64] {
        self.by_edge
            .as_ref()
            .and_then(|m| m.get(&k))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.records.keys().copied()
    }

    pub fn check_index(&self) -> Result<(), String> {
        let norm = |m: &FxHashMap<VertexId, Vec<u64>>| {
            m.iter()
                .map(|(k, v)| (*k, v.iter().copied().collect::<FxHashSet<u64>>()))
                .collect::<FxHashMap<_, _>>()
        };
        let mut fresh: FxHashMap<VertexId, Vec<u64>> = FxHashMap::default();
        let mut fresh_edges: FxHashMap<EdgeKey, FxHashSet<u64>> = FxHashMap::default();
        for (&id, r) in &self.records {
            for &x in r.vertices() {
                fresh.entry(x).or_default().push(id);
            }
            for k in r.edge_keys() {
                fresh_edges.entry(k).or_default().insert(id);
            }
        }
        if norm(&fresh) != norm(&self.by_vertex) {
            return Err("vertex index out of sync".into());
        }
        if let Some(idx) = &self.by_edge {
            let have: FxHashMap<EdgeKey, FxHashSet<u64>> = idx
                .iter()
                .map(|(k, v)| (*k, v.iter().copied().collect()))
                .collect();
            if have != fresh_edges {
                return Err("edge index out of sync".into());
            }
        }
        Ok(())
    }
}

/// Reservoir of records addressed through a [`RecordStore`].
#[derive(Debug)]
pub struct SampledStore<R> {
    pub res: Reservoir<u64>,
    pub store: RecordStore<R>,
    pub offered: u64,
}

impl<R: Record> SampledStore<R> {
    pub fn new(capacity: usize, edge_index: bool) -> Result<Self, DomainError> {
        Ok(SampledStore {
            res: Reservoir::new(capacity)?,
            store: RecordStore::new(edge_index),
            offered: 0,
        })
    }

    pub fn offer(&mut self, rec: R, rng: &mut RngHandle) {
        self.offered += 1;
        let id = self.store.next_id();
        let out = self.res.offer(id, rng);
        if let Some(old) = out.evicted {
            self.store.remove(old);
        }
        if out.inserted {
            self.store.insert(id, rec);
        }
    }

    pub fn check_index(&self) -> Result<(), String> {
        if self.res.len() != self.store.len() {
            return Err("record store and reservoir disagree".into());
        }
        for id in self.res.items() {
            if self.store.get(*id).is_none() {
                return Err(format!("reservoir id {id} missing from store"));
            }
        }
        self.store.check_index()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vid(x: u64) -> VertexId {
        VertexId(x)
    }

    #[test]
    fn edge_sample_index_stays_consistent() {
        let mut rng = RngHandle::new(5);
        let mut s = EdgeSample::new(20).unwrap();
        let mut t = 0;
        for a in 0..15u64 {
            for b in a + 1..15 {
                t += 1;
                s.offer(vid(a), vid(b), t, &mut rng);
                s.check_index().unwrap();
            }
        }
        s.shrink(7, &mut rng);
        s.check_index().unwrap();
        assert_eq!(s.len(), 7);
    }

    #[test]
    fn common_neighbors_sorted() {
        let mut rng = RngHandle::new(1);
        let mut s = EdgeSample::new(100).unwrap();
        let edges = [(1, 9), (2, 9), (1, 4), (2, 4), (1, 2), (3, 9)];
        for (i, (a, b)) in edges.iter().enumerate() {
            s.offer(vid(*a), vid(*b), i as u64 + 1, &mut rng);
        }
        let mut out = Vec::new();
        s.common_neighbors(vid(1), vid(2), &mut out);
        assert_eq!(out, vec![(vid(4), 3, 4), (vid(9), 1, 2)]);
    }

    #[test]
    fn triangle_record_lookup() {
        let r = TriangleRecord::closed_by(vid(1), vid(2), vid(3), 10, 4, 7);
        assert_eq!(r.edge_time(vid(2), vid(1)), Some(10));
        assert_eq!(r.edge_time(vid(3), vid(1)), Some(4));
        assert_eq!(r.edge_time(vid(2), vid(3)), Some(7));
        assert_eq!(r.edge_time(vid(2), vid(4)), None);
        assert_eq!(r.others(vid(2)), (vid(1), vid(3)));
        assert_eq!(r.closing_time(), 10);
    }

    #[test]
    fn sampled_store_consistent() {
        let mut rng = RngHandle::new(2);
        let mut s = SampledStore::new(5, true).unwrap();
        for i in 0..40u64 {
            let r = TriangleRecord::closed_by(
                vid(i % 7),
                vid(i % 7 + 10),
                vid(i % 3 + 20),
                i + 3,
                i + 1,
                i + 2,
            );
            s.offer(r, &mut rng);
            s.check_index().unwrap();
        }
        assert_eq!(s.store.len(), 5);
        assert_eq!(s.offered, 40);
    }
}
