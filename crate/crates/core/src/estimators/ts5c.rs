use super::fourest::pairs_connected;
use super::sample::{EdgeSample, Record, SampledStore};
use super::{should_check, usize_cap, CliqueEstimator, EstimatorKind};
use crate::error::DomainError;
use crate::prob::prob_clique_ts5c;
use crate::stream::{EdgeKey, RngHandle, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CliqueRecord4 {
    pub v: [VertexId; 4],
    pub t_star: u64,
}

impl Record for CliqueRecord4 {
    fn vertices(&self) -> &[VertexId] {
        &self.v
    }
    fn edge_keys(&self) -> Vec<EdgeKey> {
        Vec::new()
    }
}

/// Edge reservoir plus a reservoir of observed 4-cliques.
#[derive(Debug)]
pub struct Ts5c {
    me: u64,
    mc: u64,
    t: u64,
    kappa: f64,
    edges: EdgeSample,
    cliques: SampledStore<CliqueRecord4>,
    rng: RngHandle,
    common: Vec<(VertexId, u64, u64)>,
}

impl Ts5c {
    pub fn new(me: u64, mc: u64, seed: u64) -> Result<Self, DomainError> {
        if me < 9 || mc < 1 {
            return Err(DomainError::new("TS5C needs M_e >= 9 and M_C >= 1"));
        }
        Ok(Ts5c {
            me,
            mc,
            t: 0,
            kappa: 0.0,
            edges: EdgeSample::new(usize_cap(me)?)?,
            cliques: SampledStore::new(usize_cap(mc)?, false)?,
            rng: RngHandle::new(seed),
            common: Vec::new(),
        })
    }

    fn scan(&self, a: VertexId, b: VertexId) -> f64 {
        let mut add = 0.0;
        for &id in self.cliques.store.at_vertex(a) {
            let rec = self.cliques.store.get(id).unwrap();
            if rec.v.contains(&b) {
                continue;
            }
            let Some(nb) = self.edges.neighbors(b) else {
                break;
            };
            if rec
                .v
                .iter()
                .filter(|&&x| x != a)
                .all(|x| nb.contains_key(x))
            {
                let p =
                    prob_clique_ts5c(self.t, rec.t_star, self.cliques.offered, self.me, self.mc)
                        .unwrap();
                add += 0.5 / p;
            }
        }
        add
    }
}

impl CliqueEstimator for Ts5c {
    fn process_edge(&mut self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return self.kappa;
        }
        self.t += 1;
        self.kappa += self.scan(u, v) + self.scan(v, u);

        self.edges.common_neighbors(u, v, &mut self.common);
        if pairs_connected(&self.edges, &self.common) > 0 {
            let c = &self.common;
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    if self.edges.contains(c[i].0, c[j].0) {
                        let rec = CliqueRecord4 {
                            v: [u, v, c[i].0, c[j].0],
                            t_star: self.t,
                        };
                        self.cliques.offer(rec, &mut self.rng);
                    }
                }
            }
        }

        self.edges.offer(u, v, self.t, &mut self.rng);
        if should_check(self.t, self.me + self.mc) {
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
        EstimatorKind::Ts5c
    }

    fn check_indexes(&self) -> Result<(), String> {
        self.edges.check_index()?;
        self.cliques.check_index()
    }
}
