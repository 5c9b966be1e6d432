//! The streaming estimators. Every step runs in the same order: estimate
//! update, substructure-sample update, edge-sample update.

mod ats4c;
mod fiveest;
mod fourest;
pub mod sample;
mod ts4c1;
mod ts4c2;
mod ts5c;

use std::fmt;
use std::str::FromStr;

pub use ats4c::{Ats4c, ForcedPlan, Regime};
pub use fiveest::FiveEst;
pub use fourest::FourEst;
pub use sample::{EdgeSample, TriangleRecord};
pub use ts4c1::Ts4c1;
pub use ts4c2::Ts4c2;
pub use ts5c::{CliqueRecord4, Ts5c};

use crate::error::DomainError;
use crate::stream::VertexId;

/// Steps between index self-checks in debug builds, at least the memory size
/// so the O(M) check stays amortized O(1).
const CHECK_EVERY: u64 = 1024;

pub(crate) fn should_check(t: u64, memory: u64) -> bool {
    cfg!(debug_assertions) && t.is_multiple_of(CHECK_EVERY.max(memory))
}

pub trait CliqueEstimator: Send {
    /// Processes the next stream edge and returns the updated estimate.
    /// Self-loops are ignored and do not advance time.
    fn process_edge(&mut self, u: VertexId, v: VertexId) -> f64;
    fn estimate(&self) -> f64;
    fn time(&self) -> u64;
    fn kind(&self) -> EstimatorKind;
    /// Compares every index with a rebuild from the reservoirs.
    fn check_indexes(&self) -> Result<(), String>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    FourEst,
    Ts4c1,
    Ts4c2,
    Ats4c,
    Ts5c,
    FiveEst,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        EstimatorKind::FourEst,
        EstimatorKind::Ts4c1,
        EstimatorKind::Ts4c2,
        EstimatorKind::Ats4c,
        EstimatorKind::Ts5c,
        EstimatorKind::FiveEst,
    ];

    /// Clique size the estimator counts.
    pub fn clique_size(self) -> usize {
        match self {
            EstimatorKind::Ts5c | EstimatorKind::FiveEst => 5,
            _ => 4,
        }
    }

    /// Default fraction of memory given to edges for the two-tier variants.
    pub fn default_edge_fraction(self) -> Option<f64> {
        match self {
            EstimatorKind::Ts4c1 | EstimatorKind::Ts5c => Some(0.8),
            EstimatorKind::Ts4c2 => Some(2.0 / 3.0),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::FourEst => "fourest",
            EstimatorKind::Ts4c1 => "ts4c1",
            EstimatorKind::Ts4c2 => "ts4c2",
            EstimatorKind::Ats4c => "ats4c",
            EstimatorKind::Ts5c => "ts5c",
            EstimatorKind::FiveEst => "fiveest",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| DomainError::new(format!("unknown estimator {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub memory: u64,
    /// Edge share of memory for two-tier estimators; the kind's default when
    /// unset. Ignored by single-reservoir estimators and ATS4C.
    pub edge_fraction: Option<f64>,
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind, memory: u64) -> Self {
        EstimatorSpec {
            kind,
            memory,
            edge_fraction: None,
        }
    }

    /// `(M_e, M_sub)` for two-tier estimators.
    pub fn split(&self) -> Result<(u64, u64), DomainError> {
        let alpha = self
            .edge_fraction
            .or(self.kind.default_edge_fraction())
            .ok_or_else(|| DomainError::new(format!("{} has no memory split", self.kind)))?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DomainError::new(format!(
                "edge fraction {alpha} not in (0,1)"
            )));
        }
        let me = (alpha * self.memory as f64 + 1e-9).floor() as u64;
        Ok((me, self.memory.saturating_sub(me)))
    }
}

pub fn build_estimator(
    spec: &EstimatorSpec,
    seed: u64,
) -> Result<Box<dyn CliqueEstimator>, DomainError> {
    Ok(match spec.kind {
        EstimatorKind::FourEst => Box::new(FourEst::new(spec.memory, seed)?),
        EstimatorKind::FiveEst => Box::new(FiveEst::new(spec.memory, seed)?),
        EstimatorKind::Ats4c => Box::new(Ats4c::new(spec.memory, seed)?),
        EstimatorKind::Ts4c1 => {
            let (me, md) = spec.split()?;
            Box::new(Ts4c1::new(me, md, seed)?)
        }
        EstimatorKind::Ts4c2 => {
            let (me, md) = spec.split()?;
            Box::new(Ts4c2::new(me, md, seed)?)
        }
        EstimatorKind::Ts5c => {
            let (me, mc) = spec.split()?;
            Box::new(Ts5c::new(me, mc, seed)?)
        }
    })
}

/// Feeds `edges` through `est`, calling `on_step(t, estimate)` after each.
pub fn run_stream<F>(
    est: &mut dyn CliqueEstimator,
    edges: &[(VertexId, VertexId)],
    mut on_step: F,
) -> f64
where
    F: FnMut(u64, f64),
{
    for &(u, v) in edges {
        let k = est.process_edge(u, v);
        on_step(est.time(), k);
    }
    est.estimate()
}

fn usize_cap(x: u64) -> Result<usize, DomainError> {
    usize::try_from(x).map_err(|_| DomainError::new("capacity does not fit in memory"))
}

#[cfg(test)]
pub(crate) mod test_graphs {
    use crate::stream::VertexId;

    pub fn complete(n: u64) -> Vec<(VertexId, VertexId)> {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((VertexId(a), VertexId(b)));
            }
        }
        e
    }

    /// A cycle; no triangles at all.
    pub fn cycle(n: u64) -> Vec<(VertexId, VertexId)> {
        (0..n)
            .map(|i| (VertexId(i), VertexId((i + 1) % n)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits() {
        let s = EstimatorSpec::new(EstimatorKind::Ts4c1, 500);
        assert_eq!(s.split().unwrap(), (400, 100));
        let s = EstimatorSpec::new(EstimatorKind::Ts4c2, 500);
        assert_eq!(s.split().unwrap(), (333, 167));
        assert!(EstimatorSpec::new(EstimatorKind::FourEst, 500)
            .split()
            .is_err());
        let bad = EstimatorSpec {
            edge_fraction: Some(1.0),
            ..EstimatorSpec::new(EstimatorKind::Ts4c1, 10)
        };
        assert!(bad.split().is_err());
    }

    #[test]
    fn kinds_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("nope".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn every_kind_is_deterministic() {
        let edges = crate::synth::generate_ba(&crate::synth::BaConfig {
            n: 80,
            m: 6,
            seed: 4,
        })
        .unwrap()
        .into_iter()
        .map(|(a, b)| (VertexId(a), VertexId(b)))
        .collect::<Vec<_>>();
        for k in EstimatorKind::ALL {
            let spec = EstimatorSpec::new(k, 120);
            let mut a = build_estimator(&spec, 11).unwrap();
            let mut b = build_estimator(&spec, 11).unwrap();
            let mut ta = Vec::new();
            let mut tb = Vec::new();
            run_stream(a.as_mut(), &edges, |_, x| ta.push(x.to_bits()));
            run_stream(b.as_mut(), &edges, |_, x| tb.push(x.to_bits()));
            assert_eq!(ta, tb, "{k}");
            a.check_indexes().unwrap();
        }
    }
}
