//! Detection probabilities of a 4-clique (or 5-clique) at its closing edge.

use crate::error::DomainError;
use crate::reservoir::joint_inclusion;

fn clamp(x: f64) -> f64 {
    x.min(1.0)
}

fn ratio(num: u64, den: u64) -> f64 {
    clamp(num as f64 / den as f64)
}

fn check_distinct(ts: &[u64], t6: u64) -> Result<(), DomainError> {
    for (i, &a) in ts.iter().enumerate() {
        if a == 0 {
            return Err(DomainError::new("arrival indexes start at 1"));
        }
        if a >= t6 {
            return Err(DomainError::new(format!(
                "closing index {t6} must exceed every other index (found {a})"
            )));
        }
        if ts[i + 1..].contains(&a) {
            return Err(DomainError::new(format!("duplicate arrival index {a}")));
        }
    }
    Ok(())
}

/// Inputs for the triangle-plus-companions detection path. `triangle` holds
/// the arrival indexes of the resident triangle's three edges and
/// `companions` the two edges joining the fourth vertex to it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CliqueTimestamps4C1 {
    pub triangle: [u64; 3],
    pub companions: [u64; 2],
    pub t6: u64,
    pub edge_capacity: u64,
    pub triangle_capacity: u64,
    pub triangles_seen: u64,
}

pub fn prob_clique_ts4c1(ts: &CliqueTimestamps4C1) -> Result<f64, DomainError> {
    let m = ts.edge_capacity;
    if m < 5 {
        return Err(DomainError::new("edge capacity must be at least 5"));
    }
    if ts.triangle_capacity < 1 {
        return Err(DomainError::new("triangle capacity must be at least 1"));
    }
    if ts.triangles_seen == 0 {
        return Err(DomainError::new(
            "no triangle observed, nothing can be resident",
        ));
    }
    let [t1, t2, t4] = ts.triangle;
    let [t3, t5] = ts.companions;
    check_distinct(&[t1, t2, t3, t4, t5], ts.t6)?;
    let t6 = ts.t6;

    let tstar = t1.max(t2).max(t4).max(m + 1);
    let pre = ratio(m, tstar - 1) * ratio(m - 1, tstar - 2);
    let tri = ratio(ts.triangle_capacity, ts.triangles_seen);
    let (lo, hi) = (t3.min(t5), t3.max(t5));
    let rest = if t6 <= m {
        1.0
    } else if lo > tstar {
        ratio(m, t6 - 1) * ratio(m - 1, t6 - 2)
    } else if hi > tstar {
        ratio(m - 1, t6 - 2) * ratio(m - 2, tstar - 3) * ratio(tstar - 1, t6 - 1)
    } else {
        ratio(m - 2, tstar - 3)
            * ratio(m - 3, tstar - 4)
            * ratio(tstar - 1, t6 - 1)
            * ratio(tstar - 2, t6 - 2)
    };
    Ok(pre * tri * rest)
}

/// Two triangles sharing the edge `t1`: T1 = {t1, t2, t4}, T2 = {t1, t3, t5}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CliqueTimestamps4C2 {
    pub t1: u64,
    pub t2: u64,
    pub t3: u64,
    pub t4: u64,
    pub t5: u64,
    pub t6: u64,
    pub edge_capacity: u64,
    pub triangle_capacity: u64,
    pub triangles_seen: u64,
}

/// Arrival-order cases for the conditional factor, after relabelling so that
/// `t2 > t4` and `t3 > t5`. `M` is the edge capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ts4c2Case {
    /// max(t1, t2) <= M
    FirstWithinCapacity,
    /// t1 > t2 and t1 > t3
    SharedLast,
    /// t3 > t1 > max(t5, t2)
    SharedBetweenSecondPair,
    /// t3 > t2 > max(t5, t1)
    FirstPairBetweenSecondPair,
    /// t5 > t1 > t2
    SharedBeforeSecondPair,
    /// t5 > t2 > t1
    FirstPairBeforeSecondPair,
    /// t2 > t1 > max(M, t4, t3)
    SharedBetweenFirstPairLate,
    /// t2 > t1 > max(t4, t3), t1 <= M
    SharedBetweenFirstPairEarly,
    /// t2 > t3 > max(M, t5, t4, t1)
    SecondPairBetweenFirstPairLate,
    /// t2 > t3 > max(t5, t4, t1), t3 <= M
    SecondPairBetweenFirstPairEarly,
    /// t4 > t1 > t3
    SharedAfterSecondPair,
    /// t4 > t3 > max(M, t1)
    SecondPairBeforeFirstPairLate,
    /// t4 > t3 > t1, t3 <= M
    SecondPairBeforeFirstPairEarly,
}

impl Ts4c2Case {
    pub const ALL: [Ts4c2Case; 13] = [
        Ts4c2Case::FirstWithinCapacity,
        Ts4c2Case::SharedLast,
        Ts4c2Case::SharedBetweenSecondPair,
        Ts4c2Case::FirstPairBetweenSecondPair,
        Ts4c2Case::SharedBeforeSecondPair,
        Ts4c2Case::FirstPairBeforeSecondPair,
        Ts4c2Case::SharedBetweenFirstPairLate,
        Ts4c2Case::SharedBetweenFirstPairEarly,
        Ts4c2Case::SecondPairBetweenFirstPairLate,
        Ts4c2Case::SecondPairBetweenFirstPairEarly,
        Ts4c2Case::SharedAfterSecondPair,
        Ts4c2Case::SecondPairBeforeFirstPairLate,
        Ts4c2Case::SecondPairBeforeFirstPairEarly,
    ];
}

impl CliqueTimestamps4C2 {
    fn validate(&self) -> Result<(), DomainError> {
        if self.edge_capacity < 5 {
            return Err(DomainError::new("edge capacity must be at least 5"));
        }
        if self.triangle_capacity < 2 {
            return Err(DomainError::new("triangle capacity must be at least 2"));
        }
        check_distinct(&[self.t1, self.t2, self.t3, self.t4, self.t5], self.t6)
    }

    fn canonical(&self) -> (u64, u64, u64, u64, u64) {
        (
            self.t1,
            self.t2.max(self.t4),
            self.t3.max(self.t5),
            self.t2.min(self.t4),
            self.t3.min(self.t5),
        )
    }

    pub fn case(&self) -> Result<Ts4c2Case, DomainError> {
        self.validate()?;
        Ok(self.case_unchecked())
    }

    fn case_unchecked(&self) -> Ts4c2Case {
        use Ts4c2Case::*;
        let m = self.edge_capacity;
        let (t1, t2, t3, t4, t5) = self.canonical();
        if t1.max(t2) <= m {
            FirstWithinCapacity
        } else if t1 > t2 {
            if t1 > t3 {
                SharedLast
            } else if t5 < t1 {
                SharedBetweenSecondPair
            } else {
                SharedBeforeSecondPair
            }
        } else if t3 > t2 {
            if t5 < t2 {
                FirstPairBetweenSecondPair
            } else {
                FirstPairBeforeSecondPair
            }
        } else if t1 > t3 {
            if t4 < t1 {
                if t1 > m {
                    SharedBetweenFirstPairLate
                } else {
                    SharedBetweenFirstPairEarly
                }
            } else {
                SharedAfterSecondPair
            }
        } else if t4 < t3 {
            if t3 > m {
                SecondPairBetweenFirstPairLate
            } else {
                SecondPairBetweenFirstPairEarly
            }
        } else if t3 > m {
            SecondPairBeforeFirstPairLate
        } else {
            SecondPairBeforeFirstPairEarly
        }
    }
}

pub fn prob_clique_ts4c2(ts: &CliqueTimestamps4C2) -> Result<f64, DomainError> {
    use Ts4c2Case::*;
    ts.validate()?;
    let m = ts.edge_capacity;
    let (t1, t2, t3, _, _) = ts.canonical();
    let tdeg = ts.t1.max(ts.t3).max(ts.t5);
    let pre = if tdeg <= m + 1 {
        1.0
    } else {
        clamp(m as f64 / (tdeg - 1) as f64 * (m - 1) as f64 / (tdeg - 2) as f64)
    };
    let (md, tau) = (ts.triangle_capacity, ts.triangles_seen);
    let tri = if tau <= md {
        1.0
    } else {
        clamp(md as f64 / tau as f64 * (md - 1) as f64 / (tau - 1) as f64)
    };
    let r = ratio;
    let rest = match ts.case_unchecked() {
        FirstWithinCapacity => 1.0,
        SharedLast => r(m - 2, t1 - 3) * r(m - 3, t1 - 4),
        SharedBetweenSecondPair => r(m - 2, t1 - 3) * r(m - 1, t1 - 2),
        FirstPairBetweenSecondPair => r(m - 2, t2 - 3),
        SharedBeforeSecondPair => r(m, t1 - 1) * r(m - 1, t1 - 2),
        FirstPairBeforeSecondPair => r(m - 1, t2 - 2),
        SharedBetweenFirstPairLate => r(m - 1, t2 - 2) * r(m - 2, t1 - 3) * r(t1 - 1, t2 - 1),
        SharedBetweenFirstPairEarly => r(m - 1, t2 - 2) * r(m, t2 - 1),
        SecondPairBetweenFirstPairLate => r(t3 - 1, t2 - 1) * r(t3 - 2, t2 - 2) * r(m - 2, t3 - 3),
        SecondPairBetweenFirstPairEarly => r(m, t2 - 1) * r(m - 1, t2 - 2),
        SharedAfterSecondPair => r(m, t2 - 1) * r(m - 1, t2 - 2),
        SecondPairBeforeFirstPairLate => r(m - 1, t2 - 2) * r(t3 - 1, t2 - 1),
        SecondPairBeforeFirstPairEarly => r(m - 1, t2 - 2) * r(m, t2 - 1),
    };
    Ok(pre * tri * clamp(rest))
}

/// Five earlier edges resident at the closing step.
pub fn prob_clique_fourest(t6: u64, m: u64) -> Result<f64, DomainError> {
    if m < 5 {
        return Err(DomainError::new("FourEst needs M >= 5"));
    }
    if t6 == 0 {
        return Err(DomainError::new("arrival indexes start at 1"));
    }
    Ok(prefix_inclusion(5, t6, m))
}

/// Nine earlier edges resident when the tenth edge of a 5-clique arrives.
pub fn prob_clique_fiveest(t10: u64, m: u64) -> Result<f64, DomainError> {
    if m < 9 {
        return Err(DomainError::new("FiveEst needs M >= 9"));
    }
    if t10 == 0 {
        return Err(DomainError::new("arrival indexes start at 1"));
    }
    Ok(prefix_inclusion(9, t10, m))
}

fn prefix_inclusion(factors: u64, t: u64, m: u64) -> f64 {
    if t <= m + 1 {
        return 1.0;
    }
    (0..factors).map(|i| ratio(m - i, t - 1 - i)).product()
}

pub fn prob_clique_ts5c(
    t: u64,
    t_star: u64,
    cliques_seen: u64,
    edge_capacity: u64,
    clique_capacity: u64,
) -> Result<f64, DomainError> {
    if edge_capacity < 3 || clique_capacity < 1 {
        return Err(DomainError::new("TS5C needs M_e >= 3 and M_C >= 1"));
    }
    if cliques_seen == 0 {
        return Err(DomainError::new("no 4-clique observed"));
    }
    if t_star == 0 || t_star >= t {
        return Err(DomainError::new(
            "4-clique detection must precede the current step",
        ));
    }
    let e = ratio(edge_capacity, t);
    let s = ratio(edge_capacity, t_star);
    Ok(ratio(clique_capacity, cliques_seen) * e.powi(3) * s.powi(5))
}

/// State of an edge sample right after step `step`. `before_resize` selects
/// the state just before a capacity change applied at that step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SampleState {
    pub step: u64,
    pub before_resize: bool,
}

impl SampleState {
    pub fn after(step: u64) -> Self {
        SampleState {
            step,
            before_resize: false,
        }
    }

    pub(crate) fn order_key(&self) -> (u64, u8) {
        (self.step, if self.before_resize { 0 } else { 1 })
    }
}

/// Capacity of a uniform edge sample over time.
pub trait CapacitySchedule {
    fn capacity(&self, state: SampleState) -> u64;
}

pub struct ConstantCapacity(pub u64);

impl CapacitySchedule for ConstantCapacity {
    fn capacity(&self, _: SampleState) -> u64 {
        self.0
    }
}

fn inclusion(n: u64, state: SampleState, sched: &impl CapacitySchedule) -> f64 {
    joint_inclusion(n, state.step, sched.capacity(state))
}

/// Probability that `first` is inside the sample at `s1` and `second` inside
/// the sample at `s2` (`s1 <= s2`). Items are arrival indexes; the sample must
/// be a uniform subset of the stream prefix at every state, which holds for
/// reservoir updates and uniform shrinking.
pub fn staged_inclusion(
    first: &[u64],
    s1: SampleState,
    second: &[u64],
    s2: SampleState,
    sched: &impl CapacitySchedule,
) -> f64 {
    debug_assert!(s1.order_key() <= s2.order_key());
    if s1 == s2 {
        let mut all: Vec<u64> = first.iter().chain(second).copied().collect();
        all.sort_unstable();
        all.dedup();
        return inclusion(all.len() as u64, s1, sched);
    }
    let (mut shared, mut old, mut new) = (0, 0, 0);
    for x in second {
        if first.contains(x) {
            shared += 1;
        } else if *x <= s1.step {
            old += 1;
        } else {
            new += 1;
        }
    }
    let base = inclusion(shared + old, s1, sched);
    if base == 0.0 {
        return 0.0;
    }
    inclusion(first.len() as u64 + old, s1, sched) * inclusion(shared + old + new, s2, sched) / base
}

/// Edge part of the two-triangle detection, via the staged formula. Useful as
/// an independent route to the case table.
pub fn ts4c2_edge_part_staged(ts: &CliqueTimestamps4C2) -> f64 {
    let a = ts.t1.max(ts.t2).max(ts.t4);
    let b = ts.t1.max(ts.t3).max(ts.t5);
    let others = |tri: [u64; 3], close: u64| -> Vec<u64> {
        tri.into_iter().filter(|&x| x != close).collect()
    };
    let x1 = others([ts.t1, ts.t2, ts.t4], a);
    let x2 = others([ts.t1, ts.t3, ts.t5], b);
    let sched = ConstantCapacity(ts.edge_capacity);
    let (s1, s2) = (SampleState::after(a - 1), SampleState::after(b - 1));
    if a <= b {
        staged_inclusion(&x1, s1, &x2, s2, &sched)
    } else {
        staged_inclusion(&x2, s2, &x1, s1, &sched)
    }
}
