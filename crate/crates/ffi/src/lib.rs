//! C ABI over the motifstream estimators, the exact oracle and the
//! probability kernels.
//!
//! Every call returns an `MsStatus`; on failure `ms_last_error` holds a
//! message for the calling thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use motifstream::oracle::ExactGraph;
use motifstream::prob::{
    prob_clique_fiveest, prob_clique_fourest, prob_clique_ts4c1, prob_clique_ts4c2,
    CliqueTimestamps4C1, CliqueTimestamps4C2,
};
use motifstream::{
    build_estimator, joint_inclusion_prob, CliqueEstimator, EstimatorKind, EstimatorSpec, VertexId,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Panic = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsKind {
    FourEst = 0,
    Ts4c1 = 1,
    Ts4c2 = 2,
    Ats4c = 3,
    Ts5c = 4,
    FiveEst = 5,
}

impl MsKind {
    fn from_raw(k: u32) -> Option<Self> {
        Some(match k {
            0 => MsKind::FourEst,
            1 => MsKind::Ts4c1,
            2 => MsKind::Ts4c2,
            3 => MsKind::Ats4c,
            4 => MsKind::Ts5c,
            5 => MsKind::FiveEst,
            _ => return None,
        })
    }
}

impl From<MsKind> for EstimatorKind {
    fn from(k: MsKind) -> Self {
        match k {
            MsKind::FourEst => EstimatorKind::FourEst,
            MsKind::Ts4c1 => EstimatorKind::Ts4c1,
            MsKind::Ts4c2 => EstimatorKind::Ts4c2,
            MsKind::Ats4c => EstimatorKind::Ats4c,
            MsKind::Ts5c => EstimatorKind::Ts5c,
            MsKind::FiveEst => EstimatorKind::FiveEst,
        }
    }
}

/// Opaque estimator handle.
pub struct MsEstimator(Box<dyn CliqueEstimator>);

/// Opaque exact-count handle.
pub struct MsOracle(ExactGraph);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MsCounts {
    pub triangles: u64,
    pub cliques4: u64,
    pub cliques5: u64,
}

/// Resident triangle `triangle`, companion edges `companions`, closing edge `t6`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MsTs4c1Input {
    pub triangle: [u64; 3],
    pub companions: [u64; 2],
    pub t6: u64,
    pub edge_capacity: u64,
    pub triangle_capacity: u64,
    pub triangles_seen: u64,
}

/// T1 = {t1, t2, t4}, T2 = {t1, t3, t5}, closing edge `t6`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MsTs4c2Input {
    pub t: [u64; 6],
    pub edge_capacity: u64,
    pub triangle_capacity: u64,
    pub triangles_seen: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (MsStatus, String)>) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            MsStatus::Panic
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> (MsStatus, String) {
    (MsStatus::InvalidArgument, e.to_string())
}

fn null(what: &str) -> (MsStatus, String) {
    (MsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (MsStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an estimator. `kind` is an `MsKind` value; `edge_fraction <= 0`
/// selects the kind's default split.
///
/// # Safety
/// `out_handle` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ms_estimator_new(
    kind: u32,
    memory: u64,
    edge_fraction: f64,
    seed: u64,
    out_handle: *mut *mut MsEstimator,
) -> MsStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let kind = MsKind::from_raw(kind)
            .ok_or_else(|| invalid(format!("unknown estimator kind {kind}")))?;
        let spec = EstimatorSpec {
            kind: kind.into(),
            memory,
            edge_fraction: (edge_fraction > 0.0).then_some(edge_fraction),
        };
        let est = build_estimator(&spec, seed).map_err(invalid)?;
        *slot = Box::into_raw(Box::new(MsEstimator(est)));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `ms_estimator_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ms_estimator_free(h: *mut MsEstimator) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Feeds one edge; writes the running estimate to `estimate` when non-null.
///
/// # Safety
/// `h` must be a live handle; `estimate` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ms_estimator_process_edge(
    h: *mut MsEstimator,
    u: u64,
    v: u64,
    estimate: *mut f64,
) -> MsStatus {
    guard(|| {
        let e = out(h, "handle")?;
        let k = e.0.process_edge(VertexId(u), VertexId(v));
        if let Some(o) = estimate.as_mut() {
            *o = k;
        }
        Ok(())
    })
}

/// Feeds `n` edges from parallel arrays.
///
/// # Safety
/// `h` must be a live handle; `us` and `vs` must each hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn ms_estimator_process_edges(
    h: *mut MsEstimator,
    us: *const u64,
    vs: *const u64,
    n: usize,
) -> MsStatus {
    guard(|| {
        let e = out(h, "handle")?;
        if n == 0 {
            return Ok(());
        }
        if us.is_null() || vs.is_null() {
            return Err(null("edge arrays"));
        }
        let (us, vs) = (
            std::slice::from_raw_parts(us, n),
            std::slice::from_raw_parts(vs, n),
        );
        for (&u, &v) in us.iter().zip(vs) {
            e.0.process_edge(VertexId(u), VertexId(v));
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `estimate` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_estimator_estimate(
    h: *const MsEstimator,
    estimate: *mut f64,
) -> MsStatus {
    guard(|| {
        let e = h.as_ref().ok_or_else(|| null("handle"))?;
        *out(estimate, "estimate")? = e.0.estimate();
        Ok(())
    })
}

/// Number of non-loop edges processed so far.
///
/// # Safety
/// `h` must be a live handle; `t` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_estimator_time(h: *const MsEstimator, t: *mut u64) -> MsStatus {
    guard(|| {
        let e = h.as_ref().ok_or_else(|| null("handle"))?;
        *out(t, "t")? = e.0.time();
        Ok(())
    })
}

/// # Safety
/// `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_oracle_new(out_handle: *mut *mut MsOracle) -> MsStatus {
    guard(|| {
        *out(out_handle, "out_handle")? = Box::into_raw(Box::new(MsOracle(ExactGraph::new())));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `ms_oracle_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ms_oracle_free(h: *mut MsOracle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Inserts an edge; `created` (if non-null) receives the cliques it closed.
///
/// # Safety
/// `h` must be a live handle; `created` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ms_oracle_insert_edge(
    h: *mut MsOracle,
    u: u64,
    v: u64,
    created: *mut MsCounts,
) -> MsStatus {
    guard(|| {
        let g = out(h, "handle")?;
        let c = g.0.insert_edge(VertexId(u), VertexId(v)).map_err(invalid)?;
        if let Some(o) = created.as_mut() {
            *o = MsCounts {
                triangles: c.triangles,
                cliques4: c.cliques4,
                cliques5: c.cliques5,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `counts` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_oracle_counts(h: *const MsOracle, counts: *mut MsCounts) -> MsStatus {
    guard(|| {
        let g = h.as_ref().ok_or_else(|| null("handle"))?;
        let c = g.0.counts();
        *out(counts, "counts")? = MsCounts {
            triangles: c.triangles,
            cliques4: c.cliques4,
            cliques5: c.cliques5,
        };
        Ok(())
    })
}

/// Probability that `k` fixed items of `t` are all in a size-`m` reservoir.
///
/// # Safety
/// `p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_joint_inclusion(k: u64, t: u64, m: u64, p: *mut f64) -> MsStatus {
    guard(|| {
        *out(p, "p")? = joint_inclusion_prob(k, t, m).map_err(invalid)?;
        Ok(())
    })
}

/// # Safety
/// `p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_prob_fourest(t6: u64, m: u64, p: *mut f64) -> MsStatus {
    guard(|| {
        *out(p, "p")? = prob_clique_fourest(t6, m).map_err(invalid)?;
        Ok(())
    })
}

/// # Safety
/// `p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_prob_fiveest(t10: u64, m: u64, p: *mut f64) -> MsStatus {
    guard(|| {
        *out(p, "p")? = prob_clique_fiveest(t10, m).map_err(invalid)?;
        Ok(())
    })
}

/// # Safety
/// `input` must be readable and `p` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_prob_ts4c1(input: *const MsTs4c1Input, p: *mut f64) -> MsStatus {
    guard(|| {
        let i = input.as_ref().ok_or_else(|| null("input"))?;
        let ts = CliqueTimestamps4C1 {
            triangle: i.triangle,
            companions: i.companions,
            t6: i.t6,
            edge_capacity: i.edge_capacity,
            triangle_capacity: i.triangle_capacity,
            triangles_seen: i.triangles_seen,
        };
        *out(p, "p")? = prob_clique_ts4c1(&ts).map_err(invalid)?;
        Ok(())
    })
}

/// # Safety
/// `input` must be readable and `p` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_prob_ts4c2(input: *const MsTs4c2Input, p: *mut f64) -> MsStatus {
    guard(|| {
        let i = input.as_ref().ok_or_else(|| null("input"))?;
        let [t1, t2, t3, t4, t5, t6] = i.t;
        let ts = CliqueTimestamps4C2 {
            t1,
            t2,
            t3,
            t4,
            t5,
            t6,
            edge_capacity: i.edge_capacity,
            triangle_capacity: i.triangle_capacity,
            triangles_seen: i.triangles_seen,
        };
        *out(p, "p")? = prob_clique_ts4c2(&ts).map_err(invalid)?;
        Ok(())
    })
}
