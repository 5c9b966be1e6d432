use std::ffi::CStr;
use std::ptr;

use motifstream_ffi::*;

fn last_error() -> String {
    let p = ms_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn k(n: u64) -> Vec<(u64, u64)> {
    let mut e = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            e.push((a, b));
        }
    }
    e
}

#[test]
fn estimator_lifecycle_exact_on_k5() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            ms_estimator_new(MsKind::FourEst as u32, 100, 0.0, 1, &mut h),
            MsStatus::Ok
        );
        let mut est = -1.0;
        for (u, v) in k(5) {
            assert_eq!(ms_estimator_process_edge(h, u, v, &mut est), MsStatus::Ok);
        }
        assert_eq!(est, 5.0);
        let mut t = 0;
        assert_eq!(ms_estimator_time(h, &mut t), MsStatus::Ok);
        assert_eq!(t, 10);
        ms_estimator_free(h);
    }
}

#[test]
fn batch_matches_single() {
    let edges = k(7);
    let us: Vec<u64> = edges.iter().map(|e| e.0).collect();
    let vs: Vec<u64> = edges.iter().map(|e| e.1).collect();
    unsafe {
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        ms_estimator_new(MsKind::Ts4c2 as u32, 12, 0.0, 9, &mut a);
        ms_estimator_new(MsKind::Ts4c2 as u32, 12, 0.0, 9, &mut b);
        assert_eq!(
            ms_estimator_process_edges(a, us.as_ptr(), vs.as_ptr(), us.len()),
            MsStatus::Ok
        );
        for (u, v) in &edges {
            ms_estimator_process_edge(b, *u, *v, ptr::null_mut());
        }
        let (mut x, mut y) = (0.0, 0.0);
        ms_estimator_estimate(a, &mut x);
        ms_estimator_estimate(b, &mut y);
        assert_eq!(x, y);
        ms_estimator_free(a);
        ms_estimator_free(b);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            ms_estimator_new(MsKind::FourEst as u32, 3, 0.0, 1, &mut h),
            MsStatus::InvalidArgument
        );
        assert!(h.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            ms_estimator_new(77, 100, 0.0, 1, &mut h),
            MsStatus::InvalidArgument
        );
        assert!(last_error().contains("77"));
        assert_eq!(
            ms_estimator_new(0, 100, 0.0, 1, ptr::null_mut()),
            MsStatus::NullPointer
        );
        assert_eq!(
            ms_estimator_estimate(ptr::null(), ptr::null_mut()),
            MsStatus::NullPointer
        );
        let mut p = 0.0;
        assert_eq!(ms_prob_fourest(10, 4, &mut p), MsStatus::InvalidArgument);
        ms_estimator_free(ptr::null_mut());
        ms_oracle_free(ptr::null_mut());
    }
}

#[test]
fn oracle_counts() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ms_oracle_new(&mut g), MsStatus::Ok);
        let mut made = MsCounts::default();
        for (u, v) in k(5) {
            assert_eq!(ms_oracle_insert_edge(g, u, v, &mut made), MsStatus::Ok);
        }
        // the last edge of K5 closes 3 triangles, 3 four-cliques, 1 five-clique
        assert_eq!(
            made,
            MsCounts {
                triangles: 3,
                cliques4: 3,
                cliques5: 1
            }
        );
        let mut c = MsCounts::default();
        ms_oracle_counts(g, &mut c);
        assert_eq!(
            c,
            MsCounts {
                triangles: 10,
                cliques4: 5,
                cliques5: 1
            }
        );
        assert_eq!(
            ms_oracle_insert_edge(g, 3, 3, ptr::null_mut()),
            MsStatus::InvalidArgument
        );
        ms_oracle_free(g);
    }
}

#[test]
fn kernels() {
    unsafe {
        let mut p = 0.0;
        assert_eq!(ms_prob_fourest(7, 5, &mut p), MsStatus::Ok);
        assert!((p - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(ms_joint_inclusion(2, 10, 4, &mut p), MsStatus::Ok);
        assert!((p - 4.0 * 3.0 / 90.0).abs() < 1e-12);
        assert_eq!(ms_prob_fiveest(12, 10, &mut p), MsStatus::Ok);
        assert!((p - 2.0 / 11.0).abs() < 1e-12);
        let i1 = MsTs4c1Input {
            triangle: [1, 2, 3],
            companions: [4, 5],
            t6: 6,
            edge_capacity: 10,
            triangle_capacity: 5,
            triangles_seen: 10,
        };
        assert_eq!(ms_prob_ts4c1(&i1, &mut p), MsStatus::Ok);
        assert!((p - 0.5).abs() < 1e-12);
        let i2 = MsTs4c2Input {
            t: [1, 2, 3, 4, 5, 6],
            edge_capacity: 10,
            triangle_capacity: 5,
            triangles_seen: 6,
        };
        assert_eq!(ms_prob_ts4c2(&i2, &mut p), MsStatus::Ok);
        assert!((p - 5.0 / 6.0 * 4.0 / 5.0).abs() < 1e-12);
        let bad = MsTs4c2Input {
            t: [1, 1, 3, 4, 5, 6],
            ..i2
        };
        assert_eq!(ms_prob_ts4c2(&bad, &mut p), MsStatus::InvalidArgument);
        assert_eq!(ms_prob_ts4c2(ptr::null(), &mut p), MsStatus::NullPointer);
    }
}
