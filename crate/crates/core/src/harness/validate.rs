//! Monte-Carlo check of the closed-form detection probabilities against the
//! reservoir process they describe.

use std::fmt;

use crate::error::DomainError;
use crate::prob::{
    prob_clique_fiveest, prob_clique_fourest, prob_clique_ts4c1, prob_clique_ts4c2,
    CliqueTimestamps4C1, CliqueTimestamps4C2, Ts4c2Case,
};
use crate::reservoir::Reservoir;
use crate::stream::RngHandle;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    FourEst,
    FiveEst,
    Ts4c1,
    Ts4c2,
}

impl Kernel {
    fn arrivals(self) -> usize {
        match self {
            Kernel::FourEst => 5,
            Kernel::FiveEst => 9,
            Kernel::Ts4c1 | Kernel::Ts4c2 => 5,
        }
    }
}

/// One clique's arrival pattern. For the triangle kernels `arrivals` is
/// `[t1, t2, t3, t4, t5]` with T1 = {t1, t2, t4} and T2 = {t1, t3, t5};
/// `t_close` is the arrival of the last clique edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub kernel: Kernel,
    pub arrivals: Vec<u64>,
    pub t_close: u64,
    pub edge_capacity: u64,
    pub triangle_capacity: u64,
    pub triangles_seen: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathReport {
    pub label: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub fixture: String,
    pub runs: u64,
    pub paths: Vec<PathReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.paths.iter().all(|p| p.z.abs() <= 3.0)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.paths.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "{} {} analytic={:.6e} empirical={:.6e} z={:+.3} runs={} {}",
                self.fixture,
                p.label,
                p.analytic,
                p.empirical,
                p.z,
                self.runs,
                if p.z.abs() <= 3.0 { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

fn z_score(hits: u64, runs: u64, p: f64) -> f64 {
    let phat = hits as f64 / runs as f64;
    if p <= 0.0 || p >= 1.0 {
        return if phat == p { 0.0 } else { f64::INFINITY };
    }
    (phat - p) / (p * (1.0 - p) / runs as f64).sqrt()
}

struct Tri {
    edges: [u64; 3],
    close: u64,
    pos: u64,
}

fn triangles(f: &Fixture) -> Result<Vec<Tri>, DomainError> {
    let a = &f.arrivals;
    let mut tris: Vec<Tri> = [[a[0], a[1], a[3]], [a[0], a[2], a[4]]]
        .into_iter()
        .map(|edges| Tri {
            edges,
            close: *edges.iter().max().unwrap(),
            pos: 0,
        })
        .collect();
    if f.triangles_seen < 2 {
        return Err(DomainError::new("need at least two triangle offers"));
    }
    // Place the two offers in the triangle stream in closing order, roughly
    // proportional to when they close.
    let mut order = [0usize, 1];
    order.sort_by_key(|&i| tris[i].close);
    let tau = f.triangles_seen;
    let mut prev = 0;
    for (k, &i) in order.iter().enumerate() {
        let want = (tau * tris[i].close).div_ceil(f.t_close);
        let pos = want.max(prev + 1).min(tau - (1 - k as u64));
        tris[i].pos = pos;
        prev = pos;
    }
    Ok(tris)
}

fn analytic(f: &Fixture) -> Result<Vec<(&'static str, f64)>, DomainError> {
    let a = &f.arrivals;
    Ok(match f.kernel {
        Kernel::FourEst => vec![(
            "all-edges",
            prob_clique_fourest(f.t_close, f.edge_capacity)?,
        )],
        Kernel::FiveEst => vec![(
            "all-edges",
            prob_clique_fiveest(f.t_close, f.edge_capacity)?,
        )],
        Kernel::Ts4c1 => {
            let base = CliqueTimestamps4C1 {
                triangle: [a[0], a[1], a[3]],
                companions: [a[2], a[4]],
                t6: f.t_close,
                edge_capacity: f.edge_capacity,
                triangle_capacity: f.triangle_capacity,
                triangles_seen: f.triangles_seen,
            };
            let other = CliqueTimestamps4C1 {
                triangle: [a[0], a[2], a[4]],
                companions: [a[1], a[3]],
                ..base
            };
            vec![
                ("via-first-triangle", prob_clique_ts4c1(&base)?),
                ("via-second-triangle", prob_clique_ts4c1(&other)?),
            ]
        }
        Kernel::Ts4c2 => vec![("both-triangles", prob_clique_ts4c2(&ts4c2_of(f))?)],
    })
}

fn ts4c2_of(f: &Fixture) -> CliqueTimestamps4C2 {
    let a = &f.arrivals;
    CliqueTimestamps4C2 {
        t1: a[0],
        t2: a[1],
        t3: a[2],
        t4: a[3],
        t5: a[4],
        t6: f.t_close,
        edge_capacity: f.edge_capacity,
        triangle_capacity: f.triangle_capacity,
        triangles_seen: f.triangles_seen,
    }
}

/// Simulates `runs` independent passes of the sampling process for the
/// fixture and compares hit frequencies with the closed forms.
pub fn validate_prob(f: &Fixture, runs: u64, seed: u64) -> Result<ValidationReport, DomainError> {
    if runs == 0 {
        return Err(DomainError::new("runs must be positive"));
    }
    if f.arrivals.len() != f.kernel.arrivals() {
        return Err(DomainError::new(format!(
            "{:?} needs {} arrivals, got {}",
            f.kernel,
            f.kernel.arrivals(),
            f.arrivals.len()
        )));
    }
    let want = analytic(f)?;
    let me = usize::try_from(f.edge_capacity)
        .map_err(|_| DomainError::new("edge capacity too large"))?;
    let mut edges = Reservoir::<u64>::new(me)?;
    let mut rng = RngHandle::new(seed);
    let mut hits = vec![0u64; want.len()];

    let tris = match f.kernel {
        Kernel::Ts4c1 | Kernel::Ts4c2 => triangles(f)?,
        _ => Vec::new(),
    };
    let mut tri_res = match f.kernel {
        Kernel::Ts4c1 | Kernel::Ts4c2 => Some(Reservoir::<u8>::new(
            usize::try_from(f.triangle_capacity)
                .map_err(|_| DomainError::new("triangle capacity too large"))?,
        )?),
        _ => None,
    };
    let resident = |r: &Reservoir<u64>, xs: &[u64]| xs.iter().all(|x| r.items().contains(x));

    for _ in 0..runs {
        edges.clear();
        let mut observed = [false; 2];
        for s in 1..f.t_close {
            for (i, t) in tris.iter().enumerate() {
                if t.close == s {
                    let others: Vec<u64> = t.edges.iter().copied().filter(|&e| e != s).collect();
                    observed[i] = resident(&edges, &others);
                }
            }
            edges.offer(s, &mut rng);
        }
        match f.kernel {
            Kernel::FourEst | Kernel::FiveEst => {
                if resident(&edges, &f.arrivals) {
                    hits[0] += 1;
                }
            }
            Kernel::Ts4c1 | Kernel::Ts4c2 => {
                let tr = tri_res.as_mut().unwrap();
                tr.clear();
                for k in 1..=f.triangles_seen {
                    let mut item = 0u8;
                    for (i, t) in tris.iter().enumerate() {
                        if t.pos == k && observed[i] {
                            item = i as u8 + 1;
                        }
                    }
                    tr.offer(item, &mut rng);
                }
                let kept = [tr.items().contains(&1), tr.items().contains(&2)];
                let a = &f.arrivals;
                if f.kernel == Kernel::Ts4c1 {
                    if kept[0] && resident(&edges, &[a[2], a[4]]) {
                        hits[0] += 1;
                    }
                    if kept[1] && resident(&edges, &[a[1], a[3]]) {
                        hits[1] += 1;
                    }
                } else if kept[0] && kept[1] {
                    hits[0] += 1;
                }
            }
        }
    }
    let paths = want
        .into_iter()
        .zip(hits)
        .map(|((label, p), h)| PathReport {
            label,
            analytic: p,
            empirical: h as f64 / runs as f64,
            z: z_score(h, runs, p),
        })
        .collect();
    Ok(ValidationReport {
        fixture: f.name.clone(),
        runs,
        paths,
    })
}

/// Arrival patterns reaching every ordering case of the two-triangle kernel
/// with an edge capacity of 20.
pub fn ts4c2_case_fixtures() -> Vec<(Ts4c2Case, [u64; 6])> {
    use Ts4c2Case::*;
    vec![
        (FirstWithinCapacity, [5, 12, 40, 8, 30, 60]),
        (SharedLast, [50, 30, 40, 10, 25, 70]),
        (SharedBetweenSecondPair, [40, 30, 55, 12, 25, 70]),
        (FirstPairBetweenSecondPair, [15, 40, 55, 30, 25, 70]),
        (SharedBeforeSecondPair, [35, 25, 55, 12, 45, 70]),
        (FirstPairBeforeSecondPair, [15, 35, 55, 25, 45, 70]),
        (SharedBetweenFirstPairLate, [35, 50, 30, 12, 25, 70]),
        (SharedBetweenFirstPairEarly, [18, 40, 12, 10, 5, 70]),
        (SecondPairBetweenFirstPairLate, [15, 50, 35, 25, 30, 70]),
        (SecondPairBetweenFirstPairEarly, [8, 45, 17, 12, 5, 70]),
        (SharedAfterSecondPair, [35, 55, 25, 45, 15, 70]),
        (SecondPairBeforeFirstPairLate, [15, 55, 30, 45, 25, 70]),
        (SecondPairBeforeFirstPairEarly, [5, 55, 18, 45, 12, 70]),
    ]
}

fn kebab(s: &str) -> String {
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 {
                out.push('-');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

pub fn builtin_fixtures() -> Vec<Fixture> {
    let fx = |name: String, kernel, arrivals: &[u64], t_close, me, md, tau| Fixture {
        name,
        kernel,
        arrivals: arrivals.to_vec(),
        t_close,
        edge_capacity: me,
        triangle_capacity: md,
        triangles_seen: tau,
    };
    let mut out = vec![
        fx(
            "fourest-m10-t21".into(),
            Kernel::FourEst,
            &[1, 2, 3, 4, 5],
            21,
            10,
            0,
            0,
        ),
        fx(
            "fourest-spread-m10-t40".into(),
            Kernel::FourEst,
            &[3, 9, 17, 25, 33],
            40,
            10,
            0,
            0,
        ),
        fx(
            "fiveest-m12-t20".into(),
            Kernel::FiveEst,
            &[1, 2, 3, 4, 5, 6, 7, 8, 9],
            20,
            12,
            0,
            0,
        ),
        fx(
            "ts4c1-within-capacity".into(),
            Kernel::Ts4c1,
            &[1, 2, 3, 4, 5],
            15,
            20,
            10,
            30,
        ),
        fx(
            "ts4c1-companions-late".into(),
            Kernel::Ts4c1,
            &[5, 8, 30, 12, 40],
            60,
            20,
            10,
            30,
        ),
        fx(
            "ts4c1-one-companion-late".into(),
            Kernel::Ts4c1,
            &[25, 30, 10, 35, 45],
            60,
            20,
            10,
            30,
        ),
        fx(
            "ts4c1-companions-early".into(),
            Kernel::Ts4c1,
            &[25, 30, 10, 35, 15],
            60,
            20,
            10,
            30,
        ),
        fx(
            "ts4c1-m100-early-triangle".into(),
            Kernel::Ts4c1,
            &[5, 8, 150, 9, 180],
            300,
            100,
            50,
            200,
        ),
        fx(
            "ts4c1-m100-late-triangle".into(),
            Kernel::Ts4c1,
            &[120, 130, 50, 140, 60],
            400,
            100,
            50,
            80,
        ),
    ];
    for (case, t) in ts4c2_case_fixtures() {
        out.push(fx(
            format!("ts4c2-{}", kebab(&format!("{case:?}"))),
            Kernel::Ts4c2,
            &t[..5],
            t[5],
            20,
            10,
            30,
        ));
    }
    out.push(fx(
        "ts4c2-m100-shared-last".into(),
        Kernel::Ts4c2,
        &[200, 20, 30, 40, 50],
        400,
        100,
        50,
        300,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid_and_cover_cases() {
        let all = builtin_fixtures();
        for f in &all {
            assert!(analytic(f).is_ok(), "{}", f.name);
        }
        for (case, t) in ts4c2_case_fixtures() {
            let f = all
                .iter()
                .find(|f| f.kernel == Kernel::Ts4c2 && f.arrivals == t[..5])
                .unwrap();
            assert_eq!(ts4c2_of(f).case().unwrap(), case);
        }
    }

    #[test]
    fn triangle_positions_ordered() {
        for f in builtin_fixtures()
            .iter()
            .filter(|f| matches!(f.kernel, Kernel::Ts4c1 | Kernel::Ts4c2))
        {
            let t = triangles(f).unwrap();
            assert_ne!(t[0].pos, t[1].pos);
            for x in &t {
                assert!(x.pos >= 1 && x.pos <= f.triangles_seen);
            }
            if t[0].close < t[1].close {
                assert!(t[0].pos < t[1].pos);
            }
        }
    }

    #[test]
    fn small_run_agrees() {
        for name in [
            "fourest-m10-t21",
            "ts4c1-companions-late",
            "ts4c2-shared-last",
        ] {
            let f = builtin_fixtures()
                .into_iter()
                .find(|f| f.name == name)
                .unwrap();
            let r = validate_prob(&f, 40_000, 5).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn certain_event() {
        let f = Fixture {
            name: "x".into(),
            kernel: Kernel::FourEst,
            arrivals: vec![1, 2, 3, 4, 5],
            t_close: 6,
            edge_capacity: 10,
            triangle_capacity: 0,
            triangles_seen: 0,
        };
        let r = validate_prob(&f, 100, 1).unwrap();
        assert_eq!(r.paths[0].empirical, 1.0);
        assert_eq!(r.paths[0].z, 0.0);
    }

    #[test]
    fn detects_wrong_formula() {
        assert!(z_score(500, 10_000, 0.06).abs() > 3.0);
        assert!(z_score(600, 10_000, 0.06).abs() < 3.0);
    }
}
