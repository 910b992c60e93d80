//! Region classification, petals, orbits and fates against direct
//! inequality checks and grid flood fills.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::{LN_2, PI};

use entire_julia::construction::*;
use entire_julia::partition::*;
use entire_julia::report::Status;
use entire_julia::{LogComplex, Td};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN_4: f64 = 2.0 * LN_2;

fn c0_schedule() -> Schedule {
    let p = Params::conformant(Complex64::new(0.0, 0.0), 10, 2.0, 6).unwrap();
    build_schedule(&p).unwrap()
}

fn small_schedule() -> Schedule {
    let mu = Complex64::new(0.5, 0.0);
    let r = smallest_valid_r(cardioid_c(mu).unwrap(), 3).unwrap();
    build_schedule(&Params::exploratory(mu, 3, r, 4).unwrap()).unwrap()
}

/// 4-connected components of `inside` on an `n × n` grid; returns the
/// label of every cell (0 outside) and which labels touch the border.
fn components(inside: &[bool], n: usize) -> (Vec<u32>, Vec<bool>) {
    let mut label = vec![0u32; n * n];
    let mut touches = vec![false];
    let mut next = 0u32;
    for start in 0..n * n {
        if !inside[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        touches.push(false);
        label[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(idx) = queue.pop_front() {
            let (x, y) = (idx % n, idx / n);
            if x == 0 || y == 0 || x == n - 1 || y == n - 1 {
                touches[next as usize] = true;
            }
            let nbrs = [
                (x > 0).then(|| idx - 1),
                (x + 1 < n).then(|| idx + 1),
                (y > 0).then(|| idx - n),
                (y + 1 < n).then(|| idx + n),
            ];
            for j in nbrs.into_iter().flatten() {
                if inside[j] && label[j] == 0 {
                    label[j] = next;
                    queue.push_back(j);
                }
            }
        }
    }
    (label, touches)
}

#[test]
fn petal_classes_match_flood_fill() {
    const N: usize = 2048;
    // Components are labelled on {|H_m| ≤ 1 − η}: the lobes of {|H_m| < 1}
    // touch at single points, which a pixel grid cannot resolve.
    const ETA: f64 = 1e-2;
    for m in [3u32, 5, 10, 20] {
        let half = 1.45;
        let h = 2.0 * half / N as f64;
        let point = |idx: usize| {
            let (x, y) = (idx % N, idx / N);
            Complex64::new(-half + (x as f64 + 0.5) * h, half - (y as f64 + 0.5) * h)
        };
        let abs_h: Vec<f64> = (0..N * N)
            .map(|idx| {
                let u = point(idx).powu(m);
                (u * (2.0 - u)).norm()
            })
            .collect();
        let core: Vec<bool> = abs_h.iter().map(|&a| a <= 1.0 - ETA).collect();
        let (label, touches) = components(&core, N);
        let bounded = (1..touches.len()).filter(|&l| !touches[l]).count();
        assert_eq!(bounded, m as usize + 1, "m = {m}");

        let inner_label = label[(N / 2) * N + N / 2];
        let mut petal_of: HashMap<u32, u64> = HashMap::new();
        for idx in 0..N * N {
            let class = petal_membership(m as u64, LogComplex::from_cartesian(point(idx)));
            let l = label[idx];
            if l == 0 {
                if abs_h[idx] > 1.0 + 1e-6 {
                    assert_eq!(class, PetalClass::Outer, "m = {m}, {}", point(idx));
                } else if abs_h[idx] < 1.0 - 1e-6 {
                    assert_ne!(class, PetalClass::Outer, "m = {m}, {}", point(idx));
                }
                continue;
            }
            if l == inner_label {
                assert_eq!(class, PetalClass::Inner, "m = {m}, {}", point(idx));
            } else {
                let PetalClass::Petal(i) = class else {
                    panic!("m = {m}: {} classified {class:?}", point(idx));
                };
                assert_eq!(*petal_of.entry(l).or_insert(i), i, "m = {m}");
            }
        }
        let mut indices: Vec<u64> = petal_of.values().copied().collect();
        indices.sort_unstable();
        assert_eq!(indices, (0..m as u64).collect::<Vec<_>>(), "m = {m}");
    }
}

#[test]
fn petal_examples() {
    assert_eq!(petal_membership(5, LogComplex::ZERO), PetalClass::Inner);
    // w^m = 1.5 on the positive axis lies in the petal lobe around u = 2.
    let w = LogComplex::from_polar(1.5f64.ln() / 7.0, 0.0);
    assert_eq!(petal_membership(7, w), PetalClass::Petal(0));
    let w = LogComplex::from_polar(1.5f64.ln() / 7.0, 2.0 * PI * 3.0 / 7.0);
    assert_eq!(petal_membership(7, w), PetalClass::Petal(3));
    let w = LogComplex::from_polar(3f64.ln() / 7.0, 0.0);
    assert_eq!(petal_membership(7, w), PetalClass::Outer);
    assert_eq!(petal_membership(7, LogComplex::ONE), PetalClass::Boundary);
}

#[test]
fn partition_is_total_and_matches_inequalities() {
    let s = c0_schedule();
    let k_max = s.k_max();
    let mut edges = vec![s.log_core_radius()];
    for k in 1..=k_max {
        edges.push(s.log_r(k).add_f64(LN_4));
        edges.push(s.log_r(k + 1).add_f64(-LN_4));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..1_000_000 {
        let band = rng.gen_range(0..edges.len());
        let (lo, hi) = if band == 0 {
            (edges[0].add_f64(-20.0), edges[0])
        } else {
            (edges[band - 1], edges[band])
        };
        let l = match i % 50 {
            0 => lo,
            _ => lo + (hi - lo).mul_f64(rng.gen()),
        };
        let z = LogComplex::from_polar(l, rng.gen_range(-PI..PI));
        let label = classify(&s, z).unwrap();
        let expected = if l < edges[0] {
            (Zone::Core, None)
        } else {
            let k = (1..=k_max)
                .find(|&k| l < s.log_r(k + 1).add_f64(-LN_4))
                .unwrap();
            if l < s.log_r(k).add_f64(LN_4) {
                (Zone::A, Some(k))
            } else {
                (Zone::B, Some(k))
            }
        };
        assert_eq!((label.zone, label.k), expected, "log|z| = {l:?}");
        if label.zone == Zone::A && label.subzone == Subzone::V {
            let t = (l - s.log_r(label.k.unwrap())).to_f64();
            assert!((1.5f64.ln()..=2.5f64.ln()).contains(&t));
        }
        if label.subzone == Subzone::PetalCandidate {
            assert_eq!(label.zone, Zone::A);
        }
    }
    let beyond = LogComplex::from_polar(s.log_certified(), 0.0);
    assert!(classify(&s, beyond).is_err());
}

#[test]
fn classification_examples() {
    let s = c0_schedule();
    for k in 1..=s.k_max() {
        let l = classify(&s, LogComplex::from_polar(s.log_r(k).add_f64(LN_2), 0.3)).unwrap();
        assert_eq!((l.zone, l.k, l.subzone), (Zone::A, Some(k), Subzone::V));
        let l = classify(
            &s,
            LogComplex::from_polar(s.log_r(k).add_f64(3.0 * LN_2), 0.3),
        )
        .unwrap();
        assert_eq!((l.zone, l.k), (Zone::B, Some(k)));
    }
    let l = classify(
        &s,
        LogComplex::from_polar(s.log_r(1).add_f64(-3.0 * LN_2), 0.0),
    )
    .unwrap();
    assert_eq!(l.zone, Zone::Core);
}

#[test]
fn orbit_examples() {
    let s = c0_schedule();
    let opts = OrbitOptions::default();
    let it = orbit(
        &s,
        LogComplex::from_polar(s.log_r(1).add_f64(3.0 * LN_2), 1.0),
        &opts,
    )
    .unwrap();
    assert_eq!(it.fate.tag, FateTag::EscapesViaB);
    assert_eq!((it.fate.step, it.fate.level), (Some(0), Some(1)));
    let it = orbit(&s, LogComplex::ZERO, &opts).unwrap();
    assert_eq!(it.fate.tag, FateTag::Trapdoor);

    // On |z| = 2R_1 with (z/R_1)^{n_1} negative, |f_1| attains its maximum
    // R_2, so the image sits on the circle |w| ≈ R_2 inside A_2.
    let z = LogComplex::from_polar(s.log_r(1).add_f64(LN_2), PI / s.n_k(1) as f64);
    let fz = s.eval_f(z, 1e-12).unwrap();
    assert!((fz.log_mag - s.log_r(2)).to_f64().abs() < 1e-6);
    let it = orbit(
        &s,
        z,
        &OrbitOptions {
            max_iter: 1,
            ..opts
        },
    )
    .unwrap();
    assert_eq!(
        (it.steps[1].label.zone, it.steps[1].label.k),
        (Zone::A, Some(2))
    );

    let small = small_schedule();
    let it = orbit(
        &small,
        LogComplex::from_cartesian(Complex64::new(0.01, -0.02)),
        &opts,
    )
    .unwrap();
    assert_eq!(it.fate.tag, FateTag::Trapdoor);
    let d = (it.steps.last().unwrap().label, it.fate.distance.unwrap());
    assert!(d.1 <= TRAP_RADIUS);
}

#[test]
fn s_sequence_examples() {
    let s = c0_schedule();
    let s0 = s.log_r(1).add_f64(8f64.ln());
    let seq = compute_s_sequence(&s, s0, 4).unwrap();
    assert!(seq.log_s.windows(2).all(|w| w[1] > w[0]));
    let predicted = s.log_c(1) + (s0 - s.log_r(1)).mul_u64(2 * s.n_k(1));
    assert!((seq.log_s[1] - predicted).to_f64().abs() <= 8f64.ln());
    let long = compute_s_sequence(&s, s0, 50).unwrap();
    assert!(long.truncated && long.log_s.len() < 50);
    assert!(compute_s_sequence(&s, s.log_r(1), 3).is_err());
}

#[test]
fn fate_statistics_examples() {
    let s = small_schedule();
    let b1 = circle_seeds(s.log_r(1).add_f64(3.0 * LN_2), 256);
    let summary = fate_statistics(&s, &b1, 32).unwrap();
    assert_eq!(summary.count(FateTag::EscapesViaB), 256);

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let disk: Vec<LogComplex> = (0..256)
        .map(|_| LogComplex::from_polar(rng.gen_range(-12.0..-6.0), rng.gen_range(-PI..PI)))
        .collect();
    let summary = fate_statistics(&s, &disk, 200).unwrap();
    assert_eq!(summary.count(FateTag::Trapdoor), 256);

    // Regression baselines for 4096 seeds per circle. On |z| = 2R_1 the image
    // lands near |w| = R_2 where |H_{n_2}| stays of order one, so every seed
    // escapes without moving backwards. The circle through the petal centres
    // of A_1 has a few seeds that fall back, and the inner part of A_1 maps
    // into the core.
    let on = |t: f64| {
        let seeds = circle_seeds(s.log_r(1).add_f64(t), 4096);
        fate_statistics(&s, &seeds, 64).unwrap()
    };
    assert_eq!(on(LN_2).fraction_with_backward_event(), 0.0);
    let petal = on(LN_2 / s.n_k(1) as f64);
    let frac = petal.fraction_with_backward_event();
    println!("backward-event fraction on the petal circle: {frac}");
    assert!(frac > 0.0 && frac < 0.05);
    assert_eq!(on(-1.0).fraction_with_backward_event(), 1.0);
    let summary = petal;
    let csv = summary.to_csv();
    assert!(csv.starts_with("seed_log_r,seed_theta,fate,steps,backward_events\n"));
    assert_eq!(csv.lines().count(), 4097);
}

#[test]
fn mapping_checks_pass_for_conformant_schedule() {
    let s = c0_schedule();
    let rep = check_mapping(&s).unwrap();
    assert_eq!(rep.entries.len(), 4 * (s.k_max() as usize - 1));
    for e in &rep.entries {
        assert_eq!(e.status, Status::Pass, "{e:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn no_backward_event_starts_in_b(t in 0.0f64..1.0, theta in -PI..PI) {
        let s = small_schedule();
        let lo = s.log_core_radius().add_f64(-3.0);
        let hi = s.log_r(3);
        let z = LogComplex::from_polar(lo + (hi - lo).mul_f64(t), theta);
        let opts = OrbitOptions { max_iter: 24, follow_escape: true, ..OrbitOptions::default() };
        let it = orbit(&s, z, &opts).unwrap();
        for &n in &it.backward_events {
            prop_assert_eq!(it.steps[n].label.zone, Zone::A);
        }
        prop_assert_eq!(backward_events(&it.steps), it.backward_events.clone());
        prop_assert!(!it.chain_violation);
    }

    #[test]
    fn every_radius_gets_one_label(l in -30.0f64..5000.0, theta in -PI..PI) {
        let s = small_schedule();
        let z = LogComplex::from_polar(Td::from_f64(l), theta);
        match classify(&s, z) {
            Ok(label) => prop_assert!(z.log_mag < s.log_certified() && label.k.map_or(true, |k| k <= s.k_max())),
            Err(_) => prop_assert!(z.log_mag >= s.log_certified()),
        }
    }
}
