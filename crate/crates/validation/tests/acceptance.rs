//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! values and the wall time against each criterion's budget.

use std::collections::{HashSet, VecDeque};
use std::f64::consts::{LN_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use entire_julia::construction::*;
use entire_julia::dimension::*;
use entire_julia::grid::{PixelGrid, Window};
use entire_julia::partition::*;
use entire_julia::quadratic::{julia_points_iim, points_to_csv};
use entire_julia::render::{boundary_mask, encode_pgm, render_fates};
use entire_julia::report::Status;
use entire_julia::{LogComplex, Td};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN_4: f64 = 2.0 * LN_2;
const LN_8: f64 = 3.0 * LN_2;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Duration,
    run: fn(&mut Artifacts) -> Outcome,
}

/// Byte outputs of criteria 5–7, compared against a second run by 9.
#[derive(Default)]
struct Artifacts {
    first: Vec<(&'static str, Vec<u8>)>,
}

fn main() {
    let criteria = [
        Criterion {
            id: "1",
            title: "degree identities",
            budget: Duration::from_secs(1),
            run: c1,
        },
        Criterion {
            id: "2",
            title: "schedule conformance",
            budget: Duration::from_secs(300),
            run: c2,
        },
        Criterion {
            id: "3a",
            title: "A_k model accuracy (k >= 2)",
            budget: Duration::from_secs(300),
            run: c3a,
        },
        Criterion {
            id: "3b",
            title: "B_k power-model accuracy (k >= 2)",
            budget: Duration::from_secs(300),
            run: c3b,
        },
        Criterion {
            id: "3c",
            title: "k = 1 model error slope in R",
            budget: Duration::from_secs(300),
            run: c3c,
        },
        Criterion {
            id: "4",
            title: "mapping of V_k and B_k circles",
            budget: Duration::from_secs(300),
            run: c4,
        },
        Criterion {
            id: "5",
            title: "dimension estimator golden values",
            budget: Duration::from_secs(600),
            run: c5,
        },
        Criterion {
            id: "6",
            title: "quadratic base dimension",
            budget: Duration::from_secs(600),
            run: c6,
        },
        Criterion {
            id: "7",
            title: "fate boundary over A_1 at N = 3",
            budget: Duration::from_secs(900),
            run: c7,
        },
        Criterion {
            id: "8",
            title: "fast-escaping machinery",
            budget: Duration::from_secs(60),
            run: c8,
        },
        Criterion {
            id: "9",
            title: "determinism of criteria 5-7",
            budget: Duration::from_secs(900),
            run: c9,
        },
    ];
    let mut art = Artifacts::default();
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| (c.run)(&mut art))).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        let timing = format!("{:.1} s of {} s", elapsed.as_secs_f64(), c.budget.as_secs());
        let timing = if in_time {
            timing
        } else {
            format!("{timing}, over budget")
        };
        println!(
            "{} criterion {} ({}): {} [{}]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            detail,
            timing
        );
        if !ok {
            failed.push(c.id);
        }
    }
    println!(
        "acceptance: {} of {} criteria passed{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

fn c1(_: &mut Artifacts) -> Outcome {
    let mut checked = 0;
    for n in 1..=16u32 {
        for k in 1..=30u32 {
            let nk = n_index(n, k).map_err(|e| e.to_string())?;
            let prev = n_index(n, k - 1).map_err(|e| e.to_string())?;
            let sum: u64 = (1..=k).map(|j| n_index(n, j).unwrap()).sum();
            let next = n_index(n, k + 1).map_err(|e| e.to_string())?;
            if nk != 2 * prev || (1u64 << n) + sum != next {
                return Err(format!("identity broken at N = {n}, k = {k}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (N, k) pairs exact"))
}

fn conformant(mu: f64) -> Schedule {
    let mu = Complex64::new(mu, 0.0);
    let r = smallest_valid_r(cardioid_c(mu).unwrap(), 10).unwrap();
    build_schedule(&Params::conformant(mu, 10, r, 6).unwrap()).unwrap()
}

fn c2(_: &mut Artifacts) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for mu in [0.0, 0.5] {
        let s = conformant(mu);
        let rep = s.structural_checks();
        let fails: Vec<String> = rep.failures().map(|e| e.id.clone()).collect();
        let mut worst = 0f64;
        for k in 1..=s.k_max() {
            let gap = s.log_r(k + 1) - s.log_c(k).add_f64(2.0 * s.n_k(k) as f64 * LN_2);
            worst = worst.max(gap.to_f64().abs());
        }
        ok &= fails.is_empty() && worst <= LN_8;
        notes.push(format!(
            "mu = {mu}: R = {:.4}, {} checks, failures {:?}, max |ln ratio| {:.3} <= ln 8",
            s.params.r,
            rep.entries.len(),
            fails,
            worst
        ));
    }
    check(ok, notes.join("; "))
}

fn band_max(band: Band, tol: f64) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for mu in [0.0, 0.5] {
        let s = conformant(mu);
        let mut worst = 0f64;
        for k in 2..=s.k_max() {
            let e = band_model_error(&s, k, band, 1 << 12, 0xacce97 + k as u64)
                .map_err(|e| e.to_string())?;
            worst = worst.max(e);
        }
        ok &= worst <= tol;
        notes.push(format!("mu = {mu}: max |dlog| {worst:.3e} (tol {tol:e})"));
    }
    check(ok, notes.join("; "))
}

fn c3a(_: &mut Artifacts) -> Outcome {
    band_max(Band::A, 1e-6)
}

fn c3b(_: &mut Artifacts) -> Outcome {
    band_max(Band::B, 1e-4)
}

fn c3c(_: &mut Artifacts) -> Outcome {
    let mu = Complex64::new(0.5, 0.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in [1e3, 1e4, 1e5] {
        let s = build_schedule(&Params::conformant(mu, 10, r, 2).unwrap()).unwrap();
        let e = band_model_error(&s, 1, Band::A, 1 << 12, 0x3c).map_err(|e| e.to_string())?;
        xs.push(f64::ln(r));
        ys.push(e.ln());
    }
    let (slope, _, _) = linear_fit(&xs, &ys);
    let errs: Vec<String> = ys.iter().map(|y| format!("{:.3e}", y.exp())).collect();
    check(
        (-1.3..=-0.7).contains(&slope),
        format!("mu = 0.5, errors {errs:?} at R = 1e3, 1e4, 1e5; slope {slope:.3}, required [-1.3, -0.7]"),
    )
}

fn c4(_: &mut Artifacts) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for mu in [0.0, 0.5] {
        let s = conformant(mu);
        let rep = check_mapping(&s).map_err(|e| e.to_string())?;
        let worst = rep
            .entries
            .iter()
            .map(|e| e.worst_value)
            .fold(f64::NEG_INFINITY, f64::max);
        let pass = rep.entries.iter().all(|e| e.status == Status::Pass);
        ok &= pass && rep.entries.len() == 4 * 5;
        notes.push(format!(
            "mu = {mu}: {} checks over k <= 5 at {MAPPING_SAMPLES} samples, worst excursion {worst:.3e}",
            rep.entries.len()
        ));
    }
    check(ok, notes.join("; "))
}

fn mask_from(n: usize, set: impl Fn(usize, usize) -> bool) -> PixelGrid {
    let mut g = PixelGrid::new(Window::square(0.5), n, n).unwrap();
    for y in 0..n {
        for x in 0..n {
            if set(x, y) {
                g.set(x, y, 1);
            }
        }
    }
    g
}

fn in_cantor(mut t: f64, depth: u32) -> bool {
    for _ in 0..depth {
        t *= 3.0;
        let d = t.floor();
        if d == 1.0 {
            return false;
        }
        t -= d;
    }
    true
}

fn box_of_mask(g: &PixelGrid) -> (DimensionEstimate, String) {
    let m = g.nx.trailing_zeros();
    let (lo, hi) = default_box_levels(m);
    let t = box_count_mask(g, &(lo..=hi).collect::<Vec<_>>()).unwrap();
    (fit_dimension(&t).unwrap(), t.to_csv())
}

fn whitney_of_mask(g: &PixelGrid) -> CriticalExponent {
    let m = g.nx.trailing_zeros();
    let cubes = whitney_decompose(g, m).unwrap();
    check_whitney(g, &cubes, m).unwrap();
    let near = restrict_to_distance(&cubes, set_bbox_diameter(g));
    let alphas: Vec<f64> = (0..=30).map(|i| -0.5 + 0.1 * i as f64).collect();
    critical_exponent(&near, &alphas, default_whitney_levels(m)).unwrap()
}

fn points_fit(points: &[Complex64], lo: u32, hi: u32) -> (DimensionEstimate, String) {
    let t = box_count_points(points, &(lo..=hi).collect::<Vec<_>>()).unwrap();
    (fit_dimension(&t).unwrap(), t.to_csv())
}

/// Criterion 5 estimates and their CSV outputs.
fn dimension_goldens() -> (Vec<(String, bool)>, Vec<(&'static str, Vec<u8>)>) {
    const N: usize = 4096;
    let mut out = Vec::new();
    let mut files = Vec::new();
    let within = |v: f64, t: f64, tol: f64| (v - t).abs() <= tol;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let seg: Vec<Complex64> = (0..1_000_000)
        .map(|_| Complex64::new(rng.gen(), 0.0))
        .collect();
    let (e, csv) = points_fit(&seg, 4, 14);
    out.push((
        format!("segment box {:.3}", e.value),
        within(e.value, 1.0, 0.05),
    ));
    files.push(("segment_counts.csv", csv.into_bytes()));

    let seg_mask = mask_from(N, |x, y| y == N / 2 && (N / 4..3 * N / 4).contains(&x));
    let w = whitney_of_mask(&seg_mask);
    out.push((
        format!("segment Whitney {:.3}", w.estimate.value),
        within(w.estimate.value, 1.0, 0.1),
    ));
    files.push(("segment_whitney.csv", w.to_csv().into_bytes()));

    let (e, csv) = box_of_mask(&mask_from(N, |_, _| true));
    out.push((
        format!("square box {:.3}", e.value),
        within(e.value, 2.0, 0.05),
    ));
    files.push(("square_counts.csv", csv.into_bytes()));

    let mut ends = Vec::new();
    for i in 0..1u32 << 12 {
        let left: f64 = (0..12)
            .filter(|b| i >> (11 - b) & 1 == 1)
            .map(|b| 2.0 / 3f64.powi(b as i32 + 1))
            .sum();
        ends.push(Complex64::new(left, 0.0));
        ends.push(Complex64::new(left + 3f64.powi(-12), 0.0));
    }
    let (e, csv) = points_fit(&ends, 2, 16);
    let cantor = LN_2 / 3f64.ln();
    out.push((
        format!("Cantor box {:.3} (exact {cantor:.3})", e.value),
        within(e.value, cantor, 0.03),
    ));
    files.push(("cantor_counts.csv", csv.into_bytes()));

    let c = |i: usize| in_cantor((i as f64 + 0.5) / N as f64, 7);
    let dust = mask_from(N, |x, y| c(x) && c(y));
    let (b, csv) = box_of_mask(&dust);
    let w = whitney_of_mask(&dust);
    let exact = 4f64.ln() / 3f64.ln();
    out.push((
        format!("dust box {:.3}", b.value),
        within(b.value, exact, 0.1),
    ));
    out.push((
        format!("dust Whitney {:.3}", w.estimate.value),
        within(w.estimate.value, exact, 0.1),
    ));
    let gap = (b.value - w.estimate.value).abs();
    out.push((format!("dust method gap {gap:.3}"), gap <= 0.15));
    files.push(("dust_counts.csv", csv.into_bytes()));
    files.push(("dust_whitney.csv", w.to_csv().into_bytes()));
    (out, files)
}

fn summarise(results: &[(String, bool)]) -> Outcome {
    let text: Vec<String> = results
        .iter()
        .map(|(d, ok)| {
            if *ok {
                d.clone()
            } else {
                format!("{d} OUT OF TOLERANCE")
            }
        })
        .collect();
    check(results.iter().all(|r| r.1), text.join(", "))
}

fn c5(art: &mut Artifacts) -> Outcome {
    let (results, files) = dimension_goldens();
    art.first.extend(files);
    summarise(&results)
}

fn quadratic_checks() -> (Vec<(String, bool)>, Vec<(&'static str, Vec<u8>)>) {
    let b = QuadBudget::default();
    let mut out = Vec::new();
    let e0 = estimate_quadratic_dim(Complex64::new(0.0, 0.0), &b).unwrap();
    out.push((
        format!("c = 0: {:.4}", e0.estimate.value),
        (e0.estimate.value - 1.0).abs() <= 0.03,
    ));
    let c = Complex64::new(0.1, 0.0);
    let oracle = 1.0 + c.norm_sqr() / (4.0 * LN_2);
    let e1 = estimate_quadratic_dim(c, &b).unwrap();
    out.push((
        format!("c = 0.1: {:.4} vs {oracle:.4}", e1.estimate.value),
        (e1.estimate.value - oracle).abs() <= 0.02,
    ));
    let found = find_c_for_dimension(1.05, 0.02, &b).unwrap();
    let again = estimate_quadratic_dim(found.c, &b).unwrap().estimate.value;
    out.push((
        format!(
            "find-c 1.05: mu = {}, c = {:.5}, re-estimate {again:.4}",
            found.mu, found.c.re
        ),
        !found.best_effort && (again - 1.05).abs() <= 0.02,
    ));
    let pts = julia_points_iim(Complex64::new(0.24, 0.0), 100_000, 9).unwrap();
    (
        out,
        vec![("julia_points.csv", points_to_csv(&pts).into_bytes())],
    )
}

fn c6(art: &mut Artifacts) -> Outcome {
    let (results, files) = quadratic_checks();
    art.first.extend(files);
    summarise(&results)
}

fn small_schedule() -> Schedule {
    let mu = Complex64::new(0.5, 0.0);
    let r = smallest_valid_r(cardioid_c(mu).unwrap(), 3).unwrap();
    build_schedule(&Params::exploratory(mu, 3, r, 4).unwrap()).unwrap()
}

/// Whether the non-boundary pixels connected to the inner edge reach the
/// outer edge (columns wrap around in angle).
fn edges_connected(b: &PixelGrid) -> bool {
    let (nx, ny) = (b.nx, b.ny);
    let mut seen = vec![false; nx * ny];
    let mut queue: VecDeque<usize> = ((ny - 1) * nx..ny * nx)
        .filter(|&i| b.cells[i] == 0)
        .collect();
    for &i in &queue {
        seen[i] = true;
    }
    while let Some(idx) = queue.pop_front() {
        let (x, y) = (idx % nx, idx / nx);
        if y == 0 {
            return true;
        }
        let nbrs = [
            y * nx + (x + nx - 1) % nx,
            y * nx + (x + 1) % nx,
            idx - nx,
            if y + 1 < ny { idx + nx } else { idx },
        ];
        for j in nbrs {
            if !seen[j] && b.cells[j] == 0 {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    false
}

fn fate_boundary() -> (Vec<(String, bool)>, Vec<(&'static str, Vec<u8>)>) {
    let s = small_schedule();
    let l1: Td = s.log_r(1);
    let w = Window::annulus(l1.add_f64(-LN_4), l1.add_f64(LN_4));
    let fates = render_fates(&s, w, 2048, 2048, 64).unwrap();
    let b = boundary_mask(&fates);
    let mut out = Vec::new();
    let n = b.count_nonzero();
    out.push((format!("{n} boundary pixels"), n > 0));
    let closed = !edges_connected(&b);
    out.push((format!("closed curve around 0: {closed}"), closed));
    let levels: Vec<u32> = (3..=9).collect();
    let e = fit_dimension(&box_count_mask(&b, &levels).unwrap()).unwrap();
    out.push((
        format!(
            "box estimate {:.3} over levels 3..=9, residual {:.3}",
            e.value, e.residual
        ),
        e.value > 1.0 && e.value < 2.0 && e.residual < 0.1,
    ));
    let kinds: HashSet<u8> = fates.cells.iter().copied().collect();
    out.push((format!("{} fate codes", kinds.len()), kinds.len() >= 2));
    (
        out,
        vec![
            ("fates.pgm", encode_pgm(&fates)),
            ("boundary.pgm", encode_pgm(&b)),
        ],
    )
}

fn c7(art: &mut Artifacts) -> Outcome {
    let (results, files) = fate_boundary();
    art.first.extend(files);
    summarise(&results)
}

fn c8(_: &mut Artifacts) -> Outcome {
    let s =
        build_schedule(&Params::conformant(Complex64::new(0.0, 0.0), 10, 2.0, 6).unwrap()).unwrap();
    let seq = compute_s_sequence(&s, s.log_r(1).add_f64(LN_8), 12).map_err(|e| e.to_string())?;
    let increasing = seq.log_s.windows(2).all(|w| w[1] > w[0]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (lo, hi) = (s.log_r(1).add_f64(LN_4), s.log_r(2).add_f64(-LN_4));
    let opts = OrbitOptions {
        max_iter: 8,
        follow_escape: true,
        ..OrbitOptions::default()
    };
    let mut bad = 0;
    let seeds = 2000;
    for _ in 0..seeds {
        let z = LogComplex::from_polar(lo + (hi - lo).mul_f64(rng.gen()), rng.gen_range(-PI..PI));
        let it = orbit(&s, z, &opts).map_err(|e| e.to_string())?;
        let levels: Vec<u32> = it.steps.iter().filter_map(|st| st.label.k).collect();
        let monotone = it.steps.iter().all(|st| st.label.zone == Zone::B)
            && levels.windows(2).all(|w| w[1] > w[0]);
        if it.fate.tag != FateTag::EscapesViaB || it.chain_violation || !monotone {
            bad += 1;
        }
    }
    check(
        increasing && bad == 0,
        format!(
            "{} S_n terms strictly increasing: {increasing} (truncated at the certified range: {}); {bad} of {seeds} B_1 seeds off the B_k chain",
            seq.log_s.len(),
            seq.truncated
        ),
    )
}

fn c9(art: &mut Artifacts) -> Outcome {
    let mut second = Vec::new();
    second.extend(dimension_goldens().1);
    second.extend(quadratic_checks().1);
    second.extend(fate_boundary().1);
    if art.first.is_empty() {
        return Err("criteria 5-7 produced no outputs".into());
    }
    let mut differ = Vec::new();
    for ((name, a), (_, b)) in art.first.iter().zip(&second) {
        if a != b {
            differ.push(*name);
        }
    }
    check(
        differ.is_empty() && art.first.len() == second.len(),
        format!(
            "{} outputs compared byte for byte, differing: {differ:?}",
            second.len()
        ),
    )
}
