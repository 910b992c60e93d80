//! The parameter schedule and evaluation of the product
//!
//! ```text
//! f(z) = f0^N(z) · ∏_{k≥1} (1 − ½ (z/R_k)^{n_k}),   f0(z) = z² + c,
//! n_k = 2^{N+k−1},  R_1 = 2R,  R_{k+1} = max_{|z| = 2R_k} |f_k(z)|,
//! ```
//!
//! where `f_k` is the k-th partial product. Radii are kept as logarithms
//! only; `R_k` itself is never representable past the first few levels.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec;
use crate::logcomplex::{half, two, LogComplex};
use crate::report::{Report, Status};
use crate::td::Td;

/// Smallest N for which the growth estimates are claimed.
pub const MIN_CONFORMANT_N: u32 = 10;
/// Largest admissible `n_{K+1}`.
pub const SAMPLING_CAP: u64 = 1 << 22;
const COARSE_MIN: usize = 1 << 14;
const COARSE_MAX: usize = 1 << 24;
const REFINE_CANDIDATES: usize = 32;
const REFINE_TOL: f64 = 1e-12;
pub const VALIDATE_SAMPLES: usize = 1 << 12;
const VALIDATE_MARGIN: f64 = 1e-3;
/// Extrapolated levels included in the truncation majorant.
const TAIL_EXTRA: u32 = 4;
/// Relative tolerance used internally when evaluating `f`.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

const LN_4: f64 = 2.0 * LN_2;
const LN_8: f64 = 3.0 * LN_2;

/// `n_k = 2^{N+k−1}`.
pub fn n_index(n_base: u32, k: u32) -> Result<u64> {
    if n_base == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let e = n_base + k - 1;
    if e >= 63 {
        return Err(Error::Overflow { index: e });
    }
    Ok(1u64 << e)
}

/// `c = μ/2 · (1 − μ/2)`, the main-cardioid parametrisation. The attracting
/// fixed point of `z² + c` is `μ/2`, with multiplier `μ`.
pub fn cardioid_c(mu: Complex64) -> Result<Complex64> {
    if !(mu.norm() < 1.0) {
        return Err(Error::Domain(format!("|mu| = {} is not < 1", mu.norm())));
    }
    let h = mu / 2.0;
    Ok(h * (1.0 - h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub mu: Complex64,
    pub c: Complex64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "K_max")]
    pub k_max: u32,
    pub conformant: bool,
}

impl Params {
    pub fn new(mu: Complex64, n: u32, r: f64, k_max: u32, conformant: bool) -> Result<Self> {
        let c = cardioid_c(mu)?;
        if n == 0 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("R = {r} must be positive")));
        }
        if k_max == 0 {
            return Err(Error::Domain("K_max must be at least 1".into()));
        }
        if conformant && n < MIN_CONFORMANT_N {
            return Err(Error::Domain(format!(
                "conformant mode requires N >= {MIN_CONFORMANT_N}, got {n}"
            )));
        }
        Ok(Params {
            mu,
            c,
            n,
            r,
            k_max,
            conformant,
        })
    }

    pub fn conformant(mu: Complex64, n: u32, r: f64, k_max: u32) -> Result<Self> {
        Self::new(mu, n, r, k_max, true)
    }

    pub fn exploratory(mu: Complex64, n: u32, r: f64, k_max: u32) -> Result<Self> {
        Self::new(mu, n, r, k_max, false)
    }
}

/// `f0^N` evaluated in log-polar form.
pub fn f0_iterate_log(c: LogComplex, n: u32, z: LogComplex) -> LogComplex {
    let mut w = z;
    for _ in 0..n {
        w = w.pow_int(2).add(c);
    }
    w
}

/// Outcome of the check `½ ≤ |f0^N(z) / z^{2^N}| ≤ 2` on `|z| = R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RValidation {
    pub ok: bool,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

/// Samples the circle `|z| = R` at `samples` angles.
pub fn validate_r_with(c: Complex64, n: u32, r: f64, samples: usize) -> Result<RValidation> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("R = {r} must be positive")));
    }
    let deg = n_index(n, 1)?;
    let c_log = LogComplex::from_cartesian(c);
    let log_r = Td::from_f64(r.ln());
    let expected = log_r.mul_u64(deg);
    let logs = exec::map_range(samples, |i| {
        let theta = -PI + TAU * i as f64 / samples as f64;
        let w = f0_iterate_log(c_log, n, LogComplex::from_polar(log_r, theta));
        (w.log_mag - expected).to_f64()
    });
    let (lo, hi) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let (min_ratio, max_ratio) = (lo.exp(), hi.exp());
    let ok =
        min_ratio >= 0.5 * (1.0 + VALIDATE_MARGIN) && max_ratio <= 2.0 * (1.0 - VALIDATE_MARGIN);
    Ok(RValidation {
        ok,
        min_ratio,
        max_ratio,
        samples,
    })
}

pub fn validate_r(c: Complex64, n: u32, r: f64) -> Result<RValidation> {
    validate_r_with(c, n, r, VALIDATE_SAMPLES)
}

/// Smallest `R >= 1` (to relative precision 1e−6) that passes [`validate_r`].
pub fn smallest_valid_r(c: Complex64, n: u32) -> Result<f64> {
    if validate_r(c, n, 1.0)?.ok {
        return Ok(1.0);
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while !validate_r(c, n, hi)?.ok {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain(format!(
                "no valid R found below 1e12 for c = {c}"
            )));
        }
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if validate_r(c, n, mid)?.ok {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Result of a sampled maximum of `log|g|` over a circle.
#[derive(Clone, Copy, Debug)]
pub struct MaxModulus {
    pub log_max: Td,
    pub theta: f64,
    pub samples: usize,
}

/// Coarse sample count for a circle on which the fastest oscillating factor
/// has frequency `n_next / 2`.
pub fn coarse_samples(n_next: u64) -> usize {
    let wanted = (n_next as u128 * 16).min(COARSE_MAX as u128) as usize;
    wanted.max(COARSE_MIN).min(COARSE_MAX)
}

/// Maximises `log_abs(θ)` over θ ∈ [−π, π): a uniform pass of `samples`
/// angles, then golden-section refinement around the best local maxima.
pub fn max_log_modulus<F>(log_abs: F, samples: usize) -> MaxModulus
where
    F: Fn(f64) -> Td + Sync + Send,
{
    let samples = samples.max(8);
    let step = TAU / samples as f64;
    let angle = |i: usize| -PI + step * i as f64;
    let reference = log_abs(angle(0));
    let rel: Vec<f64> = exec::map_range(samples, |i| {
        let v = log_abs(angle(i));
        if reference.is_finite() {
            (v - reference).to_f64()
        } else {
            v.to_f64()
        }
    });

    let mut peaks: Vec<usize> = (0..samples)
        .filter(|&i| {
            let prev = rel[(i + samples - 1) % samples];
            let next = rel[(i + 1) % samples];
            rel[i] >= prev && rel[i] >= next
        })
        .collect();
    if peaks.is_empty() {
        peaks.push(0);
    }
    peaks.sort_by(|&a, &b| rel[b].total_cmp(&rel[a]).then(a.cmp(&b)));
    peaks.truncate(REFINE_CANDIDATES);

    let refined = exec::map_slice(&peaks, |&i| {
        let centre = angle(i);
        golden_max(&log_abs, centre - step, centre + step)
    });

    let mut best = MaxModulus {
        log_max: log_abs(angle(peaks[0])),
        theta: angle(peaks[0]),
        samples,
    };
    for (v, theta) in refined {
        if v > best.log_max {
            best.log_max = v;
            best.theta = theta;
        }
    }
    best
}

fn golden_max<F: Fn(f64) -> Td>(g: &F, mut a: f64, mut b: f64) -> (Td, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let tol = REFINE_TOL * PI;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    while b - a > tol {
        if g1 >= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - INV_PHI * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + INV_PHI * (b - a);
            g2 = g(x2);
        }
    }
    if g1 >= g2 {
        (g1, x1)
    } else {
        (g2, x2)
    }
}

/// Built schedule: the arrays `n_k`, `log R_k`, `log |C_k|` and the
/// structural checks recorded at build time.
///
/// `log R_k` is stored for `k = 1..=K_max + 1` so that every level
/// `k ≤ K_max` has both of its neighbouring radii.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub params: Params,
    n: Vec<u64>,
    log_r: Vec<Td>,
    log_c: Vec<Td>,
    pub sample_counts: Vec<usize>,
    pub validation: RValidation,
    pub attractor: Option<Complex64>,
    pub checks: Report,
    c_log: LogComplex,
}

/// Builds the schedule for `params`.
///
/// In conformant mode any failed structural check is an error; in
/// exploratory mode the checks are recorded as skipped.
pub fn build_schedule(params: &Params) -> Result<Schedule> {
    let k_max = params.k_max;
    let n = (0..=k_max + 1)
        .map(|k| n_index(params.n, k))
        .collect::<Result<Vec<_>>>()?;
    let n_next = n[k_max as usize + 1];
    if n_next > SAMPLING_CAP {
        return Err(Error::Feasibility {
            k_max,
            n_next,
            cap: SAMPLING_CAP,
        });
    }
    let validation = validate_r(params.c, params.n, params.r)?;
    if params.conformant && !validation.ok {
        return Err(Error::Schedule(format!(
            "R = {} fails the base-polynomial ratio test (ratio range [{:.6}, {:.6}])",
            params.r, validation.min_ratio, validation.max_ratio
        )));
    }
    let mut s = Schedule {
        params: params.clone(),
        n,
        log_r: vec![Td::from_f64((2.0 * params.r).ln())],
        log_c: Vec::new(),
        sample_counts: Vec::new(),
        validation,
        attractor: None,
        checks: Report::new(mode_name(params.conformant)),
        c_log: LogComplex::from_cartesian(params.c),
    };
    for k in 1..=k_max {
        let samples = coarse_samples(s.n_k(k + 1));
        let radius = s.log_r(k).add_f64(LN_2);
        let mm = max_log_modulus(
            |theta| {
                s.eval_partial(k, LogComplex::from_polar(radius, theta))
                    .log_mag
            },
            samples,
        );
        s.log_r.push(mm.log_max);
        s.sample_counts.push(samples);
    }
    s.log_c = (1..=k_max).map(|k| s.log_c_formula(k)).collect();
    s.attractor = s.find_attractor();
    s.checks = s.structural_checks();
    if params.conformant && !s.checks.passed() {
        let failed: Vec<String> = s.checks.failures().map(|e| e.id.clone()).collect();
        return Err(Error::Schedule(format!(
            "structural checks failed: {}",
            failed.join(", ")
        )));
    }
    Ok(s)
}

fn mode_name(conformant: bool) -> &'static str {
    if conformant {
        "conformant"
    } else {
        "exploratory"
    }
}

impl Schedule {
    pub fn k_max(&self) -> u32 {
        self.params.k_max
    }

    /// `n_k` for `k = 0..=K_max + 1`.
    pub fn n_k(&self, k: u32) -> u64 {
        self.n[k as usize]
    }

    pub fn n_values(&self) -> &[u64] {
        &self.n
    }

    /// `log R_k` for `k = 1..=K_max + 1`.
    ///
    /// # Panics
    /// If `k` is out of that range.
    pub fn log_r(&self, k: u32) -> Td {
        assert!(k >= 1, "R_k is indexed from 1");
        self.log_r[k as usize - 1]
    }

    pub fn log_r_values(&self) -> &[Td] {
        &self.log_r
    }

    /// `log |C_k|` for `k = 1..=K_max`.
    pub fn log_c(&self, k: u32) -> Td {
        self.log_c[k as usize - 1]
    }

    /// Sign of `C_k`, `(−1)^{k−1}`.
    pub fn c_sign(k: u32) -> i8 {
        if k % 2 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn c_log(&self) -> LogComplex {
        self.c_log
    }

    /// Radius of the core disk `|z| < R_1/4`, in log form.
    pub fn log_core_radius(&self) -> Td {
        self.log_r(1).add_f64(-LN_4)
    }

    /// Upper end of the certified range, `log(R_{K+1}/4)`.
    pub fn log_certified(&self) -> Td {
        self.log_r(self.k_max() + 1).add_f64(-LN_4)
    }

    fn log_c_formula(&self, k: u32) -> Td {
        let mut acc = self
            .log_r(k)
            .mul_u64(self.n_k(k))
            .add_f64(-(k as f64) * LN_2);
        for j in 1..k {
            acc = acc - self.log_r(j).mul_u64(self.n_k(j));
        }
        acc
    }

    /// `C_k = (−1)^{k−1} 2^{−k} R_k^{n_k} ∏_{j<k} R_j^{−n_j}` (for k = 1 this
    /// is `½ R_1^{n_1}`).
    pub fn c_value(&self, k: u32) -> Result<LogComplex> {
        if k == 0 || k > self.k_max() {
            return Err(Error::Index {
                k,
                k_max: self.k_max(),
            });
        }
        let phase = if Self::c_sign(k) > 0 { 0.0 } else { -PI };
        Ok(LogComplex::from_polar(self.log_c(k), phase))
    }

    pub fn eval_f0n(&self, z: LogComplex) -> LogComplex {
        f0_iterate_log(self.c_log, self.params.n, z)
    }

    /// `F_k(z) = 1 − ½ (z/R_k)^{n_k}`, `1 ≤ k ≤ K_max + 1`.
    pub fn eval_factor(&self, k: u32, z: LogComplex) -> Result<LogComplex> {
        if k == 0 || k > self.k_max() + 1 {
            return Err(Error::Index {
                k,
                k_max: self.k_max() + 1,
            });
        }
        Ok(self.factor(k, z))
    }

    fn factor(&self, k: u32, z: LogComplex) -> LogComplex {
        let u = z.scale_log(-self.log_r(k)).pow_int(self.n_k(k));
        LogComplex::ONE.add(u.mul(half()).neg())
    }

    /// The partial product `f_k = f0^N · F_1 ⋯ F_k`.
    pub fn eval_partial(&self, k: u32, z: LogComplex) -> LogComplex {
        (1..=k).fold(self.eval_f0n(z), |acc, j| acc.mul(self.factor(j, z)))
    }

    /// Smallest `J` such that the tail majorant `Σ_{j>J} ½ (|z|/R_j)^{n_j}`
    /// is below `rel_tol / 4`. Radii beyond the schedule are extrapolated by
    /// the squaring lower bound `R_{j+1} ≥ 4 R_j²`.
    pub fn truncation_index(&self, log_abs: Td, rel_tol: f64) -> Result<u32> {
        if log_abs.hi == f64::NEG_INFINITY {
            return Ok(0);
        }
        let top = self.k_max() + 1;
        let mut terms = Vec::with_capacity((top + TAIL_EXTRA) as usize);
        let mut log_r = Td::ZERO;
        for j in 1..=top + TAIL_EXTRA {
            log_r = if j <= top {
                self.log_r(j)
            } else {
                (log_r + log_r).add_f64(LN_4)
            };
            let n_j = 2f64.powi((self.params.n + j - 1) as i32);
            terms.push(-LN_2 + n_j * (log_abs - log_r).to_f64());
        }
        // tails[J] = log Σ_{j > J} term_j
        let mut tails = vec![f64::NEG_INFINITY; terms.len() + 1];
        for j in (0..terms.len()).rev() {
            tails[j] = log_add_exp(tails[j + 1], terms[j]);
        }
        let bound = (rel_tol / 4.0).ln();
        if !(tails[top as usize] < bound) {
            return Err(Error::OutOfRange {
                log_abs: log_abs.to_f64(),
                bound: self.log_certified().to_f64(),
            });
        }
        Ok((0..=top)
            .find(|&j| tails[j as usize] < bound)
            .unwrap_or(top))
    }

    /// `f(z)` truncated so that the neglected tail is below `rel_tol`.
    pub fn eval_f(&self, z: LogComplex, rel_tol: f64) -> Result<LogComplex> {
        if !(1e-12..1e-2).contains(&rel_tol) {
            return Err(Error::Domain(format!(
                "rel_tol = {rel_tol:e} outside [1e-12, 1e-2)"
            )));
        }
        if !(z.log_mag < self.log_certified()) {
            return Err(Error::OutOfRange {
                log_abs: z.log_mag.to_f64(),
                bound: self.log_certified().to_f64(),
            });
        }
        let j = self.truncation_index(z.log_mag, rel_tol)?;
        Ok(self.eval_partial(j, z))
    }

    /// The A-band model `C_k H_{n_k}(z/R_k)`.
    pub fn model_a(&self, k: u32, z: LogComplex) -> Result<LogComplex> {
        let w = z.scale_log(-self.log_r(k));
        Ok(self.c_value(k)?.mul(eval_h(self.n_k(k), w)))
    }

    /// The B-band power model `−C_k (z/R_k)^{2 n_k}`.
    pub fn model_b(&self, k: u32, z: LogComplex) -> Result<LogComplex> {
        let w = z.scale_log(-self.log_r(k));
        Ok(self.c_value(k)?.mul(w.pow_int(2 * self.n_k(k))).neg())
    }

    /// Outer part of the A-band, `5R_k/4 ≤ |z| ≤ 4R_k`: `|f| ≈ |C_k| |z/R_k|^{2n_k}`.
    pub fn model_outer_split(&self, k: u32, z: LogComplex) -> Result<LogComplex> {
        let w = z.scale_log(-self.log_r(k));
        Ok(self.c_value(k)?.mul(w.pow_int(2 * self.n_k(k))))
    }

    /// Inner part of the A-band, `R_k/4 ≤ |z| ≤ 4R_k/5`: `f ≈ 2 C_k (z/R_k)^{n_k}`.
    pub fn model_inner_split(&self, k: u32, z: LogComplex) -> Result<LogComplex> {
        let w = z.scale_log(-self.log_r(k));
        Ok(self.c_value(k)?.mul(two()).mul(w.pow_int(self.n_k(k))))
    }

    fn find_attractor(&self) -> Option<Complex64> {
        let mut z = self.params.mu / 2.0;
        for _ in 0..1000 {
            let next = self
                .eval_f(LogComplex::from_cartesian(z), DEFAULT_REL_TOL)
                .ok()?
                .to_cartesian();
            if !(next.norm() < 1e6) {
                return None;
            }
            let done = (next - z).norm() <= 1e-15 * (1.0 + z.norm());
            z = next;
            if done {
                return Some(z);
            }
        }
        Some(z)
    }

    /// Integer identities and the growth inequalities, in log form.
    pub fn structural_checks(&self) -> Report {
        let conf = self.params.conformant;
        let mut rep = Report::new(mode_name(conf));
        let n_base = self.params.n;

        // n_k = 2 n_{k−1} and 2^N + Σ_{j≤k} n_j = n_{k+1}
        let mut exact = true;
        let mut sum = 1u64 << n_base;
        for k in 1..=self.k_max() {
            exact &= self.n_k(k) == 2 * self.n_k(k - 1);
            sum += self.n_k(k);
            exact &= sum == self.n_k(k + 1);
        }
        rep.push(
            "degree_identities",
            if exact { Status::Exact } else { Status::Fail },
            0.0,
            0.0,
            "",
        );

        let gate = |rep: &mut Report, id: String, worst: f64, tol: f64, applies: bool| {
            if !conf {
                rep.push(id, Status::Skipped, worst, tol, "exploratory parameters");
            } else if applies {
                rep.bound(id, worst, tol);
            } else {
                rep.push(id, Status::Skipped, worst, tol, "requires R > 8");
            }
        };

        let half_deg = (1u64 << (n_base - 1)) as f64;
        let mut worst_growth = f64::NEG_INFINITY;
        let mut worst_square = f64::NEG_INFINITY;
        let mut worst_sandwich = 0f64;
        for k in 1..=self.k_max() {
            let next = self.log_r(k + 1);
            let rhs = self.log_r(k).mul_f64(half_deg) + self.log_r(k).mul_u64(self.n_k(k - 1));
            let rhs = rhs.add_f64(self.n_k(k) as f64 * LN_2);
            worst_growth = worst_growth.max((rhs - next).to_f64());
            let sq = (self.log_r(k) + self.log_r(k)).add_f64(LN_4);
            worst_square = worst_square.max((sq - next).to_f64());
            let gap = (next - self.log_c(k)).add_f64(-2.0 * self.n_k(k) as f64 * LN_2);
            worst_sandwich = worst_sandwich.max(gap.to_f64().abs());
        }
        gate(
            &mut rep,
            "growth_lower_bound".into(),
            worst_growth,
            0.0,
            true,
        );
        gate(&mut rep, "squaring_growth".into(), worst_square, 0.0, true);
        gate(
            &mut rep,
            "radius_constant_sandwich".into(),
            worst_sandwich,
            LN_8,
            true,
        );

        // |C_k| ≥ R_k^{n_{k−1}} / 2^k for k ≥ 2; additionally ≥ 8 R_k when R > 8.
        let mut worst_c = f64::NEG_INFINITY;
        let mut worst_c8 = f64::NEG_INFINITY;
        for k in 1..=self.k_max() {
            if k >= 2 {
                let lower = self
                    .log_r(k)
                    .mul_u64(self.n_k(k - 1))
                    .add_f64(-(k as f64) * LN_2);
                worst_c = worst_c.max((lower - self.log_c(k)).to_f64());
            }
            let eight = self.log_r(k).add_f64(LN_8);
            worst_c8 = worst_c8.max((eight - self.log_c(k)).to_f64());
        }
        if self.k_max() >= 2 {
            gate(&mut rep, "c_lower_bound".into(), worst_c, 0.0, true);
        }
        gate(
            &mut rep,
            "c_exceeds_8r".into(),
            worst_c8,
            0.0,
            self.params.r > 8.0,
        );

        let mut worst_mono = (-self.log_c(1)).to_f64();
        for k in 1..self.k_max() {
            worst_mono = worst_mono.max((self.log_c(k) - self.log_c(k + 1)).to_f64());
        }
        gate(&mut rep, "c_monotone".into(), worst_mono, 0.0, true);
        rep
    }

    /// Stable hex digest of the serialised schedule.
    pub fn hash(&self) -> String {
        let doc = serde_json::to_vec(&self.to_doc()).expect("schedule serialises");
        let digest = Sha256::digest(&doc);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_doc(&self) -> ScheduleDoc {
        ScheduleDoc {
            mu: [self.params.mu.re, self.params.mu.im],
            c: [self.params.c.re, self.params.c.im],
            n_base: self.params.n,
            r: self.params.r,
            k_max: self.params.k_max,
            conformant: self.params.conformant,
            n: self.n.clone(),
            log_r: self.log_r.iter().map(|d| d.hi).collect(),
            log_r_tail: self.log_r.iter().map(|d| [d.mid, d.lo]).collect(),
            log_c: (1..=self.k_max())
                .map(|k| LogCEntry {
                    log_mag: self.log_c(k).hi,
                    log_mag_tail: [self.log_c(k).mid, self.log_c(k).lo],
                    sign: Self::c_sign(k),
                })
                .collect(),
            sample_counts: self.sample_counts.clone(),
            validation: self.validation.clone(),
            attractor: self.attractor.map(|a| [a.re, a.im]),
            checks: self.checks.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("schedule serialises")
    }

    pub fn from_doc(doc: ScheduleDoc) -> Result<Self> {
        let params = Params::new(
            Complex64::new(doc.mu[0], doc.mu[1]),
            doc.n_base,
            doc.r,
            doc.k_max,
            doc.conformant,
        )?;
        let k = doc.k_max as usize;
        if doc.n.len() != k + 2 || doc.log_r.len() != k + 1 || doc.log_c.len() != k {
            return Err(Error::Format(
                "schedule arrays have inconsistent lengths".into(),
            ));
        }
        let tail = if doc.log_r_tail.len() == doc.log_r.len() {
            doc.log_r_tail.clone()
        } else {
            vec![[0.0; 2]; doc.log_r.len()]
        };
        let log_r = doc
            .log_r
            .iter()
            .zip(&tail)
            .map(|(&hi, &[mid, lo])| Td::from_words(hi, mid, lo))
            .collect();
        let c_log = LogComplex::from_cartesian(params.c);
        let mut s = Schedule {
            params,
            n: doc.n,
            log_r,
            log_c: Vec::new(),
            sample_counts: doc.sample_counts,
            validation: doc.validation,
            attractor: doc.attractor.map(|a| Complex64::new(a[0], a[1])),
            checks: doc.checks,
            c_log,
        };
        s.log_c = (1..=s.k_max()).map(|k| s.log_c_formula(k)).collect();
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(text)?)
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    if m == f64::INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `H_m(w) = w^m (2 − w^m)`.
pub fn eval_h(m: u64, w: LogComplex) -> LogComplex {
    let u = w.pow_int(m);
    u.mul(two().add(u.neg()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogCEntry {
    pub log_mag: f64,
    #[serde(default)]
    pub log_mag_tail: [f64; 2],
    pub sign: i8,
}

/// JSON form of a [`Schedule`]. `logR_tail` carries the lower words of the
/// triple-word radii; readers that only need binary64 may ignore it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub mu: [f64; 2],
    pub c: [f64; 2],
    #[serde(rename = "N")]
    pub n_base: u32,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "K_max")]
    pub k_max: u32,
    pub conformant: bool,
    pub n: Vec<u64>,
    #[serde(rename = "logR")]
    pub log_r: Vec<f64>,
    #[serde(rename = "logR_tail", default)]
    pub log_r_tail: Vec<[f64; 2]>,
    #[serde(rename = "logC")]
    pub log_c: Vec<LogCEntry>,
    pub sample_counts: Vec<usize>,
    pub validation: RValidation,
    pub attractor: Option<[f64; 2]>,
    pub checks: Report,
}

/// Which model a sampled band is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    /// `R_k/4 ≤ |z| < 4R_k` against `C_k H_{n_k}(z/R_k)`.
    A,
    /// `4R_k ≤ |z| < R_{k+1}/4` against `−C_k (z/R_k)^{2n_k}`.
    B,
    /// `5R_k/4 ≤ |z| ≤ 4R_k` against `C_k (z/R_k)^{2n_k}`.
    OuterSplit,
    /// `R_k/4 ≤ |z| ≤ 4R_k/5` against `2C_k (z/R_k)^{n_k}`.
    InnerSplit,
    /// `5R_k/4 ≤ |z| ≤ 3R_k`: the perturbation `h_k` of the power model.
    U,
}

/// Largest `| log|f(z)| − log|model(z)| |` over `samples` seeded random
/// points of the band at level `k`.
pub fn band_model_error(
    s: &Schedule,
    k: u32,
    band: Band,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let lr = s.log_r(k);
    let (lo, hi): (Td, Td) = match band {
        Band::A => (lr.add_f64(-LN_4), lr.add_f64(LN_4)),
        Band::B => (lr.add_f64(LN_4), s.log_r(k + 1).add_f64(-LN_4)),
        Band::OuterSplit => (lr.add_f64(1.25f64.ln()), lr.add_f64(LN_4)),
        Band::InnerSplit => (lr.add_f64(-LN_4), lr.add_f64(0.8f64.ln())),
        Band::U => (lr.add_f64(1.25f64.ln()), lr.add_f64(3f64.ln())),
    };
    let span = hi - lo;
    let errs = exec::map_range(samples, |i| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((k as u64) << 32) ^ i as u64);
        let t: f64 = rng.gen();
        let theta: f64 = rng.gen_range(-PI..PI);
        let z = LogComplex::from_polar(lo + span.mul_f64(t), theta);
        let f = s.eval_f(z, DEFAULT_REL_TOL)?;
        let m = match band {
            Band::A => s.model_a(k, z)?,
            Band::B => s.model_b(k, z)?,
            Band::OuterSplit | Band::U => s.model_outer_split(k, z)?,
            Band::InnerSplit => s.model_inner_split(k, z)?,
        };
        if f.is_zero() || m.is_zero() {
            return Ok(0.0);
        }
        Ok((f.log_mag - m.log_mag).to_f64().abs())
    });
    errs.into_iter()
        .try_fold(0f64, |acc, e| e.map(|e| acc.max(e)))
}

/// Number of random points per band used by [`verify_lemmas`].
pub const VERIFY_SAMPLES: usize = 1 << 11;

/// Runs the structural checks, the summability comparison, the sampled
/// local-model accuracy per band, and the annulus mapping checks.
pub fn verify_lemmas(s: &Schedule) -> Result<Report> {
    let conf = s.params.conformant;
    let mut rep = s.structural_checks();

    // Σ_{k≤K} 2^k N_k R_k^{−α} with N_k = n_1⋯n_k must shrink when R grows.
    let depth = s.k_max().min(3);
    let bigger = Params::new(s.params.mu, s.params.n, 2.0 * s.params.r, depth, false)?;
    let bigger = build_schedule(&bigger)?;
    for alpha in [0.5, 1.0] {
        let here = giant_sum_log(s, depth, alpha);
        let there = giant_sum_log(&bigger, depth, alpha);
        let id = format!("summability_decreasing_alpha_{alpha}");
        if conf {
            rep.bound(id, there - here, 0.0);
        } else {
            rep.push(
                id,
                Status::Skipped,
                there - here,
                0.0,
                "exploratory parameters",
            );
        }
    }

    for k in 1..=s.k_max() {
        let seed = 0x5eed_0000 + k as u64;
        let bands = [
            ("a_band_model", Band::A, 1e-6),
            ("b_band_power_model", Band::B, 1e-4),
            ("outer_split_model", Band::OuterSplit, 1e-6),
            ("inner_split_model", Band::InnerSplit, 1e-6),
        ];
        for (name, band, tol) in bands {
            let worst = band_model_error(s, k, band, VERIFY_SAMPLES, seed)?;
            let id = format!("{name}_k{k}");
            if conf && k >= 2 {
                rep.bound(id, worst, tol);
            } else {
                rep.push(
                    id,
                    Status::Info,
                    worst,
                    tol,
                    "implicit constant; measured only",
                );
            }
        }
        let h = band_model_error(s, k, Band::U, VERIFY_SAMPLES, seed)?;
        rep.push(
            format!("u_band_perturbation_k{k}"),
            Status::Info,
            h,
            f64::NAN,
            "measured |log(1 + h_k)|",
        );
    }

    rep.extend(crate::partition::check_mapping(s)?);
    Ok(rep)
}

fn giant_sum_log(s: &Schedule, depth: u32, alpha: f64) -> f64 {
    let mut log_nk = 0.0;
    let mut acc = f64::NEG_INFINITY;
    for k in 1..=depth {
        log_nk += (s.n_k(k) as f64).ln();
        let term = k as f64 * LN_2 + log_nk - alpha * s.log_r(k).to_f64();
        acc = log_add_exp(acc, term);
    }
    acc
}
