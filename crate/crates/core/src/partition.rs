//! Radial decomposition of the plane into the core disk and the bands
//! `A_k`, `B_k`, orbit itineraries through that decomposition, and fate
//! classification of orbits.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construction::{coarse_samples, max_log_modulus, Schedule, DEFAULT_REL_TOL};
use crate::error::{Error, Result};
use crate::exec;
use crate::logcomplex::LogComplex;
use crate::report::{Report, Status};
use crate::td::Td;

const LN_4: f64 = 2.0 * LN_2;
/// Distance to the attracting fixed point that counts as trapped.
pub const TRAP_RADIUS: f64 = 1e-6;
/// Width of the band around the petal level sets reported as ambiguous.
pub const PETAL_BOUNDARY: f64 = 1e-9;
/// Samples per circle in [`check_mapping`].
pub const MAPPING_SAMPLES: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zone {
    Core,
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subzone {
    None,
    U,
    V,
    PetalCandidate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionLabel {
    pub zone: Zone,
    /// Band index, absent for the core.
    pub k: Option<u32>,
    pub subzone: Subzone,
    pub petal_hint: Option<u64>,
}

impl RegionLabel {
    fn core() -> Self {
        RegionLabel {
            zone: Zone::Core,
            k: None,
            subzone: Subzone::None,
            petal_hint: None,
        }
    }

    fn b(k: u32) -> Self {
        RegionLabel {
            zone: Zone::B,
            k: Some(k),
            subzone: Subzone::None,
            petal_hint: None,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.zone, self.k) {
            (Zone::Core, _) => write!(f, "Core")?,
            (Zone::A, Some(k)) => write!(f, "A{k}")?,
            (Zone::B, Some(k)) => write!(f, "B{k}")?,
            (z, None) => write!(f, "{z:?}")?,
        }
        match self.subzone {
            Subzone::None => Ok(()),
            Subzone::U => write!(f, ":U"),
            Subzone::V => write!(f, ":V"),
            Subzone::PetalCandidate => match self.petal_hint {
                Some(i) => write!(f, ":P{i}"),
                None => write!(f, ":P"),
            },
        }
    }
}

/// Classifies `z` by modulus: core `|z| < R_1/4`, `A_k` for
/// `R_k/4 ≤ |z| < 4R_k`, `B_k` for `4R_k ≤ |z| < R_{k+1}/4`.
///
/// Inside `A_k`, petal candidates take precedence over `V_k ⊂ U_k`.
pub fn classify(s: &Schedule, z: LogComplex) -> Result<RegionLabel> {
    let lz = z.log_mag;
    if !(lz < s.log_certified()) {
        return Err(Error::OutOfRange {
            log_abs: lz.to_f64(),
            bound: s.log_certified().to_f64(),
        });
    }
    if lz < s.log_core_radius() {
        return Ok(RegionLabel::core());
    }
    for k in 1..=s.k_max() {
        let lr = s.log_r(k);
        if lz < lr.add_f64(LN_4) {
            return Ok(a_label(s, k, z));
        }
        if lz < s.log_r(k + 1).add_f64(-LN_4) {
            return Ok(RegionLabel::b(k));
        }
    }
    unreachable!("certified range ends at the last B band")
}

fn a_label(s: &Schedule, k: u32, z: LogComplex) -> RegionLabel {
    let w = z.scale_log(-s.log_r(k));
    let t = w.log_mag.to_f64();
    let mut label = RegionLabel {
        zone: Zone::A,
        k: Some(k),
        subzone: Subzone::None,
        petal_hint: None,
    };
    if let PetalClass::Petal(i) = petal_membership(s.n_k(k), w) {
        label.subzone = Subzone::PetalCandidate;
        label.petal_hint = Some(i);
    } else if t >= 1.5f64.ln() && t <= 2.5f64.ln() {
        label.subzone = Subzone::V;
    } else if t >= 1.25f64.ln() && t <= 3f64.ln() {
        label.subzone = Subzone::U;
    }
    label
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PetalClass {
    Petal(u64),
    Inner,
    Outer,
    Boundary,
}

/// Locates `w` relative to the sublevel set `{|H_m| < 1}`,
/// `H_m(w) = w^m (2 − w^m)`.
///
/// With `u = w^m`, the set `|u(2 − u)| < 1` is the interior of a lemniscate
/// whose two lobes meet at `u = 1` and are split by `Re u = 1`. The lobe
/// around `u = 0` pulls back to the inner component, the lobe around `u = 2`
/// to the `m` petals, petal `i` containing `2^{1/m} e^{2πi·i/m}`.
pub fn petal_membership(m: u64, w: LogComplex) -> PetalClass {
    assert!(m >= 1, "petal count must be positive");
    if w.is_zero() {
        return PetalClass::Inner;
    }
    let u = w.pow_int(m);
    let h = u.mul(crate::logcomplex::two().add(u.neg()));
    let lh = h.ln_abs();
    if lh.abs() <= PETAL_BOUNDARY {
        return PetalClass::Boundary;
    }
    if lh > 0.0 {
        return PetalClass::Outer;
    }
    let re_u = u.ln_abs().exp() * u.phase.cos();
    if (re_u - 1.0).abs() <= PETAL_BOUNDARY {
        return PetalClass::Boundary;
    }
    if re_u < 1.0 {
        return PetalClass::Inner;
    }
    let turns = (m as f64 * w.phase / TAU).round();
    PetalClass::Petal(turns.rem_euclid(m as f64) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FateTag {
    EscapesViaB,
    FastEscaping,
    Trapdoor,
    BoundedCore,
    Undecided,
}

impl FateTag {
    pub fn name(self) -> &'static str {
        match self {
            FateTag::EscapesViaB => "EscapesViaB",
            FateTag::FastEscaping => "FastEscaping",
            FateTag::Trapdoor => "Trapdoor",
            FateTag::BoundedCore => "BoundedCore",
            FateTag::Undecided => "Undecided",
        }
    }

    pub fn escapes(self) -> bool {
        matches!(self, FateTag::EscapesViaB | FateTag::FastEscaping)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitFate {
    pub tag: FateTag,
    /// Step at which the fate was decided.
    pub step: Option<usize>,
    /// B band entered, for escaping orbits.
    pub level: Option<u32>,
    /// Final distance to the attractor, for trapped orbits.
    pub distance: Option<f64>,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub n: usize,
    pub label: RegionLabel,
    pub log_abs: Td,
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    PrecisionLoss,
    OutOfRange,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Itinerary {
    pub steps: Vec<Step>,
    pub backward_events: Vec<usize>,
    pub fate: OrbitFate,
    pub truncated: Option<Truncation>,
    /// Set when a B step is followed by anything but a higher B band.
    pub chain_violation: bool,
}

impl Itinerary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,label,log_abs,phase\n");
        for st in &self.steps {
            out.push_str(&format!(
                "{},{},{:e},{:e}\n",
                st.n,
                st.label,
                st.log_abs.to_f64(),
                st.phase
            ));
        }
        out
    }
}

/// Indices `n` where step `n` is in some `A_k` and step `n+1` is in `A_j`,
/// `j ≤ k`, or falls into the core.
pub fn backward_events(steps: &[Step]) -> Vec<usize> {
    steps
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].label, w[1].label);
            if a.zone != Zone::A {
                return None;
            }
            let back = match b.zone {
                Zone::Core => true,
                Zone::A => b.k <= a.k,
                Zone::B => false,
            };
            back.then_some(w[0].n)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
    /// Keep iterating after the first B step to record the escape chain.
    pub follow_escape: bool,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            max_iter: 64,
            rel_tol: DEFAULT_REL_TOL,
            follow_escape: false,
        }
    }
}

/// Iterates `f` from `z0`, labelling every step.
///
/// Stops at the first B step (escape), on landing within [`TRAP_RADIUS`] of
/// the attracting fixed point, or after `max_iter` applications of `f`.
/// Leaving the certified range or losing phase precision truncates the
/// orbit and is flagged.
pub fn orbit(s: &Schedule, z0: LogComplex, opts: &OrbitOptions) -> Result<Itinerary> {
    if opts.max_iter == 0 {
        return Err(Error::Domain("max_iter must be at least 1".into()));
    }
    let target = s.attractor.unwrap_or(s.params.mu / 2.0);
    let mut steps = Vec::new();
    let mut fate: Option<OrbitFate> = None;
    let mut truncated = None;
    let mut chain_violation = false;
    let mut only_core = true;
    let mut z = z0;
    for n in 0..=opts.max_iter {
        let label = match classify(s, z) {
            Ok(l) => l,
            Err(e) if n == 0 => return Err(e),
            Err(_) => {
                truncated = Some(Truncation::OutOfRange);
                break;
            }
        };
        if let Some(prev) = steps.last().map(|p: &Step| p.label) {
            if prev.zone == Zone::B && !(label.zone == Zone::B && label.k > prev.k) {
                chain_violation = true;
            }
        }
        steps.push(Step {
            n,
            label,
            log_abs: z.log_mag,
            phase: z.phase,
        });
        only_core &= label.zone == Zone::Core;
        match label.zone {
            Zone::B => {
                if fate.is_none() {
                    fate = Some(OrbitFate {
                        tag: FateTag::EscapesViaB,
                        step: Some(n),
                        level: label.k,
                        distance: None,
                        max_iter: opts.max_iter,
                    });
                }
                if !opts.follow_escape {
                    break;
                }
            }
            Zone::Core if fate.is_none() => {
                let d = (z.to_cartesian() - target).norm();
                if d <= TRAP_RADIUS {
                    fate = Some(OrbitFate {
                        tag: FateTag::Trapdoor,
                        step: Some(n),
                        level: None,
                        distance: Some(d),
                        max_iter: opts.max_iter,
                    });
                    break;
                }
            }
            _ => {}
        }
        if n == opts.max_iter {
            break;
        }
        match s.eval_f(z, opts.rel_tol) {
            Ok(next) if next.phase_reliable() => z = next,
            Ok(_) | Err(Error::PrecisionLoss { .. }) => {
                truncated = Some(Truncation::PrecisionLoss);
                break;
            }
            Err(Error::OutOfRange { .. }) => {
                truncated = Some(Truncation::OutOfRange);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let fate = fate.unwrap_or(OrbitFate {
        tag: if only_core && truncated.is_none() {
            FateTag::BoundedCore
        } else {
            FateTag::Undecided
        },
        step: None,
        level: None,
        distance: None,
        max_iter: opts.max_iter,
    });
    Ok(Itinerary {
        backward_events: backward_events(&steps),
        steps,
        fate,
        truncated,
        chain_violation,
    })
}

/// Upgrades an escaping itinerary to [`FastEscaping`](FateTag::FastEscaping)
/// when, from some shift `ℓ`, every recorded `|z_{ℓ+n}|` dominates `S_n`
/// (at least one comparison required).
pub fn refine_fast_escaping(it: &mut Itinerary, log_s: &[Td]) -> bool {
    if it.fate.tag != FateTag::EscapesViaB || log_s.is_empty() {
        return false;
    }
    let entry = it.fate.step.unwrap_or(0);
    for shift in entry..it.steps.len() {
        let avail = (it.steps.len() - shift).min(log_s.len());
        if avail == 0 {
            break;
        }
        let ok = (0..avail).all(|n| it.steps[shift + n].log_abs >= log_s[n]);
        if ok {
            it.fate.tag = FateTag::FastEscaping;
            return true;
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SSequence {
    pub log_s: Vec<Td>,
    /// Set when the requested length could not be reached inside the
    /// certified range.
    pub truncated: bool,
}

/// `S_{n+1} = max_{|z| = S_n} |f(z)|`, starting from a circle in `B_1`.
pub fn compute_s_sequence(s: &Schedule, log_s0: Td, length: usize) -> Result<SSequence> {
    let lo = s.log_r(1).add_f64(LN_4);
    let hi = s.log_r(2).add_f64(-LN_4);
    if !(log_s0 >= lo && log_s0 < hi) {
        return Err(Error::Domain(format!(
            "S0 circle (log radius {}) is not inside B_1",
            log_s0
        )));
    }
    let mut log_s = vec![log_s0];
    while log_s.len() < length {
        let cur = *log_s.last().unwrap();
        let level = match classify(s, LogComplex::from_polar(cur, 0.0))? {
            RegionLabel { k: Some(k), .. } => k,
            _ => 1,
        };
        let samples = coarse_samples(s.n_k((level + 1).min(s.k_max() + 1)));
        let mm = max_log_modulus(
            |theta| match s.eval_f(LogComplex::from_polar(cur, theta), DEFAULT_REL_TOL) {
                Ok(v) => v.log_mag,
                Err(_) => Td::NEG_INFINITY,
            },
            samples,
        );
        if !(mm.log_max < s.log_certified()) {
            return Ok(SSequence {
                log_s,
                truncated: true,
            });
        }
        log_s.push(mm.log_max);
    }
    Ok(SSequence {
        log_s,
        truncated: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FateRecord {
    pub seed_log_r: f64,
    pub seed_theta: f64,
    pub fate: FateTag,
    pub steps: usize,
    pub backward_events: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FateSummary {
    pub records: Vec<FateRecord>,
    pub counts: BTreeMap<String, usize>,
    /// Number of seeds by backward-event count.
    pub backward_histogram: BTreeMap<usize, usize>,
}

impl FateSummary {
    pub fn count(&self, tag: FateTag) -> usize {
        self.counts.get(tag.name()).copied().unwrap_or(0)
    }

    pub fn fraction_with_backward_event(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let hit = self
            .records
            .iter()
            .filter(|r| r.backward_events > 0)
            .count();
        hit as f64 / self.records.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed_log_r,seed_theta,fate,steps,backward_events\n");
        for r in &self.records {
            out.push_str(&format!(
                "{:e},{:e},{},{},{}\n",
                r.seed_log_r,
                r.seed_theta,
                r.fate.name(),
                r.steps,
                r.backward_events
            ));
        }
        out
    }
}

/// Runs [`orbit`] from every seed. Records keep the seed order.
pub fn fate_statistics(s: &Schedule, seeds: &[LogComplex], max_iter: usize) -> Result<FateSummary> {
    let opts = OrbitOptions {
        max_iter,
        ..OrbitOptions::default()
    };
    let results = exec::map_slice(seeds, |&z| orbit(s, z, &opts));
    let mut records = Vec::with_capacity(seeds.len());
    let mut counts = BTreeMap::new();
    let mut backward_histogram = BTreeMap::new();
    for (z, it) in seeds.iter().zip(results) {
        let it = it?;
        *counts.entry(it.fate.tag.name().to_string()).or_insert(0) += 1;
        *backward_histogram
            .entry(it.backward_events.len())
            .or_insert(0) += 1;
        records.push(FateRecord {
            seed_log_r: z.log_mag.to_f64(),
            seed_theta: z.phase,
            fate: it.fate.tag,
            steps: it.steps.len(),
            backward_events: it.backward_events.len(),
        });
    }
    Ok(FateSummary {
        records,
        counts,
        backward_histogram,
    })
}

/// Seeds evenly spaced in angle on the circle of log radius `log_r`.
pub fn circle_seeds(log_r: Td, count: usize) -> Vec<LogComplex> {
    (0..count)
        .map(|i| LogComplex::from_polar(log_r, -PI + TAU * i as f64 / count as f64))
        .collect()
}

/// Checks, for every `k ≤ K_max − 1`, that `f` maps the circle
/// `|z| = 5R_k/2` into the `B_{k+1}` magnitude window, the circle
/// `|z| = 3R_k/2` into `B_k`, and samples of `B_k` into `B_{k+1}`.
///
/// Worst values are the largest signed distance (in log modulus) outside
/// the target window; non-positive means every sample landed inside.
pub fn check_mapping(s: &Schedule) -> Result<Report> {
    let conf = s.params.conformant;
    let mut rep = Report::new(if conf { "conformant" } else { "exploratory" });
    for k in 1..s.k_max() {
        let window = |j: u32| (s.log_r(j).add_f64(LN_4), s.log_r(j + 1).add_f64(-LN_4));
        let lr = s.log_r(k);
        let circles = [
            (
                "mapping_outer_boundary",
                lr.add_f64(2.5f64.ln()),
                window(k + 1),
            ),
            ("mapping_inner_boundary", lr.add_f64(1.5f64.ln()), window(k)),
            (
                "mapping_b_band_circle",
                lr.add_f64(8f64.ln()),
                window(k + 1),
            ),
        ];
        for (name, radius, win) in circles {
            let worst = worst_excursion(s, &circle_seeds(radius, MAPPING_SAMPLES), win)?;
            push_gate(&mut rep, conf, format!("{name}_k{k}"), worst);
        }
        let (lo, hi) = window(k);
        let span = hi - lo;
        let mut rng = ChaCha8Rng::seed_from_u64(0xb0b5 + k as u64);
        let pts: Vec<LogComplex> = (0..MAPPING_SAMPLES)
            .map(|_| {
                let t: f64 = rng.gen();
                LogComplex::from_polar(lo + span.mul_f64(t), rng.gen_range(-PI..PI))
            })
            .collect();
        let worst = worst_excursion(s, &pts, window(k + 1))?;
        push_gate(&mut rep, conf, format!("mapping_b_band_random_k{k}"), worst);
    }
    Ok(rep)
}

fn push_gate(rep: &mut Report, conformant: bool, id: String, worst: f64) {
    if conformant {
        rep.bound(id, worst, 0.0);
    } else {
        rep.push(id, Status::Skipped, worst, 0.0, "exploratory parameters");
    }
}

fn worst_excursion(s: &Schedule, pts: &[LogComplex], (lo, hi): (Td, Td)) -> Result<f64> {
    let vals = exec::map_slice(pts, |&z| s.eval_f(z, DEFAULT_REL_TOL).map(|w| w.log_mag));
    let mut worst = f64::NEG_INFINITY;
    for v in vals {
        let v = v?;
        let below = (lo - v).to_f64();
        let above = (v - hi).to_f64();
        worst = worst.max(below.max(above));
    }
    Ok(worst)
}
