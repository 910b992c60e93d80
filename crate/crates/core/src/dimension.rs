//! Fractal dimension estimators: dyadic box counting, Whitney decompositions
//! with their critical exponent, and box-counting estimates for Julia sets
//! of `z² + c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::construction::cardioid_c;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::PixelGrid;
use crate::quadratic::julia_points_iim;

/// Finest level supported for point sets (Morton keys use 62 bits).
pub const MAX_POINT_LEVEL: u32 = 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Box,
    Whitney,
}

/// Occupied dyadic boxes per level; level `n` has boxes of side `2^{−n}`
/// relative to the bounding window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountsTable {
    pub levels: Vec<u32>,
    pub counts: Vec<u64>,
    /// Finest level the data can resolve.
    pub floor: u32,
}

impl CountsTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,count\n");
        for (l, c) in self.levels.iter().zip(&self.counts) {
            out.push_str(&format!("{l},{c}\n"));
        }
        out
    }

    /// Restriction to levels in `lo..=hi`.
    pub fn range(&self, lo: u32, hi: u32) -> CountsTable {
        let (levels, counts) = self
            .levels
            .iter()
            .zip(&self.counts)
            .filter(|(&l, _)| l >= lo && l <= hi)
            .map(|(&l, &c)| (l, c))
            .unzip();
        CountsTable {
            levels,
            counts,
            floor: self.floor,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub method: Method,
    pub value: f64,
    /// `(finest, coarsest)` level used in the fit.
    pub scale_range: (u32, u32),
    /// RMS residual of the fit, in units of `ln N`.
    pub residual: f64,
    /// Raw `(level, value)` data behind the fit.
    pub counts_table: Vec<(u32, f64)>,
}

#[inline]
fn spread_bits(x: u32) -> u64 {
    let mut v = x as u64;
    v = (v | (v << 16)) & 0x0000_ffff_0000_ffff;
    v = (v | (v << 8)) & 0x00ff_00ff_00ff_00ff;
    v = (v | (v << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    v = (v | (v << 2)) & 0x3333_3333_3333_3333;
    v = (v | (v << 1)) & 0x5555_5555_5555_5555;
    v
}

#[inline]
fn morton(ix: u32, iy: u32) -> u64 {
    spread_bits(ix) | (spread_bits(iy) << 1)
}

/// Counts for sorted, deduplicated Morton keys at level `finest`.
fn counts_from_keys(keys: &[u64], finest: u32, levels: &[u32]) -> Vec<u64> {
    levels
        .iter()
        .map(|&n| {
            let shift = 2 * (finest - n);
            let mut count = 0u64;
            let mut last = None;
            for &k in keys {
                let c = k >> shift;
                if last != Some(c) {
                    count += 1;
                    last = Some(c);
                }
            }
            count
        })
        .collect()
}

fn check_levels(levels: &[u32], floor: u32) -> Result<u32> {
    if levels.is_empty() {
        return Err(Error::InsufficientScales { needed: 1, got: 0 });
    }
    let finest = *levels.iter().max().unwrap();
    if finest > floor {
        return Err(Error::Resolution(format!(
            "level {finest} is finer than the resolution floor {floor}"
        )));
    }
    Ok(finest)
}

/// Box counts of a point set over its bounding square.
pub fn box_count_points(points: &[Complex64], levels: &[u32]) -> Result<CountsTable> {
    if points.is_empty() {
        return Err(Error::Domain("empty point set".into()));
    }
    let finest = check_levels(levels, MAX_POINT_LEVEL)?;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    let side = (x1 - x0).max(y1 - y0);
    let side = if side > 0.0 { side } else { 1.0 };
    let cells = (1u64 << finest) as f64;
    let top = (1u64 << finest) - 1;
    let idx = |v: f64, lo: f64| (((v - lo) / side * cells) as u64).min(top) as u32;
    let mut keys = exec::map_slice(points, |p| morton(idx(p.re, x0), idx(p.im, y0)));
    keys.sort_unstable();
    keys.dedup();
    Ok(CountsTable {
        levels: levels.to_vec(),
        counts: counts_from_keys(&keys, finest, levels),
        floor: MAX_POINT_LEVEL,
    })
}

fn dyadic_side(grid: &PixelGrid) -> Result<u32> {
    if grid.nx != grid.ny || !grid.nx.is_power_of_two() {
        return Err(Error::Resolution(format!(
            "mask must be square with a power-of-two side, got {}x{}",
            grid.nx, grid.ny
        )));
    }
    Ok(grid.nx.trailing_zeros())
}

/// Box counts of the nonzero cells of a square `2^M × 2^M` mask; the
/// window is the whole grid.
pub fn box_count_mask(grid: &PixelGrid, levels: &[u32]) -> Result<CountsTable> {
    let m = dyadic_side(grid)?;
    let finest = check_levels(levels, m)?;
    let shift = m - finest;
    let mut keys: Vec<u64> = grid
        .cells
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, _)| {
            let ix = (i % grid.nx) as u32 >> shift;
            let iy = (i / grid.nx) as u32 >> shift;
            morton(ix, iy)
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    Ok(CountsTable {
        levels: levels.to_vec(),
        counts: counts_from_keys(&keys, finest, levels),
        floor: m,
    })
}

/// Least-squares slope and RMS residual of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, icept, rms)
}

/// Slope of `ln N(n)` against `n ln 2`. Levels with zero count are dropped.
pub fn fit_dimension(table: &CountsTable) -> Result<DimensionEstimate> {
    let pts: Vec<(u32, u64)> = table
        .levels
        .iter()
        .zip(&table.counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&l, &c)| (l, c))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientScales {
            needed: 4,
            got: pts.len(),
        });
    }
    let lo = pts.iter().map(|p| p.0).min().unwrap();
    let hi = pts.iter().map(|p| p.0).max().unwrap();
    if hi - lo < 3 {
        return Err(Error::InsufficientScales {
            needed: 4,
            got: (hi - lo + 1) as usize,
        });
    }
    let x: Vec<f64> = pts
        .iter()
        .map(|p| p.0 as f64 * std::f64::consts::LN_2)
        .collect();
    let y: Vec<f64> = pts.iter().map(|p| (p.1 as f64).ln()).collect();
    let (slope, _, rms) = linear_fit(&x, &y);
    Ok(DimensionEstimate {
        method: Method::Box,
        value: slope,
        scale_range: (hi, lo),
        residual: rms,
        counts_table: pts.iter().map(|&(l, c)| (l, c as f64)).collect(),
    })
}

/// Dyadic square of side `2^{−level}` at column `i`, row `j` (rows counted
/// from the top of the window, which is the unit square).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub level: u32,
    pub i: u32,
    pub j: u32,
    /// Distance from the cube to the set, in window units.
    pub dist: f64,
}

impl WhitneyCube {
    pub fn diam(&self) -> f64 {
        std::f64::consts::SQRT_2 * 0.5f64.powi(self.level as i32)
    }
}

const INF: u64 = u64::MAX;

/// One-dimensional squared distance transform (lower envelope of
/// parabolas rooted at the finite entries of `f`).
fn edt_1d(f: &[u64], out: &mut [u64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    for q in 0..n {
        if f[q] == INF {
            continue;
        }
        let fq = f[q] as f64 + (q * q) as f64;
        while let Some(&p) = v.last() {
            let s = (fq - (f[p] as f64 + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
        if v.is_empty() {
            v.push(q);
            z.push(f64::NEG_INFINITY);
        }
    }
    if v.is_empty() {
        out.iter_mut().for_each(|o| *o = INF);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q.abs_diff(p) as u64;
        *o = d * d + f[p];
    }
}

/// Exact squared Euclidean distance (in pixels, between pixel centres) from
/// every cell to the nearest nonzero cell.
pub fn squared_distance_transform(grid: &PixelGrid) -> Vec<u64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let cols = exec::map_range(nx, |x| {
        let f: Vec<u64> = (0..ny)
            .map(|y| if grid.cells[y * nx + x] != 0 { 0 } else { INF })
            .collect();
        let mut out = vec![0; ny];
        edt_1d(&f, &mut out, &mut Vec::new(), &mut Vec::new());
        out
    });
    let mut d = vec![0u64; nx * ny];
    exec::for_each_chunk_mut(&mut d, nx, |y, row| {
        let f: Vec<u64> = (0..nx).map(|x| cols[x][y]).collect();
        edt_1d(&f, row, &mut Vec::new(), &mut Vec::new());
    });
    d
}

/// `pyramid[n]` holds the minimum of `fine` over each level-`n` square.
fn min_pyramid(fine: Vec<u64>, m: u32) -> Vec<Vec<u64>> {
    let mut pyramid: Vec<Vec<u64>> = vec![fine];
    for n in (0..m).rev() {
        let side = 1usize << n;
        let fine = pyramid.last().unwrap();
        let coarse = exec::map_range(side * side, |idx| {
            let (i, j) = (idx % side, idx / side);
            let fs = 2 * side;
            let a = fine[(2 * j) * fs + 2 * i];
            let b = fine[(2 * j) * fs + 2 * i + 1];
            let c = fine[(2 * j + 1) * fs + 2 * i];
            let d = fine[(2 * j + 1) * fs + 2 * i + 1];
            a.min(b).min(c).min(d)
        });
        pyramid.push(coarse);
    }
    pyramid.reverse();
    pyramid
}

/// Maximal dyadic squares `Q` of level at most `max_level` inside the
/// complement of the mask's nonzero cells with `diam(Q) ≤ dist(Q, K)`.
///
/// Distances are measured between pixel centres on the grid, so squares are
/// resolved down to the pixel floor. Output is sorted by level, row, column.
pub fn whitney_decompose(mask: &PixelGrid, max_level: u32) -> Result<Vec<WhitneyCube>> {
    let m = dyadic_side(mask)?;
    if max_level > m {
        return Err(Error::Resolution(format!(
            "max_level {max_level} exceeds the grid resolution 2^{m}"
        )));
    }
    if mask.count_nonzero() == 0 {
        return Err(Error::Domain("mask has no set cells".into()));
    }
    let pyramid = min_pyramid(squared_distance_transform(mask), m);

    let pixel = 0.5f64.powi(m as i32);
    let mut cubes = Vec::new();
    let mut stack = vec![(0u32, 0u32, 0u32)];
    while let Some((n, i, j)) = stack.pop() {
        let side = 1usize << n;
        let d2 = pyramid[n as usize][j as usize * side + i as usize];
        let s_px = 1u64 << (m - n);
        if d2 != 0 && 2 * s_px * s_px <= d2 {
            cubes.push(WhitneyCube {
                level: n,
                i,
                j,
                dist: (d2 as f64).sqrt() * pixel,
            });
        } else if n < max_level {
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                stack.push((n + 1, 2 * i + di, 2 * j + dj));
            }
        }
    }
    cubes.sort_by_key(|c| (c.level, c.j, c.i));
    Ok(cubes)
}

/// Exhaustive grid check of a decomposition produced for `mask` with
/// `max_level`: every square obeys `diam ≤ dist` and has a parent that does
/// not, squares are pairwise disjoint, and every uncovered complement pixel
/// lies in a finest-level square that violates the rule.
pub fn check_whitney(mask: &PixelGrid, cubes: &[WhitneyCube], max_level: u32) -> Result<()> {
    let m = dyadic_side(mask)?;
    let fail = |msg: String| Err(Error::Domain(format!("Whitney check failed: {msg}")));
    let pyramid = min_pyramid(squared_distance_transform(mask), m);
    let ok = |n: u32, i: u32, j: u32| {
        let d2 = pyramid[n as usize][j as usize * (1usize << n) + i as usize];
        let s = 1u64 << (m - n);
        d2 != 0 && 2 * s * s <= d2
    };
    let side = mask.nx;
    let mut owner = vec![false; side * side];
    for c in cubes {
        if c.level > max_level || !ok(c.level, c.i, c.j) {
            return fail(format!("square {c:?} violates diam <= dist"));
        }
        if c.level > 0 && ok(c.level - 1, c.i / 2, c.j / 2) {
            return fail(format!("square {c:?} is not maximal"));
        }
        let s = 1usize << (m - c.level);
        for y in c.j as usize * s..(c.j as usize + 1) * s {
            for x in c.i as usize * s..(c.i as usize + 1) * s {
                if std::mem::replace(&mut owner[y * side + x], true) {
                    return fail(format!("square {c:?} overlaps another"));
                }
            }
        }
    }
    let s = 1usize << (m - max_level);
    for (idx, &covered) in owner.iter().enumerate() {
        if !covered && mask.cells[idx] == 0 {
            let (x, y) = (idx % side, idx / side);
            if ok(max_level, (x / s) as u32, (y / s) as u32) {
                return fail(format!("pixel ({x}, {y}) is not covered"));
            }
        }
    }
    Ok(())
}

/// Diameter of the bounding box of the nonzero cells, in window units.
pub fn set_bbox_diameter(mask: &PixelGrid) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
    for (idx, &c) in mask.cells.iter().enumerate() {
        if c != 0 {
            let (x, y) = (idx % mask.nx, idx / mask.nx);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if x0 == usize::MAX {
        return 0.0;
    }
    let w = (x1 - x0 + 1) as f64 / mask.nx as f64;
    let h = (y1 - y0 + 1) as f64 / mask.ny as f64;
    w.hypot(h)
}

/// Keeps the squares within `bound` of the set.
pub fn restrict_to_distance(cubes: &[WhitneyCube], bound: f64) -> Vec<WhitneyCube> {
    cubes.iter().copied().filter(|c| c.dist <= bound).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub alpha: f64,
    /// Fitted slope of `log2 T_n(α)` in `n`, where `T_n(α)` is the level-`n`
    /// contribution `#cubes_n · diam_n^α`.
    pub growth: f64,
    /// `(L, S_L(α))`: sums over all cubes of level at most `L`.
    pub partial_sums: Vec<(u32, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponent {
    pub estimate: DimensionEstimate,
    /// Tested exponents bracketing the sign change of the growth.
    pub bracket: (f64, f64),
    pub table: Vec<AlphaRow>,
}

impl CriticalExponent {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,level,partial_sum\n");
        for row in &self.table {
            for (l, s) in &row.partial_sums {
                out.push_str(&format!("{},{},{:e}\n", row.alpha, l, s));
            }
        }
        out
    }
}

/// Critical exponent of `Σ diam(Q)^α` over a Whitney family: the `α` at
/// which the per-level growth of the sum changes sign, interpolated between
/// the tested exponents.
///
/// The growth is fitted over levels `fit_levels = (lo, hi)`.
pub fn critical_exponent(
    cubes: &[WhitneyCube],
    alphas: &[f64],
    fit_levels: (u32, u32),
) -> Result<CriticalExponent> {
    let (lo, hi) = fit_levels;
    if hi < lo + 3 {
        return Err(Error::InsufficientScales {
            needed: 4,
            got: (hi.saturating_sub(lo) + 1) as usize,
        });
    }
    let max_level = cubes.iter().map(|c| c.level).max().unwrap_or(0);
    let mut per_level = vec![0u64; max_level as usize + 1];
    for c in cubes {
        per_level[c.level as usize] += 1;
    }
    let fit: Vec<(u32, u64)> = (lo..=hi.min(max_level))
        .filter(|&n| per_level[n as usize] > 0)
        .map(|n| (n, per_level[n as usize]))
        .collect();
    if fit.len() < 4 {
        return Err(Error::InsufficientScales {
            needed: 4,
            got: fit.len(),
        });
    }
    let xs: Vec<f64> = fit.iter().map(|p| p.0 as f64).collect();
    let log_counts: Vec<f64> = fit.iter().map(|p| (p.1 as f64).log2()).collect();
    let (count_slope, _, rms_log2) = linear_fit(&xs, &log_counts);

    let table: Vec<AlphaRow> = alphas
        .iter()
        .map(|&alpha| {
            let diam = |n: u32| std::f64::consts::SQRT_2 * 0.5f64.powi(n as i32);
            let mut acc = 0.0;
            let partial_sums = (0..=max_level)
                .map(|n| {
                    acc += per_level[n as usize] as f64 * diam(n).powf(alpha);
                    (n, acc)
                })
                .collect();
            // log2 T_n = log2 #_n + α (1/2 − n), so the slope is linear in α.
            let ys: Vec<f64> = fit
                .iter()
                .map(|&(n, c)| (c as f64).log2() + alpha * diam(n).log2())
                .collect();
            let (growth, _, _) = linear_fit(&xs, &ys);
            AlphaRow {
                alpha,
                growth,
                partial_sums,
            }
        })
        .collect();

    let mut bracket = None;
    for w in table.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.growth == 0.0 {
            bracket = Some((a.alpha, a.alpha, a.alpha));
            break;
        }
        if (a.growth > 0.0) != (b.growth > 0.0) || b.growth == 0.0 {
            let t = a.growth / (a.growth - b.growth);
            bracket = Some((a.alpha, b.alpha, a.alpha + t * (b.alpha - a.alpha)));
            break;
        }
    }
    let (blo, bhi, value) = bracket.ok_or(Error::NoBracket)?;
    debug_assert!((value - count_slope).abs() < 1e-9 || alphas.len() < 2);
    Ok(CriticalExponent {
        estimate: DimensionEstimate {
            method: Method::Whitney,
            value,
            scale_range: (fit.last().unwrap().0, fit[0].0),
            residual: rms_log2 * std::f64::consts::LN_2,
            counts_table: fit.iter().map(|&(n, c)| (n, c as f64)).collect(),
        },
        bracket: (blo, bhi),
        table,
    })
}

/// Box-counting fit levels for a `2^m`-pixel mask: the two finest levels
/// sit at the pixel floor, the coarsest ones see only a handful of boxes.
pub fn default_box_levels(m: u32) -> (u32, u32) {
    (m.saturating_sub(8).max(1), m.saturating_sub(2))
}

/// Whitney fit levels for a `2^m`-pixel mask. Coarse levels are dominated
/// by the few largest complementary gaps.
pub fn default_whitney_levels(m: u32) -> (u32, u32) {
    (m.saturating_sub(6).max(1), m.saturating_sub(2))
}

/// Sample size and fitting levels for quadratic Julia-set estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadBudget {
    pub points: usize,
    pub seed: u64,
    pub levels: (u32, u32),
}

impl Default for QuadBudget {
    fn default() -> Self {
        QuadBudget {
            points: 1_000_000,
            seed: 1,
            levels: (5, 11),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadEstimate {
    pub c: Complex64,
    pub estimate: DimensionEstimate,
    /// `(sample size, estimate)` at one tenth and the full budget.
    pub convergence: Vec<(usize, f64)>,
}

/// Box-counting dimension of the Julia set of `z² + c` from inverse
/// iteration samples.
pub fn estimate_quadratic_dim(c: Complex64, budget: &QuadBudget) -> Result<QuadEstimate> {
    let pts = julia_points_iim(c, budget.points, budget.seed)?;
    let levels: Vec<u32> = (budget.levels.0..=budget.levels.1).collect();
    let fit_at = |n: usize| -> Result<f64> {
        Ok(fit_dimension(&box_count_points(&pts[..n], &levels)?)?.value)
    };
    let small = (budget.points / 10).max(1);
    let convergence = vec![
        (small, fit_at(small)?),
        (budget.points, fit_at(budget.points)?),
    ];
    let estimate = fit_dimension(&box_count_points(&pts, &levels)?)?;
    Ok(QuadEstimate {
        c,
        estimate,
        convergence,
    })
}

/// Small-`|c|` expansion of the Julia set dimension, `1 + |c|²/(4 ln 2)`.
pub fn small_c_dimension(c: Complex64) -> f64 {
    1.0 + c.norm_sqr() / (4.0 * std::f64::consts::LN_2)
}

/// Sweep points on the real multiplier ray.
pub const SWEEP_T: [f64; 6] = [0.05, 0.2, 0.4, 0.6, 0.8, 0.95];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoundC {
    pub mu: f64,
    pub c: Complex64,
    pub achieved: f64,
    /// Set when no sampled parameter met the tolerance; `achieved` is then
    /// the closest value found.
    pub best_effort: bool,
    /// `(t, estimate)` for every evaluated multiplier.
    pub evaluations: Vec<(f64, f64)>,
}

/// Searches the real multiplier ray `μ = t ∈ (0, 1)` for a parameter whose
/// estimated Julia-set dimension is within `tol` of `target`: a fixed sweep
/// establishes the attainable range, then bisection between the bracketing
/// sweep points.
pub fn find_c_for_dimension(target: f64, tol: f64, budget: &QuadBudget) -> Result<FoundC> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol = {tol} must be positive")));
    }
    let estimate = |t: f64| -> Result<f64> {
        let c = cardioid_c(Complex64::new(t, 0.0))?;
        Ok(estimate_quadratic_dim(c, budget)?.estimate.value)
    };
    let sweep: Vec<f64> = SWEEP_T
        .iter()
        .map(|&t| estimate(t))
        .collect::<Result<_>>()?;
    let mut evaluations: Vec<(f64, f64)> =
        SWEEP_T.iter().copied().zip(sweep.iter().copied()).collect();
    let lo = sweep.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sweep.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if target < lo - tol || target > hi + tol {
        return Err(Error::Unreachable { target, lo, hi });
    }
    let mut best = evaluations
        .iter()
        .copied()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .unwrap();
    if (best.1 - target).abs() > tol {
        let pair = SWEEP_T
            .windows(2)
            .zip(sweep.windows(2))
            .find(|(_, v)| (v[0] - target) * (v[1] - target) <= 0.0);
        if let Some((t, v)) = pair {
            let (mut ta, mut va, mut tb) = (t[0], v[0], t[1]);
            for _ in 0..12 {
                let tm = 0.5 * (ta + tb);
                let vm = estimate(tm)?;
                evaluations.push((tm, vm));
                if (vm - target).abs() < (best.1 - target).abs() {
                    best = (tm, vm);
                }
                if (vm - target).abs() <= tol {
                    break;
                }
                if (va - target) * (vm - target) <= 0.0 {
                    tb = tm;
                } else {
                    ta = tm;
                    va = vm;
                }
            }
        }
    }
    let c = cardioid_c(Complex64::new(best.0, 0.0))?;
    Ok(FoundC {
        mu: best.0,
        c,
        achieved: best.1,
        best_effort: (best.1 - target).abs() > tol,
        evaluations,
    })
}
