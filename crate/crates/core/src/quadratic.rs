//! Dynamics of the base quadratic `f0(z) = z² + c`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{PixelGrid, Window};

/// Number of independent inverse-iteration chains.
pub const IIM_CHAINS: usize = 64;
/// Backward steps discarded at the start of every chain.
pub const IIM_BURN_IN: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Iterate {
    Bounded(Complex64),
    /// Modulus exceeded `2 + |c|` after this many steps.
    Escaped(usize),
}

pub fn escape_radius(c: Complex64) -> f64 {
    2.0 + c.norm()
}

/// `n`-fold iterate of `z² + c`, stopping once the orbit leaves the escape
/// disk.
pub fn f0_iterate(z: Complex64, c: Complex64, n: usize) -> Iterate {
    let r2 = escape_radius(c).powi(2);
    let mut z = z;
    if z.norm_sqr() > r2 {
        return Iterate::Escaped(0);
    }
    for step in 1..=n {
        z = z * z + c;
        if z.norm_sqr() > r2 {
            return Iterate::Escaped(step);
        }
    }
    Iterate::Bounded(z)
}

/// Cell code 1 where the pixel centre survives `max_iter` steps, else 0.
pub fn filled_julia_mask(
    c: Complex64,
    window: Window,
    nx: usize,
    ny: usize,
    max_iter: usize,
) -> Result<PixelGrid> {
    if max_iter == 0 {
        return Err(Error::Domain("max_iter must be at least 1".into()));
    }
    PixelGrid::from_fn(window, nx, ny, |_, _, z| {
        match f0_iterate(z.to_cartesian(), c, max_iter) {
            Iterate::Bounded(_) => 1,
            Iterate::Escaped(_) => 0,
        }
    })
}

/// Fixed points `(attracting, repelling)` of `z² + c`, or a domain error when
/// `c` lies outside the main cardioid.
pub fn fixed_points(c: Complex64) -> Result<(Complex64, Complex64)> {
    let d = (Complex64::new(1.0, 0.0) - 4.0 * c).sqrt();
    let a = (1.0 - d) / 2.0;
    let b = (1.0 + d) / 2.0;
    let (att, rep) = if (2.0 * a).norm() <= (2.0 * b).norm() {
        (a, b)
    } else {
        (b, a)
    };
    if !((2.0 * att).norm() < 1.0) {
        return Err(Error::Domain(format!(
            "c = {c} is outside the main cardioid"
        )));
    }
    Ok((att, rep))
}

/// `count` points of the Julia set of `z² + c` by inverse iteration
/// `z ← ±√(z − c)` from the repelling fixed point. Chains are seeded from
/// `seed` and concatenated in chain order, so the output is reproducible.
pub fn julia_points_iim(c: Complex64, count: usize, seed: u64) -> Result<Vec<Complex64>> {
    if count == 0 {
        return Err(Error::Domain("count must be at least 1".into()));
    }
    let (_, start) = fixed_points(c)?;
    let per_chain = count.div_ceil(IIM_CHAINS);
    let chains = exec::map_range(IIM_CHAINS, |chain| {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add((chain as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        );
        let mut z = start;
        let mut out = Vec::with_capacity(per_chain);
        for i in 0..IIM_BURN_IN + per_chain {
            let r = (z - c).sqrt();
            z = if rng.gen::<bool>() { r } else { -r };
            if i >= IIM_BURN_IN {
                out.push(z);
            }
        }
        out
    });
    let mut pts: Vec<Complex64> = chains.into_iter().flatten().collect();
    pts.truncate(count);
    Ok(pts)
}

pub fn points_to_csv(points: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for p in points {
        out.push_str(&format!("{:e},{:e}\n", p.re, p.im));
    }
    out
}
