//! Complex numbers stored as (log-magnitude, phase).
//!
//! Magnitudes in this crate span far more than the binary64 exponent range,
//! so values are kept as `log|w|` (triple-double) and `arg w` (binary64)
//! with an explicit bound on the accumulated absolute phase error.

use std::f64::consts::{LN_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::td::Td;

/// Low word of 2π (`TAU + TAU_LO` is 2π to ~1e-32).
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// One rounding step on a phase in [−π, π).
pub const PHASE_ULP: f64 = 4.5e-16;

/// Scaled phase error above which a phase is flagged unreliable.
pub const PHASE_UNRELIABLE: f64 = 1e-3;

/// Phases this close below π are folded onto −π.
const PI_SNAP: f64 = PI - 4.0 * f64::EPSILON;

/// Reduces `x` into [−π, π) using a two-word 2π.
#[inline]
pub fn wrap_phase(x: f64) -> f64 {
    if (-PI..PI_SNAP).contains(&x) {
        return x;
    }
    let k = (x / TAU).round();
    let y = (-k).mul_add(TAU, x);
    fold((-k).mul_add(TAU_LO, y))
}

/// Reduces the exact product `n * theta` into [−π, π).
///
/// The product is formed as a double word so the reduction stays accurate
/// for `n` up to 2^30 and beyond.
#[inline]
pub fn wrap_mul(n: u64, theta: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n > (1u64 << 53) {
        let hi = (n >> 26) << 26;
        return wrap_phase(wrap_mul(hi, theta) + wrap_mul(n - hi, theta));
    }
    let nf = n as f64;
    let p = nf * theta;
    let pe = nf.mul_add(theta, -p);
    let k = (p / TAU).round();
    let y = (-k).mul_add(TAU, p);
    let y = (-k).mul_add(TAU_LO, y) + pe;
    fold(y)
}

#[inline]
fn fold(mut y: f64) -> f64 {
    if y >= PI_SNAP {
        y -= TAU;
    } else if y < -PI {
        y += TAU;
    }
    if !(-PI..PI_SNAP).contains(&y) {
        -PI
    } else {
        y
    }
}

/// Nonzero complex number as `(log|w|, arg w)`; `log_mag = −∞` is zero.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mag: Td,
    pub phase: f64,
    pub phase_err: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mag: Td::NEG_INFINITY,
        phase: 0.0,
        phase_err: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_mag: Td::ZERO,
        phase: 0.0,
        phase_err: 0.0,
    };

    /// Exact value `exp(log_mag + i·phase)`.
    pub fn from_polar(log_mag: impl Into<Td>, phase: f64) -> Self {
        LogComplex {
            log_mag: log_mag.into(),
            phase: wrap_phase(phase),
            phase_err: 0.0,
        }
    }

    pub fn from_cartesian(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return LogComplex::ZERO;
        }
        LogComplex {
            log_mag: Td::from_f64(z.re.hypot(z.im).ln()),
            phase: fold(z.im.atan2(z.re)),
            phase_err: PHASE_ULP,
        }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            LogComplex::ZERO
        } else if x > 0.0 {
            LogComplex::from_polar(x.ln(), 0.0)
        } else {
            LogComplex::from_polar((-x).ln(), -PI)
        }
    }

    /// Converts back; overflows to infinity or underflows to zero outside
    /// the binary64 range.
    pub fn to_cartesian(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let m = self.log_mag.to_f64().exp();
        let (s, c) = self.phase.sin_cos();
        Complex64::new(m * c, m * s)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.log_mag.hi == f64::NEG_INFINITY
    }

    /// `false` once the accumulated phase error exceeds 1e−3 rad.
    #[inline]
    pub fn phase_reliable(&self) -> bool {
        self.phase_err <= PHASE_UNRELIABLE
    }

    /// `log|w|` as a binary64 (loses the low word).
    #[inline]
    pub fn ln_abs(&self) -> f64 {
        self.log_mag.to_f64()
    }

    pub fn mul(self, b: LogComplex) -> LogComplex {
        if self.is_zero() || b.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex {
            log_mag: self.log_mag + b.log_mag,
            phase: wrap_phase(self.phase + b.phase),
            phase_err: self.phase_err + b.phase_err + PHASE_ULP,
        }
    }

    /// # Panics
    /// On division by zero.
    pub fn div(self, b: LogComplex) -> LogComplex {
        self.mul(b.recip())
    }

    /// # Panics
    /// If `self` is zero.
    pub fn recip(self) -> LogComplex {
        assert!(!self.is_zero(), "reciprocal of zero");
        LogComplex {
            log_mag: -self.log_mag,
            phase: fold(-self.phase),
            phase_err: self.phase_err,
        }
    }

    pub fn neg(self) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex {
            log_mag: self.log_mag,
            phase: wrap_phase(self.phase + PI),
            phase_err: self.phase_err + PHASE_ULP,
        }
    }

    /// Multiplies the magnitude by `exp(delta)`.
    pub fn scale_log(self, delta: Td) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex {
            log_mag: self.log_mag + delta,
            ..self
        }
    }

    /// `self^n`; the phase `n·arg` is reduced with a compensated product.
    pub fn pow_int(self, n: u64) -> LogComplex {
        if n == 0 {
            return LogComplex::ONE;
        }
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex {
            log_mag: self.log_mag.mul_u64(n),
            phase: wrap_mul(n, self.phase),
            phase_err: self.phase_err * n as f64 + PHASE_ULP,
        }
    }

    /// Sum, evaluated as `a·(1 + b/a)` with `|b/a| ≤ 1`.
    pub fn add(self, other: LogComplex) -> LogComplex {
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return other;
        }
        let (big, small) = if other.log_mag > self.log_mag {
            (other, self)
        } else {
            (self, other)
        };
        let d = (small.log_mag - big.log_mag).to_f64();
        // exp(-746) underflows: the small term cannot move the result.
        if d < -746.0 {
            return LogComplex {
                phase_err: big.phase_err + PHASE_ULP,
                ..big
            };
        }
        let rho = d.exp();
        let phi = wrap_phase(small.phase - big.phase);
        let (s, c) = phi.sin_cos();
        let re = rho * c;
        let im = rho * s;
        let one_re = 1.0 + re;
        let abs_s = one_re.hypot(im);
        if abs_s <= 4.0 * f64::EPSILON {
            return LogComplex::ZERO;
        }
        let m2 = 2.0 * re + rho * rho;
        let ln_s = if m2 > -0.5 {
            0.5 * m2.ln_1p()
        } else {
            abs_s.ln()
        };
        let carried = rho * (big.phase_err + small.phase_err) + PHASE_ULP;
        LogComplex {
            log_mag: big.log_mag.add_f64(ln_s),
            phase: wrap_phase(big.phase + im.atan2(one_re)),
            phase_err: big.phase_err + carried / abs_s + PHASE_ULP,
        }
    }

    pub fn sub(self, other: LogComplex) -> LogComplex {
        self.add(other.neg())
    }
}

/// `½` and `2` used by the model maps.
pub fn half() -> LogComplex {
    LogComplex::from_polar(-LN_2, 0.0)
}

pub fn two() -> LogComplex {
    LogComplex::from_polar(LN_2, 0.0)
}

impl fmt::Debug for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LogComplex(log|w| = {:?}, arg = {}, err = {:e})",
            self.log_mag, self.phase, self.phase_err
        )
    }
}
