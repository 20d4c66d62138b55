//! Log-MGF chain for `T = Σ aₖzₖ² + bₖzₖ` and numerical checks of each step.
//!
//! For one coordinate, `E exp(y(az² + bz)) = exp(b²y²/(2(1−2ay))) / √(1−2ay)`
//! whenever `1 − 2ay > 0`. Summing the centred logs over coordinates and
//! bounding each term gives the envelope
//!
//! ```text
//! log E exp(y(T − ΣaK)) ≤ u²y² / (1 − 2a⁺y),   0 < y < 1/(2a⁺)
//! ```
//!
//! from which `P(T − mean ≥ 2u√x + 2a⁺x) ≤ e⁻ˣ` follows by the Chernoff
//! argument. The per-coordinate step rests on the scalar inequality checked by
//! [`check_scalar_ineq`].

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{Direction, DiagonalForm, FormStats};
use crate::error::{validation, Error, Result};

/// Relative slack allowed when comparing the log-MGF against the envelope.
pub const ENVELOPE_SLACK: f64 = 1e-10;
/// Relative slack for the scalar inequality.
pub const SCALAR_SLACK: f64 = 1e-12;
/// Grids stop at this fraction of the pole `1/(2a⁺)`.
pub const POLE_FRACTION: f64 = 0.999;
/// Upper end of the y-grid when `a⁺ = 0` and the envelope has no pole.
pub const POLE_FREE_Y_MAX: f64 = 10.0;

/// `(uy)² / (1 − vy)` on `0 < y < 1/v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfEnvelope {
    pub u: f64,
    pub v: f64,
}

impl MgfEnvelope {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite() && u >= 0.0 && v >= 0.0) {
            return Err(validation(format!(
                "envelope parameters must be finite and nonnegative, got u = {u}, v = {v}"
            )));
        }
        Ok(Self { u, v })
    }

    /// `u = √u²`, `v = 2a⁺` (upper) or `2a⁻` (lower).
    pub fn for_tail(stats: &FormStats, direction: Direction) -> Self {
        Self {
            u: stats.u_sq.sqrt(),
            v: stats.linear_coefficient(direction),
        }
    }

    /// Right end of the domain; infinite when `v = 0`.
    pub fn pole(&self) -> f64 {
        if self.v > 0.0 {
            1.0 / self.v
        } else {
            f64::INFINITY
        }
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y < self.pole()) {
            return Err(Error::Domain {
                what: format!("envelope defined on (0, {})", self.pole()),
                y,
            });
        }
        let uy = self.u * y;
        Ok(uy * uy / (1.0 - self.v * y))
    }
}

/// `log E exp(y(az² + bz))`.
pub fn log_mgf_term(a: f64, b: f64, y: f64) -> Result<f64> {
    let denom = 1.0 - 2.0 * a * y;
    if !(denom > 0.0) {
        return Err(Error::Domain {
            what: format!("MGF of {a}·z² + {b}·z diverges (1 − 2ay ≤ 0)"),
            y,
        });
    }
    Ok(0.5 * b * b * y * y / denom - 0.5 * (-2.0 * a * y).ln_1p())
}

/// `log E exp(y(T − Σaₖ))`, summed coordinate by coordinate.
pub fn log_mgf_centered(form: &DiagonalForm, y: f64) -> Result<f64> {
    form.a()
        .iter()
        .zip(form.b())
        .map(|(&a, &b)| log_mgf_term(a, b, y).map(|v| v - a * y))
        .sum()
}

/// `u²y² / (1 − 2a⁺y)` for `0 < y < 1/(2a⁺)`.
pub fn envelope_rhs(stats: &FormStats, y: f64) -> Result<f64> {
    MgfEnvelope::for_tail(stats, Direction::Upper).eval(y)
}

/// Both sides of `−½ln(1 − 2ry) − ry ≤ r²y²/(1 − 2ay)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_scalar_ineq(r: f64, a: f64, y: f64) -> Result<ScalarCheck> {
    if !(r.is_finite() && a.is_finite() && y.is_finite()) {
        return Err(validation("scalar inequality arguments must be finite"));
    }
    if y < 0.0 {
        return Err(validation(format!("y must be nonnegative, got {y}")));
    }
    if !(1.0 - 2.0 * a * y > 0.0) {
        return Err(validation(format!("y = {y} is outside (0, 1/(2a)) for a = {a}")));
    }
    if !(1.0 - 2.0 * r * y > 0.0) {
        return Err(validation(format!("1 − 2ry ≤ 0 for r = {r}, y = {y}")));
    }
    let lhs = -0.5 * (-2.0 * r * y).ln_1p() - r * y;
    let rhs = r * r * y * y / (1.0 - 2.0 * a * y);
    Ok(ScalarCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + SCALAR_SLACK * (1.0 + rhs.abs()),
    })
}

/// Outcome of comparing the centred log-MGF with its envelope on a y-grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub points: usize,
    pub y_max: f64,
    /// `max(lhs − rhs)` over the grid; negative when the envelope is strict.
    pub max_slack: f64,
    pub worst_y: f64,
    pub violations: usize,
    /// Smallest grid index (1-based) that violates the tolerance.
    pub first_violation: Option<usize>,
}

impl EnvelopeCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Right end of the y-grid used for envelope checks.
pub fn envelope_grid_end(stats: &FormStats) -> f64 {
    if stats.a_plus > 0.0 {
        POLE_FRACTION / (2.0 * stats.a_plus)
    } else {
        POLE_FREE_Y_MAX
    }
}

/// Evaluates the envelope inequality at `yᵢ = y_max·i/n`, `i = 1..=n`.
pub fn verify_envelope(form: &DiagonalForm, grid: usize) -> Result<EnvelopeCheck> {
    if grid == 0 {
        return Err(validation("grid size must be at least 1"));
    }
    let stats = form.stats();
    let y_max = envelope_grid_end(&stats);
    let slacks = (1..=grid)
        .into_par_iter()
        .map(|i| {
            let y = y_max * i as f64 / grid as f64;
            let lhs = log_mgf_centered(form, y)?;
            let rhs = envelope_rhs(&stats, y)?;
            let violated = lhs > rhs + ENVELOPE_SLACK * (1.0 + rhs.abs());
            Ok((y, lhs - rhs, violated))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut check = EnvelopeCheck {
        points: grid,
        y_max,
        max_slack: f64::NEG_INFINITY,
        worst_y: f64::NAN,
        violations: 0,
        first_violation: None,
    };
    for (i, &(y, slack, violated)) in slacks.iter().enumerate() {
        if slack > check.max_slack {
            check.max_slack = slack;
            check.worst_y = y;
        }
        if violated {
            check.violations += 1;
            check.first_violation.get_or_insert(i + 1);
        }
    }
    Ok(check)
}

/// Outcome of the scalar inequality on an `n³` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarGridCheck {
    pub points: usize,
    pub violations: usize,
    pub max_slack: f64,
    /// Lexicographically smallest failing `(a, r, y)` index.
    pub first_violation: Option<(usize, usize, usize)>,
}

/// Checks `check_scalar_ineq` for `a ∈ (0, 5]`, `r ∈ [−5, a]`,
/// `y ∈ (0, 0.999/(2a))`, `n` points per axis.
pub fn verify_scalar_grid(n: usize) -> Result<ScalarGridCheck> {
    if n < 2 {
        return Err(validation("scalar grid needs at least 2 points per axis"));
    }
    let per_a = (1..=n)
        .into_par_iter()
        .map(|ia| {
            let a = 5.0 * ia as f64 / n as f64;
            let y_max = POLE_FRACTION / (2.0 * a);
            let mut violations = 0;
            let mut max_slack = f64::NEG_INFINITY;
            let mut first = None;
            for ir in 0..n {
                let r = -5.0 + (a + 5.0) * ir as f64 / (n - 1) as f64;
                for iy in 1..=n {
                    let y = y_max * iy as f64 / n as f64;
                    let c = check_scalar_ineq(r, a, y)?;
                    max_slack = f64::max(max_slack, c.lhs - c.rhs);
                    if !c.holds {
                        violations += 1;
                        first.get_or_insert((ia - 1, ir, iy - 1));
                    }
                }
            }
            Ok((violations, max_slack, first))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ScalarGridCheck {
        points: n * n * n,
        violations: per_a.iter().map(|p| p.0).sum(),
        max_slack: per_a.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        first_violation: per_a.iter().find_map(|p| p.2),
    })
}

/// `sup_{0<y<1/v} [y·d − (uy)²/(1 − vy)]`, found by golden-section search.
///
/// The objective is concave on the envelope's domain, so the search converges
/// to the Chernoff exponent implied by the envelope. For `d = 2u√x + vx` the
/// supremum equals `x`.
pub fn chernoff_exponent(envelope: &MgfEnvelope, deviation: f64) -> Result<f64> {
    if !(deviation.is_finite() && deviation > 0.0) {
        return Err(validation(format!("deviation must be positive, got {deviation}")));
    }
    let MgfEnvelope { u, v } = *envelope;
    if u == 0.0 && v == 0.0 {
        return Err(Error::Degenerate("envelope with u = v = 0".into()));
    }
    let objective = |y: f64| {
        let uy = u * y;
        y * deviation - uy * uy / (1.0 - v * y)
    };
    // without a pole the maximiser is d/(2u²)
    let mut lo = 0.0;
    let mut hi = if v > 0.0 { 1.0 / v } else { deviation / (u * u) };

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = objective(x1);
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(f1.max(f2))
}
