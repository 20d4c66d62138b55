//! Distribution function of `T = Σ aₖzₖ² + bₖzₖ` by inverting its
//! characteristic function (Gil-Pelaez / Imhof):
//!
//! ```text
//! F(t) = ½ − (1/π) ∫₀^∞ Im[e^{−iut} φ(u)] / u du
//! φ(u) = Πₖ (1 − 2iaₖu)^{−½} · exp(−bₖ²u² / (2(1 − 2iaₖu)))
//! ```
//!
//! The integrand decays only like `u^{−1−m/2}` (m = number of nonzero aₖ)
//! and oscillates with asymptotic frequency `ω = −t − Σ bₖ²/(4aₖ)`. The head
//! of the integral is split into geometrically growing pieces; once the
//! oscillation dominates, half-period pieces are summed and accelerated with
//! Wynn's epsilon algorithm.

use std::f64::consts::PI;

use crate::bounds::DiagonalForm;
use crate::error::{validation, Error, Result};
use crate::quadrature::{integrate, WynnEpsilon};

/// Target absolute accuracy of the returned probability.
pub const CDF_TOLERANCE: f64 = 1e-6;

// Absolute tolerance on the integral; the probability is the integral / π.
const INTEGRAL_TOLERANCE: f64 = 1e-9;
const PIECE_TOLERANCE: f64 = 1e-12;
const MAX_INTERVALS: usize = 4_000;
const MAX_GEOMETRIC_PIECES: usize = 400;
const MAX_OSCILLATION_PIECES: usize = 20_000;
const WYNN_WINDOW: usize = 40;

/// CDF value together with the estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfCdf {
    pub value: f64,
    pub error: f64,
}

struct Integrand<'a> {
    a: &'a [f64],
    b: &'a [f64],
    t: f64,
}

impl Integrand<'_> {
    fn log_modulus(&self, u: f64) -> f64 {
        self.a
            .iter()
            .zip(self.b)
            .map(|(&a, &b)| {
                let w = 4.0 * a * a * u * u;
                -0.25 * w.ln_1p() - 0.5 * b * b * u * u / (1.0 + w)
            })
            .sum()
    }

    /// `arg φ(u) − tu`. Each coordinate contributes `−ab²u³/(1 + 4a²u²)`;
    /// once `4a²u² > 1` that is split into `−(b²/4a)·u + (b²/4a)·u/(1 + 4a²u²)`
    /// and the linear parts are summed as coefficients before multiplying by
    /// `u`, which avoids cancelling large phases when `ω ≈ 0`.
    fn phase(&self, u: f64) -> f64 {
        let mut slope = -self.t;
        let mut rest = 0.0;
        for (&a, &b) in self.a.iter().zip(self.b) {
            if a == 0.0 {
                continue;
            }
            let w = 4.0 * a * a * u * u;
            rest += 0.5 * (2.0 * a * u).atan();
            if w <= 1.0 {
                rest -= a * b * b * u * u * u / (1.0 + w);
            } else {
                let c = b * b / (4.0 * a);
                slope -= c;
                rest += c * u / (1.0 + w);
            }
        }
        slope * u + rest
    }

    fn eval(&self, u: f64) -> f64 {
        self.log_modulus(u).exp() * self.phase(u).sin() / u
    }

    /// `κ(U)` with `|φ(u)| ≤ |φ(U)|·(u/U)^{−κ}` for `u ≥ U`.
    fn decay_rate(&self, u: f64) -> f64 {
        self.a
            .iter()
            .zip(self.b)
            .map(|(&a, &b)| {
                if a == 0.0 {
                    b * b * u * u
                } else {
                    let w = 4.0 * a * a * u * u;
                    0.5 * w / (1.0 + w)
                }
            })
            .sum()
    }

    /// Upper bound on `∫_U^∞ |φ(u)|/u du`.
    fn tail_bound(&self, u: f64) -> f64 {
        let kappa = self.decay_rate(u);
        if kappa <= 0.0 {
            return f64::INFINITY;
        }
        self.log_modulus(u).exp() / kappa
    }
}

/// `P(T ≤ t)` for a non-deterministic diagonal form.
pub fn cdf_cf(form: &DiagonalForm, t: f64) -> Result<f64> {
    cdf_cf_detailed(form, t).map(|r| r.value)
}

pub fn cdf_cf_detailed(form: &DiagonalForm, t: f64) -> Result<CfCdf> {
    if form.is_deterministic() {
        return Err(validation("characteristic-function CDF needs a non-deterministic form"));
    }
    if !t.is_finite() {
        return Ok(CfCdf {
            value: if t > 0.0 { 1.0 } else { 0.0 },
            error: 0.0,
        });
    }
    let integrand = Integrand {
        a: form.a(),
        b: form.b(),
        t,
    };
    let f = |u: f64| integrand.eval(u);

    let nonzero_a = form.a().iter().filter(|a| **a != 0.0).map(|a| a.abs());
    let max_a = nonzero_a.clone().fold(0.0_f64, f64::max);
    let min_a = nonzero_a.fold(f64::INFINITY, f64::min);
    let b_norm = form.b().iter().map(|b| b * b).sum::<f64>().sqrt();
    // first piece resolves the fastest feature of |φ|
    let scale = f64::min(
        if max_a > 0.0 { 0.5 / max_a } else { f64::INFINITY },
        if b_norm > 0.0 { 1.0 / b_norm } else { f64::INFINITY },
    );
    // the phase is asymptotically linear only once every 2|aₖ|u ≫ 1
    let slowest = if min_a.is_finite() { 0.5 / min_a } else { scale };
    let omega = -t
        - form
            .a()
            .iter()
            .zip(form.b())
            .filter(|(a, _)| **a != 0.0)
            .map(|(a, b)| b * b / (4.0 * a))
            .sum::<f64>();
    let half_period = if omega != 0.0 { PI / omega.abs() } else { f64::INFINITY };
    let switch_at = if half_period.is_finite() {
        half_period * (16.0 * slowest / half_period).max(1.0).ceil()
    } else {
        f64::INFINITY
    };

    let mut total = 0.0;
    let mut error = 0.0;
    let mut lo = 0.0;
    let mut hi = scale;
    for _ in 0..MAX_GEOMETRIC_PIECES {
        let end = hi.min(switch_at);
        let piece = integrate(f, lo, end, PIECE_TOLERANCE, PIECE_TOLERANCE, MAX_INTERVALS)?;
        total += piece.value;
        error += piece.error;
        let tail = integrand.tail_bound(end);
        if tail < INTEGRAL_TOLERANCE {
            return Ok(finish(total, error + tail));
        }
        lo = end;
        if end >= switch_at {
            return oscillating_tail(&integrand, total, error, lo, half_period);
        }
        hi *= 2.0;
    }
    Err(Error::Quadrature {
        reason: "characteristic function did not decay over the integration range".into(),
        achieved: (error + integrand.tail_bound(lo)) / PI,
    })
}

fn oscillating_tail(
    integrand: &Integrand<'_>,
    head: f64,
    head_error: f64,
    start: f64,
    half_period: f64,
) -> Result<CfCdf> {
    let f = |u: f64| integrand.eval(u);
    let mut wynn = WynnEpsilon::with_window(WYNN_WINDOW);
    let mut partial = head;
    let mut error = head_error;
    let mut lo = start;
    for k in 0..MAX_OSCILLATION_PIECES {
        let hi = start + (k + 1) as f64 * half_period;
        let piece = integrate(f, lo, hi, PIECE_TOLERANCE, PIECE_TOLERANCE, MAX_INTERVALS)?;
        partial += piece.value;
        error += piece.error;
        lo = hi;

        let tail = integrand.tail_bound(hi);
        if tail < INTEGRAL_TOLERANCE {
            return Ok(finish(partial, error + tail));
        }
        let estimate = wynn.push(partial);
        if wynn.len() >= 8 && wynn.error_estimate() < INTEGRAL_TOLERANCE {
            return Ok(finish(estimate, error + wynn.error_estimate()));
        }
    }
    Err(Error::Quadrature {
        reason: format!("oscillatory tail did not converge within {MAX_OSCILLATION_PIECES} half periods"),
        achieved: (error + wynn.error_estimate()) / PI,
    })
}

fn finish(integral: f64, error: f64) -> CfCdf {
    CfCdf {
        value: (0.5 - integral / PI).clamp(0.0, 1.0),
        error: error / PI,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::cdf_p1;

    fn diag(a: &[f64], b: &[f64]) -> DiagonalForm {
        DiagonalForm::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn matches_closed_form_in_one_dimension() {
        for &(a, b) in &[(1.0, 0.0), (-2.0, 0.5), (0.3, 2.0), (0.0, 1.5), (1e-6, 1.0)] {
            for t in [-3.0, -0.5, 0.0, 0.4, 1.0, 2.5, 6.0] {
                let got = cdf_cf(&diag(&[a], &[b]), t).unwrap();
                let want = cdf_p1(a, b, t);
                assert!((got - want).abs() < 1e-6, "a={a} b={b} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn chi_square_three() {
        let got = cdf_cf(&diag(&[1.0; 3], &[0.0; 3]), 3.0).unwrap();
        assert!((got - 0.608_374_823_728_911).abs() < 1e-8, "{got}");
    }

    #[test]
    fn monotone_and_bounded() {
        let form = diag(&[1.5, -0.7, 0.2, 0.0], &[0.3, 1.0, -0.4, 0.8]);
        let mut prev = 0.0;
        for i in -40..=40 {
            let v = cdf_cf(&form, 0.25 * i as f64).unwrap();
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev - 2e-6, "not monotone at {i}");
            prev = v;
        }
    }

    #[test]
    fn deterministic_form_is_rejected() {
        assert!(cdf_cf(&diag(&[0.0, 0.0], &[0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn infinite_arguments() {
        let form = diag(&[1.0], &[0.0]);
        assert_eq!(cdf_cf(&form, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(cdf_cf(&form, f64::NEG_INFINITY).unwrap(), 0.0);
    }
}
