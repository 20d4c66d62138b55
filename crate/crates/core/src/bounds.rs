//! Tail thresholds for `T = Σ aₖzₖ² + bₖzₖ`.
//!
//! With `mean = Σaₖ`, `u² = Σ(aₖ² + bₖ²/2)`, `a⁺ = max(maxₖ aₖ, 0)` and
//! `a⁻ = max(maxₖ −aₖ, 0)`, for every `x > 0`
//!
//! ```text
//! P(T ≥ mean + 2u√x + 2a⁺x) ≤ e⁻ˣ
//! P(T ≤ mean − 2u√x − 2a⁻x) ≤ e⁻ˣ
//! ```
//!
//! Matrix forms go through [`crate::spectral::reduce`] first, or through
//! [`matrix_form_stats`], which reads the same quantities off `tr(A)`,
//! `‖A + Aᵀ‖_F` and `‖b‖` directly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::spectral::{self, QuadraticForm};

/// Coefficients of `T = Σ aₖzₖ² + bₖzₖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalForm {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl DiagonalForm {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(validation("form dimension must be at least 1"));
        }
        if a.len() != b.len() {
            return Err(validation(format!(
                "a has length {} but b has length {}",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(validation("form coefficients must be finite"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// The form of `−T`.
    pub fn negated(&self) -> Self {
        Self {
            a: self.a.iter().map(|v| -v).collect(),
            b: self.b.iter().map(|v| -v).collect(),
        }
    }

    /// `a = b = 0`: `T` is identically zero.
    pub fn is_deterministic(&self) -> bool {
        self.a.iter().chain(&self.b).all(|&v| v == 0.0)
    }

    pub fn evaluate(&self, z: &[f64]) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .zip(z)
            .map(|((a, b), z)| (a * z + b) * z)
            .sum()
    }

    pub fn stats(&self) -> FormStats {
        form_stats(self)
    }
}

/// Which tail a bound controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Direction::Upper),
            "lower" => Ok(Direction::Lower),
            other => Err(validation(format!(
                "direction must be `upper` or `lower`, got `{other}`"
            ))),
        }
    }
}

/// Scalars that determine both thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormStats {
    /// `E[T] = Σaₖ`.
    pub mean: f64,
    /// Variance proxy `Σ(aₖ² + bₖ²/2)`.
    pub u_sq: f64,
    /// `max(maxₖ aₖ, 0)`.
    pub a_plus: f64,
    /// `max(maxₖ −aₖ, 0)`.
    pub a_minus: f64,
}

impl FormStats {
    /// Statistics of `−T`.
    pub fn negated(&self) -> Self {
        Self {
            mean: -self.mean,
            u_sq: self.u_sq,
            a_plus: self.a_minus,
            a_minus: self.a_plus,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.u_sq == 0.0
    }

    /// Slope of the sub-exponential term for the given tail, `2a⁺` or `2a⁻`.
    pub fn linear_coefficient(&self, direction: Direction) -> f64 {
        match direction {
            Direction::Upper => 2.0 * self.a_plus,
            Direction::Lower => 2.0 * self.a_minus,
        }
    }
}

pub fn form_stats(form: &DiagonalForm) -> FormStats {
    let mean = form.a.iter().sum();
    let u_sq = form
        .a
        .iter()
        .zip(&form.b)
        .map(|(a, b)| a * a + 0.5 * b * b)
        .sum();
    let a_plus = form.a.iter().copied().fold(0.0, f64::max);
    let a_minus = form.a.iter().map(|a| -a).fold(0.0, f64::max);
    FormStats {
        mean,
        u_sq,
        a_plus,
        a_minus,
    }
}

/// Statistics of a matrix form computed from `tr(A)`, `¼‖A + Aᵀ‖²_F + ½‖b‖²`
/// and the extreme eigenvalues of the symmetric part.
pub fn matrix_form_stats(form: &QuadraticForm) -> Result<FormStats> {
    let sym = spectral::symmetrize(form);
    let (eigenvalues, _) = spectral::eigen_sym(&sym)?;
    let b_sq: f64 = form.b().iter().map(|b| b * b).sum();
    let largest = eigenvalues[0];
    let smallest = eigenvalues[eigenvalues.len() - 1];
    Ok(FormStats {
        mean: form.matrix().trace(),
        u_sq: sym.frobenius_sq() + 0.5 * b_sq,
        a_plus: largest.max(0.0),
        a_minus: (-smallest).max(0.0),
    })
}

/// A threshold `t` with `P(T ≥ t) ≤ e⁻ˣ` (upper) or `P(T ≤ t) ≤ e⁻ˣ` (lower).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub direction: Direction,
    pub x: f64,
    pub threshold: f64,
    /// `e⁻ˣ`; underflows to 0 for `x` beyond about 745.
    pub prob_bound: f64,
}

fn check_exponent(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(validation(format!("x must be positive and finite, got {x}")));
    }
    Ok(())
}

/// `2u√x + vx`.
pub fn envelope_threshold(u: f64, v: f64, x: f64) -> Result<f64> {
    check_exponent(x)?;
    if !(u.is_finite() && v.is_finite() && u >= 0.0 && v >= 0.0) {
        return Err(validation(format!(
            "envelope parameters must be finite and nonnegative, got u = {u}, v = {v}"
        )));
    }
    if u == 0.0 && v == 0.0 {
        return Err(validation("envelope parameters u and v cannot both be zero"));
    }
    Ok(deviation(u, v, x))
}

fn deviation(u: f64, v: f64, x: f64) -> f64 {
    2.0 * u * x.sqrt() + v * x
}

pub fn upper_threshold(stats: &FormStats, x: f64) -> Result<TailBound> {
    check_exponent(x)?;
    let dev = deviation(stats.u_sq.sqrt(), 2.0 * stats.a_plus, x);
    Ok(TailBound {
        direction: Direction::Upper,
        x,
        threshold: stats.mean + dev,
        prob_bound: (-x).exp(),
    })
}

/// Evaluated as the negated upper threshold of `−T`, so the two agree bitwise.
pub fn lower_threshold(stats: &FormStats, x: f64) -> Result<TailBound> {
    let mirrored = upper_threshold(&stats.negated(), x)?;
    Ok(TailBound {
        direction: Direction::Lower,
        threshold: -mirrored.threshold,
        ..mirrored
    })
}

pub fn threshold(stats: &FormStats, x: f64, direction: Direction) -> Result<TailBound> {
    match direction {
        Direction::Upper => upper_threshold(stats, x),
        Direction::Lower => lower_threshold(stats, x),
    }
}

/// Smallest `x` whose threshold sits `deviation` away from the mean.
///
/// Solves `2u√x + vx = d` for `√x`. The root is written as
/// `d / (u + √(u² + vd))`, which avoids cancellation when `vd ≪ u²` and
/// reduces to `d/(2u)` when `v = 0`.
pub fn tail_exponent(stats: &FormStats, deviation: f64, direction: Direction) -> Result<TailBound> {
    if !(deviation.is_finite() && deviation > 0.0) {
        return Err(validation(format!(
            "deviation must be positive and finite, got {deviation}"
        )));
    }
    let u = stats.u_sq.sqrt();
    let v = stats.linear_coefficient(direction);
    if u == 0.0 && v == 0.0 {
        return Err(Error::Degenerate(
            "T is deterministic (a = b = 0); every deviation has probability zero".into(),
        ));
    }
    let root = deviation / (u + (u * u + v * deviation).sqrt());
    let x = root * root;
    let threshold = match direction {
        Direction::Upper => stats.mean + deviation,
        Direction::Lower => stats.mean - deviation,
    };
    Ok(TailBound {
        direction,
        x,
        threshold,
        prob_bound: (-x).exp(),
    })
}

/// Thresholds that hold simultaneously for all forms with probability at
/// least `1 − e⁻ˣ`: each form is evaluated at `x + ln M`.
pub fn union_threshold(stats_list: &[FormStats], x: f64, direction: Direction) -> Result<Vec<TailBound>> {
    check_exponent(x)?;
    if stats_list.is_empty() {
        return Err(validation("union bound needs at least one form"));
    }
    let inflated = x + (stats_list.len() as f64).ln();
    stats_list
        .iter()
        .map(|s| threshold(s, inflated, direction))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(a: &[f64], b: &[f64]) -> DiagonalForm {
        DiagonalForm::new(a.to_vec(), b.to_vec()).unwrap()
    }

    fn chi5() -> FormStats {
        diag(&[1.0; 5], &[0.0; 5]).stats()
    }

    #[test]
    fn stats_chi_square() {
        assert_eq!(
            chi5(),
            FormStats {
                mean: 5.0,
                u_sq: 5.0,
                a_plus: 1.0,
                a_minus: 0.0
            }
        );
    }

    #[test]
    fn stats_mixed_signs() {
        let s = diag(&[-2.0, 3.0], &[1.0, 0.0]).stats();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.u_sq, 13.5);
        assert_eq!(s.a_plus, 3.0);
        assert_eq!(s.a_minus, 2.0);
    }

    #[test]
    fn stats_zero_form() {
        let s = diag(&[0.0, 0.0], &[0.0, 0.0]).stats();
        assert_eq!(s, FormStats { mean: 0.0, u_sq: 0.0, a_plus: 0.0, a_minus: 0.0 });
        assert!(s.is_degenerate());
    }

    #[test]
    fn diagonal_form_validation() {
        assert!(DiagonalForm::new(vec![], vec![]).is_err());
        assert!(DiagonalForm::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(DiagonalForm::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn upper_chi_square_five() {
        let t = upper_threshold(&chi5(), 1.0).unwrap();
        let expected = 7.0 + 2.0 * 5f64.sqrt();
        assert!((t.threshold - expected).abs() < 1e-14);
        assert!((t.threshold - 11.4721).abs() < 1e-4);
        assert_eq!(t.prob_bound, (-1f64).exp());
        assert_eq!(t.direction, Direction::Upper);
    }

    #[test]
    fn upper_pure_linear() {
        let s = diag(&[0.0], &[1.0]).stats();
        let t = upper_threshold(&s, 2.0).unwrap();
        assert!((t.threshold - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lower_chi_square_five() {
        let t = lower_threshold(&chi5(), 1.0).unwrap();
        assert!((t.threshold - (5.0 - 2.0 * 5f64.sqrt())).abs() < 1e-14);
        assert!((t.threshold - 0.5279).abs() < 1e-4);
    }

    #[test]
    fn lower_matches_negated_upper() {
        let f = diag(&[0.3, -1.7, 2.2], &[0.1, -0.4, 1.5]);
        for x in [0.1, 1.0, 7.5] {
            let lo = lower_threshold(&f.stats(), x).unwrap();
            let up = upper_threshold(&f.negated().stats(), x).unwrap();
            assert_eq!(lo.threshold, -up.threshold);
        }
    }

    #[test]
    fn degenerate_thresholds_collapse() {
        let s = diag(&[0.0], &[0.0]).stats();
        assert_eq!(lower_threshold(&s, 3.0).unwrap().threshold, 0.0);
        assert_eq!(upper_threshold(&s, 3.0).unwrap().threshold, 0.0);
    }

    #[test]
    fn threshold_rejects_bad_x() {
        for x in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(upper_threshold(&chi5(), x), Err(Error::Validation(_))));
            assert!(matches!(lower_threshold(&chi5(), x), Err(Error::Validation(_))));
        }
    }

    #[test]
    fn huge_exponent_underflows() {
        let t = upper_threshold(&chi5(), 800.0).unwrap();
        assert_eq!(t.prob_bound, 0.0);
        assert!(t.threshold.is_finite());
    }

    #[test]
    fn tail_exponent_quadratic() {
        let s = FormStats { mean: 0.0, u_sq: 1.0, a_plus: 1.0, a_minus: 0.0 };
        let t = tail_exponent(&s, 4.0, Direction::Upper).unwrap();
        assert!((t.x - 1.0).abs() < 1e-15);
        assert!((t.prob_bound - (-1f64).exp()).abs() < 1e-16);
        assert_eq!(t.threshold, 4.0);
    }

    #[test]
    fn tail_exponent_sub_gaussian_branch() {
        let s = FormStats { mean: 2.0, u_sq: 1.0, a_plus: 0.0, a_minus: 0.0 };
        let t = tail_exponent(&s, 2.0, Direction::Upper).unwrap();
        assert!((t.x - 1.0).abs() < 1e-15);
        let lo = tail_exponent(&s, 2.0, Direction::Lower).unwrap();
        assert_eq!(lo.threshold, 0.0);
    }

    #[test]
    fn tail_exponent_pure_linear_tail() {
        // u = 0 is unreachable from a real form when a ≠ 0, but the formula
        // is still well defined: 2a⁺x = d.
        let s = FormStats { mean: 0.0, u_sq: 0.0, a_plus: 1.5, a_minus: 0.0 };
        let t = tail_exponent(&s, 6.0, Direction::Upper).unwrap();
        assert!((t.x - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tail_exponent_errors() {
        assert!(matches!(
            tail_exponent(&chi5(), 0.0, Direction::Upper),
            Err(Error::Validation(_))
        ));
        let zero = FormStats { mean: 0.0, u_sq: 0.0, a_plus: 0.0, a_minus: 0.0 };
        assert!(matches!(
            tail_exponent(&zero, 1.0, Direction::Lower),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(envelope_threshold(1.0, 0.0, 4.0).unwrap(), 4.0);
        assert_eq!(envelope_threshold(0.0, 1.0, 3.0).unwrap(), 3.0);
        let via_envelope = envelope_threshold(5f64.sqrt(), 2.0, 1.0).unwrap();
        let via_bound = upper_threshold(&chi5(), 1.0).unwrap().threshold - 5.0;
        assert!((via_envelope - via_bound).abs() < 1e-14);
        assert!(envelope_threshold(0.0, 0.0, 1.0).is_err());
        assert!(envelope_threshold(-1.0, 0.0, 1.0).is_err());
        assert!(envelope_threshold(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn union_single_form_matches_plain() {
        let u = union_threshold(&[chi5()], 1.3, Direction::Upper).unwrap();
        assert_eq!(u[0], upper_threshold(&chi5(), 1.3).unwrap());
    }

    #[test]
    fn union_inflates_by_log_count() {
        let u = union_threshold(&[chi5(); 3], 1.0, Direction::Lower).unwrap();
        assert_eq!(u.len(), 3);
        for b in u {
            assert!((b.x - (1.0 + 3f64.ln())).abs() < 1e-15);
            assert_eq!(b.direction, Direction::Lower);
        }
        assert!(union_threshold(&[], 1.0, Direction::Upper).is_err());
    }

    #[test]
    fn direction_parse() {
        assert_eq!("upper".parse::<Direction>().unwrap(), Direction::Upper);
        assert_eq!("lower".parse::<Direction>().unwrap(), Direction::Lower);
        assert!("both".parse::<Direction>().is_err());
    }
}
