mod common;

use common::{random_diag, random_matrix_form, rng};
use proptest::prelude::*;
use quadform::bounds::{
    form_stats, lower_threshold, matrix_form_stats, tail_exponent, threshold, union_threshold, upper_threshold,
};
use quadform::oracle::{empirical_tail, joint_exceedance, sample};
use quadform::{DiagonalForm, Direction};

fn diag_strategy() -> impl Strategy<Value = DiagonalForm> {
    (1usize..=10).prop_flat_map(|p| {
        (
            prop::collection::vec(-4.0f64..4.0, p),
            prop::collection::vec(-4.0f64..4.0, p),
        )
            .prop_map(|(a, b)| DiagonalForm::new(a, b).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn thresholds_are_monotone_in_x(form in diag_strategy(), x in 1e-3f64..50.0, dx in 1e-3f64..5.0) {
        let s = form_stats(&form);
        let u0 = upper_threshold(&s, x).unwrap().threshold;
        let u1 = upper_threshold(&s, x + dx).unwrap().threshold;
        let l0 = lower_threshold(&s, x).unwrap().threshold;
        let l1 = lower_threshold(&s, x + dx).unwrap().threshold;
        prop_assert!(u1 >= u0);
        prop_assert!(l1 <= l0);
        prop_assert!(l0 <= s.mean && s.mean <= u0);
    }

    #[test]
    fn lower_tail_is_negated_upper_tail(form in diag_strategy(), x in 1e-3f64..50.0) {
        let s = form_stats(&form);
        let neg = form_stats(&form.negated());
        let lower = lower_threshold(&s, x).unwrap().threshold;
        let upper_neg = upper_threshold(&neg, x).unwrap().threshold;
        prop_assert!((lower + upper_neg).abs() <= 1e-12 * (1.0 + lower.abs()));
    }

    #[test]
    fn inversion_round_trips(form in diag_strategy(), log_x in -3.0f64..3.0) {
        let s = form_stats(&form);
        prop_assume!(!s.is_degenerate());
        let x = 10f64.powf(log_x);
        for dir in [Direction::Upper, Direction::Lower] {
            let t = threshold(&s, x, dir).unwrap().threshold;
            let back = tail_exponent(&s, (t - s.mean).abs(), dir).unwrap();
            prop_assert!((back.x - x).abs() <= 1e-9 * x, "{dir}: {} vs {x}", back.x);
        }
    }

    #[test]
    fn union_thresholds_dominate_single_ones(form in diag_strategy(), x in 0.1f64..10.0, m in 1usize..20) {
        let s = form_stats(&form);
        let stats = vec![s; m];
        let u = union_threshold(&stats, x, Direction::Upper).unwrap();
        let single = upper_threshold(&s, x).unwrap().threshold;
        for b in &u {
            prop_assert!(b.threshold >= single - 1e-12 * (1.0 + single.abs()));
            prop_assert!((b.prob_bound * m as f64 - (-x).exp()).abs() <= 1e-12);
        }
    }
}

#[test]
fn matrix_statistics_match_the_reduction() {
    let mut r = rng(3);
    for p in 1..=15 {
        let form = random_matrix_form(&mut r, p, 3.0);
        let direct = matrix_form_stats(&form).unwrap();
        let via = form_stats(&quadform::spectral::reduce(&form).unwrap().diagonal_form());
        for (g, w) in [
            (direct.mean, via.mean),
            (direct.u_sq, via.u_sq),
            (direct.a_plus, via.a_plus),
            (direct.a_minus, via.a_minus),
        ] {
            assert!((g - w).abs() <= 1e-10 * (1.0 + w.abs()), "p = {p}: {g} vs {w}");
        }
    }
}

#[test]
fn bound_holds_for_random_form_in_ten_dimensions() {
    let mut r = rng(10);
    let form = random_diag(&mut r, 10, 2.0);
    let s = form_stats(&form);
    let samples = sample(&form, 1_000_000, 77).unwrap();
    for dir in [Direction::Upper, Direction::Lower] {
        let b = threshold(&s, 3.0, dir).unwrap();
        let est = empirical_tail(&samples, b.threshold, dir).unwrap();
        assert!(est.ci_low <= b.prob_bound, "{dir}: {est:?}");
    }
}

#[test]
fn union_bound_controls_joint_exceedance() {
    let mut r = rng(11);
    let forms: Vec<_> = (0..5).map(|_| random_diag(&mut r, 6, 2.0)).collect();
    let stats: Vec<_> = forms.iter().map(form_stats).collect();
    for x in [1.0, 2.0] {
        let t: Vec<f64> = union_threshold(&stats, x, Direction::Upper)
            .unwrap()
            .iter()
            .map(|b| b.threshold)
            .collect();
        let est = joint_exceedance(&forms, &t, Direction::Upper, 200_000, 4).unwrap();
        assert!(est.ci_low <= (-x).exp(), "x = {x}: {est:?}");
    }
}
