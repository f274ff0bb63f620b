use cyclic_core::coefficients::{CoefficientSequence, PhaseRule};
use cyclic_core::cyclicity::{build_k, criterion_value, refined_bound, RemarkRange};
use cyclic_core::gram::{build_gram, rho2_via_gram, rho2_via_gram_determinant};
use cyclic_core::nodal::NodalContext;
use cyclic_core::precision::{BigReal, PrecisionConfig};
use cyclic_core::spectrum::{Spectrum, Window};
use proptest::prelude::*;

fn rel_gap(a: &BigReal, b: &BigReal) -> f64 {
    let d = BigReal::with_val(a.prec(), a - b).abs().to_f64();
    d / a.to_f64().abs().max(1e-6)
}

fn spectrum_from(gaps: &[f64]) -> Spectrum {
    let mut x = -gaps.iter().take(gaps.len() / 2).sum::<f64>();
    let mut values = vec![x];
    for g in gaps {
        x += g;
        values.push(x);
    }
    Spectrum::table(values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn three_routes_agree(
        ratio in 0.2f64..0.8,
        seed in any::<u64>(),
        n in 1usize..=3,
        gaps in prop::collection::vec(0.3f64..1.7, 40),
        table in any::<bool>(),
    ) {
        let cfg = PrecisionConfig::default();
        let spectrum = if table { spectrum_from(&gaps) } else { Spectrum::integer_line() };
        let coeffs = CoefficientSequence::geometric(1.0, ratio, PhaseRule::Seeded(seed));
        let ctx = NodalContext::new(&spectrum, Window::new(n), &cfg).unwrap();
        let kmat = build_k(&ctx, &coeffs, &cfg).unwrap();
        let gs = build_gram(&spectrum, &coeffs, n, &cfg).unwrap();
        for k in 1 - n as i64..n as i64 {
            let rep = criterion_value(&kmat, k, &cfg).unwrap();
            let solve = rho2_via_gram(&gs, k, &cfg).unwrap().rho2;
            let det = rho2_via_gram_determinant(&gs, k, &cfg).unwrap();
            prop_assert!(rel_gap(&rep.rho2, &solve) < 1e-20);
            prop_assert!(rel_gap(&solve, &det) < 1e-20);

            prop_assert!(rep.rho2 <= rep.bound_refined.clone() + 1e-15);
            prop_assert!(rep.bound_refined <= rep.bound_t2.clone() + 1e-15);
            let literal = refined_bound(&kmat, k, RemarkRange::Literal).unwrap();
            prop_assert!(literal.value <= rep.bound_t2.clone() + 1e-15);
        }
    }

    /// Rotating every coefficient by the same phase leaves all distances
    /// alone.
    #[test]
    fn global_phase_is_invisible(ratio in 0.2f64..0.8, theta in 0.0f64..6.28, n in 1usize..=3) {
        let cfg = PrecisionConfig::default();
        let line = Spectrum::integer_line();
        let plain = CoefficientSequence::geometric(1.0, ratio, PhaseRule::Zero);
        let rotated = CoefficientSequence::geometric(1.0, ratio, PhaseRule::Constant(theta));
        let a = build_gram(&line, &plain, n, &cfg).unwrap();
        let b = build_gram(&line, &rotated, n, &cfg).unwrap();
        for k in 1 - n as i64..n as i64 {
            let ra = rho2_via_gram(&a, k, &cfg).unwrap().rho2;
            let rb = rho2_via_gram(&b, k, &cfg).unwrap().rho2;
            prop_assert!(rel_gap(&ra, &rb) < 1e-25);
        }
    }
}

#[test]
fn distance_shrinks_as_the_window_grows() {
    let cfg = PrecisionConfig::default();
    let coeffs = CoefficientSequence::geometric(1.0, 0.5, PhaseRule::Seeded(1));
    let line = Spectrum::integer_line();
    let mut last = cfg.real(1);
    for n in 1..=6 {
        let ctx = NodalContext::new(&line, Window::new(n), &cfg).unwrap();
        let kmat = build_k(&ctx, &coeffs, &cfg).unwrap();
        let rho2 = criterion_value(&kmat, 0, &cfg).unwrap().rho2;
        assert!(rho2 <= last, "n = {n}");
        last = rho2;
    }
}
