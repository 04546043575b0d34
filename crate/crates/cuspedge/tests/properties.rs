//! Randomized invariant checks for the closed-form layers.

use proptest::prelude::*;

use cuspedge::hardy::theoretical_constant;
use cuspedge::model::CrossSection;
use cuspedge::quad::monomial_integral;
use cuspedge::saclass::{classify, indicial_exponents, Verdict};
use cuspedge::spectrum::cross_section_eigs;
use cuspedge::weyl::{block_lattice_count, per_coordinate_bounds};

proptest! {
    /// The Hardy constant depends on (α, β) only through 2β + α.
    #[test]
    fn hardy_constant_shift_invariant(
        alpha in 0.0..6.0f64,
        beta in 0.0..3.0f64,
        t in -0.4f64..2.0,
    ) {
        prop_assume!(2.0 * beta + alpha > 1.05);
        let a = theoretical_constant(alpha, beta).unwrap();
        let b = theoretical_constant(alpha + 2.0 * t, beta - t).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    /// Weighted monomial integrals are additive over adjacent intervals.
    #[test]
    fn monomial_integral_additive(
        p in -2.5..4.0f64,
        a in 0.01..1.0f64,
        m in 0.1..1.0f64,
        b in 0.1..1.0f64,
    ) {
        let (mid, hi) = (a + m, a + m + b);
        let whole = monomial_integral(p, a, hi).unwrap();
        let split = monomial_integral(p, a, mid).unwrap()
            + monomial_integral(p, mid, hi).unwrap();
        prop_assert!((whole - split).abs() <= 1e-10 * whole.abs().max(1.0));
    }

    /// Block lattice counts are monotone in λ and within the
    /// per-coordinate product.
    #[test]
    fn lattice_count_monotone_and_bounded(
        mu in 0u32..4,
        k in 1u32..4,
        lambda in 0.5..120.0f64,
    ) {
        let kf = k as f64;
        let lo = block_lattice_count(&[mu], &[kf], 0, lambda);
        let hi = block_lattice_count(&[mu], &[kf], 0, lambda * 1.5);
        prop_assert!(lo <= hi);
        let (radial, angular, _) = per_coordinate_bounds(mu, kf, lambda);
        prop_assert!(lo <= radial * angular);
    }

    /// Cross-section eigenvalue lists are ascending, start at 0, and grow
    /// with the cutoff.
    #[test]
    fn cross_section_lists_ascend(l1 in 0.5..3.0f64, lambda in 1.0..200.0f64) {
        let cs = CrossSection::FlatTorus { lengths: vec![l1] };
        let eigs = cross_section_eigs(&cs, lambda);
        prop_assert_eq!(eigs[0], 0.0);
        prop_assert!(eigs.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(eigs.iter().all(|&e| e <= lambda));
        let more = cross_section_eigs(&cs, lambda * 2.0);
        prop_assert!(more.len() >= eigs.len());
    }

    /// Verdict, indicial exponents, and square-integrability flags are
    /// mutually consistent for any weight exponent.
    #[test]
    fn classification_consistency(alpha in 0.0..8.0f64) {
        let r = classify(alpha);
        let ([s1, s2], flags) = indicial_exponents(alpha);
        prop_assert!((s1 + s2 - (1.0 - alpha)).abs() < 1e-12);
        prop_assert_eq!(
            r.verdict == Verdict::LimitCircle,
            flags[0] && flags[1]
        );
        prop_assert_eq!(r.verdict == Verdict::LimitPoint, r.c_eff >= 0.75);
    }
}
