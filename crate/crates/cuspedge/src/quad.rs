//! Exact monomial integrals and Gauss-Legendre quadrature.
//!
//! All element integrals in this crate reduce to weighted moments
//! `∫ ρ^p dρ` of piecewise-linear hat functions. Closed forms exist for
//! every real exponent (with a logarithm at `p = -1`), so quadrature is
//! only needed for non-monomial integrands such as spline cutoffs.

/// `∫_a^b ρ^p dρ` for `0 <= a < b`. Returns `None` when the integral
/// diverges (`a == 0` and `p <= -1`).
pub fn monomial_integral(p: f64, a: f64, b: f64) -> Option<f64> {
    debug_assert!(a >= 0.0 && b > a);
    let q = p + 1.0;
    if a == 0.0 {
        if q <= 0.0 {
            return None;
        }
        return Some(b.powf(q) / q);
    }
    if q.abs() < 1e-12 {
        Some((b / a).ln())
    } else {
        Some((b.powf(q) - a.powf(q)) / q)
    }
}

/// Entry `(i, j)` of the 2x2 hat-product matrix `∫_a^b ρ^w φ_i φ_j dρ`
/// on the cell `[a, b]`, with `φ_0 = (b-ρ)/h`, `φ_1 = (ρ-a)/h`.
pub fn hat_mass_entry(w: f64, a: f64, b: f64, i: usize, j: usize) -> Option<f64> {
    let h = b - a;
    let h2 = h * h;
    // Polynomial coefficients of φ_i φ_j in ρ: c0 + c1 ρ + c2 ρ².
    let (c0, c1, c2) = match (i, j) {
        (0, 0) => (b * b, -2.0 * b, 1.0),
        (1, 1) => (a * a, -2.0 * a, 1.0),
        (0, 1) | (1, 0) => (-a * b, a + b, -1.0),
        _ => unreachable!("hat index out of range"),
    };
    let mut acc = 0.0;
    for (offset, c) in [(0.0, c0), (1.0, c1), (2.0, c2)] {
        if c == 0.0 {
            continue;
        }
        acc += c * monomial_integral(w + offset, a, b)?;
    }
    Some(acc / h2)
}

/// Full 2x2 hat-product matrix `∫ ρ^w φ_i φ_j dρ` on `[a, b]`.
pub fn hat_mass(w: f64, a: f64, b: f64) -> Option<[[f64; 2]; 2]> {
    let aa = hat_mass_entry(w, a, b, 0, 0)?;
    let ab = hat_mass_entry(w, a, b, 0, 1)?;
    let bb = hat_mass_entry(w, a, b, 1, 1)?;
    Some([[aa, ab], [ab, bb]])
}

/// 2x2 hat-gradient matrix `∫ ρ^w φ_i' φ_j' dρ` on `[a, b]`.
pub fn hat_stiff(w: f64, a: f64, b: f64) -> Option<[[f64; 2]; 2]> {
    let h = b - a;
    let base = monomial_integral(w, a, b)? / (h * h);
    Some([[base, -base], [-base, base]])
}

/// 8-point Gauss-Legendre nodes on (-1, 1).
const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// `∫_a^b f(ρ) dρ` by 8-point Gauss-Legendre on the single cell `[a, b]`.
pub fn gauss8<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn monomial_basic() {
        assert_relative_eq!(monomial_integral(3.0, 0.0, 1.0).unwrap(), 0.25);
        assert_relative_eq!(
            monomial_integral(-1.0, 0.5, 1.0).unwrap(),
            2.0f64.ln(),
            max_relative = 1e-14
        );
        assert!(monomial_integral(-1.0, 0.0, 1.0).is_none());
        assert!(monomial_integral(-3.0, 0.0, 1.0).is_none());
    }

    #[test]
    fn hat_mass_flat_weight_is_standard() {
        // α=0 on [0,1]: classic [[1/3,1/6],[1/6,1/3]].
        let m = hat_mass(0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(m[0][0], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(m[0][1], 1.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(m[1][1], 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn hat_mass_weighted_first_cell() {
        // ∫₀^h ρ³ (ρ/h)² dρ = h⁴/6.
        let h = 0.37;
        let bb = hat_mass_entry(3.0, 0.0, h, 1, 1).unwrap();
        assert_relative_eq!(bb, h.powi(4) / 6.0, max_relative = 1e-13);
    }

    #[test]
    fn divergent_first_cell_entry() {
        // ∫₀^h ρ^{-3} (ρ/h)² dρ diverges: exponent −1.
        assert!(hat_mass_entry(-3.0, 0.0, 0.1, 1, 1).is_none());
    }

    #[test]
    fn gauss8_matches_monomials() {
        for p in [0.0, 1.0, 3.0, 7.0] {
            let exact = monomial_integral(p, 0.25, 0.9).unwrap();
            let num = gauss8(0.25, 0.9, |r| r.powf(p));
            assert_relative_eq!(num, exact, max_relative = 1e-13);
        }
        // Non-polynomial weight: 8 points are accurate but not exact.
        let exact = monomial_integral(-0.5, 0.25, 0.9).unwrap();
        let num = gauss8(0.25, 0.9, |r| r.powf(-0.5));
        assert_relative_eq!(num, exact, max_relative = 1e-8);
    }
}
