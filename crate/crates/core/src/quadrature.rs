//! Fixed quadrature rules on triangles and tetrahedra.

/// Symmetric 6-point rule on the triangle, exact for polynomials of degree 4.
/// Points are barycentric; weights sum to one (multiply by the triangle area).
pub const TRIANGLE_DEG4: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.108_103_018_168_070;
    const B1: f64 = 0.445_948_490_915_965;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.816_847_572_980_459;
    const B2: f64 = 0.091_576_213_509_771;
    const W2: f64 = 0.109_951_743_655_322;
    [
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// 4-point rule on the tetrahedron, exact for polynomials of degree 2.
/// Points are barycentric; weights sum to one (multiply by the volume).
pub const TET_DEG2: [([f64; 4], f64); 4] = {
    const A: f64 = 0.585_410_196_624_968_5;
    const B: f64 = 0.138_196_601_125_010_5;
    [
        ([A, B, B, B], 0.25),
        ([B, A, B, B], 0.25),
        ([B, B, A, B], 0.25),
        ([B, B, B, A], 0.25),
    ]
};

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// ∫ over the unit reference simplex of ∏ λ_i^{a_i}, normalised by the simplex measure.
    fn simplex_moment(exps: &[u32]) -> f64 {
        let d = exps.len() as u32 - 1;
        let num: f64 = exps.iter().map(|&a| factorial(a)).product();
        num * factorial(d) / factorial(exps.iter().sum::<u32>() + d)
    }

    #[test]
    fn triangle_rule_is_degree_four() {
        assert!((TRIANGLE_DEG4.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-14);
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                for c in 0..=(4 - a - b) {
                    let q: f64 = TRIANGLE_DEG4
                        .iter()
                        .map(|(l, w)| {
                            w * l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32)
                        })
                        .sum();
                    assert!(
                        (q - simplex_moment(&[a, b, c])).abs() < 1e-13,
                        "{a} {b} {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn tet_rule_is_degree_two() {
        for e in 0..4 {
            for f in e..4 {
                let mut exps = [0u32; 4];
                exps[e] += 1;
                exps[f] += 1;
                let q: f64 = TET_DEG2.iter().map(|(l, w)| w * l[e] * l[f]).sum();
                assert!((q - simplex_moment(&exps)).abs() < 1e-14);
            }
        }
        assert!(TET_DEG2.iter().all(|p| p.1 > 0.0));
    }
}
