//! Shared numerics: Gaussian tail probabilities, summary statistics,
//! Kolmogorov–Smirnov distance, and a Simpson integrator for oracle checks.

/// erfc via W. J. Cody's rational approximations (netlib CALERF), accurate to
/// roughly double precision on the whole real line. Three regimes: a rational
/// erf form for |x| ≤ 0.46875, a rational erfc·exp(−x²) form up to 4, and an
/// asymptotic form beyond.
pub fn erfc(x: f64) -> f64 {
    const A: [f64; 5] = [
        3.16112374387056560e0,
        1.13864154151050156e2,
        3.77485237685302021e2,
        3.20937758913846947e3,
        1.85777706184603153e-1,
    ];
    const B: [f64; 4] = [
        2.36012909523441209e1,
        2.44024637934444173e2,
        1.28261652607737228e3,
        2.84423683343917062e3,
    ];
    const C: [f64; 9] = [
        5.64188496988670089e-1,
        8.88314979438837594e0,
        6.61191906371416295e1,
        2.98635138197400131e2,
        8.81952221241769090e2,
        1.71204761263407058e3,
        2.05107837782607147e3,
        1.23033935479799725e3,
        2.15311535474403846e-8,
    ];
    const D: [f64; 8] = [
        1.57449261107098347e1,
        1.17693950891312499e2,
        5.37181101862009858e2,
        1.62138957456669019e3,
        3.29079923573345963e3,
        4.36261909014324716e3,
        3.43936767414372164e3,
        1.23033935480374942e3,
    ];
    const P: [f64; 6] = [
        3.05326634961232344e-1,
        3.60344899949804439e-1,
        1.25781726111229246e-1,
        1.60837851487422766e-2,
        6.58749161529837803e-4,
        1.63153871373020978e-2,
    ];
    const Q: [f64; 5] = [
        2.56852019228982242e0,
        1.87295284992346047e0,
        5.27905102951428412e-1,
        6.05183413124413191e-2,
        2.33520497626869185e-3,
    ];
    const SQRPI: f64 = 5.6418958354775628695e-1; // 1/sqrt(pi)
    const XBIG: f64 = 26.543;

    let y = x.abs();
    let result = if y <= 0.46875 {
        let ysq = if y > 1e-300 { y * y } else { 0.0 };
        let mut xnum = A[4] * ysq;
        let mut xden = ysq;
        for i in 0..3 {
            xnum = (xnum + A[i]) * ysq;
            xden = (xden + B[i]) * ysq;
        }
        return 1.0 - x * (xnum + A[3]) / (xden + B[3]);
    } else if y <= 4.0 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        let r = (xnum + C[7]) / (xden + D[7]);
        // Split exp(-y²) into exact-grid and remainder factors to avoid
        // cancellation in y² (Cody's AINT trick).
        let ysq = (y * 16.0).trunc() / 16.0;
        let del = (y - ysq) * (y + ysq);
        (-ysq * ysq).exp() * (-del).exp() * r
    } else if y < XBIG {
        let ysq = 1.0 / (y * y);
        let mut xnum = P[5] * ysq;
        let mut xden = ysq;
        for i in 0..4 {
            xnum = (xnum + P[i]) * ysq;
            xden = (xden + Q[i]) * ysq;
        }
        let mut r = ysq * (xnum + P[4]) / (xden + Q[4]);
        r = (SQRPI - r) / y;
        let ysq = (y * 16.0).trunc() / 16.0;
        let del = (y - ysq) * (y + ysq);
        (-ysq * ysq).exp() * (-del).exp() * r
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// Standard normal upper tail Q(z) = P(Z ≥ z) = erfc(z/√2)/2.
pub fn normal_q(z: f64) -> f64 {
    erfc(z / std::f64::consts::SQRT_2) / 2.0
}

/// Standard normal CDF Φ(z) = 1 − Q(z), computed from the tail that loses
/// less precision.
pub fn normal_cdf(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 - normal_q(z)
    } else {
        normal_q(-z)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic KS critical value at significance 0.01: c(0.01)/√n with
/// c(α) = √(−ln(α/2)/2).
pub fn ks_critical_001(n: usize) -> f64 {
    1.6276236307187293 / (n as f64).sqrt()
}

/// Composite Simpson's rule with `intervals` subdivisions (rounded up to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = if intervals % 2 == 0 { intervals } else { intervals + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference values computed with mpmath at 40 digits:
    /// Q(z) = erfc(z/√2)/2.
    const Q_REFERENCE: [(f64, f64); 22] = [
        (-8.0, 0.99999999999999938),
        (-6.5, 0.99999999995983999),
        (-5.0, 0.99999971334842812),
        (-4.0, 0.99996832875816688),
        (-3.0, 0.99865010196836991),
        (-2.0, 0.97724986805182079),
        (-1.0, 0.84134474606854295),
        (-0.5, 0.6914624612740131),
        (-0.1, 0.53982783727702898),
        (0.0, 0.5),
        (0.1, 0.46017216272297102),
        (0.5, 0.3085375387259869),
        (1.0, 0.15865525393145705),
        (1.5, 0.066807201268858066),
        (2.0, 0.022750131948179207),
        (2.5, 0.0062096653257761352),
        (3.0, 0.0013498980316300945),
        (4.0, 3.1671241833119921e-5),
        (5.0, 2.8665157187919391e-7),
        (6.0, 9.8658764503769814e-10),
        (7.0, 1.279812543885835e-12),
        (8.0, 6.2209605742717841e-16),
    ];

    #[test]
    fn q_matches_reference_to_1e12_relative() {
        for &(z, q) in &Q_REFERENCE {
            let got = normal_q(z);
            let rel = ((got - q) / q).abs();
            assert!(rel <= 1e-12, "Q({z}) = {got}, want {q}, rel err {rel:e}");
        }
    }

    #[test]
    fn q_symmetry_and_monotonicity() {
        let mut prev = f64::INFINITY;
        for i in -80..=80 {
            let z = i as f64 / 10.0;
            let q = normal_q(z);
            assert!((q + normal_q(-z) - 1.0).abs() < 1e-14, "symmetry at z={z}");
            assert!(q < prev, "monotone at z={z}");
            prev = q;
        }
    }

    #[test]
    fn q_matches_simpson_quadrature_within_1e8() {
        let phi = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for i in -6..=6 {
            let z = i as f64;
            let quad = simpson(phi, z, z + 14.0, 28_000);
            assert!(
                (normal_q(z) - quad).abs() < 1e-8,
                "z={z}: q={}, quad={quad}",
                normal_q(z)
            );
        }
    }

    #[test]
    fn erfc_basic_anchors() {
        assert_eq!(erfc(0.0), 1.0);
        assert!((erfc(1.0) - 0.15729920705028513).abs() < 1e-15);
        assert!((erfc(-1.0) - 1.8427007929497149).abs() < 1e-14);
    }

    #[test]
    fn mean_and_std() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        let expect = (5.0f64 / 3.0).sqrt();
        assert!((sample_std(&xs) - expect).abs() < 1e-15);
    }

    #[test]
    fn ks_statistic_uniform_exact() {
        // Empirical CDF of {0.5} vs U(0,1): sup gap is 0.5 on both sides.
        assert!((ks_statistic(&[0.5], |x| x) - 0.5).abs() < 1e-15);
        // Evenly spread samples have small distance.
        let samples: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!(ks_statistic(&samples, |x| x) <= 0.005 + 1e-12);
    }

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        // Simpson is exact for cubics.
        let got = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        assert!((got - 2.0).abs() < 1e-12);
    }
}
