//! Special functions behind the p-values and the clipped-normal oracle:
//! log-gamma, the regularized incomplete beta and gamma functions, and the
//! standard normal distribution.

use std::f64::consts::PI;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 200_000;

// Lanczos approximation, g = 7, n = 9
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// `ln Γ(a + b) − ln Γ(a)` without the cancellation the direct difference
/// suffers for large `a`.
fn ln_gamma_shift(a: f64, b: f64) -> f64 {
    if a < 20.0 {
        return ln_gamma(a + b) - ln_gamma(a);
    }
    // Stirling series, terms up to z^-7
    let tail = |z: f64| {
        let z2 = z * z;
        1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
            - 1.0 / (1680.0 * z * z2 * z2 * z2)
    };
    (a - 0.5) * (b / a).ln_1p() + b * (a + b).ln() - b + (tail(a + b) - tail(a))
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, large) = if a < b { (a, b) } else { (b, a) };
    ln_gamma(small) - ln_gamma_shift(large, small)
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` given `ln x` and `ln(1 − x)`,
/// which callers can often supply more accurately than `x` itself.
pub fn inc_beta_logs(a: f64, b: f64, x: f64, ln_x: f64, ln_1mx: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (a * ln_x + b * ln_1mx - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    inc_beta_logs(a, b, x, x.ln(), (-x).ln_1p())
}

/// Two-sided Student-t tail `P(|T| ≥ |t|)` for real-valued degrees of freedom.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let t2 = t * t;
    // x = df / (df + t²), 1 − x = t² / (df + t²)
    let x = df / (df + t2);
    let ln_x = -(t2 / df).ln_1p();
    let ln_1mx = (t2 / (df + t2)).ln();
    inc_beta_logs(df / 2.0, 0.5, x, ln_x, ln_1mx).clamp(0.0, 1.0)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Complementary error function.
pub fn erfc(z: f64) -> f64 {
    if z >= 0.0 {
        gamma_q(0.5, z * z)
    } else {
        1.0 + gamma_p(0.5, z * z)
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        // ln(9!) = ln(362880)
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_beta_large_argument_matches_direct() {
        for a in [20.0, 50.0, 123.5] {
            let direct = ln_gamma(a) + ln_gamma(0.5) - ln_gamma(a + 0.5);
            assert!((ln_beta(a, 0.5) - direct).abs() < 1e-12, "a = {a}");
        }
    }

    #[test]
    fn inc_beta_closed_forms() {
        // I_x(1, b) = 1 − (1 − x)^b ; I_x(a, 1) = x^a
        for &x in &[0.05, 0.3, 0.5, 0.77, 0.99] {
            assert!((inc_beta(1.0, 3.0, x) - (1.0 - (1.0 - x).powi(3))).abs() < 1e-14);
            assert!((inc_beta(2.5, 1.0, x) - x.powf(2.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn t_tail_closed_forms() {
        // df = 1: Cauchy, 1 − 2 atan(|t|)/π ; df = 2: 1 − |t|/sqrt(t² + 2)
        for &t in &[0.1, 1.0, 2.5, 10.0, 50.0] {
            let cauchy = 1.0 - 2.0 * f64::atan(t) / PI;
            assert!((t_two_sided(t, 1.0) - cauchy).abs() < 1e-13, "t = {t}");
            let two = 1.0 - t / (t * t + 2.0).sqrt();
            assert!((t_two_sided(t, 2.0) - two).abs() < 1e-13, "t = {t}");
        }
        assert_eq!(t_two_sided(0.0, 7.0), 1.0);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(2.0) - 0.977_249_868_051_820_8).abs() < 1e-14);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-15);
        assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-15);
    }
}
