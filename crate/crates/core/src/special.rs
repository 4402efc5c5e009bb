//! Bessel functions of order one and normalized Hermite functions.

/// `J_1(x)`: ascending series for `|x| < 8`, Miller's backward recurrence
/// normalized by `J_0 + 2 sum J_{2k} = 1` beyond.
pub fn bessel_j1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x < 8.0 {
        j1_series(x)
    } else {
        miller(x).1
    }
}

/// `J_0(x)`, evaluated like [`bessel_j1`].
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 8.0 {
        let q = -0.25 * x * x;
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..200 {
            term *= q / (k * k) as f64;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        miller(x).0
    }
}

fn j1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let (mut term, mut sum) = (half, half);
    for k in 1..200 {
        term *= q / (k * (k + 1)) as f64;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `(J_0(x), J_1(x))` for `x >= 8` by backward recurrence.
fn miller(x: f64) -> (f64, f64) {
    let start = 2 * ((x + 20.0 + (160.0 * x).sqrt()) as usize / 2);
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let (mut j0, mut j1) = (0.0, 0.0);
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
        // j now holds J_{k-1}
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if k - 1 == 1 {
            j1 = j;
        }
        if k - 1 == 0 {
            j0 = j;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

/// `I_1(x)` by its ascending series (all terms positive).
pub fn bessel_i1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_i1(-x);
    }
    let half = 0.5 * x;
    let q = half * half;
    let (mut term, mut sum) = (half, half);
    for k in 1..2000 {
        term *= q / (k * (k + 1)) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

const PI_QUARTER_INV: f64 = 0.751_125_544_464_942_5;

/// Threshold at which the recurrence mantissa is rescaled.
const RESCALE: f64 = 1e150;

/// `phi_0(y) .. phi_{n_max}(y)`, normalized Hermite functions
/// `(2^n n! sqrt(pi))^{-1/2} e^{-y^2/2} H_n(y)`.
///
/// The Gaussian factor is carried as a separate exponent so that large
/// `|y|` and `n` neither underflow nor overflow mid-recurrence.
pub fn hermite_functions(n_max: usize, y: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * y * y;
    let mut prev = 0.0;
    let mut cur = PI_QUARTER_INV;
    out.push(cur * log_scale.exp());
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * y * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}

pub fn hermite_function(n: usize, y: f64) -> f64 {
    hermite_functions(n, y)[n]
}

/// `(phi_n(y), phi_{n-1}(y))` without materializing the lower orders; the
/// ratio is exact even when both values underflow after rescaling.
pub(crate) fn hermite_pair_scaled(n: usize, y: f64) -> (f64, f64, f64) {
    let mut log_scale = -0.5 * y * y;
    let mut prev = 0.0;
    let mut cur = PI_QUARTER_INV;
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * y * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    (cur, prev, log_scale)
}

/// `d phi_n / dy = sqrt(2n) phi_{n-1} - y phi_n`.
pub fn hermite_derivative(n: usize, y: f64) -> f64 {
    let phi = hermite_functions(n, y);
    let lower = if n > 0 { (2.0 * n as f64).sqrt() * phi[n - 1] } else { 0.0 };
    lower - y * phi[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from 40-digit arbitrary-precision evaluation.
    const J1_REF: [(f64, f64); 14] = [
        (1e-6, 4.999999999999375e-7),
        (0.001, 0.000_499_999_937_500_002_6),
        (0.1, 0.049_937_526_036_241_997),
        (0.5, 0.242_268_457_674_873_89),
        (1.0, 0.440_050_585_744_933_52),
        (2.5, 0.497_094_102_464_274_04),
        (5.0, -0.327_579_137_591_465_22),
        (7.9, 0.219_179_399_921_751_14),
        (8.0, 0.234_636_346_853_914_62),
        (10.0, 0.043_472_746_168_861_437),
        (15.5, 0.167_213_180_351_747_14),
        (30.0, -0.118_751_062_616_622_94),
        (60.0, 0.046_598_383_758_166_318),
        (100.0, -0.077_145_352_014_112_158),
    ];

    const J0_REF: [(f64, f64); 4] = [
        (1.0, 0.765_197_686_557_966_55),
        (8.0, 0.171_650_807_137_553_91),
        (30.0, -0.086_367_983_581_040_211),
        (100.0, 0.019_985_850_304_223_122),
    ];

    const I1_REF: [(f64, f64); 10] = [
        (1e-6, 5.000000000000625e-7),
        (0.001, 0.000_500_000_062_500_002_6),
        (0.1, 0.050_062_526_047_092_692),
        (0.5, 0.257_894_305_390_896_32),
        (1.0, 0.565_159_103_992_485_03),
        (2.5, 2.516_716_245_288_698_4),
        (5.0, 24.335_642_142_450_527),
        (10.0, 2670.988_303_701_254_7),
        (30.0, 768_532_038_938.956_99),
        (60.0, 5.844_751_588_390_468_3e24),
    ];

    const PHI_REF: [(usize, f64, f64); 9] = [
        (0, 0.0, 0.751_125_544_464_942_48),
        (1, 0.5, 0.468_717_019_889_251_73),
        (5, 1.3, -0.399_391_462_813_750_73),
        (10, -2.2, 0.383_952_114_176_689_43),
        (40, 3.0, 0.057_369_581_235_740_706),
        (100, 5.5, 0.185_138_314_888_005_2),
        (500, 20.0, -0.158_732_098_732_007_96),
        (1000, 40.0, 0.172_250_520_732_792_27),
        (2000, 60.0, 0.079_728_242_238_348_043),
    ];

    #[test]
    fn j1_matches_reference() {
        for (x, r) in J1_REF {
            let v = bessel_j1(x);
            assert!((v - r).abs() < 1e-14 + 1e-13 * r.abs(), "J1({x}) = {v}, want {r}");
            assert_eq!(bessel_j1(-x), -v);
        }
    }

    #[test]
    fn j0_matches_reference() {
        for (x, r) in J0_REF {
            assert!((bessel_j0(x) - r).abs() < 1e-14, "J0({x})");
        }
    }

    #[test]
    fn i1_matches_reference() {
        for (x, r) in I1_REF {
            let v = bessel_i1(x);
            assert!((v - r).abs() <= 1e-13 * r.abs(), "I1({x}) = {v}, want {r}");
        }
    }

    #[test]
    fn hermite_matches_reference() {
        for (n, y, r) in PHI_REF {
            let v = hermite_function(n, y);
            assert!((v - r).abs() < 1e-12, "phi_{n}({y}) = {v}, want {r}");
        }
        assert_eq!(hermite_function(1, 0.0), 0.0);
    }

    #[test]
    fn hermite_parity_and_derivative() {
        for n in 0..12 {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((hermite_function(n, -0.8) - s * hermite_function(n, 0.8)).abs() < 1e-15);
            let h = 1e-5;
            let fd = (hermite_function(n, 0.8 + h) - hermite_function(n, 0.8 - h)) / (2.0 * h);
            assert!((fd - hermite_derivative(n, 0.8)).abs() < 1e-9);
        }
    }

    #[test]
    fn far_tail_underflows_to_zero() {
        assert_eq!(hermite_function(3, 60.0), 0.0);
        assert!(hermite_functions(10, 1e3).iter().all(|v| v.is_finite()));
    }
}
