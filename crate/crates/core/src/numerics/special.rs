//! Special functions: log-gamma, Hermite and Gegenbauer polynomials, and the
//! modified Bessel function of the second kind.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ζ(k) - 1` for `k = 2..=40`.
const ZETA_MINUS_ONE: [f64; 39] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    9.945_751_278_180_853e-4,
    4.941_886_041_194_646e-4,
    2.460_865_533_080_483e-4,
    1.227_133_475_784_891e-4,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_762e-6,
    3.817_293_264_999_840e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_961e-7,
    4.769_329_867_878_065e-7,
    2.384_505_027_277_330e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_429e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
    2.328_311_833_676_505e-10,
    1.164_155_017_270_052e-10,
    5.820_772_087_902_701e-11,
    2.910_385_044_497_100e-11,
    1.455_192_189_104_198e-11,
    7.275_959_835_057_481e-12,
    3.637_979_547_378_651e-12,
    1.818_989_650_307_066e-12,
    9.094_947_840_263_889e-13,
];

/// Stirling series coefficients `B_{2j} / (2j (2j-1))`.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Natural log of the gamma function for `x > 0`.
///
/// Arguments near the zeros at 1 and 2 go through the Taylor series of
/// `ln Γ(2 + z)`, which keeps the result accurate in the relative sense there.
/// Large arguments use the Stirling series; everything in between is shifted
/// into one of those two regimes.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_positive(x))
}

fn log_gamma_positive(x: f64) -> f64 {
    if x < 1.5 {
        // ln Γ(x) = ln Γ(x + 1) - ln x
        if x >= 0.5 {
            return ln_gamma_two_plus(x - 1.0) - (x - 1.0).ln_1p();
        }
        return log_gamma_positive(x + 1.0) - x.ln();
    }
    if x < 2.5 {
        return ln_gamma_two_plus(x - 2.0);
    }
    if x < 10.0 {
        let mut y = x;
        let mut log_product = 0.0;
        while y >= 2.5 {
            y -= 1.0;
            log_product += y.ln();
        }
        return ln_gamma_two_plus(y - 2.0) + log_product;
    }
    stirling(x)
}

/// `ln Γ(2 + z)` for `|z| <= 0.5`.
fn ln_gamma_two_plus(z: f64) -> f64 {
    let mut power = -z;
    let mut acc = (1.0 - EULER_GAMMA) * z;
    for (i, zeta) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        power *= -z;
        let term = zeta * power / k;
        acc += term;
        if term.abs() < 1e-18 * acc.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    acc
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv_sq = inv * inv;
    let mut correction = 0.0;
    let mut power = inv;
    for c in STIRLING {
        correction += c * power;
        power *= inv_sq;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + correction
}

/// `ln n!` for non-negative integers.
pub fn log_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        log_gamma_positive(n as f64 + 1.0)
    }
}

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recursion.
pub fn hermite_h(n: usize, x: f64) -> Result<f64> {
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    if cur.is_finite() {
        Ok(cur)
    } else {
        Err(Error::Overflow(format!("H_{n}({x}) exceeds double precision")))
    }
}

/// Gegenbauer polynomial `C_n^λ(t)` for `λ > 0`, `|t| <= 1`.
pub fn gegenbauer_c(n: usize, lambda: f64, t: f64) -> Result<f64> {
    gegenbauer_all(n, lambda, t).map(|values| values[n])
}

/// All `C_k^λ(t)` for `k = 0..=n_max`.
pub fn gegenbauer_all(n_max: usize, lambda: f64, t: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("Gegenbauer parameter must be positive, got {lambda}")));
    }
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(format!("Gegenbauer argument must lie in [-1, 1], got {t}")));
    }
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(1.0);
    if n_max >= 1 {
        values.push(2.0 * lambda * t);
    }
    for k in 2..=n_max {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda - 1.0) * t * values[k - 1] - (kf + 2.0 * lambda - 2.0) * values[k - 2]) / kf;
        values.push(next);
    }
    Ok(values)
}

/// Modified Bessel function of the second kind `K_ν(z)`.
///
/// Negative orders are folded onto `|ν|` (`K_{-ν} = K_ν`).
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, z)? * (-z).exp())
}

/// Exponentially scaled `e^z K_ν(z)`.
///
/// Evaluates `∫₀^∞ exp(-z (cosh t - 1)) cosh(νt) dt`. The integrand is even
/// and analytic in `t`, so the trapezoid rule converges geometrically; the
/// step is halved until successive estimates agree to near machine precision.
pub fn bessel_k_scaled(nu: f64, z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Domain(format!("bessel_k requires z > 0, got {z}")));
    }
    if !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_k order must be finite, got {nu}")));
    }
    let nu = nu.abs();
    let log_integrand = |t: f64| -> f64 { -z * (t.cosh() - 1.0) + ln_cosh(nu * t) };

    let t_peak = bessel_peak(nu, z);
    let g_peak = log_integrand(t_peak);

    // Integrand below e^-45 of its peak is dropped.
    let mut t_end = t_peak.max(1.0);
    while log_integrand(t_end) - g_peak > -45.0 {
        t_end = t_end * 1.25 + 0.5;
    }

    let f = |t: f64| (log_integrand(t) - g_peak).exp();
    let mut panels = 64usize;
    let mut step = t_end / panels as f64;
    let mut sum = 0.5 * (f(0.0) + f(t_end)) + (1..panels).map(|i| f(i as f64 * step)).sum::<f64>();
    let mut estimate = sum * step;
    for _ in 0..10 {
        let odd: f64 = (0..panels).map(|i| f((2 * i + 1) as f64 * 0.5 * step)).sum();
        sum += odd;
        panels *= 2;
        step *= 0.5;
        let refined = sum * step;
        let converged = (refined - estimate).abs() <= 1e-14 * refined.abs();
        estimate = refined;
        if converged {
            break;
        }
    }
    let scaled = estimate * g_peak.exp();
    if scaled.is_finite() {
        Ok(scaled)
    } else {
        Err(Error::Overflow(format!("K_{nu}({z}) exceeds double precision")))
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Location of the maximum of `-z (cosh t - 1) + ln cosh(νt)` on `t >= 0`.
fn bessel_peak(nu: f64, z: f64) -> f64 {
    // slope(t) = -z sinh t + ν tanh(νt); positive just right of 0 iff ν² > z.
    if nu * nu <= z {
        return 0.0;
    }
    let slope = |t: f64| -z * t.sinh() + nu * (nu * t).tanh();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while slope(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Closed form `K_{1/2}(z) = sqrt(π / 2z) e^{-z}`.
pub fn k_half(z: f64) -> f64 {
    (PI / (2.0 * z)).sqrt() * (-z).exp()
}
