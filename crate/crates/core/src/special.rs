//! Complex log-Gamma and the two closed-form trigonometric series used by
//! every correlator evaluation.
//!
//! `log_cosine_sum` and `arctan_sine_sum` return the Abel sums
//! `sum_{n>=1} p^n cos(n xi)/n` and `sum_{n>=1} p^n sin(n x)/n` for
//! `0 <= p <= 1`.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Complex argument / result type used throughout the crate.
pub type ComplexValue = Complex64;

/// Default distance (radians) from `2*pi*Z` below which the `p = 1`
/// cosine series is treated as divergent.
pub const DEFAULT_SINGULAR_EPS: f64 = 1e-9;

const POLE_TOL: f64 = 1e-12;

// Lanczos approximation, g = 607/128, 15 terms (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_091_82,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Principal branch of `ln Gamma(z)`: analytic off the negative real axis,
/// with `ln Gamma(z + 1) = ln z + ln Gamma(z)` holding exactly rather than
/// modulo `2*pi*i`. On the negative real axis the value is the limit from
/// above.
pub fn log_gamma_complex(z: ComplexValue) -> Result<ComplexValue> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(invalid("z", format!("non-finite argument {z}")));
    }
    if z.im.abs() < POLE_TOL && z.re < 0.5 && (z.re - z.re.round()).abs() < POLE_TOL && z.re.round() <= 0.0 {
        return Err(Error::GammaPole { re: z.re, im: z.im });
    }
    if z.re >= 0.5 {
        return Ok(lanczos_ln_gamma(z));
    }
    if z.im < 0.0 {
        return Ok(reflected_ln_gamma(z.conj()).conj());
    }
    Ok(reflected_ln_gamma(z))
}

/// `Re z >= 0.5`.
fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (zm1 + k as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    (zm1 + 0.5) * t.ln() - t + LN_SQRT_2PI + series.ln()
}

/// Reflection `ln Gamma(z) = ln pi - ln sin(pi z) - ln Gamma(1 - z)` for
/// `Re z < 0.5`, `Im z >= 0`. The branch of `ln sin(pi z)` is written as
/// `-ln 2 + i pi/2 - i pi z + ln(1 - e^{2 pi i z})`, which is analytic on the
/// upper half-plane and makes the result agree with the principal branch.
fn reflected_ln_gamma(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let u = 2.0 * PI * i * z;
    let ln_sin = Complex64::new(-LN_2, PI / 2.0) - i * PI * z + (-exp_m1(u)).ln();
    LN_PI - ln_sin - lanczos_ln_gamma(1.0 - z)
}

/// `e^u - 1` without cancellation for small `|u|`.
fn exp_m1(u: Complex64) -> Complex64 {
    let (s, c) = u.im.sin_cos();
    let half = (0.5 * u.im).sin();
    Complex64::new(
        u.re.exp_m1() * c - 2.0 * half * half,
        u.re.exp() * s,
    )
}

/// Distance from `xi` to the nearest multiple of `2*pi`.
pub fn dist_to_two_pi_lattice(xi: f64) -> f64 {
    let r = xi.rem_euclid(TAU);
    r.min(TAU - r)
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("{p} not in [0, 1]")));
    }
    Ok(())
}

/// `sum_{n>=1} p^n cos(n xi) / n = -1/2 ln(1 - 2 p cos xi + p^2)` with the
/// default singular-line tolerance.
pub fn log_cosine_sum(p: f64, xi: f64) -> Result<f64> {
    log_cosine_sum_eps(p, xi, DEFAULT_SINGULAR_EPS)
}

/// As [`log_cosine_sum`], with an explicit tolerance `eps` for the `p = 1`
/// divergence check.
pub fn log_cosine_sum_eps(p: f64, xi: f64, eps: f64) -> Result<f64> {
    check_p(p)?;
    if !xi.is_finite() {
        return Err(invalid("xi", "non-finite"));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 && dist_to_two_pi_lattice(xi) < eps {
        return Err(Error::Divergent { xi });
    }
    // 1 - 2p cos xi + p^2 written without cancellation near p = 1, xi = 0.
    let s = (0.5 * xi).sin();
    let q = 1.0 - p;
    Ok(-0.5 * (q * q + 4.0 * p * s * s).ln())
}

/// `sum_{n>=1} p^n sin(n x) / n = arctan(p sin x / (1 - p cos x))`.
///
/// For `p = 1` the sum is the sawtooth `(pi - x)/2` on `(0, 2 pi)` and is
/// defined as 0 on `2*pi*Z`.
pub fn arctan_sine_sum(p: f64, x: f64) -> Result<f64> {
    check_p(p)?;
    if !x.is_finite() {
        return Err(invalid("x", "non-finite"));
    }
    if p == 1.0 && dist_to_two_pi_lattice(x) < DEFAULT_SINGULAR_EPS {
        return Ok(0.0);
    }
    let (s, c) = x.sin_cos();
    Ok((p * s).atan2(1.0 - p * c))
}

/// `ln sinh(x)` for `x > 0`, stable for large `x`.
pub fn ln_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > 20.0 {
        x - LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}
