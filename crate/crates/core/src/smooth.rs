//! Correlator at late times `t1, t2 >> tau` after a tanh step, split as
//! `kappa = kappa_A + kappa_B`: the exact mode sums and their large-`n`
//! closed-form approximations.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::special::{ln_sinh, log_gamma_complex};
use crate::sudden::{enumerate_lines, LineKind, Sign, SingularityLine, SpacetimePoint};
use crate::waveguide::{approximation_threshold, omega, TanhStep};

/// Times below `VALIDITY_FACTOR * tau` are outside the late-time regime.
pub const VALIDITY_FACTOR: f64 = 5.0;

const LOG_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothKappaParts {
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub total: f64,
    /// Set for approximate evaluation when `tau` is below the threshold above
    /// which the expansions hold for every mode.
    pub low_n_unreliable: bool,
}

impl SmoothKappaParts {
    fn new(kappa_a: f64, kappa_b: f64, low_n_unreliable: bool) -> Self {
        Self {
            kappa_a,
            kappa_b,
            total: kappa_a + kappa_b,
            low_n_unreliable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiTilde {
    pub s1: Sign,
    pub s2: Sign,
    pub value: f64,
}

/// Per-mode factors of the exact sums, independent of positions and times.
#[derive(Debug, Clone)]
pub struct SmoothModeTable {
    length: f64,
    v1: f64,
    /// `p^n`
    regulator: Vec<f64>,
    /// sinh ratio multiplying the stationary part
    ratio: Vec<f64>,
    /// `kappa_B` coefficient before the `e^{-i w1 (t1 + t2)}` phase
    pair: Vec<Complex64>,
}

impl SmoothModeTable {
    pub fn new(profile: &TanhStep, length: f64, n_max: u32, p: f64) -> Result<Self> {
        check_sum_args(length, n_max, p)?;
        let mut regulator = Vec::with_capacity(n_max as usize);
        let mut ratio = Vec::with_capacity(n_max as usize);
        let mut pair = Vec::with_capacity(n_max as usize);
        let mut weight = 1.0;
        for n in 1..=n_max {
            weight *= p;
            regulator.push(weight);
            ratio.push(stationary_ratio(n, profile, length));
            pair.push(pair_coefficient(n, profile, length)?);
        }
        Ok(Self {
            length,
            v1: profile.v1(),
            regulator,
            ratio,
            pair,
        })
    }

    pub fn n_max(&self) -> u32 {
        self.ratio.len() as u32
    }

    /// Mode weights `(a_n, b_n)` at fixed times such that
    /// `kappa_A = sum a_n Psi_n(x1) Psi_n(x2)` and likewise for `kappa_B`.
    pub fn weights(&self, t1: f64, t2: f64) -> (Vec<f64>, Vec<f64>) {
        let mut a = Vec::with_capacity(self.ratio.len());
        let mut b = Vec::with_capacity(self.ratio.len());
        for (idx, ((&r, &c), &pn)) in self.ratio.iter().zip(&self.pair).zip(&self.regulator).enumerate() {
            let w1 = omega(idx as u32 + 1, self.v1, self.length);
            a.push(pn * r * (w1 * (t1 - t2)).cos() / (2.0 * w1));
            b.push(pn * (c * Complex64::from_polar(1.0, -w1 * (t1 + t2))).re);
        }
        (a, b)
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

fn check_sum_args(length: f64, n_max: u32, p: f64) -> Result<()> {
    if !(length.is_finite() && length > 0.0) {
        return Err(invalid("length", format!("must be > 0, got {length}")));
    }
    if n_max == 0 {
        return Err(invalid("n_max", "must be >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("regulator {p} not in (0, 1)")));
    }
    Ok(())
}

/// `[sinh^2(a + b) + sinh^2(a - b)] / [sinh(2a) sinh(2b)]` with
/// `a = pi w0 tau / 2`, `b = pi w1 tau / 2`.
pub fn stationary_ratio(n: u32, profile: &TanhStep, length: f64) -> f64 {
    if profile.v0() == profile.v1() {
        return 1.0;
    }
    let a = 0.5 * PI * omega(n, profile.v0(), length) * profile.tau();
    let b = 0.5 * PI * omega(n, profile.v1(), length) * profile.tau();
    let ln_u = ln_sinh(a + b);
    let ln_w = ln_sinh((a - b).abs());
    let ln_num = 2.0 * ln_u + (2.0 * (ln_w - ln_u)).exp().ln_1p();
    (ln_num - ln_sinh(2.0 * a) - ln_sinh(2.0 * b)).exp()
}

/// `4 pi / [(w0^2 - w1^2) tau] * (Gamma ratio)^2 / sinh(pi w0 tau)`, zero
/// for `v0 = v1`.
pub fn pair_coefficient(n: u32, profile: &TanhStep, length: f64) -> Result<Complex64> {
    if profile.v0() == profile.v1() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let tau = profile.tau();
    let w0 = omega(n, profile.v0(), length);
    let w1 = omega(n, profile.v1(), length);
    let i = Complex64::i();
    let ln_ratio = log_gamma_complex(-i * (w1 * tau))?
        - log_gamma_complex(-i * (0.5 * (w0 + w1) * tau))?
        - log_gamma_complex(i * (0.5 * (w0 - w1) * tau))?;
    let pre = 4.0 * PI / ((w0 * w0 - w1 * w1) * tau);
    let ln_mag = 2.0 * ln_ratio - ln_sinh(PI * w0 * tau) + pre.abs().ln();
    if ln_mag.re > 700.0 {
        return Err(Error::Overflow(ln_mag.re));
    }
    Ok(pre.signum() * ln_mag.exp())
}

/// `(1/D) sum_n w_n cos(n theta)`, so that `sum_n w_n Psi_n(x1) Psi_n(x2)`
/// equals `cosine_series(alpha) + cosine_series(beta)` with
/// `alpha = pi (x1 + x2) / D`, `beta = pi (x1 - x2) / D`.
pub(crate) fn cosine_series(weights: &[f64], theta: f64, length: f64) -> f64 {
    let mut sum = 0.0;
    for (idx, &w) in weights.iter().enumerate() {
        sum += w * ((idx + 1) as f64 * theta).cos();
    }
    sum / length
}

pub(crate) fn shape_sum(weights: &[f64], x1: f64, x2: f64, length: f64) -> f64 {
    let alpha = PI * (x1 + x2) / length;
    let beta = PI * (x1 - x2) / length;
    cosine_series(weights, alpha, length) + cosine_series(weights, beta, length)
}

fn warn_if_early(p1: &SpacetimePoint, p2: &SpacetimePoint, tau: f64) {
    let limit = VALIDITY_FACTOR * tau;
    if p1.t < limit || p2.t < limit {
        log::warn!(
            "t1 = {}, t2 = {} below {limit}: late-time representation may be inaccurate",
            p1.t,
            p2.t
        );
    }
}

pub fn kappa_a_exact(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    profile: &TanhStep,
    length: f64,
    n_max: u32,
    p: f64,
) -> Result<f64> {
    let table = SmoothModeTable::new(profile, length, n_max, p)?;
    let (a, _) = table.weights(p1.t, p2.t);
    Ok(shape_sum(&a, p1.x, p2.x, length))
}

pub fn kappa_b_exact(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    profile: &TanhStep,
    length: f64,
    n_max: u32,
    p: f64,
) -> Result<f64> {
    if profile.v0() == profile.v1() {
        check_sum_args(length, n_max, p)?;
        return Ok(0.0);
    }
    let table = SmoothModeTable::new(profile, length, n_max, p)?;
    let (_, b) = table.weights(p1.t, p2.t);
    Ok(shape_sum(&b, p1.x, p2.x, length))
}

/// Single unregularized summand of the exact `kappa_B`.
pub fn kappa_b_term(
    n: u32,
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    profile: &TanhStep,
    length: f64,
) -> Result<f64> {
    let c = pair_coefficient(n, profile, length)?;
    let w1 = omega(n, profile.v1(), length);
    let k = PI * n as f64 / length;
    let shapes = 2.0 / length * (k * p1.x).cos() * (k * p2.x).cos();
    Ok(shapes * (c * Complex64::from_polar(1.0, -w1 * (p1.t + p2.t))).re)
}

/// `p2 = exp(-2 pi^2 min(v0, v1) tau / D)`.
pub fn damping_factor(profile: &TanhStep, length: f64) -> f64 {
    (-2.0 * PI * PI * profile.min_speed() * profile.tau() / length).exp()
}

/// Closed-form large-`n` approximation of `kappa_A`. Diverges on the
/// light-cone lines `x1 + s1 x2 - s2 v1 (t1 - t2) = 2Dm`.
pub fn kappa_a_approx(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    profile: &TanhStep,
    length: f64,
) -> Result<f64> {
    let v1 = profile.v1();
    let pk = damping_factor(profile, length);
    let mut sum = 0.0;
    for s1 in Sign::BOTH {
        for s2 in Sign::BOTH {
            let xi = PI / length * (p1.x + s1.value() * p2.x - s2.value() * v1 * (p1.t - p2.t));
            let s = (0.5 * xi).sin();
            let cone = 4.0 * s * s;
            if cone < LOG_THRESHOLD {
                return Err(Error::Divergent { xi });
            }
            let q = 1.0 - pk;
            sum += cone.ln() + (q * q + 4.0 * pk * s * s).ln();
        }
    }
    Ok(-sum / (8.0 * PI * v1))
}

/// Offset `v0 tau ln(|v0 - v1|/(v0 + v1)) + v1 tau ln(4 v1^2/|v0^2 - v1^2|)`
/// (a length) entering the shifted phase.
pub fn tilde_offset(profile: &TanhStep) -> Result<f64> {
    let (v0, v1, tau) = (profile.v0(), profile.v1(), profile.tau());
    if v0 == v1 {
        return Err(invalid("profile", "shifted phase undefined for v0 = v1"));
    }
    Ok(v0 * tau * ((v0 - v1).abs() / (v0 + v1)).ln()
        + v1 * tau * (4.0 * v1 * v1 / (v0 * v0 - v1 * v1).abs()).ln())
}

pub fn xi_tilde(
    s1: Sign,
    s2: Sign,
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    profile: &TanhStep,
    length: f64,
) -> Result<XiTilde> {
    let offset = tilde_offset(profile)?;
    let value = PI / length
        * (p1.x + s1.value() * p2.x - s2.value() * profile.v1() * (p1.t + p2.t) - s2.value() * offset);
    Ok(XiTilde { s1, s2, value })
}

/// Closed-form large-`n` approximation of `kappa_B`; bounded by `1/v1`.
/// Zero for `v0 = v1`.
pub fn kappa_b_approx(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    profile: &TanhStep,
    length: f64,
) -> f64 {
    let Ok(offset) = tilde_offset(profile) else {
        return 0.0;
    };
    let v1 = profile.v1();
    let damp = (PI * PI * profile.tau() * profile.min_speed() / length).exp();
    let mut sum = 0.0;
    for s1 in Sign::BOTH {
        for s2 in Sign::BOTH {
            let xt = PI / length
                * (p1.x + s1.value() * p2.x - s2.value() * v1 * (p1.t + p2.t) - s2.value() * offset);
            let (s, c) = xt.sin_cos();
            // denominator >= damp - 1 > 0, so atan2 equals the arctangent
            sum -= s2.value() * s.atan2(damp - c);
        }
    }
    sum / (2.0 * PI * v1)
}

/// Whether the large-`n` expansions are reliable for every mode.
pub fn approximation_reliable(profile: &TanhStep, length: f64) -> bool {
    let (v0, v1) = (profile.v0(), profile.v1());
    let threshold = if v0 == v1 {
        length / (PI * v0.min(v1))
    } else {
        approximation_threshold(v0, v1, length)
    };
    profile.tau() >= threshold
}

pub fn kappa_smooth(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    profile: &TanhStep,
    length: f64,
    mode: EvalMode,
    n_max: u32,
    p: f64,
) -> Result<SmoothKappaParts> {
    warn_if_early(p1, p2, profile.tau());
    match mode {
        EvalMode::Exact => {
            let table = SmoothModeTable::new(profile, length, n_max, p)?;
            let (a, b) = table.weights(p1.t, p2.t);
            Ok(SmoothKappaParts::new(
                shape_sum(&a, p1.x, p2.x, length),
                shape_sum(&b, p1.x, p2.x, length),
                false,
            ))
        }
        EvalMode::Approx => {
            let a = kappa_a_approx(p1, p2, profile, length)?;
            let b = kappa_b_approx(p1, p2, profile, length);
            Ok(SmoothKappaParts::new(a, b, !approximation_reliable(profile, length)))
        }
    }
}

/// Light-cone divergence lines of `kappa_A` and the sign-change lines
/// `x1 + s1 x2 - s2 v1 (t1 + t2) = Dm` of the `kappa_B` summands.
pub fn feature_lines(t1: f64, t2: f64, profile: &TanhStep, length: f64) -> Vec<SingularityLine> {
    let v1 = profile.v1();
    let mut lines = enumerate_lines(&[(LineKind::LightCone, v1, -v1, 1.0)], t1, t2, length, 2.0 * length);
    if profile.v0() != profile.v1() {
        lines.extend(enumerate_lines(&[(LineKind::SignChange, v1, v1, 0.0)], t1, t2, length, length));
    }
    lines
}
