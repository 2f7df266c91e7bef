//! Waveguide geometry, velocity profiles, mode frequencies and shapes, and
//! the Bogoliubov coefficients connecting in- and out-vacua of each mode.
//!
//! Units: lengths in units of the waveguide length `D` unless a different
//! `length` is passed explicitly, speeds in `D` per unit time.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::special::{ln_sinh, log_gamma_complex, ComplexValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideGeometry {
    length: f64,
}

impl WaveguideGeometry {
    pub fn new(length: f64) -> Result<Self> {
        check_positive("length", length)?;
        Ok(Self { length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

impl Default for WaveguideGeometry {
    fn default() -> Self {
        Self { length: 1.0 }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(invalid(name, format!("must be finite and > 0, got {value}")));
    }
    Ok(())
}

/// Instantaneous switch from `v0` (t < 0) to `v1` (t >= 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuddenStep {
    v0: f64,
    v1: f64,
}

impl SuddenStep {
    pub fn new(v0: f64, v1: f64) -> Result<Self> {
        check_positive("v0", v0)?;
        check_positive("v1", v1)?;
        Ok(Self { v0, v1 })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }
}

/// `v^2(t) = gamma_- tanh(t/tau) + gamma_+`, `gamma_+- = (v1^2 +- v0^2)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhStep {
    v0: f64,
    v1: f64,
    tau: f64,
}

impl TanhStep {
    pub fn new(v0: f64, v1: f64, tau: f64) -> Result<Self> {
        check_positive("v0", v0)?;
        check_positive("v1", v1)?;
        check_positive("tau", tau)?;
        Ok(Self { v0, v1, tau })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma_plus(&self) -> f64 {
        0.5 * (self.v1 * self.v1 + self.v0 * self.v0)
    }

    pub fn gamma_minus(&self) -> f64 {
        0.5 * (self.v1 * self.v1 - self.v0 * self.v0)
    }

    pub fn speed_squared(&self, t: f64) -> f64 {
        self.gamma_minus() * (t / self.tau).tanh() + self.gamma_plus()
    }

    /// `v^2` continued to complex time; used by the contour integrator.
    pub fn speed_squared_complex(&self, t: Complex64) -> Complex64 {
        (t / self.tau).tanh() * self.gamma_minus() + self.gamma_plus()
    }

    pub fn min_speed(&self) -> f64 {
        self.v0.min(self.v1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    SuddenStep,
    TanhStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityProfile {
    Sudden(SuddenStep),
    Tanh(TanhStep),
}

impl VelocityProfile {
    pub fn sudden(v0: f64, v1: f64) -> Result<Self> {
        SuddenStep::new(v0, v1).map(Self::Sudden)
    }

    pub fn tanh(v0: f64, v1: f64, tau: f64) -> Result<Self> {
        TanhStep::new(v0, v1, tau).map(Self::Tanh)
    }

    pub fn kind(&self) -> ProfileKind {
        match self {
            Self::Sudden(_) => ProfileKind::SuddenStep,
            Self::Tanh(_) => ProfileKind::TanhStep,
        }
    }

    pub fn v0(&self) -> f64 {
        match self {
            Self::Sudden(s) => s.v0,
            Self::Tanh(s) => s.v0,
        }
    }

    pub fn v1(&self) -> f64 {
        match self {
            Self::Sudden(s) => s.v1,
            Self::Tanh(s) => s.v1,
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self {
            Self::Sudden(_) => None,
            Self::Tanh(s) => Some(s.tau),
        }
    }
}

/// Coefficients of `b_n = zeta_plus a_n + zeta_minus a_n^dagger`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovPair {
    pub zeta_plus: ComplexValue,
    pub zeta_minus: ComplexValue,
}

impl BogoliubovPair {
    pub const IDENTITY: Self = Self {
        zeta_plus: Complex64::new(1.0, 0.0),
        zeta_minus: Complex64::new(0.0, 0.0),
    };

    /// `|zeta+|^2 - |zeta-|^2 - 1`; zero for a canonical transformation.
    pub fn unitarity_defect(&self) -> f64 {
        self.zeta_plus.norm_sqr() - self.zeta_minus.norm_sqr() - 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    /// `(n, particle number)` for `n = 1..=n_max`.
    pub entries: Vec<(u32, f64)>,
}

pub fn speed_at(profile: &VelocityProfile, t: f64) -> f64 {
    match profile {
        VelocityProfile::Sudden(s) => {
            if t < 0.0 {
                s.v0
            } else {
                s.v1
            }
        }
        VelocityProfile::Tanh(s) => s.speed_squared(t).sqrt(),
    }
}

/// `omega_n = pi n v / D`. The zero mode is excluded everywhere.
pub fn mode_frequency(n: u32, v: f64, length: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "the zero mode is excluded"));
    }
    check_positive("v", v)?;
    check_positive("length", length)?;
    Ok(omega(n, v, length))
}

#[inline]
pub(crate) fn omega(n: u32, v: f64, length: f64) -> f64 {
    PI * n as f64 * v / length
}

/// Neumann eigenfunctions on `[0, D]`.
pub fn mode_shape(n: u32, x: f64, length: f64) -> Result<f64> {
    check_positive("length", length)?;
    let slack = 1e-12 * length;
    if !(x >= -slack && x <= length + slack) {
        return Err(Error::OutOfDomain { x, length });
    }
    Ok(if n == 0 {
        (1.0 / length).sqrt()
    } else {
        (2.0 / length).sqrt() * (PI * n as f64 * x / length).cos()
    })
}

/// Sudden-step connection; real and identical for every mode.
pub fn bogoliubov_sudden(v0: f64, v1: f64) -> Result<BogoliubovPair> {
    check_positive("v0", v0)?;
    check_positive("v1", v1)?;
    let pre = 0.5 * (v1 / v0).sqrt();
    let r = v0 / v1;
    Ok(BogoliubovPair {
        zeta_plus: Complex64::new(pre * (1.0 + r), 0.0),
        zeta_minus: Complex64::new(pre * (1.0 - r), 0.0),
    })
}

/// Exact tanh-step coefficients from ratios of Gamma functions, assembled
/// in log space.
pub fn bogoliubov_tanh(n: u32, profile: &TanhStep, length: f64) -> Result<BogoliubovPair> {
    if n == 0 {
        return Err(invalid("n", "the zero mode is excluded"));
    }
    check_positive("length", length)?;
    if profile.v0 == profile.v1 {
        return Ok(BogoliubovPair::IDENTITY);
    }
    let w0 = omega(n, profile.v0, length);
    let w1 = omega(n, profile.v1, length);
    let tau = profile.tau;
    let i = Complex64::i();
    let half_sum = 0.5 * (w0 + w1) * tau;
    let half_diff = 0.5 * (w0 - w1) * tau;

    let common = 0.5 * (w1 / w0).ln() + log_gamma_complex(-i * (w1 * tau))?;
    let ln_plus = common + log_gamma_complex(1.0 - i * (w0 * tau))?
        - log_gamma_complex(1.0 - i * half_sum)?
        - log_gamma_complex(-i * half_sum)?;
    let ln_minus = common + log_gamma_complex(1.0 + i * (w0 * tau))?
        - log_gamma_complex(1.0 + i * half_diff)?
        - log_gamma_complex(i * half_diff)?;

    Ok(BogoliubovPair {
        zeta_plus: exp_checked(ln_plus)?,
        zeta_minus: exp_checked(ln_minus)?,
    })
}

fn exp_checked(z: Complex64) -> Result<Complex64> {
    if z.re > 700.0 {
        return Err(Error::Overflow(z.re));
    }
    Ok(z.exp())
}

pub fn particle_number(pair: &BogoliubovPair) -> f64 {
    pair.zeta_minus.norm_sqr()
}

/// Sudden-step particle number `(v1 - v0)^2 / (4 v0 v1)`, the same for all modes.
pub fn sudden_particle_number(step: &SuddenStep) -> f64 {
    let dv = step.v1 - step.v0;
    dv * dv / (4.0 * step.v0 * step.v1)
}

/// Natural log of the tanh-step particle number
/// `sinh^2[pi/2 (w0 - w1) tau] / (sinh[pi w0 tau] sinh[pi w1 tau])`.
/// Returns `-inf` when `v0 = v1`.
pub fn ln_tanh_particle_number(n: u32, profile: &TanhStep, length: f64) -> f64 {
    let w0 = omega(n, profile.v0, length);
    let w1 = omega(n, profile.v1, length);
    let a = 0.5 * PI * (w0 - w1).abs() * profile.tau;
    if a == 0.0 {
        return f64::NEG_INFINITY;
    }
    2.0 * ln_sinh(a) - ln_sinh(PI * w0 * profile.tau) - ln_sinh(PI * w1 * profile.tau)
}

pub fn tanh_particle_number(n: u32, profile: &TanhStep, length: f64) -> f64 {
    ln_tanh_particle_number(n, profile, length).exp()
}

pub fn spectrum(profile: &VelocityProfile, length: f64, n_max: u32) -> Result<ModeSpectrum> {
    if n_max == 0 {
        return Err(invalid("n_max", "must be >= 1"));
    }
    check_positive("length", length)?;
    let entries = match profile {
        VelocityProfile::Sudden(s) => {
            let value = sudden_particle_number(s);
            (1..=n_max).map(|n| (n, value)).collect()
        }
        VelocityProfile::Tanh(s) => (1..=n_max)
            .map(|n| (n, tanh_particle_number(n, s, length)))
            .collect(),
    };
    Ok(ModeSpectrum { entries })
}

/// Step width above which the large-`n` expansions of the smooth correlator
/// hold for every mode: `max{D/(pi v0), D/(pi v1), 2D/|pi (v0 - v1)|}`.
pub fn approximation_threshold(v0: f64, v1: f64, length: f64) -> f64 {
    let a = length / (PI * v0);
    let b = length / (PI * v1);
    let c = if v0 == v1 {
        f64::INFINITY
    } else {
        2.0 * length / (PI * (v0 - v1).abs())
    };
    a.max(b).max(c)
}
