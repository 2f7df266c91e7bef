//! Two-point correlator after an instantaneous change of the propagation
//! speed: closed forms for all sign combinations of `(t1, t2)`, an
//! Abel-regularized mode sum as an independent evaluation path, and the
//! catalog of lines on which the closed forms diverge.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::waveguide::{bogoliubov_sudden, omega, SuddenStep};

/// Default threshold on the log argument `2 - 2 cos xi` below which a term
/// is reported as singular.
pub const DEFAULT_LOG_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn of(value: f64) -> Self {
        if value < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// Phase argument `(pi/D)[x1 + s1 x2 - s2 (vi t1 +- vj t2)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiSpec {
    pub vi: f64,
    pub vj: f64,
    pub time_sign: Sign,
    pub s1: Sign,
    pub s2: Sign,
}

pub fn xi_value(spec: &XiSpec, p1: &SpacetimePoint, p2: &SpacetimePoint, length: f64) -> f64 {
    let time = spec.vi * p1.t + spec.time_sign.value() * spec.vj * p2.t;
    PI / length * (p1.x + spec.s1.value() * p2.x - spec.s2.value() * time)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineKind {
    LightCone,
    PairCreation,
    PartialReflection,
    /// Sign-change (step) lines of the smoothed pair-creation term; not a
    /// divergence.
    SignChange,
}

impl LineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LineKind::LightCone => "LightCone",
            LineKind::PairCreation => "PairCreation",
            LineKind::PartialReflection => "PartialReflection",
            LineKind::SignChange => "SignChange",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Divergence {
    Positive,
    Negative,
}

impl Divergence {
    pub fn of(weight: f64) -> Self {
        if weight < 0.0 {
            Divergence::Negative
        } else {
            Divergence::Positive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaValue {
    Finite(f64),
    Singular(Divergence),
}

impl KappaValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            KappaValue::Finite(v) => Some(v),
            KappaValue::Singular(_) => None,
        }
    }

    pub fn is_singular(self) -> bool {
        matches!(self, KappaValue::Singular(_))
    }
}

/// A line `x1 + s1 x2 = offset` in the `(x1, x2)` square, where
/// `offset = s2 (coeff_t1 t1 + coeff_t2 t2) + period m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityLine {
    pub kind: LineKind,
    pub s1: Sign,
    pub s2: Sign,
    pub m: i64,
    pub coeff_t1: f64,
    pub coeff_t2: f64,
    pub offset: f64,
    /// Sum of the prefactors of all closed-form terms diverging on this line
    /// (in units of `1/(16 pi v0)`); its sign gives the direction.
    pub weight: f64,
}

impl SingularityLine {
    pub fn direction(&self) -> Divergence {
        Divergence::of(self.weight)
    }

    /// Signed residual `x1 + s1 x2 - offset`.
    pub fn residual(&self, x1: f64, x2: f64) -> f64 {
        x1 + self.s1.value() * x2 - self.offset
    }
}

/// One `sum_{s1,s2} ln[2 - 2 cos xi]` block of a closed form, weighted.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogTerm {
    pub weight: f64,
    pub vi: f64,
    pub vj: f64,
    pub time_sign: Sign,
    pub kind: LineKind,
}

/// Terms of the closed form for the ordered pair `(t1, t2)`, with `t1 <= 0`
/// whenever the signs differ. Overall prefactor is `-1/(16 pi v0)`.
fn closed_form_terms(t1: f64, t2: f64, step: &SuddenStep) -> Vec<LogTerm> {
    let (v0, v1) = (step.v0(), step.v1());
    let before1 = t1 <= 0.0;
    let before2 = t2 <= 0.0;
    let mut terms = match (before1, before2) {
        (true, true) => vec![LogTerm {
            weight: 2.0,
            vi: v0,
            vj: v0,
            time_sign: Sign::Minus,
            kind: LineKind::LightCone,
        }],
        (false, false) => {
            let r = v0 * v0 / (v1 * v1);
            vec![
                LogTerm {
                    weight: 1.0 + r,
                    vi: v1,
                    vj: v1,
                    time_sign: Sign::Minus,
                    kind: LineKind::LightCone,
                },
                LogTerm {
                    weight: 1.0 - r,
                    vi: v1,
                    vj: v1,
                    time_sign: Sign::Plus,
                    kind: LineKind::PairCreation,
                },
            ]
        }
        _ => {
            let r = v0 / v1;
            vec![
                LogTerm {
                    weight: 1.0 + r,
                    vi: v0,
                    vj: v1,
                    time_sign: Sign::Minus,
                    kind: LineKind::LightCone,
                },
                LogTerm {
                    weight: 1.0 - r,
                    vi: v0,
                    vj: v1,
                    time_sign: Sign::Plus,
                    kind: LineKind::PartialReflection,
                },
            ]
        }
    };
    terms.retain(|t| t.weight != 0.0);
    terms
}

/// Orders the points so that a `t <= 0` point comes first when signs differ,
/// and by `(t, x)` otherwise, which makes the result bitwise symmetric.
fn ordered<'a>(
    p1: &'a SpacetimePoint,
    p2: &'a SpacetimePoint,
) -> (&'a SpacetimePoint, &'a SpacetimePoint) {
    let (before1, before2) = (p1.t <= 0.0, p2.t <= 0.0);
    let swap = if before1 != before2 {
        before2
    } else {
        p1.t.total_cmp(&p2.t).then(p1.x.total_cmp(&p2.x)).is_gt()
    };
    if swap {
        (p2, p1)
    } else {
        (p1, p2)
    }
}

fn evaluate_terms(
    terms: &[LogTerm],
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    v0: f64,
    length: f64,
    threshold: f64,
) -> KappaValue {
    let mut sum = 0.0;
    let mut singular_weight: Option<f64> = None;
    for term in terms {
        for s1 in Sign::BOTH {
            for s2 in Sign::BOTH {
                let spec = XiSpec {
                    vi: term.vi,
                    vj: term.vj,
                    time_sign: term.time_sign,
                    s1,
                    s2,
                };
                let half = 0.5 * xi_value(&spec, p1, p2, length);
                let s = half.sin();
                let arg = 4.0 * s * s;
                if arg < threshold {
                    *singular_weight.get_or_insert(0.0) += term.weight;
                } else {
                    sum += term.weight * arg.ln();
                }
            }
        }
    }
    match singular_weight {
        Some(w) => KappaValue::Singular(Divergence::of(w)),
        None => KappaValue::Finite(-sum / (16.0 * PI * v0)),
    }
}

/// Closed-form symmetrized correlator for the sudden step.
pub fn kappa_sudden(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    step: &SuddenStep,
    length: f64,
) -> KappaValue {
    kappa_sudden_with_threshold(p1, p2, step, length, DEFAULT_LOG_THRESHOLD)
}

pub fn kappa_sudden_with_threshold(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    step: &SuddenStep,
    length: f64,
    threshold: f64,
) -> KappaValue {
    let (a, b) = ordered(p1, p2);
    let terms = closed_form_terms(a.t, b.t, step);
    evaluate_terms(&terms, a, b, step.v0(), length, threshold)
}

/// The closed form split into its light-cone and pair-creation /
/// partial-reflection contributions.
pub fn kappa_sudden_by_kind(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    step: &SuddenStep,
    length: f64,
) -> Vec<(LineKind, KappaValue)> {
    let (a, b) = ordered(p1, p2);
    closed_form_terms(a.t, b.t, step)
        .iter()
        .map(|term| {
            let value = evaluate_terms(
                std::slice::from_ref(term),
                a,
                b,
                step.v0(),
                length,
                DEFAULT_LOG_THRESHOLD,
            );
            (term.kind, value)
        })
        .collect()
}

/// Prefactor `(1 - v0^2/v1^2) / (16 pi v0)` of the pair-creation block for
/// two positive times.
pub fn pair_creation_coefficient(step: &SuddenStep) -> f64 {
    let (v0, v1) = (step.v0(), step.v1());
    (1.0 - v0 * v0 / (v1 * v1)) / (16.0 * PI * v0)
}

/// Per-mode amplitude of `a_n` in `phi_n(t)` for the sudden step.
fn sudden_mode_amplitude(n: u32, t: f64, step: &SuddenStep, length: f64, zp: f64, zm: f64) -> Complex64 {
    if t <= 0.0 {
        let w0 = omega(n, step.v0(), length);
        Complex64::from_polar(1.0, -w0 * t) / (2.0 * w0).sqrt()
    } else {
        let w1 = omega(n, step.v1(), length);
        let (s, c) = (w1 * t).sin_cos();
        // zeta+ e^{-i w t} + zeta- e^{+i w t}, both coefficients real
        Complex64::new((zp + zm) * c, (zm - zp) * s) / (2.0 * w1).sqrt()
    }
}

/// Abel-regularized mode sum `sum_{n=1}^{n_max} p^n Psi_n(x1) Psi_n(x2)
/// Re[f_n(t1) conj f_n(t2)]`.
pub fn kappa_mode_sum(
    p1: &SpacetimePoint,
    p2: &SpacetimePoint,
    step: &SuddenStep,
    length: f64,
    n_max: u32,
    p: f64,
) -> Result<f64> {
    if n_max == 0 {
        return Err(invalid("n_max", "must be >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("regulator {p} not in (0, 1)")));
    }
    let pair = bogoliubov_sudden(step.v0(), step.v1())?;
    let (zp, zm) = (pair.zeta_plus.re, pair.zeta_minus.re);
    let mut sum = 0.0;
    let mut weight = 1.0;
    for n in 1..=n_max {
        weight *= p;
        let k = PI * n as f64 / length;
        let shapes = 2.0 / length * (k * p1.x).cos() * (k * p2.x).cos();
        let a1 = sudden_mode_amplitude(n, p1.t, step, length, zp, zm);
        let a2 = sudden_mode_amplitude(n, p2.t, step, length, zp, zm);
        sum += weight * shapes * (a1 * a2.conj()).re;
    }
    Ok(sum)
}

/// Per-mode weights `p^n Re[f_n(t1) conj f_n(t2)]` for `n = 1..=n_max`.
pub(crate) fn mode_sum_weights(
    t1: f64,
    t2: f64,
    step: &SuddenStep,
    length: f64,
    n_max: u32,
    p: f64,
) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(invalid("n_max", "must be >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("regulator {p} not in (0, 1)")));
    }
    let pair = bogoliubov_sudden(step.v0(), step.v1())?;
    let (zp, zm) = (pair.zeta_plus.re, pair.zeta_minus.re);
    let mut weight = 1.0;
    Ok((1..=n_max)
        .map(|n| {
            weight *= p;
            let a1 = sudden_mode_amplitude(n, t1, step, length, zp, zm);
            let a2 = sudden_mode_amplitude(n, t2, step, length, zp, zm);
            weight * (a1 * a2.conj()).re
        })
        .collect())
}

/// Enumerates the distinct lines `x1 + s1 x2 = offset` crossing the open
/// square `(0, D)^2` for the given weighted terms.
pub(crate) fn enumerate_lines(
    specs: &[(LineKind, f64, f64, f64)],
    t1: f64,
    t2: f64,
    length: f64,
    period: f64,
) -> Vec<SingularityLine> {
    let tol = 1e-12 * length;
    let mut lines: Vec<SingularityLine> = Vec::new();
    for &(kind, coeff_t1, coeff_t2, weight) in specs {
        for s1 in Sign::BOTH {
            let (lo, hi) = match s1 {
                Sign::Plus => (0.0, 2.0 * length),
                Sign::Minus => (-length, length),
            };
            for s2 in Sign::BOTH {
                let base = s2.value() * (coeff_t1 * t1 + coeff_t2 * t2);
                let m_lo = ((lo - base) / period).floor() as i64 - 1;
                let m_hi = ((hi - base) / period).ceil() as i64 + 1;
                for m in m_lo..=m_hi {
                    let offset = base + period * m as f64;
                    if offset <= lo + tol || offset >= hi - tol {
                        continue;
                    }
                    if let Some(existing) = lines.iter_mut().find(|l| {
                        l.kind == kind && l.s1 == s1 && (l.offset - offset).abs() <= tol
                    }) {
                        existing.weight += weight;
                        continue;
                    }
                    lines.push(SingularityLine {
                        kind,
                        s1,
                        s2,
                        m,
                        coeff_t1,
                        coeff_t2,
                        offset,
                        weight,
                    });
                }
            }
        }
    }
    lines.sort_by(|a, b| {
        (a.kind, a.s1)
            .cmp(&(b.kind, b.s1))
            .then(a.offset.total_cmp(&b.offset))
    });
    lines
}

/// All divergence lines of the sudden-step closed form at fixed `(t1, t2)`.
pub fn singularity_lines(t1: f64, t2: f64, step: &SuddenStep, length: f64) -> Vec<SingularityLine> {
    let swapped = t1 > 0.0 && t2 <= 0.0;
    let (ta, tb) = if swapped { (t2, t1) } else { (t1, t2) };
    let specs: Vec<(LineKind, f64, f64, f64)> = closed_form_terms(ta, tb, step)
        .iter()
        .map(|term| {
            let cj = term.time_sign.value() * term.vj;
            // closed form written for (ta, tb); relabel to (t1, t2)
            if swapped {
                (term.kind, cj, term.vi, term.weight)
            } else {
                (term.kind, term.vi, cj, term.weight)
            }
        })
        .collect();
    // Swapping the points maps x1 - x2 = c onto x1 - x2 = -c, which the
    // enumeration already covers through s2 -> -s2, m -> -m.
    enumerate_lines(&specs, t1, t2, length, 2.0 * length)
}
