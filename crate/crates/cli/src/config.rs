//! Run configuration: TOML ingestion, defaults and validation.

use std::path::PathBuf;

use qwave::waveguide::VelocityProfile;
use serde::Deserialize;

pub const DEFAULT_LENGTH: f64 = 1.0;
pub const DEFAULT_REGULATOR: f64 = 0.999;
pub const DEFAULT_N_MAX: u32 = 10_000;
pub const DEFAULT_RESOLUTION: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration document: {0}")]
    Parse(String),
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sudden,
    SmoothExact,
    SmoothApprox,
    /// Abel-regularized mode sums instead of closed forms.
    Oracle,
}

impl Mode {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        match text {
            "sudden" => Ok(Mode::Sudden),
            "smooth-exact" => Ok(Mode::SmoothExact),
            "smooth-approx" => Ok(Mode::SmoothApprox),
            "oracle" => Ok(Mode::Oracle),
            other => Err(invalid(
                "mode",
                format!("unknown mode {other:?} (expected sudden, smooth-exact, smooth-approx or oracle)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub length: f64,
    pub profile: VelocityProfile,
    pub t1: f64,
    pub t2: f64,
    pub resolution: usize,
    pub n_max: u32,
    pub regulator: f64,
    pub output_dir: Option<PathBuf>,
    pub mode: Mode,
    /// Non-fatal notes produced during validation.
    pub warnings: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    t1: Option<f64>,
    t2: Option<f64>,
    resolution: Option<i64>,
    n_max: Option<i64>,
    regulator: Option<f64>,
    geometry: Option<RawGeometry>,
    profile: Option<RawProfile>,
    v0: Option<f64>,
    v1: Option<f64>,
    tau: Option<f64>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    length: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawProfile {
    Kind(String),
    Table(RawProfileTable),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfileTable {
    kind: String,
    v0: Option<f64>,
    v1: Option<f64>,
    tau: Option<f64>,
}

/// Profile kind and parameters, accepted either as a `[profile]` table or as
/// `profile = "kind"` with `v0`, `v1`, `tau` at the top level.
struct ProfileFields {
    kind: String,
    v0: Option<f64>,
    v1: Option<f64>,
    tau: Option<f64>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
    validate(raw)
}

fn positive(path: &str, value: Option<f64>) -> Result<f64, ConfigError> {
    let value = value.ok_or_else(|| invalid(path, "missing"))?;
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(path, format!("must be a finite positive number, got {value}")))
    }
}

fn finite(path: &str, value: Option<f64>, default: f64) -> Result<f64, ConfigError> {
    let value = value.unwrap_or(default);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(path, format!("must be finite, got {value}")))
    }
}

fn profile_fields(raw: &RawConfig) -> Result<ProfileFields, ConfigError> {
    let flat = [("v0", raw.v0), ("v1", raw.v1), ("tau", raw.tau)];
    match &raw.profile {
        None => Err(invalid("profile", "missing")),
        Some(RawProfile::Kind(kind)) => Ok(ProfileFields {
            kind: kind.clone(),
            v0: raw.v0,
            v1: raw.v1,
            tau: raw.tau,
        }),
        Some(RawProfile::Table(t)) => {
            if let Some((key, _)) = flat.iter().find(|(_, v)| v.is_some()) {
                return Err(invalid(
                    key,
                    "top-level speed parameters conflict with the [profile] table",
                ));
            }
            Ok(ProfileFields {
                kind: t.kind.clone(),
                v0: t.v0,
                v1: t.v1,
                tau: t.tau,
            })
        }
    }
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut warnings = Vec::new();
    let fields = profile_fields(&raw)?;
    let v0 = positive("profile.v0", fields.v0)?;
    let v1 = positive("profile.v1", fields.v1)?;
    let profile = match fields.kind.as_str() {
        "sudden" => {
            if fields.tau.is_some() {
                warnings.push("profile.tau is ignored for a sudden profile".to_string());
            }
            VelocityProfile::sudden(v0, v1)
        }
        "tanh" => VelocityProfile::tanh(v0, v1, positive("profile.tau", fields.tau)?),
        other => return Err(invalid("profile.kind", format!("unknown kind {other:?} (expected sudden or tanh)"))),
    }
    .map_err(|e| invalid("profile", e.to_string()))?;

    let length = match &raw.geometry {
        Some(g) => positive("geometry.length", Some(g.length.unwrap_or(DEFAULT_LENGTH)))?,
        None => DEFAULT_LENGTH,
    };
    let resolution = match raw.resolution {
        None => DEFAULT_RESOLUTION,
        Some(r) if r >= 2 => r as usize,
        Some(r) => return Err(invalid("resolution", format!("must be >= 2, got {r}"))),
    };
    let n_max = match raw.n_max {
        None => DEFAULT_N_MAX,
        Some(n) if n >= 1 && n <= i64::from(u32::MAX) => n as u32,
        Some(n) => return Err(invalid("n_max", format!("must be >= 1, got {n}"))),
    };
    let regulator = raw.regulator.unwrap_or(DEFAULT_REGULATOR);
    if !(regulator > 0.0 && regulator < 1.0) {
        return Err(invalid("regulator", format!("must lie in (0, 1), got {regulator}")));
    }
    let is_tanh = matches!(profile, VelocityProfile::Tanh(_));
    let mode = match raw.mode.as_deref() {
        Some(m) => Mode::parse(m)?,
        None if is_tanh => Mode::SmoothExact,
        None => Mode::Sudden,
    };
    match mode {
        Mode::Sudden if is_tanh => return Err(invalid("mode", "sudden mode needs profile.kind = \"sudden\"")),
        Mode::SmoothExact | Mode::SmoothApprox if !is_tanh => {
            return Err(invalid("mode", "smooth modes need profile.kind = \"tanh\""))
        }
        _ => {}
    }
    Ok(RunConfig {
        length,
        profile,
        t1: finite("t1", raw.t1, 0.0)?,
        t2: finite("t2", raw.t2, 0.0)?,
        resolution,
        n_max,
        regulator,
        output_dir: raw.output.and_then(|o| o.dir),
        mode,
        warnings,
    })
}

impl RunConfig {
    /// Re-checks fields after command-line overrides.
    pub fn revalidate(&self) -> Result<(), ConfigError> {
        if self.resolution < 2 {
            return Err(invalid("resolution", format!("must be >= 2, got {}", self.resolution)));
        }
        if self.n_max == 0 {
            return Err(invalid("n_max", "must be >= 1"));
        }
        if !(self.regulator > 0.0 && self.regulator < 1.0) {
            return Err(invalid("regulator", format!("must lie in (0, 1), got {}", self.regulator)));
        }
        Ok(())
    }
}
