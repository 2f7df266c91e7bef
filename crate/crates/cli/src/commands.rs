//! Subcommand implementations.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qwave::grid::{grid_evaluate, grid_evaluate_mode_sum, grid_evaluate_smooth, CorrelatorGrid};
use qwave::lattice::{
    extract_bogoliubov, integrate_mode, integrate_mode_with, kappa_from_trajectories, IntegrationOptions,
    ModeTrajectory,
};
use qwave::smooth::{feature_lines, kappa_smooth, EvalMode};
use qwave::sudden::{kappa_mode_sum, singularity_lines, Divergence, SpacetimePoint};
use qwave::waveguide::{
    bogoliubov_sudden, bogoliubov_tanh, mode_frequency, spectrum, BogoliubovPair, VelocityProfile,
};

use crate::config::{Mode, RunConfig};
use crate::output::{grid_csv, grid_svg, num, write_file, Csv};
use crate::report::{report_csv, report_table, CompareFailed, ReportRow, Tolerance};

/// Modes checked by `compare`.
pub const COMPARE_MODES: u32 = 8;
const COMPARE_POINTS: [(f64, f64); 3] = [(0.23, 0.61), (0.47, 0.12), (0.81, 0.36)];

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = write_file(dir, name, contents).with_context(|| format!("writing {}", dir.join(name).display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = spectrum(&cfg.profile, cfg.length, cfg.n_max)?;
    let mut csv = Csv::new(&["n", "omega0", "omega1", "particle_number"]);
    for (n, nb) in &spec.entries {
        csv.row(&[
            n.to_string(),
            num(mode_frequency(*n, cfg.profile.v0(), cfg.length)?),
            num(mode_frequency(*n, cfg.profile.v1(), cfg.length)?),
            num(*nb),
        ]);
    }
    write(out, "spectrum.csv", csv.as_str())?;
    Ok(())
}

pub fn evaluate_grid(cfg: &RunConfig) -> Result<CorrelatorGrid> {
    let res = cfg.resolution;
    let grid = match (cfg.mode, &cfg.profile) {
        (Mode::Sudden, VelocityProfile::Sudden(s)) => grid_evaluate(cfg.t1, cfg.t2, res, s, cfg.length)?,
        (Mode::Oracle, VelocityProfile::Sudden(s)) => {
            grid_evaluate_mode_sum(cfg.t1, cfg.t2, res, s, cfg.length, cfg.n_max, cfg.regulator)?
        }
        (Mode::SmoothApprox, VelocityProfile::Tanh(s)) => {
            grid_evaluate_smooth(cfg.t1, cfg.t2, res, s, cfg.length, EvalMode::Approx, cfg.n_max, cfg.regulator)?
        }
        (Mode::SmoothExact | Mode::Oracle, VelocityProfile::Tanh(s)) => {
            grid_evaluate_smooth(cfg.t1, cfg.t2, res, s, cfg.length, EvalMode::Exact, cfg.n_max, cfg.regulator)?
        }
        (mode, _) => anyhow::bail!("mode {mode:?} does not match the profile kind"),
    };
    Ok(grid)
}

pub fn cmd_grid(cfg: &RunConfig, out: &Path, stem: &str, title: &str) -> Result<()> {
    let grid = evaluate_grid(cfg)?;
    log::info!("{} of {} cells masked", grid.masked_count(), grid.values.len());
    write(out, &format!("{stem}.csv"), grid_csv(&grid).as_str())?;
    write(out, &format!("{stem}.svg"), &grid_svg(&grid, title))?;
    Ok(())
}

pub fn grid_title(cfg: &RunConfig) -> String {
    let p = &cfg.profile;
    let tau = p.tau().map(|t| format!(", tau = {t}")).unwrap_or_default();
    format!(
        "v0 kappa at t1 = {}, t2 = {} (v0 = {}, v1 = {}{tau})",
        cfg.t1,
        cfg.t2,
        p.v0(),
        p.v1()
    )
}

pub fn cmd_singularities(cfg: &RunConfig, out: &Path) -> Result<()> {
    let lines = match &cfg.profile {
        VelocityProfile::Sudden(s) => singularity_lines(cfg.t1, cfg.t2, s, cfg.length),
        VelocityProfile::Tanh(s) => feature_lines(cfg.t1, cfg.t2, s, cfg.length),
    };
    let mut csv = Csv::new(&["kind", "s1", "s2", "m", "coeff_t1", "coeff_t2", "offset", "direction"]);
    for l in &lines {
        let direction = if l.weight == 0.0 {
            "none"
        } else {
            match l.direction() {
                Divergence::Positive => "+",
                Divergence::Negative => "-",
            }
        };
        csv.row(&[
            l.kind.as_str().to_string(),
            format!("{:+}", l.s1.value() as i32),
            format!("{:+}", l.s2.value() as i32),
            l.m.to_string(),
            num(l.coeff_t1),
            num(l.coeff_t2),
            num(l.offset),
            direction.to_string(),
        ]);
    }
    write(out, "singularities.csv", csv.as_str())?;
    Ok(())
}

fn analytic_pair(n: u32, cfg: &RunConfig) -> Result<BogoliubovPair> {
    Ok(match &cfg.profile {
        VelocityProfile::Sudden(s) => bogoliubov_sudden(s.v0(), s.v1())?,
        VelocityProfile::Tanh(s) => bogoliubov_tanh(n, s, cfg.length)?,
    })
}

/// Integrates mode `n` and projects onto the out-modes.
fn oracle_pair(n: u32, cfg: &RunConfig, dt: Option<f64>) -> Result<BogoliubovPair> {
    let (v0, v1, d) = (cfg.profile.v0(), cfg.profile.v1(), cfg.length);
    let w1 = mode_frequency(n, v1, d)?;
    let traj = match &cfg.profile {
        VelocityProfile::Sudden(_) => {
            let span = d / v0.min(v1);
            let dt = dt.unwrap_or(0.02 / mode_frequency(n, v0.max(v1), d)?);
            integrate_mode(n, &cfg.profile, d, -span, span, dt)?
        }
        VelocityProfile::Tanh(s) => {
            let tau = s.tau();
            let opts = IntegrationOptions {
                dt: dt.unwrap_or(5e-4 * d / v0.max(v1)),
                contour_shift: 0.45 * PI * tau,
                keep_every: 100,
            };
            integrate_mode_with(n, &cfg.profile, d, -20.0 * tau, 10.0 * tau, &opts)?
        }
    };
    Ok(extract_bogoliubov(&traj, w1, traj.end())?)
}

fn kappa_rows(cfg: &RunConfig, dt: Option<f64>) -> Vec<ReportRow> {
    let d = cfg.length;
    let (mut t1, mut t2) = (cfg.t1, cfg.t2);
    if let Some(tau) = cfg.profile.tau() {
        // the closed smooth sums describe the field well after the step
        let late = 8.0 * tau;
        if t1 < late || t2 < late {
            log::warn!("compare: kappa sampled at t >= {late} for the tanh profile");
        }
        t1 = t1.max(late);
        t2 = t2.max(late);
    }
    let tol = Tolerance::Absolute(1e-6);
    let label = |x1: f64, x2: f64| format!("kappa(t1={t1},x1={x1};t2={t2},x2={x2})");
    let trajectories: Result<Vec<ModeTrajectory>> = (1..=COMPARE_MODES)
        .map(|n| {
            let w = mode_frequency(n, cfg.profile.v0().max(cfg.profile.v1()), d)?;
            let dt = dt.unwrap_or(0.02 / w);
            let start = match cfg.profile.tau() {
                Some(tau) => -8.0 * tau,
                None => -0.1 * d / cfg.profile.v0(),
            }
            .min(t1.min(t2) - dt);
            Ok(integrate_mode(n, &cfg.profile, d, start, t1.max(t2) + dt, dt)?)
        })
        .collect();
    COMPARE_POINTS
        .iter()
        .map(|&(a, b)| {
            let (x1, x2) = (a * d, b * d);
            let (p1, p2) = (SpacetimePoint::new(t1, x1), SpacetimePoint::new(t2, x2));
            let analytic = match &cfg.profile {
                VelocityProfile::Sudden(s) => kappa_mode_sum(&p1, &p2, s, d, COMPARE_MODES, cfg.regulator),
                VelocityProfile::Tanh(s) => {
                    kappa_smooth(&p1, &p2, s, d, EvalMode::Exact, COMPARE_MODES, cfg.regulator).map(|k| k.total)
                }
            };
            let analytic = match analytic {
                Ok(v) => v,
                Err(e) => return ReportRow::failed(label(x1, x2), f64::NAN, tol, e.to_string()),
            };
            let oracle = trajectories
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|t| kappa_from_trajectories(&p1, &p2, t, d, cfg.regulator).map_err(|e| e.to_string()));
            match oracle {
                Ok(v) => ReportRow::new(label(x1, x2), analytic, v, tol),
                Err(e) => ReportRow::failed(label(x1, x2), analytic, tol, e),
            }
        })
        .collect()
}

pub fn compare_rows(cfg: &RunConfig, dt: Option<f64>) -> Result<Vec<ReportRow>> {
    let sudden = matches!(cfg.profile, VelocityProfile::Sudden(_));
    let (zeta_tol, number_tol) = if sudden {
        (Tolerance::Absolute(1e-10), Tolerance::Relative(1e-10))
    } else {
        (Tolerance::Relative(1e-6), Tolerance::Relative(2e-6))
    };
    let mut rows = Vec::new();
    for n in 1..=COMPARE_MODES {
        let want = analytic_pair(n, cfg)?;
        let names = [
            format!("|zeta+| n={n}"),
            format!("|zeta-| n={n}"),
            format!("particle_number n={n}"),
        ];
        let analytic = [want.zeta_plus.norm(), want.zeta_minus.norm(), want.zeta_minus.norm_sqr()];
        let tols = [zeta_tol, zeta_tol, number_tol];
        match oracle_pair(n, cfg, dt) {
            Ok(got) => {
                let oracle = [got.zeta_plus.norm(), got.zeta_minus.norm(), got.zeta_minus.norm_sqr()];
                for k in 0..3 {
                    rows.push(ReportRow::new(names[k].clone(), analytic[k], oracle[k], tols[k]));
                }
            }
            Err(e) => {
                for k in 0..3 {
                    rows.push(ReportRow::failed(names[k].clone(), analytic[k], tols[k], e.to_string()));
                }
            }
        }
    }
    rows.extend(kappa_rows(cfg, dt));
    Ok(rows)
}

pub fn cmd_compare(cfg: &RunConfig, out: &Path, dt: Option<f64>) -> Result<()> {
    if let Some(dt) = dt {
        anyhow::ensure!(dt.is_finite() && dt > 0.0, crate::config::ConfigError::Invalid {
            path: "dt".into(),
            reason: format!("must be a finite positive number, got {dt}"),
        });
    }
    let rows = compare_rows(cfg, dt)?;
    print!("{}", report_table(&rows));
    write(out, "compare.csv", report_csv(&rows).as_str())?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CompareFailed {
            failed,
            total: rows.len(),
        }
        .into());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Static waveguide, t1 = t2 = -1, v0 = v1 = 1.
    Fig2,
    /// Sudden step v0 = 1 -> v1 = 0.8 at t1 = t2 = 0.1.
    Fig4a,
    /// Sudden step v0 = 1 -> v1 = 0.8 at t1 = t2 = 0.2.
    Fig4b,
    /// Tanh step of width 0.3 at t1 = t2 = 0.2, large-n approximation.
    Smooth,
}

impl Preset {
    pub fn stem(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::Smooth => "smooth",
        }
    }

    /// Times are in units of `D / v0`.
    pub fn config(self) -> RunConfig {
        let (profile, t, mode) = match self {
            Preset::Fig2 => (VelocityProfile::sudden(1.0, 1.0), -1.0, Mode::Sudden),
            Preset::Fig4a => (VelocityProfile::sudden(1.0, 0.8), 0.1, Mode::Sudden),
            Preset::Fig4b => (VelocityProfile::sudden(1.0, 0.8), 0.2, Mode::Sudden),
            Preset::Smooth => (VelocityProfile::tanh(1.0, 0.8, 0.3), 0.2, Mode::SmoothApprox),
        };
        RunConfig {
            length: crate::config::DEFAULT_LENGTH,
            profile: profile.expect("preset speeds are positive"),
            t1: t,
            t2: t,
            resolution: crate::config::DEFAULT_RESOLUTION,
            n_max: crate::config::DEFAULT_N_MAX,
            regulator: crate::config::DEFAULT_REGULATOR,
            output_dir: None,
            mode,
            warnings: Vec::new(),
        }
    }
}
