//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qwave::lattice::{
    extract_bogoliubov, integrate_mode_with, simulate_ladder, zero_crossing_frequency, IntegrationOptions,
    LadderState,
};
use qwave::smooth::{kappa_b_approx, kappa_smooth, EvalMode};
use qwave::sudden::{
    kappa_mode_sum, kappa_sudden, pair_creation_coefficient, singularity_lines, Divergence, KappaValue, LineKind,
    SpacetimePoint,
};
use qwave::waveguide::{
    approximation_threshold, bogoliubov_sudden, bogoliubov_tanh, ln_tanh_particle_number, mode_frequency,
    spectrum, sudden_particle_number, tanh_particle_number, SuddenStep, TanhStep, VelocityProfile,
};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pt(t: f64, x: f64) -> SpacetimePoint {
    SpacetimePoint::new(t, x)
}

fn sudden_particle_number_constant() -> Outcome {
    const TOL: f64 = 1e-14;
    let prof = VelocityProfile::sudden(1.0, 0.8).map_err(|e| e.to_string())?;
    let spec = spectrum(&prof, 1.0, 1000).map_err(|e| e.to_string())?;
    let worst = spec
        .entries
        .iter()
        .map(|(_, nb)| (nb - 0.0125).abs())
        .fold(0.0, f64::max);
    check(worst <= TOL, format!("max |N_n - 0.0125| = {worst:.2e} over n = 1..1000 (tol {TOL:e})"))
}

fn bogoliubov_unitarity() -> Outcome {
    const TOL: f64 = 1e-10;
    const CASES: usize = 1000;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let v0 = rng.gen_range(0.1..2.0);
        let v1 = rng.gen_range(0.1..2.0);
        let sudden = bogoliubov_sudden(v0, v1).map_err(|e| e.to_string())?;
        let step = TanhStep::new(v0, v1, rng.gen_range(0.01..2.0)).map_err(|e| e.to_string())?;
        let tanh = bogoliubov_tanh(rng.gen_range(1..=200), &step, 1.0).map_err(|e| e.to_string())?;
        worst = worst
            .max(sudden.unitarity_defect().abs())
            .max(tanh.unitarity_defect().abs());
    }
    check(worst <= TOL, format!("max defect {worst:.2e} over {CASES} sudden + {CASES} tanh (tol {TOL:e})"))
}

fn tanh_to_sudden_limit() -> Outcome {
    const TOL: f64 = 1e-3;
    let step = TanhStep::new(1.0, 0.8, 1e-4).map_err(|e| e.to_string())?;
    let worst = (1..=5)
        .map(|n| (tanh_particle_number(n, &step, 1.0) / 0.0125 - 1.0).abs())
        .fold(0.0, f64::max);
    check(worst <= TOL, format!("max relative deviation {worst:.2e} for n <= 5, tau = 1e-4 (tol {TOL:e})"))
}

fn ode_oracle() -> Outcome {
    const REL_TOL: f64 = 1e-6;
    const DRIFT_TOL: f64 = 1e-8;
    let tau = 0.5;
    let step = TanhStep::new(1.0, 0.8, tau).map_err(|e| e.to_string())?;
    let prof = VelocityProfile::Tanh(step);
    let opts = IntegrationOptions {
        dt: 5e-4,
        contour_shift: 0.45 * PI * tau,
        keep_every: 100,
    };
    let (mut worst, mut drift) = (0.0_f64, 0.0_f64);
    for n in 1..=8 {
        let traj = integrate_mode_with(n, &prof, 1.0, -20.0 * tau, 10.0 * tau, &opts).map_err(|e| e.to_string())?;
        let w = mode_frequency(n, 0.8, 1.0).map_err(|e| e.to_string())?;
        let got = extract_bogoliubov(&traj, w, 10.0 * tau).map_err(|e| e.to_string())?;
        let want = bogoliubov_tanh(n, &step, 1.0).map_err(|e| e.to_string())?;
        worst = worst
            .max((got.zeta_plus - want.zeta_plus).norm() / want.zeta_plus.norm())
            .max((got.zeta_minus - want.zeta_minus).norm() / want.zeta_minus.norm());
        drift = drift.max(traj.wronskian_drift);
    }
    check(
        worst <= REL_TOL && drift < DRIFT_TOL,
        format!("max relative error {worst:.2e} (tol {REL_TOL:e}), Wronskian drift {drift:.2e} (tol {DRIFT_TOL:e})"),
    )
}

fn correlator_oracle() -> Outcome {
    const TOL: f64 = 1e-3;
    const MARGIN: f64 = 0.025;
    let step = SuddenStep::new(1.0, 0.8).map_err(|e| e.to_string())?;
    let xs = [0.15, 0.35, 0.54, 0.72, 0.9];
    let regimes = [("t1,t2 < 0", -0.3, -0.45), ("t1,t2 > 0", 0.3, 0.45), ("mixed", -0.3, 0.45)];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (label, t1, t2) in regimes {
        let lines = singularity_lines(t1, t2, &step, 1.0);
        let mut regime_worst: f64 = 0.0;
        for &x1 in &xs {
            for &x2 in &xs {
                let gap = lines
                    .iter()
                    .map(|l| l.residual(x1, x2).abs())
                    .fold(f64::INFINITY, f64::min);
                if gap < MARGIN {
                    return Err(format!("sample ({x1}, {x2}) lies {gap:.3} from a line in regime {label}"));
                }
                let closed = kappa_sudden(&pt(t1, x1), &pt(t2, x2), &step, 1.0)
                    .finite()
                    .ok_or_else(|| format!("closed form singular at ({x1}, {x2})"))?;
                let sum = kappa_mode_sum(&pt(t1, x1), &pt(t2, x2), &step, 1.0, 10_000, 0.999)
                    .map_err(|e| e.to_string())?;
                regime_worst = regime_worst.max((sum - closed).abs());
            }
        }
        detail.push(format!("{label}: {regime_worst:.2e}"));
        worst = worst.max(regime_worst);
    }
    check(worst <= TOL, format!("max |sum - closed| {} (tol {TOL:e})", detail.join(", ")))
}

fn figure4_rectangle() -> Outcome {
    const TOL: f64 = 1e-12;
    let step = SuddenStep::new(1.0, 0.8).map_err(|e| e.to_string())?;
    let t = 0.2;
    let mut pair: Vec<(f64, f64)> = singularity_lines(t, t, &step, 1.0)
        .into_iter()
        .filter(|l| l.kind == LineKind::PairCreation)
        .filter(|l| {
            let reach = if l.s1.value() > 0.0 { (0.0, 2.0) } else { (-1.0, 1.0) };
            l.offset >= reach.0 - TOL && l.offset <= reach.1 + TOL
        })
        .map(|l| (l.s1.value(), l.offset))
        .collect();
    pair.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let want = [(-1.0, -0.32), (-1.0, 0.32), (1.0, 0.32), (1.0, 1.68)];
    let catalog_ok = pair.len() == want.len()
        && pair
            .iter()
            .zip(want)
            .all(|(g, w)| g.0 == w.0 && (g.1 - w.1).abs() <= TOL);

    // approach x1 + x2 = 0.32 perpendicularly, away from the diagonal light cone
    let mut signs_ok = true;
    let mut last = f64::INFINITY;
    for d in [1e-2, 1e-3, 1e-4, 1e-5] {
        let value = kappa_sudden(&pt(t, 0.21 - d / 2.0), &pt(t, 0.11 - d / 2.0), &step, 1.0)
            .finite()
            .unwrap_or(f64::NAN);
        signs_ok &= value < last;
        last = value;
    }
    let on_line = kappa_sudden(&pt(t, 0.21), &pt(t, 0.11), &step, 1.0);
    signs_ok &= on_line == KappaValue::Singular(Divergence::Negative);
    check(
        catalog_ok && signs_ok,
        format!("pair lines (s1, offset) {pair:?}; transversal ends at {last:.4} then {on_line:?}"),
    )
}

fn first_vs_second_order() -> Outcome {
    const TOL: f64 = 0.01;
    let coeff = |dv: f64| SuddenStep::new(1.0, 1.0 - dv).map(|s| pair_creation_coefficient(&s));
    let number = |dv: f64| SuddenStep::new(1.0, 1.0 - dv).map(|s| sudden_particle_number(&s));
    let c = coeff(5e-3).map_err(|e| e.to_string())? / coeff(1e-2).map_err(|e| e.to_string())?;
    let nb = number(5e-3).map_err(|e| e.to_string())? / number(1e-2).map_err(|e| e.to_string())?;
    check(
        (c / 0.5 - 1.0).abs() <= TOL && (nb / 0.25 - 1.0).abs() <= TOL,
        format!("coefficient ratio {c:.4}, particle-number ratio {nb:.4} for dv 1e-2 -> 5e-3 (tol 1%)"),
    )
}

fn smoothing() -> Outcome {
    const CASES: usize = 10_000;
    let mut rng = StdRng::seed_from_u64(0xb14);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..CASES {
        let v0 = rng.gen_range(0.2..2.0);
        let v1 = rng.gen_range(0.2..2.0);
        let step = TanhStep::new(v0, v1, rng.gen_range(0.01..2.0)).map_err(|e| e.to_string())?;
        let t1 = rng.gen_range(0.0..5.0);
        let t2 = rng.gen_range(0.0..5.0);
        let value = kappa_b_approx(&pt(t1, rng.gen_range(0.0..1.0)), &pt(t2, rng.gen_range(0.0..1.0)), &step, 1.0);
        if !value.is_finite() {
            return Err(format!("non-finite kappa_B at v0 {v0}, v1 {v1}"));
        }
        worst_ratio = worst_ratio.max(value.abs() * v1);
    }

    // x1 + x2 = v1 (t1 + t2) is a pair-creation line of the sudden step
    let (a, b) = (pt(1.0, 0.95), pt(1.0, 0.65));
    let sudden = kappa_sudden(&a, &b, &SuddenStep::new(1.0, 0.8).map_err(|e| e.to_string())?, 1.0);
    let step = TanhStep::new(1.0, 0.8, 0.2).map_err(|e| e.to_string())?;
    let exact = kappa_smooth(&a, &b, &step, 1.0, EvalMode::Exact, 10_000, 0.999).map_err(|e| e.to_string())?;
    check(
        worst_ratio <= 1.0 && sudden.is_singular() && exact.total.is_finite(),
        format!(
            "max |kappa_B| v1 = {worst_ratio:.3} over {CASES} draws (bound 1); on the line sudden {sudden:?}, smooth {:.4}",
            exact.total
        ),
    )
}

fn uv_suppression() -> Outcome {
    const TOL: f64 = 0.02;
    let (v0, v1, tau) = (1.0, 0.8, 0.5);
    let step = TanhStep::new(v0, v1, tau).map_err(|e| e.to_string())?;
    let ns: Vec<f64> = (20..=40).map(f64::from).collect();
    let ys: Vec<f64> = (20..=40).map(|n| ln_tanh_particle_number(n, &step, 1.0)).collect();
    let slope = fit_slope(&ns, &ys);
    let want = -2.0 * PI * PI * v1 * tau;
    check(
        (slope / want - 1.0).abs() <= TOL,
        format!("slope {slope:.5} vs {want:.5} (tol 2%)"),
    )
}

fn ladder_continuum() -> Outcome {
    const TOL: f64 = 0.1;
    let prof = VelocityProfile::sudden(1.0, 1.0).map_err(|e| e.to_string())?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for cells in [32usize, 64, 128] {
        let init = LadderState::standing_wave(cells, 1, 1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
        let dt = 0.25 / (cells + 1) as f64;
        let run = simulate_ladder(&prof, 1.0, &init, (0.0, 20.0), dt).map_err(|e| e.to_string())?;
        let signal: Vec<f64> = run.states.iter().map(|s| s.mode_amplitude(1, 1.0)).collect();
        let w = zero_crossing_frequency(&run.times, &signal).map_err(|e| e.to_string())?;
        xs.push((1.0 / (cells + 1) as f64).ln());
        ys.push((w - PI).abs().ln());
    }
    let slope = fit_slope(&xs, &ys);
    check((slope - 2.0).abs() <= TOL, format!("fit exponent {slope:.4} over N = 32, 64, 128 (tol {TOL})"))
}

fn laboratory_threshold() -> Outcome {
    const TOL: f64 = 0.05;
    const C0: f64 = 299_792_458.0;
    let got = approximation_threshold(0.5 * C0, 0.45 * C0, 4e-3);
    check(
        (got / 1.7e-10 - 1.0).abs() <= TOL,
        format!("threshold {got:.3e} s vs 1.7e-10 s (tol 5%)"),
    )
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let criteria = [
        Criterion { name: "1 sudden particle number", budget: s(1), run: sudden_particle_number_constant },
        Criterion { name: "2 Bogoliubov unitarity", budget: s(5), run: bogoliubov_unitarity },
        Criterion { name: "3 tanh to sudden limit", budget: s(1), run: tanh_to_sudden_limit },
        Criterion { name: "4 ODE oracle", budget: s(30), run: ode_oracle },
        Criterion { name: "5 correlator oracle", budget: s(60), run: correlator_oracle },
        Criterion { name: "6 figure-4 rectangle", budget: s(1), run: figure4_rectangle },
        Criterion { name: "7 first vs second order", budget: s(1), run: first_vs_second_order },
        Criterion { name: "8 smoothing", budget: s(30), run: smoothing },
        Criterion { name: "9 UV suppression", budget: s(1), run: uv_suppression },
        Criterion { name: "10 ladder continuum limit", budget: s(60), run: ladder_continuum },
        Criterion { name: "note laboratory threshold", budget: s(1), run: laboratory_threshold },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (elapsed <= c.budget, d),
            Err(d) => (false, d),
        };
        let tag = if ok { "PASS" } else { "FAIL" };
        println!(
            "{tag} [{}] {detail}; {:.3} s (budget {} s)",
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
        failed += usize::from(!ok);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
