//! Brute-force references: classic RK4 integration of the parametric mode
//! equation `f'' = -omega_n(t)^2 f`, projection onto the out-basis, and time
//! stepping of the discrete LC ladder.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::waveguide::{omega, speed_at, BogoliubovPair, TanhStep, VelocityProfile};

/// Largest tolerated relative Wronskian drift before a run is rejected.
pub const MAX_WRONSKIAN_DRIFT: f64 = 1e-6;
/// Largest tolerated unitarity defect of a projected pair.
pub const MAX_UNITARITY_DEFECT: f64 = 1e-4;
/// Integration must start at least this many widths before a tanh step.
pub const START_WIDTHS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub n: u32,
    /// Integration runs along `t = s - i * contour_shift`; `times` holds `s`.
    pub contour_shift: f64,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
    /// Largest `|W(t) - W(t_start)| / |W(t_start)|` seen during integration.
    pub wronskian_drift: f64,
}

impl ModeTrajectory {
    /// `f conj(f') - conj(f) f'` at sample `k`; `i` for the normalized
    /// in-mode on the real axis.
    pub fn wronskian(&self, k: usize) -> Complex64 {
        let (f, df) = (self.values[k], self.derivatives[k]);
        f * df.conj() - f.conj() * df
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn covers(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * (1.0 + t.abs());
        if t < self.start() - slack || t > self.end() + slack {
            return Err(Error::NotCovered {
                t,
                start: self.start(),
                end: self.end(),
            });
        }
        Ok(())
    }

    fn nearest(&self, t: f64) -> usize {
        match self.times.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) if k == self.times.len() => k - 1,
            Err(k) => {
                if t - self.times[k - 1] <= self.times[k] - t {
                    k - 1
                } else {
                    k
                }
            }
        }
    }

    /// `f(t)` by cubic Hermite interpolation; exact at sample times.
    pub fn value_at(&self, t: f64) -> Result<Complex64> {
        self.covers(t)?;
        let k = self.nearest(t);
        if (self.times[k] - t).abs() <= 1e-12 * (1.0 + t.abs()) {
            return Ok(self.values[k]);
        }
        let (a, b) = if self.times[k] <= t { (k, k + 1) } else { (k - 1, k) };
        let h = self.times[b] - self.times[a];
        let s = (t - self.times[a]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok(self.values[a] * h00
            + self.derivatives[a] * (h10 * h)
            + self.values[b] * h01
            + self.derivatives[b] * (h11 * h))
    }

    /// Columns `t, re_f, im_f, re_df, im_df`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,re_f,im_f,re_df,im_df")?;
        for k in 0..self.times.len() {
            let (f, df) = (self.values[k], self.derivatives[k]);
            writeln!(
                out,
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                self.times[k], f.re, f.im, df.re, df.im
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub dt: f64,
    /// Imaginary shift `c` of the path `t = s - i c`. Must stay below
    /// `pi tau / 2`, where the tanh profile has its first pole.
    pub contour_shift: f64,
    /// Keep every `keep_every`-th sample (the last step is always kept).
    pub keep_every: usize,
}

impl IntegrationOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            contour_shift: 0.0,
            keep_every: 1,
        }
    }
}

/// Classic RK4 along the real time axis, keeping every step.
pub fn integrate_mode(
    n: u32,
    profile: &VelocityProfile,
    length: f64,
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<ModeTrajectory> {
    integrate_mode_with(n, profile, length, t_start, t_end, &IntegrationOptions::new(dt))
}

pub fn integrate_mode_with(
    n: u32,
    profile: &VelocityProfile,
    length: f64,
    t_start: f64,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<ModeTrajectory> {
    if n == 0 {
        return Err(invalid("n", "the zero mode is excluded"));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(invalid("length", format!("must be > 0, got {length}")));
    }
    if !(t_end > t_start) {
        return Err(invalid("t_end", format!("{t_end} must exceed t_start = {t_start}")));
    }
    if opts.keep_every == 0 {
        return Err(invalid("keep_every", "must be >= 1"));
    }
    let w_max = omega(n, profile.v0().max(profile.v1()), length);
    if !(opts.dt > 0.0 && opts.dt <= TAU / (20.0 * w_max)) {
        return Err(invalid(
            "dt",
            format!("{} does not resolve the fastest period (need <= {:e})", opts.dt, TAU / (20.0 * w_max)),
        ));
    }
    match profile {
        VelocityProfile::Sudden(s) => {
            if t_start >= 0.0 {
                return Err(invalid("t_start", "must be negative for a sudden step"));
            }
            if opts.contour_shift != 0.0 {
                return Err(invalid("contour_shift", "only available for tanh profiles"));
            }
            sudden_trajectory(n, s.v0(), s.v1(), length, t_start, t_end, opts)
        }
        VelocityProfile::Tanh(s) => {
            if t_start > -START_WIDTHS * s.tau() {
                return Err(invalid(
                    "t_start",
                    format!("must be <= -{START_WIDTHS} tau = {}", -START_WIDTHS * s.tau()),
                ));
            }
            if !(opts.contour_shift >= 0.0 && opts.contour_shift < 0.5 * PI * s.tau()) {
                return Err(invalid("contour_shift", "must lie in [0, pi tau / 2)"));
            }
            rk4_trajectory(n, s, length, t_start, t_end, opts)
        }
    }
}

fn time_steps(t_start: f64, t_end: f64, dt: f64) -> (usize, f64) {
    let steps = ((t_end - t_start) / dt).ceil().max(1.0) as usize;
    (steps, (t_end - t_start) / steps as f64)
}

/// Exact piecewise solution: the in-mode before `t = 0`, matched for
/// continuity of `f` and `f'` onto the `v1` oscillation after.
fn sudden_trajectory(
    n: u32,
    v0: f64,
    v1: f64,
    length: f64,
    t_start: f64,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<ModeTrajectory> {
    let w0 = omega(n, v0, length);
    let w1 = omega(n, v1, length);
    let i = Complex64::i();
    // continuity of f and f' at t = 0
    let f0 = Complex64::new(1.0 / (2.0 * w0).sqrt(), 0.0);
    let df0 = -i * w0 * f0;
    let zp = (w1 * f0 + i * df0) / (2.0 * w1).sqrt();
    let zm = (w1 * f0 - i * df0) / (2.0 * w1).sqrt();
    let eval = |t: f64| -> (Complex64, Complex64) {
        if t < 0.0 {
            let f = Complex64::from_polar(1.0, -w0 * t) / (2.0 * w0).sqrt();
            (f, -i * w0 * f)
        } else {
            let (em, ep) = (Complex64::from_polar(1.0, -w1 * t), Complex64::from_polar(1.0, w1 * t));
            let norm = (2.0 * w1).sqrt();
            ((zp * em + zm * ep) / norm, -i * w1 * (zp * em - zm * ep) / norm)
        }
    };
    let (steps, h) = time_steps(t_start, t_end, opts.dt);
    let mut traj = empty_trajectory(n, 0.0, steps / opts.keep_every + 2);
    for k in 0..=steps {
        if k % opts.keep_every == 0 || k == steps {
            let t = if k == steps { t_end } else { t_start + k as f64 * h };
            let (f, df) = eval(t);
            traj.times.push(t);
            traj.values.push(f);
            traj.derivatives.push(df);
        }
    }
    Ok(traj)
}

fn empty_trajectory(n: u32, shift: f64, capacity: usize) -> ModeTrajectory {
    ModeTrajectory {
        n,
        contour_shift: shift,
        times: Vec::with_capacity(capacity),
        values: Vec::with_capacity(capacity),
        derivatives: Vec::with_capacity(capacity),
        wronskian_drift: 0.0,
    }
}

/// `(f, f')` pair.
type State = [Complex64; 2];

fn rk4_step(state: &State, t: Complex64, h: f64, w2: &impl Fn(Complex64) -> Complex64) -> State {
    let deriv = |s: &State, t: Complex64| -> State { [s[1], -w2(t) * s[0]] };
    let add = |s: &State, d: &State, c: f64| -> State { [s[0] + d[0] * c, s[1] + d[1] * c] };
    let k1 = deriv(state, t);
    let k2 = deriv(&add(state, &k1, 0.5 * h), t + 0.5 * h);
    let k3 = deriv(&add(state, &k2, 0.5 * h), t + 0.5 * h);
    let k4 = deriv(&add(state, &k3, h), t + h);
    [
        state[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (h / 6.0),
        state[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (h / 6.0),
    ]
}

fn rk4_trajectory(
    n: u32,
    profile: &TanhStep,
    length: f64,
    t_start: f64,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<ModeTrajectory> {
    let k = PI * n as f64 / length;
    let w0 = omega(n, profile.v0(), length);
    let w2 = |t: Complex64| profile.speed_squared_complex(t) * (k * k);
    let shift = Complex64::new(0.0, -opts.contour_shift);
    let i = Complex64::i();
    let norm = (2.0 * w0).sqrt();

    // f starts as the in-mode; g as its real-axis conjugate partner. Their
    // Wronskian f g' - f' g = i is conserved along any path.
    let t0 = t_start + shift;
    let mut f: State = {
        let e = (-i * w0 * t0).exp() / norm;
        [e, -i * w0 * e]
    };
    let mut g: State = {
        let e = (i * w0 * t0).exp() / norm;
        [e, i * w0 * e]
    };
    let wronskian = |f: &State, g: &State| f[0] * g[1] - f[1] * g[0];
    let w_init = wronskian(&f, &g);

    let (steps, h) = time_steps(t_start, t_end, opts.dt);
    let mut traj = empty_trajectory(n, opts.contour_shift, steps / opts.keep_every + 2);
    traj.times.push(t_start);
    traj.values.push(f[0]);
    traj.derivatives.push(f[1]);
    let mut drift: f64 = 0.0;
    for step in 0..steps {
        let t = t_start + step as f64 * h + shift;
        f = rk4_step(&f, t, h, &w2);
        g = rk4_step(&g, t, h, &w2);
        let s = if step + 1 == steps { t_end } else { t_start + (step + 1) as f64 * h };
        drift = drift.max((wronskian(&f, &g) - w_init).norm() / w_init.norm());
        if (step + 1) % opts.keep_every == 0 || step + 1 == steps {
            traj.times.push(s);
            traj.values.push(f[0]);
            traj.derivatives.push(f[1]);
        }
    }
    if !(drift <= MAX_WRONSKIAN_DRIFT) {
        return Err(Error::StepRejected(format!(
            "Wronskian drift {drift:e} exceeds {MAX_WRONSKIAN_DRIFT:e} at dt = {h}"
        )));
    }
    traj.wronskian_drift = drift;
    Ok(traj)
}

/// Projects the sample nearest to `t_probe` onto `e^{-i w t}` and
/// `e^{+i w t}`: `f = (zeta+ e^{-i w t} + conj(zeta-) e^{i w t}) / sqrt(2 w)`.
pub fn extract_bogoliubov(traj: &ModeTrajectory, omega_out: f64, t_probe: f64) -> Result<BogoliubovPair> {
    if !(omega_out > 0.0 && omega_out.is_finite()) {
        return Err(invalid("omega_out", format!("must be > 0, got {omega_out}")));
    }
    traj.covers(t_probe)?;
    let k = traj.nearest(t_probe);
    let t = Complex64::new(traj.times[k], -traj.contour_shift);
    let (f, df) = (traj.values[k], traj.derivatives[k]);
    let i = Complex64::i();
    let norm = (2.0 * omega_out).sqrt();
    let zeta_plus = (i * omega_out * t).exp() * (omega_out * f + i * df) / norm;
    let conj_minus = (-i * omega_out * t).exp() * (omega_out * f - i * df) / norm;
    let pair = BogoliubovPair {
        zeta_plus,
        zeta_minus: conj_minus.conj(),
    };
    let defect = pair.unitarity_defect();
    if !(defect.abs() <= MAX_UNITARITY_DEFECT) {
        return Err(Error::IllConditioned(defect));
    }
    Ok(pair)
}

/// `max(t_end - one out-period, 8 tau)`, the sample used for projection.
pub fn default_probe_time(traj: &ModeTrajectory, omega_out: f64, tau: f64) -> f64 {
    (traj.end() - TAU / omega_out).max(START_WIDTHS * tau).min(traj.end())
}

/// Rotates the pair by the unobservable global phase that makes `zeta+`
/// real and positive.
pub fn phase_normalized(pair: &BogoliubovPair) -> BogoliubovPair {
    let phase = pair.zeta_plus.arg();
    BogoliubovPair {
        zeta_plus: pair.zeta_plus * Complex64::from_polar(1.0, -phase),
        zeta_minus: pair.zeta_minus * Complex64::from_polar(1.0, phase),
    }
}

/// Abel-regularized `sum_n p^n Psi_n(x1) Psi_n(x2) Re[f_n(t1) conj f_n(t2)]`
/// over real-axis trajectories.
pub fn kappa_from_trajectories(
    p1: &crate::sudden::SpacetimePoint,
    p2: &crate::sudden::SpacetimePoint,
    trajectories: &[ModeTrajectory],
    length: f64,
    p: f64,
) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid("p", format!("regulator {p} not in (0, 1]")));
    }
    let mut sum = 0.0;
    for traj in trajectories {
        if traj.contour_shift != 0.0 {
            return Err(invalid("trajectories", "need real-axis trajectories"));
        }
        let k = PI * traj.n as f64 / length;
        let shapes = 2.0 / length * (k * p1.x).cos() * (k * p2.x).cos();
        let (f1, f2) = (traj.value_at(p1.t)?, traj.value_at(p2.t)?);
        sum += p.powi(traj.n as i32) * shapes * (f1 * f2.conj()).re;
    }
    Ok(sum)
}

/// State of the ladder with `N + 1` charge nodes and `N` inner branches.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderState {
    pub charges: Vec<f64>,
    pub currents: Vec<f64>,
    pub inductance: f64,
    pub capacitance: f64,
    pub cell_length: f64,
}

impl LadderState {
    /// Charges in the `n`-th standing wave `cos(pi n (j - 1/2) dx / D)`,
    /// currents zero. With `dx = D / (N + 1)` these are exact normal modes.
    pub fn standing_wave(cells: usize, n: u32, amplitude: f64, capacitance: f64, length: f64) -> Result<Self> {
        if cells < 8 {
            return Err(invalid("cells", format!("need N >= 8, got {cells}")));
        }
        let dx = length / (cells + 1) as f64;
        let charges = (1..=cells + 1)
            .map(|j| amplitude * (PI * n as f64 * (j as f64 - 0.5) * dx / length).cos())
            .collect();
        Ok(Self {
            charges,
            currents: vec![0.0; cells],
            inductance: f64::NAN,
            capacitance,
            cell_length: dx,
        })
    }

    pub fn total_charge(&self) -> f64 {
        self.charges.iter().sum()
    }

    pub fn energy(&self) -> f64 {
        let e_c: f64 = self.charges.iter().map(|q| q * q).sum::<f64>() / (2.0 * self.capacitance);
        let e_l: f64 = self.currents.iter().map(|i| i * i).sum::<f64>() * self.inductance / 2.0;
        e_c + e_l
    }

    /// Overlap of the charges with the `n`-th standing wave.
    pub fn mode_amplitude(&self, n: u32, length: f64) -> f64 {
        self.charges
            .iter()
            .enumerate()
            .map(|(j, q)| q * (PI * n as f64 * (j as f64 + 0.5) * self.cell_length / length).cos())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct LadderRun {
    pub times: Vec<f64>,
    pub states: Vec<LadderState>,
}

fn inductance(profile: &VelocityProfile, t: f64, dx: f64, capacitance: f64) -> f64 {
    let v = speed_at(profile, t);
    dx * dx / (v * v * capacitance)
}

/// Steps Kirchhoff's equations with isolated ends using RK4 on the charges
/// and the fluxes `G_j = L(t) I_j`:
/// `dQ_j/dt = I_j - I_{j-1}`, `dG_j/dt = (Q_{j+1} - Q_j) / C`.
pub fn simulate_ladder(
    profile: &VelocityProfile,
    length: f64,
    initial: &LadderState,
    t_span: (f64, f64),
    dt: f64,
) -> Result<LadderRun> {
    let cells = initial.currents.len();
    if cells < 8 || initial.charges.len() != cells + 1 {
        return Err(invalid("initial", "need N >= 8 branches and N + 1 charges"));
    }
    let c = initial.capacitance;
    if !(c > 0.0) {
        return Err(invalid("capacitance", "must be > 0"));
    }
    let dx = length / (cells + 1) as f64;
    if (dx - initial.cell_length).abs() > 1e-12 * dx {
        return Err(invalid("initial", "cell length must equal D / (N + 1)"));
    }
    let (t0, t1) = t_span;
    if !(t1 > t0) || !(dt > 0.0) {
        return Err(invalid("t_span", "need t_end > t_start and dt > 0"));
    }

    let l0 = inductance(profile, t0, dx, c);
    let mut q = initial.charges.clone();
    let mut g: Vec<f64> = initial.currents.iter().map(|i| i * l0).collect();

    let rhs = |q: &[f64], g: &[f64], t: f64, dq: &mut [f64], dg: &mut [f64]| {
        let l = inductance(profile, t, dx, c);
        for j in 0..=cells {
            let right = if j < cells { g[j] / l } else { 0.0 };
            let left = if j > 0 { g[j - 1] / l } else { 0.0 };
            dq[j] = right - left;
        }
        for j in 0..cells {
            dg[j] = (q[j + 1] - q[j]) / c;
        }
    };

    let snapshot = |q: &[f64], g: &[f64], t: f64| {
        let l = inductance(profile, t, dx, c);
        LadderState {
            charges: q.to_vec(),
            currents: g.iter().map(|x| x / l).collect(),
            inductance: l,
            capacitance: c,
            cell_length: dx,
        }
    };

    let (steps, h) = time_steps(t0, t1, dt);
    let first = snapshot(&q, &g, t0);
    let e0 = first.energy();
    let mut run = LadderRun {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
    };
    run.times.push(t0);
    run.states.push(first);

    let nq = cells + 1;
    let mut k = [[vec![0.0; nq], vec![0.0; cells]], [vec![0.0; nq], vec![0.0; cells]],
                     [vec![0.0; nq], vec![0.0; cells]], [vec![0.0; nq], vec![0.0; cells]]];
    let mut tq = vec![0.0; nq];
    let mut tg = vec![0.0; cells];
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        for stage in 0..4 {
            let (frac, prev) = match stage {
                0 => (0.0, None),
                1 => (0.5, Some(0)),
                2 => (0.5, Some(1)),
                _ => (1.0, Some(2)),
            };
            match prev {
                None => {
                    tq.copy_from_slice(&q);
                    tg.copy_from_slice(&g);
                }
                Some(p) => {
                    for j in 0..nq {
                        tq[j] = q[j] + frac * h * k[p][0][j];
                    }
                    for j in 0..cells {
                        tg[j] = g[j] + frac * h * k[p][1][j];
                    }
                }
            }
            let [dq, dg] = &mut k[stage];
            rhs(&tq, &tg, t + frac * h, dq, dg);
        }
        for j in 0..nq {
            q[j] += h / 6.0 * (k[0][0][j] + 2.0 * k[1][0][j] + 2.0 * k[2][0][j] + k[3][0][j]);
        }
        for j in 0..cells {
            g[j] += h / 6.0 * (k[0][1][j] + 2.0 * k[1][1][j] + 2.0 * k[2][1][j] + k[3][1][j]);
        }
        let t_next = if step + 1 == steps { t1 } else { t0 + (step + 1) as f64 * h };
        let state = snapshot(&q, &g, t_next);
        let ratio = state.energy() / e0;
        if !ratio.is_finite() || ratio > 1e6 {
            return Err(Error::Unstable { t: t_next, ratio });
        }
        run.times.push(t_next);
        run.states.push(state);
    }
    Ok(run)
}

/// `(2 / sqrt(LC)) sin(pi n dx / (2D))` for a ladder with `N` branches.
pub fn ladder_dispersion(n: u32, cells: usize, v: f64, length: f64) -> f64 {
    let dx = length / (cells + 1) as f64;
    2.0 * v / dx * (PI * n as f64 * dx / (2.0 * length)).sin()
}

/// Angular frequency of a uniformly sampled signal from the peak of its
/// Hann-windowed, zero-padded spectrum, refined by a Gaussian fit through
/// the three largest bins.
pub fn fft_frequency(samples: &[f64], dt: f64) -> Result<f64> {
    if samples.len() < 8 {
        return Err(invalid("samples", "need at least 8 samples"));
    }
    let n = samples.len();
    let padded = (4 * n).next_power_of_two();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let w = 0.5 - 0.5 * (TAU * k as f64 / (n - 1) as f64).cos();
            Complex64::new((x - mean) * w, 0.0)
        })
        .collect();
    buf.resize(padded, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mags: Vec<f64> = buf[..padded / 2].iter().map(|z| z.norm()).collect();
    let peak = (1..mags.len() - 1)
        .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
        .ok_or_else(|| invalid("samples", "no spectral peak"))?;
    let (a, b, c) = (mags[peak - 1].ln(), mags[peak].ln(), mags[peak + 1].ln());
    let offset = 0.5 * (a - c) / (a - 2.0 * b + c);
    Ok(TAU * (peak as f64 + offset) / (padded as f64 * dt))
}

/// Angular frequency from linearly interpolated zero crossings of a
/// zero-mean oscillation.
pub fn zero_crossing_frequency(times: &[f64], samples: &[f64]) -> Result<f64> {
    let mut crossings = Vec::new();
    for k in 1..samples.len().min(times.len()) {
        let (a, b) = (samples[k - 1], samples[k]);
        if a == 0.0 {
            crossings.push(times[k - 1]);
        } else if a * b < 0.0 {
            crossings.push(times[k - 1] + (times[k] - times[k - 1]) * a / (a - b));
        }
    }
    if crossings.len() < 3 {
        return Err(invalid("samples", "fewer than three zero crossings"));
    }
    let half_periods = (crossings.len() - 1) as f64;
    Ok(PI * half_periods / (crossings.last().unwrap() - crossings[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveguide::{bogoliubov_sudden, bogoliubov_tanh, particle_number, sudden_particle_number, SuddenStep};
    use approx::assert_relative_eq;

    fn tanh(v0: f64, v1: f64, tau: f64) -> VelocityProfile {
        VelocityProfile::tanh(v0, v1, tau).unwrap()
    }

    #[test]
    fn stationary_mode_keeps_modulus() {
        let prof = tanh(0.9, 0.9, 0.5);
        let traj = integrate_mode(3, &prof, 1.0, -4.0, 6.0, 2e-3).unwrap();
        let m0 = traj.values[0].norm();
        for f in &traj.values {
            assert!((f.norm() - m0).abs() < 1e-8 * m0);
        }
        assert!(traj.wronskian_drift < 1e-8);
        let w = omega(3, 0.9, 1.0);
        let pair = extract_bogoliubov(&traj, w, 5.0).unwrap();
        assert!((pair.zeta_plus.norm() - 1.0).abs() < 1e-9);
        assert!(particle_number(&pair) < 1e-10);
    }

    #[test]
    fn real_axis_wronskian_is_i() {
        let traj = integrate_mode(2, &tanh(1.0, 0.8, 0.5), 1.0, -4.0, 4.0, 2e-3).unwrap();
        for k in [0, traj.times.len() / 2, traj.times.len() - 1] {
            assert!((traj.wronskian(k) - Complex64::i()).norm() < 1e-8);
        }
    }

    #[test]
    fn sudden_matching_is_exact() {
        let prof = VelocityProfile::sudden(1.0, 0.8).unwrap();
        let traj = integrate_mode(5, &prof, 1.0, -1.0, 2.0, 1e-3).unwrap();
        let pair = extract_bogoliubov(&traj, omega(5, 0.8, 1.0), 1.7).unwrap();
        let want = bogoliubov_sudden(1.0, 0.8).unwrap();
        assert!((pair.zeta_plus - want.zeta_plus).norm() < 1e-12);
        assert!((pair.zeta_minus - want.zeta_minus).norm() < 1e-12);
        let step = SuddenStep::new(1.0, 0.8).unwrap();
        assert!((particle_number(&pair) - sudden_particle_number(&step)).abs() < 1e-10);
    }

    #[test]
    fn tanh_coefficients_match_closed_form() {
        let step = TanhStep::new(1.0, 0.8, 0.5).unwrap();
        let prof = VelocityProfile::Tanh(step);
        let n = 4;
        let opts = IntegrationOptions {
            dt: 5e-4,
            contour_shift: 0.45 * PI * 0.5,
            keep_every: 100,
        };
        let traj = integrate_mode_with(n, &prof, 1.0, -10.0, 5.0, &opts).unwrap();
        let got = extract_bogoliubov(&traj, omega(n, 0.8, 1.0), 5.0).unwrap();
        let want = bogoliubov_tanh(n, &step, 1.0).unwrap();
        assert!((got.zeta_plus - want.zeta_plus).norm() < 1e-6 * want.zeta_plus.norm());
        assert!((got.zeta_minus - want.zeta_minus).norm() < 1e-6 * want.zeta_minus.norm());
        assert!(traj.wronskian_drift < 1e-8);
    }

    #[test]
    fn projection_independent_of_probe_time() {
        let prof = tanh(1.0, 0.8, 0.5);
        let traj = integrate_mode(2, &prof, 1.0, -10.0, 8.0, 1e-3).unwrap();
        let w = omega(2, 0.8, 1.0);
        let a = extract_bogoliubov(&traj, w, 4.0).unwrap();
        let b = extract_bogoliubov(&traj, w, 7.3).unwrap();
        assert!((a.zeta_plus.norm() - b.zeta_plus.norm()).abs() < 1e-8);
        assert!((a.zeta_minus.norm() - b.zeta_minus.norm()).abs() < 1e-8);
        let probe = default_probe_time(&traj, w, 0.5);
        assert!((4.0..=8.0).contains(&probe));
        let normed = phase_normalized(&a);
        assert!(normed.zeta_plus.im.abs() < 1e-15 && normed.zeta_plus.re > 0.0);
        assert_relative_eq!(normed.zeta_minus.norm(), a.zeta_minus.norm(), max_relative = 1e-14);
    }

    #[test]
    fn fourth_order_convergence() {
        let step = TanhStep::new(1.0, 0.8, 0.5).unwrap();
        let prof = VelocityProfile::Tanh(step);
        let exact = bogoliubov_tanh(2, &step, 1.0).unwrap();
        let w = omega(2, 0.8, 1.0);
        let err = |dt: f64| {
            let traj = integrate_mode(2, &prof, 1.0, -10.0, 5.0, dt).unwrap();
            let pair = extract_bogoliubov(&traj, w, 5.0).unwrap();
            (pair.zeta_plus - exact.zeta_plus).norm()
        };
        let ratio = err(0.005) / err(0.0025);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn preconditions_enforced() {
        let prof = tanh(1.0, 0.8, 0.5);
        assert!(integrate_mode(1, &prof, 1.0, -1.0, 2.0, 1e-3).is_err());
        assert!(integrate_mode(1, &prof, 1.0, -5.0, 2.0, 0.5).is_err());
        assert!(integrate_mode(0, &prof, 1.0, -5.0, 2.0, 1e-3).is_err());
        let sudden = VelocityProfile::sudden(1.0, 0.8).unwrap();
        assert!(integrate_mode(1, &sudden, 1.0, 0.0, 2.0, 1e-3).is_err());
        let traj = integrate_mode(1, &sudden, 1.0, -1.0, 1.0, 1e-2).unwrap();
        assert!(matches!(traj.value_at(1.5), Err(Error::NotCovered { .. })));
        // the projected defect equals the Wronskian error, so corrupt the norm
        let mut bad = traj.clone();
        bad.values.iter_mut().for_each(|f| *f *= 1.01);
        bad.derivatives.iter_mut().for_each(|f| *f *= 1.01);
        assert!(matches!(
            extract_bogoliubov(&bad, omega(1, 0.8, 1.0), 0.5),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn wronskian_drift_rejects_coarse_steps() {
        let prof = tanh(1.0, 0.8, 0.5);
        let w = omega(6, 1.0, 1.0);
        let dt = TAU / (20.0 * w);
        assert!(matches!(
            integrate_mode(6, &prof, 1.0, -4.0, 40.0, dt),
            Err(Error::StepRejected(_))
        ));
    }

    #[test]
    fn hermite_interpolation_accuracy() {
        let prof = VelocityProfile::sudden(1.0, 1.0).unwrap();
        let traj = integrate_mode(1, &prof, 1.0, -2.0, -1.0, 1e-2).unwrap();
        let t = -1.53721;
        let w = PI;
        let want = Complex64::from_polar(1.0, -w * t) / (2.0 * w).sqrt();
        assert!((traj.value_at(t).unwrap() - want).norm() < 1e-9);
    }

    #[test]
    fn trajectory_csv_layout() {
        let prof = VelocityProfile::sudden(1.0, 0.8).unwrap();
        let traj = integrate_mode(1, &prof, 1.0, -0.1, 0.1, 0.05).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,re_f,im_f,re_df,im_df");
        assert_eq!(lines.len(), traj.times.len() + 1);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn ladder_conserves_charge_and_matches_dispersion() {
        let cells = 32;
        let v = 1.0;
        let prof = VelocityProfile::sudden(v, v).unwrap();
        let init = LadderState::standing_wave(cells, 1, 1.0, 1.0, 1.0).unwrap();
        let run = simulate_ladder(&prof, 1.0, &init, (0.0, 40.0), 5e-3).unwrap();
        let q0 = run.states[0].total_charge();
        let drift = run
            .states
            .iter()
            .map(|s| (s.total_charge() - q0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-10, "{drift}");
        let signal: Vec<f64> = run.states.iter().map(|s| s.mode_amplitude(1, 1.0)).collect();
        let got = fft_frequency(&signal, 5e-3).unwrap();
        let want = ladder_dispersion(1, cells, v, 1.0);
        assert!((got / want - 1.0).abs() < 1e-3, "{got} vs {want}");
        let zc = zero_crossing_frequency(&run.times, &signal).unwrap();
        assert!((zc / want - 1.0).abs() < 1e-6, "{zc} vs {want}");
    }

    #[test]
    fn ladder_detects_blowup() {
        let prof = VelocityProfile::sudden(1.0, 1.0).unwrap();
        let mut init = LadderState::standing_wave(16, 1, 1.0, 1.0, 1.0).unwrap();
        // seed the stiffest mode
        for (j, q) in init.charges.iter_mut().enumerate() {
            *q += if j % 2 == 0 { 1e-3 } else { -1e-3 };
        }
        let r = simulate_ladder(&prof, 1.0, &init, (0.0, 20.0), 0.1);
        assert!(matches!(r, Err(Error::Unstable { .. })));
    }
}
