//! Ermakov amplitudes of the two normal modes.
//!
//! Each normal mode is a parametric oscillator H = G(t)P²/2 + F S²/2 whose
//! exact Fock states are parameterized by the positive solution α(t) of
//!
//! ```text
//! α̈ − (Ġ/G) α̇ + G F α = G² / α³,      φ̇ = G / α².
//! ```
//!
//! The state (α, α̇, φ) is integrated jointly so the phase shares step
//! control with the amplitude.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::molecule::{MoleculeSpec, NormalMode};
use crate::ode::{DormandPrince, OdeError, StepControl, StepStats};
use crate::scalar::Real;
use crate::schedule::{AngleSchedule, KineticSource};

/// Amplitude α (fs/amu)^{1/2}, its rate, and the accumulated phase (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErmakovState<T> {
    pub alpha: T,
    pub alpha_dot: T,
    pub phi: T,
}

impl<T: Real> ErmakovState<T> {
    fn to_array(self) -> [T; 3] {
        [self.alpha, self.alpha_dot, self.phi]
    }

    fn from_array(y: [T; 3]) -> Self {
        Self {
            alpha: y[0],
            alpha_dot: y[1],
            phi: y[2],
        }
    }

    /// u = α e^{iφ}, a complex solution of ü − (Ġ/G)u̇ + GFu = 0.
    pub fn companion(&self) -> Complex<T> {
        Complex::from_polar(self.alpha, self.phi)
    }

    /// u̇ = (α̇ + iG/α) e^{iφ}.
    pub fn companion_rate(&self, g: T) -> Complex<T> {
        Complex::new(self.alpha_dot, g / self.alpha) * Complex::from_polar(T::one(), self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Largest integrator step (fs).
    pub max_step: T,
    /// Spacing of stored samples (fs).
    pub output_stride: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            max_step: T::lit(0.5),
            output_stride: T::lit(0.1),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let cap = T::lit(1e-2);
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > T::zero() && v <= cap) {
                return Err(Error::InvalidSolver(format!(
                    "{name} = {v} outside (0, 1e-2]"
                )));
            }
        }
        if !(self.max_step > T::zero()) {
            return Err(Error::InvalidSolver(format!(
                "max_step = {} must be positive",
                self.max_step
            )));
        }
        if !(self.output_stride > T::zero()) {
            return Err(Error::InvalidSolver(format!(
                "output_stride = {} must be positive",
                self.output_stride
            )));
        }
        Ok(())
    }

    fn step_control(&self) -> StepControl<T> {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            max_steps: 50_000_000,
        }
    }
}

/// Per-sample snapshot of the kinetic coefficient of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeKinetic<T> {
    pub g: T,
    pub g_dot: T,
}

/// Dense solution for one normal mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ErmakovTrajectory<T> {
    pub mode: NormalMode,
    pub times: Vec<T>,
    pub states: Vec<ErmakovState<T>>,
    pub kinetic: Vec<ModeKinetic<T>>,
    /// Frozen potential constant F_γγ (amu·fs⁻²).
    pub potential: T,
    pub source: KineticSource<T>,
    pub stats: StepStats,
}

impl<T: Real> ErmakovTrajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial(&self) -> ErmakovState<T> {
        self.states[0]
    }

    pub fn last(&self) -> ErmakovState<T> {
        *self
            .states
            .last()
            .expect("trajectory has at least one sample")
    }
}

/// Gerade and ungerade trajectories on a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectories<T> {
    pub g: ErmakovTrajectory<T>,
    pub u: ErmakovTrajectory<T>,
}

impl<T: Real> ModeTrajectories<T> {
    pub fn mode(&self, mode: NormalMode) -> &ErmakovTrajectory<T> {
        match mode {
            NormalMode::Gerade => &self.g,
            NormalMode::Ungerade => &self.u,
        }
    }

    pub fn times(&self) -> &[T] {
        &self.g.times
    }

    pub fn check_aligned(&self) -> Result<()> {
        if self.g.times != self.u.times {
            return Err(Error::MisalignedSeries(format!(
                "gerade has {} samples, ungerade {}",
                self.g.times.len(),
                self.u.times.len()
            )));
        }
        Ok(())
    }

    pub fn stats(&self) -> StepStats {
        let mut s = self.g.stats;
        s.merge(self.u.stats);
        s
    }
}

/// Stationary data α = (G/F)^{1/4}, α̇ = 0, φ = 0.
pub fn initial_conditions<T: Real>(g0: T, f0: T) -> ErmakovState<T> {
    ErmakovState {
        alpha: (g0 / f0).sqrt().sqrt(),
        alpha_dot: T::zero(),
        phi: T::zero(),
    }
}

/// Right-hand side of the (α, α̇, φ) system.
#[inline]
fn ermakov_rhs<T: Real>(g: T, g_dot: T, f: T, y: &[T; 3]) -> [T; 3] {
    let [alpha, alpha_dot, _] = *y;
    let a2 = alpha * alpha;
    [
        alpha_dot,
        g_dot / g * alpha_dot - g * f * alpha + g * g / (a2 * alpha),
        g / a2,
    ]
}

/// Output grid from `from` to `to` with the given stride, always ending at `to`.
fn output_times<T: Real>(from: T, to: T, stride: T) -> Vec<T> {
    let span = (to - from).abs();
    let dir = if to >= from { T::one() } else { -T::one() };
    let ratio = span / stride;
    let mut n = ratio.floor().to_usize().unwrap_or(0);
    // Absorb rounding so the last regular sample does not sit a hair before `to`.
    if ratio - T::lit(n as f64) < T::lit(1e-9) && n > 0 {
        n -= 1;
    }
    let mut times: Vec<T> = (0..=n)
        .map(|k| from + dir * stride * T::lit(k as f64))
        .collect();
    if times.last() != Some(&to) {
        times.push(to);
    }
    times
}

fn map_ode_error(e: OdeError) -> Error {
    match e {
        OdeError::StepSizeUnderflow { t, h } => Error::StepSizeUnderflow { t, h },
        OdeError::TooManySteps { t } | OdeError::NonFinite { t } => {
            Error::StepSizeUnderflow { t, h: 0.0 }
        }
    }
}

/// Sub-intervals of [a, b] split at the breakpoints strictly inside it.
fn split_at<T: Real>(a: T, b: T, breaks: &[T]) -> Vec<(T, T)> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut cuts: Vec<T> = breaks
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    if a > b {
        cuts.reverse();
    }
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut start = a;
    for c in cuts {
        out.push((start, c));
        start = c;
    }
    out.push((start, b));
    out
}

/// Relative floor on α below which integration aborts.
pub const ALPHA_GUARD: f64 = 1e-6;

/// Integrates one mode from an arbitrary state at `t_from` to `t_to`.
pub fn propagate<T: Real>(
    source: KineticSource<T>,
    mode: NormalMode,
    potential: T,
    cfg: &SolverConfig<T>,
    initial: ErmakovState<T>,
    t_from: T,
    t_to: T,
) -> Result<ErmakovTrajectory<T>> {
    cfg.validate()?;
    let g_min = source.min_g();
    if !(g_min > T::zero()) {
        return Err(Error::NonPositiveKinetic {
            t: t_from.to_f64_lossy(),
            value: g_min.to_f64_lossy(),
        });
    }
    if !(initial.alpha > T::zero()) {
        return Err(Error::AlphaCollapse {
            t: t_from.to_f64_lossy(),
            alpha: initial.alpha.to_f64_lossy(),
            guard: 0.0,
        });
    }
    let guard = initial.alpha * T::lit(ALPHA_GUARD);
    let ctl = cfg.step_control();
    let breaks = source.breakpoints();
    let times = output_times(t_from, t_to, cfg.output_stride);

    let snapshot = |t: T| {
        let (g, g_dot) = source.at(t);
        ModeKinetic { g, g_dot }
    };
    let mut states = Vec::with_capacity(times.len());
    let mut kinetic = Vec::with_capacity(times.len());
    states.push(initial);
    kinetic.push(snapshot(t_from));

    let mut stepper = DormandPrince::new();
    let mut y = initial.to_array();
    for w in times.windows(2) {
        for (a, b) in split_at(w[0], w[1], &breaks) {
            let piece = source.piece_at((a + b) / T::lit(2.0));
            let rhs = |t: T, y: &[T; 3]| {
                let (g, g_dot) = source.on(t, piece);
                ermakov_rhs(g, g_dot, potential, y)
            };
            y = stepper.advance(rhs, a, y, b, &ctl).map_err(map_ode_error)?;
        }
        let state = ErmakovState::from_array(y);
        if !(state.alpha > guard) {
            return Err(Error::AlphaCollapse {
                t: w[1].to_f64_lossy(),
                alpha: state.alpha.to_f64_lossy(),
                guard: guard.to_f64_lossy(),
            });
        }
        states.push(state);
        kinetic.push(snapshot(w[1]));
    }

    Ok(ErmakovTrajectory {
        mode,
        times,
        states,
        kinetic,
        potential,
        source,
        stats: stepper.stats,
    })
}

/// Integrates both normal modes of `spec` along `schedule` from stationary
/// initial data at `t_start`.
pub fn integrate<T: Real>(
    spec: &MoleculeSpec<T>,
    schedule: &AngleSchedule<T>,
    cfg: &SolverConfig<T>,
    t_start: T,
    t_end: T,
) -> Result<ModeTrajectories<T>> {
    schedule.validate()?;
    let run = |mode: NormalMode| {
        let source = KineticSource::scheduled(spec, *schedule, mode);
        let potential = spec.potential(mode);
        let (g0, _) = source.at(t_start);
        if !(g0 > T::zero()) {
            return Err(Error::NonPositiveKinetic {
                t: t_start.to_f64_lossy(),
                value: g0.to_f64_lossy(),
            });
        }
        propagate(
            source,
            mode,
            potential,
            cfg,
            initial_conditions(g0, potential),
            t_start,
            t_end,
        )
    };
    let (g, u) = rayon::join(|| run(NormalMode::Gerade), || run(NormalMode::Ungerade));
    Ok(ModeTrajectories { g: g?, u: u? })
}

/// Exact constant-coefficient solution.
///
/// With ω = √(GF) the companion u(t) = α₀cos ωt + (α̇₀ + iG/α₀) sin(ωt)/ω
/// solves the linear equation; α = |u| and φ = φ₀ + arg u, unwrapped.
pub fn pinney_closed_form<T: Real>(init: ErmakovState<T>, g: T, f: T, t: T) -> ErmakovState<T> {
    let omega = (g * f).sqrt();
    let (sin, cos) = (omega * t).sin_cos();
    let a0 = init.alpha;
    let v0 = Complex::new(init.alpha_dot, g / a0);
    let u = Complex::new(a0 * cos, T::zero()) + v0 * (sin / omega);
    let u_dot = Complex::new(-a0 * omega * sin, T::zero()) + v0 * cos;
    let alpha = u.norm();
    let alpha_dot = (u.conj() * u_dot).re / alpha;
    // Im u has the sign of sin ωt, so arg u stays in the same half-plane as
    // ωt and the wrapped difference between them is unambiguous.
    let theta = omega * t;
    let mut diff = u.arg() - theta;
    diff = diff - T::TAU() * (diff / T::TAU()).round();
    let phi = init.phi + theta + diff;
    ErmakovState {
        alpha,
        alpha_dot,
        phi,
    }
}

/// Deviations of a trajectory from the independently integrated linear
/// companion u(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCheck<T> {
    /// max |W(t) − 1| with W = Im(u* u̇)/G of the companion.
    pub wronskian_drift: T,
    /// max |I(x) − 1| of the Ermakov–Lewis invariant
    /// I(x) = ((αẋ − α̇x)/G)² + (x/α)² over x = Re u, Im u.
    pub invariant_drift: T,
    /// max |u(t) − α e^{iφ}| / α.
    pub solution_deviation: T,
}

impl<T: Real> LinearCheck<T> {
    /// Largest deviation that involves the Ermakov trajectory itself.
    pub fn trajectory_deviation(&self) -> T {
        self.invariant_drift.max(self.solution_deviation)
    }

    pub fn max_deviation(&self) -> T {
        self.wronskian_drift.max(self.trajectory_deviation())
    }
}

/// Integrates ü − (Ġ/G)u̇ + GFu = 0 alongside `traj` and compares.
///
/// The companion is seeded from the trajectory's first state and re-seeded
/// wherever G jumps, so each constant-G piece is checked on its own.
pub fn companion_linear_check<T: Real>(traj: &ErmakovTrajectory<T>) -> LinearCheck<T> {
    let source = traj.source;
    let f = traj.potential;
    let tight = T::lit(1e-13);
    let scale = traj.initial().alpha;
    let ctl = StepControl {
        rel_tol: tight,
        abs_tol: tight * scale,
        max_step: T::lit(0.25),
        max_steps: 50_000_000,
    };
    let jump_points: Vec<T> = if source.jumps() {
        source.breakpoints()
    } else {
        Vec::new()
    };
    let breaks = source.breakpoints();

    let seed = |state: &ErmakovState<T>, g: T| {
        let u = state.companion();
        let v = state.companion_rate(g);
        [u.re, u.im, v.re, v.im]
    };
    let (g0, _) = source.at(traj.times[0]);
    let mut y = seed(&traj.states[0], g0);
    let mut stepper = DormandPrince::new();
    let mut drift = T::zero();
    let mut deviation = T::zero();
    let mut invariant = T::zero();
    let mut g_end = g0;

    for (i, w) in traj.times.windows(2).enumerate() {
        for (a, b) in split_at(w[0], w[1], &breaks) {
            if jump_points.contains(&a) {
                // Re-seed on the far side of the jump from the integrated companion.
                let u = Complex::new(y[0], y[1]);
                let state = ErmakovState {
                    alpha: u.norm(),
                    alpha_dot: (u.conj() * Complex::new(y[2], y[3])).re / u.norm(),
                    phi: u.arg(),
                };
                let piece = source.piece_at((a + b) / T::lit(2.0));
                let (g_after, _) = source.on(a, piece);
                y = seed(&state, g_after);
                stepper.reset();
            }
            let piece = source.piece_at((a + b) / T::lit(2.0));
            let rhs = |t: T, y: &[T; 4]| {
                let (g, g_dot) = source.on(t, piece);
                let k = g_dot / g;
                let gf = g * f;
                [y[2], y[3], k * y[2] - gf * y[0], k * y[3] - gf * y[1]]
            };
            g_end = source.on(b, piece).0;
            match stepper.advance(rhs, a, y, b, &ctl) {
                Ok(next) => y = next,
                Err(_) => {
                    let inf = T::infinity();
                    return LinearCheck {
                        wronskian_drift: inf,
                        invariant_drift: inf,
                        solution_deviation: inf,
                    };
                }
            }
        }
        let state = traj.states[i + 1];
        // At a jump sample the companion is still on the pre-jump piece.
        let g = g_end;
        let u = Complex::new(y[0], y[1]);
        let v = Complex::new(y[2], y[3]);
        let w_now = (u.conj() * v).im / g;
        drift = drift.max((w_now - T::one()).abs());
        for (x, x_dot) in [(u.re, v.re), (u.im, v.im)] {
            let p = (state.alpha * x_dot - state.alpha_dot * x) / g;
            let q = x / state.alpha;
            invariant = invariant.max((p * p + q * q - T::one()).abs());
        }
        deviation = deviation.max((u - state.companion()).norm() / state.alpha);
    }
    LinearCheck {
        wronskian_drift: drift,
        invariant_drift: invariant,
        solution_deviation: deviation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molecule::builtin;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn constant(g: f64) -> KineticSource<f64> {
        KineticSource::Constant { g }
    }

    #[test]
    fn initial_condition_values() {
        assert_eq!(
            initial_conditions(1.0_f64, 1.0),
            ErmakovState {
                alpha: 1.0,
                alpha_dot: 0.0,
                phi: 0.0
            }
        );
        let h2o = builtin::<f64>("H2O").unwrap();
        // Local limit: α₀ = 1/√(μω) with μ = 1/g_rr, ω = √(g_rr f_rr).
        let local = initial_conditions(h2o.g_rr(), h2o.f_rr);
        assert_relative_eq!(
            local.alpha,
            (h2o.reduced_mass() * h2o.omega0()).sqrt().recip(),
            max_relative = 1e-14
        );
        let co2 = builtin::<f64>("CO2").unwrap();
        let gg = co2.g_matrix(180.0).normal(NormalMode::Gerade);
        let st = initial_conditions(gg, co2.potential(NormalMode::Gerade));
        assert_relative_eq!(
            st.alpha,
            (gg / (co2.f_rr + co2.f_rrp)).powf(0.25),
            max_relative = 1e-14
        );
        assert_relative_eq!(gg, 0.0625, max_relative = 1e-3);
    }

    #[test]
    fn closed_form_special_cases() {
        let (g, f) = (0.3_f64, 0.8);
        let c = (g / f).powf(0.25);
        let omega = (g * f).sqrt();
        let eq = ErmakovState {
            alpha: c,
            alpha_dot: 0.0,
            phi: 0.0,
        };
        for t in [0.3, 2.0, 17.0] {
            let s = pinney_closed_form(eq, g, f, t);
            assert_relative_eq!(s.alpha, c, max_relative = 1e-14);
            assert_relative_eq!(s.phi, omega * t, max_relative = 1e-13);
        }
        let start = ErmakovState {
            alpha: 2.0 * c,
            alpha_dot: 0.0,
            phi: 0.0,
        };
        let period = std::f64::consts::PI / omega;
        let s = pinney_closed_form(start, g, f, period);
        assert_relative_eq!(s.alpha, 2.0 * c, max_relative = 1e-13);
        assert!(s.alpha_dot.abs() < 1e-13);
        let s = pinney_closed_form(start, g, f, period / 2.0);
        assert_relative_eq!(
            s.alpha * s.alpha,
            (g / f).sqrt() / 4.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn closed_form_satisfies_the_ode() {
        let (g, f) = (0.7_f64, 1.3);
        let init = ErmakovState {
            alpha: 0.4,
            alpha_dot: 0.9,
            phi: 0.2,
        };
        let h = 1e-4;
        for t in [0.5, 3.3, 11.0, 40.0] {
            let s = pinney_closed_form(init, g, f, t);
            let p = pinney_closed_form(init, g, f, t + h);
            let m = pinney_closed_form(init, g, f, t - h);
            let accel = (p.alpha - 2.0 * s.alpha + m.alpha) / (h * h);
            assert_relative_eq!(
                accel,
                -g * f * s.alpha + g * g / s.alpha.powi(3),
                max_relative = 1e-5
            );
            assert_relative_eq!(
                (p.alpha - m.alpha) / (2.0 * h),
                s.alpha_dot,
                max_relative = 1e-6,
                epsilon = 1e-8
            );
            assert_relative_eq!(
                (p.phi - m.phi) / (2.0 * h),
                g / (s.alpha * s.alpha),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn integrator_matches_closed_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let cfg = SolverConfig::default();
        for _ in 0..5 {
            let g: f64 = rng.random_range(0.05..1.5);
            let f: f64 = rng.random_range(0.2..1.5);
            let c = (g / f).powf(0.25);
            let init = ErmakovState {
                alpha: c * rng.random_range(0.5..2.0),
                alpha_dot: rng.random_range(-0.5..0.5),
                phi: 0.0,
            };
            let period = std::f64::consts::TAU / (g * f).sqrt();
            let traj = propagate(
                constant(g),
                NormalMode::Gerade,
                f,
                &cfg,
                init,
                0.0,
                10.0 * period,
            )
            .unwrap();
            for (t, s) in traj.times.iter().zip(&traj.states) {
                let exact = pinney_closed_form(init, g, f, *t);
                assert_relative_eq!(s.alpha, exact.alpha, max_relative = 1e-8);
                assert!(
                    (s.phi - exact.phi).abs() < 1e-8 * exact.phi.abs().max(1.0),
                    "t={t} {} {}",
                    s.phi,
                    exact.phi
                );
            }
        }
    }

    #[test]
    fn equilibrium_is_preserved() {
        let (g, f) = (0.0625_f64, 1.04);
        let init = initial_conditions(g, f);
        let traj = propagate(
            constant(g),
            NormalMode::Gerade,
            f,
            &SolverConfig::default(),
            init,
            0.0,
            1e4,
        )
        .unwrap();
        let worst = traj
            .states
            .iter()
            .map(|s| (s.alpha - init.alpha).abs() / init.alpha)
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst:e}");
    }

    #[test]
    fn sudden_jump_keeps_state_continuous() {
        let o3 = builtin::<f64>("O3").unwrap();
        let sched = AngleSchedule::sudden(116.8, 180.0, 0.0);
        let cfg = SolverConfig {
            output_stride: 0.05,
            ..SolverConfig::default()
        };
        let trajs = integrate(&o3, &sched, &cfg, -20.0, 40.0).unwrap();
        let traj = &trajs.u;
        let jump = traj.times.iter().position(|&t| t >= 0.0).unwrap();
        // Before the jump the state is stationary.
        for s in &traj.states[..jump] {
            assert_relative_eq!(s.alpha, traj.states[0].alpha, max_relative = 1e-10);
        }
        // After it, α oscillates about the new equilibrium with the closed-form law.
        let g_after = traj.kinetic[jump].g;
        let pre = traj.states[jump];
        for (t, s) in traj.times[jump..].iter().zip(&traj.states[jump..]) {
            let exact = pinney_closed_form(pre, g_after, traj.potential, *t - traj.times[jump]);
            assert_relative_eq!(s.alpha, exact.alpha, max_relative = 1e-8);
        }
        let check = companion_linear_check(traj);
        assert!(check.max_deviation() < 1e-7, "{check:?}");
    }

    #[test]
    fn companion_check_on_constant_run() {
        let init = ErmakovState {
            alpha: 0.8,
            alpha_dot: 0.1,
            phi: 0.0,
        };
        let traj = propagate(
            constant(0.4),
            NormalMode::Ungerade,
            0.9,
            &SolverConfig::default(),
            init,
            0.0,
            60.0,
        )
        .unwrap();
        let check = companion_linear_check(&traj);
        assert!(check.wronskian_drift < 1e-10, "{check:?}");
        assert!(check.trajectory_deviation() < 1e-8, "{check:?}");
    }

    #[test]
    fn companion_check_flags_loose_integration() {
        let init = ErmakovState {
            alpha: 0.8,
            alpha_dot: 0.1,
            phi: 0.0,
        };
        let loose = SolverConfig {
            rel_tol: 1e-3,
            abs_tol: 1e-5,
            max_step: 50.0,
            output_stride: 5.0,
        };
        let traj = propagate(
            constant(0.4),
            NormalMode::Ungerade,
            0.9,
            &loose,
            init,
            0.0,
            300.0,
        )
        .unwrap();
        let check = companion_linear_check(&traj);
        assert!(check.wronskian_drift < 1e-9, "{check:?}");
        assert!(check.trajectory_deviation() > 1e-6, "{check:?}");
    }

    #[test]
    fn time_reversal() {
        let o3 = builtin::<f64>("O3").unwrap();
        let sched = AngleSchedule::adiabatic(116.8, 180.0, 0.05).unwrap();
        let cfg = SolverConfig::default();
        let fwd = integrate(&o3, &sched, &cfg, -60.0, 60.0).unwrap();
        for traj in [&fwd.g, &fwd.u] {
            let back = propagate(
                traj.source,
                traj.mode,
                traj.potential,
                &cfg,
                traj.last(),
                60.0,
                -60.0,
            )
            .unwrap();
            let (a, b) = (traj.initial(), back.last());
            assert_relative_eq!(b.alpha, a.alpha, max_relative = 1e-6);
            assert!(b.alpha_dot.abs() < 1e-6 * a.alpha);
            assert!(b.phi.abs() < 1e-6 * traj.last().phi);
        }
    }

    #[test]
    fn output_grid() {
        assert_eq!(
            output_times(0.0, 1.0, 0.25),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(output_times(0.0, 1.0, 0.3).len(), 5);
        let g = output_times(-200.0, 400.0, 0.1);
        assert_eq!(g.len(), 6001);
        assert_eq!(*g.last().unwrap(), 400.0);
        assert_eq!(output_times(1.0, 0.0, 0.5), vec![1.0, 0.5, 0.0]);
        assert_eq!(
            split_at(0.0, 1.0, &[0.5, 2.0, 0.0]),
            vec![(0.0, 0.5), (0.5, 1.0)]
        );
        assert_eq!(
            split_at(1.0, 0.0, &[0.25, 0.5]),
            vec![(1.0, 0.5), (0.5, 0.25), (0.25, 0.0)]
        );
    }

    #[test]
    fn errors() {
        let bad = SolverConfig {
            rel_tol: 0.5,
            ..SolverConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidSolver(_))));
        let r = propagate(
            constant(-1.0),
            NormalMode::Gerade,
            1.0,
            &SolverConfig::default(),
            initial_conditions(1.0, 1.0),
            0.0,
            1.0,
        );
        assert!(matches!(r, Err(Error::NonPositiveKinetic { .. })));
    }
}
