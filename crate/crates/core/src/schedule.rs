//! Bond-angle profiles θ(t) and the kinetic coefficients they induce.

use crate::error::{Error, Result};
use crate::molecule::{MoleculeSpec, NormalMode};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    Sudden,
    Linear,
    Adiabatic,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 3] = [
        ScheduleKind::Sudden,
        ScheduleKind::Linear,
        ScheduleKind::Adiabatic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Sudden => "sudden",
            ScheduleKind::Linear => "linear",
            ScheduleKind::Adiabatic => "adiabatic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
    }
}

/// Default logistic rate for adiabatic runs (fs⁻¹).
pub const DEFAULT_ADIABATIC_RATE: f64 = 0.05;

/// Time profile of the inter-bond angle.
///
/// * sudden: θ₀ for t < t₀, θ_f from t₀ on;
/// * linear: ramp from θ₀ at t₀ to θ_f at t_f;
/// * adiabatic: θ₀ + (θ_f − θ₀)/(1 + 2e^{−2k(t − t₀)}), reaching θ₀ and θ_f
///   only asymptotically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSchedule<T> {
    pub kind: ScheduleKind,
    pub theta0_deg: T,
    pub thetaf_deg: T,
    pub t0: T,
    /// End of the ramp; linear schedules only.
    pub tf: T,
    /// Logistic rate in fs⁻¹; adiabatic schedules only.
    pub k: T,
}

/// Which analytic branch of a piecewise schedule applies.
///
/// Integration segments never straddle a breakpoint, so each segment is
/// evaluated on a single branch, including at its end points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    Before,
    Ramp,
    After,
    Smooth,
}

impl<T: Real> AngleSchedule<T> {
    pub fn sudden(theta0_deg: T, thetaf_deg: T, t0: T) -> Self {
        Self {
            kind: ScheduleKind::Sudden,
            theta0_deg,
            thetaf_deg,
            t0,
            tf: t0,
            k: T::zero(),
        }
    }

    pub fn linear(theta0_deg: T, thetaf_deg: T, t0: T, tf: T) -> Result<Self> {
        let s = Self {
            kind: ScheduleKind::Linear,
            theta0_deg,
            thetaf_deg,
            t0,
            tf,
            k: T::zero(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn adiabatic(theta0_deg: T, thetaf_deg: T, k: T) -> Result<Self> {
        let s = Self {
            kind: ScheduleKind::Adiabatic,
            theta0_deg,
            thetaf_deg,
            t0: T::zero(),
            tf: T::zero(),
            k,
        };
        s.validate()?;
        Ok(s)
    }

    /// Constant angle; every kind degenerates to this when θ₀ = θ_f.
    pub fn constant(theta_deg: T) -> Self {
        Self::sudden(theta_deg, theta_deg, T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        for theta in [self.theta0_deg, self.thetaf_deg] {
            if !(theta > T::zero() && theta <= T::lit(180.0)) {
                return bad(format!("angle {theta} deg outside (0, 180]"));
            }
        }
        match self.kind {
            ScheduleKind::Linear if !(self.tf > self.t0) => bad(format!(
                "linear ramp needs tf > t0 (t0 = {}, tf = {})",
                self.t0, self.tf
            )),
            ScheduleKind::Adiabatic if !(self.k > T::zero()) => bad(format!(
                "adiabatic rate k must be positive (got {})",
                self.k
            )),
            _ => Ok(()),
        }
    }

    /// Times where θ or θ̇ is discontinuous.
    pub fn breakpoints(&self) -> Vec<T> {
        match self.kind {
            ScheduleKind::Sudden => vec![self.t0],
            ScheduleKind::Linear => vec![self.t0, self.tf],
            ScheduleKind::Adiabatic => Vec::new(),
        }
    }

    /// True if G jumps at the breakpoint (sudden only).
    pub fn jumps(&self) -> bool {
        self.kind == ScheduleKind::Sudden && self.theta0_deg != self.thetaf_deg
    }

    pub fn piece_at(&self, t: T) -> Piece {
        match self.kind {
            ScheduleKind::Sudden if t < self.t0 => Piece::Before,
            ScheduleKind::Sudden => Piece::After,
            ScheduleKind::Linear if t < self.t0 => Piece::Before,
            ScheduleKind::Linear if t < self.tf => Piece::Ramp,
            ScheduleKind::Linear => Piece::After,
            ScheduleKind::Adiabatic => Piece::Smooth,
        }
    }

    pub fn theta_at(&self, t: T) -> T {
        self.theta_on(t, self.piece_at(t))
    }

    pub fn theta_dot_at(&self, t: T) -> T {
        self.theta_dot_on(t, self.piece_at(t))
    }

    /// θ(t) in degrees evaluated on a fixed branch.
    pub fn theta_on(&self, t: T, piece: Piece) -> T {
        let span = self.thetaf_deg - self.theta0_deg;
        match piece {
            Piece::Before => self.theta0_deg,
            Piece::After => self.thetaf_deg,
            Piece::Ramp => self.theta0_deg + span * (t - self.t0) / (self.tf - self.t0),
            Piece::Smooth => {
                let two = T::lit(2.0);
                self.theta0_deg + span / (T::one() + two * (-two * self.k * (t - self.t0)).exp())
            }
        }
    }

    /// dθ/dt in degrees per fs on a fixed branch.
    pub fn theta_dot_on(&self, t: T, piece: Piece) -> T {
        let span = self.thetaf_deg - self.theta0_deg;
        match piece {
            Piece::Before | Piece::After => T::zero(),
            Piece::Ramp => span / (self.tf - self.t0),
            Piece::Smooth => {
                let two = T::lit(2.0);
                let e = two * (-two * self.k * (t - self.t0)).exp();
                if !e.is_finite() {
                    return T::zero();
                }
                let denom = T::one() + e;
                span * two * self.k * e / (denom * denom)
            }
        }
    }
}

/// G_gg, G_uu and their time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticElements<T> {
    pub g_gg: T,
    pub g_uu: T,
    pub gdot_gg: T,
    pub gdot_uu: T,
}

impl<T: Real> KineticElements<T> {
    pub fn mode(&self, mode: NormalMode) -> (T, T) {
        match mode {
            NormalMode::Gerade => (self.g_gg, self.gdot_gg),
            NormalMode::Ungerade => (self.g_uu, self.gdot_uu),
        }
    }
}

/// Source of G(t) for one normal mode: either a schedule or a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KineticSource<T> {
    Scheduled {
        g_rr: T,
        m_central: T,
        schedule: AngleSchedule<T>,
        mode: NormalMode,
    },
    Constant {
        g: T,
    },
}

impl<T: Real> KineticSource<T> {
    pub fn scheduled(spec: &MoleculeSpec<T>, schedule: AngleSchedule<T>, mode: NormalMode) -> Self {
        Self::Scheduled {
            g_rr: spec.g_rr(),
            m_central: spec.m_central,
            schedule,
            mode,
        }
    }

    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            Self::Scheduled { schedule, .. } => schedule.breakpoints(),
            Self::Constant { .. } => Vec::new(),
        }
    }

    pub fn jumps(&self) -> bool {
        matches!(self, Self::Scheduled { schedule, .. } if schedule.jumps())
    }

    pub fn piece_at(&self, t: T) -> Piece {
        match self {
            Self::Scheduled { schedule, .. } => schedule.piece_at(t),
            Self::Constant { .. } => Piece::Smooth,
        }
    }

    /// (G, Ġ) on a fixed branch.
    pub fn on(&self, t: T, piece: Piece) -> (T, T) {
        match *self {
            Self::Scheduled {
                g_rr,
                m_central,
                schedule,
                mode,
            } => {
                let sign = mode.sign::<T>();
                let theta = schedule.theta_on(t, piece).to_radians();
                let theta_dot = schedule.theta_dot_on(t, piece).to_radians();
                (
                    g_rr + sign * theta.cos() / m_central,
                    -sign * theta.sin() * theta_dot / m_central,
                )
            }
            Self::Constant { g } => (g, T::zero()),
        }
    }

    pub fn at(&self, t: T) -> (T, T) {
        self.on(t, self.piece_at(t))
    }

    /// Smallest G over the whole schedule. cos θ is monotone on (0°, 180°]
    /// and θ(t) is monotone, so the end points bound it.
    pub fn min_g(&self) -> T {
        match *self {
            Self::Scheduled {
                g_rr,
                m_central,
                schedule,
                mode,
            } => {
                let sign = mode.sign::<T>();
                let at = |deg: T| g_rr + sign * deg.to_radians().cos() / m_central;
                at(schedule.theta0_deg).min(at(schedule.thetaf_deg))
            }
            Self::Constant { g } => g,
        }
    }
}

/// G_γγ(t) = g_rr ± cos θ(t)/m_B and their derivatives.
pub fn kinetic_at<T: Real>(
    spec: &MoleculeSpec<T>,
    schedule: &AngleSchedule<T>,
    t: T,
) -> KineticElements<T> {
    let piece = schedule.piece_at(t);
    let (g_gg, gdot_gg) =
        KineticSource::scheduled(spec, *schedule, NormalMode::Gerade).on(t, piece);
    let (g_uu, gdot_uu) =
        KineticSource::scheduled(spec, *schedule, NormalMode::Ungerade).on(t, piece);
    KineticElements {
        g_gg,
        g_uu,
        gdot_gg,
        gdot_uu,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molecule::builtin;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn adiabatic_profile() {
        let s = AngleSchedule::adiabatic(104.5_f64, 180.0, 0.05).unwrap();
        assert_abs_diff_eq!(s.theta_at(-2000.0), 104.5, epsilon = 1e-12);
        assert_relative_eq!(s.theta_at(0.0), 104.5 + 75.5 / 3.0, max_relative = 1e-15);
        assert_abs_diff_eq!(s.theta_at(2000.0), 180.0, epsilon = 1e-12);
        assert_eq!(s.theta_dot_at(-1e6), 0.0);
        assert!(s.breakpoints().is_empty());
    }

    #[test]
    fn linear_profile() {
        let s = AngleSchedule::linear(180.0_f64, 104.5, -10.0, 30.0).unwrap();
        assert_relative_eq!(
            s.theta_at(10.0),
            (180.0 + 104.5) / 2.0,
            max_relative = 1e-15
        );
        assert_eq!(s.theta_at(-11.0), 180.0);
        assert_eq!(s.theta_at(30.0), 104.5);
        assert_eq!(s.theta_at(-10.0), 180.0);
        assert_relative_eq!(s.theta_dot_at(0.0), -75.5 / 40.0, max_relative = 1e-15);
        assert_eq!(s.breakpoints(), vec![-10.0, 30.0]);
        assert!(AngleSchedule::linear(180.0_f64, 104.5, 5.0, 5.0).is_err());
        assert!(AngleSchedule::adiabatic(180.0_f64, 104.5, 0.0).is_err());
    }

    #[test]
    fn sudden_profile_includes_t0_in_final_branch() {
        let s = AngleSchedule::sudden(116.8_f64, 180.0, 5.0);
        assert_eq!(s.theta_at(4.999_999), 116.8);
        assert_eq!(s.theta_at(5.0), 180.0);
        assert_eq!(s.theta_dot_at(5.0), 0.0);
        assert!(s.jumps());
        assert!(!AngleSchedule::constant(120.0_f64).jumps());
        // The left branch stays available at the breakpoint itself.
        assert_eq!(s.theta_on(5.0, Piece::Before), 116.8);
    }

    #[test]
    fn kinetic_values() {
        let co2 = builtin::<f64>("CO2").unwrap();
        let k = kinetic_at(&co2, &AngleSchedule::constant(180.0), 3.0);
        assert_abs_diff_eq!(k.g_gg, 0.0625, epsilon = 1e-4);
        assert_abs_diff_eq!(k.g_uu, 0.2292, epsilon = 1e-4);
        assert_relative_eq!(
            k.g_gg,
            1.0 / 15.995 + 1.0 / 12.0 - 1.0 / 12.0,
            max_relative = 1e-12
        );

        let h2o = builtin::<f64>("H2O").unwrap();
        let lin = AngleSchedule::linear(80.0, 100.0, 0.0, 20.0).unwrap();
        let k = kinetic_at(&h2o, &lin, 10.0);
        assert_relative_eq!(k.g_gg, h2o.g_rr(), max_relative = 1e-15);
        assert_relative_eq!(k.g_uu, h2o.g_rr(), max_relative = 1e-15);
        let expect = -1.0_f64.to_radians() / 16.0;
        assert_relative_eq!(k.gdot_gg, expect, max_relative = 1e-12);
        assert_relative_eq!(k.gdot_uu, -expect, max_relative = 1e-12);

        let adi = AngleSchedule::adiabatic(104.5, 180.0, 0.05).unwrap();
        let k = kinetic_at(&h2o, &adi, 1000.0);
        assert!(k.gdot_gg.abs() < 1e-20 && k.gdot_uu.abs() < 1e-20);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let o3 = builtin::<f64>("O3").unwrap();
        let adi = AngleSchedule::adiabatic(116.8, 180.0, 0.05).unwrap();
        let lin = AngleSchedule::linear(116.8, 180.0, 0.0, 50.0).unwrap();
        let h = 1e-4;
        for (sched, times) in [
            (adi, [-20.0, -5.0, 0.0, 7.0, 25.0]),
            (lin, [1.0, 10.0, 20.0, 33.0, 49.0]),
        ] {
            for t in times {
                let k = kinetic_at(&o3, &sched, t);
                let kp = kinetic_at(&o3, &sched, t + h);
                let km = kinetic_at(&o3, &sched, t - h);
                assert_relative_eq!(
                    (kp.g_gg - km.g_gg) / (2.0 * h),
                    k.gdot_gg,
                    max_relative = 1e-8
                );
                assert_relative_eq!(
                    (kp.g_uu - km.g_uu) / (2.0 * h),
                    k.gdot_uu,
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn sudden_kinetics_are_piecewise_constant() {
        let no2 = builtin::<f64>("NO2").unwrap();
        let s = AngleSchedule::sudden(134.3, 104.5, 0.0);
        let before: Vec<_> = [-50.0, -10.0, -1e-9]
            .iter()
            .map(|&t| kinetic_at(&no2, &s, t))
            .collect();
        let after: Vec<_> = [0.0, 1e-9, 40.0]
            .iter()
            .map(|&t| kinetic_at(&no2, &s, t))
            .collect();
        assert!(before.windows(2).all(|w| w[0] == w[1]));
        assert!(after.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(before[0], after[0]);
        assert!(before
            .iter()
            .chain(&after)
            .all(|k| k.gdot_gg == 0.0 && k.gdot_uu == 0.0));
    }

    proptest! {
        #[test]
        fn kinetic_sum_and_product(theta0 in 60.0_f64..180.0, thetaf in 60.0_f64..180.0, t in -200.0_f64..200.0, k in 0.005_f64..0.5) {
            let h2o = builtin::<f64>("H2O").unwrap();
            let s = AngleSchedule::adiabatic(theta0, thetaf, k).unwrap();
            let e = kinetic_at(&h2o, &s, t);
            prop_assert!(e.g_gg > 0.0 && e.g_uu > 0.0);
            prop_assert!((e.g_gg + e.g_uu - 2.0 * h2o.g_rr()).abs() < 1e-14);
            prop_assert!(e.g_gg * e.g_uu <= h2o.g_rr().powi(2) * (1.0 + 1e-15));
        }

        #[test]
        fn schedules_are_monotone(theta0 in 60.0_f64..180.0, thetaf in 60.0_f64..180.0, a in -100.0_f64..100.0, b in -100.0_f64..100.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let scheds = [
                AngleSchedule::sudden(theta0, thetaf, 3.0),
                AngleSchedule::linear(theta0, thetaf, -20.0, 40.0).unwrap(),
                AngleSchedule::adiabatic(theta0, thetaf, 0.05).unwrap(),
            ];
            for s in scheds {
                let (x, y) = (s.theta_at(lo), s.theta_at(hi));
                let dir = thetaf - theta0;
                prop_assert!((y - x) * dir >= -1e-12);
                let (mn, mx) = (theta0.min(thetaf), theta0.max(thetaf));
                prop_assert!(x >= mn - 1e-12 && x <= mx + 1e-12);
            }
        }
    }
}
