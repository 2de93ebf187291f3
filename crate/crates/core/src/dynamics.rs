//! Observables of the exact time-dependent Fock states.
//!
//! Everything here is a pure function of the Ermakov trajectories: α(t)
//! does not depend on the occupation, so one pair of trajectories serves
//! every state of a run.

use crate::algebra::ResonanceWeights;
use crate::ermakov::{ErmakovState, ErmakovTrajectory, ModeTrajectories};
use crate::error::{Error, Result};
use crate::molecule::{zeta_stationary, MoleculeSpec, NormalMode};
use crate::scalar::Real;
use crate::units::hbar;

/// Occupation numbers (n_g, n_u) of a product Fock state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeOccupation {
    pub n_g: u32,
    pub n_u: u32,
}

impl ModeOccupation {
    pub const GROUND: Self = Self { n_g: 0, n_u: 0 };

    pub const fn new(n_g: u32, n_u: u32) -> Self {
        Self { n_g, n_u }
    }

    pub fn polyad(&self) -> u32 {
        self.n_g + self.n_u
    }

    pub fn get(&self, mode: NormalMode) -> u32 {
        match mode {
            NormalMode::Gerade => self.n_g,
            NormalMode::Ungerade => self.n_u,
        }
    }

    /// Column label `E_<n_g>_<n_u>`.
    pub fn label(&self) -> String {
        format!("E_{}_{}", self.n_g, self.n_u)
    }

    /// All states with n_g + n_u ≤ `max_polyad`, by polyad then n_g descending.
    pub fn up_to_polyad(max_polyad: u32) -> Vec<Self> {
        (0..=max_polyad)
            .flat_map(|p| (0..=p).rev().map(move |ng| Self::new(ng, p - ng)))
            .collect()
    }

    pub fn polyad_members(p: u32) -> Vec<Self> {
        (0..=p).rev().map(|ng| Self::new(ng, p - ng)).collect()
    }
}

/// Second moments of S and P in one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertainties<T> {
    pub sigma2_s: T,
    pub sigma2_p: T,
    pub sigma_sp: T,
}

impl<T: Real> Uncertainties<T> {
    /// σ²_S σ²_P − σ_SP².
    pub fn determinant(&self) -> T {
        self.sigma2_s * self.sigma2_p - self.sigma_sp * self.sigma_sp
    }

    /// Relative deviation of the determinant from (ħ/2)²(2n+1)².
    pub fn product_deviation(&self, n: u32) -> T {
        let target = (hbar::<T>() / T::lit(2.0) * level_factor::<T>(n)).powi(2);
        (self.determinant() - target).abs() / target
    }
}

fn level_factor<T: Real>(n: u32) -> T {
    T::lit(2.0 * f64::from(n) + 1.0)
}

pub fn uncertainties<T: Real>(st: &ErmakovState<T>, g: T, n: u32) -> Uncertainties<T> {
    let scale = hbar::<T>() / T::lit(2.0) * level_factor::<T>(n);
    let rate = st.alpha_dot / g;
    Uncertainties {
        sigma2_s: scale * st.alpha * st.alpha,
        sigma2_p: scale * (rate * rate + (st.alpha * st.alpha).recip()),
        sigma_sp: scale * rate * st.alpha,
    }
}

/// Uncertainties of mode `traj` in level n at every sample.
pub fn uncertainty_series<T: Real>(traj: &ErmakovTrajectory<T>, n: u32) -> Vec<Uncertainties<T>> {
    traj.states
        .iter()
        .zip(&traj.kinetic)
        .map(|(s, k)| uncertainties(s, k.g, n))
        .collect()
}

/// Contribution (G/2)σ²_P + (F/2)σ²_S of one mode.
fn mode_energy<T: Real>(traj: &ErmakovTrajectory<T>, i: usize, n: u32) -> T {
    let half = T::lit(0.5);
    let g = traj.kinetic[i].g;
    let u = uncertainties(&traj.states[i], g, n);
    half * (g * u.sigma2_p + traj.potential * u.sigma2_s)
}

/// ⟨H⟩(t) in amu·Å²/fs².
pub fn mean_hamiltonian<T: Real>(
    trajs: &ModeTrajectories<T>,
    occ: ModeOccupation,
) -> Result<Vec<T>> {
    trajs.check_aligned()?;
    Ok((0..trajs.times().len())
        .map(|i| mode_energy(&trajs.g, i, occ.n_g) + mode_energy(&trajs.u, i, occ.n_u))
        .collect())
}

/// ⟨P_L⟩(t) = (1/2ħ)Σ_γ[μω σ²_S + σ²_P/(μω)] − 1.
pub fn local_polyad_mean<T: Real>(
    trajs: &ModeTrajectories<T>,
    occ: ModeOccupation,
    mu: T,
    omega_ref: T,
) -> Result<Vec<T>> {
    trajs.check_aligned()?;
    let mw = mu * omega_ref;
    let two_hbar = T::lit(2.0) * hbar::<T>();
    let term = |traj: &ErmakovTrajectory<T>, i: usize, n: u32| {
        let u = uncertainties(&traj.states[i], traj.kinetic[i].g, n);
        mw * u.sigma2_s + u.sigma2_p / mw
    };
    Ok((0..trajs.times().len())
        .map(|i| (term(&trajs.g, i, occ.n_g) + term(&trajs.u, i, occ.n_u)) / two_hbar - T::one())
        .collect())
}

/// Both readings of the normal polyad.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalPolyad<T> {
    /// Expectation of the stationary operator η₁A_g†A_g + η₂A_u†A_u.
    pub stationary_op: Vec<T>,
    /// Expectation of the invariant operator, η₁n_g + η₂n_u.
    pub invariant: T,
}

/// ⟨P_N⟩(t) with the stationary operator built on α_γ0, and ⟨𝒫_N⟩.
///
/// The stationary branch is (1/2ħ)Σ η_γ[α_γ0²σ²_P + σ²_S/α_γ0²] − (η₁+η₂)/2.
pub fn normal_polyad_mean<T: Real>(
    trajs: &ModeTrajectories<T>,
    occ: ModeOccupation,
    w: ResonanceWeights,
    alpha0: [T; 2],
) -> Result<NormalPolyad<T>> {
    trajs.check_aligned()?;
    let two_hbar = T::lit(2.0) * hbar::<T>();
    let eta = |mode| T::lit(f64::from(w.weight(mode)));
    let offset = (eta(NormalMode::Gerade) + eta(NormalMode::Ungerade)) / T::lit(2.0);
    let term = |traj: &ErmakovTrajectory<T>, a0: T, i: usize, n: u32| {
        let u = uncertainties(&traj.states[i], traj.kinetic[i].g, n);
        let a2 = a0 * a0;
        eta(traj.mode) * (a2 * u.sigma2_p + u.sigma2_s / a2)
    };
    let stationary_op = (0..trajs.times().len())
        .map(|i| {
            (term(&trajs.g, alpha0[0], i, occ.n_g) + term(&trajs.u, alpha0[1], i, occ.n_u))
                / two_hbar
                - offset
        })
        .collect();
    let invariant = T::lit(f64::from(w.eta1 * occ.n_g + w.eta2 * occ.n_u));
    Ok(NormalPolyad {
        stationary_op,
        invariant,
    })
}

/// Ground-referenced fundamentals ⟨H⟩(1,0) − ⟨H⟩(0,0) and ⟨H⟩(0,1) − ⟨H⟩(0,0).
pub fn fundamentals<T: Real>(trajs: &ModeTrajectories<T>) -> Result<Vec<(T, T)>> {
    let e00 = mean_hamiltonian(trajs, ModeOccupation::GROUND)?;
    let e10 = mean_hamiltonian(trajs, ModeOccupation::new(1, 0))?;
    let e01 = mean_hamiltonian(trajs, ModeOccupation::new(0, 1))?;
    Ok(e00
        .iter()
        .zip(&e10)
        .zip(&e01)
        .map(|((&z, &g), &u)| (g - z, u - z))
        .collect())
}

/// ζ(t) from the ground-referenced fundamentals.
pub fn zeta_from_trajectories<T: Real>(trajs: &ModeTrajectories<T>) -> Result<Vec<T>> {
    Ok(fundamentals(trajs)?
        .into_iter()
        .map(|(g, u)| zeta_stationary(g, u))
        .collect())
}

/// ΔE(t)/Ē(t) of the fundamentals.
pub fn splitting_ratio<T: Real>(trajs: &ModeTrajectories<T>) -> Result<Vec<T>> {
    Ok(fundamentals(trajs)?
        .into_iter()
        .map(|(g, u)| (g - u).abs() / ((g + u) / T::lit(2.0)))
        .collect())
}

/// Integrates the molecule along `schedule` and returns (times, ζ(t)).
pub fn zeta_t<T: Real>(
    spec: &MoleculeSpec<T>,
    schedule: &crate::schedule::AngleSchedule<T>,
    cfg: &crate::ermakov::SolverConfig<T>,
    t_start: T,
    t_end: T,
) -> Result<(Vec<T>, Vec<T>)> {
    let trajs = crate::ermakov::integrate(spec, schedule, cfg, t_start, t_end)?;
    let zeta = zeta_from_trajectories(&trajs)?;
    Ok((trajs.g.times, zeta))
}

/// Stationary energies on an angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable<T> {
    pub theta_deg: Vec<T>,
    pub states: Vec<ModeOccupation>,
    /// `energies[i][j]`: state j at angle i, amu·Å²/fs².
    pub energies: Vec<Vec<T>>,
}

/// E(n_g, n_u; θ) = ħω_g(θ)(n_g+½) + ħω_u(θ)(n_u+½) with F frozen.
pub fn energy_correlation<T: Real>(
    spec: &MoleculeSpec<T>,
    theta_grid: &[T],
    states: &[ModeOccupation],
) -> Result<CorrelationTable<T>> {
    let h = hbar::<T>();
    let half = T::lit(0.5);
    let energies = theta_grid
        .iter()
        .map(|&theta| {
            let (wg, wu) = spec.normal_frequencies(theta)?;
            Ok(states
                .iter()
                .map(|s| {
                    h * wg * (T::lit(f64::from(s.n_g)) + half)
                        + h * wu * (T::lit(f64::from(s.n_u)) + half)
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    Ok(CorrelationTable {
        theta_deg: theta_grid.to_vec(),
        states: states.to_vec(),
        energies,
    })
}

/// Per-state time series of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct StateObservables<T> {
    pub occ: ModeOccupation,
    pub uncertainties_g: Vec<Uncertainties<T>>,
    pub uncertainties_u: Vec<Uncertainties<T>>,
    pub mean_h: Vec<T>,
    pub mean_pl: Vec<T>,
    pub pn: NormalPolyad<T>,
}

/// Worst-case invariant violations over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantSummary {
    pub max_uncertainty_deviation: f64,
    /// Drift of the companion's scaled Wronskian.
    pub max_wronskian_drift: f64,
    /// Lewis-invariant and solution mismatch between trajectory and companion.
    pub max_companion_deviation: f64,
    /// |⟨P_N⟩(t₀) − ⟨𝒫_N⟩| over states.
    pub max_pn_mismatch_t0: f64,
}

impl InvariantSummary {
    pub fn merge(&mut self, other: &Self) {
        self.max_uncertainty_deviation = self
            .max_uncertainty_deviation
            .max(other.max_uncertainty_deviation);
        self.max_wronskian_drift = self.max_wronskian_drift.max(other.max_wronskian_drift);
        self.max_companion_deviation = self
            .max_companion_deviation
            .max(other.max_companion_deviation);
        self.max_pn_mismatch_t0 = self.max_pn_mismatch_t0.max(other.max_pn_mismatch_t0);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries<T> {
    pub times: Vec<T>,
    pub theta_deg: Vec<T>,
    pub states: Vec<StateObservables<T>>,
    pub zeta: Vec<T>,
    pub summary: InvariantSummary,
}

/// Evaluates every observable for `states` on a pair of trajectories.
pub fn observables<T: Real>(
    spec: &MoleculeSpec<T>,
    schedule: &crate::schedule::AngleSchedule<T>,
    trajs: &ModeTrajectories<T>,
    states: &[ModeOccupation],
    w: ResonanceWeights,
) -> Result<ObservableSeries<T>> {
    trajs.check_aligned()?;
    if trajs.times().is_empty() {
        return Err(Error::MisalignedSeries("empty trajectory".into()));
    }
    let mu = spec.reduced_mass();
    let omega_ref = spec.omega0();
    let alpha0 = [trajs.g.initial().alpha, trajs.u.initial().alpha];
    let mut summary = InvariantSummary::default();
    for traj in [&trajs.g, &trajs.u] {
        let check = crate::ermakov::companion_linear_check(traj);
        summary.max_wronskian_drift = summary
            .max_wronskian_drift
            .max(check.wronskian_drift.to_f64_lossy());
        summary.max_companion_deviation = summary
            .max_companion_deviation
            .max(check.trajectory_deviation().to_f64_lossy());
    }

    let mut out = Vec::with_capacity(states.len());
    for &occ in states {
        let ug = uncertainty_series(&trajs.g, occ.n_g);
        let uu = uncertainty_series(&trajs.u, occ.n_u);
        for u in &ug {
            summary.max_uncertainty_deviation = summary
                .max_uncertainty_deviation
                .max(u.product_deviation(occ.n_g).to_f64_lossy());
        }
        for u in &uu {
            summary.max_uncertainty_deviation = summary
                .max_uncertainty_deviation
                .max(u.product_deviation(occ.n_u).to_f64_lossy());
        }
        let pn = normal_polyad_mean(trajs, occ, w, alpha0)?;
        summary.max_pn_mismatch_t0 = summary
            .max_pn_mismatch_t0
            .max((pn.stationary_op[0] - pn.invariant).abs().to_f64_lossy());
        out.push(StateObservables {
            occ,
            uncertainties_g: ug,
            uncertainties_u: uu,
            mean_h: mean_hamiltonian(trajs, occ)?,
            mean_pl: local_polyad_mean(trajs, occ, mu, omega_ref)?,
            pn,
        });
    }
    Ok(ObservableSeries {
        times: trajs.times().to_vec(),
        theta_deg: trajs
            .times()
            .iter()
            .map(|&t| schedule.theta_at(t))
            .collect(),
        states: out,
        zeta: zeta_from_trajectories(trajs)?,
        summary,
    })
}
