//! Run configurations, orchestration and output assembly for the CLI.
//!
//! A configuration is a flat, sectioned TOML file:
//!
//! ```toml
//! [molecule]
//! name = "H2O"
//!
//! [schedule]
//! kind = "adiabatic"
//! k = 0.05
//!
//! [run]
//! max_polyad = 4
//! t_start = -200.0
//! t_end = 400.0
//!
//! [outputs]
//! write = ["energies", "polyads", "zeta"]
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::ResonanceWeights;
use crate::dynamics::{
    energy_correlation, observables, InvariantSummary, ModeOccupation, ObservableSeries,
};
use crate::ermakov::{integrate, ModeTrajectories, SolverConfig};
use crate::error::{Error, Result};
use crate::molecule::{builtin, zeta_stationary, MoleculeFile, MoleculeSpec, NormalMode, TABLE1};
use crate::ode::StepStats;
use crate::schedule::{AngleSchedule, ScheduleKind, DEFAULT_ADIABATIC_RATE};
use crate::tabular::{fmt_g, render};
use crate::units::{internal_energy_to_wavenumber, PhysicalConstants};
use crate::wavefunction::{psi_at, write_density_csv};

/// Largest tolerated |W − 1| of the linear companion, and of the
/// trajectory's mismatch against it.
pub const WRONSKIAN_BUDGET: f64 = 1e-7;
/// Largest tolerated relative error of σ²_Sσ²_P − σ_SP².
pub const UNCERTAINTY_BUDGET: f64 = 1e-9;
/// Largest tolerated |⟨P_N⟩(t₀) − ⟨𝒫_N⟩|.
pub const POLYAD_BUDGET: f64 = 1e-10;

pub const OUTPUT_KINDS: [&str; 6] = [
    "energies",
    "uncertainties",
    "polyads",
    "zeta",
    "wavefunction",
    "correlation",
];

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Path of a molecule file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_terminal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_central: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_rr_aj: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_rrp_aj: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetaf_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_nu1_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_nu3_cm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default = "default_kind")]
    pub kind: String,
    /// Overrides the molecule's θ₀.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetaf_deg: Option<f64>,
    #[serde(default)]
    pub t0: f64,
    /// End of the linear ramp; defaults to t0 + 2/k.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf: Option<f64>,
    #[serde(default = "default_rate")]
    pub k: f64,
}

fn default_kind() -> String {
    "adiabatic".into()
}

fn default_rate() -> f64 {
    DEFAULT_ADIABATIC_RATE
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            theta0_deg: None,
            thetaf_deg: None,
            t0: 0.0,
            tf: None,
            k: default_rate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub output_stride: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::<f64>::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step: d.max_step,
            output_stride: d.output_stride,
        }
    }
}

impl From<SolverSection> for SolverConfig<f64> {
    fn from(s: SolverSection) -> Self {
        Self {
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            max_step: s.max_step,
            output_stride: s.output_stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Explicit (n_g, n_u) pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<[u32; 2]>>,
    /// Every state with n_g + n_u ≤ max_polyad; used when `states` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_polyad: Option<u32>,
    /// Polyad compared across schedules by `compare`.
    #[serde(default = "default_polyad")]
    pub polyad: u32,
    pub t_start: f64,
    pub t_end: f64,
    #[serde(default = "default_eta")]
    pub eta: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Vec<f64>>,
    /// Grid size when `theta_grid` is absent: θ₀ → θ_f in this many points.
    #[serde(default = "default_theta_points")]
    pub theta_points: usize,
}

fn default_polyad() -> u32 {
    4
}

fn default_eta() -> [u32; 2] {
    [1, 1]
}

fn default_theta_points() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_outputs")]
    pub write: Vec<String>,
    /// Append cm⁻¹ columns to energy tables.
    #[serde(default)]
    pub cm1: bool,
    /// Sample times (fs) of wavefunction slices; defaults to t_start and t_end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavefunction_times: Option<Vec<f64>>,
    #[serde(default = "default_wavefunction_points")]
    pub wavefunction_points: usize,
}

fn default_outputs() -> Vec<String> {
    ["energies", "polyads", "zeta"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn default_wavefunction_points() -> usize {
    256
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            write: default_outputs(),
            cm1: false,
            wavefunction_times: None,
            wavefunction_points: default_wavefunction_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub molecule: MoleculeSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub run: RunSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

/// A configuration with every reference resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub spec: MoleculeSpec<f64>,
    pub schedule: AngleSchedule<f64>,
    pub solver: SolverConfig<f64>,
    pub states: Vec<ModeOccupation>,
    pub weights: ResonanceWeights,
    pub t_start: f64,
    pub t_end: f64,
}

impl RunConfig {
    /// Parses a config or a manifest written by a previous run.
    pub fn parse(text: &str) -> Result<Self> {
        match toml::from_str::<Self>(text) {
            Ok(cfg) => Ok(cfg),
            Err(e) => match toml::from_str::<RunManifest>(text) {
                Ok(m) if text.contains("[manifest]") => Ok(m.config),
                _ => Err(Error::Config(format!("config: {e}"))),
            },
        }
    }

    /// Loads a config file; a `molecule.file` entry is resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg =
            Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(file) = cfg.molecule.file.take() {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            let mol = MoleculeFile::load(&base.join(&file))?;
            cfg.molecule = MoleculeSection {
                name: Some(mol.name),
                file: None,
                m_terminal: Some(mol.m_terminal),
                m_central: Some(mol.m_central),
                f_rr_aj: Some(mol.f_rr_aj),
                f_rrp_aj: Some(mol.f_rrp_aj),
                theta0_deg: Some(mol.theta0_deg),
                thetaf_deg: Some(mol.thetaf_deg),
                e_nu1_cm: mol.e_nu1_cm,
                e_nu3_cm: mol.e_nu3_cm,
            };
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Replaces rel_tol, scaling abs_tol to keep their ratio.
    pub fn override_tolerance(&mut self, rel_tol: f64) {
        let ratio = self.solver.abs_tol / self.solver.rel_tol;
        self.solver.rel_tol = rel_tol;
        self.solver.abs_tol = rel_tol * ratio;
    }

    pub fn resolve_molecule(&self) -> Result<MoleculeSpec<f64>> {
        let m = &self.molecule;
        if m.file.is_some() {
            return Err(Error::Config(
                "molecule.file must be resolved with RunConfig::load".into(),
            ));
        }
        let inline = [m.m_terminal, m.m_central, m.f_rr_aj, m.f_rrp_aj];
        if inline.iter().all(Option::is_some) {
            let spec = MoleculeFile {
                name: m.name.clone().unwrap_or_else(|| "custom".into()),
                m_terminal: m.m_terminal.unwrap_or_default(),
                m_central: m.m_central.unwrap_or_default(),
                f_rr_aj: m.f_rr_aj.unwrap_or_default(),
                f_rrp_aj: m.f_rrp_aj.unwrap_or_default(),
                theta0_deg: m.theta0_deg.ok_or_else(|| {
                    Error::Config("molecule.theta0_deg is required inline".into())
                })?,
                thetaf_deg: m.thetaf_deg.ok_or_else(|| {
                    Error::Config("molecule.thetaf_deg is required inline".into())
                })?,
                e_nu1_cm: m.e_nu1_cm,
                e_nu3_cm: m.e_nu3_cm,
            };
            return spec.to_spec();
        }
        if inline.iter().any(Option::is_some) {
            return Err(Error::Config(
                "molecule: inline specs need m_terminal, m_central, f_rr_aj and f_rrp_aj together"
                    .into(),
            ));
        }
        let name = m
            .name
            .as_deref()
            .ok_or_else(|| Error::Config("molecule.name is required".into()))?;
        let mut spec = builtin::<f64>(name).ok_or_else(|| {
            Error::Config(format!(
                "molecule.name: unknown molecule `{name}` (expected CO2, NO2, O3 or H2O)"
            ))
        })?;
        if let Some(t) = m.theta0_deg {
            spec.theta0_deg = t;
        }
        if let Some(t) = m.thetaf_deg {
            spec.thetaf_deg = t;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn schedule_for(
        &self,
        spec: &MoleculeSpec<f64>,
        kind: ScheduleKind,
    ) -> Result<AngleSchedule<f64>> {
        let s = &self.schedule;
        let theta0 = s.theta0_deg.unwrap_or(spec.theta0_deg);
        let thetaf = s.thetaf_deg.unwrap_or(spec.thetaf_deg);
        match kind {
            ScheduleKind::Sudden => Ok(AngleSchedule::sudden(theta0, thetaf, s.t0)),
            ScheduleKind::Linear => {
                AngleSchedule::linear(theta0, thetaf, s.t0, s.tf.unwrap_or(s.t0 + 2.0 / s.k))
            }
            ScheduleKind::Adiabatic => {
                let mut sched = AngleSchedule::adiabatic(theta0, thetaf, s.k)?;
                sched.t0 = s.t0;
                Ok(sched)
            }
        }
    }

    pub fn schedule_kind(&self) -> Result<ScheduleKind> {
        ScheduleKind::parse(&self.schedule.kind).ok_or_else(|| {
            Error::Config(format!(
                "schedule.kind: `{}` is not one of sudden, linear, adiabatic",
                self.schedule.kind
            ))
        })
    }

    pub fn states(&self) -> Result<Vec<ModeOccupation>> {
        let states: Vec<ModeOccupation> = match (&self.run.states, self.run.max_polyad) {
            (Some(list), _) => list
                .iter()
                .map(|[g, u]| ModeOccupation::new(*g, *u))
                .collect(),
            (None, Some(p)) => ModeOccupation::up_to_polyad(p),
            (None, None) => {
                return Err(Error::Config(
                    "run: give either `states` or `max_polyad`".into(),
                ))
            }
        };
        if states.is_empty() {
            return Err(Error::Config(
                "run.states: at least one state is required".into(),
            ));
        }
        Ok(states)
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let spec = self.resolve_molecule()?;
        let schedule = self.schedule_for(&spec, self.schedule_kind()?)?;
        let solver: SolverConfig<f64> = self.solver.into();
        solver.validate()?;
        if !(self.run.t_start < self.run.t_end) {
            return Err(Error::Config(format!(
                "run: t_start = {} must be below t_end = {}",
                self.run.t_start, self.run.t_end
            )));
        }
        let weights = ResonanceWeights::new(self.run.eta[0], self.run.eta[1])
            .ok_or_else(|| Error::Config("run.eta: weights must be positive".into()))?;
        for w in &self.outputs.write {
            if !OUTPUT_KINDS.contains(&w.as_str()) {
                return Err(Error::Config(format!(
                    "outputs.write: unknown output `{w}`"
                )));
            }
        }
        Ok(ResolvedRun {
            spec,
            schedule,
            solver,
            states: self.states()?,
            weights,
            t_start: self.run.t_start,
            t_end: self.run.t_end,
        })
    }

    pub fn wants(&self, output: &str) -> bool {
        self.outputs.write.iter().any(|w| w == output)
    }

    fn theta_grid(&self, spec: &MoleculeSpec<f64>) -> Vec<f64> {
        if let Some(grid) = &self.run.theta_grid {
            return grid.clone();
        }
        let a = self.schedule.theta0_deg.unwrap_or(spec.theta0_deg);
        let b = self.schedule.thetaf_deg.unwrap_or(spec.thetaf_deg);
        let n = self.run.theta_points.max(2);
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsEcho {
    pub hbar: f64,
    pub planck: f64,
    pub c_angstrom_per_fs: f64,
    pub aj_per_internal_energy: f64,
    pub wavenumber_per_internal_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StatsEcho {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evaluations: u64,
}

impl From<StepStats> for StatsEcho {
    fn from(s: StepStats) -> Self {
        Self {
            accepted_steps: s.accepted,
            rejected_steps: s.rejected,
            rhs_evaluations: s.evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecksEcho {
    pub max_wronskian_drift: f64,
    pub max_companion_deviation: f64,
    pub max_uncertainty_deviation: f64,
    pub max_pn_mismatch_t0: f64,
    pub wronskian_budget: f64,
    pub uncertainty_budget: f64,
    pub within_budget: bool,
}

impl ChecksEcho {
    pub fn from_summary(s: &InvariantSummary) -> Self {
        let within = s.max_wronskian_drift < WRONSKIAN_BUDGET
            && s.max_companion_deviation < WRONSKIAN_BUDGET
            && s.max_uncertainty_deviation < UNCERTAINTY_BUDGET
            && s.max_pn_mismatch_t0 < POLYAD_BUDGET;
        Self {
            max_wronskian_drift: s.max_wronskian_drift,
            max_companion_deviation: s.max_companion_deviation,
            max_uncertainty_deviation: s.max_uncertainty_deviation,
            max_pn_mismatch_t0: s.max_pn_mismatch_t0,
            wronskian_budget: WRONSKIAN_BUDGET,
            uncertainty_budget: UNCERTAINTY_BUDGET,
            within_budget: within,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSection {
    pub command: String,
    pub version: String,
    pub files: Vec<String>,
    pub constants: ConstantsEcho,
    pub solver_stats: StatsEcho,
    pub checks: ChecksEcho,
}

/// Config echo plus run metadata; loadable as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub config: RunConfig,
    pub manifest: ManifestSection,
}

impl RunManifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))
    }
}

/// Named text artifacts of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub manifest: RunManifest,
}

impl RunOutput {
    pub fn within_budget(&self) -> bool {
        self.manifest.manifest.checks.within_budget
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.as_str())
    }

    /// Writes every file and `manifest.toml` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        std::fs::write(dir.join("manifest.toml"), self.manifest.to_toml())?;
        Ok(())
    }
}

fn constants_echo() -> ConstantsEcho {
    let c = PhysicalConstants::<f64>::codata2018();
    ConstantsEcho {
        hbar: c.hbar,
        planck: c.planck,
        c_angstrom_per_fs: c.c_angstrom_per_fs,
        aj_per_internal_energy: c.aj_per_internal_energy,
        wavenumber_per_internal_energy: c.wavenumber_per_internal_energy,
    }
}

fn manifest(
    cfg: &RunConfig,
    command: &str,
    files: &[(String, String)],
    stats: StepStats,
    summary: &InvariantSummary,
) -> RunManifest {
    RunManifest {
        config: cfg.clone(),
        manifest: ManifestSection {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            files: files.iter().map(|(n, _)| n.clone()).collect(),
            constants: constants_echo(),
            solver_stats: stats.into(),
            checks: ChecksEcho::from_summary(summary),
        },
    }
}

fn cm1(e: f64) -> f64 {
    internal_energy_to_wavenumber(e)
}

fn energies_csv(obs: &ObservableSeries<f64>, with_cm1: bool) -> String {
    let mut header = vec!["t_fs".to_string(), "theta_deg".to_string()];
    header.extend(obs.states.iter().map(|s| s.occ.label()));
    if with_cm1 {
        header.extend(obs.states.iter().map(|s| format!("{}_cm1", s.occ.label())));
    }
    let rows: Vec<Vec<f64>> = (0..obs.times.len())
        .map(|i| {
            let mut row = vec![obs.times[i], obs.theta_deg[i]];
            row.extend(obs.states.iter().map(|s| s.mean_h[i]));
            if with_cm1 {
                row.extend(obs.states.iter().map(|s| cm1(s.mean_h[i])));
            }
            row
        })
        .collect();
    render(&header, &rows)
}

fn suffix(occ: ModeOccupation) -> String {
    format!("{}_{}", occ.n_g, occ.n_u)
}

fn uncertainties_csv(obs: &ObservableSeries<f64>) -> String {
    let mut header = vec!["t_fs".to_string()];
    for s in &obs.states {
        let k = suffix(s.occ);
        for m in ["g", "u"] {
            header.push(format!("sigma2_S_{m}_{k}"));
            header.push(format!("sigma2_P_{m}_{k}"));
            header.push(format!("sigma_SP_{m}_{k}"));
        }
    }
    let rows: Vec<Vec<f64>> = (0..obs.times.len())
        .map(|i| {
            let mut row = vec![obs.times[i]];
            for s in &obs.states {
                for u in [&s.uncertainties_g[i], &s.uncertainties_u[i]] {
                    row.extend([u.sigma2_s, u.sigma2_p, u.sigma_sp]);
                }
            }
            row
        })
        .collect();
    render(&header, &rows)
}

fn polyads_csv(obs: &ObservableSeries<f64>) -> String {
    let mut header = vec!["t_fs".to_string()];
    for s in &obs.states {
        let k = suffix(s.occ);
        header.extend([
            format!("PL_mean_{k}"),
            format!("PN_invariant_{k}"),
            format!("PN_stationary_op_{k}"),
        ]);
    }
    let rows: Vec<Vec<f64>> = (0..obs.times.len())
        .map(|i| {
            let mut row = vec![obs.times[i]];
            for s in &obs.states {
                row.extend([s.mean_pl[i], s.pn.invariant, s.pn.stationary_op[i]]);
            }
            row
        })
        .collect();
    render(&header, &rows)
}

fn zeta_csv(obs: &ObservableSeries<f64>) -> String {
    let rows: Vec<Vec<f64>> = obs
        .times
        .iter()
        .zip(&obs.zeta)
        .map(|(&t, &z)| vec![t, z])
        .collect();
    render(&["t_fs".into(), "zeta".into()], &rows)
}

fn correlation_csv(
    spec: &MoleculeSpec<f64>,
    grid: &[f64],
    states: &[ModeOccupation],
    with_cm1: bool,
) -> Result<String> {
    let table = energy_correlation(spec, grid, states)?;
    let mut header = vec!["theta_deg".to_string()];
    header.extend(states.iter().map(|s| s.label()));
    if with_cm1 {
        header.extend(states.iter().map(|s| format!("{}_cm1", s.label())));
    }
    let rows: Vec<Vec<f64>> = table
        .theta_deg
        .iter()
        .zip(&table.energies)
        .map(|(&theta, e)| {
            let mut row = vec![theta];
            row.extend(e.iter().copied());
            if with_cm1 {
                row.extend(e.iter().map(|&v| cm1(v)));
            }
            row
        })
        .collect();
    Ok(render(&header, &rows))
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    let mut best = 0;
    for (i, &ti) in times.iter().enumerate() {
        if (ti - t).abs() < (times[best] - t).abs() {
            best = i;
        }
    }
    best
}

fn wavefunction_csv(
    cfg: &RunConfig,
    run: &ResolvedRun,
    trajs: &ModeTrajectories<f64>,
) -> Result<String> {
    let sample_times = cfg
        .outputs
        .wavefunction_times
        .clone()
        .unwrap_or_else(|| vec![run.t_start, run.t_end]);
    let mut grids = Vec::new();
    for t in sample_times {
        let i = nearest_index(trajs.times(), t);
        for mode in NormalMode::BOTH {
            let levels: BTreeSet<u32> = run.states.iter().map(|s| s.get(mode)).collect();
            for n in levels {
                grids.push(psi_at(
                    trajs.mode(mode),
                    i,
                    n,
                    cfg.outputs.wavefunction_points,
                )?);
            }
        }
    }
    let mut buf = Vec::new();
    write_density_csv(&mut buf, &grids)?;
    Ok(String::from_utf8(buf).expect("ASCII CSV"))
}

/// Integrates one configuration and renders every requested output.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let r = cfg.resolve()?;
    let trajs = integrate(&r.spec, &r.schedule, &r.solver, r.t_start, r.t_end)?;
    let obs = observables(&r.spec, &r.schedule, &trajs, &r.states, r.weights)?;
    let mut files = Vec::new();
    for kind in OUTPUT_KINDS {
        if !cfg.wants(kind) {
            continue;
        }
        let text = match kind {
            "energies" => energies_csv(&obs, cfg.outputs.cm1),
            "uncertainties" => uncertainties_csv(&obs),
            "polyads" => polyads_csv(&obs),
            "zeta" => zeta_csv(&obs),
            "wavefunction" => wavefunction_csv(cfg, &r, &trajs)?,
            "correlation" => correlation_csv(
                &r.spec,
                &cfg.theta_grid(&r.spec),
                &r.states,
                cfg.outputs.cm1,
            )?,
            _ => unreachable!(),
        };
        files.push((format!("{kind}.csv"), text));
    }
    let manifest = manifest(cfg, "run", &files, trajs.stats(), &obs.summary);
    Ok(RunOutput { files, manifest })
}

/// Runs the three schedule kinds on the members of `run.polyad` and aligns
/// their ⟨H⟩ columns.
pub fn compare(cfg: &RunConfig) -> Result<RunOutput> {
    let base = cfg.resolve()?;
    let states = ModeOccupation::polyad_members(cfg.run.polyad);
    let runs = ScheduleKind::ALL
        .par_iter()
        .map(|&kind| {
            let sched = cfg.schedule_for(&base.spec, kind)?;
            let trajs = integrate(&base.spec, &sched, &base.solver, base.t_start, base.t_end)?;
            let obs = observables(&base.spec, &sched, &trajs, &states, base.weights)?;
            Ok((kind, trajs.stats(), obs))
        })
        .collect::<Result<Vec<_>>>()?;

    let times = &runs[0].2.times;
    for (_, _, obs) in &runs {
        if obs.times != *times {
            return Err(Error::MisalignedSeries(
                "schedules produced different grids".into(),
            ));
        }
    }
    let mut header = vec!["t_fs".to_string()];
    for (kind, _, obs) in &runs {
        header.push(format!("{}_theta_deg", kind.name()));
        header.extend(
            obs.states
                .iter()
                .map(|s| format!("{}_{}", kind.name(), s.occ.label())),
        );
    }
    let rows: Vec<Vec<f64>> = (0..times.len())
        .map(|i| {
            let mut row = vec![times[i]];
            for (_, _, obs) in &runs {
                row.push(obs.theta_deg[i]);
                row.extend(obs.states.iter().map(|s| s.mean_h[i]));
            }
            row
        })
        .collect();
    let mut stats = StepStats::default();
    let mut summary = InvariantSummary::default();
    for (_, s, obs) in &runs {
        stats.merge(*s);
        summary.merge(&obs.summary);
    }
    let files = vec![("compare.csv".to_string(), render(&header, &rows))];
    let manifest = manifest(cfg, "compare", &files, stats, &summary);
    Ok(RunOutput { files, manifest })
}

/// Stationary energy correlation over the configured angle grid.
pub fn correlate(cfg: &RunConfig) -> Result<RunOutput> {
    let spec = cfg.resolve_molecule()?;
    let states = cfg.states()?;
    let text = correlation_csv(&spec, &cfg.theta_grid(&spec), &states, cfg.outputs.cm1)?;
    let files = vec![("correlation.csv".to_string(), text)];
    let manifest = manifest(
        cfg,
        "correlate",
        &files,
        StepStats::default(),
        &InvariantSummary::default(),
    );
    Ok(RunOutput { files, manifest })
}

/// Recomputed versus tabulated parameters of one built-in molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Comparison {
    pub name: &'static str,
    /// (computed, tabulated) pairs.
    pub g_rr: (f64, f64),
    pub g_rrp: (f64, f64),
    pub x_f: (f64, f64),
    pub x_g: (f64, f64),
    /// ζ from the tabulated fundamentals.
    pub zeta: (f64, f64),
    /// ζ of the harmonic model at θ₀.
    pub zeta_model: f64,
}

impl Table1Comparison {
    pub fn max_parameter_deviation(&self) -> f64 {
        [self.g_rr, self.g_rrp, self.x_f, self.x_g]
            .iter()
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn zeta_deviation(&self) -> f64 {
        (self.zeta.0 - self.zeta.1).abs()
    }
}

pub fn table1_comparison() -> Vec<Table1Comparison> {
    TABLE1
        .iter()
        .map(|row| {
            let spec: MoleculeSpec<f64> = row.to_spec();
            let g = spec.g_matrix(row.theta0);
            let x = spec.coupling_ratios(row.theta0);
            let (wg, wu) = spec
                .normal_frequencies(row.theta0)
                .expect("table rows are physical");
            Table1Comparison {
                name: row.name,
                g_rr: (g.g_rr, row.g_rr),
                g_rrp: (g.g_rrp, row.g_rrp),
                x_f: (x.x_f, row.x_f),
                x_g: (x.x_g, row.x_g),
                zeta: (zeta_stationary(row.e_nu1, row.e_nu3), row.zeta),
                zeta_model: zeta_stationary(wg, wu),
            }
        })
        .collect()
}

pub fn table1_report() -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "mol",
        "g_rr",
        "table",
        "g_rr'",
        "table",
        "x_f",
        "table",
        "x_g",
        "table",
        "zeta",
        "table",
        "model"
    ));
    let mut worst = (0.0_f64, 0.0_f64);
    for c in table1_comparison() {
        let cell = |v: f64| fmt_g(v, 4);
        out.push_str(&format!(
            "{:<5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            c.name,
            cell(c.g_rr.0),
            cell(c.g_rr.1),
            cell(c.g_rrp.0),
            cell(c.g_rrp.1),
            cell(c.x_f.0),
            cell(c.x_f.1),
            cell(c.x_g.0),
            cell(c.x_g.1),
            cell(c.zeta.0),
            cell(c.zeta.1),
            cell(c.zeta_model),
        ));
        worst.0 = worst.0.max(c.max_parameter_deviation());
        worst.1 = worst.1.max(c.zeta_deviation());
    }
    out.push_str(&format!(
        "max |g, x| deviation {:.2e}; max zeta deviation {:.2e}\n",
        worst.0, worst.1
    ));
    out
}
