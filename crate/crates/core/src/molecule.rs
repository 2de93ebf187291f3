//! Symmetric A₂B triatomics: Wilson G elements, force constants and the
//! stationary normal-mode frequencies of the stretching block.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::units::{aj_to_internal, internal_to_aj};

/// Symmetry label of a stretching normal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalMode {
    /// Symmetric stretch, S_g = (q₁ + q₂)/√2.
    Gerade,
    /// Antisymmetric stretch, S_u = (q₁ − q₂)/√2.
    Ungerade,
}

impl NormalMode {
    pub const BOTH: [NormalMode; 2] = [NormalMode::Gerade, NormalMode::Ungerade];

    /// +1 for gerade, −1 for ungerade: the sign of the off-diagonal term.
    pub fn sign<T: Real>(self) -> T {
        match self {
            NormalMode::Gerade => T::one(),
            NormalMode::Ungerade => -T::one(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NormalMode::Gerade => "g",
            NormalMode::Ungerade => "u",
        }
    }
}

/// Spectroscopic identity of a run.
///
/// Force constants are held in amu·fs⁻² (i.e. amu·Å²·fs⁻² per Å²); use
/// [`MoleculeSpec::from_table_units`] to build one from aJ/Å² values.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSpec<T> {
    pub name: String,
    /// Mass of each terminal atom A (amu).
    pub m_terminal: T,
    /// Mass of the central atom B (amu).
    pub m_central: T,
    /// Diagonal stretch force constant, internal units.
    pub f_rr: T,
    /// Stretch–stretch coupling force constant, internal units.
    pub f_rrp: T,
    pub theta0_deg: T,
    pub thetaf_deg: T,
    /// Observed symmetric fundamental (cm⁻¹), if known.
    pub e_nu1_cm: Option<T>,
    /// Observed antisymmetric fundamental (cm⁻¹), if known.
    pub e_nu3_cm: Option<T>,
}

/// Wilson G matrix elements of the two stretches (amu⁻¹).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMatrixElements<T> {
    pub g_rr: T,
    pub g_rrp: T,
}

impl<T: Real> GMatrixElements<T> {
    /// Mass-type parameter μ = 1/g_rr.
    pub fn reduced_mass(&self) -> T {
        self.g_rr.recip()
    }

    /// Kinetic coefficient of the given normal mode, g_rr ± g_rr'.
    pub fn normal(&self, mode: NormalMode) -> T {
        self.g_rr + mode.sign::<T>() * self.g_rrp
    }
}

/// Dimensionless couplings x_f = f_rr'/f_rr and x_g = g_rr'/g_rr.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRatios<T> {
    pub x_f: T,
    pub x_g: T,
}

impl<T: Real> CouplingRatios<T> {
    pub fn scaled(self, factor: T) -> Self {
        Self {
            x_f: self.x_f * factor,
            x_g: self.x_g * factor,
        }
    }

    pub(crate) fn check_physical(&self) -> Result<()> {
        for sign in [1.0, -1.0] {
            let s = T::lit(sign);
            let factor = (T::one() + s * self.x_f) * (T::one() + s * self.x_g);
            if !(factor > T::zero()) {
                return Err(Error::DegenerateFrequency {
                    sign: if sign > 0.0 { '+' } else { '-' },
                    factor: factor.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

/// G elements at bond angle `theta_deg`.
pub fn g_matrix<T: Real>(m_terminal: T, m_central: T, theta_deg: T) -> GMatrixElements<T> {
    GMatrixElements {
        g_rr: m_terminal.recip() + m_central.recip(),
        g_rrp: theta_deg.to_radians().cos() / m_central,
    }
}

pub fn coupling_ratios<T: Real>(f_rr: T, f_rrp: T, g: GMatrixElements<T>) -> CouplingRatios<T> {
    CouplingRatios {
        x_f: f_rrp / f_rr,
        x_g: g.g_rrp / g.g_rr,
    }
}

/// ζ = (2/π)·atan(ΔE/Ē) from two fundamentals in any common unit.
pub fn zeta_stationary<T: Real>(e_low: T, e_high: T) -> T {
    let two = T::lit(2.0);
    let delta = (e_high - e_low).abs();
    let mean = (e_high + e_low) / two;
    two / T::PI() * (delta / mean).atan()
}

impl<T: Real> MoleculeSpec<T> {
    /// Builds and validates a molecule from tabulated units (amu, aJ/Å², degrees, cm⁻¹).
    #[allow(clippy::too_many_arguments)]
    pub fn from_table_units(
        name: impl Into<String>,
        m_terminal: T,
        m_central: T,
        f_rr_aj: T,
        f_rrp_aj: T,
        theta0_deg: T,
        thetaf_deg: T,
        e_nu1_cm: Option<T>,
        e_nu3_cm: Option<T>,
    ) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            m_terminal,
            m_central,
            f_rr: aj_to_internal(f_rr_aj),
            f_rrp: aj_to_internal(f_rrp_aj),
            theta0_deg,
            thetaf_deg,
            e_nu1_cm,
            e_nu3_cm,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidMolecule {
                name: self.name.clone(),
                reason,
            })
        };
        let zero = T::zero();
        if !(self.m_terminal > zero && self.m_central > zero) {
            return fail(format!(
                "masses must be positive (got {}, {})",
                self.m_terminal, self.m_central
            ));
        }
        if !(self.f_rr > zero) {
            return fail(format!("f_rr must be positive (got {})", self.f_rr));
        }
        if !(self.f_rrp.abs() < self.f_rr) {
            return fail("|f_rr'| must be smaller than f_rr".to_string());
        }
        for (label, theta) in [("theta0", self.theta0_deg), ("thetaf", self.thetaf_deg)] {
            if !(theta > zero && theta <= T::lit(180.0)) {
                return fail(format!("{label} = {theta} deg is outside (0, 180]"));
            }
        }
        for e in [self.e_nu1_cm, self.e_nu3_cm].into_iter().flatten() {
            if !(e > zero) {
                return fail(format!("fundamental energies must be positive (got {e})"));
            }
        }
        Ok(())
    }

    pub fn f_rr_aj(&self) -> T {
        internal_to_aj(self.f_rr)
    }

    pub fn f_rrp_aj(&self) -> T {
        internal_to_aj(self.f_rrp)
    }

    pub fn g_matrix(&self, theta_deg: T) -> GMatrixElements<T> {
        g_matrix(self.m_terminal, self.m_central, theta_deg)
    }

    /// θ-independent diagonal element g_rr.
    pub fn g_rr(&self) -> T {
        self.m_terminal.recip() + self.m_central.recip()
    }

    pub fn reduced_mass(&self) -> T {
        self.g_rr().recip()
    }

    /// Uncoupled local frequency ω₀ = √(g_rr f_rr), fs⁻¹.
    pub fn omega0(&self) -> T {
        (self.g_rr() * self.f_rr).sqrt()
    }

    /// F_gg = f_rr + f_rr', F_uu = f_rr − f_rr'.
    pub fn potential(&self, mode: NormalMode) -> T {
        self.f_rr + mode.sign::<T>() * self.f_rrp
    }

    pub fn coupling_ratios(&self, theta_deg: T) -> CouplingRatios<T> {
        coupling_ratios(self.f_rr, self.f_rrp, self.g_matrix(theta_deg))
    }

    /// Harmonic normal frequencies (ω_g, ω_u) at bond angle `theta_deg`.
    pub fn normal_frequencies(&self, theta_deg: T) -> Result<(T, T)> {
        normal_frequencies(self.coupling_ratios(theta_deg), self.omega0())
    }

    /// Same molecule with x_f and x_g(θ) both multiplied by `factor` at every angle.
    ///
    /// f_rr' is scaled directly; x_g is scaled by raising m_central while
    /// adjusting m_terminal so that g_rr (and hence ω₀, μ) is unchanged.
    pub fn with_coupling_scale(&self, factor: T) -> Result<Self> {
        let g_rr = self.g_rr();
        let m_central = self.m_central / factor;
        let inv_terminal = g_rr - m_central.recip();
        if !(factor > T::zero() && inv_terminal > T::zero()) {
            return Err(Error::InvalidMolecule {
                name: self.name.clone(),
                reason: format!("coupling scale {factor} leaves no positive terminal mass"),
            });
        }
        let scaled = Self {
            name: format!("{}*{}", self.name, factor),
            m_terminal: inv_terminal.recip(),
            m_central,
            f_rrp: self.f_rrp * factor,
            e_nu1_cm: None,
            e_nu3_cm: None,
            ..self.clone()
        };
        scaled.validate()?;
        Ok(scaled)
    }
}

/// ω_g = ω₀√((1+x_f)(1+x_g)), ω_u = ω₀√((1−x_f)(1−x_g)).
pub fn normal_frequencies<T: Real>(x: CouplingRatios<T>, omega0: T) -> Result<(T, T)> {
    x.check_physical()?;
    let one = T::one();
    let g = ((one + x.x_f) * (one + x.x_g)).sqrt();
    let u = ((one - x.x_f) * (one - x.x_g)).sqrt();
    Ok((omega0 * g, omega0 * u))
}

/// One row of the published parameter table, verbatim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabulatedRow {
    pub name: &'static str,
    pub f_rr: f64,
    pub f_rrp: f64,
    pub x_f: f64,
    pub g_rr: f64,
    pub g_rrp: f64,
    pub x_g: f64,
    pub theta0: f64,
    pub thetaf: f64,
    pub e_nu1: f64,
    pub e_nu3: f64,
    pub zeta: f64,
    /// Masses (A, B) that reproduce the g columns.
    pub masses: (f64, f64),
}

pub const TABLE1: [TabulatedRow; 4] = [
    TabulatedRow {
        name: "CO2",
        f_rr: 15.97,
        f_rrp: 1.232,
        x_f: 0.077,
        g_rr: 0.1458,
        g_rrp: -0.083,
        x_g: -0.571,
        theta0: 180.0,
        thetaf: 104.5,
        e_nu1: 1285.4,
        e_nu3: 2349.1,
        zeta: 0.337,
        masses: (15.995, 12.000),
    },
    TabulatedRow {
        name: "NO2",
        f_rr: 10.91,
        f_rrp: 1.935,
        x_f: 0.177,
        g_rr: 0.1339,
        g_rrp: -0.050,
        x_g: -0.373,
        theta0: 134.3,
        thetaf: 104.5,
        e_nu1: 1319.8,
        e_nu3: 1619.0,
        zeta: 0.128,
        masses: (15.995, 14.003),
    },
    TabulatedRow {
        name: "O3",
        f_rr: 6.164,
        f_rrp: 1.603,
        x_f: 0.260,
        g_rr: 0.125,
        g_rrp: -0.028,
        x_g: -0.225,
        theta0: 116.8,
        thetaf: 180.0,
        e_nu1: 1104.3,
        e_nu3: 1038.7,
        zeta: 0.039,
        masses: (16.0, 16.0),
    },
    TabulatedRow {
        name: "H2O",
        f_rr: 8.093,
        f_rrp: -0.157,
        x_f: -0.019,
        g_rr: 1.063,
        g_rrp: -0.016,
        x_g: -0.015,
        theta0: 104.5,
        thetaf: 180.0,
        e_nu1: 3657.1,
        e_nu3: 3755.9,
        zeta: 0.017,
        masses: (1.0, 16.0),
    },
];

impl TabulatedRow {
    pub fn to_spec<T: Real>(&self) -> MoleculeSpec<T> {
        MoleculeSpec::from_table_units(
            self.name,
            T::lit(self.masses.0),
            T::lit(self.masses.1),
            T::lit(self.f_rr),
            T::lit(self.f_rrp),
            T::lit(self.theta0),
            T::lit(self.thetaf),
            Some(T::lit(self.e_nu1)),
            Some(T::lit(self.e_nu3)),
        )
        .expect("built-in table rows are valid")
    }
}

/// The four built-in molecules, in table order (CO₂, NO₂, O₃, H₂O).
pub fn builtin_table<T: Real>() -> Vec<MoleculeSpec<T>> {
    TABLE1.iter().map(TabulatedRow::to_spec).collect()
}

/// Looks up a built-in molecule by name, ignoring case and subscript styling.
pub fn builtin<T: Real>(name: &str) -> Option<MoleculeSpec<T>> {
    let key = normalize_name(name);
    TABLE1
        .iter()
        .find(|row| normalize_name(row.name) == key)
        .map(TabulatedRow::to_spec)
}

fn normalize_name(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '₂' => '2',
            '₃' => '3',
            c => c.to_ascii_uppercase(),
        })
        .filter(|c| !c.is_whitespace())
        .collect()
}

/// On-disk molecule description (flat key–value, TOML syntax).
#[derive(Debug, Clone, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeFile {
    pub name: String,
    pub m_terminal: f64,
    pub m_central: f64,
    pub f_rr_aj: f64,
    pub f_rrp_aj: f64,
    pub theta0_deg: f64,
    pub thetaf_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_nu1_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_nu3_cm: Option<f64>,
}

impl MoleculeFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("molecule file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_spec(&self) -> Result<MoleculeSpec<f64>> {
        MoleculeSpec::from_table_units(
            self.name.clone(),
            self.m_terminal,
            self.m_central,
            self.f_rr_aj,
            self.f_rrp_aj,
            self.theta0_deg,
            self.thetaf_deg,
            self.e_nu1_cm,
            self.e_nu3_cm,
        )
    }

    pub fn from_spec(spec: &MoleculeSpec<f64>) -> Self {
        Self {
            name: spec.name.clone(),
            m_terminal: spec.m_terminal,
            m_central: spec.m_central,
            f_rr_aj: spec.f_rr_aj(),
            f_rrp_aj: spec.f_rrp_aj(),
            theta0_deg: spec.theta0_deg,
            thetaf_deg: spec.thetaf_deg,
            e_nu1_cm: spec.e_nu1_cm,
            e_nu3_cm: spec.e_nu3_cm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{hbar, internal_energy_to_wavenumber};
    use approx::assert_abs_diff_eq;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn h2o() -> MoleculeSpec<f64> {
        builtin("H2O").unwrap()
    }

    #[test]
    fn builtin_rows() {
        let table = builtin_table::<f64>();
        assert_eq!(
            table.iter().map(|m| m.name.as_str()).collect::<Vec<_>>(),
            ["CO2", "NO2", "O3", "H2O"]
        );
        let co2 = &table[0];
        assert_relative_eq!(co2.f_rr_aj(), 15.97, max_relative = 1e-14);
        assert_eq!((co2.theta0_deg, co2.thetaf_deg), (180.0, 104.5));
        let w = h2o();
        assert_relative_eq!(w.f_rr_aj(), 8.093, max_relative = 1e-14);
        assert_relative_eq!(w.f_rrp_aj(), -0.157, max_relative = 1e-14);
        assert_eq!((w.theta0_deg, w.thetaf_deg), (104.5, 180.0));
        let o3 = builtin::<f64>("o₃").unwrap();
        assert_eq!((o3.e_nu1_cm, o3.e_nu3_cm), (Some(1104.3), Some(1038.7)));
    }

    #[test]
    fn g_matrix_values() {
        let g = g_matrix(15.995_f64, 12.0, 180.0);
        assert_abs_diff_eq!(g.g_rr, 0.1458, epsilon = 1e-4);
        assert_abs_diff_eq!(g.g_rrp, -0.0833, epsilon = 1e-4);
        assert_abs_diff_eq!(g_matrix(3.0_f64, 7.0, 90.0).g_rrp, 0.0, epsilon = 1e-16);
        let g = g_matrix(1.0_f64, 16.0, 104.5);
        assert_relative_eq!(g.g_rr, 1.0625, max_relative = 1e-15);
        assert_relative_eq!(g.g_rrp, -0.015_648_750_253_402_587, max_relative = 1e-12);
    }

    #[test]
    fn coupling_ratio_values() {
        let co2 = builtin::<f64>("CO2").unwrap().coupling_ratios(180.0);
        assert_abs_diff_eq!(co2.x_f, 0.0771, epsilon = 1e-4);
        assert_abs_diff_eq!(co2.x_g, -0.571, epsilon = 1e-3);
        let no2 = builtin::<f64>("NO2").unwrap().coupling_ratios(134.3);
        assert_abs_diff_eq!(no2.x_f, 0.177, epsilon = 1e-3);
        assert_abs_diff_eq!(no2.x_g, -0.373, epsilon = 1e-3);
        let x = coupling_ratios(2.0_f64, 0.0, g_matrix(1.0, 1.0, 90.0));
        assert_eq!(x.x_f, 0.0);
        assert_abs_diff_eq!(x.x_g, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn normal_frequency_values() {
        let x = CouplingRatios { x_f: 0.0, x_g: 0.0 };
        assert_eq!(normal_frequencies(x, 0.7_f64).unwrap(), (0.7, 0.7));

        let w = h2o();
        let (g, u) = w.normal_frequencies(104.5).unwrap();
        let to_cm = |om: f64| internal_energy_to_wavenumber(hbar::<f64>() * om);
        assert_relative_eq!(to_cm(g), 3_755.071_384_97, max_relative = 1e-9);
        assert_relative_eq!(to_cm(u), 3_885.448_850_91, max_relative = 1e-9);

        let o3 = builtin::<f64>("O3").unwrap();
        let (g, u) = o3.normal_frequencies(180.0).unwrap();
        assert_relative_eq!(g / o3.omega0(), 0.793_743_788_521_839, max_relative = 1e-12);
        assert_relative_eq!(u / o3.omega0(), 1.053_523_798_757_766, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_frequency_is_an_error() {
        let x = CouplingRatios {
            x_f: 0.2,
            x_g: -1.0,
        };
        assert!(matches!(
            normal_frequencies(x, 1.0_f64),
            Err(Error::DegenerateFrequency { sign: '+', .. })
        ));
        let x = CouplingRatios { x_f: 1.5, x_g: 0.0 };
        assert!(matches!(
            normal_frequencies(x, 1.0_f64),
            Err(Error::DegenerateFrequency { sign: '-', .. })
        ));
    }

    #[test]
    fn zeta_values() {
        assert_abs_diff_eq!(zeta_stationary(1285.4_f64, 2349.1), 0.337, epsilon = 5e-4);
        assert_eq!(zeta_stationary(1500.0_f64, 1500.0), 0.0);
        assert_abs_diff_eq!(zeta_stationary(1104.3_f64, 1038.7), 0.039, epsilon = 5e-4);
        for row in TABLE1 {
            assert_abs_diff_eq!(
                zeta_stationary(row.e_nu1, row.e_nu3),
                row.zeta,
                epsilon = 1e-3
            );
        }
    }

    #[test]
    fn table_regression() {
        for row in TABLE1 {
            let m: MoleculeSpec<f64> = row.to_spec();
            let g = m.g_matrix(row.theta0);
            let x = m.coupling_ratios(row.theta0);
            assert_abs_diff_eq!(g.g_rr, row.g_rr, epsilon = 3e-3);
            assert_abs_diff_eq!(g.g_rrp, row.g_rrp, epsilon = 3e-3);
            assert_abs_diff_eq!(x.x_f, row.x_f, epsilon = 3e-3);
            assert_abs_diff_eq!(x.x_g, row.x_g, epsilon = 3e-3);
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let bad =
            MoleculeSpec::from_table_units("x", 1.0_f64, -1.0, 1.0, 0.1, 100.0, 120.0, None, None);
        assert!(bad.is_err());
        let bad =
            MoleculeSpec::from_table_units("x", 1.0_f64, 1.0, 1.0, 1.0, 100.0, 120.0, None, None);
        assert!(bad.is_err());
        let bad =
            MoleculeSpec::from_table_units("x", 1.0_f64, 1.0, 1.0, 0.1, 0.0, 120.0, None, None);
        assert!(bad.is_err());
        let bad =
            MoleculeSpec::from_table_units("x", 1.0_f64, 1.0, 1.0, 0.1, 90.0, 181.0, None, None);
        assert!(bad.is_err());
    }

    #[test]
    fn molecule_file_is_strict() {
        let text = "name = \"HOH\"\nm_terminal = 1.0\nm_central = 16.0\nf_rr_aj = 8.093\n\
                    f_rrp_aj = -0.157\ntheta0_deg = 104.5\nthetaf_deg = 180.0\n";
        let file = MoleculeFile::parse(text).unwrap();
        let spec = file.to_spec().unwrap();
        assert_relative_eq!(spec.f_rr, h2o().f_rr, max_relative = 1e-15);
        assert_eq!(spec.e_nu1_cm, None);
        let err = MoleculeFile::parse(&format!("{text}colour = 3\n")).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        assert!(MoleculeFile::parse("name = \"x\"\n").is_err());
    }

    #[test]
    fn coupling_scale_preserves_local_parameters() {
        let o3 = builtin::<f64>("O3").unwrap();
        let half = o3.with_coupling_scale(0.5).unwrap();
        assert_relative_eq!(half.g_rr(), o3.g_rr(), max_relative = 1e-14);
        for theta in [116.8, 150.0, 180.0] {
            let a = o3.coupling_ratios(theta);
            let b = half.coupling_ratios(theta);
            assert_relative_eq!(b.x_f, 0.5 * a.x_f, max_relative = 1e-13);
            assert_relative_eq!(b.x_g, 0.5 * a.x_g, max_relative = 1e-13);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let w: MoleculeSpec<f32> = builtin("H2O").unwrap();
        let (g, u) = w.normal_frequencies(104.5).unwrap();
        let (g64, u64) = h2o().normal_frequencies(104.5).unwrap();
        assert_relative_eq!(g as f64, g64, max_relative = 1e-5);
        assert_relative_eq!(u as f64, u64, max_relative = 1e-5);
    }

    proptest! {
        #[test]
        fn frequencies_swap_under_sign_flip(xf in -0.9_f64..0.9, xg in -0.9_f64..0.9, w0 in 0.01_f64..2.0) {
            let (g, u) = normal_frequencies(CouplingRatios { x_f: xf, x_g: xg }, w0).unwrap();
            let (g2, u2) = normal_frequencies(CouplingRatios { x_f: -xf, x_g: -xg }, w0).unwrap();
            prop_assert!((g - u2).abs() <= 1e-14 * g.max(1.0));
            prop_assert!((u - g2).abs() <= 1e-14 * u.max(1.0));
            let product = w0 * w0 * ((1.0 - xf * xf) * (1.0 - xg * xg)).sqrt();
            prop_assert!((g * u - product).abs() <= 1e-13 * product);
        }
    }
}
