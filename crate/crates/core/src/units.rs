//! Internal unit system: mass in amu, length in Å, time in fs.
//!
//! Energies are therefore in amu·Å²/fs² and actions in amu·Å²/fs. Physical
//! constants are CODATA 2018 values converted once into these units.

use crate::scalar::Real;

/// Atomic mass constant (kg), CODATA 2018.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;
/// Reduced Planck constant (J s), CODATA 2018 (exact by definition of h).
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Planck constant (J s), exact.
pub const PLANCK_SI: f64 = 6.626_070_15e-34;
/// Speed of light (m/s), exact.
pub const C_SI: f64 = 299_792_458.0;

/// One amu·Å²/fs expressed in J s.
const ACTION_UNIT_SI: f64 = AMU_KG * 1e-20 / 1e-15;
/// One amu·Å²/fs² expressed in J.
const ENERGY_UNIT_SI: f64 = AMU_KG * 1e-20 / 1e-30;

/// Physical constants in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    /// ħ in amu·Å²/fs.
    pub hbar: T,
    /// h in amu·Å²/fs.
    pub planck: T,
    /// Speed of light in Å/fs.
    pub c_angstrom_per_fs: T,
    /// aJ per amu·Å²/fs².
    pub aj_per_internal_energy: T,
    /// cm⁻¹ per amu·Å²/fs².
    pub wavenumber_per_internal_energy: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata2018() -> Self {
        let hbar = HBAR_SI / ACTION_UNIT_SI;
        let planck = 2.0 * std::f64::consts::PI * hbar;
        let c = C_SI * 1e10 / 1e15;
        // E / (h c) in Å⁻¹, times 1e8 Å/cm.
        let wavenumber = 1e8 / (planck * c);
        Self {
            hbar: T::lit(hbar),
            planck: T::lit(planck),
            c_angstrom_per_fs: T::lit(c),
            aj_per_internal_energy: T::lit(ENERGY_UNIT_SI / 1e-18),
            wavenumber_per_internal_energy: T::lit(wavenumber),
        }
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata2018()
    }
}

#[inline]
pub fn hbar<T: Real>() -> T {
    PhysicalConstants::<T>::codata2018().hbar
}

/// Converts an energy (or force constant numerator) from aJ to amu·Å²/fs².
pub fn aj_to_internal<T: Real>(e: T) -> T {
    e / PhysicalConstants::<T>::codata2018().aj_per_internal_energy
}

pub fn internal_to_aj<T: Real>(e: T) -> T {
    e * PhysicalConstants::<T>::codata2018().aj_per_internal_energy
}

/// Converts an energy in amu·Å²/fs² into a wavenumber in cm⁻¹.
pub fn internal_energy_to_wavenumber<T: Real>(e: T) -> T {
    e * PhysicalConstants::<T>::codata2018().wavenumber_per_internal_energy
}

pub fn wavenumber_to_internal<T: Real>(w: T) -> T {
    w / PhysicalConstants::<T>::codata2018().wavenumber_per_internal_energy
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constants_are_consistent() {
        let k = PhysicalConstants::<f64>::codata2018();
        assert_relative_eq!(
            k.planck,
            2.0 * std::f64::consts::PI * k.hbar,
            max_relative = 1e-15
        );
        assert!(k.hbar > 0.0 && k.c_angstrom_per_fs > 0.0);
        assert!(k.aj_per_internal_energy > 0.0 && k.wavenumber_per_internal_energy > 0.0);
        // h from the exact SI value must agree with 2πħ.
        assert_relative_eq!(k.planck, PLANCK_SI / ACTION_UNIT_SI, max_relative = 1e-9);
    }

    #[test]
    fn aj_conversion() {
        assert_eq!(aj_to_internal(0.0_f64), 0.0);
        // 1 aJ / (1.66053906660e-17 J)
        let oracle = 1e-18 / 1.660_539_066_60e-17;
        assert_relative_eq!(aj_to_internal(1.0_f64), oracle, max_relative = 1e-14);
        assert_relative_eq!(
            aj_to_internal(1.0_f64),
            0.060_221_407_6,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            aj_to_internal(8.093_f64),
            0.487_371_852,
            max_relative = 1e-8
        );
    }

    #[test]
    fn wavenumber_conversion() {
        assert_eq!(internal_energy_to_wavenumber(0.0_f64), 0.0);
        let per_cm = wavenumber_to_internal(1.0_f64);
        assert_relative_eq!(per_cm, 1.196_265_66e-6, max_relative = 1e-8);
        assert_relative_eq!(
            internal_energy_to_wavenumber(per_cm),
            1.0,
            max_relative = 1e-14
        );
        // ħ ω0 for the water row: sqrt(g_rr f_rr) with g_rr = 1.0625, f_rr = 8.093 aJ/Å².
        let omega0 = (1.0625 * aj_to_internal(8.093_f64)).sqrt();
        let e = hbar::<f64>() * omega0;
        assert_relative_eq!(e, 0.004_570_058_4, max_relative = 1e-8);
        assert_relative_eq!(
            internal_energy_to_wavenumber(e),
            3_820.270_54,
            max_relative = 1e-8
        );
    }

    proptest! {
        #[test]
        fn wavenumber_round_trip(x in 1.0_f64..1e5) {
            let back = internal_energy_to_wavenumber(wavenumber_to_internal(x));
            prop_assert!(((back - x) / x).abs() < 1e-12);
        }

        #[test]
        fn aj_is_linear(a in -50.0_f64..50.0, b in -50.0_f64..50.0) {
            let lhs = aj_to_internal(a + b);
            let rhs = aj_to_internal(a) + aj_to_internal(b);
            prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * (aj_to_internal(a).abs() + aj_to_internal(b).abs()));
        }
    }
}
