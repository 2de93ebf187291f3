//! Stationary local ↔ normal connection.
//!
//! The Bogoliubov parameters (r, s) relate the normal bosons to the local
//! ones; from them follow the coefficients expressing the normal polyad in
//! terms of the local polyad plus polyad-breaking terms, the effective
//! local-representation parameters (ω_nor, λ_nor), and the operator map
//! between the stationary local bosons and the time-dependent invariant
//! ladder operators.

use num_complex::Complex;

use crate::dynamics::ModeOccupation;
use crate::molecule::{normal_frequencies, CouplingRatios, NormalMode};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovParams<T> {
    pub r: T,
    pub s: T,
}

/// Integer weights of the normal polyad P_N = η₁n_g + η₂n_u.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResonanceWeights {
    pub eta1: u32,
    pub eta2: u32,
}

impl ResonanceWeights {
    pub const UNIT: Self = Self { eta1: 1, eta2: 1 };

    pub fn new(eta1: u32, eta2: u32) -> Option<Self> {
        (eta1 >= 1 && eta2 >= 1).then_some(Self { eta1, eta2 })
    }

    pub fn weight(&self, mode: NormalMode) -> u32 {
        match mode {
            NormalMode::Gerade => self.eta1,
            NormalMode::Ungerade => self.eta2,
        }
    }
}

impl Default for ResonanceWeights {
    fn default() -> Self {
        Self::UNIT
    }
}

/// Coefficients of P_N = ζ₀ + β₀P_L + β₁(a₁†a₂ + a₁a₂†)
/// + β₂(a₁†² + a₂†² + a₁² + a₂²) + β₃(a₁†a₂† + a₁a₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyadCoefficients<T> {
    pub zeta0: T,
    pub beta0: T,
    pub beta1: T,
    pub beta2: T,
    pub beta3: T,
}

/// Parameters of the normal Hamiltonian rewritten on the c-boson basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeParams<T> {
    pub omega_nor: T,
    pub lambda_nor: T,
    /// λ = x_f + x_g of the local algebraic Hamiltonian.
    pub local_lambda: T,
    /// λ' = x_f − x_g, weight of the polyad-breaking term.
    pub local_lambda_prime: T,
}

pub fn rs_params<T: Real>(x: CouplingRatios<T>) -> BogoliubovParams<T> {
    let one = T::one();
    BogoliubovParams {
        r: ((one + x.x_f) / (one + x.x_g)).sqrt(),
        s: ((one - x.x_f) / (one - x.x_g)).sqrt(),
    }
}

pub fn polyad_coefficients<T: Real>(
    p: BogoliubovParams<T>,
    w: ResonanceWeights,
) -> PolyadCoefficients<T> {
    let BogoliubovParams { r, s } = p;
    let one = T::one();
    let e1 = T::lit(f64::from(w.eta1));
    let e2 = T::lit(f64::from(w.eta2));
    let pre = one / (T::lit(8.0) * r * s);
    let two_pre = pre + pre;
    let (r2, s2) = (r * r, s * s);
    PolyadCoefficients {
        zeta0: two_pre * (e1 * s * (r - one).powi(2) + e2 * r * (s - one).powi(2)),
        beta0: two_pre * (e1 * s * (r2 + one) + e2 * r * (s2 + one)),
        beta1: two_pre * (e1 * s * (r2 + one) - e2 * r * (s2 + one)),
        beta2: pre * (e1 * s * (r2 - one) + e2 * r * (s2 - one)),
        beta3: pre * (e1 * s * (r2 - one) - e2 * r * (s2 - one)),
    }
}

pub fn normal_mode_params<T: Real>(x: CouplingRatios<T>, omega0: T) -> NormalModeParams<T> {
    let one = T::one();
    let plus = ((one + x.x_f) * (one + x.x_g)).sqrt();
    let minus = ((one - x.x_f) * (one - x.x_g)).sqrt();
    NormalModeParams {
        omega_nor: omega0 / T::lit(2.0) * (plus + minus),
        lambda_nor: omega0 * (plus - minus),
        local_lambda: x.x_f + x.x_g,
        local_lambda_prime: x.x_f - x.x_g,
    }
}

/// How far a coupling pair is from the local limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalLimitDiagnostics<T> {
    /// |ω_nor/ω₀ − (1 − (x_g − x_f)²/8)|, the second-order truncation residual.
    pub taylor_err_omega: T,
    /// |λ_nor/ω₀ − (x_g + x_f)|, the linear-term residual.
    pub taylor_err_lambda: T,
    /// |β₀ − 1| at unit weights.
    pub dev_beta0: T,
    /// |ζ₀| at unit weights.
    pub dev_zeta0: T,
    /// (x_f − x_g)²/8, the quantity that must be ≪ 1.
    pub splitting_measure: T,
}

pub fn local_limit_diagnostics<T: Real>(x: CouplingRatios<T>) -> LocalLimitDiagnostics<T> {
    let one = T::one();
    let eight = T::lit(8.0);
    let nm = normal_mode_params(x, one);
    let diff2 = (x.x_g - x.x_f).powi(2);
    let coeffs = polyad_coefficients(rs_params(x), ResonanceWeights::UNIT);
    LocalLimitDiagnostics {
        taylor_err_omega: (nm.omega_nor - (one - diff2 / eight)).abs(),
        taylor_err_lambda: (nm.lambda_nor - (x.x_g + x.x_f)).abs(),
        dev_beta0: (coeffs.beta0 - one).abs(),
        dev_zeta0: coeffs.zeta0.abs(),
        splitting_measure: diff2 / eight,
    }
}

/// Checks ω_nor ± λ_nor/2 against (ω_g, ω_u); returns the larger relative gap.
pub fn normal_params_consistency<T: Real>(x: CouplingRatios<T>, omega0: T) -> Option<T> {
    let (g, u) = normal_frequencies(x, omega0).ok()?;
    let nm = normal_mode_params(x, omega0);
    let half = nm.lambda_nor / T::lit(2.0);
    let dg = ((nm.omega_nor + half) - g).abs() / g;
    let du = ((nm.omega_nor - half) - u).abs() / u;
    Some(dg.max(du))
}

/// Entries (χ, ζ) of the map from invariant ladder operators to local bosons
/// for one normal mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCoefficients<T> {
    pub chi: Complex<T>,
    pub zeta: Complex<T>,
}

/// χ = (α/2)e^{−iφ}, ζ = e^{−iφ}/(2i)·(1/α + iα̇/G).
pub fn appendix_map_coeffs<T: Real>(alpha: T, alpha_dot: T, phi: T, g: T) -> MapCoefficients<T> {
    let two = T::lit(2.0);
    let rot = Complex::from_polar(T::one(), -phi);
    let inner = Complex::new(alpha.recip(), alpha_dot / g);
    MapCoefficients {
        chi: rot * (alpha / two),
        zeta: rot * inner / Complex::new(T::zero(), two),
    }
}

/// Rows a₁, a₁†, a₂, a₂† of the 4×4 map acting on (A_g, A_g†, A_u, A_u†).
///
/// `mu_omega` is μω of the local bosons. With q = (S_g ± S_u)/√2 the a₂ rows
/// carry the ungerade columns with a minus sign.
pub fn local_boson_map<T: Real>(
    g: MapCoefficients<T>,
    u: MapCoefficients<T>,
    mu_omega: T,
) -> [[Complex<T>; 4]; 4] {
    let scale = (mu_omega / T::lit(2.0)).sqrt();
    let i_over = Complex::new(T::zero(), mu_omega.recip());
    let plus = |c: &MapCoefficients<T>| {
        [
            (c.chi + i_over * c.zeta) * scale,
            (c.chi.conj() + i_over * c.zeta.conj()) * scale,
        ]
    };
    let minus = |c: &MapCoefficients<T>| {
        [
            (c.chi - i_over * c.zeta) * scale,
            (c.chi.conj() - i_over * c.zeta.conj()) * scale,
        ]
    };
    let (gp, gm, up, um) = (plus(&g), minus(&g), plus(&u), minus(&u));
    [
        [gp[0], gp[1], up[0], up[1]],
        [gm[0], gm[1], um[0], um[1]],
        [gp[0], gp[1], -up[0], -up[1]],
        [gm[0], gm[1], -um[0], -um[1]],
    ]
}

/// ⟨a₁†a₁ + a₂†a₂⟩ in the invariant Fock state |n_g, n_u, t⟩, evaluated
/// through the operator map. Only ⟨A†A⟩ = n and ⟨AA†⟩ = n + 1 survive.
pub fn local_polyad_via_map<T: Real>(map: &[[Complex<T>; 4]; 4], occ: ModeOccupation) -> T {
    let n = [T::lit(occ.n_g as f64), T::lit(occ.n_u as f64)];
    let mut total = T::zero();
    for (annihilate, create) in [(0, 1), (2, 3)] {
        let a = &map[annihilate];
        let ad = &map[create];
        for (mode, nk) in n.iter().enumerate() {
            let (ia, ic) = (2 * mode, 2 * mode + 1);
            // a† a ⊃ ad[ic]·a[ia] A†A + ad[ia]·a[ic] A A†
            let term = ad[ic] * a[ia] * *nk + ad[ia] * a[ic] * (*nk + T::one());
            total = total + term.re;
        }
    }
    total
}

/// [a_i, a_i†] for the two local bosons; both must equal 1.
pub fn local_commutators<T: Real>(map: &[[Complex<T>; 4]; 4]) -> [Complex<T>; 2] {
    let comm = |a: &[Complex<T>; 4], ad: &[Complex<T>; 4]| {
        // [A_γ, A_γ†] = 1, everything else commutes.
        (a[0] * ad[1] - a[1] * ad[0]) + (a[2] * ad[3] - a[3] * ad[2])
    };
    [comm(&map[0], &map[1]), comm(&map[2], &map[3])]
}
