//! Model parameters from TMD-monolayer and cavity constants.

use crate::error::{Error, Result};
use crate::fockspace::{EnergyUnit, ModelParams};

/// CODATA 2018 values, 9 significant digits, SI units.
pub mod constants {
    pub const HBAR: f64 = 1.05457182e-34;
    pub const ELEMENTARY_CHARGE: f64 = 1.60217663e-19;
    pub const VACUUM_PERMITTIVITY: f64 = 8.85418781e-12;
    pub const ELECTRON_MASS: f64 = 9.10938370e-31;

    pub const NM: f64 = 1e-9;
    pub const UM: f64 = 1e-6;
    pub const UM2_IN_CM2: f64 = 1e-8;
    pub const JOULE_TO_MEV: f64 = 1e3 / ELEMENTARY_CHARGE;
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaterialParams {
    /// Inner trion radius λ₁ in nm.
    pub lambda1_nm: f64,
    /// Outer trion radius λ₂ in nm.
    pub lambda2_nm: f64,
    /// Position of the monolayer relative to the field antinode, 0..=1.
    pub xi: f64,
    /// Relative permittivity of the cavity medium.
    pub epsilon: f64,
    /// Electron and hole effective masses in units of the free-electron mass.
    pub m_e: f64,
    pub m_h: f64,
    pub l_cav_um: f64,
    pub area_um2: f64,
    pub density_cm2: f64,
}

impl MaterialParams {
    /// MoSe₂ flake in an open vacuum-gap cavity.
    pub fn mose2() -> Self {
        Self {
            lambda1_nm: 0.87,
            lambda2_nm: 2.54,
            xi: 0.6,
            epsilon: 1.0,
            m_e: 0.8,
            m_h: 0.84,
            l_cav_um: 1.0,
            area_um2: 1.0,
            density_cm2: 1e10,
        }
    }

    /// `μ = (1/m_e + 1/m_h)⁻¹` in units of the free-electron mass.
    pub fn reduced_mass(&self) -> f64 {
        1.0 / (1.0 / self.m_e + 1.0 / self.m_h)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda1", self.lambda1_nm),
            ("lambda2", self.lambda2_nm),
            ("m_e", self.m_e),
            ("m_h", self.m_h),
            ("l_cav", self.l_cav_um),
            ("area", self.area_um2),
            ("density", self.density_cm2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::InvalidParams(format!("xi must lie in [0, 1], got {}", self.xi)));
        }
        if !(self.epsilon >= 1.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!("epsilon must be >= 1, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Confinement coefficient
/// `χ_T = √(8(λ₁²+λ₂²)²(λ₁+λ₂)⁴ / (λ₁²λ₂²(λ₁+λ₂)⁴ + 16λ₁⁴λ₂⁴))`.
///
/// The ratio is homogeneous of degree zero in the radii, so the value does
/// not depend on the length unit; `χ_T(λ, λ) = 4`.
pub fn chi_t(lambda1: f64, lambda2: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda2 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "trion radii must be positive, got ({lambda1}, {lambda2})"
        )));
    }
    let (a2, b2) = (lambda1 * lambda1, lambda2 * lambda2);
    let s4 = (lambda1 + lambda2).powi(4);
    let num = 8.0 * (a2 + b2).powi(2) * s4;
    let den = a2 * b2 * s4 + 16.0 * a2 * a2 * b2 * b2;
    Ok((num / den).sqrt())
}

/// Bare electron–hole coupling `g₀ = √(ξ²ħ²e² / (ε ε₀ μ m₀ L_cav A))` in meV.
pub fn g0_mev(mp: &MaterialParams) -> Result<f64> {
    use constants::*;
    mp.validate()?;
    let num = (mp.xi * HBAR * ELEMENTARY_CHARGE).powi(2);
    let den = mp.epsilon
        * VACUUM_PERMITTIVITY
        * mp.reduced_mass()
        * ELECTRON_MASS
        * (mp.l_cav_um * UM)
        * (mp.area_um2 * UM * UM);
    Ok((num / den).sqrt() * JOULE_TO_MEV)
}

/// Electrons inside the mode area, rounded half up.
pub fn n_s_from_density(density_cm2: f64, area_um2: f64) -> Result<usize> {
    let n = density_cm2 * area_um2 * constants::UM2_IN_CM2;
    if !(n >= 0.5) || !n.is_finite() {
        return Err(Error::InvalidParams(format!(
            "density x area = {n} electrons rounds to zero"
        )));
    }
    Ok((n + 0.5).floor() as usize)
}

/// `g_c = g₀ χ_T` in meV.
pub fn g_c_mev(mp: &MaterialParams) -> Result<f64> {
    Ok(g0_mev(mp)? * chi_t(mp.lambda1_nm, mp.lambda2_nm)?)
}

/// Model in meV with cavity and trion both at zero energy (δ = 0), no drive.
pub fn derive_model_params(mp: &MaterialParams, gamma_c: f64, gamma_t: f64) -> Result<ModelParams> {
    let g_c = g_c_mev(mp)?;
    let n_s = n_s_from_density(mp.density_cm2, mp.area_um2)?;
    let p = ModelParams::resonant(n_s, g_c, gamma_c, gamma_t).with_unit(EnergyUnit::MilliElectronVolt);
    p.validate()?;
    Ok(p)
}

/// `ω_L = (ω_cav + ω_T)/2 − √(Ω² + δ²)/2`
pub fn lower_polariton(omega_cav: f64, omega_t: f64, omega_rabi: f64) -> f64 {
    let delta = omega_cav - omega_t;
    0.5 * (omega_cav + omega_t) - 0.5 * omega_rabi.hypot(delta)
}

/// Everything the `materials` pipeline reports, in meV.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialsSummary {
    pub g0: f64,
    pub chi_t: f64,
    pub g_c: f64,
    pub omega_rabi: f64,
    pub n_s: usize,
    /// `ω_L − ω_cav` at δ = 0.
    pub lower_polariton_offset: f64,
}

pub fn summarize(mp: &MaterialParams) -> Result<MaterialsSummary> {
    let g0 = g0_mev(mp)?;
    let chi = chi_t(mp.lambda1_nm, mp.lambda2_nm)?;
    let n_s = n_s_from_density(mp.density_cm2, mp.area_um2)?;
    let g_c = g0 * chi;
    let omega_rabi = g_c * (n_s as f64).sqrt();
    Ok(MaterialsSummary {
        g0,
        chi_t: chi,
        g_c,
        omega_rabi,
        n_s,
        lower_polariton_offset: lower_polariton(0.0, 0.0, omega_rabi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chi_t_symmetric_closed_form() {
        for l in [0.1, 1.0, 2.5, 40.0] {
            assert!((chi_t(l, l).unwrap() - 4.0).abs() < 1e-13);
        }
        assert!(chi_t(0.0, 1.0).is_err());
        assert!(chi_t(1.0, -2.0).is_err());
    }

    #[test]
    fn reduced_mass() {
        let mp = MaterialParams::mose2();
        assert!((mp.reduced_mass() - 0.8 * 0.84 / 1.64).abs() < 1e-15);
    }

    #[test]
    fn n_s_rounding() {
        assert_eq!(n_s_from_density(1e10, 1.0).unwrap(), 100);
        assert_eq!(n_s_from_density(1.005e10, 1.0).unwrap(), 101);
        assert_eq!(n_s_from_density(0.5e8, 1.0).unwrap(), 1);
        assert!(n_s_from_density(0.49e8, 1.0).is_err());
    }

    #[test]
    fn g0_scaling_laws() {
        let base = MaterialParams {
            xi: 1.0,
            ..MaterialParams::mose2()
        };
        let g = g0_mev(&base).unwrap();
        let ratio = |mp: MaterialParams| g0_mev(&mp).unwrap() / g;
        assert!((ratio(MaterialParams { xi: 0.5, ..base.clone() }) - 0.5).abs() < 1e-12);
        assert!((ratio(MaterialParams { epsilon: 4.0, ..base.clone() }) - 0.5).abs() < 1e-12);
        assert!((ratio(MaterialParams { area_um2: 4.0, ..base.clone() }) - 0.5).abs() < 1e-12);
        assert!((ratio(MaterialParams { l_cav_um: 9.0, ..base.clone() }) - 1.0 / 3.0).abs() < 1e-12);
        // Doubling both masses doubles μ.
        let heavy = MaterialParams {
            m_e: 1.6,
            m_h: 1.68,
            ..base.clone()
        };
        assert!((ratio(heavy) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn lower_polariton_limits() {
        assert_eq!(lower_polariton(2.0, 2.0, 12.0), -4.0);
        assert_eq!(lower_polariton(1.0, 3.0, 0.0), 1.0);
        assert_eq!(lower_polariton(3.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn density_quadrupling_doubles_rabi() {
        let mp = MaterialParams::mose2();
        let a = derive_model_params(&mp, 0.05, 0.26).unwrap();
        let b = derive_model_params(
            &MaterialParams {
                density_cm2: 4e10,
                ..mp
            },
            0.05,
            0.26,
        )
        .unwrap();
        assert_eq!(b.n_s, 400);
        assert!((b.omega_rabi / a.omega_rabi - 2.0).abs() < 1e-12);
        assert_eq!(a.unit, EnergyUnit::MilliElectronVolt);
    }

    proptest! {
        #[test]
        fn chi_t_is_symmetric(a in 0.01f64..50.0, b in 0.01f64..50.0) {
            let x = chi_t(a, b).unwrap();
            let y = chi_t(b, a).unwrap();
            prop_assert!((x - y).abs() <= 1e-13 * x);
        }

        #[test]
        fn chi_t_is_scale_invariant(a in 0.01f64..50.0, b in 0.01f64..50.0, s in 0.01f64..100.0) {
            let x = chi_t(a, b).unwrap();
            prop_assert!((chi_t(s * a, s * b).unwrap() - x).abs() <= 1e-12 * x);
        }
    }
}
