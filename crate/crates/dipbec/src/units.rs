//! Conversion between laboratory quantities and the dimensionless "dipole
//! units" of the magnetic dipole-dipole interaction, plus the particle-number
//! scaling that reduces the physics to `(a/a_d, N²γ_r, N²γ_z)`.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Physical constants (CODATA 2018) pinned in one place so the chromium
/// reference numbers are reproducible.
pub mod constants {
    /// Fine-structure constant α.
    pub const ALPHA: f64 = 7.297_352_569_3e-3;
    /// Bohr radius a₀ in metres.
    pub const BOHR_RADIUS_M: f64 = 5.291_772_109_03e-11;
    /// Reduced Planck constant in J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Electron mass in kg.
    pub const ELECTRON_MASS_KG: f64 = 9.109_383_701_5e-31;
    /// Atomic mass constant over electron mass, u/m_e.
    pub const U_PER_ELECTRON_MASS: f64 = 1_822.888_486_209;
    /// One electronvolt in joules.
    pub const EV_J: f64 = 1.602_176_634e-19;
    /// Mass of ⁵²Cr in atomic mass units (AME 2020).
    pub const CR52_MASS_U: f64 = 51.940_506_23;
}

/// Atomic species entering the dipole-unit definitions: mass as m/m_e and
/// magnetic moment as μ/μ_B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub mass_ratio: f64,
    pub magnetic_moment: f64,
}

impl AtomSpec {
    pub fn new(mass_ratio: f64, magnetic_moment: f64) -> Result<Self, Error> {
        if !(mass_ratio > 0.0) || !(magnetic_moment > 0.0) {
            return Err(Error::invalid_input(
                "AtomSpec requires mass_ratio > 0 and magnetic_moment > 0",
            ));
        }
        Ok(Self { mass_ratio, magnetic_moment })
    }

    /// ⁵²Cr with μ = 6 μ_B, the species of the reference experiment.
    pub fn chromium_52() -> Self {
        Self {
            mass_ratio: constants::CR52_MASS_U * constants::U_PER_ELECTRON_MASS,
            magnetic_moment: 6.0,
        }
    }
}

/// Scaled trap configuration. Only the combinations `N²γ_r`, `N²γ_z` and
/// `a/a_d` enter the physics, so those are what is stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    /// Scattering length over dipole length, a/a_d. May be negative.
    pub scattering_ratio: f64,
    /// N²γ_r, strictly positive.
    pub scaled_gamma_r: f64,
    /// N²γ_z, strictly positive.
    pub scaled_gamma_z: f64,
}

impl TrapParams {
    pub fn new(scattering_ratio: f64, scaled_gamma_r: f64, scaled_gamma_z: f64) -> Result<Self, Error> {
        if !(scaled_gamma_r > 0.0) || !(scaled_gamma_z > 0.0) {
            return Err(Error::invalid_input("scaled trap frequencies must be positive"));
        }
        if !scattering_ratio.is_finite() {
            return Err(Error::invalid_input("scattering ratio must be finite"));
        }
        Ok(Self { scattering_ratio, scaled_gamma_r, scaled_gamma_z })
    }

    /// Build from the aspect ratio λ = γ_z/γ_r and the scaled geometric mean
    /// N²γ̄ = N²γ_r^{2/3}γ_z^{1/3}.
    pub fn from_mean(scattering_ratio: f64, scaled_gamma_bar: f64, lambda: f64) -> Result<Self, Error> {
        if !(scaled_gamma_bar > 0.0) || !(lambda > 0.0) {
            return Err(Error::invalid_input("N²γ̄ and λ must be positive"));
        }
        let g_r = scaled_gamma_bar * lambda.powf(-1.0 / 3.0);
        let g_z = scaled_gamma_bar * lambda.powf(2.0 / 3.0);
        Self::new(scattering_ratio, g_r, g_z)
    }

    /// Trap aspect ratio λ = γ_z/γ_r.
    pub fn lambda(&self) -> f64 {
        self.scaled_gamma_z / self.scaled_gamma_r
    }

    /// Scaled geometric mean N²γ̄ = N²γ_r^{2/3}γ_z^{1/3}.
    pub fn scaled_gamma_bar(&self) -> f64 {
        self.scaled_gamma_r.powf(2.0 / 3.0) * self.scaled_gamma_z.powf(1.0 / 3.0)
    }

    /// Same trap with a different scattering ratio.
    pub fn with_scattering(&self, scattering_ratio: f64) -> Self {
        Self { scattering_ratio, ..*self }
    }
}

/// Energy and frequency units derived from the dipole length.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DerivedUnits {
    /// E_d = ħ²/(2 m a_d²), in eV.
    pub energy_ev: f64,
    /// ω_d = E_d/ħ, angular frequency in 1/s.
    pub angular_frequency: f64,
}

impl DerivedUnits {
    /// ω_d/2π in Hz.
    pub fn frequency_hz(&self) -> f64 {
        self.angular_frequency / (2.0 * std::f64::consts::PI)
    }
}

/// Dipole length a_d = (α²/2)(m/m_e)(μ/μ_B)² in units of the Bohr radius.
///
/// For ⁵²Cr with μ = 6 μ_B this evaluates to 91 a₀ to two significant figures.
pub fn dipole_length(spec: &AtomSpec) -> f64 {
    0.5 * constants::ALPHA * constants::ALPHA * spec.mass_ratio
        * spec.magnetic_moment * spec.magnetic_moment
}

/// Energy and frequency units for the given species.
pub fn derived_units(spec: &AtomSpec) -> DerivedUnits {
    let a_d_m = dipole_length(spec) * constants::BOHR_RADIUS_M;
    let mass_kg = spec.mass_ratio * constants::ELECTRON_MASS_KG;
    let e_d_j = constants::HBAR * constants::HBAR / (2.0 * mass_kg * a_d_m * a_d_m);
    DerivedUnits {
        energy_ev: e_d_j / constants::EV_J,
        angular_frequency: e_d_j / constants::HBAR,
    }
}

/// Reduce laboratory numbers to scaled trap parameters.
///
/// Trap frequencies are given as f = ω/2π in Hz; the dimensionless trap
/// frequencies are γ = ω/(2ω_d) and only N²γ is kept. The scattering length
/// is given in Bohr radii.
pub fn scale_lab_to_params(
    n_atoms: u64,
    f_r_hz: f64,
    f_z_hz: f64,
    a_bohr: f64,
    spec: &AtomSpec,
) -> Result<TrapParams, Error> {
    if n_atoms == 0 || !(f_r_hz > 0.0) || !(f_z_hz > 0.0) {
        return Err(Error::invalid_input("particle number and trap frequencies must be positive"));
    }
    let omega_d = derived_units(spec).angular_frequency;
    let n2 = (n_atoms as f64) * (n_atoms as f64);
    let gamma_r = std::f64::consts::PI * f_r_hz / omega_d;
    let gamma_z = std::f64::consts::PI * f_z_hz / omega_d;
    TrapParams::new(a_bohr / dipole_length(spec), n2 * gamma_r, n2 * gamma_z)
}

/// Dipole-interaction strength D = sqrt(N²γ_r/2) of Dutta/Meystre and Ronen
/// et al., expressed through the scaled trap frequency.
pub fn d_parameter(params: &TrapParams) -> f64 {
    (params.scaled_gamma_r / 2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chromium_dipole_length_is_91_bohr() {
        let a_d = dipole_length(&AtomSpec::chromium_52());
        // 91 a_0 to two significant figures
        assert_eq!(a_d.round(), 91.0, "a_d = {a_d}");
    }

    #[test]
    fn zero_moment_gives_zero_length() {
        let spec = AtomSpec { mass_ratio: 1000.0, magnetic_moment: 0.0 };
        assert_eq!(dipole_length(&spec), 0.0);
        assert!(AtomSpec::new(1000.0, 0.0).is_err());
    }

    #[test]
    fn doubling_moment_quadruples_length() {
        let s1 = AtomSpec::new(5e4, 3.0).unwrap();
        let s2 = AtomSpec::new(5e4, 6.0).unwrap();
        assert_relative_eq!(dipole_length(&s2), 4.0 * dipole_length(&s1), max_relative = 1e-14);
    }

    #[test]
    fn chromium_energy_and_frequency_units() {
        let u = derived_units(&AtomSpec::chromium_52());
        assert!((u.energy_ev - 1.7e-8).abs() / 1.7e-8 < 0.05, "E_d = {}", u.energy_ev);
        assert!((u.frequency_hz() - 4.2e6).abs() / 4.2e6 < 0.05, "f_d = {}", u.frequency_hz());
    }

    #[test]
    fn energy_unit_quarters_when_dipole_length_doubles() {
        // doubling mu quadruples a_d; E_d ~ 1/a_d^2 with m fixed
        let s1 = AtomSpec::new(9.468e4, 3.0).unwrap();
        let s2 = AtomSpec::new(9.468e4, 3.0 * 2.0_f64.sqrt()).unwrap();
        // a_d doubles, E_d drops by 4
        assert_relative_eq!(dipole_length(&s2), 2.0 * dipole_length(&s1), max_relative = 1e-12);
        assert_relative_eq!(
            derived_units(&s1).energy_ev,
            4.0 * derived_units(&s2).energy_ev,
            max_relative = 1e-12
        );
    }

    #[test]
    fn reference_experiment_reproduces_scaled_mean() {
        // N = 20 000, mean trap frequency 720 Hz -> N²γ̄ ≈ 3.4e4
        let p = scale_lab_to_params(20_000, 720.0, 720.0, 0.0, &AtomSpec::chromium_52()).unwrap();
        let gbar = p.scaled_gamma_bar();
        assert!((gbar - 3.4e4).abs() / 3.4e4 < 0.02, "N²γ̄ = {gbar}");
    }

    #[test]
    fn identity_in_n_for_single_atom() {
        let spec = AtomSpec::chromium_52();
        let p = scale_lab_to_params(1, 100.0, 300.0, 10.0, &spec).unwrap();
        let omega_d = derived_units(&spec).angular_frequency;
        assert_relative_eq!(p.scaled_gamma_r, std::f64::consts::PI * 100.0 / omega_d, max_relative = 1e-14);
    }

    #[test]
    fn scaling_law_invariance() {
        // (N, f) -> (2N, f/4) leaves TrapParams unchanged
        let spec = AtomSpec::chromium_52();
        let p1 = scale_lab_to_params(10_000, 720.0, 4320.0, 5.0, &spec).unwrap();
        let p2 = scale_lab_to_params(20_000, 180.0, 1080.0, 5.0, &spec).unwrap();
        assert_relative_eq!(p1.scaled_gamma_r, p2.scaled_gamma_r, max_relative = 1e-12);
        assert_relative_eq!(p1.scaled_gamma_z, p2.scaled_gamma_z, max_relative = 1e-12);
        assert_eq!(p1.scattering_ratio, p2.scattering_ratio);
    }

    #[test]
    fn mean_and_cartesian_forms_round_trip() {
        let p = TrapParams::from_mean(0.1, 3.4e4, 6.0).unwrap();
        assert_relative_eq!(p.scaled_gamma_bar(), 3.4e4, max_relative = 1e-12);
        assert_relative_eq!(p.lambda(), 6.0, max_relative = 1e-12);
        let q = TrapParams::new(0.1, p.scaled_gamma_r, p.scaled_gamma_z).unwrap();
        assert_relative_eq!(q.scaled_gamma_bar(), 3.4e4, max_relative = 1e-12);
    }

    #[test]
    fn d_parameter_values() {
        let p = TrapParams::new(0.0, 2.0, 2.0).unwrap();
        assert_eq!(d_parameter(&p), 1.0);
        // gbar = 3.4e4, lambda = 6: N²γ_r = 3.4e4 / 6^{1/3}
        let p = TrapParams::from_mean(0.0, 3.4e4, 6.0).unwrap();
        let expect = (3.4e4 / 6.0_f64.powf(1.0 / 3.0) / 2.0).sqrt();
        assert_relative_eq!(d_parameter(&p), expect, max_relative = 1e-12);
        // recombine: gbar from gamma_r must come back out
        assert_relative_eq!(
            p.scaled_gamma_r * p.lambda().powf(1.0 / 3.0),
            3.4e4,
            max_relative = 1e-12
        );
    }
}
