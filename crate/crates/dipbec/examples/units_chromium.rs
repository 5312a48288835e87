//! Dipole units for chromium-52 and the scaled trap parameters of the
//! reference experiment (20 000 atoms in a 720 Hz mean trap).

use dipbec::units::{
    d_parameter, derived_units, dipole_length, scale_lab_to_params, AtomSpec,
};

fn main() {
    let cr = AtomSpec::chromium_52();
    let a_d = dipole_length(&cr);
    let u = derived_units(&cr);
    println!("chromium-52, mu = 6 mu_B:");
    println!("  dipole length a_d   = {:.2} a_0", a_d);
    println!("  energy unit E_d     = {:.3e} eV", u.energy_ev);
    println!("  frequency unit      = {:.3e} Hz (omega_d/2pi)", u.frequency_hz());

    let p = scale_lab_to_params(20_000, 720.0, 720.0, 9.1, &cr).unwrap();
    println!("\nN = 20 000 atoms at f = 720 Hz, a = 9.1 a_0 (a/a_d = 0.1):");
    println!("  N^2 gamma_bar = {:.3e}", p.scaled_gamma_bar());
    println!("  N^2 gamma_r   = {:.3e}", p.scaled_gamma_r);
    println!("  N^2 gamma_z   = {:.3e}", p.scaled_gamma_z);
    println!("  lambda        = {:.3}", p.lambda());
    println!("  a/a_d         = {:.4}", p.scattering_ratio);
    println!("  D             = {:.3e}", d_parameter(&p));

    // the scaling law: (2N, f/4) describes the same physics
    let q = scale_lab_to_params(40_000, 180.0, 180.0, 9.1, &cr).unwrap();
    println!("\n(2N, f/4) gives N^2 gamma_bar = {:.6e} (unchanged)", q.scaled_gamma_bar());
}
