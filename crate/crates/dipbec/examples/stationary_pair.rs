//! Ground and collectively excited stationary state at the reference trap,
//! with energies, chemical potentials and dynamical stability tags.

use dipbec::dynamics::classify_state;
use dipbec::stationary::stationary_pair;
use dipbec::units::TrapParams;

fn main() {
    let p = TrapParams::from_mean(0.1, 3.4e4, 6.0).unwrap();
    let (g, e) = stationary_pair(&p).unwrap();
    let g = classify_state(&g, &p);
    let e = classify_state(&e, &p);
    for (label, st) in [("ground", &g), ("excited", &e)] {
        println!(
            "{label:8} A_r = {:10.3e}  A_z = {:10.3e}  kappa = {:.3}  N^2E = {:.4e}  N^2eps = {:.4e}  {:?}",
            st.widths.a_r,
            st.widths.a_z,
            st.widths.kappa(),
            st.energy,
            st.chem_potential,
            st.stability,
        );
    }
    println!("\nE_es / E_gs = {:.4}", e.energy / g.energy);
}
