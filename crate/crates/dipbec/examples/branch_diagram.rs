//! Both stationary branches versus the scattering length: the chemical
//! potential diagram with its tangent bifurcation. Writes branch_diagram.csv.

use std::io::Write;

use dipbec::stationary::{trace_branches, ContinuationControl};
use dipbec::units::TrapParams;

fn main() {
    let p = TrapParams::from_mean(0.0, 3.4e4, 6.0).unwrap();
    let ctl = ContinuationControl { max_step: 1e-2, ..Default::default() };
    let pair = trace_branches(&p, (-0.05, 0.1), &ctl).unwrap();
    let fold = pair.fold.unwrap();
    println!(
        "fold (tangent bifurcation) at a/a_d = {:.6}; {} + {} branch points",
        fold.scattering_ratio,
        pair.ground.scattering.len(),
        pair.excited.scattering.len()
    );

    let mut f = std::fs::File::create("branch_diagram.csv").unwrap();
    writeln!(f, "branch,a_ratio,chem_potential,energy").unwrap();
    for (curve, name) in [(&pair.ground, "ground"), (&pair.excited, "excited")] {
        for (s, st) in curve.scattering.iter().zip(&curve.states) {
            writeln!(f, "{name},{s},{},{}", st.chem_potential, st.energy).unwrap();
        }
    }
    println!("wrote branch_diagram.csv");
}
