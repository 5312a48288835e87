//! Linearized eigenvalues around both stationary states: four purely
//! imaginary for the ground state, one positive real for the excited one.

use dipbec::dynamics::linearize;
use dipbec::stationary::stationary_pair;
use dipbec::units::TrapParams;

fn main() {
    let p = TrapParams::from_mean(0.1, 3.4e4, 6.0).unwrap();
    let (g, e) = stationary_pair(&p).unwrap();
    for (label, st) in [("ground", &g), ("excited", &e)] {
        let spec = linearize(st, &p);
        println!("{label}: {:?}", spec.classification);
        for k in spec.eigenvalues {
            println!("    kappa = {:+.6e} {:+.6e} i", k.re, k.im);
        }
    }
}
