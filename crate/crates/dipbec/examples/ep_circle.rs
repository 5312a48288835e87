//! Exceptional-point certification: encircling the fold in the complex
//! scattering plane permutes the two stationary solutions; a circle away
//! from the fold does not, and the branch splitting scales as sqrt.

use dipbec::exceptional::{branch_split_exponent, encircle, encircle_turns};
use dipbec::meanfield::Couplings;
use dipbec::stationary::critical_fold;
use dipbec::units::TrapParams;

fn main() {
    let p = TrapParams::from_mean(0.0, 3.4e4, 6.0).unwrap();
    let fold = critical_fold(&p, Couplings::FULL, (-1.0, 1.0 / 6.0 - 1e-9)).unwrap();
    println!("fold at a_crit/a_d = {:.6}", fold.scattering_ratio);

    let around = encircle(&p, fold.scattering_ratio, 1e-3, 64).unwrap();
    println!("circle around the fold:   permuted = {}", around.permuted);

    let away = encircle(&p, fold.scattering_ratio + 0.01, 1e-3, 64).unwrap();
    println!("circle away from the fold: permuted = {}", away.permuted);

    let twice = encircle_turns(&p, fold.scattering_ratio, 1e-3, 64, 2).unwrap();
    println!("two turns around the fold: permuted = {}", twice.permuted);

    let expo = branch_split_exponent(&p, &fold).unwrap();
    println!("|eps1 - eps2| ~ rho^p with p = {:.3}", expo);
}
