//! Time evolution of the complex widths: a bounded breathing trajectory near
//! the ground state, and a collapse started just past the saddle along its
//! unstable direction. Writes breathing.csv.

use std::io::Write;

use dipbec::dynamics::{evolve, unstable_direction, ComplexWidthState, EvolveOptions, Outcome};
use dipbec::stationary::stationary_pair;
use dipbec::units::TrapParams;
use num_complex::Complex64;

fn main() {
    let p = TrapParams::from_mean(0.1, 3.4e4, 6.0).unwrap();
    let (g, e) = stationary_pair(&p).unwrap();
    let t_z = 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);

    // bounded oscillation around the ground state
    let s0 = ComplexWidthState::new(
        Complex64::new(1.05 * g.widths.a_r, 0.0),
        Complex64::new(0.97 * g.widths.a_z, 0.0),
    )
    .unwrap();
    let traj = evolve(&s0, &p, 40.0 * t_z, &EvolveOptions::default()).unwrap();
    let e0 = traj.energy_series[0];
    let drift = traj
        .energy_series
        .iter()
        .map(|en| ((en - e0) / e0).abs())
        .fold(0.0, f64::max);
    println!(
        "breathing run: outcome {:?}, {} steps, relative energy drift {:.2e}",
        traj.outcome,
        traj.times.len(),
        drift
    );
    let mut f = std::fs::File::create("breathing.csv").unwrap();
    writeln!(f, "t,re_a_r,im_a_r,re_a_z,im_a_z,energy").unwrap();
    for ((t, s), en) in traj.times.iter().zip(&traj.states).zip(&traj.energy_series) {
        writeln!(f, "{t},{},{},{},{},{en}", s.a_r.re, s.a_r.im, s.a_z.re, s.a_z.im).unwrap();
    }
    println!("wrote breathing.csv");

    // push the saddle along its unstable eigendirection: widths run away
    let (kappa, dir) = unstable_direction(&e, &p).unwrap();
    let sign = if dir[0] > 0.0 { 1.0 } else { -1.0 };
    let amp = 1e-4 * (e.widths.a_r.powi(2) + e.widths.a_z.powi(2)).sqrt();
    let pushed = ComplexWidthState::new(
        Complex64::new(e.widths.a_r + sign * amp * dir[0], sign * amp * dir[1]),
        Complex64::new(e.widths.a_z + sign * amp * dir[2], sign * amp * dir[3]),
    )
    .unwrap();
    let opts = EvolveOptions { drift_abort: 1e-4, ..Default::default() };
    let fall = evolve(&pushed, &p, 200.0 * t_z, &opts).unwrap();
    println!(
        "saddle + unstable push (kappa = {:.3e}): outcome {:?} at t = {:.3e}",
        kappa,
        fall.outcome,
        fall.times.last().unwrap()
    );
    assert_eq!(fall.outcome, Outcome::Collapsed);
}
