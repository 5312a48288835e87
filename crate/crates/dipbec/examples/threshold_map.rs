//! Critical scattering length over the trap-parameter plane, and the
//! strong-dipole limit a_crit/a_d -> 1/6 along a prolate trap.

use dipbec::stationary::{critical_scattering_length, threshold_map};

fn main() {
    let gbars: Vec<f64> = (0..7).map(|i| 1e2 * 10f64.powf(i as f64 * 4.0 / 6.0)).collect();
    let lambdas = [0.1, 1.0, 6.0];
    let cells = threshold_map(&gbars, &lambdas);
    println!("{:>12} {:>8} {:>12}", "N^2 gbar", "lambda", "a_crit/a_d");
    for c in &cells {
        match c.a_crit {
            Some(v) => println!("{:12.3e} {:8.2} {:12.6}", c.scaled_gamma_bar, c.lambda, v),
            None => println!(
                "{:12.3e} {:8.2} {:>12}",
                c.scaled_gamma_bar,
                c.lambda,
                c.error.as_deref().unwrap_or("failed")
            ),
        }
    }
    let top = critical_scattering_length(1e6, 0.1).unwrap();
    println!(
        "\nstrong-dipole prolate limit: a_crit(1e6, 0.1) = {:.5} (1/6 = {:.5})",
        top,
        1.0 / 6.0
    );
}
