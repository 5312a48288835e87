//! Poincaré surfaces of section at increasing mean-field energy: fixed
//! point, quasi-periodic curves, mixed chaos with collapses, and the
//! persistent island far above the saddle. Writes poincare_panelN.csv.

use std::io::Write;

use dipbec::dynamics::Outcome;
use dipbec::poincare::{default_window, panel_energy_ladder, panel_sweep, SectionOptions};
use dipbec::stationary::find_ground;
use dipbec::units::TrapParams;

fn main() {
    let p = TrapParams::from_mean(0.1, 3.4e4, 6.0).unwrap();
    let ground = find_ground(&p).unwrap();
    let energies = panel_energy_ladder(ground.energy);
    let opts = SectionOptions::default();
    // a short window keeps this example quick; raise for denser sections
    let window = 0.2 * default_window(&p);
    let panels = panel_sweep(&p, &energies, 12, window, &opts).unwrap();
    for (i, panel) in panels.iter().enumerate() {
        match panel {
            Ok(ds) => {
                let collapsed = ds
                    .outcomes
                    .iter()
                    .filter(|r| r.outcome == Outcome::Collapsed)
                    .count();
                println!(
                    "panel {}: E = {:.3e}  ({:5.2} E_gs)  {} trajectories, {} points, {} collapsed",
                    i + 1,
                    ds.energy,
                    ds.energy / ground.energy,
                    ds.outcomes.len(),
                    ds.points.len(),
                    collapsed
                );
                let mut f = std::fs::File::create(format!("poincare_panel{}.csv", i + 1)).unwrap();
                writeln!(f, "trajectory_id,crossing_time,re_a_r,im_a_r").unwrap();
                for pt in &ds.points {
                    writeln!(f, "{},{},{},{}", pt.trajectory_id, pt.crossing_time, pt.re_a_r, pt.im_a_r)
                        .unwrap();
                }
            }
            Err(e) => println!("panel {}: failed: {e}", i + 1),
        }
    }
    println!("wrote poincare_panel*.csv");
}
