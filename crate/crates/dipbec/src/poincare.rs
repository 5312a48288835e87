//! Poincaré surfaces of section of the width dynamics on the plane
//! Im(A_z) = 0, recording (Re A_r, Im A_r) at upward crossings. At fixed
//! mean-field energy the flow lives on a 3-dimensional shell, so the section
//! is a faithful return map: closed curves for (quasi-)periodic motion,
//! scattered points for chaos, early termination for collapsing runs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{energy4, rhs4, ComplexWidthState, Outcome};
use crate::error::Error;
use crate::meanfield::{energy_gradient_with, Couplings, WidthVector};
use crate::ode::{Rkv65, State};
use crate::stationary::{find_ground, StationaryState};
use crate::units::TrapParams;

/// One recorded crossing of the section plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub re_a_r: f64,
    pub im_a_r: f64,
    pub crossing_time: f64,
    pub trajectory_id: usize,
}

/// Per-trajectory bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub trajectory_id: usize,
    pub outcome: Outcome,
    pub crossings: usize,
}

/// All crossings of an ensemble at one mean-field energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionDataset {
    /// Scaled mean-field energy shared by every trajectory.
    pub energy: f64,
    pub points: Vec<SectionPoint>,
    pub outcomes: Vec<TrajectoryRecord>,
}

/// Sampling region on the section plane. `re_range` bounds Re A_r
/// (absolute, dipole units); Im A_r is drawn from ±`im_scale`·b_max where
/// b_max = sqrt((E − E_gs)·Re A_r / 2) is the kinetic bound at that radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeedBox {
    pub re_range: (f64, f64),
    pub im_scale: f64,
}

impl SeedBox {
    /// Box around the ground-state radial width.
    pub fn default_for(ground: &StationaryState) -> Self {
        Self {
            re_range: (0.25 * ground.widths.a_r, 4.0 * ground.widths.a_r),
            im_scale: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SectionOptions {
    pub rtol: f64,
    pub atol: f64,
    pub collapse_cap: f64,
    /// |Im A_z| at emitted points after refinement.
    pub crossing_tol: f64,
    /// Abort threshold on relative energy drift.
    pub drift_abort: f64,
    /// RNG seed for the seeding box sampling.
    pub rng_seed: u64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-10,
            collapse_cap: 1e8,
            crossing_tol: 1e-10,
            drift_abort: 1e-6,
            rng_seed: 0,
        }
    }
}

/// Integration window sized to collect of order 500 crossings from a
/// bounded orbit (the crossing rate is set by the z-breathing frequency).
pub fn default_window(p: &TrapParams) -> f64 {
    750.0 * 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z)
}

// --- energy elimination on the section ---------------------------------------

/// Width a_z that makes ∂E/∂a_z vanish on the slice (the slice-energy
/// minimum), found by bisection with an expanding bracket.
fn az_slice_minimum(a_r: f64, p: &TrapParams, scale: f64) -> Option<f64> {
    let g = |az: f64| energy_gradient_with(&WidthVector { a_r, a_z: az }, p, Couplings::FULL)[1];
    let lo = 1e-8 * scale;
    if !(g(lo) < 0.0) {
        return None;
    }
    let mut hi = 1e2 * scale;
    while g(hi) < 0.0 {
        hi *= 10.0;
        if hi > 1e11 * scale {
            return None;
        }
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-14 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Complete a section point (re_a_r, im_a_r, Im a_z = 0) into a full state
/// at the requested energy by solving for Re a_z, taking the root
/// continuously connected to the ground state (below the slice minimum).
/// Returns None if the slice cannot reach the energy.
pub fn section_state(
    energy: f64,
    re_a_r: f64,
    im_a_r: f64,
    p: &TrapParams,
    az_scale: f64,
) -> Option<ComplexWidthState> {
    if !(re_a_r > 0.0) {
        return None;
    }
    let slice = |az: f64| {
        energy4(
            &[re_a_r, im_a_r, az, 0.0],
            p.scaled_gamma_r,
            p.scaled_gamma_z,
            p.scattering_ratio,
            Couplings::FULL,
        )
    };
    let az_min = az_slice_minimum(re_a_r, p, az_scale)?;
    let e_min = slice(az_min);
    if e_min > energy + 1e-12 * energy.abs() {
        return None;
    }
    if e_min >= energy {
        // degenerate shell touching the slice minimum (rounding-level gap)
        return ComplexWidthState::new(
            Complex64::new(re_a_r, im_a_r),
            Complex64::new(az_min, 0.0),
        )
        .ok();
    }
    // lower branch: bracket below the minimum where the trap term dominates
    let mut lo = az_min;
    while slice(lo) <= energy {
        lo *= 0.1;
        if lo < 1e-12 * az_min {
            return None;
        }
    }
    let mut hi = az_min;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slice(mid) > energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-15 * hi {
            break;
        }
    }
    let az = 0.5 * (lo + hi);
    ComplexWidthState::new(Complex64::new(re_a_r, im_a_r), Complex64::new(az, 0.0)).ok()
}

/// States on the section at the given energy: the ground-state column plus
/// uniformly sampled box points, skipping infeasible samples.
pub fn seed_initial_states(
    energy: f64,
    p: &TrapParams,
    n: usize,
    seed_box: &SeedBox,
    opts: &SectionOptions,
) -> Result<Vec<ComplexWidthState>, Error> {
    let ground = find_ground(p)?;
    if energy < ground.energy * (1.0 - 1e-12) - 1e-12 {
        return Err(Error::EnergyBelowMinimum { energy, floor: ground.energy });
    }
    let mut out = Vec::with_capacity(n);
    // the state continuously connected to the ground column comes first
    if let Some(st) = section_state(energy, ground.widths.a_r, 0.0, p, ground.widths.a_z) {
        out.push(st);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let (lo, hi) = seed_box.re_range;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut attempts = 0;
    while out.len() < n && attempts < 50 * n.max(1) {
        attempts += 1;
        let re = (llo + rng.gen::<f64>() * (lhi - llo)).exp();
        let b_max = ((energy - ground.energy).max(0.0) * re / 2.0).sqrt();
        let im = (2.0 * rng.gen::<f64>() - 1.0) * seed_box.im_scale * b_max;
        if let Some(st) = section_state(energy, re, im, p, ground.widths.a_z) {
            out.push(st);
        }
    }
    Ok(out)
}

// --- section integration ------------------------------------------------------

struct TraceResult {
    points: Vec<(f64, f64, f64)>, // (t, re_a_r, im_a_r)
    outcome: Outcome,
}

/// Integrate one seed, collecting upward crossings of Im a_z = 0. Crossing
/// times are refined on the dense output with a safeguarded secant, so the
/// accuracy of the emitted points is decoupled from the step size.
fn trace_section(
    seed: &ComplexWidthState,
    p: &TrapParams,
    t_end: f64,
    opts: &SectionOptions,
) -> Result<TraceResult, Error> {
    let (g_r, g_z, s) = (p.scaled_gamma_r, p.scaled_gamma_z, p.scattering_ratio);
    let rhs = move |y: &State| rhs4(y, g_r, g_z, s, Couplings::FULL);
    let y0 = seed.to_array();
    let e0 = energy4(&y0, g_r, g_z, s, Couplings::FULL);
    let scale0 = y0[0].abs().max(y0[2].abs());
    let mut solver = Rkv65::new(opts.rtol, opts.atol.max(opts.rtol * scale0));
    solver.h_max = t_end;
    solver.init(&rhs, 0.0, y0);
    let mut points = Vec::new();
    // a seed resting on the section going the configured way counts at t = 0;
    // a fixed point (both rates zero) degenerates to that single point
    let bdot0 = rhs(&y0)[3];
    if y0[3].abs() <= opts.crossing_tol && bdot0 >= 0.0 {
        points.push((0.0, y0[0], y0[1]));
    }
    let mut outcome = Outcome::Bounded;
    let mut max_width = scale0;
    let mut prev = y0;
    while solver.t() < t_end {
        solver.step(&rhs)?;
        let y = *solver.y();
        let e = energy4(&y, g_r, g_z, s, Couplings::FULL);
        let drift = ((e - e0) / e0).abs();
        if drift > opts.drift_abort {
            return Err(Error::EnergyDrift { t: solver.t(), drift, tol: opts.drift_abort });
        }
        // upward crossing of Im a_z = 0 inside this step
        if prev[3] < 0.0 && y[3] >= 0.0 {
            let (s_root, mut y_root) = refine_crossing(&solver, prev[3], y[3], opts.crossing_tol);
            // the interpolation parameter quantizes Im a_z at steep
            // crossings; finish with flow micro-steps, which converge
            // quadratically onto the plane
            for _ in 0..3 {
                if y_root[3].abs() <= opts.crossing_tol {
                    break;
                }
                let f = rhs(&y_root);
                if !(f[3].abs() > 0.0) {
                    break;
                }
                let dt = -y_root[3] / f[3];
                for (yi, fi) in y_root.iter_mut().zip(f) {
                    *yi += dt * fi;
                }
            }
            debug_assert!(
                y_root[3].abs() <= 10.0 * opts.crossing_tol,
                "crossing refinement left |Im a_z| = {:e}",
                y_root[3].abs()
            );
            points.push((
                solver.t_prev() + s_root * solver.h_prev(),
                y_root[0],
                y_root[1],
            ));
        }
        max_width = max_width.max(y[0]).max(y[2]);
        if y[0] >= opts.collapse_cap || y[2] >= opts.collapse_cap {
            outcome = Outcome::Collapsed;
            break;
        }
        prev = y;
    }
    if outcome == Outcome::Bounded && max_width > 10.0 * scale0.max(e0.abs()) {
        outcome = Outcome::EscapedWindow;
    }
    Ok(TraceResult { points, outcome })
}

/// Root of the interpolated Im a_z on the last accepted step, bracketed on
/// s ∈ [0, 1] with f(0) < 0 ≤ f(1): secant step when it stays inside the
/// bracket, bisection otherwise.
fn refine_crossing(solver: &Rkv65, f_lo: f64, f_hi: f64, tol: f64) -> (f64, State) {
    let eval = |s: f64| solver.interpolate(s)[3];
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let (mut fa, mut fb) = (f_lo, f_hi);
    let mut s_best = if fb.abs() < fa.abs() { b } else { a };
    for _ in 0..120 {
        let secant_ok = (fb - fa).abs() > 0.0;
        let mut s = if secant_ok { a - fa * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        if !(s > a && s < b) {
            s = 0.5 * (a + b);
        }
        let f = eval(s);
        s_best = s;
        if f.abs() <= tol || (b - a) < 1e-16 {
            break;
        }
        if f < 0.0 {
            a = s;
            fa = f;
        } else {
            b = s;
            fb = f;
        }
    }
    (s_best, solver.interpolate(s_best))
}

/// Run the ensemble and assemble the dataset. Seeds integrate in parallel;
/// results merge in seed order, so the dataset is independent of the worker
/// count.
pub fn surface_of_section(
    seeds: &[ComplexWidthState],
    p: &TrapParams,
    t_end: f64,
    opts: &SectionOptions,
) -> Result<SectionDataset, Error> {
    if seeds.is_empty() {
        return Err(Error::invalid_input("no seeds supplied"));
    }
    let energies: Vec<f64> = seeds.iter().map(|s| crate::dynamics::energy_of_state(s, p)).collect();
    let e_ref = energies[0];
    for e in &energies {
        if ((e - e_ref) / e_ref).abs() > 1e-6 {
            return Err(Error::invalid_input(format!(
                "seeds are not on a common energy shell: {e} vs {e_ref}"
            )));
        }
    }
    let traces: Vec<Result<TraceResult, Error>> = seeds
        .par_iter()
        .map(|seed| trace_section(seed, p, t_end, opts))
        .collect();
    let mut points = Vec::new();
    let mut outcomes = Vec::new();
    for (id, trace) in traces.into_iter().enumerate() {
        let trace = trace?;
        outcomes.push(TrajectoryRecord {
            trajectory_id: id,
            outcome: trace.outcome,
            crossings: trace.points.len(),
        });
        for (t, re, im) in trace.points {
            points.push(SectionPoint { re_a_r: re, im_a_r: im, crossing_time: t, trajectory_id: id });
        }
    }
    Ok(SectionDataset { energy: e_ref, points, outcomes })
}

// --- island tracking ----------------------------------------------------------

/// Section coordinates (Re A_r, Im A_r) of the stable periodic orbit at the
/// given energy, continued from `start` (or constructed from the ground
/// state when absent) and polished by iterating toward the centroid of its
/// own crossings.
pub fn island_center(
    p: &TrapParams,
    energy: f64,
    start: Option<(f64, f64)>,
    opts: &SectionOptions,
) -> Result<(f64, f64), Error> {
    let ground = find_ground(p)?;
    let window = 0.45 * default_window(p); // ~250 crossings when bounded
    let mut center = match start {
        Some(c) => c,
        None => relaxed_radial_seed(p, energy, &ground)?,
    };
    let mut best: Option<((f64, f64), f64)> = None;
    for _ in 0..4 {
        let Some(seed) = section_state(energy, center.0, center.1, p, ground.widths.a_z) else {
            break;
        };
        let trace = trace_section(&seed, p, window, opts)?;
        if trace.outcome != Outcome::Bounded || trace.points.len() < 10 {
            break;
        }
        let n = trace.points.len() as f64;
        let (mut mre, mut mim) = (0.0, 0.0);
        let (mut lo_re, mut hi_re) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(_, re, im) in &trace.points {
            mre += re;
            mim += im;
            lo_re = lo_re.min(re);
            hi_re = hi_re.max(re);
        }
        let next = (mre / n, mim / n);
        let spread = hi_re - lo_re;
        if best.as_ref().map_or(true, |(_, sp)| spread < *sp) {
            best = Some((next, spread));
        }
        if spread < 1e-6 * center.0 {
            break;
        }
        center = next;
    }
    best.map(|(c, _)| c).ok_or_else(|| {
        Error::NoConvergence("no bounded island orbit found at this energy".into())
    })
}

/// One continuation step of the island center from a known center at a
/// lower energy, bisecting the energy increment when the direct jump loses
/// the island.
fn island_step(
    p: &TrapParams,
    e_from: f64,
    c_from: (f64, f64),
    e_to: f64,
    opts: &SectionOptions,
    depth: u32,
) -> Result<(f64, f64), Error> {
    match island_center(p, e_to, Some(c_from), opts) {
        Ok(c) => Ok(c),
        Err(_) if depth > 0 => {
            let e_mid = 0.5 * (e_from + e_to);
            let c_mid = island_step(p, e_from, c_from, e_mid, opts, depth - 1)?;
            island_step(p, e_mid, c_mid, e_to, opts, depth - 1)
        }
        Err(e) => Err(e),
    }
}

/// Island centers along an ascending energy ladder, continued upward with
/// adaptive energy sub-steps.
pub fn island_chain(
    p: &TrapParams,
    energies: &[f64],
    opts: &SectionOptions,
) -> Result<Vec<(f64, f64)>, Error> {
    let mut out = Vec::with_capacity(energies.len());
    let mut prev: Option<(f64, (f64, f64))> = None;
    for &energy in energies {
        let c = match prev {
            None => island_center(p, energy, None, opts)?,
            Some((e0, c0)) => island_step(p, e0, c0, energy, opts, 6)?,
        };
        out.push(c);
        prev = Some((energy, c));
    }
    Ok(out)
}

/// Seed with the radial direction relaxed (∂E/∂A_r = 0 on the slice) at the
/// requested energy: all excess energy goes into the axial breathing mode,
/// which lands near the central periodic orbit.
fn relaxed_radial_seed(
    p: &TrapParams,
    energy: f64,
    ground: &StationaryState,
) -> Result<(f64, f64), Error> {
    let curve_energy = |a_r: f64| -> Option<f64> {
        let az = az_relaxed_radial(a_r, p, ground.widths.a_z)?;
        Some(energy4(
            &[a_r, 0.0, az, 0.0],
            p.scaled_gamma_r,
            p.scaled_gamma_z,
            p.scattering_ratio,
            Couplings::FULL,
        ))
    };
    let n = 100;
    let (lo, hi) = (0.02 * ground.widths.a_r, ground.widths.a_r);
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let a_r = lo * (hi / lo).powf(i as f64 / n as f64);
        let Some(e) = curve_energy(a_r) else {
            prev = None;
            continue;
        };
        if let Some((pa, pe)) = prev {
            if (pe - energy) * (e - energy) <= 0.0 {
                let (mut a, mut b) = (pa, a_r);
                let mut fa = pe - energy;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = curve_energy(m).map(|v| v - energy).unwrap_or(f64::NAN);
                    if !fm.is_finite() {
                        break;
                    }
                    if fa * fm <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                    if (b - a) < 1e-13 * b {
                        break;
                    }
                }
                return Ok((0.5 * (a + b), 0.0));
            }
        }
        prev = Some((a_r, e));
    }
    Err(Error::NoConvergence(
        "no relaxed-radial section state at this energy".into(),
    ))
}

fn az_relaxed_radial(a_r: f64, p: &TrapParams, scale: f64) -> Option<f64> {
    let g = |az: f64| energy_gradient_with(&WidthVector { a_r, a_z: az }, p, Couplings::FULL)[0];
    let lo = 1e-8 * scale;
    if !(g(lo) < 0.0) {
        return None;
    }
    let mut hi = 1e2 * scale;
    while g(hi) < 0.0 {
        hi *= 10.0;
        if hi > 1e11 * scale {
            return None;
        }
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-14 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// The seven-panel energy ladder as multiples of the ground-state energy.
pub fn panel_energy_ladder(e_gs: f64) -> Vec<f64> {
    [1.0, 5.00 / 4.24, 6.00 / 4.24, 9.00 / 4.24, 15.0 / 4.24, 30.0 / 4.24, 60.0 / 4.24]
        .iter()
        .map(|m| m * e_gs)
        .collect()
}

/// One dataset per energy, each seeded with the ground column, the
/// continued island orbit (tracked upward through the ladder), and
/// box-random seeds. Per-panel failures are reported without aborting the
/// sweep.
pub fn panel_sweep(
    p: &TrapParams,
    energies: &[f64],
    n_per_panel: usize,
    t_end: f64,
    opts: &SectionOptions,
) -> Result<Vec<Result<SectionDataset, Error>>, Error> {
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid_input("energies must be ascending"));
    }
    let ground = find_ground(p)?;
    let seed_box = SeedBox::default_for(&ground);
    let mut island: Option<(f64, (f64, f64))> = None;
    let mut out = Vec::with_capacity(energies.len());
    for &energy in energies {
        let result = (|| {
            let mut seeds = seed_initial_states(energy, p, n_per_panel, &seed_box, opts)?;
            if energy > ground.energy * (1.0 + 1e-9) {
                let stepped = match island {
                    None => island_center(p, energy, None, opts),
                    Some((e0, c0)) => island_step(p, e0, c0, energy, opts, 6),
                };
                match stepped {
                    Ok(center) => {
                        island = Some((energy, center));
                        if let Some(st) =
                            section_state(energy, center.0, center.1, p, ground.widths.a_z)
                        {
                            seeds.insert(0, st);
                        }
                    }
                    Err(_) => {} // no island found at this energy; random seeds stand
                }
            }
            surface_of_section(&seeds, p, t_end, opts)
        })();
        out.push(result);
    }
    Ok(out)
}
