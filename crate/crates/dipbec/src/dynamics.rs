//! Width dynamics from the time-dependent variational principle.
//!
//! Minimizing ‖iψ̇ − Hψ‖² over the Gaussian manifold projects the mean-field
//! flow onto the complex width parameters. Writing A_r = a_r + i·b_r and
//! A_z = a_z + i·b_z, the projection closes to
//!
//! ```text
//! ȧ_r = 8 a_r b_r            ḃ_r = −4a_r² + 4b_r² + γ_r² − 2a_r²·∂E_int/∂a_r
//! ȧ_z = 8 a_z b_z            ḃ_z = −4a_z² + 4b_z² + γ_z² − 4a_z²·∂E_int/∂a_z
//! ```
//!
//! with the interaction gradient evaluated at the real parts (the density
//! depends only on those). The flow is Hamiltonian: with q_r = −1/(2a_r),
//! p_r = b_r, q_z = −1/(4a_z), p_z = b_z these are canonical equations for
//! the energy of [`energy_of_state`], which is therefore a constant of
//! motion; real stationary states are its fixed points. Imaginary parts act
//! as momenta and contribute positive kinetic-like terms 2b_r²/a_r + b_z²/a_z.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::la::eig2_general;
use crate::meanfield::{interaction_energy, interaction_gradient, interaction_hessian, Couplings, WidthVector};
use crate::ode::{ImplicitMidpoint, Rkv65, State};
use crate::stationary::{Stability, StationaryState};
use crate::units::TrapParams;

/// Complex width parameters of the time-dependent trial state; the dynamical
/// phase-space point. Normalization and phase are dependent quantities and
/// are not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexWidthState {
    pub a_r: Complex64,
    pub a_z: Complex64,
}

impl ComplexWidthState {
    pub fn new(a_r: Complex64, a_z: Complex64) -> Result<Self, Error> {
        if !(a_r.re > 0.0) || !(a_z.re > 0.0) {
            return Err(Error::invalid_input("Re(A_r) and Re(A_z) must be positive"));
        }
        Ok(Self { a_r, a_z })
    }

    pub fn from_real(w: &WidthVector) -> Self {
        Self { a_r: Complex64::new(w.a_r, 0.0), a_z: Complex64::new(w.a_z, 0.0) }
    }

    pub(crate) fn to_array(self) -> State {
        [self.a_r.re, self.a_r.im, self.a_z.re, self.a_z.im]
    }

    pub(crate) fn from_array(y: &State) -> Self {
        Self { a_r: Complex64::new(y[0], y[1]), a_z: Complex64::new(y[2], y[3]) }
    }

    pub fn conj(&self) -> Self {
        Self { a_r: self.a_r.conj(), a_z: self.a_z.conj() }
    }
}

/// Why an integration window ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Reached the end of the window with bounded widths.
    Bounded,
    /// A width parameter exceeded the collapse cap (state shrank to a spike).
    Collapsed,
    /// Reached the end of the window while running away (beyond the escape
    /// threshold but below the collapse cap).
    EscapedWindow,
}

/// Recorded time evolution of the trial state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexWidthState>,
    pub energy_series: Vec<f64>,
    pub outcome: Outcome,
}

/// Linearization spectrum at a stationary state: the four κ of
/// δy(t) ~ e^{κt}, closed under κ → −κ and κ → κ̄.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StabilitySpectrum {
    pub eigenvalues: [Complex64; 4],
    pub classification: DynStability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DynStability {
    DynamicallyStable,
    DynamicallyUnstable,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Width value declaring collapse.
    pub collapse_cap: f64,
    /// Runaway label threshold: the window ends as escaped-integration-window
    /// if a width exceeded this multiple of max(initial width scale, |E|).
    /// On the energy shell every bounded configuration keeps its widths of
    /// order the scaled energy, so beyond that the state is in the collapse
    /// channel even before reaching the cap.
    pub escape_factor: f64,
    /// Abort threshold on relative energy drift, checked each accepted step.
    pub drift_abort: f64,
    /// Keep at most this many recorded points (uniform thinning).
    pub max_records: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            collapse_cap: 1e8,
            escape_factor: 10.0,
            drift_abort: 1e-6,
            max_records: 2_000_000,
        }
    }
}

pub(crate) fn rhs4(y: &State, g_r: f64, g_z: f64, s: f64, cpl: Couplings) -> State {
    let (a_r, b_r, a_z, b_z) = (y[0], y[1], y[2], y[3]);
    if !(a_r > 0.0) || !(a_z > 0.0) {
        return [f64::NAN; 4];
    }
    let gi = interaction_gradient(&WidthVector { a_r, a_z }, s, cpl);
    [
        8.0 * a_r * b_r,
        -4.0 * a_r * a_r + 4.0 * b_r * b_r + g_r * g_r - 2.0 * a_r * a_r * gi[0],
        8.0 * a_z * b_z,
        -4.0 * a_z * a_z + 4.0 * b_z * b_z + g_z * g_z - 4.0 * a_z * a_z * gi[1],
    ]
}

/// Time derivative of the complex width parameters under the projected
/// mean-field flow.
pub fn equations_of_motion(s: &ComplexWidthState, p: &TrapParams) -> ComplexWidthState {
    equations_of_motion_with(s, p, Couplings::FULL)
}

pub fn equations_of_motion_with(
    s: &ComplexWidthState,
    p: &TrapParams,
    cpl: Couplings,
) -> ComplexWidthState {
    let d = rhs4(
        &s.to_array(),
        p.scaled_gamma_r,
        p.scaled_gamma_z,
        p.scattering_ratio,
        cpl,
    );
    ComplexWidthState { a_r: Complex64::new(d[0], d[1]), a_z: Complex64::new(d[2], d[3]) }
}

pub(crate) fn energy4(y: &State, g_r: f64, g_z: f64, s: f64, cpl: Couplings) -> f64 {
    let (a_r, b_r, a_z, b_z) = (y[0], y[1], y[2], y[3]);
    let w = WidthVector { a_r, a_z };
    let (contact, dipolar) = interaction_energy(&w, s, cpl);
    2.0 * (a_r * a_r + b_r * b_r) / a_r
        + (a_z * a_z + b_z * b_z) / a_z
        + g_r * g_r / (2.0 * a_r)
        + g_z * g_z / (4.0 * a_z)
        + contact
        + dipolar
}

/// Conserved scaled mean-field energy of the complex trial state. Reduces to
/// the real energy functional when the imaginary parts vanish.
pub fn energy_of_state(s: &ComplexWidthState, p: &TrapParams) -> f64 {
    energy_of_state_with(s, p, Couplings::FULL)
}

pub fn energy_of_state_with(s: &ComplexWidthState, p: &TrapParams, cpl: Couplings) -> f64 {
    energy4(
        &s.to_array(),
        p.scaled_gamma_r,
        p.scaled_gamma_z,
        p.scattering_ratio,
        cpl,
    )
}

/// Integrate the width dynamics up to `t_end` with the adaptive 6(5) pair.
/// Terminates early with [`Outcome::Collapsed`] once a width exceeds the
/// collapse cap; energy drift is monitored on every accepted step.
pub fn evolve(
    s0: &ComplexWidthState,
    p: &TrapParams,
    t_end: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory, Error> {
    evolve_with(s0, p, t_end, opts, Couplings::FULL)
}

pub fn evolve_with(
    s0: &ComplexWidthState,
    p: &TrapParams,
    t_end: f64,
    opts: &EvolveOptions,
    cpl: Couplings,
) -> Result<Trajectory, Error> {
    if !(t_end > 0.0) {
        return Err(Error::invalid_input("t_end must be positive"));
    }
    let (g_r, g_z, s) = (p.scaled_gamma_r, p.scaled_gamma_z, p.scattering_ratio);
    let rhs = move |y: &State| rhs4(y, g_r, g_z, s, cpl);
    let y0 = s0.to_array();
    let e0 = energy4(&y0, g_r, g_z, s, cpl);
    let scale0 = y0[0].abs().max(y0[2].abs());

    let mut solver = Rkv65::new(opts.rtol, opts.atol.max(opts.rtol * scale0));
    solver.h_max = t_end;
    solver.init(&rhs, 0.0, y0);
    let mut times = vec![0.0];
    let mut states = vec![*s0];
    let mut energies = vec![e0];
    let mut outcome = Outcome::Bounded;
    let mut max_width = scale0;
    while solver.t() < t_end {
        solver.step(&rhs)?;
        let y = *solver.y();
        let e = energy4(&y, g_r, g_z, s, cpl);
        let drift = ((e - e0) / e0).abs();
        if drift > opts.drift_abort {
            return Err(Error::EnergyDrift { t: solver.t(), drift, tol: opts.drift_abort });
        }
        max_width = max_width.max(y[0]).max(y[2]);
        if y[0] >= opts.collapse_cap || y[2] >= opts.collapse_cap {
            times.push(solver.t());
            states.push(ComplexWidthState::from_array(&y));
            energies.push(e);
            outcome = Outcome::Collapsed;
            break;
        }
        if solver.t() >= t_end {
            // land exactly on the window end via dense output
            let s_frac = (t_end - solver.t_prev()) / solver.h_prev();
            let yi = solver.interpolate(s_frac);
            times.push(t_end);
            states.push(ComplexWidthState::from_array(&yi));
            energies.push(energy4(&yi, g_r, g_z, s, cpl));
            break;
        }
        times.push(solver.t());
        states.push(ComplexWidthState::from_array(&y));
        energies.push(e);
    }
    if outcome == Outcome::Bounded && max_width > opts.escape_factor * scale0.max(e0.abs()) {
        outcome = Outcome::EscapedWindow;
    }
    if times.len() > opts.max_records {
        let stride = times.len().div_ceil(opts.max_records);
        let pick = |v: &Vec<f64>| -> Vec<f64> { v.iter().step_by(stride).copied().collect() };
        let last = (*times.last().unwrap(), *states.last().unwrap(), *energies.last().unwrap());
        let mut t2 = pick(&times);
        let mut s2: Vec<ComplexWidthState> = states.iter().step_by(stride).copied().collect();
        let mut e2 = pick(&energies);
        if *t2.last().unwrap() != last.0 {
            t2.push(last.0);
            s2.push(last.1);
            e2.push(last.2);
        }
        times = t2;
        states = s2;
        energies = e2;
    }
    Ok(Trajectory { times, states, energy_series: energies, outcome })
}

// --- linear stability -------------------------------------------------------

fn sqrt_signed(mu: Complex64) -> Complex64 {
    if mu.im == 0.0 {
        if mu.re >= 0.0 {
            Complex64::new(mu.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-mu.re).sqrt())
        }
    } else {
        mu.sqrt()
    }
}

/// 4×4 Jacobian of the flow at a real fixed point, reduced to the 2×2
/// product structure: in the ordering (a, b) the Jacobian is [[0, B], [C, 0]]
/// with B = diag(8a_r, 8a_z), so κ² runs over the eigenvalues of B·C.
fn bc_matrix(w: &WidthVector, p: &TrapParams, cpl: Couplings) -> [[f64; 2]; 2] {
    let s = p.scattering_ratio;
    let gi = interaction_gradient(w, s, cpl);
    let hi = interaction_hessian(w, s, cpl);
    let m_rr = -8.0 * w.a_r - 4.0 * w.a_r * gi[0] - 2.0 * w.a_r * w.a_r * hi[0][0];
    let m_rz = -2.0 * w.a_r * w.a_r * hi[0][1];
    let m_zr = -4.0 * w.a_z * w.a_z * hi[1][0];
    let m_zz = -8.0 * w.a_z - 8.0 * w.a_z * gi[1] - 4.0 * w.a_z * w.a_z * hi[1][1];
    [
        [8.0 * w.a_r * m_rr, 8.0 * w.a_r * m_rz],
        [8.0 * w.a_z * m_zr, 8.0 * w.a_z * m_zz],
    ]
}

/// Linearize the flow around a converged stationary state and classify it.
pub fn linearize(st: &StationaryState, p: &TrapParams) -> StabilitySpectrum {
    linearize_widths(&st.widths, p, Couplings::FULL)
}

pub fn linearize_widths(w: &WidthVector, p: &TrapParams, cpl: Couplings) -> StabilitySpectrum {
    let bc = bc_matrix(w, p, cpl);
    let pairs = eig2_general(&bc);
    let k1 = sqrt_signed(pairs[0].0);
    let k2 = sqrt_signed(pairs[1].0);
    let eigenvalues = [k1, -k1, k2, -k2];
    let scale = eigenvalues.iter().map(|k| k.norm()).fold(0.0, f64::max);
    let stable = eigenvalues.iter().all(|k| k.re.abs() <= 1e-8 * scale.max(1.0));
    StabilitySpectrum {
        eigenvalues,
        classification: if stable {
            DynStability::DynamicallyStable
        } else {
            DynStability::DynamicallyUnstable
        },
    }
}

/// Fill the stability tag of a stationary state from its linearization.
pub fn classify_state(st: &StationaryState, p: &TrapParams) -> StationaryState {
    let spectrum = linearize(st, p);
    StationaryState {
        stability: match spectrum.classification {
            DynStability::DynamicallyStable => Stability::Stable,
            DynStability::DynamicallyUnstable => Stability::Unstable,
        },
        ..*st
    }
}

/// Unstable eigendirection (growth rate κ > 0 and the 4-vector
/// (δa_r, δb_r, δa_z, δb_z)) at a saddle, if one exists.
pub fn unstable_direction(st: &StationaryState, p: &TrapParams) -> Option<(f64, State)> {
    let w = st.widths;
    let bc = bc_matrix(&w, p, Couplings::FULL);
    let pairs = eig2_general(&bc);
    let mut best: Option<(f64, [Complex64; 2])> = None;
    for (mu, v) in pairs {
        let k = sqrt_signed(mu);
        if k.re > 0.0 && k.im == 0.0 {
            if best.map_or(true, |(bk, _)| k.re > bk) {
                best = Some((k.re, v));
            }
        }
    }
    let (kappa, v) = best?;
    // b-components from ȧ = B·b on the eigvector: b = κ B⁻¹ a
    let dir = [
        v[0].re,
        kappa * v[0].re / (8.0 * w.a_r),
        v[1].re,
        kappa * v[1].re / (8.0 * w.a_z),
    ];
    let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    Some((kappa, [dir[0] / n, dir[1] / n, dir[2] / n, dir[3] / n]))
}

// --- symplectic cross-check --------------------------------------------------

/// Canonical coordinates (q_r, p_r, q_z, p_z) = (−1/(2a_r), b_r, −1/(4a_z), b_z)
/// in which the projected flow is canonical with Hamiltonian
/// [`energy_of_state`].
pub fn widths_to_canonical(y: &State) -> State {
    [-1.0 / (2.0 * y[0]), y[1], -1.0 / (4.0 * y[2]), y[3]]
}

pub fn canonical_to_widths(z: &State) -> State {
    [-1.0 / (2.0 * z[0]), z[1], -1.0 / (4.0 * z[2]), z[3]]
}

/// Fixed-step symplectic evolution (implicit midpoint in canonical
/// coordinates). A cross-check for the adaptive integrator; returns the
/// final state after n steps of size h.
pub fn evolve_symplectic(
    s0: &ComplexWidthState,
    p: &TrapParams,
    h: f64,
    n_steps: usize,
) -> Result<ComplexWidthState, Error> {
    let (g_r, g_z, s) = (p.scaled_gamma_r, p.scaled_gamma_z, p.scattering_ratio);
    let rhs_canonical = move |z: &State| -> State {
        let y = canonical_to_widths(z);
        if !(y[0] > 0.0) || !(y[2] > 0.0) {
            return [f64::NAN; 4];
        }
        let d = rhs4(&y, g_r, g_z, s, Couplings::FULL);
        // q̇ = ȧ·dq/da with dq_r/da_r = 1/(2a_r²), dq_z/da_z = 1/(4a_z²)
        [
            d[0] / (2.0 * y[0] * y[0]),
            d[1],
            d[2] / (4.0 * y[2] * y[2]),
            d[3],
        ]
    };
    let mp = ImplicitMidpoint::new(h);
    let mut z = widths_to_canonical(&s0.to_array());
    for _ in 0..n_steps {
        z = mp.step(&rhs_canonical, &z)?;
    }
    let y = canonical_to_widths(&z);
    ComplexWidthState::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::{find_ground, stationary_pair};
    use approx::assert_relative_eq;

    fn reference_trap(s: f64) -> TrapParams {
        TrapParams::from_mean(s, 3.4e4, 6.0).unwrap()
    }

    #[test]
    fn stationary_states_are_fixed_points() {
        let p = reference_trap(0.1);
        let (g, e) = stationary_pair(&p).unwrap();
        for st in [g, e] {
            let d = equations_of_motion(&ComplexWidthState::from_real(&st.widths), &p);
            // scale of the quadratic terms entering the flow
            let scale = (4.0 * st.widths.a_z * st.widths.a_z)
                .max(p.scaled_gamma_z * p.scaled_gamma_z);
            let norm = (d.a_r.norm_sqr() + d.a_z.norm_sqr()).sqrt();
            assert!(norm / scale <= 1e-9, "relative fixed-point residual {}", norm / scale);
        }
    }

    #[test]
    fn noninteracting_fixed_point_and_breathing_frequency() {
        let p = TrapParams::new(0.0, 10.0, 10.0).unwrap();
        let w = WidthVector::new(5.0, 5.0).unwrap();
        let d = equations_of_motion_with(&ComplexWidthState::from_real(&w), &p, Couplings::NONE);
        assert!(d.a_r.norm() < 1e-12 && d.a_z.norm() < 1e-12);
        // linearization: the transverse mode oscillates at 8·A* = 4γ
        let spec = linearize_widths(&w, &p, Couplings::NONE);
        let mut ims: Vec<f64> = spec.eigenvalues.iter().map(|k| k.im).collect();
        ims.sort_by(f64::total_cmp);
        assert_relative_eq!(ims[3], 40.0, max_relative = 1e-12);
        assert_eq!(spec.classification, DynStability::DynamicallyStable);

        // evolve a small radial perturbation and count upward zero crossings
        let s0 = ComplexWidthState::new(Complex64::new(5.0 * 1.001, 0.0), Complex64::new(5.0, 0.0))
            .unwrap();
        let opts = EvolveOptions { drift_abort: 1e-5, ..Default::default() };
        let traj = evolve_with(&s0, &p, 20.0, &opts, Couplings::NONE).unwrap();
        assert_eq!(traj.outcome, Outcome::Bounded);
        let mut crossings = Vec::new();
        for i in 1..traj.times.len() {
            let f0 = traj.states[i - 1].a_r.re - 5.0;
            let f1 = traj.states[i].a_r.re - 5.0;
            if f0 < 0.0 && f1 >= 0.0 {
                let t0 = traj.times[i - 1];
                let t1 = traj.times[i];
                crossings.push(t0 + (t1 - t0) * (-f0) / (f1 - f0));
            }
        }
        assert!(crossings.len() > 50);
        let n = crossings.len();
        let omega = 2.0 * std::f64::consts::PI * (n - 1) as f64
            / (crossings[n - 1] - crossings[0]);
        assert_relative_eq!(omega, 40.0, max_relative = 1e-3);
    }

    #[test]
    fn trajectory_frequencies_match_linearization() {
        // perturb the interacting ground state along each eigenplane and
        // compare counted oscillation frequencies with Im(kappa)
        let p = reference_trap(0.1);
        let g = find_ground(&p).unwrap();
        let w = g.widths;
        let gi = crate::meanfield::interaction_gradient(&w, p.scattering_ratio, Couplings::FULL);
        let hi = crate::meanfield::interaction_hessian(&w, p.scattering_ratio, Couplings::FULL);
        let m_rr = -8.0 * w.a_r - 4.0 * w.a_r * gi[0] - 2.0 * w.a_r * w.a_r * hi[0][0];
        let m_rz = -2.0 * w.a_r * w.a_r * hi[0][1];
        let m_zr = -4.0 * w.a_z * w.a_z * hi[1][0];
        let m_zz = -8.0 * w.a_z - 8.0 * w.a_z * gi[1] - 4.0 * w.a_z * w.a_z * hi[1][1];
        let bc = [
            [8.0 * w.a_r * m_rr, 8.0 * w.a_r * m_rz],
            [8.0 * w.a_z * m_zr, 8.0 * w.a_z * m_zz],
        ];
        for (mu, v) in crate::la::eig2_general(&bc) {
            assert!(mu.im == 0.0 && mu.re < 0.0, "ground modes must be oscillatory");
            let omega = (-mu.re).sqrt();
            // mode-aligned perturbation in the width plane
            let amp = 1e-4 * (w.a_r * w.a_r + w.a_z * w.a_z).sqrt();
            let s0 = ComplexWidthState::new(
                Complex64::new(w.a_r + amp * v[0].re, 0.0),
                Complex64::new(w.a_z + amp * v[1].re, 0.0),
            )
            .unwrap();
            let t_end = 60.0 * 2.0 * std::f64::consts::PI / omega;
            let traj = evolve(&s0, &p, t_end, &EvolveOptions::default()).unwrap();
            // count upward crossings of the dominant perturbed coordinate
            let (pick, base): (fn(&ComplexWidthState) -> f64, f64) =
                if (v[0].re * w.a_r).abs() > (v[1].re * w.a_z).abs() {
                    (|s| s.a_r.re, w.a_r)
                } else {
                    (|s| s.a_z.re, w.a_z)
                };
            let mut crossings = Vec::new();
            for i in 1..traj.times.len() {
                let f0 = pick(&traj.states[i - 1]) - base;
                let f1 = pick(&traj.states[i]) - base;
                if f0 < 0.0 && f1 >= 0.0 {
                    let t0 = traj.times[i - 1];
                    crossings.push(t0 + (traj.times[i] - t0) * (-f0) / (f1 - f0));
                }
            }
            assert!(crossings.len() > 30, "only {} crossings", crossings.len());
            let n = crossings.len();
            let measured =
                2.0 * std::f64::consts::PI * (n - 1) as f64 / (crossings[n - 1] - crossings[0]);
            assert!(
                (measured - omega).abs() / omega <= 1e-3,
                "mode frequency {measured} vs linearization {omega}"
            );
        }
    }

    #[test]
    fn trajectory_times_strictly_increase() {
        let p = reference_trap(0.1);
        let g = find_ground(&p).unwrap();
        let s0 = ComplexWidthState::new(
            Complex64::new(g.widths.a_r * 1.1, 0.0),
            Complex64::new(g.widths.a_z, 0.0),
        )
        .unwrap();
        let t_z = 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);
        let traj = evolve(&s0, &p, 10.0 * t_z, &EvolveOptions::default()).unwrap();
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_eq!(traj.times.len(), traj.states.len());
        assert_eq!(traj.times.len(), traj.energy_series.len());
    }

    #[test]
    fn energy_conserved_on_bounded_trajectory() {
        let p = reference_trap(0.1);
        let g = find_ground(&p).unwrap();
        let s0 = ComplexWidthState::new(
            Complex64::new(g.widths.a_r * 1.05, 0.0),
            Complex64::new(g.widths.a_z * 0.97, 0.02 * g.widths.a_z),
        )
        .unwrap();
        let t_z = 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);
        let traj = evolve(&s0, &p, 550.0 * t_z, &EvolveOptions::default()).unwrap();
        assert_eq!(traj.outcome, Outcome::Bounded);
        let e0 = traj.energy_series[0];
        let drift = traj
            .energy_series
            .iter()
            .map(|e| ((e - e0) / e0).abs())
            .fold(0.0, f64::max);
        assert!(drift <= 1e-8, "relative energy drift {drift}");
    }

    #[test]
    fn ground_state_start_stays_put() {
        let p = reference_trap(0.1);
        let g = find_ground(&p).unwrap();
        let s0 = ComplexWidthState::from_real(&g.widths);
        let t_z = 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);
        let traj = evolve(&s0, &p, 50.0 * t_z, &EvolveOptions::default()).unwrap();
        assert_eq!(traj.outcome, Outcome::Bounded);
        let last = traj.states.last().unwrap();
        assert_relative_eq!(last.a_r.re, g.widths.a_r, max_relative = 1e-7);
        assert_relative_eq!(last.a_z.re, g.widths.a_z, max_relative = 1e-7);
        assert!(last.a_r.im.abs() < 1e-6 * g.widths.a_r);
    }

    #[test]
    fn time_reversal_by_conjugation() {
        let p = reference_trap(0.1);
        let g = find_ground(&p).unwrap();
        let s0 = ComplexWidthState::new(
            Complex64::new(g.widths.a_r * 1.1, 0.0),
            Complex64::new(g.widths.a_z * 0.9, 0.0),
        )
        .unwrap();
        let t_z = 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);
        let t = 20.0 * t_z;
        let fwd = evolve(&s0, &p, t, &EvolveOptions::default()).unwrap();
        let back = evolve(&fwd.states.last().unwrap().conj(), &p, t, &EvolveOptions::default())
            .unwrap();
        let end = back.states.last().unwrap().conj();
        let scale = (s0.a_r.norm_sqr() + s0.a_z.norm_sqr()).sqrt();
        let dist = ((end.a_r - s0.a_r).norm_sqr() + (end.a_z - s0.a_z).norm_sqr()).sqrt();
        assert!(dist / scale <= 1e-6, "time reversal error {}", dist / scale);
    }

    #[test]
    fn stability_classification_matches_branch_character() {
        let p = reference_trap(0.1);
        let (g, e) = stationary_pair(&p).unwrap();
        let sg = linearize(&g, &p);
        assert_eq!(sg.classification, DynStability::DynamicallyStable);
        for k in sg.eigenvalues {
            assert!(k.re.abs() <= 1e-8, "ground κ has real part {k}");
        }
        // frozen reference frequencies
        let mut ims: Vec<f64> = sg.eigenvalues.iter().map(|k| k.im).filter(|v| *v > 0.0).collect();
        ims.sort_by(f64::total_cmp);
        assert_relative_eq!(ims[0], 61722.554, max_relative = 1e-5);
        assert_relative_eq!(ims[1], 409431.775, max_relative = 1e-5);

        let se = linearize(&e, &p);
        assert_eq!(se.classification, DynStability::DynamicallyUnstable);
        let max_re = se.eigenvalues.iter().map(|k| k.re).fold(f64::MIN, f64::max);
        assert_relative_eq!(max_re, 245401.688, max_relative = 1e-5);

        // spectrum closed under negation and conjugation
        for spec in [sg, se] {
            for k in spec.eigenvalues {
                let has_neg = spec.eigenvalues.iter().any(|q| (q + k).norm() <= 1e-8 * k.norm().max(1.0));
                let has_conj = spec.eigenvalues.iter().any(|q| (q - k.conj()).norm() <= 1e-8 * k.norm().max(1.0));
                assert!(has_neg && has_conj);
            }
        }
        // classify_state fills the tag
        let tagged = classify_state(&g, &p);
        assert_eq!(tagged.stability, Stability::Stable);
        assert_eq!(classify_state(&e, &p).stability, Stability::Unstable);
    }

    #[test]
    fn saddle_perturbation_along_unstable_direction_collapses() {
        let p = reference_trap(0.1);
        let (g, e) = stationary_pair(&p).unwrap();
        let _ = g;
        let (kappa, dir) = unstable_direction(&e, &p).expect("saddle has a real unstable mode");
        assert!(kappa > 0.0);
        // push toward larger widths (collapse side)
        let sign = if dir[0] > 0.0 { 1.0 } else { -1.0 };
        let scale = 1e-4 * (e.widths.a_r.powi(2) + e.widths.a_z.powi(2)).sqrt();
        let y = [
            e.widths.a_r + sign * scale * dir[0],
            sign * scale * dir[1],
            e.widths.a_z + sign * scale * dir[2],
            sign * scale * dir[3],
        ];
        let s0 = ComplexWidthState::from_array(&y);
        let t_z = 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);
        let opts = EvolveOptions { drift_abort: 1e-4, ..Default::default() };
        let traj = evolve(&s0, &p, 200.0 * t_z, &opts).unwrap();
        assert_eq!(traj.outcome, Outcome::Collapsed);
        let last = traj.states.last().unwrap();
        assert!(last.a_r.re >= 1e8 || last.a_z.re >= 1e8);
    }

    #[test]
    fn energy_of_state_reduces_to_real_functional_and_imaginary_parts_cost_energy() {
        let p = reference_trap(0.1);
        let g = find_ground(&p).unwrap();
        let real = ComplexWidthState::from_real(&g.widths);
        assert_relative_eq!(energy_of_state(&real, &p), g.energy, max_relative = 1e-13);
        for (dbr, dbz) in [(0.1, 0.0), (0.0, 0.1), (0.05, -0.03)] {
            let bumped = ComplexWidthState {
                a_r: g.widths.a_r * Complex64::new(1.0, dbr),
                a_z: g.widths.a_z * Complex64::new(1.0, dbz),
            };
            assert!(energy_of_state(&bumped, &p) > g.energy);
        }
    }

    #[test]
    fn symplectic_midpoint_agrees_with_adaptive_integrator() {
        let p = reference_trap(0.1);
        let g = find_ground(&p).unwrap();
        let s0 = ComplexWidthState::new(
            Complex64::new(g.widths.a_r * 1.04, 0.0),
            Complex64::new(g.widths.a_z * 0.98, 0.0),
        )
        .unwrap();
        let t_z = 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);
        let t = 5.0 * t_z;
        let n = 4000;
        let sympl = evolve_symplectic(&s0, &p, t / n as f64, n).unwrap();
        let adaptive = evolve(&s0, &p, t, &EvolveOptions::default()).unwrap();
        let a = adaptive.states.last().unwrap();
        assert_relative_eq!(sympl.a_r.re, a.a_r.re, max_relative = 1e-5);
        assert_relative_eq!(sympl.a_z.re, a.a_z.re, max_relative = 1e-5);
        // and conserves energy over a long fixed-step run
        let e0 = energy_of_state(&s0, &p);
        let long = evolve_symplectic(&s0, &p, t_z / 400.0, 160_000).unwrap();
        let drift = ((energy_of_state(&long, &p) - e0) / e0).abs();
        assert!(drift < 1e-6, "symplectic drift {drift}");
    }

    #[test]
    fn excited_start_with_generic_bump_goes_somewhere_bounded_or_collapses() {
        // between E_gs and E_es the motion is bounded
        let p = reference_trap(0.1);
        let (g, e) = stationary_pair(&p).unwrap();
        let s0 = ComplexWidthState::new(
            Complex64::new(g.widths.a_r * 1.3, 0.0),
            Complex64::new(g.widths.a_z * 1.3, 0.0),
        )
        .unwrap();
        let e_start = energy_of_state(&s0, &p);
        assert!(e_start > g.energy && e_start < e.energy);
        let t_z = 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);
        let traj = evolve(&s0, &p, 100.0 * t_z, &EvolveOptions::default()).unwrap();
        assert_eq!(traj.outcome, Outcome::Bounded);
    }
}
