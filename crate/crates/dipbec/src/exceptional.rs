//! Analytic continuation of the stationarity equations to complex scattering
//! length. Traversing a small circle around the fold and tracking both
//! solutions detects whether they are permuted after a full turn, which
//! certifies the fold as an exceptional point (a branch-point degeneracy of
//! the two states).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::la::solve2c;
use crate::meanfield::{complex_chemical_potential, complex_gradient, complex_hessian, Couplings};
use crate::stationary::{critical_fold, stationary_pair, FoldPoint};
use crate::units::TrapParams;

/// Stationary solution of the analytically continued equations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexStationaryState {
    /// (A_r, A_z) with positive real parts (normalizable trial state).
    pub widths: [Complex64; 2],
    /// Complex scaled chemical potential N²ε.
    pub chem_potential: Complex64,
}

/// One tracked angle sample on the circle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CircleSample {
    pub phi: f64,
    pub scattering: Complex64,
    pub states: [ComplexStationaryState; 2],
}

/// Result of one full traversal around a circle in the complex scattering
/// plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleResult {
    pub center: f64,
    pub radius: f64,
    pub samples: Vec<CircleSample>,
    pub permuted: bool,
}

/// Newton iteration in two complex variables on the continued gradient.
pub fn complex_find_stationary(
    p: &TrapParams,
    scattering: Complex64,
    guess: &[Complex64; 2],
) -> Result<ComplexStationaryState, Error> {
    if !(guess[0].re > 0.0) || !(guess[1].re > 0.0) {
        return Err(Error::invalid_input("guess must have positive real widths"));
    }
    let (g_r, g_z) = (p.scaled_gamma_r, p.scaled_gamma_z);
    let mut w = *guess;
    for _ in 0..200 {
        let g = complex_gradient(w[0], w[1], g_r, g_z, scattering);
        let res = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
        if res <= 1e-10 {
            return Ok(ComplexStationaryState {
                widths: w,
                chem_potential: complex_chemical_potential(w[0], w[1], g_r, g_z, scattering),
            });
        }
        let j = complex_hessian(w[0], w[1], g_r, g_z, scattering);
        let Some(d) = solve2c(&j, &[-g[0], -g[1]]) else {
            return Err(Error::NoConvergence("singular complex Hessian".into()));
        };
        w = [w[0] + d[0], w[1] + d[1]];
        if !(w[0].re > 0.0) || !(w[1].re > 0.0) {
            return Err(Error::NoConvergence(
                "lost normalizability: Re(width) <= 0 during complex Newton".into(),
            ));
        }
        if !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::NoConvergence("complex Newton diverged".into()));
        }
    }
    Err(Error::NoConvergence("complex Newton did not converge".into()))
}

/// Scales used to measure distances in (widths, ε) space.
#[derive(Clone, Copy)]
struct Metric {
    w: f64,
    eps: f64,
}

impl Metric {
    fn from_pair(a: &ComplexStationaryState, b: &ComplexStationaryState) -> Self {
        let w = a.widths[0]
            .norm()
            .max(a.widths[1].norm())
            .max(b.widths[0].norm())
            .max(b.widths[1].norm())
            .max(1e-300);
        let eps = a.chem_potential.norm().max(b.chem_potential.norm()).max(1e-300);
        Metric { w, eps }
    }

    fn dist(&self, a: &ComplexStationaryState, b: &ComplexStationaryState) -> f64 {
        (((a.widths[0] - b.widths[0]).norm_sqr() + (a.widths[1] - b.widths[1]).norm_sqr())
            / (self.w * self.w)
            + (a.chem_potential - b.chem_potential).norm_sqr() / (self.eps * self.eps))
            .sqrt()
    }
}

/// The two real solutions at a real scattering length near a known fold,
/// found from fold-informed guesses along the degenerate direction.
fn real_pair_near_fold(
    p: &TrapParams,
    fold: &FoldPoint,
    s_real: f64,
) -> Result<[ComplexStationaryState; 2], Error> {
    let s = Complex64::new(s_real, 0.0);
    let w0 = [
        Complex64::new(fold.widths.a_r, 0.0),
        Complex64::new(fold.widths.a_z, 0.0),
    ];
    let null = fold_null_direction(p, fold);
    let wnorm = (fold.widths.a_r.powi(2) + fold.widths.a_z.powi(2)).sqrt();
    let amp0 = (s_real - fold.scattering_ratio).abs().sqrt() * wnorm;
    for amp_scale in [1.0, 0.3, 3.0, 0.1] {
        let amp = amp0 * amp_scale;
        let g1 = [w0[0] + amp * null[0], w0[1] + amp * null[1]];
        let g2 = [w0[0] - amp * null[0], w0[1] - amp * null[1]];
        let (Ok(s1), Ok(s2)) = (
            complex_find_stationary(p, s, &g1),
            complex_find_stationary(p, s, &g2),
        ) else {
            continue;
        };
        let m = Metric::from_pair(&s1, &s2);
        if m.dist(&s1, &s2) > 1e-8 {
            // deterministic order: broader state (smaller Re A_r) first
            return Ok(if s1.widths[0].re <= s2.widths[0].re { [s1, s2] } else { [s2, s1] });
        }
    }
    Err(Error::NoConvergence("could not separate the two solutions near the fold".into()))
}

fn fold_null_direction(p: &TrapParams, fold: &FoldPoint) -> [f64; 2] {
    let h = crate::meanfield::energy_hessian(
        &fold.widths,
        &p.with_scattering(fold.scattering_ratio),
    );
    // eigenvector of the smaller-magnitude eigenvalue of the 2x2 symmetric H
    let eigs = crate::la::eigvals2_sym(&h);
    let l = if eigs[0].abs() <= eigs[1].abs() { eigs[0] } else { eigs[1] };
    let r0 = [h[0][0] - l, h[0][1]];
    let r1 = [h[1][0], h[1][1] - l];
    let v = if r0[0].abs() + r0[1].abs() >= r1[0].abs() + r1[1].abs() {
        [r0[1], -r0[0]]
    } else {
        [r1[1], -r1[0]]
    };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

/// Starting pair on the positive real axis of the circle.
fn starting_pair(p: &TrapParams, center: f64, radius: f64) -> Result<[ComplexStationaryState; 2], Error> {
    let s_start = center + radius;
    let fold = critical_fold(p, Couplings::FULL, (-1.0, 1.0 / 6.0 - 1e-9))?;
    if s_start > fold.scattering_ratio + 20.0 * radius.max(1e-4) {
        // far from the fold: the plain real pair is easy to find
        let (g, e) = stationary_pair(&p.with_scattering(s_start))?;
        let mk = |w: crate::meanfield::WidthVector, eps: f64| ComplexStationaryState {
            widths: [Complex64::new(w.a_r, 0.0), Complex64::new(w.a_z, 0.0)],
            chem_potential: Complex64::new(eps, 0.0),
        };
        return Ok([mk(g.widths, g.chem_potential), mk(e.widths, e.chem_potential)]);
    }
    real_pair_near_fold(p, &fold, s_start)
}

/// Traverse `turns` full circles of radius ϱ around `center` in the complex
/// scattering plane, tracking both solutions by continuation in the angle.
pub fn encircle_turns(
    p: &TrapParams,
    center: f64,
    radius: f64,
    n_steps: usize,
    turns: usize,
) -> Result<CircleResult, Error> {
    if !(radius > 0.0) {
        return Err(Error::invalid_input("radius must be positive"));
    }
    if n_steps < 16 {
        return Err(Error::invalid_input("n_steps must be at least 16"));
    }
    if turns == 0 {
        return Err(Error::invalid_input("turns must be at least 1"));
    }
    let start = starting_pair(p, center, radius)?;
    let mut n = n_steps;
    let mut last_err = None;
    while n <= 1024 {
        match traverse(p, center, radius, n, turns, &start) {
            Ok(res) => return Ok(res),
            Err(e @ Error::TrackingLoss { .. }) | Err(e @ Error::NoConvergence(_)) => {
                last_err = Some(e);
                n *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NoConvergence("circle tracking failed".into())))
}

/// One full circle; see [`encircle_turns`].
pub fn encircle(
    p: &TrapParams,
    center: f64,
    radius: f64,
    n_steps: usize,
) -> Result<CircleResult, Error> {
    encircle_turns(p, center, radius, n_steps, 1)
}

fn traverse(
    p: &TrapParams,
    center: f64,
    radius: f64,
    n: usize,
    turns: usize,
    start: &[ComplexStationaryState; 2],
) -> Result<CircleResult, Error> {
    let metric = Metric::from_pair(&start[0], &start[1]);
    let mut cur = *start;
    let mut samples = Vec::with_capacity(turns * n + 1);
    samples.push(CircleSample {
        phi: 0.0,
        scattering: Complex64::new(center + radius, 0.0),
        states: cur,
    });
    let mut max_jump = 0.0_f64;
    let total = turns * n;
    for k in 1..=total {
        let phi = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
        let s = Complex64::new(center, 0.0)
            + radius * Complex64::new(phi.cos(), phi.sin());
        let separation = metric.dist(&cur[0], &cur[1]);
        let bound = 0.25 * separation;
        let mut next = [cur[0], cur[1]];
        for i in 0..2 {
            let sol = complex_find_stationary(p, s, &cur[i].widths)?;
            let jump = metric.dist(&sol, &cur[i]);
            if jump > bound {
                return Err(Error::TrackingLoss { phi, jump, bound });
            }
            max_jump = max_jump.max(jump);
            next[i] = sol;
        }
        cur = next;
        samples.push(CircleSample { phi, scattering: s, states: cur });
    }
    // match endpoints to the starting pair
    let d00 = metric.dist(&cur[0], &start[0]);
    let d11 = metric.dist(&cur[1], &start[1]);
    let d01 = metric.dist(&cur[0], &start[1]);
    let d10 = metric.dist(&cur[1], &start[0]);
    let same = d00 + d11;
    let swapped = d01 + d10;
    let threshold = 10.0 * max_jump;
    if same.min(swapped) > threshold {
        return Err(Error::TrackingLoss {
            phi: 2.0 * std::f64::consts::PI * turns as f64,
            jump: same.min(swapped),
            bound: threshold,
        });
    }
    Ok(CircleResult {
        center,
        radius,
        samples,
        permuted: swapped < same,
    })
}

/// Exponent p of the branch splitting |ε₁ − ε₂| ∝ ϱ^p near the fold, fitted
/// in log-log over ϱ ∈ [1e-5, 1e-3]. The gap is measured on both real-axis
/// sides of the fold (real pair above, complex-conjugate pair below) and the
/// two are combined geometrically, which cancels the leading odd correction
/// to the square-root law.
pub fn branch_split_exponent(p: &TrapParams, fold: &FoldPoint) -> Result<f64, Error> {
    let rhos: Vec<f64> = (0..9).map(|i| 10f64.powf(-5.0 + 2.0 * i as f64 / 8.0)).collect();
    let null = fold_null_direction(p, fold);
    let wnorm = (fold.widths.a_r.powi(2) + fold.widths.a_z.powi(2)).sqrt();
    let w0 = [
        Complex64::new(fold.widths.a_r, 0.0),
        Complex64::new(fold.widths.a_z, 0.0),
    ];
    let mut ln_rho = Vec::new();
    let mut ln_gap = Vec::new();
    for &rho in &rhos {
        // above: two real solutions split along the degenerate direction
        let pair_up = real_pair_near_fold(p, fold, fold.scattering_ratio + rho)?;
        let gap_up = (pair_up[0].chem_potential - pair_up[1].chem_potential).norm();
        // below: complex-conjugate pair, reached with imaginary offsets
        let s_dn = Complex64::new(fold.scattering_ratio - rho, 0.0);
        let amp = Complex64::new(0.0, rho.sqrt() * wnorm);
        let s1 = complex_find_stationary(
            p,
            s_dn,
            &[w0[0] + amp * null[0], w0[1] + amp * null[1]],
        )?;
        let s2 = complex_find_stationary(
            p,
            s_dn,
            &[w0[0] - amp * null[0], w0[1] - amp * null[1]],
        )?;
        let gap_dn = (s1.chem_potential - s2.chem_potential).norm();
        if gap_up <= 0.0 || gap_dn <= 0.0 {
            return Err(Error::NoConvergence("degenerate splitting sample".into()));
        }
        ln_rho.push(rho.ln());
        ln_gap.push(0.5 * (gap_up.ln() + gap_dn.ln()));
    }
    // least-squares slope
    let n = ln_rho.len() as f64;
    let mx = ln_rho.iter().sum::<f64>() / n;
    let my = ln_gap.iter().sum::<f64>() / n;
    let sxx: f64 = ln_rho.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = ln_rho
        .iter()
        .zip(&ln_gap)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    Ok(sxy / sxx)
}
