//! Stationary states of the Gaussian energy surface: Newton solves, branch
//! continuation in the scattering length, fold (tangent-bifurcation)
//! location and the critical-threshold map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::la::{det2, solve2, solve3};
use crate::meanfield::{
    chemical_potential_with, contact_prefactor, energy_gradient_with, energy_hessian_with,
    mean_field_energy_with, Couplings, WidthVector,
};
use crate::units::TrapParams;

/// Branch label from the Hessian signature at the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Local minimum of the energy surface.
    Ground,
    /// Saddle point (collectively excited state).
    Excited,
    /// Degenerate Hessian: the merged state at a tangent bifurcation.
    FoldPoint,
}

/// Dynamical stability tag; filled in by the dynamics module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Unclassified,
}

/// A converged stationary point of the scaled mean-field energy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StationaryState {
    pub widths: WidthVector,
    /// Scaled chemical potential N²ε.
    pub chem_potential: f64,
    /// Scaled mean-field energy N²E.
    pub energy: f64,
    pub branch: Branch,
    pub stability: Stability,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Convergence threshold on the scaled gradient norm.
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { grad_tol: 1e-10, max_iter: 100 }
    }
}

fn classify(h: &[[f64; 2]; 2]) -> Branch {
    let d = det2(h);
    let scale = h[0][0].abs() * h[1][1].abs() + h[0][1].abs() * h[1][0].abs();
    if d.abs() <= 1e-10 * scale.max(1e-300) {
        return Branch::FoldPoint;
    }
    if d > 0.0 && h[0][0] > 0.0 {
        Branch::Ground
    } else {
        Branch::Excited
    }
}

/// Damped Newton iteration on the energy gradient. Backtracks to keep the
/// widths positive, requires sufficient decrease of |g|², and falls back to
/// regularized steps when the Hessian is near-singular.
fn newton_root(
    p: &TrapParams,
    cpl: Couplings,
    guess: &WidthVector,
    opts: &SolverOptions,
) -> Result<WidthVector, Error> {
    let mut w = *guess;
    let scale0 = guess.a_r.abs().max(guess.a_z.abs());
    for _ in 0..opts.max_iter {
        let g = energy_gradient_with(&w, p, cpl);
        let ng2 = g[0] * g[0] + g[1] * g[1];
        if ng2.sqrt() <= opts.grad_tol {
            return Ok(w);
        }
        let h = energy_hessian_with(&w, p, cpl);
        let hmax = h.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut accepted = false;
        for mu in [0.0, 1e-10, 1e-6, 1e-3, 1e-1] {
            let hreg = [
                [h[0][0] + mu * hmax, h[0][1]],
                [h[1][0], h[1][1] + mu * hmax],
            ];
            let Some(d) = solve2(&hreg, &[-g[0], -g[1]]) else { continue };
            let mut lam = 1.0_f64;
            while lam > 1e-14 && (w.a_r + lam * d[0] <= 0.0 || w.a_z + lam * d[1] <= 0.0) {
                lam *= 0.5;
            }
            while lam > 1e-14 {
                let wn = WidthVector { a_r: w.a_r + lam * d[0], a_z: w.a_z + lam * d[1] };
                let gn = energy_gradient_with(&wn, p, cpl);
                let ngn2 = gn[0] * gn[0] + gn[1] * gn[1];
                if ngn2.is_finite() && ngn2 <= ng2 * (1.0 - 1e-4 * lam) {
                    w = wn;
                    accepted = true;
                    break;
                }
                lam *= 0.5;
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            return Err(Error::NoStationaryState);
        }
        if !w.a_r.is_finite()
            || !w.a_z.is_finite()
            || w.a_r.max(w.a_z) > 1e15 * scale0
            || w.a_r.min(w.a_z) < 1e-15 * scale0
        {
            return Err(Error::NoStationaryState);
        }
    }
    let g = energy_gradient_with(&w, p, cpl);
    if (g[0] * g[0] + g[1] * g[1]).sqrt() <= opts.grad_tol {
        Ok(w)
    } else {
        Err(Error::NoConvergence(format!(
            "gradient norm {:.3e} after {} iterations",
            (g[0] * g[0] + g[1] * g[1]).sqrt(),
            opts.max_iter
        )))
    }
}

fn state_from_widths(p: &TrapParams, cpl: Couplings, w: WidthVector) -> Result<StationaryState, Error> {
    let e = mean_field_energy_with(&w, p, cpl)?;
    let h = energy_hessian_with(&w, p, cpl);
    Ok(StationaryState {
        widths: w,
        chem_potential: chemical_potential_with(&w, p, cpl),
        energy: e.total,
        branch: classify(&h),
        stability: Stability::Unclassified,
    })
}

/// Newton solve for a stationary state from an explicit guess.
pub fn find_stationary(p: &TrapParams, guess: &WidthVector) -> Result<StationaryState, Error> {
    find_stationary_with(p, guess, Couplings::FULL, &SolverOptions::default())
}

pub fn find_stationary_with(
    p: &TrapParams,
    guess: &WidthVector,
    cpl: Couplings,
    opts: &SolverOptions,
) -> Result<StationaryState, Error> {
    if !(guess.a_r > 0.0) || !(guess.a_z > 0.0) {
        return Err(Error::invalid_input("guess widths must be positive"));
    }
    let w = newton_root(p, cpl, guess, opts)?;
    state_from_widths(p, cpl, w)
}

/// Oscillator widths A = γ/2, the standard ground-state guess.
pub fn ground_guess(p: &TrapParams) -> WidthVector {
    WidthVector { a_r: p.scaled_gamma_r / 2.0, a_z: p.scaled_gamma_z / 2.0 }
}

/// Narrow-cloud guess for the excited state: the collapse mode elongates
/// along the dipole axis, so A_r is scaled up at fixed A_z.
pub fn excited_guess(ground: &WidthVector) -> WidthVector {
    WidthVector { a_r: 10.0 * ground.a_r, a_z: ground.a_z }
}

/// Ground state with a small multi-start ladder around the oscillator guess.
pub fn find_ground(p: &TrapParams) -> Result<StationaryState, Error> {
    find_ground_with(p, Couplings::FULL, &SolverOptions::default())
}

pub fn find_ground_with(
    p: &TrapParams,
    cpl: Couplings,
    opts: &SolverOptions,
) -> Result<StationaryState, Error> {
    let base = ground_guess(p);
    for t in [1.0, 0.1, 0.01, 1e-3, 10.0, 100.0] {
        let guess = WidthVector { a_r: t * base.a_r, a_z: t * base.a_z };
        if let Ok(st) = find_stationary_with(p, &guess, cpl, opts) {
            if st.branch == Branch::Ground {
                return Ok(st);
            }
        }
    }
    Err(Error::NoStationaryState)
}

/// Excited (saddle) state, given the ground state at the same parameters.
/// Tries the narrow-cloud scaling guesses first, then a coarse landscape
/// scan restricted to the indefinite-Hessian region.
pub fn find_excited(p: &TrapParams, ground: &StationaryState) -> Result<StationaryState, Error> {
    find_excited_with(p, ground, Couplings::FULL, &SolverOptions::default())
}

pub fn find_excited_with(
    p: &TrapParams,
    ground: &StationaryState,
    cpl: Couplings,
    opts: &SolverOptions,
) -> Result<StationaryState, Error> {
    let wg = ground.widths;
    let distinct = |w: &WidthVector| {
        (w.a_r - wg.a_r).abs() > 1e-6 * wg.a_r || (w.a_z - wg.a_z).abs() > 1e-6 * wg.a_z
    };
    for t in [10.0, 5.0, 20.0, 50.0, 3.0] {
        let guess = WidthVector { a_r: t * wg.a_r, a_z: wg.a_z };
        if let Ok(st) = find_stationary_with(p, &guess, cpl, opts) {
            if st.branch == Branch::Excited && distinct(&st.widths) {
                return Ok(st);
            }
        }
    }
    // scan for the saddle basin: indefinite Hessian, small gradient
    let mut candidates: Vec<(f64, WidthVector)> = Vec::new();
    for i in 0..=24 {
        for j in 0..=24 {
            let tr = 10f64.powf(3.0 * i as f64 / 24.0); // 1 .. 1e3
            let tz = 10f64.powf(-2.0 + 3.0 * j as f64 / 24.0); // 1e-2 .. 1e1
            let w = WidthVector { a_r: tr * wg.a_r, a_z: tz * wg.a_z };
            let h = energy_hessian_with(&w, p, cpl);
            if det2(&h) < 0.0 {
                let g = energy_gradient_with(&w, p, cpl);
                candidates.push((g[0] * g[0] + g[1] * g[1], w));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, guess) in candidates.into_iter().take(12) {
        if let Ok(st) = find_stationary_with(p, &guess, cpl, opts) {
            if st.branch == Branch::Excited && distinct(&st.widths) {
                return Ok(st);
            }
        }
    }
    Err(Error::NoStationaryState)
}

/// Ground and excited state at the same parameters.
pub fn stationary_pair(p: &TrapParams) -> Result<(StationaryState, StationaryState), Error> {
    let g = find_ground(p)?;
    let e = find_excited(p, &g)?;
    Ok((g, e))
}

// --- fold refinement -------------------------------------------------------

/// Fold point data: the scattering ratio where the two branches merge and
/// the common widths there.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FoldPoint {
    pub scattering_ratio: f64,
    pub widths: WidthVector,
}

/// Newton iteration on (∂E/∂A_r, ∂E/∂A_z, det H) = 0 in (A_r, A_z, a/a_d).
fn fold_newton(
    p: &TrapParams,
    cpl: Couplings,
    s0: f64,
    w0: &WidthVector,
) -> Result<FoldPoint, Error> {
    let mut x = [w0.a_r, w0.a_z, s0];
    let det_at = |x: &[f64; 3]| -> f64 {
        let w = WidthVector { a_r: x[0], a_z: x[1] };
        det2(&energy_hessian_with(&w, &p.with_scattering(x[2]), cpl))
    };
    for _ in 0..60 {
        let w = WidthVector { a_r: x[0], a_z: x[1] };
        let ps = p.with_scattering(x[2]);
        let g = energy_gradient_with(&w, &ps, cpl);
        let h = energy_hessian_with(&w, &ps, cpl);
        let d = det_at(&x);
        let hscale = h.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if gn < 1e-11 && d.abs() < 1e-12 * hscale * hscale {
            return Ok(FoldPoint { scattering_ratio: x[2], widths: w });
        }
        // rows: stationarity with d/ds from the contact term; det row by FD
        let cc = cpl.contact * contact_prefactor();
        let mut jac = [
            [h[0][0], h[0][1], cc * x[1].sqrt()],
            [h[1][0], h[1][1], cc * x[0] / (2.0 * x[1].sqrt())],
            [0.0, 0.0, 0.0],
        ];
        for i in 0..3 {
            let step = 1e-6 * x[i].abs().max(1e-9);
            let mut xp = x;
            let mut xm = x;
            xp[i] += step;
            xm[i] -= step;
            jac[2][i] = (det_at(&xp) - det_at(&xm)) / (2.0 * step);
        }
        let Some(delta) = solve3(&jac, &[-g[0], -g[1], -d]) else {
            return Err(Error::NoConvergence("singular Jacobian in fold refinement".into()));
        };
        let mut lam = 1.0_f64;
        while lam > 1e-12 && (x[0] + lam * delta[0] <= 0.0 || x[1] + lam * delta[1] <= 0.0) {
            lam *= 0.5;
        }
        for (xi, di) in x.iter_mut().zip(delta) {
            *xi += lam * di;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NoConvergence("fold refinement diverged".into()));
        }
    }
    Err(Error::NoConvergence("fold refinement did not converge".into()))
}

/// Existence bisection for the fold: warm-started Newton probes on a
/// shrinking bracket. Returns the last surviving scattering ratio and the
/// widths there.
fn bisect_existence(
    p: &TrapParams,
    cpl: Couplings,
    lo0: f64,
    hi0: f64,
    acc: f64,
) -> Result<(f64, WidthVector), Error> {
    let opts = SolverOptions::default();
    let top = find_ground_with(&p.with_scattering(hi0), cpl, &opts)
        .map_err(|_| Error::FoldOutsideBracket { lo: lo0, hi: hi0 })?;
    // fold below the bracket floor?
    if newton_root(&p.with_scattering(lo0), cpl, &top.widths, &opts).is_ok()
        || find_ground_with(&p.with_scattering(lo0), cpl, &opts).is_ok()
    {
        return Err(Error::FoldOutsideBracket { lo: lo0, hi: hi0 });
    }
    let mut lo = lo0;
    let mut hi = hi0;
    let mut warm = top.widths;
    while hi - lo > acc {
        let mid = 0.5 * (lo + hi);
        match newton_root(&p.with_scattering(mid), cpl, &warm, &opts) {
            Ok(w) => {
                hi = mid;
                warm = w;
            }
            Err(_) => lo = mid,
        }
    }
    Ok((hi, warm))
}

/// Critical scattering length a_crit/a_d where the ground and excited
/// branches merge, for the trap given by N²γ̄ and λ.
///
/// Located by existence bisection over the bracket [-1, 1/6) and refined via
/// det H = 0; the two routes agree to well below the 1e-6 accuracy target.
pub fn critical_scattering_length(scaled_gamma_bar: f64, lambda: f64) -> Result<f64, Error> {
    let p = TrapParams::from_mean(0.0, scaled_gamma_bar, lambda)?;
    Ok(critical_fold(&p, Couplings::FULL, (-1.0, 1.0 / 6.0 - 1e-9))?.scattering_ratio)
}

/// Fold point (threshold plus merged widths) over an explicit bracket.
pub fn critical_fold(
    p: &TrapParams,
    cpl: Couplings,
    bracket: (f64, f64),
) -> Result<FoldPoint, Error> {
    let (s_bisect, w_near) = bisect_existence(p, cpl, bracket.0, bracket.1, 1e-7)?;
    let fold = fold_newton(p, cpl, s_bisect, &w_near)?;
    if (fold.scattering_ratio - s_bisect).abs() > 1e-5 {
        return Err(Error::NoConvergence(format!(
            "fold routes disagree: bisection {s_bisect}, det refinement {}",
            fold.scattering_ratio
        )));
    }
    Ok(fold)
}

/// Existence-bisection route only, for cross-checking the refined fold.
pub fn critical_scattering_length_bisect(
    scaled_gamma_bar: f64,
    lambda: f64,
    acc: f64,
) -> Result<f64, Error> {
    let p = TrapParams::from_mean(0.0, scaled_gamma_bar, lambda)?;
    Ok(bisect_existence(&p, Couplings::FULL, -1.0, 1.0 / 6.0 - 1e-9, acc)?.0)
}

// --- branch continuation ---------------------------------------------------

/// Step control for the pseudo-arclength continuation.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationControl {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
    pub corrector_tol: f64,
}

impl Default for ContinuationControl {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            min_step: 1e-10,
            max_step: 5e-2,
            max_steps: 20_000,
            corrector_tol: 1e-11,
        }
    }
}

/// One branch of stationary states, ordered by increasing a/a_d.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchCurve {
    pub scattering: Vec<f64>,
    pub states: Vec<StationaryState>,
    pub fold_point: Option<FoldPoint>,
}

/// Ground and excited branch through a common fold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchPair {
    pub ground: BranchCurve,
    pub excited: BranchCurve,
    pub fold: Option<FoldPoint>,
}

/// Pseudo-arclength continuation of the stationarity equations, in
/// (ln A_r, ln A_z, a/a_d) space so widths and scattering length carry
/// comparable arclength weights. Starts on the ground branch at the upper
/// end of `a_range`, runs downward through the fold and back up the excited
/// branch; the curve is split at the fold.
///
/// `p.scattering_ratio` is ignored; the range supplies it.
pub fn trace_branches(
    p: &TrapParams,
    a_range: (f64, f64),
    ctl: &ContinuationControl,
) -> Result<BranchPair, Error> {
    trace_branches_with(p, a_range, ctl, Couplings::FULL)
}

pub fn trace_branches_with(
    p: &TrapParams,
    a_range: (f64, f64),
    ctl: &ContinuationControl,
    cpl: Couplings,
) -> Result<BranchPair, Error> {
    let (a_lo, a_hi) = a_range;
    if !(a_hi > a_lo) {
        return Err(Error::invalid_input("a_range must be increasing"));
    }
    let opts = SolverOptions::default();
    let start = find_ground_with(&p.with_scattering(a_hi), cpl, &opts)?;

    // continuation state: x = (u, v, s) with u = ln A_r, v = ln A_z
    let residual = |x: &[f64; 3]| -> [f64; 2] {
        let w = WidthVector { a_r: x[0].exp(), a_z: x[1].exp() };
        energy_gradient_with(&w, &p.with_scattering(x[2]), cpl)
    };
    let ext_jacobian = |x: &[f64; 3]| -> [[f64; 3]; 2] {
        let w = WidthVector { a_r: x[0].exp(), a_z: x[1].exp() };
        let ps = p.with_scattering(x[2]);
        let h = energy_hessian_with(&w, &ps, cpl);
        let cc = cpl.contact * contact_prefactor();
        [
            [h[0][0] * w.a_r, h[0][1] * w.a_z, cc * w.a_z.sqrt()],
            [h[1][0] * w.a_r, h[1][1] * w.a_z, cc * w.a_r / (2.0 * w.a_z.sqrt())],
        ]
    };
    let tangent_of = |x: &[f64; 3]| -> Option<[f64; 3]> {
        let j = ext_jacobian(x);
        // null space of the 2x3 Jacobian = cross product of its rows
        let t = [
            j[0][1] * j[1][2] - j[0][2] * j[1][1],
            j[0][2] * j[1][0] - j[0][0] * j[1][2],
            j[0][0] * j[1][1] - j[0][1] * j[1][0],
        ];
        let n = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some([t[0] / n, t[1] / n, t[2] / n])
        }
    };

    let mut x = [start.widths.a_r.ln(), start.widths.a_z.ln(), a_hi];
    let mut tangent = tangent_of(&x)
        .ok_or_else(|| Error::NoConvergence("degenerate tangent at continuation start".into()))?;
    if tangent[2] > 0.0 {
        for t in tangent.iter_mut() {
            *t = -*t;
        }
    }

    let mut xs: Vec<[f64; 3]> = vec![x];
    let mut step = ctl.initial_step;
    let mut fold_bracket: Option<(usize, [f64; 3])> = None;
    for _ in 0..ctl.max_steps {
        let pred = [
            x[0] + step * tangent[0],
            x[1] + step * tangent[1],
            x[2] + step * tangent[2],
        ];
        // corrector: Newton on [residual; tangent . (y - pred)] = 0
        let mut y = pred;
        let mut converged = false;
        for _ in 0..25 {
            let r = residual(&y);
            let cons = tangent[0] * (y[0] - pred[0])
                + tangent[1] * (y[1] - pred[1])
                + tangent[2] * (y[2] - pred[2]);
            if (r[0] * r[0] + r[1] * r[1]).sqrt() < ctl.corrector_tol && cons.abs() < 1e-12 {
                converged = true;
                break;
            }
            let j = ext_jacobian(&y);
            let a = [
                [j[0][0], j[0][1], j[0][2]],
                [j[1][0], j[1][1], j[1][2]],
                [tangent[0], tangent[1], tangent[2]],
            ];
            let Some(d) = solve3(&a, &[-r[0], -r[1], -cons]) else { break };
            y = [y[0] + d[0], y[1] + d[1], y[2] + d[2]];
            if !y.iter().all(|v| v.is_finite()) {
                break;
            }
        }
        if !converged {
            step *= 0.5;
            if step < ctl.min_step {
                break;
            }
            continue;
        }
        let Some(mut t_new) = tangent_of(&y) else {
            step *= 0.5;
            if step < ctl.min_step {
                break;
            }
            continue;
        };
        let dot = t_new[0] * tangent[0] + t_new[1] * tangent[1] + t_new[2] * tangent[2];
        if dot < 0.0 {
            for t in t_new.iter_mut() {
                *t = -*t;
            }
        }
        // fold: the s-component of the tangent changes sign
        if tangent[2] < 0.0 && t_new[2] > 0.0 && fold_bracket.is_none() {
            fold_bracket = Some((xs.len(), y));
        }
        xs.push(y);
        x = y;
        tangent = t_new;
        step = (step * 1.3).min(ctl.max_step);
        // stop once back above the upper end on the second branch, or below range
        if (tangent[2] > 0.0 && x[2] >= a_hi) || x[2] < a_lo - 0.5 {
            break;
        }
    }

    let fold = match fold_bracket {
        Some((_, y)) => {
            let w = WidthVector { a_r: y[0].exp(), a_z: y[1].exp() };
            fold_newton(p, cpl, y[2], &w).ok()
        }
        None => None,
    };

    // split at the fold; classify every point by its own Hessian signature
    let mut ground: Vec<(f64, StationaryState)> = Vec::new();
    let mut excited: Vec<(f64, StationaryState)> = Vec::new();
    for (i, xi) in xs.iter().enumerate() {
        if xi[2] < a_lo || xi[2] > a_hi {
            continue;
        }
        let w = WidthVector { a_r: xi[0].exp(), a_z: xi[1].exp() };
        let st = state_from_widths(&p.with_scattering(xi[2]), cpl, w)?;
        match st.branch {
            Branch::Ground => ground.push((xi[2], st)),
            Branch::Excited => excited.push((xi[2], st)),
            Branch::FoldPoint => match fold_bracket {
                Some((k, _)) if i < k => ground.push((xi[2], st)),
                _ => excited.push((xi[2], st)),
            },
        }
    }
    let build = |mut v: Vec<(f64, StationaryState)>| -> BranchCurve {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14 * a.0.abs().max(1e-14));
        BranchCurve {
            scattering: v.iter().map(|e| e.0).collect(),
            states: v.iter().map(|e| e.1).collect(),
            fold_point: fold,
        }
    };
    Ok(BranchPair { ground: build(ground), excited: build(excited), fold })
}

// --- threshold map ----------------------------------------------------------

/// One cell of the critical-threshold table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdCell {
    pub scaled_gamma_bar: f64,
    pub lambda: f64,
    pub a_crit: Option<f64>,
    pub error: Option<String>,
}

/// a_crit/a_d over a (N²γ̄, λ) grid. Cells are independent and evaluated in
/// parallel; failures are recorded per cell rather than aborting the map.
pub fn threshold_map(gbar_grid: &[f64], lambda_grid: &[f64]) -> Vec<ThresholdCell> {
    let cells: Vec<(f64, f64)> = gbar_grid
        .iter()
        .flat_map(|&g| lambda_grid.iter().map(move |&l| (g, l)))
        .collect();
    cells
        .par_iter()
        .map(|&(gbar, lambda)| match critical_scattering_length(gbar, lambda) {
            Ok(a) => ThresholdCell { scaled_gamma_bar: gbar, lambda, a_crit: Some(a), error: None },
            Err(e) => ThresholdCell {
                scaled_gamma_bar: gbar,
                lambda,
                a_crit: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// Analytic contact-only collapse threshold for an isotropic trap,
/// s_crit = -(√π/2)·2^{5/2}·5^{-5/4}/√(N²γ̄); an independent check of the
/// dipole-free limit.
pub fn contact_only_isotropic_threshold(scaled_gamma_bar: f64) -> f64 {
    -(std::f64::consts::PI.sqrt() / 2.0) * 2.0_f64.powf(2.5) * 5.0_f64.powf(-1.25)
        / scaled_gamma_bar.sqrt()
}
