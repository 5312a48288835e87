//! Mean-field energy of the normalized Gaussian trial state
//! ψ = A·exp[−(A_r r² + A_z z²)] in dipole units.
//!
//! With scaled widths Â = N²A, scaled trap frequencies N²γ and scaled
//! energies N²E, the Gaussian expectation values reduce to closed forms:
//!
//! ```text
//! E = 2Â_r + Â_z + (N²γ_r)²/(2Â_r) + (N²γ_z)²/(4Â_z)
//!     + (4/√π)(a/a_d)·Â_r√Â_z            (contact, Hartree weight 1/2)
//!     + (2/(3√π))·Â_r√Â_z·f(κ)           (dipolar, Hartree weight 1/2)
//! ```
//!
//! where κ = σ_z/σ_r = sqrt(Â_r/Â_z) is the cloud aspect ratio and f the
//! dipolar anisotropy function with f(1) = 0, f(0⁺) = 2, f(∞) = −1. The
//! chemical potential carries the interaction terms with full weight, so
//! ε − E = E_contact + E_dipolar exactly.
//!
//! All closed forms are validated against [`dipolar_energy_quadrature`], an
//! independent Fourier-space quadrature of the dipolar convolution integral.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::units::TrapParams;

/// Contact prefactor 4/√π for the scaled Gaussian overlap integral.
#[inline]
pub(crate) fn contact_prefactor() -> f64 {
    4.0 / std::f64::consts::PI.sqrt()
}

/// Dipolar prefactor 2/(3√π); the ratio to the contact prefactor is 1/6,
/// which is why stability thresholds accumulate at a/a_d = 1/6.
#[inline]
pub(crate) fn dipolar_prefactor() -> f64 {
    2.0 / (3.0 * std::f64::consts::PI.sqrt())
}

/// Real Gaussian width parameters (inverse squared lengths, dipole units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthVector {
    pub a_r: f64,
    pub a_z: f64,
}

impl WidthVector {
    pub fn new(a_r: f64, a_z: f64) -> Result<Self, Error> {
        if !(a_r > 0.0) || !(a_z > 0.0) {
            return Err(Error::invalid_input("width parameters must be positive"));
        }
        Ok(Self { a_r, a_z })
    }

    /// Cloud aspect ratio κ = σ_z/σ_r = sqrt(A_r/A_z).
    pub fn kappa(&self) -> f64 {
        (self.a_r / self.a_z).sqrt()
    }
}

/// Term-by-term energy of the trial state. `total` is the sum of the four
/// components.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub trap: f64,
    pub contact: f64,
    pub dipolar: f64,
    pub total: f64,
}

/// Multipliers on the two interaction terms. The physical model is
/// [`Couplings::FULL`]; switching terms off is used by limit checks
/// (non-interacting oscillator, contact-only collapse threshold).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub contact: f64,
    pub dipolar: f64,
}

impl Couplings {
    pub const FULL: Couplings = Couplings { contact: 1.0, dipolar: 1.0 };
    pub const NONE: Couplings = Couplings { contact: 0.0, dipolar: 0.0 };
    pub const CONTACT_ONLY: Couplings = Couplings { contact: 1.0, dipolar: 0.0 };
}

impl Default for Couplings {
    fn default() -> Self {
        Couplings::FULL
    }
}

// --- anisotropy function ------------------------------------------------
//
// f(κ) = κ·h(c) with c = κ² − 1 and
//   h(c) = (3/c)(S − T) − T,  S = arcsinh(√c)/√c,  T = (1+c)^{-1/2}.
// For κ > 1 the S term is the artanh/arccosh branch, for κ < 1 the
// arctan/arccos branch; evaluating through complex arithmetic gives both
// plus the analytic continuation used by the exceptional-point module.
// Near c = 0 the closed form is 0/0, so a power series
//   h(c) = Σ_{n≥1} (-1)^n C(2n,n)/4^n · 4n/(2n+3) · c^n
// is used inside |c| < 0.25 (converges to machine precision there).

const SERIES_RADIUS: f64 = 0.25;

fn h_series(c: Complex64) -> (Complex64, Complex64, Complex64) {
    // h, h', h'' by term-wise differentiation of the series
    let mut coeff = -2.0 / 5.0; // h_1
    let mut h = coeff * c;
    let mut hp = Complex64::new(coeff, 0.0);
    let mut hpp = Complex64::new(0.0, 0.0);
    let mut c_pow_m = c; // c^m at the current order m
    let mut c_pow_m1 = Complex64::new(1.0, 0.0); // c^{m-1}
    for m in 2..200usize {
        let mf = m as f64;
        let prev = mf - 1.0;
        coeff *= -(2.0 * prev + 1.0) * (2.0 * prev + 3.0) / (2.0 * prev * (2.0 * prev + 5.0));
        // coeff is now h_m
        let c_pow_m2 = c_pow_m1;
        c_pow_m1 = c_pow_m;
        c_pow_m *= c;
        let th = coeff * c_pow_m;
        let thp = coeff * mf * c_pow_m1;
        let thpp = coeff * mf * prev * c_pow_m2;
        h += th;
        hp += thp;
        hpp += thpp;
        if th.norm() < 1e-18 * h.norm().max(1e-30) && thpp.norm() < 1e-18 * hpp.norm().max(1e-30) {
            break;
        }
    }
    (h, hp, hpp)
}

fn h_closed(c: Complex64) -> (Complex64, Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let sq = c.sqrt();
    let s = sq.asinh() / sq;
    let t = one / (one + c).sqrt();
    let t3 = (one + c).powf(-1.5);
    let t5 = (one + c).powf(-2.5);
    let p = s - t;
    let h = 3.0 / c * p - t;
    let hp = -4.5 / (c * c) * p + t3 * (1.5 / c + 0.5);
    let hpp = 11.25 / (c * c * c) * p - 3.75 / (c * c) * t3 - 0.75 * (3.0 / c + one) * t5;
    (h, hp, hpp)
}

fn h_all(c: Complex64) -> (Complex64, Complex64, Complex64) {
    if c.norm() < SERIES_RADIUS {
        h_series(c)
    } else {
        h_closed(c)
    }
}

/// f(κ), κf'(κ) and κ²f''(κ) for complex κ with Re κ > 0.
pub(crate) fn aniso_f012(kappa: Complex64) -> (Complex64, Complex64, Complex64) {
    let c = kappa * kappa - 1.0;
    let (h, hp, hpp) = h_all(c);
    let k3 = kappa * kappa * kappa;
    let k5 = k3 * kappa * kappa;
    let f0 = kappa * h;
    let f1 = kappa * h + 2.0 * k3 * hp;
    let f2 = 6.0 * k3 * hp + 4.0 * k5 * hpp;
    (f0, f1, f2)
}

/// Dipolar anisotropy function of the cloud aspect ratio κ = σ_z/σ_r.
///
/// Zero at κ = 1 (isotropic cloud), monotone decreasing, with limits
/// f(0⁺) = 2 (oblate) and f(∞) = −1 (prolate).
pub fn anisotropy_function(kappa: f64) -> Result<f64, Error> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::invalid_input("kappa must be positive and finite"));
    }
    // κ² − 1 loses the κ dependence to rounding at the far ends; the
    // asymptotic expansions are exact to f64 there
    if kappa < 1e-7 {
        return Ok(2.0 - 1.5 * std::f64::consts::PI * kappa);
    }
    if kappa > 1e7 {
        return Ok(-1.0 + 3.0 * ((2.0 * kappa).ln() - 1.0) / (kappa * kappa));
    }
    Ok(aniso_f012(Complex64::new(kappa, 0.0)).0.re)
}

// --- interaction energy, gradient, Hessian (real widths) -----------------

pub(crate) fn interaction_energy(w: &WidthVector, s: f64, cpl: Couplings) -> (f64, f64) {
    let pref = w.a_r * w.a_z.sqrt();
    let f0 = aniso_f012(Complex64::new(w.kappa(), 0.0)).0.re;
    let contact = cpl.contact * contact_prefactor() * s * pref;
    let dipolar = cpl.dipolar * dipolar_prefactor() * pref * f0;
    (contact, dipolar)
}

/// ∂E_int/∂(a_r, a_z) with the 1/2 Hartree weight on both terms.
pub(crate) fn interaction_gradient(w: &WidthVector, s: f64, cpl: Couplings) -> [f64; 2] {
    let (f0, f1, _) = aniso_f012(Complex64::new(w.kappa(), 0.0));
    let (f0, f1) = (f0.re, f1.re);
    let saz = w.a_z.sqrt();
    let cc = cpl.contact * contact_prefactor() * s;
    let cd = cpl.dipolar * dipolar_prefactor();
    [
        cc * saz + cd * saz * (f0 + 0.5 * f1),
        cc * w.a_r / (2.0 * saz) + cd * w.a_r / (2.0 * saz) * (f0 - f1),
    ]
}

pub(crate) fn interaction_hessian(w: &WidthVector, s: f64, cpl: Couplings) -> [[f64; 2]; 2] {
    let (f0, f1, f2) = aniso_f012(Complex64::new(w.kappa(), 0.0));
    let (f0, f1, f2) = (f0.re, f1.re, f2.re);
    let saz = w.a_z.sqrt();
    let cc = cpl.contact * contact_prefactor() * s;
    let cd = cpl.dipolar * dipolar_prefactor();
    let h_rr = cd * saz / (4.0 * w.a_r) * (3.0 * f1 + f2);
    let h_rz = cc / (2.0 * saz) + cd / (2.0 * saz) * (f0 - f1 - 0.5 * f2);
    let h_zz = -cc * w.a_r / (4.0 * w.a_z * saz) - cd * w.a_r / (4.0 * w.a_z * saz) * (f0 - f1 - f2);
    [[h_rr, h_rz], [h_rz, h_zz]]
}

/// Scaled mean-field energy of the trial state, term by term.
pub fn mean_field_energy(w: &WidthVector, p: &TrapParams) -> Result<EnergyBreakdown, Error> {
    mean_field_energy_with(w, p, Couplings::FULL)
}

pub fn mean_field_energy_with(
    w: &WidthVector,
    p: &TrapParams,
    cpl: Couplings,
) -> Result<EnergyBreakdown, Error> {
    let kinetic = 2.0 * w.a_r + w.a_z;
    let trap = p.scaled_gamma_r * p.scaled_gamma_r / (2.0 * w.a_r)
        + p.scaled_gamma_z * p.scaled_gamma_z / (4.0 * w.a_z);
    let (contact, dipolar) = interaction_energy(w, p.scattering_ratio, cpl);
    let total = kinetic + trap + contact + dipolar;
    if !total.is_finite() {
        return Err(Error::Range(format!(
            "energy overflow at widths ({}, {})",
            w.a_r, w.a_z
        )));
    }
    Ok(EnergyBreakdown { kinetic, trap, contact, dipolar, total })
}

/// Analytic gradient (∂E/∂A_r, ∂E/∂A_z) of the scaled energy.
pub fn energy_gradient(w: &WidthVector, p: &TrapParams) -> [f64; 2] {
    energy_gradient_with(w, p, Couplings::FULL)
}

pub fn energy_gradient_with(w: &WidthVector, p: &TrapParams, cpl: Couplings) -> [f64; 2] {
    let gi = interaction_gradient(w, p.scattering_ratio, cpl);
    [
        2.0 - p.scaled_gamma_r * p.scaled_gamma_r / (2.0 * w.a_r * w.a_r) + gi[0],
        1.0 - p.scaled_gamma_z * p.scaled_gamma_z / (4.0 * w.a_z * w.a_z) + gi[1],
    ]
}

/// Analytic symmetric 2×2 Hessian of the scaled energy.
pub fn energy_hessian(w: &WidthVector, p: &TrapParams) -> [[f64; 2]; 2] {
    energy_hessian_with(w, p, Couplings::FULL)
}

pub fn energy_hessian_with(w: &WidthVector, p: &TrapParams, cpl: Couplings) -> [[f64; 2]; 2] {
    let hi = interaction_hessian(w, p.scattering_ratio, cpl);
    [
        [
            p.scaled_gamma_r * p.scaled_gamma_r / (w.a_r * w.a_r * w.a_r) + hi[0][0],
            hi[0][1],
        ],
        [
            hi[1][0],
            p.scaled_gamma_z * p.scaled_gamma_z / (2.0 * w.a_z * w.a_z * w.a_z) + hi[1][1],
        ],
    ]
}

/// Scaled chemical potential N²ε: the Gaussian expectation of the mean-field
/// Hamiltonian, i.e. interaction terms with full weight.
pub fn chemical_potential(w: &WidthVector, p: &TrapParams) -> f64 {
    chemical_potential_with(w, p, Couplings::FULL)
}

pub fn chemical_potential_with(w: &WidthVector, p: &TrapParams, cpl: Couplings) -> f64 {
    let kinetic = 2.0 * w.a_r + w.a_z;
    let trap = p.scaled_gamma_r * p.scaled_gamma_r / (2.0 * w.a_r)
        + p.scaled_gamma_z * p.scaled_gamma_z / (4.0 * w.a_z);
    let (contact, dipolar) = interaction_energy(w, p.scattering_ratio, cpl);
    kinetic + trap + 2.0 * contact + 2.0 * dipolar
}

// --- complex analytic continuation (used by the exceptional module) -------

pub(crate) fn complex_gradient(
    a_r: Complex64,
    a_z: Complex64,
    g_r: f64,
    g_z: f64,
    s: Complex64,
) -> [Complex64; 2] {
    let kappa = (a_r / a_z).sqrt();
    let (f0, f1, _) = aniso_f012(kappa);
    let saz = a_z.sqrt();
    let cc = contact_prefactor() * s;
    let cd = dipolar_prefactor();
    [
        2.0 - g_r * g_r / (2.0 * a_r * a_r) + cc * saz + cd * saz * (f0 + 0.5 * f1),
        1.0 - g_z * g_z / (4.0 * a_z * a_z)
            + cc * a_r / (2.0 * saz)
            + cd * a_r / (2.0 * saz) * (f0 - f1),
    ]
}

pub(crate) fn complex_hessian(
    a_r: Complex64,
    a_z: Complex64,
    g_r: f64,
    g_z: f64,
    s: Complex64,
) -> [[Complex64; 2]; 2] {
    let kappa = (a_r / a_z).sqrt();
    let (f0, f1, f2) = aniso_f012(kappa);
    let saz = a_z.sqrt();
    let cc = contact_prefactor() * s;
    let cd = dipolar_prefactor();
    let h_rr = g_r * g_r / (a_r * a_r * a_r) + cd * saz / (4.0 * a_r) * (3.0 * f1 + f2);
    let h_rz = cc / (2.0 * saz) + cd / (2.0 * saz) * (f0 - f1 - 0.5 * f2);
    let h_zz = g_z * g_z / (2.0 * a_z * a_z * a_z)
        - cc * a_r / (4.0 * a_z * saz)
        - cd * a_r / (4.0 * a_z * saz) * (f0 - f1 - f2);
    [[h_rr, h_rz], [h_rz, h_zz]]
}

pub(crate) fn complex_chemical_potential(
    a_r: Complex64,
    a_z: Complex64,
    g_r: f64,
    g_z: f64,
    s: Complex64,
) -> Complex64 {
    let kappa = (a_r / a_z).sqrt();
    let (f0, _, _) = aniso_f012(kappa);
    let saz = a_z.sqrt();
    let pref = a_r * saz;
    2.0 * a_r + a_z + g_r * g_r / (2.0 * a_r) + g_z * g_z / (4.0 * a_z)
        + 2.0 * contact_prefactor() * s * pref
        + 2.0 * dipolar_prefactor() * pref * f0
}

// --- quadrature oracle ----------------------------------------------------

/// Dipolar mean-field energy by adaptive Gauss–Kronrod quadrature of the
/// Fourier-space angular integral, where the dipolar kernel is bounded:
///
/// ```text
/// E_dd = 1/(24√π) ∫_{-1}^{1} (3u² − 1) [σ_r² + (σ_z² − σ_r²)u²]^{-3/2} du
/// ```
///
/// with σ² = 1/(4A). The angular integral is evaluated numerically; it is
/// what produces the anisotropy function, so this path is independent of the
/// closed form above. Intended for tests and validation.
pub fn dipolar_energy_quadrature(w: &WidthVector, rel_tol: f64) -> Result<f64, Error> {
    let sr2 = 1.0 / (4.0 * w.a_r);
    let sz2 = 1.0 / (4.0 * w.a_z);
    let integrand = |u: f64| {
        let g = sr2 + (sz2 - sr2) * u * u;
        (3.0 * u * u - 1.0) * g.powf(-1.5)
    };
    // scale reference: the positive part of the integral, so the relative
    // error target stays meaningful when the value itself is ~0 (kappa = 1)
    let scale = 2.0 * sr2.min(sz2).powf(-1.5);
    let (value, err) = adaptive_gk(&integrand, -1.0, 1.0, rel_tol * scale, 60);
    if err > rel_tol * scale.max(value.abs()) * 10.0 {
        return Err(Error::QuadratureNoConvergence { err, tol: rel_tol * scale });
    }
    Ok(value / (24.0 * std::f64::consts::PI.sqrt()))
}

// 7-point Gauss / 15-point Kronrod pair (standard QUADPACK nodes).
const K15_NODES: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_5,
    0.405_845_151_377_397_2,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_5,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_812_6,
];
const K15_WEIGHTS: [f64; 8] = [
    0.209_482_141_084_727_8,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_9,
    0.104_790_010_322_250_2,
    0.063_092_092_629_978_6,
    0.022_935_322_010_529_2,
];
const G7_WEIGHTS: [f64; 4] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let f0 = f(c);
    let mut kron = K15_WEIGHTS[0] * f0;
    let mut gauss = G7_WEIGHTS[0] * f0;
    for i in 1..8 {
        let x = hw * K15_NODES[i];
        let s = f(c - x) + f(c + x);
        kron += K15_WEIGHTS[i] * s;
        if i % 2 == 0 {
            gauss += G7_WEIGHTS[i / 2] * s;
        }
    }
    (kron * hw, ((kron - gauss) * hw).abs())
}

fn adaptive_gk(f: &impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> (f64, f64) {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let (val, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return (val, err);
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = recurse(f, a, m, 0.5 * tol, depth - 1);
        let (v2, e2) = recurse(f, m, b, 0.5 * tol, depth - 1);
        (v1 + v2, e1 + e2)
    }
    recurse(f, a, b, abs_tol, max_depth)
}
