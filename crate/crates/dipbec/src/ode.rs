//! Integrators for the four-dimensional width dynamics: an adaptive
//! Verner 6(5) embedded Runge-Kutta pair with 5th-order dense output
//! (coefficients from Verner's "efficient" RKV65 tableau), and a
//! fixed-step implicit-midpoint rule used as a symplectic cross-check in
//! canonical coordinates.

use crate::error::Error;

pub type State = [f64; 4];

const STAGES: usize = 9;
const EXTRA: usize = 1;
const ORDER: usize = 6;

#[rustfmt::skip]
const A: [[f64; STAGES]; STAGES] = [
    [0.0; 9],
    [0.6e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.923_996_296_296_296_2e-2, 7.669_337_037_037_037e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.35975e-1, 0.0, 0.107925, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.318_683_415_233_148_4, 0.0, -5.042_058_063_628_562, 4.220_674_648_395_414, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-41.872_591_664_327_516, 0.0, 159.432_562_163_137_5, -122.119_213_565_010_03, 5.531_743_066_200_054, 0.0, 0.0, 0.0, 0.0],
    [-54.430_156_935_316_504, 0.0, 207.067_251_365_018_48, -158.610_813_784_59, 6.991_816_585_950_242, -1.859_723_106_220_323_4e-2, 0.0, 0.0, 0.0],
    [-54.663_741_787_281_98, 0.0, 207.952_806_255_389_36, -159.288_957_474_499_5, 7.018_743_740_796_944, -1.833_878_590_504_572_2e-2, -5.119_484_997_882_099e-4, 0.0, 0.0],
    [3.438_957_868_357_036e-2, 0.0, 0.0, 0.258_262_455_563_350_3, 0.420_937_118_967_353_7, 4.405_396_469_669_31, -176.483_119_024_298_65, 172.364_133_401_415_07, 0.0],
];

#[rustfmt::skip]
const B_HIGH: [f64; STAGES] = [
    3.438_957_868_357_036e-2, 0.0, 0.0, 0.258_262_455_563_350_3, 0.420_937_118_967_353_7,
    4.405_396_469_669_31, -176.483_119_024_298_65, 172.364_133_401_415_07, 0.0,
];

#[rustfmt::skip]
const B_LOW: [f64; STAGES] = [
    4.909_967_648_382_49e-2, 0.0, 0.0, 0.225_111_222_951_652_42, 0.469_468_225_302_956_2,
    0.806_579_224_998_886_8, 0.0, -0.607_119_489_177_796, 5.686_113_944_047_569_6e-2,
];

#[rustfmt::skip]
#[cfg_attr(not(test), allow(dead_code))] // checked against the A rows in tests
const C: [f64; STAGES] = [
    0.0, 0.6e-1, 9.593_333_333_333_333e-2, 0.1439, 0.4973, 0.9725, 0.9995, 1.0, 1.0,
];

#[rustfmt::skip]
const A_DENSE: [[f64; STAGES + EXTRA]; EXTRA] = [[
    1.652_415_901_357_280_6e-2, 0.0, 0.0, 0.305_312_818_751_417_9, 0.207_120_093_820_197_9,
    -1.293_879_140_655_123, 57.119_884_115_881_49, -55.879_792_075_109_32,
    2.483_002_829_776_601_4e-2, 0.0,
]];

const C_DENSE: [f64; EXTRA] = [0.5];

#[rustfmt::skip]
const B_DENSE: [[f64; ORDER]; STAGES + EXTRA] = [
    [1.0, -5.308_169_607_103_577, 10.181_680_448_958_68, -7.520_036_991_611_715, 0.934_048_536_863_116_1, 0.746_867_191_577_065],
    [0.0; 6],
    [0.0; 6],
    [0.0, 6.272_050_253_212_501, -16.026_181_474_677_46, 12.844_356_324_519_618, -1.148_794_504_476_759_1, -1.683_168_143_014_549_8],
    [0.0, 6.876_491_702_846_304, -24.635_767_260_846_333, 33.210_786_483_797_17, -17.494_615_282_636_44, 2.464_041_475_806_649_6],
    [0.0, -35.544_451_710_599_6, 165.701_617_019_024_2, -385.463_539_549_114_3, 442.432_413_701_570_17, -182.720_642_991_211_2],
    [0.0, 1_918.654_856_698_011_4, -9_268.121_508_966_042, 20_858.337_028_772_55, -22_645.827_671_584_81, 8_960.474_176_055_992],
    [0.0, -1_883.069_802_132_718_2, 9_101.025_187_200_634, -20_473.188_551_959_534, 22_209.765_551_256_532, -8_782.168_250_963_5],
    [0.0, 0.119_024_796_351_236_43, -0.125_026_967_050_393_76, 1.779_956_919_394_999_1, -4.660_932_123_043_763, 2.886_977_374_347_921],
    [0.0, -8.0, 32.0, -40.0, 16.0, 0.0],
];

fn axpy(y: &State, k: &[State], coeffs: &[f64], h: f64) -> State {
    let mut out = *y;
    for (ki, &ci) in k.iter().zip(coeffs) {
        if ci != 0.0 {
            for d in 0..4 {
                out[d] += h * ci * ki[d];
            }
        }
    }
    out
}

/// Adaptive Verner 6(5) stepper for autonomous 4-dimensional systems.
///
/// After an accepted [`Rkv65::step`], the solution on the last step interval
/// is available through [`Rkv65::interpolate`] with 5th-order accuracy.
pub struct Rkv65 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    t: f64,
    y: State,
    dydt: State,
    h: f64,
    t_prev: f64,
    y_prev: State,
    h_prev: f64,
    k: [State; STAGES + EXTRA],
    rejects_in_a_row: usize,
}

impl Rkv65 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h_max: f64::INFINITY,
            t: 0.0,
            y: [0.0; 4],
            dydt: [0.0; 4],
            h: 0.0,
            t_prev: 0.0,
            y_prev: [0.0; 4],
            h_prev: 0.0,
            k: [[0.0; 4]; STAGES + EXTRA],
            rejects_in_a_row: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &State {
        &self.y
    }

    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    pub fn h_prev(&self) -> f64 {
        self.h_prev
    }

    pub fn init<F: Fn(&State) -> State>(&mut self, f: &F, t0: f64, y0: State) {
        self.t = t0;
        self.y = y0;
        self.dydt = f(&y0);
        self.t_prev = t0;
        self.y_prev = y0;
        self.h_prev = 0.0;
        // initial step from the derivative scale plus a one-sided curvature
        // probe, so a start at (or near) a fixed point still senses the
        // local time scale
        let wnorm = |v: &State| -> f64 {
            let mut m = 0.0_f64;
            for i in 0..4 {
                let w = self.atol + self.rtol * y0[i].abs();
                m = m.max((v[i] / w).abs());
            }
            m
        };
        let d0 = wnorm(&y0);
        let d1 = wnorm(&self.dydt);
        let h0 = if d1 > 0.0 { (0.01 * d0.max(1.0) / d1).min(1e6) } else { 1e-6 };
        let probe = [
            y0[0] + h0 * self.dydt[0],
            y0[1] + h0 * self.dydt[1],
            y0[2] + h0 * self.dydt[2],
            y0[3] + h0 * self.dydt[3],
        ];
        let f1 = f(&probe);
        let diff = [
            f1[0] - self.dydt[0],
            f1[1] - self.dydt[1],
            f1[2] - self.dydt[2],
            f1[3] - self.dydt[3],
        ];
        let d2 = if f1.iter().all(|v| v.is_finite()) { wnorm(&diff) / h0 } else { 0.0 };
        let h1 = if d1.max(d2) > 1e-15 {
            (0.01 / d1.max(d2)).powf(1.0 / ORDER as f64)
        } else {
            h0 * 100.0
        };
        self.h = (100.0 * h0).min(h1).min(self.h_max);
    }

    /// One adaptive step. On success the state advances by `h_prev`.
    pub fn step<F: Fn(&State) -> State>(&mut self, f: &F) -> Result<(), Error> {
        loop {
            if !(self.h > 0.0) || self.t + self.h == self.t {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let h = self.h;
            self.k[0] = self.dydt;
            for i in 1..STAGES {
                let y_stage = axpy(&self.y, &self.k[..i], &A[i][..i], h);
                self.k[i] = f(&y_stage);
            }
            let y_high = axpy(&self.y, &self.k[..STAGES], &B_HIGH, h);
            let y_low = axpy(&self.y, &self.k[..STAGES], &B_LOW, h);
            let mut err = 0.0_f64;
            for d in 0..4 {
                let tol = self.atol + self.rtol * self.y[d].abs().max(y_high[d].abs());
                err = err.max(((y_high[d] - y_low[d]) / tol).abs());
            }
            // the last stage sits at (t+h, y_high): require it finite so the
            // FSAL derivative never carries a poisoned value forward
            let finite = err.is_finite()
                && y_high.iter().all(|v| v.is_finite())
                && self.k[STAGES - 1].iter().all(|v| v.is_finite());
            if finite && err <= 1.0 {
                // extra stage for the 5th-order interpolant
                let y_mid_stage = axpy(&self.y, &self.k, &A_DENSE[0], h);
                self.k[STAGES] = f(&y_mid_stage);
                debug_assert_eq!(C_DENSE[0], 0.5);
                if !self.k[STAGES].iter().all(|v| v.is_finite()) {
                    self.rejects_in_a_row += 1;
                    if self.rejects_in_a_row > 200 {
                        return Err(Error::StepSizeUnderflow { t: self.t });
                    }
                    self.h = h * 0.1;
                    continue;
                }
                self.t_prev = self.t;
                self.y_prev = self.y;
                self.h_prev = h;
                self.t += h;
                self.y = y_high;
                self.dydt = self.k[STAGES - 1]; // FSAL: last stage sits at (t+h, y_high)
                self.rejects_in_a_row = 0;
                let scale = if err > 0.0 {
                    (0.9 * err.powf(-1.0 / ORDER as f64)).clamp(0.2, 10.0)
                } else {
                    10.0
                };
                self.h = (h * scale).min(self.h_max);
                return Ok(());
            }
            self.rejects_in_a_row += 1;
            if self.rejects_in_a_row > 200 {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let scale = if finite {
                (0.9 * err.powf(-1.0 / ORDER as f64)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            self.h = h * scale;
        }
    }

    /// Dense-output evaluation at fraction `s` in [0, 1] of the last
    /// accepted step.
    pub fn interpolate(&self, s: f64) -> State {
        let mut out = self.y_prev;
        for i in 0..STAGES + EXTRA {
            // cont_i(s) = s * (b[i][0] + b[i][1] s + ... + b[i][5] s^5)
            let b = &B_DENSE[i];
            let mut c = b[ORDER - 1];
            for j in (0..ORDER - 1).rev() {
                c = c * s + b[j];
            }
            c *= s;
            if c != 0.0 {
                for d in 0..4 {
                    out[d] += self.h_prev * c * self.k[i][d];
                }
            }
        }
        out
    }
}

/// Fixed-step implicit midpoint rule: z' = F(z) stepped by
/// z_{n+1} = z_n + h F((z_n + z_{n+1})/2). Symplectic when F is a canonical
/// Hamiltonian vector field.
pub struct ImplicitMidpoint {
    pub h: f64,
    pub fixed_point_tol: f64,
    pub max_fixed_point_iters: usize,
}

impl ImplicitMidpoint {
    pub fn new(h: f64) -> Self {
        Self { h, fixed_point_tol: 1e-14, max_fixed_point_iters: 100 }
    }

    pub fn step<F: Fn(&State) -> State>(&self, f: &F, y: &State) -> Result<State, Error> {
        let h = self.h;
        // fixed-point iteration for the midpoint value
        let fy = f(y);
        let mut mid = [
            y[0] + 0.5 * h * fy[0],
            y[1] + 0.5 * h * fy[1],
            y[2] + 0.5 * h * fy[2],
            y[3] + 0.5 * h * fy[3],
        ];
        let scale: f64 = y.iter().map(|v| v.abs()).fold(1e-30, f64::max);
        for _ in 0..self.max_fixed_point_iters {
            let fm = f(&mid);
            let next = [
                y[0] + 0.5 * h * fm[0],
                y[1] + 0.5 * h * fm[1],
                y[2] + 0.5 * h * fm[2],
                y[3] + 0.5 * h * fm[3],
            ];
            let delta = (0..4).map(|i| (next[i] - mid[i]).abs()).fold(0.0, f64::max);
            mid = next;
            if delta <= self.fixed_point_tol * scale {
                let mut out = [0.0; 4];
                let fm = f(&mid);
                for i in 0..4 {
                    out[i] = y[i] + h * fm[i];
                }
                return Ok(out);
            }
        }
        Err(Error::NoConvergence("implicit midpoint fixed point stalled".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // two decoupled oscillators with different frequencies
    fn osc(y: &State) -> State {
        [y[1], -4.0 * y[0], y[3], -9.0 * y[2]]
    }

    fn osc_exact(t: f64) -> State {
        [(2.0 * t).cos(), -2.0 * (2.0 * t).sin(), (3.0 * t).sin() / 3.0, (3.0 * t).cos()]
    }

    #[test]
    fn rkv65_tableau_consistency() {
        // row sums of A equal the nodes; quadrature weights sum to one
        for i in 0..STAGES {
            let sum: f64 = A[i].iter().sum();
            assert!((sum - C[i]).abs() < 1e-12, "row {i}: {sum} vs {}", C[i]);
        }
        assert!((B_HIGH.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((B_LOW.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // the interpolant at s = 1 reproduces the 6th-order weights
        for i in 0..STAGES {
            let sum: f64 = B_DENSE[i].iter().sum();
            assert!((sum - B_HIGH[i]).abs() < 1e-8, "dense row {i}");
        }
        assert!((B_DENSE[STAGES].iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn rkv65_accuracy_tracks_tolerance() {
        for tol in [1e-8, 1e-10, 1e-12] {
            let mut solver = Rkv65::new(tol, tol);
            solver.init(&osc, 0.0, osc_exact(0.0));
            while solver.t() < 10.0 {
                solver.step(&osc).unwrap();
            }
            // interpolate back to exactly t = 10
            let s = (10.0 - solver.t_prev()) / solver.h_prev();
            let y = solver.interpolate(s);
            let exact = osc_exact(10.0);
            let err: f64 = (0..4).map(|i| (y[i] - exact[i]).abs()).fold(0.0, f64::max);
            assert!(err < 2e3 * tol, "tol {tol}: err {err}");
        }
    }

    #[test]
    fn dense_output_matches_exact_solution_inside_steps() {
        let tol = 1e-10;
        let mut solver = Rkv65::new(tol, tol);
        solver.init(&osc, 0.0, osc_exact(0.0));
        let mut worst = 0.0_f64;
        while solver.t() < 5.0 {
            solver.step(&osc).unwrap();
            for m in 1..8 {
                let s = m as f64 / 8.0;
                let y = solver.interpolate(s);
                let exact = osc_exact(solver.t_prev() + s * solver.h_prev());
                for i in 0..4 {
                    worst = worst.max((y[i] - exact[i]).abs());
                }
            }
        }
        assert!(worst < 1e-8, "dense output error {worst}");
    }

    #[test]
    fn interpolate_endpoints_are_consistent() {
        let mut solver = Rkv65::new(1e-10, 1e-10);
        solver.init(&osc, 0.0, [1.0, 0.0, 0.0, 1.0]);
        solver.step(&osc).unwrap();
        let y0 = solver.interpolate(0.0);
        let y1 = solver.interpolate(1.0);
        for i in 0..4 {
            assert!((y1[i] - solver.y()[i]).abs() < 1e-12);
        }
        // s = 0 returns the previous state exactly
        assert_eq!(y0, [1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn implicit_midpoint_is_second_order_and_bounded() {
        // energy of the first oscillator: v²/2 + 2 x²
        let energy = |y: &State| 0.5 * y[1] * y[1] + 2.0 * y[0] * y[0];
        let mut errs = Vec::new();
        for h in [1e-2, 5e-3, 2.5e-3] {
            let mp = ImplicitMidpoint::new(h);
            let mut y = osc_exact(0.0);
            let n = (1.0 / h) as usize;
            for _ in 0..n {
                y = mp.step(&osc, &y).unwrap();
            }
            let exact = osc_exact(h * n as f64);
            errs.push((y[0] - exact[0]).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}, errors {errs:?}");
        // long-run energy stays bounded
        let mp = ImplicitMidpoint::new(1e-2);
        let mut y = osc_exact(0.0);
        let e0 = energy(&y);
        let mut max_dev = 0.0_f64;
        for _ in 0..20_000 {
            y = mp.step(&osc, &y).unwrap();
            max_dev = max_dev.max((energy(&y) - e0).abs() / e0);
        }
        assert!(max_dev < 1e-4, "midpoint energy deviation {max_dev}");
    }
}
