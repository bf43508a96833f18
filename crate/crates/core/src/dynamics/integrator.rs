//! Fixed-step classical RK4 and adaptive Dormand–Prince 5(4).

use crate::model::LindbladGenerator;
use crate::{CMatrix, Error, Result, C64};

/// Default RK4 step: min(π/ω, 1/κ, 1/γ)/500 with ω the fastest coherent
/// frequency. Infinite when the generator is identically zero.
pub fn default_max_step(gen: &LindbladGenerator) -> f64 {
    let mut scale = f64::INFINITY;
    let w = gen.coherent_frequency();
    if w > 0.0 {
        scale = scale.min(std::f64::consts::PI / w);
    }
    for c in gen.collapse_ops() {
        if c.rate > 0.0 {
            scale = scale.min(1.0 / c.rate);
        }
    }
    scale / 500.0
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Each output interval is split into the fewest equal steps no longer
    /// than `max_step` (default from [`default_max_step`]).
    Rk4 { max_step: Option<f64> },
    /// Adaptive embedded pair with mixed error control
    /// |err| ≤ atol + rtol·|ρ| elementwise.
    DormandPrince { rtol: f64, atol: f64, min_step: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Rk4 { max_step: None }
    }
}

// Dormand–Prince coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// y += a·x
fn axpy(y: &mut CMatrix, a: C64, x: &CMatrix) {
    y.zip_apply(x, |yi, xi| *yi += a * xi);
}

pub(crate) struct Stepper<'a> {
    gen: &'a LindbladGenerator,
    method: Method,
    max_step: f64,
    k: [CMatrix; 7],
    tmp: CMatrix,
    scratch: CMatrix,
    steps: usize,
    /// Last accepted adaptive step, reused as the next trial.
    h_adaptive: Option<f64>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(gen: &'a LindbladGenerator, method: &Method) -> Self {
        let dim = gen.dim();
        let z = || CMatrix::zeros(dim, dim);
        let max_step = match method {
            Method::Rk4 { max_step: Some(h) } => *h,
            _ => default_max_step(gen),
        };
        Stepper {
            gen,
            method: method.clone(),
            max_step,
            k: [z(), z(), z(), z(), z(), z(), z()],
            tmp: z(),
            scratch: z(),
            steps: 0,
            h_adaptive: None,
        }
    }

    pub(crate) fn steps(&self) -> usize {
        self.steps
    }

    pub(crate) fn advance(&mut self, rho: &mut CMatrix, t0: f64, t1: f64) -> Result<()> {
        match self.method {
            Method::Rk4 { .. } => {
                let span = t1 - t0;
                let n = if self.max_step.is_finite() && self.max_step > 0.0 {
                    ((span / self.max_step).ceil() as usize).max(1)
                } else {
                    1
                };
                let h = span / n as f64;
                for _ in 0..n {
                    self.rk4_step(rho, h);
                }
                self.steps += n;
                Ok(())
            }
            Method::DormandPrince { rtol, atol, min_step } => self.adaptive(rho, t0, t1, rtol, atol, min_step),
        }
    }

    fn eval(&mut self, slot: usize, from_tmp: bool, rho: &CMatrix) {
        let src = if from_tmp { &self.tmp } else { rho };
        self.gen.rhs_into(src, &mut self.k[slot], &mut self.scratch);
    }

    /// tmp = rho + h Σ cᵢ kᵢ
    fn stage(&mut self, rho: &CMatrix, h: f64, coeffs: &[(usize, f64)]) {
        self.tmp.copy_from(rho);
        for &(i, c) in coeffs {
            axpy(&mut self.tmp, C64::from(h * c), &self.k[i]);
        }
    }

    fn rk4_step(&mut self, rho: &mut CMatrix, h: f64) {
        self.eval(0, false, rho);
        self.stage(rho, h, &[(0, 0.5)]);
        self.eval(1, true, rho);
        self.stage(rho, h, &[(1, 0.5)]);
        self.eval(2, true, rho);
        self.stage(rho, h, &[(2, 1.0)]);
        self.eval(3, true, rho);
        let c = C64::from(h / 6.0);
        axpy(rho, c, &self.k[0]);
        axpy(rho, c * 2.0, &self.k[1]);
        axpy(rho, c * 2.0, &self.k[2]);
        axpy(rho, c, &self.k[3]);
    }

    fn adaptive(&mut self, rho: &mut CMatrix, t0: f64, t1: f64, rtol: f64, atol: f64, min_step: f64) -> Result<()> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(Error::param("tolerance", "rtol and atol must be positive"));
        }
        let mut t = t0;
        let mut h = self.h_adaptive.unwrap_or(self.max_step);
        if !h.is_finite() {
            h = t1 - t0;
        }
        while t < t1 {
            let remaining = t1 - t;
            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            let err = self.dp_trial(rho, h_try, rtol, atol);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                rho.copy_from(&self.tmp);
                t = if clipped { t1 } else { t + h_try };
                self.steps += 1;
                // A step shortened to land on t1 says nothing about the next one.
                if !clipped {
                    h = h_try * factor;
                }
            } else {
                h = h_try * factor;
                if h < min_step {
                    return Err(Error::StepSizeUnderflow { time: t });
                }
            }
        }
        self.h_adaptive = Some(h);
        Ok(())
    }

    /// One Dormand–Prince trial; leaves the fifth-order result in `tmp` and
    /// returns the scaled error norm.
    fn dp_trial(&mut self, rho: &CMatrix, h: f64, rtol: f64, atol: f64) -> f64 {
        self.eval(0, false, rho);
        self.stage(rho, h, &[(0, A21)]);
        self.eval(1, true, rho);
        self.stage(rho, h, &[(0, A31), (1, A32)]);
        self.eval(2, true, rho);
        self.stage(rho, h, &[(0, A41), (1, A42), (2, A43)]);
        self.eval(3, true, rho);
        self.stage(rho, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        self.eval(4, true, rho);
        self.stage(rho, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        self.eval(5, true, rho);
        self.stage(rho, h, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
        self.eval(6, true, rho);

        let mut worst = 0.0f64;
        let n = rho.len();
        for idx in 0..n {
            let e = h
                * (self.k[0][idx] * E1
                    + self.k[2][idx] * E3
                    + self.k[3][idx] * E4
                    + self.k[4][idx] * E5
                    + self.k[5][idx] * E6
                    + self.k[6][idx] * E7);
            let scale = atol + rtol * rho[idx].norm().max(self.tmp[idx].norm());
            worst = worst.max(e.norm() / scale);
        }
        worst
    }
}
