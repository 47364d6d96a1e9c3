//! Adaptive Dormand–Prince 5(4) stepping for complex linear systems
//! `dy/dt = f(t, y)`, used for Schrödinger evolution.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step; keeps the stepper from skipping drive periods.
    pub max_step: f64,
    /// Steps shorter than this abort the integration.
    pub min_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            min_step: 1e-14,
        }
    }
}

impl StepControl {
    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state. `advance_to` lands exactly on the requested times so a
/// caller can sample a trajectory on any grid without interpolation.
pub struct Dopri5<F>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    rhs: F,
    control: StepControl,
    t: f64,
    y: Vec<Complex64>,
    h: Option<f64>,
    k: [Vec<Complex64>; 7],
    scratch: Vec<Complex64>,
    y_new: Vec<Complex64>,
    fsal_valid: bool,
    pub accepted: usize,
    pub rejected: usize,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(rhs: F, t0: f64, y0: Vec<Complex64>, control: StepControl) -> Self {
        let n = y0.len();
        let zero = || vec![Complex64::new(0.0, 0.0); n];
        Self {
            rhs,
            control,
            t: t0,
            y: y0,
            h: None,
            k: [zero(), zero(), zero(), zero(), zero(), zero(), zero()],
            scratch: zero(),
            y_new: zero(),
            fsal_valid: false,
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[Complex64] {
        &self.y
    }

    pub fn into_state(self) -> Vec<Complex64> {
        self.y
    }

    fn ensure_k1(&mut self) {
        if !self.fsal_valid {
            (self.rhs)(self.t, &self.y, &mut self.k[0]);
            self.fsal_valid = true;
        }
    }

    fn initial_step(&mut self, span: f64) -> f64 {
        let c = self.control;
        let norm = |v: &[Complex64], y: &[Complex64]| -> f64 {
            let s: f64 = v
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let sc = c.atol + c.rtol * b.norm();
                    (a.norm() / sc).powi(2)
                })
                .sum();
            (s / v.len().max(1) as f64).sqrt()
        };
        let d0 = norm(&self.y, &self.y);
        let d1 = norm(&self.k[0], &self.y);
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(c.max_step).min(span.abs())
    }

    fn stage(&mut self, h: f64, coeffs: &[(usize, f64)], c: f64, out: usize) {
        for (i, s) in self.scratch.iter_mut().enumerate() {
            let mut acc = self.y[i];
            for &(j, a) in coeffs {
                acc += self.k[j][i] * (a * h);
            }
            *s = acc;
        }
        let t = self.t + c * h;
        (self.rhs)(t, &self.scratch, &mut self.k[out]);
    }

    /// Attempts one step of size `h`; returns the scaled error norm.
    fn try_step(&mut self, h: f64) -> f64 {
        self.stage(h, &[(0, A21)], C2, 1);
        self.stage(h, &[(0, A31), (1, A32)], C3, 2);
        self.stage(h, &[(0, A41), (1, A42), (2, A43)], C4, 3);
        self.stage(h, &[(0, A51), (1, A52), (2, A53), (3, A54)], C5, 4);
        self.stage(h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], 1.0, 5);
        for i in 0..self.y.len() {
            self.y_new[i] = self.y[i]
                + (self.k[0][i] * B1
                    + self.k[2][i] * B3
                    + self.k[3][i] * B4
                    + self.k[4][i] * B5
                    + self.k[5][i] * B6)
                    * h;
        }
        let t_new = self.t + h;
        (self.rhs)(t_new, &self.y_new, &mut self.k[6]);
        let c = self.control;
        let mut sum = 0.0;
        for i in 0..self.y.len() {
            let err = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * h;
            let sc = c.atol + c.rtol * self.y[i].norm().max(self.y_new[i].norm());
            sum += (err.norm() / sc).powi(2);
        }
        (sum / self.y.len().max(1) as f64).sqrt()
    }

    /// Integrates up to `t_end` (which may not lie behind the current time).
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        self.advance_with(t_end, |_, _| Ok(()))
    }

    /// As [`advance_to`](Self::advance_to), calling `observe` after every
    /// accepted step.
    pub fn advance_with<O>(&mut self, t_end: f64, mut observe: O) -> Result<()>
    where
        O: FnMut(f64, &[Complex64]) -> Result<()>,
    {
        if t_end < self.t {
            return Err(Error::InvalidInput(format!(
                "cannot integrate backwards from {} to {}",
                self.t, t_end
            )));
        }
        if t_end == self.t {
            return Ok(());
        }
        self.ensure_k1();
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(t_end - self.t),
        };
        while self.t < t_end {
            let remaining = t_end - self.t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h.min(self.control.max_step) };
            if h_try < self.control.min_step && !last {
                return Err(Error::StepFailure { t: self.t, step: h_try });
            }
            let err = self.try_step(h_try);
            if !err.is_finite() {
                return Err(Error::StepFailure { t: self.t, step: h_try });
            }
            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + h_try };
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.k.swap(0, 6);
                self.accepted += 1;
                observe(self.t, &self.y)?;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // a truncated final step says nothing about the natural step size
                if !last || h_try >= h {
                    h = (h_try * factor).min(self.control.max_step);
                }
            } else {
                self.rejected += 1;
                h = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.control.min_step {
                    return Err(Error::StepFailure { t: self.t, step: h });
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotating_phase_is_exact_to_tolerance() {
        // dy/dt = -i w y
        let w = 3.7;
        let rhs = move |_t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = c(0.0, -w) * y[0];
        let mut s = Dopri5::new(rhs, 0.0, vec![c(1.0, 0.0)], StepControl::default());
        s.advance_to(10.0).unwrap();
        let expected = Complex64::from_polar(1.0, -w * 10.0);
        assert!((s.state()[0] - expected).norm() < 1e-8);
        assert_eq!(s.t(), 10.0);
    }

    #[test]
    fn time_dependent_rhs() {
        // dy/dt = -i cos(t) y  ->  y = exp(-i sin t)
        let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = c(0.0, -t.cos()) * y[0];
        let mut s = Dopri5::new(rhs, 0.0, vec![c(1.0, 0.0)], StepControl::default());
        for k in 1..=20 {
            let t = 0.5 * k as f64;
            s.advance_to(t).unwrap();
            let expected = Complex64::from_polar(1.0, -t.sin());
            assert!((s.state()[0] - expected).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn two_level_rabi_conserves_norm() {
        let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let i = c(0.0, -1.0);
            dy[0] = i * y[1];
            dy[1] = i * y[0];
        };
        let mut s = Dopri5::new(rhs, 0.0, vec![c(1.0, 0.0), c(0.0, 0.0)], StepControl::default());
        s.advance_to(std::f64::consts::FRAC_PI_2).unwrap();
        assert!(s.state()[0].norm() < 1e-8);
        assert!((s.state()[1].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn backwards_is_rejected() {
        let rhs = |_t: f64, _y: &[Complex64], dy: &mut [Complex64]| dy[0] = c(0.0, 0.0);
        let mut s = Dopri5::new(rhs, 1.0, vec![c(1.0, 0.0)], StepControl::default());
        assert!(s.advance_to(0.5).is_err());
    }

    #[test]
    fn exploding_rhs_reports_step_failure() {
        let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = y[0] * y[0] * (1.0 / (1.0 - t).max(1e-300));
        };
        let control = StepControl { min_step: 1e-10, ..StepControl::default() };
        let mut s = Dopri5::new(rhs, 0.0, vec![c(1.0, 0.0)], control);
        match s.advance_to(2.0) {
            Err(Error::StepFailure { .. }) => {}
            other => panic!("expected step failure, got {other:?}"),
        }
    }
}
