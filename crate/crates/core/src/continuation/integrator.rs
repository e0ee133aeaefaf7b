//! Dormand–Prince 5(4) integrator for complex-valued states over a real
//! parameter, with max-norm error-per-unit-step control.

use thiserror::Error;

use crate::algebra2::C64;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MIN_STEP_FRACTION: f64 = 1e-12;
const MAX_STEP_FRACTION: f64 = 0.1;
const MAX_STEPS: usize = 2_000_000;

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

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: StepStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
    }
}

fn axpy<const N: usize>(y: &[C64; N], terms: &[(f64, &[C64; N])], h: f64) -> [C64; N] {
    let mut out = *y;
    for (w, k) in terms {
        let s = w * h;
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += v * s;
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (`t1 > t0`), calling
/// `observe(t, &y)` after every accepted step.
pub fn integrate<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: [C64; N],
    tol: f64,
    mut observe: O,
) -> Result<([C64; N], StepStats), IntegrationError>
where
    F: FnMut(f64, &[C64; N]) -> [C64; N],
    O: FnMut(f64, &[C64; N]),
{
    let span = t1 - t0;
    let mut stats = StepStats::default();
    if span <= 0.0 {
        return Ok((y0, stats));
    }
    let h_min = MIN_STEP_FRACTION * span;
    let h_max = MAX_STEP_FRACTION * span;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = (tol.powf(0.2) * 0.1 * span).clamp(h_min, h_max);

    while t < t1 {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(IntegrationError::TooManySteps { t });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        let k2 = f(t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(t + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(t + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = f(
            t + h,
            &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
        );
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let t_new = if last { t1 } else { t + h };
        let k7 = f(t_new, &y_new);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            // Error per unit step: the bound shrinks with h, so the global
            // error stays near tol instead of growing with the step count.
            let scale = tol * (h / span) * (1.0 + y[i].norm().max(y_new[i].norm()));
            err = err.max(e.re.abs() / scale).max(e.im.abs() / scale);
        }
        if !err.is_finite() || y_new.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            if h <= h_min {
                return Err(IntegrationError::NonFinite { t });
            }
            stats.rejected += 1;
            h = (h * MIN_FACTOR).max(h_min);
            continue;
        }

        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            observe(t, &y);
            h = (h * factor).clamp(h_min, h_max);
        } else {
            if h <= h_min {
                return Err(IntegrationError::StepUnderflow { t, h });
            }
            stats.rejected += 1;
            h = (h * factor).max(h_min);
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra2::{c, r};

    #[test]
    fn exponential_growth() {
        let lambda = c(-0.3, 2.0);
        let (y, stats) = integrate(|_, y: &[C64; 1]| [y[0] * lambda], 0.0, 3.0, [r(1.0)], 1e-10, |_, _| {}).unwrap();
        let exact = (lambda * 3.0).exp();
        assert!((y[0] - exact).norm() < 1e-8, "{} vs {}", y[0], exact);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn harmonic_oscillator_is_fifth_order_accurate() {
        let run = |tol| {
            integrate(
                |_, y: &[C64; 2]| [y[1], -y[0]],
                0.0,
                10.0,
                [r(1.0), r(0.0)],
                tol,
                |_, _| {},
            )
            .unwrap()
        };
        let (y, coarse) = run(1e-6);
        assert!((y[0] - 10f64.cos()).norm() < 1e-4);
        let (y, fine) = run(1e-11);
        assert!((y[0] - 10f64.cos()).norm() < 1e-9);
        assert!(fine.accepted > coarse.accepted);
    }

    #[test]
    fn observer_sees_final_time() {
        let mut last = 0.0;
        integrate(|_, y: &[C64; 1]| [y[0]], 0.0, 1.0, [r(1.0)], 1e-8, |t, _| last = t).unwrap();
        assert_eq!(last, 1.0);
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y², y(0) = 1 blows up at t = 1.
        let res = integrate(|_, y: &[C64; 1]| [y[0] * y[0]], 0.0, 2.0, [r(1.0)], 1e-10, |_, _| {});
        assert!(res.is_err());
    }
}
