//! Adaptive Dormand–Prince 5(4) integrator over small complex state vectors.
//!
//! Used by the special-function ODE oracle and the saddle-trajectory
//! integration. Fixed-size state keeps everything on the stack.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub(crate) struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    /// Cap on the step size, e.g. to force dense output sampling.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h0: None, h_max: None, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum OdeError {
    StepUnderflow,
    MaxSteps,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights equal the last A row; embedded 4th-order weights:
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate dy/dt = f(t, y) from `t0` to `t1` (t1 > t0).
///
/// `on_step` runs after every accepted step and may stop the integration
/// early; the return value is the final (t, y) either way.
pub(crate) fn integrate_rk45<const N: usize>(
    mut f: impl FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    t0: f64,
    t1: f64,
    y0: [Complex64; N],
    opts: &OdeOptions,
    mut on_step: impl FnMut(f64, &[Complex64; N]) -> Control,
) -> Result<(f64, [Complex64; N]), OdeError> {
    let span = t1 - t0;
    debug_assert!(span > 0.0);
    let h_cap = opts.h_max.unwrap_or(f64::INFINITY);
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h0.unwrap_or(span / 100.0).min(span).min(h_cap);
    let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
    k[0] = f(t, &y);
    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok((t, y));
        }
        h = h.min(t1 - t);
        if h < 1e-14 * span {
            return Err(OdeError::StepUnderflow);
        }
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[stage] = f(t + C[stage] * h, &ys);
        }
        // 5th-order solution (FSAL: stage 6 is f at the candidate point)
        let mut y5 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[6][j];
            if a != 0.0 {
                for i in 0..N {
                    y5[i] += h * a * kj[i];
                }
            }
        }
        let mut err_norm_sq = 0.0;
        for i in 0..N {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                let d = A[6].get(j).copied().unwrap_or(0.0) - B4[j];
                // A[6] has 6 entries followed by the implicit 0 weight for
                // stage 6 in the 5th-order rule; B4[6] is 1/40.
                e += h * d * kj[i];
            }
            let scale = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
            let r = e.norm() / scale;
            err_norm_sq += r * r;
        }
        let err = (err_norm_sq / N as f64).sqrt();
        if err <= 1.0 {
            t += h;
            y = y5;
            k[0] = k[6]; // FSAL
            if on_step(t, &y) == Control::Stop {
                return Ok((t, y));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(h_cap);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            k[0] = f(t, &y);
        }
    }
    Err(OdeError::MaxSteps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_complex_exponential() {
        let lambda = Complex64::new(-0.3, 2.0);
        let f = |_t: f64, y: &[Complex64; 1]| [lambda * y[0]];
        let (tf, y) = integrate_rk45(
            f,
            0.0,
            3.0,
            [Complex64::new(1.0, 0.0)],
            &OdeOptions::default(),
            |_, _| Control::Continue,
        )
        .unwrap();
        assert_eq!(tf, 3.0);
        let want = (lambda * 3.0).exp();
        assert!((y[0] - want).norm() < 1e-9, "got {} want {want}", y[0]);
    }

    #[test]
    fn early_stop_reports_state() {
        let f = |_t: f64, y: &[Complex64; 1]| [y[0]];
        let (tf, _) = integrate_rk45(
            f,
            0.0,
            10.0,
            [Complex64::new(1.0, 0.0)],
            &OdeOptions::default(),
            |t, _| if t > 1.0 { Control::Stop } else { Control::Continue },
        )
        .unwrap();
        assert!(tf > 1.0 && tf < 1.5);
    }
}
