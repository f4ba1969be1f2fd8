//! Dormand-Prince 5(4) integrator with adaptive steps and cubic Hermite
//! dense output.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    /// Shorten steps to land on every output time. When false, outputs
    /// inside a step come from cubic Hermite interpolation, one order less
    /// accurate than the integrator.
    pub hit_outputs: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 1_000_000,
            initial_step: None,
            hit_outputs: true,
        }
    }
}

impl StepControl {
    pub fn with_tolerance(tol: f64) -> Self {
        StepControl {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

/// States at the requested output times.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn hermite<const N: usize>(t0: f64, h: f64, y0: &[f64; N], f0: &[f64; N], y1: &[f64; N], f1: &[f64; N], t: f64) -> [f64; N] {
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    std::array::from_fn(|i| h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i])
}

/// Integrates `dy/dt = f(t, y)` from `t0` and reports states at `outputs`
/// (ascending, within `[t0, t_end]`). `t_end` is the last output time.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    control: &StepControl,
) -> Result<Solution<N>> {
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::Config("output times must be ascending and start at t0 or later".into()));
    }
    if !(control.rtol > 0.0 && control.atol > 0.0) {
        return Err(Error::Config("tolerances must be positive".into()));
    }
    let t_end = outputs.last().copied().unwrap_or(t0);
    let mut sol = Solution {
        times: Vec::with_capacity(outputs.len()),
        states: Vec::with_capacity(outputs.len()),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        sol.times.push(outputs[next_out]);
        sol.states.push(y0);
        next_out += 1;
    }
    if next_out == outputs.len() {
        return Ok(sol);
    }

    let norm = |v: &[f64; N], y: &[f64; N]| -> f64 {
        let s: f64 = (0..N)
            .map(|i| {
                let sc = control.atol + control.rtol * y[i].abs();
                (v[i] / sc).powi(2)
            })
            .sum();
        (s / N as f64).sqrt()
    };

    let mut t = t0;
    let mut y = y0;
    let mut fy = f(t, &y)?;
    let span = t_end - t0;
    let mut h = match control.initial_step {
        Some(h) => h,
        None => {
            let d0 = norm(&y, &y);
            let d1 = norm(&fy, &y);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            h0.min(span)
        }
    };
    let h_min = 1e-14 * span.abs().max(t.abs()).max(1.0);

    let mut k = [[0.0; N]; 7];
    loop {
        if sol.accepted_steps + sol.rejected_steps >= control.max_steps {
            return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
        }
        let target = if control.hit_outputs { outputs[next_out] } else { t_end };
        let proposed = h;
        let last = t + h >= target;
        if last {
            h = target - t;
        }
        k[0] = fy;
        let mut stage_error = None;
        for s in 1..7 {
            let ys: [f64; N] = std::array::from_fn(|i| {
                y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()
            });
            match f(t + C[s] * h, &ys) {
                Ok(v) => k[s] = v,
                Err(e) => {
                    stage_error = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = stage_error {
            // A trial stage left the valid region; retry with a smaller step.
            h *= 0.25;
            sol.rejected_steps += 1;
            if h < h_min {
                return Err(e);
            }
            continue;
        }
        let y1: [f64; N] = std::array::from_fn(|i| {
            y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>()
        });
        let err_vec: [f64; N] = std::array::from_fn(|i| h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>());
        let scale: [f64; N] = std::array::from_fn(|i| y[i].abs().max(y1[i].abs()));
        let err = norm(&err_vec, &scale);
        if !err.is_finite() {
            h *= 0.25;
            sol.rejected_steps += 1;
            if h < h_min {
                return Err(Error::Integration(format!("non-finite state near t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            let f1 = k[6];
            let t1 = if last { target } else { t + h };
            while next_out < outputs.len() && outputs[next_out] <= t1 {
                let to = outputs[next_out];
                let state = if to == t1 { y1 } else { hermite(t, h, &y, &fy, &y1, &f1, to) };
                sol.times.push(to);
                sol.states.push(state);
                next_out += 1;
            }
            t = t1;
            y = y1;
            fy = f1;
            sol.accepted_steps += 1;
            if next_out == outputs.len() {
                return Ok(sol);
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A step shortened to hit an output does not shrink the next one.
            h = if last { proposed.max(h * fac) } else { h * fac };
        } else {
            sol.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h < h_min {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }
    }
}

/// `n + 1` evenly spaced times from `t0` to `t_end`.
pub fn linspace(t0: f64, t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|i| if i == n { t_end } else { t0 + (t_end - t0) * i as f64 / n as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let sol = integrate(|_, y: &[f64; 1]| Ok([-y[0]]), 0.0, [1.0], &linspace(0.0, 5.0, 10), &StepControl::default()).unwrap();
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert_relative_eq!(y[0], (-t).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn harmonic_oscillator_phase() {
        let sol = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [1.0, 0.0],
            &[std::f64::consts::PI, 2.0 * std::f64::consts::PI],
            &StepControl::with_tolerance(1e-12),
        )
        .unwrap();
        assert_relative_eq!(sol.states[0][0], -1.0, epsilon = 1e-10);
        assert_relative_eq!(sol.states[1][0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_unordered_outputs() {
        let r = integrate(|_, y: &[f64; 1]| Ok(*y), 0.0, [1.0], &[2.0, 1.0], &StepControl::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
