//! Adaptive Dormand–Prince 5(4) integrator for real state vectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            max_steps: 5_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dt = f(t, y)` from `times[0]`, landing exactly on every
/// requested time. `observe` is called with each grid time and state.
pub fn integrate<F, O>(
    mut rhs: F,
    y0: &[f64],
    times: &[f64],
    tol: Tolerances,
    mut observe: O,
) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(usize, f64, &[f64]),
{
    if times.is_empty() {
        return Ok(());
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("times must be finite and non-decreasing".into()));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut t = times[0];
    observe(0, t, &y);

    rhs(t, &y, &mut k[0]);
    let mut h = initial_step(&y, &k[0], tol);
    let mut steps = 0usize;

    for (idx, &target) in times.iter().enumerate().skip(1) {
        while t < target {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {} steps", tol.max_steps),
                });
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += step * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                rhs(t + C[s] * step, &tmp, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&tmp);
                }
            }
            let mut err = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                let r = step * e / scale;
                err += r * r;
            }
            let err = (err / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            let proposed = step * factor;
            if err <= 1.0 && last {
                // keep the unclipped step for the next interval
                h = h.max(proposed).min(h * 5.0);
            } else {
                h = proposed;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration {
                    t,
                    reason: "step size underflow".into(),
                });
            }
        }
        observe(idx, t, &y);
    }
    Ok(())
}

fn initial_step(y: &[f64], f0: &[f64], tol: Tolerances) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, fi) in y.iter().zip(f0) {
        let sc = tol.atol + tol.rtol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (fi / sc).powi(2);
    }
    let n = y.len().max(1) as f64;
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        (0.01 * d0 / d1).min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.7).collect();
        let mut out = Vec::new();
        integrate(
            |_, y, dy| dy[0] = -0.8 * y[0],
            &[2.0],
            &times,
            Tolerances::default(),
            |_, t, y| out.push((t, y[0])),
        )
        .unwrap();
        assert_eq!(out.len(), 11);
        for (t, y) in out {
            assert!((y - 2.0 * (-0.8 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_lands_on_grid() {
        let times = [0.0, 0.1, 0.1, 3.0, 25.0];
        let mut out = Vec::new();
        integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[1.0, 0.0],
            &times,
            Tolerances::default(),
            |_, t, y| out.push((t, y[0], y[1])),
        )
        .unwrap();
        for ((t, x, v), &expected_t) in out.iter().zip(&times) {
            assert_eq!(*t, expected_t);
            assert!((x - t.cos()).abs() < 1e-8);
            assert!((v + t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_decreasing_grid() {
        let r = integrate(|_, _, _| {}, &[0.0], &[1.0, 0.5], Tolerances::default(), |_, _, _| {});
        assert!(matches!(r, Err(Error::InvalidGrid(_))));
    }
}
