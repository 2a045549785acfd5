//! Adaptive Dormand-Prince 5(4) integration on a fixed interval.

use crate::error::{Error, Result};

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
// fifth-order weights are the last row of A; these are fifth minus fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

#[derive(Clone, Debug)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(s, y)` from `s0` to `s1`. `f` writes the derivative
/// into its third argument. `on_accept` sees every accepted point together
/// with the derivative there.
pub fn integrate<F, G>(
    mut f: F,
    s0: f64,
    s1: f64,
    y0: &[f64],
    opts: OdeOptions,
    mut on_accept: G,
) -> Result<(Vec<f64>, OdeStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    G: FnMut(f64, &[f64], &[f64]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stats = OdeStats {
        accepted: 0,
        rejected: 0,
    };
    if n == 0 || s1 == s0 {
        return Ok((y, stats));
    }
    f(s0, &y, &mut k[0])?;
    on_accept(s0, &y, &k[0])?;
    let span = s1 - s0;
    let mut h = span.abs() * 1e-3 * span.signum();
    let mut s = s0;
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    while (s1 - s) * span.signum() > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Solver(format!(
                "ODE step limit {} reached at s = {s}",
                opts.max_steps
            )));
        }
        if (s + h - s1) * span.signum() > 0.0 {
            h = s1 - s;
        }
        for stage in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..stage {
                    acc += h * A[stage][j] * k[j][i];
                }
                tmp[i] = acc;
            }
            f(s + C[stage] * h, &tmp, &mut k[stage])?;
            if stage == 6 {
                y_new.copy_from_slice(&tmp);
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::Numerical(format!("non-finite ODE state at s = {s}")));
        }
        if err <= 1.0 {
            s = if (s1 - (s + h)).abs() <= 1e-15 * span.abs() {
                s1
            } else {
                s + h
            };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            on_accept(s, &y, &k[0])?;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-14 * span.abs() {
            return Err(Error::Solver(format!("ODE step size underflow at s = {s}")));
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_oscillator() {
        let opts = OdeOptions {
            atol: 1e-12,
            rtol: 1e-12,
            max_steps: 100_000,
        };
        let (y, _) = integrate(
            |_, y, d| {
                d[0] = -y[0];
                Ok(())
            },
            0.0,
            2.0,
            &[1.0],
            opts,
            |_, _, _| Ok(()),
        )
        .unwrap();
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-10);
        let (y, st) = integrate(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            },
            0.0,
            10.0,
            &[0.0, 1.0],
            opts,
            |_, _, _| Ok(()),
        )
        .unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-9, "{st:?}");
    }
}
