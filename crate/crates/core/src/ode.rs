//! Dormand-Prince 5(4) with proportional step control, enough for the
//! radial shooting problems in this crate.

/// Outcome of one `advance` call.
#[derive(Debug, Clone, Copy)]
pub struct Advance {
    pub steps: usize,
    /// Step size to try on the next call.
    pub next_step: f64,
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
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` in place, with mixed
/// absolute/relative tolerance `tol` on every component.
pub fn advance<const D: usize>(
    f: &impl Fn(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    y: &mut [f64; D],
    t1: f64,
    tol: f64,
    first_step: f64,
) -> Result<Advance, String> {
    let mut t = t0;
    let span = t1 - t0;
    let mut h = first_step.min(span).max(span * 1e-12);
    let mut steps = 0;
    let mut last_ok = h;
    while t < t1 {
        if steps > 5_000_000 {
            return Err(format!("step budget exhausted at t = {t}"));
        }
        let final_step = t + h >= t1;
        if final_step {
            h = t1 - t;
        }
        let mut k = [[0.0; D]; 7];
        k[0] = f(t, y);
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for d in 0..D {
                        ys[d] += h * a * kj[d];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = *y;
        let mut err = 0.0f64;
        for d in 0..D {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += B[s] * k[s][d];
                lo += B_LOW[s] * k[s][d];
            }
            y_new[d] += h * hi;
            let scale = tol * (1.0 + y[d].abs().max(y_new[d].abs()));
            err = err.max((h * (hi - lo)).abs() / scale);
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < 1e-300 {
                return Err(format!("non-finite derivative near t = {t}"));
            }
            continue;
        }
        if err <= 1.0 {
            t = if final_step { t1 } else { t + h };
            *y = y_new;
            steps += 1;
            last_ok = h;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h <= f64::EPSILON * t.abs().max(1.0) {
                return Err(format!("step size underflow at t = {t}"));
            }
        }
    }
    Ok(Advance { steps, next_step: last_ok.max(h.min(span)) })
}
