//! Dormand-Prince 5(4) stepper for the two-component system `(z, w)`.

use super::OscillationError;

pub(crate) type State = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepperOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

/// Accepted node: time, state, right-hand side at that state, and the
/// continuous-extension coefficients of the step that ended here.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub t: f64,
    pub y: State,
    pub f: State,
    pub dense: Option<Dense>,
}

/// Coefficients `r1..r5` of the fourth-order continuous extension
/// `y(θ) = r1 + θ(r2 + (1-θ)(r3 + θ(r4 + (1-θ) r5)))`.
pub(crate) type Dense = [State; 5];

pub(crate) fn dense_eval(r: &Dense, theta: f64) -> State {
    let th1 = 1.0 - theta;
    let mut out = [0.0; 2];
    for i in 0..2 {
        out[i] = r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])));
    }
    out
}

/// `dy/dθ` of the continuous extension.
pub(crate) fn dense_derivative(r: &Dense, theta: f64) -> State {
    let th1 = 1.0 - theta;
    let mut out = [0.0; 2];
    for i in 0..2 {
        out[i] = r[1][i]
            + (1.0 - 2.0 * theta) * r[2][i]
            + (2.0 * theta - 3.0 * theta * theta) * r[3][i]
            + (2.0 * theta * th1 * th1 - 2.0 * theta * theta * th1) * r[4][i];
    }
    out
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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end`, returning every
/// accepted node (the first one is the initial state).
pub(crate) fn integrate<F>(
    rhs: F,
    t0: f64,
    y0: State,
    t_end: f64,
    opts: StepperOptions,
) -> Result<Vec<Node>, OscillationError>
where
    F: Fn(f64, &State) -> Result<State, OscillationError>,
{
    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y)?;
    let mut nodes = vec![Node { t, y, f, dense: None }];
    let span = t_end - t0;
    if span <= 0.0 {
        return Ok(nodes);
    }

    // initial step from the size of y and y'
    let scale = |y: &State, i: usize| opts.atol + opts.rtol * y[i].abs();
    let d0 = ((y[0] / scale(&y, 0)).powi(2) + (y[1] / scale(&y, 1)).powi(2)).sqrt();
    let d1 = ((f[0] / scale(&y, 0)).powi(2) + (f[1] / scale(&y, 1)).powi(2)).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h = h.min(opts.max_step).min(span).max(1e-12 * span);

    let mut steps = 0usize;
    while t < t_end {
        if steps >= opts.max_steps {
            return Err(OscillationError::StepLimit { t });
        }
        steps += 1;
        let last = t + h >= t_end || t_end - (t + h) < 1e-12 * span;
        if last {
            h = t_end - t;
        }
        let k1 = f;
        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = rhs(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let t_new = if last { t_end } else { t + h };
        let k6 = rhs(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(t_new, &y_new)?;

        let mut err: f64 = 0.0;
        for i in 0..2 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }

        if err <= 1.0 {
            let mut dense = [[0.0; 2]; 5];
            for i in 0..2 {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                dense[0][i] = y[i];
                dense[1][i] = ydiff;
                dense[2][i] = bspl;
                dense[3][i] = ydiff - h * k7[i] - bspl;
                dense[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            t = t_new;
            y = y_new;
            f = k7;
            nodes.push(Node { t, y, f, dense: Some(dense) });
            if last {
                break;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(opts.max_step);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < 1e-14 * t.abs().max(span) {
                return Err(OscillationError::StepSizeUnderflow { t });
            }
        }
    }
    Ok(nodes)
}
