//! Time-domain simulation of switched systems with coupling-matrix state
//! resets, frequency-response evaluation, and model-comparison metrics.
//!
//! Integration uses the classical fixed-step fourth-order Runge-Kutta scheme;
//! the step is shortened per dwell interval so the grid lands exactly on every
//! switch boundary. Mode q is active on the half-open interval (T_(i-1), T_i];
//! at a switch from q to q' the post-switch state solves
//! `E_(q') x+ = K_(q,q') x-`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lss::{C64, LssModel, SwitchingSignal, promote};

/// Overflow guard for the state norm during integration.
const STATE_GUARD: f64 = 1e150;

/// Sampled output trajectory with the active mode at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// One output vector (length p) per time sample.
    pub y: Vec<Vec<f64>>,
    pub mode: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// First output channel as a flat series.
    pub fn y0(&self) -> Vec<f64> {
        self.y.iter().map(|v| v[0]).collect()
    }
}

/// Per-mode frequency response samples H_q(i omega).
#[derive(Debug, Clone, PartialEq)]
pub struct FreqResponse {
    pub omega: Vec<f64>,
    /// h[q-1][i] = H_q(i omega_i).
    pub h: Vec<Vec<C64>>,
}

/// Input-signal specs accepted by the command line: `zero`, `step:A`,
/// `sin:A,F` (amplitude A, frequency F in hertz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputSignal {
    Zero,
    Step(f64),
    Sin { amplitude: f64, frequency_hz: f64 },
}

impl InputSignal {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            InputSignal::Zero => 0.0,
            InputSignal::Step(a) => a,
            InputSignal::Sin { amplitude, frequency_hz } => {
                amplitude * (2.0 * std::f64::consts::PI * frequency_hz * t).sin()
            }
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidInput(msg);
        if spec == "zero" {
            return Ok(InputSignal::Zero);
        }
        if let Some(rest) = spec.strip_prefix("step:") {
            let a: f64 = rest.parse().map_err(|_| bad(format!("bad step amplitude {rest:?}")))?;
            return Ok(InputSignal::Step(a));
        }
        if let Some(rest) = spec.strip_prefix("sin:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(bad(format!("sin wants A,F, got {rest:?}")));
            }
            let amplitude = parts[0].parse().map_err(|_| bad(format!("bad amplitude {:?}", parts[0])))?;
            let frequency_hz = parts[1].parse().map_err(|_| bad(format!("bad frequency {:?}", parts[1])))?;
            return Ok(InputSignal::Sin { amplitude, frequency_hz });
        }
        Err(bad(format!("unknown input spec {spec:?}; use zero, step:A or sin:A,F")))
    }
}

impl std::fmt::Display for InputSignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            InputSignal::Zero => write!(f, "zero"),
            InputSignal::Step(a) => write!(f, "step:{a}"),
            InputSignal::Sin { amplitude, frequency_hz } => {
                write!(f, "sin:{amplitude},{frequency_hz}")
            }
        }
    }
}

/// The post-switch state: solves `E_(to) x+ = K_(from,to) x-`.
pub fn switch_state(model: &LssModel, from: usize, to: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
    let k = model.coupling_matrix(from, to)?;
    let rhs = &k * x;
    model
        .mode(to)
        .e
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidInput(format!("E of mode {to} is singular")))
}

/// Integrates the switched system from zero initial state under `input`.
///
/// `max_step` bounds the integrator step; each dwell interval uses the largest
/// step not exceeding it that divides the interval evenly.
pub fn simulate(
    model: &LssModel,
    signal: &SwitchingSignal,
    input: &dyn Fn(f64) -> f64,
    max_step: f64,
) -> Result<Trajectory> {
    if model.num_inputs() != 1 {
        return Err(Error::DimensionMismatch {
            context: format!("simulate drives a single input, model has {}", model.num_inputs()),
        });
    }
    if max_step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !max_step.is_finite() {
        return Err(Error::InvalidInput(format!("max_step must be positive, got {max_step}")));
    }
    let d = model.num_modes();
    if signal.max_mode() > d {
        return Err(Error::InvalidSignal {
            reason: format!("signal uses mode {} but the model has {d}", signal.max_mode()),
        });
    }

    // one E factorization per mode, reused across the whole run
    let e_lus: Vec<_> = (1..=d).map(|q| model.mode(q).e.clone().lu()).collect();
    let deriv = |q: usize, t: f64, x: &DVector<f64>| -> DVector<f64> {
        let ms = model.mode(q);
        let rhs = &ms.a * x + &ms.b * input(t);
        e_lus[q - 1].solve(&rhs).expect("E validated nonsingular")
    };

    let mut out = Trajectory { t: Vec::new(), y: Vec::new(), mode: Vec::new() };
    let mut record = |t: f64, q: usize, x: &DVector<f64>| {
        let y = &model.mode(q).c * x;
        out.t.push(t);
        out.y.push(y.iter().copied().collect());
        out.mode.push(q);
    };

    let first_mode = signal.events()[0].0;
    let mut x = DVector::<f64>::zeros(model.dim(first_mode));
    let mut t_start = 0.0;
    record(0.0, first_mode, &x);

    let mut prev_mode = first_mode;
    for (idx, &(q, dur)) in signal.events().iter().enumerate() {
        if idx > 0 {
            // state reset into the new mode, applied at the right limit
            x = switch_state(model, prev_mode, q, &x)?;
        }
        let steps = (dur / max_step).ceil().max(1.0) as usize;
        let h = dur / steps as f64;
        for k in 0..steps {
            let t0 = t_start + k as f64 * h;
            let k1 = deriv(q, t0, &x);
            let k2 = deriv(q, t0 + 0.5 * h, &(&x + &k1 * (0.5 * h)));
            let k3 = deriv(q, t0 + 0.5 * h, &(&x + &k2 * (0.5 * h)));
            let k4 = deriv(q, t0 + h, &(&x + &k3 * h));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            let t_next = if k + 1 == steps { t_start + dur } else { t0 + h };
            if x.iter().any(|v| !v.is_finite()) || x.norm() > STATE_GUARD {
                return Err(Error::NonFiniteState { t: t_next });
            }
            record(t_next, q, &x);
        }
        t_start += dur;
        prev_mode = q;
    }
    Ok(out)
}

/// Level-one frequency response of mode q at `s = i omega`.
pub fn freq_response_mode(model: &LssModel, q: usize, omega: &[f64]) -> Result<Vec<C64>> {
    let ms = model.mode(q);
    let b = promote(&ms.b);
    let c = promote(&ms.c);
    omega
        .iter()
        .map(|&w| {
            let x = model.resolvent_solve(q, C64::new(0.0, w), &b)?;
            Ok((&c * x)[(0, 0)])
        })
        .collect()
}

/// Frequency response of every mode over one grid.
pub fn freq_response(model: &LssModel, omega: &[f64]) -> Result<FreqResponse> {
    if omega.windows(2).any(|w| w[1] <= w[0]) || omega.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidInput("omega grid must be nonnegative and increasing".into()));
    }
    let h = (1..=model.num_modes())
        .map(|q| freq_response_mode(model, q, omega))
        .collect::<Result<_>>()?;
    Ok(FreqResponse { omega: omega.to_vec(), h })
}

/// Frequency- and time-domain deviation of model `b` from reference `a`.
#[derive(Debug, Clone)]
pub struct CompareMetrics {
    pub omega: Vec<f64>,
    /// freq_rel_err[q-1][i]: |H_a - H_b| / |H_a| at omega_i, floor-guarded.
    pub freq_rel_err: Vec<Vec<f64>>,
    pub time: Vec<f64>,
    pub time_abs_err: Vec<f64>,
    /// |y_a - y_b| / max(|y_a|, 1e-12 * max|y_a|).
    pub time_rel_err: Vec<f64>,
    pub max_freq_err: f64,
    pub l2_freq_err: f64,
    pub max_time_err: f64,
    pub max_time_rel_err: f64,
    pub l2_time_err: f64,
}

/// Runs both models through the same signal, input and frequency grid.
pub fn compare(
    model_a: &LssModel,
    model_b: &LssModel,
    signal: &SwitchingSignal,
    input: &dyn Fn(f64) -> f64,
    omega: &[f64],
    max_step: f64,
) -> Result<CompareMetrics> {
    if model_a.num_modes() != model_b.num_modes() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "models disagree on mode count: {} vs {}",
                model_a.num_modes(),
                model_b.num_modes()
            ),
        });
    }
    let fa = freq_response(model_a, omega)?;
    let fb = freq_response(model_b, omega)?;
    let mut freq_rel_err = Vec::with_capacity(fa.h.len());
    for q in 0..fa.h.len() {
        let hmax = fa.h[q].iter().map(|v| v.norm()).fold(0.0, f64::max);
        let floor = (1e-12 * hmax).max(f64::MIN_POSITIVE);
        freq_rel_err.push(
            fa.h[q]
                .iter()
                .zip(&fb.h[q])
                .map(|(x, y)| (x - y).norm() / x.norm().max(floor))
                .collect::<Vec<f64>>(),
        );
    }

    let ta = simulate(model_a, signal, input, max_step)?;
    let tb = simulate(model_b, signal, input, max_step)?;
    debug_assert_eq!(ta.len(), tb.len());
    let ya = ta.y0();
    let yb = tb.y0();
    let ymax = ya.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = (1e-12 * ymax).max(f64::MIN_POSITIVE);
    let time_abs_err: Vec<f64> = ya.iter().zip(&yb).map(|(a, b)| (a - b).abs()).collect();
    let time_rel_err: Vec<f64> = ya
        .iter()
        .zip(&yb)
        .map(|(a, b)| (a - b).abs() / a.abs().max(floor))
        .collect();

    let max_freq_err = freq_rel_err.iter().flatten().copied().fold(0.0, f64::max);
    let l2_freq_err = freq_rel_err
        .iter()
        .flatten()
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt();
    let max_time_err = time_abs_err.iter().copied().fold(0.0, f64::max);
    let max_time_rel_err = time_rel_err.iter().copied().fold(0.0, f64::max);
    let l2_time_err = time_abs_err.iter().map(|e| e * e).sum::<f64>().sqrt();

    Ok(CompareMetrics {
        omega: omega.to_vec(),
        freq_rel_err,
        time: ta.t,
        time_abs_err,
        time_rel_err,
        max_freq_err,
        l2_freq_err,
        max_time_err,
        max_time_rel_err,
        l2_time_err,
    })
}
