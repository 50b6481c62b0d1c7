//! Central finite-difference oracle for tape gradients.
//!
//! The oracle only evaluates forward values, so it is independent of every
//! backward rule it checks.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::tape::{Tape, Var};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

const ABSOLUTE_FLOOR: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// Per input: `||analytic - numeric|| / max(||analytic||, ||numeric||)`,
    /// or the absolute difference when both norms are below 1e-7.
    pub relative_errors: Vec<f64>,
    pub analytic: Vec<Tensor>,
    pub numeric: Vec<Tensor>,
}

impl GradCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.relative_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Central differences of a scalar function of several tensors.
pub fn numeric_gradients<F>(inputs: &[Tensor], h: f64, mut f: F) -> Result<Vec<Tensor>>
where
    F: FnMut(&[Tensor]) -> Result<f64>,
{
    let mut point: Vec<Tensor> = inputs.to_vec();
    let mut out = Vec::with_capacity(inputs.len());
    for i in 0..inputs.len() {
        let mut g = Tensor::zeros(inputs[i].rows(), inputs[i].cols());
        for j in 0..inputs[i].len() {
            let orig = point[i].data()[j];
            point[i].data_mut()[j] = orig + h;
            let plus = f(&point)?;
            point[i].data_mut()[j] = orig - h;
            let minus = f(&point)?;
            point[i].data_mut()[j] = orig;
            g.data_mut()[j] = (plus - minus) / (2.0 * h);
        }
        out.push(g);
    }
    Ok(out)
}

/// Compares tape gradients of `build` against central differences.
/// `build` receives a fresh tape and one gradient-tracking leaf per input
/// and returns a scalar loss.
pub fn check_gradients<F>(inputs: &[Tensor], h: f64, mut build: F) -> Result<GradCheckReport>
where
    F: FnMut(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone(), true)).collect();
    let loss = build(&mut tape, &vars)?;
    if tape.shape(loss) != (1, 1) {
        return Err(Error::Contract("gradient check needs a scalar loss".into()));
    }
    tape.backward(loss)?;
    let analytic: Vec<Tensor> = vars
        .iter()
        .map(|&v| {
            tape.grad(v).cloned().unwrap_or_else(|| {
                let (r, c) = tape.shape(v);
                Tensor::zeros(r, c)
            })
        })
        .collect();
    let numeric = numeric_gradients(inputs, h, |point| {
        let mut t = Tape::new();
        let vs: Vec<Var> = point.iter().map(|p| t.leaf(p.clone(), true)).collect();
        let l = build(&mut t, &vs)?;
        Ok(t.value(l).item())
    })?;
    let relative_errors = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| {
            let diff = a.sub(n).expect("same shapes").frobenius_norm();
            let scale = a.frobenius_norm().max(n.frobenius_norm());
            // central differences carry ~1e-11 round-off; below this floor
            // compare absolutely
            if scale < ABSOLUTE_FLOOR {
                diff
            } else {
                diff / scale
            }
        })
        .collect();
    Ok(GradCheckReport {
        relative_errors,
        analytic,
        numeric,
    })
}
