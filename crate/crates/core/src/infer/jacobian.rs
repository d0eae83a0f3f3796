use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smm::SmmProblem;

/// Finite-difference scheme used for one Jacobian column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difference {
    Central,
    Forward,
    Backward,
    /// No room to move inside the box; the column is zero.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    /// `len x p` derivative of the simulated moments.
    pub matrix: DMatrix<f64>,
    pub schemes: Vec<Difference>,
    /// Step used per column.
    pub steps: Vec<f64>,
}

impl Jacobian {
    pub fn degenerate(&self) -> Vec<bool> {
        self.schemes.iter().map(|s| *s == Difference::Degenerate).collect()
    }
}

/// Finite-difference Jacobian of `f` at `theta`: central differences with
/// step `pi`, one-sided with the same step where one side leaves the box,
/// and the largest feasible one-sided step when neither side fits.
pub fn numeric_jacobian_of(
    mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    theta: &[f64],
    bounds: &[(f64, f64)],
    pi: f64,
) -> Result<Jacobian> {
    if !(pi > 0.0) {
        return Err(Error::Domain(format!("difference step {pi} must be positive")));
    }
    if theta.len() != bounds.len() {
        return Err(Error::Dimension(format!(
            "{} parameters, {} bounds",
            theta.len(),
            bounds.len()
        )));
    }
    let p = theta.len();
    let mut center: Option<Vec<f64>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut schemes = Vec::with_capacity(p);
    let mut steps = Vec::with_capacity(p);
    let mut len = None;
    for k in 0..p {
        let (lo, hi) = bounds[k];
        let x = theta[k];
        let up = x + pi <= hi;
        let down = x - pi >= lo;
        let at = |v: f64| {
            let mut th = theta.to_vec();
            th[k] = v;
            th
        };
        let (scheme, h) = match (up, down) {
            (true, true) => (Difference::Central, pi),
            (true, false) => (Difference::Forward, pi),
            (false, true) => (Difference::Backward, pi),
            (false, false) => {
                let room_up = hi - x;
                let room_down = x - lo;
                let h = room_up.max(room_down);
                if !(h > 1e-12 * x.abs().max(1.0)) {
                    (Difference::Degenerate, 0.0)
                } else if room_up >= room_down {
                    (Difference::Forward, h)
                } else {
                    (Difference::Backward, h)
                }
            }
        };
        let col: Option<Vec<f64>> = match scheme {
            Difference::Central => {
                let a = f(&at(x + h))?;
                let b = f(&at(x - h))?;
                Some(a.iter().zip(&b).map(|(u, v)| (u - v) / (2.0 * h)).collect())
            }
            Difference::Forward | Difference::Backward => {
                if center.is_none() {
                    center = Some(f(theta)?);
                }
                let c = center.as_ref().expect("center evaluated");
                let shifted = if scheme == Difference::Forward { x + h } else { x - h };
                let a = f(&at(shifted))?;
                let sign = if scheme == Difference::Forward { 1.0 } else { -1.0 };
                Some(a.iter().zip(c).map(|(u, v)| sign * (u - v) / h).collect())
            }
            Difference::Degenerate => None,
        };
        if let Some(c) = &col {
            len = Some(c.len());
        }
        columns.push(col.unwrap_or_default());
        schemes.push(scheme);
        steps.push(h);
    }
    let len = match len {
        Some(l) => l,
        None => f(theta)?.len(),
    };
    let mut matrix = DMatrix::zeros(len, p);
    for (k, c) in columns.iter().enumerate() {
        if !c.is_empty() {
            if c.len() != len {
                return Err(Error::Dimension("moment map changed length".into()));
            }
            for (i, v) in c.iter().enumerate() {
                matrix[(i, k)] = *v;
            }
        }
    }
    Ok(Jacobian {
        matrix,
        schemes,
        steps,
    })
}

/// Jacobian of the simulated moment vector, with the problem's draws held
/// fixed on both sides of every difference.
pub fn numeric_jacobian(problem: &SmmProblem, theta: &[f64], pi: f64) -> Result<Jacobian> {
    numeric_jacobian_of(|th| problem.simulated_moments(th), theta, problem.bounds(), pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_at_bounds() {
        let f = |x: &[f64]| Ok(vec![x[0] * x[0], x[1]]);
        let j = numeric_jacobian_of(f, &[0.99, 0.5], &[(0.0, 1.0), (0.0, 1.0)], 0.05).unwrap();
        assert_eq!(j.schemes, [Difference::Backward, Difference::Central]);
        assert!((j.matrix[(0, 0)] - (0.99 + 0.94)).abs() < 1e-12);
        assert!((j.matrix[(1, 1)] - 1.0).abs() < 1e-12);

        let narrow = numeric_jacobian_of(f, &[0.5, 0.5], &[(0.49, 0.52), (0.5, 0.5)], 0.05).unwrap();
        assert_eq!(narrow.schemes, [Difference::Forward, Difference::Degenerate]);
        assert_eq!(narrow.matrix[(1, 1)], 0.0);
        assert!((narrow.steps[0] - 0.02).abs() < 1e-15);
    }
}
