//! Closed-form harmonic solution of the relaxed graph-cut problem.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::WeightMatrix;
use crate::partition::Polarity;

/// Added to every diagonal entry of the unlabelled block of the Laplacian so
/// that it is positive definite even for vertices without edges.
pub const JITTER: f64 = 1e-9;

/// Values strictly below this are labelled negative.
pub const THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSolution {
    pub f_l: Vec<f64>,
    pub f_u: Vec<f64>,
    pub labels_u: Vec<Polarity>,
}

impl HarmonicSolution {
    /// One value of `f_u` per line.
    pub fn write_values(&self, mut out: impl Write) -> io::Result<()> {
        for f in &self.f_u {
            writeln!(out, "{f}")?;
        }
        Ok(())
    }
}

/// `L = D - W'` with `D` the diagonal of row sums.
pub fn laplacian(wp: &WeightMatrix) -> DMatrix<f64> {
    let n = wp.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            wp.degree(i) - wp.get(i, i)
        } else {
            -wp.get(i, j)
        }
    })
}

pub fn threshold(f_u: &[f64]) -> Vec<Polarity> {
    f_u.iter()
        .map(|&f| {
            if f < THRESHOLD {
                Polarity::Negative
            } else {
                Polarity::Positive
            }
        })
        .collect()
}

/// Solves `L_uu f_u = -L_ul y_l` for the unlabelled block of `wp`.
///
/// # Panics
/// If `y_l` does not have one entry per labelled vertex of `wp`.
pub fn solve(wp: &WeightMatrix, y_l: &[Polarity]) -> Result<HarmonicSolution> {
    let l = wp.labelled();
    let u = wp.unlabelled();
    assert_eq!(y_l.len(), l, "one label per labelled vertex");
    let f_l: Vec<f64> = y_l.iter().map(|p| p.value()).collect();

    // The unlabelled block and right-hand side, read straight off W'.
    let mut l_uu = DMatrix::<f64>::zeros(u, u);
    let mut rhs = DVector::<f64>::zeros(u);
    for a in 0..u {
        let i = l + a;
        let row = wp.row(i);
        l_uu[(a, a)] = row.iter().sum::<f64>() - row[i] + JITTER;
        for b in 0..u {
            if a != b {
                l_uu[(a, b)] = -row[l + b];
            }
        }
        // -L_ul y_l = W_ul y_l
        rhs[a] = row[..l].iter().zip(&f_l).map(|(w, y)| w * y).sum();
    }

    let f = match l_uu.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            let lu = l_uu.lu();
            let condition = lu_condition(&lu.u());
            lu.solve(&rhs).ok_or(Error::Numerical { condition })?
        }
    };
    if !f.iter().all(|x| x.is_finite()) {
        return Err(Error::Numerical {
            condition: f64::INFINITY,
        });
    }
    let f_u: Vec<f64> = f.iter().copied().collect();
    let labels_u = threshold(&f_u);
    Ok(HarmonicSolution { f_l, f_u, labels_u })
}

fn lu_condition(upper: &DMatrix<f64>) -> f64 {
    let diag = upper.diagonal();
    let max = diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
