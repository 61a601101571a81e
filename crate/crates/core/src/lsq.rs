//! Small dense Levenberg-Marquardt solver with central-difference Jacobians.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{SMatrix, SVector};

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmOptions<const N: usize> {
    pub max_iters: usize,
    /// Stop when the relative cost decrease of an accepted step falls below this.
    pub rel_tol: f64,
    /// Stop when the cost falls below this.
    pub abs_tol: f64,
    /// Central-difference step per parameter.
    pub fd_step: SVector<f64, N>,
    pub lambda0: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome<const N: usize> {
    pub x: SVector<f64, N>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
}

/// Minimise `Σ rᵢ(x)²`.
///
/// `residual` fills the vector and returns `false` when `x` is infeasible.
/// `project` maps every trial point back into the feasible set.
pub(crate) fn minimize<const N: usize, R, P>(
    x0: SVector<f64, N>,
    mut residual: R,
    project: P,
    opts: &LmOptions<N>,
) -> Option<LmOutcome<N>>
where
    R: FnMut(&SVector<f64, N>, &mut Vec<f64>) -> bool,
    P: Fn(&mut SVector<f64, N>),
{
    let mut x = x0;
    project(&mut x);
    let mut r = Vec::new();
    if !residual(&x, &mut r) {
        return None;
    }
    let mut cost = sum_sq(&r);
    let mut lambda = opts.lambda0;
    let mut converged = cost <= opts.abs_tol;
    let mut iterations = 0;
    let (mut rp, mut rm) = (Vec::new(), Vec::new());
    let mut jac = vec![SVector::<f64, N>::zeros(); r.len()];

    while !converged && iterations < opts.max_iters {
        iterations += 1;
        jac.clear();
        jac.resize(r.len(), SVector::zeros());
        for k in 0..N {
            let h = opts.fd_step[k];
            let mut xp = x;
            xp[k] += h;
            let mut xm = x;
            xm[k] -= h;
            let okp = residual(&xp, &mut rp) && rp.len() == r.len();
            let okm = residual(&xm, &mut rm) && rm.len() == r.len();
            match (okp, okm) {
                (true, true) => {
                    for (row, (a, b)) in jac.iter_mut().zip(rp.iter().zip(&rm)) {
                        row[k] = (a - b) / (2.0 * h);
                    }
                }
                (true, false) => {
                    for (row, (a, b)) in jac.iter_mut().zip(rp.iter().zip(&r)) {
                        row[k] = (a - b) / h;
                    }
                }
                (false, true) => {
                    for (row, (a, b)) in jac.iter_mut().zip(r.iter().zip(&rm)) {
                        row[k] = (a - b) / h;
                    }
                }
                (false, false) => return Some(finish(x, cost)),
            }
        }
        let mut jtj = SMatrix::<f64, N, N>::zeros();
        let mut jtr = SVector::<f64, N>::zeros();
        for (row, ri) in jac.iter().zip(&r) {
            jtj += row * row.transpose();
            jtr += row * *ri;
        }
        if !jtj.iter().all(|v| v.is_finite()) || !jtr.iter().all(|v| v.is_finite()) {
            return Some(finish(x, cost));
        }

        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..N {
                a[(k, k)] += lambda * (jtj[(k, k)] + 1e-12 * (1.0 + jtj[(k, k)]));
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 8.0;
                continue;
            };
            let mut xn = x - chol.solve(&jtr);
            project(&mut xn);
            if xn == x {
                break;
            }
            if residual(&xn, &mut rp) && rp.len() == r.len() {
                let cn = sum_sq(&rp);
                if cn < cost {
                    let decrease = (cost - cn) / cost.max(f64::MIN_POSITIVE);
                    x = xn;
                    core::mem::swap(&mut r, &mut rp);
                    cost = cn;
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    converged = decrease < opts.rel_tol || cost <= opts.abs_tol;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent direction left at any damping: a (constrained) minimum.
            converged = true;
        }
    }
    Some(finish(x, cost))
}

fn finish<const N: usize>(x: SVector<f64, N>, cost: f64) -> LmOutcome<N> {
    LmOutcome { x, cost }
}

pub(crate) fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}
