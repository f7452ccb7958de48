//! Matrix-free Krylov solvers used inside policy iteration.

use rayon::prelude::*;

use crate::numeric::par_dot;

pub(crate) trait LinearOperator: Sync {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct KrylovOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(x: &[f64]) -> f64 {
    par_dot(x, x).sqrt()
}

/// Conjugate gradients for symmetric positive definite operators.
pub(crate) fn cg<A: LinearOperator>(a: &A, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> KrylovOutcome {
    let n = a.len();
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    r.par_iter_mut().zip(b.par_iter()).for_each(|(ri, bi)| *ri = bi - *ri);
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = par_dot(&r, &r);
    for it in 0..max_iter {
        if rr.sqrt() <= rtol * bnorm {
            return KrylovOutcome {
                iterations: it,
                residual: rr.sqrt() / bnorm,
                converged: true,
            };
        }
        a.apply(&p, &mut ap);
        let pap = par_dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = par_dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        p.par_iter_mut().zip(r.par_iter()).for_each(|(pi, ri)| *pi = ri + beta * *pi);
    }
    KrylovOutcome {
        iterations: max_iter,
        residual: rr.sqrt() / bnorm,
        converged: rr.sqrt() <= rtol * bnorm,
    }
}

fn true_residual<A: LinearOperator>(a: &A, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.apply(x, r);
    r.par_iter_mut().zip(b.par_iter()).for_each(|(ri, bi)| *ri = bi - *ri);
}

/// BiCGSTAB for general non-singular operators. Convergence of the recursive
/// residual is confirmed against the true residual; on a mismatch the
/// iteration restarts from the current iterate.
pub(crate) fn bicgstab<A: LinearOperator>(
    a: &A,
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> KrylovOutcome {
    let n = a.len();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; n];
    let mut used = 0;
    let mut res = f64::INFINITY;
    while used < max_iter {
        true_residual(a, b, x, &mut r);
        res = norm(&r);
        if res <= rtol * bnorm {
            break;
        }
        let (it, claimed) = bicgstab_cycle(a, x, &mut r, rtol * bnorm, max_iter - used);
        used += it.max(1);
        if !claimed {
            true_residual(a, b, x, &mut r);
            res = norm(&r);
            break;
        }
    }
    KrylovOutcome {
        iterations: used,
        residual: res / bnorm,
        converged: res <= rtol * bnorm,
    }
}

/// One BiCGSTAB cycle from residual `r`; returns the iterations used and
/// whether the recursive residual reached `abs_tol`.
fn bicgstab_cycle<A: LinearOperator>(a: &A, x: &mut [f64], r: &mut [f64], abs_tol: f64, max_iter: usize) -> (usize, bool) {
    let n = a.len();
    let r0 = r.to_vec();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    for it in 0..max_iter {
        let rho_new = par_dot(&r0, r);
        if rho_new == 0.0 {
            return (it, false);
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p.par_iter_mut()
            .zip(r.par_iter().zip(v.par_iter()))
            .for_each(|(pi, (ri, vi))| *pi = ri + beta * (*pi - omega * vi));
        a.apply(&p, &mut v);
        let r0v = par_dot(&r0, &v);
        if r0v == 0.0 {
            return (it, false);
        }
        alpha = rho / r0v;
        s.par_iter_mut()
            .zip(r.par_iter().zip(v.par_iter()))
            .for_each(|(si, (ri, vi))| *si = ri - alpha * vi);
        axpy(alpha, &p, x);
        if norm(&s) <= abs_tol {
            return (it + 1, true);
        }
        a.apply(&s, &mut t);
        let tt = par_dot(&t, &t);
        omega = if tt > 0.0 { par_dot(&t, &s) / tt } else { 0.0 };
        axpy(omega, &s, x);
        r.par_iter_mut()
            .zip(s.par_iter().zip(t.par_iter()))
            .for_each(|(ri, (si, ti))| *ri = si - omega * ti);
        if omega == 0.0 {
            return (it + 1, false);
        }
        if norm(r) <= abs_tol {
            return (it + 1, true);
        }
    }
    (max_iter, false)
}
