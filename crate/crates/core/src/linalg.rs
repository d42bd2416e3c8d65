//! Compressed sparse rows and Jacobi-preconditioned Krylov solvers.
//!
//! Reductions run sequentially in index order so results are bit-reproducible
//! regardless of the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

/// Row-by-row assembly; duplicate column entries within a row are summed.
#[derive(Debug, Clone)]
pub struct CsrBuilder<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
    scratch: Vec<(usize, T)>,
}

impl<T: Real> CsrBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn add(&mut self, col: usize, v: T) {
        debug_assert!(col < self.n);
        self.scratch.push((col, v));
    }

    pub fn finish_row(&mut self) {
        self.scratch.sort_by_key(|e| e.0);
        let mut last: Option<usize> = None;
        for &(c, v) in &self.scratch {
            if last == Some(c) {
                let k = self.vals.len() - 1;
                self.vals[k] = self.vals[k] + v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = Some(c);
            }
        }
        self.scratch.clear();
        self.row_ptr.push(self.cols.len());
    }

    pub fn build(self) -> Result<CsrMatrix<T>> {
        if self.row_ptr.len() != self.n + 1 {
            return Err(Error::Structural(format!(
                "CSR assembly produced {} rows for a {}x{} matrix",
                self.row_ptr.len() - 1,
                self.n,
                self.n
            )));
        }
        Ok(CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        })
    }
}

impl<T: Real> CsrMatrix<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .find(|(c, _)| *c == i)
                    .map_or(T::zero(), |(_, v)| v)
            })
            .collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .into_par_iter()
            .map(|i| self.row(i).fold(T::zero(), |acc, (c, v)| acc + v * x[c]))
            .collect()
    }

    /// `max |A_ij - A_ji| <= tol * max |A_ij|`.
    pub fn is_symmetric(&self, tol: T) -> bool {
        let scale = self.vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        (0..self.n).all(|i| {
            self.row(i).all(|(j, v)| {
                let vt = self
                    .row(j)
                    .find(|(c, _)| *c == i)
                    .map_or(T::zero(), |(_, v)| v);
                (v - vt).abs() <= tol * scale
            })
        })
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn jacobi<T: Real>(a: &CsrMatrix<T>) -> Vec<T> {
    a.diagonal()
        .into_iter()
        .map(|d| {
            if d != T::zero() {
                T::one() / d
            } else {
                T::one()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats<T> {
    pub iterations: usize,
    pub relative_residual: T,
}

fn residual<T: Real>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> Vec<T> {
    a.mul_vec(x)
        .iter()
        .zip(b)
        .map(|(ax, bi)| *bi - *ax)
        .collect()
}

/// Preconditioned conjugate gradients for symmetric positive (semi)definite
/// `A`, started from `x`.
pub fn pcg<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<SolveStats<T>> {
    let bnorm = norm(b);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: T::zero(),
        });
    }
    let minv = jacobi(a);
    let mut r = residual(a, x, b);
    let mut z: Vec<T> = r.iter().zip(&minv).map(|(r, m)| *r * *m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..=max_iter {
        let rel = norm(&r) / bnorm;
        if rel <= tol {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        if it == max_iter {
            return Err(Error::Solver {
                iterations: it,
                residual: rel.as_f64(),
            });
        }
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::Solver {
                iterations: it,
                residual: rel.as_f64(),
            });
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        // recompute the true residual now and then to avoid drift
        if (it + 1) % 50 == 0 {
            r = residual(a, x, b);
        }
        for i in 0..z.len() {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    unreachable!()
}

/// Right-preconditioned BiCGSTAB for general nonsingular `A`.
pub fn bicgstab<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<SolveStats<T>> {
    let bnorm = norm(b);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: T::zero(),
        });
    }
    let minv = jacobi(a);
    let precond = |v: &[T]| -> Vec<T> { v.iter().zip(&minv).map(|(a, m)| *a * *m).collect() };
    let mut r = residual(a, x, b);
    let r_hat = r.clone();
    let n = x.len();
    let (mut rho_old, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    for it in 0..=max_iter {
        let rel = norm(&r) / bnorm;
        if rel <= tol {
            // confirm with the true residual
            let true_rel = norm(&residual(a, x, b)) / bnorm;
            if true_rel <= tol * T::lit(10.0) {
                return Ok(SolveStats {
                    iterations: it,
                    relative_residual: true_rel,
                });
            }
            r = residual(a, x, b);
        }
        if it == max_iter {
            return Err(Error::Solver {
                iterations: it,
                residual: rel.as_f64(),
            });
        }
        let rho = dot(&r_hat, &r);
        if rho == T::zero() || omega == T::zero() {
            return Err(Error::Solver {
                iterations: it,
                residual: rel.as_f64(),
            });
        }
        let beta = (rho / rho_old) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let y = precond(&p);
        v = a.mul_vec(&y);
        let rv = dot(&r_hat, &v);
        if rv == T::zero() {
            return Err(Error::Solver {
                iterations: it,
                residual: rel.as_f64(),
            });
        }
        alpha = rho / rv;
        let s: Vec<T> = r.iter().zip(&v).map(|(r, v)| *r - alpha * *v).collect();
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] = x[i] + alpha * y[i];
            }
            r = s;
            continue;
        }
        let z = precond(&s);
        let t = a.mul_vec(&z);
        let tt = dot(&t, &t);
        omega = if tt > T::zero() {
            dot(&t, &s) / tt
        } else {
            T::zero()
        };
        for i in 0..n {
            x[i] = x[i] + alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        rho_old = rho;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize, shift: f64, skew: f64) -> CsrMatrix<f64> {
        let mut b = CsrBuilder::new(n);
        for i in 0..n {
            b.add(i, 2.0 + shift);
            if i > 0 {
                b.add(i - 1, -1.0 - skew);
            }
            if i + 1 < n {
                b.add(i + 1, -1.0 + skew);
            }
            b.finish_row();
        }
        b.build().unwrap()
    }

    #[test]
    fn builder_merges_duplicates() {
        let mut b = CsrBuilder::new(2);
        b.add(1, 1.0);
        b.add(0, 2.0);
        b.add(1, 3.0);
        b.finish_row();
        b.add(1, 1.0);
        b.finish_row();
        let m = b.build().unwrap();
        assert_eq!(m.row(0).collect::<Vec<_>>(), vec![(0, 2.0), (1, 4.0)]);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![6.0, 1.0]);
        assert!(!m.is_symmetric(1e-12));
    }

    #[test]
    fn pcg_and_bicgstab_solve() {
        let n = 200;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let a = laplace_1d(n, 0.01, 0.0);
        assert!(a.is_symmetric(0.0));
        let b = a.mul_vec(&xs);
        let mut x = vec![0.0; n];
        let s = pcg(&a, &b, &mut x, 1e-12, 10_000).unwrap();
        assert!(s.relative_residual <= 1e-12);
        assert!(x.iter().zip(&xs).all(|(a, b)| (a - b).abs() < 1e-8));

        let a = laplace_1d(n, 0.5, 0.3);
        let b = a.mul_vec(&xs);
        let mut x = vec![0.0; n];
        bicgstab(&a, &b, &mut x, 1e-12, 10_000).unwrap();
        assert!(x.iter().zip(&xs).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn zero_rhs_and_failure_report() {
        let a = laplace_1d(10, 0.0, 0.0);
        let mut x = vec![1.0; 10];
        pcg(&a, &[0.0; 10], &mut x, 1e-10, 5).unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
        let a = laplace_1d(500, 0.0, 0.0);
        let mut x = vec![0.0; 500];
        let b = vec![1.0; 500];
        assert!(matches!(
            pcg(&a, &b, &mut x, 1e-14, 3),
            Err(Error::Solver { iterations: 3, .. })
        ));
    }
}
