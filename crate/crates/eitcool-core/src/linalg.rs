//! Small dense linear-algebra helpers shared by the physics modules.

use alloc::format;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Truncated position quadrature b + b† on `n` Fock states.
pub fn position_quadrature(n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, n);
    for k in 1..n {
        let s = (k as f64).sqrt();
        x[(k - 1, k)] = s;
        x[(k, k - 1)] = s;
    }
    x
}

/// exp(iη(b+b†)) on `n` Fock states, from the eigendecomposition of the
/// truncated quadrature. The result is exactly unitary on the truncated space.
pub fn displacement(eta: f64, n: usize) -> CMatrix {
    if eta == 0.0 {
        return CMatrix::identity(n, n);
    }
    let eig = SymmetricEigen::new(position_quadrature(n));
    let v = eig.eigenvectors;
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let ph = C64::from_polar(1.0, eta * eig.eigenvalues[k]);
        for i in 0..n {
            let vik = v[(i, k)] * ph;
            for j in 0..n {
                out[(i, j)] += vik * v[(j, k)];
            }
        }
    }
    out
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// max |M - M†|.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

/// Solves A x = b by LU with partial pivoting. The condition estimate is the
/// ratio of the largest to the smallest pivot magnitude; solves whose
/// estimate exceeds `max_condition` are rejected.
pub fn solve(a: CMatrix, b: &CVector, max_condition: f64, context: &str) -> Result<CVector> {
    let lu = a.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..u.nrows() {
        let p = u[(i, i)].norm();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= max_condition) {
        return Err(Error::Singular { condition, context: format!("{context}") });
    }
    lu.solve(b).ok_or_else(|| Error::Singular { condition, context: format!("{context}") })
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> DVector<f64> {
    let mut h = m.clone();
    let n = h.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            h[(i, j)] = avg;
            h[(j, i)] = avg.conj();
        }
        h[(i, i)] = C64::new(h[(i, i)].re, 0.0);
    }
    let mut ev = SymmetricEigen::new(h).eigenvalues;
    ev.as_mut_slice().sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    ev
}

/// Brent's method for a scalar root in [a, b] (requires a sign change).
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Some(b)
}

/// Golden-section refinement of a local maximum bracketed by [a, b].
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
