//! Orthogonal polynomials and their roots.
//!
//! Hermite values are carried in the scaled form `h_n = H_n / sqrt(2^n n!)`
//! with a separate logarithmic scale, so neither `2^n n!` nor the growth of
//! `H_n` overflows for any `n`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::jet::Scalar;

const RESCALE_ABOVE: f64 = 1e120;

/// Physicists' Hermite polynomial by the three-term recurrence
/// `H_{k+1} = 2 z H_k - 2 k H_{k-1}`. Overflows for large `n`; prefer
/// [`ScaledHermite`] beyond `n ~ 150`.
pub fn hermite(n: u32, z: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * z * cur - 2.0 * f64::from(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `h_n(z)` and `h_{n-1}(z)` as `mantissa * exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledHermite {
    pub value: f64,
    pub prev: f64,
    pub ln_scale: f64,
}

impl ScaledHermite {
    pub fn eval(n: u32, z: f64) -> Self {
        let (mut prev, mut cur, mut ln_scale) = (0.0, 1.0, 0.0);
        for k in 0..n {
            let kf = f64::from(k);
            let next = (2.0 / (kf + 1.0)).sqrt() * z * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_ABOVE {
                prev /= RESCALE_ABOVE;
                cur /= RESCALE_ABOVE;
                ln_scale += RESCALE_ABOVE.ln();
            }
        }
        ScaledHermite { value: cur, prev, ln_scale }
    }

    /// `H_n'(z) / H_n(z) = 2n H_{n-1}/H_n`, in scaled form `sqrt(2n) h_{n-1}/h_n`.
    pub fn log_derivative(&self, n: u32) -> f64 {
        (2.0 * f64::from(n)).sqrt() * self.prev / self.value
    }
}

/// Orthonormal Hermite function `H_n(z) e^{-z^2/2} / sqrt(2^n n! sqrt(pi))`.
pub fn hermite_function(n: u32, z: f64) -> f64 {
    let h = ScaledHermite::eval(n, z);
    if h.value == 0.0 {
        return 0.0;
    }
    let sign = h.value.signum();
    sign * (h.value.abs().ln() + h.ln_scale - 0.5 * z * z - 0.25 * PI.ln()).exp()
}

/// Central differences of `h_n` about `z`: returns `(h, D, S)` with
/// `D = h(z + delta) - h(z - delta)` and `S = h(z + delta) + h(z - delta) - 2 h(z)`,
/// all in a common (unspecified) scale.
///
/// `D` and `S` are propagated through their own recurrences so they keep full
/// relative accuracy when `delta` is tiny.
pub fn scaled_hermite_central(n: u32, z: f64, delta: f64) -> (f64, f64, f64) {
    let (mut h0, mut h1) = (0.0, 1.0); // h_{k-1}(z), h_k(z)
    let (mut d0, mut d1) = (0.0, 0.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    for k in 0..n {
        let kf = f64::from(k);
        let c1 = (2.0 / (kf + 1.0)).sqrt();
        let c2 = (kf / (kf + 1.0)).sqrt();
        let h2 = c1 * z * h1 - c2 * h0;
        let s2 = c1 * (z * s1 + delta * d1) - c2 * s0;
        let d2 = c1 * (z * d1 + delta * (s1 + 2.0 * h1)) - c2 * d0;
        h0 = h1;
        h1 = h2;
        s0 = s1;
        s1 = s2;
        d0 = d1;
        d1 = d2;
        let big = h1.abs().max(d1.abs()).max(s1.abs());
        if big > RESCALE_ABOVE {
            for v in [&mut h0, &mut h1, &mut d0, &mut d1, &mut s0, &mut s1] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    (h1, d1, s1)
}

/// The `n` roots of `H_n`, ascending.
///
/// Eigenvalues of the symmetric Jacobi matrix (off-diagonal `sqrt(k/2)`),
/// each polished by one Newton step. Fails if polishing moves a root by more
/// than `1e-10`.
pub fn hermite_roots(n: u32) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let size = n as usize;
    let jac = DMatrix::from_fn(size, size, |i, j| {
        if i + 1 == j || j + 1 == i {
            (((i.max(j)) as f64) / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    for z in roots.iter_mut() {
        let h = ScaledHermite::eval(n, *z);
        let step = if h.value == 0.0 { 0.0 } else { 1.0 / h.log_derivative(n) };
        if !step.is_finite() || step.abs() > 1e-10 {
            return Err(Error::RootPolish { n, shift: step.abs() });
        }
        *z -= step;
    }
    // the spectrum is symmetric about zero; enforce it exactly
    for i in 0..size / 2 {
        let m = 0.5 * (roots[size - 1 - i] - roots[i]);
        roots[i] = -m;
        roots[size - 1 - i] = m;
    }
    if size % 2 == 1 {
        roots[size / 2] = 0.0;
    }
    Ok(roots)
}

/// Generalized Laguerre polynomial `L_k^alpha(x)`.
pub fn laguerre<T: Scalar>(k: u32, alpha: f64, x: T) -> T {
    if k == 0 {
        return T::cst(1.0);
    }
    let mut prev = T::cst(1.0);
    let mut cur = -x + (1.0 + alpha);
    for j in 1..k {
        let jf = f64::from(j);
        let next = ((-x + (2.0 * jf + 1.0 + alpha)) * cur - prev * (jf + alpha)) * (1.0 / (jf + 1.0));
        prev = cur;
        cur = next;
    }
    cur
}

/// Roots of `L_k^alpha`, ascending, from the Laguerre Jacobi matrix.
pub fn laguerre_roots(k: u32, alpha: f64) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let size = k as usize;
    let jac = DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            2.0 * i as f64 + alpha + 1.0
        } else if i + 1 == j || j + 1 == i {
            let m = i.max(j) as f64;
            (m * (m + alpha)).sqrt()
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    for x in roots.iter_mut() {
        let value = laguerre(k, alpha, *x);
        let deriv = -laguerre(k - 1, alpha + 1.0, *x);
        let step = value / deriv;
        if step.is_finite() && step.abs() < 1e-8 * x.abs().max(1.0) {
            *x -= step;
        }
    }
    Ok(roots)
}

/// Theta part of the orthonormal spherical harmonic with the Condon-Shortley
/// phase: `Y_l^m(theta, phi) = theta_part(l, m, cos theta, sin theta) e^{i m phi}`
/// for `m >= 0`. `sin_theta` is passed separately so directional jets stay exact.
pub fn spherical_theta<T: Scalar>(l: u32, m: u32, cos_t: T, sin_t: T) -> T {
    debug_assert!(m <= l);
    let mut pmm = T::cst((1.0 / (4.0 * PI)).sqrt());
    for k in 1..=m {
        let kf = f64::from(k);
        pmm = pmm * sin_t * (-((2.0 * kf + 1.0) / (2.0 * kf)).sqrt());
    }
    if l == m {
        return pmm;
    }
    let mf = f64::from(m);
    let mut prev = pmm;
    let mut cur = cos_t * pmm * (2.0 * mf + 3.0).sqrt();
    let coeff = |ll: f64| ((4.0 * ll * ll - 1.0) / (ll * ll - mf * mf)).sqrt();
    for ll in (m + 2)..=l {
        let lf = f64::from(ll);
        let a = coeff(lf);
        let a_prev = coeff(lf - 1.0);
        let next = (cos_t * cur - prev * (1.0 / a_prev)) * a;
        prev = cur;
        cur = next;
    }
    cur
}

/// Zeros of the theta part in `cos theta in (-1, 1)`, ascending.
pub fn spherical_theta_nodes(l: u32, m: u32) -> Vec<f64> {
    let deg = l - m;
    if deg == 0 {
        return Vec::new();
    }
    let f = |c: f64| spherical_theta(l, m, c, 1.0);
    // polynomial in cos theta of degree l - m with simple roots in (-1, 1)
    let grid = 4000;
    let mut roots = Vec::new();
    let mut x0 = -1.0;
    let mut f0 = f(x0);
    for i in 1..=grid {
        let x1 = -1.0 + 2.0 * i as f64 / grid as f64;
        let f1 = f(x1);
        if f1 == 0.0 && i < grid {
            roots.push(x1);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-16 {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// `ln(n!)` by direct summation (exact enough for the small arguments used here).
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}
