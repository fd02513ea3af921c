//! Hermitian eigendecomposition (Householder tridiagonalization followed by
//! implicit-shift QL), spectral matrix functions and Schatten norms.

use num_complex::Complex64 as C64;

use super::{CMat, ONE, SUPPORT_CUTOFF, ZERO};
use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix.
///
/// `values` are ascending; `vectors` holds the matching eigenvectors as
/// orthonormal columns, so that A = V diag(values) V†.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigDecomposition {
    /// V f(Λ) V† for a scalar map on the spectrum.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = CMat::zeros(n, n);
        for k in 0..n {
            let fk = f(self.values[k]);
            if fk == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Full eigendecomposition. The input is symmetrized as (A + A†)/2 first;
/// channels applied repeatedly accumulate O(1e-14) asymmetry.
pub fn eigh(a: &CMat) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::InvalidShape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let h = a.hermitize();
    let n = h.rows();
    if n == 0 {
        return Ok(EigDecomposition { values: vec![], vectors: CMat::zeros(0, 0) });
    }
    let (h, scale) = rescale(h);
    let (mut d, mut e, qt) = tridiagonalize(&h, true);
    let mut zt = qt.expect("tridiagonalize returns Q when requested");
    ql_implicit(&mut d, &mut e, Some(&mut zt))?;
    if scale != 1.0 {
        for v in &mut d {
            *v *= scale;
        }
    }
    // sort ascending, permuting rows of the transposed accumulator
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = zt[(src, row)];
        }
    }
    Ok(EigDecomposition { values, vectors })
}

/// Eigenvalues only (ascending). Roughly 3x faster than `eigh`.
pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::InvalidShape("eigvalsh needs a square matrix".into()));
    }
    let h = a.hermitize();
    if h.rows() == 0 {
        return Ok(vec![]);
    }
    let (h, scale) = rescale(h);
    let (mut d, mut e, _) = tridiagonalize(&h, false);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if scale != 1.0 {
        for v in &mut d {
            *v *= scale;
        }
    }
    Ok(d)
}

/// Pull extreme matrix scales back to O(1) so norm accumulations cannot
/// overflow or underflow; eigenvalues are restored by the returned factor.
fn rescale(h: CMat) -> (CMat, f64) {
    let m = h.max_abs();
    if m.is_finite() && (1e-100..=1e100).contains(&m) || m == 0.0 {
        (h, 1.0)
    } else {
        (h.scale_re(1.0 / m), m)
    }
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form. Returns (diagonal, off-diagonal of length n, transposed Q) with
/// A = Q T Q†; `off[n-1]` is padding. The transposed accumulator keeps the
/// eigenvector rotations cache-friendly in the QL stage.
fn tridiagonalize(a: &CMat, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<CMat>) {
    let n = a.rows();
    let mut m = a.clone();
    let mut sub = vec![ZERO; n.saturating_sub(1)];
    // (offset, v, sigma) per reflector H = I - sigma v v†
    let mut reflectors: Vec<(usize, Vec<C64>, f64)> = Vec::new();

    for k in 0..n.saturating_sub(1) {
        let mlen = n - k - 1;
        let mut x: Vec<C64> = (0..mlen).map(|i| m[(k + 1 + i, k)]).collect();
        if mlen == 1 {
            sub[k] = x[0];
            continue;
        }
        let normx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if normx == 0.0 || tail == 0.0 {
            sub[k] = x[0];
            continue;
        }
        let alpha = x[0];
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { ONE };
        let beta = -phase * normx;
        x[0] -= beta;
        let vv: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let sigma = 2.0 / vv;

        // rank-2 update of the trailing block: B' = B - v q† - q v†
        // with w = sigma·B·v and q = w - (sigma·v†w/2)·v
        let mut w = vec![ZERO; mlen];
        for i in 0..mlen {
            let row = &m.row(k + 1 + i)[k + 1..];
            let mut acc = ZERO;
            for (j, rj) in row.iter().enumerate() {
                acc += rj * x[j];
            }
            w[i] = acc * sigma;
        }
        let vw: C64 = x.iter().zip(&w).map(|(v, w)| v.conj() * w).sum();
        let half = vw * (0.5 * sigma);
        let q: Vec<C64> = (0..mlen).map(|i| w[i] - half * x[i]).collect();
        for i in 0..mlen {
            let xi = x[i];
            let qi = q[i];
            let row = &mut m.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for j in 0..mlen {
                row[j] -= xi * q[j].conj() + qi * x[j].conj();
            }
        }
        sub[k] = beta;
        if want_q {
            reflectors.push((k + 1, x, sigma));
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();

    // rotate the complex subdiagonal onto the positive real axis
    let mut off = vec![0.0f64; n];
    let mut phases = vec![ONE; n];
    for k in 0..n.saturating_sub(1) {
        let b = sub[k];
        let r = b.norm();
        off[k] = r;
        let ph = if r > 0.0 { b / r } else { ONE };
        phases[k + 1] = phases[k] * ph;
    }

    let qt = if want_q {
        // Q = H_0 H_1 ... H_last applied right-to-left to I, stored transposed:
        // qt[c][r] = Q[r][c], so columns of Q are contiguous rows here.
        let mut qt = CMat::identity(n);
        for (off_k, v, sigma) in reflectors.iter().rev() {
            let mlen = v.len();
            for c in 0..n {
                let row = &mut qt.data[c * n + off_k..c * n + off_k + mlen];
                let mut dot = ZERO;
                for i in 0..mlen {
                    dot += v[i].conj() * row[i];
                }
                dot *= *sigma;
                for i in 0..mlen {
                    row[i] -= v[i] * dot;
                }
            }
        }
        // column phases of Q are row scalings of qt
        for j in 0..n {
            let ph = phases[j];
            for z in &mut qt.data[j * n..(j + 1) * n] {
                *z *= ph;
            }
        }
        Some(qt)
    } else {
        None
    };

    (diag, off, qt)
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix, optionally
/// accumulating the rotations into a transposed eigenvector matrix.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut CMat>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // absolute deflation floor at the backward-error scale of the whole
    // matrix; without it, sub-eps couplings between exact-zero diagonal
    // entries (rank-deficient inputs) never deflate
    let anorm = (0..n)
        .map(|i| d[i].abs() + e[i].abs())
        .fold(0.0f64, f64::max);
    let floor = f64::EPSILON * anorm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigNonConvergence(60));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let t = (d[i] - g) * s + 2.0 * c * b;
                p = s * t;
                d[i + 1] = g + p;
                g = c * t - b;
                if let Some(z) = zt.as_deref_mut() {
                    rotate_rows(z, i, s, c);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Plane rotation of rows i and i+1 of the transposed accumulator
/// (i.e. columns i, i+1 of the eigenvector matrix).
#[inline]
fn rotate_rows(zt: &mut CMat, i: usize, s: f64, c: f64) {
    let cols = zt.cols();
    let (head, tail) = zt.data.split_at_mut((i + 1) * cols);
    let ri = &mut head[i * cols..];
    let ri1 = &mut tail[..cols];
    for k in 0..cols {
        let zi = ri[k];
        let zi1 = ri1[k];
        ri1[k] = zi * s + zi1 * c;
        ri[k] = zi * c - zi1 * s;
    }
}

/// V f(Λ) V† for a Hermitian input.
pub fn psd_apply(a: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    Ok(eigh(a)?.apply(f))
}

/// Principal square root; eigenvalues below zero are clamped to zero.
pub fn sqrt_psd(a: &CMat) -> Result<CMat> {
    psd_apply(a, |x| if x > 0.0 { x.sqrt() } else { 0.0 })
}

/// Positive part X₊ of a Hermitian operator: negative eigenvalues dropped.
pub fn positive_part(a: &CMat) -> Result<CMat> {
    psd_apply(a, |x| if x > 0.0 { x } else { 0.0 })
}

/// Natural log on the support; eigenvalues at or below the relative support
/// cutoff contribute zero.
pub fn log_on_support(a: &CMat) -> Result<CMat> {
    let dec = eigh(a)?;
    let top = dec.values.iter().cloned().fold(0.0f64, f64::max);
    let cut = SUPPORT_CUTOFF * top.max(f64::MIN_POSITIVE);
    Ok(dec.apply(|x| if x > cut { x.ln() } else { 0.0 }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchattenP {
    One,
    Two,
    Inf,
}

/// Schatten norm from the singular values of A (the square roots of the
/// eigenvalues of A†A).
pub fn schatten_norm(a: &CMat, p: SchattenP) -> f64 {
    let gram = a.adjoint().matmul(a);
    let vals = eigvalsh(&gram).expect("gram matrix is Hermitian");
    let svals = vals.iter().map(|&x| x.max(0.0).sqrt());
    match p {
        SchattenP::One => svals.sum(),
        SchattenP::Two => svals.map(|s| s * s).sum::<f64>().sqrt(),
        SchattenP::Inf => svals.fold(0.0, f64::max),
    }
}
