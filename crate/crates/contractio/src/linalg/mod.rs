//! Dense complex linear algebra: the matrix carrier, tensor products,
//! partial traces, QR, Hermitian eigendecomposition and Schatten norms.

mod eig;

pub use eig::{
    eigh, eigvalsh, log_on_support, positive_part, psd_apply, schatten_norm, sqrt_psd,
    EigDecomposition, SchattenP,
};

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance used for the Hermiticity test.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues at or below `SUPPORT_CUTOFF * lambda_max` are treated as
/// outside the support for log/inversion purposes.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Dense complex matrix, row-major storage. Entry (i, j) is `data[i * cols + j]`.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from a row-major slice of entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        Ok(CMat { rows, cols, data: entries.to_vec() })
    }

    /// Real matrix helper, mostly for tests and fixed gates.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidShape("entry count mismatch".into()));
        }
        Ok(CMat {
            rows,
            cols,
            data: entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        })
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = CMat::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let vals: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        CMat::diag(&vals)
    }

    /// Outer product v v† of a column vector.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn fill_zero(&mut self) {
        self.data.fill(ZERO);
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut m = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max_{i,j} |A[i,j] - conj(A[j,i])|.
    pub fn hermiticity_error(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Hermitian within the spec tolerance 1e-12 * max(1, ‖A‖_F).
    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && self.hermiticity_error() <= HERMITICITY_TOL * self.frobenius_norm().max(1.0)
    }

    /// (A + A†)/2, applied before every eigendecomposition to remove drift.
    pub fn hermitize(&self) -> CMat {
        debug_assert!(self.is_square());
        let mut m = CMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        m
    }

    /// Matrix product, ikj loop order.
    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for j in 0..other.cols {
                    orow[j] += a * brow[j];
                }
            }
        }
        out
    }

    /// A · v for a column vector.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &x)| a * x)
                    .sum::<C64>()
            })
            .collect()
    }

    /// Kronecker (tensor) product: entry ((i1,i2),(j1,j2)) = A[i1,j1]·B[i2,j2].
    pub fn tensor(&self, other: &CMat) -> CMat {
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        let mut out = CMat::zeros(ra * rb, ca * cb);
        for i1 in 0..ra {
            for j1 in 0..ca {
                let a = self[(i1, j1)];
                if a == ZERO {
                    continue;
                }
                for i2 in 0..rb {
                    for j2 in 0..cb {
                        out[(i1 * rb + i2, j1 * cb + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// Real part of Tr(A·B) without forming the product.
    pub fn trace_product_re(&self, other: &CMat) -> f64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = 0.0;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += (self[(i, k)] * other[(k, i)]).re;
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

/// Alias matching the domain vocabulary.
pub fn tensor_product(a: &CMat, b: &CMat) -> CMat {
    a.tensor(b)
}

/// Trace out the subsystems not listed in `keep`.
///
/// `dims` are the subsystem dimensions in tensor order (subsystem 0 is the
/// most significant index). `keep` is the set of subsystem indices retained,
/// in increasing order in the output.
pub fn partial_trace(a: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::InvalidShape("partial_trace needs a square matrix".into()));
    }
    let total: usize = dims.iter().product();
    if total != a.rows() {
        return Err(Error::InvalidShape(format!(
            "subsystem dims product {} does not match matrix dimension {}",
            total,
            a.rows()
        )));
    }
    let ns = dims.len();
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&k| k >= ns) {
        return Err(Error::InvalidShape("keep index out of range".into()));
    }
    let traced: Vec<usize> = (0..ns).filter(|k| !keep_sorted.contains(k)).collect();

    // stride of subsystem k in the flattened index
    let mut stride = vec![1usize; ns];
    for k in (0..ns.saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * dims[k + 1];
    }

    let kdim: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let tdim: usize = traced.iter().map(|&k| dims[k]).product();

    // flattened offset for a multi-index over the given subsystem list
    let offset = |subs: &[usize], multi: usize| -> usize {
        let mut rem = multi;
        let mut off = 0;
        for &k in subs.iter().rev() {
            off += (rem % dims[k]) * stride[k];
            rem /= dims[k];
        }
        off
    };

    let mut out = CMat::zeros(kdim.max(1), kdim.max(1));
    for ki in 0..kdim.max(1) {
        let ri = offset(&keep_sorted, ki);
        for kj in 0..kdim.max(1) {
            let rj = offset(&keep_sorted, kj);
            let mut acc = ZERO;
            for t in 0..tdim.max(1) {
                let rt = offset(&traced, t);
                acc += a[(ri + rt, rj + rt)];
            }
            out[(ki, kj)] = acc;
        }
    }
    Ok(out)
}

/// Thin Householder QR. Returns (Q, R) with Q of shape rows x cols
/// (assumes rows >= cols) satisfying Q†Q = I and A = Q R.
pub fn qr_thin(a: &CMat) -> (CMat, CMat) {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "qr_thin expects rows >= cols");
    let mut r = a.clone();
    // Householder vectors; v[k] has length m - k
    let mut vs: Vec<Vec<C64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let normx = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if normx == 0.0 {
            vs.push(vec![ZERO; m - k]);
            continue;
        }
        let alpha = v[0];
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { ONE };
        let beta = -phase * normx;
        v[0] -= beta;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv == 0.0 {
            vs.push(vec![ZERO; m - k]);
            continue;
        }
        let sigma = 2.0 / vv;
        // apply reflector to trailing columns of R
        for j in k..n {
            let mut dot = ZERO;
            for i in k..m {
                dot += v[i - k].conj() * r[(i, j)];
            }
            dot *= sigma;
            for i in k..m {
                let upd = v[i - k] * dot;
                r[(i, j)] -= upd;
            }
        }
        vs.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I
    let mut q = CMat::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = ONE;
    }
    for k in (0..n).rev() {
        let v = &vs[k];
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv == 0.0 {
            continue;
        }
        let sigma = 2.0 / vv;
        for j in 0..n {
            let mut dot = ZERO;
            for i in k..m {
                dot += v[i - k].conj() * q[(i, j)];
            }
            dot *= sigma;
            for i in k..m {
                let upd = v[i - k] * dot;
                q[(i, j)] -= upd;
            }
        }
    }
    // zero the sub-triangle of R explicitly
    let mut rr = CMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            rr[(i, j)] = r[(i, j)];
        }
    }
    (q, rr)
}

/// A positive semidefinite, unit-trace state with cached dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    dim: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace. PSD is checked only in debug
    /// builds (it costs an eigendecomposition).
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidShape("density matrix must be square".into()));
        }
        if !mat.is_hermitian() {
            return Err(Error::Domain("density matrix is not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::Domain(format!("density matrix trace {} != 1", tr.re)));
        }
        #[cfg(debug_assertions)]
        {
            if let Ok(vals) = eigvalsh(&mat) {
                if vals.first().copied().unwrap_or(0.0) < -1e-8 {
                    return Err(Error::Domain(format!(
                        "density matrix has negative eigenvalue {}",
                        vals[0]
                    )));
                }
            }
        }
        let dim = mat.rows();
        Ok(DensityMatrix { mat, dim })
    }

    /// Construction for matrices that are PSD/unit-trace by construction
    /// (channel outputs, samplers). Skips all checks.
    pub fn from_trusted(mat: CMat) -> Self {
        debug_assert!(mat.is_square());
        let dim = mat.rows();
        DensityMatrix { mat, dim }
    }

    /// |ψ⟩⟨ψ| from a normalized state vector.
    pub fn pure(psi: &[C64]) -> Self {
        DensityMatrix::from_trusted(CMat::outer(psi))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix::from_trusted(CMat::identity(d).scale_re(1.0 / d as f64))
    }

    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut v = vec![ZERO; d];
        v[k] = ONE;
        DensityMatrix::pure(&v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product_re(&self.mat)
    }

    /// Rank above the relative support cutoff.
    pub fn rank(&self) -> usize {
        match eigvalsh(&self.mat) {
            Ok(vals) => {
                let top = vals.iter().cloned().fold(0.0f64, f64::max);
                let cut = SUPPORT_CUTOFF * top.max(f64::MIN_POSITIVE);
                vals.iter().filter(|&&v| v > cut).count()
            }
            Err(_) => self.dim,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rng, random_hermitian};

    #[test]
    fn tensor_identities() {
        let i2 = CMat::identity(2);
        let i4 = CMat::identity(4);
        assert_eq!(i2.tensor(&i2), i4);

        // |0><0| ⊗ |1><1| has its single 1 at row/col index 1
        let p0 = CMat::diag_real(&[1.0, 0.0]);
        let p1 = CMat::diag_real(&[0.0, 1.0]);
        let t = p0.tensor(&p1);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i, j) == (1, 1) { 1.0 } else { 0.0 };
                assert!((t[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tensor_trace_multiplicative() {
        let mut r = rng(11);
        for _ in 0..20 {
            let a = random_hermitian(2, &mut r);
            let b = random_hermitian(2, &mut r);
            let lhs = a.tensor(&b).trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let mut r = rng(5);
        let a = random_hermitian(3, &mut r);
        // unit-trace sigma
        let s = random_hermitian(4, &mut r);
        let s = s.scale(ONE / s.trace());
        let t = a.tensor(&s);
        let back = partial_trace(&t, &[3, 4], &[0]).unwrap();
        assert!((&back - &a).frobenius_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_maximally_entangled() {
        let d = 4;
        let mut omega = vec![ZERO; d * d];
        for i in 0..d {
            omega[i * d + i] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let rho = CMat::outer(&omega);
        let marg = partial_trace(&rho, &[d, d], &[0]).unwrap();
        let target = CMat::identity(d).scale_re(1.0 / d as f64);
        assert!((&marg - &target).frobenius_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut r = rng(7);
        let a = random_hermitian(16, &mut r);
        let red = partial_trace(&a, &[2, 2, 2, 2], &[0, 2]).unwrap();
        assert_eq!(red.rows(), 4);
        assert!((red.trace() - a.trace()).norm() <= 1e-12 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn partial_trace_composes() {
        let mut r = rng(13);
        let a = random_hermitian(16, &mut r);
        // trace out {1} then {3} == trace out {1,3} at once
        let step1 = partial_trace(&a, &[2, 2, 2, 2], &[0, 2, 3]).unwrap();
        let step2 = partial_trace(&step1, &[2, 2, 2], &[0, 1]).unwrap();
        let direct = partial_trace(&a, &[2, 2, 2, 2], &[0, 2]).unwrap();
        assert!((&step2 - &direct).frobenius_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_shape_error() {
        let a = CMat::identity(6);
        assert!(partial_trace(&a, &[2, 2], &[0]).is_err());
    }

    #[test]
    fn qr_reconstructs_and_is_unitary() {
        let mut r = rng(3);
        for &n in &[1usize, 2, 5, 16] {
            let a = crate::testutil::random_ginibre(n, n, &mut r);
            let (q, rr) = qr_thin(&a);
            let qr = q.matmul(&rr);
            assert!((&qr - &a).frobenius_norm() < 1e-10 * a.frobenius_norm().max(1.0));
            let qdq = q.adjoint().matmul(&q);
            assert!((&qdq - &CMat::identity(n)).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn hermiticity_check() {
        let mut a = CMat::identity(3);
        assert!(a.is_hermitian());
        a[(0, 1)] = C64::new(0.0, 1.0);
        assert!(!a.is_hermitian());
        a[(1, 0)] = C64::new(0.0, -1.0);
        assert!(a.is_hermitian());
    }
}
