//! Small dense complex matrices and the monomial fast path.
//!
//! Every exchange matrix in this crate is tiny (`r^2 x r^2` with `r <= 8`),
//! so a hand-rolled row-major matrix is enough. Family-constructed kernels
//! are *monomial*: each column holds exactly one nonzero of modulus one.
//! [`QMatrix`] keeps that structure explicit because it turns the hot tensor
//! exchanges from `O(r^2)` per entry into `O(1)` per entry.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major `n x n` complex matrix. `M * e_col = sum_row M[row,col] e_row`.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "ragged matrix rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix { n: self.n, data }
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix { n: self.n, data }
    }

    /// Entrywise sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|` together with the entry index attaining it.
    pub fn sup_distance(&self, other: &CMatrix) -> (f64, (usize, usize)) {
        let n = self.n;
        let mut best = (0.0_f64, (0, 0));
        for i in 0..n {
            for j in 0..n {
                let d = (self[(i, j)] - other[(i, j)]).norm();
                if d > best.0 {
                    best = (d, (i, j));
                }
            }
        }
        best
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        let n = self.n;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.sub(&self.adjoint()).sup_norm()
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Option<CMatrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let mut piv = col;
            let mut best = a[(col, col)].norm();
            for row in col + 1..n {
                let v = a[(row, col)].norm();
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if best < 1e-300 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(col * n + j, piv * n + j);
                    inv.data.swap(col * n + j, piv * n + j);
                }
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[(row, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let ac = a[(col, j)];
                    let ic = inv[(col, j)];
                    a[(row, j)] -= f * ac;
                    inv[(row, j)] -= f * ic;
                }
            }
        }
        Some(inv)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Exchange matrix with an explicit monomial fast path.
///
/// `Monomial` means `M e_c = phase[c] * e_{fwd[c]}` with `fwd` a permutation.
#[derive(Clone, Debug)]
pub enum QMatrix {
    Monomial {
        dim: usize,
        /// column -> row of its single nonzero
        fwd: Vec<usize>,
        /// row -> column (inverse permutation)
        inv: Vec<usize>,
        /// phase by column
        phase: Vec<C64>,
    },
    Dense(CMatrix),
}

impl QMatrix {
    pub fn dim(&self) -> usize {
        match self {
            QMatrix::Monomial { dim, .. } => *dim,
            QMatrix::Dense(m) => m.n,
        }
    }

    pub fn monomial(fwd: Vec<usize>, phase: Vec<C64>) -> Self {
        let dim = fwd.len();
        assert_eq!(phase.len(), dim);
        let mut inv = vec![usize::MAX; dim];
        for (c, &r) in fwd.iter().enumerate() {
            assert!(
                inv[r] == usize::MAX,
                "monomial column map is not a permutation"
            );
            inv[r] = c;
        }
        QMatrix::Monomial {
            dim,
            fwd,
            inv,
            phase,
        }
    }

    /// Detect monomial structure (exactly one nonzero per column, and the
    /// nonzero rows form a permutation); fall back to dense otherwise.
    pub fn from_dense(m: CMatrix) -> Self {
        let n = m.n;
        let mut fwd = vec![usize::MAX; n];
        let mut phase = vec![ZERO; n];
        for c in 0..n {
            let mut nnz = 0;
            for r in 0..n {
                if m[(r, c)] != ZERO {
                    nnz += 1;
                    fwd[c] = r;
                    phase[c] = m[(r, c)];
                }
            }
            if nnz != 1 {
                return QMatrix::Dense(m);
            }
        }
        let mut seen = vec![false; n];
        for &r in &fwd {
            if seen[r] {
                return QMatrix::Dense(m);
            }
            seen[r] = true;
        }
        Self::monomial(fwd, phase)
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            QMatrix::Dense(m) => m.clone(),
            QMatrix::Monomial {
                dim, fwd, phase, ..
            } => {
                let mut m = CMatrix::zeros(*dim);
                for c in 0..*dim {
                    m[(fwd[c], c)] = phase[c];
                }
                m
            }
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        match self {
            QMatrix::Dense(m) => m[(row, col)],
            QMatrix::Monomial { fwd, phase, .. } => {
                if fwd[col] == row {
                    phase[col]
                } else {
                    ZERO
                }
            }
        }
    }

    pub fn inverse(&self) -> Result<QMatrix> {
        match self {
            QMatrix::Monomial {
                dim,
                fwd,
                inv,
                phase,
            } => {
                let mut iphase = vec![ZERO; *dim];
                for c in 0..*dim {
                    if phase[c].norm() < 1e-300 {
                        return Err(Error::Singular(0.0, 0.0));
                    }
                    iphase[fwd[c]] = ONE / phase[c];
                }
                Ok(QMatrix::monomial(inv.clone(), iphase))
            }
            QMatrix::Dense(m) => m
                .inverse()
                .map(QMatrix::from_dense)
                .ok_or(Error::Singular(0.0, 0.0)),
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by the cyclic complex Jacobi
/// method. Returns `(eigenvalues, eigenvectors)` with eigenvectors as the
/// columns of the returned matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let herm = m.hermitian_residual();
    if herm > 1e-10 * (1.0 + m.sup_norm()) {
        return Err(Error::NotHermitian(herm));
    }
    let n = m.n;
    // Work on the Hermitian average so tiny asymmetries cannot bias sweeps.
    let mut a = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
    let mut v = CMatrix::identity(n);

    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off < 1e-15 * (1.0 + a.sup_norm()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Unitary 2x2 rotation diagonalizing the (p,q) block:
                // columns (c, -s*e^{i b}; s*e^{-i b}, c) with b = arg(apq).
                let beta = apq.arg();
                let absb = apq.norm();
                let theta = 0.5 * (2.0 * absb).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                let eib = C64::from_polar(1.0, beta);
                // Column rotation on a and v, row rotation (adjoint) on a.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * s * eib.conj();
                    a[(i, q)] = -aip * s * eib + aiq * c;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * s * eib.conj();
                    v[(i, q)] = -vip * s * eib + viq * c;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * s * eib;
                    a[(q, j)] = -apj * s * eib.conj() + aqj * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| eigs[i].partial_cmp(&eigs[j]).unwrap());
    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMatrix::zeros(n);
    for (newc, &oldc) in order.iter().enumerate() {
        vals.push(eigs[oldc]);
        for r in 0..n {
            vecs[(r, newc)] = v[(r, oldc)];
        }
    }
    Ok((vals, vecs))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues in `[-1e-12, 0)` are clamped to zero; anything lower is an error.
pub fn hermitian_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let scale = vals.iter().fold(0.0_f64, |a, &b| a.max(b.abs())).max(1.0);
    let mut out = CMatrix::zeros(m.n);
    for k in 0..m.n {
        let lam = vals[k];
        if lam < -1e-12 * scale {
            return Err(Error::EigenvalueOutOfRange {
                value: lam,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let root = lam.max(0.0).sqrt();
        for i in 0..m.n {
            for j in 0..m.n {
                out[(i, j)] += vecs[(i, k)] * vecs[(j, k)].conj() * root;
            }
        }
    }
    Ok(out)
}

/// Entrywise complex conjugate (the coordinate conjugation `J M J`).
pub fn conjugate_entrywise(m: &CMatrix) -> CMatrix {
    CMatrix {
        n: m.n,
        data: m.data.iter().map(|v| v.conj()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inverse_roundtrip() {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 0.5), c(0.3, -0.2)],
            vec![c(0.0, 1.0), c(2.0, 0.0)],
        ]);
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        assert!(prod.sub(&CMatrix::identity(2)).sup_norm() < 1e-12);
    }

    #[test]
    fn eigen_diagonal() {
        let m = CMatrix::from_rows(&[vec![c(4.0, 0.0), ZERO], vec![ZERO, c(9.0, 0.0)]]);
        let (vals, _) = hermitian_eigen(&m).unwrap();
        assert!((vals[0] - 4.0).abs() < 1e-12);
        assert!((vals[1] - 9.0).abs() < 1e-12);
        let root = hermitian_sqrt(&m).unwrap();
        assert!((root[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((root[(1, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_multiplies_back() {
        // Fixed Hermitian PSD matrix: B* B for a fixed B.
        let b = CMatrix::from_rows(&[
            vec![c(0.7, 0.1), c(-0.3, 0.4), c(0.2, 0.0)],
            vec![c(0.0, 0.9), c(0.5, -0.5), c(0.1, 0.3)],
            vec![c(0.4, -0.2), c(0.6, 0.1), c(-0.8, 0.2)],
        ]);
        let psd = b.adjoint().mul(&b);
        let root = hermitian_sqrt(&psd).unwrap();
        assert!(root.hermitian_residual() < 1e-10);
        assert!(root.mul(&root).sub(&psd).sup_norm() < 1e-10);
    }

    #[test]
    fn monomial_detection_and_inverse() {
        let mut m = CMatrix::zeros(4);
        m[(2, 0)] = c(0.0, 1.0);
        m[(0, 1)] = c(-1.0, 0.0);
        m[(3, 2)] = c(0.6, 0.8);
        m[(1, 3)] = ONE;
        let q = QMatrix::from_dense(m.clone());
        assert!(matches!(q, QMatrix::Monomial { .. }));
        let qi = q.inverse().unwrap();
        let prod = q.to_dense().mul(&qi.to_dense());
        assert!(prod.sub(&CMatrix::identity(4)).sup_norm() < 1e-12);
    }
}
