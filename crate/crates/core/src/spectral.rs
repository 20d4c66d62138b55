//! Reduction of a matrix quadratic form to diagonal form.
//!
//! `zᵀAz = ½zᵀ(A + Aᵀ)z`, so only the symmetric part of `A` matters. Writing
//! that part as `U·diag(s)·Uᵀ` and rotating `z' = Uᵀz` (still standard normal)
//! gives `T = Σ sₖ z'ₖ² + b'ₖ z'ₖ` with `b' = Uᵀb`. The rotation preserves
//! `Σsₖ = tr(A)`, `Σsₖ² = ¼‖A + Aᵀ‖²_F` and `‖b'‖ = ‖b‖`.
//!
//! The matrix norm is Frobenius throughout; it is the only norm for which the
//! eigenvalue identity above holds.

use crate::bounds::DiagonalForm;
use crate::error::{validation, Error, Result};

/// Relative off-diagonal Frobenius mass at which Jacobi sweeps stop.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
/// Maximum number of cyclic sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a `dim × dim` matrix from row-major data.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(validation("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(validation(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(validation(format!(
                "matrix must be square: row {i} has {} entries, expected {dim}",
                row.len()
            )));
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let lhs = self[(i, k)];
                if lhs == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += lhs * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// `M·v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
            .collect()
    }

    /// `Mᵀ·v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (row, &x) in self.data.chunks(self.dim).zip(v) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += m * x;
            }
        }
        out
    }

    /// `vᵀMv`.
    pub fn quadratic(&self, v: &[f64]) -> f64 {
        self.data
            .chunks(self.dim)
            .zip(v)
            .map(|(row, &vi)| vi * row.iter().zip(v).map(|(m, x)| m * x).sum::<f64>())
            .sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// `T = zᵀAz + bᵀz` for a standard Gaussian `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: Matrix,
    b: Vec<f64>,
}

impl QuadraticForm {
    pub fn new(matrix: Matrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != matrix.dim() {
            return Err(validation(format!(
                "b has length {} but the matrix is {}x{}",
                b.len(),
                matrix.dim(),
                matrix.dim()
            )));
        }
        if !matrix.is_finite() {
            return Err(validation("matrix contains non-finite entries"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(validation("b contains non-finite entries"));
        }
        Ok(Self { matrix, b })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Realisation of `T` at a given `z`.
    pub fn evaluate(&self, z: &[f64]) -> f64 {
        self.matrix.quadratic(z) + self.b.iter().zip(z).map(|(b, z)| b * z).sum::<f64>()
    }
}

/// Eigen-decomposition of the symmetric part of `A` together with the rotated
/// linear coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReduction {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub basis: Matrix,
    /// `Uᵀb`.
    pub rotated_b: Vec<f64>,
}

impl SpectralReduction {
    /// The distribution-equivalent diagonal form `(s, b')`.
    pub fn diagonal_form(&self) -> DiagonalForm {
        DiagonalForm::new(self.eigenvalues.clone(), self.rotated_b.clone())
            .expect("eigenvalues and rotated b share the form dimension")
    }

    /// Deviations from the identities the reduction must preserve.
    pub fn residuals(&self, form: &QuadraticForm) -> ReductionResiduals {
        let sym = symmetrize(form);
        let n = self.eigenvalues.len();

        let trace = self.eigenvalues.iter().sum::<f64>() - form.matrix().trace();
        let sum_sq = self.eigenvalues.iter().map(|s| s * s).sum::<f64>() - sym.frobenius_sq();
        let b_norm = norm(&self.rotated_b) - norm(form.b());

        let gram = self.basis.transpose().matmul(&self.basis);
        let orthogonality = gram.max_abs_diff(&Matrix::identity(n));

        let rebuilt = self
            .basis
            .matmul(&Matrix::from_diagonal(&self.eigenvalues))
            .matmul(&self.basis.transpose());
        let reconstruction = rebuilt.max_abs_diff(&sym);

        ReductionResiduals {
            trace,
            sum_sq,
            b_norm,
            orthogonality,
            reconstruction,
            sym_frobenius: sym.frobenius(),
        }
    }
}

/// Signed differences reported by [`SpectralReduction::residuals`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionResiduals {
    /// `Σsₖ − tr(A)`.
    pub trace: f64,
    /// `Σsₖ² − ¼‖A + Aᵀ‖²_F`.
    pub sum_sq: f64,
    /// `‖b'‖ − ‖b‖`.
    pub b_norm: f64,
    /// `max |UᵀU − I|`.
    pub orthogonality: f64,
    /// `max |U·diag(s)·Uᵀ − S|`.
    pub reconstruction: f64,
    /// `‖S‖_F`, the scale for the reconstruction tolerance.
    pub sym_frobenius: f64,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `S = (A + Aᵀ)/2`, exactly symmetric.
pub fn symmetrize(form: &QuadraticForm) -> Matrix {
    symmetric_part(form.matrix())
}

pub(crate) fn symmetric_part(a: &Matrix) -> Matrix {
    let n = a.dim();
    let mut s = Matrix::zeros(n);
    for i in 0..n {
        s[(i, i)] = a[(i, i)];
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

fn off_diagonal_sq(m: &Matrix) -> f64 {
    let n = m.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..i {
            acc += 2.0 * m[(i, j)] * m[(i, j)];
        }
    }
    acc
}

/// Eigenvalues (descending) and orthonormal eigenvectors (columns) of a
/// symmetric matrix, by cyclic Jacobi rotations.
pub fn eigen_sym(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !s.is_finite() {
        return Err(validation("matrix contains non-finite entries"));
    }
    if !s.is_symmetric() {
        return Err(validation("eigen_sym requires a symmetric matrix"));
    }
    let n = s.dim();
    let mut a = s.clone();
    let mut v = Matrix::identity(n);
    let target = JACOBI_TOLERANCE * s.frobenius();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_sq(&a).sqrt();
        if off <= target {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep Jacobi order
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut basis = Matrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            basis[(row, col)] = v[(row, src)];
        }
    }
    Ok((eigenvalues, basis))
}

/// Annihilates `a[p][q]` with a plane rotation and accumulates it into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.dim();
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp - s * (vrq + tau * vrp);
        v[(r, q)] = vrq + s * (vrp - tau * vrq);
    }
}

/// Symmetrise, diagonalise and rotate `b`.
pub fn reduce(form: &QuadraticForm) -> Result<SpectralReduction> {
    let sym = symmetrize(form);
    let (eigenvalues, basis) = eigen_sym(&sym)?;
    let rotated_b = basis.tr_mul_vec(form.b());
    Ok(SpectralReduction {
        eigenvalues,
        basis,
        rotated_b,
    })
}
