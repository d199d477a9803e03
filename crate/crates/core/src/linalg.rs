//! Fixed-size dense complex matrices.
//!
//! Everything in this crate lives in dimension 2 (one qubit) or 4 (a qubit
//! pair), with the single exception of the 16×16 Gram matrix used to check
//! informational completeness. Matrices are stack arrays indexed by a const
//! dimension so that products and Kronecker products are checked at compile
//! time.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance of the Hermiticity test.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Relative tolerance of an eigendecomposition reconstruction.
pub const EIGEN_RECONSTRUCTION_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A ket of dimension `D`.
pub type Ket<const D: usize> = [C64; D];

/// Dense `D`×`D` complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix<const D: usize>(pub [[C64; D]; D]);

pub type Matrix2 = Matrix<2>;
pub type Matrix4 = Matrix<4>;

impl<const D: usize> Default for Matrix<D> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const D: usize> Matrix<D> {
    pub const DIM: usize = D;

    pub fn zeros() -> Self {
        Matrix([[ZERO; D]; D])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..D {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn from_rows(rows: [[C64; D]; D]) -> Self {
        Matrix(rows)
    }

    pub fn from_real_rows(rows: [[f64; D]; D]) -> Self {
        let mut m = Self::zeros();
        for i in 0..D {
            for j in 0..D {
                m.0[i][j] = c(rows[i][j], 0.0);
            }
        }
        m
    }

    pub fn diag(values: [f64; D]) -> Self {
        let mut m = Self::zeros();
        for k in 0..D {
            m.0[k][k] = c(values[k], 0.0);
        }
        m
    }

    /// `|ket⟩⟨bra|`
    pub fn outer(ket: &Ket<D>, bra: &Ket<D>) -> Self {
        let mut m = Self::zeros();
        for i in 0..D {
            for j in 0..D {
                m.0[i][j] = ket[i] * bra[j].conj();
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..D {
            for j in 0..D {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..D).map(|k| self.0[k][k]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `sqrt(Σ|A_ij|²)`, a lower bound on the trace norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |A[i][j] − conj(A[j][i])|`
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..D {
            for j in i..D {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn apply(&self, ket: &Ket<D>) -> Ket<D> {
        let mut out = [ZERO; D];
        for i in 0..D {
            out[i] = (0..D).map(|j| self.0[i][j] * ket[j]).sum();
        }
        out
    }

    /// `self^k` for `k ≥ 0`.
    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(), |acc, _| acc * *self)
    }

    /// `⟨bra|self|ket⟩`
    pub fn sandwich(&self, bra: &Ket<D>, ket: &Ket<D>) -> C64 {
        let v = self.apply(ket);
        bra.iter().zip(v.iter()).map(|(b, x)| b.conj() * x).sum()
    }

    pub fn sub_identity(&self, s: f64) -> Self {
        let mut m = *self;
        for k in 0..D {
            m.0[k][k] -= s;
        }
        m
    }

    /// Maximum entrywise distance.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }
}

/// `tr(AB)` without forming the product.
pub fn trace_of_product<const D: usize>(a: &Matrix<D>, b: &Matrix<D>) -> C64 {
    let mut acc = ZERO;
    for i in 0..D {
        for k in 0..D {
            acc += a.0[i][k] * b.0[k][i];
        }
    }
    acc
}

/// Kronecker product of two single-qubit operators, `(a⊗b)[2i+k][2j+l] = a[i][j]·b[k][l]`.
pub fn kron(a: &Matrix2, b: &Matrix2) -> Matrix4 {
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    m
}

/// Kronecker product of two single-qubit kets.
pub fn kron_ket(a: &Ket<2>, b: &Ket<2>) -> Ket<4> {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

impl<const D: usize> Index<(usize, usize)> for Matrix<D> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const D: usize> IndexMut<(usize, usize)> for Matrix<D> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const D: usize> Add for Matrix<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const D: usize> AddAssign for Matrix<D> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..D {
            for j in 0..D {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl<const D: usize> Sub for Matrix<D> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const D: usize> SubAssign for Matrix<D> {
    fn sub_assign(&mut self, rhs: Self) {
        for i in 0..D {
            for j in 0..D {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
    }
}

impl<const D: usize> Neg for Matrix<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const D: usize> Mul for Matrix<D> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..D {
            for k in 0..D {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..D {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl<const D: usize> Mul<f64> for Matrix<D> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<const D: usize> Mul<C64> for Matrix<D> {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        self.scale_complex(rhs)
    }
}

/// A Hermitian matrix. Construction checks the Hermiticity invariant and then
/// symmetrizes, so downstream code sees an exactly Hermitian array.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hermitian<const D: usize>(Matrix<D>);

impl<const D: usize> Hermitian<D> {
    pub fn new(m: Matrix<D>) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let asymmetry = m.hermitian_asymmetry();
        if asymmetry > HERMITICITY_TOL * (1.0 + m.max_abs()) {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::symmetrized(m))
    }

    /// `(m + m†)/2`, no check.
    pub(crate) fn symmetrized(m: Matrix<D>) -> Self {
        Hermitian((m + m.adjoint()).scale(0.5))
    }

    pub fn identity() -> Self {
        Hermitian(Matrix::identity())
    }

    pub fn zeros() -> Self {
        Hermitian(Matrix::zeros())
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(ket: &Ket<D>) -> Self {
        Self::symmetrized(Matrix::outer(ket, ket))
    }

    pub fn matrix(&self) -> &Matrix<D> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<D> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eig(&self) -> EigenSystem<D> {
        jacobi_eigen(&self.0)
    }

    pub fn eigenvalues(&self) -> [f64; D] {
        self.eig().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[D - 1]
    }

    /// `Σ|λ|`, from the eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    /// `tr(AB)` for Hermitian operands, which is real.
    pub fn trace_with(&self, other: &Self) -> f64 {
        trace_of_product(&self.0, &other.0).re
    }

    pub fn scale(&self, s: f64) -> Self {
        Hermitian(self.0.scale(s))
    }

    /// `U A U†`
    pub fn conjugate_by(&self, u: &Matrix<D>) -> Self {
        Self::symmetrized(*u * self.0 * u.adjoint())
    }
}

impl<const D: usize> Add for Hermitian<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Hermitian(self.0 + rhs.0)
    }
}

impl<const D: usize> Sub for Hermitian<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Hermitian(self.0 - rhs.0)
    }
}

impl<const D: usize> AsRef<Matrix<D>> for Hermitian<D> {
    fn as_ref(&self) -> &Matrix<D> {
        &self.0
    }
}

/// Eigenvalues in descending order with orthonormal eigenvectors as the
/// columns of `vectors`.
#[derive(Clone, Copy, Debug)]
pub struct EigenSystem<const D: usize> {
    pub values: [f64; D],
    pub vectors: Matrix<D>,
}

impl<const D: usize> EigenSystem<D> {
    /// `V diag(λ) V†`
    pub fn reconstruct(&self) -> Matrix<D> {
        let mut m = Matrix::zeros();
        for k in 0..D {
            let v = self.vector(k);
            m += Matrix::outer(&v, &v).scale(self.values[k]);
        }
        m
    }

    /// The `k`-th eigenvector.
    pub fn vector(&self, k: usize) -> Ket<D> {
        let mut v = [ZERO; D];
        for i in 0..D {
            v[i] = self.vectors.0[i][k];
        }
        v
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix. Only the Hermitian
/// part of the input is used.
fn jacobi_eigen<const D: usize>(m: &Matrix<D>) -> EigenSystem<D> {
    let mut a = *m;
    let mut v = Matrix::<D>::identity();

    let scale: f64 = a.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
    let target = (f64::EPSILON * f64::EPSILON) * scale * 1e-4;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..D {
            for q in (p + 1)..D {
                off += a.0[p][q].norm_sqr();
            }
        }
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..D {
            for q in (p + 1)..D {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: [usize; D] = std::array::from_fn(|k| k);
    let diag: [f64; D] = std::array::from_fn(|k| a.0[k][k].re);
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let values = std::array::from_fn(|k| diag[order[k]]);
    let mut vectors = Matrix::<D>::zeros();
    for (col, &src) in order.iter().enumerate() {
        for row in 0..D {
            vectors.0[row][col] = v.0[row][src];
        }
    }
    EigenSystem { values, vectors }
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate<const D: usize>(a: &mut Matrix<D>, v: &mut Matrix<D>, p: usize, q: usize) {
    let apq = a.0[p][q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a.0[p][p].re;
    let aqq = a.0[q][q].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 { 1.0 / (tau + tau.hypot(1.0)) } else { -1.0 / (-tau + tau.hypot(1.0)) };
    let cs = 1.0 / t.hypot(1.0);
    let sn = t * cs;
    let phase_bar = phase.conj();

    // J: J_pp = c, J_pq = s, J_qp = -s·ū, J_qq = c·ū
    for k in 0..D {
        let akp = a.0[k][p];
        let akq = a.0[k][q];
        a.0[k][p] = akp * cs - akq * (phase_bar * sn);
        a.0[k][q] = akp * sn + akq * (phase_bar * cs);
    }
    for k in 0..D {
        let apk = a.0[p][k];
        let aqk = a.0[q][k];
        a.0[p][k] = apk * cs - aqk * (phase * sn);
        a.0[q][k] = apk * sn + aqk * (phase * cs);
    }
    a.0[p][q] = ZERO;
    a.0[q][p] = ZERO;
    a.0[p][p] = c(a.0[p][p].re, 0.0);
    a.0[q][q] = c(a.0[q][q].re, 0.0);

    for k in 0..D {
        let vkp = v.0[k][p];
        let vkq = v.0[k][q];
        v.0[k][p] = vkp * cs - vkq * (phase_bar * sn);
        v.0[k][q] = vkp * sn + vkq * (phase_bar * cs);
    }
}

/// Singular values in descending order, as square roots of the eigenvalues
/// of `a†a`.
pub fn singular_values<const D: usize>(a: &Matrix<D>) -> [f64; D] {
    let gram = Hermitian::symmetrized(a.adjoint() * *a);
    gram.eigenvalues().map(|l| l.max(0.0).sqrt())
}

/// Sum of singular values.
pub fn trace_norm<const D: usize>(a: &Matrix<D>) -> f64 {
    singular_values(a).iter().sum()
}

/// Smallest eigenvalue of a Hermitian matrix given as a plain matrix.
pub fn min_eigenvalue<const D: usize>(a: &Matrix<D>) -> Result<f64> {
    Ok(Hermitian::new(*a)?.min_eigenvalue())
}
