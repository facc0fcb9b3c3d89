//! Dense Hermitian matrices, signals, eigendecomposition and the tangent space
//! of the rank-1 manifold.
//!
//! Norm names are explicit: [`Norms::nuclear`] (sum of singular values),
//! [`Norms::frobenius`] and [`Norms::operator`] (largest singular value). Vector
//! norms are always Euclidean.

use std::ops::{Add, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::scalar::{Field, Scalar};
use crate::tolerance::TOL;

/// A finite vector of length `n ≥ 1` over a fixed field.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T: Scalar> {
    entries: DVector<T>,
}

impl<T: Scalar> Signal<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(entries))
    }

    pub fn from_dvector(entries: DVector<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("signal must have length ≥ 1".into()));
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("signal has non-finite entries".into()));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "signal length must be ≥ 1");
        Self {
            entries: DVector::zeros(n),
        }
    }

    /// The k-th standard basis vector of length n.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut s = Self::zeros(n);
        s.entries[k] = T::one();
        s
    }

    pub fn field(&self) -> Field {
        T::FIELD
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[T] {
        self.entries.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|v| v.modulus_squared()).sum()
    }

    /// `⟨self, other⟩ = Σ_t conj(self_t) · other_t`.
    pub fn inner(&self, other: &Signal<T>) -> Result<T> {
        check_dim(self.len(), other.len())?;
        Ok(self.entries.dotc(&other.entries))
    }

    pub fn scaled(&self, c: T) -> Signal<T> {
        Signal {
            entries: &self.entries * c,
        }
    }

    pub fn scaled_real(&self, c: f64) -> Signal<T> {
        self.scaled(T::from_real(c))
    }

    pub fn normalized(&self) -> Result<Signal<T>> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("cannot normalize a zero signal".into()));
        }
        Ok(self.scaled_real(1.0 / norm))
    }

    /// The lifted rank-1 matrix `x x*`.
    pub fn outer(&self) -> HermitianMatrix<T> {
        HermitianMatrix::from_raw(&self.entries * self.entries.adjoint())
    }
}

/// An n×n Hermitian (symmetric when real) matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Scalar> {
    entries: DMatrix<T>,
}

impl<T: Scalar> HermitianMatrix<T> {
    /// Validates shape and finiteness, then symmetrizes as `(A + A*)/2`.
    pub fn new(entries: DMatrix<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidInput(format!(
                "matrix must be square, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::InvalidInput("matrix must be at least 1×1".into()));
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self::from_raw(entries))
    }

    pub fn from_rows(n: usize, rows: &[T]) -> Result<Self> {
        check_dim(n * n, rows.len())?;
        Self::new(DMatrix::from_row_slice(n, n, rows))
    }

    /// Symmetrizes without validation; for internal arithmetic on valid inputs.
    pub(crate) fn from_raw(mut entries: DMatrix<T>) -> Self {
        let n = entries.nrows();
        let half = T::from_real(0.5);
        for i in 0..n {
            entries[(i, i)] = T::from_real(entries[(i, i)].real());
            for j in (i + 1)..n {
                let v = (entries[(i, j)] + entries[(j, i)].conjugate()) * half;
                entries[(i, j)] = v;
                entries[(j, i)] = v.conjugate();
            }
        }
        Self { entries }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&v| T::from_real(v)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn field(&self) -> Field {
        T::FIELD
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.entries[(i, i)].real()).sum()
    }

    /// Trace inner product `Re Tr(A* B)`; exact for Hermitian arguments.
    pub fn inner(&self, other: &HermitianMatrix<T>) -> Result<f64> {
        check_dim(self.n(), other.n())?;
        Ok(self.entries.dotc(&other.entries).real())
    }

    /// Frobenius norm from the entries, without an eigendecomposition.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|v| v.modulus_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, c: f64) -> HermitianMatrix<T> {
        Self {
            entries: &self.entries * T::from_real(c),
        }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &HermitianMatrix<T>, c: f64) -> Result<HermitianMatrix<T>> {
        check_dim(self.n(), other.n())?;
        Ok(Self {
            entries: &self.entries + &other.entries * T::from_real(c),
        })
    }

    pub fn matvec(&self, x: &Signal<T>) -> Result<Signal<T>> {
        check_dim(self.n(), x.len())?;
        Ok(Signal {
            entries: &self.entries * x.as_vector(),
        })
    }

    /// `x* A x`, which is real for Hermitian `A`.
    pub fn quadratic_form(&self, x: &Signal<T>) -> Result<f64> {
        let ax = self.matvec(x)?;
        Ok(x.inner(&ax)?.real())
    }

    pub fn eig(&self) -> Result<EigenDecomposition<T>> {
        EigenDecomposition::of(self)
    }

    pub fn norms(&self) -> Result<Norms> {
        let eig = self.eig()?;
        Ok(Norms::from_spectrum(eig.eigenvalues()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = self.entries[(i, j)] - self.entries[(j, i)].conjugate();
                worst = worst.max(d.modulus());
            }
        }
        worst
    }
}

impl<T: Scalar> Add for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn add(self, rhs: Self) -> HermitianMatrix<T> {
        assert_eq!(self.n(), rhs.n(), "dimension mismatch in matrix sum");
        HermitianMatrix {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl<T: Scalar> Sub for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn sub(self, rhs: Self) -> HermitianMatrix<T> {
        assert_eq!(self.n(), rhs.n(), "dimension mismatch in matrix difference");
        HermitianMatrix {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl<T: Scalar> Neg for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn neg(self) -> HermitianMatrix<T> {
        HermitianMatrix {
            entries: -&self.entries,
        }
    }
}

/// Eigenpairs of a Hermitian matrix, sorted by descending eigenvalue.
///
/// Each eigenvector is rotated so that its first component of modulus above
/// `1e-10` is real and positive, which makes the decomposition deterministic.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Scalar> {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn of(a: &HermitianMatrix<T>) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidInput(
                "cannot eigendecompose a matrix with non-finite entries".into(),
            ));
        }
        let n = a.n();
        let SymmetricEigen {
            eigenvectors,
            eigenvalues,
        } = SymmetricEigen::new(a.entries.clone());

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]));

        let mut vectors = DMatrix::<T>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eigenvectors.column(src).into_owned();
            if let Some(lead) = col.iter().find(|v| v.modulus() > 1e-10).copied() {
                let phase = lead.conjugate() * T::from_real(1.0 / lead.modulus());
                col *= phase;
            }
            vectors.set_column(dst, &col);
        }
        Ok(Self {
            eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
            vectors,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column matrix of eigenvectors, ordered like [`Self::eigenvalues`].
    pub fn vectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    pub fn eigenvector(&self, k: usize) -> Signal<T> {
        Signal {
            entries: self.vectors.column(k).into_owned(),
        }
    }

    /// `Σ_k g(λ_k) u_k u_k*`; terms where `g` returns exactly zero are skipped.
    pub fn map_spectrum(&self, g: impl Fn(f64) -> f64) -> HermitianMatrix<T> {
        let n = self.n();
        let kept: Vec<(usize, f64)> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| (k, g(l)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        if kept.is_empty() {
            return HermitianMatrix::zeros(n);
        }
        let mut u = DMatrix::<T>::zeros(n, kept.len());
        let mut w = DMatrix::<T>::zeros(n, kept.len());
        for (c, &(k, v)) in kept.iter().enumerate() {
            let col = self.vectors.column(k);
            u.set_column(c, &col);
            w.set_column(c, &(col * T::from_real(v)));
        }
        HermitianMatrix::from_raw(&w * u.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        self.map_spectrum(|l| l)
    }
}

/// Nuclear, Frobenius and operator norms of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub nuclear: f64,
    pub frobenius: f64,
    pub operator: f64,
}

impl Norms {
    pub fn from_spectrum(eigenvalues: &[f64]) -> Self {
        Self {
            nuclear: eigenvalues.iter().map(|l| l.abs()).sum(),
            frobenius: eigenvalues.iter().map(|l| l * l).sum::<f64>().sqrt(),
            operator: eigenvalues.iter().fold(0.0, |acc, l| acc.max(l.abs())),
        }
    }
}

/// The tangent space `T_x = {x y* + y x*}` at `x x*` for a unit-norm anchor `x`.
#[derive(Debug, Clone)]
pub struct TangentSpace<T: Scalar> {
    anchor: Signal<T>,
}

impl<T: Scalar> TangentSpace<T> {
    pub fn new(anchor: Signal<T>) -> Result<Self> {
        let norm = anchor.norm();
        if (norm - 1.0).abs() > TOL.unit_norm {
            return Err(Error::NonUnitVector(norm));
        }
        Ok(Self { anchor })
    }

    pub fn anchor(&self) -> &Signal<T> {
        &self.anchor
    }

    /// `P_T(H) = xx*H + Hxx* − xx*Hxx*`.
    pub fn project(&self, h: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        check_dim(self.anchor.len(), h.n())?;
        let x = self.anchor.as_vector();
        let hx = h.as_matrix() * x;
        let alpha = x.dotc(&hx).real();
        let cross = x * hx.adjoint();
        let mut out = &cross + cross.adjoint();
        out -= x * x.adjoint() * T::from_real(alpha);
        Ok(HermitianMatrix::from_raw(out))
    }

    pub fn project_perp(&self, h: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        let pt = self.project(h)?;
        Ok(h - &pt)
    }
}
