//! Real and complex scalar fields.
//!
//! Every matrix and vector type in the crate is generic over [`Scalar`], which is
//! implemented for `f64` (the real model) and `Complex64` (the complex model).
//! The real field is never stored as complex with zero imaginary parts.

use std::fmt;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Runtime tag of the scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(crate::Error::Parse(format!("unknown field `{other}`"))),
        }
    }
}

/// Scalar type of a signal, sensing vector or Hermitian matrix entry.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Send + Sync + fmt::Debug + fmt::Display + 'static
{
    const FIELD: Field;

    /// Real-arithmetic view of a sensing matrix, cached by the ensemble so that
    /// the measurement operator runs on real GEMM kernels.
    type Split: Clone + Send + Sync + fmt::Debug;

    /// Draw with `E|z|² = 1`: N(0,1) for the real field, real and imaginary
    /// parts i.i.d. N(0,1/2) for the complex field.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Build from real and imaginary parts; the real field ignores `im`.
    fn from_parts(re: f64, im: f64) -> Self;

    /// `e^{iθ}` for the complex field; the sign of `cos θ` for the real field.
    fn unit_phase(theta: f64) -> Self;

    fn split(columns: &DMatrix<Self>) -> Self::Split;

    /// `out[i] = Re(z_i* X z_i)` with `z_i` the i-th column of the split matrix,
    /// together with the largest `|Im(z_i* X z_i)|`.
    fn quadratic_forms(z: &Self::Split, x: &DMatrix<Self>) -> (Vec<f64>, f64);

    /// `Σ_i y_i z_i z_i*`.
    fn weighted_outer_sum(z: &Self::Split, y: &[f64]) -> DMatrix<Self>;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;
    type Split = DMatrix<f64>;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn unit_phase(theta: f64) -> Self {
        if theta.cos() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    fn split(columns: &DMatrix<f64>) -> DMatrix<f64> {
        columns.clone()
    }

    fn quadratic_forms(z: &DMatrix<f64>, x: &DMatrix<f64>) -> (Vec<f64>, f64) {
        let y = x * z;
        let out = z
            .column_iter()
            .zip(y.column_iter())
            .map(|(zc, yc)| zc.dot(&yc))
            .collect();
        (out, 0.0)
    }

    fn weighted_outer_sum(z: &DMatrix<f64>, y: &[f64]) -> DMatrix<f64> {
        let mut w = z.clone();
        for (mut col, &yi) in w.column_iter_mut().zip(y) {
            col *= yi;
        }
        &w * z.transpose()
    }
}

/// Real and imaginary parts of a complex sensing matrix.
#[derive(Debug, Clone)]
pub struct ComplexSplit {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;
    type Split = ComplexSplit;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    fn unit_phase(theta: f64) -> Self {
        Complex64::from_polar(1.0, theta)
    }

    fn split(columns: &DMatrix<Complex64>) -> ComplexSplit {
        ComplexSplit {
            re: columns.map(|c| c.re),
            im: columns.map(|c| c.im),
        }
    }

    fn quadratic_forms(z: &ComplexSplit, x: &DMatrix<Complex64>) -> (Vec<f64>, f64) {
        let xr = x.map(|c| c.re);
        let xi = x.map(|c| c.im);
        // Y = X Z in split form.
        let yr = &xr * &z.re - &xi * &z.im;
        let yi = &xr * &z.im + &xi * &z.re;
        let m = z.re.ncols();
        let mut out = Vec::with_capacity(m);
        let mut max_imag = 0.0f64;
        for i in 0..m {
            let (zr, zi) = (z.re.column(i), z.im.column(i));
            let (ar, ai) = (yr.column(i), yi.column(i));
            // conj(z)ᵀ y
            let re = zr.dot(&ar) + zi.dot(&ai);
            let im = zr.dot(&ai) - zi.dot(&ar);
            max_imag = max_imag.max(im.abs() / (1.0 + re.abs()));
            out.push(re);
        }
        (out, max_imag)
    }

    fn weighted_outer_sum(z: &ComplexSplit, y: &[f64]) -> DMatrix<Complex64> {
        let mut wr = z.re.clone();
        let mut wi = z.im.clone();
        for (i, &yi) in y.iter().enumerate() {
            wr.column_mut(i).scale_mut(yi);
            wi.column_mut(i).scale_mut(yi);
        }
        let zrt = z.re.transpose();
        let zit = z.im.transpose();
        // W Z* = (Wr + iWi)(Zrᵀ − iZiᵀ)
        let re = &wr * &zrt + &wi * &zit;
        let im = &wi * &zrt - &wr * &zit;
        DMatrix::from_fn(re.nrows(), re.ncols(), |r, c| {
            Complex64::new(re[(r, c)], im[(r, c)])
        })
    }
}
