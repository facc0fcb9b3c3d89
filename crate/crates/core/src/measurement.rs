//! Sensing ensembles, the lifted measurement operator `A(X) = (z_i* X z_i)_i`,
//! its adjoint `A*(y) = Σ_i y_i z_i z_i*`, and the noise models.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::{ComplexField, DMatrix};
use rand::Rng;
use rand_distr::{Distribution as _, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hermitian::{HermitianMatrix, Signal};
use crate::rng::{stream, Domain};
use crate::scalar::{Field, Scalar};
use crate::tolerance::TOL;

/// How sensing vectors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// i.i.d. entries with `E|z_j|² = 1`.
    Gaussian,
    /// Uniform on the unit sphere.
    UnitSphere,
    /// Uniform on the sphere of radius √n.
    SphereRadiusSqrtN,
}

impl Distribution {
    /// Model tag as written in ensemble files, e.g. `complex-unit-sphere`.
    pub fn tag(self, field: Field) -> String {
        match self {
            Distribution::Gaussian => format!("{field}-gaussian"),
            Distribution::UnitSphere => format!("{field}-unit-sphere"),
            Distribution::SphereRadiusSqrtN => "sphere-radius-sqrt-n".to_string(),
        }
    }

    /// Parses a model tag, returning the distribution and the field it names (if any).
    pub fn parse_tag(tag: &str) -> Result<(Distribution, Option<Field>)> {
        Ok(match tag {
            "real-gaussian" => (Distribution::Gaussian, Some(Field::Real)),
            "complex-gaussian" => (Distribution::Gaussian, Some(Field::Complex)),
            "real-unit-sphere" => (Distribution::UnitSphere, Some(Field::Real)),
            "complex-unit-sphere" => (Distribution::UnitSphere, Some(Field::Complex)),
            "sphere-radius-sqrt-n" => (Distribution::SphereRadiusSqrtN, None),
            other => return Err(Error::Parse(format!("unknown sensing model `{other}`"))),
        })
    }

    fn radius(self, n: usize) -> Option<f64> {
        match self {
            Distribution::Gaussian => None,
            Distribution::UnitSphere => Some(1.0),
            Distribution::SphereRadiusSqrtN => Some((n as f64).sqrt()),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Distribution::Gaussian),
            "unit-sphere" => Ok(Distribution::UnitSphere),
            "sphere-radius-sqrt-n" => Ok(Distribution::SphereRadiusSqrtN),
            other => Distribution::parse_tag(other).map(|(d, _)| d),
        }
    }
}

/// `m` sensing vectors of length `n`, stored as the columns of an n×m matrix.
#[derive(Debug, Clone)]
pub struct SensingEnsemble<T: Scalar> {
    columns: DMatrix<T>,
    split: T::Split,
    distribution: Distribution,
    seed: u64,
}

impl<T: Scalar> SensingEnsemble<T> {
    /// Draws `m` vectors; vector `i` comes from its own random substream so the
    /// ensemble is a pure function of `(n, m, distribution, seed)`.
    pub fn sample(n: usize, m: usize, distribution: Distribution, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput(format!(
                "ensemble needs n ≥ 1 and m ≥ 1 (got n={n}, m={m})"
            )));
        }
        let mut columns = DMatrix::<T>::zeros(n, m);
        for i in 0..m {
            let mut z = draw_vector::<T>(n, seed, Domain::Sensing, i);
            if let Some(radius) = distribution.radius(n) {
                let mut norm = z.norm();
                if norm == 0.0 {
                    z = draw_vector::<T>(n, seed, Domain::SensingResample, i);
                    norm = z.norm();
                    if norm == 0.0 {
                        return Err(Error::DegenerateDraw { index: i });
                    }
                }
                z *= T::from_real(radius / norm);
            }
            columns.set_column(i, &z);
        }
        Ok(Self::from_columns_unchecked(columns, distribution, seed))
    }

    /// Wraps explicit sensing vectors. Sphere models have their radius checked.
    pub fn from_vectors(
        vectors: &[Signal<T>],
        distribution: Distribution,
        seed: u64,
    ) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::InvalidInput("ensemble needs m ≥ 1 vectors".into()));
        };
        let n = first.len();
        let mut columns = DMatrix::<T>::zeros(n, vectors.len());
        for (i, v) in vectors.iter().enumerate() {
            check_dim(n, v.len())?;
            if let Some(radius) = distribution.radius(n) {
                let slack = match distribution {
                    Distribution::UnitSphere => TOL.sphere_unit,
                    _ => TOL.sphere_radius,
                };
                if (v.norm() - radius).abs() > slack {
                    return Err(Error::InvalidInput(format!(
                        "sensing vector {i} has norm {} but the model requires {radius}",
                        v.norm()
                    )));
                }
            }
            columns.set_column(i, v.as_vector());
        }
        Ok(Self::from_columns_unchecked(columns, distribution, seed))
    }

    fn from_columns_unchecked(columns: DMatrix<T>, distribution: Distribution, seed: u64) -> Self {
        let split = T::split(&columns);
        Self {
            columns,
            split,
            distribution,
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn m(&self) -> usize {
        self.columns.ncols()
    }

    pub fn field(&self) -> Field {
        T::FIELD
    }

    pub fn distribution(&self) -> Distribution {
        self.distribution
    }

    pub fn model_tag(&self) -> String {
        self.distribution.tag(T::FIELD)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The n×m matrix whose columns are the sensing vectors.
    pub fn columns(&self) -> &DMatrix<T> {
        &self.columns
    }

    pub fn vector(&self, i: usize) -> Signal<T> {
        Signal::from_dvector(self.columns.column(i).into_owned())
            .expect("ensemble vectors are finite")
    }

    /// `A(X)_i = z_i* X z_i`.
    pub fn apply(&self, x: &HermitianMatrix<T>) -> Result<Vec<f64>> {
        check_dim(self.n(), x.n())?;
        let (out, imag) = T::quadratic_forms(&self.split, x.as_matrix());
        if imag > TOL.imag_residue {
            log::warn!("measurement operator: imaginary residue {imag:e} discarded");
        }
        Ok(out)
    }

    /// `A*(y) = Σ_i y_i z_i z_i*`.
    pub fn adjoint(&self, y: &[f64]) -> Result<HermitianMatrix<T>> {
        check_dim(self.m(), y.len())?;
        Ok(HermitianMatrix::from_raw(T::weighted_outer_sum(
            &self.split,
            y,
        )))
    }

    /// `|⟨x, z_i⟩|²` for every sensing vector.
    pub fn intensities(&self, x: &Signal<T>) -> Result<Vec<f64>> {
        check_dim(self.n(), x.len())?;
        let proj = self.columns.ad_mul(x.as_vector());
        Ok(proj.iter().map(|v| v.modulus_squared()).collect())
    }

    /// Writes the ensemble in the columnar text format: a `#` banner, the header
    /// keys `field`, `n`, `m`, `model`, `seed`, then one row per sensing vector
    /// (`re` per entry for the real field, `re im` pairs for the complex field).
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# phaselift sensing ensemble v1")?;
        writeln!(w, "field {}", T::FIELD)?;
        writeln!(w, "n {}", self.n())?;
        writeln!(w, "m {}", self.m())?;
        writeln!(w, "model {}", self.model_tag())?;
        writeln!(w, "seed {}", self.seed)?;
        for col in self.columns.column_iter() {
            let row: Vec<String> = col
                .iter()
                .map(|v| match T::FIELD {
                    Field::Real => format!("{:?}", v.real()),
                    Field::Complex => format!("{:?} {:?}", v.real(), v.imaginary()),
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = data_lines(r);
        let header = read_header(&mut lines, &["field", "n", "m", "model", "seed"])?;
        let field: Field = header[0].parse()?;
        if field != T::FIELD {
            return Err(Error::FieldMismatch {
                expected: T::FIELD,
                found: field,
            });
        }
        let n = parse_num::<usize>(&header[1])?;
        let m = parse_num::<usize>(&header[2])?;
        let (distribution, tag_field) = Distribution::parse_tag(&header[3])?;
        if let Some(f) = tag_field {
            if f != field {
                return Err(Error::FieldMismatch {
                    expected: field,
                    found: f,
                });
            }
        }
        let seed = parse_num::<u64>(&header[4])?;
        let width = match field {
            Field::Real => n,
            Field::Complex => 2 * n,
        };
        let mut vectors = Vec::with_capacity(m);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {i}")))??;
            let nums = parse_row(&line, width)?;
            let entries = match field {
                Field::Real => nums.iter().map(|&v| T::from_parts(v, 0.0)).collect(),
                Field::Complex => nums.chunks(2).map(|p| T::from_parts(p[0], p[1])).collect(),
            };
            vectors.push(Signal::new(entries)?);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing rows after m vectors".into()));
        }
        Self::from_vectors(&vectors, distribution, seed)
    }
}

fn draw_vector<T: Scalar>(n: usize, seed: u64, domain: Domain, i: usize) -> nalgebra::DVector<T> {
    let mut rng = stream(seed, domain, i as u64);
    nalgebra::DVector::from_fn(n, |_, _| T::standard_normal(&mut rng))
}

/// A test signal with i.i.d. entries `a + ib`, `a, b ~ N(0,1)` (real part only
/// for the real field).
pub fn gaussian_signal<T: Scalar>(n: usize, seed: u64) -> Result<Signal<T>> {
    let mut rng = stream(seed, Domain::Signal, 0);
    let entries = (0..n)
        .map(|_| {
            let a: f64 = rng.sample(rand_distr::StandardNormal);
            let b: f64 = rng.sample(rand_distr::StandardNormal);
            T::from_parts(a, b)
        })
        .collect();
    Signal::new(entries)
}

/// Additive noise model for intensity data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    Gaussian,
    Poisson,
    None,
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            NoiseModel::Gaussian => "gaussian",
            NoiseModel::Poisson => "poisson",
            NoiseModel::None => "none",
        })
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseModel::Gaussian),
            "poisson" => Ok(NoiseModel::Poisson),
            "none" => Ok(NoiseModel::None),
            other => Err(Error::Parse(format!("unknown noise model `{other}`"))),
        }
    }
}

/// The power the SNR is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrReference {
    /// `10·log₁₀(‖b_clean‖₂² / ‖ν‖₂²)`.
    Intensities,
    /// `10·log₁₀(‖x‖₂² / ‖ν‖₂²)` with the given `‖x‖₂²`.
    SignalEnergy(f64),
}

/// Intensities `b = b_clean + ν` with noise bound `ε = ‖ν‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityData {
    b: Vec<f64>,
    nu: Vec<f64>,
    eps: f64,
}

impl IntensityData {
    pub fn new(b: Vec<f64>, nu: Vec<f64>, eps: f64) -> Result<Self> {
        check_dim(b.len(), nu.len())?;
        if b.is_empty() {
            return Err(Error::InvalidInput("intensity data needs m ≥ 1".into()));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise bound must be finite and ≥ 0, got {eps}"
            )));
        }
        if b.iter().chain(&nu).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "intensity data has non-finite entries".into(),
            ));
        }
        let nu_norm = l2(&nu);
        if nu_norm > eps * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::InvalidInput(format!(
                "‖ν‖₂ = {nu_norm} exceeds the noise bound {eps}"
            )));
        }
        for (i, (bi, ni)) in b.iter().zip(&nu).enumerate() {
            if bi - ni < -1e-12 * bi.abs().max(ni.abs()).max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "clean intensity {i} is negative ({})",
                    bi - ni
                )));
            }
        }
        Ok(Self { b, nu, eps })
    }

    /// Noiseless data with `ε = 0`.
    pub fn clean(b: Vec<f64>) -> Result<Self> {
        let m = b.len();
        Self::new(b, vec![0.0; m], 0.0)
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn b_clean(&self) -> Vec<f64> {
        self.b.iter().zip(&self.nu).map(|(b, n)| b - n).collect()
    }

    /// Same data with a different noise bound (e.g. a tiny `ε` for noiseless solves).
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.b.clone(), self.nu.clone(), eps)
    }

    /// Banner, `m` and `eps` header keys, a `b nu` column header, then `m` rows.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# phaselift intensity data v1")?;
        writeln!(w, "m {}", self.m())?;
        writeln!(w, "eps {:?}", self.eps)?;
        writeln!(w, "b nu")?;
        for (b, nu) in self.b.iter().zip(&self.nu) {
            writeln!(w, "{b:?} {nu:?}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = data_lines(r);
        let header = read_header(&mut lines, &["m", "eps"])?;
        let m = parse_num::<usize>(&header[0])?;
        let eps = parse_num::<f64>(&header[1])?;
        match lines.next() {
            Some(Ok(l)) if l.split_whitespace().collect::<Vec<_>>() == ["b", "nu"] => {}
            _ => return Err(Error::Parse("expected `b nu` column header".into())),
        }
        let mut b = Vec::with_capacity(m);
        let mut nu = Vec::with_capacity(m);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {i}")))??;
            let row = parse_row(&line, 2)?;
            b.push(row[0]);
            nu.push(row[1]);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing rows after m intensities".into()));
        }
        Self::new(b, nu, eps)
    }
}

/// Adds noise at the given SNR (dB) relative to the clean intensities.
pub fn add_noise(
    b_clean: &[f64],
    model: NoiseModel,
    snr_db: f64,
    seed: u64,
) -> Result<IntensityData> {
    add_noise_with_reference(b_clean, model, snr_db, SnrReference::Intensities, seed)
}

/// Draws raw noise, then rescales it so the realized SNR equals `snr_db` exactly.
///
/// Gaussian: `ν_i ~ N(0,1)`. Poisson: `b_i ~ Poi(b_clean_i)` and `ν = b − b_clean`.
/// `snr_db = +∞` gives `ν = 0`.
pub fn add_noise_with_reference(
    b_clean: &[f64],
    model: NoiseModel,
    snr_db: f64,
    reference: SnrReference,
    seed: u64,
) -> Result<IntensityData> {
    if b_clean.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(
            "clean intensities must be finite and non-negative".into(),
        ));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidInput(format!(
            "SNR must be finite or +∞, got {snr_db}"
        )));
    }
    let m = b_clean.len();
    let raw: Vec<f64> = match model {
        NoiseModel::None => vec![0.0; m],
        _ if snr_db == f64::INFINITY => vec![0.0; m],
        NoiseModel::Gaussian => (0..m)
            .map(|i| stream(seed, Domain::Noise, i as u64).sample(rand_distr::StandardNormal))
            .collect(),
        NoiseModel::Poisson => b_clean
            .iter()
            .enumerate()
            .map(|(i, &mu)| {
                let mut rng = stream(seed, Domain::Noise, i as u64);
                sample_poisson(mu, &mut rng) - mu
            })
            .collect(),
    };
    let raw_power: f64 = raw.iter().map(|v| v * v).sum();
    let nu = if raw_power == 0.0 {
        raw
    } else {
        let reference_power = match reference {
            SnrReference::Intensities => b_clean.iter().map(|v| v * v).sum(),
            SnrReference::SignalEnergy(e) => e,
        };
        if !(reference_power > 0.0 && reference_power.is_finite()) {
            return Err(Error::DegenerateSnr);
        }
        let target = reference_power / 10f64.powf(snr_db / 10.0);
        let scale = (target / raw_power).sqrt();
        raw.into_iter().map(|v| v * scale).collect()
    };
    let b = b_clean.iter().zip(&nu).map(|(c, n)| c + n).collect();
    let eps = l2(&nu);
    IntensityData::new(b, nu, eps)
}

/// Exact Poisson draw: sequential inversion below rate 30, rejection sampling above.
pub fn sample_poisson<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    if mu < 30.0 {
        let u: f64 = rng.random();
        let mut k = 0u32;
        let mut p = (-mu).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mu / k as f64;
            cdf += p;
            if p == 0.0 && cdf < u {
                // cdf saturated below u through rounding; the remaining mass is negligible
                break;
            }
        }
        k as f64
    } else {
        Poisson::new(mu).expect("finite positive rate").sample(rng)
    }
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn data_lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<String>> {
    r.lines()
        .map(|l| l.map_err(Error::from))
        .filter(|l| match l {
            Ok(s) => !s.trim().is_empty() && !s.trim_start().starts_with('#'),
            Err(_) => true,
        })
}

fn read_header(
    lines: &mut impl Iterator<Item = Result<String>>,
    keys: &[&str],
) -> Result<Vec<String>> {
    keys.iter()
        .map(|key| {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing header key `{key}`")))??;
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(k), Some(v), None) if k == *key => Ok(v.to_string()),
                _ => Err(Error::Parse(format!(
                    "expected `{key} <value>`, got `{line}`"
                ))),
            }
        })
        .collect()
}

fn parse_num<N: FromStr>(s: &str) -> Result<N> {
    s.parse::<N>()
        .map_err(|_| Error::Parse(format!("cannot parse `{s}`")))
}

fn parse_row(line: &str, width: usize) -> Result<Vec<f64>> {
    let nums = line
        .split_whitespace()
        .map(parse_num::<f64>)
        .collect::<Result<Vec<_>>>()?;
    if nums.len() != width {
        return Err(Error::Parse(format!(
            "expected {width} values per row, got {}",
            nums.len()
        )));
    }
    Ok(nums)
}
