use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{Distribution, NoiseModel};
use crate::scalar::Field;
use crate::solver::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SnrSweep,
    OversamplingSweep,
    PhaseTransition,
    CertificateStudy,
    Rip1Study,
    FCurves,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::SnrSweep,
        ExperimentKind::OversamplingSweep,
        ExperimentKind::PhaseTransition,
        ExperimentKind::CertificateStudy,
        ExperimentKind::Rip1Study,
        ExperimentKind::FCurves,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::SnrSweep => "snr-sweep",
            ExperimentKind::OversamplingSweep => "oversampling-sweep",
            ExperimentKind::PhaseTransition => "phase-transition",
            ExperimentKind::CertificateStudy => "certificate-study",
            ExperimentKind::Rip1Study => "rip1-study",
            ExperimentKind::FCurves => "f-curves",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Which power the SNR of the noisy intensities is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrBasis {
    /// `‖b_clean‖₂² / ‖ν‖₂²`.
    Intensities,
    /// `‖x‖₂² / ‖ν‖₂²`.
    Signal,
}

impl FromStr for SnrBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intensities" => Ok(SnrBasis::Intensities),
            "signal" => Ok(SnrBasis::Signal),
            other => Err(Error::Config(format!("unknown SNR basis `{other}`"))),
        }
    }
}

/// A fully resolved experiment description. Every run is a pure function of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: Vec<usize>,
    /// Explicit measurement counts. When non-empty it replaces `m_over_n`.
    pub m: Vec<usize>,
    pub m_over_n: Vec<f64>,
    pub field: Field,
    pub sensing: Distribution,
    pub noise: NoiseModel,
    pub snr_db: Vec<f64>,
    pub snr_basis: SnrBasis,
    pub trials: usize,
    pub seed: u64,
    /// Monte Carlo draws per point (f-curves) or rank-2 samples per trial (rip1-study).
    pub samples: usize,
    pub t_points: usize,
    pub beta: f64,
    /// A noiseless trial counts as a success when `rel_mse` is at most this.
    pub success_threshold: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Partial settings from a config file or from command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<ExperimentKind>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub n: Option<Vec<usize>>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub m: Option<Vec<usize>>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub m_over_n: Option<Vec<f64>>,
    pub field: Option<Field>,
    pub sensing: Option<Distribution>,
    pub noise: Option<NoiseModel>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub snr_db: Option<Vec<f64>>,
    pub snr_basis: Option<SnrBasis>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub t_points: Option<usize>,
    pub beta: Option<f64>,
    pub success_threshold: Option<f64>,
    pub max_iters: Option<usize>,
    pub rel_tol: Option<f64>,
    pub out: Option<PathBuf>,
}

fn one_or_many<'de, D, V>(d: D) -> std::result::Result<Option<Vec<V>>, D::Error>
where
    D: Deserializer<'de>,
    V: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<V> {
        One(V),
        Many(Vec<V>),
    }
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    }))
}

impl ConfigOverrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        macro_rules! pick {
            ($($f:ident),*) => {
                ConfigOverrides { $($f: other.$f.or(self.$f)),* }
            };
        }
        pick!(
            experiment,
            n,
            m,
            m_over_n,
            field,
            sensing,
            noise,
            snr_db,
            snr_basis,
            trials,
            seed,
            samples,
            t_points,
            beta,
            success_threshold,
            max_iters,
            rel_tol,
            out
        )
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let kind = self
            .experiment
            .ok_or_else(|| Error::Config("no experiment given".into()))?;
        let mut cfg = ExperimentConfig::defaults(kind);
        macro_rules! apply {
            ($($f:ident),*) => {
                $(if let Some(v) = self.$f { cfg.$f = v; })*
            };
        }
        apply!(
            n,
            m,
            m_over_n,
            field,
            sensing,
            noise,
            snr_db,
            snr_basis,
            trials,
            seed,
            samples,
            t_points,
            beta,
            success_threshold,
            max_iters,
            rel_tol
        );
        cfg.out = self.out;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    /// Settings used when neither the config file nor a flag overrides them.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = ExperimentConfig {
            experiment: kind,
            n: vec![128],
            m: Vec::new(),
            m_over_n: vec![6.0],
            field: Field::Complex,
            sensing: Distribution::UnitSphere,
            noise: NoiseModel::Poisson,
            snr_db: vec![5.0, 25.0, 50.0, 75.0, 100.0],
            snr_basis: SnrBasis::Intensities,
            trials: 10,
            seed: 0,
            samples: 0,
            t_points: 0,
            beta: 3.0,
            success_threshold: 1e-5,
            max_iters: SolverOptions::default().max_iters,
            rel_tol: SolverOptions::default().rel_tol,
            out: None,
        };
        match kind {
            ExperimentKind::SnrSweep => base,
            ExperimentKind::OversamplingSweep => ExperimentConfig {
                m_over_n: vec![5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 22.0],
                snr_db: vec![15.0],
                ..base
            },
            ExperimentKind::PhaseTransition => ExperimentConfig {
                n: vec![16, 32],
                m_over_n: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0],
                noise: NoiseModel::None,
                snr_db: vec![f64::INFINITY],
                ..base
            },
            ExperimentKind::CertificateStudy => ExperimentConfig {
                n: vec![64],
                m_over_n: vec![2.0, 8.0, 32.0, 100.0],
                field: Field::Real,
                sensing: Distribution::Gaussian,
                noise: NoiseModel::None,
                snr_db: vec![f64::INFINITY],
                ..base
            },
            ExperimentKind::Rip1Study => ExperimentConfig {
                n: vec![16],
                m_over_n: vec![4.0, 16.0, 64.0, 256.0],
                field: Field::Real,
                sensing: Distribution::Gaussian,
                noise: NoiseModel::None,
                snr_db: vec![f64::INFINITY],
                samples: 500,
                ..base
            },
            ExperimentKind::FCurves => ExperimentConfig {
                n: vec![1],
                field: Field::Real,
                noise: NoiseModel::None,
                snr_db: vec![f64::INFINITY],
                samples: 1_000_000,
                t_points: 101,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("n grid must be non-empty and positive".into());
        }
        if self.m.is_empty() && self.m_over_n.is_empty() {
            return bad("m / m-over-n grid is empty".into());
        }
        if self.m.contains(&0) {
            return bad("m must be positive".into());
        }
        if self.m_over_n.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("m-over-n values must be positive and finite".into());
        }
        if self.snr_db.is_empty() {
            return bad("snr-db grid is empty".into());
        }
        if self
            .snr_db
            .iter()
            .any(|s| s.is_nan() || *s == f64::NEG_INFINITY)
        {
            return bad("snr-db values must be finite or +inf".into());
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.success_threshold.is_nan() || self.success_threshold < 0.0 {
            return bad("success-threshold must be non-negative".into());
        }
        self.solver_options()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.experiment {
            ExperimentKind::CertificateStudy if self.sensing != Distribution::Gaussian => {
                return bad("certificate-study requires gaussian sensing".into());
            }
            ExperimentKind::Rip1Study => {
                if self.n.contains(&1) {
                    return bad("rip1-study needs n ≥ 2".into());
                }
                for (n, m) in self.grid() {
                    if m < n {
                        return bad(format!("rip1-study needs m ≥ n, got n={n}, m={m}"));
                    }
                }
            }
            ExperimentKind::FCurves => {
                if self.t_points < 2 {
                    return bad("t-points must be at least 2".into());
                }
                if self.samples < 1000 {
                    return bad("f-curves needs samples ≥ 1000".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            ..SolverOptions::default()
        }
    }

    /// `(n, m)` pairs in output order: `n` outer, `m` inner.
    pub fn grid(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &n in &self.n {
            if self.m.is_empty() {
                for r in &self.m_over_n {
                    out.push((n, ((r * n as f64).round() as usize).max(1)));
                }
            } else {
                out.extend(self.m.iter().map(|&m| (n, m)));
            }
        }
        out
    }

    /// Canonical TOML text of the configuration (without the output path).
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("experiment config is always TOML-serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_tags_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.tag().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("sweep".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn toml_accepts_scalars_and_lists() {
        let o = ConfigOverrides::from_toml(
            "experiment = \"snr-sweep\"\nn = 16\nsnr-db = [10.0, inf]\nm-over-n = 4.5\n",
        )
        .unwrap();
        let cfg = o.resolve().unwrap();
        assert_eq!(cfg.n, vec![16]);
        assert_eq!(cfg.snr_db, vec![10.0, f64::INFINITY]);
        assert_eq!(cfg.grid(), vec![(16, 72)]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigOverrides::from_toml("experiment = \"f-curves\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigOverrides {
            experiment: Some(ExperimentKind::SnrSweep),
            trials: Some(3),
            seed: Some(9),
            ..Default::default()
        };
        let flags = ConfigOverrides {
            trials: Some(1),
            ..Default::default()
        };
        let cfg = file.merge(flags).resolve().unwrap();
        assert_eq!((cfg.trials, cfg.seed), (1, 9));
    }

    #[test]
    fn validation_errors() {
        let base = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::defaults(ExperimentKind::OversamplingSweep);
            f(&mut c);
            c.validate()
        };
        assert!(base(|_| {}).is_ok());
        assert!(base(|c| c.m_over_n.clear()).is_err());
        assert!(base(|c| c.trials = 0).is_err());
        assert!(base(|c| c.snr_db.clear()).is_err());
        assert!(base(|c| c.snr_db = vec![f64::NAN]).is_err());
        assert!(base(|c| c.n = vec![]).is_err());
        let mut rip = ExperimentConfig::defaults(ExperimentKind::Rip1Study);
        rip.m_over_n = vec![0.5];
        assert!(rip.validate().is_err());
        let mut cert = ExperimentConfig::defaults(ExperimentKind::CertificateStudy);
        cert.sensing = Distribution::UnitSphere;
        assert!(cert.validate().is_err());
    }

    #[test]
    fn canonical_toml_is_stable_and_skips_output() {
        let mut a = ExperimentConfig::defaults(ExperimentKind::PhaseTransition);
        let text = a.canonical_toml();
        a.out = Some("x.csv".into());
        assert_eq!(a.canonical_toml(), text);
        assert!(text.contains("experiment = \"phase-transition\""));
        assert!(text.contains("snr-db = [inf]"));
    }
}
