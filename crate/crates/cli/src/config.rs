//! Experiment configuration (TOML). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use gps_core::polymer::{AspectRatio, DisorderLaw};
use gps_core::relevance::{asymptotic_scale, TiltSchedule};
use gps_core::{Budget, Kernel, SlowlyVarying, SvFamily};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub certificate: CertificateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub alpha: f64,
    #[serde(default = "default_family")]
    pub family: SvFamily,
    #[serde(default = "one")]
    pub c0: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub beta: f64,
    pub h: Option<f64>,
    /// `h = h_c^a(β) + h_gap`; exclusive with `h`.
    pub h_gap: Option<f64>,
    /// Pinning values for `homog-scan`.
    pub h_list: Option<Vec<f64>>,
    /// Inverse temperatures for `second-moment-scan`.
    pub beta_list: Option<Vec<f64>>,
    #[serde(default = "one_u64")]
    pub gamma_p: u64,
    #[serde(default = "one_u64")]
    pub gamma_q: u64,
    #[serde(default = "default_law")]
    pub disorder: DisorderLaw,
    #[serde(default)]
    pub master_seed: u64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            beta: 0.0,
            h: None,
            h_gap: None,
            h_list: None,
            beta_list: None,
            gamma_p: 1,
            gamma_q: 1,
            disorder: default_law(),
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_n_list", alias = "N_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Work-unit cap `N M (N + M)` per grid.
    pub budget: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { n_list: default_n_list(), replicas: default_replicas(), budget: None, threads: None, out_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub k_scale: Option<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub lambdas: Option<Vec<f64>>,
    pub ells: Option<Vec<f64>>,
    pub include_asymptotic_pairs: Option<bool>,
}

impl Default for CertificateSection {
    fn default() -> Self {
        Self { delta: default_delta(), k_scale: None, epsilon: default_epsilon(), lambdas: None, ells: None, include_asymptotic_pairs: None }
    }
}

fn default_family() -> SvFamily {
    SvFamily::Constant
}
fn one() -> f64 {
    1.0
}
fn one_u64() -> u64 {
    1
}
fn default_t_max() -> usize {
    100_000
}
fn default_law() -> DisorderLaw {
    DisorderLaw::GaussianUnit
}
fn default_n_list() -> Vec<usize> {
    vec![64, 128, 256]
}
fn default_replicas() -> usize {
    16
}
fn default_delta() -> f64 {
    0.9
}
fn default_epsilon() -> f64 {
    0.5
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let k = &self.kernel;
        if !(k.alpha.is_finite() && k.alpha > 0.0) || k.alpha == 1.0 {
            return Err(bad("kernel.alpha", format!("must be positive, finite and != 1, got {}", k.alpha)));
        }
        if k.t_max < 16 {
            return Err(bad("kernel.t_max", format!("must be at least 16, got {}", k.t_max)));
        }
        let m = &self.model;
        if !(m.beta.is_finite() && m.beta >= 0.0) {
            return Err(bad("model.beta", format!("must be finite and >= 0, got {}", m.beta)));
        }
        if m.h.is_some() && m.h_gap.is_some() {
            return Err(bad("model.h_gap", "give either h or h_gap, not both"));
        }
        if let Some(h) = m.h.or(m.h_gap) {
            if !h.is_finite() {
                return Err(bad("model.h", "must be finite"));
            }
        }
        if let Some(list) = &m.h_list {
            if list.is_empty() || list.iter().any(|h| !h.is_finite()) {
                return Err(bad("model.h_list", "must be a non-empty list of finite values"));
            }
        }
        if let Some(list) = &m.beta_list {
            if list.is_empty() || list.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
                return Err(bad("model.beta_list", "must be a non-empty list of finite values >= 0"));
            }
        }
        if m.gamma_p == 0 || m.gamma_q == 0 {
            return Err(bad("model.gamma_p", "gamma_p and gamma_q must be positive"));
        }
        let r = &self.run;
        if r.n_list.is_empty() || r.n_list.contains(&0) {
            return Err(bad("run.n_list", "must be a non-empty list of positive sizes"));
        }
        if r.replicas == 0 {
            return Err(bad("run.replicas", "must be positive"));
        }
        if r.threads == Some(0) {
            return Err(bad("run.threads", "must be positive"));
        }
        let c = &self.certificate;
        if !(c.delta > 0.0 && c.delta < 1.0) {
            return Err(bad("certificate.delta", format!("must lie in (0, 1), got {}", c.delta)));
        }
        if !(c.epsilon > 0.0 && c.epsilon.is_finite()) {
            return Err(bad("certificate.epsilon", format!("must be positive, got {}", c.epsilon)));
        }
        if c.k_scale == Some(0) {
            return Err(bad("certificate.k_scale", "must be positive"));
        }
        if self.gamma().m_for(self.n_min()) == 0 {
            return Err(bad("run.n_list", "smallest N gives an empty second side"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical config, leaving out settings that cannot
    /// change results (threads, output directory).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.run.threads = None;
        c.run.out_dir = None;
        let text = toml::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn kernel(&self) -> Result<Kernel, CliError> {
        let k = &self.kernel;
        let sv = SlowlyVarying { family: k.family, c0: k.c0, kappa: k.kappa };
        Kernel::new(k.alpha, sv, k.t_max).map_err(|e| bad("kernel", e))
    }

    pub fn gamma(&self) -> AspectRatio {
        AspectRatio::new(self.model.gamma_p, self.model.gamma_q).expect("validated")
    }

    pub fn budget(&self) -> Budget {
        self.run.budget.map_or(Budget::DEFAULT, |b| Budget::new(b as u128))
    }

    pub fn n_sorted(&self) -> Vec<usize> {
        let mut v = self.run.n_list.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn n_min(&self) -> usize {
        *self.run.n_list.iter().min().expect("validated")
    }

    pub fn n_max(&self) -> usize {
        *self.run.n_list.iter().max().expect("validated")
    }

    /// `h` from `model.h`, or `h_c^a(β) + h_gap`.
    pub fn h(&self) -> Result<f64, CliError> {
        let m = &self.model;
        match (m.h, m.h_gap) {
            (Some(h), _) => Ok(h),
            (None, Some(g)) => Ok(-m.disorder.log_q(m.beta) + g),
            (None, None) => Err(bad("model.h", "this subcommand needs model.h or model.h_gap")),
        }
    }

    pub fn h_list(&self) -> Result<Vec<f64>, CliError> {
        match &self.model.h_list {
            Some(l) => Ok(l.clone()),
            None => Ok(vec![self.h()?]),
        }
    }

    pub fn beta_list(&self) -> Vec<f64> {
        self.model.beta_list.clone().unwrap_or_else(|| vec![self.model.beta])
    }

    /// Configured `k_scale`, else `clamp(round(k_β), 2, 512)`.
    pub fn k_scale(&self) -> Result<usize, CliError> {
        if let Some(k) = self.certificate.k_scale {
            return Ok(k);
        }
        asymptotic_scale(self.kernel.alpha, self.model.beta, self.certificate.epsilon)
            .filter(|k| k.is_finite())
            .map(|k| (k.round() as usize).clamp(2, 512))
            .ok_or_else(|| bad("certificate.k_scale", "no default scale at these (alpha, beta); set it explicitly"))
    }

    pub fn tilt_schedule(&self, k: usize) -> Option<TiltSchedule> {
        let c = &self.certificate;
        if c.lambdas.is_none() && c.ells.is_none() && c.include_asymptotic_pairs.is_none() {
            return None;
        }
        let d = TiltSchedule::default_for(k, c.delta);
        Some(TiltSchedule {
            lambdas: c.lambdas.clone().unwrap_or(d.lambdas),
            ells: c.ells.clone().unwrap_or(d.ells),
            include_asymptotic_pairs: c.include_asymptotic_pairs.unwrap_or(d.include_asymptotic_pairs),
        })
    }
}
