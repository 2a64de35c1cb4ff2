//! I.i.d. disorder fields keyed by `(seed, replica, n, m)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng;

/// Law of a single `ω_{n,m}`; both are centred with unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderLaw {
    #[serde(alias = "gaussian")]
    GaussianUnit,
    #[serde(alias = "rademacher", alias = "binary")]
    RademacherUnit,
}

impl DisorderLaw {
    /// `log Q(β) = log E[e^{βω}]`.
    pub fn log_q(self, beta: f64) -> f64 {
        match self {
            DisorderLaw::GaussianUnit => 0.5 * beta * beta,
            DisorderLaw::RademacherUnit => log_cosh(beta),
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            DisorderLaw::GaussianUnit => rng.sample(StandardNormal),
            DisorderLaw::RademacherUnit => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Atoms and their probabilities, for laws with finite support.
    pub fn atoms(self) -> Option<Vec<(f64, f64)>> {
        match self {
            DisorderLaw::GaussianUnit => None,
            DisorderLaw::RademacherUnit => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
        }
    }
}

/// `ln cosh x` without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub law: DisorderLaw,
    pub master_seed: u64,
}

impl DisorderSpec {
    pub fn new(law: DisorderLaw, master_seed: u64) -> Self {
        Self { law, master_seed }
    }

    pub fn log_q(&self, beta: f64) -> f64 {
        self.law.log_q(beta)
    }

    pub fn field(&self, replica: u64) -> DisorderField {
        DisorderField { spec: *self, replica, origin: (0, 0) }
    }
}

/// Anything that assigns a disorder value to each site `(n, m)`, `n, m >= 1`.
pub trait Field: Sync {
    fn omega(&self, n: usize, m: usize) -> f64;
}

/// One realisation of the disorder, possibly viewed through a shift `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisorderField {
    spec: DisorderSpec,
    replica: u64,
    origin: (usize, usize),
}

impl DisorderField {
    pub fn spec(&self) -> DisorderSpec {
        self.spec
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    /// `Θ_{a,b}`: `(Θ_{a,b} ω)_{n,m} = ω_{a+n, b+m}`.
    pub fn shifted(&self, a: usize, b: usize) -> Self {
        Self { origin: (self.origin.0 + a, self.origin.1 + b), ..*self }
    }
}

impl Field for DisorderField {
    fn omega(&self, n: usize, m: usize) -> f64 {
        let (a, b) = (self.origin.0 + n, self.origin.1 + m);
        let mut r = rng::stream(&[self.spec.master_seed, self.replica, a as u64, b as u64]);
        self.spec.law.sample(&mut r)
    }
}

/// Explicit values `ω[n][m]`; sites outside the table read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TableField {
    values: Vec<Vec<f64>>,
    origin: (usize, usize),
}

impl TableField {
    pub fn new(values: Vec<Vec<f64>>) -> Self {
        Self { values, origin: (0, 0) }
    }

    pub fn shifted(&self, a: usize, b: usize) -> Self {
        Self { values: self.values.clone(), origin: (self.origin.0 + a, self.origin.1 + b) }
    }
}

impl Field for TableField {
    fn omega(&self, n: usize, m: usize) -> f64 {
        let (a, b) = (self.origin.0 + n, self.origin.1 + m);
        self.values.get(a).and_then(|row| row.get(b)).copied().unwrap_or(0.0)
    }
}
