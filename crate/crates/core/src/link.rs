//! Inverse link functions `g: ℝ → (0, 1)` mapping `α − D_ij` to an edge
//! probability.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::erf::erfc;

type LinkFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Nondecreasing map into `[0, 1]`. `g(0) = 1/2` for both built-in kinds.
#[derive(Clone, Default)]
pub enum LinkFunction {
    #[default]
    Logistic,
    Probit,
    /// User-supplied nondecreasing function; log terms are taken naively.
    Custom {
        name: String,
        g: LinkFn,
    },
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// `log Φ(x)`, with the leading asymptotic term once `erfc` underflows.
fn log_normal_cdf(x: f64) -> f64 {
    if x > -30.0 {
        (0.5 * erfc(-x / SQRT_2)).ln()
    } else {
        let t = 1.0 / (x * x);
        -0.5 * x * x - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + (1.0 - t + 3.0 * t * t).ln()
    }
}

impl LinkFunction {
    pub fn custom(name: impl Into<String>, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LinkFunction::Custom {
            name: name.into(),
            g: Arc::new(g),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            LinkFunction::Logistic => "logistic",
            LinkFunction::Probit => "probit",
            LinkFunction::Custom { name, .. } => name,
        }
    }

    /// Built-in link by name.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "logistic" | "logit" => Some(LinkFunction::Logistic),
            "probit" => Some(LinkFunction::Probit),
            _ => None,
        }
    }

    pub fn prob(&self, x: f64) -> f64 {
        match self {
            LinkFunction::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            LinkFunction::Probit => 0.5 * erfc(-x / SQRT_2),
            LinkFunction::Custom { g, .. } => g(x),
        }
    }

    /// `log g(x)`.
    pub fn log_prob(&self, x: f64) -> f64 {
        match self {
            LinkFunction::Logistic => -softplus(-x),
            LinkFunction::Probit => log_normal_cdf(x),
            LinkFunction::Custom { g, .. } => g(x).ln(),
        }
    }

    /// `log(1 − g(x))`.
    pub fn log_complement(&self, x: f64) -> f64 {
        match self {
            LinkFunction::Logistic => -softplus(x),
            LinkFunction::Probit => log_normal_cdf(-x),
            LinkFunction::Custom { g, .. } => (-g(x)).ln_1p(),
        }
    }

    /// Bernoulli log-mass of `edge` at success probability `g(x)`.
    pub fn log_likelihood(&self, edge: bool, x: f64) -> f64 {
        if edge {
            self.log_prob(x)
        } else {
            self.log_complement(x)
        }
    }
}

impl fmt::Debug for LinkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinkFunction({})", self.name())
    }
}

impl Serialize for LinkFunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for LinkFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        LinkFunction::from_name(&name)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown link `{name}` (logistic or probit)")))
    }
}
