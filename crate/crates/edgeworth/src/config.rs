//! Experiment configuration: JSON-backed, strictly validated, and hashed so
//! every CSV artifact can embed the provenance of the run that produced it.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::charfun::{model_by_name, DistributionModel};
use crate::error::{Error, Result};
use crate::expansion::ExpansionOrder;

/// How the Fourier-inversion truncation radius is picked per n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRule {
    /// Start at max(16, n^{1/6}) and double until the |v_n| tail estimate
    /// fits the mass budget.
    Auto,
    /// Use the given radius as-is (still subject to the tail budget check).
    Fixed(f64),
}

impl Default for CutoffRule {
    fn default() -> Self {
        CutoffRule::Auto
    }
}

fn default_half_width() -> f64 {
    8.0
}

fn default_h() -> f64 {
    1.0 / 256.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Zoo model name.
    pub model: String,
    /// Moment order s (possibly fractional).
    pub s: f64,
    /// Expansion order m; defaults to floor(s).
    #[serde(default)]
    pub m: Option<usize>,
    pub n_list: Vec<u64>,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub cutoff: CutoffRule,
    /// Weight powers w for the reported sup of (1+|x|^w)|rho_n - phi_m|;
    /// empty means {0, m, s}.
    #[serde(default)]
    pub weight_powers: Vec<f64>,
    /// Output path; stdout when absent.
    #[serde(default)]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config JSON: {e}")))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Validates every invariant and resolves the model and expansion order.
    pub fn resolve(&self) -> Result<(DistributionModel, ExpansionOrder)> {
        let model = model_by_name(&self.model)?;
        if !(self.s >= 2.0) {
            return Err(Error::Config(format!("s must be >= 2, got {}", self.s)));
        }
        if self.s > model.s_max {
            return Err(Error::Config(format!(
                "s = {} exceeds s_max = {} of model {}",
                self.s, model.s_max, model.name
            )));
        }
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list must be nonempty".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_list must be strictly ascending".into()));
        }
        if self.n_list[0] < 2 {
            return Err(Error::Config("every n must be >= 2".into()));
        }
        if !(self.h > 0.0) || !(self.half_width > 0.0) {
            return Err(Error::Config("grid parameters must be positive".into()));
        }
        if let CutoffRule::Fixed(t) = self.cutoff {
            if !(t > 0.0) {
                return Err(Error::Config("fixed cutoff must be positive".into()));
            }
        }
        if self.weight_powers.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::Config("weight powers must be nonnegative".into()));
        }
        let base = ExpansionOrder::new(self.s).map_err(|e| Error::Config(e.to_string()))?;
        let order = match self.m {
            None => base,
            Some(m) => {
                if m < 3 || m as f64 > self.s {
                    return Err(Error::Config(format!(
                        "m must satisfy 3 <= m <= s, got m = {m}, s = {}",
                        self.s
                    )));
                }
                ExpansionOrder {
                    s: self.s,
                    m,
                    alpha_frac: self.s - m as f64,
                }
            }
        };
        model
            .cumulants_to(order.m)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok((model, order))
    }

    /// The weight powers actually reported: explicit list, or {0, m, s}.
    pub fn effective_weights(&self, order: ExpansionOrder) -> Vec<f64> {
        if self.weight_powers.is_empty() {
            vec![0.0, order.m as f64, order.s]
        } else {
            self.weight_powers.clone()
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hash_json(&serde_json::to_value(self).expect("config serializes"))
    }
}

/// SHA-256 hex digest of a JSON value in its serde canonical rendering.
pub fn hash_json(value: &serde_json::Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(value.to_string().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> String {
        r#"{"model":"uniform","s":4.0,"n_list":[4,8,16]}"#.into()
    }

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json_str(&base_json()).unwrap();
        assert_eq!(cfg.half_width, 8.0);
        assert_eq!(cfg.cutoff, CutoffRule::Auto);
        let (model, order) = cfg.resolve().unwrap();
        assert_eq!(model.name, "uniform");
        assert_eq!(order.m, 4);
        assert_eq!(cfg.effective_weights(order), vec![0.0, 4.0, 4.0]);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = r#"{"model":"uniform","s":4.0,"n_list":[4],"bogus":1}"#;
        assert!(matches!(
            ExperimentConfig::from_json_str(text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rejects_bad_fields() {
        for (field, bad) in [
            ("s", r#"{"model":"uniform","s":1.0,"n_list":[4]}"#),
            ("order", r#"{"model":"uniform","s":4.0,"n_list":[8,4]}"#),
            ("small n", r#"{"model":"uniform","s":4.0,"n_list":[1,4]}"#),
            ("model", r#"{"model":"nope","s":4.0,"n_list":[4]}"#),
            (
                "s_max",
                r#"{"model":"student45","s":4.8,"n_list":[4]}"#,
            ),
        ] {
            let cfg = ExperimentConfig::from_json_str(bad);
            assert!(
                cfg.is_err() || cfg.unwrap().resolve().is_err(),
                "{field} accepted"
            );
        }
    }

    #[test]
    fn hash_stable_and_sensitive() {
        let a = ExperimentConfig::from_json_str(&base_json()).unwrap();
        let b = ExperimentConfig::from_json_str(&base_json()).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.s = 4.5;
        assert_ne!(a.hash(), c.hash());
    }
}
