//! Hyperparameter combinations.

use mini_gp::ObjectiveFamily;
use serde::Serialize;

use crate::config::{Algorithm, ExperimentConfig, UcbRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Params {
    Gp {
        bandwidth_sq: f64,
        /// Only for the batched variants.
        c: Option<f64>,
        beta_scale: f64,
    },
    Epsilon {
        a: f64,
        b: f64,
    },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Combination {
    /// Position in enumeration order; outputs are sorted by it.
    pub index: usize,
    pub id: String,
    #[serde(serialize_with = "ser_family")]
    pub objective: ObjectiveFamily,
    pub algorithm: Algorithm,
    pub params: Params,
}

/// Whether to sweep every list or take only the first value of each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    First,
    Full,
}

fn pick(v: &[f64], mode: SweepMode) -> &[f64] {
    match mode {
        SweepMode::First => &v[..v.len().min(1)],
        SweepMode::Full => v,
    }
}

/// Combinations in a fixed order: objective, then algorithm, then the
/// algorithm's grid in row-major order.
pub fn combinations(cfg: &ExperimentConfig, mode: SweepMode) -> Vec<Combination> {
    let h = &cfg.hyper;
    let mut out = Vec::new();
    for &objective in &cfg.environment.objectives {
        for &algorithm in &cfg.algorithms {
            let scales: &[f64] = match algorithm {
                Algorithm::MiniGpUcb | Algorithm::GpUcb if h.ucb_rule == UcbRule::Bayesian => &h.beta_scale[..1],
                _ => pick(&h.beta_scale, mode),
            };
            let params: Vec<Params> = match algorithm {
                Algorithm::MiniGpUcb | Algorithm::MiniGpEi => {
                    let mut v = Vec::new();
                    for &bandwidth_sq in pick(&h.bandwidth_sq, mode) {
                        for &c in pick(&h.c, mode) {
                            for &beta_scale in scales {
                                v.push(Params::Gp {
                                    bandwidth_sq,
                                    c: Some(c),
                                    beta_scale,
                                });
                            }
                        }
                    }
                    v
                }
                Algorithm::GpUcb => pick(&h.bandwidth_sq, mode)
                    .iter()
                    .flat_map(|&bandwidth_sq| {
                        scales.iter().map(move |&beta_scale| Params::Gp {
                            bandwidth_sq,
                            c: None,
                            beta_scale,
                        })
                    })
                    .collect(),
                Algorithm::EpsilonGreedy => pick(&h.epsilon_a, mode)
                    .iter()
                    .flat_map(|&a| pick(&h.epsilon_b, mode).iter().map(move |&b| Params::Epsilon { a, b }))
                    .collect(),
                Algorithm::Uniform => vec![Params::None],
            };
            for p in params {
                out.push(Combination {
                    index: out.len(),
                    id: combination_id(objective, algorithm, &p),
                    objective,
                    algorithm,
                    params: p,
                });
            }
        }
    }
    out
}

fn combination_id(objective: ObjectiveFamily, algorithm: Algorithm, p: &Params) -> String {
    let tail = match *p {
        Params::Gp {
            bandwidth_sq,
            c,
            beta_scale,
        } => {
            let c = c.map(|c| format!("_c{c}")).unwrap_or_default();
            format!("_bw{bandwidth_sq}{c}_s{beta_scale}")
        }
        Params::Epsilon { a, b } => format!("_a{a}_b{b:.4}"),
        Params::None => String::new(),
    };
    format!("{}_{}{}", objective.name(), algorithm, tail)
}

fn ser_family<S: serde::Serializer>(f: &ObjectiveFamily, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(f.name())
}
