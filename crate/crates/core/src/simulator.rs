//! Attribute-conditioned score simulator with known ground-truth bias.
//!
//! A record with label combination `c` is scored by drawing from
//! `Normal(μ₀ + Σ β_label, σ_c)` and clamping to `[0, 1]`, where the sum runs
//! over the effects whose label appears in `c` and `σ_c` is the std
//! override of the last such effect (in spec order) that carries one.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{AttributeRef, AttributeSchema};
use crate::scores::{ClassLabel, Contrast, ScoreRecord, ScoreTable, TableMeta};
use crate::special::{normal_cdf, normal_pdf};
use crate::sum::fsum;

/// Generator used for every random stream in the crate.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), SplitMix64 per-combination sub-seeds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectDoc {
    pub group: String,
    pub label: String,
    #[serde(default)]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
}

/// Serialized form of a [`SimSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpecDoc {
    pub base_mean: f64,
    pub base_std: f64,
    pub k: usize,
    pub seed: u64,
    #[serde(default)]
    pub effects: Vec<EffectDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effect {
    pub attr: AttributeRef,
    pub beta: f64,
    pub std: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SimSpec {
    schema: Arc<AttributeSchema>,
    pub base_mean: f64,
    pub base_std: f64,
    pub k: usize,
    pub seed: u64,
    pub effects: Vec<Effect>,
}

pub fn load_sim_spec(source: &str, schema: Arc<AttributeSchema>) -> Result<SimSpec> {
    let doc: SimSpecDoc = serde_json::from_str(source).map_err(|e| {
        Error::invalid(format!(
            "simulation spec line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    SimSpec::from_doc(&doc, schema)
}

impl SimSpec {
    pub fn new(schema: Arc<AttributeSchema>, base_mean: f64, base_std: f64, k: usize, seed: u64) -> Result<Self> {
        let spec = SimSpec {
            schema,
            base_mean,
            base_std,
            k,
            seed,
            effects: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_doc(doc: &SimSpecDoc, schema: Arc<AttributeSchema>) -> Result<Self> {
        let effects = doc
            .effects
            .iter()
            .map(|e| {
                Ok(Effect {
                    attr: schema.attribute(&e.group, &e.label)?,
                    beta: e.beta,
                    std: e.std,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = SimSpec {
            schema,
            base_mean: doc.base_mean,
            base_std: doc.base_std,
            k: doc.k,
            seed: doc.seed,
            effects,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_doc(&self) -> SimSpecDoc {
        SimSpecDoc {
            base_mean: self.base_mean,
            base_std: self.base_std,
            k: self.k,
            seed: self.seed,
            effects: self
                .effects
                .iter()
                .map(|e| EffectDoc {
                    group: self.schema.group_name(e.attr).to_string(),
                    label: self.schema.label_name(e.attr).to_string(),
                    beta: e.beta,
                    std: e.std,
                })
                .collect(),
        }
    }

    /// Adds an effect by `group.label` name.
    pub fn with_effect(mut self, attr: &str, beta: f64, std: Option<f64>) -> Result<Self> {
        let attr = self.schema.resolve(attr)?;
        self.effects.push(Effect { attr, beta, std });
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn schema(&self) -> &Arc<AttributeSchema> {
        &self.schema
    }

    fn validate(&self) -> Result<()> {
        if !(self.base_mean > 0.0 && self.base_mean < 1.0) {
            return Err(Error::invalid("base_mean must lie in (0, 1)"));
        }
        if !(self.base_std > 0.0 && self.base_std.is_finite()) {
            return Err(Error::invalid("base_std must be positive"));
        }
        if self.k < 1 {
            return Err(Error::invalid("k must be at least 1"));
        }
        for e in &self.effects {
            self.schema.check_attr(e.attr)?;
            if !e.beta.is_finite() {
                return Err(Error::invalid("effect beta must be finite"));
            }
            if let Some(s) = e.std {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::invalid("effect std must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Mean and std of the unclamped score distribution for a combination.
    pub fn parameters(&self, combination: u64) -> (f64, f64) {
        let mut mean = self.base_mean;
        let mut std = self.base_std;
        for e in &self.effects {
            if self.schema.label_of(combination, e.attr.group) == e.attr.label {
                mean += e.beta;
                if let Some(s) = e.std {
                    std = s;
                }
            }
        }
        (mean, std)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Draws `k` clamped scores for every combination of the schema.
pub fn simulate(spec: &SimSpec) -> Result<ScoreTable> {
    spec.validate()?;
    let count = spec.schema.combination_count();
    let k = spec.k;
    let per_combination: Vec<Vec<ScoreRecord>> = (0..count)
        .into_par_iter()
        .map(|c| {
            let (mean, std) = spec.parameters(c);
            let normal = Normal::new(mean, std).expect("validated parameters");
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(spec.seed, c));
            (0..k)
                .map(|r| ScoreRecord {
                    sample_id: format!("c{c}-r{r}"),
                    combination: c,
                    score: normal.sample(&mut rng).clamp(0.0, 1.0),
                    class: ClassLabel::Synthetic,
                })
                .collect()
        })
        .collect();
    ScoreTable::new(
        spec.schema.clone(),
        per_combination.into_iter().flatten().collect(),
        TableMeta {
            detector: "simulated".into(),
            dataset: format!("simulator(seed={})", spec.seed),
        },
    )
}

/// Mean of `clamp(X, 0, 1)` for `X ~ Normal(mean, std)`.
pub fn clipped_mean(mean: f64, std: f64) -> f64 {
    let alpha = (0.0 - mean) / std;
    let gamma = (1.0 - mean) / std;
    mean + std * (normal_pdf(alpha) - normal_pdf(gamma))
        + (0.0 - mean) * normal_cdf(alpha)
        + (1.0 - mean) * (1.0 - normal_cdf(gamma))
}

/// Expected `brisk` of a contrast under the simulator's generative model
/// for a balanced design.
pub fn analytic_brisk(spec: &SimSpec, contrast: impl Into<Contrast>) -> Result<f64> {
    let contrast = contrast.into();
    contrast.validate(&spec.schema)?;
    let schema = &spec.schema;
    let g = contrast.attr.group;
    let baseline: Vec<usize> = (0..schema.label_count(g))
        .filter(|&l| contrast.side_of(l) == Some(crate::scores::Side::Absent))
        .collect();
    if baseline.is_empty() {
        return Err(Error::NotMeasurable {
            attribute: contrast.name(schema),
            reason: "group has no other label".into(),
        });
    }
    let expected = |c: u64| {
        let (m, s) = spec.parameters(c);
        clipped_mean(m, s)
    };
    let subgroups = schema.subgroup_count(g);
    let deltas = (0..subgroups).map(|sub| {
        let present = expected(schema.join(sub, g, contrast.attr.label));
        let absent = fsum(baseline.iter().map(|&l| expected(schema.join(sub, g, l)))) / baseline.len() as f64;
        present - absent
    });
    Ok(fsum(deltas) / subgroups as f64)
}

fn sample_size(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

/// Uniform sample of `⌈fraction·N⌉` records without replacement, kept in
/// their original order.
pub fn subsample(table: &ScoreTable, fraction: f64, seed: u64) -> Result<ScoreTable> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    if fraction == 1.0 {
        return Ok(table.clone());
    }
    let n = table.len();
    let m = sample_size(fraction, n).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, u64::MAX));
    let mut keep = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, n, m) {
        keep[i] = true;
    }
    Ok(table.filtered(|i, _| keep[i]))
}
