//! Hypothesis tests and correlation.
//!
//! The paired test treats per-subgroup integrated deltas as a one-sample
//! problem against zero. The classical baseline is Welch's unequal-variance
//! two-sample test on pooled per-sample values. p-values come from the
//! regularized incomplete beta function in [`crate::special`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::t_two_sided;
use crate::sum::fsum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    #[serde(with = "nonfinite")]
    pub t_statistic: f64,
    /// `n − 1` for the paired test; Welch–Satterthwaite (non-integer) for
    /// the two-sample test.
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub n: usize,
    pub mean_diff: f64,
    /// Zero variance: the statistic is undefined and `p_value` is 0 or 1.
    pub degenerate: bool,
}

/// JSON has no infinities; degenerate statistics are written as strings.
pub mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

impl std::str::FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(Self::Pearson),
            "spearman" => Ok(Self::Spearman),
            other => Err(Error::invalid(format!("unknown correlation method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub coefficient: f64,
    pub n: usize,
    pub method: CorrelationMethod,
}

fn mean(xs: &[f64]) -> f64 {
    // constant input must give zero deviations, which the division need not
    if xs.iter().all(|&x| x == xs[0]) {
        return xs[0];
    }
    fsum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample variance, two-pass.
fn variance(xs: &[f64], m: f64) -> f64 {
    fsum(xs.iter().map(|x| (x - m) * (x - m))) / (xs.len() - 1) as f64
}

fn degenerate(mean_diff: f64, df: f64, n: usize) -> TTestResult {
    let zero = mean_diff == 0.0;
    TTestResult {
        t_statistic: if zero { 0.0 } else { f64::INFINITY.copysign(mean_diff) },
        degrees_of_freedom: df,
        p_value: if zero { 1.0 } else { 0.0 },
        n,
        mean_diff,
        degenerate: true,
    }
}

/// One-sample t-test of `deltas` against zero mean.
pub fn paired_ttest(deltas: &[f64]) -> Result<TTestResult> {
    let n = deltas.len();
    if n < 2 {
        return Err(Error::InsufficientSamples(format!(
            "paired t-test needs at least 2 subgroups, got {n}"
        )));
    }
    let m = mean(deltas);
    let var = variance(deltas, m);
    let df = (n - 1) as f64;
    if var == 0.0 {
        return Ok(degenerate(m, df, n));
    }
    let t = m / (var.sqrt() / (n as f64).sqrt());
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: t_two_sided(t, df),
        n,
        mean_diff: m,
        degenerate: false,
    })
}

/// Welch's two-sample t-test of `group_a` against `group_b`.
pub fn two_sample_ttest(group_a: &[f64], group_b: &[f64]) -> Result<TTestResult> {
    let (na, nb) = (group_a.len(), group_b.len());
    if na < 2 || nb < 2 {
        return Err(Error::InsufficientSamples(format!(
            "two-sample t-test needs at least 2 values per group, got {na} and {nb}"
        )));
    }
    let (ma, mb) = (mean(group_a), mean(group_b));
    let va = variance(group_a, ma) / na as f64;
    let vb = variance(group_b, mb) / nb as f64;
    let diff = ma - mb;
    let se2 = va + vb;
    let df = if se2 == 0.0 {
        (na + nb - 2) as f64
    } else {
        se2 * se2 / (va * va / (na - 1) as f64 + vb * vb / (nb - 1) as f64)
    };
    if se2 == 0.0 {
        return Ok(degenerate(diff, df, na + nb));
    }
    let t = diff / se2.sqrt();
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: t_two_sided(t, df),
        n: na + nb,
        mean_diff: diff,
        degenerate: false,
    })
}

/// Two-sided Student-t survival probability `2·P(T ≥ |t|)`.
pub fn student_t_sf(t: f64, df: u64) -> Result<f64> {
    if df < 1 {
        return Err(Error::invalid("degrees of freedom must be at least 1"));
    }
    if t.is_nan() {
        return Err(Error::invalid("t statistic is NaN"));
    }
    Ok(t_two_sided(t, df as f64))
}

/// Bonferroni-adjusted significance threshold `alpha / m`.
pub fn bonferroni(alpha: f64, m: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0, 1), got {alpha}")));
    }
    if m < 1 {
        return Err(Error::invalid("number of tests must be at least 1"));
    }
    Ok(alpha / m as f64)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my) = (mean(x), mean(y));
    let sxx = fsum(x.iter().map(|a| (a - mx) * (a - mx)));
    let syy = fsum(y.iter().map(|b| (b - my) * (b - my)));
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("input vector is constant".into()));
    }
    let sxy = fsum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

pub fn correlation(x: &[f64], y: &[f64], method: CorrelationMethod) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "correlation inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientSamples("correlation needs at least 2 points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("correlation inputs must be finite"));
    }
    let coefficient = match method {
        CorrelationMethod::Pearson => pearson(x, y)?,
        CorrelationMethod::Spearman => pearson(&average_ranks(x), &average_ranks(y))?,
    };
    Ok(CorrelationResult {
        coefficient,
        n: x.len(),
        method,
    })
}

/// Symmetric matrix of pairwise correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub method: CorrelationMethod,
    pub values: Vec<Vec<f64>>,
}

pub fn correlation_matrix(
    vectors: &[(String, Vec<f64>)],
    method: CorrelationMethod,
) -> Result<CorrelationMatrix> {
    if let Some((_, first)) = vectors.first() {
        if let Some((name, v)) = vectors.iter().find(|(_, v)| v.len() != first.len()) {
            return Err(Error::invalid(format!(
                "vector `{name}` has {} entries, expected {}",
                v.len(),
                first.len()
            )));
        }
    }
    let n = vectors.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        values[i][i] = 1.0;
        for j in i + 1..n {
            let r = correlation(&vectors[i].1, &vectors[j].1, method)?.coefficient;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: vectors.iter().map(|(name, _)| name.clone()).collect(),
        method,
        values,
    })
}
