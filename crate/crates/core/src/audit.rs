//! End-to-end audits over one or more score tables: per-attribute bias
//! reports with Bonferroni-corrected paired t-tests, cross-detector and
//! training-proportion correlations, paired-versus-classical p-value
//! comparison, and the subsample stability sweep.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{attribute_bias, eod, AttributeBias, BriskStarMode, EodMode};
use crate::schema::AttributeSchema;
use crate::scores::{ClassLabel, Contrast, ScoreTable, Side};
use crate::simulator::{subsample, RNG_ALGORITHM};
use crate::stats::{
    bonferroni, correlation, correlation_matrix, paired_ttest, two_sample_ttest, CorrelationMatrix,
    CorrelationMethod, CorrelationResult, TTestResult,
};
use crate::sum::fsum;

/// How the absent side of every audited attribute is formed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "label")]
pub enum CompareMode {
    /// Attribute against all other labels of its group.
    #[default]
    PooledRest,
    /// Every label of the named label's group against that label alone.
    Pairwise(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub alpha: f64,
    /// Bonferroni denominator; defaults to the number of executed tests.
    pub m_override: Option<u64>,
    pub brisk_star_mode: BriskStarMode,
    pub eod_mode: EodMode,
    pub compare: CompareMode,
    /// Largest tolerated fraction of subgroups lacking one side.
    pub max_skip: f64,
    /// Restrict the audit to these attributes (`group.label` or bare label).
    pub attributes: Option<Vec<String>>,
    pub seed: u64,
    /// Keep per-subgroup deltas in the report; off by default because a
    /// full facial-attribute audit has ~15k subgroups per attribute.
    #[serde(default)]
    pub subgroup_deltas: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            m_override: None,
            brisk_star_mode: BriskStarMode::SignedExtremum,
            eod_mode: EodMode::Integrated,
            compare: CompareMode::PooledRest,
            max_skip: 0.1,
            attributes: None,
            seed: 0,
            subgroup_deltas: false,
        }
    }
}

impl AuditConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.max_skip) {
            return Err(Error::invalid("max-skip must be in [0, 1]"));
        }
        if let EodMode::AtThreshold(t) = self.eod_mode {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid("EOD threshold must be in [0, 1]"));
            }
        }
        Ok(())
    }

    /// The contrasts audited for `schema`, in schema order.
    pub fn contrasts(&self, schema: &AttributeSchema) -> Result<Vec<Contrast>> {
        let mut contrasts: Vec<Contrast> = match &self.compare {
            CompareMode::PooledRest => schema.attributes().map(Contrast::pooled).collect(),
            CompareMode::Pairwise(name) => {
                let base = schema.resolve(name)?;
                (0..schema.label_count(base.group))
                    .filter(|&l| l != base.label)
                    .map(|l| {
                        Contrast::pairwise(
                            crate::schema::AttributeRef {
                                group: base.group,
                                label: l,
                            },
                            base.label,
                        )
                    })
                    .collect()
            }
        };
        if let Some(filter) = &self.attributes {
            let wanted = filter
                .iter()
                .map(|n| schema.resolve(n))
                .collect::<Result<Vec<_>>>()?;
            contrasts.retain(|c| wanted.contains(&c.attr));
        }
        // single-label groups have nothing to compare against
        contrasts.retain(|c| schema.label_count(c.attr.group) > 1);
        Ok(contrasts)
    }
}

/// Outcome of auditing one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EntryStatus {
    Ok,
    NotMeasurable { reason: String },
    SkipLimitExceeded { skipped_fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeEntry {
    pub attribute: String,
    pub group: String,
    pub label: String,
    /// `rest` or the single baseline label.
    pub baseline: String,
    pub status: EntryStatus,
    pub bias: Option<AttributeBias>,
    /// Headline brisk★ under the configured mode.
    pub brisk_star: Option<f64>,
    pub ttest: Option<TTestResult>,
    pub ttest_note: Option<String>,
    pub significant: bool,
}

impl AttributeEntry {
    pub fn is_ok(&self) -> bool {
        self.status == EntryStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub detector: String,
    pub dataset: String,
    pub records: usize,
    pub warnings: Vec<String>,
    pub entries: Vec<AttributeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub detector: String,
    pub dataset: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub config: AuditConfig,
    pub inputs: Vec<InputEcho>,
    pub tests_executed: u64,
    pub bonferroni_m: u64,
    pub adjusted_alpha: f64,
    pub skipped_subgroups: u64,
    pub generated_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReportSet {
    pub metadata: RunMetadata,
    pub detectors: Vec<DetectorReport>,
}

impl BiasReportSet {
    /// Re-derives every significance flag from the stored p-values.
    pub fn recompute_flags(&self) -> Vec<bool> {
        self.detectors
            .iter()
            .flat_map(|d| &d.entries)
            .map(|e| e.is_ok() && e.ttest.is_some_and(|t| t.p_value < self.metadata.adjusted_alpha))
            .collect()
    }

    pub fn any_not_measurable(&self) -> bool {
        self.detectors
            .iter()
            .flat_map(|d| &d.entries)
            .any(|e| matches!(e.status, EntryStatus::NotMeasurable { .. }))
    }
}

/// Wall-clock timestamp, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        });
    format!("unix:{secs}")
}

fn audit_one(table: &ScoreTable, contrast: &Contrast, config: &AuditConfig) -> AttributeEntry {
    let schema = table.schema();
    let group = schema.group_name(contrast.attr).to_string();
    let label = schema.label_name(contrast.attr).to_string();
    let baseline = match contrast.baseline {
        crate::scores::Baseline::Rest => "rest".to_string(),
        crate::scores::Baseline::Label(b) => schema.groups()[contrast.attr.group].labels[b].clone(),
    };
    let mut entry = AttributeEntry {
        attribute: contrast.name(schema),
        group,
        label,
        baseline,
        status: EntryStatus::Ok,
        bias: None,
        brisk_star: None,
        ttest: None,
        ttest_note: None,
        significant: false,
    };
    let mut bias = match attribute_bias(table, *contrast, config.eod_mode) {
        Ok(b) => b,
        Err(e) => {
            entry.status = EntryStatus::NotMeasurable { reason: e.to_string() };
            return entry;
        }
    };
    entry.brisk_star = Some(bias.brisk_star(config.brisk_star_mode).value);
    if bias.skipped_fraction() > config.max_skip {
        entry.status = EntryStatus::SkipLimitExceeded {
            skipped_fraction: bias.skipped_fraction(),
        };
    } else {
        match paired_ttest(&bias.deltas()) {
            Ok(t) => entry.ttest = Some(t),
            Err(e) => entry.ttest_note = Some(e.to_string()),
        }
    }
    if !config.subgroup_deltas {
        bias.subgroup_deltas = Vec::new();
    }
    entry.bias = Some(bias);
    entry
}

/// Audits every configured attribute of every table.
pub fn run_audit(tables: &[ScoreTable], config: &AuditConfig) -> Result<BiasReportSet> {
    run_audit_with_inputs(tables, config, Vec::new())
}

pub fn run_audit_with_inputs(
    tables: &[ScoreTable],
    config: &AuditConfig,
    inputs: Vec<InputEcho>,
) -> Result<BiasReportSet> {
    config.validate()?;
    let mut detectors = tables
        .par_iter()
        .map(|table| {
            let contrasts = config.contrasts(table.schema())?;
            let entries = contrasts
                .par_iter()
                .map(|c| audit_one(table, c, config))
                .collect();
            Ok(DetectorReport {
                detector: table.meta().detector.clone(),
                dataset: table.meta().dataset.clone(),
                records: table.len(),
                warnings: table.warnings().to_vec(),
                entries,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let executed = detectors
        .iter()
        .flat_map(|d| &d.entries)
        .filter(|e| e.ttest.is_some())
        .count() as u64;
    let m = match config.m_override {
        Some(m) if m < executed => {
            return Err(Error::invalid(format!(
                "m = {m} is smaller than the {executed} executed tests"
            )))
        }
        Some(m) => m,
        None => executed.max(1),
    };
    let adjusted = bonferroni(config.alpha, m)?;
    let mut skipped = 0;
    for entry in detectors.iter_mut().flat_map(|d| d.entries.iter_mut()) {
        entry.significant = entry.is_ok() && entry.ttest.is_some_and(|t| t.p_value < adjusted);
        if let Some(b) = &entry.bias {
            skipped += b.subgroups_skipped;
        }
    }
    Ok(BiasReportSet {
        metadata: RunMetadata {
            tool: "biasaudit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            inputs,
            tests_executed: executed,
            bonferroni_m: m,
            adjusted_alpha: adjusted,
            skipped_subgroups: skipped,
            generated_at: timestamp(),
        },
        detectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasMetric {
    #[default]
    Brisk,
    BriskStar,
}

/// Per-attribute bias values of one detector report, for entries that
/// were measured.
pub fn bias_vector(report: &DetectorReport, metric: BiasMetric) -> Vec<(String, f64)> {
    report
        .entries
        .iter()
        .filter(|e| e.bias.is_some() && !matches!(e.status, EntryStatus::NotMeasurable { .. }))
        .map(|e| {
            let b = e.bias.as_ref().unwrap();
            let v = match metric {
                BiasMetric::Brisk => b.brisk,
                BiasMetric::BriskStar => e.brisk_star.unwrap_or(b.brisk_star_signed.value),
            };
            (e.attribute.clone(), v)
        })
        .collect()
}

fn detector_label(d: &DetectorReport, all: &[DetectorReport]) -> String {
    if all.iter().filter(|o| o.detector == d.detector).count() > 1 {
        format!("{}@{}", d.detector, d.dataset)
    } else {
        d.detector.clone()
    }
}

/// Correlation between detectors' attribute-bias vectors.
pub fn compare_detectors(
    reports: &BiasReportSet,
    metric: BiasMetric,
    method: CorrelationMethod,
) -> Result<CorrelationMatrix> {
    let detectors = &reports.detectors;
    if detectors.len() < 2 {
        return Err(Error::InsufficientSamples(
            "detector comparison needs at least 2 detectors".into(),
        ));
    }
    let vectors: Vec<(String, Vec<(String, f64)>)> = detectors
        .iter()
        .map(|d| (detector_label(d, detectors), bias_vector(d, metric)))
        .collect();
    let names: Vec<&String> = vectors[0].1.iter().map(|(n, _)| n).collect();
    for (detector, v) in &vectors[1..] {
        let other: Vec<&String> = v.iter().map(|(n, _)| n).collect();
        if other != names {
            return Err(Error::invalid(format!(
                "attribute set of `{detector}` differs from `{}`",
                vectors[0].0
            )));
        }
    }
    let named: Vec<(String, Vec<f64>)> = vectors
        .into_iter()
        .map(|(d, v)| (d, v.into_iter().map(|(_, x)| x).collect()))
        .collect();
    correlation_matrix(&named, method)
}

/// Parses a proportions CSV (`attribute,proportion`).
pub fn load_proportions(source: &str) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Row { row: 1, message: e.to_string() })?
        .clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.into()))
    };
    let (a, p) = (col("attribute")?, col("proportion")?);
    let mut out = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Row { row: 0, message: e.to_string() })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let text = row.get(p).unwrap_or("");
        let value: f64 = text.parse().map_err(|_| Error::Row {
            row: line,
            message: format!("non-numeric proportion `{text}`"),
        })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Row {
                row: line,
                message: format!("proportion {value} out of range [0, 1]"),
            });
        }
        out.insert(row.get(a).unwrap_or("").to_string(), value);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionCorrelation {
    pub result: CorrelationResult,
    pub attributes: Vec<String>,
    pub missing: Vec<String>,
}

/// Correlates per-attribute bias with attribute prevalence in a training
/// set. Proportion keys may be `group.label` or the bare label.
pub fn correlate_with_proportions(
    bias: &[(String, f64)],
    proportions: &BTreeMap<String, f64>,
    method: CorrelationMethod,
) -> Result<ProportionCorrelation> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut attributes = Vec::new();
    let mut missing = Vec::new();
    for (name, value) in bias {
        let bare = name.split_once('.').map_or(name.as_str(), |(_, l)| l);
        match proportions.get(name).or_else(|| proportions.get(bare)) {
            Some(&p) => {
                xs.push(*value);
                ys.push(p);
                attributes.push(name.clone());
            }
            None => missing.push(name.clone()),
        }
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "only {} attribute(s) have a training proportion",
            xs.len()
        )));
    }
    Ok(ProportionCorrelation {
        result: correlation(&xs, &ys, method)?,
        attributes,
        missing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyComparison {
    pub attribute: String,
    /// Welch test on pooled per-sample scores, ignoring subgroups.
    pub classical: TTestResult,
    /// Paired test on per-subgroup integrated deltas.
    pub paired: TTestResult,
    pub gap: f64,
}

/// Classical and paired p-values per attribute, largest gap first.
///
/// Each score is its own threshold-integrated detection contribution
/// (`∫₀¹ [s ≥ t] dt = s`), so the classical test compares pooled scores.
/// With a single usable subgroup there is nothing to pair, and the paired
/// strategy reduces to the same Welch test restricted to that subgroup.
pub fn compare_test_strategies(table: &ScoreTable, contrasts: &[Contrast]) -> Result<Vec<StrategyComparison>> {
    let mut rows = contrasts
        .par_iter()
        .map(|c| {
            let present = table.pooled(c, Side::Present, ClassLabel::Synthetic);
            let absent = table.pooled(c, Side::Absent, ClassLabel::Synthetic);
            let classical = two_sample_ttest(&present, &absent)?;
            let bias = attribute_bias(table, *c, EodMode::Integrated)?;
            let paired = if bias.subgroup_deltas.len() >= 2 {
                paired_ttest(&bias.deltas())?
            } else {
                let sub = bias.subgroup_deltas[0].subgroup;
                two_sample_ttest(
                    &table.contrast_bucket(c, sub, Side::Present, ClassLabel::Synthetic),
                    &table.contrast_bucket(c, sub, Side::Absent, ClassLabel::Synthetic),
                )?
            };
            Ok(StrategyComparison {
                attribute: c.name(table.schema()),
                classical,
                paired,
                gap: classical.p_value - paired.p_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.gap.total_cmp(&a.gap));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub fraction: f64,
    /// Attribute-averaged |EOD| per successful repetition.
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub failed_repetitions: usize,
    /// Attribute exclusions summed over repetitions.
    pub excluded_attributes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub repetitions: usize,
    pub seed: u64,
    pub rng: String,
    pub points: Vec<SweepPoint>,
    /// Attribute-averaged |brisk| on the full table.
    pub reference_brisk: f64,
    /// Attribute-averaged |EOD| on the full table.
    pub reference_eod: f64,
}

fn mean_abs_eod(table: &ScoreTable, contrasts: &[Contrast]) -> (Option<f64>, usize) {
    let mut values = Vec::new();
    let mut excluded = 0;
    for c in contrasts {
        match eod(table, *c, EodMode::Integrated) {
            Ok(v) => values.push(v.abs()),
            Err(_) => excluded += 1,
        }
    }
    if values.is_empty() {
        (None, excluded)
    } else {
        (Some(fsum(values.iter().copied()) / values.len() as f64), excluded)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    match values {
        [] => (f64::NAN, f64::NAN),
        [first, rest @ ..] if rest.iter().all(|v| v == first) => (*first, 0.0),
        _ => {
            let n = values.len() as f64;
            let m = fsum(values.iter().copied()) / n;
            let var = fsum(values.iter().map(|v| (v - m) * (v - m))) / (n - 1.0);
            (m, var.sqrt())
        }
    }
}

/// Stability of the attribute-averaged |EOD| under random subsampling.
pub fn subsample_sweep(table: &ScoreTable, fractions: &[f64], repetitions: usize, seed: u64) -> Result<SweepResult> {
    if repetitions < 1 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::invalid(format!("fraction {f} outside (0, 1]")));
    }
    let contrasts = AuditConfig::default().contrasts(table.schema())?;
    let points = fractions
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            let runs = (0..repetitions)
                .into_par_iter()
                .map(|r| {
                    let rep_seed = seed
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add(((fi as u64) << 32) | r as u64);
                    let sub = subsample(table, fraction, rep_seed)?;
                    Ok(mean_abs_eod(&sub, &contrasts))
                })
                .collect::<Result<Vec<_>>>()?;
            let values: Vec<f64> = runs.iter().filter_map(|(v, _)| *v).collect();
            let (mean, std) = mean_std(&values);
            Ok(SweepPoint {
                fraction,
                mean,
                std,
                failed_repetitions: runs.iter().filter(|(v, _)| v.is_none()).count(),
                excluded_attributes: runs.iter().map(|(_, e)| e).sum(),
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let briskes: Vec<f64> = contrasts
        .iter()
        .filter_map(|c| crate::metrics::brisk(table, *c).ok())
        .map(f64::abs)
        .collect();
    Ok(SweepResult {
        repetitions,
        seed,
        rng: RNG_ALGORITHM.into(),
        points,
        reference_brisk: if briskes.is_empty() {
            f64::NAN
        } else {
            fsum(briskes.iter().copied()) / briskes.len() as f64
        },
        reference_eod: mean_abs_eod(table, &contrasts).0.unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{simulate, SimSpec};
    use std::sync::Arc;

    fn schema() -> Arc<AttributeSchema> {
        Arc::new(
            AttributeSchema::from_pairs(&[
                ("hair_type", &["straight", "wavy", "bald"]),
                ("gender", &["man", "woman"]),
                ("age", &["child", "young", "old"]),
            ])
            .unwrap(),
        )
    }

    fn named(table: ScoreTable, detector: &str) -> ScoreTable {
        let meta = crate::scores::TableMeta {
            detector: detector.into(),
            dataset: "sim".into(),
        };
        table.with_meta(meta)
    }

    #[test]
    fn identical_tables_identical_blocks() {
        let t = simulate(&SimSpec::new(schema(), 0.7, 0.05, 10, 1).unwrap()).unwrap();
        let report = run_audit(&[named(t.clone(), "a"), named(t, "b")], &AuditConfig::default()).unwrap();
        assert_eq!(report.detectors[0].entries, report.detectors[1].entries);
        assert_eq!(report.metadata.tests_executed, 16);
        assert_eq!(report.recompute_flags(), report.detectors.iter().flat_map(|d| &d.entries).map(|e| e.significant).collect::<Vec<_>>());
    }

    #[test]
    fn pairwise_mode_restricts_to_group() {
        let t = simulate(&SimSpec::new(schema(), 0.7, 0.05, 10, 1).unwrap()).unwrap();
        let config = AuditConfig {
            compare: CompareMode::Pairwise("bald".into()),
            ..AuditConfig::default()
        };
        let report = run_audit(&[t], &config).unwrap();
        let names: Vec<&str> = report.detectors[0].entries.iter().map(|e| e.attribute.as_str()).collect();
        assert_eq!(names, ["hair_type.straight:vs:bald", "hair_type.wavy:vs:bald"]);
    }

    #[test]
    fn m_override_below_executed_is_rejected() {
        let t = simulate(&SimSpec::new(schema(), 0.7, 0.05, 4, 1).unwrap()).unwrap();
        let config = AuditConfig {
            m_override: Some(3),
            ..AuditConfig::default()
        };
        assert!(run_audit(std::slice::from_ref(&t), &config).is_err());
        let config = AuditConfig {
            m_override: Some(250),
            ..AuditConfig::default()
        };
        assert_eq!(run_audit(&[t], &config).unwrap().metadata.adjusted_alpha, 4e-5);
    }

    #[test]
    fn skip_limit_marks_entry_and_continues() {
        let s = schema();
        let t = simulate(&SimSpec::new(s.clone(), 0.7, 0.05, 4, 1).unwrap()).unwrap();
        // drop every bald record in the `man` half: half of bald's subgroups lose a side
        let sparse = t.filtered(|_, r| !(s.label_of(r.combination, 0) == 2 && s.label_of(r.combination, 1) == 0));
        let report = run_audit(&[sparse], &AuditConfig::default()).unwrap();
        let bald = report.detectors[0].entries.iter().find(|e| e.attribute == "hair_type.bald").unwrap();
        assert!(matches!(bald.status, EntryStatus::SkipLimitExceeded { .. }));
        assert!(!bald.significant);
        assert!(bald.ttest.is_none());
        assert!(report.detectors[0].entries.iter().filter(|e| e.is_ok()).count() > 0);
    }

    #[test]
    fn proportions_parsing_and_correlation() {
        let props = load_proportions("attribute,proportion\nbald,0.1\nhair_type.wavy,0.4\nman,0.42\n").unwrap();
        assert_eq!(props.len(), 3);
        let bias = vec![
            ("hair_type.bald".to_string(), 0.2),
            ("hair_type.wavy".to_string(), 0.8),
            ("gender.man".to_string(), 0.84),
            ("age.old".to_string(), 0.0),
        ];
        let r = correlate_with_proportions(&bias, &props, CorrelationMethod::Pearson).unwrap();
        assert!((r.result.coefficient - 1.0).abs() < 1e-12);
        assert_eq!(r.missing, vec!["age.old".to_string()]);
        let constant: BTreeMap<String, f64> = [("bald".to_string(), 0.3), ("wavy".to_string(), 0.3)].into();
        assert!(matches!(
            correlate_with_proportions(&bias, &constant, CorrelationMethod::Pearson),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(load_proportions("attribute,proportion\nbald,1.5\n").is_err());
    }

    #[test]
    fn detector_comparison_signs() {
        let t = simulate(
            &SimSpec::new(schema(), 0.5, 0.05, 30, 2)
                .unwrap()
                .with_effect("bald", 0.05, None)
                .unwrap()
                .with_effect("old", -0.03, None)
                .unwrap(),
        )
        .unwrap();
        let flipped_records: Vec<_> = t
            .records()
            .iter()
            .map(|r| crate::scores::ScoreRecord {
                score: 1.0 - r.score,
                ..r.clone()
            })
            .collect();
        let flipped = ScoreTable::new(t.schema_arc().clone(), flipped_records, t.meta().clone()).unwrap();
        let report = run_audit(
            &[named(t.clone(), "a"), named(t, "dup"), named(flipped, "flip")],
            &AuditConfig::default(),
        )
        .unwrap();
        let m = compare_detectors(&report, BiasMetric::Brisk, CorrelationMethod::Pearson).unwrap();
        assert!((m.values[0][1] - 1.0).abs() < 1e-12);
        assert!((m.values[0][2] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_at_full_fraction_has_zero_spread() {
        let t = simulate(&SimSpec::new(schema(), 0.6, 0.1, 5, 3).unwrap()).unwrap();
        let sweep = subsample_sweep(&t, &[1.0, 0.5], 4, 9).unwrap();
        assert_eq!(sweep.points[0].std, 0.0);
        assert_eq!(sweep.points[0].mean, sweep.reference_eod);
        assert_eq!(sweep.points[1].values.len(), 4);
        assert!(subsample_sweep(&t, &[0.0], 4, 9).is_err());
    }

    #[test]
    fn sweep_counts_lost_attributes() {
        let t = simulate(&SimSpec::new(schema(), 0.6, 0.1, 1, 3).unwrap()).unwrap();
        // 18 records; 2 % keeps a single record, so every attribute loses a side
        let sweep = subsample_sweep(&t, &[0.02], 3, 1).unwrap();
        assert_eq!(sweep.points[0].failed_repetitions, 3);
        assert_eq!(sweep.points[0].excluded_attributes, 3 * 8);
    }
}
