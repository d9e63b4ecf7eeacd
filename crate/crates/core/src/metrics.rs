//! Bias quantities over a score table: per-subgroup and subgroup-averaged
//! TPR difference curves, their threshold integral (`brisk`), the extremal
//! value over thresholds (`brisk★`), and the pooled equal opportunity
//! difference (EOD).
//!
//! Empirical rates are step functions of the threshold, so every curve is
//! represented exactly by its breakpoints and integrated without sampling.
//! With the `score >= t` convention the detection rate is constant on each
//! half-open interval `(k_j, k_{j+1}]` between consecutive breakpoints.
//!
//! For scores confined to `[0, 1]`, `∫₀¹ P(S ≥ t) dt = E[S]`, so the integral
//! of a per-subgroup delta is the difference of the two bucket means. The
//! `brisk` value reported here is computed through that closed form; the
//! curve integral is kept alongside it and the two agree to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scores::{mean_score, ClassLabel, Contrast, ScoreTable, Side, SubgroupBuckets, TprStep};
use crate::sum::{exact_mean, fsum, ExactSum};

/// Which rate a curve tracks as a function of the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rate {
    /// Fraction of scores `>= t` (correct for the positive class).
    AtLeast,
    /// Fraction of scores `< t` (correct for the negative class).
    Below,
}

impl Rate {
    fn for_class(class: ClassLabel) -> Self {
        if class.is_positive() {
            Rate::AtLeast
        } else {
            Rate::Below
        }
    }

    /// Integral over `[0, 1]` of the present-minus-absent rate difference.
    fn integrated(self, mean_present: f64, mean_absent: f64) -> f64 {
        match self {
            Rate::AtLeast => mean_present - mean_absent,
            Rate::Below => mean_absent - mean_present,
        }
    }

    fn count(self, step: &TprStep, t: f64) -> usize {
        match self {
            Rate::AtLeast => step.count_at_least(t),
            Rate::Below => step.len() - step.count_at_least(t),
        }
    }
}

/// Piecewise-constant rate difference over thresholds in `[0, 1]`.
///
/// `knots` runs from 0 to 1; `values[j]` holds on `(knots[j], knots[j + 1]]`
/// and the curve is 0 at `t = 0`, where both rates coincide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCurve {
    knots: Vec<f64>,
    values: Vec<f64>,
}

/// An extremal value of a curve and the left endpoint of the interval
/// where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BriskStarMode {
    /// Maximum of the curve, taken literally.
    LiteralMax,
    /// Value of largest magnitude, keeping its sign.
    #[default]
    SignedExtremum,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "threshold")]
pub enum EodMode {
    /// Threshold-integrated pooled difference (mean score difference).
    #[default]
    Integrated,
    AtThreshold(f64),
}

impl DeltaCurve {
    /// Weighted step curve: value at `t` is the sum of the weights of the
    /// events on the correct side of `t`. Sums are exactly rounded so a curve
    /// built from negated weights is the exact negation.
    fn from_events(mut events: Vec<(f64, f64)>, rate: Rate) -> Self {
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut knots = vec![0.0];
        for &(s, _) in &events {
            if s > *knots.last().unwrap() && s < 1.0 {
                knots.push(s);
            }
        }
        knots.push(1.0);
        let intervals = knots.len() - 1;
        let mut values = vec![0.0; intervals];
        let mut acc = ExactSum::new();
        match rate {
            Rate::AtLeast => {
                // interval j takes the events with score >= knots[j + 1]
                let mut next = events.len();
                for j in (0..intervals).rev() {
                    while next > 0 && events[next - 1].0 >= knots[j + 1] {
                        next -= 1;
                        acc.add(events[next].1);
                    }
                    values[j] = acc.value();
                }
            }
            Rate::Below => {
                // interval j takes the events with score <= knots[j]
                let mut next = 0;
                for j in 0..intervals {
                    while next < events.len() && events[next].0 <= knots[j] {
                        acc.add(events[next].1);
                        next += 1;
                    }
                    values[j] = acc.value();
                }
            }
        }
        DeltaCurve { knots, values }
    }

    fn averaged(buckets: &[&SubgroupBuckets], rate: Rate) -> Self {
        let n = buckets.len() as f64;
        let mut events = Vec::new();
        for b in buckets {
            let wp = 1.0 / (b.present.len() as f64 * n);
            let wa = 1.0 / (b.absent.len() as f64 * n);
            events.extend(b.present.iter().map(|&s| (s, wp)));
            events.extend(b.absent.iter().map(|&s| (s, -wa)));
        }
        Self::from_events(events, rate)
    }

    /// The identically zero curve.
    pub fn zero() -> Self {
        DeltaCurve {
            knots: vec![0.0, 1.0],
            values: vec![0.0],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of the curve at threshold `t`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t > 1.0 {
            return 0.0;
        }
        // first knot >= t closes the interval containing t
        let k = self.knots.partition_point(|&x| x < t);
        self.values[k - 1]
    }

    /// Exact integral over `[0, 1]`.
    pub fn integral(&self) -> f64 {
        fsum(
            self.values
                .iter()
                .zip(self.knots.windows(2))
                .map(|(v, w)| v * (w[1] - w[0])),
        )
    }

    fn candidates(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        std::iter::once((0.0, 0.0)).chain(
            self.values
                .iter()
                .zip(&self.knots)
                .map(|(&v, &k)| (v, k)),
        )
    }

    /// Maximum over thresholds; ties resolve to the smallest threshold.
    pub fn literal_max(&self) -> Extremum {
        let mut best = Extremum { value: 0.0, threshold: 0.0 };
        for (value, threshold) in self.candidates() {
            if value > best.value {
                best = Extremum { value, threshold };
            }
        }
        best
    }

    /// Value of largest magnitude with its sign; ties resolve to the
    /// smallest threshold.
    pub fn signed_extremum(&self) -> Extremum {
        let mut best = Extremum { value: 0.0, threshold: 0.0 };
        for (value, threshold) in self.candidates() {
            if value.abs() > best.value.abs() {
                best = Extremum { value, threshold };
            }
        }
        best
    }

    pub fn extremum(&self, mode: BriskStarMode) -> Extremum {
        match mode {
            BriskStarMode::LiteralMax => self.literal_max(),
            BriskStarMode::SignedExtremum => self.signed_extremum(),
        }
    }
}

/// Exact TPR(present) − TPR(absent) over thresholds.
pub fn delta_curve(present: &TprStep, absent: &TprStep) -> Result<DeltaCurve> {
    if present.is_empty() || absent.is_empty() {
        return Err(Error::EmptyBucket);
    }
    let bucket = SubgroupBuckets {
        subgroup: 0,
        present: present.scores().to_vec(),
        absent: absent.scores().to_vec(),
    };
    Ok(DeltaCurve::averaged(&[&bucket], Rate::AtLeast))
}

pub fn integrate_delta(curve: &DeltaCurve) -> f64 {
    curve.integral()
}

/// Integrated delta of one subgroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupDelta {
    pub subgroup: u64,
    pub delta: f64,
    pub present: usize,
    pub absent: usize,
}

/// Full set of bias quantities for one contrast and one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeBias {
    pub attribute: String,
    pub contrast: Contrast,
    pub class: ClassLabel,
    pub brisk: f64,
    /// Integral of the averaged curve; equals `brisk` up to rounding.
    pub curve_integral: f64,
    pub brisk_star_signed: Extremum,
    pub brisk_star_literal: Extremum,
    pub eod: f64,
    pub eod_mode: EodMode,
    pub subgroups_total: u64,
    pub subgroups_used: u64,
    pub subgroups_skipped: u64,
    pub subgroup_deltas: Vec<SubgroupDelta>,
}

impl AttributeBias {
    pub fn brisk_star(&self, mode: BriskStarMode) -> Extremum {
        match mode {
            BriskStarMode::LiteralMax => self.brisk_star_literal,
            BriskStarMode::SignedExtremum => self.brisk_star_signed,
        }
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.subgroup_deltas.iter().map(|d| d.delta).collect()
    }

    pub fn skipped_fraction(&self) -> f64 {
        if self.subgroups_total == 0 {
            0.0
        } else {
            self.subgroups_skipped as f64 / self.subgroups_total as f64
        }
    }
}

/// Subgroups of a contrast with both sides populated.
struct Prepared {
    used: Vec<SubgroupBuckets>,
    total: u64,
}

fn prepare(table: &ScoreTable, contrast: &Contrast, class: ClassLabel) -> Result<Prepared> {
    contrast.validate(table.schema())?;
    let name = || contrast.name(table.schema());
    if table.class_count(class) == 0 {
        return Err(Error::NotMeasurable {
            attribute: name(),
            reason: format!("no records of class `{}`", class.as_str()),
        });
    }
    let used: Vec<SubgroupBuckets> = table
        .subgroup_buckets(contrast, class)
        .into_iter()
        .filter(|b| !b.present.is_empty() && !b.absent.is_empty())
        .collect();
    if used.is_empty() {
        return Err(Error::NotMeasurable {
            attribute: name(),
            reason: "no subgroup has both present and absent samples".into(),
        });
    }
    Ok(Prepared {
        used,
        total: table.schema().subgroup_count(contrast.attr.group),
    })
}

impl Prepared {
    fn curve(&self, rate: Rate) -> DeltaCurve {
        let refs: Vec<&SubgroupBuckets> = self.used.iter().collect();
        DeltaCurve::averaged(&refs, rate)
    }

    fn deltas(&self, rate: Rate) -> Vec<SubgroupDelta> {
        self.used
            .iter()
            .map(|b| SubgroupDelta {
                subgroup: b.subgroup,
                delta: rate.integrated(
                    exact_mean(&b.present).unwrap(),
                    exact_mean(&b.absent).unwrap(),
                ),
                present: b.present.len(),
                absent: b.absent.len(),
            })
            .collect()
    }
}

/// Pointwise mean over usable subgroups of the per-subgroup TPR deltas.
pub fn averaged_delta_curve(table: &ScoreTable, contrast: impl Into<Contrast>) -> Result<DeltaCurve> {
    let prepared = prepare(table, &contrast.into(), ClassLabel::Synthetic)?;
    Ok(prepared.curve(Rate::AtLeast))
}

/// Threshold-integrated, subgroup-averaged TPR difference.
pub fn brisk(table: &ScoreTable, contrast: impl Into<Contrast>) -> Result<f64> {
    let prepared = prepare(table, &contrast.into(), ClassLabel::Synthetic)?;
    Ok(mean_delta(&prepared.deltas(Rate::AtLeast)))
}

pub fn brisk_star(table: &ScoreTable, contrast: impl Into<Contrast>, mode: BriskStarMode) -> Result<Extremum> {
    Ok(averaged_delta_curve(table, contrast)?.extremum(mode))
}

fn mean_delta(deltas: &[SubgroupDelta]) -> f64 {
    fsum(deltas.iter().map(|d| d.delta)) / deltas.len() as f64
}

fn pooled_eod(table: &ScoreTable, contrast: &Contrast, class: ClassLabel, mode: EodMode) -> Result<f64> {
    let present = table.pooled(contrast, Side::Present, class);
    let absent = table.pooled(contrast, Side::Absent, class);
    if present.is_empty() || absent.is_empty() {
        return Err(Error::NotMeasurable {
            attribute: contrast.name(table.schema()),
            reason: "a pooled side is empty".into(),
        });
    }
    let rate = Rate::for_class(class);
    Ok(match mode {
        EodMode::Integrated => rate.integrated(mean_score(&present)?, mean_score(&absent)?),
        EodMode::AtThreshold(t) => {
            let p = crate::scores::tpr_step(&present)?;
            let a = crate::scores::tpr_step(&absent)?;
            rate.count(&p, t) as f64 / p.len() as f64 - rate.count(&a, t) as f64 / a.len() as f64
        }
    })
}

/// Equal opportunity difference over the pooled positive class, ignoring
/// subgroup structure.
pub fn eod(table: &ScoreTable, contrast: impl Into<Contrast>, mode: EodMode) -> Result<f64> {
    let contrast = contrast.into();
    contrast.validate(table.schema())?;
    pooled_eod(table, &contrast, ClassLabel::Synthetic, mode)
}

/// Every bias quantity for the correct-classification rate of `class`:
/// `score >= t` for synthetic records, `score < t` for real ones.
pub fn classwise_rate_delta(
    table: &ScoreTable,
    contrast: impl Into<Contrast>,
    class: ClassLabel,
    eod_mode: EodMode,
) -> Result<AttributeBias> {
    let contrast = contrast.into();
    let prepared = prepare(table, &contrast, class)?;
    let rate = Rate::for_class(class);
    let curve = prepared.curve(rate);
    let subgroup_deltas = prepared.deltas(rate);
    let used = subgroup_deltas.len() as u64;
    Ok(AttributeBias {
        attribute: contrast.name(table.schema()),
        contrast,
        class,
        brisk: mean_delta(&subgroup_deltas),
        curve_integral: curve.integral(),
        brisk_star_signed: curve.signed_extremum(),
        brisk_star_literal: curve.literal_max(),
        eod: pooled_eod(table, &contrast, class, eod_mode)?,
        eod_mode,
        subgroups_total: prepared.total,
        subgroups_used: used,
        subgroups_skipped: prepared.total.saturating_sub(used),
        subgroup_deltas,
    })
}

/// [`classwise_rate_delta`] for the positive (synthetic) class.
pub fn attribute_bias(table: &ScoreTable, contrast: impl Into<Contrast>, eod_mode: EodMode) -> Result<AttributeBias> {
    classwise_rate_delta(table, contrast, ClassLabel::Synthetic, eod_mode)
}

/// The negative-class rate curve, exposed for inspection.
pub fn classwise_delta_curve(table: &ScoreTable, contrast: impl Into<Contrast>, class: ClassLabel) -> Result<DeltaCurve> {
    let prepared = prepare(table, &contrast.into(), class)?;
    Ok(prepared.curve(Rate::for_class(class)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{AttributeRef, AttributeSchema};
    use crate::scores::{tpr_step, ScoreRecord, TableMeta};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn step(s: &[f64]) -> TprStep {
        tpr_step(s).unwrap()
    }

    #[test]
    fn identical_multisets_give_zero_curve() {
        let c = delta_curve(&step(&[0.3, 0.5, 0.5, 0.9]), &step(&[0.9, 0.5, 0.3, 0.5])).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
        assert_eq!(c.integral(), 0.0);
        assert_eq!(c.literal_max(), Extremum { value: 0.0, threshold: 0.0 });
        assert_eq!(c.signed_extremum(), Extremum { value: 0.0, threshold: 0.0 });
    }

    #[test]
    fn fully_separated() {
        let c = delta_curve(&step(&[1.0, 1.0]), &step(&[0.0, 0.0])).unwrap();
        assert_eq!(c.eval(0.0), 0.0);
        for t in [1e-9, 0.3, 0.999, 1.0] {
            assert_eq!(c.eval(t), 1.0);
        }
        assert_eq!(c.literal_max().value, 1.0);
        assert_eq!(c.integral(), 1.0);
    }

    #[test]
    fn three_regimes() {
        // hand enumeration: 0 on [0,0.4], 1 on (0.4,0.8], 0 on (0.8,1]
        let c = delta_curve(&step(&[0.8]), &step(&[0.4])).unwrap();
        for (t, want) in [(0.0, 0.0), (0.2, 0.0), (0.4, 0.0), (0.41, 1.0), (0.8, 1.0), (0.81, 0.0), (1.0, 0.0)] {
            assert_eq!(c.eval(t), want, "t = {t}");
        }
        assert!((c.integral() - 0.4).abs() < 1e-15);
        assert_eq!(c.literal_max(), Extremum { value: 1.0, threshold: 0.4 });
    }

    #[test]
    fn shifted_buckets_integrate_to_shift() {
        let absent: Vec<f64> = (0..50).map(|i| i as f64 * 0.9 / 49.0).collect();
        let present: Vec<f64> = absent.iter().map(|s| s + 0.1).collect();
        let c = delta_curve(&step(&present), &step(&absent)).unwrap();
        assert!((c.integral() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn empty_side_is_signalled() {
        assert!(matches!(tpr_step(&[]), Err(Error::EmptyBucket)));
    }

    fn table(schema: &Arc<AttributeSchema>, rows: &[(u64, f64, ClassLabel)]) -> ScoreTable {
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, &(c, s, class))| ScoreRecord {
                sample_id: i.to_string(),
                combination: c,
                score: s,
                class,
            })
            .collect();
        ScoreTable::new(schema.clone(), records, TableMeta::default()).unwrap()
    }

    fn two_by_two() -> Arc<AttributeSchema> {
        Arc::new(AttributeSchema::from_pairs(&[("a", &["x", "y"]), ("b", &["u", "v"])]).unwrap())
    }

    #[test]
    fn opposite_subgroups_cancel() {
        let s = two_by_two();
        let p = ClassLabel::Synthetic;
        // combos: (x,u)=0 (x,v)=1 (y,u)=2 (y,v)=3; attr a.x, subgroups by b
        let t = table(&s, &[(0, 0.7, p), (2, 0.5, p), (1, 0.5, p), (3, 0.7, p)]);
        let attr = AttributeRef { group: 0, label: 0 };
        let c = averaged_delta_curve(&t, attr).unwrap();
        assert!(c.integral().abs() < 1e-15);
        assert_eq!(brisk(&t, attr).unwrap(), 0.0);
    }

    #[test]
    fn not_measurable_without_overlap() {
        let s = two_by_two();
        let p = ClassLabel::Synthetic;
        let t = table(&s, &[(0, 0.7, p), (3, 0.5, p)]);
        let attr = AttributeRef { group: 0, label: 0 };
        match brisk(&t, attr) {
            Err(Error::NotMeasurable { attribute, .. }) => assert_eq!(attribute, "a.x"),
            other => panic!("unexpected {other:?}"),
        }
        // pooled sides exist, so EOD is still defined
        assert!((eod(&t, attr, EodMode::Integrated).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn skipped_subgroups_are_counted() {
        let s = two_by_two();
        let p = ClassLabel::Synthetic;
        let t = table(&s, &[(0, 0.7, p), (2, 0.5, p), (1, 0.5, p)]);
        let bias = attribute_bias(&t, AttributeRef { group: 0, label: 0 }, EodMode::Integrated).unwrap();
        assert_eq!(bias.subgroups_used, 1);
        assert_eq!(bias.subgroups_skipped, 1);
        assert_eq!(bias.subgroups_total, 2);
    }

    #[test]
    fn negative_class_all_zero_scores() {
        let s = two_by_two();
        let n = ClassLabel::Real;
        let t = table(&s, &[(0, 0.0, n), (2, 0.0, n), (1, 0.0, n), (3, 0.0, n)]);
        let attr = AttributeRef { group: 0, label: 0 };
        let curve = classwise_delta_curve(&t, attr, n).unwrap();
        // correct rate is 1 on both sides for every t > 0
        assert!(curve.values().iter().all(|&v| v == 0.0));
        let bias = classwise_rate_delta(&t, attr, n, EodMode::AtThreshold(0.5)).unwrap();
        assert_eq!(bias.brisk, 0.0);
        assert_eq!(bias.eod, 0.0);
        assert!(classwise_rate_delta(&t, attr, ClassLabel::Synthetic, EodMode::Integrated).is_err());
    }

    #[test]
    fn pairwise_contrast_ignores_other_siblings() {
        let s = Arc::new(AttributeSchema::from_pairs(&[("hair", &["blond", "black", "brown"])]).unwrap());
        let p = ClassLabel::Synthetic;
        let t = table(&s, &[(0, 0.6, p), (1, 0.7, p), (2, 0.1, p)]);
        let black = Contrast::pairwise(AttributeRef { group: 0, label: 1 }, 0);
        assert!((brisk(&t, black).unwrap() - 0.1).abs() < 1e-15);
        let pooled = brisk(&t, AttributeRef { group: 0, label: 1 }).unwrap();
        assert!((pooled - (0.7 - 0.35)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn curve_integral_is_mean_difference(
            present in prop::collection::vec(0.0f64..=1.0, 1..200),
            absent in prop::collection::vec(0.0f64..=1.0, 1..200),
        ) {
            let c = delta_curve(&step(&present), &step(&absent)).unwrap();
            let closed = mean_score(&present).unwrap() - mean_score(&absent).unwrap();
            prop_assert!((c.integral() - closed).abs() < 1e-12);
            prop_assert!(c.values().iter().all(|v| v.abs() <= 1.0 + 1e-15));
        }

        #[test]
        fn curve_matches_pointwise_rates(
            present in prop::collection::vec(0.0f64..=1.0, 1..50),
            absent in prop::collection::vec(0.0f64..=1.0, 1..50),
            t in 0.0f64..=1.0,
        ) {
            let (p, a) = (step(&present), step(&absent));
            let c = delta_curve(&p, &a).unwrap();
            prop_assert!((c.eval(t) - (p.eval(t) - a.eval(t))).abs() < 1e-12);
            for &s in present.iter().chain(&absent) {
                prop_assert!((c.eval(s) - (p.eval(s) - a.eval(s))).abs() < 1e-12);
            }
        }
    }
}
