//! Score tables: ingestion, validation, per-cell indexing and the
//! empirical TPR step function.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{AttributeRef, AttributeSchema, Combination, SubgroupKey};
use crate::sum::exact_mean;

/// Ground-truth class of a record. Synthetic samples are the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Synthetic,
    Real,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Synthetic => "synthetic",
            ClassLabel::Real => "real",
        }
    }

    pub fn is_positive(self) -> bool {
        self == ClassLabel::Synthetic
    }

    pub fn flipped(self) -> Self {
        match self {
            ClassLabel::Synthetic => ClassLabel::Real,
            ClassLabel::Real => ClassLabel::Synthetic,
        }
    }

    fn slot(self) -> usize {
        match self {
            ClassLabel::Synthetic => 0,
            ClassLabel::Real => 1,
        }
    }
}

impl std::str::FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthetic" => Ok(ClassLabel::Synthetic),
            "real" => Ok(ClassLabel::Real),
            other => Err(Error::invalid(format!(
                "class must be `synthetic` or `real`, got `{other}`"
            ))),
        }
    }
}

/// Which side of a contrast a bucket belongs to (x = 1 / x = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Present,
    Absent,
}

/// What the "absent" side of a contrast pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "label")]
pub enum Baseline {
    /// Every other label of the same group.
    Rest,
    /// A single other label of the same group.
    Label(usize),
}

/// The attribute under analysis together with its comparison baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Contrast {
    pub attr: AttributeRef,
    pub baseline: Baseline,
}

impl Contrast {
    pub fn pooled(attr: AttributeRef) -> Self {
        Self {
            attr,
            baseline: Baseline::Rest,
        }
    }

    pub fn pairwise(attr: AttributeRef, other_label: usize) -> Self {
        Self {
            attr,
            baseline: Baseline::Label(other_label),
        }
    }

    /// Which side a record with `label` in the analysed group falls on.
    pub fn side_of(&self, label: usize) -> Option<Side> {
        if label == self.attr.label {
            Some(Side::Present)
        } else {
            match self.baseline {
                Baseline::Rest => Some(Side::Absent),
                Baseline::Label(b) if b == label => Some(Side::Absent),
                Baseline::Label(_) => None,
            }
        }
    }

    pub fn validate(&self, schema: &AttributeSchema) -> Result<()> {
        schema.check_attr(self.attr)?;
        if let Baseline::Label(b) = self.baseline {
            schema.check_attr(AttributeRef {
                group: self.attr.group,
                label: b,
            })?;
            if b == self.attr.label {
                return Err(Error::invalid("pairwise baseline equals the attribute"));
            }
        }
        Ok(())
    }

    pub fn name(&self, schema: &AttributeSchema) -> String {
        match self.baseline {
            Baseline::Rest => schema.attr_name(self.attr),
            Baseline::Label(b) => format!(
                "{}:vs:{}",
                schema.attr_name(self.attr),
                schema.groups()[self.attr.group].labels[b]
            ),
        }
    }
}

impl From<AttributeRef> for Contrast {
    fn from(attr: AttributeRef) -> Self {
        Contrast::pooled(attr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub sample_id: String,
    /// Mixed-radix index of the record's label assignment.
    pub combination: u64,
    pub score: f64,
    pub class: ClassLabel,
}

impl ScoreRecord {
    pub fn assignment(&self, schema: &AttributeSchema) -> Combination {
        schema
            .decode(self.combination)
            .expect("record combinations are validated at construction")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMeta {
    pub detector: String,
    pub dataset: String,
}

/// Present and absent scores of one subgroup.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupBuckets {
    pub subgroup: u64,
    pub present: Vec<f64>,
    pub absent: Vec<f64>,
}

/// Validated, indexed score records for one detector/dataset pair.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    schema: Arc<AttributeSchema>,
    records: Vec<ScoreRecord>,
    meta: TableMeta,
    warnings: Vec<String>,
    // per class: combination index -> scores in record order
    cells: [BTreeMap<u64, Vec<f64>>; 2],
}

pub(crate) fn check_score(score: f64) -> std::result::Result<(), String> {
    if !score.is_finite() {
        Err(format!("score {score} is not finite"))
    } else if !(0.0..=1.0).contains(&score) {
        Err(format!("score {score} out of range [0, 1]"))
    } else {
        Ok(())
    }
}

impl ScoreTable {
    pub fn new(
        schema: Arc<AttributeSchema>,
        records: Vec<ScoreRecord>,
        meta: TableMeta,
    ) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            check_score(r.score).map_err(|message| Error::Row { row: i + 1, message })?;
            if r.combination >= schema.combination_count() {
                return Err(Error::Row {
                    row: i + 1,
                    message: format!("combination index {} out of range", r.combination),
                });
            }
        }
        let mut cells: [BTreeMap<u64, Vec<f64>>; 2] = Default::default();
        for r in &records {
            cells[r.class.slot()]
                .entry(r.combination)
                .or_default()
                .push(r.score);
        }
        Ok(Self {
            schema,
            records,
            meta,
            warnings: Vec::new(),
            cells,
        })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<AttributeSchema> {
        &self.schema
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn with_meta(mut self, meta: TableMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Non-fatal ingestion findings (duplicate ids, ignored columns).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn class_count(&self, class: ClassLabel) -> usize {
        self.cells[class.slot()].values().map(Vec::len).sum()
    }

    /// Scores of a single combination cell.
    pub fn cell(&self, combination: u64, class: ClassLabel) -> &[f64] {
        self.cells[class.slot()]
            .get(&combination)
            .map_or(&[], Vec::as_slice)
    }

    /// Scores of `class` records in `subgroup` whose label in the withheld
    /// group equals the attribute (present) or any other label (absent).
    pub fn bucket(
        &self,
        attr: AttributeRef,
        subgroup: &SubgroupKey,
        side: Side,
        class: ClassLabel,
    ) -> Result<Vec<f64>> {
        self.schema.check_attr(attr)?;
        if subgroup.withheld != attr.group {
            return Err(Error::invalid(
                "subgroup key withholds a different group than the attribute",
            ));
        }
        let index = self.schema.encode_subgroup(subgroup)?;
        Ok(self.contrast_bucket(&Contrast::pooled(attr), index, side, class))
    }

    /// Bucket lookup by subgroup index for an arbitrary contrast.
    pub fn contrast_bucket(
        &self,
        contrast: &Contrast,
        subgroup: u64,
        side: Side,
        class: ClassLabel,
    ) -> Vec<f64> {
        let g = contrast.attr.group;
        let mut out = Vec::new();
        for label in 0..self.schema.label_count(g) {
            if contrast.side_of(label) == Some(side) {
                let combo = self.schema.join(subgroup, g, label);
                out.extend_from_slice(self.cell(combo, class));
            }
        }
        out
    }

    /// Every subgroup with at least one record on either side, in subgroup
    /// index order. Sibling cells are pooled in label order.
    pub fn subgroup_buckets(&self, contrast: &Contrast, class: ClassLabel) -> Vec<SubgroupBuckets> {
        let g = contrast.attr.group;
        type Cells<'a> = Vec<(usize, &'a [f64])>;
        let mut map: BTreeMap<u64, (Cells, Cells)> = BTreeMap::new();
        for (&combo, scores) in &self.cells[class.slot()] {
            let label = self.schema.label_of(combo, g);
            let Some(side) = contrast.side_of(label) else {
                continue;
            };
            let sub = self.schema.subgroup_index_of(combo, g);
            let entry = map.entry(sub).or_default();
            match side {
                Side::Present => entry.0.push((label, scores)),
                Side::Absent => entry.1.push((label, scores)),
            }
        }
        map.into_iter()
            .map(|(subgroup, (mut p, mut a))| {
                p.sort_by_key(|x| x.0);
                a.sort_by_key(|x| x.0);
                SubgroupBuckets {
                    subgroup,
                    present: p.into_iter().flat_map(|x| x.1.iter().copied()).collect(),
                    absent: a.into_iter().flat_map(|x| x.1.iter().copied()).collect(),
                }
            })
            .collect()
    }

    /// All scores on one side of a contrast, ignoring subgroups.
    pub fn pooled(&self, contrast: &Contrast, side: Side, class: ClassLabel) -> Vec<f64> {
        let g = contrast.attr.group;
        self.cells[class.slot()]
            .iter()
            .filter(|(&combo, _)| contrast.side_of(self.schema.label_of(combo, g)) == Some(side))
            .flat_map(|(_, s)| s.iter().copied())
            .collect()
    }

    /// A new table holding the records selected by `keep`, in order.
    pub fn filtered(&self, keep: impl Fn(usize, &ScoreRecord) -> bool) -> Self {
        let records = self
            .records
            .iter()
            .enumerate()
            .filter(|(i, r)| keep(*i, r))
            .map(|(_, r)| r.clone())
            .collect();
        ScoreTable::new(self.schema.clone(), records, self.meta.clone())
            .expect("subset of a valid table is valid")
    }

    /// Writes the table in the scores CSV format.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["sample_id", "score", "class"];
        header.extend(self.schema.groups().iter().map(|g| g.name.as_str()));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![r.sample_id.clone(), r.score.to_string(), r.class.as_str().into()];
            for (g, group) in self.schema.groups().iter().enumerate() {
                row.push(group.labels[self.schema.label_of(r.combination, g)].clone());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

/// Parses a scores CSV against `schema`.
pub fn load_scores(source: &str, schema: Arc<AttributeSchema>, meta: TableMeta) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Row {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let position: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let column = |name: &str| {
        position
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let id_col = column("sample_id")?;
    let score_col = column("score")?;
    let class_col = column("class")?;
    let group_cols = schema
        .groups()
        .iter()
        .map(|g| column(&g.name))
        .collect::<Result<Vec<_>>>()?;
    let label_maps: Vec<HashMap<&str, usize>> = schema
        .groups()
        .iter()
        .map(|g| g.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect())
        .collect();

    let mut warnings = Vec::new();
    let known: HashSet<usize> = [id_col, score_col, class_col]
        .into_iter()
        .chain(group_cols.iter().copied())
        .collect();
    let ignored: Vec<&str> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| !known.contains(i))
        .map(|(_, h)| h)
        .collect();
    if !ignored.is_empty() {
        warnings.push(format!("ignored columns: {}", ignored.join(", ")));
    }

    let mut records = Vec::new();
    let mut seen_ids = HashSet::new();
    let mut duplicates = Vec::new();
    for result in reader.records() {
        let row = result.map_err(|e| Error::Row {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let fail = |message: String| Error::Row { row: line, message };
        let get = |i: usize| row.get(i).unwrap_or("");

        let score_text = get(score_col);
        let score: f64 = score_text
            .parse()
            .map_err(|_| fail(format!("non-numeric score `{score_text}`")))?;
        check_score(score).map_err(fail)?;
        let class: ClassLabel = get(class_col).parse().map_err(|e: Error| fail(e.to_string()))?;

        let mut digits = Vec::with_capacity(group_cols.len());
        for (g, &col) in group_cols.iter().enumerate() {
            let label = get(col);
            let idx = *label_maps[g].get(label).ok_or_else(|| {
                fail(format!(
                    "unknown label `{label}` for group `{}`",
                    schema.groups()[g].name
                ))
            })?;
            digits.push(idx);
        }
        let combination = schema.encode(&Combination(digits))?;
        let sample_id = get(id_col).to_string();
        if !seen_ids.insert(sample_id.clone()) {
            duplicates.push(sample_id.clone());
        }
        records.push((sample_id, score, class, combination));
    }
    if let Some(first) = duplicates.first() {
        warnings.push(format!(
            "{} duplicate sample_id value(s), first `{first}`",
            duplicates.len()
        ));
    }

    let records = records
        .into_iter()
        .map(|(sample_id, score, class, combination)| ScoreRecord {
            sample_id,
            combination,
            score,
            class,
        })
        .collect();
    let mut table = ScoreTable::new(schema, records, meta)?;
    table.warnings = warnings;
    Ok(table)
}

/// Empirical TPR as a function of the threshold: the fraction of scores
/// `>= t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TprStep {
    sorted: Vec<f64>,
}

pub fn tpr_step(scores: &[f64]) -> Result<TprStep> {
    if scores.is_empty() {
        return Err(Error::EmptyBucket);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(TprStep { sorted })
}

impl TprStep {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.sorted
    }

    pub fn count_at_least(&self, t: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&s| s < t)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.count_at_least(t) as f64 / self.sorted.len() as f64
    }

    /// Sorted unique score values and the TPR at each of them.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &s) in self.sorted.iter().enumerate() {
            if out.last().is_none_or(|&(v, _)| v != s) {
                out.push((s, (self.sorted.len() - i) as f64 / n));
            }
        }
        out
    }
}

/// Mean of a bucket with exactly rounded summation.
pub fn mean_score(scores: &[f64]) -> Result<f64> {
    exact_mean(scores).ok_or(Error::EmptyBucket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::AttributeSchema;
    use proptest::prelude::*;

    fn schema_2_3() -> Arc<AttributeSchema> {
        Arc::new(
            AttributeSchema::from_pairs(&[("gender", &["man", "woman"]), ("age", &["child", "young", "old"])])
                .unwrap(),
        )
    }

    /// every combination gets `k` synthetic records with distinct scores
    fn balanced(schema: Arc<AttributeSchema>, k: usize) -> ScoreTable {
        let mut records = Vec::new();
        for c in 0..schema.combination_count() {
            for r in 0..k {
                records.push(ScoreRecord {
                    sample_id: format!("{c}-{r}"),
                    combination: c,
                    score: ((c as usize * k + r) % 97) as f64 / 97.0,
                    class: ClassLabel::Synthetic,
                });
            }
        }
        ScoreTable::new(schema, records, TableMeta::default()).unwrap()
    }

    #[test]
    fn loads_three_rows() {
        let csv = "sample_id,score,class,gender,age\n\
                   a,0.5,synthetic,man,child\n\
                   b,0.9,synthetic,woman,old\n\
                   c,0.1,real,woman,young\n";
        let t = load_scores(csv, schema_2_3(), TableMeta::default()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.records()[1].assignment(t.schema()).0, vec![1, 2]);
        assert_eq!(t.class_count(ClassLabel::Real), 1);
        assert!(t.warnings().is_empty());
    }

    #[test]
    fn rejects_bad_rows() {
        let s = schema_2_3();
        let out_of_range = "sample_id,score,class,gender,age\na,0.5,synthetic,man,child\nb,1.2,synthetic,man,old\n";
        match load_scores(out_of_range, s.clone(), TableMeta::default()) {
            Err(Error::Row { row, message }) => {
                assert_eq!(row, 3);
                assert!(message.contains("out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let nan = "sample_id,score,class,gender,age\na,NaN,synthetic,man,child\n";
        assert!(matches!(load_scores(nan, s.clone(), TableMeta::default()), Err(Error::Row { row: 2, .. })));
        let text = "sample_id,score,class,gender,age\na,high,synthetic,man,child\n";
        assert!(matches!(load_scores(text, s.clone(), TableMeta::default()), Err(Error::Row { .. })));
        let unknown = "sample_id,score,class,gender,age\na,0.3,synthetic,man,teen\n";
        match load_scores(unknown, s.clone(), TableMeta::default()) {
            Err(Error::Row { message, .. }) => assert!(message.contains("teen")),
            other => panic!("unexpected {other:?}"),
        }
        let missing = "sample_id,score,class,gender\na,0.3,synthetic,man\n";
        assert!(matches!(load_scores(missing, s, TableMeta::default()), Err(Error::MissingColumn(c)) if c == "age"));
    }

    #[test]
    fn warns_on_duplicates_and_extra_columns() {
        let csv = "sample_id,score,class,gender,age,notes\n\
                   a,0.5,synthetic,man,child,x\n\
                   a,0.6,synthetic,man,child,y\n";
        let t = load_scores(csv, schema_2_3(), TableMeta::default()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.warnings().len(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let t = balanced(schema_2_3(), 2);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = load_scores(std::str::from_utf8(&buf).unwrap(), schema_2_3(), TableMeta::default()).unwrap();
        assert_eq!(back.records(), t.records());
    }

    #[test]
    fn balanced_bucket_sizes() {
        let s = schema_2_3();
        let t = balanced(s.clone(), 4);
        // binary attribute
        let man = s.attribute("gender", "man").unwrap();
        for key in s.subgroups_of(man).unwrap() {
            assert_eq!(t.bucket(man, &key, Side::Present, ClassLabel::Synthetic).unwrap().len(), 4);
        }
        // three sibling labels: absent pools two siblings
        let old = s.attribute("age", "old").unwrap();
        for key in s.subgroups_of(old).unwrap() {
            let absent = t.bucket(old, &key, Side::Absent, ClassLabel::Synthetic).unwrap();
            // brute-force filter over the raw records
            let expected: Vec<f64> = t
                .records()
                .iter()
                .filter(|r| {
                    let a = r.assignment(&s).0;
                    a[1] != 2 && a[0] == key.labels[0]
                })
                .map(|r| r.score)
                .collect();
            let mut got = absent.clone();
            let mut want = expected.clone();
            got.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            assert_eq!(got, want);
            assert_eq!(absent.len(), 8);
        }
    }

    #[test]
    fn missing_subgroup_is_empty() {
        let s = schema_2_3();
        let t = balanced(s.clone(), 1).filtered(|_, r| s.label_of(r.combination, 0) == 0);
        let young = s.attribute("age", "young").unwrap();
        let key = SubgroupKey { withheld: 1, labels: vec![1] };
        assert!(t.bucket(young, &key, Side::Present, ClassLabel::Synthetic).unwrap().is_empty());
    }

    #[test]
    fn tpr_examples() {
        let step = tpr_step(&[0.7, 0.5, 0.9]).unwrap();
        assert!((step.eval(0.6) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(step.eval(0.0), 1.0);
        assert_eq!(step.eval(0.9), 1.0 / 3.0);
        assert_eq!(step.eval(0.91), 0.0);
        assert!(matches!(tpr_step(&[]), Err(Error::EmptyBucket)));
    }

    #[test]
    fn mean_examples() {
        assert!((mean_score(&[0.2, 0.4, 0.6]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(mean_score(&[0.3; 7]).unwrap(), 0.3);
        let grid: Vec<f64> = (0..10_000).map(|i| i as f64 / 9999.0).collect();
        assert!((mean_score(&grid).unwrap() - 0.5).abs() < 1e-9);
        assert!(matches!(mean_score(&[]), Err(Error::EmptyBucket)));
    }

    proptest! {
        #[test]
        fn step_integral_equals_mean(scores in prop::collection::vec(0.0f64..=1.0, 1..300)) {
            let step = tpr_step(&scores).unwrap();
            // exact integral over breakpoints: TPR is constant on (prev, s]
            let mut prev = 0.0;
            let mut integral = 0.0;
            for (s, tpr) in step.steps() {
                integral += (s - prev) * tpr;
                prev = s;
            }
            prop_assert!((integral - mean_score(&scores).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn tpr_monotone(scores in prop::collection::vec(0.0f64..=1.0, 1..100), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let step = tpr_step(&scores).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(step.eval(lo) >= step.eval(hi));
            prop_assert!((0.0..=1.0).contains(&step.eval(a)));
        }

        #[test]
        fn buckets_partition_positives(
            counts in prop::collection::vec(1usize..=3, 1..=3),
            cells in prop::collection::vec((0u64..1000, 0.0f64..=1.0, any::<bool>()), 0..200),
            group in 0usize..3,
        ) {
            let schema = Arc::new(AttributeSchema::new(
                counts.iter().enumerate().map(|(g, &n)| crate::schema::Group {
                    name: format!("g{g}"),
                    labels: (0..n).map(|l| format!("l{l}")).collect(),
                }).collect()).unwrap());
            let n = schema.combination_count();
            let records: Vec<ScoreRecord> = cells.iter().enumerate().map(|(i, &(c, s, pos))| ScoreRecord {
                sample_id: i.to_string(),
                combination: c % n,
                score: s,
                class: if pos { ClassLabel::Synthetic } else { ClassLabel::Real },
            }).collect();
            let table = ScoreTable::new(schema.clone(), records, TableMeta::default()).unwrap();
            let attr = AttributeRef { group: group % counts.len(), label: 0 };
            let mut total = 0;
            for key in schema.subgroups_of(attr).unwrap() {
                for side in [Side::Present, Side::Absent] {
                    total += table.bucket(attr, &key, side, ClassLabel::Synthetic).unwrap().len();
                }
            }
            prop_assert_eq!(total, table.class_count(ClassLabel::Synthetic));
        }
    }
}
