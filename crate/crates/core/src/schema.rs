//! Attribute schema: ordered groups of mutually exclusive labels and the
//! mixed-radix indexing of their full combination space.
//!
//! The first group is the most significant digit. A combination index
//! `c` decomposes around any group `g` as
//! `c = high * (|L_g| * stride_g) + label * stride_g + low`, and the
//! subgroup index obtained by withholding `g` is `high * stride_g + low`,
//! which is the mixed-radix value over the remaining groups in order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The facial attribute schema shipped with the crate (11 groups, 30 labels).
pub const FACIAL_ATTRIBUTES_JSON: &str = include_str!("../assets/facial_attributes.json");

/// The 25 labels reported individually in the facial attribute audits,
/// as `group.label` names over [`FACIAL_ATTRIBUTES_JSON`].
pub const REPORTED_FACIAL_ATTRIBUTES: [&str; 25] = [
    "attractiveness.attractive",
    "gender.man",
    "age.child",
    "age.young",
    "age.old",
    "hair_color.black_hair",
    "hair_color.blonde_hair",
    "hair_color.brown_hair",
    "hair_color.gray_hair",
    "hair_type.straight_hair",
    "hair_type.wavy_hair",
    "hair_type.bald",
    "skin_tone.white_skin",
    "eye_color.black_eyes",
    "eye_color.blue_eyes",
    "eye_color.green_eyes",
    "nose_shape.big_nose",
    "face_shape.oval_face",
    "face_shape.round_face",
    "face_shape.square_face",
    "facial_hair.mustache",
    "facial_hair.beard",
    "makeup_type.no_makeup",
    "makeup_type.makeup",
    "makeup_type.heavy_makeup",
];

const MAX_NAME_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct SchemaDoc {
    groups: Vec<Group>,
}

/// Validated attribute schema. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeSchema {
    groups: Vec<Group>,
    #[serde(skip)]
    strides: Vec<u64>,
    #[serde(skip)]
    count: u64,
}

/// One label index per group, in group order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Combination(pub Vec<usize>);

/// A single label of a single group: the attribute under analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttributeRef {
    pub group: usize,
    pub label: usize,
}

/// Label indices for every group except `withheld`, in group order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupKey {
    pub withheld: usize,
    pub labels: Vec<usize>,
}

/// Parses and validates a schema document.
pub fn load_schema(source: &str) -> Result<AttributeSchema> {
    let doc: SchemaDoc = serde_json::from_str(source).map_err(|e| Error::MalformedSchema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(doc.groups, Some(source))
}

fn validate(groups: Vec<Group>, source: Option<&str>) -> Result<AttributeSchema> {
    let mut locator = source.map(Locator::new);
    let mut line_of = |name: &str| locator.as_mut().map_or(0, |l| l.next_line_of(name));

    if groups.is_empty() {
        return Err(Error::EmptySchema);
    }
    let mut seen_groups = std::collections::HashSet::new();
    for group in &groups {
        let line = line_of(&group.name);
        check_name(&group.name, line)?;
        if !seen_groups.insert(group.name.as_str()) {
            return Err(Error::DuplicateGroup {
                name: group.name.clone(),
                line,
            });
        }
        if group.labels.is_empty() {
            return Err(Error::EmptyGroup {
                name: group.name.clone(),
                line,
            });
        }
        let mut seen_labels = std::collections::HashSet::new();
        for label in &group.labels {
            let line = line_of(label);
            check_name(label, line)?;
            if !seen_labels.insert(label.as_str()) {
                return Err(Error::DuplicateLabel {
                    group: group.name.clone(),
                    label: label.clone(),
                    line,
                });
            }
        }
    }

    let mut strides = vec![1u64; groups.len()];
    let mut count = 1u64;
    for (i, group) in groups.iter().enumerate().rev() {
        strides[i] = count;
        count = count
            .checked_mul(group.labels.len() as u64)
            .ok_or(Error::CombinationOverflow)?;
    }
    Ok(AttributeSchema {
        groups,
        strides,
        count,
    })
}

fn check_name(name: &str, line: usize) -> Result<()> {
    let ok = !name.is_empty()
        && name.len() <= MAX_NAME_LEN
        && name
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidName {
            name: name.to_string(),
            line,
        })
    }
}

/// Finds successive occurrences of quoted names in the document text so
/// validation errors can point at a line.
struct Locator<'a> {
    text: &'a str,
    cursor: usize,
}

impl<'a> Locator<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, cursor: 0 }
    }

    fn next_line_of(&mut self, name: &str) -> usize {
        let needle = format!("\"{name}\"");
        match self.text[self.cursor..].find(&needle) {
            Some(off) => {
                let pos = self.cursor + off;
                self.cursor = pos + needle.len();
                self.text[..pos].bytes().filter(|&b| b == b'\n').count() + 1
            }
            None => 0,
        }
    }
}

impl AttributeSchema {
    /// Builds a schema from in-memory groups with the same validation as
    /// [`load_schema`].
    pub fn new(groups: Vec<Group>) -> Result<Self> {
        validate(groups, None)
    }

    /// Convenience constructor from `(group, [labels])` pairs.
    pub fn from_pairs(pairs: &[(&str, &[&str])]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(name, labels)| Group {
                    name: name.to_string(),
                    labels: labels.iter().map(|l| l.to_string()).collect(),
                })
                .collect(),
        )
    }

    /// The shipped 11-group facial attribute schema.
    pub fn facial_attributes() -> Self {
        load_schema(FACIAL_ATTRIBUTES_JSON).expect("shipped schema is valid")
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn label_count(&self, group: usize) -> usize {
        self.groups[group].labels.len()
    }

    /// Exact size of the combination space, the product of label counts.
    pub fn combination_count(&self) -> u64 {
        self.count
    }

    /// Number of subgroups obtained by withholding `group`.
    pub fn subgroup_count(&self, group: usize) -> u64 {
        self.count / self.label_count(group) as u64
    }

    pub fn encode(&self, combination: &Combination) -> Result<u64> {
        let digits = &combination.0;
        if digits.len() != self.groups.len() {
            return Err(Error::AssignmentLength {
                expected: self.groups.len(),
                got: digits.len(),
            });
        }
        let mut index = 0u64;
        for (g, &label) in digits.iter().enumerate() {
            self.check_label(g, label)?;
            index += label as u64 * self.strides[g];
        }
        Ok(index)
    }

    pub fn decode(&self, index: u64) -> Result<Combination> {
        if index >= self.count {
            return Err(Error::IndexOutOfRange {
                index,
                count: self.count,
            });
        }
        Ok(Combination(
            (0..self.groups.len())
                .map(|g| self.label_of(index, g))
                .collect(),
        ))
    }

    /// Label of `group` within the combination at `index`.
    pub fn label_of(&self, index: u64, group: usize) -> usize {
        ((index / self.strides[group]) % self.label_count(group) as u64) as usize
    }

    /// Subgroup index of a combination once `group` is withheld.
    pub fn subgroup_index_of(&self, index: u64, group: usize) -> u64 {
        let stride = self.strides[group];
        let span = stride * self.label_count(group) as u64;
        (index / span) * stride + index % stride
    }

    /// Inverse of [`Self::subgroup_index_of`] for a given label.
    pub fn join(&self, subgroup: u64, group: usize, label: usize) -> u64 {
        let stride = self.strides[group];
        let span = stride * self.label_count(group) as u64;
        (subgroup / stride) * span + label as u64 * stride + subgroup % stride
    }

    pub fn check_attr(&self, attr: AttributeRef) -> Result<()> {
        if attr.group >= self.groups.len() {
            return Err(Error::invalid(format!(
                "group index {} out of range",
                attr.group
            )));
        }
        self.check_label(attr.group, attr.label)
    }

    fn check_label(&self, group: usize, label: usize) -> Result<()> {
        if label >= self.label_count(group) {
            return Err(Error::LabelOutOfRange {
                group: self.groups[group].name.clone(),
                label,
            });
        }
        Ok(())
    }

    /// Every subgroup key for `attr`, in mixed-radix order over the
    /// remaining groups.
    pub fn subgroups_of(&self, attr: AttributeRef) -> Result<Vec<SubgroupKey>> {
        self.check_attr(attr)?;
        Ok((0..self.subgroup_count(attr.group))
            .map(|s| self.subgroup_key(s, attr.group))
            .collect())
    }

    /// Decodes a subgroup index into its key.
    pub fn subgroup_key(&self, subgroup: u64, withheld: usize) -> SubgroupKey {
        let full = self.join(subgroup, withheld, 0);
        let labels = (0..self.groups.len())
            .filter(|&g| g != withheld)
            .map(|g| self.label_of(full, g))
            .collect();
        SubgroupKey { withheld, labels }
    }

    /// Mixed-radix value of a subgroup key over the remaining groups.
    pub fn encode_subgroup(&self, key: &SubgroupKey) -> Result<u64> {
        if key.withheld >= self.groups.len() {
            return Err(Error::invalid("withheld group out of range"));
        }
        if key.labels.len() + 1 != self.groups.len() {
            return Err(Error::AssignmentLength {
                expected: self.groups.len() - 1,
                got: key.labels.len(),
            });
        }
        let mut digits = key.labels.clone();
        digits.insert(key.withheld, 0);
        let full = self.encode(&Combination(digits))?;
        Ok(self.subgroup_index_of(full, key.withheld))
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    /// Looks up `group.label`.
    pub fn attribute(&self, group: &str, label: &str) -> Result<AttributeRef> {
        let g = self
            .group_index(group)
            .ok_or_else(|| Error::UnknownGroup(group.to_string()))?;
        let l = self.groups[g]
            .labels
            .iter()
            .position(|x| x == label)
            .ok_or_else(|| Error::UnknownAttribute(format!("{group}.{label}")))?;
        Ok(AttributeRef { group: g, label: l })
    }

    /// Resolves either a qualified `group.label` name or a bare label that
    /// is unique across the schema.
    pub fn resolve(&self, name: &str) -> Result<AttributeRef> {
        if let Some((group, label)) = name.split_once('.') {
            return self.attribute(group, label);
        }
        let mut hits = self.attributes().filter(|a| self.label_name(*a) == name);
        match (hits.next(), hits.next()) {
            (Some(attr), None) => Ok(attr),
            (Some(_), Some(_)) => Err(Error::UnknownAttribute(format!(
                "`{name}` is ambiguous; qualify it as group.label"
            ))),
            _ => Err(Error::UnknownAttribute(name.to_string())),
        }
    }

    /// All labels of all groups, in schema order.
    pub fn attributes(&self) -> impl Iterator<Item = AttributeRef> + '_ {
        self.groups.iter().enumerate().flat_map(|(g, group)| {
            (0..group.labels.len()).map(move |l| AttributeRef { group: g, label: l })
        })
    }

    pub fn group_name(&self, attr: AttributeRef) -> &str {
        &self.groups[attr.group].name
    }

    pub fn label_name(&self, attr: AttributeRef) -> &str {
        &self.groups[attr.group].labels[attr.label]
    }

    /// `group.label`
    pub fn attr_name(&self, attr: AttributeRef) -> String {
        format!("{}.{}", self.group_name(attr), self.label_name(attr))
    }
}
