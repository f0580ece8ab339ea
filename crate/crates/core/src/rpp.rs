//! Relations with basic, vector and sequence columns, and the
//! order-preserving operators defined over them.
//!
//! An [`RppRelation`] is a schema plus rows. Converting it with [`r2a`]
//! groups the rows on one basic column and turns every other column into a
//! sequence ordered by another basic column, giving an [`ArrableRelation`].
//! Over arrables:
//!
//! * [`cct`] compresses sequences to their first, last or both end elements;
//! * [`cjoin`] scans each pair of groups element by element and stops at the
//!   first pair satisfying the similarity condition ([`smatch`]);
//! * [`cct_join`] compresses both sides first, then joins exhaustively;
//! * [`direction`] maps the displacement between two boxes of a sequence to
//!   a compass sector.
//!
//! Every operator returns a new relation, so operators compose.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::trace::{BoundingBox, Trace};

/// Kind of a column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    /// Integer or floating-point scalar.
    Numeric,
    /// String label.
    Categorical,
    /// Vector of floats with a fixed dimension.
    Vector(usize),
    /// Ordered sequence of elements; vector elements may vary in dimension.
    Sequence(Box<ColumnKind>),
}

impl ColumnKind {
    pub fn is_basic(&self) -> bool {
        matches!(self, ColumnKind::Numeric | ColumnKind::Categorical)
    }
}

/// One cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Cat(String),
    Vector(Vec<f64>),
    Seq(Vec<Value>),
}

impl Value {
    fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(x) => Some(*x),
            _ => None,
        }
    }

    /// Total order used for grouping and ordering on basic columns.
    fn cmp_basic(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Cat(a), Value::Cat(b)) => a.cmp(b),
            (a, b) => match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                _ => Ordering::Equal,
            },
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Int(i) => Json::from(*i),
            Value::Float(x) => Json::from(*x),
            Value::Cat(s) => Json::from(s.clone()),
            Value::Vector(v) => Json::from(v.clone()),
            Value::Seq(s) => Json::Array(s.iter().map(Value::to_json).collect()),
        }
    }

    fn from_json(j: &Json, kind: &ColumnKind) -> Result<Value> {
        let bad = || Error::Type(format!("value {j} does not fit column kind {kind:?}"));
        Ok(match kind {
            ColumnKind::Numeric => match j.as_i64() {
                Some(i) if !j.is_f64() => Value::Int(i),
                _ => Value::Float(j.as_f64().ok_or_else(bad)?),
            },
            ColumnKind::Categorical => Value::Cat(j.as_str().ok_or_else(bad)?.to_string()),
            ColumnKind::Vector(_) => Value::Vector(
                j.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(bad))
                    .collect::<Result<_>>()?,
            ),
            ColumnKind::Sequence(el) => Value::Seq(
                j.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|x| Value::from_json(x, el))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    fn conforms(&self, kind: &ColumnKind, strict_dim: bool) -> bool {
        match (self, kind) {
            (Value::Int(_) | Value::Float(_), ColumnKind::Numeric) => true,
            (Value::Cat(_), ColumnKind::Categorical) => true,
            (Value::Vector(v), ColumnKind::Vector(d)) => !strict_dim || v.len() == *d,
            (Value::Seq(s), ColumnKind::Sequence(el)) => s.iter().all(|x| x.conforms(el, false)),
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Named, typed column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: &str, kind: ColumnKind) -> Self {
        Column {
            name: name.into(),
            kind,
        }
    }
}

/// A relation whose columns may hold scalars, vectors or sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct RppRelation {
    pub schema: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Serialize, Deserialize)]
struct RelationDoc {
    schema: Vec<Column>,
    rows: Vec<Vec<Json>>,
}

impl RppRelation {
    /// Checked constructor: every row matches the schema; vector columns
    /// have their declared dimension.
    pub fn new(schema: Vec<Column>, rows: Vec<Vec<Value>>) -> Result<Self> {
        for (i, c) in schema.iter().enumerate() {
            if schema[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::Validation(format!("duplicate column {:?}", c.name)));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::Validation(format!(
                    "row {r} has {} values for {} columns",
                    row.len(),
                    schema.len()
                )));
            }
            for (v, c) in row.iter().zip(&schema) {
                if !v.conforms(&c.kind, true) {
                    return Err(Error::Type(format!(
                        "row {r}: value {v} does not fit column {:?} ({:?})",
                        c.name, c.kind
                    )));
                }
            }
        }
        Ok(RppRelation { schema, rows })
    }

    /// Index of the named column.
    pub fn column(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::Config(format!("no column named {name:?}")))
    }

    /// JSON document `{"schema":[{name,kind}],"rows":[[…]]}`.
    pub fn to_json(&self) -> Result<String> {
        let doc = RelationDoc {
            schema: self.schema.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Value::to_json).collect())
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RelationDoc = serde_json::from_str(text)?;
        let rows = doc
            .rows
            .iter()
            .map(|r| {
                if r.len() != doc.schema.len() {
                    return Err(Error::Validation("row length differs from the schema".into()));
                }
                r.iter()
                    .zip(&doc.schema)
                    .map(|(j, c)| Value::from_json(j, &c.kind))
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        RppRelation::new(doc.schema, rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RppRelation::from_json(&text)
    }

    /// One row per detection: `fid, oid, cl, clc, bb, fv, ts`.
    pub fn from_trace(trace: &Trace) -> Result<Self> {
        let dim = trace.records().next().map_or(0, |r| r.fv.len());
        let schema = vec![
            Column::new("fid", ColumnKind::Numeric),
            Column::new("oid", ColumnKind::Numeric),
            Column::new("cl", ColumnKind::Categorical),
            Column::new("clc", ColumnKind::Numeric),
            Column::new("bb", ColumnKind::Vector(4)),
            Column::new("fv", ColumnKind::Vector(dim)),
            Column::new("ts", ColumnKind::Categorical),
        ];
        let rows = trace
            .records()
            .map(|r| {
                vec![
                    Value::Int(r.fid as i64),
                    Value::Int(r.oid as i64),
                    Value::Cat(r.cl.clone()),
                    Value::Float(r.clc),
                    Value::Vector(vec![r.bb.x_min, r.bb.y_min, r.bb.x_max, r.bb.y_max]),
                    Value::Vector(r.fv.clone()),
                    Value::Cat(format!("{}:{}", r.ts.fid, r.ts.rank)),
                ]
            })
            .collect();
        RppRelation::new(schema, rows)
    }
}

/// A relation grouped on a key column whose other columns are sequences
/// ordered by an ordering column.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrableRelation {
    /// Name of the group-by column.
    pub key: String,
    /// Name of the column the sequences are ordered by.
    pub order: String,
    pub relation: RppRelation,
}

impl ArrableRelation {
    /// Checked constructor enforcing the arrable invariants.
    pub fn new(key: &str, order: &str, relation: RppRelation) -> Result<Self> {
        let k = relation.column(key)?;
        if !relation.schema[k].kind.is_basic() {
            return Err(Error::Type(format!("group key {key:?} must be a basic column")));
        }
        for (i, c) in relation.schema.iter().enumerate() {
            if i != k && !matches!(c.kind, ColumnKind::Sequence(_)) {
                return Err(Error::Type(format!("column {:?} is not a sequence", c.name)));
            }
        }
        let mut keys: Vec<&Value> = relation.rows.iter().map(|r| &r[k]).collect();
        keys.sort_by(|a, b| a.cmp_basic(b));
        if keys.windows(2).any(|w| w[0].cmp_basic(w[1]) == Ordering::Equal) {
            return Err(Error::Validation(format!("group key {key:?} repeats")));
        }
        for row in &relation.rows {
            let lens: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, v)| match v {
                    Value::Seq(s) => s.len(),
                    _ => 0,
                })
                .collect();
            if lens.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::Validation("sequences of one group differ in length".into()));
            }
        }
        Ok(ArrableRelation {
            key: key.into(),
            order: order.into(),
            relation,
        })
    }

    /// Number of groups.
    pub fn groups(&self) -> usize {
        self.relation.rows.len()
    }

    fn key_index(&self) -> usize {
        self.relation.column(&self.key).expect("key column exists")
    }
}

/// Distance used by the similarity condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `(1 − cos) / 2`.
    Cosine,
    /// `‖a − b‖ / (‖a − b‖ + 1)`.
    Euclidean,
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            _ => Err(Error::Config(format!("unknown metric {s:?}"))),
        }
    }
}

/// Feature-vector distance normalised to `[0, 1]`.
///
/// A zero vector has no direction: two zero vectors are at cosine distance
/// 0, a zero and a non-zero vector are treated as orthogonal (0.5).
pub fn smatch(a: &[f64], b: &[f64], metric: Metric) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            line: 0,
            expected: a.len(),
            found: b.len(),
        });
    }
    if a == b {
        // Identical vectors are at distance exactly zero under both metrics.
        return Ok(0.0);
    }
    Ok(match metric {
        Metric::Euclidean => {
            let d = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            d / (d + 1.0)
        }
        Metric::Cosine => {
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            let cos = match (na == 0.0, nb == 0.0) {
                (true, true) => 1.0,
                (true, false) | (false, true) => 0.0,
                _ => {
                    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    (dot / (na * nb)).clamp(-1.0, 1.0)
                }
            };
            (1.0 - cos) / 2.0
        }
    })
}

/// Group `rel` on `gba`; every other column becomes a sequence ordered by
/// `aoa` (ties keep input order). Groups are listed by ascending key.
pub fn r2a(rel: &RppRelation, gba: &str, aoa: &str) -> Result<ArrableRelation> {
    let g = rel.column(gba)?;
    let o = rel.column(aoa)?;
    for (name, i) in [(gba, g), (aoa, o)] {
        if !rel.schema[i].kind.is_basic() {
            return Err(Error::Type(format!("column {name:?} must be basic")));
        }
    }
    let mut order: Vec<usize> = (0..rel.rows.len()).collect();
    order.sort_by(|&a, &b| {
        rel.rows[a][g]
            .cmp_basic(&rel.rows[b][g])
            .then_with(|| rel.rows[a][o].cmp_basic(&rel.rows[b][o]))
    });
    let schema: Vec<Column> = rel
        .schema
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if i == g {
                c.clone()
            } else {
                Column::new(&c.name, ColumnKind::Sequence(Box::new(c.kind.clone())))
            }
        })
        .collect();
    let mut rows: Vec<Vec<Value>> = Vec::new();
    for idx in order {
        let src = &rel.rows[idx];
        let same = rows
            .last()
            .is_some_and(|r| r[g].cmp_basic(&src[g]) == Ordering::Equal);
        if !same {
            rows.push(
                (0..schema.len())
                    .map(|i| {
                        if i == g {
                            src[g].clone()
                        } else {
                            Value::Seq(Vec::new())
                        }
                    })
                    .collect(),
            );
        }
        let row = rows.last_mut().expect("row exists");
        for (i, v) in src.iter().enumerate() {
            if let Value::Seq(s) = &mut row[i] {
                if i != g {
                    s.push(v.clone());
                }
            }
        }
    }
    ArrableRelation::new(gba, aoa, RppRelation::new(schema, rows)?)
}

/// Which elements [`cct`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CctOption {
    First,
    Last,
    Both,
}

impl FromStr for CctOption {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "first" => Ok(CctOption::First),
            "last" => Ok(CctOption::Last),
            "both" => Ok(CctOption::Both),
            _ => Err(Error::Config(format!("cct option must be first, last or both, got {s:?}"))),
        }
    }
}

/// Result of [`cct`]: flat for `first`/`last`, still arrable for `both`.
#[derive(Debug, Clone, PartialEq)]
pub enum CctOutput {
    Flat(RppRelation),
    Arrable(ArrableRelation),
}

impl CctOutput {
    pub fn relation(&self) -> &RppRelation {
        match self {
            CctOutput::Flat(r) => r,
            CctOutput::Arrable(a) => &a.relation,
        }
    }
}

/// Compress every sequence to its first element, last element, or both
/// end elements (a one-element sequence stays one element long).
pub fn cct(arel: &ArrableRelation, option: CctOption) -> Result<CctOutput> {
    let k = arel.key_index();
    let rel = &arel.relation;
    let pick = |v: &Value| -> Value {
        let Value::Seq(s) = v else { return v.clone() };
        match option {
            CctOption::First => s.first().cloned().expect("non-empty sequence"),
            CctOption::Last => s.last().cloned().expect("non-empty sequence"),
            CctOption::Both if s.len() <= 1 => Value::Seq(s.clone()),
            CctOption::Both => Value::Seq(vec![s[0].clone(), s[s.len() - 1].clone()]),
        }
    };
    let rows: Vec<Vec<Value>> = rel
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(i, v)| if i == k { v.clone() } else { pick(v) })
                .collect()
        })
        .collect();
    match option {
        CctOption::Both => Ok(CctOutput::Arrable(ArrableRelation::new(
            &arel.key,
            &arel.order,
            RppRelation::new(rel.schema.clone(), rows)?,
        )?)),
        _ => {
            let schema = rel
                .schema
                .iter()
                .map(|c| match &c.kind {
                    ColumnKind::Sequence(el) => Column::new(&c.name, (**el).clone()),
                    _ => c.clone(),
                })
                .collect();
            // Elements of a sequence may vary in dimension; the flat
            // relation's vector columns take the first row's dimension.
            let schema = fix_vector_dims(schema, &rows);
            Ok(CctOutput::Flat(RppRelation::new(schema, rows)?))
        }
    }
}

fn fix_vector_dims(schema: Vec<Column>, rows: &[Vec<Value>]) -> Vec<Column> {
    schema
        .into_iter()
        .enumerate()
        .map(|(i, c)| match (&c.kind, rows.first().map(|r| &r[i])) {
            (ColumnKind::Vector(_), Some(Value::Vector(v))) => Column::new(&c.name, ColumnKind::Vector(v.len())),
            _ => c,
        })
        .collect()
}

/// Comparison between the similarity distance and the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn holds(self, x: f64, th: f64) -> bool {
        match self {
            CmpOp::Lt => x < th,
            CmpOp::Le => x <= th,
            CmpOp::Gt => x > th,
            CmpOp::Ge => x >= th,
        }
    }
}

impl FromStr for CmpOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "<" | "lt" => Ok(CmpOp::Lt),
            "<=" | "le" => Ok(CmpOp::Le),
            ">" | "gt" => Ok(CmpOp::Gt),
            ">=" | "ge" => Ok(CmpOp::Ge),
            _ => Err(Error::Config(format!("unknown comparison {s:?}"))),
        }
    }
}

/// Equality predicate between two basic columns of the joined groups.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyPredicate {
    pub left: String,
    pub right: String,
    /// `true` for equality, `false` for inequality.
    pub equal: bool,
}

/// Join condition: `smatch(left[i], right[j], metric) <op> threshold`,
/// plus optional predicates on basic columns.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinCondition {
    pub left: String,
    pub right: String,
    pub metric: Metric,
    pub op: CmpOp,
    pub threshold: f64,
    pub predicates: Vec<KeyPredicate>,
}

impl JoinCondition {
    /// Similarity condition `smatch(left, right) <= threshold` on one column per side.
    pub fn similar(left: &str, right: &str, metric: Metric, threshold: f64) -> Self {
        JoinCondition {
            left: left.into(),
            right: right.into(),
            metric,
            op: CmpOp::Le,
            threshold,
            predicates: Vec::new(),
        }
    }
}

/// Joined relation plus the number of element comparisons performed.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinOutput {
    /// Columns: `left_<key>`, `right_<key>`, `left_<col>`, `right_<col>`,
    /// `left_pos`, `right_pos` (1-based) and `distance`.
    pub relation: RppRelation,
    pub comparisons: usize,
}

impl JoinOutput {
    /// Distinct matched (left key, right key) pairs, rendered as text.
    pub fn matched_pairs(&self) -> std::collections::BTreeSet<(String, String)> {
        self.relation
            .rows
            .iter()
            .map(|r| (r[0].to_string(), r[1].to_string()))
            .collect()
    }
}

struct Side<'a> {
    key: usize,
    col: usize,
    rel: &'a RppRelation,
}

fn side<'a>(arel: &'a ArrableRelation, col: &str) -> Result<Side<'a>> {
    let rel = &arel.relation;
    let c = rel.column(col)?;
    match &rel.schema[c].kind {
        ColumnKind::Sequence(el) if matches!(**el, ColumnKind::Vector(_)) => {}
        other => {
            return Err(Error::Type(format!(
                "join column {col:?} must be a sequence of vectors, found {other:?}"
            )))
        }
    }
    Ok(Side {
        key: arel.key_index(),
        col: c,
        rel,
    })
}

fn elements(v: &Value) -> &[Value] {
    match v {
        Value::Seq(s) => s,
        _ => std::slice::from_ref(v),
    }
}

fn vector(v: &Value) -> &[f64] {
    match v {
        Value::Vector(x) => x,
        _ => &[],
    }
}

fn join_schema(l: &Side, r: &Side) -> Vec<Column> {
    let lk = &l.rel.schema[l.key];
    let rk = &r.rel.schema[r.key];
    let el = |s: &Side| match &s.rel.schema[s.col].kind {
        ColumnKind::Sequence(e) => (**e).clone(),
        k => k.clone(),
    };
    vec![
        Column::new(&format!("left_{}", lk.name), lk.kind.clone()),
        Column::new(&format!("right_{}", rk.name), rk.kind.clone()),
        Column::new(&format!("left_{}", l.rel.schema[l.col].name), el(l)),
        Column::new(&format!("right_{}", r.rel.schema[r.col].name), el(r)),
        Column::new("left_pos", ColumnKind::Numeric),
        Column::new("right_pos", ColumnKind::Numeric),
        Column::new("distance", ColumnKind::Numeric),
    ]
}

fn predicates_hold(
    preds: &[KeyPredicate],
    l: &Side,
    lrow: &[Value],
    r: &Side,
    rrow: &[Value],
) -> Result<bool> {
    for p in preds {
        let (li, ri) = (l.rel.column(&p.left)?, r.rel.column(&p.right)?);
        if !l.rel.schema[li].kind.is_basic() || !r.rel.schema[ri].kind.is_basic() {
            return Err(Error::Type("key predicates compare basic columns only".into()));
        }
        let eq = lrow[li].cmp_basic(&rrow[ri]) == Ordering::Equal;
        if eq != p.equal {
            return Ok(false);
        }
    }
    Ok(true)
}

fn join(
    left: &ArrableRelation,
    right: &ArrableRelation,
    cond: &JoinCondition,
    first_only: bool,
) -> Result<JoinOutput> {
    let l = side(left, &cond.left)?;
    let r = side(right, &cond.right)?;
    let mut rows = Vec::new();
    let mut comparisons = 0;
    for lrow in &l.rel.rows {
        for rrow in &r.rel.rows {
            if !predicates_hold(&cond.predicates, &l, lrow, &r, rrow)? {
                continue;
            }
            'scan: for (i, a) in elements(&lrow[l.col]).iter().enumerate() {
                for (j, b) in elements(&rrow[r.col]).iter().enumerate() {
                    comparisons += 1;
                    let d = smatch(vector(a), vector(b), cond.metric)?;
                    if cond.op.holds(d, cond.threshold) {
                        rows.push(vec![
                            lrow[l.key].clone(),
                            rrow[r.key].clone(),
                            a.clone(),
                            b.clone(),
                            Value::Int(i as i64 + 1),
                            Value::Int(j as i64 + 1),
                            Value::Float(d),
                        ]);
                        if first_only {
                            break 'scan;
                        }
                    }
                }
            }
        }
    }
    let schema = fix_vector_dims(join_schema(&l, &r), &rows);
    Ok(JoinOutput {
        relation: RppRelation {
            schema,
            rows,
        },
        comparisons,
    })
}

/// Consecutive join: for every (left group, right group) pair, compare
/// elements left-major and emit the first matching element pair only.
pub fn cjoin(left: &ArrableRelation, right: &ArrableRelation, cond: &JoinCondition) -> Result<JoinOutput> {
    join(left, right, cond, true)
}

/// Compress both sides with [`cct`], then join exhaustively: every
/// matching element pair of the compressed sequences is emitted.
pub fn cct_join(
    left: &ArrableRelation,
    right: &ArrableRelation,
    option: CctOption,
    cond: &JoinCondition,
) -> Result<JoinOutput> {
    let compress = |a: &ArrableRelation| -> Result<ArrableRelation> {
        // Re-wrap first/last results as one-element sequences so both
        // sides stay arrable for the join.
        match cct(a, CctOption::Both)? {
            CctOutput::Arrable(both) if option == CctOption::Both => Ok(both),
            _ => {
                let CctOutput::Flat(flat) = cct(a, option)? else {
                    unreachable!("first/last compress to a flat relation")
                };
                let k = flat.column(&a.key)?;
                let schema = a.relation.schema.clone();
                let rows = flat
                    .rows
                    .into_iter()
                    .map(|r| {
                        r.into_iter()
                            .enumerate()
                            .map(|(i, v)| if i == k { v } else { Value::Seq(vec![v]) })
                            .collect()
                    })
                    .collect();
                ArrableRelation::new(&a.key, &a.order, RppRelation::new(schema, rows)?)
            }
        }
    };
    join(&compress(left)?, &compress(right)?, cond, false)
}

/// Compass sector of a displacement (image coordinates, y pointing down).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Compass {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
    /// Displacement shorter than the stationary threshold.
    Stationary,
}

/// Default stationary threshold, pixels.
pub const DEFAULT_STATIONARY_EPS: f64 = 1.0;

const SECTORS: [Compass; 8] = [
    Compass::E,
    Compass::NE,
    Compass::N,
    Compass::NW,
    Compass::W,
    Compass::SW,
    Compass::S,
    Compass::SE,
];

/// Sector of the displacement `(dx, dy)` in image coordinates.
///
/// Sectors are 45° wide and centred on the axes and diagonals, counted
/// counter-clockwise from east with north meaning decreasing y. A
/// displacement exactly on a sector boundary belongs to the sector with
/// the lower angle.
pub fn compass(dx: f64, dy: f64, eps: f64) -> Compass {
    if dx.hypot(dy) < eps || (dx == 0.0 && dy == 0.0) {
        return Compass::Stationary;
    }
    let deg = (-dy).atan2(dx).to_degrees().rem_euclid(360.0);
    // Snap away floating-point noise so exact boundaries resolve by the rule.
    let deg = (deg * 1e9).round() / 1e9;
    let sector = ((deg - 22.5) / 45.0).ceil().rem_euclid(8.0) as usize;
    SECTORS[sector]
}

/// Direction of travel between elements `i` and `j` (1-based; defaults
/// first and last) of a box sequence.
pub fn direction(
    boxes: &[BoundingBox],
    i: Option<usize>,
    j: Option<usize>,
    eps: f64,
) -> Result<Compass> {
    if boxes.len() < 2 {
        return Err(Error::Param("direction needs at least two boxes".into()));
    }
    let (i, j) = (i.unwrap_or(1), j.unwrap_or(boxes.len()));
    if i < 1 || i >= j || j > boxes.len() {
        return Err(Error::Param(format!(
            "positions must satisfy 1 ≤ i < j ≤ {}, got i={i}, j={j}",
            boxes.len()
        )));
    }
    let (a, b) = (boxes[i - 1].centroid(), boxes[j - 1].centroid());
    Ok(compass(b[0] - a[0], b[1] - a[1], eps))
}

/// Per-group direction of travel: `(key, direction)` rows computed from a
/// sequence-of-boxes column holding `[x_min, y_min, x_max, y_max]` vectors.
pub fn direction_column(
    arel: &ArrableRelation,
    col: &str,
    i: Option<usize>,
    j: Option<usize>,
    eps: f64,
) -> Result<RppRelation> {
    let rel = &arel.relation;
    let k = arel.key_index();
    let c = rel.column(col)?;
    if rel.schema[c].kind != ColumnKind::Sequence(Box::new(ColumnKind::Vector(4))) {
        return Err(Error::Type(format!("column {col:?} must be a sequence of 4-vectors")));
    }
    let mut rows = Vec::new();
    for row in &rel.rows {
        let boxes = elements(&row[c])
            .iter()
            .map(|v| match vector(v) {
                [a, b, c, d] => BoundingBox::new(*a, *b, *c, *d).map_err(Error::Validation),
                _ => Err(Error::Type("box vectors have four coordinates".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let d = direction(&boxes, i, j, eps)?;
        rows.push(vec![row[k].clone(), Value::Cat(format!("{d:?}"))]);
    }
    RppRelation::new(
        vec![
            rel.schema[k].clone(),
            Column::new("direction", ColumnKind::Categorical),
        ],
        rows,
    )
}

/// Group keys of a relation in row order (for reports).
pub fn group_keys(arel: &ArrableRelation) -> Vec<String> {
    let k = arel.key_index();
    arel.relation.rows.iter().map(|r| r[k].to_string()).collect()
}

/// Count rows per distinct value of a basic column.
pub fn histogram(rel: &RppRelation, col: &str) -> Result<BTreeMap<String, usize>> {
    let c = rel.column(col)?;
    let mut out = BTreeMap::new();
    for r in &rel.rows {
        *out.entry(r[c].to_string()).or_default() += 1;
    }
    Ok(out)
}
