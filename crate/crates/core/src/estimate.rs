//! Estimation from observational samples once an effect is identified.
//!
//! Total effects use the plug-in adjustment formula on discrete data; direct
//! effects use the least-squares coefficient of the exposure after the
//! adjustment set is partialled out. Causal changes apply the same formula
//! to both populations and take the difference.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::VariableId;
use crate::identify::{brace_list, Effect, Verdict, VerdictKind};

/// Relative tolerance on the diagonal of R below which a regressor is
/// considered collinear with the ones before it.
pub const SINGULAR_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// Non-negative integer codes.
    Discrete,
    Continuous,
}

/// Complete numeric sample table, stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    names: Vec<VariableId>,
    columns: Vec<Vec<f64>>,
    kind: DataKind,
}

impl Dataset {
    pub fn new(names: Vec<VariableId>, columns: Vec<Vec<f64>>, kind: DataKind) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Data(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::DuplicateVertex(name.to_string()));
            }
        }
        let rows = columns.first().map_or(0, Vec::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != rows {
                return Err(Error::Data(format!(
                    "column {name} has {} rows, expected {rows}",
                    col.len()
                )));
            }
            if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::Data(format!("column {name} has non-finite value {bad}")));
            }
            if kind == DataKind::Discrete {
                if let Some(bad) = col
                    .iter()
                    .find(|v| **v < 0.0 || v.fract() != 0.0 || **v > u32::MAX as f64)
                {
                    return Err(Error::Data(format!(
                        "column {name} has value {bad}; discrete cells must be non-negative integers"
                    )));
                }
            }
        }
        Ok(Dataset { names, columns, kind })
    }

    pub fn from_rows(names: Vec<VariableId>, rows: &[Vec<f64>], kind: DataKind) -> Result<Self> {
        let mut columns = vec![Vec::with_capacity(rows.len()); names.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(Error::Data(format!(
                    "row {} has {} cells, expected {}",
                    r + 1,
                    row.len(),
                    names.len()
                )));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Dataset::new(names, columns, kind)
    }

    /// Reads CSV with a header row of variable names and numeric cells.
    pub fn read_csv<R: Read>(reader: R, kind: DataKind) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names = rdr.headers()?.iter().map(VariableId::new).collect::<Result<Vec<_>>>()?;
        let mut columns = vec![Vec::new(); names.len()];
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            for (c, cell) in record.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!("row {}, column {}: {cell:?} is not a number", r + 2, names[c]))
                })?;
                columns[c].push(v);
            }
        }
        Dataset::new(names, columns, kind)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, kind: DataKind) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Dataset::read_csv(std::io::BufReader::new(file), kind)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.names.iter().map(VariableId::as_str))?;
        for r in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| c[r].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn names(&self) -> &[VariableId] {
        &self.names
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n.as_str() == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.position(name)?])
    }

    /// One more than the largest code observed (discrete data).
    pub fn cardinality(&self, name: &str) -> Result<u32> {
        let col = self.column(name)?;
        Ok(col.iter().fold(0u32, |m, &v| m.max(v as u32 + 1)))
    }

    fn codes(&self, name: &str) -> Result<Vec<u32>> {
        Ok(self.column(name)?.iter().map(|&v| v as u32).collect())
    }
}

/// Estimated `P(y | do(x))`: `probabilities[i][j]` is the probability of
/// outcome value `outcome_values[j]` under the intervention `exposure_values[i]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterventionalTable {
    pub exposure: VariableId,
    pub outcome: VariableId,
    pub exposure_values: Vec<u32>,
    pub outcome_values: Vec<u32>,
    pub probabilities: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AdjustOptions {
    /// Add-α smoothing of the conditional outcome frequencies. Without it, an
    /// exposure value missing from an observed stratum is a positivity error.
    pub laplace: Option<f64>,
}

fn check_endpoints<S: AsRef<str>>(x: &str, y: &str, w: &[S]) -> Result<()> {
    if x == y {
        return Err(Error::SameVertex(x.to_string()));
    }
    for v in w {
        let v = v.as_ref();
        if v == x || v == y {
            return Err(Error::Overlap(v.to_string()));
        }
    }
    Ok(())
}

fn require_kind(data: &Dataset, kind: DataKind) -> Result<()> {
    if data.kind() != kind {
        let what = match kind {
            DataKind::Discrete => "the adjustment formula needs discrete data",
            DataKind::Continuous => "regression needs continuous data",
        };
        return Err(Error::Data(what.to_string()));
    }
    Ok(())
}

#[derive(Default)]
struct Stratum {
    count: u64,
    by_x: Vec<u64>,
    by_xy: Vec<Vec<u64>>,
}

/// Plug-in `∑_w P̂(y|x,w) P̂(w)` over the observed strata of `w`.
pub fn adjustment_total<S: AsRef<str>>(
    data: &Dataset,
    x: &str,
    y: &str,
    w: &[S],
    opts: AdjustOptions,
) -> Result<InterventionalTable> {
    let cx = data.cardinality(x)?;
    let cy = data.cardinality(y)?;
    adjustment_with_support(data, x, y, w, cx, cy, opts)
}

fn adjustment_with_support<S: AsRef<str>>(
    data: &Dataset,
    x: &str,
    y: &str,
    w: &[S],
    cx: u32,
    cy: u32,
    opts: AdjustOptions,
) -> Result<InterventionalTable> {
    require_kind(data, DataKind::Discrete)?;
    check_endpoints(x, y, w)?;
    if let Some(alpha) = opts.laplace {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Data(format!("laplace smoothing must be positive, got {alpha}")));
        }
    }
    let xs = data.codes(x)?;
    let ys = data.codes(y)?;
    let ws = w.iter().map(|v| data.codes(v.as_ref())).collect::<Result<Vec<_>>>()?;
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::Data("dataset has no rows".into()));
    }

    let mut strata: BTreeMap<Vec<u32>, Stratum> = BTreeMap::new();
    for r in 0..n {
        let key: Vec<u32> = ws.iter().map(|c| c[r]).collect();
        let s = strata.entry(key).or_insert_with(|| Stratum {
            count: 0,
            by_x: vec![0; cx as usize],
            by_xy: vec![vec![0; cy as usize]; cx as usize],
        });
        s.count += 1;
        s.by_x[xs[r] as usize] += 1;
        s.by_xy[xs[r] as usize][ys[r] as usize] += 1;
    }

    let total = n as f64;
    let mut probabilities = vec![vec![0.0; cy as usize]; cx as usize];
    for (xv, row) in probabilities.iter_mut().enumerate() {
        for (key, s) in &strata {
            let weight = s.count as f64 / total;
            let nx = s.by_x[xv];
            match opts.laplace {
                None if nx == 0 => {
                    let stratum = w
                        .iter()
                        .zip(key)
                        .map(|(name, v)| format!("{}={v}", name.as_ref()))
                        .collect::<Vec<_>>()
                        .join(", ");
                    return Err(Error::Positivity {
                        exposure: x.to_string(),
                        value: xv as u32,
                        stratum: format!("{{{stratum}}}"),
                    });
                }
                None => {
                    for (yv, cell) in row.iter_mut().enumerate() {
                        *cell += s.by_xy[xv][yv] as f64 / nx as f64 * weight;
                    }
                }
                Some(alpha) => {
                    let denom = nx as f64 + alpha * cy as f64;
                    for (yv, cell) in row.iter_mut().enumerate() {
                        *cell += (s.by_xy[xv][yv] as f64 + alpha) / denom * weight;
                    }
                }
            }
        }
    }

    Ok(InterventionalTable {
        exposure: VariableId::new(x)?,
        outcome: VariableId::new(y)?,
        exposure_values: (0..cx).collect(),
        outcome_values: (0..cy).collect(),
        probabilities,
    })
}

/// `P̂(y)` repeated for every exposure value: the interventional table when
/// the exposure has no effect on the outcome.
pub fn marginal_table(data: &Dataset, x: &str, y: &str) -> Result<InterventionalTable> {
    let cx = data.cardinality(x)?;
    let cy = data.cardinality(y)?;
    marginal_with_support(data, x, y, cx, cy)
}

fn marginal_with_support(data: &Dataset, x: &str, y: &str, cx: u32, cy: u32) -> Result<InterventionalTable> {
    require_kind(data, DataKind::Discrete)?;
    check_endpoints::<&str>(x, y, &[])?;
    let ys = data.codes(y)?;
    let n = ys.len();
    if n == 0 {
        return Err(Error::Data("dataset has no rows".into()));
    }
    let mut counts = vec![0u64; cy as usize];
    for v in ys {
        counts[v as usize] += 1;
    }
    let row: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(InterventionalTable {
        exposure: VariableId::new(x)?,
        outcome: VariableId::new(y)?,
        exposure_values: (0..cx).collect(),
        outcome_values: (0..cy).collect(),
        probabilities: vec![row; cx as usize],
    })
}

/// Coefficient of `x` in the least-squares fit of `y` on an intercept, `x`
/// and `w`, via Householder QR.
pub fn partial_regression_coefficient<S: AsRef<str>>(data: &Dataset, x: &str, y: &str, w: &[S]) -> Result<f64> {
    require_kind(data, DataKind::Continuous)?;
    check_endpoints(x, y, w)?;
    let n = data.n_rows();
    let p = w.len() + 2;
    if n <= p {
        return Err(Error::InsufficientRows { needed: p, got: n });
    }
    let mut labels = vec!["intercept".to_string(), x.to_string()];
    let mut cols: Vec<&[f64]> = vec![data.column(x)?];
    for v in w {
        cols.push(data.column(v.as_ref())?);
        labels.push(v.as_ref().to_string());
    }
    let design = DMatrix::from_fn(n, p, |r, c| if c == 0 { 1.0 } else { cols[c - 1][r] });
    let norms: Vec<f64> = design.column_iter().map(|c| c.norm()).collect();
    let qr = design.qr();
    let r = qr.r();
    for j in 0..p {
        if r[(j, j)].abs() <= SINGULAR_TOLERANCE * norms[j].max(f64::MIN_POSITIVE) {
            return Err(Error::SingularDesign(labels[j].clone()));
        }
    }
    let mut rhs = DVector::from_column_slice(data.column(y)?);
    qr.q_tr_mul(&mut rhs);
    let top = rhs.rows(0, p).into_owned();
    let beta = r
        .solve_upper_triangular(&top)
        .ok_or_else(|| Error::SingularDesign(labels[1].clone()))?;
    Ok(beta[1])
}

/// Total effect of `x` on `y` in one population under an identifying verdict.
pub fn estimate_total(
    verdict: &Verdict,
    data: &Dataset,
    x: &str,
    y: &str,
    opts: AdjustOptions,
) -> Result<InterventionalTable> {
    match verdict.kind {
        VerdictKind::NotIdentifiable => Err(Error::NotIdentifiable),
        VerdictKind::NullEffect => marginal_table(data, x, y),
        VerdictKind::AdjustmentIdentifiable => {
            adjustment_total(data, x, y, verdict.adjustment_set.as_deref().unwrap_or_default(), opts)
        }
    }
}

/// Direct effect (path coefficient) of `x` on `y` in one population.
pub fn estimate_direct(verdict: &Verdict, data: &Dataset, x: &str, y: &str) -> Result<f64> {
    match verdict.kind {
        VerdictKind::NotIdentifiable => Err(Error::NotIdentifiable),
        VerdictKind::NullEffect => Ok(0.0),
        VerdictKind::AdjustmentIdentifiable => {
            partial_regression_coefficient(data, x, y, verdict.adjustment_set.as_deref().unwrap_or_default())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum EffectValue {
    Scalar(f64),
    Table(InterventionalTable),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Change {
    Scalar(f64),
    Table(Vec<Vec<f64>>),
}

/// Effect in each population and their difference (population 1 minus 2).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CausalChangeReport {
    pub quantity: Effect,
    pub exposure: VariableId,
    pub outcome: VariableId,
    pub adjustment_set: Vec<VariableId>,
    pub population1: EffectValue,
    pub population2: EffectValue,
    pub change: Change,
}

fn check_compatible(d1: &Dataset, d2: &Dataset) -> Result<()> {
    let mut a: Vec<_> = d1.names().to_vec();
    let mut b: Vec<_> = d2.names().to_vec();
    a.sort();
    b.sort();
    if a != b {
        return Err(Error::Data("datasets do not share the same variables".into()));
    }
    if d1.kind() != d2.kind() {
        return Err(Error::Data("datasets are of different kinds".into()));
    }
    Ok(())
}

pub fn causal_change(
    verdict: &Verdict,
    data1: &Dataset,
    data2: &Dataset,
    x: &str,
    y: &str,
    opts: AdjustOptions,
) -> Result<CausalChangeReport> {
    if verdict.kind == VerdictKind::NotIdentifiable {
        return Err(Error::NotIdentifiable);
    }
    check_compatible(data1, data2)?;
    let set = verdict.adjustment_set.clone().unwrap_or_default();
    let (population1, population2, change) = match verdict.effect {
        Effect::Total => {
            // common support so the two tables line up
            let cx = data1.cardinality(x)?.max(data2.cardinality(x)?);
            let cy = data1.cardinality(y)?.max(data2.cardinality(y)?);
            let table = |d: &Dataset| match verdict.kind {
                VerdictKind::NullEffect => marginal_with_support(d, x, y, cx, cy),
                _ => adjustment_with_support(d, x, y, &set, cx, cy, opts),
            };
            let t1 = table(data1)?;
            let t2 = table(data2)?;
            let diff = t1
                .probabilities
                .iter()
                .zip(&t2.probabilities)
                .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| a - b).collect())
                .collect();
            (EffectValue::Table(t1), EffectValue::Table(t2), Change::Table(diff))
        }
        Effect::Direct => {
            let a1 = estimate_direct(verdict, data1, x, y)?;
            let a2 = estimate_direct(verdict, data2, x, y)?;
            (
                EffectValue::Scalar(a1),
                EffectValue::Scalar(a2),
                Change::Scalar(a1 - a2),
            )
        }
    };
    Ok(CausalChangeReport {
        quantity: verdict.effect,
        exposure: VariableId::new(x)?,
        outcome: VariableId::new(y)?,
        adjustment_set: set,
        population1,
        population2,
        change,
    })
}

impl InterventionalTable {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("table serializes")
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![vec![
            self.exposure.to_string(),
            self.outcome.to_string(),
            "p".to_string(),
        ]];
        for (i, xv) in self.exposure_values.iter().enumerate() {
            for (j, yv) in self.outcome_values.iter().enumerate() {
                rows.push(vec![
                    xv.to_string(),
                    yv.to_string(),
                    format!("{:.6}", self.probabilities[i][j]),
                ]);
            }
        }
        align(&rows)
    }
}

impl CausalChangeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "quantity": self.quantity,
            "exposure": self.exposure,
            "outcome": self.outcome,
            "adjustment_set": self.adjustment_set,
            "population1": self.population1,
            "population2": self.population2,
            "change": self.change,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} causal change of {} on {} (adjusting for {})",
            self.quantity,
            self.exposure,
            self.outcome,
            brace_list(&self.adjustment_set)
        );
        let mut rows = Vec::new();
        match (&self.population1, &self.population2, &self.change) {
            (EffectValue::Table(t1), EffectValue::Table(t2), Change::Table(d)) => {
                rows.push(vec![
                    self.exposure.to_string(),
                    self.outcome.to_string(),
                    "population1".into(),
                    "population2".into(),
                    "change".into(),
                ]);
                for (i, xv) in t1.exposure_values.iter().enumerate() {
                    for (j, yv) in t1.outcome_values.iter().enumerate() {
                        rows.push(vec![
                            xv.to_string(),
                            yv.to_string(),
                            format!("{:.6}", t1.probabilities[i][j]),
                            format!("{:.6}", t2.probabilities[i][j]),
                            format!("{:.6}", d[i][j]),
                        ]);
                    }
                }
            }
            (EffectValue::Scalar(a), EffectValue::Scalar(b), Change::Scalar(c)) => {
                rows.push(vec![
                    "quantity".into(),
                    "population1".into(),
                    "population2".into(),
                    "change".into(),
                ]);
                rows.push(vec![
                    "coefficient".into(),
                    format!("{a:.6}"),
                    format!("{b:.6}"),
                    format!("{c:.6}"),
                ]);
            }
            _ => unreachable!("report values share one shape"),
        }
        out.push_str(&align(&rows));
        out
    }
}

/// Left-aligned columns separated by two spaces.
pub(crate) fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<width$}", width = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
