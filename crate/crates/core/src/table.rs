//! Labeled nonnegative tables and the elementwise / structural transforms
//! applied to them before any decomposition.
//!
//! A [`CountTable`] is the universal input. It is validated on construction:
//! negative cells are rejected and all-zero rows or columns are removed (each
//! removal is logged and kept in [`CountTable::dropped`]). Every transform
//! returns a new table and carries the labels through unchanged.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SicaError};

/// Tolerance on the unit sum of probability tables and weight vectors.
pub const UNIT_SUM_TOL: f64 = 1e-12;

/// Default relative tolerance used when merging proportional lines.
pub const DEFAULT_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

/// A row or column removed during validation because all of its cells were zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedLine {
    pub axis: Axis,
    /// Position in the table as it was supplied.
    pub index: usize,
    pub label: String,
}

/// Labeled nonnegative I x J table.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    values: DMatrix<f64>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    dropped: Vec<DroppedLine>,
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

impl CountTable {
    /// Validates `values` and removes all-zero rows and columns.
    pub fn new(
        values: DMatrix<f64>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        if row_labels.len() != values.nrows() || col_labels.len() != values.ncols() {
            return Err(SicaError::DimensionMismatch(format!(
                "{}x{} values with {} row labels and {} column labels",
                values.nrows(),
                values.ncols(),
                row_labels.len(),
                col_labels.len()
            )));
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                let v = values[(i, j)];
                if !v.is_finite() {
                    return Err(SicaError::NonNumeric {
                        row: i + 1,
                        col: j + 1,
                        text: v.to_string(),
                    });
                }
                if v < 0.0 {
                    return Err(SicaError::NegativeValue {
                        row: i + 1,
                        col: j + 1,
                        value: v,
                    });
                }
            }
        }

        let mut dropped = Vec::new();
        let keep_rows: Vec<usize> = (0..values.nrows())
            .filter(|&i| {
                let keep = values.row(i).iter().any(|&v| v > 0.0);
                if !keep {
                    log::warn!("dropping all-zero row {} ({})", i + 1, row_labels[i]);
                    dropped.push(DroppedLine {
                        axis: Axis::Row,
                        index: i,
                        label: row_labels[i].clone(),
                    });
                }
                keep
            })
            .collect();
        let keep_cols: Vec<usize> = (0..values.ncols())
            .filter(|&j| {
                let keep = values.column(j).iter().any(|&v| v > 0.0);
                if !keep {
                    log::warn!("dropping all-zero column {} ({})", j + 1, col_labels[j]);
                    dropped.push(DroppedLine {
                        axis: Axis::Column,
                        index: j,
                        label: col_labels[j].clone(),
                    });
                }
                keep
            })
            .collect();
        if keep_rows.is_empty() || keep_cols.is_empty() {
            return Err(SicaError::EmptyTable);
        }

        let values = DMatrix::from_fn(keep_rows.len(), keep_cols.len(), |i, j| {
            values[(keep_rows[i], keep_cols[j])]
        });
        Ok(CountTable {
            values,
            row_labels: keep_rows.iter().map(|&i| row_labels[i].clone()).collect(),
            col_labels: keep_cols.iter().map(|&j| col_labels[j].clone()).collect(),
            dropped,
        })
    }

    /// Builds a table from row vectors with generated labels `R1..`, `C1..`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(SicaError::EmptyTable);
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(SicaError::Ragged {
                    line: i + 1,
                    expected: ncols,
                    found: r.len(),
                });
            }
        }
        let values = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
        Self::new(
            values,
            default_labels("R", nrows),
            default_labels("C", ncols),
        )
    }

    /// Same labels, new values. The caller guarantees the values keep the
    /// zero pattern of a valid table.
    fn with_values(&self, values: DMatrix<f64>) -> Self {
        debug_assert_eq!(values.shape(), self.values.shape());
        CountTable {
            values,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            dropped: self.dropped.clone(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Lines removed during validation, in the order they were found.
    pub fn dropped(&self) -> &[DroppedLine] {
        &self.dropped
    }

    pub fn total(&self) -> f64 {
        self.values.sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.values.column_iter().map(|c| c.sum()).collect()
    }

    pub fn zero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0.0).count()
    }

    pub fn has_zeros(&self) -> bool {
        self.values.iter().any(|&v| v == 0.0)
    }

    pub fn to_correspondence(&self) -> Result<CorrespondenceTable> {
        to_correspondence(self)
    }

    /// Returns `(a_i n_ij b_j)`.
    pub fn scale_rows_cols(&self, row_factors: &[f64], col_factors: &[f64]) -> Result<Self> {
        if row_factors.len() != self.nrows() || col_factors.len() != self.ncols() {
            return Err(SicaError::DimensionMismatch(
                "scaling vectors do not match the table shape".into(),
            ));
        }
        if row_factors
            .iter()
            .chain(col_factors)
            .any(|&f| !(f > 0.0 && f.is_finite()))
        {
            return Err(SicaError::InvalidArgument(
                "scaling factors must be positive and finite".into(),
            ));
        }
        let values = DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| {
            row_factors[i] * self.values[(i, j)] * col_factors[j]
        });
        Ok(self.with_values(values))
    }

    /// Reorders rows and columns: output row `k` is input row `row_order[k]`.
    pub fn permute(&self, row_order: &[usize], col_order: &[usize]) -> Self {
        self.select(row_order, col_order)
    }

    /// Sub-table on the given rows and columns (in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        CountTable {
            values: DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
                self.values[(rows[i], cols[j])]
            }),
            row_labels: rows.iter().map(|&i| self.row_labels[i].clone()).collect(),
            col_labels: cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
            dropped: Vec::new(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_labeled_csv(out, &self.values, &self.row_labels, &self.col_labels)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TableJson::from(self))?)
    }
}

/// Plain serializable view of a table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableJson {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<DroppedLine>,
}

impl From<&CountTable> for TableJson {
    fn from(t: &CountTable) -> Self {
        TableJson {
            row_labels: t.row_labels.clone(),
            col_labels: t.col_labels.clone(),
            values: matrix_rows(&t.values),
            dropped: t.dropped.clone(),
        }
    }
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn write_labeled_csv<W: Write>(
    out: W,
    values: &DMatrix<f64>,
    row_labels: &[String],
    col_labels: &[String],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(col_labels.iter().cloned());
    w.write_record(&header)?;
    for (i, label) in row_labels.iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend(values.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV layout options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub has_row_labels: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
            has_row_labels: true,
        }
    }
}

/// Reads a rectangular nonnegative numeric grid from UTF-8 CSV. Lines
/// starting with `#` are skipped.
pub fn ingest_csv<R: Read>(source: R, options: &CsvOptions) -> Result<CountTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);

    let mut header: Option<Vec<String>> = None;
    let mut row_labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;

    for (line_idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = line_idx + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if options.has_header && header.is_none() {
            let fields: Vec<String> = record.iter().map(str::to_owned).collect();
            width = Some(fields.len());
            header = Some(fields);
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(SicaError::Ragged {
                line,
                expected,
                found: record.len(),
            });
        }
        let data_row = rows.len() + 1;
        let mut fields = record.iter();
        if options.has_row_labels {
            row_labels.push(fields.next().unwrap_or_default().to_owned());
        } else {
            row_labels.push(format!("R{data_row}"));
        }
        let mut values = Vec::with_capacity(expected);
        for (k, text) in fields.enumerate() {
            let value: f64 = text.parse().map_err(|_| SicaError::NonNumeric {
                row: data_row,
                col: k + 1,
                text: text.to_owned(),
            })?;
            if !value.is_finite() {
                return Err(SicaError::NonNumeric {
                    row: data_row,
                    col: k + 1,
                    text: text.to_owned(),
                });
            }
            if value < 0.0 {
                return Err(SicaError::NegativeValue {
                    row: data_row,
                    col: k + 1,
                    value,
                });
            }
            values.push(value);
        }
        rows.push(values);
    }

    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(SicaError::EmptyTable);
    }
    let col_labels = match header {
        Some(h) => {
            let skip = usize::from(options.has_row_labels);
            h.into_iter().skip(skip).collect()
        }
        None => default_labels("C", ncols),
    };
    let values = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
    CountTable::new(values, row_labels, col_labels)
}

/// Probability table P = N / n with its marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceTable {
    probs: DMatrix<f64>,
    row_masses: Vec<f64>,
    col_masses: Vec<f64>,
    grand_total: f64,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl CorrespondenceTable {
    /// Normalizes a nonnegative matrix to unit sum. Every row and column
    /// must carry positive mass.
    pub fn from_matrix(
        values: &DMatrix<f64>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        if row_labels.len() != values.nrows() || col_labels.len() != values.ncols() {
            return Err(SicaError::DimensionMismatch("label count".into()));
        }
        let total = values.sum();
        if !(total > 0.0) {
            return Err(SicaError::ZeroTotal);
        }
        let probs = values / total;
        let row_masses: Vec<f64> = probs.row_iter().map(|r| r.sum()).collect();
        let col_masses: Vec<f64> = probs.column_iter().map(|c| c.sum()).collect();
        if let Some(i) = row_masses.iter().position(|&m| !(m > 0.0)) {
            return Err(SicaError::ZeroRowSum { row: i + 1 });
        }
        if let Some(j) = col_masses.iter().position(|&m| !(m > 0.0)) {
            return Err(SicaError::InvalidArgument(format!(
                "column {} has zero mass",
                j + 1
            )));
        }
        Ok(CorrespondenceTable {
            probs,
            row_masses,
            col_masses,
            grand_total: total,
            row_labels,
            col_labels,
        })
    }

    pub fn nrows(&self) -> usize {
        self.probs.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.probs.ncols()
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.probs[(i, j)]
    }

    pub fn row_masses(&self) -> &[f64] {
        &self.row_masses
    }

    pub fn col_masses(&self) -> &[f64] {
        &self.col_masses
    }

    pub fn grand_total(&self) -> f64 {
        self.grand_total
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Largest absolute deviation of the marginals from 1/I and 1/J.
    pub fn uniform_marginal_deviation(&self) -> f64 {
        let ri = 1.0 / self.nrows() as f64;
        let cj = 1.0 / self.ncols() as f64;
        self.row_masses
            .iter()
            .map(|r| (r - ri).abs())
            .chain(self.col_masses.iter().map(|c| (c - cj).abs()))
            .fold(0.0, f64::max)
    }
}

pub fn to_correspondence(t: &CountTable) -> Result<CorrespondenceTable> {
    CorrespondenceTable::from_matrix(&t.values, t.row_labels.clone(), t.col_labels.clone())
}

/// Row and column weights, each positive and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    row_weights: Vec<f64>,
    col_weights: Vec<f64>,
}

impl WeightPair {
    pub fn new(row_weights: Vec<f64>, col_weights: Vec<f64>) -> Result<Self> {
        for (name, w) in [("row", &row_weights), ("column", &col_weights)] {
            if w.is_empty() {
                return Err(SicaError::InvalidWeights(format!("empty {name} weights")));
            }
            if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(SicaError::InvalidWeights(format!(
                    "{name} weights must be positive"
                )));
            }
            let s: f64 = w.iter().sum();
            if (s - 1.0).abs() > UNIT_SUM_TOL {
                return Err(SicaError::InvalidWeights(format!(
                    "{name} weights sum to {s}, expected 1"
                )));
            }
        }
        Ok(WeightPair {
            row_weights,
            col_weights,
        })
    }

    /// Normalizes arbitrary positive vectors to unit sum.
    pub fn normalized(row: &[f64], col: &[f64]) -> Result<Self> {
        let rs: f64 = row.iter().sum();
        let cs: f64 = col.iter().sum();
        Self::new(
            row.iter().map(|x| x / rs).collect(),
            col.iter().map(|x| x / cs).collect(),
        )
    }

    /// (1/I, 1/J).
    pub fn uniform(nrows: usize, ncols: usize) -> Self {
        WeightPair {
            row_weights: vec![1.0 / nrows as f64; nrows],
            col_weights: vec![1.0 / ncols as f64; ncols],
        }
    }

    /// The row and column masses of `p`.
    pub fn masses(p: &CorrespondenceTable) -> Self {
        WeightPair {
            row_weights: p.row_masses.clone(),
            col_weights: p.col_masses.clone(),
        }
    }

    pub fn row(&self) -> &[f64] {
        &self.row_weights
    }

    pub fn col(&self) -> &[f64] {
        &self.col_weights
    }
}

/// Elementwise power `n_ij^alpha`. Zero cells stay zero.
pub fn power_transform(t: &CountTable, alpha: f64) -> Result<CountTable> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SicaError::InvalidAlpha(alpha));
    }
    if alpha < 1.0 && t.has_zeros() {
        log::warn!(
            "power transform with alpha = {alpha} on a table with zero cells: \
             the log-ratio limit needs strictly positive data"
        );
    }
    if alpha == 1.0 {
        return Ok(t.clone());
    }
    Ok(t.with_values(t.values.map(|v| if v == 0.0 { 0.0 } else { v.powf(alpha) })))
}

/// Presence/absence table: 1 where `n_ij > 0`, else 0.
pub fn sign_transform(t: &CountTable) -> CountTable {
    t.with_values(t.values.map(|v| if v > 0.0 { 1.0 } else { 0.0 }))
}

/// Divides each row by its sum (closure).
pub fn row_closure(t: &CountTable) -> Result<CountTable> {
    let sums = t.row_sums();
    if let Some(i) = sums.iter().position(|&s| !(s > 0.0)) {
        return Err(SicaError::ZeroRowSum { row: i + 1 });
    }
    Ok(
        t.with_values(DMatrix::from_fn(t.nrows(), t.ncols(), |i, j| {
            t.values[(i, j)] / sums[i]
        })),
    )
}

/// Result of merging proportional rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeResult {
    pub merged: CountTable,
    /// For each merged row, the original row indices summed into it.
    pub row_groups: Vec<Vec<usize>>,
    pub col_groups: Vec<Vec<usize>>,
}

fn proportional(u: &[f64], v: &[f64], tol: f64) -> bool {
    let su: f64 = u.iter().sum();
    let sv: f64 = v.iter().sum();
    let s = sv / su;
    let scale = u
        .iter()
        .map(|x| (x * s).abs())
        .chain(v.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    u.iter()
        .zip(v)
        .all(|(a, b)| (a * s - b).abs() <= tol * scale)
}

/// Groups lines (rows of `m`) that are proportional to the first member of
/// an earlier group.
fn group_proportional_rows(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<usize>> {
    let rows: Vec<Vec<f64>> = matrix_rows(m);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match groups
            .iter_mut()
            .find(|g| proportional(&rows[g[0]], row, tol))
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

fn join_labels(labels: &[String], group: &[usize]) -> String {
    group
        .iter()
        .map(|&k| labels[k].as_str())
        .collect::<Vec<_>>()
        .join("+")
}

/// Sums proportional rows, then proportional columns, repeating until
/// nothing changes. Correspondence analysis is unchanged by this merge.
pub fn merge_equivalent(t: &CountTable, tol: f64) -> MergeResult {
    let mut values = t.values.clone();
    let mut row_groups: Vec<Vec<usize>> = (0..t.nrows()).map(|i| vec![i]).collect();
    let mut col_groups: Vec<Vec<usize>> = (0..t.ncols()).map(|j| vec![j]).collect();

    loop {
        let rg = group_proportional_rows(&values, tol);
        let row_changed = rg.len() < values.nrows();
        if row_changed {
            values = DMatrix::from_fn(rg.len(), values.ncols(), |g, j| {
                rg[g].iter().map(|&i| values[(i, j)]).sum()
            });
            row_groups = rg
                .iter()
                .map(|g| {
                    let mut members: Vec<usize> =
                        g.iter().flat_map(|&k| row_groups[k].clone()).collect();
                    members.sort_unstable();
                    members
                })
                .collect();
        }

        let cg = group_proportional_rows(&values.transpose(), tol);
        let col_changed = cg.len() < values.ncols();
        if col_changed {
            values = DMatrix::from_fn(values.nrows(), cg.len(), |i, g| {
                cg[g].iter().map(|&j| values[(i, j)]).sum()
            });
            col_groups = cg
                .iter()
                .map(|g| {
                    let mut members: Vec<usize> =
                        g.iter().flat_map(|&k| col_groups[k].clone()).collect();
                    members.sort_unstable();
                    members
                })
                .collect();
        }

        if !row_changed && !col_changed {
            break;
        }
    }

    let merged = CountTable {
        values,
        row_labels: row_groups
            .iter()
            .map(|g| join_labels(&t.row_labels, g))
            .collect(),
        col_labels: col_groups
            .iter()
            .map(|g| join_labels(&t.col_labels, g))
            .collect(),
        dropped: t.dropped.clone(),
    };
    MergeResult {
        merged,
        row_groups,
        col_groups,
    }
}

/// Compressed-row storage of the positive cells of a table. Sign tables of
/// extremely sparse data are held in this form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SignPattern {
    /// Cells strictly above `threshold`.
    pub fn from_threshold(m: &DMatrix<f64>, threshold: f64) -> Self {
        let mut row_ptr = Vec::with_capacity(m.nrows() + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for i in 0..m.nrows() {
            col_idx.extend((0..m.ncols()).filter(|&j| m[(i, j)] > threshold));
            row_ptr.push(col_idx.len());
        }
        SignPattern {
            nrows: m.nrows(),
            ncols: m.ncols(),
            row_ptr,
            col_idx,
        }
    }

    pub fn from_table(t: &CountTable) -> Self {
        Self::from_threshold(&t.values, 0.0)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of positive cells (the support size).
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn zeros(&self) -> usize {
        self.nrows * self.ncols - self.nnz()
    }

    /// Sorted column indices of the positive cells in row `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    /// Iterates `(i, j)` over the support in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).iter().map(move |&j| (i, j)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j) in self.iter() {
            m[(i, j)] = 1.0;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&[f64]]) -> CountTable {
        CountTable::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn ingests_small_headerless_csv() {
        let opts = CsvOptions {
            has_header: false,
            has_row_labels: false,
            ..Default::default()
        };
        let t = ingest_csv("0,2\n1,30".as_bytes(), &opts).unwrap();
        assert_eq!(
            t.values(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 30.0])
        );
        assert_eq!(t.row_labels(), ["R1", "R2"]);
        assert_eq!(t.col_labels(), ["C1", "C2"]);
    }

    #[test]
    fn ingest_drops_zero_row_with_record() {
        let src = "id,a,b\nx,1,2\ny,0,0\nz,3,4\n";
        let t = ingest_csv(src.as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!(t.nrows(), 2);
        assert_eq!(t.row_labels(), ["x", "z"]);
        assert_eq!(t.dropped().len(), 1);
        assert_eq!(t.dropped()[0].label, "y");
        assert_eq!(t.dropped()[0].axis, Axis::Row);
    }

    #[test]
    fn ingest_rejects_negative_with_coordinates() {
        let err = ingest_csv(
            "1,2\n3,-4\n".as_bytes(),
            &CsvOptions {
                has_header: false,
                has_row_labels: false,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(
            matches!(err, SicaError::NegativeValue { row: 2, col: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn ingest_rejects_ragged_and_text() {
        let opts = CsvOptions {
            has_header: false,
            has_row_labels: false,
            ..Default::default()
        };
        assert!(matches!(
            ingest_csv("1,2\n3\n".as_bytes(), &opts),
            Err(SicaError::Ragged { line: 2, .. })
        ));
        assert!(matches!(
            ingest_csv("1,2\n3,x\n".as_bytes(), &opts),
            Err(SicaError::NonNumeric { row: 2, col: 2, .. })
        ));
    }

    #[test]
    fn ingest_semicolon_delimiter() {
        let opts = CsvOptions {
            delimiter: b';',
            ..Default::default()
        };
        let t = ingest_csv(" ;a;b\nr;1.5;2\n".as_bytes(), &opts).unwrap();
        assert_eq!(t.col_labels(), ["a", "b"]);
        assert_eq!(t.get(0, 0), 1.5);
    }

    #[test]
    fn correspondence_of_uniform_table() {
        let p = table(&[&[1.0, 1.0], &[1.0, 1.0]])
            .to_correspondence()
            .unwrap();
        assert!(p.probs().iter().all(|&x| x == 0.25));
        assert_eq!(p.row_masses(), [0.5, 0.5]);
        assert_eq!(p.col_masses(), [0.5, 0.5]);
    }

    #[test]
    fn correspondence_of_merged_example() {
        let p = table(&[&[12.0, 8.0], &[6.0, 0.0]])
            .to_correspondence()
            .unwrap();
        assert!((p.p(0, 0) - 12.0 / 26.0).abs() < 1e-15);
        assert!((p.p(0, 1) - 8.0 / 26.0).abs() < 1e-15);
        assert!((p.row_masses()[0] - 20.0 / 26.0).abs() < 1e-15);
        assert!((p.row_masses()[1] - 6.0 / 26.0).abs() < 1e-15);
        assert_eq!(p.grand_total(), 26.0);
    }

    #[test]
    fn power_transform_cases() {
        let t = table(&[&[1.0, 4.0], &[9.0, 16.0]]);
        assert_eq!(power_transform(&t, 1.0).unwrap(), t);
        let h = power_transform(&t, 0.5).unwrap();
        assert_eq!(
            h.values(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0])
        );
        assert!(matches!(
            power_transform(&t, 0.0),
            Err(SicaError::InvalidAlpha(_))
        ));
        assert!(matches!(
            power_transform(&t, -1.0),
            Err(SicaError::InvalidAlpha(_))
        ));
    }

    #[test]
    fn sign_and_closure() {
        let t = table(&[&[0.0, 2.0], &[1.0, 30.0]]);
        let s = sign_transform(&t);
        assert_eq!(
            s.values(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0])
        );
        assert_eq!(sign_transform(&s), s);

        let c = row_closure(&table(&[&[2.0, 2.0], &[1.0, 3.0]])).unwrap();
        assert_eq!(
            c.values(),
            &DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.25, 0.75])
        );

        let rs = row_closure(&s).unwrap();
        assert_eq!(
            rs.values(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.5])
        );
    }

    #[test]
    fn merges_example_one() {
        let t = table(&[
            &[1.0, 1.0, 1.0, 1.0, 1.0],
            &[1.0, 1.0, 0.0, 0.0, 1.0],
            &[1.0, 1.0, 0.0, 0.0, 1.0],
            &[1.0, 1.0, 1.0, 1.0, 1.0],
            &[1.0, 1.0, 1.0, 1.0, 1.0],
            &[1.0, 1.0, 1.0, 1.0, 1.0],
        ]);
        let m = merge_equivalent(&t, DEFAULT_MERGE_TOL);
        assert_eq!(
            m.merged.values(),
            &DMatrix::from_row_slice(2, 2, &[12.0, 8.0, 6.0, 0.0])
        );
        assert_eq!(m.row_groups, vec![vec![0, 3, 4, 5], vec![1, 2]]);
        assert_eq!(m.col_groups, vec![vec![0, 1, 4], vec![2, 3]]);
        assert_eq!(m.merged.row_labels()[1], "R2+R3");
    }

    #[test]
    fn merge_without_proportional_lines_is_identity() {
        let t = table(&[&[1.0, 2.0], &[3.0, 5.0]]);
        let m = merge_equivalent(&t, DEFAULT_MERGE_TOL);
        assert_eq!(m.merged.values(), t.values());
        assert_eq!(m.row_groups, vec![vec![0], vec![1]]);
        assert_eq!(m.col_groups, vec![vec![0], vec![1]]);
    }

    #[test]
    fn sign_pattern_matches_dense() {
        let t = table(&[&[0.0, 2.0, 0.0], &[1.0, 30.0, 4.0]]);
        let sp = SignPattern::from_table(&t);
        assert_eq!(sp.nnz(), 4);
        assert_eq!(sp.zeros(), 2);
        assert_eq!(sp.row(0), [1]);
        assert!(sp.contains(1, 2));
        assert!(!sp.contains(0, 0));
        assert_eq!(sp.to_dense(), *sign_transform(&t).values());
    }

    #[test]
    fn weights_validation() {
        assert!(WeightPair::new(vec![0.5, 0.5], vec![1.0]).is_ok());
        assert!(WeightPair::new(vec![0.5, 0.6], vec![1.0]).is_err());
        assert!(WeightPair::new(vec![1.0, 0.0], vec![1.0]).is_err());
        let w = WeightPair::normalized(&[1.0, 3.0], &[2.0, 2.0]).unwrap();
        assert_eq!(w.row(), [0.25, 0.75]);
    }
}
