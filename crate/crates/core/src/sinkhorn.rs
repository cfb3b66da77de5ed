//! Simultaneous row/column biproportional scaling and the block structure
//! it reveals.
//!
//! Each iteration divides the current probability table by the outer
//! product of its own row and column sums, `d_ij = q_ij / (q_i+ q_+j)`, then
//! renormalizes `q = d / Σ d`. Two diagnostics are tracked per iteration:
//!
//! * `c2dist = Σ_ij |G_j + G_i − 2|` with `G_i`, `G_j` the row and column
//!   means of `d`;
//! * `ratio = Σ d / (I J)`.
//!
//! A fully indecomposable support drives `c2dist` to zero. A reducible
//! support makes it oscillate with period two while the off-block cells of
//! `d` collapse toward zero.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ca::ca_decompose;
use crate::error::{Result, SicaError};
use crate::table::{matrix_rows, write_labeled_csv, CorrespondenceTable, CountTable, SignPattern};

/// Default block-detection threshold, as a fraction of the mean of `d`.
pub const DEFAULT_ZERO_TOL_FACTOR: f64 = 1e-3;

/// Relative tolerance used to recognise period-two oscillation of `c2dist`.
pub const PERIOD_TOL: f64 = 1e-6;

/// Singular values within this distance of 1 count as unit.
pub const UNIT_SV_TOL: f64 = 1e-6;

/// A leading CA singular value at or above this is flagged as possibly
/// coming from a near block structure.
pub const BLOCK_ADVISORY_RHO: f64 = 0.837;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkhornOptions {
    pub iters: usize,
    /// Stop as soon as `c2dist` falls to or below this.
    pub tol: f64,
    /// Replace zero cells by this count before scaling. Off by default.
    pub epsilon: Option<f64>,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        SinkhornOptions {
            iters: 500,
            tol: 1e-8,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingStatus {
    Converged,
    OscillatingPeriod2,
    MaxIters,
}

impl std::fmt::Display for ScalingStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScalingStatus::Converged => "converged",
            ScalingStatus::OscillatingPeriod2 => "oscillating_period2",
            ScalingStatus::MaxIters => "max_iters",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub c2dist: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    d: DMatrix<f64>,
    previous_d: Option<DMatrix<f64>>,
    source: DMatrix<f64>,
    input_row_marginals: Vec<f64>,
    input_col_marginals: Vec<f64>,
    trace: Vec<TraceRow>,
    status: ScalingStatus,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

#[derive(Serialize)]
struct ScalingJson<'a> {
    status: ScalingStatus,
    iterations: usize,
    row_labels: &'a [String],
    col_labels: &'a [String],
    d: Vec<Vec<f64>>,
    trace: &'a [TraceRow],
}

impl ScalingResult {
    /// The scaled table at the last iteration.
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// `d / (I J)`.
    pub fn q(&self) -> DMatrix<f64> {
        let ij = (self.d.nrows() * self.d.ncols()) as f64;
        self.d.map(|x| x / ij)
    }

    /// The scaled table one iteration before the last, if there was one.
    pub fn previous_d(&self) -> Option<&DMatrix<f64>> {
        self.previous_d.as_ref()
    }

    /// The probability table that entered the first iteration.
    pub fn source(&self) -> &DMatrix<f64> {
        &self.source
    }

    /// Row sums of the normalized table fed into the last iteration.
    pub fn input_row_marginals(&self) -> &[f64] {
        &self.input_row_marginals
    }

    pub fn input_col_marginals(&self) -> &[f64] {
        &self.input_col_marginals
    }

    /// Row sums of `d / Σ d` after the last iteration.
    pub fn output_row_marginals(&self) -> Vec<f64> {
        let s = self.d.sum();
        self.d.row_iter().map(|r| r.sum() / s).collect()
    }

    pub fn output_col_marginals(&self) -> Vec<f64> {
        let s = self.d.sum();
        self.d.column_iter().map(|c| c.sum() / s).collect()
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn status(&self) -> ScalingStatus {
        self.status
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn last(&self) -> TraceRow {
        *self.trace.last().expect("at least one iteration")
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// `d` as a correspondence table (normalized to unit mass).
    pub fn to_correspondence(&self) -> Result<CorrespondenceTable> {
        CorrespondenceTable::from_matrix(&self.d, self.row_labels.clone(), self.col_labels.clone())
    }

    /// Mean of the cells of `d`, the default scale for block detection.
    pub fn mean_d(&self) -> f64 {
        self.d.sum() / (self.d.nrows() * self.d.ncols()) as f64
    }

    /// Row and column scalings `a`, `b` with `d_ij ≈ a_i p_ij b_j` on the
    /// support of each block, recovered by propagating `log(d/p)` along a
    /// spanning tree of the block. The first row of every block gets
    /// `a = 1`. Lines outside every block get `NaN`.
    pub fn implied_scalings(&self, partition: &BlockPartition) -> ImpliedScalings {
        let (nr, nc) = (self.d.nrows(), self.d.ncols());
        let pattern = SignPattern::from_threshold(&self.d, partition.zero_tol);
        let mut cols_of_row: Vec<Vec<usize>> = vec![Vec::new(); nr];
        let mut rows_of_col: Vec<Vec<usize>> = vec![Vec::new(); nc];
        for (i, j) in pattern.iter() {
            if self.source[(i, j)] > 0.0 {
                cols_of_row[i].push(j);
                rows_of_col[j].push(i);
            }
        }
        let logr = |i: usize, j: usize| (self.d[(i, j)] / self.source[(i, j)]).ln();
        let mut la = vec![f64::NAN; nr];
        let mut lb = vec![f64::NAN; nc];
        for b in &partition.blocks {
            let Some(&start) = b.row_indices.first() else {
                continue;
            };
            la[start] = 0.0;
            let mut stack = vec![(true, start)];
            while let Some((is_row, k)) = stack.pop() {
                if is_row {
                    for &j in &cols_of_row[k] {
                        if lb[j].is_nan() {
                            lb[j] = logr(k, j) - la[k];
                            stack.push((false, j));
                        }
                    }
                } else {
                    for &i in &rows_of_col[k] {
                        if la[i].is_nan() {
                            la[i] = logr(i, k) - lb[k];
                            stack.push((true, i));
                        }
                    }
                }
            }
        }
        let mut residual: f64 = 0.0;
        for (i, cols) in cols_of_row.iter().enumerate() {
            for &j in cols {
                if !la[i].is_nan() && !lb[j].is_nan() {
                    residual = residual.max((logr(i, j) - la[i] - lb[j]).abs());
                }
            }
        }
        ImpliedScalings {
            row: la.iter().map(|x| x.exp()).collect(),
            col: lb.iter().map(|x| x.exp()).collect(),
            log_residual: residual,
        }
    }

    pub fn write_d_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_labeled_csv(out, &self.d, &self.row_labels, &self.col_labels)
    }

    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.trace {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ScalingJson {
            status: self.status,
            iterations: self.iterations(),
            row_labels: &self.row_labels,
            col_labels: &self.col_labels,
            d: matrix_rows(&self.d),
            trace: &self.trace,
        })?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpliedScalings {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    /// Largest `|log(d/p) − log a_i − log b_j|` over the block supports.
    pub log_residual: f64,
}

fn c2dist(d: &DMatrix<f64>) -> f64 {
    let (nr, nc) = (d.nrows(), d.ncols());
    let gi: Vec<f64> = d.row_iter().map(|r| r.sum() / nc as f64).collect();
    let gj: Vec<f64> = d.column_iter().map(|c| c.sum() / nr as f64).collect();
    let mut total = 0.0;
    for &a in &gi {
        for &b in &gj {
            total += (b + a - 2.0).abs();
        }
    }
    total
}

fn classify(trace: &[TraceRow]) -> ScalingStatus {
    let n = trace.len();
    if n < 3 {
        return ScalingStatus::MaxIters;
    }
    let (c0, c1, c2) = (
        trace[n - 1].c2dist,
        trace[n - 2].c2dist,
        trace[n - 3].c2dist,
    );
    let tol = PERIOD_TOL * c0.abs().max(1.0);
    if (c0 - c2).abs() <= tol && (c0 - c1).abs() > tol {
        ScalingStatus::OscillatingPeriod2
    } else {
        ScalingStatus::MaxIters
    }
}

/// Runs the simultaneous scaling for at most `opts.iters` iterations.
pub fn scale(t: &CountTable, opts: &SinkhornOptions) -> Result<ScalingResult> {
    if opts.iters == 0 {
        return Err(SicaError::InvalidArgument(
            "iters must be at least 1".into(),
        ));
    }
    let mut n = t.values().clone();
    if let Some(eps) = opts.epsilon {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(SicaError::InvalidArgument(format!(
                "epsilon must be positive, got {eps}"
            )));
        }
        n.iter_mut().filter(|x| **x == 0.0).for_each(|x| *x = eps);
    }
    let total = n.sum();
    if !(total > 0.0) {
        return Err(SicaError::ZeroTotal);
    }
    let source = n / total;
    let (nr, nc) = (source.nrows(), source.ncols());
    let ij = (nr * nc) as f64;

    let mut q = source.clone();
    let mut d = source.clone();
    let mut previous_d = None;
    let mut row_in = Vec::new();
    let mut col_in = Vec::new();
    let mut trace = Vec::with_capacity(opts.iters);
    let mut status = None;
    for iteration in 1..=opts.iters {
        row_in = q.row_iter().map(|r| r.sum()).collect::<Vec<f64>>();
        col_in = q.column_iter().map(|c| c.sum()).collect::<Vec<f64>>();
        let next = DMatrix::from_fn(nr, nc, |i, j| q[(i, j)] / (row_in[i] * col_in[j]));
        if iteration > 1 {
            previous_d = Some(std::mem::replace(&mut d, next));
        } else {
            d = next;
        }
        let s = d.sum();
        q = &d / s;
        let row = TraceRow {
            iteration,
            c2dist: c2dist(&d),
            ratio: s / ij,
        };
        log::debug!(
            "iteration {iteration}: c2dist {:.6e} ratio {:.9}",
            row.c2dist,
            row.ratio
        );
        trace.push(row);
        if row.c2dist <= opts.tol {
            status = Some(ScalingStatus::Converged);
            break;
        }
    }
    let status = status.unwrap_or_else(|| classify(&trace));
    if status != ScalingStatus::Converged {
        log::info!("scaling stopped after {} iterations: {status}", trace.len());
    }
    Ok(ScalingResult {
        d,
        previous_d,
        source,
        input_row_marginals: row_in,
        input_col_marginals: col_in,
        trace,
        status,
        row_labels: t.row_labels().to_vec(),
        col_labels: t.col_labels().to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    FullyIndecomposable,
    Reducible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub row_indices: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Common row sum of the normalized table entering the last iteration.
    pub row_marginal: f64,
    pub col_marginal: f64,
    /// Common row sum of `d / Σ d` after the last iteration.
    pub alternate_row_marginal: f64,
    pub alternate_col_marginal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub blocks: Vec<Block>,
    pub kind: PartitionKind,
    /// Threshold on `d` actually used.
    pub zero_tol: f64,
    /// Lines whose every cell fell below the threshold.
    pub unassigned_rows: Vec<usize>,
    pub unassigned_cols: Vec<usize>,
}

impl BlockPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block containing row `i`, if any.
    pub fn block_of_row(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.row_indices.contains(&i))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn mean_of(values: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&k| values[k]).sum::<f64>() / idx.len().max(1) as f64
}

/// Connected components of the bipartite graph on the cells of `d` above
/// `zero_tol` (default: [`DEFAULT_ZERO_TOL_FACTOR`] times the mean of `d`).
/// Blocks are ordered by their smallest row index.
pub fn detect_blocks(s: &ScalingResult, zero_tol: Option<f64>) -> Result<BlockPartition> {
    let tol = zero_tol.unwrap_or(DEFAULT_ZERO_TOL_FACTOR * s.mean_d());
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(SicaError::InvalidArgument(format!(
            "zero tolerance must be nonnegative, got {tol}"
        )));
    }
    let (nr, nc) = (s.d.nrows(), s.d.ncols());
    let pattern = SignPattern::from_threshold(&s.d, tol);
    let mut parent: Vec<usize> = (0..nr + nc).collect();
    let mut touched = vec![false; nr + nc];
    for (i, j) in pattern.iter() {
        touched[i] = true;
        touched[nr + j] = true;
        let (a, b) = (find(&mut parent, i), find(&mut parent, nr + j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }

    let mut roots: Vec<usize> = Vec::new();
    let mut members: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (k, _) in touched.iter().enumerate().filter(|(_, &t)| t) {
        let root = find(&mut parent, k);
        let slot = match roots.iter().position(|&r| r == root) {
            Some(p) => p,
            None => {
                roots.push(root);
                members.push((Vec::new(), Vec::new()));
                roots.len() - 1
            }
        };
        if k < nr {
            members[slot].0.push(k);
        } else {
            members[slot].1.push(k - nr);
        }
    }
    members.sort_by_key(|(rows, _)| rows.first().copied().unwrap_or(usize::MAX));

    let out_rows = s.output_row_marginals();
    let out_cols = s.output_col_marginals();
    let blocks: Vec<Block> = members
        .into_iter()
        .map(|(rows, cols)| Block {
            row_labels: rows.iter().map(|&i| s.row_labels[i].clone()).collect(),
            col_labels: cols.iter().map(|&j| s.col_labels[j].clone()).collect(),
            row_marginal: mean_of(&s.input_row_marginals, &rows),
            col_marginal: mean_of(&s.input_col_marginals, &cols),
            alternate_row_marginal: mean_of(&out_rows, &rows),
            alternate_col_marginal: mean_of(&out_cols, &cols),
            row_indices: rows,
            col_indices: cols,
        })
        .collect();
    let kind = if blocks.len() == 1 {
        PartitionKind::FullyIndecomposable
    } else {
        PartitionKind::Reducible
    };
    Ok(BlockPartition {
        blocks,
        kind,
        zero_tol: tol,
        unassigned_rows: (0..nr).filter(|&i| !touched[i]).collect(),
        unassigned_cols: (0..nc).filter(|&j| !touched[nr + j]).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSingularReport {
    /// Number of CA singular values within the tolerance of 1.
    pub unit_count: usize,
    /// `unit_count + 1`.
    pub block_estimate: usize,
    pub rho1: f64,
    /// Set when the leading singular value reaches [`BLOCK_ADVISORY_RHO`].
    pub near_block_advisory: bool,
    pub sigmas: Vec<f64>,
}

/// Counts unit CA singular values of `p`; `k` exact blocks give `k − 1`.
pub fn unit_singular_count(p: &CorrespondenceTable, tol: f64) -> UnitSingularReport {
    let dec = ca_decompose(p);
    let sigmas = dec.sigmas().to_vec();
    let unit_count = sigmas.iter().filter(|s| (*s - 1.0).abs() <= tol).count();
    let rho1 = sigmas.first().copied().unwrap_or(0.0);
    UnitSingularReport {
        unit_count,
        block_estimate: unit_count + 1,
        rho1,
        near_block_advisory: rho1 >= BLOCK_ADVISORY_RHO,
        sigmas,
    }
}
