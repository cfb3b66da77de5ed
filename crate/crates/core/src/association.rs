//! Association (interaction) indices on probability tables and the two
//! weighted double-centering schemes they are built from.
//!
//! With weighted means `Y_i+ = Σ_j w_j y_ij`, `Y_+j = Σ_i w_i y_ij` and
//! `Y_++ = Σ_ij w_i w_j y_ij`:
//!
//! * multiplicative centering: `τ_ij = y_ij − Y_i+ Y_+j / Y_++`
//! * additive centering: `τ_ij = y_ij + Y_++ − Y_i+ − Y_+j`
//!
//! The CA index is the density `p_ij / (p_i+ p_+j)` centered either way with
//! mass weights; the log-ratio (LRA) index is `log p_ij` centered additively.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SicaError};
use crate::sinkhorn::BlockPartition;
use crate::table::{matrix_rows, write_labeled_csv, CorrespondenceTable, CountTable, WeightPair};

/// Largest marginal deviation accepted by [`mf_index`].
pub const BISTOCHASTIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociationKind {
    Ca,
    Lra,
    FirstOrder,
    Mf,
    BlockMf,
    PowerRatio,
    /// Output of [`double_center`] on an arbitrary transform.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    Additive,
    Multiplicative,
    /// Both schemes give the same matrix.
    Both,
    /// Not double-centered with respect to the recorded weights.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringMode {
    Additive,
    Multiplicative,
}

/// An I x J matrix of association values with the weights it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    values: DMatrix<f64>,
    weights: WeightPair,
    kind: AssociationKind,
    centering: Centering,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

#[derive(Serialize)]
struct AssociationJson<'a> {
    kind: AssociationKind,
    centering: Centering,
    weights: &'a WeightPair,
    row_labels: &'a [String],
    col_labels: &'a [String],
    values: Vec<Vec<f64>>,
}

impl AssociationMatrix {
    fn build(
        values: DMatrix<f64>,
        weights: WeightPair,
        kind: AssociationKind,
        centering: Centering,
        p: &CorrespondenceTable,
    ) -> Self {
        AssociationMatrix {
            values,
            weights,
            kind,
            centering,
            row_labels: p.row_labels().to_vec(),
            col_labels: p.col_labels().to_vec(),
        }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn weights(&self) -> &WeightPair {
        &self.weights
    }

    pub fn kind(&self) -> AssociationKind {
        self.kind
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Replaces the generated labels.
    pub fn with_labels(mut self, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        if row_labels.len() != self.values.nrows() || col_labels.len() != self.values.ncols() {
            return Err(SicaError::DimensionMismatch("label count".into()));
        }
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    /// `max(|Σ_i w_i τ_ij|, |Σ_j w_j τ_ij|)` over all lines, for the stored weights.
    pub fn centering_residual(&self) -> f64 {
        centering_residual(&self.values, self.weights.row(), self.weights.col())
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_labeled_csv(out, &self.values, &self.row_labels, &self.col_labels)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&AssociationJson {
            kind: self.kind,
            centering: self.centering,
            weights: &self.weights,
            row_labels: &self.row_labels,
            col_labels: &self.col_labels,
            values: matrix_rows(&self.values),
        })?)
    }
}

pub(crate) fn centering_residual(m: &DMatrix<f64>, row_w: &[f64], col_w: &[f64]) -> f64 {
    let by_col = (0..m.ncols()).map(|j| {
        (0..m.nrows())
            .map(|i| row_w[i] * m[(i, j)])
            .sum::<f64>()
            .abs()
    });
    let by_row = (0..m.nrows()).map(|i| {
        (0..m.ncols())
            .map(|j| col_w[j] * m[(i, j)])
            .sum::<f64>()
            .abs()
    });
    by_col.chain(by_row).fold(0.0, f64::max)
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

struct WeightedMeans {
    row: Vec<f64>,
    col: Vec<f64>,
    grand: f64,
}

fn weighted_means(y: &DMatrix<f64>, w: &WeightPair) -> WeightedMeans {
    let (rw, cw) = (w.row(), w.col());
    let row: Vec<f64> = (0..y.nrows())
        .map(|i| (0..y.ncols()).map(|j| y[(i, j)] * cw[j]).sum())
        .collect();
    let col: Vec<f64> = (0..y.ncols())
        .map(|j| (0..y.nrows()).map(|i| y[(i, j)] * rw[i]).sum())
        .collect();
    let grand = row.iter().zip(rw).map(|(m, w)| m * w).sum();
    WeightedMeans { row, col, grand }
}

fn center_values(y: &DMatrix<f64>, w: &WeightPair, mode: CenteringMode) -> Result<DMatrix<f64>> {
    if y.nrows() != w.row().len() || y.ncols() != w.col().len() {
        return Err(SicaError::DimensionMismatch(
            "weights do not match the matrix shape".into(),
        ));
    }
    let m = weighted_means(y, w);
    match mode {
        CenteringMode::Additive => Ok(DMatrix::from_fn(y.nrows(), y.ncols(), |i, j| {
            y[(i, j)] + m.grand - (m.row[i] + m.col[j])
        })),
        CenteringMode::Multiplicative => {
            if m.grand == 0.0 {
                return Err(SicaError::ZeroGrandMean);
            }
            Ok(DMatrix::from_fn(y.nrows(), y.ncols(), |i, j| {
                y[(i, j)] - m.row[i] * m.col[j] / m.grand
            }))
        }
    }
}

/// Weighted double centering of an arbitrary transform `y_ij = h(p_ij)`.
pub fn double_center(
    y: &DMatrix<f64>,
    w: &WeightPair,
    mode: CenteringMode,
) -> Result<AssociationMatrix> {
    let values = center_values(y, w, mode)?;
    Ok(AssociationMatrix {
        row_labels: default_labels("R", values.nrows()),
        col_labels: default_labels("C", values.ncols()),
        values,
        weights: w.clone(),
        kind: AssociationKind::Centered,
        centering: match mode {
            CenteringMode::Additive => Centering::Additive,
            CenteringMode::Multiplicative => Centering::Multiplicative,
        },
    })
}

fn density(p: &CorrespondenceTable) -> DMatrix<f64> {
    let (r, c) = (p.row_masses(), p.col_masses());
    DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| p.p(i, j) / (r[i] * c[j]))
}

/// CA index `p_ij / (p_i+ p_+j) − 1`.
pub fn ca_index(p: &CorrespondenceTable) -> AssociationMatrix {
    let values = density(p).map(|d| d - 1.0);
    AssociationMatrix::build(
        values,
        WeightPair::masses(p),
        AssociationKind::Ca,
        Centering::Both,
        p,
    )
}

fn first_zero(p: &CorrespondenceTable) -> Option<(usize, usize)> {
    (0..p.nrows())
        .flat_map(|i| (0..p.ncols()).map(move |j| (i, j)))
        .find(|&(i, j)| !(p.p(i, j) > 0.0))
}

/// Log-ratio index: `log p_ij` additively double-centered with weights `w`.
/// Zero cells are an error.
pub fn lra_index(p: &CorrespondenceTable, w: &WeightPair) -> Result<AssociationMatrix> {
    if let Some((i, j)) = first_zero(p) {
        return Err(SicaError::ZeroCell {
            row: i + 1,
            col: j + 1,
        });
    }
    let logs = p.probs().map(f64::ln);
    let values = center_values(&logs, w, CenteringMode::Additive)?;
    Ok(AssociationMatrix::build(
        values,
        w.clone(),
        AssociationKind::Lra,
        Centering::Additive,
        p,
    ))
}

/// [`lra_index`] after replacing zero cells of `p` by `epsilon`, the way
/// some raking packages regularize zeros. Off unless asked for.
pub fn lra_index_regularized(
    p: &CorrespondenceTable,
    w: &WeightPair,
    epsilon: f64,
) -> Result<AssociationMatrix> {
    if !(epsilon > 0.0) {
        return Err(SicaError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let logs = p
        .probs()
        .map(|x| if x > 0.0 { x.ln() } else { epsilon.ln() });
    let values = center_values(&logs, w, CenteringMode::Additive)?;
    Ok(AssociationMatrix::build(
        values,
        w.clone(),
        AssociationKind::Lra,
        Centering::Additive,
        p,
    ))
}

/// First-order expansion of the weighted log-ratio index:
/// `p_ij/(w_i w_j) − p_i+/w_i − p_+j/w_j + 1`.
pub fn first_order_approx(p: &CorrespondenceTable, w: &WeightPair) -> Result<AssociationMatrix> {
    if p.nrows() != w.row().len() || p.ncols() != w.col().len() {
        return Err(SicaError::DimensionMismatch(
            "weights do not match the table shape".into(),
        ));
    }
    let (rw, cw) = (w.row(), w.col());
    let (r, c) = (p.row_masses(), p.col_masses());
    let values = DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| {
        p.p(i, j) / (rw[i] * cw[j]) - r[i] / rw[i] - c[j] / cw[j] + 1.0
    });
    Ok(AssociationMatrix::build(
        values,
        w.clone(),
        AssociationKind::FirstOrder,
        Centering::Additive,
        p,
    ))
}

/// `Δ_ij(P^(α)) / α`, the CA index of the power-transformed table scaled by
/// `1/α`. Tends to the uniform-weight log-ratio index as `α → 0`. The
/// recorded weights are the masses of `P^(α)`; the matrix is double-centered
/// with respect to them, not to uniform weights.
pub fn power_index_ratio(t: &CountTable, alpha: f64) -> Result<AssociationMatrix> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SicaError::InvalidAlpha(alpha));
    }
    if let Some(pos) = t.values().iter().position(|&v| v == 0.0) {
        let (i, j) = (pos % t.nrows(), pos / t.nrows());
        return Err(SicaError::ZeroCell {
            row: i + 1,
            col: j + 1,
        });
    }
    let powered = t.values().map(|v| v.powf(alpha));
    let pa = CorrespondenceTable::from_matrix(
        &powered,
        t.row_labels().to_vec(),
        t.col_labels().to_vec(),
    )?;
    let values = density(&pa).map(|d| (d - 1.0) / alpha);
    Ok(AssociationMatrix::build(
        values,
        WeightPair::masses(&pa),
        AssociationKind::PowerRatio,
        Centering::None,
        &pa,
    ))
}

/// Log odds ratio `log(p_ij p_i1j1 / (p_ij1 p_i1j))` (zero-based indices).
pub fn log_odds_tetra(
    p: &CorrespondenceTable,
    i: usize,
    i1: usize,
    j: usize,
    j1: usize,
) -> Result<f64> {
    if i.max(i1) >= p.nrows() || j.max(j1) >= p.ncols() {
        return Err(SicaError::DimensionMismatch(
            "cell index out of range".into(),
        ));
    }
    for (a, b) in [(i, j), (i1, j1), (i, j1), (i1, j)] {
        if !(p.p(a, b) > 0.0) {
            return Err(SicaError::ZeroCell {
                row: a + 1,
                col: b + 1,
            });
        }
    }
    Ok((p.p(i, j) * p.p(i1, j1) / (p.p(i, j1) * p.p(i1, j))).ln())
}

/// Marginal-free index `I J q_ij − 1` of a table with uniform marginals.
pub fn mf_index(q: &CorrespondenceTable) -> Result<AssociationMatrix> {
    let deviation = q.uniform_marginal_deviation();
    if deviation > BISTOCHASTIC_TOL {
        return Err(SicaError::NotBistochastic { deviation });
    }
    let ij = (q.nrows() * q.ncols()) as f64;
    let values = q.probs().map(|x| ij * x - 1.0);
    Ok(AssociationMatrix::build(
        values,
        WeightPair::uniform(q.nrows(), q.ncols()),
        AssociationKind::Mf,
        Centering::Both,
        q,
    ))
}

/// Block-specific marginal-free index.
///
/// Inside block β the scaled cells `a_i p_ij b_j` are normalized to unit
/// block mass, giving uniform block marginals `r_β = 1/|rows_β|` and
/// `c_β = 1/|cols_β|`; the index is `q_ij / (r_β c_β) − 1`. Cells outside
/// every block get −1. Each block is then double-centered with uniform
/// weights over its own rows and columns.
pub fn block_mf_index(
    p: &CorrespondenceTable,
    partition: &BlockPartition,
    row_scalings: &[f64],
    col_scalings: &[f64],
) -> Result<AssociationMatrix> {
    let (nr, nc) = (p.nrows(), p.ncols());
    if row_scalings.len() != nr || col_scalings.len() != nc {
        return Err(SicaError::DimensionMismatch(
            "scaling vectors do not match the table shape".into(),
        ));
    }
    let mut row_seen = vec![false; nr];
    let mut col_seen = vec![false; nc];
    for b in &partition.blocks {
        for &i in &b.row_indices {
            if i >= nr || std::mem::replace(&mut row_seen[i], true) {
                return Err(SicaError::InvalidPartition(format!(
                    "row {} missing from the table or in two blocks",
                    i + 1
                )));
            }
        }
        for &j in &b.col_indices {
            if j >= nc || std::mem::replace(&mut col_seen[j], true) {
                return Err(SicaError::InvalidPartition(format!(
                    "column {} missing from the table or in two blocks",
                    j + 1
                )));
            }
        }
    }
    if let Some(i) = row_seen.iter().position(|s| !s) {
        return Err(SicaError::InvalidPartition(format!(
            "row {} belongs to no block",
            i + 1
        )));
    }
    if let Some(j) = col_seen.iter().position(|s| !s) {
        return Err(SicaError::InvalidPartition(format!(
            "column {} belongs to no block",
            j + 1
        )));
    }

    let mut values = DMatrix::from_element(nr, nc, -1.0);
    for b in &partition.blocks {
        let scaled = |i: usize, j: usize| row_scalings[i] * p.p(i, j) * col_scalings[j];
        let mass: f64 = b
            .row_indices
            .iter()
            .flat_map(|&i| b.col_indices.iter().map(move |&j| scaled(i, j)))
            .sum();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(SicaError::InvalidPartition(
                "block with no positive scaled mass".into(),
            ));
        }
        let rc = 1.0 / (b.row_indices.len() * b.col_indices.len()) as f64;
        for &i in &b.row_indices {
            for &j in &b.col_indices {
                values[(i, j)] = scaled(i, j) / mass / rc - 1.0;
            }
        }
    }
    Ok(AssociationMatrix::build(
        values,
        WeightPair::uniform(nr, nc),
        AssociationKind::BlockMf,
        Centering::None,
        p,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sinkhorn::{Block, PartitionKind};

    fn corr(rows: &[&[f64]]) -> CorrespondenceTable {
        CountTable::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
            .to_correspondence()
            .unwrap()
    }

    #[test]
    fn ca_index_of_independence_is_zero() {
        let r = [1.0, 2.0, 3.0];
        let c = [4.0, 1.0];
        let rows: Vec<Vec<f64>> = r
            .iter()
            .map(|a| c.iter().map(|b| a * b).collect())
            .collect();
        let p = CountTable::from_rows(&rows)
            .unwrap()
            .to_correspondence()
            .unwrap();
        assert!(ca_index(&p).values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn ca_index_closed_form_on_merged_example() {
        // p11 = 12/26, r1 = 20/26, c1 = 18/26: 12*26/(20*18) - 1.
        let tau = ca_index(&corr(&[&[12.0, 8.0], &[6.0, 0.0]]));
        assert!((tau.get(0, 0) - (312.0 / 360.0 - 1.0)).abs() < 1e-14);
        assert!((tau.get(0, 0) + 0.133_333_333_333_333).abs() < 1e-12);
        assert_eq!(tau.get(1, 1), -1.0);
        assert!(tau.centering_residual() < 1e-14);
    }

    #[test]
    fn lra_two_by_two_closed_form() {
        let p = corr(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let lam = lra_index(&p, &WeightPair::uniform(2, 2)).unwrap();
        let a = 0.25 * (4.0f64 / 6.0).ln();
        assert!((a + 0.101_366_277).abs() < 1e-8);
        let expect = [[a, -a], [-a, a]];
        for (i, row) in expect.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                assert!((lam.get(i, j) - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lra_of_constant_table_is_zero() {
        let p = corr(&[&[3.0, 3.0, 3.0], &[3.0, 3.0, 3.0]]);
        let lam = lra_index(&p, &WeightPair::uniform(2, 3)).unwrap();
        assert!(lam.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn lra_rejects_zero_cells_but_regularized_variant_accepts() {
        let p = corr(&[&[0.0, 2.0], &[1.0, 30.0]]);
        let w = WeightPair::uniform(2, 2);
        assert!(matches!(
            lra_index(&p, &w),
            Err(SicaError::ZeroCell { row: 1, col: 1 })
        ));
        let reg = lra_index_regularized(&p, &w, 1e-9).unwrap();
        assert!(reg.centering_residual() < 1e-12);
    }

    #[test]
    fn additive_equals_multiplicative_minus_one_on_equal_marginals() {
        // y = 1 + E with E uniformly double-centered: all marginals equal 1.
        let e = [[0.3, -0.1, -0.2], [-0.3, 0.1, 0.2]];
        let y = DMatrix::from_fn(2, 3, |i, j| 1.0 + e[i][j]);
        let w = WeightPair::uniform(2, 3);
        let add = double_center(&y, &w, CenteringMode::Additive).unwrap();
        let mul = double_center(&y, &w, CenteringMode::Multiplicative).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert!((add.get(i, j) - (y[(i, j)] - 1.0)).abs() < 1e-14);
                assert!((mul.get(i, j) - (y[(i, j)] - 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn density_centering_gives_ca_index() {
        let p = corr(&[&[5.0, 1.0, 2.0], &[1.0, 7.0, 3.0]]);
        let w = WeightPair::masses(&p);
        let y = density(&p);
        let add = double_center(&y, &w, CenteringMode::Additive).unwrap();
        let mul = double_center(&y, &w, CenteringMode::Multiplicative).unwrap();
        let ca = ca_index(&p);
        assert!((add.values() - ca.values()).amax() < 1e-13);
        assert!((mul.values() - ca.values()).amax() < 1e-13);
    }

    #[test]
    fn multiplicative_centering_needs_nonzero_grand_mean() {
        let y = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let err = double_center(
            &y,
            &WeightPair::uniform(2, 2),
            CenteringMode::Multiplicative,
        );
        assert!(matches!(err, Err(SicaError::ZeroGrandMean)));
    }

    #[test]
    fn additive_centering_ignores_row_and_column_shifts() {
        let y = DMatrix::from_row_slice(3, 2, &[0.5, 1.5, 2.0, -1.0, 0.25, 4.0]);
        let shifted =
            DMatrix::from_fn(3, 2, |i, j| y[(i, j)] + [1.0, -2.0, 7.5][i] + [0.5, 3.0][j]);
        let w = WeightPair::normalized(&[1.0, 2.0, 3.0], &[2.0, 1.0]).unwrap();
        let a = double_center(&y, &w, CenteringMode::Additive).unwrap();
        let b = double_center(&shifted, &w, CenteringMode::Additive).unwrap();
        assert!((a.values() - b.values()).amax() < 1e-13);
    }

    #[test]
    fn first_order_with_mass_weights_is_ca_index() {
        let p = corr(&[&[5.0, 1.0, 2.0], &[1.0, 7.0, 3.0], &[2.0, 2.0, 9.0]]);
        let fo = first_order_approx(&p, &WeightPair::masses(&p)).unwrap();
        assert!((fo.values() - ca_index(&p).values()).amax() < 1e-13);
    }

    #[test]
    fn mf_index_cases() {
        let q = corr(&[&[0.3, 0.2], &[0.2, 0.3]]);
        let tau = mf_index(&q).unwrap();
        assert!((tau.get(0, 0) - 0.2).abs() < 1e-14);
        assert!(tau.centering_residual() < 1e-14);

        let flat = corr(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        assert!(mf_index(&flat)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-15));

        let raw = corr(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(matches!(
            mf_index(&raw),
            Err(SicaError::NotBistochastic { .. })
        ));

        let fo = first_order_approx(&q, &WeightPair::uniform(2, 2)).unwrap();
        assert!((fo.values() - tau.values()).amax() < 1e-14);
    }

    #[test]
    fn tetra_difference_values() {
        let p = corr(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let t = log_odds_tetra(&p, 0, 1, 0, 1).unwrap();
        assert!((t - (4.0f64 / 6.0).ln()).abs() < 1e-14);
        assert!((t + 0.405_465_108).abs() < 1e-8);
        let indep = corr(&[&[2.0, 4.0], &[3.0, 6.0]]);
        assert!(log_odds_tetra(&indep, 0, 1, 0, 1).unwrap().abs() < 1e-14);
        let z = corr(&[&[0.0, 2.0], &[1.0, 30.0]]);
        assert!(log_odds_tetra(&z, 0, 1, 0, 1).is_err());
    }

    #[test]
    fn power_ratio_errors() {
        let t = CountTable::from_rows(&[vec![0.0, 2.0], vec![1.0, 30.0]]).unwrap();
        assert!(matches!(
            power_index_ratio(&t, 0.1),
            Err(SicaError::ZeroCell { row: 1, col: 1 })
        ));
        let t = CountTable::from_rows(&[vec![1.0, 2.0], vec![1.0, 30.0]]).unwrap();
        assert!(matches!(
            power_index_ratio(&t, 0.0),
            Err(SicaError::InvalidAlpha(_))
        ));
        let r = power_index_ratio(&t, 1.0).unwrap();
        let ca = ca_index(&t.to_correspondence().unwrap());
        assert!((r.values() - ca.values()).amax() < 1e-14);
        assert_eq!(r.centering(), Centering::None);
    }

    fn single_block(nr: usize, nc: usize) -> BlockPartition {
        BlockPartition {
            blocks: vec![Block {
                row_indices: (0..nr).collect(),
                col_indices: (0..nc).collect(),
                row_labels: vec![],
                col_labels: vec![],
                row_marginal: 1.0 / nr as f64,
                col_marginal: 1.0 / nc as f64,
                alternate_row_marginal: 1.0 / nr as f64,
                alternate_col_marginal: 1.0 / nc as f64,
            }],
            kind: PartitionKind::FullyIndecomposable,
            zero_tol: 0.0,
            unassigned_rows: vec![],
            unassigned_cols: vec![],
        }
    }

    #[test]
    fn single_block_reduces_to_mf_index() {
        let q = corr(&[&[0.3, 0.2], &[0.2, 0.3]]);
        let b = block_mf_index(&q, &single_block(2, 2), &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!((b.values() - mf_index(&q).unwrap().values()).amax() < 1e-14);
    }

    #[test]
    fn block_index_rejects_incomplete_partition() {
        let q = corr(&[&[0.3, 0.2], &[0.2, 0.3]]);
        let mut part = single_block(2, 2);
        part.blocks[0].col_indices = vec![0];
        assert!(matches!(
            block_mf_index(&q, &part, &[1.0, 1.0], &[1.0, 1.0]),
            Err(SicaError::InvalidPartition(_))
        ));
    }

    #[test]
    fn association_json_carries_metadata() {
        let p = corr(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let js = ca_index(&p).to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(v["kind"], "ca");
        assert_eq!(v["centering"], "both");
        assert_eq!(v["values"].as_array().unwrap().len(), 2);
    }
}
