//! Spectral decompositions of association matrices: plain CA, CA of the
//! scaled (marginal-free) table, and the uniform-weight log-ratio limit.
//!
//! Every decomposition reports singular values in decreasing order,
//! standard scores (`row_scores`, `col_scores`), principal coordinates
//! (scores times the singular value) and the weights they are normalized
//! under. The sign of each dimension is fixed so that its largest-magnitude
//! row score is positive.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::association::lra_index;
use crate::error::{Result, SicaError};
use crate::sinkhorn::{
    detect_blocks, scale, BlockPartition, ScalingResult, SinkhornOptions, UNIT_SV_TOL,
};
use crate::table::{matrix_rows, Axis, CorrespondenceTable, CountTable, WeightPair};

/// Singular values below this are treated as zero and dropped.
pub const SV_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ca,
    Mfca,
    Lra,
    Tca,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Ca => "ca",
            Method::Mfca => "mfca",
            Method::Lra => "lra",
            Method::Tca => "tca",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub method: Method,
    pub sigmas: Vec<f64>,
    /// I x M standard row scores.
    pub row_scores: DMatrix<f64>,
    /// J x M standard column scores.
    pub col_scores: DMatrix<f64>,
    pub row_principal: DMatrix<f64>,
    pub col_principal: DMatrix<f64>,
    pub weights: WeightPair,
    /// Per-dimension inertia. For taxicab decompositions this is the
    /// dispersion `λ_m` itself.
    pub inertia: Vec<f64>,
    pub shares: Vec<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct DecompositionJson<'a> {
    method: Method,
    sigmas: &'a [f64],
    inertia: &'a [f64],
    shares: &'a [f64],
    row_labels: &'a [String],
    col_labels: &'a [String],
    row_scores: Vec<Vec<f64>>,
    col_scores: Vec<Vec<f64>>,
    row_principal: Vec<Vec<f64>>,
    col_principal: Vec<Vec<f64>>,
    weights: &'a WeightPair,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    notes: &'a [String],
}

impl Decomposition {
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn rank(&self) -> usize {
        self.sigmas.len()
    }

    /// Reconstructs `Σ_m μ_im ν_jm σ_m`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let (nr, nc) = (self.row_scores.nrows(), self.col_scores.nrows());
        DMatrix::from_fn(nr, nc, |i, j| {
            (0..self.rank())
                .map(|m| self.row_scores[(i, m)] * self.col_scores[(j, m)] * self.sigmas[m])
                .sum()
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DecompositionJson {
            method: self.method,
            sigmas: &self.sigmas,
            inertia: &self.inertia,
            shares: &self.shares,
            row_labels: &self.row_labels,
            col_labels: &self.col_labels,
            row_scores: matrix_rows(&self.row_scores),
            col_scores: matrix_rows(&self.col_scores),
            row_principal: matrix_rows(&self.row_principal),
            col_principal: matrix_rows(&self.col_principal),
            weights: &self.weights,
            notes: &self.notes,
        })?)
    }
}

pub(crate) fn shares_of(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    values
        .iter()
        .map(|v| if total > 0.0 { v / total } else { 0.0 })
        .collect()
}

/// Sorted thin SVD `(s, U, V)` with singular values at or below
/// [`SV_FLOOR`] dropped.
pub(crate) fn thin_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (nr, nc) = (m.nrows(), m.ncols());
    if nr == 0 || nc == 0 {
        return (Vec::new(), DMatrix::zeros(nr, 0), DMatrix::zeros(nc, 0));
    }
    let a = faer::Mat::<f64>::from_fn(nr, nc, |i, j| m[(i, j)]);
    let Ok(svd) = a.thin_svd() else {
        log::warn!("SVD did not converge; no dimensions returned");
        return (Vec::new(), DMatrix::zeros(nr, 0), DMatrix::zeros(nc, 0));
    };
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let sv: Vec<f64> = (0..s.dim()).map(|k| s[k]).collect();
    let mut order: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] > SV_FLOOR).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let uu = DMatrix::from_fn(nr, order.len(), |i, k| u[(i, order[k])]);
    let vv = DMatrix::from_fn(nc, order.len(), |j, k| v[(j, order[k])]);
    (order.iter().map(|&k| sv[k]).collect(), uu, vv)
}

/// Flips dimensions so the largest-magnitude entry of each row-score column
/// is positive (first such entry on ties).
pub(crate) fn fix_signs(rows: &mut DMatrix<f64>, cols: &mut DMatrix<f64>) {
    for m in 0..rows.ncols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..rows.nrows() {
            let v = rows[(i, m)];
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            rows.column_mut(m).neg_mut();
            cols.column_mut(m).neg_mut();
        }
    }
}

fn principal(scores: &DMatrix<f64>, sigmas: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(scores.nrows(), scores.ncols(), |i, m| {
        scores[(i, m)] * sigmas[m]
    })
}

fn assemble(
    method: Method,
    sigmas: Vec<f64>,
    mut row_scores: DMatrix<f64>,
    mut col_scores: DMatrix<f64>,
    weights: WeightPair,
    p: &CorrespondenceTable,
) -> Decomposition {
    fix_signs(&mut row_scores, &mut col_scores);
    let inertia: Vec<f64> = sigmas.iter().map(|s| s * s).collect();
    Decomposition {
        method,
        row_principal: principal(&row_scores, &sigmas),
        col_principal: principal(&col_scores, &sigmas),
        shares: shares_of(&inertia),
        inertia,
        sigmas,
        row_scores,
        col_scores,
        weights,
        row_labels: p.row_labels().to_vec(),
        col_labels: p.col_labels().to_vec(),
        notes: Vec::new(),
    }
}

/// Correspondence analysis: SVD of `(p_ij − r_i c_j) / √(r_i c_j)`.
pub fn ca_decompose(p: &CorrespondenceTable) -> Decomposition {
    let (r, c) = (p.row_masses(), p.col_masses());
    let s = DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| {
        let e = r[i] * c[j];
        (p.p(i, j) - e) / e.sqrt()
    });
    let (sigmas, u, v) = thin_svd(&s);
    let mu = DMatrix::from_fn(u.nrows(), u.ncols(), |i, m| u[(i, m)] / r[i].sqrt());
    let nu = DMatrix::from_fn(v.nrows(), v.ncols(), |j, m| v[(j, m)] / c[j].sqrt());
    assemble(Method::Ca, sigmas, mu, nu, WeightPair::masses(p), p)
}

/// Log-ratio limit: SVD of `Λ / √(IJ)` for the uniform-weight log-ratio
/// index Λ, with scores rescaled to unit uniform-weighted variance.
pub fn lra_decompose(p: &CorrespondenceTable) -> Result<Decomposition> {
    let (nr, nc) = (p.nrows(), p.ncols());
    let w = WeightPair::uniform(nr, nc);
    let lambda = lra_index(p, &w)?;
    let scale = ((nr * nc) as f64).sqrt();
    let (sigmas, u, v) = thin_svd(&(lambda.values() / scale));
    let mu = u * (nr as f64).sqrt();
    let nu = v * (nc as f64).sqrt();
    Ok(assemble(Method::Lra, sigmas, mu, nu, w, p))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MfcaOptions {
    pub sinkhorn: SinkhornOptions,
    /// Block-detection threshold on `d`; default is relative to its mean.
    pub zero_tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MfcaResult {
    pub scaling: ScalingResult,
    pub partition: BlockPartition,
    /// CA of the whole scaled table.
    pub decomposition: Decomposition,
    /// CA of each block of the scaled table, in partition order. Blocks with
    /// a single row or column have no dimensions.
    pub block_decompositions: Vec<Decomposition>,
}

impl MfcaResult {
    /// Number of leading singular values within [`UNIT_SV_TOL`] of 1.
    pub fn unit_count(&self) -> usize {
        self.decomposition
            .sigmas
            .iter()
            .take_while(|s| (*s - 1.0).abs() <= UNIT_SV_TOL)
            .count()
    }

    /// First two dimensions after the unit ones (1-based).
    pub fn default_map_dims(&self) -> (usize, usize) {
        let m = self.unit_count();
        (m + 1, m + 2)
    }
}

/// Scales `t` to uniform marginals, finds its blocks and runs CA on the
/// scaled table and on each block.
pub fn mfca(t: &CountTable, opts: &MfcaOptions) -> Result<MfcaResult> {
    let scaling = scale(t, &opts.sinkhorn)?;
    let partition = detect_blocks(&scaling, opts.zero_tol)?;
    let q = scaling.to_correspondence()?;
    let mut decomposition = ca_decompose(&q);
    decomposition.method = Method::Mfca;
    decomposition.notes.push(format!(
        "scaling {} after {} iterations; {} block(s)",
        scaling.status(),
        scaling.iterations(),
        partition.len()
    ));
    let mut block_decompositions = Vec::with_capacity(partition.len());
    for b in &partition.blocks {
        let sub = DMatrix::from_fn(b.row_indices.len(), b.col_indices.len(), |a, c| {
            scaling.d()[(b.row_indices[a], b.col_indices[c])]
        });
        let bq =
            CorrespondenceTable::from_matrix(&sub, b.row_labels.clone(), b.col_labels.clone())?;
        let mut dec = ca_decompose(&bq);
        dec.method = Method::Mfca;
        block_decompositions.push(dec);
    }
    Ok(MfcaResult {
        scaling,
        partition,
        decomposition,
        block_decompositions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub label: String,
    pub axis: Axis,
    pub x: f64,
    pub y: f64,
}

/// Principal coordinates of rows and columns on two chosen dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateMap {
    pub method: Method,
    /// 1-based dimensions.
    pub dims: (usize, usize),
    pub axis_titles: (String, String),
    pub points: Vec<MapPoint>,
}

impl CoordinateMap {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "type", "x", "y"])?;
        for p in &self.points {
            let kind = match p.axis {
                Axis::Row => "row",
                Axis::Column => "column",
            };
            w.write_record([p.label.as_str(), kind, &p.x.to_string(), &p.y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Map on dimensions `dims` (1-based).
pub fn principal_map(d: &Decomposition, dims: (usize, usize)) -> Result<CoordinateMap> {
    for k in [dims.0, dims.1] {
        if k == 0 || k > d.rank() {
            return Err(SicaError::DimensionOutOfRange {
                requested: k,
                available: d.rank(),
            });
        }
    }
    let (a, b) = (dims.0 - 1, dims.1 - 1);
    let title = |m: usize| format!("Dim {} ({:.2}%)", m + 1, 100.0 * d.shares[m]);
    let mut points = Vec::with_capacity(d.row_labels.len() + d.col_labels.len());
    for (i, label) in d.row_labels.iter().enumerate() {
        points.push(MapPoint {
            label: label.clone(),
            axis: Axis::Row,
            x: d.row_principal[(i, a)],
            y: d.row_principal[(i, b)],
        });
    }
    for (j, label) in d.col_labels.iter().enumerate() {
        points.push(MapPoint {
            label: label.clone(),
            axis: Axis::Column,
            x: d.col_principal[(j, a)],
            y: d.col_principal[(j, b)],
        });
    }
    Ok(CoordinateMap {
        method: d.method,
        dims,
        axis_titles: (title(a), title(b)),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(rows: &[&[f64]]) -> CorrespondenceTable {
        CountTable::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
            .to_correspondence()
            .unwrap()
    }

    #[test]
    fn ca_of_two_by_two_matches_phi() {
        // For a 2x2 table the single singular value is |phi|.
        let (a, b, c, d) = (10.0, 20.0, 30.0, 5.0);
        let p = corr(&[&[a, b], &[c, d]]);
        let phi = (a * d - b * c) / ((a + b) * (c + d) * (a + c) * (b + d)).sqrt();
        let dec = ca_decompose(&p);
        assert_eq!(dec.rank(), 1);
        assert!((dec.sigmas[0] - phi.abs()).abs() < 1e-12);
    }

    #[test]
    fn standard_scores_are_weighted_orthonormal() {
        let p = corr(&[
            &[5.0, 1.0, 2.0, 0.0],
            &[1.0, 7.0, 3.0, 2.0],
            &[2.0, 2.0, 9.0, 4.0],
        ]);
        let dec = ca_decompose(&p);
        let r = p.row_masses();
        for m in 0..dec.rank() {
            for k in 0..dec.rank() {
                let g: f64 = (0..p.nrows())
                    .map(|i| r[i] * dec.row_scores[(i, m)] * dec.row_scores[(i, k)])
                    .sum();
                let e = if m == k { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-10);
            }
            let mean: f64 = (0..p.nrows()).map(|i| r[i] * dec.row_scores[(i, m)]).sum();
            assert!(mean.abs() < 1e-12);
        }
        // Reconstitution of the CA index.
        let tau = crate::association::ca_index(&p);
        assert!((dec.reconstruct() - tau.values()).amax() < 1e-10);
    }

    #[test]
    fn largest_row_score_is_positive() {
        let p = corr(&[&[1.0, 9.0], &[8.0, 2.0], &[3.0, 3.0]]);
        let dec = ca_decompose(&p);
        let col = dec.row_scores.column(0);
        let big = col
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap();
        assert!(big > 0.0);
    }

    #[test]
    fn single_row_has_no_dimensions() {
        let p = corr(&[&[1.0, 2.0, 3.0]]);
        assert_eq!(ca_decompose(&p).rank(), 0);
    }

    #[test]
    fn lra_two_by_two() {
        let p = corr(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let dec = lra_decompose(&p).unwrap();
        assert_eq!(dec.rank(), 1);
        assert!((dec.sigmas[0] - 0.101_366_277).abs() < 1e-8);
        for i in 0..2 {
            assert!((dec.row_scores[(i, 0)].abs() - 1.0).abs() < 1e-12);
            assert!((dec.col_scores[(i, 0)].abs() - 1.0).abs() < 1e-12);
        }
        let tetra = crate::association::log_odds_tetra(&p, 0, 1, 0, 1).unwrap();
        let (mu, nu) = (&dec.row_scores, &dec.col_scores);
        let fit = (mu[(0, 0)] - mu[(1, 0)]) * (nu[(0, 0)] - nu[(1, 0)]) * dec.sigmas[0];
        assert!((fit - tetra).abs() < 1e-12);
    }

    #[test]
    fn lra_rejects_zeros() {
        let p = corr(&[&[0.0, 2.0], &[1.0, 30.0]]);
        assert!(matches!(lra_decompose(&p), Err(SicaError::ZeroCell { .. })));
    }

    #[test]
    fn map_dimension_checks() {
        let p = corr(&[&[5.0, 1.0, 2.0], &[1.0, 7.0, 3.0], &[2.0, 2.0, 9.0]]);
        let dec = ca_decompose(&p);
        let map = principal_map(&dec, (1, 2)).unwrap();
        assert_eq!(map.points.len(), 6);
        assert!(map.axis_titles.0.starts_with("Dim 1 ("));
        assert!(matches!(
            principal_map(&dec, (0, 1)),
            Err(SicaError::DimensionOutOfRange { requested: 0, .. })
        ));
        assert!(principal_map(&dec, (1, 3)).is_err());
    }

    #[test]
    fn mfca_on_positive_table_has_no_unit_values() {
        let t = CountTable::from_rows(&[
            vec![5.0, 1.0, 2.0],
            vec![1.0, 7.0, 3.0],
            vec![2.0, 2.0, 9.0],
        ])
        .unwrap();
        let res = mfca(&t, &MfcaOptions::default()).unwrap();
        assert_eq!(res.partition.len(), 1);
        assert_eq!(res.unit_count(), 0);
        assert_eq!(res.default_map_dims(), (1, 2));
        assert_eq!(res.block_decompositions.len(), 1);
    }
}
