//! Taxicab correspondence analysis.
//!
//! Each axis maximizes `λ = max_{u ∈ {±1}^I} ‖A'u‖₁` for the residual
//! `A = P − r c'`. The search alternates `v ← sign(A'u)`, `u ← sign(A v)`
//! from `I + J` starts (the sign of every column and of every row of `A`),
//! which is exact on small tables in practice; [`tca_oracle`] enumerates
//! all sign vectors of the smaller side for checking.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ca::{shares_of, Decomposition, Method};
use crate::error::{Result, SicaError};
use crate::table::{CorrespondenceTable, WeightPair};

/// Largest side accepted by [`tca_oracle`], as a power of two.
pub const ORACLE_SIDE_LIMIT: usize = 20;

/// Residual dispersion below this fraction of the first axis stops extraction.
const VANISH_TOL: f64 = 1e-13;

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub(crate) fn residual(p: &CorrespondenceTable) -> DMatrix<f64> {
    let (r, c) = (p.row_masses(), p.col_masses());
    DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| p.p(i, j) - r[i] * c[j])
}

/// `A'u`, summed in row order.
fn at_u(a: &DMatrix<f64>, u: &[f64]) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| u[i] * a[(i, j)]).sum())
        .collect()
}

fn a_v(a: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

/// `‖A'u‖₁` computed the same way everywhere.
fn dispersion(a: &DMatrix<f64>, u: &[f64]) -> f64 {
    at_u(a, u).iter().map(|x| x.abs()).sum()
}

fn normalize(mut u: Vec<f64>) -> Vec<f64> {
    if u.first().is_some_and(|&x| x < 0.0) {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    u
}

/// `a < b` in lexicographic order with `−1 < +1`.
fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    false
}

fn ascend(a: &DMatrix<f64>, start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut u = start;
    let mut best = dispersion(a, &u);
    loop {
        let v: Vec<f64> = at_u(a, &u).into_iter().map(sign).collect();
        let next: Vec<f64> = a_v(a, &v).into_iter().map(sign).collect();
        let value = dispersion(a, &next);
        if value > best {
            u = next;
            best = value;
        } else {
            return (u, best);
        }
    }
}

fn better(cand: &[f64], value: f64, best: &Option<(Vec<f64>, f64)>) -> bool {
    match best {
        None => true,
        Some((u, b)) => value > *b || (value == *b && lex_less(cand, u)),
    }
}

fn best_axis(a: &DMatrix<f64>) -> (Vec<f64>, f64) {
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(a.nrows() + a.ncols());
    for j in 0..a.ncols() {
        starts.push(a.column(j).iter().map(|&x| sign(x)).collect());
    }
    for i in 0..a.nrows() {
        let v: Vec<f64> = a.row(i).iter().map(|&x| sign(x)).collect();
        starts.push(a_v(a, &v).into_iter().map(sign).collect());
    }
    for s in starts {
        let (u, _) = ascend(a, s);
        let u = normalize(u);
        let value = dispersion(a, &u);
        if better(&u, value, &best) {
            best = Some((u, value));
        }
    }
    best.expect("at least one start")
}

/// One taxicab axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxicabAxis {
    /// Row signs, normalized so `u[0] = +1`.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: f64,
    /// `(A v) / r`.
    pub f: Vec<f64>,
    /// `(A'u) / c`.
    pub g: Vec<f64>,
}

fn axis_from(a: &DMatrix<f64>, u: Vec<f64>, lambda: f64, p: &CorrespondenceTable) -> TaxicabAxis {
    let atu = at_u(a, &u);
    let v: Vec<f64> = atu.iter().map(|&x| sign(x)).collect();
    let av = a_v(a, &v);
    TaxicabAxis {
        f: av.iter().zip(p.row_masses()).map(|(x, r)| x / r).collect(),
        g: atu.iter().zip(p.col_masses()).map(|(x, c)| x / c).collect(),
        u,
        v,
        lambda,
    }
}

/// Extracts up to `k` taxicab axes, deflating `A ← A − (A v)(u'A)/λ` after
/// each one. Stops early once the residual dispersion vanishes.
pub fn tca_decompose(p: &CorrespondenceTable, k: usize) -> Result<Decomposition> {
    let (nr, nc) = (p.nrows(), p.ncols());
    let max_k = nr.min(nc).saturating_sub(1);
    if k == 0 || k > max_k {
        return Err(SicaError::InvalidArgument(format!(
            "number of taxicab axes must be in 1..={max_k}, got {k}"
        )));
    }
    let mut a = residual(p);
    let mut axes: Vec<TaxicabAxis> = Vec::with_capacity(k);
    let mut notes = Vec::new();
    for m in 0..k {
        let (u, lambda) = best_axis(&a);
        let floor = axes.first().map_or(0.0, |x| x.lambda) * VANISH_TOL;
        if !(lambda > floor) {
            notes.push(format!("residual vanished after {m} axes"));
            break;
        }
        let axis = axis_from(&a, u, lambda, p);
        let av = a_v(&a, &axis.v);
        let ua = at_u(&a, &axis.u);
        a = DMatrix::from_fn(nr, nc, |i, j| a[(i, j)] - av[i] * ua[j] / lambda);
        axes.push(axis);
    }
    let m = axes.len();
    let lambdas: Vec<f64> = axes.iter().map(|x| x.lambda).collect();
    Ok(Decomposition {
        method: Method::Tca,
        row_scores: DMatrix::from_fn(nr, m, |i, k| axes[k].u[i]),
        col_scores: DMatrix::from_fn(nc, m, |j, k| axes[k].v[j]),
        row_principal: DMatrix::from_fn(nr, m, |i, k| axes[k].f[i]),
        col_principal: DMatrix::from_fn(nc, m, |j, k| axes[k].g[j]),
        weights: WeightPair::masses(p),
        shares: shares_of(&lambdas),
        inertia: lambdas.clone(),
        sigmas: lambdas,
        row_labels: p.row_labels().to_vec(),
        col_labels: p.col_labels().to_vec(),
        notes,
    })
}

fn enumerate_signs(n: usize, mut visit: impl FnMut(&[f64])) {
    // First entry fixed at +1; the rest run through {−1, +1}^(n−1) in
    // lexicographic order.
    let rest = n - 1;
    let mut s = vec![1.0; n];
    for mask in 0u64..(1u64 << rest) {
        for k in 0..rest {
            let bit = (mask >> (rest - 1 - k)) & 1;
            s[k + 1] = if bit == 1 { 1.0 } else { -1.0 };
        }
        visit(&s);
    }
}

/// First taxicab axis by exhaustive search over the smaller side. Among
/// maximizers the lexicographically smallest `u` (with `u[0] = +1`) wins.
pub fn tca_oracle(p: &CorrespondenceTable) -> Result<TaxicabAxis> {
    let (nr, nc) = (p.nrows(), p.ncols());
    let side = nr.min(nc);
    if side > ORACLE_SIDE_LIMIT {
        return Err(SicaError::SideTooLarge {
            side,
            limit: ORACLE_SIDE_LIMIT,
        });
    }
    let a = residual(p);
    let mut best: Option<(Vec<f64>, f64)> = None;
    if nr <= nc {
        enumerate_signs(nr, |u| {
            let value = dispersion(&a, u);
            if better(u, value, &best) {
                best = Some((u.to_vec(), value));
            }
        });
    } else {
        let mut top = f64::NEG_INFINITY;
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        enumerate_signs(nc, |v| {
            let value: f64 = a_v(&a, v).iter().map(|x| x.abs()).sum();
            if value > top {
                top = value;
                candidates.clear();
            }
            if value == top {
                candidates.push(normalize(a_v(&a, v).into_iter().map(sign).collect()));
            }
        });
        for u in candidates {
            let value = dispersion(&a, &u);
            if better(&u, value, &best) {
                best = Some((u, value));
            }
        }
    }
    let (u, lambda) = best.expect("nonempty search");
    Ok(axis_from(&a, u, lambda, p))
}
