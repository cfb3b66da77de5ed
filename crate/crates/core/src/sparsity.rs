//! Apparent and CA-relevant sparsity of a nonnegative table.
//!
//! Proportional rows (and columns) carry the same profile, so CA sees the
//! table with them merged. A fully indecomposable `I1 x J1` pattern needs
//! at least `I1 + J1 − gcd(I1, J1)` positive cells, which caps the share of
//! zeros a table scalable to uniform marginals can have.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::table::{merge_equivalent, CountTable, MergeResult, DEFAULT_MERGE_TOL};

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Smallest support of a fully indecomposable `i x j` pattern.
pub fn min_support(i: u64, j: u64) -> u64 {
    i + j - gcd(i, j)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityReport {
    pub nrows: usize,
    pub ncols: usize,
    pub zeros: u64,
    pub apparent: Ratio<u64>,
    pub merged_nrows: usize,
    pub merged_ncols: usize,
    pub merged_zeros: u64,
    pub ca_sparsity: Ratio<u64>,
    pub min_support: u64,
    /// Largest zero share compatible with uniform-marginal scaling.
    pub max_bistochastic_sparsity: Ratio<u64>,
    /// `ca_sparsity / (1 − S / (I1 J1))`, zero when the bound leaves no room.
    pub adjusted: Ratio<u64>,
    pub row_groups: Vec<Vec<usize>>,
    pub col_groups: Vec<Vec<usize>>,
}

fn ratio_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl SparsityReport {
    pub fn apparent_f64(&self) -> f64 {
        ratio_f64(&self.apparent)
    }

    pub fn ca_sparsity_f64(&self) -> f64 {
        ratio_f64(&self.ca_sparsity)
    }

    pub fn adjusted_f64(&self) -> f64 {
        ratio_f64(&self.adjusted)
    }

    pub fn to_json(&self) -> crate::error::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl std::fmt::Display for SparsityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "table {}x{}: {} zeros, apparent sparsity {} = {:.2}%",
            self.nrows,
            self.ncols,
            self.zeros,
            self.apparent,
            100.0 * self.apparent_f64()
        )?;
        writeln!(
            f,
            "merged {}x{}: {} zeros, CA sparsity {} = {:.2}%",
            self.merged_nrows,
            self.merged_ncols,
            self.merged_zeros,
            self.ca_sparsity,
            100.0 * self.ca_sparsity_f64()
        )?;
        write!(
            f,
            "minimum support {}, adjusted sparsity {} = {:.2}%",
            self.min_support,
            self.adjusted,
            100.0 * self.adjusted_f64()
        )
    }
}

#[derive(Serialize)]
struct Fraction {
    numer: u64,
    denom: u64,
    value: f64,
}

fn fraction(r: &Ratio<u64>) -> Fraction {
    Fraction {
        numer: *r.numer(),
        denom: *r.denom(),
        value: ratio_f64(r),
    }
}

impl Serialize for SparsityReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            nrows: usize,
            ncols: usize,
            zeros: u64,
            apparent: Fraction,
            merged_nrows: usize,
            merged_ncols: usize,
            merged_zeros: u64,
            ca_sparsity: Fraction,
            min_support: u64,
            max_bistochastic_sparsity: Fraction,
            adjusted: Fraction,
            row_groups: &'a [Vec<usize>],
            col_groups: &'a [Vec<usize>],
        }
        View {
            nrows: self.nrows,
            ncols: self.ncols,
            zeros: self.zeros,
            apparent: fraction(&self.apparent),
            merged_nrows: self.merged_nrows,
            merged_ncols: self.merged_ncols,
            merged_zeros: self.merged_zeros,
            ca_sparsity: fraction(&self.ca_sparsity),
            min_support: self.min_support,
            max_bistochastic_sparsity: fraction(&self.max_bistochastic_sparsity),
            adjusted: fraction(&self.adjusted),
            row_groups: &self.row_groups,
            col_groups: &self.col_groups,
        }
        .serialize(s)
    }
}

/// Sparsity report with the default merge tolerance.
pub fn sparsity(t: &CountTable) -> SparsityReport {
    sparsity_with_tol(t, DEFAULT_MERGE_TOL)
}

pub fn sparsity_with_tol(t: &CountTable, tol: f64) -> SparsityReport {
    let MergeResult {
        merged,
        row_groups,
        col_groups,
    } = merge_equivalent(t, tol);
    let cells = (t.nrows() * t.ncols()) as u64;
    let zeros = t.zero_count() as u64;
    let (i1, j1) = (merged.nrows() as u64, merged.ncols() as u64);
    let merged_cells = i1 * j1;
    let merged_zeros = merged.zero_count() as u64;
    let s = min_support(i1, j1);
    let room = merged_cells - s;
    let adjusted = if room == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(merged_zeros, room)
    };
    SparsityReport {
        nrows: t.nrows(),
        ncols: t.ncols(),
        zeros,
        apparent: Ratio::new(zeros, cells),
        merged_nrows: merged.nrows(),
        merged_ncols: merged.ncols(),
        merged_zeros,
        ca_sparsity: Ratio::new(merged_zeros, merged_cells),
        min_support: s,
        max_bistochastic_sparsity: Ratio::new(room, merged_cells),
        adjusted,
        row_groups,
        col_groups,
    }
}
