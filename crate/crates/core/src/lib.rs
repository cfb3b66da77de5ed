//! Scale-invariant correspondence analysis of nonnegative tables.
//!
//! The pipeline: ingest a [`CountTable`], optionally transform it (power,
//! sign, row closure), build an association matrix, scale it to uniform
//! marginals, decompose it and map the result.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod ca;
pub mod error;
pub mod fixtures;
pub mod sinkhorn;
pub mod sparsity;
pub mod svg;
pub mod table;
pub mod taxicab;
pub mod verify;

pub use association::{
    block_mf_index, ca_index, double_center, first_order_approx, log_odds_tetra, lra_index,
    lra_index_regularized, mf_index, power_index_ratio, AssociationKind, AssociationMatrix,
    Centering, CenteringMode,
};
pub use ca::{
    ca_decompose, lra_decompose, mfca, principal_map, CoordinateMap, Decomposition, Method,
    MfcaOptions, MfcaResult,
};
pub use error::{Result, SicaError};
pub use sinkhorn::{
    detect_blocks, scale, unit_singular_count, BlockPartition, ScalingResult, ScalingStatus,
    SinkhornOptions,
};
pub use sparsity::{min_support, sparsity, SparsityReport};
pub use table::{
    ingest_csv, merge_equivalent, power_transform, row_closure, sign_transform, to_correspondence,
    CorrespondenceTable, CountTable, CsvOptions, WeightPair,
};
pub use taxicab::{tca_decompose, tca_oracle, TaxicabAxis};
