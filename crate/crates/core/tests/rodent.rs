use num_rational::Ratio;
use sica_core::association::block_mf_index;
use sica_core::ca::{ca_decompose, mfca, principal_map, MfcaOptions};
use sica_core::fixtures::rodent;
use sica_core::sinkhorn::{detect_blocks, scale, SinkhornOptions};
use sica_core::sparsity::sparsity;
use sica_core::svg::render_map;
use sica_core::table::{merge_equivalent, sign_transform, DEFAULT_MERGE_TOL};
use sica_core::taxicab::{tca_decompose, tca_oracle};

#[test]
fn sparsity_indices() {
    let r = sparsity(&rodent());
    assert_eq!(r.apparent, Ratio::new(167, 252));
    assert_eq!((r.merged_nrows, r.merged_ncols), (21, 9));
    assert_eq!(r.min_support, 27);
    assert_eq!(r.ca_sparsity, Ratio::new(111, 189));
    assert_eq!(r.adjusted, Ratio::new(111, 162));
    // The rounded 58.7% over 1 - 27/189 gives the 68.48% figure.
    assert!((0.587f64 / (1.0 - 27.0 / 189.0) - 0.6848).abs() < 1e-4);
    assert!((r.adjusted_f64() - 0.6848).abs() < 5e-4);
    assert!(r.to_string().contains("68.52%"));
}

#[test]
fn merge_groups_are_proportional() {
    let m = merge_equivalent(&rodent(), DEFAULT_MERGE_TOL);
    assert_eq!(m.merged.nrows(), 21);
    let merged_rows: usize = m
        .row_groups
        .iter()
        .filter(|g| g.len() > 1)
        .map(|g| g.len())
        .sum();
    assert!(merged_rows >= 2);
}

#[test]
fn block_marginals_both_iterations() {
    let s = scale(&rodent(), &SinkhornOptions::default()).unwrap();
    let part = detect_blocks(&s, None).unwrap();
    // (column group, c at 500, c at 499, row count, r at 500, r at 499)
    let expect = [
        (vec!["rod1"], 36.23, 4.76, 6, 6.04, 0.79),
        (vec!["rod2"], 29.96, 6.71, 7, 4.28, 0.96),
        (
            vec!["rod3", "rod4", "rod5", "rod6", "rod8"],
            5.25,
            13.13,
            12,
            2.19,
            5.47,
        ),
        (vec!["rod7", "rod9"], 3.76, 11.45, 3, 2.51, 7.63),
    ];
    for (cols, c, c_alt, nrows, r, r_alt) in expect {
        let b = part
            .blocks
            .iter()
            .find(|b| {
                let mut l = b.col_labels.clone();
                l.sort();
                l == cols
            })
            .unwrap();
        assert_eq!(b.row_indices.len(), nrows);
        assert!((100.0 * b.col_marginal - c).abs() <= 0.01);
        assert!((100.0 * b.alternate_col_marginal - c_alt).abs() <= 0.01);
        assert!((100.0 * b.row_marginal - r).abs() <= 0.01);
        assert!((100.0 * b.alternate_row_marginal - r_alt).abs() <= 0.01);
        // Block mass balance: rows x r = columns x c.
        let lhs = b.row_indices.len() as f64 * b.row_marginal;
        let rhs = b.col_indices.len() as f64 * b.col_marginal;
        assert!((lhs - rhs).abs() < 1e-6);
    }
}

#[test]
fn scaled_table_is_block_bistochastic() {
    let s = scale(&rodent(), &SinkhornOptions::default()).unwrap();
    let part = detect_blocks(&s, None).unwrap();
    let d = s.d();
    for b in &part.blocks {
        let sums: Vec<f64> = b
            .row_indices
            .iter()
            .map(|&i| b.col_indices.iter().map(|&j| d[(i, j)]).sum())
            .collect();
        let spread = sums.iter().cloned().fold(f64::MIN, f64::max)
            - sums.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-6, "row sums spread {spread}");
    }
    let off: f64 = (0..28)
        .flat_map(|i| (0..9).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            part.block_of_row(i) != part.blocks.iter().position(|b| b.col_indices.contains(&j))
        })
        .map(|(i, j)| d[(i, j)])
        .fold(0.0, f64::max);
    assert!(off < 1e-12);

    let sc = s.implied_scalings(&part);
    assert!(sc.log_residual < 1e-8);
    let p = rodent().to_correspondence().unwrap();
    let tau = block_mf_index(&p, &part, &sc.row, &sc.col).unwrap();
    for b in &part.blocks {
        for &j in &b.col_indices {
            let col: f64 = b.row_indices.iter().map(|&i| tau.get(i, j)).sum();
            assert!(col.abs() < 1e-6);
        }
    }
}

#[test]
fn mfca_skips_unit_axes() {
    let res = mfca(&rodent(), &MfcaOptions::default()).unwrap();
    assert_eq!(res.partition.len(), 4);
    assert_eq!(res.unit_count(), 3);
    assert_eq!(res.default_map_dims(), (4, 5));
    assert_eq!(res.block_decompositions.len(), 4);
    let map = principal_map(&res.decomposition, res.default_map_dims()).unwrap();
    assert_eq!(map.points.len(), 37);
}

#[test]
fn ca_map_has_all_points() {
    let dec = ca_decompose(&rodent().to_correspondence().unwrap());
    let map = principal_map(&dec, (1, 2)).unwrap();
    let svg = render_map(&map, "rodent").unwrap();
    assert_eq!(
        svg.matches("class=\"row-label\"").count() + svg.matches("class=\"col-label\"").count(),
        37
    );
}

#[test]
fn taxicab_on_sign_table_matches_oracle() {
    let p = sign_transform(&rodent()).to_correspondence().unwrap();
    let dec = tca_decompose(&p, 3).unwrap();
    let o = tca_oracle(&p).unwrap();
    assert_eq!(dec.sigmas[0], o.lambda);
    let u: Vec<f64> = (0..28).map(|i| dec.row_scores[(i, 0)]).collect();
    assert_eq!(u, o.u);
    assert!(dec.sigmas.windows(2).all(|w| w[0] >= w[1] - 1e-15));
}
