//! Reference checks against the bundled fixtures plus seeded randomized
//! properties. Used by `sica verify` and by the acceptance test target.

use std::fmt;

use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::association::{
    ca_index, double_center, log_odds_tetra, lra_index, power_index_ratio, CenteringMode,
};
use crate::ca::{ca_decompose, lra_decompose, mfca, MfcaOptions};
use crate::error::{Result, SicaError};
use crate::fixtures::{FixtureSource, EXAMPLE1, EXAMPLE2, EXAMPLE3, RODENT};
use crate::sinkhorn::{detect_blocks, scale, ScalingStatus, SinkhornOptions};
use crate::sparsity::sparsity;
use crate::table::{row_closure, sign_transform, CorrespondenceTable, CountTable, WeightPair};
use crate::taxicab::{tca_decompose, tca_oracle};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// `(id, group, title)` of every check.
pub const CHECKS: [(usize, &str, &str); 11] = [
    (1, "sparsity", "Example 1 sparsity indices"),
    (2, "sinkhorn", "Example 3 scaling"),
    (3, "sinkhorn", "rodent scaling trace"),
    (4, "spectra", "rodent CA singular values"),
    (5, "spectra", "rodent scaled-table spectrum"),
    (6, "blocks", "rodent block partition"),
    (7, "limit", "power index ratio limit"),
    (8, "invariance", "scale invariance"),
    (9, "centering", "centering identities"),
    (10, "blocks", "unit singular values of block tables"),
    (11, "taxicab", "taxicab oracle and log-ratio identities"),
];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Group name or check id to run; all checks when `None`.
    pub only: Option<String>,
    pub seed: u64,
    /// Overrides the number of random tables used by the property checks.
    pub property_iters: Option<usize>,
    pub fixtures: FixtureSource,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            only: None,
            seed: DEFAULT_SEED,
            property_iters: None,
            fixtures: FixtureSource::Embedded,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: usize,
    pub group: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} [{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.group,
            self.title,
            self.detail
        )
    }
}

/// Checks selected by `only`, or an error naming the unknown filter.
pub fn selected(only: Option<&str>) -> Result<Vec<usize>> {
    match only {
        None => Ok(CHECKS.iter().map(|c| c.0).collect()),
        Some(f) => {
            let ids: Vec<usize> = CHECKS
                .iter()
                .filter(|(id, group, _)| *group == f || id.to_string() == f)
                .map(|c| c.0)
                .collect();
            if ids.is_empty() {
                Err(SicaError::InvalidArgument(format!(
                    "unknown check or group {f:?}"
                )))
            } else {
                Ok(ids)
            }
        }
    }
}

pub fn run(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    Ok(selected(opts.only.as_deref())?
        .into_iter()
        .map(|id| run_check(id, opts))
        .collect())
}

/// Runs one check; errors become a failed outcome.
pub fn run_check(id: usize, opts: &VerifyOptions) -> CheckOutcome {
    let (_, group, title) =
        CHECKS
            .iter()
            .copied()
            .find(|c| c.0 == id)
            .unwrap_or((id, "unknown", "unknown check"));
    let result = match id {
        1 => check_sparsity(opts),
        2 => check_example3(opts),
        3 => check_rodent_trace(opts),
        4 => check_rodent_spectra(opts),
        5 => check_scaled_spectrum(opts),
        6 => check_blocks(opts),
        7 => check_power_limit(opts),
        8 => check_invariance(opts),
        9 => check_centering(opts),
        10 => check_block_unit_values(opts),
        11 => check_taxicab(opts),
        _ => Err(SicaError::InvalidArgument(format!("no check {id}"))),
    };
    let (passed, detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        id,
        group,
        title,
        passed,
        detail,
    }
}

type Check = Result<(bool, String)>;

fn rng(opts: &VerifyOptions, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(1_000_003).wrapping_add(id))
}

fn iters(opts: &VerifyOptions, default: usize) -> usize {
    opts.property_iters.unwrap_or(default).max(1)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Positive table with entries uniform on `[lo, hi)`.
pub fn random_positive(rng: &mut impl Rng, nr: usize, nc: usize, lo: f64, hi: f64) -> CountTable {
    let rows: Vec<Vec<f64>> = (0..nr)
        .map(|_| (0..nc).map(|_| rng.random_range(lo..hi)).collect())
        .collect();
    CountTable::from_rows(&rows).expect("positive table")
}

/// Integer counts in `0..10` with no empty line.
pub fn random_counts(rng: &mut impl Rng, nr: usize, nc: usize) -> CountTable {
    loop {
        let rows: Vec<Vec<f64>> = (0..nr)
            .map(|_| (0..nc).map(|_| rng.random_range(0..10u32) as f64).collect())
            .collect();
        let t = CountTable::from_rows(&rows).expect("nonnegative counts");
        if t.nrows() == nr && t.ncols() == nc {
            return t;
        }
    }
}

fn log_uniform(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| 10f64.powf(rng.random_range(-1.0..1.0)))
        .collect()
}

fn random_weights(rng: &mut impl Rng, nr: usize, nc: usize) -> WeightPair {
    let r: Vec<f64> = (0..nr).map(|_| rng.random_range(0.1..1.0)).collect();
    let c: Vec<f64> = (0..nc).map(|_| rng.random_range(0.1..1.0)).collect();
    WeightPair::normalized(&r, &c).expect("positive weights")
}

fn check_sparsity(opts: &VerifyOptions) -> Check {
    let r = sparsity(&opts.fixtures.load(EXAMPLE1)?);
    let ok = r.apparent == Ratio::new(4, 30)
        && r.ca_sparsity == Ratio::new(1, 4)
        && r.adjusted == Ratio::new(1, 2);
    Ok((
        ok,
        format!(
            "apparent {} CA {} adjusted {} (expected 2/15, 1/4, 1/2)",
            r.apparent, r.ca_sparsity, r.adjusted
        ),
    ))
}

fn check_example3(opts: &VerifyOptions) -> Check {
    let t = opts.fixtures.load(EXAMPLE3)?;
    let s = scale(&t, &SinkhornOptions::default())?;
    let last = s.last();
    let expect_d = [[0.0, 1.998_066_8], [1.997_934, 0.003_995_6]];
    let d_err = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (s.d()[(i, j)] - expect_d[i][j]).abs())
        .fold(0.0, f64::max);
    let c2_rel = (last.c2dist - 4.128_788e-3).abs() / 4.128_788e-3;
    let ratio_err = (last.ratio - 0.999_999_0).abs();
    let ok = s.iterations() == 500 && c2_rel <= 1e-3 && ratio_err <= 1e-6 && d_err <= 1e-5;
    Ok((
        ok,
        format!(
            "{} iterations, c2dist {:.6e} (rel err {:.1e}), ratio {:.7}, max |D - ref| {:.1e}",
            s.iterations(),
            last.c2dist,
            c2_rel,
            last.ratio,
            d_err
        ),
    ))
}

fn rodent_scaling(opts: &VerifyOptions) -> Result<crate::sinkhorn::ScalingResult> {
    scale(&opts.fixtures.load(RODENT)?, &SinkhornOptions::default())
}

fn check_rodent_trace(opts: &VerifyOptions) -> Check {
    let s = rodent_scaling(opts)?;
    let tr = s.trace();
    let n = tr.len();
    let refs = [302.96414, 257.13691];
    let near = |x: f64, r: f64| (x - r).abs() <= 1e-2;
    let (a, b) = (tr[n - 2], tr[n - 1]);
    let pair_ok = (near(a.c2dist, refs[0]) && near(b.c2dist, refs[1]))
        || (near(a.c2dist, refs[1]) && near(b.c2dist, refs[0]));
    let ratio_ok = near_abs(a.ratio, 1.380883, 1e-4) && near_abs(b.ratio, 1.380883, 1e-4);
    let ok = s.status() == ScalingStatus::OscillatingPeriod2 && pair_ok && ratio_ok;
    Ok((
        ok,
        format!(
            "status {}, last c2dist {:.5} / {:.5}, ratio {:.6}",
            s.status(),
            a.c2dist,
            b.c2dist,
            b.ratio
        ),
    ))
}

fn near_abs(x: f64, r: f64, tol: f64) -> bool {
    (x - r).abs() <= tol
}

fn check_rodent_spectra(opts: &VerifyOptions) -> Check {
    let n = opts.fixtures.load(RODENT)?;
    let sg = sign_transform(&n);
    let variants: [(&str, CountTable, [f64; 6]); 4] = [
        (
            "raw",
            n.clone(),
            [0.8639, 0.6776, 0.5362, 0.3909, 0.1889, 0.1568],
        ),
        (
            "RS",
            row_closure(&n)?,
            [0.9554, 0.8122, 0.6211, 0.5251, 0.2009, 0.1629],
        ),
        (
            "sign",
            sg.clone(),
            [0.8167, 0.5990, 0.4458, 0.4106, 0.2605, 0.2171],
        ),
        (
            "RS(sign)",
            row_closure(&sg)?,
            [0.8885, 0.7704, 0.5299, 0.4795, 0.3759, 0.2622],
        ),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, t, expect) in variants {
        let sv = ca_decompose(&t.to_correspondence()?).sigmas;
        let top: Vec<f64> = sv.iter().take(6).copied().collect();
        let err = max_abs_diff(&top, &expect);
        ok &= err <= 5e-4;
        parts.push(format!("{name}: {} (max err {err:.1e})", fmt_list(&top)));
    }
    Ok((ok, parts.join("; ")))
}

fn check_scaled_spectrum(opts: &VerifyOptions) -> Check {
    let s = rodent_scaling(opts)?;
    let prev = s
        .previous_d()
        .ok_or_else(|| SicaError::InvalidArgument("scaling stopped after one iteration".into()))?;
    let labels = (s.row_labels().to_vec(), s.col_labels().to_vec());
    let sv500 = ca_decompose(&s.to_correspondence()?).sigmas;
    let sv499 = ca_decompose(&CorrespondenceTable::from_matrix(prev, labels.0, labels.1)?).sigmas;
    let tail = [0.8052, 0.7174, 0.6336, 0.4936, 0.2558];
    let spectrum_ok = |sv: &[f64]| {
        sv.len() >= 8
            && sv[..3].iter().all(|x| (x - 1.0).abs() <= 1e-5)
            && max_abs_diff(&sv[3..8], &tail) <= 5e-4
    };
    let same = max_abs_diff(&sv500, &sv499);
    let ok = spectrum_ok(&sv500) && spectrum_ok(&sv499) && same <= 1e-6;
    Ok((
        ok,
        format!(
            "iteration 500: {}; iteration 499 differs by {same:.1e}",
            fmt_list(&sv500)
        ),
    ))
}

fn check_blocks(opts: &VerifyOptions) -> Check {
    let s = rodent_scaling(opts)?;
    let part = detect_blocks(&s, None)?;
    let cols: [&[usize]; 4] = [&[1], &[2], &[3, 4, 5, 6, 8], &[7, 9]];
    let rows: [&[usize]; 4] = [
        &[24, 21, 17, 14, 10, 9],
        &[25, 22, 16, 15, 11, 8, 7],
        &[28, 27, 26, 23, 20, 19, 18, 13, 12, 5, 3, 1],
        &[6, 4, 2],
    ];
    let col_marg = [36.23, 29.96, 5.25, 3.76];
    let to_labels = |prefix: &str, ids: &[usize]| {
        let mut v: Vec<String> = ids.iter().map(|k| format!("{prefix}{k}")).collect();
        v.sort();
        v
    };
    let mut ok = part.len() == 4;
    let mut found = Vec::new();
    for k in 0..4 {
        let want_cols = to_labels("rod", cols[k]);
        let want_rows = to_labels("s", rows[k]);
        let block = part.blocks.iter().find(|b| {
            let mut c = b.col_labels.clone();
            c.sort();
            c == want_cols
        });
        match block {
            Some(b) => {
                let mut r = b.row_labels.clone();
                r.sort();
                let c = 100.0 * b.col_marginal;
                ok &= r == want_rows && (c - col_marg[k]).abs() <= 0.01;
                found.push(format!(
                    "{{{}}} c={c:.2} r={:.2}",
                    cols[k]
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    100.0 * b.row_marginal
                ));
            }
            None => {
                ok = false;
                found.push(format!("column group {:?} missing", cols[k]));
            }
        }
    }
    Ok((ok, format!("{} blocks: {}", part.len(), found.join("; "))))
}

fn power_error(t: &CountTable, alpha: f64, lam: &DMatrix<f64>) -> Result<f64> {
    let r = power_index_ratio(t, alpha)?;
    Ok((r.values() - lam).amax())
}

fn check_power_limit(opts: &VerifyOptions) -> Check {
    let mut rng = rng(opts, 7);
    let n = iters(opts, 20);
    let mut ok = true;
    let (mut lo_a, mut hi_a) = (f64::INFINITY, 0.0f64);
    let (mut lo_b, mut hi_b) = (f64::INFINITY, 0.0f64);
    for _ in 0..n {
        let t = random_positive(&mut rng, 5, 4, 0.5, 10.0);
        let p = t.to_correspondence()?;
        let lam = lra_index(&p, &WeightPair::uniform(5, 4))?;
        let e2 = power_error(&t, 1e-2, lam.values())?;
        let e3 = power_error(&t, 1e-3, lam.values())?;
        let e4 = power_error(&t, 1e-4, lam.values())?;
        let a = e3 / e2;
        let b = e3 / e4;
        lo_a = lo_a.min(a);
        hi_a = hi_a.max(a);
        lo_b = lo_b.min(b);
        hi_b = hi_b.max(b);
        ok &= e3 < 1e-2 * e2 * 1.5 && (5.0..=20.0).contains(&b);
    }
    Ok((
        ok,
        format!(
            "{n} tables: err(1e-3)/err(1e-2) in [{lo_a:.4}, {hi_a:.4}] (required < 0.015), \
             err(1e-3)/err(1e-4) in [{lo_b:.2}, {hi_b:.2}] (required in [5, 20])"
        ),
    ))
}

fn check_invariance(opts: &VerifyOptions) -> Check {
    let mut rng = rng(opts, 8);
    let n = iters(opts, 20);
    let (mut lra_err, mut mf_err) = (0.0f64, 0.0f64);
    let mut sign_ok = true;
    let mf_opts = MfcaOptions {
        sinkhorn: SinkhornOptions {
            iters: 10_000,
            tol: 1e-13,
            epsilon: None,
        },
        zero_tol: None,
    };
    for _ in 0..n {
        let (nr, nc) = (rng.random_range(2..=7), rng.random_range(2..=6));
        let t = random_positive(&mut rng, nr, nc, 0.5, 10.0);
        let a = log_uniform(&mut rng, nr);
        let b = log_uniform(&mut rng, nc);
        let ts = t.scale_rows_cols(&a, &b)?;
        let w = random_weights(&mut rng, nr, nc);
        let l0 = lra_index(&t.to_correspondence()?, &w)?;
        let l1 = lra_index(&ts.to_correspondence()?, &w)?;
        lra_err = lra_err.max((l0.values() - l1.values()).amax());

        let z = random_counts(&mut rng, nr, nc);
        let zs = z.scale_rows_cols(&a, &b)?;
        sign_ok &= sign_transform(&z).values() == sign_transform(&zs).values();

        let s0 = mfca(&t, &mf_opts)?.decomposition.sigmas;
        let s1 = mfca(&ts, &mf_opts)?.decomposition.sigmas;
        mf_err = mf_err.max(max_abs_diff(&s0, &s1));
    }
    let e3 = opts.fixtures.load(EXAMPLE3)?;
    let witness = e3.scale_rows_cols(&[10.0, 1.0], &[1.0, 1.0])?;
    let ca_change = (ca_index(&e3.to_correspondence()?).values()
        - ca_index(&witness.to_correspondence()?).values())
    .amax();
    let ok = lra_err <= 1e-10 && sign_ok && mf_err <= 1e-8 && ca_change > 0.1;
    Ok((
        ok,
        format!(
            "{n} tables: lra max change {lra_err:.1e}, sign {}, mfca sv max change {mf_err:.1e}; \
             CA index change under witness scaling {ca_change:.3}",
            if sign_ok { "identical" } else { "changed" }
        ),
    ))
}

fn centering_gap(y: &DMatrix<f64>, w: &WeightPair) -> Result<f64> {
    let a = double_center(y, w, CenteringMode::Additive)?;
    let m = double_center(y, w, CenteringMode::Multiplicative)?;
    Ok((a.values() - m.values()).amax())
}

fn check_centering(opts: &VerifyOptions) -> Check {
    let mut rng = rng(opts, 9);
    let n = iters(opts, 20);
    let mut density_gap = 0.0f64;
    let mut tables: Vec<CorrespondenceTable> =
        vec![opts.fixtures.load(RODENT)?.to_correspondence()?];
    for _ in 0..n {
        let (nr, nc) = (rng.random_range(2..=7), rng.random_range(2..=6));
        tables.push(random_counts(&mut rng, nr, nc).to_correspondence()?);
    }
    for p in &tables {
        let (r, c) = (p.row_masses(), p.col_masses());
        let y = DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| p.p(i, j) / (r[i] * c[j]));
        density_gap = density_gap.max(centering_gap(&y, &WeightPair::masses(p))?);
    }

    // y = 1 + E with E uniformly double-centered: every weighted mean is 1.
    let mut equal_gap = 0.0f64;
    let mut uniform_gap = 0.0f64;
    for _ in 0..n {
        let (nr, nc) = (rng.random_range(2..=7), rng.random_range(2..=6));
        let x = DMatrix::from_fn(nr, nc, |_, _| rng.random_range(-0.4..0.4));
        let w = WeightPair::uniform(nr, nc);
        let e = double_center(&x, &w, CenteringMode::Additive)?;
        let y = e.values().map(|v| 1.0 + v);
        equal_gap = equal_gap.max(centering_gap(&y, &w)?);
        let add = double_center(&y, &w, CenteringMode::Additive)?;
        uniform_gap = uniform_gap.max((add.values() - y.map(|v| v - 1.0)).amax());
    }

    let unequal = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    let unequal_gap = centering_gap(&unequal, &WeightPair::uniform(2, 2))?;
    let ok = density_gap <= 1e-12 && equal_gap <= 1e-12 && uniform_gap <= 1e-12 && unequal_gap > 1e-3;
    Ok((
        ok,
        format!(
            "density gap {density_gap:.1e}, equal-marginal gap {equal_gap:.1e} \
             (vs y - Y++ {uniform_gap:.1e}), unequal-marginal gap {unequal_gap:.3}"
        ),
    ))
}

/// Block-diagonal table of `k` random positive blocks.
pub fn block_diagonal(rng: &mut impl Rng, k: usize) -> CountTable {
    let sizes: Vec<(usize, usize)> = (0..k)
        .map(|_| (rng.random_range(2..=4), rng.random_range(2..=4)))
        .collect();
    let nr: usize = sizes.iter().map(|s| s.0).sum();
    let nc: usize = sizes.iter().map(|s| s.1).sum();
    let mut rows = vec![vec![0.0; nc]; nr];
    let (mut r0, mut c0) = (0, 0);
    for (h, w) in sizes {
        for row in rows.iter_mut().skip(r0).take(h) {
            for cell in row.iter_mut().skip(c0).take(w) {
                *cell = rng.random_range(1.0..20.0);
            }
        }
        r0 += h;
        c0 += w;
    }
    CountTable::from_rows(&rows).expect("block table")
}

fn unit_count(t: &CountTable) -> Result<usize> {
    let sv = ca_decompose(&t.to_correspondence()?).sigmas;
    Ok(sv.iter().filter(|s| (*s - 1.0).abs() <= 1e-10).count())
}

fn check_block_unit_values(opts: &VerifyOptions) -> Check {
    let mut rng = rng(opts, 10);
    let n = iters(opts, 5);
    let mut ok = true;
    let mut counts = Vec::new();
    for k in 2..=4 {
        for _ in 0..n {
            let got = unit_count(&block_diagonal(&mut rng, k))?;
            ok &= got == k - 1;
            counts.push(got);
        }
    }
    let ex2 = unit_count(&opts.fixtures.load(EXAMPLE2)?)?;
    ok &= ex2 == 1;
    Ok((
        ok,
        format!(
            "unit counts for 2/3/4 blocks: {:?}; Example 2: {ex2}",
            counts
        ),
    ))
}

fn check_taxicab(opts: &VerifyOptions) -> Check {
    let mut rng = rng(opts, 11);
    let n = iters(opts, 50);
    let mut mismatches = 0;
    for _ in 0..n {
        let (nr, nc) = (rng.random_range(2..=7), rng.random_range(2..=6));
        let p = random_counts(&mut rng, nr, nc).to_correspondence()?;
        let dec = tca_decompose(&p, 1)?;
        let o = tca_oracle(&p)?;
        if dec.sigmas[0] != o.lambda {
            mismatches += 1;
        }
    }
    let (mut recon, mut tetra) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let (nr, nc) = (rng.random_range(2..=7), rng.random_range(2..=6));
        let p = random_positive(&mut rng, nr, nc, 0.5, 10.0).to_correspondence()?;
        let dec = lra_decompose(&p)?;
        let lam = lra_index(&p, &WeightPair::uniform(nr, nc))?;
        recon = recon.max((dec.reconstruct() - lam.values()).amax());
        let fit = dec.reconstruct();
        for i in 0..nr {
            for i1 in 0..nr {
                for j in 0..nc {
                    for j1 in 0..nc {
                        let t = log_odds_tetra(&p, i, i1, j, j1)?;
                        let f = fit[(i, j)] + fit[(i1, j1)] - fit[(i, j1)] - fit[(i1, j)];
                        tetra = tetra.max((t - f).abs());
                    }
                }
            }
        }
    }
    let ok = mismatches == 0 && recon <= 1e-8 && tetra <= 1e-8;
    Ok((
        ok,
        format!(
            "{n} tables: {mismatches} oracle mismatches; log-ratio reconstruction {recon:.1e}, \
             tetra-difference {tetra:.1e}"
        ),
    ))
}
