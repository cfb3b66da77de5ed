mod config;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use sica_core::ca::{ca_decompose, lra_decompose, mfca, principal_map, Decomposition, MfcaOptions};
use sica_core::fixtures::FixtureSource;
use sica_core::sinkhorn::{detect_blocks, scale, ScalingResult, SinkhornOptions};
use sica_core::sparsity::{sparsity_with_tol, SparsityReport};
use sica_core::svg::render_map;
use sica_core::table::{ingest_csv, CountTable, CsvOptions, DEFAULT_MERGE_TOL};
use sica_core::taxicab::tca_decompose;
use sica_core::verify::{self, VerifyOptions};
use sica_core::SicaError;
use thiserror::Error;

use config::{
    apply_chain, describe_chain, DecompositionSettings, RunConfig, SinkhornSettings, TransformStep,
};

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
struct StageError {
    stage: &'static str,
    #[source]
    source: SicaError,
}

impl StageError {
    fn exit_code(&self) -> u8 {
        match self.source {
            SicaError::Io(_) => 2,
            _ => 1,
        }
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T, E: Into<SicaError>> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|e| StageError {
            stage,
            source: e.into(),
        })
    }
}

type CliResult = Result<ExitCode, StageError>;

#[derive(Parser)]
#[command(
    name = "sica",
    version,
    about = "Scale-invariant correspondence analysis"
)]
struct Cli {
    /// Log filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// CSV table: header row of column labels, first column of row labels.
    input: PathBuf,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The first line holds data, not column labels.
    #[arg(long)]
    no_header: bool,
    /// The first column holds data, not row labels.
    #[arg(long)]
    no_row_labels: bool,
}

#[derive(Args, Clone)]
struct TransformArgs {
    /// Elementwise power n^alpha (zeros stay zero). Repeatable.
    #[arg(long, value_name = "ALPHA", action = clap::ArgAction::Append)]
    power: Vec<f64>,
    /// Replace positive cells by 1.
    #[arg(long, action = clap::ArgAction::Count)]
    sign: u8,
    /// Divide each row by its sum.
    #[arg(long, action = clap::ArgAction::Count)]
    closure: u8,
    /// Merge proportional rows and columns.
    #[arg(long, action = clap::ArgAction::Count)]
    merge: u8,
    #[arg(long, default_value_t = DEFAULT_MERGE_TOL)]
    merge_tol: f64,
}

#[derive(Args, Clone)]
struct SinkhornArgs {
    #[arg(long = "sinkhorn-iters", default_value_t = 500)]
    sinkhorn_iters: usize,
    #[arg(long = "sinkhorn-tol", default_value_t = 1e-8)]
    sinkhorn_tol: f64,
    /// Block threshold on the scaled table (default: 1e-3 times its mean).
    #[arg(long)]
    zero_tol: Option<f64>,
    /// Replace zero cells by this value before scaling.
    #[arg(long)]
    epsilon: Option<f64>,
}

impl SinkhornArgs {
    fn options(&self) -> SinkhornOptions {
        SinkhornOptions {
            iters: self.sinkhorn_iters,
            tol: self.sinkhorn_tol,
            epsilon: self.epsilon,
        }
    }

    fn settings(&self) -> SinkhornSettings {
        SinkhornSettings {
            iters: self.sinkhorn_iters,
            tol: self.sinkhorn_tol,
            zero_tol: self.zero_tol,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Ca,
    Tca,
    Mfca,
    Lra,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Ca => "ca",
            MethodArg::Tca => "tca",
            MethodArg::Mfca => "mfca",
            MethodArg::Lra => "lra",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a table and print a summary.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Print the cleaned table as JSON.
        #[arg(long)]
        json: bool,
        /// Write the cleaned table as CSV.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Apparent, CA and adjusted sparsity.
    Sparsity {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_MERGE_TOL)]
        merge_tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Apply a transform chain in the order given; optionally decompose.
    Transform {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        transforms: TransformArgs,
        #[command(flatten)]
        sinkhorn: SinkhornArgs,
        #[arg(long)]
        decompose: Option<MethodArg>,
        #[arg(long)]
        k: Option<usize>,
        /// Transformed table as CSV.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Singular values as CSV.
        #[arg(long)]
        sv_out: Option<PathBuf>,
    },
    /// Scale to uniform marginals and detect blocks.
    Scale {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        transforms: TransformArgs,
        #[command(flatten)]
        sinkhorn: SinkhornArgs,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        d_out: Option<PathBuf>,
        #[arg(long)]
        blocks_out: Option<PathBuf>,
        /// Number of trailing trace rows to print.
        #[arg(long, default_value_t = 4)]
        tail: usize,
    },
    /// Decompose with ca, tca, mfca or lra.
    Decompose {
        #[arg(value_enum)]
        method: MethodArg,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        transforms: TransformArgs,
        #[command(flatten)]
        sinkhorn: SinkhornArgs,
        /// Number of taxicab axes.
        #[arg(long)]
        k: Option<usize>,
        /// Full decomposition as JSON.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Principal map as SVG.
    Map {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        transforms: TransformArgs,
        #[command(flatten)]
        sinkhorn: SinkhornArgs,
        #[arg(long, value_enum, default_value = "ca")]
        method: MethodArg,
        #[arg(long)]
        k: Option<usize>,
        /// Two 1-based dimensions, e.g. 1,2.
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
        /// SVG output (stdout when absent).
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        coords_out: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
    },
    /// Full pipeline with all artifacts written to a directory.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        transforms: TransformArgs,
        #[command(flatten)]
        sinkhorn: SinkhornArgs,
        #[arg(long, value_enum, default_value = "mfca")]
        decompose: MethodArg,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
        #[arg(long, default_value = "sica-report")]
        out_dir: PathBuf,
        /// Trace rows echoed to stdout.
        #[arg(long, default_value_t = 4)]
        tail: usize,
    },
    /// Run the reference checks on the bundled tables.
    Verify {
        /// Check group (sparsity, sinkhorn, spectra, blocks, limit,
        /// invariance, centering, taxicab) or check number.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        property_iters: Option<usize>,
    },
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated dimensions, got {s:?}"))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad dimension {x:?}: {e}"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Scientific notation with six significant digits and a two-digit exponent.
fn sci(x: f64) -> String {
    let s = format!("{x:.6e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            let sign = if e < 0 { '-' } else { '+' };
            format!("{mant}e{sign}{:02}", e.abs())
        }
        None => s,
    }
}

/// Transform steps in command-line order.
fn chain_from(m: &ArgMatches, args: &TransformArgs) -> Vec<TransformStep> {
    let mut steps: Vec<(usize, TransformStep)> = Vec::new();
    if let Some(idx) = m.indices_of("power") {
        steps.extend(
            idx.zip(&args.power)
                .map(|(i, &alpha)| (i, TransformStep::Power { alpha })),
        );
    }
    let flags: [(&str, TransformStep); 3] = [
        ("sign", TransformStep::Sign),
        ("closure", TransformStep::Closure),
        (
            "merge",
            TransformStep::Merge {
                tol: args.merge_tol,
            },
        ),
    ];
    for (name, step) in flags {
        if m.value_source(name) == Some(clap::parser::ValueSource::CommandLine) {
            if let Some(idx) = m.indices_of(name) {
                steps.extend(idx.map(|i| (i, step)));
            }
        }
    }
    steps.sort_by_key(|s| s.0);
    steps.into_iter().map(|s| s.1).collect()
}

fn load(input: &InputArgs) -> Result<CountTable, StageError> {
    if !input.delimiter.is_ascii() {
        return Err(SicaError::InvalidArgument("delimiter must be ASCII".into())).stage("ingest");
    }
    let file = File::open(&input.input)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", input.input.display())))
        .stage("ingest")?;
    let opts = CsvOptions {
        delimiter: input.delimiter as u8,
        has_header: !input.no_header,
        has_row_labels: !input.no_row_labels,
    };
    ingest_csv(std::io::BufReader::new(file), &opts).stage("ingest")
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), StageError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).stage("output")?;
            }
            std::fs::write(p, content).stage("output")
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes()).stage("output")
        }
    }
}

fn csv_string(f: impl FnOnce(&mut Vec<u8>) -> sica_core::Result<()>) -> Result<String, StageError> {
    let mut buf = Vec::new();
    f(&mut buf).stage("output")?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

fn header(chain: &[TransformStep]) -> String {
    format!("# transforms: {}\n", describe_chain(chain))
}

fn with_transforms(json: String, chain: &[TransformStep]) -> Result<String, StageError> {
    let mut v: Value = serde_json::from_str(&json).stage("output")?;
    if let Value::Object(map) = &mut v {
        map.insert("transforms".into(), Value::String(describe_chain(chain)));
    }
    let mut s = serde_json::to_string_pretty(&v).stage("output")?;
    s.push('\n');
    Ok(s)
}

fn sparsity_text(r: &SparsityReport) -> String {
    format!(
        "apparent {:.2}%, CA {:.2}%, adjusted {:.2}%\n{r}\n",
        100.0 * r.apparent_f64(),
        100.0 * r.ca_sparsity_f64(),
        100.0 * r.adjusted_f64()
    )
}

fn trace_csv(s: &ScalingResult) -> String {
    let mut out = String::from("iteration,c2dist,ratio\n");
    for row in s.trace() {
        out.push_str(&format!(
            "{},{},{}\n",
            row.iteration,
            sci(row.c2dist),
            sci(row.ratio)
        ));
    }
    out
}

fn trace_tail(s: &ScalingResult, n: usize) -> String {
    let tr = s.trace();
    let mut out = format!(
        "scaling: {} after {} iterations\niteration  c2dist        ratio\n",
        s.status(),
        s.iterations()
    );
    for row in &tr[tr.len().saturating_sub(n)..] {
        out.push_str(&format!(
            "{:>9}  {}  {}\n",
            row.iteration,
            sci(row.c2dist),
            sci(row.ratio)
        ));
    }
    out
}

struct Decomposed {
    dec: Decomposition,
    default_dims: (usize, usize),
    scaling: Option<ScalingResult>,
    blocks_json: Option<String>,
}

fn decompose(
    method: MethodArg,
    t: &CountTable,
    sinkhorn: &SinkhornArgs,
    k: Option<usize>,
) -> Result<Decomposed, StageError> {
    let p = || t.to_correspondence().stage("decompose");
    let simple = |dec: Decomposition| Decomposed {
        dec,
        default_dims: (1, 2),
        scaling: None,
        blocks_json: None,
    };
    match method {
        MethodArg::Ca => Ok(simple(ca_decompose(&p()?))),
        MethodArg::Lra => Ok(simple(lra_decompose(&p()?).stage("decompose")?)),
        MethodArg::Tca => {
            let max_k = t.nrows().min(t.ncols()).saturating_sub(1);
            let k = k.unwrap_or(max_k.min(2));
            Ok(simple(tca_decompose(&p()?, k).stage("decompose")?))
        }
        MethodArg::Mfca => {
            let opts = MfcaOptions {
                sinkhorn: sinkhorn.options(),
                zero_tol: sinkhorn.zero_tol,
            };
            let res = mfca(t, &opts).stage("scale")?;
            let blocks_json = Some(res.partition.to_json().stage("output")?);
            let default_dims = res.default_map_dims();
            Ok(Decomposed {
                dec: res.decomposition,
                default_dims,
                scaling: Some(res.scaling),
                blocks_json,
            })
        }
    }
}

fn sv_text(dec: &Decomposition) -> String {
    let vals: Vec<String> = dec.sigmas.iter().map(|s| format!("{s:.6}")).collect();
    let shares: Vec<String> = dec
        .shares
        .iter()
        .map(|s| format!("{:.2}%", 100.0 * s))
        .collect();
    format!(
        "{} singular values: {}\nshares: {}\n",
        dec.method,
        vals.join(" "),
        shares.join(" ")
    )
}

fn sv_csv(dec: &Decomposition, chain: &[TransformStep]) -> String {
    let mut out = header(chain);
    out.push_str("dim,sv,share\n");
    for (m, (s, sh)) in dec.sigmas.iter().zip(&dec.shares).enumerate() {
        out.push_str(&format!("{},{s},{sh}\n", m + 1));
    }
    out
}

fn map_svg(
    d: &Decomposed,
    dims: Option<(usize, usize)>,
    title: &str,
) -> Result<(String, sica_core::ca::CoordinateMap), StageError> {
    if d.dec.rank() < 2 {
        return Err(SicaError::InvalidArgument(format!(
            "a map needs at least 2 dimensions, the decomposition has {}",
            d.dec.rank()
        )))
        .stage("map");
    }
    let map = principal_map(&d.dec, dims.unwrap_or(d.default_dims)).stage("map")?;
    let svg = render_map(&map, title).stage("map")?;
    Ok((svg, map))
}

fn run(cli: Cli, matches: &ArgMatches) -> CliResult {
    let sub = matches.subcommand().map(|(_, m)| m);
    match cli.command {
        Command::Ingest { input, json, out } => {
            let t = load(&input)?;
            if json {
                emit(None, &format!("{}\n", t.to_json().stage("output")?))?;
            } else {
                let mut s = format!(
                    "{} rows x {} columns, total {}, {} zero cells\n",
                    t.nrows(),
                    t.ncols(),
                    t.total(),
                    t.zero_count()
                );
                for d in t.dropped() {
                    s.push_str(&format!(
                        "dropped all-zero {:?} {} ({})\n",
                        d.axis,
                        d.index + 1,
                        d.label
                    ));
                }
                emit(None, &s)?;
            }
            if let Some(path) = out {
                emit(Some(&path), &t.to_csv_string().stage("output")?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sparsity {
            input,
            merge_tol,
            json,
        } => {
            let r = sparsity_with_tol(&load(&input)?, merge_tol);
            if json {
                emit(None, &format!("{}\n", r.to_json().stage("output")?))?;
            } else {
                emit(None, &sparsity_text(&r))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Transform {
            input,
            transforms,
            sinkhorn,
            decompose: method,
            k,
            out,
            sv_out,
        } => {
            let chain = chain_from(sub.expect("subcommand"), &transforms);
            let t = apply_chain(&load(&input)?, &chain).stage("transform")?;
            let mut table = header(&chain);
            table.push_str(&csv_string(|b| t.write_csv(b))?);
            match (&out, method) {
                (Some(p), _) => emit(Some(p), &table)?,
                (None, None) => emit(None, &table)?,
                _ => {}
            }
            if let Some(m) = method {
                let d = decompose(m, &t, &sinkhorn, k)?;
                emit(None, &format!("{}{}", header(&chain), sv_text(&d.dec)))?;
                if let Some(p) = sv_out {
                    emit(Some(&p), &sv_csv(&d.dec, &chain))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Scale {
            input,
            transforms,
            sinkhorn,
            trace_out,
            d_out,
            blocks_out,
            tail,
        } => {
            let chain = chain_from(sub.expect("subcommand"), &transforms);
            let t = apply_chain(&load(&input)?, &chain).stage("transform")?;
            let s = scale(&t, &sinkhorn.options()).stage("scale")?;
            let part = detect_blocks(&s, sinkhorn.zero_tol).stage("scale")?;
            let mut text = header(&chain);
            text.push_str(&trace_tail(&s, tail));
            text.push_str(&format!("blocks: {} ({:?})\n", part.len(), part.kind));
            for (k, b) in part.blocks.iter().enumerate() {
                text.push_str(&format!(
                    "  block {}: rows [{}] columns [{}] r={:.4} c={:.4}\n",
                    k + 1,
                    b.row_labels.join(","),
                    b.col_labels.join(","),
                    b.row_marginal,
                    b.col_marginal
                ));
            }
            emit(None, &text)?;
            if let Some(p) = trace_out {
                emit(Some(&p), &format!("{}{}", header(&chain), trace_csv(&s)))?;
            }
            if let Some(p) = d_out {
                emit(
                    Some(&p),
                    &format!("{}{}", header(&chain), csv_string(|b| s.write_d_csv(b))?),
                )?;
            }
            if let Some(p) = blocks_out {
                emit(
                    Some(&p),
                    &with_transforms(part.to_json().stage("output")?, &chain)?,
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Decompose {
            method,
            input,
            transforms,
            sinkhorn,
            k,
            out,
        } => {
            let chain = chain_from(sub.expect("subcommand"), &transforms);
            let t = apply_chain(&load(&input)?, &chain).stage("transform")?;
            let d = decompose(method, &t, &sinkhorn, k)?;
            let mut text = header(&chain);
            text.push_str(&sv_text(&d.dec));
            for note in &d.dec.notes {
                text.push_str(&format!("note: {note}\n"));
            }
            emit(None, &text)?;
            if let Some(p) = out {
                emit(
                    Some(&p),
                    &with_transforms(d.dec.to_json().stage("output")?, &chain)?,
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Map {
            input,
            transforms,
            sinkhorn,
            method,
            k,
            dims,
            out,
            coords_out,
            title,
        } => {
            let chain = chain_from(sub.expect("subcommand"), &transforms);
            let t = apply_chain(&load(&input)?, &chain).stage("transform")?;
            let d = decompose(method, &t, &sinkhorn, k)?;
            let title = title.unwrap_or_else(|| {
                let stem = input
                    .input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                format!("{} {stem}", method.name())
            });
            let (svg, map) = map_svg(&d, dims, &title)?;
            emit(out.as_deref(), &svg)?;
            if let Some(p) = coords_out {
                let mut s = header(&chain);
                s.push_str(&csv_string(|b| map.write_csv(b))?);
                emit(Some(&p), &s)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report {
            input,
            transforms,
            sinkhorn,
            decompose: method,
            k,
            dims,
            out_dir,
            tail,
        } => {
            let chain = chain_from(sub.expect("subcommand"), &transforms);
            let raw = load(&input)?;
            let t = apply_chain(&raw, &chain).stage("transform")?;
            std::fs::create_dir_all(&out_dir).stage("output")?;
            let cfg = RunConfig {
                command: "report".into(),
                input: Some(input.input.clone()),
                transforms: chain.clone(),
                sinkhorn: sinkhorn.settings(),
                decomposition: Some(DecompositionSettings {
                    method: method.name().into(),
                    k,
                    dims,
                }),
                output: Some(out_dir.clone()),
                seed: None,
            };
            emit(
                Some(&out_dir.join("config.json")),
                &format!("{}\n", cfg.to_json().stage("output")?),
            )?;

            let sp = sparsity_with_tol(&t, DEFAULT_MERGE_TOL);
            emit(
                Some(&out_dir.join("sparsity.txt")),
                &format!("{}{}", header(&chain), sparsity_text(&sp)),
            )?;
            emit(
                Some(&out_dir.join("sparsity.json")),
                &with_transforms(sp.to_json().stage("output")?, &chain)?,
            )?;

            let d = decompose(method, &t, &sinkhorn, k)?;
            let (scaling, blocks_json) = match (d.scaling.as_ref(), d.blocks_json.clone()) {
                (Some(s), Some(b)) => (s.clone(), b),
                _ => {
                    let s = scale(&t, &sinkhorn.options()).stage("scale")?;
                    let b = detect_blocks(&s, sinkhorn.zero_tol)
                        .stage("scale")?
                        .to_json()
                        .stage("output")?;
                    (s, b)
                }
            };
            emit(
                Some(&out_dir.join("trace.csv")),
                &format!("{}{}", header(&chain), trace_csv(&scaling)),
            )?;
            emit(
                Some(&out_dir.join("blocks.json")),
                &with_transforms(blocks_json, &chain)?,
            )?;
            emit(
                Some(&out_dir.join("decomposition.json")),
                &with_transforms(d.dec.to_json().stage("output")?, &chain)?,
            )?;
            emit(Some(&out_dir.join("sv.csv")), &sv_csv(&d.dec, &chain))?;
            if d.dec.rank() >= 2 {
                let (svg, map) = map_svg(&d, dims, &format!("{} map", method.name()))?;
                emit(Some(&out_dir.join("map.svg")), &svg)?;
                let mut coords = header(&chain);
                coords.push_str(&csv_string(|b| map.write_csv(b))?);
                emit(Some(&out_dir.join("coordinates.csv")), &coords)?;
            } else {
                log::warn!("decomposition has fewer than 2 dimensions; no map written");
            }

            let mut text = header(&chain);
            text.push_str(&sparsity_text(&sp));
            text.push_str(&trace_tail(&scaling, tail));
            text.push_str(&sv_text(&d.dec));
            text.push_str(&format!("artifacts written to {}\n", out_dir.display()));
            emit(None, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            only,
            seed,
            property_iters,
        } => {
            let opts = VerifyOptions {
                only,
                seed,
                property_iters,
                fixtures: FixtureSource::from_env(),
            };
            let outcomes = verify::run(&opts).stage("verify")?;
            let mut text = String::new();
            for o in &outcomes {
                text.push_str(&format!("{o}\n"));
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            text.push_str(&format!(
                "{} passed, {failed} failed\n",
                outcomes.len() - failed
            ));
            emit(None, &text)?;
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    // Usage errors are validation failures (exit 1); exit 2 is kept for IO.
    let parsed = Cli::command()
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m).map(|c| (c, m)));
    let (cli, matches) = match parsed {
        Ok(p) => p,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();
    match run(cli, &matches) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error in {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_format() {
        assert_eq!(sci(4.128_787_9e-3), "4.128788e-03");
        assert_eq!(sci(302.964_138_2), "3.029641e+02");
        assert_eq!(sci(0.0), "0.000000e+00");
        assert_eq!(sci(1.5e-120), "1.500000e-120");
    }

    #[test]
    fn dims_parser() {
        assert_eq!(parse_dims("4,5"), Ok((4, 5)));
        assert!(parse_dims("4").is_err());
        assert!(parse_dims("a,2").is_err());
    }

    #[test]
    fn chain_follows_command_line_order() {
        let m = Cli::command()
            .try_get_matches_from([
                "sica",
                "transform",
                "--closure",
                "x.csv",
                "--power",
                "0.5",
                "--sign",
            ])
            .unwrap();
        let (_, sub) = m.subcommand().unwrap();
        let args = TransformArgs::from_arg_matches(sub).unwrap();
        assert_eq!(
            chain_from(sub, &args),
            vec![
                TransformStep::Closure,
                TransformStep::Power { alpha: 0.5 },
                TransformStep::Sign
            ]
        );
    }
}
