//! Argument parsing and the three subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use super::dataset::{ingest, Dataset, Encoding, IngestOptions};
use super::report::{text_table, write_reports_csv, RunReport};
use crate::baselines::{cut_dendrogram, hierarchical, select_k_by_silhouette, BaselineMethod, Linkage};
use crate::distance::{euclidean_distances, jaccard_distances, standardize, DistanceMatrix};
use crate::epa::{EpaParams, SimilarityKind};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::mass::{caviarpd_estimate, estimate_at_mass, write_diagnostics_csv, CaviarResult, Distribution, MassSearchConfig};
use crate::parallel::with_threads;
use crate::partition::Partition;
use crate::psm::{display_order, render_heatmap};
use crate::search::SearchConfig;

#[derive(Debug, Parser)]
#[command(name = "caviarpd", version, about = "Cluster analysis via random partition distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a clustering by sampling EPA partitions.
    Cluster(ClusterArgs),
    /// Hierarchical clustering or PAM.
    Baseline(BaselineArgs),
    /// Run several methods and tabulate their losses against the labels.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Euclidean,
    Jaccard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimilarityArg {
    Exponential,
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Binder,
    Vi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistributionArg {
    Epa,
    Ddcrp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Pam,
    Hclust,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkageArg {
    Single,
    Complete,
    Average,
    Ward,
}

impl From<LinkageArg> for Linkage {
    fn from(l: LinkageArg) -> Self {
        match l {
            LinkageArg::Single => Linkage::Single,
            LinkageArg::Complete => Linkage::Complete,
            LinkageArg::Average => Linkage::Average,
            LinkageArg::Ward => Linkage::Ward,
        }
    }
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected kmin:kmax")?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad kmin '{a}'"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad kmax '{b}'"))?;
    if a > b {
        return Err(format!("kmin {a} exceeds kmax {b}"));
    }
    Ok((a, b))
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding the true classes; excluded from the features.
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, value_enum, default_value = "euclidean")]
    pub distance: DistanceArg,
    /// Scale numeric columns to mean 0, sd 1 before Euclidean distances.
    #[arg(long, value_enum, default_value = "on")]
    pub standardize: Toggle,
    /// Skip rows with a missing cell ("", "?" or "NA").
    #[arg(long)]
    pub drop_missing: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Record wall-clock runtimes in the report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CaviarArgs {
    /// Range of plausible cluster counts for mass selection.
    #[arg(long, value_parser = parse_range, default_value = "2:5")]
    pub range: (usize, usize),
    /// Fixed mass; skips mass selection.
    #[arg(long, value_parser = parse_positive)]
    pub mass: Option<f64>,
    #[arg(long, value_parser = parse_positive, default_value_t = EpaParams::DEFAULT_TEMPERATURE)]
    pub temperature: f64,
    #[arg(long, value_enum, default_value = "exponential")]
    pub similarity: SimilarityArg,
    /// Draws per evaluated mass (the final pass uses four times as many).
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "binder")]
    pub loss: LossArg,
    #[arg(long, value_enum, default_value = "epa")]
    pub distribution: DistributionArg,
    /// Masses evaluated between the boundary masses.
    #[arg(long, default_value_t = 9)]
    pub grid_size: usize,
    /// Independent search runs.
    #[arg(long, default_value_t = 16)]
    pub runs: usize,
    /// Heat map pixels per item (default: about 600 pixels in total).
    #[arg(long)]
    pub cell_size: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub caviar: CaviarArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "average")]
    pub linkage: LinkageArg,
    /// Exact cluster count (hierarchical only); otherwise chosen by silhouette.
    #[arg(long)]
    pub k: Option<usize>,
    /// Cluster counts tried by the silhouette rule.
    #[arg(long, value_parser = parse_range, default_value = "2:5")]
    pub krange: (usize, usize),
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub caviar: CaviarArgs,
    /// Comma-separated: caviarpd, pam, hclust-{single,complete,average,ward}.
    #[arg(long, value_delimiter = ',', default_value = "caviarpd,pam,hclust-average,hclust-complete,hclust-ward")]
    pub methods: Vec<String>,
    /// Cluster counts tried by the baselines' silhouette rule.
    #[arg(long, value_parser = parse_range, default_value = "2:5")]
    pub krange: (usize, usize),
}

/// Loaded data plus its distance matrix.
struct Prepared {
    dataset: Dataset,
    distances: DistanceMatrix,
}

fn prepare(args: &DataArgs) -> Result<Prepared> {
    let encoding = match args.distance {
        DistanceArg::Euclidean => Encoding::Numeric,
        DistanceArg::Jaccard => Encoding::Binary,
    };
    let options = IngestOptions {
        label_column: args.label.clone(),
        drop_missing: args.drop_missing,
        encoding,
    };
    let dataset = ingest(&args.input, &options)?;
    if dataset.dropped_rows > 0 {
        info!("dropped {} rows with missing cells", dataset.dropped_rows);
    }
    info!(
        "{}: {} items, {} features",
        args.input.display(),
        dataset.n_items(),
        dataset.data.n_cols()
    );
    let distances = match args.distance {
        DistanceArg::Euclidean if args.standardize == Toggle::On => {
            let s = standardize(&dataset.data)?;
            if !s.constant_columns.is_empty() {
                warn!("constant columns left unscaled: {:?}", s.constant_columns);
            }
            euclidean_distances(&s.data)?
        }
        DistanceArg::Euclidean => euclidean_distances(&dataset.data)?,
        DistanceArg::Jaccard => jaccard_distances(&dataset.data)?,
    };
    fs::create_dir_all(&args.out_dir)?;
    Ok(Prepared { dataset, distances })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_partition(dir: &Path, name: &str, p: &Partition) -> Result<()> {
    let mut out = create(dir, name)?;
    p.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn write_reports(dir: &Path, name: &str, reports: &[RunReport]) -> Result<()> {
    let mut out = create(dir, name)?;
    write_reports_csv(reports, &mut out)?;
    out.flush()?;
    Ok(())
}

fn parallelism(threads: usize) -> usize {
    if threads == 1 {
        1
    } else {
        0
    }
}

fn run_caviar(args: &CaviarArgs, data: &DataArgs, d: &DistanceMatrix) -> Result<CaviarResult> {
    let params = EpaParams {
        temperature: args.temperature,
        similarity_kind: match args.similarity {
            SimilarityArg::Exponential => SimilarityKind::Exponential,
            SimilarityArg::Reciprocal => SimilarityKind::Reciprocal,
        },
        ..EpaParams::new(args.mass.unwrap_or(1.0))
    };
    let search = SearchConfig {
        n_runs: args.runs,
        loss: match args.loss {
            LossArg::Binder => LossKind::Binder,
            LossArg::Vi => LossKind::Vi,
        },
        seed: data.seed,
        parallelism: parallelism(data.threads),
        ..SearchConfig::default()
    };
    if args.samples == 0 {
        return Err(Error::InvalidParameter("--samples must be >= 1".into()));
    }
    let distribution = match args.distribution {
        DistributionArg::Epa => Distribution::Epa,
        DistributionArg::Ddcrp => Distribution::Ddcrp,
    };
    if distribution == Distribution::Ddcrp {
        eprintln!("WARNING: the ddCRP sampler is experimental and has no mass-selection support; pass --mass");
        if args.mass.is_none() {
            return Err(Error::InvalidParameter("--distribution ddcrp requires --mass".into()));
        }
    }
    match args.mass {
        Some(mass) => {
            info!("fixed mass {mass}; {} draws", 4 * args.samples);
            estimate_at_mass(d, &params, distribution, 4 * args.samples, data.seed, &search)
        }
        None => {
            let msc = MassSearchConfig {
                k_min: args.range.0,
                k_max: args.range.1,
                grid_size: args.grid_size,
                samples_per_eval: args.samples,
                seed: data.seed,
                ..MassSearchConfig::default()
            };
            let r = caviarpd_estimate(d, &params, &msc, &search)?;
            for flag in &r.flags {
                warn!("mass selection: {flag}");
            }
            info!("selected mass {}", r.mass);
            Ok(r)
        }
    }
}

fn cluster(args: &ClusterArgs) -> Result<Vec<RunReport>> {
    let start = Instant::now();
    let prepared = prepare(&args.data)?;
    let dir = &args.data.out_dir;
    let r = run_caviar(&args.caviar, &args.data, &prepared.distances)?;
    let mut report = RunReport::new("caviarpd", &r.estimate, prepared.dataset.truth.as_ref(), args.data.seed)?;

    write_partition(dir, "partition.csv", &r.estimate)?;
    let mut out = create(dir, "psm.csv")?;
    r.psm.write_csv(&mut out)?;
    out.flush()?;
    let n = r.psm.n_items();
    let cell = args.caviar.cell_size.unwrap_or((600 / n).max(1));
    render_heatmap(&r.psm, &display_order(&r.psm, &r.estimate)?, cell, &dir.join("heatmap.pgm"))?;
    if !r.diagnostics.is_empty() {
        let mut out = create(dir, "diagnostics.csv")?;
        write_diagnostics_csv(&r.diagnostics, &mut out)?;
        out.flush()?;
    }
    if args.data.timing {
        report.runtime_s = Some(start.elapsed().as_secs_f64());
    }
    write_reports(dir, "report.csv", std::slice::from_ref(&report))?;
    info!("K = {} in {:.2}s", r.estimate.n_clusters(), start.elapsed().as_secs_f64());
    Ok(vec![report])
}

fn baseline_partition(
    d: &DistanceMatrix,
    method: BaselineMethod,
    k: Option<usize>,
    krange: (usize, usize),
    dir: &Path,
) -> Result<Partition> {
    if let BaselineMethod::Hierarchical(linkage) = method {
        let dend = hierarchical(d, linkage)?;
        let mut out = create(dir, &format!("dendrogram-{linkage}.txt"))?;
        dend.write_text(&mut out)?;
        out.flush()?;
        if let Some(k) = k {
            return cut_dendrogram(&dend, k);
        }
    } else if k.is_some() {
        warn!("--k applies to hierarchical clustering only; PAM chooses k by silhouette");
    }
    let sel = select_k_by_silhouette(d, krange.0..=krange.1, method)?;
    for (k, s) in &sel.scores {
        info!("{method}: k = {k}, average silhouette {s:.4}");
    }
    Ok(sel.partition)
}

fn baseline(args: &BaselineArgs) -> Result<Vec<RunReport>> {
    let start = Instant::now();
    let prepared = prepare(&args.data)?;
    let dir = &args.data.out_dir;
    let method = match args.method {
        MethodArg::Pam => BaselineMethod::Pam,
        MethodArg::Hclust => BaselineMethod::Hierarchical(args.linkage.into()),
    };
    let p = baseline_partition(&prepared.distances, method, args.k, args.krange, dir)?;
    let mut report = RunReport::new(method.to_string(), &p, prepared.dataset.truth.as_ref(), args.data.seed)?;
    if args.data.timing {
        report.runtime_s = Some(start.elapsed().as_secs_f64());
    }
    write_partition(dir, "partition.csv", &p)?;
    write_reports(dir, "report.csv", std::slice::from_ref(&report))?;
    Ok(vec![report])
}

fn compare(args: &CompareArgs) -> Result<Vec<RunReport>> {
    let prepared = prepare(&args.data)?;
    let truth = prepared
        .dataset
        .truth
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("compare requires a label column".into()))?;
    let dir = &args.data.out_dir;
    let mut reports = Vec::new();
    for name in &args.methods {
        let start = Instant::now();
        let name = name.trim();
        let p = match name {
            "caviarpd" => run_caviar(&args.caviar, &args.data, &prepared.distances)?.estimate,
            "pam" => baseline_partition(&prepared.distances, BaselineMethod::Pam, None, args.krange, dir)?,
            other => {
                let linkage = other
                    .strip_prefix("hclust-")
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{other}'")))?
                    .parse::<Linkage>()?;
                let method = BaselineMethod::Hierarchical(linkage);
                baseline_partition(&prepared.distances, method, None, args.krange, dir)?
            }
        };
        write_partition(dir, &format!("partition-{name}.csv"), &p)?;
        let mut report = RunReport::new(name, &p, Some(truth), args.data.seed)?;
        if args.data.timing {
            report.runtime_s = Some(start.elapsed().as_secs_f64());
        }
        reports.push(report);
    }
    write_reports(dir, "compare.csv", &reports)?;
    let table = text_table(&reports);
    fs::write(dir.join("compare.txt"), &table)?;
    print!("{table}");
    Ok(reports)
}

pub fn run(cli: &Cli) -> Result<Vec<RunReport>> {
    let threads = match &cli.command {
        Command::Cluster(a) => a.data.threads,
        Command::Baseline(a) => a.data.threads,
        Command::Compare(a) => a.data.threads,
    };
    with_threads(threads, || match &cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Baseline(a) => baseline(a),
        Command::Compare(a) => compare(a),
    })
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
