//! `djf` subcommands: dataset generation, training, detection and evaluation.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use djf_core::localize::{detect, evaluate_grid};
use djf_core::msd::{self, MsdConfig, SplitSamples, NETWORK_NAMES};
use djf_core::nn::{NetworkSpec, TrainConfig};
use djf_core::sim::dataset::{
    build_dataset, images_from_csv, load_set, manifest_file, DEFAULT_QF_VALUES, DEFAULT_SCALES, SPECIAL_SET,
};
use djf_core::sim::{synthesize_corpus, DatasetConfig, QfPair, RawImage, Split};

pub const THREADS_ENV: &str = "DJF_THREADS";

#[derive(Parser, Debug)]
#[command(name = "djf", version, about = "Double JPEG compression tamper detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tamper a corpus and write block manifests and feature files.
    Gen(GenArgs),
    /// Train the four networks and write a composite model.
    Train(TrainArgs),
    /// Produce a tamper probability map for one JPEG.
    Detect(DetectArgs),
    /// Detect and score every image listed in an images file.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Directory of binary PGM images.
    #[arg(long, conflicts_with = "synthesize", required_unless_present = "synthesize")]
    pub corpus: Option<PathBuf>,
    /// Use N procedurally generated images instead of a corpus.
    #[arg(long, value_name = "N")]
    pub synthesize: Option<usize>,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 384)]
    pub height: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Quality factors; every ordered pair is generated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_QF_VALUES)]
    pub qf_grid: Vec<u8>,
    /// Explicit (qf1,qf2) pairs such as 90-50; overrides --qf-grid.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub pairs: Vec<QfPair>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SCALES)]
    pub scales: Vec<usize>,
    /// Also build the special network's set (pairs with qf1 > qf2).
    #[arg(long)]
    pub special: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_pair(s: &str) -> std::result::Result<QfPair, String> {
    let (a, b) = s.split_once('-').ok_or_else(|| format!("expected QF1-QF2, got {s:?}"))?;
    let q = |v: &str| v.trim().parse::<u8>().map_err(|_| format!("bad quality factor {v:?}"));
    Ok(QfPair::new(q(a)?, q(b)?))
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset directory written by `gen`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub m64: Option<PathBuf>,
    #[arg(long)]
    pub m128: Option<PathBuf>,
    #[arg(long)]
    pub m256: Option<PathBuf>,
    #[arg(long = "special-manifest")]
    pub special: Option<PathBuf>,
    /// Composite model output.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch CSV log; defaults to the model path with `.log.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0005)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Routing threshold.
    #[arg(long, default_value_t = msd::DEFAULT_THRESHOLD)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = msd::DEFAULT_WEIGHTS)]
    pub weights: Vec<f64>,
    /// Feature maps per convolution.
    #[arg(long, default_value_t = 100)]
    pub maps: usize,
    /// Units in the two hidden dense layers.
    #[arg(long, default_value_t = 1000)]
    pub hidden: usize,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    /// Prefix for map.pgm, map.f32, mask.pgm and route.pgm.
    #[arg(long)]
    pub out: String,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Images file written by `gen`.
    #[arg(long)]
    pub images: PathBuf,
    /// Report CSV; per-qf2 averages go next to it with a `_qf2` suffix.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Restrict to one split (train or val).
    #[arg(long)]
    pub split: Option<Split>,
}

/// Sizes the global worker pool from `DJF_THREADS` if set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a number"))?;
        if n == 0 {
            bail!("{THREADS_ENV} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Detect(a) => cmd_detect(&a),
        Command::Eval(a) => cmd_eval(&a),
    }
}

fn read_corpus(dir: &Path) -> Result<Vec<RawImage>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading corpus {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .pgm images in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| RawImage::read_pgm(p).with_context(|| format!("reading {}", p.display())))
        .collect()
}

pub fn cmd_gen(a: &GenArgs) -> Result<()> {
    let corpus = match (&a.corpus, a.synthesize) {
        (_, Some(n)) => synthesize_corpus(n, a.seed, a.width, a.height),
        (Some(dir), None) => read_corpus(dir)?,
        (None, None) => bail!("either --corpus or --synthesize is required"),
    };
    let pairs = if a.pairs.is_empty() { QfPair::grid(&a.qf_grid) } else { a.pairs.clone() };
    let cfg = DatasetConfig {
        pairs,
        scales: a.scales.clone(),
        special: a.special,
        seed: a.seed,
        ..DatasetConfig::default()
    };
    println!(
        "config: images={} pairs={} scales={:?} special={} seed={} out={}",
        corpus.len(),
        cfg.pairs.len(),
        cfg.scales,
        cfg.special,
        cfg.seed,
        a.out.display()
    );
    let ds = build_dataset(&corpus, &cfg, Some(&a.out))?;
    for (name, set) in &ds.sets {
        let tampered = set.iter().filter(|s| s.label == djf_core::sim::Label::Tampered).count();
        println!("set {name}: {} blocks ({tampered} tampered)", set.len());
    }
    println!("wrote {} tampered images to {}", ds.images.len(), a.out.display());
    Ok(())
}

fn manifest_paths(a: &TrainArgs) -> Result<[PathBuf; 4]> {
    let explicit = [&a.m64, &a.m128, &a.m256, &a.special];
    let mut out = Vec::with_capacity(4);
    for (name, given) in NETWORK_NAMES.iter().zip(explicit) {
        let set = if *name == "special" { SPECIAL_SET } else { name };
        let path = match (given, &a.data) {
            (Some(p), _) => p.clone(),
            (None, Some(d)) => d.join(manifest_file(set)),
            (None, None) => bail!("no manifest for network {name}: pass --data or --m{name}"),
        };
        if !path.exists() {
            bail!("missing manifest {}", path.display());
        }
        out.push(path);
    }
    Ok(out.try_into().expect("four paths"))
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let cfg = MsdConfig {
        train: TrainConfig {
            learning_rate: a.lr,
            batch_size: a.batch,
            momentum: a.momentum,
            epochs: a.epochs,
            seed: a.seed,
        },
        spec: NetworkSpec::reduced(a.maps, a.hidden),
        weights: [a.weights[0], a.weights[1], a.weights[2]],
        threshold: a.t,
    };
    println!(
        "config: lr={} batch={} momentum={} epochs={} seed={} t={} weights={},{},{} maps={} hidden={}",
        a.lr, a.batch, a.momentum, a.epochs, a.seed, a.t, a.weights[0], a.weights[1], a.weights[2], a.maps, a.hidden
    );
    let paths = manifest_paths(a)?;
    let mut sets = Vec::with_capacity(4);
    for p in &paths {
        let (manifest, rows) = load_set(p).with_context(|| format!("loading {}", p.display()))?;
        if manifest.is_empty() {
            bail!("manifest {} has no records", p.display());
        }
        sets.push(SplitSamples::<f32>::from_manifest(&manifest, &rows)?);
    }
    let mut log = String::from("network,epoch,train_loss,train_acc,val_loss,val_acc\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
    let (model, _) = msd::train_msd([&sets[0], &sets[1], &sets[2], &sets[3]], &cfg, |name, s| {
        let line = format!(
            "{name},{},{:.6},{:.6},{},{}",
            s.epoch,
            s.train_loss,
            s.train_acc,
            opt(s.val_loss),
            opt(s.val_acc)
        );
        println!("{line}");
        log.push_str(&line);
        log.push('\n');
    })?;
    msd::save_msd(&model, &a.out)?;
    let log_path = a.log.clone().unwrap_or_else(|| a.out.with_extension("log.csv"));
    fs::write(&log_path, log).with_context(|| format!("writing {}", log_path.display()))?;
    println!("wrote model {} and log {}", a.out.display(), log_path.display());
    Ok(())
}

pub fn cmd_detect(a: &DetectArgs) -> Result<()> {
    let model: djf_core::MsdModel = msd::load_msd(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let bytes = fs::read(&a.image).with_context(|| format!("reading {}", a.image.display()))?;
    let det = detect(&model, &bytes)?;
    if let Some(parent) = Path::new(&a.out).parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    det.write(&a.out, a.threshold)?;
    println!(
        "{} threshold={} t={}",
        det.summary(),
        a.threshold,
        model.threshold()
    );
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let model: djf_core::MsdModel = msd::load_msd(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let text = fs::read_to_string(&a.images).with_context(|| format!("reading {}", a.images.display()))?;
    let (mut records, errors) = images_from_csv(&text);
    for e in &errors {
        eprintln!("skipping record: {e}");
    }
    if let Some(split) = a.split {
        records.retain(|r| r.split == split);
    }
    if records.is_empty() {
        bail!("no records");
    }
    let base = a.images.parent().unwrap_or(Path::new("."));
    println!(
        "config: threshold={} t={} records={}",
        a.threshold,
        model.threshold(),
        records.len()
    );
    let report = evaluate_grid(&model, &records, base, a.threshold)?;
    for (path, e) in &report.errors {
        eprintln!("{path}: {e}");
    }
    if report.cells.is_empty() {
        bail!("no records could be evaluated");
    }
    fs::write(&a.out, report.to_csv()).with_context(|| format!("writing {}", a.out.display()))?;
    let qf2_path = qf2_path(&a.out);
    fs::write(&qf2_path, report.qf2_csv()).with_context(|| format!("writing {}", qf2_path.display()))?;
    print!("{}", report.to_csv());
    for c in &report.cells {
        let tampered_f1: Option<f64> = c.counts.swapped().f1();
        println!(
            "qf1={} qf2={} images={} f1(tampered positive)={}",
            c.pair.qf1,
            c.pair.qf2,
            c.images,
            tampered_f1.map_or("undefined".into(), |v| format!("{v:.6}"))
        );
    }
    Ok(())
}

/// `report.csv` -> `report_qf2.csv`.
pub fn qf2_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}_qf2.csv"))
}
