//! Command-line pipeline: synth, fit-pca, obfuscate, metrics, classify,
//! attack, reid, pipeline. Every command records a `run-meta.json` with its
//! full configuration so reports can be regenerated byte-for-byte.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::attacks::{self, Scenario};
use crate::dataset::{self, ImageFormat, LabeledDataset, SplitSpec};
use crate::decomp::{self, PcaBasis};
use crate::error::{Error, Result};
use crate::image::minmax_normalize;
use crate::metrics::privacy_report;
use crate::obfuscate::{self, Method, ObfuscationMeta, ObfuscationPolicy};
use crate::probe::{self, TrainConfig};
use crate::rng::mix_seed;

#[derive(Debug, Parser, Serialize)]
#[command(name = "obfusc", version, about = "SVD/PCA image obfuscation toolkit")]
pub struct Cli {
    /// Worker threads for batch stages (results do not depend on this)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Generate a synthetic two-class PGM dataset
    Synth(SynthArgs),
    /// Fit a PCA basis on a dataset directory
    FitPca(FitPcaArgs),
    /// Obfuscate a dataset directory
    Obfuscate(ObfuscateArgs),
    /// SSIM/PSNR report between two dataset directories
    Metrics(MetricsArgs),
    /// Train and evaluate the linear utility probe
    Classify(ClassifyArgs),
    /// Simulated reconstruction attacks
    Attack(AttackArgs),
    /// Re-identification probe matching
    Reid(ReidArgs),
    /// Full experiment from a JSON config
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub per_class: u32,
    /// Square image side length
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    pub size: u32,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FitPcaArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ObfuscateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub method: Method,
    /// PCA basis file (pca / pca-sc methods)
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Component count; must match the basis
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = false)]
    pub randomize: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write min-max rescaled PGM previews (never used for metrics)
    #[arg(long, default_value_t = false)]
    pub previews: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    #[arg(long)]
    pub originals: PathBuf,
    #[arg(long)]
    pub others: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub epochs: u32,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    pub batch_size: u32,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AttackArgs {
    /// Original training data for the owner-side PCA basis
    #[arg(long)]
    pub train: PathBuf,
    /// Original test data the attacker intercepts
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated: same,shifted
    #[arg(long, value_delimiter = ',', default_value = "same,shifted")]
    pub scenario: Vec<Scenario>,
    /// Comma-separated methods
    #[arg(long, value_delimiter = ',', default_value = "svd-u,svd-vh,svd-sum,pca,pca-sc")]
    pub method: Vec<Method>,
    /// Component count for PCA methods
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds to run per (scenario, method)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub seeds: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReidArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub method: Method,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = false)]
    pub randomize: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of leading dataset images used as probes
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub probes: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// JSON pipeline configuration; CLI flags win over file values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub synthetic: SyntheticSpec,
    pub split: SplitFractions,
    pub policy: ObfuscationPolicy,
    #[serde(default = "default_true")]
    pub metrics: bool,
    #[serde(default)]
    pub attack_scenarios: Vec<Scenario>,
    #[serde(default = "TrainConfig::default")]
    pub classifier: TrainConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub per_class: usize,
    pub size: usize,
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

fn default_true() -> bool {
    true
}

fn default_noise() -> f64 {
    0.05
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        // a second invocation in-process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match &cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::FitPca(args) => cmd_fit_pca(args),
        Command::Obfuscate(args) => cmd_obfuscate(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Reid(args) => cmd_reid(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    }
}

fn write_run_meta<T: Serialize>(out: &Path, command: &str, args: &T) -> Result<()> {
    let meta = serde_json::json!({ "command": command, "config": args });
    let bytes = serde_json::to_vec_pretty(&meta)?;
    let path = if out.extension().is_some() {
        out.with_extension("meta.json")
    } else {
        out.join("run-meta.json")
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    crate::fsutil::write_atomic(&path, &bytes)
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let ds = dataset::generate_synthetic(
        args.per_class as usize,
        args.size as usize,
        args.size as usize,
        args.noise,
        args.seed,
    )?;
    dataset::save_dataset(&ds, &args.out, ImageFormat::Pgm, None)?;
    write_run_meta(&args.out, "synth", args)?;
    println!("wrote {} images to {}", ds.len(), args.out.display());
    Ok(())
}

fn cmd_fit_pca(args: &FitPcaArgs) -> Result<()> {
    let (ds, _) = dataset::load_dataset(&args.data)?;
    let basis = decomp::fit_pca(&ds, args.n)?;
    let identity: Vec<usize> = (0..basis.n).collect();
    decomp::save_pca(&basis, &identity, &args.out)?;
    write_run_meta(&args.out, "fit-pca", args)?;
    println!("fitted {}-component basis on {} images", basis.n, ds.len());
    Ok(())
}

fn load_basis_for(
    method: Method,
    basis_path: Option<&PathBuf>,
    n: Option<usize>,
) -> Result<Option<PcaBasis>> {
    if !method.is_pca() {
        if basis_path.is_some() {
            return Err(Error::Config(format!(
                "method {method} does not take --basis"
            )));
        }
        return Ok(None);
    }
    let path = basis_path.ok_or_else(|| {
        Error::Config(format!("method {method} requires --basis <PCA1 file>"))
    })?;
    let (basis, _) = decomp::load_pca(path)?;
    if let Some(n) = n {
        if n != basis.n {
            return Err(Error::Config(format!(
                "--n {n} does not match basis component count {}",
                basis.n
            )));
        }
    }
    Ok(Some(basis))
}

fn cmd_obfuscate(args: &ObfuscateArgs) -> Result<()> {
    let basis = load_basis_for(args.method, args.basis.as_ref(), args.n)?;
    let policy = ObfuscationPolicy {
        method: args.method,
        n_components: basis.as_ref().map(|b| b.n),
        randomize: args.randomize,
        master_seed: args.seed,
    };
    policy.validate(basis.as_ref())?;
    let (ds, _) = dataset::load_dataset(&args.data)?;
    let obf = obfuscate::obfuscate_batch(&policy, basis.as_ref(), &ds)?;
    let perm = obfuscate::batch_permutation(&policy, basis.as_ref());
    let meta = ObfuscationMeta::from_policy(&policy, perm.as_ref());
    dataset::save_dataset(&obf, &args.out, ImageFormat::Obf1, Some(meta))?;
    if args.previews {
        let preview_dir = args.out.join("previews");
        fs::create_dir_all(&preview_dir)?;
        for (i, img) in obf.images.iter().enumerate() {
            let rescaled = minmax_normalize(img);
            crate::pgm::save_pgm(&rescaled, &preview_dir.join(format!("img_{i:05}.pgm")))?;
        }
    }
    write_run_meta(&args.out, "obfuscate", args)?;
    println!(
        "obfuscated {} images with {} into {}",
        obf.len(),
        policy.method,
        args.out.display()
    );
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let (originals, _) = dataset::load_dataset(&args.originals)?;
    let (others, _) = dataset::load_dataset(&args.others)?;
    let report = privacy_report(&originals.images, &others.images)?;
    report.write_csv(&args.out)?;
    write_run_meta(&args.out, "metrics", args)?;
    println!(
        "mean_ssim={} mean_psnr={} over {} pairs",
        report.mean_ssim, report.mean_psnr, report.count
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ClassifyReport {
    accuracy: f64,
    confusion: Vec<Vec<usize>>,
    classes: usize,
}

fn cmd_classify(args: &ClassifyArgs) -> Result<()> {
    let (train, _) = dataset::load_dataset(&args.train)?;
    let (val, _) = dataset::load_dataset(&args.val)?;
    let (test, _) = dataset::load_dataset(&args.test)?;
    let cfg = TrainConfig {
        epochs: args.epochs as usize,
        batch_size: args.batch_size as usize,
        learning_rate: args.lr,
        l2: args.l2,
        seed: args.seed,
    };
    let clf = probe::train_classifier(&train, &val, &cfg)?;
    let (accuracy, confusion) = probe::evaluate(&clf, &test)?;
    fs::create_dir_all(&args.out)?;
    probe::save_clf(&clf, &args.out.join("model.clf1"))?;
    let report = ClassifyReport {
        accuracy,
        confusion,
        classes: clf.classes,
    };
    crate::fsutil::write_atomic(
        &args.out.join("result.json"),
        &serde_json::to_vec_pretty(&report)?,
    )?;
    write_run_meta(&args.out, "classify", args)?;
    println!("test accuracy {accuracy}");
    Ok(())
}

fn attack_csv_rows(
    scenarios: &[Scenario],
    methods: &[Method],
    n: usize,
    base_seed: u64,
    n_seeds: u32,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<String> {
    let mut csv = String::from("scenario,method,n_components,seed,mean_ssim,mean_psnr\n");
    for &method in methods {
        let basis = if method.is_pca() {
            Some(decomp::fit_pca(train, n)?)
        } else {
            None
        };
        for &scenario in scenarios {
            for k in 0..n_seeds as u64 {
                let seed = base_seed.wrapping_add(k);
                let policy = ObfuscationPolicy {
                    method,
                    n_components: basis.as_ref().map(|b| b.n),
                    randomize: false,
                    master_seed: mix_seed(seed, 17),
                };
                let report =
                    attacks::run_attack_scenario(scenario, &policy, basis.as_ref(), test, seed)?;
                let n_field = basis.as_ref().map_or(String::new(), |b| b.n.to_string());
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    scenario.as_str(),
                    method,
                    n_field,
                    seed,
                    report.mean_ssim,
                    report.mean_psnr
                ));
            }
        }
    }
    Ok(csv)
}

fn cmd_attack(args: &AttackArgs) -> Result<()> {
    let (train, _) = dataset::load_dataset(&args.train)?;
    let (test, _) = dataset::load_dataset(&args.test)?;
    let csv = attack_csv_rows(
        &args.scenario,
        &args.method,
        args.n,
        args.seed,
        args.seeds,
        &train,
        &test,
    )?;
    crate::fsutil::write_atomic(&args.out, csv.as_bytes())?;
    write_run_meta(&args.out, "attack", args)?;
    println!("wrote attack report to {}", args.out.display());
    Ok(())
}

fn cmd_reid(args: &ReidArgs) -> Result<()> {
    let (ds, _) = dataset::load_dataset(&args.data)?;
    let basis = match (&args.basis, args.method.is_pca()) {
        (Some(path), true) => {
            let (b, _) = decomp::load_pca(path)?;
            Some(b)
        }
        (None, true) => Some(decomp::fit_pca(&ds, args.n.unwrap_or(16))?),
        (Some(_), false) => {
            return Err(Error::Config(format!(
                "method {} does not take --basis",
                args.method
            )))
        }
        (None, false) => None,
    };
    let policy = ObfuscationPolicy {
        method: args.method,
        n_components: basis.as_ref().map(|b| b.n),
        randomize: args.randomize,
        master_seed: args.seed,
    };
    policy.validate(basis.as_ref())?;
    let probes = (args.probes as usize).min(ds.len());
    let obf = obfuscate::obfuscate_batch(&policy, basis.as_ref(), &ds)?;
    let mut csv = String::from("probe,exact_match,nn_rank,distance_gap\n");
    for p in 0..probes {
        let res = attacks::reidentify(
            &ds.images[p],
            p,
            &policy,
            basis.as_ref(),
            &obf,
            mix_seed(args.seed, p as u64),
        )?;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            res.probe_index, res.exact_match, res.nn_rank, res.distance_gap
        ));
    }
    crate::fsutil::write_atomic(&args.out, csv.as_bytes())?;
    write_run_meta(&args.out, "reid", args)?;
    println!("wrote re-identification report to {}", args.out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct PipelineSummary {
    original_accuracy: f64,
    obfuscated_accuracy: f64,
    mean_ssim: Option<f64>,
    mean_psnr: Option<f64>,
    attack_rows: usize,
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<()> {
    let mut cfg: PipelineConfig = serde_json::from_slice(&fs::read(&args.config)?)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    // validate everything before any work
    if cfg.synthetic.per_class == 0 || cfg.synthetic.size == 0 {
        return Err(Error::Config("synthetic per_class and size must be >= 1".into()));
    }
    let split = SplitSpec {
        train_fraction: cfg.split.train,
        val_fraction: cfg.split.val,
        test_fraction: cfg.split.test,
        seed: mix_seed(cfg.seed, 1),
    };
    split.validate()?;
    cfg.classifier.validate()?;
    if cfg.policy.method.is_pca() && cfg.policy.n_components.is_none() {
        return Err(Error::Config(
            "policy.n_components is required for PCA methods".into(),
        ));
    }
    let out = cfg.out_dir.clone();
    fs::create_dir_all(&out)?;

    let full = dataset::generate_synthetic(
        cfg.synthetic.per_class,
        cfg.synthetic.size,
        cfg.synthetic.size,
        cfg.synthetic.noise_sigma,
        cfg.seed,
    )?;
    let (train, val, test) = dataset::split_dataset(&full, &split)?;
    for (ds, name) in [(&train, "train"), (&val, "val"), (&test, "test")] {
        dataset::save_dataset(ds, &out.join("data").join(name), ImageFormat::Pgm, None)?;
    }

    let basis = if cfg.policy.method.is_pca() {
        let b = decomp::fit_pca(&train, cfg.policy.n_components.unwrap())?;
        let perm = obfuscate::batch_permutation(&cfg.policy, Some(&b))
            .expect("pca method implies a permutation");
        decomp::save_pca(&b, &perm.mapping, &out.join("basis.pca1"))?;
        Some(b)
    } else {
        None
    };
    cfg.policy.validate(basis.as_ref())?;

    let mut obf_sets = Vec::new();
    for (ds, name) in [(&train, "train"), (&val, "val"), (&test, "test")] {
        let obf = obfuscate::obfuscate_batch(&cfg.policy, basis.as_ref(), ds)?;
        let perm = obfuscate::batch_permutation(&cfg.policy, basis.as_ref());
        let meta = ObfuscationMeta::from_policy(&cfg.policy, perm.as_ref());
        dataset::save_dataset(&obf, &out.join("obf").join(name), ImageFormat::Obf1, Some(meta))?;
        obf_sets.push(obf);
    }
    let (obf_train, obf_val, obf_test) = (&obf_sets[0], &obf_sets[1], &obf_sets[2]);

    let clf_orig = probe::train_classifier(&train, &val, &cfg.classifier)?;
    let (original_accuracy, _) = probe::evaluate(&clf_orig, &test)?;
    let clf_obf = probe::train_classifier(obf_train, obf_val, &cfg.classifier)?;
    let (obfuscated_accuracy, _) = probe::evaluate(&clf_obf, obf_test)?;
    probe::save_clf(&clf_orig, &out.join("model-original.clf1"))?;
    probe::save_clf(&clf_obf, &out.join("model-obfuscated.clf1"))?;

    let (mean_ssim, mean_psnr) = if cfg.metrics {
        let report = privacy_report(&test.images, &obf_test.images)?;
        report.write_csv(&out.join("metrics.csv"))?;
        (Some(report.mean_ssim), Some(report.mean_psnr))
    } else {
        (None, None)
    };

    let mut attack_rows = 0usize;
    if !cfg.attack_scenarios.is_empty() {
        let csv = attack_csv_rows(
            &cfg.attack_scenarios,
            &[cfg.policy.method],
            cfg.policy.n_components.unwrap_or(16),
            cfg.seed,
            1,
            &train,
            &test,
        )?;
        attack_rows = csv.lines().count() - 1;
        crate::fsutil::write_atomic(&out.join("attack.csv"), csv.as_bytes())?;
    }

    let summary = PipelineSummary {
        original_accuracy,
        obfuscated_accuracy,
        mean_ssim,
        mean_psnr,
        attack_rows,
    };
    crate::fsutil::write_atomic(
        &out.join("summary.json"),
        &serde_json::to_vec_pretty(&summary)?,
    )?;
    write_run_meta(&out, "pipeline", &cfg)?;
    println!(
        "pipeline done: original acc {original_accuracy}, obfuscated acc {obfuscated_accuracy}"
    );
    Ok(())
}
