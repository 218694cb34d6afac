use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stipbow_core::error::{Error, Stage};
use stipbow_core::metrics::{sweep, SweepAxis};
use stipbow_core::pipeline::{self, ExperimentConfig, WorkDir};
use stipbow_core::video_io::{
    load_source, write_pgm_frames, DatasetManifest, ManifestEntry, Split, SyntheticKind,
};

#[derive(Parser)]
#[command(name = "stipbow", version, about = "Bag-of-words action recognition from spatio-temporal interest points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Dataset manifest (CSV: sequence_id,path,label,subject,split).
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for checkpoints and reports.
    #[arg(long)]
    out: PathBuf,
    /// Base seed; defaults to the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Detect interest points for every sequence.
    Detect(Common),
    /// Compute descriptors for every sequence.
    Describe(Common),
    /// Fit PCA on training descriptors.
    Pca(Common),
    /// Fit the k-means codebook on training descriptors.
    Codebook(Common),
    /// Encode every sequence as a word histogram.
    Encode(Common),
    /// Train the classifier on training histograms.
    Train(Common),
    /// Predict labels for test histograms.
    Predict(Common),
    /// Write confusion.csv and accuracy.json from predictions.
    Eval(Common),
    /// Run the whole pipeline for the configured number of runs.
    Run(Common),
    /// Average runs over a range of values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// n_cuboids, codebook_k, partitions, distances, angular_bins or radial_bins.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
    /// Write a manifest of synthetic oscillating-blob sequences.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        train_per_class: usize,
        #[arg(long, default_value_t = 4)]
        test_per_class: usize,
        #[arg(long, default_value_t = 48)]
        width: usize,
        #[arg(long, default_value_t = 48)]
        height: usize,
        #[arg(long, default_value_t = 40)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write PGM frame directories instead of synthetic locators.
        #[arg(long)]
        materialize: bool,
    },
}

fn stage_of(cmd: &Command) -> Stage {
    match cmd {
        Command::Detect(_) => Stage::Detect,
        Command::Describe(_) => Stage::Describe,
        Command::Pca(_) => Stage::Pca,
        Command::Codebook(_) => Stage::Codebook,
        Command::Encode(_) => Stage::Encode,
        Command::Train(_) => Stage::Train,
        Command::Predict(_) => Stage::Predict,
        Command::Eval(_) | Command::Run(_) | Command::Sweep { .. } => Stage::Evaluate,
        Command::Synth { .. } => Stage::Load,
    }
}

struct Loaded {
    config: ExperimentConfig,
    manifest: DatasetManifest,
    work: WorkDir,
    seed: u64,
}

fn load(common: &Common) -> Result<Loaded, Error> {
    let config = ExperimentConfig::load(&common.config).map_err(|e| e.at(Stage::Load))?;
    let manifest = DatasetManifest::load(&common.manifest).map_err(|e| e.at(Stage::Load))?;
    let work = WorkDir::create(&common.out).map_err(|e| e.at(Stage::Load))?;
    let seed = common.seed.unwrap_or(config.seed);
    Ok(Loaded { config, manifest, work, seed })
}

fn synth(
    out: &Path,
    per_class: [usize; 2],
    dims: (usize, usize, usize),
    seed: u64,
    materialize: bool,
) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io { path: out.into(), source: e })?;
    let classes = [(SyntheticKind::OscillatingBlobH, "blob_h"), (SyntheticKind::OscillatingBlobV, "blob_v")];
    let mut entries = Vec::new();
    let mut subject = 0u32;
    for (split, count) in [(Split::Train, per_class[0]), (Split::Test, per_class[1])] {
        for i in 0..count {
            subject += 1;
            for (kind, label) in classes {
                let id = format!("{label}_{}_{i:03}", if split == Split::Train { "train" } else { "test" });
                let item_seed = seed.wrapping_mul(1_000_003).wrapping_add(u64::from(subject));
                let uri = format!("synthetic:{}:{}x{}x{}:{item_seed}", kind.name(), dims.0, dims.1, dims.2);
                let path = if materialize {
                    let volume = load_source(&uri, usize::MAX)?;
                    write_pgm_frames(&volume, &out.join(&id))?;
                    id.clone()
                } else {
                    uri
                };
                entries.push(ManifestEntry { sequence_id: id, path, label: label.into(), subject, split });
            }
        }
    }
    let manifest = DatasetManifest::new(entries)?;
    let path = out.join("manifest.csv");
    manifest.save(&path)?;
    Ok(path)
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Detect(c) => {
            let l = load(&c)?;
            pipeline::stage_detect(&l.config, &l.manifest, &l.work)
        }
        Command::Describe(c) => {
            let l = load(&c)?;
            pipeline::stage_describe(&l.config, &l.manifest, &l.work)
        }
        Command::Pca(c) => {
            let l = load(&c)?;
            pipeline::stage_pca(&l.config, &l.manifest, &l.work)
        }
        Command::Codebook(c) => {
            let l = load(&c)?;
            pipeline::stage_codebook(&l.config, &l.manifest, &l.work, l.seed)
        }
        Command::Encode(c) => {
            let l = load(&c)?;
            pipeline::stage_encode(&l.config, &l.manifest, &l.work)
        }
        Command::Train(c) => {
            let l = load(&c)?;
            pipeline::stage_train(&l.config, &l.work, l.seed)
        }
        Command::Predict(c) => {
            let l = load(&c)?;
            pipeline::stage_predict(&l.work)
        }
        Command::Eval(c) => {
            let l = load(&c)?;
            let acc = pipeline::stage_eval(&l.manifest, &l.work)?;
            println!("accuracy {acc:.4}");
            Ok(())
        }
        Command::Run(c) => {
            let l = load(&c)?;
            let s = pipeline::stage_run(&l.config, &l.manifest, &l.work, l.seed)?;
            println!("mean accuracy {:.4} (std {:.4}, {} runs)", s.mean, s.std, s.per_run.len());
            Ok(())
        }
        Command::Sweep { common, axis, values } => {
            let l = load(&common)?;
            let axis: SweepAxis = axis.parse()?;
            let result = sweep(&l.config, axis, &values, &l.manifest, l.seed)?;
            result.write_csv(&l.work.file("sweep.csv"))?;
            for p in &result.points {
                println!("{}={} mean {:.4} std {:.4}", axis.name(), p.value, p.mean_accuracy, p.std);
            }
            Ok(())
        }
        Command::Synth { out, train_per_class, test_per_class, width, height, frames, seed, materialize } => {
            let path = synth(&out, [train_per_class, test_per_class], (width, height, frames), seed, materialize)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stage = stage_of(&cli.command);
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.at(stage));
            ExitCode::FAILURE
        }
    }
}
