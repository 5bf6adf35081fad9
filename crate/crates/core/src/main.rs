//! Command-line front end: train, predict, evaluate, sweep, eigenface
//! export, and synthetic dataset generation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use facerec::classifier::{ClassifierRule, TrainedModel};
use facerec::dataset::{load_manifest, write_synthetic, Split, SyntheticSpec};
use facerec::eigenspace::{mean_image, reconstruct_eigenface};
use facerec::error::{Error, Result};
use facerec::evaluation::{evaluate, sweep_dct, sweep_raw};
use facerec::features::FeatureConfig;
use facerec::image::{load_image, save_pgm};
use facerec::model_io::{load_model, save_model};

#[derive(Parser)]
#[command(name = "facerec", version, about = "Face image gender/age-group recognition pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FeatureArg {
    Raw,
    Dct,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a labeled manifest and write it to disk
    Train {
        /// Manifest file: one "path<TAB>label<TAB>train|test" per line
        manifest: PathBuf,
        /// Directory image paths are relative to (default: the manifest's)
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "raw")]
        feature: FeatureArg,
        /// DCT coefficient count (required with --feature dct)
        #[arg(long, required_if_eq("feature", "dct"))]
        coeffs: Option<usize>,
        /// Working image size as WxH
        #[arg(long, default_value = "128x128")]
        size: String,
        /// Cap on retained principal components (default: all nonzero)
        #[arg(long)]
        components: Option<usize>,
        /// Output model path
        #[arg(long, default_value = "model.eigc")]
        out: PathBuf,
    },
    /// Classify a single image with a trained model
    Predict {
        model: PathBuf,
        image: PathBuf,
        /// knn<k> or centroid (default: knn7 for 4-class models, else knn5)
        #[arg(long)]
        rule: Option<String>,
    },
    /// Score a model against a manifest split and write the confusion matrix
    Evaluate {
        model: PathBuf,
        manifest: PathBuf,
        #[arg(long)]
        root: Option<PathBuf>,
        /// knn<k> or centroid (default: knn7 for 4-class models, else knn5)
        #[arg(long)]
        rule: Option<String>,
        /// Which split of the manifest to score
        #[arg(long, default_value = "test")]
        split: String,
        /// Confusion matrix CSV output path
        #[arg(long, default_value = "confusion.csv")]
        out: PathBuf,
    },
    /// Sweep coefficient counts x classifier rules and write a rate CSV
    Sweep {
        manifest: PathBuf,
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "dct")]
        feature: FeatureArg,
        /// Coefficient counts: a single N or an inclusive lo..hi range
        #[arg(long, required_if_eq("feature", "dct"))]
        coeffs: Option<String>,
        /// Comma-separated k values for the k-NN rules
        #[arg(long, default_value = "1,3,5,7,9")]
        k: String,
        /// Also score the cluster-centroid rule
        #[arg(long)]
        centroid: bool,
        /// Working image size as WxH
        #[arg(long, default_value = "128x128")]
        size: String,
        /// Parallel worker count (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the leading eigenfaces of a raw-pixel model as PGM images
    ExportEigenfaces {
        model: PathBuf,
        /// How many eigenfaces to export
        #[arg(long, default_value_t = 6)]
        count: usize,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic labeled dataset (PGM images plus manifest)
    Synth {
        #[arg(long, default_value_t = 2)]
        classes: usize,
        /// Training images per class
        #[arg(long, default_value_t = 100)]
        train: usize,
        /// Test images per class
        #[arg(long, default_value_t = 50)]
        test: usize,
        /// Image size as WxH
        #[arg(long, default_value = "64x64")]
        size: String,
        /// Per-pixel noise amplitude (intensity steps)
        #[arg(long, default_value_t = 20)]
        noise: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let err = || Error::InvalidArgument(format!("size {s:?} is not WxH"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(err)?;
    let w: usize = w.parse().map_err(|_| err())?;
    let h: usize = h.parse().map_err(|_| err())?;
    if w == 0 || h == 0 {
        return Err(err());
    }
    Ok((w, h))
}

fn parse_k_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| Error::InvalidArgument(format!("bad k value {t:?}")))
        })
        .collect()
}

/// `"N"` or inclusive `"lo..hi"`.
fn parse_coeff_range(s: &str) -> Result<Vec<usize>> {
    let err = || Error::InvalidArgument(format!("coeffs {s:?} is not N or lo..hi"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.parse().map_err(|_| err())?;
        let hi: usize = hi.parse().map_err(|_| err())?;
        if lo == 0 || hi < lo {
            return Err(err());
        }
        Ok((lo..=hi).collect())
    } else {
        let n: usize = s.parse().map_err(|_| err())?;
        if n == 0 {
            return Err(err());
        }
        Ok(vec![n])
    }
}

fn manifest_root(manifest: &Path, root: &Option<PathBuf>) -> PathBuf {
    root.clone()
        .unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).to_path_buf())
}

fn default_rule(n_classes: usize) -> ClassifierRule {
    if n_classes == 4 {
        ClassifierRule::Knn(7)
    } else {
        ClassifierRule::Knn(5)
    }
}

fn resolve_rule(flag: &Option<String>, n_classes: usize) -> Result<ClassifierRule> {
    match flag {
        Some(s) => ClassifierRule::parse(s),
        None => Ok(default_rule(n_classes)),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train {
            manifest,
            root,
            feature,
            coeffs,
            size,
            components,
            out,
        } => {
            let (w, h) = parse_size(&size)?;
            let root = manifest_root(&manifest, &root);
            let dataset = load_manifest(&manifest, &root, w, h)?;
            let config = match feature {
                FeatureArg::Raw => FeatureConfig::raw(w, h)?,
                FeatureArg::Dct => FeatureConfig::dct(w, h, coeffs.unwrap())?,
            };
            let model = TrainedModel::fit(&dataset, config, components)?;
            let counts = dataset.class_counts(Split::Train);
            for (name, count) in model.class_names.iter().zip(counts) {
                println!("class {name}: {count} training samples");
            }
            println!("retained components: {}", model.eigenspace.n_components());
            save_model(&model, &out)?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }

        Command::Predict { model, image, rule } => {
            let model = load_model(&model)?;
            let rule = resolve_rule(&rule, model.class_names.len())?;
            let img = load_image(&image)?;
            let (label, neighbors) = model.classify_with_neighbors(&img, rule)?;
            println!("label: {}", model.class_names[label]);
            for (i, n) in neighbors.iter().enumerate() {
                println!(
                    "neighbor {}: {} distance={:.6} train_index={}",
                    i + 1,
                    model.class_names[n.label],
                    n.distance,
                    n.train_index
                );
            }
            Ok(())
        }

        Command::Evaluate {
            model,
            manifest,
            root,
            rule,
            split,
            out,
        } => {
            let model = load_model(&model)?;
            let rule = resolve_rule(&rule, model.class_names.len())?;
            let split = Split::parse(&split)
                .ok_or_else(|| Error::InvalidArgument(format!("split {split:?}")))?;
            let root = manifest_root(&manifest, &root);
            let dataset = load_manifest(
                &manifest,
                &root,
                model.feature_config.image_w,
                model.feature_config.image_h,
            )?;
            if dataset.class_names() != model.class_names.as_slice() {
                return Err(Error::UnknownLabel {
                    label: format!(
                        "manifest classes {:?} do not match model classes {:?}",
                        dataset.class_names(),
                        model.class_names
                    ),
                });
            }
            let (rate, cm) = evaluate(&model, dataset.samples_in(split), rule)?;
            fs::write(&out, cm.to_csv()).map_err(|e| Error::io(&out, e))?;
            println!("rate: {rate:.4}");
            eprintln!("wrote {}", out.display());
            Ok(())
        }

        Command::Sweep {
            manifest,
            root,
            feature,
            coeffs,
            k,
            centroid,
            size,
            jobs,
            out,
        } => {
            let (w, h) = parse_size(&size)?;
            let root = manifest_root(&manifest, &root);
            let dataset = load_manifest(&manifest, &root, w, h)?;
            let k_values = parse_k_list(&k)?;
            let sweep = match feature {
                FeatureArg::Dct => {
                    let counts = parse_coeff_range(coeffs.as_deref().unwrap())?;
                    sweep_dct(&dataset, &counts, &k_values, centroid, jobs)?
                }
                FeatureArg::Raw => sweep_raw(&dataset, &k_values, centroid)?,
            };
            fs::write(&out, sweep.to_csv()).map_err(|e| Error::io(&out, e))?;
            let (n, rule, rate) = sweep.best();
            println!("best: n_coeffs={n} rule={rule} rate={rate:.6}");
            eprintln!("wrote {}", out.display());
            Ok(())
        }

        Command::ExportEigenfaces { model, count, out } => {
            let model = load_model(&model)?;
            let retained = model.eigenspace.n_components();
            if count > retained {
                return Err(Error::IndexOutOfRange {
                    index: count.saturating_sub(1),
                    count: retained,
                });
            }
            let (w, h) = (model.feature_config.image_w, model.feature_config.image_h);
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let mean_path = out.join("mean.pgm");
            save_pgm(&mean_image(&model.eigenspace, w, h)?, &mean_path)?;
            for index in 0..count {
                let face = reconstruct_eigenface(&model.eigenspace, index, w, h)?;
                save_pgm(&face, &out.join(format!("eigenface_{index}.pgm")))?;
            }
            eprintln!("wrote mean.pgm and {count} eigenfaces to {}", out.display());
            Ok(())
        }

        Command::Synth {
            classes,
            train,
            test,
            size,
            noise,
            seed,
            out,
        } => {
            let (width, height) = parse_size(&size)?;
            let spec = SyntheticSpec {
                classes,
                train_per_class: train,
                test_per_class: test,
                width,
                height,
                noise,
            };
            let manifest = write_synthetic(&spec, seed, &out)?;
            println!("{}", manifest.display());
            Ok(())
        }
    }
}
