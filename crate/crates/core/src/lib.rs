//! # facerec
//!
//! Gender and age-group recognition from pre-cropped face images, as a
//! library and CLI.
//!
//! The pipeline: images are normalized to a working size, turned into
//! feature vectors (raw pixel intensities or zigzag-sampled 2D DCT
//! coefficients), projected into a PCA eigenspace fitted through the small
//! Gram-matrix route, and classified by k-nearest-neighbor majority vote or
//! by the nearest class centroid. An evaluation harness computes
//! recognition rates and confusion matrices and sweeps coefficient counts
//! against classifier rules.
//!
//! Datasets are described by a tab-separated manifest (`path`, `label`,
//! `split`); a deterministic synthetic generator provides a ready-made
//! benchmark when no real dataset is at hand.
//!
//! ```no_run
//! use facerec::{
//!     classifier::{ClassifierRule, TrainedModel},
//!     dataset::{load_manifest, Split},
//!     evaluation::evaluate,
//!     features::FeatureConfig,
//! };
//!
//! # fn main() -> facerec::Result<()> {
//! let data = load_manifest("faces/manifest.tsv".as_ref(), "faces".as_ref(), 128, 128)?;
//! let model = TrainedModel::fit(&data, FeatureConfig::dct(128, 128, 133)?, None)?;
//! let (rate, confusion) = evaluate(
//!     &model,
//!     data.samples_in(Split::Test),
//!     ClassifierRule::Knn(5),
//! )?;
//! println!("recognition rate {rate:.4}\n{}", confusion.to_csv());
//! # Ok(())
//! # }
//! ```

pub mod classifier;
pub mod dataset;
pub mod eigenspace;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod image;
pub mod linalg;
pub mod model_io;

pub use error::{Error, Result};
