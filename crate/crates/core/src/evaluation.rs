//! Recognition rates, confusion matrices, and the parameter sweeps over
//! coefficient counts and classifier rules.

use rayon::prelude::*;

use crate::classifier::{
    centroid_classify, knn_classify, ClassifierRule, TrainedModel,
};
use crate::dataset::{LabeledDataset, Sample, Split};
use crate::eigenspace::{project, Eigenspace};
use crate::error::{Error, Result};
use crate::features::{
    raw_pixel_vector, zigzag_coefficients, FeatureConfig, FeatureKind, FeatureVector,
};

/// Counts of (true class, predicted class) pairs; rows are truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn trace(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, row)| row[i])
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// CSV form: header row of predicted class names, one count row per
    /// true class.
    pub fn to_csv(&self) -> String {
        let mut out = self.class_names.join(",");
        out.push('\n');
        for row in &self.counts {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Fraction of positions where `predicted` and `truth` agree.
pub fn recognition_rate(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let correct = predicted
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(correct as f64 / predicted.len() as f64)
}

/// Tallies (truth, prediction) pairs into a C x C matrix.
pub fn confusion_matrix(
    predicted: &[usize],
    truth: &[usize],
    class_names: &[String],
) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let c = class_names.len();
    let mut counts = vec![vec![0u64; c]; c];
    for (&p, &t) in predicted.iter().zip(truth) {
        if t >= c {
            return Err(Error::UnknownLabel {
                label: format!("true class id {t}"),
            });
        }
        if p >= c {
            return Err(Error::UnknownLabel {
                label: format!("predicted class id {p}"),
            });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        class_names: class_names.to_vec(),
    })
}

/// Recognition rate implied by a confusion matrix: trace over total.
pub fn rate_from_confusion(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(cm.trace() as f64 / total as f64)
}

/// Classifies already-projected feature vectors and scores them. Shared by
/// [`evaluate`] and the sweep cells so both report identical numbers.
fn evaluate_features(
    model: &TrainedModel,
    features: &[FeatureVector],
    truth: &[usize],
    rule: ClassifierRule,
) -> Result<(f64, ConfusionMatrix)> {
    if features.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut predicted = Vec::with_capacity(features.len());
    for (index, f) in features.iter().enumerate() {
        let coords = project(&model.eigenspace, &f.values)
            .map_err(|e| Error::SampleError {
                index,
                source: Box::new(e),
            })?;
        let label = match rule {
            ClassifierRule::Knn(k) => {
                knn_classify(&model.train_points, &coords, k)
                    .map(|(label, _)| label)
            }
            ClassifierRule::Centroid => centroid_classify(&model.centroids, &coords),
        }
        .map_err(|e| Error::SampleError {
            index,
            source: Box::new(e),
        })?;
        predicted.push(label);
    }
    let cm = confusion_matrix(&predicted, truth, &model.class_names)?;
    let rate = rate_from_confusion(&cm)?;
    Ok((rate, cm))
}

/// Classifies every sample and returns the recognition rate together with
/// the confusion matrix; the rate always equals the matrix's trace over its
/// total.
pub fn evaluate<'a>(
    model: &TrainedModel,
    samples: impl IntoIterator<Item = &'a Sample>,
    rule: ClassifierRule,
) -> Result<(f64, ConfusionMatrix)> {
    let samples: Vec<&Sample> = samples.into_iter().collect();
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let features = samples
        .iter()
        .enumerate()
        .map(|(index, s)| {
            model
                .feature_config
                .extract(&s.image)
                .map_err(|e| Error::SampleError {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<usize> = samples.iter().map(|s| s.class_id).collect();
    evaluate_features(model, &features, &truth, rule)
}

/// A grid of recognition rates indexed by coefficient count and rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub feature: FeatureKind,
    pub coeff_counts: Vec<usize>,
    pub rules: Vec<ClassifierRule>,
    /// `rates[i][j]` is the rate at `coeff_counts[i]` under `rules[j]`.
    pub rates: Vec<Vec<f64>>,
}

impl SweepResult {
    /// The best cell in deterministic (coefficient, rule) scan order.
    pub fn best(&self) -> (usize, ClassifierRule, f64) {
        let mut best = (self.coeff_counts[0], self.rules[0], f64::NEG_INFINITY);
        for (i, row) in self.rates.iter().enumerate() {
            for (j, &rate) in row.iter().enumerate() {
                if rate > best.2 {
                    best = (self.coeff_counts[i], self.rules[j], rate);
                }
            }
        }
        best
    }

    /// CSV form: `n_coeffs,rule,rate` with rates at 6 decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_coeffs,rule,rate\n");
        for (i, &n) in self.coeff_counts.iter().enumerate() {
            for (j, rule) in self.rules.iter().enumerate() {
                out.push_str(&format!("{n},{rule},{:.6}\n", self.rates[i][j]));
            }
        }
        out
    }
}

/// Builds the rule list for a sweep: one k-NN rule per k, plus the cluster
/// centroid when requested.
pub fn rules_from(k_values: &[usize], include_centroid: bool) -> Vec<ClassifierRule> {
    let mut rules: Vec<ClassifierRule> =
        k_values.iter().map(|&k| ClassifierRule::Knn(k)).collect();
    if include_centroid {
        rules.push(ClassifierRule::Centroid);
    }
    rules
}

fn uniform_image_size(samples: &[&Sample]) -> Result<(usize, usize)> {
    let first = samples.first().ok_or(Error::EmptyInput)?;
    let (w, h) = (first.image.width(), first.image.height());
    for s in samples {
        if s.image.width() != w || s.image.height() != h {
            return Err(Error::ImageSizeMismatch {
                expected_w: w,
                expected_h: h,
                actual_w: s.image.width(),
                actual_h: s.image.height(),
            });
        }
    }
    Ok((w, h))
}

fn cell_error(n_coeffs: usize, rule: Option<ClassifierRule>, e: Error) -> Error {
    Error::SweepCell {
        n_coeffs,
        rule: rule.map_or_else(|| "-".into(), |r| r.to_string()),
        source: Box::new(e),
    }
}

/// Shared, read-only inputs for every sweep cell.
struct SweepData<'a> {
    rules: &'a [ClassifierRule],
    train_coeffs: Vec<Vec<f64>>,
    train_labels: Vec<usize>,
    test_coeffs: Vec<Vec<f64>>,
    test_labels: Vec<usize>,
    class_names: &'a [String],
    width: usize,
    height: usize,
}

/// Runs one sweep cell: fit PCA and centroids on prefix features of length
/// `n`, then score every rule on the test prefixes.
fn dct_cell(n: usize, data: &SweepData) -> Result<Vec<f64>> {
    let prefix = |full: &[Vec<f64>]| -> Vec<FeatureVector> {
        full.iter()
            .map(|c| FeatureVector {
                values: c[..n].to_vec(),
                kind: FeatureKind::Dct,
            })
            .collect()
    };
    let train_feats = prefix(&data.train_coeffs);
    let test_feats = prefix(&data.test_coeffs);

    let config =
        FeatureConfig::dct(data.width, data.height, n).map_err(|e| cell_error(n, None, e))?;
    let eigenspace =
        Eigenspace::fit(&train_feats, None).map_err(|e| cell_error(n, None, e))?;
    let model = TrainedModel::from_projected_features(
        eigenspace,
        &train_feats,
        &data.train_labels,
        config,
        data.class_names.to_vec(),
    )
    .map_err(|e| cell_error(n, None, e))?;

    data.rules
        .iter()
        .map(|&rule| {
            evaluate_features(&model, &test_feats, &data.test_labels, rule)
                .map(|(rate, _)| rate)
                .map_err(|e| cell_error(n, Some(rule), e))
        })
        .collect()
}

/// Sweeps DCT coefficient counts against every rule: per count, features
/// are re-extracted and the eigenspace and centroids re-fitted, then each
/// rule is scored on the test split. Cells run in parallel (bounded by
/// `jobs`) and are assembled in deterministic order.
pub fn sweep_dct(
    dataset: &LabeledDataset,
    coeff_counts: &[usize],
    k_values: &[usize],
    include_centroid: bool,
    jobs: Option<usize>,
) -> Result<SweepResult> {
    let rules = rules_from(k_values, include_centroid);
    if coeff_counts.is_empty() || rules.is_empty() {
        return Err(Error::EmptyInput);
    }
    let train = dataset.samples_in(Split::Train);
    let test = dataset.samples_in(Split::Test);
    let (w, h) = uniform_image_size(&train)?;
    uniform_image_size(&test)?;
    let max_n = *coeff_counts.iter().max().unwrap();
    if max_n > w * h {
        return Err(Error::CoefficientCountOutOfRange {
            n: max_n,
            max: w * h,
        });
    }

    // The zigzag prefix property makes the full coefficient vector a shared
    // precomputation: its first n entries are exactly dct_features(img, n).
    let full = |samples: &[&Sample]| -> Vec<Vec<f64>> {
        samples
            .iter()
            .map(|s| zigzag_coefficients(&s.image))
            .collect()
    };
    let data = SweepData {
        rules: &rules,
        train_coeffs: full(&train),
        train_labels: train.iter().map(|s| s.class_id).collect(),
        test_coeffs: full(&test),
        test_labels: test.iter().map(|s| s.class_id).collect(),
        class_names: dataset.class_names(),
        width: w,
        height: h,
    };

    let run = || -> Result<Vec<Vec<f64>>> {
        coeff_counts
            .par_iter()
            .map(|&n| dct_cell(n, &data))
            .collect()
    };
    let rates = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::ModelFormat(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }?;

    Ok(SweepResult {
        feature: FeatureKind::Dct,
        coeff_counts: coeff_counts.to_vec(),
        rules,
        rates,
    })
}

/// The raw-pixel counterpart of [`sweep_dct`]: a single implicit feature
/// configuration (the full pixel vector), every rule scored on the test
/// split.
pub fn sweep_raw(
    dataset: &LabeledDataset,
    k_values: &[usize],
    include_centroid: bool,
) -> Result<SweepResult> {
    let rules = rules_from(k_values, include_centroid);
    if rules.is_empty() {
        return Err(Error::EmptyInput);
    }
    let train = dataset.samples_in(Split::Train);
    let test = dataset.samples_in(Split::Test);
    let (w, h) = uniform_image_size(&train)?;
    uniform_image_size(&test)?;
    let n = w * h;

    let config = FeatureConfig::raw(w, h)?;
    let train_feats: Vec<FeatureVector> =
        train.iter().map(|s| raw_pixel_vector(&s.image)).collect();
    let test_feats: Vec<FeatureVector> =
        test.iter().map(|s| raw_pixel_vector(&s.image)).collect();
    let train_labels: Vec<usize> = train.iter().map(|s| s.class_id).collect();
    let test_labels: Vec<usize> = test.iter().map(|s| s.class_id).collect();

    let eigenspace =
        Eigenspace::fit(&train_feats, None).map_err(|e| cell_error(n, None, e))?;
    let model = TrainedModel::from_projected_features(
        eigenspace,
        &train_feats,
        &train_labels,
        config,
        dataset.class_names().to_vec(),
    )
    .map_err(|e| cell_error(n, None, e))?;

    let rates: Vec<f64> = rules
        .iter()
        .map(|&rule| {
            evaluate_features(&model, &test_feats, &test_labels, rule)
                .map(|(rate, _)| rate)
                .map_err(|e| cell_error(n, Some(rule), e))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        feature: FeatureKind::RawPixel,
        coeff_counts: vec![n],
        rules,
        rates: vec![rates],
    })
}
