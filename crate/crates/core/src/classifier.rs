//! k-NN and cluster-centroid classification in the projected eigenspace.
//!
//! All distance comparisons run on squared values (order-equivalent);
//! reported neighbor distances are true Euclidean. Ties are broken
//! deterministically: neighbor selection by (distance, training index),
//! k-NN majority ties by smallest within-set distance sum then lowest class
//! index, centroid ties by lowest class index.

use crate::dataset::{LabeledDataset, Split};
use crate::eigenspace::{project, Eigenspace, ProjectedPoint};
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::image::GrayImage;

/// Classification rule: k nearest neighbors or nearest class centroid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierRule {
    Knn(usize),
    Centroid,
}

impl ClassifierRule {
    /// Parses the CLI/CSV spelling: `knn<k>` or `centroid`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "centroid" {
            return Ok(ClassifierRule::Centroid);
        }
        if let Some(k) = s.strip_prefix("knn") {
            if let Ok(k) = k.parse::<usize>() {
                if k >= 1 {
                    return Ok(ClassifierRule::Knn(k));
                }
            }
        }
        Err(Error::UnknownLabel {
            label: format!("rule {s:?} (expected knn<k> or centroid)"),
        })
    }
}

impl std::fmt::Display for ClassifierRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassifierRule::Knn(k) => write!(f, "knn{k}"),
            ClassifierRule::Centroid => write!(f, "centroid"),
        }
    }
}

/// One retrieved neighbor, reported with its true Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub train_index: usize,
    pub label: usize,
    pub distance: f64,
}

/// A fitted recognition model: eigenspace, projected training points,
/// per-class centroids, and the feature recipe.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub eigenspace: Eigenspace,
    pub train_points: Vec<ProjectedPoint>,
    pub centroids: Vec<Vec<f64>>,
    pub feature_config: FeatureConfig,
    pub class_names: Vec<String>,
}

impl TrainedModel {
    /// Extracts features from the training split, fits the eigenspace,
    /// projects every training sample, and computes class centroids.
    pub fn fit(
        dataset: &LabeledDataset,
        feature_config: FeatureConfig,
        max_components: Option<usize>,
    ) -> Result<Self> {
        let train = dataset.samples_in(Split::Train);
        if train.is_empty() {
            return Err(Error::EmptyInput);
        }
        let features = train
            .iter()
            .map(|s| feature_config.extract(&s.image))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<usize> = train.iter().map(|s| s.class_id).collect();
        let eigenspace = Eigenspace::fit(&features, max_components)?;
        Self::from_projected_features(
            eigenspace,
            &features,
            &labels,
            feature_config,
            dataset.class_names().to_vec(),
        )
    }

    /// Assembles a model from already-extracted training features.
    pub fn from_projected_features(
        eigenspace: Eigenspace,
        features: &[crate::features::FeatureVector],
        labels: &[usize],
        feature_config: FeatureConfig,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: features.len(),
                right: labels.len(),
            });
        }
        let train_points = features
            .iter()
            .zip(labels)
            .map(|(f, &label)| {
                Ok(ProjectedPoint {
                    coords: project(&eigenspace, &f.values)?,
                    label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let centroids = fit_centroids(&train_points, class_names.len())?;
        Ok(TrainedModel {
            eigenspace,
            train_points,
            centroids,
            feature_config,
            class_names,
        })
    }

    /// Extract features, project, and classify a single image.
    pub fn classify(&self, image: &GrayImage, rule: ClassifierRule) -> Result<usize> {
        let features = self.feature_config.extract(image)?;
        let coords = project(&self.eigenspace, &features.values)?;
        match rule {
            ClassifierRule::Knn(k) => Ok(knn_classify(&self.train_points, &coords, k)?.0),
            ClassifierRule::Centroid => centroid_classify(&self.centroids, &coords),
        }
    }

    /// Like [`classify`](Self::classify), also returning the neighbor list
    /// for k-NN rules.
    pub fn classify_with_neighbors(
        &self,
        image: &GrayImage,
        rule: ClassifierRule,
    ) -> Result<(usize, Vec<Neighbor>)> {
        let features = self.feature_config.extract(image)?;
        let coords = project(&self.eigenspace, &features.values)?;
        match rule {
            ClassifierRule::Knn(k) => knn_classify(&self.train_points, &coords, k),
            ClassifierRule::Centroid => {
                Ok((centroid_classify(&self.centroids, &coords)?, Vec::new()))
            }
        }
    }
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority-vote classification among the `k` nearest training points.
///
/// Returns the winning label and the k neighbors sorted by ascending
/// distance. Neighbor selection orders by (distance, training index);
/// majority ties go to the class with the smallest distance sum inside the
/// k-set, then to the lowest class index.
pub fn knn_classify(
    train_points: &[ProjectedPoint],
    query: &[f64],
    k: usize,
) -> Result<(usize, Vec<Neighbor>)> {
    if train_points.is_empty() {
        return Err(Error::EmptyModel);
    }
    if k == 0 || k > train_points.len() {
        return Err(Error::KOutOfRange {
            k,
            max: train_points.len(),
        });
    }

    let mut scored: Vec<(f64, usize)> = train_points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.coords.len() != query.len() {
                return Err(Error::LengthMismatch {
                    left: p.coords.len(),
                    right: query.len(),
                });
            }
            Ok((squared_distance(&p.coords, query), i))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scored.truncate(k);

    let neighbors: Vec<Neighbor> = scored
        .iter()
        .map(|&(d2, i)| Neighbor {
            train_index: i,
            label: train_points[i].label,
            distance: d2.sqrt(),
        })
        .collect();

    let n_classes = train_points.iter().map(|p| p.label).max().unwrap() + 1;
    let mut votes = vec![0usize; n_classes];
    let mut distance_sums = vec![0.0f64; n_classes];
    for n in &neighbors {
        votes[n.label] += 1;
        distance_sums[n.label] += n.distance;
    }
    let top_votes = *votes.iter().max().unwrap();
    let mut winner = None;
    let mut winner_sum = f64::INFINITY;
    for (class, (&count, &sum)) in votes.iter().zip(&distance_sums).enumerate() {
        if count == top_votes && sum < winner_sum {
            winner = Some(class);
            winner_sum = sum;
        }
    }

    Ok((winner.unwrap(), neighbors))
}

/// Per-class arithmetic mean of the projected coordinates.
pub fn fit_centroids(points: &[ProjectedPoint], n_classes: usize) -> Result<Vec<Vec<f64>>> {
    if points.is_empty() || n_classes == 0 {
        return Err(Error::EmptyInput);
    }
    let dim = points[0].coords.len();
    let mut sums = vec![vec![0.0f64; dim]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for p in points {
        if p.coords.len() != dim {
            return Err(Error::LengthMismatch {
                left: dim,
                right: p.coords.len(),
            });
        }
        if p.label >= n_classes {
            return Err(Error::UnknownLabel {
                label: format!("class id {}", p.label),
            });
        }
        counts[p.label] += 1;
        for (acc, v) in sums[p.label].iter_mut().zip(&p.coords) {
            *acc += v;
        }
    }
    for (class, (sum, &count)) in sums.iter_mut().zip(&counts).enumerate() {
        if count == 0 {
            return Err(Error::EmptyClass {
                class: class.to_string(),
            });
        }
        for v in sum.iter_mut() {
            *v /= count as f64;
        }
    }
    Ok(sums)
}

/// Label of the nearest centroid; distance ties go to the lowest class
/// index.
pub fn centroid_classify(centroids: &[Vec<f64>], query: &[f64]) -> Result<usize> {
    if centroids.is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut best = 0usize;
    let mut best_d2 = f64::INFINITY;
    for (class, c) in centroids.iter().enumerate() {
        if c.len() != query.len() {
            return Err(Error::LengthMismatch {
                left: c.len(),
                right: query.len(),
            });
        }
        let d2 = squared_distance(c, query);
        if d2 < best_d2 {
            best_d2 = d2;
            best = class;
        }
    }
    Ok(best)
}
