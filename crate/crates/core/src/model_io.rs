//! Model persistence.
//!
//! A model file is a readable text header followed by raw little-endian
//! `f64` blocks, so classification decisions survive a save/load round trip
//! bit-exactly:
//!
//! ```text
//! EIGC 1
//! feature dct            (or: feature raw)
//! coeffs 133             (dct only)
//! size 128 128
//! classes 2
//! name male
//! name female
//! dim 133
//! train 200
//! components 199
//! labels 0 0 1 ...       (train labels, space separated)
//! end
//! <mean: dim doubles>
//! <components: components x dim doubles>
//! <eigenvalues: components doubles>
//! <train points: train x components doubles>
//! <centroids: classes x components doubles>
//! ```
//!
//! Unknown magic or version is rejected outright.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::classifier::TrainedModel;
use crate::eigenspace::{Eigenspace, ProjectedPoint};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureKind};

const MAGIC: &str = "EIGC";
const VERSION: u32 = 1;

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let es = &model.eigenspace;

    let mut header = String::new();
    header.push_str(&format!("{MAGIC} {VERSION}\n"));
    match model.feature_config.kind {
        FeatureKind::RawPixel => header.push_str("feature raw\n"),
        FeatureKind::Dct => {
            header.push_str("feature dct\n");
            header.push_str(&format!(
                "coeffs {}\n",
                model.feature_config.n_coeffs.unwrap_or(0)
            ));
        }
    }
    header.push_str(&format!(
        "size {} {}\n",
        model.feature_config.image_w, model.feature_config.image_h
    ));
    header.push_str(&format!("classes {}\n", model.class_names.len()));
    for name in &model.class_names {
        header.push_str(&format!("name {name}\n"));
    }
    header.push_str(&format!("dim {}\n", es.dim()));
    header.push_str(&format!("train {}\n", model.train_points.len()));
    header.push_str(&format!("components {}\n", es.n_components()));
    let labels: Vec<String> = model
        .train_points
        .iter()
        .map(|p| p.label.to_string())
        .collect();
    header.push_str(&format!("labels {}\n", labels.join(" ")));
    header.push_str("end\n");

    w.write_all(header.as_bytes())
        .map_err(|e| Error::io(path, e))?;

    let mut write_block = |values: &[f64]| -> Result<()> {
        let mut bytes = Vec::with_capacity(values.len() * 8);
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes).map_err(|e| Error::io(path, e))
    };

    write_block(es.mean())?;
    for c in es.components() {
        write_block(c)?;
    }
    write_block(es.eigenvalues())?;
    for p in &model.train_points {
        write_block(&p.coords)?;
    }
    for c in &model.centroids {
        write_block(c)?;
    }
    Ok(())
}

struct Header {
    feature: Option<FeatureKind>,
    coeffs: Option<usize>,
    size: Option<(usize, usize)>,
    class_names: Vec<String>,
    declared_classes: Option<usize>,
    dim: Option<usize>,
    train: Option<usize>,
    components: Option<usize>,
    labels: Vec<usize>,
}

fn bad(detail: impl Into<String>) -> Error {
    Error::ModelFormat(detail.into())
}

fn parse_header(text: &str) -> Result<Header> {
    let mut h = Header {
        feature: None,
        coeffs: None,
        size: None,
        class_names: Vec::new(),
        declared_classes: None,
        dim: None,
        train: None,
        components: None,
        labels: Vec::new(),
    };
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| bad("empty file"))?;
    let mut magic = first.split(' ');
    if magic.next() != Some(MAGIC) {
        return Err(bad("bad magic (not an EIGC model file)"));
    }
    let version: u32 = magic
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("missing version"))?;
    if version != VERSION {
        return Err(bad(format!(
            "unsupported version {version} (this build reads version {VERSION})"
        )));
    }

    let parse_usize = |v: &str, field: &str| -> Result<usize> {
        v.parse()
            .map_err(|_| bad(format!("invalid {field} value {v:?}")))
    };
    for line in lines {
        if line == "end" {
            return Ok(h);
        }
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "feature" => {
                h.feature = Some(match value {
                    "raw" => FeatureKind::RawPixel,
                    "dct" => FeatureKind::Dct,
                    other => return Err(bad(format!("unknown feature kind {other:?}"))),
                })
            }
            "coeffs" => h.coeffs = Some(parse_usize(value, "coeffs")?),
            "size" => {
                let (ws, hs) = value
                    .split_once(' ')
                    .ok_or_else(|| bad("size needs two values"))?;
                h.size = Some((parse_usize(ws, "size")?, parse_usize(hs, "size")?));
            }
            "classes" => h.declared_classes = Some(parse_usize(value, "classes")?),
            "name" => h.class_names.push(value.to_string()),
            "dim" => h.dim = Some(parse_usize(value, "dim")?),
            "train" => h.train = Some(parse_usize(value, "train")?),
            "components" => h.components = Some(parse_usize(value, "components")?),
            "labels" => {
                for tok in value.split(' ').filter(|t| !t.is_empty()) {
                    h.labels.push(parse_usize(tok, "label")?);
                }
            }
            other => return Err(bad(format!("unknown header field {other:?}"))),
        }
    }
    Err(bad("header not terminated by \"end\""))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;

    // the header is everything up to and including the "end\n" line
    let marker: &[u8] = b"\nend\n";
    let end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| bad("header not terminated by \"end\""))?;
    let header_len = end + marker.len();
    let header_text = std::str::from_utf8(&bytes[..header_len])
        .map_err(|_| bad("header is not valid UTF-8"))?;
    let h = parse_header(header_text)?;

    let feature = h.feature.ok_or_else(|| bad("missing feature line"))?;
    let (w, hgt) = h.size.ok_or_else(|| bad("missing size line"))?;
    let dim = h.dim.ok_or_else(|| bad("missing dim line"))?;
    let train = h.train.ok_or_else(|| bad("missing train line"))?;
    let n_components = h.components.ok_or_else(|| bad("missing components line"))?;
    let declared = h.declared_classes.ok_or_else(|| bad("missing classes line"))?;
    if declared != h.class_names.len() {
        return Err(bad(format!(
            "declared {declared} classes but listed {}",
            h.class_names.len()
        )));
    }
    if h.labels.len() != train {
        return Err(bad(format!(
            "declared {train} training points but listed {} labels",
            h.labels.len()
        )));
    }
    if let Some(&worst) = h.labels.iter().max() {
        if worst >= declared {
            return Err(bad(format!("label {worst} out of range for {declared} classes")));
        }
    }

    let feature_config = match feature {
        FeatureKind::RawPixel => {
            let cfg = FeatureConfig::raw(w, hgt).map_err(|e| bad(e.to_string()))?;
            if cfg.dim() != dim {
                return Err(bad(format!(
                    "raw feature dim {} does not match declared dim {dim}",
                    cfg.dim()
                )));
            }
            cfg
        }
        FeatureKind::Dct => {
            let n = h.coeffs.ok_or_else(|| bad("missing coeffs line"))?;
            if n != dim {
                return Err(bad(format!("coeffs {n} does not match declared dim {dim}")));
            }
            FeatureConfig::dct(w, hgt, n).map_err(|e| bad(e.to_string()))?
        }
    };

    let expected_doubles = dim // mean
        + n_components * dim
        + n_components
        + train * n_components
        + declared * n_components;
    let payload = &bytes[header_len..];
    if payload.len() != expected_doubles * 8 {
        return Err(bad(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            expected_doubles * 8
        )));
    }
    let mut doubles = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |n: usize| -> Vec<f64> { doubles.by_ref().take(n).collect() };

    let mean = take(dim);
    let components: Vec<Vec<f64>> = (0..n_components).map(|_| take(dim)).collect();
    let eigenvalues = take(n_components);
    let train_points: Vec<ProjectedPoint> = h
        .labels
        .iter()
        .map(|&label| ProjectedPoint {
            coords: take(n_components),
            label,
        })
        .collect();
    let centroids: Vec<Vec<f64>> = (0..declared).map(|_| take(n_components)).collect();

    let eigenspace = Eigenspace::from_parts(mean, components, eigenvalues, train)
        .map_err(|e| bad(e.to_string()))?;

    Ok(TrainedModel {
        eigenspace,
        train_points,
        centroids,
        feature_config,
        class_names: h.class_names,
    })
}
