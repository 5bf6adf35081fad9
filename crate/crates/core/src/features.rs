//! Feature extraction: raw-pixel flattening and whole-image 2D DCT
//! coefficients sampled in zigzag order.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Which feature family a vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    RawPixel,
    Dct,
}

/// A 1D feature vector extracted from one image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub kind: FeatureKind,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of retained DCT coefficients (vector length for DCT features).
    pub fn n_coeffs(&self) -> usize {
        self.values.len()
    }
}

/// The full 2D DCT coefficient grid of an image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub rows: usize,
    pub cols: usize,
    pub coeffs: Vec<f64>,
}

impl CoefficientMatrix {
    /// Coefficient at vertical frequency `k1`, horizontal frequency `k2`.
    pub fn at(&self, k1: usize, k2: usize) -> f64 {
        self.coeffs[k1 * self.cols + k2]
    }
}

/// Feature extraction configuration carried by trained models.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub kind: FeatureKind,
    /// Retained coefficient count; `None` for raw-pixel features.
    pub n_coeffs: Option<usize>,
    pub image_w: usize,
    pub image_h: usize,
}

impl FeatureConfig {
    pub fn raw(image_w: usize, image_h: usize) -> Result<Self> {
        if image_w == 0 || image_h == 0 {
            return Err(Error::EmptyImage);
        }
        Ok(FeatureConfig {
            kind: FeatureKind::RawPixel,
            n_coeffs: None,
            image_w,
            image_h,
        })
    }

    pub fn dct(image_w: usize, image_h: usize, n_coeffs: usize) -> Result<Self> {
        if image_w == 0 || image_h == 0 {
            return Err(Error::EmptyImage);
        }
        if n_coeffs == 0 || n_coeffs > image_w * image_h {
            return Err(Error::CoefficientCountOutOfRange {
                n: n_coeffs,
                max: image_w * image_h,
            });
        }
        Ok(FeatureConfig {
            kind: FeatureKind::Dct,
            n_coeffs: Some(n_coeffs),
            image_w,
            image_h,
        })
    }

    /// Length of the vectors this configuration produces.
    pub fn dim(&self) -> usize {
        match self.kind {
            FeatureKind::RawPixel => self.image_w * self.image_h,
            FeatureKind::Dct => self.n_coeffs.unwrap_or(0),
        }
    }

    /// Extracts features from `img`, which must match the configured size.
    pub fn extract(&self, img: &GrayImage) -> Result<FeatureVector> {
        if img.width() != self.image_w || img.height() != self.image_h {
            return Err(Error::ImageSizeMismatch {
                expected_w: self.image_w,
                expected_h: self.image_h,
                actual_w: img.width(),
                actual_h: img.height(),
            });
        }
        match self.kind {
            FeatureKind::RawPixel => Ok(raw_pixel_vector(img)),
            FeatureKind::Dct => dct_features(img, self.n_coeffs.unwrap()),
        }
    }
}

/// Flattens an image row-major into a feature vector, values unchanged.
pub fn raw_pixel_vector(img: &GrayImage) -> FeatureVector {
    FeatureVector {
        values: img.pixels().to_vec(),
        kind: FeatureKind::RawPixel,
    }
}

/// Unnormalized 2D DCT of the whole image:
///
/// ```text
/// X(k1, k2) = sum_i sum_j x(i, j) * cos[pi/N2 (j + 1/2) k2] * cos[pi/N1 (i + 1/2) k1]
/// ```
///
/// No scaling factors are applied. Computed separably (rows, then columns),
/// which yields the same sums as the direct double loop.
pub fn dct2(img: &GrayImage) -> CoefficientMatrix {
    let n1 = img.height();
    let n2 = img.width();

    // cos_c[k2][j], cos_r[k1][i]
    let cos_c = cosine_table(n2);
    let cos_r = cosine_table(n1);

    // Row pass: partial[i][k2] = sum_j x(i, j) cos[pi/N2 (j+1/2) k2]
    let mut partial = vec![0.0f64; n1 * n2];
    for i in 0..n1 {
        let row = &img.pixels()[i * n2..(i + 1) * n2];
        for k2 in 0..n2 {
            let acc: f64 = row.iter().zip(&cos_c[k2]).map(|(x, c)| x * c).sum();
            partial[i * n2 + k2] = acc;
        }
    }

    // Column pass: X(k1, k2) = sum_i partial[i][k2] cos[pi/N1 (i+1/2) k1]
    let mut coeffs = vec![0.0f64; n1 * n2];
    for k1 in 0..n1 {
        for k2 in 0..n2 {
            let mut acc = 0.0;
            for i in 0..n1 {
                acc += partial[i * n2 + k2] * cos_r[k1][i];
            }
            coeffs[k1 * n2 + k2] = acc;
        }
    }

    CoefficientMatrix {
        rows: n1,
        cols: n2,
        coeffs,
    }
}

/// `table[k][x] = cos(pi * (x + 1/2) * k / n)`.
fn cosine_table(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            (0..n)
                .map(|x| (PI * (x as f64 + 0.5) * k as f64 / n as f64).cos())
                .collect()
        })
        .collect()
}

/// Zigzag traversal of an `n_rows` x `n_cols` grid: anti-diagonals of
/// constant `row + col` in increasing sum; within an even-sum diagonal
/// bottom-left to top-right, within an odd-sum diagonal top-right to
/// bottom-left (the JPEG convention). Visits every index exactly once,
/// starting at `(0, 0)`.
pub fn zigzag_order(n_rows: usize, n_cols: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(n_rows * n_cols);
    if n_rows == 0 || n_cols == 0 {
        return order;
    }
    for s in 0..=(n_rows - 1 + n_cols - 1) {
        let r_min = s.saturating_sub(n_cols - 1);
        let r_max = s.min(n_rows - 1);
        if !s.is_multiple_of(2) {
            // top-right -> bottom-left: row ascending
            for r in r_min..=r_max {
                order.push((r, s - r));
            }
        } else {
            // bottom-left -> top-right: row descending
            for r in (r_min..=r_max).rev() {
                order.push((r, s - r));
            }
        }
    }
    order
}

/// All DCT coefficients of `img` read in zigzag order.
pub fn zigzag_coefficients(img: &GrayImage) -> Vec<f64> {
    let m = dct2(img);
    zigzag_order(m.rows, m.cols)
        .into_iter()
        .map(|(r, c)| m.at(r, c))
        .collect()
}

/// The first `n_coeffs` zigzag-ordered DCT coefficients of `img`.
pub fn dct_features(img: &GrayImage, n_coeffs: usize) -> Result<FeatureVector> {
    let max = img.width() * img.height();
    if n_coeffs == 0 || n_coeffs > max {
        return Err(Error::CoefficientCountOutOfRange { n: n_coeffs, max });
    }
    let mut values = zigzag_coefficients(img);
    values.truncate(n_coeffs);
    Ok(FeatureVector {
        values,
        kind: FeatureKind::Dct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, pixels: &[f64]) -> GrayImage {
        GrayImage::new(w, h, pixels.to_vec()).unwrap()
    }

    /// Direct four-loop evaluation of the transform definition. Kept free of
    /// any shared code with `dct2` so it can serve as an oracle.
    fn dct2_direct(pixels: &[f64], n1: usize, n2: usize) -> Vec<f64> {
        let mut out = vec![0.0f64; n1 * n2];
        for k1 in 0..n1 {
            for k2 in 0..n2 {
                let mut sum = 0.0;
                for i in 0..n1 {
                    for j in 0..n2 {
                        let a = PI / n2 as f64 * (j as f64 + 0.5) * k2 as f64;
                        let b = PI / n1 as f64 * (i as f64 + 0.5) * k1 as f64;
                        sum += pixels[i * n2 + j] * a.cos() * b.cos();
                    }
                }
                out[k1 * n2 + k2] = sum;
            }
        }
        out
    }

    fn xorshift(state: &mut u64) -> u64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        *state
    }

    #[test]
    fn raw_vector_is_row_major() {
        let v = raw_pixel_vector(&img(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(v.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(v.kind, FeatureKind::RawPixel);
    }

    #[test]
    fn raw_vector_length_is_pixel_count() {
        let pixels = vec![0.0; 128 * 128];
        let v = raw_pixel_vector(&img(128, 128, &pixels));
        assert_eq!(v.len(), 16384);
    }

    #[test]
    fn raw_vector_of_single_pixel() {
        assert_eq!(raw_pixel_vector(&img(1, 1, &[9.0])).values, vec![9.0]);
    }

    #[test]
    fn dct_of_constant_image_is_dc_only() {
        let m = dct2(&img(2, 2, &[5.0, 5.0, 5.0, 5.0]));
        assert!((m.at(0, 0) - 20.0).abs() <= 1e-9);
        for (k1, k2) in [(0, 1), (1, 0), (1, 1)] {
            assert!(m.at(k1, k2).abs() <= 1e-9, "X({k1},{k2}) = {}", m.at(k1, k2));
        }
    }

    /// Hand evaluation of the two-term sum for a +1/-1 signal. Images only
    /// hold values in [0, 255], so the signal rides on a flat 128 offset and
    /// the offset's transform is subtracted (the transform is linear).
    #[test]
    fn dct_of_alternating_pair() {
        let signal = dct2(&img(2, 1, &[129.0, 127.0]));
        let offset = dct2(&img(2, 1, &[128.0, 128.0]));
        let x00 = signal.at(0, 0) - offset.at(0, 0);
        let x01 = signal.at(0, 1) - offset.at(0, 1);
        assert!(x00.abs() <= 1e-9);
        assert!((x01 - 2f64.sqrt()).abs() <= 1e-9);
    }

    #[test]
    fn dct_of_zero_image_is_zero() {
        let m = dct2(&img(7, 4, &vec![0.0; 28]));
        assert!(m.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn dct_matches_direct_four_loop_oracle() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let cases = 100;
        let start = std::time::Instant::now();
        for _ in 0..cases {
            let w = 1 + (xorshift(&mut state) % 8) as usize;
            let h = 1 + (xorshift(&mut state) % 8) as usize;
            let pixels: Vec<f64> = (0..w * h)
                .map(|_| (xorshift(&mut state) % 256) as f64)
                .collect();
            let fast = dct2(&img(w, h, &pixels));
            let direct = dct2_direct(&pixels, h, w);
            for (a, b) in fast.coeffs.iter().zip(&direct) {
                assert!((a - b).abs() <= 1e-6, "separable {a} vs direct {b}");
            }
        }
        assert!(start.elapsed().as_secs_f64() < 5.0);
    }

    #[test]
    fn dct_is_linear() {
        let mut state = 0x853c49e6748fea9bu64;
        for _ in 0..20 {
            let w = 1 + (xorshift(&mut state) % 6) as usize;
            let h = 1 + (xorshift(&mut state) % 6) as usize;
            let pa: Vec<f64> = (0..w * h).map(|_| (xorshift(&mut state) % 128) as f64).collect();
            let pb: Vec<f64> = (0..w * h).map(|_| (xorshift(&mut state) % 128) as f64).collect();
            let (a, b) = (0.75, 0.5);
            let combined: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| a * x + b * y).collect();
            let ca = dct2(&img(w, h, &pa));
            let cb = dct2(&img(w, h, &pb));
            let cc = dct2(&img(w, h, &combined));
            for i in 0..w * h {
                let want = a * ca.coeffs[i] + b * cb.coeffs[i];
                assert!((cc.coeffs[i] - want).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn zigzag_3x3() {
        assert_eq!(
            zigzag_order(3, 3),
            vec![
                (0, 0),
                (0, 1),
                (1, 0),
                (2, 0),
                (1, 1),
                (0, 2),
                (1, 2),
                (2, 1),
                (2, 2)
            ]
        );
    }

    #[test]
    fn zigzag_single_row_is_scan_order() {
        assert_eq!(zigzag_order(1, 4), vec![(0, 0), (0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn zigzag_4x4_prefix() {
        let order = zigzag_order(4, 4);
        assert_eq!(
            &order[..6],
            &[(0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2)]
        );
    }

    #[test]
    fn zigzag_is_a_permutation() {
        for r in 1..=16 {
            for c in 1..=16 {
                let order = zigzag_order(r, c);
                assert_eq!(order.len(), r * c);
                let mut seen = vec![false; r * c];
                for (i, j) in order {
                    assert!(i < r && j < c);
                    assert!(!seen[i * c + j], "({i},{j}) visited twice");
                    seen[i * c + j] = true;
                }
            }
        }
    }

    #[test]
    fn first_dct_feature_is_the_dc_term() {
        let pixels: Vec<f64> = (0..30).map(|i| (i * 7 % 256) as f64).collect();
        let im = img(6, 5, &pixels);
        let v = dct_features(&im, 1).unwrap();
        assert_eq!(v.values, vec![dct2(&im).at(0, 0)]);
    }

    #[test]
    fn dct_features_of_constant_2x2() {
        let v = dct_features(&img(2, 2, &[5.0; 4]), 4).unwrap();
        assert!((v.values[0] - 20.0).abs() <= 1e-9);
        for &c in &v.values[1..] {
            assert!(c.abs() <= 1e-9);
        }
    }

    #[test]
    fn dct_feature_count_133() {
        let pixels: Vec<f64> = (0..128 * 128).map(|i| (i % 251) as f64).collect();
        let v = dct_features(&img(128, 128, &pixels), 133).unwrap();
        assert_eq!(v.len(), 133);
        assert_eq!(v.kind, FeatureKind::Dct);
    }

    #[test]
    fn full_dct_features_cover_every_coefficient_once() {
        let pixels: Vec<f64> = (0..20).map(|i| (i * 13 % 256) as f64).collect();
        let im = img(5, 4, &pixels);
        let v = dct_features(&im, 20).unwrap();
        let m = dct2(&im);
        let mut sorted_a = v.values.clone();
        let mut sorted_b = m.coeffs.clone();
        sorted_a.sort_by(f64::total_cmp);
        sorted_b.sort_by(f64::total_cmp);
        assert_eq!(sorted_a, sorted_b);
    }

    #[test]
    fn coefficient_count_bounds_are_enforced() {
        let im = img(2, 2, &[1.0; 4]);
        assert!(matches!(
            dct_features(&im, 0),
            Err(Error::CoefficientCountOutOfRange { n: 0, max: 4 })
        ));
        assert!(matches!(
            dct_features(&im, 5),
            Err(Error::CoefficientCountOutOfRange { n: 5, max: 4 })
        ));
        assert!(FeatureConfig::dct(2, 2, 5).is_err());
    }

    #[test]
    fn config_rejects_mismatched_image() {
        let cfg = FeatureConfig::raw(4, 4).unwrap();
        let err = cfg.extract(&img(2, 2, &[0.0; 4])).unwrap_err();
        assert!(matches!(err, Error::ImageSizeMismatch { .. }));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn zigzag_is_a_permutation_of_any_grid(r in 1usize..=40, c in 1usize..=40) {
                let order = zigzag_order(r, c);
                prop_assert_eq!(order.len(), r * c);
                let mut seen = vec![false; r * c];
                for (i, j) in order {
                    prop_assert!(i < r && j < c);
                    prop_assert!(!seen[i * c + j]);
                    seen[i * c + j] = true;
                }
            }

            #[test]
            fn dct_prefix_equals_truncated_full_read(
                w in 1usize..=8,
                h in 1usize..=8,
                seed in any::<u64>(),
            ) {
                let mut state = seed | 1;
                let pixels: Vec<f64> = (0..w * h)
                    .map(|_| (xorshift(&mut state) % 256) as f64)
                    .collect();
                let im = img(w, h, &pixels);
                let full = zigzag_coefficients(&im);
                let n = 1 + (xorshift(&mut state) as usize) % (w * h);
                let v = dct_features(&im, n).unwrap();
                prop_assert_eq!(&v.values[..], &full[..n]);
            }
        }
    }
}
