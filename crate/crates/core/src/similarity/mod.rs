//! Region similarity scoring and blend-weight selection.
//!
//! Each comparison region is scored with the measure that suits its
//! content: mouth and nose by SSIM dissimilarity, eyes by PCA distance over
//! LBP descriptors (they carry the most high-frequency detail), face shape
//! by PCA distance over raw pixels. Errors are converted to weights by
//! normalized inverse error over the closest matches.

pub mod lbp;
pub mod pca;
pub mod ssim;

use serde::{Deserialize, Serialize};

pub use lbp::LbpConfig;
pub use pca::{PcaModel, Retained};

use crate::error::{Error, Result};
use crate::img::GrayImage;
use crate::par;
use crate::region::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Ssim,
    Lbp,
}

impl Method {
    /// The fixed method-per-region routing.
    pub fn for_region(region: Region) -> Method {
        match region {
            Region::Mouth | Region::Nose => Method::Ssim,
            Region::Eyes => Method::Lbp,
            Region::Face => Method::Pca,
            Region::Unused => unreachable!("unused region is never scored"),
        }
    }
}

/// Per-database-model error values, smaller is closer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorVector {
    pub errors: Vec<f64>,
    pub method: Method,
}

impl ErrorVector {
    pub fn new(errors: Vec<f64>, method: Method) -> Result<ErrorVector> {
        if errors.is_empty() {
            return Err(Error::Similarity("empty error vector".into()));
        }
        if errors.iter().any(|e| e.is_nan() || *e < 0.0) {
            return Err(Error::Similarity(
                "error vector entries must be non-negative and not NaN".into(),
            ));
        }
        Ok(ErrorVector { errors, method })
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    /// Index of the smallest error, ties broken by lower model id.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &e) in self.errors.iter().enumerate() {
            if e < self.errors[best] {
                best = i;
            }
        }
        best
    }
}

/// Normalized blend weights over the database; positive exactly on the
/// selected support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    /// Selected model indices, ascending.
    pub support: Vec<usize>,
}

impl WeightVector {
    /// One-hot selection of a single model.
    pub fn single(index: usize, len: usize) -> WeightVector {
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        WeightVector {
            weights,
            support: vec![index],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Similarity(format!("weights sum to {sum}, not 1")));
        }
        for (i, &w) in self.weights.iter().enumerate() {
            let in_support = self.support.contains(&i);
            if in_support && w <= 0.0 {
                return Err(Error::Similarity(format!("support model {i} has weight {w}")));
            }
            if !in_support && w != 0.0 {
                return Err(Error::Similarity(format!(
                    "model {i} outside the support has weight {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Picks the `top_n` smallest errors (ties by lower model id) and assigns
/// normalized inverse-error weights; a selected error of exactly zero
/// collapses the support to that single model with weight 1.
///
/// Weights are computed from error ratios against the smallest selected
/// error, which keeps the result invariant under rescaling of the whole
/// error vector.
pub fn select_weights(errors: &ErrorVector, top_n: usize) -> Result<WeightVector> {
    if top_n != 1 && top_n != 3 {
        return Err(Error::Similarity(format!(
            "top_n must be 1 or 3, got {top_n}"
        )));
    }
    let n = errors.len();
    let mut order: Vec<usize> = (0..n).filter(|&i| errors.errors[i].is_finite()).collect();
    if order.is_empty() {
        return Err(Error::Similarity("all errors are infinite".into()));
    }
    order.sort_by(|&a, &b| {
        errors.errors[a]
            .partial_cmp(&errors.errors[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    order.truncate(top_n);

    let min_err = errors.errors[order[0]];
    if min_err == 0.0 {
        return Ok(WeightVector::single(order[0], n));
    }

    let mut support = order;
    support.sort_unstable();
    let inverses: Vec<f64> = support
        .iter()
        .map(|&i| 1.0 / (errors.errors[i] / min_err))
        .collect();
    let total: f64 = inverses.iter().sum();
    let mut weights = vec![0.0; n];
    for (&i, &inv) in support.iter().zip(&inverses) {
        weights[i] = inv / total;
    }
    Ok(WeightVector { weights, support })
}

/// Fitted matcher for one region of the rendered database.
#[derive(Debug, Clone)]
pub enum RegionMatcher {
    Pca(PcaModel),
    Ssim { references: Vec<GrayImage> },
    Lbp { cfg: LbpConfig, model: PcaModel },
}

impl RegionMatcher {
    pub fn fit(
        method: Method,
        images: &[GrayImage],
        retained: Retained,
        lbp_cfg: &LbpConfig,
    ) -> Result<RegionMatcher> {
        match method {
            Method::Pca => Ok(RegionMatcher::Pca(PcaModel::fit_images(images, retained)?)),
            Method::Ssim => Ok(RegionMatcher::Ssim {
                references: images.to_vec(),
            }),
            Method::Lbp => {
                let descriptors: Vec<Result<Vec<f64>>> =
                    par::map_slice(images, |img| lbp::descriptor(img, lbp_cfg));
                let descriptors: Vec<Vec<f64>> =
                    descriptors.into_iter().collect::<Result<_>>()?;
                Ok(RegionMatcher::Lbp {
                    cfg: *lbp_cfg,
                    model: PcaModel::fit(&descriptors, retained)?,
                })
            }
        }
    }

    pub fn method(&self) -> Method {
        match self {
            RegionMatcher::Pca(_) => Method::Pca,
            RegionMatcher::Ssim { .. } => Method::Ssim,
            RegionMatcher::Lbp { .. } => Method::Lbp,
        }
    }

    /// Error of `input` against every database model, in model order.
    /// `input` must already be at the region's comparison size.
    pub fn errors(&self, input: &GrayImage) -> Result<ErrorVector> {
        let errors = match self {
            RegionMatcher::Pca(model) => {
                let score = model.score_image(input)?;
                model.distances_to_training(&score)
            }
            RegionMatcher::Ssim { references } => {
                let scores: Vec<Result<f64>> =
                    par::map_slice(references, |r| ssim::dissimilarity(input, r));
                scores.into_iter().collect::<Result<Vec<f64>>>()?
            }
            RegionMatcher::Lbp { cfg, model } => {
                let d = lbp::descriptor(input, cfg)?;
                let score = model.score(&d)?;
                model.distances_to_training(&score)
            }
        };
        ErrorVector::new(errors, self.method())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_images() -> Vec<GrayImage> {
        (0..3)
            .map(|k| {
                GrayImage::from_fn(16, 16, |x, y| {
                    let base = (x as f32 / 16.0 + y as f32 / 32.0) / 2.0;
                    (base + k as f32 * 0.15).min(1.0)
                })
            })
            .collect()
    }

    #[test]
    fn method_routing_follows_region_content() {
        assert_eq!(Method::for_region(Region::Mouth), Method::Ssim);
        assert_eq!(Method::for_region(Region::Nose), Method::Ssim);
        assert_eq!(Method::for_region(Region::Eyes), Method::Lbp);
        assert_eq!(Method::for_region(Region::Face), Method::Pca);
    }

    #[test]
    fn hand_computed_weights() {
        let e = ErrorVector::new(vec![2.0, 4.0, 8.0, 50.0], Method::Pca).unwrap();
        let w = select_weights(&e, 3).unwrap();
        assert_eq!(w.support, vec![0, 1, 2]);
        assert!((w.weights[0] - 4.0 / 7.0).abs() < 1e-12);
        assert!((w.weights[1] - 2.0 / 7.0).abs() < 1e-12);
        assert!((w.weights[2] - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(w.weights[3], 0.0);
        w.validate().unwrap();
    }

    #[test]
    fn top_one_is_one_hot_argmin() {
        let e = ErrorVector::new(vec![5.0, 1.0, 9.0], Method::Ssim).unwrap();
        let w = select_weights(&e, 1).unwrap();
        assert_eq!(w.support, vec![1]);
        assert_eq!(w.weights, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn equal_errors_split_evenly() {
        for c in [1e-7, 1.0, 3.5e6] {
            let e = ErrorVector::new(vec![c, c, c, 1e12], Method::Pca).unwrap();
            let w = select_weights(&e, 3).unwrap();
            assert_eq!(w.support, vec![0, 1, 2]);
            for i in 0..3 {
                assert!((w.weights[i] - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_error_collapses_to_single_model() {
        let e = ErrorVector::new(vec![3.0, 0.0, 5.0, 0.0], Method::Lbp).unwrap();
        let w = select_weights(&e, 3).unwrap();
        // two zeros: tie broken by lower id
        assert_eq!(w.support, vec![1]);
        assert_eq!(w.weights[1], 1.0);
    }

    #[test]
    fn invalid_top_n_rejected() {
        let e = ErrorVector::new(vec![1.0, 2.0], Method::Pca).unwrap();
        assert!(select_weights(&e, 2).is_err());
    }

    #[test]
    fn all_infinite_errors_rejected() {
        let e = ErrorVector::new(vec![f64::INFINITY, f64::INFINITY], Method::Pca).unwrap();
        assert!(select_weights(&e, 1).is_err());
    }

    #[test]
    fn pca_matcher_self_distance_is_zero() {
        let images = toy_images();
        let m = RegionMatcher::fit(Method::Pca, &images, Retained::Count(2), &LbpConfig::default())
            .unwrap();
        let e = m.errors(&images[1]).unwrap();
        assert!(e.errors[1] < 1e-9);
        assert_eq!(e.argmin(), 1);
    }

    #[test]
    fn ssim_matcher_self_error_is_zero() {
        let images = toy_images();
        let m = RegionMatcher::fit(Method::Ssim, &images, Retained::default(), &LbpConfig::default())
            .unwrap();
        let e = m.errors(&images[2]).unwrap();
        assert_eq!(e.errors[2], 0.0);
        assert_eq!(e.argmin(), 2);
    }

    #[test]
    fn toy_ssim_errors_match_direct_computation() {
        let images = toy_images();
        let input = GrayImage::from_fn(16, 16, |x, y| ((x + y) % 5) as f32 / 5.0);
        let m = RegionMatcher::fit(Method::Ssim, &images, Retained::default(), &LbpConfig::default())
            .unwrap();
        let got = m.errors(&input).unwrap();
        for (k, img) in images.iter().enumerate() {
            let expect = 1.0 - ssim::ssim(&input, img).unwrap();
            assert!((got.errors[k] - expect).abs() < 1e-15);
        }
    }

    proptest::proptest! {
        #[test]
        fn weight_invariants_hold_on_random_errors(
            errors in proptest::collection::vec(1e-6f64..1e6, 4..32),
            top_n in proptest::sample::select(vec![1usize, 3])
        ) {
            let e = ErrorVector::new(errors, Method::Pca).unwrap();
            let w = select_weights(&e, top_n).unwrap();
            w.validate().unwrap();
            proptest::prop_assert!(w.support.len() <= top_n);
            let sum: f64 = w.weights.iter().sum();
            proptest::prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        // Scaling every error by the same constant must not change selection.
        #[test]
        fn support_is_scale_invariant(
            errors in proptest::collection::vec(1e-3f64..1e3, 4..16),
        ) {
            let e = ErrorVector::new(errors.clone(), Method::Pca).unwrap();
            let w = select_weights(&e, 3).unwrap();
            for c in [1e-6, 1.0, 1e6] {
                let scaled = ErrorVector::new(errors.iter().map(|&x| x * c).collect(), Method::Pca).unwrap();
                let ws = select_weights(&scaled, 3).unwrap();
                proptest::prop_assert_eq!(&ws.support, &w.support);
            }
        }
    }
}
