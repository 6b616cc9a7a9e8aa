//! Gaussian maximum-likelihood preclassification and the evidential region
//! accept/merge loop.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::{combine_all, EvidentialInterval, Frame, MassFunction};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureExtractor, FeatureId, RegionFeatures};
use crate::mass_model::MassModel;
use crate::raster::{LabelMap, Raster};
use crate::regions::{Connectivity, Mask, Segmentation};

/// Ridge as a fraction of the mean covariance diagonal.
pub const RIDGE_FRACTION: f64 = 1e-3;
/// Smallest ridge ever added.
pub const RIDGE_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct GaussianClass {
    pub class: u8,
    pub pixels: usize,
    pub prior: f64,
    pub mean: Vec<f64>,
    /// Row-major `bands × bands`, ridge included.
    pub covariance: Vec<f64>,
    /// Diagonal load added to make the covariance positive definite.
    pub ridge: f64,
    whiten: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianClass {
    /// `log prior + log density` up to a constant shared by all classes.
    pub fn log_score(&self, pixel: &[f64]) -> f64 {
        let d = DVector::from_iterator(pixel.len(), pixel.iter().zip(&self.mean).map(|(x, m)| x - m));
        let z = &self.whiten * d;
        self.log_norm - 0.5 * z.norm_squared()
    }
}

#[derive(Clone, Debug)]
pub struct GaussianClassModel {
    frame: Frame,
    bands: usize,
    classes: Vec<GaussianClass>,
    excluded: Vec<u8>,
}

impl GaussianClassModel {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Classes with training pixels, ascending.
    pub fn classes(&self) -> &[GaussianClass] {
        &self.classes
    }

    /// Frame classes without training pixels.
    pub fn excluded(&self) -> &[u8] {
        &self.excluded
    }

    pub fn class(&self, class: u8) -> Option<&GaussianClass> {
        self.classes.iter().find(|c| c.class == class)
    }

    /// Most probable class; the lowest class id wins ties.
    pub fn classify(&self, pixel: &[f64]) -> u8 {
        let mut best = (f64::NEG_INFINITY, 0u8);
        for c in &self.classes {
            let score = c.log_score(pixel);
            if score > best.0 || best.1 == 0 {
                best = (score, c.class);
            }
        }
        best.1
    }
}

/// Per-class sample means, covariances and pixel-count priors from the
/// labeled pixels of `truth`.
pub fn fit_gaussians(raster: &Raster, truth: &LabelMap, frame: &Frame) -> Result<GaussianClassModel> {
    truth.check_shape(raster)?;
    truth.validate(frame)?;
    let bands = raster.bands();
    let k = frame.len();
    let mut sums = vec![vec![0.0; bands]; k];
    let mut counts = vec![0usize; k];
    for (i, &label) in truth.labels().iter().enumerate() {
        if label == 0 {
            continue;
        }
        let c = usize::from(label) - 1;
        counts[c] += 1;
        for (b, s) in sums[c].iter_mut().enumerate() {
            *s += f64::from(raster.band(b)[i]);
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| s.iter().map(|v| v / n.max(1) as f64).collect())
        .collect();
    let mut scatter = vec![DMatrix::<f64>::zeros(bands, bands); k];
    let mut d = vec![0.0; bands];
    for (i, &label) in truth.labels().iter().enumerate() {
        if label == 0 {
            continue;
        }
        let c = usize::from(label) - 1;
        for b in 0..bands {
            d[b] = f64::from(raster.band(b)[i]) - means[c][b];
        }
        let m = &mut scatter[c];
        for p in 0..bands {
            for q in 0..bands {
                m[(p, q)] += d[p] * d[q];
            }
        }
    }

    let mut classes = Vec::new();
    let mut excluded = Vec::new();
    for c in 0..k {
        let class = c as u8 + 1;
        let n = counts[c];
        if n == 0 {
            excluded.push(class);
            continue;
        }
        let cov = &scatter[c] / n as f64;
        let base_ridge = (RIDGE_FRACTION * cov.trace() / bands as f64).max(RIDGE_FLOOR);
        let mut ridge = if n < bands + 1 { base_ridge } else { 0.0 };
        let (cov, chol) = loop {
            let loaded = &cov + DMatrix::identity(bands, bands) * ridge;
            if let Some(chol) = loaded.clone().cholesky() {
                break (loaded, chol);
            }
            ridge = if ridge == 0.0 { base_ridge } else { ridge * 10.0 };
        };
        let l = chol.l();
        let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let whiten = l
            .solve_lower_triangular(&DMatrix::identity(bands, bands))
            .expect("cholesky factor is invertible");
        let prior = n as f64 / total as f64;
        classes.push(GaussianClass {
            class,
            pixels: n,
            prior,
            mean: means[c].clone(),
            covariance: cov.transpose().iter().copied().collect(),
            ridge,
            whiten,
            log_norm: prior.ln() - 0.5 * log_det,
        });
    }
    Ok(GaussianClassModel {
        frame: frame.clone(),
        bands,
        classes,
        excluded,
    })
}

/// Pixelwise maximum a posteriori labeling.
pub fn bayes_preclassify(raster: &Raster, model: &GaussianClassModel) -> Result<LabelMap> {
    if raster.bands() != model.bands {
        return Err(Error::DimensionMismatch(format!(
            "model has {} bands, raster has {}",
            model.bands,
            raster.bands()
        )));
    }
    let (height, width) = raster.shape();
    let labels: Vec<u8> = (0..height)
        .into_par_iter()
        .flat_map_iter(|r| (0..width).map(move |c| model.classify(&raster.pixel(r, c))))
        .collect();
    LabelMap::new(width, height, labels)
}

/// One binary mask per frame class, including classes absent from the map.
pub fn partition_bands(map: &LabelMap, frame: &Frame) -> Result<BTreeMap<u8, Mask>> {
    map.validate(frame)?;
    let mut masks: BTreeMap<u8, Mask> = (1..=frame.len() as u8)
        .map(|c| (c, Mask::new(map.width(), map.height())))
        .collect();
    for r in 0..map.height() {
        for c in 0..map.width() {
            let label = map.get(r, c);
            if label != 0 {
                masks.get_mut(&label).expect("validated").set(r, c, true);
            }
        }
    }
    Ok(masks)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub accept_spt: f64,
    pub accept_pls: f64,
    pub max_merge_iters: usize,
    pub connectivity: Connectivity,
    /// Histogram features that contribute evidence.
    pub features: Vec<FeatureId>,
    /// Whether neighbor classes contribute evidence.
    pub neighbor_evidence: bool,
    pub feature_config: FeatureConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            accept_spt: 0.5,
            accept_pls: 0.8,
            max_merge_iters: 100,
            connectivity: Connectivity::Four,
            features: vec![FeatureId::Size, FeatureId::Texture],
            neighbor_evidence: true,
            feature_config: FeatureConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.accept_spt > 0.0 && self.accept_spt <= self.accept_pls && self.accept_pls <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "thresholds must satisfy 0 < spt ({}) <= pls ({}) <= 1",
                self.accept_spt, self.accept_pls
            )));
        }
        if self.max_merge_iters == 0 {
            return Err(Error::InvalidArgument("max_merge_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub combined: MassFunction,
    pub interval: EvidentialInterval,
    pub accepted: bool,
    /// Set when the evidence was in total conflict; the region is rejected.
    pub conflict: bool,
}

/// Combines the enabled feature supports for `{hypothesis}` and applies the
/// acceptance thresholds. Features whose histograms are degenerate carry no
/// evidence and are skipped.
pub fn hypothesis_test(
    features: &RegionFeatures,
    hypothesis: u8,
    model: &MassModel,
    config: &PipelineConfig,
) -> Result<Decision> {
    let frame = model.frame();
    let focus = frame.singleton(usize::from(hypothesis).wrapping_sub(1))?;
    let mut masses = Vec::with_capacity(config.features.len() + 1);
    for &feature in &config.features {
        if model.is_degenerate(feature) {
            continue;
        }
        let value = features.value(feature).ok_or_else(|| Error::UnknownFeature {
            feature: feature.to_string(),
            class: frame.label(usize::from(hypothesis) - 1).unwrap_or("?").to_string(),
        })?;
        masses.push(model.feature_support(feature, value, hypothesis)?.to_mass(frame)?);
    }
    if config.neighbor_evidence {
        masses.push(
            model
                .neighbor_support(&features.neighbor_class_counts, hypothesis)?
                .to_mass(frame)?,
        );
    }
    match combine_all(frame, &masses) {
        Ok(combined) => {
            let interval = combined.interval(focus)?;
            let accepted = interval.spt >= config.accept_spt && interval.pls >= config.accept_pls;
            Ok(Decision {
                combined,
                interval,
                accepted,
                conflict: false,
            })
        }
        Err(Error::TotalConflict(_)) => Ok(Decision {
            combined: MassFunction::vacuous(frame),
            interval: EvidentialInterval { spt: 0.0, pls: 1.0 },
            accepted: false,
            conflict: true,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub region_id: u32,
    pub hypothesis: String,
    pub size: usize,
    pub spt: f64,
    pub pls: f64,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub conflict: bool,
    /// Region that absorbed this one during the pass.
    pub merged_into: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassReport {
    pub pass: usize,
    pub regions: usize,
    pub accepted: usize,
    /// Rejected regions merged into their strongest neighbor.
    pub merges: usize,
    /// Same-class neighbors fused with a region that grew.
    pub fusions: usize,
    pub decisions: Vec<DecisionRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AllAccepted,
    NoMerge,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub initial_regions: usize,
    pub final_regions: usize,
    pub iterations: usize,
    /// Merges plus fusions; never exceeds `initial_regions - 1`.
    pub merge_events: usize,
    pub stop_reason: StopReason,
    /// Regions rejected in the last pass that could not be merged.
    pub unresolved: Vec<u32>,
    pub passes: Vec<PassReport>,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub labels: LabelMap,
    pub report: RunReport,
}

/// Region-level accept/merge refinement of a preclassification.
///
/// Every pass tests all regions against a frozen snapshot, then merges the
/// rejected ones in ascending size order (ties by id) into the neighbor with
/// the longest shared boundary. A merged region takes the class of the
/// region that absorbed it, and the grown region also absorbs any adjacent
/// region of that class, so regions always stay the connected components of
/// the current labeling. A region that grew during a pass waits for the
/// next pass to be tested again.
pub fn evidential_classify(
    raster: &Raster,
    preclass: &LabelMap,
    model: &MassModel,
    config: &PipelineConfig,
) -> Result<Classification> {
    config.validate()?;
    preclass.check_shape(raster)?;
    preclass.validate(model.frame())?;
    if preclass.is_unlabeled() {
        return Err(Error::Unlabeled);
    }
    let frame = model.frame();
    let extractor = FeatureExtractor::new(raster, &config.feature_config)?;
    let mut seg = Segmentation::from_labelmap(preclass, config.connectivity);
    let initial_regions = seg.len();
    let mut cache: HashMap<u32, RegionFeatures> = HashMap::new();
    let mut passes = Vec::new();
    let mut merge_events = 0;
    let mut unresolved = Vec::new();
    let mut stop_reason = StopReason::IterationLimit;

    for pass in 1..=config.max_merge_iters {
        let stale: Vec<_> = seg.regions().filter(|r| !cache.contains_key(&r.id)).collect();
        let fresh = stale
            .par_iter()
            .map(|r| Ok((r.id, extractor.intrinsic(r)?)))
            .collect::<Result<Vec<_>>>()?;
        cache.extend(fresh);

        let classes = seg.classes();
        let ids: Vec<u32> = seg.regions().map(|r| r.id).collect();
        let decisions = ids
            .par_iter()
            .map(|&id| {
                let region = seg.region(id).expect("live region");
                let mut features = cache[&id].clone();
                features.neighbor_class_counts = crate::features::neighbor_class_feature(id, seg.graph(), &classes)?;
                let decision = hypothesis_test(&features, region.class, model, config)?;
                Ok(DecisionRecord {
                    region_id: id,
                    hypothesis: frame.label(usize::from(region.class) - 1).unwrap_or("?").to_string(),
                    size: region.size(),
                    spt: decision.interval.spt,
                    pls: decision.interval.pls,
                    accepted: decision.accepted,
                    conflict: decision.conflict,
                    merged_into: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let accepted = decisions.iter().filter(|d| d.accepted).count();
        let mut report = PassReport {
            pass,
            regions: decisions.len(),
            accepted,
            merges: 0,
            fusions: 0,
            decisions,
        };
        if accepted == report.regions {
            passes.push(report);
            stop_reason = StopReason::AllAccepted;
            break;
        }

        let mut order: Vec<usize> = (0..report.decisions.len())
            .filter(|&i| !report.decisions[i].accepted)
            .collect();
        order.sort_by_key(|&i| (report.decisions[i].size, report.decisions[i].region_id));
        let mut grown: BTreeSet<u32> = BTreeSet::new();
        unresolved.clear();
        for i in order {
            let id = report.decisions[i].region_id;
            if grown.contains(&id) || seg.region(id).is_none() {
                continue;
            }
            let Some(target) = seg.merge_target(id) else {
                unresolved.push(id);
                continue;
            };
            seg.merge(id, target)?;
            cache.remove(&id);
            cache.remove(&target);
            grown.insert(target);
            report.decisions[i].merged_into = Some(target);
            report.merges += 1;
            report.fusions += fuse_same_class(&mut seg, target, &mut cache)?;
        }
        merge_events += report.merges + report.fusions;
        let merged = report.merges;
        passes.push(report);
        if merged == 0 {
            stop_reason = StopReason::NoMerge;
            break;
        }
        unresolved.clear();
    }

    let report = RunReport {
        initial_regions,
        final_regions: seg.len(),
        iterations: passes.len(),
        merge_events,
        stop_reason,
        unresolved,
        passes,
    };
    Ok(Classification {
        labels: seg.to_labelmap(),
        report,
    })
}

/// Absorbs every neighbor of `id` that has the same class; returns how many.
fn fuse_same_class(seg: &mut Segmentation, id: u32, cache: &mut HashMap<u32, RegionFeatures>) -> Result<usize> {
    let class = seg.region(id).expect("live region").class;
    let mut fused = 0;
    loop {
        let same: Vec<u32> = seg
            .graph()
            .neighbors(id)
            .map(|(n, _)| n)
            .filter(|&n| seg.region(n).is_some_and(|r| r.class == class))
            .collect();
        if same.is_empty() {
            return Ok(fused);
        }
        for n in same {
            seg.merge(n, id)?;
            cache.remove(&n);
            fused += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass_model::{fit_mass_model, MassModelConfig, TrainingRow};

    fn frame2() -> Frame {
        Frame::new(["WHT", "ALF"]).unwrap()
    }

    #[test]
    fn constant_class_fits_ridge_only() {
        let raster = Raster::from_fn(4, 4, 2, |b, _, _| 50 + b as u16).unwrap();
        let truth = LabelMap::filled(4, 4, 1).unwrap();
        let model = fit_gaussians(&raster, &truth, &frame2()).unwrap();
        let c = model.class(1).unwrap();
        assert_eq!(c.mean, vec![50.0, 51.0]);
        assert_eq!(c.covariance, vec![RIDGE_FLOOR, 0.0, 0.0, RIDGE_FLOOR]);
        assert_eq!(c.prior, 1.0);
        assert_eq!(model.excluded(), &[2]);
    }

    #[test]
    fn priors_and_ties() {
        // class 1 at 0 and 2, class 2 at 8 and 10: identical spreads
        let raster = Raster::from_fn(4, 1, 1, |_, _, c| [0, 2, 8, 10][c]).unwrap();
        let truth = LabelMap::new(4, 1, vec![1, 1, 2, 2]).unwrap();
        let model = fit_gaussians(&raster, &truth, &frame2()).unwrap();
        let priors: f64 = model.classes().iter().map(|c| c.prior).sum();
        assert!((priors - 1.0).abs() < 1e-12);
        assert_eq!(model.classify(&[1.0]), 1);
        assert_eq!(model.classify(&[9.0]), 2);
        assert_eq!(model.classify(&[5.0]), 1);
    }

    #[test]
    fn bayes_reproduces_noiseless_truth() {
        let truth = LabelMap::new(4, 2, vec![1, 1, 2, 2, 1, 2, 2, 1]).unwrap();
        let raster = Raster::from_fn(4, 2, 3, |b, r, c| if truth.get(r, c) == 1 { 40 + b as u16 } else { 60 }).unwrap();
        let model = fit_gaussians(&raster, &truth, &frame2()).unwrap();
        assert_eq!(bayes_preclassify(&raster, &model).unwrap(), truth);
        let wrong = Raster::from_fn(4, 2, 2, |_, _, _| 0).unwrap();
        assert!(bayes_preclassify(&wrong, &model).is_err());
    }

    #[test]
    fn partition_is_total_and_disjoint() {
        let frame = Frame::new(["a", "b", "c"]).unwrap();
        let map = LabelMap::new(3, 2, vec![1, 0, 2, 2, 1, 0]).unwrap();
        let masks = partition_bands(&map, &frame).unwrap();
        assert_eq!(masks.len(), 3);
        assert_eq!(masks[&1].count() + masks[&2].count(), map.labeled_count());
        assert_eq!(masks[&3].count(), 0);
        let bad = LabelMap::new(1, 1, vec![4]).unwrap();
        assert!(partition_bands(&bad, &frame).is_err());
    }

    /// Rows of `(class, size, weight)`.
    fn size_model(frame: &Frame, sizes: &[(u8, usize, f64)], pairs: &[(u8, u8)]) -> MassModel {
        let rows: Vec<TrainingRow> = sizes
            .iter()
            .map(|&(class, size, weight)| TrainingRow {
                class,
                verified: true,
                weight,
                features: RegionFeatures {
                    size,
                    texture: 0.0,
                    fit: 1.0,
                    elong: 1.0,
                    direc: 0.0,
                    compactness: 0.5,
                    spectral_mean: vec![0.0],
                    neighbor_class_counts: BTreeMap::new(),
                },
            })
            .collect();
        fit_mass_model(&rows, pairs, frame, &MassModelConfig::default()).unwrap()
    }

    fn size_only() -> PipelineConfig {
        PipelineConfig {
            features: vec![FeatureId::Size],
            neighbor_evidence: false,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn hypothesis_closed_forms() {
        let frame = frame2();
        let model = size_model(
            &frame,
            &[(1, 1, 1.0), (1, 100, 100.0), (2, 1, 1.0), (2, 100, 100.0)],
            &[(1, 2)],
        );
        let none = PipelineConfig {
            features: vec![],
            neighbor_evidence: false,
            ..PipelineConfig::default()
        };
        let f = RegionFeatures {
            size: 100,
            texture: 0.0,
            fit: 1.0,
            elong: 1.0,
            direc: 0.0,
            compactness: 0.5,
            spectral_mean: vec![0.0],
            neighbor_class_counts: BTreeMap::new(),
        };
        let d = hypothesis_test(&f, 1, &model, &none).unwrap();
        assert_eq!(d.interval, EvidentialInterval { spt: 0.0, pls: 1.0 });
        assert!(!d.accepted);
        let d = hypothesis_test(&f, 1, &model, &size_only()).unwrap();
        assert!((d.interval.spt - 0.95).abs() < 1e-12);
        assert_eq!(d.interval.pls, 1.0);
        assert!(d.accepted);
        // degenerate features add nothing
        let texture = PipelineConfig {
            features: vec![FeatureId::Texture],
            ..none
        };
        assert_eq!(hypothesis_test(&f, 1, &model, &texture).unwrap().interval.spt, 0.0);
        let missing = PipelineConfig {
            features: vec![FeatureId::SpectralMean(3)],
            neighbor_evidence: false,
            ..PipelineConfig::default()
        };
        assert!(hypothesis_test(&f, 1, &model, &missing).is_err());
    }

    fn field_with_speckle() -> (Raster, LabelMap) {
        let mut labels = vec![1u8; 20 * 20];
        for r in 0..20 {
            for c in 10..20 {
                labels[r * 20 + c] = 2;
            }
        }
        labels[5 * 20 + 4] = 2;
        let raster = Raster::from_fn(20, 20, 1, |_, _, _| 100).unwrap();
        (raster, LabelMap::new(20, 20, labels).unwrap())
    }

    #[test]
    fn isolated_pixel_is_absorbed() {
        let frame = frame2();
        let model = size_model(
            &frame,
            &[(1, 199, 199.0), (2, 200, 200.0), (1, 190, 190.0), (2, 1, 1.0)],
            &[(1, 2)],
        );
        let (raster, pre) = field_with_speckle();
        let out = evidential_classify(&raster, &pre, &model, &size_only()).unwrap();
        assert_eq!(out.labels.get(5, 4), 1);
        assert_eq!(out.labels.labeled_count(), pre.labeled_count());
        assert_eq!(out.report.final_regions, 2);
        assert!(out.report.merge_events < out.report.initial_regions);
        // rerunning on the result changes nothing
        let again = evidential_classify(&raster, &out.labels, &model, &size_only()).unwrap();
        assert_eq!(again.labels, out.labels);
        assert_eq!(again.report.merge_events, 0);
    }

    #[test]
    fn accepted_scene_is_unchanged_and_limit_holds() {
        let frame = frame2();
        let (raster, pre) = field_with_speckle();
        // zero-weight rows leave only smoothing: uniform size evidence
        let model = size_model(&frame, &[(1, 1, 0.0), (2, 400, 0.0)], &[]);
        let out = evidential_classify(&raster, &pre, &model, &size_only()).unwrap();
        assert_eq!(out.labels, pre);
        assert_eq!(out.report.merge_events, 0);
        assert_eq!(out.report.stop_reason, StopReason::AllAccepted);

        let strict = PipelineConfig {
            max_merge_iters: 1,
            accept_spt: 1.0,
            accept_pls: 1.0,
            ..size_only()
        };
        let out = evidential_classify(&raster, &pre, &model, &strict).unwrap();
        assert_eq!(out.report.iterations, 1);
    }

    #[test]
    fn classify_rejects_bad_inputs() {
        let frame = frame2();
        let model = size_model(&frame, &[(1, 5, 5.0), (2, 5, 5.0)], &[]);
        let raster = Raster::from_fn(3, 3, 1, |_, _, _| 0).unwrap();
        let empty = LabelMap::filled(3, 3, 0).unwrap();
        assert!(matches!(
            evidential_classify(&raster, &empty, &model, &size_only()),
            Err(Error::Unlabeled)
        ));
        let small = LabelMap::filled(2, 3, 1).unwrap();
        assert!(evidential_classify(&raster, &small, &model, &size_only()).is_err());
        let bad = PipelineConfig {
            accept_spt: 0.9,
            accept_pls: 0.8,
            ..size_only()
        };
        assert!(evidential_classify(&raster, &LabelMap::filled(3, 3, 1).unwrap(), &model, &bad).is_err());
    }
}
