//! Stage glue shared by the command line tool and the tests: training
//! subsets, training rows for the mass model and a full scene run.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::Frame;
use crate::classifier::{bayes_preclassify, evidential_classify, fit_gaussians, PipelineConfig, RunReport};
use crate::error::{Error, Result};
use crate::eval::{accuracy_report, contingency, ContingencyTable};
use crate::features::FeatureExtractor;
use crate::mass_model::{fit_mass_model, MassModel, MassModelConfig, TrainingRow};
use crate::raster::{LabelMap, Raster};
use crate::regions::{class_pairs, Connectivity, Segmentation};
use crate::synth::{generate_scene, SceneSpec};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.3;

/// Keeps a seeded random subset of the ground truth regions: for each
/// class, `ceil(fraction × regions)` of its regions and never fewer than
/// one. Everything else becomes unlabeled.
pub fn select_training_regions(truth: &LabelMap, fraction: f64, seed: u64, conn: Connectivity) -> Result<LabelMap> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "training fraction {fraction} outside (0, 1]"
        )));
    }
    if truth.is_unlabeled() {
        return Err(Error::Unlabeled);
    }
    let seg = Segmentation::from_labelmap(truth, conn);
    let mut by_class: BTreeMap<u8, Vec<u32>> = BTreeMap::new();
    for region in seg.regions() {
        by_class.entry(region.class).or_default().push(region.id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LabelMap::filled(truth.width(), truth.height(), 0)?;
    for (class, mut ids) in by_class {
        ids.shuffle(&mut rng);
        let keep = ((fraction * ids.len() as f64).ceil() as usize).clamp(1, ids.len());
        for &id in &ids[..keep] {
            for &(r, c) in seg.region(id).expect("listed region").pixels() {
                out.set(r, c, class);
            }
        }
    }
    Ok(out)
}

/// `map` with every pixel that is labeled in `mask` cleared, or kept when
/// `keep` is set.
pub fn mask_labels(map: &LabelMap, mask: &LabelMap, keep: bool) -> Result<LabelMap> {
    if map.shape() != mask.shape() {
        return Err(Error::DimensionMismatch(format!(
            "label maps are {}x{} and {}x{}",
            map.width(),
            map.height(),
            mask.width(),
            mask.height()
        )));
    }
    let labels = map
        .labels()
        .iter()
        .zip(mask.labels())
        .map(|(&l, &m)| if (m != 0) == keep { l } else { 0 })
        .collect();
    LabelMap::new(map.width(), map.height(), labels)
}

/// Regions of `preclass` inside the labeled area of `train_truth`, each
/// marked verified when its class matches the majority truth label of its
/// pixels and weighted by its pixel count.
pub fn training_rows(
    raster: &Raster,
    preclass: &LabelMap,
    train_truth: &LabelMap,
    extractor: &FeatureExtractor<'_>,
    conn: Connectivity,
) -> Result<Vec<TrainingRow>> {
    preclass.check_shape(raster)?;
    train_truth.check_shape(raster)?;
    let area = mask_labels(preclass, train_truth, true)?;
    let seg = Segmentation::from_labelmap(&area, conn);
    let classes = seg.classes();
    let regions: Vec<_> = seg.regions().collect();
    regions
        .par_iter()
        .map(|region| {
            let mut votes = [0usize; 256];
            for &(r, c) in region.pixels() {
                votes[usize::from(train_truth.get(r, c))] += 1;
            }
            let majority = (1..256).max_by_key(|&l| (votes[l], std::cmp::Reverse(l))).unwrap_or(0);
            Ok(TrainingRow {
                class: region.class,
                verified: majority == usize::from(region.class),
                weight: region.size() as f64,
                features: extractor.extract(region, seg.graph(), &classes)?,
            })
        })
        .collect()
}

/// Class pairs of adjacent ground truth regions.
pub fn truth_class_pairs(train_truth: &LabelMap, conn: Connectivity) -> Vec<(u8, u8)> {
    class_pairs(&Segmentation::from_labelmap(train_truth, conn))
}

/// Fits the mass model from a training subset of the ground truth. Without
/// a preclassification, one is produced by a Gaussian model fitted on the
/// same subset.
pub fn fit_model(
    raster: &Raster,
    train_truth: &LabelMap,
    frame: &Frame,
    preclass: Option<&LabelMap>,
    pipeline: &PipelineConfig,
    mass: &MassModelConfig,
) -> Result<MassModel> {
    train_truth.validate(frame)?;
    let owned;
    let preclass = match preclass {
        Some(p) => p,
        None => {
            let gaussians = fit_gaussians(raster, train_truth, frame)?;
            owned = bayes_preclassify(raster, &gaussians)?;
            &owned
        }
    };
    let extractor = FeatureExtractor::new(raster, &pipeline.feature_config)?;
    let rows = training_rows(raster, preclass, train_truth, &extractor, pipeline.connectivity)?;
    let pairs = truth_class_pairs(train_truth, pipeline.connectivity);
    fit_mass_model(&rows, &pairs, frame, mass)
}

/// Accuracy of the two stages on one scene.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneOutcome {
    pub seed: u64,
    /// Overall accuracy in percent on pixels outside the training subset.
    pub bayes_accuracy: f64,
    pub evidential_accuracy: f64,
    pub initial_regions: usize,
    pub final_regions: usize,
    pub iterations: usize,
}

/// Everything produced by [`run_scene`].
pub struct SceneRun {
    pub raster: Raster,
    pub truth: LabelMap,
    pub train_truth: LabelMap,
    pub preclass: LabelMap,
    pub model: MassModel,
    pub refined: LabelMap,
    pub report: RunReport,
    pub bayes_table: ContingencyTable,
    pub evidential_table: ContingencyTable,
    pub outcome: SceneOutcome,
}

/// Generate, train, preclassify, refine and score one scene. Scores count
/// only pixels outside the training subset.
pub fn run_scene(
    spec: &SceneSpec,
    train_fraction: f64,
    pipeline: &PipelineConfig,
    mass: &MassModelConfig,
) -> Result<SceneRun> {
    let (raster, truth) = generate_scene(spec)?;
    let frame = &spec.frame;
    let train_truth = select_training_regions(&truth, train_fraction, spec.seed, pipeline.connectivity)?;
    let gaussians = fit_gaussians(&raster, &train_truth, frame)?;
    let preclass = bayes_preclassify(&raster, &gaussians)?;
    let model = fit_model(&raster, &train_truth, frame, Some(&preclass), pipeline, mass)?;
    let result = evidential_classify(&raster, &preclass, &model, pipeline)?;
    let test_truth = mask_labels(&truth, &train_truth, false)?;
    let bayes_table = contingency(&test_truth, &preclass, frame)?;
    let evidential_table = contingency(&test_truth, &result.labels, frame)?;
    let outcome = SceneOutcome {
        seed: spec.seed,
        bayes_accuracy: accuracy_report(&bayes_table)?.overall,
        evidential_accuracy: accuracy_report(&evidential_table)?.overall,
        initial_regions: result.report.initial_regions,
        final_regions: result.report.final_regions,
        iterations: result.report.iterations,
    };
    Ok(SceneRun {
        raster,
        truth,
        train_truth,
        preclass,
        model,
        refined: result.labels,
        report: result.report,
        bayes_table,
        evidential_table,
        outcome,
    })
}
