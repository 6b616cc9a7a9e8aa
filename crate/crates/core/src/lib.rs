//! Evidential contextual classification of multispectral images.
//!
//! A pixelwise Gaussian preclassification is split into connected regions.
//! Each region's spatial features are turned into simple support functions
//! from training histograms, combined with Dempster's rule, and the region
//! is accepted or merged into its strongest neighbor until the labeling is
//! stable.

// `!(x >= 0.0)` is used on purpose: unlike `x < 0.0` it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod classifier;
pub mod error;
pub mod eval;
pub mod features;
pub mod mass_model;
pub mod pipeline;
pub mod raster;
pub mod regions;
pub mod synth;

pub use belief::{combine, combine_all, EvidentialInterval, FocalSet, Frame, MassFunction, SimpleSupport};
pub use classifier::{
    bayes_preclassify, evidential_classify, fit_gaussians, hypothesis_test, partition_bands, Classification, Decision,
    GaussianClassModel, PipelineConfig, RunReport,
};
pub use error::{Error, Result};
pub use eval::{accuracy_report, contingency, AccuracyReport, ContingencyTable, PrintedTable};
pub use features::{extract_features, FeatureConfig, FeatureId, RegionFeatures};
pub use mass_model::{fit_mass_model, MassModel, MassModelConfig, TrainingRow};
pub use raster::{read_labelmap, read_raster, write_labelmap, write_raster, LabelMap, Raster};
pub use regions::{AdjacencyGraph, Connectivity, Region, Segmentation};
pub use synth::{generate_scene, SceneSpec};
