//! Histogram evidence model: per (feature, class) histograms turned into
//! simple support degrees, plus a class transition matrix for adjacency
//! evidence.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::belief::{Frame, SimpleSupport};
use crate::error::{Error, Result};
use crate::features::{FeatureId, RegionFeatures};

pub const DEFAULT_BINS: usize = 16;
pub const DEFAULT_SUPPORT_CAP: f64 = 0.95;
pub const DEFAULT_SMOOTHING: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MassModelConfig {
    pub bins: usize,
    pub support_cap: f64,
    pub smoothing: f64,
    /// Bin region size on a logarithmic axis.
    pub log_size: bool,
    /// Size support never decreases above the modal bin: a region larger
    /// than the typical training region is not penalized for it.
    pub monotone_size: bool,
}

impl Default for MassModelConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            support_cap: DEFAULT_SUPPORT_CAP,
            smoothing: DEFAULT_SMOOTHING,
            log_size: true,
            monotone_size: true,
        }
    }
}

/// Axis on which a histogram's edges are laid out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    /// Natural logarithm of the value; values below 1 are treated as 1.
    Log,
}

impl Scale {
    pub fn apply(self, value: f64) -> f64 {
        match self {
            Scale::Linear => value,
            Scale::Log => value.max(1.0).ln(),
        }
    }
}

impl MassModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 {
            return Err(Error::InvalidArgument("histogram bin count must be positive".into()));
        }
        if !(self.support_cap > 0.0 && self.support_cap < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "support cap {} outside (0, 1)",
                self.support_cap
            )));
        }
        if !(self.smoothing >= 0.0) || !self.smoothing.is_finite() {
            return Err(Error::InvalidArgument(format!("smoothing {} < 0", self.smoothing)));
        }
        Ok(())
    }
}

/// One training region.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingRow {
    /// Class label (1-based, as in label maps).
    pub class: u8,
    /// Whether the label agrees with ground truth. Unverified rows only
    /// widen the histogram range.
    pub verified: bool,
    /// Histogram weight, normally the pixel count.
    pub weight: f64,
    pub features: RegionFeatures,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureHistogram {
    #[serde(default, skip_serializing_if = "is_linear")]
    pub scale: Scale,
    /// Edges on the histogram's scale.
    pub edges: Vec<f64>,
    pub freq: Vec<f64>,
    /// Set when the feature was constant over the training data; the
    /// histogram then has a single bin and carries no evidence.
    #[serde(default)]
    pub degenerate: bool,
}

fn is_linear(scale: &Scale) -> bool {
    *scale == Scale::Linear
}

impl FeatureHistogram {
    /// Smoothed, normalized histogram of weighted values over fixed edges.
    /// Values must already be on the histogram's scale.
    pub fn from_weighted(edges: Vec<f64>, values: &[(f64, f64)], smoothing: f64) -> Self {
        let bins = edges.len() - 1;
        let mut counts = vec![smoothing; bins];
        for &(v, w) in values {
            counts[bin_index(&edges, v)] += w;
        }
        let total: f64 = counts.iter().sum();
        let freq = if total > 0.0 {
            counts.iter().map(|c| c / total).collect()
        } else {
            vec![1.0 / bins as f64; bins]
        };
        Self {
            scale: Scale::Linear,
            edges,
            freq,
            degenerate: false,
        }
    }

    pub fn uniform(edges: Vec<f64>) -> Self {
        let bins = edges.len() - 1;
        Self {
            scale: Scale::Linear,
            edges,
            freq: vec![1.0 / bins as f64; bins],
            degenerate: false,
        }
    }

    pub fn bins(&self) -> usize {
        self.freq.len()
    }

    /// Bin of a raw feature value; values outside the range clamp to the
    /// end bins.
    pub fn bin_of(&self, value: f64) -> usize {
        bin_index(&self.edges, self.scale.apply(value))
    }

    pub fn max_freq(&self) -> f64 {
        self.freq.iter().cloned().fold(0.0, f64::max)
    }

    fn check(&self) -> Result<()> {
        let bins = self.freq.len();
        if bins == 0 || self.edges.len() != bins + 1 {
            return Err(Error::InvalidArgument(format!(
                "histogram with {} edges and {bins} bins",
                self.edges.len()
            )));
        }
        if self.edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("histogram edges must increase strictly".into()));
        }
        if self.freq.iter().any(|f| !(*f >= 0.0)) {
            return Err(Error::InvalidArgument("negative histogram frequency".into()));
        }
        let total: f64 = self.freq.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("histogram frequencies sum to {total}")));
        }
        Ok(())
    }
}

fn bin_index(edges: &[f64], value: f64) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    if !(value > lo) {
        return 0;
    }
    if value >= hi {
        return bins - 1;
    }
    // first edge strictly above the value, minus one
    let upper = edges.partition_point(|&e| e <= value);
    (upper - 1).min(bins - 1)
}

/// `bins + 1` equal-width edges over `[lo, hi]`; a constant range becomes
/// a single unit-width bin.
pub fn equal_width_edges(lo: f64, hi: f64, bins: usize) -> (Vec<f64>, bool) {
    if !(hi > lo) {
        return (vec![lo - 0.5, lo + 0.5], true);
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    (edges, false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassModel {
    frame: Frame,
    config: MassModelConfig,
    features: Vec<FeatureId>,
    histograms: BTreeMap<(FeatureId, u8), FeatureHistogram>,
    /// Row-major `len × len`; `transition[i][j]` is the probability that a
    /// neighbor of class `i + 1` has class `j + 1`.
    transition: Vec<Vec<f64>>,
    sparse: BTreeSet<u8>,
}

impl MassModel {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn config(&self) -> &MassModelConfig {
        &self.config
    }

    pub fn support_cap(&self) -> f64 {
        self.config.support_cap
    }

    pub fn features(&self) -> &[FeatureId] {
        &self.features
    }

    pub fn histogram(&self, feature: FeatureId, class: u8) -> Option<&FeatureHistogram> {
        self.histograms.get(&(feature, class))
    }

    pub fn is_degenerate(&self, feature: FeatureId) -> bool {
        self.histograms
            .range((feature, 0)..=(feature, u8::MAX))
            .next()
            .is_some_and(|(_, h)| h.degenerate)
    }

    pub fn transition(&self, from: u8, to: u8) -> Result<f64> {
        let (i, j) = (self.class_index(from)?, self.class_index(to)?);
        Ok(self.transition[i][j])
    }

    pub fn transition_matrix(&self) -> &[Vec<f64>] {
        &self.transition
    }

    /// Classes without verified training regions.
    pub fn sparse_classes(&self) -> &BTreeSet<u8> {
        &self.sparse
    }

    fn class_index(&self, class: u8) -> Result<usize> {
        let i = usize::from(class).wrapping_sub(1);
        if i < self.frame.len() {
            Ok(i)
        } else {
            Err(Error::UnknownClass(class.to_string()))
        }
    }

    fn class_label(&self, class: u8) -> String {
        self.frame
            .label(usize::from(class).wrapping_sub(1))
            .map_or_else(|| class.to_string(), str::to_string)
    }

    /// Support for `{class}` from one feature value, scaled so the modal
    /// bin gets `support_cap`.
    pub fn feature_support(&self, feature: FeatureId, value: f64, class: u8) -> Result<SimpleSupport> {
        let focus = self.frame.singleton(self.class_index(class)?)?;
        let hist = self.histogram(feature, class).ok_or_else(|| Error::UnknownFeature {
            feature: feature.to_string(),
            class: self.class_label(class),
        })?;
        let max = hist.max_freq();
        let bin = hist.bin_of(value);
        let freq = if feature == FeatureId::Size && self.config.monotone_size {
            hist.freq[..=bin].iter().cloned().fold(0.0, f64::max)
        } else {
            hist.freq[bin]
        };
        let degree = if max > 0.0 {
            self.config.support_cap * (freq / max)
        } else {
            0.0
        };
        SimpleSupport::new(focus, degree.clamp(0.0, self.config.support_cap))
    }

    /// Support for `{class}` from the classes of adjacent regions: the
    /// count-weighted mean transition probability toward `class`, scaled by
    /// `support_cap`. No neighbors gives a vacuous support.
    pub fn neighbor_support(&self, neighbor_counts: &BTreeMap<u8, u32>, class: u8) -> Result<SimpleSupport> {
        let j = self.class_index(class)?;
        let focus = self.frame.singleton(j)?;
        let (mut weighted, mut total) = (0.0, 0u64);
        for (&n, &count) in neighbor_counts {
            let i = self.class_index(n)?;
            weighted += f64::from(count) * self.transition[i][j];
            total += u64::from(count);
        }
        if total == 0 {
            return Ok(SimpleSupport::vacuous(focus));
        }
        let degree = self.config.support_cap * (weighted / total as f64);
        SimpleSupport::new(focus, degree.clamp(0.0, self.config.support_cap))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

/// Builds a model from training regions and adjacent class pairs.
///
/// Edges are shared by all classes of a feature and span the values of
/// every row. Verified rows fill the histogram of their class with their
/// weight. A class with no verified row is marked sparse and gets uniform
/// histograms. `class_pairs` lists the classes of adjacent ground truth
/// regions, one entry per adjacency.
pub fn fit_mass_model(
    rows: &[TrainingRow],
    class_pairs: &[(u8, u8)],
    frame: &Frame,
    config: &MassModelConfig,
) -> Result<MassModel> {
    config.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let k = frame.len();
    let check_class = |c: u8| {
        if (1..=k).contains(&usize::from(c)) {
            Ok(())
        } else {
            Err(Error::LabelOutsideFrame { label: c, frame_len: k })
        }
    };
    for row in rows {
        check_class(row.class)?;
        if !(row.weight >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative row weight {}", row.weight)));
        }
    }
    let bands = rows[0].features.spectral_mean.len();
    if rows.iter().any(|r| r.features.spectral_mean.len() != bands) {
        return Err(Error::DimensionMismatch("training rows disagree on band count".into()));
    }
    let features = FeatureId::all(bands);
    let classes: Vec<u8> = (1..=k as u8).collect();
    let sparse: BTreeSet<u8> = classes
        .iter()
        .copied()
        .filter(|&c| !rows.iter().any(|r| r.verified && r.class == c))
        .collect();

    let mut histograms = BTreeMap::new();
    for &feature in &features {
        let scale = if feature == FeatureId::Size && config.log_size {
            Scale::Log
        } else {
            Scale::Linear
        };
        let value = |r: &TrainingRow| scale.apply(r.features.value(feature).expect("band checked"));
        let (lo, hi) = rows
            .iter()
            .map(value)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let (edges, degenerate) = equal_width_edges(lo, hi, config.bins);
        for &class in &classes {
            let mut hist = if sparse.contains(&class) {
                FeatureHistogram::uniform(edges.clone())
            } else {
                let values: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.verified && r.class == class)
                    .map(|r| (value(r), r.weight))
                    .collect();
                FeatureHistogram::from_weighted(edges.clone(), &values, config.smoothing)
            };
            hist.degenerate = degenerate;
            hist.scale = scale;
            histograms.insert((feature, class), hist);
        }
    }

    let mut counts = vec![vec![config.smoothing; k]; k];
    for &(a, b) in class_pairs {
        check_class(a)?;
        check_class(b)?;
        let (i, j) = (usize::from(a) - 1, usize::from(b) - 1);
        counts[i][j] += 1.0;
        counts[j][i] += 1.0;
    }
    let transition = counts
        .into_iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter().map(|c| c / total).collect()
            } else {
                vec![1.0 / k as f64; k]
            }
        })
        .collect();

    Ok(MassModel {
        frame: frame.clone(),
        config: config.clone(),
        features,
        histograms,
        transition,
        sparse,
    })
}

#[derive(Serialize, Deserialize)]
struct MassModelDocument {
    frame: Frame,
    bins: usize,
    support_cap: f64,
    smoothing: f64,
    #[serde(default = "enabled")]
    log_size: bool,
    #[serde(default = "enabled")]
    monotone_size: bool,
    features: Vec<FeatureId>,
    histograms: BTreeMap<String, FeatureHistogram>,
    transition: Vec<Vec<f64>>,
    sparse: Vec<String>,
}

fn enabled() -> bool {
    true
}

impl Serialize for MassModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MassModelDocument {
            frame: self.frame.clone(),
            bins: self.config.bins,
            support_cap: self.config.support_cap,
            smoothing: self.config.smoothing,
            log_size: self.config.log_size,
            monotone_size: self.config.monotone_size,
            features: self.features.clone(),
            histograms: self
                .histograms
                .iter()
                .map(|(&(f, c), h)| (format!("{f}:{}", self.class_label(c)), h.clone()))
                .collect(),
            transition: self.transition.clone(),
            sparse: self.sparse.iter().map(|&c| self.class_label(c)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MassModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = MassModelDocument::deserialize(deserializer)?;
        let frame = doc.frame;
        let class_of = |label: &str| {
            frame
                .index_of(label)
                .map(|i| i as u8 + 1)
                .ok_or_else(|| D::Error::custom(format!("unknown class {label:?}")))
        };
        let config = MassModelConfig {
            bins: doc.bins,
            support_cap: doc.support_cap,
            smoothing: doc.smoothing,
            log_size: doc.log_size,
            monotone_size: doc.monotone_size,
        };
        config.validate().map_err(D::Error::custom)?;
        let mut histograms = BTreeMap::new();
        for (key, hist) in doc.histograms {
            let (feature, label) = key
                .split_once(':')
                .ok_or_else(|| D::Error::custom(format!("histogram key {key:?} is not feature:class")))?;
            let feature: FeatureId = feature.parse().map_err(D::Error::custom)?;
            hist.check().map_err(|e| D::Error::custom(format!("{key}: {e}")))?;
            histograms.insert((feature, class_of(label)?), hist);
        }
        let k = frame.len();
        for &feature in &doc.features {
            for class in 1..=k as u8 {
                if !histograms.contains_key(&(feature, class)) {
                    return Err(D::Error::custom(format!(
                        "missing histogram {feature}:{}",
                        frame.label(usize::from(class) - 1).unwrap_or("?")
                    )));
                }
            }
        }
        if doc.transition.len() != k || doc.transition.iter().any(|r| r.len() != k) {
            return Err(D::Error::custom(format!("transition matrix must be {k}x{k}")));
        }
        for row in &doc.transition {
            let total: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return Err(D::Error::custom("transition rows must be distributions"));
            }
        }
        let sparse = doc.sparse.iter().map(|l| class_of(l)).collect::<Result<_, _>>()?;
        Ok(MassModel {
            frame,
            config,
            features: doc.features,
            histograms,
            transition: doc.transition,
            sparse,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features(size: usize) -> RegionFeatures {
        RegionFeatures {
            size,
            texture: 0.1,
            fit: 1.0,
            elong: 1.0,
            direc: 0.0,
            compactness: 0.5,
            spectral_mean: vec![size as f64],
            neighbor_class_counts: BTreeMap::new(),
        }
    }

    fn row(class: u8, size: usize) -> TrainingRow {
        TrainingRow {
            class,
            verified: true,
            weight: 1.0,
            features: features(size),
        }
    }

    fn frame2() -> Frame {
        Frame::new(["WHT", "ALF"]).unwrap()
    }

    #[test]
    fn edges_and_bins() {
        let (edges, degenerate) = equal_width_edges(0.0, 16.0, 16);
        assert!(!degenerate);
        assert_eq!(edges.len(), 17);
        assert_eq!(edges[16], 16.0);
        let h = FeatureHistogram::uniform(edges);
        assert_eq!(h.bin_of(-5.0), 0);
        assert_eq!(h.bin_of(0.0), 0);
        assert_eq!(h.bin_of(0.99), 0);
        assert_eq!(h.bin_of(1.0), 1);
        assert_eq!(h.bin_of(15.5), 15);
        assert_eq!(h.bin_of(16.0), 15);
        assert_eq!(h.bin_of(99.0), 15);
        let (edges, degenerate) = equal_width_edges(3.0, 3.0, 16);
        assert!(degenerate);
        assert_eq!(edges, vec![2.5, 3.5]);
    }

    #[test]
    fn hand_built_histogram_supports() {
        // frequencies 0.4, 0.2, 0.3, 0.1 over four bins
        let mut model = MassModel {
            frame: frame2(),
            config: MassModelConfig {
                monotone_size: false,
                ..MassModelConfig::default()
            },
            features: vec![FeatureId::Size],
            histograms: BTreeMap::from([
                (
                    (FeatureId::Size, 1),
                    FeatureHistogram {
                        scale: Scale::Linear,
                        edges: vec![0.0, 1.0, 2.0, 3.0, 4.0],
                        freq: vec![0.4, 0.2, 0.3, 0.1],
                        degenerate: false,
                    },
                ),
                (
                    (FeatureId::Size, 2),
                    FeatureHistogram::uniform(vec![0.0, 1.0, 2.0, 3.0, 4.0]),
                ),
            ]),
            transition: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            sparse: BTreeSet::new(),
        };
        let s = |v: f64| model.feature_support(FeatureId::Size, v, 1).unwrap().degree;
        assert_eq!(s(0.5), 0.95);
        assert!((s(1.5) - 0.475).abs() < 1e-12);
        assert!((s(3.5) - 0.2375).abs() < 1e-12);
        assert_eq!(s(-10.0), 0.95);
        model.config.monotone_size = true;
        let s = |v: f64| model.feature_support(FeatureId::Size, v, 1).unwrap().degree;
        assert_eq!((s(1.5), s(3.5)), (0.95, 0.95));
        model.histograms.get_mut(&(FeatureId::Size, 1)).unwrap().freq = vec![0.1, 0.4, 0.2, 0.3];
        let s = |v: f64| model.feature_support(FeatureId::Size, v, 1).unwrap().degree;
        assert!((s(0.5) - 0.2375).abs() < 1e-12);
        assert_eq!((s(1.5), s(2.5), s(3.5)), (0.95, 0.95, 0.95));
        assert!(matches!(
            model.feature_support(FeatureId::Texture, 0.0, 1),
            Err(Error::UnknownFeature { .. })
        ));
        assert!(model.feature_support(FeatureId::Size, 0.0, 3).is_err());
    }

    #[test]
    fn neighbor_support_examples() {
        let mut model = fit_mass_model(&[row(1, 1), row(2, 2)], &[], &frame2(), &MassModelConfig::default()).unwrap();
        // neighbors of class 1 and 2 with transitions 0.8 and 0.4 toward class 1
        model.transition = vec![vec![0.8, 0.2], vec![0.4, 0.6]];
        let counts = BTreeMap::from([(1, 1), (2, 1)]);
        let s = model.neighbor_support(&counts, 1).unwrap();
        assert!((s.degree - 0.57).abs() < 1e-12);
        assert_eq!(model.neighbor_support(&BTreeMap::new(), 1).unwrap().degree, 0.0);
        model.transition = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(
            model.neighbor_support(&BTreeMap::from([(2, 3)]), 1).unwrap().degree,
            0.95
        );
        assert!(model.neighbor_support(&counts, 5).is_err());
    }

    #[test]
    fn fitting_normalizes_and_flags() {
        let rows: Vec<TrainingRow> = (1..=20).map(|s| row(1 + (s % 2) as u8, s)).collect();
        let model = fit_mass_model(&rows, &[(1, 2), (1, 2), (2, 2)], &frame2(), &MassModelConfig::default()).unwrap();
        for ((_, _), h) in &model.histograms {
            assert!((h.freq.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(h.bins(), if h.degenerate { 1 } else { 16 });
        }
        // texture is constant 0.1 everywhere
        assert!(model.is_degenerate(FeatureId::Texture));
        assert!(!model.is_degenerate(FeatureId::Size));
        // counts [[1+0, 1+2], [1+2, 1+2]] after symmetric pair counting
        assert!((model.transition(1, 1).unwrap() - 1.0 / 4.0).abs() < 1e-12);
        assert!((model.transition(2, 2).unwrap() - 3.0 / 6.0).abs() < 1e-12);
        for r in model.transition_matrix() {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn concentrated_class_has_modal_bin() {
        let mut rows: Vec<TrainingRow> = (0..30).map(|_| row(1, 5)).collect();
        rows.push(row(2, 100));
        rows.push(row(2, 1));
        let model = fit_mass_model(&rows, &[], &frame2(), &MassModelConfig::default()).unwrap();
        let h = model.histogram(FeatureId::Size, 1).unwrap();
        assert_eq!(h.freq[h.bin_of(5.0)], h.max_freq());
        assert_eq!(model.feature_support(FeatureId::Size, 5.0, 1).unwrap().degree, 0.95);
        // larger than every training region: not penalized
        assert_eq!(model.feature_support(FeatureId::Size, 100.0, 1).unwrap().degree, 0.95);
        let low = model.feature_support(FeatureId::Size, 1.0, 1).unwrap().degree;
        assert!(low > 0.0 && low < 0.05);
    }

    #[test]
    fn unverified_rows_only_widen_range() {
        let mut rows = vec![
            TrainingRow {
                weight: 100.0,
                ..row(1, 10)
            },
            row(2, 10),
        ];
        rows.push(TrainingRow {
            verified: false,
            ..row(1, 1000)
        });
        let model = fit_mass_model(&rows, &[], &frame2(), &MassModelConfig::default()).unwrap();
        let h = model.histogram(FeatureId::Size, 1).unwrap();
        assert_eq!(*h.edges.last().unwrap(), 1000f64.ln());
        assert_eq!(h.scale, Scale::Log);
        // the unverified row adds nothing near 1000 pixels
        assert_eq!(h.freq[h.bin_of(1000.0)], h.freq[h.bin_of(500.0)]);
        assert!(h.freq[h.bin_of(1000.0)] < 0.1 * h.max_freq());
    }

    #[test]
    fn sparse_classes_are_uniform() {
        let frame = Frame::new(["WHT", "ALF", "APL"]).unwrap();
        let model = fit_mass_model(&[row(1, 3), row(2, 9)], &[], &frame, &MassModelConfig::default()).unwrap();
        assert_eq!(model.sparse_classes(), &BTreeSet::from([3]));
        assert_eq!(model.feature_support(FeatureId::Size, 4.0, 3).unwrap().degree, 0.95);
    }

    #[test]
    fn fit_errors() {
        let frame = frame2();
        let config = MassModelConfig::default();
        assert!(matches!(
            fit_mass_model(&[], &[], &frame, &config),
            Err(Error::EmptyTrainingSet)
        ));
        assert!(fit_mass_model(&[row(3, 1)], &[], &frame, &config).is_err());
        assert!(fit_mass_model(&[row(1, 1)], &[(1, 9)], &frame, &config).is_err());
        let bad = MassModelConfig {
            support_cap: 1.0,
            ..config
        };
        assert!(fit_mass_model(&[row(1, 1)], &[], &frame, &bad).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rows: Vec<TrainingRow> = (1..=40)
            .map(|s| TrainingRow {
                weight: s as f64 / 3.0,
                ..row(1 + (s % 2) as u8, s * s)
            })
            .collect();
        let model = fit_mass_model(&rows, &[(1, 2)], &frame2(), &MassModelConfig::default()).unwrap();
        let text = model.to_json().unwrap();
        let back = MassModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), text);
        assert!(text.contains("\"size:WHT\""));
        assert!(MassModel::from_json(&text.replace("\"size:WHT\"", "\"size:XXX\"")).is_err());
    }

    #[test]
    fn refit_is_deterministic() {
        let rows: Vec<TrainingRow> = (1..=25).map(|s| row(1 + (s % 2) as u8, s * 7 % 13 + 1)).collect();
        let a = fit_mass_model(&rows, &[(1, 2)], &frame2(), &MassModelConfig::default()).unwrap();
        let b = fit_mass_model(&rows, &[(1, 2)], &frame2(), &MassModelConfig::default()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}
