//! Spatial region features: size, Roberts texture, minimum bounding
//! rectangle shape (FIT, ELONG, DIREC), compactness, spectral mean and
//! neighbor class counts.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::belief::Frame;
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::regions::{AdjacencyGraph, Pixel, Region};

/// MBR search grid: whole degrees in `[0, 90)`.
pub const MBR_ANGLES: usize = 90;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Band weights for the texture intensity; `None` averages all bands.
    #[serde(default)]
    pub band_weights: Option<Vec<f64>>,
    /// Roberts gradient threshold; `None` uses 10% of the weighted image's
    /// intensity range.
    #[serde(default)]
    pub texture_threshold: Option<f64>,
}

/// Scalar features that get their own histogram in a mass model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureId {
    Size,
    Texture,
    Fit,
    Elong,
    Direc,
    Compactness,
    SpectralMean(usize),
}

impl FeatureId {
    /// All scalar features for a raster with `bands` bands.
    pub fn all(bands: usize) -> Vec<FeatureId> {
        let mut ids = vec![
            FeatureId::Size,
            FeatureId::Texture,
            FeatureId::Fit,
            FeatureId::Elong,
            FeatureId::Direc,
            FeatureId::Compactness,
        ];
        ids.extend((0..bands).map(FeatureId::SpectralMean));
        ids
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureId::Size => f.write_str("size"),
            FeatureId::Texture => f.write_str("texture"),
            FeatureId::Fit => f.write_str("fit"),
            FeatureId::Elong => f.write_str("elong"),
            FeatureId::Direc => f.write_str("direc"),
            FeatureId::Compactness => f.write_str("compactness"),
            FeatureId::SpectralMean(b) => write!(f, "mean_b{b}"),
        }
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "size" => FeatureId::Size,
            "texture" => FeatureId::Texture,
            "fit" => FeatureId::Fit,
            "elong" => FeatureId::Elong,
            "direc" => FeatureId::Direc,
            "compactness" => FeatureId::Compactness,
            _ => s
                .strip_prefix("mean_b")
                .and_then(|b| b.parse().ok())
                .map(FeatureId::SpectralMean)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown feature {s:?}")))?,
        })
    }
}

impl Serialize for FeatureId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionFeatures {
    pub size: usize,
    pub texture: f64,
    pub fit: f64,
    pub elong: f64,
    pub direc: f64,
    pub compactness: f64,
    pub spectral_mean: Vec<f64>,
    pub neighbor_class_counts: BTreeMap<u8, u32>,
}

impl RegionFeatures {
    pub fn value(&self, id: FeatureId) -> Option<f64> {
        Some(match id {
            FeatureId::Size => self.size as f64,
            FeatureId::Texture => self.texture,
            FeatureId::Fit => self.fit,
            FeatureId::Elong => self.elong,
            FeatureId::Direc => self.direc,
            FeatureId::Compactness => self.compactness,
            FeatureId::SpectralMean(b) => *self.spectral_mean.get(b)?,
        })
    }
}

/// Band-weighted single-channel view of a raster.
#[derive(Clone, Debug)]
pub struct IntensityImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl IntensityImage {
    pub fn weighted(raster: &Raster, weights: Option<&[f64]>) -> Result<Self> {
        let bands = raster.bands();
        let weights: Vec<f64> = match weights {
            Some(w) if w.len() != bands => {
                return Err(Error::InvalidArgument(format!(
                    "{} band weights for a {bands}-band raster",
                    w.len()
                )))
            }
            Some(w) => w.to_vec(),
            None => vec![1.0 / bands as f64; bands],
        };
        let n = raster.width() * raster.height();
        let mut values = vec![0.0; n];
        for (b, w) in weights.iter().enumerate() {
            for (v, &s) in values.iter_mut().zip(raster.band(b)) {
                *v += w * f64::from(s);
            }
        }
        Ok(Self {
            width: raster.width(),
            height: raster.height(),
            values,
        })
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// `max - min` over the image.
    pub fn range(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }

    /// Sum-of-absolute-differences Roberts cross anchored at `(row, col)`;
    /// `None` when the 2×2 forward window leaves the image.
    pub fn roberts(&self, row: usize, col: usize) -> Option<f64> {
        if row + 1 >= self.height || col + 1 >= self.width {
            return None;
        }
        let a = self.get(row, col);
        let b = self.get(row, col + 1);
        let c = self.get(row + 1, col);
        let d = self.get(row + 1, col + 1);
        Some((a - d).abs() + (b - c).abs())
    }

    /// Fraction of a region's complete windows whose gradient exceeds
    /// `threshold`; 0 when no window is complete.
    pub fn edge_density(&self, pixels: &[Pixel], threshold: f64) -> Result<f64> {
        if pixels.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let (mut evaluated, mut edges) = (0usize, 0usize);
        for &(r, c) in pixels {
            if r >= self.height || c >= self.width {
                return Err(Error::DimensionMismatch(format!(
                    "pixel ({r}, {c}) outside a {}x{} image",
                    self.width, self.height
                )));
            }
            if let Some(g) = self.roberts(r, c) {
                evaluated += 1;
                if g > threshold {
                    edges += 1;
                }
            }
        }
        Ok(if evaluated == 0 {
            0.0
        } else {
            edges as f64 / evaluated as f64
        })
    }
}

pub fn default_texture_threshold(image: &IntensityImage) -> f64 {
    0.1 * image.range()
}

/// Edge density of a region under the Roberts operator.
pub fn roberts_edge_density(
    raster: &Raster,
    region: &Region,
    band_weights: Option<&[f64]>,
    threshold: f64,
) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!("texture threshold {threshold} < 0")));
    }
    IntensityImage::weighted(raster, band_weights)?.edge_density(region.pixels(), threshold)
}

/// Minimum bounding rectangle found by grid search over rotations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mbr {
    pub fit: f64,
    pub elong: f64,
    /// Orientation of the long side in degrees within `[0, 180)`, measured
    /// from the column axis toward the row axis.
    pub direc: f64,
    pub long_side: f64,
    pub short_side: f64,
}

/// Rotates pixel centers by −θ for θ = 0°, 1°, …, 89°, boxes them with a
/// half-pixel margin on each side and keeps the angle with the best fill
/// ratio; the smallest angle wins ties.
pub fn min_bounding_rect(pixels: &[Pixel]) -> Result<Mbr> {
    if pixels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let hull = row_extremes(pixels);
    let n = pixels.len() as f64;
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for deg in 0..MBR_ANGLES {
        let theta = (deg as f64).to_radians();
        let (sin, cos) = theta.sin_cos();
        let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(r, c) in &hull {
            let (x, y) = (c as f64, r as f64);
            let xr = x * cos + y * sin;
            let yr = -x * sin + y * cos;
            x_lo = x_lo.min(xr);
            x_hi = x_hi.max(xr);
            y_lo = y_lo.min(yr);
            y_hi = y_hi.max(yr);
        }
        let (w, h) = (x_hi - x_lo + 1.0, y_hi - y_lo + 1.0);
        let fit = n / (w * h);
        if best.is_none_or(|(f, ..)| fit > f + 1e-12) {
            best = Some((fit, deg, w, h));
        }
    }
    let (fit, deg, w, h) = best.expect("at least one angle");
    let (long_side, short_side) = if w >= h { (w, h) } else { (h, w) };
    Ok(Mbr {
        fit: fit.min(1.0),
        elong: long_side / short_side,
        direc: if w >= h { deg as f64 } else { deg as f64 + 90.0 },
        long_side,
        short_side,
    })
}

/// First and last pixel of each row: enough for extremes of any linear
/// function over the set.
fn row_extremes(pixels: &[Pixel]) -> Vec<Pixel> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < pixels.len() {
        let row = pixels[i].0;
        let mut j = i;
        while j + 1 < pixels.len() && pixels[j + 1].0 == row {
            j += 1;
        }
        out.push(pixels[i]);
        if j != i {
            out.push(pixels[j]);
        }
        i = j + 1;
    }
    out
}

/// Unit edges between a region pixel and anything outside the region.
pub fn perimeter(region: &Region) -> usize {
    let bbox = region.bbox();
    let (h, w) = (bbox.height(), bbox.width());
    let grid = region.local_mask();
    let inside = |r: isize, c: isize| {
        r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && grid[r as usize * w + c as usize]
    };
    let mut edges = 0;
    for r in 0..h as isize {
        for c in 0..w as isize {
            if inside(r, c) {
                edges += [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                    .iter()
                    .filter(|&&(nr, nc)| !inside(nr, nc))
                    .count();
            }
        }
    }
    edges
}

/// 4π·area / perimeter².
pub fn compactness(region: &Region) -> f64 {
    let p = perimeter(region) as f64;
    4.0 * std::f64::consts::PI * region.size() as f64 / (p * p)
}

/// Per-band mean intensity over the region.
pub fn spectral_mean(raster: &Raster, region: &Region) -> Result<Vec<f64>> {
    let pixels = region.pixels();
    if pixels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if let Some(&(r, c)) = pixels
        .iter()
        .find(|&&(r, c)| r >= raster.height() || c >= raster.width())
    {
        return Err(Error::DimensionMismatch(format!(
            "pixel ({r}, {c}) outside a {}x{} raster",
            raster.width(),
            raster.height()
        )));
    }
    let n = pixels.len() as f64;
    Ok((0..raster.bands())
        .map(|b| {
            let band = raster.band(b);
            let sum: u64 = pixels
                .iter()
                .map(|&(r, c)| u64::from(band[r * raster.width() + c]))
                .sum();
            sum as f64 / n
        })
        .collect())
}

/// Number of adjacent regions per current class hypothesis.
pub fn neighbor_class_feature(
    region_id: u32,
    graph: &AdjacencyGraph,
    classes: &BTreeMap<u32, u8>,
) -> Result<BTreeMap<u8, u32>> {
    if !graph.contains(region_id) {
        return Err(Error::UnknownRegion(region_id));
    }
    let mut counts = BTreeMap::new();
    for (n, _) in graph.neighbors(region_id) {
        let class = *classes.get(&n).ok_or(Error::UnknownRegion(n))?;
        *counts.entry(class).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Feature extraction bound to one raster.
#[derive(Clone, Debug)]
pub struct FeatureExtractor<'a> {
    raster: &'a Raster,
    intensity: IntensityImage,
    threshold: f64,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(raster: &'a Raster, config: &FeatureConfig) -> Result<Self> {
        let intensity = IntensityImage::weighted(raster, config.band_weights.as_deref())?;
        let threshold = match config.texture_threshold {
            Some(t) if !(t >= 0.0) => return Err(Error::InvalidArgument(format!("texture threshold {t} < 0"))),
            Some(t) => t,
            None => default_texture_threshold(&intensity),
        };
        Ok(Self {
            raster,
            intensity,
            threshold,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn intensity(&self) -> &IntensityImage {
        &self.intensity
    }

    /// Everything except neighbor counts, which depend on the surrounding
    /// regions rather than the region itself.
    pub fn intrinsic(&self, region: &Region) -> Result<RegionFeatures> {
        let mbr = min_bounding_rect(region.pixels())?;
        Ok(RegionFeatures {
            size: region.size(),
            texture: self.intensity.edge_density(region.pixels(), self.threshold)?,
            fit: mbr.fit,
            elong: mbr.elong,
            direc: mbr.direc,
            compactness: compactness(region),
            spectral_mean: spectral_mean(self.raster, region)?,
            neighbor_class_counts: BTreeMap::new(),
        })
    }

    pub fn extract(
        &self,
        region: &Region,
        graph: &AdjacencyGraph,
        classes: &BTreeMap<u32, u8>,
    ) -> Result<RegionFeatures> {
        let mut features = self.intrinsic(region)?;
        features.neighbor_class_counts = neighbor_class_feature(region.id, graph, classes)?;
        Ok(features)
    }
}

/// One-shot feature vector of a region.
pub fn extract_features(
    raster: &Raster,
    region: &Region,
    graph: &AdjacencyGraph,
    classes: &BTreeMap<u32, u8>,
    config: &FeatureConfig,
) -> Result<RegionFeatures> {
    FeatureExtractor::new(raster, config)?.extract(region, graph, classes)
}

/// Writes feature vectors as CSV: id, class, the scalar features, one
/// `mean_b*` column per band and one `nb_*` neighbor-count column per class.
pub fn write_features_csv<W: Write>(
    out: W,
    frame: &Frame,
    bands: usize,
    rows: &[(u32, u8, &RegionFeatures)],
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["id", "class", "size", "texture", "fit", "elong", "direc", "compactness"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..bands).map(|b| format!("mean_b{b}")));
    header.extend(frame.labels().iter().map(|l| format!("nb_{l}")));
    writer.write_record(&header)?;
    for &(id, class, f) in rows {
        let mut record = vec![
            id.to_string(),
            frame
                .label(usize::from(class).wrapping_sub(1))
                .unwrap_or("?")
                .to_string(),
            f.size.to_string(),
            f.texture.to_string(),
            f.fit.to_string(),
            f.elong.to_string(),
            f.direc.to_string(),
            f.compactness.to_string(),
        ];
        record.extend(f.spectral_mean.iter().map(|m| m.to_string()));
        record.extend((1..=frame.len()).map(|c| {
            f.neighbor_class_counts
                .get(&(c as u8))
                .copied()
                .unwrap_or(0)
                .to_string()
        }));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io("<features csv>", e))
}
