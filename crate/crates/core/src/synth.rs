//! Seeded synthetic multispectral field scenes.
//!
//! Random draws come from ChaCha8 seeded with the spec's 64-bit seed: first
//! the field class shuffles, then one normal draw per sample in raster-scan
//! order with the bands of each pixel consecutive.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::belief::Frame;
use crate::error::{Error, Result};
use crate::raster::{LabelMap, Raster};

/// Name of the pseudo-random generator, recorded in run manifests.
pub const GENERATOR: &str = "chacha8";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub frame: Frame,
    pub field_grid: FieldGrid,
    /// Mean intensity per band, keyed by class label.
    pub class_means: BTreeMap<String, Vec<f64>>,
    pub noise_sigma: f64,
    /// Pixels just below or right of a border between two classes take the
    /// average of both class means.
    pub mixed_boundary: bool,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        let means: [(&str, [f64; 4]); 8] = [
            ("WHT", [60.0, 50.0, 110.0, 95.0]),
            ("ALF", [45.0, 35.0, 140.0, 120.0]),
            ("POT", [55.0, 45.0, 125.0, 100.0]),
            ("CRN", [70.0, 60.0, 100.0, 85.0]),
            ("BNS", [50.0, 40.0, 130.0, 110.0]),
            ("APL", [65.0, 55.0, 90.0, 70.0]),
            ("PAS", [40.0, 30.0, 150.0, 130.0]),
            ("RNG", [80.0, 75.0, 85.0, 70.0]),
        ];
        Self {
            width: 128,
            height: 128,
            bands: 4,
            frame: Frame::new(means.iter().map(|(l, _)| *l)).expect("valid labels"),
            field_grid: FieldGrid { rows: 4, cols: 4 },
            class_means: means.iter().map(|(l, m)| (l.to_string(), m.to_vec())).collect(),
            noise_sigma: DEFAULT_NOISE_SIGMA,
            mixed_boundary: true,
            seed: 1,
        }
    }
}

/// Noise level of the default scene.
pub const DEFAULT_NOISE_SIGMA: f64 = 7.0;

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.bands == 0 {
            return Err(Error::InvalidArgument("scene dimensions must be positive".into()));
        }
        let FieldGrid { rows, cols } = self.field_grid;
        if rows == 0 || cols == 0 || rows > self.height || cols > self.width {
            return Err(Error::InvalidArgument(format!(
                "{rows}x{cols} field grid does not fit a {}x{} image",
                self.width, self.height
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise sigma {} < 0", self.noise_sigma)));
        }
        for label in self.frame.labels() {
            match self.class_means.get(label) {
                None => return Err(Error::UnknownClass(format!("no mean for class {label}"))),
                Some(m) if m.len() != self.bands => {
                    return Err(Error::DimensionMismatch(format!(
                        "class {label} has {} band means, scene has {} bands",
                        m.len(),
                        self.bands
                    )))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = self.class_means.keys().find(|l| self.frame.index_of(l).is_none()) {
            return Err(Error::UnknownClass(extra.clone()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SceneSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: SceneSpec = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    fn mean_of(&self, class: u8) -> &[f64] {
        &self.class_means[&self.frame.labels()[usize::from(class) - 1]]
    }
}

/// Field index of a pixel: the grid splits rows and columns as evenly as
/// integer division allows.
fn field_of(spec: &SceneSpec, row: usize, col: usize) -> usize {
    let FieldGrid { rows, cols } = spec.field_grid;
    let fr = row * rows / spec.height;
    let fc = col * cols / spec.width;
    fr * cols + fc
}

/// Shuffle attempts spent looking for an assignment in which no two
/// edge-adjacent fields share a class.
const ASSIGNMENT_ATTEMPTS: usize = 1000;

/// Classes cycled over the fields, then shuffled until no two fields that
/// share an edge have the same class (the last shuffle is kept if none of
/// the attempts succeeds).
fn assign_fields(grid: FieldGrid, classes: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let FieldGrid { rows, cols } = grid;
    let mut field_class: Vec<u8> = (0..rows * cols).map(|i| (i % classes) as u8 + 1).collect();
    for _ in 0..ASSIGNMENT_ATTEMPTS {
        field_class.shuffle(rng);
        let clash = (0..rows).any(|r| {
            (0..cols).any(|c| {
                let v = field_class[r * cols + c];
                (c + 1 < cols && field_class[r * cols + c + 1] == v)
                    || (r + 1 < rows && field_class[(r + 1) * cols + c] == v)
            })
        });
        if !clash {
            break;
        }
    }
    field_class
}

/// Generates a raster and its ground truth. Every class appears on
/// `fields / classes` fields (rounded).
pub fn generate_scene(spec: &SceneSpec) -> Result<(Raster, LabelMap)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let field_class = assign_fields(spec.field_grid, spec.frame.len(), &mut rng);

    let (w, h, bands) = (spec.width, spec.height, spec.bands);
    let mut labels = vec![0u8; w * h];
    for r in 0..h {
        for c in 0..w {
            labels[r * w + c] = field_class[field_of(spec, r, c)];
        }
    }
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidArgument(format!("noise: {e}")))?;
    let mut samples = vec![0u16; w * h * bands];
    let mut mean = vec![0.0; bands];
    for r in 0..h {
        for c in 0..w {
            let own = labels[r * w + c];
            mean.copy_from_slice(spec.mean_of(own));
            if spec.mixed_boundary {
                let other = [
                    (r > 0).then(|| labels[(r - 1) * w + c]),
                    (c > 0).then(|| labels[r * w + c - 1]),
                ]
                .into_iter()
                .flatten()
                .find(|&o| o != own);
                if let Some(other) = other {
                    for (m, o) in mean.iter_mut().zip(spec.mean_of(other)) {
                        *m = (*m + o) / 2.0;
                    }
                }
            }
            for (b, m) in mean.iter().enumerate() {
                let v = if spec.noise_sigma > 0.0 {
                    m + noise.sample(&mut rng)
                } else {
                    *m
                };
                samples[(b * h + r) * w + c] = v.round().clamp(0.0, f64::from(u16::MAX)) as u16;
            }
        }
    }
    Ok((Raster::new(w, h, bands, samples)?, LabelMap::new(w, h, labels)?))
}
