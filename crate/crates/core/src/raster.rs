//! Multiband rasters and class label maps, with their on-disk formats.
//!
//! A raster is stored as two files sharing a stem: `<stem>.json` holds the
//! header and `<stem>.raw` the samples as little-endian `u16`, band after
//! band, each band row-major. Label maps are binary PGM (`P5`) images whose
//! pixel value is the class id; 0 means unlabeled.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::belief::Frame;
use crate::error::{Error, Result};

/// Ground footprint of one MSS pixel in meters (along-track, across-track).
pub const MSS_PIXEL_GROUND_AREA: (f64, f64) = (57.0, 79.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RasterMeta {
    pub pixel_ground_area: (f64, f64),
}

impl Default for RasterMeta {
    fn default() -> Self {
        Self {
            pixel_ground_area: MSS_PIXEL_GROUND_AREA,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    bands: usize,
    samples: Vec<u16>,
    pub meta: RasterMeta,
}

impl Raster {
    /// `samples` are band-sequential, each band row-major.
    pub fn new(width: usize, height: usize, bands: usize, samples: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::InvalidArgument(format!(
                "raster dimensions must be positive, got {width}x{height}x{bands}"
            )));
        }
        if samples.len() != width * height * bands {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height}x{bands} raster needs {} samples, got {}",
                width * height * bands,
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bands,
            samples,
            meta: RasterMeta::default(),
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        bands: usize,
        mut f: impl FnMut(usize, usize, usize) -> u16,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * bands);
        for b in 0..bands {
            for r in 0..height {
                for c in 0..width {
                    samples.push(f(b, r, c));
                }
            }
        }
        Self::new(width, height, bands, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    pub fn band(&self, band: usize) -> &[u16] {
        let n = self.width * self.height;
        &self.samples[band * n..(band + 1) * n]
    }

    #[inline]
    pub fn get(&self, band: usize, row: usize, col: usize) -> u16 {
        self.samples[(band * self.height + row) * self.width + col]
    }

    /// All band values of one pixel.
    pub fn pixel(&self, row: usize, col: usize) -> Vec<f64> {
        (0..self.bands).map(|b| f64::from(self.get(b, row, col))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "label map dimensions must be positive, got {width}x{height}"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} label map needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: usize, height: usize, label: u8) -> Result<Self> {
        Self::new(width, height, vec![label; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.labels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, label: u8) {
        self.labels[row * self.width + col] = label;
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    pub fn is_unlabeled(&self) -> bool {
        self.labels.iter().all(|&l| l == 0)
    }

    /// Every nonzero label must name a class of `frame` (ids are 1-based).
    pub fn validate(&self, frame: &Frame) -> Result<()> {
        match self.labels.iter().find(|&&l| usize::from(l) > frame.len()) {
            Some(&label) => Err(Error::LabelOutsideFrame {
                label,
                frame_len: frame.len(),
            }),
            None => Ok(()),
        }
    }

    pub fn check_shape(&self, raster: &Raster) -> Result<()> {
        if self.shape() != raster.shape() {
            return Err(Error::DimensionMismatch(format!(
                "raster is {}x{} but label map is {}x{}",
                raster.width(),
                raster.height(),
                self.width,
                self.height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RasterHeader {
    width: usize,
    height: usize,
    bands: usize,
    dtype: String,
    layout: String,
    byte_order: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pixel_ground_area: Option<[f64; 2]>,
}

/// Header and payload paths for a raster named by either file or the stem.
pub fn raster_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("json"), path.with_extension("raw"))
}

pub fn write_raster(raster: &Raster, path: &Path) -> Result<()> {
    let (header_path, payload_path) = raster_paths(path);
    let (along, across) = raster.meta.pixel_ground_area;
    let header = RasterHeader {
        width: raster.width,
        height: raster.height,
        bands: raster.bands,
        dtype: "u16".into(),
        layout: "band-sequential".into(),
        byte_order: "little-endian".into(),
        pixel_ground_area: Some([along, across]),
    };
    let mut text = serde_json::to_string_pretty(&header)?;
    text.push('\n');
    fs::write(&header_path, text).map_err(|e| Error::io(&header_path, e))?;
    let payload: Vec<u8> = raster.samples.iter().flat_map(|s| s.to_le_bytes()).collect();
    fs::write(&payload_path, payload).map_err(|e| Error::io(&payload_path, e))
}

pub fn read_raster(path: &Path) -> Result<Raster> {
    let (header_path, payload_path) = raster_paths(path);
    let text = fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let header: RasterHeader = serde_json::from_str(&text).map_err(|e| Error::format(&header_path, e.to_string()))?;
    if header.dtype != "u16" {
        return Err(Error::format(
            &header_path,
            format!("unsupported dtype {:?}", header.dtype),
        ));
    }
    if header.layout != "band-sequential" || header.byte_order != "little-endian" {
        return Err(Error::format(
            &header_path,
            format!(
                "unsupported layout {:?} / byte order {:?}",
                header.layout, header.byte_order
            ),
        ));
    }
    let payload = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    let expected = (header.width * header.height * header.bands * 2) as u64;
    if payload.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: payload_path,
            expected,
            actual: payload.len() as u64,
        });
    }
    let samples = payload
        .chunks_exact(2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .collect();
    let mut raster = Raster::new(header.width, header.height, header.bands, samples)
        .map_err(|e| Error::format(&header_path, e.to_string()))?;
    if let Some([along, across]) = header.pixel_ground_area {
        if along <= 0.0 || across <= 0.0 {
            return Err(Error::format(&header_path, "pixel ground area must be positive"));
        }
        raster.meta.pixel_ground_area = (along, across);
    }
    Ok(raster)
}

pub fn write_labelmap(map: &LabelMap, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(map.labels.len() + 32);
    write!(bytes, "P5\n{} {}\n255\n", map.width, map.height).expect("write to Vec");
    bytes.extend_from_slice(&map.labels);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_labelmap(path: &Path) -> Result<LabelMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut cursor = PgmCursor { bytes: &bytes, pos: 0 };
    if cursor.token() != Some(b"P5".as_slice()) {
        return Err(Error::format(path, "not a binary PGM (P5) file"));
    }
    let mut number = |what: &str| -> Result<usize> {
        cursor
            .token()
            .and_then(|t| std::str::from_utf8(t).ok())
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::format(path, format!("bad PGM {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(path, format!("unsupported PGM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = cursor.pos + 1;
    let payload = bytes.get(start..).unwrap_or(&[]);
    let expected = (width * height) as u64;
    if payload.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: path.to_path_buf(),
            expected,
            actual: payload.len() as u64,
        });
    }
    LabelMap::new(width, height, payload.to_vec()).map_err(|e| Error::format(path, e.to_string()))
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            match self.bytes.get(self.pos)? {
                b'#' => {
                    while *self.bytes.get(self.pos)? != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|c| !c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        let raster = Raster::from_fn(4, 4, 4, |b, r, c| (b * 1000 + r * 37 + c * 5000) as u16).unwrap();
        write_raster(&raster, &path).unwrap();
        assert_eq!(read_raster(&path).unwrap(), raster);
        // either file names the raster
        assert_eq!(read_raster(&dir.path().join("scene.raw")).unwrap(), raster);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let raster = Raster::from_fn(4, 4, 4, |_, _, _| 7).unwrap();
        write_raster(&raster, &path).unwrap();
        let raw = dir.path().join("r.raw");
        let mut bytes = fs::read(&raw).unwrap();
        bytes.pop();
        fs::write(&raw, bytes).unwrap();
        match read_raster(&path) {
            Err(Error::SizeMismatch { expected, actual, .. }) => {
                assert_eq!((expected, actual), (128, 127));
            }
            other => panic!("expected size mismatch, got {other:?}"),
        }
    }

    #[test]
    fn header_band_count_disagreeing_with_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let raster = Raster::from_fn(3, 2, 2, |_, _, _| 1).unwrap();
        write_raster(&raster, &path).unwrap();
        let header = fs::read_to_string(&path)
            .unwrap()
            .replace("\"bands\": 2", "\"bands\": 3");
        fs::write(&path, header).unwrap();
        let err = read_raster(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected 36 bytes, found 24"), "{msg}");
    }

    #[test]
    fn unsupported_dtype_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        assert!(matches!(read_raster(&path), Err(Error::Io { .. })));
        let raster = Raster::from_fn(2, 2, 1, |_, _, _| 1).unwrap();
        write_raster(&raster, &path).unwrap();
        let header = fs::read_to_string(&path).unwrap().replace("u16", "f32");
        fs::write(&path, header).unwrap();
        assert!(read_raster(&path).unwrap_err().to_string().contains("dtype"));
    }

    #[test]
    fn header_layout_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_raster(&Raster::from_fn(2, 1, 1, |_, _, c| c as u16 + 1).unwrap(), &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "{\n  \"width\": 2,\n  \"height\": 1,\n  \"bands\": 1,\n  \"dtype\": \"u16\",\n  \
             \"layout\": \"band-sequential\",\n  \"byte_order\": \"little-endian\",\n  \
             \"pixel_ground_area\": [\n    57.0,\n    79.0\n  ]\n}\n"
        );
        assert_eq!(fs::read(dir.path().join("r.raw")).unwrap(), vec![1, 0, 2, 0]);
    }

    #[test]
    fn labelmap_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.pgm");
        let map = LabelMap::new(3, 3, (0..9).collect()).unwrap();
        write_labelmap(&map, &path).unwrap();
        assert_eq!(read_labelmap(&path).unwrap(), map);

        let frame = Frame::new((1..=8).map(|i| format!("c{i}"))).unwrap();
        assert!(map.validate(&frame).is_ok());
        let mut bad = map.clone();
        bad.set(0, 0, 255);
        assert!(matches!(
            bad.validate(&frame),
            Err(Error::LabelOutsideFrame {
                label: 255,
                frame_len: 8
            })
        ));

        let empty = LabelMap::filled(4, 2, 0).unwrap();
        assert!(empty.validate(&frame).is_ok());
        assert!(empty.is_unlabeled());
    }

    #[test]
    fn pgm_with_comments_and_bad_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        fs::write(&path, b"P5\n# made by hand\n2 2\n255\n\x01\x02\x03\x04").unwrap();
        assert_eq!(read_labelmap(&path).unwrap().labels(), &[1, 2, 3, 4]);
        fs::write(&path, b"P5\n2 2\n255\n\x01\x02\x03").unwrap();
        assert!(matches!(read_labelmap(&path), Err(Error::SizeMismatch { .. })));
        fs::write(&path, b"P2\n2 2\n255\n1 2 3 4").unwrap();
        assert!(matches!(read_labelmap(&path), Err(Error::Format { .. })));
    }
}
