//! Connected regions of a label map, their adjacency graph, and merging.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::LabelMap;

/// `(row, col)`.
pub type Pixel = (usize, usize);

const NO_REGION: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Connectivity::Eight => &[(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)],
        }
    }
}

/// Binary image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = Self::new(width, height);
        for r in 0..height {
            for c in 0..width {
                mask.bits[r * width + c] = f(r, c);
            }
        }
        mask
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

impl BBox {
    pub fn height(&self) -> usize {
        self.max_row - self.min_row + 1
    }

    pub fn width(&self) -> usize {
        self.max_col - self.min_col + 1
    }
}

/// A connected set of pixels carrying one class hypothesis.
///
/// Pixels are kept sorted in raster order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub id: u32,
    pub class: u8,
    pixels: Vec<Pixel>,
    bbox: BBox,
}

impl Region {
    pub fn new(id: u32, class: u8, mut pixels: Vec<Pixel>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::EmptyRegion);
        }
        pixels.sort_unstable();
        pixels.dedup();
        let bbox = bbox_of(&pixels);
        Ok(Self {
            id,
            class,
            pixels,
            bbox,
        })
    }

    pub fn size(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn contains(&self, pixel: Pixel) -> bool {
        self.pixels.binary_search(&pixel).is_ok()
    }

    /// Membership grid over the bounding box, row-major.
    pub fn local_mask(&self) -> Vec<bool> {
        let (h, w) = (self.bbox.height(), self.bbox.width());
        let mut grid = vec![false; h * w];
        for &(r, c) in &self.pixels {
            grid[(r - self.bbox.min_row) * w + (c - self.bbox.min_col)] = true;
        }
        grid
    }

    fn absorb(&mut self, other: Region) {
        let mut merged = Vec::with_capacity(self.pixels.len() + other.pixels.len());
        let (mut a, mut b) = (self.pixels.iter().peekable(), other.pixels.iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (Some(x), Some(y)) if x <= y => a.next(),
                (Some(_), Some(_)) => b.next(),
                (Some(_), None) => a.next(),
                (None, Some(_)) => b.next(),
                (None, None) => break,
            };
            merged.extend(next.copied());
        }
        self.pixels = merged;
        self.bbox = bbox_of(&self.pixels);
    }
}

fn bbox_of(pixels: &[Pixel]) -> BBox {
    let mut bbox = BBox {
        min_row: usize::MAX,
        min_col: usize::MAX,
        max_row: 0,
        max_col: 0,
    };
    for &(r, c) in pixels {
        bbox.min_row = bbox.min_row.min(r);
        bbox.min_col = bbox.min_col.min(c);
        bbox.max_row = bbox.max_row.max(r);
        bbox.max_col = bbox.max_col.max(c);
    }
    bbox
}

fn flood(
    width: usize,
    height: usize,
    start: Pixel,
    conn: Connectivity,
    visited: &mut [bool],
    mut member: impl FnMut(usize) -> bool,
) -> Vec<Pixel> {
    let mut pixels = Vec::new();
    let mut queue = VecDeque::from([start]);
    visited[start.0 * width + start.1] = true;
    while let Some((r, c)) = queue.pop_front() {
        pixels.push((r, c));
        for &(dr, dc) in conn.offsets() {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if nr < 0 || nc < 0 || nr >= height as isize || nc >= width as isize {
                continue;
            }
            let idx = nr as usize * width + nc as usize;
            if !visited[idx] && member(idx) {
                visited[idx] = true;
                queue.push_back((nr as usize, nc as usize));
            }
        }
    }
    pixels
}

/// Maximal connected components of a binary band, ids `0..` in raster
/// order of each component's first pixel.
pub fn label_components(mask: &Mask, class: u8, conn: Connectivity) -> Vec<Region> {
    let (w, h) = (mask.width, mask.height);
    let mut visited = vec![false; w * h];
    let mut regions = Vec::new();
    for idx in 0..w * h {
        if mask.bits[idx] && !visited[idx] {
            let pixels = flood(w, h, (idx / w, idx % w), conn, &mut visited, |i| mask.bits[i]);
            let id = regions.len() as u32;
            regions.push(Region::new(id, class, pixels).expect("component is nonempty"));
        }
    }
    regions
}

/// Components of every class band of a label map at once, with ids in raster
/// order of first pixel across all classes. Unlabeled pixels belong to no
/// region.
pub fn segment_labelmap(map: &LabelMap, conn: Connectivity) -> Vec<Region> {
    let (w, h) = (map.width(), map.height());
    let labels = map.labels();
    let mut visited = vec![false; w * h];
    let mut regions = Vec::new();
    for idx in 0..w * h {
        let class = labels[idx];
        if class != 0 && !visited[idx] {
            let pixels = flood(w, h, (idx / w, idx % w), conn, &mut visited, |i| labels[i] == class);
            let id = regions.len() as u32;
            regions.push(Region::new(id, class, pixels).expect("component is nonempty"));
        }
    }
    regions
}

/// Undirected region graph weighted by shared boundary length, i.e. the
/// number of 4-adjacent pixel pairs straddling two regions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdjacencyGraph {
    edges: BTreeMap<u32, BTreeMap<u32, u32>>,
}

impl AdjacencyGraph {
    pub fn add_node(&mut self, id: u32) {
        self.edges.entry(id).or_default();
    }

    fn add_weight(&mut self, a: u32, b: u32, w: u32) {
        *self.edges.entry(a).or_default().entry(b).or_insert(0) += w;
        *self.edges.entry(b).or_default().entry(a).or_insert(0) += w;
    }

    pub fn contains(&self, id: u32) -> bool {
        self.edges.contains_key(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.edges.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edge count.
    pub fn edge_count(&self) -> usize {
        self.edges.values().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn edge(&self, a: u32, b: u32) -> Option<u32> {
        self.edges.get(&a).and_then(|n| n.get(&b)).copied()
    }

    /// Neighbors of `id` with shared boundary lengths, ascending by id.
    pub fn neighbors(&self, id: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges
            .get(&id)
            .into_iter()
            .flat_map(|n| n.iter().map(|(&k, &w)| (k, w)))
    }

    /// Each undirected edge once, as `(low, high, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.edges
            .iter()
            .flat_map(|(&a, n)| n.iter().filter(move |(&b, _)| a < b).map(move |(&b, &w)| (a, b, w)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges
            .iter()
            .all(|(&a, n)| n.iter().all(|(&b, &w)| a != b && w >= 1 && self.edge(b, a) == Some(w)))
    }

    /// Neighbor sharing the longest boundary with `id`; ties go to the lowest id.
    pub fn strongest_neighbor(&self, id: u32) -> Option<u32> {
        self.neighbors(id)
            .fold(None, |best: Option<(u32, u32)>, (n, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((n, w)),
            })
            .map(|(n, _)| n)
    }
}

fn paint_owner(regions: &[Region], width: usize, height: usize) -> Result<Vec<u32>> {
    let mut owner = vec![NO_REGION; width * height];
    for region in regions {
        for &(r, c) in region.pixels() {
            if r >= height || c >= width {
                return Err(Error::DimensionMismatch(format!(
                    "region {} has pixel ({r}, {c}) outside a {width}x{height} image",
                    region.id
                )));
            }
            let slot = &mut owner[r * width + c];
            if *slot != NO_REGION {
                return Err(Error::OverlappingRegions { row: r, col: c });
            }
            *slot = region.id;
        }
    }
    Ok(owner)
}

fn adjacency_from_owner(owner: &[u32], width: usize, height: usize) -> AdjacencyGraph {
    let mut graph = AdjacencyGraph::default();
    for r in 0..height {
        for c in 0..width {
            let a = owner[r * width + c];
            if a == NO_REGION {
                continue;
            }
            graph.add_node(a);
            if c + 1 < width {
                let b = owner[r * width + c + 1];
                if b != NO_REGION && b != a {
                    graph.add_weight(a, b, 1);
                }
            }
            if r + 1 < height {
                let b = owner[(r + 1) * width + c];
                if b != NO_REGION && b != a {
                    graph.add_weight(a, b, 1);
                }
            }
        }
    }
    graph
}

/// Adjacency graph of regions tiling (part of) the label map's grid.
pub fn build_adjacency(regions: &[Region], map: &LabelMap) -> Result<AdjacencyGraph> {
    let owner = paint_owner(regions, map.width(), map.height())?;
    let mut graph = adjacency_from_owner(&owner, map.width(), map.height());
    for region in regions {
        graph.add_node(region.id);
    }
    Ok(graph)
}

/// Working set of regions over one image, kept consistent under merges.
#[derive(Clone, Debug)]
pub struct Segmentation {
    width: usize,
    height: usize,
    owner: Vec<u32>,
    regions: BTreeMap<u32, Region>,
    graph: AdjacencyGraph,
}

impl Segmentation {
    pub fn from_labelmap(map: &LabelMap, conn: Connectivity) -> Self {
        Self::from_regions(segment_labelmap(map, conn), map.width(), map.height())
            .expect("components of one map never overlap")
    }

    pub fn from_regions(regions: Vec<Region>, width: usize, height: usize) -> Result<Self> {
        let owner = paint_owner(&regions, width, height)?;
        let mut graph = adjacency_from_owner(&owner, width, height);
        for region in &regions {
            graph.add_node(region.id);
        }
        Ok(Self {
            width,
            height,
            owner,
            regions: regions.into_iter().map(|r| (r.id, r)).collect(),
            graph,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn graph(&self) -> &AdjacencyGraph {
        &self.graph
    }

    pub fn region(&self, id: u32) -> Option<&Region> {
        self.regions.get(&id)
    }

    pub fn regions(&self) -> impl Iterator<Item = &Region> + '_ {
        self.regions.values()
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn total_pixels(&self) -> usize {
        self.regions.values().map(Region::size).sum()
    }

    /// Region owning a pixel, if any.
    pub fn owner_at(&self, row: usize, col: usize) -> Option<u32> {
        let id = self.owner[row * self.width + col];
        (id != NO_REGION).then_some(id)
    }

    /// Current class hypothesis of every region.
    pub fn classes(&self) -> BTreeMap<u32, u8> {
        self.regions.iter().map(|(&id, r)| (id, r.class)).collect()
    }

    pub fn set_class(&mut self, id: u32, class: u8) -> Result<()> {
        self.regions
            .get_mut(&id)
            .map(|r| r.class = class)
            .ok_or(Error::UnknownRegion(id))
    }

    /// Neighbor that would receive `id` on rejection.
    pub fn merge_target(&self, id: u32) -> Option<u32> {
        self.graph.strongest_neighbor(id)
    }

    /// Moves every pixel of `source` into `target` and removes `source`.
    ///
    /// Boundaries `source` shared with other regions are added to the
    /// target's. The target keeps its id and class.
    pub fn merge(&mut self, source: u32, target: u32) -> Result<()> {
        for id in [source, target] {
            if !self.regions.contains_key(&id) {
                return Err(Error::UnknownRegion(id));
            }
        }
        if source == target || self.graph.edge(source, target).is_none() {
            return Err(Error::NotAdjacent(source, target));
        }
        let absorbed = self.regions.remove(&source).expect("checked above");
        for &(r, c) in absorbed.pixels() {
            self.owner[r * self.width + c] = target;
        }
        self.regions.get_mut(&target).expect("checked above").absorb(absorbed);

        let moved = self.graph.edges.remove(&source).unwrap_or_default();
        for (n, w) in moved {
            let list = self.graph.edges.get_mut(&n).expect("symmetric graph");
            list.remove(&source);
            if n != target {
                self.graph.add_weight(target, n, w);
            }
        }
        Ok(())
    }

    /// Paints every region with its class.
    pub fn to_labelmap(&self) -> LabelMap {
        let mut labels = vec![0u8; self.width * self.height];
        for region in self.regions.values() {
            for &(r, c) in region.pixels() {
                labels[r * self.width + c] = region.class;
            }
        }
        LabelMap::new(self.width, self.height, labels).expect("dimensions are consistent")
    }
}

/// Class-pair adjacency of a segmentation: one `(class_a, class_b)` entry per
/// graph edge.
pub fn class_pairs(seg: &Segmentation) -> Vec<(u8, u8)> {
    seg.graph()
        .edges()
        .map(|(a, b, _)| {
            (
                seg.region(a).expect("graph node").class,
                seg.region(b).expect("graph node").class,
            )
        })
        .collect()
}

/// Debug listing: id, class, size, bbox.
#[derive(Debug, Serialize)]
pub struct RegionSummary {
    pub id: u32,
    pub class: u8,
    pub size: usize,
    pub bbox: BBox,
}

pub fn summarize(seg: &Segmentation) -> Vec<RegionSummary> {
    seg.regions()
        .map(|r| RegionSummary {
            id: r.id,
            class: r.class,
            size: r.size(),
            bbox: r.bbox(),
        })
        .collect()
}

/// Whether a pixel set is a single 4-connected component.
pub fn is_connected(pixels: &[Pixel]) -> bool {
    let Some(&start) = pixels.first() else {
        return false;
    };
    let set: BTreeSet<Pixel> = pixels.iter().copied().collect();
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some((r, c)) = stack.pop() {
        let candidates = [
            r.checked_sub(1).map(|r| (r, c)),
            c.checked_sub(1).map(|c| (r, c)),
            Some((r + 1, c)),
            Some((r, c + 1)),
        ];
        for p in candidates.into_iter().flatten() {
            if set.contains(&p) && seen.insert(p) {
                stack.push(p);
            }
        }
    }
    seen.len() == set.len()
}
