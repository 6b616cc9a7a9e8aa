//! Belief functions over a finite frame of discernment.
//!
//! A [`Frame`] is an ordered list of mutually exclusive class labels. Subsets
//! of the frame are [`FocalSet`]s, encoded as 16-bit sets, so a frame holds
//! at most [`MAX_FRAME_LEN`] labels. A [`MassFunction`] assigns mass to
//! nonempty subsets; the mass left on the whole frame is ignorance.
//!
//! Evidence is pooled with Dempster's rule ([`combine`], [`combine_all`]):
//! masses of every pair of focal elements are multiplied onto their
//! intersection, mass falling on the empty set (the conflict `K`) is dropped
//! and the rest is rescaled by `1 / (1 - K)`. The rule is commutative and
//! associative and the vacuous mass function is its identity.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported frame.
pub const MAX_FRAME_LEN: usize = 16;

/// Tolerance on the total mass of a valid mass function.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Conflict at or above `1 - CONFLICT_TOLERANCE` counts as total conflict.
pub const CONFLICT_TOLERANCE: f64 = 1e-12;

/// Ordered set of mutually exclusive class labels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    labels: Arc<[String]>,
}

impl Frame {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidFrame("frame has no labels".into()));
        }
        if labels.len() > MAX_FRAME_LEN {
            return Err(Error::InvalidFrame(format!(
                "frame has {} labels, at most {MAX_FRAME_LEN} are supported",
                labels.len()
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidFrame("empty label".into()));
            }
            if labels[..i].contains(label) {
                return Err(Error::InvalidFrame(format!("duplicate label {label:?}")));
            }
        }
        Ok(Self { labels: labels.into() })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The whole frame, Θ.
    pub fn full(&self) -> FocalSet {
        FocalSet(((1u32 << self.len()) - 1) as u16)
    }

    pub fn singleton(&self, index: usize) -> Result<FocalSet> {
        if index >= self.len() {
            return Err(Error::OutsideFrame(0));
        }
        Ok(FocalSet::singleton(index))
    }

    /// Set of the named labels.
    pub fn set_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<FocalSet> {
        labels.iter().try_fold(FocalSet::EMPTY, |acc, l| {
            let index = self
                .index_of(l.as_ref())
                .ok_or_else(|| Error::UnknownClass(l.as_ref().to_string()))?;
            Ok(acc.union(FocalSet::singleton(index)))
        })
    }

    pub fn contains_set(&self, set: FocalSet) -> bool {
        set.0 & !self.full().0 == 0
    }

    /// Θ ∖ set.
    pub fn complement(&self, set: FocalSet) -> FocalSet {
        FocalSet(self.full().0 & !set.0)
    }

    /// Label names of a set, in frame order.
    pub fn names(&self, set: FocalSet) -> Vec<String> {
        set.indices().map(|i| self.labels[i].clone()).collect()
    }

    fn check(&self, set: FocalSet) -> Result<()> {
        if self.contains_set(set) {
            Ok(())
        } else {
            Err(Error::OutsideFrame(set.0))
        }
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.labels.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(deserializer)?;
        Frame::new(labels).map_err(serde::de::Error::custom)
    }
}

/// Subset of a frame, bit `i` standing for the frame's `i`-th label.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FocalSet(u16);

impl FocalSet {
    pub const EMPTY: FocalSet = FocalSet(0);

    pub const fn from_bits(bits: u16) -> Self {
        FocalSet(bits)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub fn singleton(index: usize) -> Self {
        assert!(index < MAX_FRAME_LEN, "label index {index} out of range");
        FocalSet(1 << index)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_FRAME_LEN && self.0 & (1 << index) != 0
    }

    pub fn intersect(self, other: FocalSet) -> FocalSet {
        FocalSet(self.0 & other.0)
    }

    pub fn union(self, other: FocalSet) -> FocalSet {
        FocalSet(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: FocalSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..MAX_FRAME_LEN).filter(move |&i| self.0 & (1 << i) != 0)
    }
}

impl fmt::Debug for FocalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

/// `[Spt, Pls]` bracket of the credibility of a proposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidentialInterval {
    pub spt: f64,
    pub pls: f64,
}

impl EvidentialInterval {
    pub fn width(&self) -> f64 {
        self.pls - self.spt
    }
}

/// Evidence committing `degree` to `focus` and the rest to the whole frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimpleSupport {
    pub focus: FocalSet,
    pub degree: f64,
}

impl SimpleSupport {
    pub fn new(focus: FocalSet, degree: f64) -> Result<Self> {
        if focus.is_empty() {
            return Err(Error::InvalidMass("simple support with empty focus".into()));
        }
        if !(0.0..=1.0).contains(&degree) {
            return Err(Error::InvalidMass(format!("support degree {degree} outside [0, 1]")));
        }
        Ok(Self { focus, degree })
    }

    pub fn vacuous(focus: FocalSet) -> Self {
        Self { focus, degree: 0.0 }
    }

    pub fn to_mass(&self, frame: &Frame) -> Result<MassFunction> {
        MassFunction::from_simple_support(frame, self.focus, self.degree)
    }
}

/// Basic probability assignment over the subsets of a frame.
///
/// Focal elements are kept in a sorted map, so iteration order and
/// serialized output are deterministic. Only strictly positive masses are
/// stored and the empty set never carries mass.
#[derive(Clone, Debug, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: BTreeMap<FocalSet, f64>,
}

impl MassFunction {
    /// Builds a mass function, summing duplicate sets and dropping zeros.
    pub fn new<I>(frame: &Frame, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FocalSet, f64)>,
    {
        let mut focal = BTreeMap::new();
        for (set, mass) in entries {
            frame.check(set)?;
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidMass(format!("mass {mass} is not a probability")));
            }
            if mass == 0.0 {
                continue;
            }
            if set.is_empty() {
                return Err(Error::InvalidMass("mass assigned to the empty set".into()));
            }
            *focal.entry(set).or_insert(0.0) += mass;
        }
        let total: f64 = focal.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMass(format!("masses sum to {total}, not 1")));
        }
        Ok(Self {
            frame: frame.clone(),
            focal,
        })
    }

    /// Total ignorance: all mass on Θ.
    pub fn vacuous(frame: &Frame) -> Self {
        Self {
            frame: frame.clone(),
            focal: BTreeMap::from([(frame.full(), 1.0)]),
        }
    }

    /// All mass on `set`.
    pub fn categorical(frame: &Frame, set: FocalSet) -> Result<Self> {
        Self::new(frame, [(set, 1.0)])
    }

    /// `{focus: degree, Θ: 1 - degree}`, with zero-mass entries dropped.
    pub fn from_simple_support(frame: &Frame, focus: FocalSet, degree: f64) -> Result<Self> {
        let support = SimpleSupport::new(focus, degree)?;
        frame.check(support.focus)?;
        let full = frame.full();
        let mut focal = BTreeMap::new();
        if support.focus == full {
            focal.insert(full, 1.0);
        } else {
            if degree > 0.0 {
                focal.insert(support.focus, degree);
            }
            if degree < 1.0 {
                focal.insert(full, 1.0 - degree);
            }
        }
        Ok(Self {
            frame: frame.clone(),
            focal,
        })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Mass of exactly `set` (zero when it is not focal).
    pub fn mass(&self, set: FocalSet) -> f64 {
        self.focal.get(&set).copied().unwrap_or(0.0)
    }

    pub fn focal_elements(&self) -> impl Iterator<Item = (FocalSet, f64)> + '_ {
        self.focal.iter().map(|(&s, &m)| (s, m))
    }

    pub fn focal_count(&self) -> usize {
        self.focal.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.focal.values().sum()
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.mass(self.frame.full()) == 1.0
    }

    /// Bel(p): mass committed to subsets of `p`.
    pub fn belief(&self, p: FocalSet) -> Result<f64> {
        self.frame.check(p)?;
        Ok(self
            .focal
            .iter()
            .filter(|(s, _)| s.is_subset_of(p))
            .map(|(_, m)| m)
            .sum())
    }

    /// Pls(p) = 1 − Bel(Θ ∖ p).
    pub fn plausibility(&self, p: FocalSet) -> Result<f64> {
        self.frame.check(p)?;
        Ok(1.0 - self.belief(self.frame.complement(p))?)
    }

    pub fn interval(&self, p: FocalSet) -> Result<EvidentialInterval> {
        Ok(EvidentialInterval {
            spt: self.belief(p)?,
            pls: self.plausibility(p)?,
        })
    }

    /// Total mass the orthogonal sum with `other` would put on the empty set.
    pub fn conflict(&self, other: &MassFunction) -> Result<f64> {
        if self.frame != other.frame {
            return Err(Error::FrameMismatch);
        }
        let mut k = 0.0;
        for (&a, &ma) in &self.focal {
            for (&b, &mb) in &other.focal {
                if a.intersect(b).is_empty() {
                    k += ma * mb;
                }
            }
        }
        Ok(k)
    }

    /// Dempster's rule; see [`combine`].
    pub fn combine(&self, other: &MassFunction) -> Result<MassFunction> {
        combine(self, other)
    }
}

/// Orthogonal sum of two mass functions on the same frame.
///
/// Fails with [`Error::TotalConflict`] when the conflict is 1 within
/// [`CONFLICT_TOLERANCE`]. Without conflict no rescaling is applied, so the
/// products `m1(X)·m2(Y)` come out bit-exact.
pub fn combine(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction> {
    if m1.frame != m2.frame {
        return Err(Error::FrameMismatch);
    }
    // products are summed per intersection in sorted order, which makes
    // the result bit-identical under swapping the operands
    let mut terms: BTreeMap<FocalSet, Vec<f64>> = BTreeMap::new();
    for (&a, &ma) in &m1.focal {
        for (&b, &mb) in &m2.focal {
            terms.entry(a.intersect(b)).or_default().push(ma * mb);
        }
    }
    let sum = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.into_iter().sum::<f64>()
    };
    let conflict = terms.remove(&FocalSet::EMPTY).map_or(0.0, sum);
    let mut focal: BTreeMap<FocalSet, f64> = terms.into_iter().map(|(set, v)| (set, sum(v))).collect();
    if conflict >= 1.0 - CONFLICT_TOLERANCE {
        return Err(Error::TotalConflict(conflict));
    }
    if conflict > 0.0 {
        let scale = 1.0 - conflict;
        for mass in focal.values_mut() {
            *mass /= scale;
        }
    }
    focal.retain(|_, m| *m > 0.0);
    Ok(MassFunction {
        frame: m1.frame.clone(),
        focal,
    })
}

/// Left fold of [`combine`]; the empty sequence yields the vacuous function.
pub fn combine_all<'a, I>(frame: &Frame, masses: I) -> Result<MassFunction>
where
    I: IntoIterator<Item = &'a MassFunction>,
{
    let mut acc: Option<MassFunction> = None;
    for m in masses {
        if m.frame() != frame {
            return Err(Error::FrameMismatch);
        }
        acc = Some(match acc {
            None => m.clone(),
            Some(prev) => combine(&prev, m)?,
        });
    }
    Ok(acc.unwrap_or_else(|| MassFunction::vacuous(frame)))
}

#[derive(Serialize, Deserialize)]
struct FocalEntry {
    set: Vec<String>,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct MassDocument {
    frame: Frame,
    focal: Vec<FocalEntry>,
}

impl Serialize for MassFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MassDocument {
            frame: self.frame.clone(),
            focal: self
                .focal
                .iter()
                .map(|(&set, &mass)| FocalEntry {
                    set: self.frame.names(set),
                    mass,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MassFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = MassDocument::deserialize(deserializer)?;
        let entries = doc
            .focal
            .iter()
            .map(|e| Ok((doc.frame.set_of(&e.set)?, e.mass)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        MassFunction::new(&doc.frame, entries).map_err(serde::de::Error::custom)
    }
}
