use proptest::prelude::*;

use evclass::belief::{combine, combine_all, FocalSet, Frame, MassFunction};
use evclass::eval::{contingency, ContingencyTable};
use evclass::features::{compactness, min_bounding_rect, roberts_edge_density};
use evclass::raster::{LabelMap, Raster};
use evclass::regions::{Connectivity, Pixel, Region, Segmentation};

fn frame(n: usize) -> Frame {
    Frame::new((0..n).map(|i| format!("c{i}"))).unwrap()
}

/// Frame size and 1..=4 focal elements as (bits, unnormalized weight).
fn mass_parts(n: usize) -> impl Strategy<Value = Vec<(u16, f64)>> {
    prop::collection::vec((1u16..(1 << n), 0.05f64..1.0), 1..=4)
}

fn build(fr: &Frame, parts: &[(u16, f64)]) -> MassFunction {
    let total: f64 = parts.iter().map(|p| p.1).sum();
    MassFunction::new(fr, parts.iter().map(|&(b, w)| (FocalSet::from_bits(b), w / total))).unwrap()
}

fn masses(max: usize) -> impl Strategy<Value = (usize, Vec<Vec<(u16, f64)>>)> {
    (1usize..=4).prop_flat_map(move |n| (Just(n), prop::collection::vec(mass_parts(n), 1..=max)))
}

/// Orthogonal sum of all masses at once, by enumeration of every focal
/// combination.
fn brute_force(n: usize, ms: &[MassFunction]) -> Option<Vec<f64>> {
    let lists: Vec<Vec<(u16, f64)>> = ms
        .iter()
        .map(|m| m.focal_elements().map(|(s, v)| (s.bits(), v)).collect())
        .collect();
    let mut out = vec![0.0; 1 << n];
    let mut idx = vec![0usize; lists.len()];
    loop {
        let (mut set, mut prod) = ((1u16 << n) - 1, 1.0);
        for (l, &i) in lists.iter().zip(&idx) {
            set &= l[i].0;
            prod *= l[i].1;
        }
        out[usize::from(set)] += prod;
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    let conflict = out[0];
    if conflict >= 1.0 - 1e-12 {
        return None;
    }
    Some(out.iter().map(|m| m / (1.0 - conflict)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn combination_matches_enumeration((n, parts) in masses(4)) {
        let fr = frame(n);
        let ms: Vec<MassFunction> = parts.iter().map(|p| build(&fr, p)).collect();
        match (combine_all(&fr, &ms), brute_force(n, &ms)) {
            (Ok(got), Some(want)) => {
                for s in 1..1u16 << n {
                    prop_assert!((got.mass(FocalSet::from_bits(s)) - want[usize::from(s)]).abs() <= 1e-12);
                }
                prop_assert!((got.total_mass() - 1.0).abs() <= 1e-9);
            }
            (Err(_), None) => {}
            (got, want) => prop_assert!(false, "combine {:?} vs enumeration {:?}", got.is_ok(), want.is_some()),
        }
    }

    #[test]
    fn commutative_and_vacuous_identity((n, parts) in masses(2)) {
        let fr = frame(n);
        let a = build(&fr, &parts[0]);
        let b = build(&fr, parts.last().unwrap());
        if let (Ok(ab), Ok(ba)) = (combine(&a, &b), combine(&b, &a)) {
            prop_assert_eq!(ab, ba);
        }
        prop_assert_eq!(combine(&a, &MassFunction::vacuous(&fr)).unwrap(), a.clone());
    }

    #[test]
    fn associative((n, parts) in (2usize..=4).prop_flat_map(|n| (Just(n), prop::collection::vec(mass_parts(n), 3)))) {
        let fr = frame(n);
        let (a, b, c) = (build(&fr, &parts[0]), build(&fr, &parts[1]), build(&fr, &parts[2]));
        let left = combine(&a, &b).and_then(|ab| combine(&ab, &c));
        let right = combine(&b, &c).and_then(|bc| combine(&a, &bc));
        if let (Ok(l), Ok(r)) = (left, right) {
            for s in 1..1u16 << n {
                let set = FocalSet::from_bits(s);
                prop_assert!((l.mass(set) - r.mass(set)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn interval_laws((n, parts) in masses(1)) {
        let fr = frame(n);
        let m = build(&fr, &parts[0]);
        for s in 1..1u16 << n {
            let p = FocalSet::from_bits(s);
            let iv = m.interval(p).unwrap();
            prop_assert!(iv.spt <= iv.pls + 1e-15);
            let not_p = fr.complement(p);
            let bel_not = if not_p.is_empty() { 0.0 } else { m.belief(not_p).unwrap() };
            prop_assert!((iv.pls - (1.0 - bel_not)).abs() <= 1e-12);
        }
    }

    #[test]
    fn same_focus_supports_accumulate(degrees in prop::collection::vec(0.0f64..1.0, 1..=8)) {
        let fr = frame(3);
        let focus = fr.singleton(1).unwrap();
        let ms: Vec<MassFunction> = degrees.iter().map(|&s| MassFunction::from_simple_support(&fr, focus, s).unwrap()).collect();
        let spt = combine_all(&fr, &ms).unwrap().interval(focus).unwrap().spt;
        let want = 1.0 - degrees.iter().map(|s| 1.0 - s).product::<f64>();
        prop_assert!((spt - want).abs() <= 1e-12);
    }

    #[test]
    fn two_heterogeneous_supports(s1 in 0.0f64..=1.0, s2 in 0.0f64..=1.0) {
        let fr = frame(3);
        let (a, b) = (FocalSet::from_bits(0b011), FocalSet::from_bits(0b110));
        let m = combine(
            &MassFunction::from_simple_support(&fr, a, s1).unwrap(),
            &MassFunction::from_simple_support(&fr, b, s2).unwrap(),
        ).unwrap();
        prop_assert_eq!(m.mass(FocalSet::from_bits(0b010)), s1 * s2);
        prop_assert_eq!(m.mass(a), s1 * (1.0 - s2));
        prop_assert_eq!(m.mass(b), s2 * (1.0 - s1));
        prop_assert_eq!(m.mass(fr.full()), (1.0 - s1) * (1.0 - s2));
    }
}

/// Union of up to three axis-aligned rectangles, deduplicated and sorted.
fn shape() -> impl Strategy<Value = Vec<Pixel>> {
    prop::collection::vec((0usize..10, 0usize..10, 1usize..10, 1usize..10), 1..=3).prop_map(|rects| {
        let mut px: Vec<Pixel> = rects
            .iter()
            .flat_map(|&(r0, c0, h, w)| (r0..r0 + h).flat_map(move |r| (c0..c0 + w).map(move |c| (r, c))))
            .collect();
        px.sort_unstable();
        px.dedup();
        px
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn shape_features_ignore_translation(px in shape(), dr in 0usize..30, dc in 0usize..30) {
        let moved: Vec<Pixel> = px.iter().map(|&(r, c)| (r + dr, c + dc)).collect();
        let (a, b) = (min_bounding_rect(&px).unwrap(), min_bounding_rect(&moved).unwrap());
        prop_assert!((a.fit - b.fit).abs() < 1e-9);
        prop_assert!((a.elong - b.elong).abs() < 1e-9);
        let (ra, rb) = (Region::new(1, 1, px).unwrap(), Region::new(1, 1, moved).unwrap());
        prop_assert_eq!(ra.size(), rb.size());
        prop_assert_eq!(compactness(&ra), compactness(&rb));
    }

    #[test]
    fn quarter_turn_keeps_shape_and_turns_direction(px in shape()) {
        // (r, c) -> (c, 40 - r): a quarter turn of the image
        let mut turned: Vec<Pixel> = px.iter().map(|&(r, c)| (c, 40 - r)).collect();
        turned.sort_unstable();
        let (a, b) = (min_bounding_rect(&px).unwrap(), min_bounding_rect(&turned).unwrap());
        prop_assert!((a.fit - b.fit).abs() < 1e-9);
        prop_assert!((a.elong - b.elong).abs() < 1e-9);
        if a.elong > 1.0 + 1e-6 {
            let delta = (b.direc - a.direc).rem_euclid(180.0);
            prop_assert!((delta - 90.0).abs() < 1e-9, "{} -> {}", a.direc, b.direc);
        }
        let (ra, rb) = (Region::new(1, 1, px).unwrap(), Region::new(1, 1, turned).unwrap());
        prop_assert!((compactness(&ra) - compactness(&rb)).abs() < 1e-12);
    }

    #[test]
    fn digital_compactness_is_bounded(px in shape()) {
        let c = compactness(&Region::new(1, 1, px).unwrap());
        prop_assert!(c > 0.0 && c <= std::f64::consts::FRAC_PI_4 + 1e-12);
    }

    #[test]
    fn texture_falls_with_threshold(values in prop::collection::vec(0u16..200, 64), t1 in 0.0f64..100.0, t2 in 0.0f64..100.0) {
        let raster = Raster::new(8, 8, 1, values).unwrap();
        let region = Region::new(1, 1, (0..8).flat_map(|r| (0..8).map(move |c| (r, c))).collect()).unwrap();
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let d_lo = roberts_edge_density(&raster, &region, None, lo).unwrap();
        let d_hi = roberts_edge_density(&raster, &region, None, hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&d_lo));
        prop_assert!(d_hi <= d_lo);
    }

    #[test]
    fn segmentation_partitions_and_round_trips(labels in prop::collection::vec(0u8..4, 12 * 9), eight in any::<bool>()) {
        let map = LabelMap::new(12, 9, labels).unwrap();
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let seg = Segmentation::from_labelmap(&map, conn);
        let covered: usize = seg.regions().map(|r| r.size()).sum();
        prop_assert_eq!(covered, map.labeled_count());
        prop_assert_eq!(seg.to_labelmap(), map);
    }

    #[test]
    fn contingency_counts_every_scored_pixel(truth in prop::collection::vec(0u8..4, 60), pred in prop::collection::vec(0u8..4, 60)) {
        let fr = frame(3);
        let (t, p) = (LabelMap::new(10, 6, truth.clone()).unwrap(), LabelMap::new(10, 6, pred.clone()).unwrap());
        let table = contingency(&t, &p, &fr).unwrap();
        let scored = truth.iter().zip(&pred).filter(|(a, b)| **a != 0 && **b != 0).count() as u64;
        let agree = truth.iter().zip(&pred).filter(|(a, b)| **a != 0 && a == b).count() as u64;
        prop_assert_eq!(table.total(), scored);
        prop_assert_eq!(table.trace(), agree);
        prop_assert_eq!(ContingencyTable::from_csv(&table.to_csv()).unwrap(), table);
    }
}

#[test]
fn enumeration_oracle_handles_total_conflict() {
    let fr = frame(2);
    let a = MassFunction::categorical(&fr, FocalSet::from_bits(0b01)).unwrap();
    let b = MassFunction::categorical(&fr, FocalSet::from_bits(0b10)).unwrap();
    assert!(brute_force(2, &[a.clone(), b.clone()]).is_none());
    assert!(combine(&a, &b).is_err());
}
