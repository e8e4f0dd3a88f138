//! Property tests for the exact cylinder machinery.

use orbitlab::markov::{doubling_map, BranchSpec, MapSpec, MarkovMap, Orientation};
use orbitlab::rat::{self, Rat};
use proptest::prelude::*;

fn tent_map() -> MarkovMap {
    MarkovMap::new(MapSpec {
        endpoints: vec![rat::int(0), rat::ratio(1, 2), rat::int(1)],
        branches: vec![
            BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
            BranchSpec { orientation: Orientation::Decreasing, image_first: 0, image_last: 1 },
        ],
    })
    .unwrap()
}

fn three_cell_map() -> MarkovMap {
    MarkovMap::new(MapSpec {
        endpoints: vec![rat::int(0), rat::ratio(1, 3), rat::ratio(2, 3), rat::int(1)],
        branches: vec![
            BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 1 },
            BranchSpec { orientation: Orientation::Increasing, image_first: 1, image_last: 2 },
            BranchSpec { orientation: Orientation::Increasing, image_first: 0, image_last: 2 },
        ],
    })
    .unwrap()
}

fn map_by_index(i: usize) -> MarkovMap {
    match i % 3 {
        0 => doubling_map(),
        1 => three_cell_map(),
        _ => tent_map(),
    }
}

/// Make an arbitrary symbol sequence admissible by clamping each symbol to
/// the successor range of its predecessor.
fn admissible_from(map: &MarkovMap, raw: &[u8]) -> Vec<u8> {
    let q = map.cell_count();
    let mut word = Vec::with_capacity(raw.len());
    let mut prev: Option<usize> = None;
    for &r in raw {
        let sym = match prev {
            None => r as usize % q,
            Some(p) => {
                let succ: Vec<usize> = map.successors(p).collect();
                succ[r as usize % succ.len()]
            }
        };
        word.push(sym as u8);
        prev = Some(sym);
    }
    word
}

proptest! {
    #[test]
    fn cylinder_nesting_within_distortion(map_idx in 0usize..3, raw in prop::collection::vec(0u8..8, 2..12)) {
        let map = map_by_index(map_idx);
        let word = admissible_from(&map, &raw);
        let l = map.constants().distortion.clone();
        let full = map.cylinder(&word).unwrap();
        let mut prev = map.cylinder(&word[..1]).unwrap();
        for m in 2..=word.len() {
            let child = map.cylinder(&word[..m]).unwrap();
            prop_assert!(child.lo >= prev.lo && child.hi <= prev.hi, "child not nested");
            let ratio = prev.len() / child.len();
            prop_assert!(ratio >= Rat::from_integer(1.into()), "ratio below 1");
            prop_assert!(ratio <= l, "ratio above distortion constant");
            prev = child;
        }
        prop_assert_eq!(&full.lo, &prev.lo);
        prop_assert_eq!(&full.hi, &prev.hi);
    }

    #[test]
    fn shift_compatibility(map_idx in 0usize..3, raw in prop::collection::vec(0u8..8, 2..12)) {
        let map = map_by_index(map_idx);
        let word = admissible_from(&map, &raw);
        let cyl = map.cylinder(&word).unwrap();
        let shifted = map.cylinder(&word[1..]).unwrap();
        let a = map.branch_apply(word[0] as usize, &cyl.lo);
        let b = map.branch_apply(word[0] as usize, &cyl.hi);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert_eq!(lo, shifted.lo);
        prop_assert_eq!(hi, shifted.hi);
    }

    #[test]
    fn locate_contains_point(map_idx in 0usize..3, num in 0i64..5000, den in 1i64..5000, n in 1usize..10) {
        let map = map_by_index(map_idx);
        let den = den.max(num + 1);
        let x = rat::ratio(num % den, den);
        let cyl = map.locate(&x, n).unwrap();
        prop_assert!(cyl.contains(&x), "locate result misses the point");
        prop_assert!(map.word_admissible(&cyl.word));
        prop_assert_eq!(cyl.word.len(), n);
    }

    #[test]
    fn coverings_tile_exactly(map_idx in 0usize..3, n in 0u32..8) {
        let map = map_by_index(map_idx);
        let cov = map.scale_covering(n);
        let r = rat::pow2(-(n as i32));
        let mut total = Rat::from_integer(0.into());
        let mut prev = Rat::from_integer(0.into());
        for c in &cov.members {
            prop_assert_eq!(&c.lo, &prev);
            prop_assert!(c.len() <= r);
            total += c.len();
            prev = c.hi.clone();
        }
        prop_assert_eq!(total, Rat::from_integer(1.into()));
    }
}
