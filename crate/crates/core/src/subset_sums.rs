//! Subset-sum sets over rectangle dimensions.
//!
//! In a packing where every rect is pushed as far left and down as it will
//! go, each coordinate is a sum of other rects' widths (or heights), and so
//! are the box dimensions. These sets restrict box candidates and coordinate
//! domains when the instance is scaled up to high precision.

use crate::error::{Error, Result};
use crate::model::{BoundingBox, Instance};

/// Sorted set of reachable sums in `0..=cap`, stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumSet {
    bits: Vec<u64>,
    cap: u64,
}

impl SumSet {
    /// The set `{0}`.
    pub fn zero(cap: u64) -> Self {
        let mut s = SumSet {
            bits: vec![0; (cap / 64 + 1) as usize],
            cap,
        };
        s.insert(0);
        s
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn insert(&mut self, v: u64) {
        if v <= self.cap {
            self.bits[(v / 64) as usize] |= 1 << (v % 64);
        }
    }

    pub fn contains(&self, v: u64) -> bool {
        v <= self.cap && self.bits[(v / 64) as usize] & (1 << (v % 64)) != 0
    }

    /// `self |= self + d`, truncated at the cap.
    pub fn add_shifted(&mut self, d: u64) {
        if d > self.cap {
            return;
        }
        let words = (d / 64) as usize;
        let bits = (d % 64) as u32;
        for i in (words..self.bits.len()).rev() {
            let src = i - words;
            let mut v = self.bits[src] << bits;
            if bits > 0 && src > 0 {
                v |= self.bits[src - 1] >> (64 - bits);
            }
            self.bits[i] |= v;
        }
        self.clear_above_cap();
    }

    fn clear_above_cap(&mut self) {
        let last = self.bits.len() - 1;
        let used = (self.cap % 64) + 1;
        if used < 64 {
            self.bits[last] &= (1u64 << used) - 1;
        }
    }

    /// Smallest member `>= v`.
    pub fn next_at_or_above(&self, v: u64) -> Option<u64> {
        if v > self.cap {
            return None;
        }
        let mut i = (v / 64) as usize;
        let mut word = self.bits[i] & (!0u64 << (v % 64));
        loop {
            if word != 0 {
                return Some(i as u64 * 64 + word.trailing_zeros() as u64);
            }
            i += 1;
            if i >= self.bits.len() {
                return None;
            }
            word = self.bits[i];
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let t = w.trailing_zeros() as u64;
                    w &= w - 1;
                    i as u64 * 64 + t
                })
            })
        })
    }

    /// Members in `lo..=hi`, ascending.
    pub fn range(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let mut next = self.next_at_or_above(lo);
        std::iter::from_fn(move || {
            let v = next.filter(|&v| v <= hi)?;
            next = self.next_at_or_above(v + 1);
            Some(v)
        })
    }

    pub fn values(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All subset sums of `dims` that do not exceed `cap`.
pub fn precompute(dims: &[u64], cap: u64) -> SumSet {
    let mut set = SumSet::zero(cap);
    for &d in dims {
        set.add_shifted(d);
    }
    set
}

/// Coordinate sets for one box: widths for x and heights for y, or one
/// shared set of all dimensions when rects may rotate.
pub fn separate_axis_sets(instance: &Instance, bbox: BoundingBox) -> (SumSet, SumSet) {
    if instance.oriented {
        let widths: Vec<u64> = instance.rects().iter().map(|r| r.width).collect();
        let heights: Vec<u64> = instance.rects().iter().map(|r| r.height).collect();
        (precompute(&widths, bbox.width), precompute(&heights, bbox.height))
    } else {
        let dims = all_dims(instance);
        (precompute(&dims, bbox.width), precompute(&dims, bbox.height))
    }
}

pub(crate) fn all_dims(instance: &Instance) -> Vec<u64> {
    instance
        .rects()
        .iter()
        .flat_map(|r| {
            let rotated = (r.orientable && !r.is_square()).then_some(r.height);
            std::iter::once(r.width).chain(rotated)
        })
        .collect()
}

/// Candidate x-coordinates at one search node: the left wall, the right
/// edge of every fixed rect, and everything reachable from those by adding
/// the candidate widths of rects that are not fixed yet.
pub fn dynamic_x_sums(fixed: &[(u64, u64)], unfixed: &[Vec<u64>], cap: u64) -> SumSet {
    let mut set = SumSet::zero(cap);
    for &(x, w) in fixed {
        if let Some(edge) = x.checked_add(w) {
            set.insert(edge);
        }
    }
    for widths in unfixed {
        let before = set.clone();
        for &w in widths {
            let mut shifted = before.clone();
            shifted.add_shifted(w);
            for (dst, src) in set.bits.iter_mut().zip(shifted.bits.iter()) {
                *dst |= src;
            }
        }
    }
    set
}

/// The unique subset of `dims` (as indices) summing to `target`, if exactly
/// one subset does.
pub fn unique_generator(target: u64, dims: &[u64]) -> Result<Option<Vec<usize>>> {
    let choices: Vec<Vec<u64>> = dims.iter().map(|&d| vec![d]).collect();
    unique_choice_generator(target, &choices)
}

/// Like [`unique_generator`], but item `i` contributes nothing or one value
/// from `choices[i]`. Returns the indices of the contributing items when
/// exactly one assignment reaches `target`.
pub fn unique_choice_generator(target: u64, choices: &[Vec<u64>]) -> Result<Option<Vec<usize>>> {
    let t = target as usize;
    // ways[i][s]: assignments of the first i items summing to s, saturated at 2.
    let mut ways = vec![vec![0u8; t + 1]; choices.len() + 1];
    ways[0][0] = 1;
    for (i, opts) in choices.iter().enumerate() {
        let mut opts = opts.clone();
        opts.sort_unstable();
        opts.dedup();
        let (prev, next) = ways.split_at_mut(i + 1);
        let (prev, next) = (&prev[i], &mut next[0]);
        for s in 0..=t {
            let mut c = prev[s] as u16;
            for &o in &opts {
                if o as usize <= s {
                    c += prev[s - o as usize] as u16;
                }
            }
            next[s] = c.min(2) as u8;
        }
    }
    match ways[choices.len()][t] {
        0 => Err(Error::ContractViolation(format!(
            "{target} is not a subset sum"
        ))),
        1 => {
            let mut picked = Vec::new();
            let mut s = t;
            for i in (0..choices.len()).rev() {
                if ways[i][s] == 1 {
                    continue;
                }
                let o = choices[i]
                    .iter()
                    .map(|&o| o as usize)
                    .find(|&o| o <= s && ways[i][s - o] == 1)
                    .ok_or_else(|| Error::Internal("subset reconstruction failed".into()))?;
                picked.push(i);
                s -= o;
            }
            picked.reverse();
            Ok(Some(picked))
        }
        _ => Ok(None),
    }
}

pub fn next_sum_at_or_above(set: &SumSet, v: u64) -> Option<u64> {
    set.next_at_or_above(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn brute_sums(dims: &[u64], cap: u64) -> Vec<u64> {
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << dims.len()) {
            let s: u64 = (0..dims.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| dims[i])
                .sum();
            if s <= cap {
                out.insert(s);
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn precompute_examples() {
        assert_eq!(precompute(&[1, 2], 10).values(), vec![0, 1, 2, 3]);
        assert_eq!(precompute(&[2, 2, 3], 5).values(), brute_sums(&[2, 2, 3], 5));
        assert_eq!(precompute(&[2, 2, 3], 5).values(), vec![0, 2, 3, 4, 5]);
        assert_eq!(precompute(&[], 9).values(), vec![0]);
    }

    #[test]
    fn separate_sets_examples() {
        let oriented = Instance::new(&[(3, 2), (4, 1)], true).unwrap();
        let (xs, ys) = separate_axis_sets(&oriented, BoundingBox::new(10, 10));
        assert_eq!(xs.values(), brute_sums(&[3, 4], 10));
        assert_eq!(xs.values(), vec![0, 3, 4, 7]);
        assert_eq!(ys.values(), vec![0, 1, 2, 3]);

        let unoriented = Instance::new(&[(3, 2)], false).unwrap();
        let (xs, ys) = separate_axis_sets(&unoriented, BoundingBox::new(10, 10));
        assert_eq!(xs.values(), vec![0, 2, 3, 5]);
        assert_eq!(ys.values(), vec![0, 2, 3, 5]);

        let unit = Instance::new(&[(1, 1)], true).unwrap();
        let (xs, ys) = separate_axis_sets(&unit, BoundingBox::new(1, 1));
        assert_eq!(xs.values(), vec![0, 1]);
        assert_eq!(ys.values(), vec![0, 1]);
    }

    #[test]
    fn dynamic_sums_examples() {
        assert_eq!(dynamic_x_sums(&[(2, 3)], &[], 10).values(), vec![0, 5]);
        assert_eq!(
            dynamic_x_sums(&[], &[vec![2], vec![3]], 10).values(),
            brute_sums(&[2, 3], 10)
        );
        // {0, 4} seeded, then +2: {0, 2, 4, 6}; 6 exceeds the cap.
        let expected: Vec<u64> = [0u64, 4]
            .iter()
            .flat_map(|&b| [b, b + 2])
            .filter(|&v| v <= 5)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        assert_eq!(dynamic_x_sums(&[(0, 4)], &[vec![2]], 5).values(), expected);
        assert_eq!(expected, vec![0, 2, 4]);
    }

    #[test]
    fn dynamic_sums_with_rotation_choices() {
        // An unfixed unoriented 2x3 contributes either dimension, never both.
        let s = dynamic_x_sums(&[], &[vec![2, 3]], 10);
        assert_eq!(s.values(), vec![0, 2, 3]);
    }

    #[test]
    fn unique_generator_examples() {
        assert_eq!(unique_generator(7, &[3, 4, 10]).unwrap(), Some(vec![0, 1]));
        assert_eq!(unique_generator(4, &[4, 2, 2]).unwrap(), None);
        assert_eq!(unique_generator(0, &[5, 6]).unwrap(), Some(vec![]));
        assert!(matches!(
            unique_generator(1, &[5, 6]),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn next_sum_examples() {
        let s = precompute(&[2, 3], 5);
        assert_eq!(s.values(), vec![0, 2, 3, 5]);
        assert_eq!(next_sum_at_or_above(&s, 4), Some(5));
        assert_eq!(next_sum_at_or_above(&s, 0), Some(0));
        assert_eq!(next_sum_at_or_above(&s, 6), None);
    }

    #[test]
    fn bitset_crosses_word_boundaries() {
        let s = precompute(&[63, 64, 65, 130], 400);
        assert_eq!(s.values(), brute_sums(&[63, 64, 65, 130], 400));
        assert_eq!(s.range(60, 130).collect::<Vec<_>>(), vec![63, 64, 65, 127, 128, 129, 130]);
    }

    proptest! {
        #[test]
        fn precompute_matches_enumeration(
            dims in prop::collection::vec(1u64..200, 0..=12),
            cap in 0u64..1500,
        ) {
            prop_assert_eq!(precompute(&dims, cap).values(), brute_sums(&dims, cap));
        }

        #[test]
        fn unique_generator_sums_to_target(
            dims in prop::collection::vec(1u64..30, 1..=10),
            pick in any::<u16>(),
        ) {
            let target: u64 = dims.iter().enumerate()
                .filter(|(i, _)| pick & (1 << i) != 0)
                .map(|(_, &d)| d)
                .sum();
            let subsets = (0u32..(1 << dims.len()))
                .filter(|m| (0..dims.len()).filter(|i| m & (1 << i) != 0).map(|i| dims[i]).sum::<u64>() == target)
                .count();
            match unique_generator(target, &dims).unwrap() {
                Some(idx) => {
                    prop_assert_eq!(subsets, 1);
                    prop_assert_eq!(idx.iter().map(|&i| dims[i]).sum::<u64>(), target);
                }
                None => prop_assert!(subsets > 1),
            }
        }
    }
}
