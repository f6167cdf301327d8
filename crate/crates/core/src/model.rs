//! Domain types shared by the whole pipeline.
//!
//! All geometry is integral. Rational benchmark instances are scaled by
//! [`Instance::scale`] before they reach this module, and every area or
//! coordinate sum goes through checked 64-bit arithmetic.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One item to pack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub id: usize,
    pub width: u64,
    pub height: u64,
    /// May be rotated by 90 degrees.
    pub orientable: bool,
    /// Created by the perfect-packing transform; never part of the input.
    pub filler: bool,
}

impl Rect {
    pub fn new(id: usize, width: u64, height: u64, orientable: bool) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "rect {id} has a zero dimension ({width}x{height})"
            )));
        }
        Ok(Rect {
            id,
            width,
            height,
            orientable,
            filler: false,
        })
    }

    pub fn filler(id: usize, width: u64, height: u64) -> Self {
        Rect {
            id,
            width,
            height,
            orientable: false,
            filler: true,
        }
    }

    pub fn area(&self) -> Result<u64> {
        self.width
            .checked_mul(self.height)
            .ok_or(Error::PrecisionExceeded("rect area"))
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    /// Width and height as placed.
    pub fn effective_dims(&self, rotated: bool) -> Result<(u64, u64)> {
        if rotated && !self.orientable {
            return Err(Error::ContractViolation(format!(
                "rect {} is not orientable",
                self.id
            )));
        }
        Ok(if rotated {
            (self.height, self.width)
        } else {
            (self.width, self.height)
        })
    }

    /// Distinct placed shapes, original orientation first.
    pub fn orientations(&self) -> impl Iterator<Item = (bool, u64, u64)> {
        let rotated = (self.orientable && !self.is_square()).then_some((true, self.height, self.width));
        std::iter::once((false, self.width, self.height)).chain(rotated)
    }

    pub fn min_dim(&self) -> u64 {
        self.width.min(self.height)
    }

    pub fn max_dim(&self) -> u64 {
        self.width.max(self.height)
    }
}

/// An ordered multiset of rectangles plus global metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    rects: Vec<Rect>,
    /// Rotation is forbidden for every rect.
    pub oriented: bool,
    /// Multiplier used to integerize a rational instance; 1 for native integers.
    pub scale: u64,
    pub label: String,
}

impl Instance {
    pub fn new(dims: &[(u64, u64)], oriented: bool) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("instance has no rectangles".into()));
        }
        let rects = dims
            .iter()
            .enumerate()
            .map(|(id, &(w, h))| Rect::new(id, w, h, !oriented))
            .collect::<Result<Vec<_>>>()?;
        let inst = Instance {
            rects,
            oriented,
            scale: 1,
            label: "custom".to_string(),
        };
        inst.total_area()?;
        Ok(inst)
    }

    pub fn with_scale(mut self, scale: u64) -> Self {
        self.scale = scale.max(1);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn rect(&self, id: usize) -> &Rect {
        &self.rects[id]
    }

    /// Sum of the areas of the non-filler rects.
    pub fn total_area(&self) -> Result<u64> {
        total_area(&self.rects)
    }

    pub fn all_squares(&self) -> bool {
        self.rects.iter().all(Rect::is_square)
    }

    /// Every `w x h` rect can be paired with a distinct `h x w` rect;
    /// squares pair with themselves.
    pub fn is_dimension_symmetric(&self) -> bool {
        let mut unmatched: std::collections::HashMap<(u64, u64), i64> = Default::default();
        for r in self.rects.iter().filter(|r| !r.is_square()) {
            *unmatched.entry((r.width, r.height)).or_default() += 1;
        }
        unmatched
            .iter()
            .all(|(&(w, h), &count)| unmatched.get(&(h, w)).copied().unwrap_or(0) == count)
    }

    /// Whether a `W x H` packing can always be turned into an `H x W` one,
    /// which lets the box search require `height >= width`.
    pub fn forces_tall_boxes(&self) -> bool {
        !self.oriented || self.all_squares() || self.is_dimension_symmetric()
    }

    /// Smallest box width any packing can have.
    pub fn widest(&self) -> u64 {
        self.rects
            .iter()
            .map(|r| if r.orientable { r.min_dim() } else { r.width })
            .max()
            .unwrap_or(0)
    }

    /// Tallest rect, with orientable rects lying on their long side.
    pub fn tallest(&self) -> u64 {
        self.rects
            .iter()
            .map(|r| if r.orientable { r.min_dim() } else { r.height })
            .max()
            .unwrap_or(0)
    }

    pub fn max_dim(&self) -> u64 {
        self.rects.iter().map(Rect::max_dim).max().unwrap_or(0)
    }
}

pub fn total_area(rects: &[Rect]) -> Result<u64> {
    rects
        .iter()
        .filter(|r| !r.filler)
        .try_fold(0u64, |acc, r| {
            acc.checked_add(r.area()?)
                .ok_or(Error::PrecisionExceeded("total area"))
        })
}

/// A candidate bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundingBox {
    pub width: u64,
    pub height: u64,
}

impl BoundingBox {
    pub fn new(width: u64, height: u64) -> Self {
        BoundingBox { width, height }
    }

    pub fn area(&self) -> Result<u64> {
        self.width
            .checked_mul(self.height)
            .ok_or(Error::PrecisionExceeded("box area"))
    }

    pub fn transposed(&self) -> Self {
        BoundingBox::new(self.height, self.width)
    }

    /// Narrow side first.
    pub fn normalized(&self) -> Self {
        if self.width <= self.height {
            *self
        } else {
            self.transposed()
        }
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}×{}", self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub rect_id: usize,
    pub x: u64,
    pub y: u64,
    pub rotated: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub boxes_tested: u64,
    pub x_solutions: u64,
    pub nodes_x: u64,
    pub nodes_y: u64,
    pub cpu_time: Duration,
}

impl SearchStats {
    pub fn absorb(&mut self, other: &SearchStats) {
        self.boxes_tested += other.boxes_tested;
        self.x_solutions += other.x_solutions;
        self.nodes_x += other.nodes_x;
        self.nodes_y += other.nodes_y;
        self.cpu_time += other.cpu_time;
    }
}

/// A box plus one placement per input rect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub bbox: BoundingBox,
    pub placements: Vec<Placement>,
    #[serde(default)]
    pub stats: SearchStats,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_area_examples() {
        let squares = Instance::new(&[(1, 1), (2, 2), (3, 3)], true).unwrap();
        assert_eq!(squares.total_area().unwrap(), 14);
        let perim = Instance::new(&[(1, 4), (2, 3), (3, 2), (4, 1)], true).unwrap();
        assert_eq!(perim.total_area().unwrap(), 20);
        let hp = Instance::new(&[(60, 30), (30, 20), (20, 15), (15, 12)], false).unwrap();
        assert_eq!(hp.total_area().unwrap(), 2880);
    }

    #[test]
    fn total_area_overflow_is_fatal() {
        let err = Instance::new(&[(u64::MAX, 2)], true).unwrap_err();
        assert!(matches!(err, Error::PrecisionExceeded(_)));
        let err = Instance::new(&[(1 << 32, 1 << 31), (1 << 32, 1 << 31)], true).unwrap_err();
        assert!(matches!(err, Error::PrecisionExceeded(_)));
    }

    #[test]
    fn effective_dims_examples() {
        let r = Rect::new(0, 3, 2, true).unwrap();
        assert_eq!(r.effective_dims(false).unwrap(), (3, 2));
        assert_eq!(r.effective_dims(true).unwrap(), (2, 3));
        let sq = Rect::new(1, 5, 5, true).unwrap();
        assert_eq!(sq.effective_dims(true).unwrap(), (5, 5));
        let fixed = Rect::new(2, 3, 2, false).unwrap();
        assert!(matches!(
            fixed.effective_dims(true),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(Rect::new(0, 0, 3, true).is_err());
        assert!(Instance::new(&[(2, 0)], true).is_err());
    }

    #[test]
    fn symmetry_detection() {
        let perim = Instance::new(&[(1, 4), (2, 3), (3, 2), (4, 1)], true).unwrap();
        assert!(perim.is_dimension_symmetric());
        let lopsided = Instance::new(&[(1, 4), (2, 3)], true).unwrap();
        assert!(!lopsided.is_dimension_symmetric());
        assert!(!lopsided.forces_tall_boxes());
        let squares = Instance::new(&[(1, 1), (2, 2)], true).unwrap();
        assert!(squares.forces_tall_boxes());
    }

    #[test]
    fn widest_respects_rotation() {
        let u = Instance::new(&[(1, 5), (4, 2)], false).unwrap();
        assert_eq!(u.widest(), 2);
        assert_eq!(u.tallest(), 2);
        let o = Instance::new(&[(1, 5), (4, 2)], true).unwrap();
        assert_eq!(o.widest(), 4);
        assert_eq!(o.tallest(), 5);
    }

    proptest::proptest! {
        #[test]
        fn double_rotation_is_identity(w in 1u64..1000, h in 1u64..1000) {
            let r = Rect::new(0, w, h, true).unwrap();
            let (w1, h1) = r.effective_dims(true).unwrap();
            let back = Rect::new(0, w1, h1, true).unwrap().effective_dims(true).unwrap();
            proptest::prop_assert_eq!(back, (w, h));
        }
    }
}
