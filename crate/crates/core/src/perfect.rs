//! Turning a complete x-assignment into a perfect-packing instance.
//!
//! Once every x is known, the cells each column leaves empty are fixed in
//! number, so empty space can be represented by filler items and the y-stage
//! can demand that every cell be covered. Small residuals use one 1x1 filler
//! per empty cell. Large ones first widen rects over columns that must stay
//! empty beside them and then cover what is left with 1-tall strips.

use crate::error::{Error, Result};
use crate::model::{BoundingBox, Instance, Placement, Solution};
use crate::verify::verify;
use crate::xstage::XAssignment;

/// Above this many empty cells, fillers are consolidated.
pub const UNIT_FILLER_LIMIT: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ItemKind {
    Original,
    Strip,
    Unit,
}

/// An item with a fixed x-range and unknown y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Item {
    pub kind: ItemKind,
    pub rect_id: Option<usize>,
    pub x: u64,
    pub width: u64,
    pub height: u64,
    /// Position of the rect in solver order; fillers use `usize::MAX`.
    pub rank: usize,
    pub orig_x: u64,
    pub orig_width: u64,
    pub rotated: bool,
}

impl Item {
    fn filler(kind: ItemKind, x: u64, width: u64) -> Self {
        Item {
            kind,
            rect_id: None,
            x,
            width,
            height: 1,
            rank: usize::MAX,
            orig_x: x,
            orig_width: width,
            rotated: false,
        }
    }

    pub fn end(&self) -> u64 {
        self.x + self.width
    }

    pub fn area(&self) -> u64 {
        self.width * self.height
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfectInstance {
    pub items: Vec<Item>,
    pub bbox: BoundingBox,
}

impl PerfectInstance {
    pub fn item_area(&self) -> u64 {
        self.items.iter().map(Item::area).sum()
    }

    pub fn is_perfect(&self) -> bool {
        self.bbox.area().is_ok_and(|a| a == self.item_area())
    }

    pub fn originals(&self) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(|i| i.kind == ItemKind::Original)
    }
}

/// The assigned rects as items, in solver order.
pub fn original_items(assignment: &XAssignment) -> Vec<Item> {
    assignment
        .placements
        .iter()
        .enumerate()
        .map(|(rank, p)| Item {
            kind: ItemKind::Original,
            rect_id: Some(p.rect_id),
            x: p.x,
            width: p.width,
            height: p.height,
            rank,
            orig_x: p.x,
            orig_width: p.width,
            rotated: p.rotated,
        })
        .collect()
}

/// Empty cells of every column.
fn column_residuals(items: &[Item], bbox: BoundingBox) -> Result<Vec<u64>> {
    let mut load = vec![0u64; bbox.width as usize];
    for it in items {
        for l in &mut load[it.x as usize..it.end() as usize] {
            *l += it.height;
        }
    }
    load.into_iter()
        .map(|l| {
            bbox.height.checked_sub(l).ok_or_else(|| {
                Error::ContractViolation("x-assignment overfills a column".into())
            })
        })
        .collect()
}

/// Original rects plus one 1x1 filler per empty cell, each tied to its
/// column.
pub fn transform_units(assignment: &XAssignment, bbox: BoundingBox) -> Result<PerfectInstance> {
    let mut items = original_items(assignment);
    let residual = column_residuals(&items, bbox)?;
    for (c, &r) in residual.iter().enumerate() {
        items.extend((0..r).map(|_| Item::filler(ItemKind::Unit, c as u64, 1)));
    }
    Ok(PerfectInstance { items, bbox })
}

/// Whether no item other than `it` can ever occupy column `c` in the rows
/// `it` occupies: every item covering `c` shares a column with `it` and so
/// must sit above or below it.
fn absorbable(items: &[Item], idx: usize, c: u64) -> bool {
    let it = &items[idx];
    items.iter().enumerate().all(|(j, o)| {
        j == idx || !(o.x <= c && c < o.end()) || (o.x < it.end() && it.x < o.end())
    })
}

/// Widens every item over columns that are empty beside it in any packing,
/// first to the right for all items, then to the left.
pub fn widen_rects(items: &[Item], bbox: BoundingBox) -> Vec<Item> {
    let mut items = items.to_vec();
    // Which items cover a column only changes at item boundaries, and once a
    // column is absorbed every item covering it overlaps the widened item, so
    // a whole run between boundaries is absorbed at once.
    for idx in 0..items.len() {
        while items[idx].end() < bbox.width && absorbable(&items, idx, items[idx].end()) {
            let c = items[idx].end();
            let next = items
                .iter()
                .flat_map(|o| [o.x, o.end()])
                .filter(|&b| b > c)
                .min()
                .unwrap_or(bbox.width)
                .min(bbox.width);
            items[idx].width = next - items[idx].x;
        }
    }
    for idx in 0..items.len() {
        while items[idx].x > 0 && absorbable(&items, idx, items[idx].x - 1) {
            let c = items[idx].x - 1;
            let prev = items
                .iter()
                .flat_map(|o| [o.x, o.end()])
                .filter(|&b| b <= c)
                .max()
                .unwrap_or(0);
            items[idx].width += items[idx].x - prev;
            items[idx].x = prev;
        }
    }
    items
}

/// Covers the remaining empty space with 1-tall strips. Strips never cross
/// an item boundary, so each spans a run of columns that all items treat
/// alike.
pub fn consolidate_strips(items: &[Item], bbox: BoundingBox) -> Result<Vec<Item>> {
    let mut cuts: Vec<u64> = items.iter().flat_map(|i| [i.x, i.end()]).collect();
    cuts.extend([0, bbox.width]);
    cuts.sort_unstable();
    cuts.dedup();
    let mut strips = Vec::new();
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let load: u64 = items
            .iter()
            .filter(|i| i.x <= a && b <= i.end())
            .map(|i| i.height)
            .sum();
        let residual = bbox.height.checked_sub(load).ok_or_else(|| {
            Error::ContractViolation("x-assignment overfills a column".into())
        })?;
        strips.extend((0..residual).map(|_| Item::filler(ItemKind::Strip, a, b - a)));
    }
    Ok(strips)
}

/// Picks unit fillers for small residuals and widening plus strips
/// otherwise.
pub fn transform(instance: &Instance, assignment: &XAssignment, bbox: BoundingBox) -> Result<PerfectInstance> {
    let empty = bbox.area()? - instance.total_area()?;
    if empty <= UNIT_FILLER_LIMIT {
        return transform_units(assignment, bbox);
    }
    let mut items = widen_rects(&original_items(assignment), bbox);
    let strips = consolidate_strips(&items, bbox)?;
    items.extend(strips);
    Ok(PerfectInstance { items, bbox })
}

/// Maps y-coordinates of the perfect instance's originals back onto the
/// input rects. `ys[k]` belongs to `perfect.items[k]`.
pub fn restore(instance: &Instance, perfect: &PerfectInstance, ys: &[u64]) -> Result<Solution> {
    let mut placements: Vec<Placement> = perfect
        .items
        .iter()
        .zip(ys)
        .filter_map(|(it, &y)| {
            it.rect_id.map(|id| Placement {
                rect_id: id,
                x: it.orig_x,
                y,
                rotated: it.rotated,
            })
        })
        .collect();
    placements.sort_by_key(|p| p.rect_id);
    let solution = Solution {
        bbox: perfect.bbox,
        placements,
        stats: Default::default(),
    };
    let report = verify(instance, &solution);
    if !report.valid {
        return Err(Error::Internal(format!(
            "restored packing failed verification: {:?}",
            report.violations
        )));
    }
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xstage::XPlacement;

    fn assignment(rects: &[(usize, u64, u64, u64)]) -> XAssignment {
        XAssignment {
            placements: rects
                .iter()
                .map(|&(rect_id, x, width, height)| XPlacement {
                    rect_id,
                    x,
                    rotated: false,
                    width,
                    height,
                })
                .collect(),
        }
    }

    #[test]
    fn unit_filler_counts() {
        let full = assignment(&[(0, 0, 2, 2)]);
        let p = transform_units(&full, BoundingBox::new(2, 2)).unwrap();
        assert_eq!(p.items.len(), 1);

        let squares = assignment(&[(1, 0, 2, 2), (0, 2, 1, 1)]);
        let p = transform_units(&squares, BoundingBox::new(3, 2)).unwrap();
        assert_eq!(p.items.iter().filter(|i| i.kind == ItemKind::Unit).count(), 1);
        assert!(p.is_perfect());

        let lone = assignment(&[(0, 2, 3, 2)]);
        let p = transform_units(&lone, BoundingBox::new(6, 3)).unwrap();
        assert_eq!(p.items.iter().filter(|i| i.kind == ItemKind::Unit).count(), 12);
        assert!(p.is_perfect());
    }

    #[test]
    fn widening_three_rects() {
        // A 40x10 and a 10x20 against the left wall and a 20x10 at x=30
        // in a 60x50 box.
        let a = assignment(&[(0, 0, 40, 10), (1, 30, 20, 10), (2, 0, 10, 20)]);
        let bbox = BoundingBox::new(60, 50);
        let w = widen_rects(&original_items(&a), bbox);
        let spans: Vec<(u64, u64)> = w.iter().map(|i| (i.x, i.width)).collect();
        assert_eq!(spans, vec![(0, 60), (30, 30), (0, 30)]);
        let strips = consolidate_strips(&w, bbox).unwrap();
        let total: u64 = w.iter().map(Item::area).chain(strips.iter().map(Item::area)).sum();
        assert_eq!(total, 3000);
    }

    #[test]
    fn widening_leaves_blocked_and_spanning_rects() {
        let a = assignment(&[(0, 0, 2, 1), (1, 2, 2, 1)]);
        let w = widen_rects(&original_items(&a), BoundingBox::new(4, 3));
        assert_eq!(w[0].width, 2);
        assert_eq!(w[1].width, 2);
        let span = assignment(&[(0, 0, 5, 1)]);
        assert_eq!(widen_rects(&original_items(&span), BoundingBox::new(5, 2))[0].width, 5);
    }

    #[test]
    fn strips_follow_item_boundaries() {
        // Two 30-wide columns in a 60x40 box with 10 and 20 free rows.
        let a = assignment(&[(0, 0, 30, 30), (1, 30, 30, 20)]);
        let bbox = BoundingBox::new(60, 40);
        let items = widen_rects(&original_items(&a), bbox);
        let strips = consolidate_strips(&items, bbox).unwrap();
        assert_eq!(strips.len(), 30);
        assert_eq!(strips.iter().filter(|s| s.x == 0 && s.width == 30).count(), 10);
        assert_eq!(strips.iter().filter(|s| s.x == 30 && s.width == 30).count(), 20);

        let full = assignment(&[(0, 0, 2, 2)]);
        assert!(consolidate_strips(&original_items(&full), BoundingBox::new(2, 2))
            .unwrap()
            .is_empty());

        let column = assignment(&[(0, 0, 2, 3)]);
        let strips = consolidate_strips(&original_items(&column), BoundingBox::new(3, 3)).unwrap();
        assert_eq!(strips.len(), 3);
        assert!(strips.iter().all(|s| s.width == 1 && s.x == 2));
    }

    #[test]
    fn restore_drops_fillers_and_widening() {
        let inst = Instance::new(&[(40, 10), (20, 10), (10, 20)], true).unwrap();
        let a = assignment(&[(0, 0, 40, 10), (1, 30, 20, 10), (2, 0, 10, 20)]);
        let bbox = BoundingBox::new(60, 50);
        let mut items = widen_rects(&original_items(&a), bbox);
        items.extend(consolidate_strips(&items, bbox).unwrap());
        let perfect = PerfectInstance { items, bbox };
        assert!(perfect.is_perfect());
        let mut ys = vec![0; perfect.items.len()];
        ys[0] = 0;
        ys[1] = 10;
        ys[2] = 20;
        let s = restore(&inst, &perfect, &ys).unwrap();
        let got: Vec<(u64, u64)> = s.placements.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(got, vec![(0, 0), (30, 10), (0, 20)]);
    }

    #[test]
    fn overfilled_column_is_rejected() {
        let a = assignment(&[(0, 0, 2, 2), (1, 1, 2, 2)]);
        assert!(transform_units(&a, BoundingBox::new(3, 3)).is_err());
    }
}
