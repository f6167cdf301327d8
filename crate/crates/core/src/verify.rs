//! Independent solution checks and an exhaustive oracle for tiny instances.
//!
//! Nothing here touches solver state: overlap is decided by comparing
//! coordinate intervals pairwise, not by drawing into a bitmap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundingBox, Instance, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Overlap,
    OutOfBounds,
    BadRotation,
    WrongCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub rect_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub empty_cells: u64,
    /// Fraction of the box left empty, in `[0, 1]`.
    pub empty_pct: f64,
}

pub fn verify(instance: &Instance, solution: &Solution) -> VerifyReport {
    let mut violations = Vec::new();
    let bbox = solution.bbox;
    let n = instance.len();

    let mut seen = vec![0usize; n];
    for p in &solution.placements {
        if p.rect_id < n {
            seen[p.rect_id] += 1;
        }
    }
    let bad_ids: Vec<usize> = solution
        .placements
        .iter()
        .map(|p| p.rect_id)
        .filter(|&id| id >= n)
        .chain((0..n).filter(|&id| seen[id] != 1))
        .collect();
    if solution.placements.len() != n || !bad_ids.is_empty() {
        violations.push(Violation {
            kind: ViolationKind::WrongCount,
            rect_ids: bad_ids,
        });
    }

    // Boxes as (x0, x1, y0, y1), skipping placements that cannot be sized.
    let mut boxes = Vec::new();
    for p in &solution.placements {
        let Some(r) = instance.rects().get(p.rect_id) else {
            continue;
        };
        if p.rotated && !r.orientable {
            violations.push(Violation {
                kind: ViolationKind::BadRotation,
                rect_ids: vec![p.rect_id],
            });
        }
        let (w, h) = if p.rotated {
            (r.height, r.width)
        } else {
            (r.width, r.height)
        };
        let (x1, y1) = (p.x.checked_add(w), p.y.checked_add(h));
        match (x1, y1) {
            (Some(x1), Some(y1)) if x1 <= bbox.width && y1 <= bbox.height => {}
            _ => violations.push(Violation {
                kind: ViolationKind::OutOfBounds,
                rect_ids: vec![p.rect_id],
            }),
        }
        boxes.push((
            p.rect_id,
            p.x,
            x1.unwrap_or(u64::MAX),
            p.y,
            y1.unwrap_or(u64::MAX),
        ));
    }
    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i + 1..] {
            if a.1 < b.2 && b.1 < a.2 && a.3 < b.4 && b.3 < a.4 {
                violations.push(Violation {
                    kind: ViolationKind::Overlap,
                    rect_ids: vec![a.0, b.0],
                });
            }
        }
    }

    let box_area = bbox.width as u128 * bbox.height as u128;
    let used = instance.total_area().unwrap_or(u64::MAX) as u128;
    let empty_cells = box_area.saturating_sub(used).min(u64::MAX as u128) as u64;
    let empty_pct = if box_area == 0 {
        0.0
    } else {
        empty_cells as f64 / box_area as f64
    };
    VerifyReport {
        valid: violations.is_empty(),
        violations,
        empty_cells,
        empty_pct,
    }
}

pub const ORACLE_MAX_RECTS: usize = 5;
pub const ORACLE_MAX_DIM: u64 = 8;

/// Minimum box area and every box of that area, by trying every integer
/// placement of every rect in every candidate box. When the instance allows
/// transposing boxes, only boxes with `width <= height` are listed.
pub fn brute_force_optimal(instance: &Instance, dim_cap: u64) -> Result<(u64, Vec<BoundingBox>)> {
    if instance.len() > ORACLE_MAX_RECTS || dim_cap > ORACLE_MAX_DIM || instance.max_dim() > dim_cap {
        return Err(Error::InvalidArgument(format!(
            "oracle handles at most {ORACLE_MAX_RECTS} rects with sides up to {ORACLE_MAX_DIM}"
        )));
    }
    let total = instance.total_area()?;
    let span: u64 = instance.rects().iter().map(|r| r.max_dim()).sum();
    let tall_only = instance.forces_tall_boxes();
    let mut boxes: Vec<BoundingBox> = (1..=span)
        .flat_map(|w| (1..=span).map(move |h| BoundingBox::new(w, h)))
        .filter(|b| b.width * b.height >= total && (!tall_only || b.width <= b.height))
        .collect();
    boxes.sort_by_key(|b| (b.width * b.height, b.width));
    let mut best: Option<u64> = None;
    let mut found = Vec::new();
    for b in boxes {
        let area = b.width * b.height;
        if best.is_some_and(|a| area > a) {
            break;
        }
        if packs(instance, b) {
            best = Some(area);
            found.push(b);
        }
    }
    let area = best.ok_or_else(|| Error::Internal("no box fits".into()))?;
    Ok((area, found))
}

fn packs(instance: &Instance, bbox: BoundingBox) -> bool {
    let mut order: Vec<usize> = (0..instance.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(instance.rect(i).area().unwrap_or(0)));
    let mut placed: Vec<(u64, u64, u64, u64)> = Vec::new();
    fn go(k: usize, order: &[usize], inst: &Instance, bbox: BoundingBox, placed: &mut Vec<(u64, u64, u64, u64)>) -> bool {
        if k == order.len() {
            return true;
        }
        let r = inst.rect(order[k]);
        let shapes: Vec<(u64, u64)> = if r.orientable && r.width != r.height {
            vec![(r.width, r.height), (r.height, r.width)]
        } else {
            vec![(r.width, r.height)]
        };
        for (w, h) in shapes {
            if w > bbox.width || h > bbox.height {
                continue;
            }
            // The box is symmetric under both reflections, so the first rect
            // can stay in the lower-left quadrant.
            let (xmax, ymax) = if k == 0 {
                ((bbox.width - w) / 2, (bbox.height - h) / 2)
            } else {
                (bbox.width - w, bbox.height - h)
            };
            for x in 0..=xmax {
                for y in 0..=ymax {
                    let free = placed
                        .iter()
                        .all(|&(px, py, pw, ph)| x >= px + pw || px >= x + w || y >= py + ph || py >= y + h);
                    if free {
                        placed.push((x, y, w, h));
                        if go(k + 1, order, inst, bbox, placed) {
                            return true;
                        }
                        placed.pop();
                    }
                }
            }
        }
        false
    }
    go(0, &order, instance, bbox, &mut placed)
}
