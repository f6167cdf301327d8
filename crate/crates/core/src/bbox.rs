//! The minimal bounding box problem: test candidate boxes in order of area
//! until every smallest feasible box is known.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use crate::containment::{contain, ContainConfig, ContainOutcome};
use crate::error::{Error, Result};
use crate::model::{BoundingBox, Instance, Placement, SearchStats, Solution};
use crate::subset_sums::{precompute, separate_axis_sets, unique_choice_generator, SumSet};
use crate::verify::verify;
use crate::xstage::order_rectangles;

/// Dimensions above this switch `Auto` to high precision.
pub const AUTO_HIGH_PRECISION_DIM: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Auto,
    Low,
    High,
}

impl Precision {
    pub fn is_high(self, instance: &Instance) -> bool {
        match self {
            Precision::Low => false,
            Precision::High => true,
            Precision::Auto => instance.scale > 1 || instance.max_dim() > AUTO_HIGH_PRECISION_DIM,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnumConfig {
    pub precision: Precision,
    pub c_param: Option<f64>,
    pub deadline: Option<Instant>,
    /// Stop at the first feasible box instead of finishing its area.
    pub first_only: bool,
    /// Test equal-area boxes on separate threads.
    pub parallel: bool,
    /// Packings kept per optimal box; 0 keeps all.
    pub solutions_per_box: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            precision: Precision::Auto,
            c_param: None,
            deadline: None,
            first_only: false,
            parallel: false,
            solutions_per_box: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    pub optimal_area: u64,
    /// Ascending width.
    pub optimal_boxes: Vec<BoundingBox>,
    pub solutions: Vec<Solution>,
    pub stats: SearchStats,
}

/// Shapes a rect may take in a box of the given width, as `(w, h)`.
fn shapes(instance: &Instance, id: usize, width: u64) -> Vec<(u64, u64)> {
    let r = instance.rect(id);
    let mut v = vec![(r.width, r.height)];
    if r.orientable && !r.is_square() {
        v.push((r.height, r.width));
    }
    v.retain(|&(w, _)| w <= width);
    v
}

/// Bottom-left packing in a box as tall as the tallest rect.
pub fn greedy_upper_bound(instance: &Instance) -> Result<Solution> {
    let height = instance.tallest();
    let mut ids: Vec<usize> = (0..instance.len()).collect();
    let dims = |id: usize| {
        let r = instance.rect(id);
        if r.orientable && r.height > r.width {
            (r.height, r.width, true)
        } else {
            (r.width, r.height, false)
        }
    };
    ids.sort_by_key(|&id| {
        let (w, h, _) = dims(id);
        (Reverse(w as u128 * h as u128), Reverse(w), id)
    });
    let mut placed: Vec<(u64, u64, u64, u64)> = Vec::new();
    let mut placements = Vec::with_capacity(ids.len());
    for id in ids {
        let (w, h, rotated) = dims(id);
        let mut xs: Vec<u64> = std::iter::once(0).chain(placed.iter().map(|p| p.0 + p.2)).collect();
        let mut ys: Vec<u64> = std::iter::once(0).chain(placed.iter().map(|p| p.1 + p.3)).collect();
        xs.sort_unstable();
        xs.dedup();
        ys.sort_unstable();
        ys.dedup();
        let spot = xs.iter().find_map(|&x| {
            ys.iter()
                .copied()
                .find(|&y| {
                    y + h <= height
                        && placed
                            .iter()
                            .all(|&(px, py, pw, ph)| x >= px + pw || px >= x + w || y >= py + ph || py >= y + h)
                })
                .map(|y| (x, y))
        });
        let (x, y) = spot.ok_or_else(|| Error::Internal("greedy scan found no spot".into()))?;
        x.checked_add(w).ok_or(Error::PrecisionExceeded("greedy width"))?;
        placed.push((x, y, w, h));
        placements.push(Placement {
            rect_id: id,
            x,
            y,
            rotated,
        });
    }
    placements.sort_by_key(|p| p.rect_id);
    let width = placed.iter().map(|p| p.0 + p.2).max().unwrap_or(0);
    let solution = Solution {
        bbox: BoundingBox::new(width, height),
        placements,
        stats: Default::default(),
    };
    if !verify(instance, &solution).valid {
        return Err(Error::Internal("greedy packing failed verification".into()));
    }
    Ok(solution)
}

/// Lower bound on the height of any box of this width that holds the
/// instance, or `None` when some rect cannot fit the width at all. With
/// `y_sums`, the bound is rounded up to the next member.
pub fn min_height_for_width(instance: &Instance, width: u64, y_sums: Option<&SumSet>) -> Option<u64> {
    let n = instance.len();
    let opts: Vec<Vec<(u64, u64)>> = (0..n).map(|id| shapes(instance, id, width)).collect();
    if opts.iter().any(Vec::is_empty) || width == 0 {
        return None;
    }
    let min_h = |o: &[(u64, u64)]| o.iter().map(|s| s.1).min().unwrap_or(0);
    let tallest = opts.iter().map(|o| min_h(o)).max().unwrap_or(0);
    let area = instance.total_area().ok()?;
    let by_area = area.div_ceil(width);

    let mut pairwise = 0;
    for i in 0..n {
        for j in i + 1..n {
            let best = opts[i]
                .iter()
                .flat_map(|a| opts[j].iter().map(move |b| (a, b)))
                .map(|(a, b)| if a.0 + b.0 > width { a.1 + b.1 } else { a.1.max(b.1) })
                .min()
                .unwrap_or(0);
            pairwise = pairwise.max(best);
        }
    }

    // Rects wider than half the box pairwise share columns, so they share
    // one column and stack; a half-width rect must join them.
    let min_w = |o: &[(u64, u64)]| o.iter().map(|s| s.0).min().unwrap_or(0);
    let mut stacked = 0;
    let mut half: Option<u64> = None;
    for o in &opts {
        let w = min_w(o);
        if 2 * w > width {
            stacked += min_h(o);
        } else if 2 * w == width {
            let h = o.iter().filter(|s| 2 * s.0 >= width).map(|s| s.1).min().unwrap_or(0);
            half = Some(half.map_or(h, |m: u64| m.min(h)));
        }
    }
    if stacked > 0 {
        stacked += half.unwrap_or(0);
    }

    let bound = tallest.max(by_area).max(pairwise).max(stacked);
    match y_sums {
        Some(s) => s.next_at_or_above(bound),
        None => Some(bound),
    }
}

fn choice_sets(instance: &Instance) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
    let rects = instance.rects();
    if instance.oriented {
        (
            rects.iter().map(|r| vec![r.width]).collect(),
            rects.iter().map(|r| vec![r.height]).collect(),
        )
    } else {
        let both: Vec<Vec<u64>> = rects.iter().map(|r| vec![r.width, r.height]).collect();
        (both.clone(), both)
    }
}

/// False when the box width and height are each produced by exactly one
/// set of rects and that set is the same, with at least two members: the
/// rects would have to form both a row and a column.
pub fn mutex_compatible(width: u64, height: u64, instance: &Instance) -> bool {
    let max_h = instance
        .rects()
        .iter()
        .map(|r| if r.orientable { r.max_dim() } else { r.height })
        .max()
        .unwrap_or(0);
    if height == max_h {
        return true;
    }
    let (wc, hc) = choice_sets(instance);
    let sw = match unique_choice_generator(width, &wc) {
        Ok(Some(s)) => s,
        _ => return true,
    };
    if sw.len() < 2 {
        return true;
    }
    match unique_choice_generator(height, &hc) {
        Ok(Some(sh)) => sh != sw,
        _ => true,
    }
}

/// Height sums over the first `d + 1` rects of the solver order.
pub fn learned_height_floor(instance: &Instance, d: usize, cap: u64) -> SumSet {
    let order = order_rectangles(instance);
    let (_, hc) = choice_sets(instance);
    let dims: Vec<u64> = order
        .iter()
        .take(d + 1)
        .flat_map(|&id| hc[id].iter().copied())
        .collect();
    if instance.oriented {
        precompute(&dims, cap)
    } else {
        // Each rect contributes at most one of its sides.
        let mut set = SumSet::zero(cap);
        for &id in order.iter().take(d + 1) {
            let before = set.clone();
            for &v in &hc[id] {
                let mut s = before.clone();
                s.add_shifted(v);
                for x in s.iter() {
                    set.insert(x);
                }
            }
        }
        set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    area: u128,
    width: u64,
    height: u64,
}

struct Enumerator<'a> {
    instance: &'a Instance,
    cfg: &'a EnumConfig,
    high: bool,
    tall: bool,
    limit: u128,
    max_h: u64,
    y_sums: Option<SumSet>,
    floors: HashMap<usize, SumSet>,
    heap: BinaryHeap<Reverse<Candidate>>,
    stats: SearchStats,
}

impl<'a> Enumerator<'a> {
    fn new(instance: &'a Instance, cfg: &'a EnumConfig, greedy: &Solution) -> Result<Self> {
        let high = cfg.precision.is_high(instance);
        let tall = instance.forces_tall_boxes();
        let g = greedy.bbox;
        let limit = g.width as u128 * g.height as u128;
        let widest = instance.widest();
        let tallest = instance.tallest().max(1);
        let mut max_w = (limit / tallest as u128).min(u64::MAX as u128) as u64;
        if tall {
            max_w = max_w.min(isqrt(limit));
        }
        let max_h = (limit / widest.max(1) as u128).min(u64::MAX as u128) as u64;
        let (x_sums, y_sums) = if high {
            let (x, y) = separate_axis_sets(instance, BoundingBox::new(max_w, max_h));
            (Some(x), Some(y))
        } else {
            (None, None)
        };
        let mut e = Enumerator {
            instance,
            cfg,
            high,
            tall,
            limit,
            max_h,
            y_sums,
            floors: HashMap::new(),
            heap: BinaryHeap::new(),
            stats: SearchStats::default(),
        };
        let widths: Vec<u64> = match &x_sums {
            Some(s) => s.range(widest, max_w).collect(),
            None => (widest..=max_w).collect(),
        };
        for w in widths {
            if let Some(h) = e.first_height(w) {
                e.push(w, h);
            }
        }
        Ok(e)
    }

    fn push(&mut self, width: u64, height: u64) {
        let area = width as u128 * height as u128;
        if area <= self.limit {
            self.heap.push(Reverse(Candidate { area, width, height }));
        }
    }

    fn admissible(&self, width: u64, height: u64) -> bool {
        !self.high || mutex_compatible(width, height, self.instance)
    }

    fn first_height(&self, width: u64) -> Option<u64> {
        let mut h = min_height_for_width(self.instance, width, self.y_sums.as_ref())?;
        if self.tall {
            h = h.max(width);
        }
        self.next_height(width, h, None)
    }

    /// Smallest admissible height `>= from`, drawn from `floor` when given.
    fn next_height(&self, width: u64, from: u64, floor: Option<&SumSet>) -> Option<u64> {
        let mut h = from;
        loop {
            if width as u128 * h as u128 > self.limit {
                return None;
            }
            if let Some(set) = floor.or(self.y_sums.as_ref()) {
                h = set.next_at_or_above(h)?;
            }
            if self.admissible(width, h) {
                return Some(h);
            }
            h += 1;
        }
    }

    fn reinsert(&mut self, c: Candidate, out: &ContainOutcome) {
        let next = if self.high {
            let n = self.instance.len();
            let d = out.refuting_prefix.clamp(1, n) - 1;
            let (instance, cap) = (self.instance, self.max_h);
            let floor = self
                .floors
                .entry(d)
                .or_insert_with(|| learned_height_floor(instance, d, cap))
                .clone();
            self.next_height(c.width, c.height + 1, Some(&floor))
        } else {
            self.next_height(c.width, c.height + 1, None)
        };
        if let Some(h) = next {
            self.push(c.width, h);
        }
    }

    fn test(&self, batch: &[Candidate]) -> Vec<Result<ContainOutcome>> {
        let ccfg = ContainConfig {
            c_param: self.cfg.c_param,
            high_precision: self.high,
            deadline: self.cfg.deadline,
            max_solutions: self.cfg.solutions_per_box,
        };
        let run = |c: &Candidate| contain(self.instance, BoundingBox::new(c.width, c.height), &ccfg);
        if self.cfg.parallel && batch.len() > 1 && !self.cfg.first_only {
            std::thread::scope(|s| {
                let handles: Vec<_> = batch.iter().map(|c| s.spawn(|| run(c))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("worker panicked".into()))))
                    .collect()
            })
        } else {
            let mut out = Vec::with_capacity(batch.len());
            for c in batch {
                let r = run(c);
                let stop = self.cfg.first_only && matches!(&r, Ok(o) if o.feasible());
                out.push(r);
                if stop {
                    break;
                }
            }
            out
        }
    }

    fn run(mut self) -> Result<EnumerationResult> {
        let started = Instant::now();
        while let Some(Reverse(head)) = self.heap.pop() {
            let mut batch = vec![head];
            while let Some(Reverse(c)) = self.heap.peek().copied() {
                if c.area != head.area {
                    break;
                }
                self.heap.pop();
                batch.push(c);
            }
            let results = self.test(&batch);
            let mut boxes = Vec::new();
            let mut solutions = Vec::new();
            for (c, r) in batch.iter().zip(results) {
                let out = r?;
                self.stats.absorb(&out.stats);
                if out.timed_out {
                    return Err(Error::TimeLimit);
                }
                if out.feasible() {
                    boxes.push(BoundingBox::new(c.width, c.height));
                    solutions.extend(out.solutions);
                } else {
                    self.reinsert(*c, &out);
                }
            }
            if !boxes.is_empty() {
                self.stats.cpu_time = started.elapsed();
                for s in &mut solutions {
                    s.stats = self.stats;
                }
                return Ok(EnumerationResult {
                    optimal_area: head.area as u64,
                    optimal_boxes: boxes,
                    solutions,
                    stats: self.stats,
                });
            }
        }
        Err(Error::Internal("no box up to the greedy area was feasible".into()))
    }
}

fn isqrt(v: u128) -> u64 {
    let mut r = (v as f64).sqrt() as u128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r.min(u64::MAX as u128) as u64
}

/// Every minimum-area box, with at least one packing each.
pub fn enumerate_all_optimal(instance: &Instance, cfg: &EnumConfig) -> Result<EnumerationResult> {
    let greedy = greedy_upper_bound(instance)?;
    Enumerator::new(instance, cfg, &greedy)?.run()
}

/// Walks from the greedy box toward narrower boxes, reporting each strictly
/// smaller packing to `on_improve`. Returns the best packing found; stopping
/// at the deadline is not an error.
pub fn anytime_search(
    instance: &Instance,
    cfg: &EnumConfig,
    on_improve: &mut dyn FnMut(&Solution),
) -> Result<Solution> {
    let started = Instant::now();
    let mut best = greedy_upper_bound(instance)?;
    let mut stats = SearchStats::default();
    on_improve(&best);
    let mut best_area = best.bbox.area()?;
    let widest = instance.widest();
    let high = cfg.precision.is_high(instance);
    let ccfg = ContainConfig {
        c_param: cfg.c_param,
        high_precision: high,
        deadline: cfg.deadline,
        max_solutions: 1,
    };
    let mut w = best.bbox.width.saturating_sub(1);
    let mut h = best.bbox.height;
    while w >= widest && w > 0 {
        if cfg.deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let Some(lb) = min_height_for_width(instance, w, None) else {
            break;
        };
        h = h.max(lb);
        if w as u128 * h as u128 >= best_area as u128 {
            w -= 1;
            continue;
        }
        let out = contain(instance, BoundingBox::new(w, h), &ccfg)?;
        stats.absorb(&out.stats);
        if out.timed_out {
            break;
        }
        match out.solutions.into_iter().next() {
            Some(sol) => {
                best = sol;
                best_area = best.bbox.area()?;
                best.stats = stats;
                on_improve(&best);
                w -= 1;
            }
            None => h += 1,
        }
    }
    stats.cpu_time = started.elapsed();
    best.stats = stats;
    Ok(best)
}
