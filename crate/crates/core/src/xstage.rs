//! X-coordinate stage of the containment search.
//!
//! Rects first receive an x-interval, which commits only the columns they
//! must cover wherever they land inside it (the compulsory part), and later a
//! single x-coordinate. A per-column free-height profile enforces the
//! cumulative constraint and feeds the wasted-space bound: for every height
//! `h`, the free cells in columns with at least `h` free cells must cover the
//! pending area of rects of height `h` or more.

use std::ops::ControlFlow;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{BoundingBox, Instance, Rect};
use crate::subset_sums::{dynamic_x_sums, SumSet};

/// Per-column free height of a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeHeightProfile {
    free: Vec<u64>,
    height: u64,
}

/// Reverses one [`FreeHeightProfile::commit_ranges`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[must_use]
pub struct UndoToken {
    ranges: [(u64, u64); 2],
    height: u64,
}

impl FreeHeightProfile {
    pub fn new(width: u64, height: u64) -> Self {
        FreeHeightProfile {
            free: vec![height; width as usize],
            height,
        }
    }

    pub fn free(&self) -> &[u64] {
        &self.free
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn total_free(&self) -> u64 {
        self.free.iter().sum()
    }

    /// `v[i - 1]` is `i` times the number of columns with exactly `i` free
    /// cells, for `i` in `1..=height`.
    pub fn histogram(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.height as usize];
        for &f in &self.free {
            if f > 0 {
                v[f as usize - 1] += f;
            }
        }
        v
    }

    /// Takes `h` cells from every column in the half-open ranges, or changes
    /// nothing and returns `None` if some column would go negative.
    pub fn commit_ranges(&mut self, ranges: &[(u64, u64)], h: u64) -> Option<UndoToken> {
        let mut token = UndoToken {
            ranges: [(0, 0); 2],
            height: h,
        };
        assert!(ranges.len() <= 2, "at most two ranges per commit");
        for (i, &(lo, hi)) in ranges.iter().enumerate() {
            if lo < hi && self.free[lo as usize..hi as usize].iter().any(|&f| f < h) {
                return None;
            }
            token.ranges[i] = (lo, hi.max(lo));
        }
        for &(lo, hi) in &token.ranges {
            for f in &mut self.free[lo as usize..hi as usize] {
                *f -= h;
            }
        }
        Some(token)
    }

    pub fn undo(&mut self, token: UndoToken) {
        for &(lo, hi) in &token.ranges {
            for f in &mut self.free[lo as usize..hi as usize] {
                *f += token.height;
            }
        }
    }
}

/// A value for an x-variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XValue {
    Interval { lo: u64, hi: u64 },
    Fixed(u64),
}

/// Columns every placement in `[lo, hi]` covers.
pub fn compulsory_part(lo: u64, hi: u64, width: u64) -> (u64, u64) {
    if hi < lo + width {
        (hi, lo + width)
    } else {
        (0, 0)
    }
}

/// Commits a rect of the given placed size: its full footprint for a fixed
/// x, its compulsory part for an interval.
pub fn commit(
    profile: &mut FreeHeightProfile,
    width: u64,
    height: u64,
    value: XValue,
) -> Option<UndoToken> {
    match value {
        XValue::Fixed(x) => profile.commit_ranges(&[(x, x + width)], height),
        XValue::Interval { lo, hi } => {
            profile.commit_ranges(&[compulsory_part(lo, hi, width)], height)
        }
    }
}

/// Narrows an interval-assigned rect to `x`, committing the columns its
/// compulsory part did not already cover.
pub fn refine(
    profile: &mut FreeHeightProfile,
    width: u64,
    height: u64,
    (lo, hi): (u64, u64),
    x: u64,
) -> Option<UndoToken> {
    let (c0, c1) = compulsory_part(lo, hi, width);
    if c0 < c1 {
        profile.commit_ranges(&[(x, c0), (c1, x + width)], height)
    } else {
        profile.commit_ranges(&[(x, x + width)], height)
    }
}

/// Pending demand `(height, area)` pairs against the profile; see the module
/// docs.
pub fn check_wasted_space(profile: &FreeHeightProfile, pending: &[(u64, u64)]) -> bool {
    let mut scratch = WastedSpace::default();
    scratch.check(profile.free(), pending.iter().copied())
}

#[derive(Debug, Default, Clone)]
struct WastedSpace {
    heights: Vec<u64>,
    supply: Vec<u64>,
    demand: Vec<u64>,
}

impl WastedSpace {
    fn check(&mut self, free: &[u64], pending: impl Iterator<Item = (u64, u64)> + Clone) -> bool {
        self.heights.clear();
        self.heights.extend(pending.clone().map(|(h, _)| h));
        if self.heights.is_empty() {
            return true;
        }
        self.heights.sort_unstable();
        self.heights.dedup();
        let k = self.heights.len();
        self.supply.clear();
        self.supply.resize(k, 0);
        self.demand.clear();
        self.demand.resize(k, 0);
        let lowest = self.heights[0];
        for &f in free {
            if f >= lowest {
                let j = self.heights.partition_point(|&h| h <= f) - 1;
                self.supply[j] += f;
            }
        }
        for (h, a) in pending {
            let j = self.heights.partition_point(|&x| x < h);
            self.demand[j] += a;
        }
        let (mut s, mut d) = (0u64, 0u64);
        for j in (0..k).rev() {
            s += self.supply[j];
            d += self.demand[j];
            if d > s {
                return false;
            }
        }
        true
    }
}

/// Solver variable order: decreasing width for oriented instances, and
/// ascending `(w + h) / (w * h)` when rects may rotate; ties by id.
pub fn order_rectangles(instance: &Instance) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..instance.len()).collect();
    let rects = instance.rects();
    if instance.oriented {
        ids.sort_by(|&a, &b| rects[b].width.cmp(&rects[a].width).then(a.cmp(&b)));
    } else {
        let key = |r: &Rect| {
            (
                (r.width + r.height) as u128,
                r.width as u128 * r.height as u128,
            )
        };
        ids.sort_by(|&a, &b| {
            let (na, da) = key(&rects[a]);
            let (nb, db) = key(&rects[b]);
            (na * db).cmp(&(nb * da)).then(a.cmp(&b))
        });
    }
    ids
}

/// For each rect and orientation, the largest `d` such that every left-wall
/// offset in `1..=d` is dominated by offset 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceTable {
    /// `prefix[id]` lists `(rotated, d)` per allowed orientation.
    prefix: Vec<Vec<(bool, u64)>>,
}

impl DominanceTable {
    pub fn dominated_prefix(&self, rect_id: usize, rotated: bool) -> u64 {
        self.prefix[rect_id]
            .iter()
            .find(|&&(r, _)| r == rotated)
            .map_or(0, |&(_, d)| d)
    }

    pub fn is_dominated(&self, rect_id: usize, rotated: bool, offset: u64) -> bool {
        offset > 0 && offset <= self.dominated_prefix(rect_id, rotated)
    }
}

fn allowed_orientations(r: &Rect, bbox: BoundingBox) -> Vec<(bool, u64, u64)> {
    r.orientations()
        .filter(|&(_, w, h)| w <= bbox.width && h <= bbox.height)
        .collect()
}

const GAP_MAX_RECTS: usize = 7;
const GAP_NODE_BUDGET: u64 = 200_000;

/// A placement of `rect` leaving a `g`-wide gap against the left wall is
/// dominated when no other rect could sit in the gap while sticking out of
/// it, every rect that fits the gap is narrower than `rect`, and all of them
/// also fit the gap together.
pub fn build_dominance(instance: &Instance, bbox: BoundingBox) -> DominanceTable {
    let rects = instance.rects();
    let shapes: Vec<Vec<(bool, u64, u64)>> =
        rects.iter().map(|r| allowed_orientations(r, bbox)).collect();
    let mut prefix = Vec::with_capacity(rects.len());
    for r in rects {
        let mut per = Vec::new();
        for &(rot, w, h) in &shapes[r.id] {
            per.push((rot, dominated_prefix(r.id, w, h, &shapes, bbox)));
        }
        prefix.push(per);
    }
    DominanceTable { prefix }
}

fn dominated_prefix(
    id: usize,
    w: u64,
    h: u64,
    shapes: &[Vec<(bool, u64, u64)>],
    bbox: BoundingBox,
) -> u64 {
    let max_gap = bbox.width - w;
    if max_gap == 0 {
        return 0;
    }
    // The sets of fitting and protruding rects only change where some
    // other rect's width starts to fit.
    let mut breaks: Vec<u64> = shapes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != id)
        .flat_map(|(_, s)| s.iter().map(|&(_, sw, _)| sw))
        .filter(|&sw| sw > 1 && sw <= max_gap)
        .collect();
    breaks.push(1);
    breaks.sort_unstable();
    breaks.dedup();
    let mut dominated = 0;
    for (i, &g) in breaks.iter().enumerate() {
        if !gap_dominated(id, w, g, h, shapes) {
            break;
        }
        dominated = breaks.get(i + 1).map_or(max_gap, |&next| next - 1);
    }
    dominated
}

fn gap_dominated(id: usize, w: u64, g: u64, h: u64, shapes: &[Vec<(bool, u64, u64)>]) -> bool {
    let mut fitting: Vec<Vec<(u64, u64)>> = Vec::new();
    for (j, s) in shapes.iter().enumerate() {
        if j == id {
            continue;
        }
        let in_gap: Vec<(u64, u64)> = s
            .iter()
            .filter(|&&(_, sw, sh)| sw <= g && sh <= h)
            .map(|&(_, sw, sh)| (sw, sh))
            .collect();
        // Swapping the rect with narrower gap contents always makes progress;
        // contents at least as wide could swap straight back.
        if in_gap.iter().any(|&(sw, _)| sw >= w) {
            return false;
        }
        if in_gap.is_empty() {
            if s.iter().any(|&(_, sw, _)| sw <= g) {
                return false;
            }
        } else {
            fitting.push(in_gap);
        }
    }
    if fitting.len() > GAP_MAX_RECTS {
        return false;
    }
    pack_small(&fitting, g, h, GAP_NODE_BUDGET).unwrap_or(false)
}

/// Exhaustively decides whether the shapes (one of each listed alternative
/// per item) fit together in a `width x height` box. Every coordinate is
/// tried among subset sums of the other items' dimensions. `None` when the
/// node budget runs out.
pub(crate) fn pack_small(items: &[Vec<(u64, u64)>], width: u64, height: u64, budget: u64) -> Option<bool> {
    let area: u64 = items
        .iter()
        .map(|alts| alts.iter().map(|&(w, h)| w * h).min().unwrap_or(0))
        .sum();
    if area > width * height {
        return Some(false);
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(items[i].iter().map(|&(w, h)| w * h).min()));
    let dims: Vec<u64> = items
        .iter()
        .flat_map(|alts| {
            let mut d: Vec<u64> = alts.iter().flat_map(|&(w, h)| [w, h]).collect();
            d.sort_unstable();
            d.dedup();
            d
        })
        .collect();
    let xs = crate::subset_sums::precompute(&dims, width).values();
    let ys = crate::subset_sums::precompute(&dims, height).values();
    let mut placed: Vec<(u64, u64, u64, u64)> = Vec::new();
    let mut nodes = 0u64;
    #[allow(clippy::too_many_arguments)]
    fn go(
        k: usize,
        order: &[usize],
        items: &[Vec<(u64, u64)>],
        bounds: (u64, u64),
        coords: (&[u64], &[u64]),
        placed: &mut Vec<(u64, u64, u64, u64)>,
        nodes: &mut u64,
        budget: u64,
    ) -> Option<bool> {
        if k == order.len() {
            return Some(true);
        }
        for &(w, h) in &items[order[k]] {
            for &x in coords.0.iter().take_while(|&&x| x + w <= bounds.0) {
                for &y in coords.1.iter().take_while(|&&y| y + h <= bounds.1) {
                    *nodes += 1;
                    if *nodes > budget {
                        return None;
                    }
                    let clash = placed
                        .iter()
                        .any(|&(px, py, pw, ph)| x < px + pw && px < x + w && y < py + ph && py < y + h);
                    if clash {
                        continue;
                    }
                    placed.push((x, y, w, h));
                    let r = go(k + 1, order, items, bounds, coords, placed, nodes, budget);
                    placed.pop();
                    if r != Some(false) {
                        return r;
                    }
                }
            }
        }
        Some(false)
    }
    go(
        0,
        &order,
        items,
        (width, height),
        (&xs, &ys),
        &mut placed,
        &mut nodes,
        budget,
    )
}

/// Splits the positions a rect may take into branches. A dominated prefix
/// yields the degenerate interval `[0, 0]` first and is skipped afterwards;
/// the rest is cut into `ceil(len / ceil(c * width))` contiguous intervals
/// whose sizes differ by at most one.
pub fn plan_intervals(width: u64, box_width: u64, c_param: f64, dominated: u64) -> Result<Vec<(u64, u64)>> {
    if !(c_param > 0.0 && c_param <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "interval parameter must be in (0, 1], got {c_param}"
        )));
    }
    if width > box_width {
        return Ok(Vec::new());
    }
    let last = box_width - width;
    let mut out = Vec::new();
    let start = if dominated > 0 {
        out.push((0, 0));
        dominated + 1
    } else {
        0
    };
    if start > last {
        return Ok(out);
    }
    let len = last - start + 1;
    let size = ((c_param * width as f64 - 1e-9).ceil() as u64).max(1);
    let branches = len.div_ceil(size);
    let (base, extra) = (len / branches, len % branches);
    let mut lo = start;
    for i in 0..branches {
        let n = base + u64::from(i < extra);
        out.push((lo, lo + n - 1));
        lo += n;
    }
    Ok(out)
}

/// Default interval parameter: tighter for all-square instances.
pub fn default_c_param(instance: &Instance) -> f64 {
    if instance.all_squares() {
        0.35
    } else {
        0.25
    }
}

/// One rect's x-coordinate and orientation in a complete assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XPlacement {
    pub rect_id: usize,
    pub x: u64,
    pub rotated: bool,
    pub width: u64,
    pub height: u64,
}

/// A complete x-stage leaf, listed in solver order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XAssignment {
    pub placements: Vec<XPlacement>,
}

#[derive(Debug, Clone)]
pub struct XConfig {
    pub c_param: f64,
    /// Restrict fixed x-coordinates to subset sums of other rects' widths.
    pub high_precision: bool,
    /// Skip left-wall offsets dominated by offset 0.
    pub dominance: bool,
    /// Keep the first rect in the left half of the box when no offset is
    /// dominated, since every packing has a mirror image.
    pub mirror: bool,
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct XOutcome {
    pub nodes: u64,
    pub leaves: u64,
    pub timed_out: bool,
    /// Most rects, counted along the solver order, that held an interval at
    /// the same time.
    pub deepest: usize,
    /// Length of a solver-order prefix whose rects alone already account for
    /// every refutation seen. Only tracked in high-precision mode.
    pub refuting_prefix: usize,
}

#[derive(Debug, Clone)]
struct Orient {
    rotated: bool,
    w: u64,
    h: u64,
    intervals: Vec<(u64, u64)>,
}

#[derive(Debug, Clone)]
struct Var {
    id: usize,
    area: u64,
    min_h: u64,
    widths: Vec<u64>,
    orients: Vec<Orient>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Unassigned,
    Interval { o: usize, lo: u64, hi: u64 },
    Fixed { o: usize, x: u64 },
}

pub struct XSolver {
    bbox: BoundingBox,
    vars: Vec<Var>,
    state: Vec<State>,
    profile: FreeHeightProfile,
    next_interval: usize,
    config: XConfig,
    outcome: XOutcome,
    scratch: WastedSpace,
    pending_buf: Vec<(usize, u64, u64)>,
    feasible_root: bool,
}

const TIME_CHECK_MASK: u64 = (1 << 16) - 1;

impl XSolver {
    pub fn new(instance: &Instance, bbox: BoundingBox, config: XConfig) -> Result<Self> {
        let order = order_rectangles(instance);
        let dominance = build_dominance(instance, bbox);
        let mut feasible_root = true;
        // Widest dominated gap per height, as (d, h).
        let mut gaps: Vec<(u64, u64)> = Vec::new();
        let mut vars = Vec::with_capacity(order.len());
        for &id in &order {
            let r = instance.rect(id);
            let mut orients = Vec::new();
            for (rotated, w, h) in allowed_orientations(r, bbox) {
                let d = if config.dominance {
                    dominance.dominated_prefix(id, rotated)
                } else {
                    0
                };
                if d > 0 {
                    gaps.push((d, h));
                }
                orients.push(Orient {
                    rotated,
                    w,
                    h,
                    intervals: plan_intervals(w, bbox.width, config.c_param, d)?,
                });
            }
            if orients.is_empty() {
                feasible_root = false;
            }
            let mut widths: Vec<u64> = orients.iter().map(|o| o.w).collect();
            widths.sort_unstable();
            widths.dedup();
            vars.push(Var {
                id,
                area: r.area()?,
                min_h: orients.iter().map(|o| o.h).min().unwrap_or(r.min_dim()),
                widths,
                orients,
            });
        }
        // Dominance moves never shift a rect right unless it sits in a gap,
        // so the mirror restriction survives them when the first rect fits
        // no dominated gap.
        let first_in_gap = vars.first().is_some_and(|v| {
            v.orients
                .iter()
                .any(|o| gaps.iter().any(|&(d, h)| o.w <= d && o.h <= h))
        });
        if config.mirror && !first_in_gap {
            if let Some(first) = vars.first_mut() {
                for o in &mut first.orients {
                    let lim = (bbox.width - o.w) / 2;
                    o.intervals.retain(|iv| iv.0 <= lim);
                    for iv in &mut o.intervals {
                        iv.1 = iv.1.min(lim);
                    }
                }
            }
        }
        let n = vars.len();
        Ok(XSolver {
            bbox,
            state: vec![State::Unassigned; n],
            vars,
            profile: FreeHeightProfile::new(bbox.width, bbox.height),
            next_interval: 0,
            config,
            outcome: XOutcome::default(),
            scratch: WastedSpace::default(),
            pending_buf: Vec::new(),
            feasible_root,
        })
    }

    /// Solver order as rect ids.
    pub fn order(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.id).collect()
    }

    /// Calls `visit` with every complete x-assignment until it breaks.
    pub fn run(&mut self, visit: &mut dyn FnMut(&XAssignment) -> ControlFlow<()>) -> XOutcome {
        let n = self.vars.len();
        if !self.feasible_root {
            let first_misfit = self.vars.iter().position(|v| v.orients.is_empty()).unwrap_or(0);
            self.outcome.refuting_prefix = first_misfit + 1;
            return self.outcome;
        }
        if self.wasted_ok() {
            let _ = self.search(visit);
        }
        if self.outcome.deepest >= n || self.outcome.leaves > 0 {
            self.outcome.refuting_prefix = n;
        }
        self.outcome.refuting_prefix = self
            .outcome
            .refuting_prefix
            .max(self.outcome.deepest + 1)
            .min(n);
        self.outcome
    }

    fn search(&mut self, visit: &mut dyn FnMut(&XAssignment) -> ControlFlow<()>) -> ControlFlow<()> {
        self.outcome.nodes += 1;
        if self.outcome.nodes & TIME_CHECK_MASK == 0 {
            if let Some(deadline) = self.config.deadline {
                if Instant::now() >= deadline {
                    self.outcome.timed_out = true;
                    return ControlFlow::Break(());
                }
            }
        }
        let n = self.vars.len();
        let interval_var = (self.next_interval < n).then_some(self.next_interval);
        let fixed_var = (0..self.next_interval).find(|&i| matches!(self.state[i], State::Interval { .. }));

        let pick_fixed = match (interval_var, fixed_var) {
            (None, None) => return self.emit(visit),
            (None, Some(_)) => true,
            (Some(_), None) => false,
            (Some(iv), Some(fx)) => self.residual_area(fx) >= self.first_compulsory_area(iv),
        };
        if pick_fixed {
            self.branch_fixed(fixed_var.unwrap_or_default(), visit)
        } else {
            self.branch_interval(interval_var.unwrap_or_default(), visit)
        }
    }

    fn residual_area(&self, i: usize) -> u64 {
        match self.state[i] {
            State::Interval { o, lo, hi } => {
                let or = &self.vars[i].orients[o];
                let (c0, c1) = compulsory_part(lo, hi, or.w);
                self.vars[i].area - or.h * (c1 - c0)
            }
            _ => 0,
        }
    }

    fn first_compulsory_area(&self, i: usize) -> u64 {
        self.vars[i]
            .orients
            .iter()
            .find_map(|o| {
                o.intervals.first().map(|&(lo, hi)| {
                    let (c0, c1) = compulsory_part(lo, hi, o.w);
                    o.h * (c1 - c0)
                })
            })
            .unwrap_or(0)
    }

    fn branch_interval(
        &mut self,
        i: usize,
        visit: &mut dyn FnMut(&XAssignment) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        for o in 0..self.vars[i].orients.len() {
            for k in 0..self.vars[i].orients[o].intervals.len() {
                let (w, h) = (self.vars[i].orients[o].w, self.vars[i].orients[o].h);
                let (lo, hi) = self.vars[i].orients[o].intervals[k];
                if lo == hi && lo > 0 && self.config.high_precision && !self.x_sums_for(i).contains(lo) {
                    continue;
                }
                let Some(token) = commit(&mut self.profile, w, h, XValue::Interval { lo, hi }) else {
                    continue;
                };
                self.state[i] = if lo == hi {
                    State::Fixed { o, x: lo }
                } else {
                    State::Interval { o, lo, hi }
                };
                self.next_interval += 1;
                self.outcome.deepest = self.outcome.deepest.max(self.next_interval);
                let flow = if self.wasted_ok() {
                    self.search(visit)
                } else {
                    ControlFlow::Continue(())
                };
                self.next_interval -= 1;
                self.state[i] = State::Unassigned;
                self.profile.undo(token);
                flow?;
            }
        }
        ControlFlow::Continue(())
    }

    fn branch_fixed(
        &mut self,
        i: usize,
        visit: &mut dyn FnMut(&XAssignment) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let State::Interval { o, lo, hi } = self.state[i] else {
            return ControlFlow::Continue(());
        };
        let (w, h) = (self.vars[i].orients[o].w, self.vars[i].orients[o].h);
        let xs: Vec<u64> = if self.config.high_precision {
            self.x_sums_for(i).range(lo, hi).collect()
        } else {
            (lo..=hi).collect()
        };
        for x in xs {
            let Some(token) = refine(&mut self.profile, w, h, (lo, hi), x) else {
                continue;
            };
            self.state[i] = State::Fixed { o, x };
            let flow = if self.wasted_ok() {
                self.search(visit)
            } else {
                ControlFlow::Continue(())
            };
            self.state[i] = State::Interval { o, lo, hi };
            self.profile.undo(token);
            flow?;
        }
        ControlFlow::Continue(())
    }

    /// Candidate x-coordinates for var `i`: the left wall and right edges of
    /// fixed rects, extended by widths of the other unfixed rects.
    fn x_sums_for(&self, i: usize) -> SumSet {
        let mut fixed = Vec::new();
        let mut unfixed = Vec::new();
        for (j, var) in self.vars.iter().enumerate() {
            match self.state[j] {
                State::Fixed { o, x } => fixed.push((x, var.orients[o].w)),
                _ if j == i => {}
                State::Interval { o, .. } => unfixed.push(vec![var.orients[o].w]),
                State::Unassigned => unfixed.push(var.widths.clone()),
            }
        }
        dynamic_x_sums(&fixed, &unfixed, self.bbox.width)
    }

    fn pending(&self) -> impl Iterator<Item = (usize, u64, u64)> + Clone + '_ {
        self.vars.iter().enumerate().filter_map(move |(j, var)| match self.state[j] {
            State::Fixed { .. } => None,
            State::Unassigned => Some((j, var.min_h, var.area)),
            State::Interval { o, .. } => Some((j, var.orients[o].h, self.residual_area(j))),
        })
    }

    fn wasted_ok(&mut self) -> bool {
        let mut pending = std::mem::take(&mut self.pending_buf);
        pending.clear();
        pending.extend(self.pending());
        let ok = self
            .scratch
            .check(self.profile.free(), pending.iter().map(|&(_, h, a)| (h, a)));
        if !ok && self.config.high_precision {
            // Smallest prefix of the solver order whose pending rects still
            // overflow the profile on their own.
            let (mut lo, mut hi) = (0usize, self.vars.len());
            let mut scratch = WastedSpace::default();
            while lo < hi {
                let mid = (lo + hi) / 2;
                let sub = pending.iter().filter(|&&(j, _, _)| j < mid).map(|&(_, h, a)| (h, a));
                if scratch.check(self.profile.free(), sub) {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            let needed = lo.max(self.next_interval);
            self.outcome.refuting_prefix = self.outcome.refuting_prefix.max(needed);
        }
        self.pending_buf = pending;
        ok
    }

    fn emit(&mut self, visit: &mut dyn FnMut(&XAssignment) -> ControlFlow<()>) -> ControlFlow<()> {
        self.outcome.leaves += 1;
        let placements = self
            .vars
            .iter()
            .zip(&self.state)
            .map(|(var, s)| match *s {
                State::Fixed { o, x } => {
                    let or = &var.orients[o];
                    XPlacement {
                        rect_id: var.id,
                        x,
                        rotated: or.rotated,
                        width: or.w,
                        height: or.h,
                    }
                }
                _ => unreachable!("emit with unfixed rect"),
            })
            .collect();
        visit(&XAssignment { placements })
    }
}

/// Collects every x-assignment of `instance` in `bbox`.
pub fn solve_x(instance: &Instance, bbox: BoundingBox, config: XConfig) -> Result<(Vec<XAssignment>, XOutcome)> {
    let mut solver = XSolver::new(instance, bbox, config)?;
    let mut found = Vec::new();
    let outcome = solver.run(&mut |a| {
        found.push(a.clone());
        ControlFlow::Continue(())
    });
    Ok((found, outcome))
}
