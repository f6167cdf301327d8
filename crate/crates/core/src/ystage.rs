//! Y-coordinate stage: fill a perfect-packing instance corner by corner.
//!
//! Every x is fixed and the items cover the box exactly, so the search can
//! repeatedly take the first empty cell (columns left to right, cells bottom
//! to top) and branch on which item has its lower-left corner there.
//! Identical items are interchangeable and tried once per corner.

use std::ops::ControlFlow;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::perfect::{Item, ItemKind, PerfectInstance};
use crate::subset_sums::SumSet;

/// Occupancy bitmap. Columns are grouped into segments between cut points;
/// every item must start and end on a cut, so a segment's columns always
/// look alike and store a single bit column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyGrid {
    cuts: Vec<u64>,
    height: u64,
    words: usize,
    bits: Vec<u64>,
}

fn range_masks(y: u64, h: u64) -> impl Iterator<Item = (usize, u64)> {
    let (lo, hi) = (y, y + h);
    let (w0, w1) = ((lo / 64) as usize, hi.div_ceil(64) as usize);
    (w0..w1).map(move |w| {
        let start = (w as u64 * 64).max(lo) - w as u64 * 64;
        let end = ((w as u64 + 1) * 64).min(hi) - w as u64 * 64;
        let mask = if end - start == 64 {
            !0
        } else {
            ((1u64 << (end - start)) - 1) << start
        };
        (w, mask)
    })
}

impl OccupancyGrid {
    /// One segment per column.
    pub fn new(width: u64, height: u64) -> Self {
        Self::with_cuts((0..=width).collect(), height)
    }

    /// `cuts` must be strictly ascending and start at 0.
    pub fn with_cuts(cuts: Vec<u64>, height: u64) -> Self {
        let words = (height as usize).div_ceil(64).max(1);
        let segs = cuts.len().saturating_sub(1);
        OccupancyGrid {
            cuts,
            height,
            words,
            bits: vec![0; segs * words],
        }
    }

    pub fn width(&self) -> u64 {
        self.cuts.last().copied().unwrap_or(0)
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn segments(&self) -> usize {
        self.cuts.len() - 1
    }

    /// Segment starting exactly at `x`.
    pub fn segment_starting_at(&self, x: u64) -> Option<usize> {
        self.cuts.binary_search(&x).ok().filter(|&s| s < self.segments())
    }

    fn seg_range(&self, x: u64, w: u64) -> Option<(usize, usize)> {
        let lo = self.cuts.binary_search(&x).ok()?;
        let hi = self.cuts.binary_search(&(x + w)).ok()?;
        Some((lo, hi))
    }

    fn seg_bits(&self, s: usize) -> &[u64] {
        &self.bits[s * self.words..(s + 1) * self.words]
    }

    fn seg_free(&self, s: usize, y: u64, h: u64) -> bool {
        let bits = self.seg_bits(s);
        range_masks(y, h).all(|(w, m)| bits[w] & m == 0)
    }

    /// Whether `[x, x + w) x [y, y + h)` is empty. Ranges that do not start
    /// and end on cuts, or leave the box, are never free.
    pub fn is_free(&self, x: u64, w: u64, y: u64, h: u64) -> bool {
        if y + h > self.height {
            return false;
        }
        match self.seg_range(x, w) {
            Some((lo, hi)) => (lo..hi).all(|s| self.seg_free(s, y, h)),
            None => false,
        }
    }

    fn toggle(&mut self, x: u64, w: u64, y: u64, h: u64) {
        let (lo, hi) = self.seg_range(x, w).expect("item boundaries are cuts");
        for s in lo..hi {
            let base = s * self.words;
            for (word, m) in range_masks(y, h) {
                self.bits[base + word] ^= m;
            }
        }
    }

    pub fn fill(&mut self, x: u64, w: u64, y: u64, h: u64) {
        debug_assert!(self.is_free(x, w, y, h));
        self.toggle(x, w, y, h);
    }

    pub fn clear(&mut self, x: u64, w: u64, y: u64, h: u64) {
        self.toggle(x, w, y, h);
    }

    pub fn occupied_cells(&self) -> u64 {
        (0..self.segments())
            .map(|s| {
                let ones: u64 = self.seg_bits(s).iter().map(|w| w.count_ones() as u64).sum();
                ones * (self.cuts[s + 1] - self.cuts[s])
            })
            .sum()
    }

    /// Lowest empty cell of segment `s` at or above `y`.
    fn lowest_empty(&self, s: usize, y: u64) -> Option<u64> {
        if y >= self.height {
            return None;
        }
        let bits = self.seg_bits(s);
        let mut w = (y / 64) as usize;
        let mut word = !bits[w] & (!0u64 << (y % 64));
        loop {
            if word != 0 {
                let v = w as u64 * 64 + word.trailing_zeros() as u64;
                return (v < self.height).then_some(v);
            }
            w += 1;
            if w >= self.words {
                return None;
            }
            word = !bits[w];
        }
    }

    /// First occupied cell of segment `s` at or above `y`, or the height.
    fn run_end(&self, s: usize, y: u64) -> u64 {
        let bits = self.seg_bits(s);
        let mut w = (y / 64) as usize;
        let mut word = bits[w] & (!0u64 << (y % 64));
        loop {
            if word != 0 {
                return (w as u64 * 64 + word.trailing_zeros() as u64).min(self.height);
            }
            w += 1;
            if w >= self.words {
                return self.height;
            }
            word = bits[w];
        }
    }

    fn corner_from(&self, seg: usize, y: u64) -> Option<(usize, u64)> {
        if let Some(v) = self.lowest_empty(seg, y) {
            return Some((seg, v));
        }
        (seg + 1..self.segments()).find_map(|s| self.lowest_empty(s, 0).map(|v| (s, v)))
    }

    /// First empty cell scanning columns left to right and each column
    /// bottom to top.
    pub fn next_corner(&self) -> Option<(u64, u64)> {
        if self.segments() == 0 {
            return None;
        }
        self.corner_from(0, 0).map(|(s, y)| (self.cuts[s], y))
    }
}

/// Interchangeable items: same x-range, height and kind.
#[derive(Debug, Clone)]
struct Kind {
    kind: ItemKind,
    x: u64,
    width: u64,
    height: u64,
    rank: usize,
    start_seg: usize,
    members: Vec<usize>,
    used: usize,
}

impl Kind {
    fn remaining(&self) -> usize {
        self.members.len() - self.used
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct YOutcome {
    pub nodes: u64,
    pub solutions: u64,
    pub timed_out: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct YOptions<'a> {
    /// Originals may only sit at these y-coordinates.
    pub y_sums: Option<&'a SumSet>,
    /// Preferred y per rect id; matching originals are tried first.
    pub hint: Option<&'a [Option<u64>]>,
    pub deadline: Option<Instant>,
}

struct YSearch<'a> {
    items: &'a [Item],
    grid: OccupancyGrid,
    kinds: Vec<Kind>,
    by_start: Vec<Vec<usize>>,
    left: Vec<usize>,
    ys: Vec<u64>,
    opts: YOptions<'a>,
}

impl<'a> YSearch<'a> {
    fn new(items: &'a [Item], grid: OccupancyGrid, placed: &[bool], opts: YOptions<'a>) -> Result<Self> {
        let mut kinds: Vec<Kind> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for (i, it) in items.iter().enumerate() {
            if placed.get(i).copied().unwrap_or(false) {
                continue;
            }
            let start_seg = grid.segment_starting_at(it.x).ok_or_else(|| {
                Error::ContractViolation(format!("item at x={} does not start on a cut", it.x))
            })?;
            let key = (it.kind, it.x, it.width, it.height);
            let k = *index.entry(key).or_insert_with(|| {
                kinds.push(Kind {
                    kind: it.kind,
                    x: it.x,
                    width: it.width,
                    height: it.height,
                    rank: it.rank,
                    start_seg,
                    members: Vec::new(),
                    used: 0,
                });
                kinds.len() - 1
            });
            kinds[k].rank = kinds[k].rank.min(it.rank);
            kinds[k].members.push(i);
        }
        let mut by_start = vec![Vec::new(); grid.segments()];
        let mut left = vec![0; grid.segments()];
        for (k, kind) in kinds.iter().enumerate() {
            by_start[kind.start_seg].push(k);
            left[kind.start_seg] += kind.members.len();
        }
        for list in &mut by_start {
            list.sort_by_key(|&k| (kinds[k].kind, kinds[k].rank, kinds[k].height, kinds[k].width));
        }
        Ok(YSearch {
            items,
            grid,
            kinds,
            by_start,
            left,
            ys: vec![0; items.len()],
            opts,
        })
    }

    /// Kinds that may take the corner `(seg, y)`, in trial order.
    fn candidates_at(&self, seg: usize, y: u64) -> Vec<usize> {
        if self.left[..seg].iter().any(|&n| n > 0) {
            return Vec::new();
        }
        let run = self.grid.run_end(seg, y) - y;
        if !self.run_fillable(seg, run) {
            return Vec::new();
        }
        let mut hinted = Vec::new();
        let mut plain = Vec::new();
        let mut late = Vec::new();
        for &k in &self.by_start[seg] {
            let kind = &self.kinds[k];
            if kind.remaining() == 0 || kind.height > run {
                continue;
            }
            if kind.kind == ItemKind::Original {
                if let Some(sums) = self.opts.y_sums {
                    if !sums.contains(y) {
                        continue;
                    }
                }
            }
            if !self.grid.is_free(kind.x, kind.width, y, kind.height) {
                continue;
            }
            match (kind.kind, self.opts.hint) {
                (ItemKind::Original, Some(hint)) => {
                    let id = self.items[kind.members[kind.used]].rect_id;
                    if id.and_then(|id| hint.get(id).copied().flatten()) == Some(y) {
                        hinted.push(k);
                    } else {
                        late.push(k);
                    }
                }
                _ => plain.push(k),
            }
        }
        hinted.extend(plain);
        hinted.extend(late);
        hinted
    }

    /// The empty run above the corner can only be covered by items starting
    /// in this segment, so some of their heights must add up to it exactly.
    fn run_fillable(&self, seg: usize, run: u64) -> bool {
        let mut ones = 0u64;
        let mut others = Vec::new();
        for &k in &self.by_start[seg] {
            let kind = &self.kinds[k];
            let n = kind.remaining() as u64;
            if n == 0 {
                continue;
            }
            if kind.height == 1 {
                ones += n;
            } else if kind.height <= run {
                others.push((kind.height, n));
            }
        }
        if ones >= run {
            return true;
        }
        let mut reach = SumSet::zero(run);
        for (h, n) in others {
            for _ in 0..n.min(run / h) {
                reach.add_shifted(h);
            }
        }
        reach.next_at_or_above(run - ones).is_some()
    }

    fn place(&mut self, k: usize, y: u64) {
        let kind = &mut self.kinds[k];
        let item = kind.members[kind.used];
        kind.used += 1;
        self.left[kind.start_seg] -= 1;
        self.ys[item] = y;
        let (x, w, h) = (kind.x, kind.width, kind.height);
        self.grid.fill(x, w, y, h);
    }

    fn unplace(&mut self, k: usize, y: u64) {
        let kind = &mut self.kinds[k];
        kind.used -= 1;
        self.left[kind.start_seg] += 1;
        let (x, w, h) = (kind.x, kind.width, kind.height);
        self.grid.clear(x, w, y, h);
    }

    fn run(&mut self, visit: &mut dyn FnMut(&[u64]) -> ControlFlow<()>) -> YOutcome {
        struct Frame {
            seg: usize,
            y: u64,
            cands: Vec<usize>,
            next: usize,
            placed: Option<usize>,
        }
        let mut out = YOutcome::default();
        let Some((seg, y)) = self.grid.corner_from(0, 0) else {
            out.solutions = 1;
            let _ = visit(&self.ys);
            return out;
        };
        let mut stack = vec![Frame {
            seg,
            y,
            cands: self.candidates_at(seg, y),
            next: 0,
            placed: None,
        }];
        while let Some(top) = stack.last_mut() {
            if let Some(k) = top.placed.take() {
                let y = top.y;
                self.unplace(k, y);
            }
            let Some(&k) = top.cands.get(top.next) else {
                stack.pop();
                continue;
            };
            top.next += 1;
            let (seg, y) = (top.seg, top.y);
            self.place(k, y);
            stack.last_mut().expect("frame present").placed = Some(k);
            out.nodes += 1;
            if out.nodes & 0xFFFF == 0 {
                if let Some(d) = self.opts.deadline {
                    if Instant::now() >= d {
                        out.timed_out = true;
                        break;
                    }
                }
            }
            match self.grid.corner_from(seg, y) {
                None => {
                    out.solutions += 1;
                    if visit(&self.ys).is_break() {
                        break;
                    }
                }
                Some((s, cy)) => {
                    let cands = self.candidates_at(s, cy);
                    if !cands.is_empty() {
                        stack.push(Frame {
                            seg: s,
                            y: cy,
                            cands,
                            next: 0,
                            placed: None,
                        });
                    }
                }
            }
        }
        out
    }
}

fn grid_for(perfect: &PerfectInstance) -> OccupancyGrid {
    let mut cuts: Vec<u64> = perfect.items.iter().flat_map(|i| [i.x, i.end()]).collect();
    cuts.extend([0, perfect.bbox.width]);
    cuts.sort_unstable();
    cuts.dedup();
    OccupancyGrid::with_cuts(cuts, perfect.bbox.height)
}

/// Candidate items for the corner at `(x, y)` of `grid`, one index into
/// `perfect.items` per group of interchangeable items. Items flagged in
/// `placed` are already drawn into the grid.
pub fn candidates(
    grid: &OccupancyGrid,
    corner: (u64, u64),
    perfect: &PerfectInstance,
    placed: &[bool],
    y_sums: Option<&SumSet>,
) -> Result<Vec<usize>> {
    let search = YSearch::new(
        &perfect.items,
        grid.clone(),
        placed,
        YOptions {
            y_sums,
            ..Default::default()
        },
    )?;
    let Some(seg) = grid.segment_starting_at(corner.0) else {
        return Ok(Vec::new());
    };
    Ok(search
        .candidates_at(seg, corner.1)
        .into_iter()
        .map(|k| search.kinds[k].members[search.kinds[k].used])
        .collect())
}

/// Depth-first search over corner assignments. `visit` receives the y of
/// every item, indexed like `perfect.items`, for each complete packing.
pub fn solve_y(
    perfect: &PerfectInstance,
    opts: YOptions<'_>,
    visit: &mut dyn FnMut(&[u64]) -> ControlFlow<()>,
) -> Result<YOutcome> {
    if !perfect.is_perfect() {
        return Err(Error::ContractViolation(
            "item area differs from box area".into(),
        ));
    }
    let mut search = YSearch::new(&perfect.items, grid_for(perfect), &[], opts)?;
    Ok(search.run(visit))
}

/// Decides whether the originals alone admit y-coordinates, ignoring
/// fillers. Returns one y per original (indexed like `originals`) when they
/// do.
///
/// Pushing every rect down as far as it goes gives a packing where each rect
/// rests on the floor or on a rect below it, so it is enough to add rects in
/// ascending `(y, index)` order, each at the floor or the top of an earlier
/// rect sharing a column with it.
pub fn screen_originals(
    originals: &[Item],
    height: u64,
    y_sums: Option<&SumSet>,
    deadline: Option<Instant>,
) -> Result<Option<Vec<u64>>> {
    let n = originals.len();
    let span = |i: usize| (originals[i].orig_x, originals[i].orig_x + originals[i].orig_width);
    let overlaps: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && span(i).0 < span(j).1 && span(j).0 < span(i).1)
                .collect()
        })
        .collect();
    let mut cuts: Vec<u64> = (0..n).flat_map(|i| [span(i).0, span(i).1]).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let covering: Vec<Vec<usize>> = cuts
        .windows(2)
        .map(|c| (0..n).filter(|&i| span(i).0 <= c[0] && c[1] <= span(i).1).collect())
        .collect();

    struct Screen<'a> {
        items: &'a [Item],
        overlaps: Vec<Vec<usize>>,
        covering: Vec<Vec<usize>>,
        height: u64,
        y_sums: Option<&'a SumSet>,
        deadline: Option<Instant>,
        ys: Vec<Option<u64>>,
        nodes: u64,
    }

    impl Screen<'_> {
        fn capacity_ok(&self, level: u64) -> bool {
            self.covering.iter().all(|cover| {
                let mut need = 0;
                let mut taken = 0;
                for &i in cover {
                    match self.ys[i] {
                        None => need += self.items[i].height,
                        Some(y) => {
                            let top = y + self.items[i].height;
                            taken += top.saturating_sub(level.max(y));
                        }
                    }
                }
                need + taken <= self.height - level
            })
        }

        fn go(&mut self, placed: usize, last: Option<(u64, usize)>) -> Result<bool> {
            if placed == self.items.len() {
                return Ok(true);
            }
            self.nodes += 1;
            if self.nodes & 0xFFF == 0 {
                if let Some(d) = self.deadline {
                    if Instant::now() >= d {
                        return Err(Error::TimeLimit);
                    }
                }
            }
            if !self.capacity_ok(last.map_or(0, |l| l.0)) {
                return Ok(false);
            }
            for r in 0..self.items.len() {
                if self.ys[r].is_some() {
                    continue;
                }
                let h = self.items[r].height;
                let mut cands: Vec<u64> = std::iter::once(0)
                    .chain(
                        self.overlaps[r]
                            .iter()
                            .filter_map(|&j| self.ys[j].map(|y| y + self.items[j].height)),
                    )
                    .filter(|&y| last.is_none_or(|l| (y, r) > l) && y + h <= self.height)
                    .collect();
                cands.sort_unstable();
                cands.dedup();
                for y in cands {
                    if self.y_sums.is_some_and(|s| !s.contains(y)) {
                        continue;
                    }
                    let clash = self.overlaps[r].iter().any(|&j| {
                        self.ys[j].is_some_and(|yj| y < yj + self.items[j].height && yj < y + h)
                    });
                    if clash {
                        continue;
                    }
                    self.ys[r] = Some(y);
                    if self.go(placed + 1, Some((y, r)))? {
                        return Ok(true);
                    }
                    self.ys[r] = None;
                }
            }
            Ok(false)
        }
    }

    let mut screen = Screen {
        items: originals,
        overlaps,
        covering,
        height,
        y_sums,
        deadline,
        ys: vec![None; n],
        nodes: 0,
    };
    let found = screen.go(0, None)?;
    Ok(found.then(|| screen.ys.iter().map(|y| y.unwrap_or(0)).collect()))
}
