//! The containment problem: does a rect set fit a given box, and how.
//!
//! x-coordinates are searched first. Each complete x-assignment is turned
//! into a perfect packing instance and handed to the empty-corner y-search.

use std::ops::ControlFlow;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{BoundingBox, Instance, SearchStats, Solution};
use crate::perfect::{self, ItemKind};
use crate::subset_sums::separate_axis_sets;
use crate::xstage::{default_c_param, XAssignment, XConfig, XSolver};
use crate::ystage::{screen_originals, solve_y, YOptions};

#[derive(Debug, Clone)]
pub struct ContainConfig {
    /// Interval size factor; `None` picks the instance default.
    pub c_param: Option<f64>,
    pub high_precision: bool,
    pub deadline: Option<Instant>,
    /// Stop after this many packings; 0 keeps one packing per complete
    /// x-assignment.
    pub max_solutions: usize,
}

impl Default for ContainConfig {
    fn default() -> Self {
        ContainConfig {
            c_param: None,
            high_precision: false,
            deadline: None,
            max_solutions: 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ContainOutcome {
    pub solutions: Vec<Solution>,
    pub stats: SearchStats,
    pub timed_out: bool,
    /// Most rects, in solver order, that held an x-interval at once.
    pub deepest: usize,
    /// Solver-order prefix that alone explains every refutation.
    pub refuting_prefix: usize,
    /// Rect ids in solver order.
    pub order: Vec<usize>,
}

impl ContainOutcome {
    pub fn feasible(&self) -> bool {
        !self.solutions.is_empty()
    }
}

pub fn contain(instance: &Instance, bbox: BoundingBox, cfg: &ContainConfig) -> Result<ContainOutcome> {
    if bbox.width == 0 || bbox.height == 0 {
        return Err(Error::InvalidArgument("box dimensions must be positive".into()));
    }
    let started = Instant::now();
    let xcfg = XConfig {
        c_param: cfg.c_param.unwrap_or_else(|| default_c_param(instance)),
        high_precision: cfg.high_precision,
        dominance: true,
        mirror: true,
        deadline: cfg.deadline,
    };
    let mut solver = XSolver::new(instance, bbox, xcfg)?;
    let y_sums = cfg.high_precision.then(|| separate_axis_sets(instance, bbox).1);

    let mut solutions = Vec::new();
    let mut nodes_y = 0u64;
    let mut timed_out = false;
    let mut failure: Option<Error> = None;

    let mut visit = |xa: &XAssignment| -> ControlFlow<()> {
        match complete_y(instance, bbox, xa, y_sums.as_ref(), cfg, &mut nodes_y) {
            Ok(Some(sol)) => {
                solutions.push(sol);
                if cfg.max_solutions != 0 && solutions.len() >= cfg.max_solutions {
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            }
            Ok(None) => ControlFlow::Continue(()),
            Err(Error::TimeLimit) => {
                timed_out = true;
                ControlFlow::Break(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    };
    let xo = solver.run(&mut visit);
    if let Some(e) = failure {
        return Err(e);
    }
    let stats = SearchStats {
        boxes_tested: 1,
        x_solutions: xo.leaves,
        nodes_x: xo.nodes,
        nodes_y,
        cpu_time: started.elapsed(),
    };
    for s in &mut solutions {
        s.stats = stats;
    }
    Ok(ContainOutcome {
        solutions,
        stats,
        timed_out: timed_out || xo.timed_out,
        deepest: xo.deepest,
        refuting_prefix: xo.refuting_prefix,
        order: solver.order(),
    })
}

/// One packing extending `xa`, if any exists.
fn complete_y(
    instance: &Instance,
    bbox: BoundingBox,
    xa: &XAssignment,
    y_sums: Option<&crate::subset_sums::SumSet>,
    cfg: &ContainConfig,
    nodes_y: &mut u64,
) -> Result<Option<Solution>> {
    let originals = perfect::original_items(xa);
    // Fillers only absorb empty space, so the originals decide feasibility;
    // their witness then steers the corner search straight to a packing.
    let Some(witness) = screen_originals(&originals, bbox.height, y_sums, cfg.deadline)? else {
        return Ok(None);
    };
    let mut hint = vec![None; instance.len()];
    for (it, &y) in originals.iter().zip(&witness) {
        if let Some(id) = it.rect_id {
            hint[id] = Some(y);
        }
    }
    let pi = perfect::transform(instance, xa, bbox)?;
    debug_assert!(pi.items.iter().filter(|i| i.kind == ItemKind::Original).count() == instance.len());
    let mut found: Option<Vec<u64>> = None;
    let yo = solve_y(
        &pi,
        YOptions {
            y_sums,
            hint: Some(&hint),
            deadline: cfg.deadline,
        },
        &mut |ys| {
            found = Some(ys.to_vec());
            ControlFlow::Break(())
        },
    )?;
    *nodes_y += yo.nodes;
    match found {
        Some(ys) => perfect::restore(instance, &pi, &ys).map(Some),
        None if yo.timed_out => Err(Error::TimeLimit),
        None => Err(Error::Internal(
            "corner search missed a packing the originals admit".into(),
        )),
    }
}
