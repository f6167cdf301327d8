//! Exact minimum-area rectangle packing.
//!
//! Boxes are tried in order of increasing area. For each box, rects first
//! get x-coordinates under a cumulative constraint, then the remaining
//! y-problem is turned into a perfect packing and solved by filling empty
//! corners.

pub mod bbox;
pub mod benchmarks;
pub mod containment;
pub mod error;
pub mod model;
pub mod perfect;
pub mod report;
pub mod subset_sums;
pub mod verify;
pub mod xstage;
pub mod ystage;

pub use bbox::{anytime_search, enumerate_all_optimal, EnumConfig, EnumerationResult, Precision};
pub use containment::{contain, ContainConfig, ContainOutcome};
pub use error::{Error, Result};
pub use model::{BoundingBox, Instance, Placement, Rect, SearchStats, Solution};
