//! Output formats and known optima for the benchmark families.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bbox::EnumerationResult;
use crate::benchmarks::{gcd, Family};
use crate::error::{Error, Result};
use crate::model::{BoundingBox, Instance, Placement, Solution};

/// `(numerator, denominator)`.
pub type Fraction = (u64, u64);

/// Known optimum for one benchmark instance. Box sides are fractions of the
/// unscaled instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub family: Family,
    pub n: usize,
    pub boxes: &'static [(Fraction, Fraction)],
    /// Percent, as printed (three significant figures).
    pub empty_pct: Option<f64>,
    pub boxes_tested: Option<u64>,
    pub lcm: Option<u64>,
}

macro_rules! int_rows {
    ($family:expr; $( $n:literal : [$(($w:literal, $h:literal)),+], $pct:literal, $tested:literal; )+) => {
        &[$(ReferenceRow {
            family: $family,
            n: $n,
            boxes: &[$((($w, 1), ($h, 1))),+],
            empty_pct: Some($pct),
            boxes_tested: Some($tested),
            lcm: None,
        }),+]
    };
}

const SQUARES: &[ReferenceRow] = int_rows![Family::ConsecutiveSquares;
    1: [(1, 1)], 0.00, 1;
    2: [(2, 3)], 16.7, 1;
    3: [(3, 5)], 6.67, 1;
    4: [(5, 7)], 14.3, 1;
    5: [(5, 12)], 8.33, 1;
    6: [(9, 11)], 8.08, 1;
    7: [(11, 14), (7, 22)], 9.09, 3;
    8: [(14, 15)], 2.86, 2;
    9: [(15, 20)], 5.00, 4;
    10: [(15, 27)], 4.94, 5;
    11: [(19, 27)], 1.36, 3;
    12: [(23, 29)], 2.55, 6;
    13: [(22, 38)], 2.03, 5;
    14: [(23, 45)], 1.93, 8;
    15: [(23, 55)], 1.98, 13;
    16: [(28, 54), (27, 56)], 1.06, 10;
    17: [(39, 46)], 0.50, 5;
    18: [(31, 69)], 1.40, 14;
    19: [(47, 53)], 0.84, 12;
    20: [(34, 85)], 0.69, 14;
    21: [(38, 88)], 0.99, 20;
    22: [(39, 98)], 0.71, 17;
    23: [(64, 68)], 0.64, 19;
    24: [(56, 88)], 0.58, 19;
    25: [(43, 129)], 0.40, 17;
    26: [(70, 89)], 0.47, 21;
    27: [(47, 148), (74, 94)], 0.37, 22;
    28: [(63, 123)], 0.45, 30;
    29: [(81, 106)], 0.36, 27;
    30: [(51, 186)], 0.33, 21;
    31: [(95, 110)], 0.33, 30;
    32: [(85, 135)], 0.31, 36;
];

const CONSECUTIVE: &[ReferenceRow] = int_rows![Family::UnorientedConsecutive;
    1: [(1, 2)], 0.00, 1;
    2: [(2, 4)], 0.00, 1;
    3: [(4, 5)], 0.00, 1;
    4: [(5, 8), (4, 10)], 0.00, 2;
    5: [(5, 14)], 0.00, 2;
    6: [(6, 19)], 1.75, 2;
    7: [(12, 14)], 0.00, 2;
    8: [(15, 16)], 0.00, 1;
    9: [(16, 21), (14, 24)], 1.79, 5;
    10: [(17, 26)], 0.45, 5;
    11: [(22, 26)], 0.00, 2;
    12: [(21, 35)], 0.95, 4;
    13: [(26, 35)], 0.00, 1;
    14: [(32, 35), (28, 40)], 0.00, 2;
    15: [(34, 40)], 0.00, 1;
    16: [(32, 51)], 0.00, 2;
    17: [(34, 57)], 0.00, 2;
    18: [(30, 76)], 0.00, 3;
    19: [(35, 76), (38, 70)], 0.00, 2;
    20: [(35, 88), (44, 70), (55, 56)], 0.00, 4;
    21: [(39, 91)], 0.20, 2;
    22: [(44, 92)], 0.00, 2;
    23: [(40, 115), (46, 100)], 0.00, 3;
    24: [(40, 130), (52, 100), (65, 80)], 0.00, 4;
    25: [(45, 130), (65, 90), (75, 78)], 0.00, 5;
    26: [(42, 156), (52, 126), (56, 117), (63, 104), (72, 91), (78, 84)], 0.00, 7;
    27: [(63, 116)], 0.00, 3;
    28: [(56, 145), (70, 116)], 0.00, 3;
    29: [(62, 145)], 0.00, 2;
];

const EQUAL_PERIMETER: &[ReferenceRow] = int_rows![Family::OrientedEqualPerimeter;
    1: [(1, 1)], 0.00, 1;
    2: [(2, 3)], 33.3, 1;
    3: [(3, 4)], 16.7, 1;
    4: [(4, 6)], 16.7, 1;
    5: [(6, 7)], 16.7, 4;
    6: [(6, 10)], 6.67, 2;
    7: [(8, 11)], 4.55, 2;
    8: [(8, 16)], 6.25, 5;
    9: [(11, 16)], 6.25, 6;
    10: [(11, 21)], 4.76, 8;
    11: [(14, 21)], 2.72, 6;
    12: [(13, 29)], 3.45, 7;
    13: [(16, 29)], 1.94, 7;
    14: [(19, 30), (15, 38)], 1.75, 7;
    15: [(24, 29)], 2.30, 10;
    16: [(23, 36)], 1.45, 9;
    17: [(24, 41)], 1.52, 8;
    18: [(24, 48)], 1.04, 12;
    19: [(32, 42), (24, 56)], 1.04, 12;
    20: [(37, 42)], 0.90, 11;
    21: [(35, 51)], 0.78, 9;
    22: [(34, 60)], 0.78, 15;
    23: [(38, 61)], 0.78, 16;
];

const DOUBLE_PERIMETER: &[ReferenceRow] = int_rows![Family::UnorientedDoublePerimeter;
    1: [(1, 1)], 0.00, 1;
    2: [(3, 3)], 22.2, 1;
    3: [(3, 8)], 8.33, 2;
    4: [(6, 9)], 7.41, 2;
    5: [(6, 17)], 6.86, 8;
    6: [(9, 19)], 5.85, 9;
    7: [(13, 20)], 3.08, 11;
    8: [(18, 21)], 1.59, 8;
    9: [(13, 41)], 1.50, 13;
    10: [(24, 30)], 0.69, 8;
    11: [(29, 33)], 1.15, 12;
    12: [(21, 59)], 1.37, 17;
    13: [(38, 41)], 0.71, 13;
    14: [(38, 51), (17, 114)], 0.67, 17;
    15: [(44, 54)], 0.67, 21;
    16: [(45, 64), (30, 96), (40, 72), (48, 60)], 0.83, 35;
    17: [(39, 88), (52, 66)], 0.44, 27;
    18: [(55, 74)], 0.57, 35;
];

macro_rules! hp_rows {
    ($( $n:literal : [$((($wn:literal, $wd:literal), ($hn:literal, $hd:literal))),+], $lcm:literal, $tested:literal; )+) => {
        &[$(ReferenceRow {
            family: Family::HighPrecision,
            n: $n,
            boxes: &[$((($wn, $wd), ($hn, $hd))),+],
            empty_pct: None,
            boxes_tested: Some($tested),
            lcm: Some($lcm),
        }),+]
    };
}

const HIGH_PRECISION: &[ReferenceRow] = hp_rows![
    1: [((1, 2), (1, 1))], 2, 1;
    2: [((1, 2), (4, 3))], 6, 1;
    3: [((1, 2), (19, 12))], 12, 2;
    4: [((5, 6), (1, 1)), ((1, 2), (5, 3))], 60, 4;
    5: [((1, 2), (17, 10))], 60, 7;
    6: [((1, 2), (107, 60))], 420, 29;
    7: [((1, 2), (107, 60))], 840, 46;
    8: [((1, 2), (163, 90))], 2520, 124;
    9: [((1, 2), (163, 90))], 2520, 192;
    10: [((1, 2), (1817, 990))], 27720, 585;
    11: [((1, 2), (7367, 3960))], 27720, 1641;
    12: [((1, 2), (67, 36))], 360360, 2366;
    13: [((1, 2), (185, 99))], 360360, 5027;
    14: [((1, 2), (169, 90))], 360360, 9548;
    15: [((1, 2), (79, 42))], 720720, 15334;
];

pub fn reference_rows(family: Family) -> &'static [ReferenceRow] {
    match family {
        Family::ConsecutiveSquares => SQUARES,
        Family::UnorientedConsecutive => CONSECUTIVE,
        Family::OrientedEqualPerimeter => EQUAL_PERIMETER,
        Family::UnorientedDoublePerimeter => DOUBLE_PERIMETER,
        Family::HighPrecision => HIGH_PRECISION,
        Family::DoublyScaled | Family::UniqueDimensions => &[],
    }
}

pub fn reference(family: Family, n: usize) -> Result<&'static ReferenceRow> {
    reference_rows(family)
        .iter()
        .find(|r| r.n == n)
        .ok_or_else(|| Error::UnknownReference {
            family: family.name().to_string(),
            n,
        })
}

impl ReferenceRow {
    /// Reference boxes in scaled integer units, normalized to `w <= h`.
    pub fn scaled_boxes(&self, scale: u64) -> Result<Vec<BoundingBox>> {
        let side = |(num, den): (u64, u64)| -> Result<u64> {
            let v = (scale as u128 * num as u128) / den as u128;
            if v * den as u128 != scale as u128 * num as u128 {
                return Err(Error::InvalidArgument(format!(
                    "{num}/{den} is not a multiple of 1/{scale}"
                )));
            }
            u64::try_from(v).map_err(|_| Error::PrecisionExceeded("reference box"))
        };
        let mut v = self
            .boxes
            .iter()
            .map(|&(w, h)| Ok(BoundingBox::new(side(w)?, side(h)?).normalized()))
            .collect::<Result<Vec<_>>>()?;
        v.sort_by_key(|b| (b.width, b.height));
        Ok(v)
    }
}

/// Empty-space tolerance in percentage points; reference values carry three
/// significant figures.
pub const EMPTY_PCT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub family: String,
    pub n: usize,
    pub expected_boxes: Vec<BoundingBox>,
    pub found_boxes: Vec<BoundingBox>,
    pub boxes_match: bool,
    pub expected_empty_pct: Option<f64>,
    pub found_empty_pct: f64,
    pub empty_ok: bool,
    pub expected_lcm: Option<u64>,
    pub lcm_ok: bool,
    /// Informational only.
    pub expected_boxes_tested: Option<u64>,
    pub found_boxes_tested: u64,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.boxes_match && self.empty_ok && self.lcm_ok
    }
}

pub fn empty_pct(instance: &Instance, bbox: BoundingBox) -> f64 {
    let area = bbox.width as f64 * bbox.height as f64;
    let used = instance.total_area().unwrap_or(0) as f64;
    if area == 0.0 {
        0.0
    } else {
        100.0 * (1.0 - used / area)
    }
}

pub fn compare_reference(
    result: &EnumerationResult,
    instance: &Instance,
    family: Family,
    n: usize,
) -> Result<Comparison> {
    let row = reference(family, n)?;
    let expected_boxes = row.scaled_boxes(instance.scale)?;
    let mut found_boxes: Vec<BoundingBox> = result.optimal_boxes.iter().map(BoundingBox::normalized).collect();
    found_boxes.sort_by_key(|b| (b.width, b.height));
    found_boxes.dedup();
    let found_empty_pct = result
        .optimal_boxes
        .first()
        .map_or(0.0, |b| empty_pct(instance, *b));
    let empty_ok = row
        .empty_pct
        .is_none_or(|p| (p - found_empty_pct).abs() <= EMPTY_PCT_TOLERANCE);
    Ok(Comparison {
        family: family.name().to_string(),
        n,
        boxes_match: expected_boxes == found_boxes,
        expected_boxes,
        found_boxes,
        expected_empty_pct: row.empty_pct,
        found_empty_pct,
        empty_ok,
        expected_lcm: row.lcm,
        lcm_ok: row.lcm.is_none_or(|l| l == instance.scale),
        expected_boxes_tested: row.boxes_tested,
        found_boxes_tested: result.stats.boxes_tested,
    })
}

/// `v / scale` in lowest terms: `"3"`, `"107/60"`.
pub fn format_rational(v: u64, scale: u64) -> String {
    let scale = scale.max(1);
    let g = gcd(v, scale).max(1);
    let (num, den) = (v / g, scale / g);
    if den == 1 {
        num.to_string()
    } else {
        format!("{num}/{den}")
    }
}

/// Three significant figures.
pub fn format_pct(p: f64) -> String {
    if p >= 10.0 {
        format!("{p:.1}%")
    } else {
        format!("{p:.2}%")
    }
}

pub fn format_box(b: BoundingBox, scale: u64) -> String {
    if scale > 1 {
        format!("{} × {}", format_rational(b.width, scale), format_rational(b.height, scale))
    } else {
        format!("{}×{}", b.width, b.height)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonRect {
    pub id: usize,
    pub w: u64,
    pub h: u64,
    pub orientable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonInstance {
    pub family: Option<String>,
    pub n: Option<usize>,
    pub scale: u64,
    pub rects: Vec<JsonRect>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonBox {
    pub w: u64,
    pub h: u64,
    /// Unscaled sides, present when the instance is scaled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonPlacement {
    pub id: usize,
    pub x: u64,
    pub y: u64,
    pub rot: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonSolution {
    #[serde(rename = "box")]
    pub bbox: JsonBox,
    pub placements: Vec<JsonPlacement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonStats {
    pub boxes_tested: u64,
    pub x_solutions: u64,
    pub nodes_x: u64,
    pub nodes_y: u64,
    /// Wall time; left out by default so repeated runs are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonReport {
    pub instance: JsonInstance,
    pub optimal_area: u64,
    pub boxes: Vec<JsonBox>,
    pub solutions: Vec<JsonSolution>,
    pub stats: JsonStats,
}

/// Where an instance came from, for labeling output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Source {
    pub family: Option<Family>,
    pub n: Option<usize>,
}

fn json_box(b: BoundingBox, scale: u64) -> JsonBox {
    JsonBox {
        w: b.width,
        h: b.height,
        exact: (scale > 1).then(|| format_box(b, scale)),
    }
}

pub fn json_report(result: &EnumerationResult, instance: &Instance, source: Source, timings: bool) -> JsonReport {
    JsonReport {
        instance: JsonInstance {
            family: source.family.map(|f| f.name().to_string()),
            n: source.n,
            scale: instance.scale,
            rects: instance
                .rects()
                .iter()
                .map(|r| JsonRect {
                    id: r.id,
                    w: r.width,
                    h: r.height,
                    orientable: r.orientable,
                })
                .collect(),
        },
        optimal_area: result.optimal_area,
        boxes: result.optimal_boxes.iter().map(|&b| json_box(b, instance.scale)).collect(),
        solutions: result
            .solutions
            .iter()
            .map(|s| JsonSolution {
                bbox: json_box(s.bbox, instance.scale),
                placements: s
                    .placements
                    .iter()
                    .map(|p| JsonPlacement {
                        id: p.rect_id,
                        x: p.x,
                        y: p.y,
                        rot: p.rotated,
                    })
                    .collect(),
            })
            .collect(),
        stats: JsonStats {
            boxes_tested: result.stats.boxes_tested,
            x_solutions: result.stats.x_solutions,
            nodes_x: result.stats.nodes_x,
            nodes_y: result.stats.nodes_y,
            ms: timings.then_some(result.stats.cpu_time.as_millis() as u64),
        },
    }
}

impl JsonReport {
    /// Packings as solver values; search statistics are not carried back.
    pub fn to_solutions(&self) -> Vec<Solution> {
        self.solutions
            .iter()
            .map(|s| Solution {
                bbox: BoundingBox::new(s.bbox.w, s.bbox.h),
                placements: s
                    .placements
                    .iter()
                    .map(|p| Placement {
                        rect_id: p.id,
                        x: p.x,
                        y: p.y,
                        rotated: p.rot,
                    })
                    .collect(),
                stats: Default::default(),
            })
            .collect()
    }
}

pub fn emit_json(result: &EnumerationResult, instance: &Instance, source: Source, timings: bool) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&json_report(result, instance, source, timings))
        .map_err(|e| Error::Internal(format!("json encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<JsonReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

fn color(id: usize) -> String {
    let hue = (id as u64 * 137) % 360;
    format!("hsl({hue},60%,70%)")
}

/// One drawing of a packing. The origin is the lower-left corner of the box.
pub fn emit_svg(instance: &Instance, solution: &Solution) -> String {
    let b = solution.bbox;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {} {}" width="{}" height="{}">"#,
        b.width, b.height, b.width, b.height
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white" stroke="black" stroke-width="{}"/>"#,
        b.width,
        b.height,
        stroke(b)
    );
    let font = (b.width.min(b.height) as f64 / 12.0).max(0.5);
    for p in &solution.placements {
        let r = instance.rect(p.rect_id);
        let (w, h) = if p.rotated { (r.height, r.width) } else { (r.width, r.height) };
        let top = b.height.saturating_sub(p.y + h);
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="black" stroke-width="{}"/>"#,
            p.x,
            top,
            w,
            h,
            color(p.rect_id),
            stroke(b)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="{font:.2}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            p.x as f64 + w as f64 / 2.0,
            top as f64 + h as f64 / 2.0,
            p.rect_id
        );
    }
    s.push_str("</svg>\n");
    s
}

fn stroke(b: BoundingBox) -> String {
    format!("{:.3}", (b.width.max(b.height) as f64 / 400.0).max(0.02))
}

/// A table row: optimal boxes by descending width, empty space, boxes tested.
pub fn emit_text(result: &EnumerationResult, instance: &Instance, source: Source) -> String {
    let mut boxes = result.optimal_boxes.clone();
    boxes.sort_by_key(|b| (std::cmp::Reverse(b.width), b.height));
    let listed: Vec<String> = boxes.iter().map(|&b| format_box(b, instance.scale)).collect();
    let pct = boxes.first().map_or("-".to_string(), |&b| format_pct(empty_pct(instance, b)));
    let listed = if listed.is_empty() { vec!["none".to_string()] } else { listed };
    let label = match (source.family, source.n) {
        (Some(f), Some(n)) => format!("{f} n={n}"),
        _ => instance.label.clone(),
    };
    let mut s = String::new();
    let _ = writeln!(s, "{:<32} {:<40} {:>8} {:>12}", "instance", "optimal boxes", "empty", "boxes tested");
    let _ = writeln!(
        s,
        "{:<32} {:<40} {:>8} {:>12}",
        label,
        listed.join(", "),
        pct,
        result.stats.boxes_tested
    );
    if instance.scale > 1 {
        let scaled: Vec<String> = boxes.iter().map(|b| format!("{}×{}", b.width, b.height)).collect();
        let _ = writeln!(s, "scale {}: {}", instance.scale, scaled.join(", "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{generate, lcm_up_to};

    #[test]
    fn rationals() {
        assert_eq!(format_rational(210, 420), "1/2");
        assert_eq!(format_rational(749, 420), "107/60");
        assert_eq!(format_rational(60, 60), "1");
        assert_eq!(format_rational(0, 7), "0");
    }

    #[test]
    fn percentages() {
        assert_eq!(format_pct(16.666), "16.7%");
        assert_eq!(format_pct(9.0909), "9.09%");
        assert_eq!(format_pct(0.0), "0.00%");
    }

    #[test]
    fn reference_lookup() {
        let r = reference(Family::ConsecutiveSquares, 16).unwrap();
        assert_eq!(r.scaled_boxes(1).unwrap(), vec![BoundingBox::new(27, 56), BoundingBox::new(28, 54)]);
        assert_eq!(r.empty_pct, Some(1.06));
        let r = reference(Family::UnorientedDoublePerimeter, 16).unwrap();
        assert_eq!(r.boxes.len(), 4);
        let r = reference(Family::HighPrecision, 6).unwrap();
        assert_eq!(r.lcm, Some(420));
        assert_eq!(r.scaled_boxes(420).unwrap(), vec![BoundingBox::new(210, 749)]);
        assert!(matches!(
            reference(Family::ConsecutiveSquares, 33),
            Err(Error::UnknownReference { .. })
        ));
        assert!(reference(Family::DoublyScaled, 3).is_err());
    }

    #[test]
    fn reference_tables_are_consistent() {
        for row in HIGH_PRECISION {
            assert_eq!(Some(lcm_up_to(row.n as u64 + 1).unwrap()), row.lcm);
        }
        // Reference empty space agrees with the reference boxes.
        for family in [
            Family::ConsecutiveSquares,
            Family::UnorientedConsecutive,
            Family::OrientedEqualPerimeter,
            Family::UnorientedDoublePerimeter,
        ] {
            for row in reference_rows(family) {
                let inst = generate(family, row.n).unwrap();
                for b in row.scaled_boxes(1).unwrap() {
                    let pct = empty_pct(&inst, b);
                    assert!(
                        (pct - row.empty_pct.unwrap()).abs() <= EMPTY_PCT_TOLERANCE,
                        "{family} n={} {b:?}: {pct}",
                        row.n
                    );
                }
            }
        }
    }

    #[test]
    fn svg_has_one_rect_per_placement() {
        let inst = Instance::new(&[(1, 1), (2, 2)], true).unwrap();
        let sol = Solution {
            bbox: BoundingBox::new(3, 2),
            placements: vec![
                Placement { rect_id: 0, x: 2, y: 0, rotated: false },
                Placement { rect_id: 1, x: 0, y: 0, rotated: false },
            ],
            stats: Default::default(),
        };
        let svg = emit_svg(&inst, &sol);
        // One frame plus one per placement.
        assert_eq!(svg.matches("<rect").count(), 3);
        assert!(svg.contains(r#"viewBox="0 0 3 2""#));
    }
}
