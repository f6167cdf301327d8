//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line;
//! run with `--nocapture` to see them alongside the test harness output.

use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rectpack::benchmarks::{generate, lcm_up_to, Family};
use rectpack::perfect::{transform, ItemKind};
use rectpack::report::{compare_reference, emit_json, parse_json, reference, Source};
use rectpack::verify::{brute_force_optimal, verify};
use rectpack::xstage::{check_wasted_space, commit, solve_x, FreeHeightProfile, XConfig, XValue};
use rectpack::{anytime_search, enumerate_all_optimal, BoundingBox, EnumConfig, Instance, Placement, Solution};

const ORACLE_SEED: u64 = 0x5EED_0001;
const ORACLE_CASES: usize = 200;
const ORACLE_MAX_RECTS: usize = 5;
const ORACLE_MAX_SIDE: u64 = 6;

fn report(criterion: u32, ok: bool, detail: &str) {
    println!("criterion {criterion}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// Runs the family for `1..=max_n` against its known optima.
fn regression(criterion: u32, family: Family, max_n: usize, budget: Duration) {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut tested_diffs = 0;
    for n in 1..=max_n {
        let inst = generate(family, n).unwrap();
        let result = enumerate_all_optimal(&inst, &EnumConfig::default()).unwrap();
        for s in &result.solutions {
            assert!(verify(&inst, s).valid, "{family} n={n}: invalid packing");
        }
        let cmp = compare_reference(&result, &inst, family, n).unwrap();
        if !cmp.passed() {
            failures.push(format!(
                "n={n}: expected {:?} {:?}, found {:?} {:.3}",
                cmp.expected_boxes, cmp.expected_empty_pct, cmp.found_boxes, cmp.found_empty_pct
            ));
        }
        if cmp.expected_boxes_tested != Some(cmp.found_boxes_tested) {
            tested_diffs += 1;
        }
    }
    let elapsed = started.elapsed();
    let mut detail = format!(
        "{family} n=1..{max_n} in {:.1}s (budget {}s), boxes-tested differs on {tested_diffs} rows (informational)",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; mismatches: {}", failures.join("; ")));
    }
    report(criterion, failures.is_empty() && elapsed <= budget, &detail);
}

#[test]
fn criterion_01_consecutive_squares() {
    regression(1, Family::ConsecutiveSquares, 16, Duration::from_secs(300));
}

#[test]
fn criterion_02_unoriented_consecutive() {
    regression(2, Family::UnorientedConsecutive, 16, Duration::from_secs(300));
}

#[test]
fn criterion_03_oriented_equal_perimeter() {
    regression(3, Family::OrientedEqualPerimeter, 15, Duration::from_secs(600));
}

#[test]
fn criterion_04_unoriented_double_perimeter() {
    regression(4, Family::UnorientedDoublePerimeter, 12, Duration::from_secs(600));
}

#[test]
fn criterion_05_high_precision() {
    // Box sets and the scale column; the scale must also equal lcm(2..=n+1).
    for n in 1..=9 {
        let inst = generate(Family::HighPrecision, n).unwrap();
        assert_eq!(inst.scale, lcm_up_to(n as u64 + 1).unwrap());
        assert_eq!(Some(inst.scale), reference(Family::HighPrecision, n).unwrap().lcm);
    }
    regression(5, Family::HighPrecision, 9, Duration::from_secs(600));
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(1..=ORACLE_MAX_RECTS);
    let dims: Vec<(u64, u64)> = (0..n)
        .map(|_| (rng.gen_range(1..=ORACLE_MAX_SIDE), rng.gen_range(1..=ORACLE_MAX_SIDE)))
        .collect();
    Instance::new(&dims, rng.gen_bool(0.5)).unwrap()
}

#[test]
fn criterion_06_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let mut mismatches = Vec::new();
    let mut box_set_diffs = 0;
    for case in 0..ORACLE_CASES {
        let inst = random_instance(&mut rng);
        let (area, boxes) = brute_force_optimal(&inst, ORACLE_MAX_SIDE).unwrap();
        let result = enumerate_all_optimal(&inst, &EnumConfig::default()).unwrap();
        if result.optimal_area != area {
            mismatches.push(format!("case {case}: oracle {area}, solver {}", result.optimal_area));
        }
        if result.optimal_boxes != boxes {
            box_set_diffs += 1;
        }
        for s in &result.solutions {
            assert!(verify(&inst, s).valid, "case {case}: invalid packing");
        }
    }
    report(
        6,
        mismatches.is_empty() && box_set_diffs == 0,
        &format!(
            "{ORACLE_CASES} seeded instances (<= {ORACLE_MAX_RECTS} rects, sides <= {ORACLE_MAX_SIDE}): \
             {} area mismatches, {box_set_diffs} box-set mismatches {}",
            mismatches.len(),
            mismatches.join("; ")
        ),
    );
}

#[test]
fn criterion_07_wasted_space_fixture() {
    // A 3x2 rect at x=2 in a 6x3 box.
    let mut p = FreeHeightProfile::new(6, 3);
    let _token = commit(&mut p, 3, 2, XValue::Fixed(2)).unwrap();
    let profile_ok = p.free() == [3, 3, 1, 1, 1, 3];
    let histogram_ok = p.histogram() == [3, 0, 9];
    // Pending 2x3 and 2x2 rects as (height, area).
    let prunes = !check_wasted_space(&p, &[(3, 6), (2, 4)]);
    report(
        7,
        profile_ok && histogram_ok && prunes,
        &format!("profile {:?}, histogram {:?}, pruned {prunes}", p.free(), p.histogram()),
    );
}

fn small_instance() -> impl Strategy<Value = Instance> {
    (prop::collection::vec((1u64..=6, 1u64..=6), 1..=5), any::<bool>())
        .prop_map(|(dims, oriented)| Instance::new(&dims, oriented).unwrap())
}

/// Cell-by-cell reference for [`verify`], sharing nothing with it.
fn bitmap_valid(inst: &Instance, sol: &Solution) -> bool {
    let (w, h) = (sol.bbox.width as usize, sol.bbox.height as usize);
    let mut grid = vec![false; w * h];
    let mut ids: Vec<usize> = sol.placements.iter().map(|p| p.rect_id).collect();
    ids.sort_unstable();
    if ids != (0..inst.len()).collect::<Vec<_>>() {
        return false;
    }
    for p in &sol.placements {
        let r = inst.rect(p.rect_id);
        if p.rotated && !r.orientable {
            return false;
        }
        let (rw, rh) = if p.rotated { (r.height, r.width) } else { (r.width, r.height) };
        if p.x + rw > sol.bbox.width || p.y + rh > sol.bbox.height {
            return false;
        }
        for x in p.x..p.x + rw {
            for y in p.y..p.y + rh {
                let cell = &mut grid[y as usize * w + x as usize];
                if *cell {
                    return false;
                }
                *cell = true;
            }
        }
    }
    true
}

fn check(name: &str, result: Result<(), String>, failures: &mut Vec<String>) {
    if let Err(e) = result {
        failures.push(format!("{name}: {e}"));
    }
}

#[test]
fn criterion_08_invariants() {
    let mut failures = Vec::new();
    let mut runner = TestRunner::new(Config {
        cases: 64,
        ..Config::default()
    });

    let commit_undo = runner
        .run(
            &(
                1u64..=12,
                1u64..=6,
                prop::collection::vec((0u64..12, 1u64..=6, 1u64..=3, any::<bool>(), 0u64..4), 1..12),
            ),
            |(w, h, ops)| {
                let mut p = FreeHeightProfile::new(w, h);
                let mut stack = Vec::new();
                for (x, rw, rh, interval, slack) in ops {
                    let x = x % w;
                    let rw = rw.min(w - x);
                    let before = p.clone();
                    let value = if interval {
                        XValue::Interval { lo: x, hi: (x + slack).min(w - rw) }
                    } else {
                        XValue::Fixed(x)
                    };
                    match commit(&mut p, rw, rh, value) {
                        Some(t) => stack.push((t, before)),
                        None => prop_assert_eq!(&p, &before),
                    }
                }
                while let Some((t, before)) = stack.pop() {
                    p.undo(t);
                    prop_assert_eq!(&p, &before);
                }
                prop_assert_eq!(p, FreeHeightProfile::new(w, h));
                Ok(())
            },
        )
        .map_err(|e| e.to_string());
    check("commit/undo", commit_undo, &mut failures);

    let conservation = runner
        .run(&small_instance(), |inst| {
            let result = enumerate_all_optimal(&inst, &EnumConfig::default()).unwrap();
            let cfg = XConfig {
                c_param: 0.5,
                high_precision: false,
                dominance: false,
                mirror: false,
                deadline: None,
            };
            // The optimal box and one unit wider, which always leaves slack.
            for bbox in [result.optimal_boxes[0], BoundingBox::new(result.optimal_boxes[0].width + 1, result.optimal_boxes[0].height)] {
                let (assignments, _) = solve_x(&inst, bbox, cfg.clone()).unwrap();
                for xa in assignments.iter().take(20) {
                    let pi = transform(&inst, xa, bbox).unwrap();
                    prop_assert!(pi.is_perfect());
                    let original: u64 = pi.originals().map(|i| i.orig_width * i.height).sum();
                    prop_assert_eq!(original, inst.total_area().unwrap());
                    prop_assert_eq!(pi.originals().count(), inst.len());
                    prop_assert!(pi.items.iter().filter(|i| i.kind != ItemKind::Original).all(|i| i.rect_id.is_none()));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string());
    check("area conservation", conservation, &mut failures);

    let independence = runner
        .run(
            &(small_instance(), 1u64..=8, 1u64..=8, prop::collection::vec((0u64..8, 0u64..8, any::<bool>()), 5)),
            |(inst, w, h, coords)| {
                let placements = inst
                    .rects()
                    .iter()
                    .zip(coords)
                    .map(|(r, (x, y, rot))| Placement {
                        rect_id: r.id,
                        x,
                        y,
                        rotated: rot && r.orientable,
                    })
                    .collect();
                let sol = Solution {
                    bbox: BoundingBox::new(w, h),
                    placements,
                    stats: Default::default(),
                };
                prop_assert_eq!(verify(&inst, &sol).valid, bitmap_valid(&inst, &sol));
                Ok(())
            },
        )
        .map_err(|e| e.to_string());
    check("verifier independence", independence, &mut failures);

    let round_trip = runner
        .run(&small_instance(), |inst| {
            let cfg = EnumConfig {
                solutions_per_box: 0,
                ..EnumConfig::default()
            };
            let result = enumerate_all_optimal(&inst, &cfg).unwrap();
            let text = emit_json(&result, &inst, Source::default(), false).unwrap();
            let parsed = parse_json(&text).unwrap();
            let mut expected = result.solutions.clone();
            for s in &mut expected {
                s.stats = Default::default();
            }
            prop_assert_eq!(parsed.to_solutions(), expected);
            prop_assert_eq!(parsed.optimal_area, result.optimal_area);
            Ok(())
        })
        .map_err(|e| e.to_string());
    check("json round trip", round_trip, &mut failures);

    let determinism = runner
        .run(&small_instance(), |inst| {
            let a = enumerate_all_optimal(&inst, &EnumConfig::default()).unwrap();
            let b = enumerate_all_optimal(&inst, &EnumConfig::default()).unwrap();
            let par = enumerate_all_optimal(
                &inst,
                &EnumConfig {
                    parallel: true,
                    ..EnumConfig::default()
                },
            )
            .unwrap();
            let ja = emit_json(&a, &inst, Source::default(), false).unwrap();
            prop_assert_eq!(&ja, &emit_json(&b, &inst, Source::default(), false).unwrap());
            prop_assert_eq!(&a.solutions, &par.solutions);
            Ok(())
        })
        .map_err(|e| e.to_string());
    check("determinism", determinism, &mut failures);

    report(
        8,
        failures.is_empty(),
        &format!(
            "commit/undo, area conservation, verifier independence, json round trip, determinism; {}",
            if failures.is_empty() { "all hold".to_string() } else { failures.join("; ") }
        ),
    );
}

#[test]
fn criterion_09_anytime_convergence() {
    let mut wrong = Vec::new();
    for n in 1..=8 {
        let inst = generate(Family::ConsecutiveSquares, n).unwrap();
        let mut last = u64::MAX;
        let mut monotone = true;
        let best = anytime_search(&inst, &EnumConfig::default(), &mut |s| {
            let area = s.bbox.area().unwrap();
            monotone &= area < last;
            last = area;
        })
        .unwrap();
        assert!(verify(&inst, &best).valid);
        let expected = reference(Family::ConsecutiveSquares, n).unwrap().scaled_boxes(1).unwrap()[0];
        if best.bbox.area().unwrap() != expected.area().unwrap() || last != best.bbox.area().unwrap() || !monotone {
            wrong.push(format!("n={n}: got {:?}", best.bbox));
        }
    }
    report(9, wrong.is_empty(), &format!("squares n=1..8 converge to the optimum {}", wrong.join("; ")));
}

#[test]
fn criterion_10_declared_not_reproducible() {
    // Large-instance CPU times and x-solution counts depend on the machine
    // and search order; criteria 1-9 stand in for them.
    println!(
        "criterion 10: DECLARED not reproducible (large-N timings and x-solution counts); \
         covered by criteria 1-9 and the boxes-tested diffs"
    );
}
