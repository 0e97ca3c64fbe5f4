mod common;

use std::collections::BTreeSet;

use activemap::geometry::{wrap_signed, Action, Cell, Pose2, RayWalk};
use activemap::mapping::{bresenham, detect_frontiers, EgoSemanticMap, MapParams, ProbMap, SemanticCell, TriGrid, TriState};
use activemap::metrics::{auc, chamfer};
use activemap::planning::{astar, distance_field, PathCost};
use activemap::sensor::{DepthScan, Ray};
use activemap::ExactProbMap;
use proptest::prelude::*;

fn tri_grid(max: usize) -> impl Strategy<Value = TriGrid> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop_oneof![3 => Just(TriState::Free), 1 => Just(TriState::Occupied), 1 => Just(TriState::Unknown)], w * h)
            .prop_map(move |cells| TriGrid::from_cells(w, h, cells))
    })
}

fn cells(max: i32, n: usize) -> impl Strategy<Value = Vec<Cell>> {
    prop::collection::vec((0..max, 0..max).prop_map(|(x, y)| Cell::new(x, y)), 1..n)
}

proptest! {
    #[test]
    fn lines_match_oracle_and_reverse(ax in -30i32..30, ay in -30i32..30, bx in -30i32..30, by in -30i32..30) {
        let (a, b) = (Cell::new(ax, ay), Cell::new(bx, by));
        let line = bresenham(a, b);
        prop_assert_eq!(&line, &common::line_oracle(a, b));
        let mut back = bresenham(b, a);
        back.reverse();
        prop_assert_eq!(&line, &back);
        prop_assert!(line.windows(2).all(|w| (w[0].x - w[1].x).abs() <= 1 && (w[0].y - w[1].y).abs() <= 1));
    }

    #[test]
    fn astar_matches_dijkstra(tri in tri_grid(10), a in 0usize..100, b in 0usize..100) {
        let n = tri.width() * tri.height();
        let (start, goal) = (tri.cell_at(a % n), tri.cell_at(b % n));
        prop_assume!(tri.get(start) == TriState::Free && tri.get(goal) == TriState::Free);
        let oracle = common::dijkstra_oracle(&tri, start);
        let expected = oracle[b % n].map(|(o, d)| PathCost { orthogonal: o, diagonal: d });
        prop_assert_eq!(astar(&tri, start, goal, 0.1, f64::INFINITY).ok().map(|p| p.cost), expected);
        prop_assert_eq!(distance_field(&tri, start)[b % n], expected);
    }

    #[test]
    fn astar_paths_are_legal(tri in tri_grid(10), a in 0usize..100, b in 0usize..100) {
        let n = tri.width() * tri.height();
        let (start, goal) = (tri.cell_at(a % n), tri.cell_at(b % n));
        if let Ok(plan) = astar(&tri, start, goal, 0.1, f64::INFINITY) {
            prop_assert_eq!(plan.path.first(), Some(&start));
            prop_assert_eq!(plan.path.last(), Some(&goal));
            for w in plan.path.windows(2) {
                let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
                prop_assert!(dx.abs() <= 1 && dy.abs() <= 1 && (dx, dy) != (0, 0));
                prop_assert_eq!(tri.get(w[1]), TriState::Free);
                if dx != 0 && dy != 0 {
                    prop_assert!(tri.is_free(w[0].offset(dx, 0)) && tri.is_free(w[0].offset(0, dy)));
                }
            }
        }
    }

    #[test]
    fn frontiers_match_naive_scan(tri in tri_grid(24)) {
        let got: BTreeSet<Cell> = detect_frontiers(&tri).cells().iter().copied().collect();
        prop_assert_eq!(got, common::frontier_oracle(&tri));
    }

    #[test]
    fn chamfer_never_grows_with_more_captures(gt in cells(40, 60), cap in cells(40, 30), extra in cells(40, 30)) {
        let before: f64 = chamfer(&gt, &cap, 0.1, 100.0);
        let mut more = cap.clone();
        more.extend(extra);
        prop_assert!(chamfer(&gt, &more, 0.1, 100.0) <= before);
    }

    #[test]
    fn auc_is_bounded_by_the_curve(curve in prop::collection::vec(0.0f64..100.0, 1..80), budget in 1usize..80) {
        let v = auc(&curve, budget);
        let used = &curve[..curve.len().min(budget)];
        let hi = used.iter().chain(curve.last()).cloned().fold(f64::MIN, f64::max);
        let lo = used.iter().chain(curve.last()).cloned().fold(f64::MAX, f64::min);
        prop_assert!(v <= hi + 1e-9 && v >= lo - 1e-9);
    }

    #[test]
    fn clamped_actions_are_in_the_box(dx in -100.0f64..100.0, dy in -100.0f64..100.0, dt in -20.0f64..20.0, r in 0.1f64..5.0) {
        let (a, changed) = Action::new(dx, dy, dt).clamped(r);
        prop_assert!(a.is_within(r));
        prop_assert_eq!(a.clamped(r), (a, false));
        prop_assert_eq!(changed, a != Action::new(dx, dy, dt));
    }

    #[test]
    fn wrap_signed_lands_in_half_open_interval(t in -100.0f64..100.0) {
        let w = wrap_signed(t);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        prop_assert!(((t - w) / std::f64::consts::TAU - ((t - w) / std::f64::consts::TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn ray_walk_is_contiguous_and_ordered(x in 0.0f64..5.0, y in 0.0f64..5.0, angle in 0.0f64..std::f64::consts::TAU) {
        let walk: Vec<(Cell, f64)> = RayWalk::new(x, y, angle, 0.1).take(60).collect();
        prop_assert_eq!(walk[0], (Cell::containing(x, y, 0.1), 0.0));
        for w in walk.windows(2) {
            prop_assert!(w[1].1 >= w[0].1);
            prop_assert!((w[1].0.x - w[0].0.x).abs() <= 1 && (w[1].0.y - w[0].0.y).abs() <= 1);
            // the entry point lies on the boundary of the entered cell
            let (px, py) = (x + angle.cos() * w[1].1, y + angle.sin() * w[1].1);
            let (cx, cy) = (w[1].0.x as f64 * 0.1, w[1].0.y as f64 * 0.1);
            prop_assert!(px >= cx - 1e-9 && px <= cx + 0.1 + 1e-9 && py >= cy - 1e-9 && py <= cy + 0.1 + 1e-9);
        }
    }

    #[test]
    fn exact_log_odds_updates_commute(rays in prop::collection::vec((0.0f64..6.3, 0.05f64..2.0, any::<bool>()), 1..40), split in 0usize..40) {
        let scan = |rs: &[(f64, f64, bool)]| DepthScan {
            origin: Pose2::new(3.05, 3.05, 0.0),
            rays: rs.iter().map(|&(angle, range, hit)| Ray { angle, range, hit }).collect(),
            fov: std::f64::consts::TAU,
            max_range: 2.0,
        };
        let split = split.min(rays.len());
        let params = MapParams { clamp_min: -1e6, clamp_max: 1e6, ..MapParams::default() };
        let (mut ab, mut ba): (ExactProbMap, ExactProbMap) = (ProbMap::new(64, 64, 0.1, params), ProbMap::new(64, 64, 0.1, params));
        let (first, second) = (scan(&rays[..split]), scan(&rays[split..]));
        ab.integrate_scan(&first.origin, &first);
        ab.integrate_scan(&second.origin, &second);
        ba.integrate_scan(&second.origin, &second);
        ba.integrate_scan(&first.origin, &first);
        for i in 0..64 * 64 {
            let c = Cell::new(i % 64, i / 64);
            prop_assert_eq!(ab.logodds(c), ba.logodds(c));
        }
    }

    #[test]
    fn rle_round_trips(codes in prop::collection::vec(0u8..4, 64)) {
        let cells = codes.iter().map(|c| [SemanticCell::Occupied, SemanticCell::Free, SemanticCell::Unknown, SemanticCell::Frontier][*c as usize]).collect();
        let ego = EgoSemanticMap::from_cells(8, cells);
        prop_assert_eq!(EgoSemanticMap::from_rle(&ego.to_rle(), 8).unwrap(), ego);
    }
}
