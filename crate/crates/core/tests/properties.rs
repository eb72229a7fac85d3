mod common;

use common::{circle_exit_bisect, disk_rebounds, Ladder};
use proptest::prelude::*;
use transport_honesty::boundary::BoundaryOperatorSpec;
use transport_honesty::density::PiecewiseDensity;
use transport_honesty::expansion::{semigroup_identity_residual, v_partial_sum, v_r_partial_sum};
use transport_honesty::geometry::{ConvexBilliard, Geometry, Vec2};
use transport_honesty::honesty::{defect, resolvent_defect};
use transport_honesty::steps::Steps;

fn ladder() -> impl Strategy<Value = Ladder> {
    prop_oneof![Just(Ladder::Unit), Just(Ladder::Geometric)]
}

/// A nonnegative density made of one cell in each of the first three intervals.
fn density(ladder: &Ladder, cells: &[(f64, f64, f64)]) -> (Geometry, PiecewiseDensity) {
    let gi = ladder.union();
    let pieces: Vec<(usize, f64, f64, f64)> = cells
        .iter()
        .enumerate()
        .map(|(k, &(u, w, v))| {
            let (a, b) = gi.interval(k).unwrap();
            let lo = a + u * (b - a);
            let hi = lo + w * (b - lo);
            (k, lo, hi.max(lo + 1e-3 * (b - lo)).min(b), v)
        })
        .collect();
    let f = PiecewiseDensity::from_pieces(&gi, &pieces).unwrap();
    (Geometry::from(gi), f)
}

fn cells() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.0..0.9f64, 0.05..1.0f64, 0.0..2.0f64), 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steps_integrals_are_additive(
        a in prop::collection::vec((-5.0..5.0f64, 0.01..3.0f64, -2.0..2.0f64), 1..6),
        b in prop::collection::vec((-5.0..5.0f64, 0.01..3.0f64, -2.0..2.0f64), 1..6),
        dx in -4.0..4.0f64,
        cut in -6.0..8.0f64,
    ) {
        let mk = |c: &[(f64, f64, f64)]| {
            c.iter().fold(Steps::zero(), |acc, &(lo, w, v)| acc.add(&Steps::indicator(lo, lo + w, v)))
        };
        let (fa, fb) = (mk(&a), mk(&b));
        let sum = fa.add(&fb);
        prop_assert!((sum.integral() - fa.integral() - fb.integral()).abs() < 1e-12);
        prop_assert!((fa.shifted(dx).integral() - fa.integral()).abs() < 1e-12);
        let split = fa.integral_over(-10.0, cut) + fa.integral_over(cut, 10.0);
        prop_assert!((split - fa.integral()).abs() < 1e-12);
    }

    #[test]
    fn partial_sums_are_substochastic(l in ladder(), c in cells(), t in 0.0..3.0f64, r in 0.05..1.0f64) {
        let (g, f) = density(&l, &c);
        let h = BoundaryOperatorSpec::shift(r).unwrap();
        let sum = v_partial_sum(t, &f, &g, &h, 1e-10, 1000).unwrap();
        prop_assert!(sum.density.is_nonnegative());
        prop_assert!(sum.mass() <= f.integral() + 1e-12);
        prop_assert!(sum.order_masses.iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn partial_sums_grow_with_gain(l in ladder(), c in cells(), t in 0.0..3.0f64, r1 in 0.05..1.0f64, r2 in 0.05..1.0f64) {
        let (g, f) = density(&l, &c);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let h = BoundaryOperatorSpec::shift(1.0).unwrap();
        let a = v_r_partial_sum(t, &f, lo, &g, &h, 1e-12, 1000).unwrap();
        let b = v_r_partial_sum(t, &f, hi, &g, &h, 1e-12, 1000).unwrap();
        prop_assert!(a.density.dominated_by(&b.density, 1e-9));
    }

    #[test]
    fn orders_compose(l in ladder(), c in cells(), k in 0usize..5, t in 0.0..2.5f64, s in 0.0..2.5f64) {
        let (g, f) = density(&l, &c);
        let h = BoundaryOperatorSpec::shift(0.8).unwrap();
        let res = semigroup_identity_residual(k, t, s, &f, &g, &h).unwrap();
        prop_assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn window_defects_add_up(a in 0.0..3.0f64, b in 0.0..3.0f64, c in 0.0..3.0f64) {
        let mut w = [a, b, c];
        w.sort_by(f64::total_cmp);
        let (g, h, f) = Ladder::Geometric.setup(1.0);
        let d = |s, t| defect(s, t, &f, &g, &h, 1e-10, 1000).unwrap().limit;
        let whole = d(w[0], w[2]);
        let parts = d(w[0], w[1]) + d(w[1], w[2]);
        prop_assert!((whole - parts).abs() < 1e-9, "{whole} vs {parts}");
        prop_assert!(whole >= -1e-12);
    }

    #[test]
    fn resolvent_iterates_decrease(l in ladder(), c in cells(), lambda in 0.05..5.0f64) {
        let (g, f) = density(&l, &c);
        let h = BoundaryOperatorSpec::shift(1.0).unwrap();
        let d = resolvent_defect(&f, lambda, &g, &h, 1e-10, 1000).unwrap();
        prop_assert!(d.sequence.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(d.status.is_conclusive());
    }

    #[test]
    fn disk_exit_matches_bisection(rho in 0.0..0.999f64, phi in 0.0..6.3f64, psi in 0.0..6.3f64, speed in 0.1..3.0f64) {
        let table = ConvexBilliard::unit_disk();
        let x = Vec2::new(rho * phi.cos(), rho * phi.sin());
        let v = Vec2::new(speed * psi.cos(), speed * psi.sin());
        let hit = table.wall_hit(&x, &v).unwrap();
        let oracle = circle_exit_bisect([x[0], x[1]], [v[0], v[1]], 1.0);
        prop_assert!((hit.time - oracle).abs() <= 1e-12 * oracle.max(1.0), "{} vs {oracle}", hit.time);
        if let Some(w) = table.reflect(&v, hit.normal) {
            prop_assert!((w.norm() - v.norm()).abs() <= 1e-12 * v.norm());
        }
    }

    #[test]
    fn disk_rebound_counts(rho in 0.0..0.99f64, phi in 0.0..6.3f64, psi in 0.0..6.3f64, t in 0.0..15.0f64) {
        let table = ConvexBilliard::unit_disk();
        let x = Vec2::new(rho * phi.cos(), rho * phi.sin());
        let v = Vec2::new(psi.cos(), psi.sin());
        let seq = table.rebound_sequence(&x, &v, t).unwrap();
        // only a rebound within rounding of t may land on either side
        let lo = disk_rebounds([x[0], x[1]], [v[0], v[1]], 1.0, (t - 1e-9).max(0.0));
        let hi = disk_rebounds([x[0], x[1]], [v[0], v[1]], 1.0, t + 1e-9);
        let got = seq.rebounds.len() as u32;
        prop_assert!(lo <= got && got <= hi, "{got} outside [{lo}, {hi}]");
    }
}

#[test]
fn kernel_operator_spreads_mass() {
    // half of each exit goes one step up, half two steps up
    let gi = Ladder::Unit.union();
    let rows = (0..64)
        .map(|k| (k, vec![(k + 1, 0.5), (k + 2, 0.5)]))
        .collect();
    let h = BoundaryOperatorSpec::kernel(rows, 1.0).unwrap();
    let f = PiecewiseDensity::interval_indicator(&gi, 0).unwrap();
    let g = Geometry::from(gi);
    let sum = v_partial_sum(1.0, &f, &g, &h, 1e-12, 1000).unwrap();
    // by t = 1 every particle has exited once and none twice
    assert!((sum.mass() - 1.0).abs() < 1e-12);
    let sum_1 = sum.density.restrict(1).integral();
    let sum_2 = sum.density.restrict(2).integral();
    assert!((sum_1 - 0.5).abs() < 1e-12 && (sum_2 - 0.5).abs() < 1e-12);
}
