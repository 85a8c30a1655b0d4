use proptest::prelude::*;

use qflow::functionals::{eval_f_nu, eval_regularized, subgrad_f_nu, KernelSign, ObjectiveParams, Selection};
use qflow::measure::{Grid, QuantileVector, TargetMeasure};
use qflow::numerics::{project_isotonic, scalar_resolvent};
use qflow::oracles::mmd_squared_bruteforce;

fn targets() -> Vec<TargetMeasure> {
    let grid = Grid::new(6).unwrap();
    vec![
        TargetMeasure::dirac(0.3).unwrap(),
        TargetMeasure::uniform(-1.0, 2.0).unwrap(),
        TargetMeasure::truncated_gaussian(-0.5, 1.2, 0.02, 0.97).unwrap(),
        TargetMeasure::empirical(&[-2.0, 0.0, 0.1, 4.0], &[0.1, 0.2, 0.3, 0.4]).unwrap(),
        TargetMeasure::grid_sampled(
            &QuantileVector::new(grid, vec![-3.0, -1.0, -1.0, 0.5, 0.6, 2.0]).unwrap(),
        )
        .unwrap(),
    ]
}

fn atoms_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0..5.0f64, 0.05..1.0f64), 1..8).prop_map(|raw| {
        let total: f64 = raw.iter().map(|a| a.1).sum();
        raw.into_iter().map(|(x, w)| (x, w / total)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn resolvent_is_nonexpansive_and_monotone(
        c1 in -8.0..8.0f64,
        c2 in -8.0..8.0f64,
        w in 0.0..4.0f64,
    ) {
        for t in targets() {
            let (x1, x2) = (scalar_resolvent(c1, w, &t), scalar_resolvent(c2, w, &t));
            prop_assert!((x1 - x2).abs() <= (c1 - c2).abs() + 1e-12);
            if c1 <= c2 {
                prop_assert!(x1 <= x2 + 1e-12);
            }
        }
    }

    #[test]
    fn bruteforce_mmd_is_symmetric_and_nonnegative(mu in atoms_strategy(), nu in atoms_strategy()) {
        let a = mmd_squared_bruteforce(&mu, &nu);
        let b = mmd_squared_bruteforce(&nu, &mu);
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(a >= -1e-12);
        prop_assert!(mmd_squared_bruteforce(&mu, &mu).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn isotonic_projection_is_idempotent_and_lipschitz(
        pair in (1usize..40).prop_flat_map(|n| (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
        ))
    ) {
        let (u, v) = pair;
        let pu = project_isotonic(&u);
        prop_assert!(pu.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let again = project_isotonic(&pu);
        for (a, b) in again.iter().zip(&pu) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let pv = project_isotonic(&v);
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(dist(&pu, &pv) <= dist(&u, &v) + 1e-9);
        // sums are preserved by pooling
        prop_assert!((pu.iter().sum::<f64>() - u.iter().sum::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn negative_objective_is_convex_on_the_cone(
        a in prop::collection::vec(0.0..1.0f64, 16),
        b in prop::collection::vec(0.0..1.0f64, 16),
        shift in -3.0..3.0f64,
        theta in 0.0..1.0f64,
        lambda in 0.0..1.0f64,
    ) {
        let grid = Grid::new(16).unwrap();
        let cum = |inc: &[f64]| -> Vec<f64> {
            inc.iter().scan(shift, |acc, d| { *acc += d; Some(*acc) }).collect()
        };
        let u = QuantileVector::new(grid, cum(&a)).unwrap();
        let v = QuantileVector::new(grid, cum(&b)).unwrap();
        let mid = u.axpy(theta, &v.sub(&u).unwrap()).unwrap();
        for t in targets() {
            let p = ObjectiveParams::new(lambda, KernelSign::Negative, t).unwrap();
            let lhs = eval_regularized(&mid, &p);
            let rhs = (1.0 - theta) * eval_regularized(&u, &p) + theta * eval_regularized(&v, &p);
            prop_assert!(lhs <= rhs + 1e-10, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn subgradient_inequality(
        u in prop::collection::vec(-4.0..4.0f64, 12),
        v in prop::collection::vec(-4.0..4.0f64, 12),
    ) {
        let grid = Grid::new(12).unwrap();
        let u = QuantileVector::new(grid, u).unwrap();
        let v = QuantileVector::new(grid, v).unwrap();
        for t in targets() {
            for sel in [Selection::Lower, Selection::Upper, Selection::Midpoint] {
                let g = subgrad_f_nu(&u, &t, sel);
                let lin = eval_f_nu(&u, &t) + g.dot(&v.sub(&u).unwrap()).unwrap();
                prop_assert!(eval_f_nu(&v, &t) >= lin - 1e-10);
            }
        }
    }
}
