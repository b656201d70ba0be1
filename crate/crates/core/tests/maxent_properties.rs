use li_core::maxent::{marginal_constraints, solve, LinearConstraint, SolverOptions};
use li_core::potential::divergence;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn marginals() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..6, 2usize..6).prop_flat_map(|(n, m)| {
        (
            proptest::collection::vec(0.05f64..3.0, n),
            proptest::collection::vec(0.05f64..3.0, m),
        )
            .prop_map(|(rows, cols)| {
                // rescale columns so both marginals share a total
                let (rs, cs): (f64, f64) = (rows.iter().sum(), cols.iter().sum());
                let cols = cols.iter().map(|c| c * rs / cs).collect();
                (rows, cols)
            })
    })
}

fn residual(cs: &[LinearConstraint], w: &[f64]) -> f64 {
    cs.iter()
        .map(|c| (c.apply(w) - c.target()).abs())
        .fold(0.0, f64::max)
}

/// Orthonormal basis of the null space of the constraint matrix.
fn null_space(cs: &[LinearConstraint], n: usize) -> Vec<Vec<f64>> {
    let a = DMatrix::from_fn(cs.len().max(1), n, |i, j| {
        cs.get(i).map_or(0.0, |c| c.coeffs()[j])
    });
    let full = DMatrix::from_fn(n, n, |i, j| if i < a.nrows() { a[(i, j)] } else { 0.0 });
    let svd = full.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    (0..n)
        .filter(|&k| svd.singular_values[k] <= 1e-10 * smax.max(1.0))
        .map(|k| vt.row(k).iter().cloned().collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uniform_source_gives_product_of_marginals((rows, cols) in marginals(), scale in 0.1f64..10.0) {
        let (n, m) = (rows.len(), cols.len());
        let total: f64 = rows.iter().sum();
        let cs = marginal_constraints(&rows, &cols).unwrap();
        let r = solve(&vec![scale; n * m], &cs, SolverOptions::default()).unwrap();
        for i in 0..n {
            for j in 0..m {
                let want = rows[i] * cols[j] / total;
                prop_assert!((r.w[i * m + j] - want).abs() < 1e-8 * want.max(1.0));
            }
        }
        prop_assert!(residual(&cs, &r.w) < 1e-10 * total.max(1.0));
    }

    #[test]
    fn permuting_atoms_permutes_solution(
        (rows, cols) in marginals(),
        source_seed in proptest::collection::vec(0.1f64..5.0, 25),
        shift in 1usize..24,
    ) {
        let k = rows.len() * cols.len();
        let u: Vec<f64> = source_seed[..k].to_vec();
        let cs = marginal_constraints(&rows, &cols).unwrap();
        let base = solve(&u, &cs, SolverOptions::default()).unwrap();
        // rotate atom order by `shift`
        let perm: Vec<usize> = (0..k).map(|i| (i + shift) % k).collect();
        let pu: Vec<f64> = perm.iter().map(|&i| u[i]).collect();
        let pcs: Vec<LinearConstraint> = cs
            .iter()
            .map(|c| LinearConstraint::new(perm.iter().map(|&i| c.coeffs()[i]).collect(), c.target()).unwrap())
            .collect();
        let moved = solve(&pu, &pcs, SolverOptions::default()).unwrap();
        for (slot, &i) in perm.iter().enumerate() {
            prop_assert!((moved.w[slot] - base.w[i]).abs() < 1e-9 * base.w[i].max(1.0));
        }
    }

    #[test]
    fn solution_beats_feasible_neighbours(
        (rows, cols) in marginals(),
        source_seed in proptest::collection::vec(0.1f64..5.0, 25),
        dirs in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 25), 8),
    ) {
        let k = rows.len() * cols.len();
        let u: Vec<f64> = source_seed[..k].to_vec();
        let cs = marginal_constraints(&rows, &cols).unwrap();
        let r = solve(&u, &cs, SolverOptions::default()).unwrap();
        let best = divergence(&r.w, &u).unwrap();
        let basis = null_space(&cs, k);
        let floor = r.w.iter().cloned().fold(f64::INFINITY, f64::min);
        for d in &dirs {
            let mut step = vec![0.0; k];
            for (b, coef) in basis.iter().zip(d) {
                for (s, x) in step.iter_mut().zip(b) {
                    *s += coef * x;
                }
            }
            let norm = step.iter().map(|s| s.abs()).fold(0.0, f64::max);
            if norm == 0.0 {
                continue;
            }
            let t = 0.5 * floor / norm;
            let other: Vec<f64> = r.w.iter().zip(&step).map(|(w, s)| w + t * s).collect();
            prop_assert!(residual(&cs, &other) < 1e-8);
            prop_assert!(divergence(&other, &u).unwrap() >= best - 1e-12);
        }
    }

    #[test]
    fn resolving_from_the_solution_is_idempotent(
        (rows, cols) in marginals(),
        source_seed in proptest::collection::vec(0.1f64..5.0, 25),
    ) {
        let k = rows.len() * cols.len();
        let cs = marginal_constraints(&rows, &cols).unwrap();
        let first = solve(&source_seed[..k], &cs, SolverOptions::default()).unwrap();
        let again = solve(&first.w, &cs, SolverOptions::default()).unwrap();
        for (a, b) in first.w.iter().zip(&again.w) {
            prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
        }
        prop_assert!(again.lambdas.iter().all(|l| l.abs() < 1e-8));
    }
}
