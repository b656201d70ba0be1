//! Acceptance suite: one line per criterion, then a single overall assertion.
//!
//! Run with `cargo test -p li-core --test acceptance -- --nocapture` to see
//! the report.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use li_core::assoc::{
    axiom_check, interval_table, narrow_delta, Bracket, Narrowing, OpTable, SurdValue,
};
use li_core::funceq::{
    product_residual, three_term_closed_form, three_term_exact, variational_residual, ExpSolution,
    PotentialSolution,
};
use li_core::inference::{check_chain_product, Bivaluation};
use li_core::lattice::{Element, Lattice};
use li_core::maxent::{marginal_constraints, solve, SolverOptions};
use li_core::potential::{check_grouping, divergence, entropy, information, Distribution};
use li_core::valuation::Measure;
use num::bigint::BigInt;
use num::rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || {
        format!("took {elapsed:.2?}, budget {budget:?}")
    })
}

fn basis() -> Vec<SurdValue> {
    vec![SurdValue::one(), SurdValue::sqrt(2), SurdValue::sqrt(3)]
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn interval_table_rows() -> Outcome {
    let start = Instant::now();
    let rows =
        interval_table(&basis(), &SurdValue::sqrt(5), &[1, 2, 3, 10]).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let want = [
        (1, "2a", "a+b", "2.0000", "2.4142"),
        (2, "a+2c", "2b+c", "4.4641", "4.5605"),
        (3, "a+4b", "5a+c", "6.6569", "6.7321"),
        (10, "14a+b+4c", "9a+7b+2c", "22.3424", "22.3636"),
    ];
    let mut shown = Vec::new();
    for ((u, bracket), (wu, lo, hi, lo_d, hi_d)) in rows.iter().zip(want) {
        let Bracket::Between {
            lower: Some(l),
            upper,
        } = bracket
        else {
            return Err(format!("u={u}: unexpected {bracket:?}"));
        };
        let got = (
            l.combo(),
            upper.combo(),
            l.value.to_decimal(4),
            upper.value.to_decimal(4),
        );
        ensure(
            *u == wu && got == (lo.into(), hi.into(), lo_d.into(), hi_d.into()),
            || format!("u={u}: got {got:?}, want ({lo}, {hi}, {lo_d}, {hi_d})"),
        )?;
        shown.push(format!("u={u}: {} < {u}δ < {}", got.0, got.1));
    }
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("{} [{elapsed:.2?}]", shown.join("; ")))
}

fn bounds(max_u: u64) -> Result<(li_core::assoc::DeltaBounds, Duration), String> {
    let start = Instant::now();
    let n = narrow_delta(&basis(), &SurdValue::sqrt(5), max_u).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    match n {
        Narrowing::Bounds(b) => Ok((b, elapsed)),
        Narrowing::Exact(w) => Err(format!("unexpected equality certificate {w}")),
    }
}

fn coarse_bound() -> Outcome {
    let (b, elapsed) = bounds(10)?;
    let got = format!(
        "({}) < δ < ({}), {} / {}",
        b.lower,
        b.upper,
        b.lower_decimal(4),
        b.upper_decimal(4)
    );
    let lower_ok =
        b.lower.multiplicities == [8, 0, 7] && b.lower.u == 9 && b.lower_decimal(4) == "2.2360";
    let upper_ok =
        b.upper.multiplicities == [7, 0, 5] && b.upper.u == 7 && b.upper_decimal(4) == "2.2372";
    ensure(lower_ok && upper_ok, || {
        format!(
            "{got}; want (8a+7c / 9) < δ < (7a+5c / 7), 2.2360 / 2.2372 [lower {}, upper {}]",
            if lower_ok { "ok" } else { "MISMATCH" },
            if upper_ok { "ok" } else { "MISMATCH" }
        )
    })?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("{got} [{elapsed:.2?}]"))
}

fn fine_bound() -> Outcome {
    let (b, elapsed) = bounds(1000)?;
    let quoted_lower: SurdValue = "2236067977497/1000000000000".parse().unwrap();
    let quoted_upper: SurdValue = "2236067977505/1000000000000".parse().unwrap();
    let (lo, hi) = (b.lower_ratio(), b.upper_ratio());
    let (lo_d, hi_d) = (b.lower_decimal(12), b.upper_decimal(12));
    let delta = SurdValue::sqrt(5);
    ensure(lo < delta && delta < hi, || {
        format!("enclosure {lo_d} .. {hi_d} misses δ")
    })?;
    let lower_ok = lo_d == "2.236067977497" || lo > quoted_lower;
    let upper_ok = hi_d == "2.236067977505" || hi < quoted_upper;
    ensure(lower_ok && upper_ok, || {
        format!("{lo_d} < δ < {hi_d} is looser than the quoted enclosure")
    })?;
    within(elapsed, Duration::from_secs(600))?;
    Ok(format!(
        "({}) {lo_d} < δ < {hi_d} ({}) [{elapsed:.2?}]",
        b.lower, b.upper
    ))
}

fn random_element(rng: &mut ChaCha8Rng, n: usize) -> Element {
    Element::from_mask(n, rng.gen_range(0..1u64 << n))
}

fn probability_calculus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for _ in 0..500 {
        let n = rng.gen_range(1..=12);
        let lat = Arc::new(Lattice::with_atoms(n).unwrap());
        let values = (0..n).map(|_| rng.gen_range(0.01..10.0)).collect();
        let m = Measure::new(lat.clone(), values).unwrap();
        for _ in 0..20 {
            let t = loop {
                let t = random_element(&mut rng, n);
                if !t.is_bottom() {
                    break t;
                }
            };
            let (x, y) = (random_element(&mut rng, n), random_element(&mut rng, n));
            let b = Bivaluation::new(m.clone(), t.clone()).unwrap();
            let p = |e: &Element| b.probability(e).unwrap();
            let (px, py) = (p(&x), p(&y));
            ensure(
                (0.0..=1.0).contains(&px) && p(&t) == 1.0 && p(&lat.bottom()) == 0.0,
                || format!("range violated: p={px}"),
            )?;
            let sum_rule = p(&x.join(&y).unwrap()) + p(&x.meet(&y).unwrap()) - px - py;
            // chain x∧y∧t ≤ y∧t ≤ t
            let yt = y.meet(&t).unwrap();
            let xyt = x.meet(&yt).unwrap();
            let chain = if yt.is_bottom() {
                0.0
            } else {
                check_chain_product(&m, &xyt, &yt, &t).unwrap()
            };
            // p(x|y∧t)·p(y|t) = p(y|x∧t)·p(x|t)
            let xt = x.meet(&t).unwrap();
            let bayes = if yt.is_bottom() || xt.is_bottom() {
                0.0
            } else {
                let lhs = Bivaluation::new(m.clone(), yt.clone())
                    .unwrap()
                    .probability(&x)
                    .unwrap()
                    * py;
                let rhs = Bivaluation::new(m.clone(), xt.clone())
                    .unwrap()
                    .probability(&y)
                    .unwrap()
                    * px;
                lhs - rhs
            };
            let ie = m.check_inclusion_exclusion(&x, &y).unwrap() / m.value(&lat.top()).unwrap();
            worst = worst
                .max(sum_rule.abs())
                .max(chain.abs())
                .max(bayes.abs())
                .max(ie.abs());
            checks += 1;
        }
    }
    ensure(worst < 1e-12, || format!("max |residual| = {worst:e}"))?;
    Ok(format!(
        "{checks} checks on 500 lattices, max |residual| = {worst:.2e}"
    ))
}

fn maxent_product() -> Outcome {
    let rows = [0.1, 0.2, 0.3, 0.4];
    let cols = [0.5, 0.3, 0.2];
    let u = vec![1.0; 12];
    let start = Instant::now();
    let constraints = marginal_constraints(&rows, &cols).map_err(|e| e.to_string())?;
    let r = solve(&u, &constraints, SolverOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut err = 0.0f64;
    for i in 0..4 {
        for j in 0..3 {
            err = err.max((r.w[i * 3 + j] - rows[i] * cols[j]).abs());
        }
    }
    let resid = constraints
        .iter()
        .map(|c| (c.apply(&r.w) - c.target()).abs())
        .fold(0.0, f64::max);
    ensure(err < 1e-8, || format!("max elementwise error {err:e}"))?;
    ensure(resid < 1e-10, || format!("constraint residual {resid:e}"))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "max error {err:.2e}, residual {resid:.2e}, {} Newton steps [{elapsed:.2?}]",
        r.iterations
    ))
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn divergence_family() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(1..20);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..10.0)).collect();
        let d = divergence(&u, &u).unwrap();
        ensure(d == 0.0, || format!("H(u|u) = {d:e}"))?;
    }
    let mut info_gap = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..12);
        let (p, q) = (random_simplex(&mut rng, n), random_simplex(&mut rng, n));
        let i = information(
            &Distribution::new(p.clone()).unwrap(),
            &Distribution::new(q.clone()).unwrap(),
        )
        .unwrap();
        info_gap = info_gap.max((i - divergence(&p, &q).unwrap()).abs());
    }
    ensure(info_gap < 1e-15, || {
        format!("information vs divergence gap {info_gap:e}")
    })?;
    let mut det_gap = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(2..12);
        let q = random_simplex(&mut rng, n);
        let k = rng.gen_range(0..n);
        let mut p = vec![0.0; n];
        p[k] = 1.0;
        let i = information(
            &Distribution::new(p).unwrap(),
            &Distribution::new(q.clone()).unwrap(),
        )
        .unwrap();
        det_gap = det_gap.max((i + q[k].ln()).abs());
    }
    ensure(det_gap < 1e-15, || {
        format!("deterministic information gap {det_gap:e}")
    })?;
    let mut grouping = 0.0f64;
    for _ in 0..1000 {
        let p = random_simplex(&mut rng, 3);
        grouping = grouping.max(check_grouping(p[0], p[1], p[2]).unwrap().abs());
    }
    ensure(grouping < 1e-12, || {
        format!("grouping residual {grouping:e}")
    })?;
    let mut uniform = 0.0f64;
    for n in 1..=256 {
        uniform = uniform.max((entropy(&Distribution::uniform(n)) - (n as f64).ln()).abs());
    }
    ensure(uniform < 1e-15, || {
        format!("uniform entropy gap {uniform:e}")
    })?;
    Ok(format!(
        "H(u|u)=0; info gap {info_gap:.1e}; deterministic gap {det_gap:.1e}; grouping {grouping:.1e}; uniform {uniform:.1e}"
    ))
}

fn functional_equations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid: Vec<f64> = (0..10).map(|i| -3.0 + 6.0 * i as f64 / 9.0).collect();
    let mut product = 0.0f64;
    for _ in 0..20 {
        let a = loop {
            let a: f64 = rng.gen_range(-2.0..2.0);
            if a.abs() > 0.05 {
                break a;
            }
        };
        let sol = ExpSolution::new(a, rng.gen_range(0.1..5.0)).unwrap();
        for &t in &grid {
            for &x in &grid {
                for &e in &grid {
                    product = product.max(product_residual(&sol, t, x, e).unwrap().relative.abs());
                }
            }
        }
    }
    ensure(product < 1e-12, || {
        format!("product relative residual {product:e}")
    })?;

    let mut three = 0.0f64;
    for _ in 0..50 {
        let (p0, pb) = (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
        let (mut prev, mut cur) = (p0, pb);
        for m in 0..=30 {
            let iterated = if m == 0 {
                p0
            } else if m == 1 {
                pb
            } else {
                let next = cur + prev;
                prev = cur;
                cur = next;
                cur
            };
            let closed = three_term_closed_form(p0, pb, m).unwrap();
            three = three.max(((closed - iterated) / iterated).abs());
        }
    }
    ensure(three < 1e-9, || format!("3-term relative error {three:e}"))?;
    let fib = three_term_exact(&q(1, 1), &q(1, 1), 10).unwrap();
    ensure(fib == SurdValue::from_integer(89), || {
        format!("Fibonacci case gave {fib}")
    })?;

    let (mut var, mut fd) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let sol = PotentialSolution::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        )
        .unwrap();
        let chk = variational_residual(
            &sol,
            rng.gen_range(-5.0..5.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.1..10.0),
        )
        .unwrap();
        var = var.max(chk.residual.abs());
        fd = fd.max(chk.derivative_error);
    }
    ensure(var < 1e-12, || format!("variational residual {var:e}"))?;
    ensure(fd < 1e-6, || {
        format!("finite-difference disagreement {fd:e}")
    })?;
    Ok(format!(
        "product {product:.1e}; 3-term {three:.1e}, F(10)=89; variational {var:.1e}, FD {fd:.1e}"
    ))
}

fn minimality() -> Outcome {
    let samples = [0.1, 0.9, 1.0, 1.5, 2.0, 3.0];
    let cases = [
        (OpTable::Addition, "x+y", [true, true, true]),
        (OpTable::FloorLeft, "floor(x)+y", [false, true, true]),
        (OpTable::FloorRight, "x+floor(y)", [true, false, true]),
        (OpTable::SumOfSquares, "x^2+y^2", [true, true, false]),
    ];
    let mut shown = Vec::new();
    for (op, name, want) in cases {
        let r = axiom_check(&op, &samples).map_err(|e| e.to_string())?;
        let outcomes = [&r.axiom1a, &r.axiom1b, &r.axiom2];
        for ((o, w), label) in outcomes.iter().zip(want).zip(["1a", "1b", "2"]) {
            ensure(o.passed == w && o.witness.is_some() != w, || {
                format!("{name}: axiom {label} passed={} (want {w})", o.passed)
            })?;
            if let Some(wit) = &o.witness {
                shown.push(format!(
                    "{name} fails {label} at ({}, {}, {}): {} vs {}",
                    wit.x, wit.y, wit.z, wit.lhs, wit.rhs
                ));
            }
        }
    }
    Ok(shown.join("; "))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("C1 interval table for u = 1, 2, 3, 10", interval_table_rows),
        ("C2 coarse enclosure at max_u = 10", coarse_bound),
        ("C3 fine enclosure at max_u = 1000", fine_bound),
        (
            "C4 probability calculus on random lattices",
            probability_calculus,
        ),
        (
            "C5 maxent reproduces the product of marginals",
            maxent_product,
        ),
        ("C6 divergence, information and entropy", divergence_family),
        ("C7 functional-equation residuals", functional_equations),
        ("C8 minimality counterexamples", minimality),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                println!("FAIL  {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
