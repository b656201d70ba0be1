//! The variational potential and its special cases.
//!
//! All logarithms are natural; entropy and information are in nats.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("entry {index} is {value}; must be finite and strictly positive")]
    NonPositive { index: usize, value: f64 },
    #[error("not a distribution: {0}")]
    InvalidDistribution(String),
    #[error("infinite information: p[{0}] > 0 where q[{0}] = 0")]
    InfiniteInformation(usize),
    #[error("degenerate split: p2 + p3 = 0")]
    DegenerateSplit,
}

fn check_positive(v: &[f64]) -> Result<(), PotentialError> {
    match v.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        Some(index) => Err(PotentialError::NonPositive {
            index,
            value: v[index],
        }),
        None => Ok(()),
    }
}

fn check_len(a: usize, b: usize) -> Result<(), PotentialError> {
    if a != b {
        return Err(PotentialError::LengthMismatch(a, b));
    }
    Ok(())
}

/// Per-atom constants of `H(m) = Σ Aᵢ + Bᵢ mᵢ + Cᵢ (mᵢ log mᵢ − mᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl PotentialSpec {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self, PotentialError> {
        check_len(a.len(), b.len())?;
        check_len(a.len(), c.len())?;
        Ok(PotentialSpec { a, b, c })
    }

    /// Constants whose minimum sits at the source `u`: `A = u`, `B = −log u`, `C = 1`.
    pub fn divergence_from(u: &[f64]) -> Result<Self, PotentialError> {
        check_positive(u)?;
        Ok(PotentialSpec {
            a: u.to_vec(),
            b: u.iter().map(|x| -x.ln()).collect(),
            c: vec![1.0; u.len()],
        })
    }

    /// `A = 0`, `B = C = −1`: the entropy of a normalized argument.
    pub fn entropy(n: usize) -> Self {
        PotentialSpec {
            a: vec![0.0; n],
            b: vec![-1.0; n],
            c: vec![-1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

pub fn potential_value(spec: &PotentialSpec, m: &[f64]) -> Result<f64, PotentialError> {
    check_len(spec.len(), m.len())?;
    check_positive(m)?;
    Ok(m.iter()
        .enumerate()
        .map(|(i, &mi)| spec.a[i] + spec.b[i] * mi + spec.c[i] * (xlogx(mi) - mi))
        .sum())
}

/// `x log x` with the `0 log 0 = 0` convention.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `H(w | u) = Σ uᵢ − wᵢ + wᵢ log(wᵢ/uᵢ)` for strictly positive measures.
pub fn divergence(w: &[f64], u: &[f64]) -> Result<f64, PotentialError> {
    check_len(w.len(), u.len())?;
    check_positive(w)?;
    check_positive(u)?;
    let mass: f64 = u.iter().sum::<f64>() - w.iter().sum::<f64>();
    Ok(mass + relative_term(w, u))
}

/// Neumaier-compensated summation.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + carry
}

fn relative_term(w: &[f64], u: &[f64]) -> f64 {
    w.iter()
        .zip(u)
        .map(|(&wi, &ui)| if wi == 0.0 { 0.0 } else { wi * (wi / ui).ln() })
        .sum()
}

/// `∂H(w|u)/∂wᵢ = log(wᵢ/uᵢ)`.
pub fn divergence_gradient(w: &[f64], u: &[f64]) -> Result<Vec<f64>, PotentialError> {
    check_len(w.len(), u.len())?;
    check_positive(w)?;
    check_positive(u)?;
    Ok(w.iter().zip(u).map(|(wi, ui)| (wi / ui).ln()).collect())
}

/// Nonnegative probabilities summing to one within `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(p: Vec<f64>) -> Result<Self, PotentialError> {
        if p.is_empty() {
            return Err(PotentialError::InvalidDistribution("empty".into()));
        }
        if let Some(i) = p.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(PotentialError::InvalidDistribution(format!(
                "p[{i}] = {}",
                p[i]
            )));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(PotentialError::InvalidDistribution(format!("sums to {s}")));
        }
        Ok(Distribution(p))
    }

    pub fn uniform(n: usize) -> Self {
        Distribution(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

/// Kullback–Leibler information `Σ pₖ log(pₖ/qₖ)`.
pub fn information(p: &Distribution, q: &Distribution) -> Result<f64, PotentialError> {
    check_len(p.0.len(), q.0.len())?;
    if let Some(k) =
        p.0.iter()
            .zip(&q.0)
            .position(|(pk, qk)| *pk > 0.0 && *qk == 0.0)
    {
        return Err(PotentialError::InfiniteInformation(k));
    }
    Ok(relative_term(&p.0, &q.0))
}

/// Shannon entropy `−Σ pₖ log pₖ`.
pub fn entropy(p: &Distribution) -> f64 {
    let s = -compensated_sum(p.0.iter().map(|&x| xlogx(x)));
    // keep the deterministic case at +0
    s + 0.0
}

/// `S(p1,p2,p3) − [S(p1, p2+p3) + (p2+p3)·S(p2/(p2+p3), p3/(p2+p3))]`.
pub fn check_grouping(p1: f64, p2: f64, p3: f64) -> Result<f64, PotentialError> {
    let whole = Distribution::new(vec![p1, p2, p3])?;
    let tail = p2 + p3;
    if tail <= 0.0 {
        return Err(PotentialError::DegenerateSplit);
    }
    let coarse = Distribution::new(vec![p1, tail])?;
    let inner = Distribution::new(vec![p2 / tail, p3 / tail])?;
    Ok(entropy(&whole) - (entropy(&coarse) + tail * entropy(&inner)))
}

/// Concrete vectors showing the divergence is neither symmetric nor a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetryWitness {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// `H(w|u)`
    pub forward: f64,
    /// `H(u|w)`
    pub reverse: f64,
    /// `H(w|v) + H(v|u)`
    pub via: f64,
}

/// `u = (1)`, `w = (2)` and the grid point `v` that most violates the triangle
/// inequality. Both failures are checked before returning.
pub fn asymmetry_witness() -> AsymmetryWitness {
    let (u, w) = (vec![1.0], vec![2.0]);
    let forward = divergence(&w, &u).expect("positive");
    let reverse = divergence(&u, &w).expect("positive");
    let (v, via) = (1..=30)
        .map(|k| vec![f64::from(k) / 10.0])
        .map(|v| {
            let via = divergence(&w, &v).expect("positive") + divergence(&v, &u).expect("positive");
            (v, via)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    assert!(forward != reverse && forward > via);
    AsymmetryWitness {
        u,
        v,
        w,
        forward,
        reverse,
        via,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|r| r / s).collect()
    }

    #[test]
    fn potential_examples() {
        let spec = PotentialSpec::new(vec![0.0], vec![0.0], vec![1.0]).unwrap();
        assert_eq!(potential_value(&spec, &[1.0]).unwrap(), -1.0);

        let u = [0.5, 2.0, 3.0];
        let w = [1.0, 1.5, 0.25];
        let h = potential_value(&PotentialSpec::divergence_from(&u).unwrap(), &w).unwrap();
        assert!((h - divergence(&w, &u).unwrap()).abs() < 1e-14);

        let p = [0.2, 0.5, 0.3];
        let s = potential_value(&PotentialSpec::entropy(3), &p).unwrap();
        assert!((s - entropy(&Distribution::new(p.to_vec()).unwrap())).abs() < 1e-15);

        assert!(matches!(
            potential_value(&spec, &[0.0]),
            Err(PotentialError::NonPositive { .. })
        ));
        assert!(matches!(
            potential_value(&spec, &[1.0, 2.0]),
            Err(PotentialError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn divergence_examples() {
        let u = [0.3, 1.0, 4.0];
        assert_eq!(divergence(&u, &u).unwrap(), 0.0);
        // 1 − 2 + 2 ln 2, evaluated from the series of ln 2 independently
        let ln2: f64 = (1..200).map(|k| 1.0 / (f64::from(k) * 2f64.powi(k))).sum();
        let expected = -1.0 + 2.0 * ln2;
        assert!((divergence(&[2.0], &[1.0]).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.386294361119891).abs() < 1e-15);
        assert!(matches!(
            divergence(&[1.0], &[1.0, 2.0]),
            Err(PotentialError::LengthMismatch(..))
        ));
        assert!(matches!(
            divergence(&[0.0], &[1.0]),
            Err(PotentialError::NonPositive { .. })
        ));
    }

    #[test]
    fn information_examples() {
        let p = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(information(&p, &p).unwrap(), 0.0);

        let q = Distribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        let delta = Distribution::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(information(&delta, &q).unwrap(), -(0.6f64).ln());

        let p = Distribution::new(vec![0.5, 0.5]).unwrap();
        let q = Distribution::new(vec![0.25, 0.75]).unwrap();
        let i = information(&p, &q).unwrap();
        assert!((i - 0.143841036225890).abs() < 1e-14);
        assert!((i - divergence(p.probs(), q.probs()).unwrap()).abs() < 1e-15);

        let zero = Distribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            information(&p, &zero).unwrap_err(),
            PotentialError::InfiniteInformation(1)
        );
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(
            entropy(&Distribution::new(vec![1.0, 0.0, 0.0]).unwrap()),
            0.0
        );
        assert!(entropy(&Distribution::new(vec![1.0, 0.0, 0.0]).unwrap()).is_sign_positive());
        for n in 1..50 {
            assert!((entropy(&Distribution::uniform(n)) - (n as f64).ln()).abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = Distribution::new(random_simplex(&mut rng, 7)).unwrap();
        let expected_info: f64 = p
            .probs()
            .iter()
            .map(|&pk| if pk > 0.0 { pk * -pk.ln() } else { 0.0 })
            .sum();
        assert!((entropy(&p) - expected_info).abs() < 1e-15);
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.5, 1.5]).is_err());
    }

    #[test]
    fn grouping() {
        let third = 1.0 / 3.0;
        assert!(check_grouping(third, third, third).unwrap().abs() < 1e-12);
        assert_eq!(
            check_grouping(1.0, 0.0, 0.0).unwrap_err(),
            PotentialError::DegenerateSplit
        );
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let p = random_simplex(&mut rng, 3);
            assert!(check_grouping(p[0], p[1], p[2]).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn witness_matches_grid_search() {
        let wit = asymmetry_witness();
        assert!((wit.forward - 0.386294361119891).abs() < 1e-14);
        assert!((wit.reverse - 0.306852819440055).abs() < 1e-14);
        // Independent brute force over a finer grid: any violation confirms the claim.
        let d = |w: f64, u: f64| u - w + w * (w / u).ln();
        let best = (1..3000)
            .map(|k| f64::from(k) / 1000.0)
            .map(|v| d(2.0, v) + d(v, 1.0))
            .fold(f64::INFINITY, f64::min);
        assert!(best < d(2.0, 1.0));
        assert!((wit.via - (d(2.0, wit.v[0]) + d(wit.v[0], 1.0))).abs() < 1e-15);
        assert!(wit.via < wit.forward);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let u: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..5.0)).collect();
            let w: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..5.0)).collect();
            let g = divergence_gradient(&w, &u).unwrap();
            for i in 0..5 {
                let h = 1e-5 * w[i];
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[i] += h;
                wm[i] -= h;
                let fd = (divergence(&wp, &u).unwrap() - divergence(&wm, &u).unwrap()) / (2.0 * h);
                assert!(
                    (fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1e-3),
                    "{fd} vs {}",
                    g[i]
                );
            }
        }
    }

    #[test]
    fn uniform_maximizes_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 6;
        let top = entropy(&Distribution::uniform(n));
        for _ in 0..1000 {
            let p = Distribution::new(random_simplex(&mut rng, n)).unwrap();
            assert!(entropy(&p) < top);
        }
    }

    proptest! {
        #[test]
        fn divergence_nonnegative(pairs in proptest::collection::vec((0.01f64..10.0, 0.01f64..10.0), 8)) {
            let (w, u): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let d = divergence(&w, &u).unwrap();
            prop_assert!(d >= -1e-12);
            if w != u {
                prop_assert!(d > 0.0);
            }
        }

        #[test]
        fn information_equals_divergence_when_normalized(raw in proptest::collection::vec((0.01f64..10.0, 0.01f64..10.0), 1..10)) {
            let (a, b): (Vec<f64>, Vec<f64>) = raw.into_iter().unzip();
            let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
            let p: Vec<f64> = a.iter().map(|x| x / sa).collect();
            let q: Vec<f64> = b.iter().map(|x| x / sb).collect();
            let i = information(&Distribution::new(p.clone()).unwrap(), &Distribution::new(q.clone()).unwrap()).unwrap();
            prop_assert!((i - divergence(&p, &q).unwrap()).abs() <= 1e-15);
        }

        #[test]
        fn potential_convex(m1 in proptest::collection::vec(0.01f64..10.0, 4), m2 in proptest::collection::vec(0.01f64..10.0, 4), c in 0.1f64..3.0) {
            let spec = PotentialSpec::new(vec![0.3; 4], vec![-0.7; 4], vec![c; 4]).unwrap();
            let mid: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| 0.5 * (a + b)).collect();
            let lhs = potential_value(&spec, &mid).unwrap();
            let rhs = 0.5 * (potential_value(&spec, &m1).unwrap() + potential_value(&spec, &m2).unwrap());
            if m1 != m2 {
                prop_assert!(lhs < rhs + 1e-12);
            }
        }
    }
}
