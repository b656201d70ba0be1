use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Read;
use std::sync::Arc;

use li_core::assoc::{
    axiom_check, interval_table_with, narrow_delta_with, AxiomOutcome, Bracket, NarrowOptions,
    Narrowing, OpTable, SurdValue, Witness,
};
use li_core::funceq::{
    product_residual, three_term_closed_form, three_term_exact, variational_residual, ExpSolution,
    PotentialSolution,
};
use li_core::inference::{bayes, Bivaluation};
use li_core::lattice::{direct_product, Element, Lattice, LatticeDoc};
use li_core::maxent::{marginal_constraints, solve, LinearConstraint, MaxentError, SolverOptions};
use li_core::potential::{divergence, entropy, information, Distribution};
use li_core::valuation::Measure;
use num::rational::BigRational;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::args::{AssocCommand, AxiomArgs, Basis, FunceqCommand, Input, OpName};
use crate::output::{object, Numbers};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable/malformed input: exit 2.
    Usage(String),
    /// Input understood but rejected by the library: exit 1.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => write!(f, "{m}"),
        }
    }
}

fn domain<E: Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

pub struct Ctx {
    pub numbers: Numbers,
    pub places: usize,
    pub jobs: Option<usize>,
}

fn read_source(path: Option<&std::path::Path>, inline: Option<&str>) -> Result<String, CliError> {
    match (path, inline) {
        (_, Some(text)) => Ok(text.to_string()),
        (Some(p), None) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Usage(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
        (Some(p), None) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display()))),
        (None, None) => Err(CliError::Usage(
            "no input given; use --input PATH|- or --json TEXT".into(),
        )),
    }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed JSON input: {e}")))
}

fn load<T: DeserializeOwned>(input: &Input) -> Result<T, CliError> {
    parse(&read_source(input.input.as_deref(), input.json.as_deref())?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureInput {
    lattice: LatticeDoc,
    /// Omitted means the uniform measure.
    #[serde(default)]
    values: Option<BTreeMap<String, f64>>,
}

impl MeasureInput {
    fn build(self) -> Result<Measure, CliError> {
        match self.values {
            Some(values) => Measure::try_from(li_core::valuation::MeasureDoc {
                lattice: self.lattice,
                values,
            })
            .map_err(domain),
            None => Ok(Measure::uniform(Arc::new(
                Lattice::try_from(self.lattice).map_err(domain)?,
            ))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbInput {
    measure: MeasureInput,
    predicate: Vec<String>,
    /// Omitted means the top element.
    #[serde(default)]
    context: Option<Vec<String>>,
}

pub fn prob(input: &Input, ctx: &Ctx) -> Result<Value, CliError> {
    let doc: ProbInput = load(input)?;
    let m = doc.measure.build()?;
    let lat = m.lattice().clone();
    let x = lat.element(&doc.predicate).map_err(domain)?;
    let t = match &doc.context {
        Some(labels) => lat.element(labels).map_err(domain)?,
        None => lat.top(),
    };
    let p = Bivaluation::new(m, t)
        .map_err(domain)?
        .probability(&x)
        .map_err(domain)?;
    Ok(object([("probability", ctx.numbers.num(p))]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BayesInput {
    prior: Vec<f64>,
    likelihood: Vec<Vec<f64>>,
    datum: usize,
}

pub fn bayes_cmd(input: &Input, ctx: &Ctx) -> Result<Value, CliError> {
    let doc: BayesInput = load(input)?;
    let post = bayes(&doc.prior, &doc.likelihood, doc.datum).map_err(domain)?;
    Ok(object([
        ("posterior", ctx.numbers.list(&post.posterior)),
        ("evidence", ctx.numbers.num(post.evidence)),
    ]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintInput {
    coeffs: Vec<f64>,
    target: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Marginals {
    rows: Vec<f64>,
    cols: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaxentInput {
    source: Vec<f64>,
    #[serde(default)]
    constraints: Vec<ConstraintInput>,
    #[serde(default)]
    marginals: Option<Marginals>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
}

fn reindex(e: MaxentError, index: usize) -> MaxentError {
    match e {
        MaxentError::InvalidConstraint { reason, .. } => {
            MaxentError::InvalidConstraint { index, reason }
        }
        other => other,
    }
}

pub fn maxent(input: &Input, ctx: &Ctx) -> Result<Value, CliError> {
    let doc: MaxentInput = load(input)?;
    let mut constraints = Vec::new();
    if let Some(m) = &doc.marginals {
        constraints.extend(marginal_constraints(&m.rows, &m.cols).map_err(domain)?);
    }
    let offset = constraints.len();
    for (i, c) in doc.constraints.into_iter().enumerate() {
        constraints.push(
            LinearConstraint::new(c.coeffs, c.target)
                .map_err(|e| domain(reindex(e, offset + i)))?,
        );
    }
    let mut opts = SolverOptions::default();
    if let Some(tol) = doc.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Domain(format!("tol must be positive, got {tol}")));
        }
        opts.tol = tol;
    }
    if let Some(n) = doc.max_iter {
        opts.max_iter = n;
    }
    let r = solve(&doc.source, &constraints, opts).map_err(domain)?;
    let d = divergence(&r.w, &doc.source).map_err(domain)?;
    Ok(object([
        ("w", ctx.numbers.list(&r.w)),
        ("lambdas", ctx.numbers.list(&r.lambdas)),
        ("iterations", Value::from(r.iterations)),
        (
            "max_constraint_residual",
            ctx.numbers.num(r.max_constraint_residual),
        ),
        ("divergence", ctx.numbers.num(d)),
    ]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DivergenceInput {
    w: Vec<f64>,
    u: Vec<f64>,
}

pub fn divergence_cmd(input: &Input, ctx: &Ctx) -> Result<Value, CliError> {
    let doc: DivergenceInput = load(input)?;
    let d = divergence(&doc.w, &doc.u).map_err(domain)?;
    Ok(object([("divergence", ctx.numbers.num(d))]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InformationInput {
    p: Vec<f64>,
    q: Vec<f64>,
}

pub fn information_cmd(input: &Input, ctx: &Ctx) -> Result<Value, CliError> {
    let doc: InformationInput = load(input)?;
    let p = Distribution::new(doc.p).map_err(domain)?;
    let q = Distribution::new(doc.q).map_err(domain)?;
    let i = information(&p, &q).map_err(domain)?;
    Ok(object([("information", ctx.numbers.num(i))]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntropyInput {
    p: Vec<f64>,
}

pub fn entropy_cmd(input: &Input, ctx: &Ctx) -> Result<Value, CliError> {
    let doc: EntropyInput = load(input)?;
    let p = Distribution::new(doc.p).map_err(domain)?;
    Ok(object([("entropy", ctx.numbers.num(entropy(&p)))]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeInput {
    lattice: LatticeDoc,
    #[serde(default)]
    x: Option<Vec<String>>,
    #[serde(default)]
    y: Option<Vec<String>>,
    #[serde(default)]
    product: Option<LatticeDoc>,
}

fn labels(lat: &Lattice, e: &Element) -> Result<Value, CliError> {
    Ok(Value::from(lat.element_labels(e).map_err(domain)?))
}

pub fn lattice(input: &Input) -> Result<Value, CliError> {
    let doc: LatticeInput = load(input)?;
    let lat = Lattice::try_from(doc.lattice).map_err(domain)?;
    let n = lat.atom_count();
    let mut out = serde_json::Map::new();
    out.insert(
        "lattice".into(),
        serde_json::to_value(lat.to_doc()).expect("serializable"),
    );
    out.insert("atom_count".into(), Value::from(n));
    let count = if n < 64 {
        Value::from(1u64 << n)
    } else {
        Value::from(format!("2^{n}"))
    };
    out.insert("element_count".into(), count);
    let x = doc
        .x
        .as_ref()
        .map(|l| lat.element(l))
        .transpose()
        .map_err(domain)?;
    let y = doc
        .y
        .as_ref()
        .map(|l| lat.element(l))
        .transpose()
        .map_err(domain)?;
    match (&x, &y) {
        (Some(x), Some(y)) => {
            out.insert("join".into(), labels(&lat, &x.join(y).map_err(domain)?)?);
            out.insert("meet".into(), labels(&lat, &x.meet(y).map_err(domain)?)?);
            out.insert("leq".into(), Value::from(x.leq(y).map_err(domain)?));
            out.insert("zeta".into(), Value::from(x.zeta(y).map_err(domain)?));
        }
        (None, None) => {}
        _ => return Err(CliError::Domain("give both x and y, or neither".into())),
    }
    if let Some(right) = doc.product {
        let right = Lattice::try_from(right).map_err(domain)?;
        let p = direct_product(&lat, &right);
        out.insert(
            "product".into(),
            serde_json::to_value(p.lattice().to_doc()).expect("serializable"),
        );
    }
    Ok(Value::Object(out))
}

fn parse_basis(b: &Basis) -> Result<(Vec<SurdValue>, SurdValue), CliError> {
    let values = b
        .basis
        .iter()
        .map(|s| s.parse::<SurdValue>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let delta = b
        .delta
        .parse::<SurdValue>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((values, delta))
}

fn witness(w: &Witness, places: usize) -> Value {
    object([
        ("combo", Value::from(w.combo())),
        ("u", Value::from(w.u)),
        ("witness", Value::from(w.to_string())),
        ("value", Value::from(w.value.to_string())),
        ("decimal", Value::from(w.ratio().to_decimal(places))),
    ])
}

pub fn assoc(cmd: &AssocCommand, ctx: &Ctx) -> Result<Value, CliError> {
    let options = NarrowOptions { jobs: ctx.jobs };
    match cmd {
        AssocCommand::Narrow { basis, max_u } => {
            let (values, delta) = parse_basis(basis)?;
            match narrow_delta_with(&values, &delta, *max_u, options).map_err(domain)? {
                Narrowing::Bounds(b) => Ok(object([
                    ("max_u", Value::from(b.max_u)),
                    ("lower", witness(&b.lower, ctx.places)),
                    ("upper", witness(&b.upper, ctx.places)),
                    (
                        "enclosure",
                        Value::from(format!(
                            "{} < delta < {}",
                            b.lower_decimal(ctx.places),
                            b.upper_decimal(ctx.places)
                        )),
                    ),
                ])),
                Narrowing::Exact(w) => Ok(object([
                    ("max_u", Value::from(*max_u)),
                    ("exact", hit(&w, ctx.places)),
                ])),
            }
        }
        AssocCommand::Table { basis, u } => {
            let (values, delta) = parse_basis(basis)?;
            let rows = interval_table_with(&values, &delta, u, options).map_err(domain)?;
            let rows = rows
                .iter()
                .map(|(u, b)| match b {
                    Bracket::Between { lower, upper } => object([
                        ("u", Value::from(*u)),
                        (
                            "lower",
                            bracket_side(
                                lower.as_ref().expect("checked by interval_table"),
                                ctx.places,
                            ),
                        ),
                        ("upper", bracket_side(upper, ctx.places)),
                    ]),
                    Bracket::Hit(w) => {
                        object([("u", Value::from(*u)), ("exact", hit(w, ctx.places))])
                    }
                })
                .collect();
            Ok(object([("rows", Value::Array(rows))]))
        }
    }
}

fn bracket_side(w: &Witness, places: usize) -> Value {
    object([
        ("combo", Value::from(w.combo())),
        ("value", Value::from(w.value.to_string())),
        ("decimal", Value::from(w.value.to_decimal(places))),
    ])
}

fn hit(w: &Witness, places: usize) -> Value {
    object([
        ("combo", Value::from(w.combo())),
        ("u", Value::from(w.u)),
        ("value", Value::from(w.value.to_string())),
        ("decimal", Value::from(w.value.to_decimal(places))),
    ])
}

const FUNCEQ_THRESHOLD: f64 = 1e-10;
const FD_THRESHOLD: f64 = 1e-6;

fn check_grid(grid: usize) -> Result<(), CliError> {
    if !(2..=200).contains(&grid) {
        return Err(CliError::Usage(format!(
            "--grid must be in [2, 200], got {grid}"
        )));
    }
    Ok(())
}

pub fn funceq(cmd: &FunceqCommand, ctx: &Ctx) -> Result<Value, CliError> {
    let nums = ctx.numbers;
    match *cmd {
        FunceqCommand::Product { a, c, grid } => {
            check_grid(grid)?;
            let sol = ExpSolution::new(a, c).map_err(domain)?;
            let pts: Vec<f64> = (0..grid)
                .map(|i| -3.0 + 6.0 * i as f64 / (grid - 1) as f64)
                .collect();
            let (mut rel, mut abs) = (0.0f64, 0.0f64);
            for &t in &pts {
                for &x in &pts {
                    for &e in &pts {
                        let r = product_residual(&sol, t, x, e).map_err(domain)?;
                        rel = rel.max(r.relative.abs());
                        abs = abs.max(r.residual.abs());
                    }
                }
            }
            Ok(object([
                ("points", Value::from(grid * grid * grid)),
                ("max_relative_residual", nums.num(rel)),
                ("max_residual", nums.num(abs)),
                ("threshold", nums.num(FUNCEQ_THRESHOLD)),
                ("pass", Value::from(rel < FUNCEQ_THRESHOLD)),
            ]))
        }
        FunceqCommand::Variational { a, b, c, b1, grid } => {
            check_grid(grid)?;
            let sol = PotentialSolution::new(a, b, c).map_err(domain)?;
            let b1 = b1.unwrap_or(b / 2.0);
            // log-spaced points in [0.1, 10]
            let pts: Vec<f64> = (0..grid)
                .map(|i| 10f64.powf(-1.0 + 2.0 * i as f64 / (grid - 1) as f64))
                .collect();
            let (mut res, mut fd) = (0.0f64, 0.0f64);
            for &x in &pts {
                for &y in &pts {
                    let chk = variational_residual(&sol, b1, x, y).map_err(domain)?;
                    res = res.max(chk.residual.abs());
                    fd = fd.max(chk.derivative_error);
                }
            }
            Ok(object([
                ("points", Value::from(grid * grid)),
                ("max_residual", nums.num(res)),
                ("max_derivative_error", nums.num(fd)),
                ("threshold", nums.num(FUNCEQ_THRESHOLD)),
                (
                    "pass",
                    Value::from(res < FUNCEQ_THRESHOLD && fd < FD_THRESHOLD),
                ),
            ]))
        }
        FunceqCommand::ThreeTerm { psi0, psi_b, m } => {
            let closed = three_term_closed_form(psi0, psi_b, m).map_err(domain)?;
            let exact_base = |x: f64| {
                BigRational::from_float(x)
                    .ok_or_else(|| CliError::Domain(format!("{x} is not finite")))
            };
            let exact =
                three_term_exact(&exact_base(psi0)?, &exact_base(psi_b)?, m).map_err(domain)?;
            Ok(object([
                ("m", Value::from(m)),
                ("value", nums.num(closed)),
                ("exact", Value::from(exact.to_decimal(ctx.places))),
            ]))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledInput {
    samples: Vec<f64>,
    table: Vec<Vec<f64>>,
}

fn outcome(o: &AxiomOutcome, nums: Numbers) -> Value {
    let witness = match &o.witness {
        Some(w) => object([
            ("x", nums.num(w.x)),
            ("y", nums.num(w.y)),
            ("z", nums.num(w.z)),
            ("lhs", nums.num(w.lhs)),
            ("rhs", nums.num(w.rhs)),
        ]),
        None => Value::Null,
    };
    object([("pass", Value::from(o.passed)), ("witness", witness)])
}

pub fn axioms(args: &AxiomArgs, ctx: &Ctx) -> Result<Value, CliError> {
    let has_input = args.input.is_some() || args.json.is_some();
    let (op, default_samples) = match args.op {
        OpName::Sampled => {
            if !has_input {
                return Err(CliError::Usage(
                    "--op sampled needs --input or --json with the table".into(),
                ));
            }
            let doc: SampledInput =
                parse(&read_source(args.input.as_deref(), args.json.as_deref())?)?;
            let s = doc.samples.clone();
            (
                OpTable::Sampled {
                    samples: doc.samples,
                    table: doc.table,
                },
                s,
            )
        }
        other => {
            if has_input {
                return Err(CliError::Usage(
                    "--input/--json only apply to --op sampled".into(),
                ));
            }
            let op = match other {
                OpName::Addition => OpTable::Addition,
                OpName::FloorLeft => OpTable::FloorLeft,
                OpName::FloorRight => OpTable::FloorRight,
                OpName::SumOfSquares => OpTable::SumOfSquares,
                OpName::Max => OpTable::Max,
                OpName::Sampled => unreachable!(),
            };
            (op, Vec::new())
        }
    };
    let samples = if args.samples.is_empty() {
        default_samples
    } else {
        args.samples.clone()
    };
    let r = axiom_check(&op, &samples).map_err(domain)?;
    Ok(object([
        ("axiom1a", outcome(&r.axiom1a, ctx.numbers)),
        ("axiom1b", outcome(&r.axiom1b, ctx.numbers)),
        ("axiom2", outcome(&r.axiom2, ctx.numbers)),
    ]))
}
