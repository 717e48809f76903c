//! Subcommands: each builds a JSON payload from a resolved instance.

use qmod::drinfeld::{drinfeld_from_exp, exp_from_ideal, functional_eq_residual, perturbed};
use qmod::epsilon::{epsilon_lattice, epsilon_lattice_bruteforce, epsilon_lattice_kernel};
use qmod::ideal::IdealGens;
use qmod::lattice::FilteredBasis;
use qmod::modinv::{self, ideal_js, multiset_agree, quantum_j, quantum_product, recognize_algebraic};
use qmod::order::OrderDesc;
use qmod::zeta::{lattice_sufficient, zeta_lattice};
use qmod::{Poly, QuadDesc, QuadElem};
use serde_json::{json, Value};

use crate::cache::{Cache, CacheStatus, Computed, ResultRecord, Truncate};
use crate::error::{CliError, CliResult};
use crate::instance::Resolved;
use crate::json;
use crate::suite::{self, Fault};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealSpec {
    Unit,
    A(usize),
}

impl IdealSpec {
    pub fn parse(s: &str) -> CliResult<IdealSpec> {
        let t = s.trim();
        if t == "unit" {
            return Ok(IdealSpec::Unit);
        }
        let digits = t.strip_prefix('a').unwrap_or(t);
        digits.parse().map(IdealSpec::A).map_err(|_| CliError::Instance(format!("ideal must be `unit` or an index, got {t:?}")))
    }

    pub fn build(self, order: &OrderDesc) -> CliResult<IdealGens> {
        Ok(match self {
            IdealSpec::Unit => IdealGens::unit(order),
            IdealSpec::A(i) => IdealGens::a_i(order, i)?,
        })
    }

    pub fn label(self) -> String {
        match self {
            IdealSpec::Unit => "unit".into(),
            IdealSpec::A(i) => format!("a{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeSpec {
    Ideal(IdealSpec),
    Epsilon { n: usize, l: usize },
}

impl LatticeSpec {
    /// `unit`, `ideal:I` or `epsilon:N:L`.
    pub fn parse(s: &str) -> CliResult<LatticeSpec> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || CliError::Instance(format!("lattice must be `unit`, `ideal:I` or `epsilon:N:L`, got {s:?}"));
        match parts.as_slice() {
            ["unit"] => Ok(LatticeSpec::Ideal(IdealSpec::Unit)),
            ["ideal", i] => Ok(LatticeSpec::Ideal(IdealSpec::parse(i)?)),
            ["epsilon", n, l] => Ok(LatticeSpec::Epsilon { n: n.parse().map_err(|_| bad())?, l: l.parse().map_err(|_| bad())? }),
            _ => Err(bad()),
        }
    }

    pub fn label(self) -> String {
        match self {
            LatticeSpec::Ideal(i) => format!("ideal:{}", i.label()),
            LatticeSpec::Epsilon { n, l } => format!("epsilon:{n}:{l}"),
        }
    }
}

/// Parse `x + y*f` where `x` and `y` are polynomial literals; every
/// top-level term containing `f` contributes to `y`.
pub fn parse_elem(desc: &QuadDesc, s: &str) -> CliResult<QuadElem> {
    let field = desc.field();
    let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut terms: Vec<String> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in src.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && !cur.is_empty() => terms.push(std::mem::take(&mut cur)),
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        terms.push(cur);
    }
    let (mut x, mut y) = (Poly::zero(field), Poly::zero(field));
    for t in terms {
        let (sign, body) = match t.strip_prefix('-') {
            Some(b) => (true, b.to_string()),
            None => (false, t.strip_prefix('+').unwrap_or(&t).to_string()),
        };
        let (is_f, coeff) = if body == "f" {
            (true, "1".to_string())
        } else if let Some(c) = body.strip_suffix("*f") {
            (true, c.to_string())
        } else if body.contains('f') {
            return Err(CliError::Instance(format!("cannot read term {body:?}: write c*f")));
        } else {
            (false, body)
        };
        let inner = coeff.strip_prefix('(').and_then(|c| c.strip_suffix(')')).unwrap_or(&coeff);
        let mut p = Poly::parse(field, inner)?;
        if sign {
            p = -&p;
        }
        if is_f {
            y = &y + &p;
        } else {
            x = &x + &p;
        }
    }
    Ok(desc.from_polys(x, y))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    QuantumJ,
    IdealJ { ideal: IdealSpec },
    Zeta { weight: u64, lattice: LatticeSpec },
    Lattice { n: usize, l: usize, bound: Option<i64>, check: bool },
    Drinfeld { ideal: IdealSpec, gen: String, z_bound: Option<u64> },
    Product,
    Recognize { height: usize },
    Verify { suite: String, fault: Option<Fault> },
}

impl Command {
    pub fn op(&self) -> &'static str {
        match self {
            Command::QuantumJ => "quantum-j",
            Command::IdealJ { .. } => "ideal-j",
            Command::Zeta { .. } => "zeta",
            Command::Lattice { .. } => "lattice",
            Command::Drinfeld { .. } => "drinfeld",
            Command::Product => "product",
            Command::Recognize { .. } => "recognize",
            Command::Verify { .. } => "verify",
        }
    }

    fn args(&self) -> Value {
        match self {
            Command::QuantumJ | Command::Product => json!({}),
            Command::IdealJ { ideal } => json!({ "ideal": ideal.label() }),
            Command::Zeta { weight, lattice } => json!({ "weight": weight, "lattice": lattice.label() }),
            Command::Lattice { n, l, bound, check } => json!({ "n": n, "l": l, "bound": bound, "check": check }),
            Command::Drinfeld { ideal, gen, z_bound } => json!({ "ideal": ideal.label(), "gen": gen, "z_bound": z_bound }),
            Command::Recognize { height } => json!({ "height": height }),
            Command::Verify { suite, fault } => json!({ "suite": suite, "inject": fault.map(|f| f.label()) }),
        }
    }

    fn truncation(&self) -> Option<Truncate> {
        match self {
            Command::IdealJ { .. } | Command::Zeta { .. } => Some(truncate_series_fields),
            _ => None,
        }
    }
}

/// Truncate every `{val, prec, coeffs}` object to `p` coefficients.
fn truncate_series_fields(v: &Value, p: i64) -> CliResult<Value> {
    Ok(match v {
        Value::Object(m) if m.contains_key("coeffs") && m.contains_key("val") => {
            let val = m["val"].as_i64().unwrap_or(0);
            let prec = m["prec"].as_i64().unwrap_or(0);
            let mut coeffs = m["coeffs"].as_array().cloned().unwrap_or_default();
            if coeffs.is_empty() {
                v.clone()
            } else {
                let new_prec = prec.min(val + p);
                coeffs.truncate((new_prec - val).max(0) as usize);
                while coeffs.last().is_some_and(|c| c == &json!(0) || c == &json!("0")) {
                    coeffs.pop();
                }
                json!({ "val": val, "prec": new_prec, "coeffs": coeffs })
            }
        }
        Value::Object(m) => {
            let mut out = serde_json::Map::new();
            for (k, x) in m {
                out.insert(k.clone(), truncate_series_fields(x, p)?);
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(|x| truncate_series_fields(x, p)).collect::<CliResult<_>>()?),
        _ => v.clone(),
    })
}

pub struct Outcome {
    pub record: ResultRecord,
    pub status: CacheStatus,
    pub exit_code: i32,
}

impl Outcome {
    /// The standard-output document: no timing, so it is reproducible.
    pub fn document(&self) -> Value {
        json!({
            "op": self.record.op,
            "inputs": self.record.inputs,
            "precision": self.record.precision,
            "version": self.record.version,
            "result": self.record.payload,
        })
    }
}

/// `passed: false` is a verification failure, `complete: false` a
/// non-convergence.
fn exit_for(payload: &Value) -> i32 {
    if payload.get("passed") == Some(&json!(false)) {
        1
    } else if payload.get("complete") == Some(&json!(false)) {
        2
    } else {
        0
    }
}

pub fn run(cmd: &Command, r: &Resolved, cache: &Cache) -> CliResult<Outcome> {
    let inputs = json!({ "instance": r.canonical(), "args": cmd.args() });
    let p = r.precision();
    let compute = || compute(cmd, r);
    let (record, status) = if matches!(cmd, Command::Verify { .. }) {
        let c = compute()?;
        let rec = ResultRecord {
            op: cmd.op().into(),
            inputs: inputs.clone(),
            precision: p,
            version: crate::cache::VERSION.into(),
            key: crate::cache::record_key(cmd.op(), &inputs),
            payload: c.payload,
            content_hash: String::new(),
            diagnostics: c.diagnostics,
            elapsed_ms: 0,
        };
        (rec, CacheStatus::Disabled)
    } else {
        cache.get_or_compute(cmd.op(), &inputs, p, cmd.truncation(), compute)?
    };
    let exit_code = exit_for(&record.payload);
    Ok(Outcome { record, status, exit_code })
}

fn compute(cmd: &Command, r: &Resolved) -> CliResult<Computed> {
    let p = r.precision();
    let order = OrderDesc::new(r.desc.clone());
    let none = || json!({});
    Ok(match cmd {
        Command::QuantumJ => Computed { payload: quantum_j_payload(r)?, diagnostics: none() },
        Command::IdealJ { ideal } => {
            let ig = ideal.build(&order)?;
            let inv = modinv::j_of_ideal(&ig, p, r.policy())?;
            let gens: Vec<Value> = ig.gens().iter().map(json::elem).collect();
            Computed {
                payload: json!({
                    "ideal": ideal.label(),
                    "generators": gens,
                    "J": json::series(&inv.big_j),
                    "j": json::series(&inv.j),
                }),
                diagnostics: json!({
                    "working_precision": inv.working_prec,
                    "lattice_bound": inv.lattice_bound,
                    "zeta": [zeta_diag(&inv.zeta1), zeta_diag(&inv.zeta2)],
                }),
            }
        }
        Command::Zeta { weight, lattice } => {
            let q = r.field.q() as u64;
            if *weight == 0 || weight % (q - 1) != 0 {
                return Err(CliError::Instance(format!("weight must be a positive multiple of q - 1 = {}", q - 1)));
            }
            let fb = lattice_for(r, &order, *lattice, *weight, p)?;
            let z = zeta_lattice(&fb, *weight, p)?;
            Computed {
                payload: json!({
                    "weight": weight,
                    "lattice": lattice.label(),
                    "value": json::series(&z.value.truncate_rel(p)),
                }),
                diagnostics: zeta_diag(&z),
            }
        }
        Command::Lattice { n, l, bound, check } => {
            let eps = n * r.d() + l;
            let b = bound.or(r.inst.bound).unwrap_or(eps as i64 + 6);
            let e = epsilon_lattice(&r.desc, *n, *l, b)?;
            let mut payload = json!({ "n": n, "l": l, "eps_exp": eps, "basis": json::basis(&e.basis) });
            if *check {
                let bu = b.max(0) as usize;
                let (oracle, other) = match epsilon_lattice_bruteforce(&r.desc, eps, bu) {
                    Ok(fb) => ("enumeration", fb),
                    Err(_) => ("kernel", epsilon_lattice_kernel(&r.desc, eps, bu)?),
                };
                payload["check"] = json!({ "oracle": oracle, "agrees": other == e.basis });
                payload["passed"] = json!(other == e.basis);
            }
            Computed { payload, diagnostics: none() }
        }
        Command::Drinfeld { ideal, gen, z_bound } => {
            let ig = ideal.build(&order)?;
            let g = parse_elem(&r.desc, gen)?;
            if !order.membership(&g).is_member() {
                return Err(CliError::Instance(format!("{gen} is not in A_f")));
            }
            let dg = g.deg_at_inf1()?;
            let q = r.field.q() as u64;
            let zb = z_bound.unwrap_or(q.pow(dg.max(1) as u32 + 2));
            let e = exp_from_ideal(&ig, p, zb, r.policy())?;
            let img = drinfeld_from_exp(&e, &g)?;
            let res = functional_eq_residual(&e, &img, suite::GUARD)?;
            let ctl = functional_eq_residual(&e, &perturbed(&img), suite::GUARD)?;
            let deg_ok = img.rho.degree() == Some(dg as usize);
            Computed {
                payload: json!({
                    "ideal": ideal.label(),
                    "gen": json::elem(&g),
                    "z_bound": zb,
                    "exp": e.coeffs.iter().map(|c| json::series(&c.truncate_rel(p))).collect::<Vec<_>>(),
                    "rho": img.rho.coeffs().iter().map(|c| json::series(&c.truncate_rel(p))).collect::<Vec<_>>(),
                    "deg_tau": img.rho.degree(),
                    "residual": { "exponent": res.exponent, "threshold": res.threshold, "pass": res.passes() },
                    "control": { "exponent": ctl.exponent, "threshold": ctl.threshold, "pass": ctl.passes() },
                    "passed": res.passes() && !ctl.passes() && deg_ok,
                }),
                diagnostics: json!({ "lattice_id": e.lattice_id, "working_precision": e.working_prec }),
            }
        }
        Command::Product => Computed { payload: product_payload(r)?.0, diagnostics: none() },
        Command::Recognize { height } => {
            let (_, prod) = product_payload(r)?;
            let cand = recognize_algebraic(&prod, &r.desc, *height)?;
            let candidate = cand.map(|c| {
                json!({
                    "x": c.x.to_string(),
                    "y": c.y.to_string(),
                    "status": format!("consistent to precision {}", c.consistent_to),
                })
            });
            let status = match &candidate {
                Some(_) => "candidate".to_string(),
                None => format!("refused: no solution of height <= {height} consistent to precision"),
            };
            Computed {
                payload: json!({ "series": json::series(&prod), "height": height, "candidate": candidate, "status": status }),
                diagnostics: none(),
            }
        }
        Command::Verify { suite, fault } => {
            Computed { payload: suite::run_suite(suite, r, *fault)?, diagnostics: none() }
        }
    })
}

fn zeta_diag(z: &qmod::zeta::ZetaValue) -> Value {
    json!({ "weight": z.n, "lattice_id": z.lattice_id, "degree_cutoff": z.degree_cutoff, "rel_prec": z.rel_prec })
}

fn lattice_for(r: &Resolved, order: &OrderDesc, spec: LatticeSpec, n: u64, p: i64) -> CliResult<FilteredBasis> {
    let d = r.d() as i64;
    let build = |b: i64| -> CliResult<FilteredBasis> {
        Ok(match spec {
            LatticeSpec::Ideal(i) => i.build(order)?.filtered_basis(b, r.policy())?,
            LatticeSpec::Epsilon { n, l } => epsilon_lattice(&r.desc, n, l, b)?.basis,
        })
    };
    let mut b = r.inst.bound.unwrap_or(match spec {
        LatticeSpec::Ideal(i) => i.build(order)?.max_gen_degree() + 2 * d,
        LatticeSpec::Epsilon { n, l } => (n as i64 + 2) * d + l as i64,
    });
    loop {
        let fb = build(b)?;
        if lattice_sufficient(&fb, n, p) || r.inst.bound.is_some() {
            return Ok(fb);
        }
        b += d + 2;
    }
}

pub fn quantum_j_payload(r: &Resolved) -> CliResult<Value> {
    let p = r.precision();
    let qj = quantum_j(&r.desc, p, r.n_max())?;
    let branches: Vec<Value> = qj
        .branches
        .iter()
        .map(|b| {
            json!({
                "l": b.l,
                "sequence": b.sequence.iter().map(|(n, s)| json!({ "n": n, "j": json::series(s) })).collect::<Vec<_>>(),
                "limit": b.limit.as_ref().map(json::series),
                "stabilized_at": b.stabilized_at,
                "confirmed": b.confirmed,
                "converged": b.converged(),
            })
        })
        .collect();
    let limit_set: Vec<Value> = qj
        .limit_set
        .iter()
        .map(|c| json!({ "value": json::series(&c.value), "branches": c.branches, "multiplicity": c.multiplicity() }))
        .collect();
    Ok(json!({
        "precision": p,
        "n_max": r.n_max(),
        "branches": branches,
        "limit_set": limit_set,
        "complete": qj.branches.iter().all(|b| b.converged()),
    }))
}

/// The product check and the branch product.
fn product_payload(r: &Resolved) -> CliResult<(Value, qmod::LaurentSeries)> {
    let p = r.precision();
    let qj = quantum_j(&r.desc, p, r.n_max())?;
    let js: Vec<_> = ideal_js(&r.desc, p, r.policy())?.into_iter().map(|x| x.j).collect();
    let pc = quantum_product(&qj, &js)?;
    let limits: Vec<_> = qj.branches.iter().filter_map(|b| b.limit.clone()).collect();
    let multiset = multiset_agree(&limits, &js, p);
    let passed = pc.agreement.is_equal() && multiset;
    Ok((
        json!({
            "branch_product": json::series(&pc.branch_product),
            "ideal_product": json::series(&pc.ideal_product),
            "agreement": json::comparison(&pc.agreement),
            "multiset_agree": multiset,
            "passed": passed,
        }),
        pc.branch_product,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;

    fn resolved(json: &str) -> Resolved {
        Instance::from_json(json).unwrap().resolve().unwrap()
    }

    #[test]
    fn element_literals() {
        let r = resolved(r#"{"q": 3, "a": "T^2", "b": 1}"#);
        let f = r.desc.f();
        assert_eq!(parse_elem(&r.desc, "f").unwrap(), f);
        let z = parse_elem(&r.desc, "T + 1 + (T^2 + 2)*f - T*f").unwrap();
        let want = r.desc.from_polys(Poly::parse(&r.field, "T + 1").unwrap(), Poly::parse(&r.field, "T^2 + 2*T + 2").unwrap());
        assert_eq!(z, want);
        assert!(parse_elem(&r.desc, "T*f*f").is_err());
    }

    #[test]
    fn specs() {
        assert_eq!(IdealSpec::parse("unit").unwrap(), IdealSpec::Unit);
        assert_eq!(IdealSpec::parse("a1").unwrap(), IdealSpec::A(1));
        assert_eq!(LatticeSpec::parse("epsilon:3:1").unwrap(), LatticeSpec::Epsilon { n: 3, l: 1 });
        assert!(LatticeSpec::parse("ideal").is_err());
    }

    #[test]
    fn truncation_matches_recomputation() {
        let r = resolved(r#"{"q": 2, "a": "T^2", "b": 1, "precision": 12}"#);
        let cmd = Command::IdealJ { ideal: IdealSpec::A(1) };
        let hi = compute(&cmd, &r).unwrap().payload;
        let lo = compute(&cmd, &r.with_precision(8)).unwrap().payload;
        assert_eq!(truncate_series_fields(&hi, 8).unwrap(), lo);
    }
}
