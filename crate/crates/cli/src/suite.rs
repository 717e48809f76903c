//! Verification suites: deterministic, seeded, one report per suite with
//! the first counterexample of every failing check.

use qmod::drinfeld::{drinfeld_from_exp, exp_from_ideal, functional_eq_residual, perturbed, star_action};
use qmod::epsilon::{epsilon_lattice, epsilon_lattice_bruteforce, epsilon_lattice_kernel};
use qmod::ideal::IdealGens;
use qmod::modinv::{agree, g_delta_j_eps, ideal_js, j_of_ideal, multiset_agree, quantum_j, quantum_product};
use qmod::order::OrderDesc;
use qmod::poly::monic_enumerate;
use qmod::skew::{carlitz, ExactSkew};
use qmod::zeta::zeta_lattice;
use qmod::{Comparison, Field, LaurentSeries, NearestNorm, Place, Poly, QuadDesc, QuadElem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::instance::Resolved;

/// Coefficients the Drinfeld residual may lose below the precision.
pub const GUARD: i64 = 4;

/// Every named suite, in the order `all` runs them.
pub const SUITES: &[&str] =
    &["epsilon-lattice", "approximation", "binet", "ideals", "invertibility", "j-eps", "quantum", "drinfeld", "skew", "determinism"];

/// Candidate budget of the enumeration oracle for ε-lattices.
pub const ENUMERATION_CAP: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// `Q_3` is replaced by `Q_3 + 1` before the checks that consume the
    /// sequence.
    PerturbedRecurrence,
}

impl Fault {
    pub fn parse(s: &str) -> CliResult<Fault> {
        match s {
            "perturbed-recurrence" => Ok(Fault::PerturbedRecurrence),
            _ => Err(CliError::Instance(format!("unknown fault {s:?}; known: perturbed-recurrence"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Fault::PerturbedRecurrence => "perturbed-recurrence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: Value, witness: Option<Value>) -> Check {
        Check { name: name.into(), pass, detail, witness }
    }
}

/// A failing computation is a failing check, not an aborted suite.
fn guarded(name: &str, f: impl FnOnce() -> CliResult<Check>) -> Check {
    f().unwrap_or_else(|e| Check::new(name, false, json!({}), Some(e.to_json())))
}

/// Record the first failure of a sweep.
#[derive(Default)]
struct Sweep {
    cases: usize,
    witness: Option<Value>,
}

impl Sweep {
    fn case(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn finish(self, name: &str, detail: Value) -> Check {
        let mut detail = detail;
        detail["cases"] = json!(self.cases);
        Check::new(name, self.witness.is_none(), detail, self.witness)
    }
}

pub fn report(suite: &str, checks: Vec<Check>) -> Value {
    let passed = checks.iter().all(|c| c.pass);
    json!({ "suite": suite, "passed": passed, "checks": checks })
}

pub fn run_suite(name: &str, r: &Resolved, fault: Option<Fault>) -> CliResult<Value> {
    if name == "all" {
        let reports: Vec<Value> = SUITES.iter().map(|s| run_suite(s, r, fault)).collect::<CliResult<_>>()?;
        let passed = reports.iter().all(|x| x["passed"] == json!(true));
        return Ok(json!({ "suite": "all", "passed": passed, "suites": reports }));
    }
    let order = OrderDesc::new(r.desc.clone());
    let checks = match name {
        "epsilon-lattice" => epsilon_checks(&r.desc, 4, ENUMERATION_CAP),
        "approximation" => vec![approximation_check(&r.desc, 8, fault)],
        "binet" => vec![binet_check(&r.desc, 12, fault)],
        "ideals" => ideal_checks(&order, r),
        "invertibility" => invertibility_checks(&order, r),
        "j-eps" => vec![j_eps_check(&r.desc, r.precision(), 3)],
        "quantum" => quantum_checks(r),
        "drinfeld" => drinfeld_checks(&order, r, 12),
        "skew" => skew_checks(&r.field, r.seed(), 4),
        "determinism" => determinism_checks(r),
        _ => return Err(CliError::Instance(format!("unknown suite {name:?}; known: all, {}", SUITES.join(", ")))),
    };
    let mut out = report(name, checks);
    if let Some(f) = fault {
        out["inject"] = json!(f.label());
    }
    Ok(out)
}

fn basis_rows(fb: &qmod::lattice::FilteredBasis) -> Vec<String> {
    fb.rows().iter().map(|r| format!("{} (deg {})", r.elem, r.degree)).collect()
}

/// Closed form against an independent oracle for every `N <= n_max` and
/// `l < d` at bound `N d + l + 6`: the kernel of the fractional-part map
/// at the full bound, and enumeration wherever `q^(bound + 1)` fits the cap.
pub fn epsilon_checks(desc: &QuadDesc, n_max: usize, cap: u64) -> Vec<Check> {
    let d = desc.d();
    let q = desc.q() as u64;
    let mut kernel = Sweep::default();
    let mut enumerated = Sweep::default();
    let mut errors = Vec::new();
    let mut full = 0;
    for n in 0..=n_max {
        for l in 0..d {
            let eps = n * d + l;
            let bound = eps + 6;
            let mut run = || -> CliResult<()> {
                let closed = epsilon_lattice(desc, n, l, bound as i64)?.basis;
                let other = epsilon_lattice_kernel(desc, eps, bound)?;
                kernel.case(closed == other, || json!({ "n": n, "l": l, "bound": bound, "closed": basis_rows(&closed), "oracle": basis_rows(&other) }));
                let mut be = bound;
                while be > 0 && q.checked_pow(be as u32 + 1).map_or(true, |c| c > cap) {
                    be -= 1;
                }
                full += usize::from(be == bound);
                let closed = epsilon_lattice(desc, n, l, be as i64)?.basis;
                let brute = epsilon_lattice_bruteforce(desc, eps, be)?;
                enumerated.case(closed == brute, || json!({ "n": n, "l": l, "bound": be, "closed": basis_rows(&closed), "oracle": basis_rows(&brute) }));
                Ok(())
            };
            if let Err(e) = run() {
                errors.push(json!({ "n": n, "l": l, "error": e.to_json() }));
            }
        }
    }
    let mut out = vec![
        kernel.finish("epsilon lattice: closed form equals kernel oracle", json!({ "n_max": n_max, "bound": "N d + l + 6" })),
        enumerated.finish("epsilon lattice: closed form equals enumeration", json!({ "n_max": n_max, "candidate_cap": cap, "at_full_bound": full })),
    ];
    if !errors.is_empty() {
        out.push(Check::new("epsilon lattice: computations complete", false, json!({}), Some(json!(errors))));
    }
    out
}

fn qseq(desc: &QuadDesc, n_max: usize, fault: Option<Fault>) -> Vec<Poly> {
    let mut e = desc.qseq(n_max).entries;
    if fault == Some(Fault::PerturbedRecurrence) && e.len() > 3 {
        e[3] = &e[3] + &Poly::one(desc.field());
    }
    e
}

/// `||Q_n ι₁(f)|| = q^(-(n+1) d)` for `n <= n_max`.
pub fn approximation_check(desc: &QuadDesc, n_max: usize, fault: Option<Fault>) -> Check {
    let name = "approximation: ||Q_n f|| = q^(-(n+1)d)";
    guarded(name, || {
        let d = desc.d() as i64;
        let mut sw = Sweep::default();
        for (n, qn) in qseq(desc, n_max, fault).iter().enumerate() {
            let want = (n as i64 + 1) * d;
            // ι₁(f) to absolute precision p gives Q_n ι₁(f) to p - n d
            let fs = desc.embed(Place::First, (want + n as i64 * d + 2).max(2 * d + 1))?;
            let s = &LaurentSeries::from_poly(qn, 1 << 40) * &fs;
            let got = s.nearest_poly_norm()?;
            sw.case(got == NearestNorm::Pow(want), || json!({ "n": n, "q_n": qn.to_string(), "expected_exponent": want, "observed": format!("{got:?}") }));
        }
        Ok(sw.finish(name, json!({ "n_max": n_max })))
    })
}

/// `f^(n+1) - f*^(n+1) = Q_n (f - f*)` exactly for `n <= n_max`.
pub fn binet_check(desc: &QuadDesc, n_max: usize, fault: Option<Fault>) -> Check {
    let name = "binet: f^(n+1) - f*^(n+1) = Q_n (f - f*)";
    guarded(name, || {
        let (f, fc) = (desc.f(), desc.f_conj());
        let diff = &f - &fc;
        let mut sw = Sweep::default();
        for (n, qn) in qseq(desc, n_max, fault).iter().enumerate() {
            let k = n as i64 + 1;
            let lhs = &f.pow(k)? - &fc.pow(k)?;
            let rhs = diff.mul_ratfn(&qmod::RatFn::from_poly(qn.clone()));
            sw.case(lhs == rhs, || json!({ "n": n, "lhs": lhs.to_string(), "rhs": rhs.to_string() }));
        }
        Ok(sw.finish(name, json!({ "n_max": n_max })))
    })
}

/// `𝔞_i 𝔞_(d-1) = 𝔞_(i-1)` for `1 <= i < d` and `𝔞_(d-1)^d = (f)`.
pub fn ideal_checks(order: &OrderDesc, r: &Resolved) -> Vec<Check> {
    let d = order.d();
    let policy = r.policy();
    let name = "ideals: a_i a_(d-1) = a_(i-1) and a_(d-1)^d = (f)";
    vec![guarded(name, || {
        let top = IdealGens::a_i(order, d - 1)?;
        let mut sw = Sweep::default();
        for i in 1..d {
            let lhs = IdealGens::a_i(order, i)?.product(&top);
            let eq = lhs.equal(&IdealGens::a_i(order, i - 1)?, policy)?;
            sw.case(eq.is_certified(), || json!({ "i": i, "outcome": format!("{eq:?}") }));
        }
        let eq = top.pow(d).equal(&IdealGens::principal(order, r.desc.f())?, policy)?;
        sw.case(eq.is_certified(), || json!({ "power": d, "outcome": format!("{eq:?}") }));
        Ok(sw.finish(name, json!({ "d": d, "certificate": "mutual containment" })))
    })]
}

/// `1 ∈ 𝔞_i 𝔞_i*` with a checked certificate, and two generators of every
/// `𝔞_i` whose ideal equals `𝔞_i`.
pub fn invertibility_checks(order: &OrderDesc, r: &Resolved) -> Vec<Check> {
    let d = order.d() as i64;
    let policy = r.policy();
    let mut inv = Sweep::default();
    let mut two = Sweep::default();
    let mut errors = Vec::new();
    for i in 0..order.d() {
        let run = |inv: &mut Sweep, two: &mut Sweep| -> CliResult<()> {
            let a = IdealGens::a_i(order, i)?;
            let mut bound = a.max_gen_degree() + 2 * d;
            let cert = loop {
                match a.invertibility_certificate(bound)? {
                    Some(c) => break Some(c),
                    None if bound < 8 * (d + 2) => bound += d + 2,
                    None => break None,
                }
            };
            let ok = cert.as_ref().is_some_and(|c| c.verify(&a.elements()));
            inv.case(ok, || json!({ "i": i, "bound": bound, "certificate": cert.is_some() }));
            let seed = r.desc.f();
            let (g1, g2) = a.two_generator(&seed, a.max_gen_degree() + 2 * d, policy)?;
            let eq = IdealGens::new(order, vec![g1.clone(), g2.clone()])?.equal(&a, policy)?;
            two.case(eq.is_certified(), || json!({ "i": i, "generators": [g1.to_string(), g2.to_string()] }));
            Ok(())
        };
        if let Err(e) = run(&mut inv, &mut two) {
            errors.push(json!({ "i": i, "error": e.to_json() }));
        }
    }
    let mut out = vec![
        inv.finish("invertibility: 1 in a_i a_i*", json!({ "d": d })),
        two.finish("invertibility: two generators", json!({ "d": d })),
    ];
    if !errors.is_empty() {
        out.push(Check::new("invertibility: computations complete", false, json!({}), Some(json!(errors))));
    }
    out
}

/// The two expressions for `j_ε` agree on every coefficient within the
/// reported precision, for `N <= n_max` and every `l`.
pub fn j_eps_check(desc: &QuadDesc, p: i64, n_max: usize) -> Check {
    let name = "j-eps: g^(q+1)/Delta = 1/(1/(T^q-T) - J)";
    guarded(name, || {
        let mut sw = Sweep::default();
        let mut rows = Vec::new();
        for n in 1..=n_max {
            for l in 0..desc.d() {
                let e = g_delta_j_eps(desc, n, l, p)?;
                let covered = match e.identity {
                    Comparison::Equal { prec } => prec - e.j.val(),
                    _ => 0,
                };
                rows.push(json!({ "n": n, "l": l, "coefficients": covered }));
                sw.case(e.identity.is_equal() && covered >= p, || {
                    json!({ "n": n, "l": l, "j": e.j.to_string(), "j_alt": e.j_alt.to_string(), "identity": crate::json::comparison(&e.identity) })
                });
            }
        }
        Ok(sw.finish(name, json!({ "precision": p, "computed": rows })))
    })
}

/// A random element of A_f of sign 1 and degree in `[1, 2d]`.
fn sample_sgn_one(order: &OrderDesc, rng: &mut ChaCha8Rng) -> QuadElem {
    let field = order.quad().field().clone();
    let d = order.d();
    let slots: Vec<usize> = (1..=2 * d).filter(|&k| order.slot_valid(k)).collect();
    let top = slots[rng.gen_range(0..slots.len())];
    let mut coords: Vec<u32> = (0..=top).map(|k| if k == 0 || order.slot_valid(k) { rng.gen_range(0..field.q()) } else { 0 }).collect();
    coords[top] = field.inv(order.slot_sgn(top)).expect("sign is a unit");
    order.elem(&coords)
}

pub fn quantum_checks(r: &Resolved) -> Vec<Check> {
    let p = r.precision();
    let d = r.d();
    let order = OrderDesc::new(r.desc.clone());
    let qj = match quantum_j(&r.desc, p, r.n_max()) {
        Ok(x) => x,
        Err(e) => return vec![Check::new("quantum: branches computed", false, json!({}), Some(CliError::from(e).to_json()))],
    };
    let js = match ideal_js(&r.desc, p, r.policy()) {
        Ok(x) => x.into_iter().map(|x| x.j).collect::<Vec<_>>(),
        Err(e) => return vec![Check::new("quantum: ideal values computed", false, json!({}), Some(CliError::from(e).to_json()))],
    };
    let mut out = Vec::new();
    let stab: Vec<Value> = qj
        .branches
        .iter()
        .map(|b| json!({ "l": b.l, "stabilized_at": b.stabilized_at, "confirmed": b.confirmed }))
        .collect();
    let first_bad = qj.branches.iter().find(|b| !b.converged()).map(|b| {
        json!({ "l": b.l, "last": b.sequence.iter().rev().take(2).map(|(n, s)| json!({ "n": n, "j": s.to_string() })).collect::<Vec<_>>() })
    });
    out.push(Check::new("quantum: every branch stabilizes", first_bad.is_none(), json!({ "precision": p, "n_max": r.n_max(), "branches": stab }), first_bad));
    out.push(Check::new(
        "quantum: at most d limit values",
        qj.limit_set.len() <= d,
        json!({ "d": d, "values": qj.limit_set.len() }),
        None,
    ));
    let limits: Vec<LaurentSeries> = qj.branches.iter().filter_map(|b| b.limit.clone()).collect();
    let same = multiset_agree(&limits, &js, p);
    out.push(Check::new(
        "quantum: limit multiset equals {j(a_i)}",
        same,
        json!({ "precision": p, "limits": limits.len(), "ideals": js.len() }),
        (!same).then(|| json!({ "limits": limits.iter().map(|s| s.to_string()).collect::<Vec<_>>(), "ideal_values": js.iter().map(|s| s.to_string()).collect::<Vec<_>>() })),
    ));
    out.push(guarded("quantum: product identity", || {
        let pc = quantum_product(&qj, &js)?;
        let ok = pc.agreement.is_equal();
        Ok(Check::new(
            "quantum: product identity",
            ok,
            json!({ "agreement": crate::json::comparison(&pc.agreement) }),
            (!ok).then(|| json!({ "branch_product": pc.branch_product.to_string(), "ideal_product": pc.ideal_product.to_string() })),
        ))
    }));
    out.push(guarded("quantum: class invariance j((alpha) a) = j(a)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(r.seed());
        let mut sw = Sweep::default();
        for (i, ji) in js.iter().enumerate() {
            let a = IdealGens::a_i(&order, i)?;
            let alpha = sample_sgn_one(&order, &mut rng);
            let beta = sample_sgn_one(&order, &mut rng);
            let gamma = sample_sgn_one(&order, &mut rng);
            let scaled = a.scale(&alpha)?;
            let frac = IdealGens::fractional(&order, a.gens().iter().map(|g| g * &beta).collect(), gamma.clone())?;
            for (label, ideal) in [(alpha.to_string(), scaled), (format!("({beta})/({gamma})"), frac)] {
                let j = j_of_ideal(&ideal, p, r.policy())?.j;
                sw.case(agree(&j, ji, p), || json!({ "i": i, "alpha": label, "j": j.to_string(), "j_a": ji.to_string() }));
            }
        }
        Ok(sw.finish("quantum: class invariance j((alpha) a) = j(a)", json!({ "seed": r.seed(), "precision": p })))
    }));
    out.push(guarded("quantum: j(a_i) differs from j((1)) for i >= 1", || {
        let unit = j_of_ideal(&IdealGens::unit(&order), p, r.policy())?.j;
        let mut sw = Sweep::default();
        for (i, ji) in js.iter().enumerate().skip(1) {
            sw.case(!agree(ji, &unit, p), || json!({ "i": i, "j": ji.to_string() }));
        }
        let principal = agree(&js[0], &unit, p);
        sw.case(principal, || json!({ "i": 0, "note": "(f) is principal, so j(a_0) must equal j((1))" }));
        Ok(sw.finish("quantum: j(a_i) differs from j((1)) for i >= 1", json!({ "precision": p })))
    }));
    let mut pairs = Sweep::default();
    for i in 0..js.len() {
        for k in i + 1..js.len() {
            pairs.case(!agree(&js[i], &js[k], p), || json!({ "i": i, "k": k, "j": js[i].to_string() }));
        }
    }
    out.push(pairs.finish("quantum: j(a_i) pairwise distinct (injectivity witness)", json!({ "precision": p })));
    out
}

/// Exponential support, `deg_τ ρ_f = d`, residual and its control for
/// `𝔞_0` and `𝔞_1` at precision `p`.
pub fn drinfeld_checks(order: &OrderDesc, r: &Resolved, p: i64) -> Vec<Check> {
    let d = order.d();
    let q = r.field.q() as u64;
    let z_bound = q.pow(d as u32 + 2);
    let f = r.desc.f();
    let mut support = Sweep::default();
    let mut degree = Sweep::default();
    let mut residual = Sweep::default();
    let mut control = Sweep::default();
    let mut errors = Vec::new();
    let mut rows = Vec::new();
    for i in 0..d.min(2) {
        let mut run = || -> CliResult<()> {
            let ideal = IdealGens::a_i(order, i)?;
            // vanishing of the non-q-power coefficients is checked inside
            let e = exp_from_ideal(&ideal, p, z_bound, r.policy());
            let ok = !matches!(e, Err(qmod::Error::Verification(_)));
            support.case(ok, || json!({ "i": i, "error": e.as_ref().err().map(|x| x.to_string()) }));
            let e = e?;
            let img = drinfeld_from_exp(&e, &f)?;
            degree.case(img.rho.degree() == Some(d), || json!({ "i": i, "deg_tau": img.rho.degree() }));
            let res = functional_eq_residual(&e, &img, GUARD)?;
            let ctl = functional_eq_residual(&e, &perturbed(&img), GUARD)?;
            residual.case(res.passes(), || json!({ "i": i, "exponent": res.exponent, "threshold": res.threshold }));
            control.case(!ctl.passes(), || json!({ "i": i, "exponent": ctl.exponent, "threshold": ctl.threshold }));
            rows.push(json!({ "i": i, "residual_exponent": res.exponent, "control_exponent": ctl.exponent, "threshold": res.threshold }));
            Ok(())
        };
        if let Err(e) = run() {
            errors.push(json!({ "i": i, "error": e.to_json() }));
        }
    }
    let base = json!({ "precision": p, "z_bound": z_bound });
    let mut out = vec![
        support.finish("drinfeld: exponential has q-power support", base.clone()),
        degree.finish("drinfeld: deg_tau rho_f = d", json!({ "d": d })),
        residual.finish("drinfeld: functional equation residual below q^-(P-4)", json!({ "precision": p, "ideals": rows })),
        control.finish("drinfeld: perturbed control exceeds threshold", base),
    ];
    if !errors.is_empty() {
        out.push(Check::new("drinfeld: computations complete", false, json!({}), Some(json!(errors))));
    }
    out
}

fn monics_upto(field: &Field, deg: usize) -> Vec<Poly> {
    (0..=deg).flat_map(|k| monic_enumerate(field, k).collect::<Vec<_>>()).collect()
}

/// Carlitz commutativity, torsion divisibility and triviality of the
/// ∗-action of principal ideals, over monic polynomials of degree `<= deg`.
pub fn skew_checks(field: &Field, seed: u64, deg: usize) -> Vec<Check> {
    let all = monics_upto(field, deg);
    let rho = |m: &Poly| -> CliResult<ExactSkew> { Ok(carlitz(m)?) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    out.push(guarded("skew: rho_m rho_m' = rho_m' rho_m = rho_(m m')", || {
        let mut sw = Sweep::default();
        let small: Vec<&Poly> = all.iter().filter(|m| m.deg() <= 2).collect();
        let mut pairs: Vec<(Poly, Poly)> = small.iter().flat_map(|a| small.iter().map(|b| ((*a).clone(), (*b).clone()))).collect();
        for _ in 0..64 {
            pairs.push((all[rng.gen_range(0..all.len())].clone(), all[rng.gen_range(0..all.len())].clone()));
        }
        for (m, n) in pairs {
            let (rm, rn) = (rho(&m)?, rho(&n)?);
            let (a, b) = (rm.mul(&rn), rn.mul(&rm));
            let c = rho(&(&m * &n))?;
            sw.case(a == b && a == c, || json!({ "m": m.to_string(), "m'": n.to_string() }));
        }
        Ok(sw.finish("skew: rho_m rho_m' = rho_m' rho_m = rho_(m m')", json!({ "max_degree": deg, "seed": seed })))
    }));
    out.push(guarded("skew: rho_m' right-divides rho_m iff m' | m", || {
        let mut sw = Sweep::default();
        let images: Vec<ExactSkew> = all.iter().map(rho).collect::<CliResult<_>>()?;
        for (m, rm) in all.iter().zip(&images) {
            for (n, rn) in all.iter().zip(&images) {
                let divides = m.rem(n)?.is_zero();
                let (_, rem) = rm.right_divmod(rn)?;
                sw.case(rem.is_zero() == divides, || json!({ "m": m.to_string(), "m'": n.to_string(), "divides": divides }));
            }
        }
        Ok(sw.finish("skew: rho_m' right-divides rho_m iff m' | m", json!({ "max_degree": deg, "pairs": "all" })))
    }));
    out.push(guarded("skew: principal ideals act trivially", || {
        let t = Poly::t(field);
        let gens = [rho(&t)?, rho(&(&t + &Poly::one(field)))?];
        let mut sw = Sweep::default();
        for m in all.iter().filter(|m| m.deg() >= 1) {
            let rm = rho(m)?;
            let sa = star_action(&gens, std::slice::from_ref(&rm), 1)?;
            sw.case(sa.rho_ideal == rm && sa.starred == gens, || json!({ "m": m.to_string(), "rho_ideal": format!("{:?}", sa.rho_ideal) }));
        }
        let one = star_action(&gens, &[ExactSkew::one(field)], 1)?;
        sw.case(one.rho_ideal == ExactSkew::one(field) && one.starred == gens, || json!({ "m": "1" }));
        Ok(sw.finish("skew: principal ideals act trivially", json!({ "max_degree": deg })))
    }));
    out
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Instance(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// `hi` reproduces every coefficient `lo` reports.
fn reproduces(lo: &LaurentSeries, hi: &LaurentSeries) -> bool {
    lo.compare_to(hi, lo.prec()).is_equal()
}

/// Byte-identical JSON across thread counts, and every series recomputed
/// at `P + 4` reproduces the coefficients reported at `P`.
pub fn determinism_checks(r: &Resolved) -> Vec<Check> {
    let p = r.precision();
    // more precision may need more N before a branch stabilizes
    let mut hi = r.with_precision(p + 4);
    hi.inst.n_max = Some((r.n_max() + 4).min(crate::instance::MAX_N));
    let mut out = Vec::new();
    out.push(guarded("determinism: 1 and 4 threads give identical JSON", || {
        let one = in_pool(1, || crate::commands::quantum_j_payload(r))??;
        let four = in_pool(4, || crate::commands::quantum_j_payload(r))??;
        let (a, b) = (serde_json::to_string(&one)?, serde_json::to_string(&four)?);
        let js1 = in_pool(1, || ideal_js(&r.desc, p, r.policy()))??;
        let js4 = in_pool(4, || ideal_js(&r.desc, p, r.policy()))??;
        let same_js = js1.iter().zip(&js4).all(|(x, y)| x.j == y.j && x.big_j == y.big_j);
        Ok(Check::new(
            "determinism: 1 and 4 threads give identical JSON",
            a == b && same_js,
            json!({ "bytes": a.len(), "ops": ["quantum-j", "ideal-j"] }),
            (a != b || !same_js).then(|| json!({ "quantum_j_identical": a == b, "ideal_j_identical": same_js })),
        ))
    }));
    out.push(guarded("determinism: rerun at P + 4 reproduces every coefficient", || {
        let mut sw = Sweep::default();
        let order = OrderDesc::new(r.desc.clone());
        let (lo_q, hi_q) = (quantum_j(&r.desc, p, r.n_max())?, quantum_j(&hi.desc, p + 4, hi.n_max())?);
        for (a, b) in lo_q.branches.iter().zip(&hi_q.branches) {
            for ((n, x), (_, y)) in a.sequence.iter().zip(&b.sequence) {
                sw.case(reproduces(x, y), || json!({ "op": "quantum-j", "l": a.l, "n": n, "p": x.to_string(), "p+4": y.to_string() }));
            }
            if let (Some(x), Some(y)) = (&a.limit, &b.limit) {
                sw.case(reproduces(x, y), || json!({ "op": "quantum-j limit", "l": a.l }));
            }
        }
        for i in 0..r.d() {
            let ideal = IdealGens::a_i(&order, i)?;
            let (x, y) = (j_of_ideal(&ideal, p, r.policy())?, j_of_ideal(&ideal, p + 4, r.policy())?);
            sw.case(reproduces(&x.j, &y.j), || json!({ "op": "ideal-j", "i": i, "p": x.j.to_string(), "p+4": y.j.to_string() }));
            let fb = ideal.filtered_basis(y.lattice_bound, r.policy())?;
            for w in [r.field.q() as u64 - 1, (r.field.q() as u64).pow(2) - 1] {
                let (zl, zh) = (zeta_lattice(&fb, w, p)?, zeta_lattice(&fb, w, p + 4)?);
                sw.case(reproduces(&zl.value, &zh.value), || json!({ "op": "zeta", "i": i, "weight": w }));
            }
        }
        for l in 0..r.d() {
            let (x, y) = (g_delta_j_eps(&r.desc, 2, l, p)?, g_delta_j_eps(&r.desc, 2, l, p + 4)?);
            for (name, a, b) in [("g", &x.g, &y.g), ("delta", &x.delta, &y.delta), ("j_eps", &x.j, &y.j)] {
                sw.case(reproduces(a, b), || json!({ "op": name, "n": 2, "l": l }));
            }
        }
        if r.d() <= 2 && r.field.q() <= 3 {
            let ideal = IdealGens::unit(&order);
            let zb = (r.field.q() as u64).pow(r.d() as u32 + 1);
            let (x, y) = (exp_from_ideal(&ideal, 12, zb, r.policy())?, exp_from_ideal(&ideal, 16, zb, r.policy())?);
            for (k, (a, b)) in x.coeffs.iter().zip(&y.coeffs).enumerate() {
                sw.case(reproduces(&a.truncate_rel(12), b), || json!({ "op": "exp", "k": k }));
            }
        }
        Ok(sw.finish("determinism: rerun at P + 4 reproduces every coefficient", json!({ "precision": p, "rerun_n_max": hi.n_max() })))
    }));
    out
}
