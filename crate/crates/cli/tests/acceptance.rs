//! Acceptance run: one line per criterion with its verdict, the evidence
//! and the runtime against its budget. Exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use qmod::modinv::{ideal_js, quantum_j, quantum_product, QuantumJResult};
use qmod::order::OrderDesc;
use qmod::LaurentSeries;
use qmod_cli::instance::{Instance, Resolved};
use qmod_cli::suite::{self, Check};

/// Enumeration budget per case: larger than the CLI default so most cases
/// are brute-forced at the full bound.
const ENUMERATION_CAP: u64 = 1 << 22;

fn resolved(json: &str) -> Resolved {
    Instance::from_json(json).expect("instance parses").resolve().expect("instance resolves")
}

fn shipped(name: &str) -> Resolved {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name);
    Instance::load(&path).expect("shipped instance").resolve().expect("instance resolves")
}

const SHIPPED: [&str; 4] = ["q2_d1.json", "q2_d2.json", "q3_d2.json", "q2_d3.json"];

/// The three instances the quantum criteria name.
const QUANTUM: [&str; 3] = ["q2_d2.json", "q3_d2.json", "q2_d3.json"];

/// `a = T^d` with `b = 1` over F_2 and `b = 2` over F_3.
fn family(q: u32, d: usize) -> Resolved {
    let b = if q == 2 { 1 } else { 2 };
    resolved(&format!(r#"{{"q": {q}, "a": "T^{d}", "b": {b}}}"#))
}

struct Outcome {
    pass: bool,
    evidence: String,
}

/// All checks pass; the evidence names the first failure or counts cases.
fn all_pass(label: &str, checks: Vec<Check>) -> Outcome {
    match checks.iter().find(|c| !c.pass) {
        None => {
            let cases: u64 = checks.iter().map(|c| c.detail["cases"].as_u64().unwrap_or(1)).sum();
            Outcome { pass: true, evidence: format!("{label}: {} checks, {cases} cases", checks.len()) }
        }
        Some(c) => Outcome { pass: false, evidence: format!("{label}: {} failed, witness {}", c.name, c.witness.clone().unwrap_or_default()) },
    }
}

fn merge(parts: Vec<Outcome>) -> Outcome {
    let pass = parts.iter().all(|o| o.pass);
    let evidence = match parts.iter().find(|o| !o.pass) {
        Some(o) => o.evidence.clone(),
        None => parts.iter().map(|o| o.evidence.as_str()).collect::<Vec<_>>().join("; "),
    };
    Outcome { pass, evidence }
}

fn only(checks: Vec<Check>, prefix: &str) -> Vec<Check> {
    checks.into_iter().filter(|c| c.name.starts_with(prefix)).collect()
}

fn c1() -> Outcome {
    let mut parts = Vec::new();
    for q in [2, 3] {
        for d in 1..=3 {
            let r = family(q, d);
            let checks = suite::epsilon_checks(&r.desc, 4, ENUMERATION_CAP);
            let full = checks.iter().find_map(|c| c.detail.get("at_full_bound").and_then(|v| v.as_u64())).unwrap_or(0);
            let mut o = all_pass(&format!("q={q} d={d}"), checks);
            o.evidence = format!("{} ({full} enumerated at the full bound)", o.evidence);
            parts.push(o);
        }
    }
    merge(parts)
}

fn c2() -> Outcome {
    merge(SHIPPED.iter().map(|n| all_pass(n, vec![suite::approximation_check(&shipped(n).desc, 8, None)])).collect())
}

fn c3() -> Outcome {
    let r = shipped("q2_d2.json");
    assert_eq!(r.field.p(), 2, "a characteristic-2 instance is included");
    merge(SHIPPED.iter().map(|n| all_pass(n, vec![suite::binet_check(&shipped(n).desc, 12, None)])).collect())
}

fn c4() -> Outcome {
    let mut parts = Vec::new();
    for q in [2, 3] {
        for d in 1..=4 {
            let r = family(q, d);
            parts.push(all_pass(&format!("q={q} d={d}"), suite::ideal_checks(&OrderDesc::new(r.desc.clone()), &r)));
        }
    }
    merge(parts)
}

fn c5() -> Outcome {
    let mut parts = Vec::new();
    for q in [2, 3] {
        for d in 1..=3 {
            let r = family(q, d);
            parts.push(all_pass(&format!("q={q} d={d}"), suite::invertibility_checks(&OrderDesc::new(r.desc.clone()), &r)));
        }
    }
    merge(parts)
}

fn c6() -> Outcome {
    merge(SHIPPED.iter().map(|n| {
        let r = shipped(n);
        all_pass(n, vec![suite::j_eps_check(&r.desc, r.precision(), r.n_max())])
    }).collect())
}

/// Minimum coefficients demanded by the quantum criteria.
fn quantum_floor(r: &Resolved) -> i64 {
    if r.field.q() == 2 { 12 } else { 20 }
}

fn quantum(prefixes: &[&str]) -> Outcome {
    merge(QUANTUM.iter().map(|n| {
        let r = shipped(n);
        if r.precision() < quantum_floor(&r) {
            return Outcome { pass: false, evidence: format!("{n}: precision {} below {}", r.precision(), quantum_floor(&r)) };
        }
        let checks = suite::quantum_checks(&r);
        let picked: Vec<Check> = prefixes.iter().flat_map(|p| only(checks.clone(), p)).collect();
        let mut o = all_pass(n, picked);
        o.evidence = format!("{} at P={}", o.evidence, r.precision());
        o
    }).collect())
}

fn c7() -> Outcome {
    quantum_values();
    quantum(&["quantum: every branch stabilizes", "quantum: at most d", "quantum: limit multiset"])
}

/// Branch results and `j(𝔞_i)` from criterion 7, reused by criterion 8.
static QUANTUM_VALUES: OnceLock<Vec<(&'static str, i64, QuantumJResult, Vec<LaurentSeries>)>> = OnceLock::new();

fn quantum_values() -> &'static [(&'static str, i64, QuantumJResult, Vec<LaurentSeries>)] {
    QUANTUM_VALUES.get_or_init(|| {
        QUANTUM
            .iter()
            .map(|&n| {
                let r = shipped(n);
                let qj = quantum_j(&r.desc, r.precision(), r.n_max()).expect("branches computed");
                let js = ideal_js(&r.desc, r.precision(), r.policy()).expect("ideal values computed");
                (n, r.precision(), qj, js.into_iter().map(|x| x.j).collect())
            })
            .collect()
    })
}

fn c8() -> Outcome {
    merge(quantum_values().iter().map(|(n, p, qj, js)| {
        match quantum_product(qj, js) {
            Ok(pc) if pc.agreement.is_equal() => Outcome { pass: true, evidence: format!("{n}: agree to {} coefficients", p) },
            Ok(pc) => Outcome { pass: false, evidence: format!("{n}: {:?}", pc.agreement) },
            Err(e) => Outcome { pass: false, evidence: format!("{n}: {e}") },
        }
    }).collect())
}

fn c9() -> Outcome {
    quantum(&["quantum: class invariance", "quantum: j(a_i) differs"])
}

fn c10() -> Outcome {
    let r = shipped("q2_d2.json");
    all_pass("q=2 d=2 P=12", suite::drinfeld_checks(&OrderDesc::new(r.desc.clone()), &r, 12))
}

fn c11() -> Outcome {
    merge([2, 3].iter().map(|&q| {
        let r = family(q, 1);
        all_pass(&format!("q={q}"), suite::skew_checks(&r.field, 0, 4))
    }).collect())
}

fn c12() -> Outcome {
    let mut parts: Vec<Outcome> = SHIPPED.iter().map(|n| all_pass(n, suite::determinism_checks(&shipped(n)))).collect();
    for n in SHIPPED {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(n);
        let run = |threads: &str| {
            Command::new(env!("CARGO_BIN_EXE_qmod"))
                .args(["--instance", path.to_str().unwrap(), "--no-cache", "--threads", threads, "quantum-j"])
                .output()
                .expect("binary runs")
                .stdout
        };
        let same = run("1") == run("4");
        parts.push(Outcome { pass: same, evidence: format!("{n}: cli output with 1 and 4 threads {}", if same { "identical" } else { "differs" }) });
    }
    merge(parts)
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 12] = [
        (1, "epsilon-lattice closed form vs oracles", 60, c1),
        (2, "||Q_n f|| = q^-(n+1)d", 5, c2),
        (3, "Binet identity", 5, c3),
        (4, "ideal power law", 120, c4),
        (5, "invertibility and two generators", 120, c5),
        (6, "j_eps two-formula identity", 60 * SHIPPED.len() as u64, c6),
        (7, "quantum set identity", 600 * QUANTUM.len() as u64, c7),
        (8, "product identity, given the values of criterion 7", 1, c8),
        (9, "class invariance and distinctness", 600 * QUANTUM.len() as u64, c9),
        (10, "Drinfeld pipeline", 120, c10),
        (11, "skew algebra", 60, c11),
        (12, "determinism and precision soundness", 600, c12),
    ];
    let mut failed = 0;
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_budget = took <= Duration::from_secs(budget);
        let pass = o.pass && in_budget;
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {} {title} ({:.2} s of {budget} s) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.evidence
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
