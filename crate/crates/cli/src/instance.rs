//! Instance files: the quadratic unit, precision and search budgets.

use std::path::Path;

use qmod::ideal::SlackPolicy;
use qmod::{Elem, Field, Poly, QuadDesc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const MIN_PREC: i64 = 8;
pub const MAX_PREC: i64 = 512;
pub const MAX_N: usize = 64;

/// A constant given as a JSON integer or a field-element string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

impl Scalar {
    fn parse(&self, field: &Field) -> CliResult<Elem> {
        Ok(match self {
            Scalar::Int(n) => field.parse_elem(&n.to_string())?,
            Scalar::Text(s) => field.parse_elem(s)?,
        })
    }
}

/// `f = f0^k` where `f0^2 = a f0 + b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Power {
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    #[serde(default)]
    pub name: Option<String>,
    pub q: u32,
    /// Ascending coefficients of a monic irreducible over F_p, for q = p^e.
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub a: String,
    pub b: Scalar,
    #[serde(default)]
    pub power: Option<Power>,
    #[serde(default)]
    pub precision: Option<i64>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub bound: Option<i64>,
    #[serde(default)]
    pub slack_window: Option<usize>,
    #[serde(default)]
    pub slack_cap: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A parsed instance with its quadratic data resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub inst: Instance,
    pub field: Field,
    pub desc: QuadDesc,
}

fn field_of(q: u32, modulus: &Option<Vec<u32>>) -> CliResult<Field> {
    match modulus {
        None => Ok(Field::prime(q)?),
        Some(m) => {
            let e = m.len().saturating_sub(1) as u32;
            let p = (2..=q).find(|p| q % p == 0).unwrap_or(q);
            if e == 0 || p.checked_pow(e) != Some(q) {
                return Err(CliError::Instance(format!("modulus of degree {e} does not give q = {q}")));
            }
            Ok(Field::extension(p, m)?)
        }
    }
}

/// `(a_k, b_k)` with `(f^k)^2 = a_k f^k + b_k`: the trace satisfies the
/// same recurrence as `Q_n` and the norm of `f` is `-b`.
fn power_data(field: &Field, a: &Poly, b: Elem, k: u32) -> (Poly, Elem) {
    let mut prev = Poly::constant(field, field.from_int(2));
    let mut cur = a.clone();
    for _ in 1..k {
        let next = &(a * &cur) + &prev.scale(b);
        prev = cur;
        cur = next;
    }
    let trace = if k == 0 { prev } else { cur };
    let norm_k = field.pow(field.neg(b), k as u64);
    (trace, field.neg(norm_k))
}

impl Instance {
    pub fn from_json(text: &str) -> CliResult<Instance> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> CliResult<Instance> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Instance(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn resolve(&self) -> CliResult<Resolved> {
        let field = field_of(self.q, &self.modulus)?;
        let a = Poly::parse(&field, &self.a)?;
        let b = self.b.parse(&field)?;
        let (a, b) = match &self.power {
            None => (a, b),
            Some(Power { k }) if *k >= 1 => power_data(&field, &a, b, *k),
            Some(_) => return Err(CliError::Instance("power k must be at least 1".into())),
        };
        let desc = QuadDesc::new(a, b)?;
        let r = Resolved { inst: self.clone(), field, desc };
        let p = r.precision();
        if !(MIN_PREC..=MAX_PREC).contains(&p) {
            return Err(CliError::Instance(format!("precision {p} outside [{MIN_PREC}, {MAX_PREC}]")));
        }
        if !(3..=MAX_N).contains(&r.n_max()) {
            return Err(CliError::Instance(format!("n_max {} outside [3, {MAX_N}]", r.n_max())));
        }
        Ok(r)
    }
}

impl Resolved {
    /// 16 coefficients for q = 2, 24 otherwise, unless overridden.
    pub fn precision(&self) -> i64 {
        self.inst.precision.unwrap_or(if self.field.q() == 2 { 16 } else { 24 })
    }

    pub fn n_max(&self) -> usize {
        self.inst.n_max.unwrap_or(10)
    }

    pub fn seed(&self) -> u64 {
        self.inst.seed.unwrap_or(0)
    }

    pub fn policy(&self) -> SlackPolicy {
        let d = SlackPolicy::default();
        SlackPolicy { window: self.inst.slack_window.or(d.window), cap: self.inst.slack_cap.unwrap_or(d.cap) }
    }

    pub fn d(&self) -> usize {
        self.desc.d()
    }

    /// Inputs that determine every result, independent of file layout.
    pub fn canonical(&self) -> Value {
        json!({
            "q": self.field.q(),
            "modulus": self.inst.modulus,
            "a": self.desc.a().to_string(),
            "b": self.field.format_elem(self.desc.b()),
            "n_max": self.n_max(),
            "bound": self.inst.bound,
            "slack_window": self.inst.slack_window,
            "slack_cap": self.policy().cap,
        })
    }

    pub fn with_precision(&self, p: i64) -> Resolved {
        let mut r = self.clone();
        r.inst.precision = Some(p);
        r
    }
}
