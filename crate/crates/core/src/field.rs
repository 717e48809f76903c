//! The finite field F_q, q = p^e.
//!
//! Elements are encoded as integers `0..q` whose base-p digits are the
//! coordinates in the polynomial basis `1, X, ..., X^(e-1)` of
//! F_p[X]/(modulus). Multiplication goes through log/antilog tables built
//! from a fixed primitive element; the tables never leak into results.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An element of F_q in the polynomial-basis integer encoding.
pub type Elem = u32;

/// Largest supported field size.
pub const MAX_Q: u32 = 1 << 16;

struct Inner {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus over F_p, ascending, length e + 1. Empty for prime fields.
    modulus: Vec<u32>,
    /// `exp[k] = g^k` for k in 0..2(q-1).
    exp: Vec<Elem>,
    /// `log[x]` for x != 0.
    log: Vec<u32>,
    neg: Vec<Elem>,
}

/// Description of F_q. Cheap to clone; all clones share the tables.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.e == 1 {
            write!(f, "GF({})", self.0.p)
        } else {
            write!(f, "GF({}^{}) mod {:?}", self.0.p, self.0.e, self.0.modulus)
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.e == other.0.e && self.0.modulus == other.0.modulus)
    }
}

impl Eq for Field {}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Small dense polynomial helpers over F_p used only while building tables.
mod fp_poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn inv(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64;
        let mut k = p - 2;
        while k > 0 {
            if k & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            k >>= 1;
        }
        r as u32
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lc_inv = inv(m[dm], p);
        while r.len() > dm {
            let top = r.len() - 1;
            let c = (r[top] as u64 * lc_inv as u64 % p as u64) as u32;
            for (i, &mi) in m.iter().enumerate() {
                let idx = top - dm + i;
                r[idx] = ((r[idx] as u64 + (p - c) as u64 * mi as u64) % p as u64) as u32;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let out: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
        rem(&out, m, p)
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out: Vec<u32> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    /// `x^(p^k) mod m` by repeated p-th powering.
    pub fn frob_x(m: &[u32], p: u32, k: u32) -> Vec<u32> {
        let mut cur = rem(&[0, 1], m, p);
        for _ in 0..k {
            let mut acc = vec![1u32];
            let mut base = cur.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &base, m, p);
                }
                base = mulmod(&base, &base, m, p);
                e >>= 1;
            }
            cur = acc;
        }
        cur
    }

    /// Rabin's irreducibility test.
    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let e = (m.len() - 1) as u32;
        if e == 0 {
            return false;
        }
        if super::frob_ne_x(m, p, e) {
            return false;
        }
        for r in super::prime_factors(e) {
            let h = frob_x(m, p, e / r);
            let g = gcd(m, &sub(&h, &[0, 1], p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

fn frob_ne_x(m: &[u32], p: u32, e: u32) -> bool {
    let h = fp_poly::frob_x(m, p, e);
    let x = fp_poly::rem(&[0, 1], m, p);
    h != x
}

impl Field {
    /// The prime field F_p.
    pub fn prime(p: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if p > MAX_Q {
            return Err(Error::InvalidField(format!("q = {p} exceeds cap {MAX_Q}")));
        }
        Self::build(p, 1, Vec::new())
    }

    /// F_{p^e} = F_p[X]/(modulus); `modulus` is ascending and must be monic
    /// and irreducible of degree e >= 2.
    pub fn extension(p: u32, modulus: &[u32]) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        let mut m: Vec<u32> = modulus.iter().map(|&c| c % p).collect();
        fp_poly::trim(&mut m);
        if m.len() < 2 {
            return Err(Error::InvalidField("modulus must have degree >= 1".into()));
        }
        if m.len() == 2 {
            return Self::prime(p);
        }
        if *m.last().unwrap() != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        let e = (m.len() - 1) as u32;
        let q = (p as u64).pow(e);
        if q > MAX_Q as u64 {
            return Err(Error::InvalidField(format!("q = {q} exceeds cap {MAX_Q}")));
        }
        if !fp_poly::is_irreducible(&m, p) {
            return Err(Error::InvalidField("modulus is not irreducible over F_p".into()));
        }
        Self::build(p, e, m)
    }

    fn build(p: u32, e: u32, modulus: Vec<u32>) -> Result<Field> {
        let q = p.pow(e);
        let digits = |x: u32| -> Vec<u32> {
            let mut v = Vec::with_capacity(e as usize);
            let mut x = x;
            for _ in 0..e {
                v.push(x % p);
                x /= p;
            }
            fp_poly::trim(&mut v);
            v
        };
        let encode = |v: &[u32]| -> u32 { v.iter().rev().fold(0u32, |acc, &c| acc * p + c) };
        let slow_mul = |a: u32, b: u32| -> u32 {
            if e == 1 {
                ((a as u64 * b as u64) % p as u64) as u32
            } else {
                encode(&fp_poly::mulmod(&digits(a), &digits(b), &modulus, p))
            }
        };
        let slow_pow = |a: u32, mut k: u32| -> u32 {
            let mut r = 1u32;
            let mut b = a;
            while k > 0 {
                if k & 1 == 1 {
                    r = slow_mul(r, b);
                }
                b = slow_mul(b, b);
                k >>= 1;
            }
            r
        };
        let order = q - 1;
        let factors = prime_factors(order.max(1));
        // Prefer X itself (the declared generator of the modulus) when primitive.
        let mut candidates: Vec<u32> = Vec::new();
        if e > 1 {
            candidates.push(p);
        }
        candidates.extend(1..q);
        let gen = if q == 2 {
            1
        } else {
            candidates
                .into_iter()
                .find(|&g| g != 0 && factors.iter().all(|&r| slow_pow(g, order / r) != 1))
                .ok_or_else(|| Error::InvalidField("no primitive element found".into()))?
        };
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for k in 0..order {
            exp[k as usize] = x;
            log[x as usize] = k;
            x = slow_mul(x, gen);
        }
        for k in order..2 * order {
            exp[k as usize] = exp[(k - order) as usize];
        }
        let neg = (0..q)
            .map(|x| {
                let d = digits(x);
                let nd: Vec<u32> = d.iter().map(|&c| (p - c) % p).collect();
                encode(&nd)
            })
            .collect();
        Ok(Field(Arc::new(Inner { p, e, q, modulus, exp, log, neg })))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn e(&self) -> u32 {
        self.0.e
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.e == 1
    }

    /// The stored modulus (ascending coefficients), empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// The fixed primitive element `g` used for "g^j" literals.
    pub fn generator(&self) -> Elem {
        self.0.exp[if self.0.q == 2 { 0 } else { 1 }]
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let inner = &*self.0;
        if inner.p == 2 {
            a ^ b
        } else if inner.e == 1 {
            let s = a + b;
            if s >= inner.p {
                s - inner.p
            } else {
                s
            }
        } else {
            let p = inner.p;
            let (mut a, mut b) = (a, b);
            let mut out = 0;
            let mut place = 1;
            for _ in 0..inner.e {
                out += ((a % p + b % p) % p) * place;
                a /= p;
                b /= p;
                place *= p;
            }
            out
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let inner = &*self.0;
        inner.exp[(inner.log[a as usize] + inner.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a == 0 {
            return None;
        }
        let inner = &*self.0;
        let order = inner.q - 1;
        let l = inner.log[a as usize];
        Some(inner.exp[((order - l) % order) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        let bi = self.inv(b).ok_or(Error::DivisionByZero)?;
        Ok(self.mul(a, bi))
    }

    pub fn pow(&self, a: Elem, k: u64) -> Elem {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let inner = &*self.0;
        let order = (inner.q - 1) as u64;
        let l = inner.log[a as usize] as u64;
        inner.exp[((l * (k % order)) % order) as usize]
    }

    /// Image of an integer under Z -> F_p -> F_q.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.0.p as i64) as Elem
    }

    /// Discrete log base the generator, `None` for zero.
    pub fn log(&self, a: Elem) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.0.log[a as usize])
        }
    }

    /// `g^j` for the fixed generator.
    pub fn gen_pow(&self, j: u64) -> Elem {
        let order = (self.0.q - 1) as u64;
        self.0.exp[(j % order) as usize]
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.0.q
    }

    /// Text form: integers for prime fields, `g^j` (or `0`) otherwise.
    pub fn format_elem(&self, a: Elem) -> String {
        if self.is_prime_field() {
            a.to_string()
        } else {
            match self.log(a) {
                None => "0".to_string(),
                Some(j) => format!("g^{j}"),
            }
        }
    }

    /// Inverse of [`Field::format_elem`]. Prime fields also accept any
    /// integer (reduced mod p); extension fields accept `0`, `1` and `g^j`.
    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let t = s.trim();
        let bad = || Error::Parse { offset: 0, message: format!("bad field element {t:?}") };
        if let Some(rest) = t.strip_prefix("g^") {
            let j: u64 = rest.trim().parse().map_err(|_| bad())?;
            return Ok(self.gen_pow(j));
        }
        if t == "g" {
            return Ok(self.generator());
        }
        let n: i64 = t.parse().map_err(|_| bad())?;
        if self.is_prime_field() {
            Ok(self.from_int(n))
        } else if n == 0 || n == 1 {
            Ok(n as Elem)
        } else {
            Err(bad())
        }
    }
}
