//! Exact scalars: rationals, two-level coefficients, primes and tail lattices.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Q = Ratio<i64>;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Parses `"3"`, `"-2/5"` or `"1.5"` style literals.
pub fn parse_q(text: &str) -> Result<Q, String> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| format!("bad numerator in {t:?}"))?;
        let d: i64 = d.trim().parse().map_err(|_| format!("bad denominator in {t:?}"))?;
        if d == 0 {
            return Err(format!("zero denominator in {t:?}"));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let ipv: i64 = if ip == "-" || ip.is_empty() { 0 } else { ip.parse().map_err(|_| format!("bad number {t:?}"))? };
        let scale = 10i64.checked_pow(fp.len() as u32).ok_or_else(|| format!("too many digits in {t:?}"))?;
        let fpv: i64 = fp.parse().map_err(|_| format!("bad number {t:?}"))?;
        let frac = Q::new(fpv, scale);
        return Ok(if neg { q(ipv) - frac } else { q(ipv) + frac });
    }
    t.parse::<i64>().map(q).map_err(|_| format!("bad number {t:?}"))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serde adapter: integers as JSON numbers, proper fractions as strings.
pub mod q_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        if x.is_integer() {
            s.serialize_i64(*x.numer())
        } else {
            s.serialize_str(&fmt_q(x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_json(&v).map_err(D::Error::custom)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Q, String> {
        match v {
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(q(i))
                } else {
                    parse_q(&n.to_string())
                }
            }
            serde_json::Value::String(s) => parse_q(s),
            other => Err(format!("expected a number, got {other}")),
        }
    }

    pub fn to_json(x: &Q) -> serde_json::Value {
        if x.is_integer() {
            serde_json::Value::from(*x.numer())
        } else {
            serde_json::Value::from(fmt_q(x))
        }
    }
}

/// A rib coordinate `s + d·δ`, where δ is a positive element lying above
/// every standard rib element and divisible by every integer.
///
/// Standard groups only use `d = 0`; pair presentations use `d != 0` for
/// the nonstandard part of an elementary extension of a rib.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Coef {
    pub s: Q,
    pub d: Q,
}

impl Coef {
    pub const fn zero() -> Coef {
        Coef { s: Ratio::new_raw(0, 1), d: Ratio::new_raw(0, 1) }
    }

    pub fn std(s: Q) -> Coef {
        Coef { s, d: Q::zero() }
    }

    pub fn int(n: i64) -> Coef {
        Coef::std(q(n))
    }

    pub fn new(s: Q, d: Q) -> Coef {
        Coef { s, d }
    }

    pub fn is_zero(&self) -> bool {
        self.s.is_zero() && self.d.is_zero()
    }

    pub fn is_standard(&self) -> bool {
        self.d.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.cmp(&Coef::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn scale(&self, n: i64) -> Coef {
        Coef { s: self.s * q(n), d: self.d * q(n) }
    }

    pub fn div_int(&self, m: i64) -> Coef {
        Coef { s: self.s / q(m), d: self.d / q(m) }
    }
}

impl Ord for Coef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d.cmp(&other.d).then(self.s.cmp(&other.s))
    }
}

impl PartialOrd for Coef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Coef {
    type Output = Coef;
    fn add(self, o: Coef) -> Coef {
        Coef { s: self.s + o.s, d: self.d + o.d }
    }
}

impl Sub for Coef {
    type Output = Coef;
    fn sub(self, o: Coef) -> Coef {
        Coef { s: self.s - o.s, d: self.d - o.d }
    }
}

impl Neg for Coef {
    type Output = Coef;
    fn neg(self) -> Coef {
        Coef { s: -self.s, d: -self.d }
    }
}

impl Mul<i64> for Coef {
    type Output = Coef;
    fn mul(self, n: i64) -> Coef {
        self.scale(n)
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d.is_zero() {
            write!(f, "{}", fmt_q(&self.s))
        } else if self.s.is_zero() {
            write!(f, "{}d", fmt_q(&self.d))
        } else {
            write!(f, "{}{}{}d", fmt_q(&self.s), if self.d.is_negative() { "" } else { "+" }, fmt_q(&self.d))
        }
    }
}

impl Serialize for Coef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Coef::from_json(&v).map_err(D::Error::custom)
    }
}

impl Coef {
    pub fn to_json(&self) -> serde_json::Value {
        if self.d.is_zero() {
            q_serde::to_json(&self.s)
        } else {
            serde_json::json!({ "std": q_serde::to_json(&self.s), "inf": q_serde::to_json(&self.d) })
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Coef, String> {
        match v {
            serde_json::Value::Object(map) => {
                if let Some(k) = map.keys().find(|k| *k != "std" && *k != "inf") {
                    return Err(format!("unknown coefficient key {k:?}; expected \"std\" and \"inf\""));
                }
                let s = map.get("std").map(q_serde::from_json).transpose()?.unwrap_or_else(Q::zero);
                let d = map.get("inf").map(q_serde::from_json).transpose()?.unwrap_or_else(Q::zero);
                Ok(Coef { s, d })
            }
            other => Ok(Coef::std(q_serde::from_json(other)?)),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// `nth_prime(0) = 2`, `nth_prime(1) = 3`, ...
pub fn nth_prime(n: usize) -> u64 {
    let mut count = 0;
    let mut k = 1;
    loop {
        k += 1;
        if is_prime(k) {
            if count == n {
                return k;
            }
            count += 1;
        }
    }
}

/// Index of `p` in the prime sequence, if `p` is prime.
pub fn prime_index(p: u64) -> Option<usize> {
    if !is_prime(p) {
        return None;
    }
    Some((2..p).filter(|&k| is_prime(k)).count())
}

pub fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 2;
    while k * k <= m {
        if m.is_multiple_of(k) {
            out.push(k);
            while m.is_multiple_of(k) {
                m /= k;
            }
        }
        k += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Whether a rational has a denominator coprime to all of `primes`.
pub fn coprime_denominator(x: &Q, primes: &[u64]) -> bool {
    let den = x.denom().unsigned_abs();
    primes.iter().all(|p| !den.is_multiple_of(*p))
}

/// The subgroup of `Q x Q` generated by finitely many coefficients, kept in
/// echelon form over a common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailLattice {
    scale: i64,
    rows: Vec<[i64; 2]>,
}

impl TailLattice {
    pub fn new(gens: &[Coef]) -> TailLattice {
        let mut scale: i64 = 1;
        for g in gens {
            scale = scale.lcm(g.s.denom()).lcm(g.d.denom());
        }
        let vecs: Vec<[i64; 2]> = gens
            .iter()
            .map(|g| [(g.d * q(scale)).to_integer(), (g.s * q(scale)).to_integer()])
            .collect();
        TailLattice { scale, rows: echelon(vecs) }
    }

    pub fn is_trivial(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, c: &Coef) -> bool {
        let d = c.d * q(self.scale);
        let s = c.s * q(self.scale);
        if !d.is_integer() || !s.is_integer() {
            return false;
        }
        let mut v = [d.to_integer(), s.to_integer()];
        for row in &self.rows {
            let col = if row[0] != 0 { 0 } else { 1 };
            if v[col] % row[col] != 0 {
                return false;
            }
            let t = v[col] / row[col];
            v[0] -= t * row[0];
            v[1] -= t * row[1];
        }
        v == [0, 0]
    }

    /// Integer coordinates of `c` over the original generators are not kept;
    /// this returns a small combination `sum c_i g_i` equal to `c` by search.
    pub fn combination(&self, gens: &[Coef], c: &Coef, bound: i64) -> Option<Vec<i64>> {
        if !self.contains(c) {
            return None;
        }
        let k = gens.len();
        let mut coeffs = vec![-bound; k];
        loop {
            let mut sum = Coef::zero();
            for (g, &n) in gens.iter().zip(&coeffs) {
                sum = sum + g.scale(n);
            }
            if sum == *c {
                return Some(coeffs);
            }
            let mut i = 0;
            loop {
                if i == k {
                    return None;
                }
                coeffs[i] += 1;
                if coeffs[i] <= bound {
                    break;
                }
                coeffs[i] = -bound;
                i += 1;
            }
        }
    }
}

fn echelon(mut vecs: Vec<[i64; 2]>) -> Vec<[i64; 2]> {
    let mut rows = Vec::new();
    for col in 0..2 {
        let mut pivot: Option<[i64; 2]> = None;
        let mut rest = Vec::new();
        for v in vecs.drain(..) {
            if v[col] == 0 {
                if v != [0, 0] {
                    rest.push(v);
                }
                continue;
            }
            pivot = Some(match pivot {
                None => v,
                Some(p) => {
                    let (g, x, y) = ext_gcd(p[col], v[col]);
                    let combined = [x * p[0] + y * v[0], x * p[1] + y * v[1]];
                    let a = p[col] / g;
                    let b = v[col] / g;
                    let reduced = [b * p[0] - a * v[0], b * p[1] - a * v[1]];
                    if reduced != [0, 0] {
                        rest.push(reduced);
                    }
                    combined
                }
            });
        }
        if let Some(mut p) = pivot {
            if p[col] < 0 {
                p = [-p[0], -p[1]];
            }
            rows.push(p);
        }
        vecs = rest;
    }
    rows
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        assert_eq!(parse_q("3").unwrap(), q(3));
        assert_eq!(parse_q("-2/4").unwrap(), qr(-1, 2));
        assert_eq!(parse_q("1.25").unwrap(), qr(5, 4));
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn coef_order_is_lexicographic_in_the_infinite_part() {
        let big = Coef::new(q(-100), q(1));
        assert!(big > Coef::int(1_000_000));
        assert!(Coef::new(q(5), q(-1)) < Coef::zero());
        assert_eq!(Coef::new(q(1), q(1)).to_string(), "1+1d");
    }

    #[test]
    fn primes() {
        assert_eq!(nth_prime(0), 2);
        assert_eq!(nth_prime(4), 11);
        assert_eq!(prime_index(7), Some(3));
        assert_eq!(prime_factors(60), vec![2, 3, 5]);
    }

    #[test]
    fn lattice_membership() {
        let l = TailLattice::new(&[Coef::int(2)]);
        assert!(l.contains(&Coef::int(4)));
        assert!(!l.contains(&Coef::int(1)));
        let l2 = TailLattice::new(&[Coef::int(4), Coef::int(6)]);
        assert!(l2.contains(&Coef::int(2)));
        assert!(!l2.contains(&Coef::int(3)));
        let l3 = TailLattice::new(&[Coef::new(q(1), q(1))]);
        assert!(l3.contains(&Coef::new(q(3), q(3))));
        assert!(!l3.contains(&Coef::new(q(1), q(0))));
        let l4 = TailLattice::new(&[Coef::new(q(1), q(1)), Coef::int(2)]);
        assert!(l4.contains(&Coef::new(q(3), q(1))));
        assert!(!l4.contains(&Coef::new(q(2), q(1))));
        assert_eq!(l4.combination(&[Coef::new(q(1), q(1)), Coef::int(2)], &Coef::new(q(3), q(1)), 4), Some(vec![1, 1]));
    }
}

/// Serde adapter for lists of rationals.
pub mod q_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<serde_json::Value> = xs.iter().map(q_serde::to_json).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter().map(|x| q_serde::from_json(x).map_err(D::Error::custom)).collect()
    }
}
