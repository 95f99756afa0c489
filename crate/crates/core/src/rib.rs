//! Regular archimedean groups used as ribs: divisibility profiles, exact
//! element arithmetic and the stable-embeddedness tests.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{coprime_denominator, prime_factors, Coef, Q};
use crate::verdict::{Outcome, Reason, Status, Verdict};

/// `|R/pR|` for one prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Index {
    One,
    P,
    Finite(u64),
    Inf,
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Index::One => s.serialize_str("1"),
            Index::P => s.serialize_str("p"),
            Index::Finite(n) => s.serialize_str(&n.to_string()),
            Index::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            _ => return Err(D::Error::custom("divisibility index must be \"1\", \"p\", \"inf\" or a number")),
        };
        match text.as_str() {
            "1" => Ok(Index::One),
            "p" => Ok(Index::P),
            "inf" => Ok(Index::Inf),
            t => t.parse::<u64>().map(Index::Finite).map_err(|_| D::Error::custom(format!("bad index {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Int,
    Rat,
    CoprimeTo(Vec<u64>),
}

impl Domain {
    pub fn contains(&self, x: &Q) -> bool {
        match self {
            Domain::Int => x.is_integer(),
            Domain::Rat => true,
            Domain::CoprimeTo(ps) => coprime_denominator(x, ps),
        }
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Domain::Int => s.serialize_str("int"),
            Domain::Rat => s.serialize_str("rat"),
            Domain::CoprimeTo(ps) => serde_json::json!({ "coprime_to": ps }).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v.as_str() {
            Some("int") => return Ok(Domain::Int),
            Some("rat") => return Ok(Domain::Rat),
            _ => {}
        }
        let ps = v
            .get("coprime_to")
            .and_then(|p| serde_json::from_value::<Vec<u64>>(p.clone()).ok())
            .ok_or_else(|| D::Error::custom("domain must be \"int\", \"rat\" or {\"coprime_to\":[...]}"))?;
        Ok(Domain::CoprimeTo(ps))
    }
}

/// A regular ordered abelian group of the catalogue.
///
/// With `ext` set the rib stands for an elementary extension `R ⊕ Qδ` with
/// one positive infinite, divisible element δ; coefficients with non-zero
/// `d` part live only there.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RibSpec {
    pub discrete: bool,
    #[serde(default)]
    pub div: BTreeMap<u64, Index>,
    #[serde(default)]
    pub cut_complete: bool,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ext: bool,
}

impl RibSpec {
    pub fn z() -> RibSpec {
        RibSpec { discrete: true, div: BTreeMap::new(), cut_complete: true, domain: Domain::Int, ext: false }
    }

    pub fn q() -> RibSpec {
        RibSpec { discrete: false, div: BTreeMap::new(), cut_complete: false, domain: Domain::Rat, ext: false }
    }

    /// Divisible with complete divisible hull; elements are exact rationals.
    pub fn r() -> RibSpec {
        RibSpec { cut_complete: true, ..RibSpec::q() }
    }

    /// Dense, not p-divisible, divisible by every other prime.
    pub fn z_loc(p: u64, cut_complete: bool) -> RibSpec {
        RibSpec {
            discrete: false,
            div: BTreeMap::from([(p, Index::P)]),
            cut_complete,
            domain: Domain::CoprimeTo(vec![p]),
            ext: false,
        }
    }

    pub fn extended(&self) -> RibSpec {
        RibSpec { ext: true, ..self.clone() }
    }

    pub fn standard(&self) -> RibSpec {
        RibSpec { ext: false, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.discrete && self.domain != Domain::Int {
            return Err("a discrete rib must have integer elements".into());
        }
        if self.discrete && self.div.values().any(|i| *i == Index::One) {
            return Err("a discrete rib is divisible by no prime".into());
        }
        for (p, i) in &self.div {
            if !crate::arith::is_prime(*p) {
                return Err(format!("{p} is not prime"));
            }
            let p_divisible = self.domain.contains(&(Q::one() / Q::from_integer(*p as i64)));
            if !self.discrete && matches!(i, Index::One | Index::P) && p_divisible != (*i == Index::One) {
                return Err(format!("element domain disagrees with the index at {p}"));
            }
        }
        if let Domain::CoprimeTo(ps) = &self.domain {
            for p in ps {
                if !self.discrete && self.index(*p) == Index::One {
                    return Err(format!("domain excludes 1/{p} but the profile lists {p} as divisible"));
                }
            }
        }
        Ok(())
    }

    /// `|R/pR|`; unlisted primes give 1 on dense ribs and p on discrete ones.
    pub fn index(&self, p: u64) -> Index {
        match self.div.get(&p) {
            Some(i) => *i,
            None if self.discrete => Index::P,
            None => Index::One,
        }
    }

    /// Primes at which a dense rib fails to be divisible.
    pub fn non_divisible_primes(&self) -> Vec<u64> {
        self.div.iter().filter(|(_, i)| **i != Index::One).map(|(p, _)| *p).collect()
    }

    /// Whether `R = mR`.
    pub fn m_divisible(&self, m: u64) -> bool {
        if m <= 1 {
            return true;
        }
        prime_factors(m).into_iter().all(|p| self.index(p) == Index::One)
    }

    pub fn contains(&self, a: &Coef) -> bool {
        self.domain.contains(&a.s) && (self.ext || a.d.is_zero())
    }

    pub fn add(&self, a: &Coef, b: &Coef) -> Coef {
        *a + *b
    }

    /// The witness `b` with `a = m b`, if it lies in the rib.
    pub fn divisible(&self, a: &Coef, m: u64) -> Option<Coef> {
        if m == 0 {
            return a.is_zero().then(Coef::zero);
        }
        let b = a.div_int(m as i64);
        self.contains(&b).then_some(b)
    }

    pub fn min_positive(&self) -> Option<Coef> {
        self.discrete.then(|| Coef::int(1))
    }

    pub fn is_z(&self) -> bool {
        self.discrete && self.domain == Domain::Int
    }

    /// The rib standing for the reals: dense, divisible, complete hull.
    pub fn is_real(&self) -> bool {
        !self.discrete && self.cut_complete && self.non_divisible_primes().is_empty()
    }

    pub fn label(&self) -> String {
        let base = if self.is_z() {
            "Z".to_string()
        } else if self.discrete {
            "Z-group".to_string()
        } else {
            let ps = self.non_divisible_primes();
            match (ps.is_empty(), self.cut_complete) {
                (true, true) => "R-proxy".to_string(),
                (true, false) => "Q".to_string(),
                (false, cc) => {
                    let list: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                    format!("Z_({}){}", list.join(","), if cc { "" } else { "-incomplete" })
                }
            }
        };
        if self.ext {
            format!("{base}*")
        } else {
            base
        }
    }

    pub fn stably_embedded(&self) -> Verdict {
        let label = self.label();
        if self.discrete {
            if self.is_z() && !self.ext {
                return Verdict::new(
                    Status::StablyEmbedded,
                    vec![Reason::new("rib.presburger", Outcome::Pass, format!("{label} is the integers"))],
                );
            }
            return Verdict::new(
                Status::NotStablyEmbedded,
                vec![Reason::new("rib.presburger", Outcome::Fail, format!("{label} is a discrete regular group other than the integers"))
                    .with_witness(serde_json::json!({ "rib": label, "cut": "the cut above the standard integers" }))],
            );
        }
        if self.cut_complete && !self.ext {
            return Verdict::new(
                Status::StablyEmbedded,
                vec![Reason::new("rib.complete-hull", Outcome::Pass, format!("{label} is archimedean with complete divisible hull"))],
            );
        }
        let why = if self.ext {
            "non-archimedean: the cut above the standard part has no definition"
        } else {
            "its divisible hull has irrational gaps"
        };
        Verdict::new(
            Status::NotStablyEmbedded,
            vec![Reason::new("rib.complete-hull", Outcome::Fail, format!("{label}: {why}"))
                .with_witness(serde_json::json!({ "rib": label, "cut": if self.ext { "standard part" } else { "an irrational cut" } }))],
        )
    }

    pub fn uniformly_stably_embedded(&self) -> bool {
        !self.ext && (self.is_z() || self.is_real())
    }
}

/// Elementary equivalence of two ribs.
pub fn rib_elem_equiv(a: &RibSpec, b: &RibSpec) -> bool {
    if a.discrete || b.discrete {
        return a.discrete && b.discrete;
    }
    let primes: std::collections::BTreeSet<u64> = a.div.keys().chain(b.div.keys()).copied().collect();
    primes.into_iter().all(|p| a.index(p) == b.index(p))
}

pub fn rib_add(r: &RibSpec, a: &Coef, b: &Coef) -> Coef {
    r.add(a, b)
}

pub fn rib_divisible(r: &RibSpec, a: &Coef, m: u64) -> Option<Coef> {
    r.divisible(a, m)
}

pub fn rib_min_positive(r: &RibSpec) -> Option<Coef> {
    r.min_positive()
}

impl fmt::Display for RibSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A few ribs used throughout the tests and the corpus.
pub fn catalogue() -> Vec<RibSpec> {
    vec![
        RibSpec::z(),
        RibSpec::q(),
        RibSpec::r(),
        RibSpec::z_loc(2, true),
        RibSpec::z_loc(3, true),
        RibSpec::z_loc(2, false),
        RibSpec::z_loc(5, true),
    ]
}
