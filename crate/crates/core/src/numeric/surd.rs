//! Exact arithmetic in multi-quadratic fields: finite sums `Σ c_r √r` with
//! rational `c_r` and distinct squarefree integers `r`.
//!
//! Square roots of distinct squarefree integers are linearly independent over
//! the rationals, so the canonical map representation makes equality exact.

use super::rational::{format_rational, rational_to_f64};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

const TRIAL_LIMIT: u64 = 1 << 20;

/// `n = root² · free` with `free` squarefree and factored into `primes`.
#[derive(Debug)]
struct SquareSplit {
    root: BigUint,
    free: BigUint,
    primes: Vec<BigUint>,
}

fn split_cache() -> &'static Mutex<HashMap<BigUint, Arc<SquareSplit>>> {
    static CACHE: OnceLock<Mutex<HashMap<BigUint, Arc<SquareSplit>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn split_square(n: &BigUint) -> Arc<SquareSplit> {
    if let Some(hit) = split_cache().lock().expect("surd cache poisoned").get(n) {
        return hit.clone();
    }
    let split = Arc::new(compute_split(n));
    split_cache()
        .lock()
        .expect("surd cache poisoned")
        .insert(n.clone(), split.clone());
    split
}

fn compute_split(n: &BigUint) -> SquareSplit {
    let mut root = BigUint::one();
    let mut free = BigUint::one();
    let mut primes = Vec::new();
    let mut m = n.clone();
    let mut p: u64 = 2;
    while p <= TRIAL_LIMIT {
        let p_big = BigUint::from(p);
        if &p_big * &p_big > m {
            break;
        }
        let mut e = 0u32;
        if let Some(small) = m.to_u64() {
            let mut s = small;
            while s % p == 0 {
                s /= p;
                e += 1;
            }
            m = BigUint::from(s);
        } else {
            while (&m % p).is_zero() {
                m /= p;
                e += 1;
            }
        }
        if e > 0 {
            root *= num_traits::pow(p_big.clone(), (e / 2) as usize);
            if e % 2 == 1 {
                free *= &p_big;
                primes.push(p_big);
            }
        }
        p = if p == 2 { 3 } else { p + 2 };
    }
    if m > BigUint::one() {
        // Every prime factor of m exceeds TRIAL_LIMIT. m is prime, a prime
        // square, or (only above 2^60) a product we treat as squarefree.
        let s = m.sqrt();
        if &s * &s == m {
            root *= s;
        } else {
            free *= &m;
            primes.push(m);
        }
    }
    SquareSplit { root, free, primes }
}

fn to_biguint(n: &BigInt) -> BigUint {
    n.magnitude().clone()
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    terms: BTreeMap<BigUint, BigRational>,
}

impl Surd {
    pub fn zero() -> Self {
        Surd::default()
    }

    pub fn one() -> Self {
        Surd::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(BigUint::one(), q);
        }
        Surd { terms }
    }

    /// `√q` for `q ≥ 0`.
    pub fn sqrt(q: &BigRational) -> Self {
        assert!(!q.is_negative(), "square root of a negative rational");
        if q.is_zero() {
            return Surd::zero();
        }
        let num = split_square(&to_biguint(q.numer()));
        let den = split_square(&to_biguint(q.denom()));
        let coeff = BigRational::new(
            BigInt::from_biguint(Sign::Plus, num.root.clone()),
            BigInt::from_biguint(Sign::Plus, &den.root * &den.free),
        );
        let radicand = &num.free * &den.free;
        let mut terms = BTreeMap::new();
        terms.insert(radicand, coeff);
        Surd { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a rational when no irrational part is present.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Surd::zero();
        }
        Surd {
            terms: self.terms.iter().map(|(r, c)| (r.clone(), c * q)).collect(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(r, c)| rational_to_f64(c) * r.to_f64().unwrap_or(f64::INFINITY).sqrt())
            .sum()
    }

    fn add_term(terms: &mut BTreeMap<BigUint, BigRational>, r: BigUint, c: BigRational) {
        use std::collections::btree_map::Entry;
        match terms.entry(r) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn conjugate(&self, p: &BigUint) -> Surd {
        Surd {
            terms: self
                .terms
                .iter()
                .map(|(r, c)| {
                    if (r % p).is_zero() {
                        (r.clone(), -c.clone())
                    } else {
                        (r.clone(), c.clone())
                    }
                })
                .collect(),
        }
    }

    /// Multiplicative inverse, computed by clearing one prime at a time with
    /// the Galois conjugate that negates `√p`.
    pub fn inv(&self) -> Option<Surd> {
        if self.is_zero() {
            return None;
        }
        if self.terms.len() == 1 {
            let (r, c) = self.terms.iter().next().expect("one term");
            let rq = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, r.clone()));
            let mut terms = BTreeMap::new();
            terms.insert(r.clone(), (c * rq).recip());
            return Some(Surd { terms });
        }
        let mut primes = BTreeSet::new();
        for r in self.terms.keys() {
            primes.extend(split_square(r).primes.iter().cloned());
        }
        let mut numer = Surd::one();
        let mut current = self.clone();
        for p in primes {
            if !current.terms.keys().any(|r| (r % &p).is_zero()) {
                continue;
            }
            let conj = current.conjugate(&p);
            numer = numer * conj.clone();
            current = current * conj;
        }
        let norm = current.as_rational()?;
        if norm.is_zero() {
            return None;
        }
        Some(numer.scale(&norm.recip()))
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(mut self, rhs: Surd) -> Surd {
        for (r, c) in rhs.terms {
            Surd::add_term(&mut self.terms, r, c);
        }
        self
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            terms: self.terms.into_iter().map(|(r, c)| (r, -c)).collect(),
        }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let mut terms = BTreeMap::new();
        for (r1, c1) in &self.terms {
            for (r2, c2) in &rhs.terms {
                let g = r1.gcd(r2);
                let radicand = (r1 / &g) * (r2 / &g);
                let gq = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, g));
                Surd::add_term(&mut terms, radicand, c1 * c2 * gq);
            }
        }
        Surd { terms }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (r, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if r.is_one() {
                write!(f, "{}", format_rational(c))?;
            } else if c.is_one() {
                write!(f, "sqrt({r})")?;
            } else {
                write!(f, "{}*sqrt({r})", format_rational(c))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational::ratio;

    fn s(p: i64, q: i64) -> Surd {
        Surd::sqrt(&ratio(p, q))
    }

    #[test]
    fn square_roots_are_canonical() {
        assert_eq!(s(4, 9), Surd::from_rational(ratio(2, 3)));
        assert_eq!(s(12, 1), Surd::sqrt(&ratio(3, 1)).scale(&ratio(2, 1)));
        assert_eq!(s(3, 2) * s(3, 2), Surd::from_rational(ratio(3, 2)));
        assert_eq!(s(2, 1) * s(6, 1), Surd::from_rational(ratio(2, 1)) * s(3, 1));
        assert_eq!(s(1, 2).to_string(), "1/2*sqrt(2)");
    }

    #[test]
    fn sums_cancel_exactly() {
        let a = s(2, 1) + s(3, 1);
        let b = s(3, 1) + s(2, 1);
        assert!((a.clone() - b).is_zero());
        assert_eq!(a.term_count(), 2);
        assert!((a.to_f64() - (2f64.sqrt() + 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn inverse_of_sum_of_radicals() {
        let a = Surd::one() + s(2, 1) + s(3, 1) + s(5, 7);
        let inv = a.inv().unwrap();
        assert_eq!(a * inv, Surd::one());
        let m = s(3, 2).scale(&ratio(-5, 4));
        assert_eq!(m.clone() * m.inv().unwrap(), Surd::one());
        assert!(Surd::zero().inv().is_none());
    }

    #[test]
    fn large_prime_radicands() {
        let p = 1_000_003i64; // prime above the trial limit
        let r = s(p, 1) * s(p, 1);
        assert_eq!(r, Surd::from_rational(ratio(p, 1)));
        let q = s(p * p * 7, 1);
        assert_eq!(q, s(7, 1).scale(&ratio(p, 1)));
    }
}
