//! Exact arithmetic in the cyclotomic fields Q(ζ_N).
//!
//! An element is stored as its coefficient vector in the power basis
//! `1, ζ, …, ζ^{φ(N)-1}`, always reduced modulo the cyclotomic polynomial
//! Φ_N. Because the reduction is unique, equality and hashing are plain
//! vector comparisons.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar (always reduced, positive denominator).
pub type Rational = BigRational;

/// Largest order that mixed-order arithmetic will promote into.
pub const MAX_PROMOTED_ORDER: u32 = 720;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycError {
    #[error("invalid cyclotomic order {0}")]
    InvalidOrder(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("orders {0} and {1} have no common embedding within order {MAX_PROMOTED_ORDER}")]
    OrderMismatch(u32, u32),
    #[error("cannot embed an element of order {from} into order {to}")]
    Promotion { from: u32, to: u32 },
    #[error("malformed scalar '{0}'")]
    Parse(String),
}

fn cache() -> &'static RwLock<HashMap<u32, Arc<Vec<BigInt>>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Vec<BigInt>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Coefficients (lowest degree first) of the n-th cyclotomic polynomial.
///
/// Computed by dividing x^n - 1 by Φ_d for every proper divisor d of n;
/// results are memoised per order.
pub fn cyclotomic_poly(n: u32) -> Arc<Vec<BigInt>> {
    assert!(n >= 1, "cyclotomic order must be positive");
    if let Some(p) = cache().read().unwrap().get(&n) {
        return p.clone();
    }
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            let divisor = cyclotomic_poly(d);
            num = exact_div_monic(&num, &divisor);
        }
    }
    let poly = Arc::new(num);
    cache().write().unwrap().insert(n, poly.clone());
    poly
}

fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qlen = rem.len() - dd;
    let mut quot = vec![BigInt::zero(); qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dc) in den.iter().enumerate() {
            rem[i + j] -= &c * dc;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quot
}

/// Euler's totient, i.e. the degree of Φ_n.
pub fn euler_phi(n: u32) -> usize {
    let mut result = n as u64;
    let mut m = n as u64;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result as usize
}

/// Order of the full group of roots of unity inside Q(ζ_n).
pub fn roots_of_unity_count(n: u32) -> u32 {
    if n.is_multiple_of(2) {
        n
    } else {
        2 * n
    }
}

/// An element of Q(ζ_N) in canonical reduced form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycNum {
    order: u32,
    coeffs: Vec<Rational>,
}

impl CycNum {
    /// Builds an element from coefficients of arbitrary exponents `ζ^k`,
    /// reducing modulo ζ^N = 1 and Φ_N.
    pub fn from_exponent_coeffs(order: u32, coeffs: &[Rational]) -> Result<Self, CycError> {
        if order == 0 {
            return Err(CycError::InvalidOrder(order));
        }
        let mut folded = vec![Rational::zero(); order as usize];
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                folded[k % order as usize] += c;
            }
        }
        Ok(Self::reduce(order, folded))
    }

    fn reduce(order: u32, mut v: Vec<Rational>) -> Self {
        let phi = cyclotomic_poly(order);
        let deg = phi.len() - 1;
        if v.len() > deg {
            for k in (deg..v.len()).rev() {
                if v[k].is_zero() {
                    continue;
                }
                let c = std::mem::replace(&mut v[k], Rational::zero());
                let base = k - deg;
                for (i, pc) in phi.iter().take(deg).enumerate() {
                    if !pc.is_zero() {
                        v[base + i] -= &c * Rational::from_integer(pc.clone());
                    }
                }
            }
        }
        v.resize(deg, Rational::zero());
        CycNum { order, coeffs: v }
    }

    pub fn zero(order: u32) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        CycNum {
            order,
            coeffs: vec![Rational::zero(); euler_phi(order)],
        }
    }

    pub fn one(order: u32) -> Self {
        Self::from_rational(order, Rational::one())
    }

    pub fn from_rational(order: u32, q: Rational) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = q;
        z
    }

    pub fn from_int(order: u32, n: i64) -> Self {
        Self::from_rational(order, Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_frac(order: u32, num: i64, den: i64) -> Self {
        Self::from_rational(order, Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// ζ_N^k for any integer k.
    pub fn zeta_pow(order: u32, k: i64) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let e = k.rem_euclid(order as i64) as usize;
        let mut v = vec![Rational::zero(); e + 1];
        v[e] = Rational::one();
        Self::reduce(order, v)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Canonical coefficient vector (length φ(N)).
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value, when the element lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Image under ζ_N ↦ ζ_M^{M/N}.
    pub fn embed(&self, target: u32) -> Result<Self, CycError> {
        if target == 0 || !target.is_multiple_of(self.order) {
            return Err(CycError::Promotion {
                from: self.order,
                to: target,
            });
        }
        if target == self.order {
            return Ok(self.clone());
        }
        let step = (target / self.order) as usize;
        let mut v = vec![Rational::zero(); (self.coeffs.len().max(1) - 1) * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            v[k * step] = c.clone();
        }
        Self::from_exponent_coeffs(target, &v)
    }

    /// Brings two elements into a common field.
    pub fn unify(a: &Self, b: &Self) -> Result<(Self, Self), CycError> {
        if a.order == b.order {
            return Ok((a.clone(), b.clone()));
        }
        let l = a.order.lcm(&b.order);
        if l > MAX_PROMOTED_ORDER {
            return Err(CycError::OrderMismatch(a.order, b.order));
        }
        Ok((a.embed(l)?, b.embed(l)?))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, CycError> {
        if self.order != other.order {
            let (a, b) = Self::unify(self, other)?;
            return a.try_add(&b);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycNum {
            order: self.order,
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, CycError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, CycError> {
        if self.order != other.order {
            let (a, b) = Self::unify(self, other)?;
            return a.try_mul(&b);
        }
        let n = self.coeffs.len();
        if n == 1 {
            return Ok(CycNum {
                order: self.order,
                coeffs: vec![&self.coeffs[0] * &other.coeffs[0]],
            });
        }
        let mut prod = vec![Rational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(Self::reduce(self.order, prod))
    }

    pub fn scale(&self, q: &Rational) -> Self {
        CycNum {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against Φ_N.
    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&Rational::from_integer(k.into()))
    }

    pub fn inv(&self) -> Result<Self, CycError> {
        if self.is_zero() {
            return Err(CycError::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(Self::from_rational(self.order, q.recip()));
        }
        let modulus: Vec<Rational> = cyclotomic_poly(self.order)
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        let s = poly_inverse_mod(&self.coeffs, &modulus);
        Ok(Self::reduce(self.order, s))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, CycError> {
        self.try_mul(&other.inv()?)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Integer power; negative exponents invert first.
    pub fn powi(&self, e: i64) -> Result<Self, CycError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    /// Smallest k ≥ 1 with self^k = 1, if self is a root of unity.
    pub fn root_of_unity_order(&self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let bound = roots_of_unity_count(self.order);
        let mut acc = self.clone();
        for k in 1..=bound {
            if acc.is_one() {
                return Some(k);
            }
            acc = &acc * self;
        }
        None
    }

    /// An exact k-th root inside the same field, when one is found.
    ///
    /// Handles radicands of the form (root of unity) × (rational). Square
    /// roots of rationals may be irrational (built from Gauss sums); higher
    /// roots must be rational up to a root of unity. Other radicands
    /// return `None` even when a root may exist.
    pub fn nth_root(&self, k: u32) -> Option<Self> {
        assert!(k >= 1);
        if self.is_zero() || k == 1 {
            return Some(self.clone());
        }
        let count = roots_of_unity_count(self.order) as i64;
        let omega = primitive_unity(self.order);
        let omega_inv = omega.inv().ok()?;
        let mut twisted = self.clone();
        for j in 0..count {
            if let Some(q) = twisted.as_rational() {
                let target = j.rem_euclid(count);
                // need i with k*i ≡ j (mod count)
                let i = (0..count).find(|i| (k as i64 * i).rem_euclid(count) == target);
                if let (Some(i), Some(r)) = (i, field_root_of_rational(self.order, &q, k)) {
                    return Some(&omega.pow(i as u64) * &r);
                }
            }
            twisted = &twisted * &omega_inv;
        }
        None
    }

    /// Floating-point rendering under ζ ↦ exp(2πi/N); reports only.
    pub fn to_complex(&self) -> (f64, f64) {
        let n = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (k, c)| {
                let c = c.to_f64().unwrap_or(f64::NAN);
                let t = 2.0 * std::f64::consts::PI * k as f64 / n;
                (re + c * t.cos(), im + c * t.sin())
            })
    }
}

/// A generator of all roots of unity in Q(ζ_n).
fn primitive_unity(order: u32) -> CycNum {
    if order.is_multiple_of(2) {
        CycNum::zeta_pow(order, 1)
    } else {
        -CycNum::zeta_pow(order, 1)
    }
}

fn field_root_of_rational(order: u32, q: &Rational, k: u32) -> Option<CycNum> {
    if let Some(r) = rational_nth_root(q, k) {
        return Some(CycNum::from_rational(order, r));
    }
    if k != 2 {
        return None;
    }
    // q = (s/den)² · m with m squarefree; only primes up to the largest
    // allowed order can divide an order, so trial division stops there
    let mut m = (q.numer() * q.denom()).abs();
    let negative = q.is_negative();
    let mut square = BigInt::from(1);
    let mut primes = Vec::new();
    for p in 2..=MAX_PROMOTED_ORDER {
        let bp = BigInt::from(p);
        let mut e = 0;
        while (&m % &bp).is_zero() {
            m /= &bp;
            e += 1;
        }
        for _ in 0..e / 2 {
            square *= &bp;
        }
        if e % 2 == 1 {
            primes.push(p);
        }
    }
    let rest = m.sqrt();
    if &rest * &rest != m {
        return None;
    }
    square *= rest;
    // product of Gauss sums over odd primes; its square is ±(product of primes)
    let mut g = CycNum::one(order);
    let mut sign_flip = negative;
    let mut two = false;
    for &p in &primes {
        if p == 2 {
            two = true;
            continue;
        }
        if !order.is_multiple_of(p) {
            return None;
        }
        g = &g * &gauss_sum(order, p);
        if p % 4 == 3 {
            sign_flip = !sign_flip;
        }
    }
    // remaining factor: sqrt(±1) or sqrt(±2)
    let rest = match (two, sign_flip) {
        (false, false) => CycNum::one(order),
        (false, true) => order
            .is_multiple_of(4)
            .then(|| CycNum::zeta_pow(order, (order / 4) as i64))?,
        (true, false) if order.is_multiple_of(8) => {
            let e = (order / 8) as i64;
            &CycNum::zeta_pow(order, e) + &CycNum::zeta_pow(order, -e)
        }
        (true, true) if order.is_multiple_of(8) => {
            let e = (order / 8) as i64;
            &CycNum::zeta_pow(order, e) + &CycNum::zeta_pow(order, 3 * e)
        }
        _ => return None,
    };
    let root = (&g * &rest).scale(&Rational::new(square, q.denom().clone()));
    debug_assert_eq!(&root * &root, CycNum::from_rational(order, q.clone()));
    Some(root)
}

/// Σ (a/p) ζ_p^a for an odd prime p dividing the order.
fn gauss_sum(order: u32, p: u32) -> CycNum {
    let step = (order / p) as i64;
    let mut acc = CycNum::zero(order);
    for a in 1..p {
        let term = CycNum::zeta_pow(order, step * a as i64);
        // Euler's criterion
        let legendre = BigInt::from(a).modpow(&BigInt::from((p - 1) / 2), &BigInt::from(p));
        acc = if legendre.is_one() {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

fn rational_nth_root(q: &Rational, k: u32) -> Option<Rational> {
    let negative = q.is_negative();
    if negative && k.is_multiple_of(2) {
        return None;
    }
    let num = q.numer().abs();
    let den = q.denom().clone();
    let rn = num.nth_root(k);
    let rd = den.nth_root(k);
    if num_traits::pow(rn.clone(), k as usize) != num
        || num_traits::pow(rd.clone(), k as usize) != den
    {
        return None;
    }
    let r = Rational::new(rn, rd);
    Some(if negative { -r } else { r })
}

/// The canonical primitive N-th root of unity.
pub fn zeta(order: u32) -> Result<CycNum, CycError> {
    if order == 0 {
        return Err(CycError::InvalidOrder(0));
    }
    Ok(CycNum::zeta_pow(order, 1))
}

fn trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rem = a.to_vec();
    trim(&mut rem);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() <= db {
        return (vec![Rational::zero()], rem);
    }
    let mut quot = vec![Rational::zero(); rem.len() - db];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + db] / &lead;
        if !c.is_zero() {
            for (j, bc) in b.iter().enumerate() {
                rem[i + j] -= &c * bc;
            }
        }
        quot[i] = c;
    }
    rem.truncate(db.max(1));
    trim(&mut rem);
    (quot, rem)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

/// s with s·a ≡ 1 (mod m); requires gcd(a, m) = 1.
fn poly_inverse_mod(a: &[Rational], m: &[Rational]) -> Vec<Rational> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r1);
    let (mut s0, mut s1) = (vec![Rational::zero()], vec![Rational::one()]);
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divmod(&r0, &r1);
        let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
    }
    // r0 is a nonzero constant gcd
    let c = r0[0].clone();
    s0.iter().map(|x| x / &c).collect()
}

impl PartialOrd for CycNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CycNum {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order
            .cmp(&other.order)
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&CycNum> for &CycNum {
            type Output = CycNum;
            /// Panics when the orders have no common embedding; use the
            /// `try_*` form to handle that case.
            fn $method(self, rhs: &CycNum) -> CycNum {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<CycNum> for CycNum {
            type Output = CycNum;
            fn $method(self, rhs: CycNum) -> CycNum {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&CycNum> for CycNum {
            type Output = CycNum;
            fn $method(self, rhs: &CycNum) -> CycNum {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

pub(crate) fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

/// Text encoding `N:[c0,c1,...]`.
impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.order)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&fmt_rational(c))?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for CycNum {
    type Err = CycError;

    /// Accepts `N:[c0,...]` with any number of coefficients (they are
    /// reduced), or a bare rational which is read in Q(ζ_1).
    fn from_str(s: &str) -> Result<Self, CycError> {
        let bad = || CycError::Parse(s.to_string());
        let t = s.trim();
        let Some((n, rest)) = t.split_once(':') else {
            return parse_rational(t)
                .map(|q| CycNum::from_rational(1, q))
                .ok_or_else(bad);
        };
        let order: u32 = n.trim().parse().map_err(|_| bad())?;
        if order == 0 {
            return Err(CycError::InvalidOrder(0));
        }
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let coeffs = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(parse_rational)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(bad)?
        };
        Self::from_exponent_coeffs(order, &coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cyclotomic_polys_small() {
        let as_i64 = |n| {
            cyclotomic_poly(n)
                .iter()
                .map(|c| c.to_i64().unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(2), vec![1, 1]);
        assert_eq!(as_i64(3), vec![1, 1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(6), vec![1, -1, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
        for n in 1..=30 {
            assert_eq!(
                cyclotomic_poly(n).len() - 1,
                euler_phi(n),
                "degree of Φ_{n}"
            );
        }
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta(1).unwrap(), CycNum::one(1));
        let z3 = zeta(3).unwrap();
        assert!((&(&z3 + &z3.pow(2)) + &CycNum::one(3)).is_zero());
        assert_eq!(zeta(4).unwrap().pow(2), CycNum::from_int(4, -1));
        assert_eq!(zeta(0), Err(CycError::InvalidOrder(0)));
    }

    #[test]
    fn phi_vanishes_at_zeta() {
        for n in 1..=24 {
            let z = zeta(n).unwrap();
            let mut acc = CycNum::zero(n);
            for (k, c) in cyclotomic_poly(n).iter().enumerate() {
                acc = &acc + &z.pow(k as u64).scale(&Rational::from_integer(c.clone()));
            }
            assert!(acc.is_zero(), "Φ_{n}(ζ) != 0");
            assert!(z.pow(n as u64).is_one());
        }
    }

    #[test]
    fn ring_identities() {
        for n in [5u32, 7, 12] {
            let z = zeta(n).unwrap();
            let one = CycNum::one(n);
            let lhs = &(&one + &z) * &(&one - &z);
            assert_eq!(lhs, &one - &z.pow(2));
            assert_eq!(&z + &CycNum::zero(n), z);
            assert!((&z * &z.pow(n as u64 - 1)).is_one());
        }
    }

    #[test]
    fn inverses() {
        assert_eq!(CycNum::one(5).inv().unwrap(), CycNum::one(5));
        let z = zeta(9).unwrap();
        assert_eq!(z.inv().unwrap(), z.pow(8));
        assert_eq!(
            CycNum::from_int(3, 2).inv().unwrap(),
            CycNum::from_rational(3, q(1, 2))
        );
        assert_eq!(CycNum::zero(4).inv(), Err(CycError::DivisionByZero));
        let x = &(&z + &CycNum::from_int(9, 3)) * &z.pow(4);
        assert!((&x * &x.inv().unwrap()).is_one());
    }

    #[test]
    fn embeddings() {
        assert_eq!(zeta(2).unwrap().embed(4).unwrap(), zeta(4).unwrap().pow(2));
        assert_eq!(CycNum::one(3).embed(12).unwrap(), CycNum::one(12));
        assert_eq!(zeta(3).unwrap().embed(6).unwrap(), zeta(6).unwrap().pow(2));
        assert_eq!(
            zeta(3).unwrap().embed(4),
            Err(CycError::Promotion { from: 3, to: 4 })
        );
    }

    #[test]
    fn mixed_orders_promote() {
        let s = zeta(3).unwrap().try_add(&zeta(4).unwrap()).unwrap();
        assert_eq!(s.order(), 12);
        assert_eq!(s, &zeta(12).unwrap().pow(4) + &zeta(12).unwrap().pow(3));
        let big = zeta(701).unwrap();
        assert_eq!(
            big.try_mul(&zeta(2).unwrap()).unwrap_err(),
            CycError::OrderMismatch(701, 2)
        );
    }

    #[test]
    fn text_round_trip() {
        let x = &zeta(5).unwrap().scale(&q(-3, 7)) + &CycNum::from_int(5, 2);
        let s = x.to_string();
        assert_eq!(s, "5:[2,-3/7,0,0]");
        assert_eq!(s.parse::<CycNum>().unwrap(), x);
        assert_eq!(
            "4:[0,0,1]".parse::<CycNum>().unwrap(),
            CycNum::from_int(4, -1)
        );
        assert!("4:[1,x]".parse::<CycNum>().is_err());
        assert!("0:[1]".parse::<CycNum>().is_err());
    }

    #[test]
    fn roots_of_unity() {
        let z = zeta(12).unwrap();
        assert_eq!(z.pow(4).root_of_unity_order(), Some(3));
        assert_eq!((-zeta(5).unwrap()).root_of_unity_order(), Some(10));
        assert_eq!(CycNum::from_int(5, 2).root_of_unity_order(), None);
    }

    #[test]
    fn radicals() {
        let four = CycNum::from_int(1, 4);
        assert_eq!(four.nth_root(2), Some(CycNum::from_int(1, 2)));
        assert_eq!(CycNum::from_int(1, -4).nth_root(2), None);
        let minus4 = CycNum::from_int(4, -4);
        let r = minus4.nth_root(2).unwrap();
        assert_eq!(&r * &r, minus4);
        let c = CycNum::from_frac(1, -27, 8).nth_root(3).unwrap();
        assert_eq!(c, CycNum::from_frac(1, -3, 2));
        let w = zeta(7).unwrap().scale(&q(8, 1));
        let cube = w.nth_root(3).unwrap();
        assert_eq!(cube.pow(3), w);
        assert_eq!(CycNum::from_int(1, 2).nth_root(2), None);
    }

    #[test]
    fn quadratic_subfield_roots() {
        let z = zeta(5).unwrap();
        let sqrt5 = &(&CycNum::one(5) + &z.scale(&q(2, 1))) + &z.pow(4).scale(&q(2, 1));
        let r = CycNum::from_int(5, 5).nth_root(2).unwrap();
        assert!(r == sqrt5 || r == -&sqrt5);
        for (order, n) in [
            (3, -3),
            (8, 2),
            (8, -2),
            (15, -15),
            (12, 3),
            (20, 45),
            (7, -28),
        ] {
            let a = CycNum::from_int(order, n);
            let r = a
                .nth_root(2)
                .unwrap_or_else(|| panic!("sqrt({n}) in Q(zeta_{order})"));
            assert_eq!(&r * &r, a);
        }
        assert_eq!(CycNum::from_int(3, 3).nth_root(2), None);
        assert_eq!(CycNum::from_int(5, 7).nth_root(2), None);
        let half = CycNum::from_frac(5, 5, 4).nth_root(2).unwrap();
        assert_eq!(&half * &half, CycNum::from_frac(5, 5, 4));
    }
}
