//! Dense univariate polynomials over Q(ζ_N), lowest degree first.

use crate::cycfield::{CycNum, Rational};

pub type UniPoly = Vec<CycNum>;

pub fn trim(mut p: UniPoly) -> UniPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Degree of a trimmed polynomial; `None` for zero.
pub fn degree(p: &UniPoly) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(p: &UniPoly, x: &CycNum) -> CycNum {
    let mut acc = CycNum::zero(x.order());
    for c in p.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

pub fn mul(a: &UniPoly, b: &UniPoly, order: u32) -> UniPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![CycNum::zero(order); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    trim(out)
}

pub fn derivative(p: &UniPoly) -> UniPoly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(&Rational::from_integer((k as i64).into())))
            .collect(),
    )
}

/// Quotient and remainder; panics on a zero divisor.
pub fn divrem(a: &UniPoly, b: &UniPoly, order: u32) -> (UniPoly, UniPoly) {
    let b = trim(b.clone());
    let db = degree(&b).expect("division by the zero polynomial");
    let lead_inv = b[db].inv().unwrap();
    let mut r = trim(a.clone());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![CycNum::zero(order); r.len() - db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let f = &r[dr] * &lead_inv;
        for (k, c) in b.iter().enumerate() {
            let t = &f * c;
            r[dr - db + k] = &r[dr - db + k] - &t;
        }
        q[dr - db] = f;
        r = trim(r);
    }
    (trim(q), r)
}

/// Monic greatest common divisor; zero when both inputs are zero.
pub fn gcd(a: &UniPoly, b: &UniPoly, order: u32) -> UniPoly {
    let mut x = trim(a.clone());
    let mut y = trim(b.clone());
    while !y.is_empty() {
        let (_, r) = divrem(&x, &y, order);
        x = y;
        y = r;
    }
    match degree(&x) {
        Some(d) => {
            let inv = x[d].inv().unwrap();
            x.iter().map(|c| c * &inv).collect()
        }
        None => x,
    }
}

/// Number of distinct roots over the algebraic closure.
pub fn distinct_root_count(p: &UniPoly, order: u32) -> usize {
    let Some(d) = degree(p) else { return 0 };
    let g = gcd(p, &derivative(p), order);
    d - degree(&g).unwrap_or(0)
}

/// Lagrange interpolation through `(xs[i], ys[i])`.
pub fn interpolate(xs: &[CycNum], ys: &[CycNum], order: u32) -> UniPoly {
    let mut out: UniPoly = Vec::new();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = vec![CycNum::one(order)];
        let mut denom = CycNum::one(order);
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                basis = mul(&basis, &vec![-xj, CycNum::one(order)], order);
                denom = &denom * &(xi - xj);
            }
        }
        let f = yi * &denom.inv().expect("interpolation nodes are distinct");
        if out.len() < basis.len() {
            out.resize(basis.len(), CycNum::zero(order));
        }
        for (k, c) in basis.iter().enumerate() {
            out[k] = &out[k] + &(c * &f);
        }
    }
    trim(out)
}
