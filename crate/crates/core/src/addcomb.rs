//! Difference and ratio sets, grid statistics, coset recovery for roots
//! of unity, and Möbius incidence/expansion measurements.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::cubicgroup::{GroupElement, GroupValue};
use crate::cycfield::{roots_of_unity_count, CycError, CycNum, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddcombError {
    #[error("elements come from different groups")]
    KindMismatch,
    #[error("zero is not an element of the multiplicative group")]
    ZeroElement,
    #[error("set is empty")]
    Empty,
    #[error("{0} is outside the domain of the map")]
    Domain(String),
    #[error("Möbius map is degenerate (ad - bc = 0)")]
    DegenerateMap,
    #[error(transparent)]
    Field(#[from] CycError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Additive,
    Multiplicative,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Additive => "additive",
            GroupKind::Multiplicative => "multiplicative",
        })
    }
}

/// `Q − Q`, or `Q : Q = {a/b}` in the multiplicative case.
pub fn difference_set(q: &[CycNum], kind: GroupKind) -> Result<BTreeSet<CycNum>, AddcombError> {
    if kind == GroupKind::Multiplicative && q.iter().any(CycNum::is_zero) {
        return Err(AddcombError::ZeroElement);
    }
    let inverses: Vec<CycNum> = match kind {
        GroupKind::Additive => q.iter().map(|b| -b).collect(),
        GroupKind::Multiplicative => q.iter().map(|b| b.inv()).collect::<Result<_, _>>()?,
    };
    let mut out = BTreeSet::new();
    for a in q {
        for b in &inverses {
            out.insert(match kind {
                GroupKind::Additive => a + b,
                GroupKind::Multiplicative => a * b,
            });
        }
    }
    Ok(out)
}

/// Difference set of chart values; all elements must share a scalar group.
pub fn difference_set_of_elements(q: &[GroupElement]) -> Result<BTreeSet<CycNum>, AddcombError> {
    let first = q.first().ok_or(AddcombError::Empty)?;
    let mut values = Vec::with_capacity(q.len());
    for e in q {
        match &e.value {
            GroupValue::Scalar(s) if e.kind == first.kind => values.push(s.clone()),
            _ => return Err(AddcombError::KindMismatch),
        }
    }
    let kind = if first.kind.is_multiplicative() {
        GroupKind::Multiplicative
    } else {
        GroupKind::Additive
    };
    difference_set(&values, kind)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridStats {
    pub set_size: usize,
    pub diff_or_ratio_size: usize,
    pub doubling_constant: Rational,
    pub group_kind: GroupKind,
}

/// Statistics of `Q` and whether `|Q − Q| ≤ C|Q|`.
pub fn grid_constant(
    q: &[CycNum],
    kind: GroupKind,
    c: &Rational,
) -> Result<(bool, GridStats), AddcombError> {
    let distinct: BTreeSet<CycNum> = q.iter().cloned().collect();
    if distinct.is_empty() {
        return Err(AddcombError::Empty);
    }
    let q: Vec<CycNum> = distinct.into_iter().collect();
    let d = difference_set(&q, kind)?.len();
    let stats = GridStats {
        set_size: q.len(),
        diff_or_ratio_size: d,
        doubling_constant: Rational::new(d.into(), q.len().into()),
        group_kind: kind,
    };
    Ok((stats.doubling_constant <= *c, stats))
}

/// Grid constant inherited by a subset of size `sub` of a `C`-grid of size `size`.
pub fn hereditary_constant(c: &Rational, size: usize, sub: usize) -> Rational {
    c * Rational::new(size.into(), sub.into())
}

fn unity_table(order: u32) -> Arc<HashMap<CycNum, u32>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<HashMap<CycNum, u32>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.read().unwrap().get(&order) {
        return t.clone();
    }
    let count = roots_of_unity_count(order);
    let gen = if order.is_multiple_of(2) {
        CycNum::zeta_pow(order, 1)
    } else {
        -CycNum::zeta_pow(order, 1)
    };
    let mut table = HashMap::new();
    let mut acc = CycNum::one(order);
    for k in 0..count {
        let ord = count / num_integer::gcd(k, count);
        table.insert(acc.clone(), ord);
        acc = &acc * &gen;
    }
    let t = Arc::new(table);
    cache.write().unwrap().insert(order, t.clone());
    t
}

/// Multiplicative order of a root of unity, or `None` for other elements.
pub fn unity_order(x: &CycNum) -> Option<u32> {
    unity_table(x.order()).get(x).copied()
}

/// All m-th roots of unity present in Q(ζ_order) (all of H_m when m divides
/// the number of roots of unity of the field).
pub fn subgroup(order: u32, m: u32) -> Vec<CycNum> {
    let mut out: Vec<CycNum> = unity_table(order)
        .iter()
        .filter(|(_, &o)| m.is_multiple_of(o))
        .map(|(x, _)| x.clone())
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetCertificate {
    pub m: u32,
    pub lambda: CycNum,
    pub sym_diff: usize,
}

/// The coset λH_m (λ ∈ A, m ≤ max_m) closest to `A` in symmetric
/// difference; ties go to smaller m, then smaller λ (1 first). `None` when even the
/// best fit differs from `A` in more than |A| elements.
pub fn recover_subgroup(
    a: &[CycNum],
    max_m: u32,
) -> Result<Option<CosetCertificate>, AddcombError> {
    let set: BTreeSet<CycNum> = a.iter().cloned().collect();
    if set.is_empty() {
        return Err(AddcombError::Empty);
    }
    if set.iter().any(CycNum::is_zero) {
        return Err(AddcombError::ZeroElement);
    }
    let elems: Vec<CycNum> = set.into_iter().collect();
    let n = elems.len();
    // orders[l][i] = order of elems[i] / elems[l] as a root of unity
    let orders: Vec<Vec<Option<u32>>> = elems
        .par_iter()
        .map(|lambda| {
            let inv = lambda.inv().expect("nonzero");
            elems.iter().map(|x| unity_order(&(x * &inv))).collect()
        })
        .collect();
    let best = (1..=max_m)
        .into_par_iter()
        .map(|m| {
            let mut best: Option<(usize, usize)> = None;
            for (l, row) in orders.iter().enumerate() {
                let hits = row.iter().filter(|o| o.is_some_and(|o| m % o == 0)).count();
                let sd = n + m as usize - 2 * hits;
                if best.is_none_or(|(b, _)| sd < b) {
                    best = Some((sd, l));
                }
            }
            let (sd, l) = best.unwrap();
            (sd, m, l)
        })
        .min_by_key(|&(sd, m, l)| (sd, m, l))
        .unwrap();
    let (sd, m, l) = best;
    // canonical representative of the same coset: 1 if present, else the smallest
    let inv = elems[l].inv()?;
    let lambda = elems
        .iter()
        .filter(|x| unity_order(&(*x * &inv)).is_some_and(|o| m % o == 0))
        .min_by_key(|x| (!x.is_one(), *x))
        .unwrap()
        .clone();
    Ok((sd <= n).then_some(CosetCertificate {
        m,
        lambda,
        sym_diff: sd,
    }))
}

/// x ↦ (ax + b)/(cx + d) on the projective line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MobiusMap {
    pub a: CycNum,
    pub b: CycNum,
    pub c: CycNum,
    pub d: CycNum,
}

impl MobiusMap {
    pub fn new(a: CycNum, b: CycNum, c: CycNum, d: CycNum) -> Result<Self, AddcombError> {
        if (&(&a * &d) - &(&b * &c)).is_zero() {
            return Err(AddcombError::DegenerateMap);
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn from_ints(order: u32, v: [i64; 4]) -> Result<Self, AddcombError> {
        let [a, b, c, d] = v.map(|x| CycNum::from_int(order, x));
        Self::new(a, b, c, d)
    }

    pub fn identity(order: u32) -> Self {
        Self::from_ints(order, [1, 0, 0, 1]).unwrap()
    }

    /// `None` at the pole.
    pub fn apply(&self, x: &CycNum) -> Option<CycNum> {
        let den = &(&self.c * x) + &self.d;
        let inv = den.inv().ok()?;
        Some(&(&(&self.a * x) + &self.b) * &inv)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        MobiusMap {
            a: &(a * &other.a) + &(b * &other.c),
            b: &(a * &other.b) + &(b * &other.d),
            c: &(c * &other.a) + &(d * &other.c),
            d: &(c * &other.b) + &(d * &other.d),
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }
}

impl fmt::Display for MobiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} x + {}) / ({} x + {})",
            self.a, self.b, self.c, self.d
        )
    }
}

/// #{(x, y, ψ) : (x, y) ∈ P, ψ ∈ Ψ, y = ψ(x)}, by direct evaluation.
pub fn mobius_incidences_naive(pairs: &[(CycNum, CycNum)], maps: &[MobiusMap]) -> usize {
    let pairs: BTreeSet<&(CycNum, CycNum)> = pairs.iter().collect();
    let mut count = 0;
    for (x, y) in pairs {
        for psi in maps {
            if psi.apply(x).as_ref() == Some(y) {
                count += 1;
            }
        }
    }
    count
}

/// Same count, evaluating each map once per distinct abscissa and looking
/// the image up in a hash of the pairs.
pub fn mobius_incidences(pairs: &[(CycNum, CycNum)], maps: &[MobiusMap]) -> usize {
    let mut by_x: HashMap<&CycNum, HashSet<&CycNum>> = HashMap::new();
    for (x, y) in pairs {
        by_x.entry(x).or_default().insert(y);
    }
    let xs: Vec<(&CycNum, HashSet<&CycNum>)> = by_x.into_iter().collect();
    maps.par_iter()
        .map(|psi| {
            xs.iter()
                .filter(|(x, ys)| psi.apply(x).is_some_and(|y| ys.contains(&y)))
                .count()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionMode {
    /// |A : A| and |ψ(A) : ψ(A)|
    TwoPt,
    /// |A − A| and |ψ(A) − ψ(A)|
    OnePt,
    /// |A − A| and |ψ(A) : ψ(A)|
    Mixed,
}

impl ExpansionMode {
    pub fn name(self) -> &'static str {
        match self {
            ExpansionMode::TwoPt => "two-pt",
            ExpansionMode::OnePt => "one-pt",
            ExpansionMode::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "two-pt" => Some(ExpansionMode::TwoPt),
            "one-pt" => Some(ExpansionMode::OnePt),
            "mixed" => Some(ExpansionMode::Mixed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub mode: ExpansionMode,
    pub n: usize,
    pub set_size: usize,
    pub image_size: usize,
    pub max: usize,
    /// max / n^(1 + 1/40); reported, never asserted
    pub normalized: f64,
}

pub fn expansion_report(
    a: &[CycNum],
    psi: &MobiusMap,
    mode: ExpansionMode,
) -> Result<ExpansionReport, AddcombError> {
    let a: Vec<CycNum> = a
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if a.is_empty() {
        return Err(AddcombError::Empty);
    }
    let mut image = Vec::with_capacity(a.len());
    for x in &a {
        if x.is_zero() {
            return Err(AddcombError::Domain(x.to_string()));
        }
        match psi.apply(x) {
            Some(y) if !y.is_zero() => image.push(y),
            _ => return Err(AddcombError::Domain(x.to_string())),
        }
    }
    let (k1, k2) = match mode {
        ExpansionMode::TwoPt => (GroupKind::Multiplicative, GroupKind::Multiplicative),
        ExpansionMode::OnePt => (GroupKind::Additive, GroupKind::Additive),
        ExpansionMode::Mixed => (GroupKind::Additive, GroupKind::Multiplicative),
    };
    let set_size = difference_set(&a, k1)?.len();
    let image_size = difference_set(&image, k2)?.len();
    let max = set_size.max(image_size);
    let n = a.len();
    let normalized = max.to_f64().unwrap() / (n as f64).powf(1.0 + 1.0 / 40.0);
    Ok(ExpansionReport {
        mode,
        n,
        set_size,
        image_size,
        max,
        normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycfield::zeta;

    fn ints(v: &[i64]) -> Vec<CycNum> {
        v.iter().map(|&x| CycNum::from_int(1, x)).collect()
    }

    #[test]
    fn difference_set_examples() {
        assert_eq!(
            difference_set(&ints(&[0, 1, 2]), GroupKind::Additive)
                .unwrap()
                .len(),
            5
        );
        let h6 = subgroup(6, 6);
        assert_eq!(h6.len(), 6);
        assert_eq!(
            difference_set(&h6, GroupKind::Multiplicative)
                .unwrap()
                .len(),
            6
        );
        let z = zeta(5).unwrap();
        let r = difference_set(&[CycNum::one(5), z.clone()], GroupKind::Multiplicative).unwrap();
        assert_eq!(
            r,
            [CycNum::one(5), z.clone(), z.pow(4)].into_iter().collect()
        );
        assert_eq!(
            difference_set(&ints(&[0, 1]), GroupKind::Multiplicative),
            Err(AddcombError::ZeroElement)
        );
    }

    #[test]
    fn grid_examples() {
        let one = Rational::from_integer(1.into());
        assert!(
            grid_constant(&subgroup(12, 12), GroupKind::Multiplicative, &one)
                .unwrap()
                .0
        );
        let (ok, stats) = grid_constant(
            &ints(&[1, 2, 4, 8, 16]),
            GroupKind::Multiplicative,
            &Rational::from_integer(2.into()),
        )
        .unwrap();
        // ratios are 2^k for -4 <= k <= 4
        assert_eq!(stats.diff_or_ratio_size, 9);
        assert!(ok);
        let (ok, _) = grid_constant(
            &ints(&[1, 2, 4, 8, 16]),
            GroupKind::Multiplicative,
            &Rational::new(3.into(), 2.into()),
        )
        .unwrap();
        assert!(!ok);
        assert!(
            grid_constant(&ints(&[7]), GroupKind::Additive, &one)
                .unwrap()
                .0
        );
    }

    #[test]
    fn subgroup_recovery_examples() {
        let cert = recover_subgroup(&subgroup(6, 6), 12).unwrap().unwrap();
        assert_eq!((cert.m, cert.sym_diff), (6, 0));
        assert!(cert.lambda.is_one());

        let z = zeta(5).unwrap();
        let mut coset: Vec<CycNum> = subgroup(5, 5).iter().map(|h| h * &z).collect();
        coset.remove(2);
        let cert = recover_subgroup(&coset, 12).unwrap().unwrap();
        assert_eq!((cert.m, cert.sym_diff), (5, 1));
        assert!(coset.contains(&cert.lambda));

        let cert = recover_subgroup(&ints(&[2, 3, 7]), 12).unwrap();
        assert!(cert.is_none_or(|c| c.sym_diff >= 2));
        assert_eq!(
            recover_subgroup(&ints(&[0, 1]), 4),
            Err(AddcombError::ZeroElement)
        );
    }

    #[test]
    fn mobius_examples() {
        let h4 = subgroup(4, 4);
        let pairs: Vec<_> = h4.iter().map(|x| (x.clone(), x.clone())).collect();
        assert_eq!(mobius_incidences(&pairs, &[MobiusMap::identity(4)]), 4);
        let h8 = subgroup(8, 8);
        let pairs: Vec<_> = h8.iter().map(|x| (x.clone(), x.inv().unwrap())).collect();
        let recip = MobiusMap::from_ints(8, [0, 1, 1, 0]).unwrap();
        assert_eq!(mobius_incidences(&pairs, std::slice::from_ref(&recip)), 8);
        assert_eq!(mobius_incidences_naive(&pairs, &[recip]), 8);
        assert!(MobiusMap::from_ints(1, [1, 2, 2, 4]).is_err());
    }

    #[test]
    fn expansion_examples() {
        let h = subgroup(7, 7);
        let r = expansion_report(&h, &MobiusMap::identity(7), ExpansionMode::TwoPt).unwrap();
        assert_eq!((r.set_size, r.image_size, r.max), (7, 7, 7));
        let shift = MobiusMap::from_ints(7, [1, 1, 0, 1]).unwrap();
        let r = expansion_report(&h, &shift, ExpansionMode::TwoPt).unwrap();
        assert!(r.image_size > 7);
        let ap = ints(&[1, 2, 3, 4, 5]);
        let r = expansion_report(
            &ap,
            &MobiusMap::from_ints(1, [0, 1, 1, 0]).unwrap(),
            ExpansionMode::Mixed,
        )
        .unwrap();
        assert_eq!(r.set_size, 9);
        // -1 is sent to 0 by x + 1
        assert!(matches!(
            expansion_report(
                &subgroup(6, 6),
                &MobiusMap::from_ints(6, [1, 1, 0, 1]).unwrap(),
                ExpansionMode::TwoPt
            ),
            Err(AddcombError::Domain(_))
        ));
    }
}
