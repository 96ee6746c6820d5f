//! Homogeneous plane curves: evaluation, fitting through points, singular
//! points and component bookkeeping.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::cycfield::{CycError, CycNum, Rational};
use crate::linalg;
use crate::poly::{self, UniPoly};
use crate::projgeom::{common_order, Mat3, ProjLine, ProjPoint, ProjTransform, Vec3};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("point {0} is not on the curve")]
    NotOnCurve(String),
    #[error("monomial ({0},{1},{2}) does not have degree {3}")]
    NotHomogeneous(u32, u32, u32, u32),
    #[error("the zero polynomial does not define a curve")]
    ZeroPolynomial,
    #[error("curve degree must be at least 1")]
    ZeroDegree,
    #[error("component product does not match the curve")]
    BadComponents,
    #[error(transparent)]
    Field(#[from] CycError),
}

pub type Monomial = (u32, u32, u32);

/// All exponent triples of total degree `d`, ordered by the exponent of x
/// descending, then of y descending.
pub fn monomials(d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for i in (0..=d).rev() {
        for j in (0..=d - i).rev() {
            out.push((i, j, d - i - j));
        }
    }
    out
}

fn monomial_value(m: Monomial, v: &Vec3) -> CycNum {
    &(&v[0].pow(m.0 as u64) * &v[1].pow(m.1 as u64)) * &v[2].pow(m.2 as u64)
}

/// A homogeneous polynomial, possibly zero or constant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Form {
    degree: u32,
    order: u32,
    coeffs: BTreeMap<Monomial, CycNum>,
}

impl Form {
    pub fn new(
        degree: u32,
        terms: impl IntoIterator<Item = (Monomial, CycNum)>,
    ) -> Result<Self, CurveError> {
        let terms: Vec<(Monomial, CycNum)> = terms.into_iter().collect();
        let order = common_order(terms.iter().map(|(_, c)| c))?;
        let mut coeffs: BTreeMap<Monomial, CycNum> = BTreeMap::new();
        for (m, c) in terms {
            if m.0 + m.1 + m.2 != degree {
                return Err(CurveError::NotHomogeneous(m.0, m.1, m.2, degree));
            }
            let c = c.embed(order)?;
            let e = coeffs.entry(m).or_insert_with(|| CycNum::zero(order));
            *e = &*e + &c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(Form {
            degree,
            order,
            coeffs,
        })
    }

    pub fn zero(degree: u32, order: u32) -> Self {
        Form {
            degree,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_ints(
        order: u32,
        degree: u32,
        terms: &[(Monomial, i64)],
    ) -> Result<Self, CurveError> {
        Self::new(
            degree,
            terms.iter().map(|&(m, c)| (m, CycNum::from_int(order, c))),
        )
    }

    pub fn linear(l: &ProjLine) -> Self {
        let c = l.coeffs();
        Self::new(
            1,
            [
                ((1, 0, 0), c[0].clone()),
                ((0, 1, 0), c[1].clone()),
                ((0, 0, 1), c[2].clone()),
            ],
        )
        .unwrap()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, m: Monomial) -> CycNum {
        self.coeffs
            .get(&m)
            .cloned()
            .unwrap_or_else(|| CycNum::zero(self.order))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CycNum)> {
        self.coeffs.iter()
    }

    pub fn eval_vec(&self, v: &Vec3) -> CycNum {
        let mut acc = CycNum::zero(self.order);
        for (&m, c) in &self.coeffs {
            acc = &acc + &(c * &monomial_value(m, v));
        }
        acc
    }

    pub fn eval(&self, p: &ProjPoint) -> CycNum {
        self.eval_vec(p.coords())
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(
            self.degree, other.degree,
            "adding forms of different degree"
        );
        let terms = self
            .coeffs
            .iter()
            .chain(&other.coeffs)
            .map(|(m, c)| (*m, c.clone()));
        Form::new(self.degree, terms).expect("orders were compatible when the forms were built")
    }

    pub fn scale(&self, c: &CycNum) -> Form {
        Form::new(self.degree, self.coeffs.iter().map(|(m, v)| (*m, v * c))).unwrap()
    }

    pub fn mul(&self, other: &Form) -> Form {
        let mut terms = Vec::new();
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                terms.push(((a.0 + b.0, a.1 + b.1, a.2 + b.2), x * y));
            }
        }
        let mut f = Form::new(self.degree + other.degree, terms).unwrap();
        if f.is_zero() {
            f.order =
                common_order([&CycNum::zero(self.order), &CycNum::zero(other.order)].into_iter())
                    .unwrap();
        }
        f
    }

    /// Partial derivative in variable 0, 1 or 2.
    pub fn partial(&self, var: usize) -> Form {
        if self.degree == 0 {
            return Form::zero(0, self.order);
        }
        let mut terms = Vec::new();
        for (&m, c) in &self.coeffs {
            let mut e = [m.0, m.1, m.2];
            if e[var] == 0 {
                continue;
            }
            let k = e[var];
            e[var] -= 1;
            terms.push((
                (e[0], e[1], e[2]),
                c.scale(&Rational::from_integer(k.into())),
            ));
        }
        let mut f = Form::new(self.degree - 1, terms).unwrap();
        f.order = self.order;
        f
    }

    pub fn gradient(&self) -> [Form; 3] {
        [self.partial(0), self.partial(1), self.partial(2)]
    }

    /// Determinant of the matrix of second partials.
    pub fn hessian(&self) -> Form {
        let h: Vec<Vec<Form>> = (0..3)
            .map(|i| (0..3).map(|j| self.partial(i).partial(j)).collect())
            .collect();
        let minor = |a: usize, b: usize, c: usize, d: usize| -> Form {
            h[1][a]
                .mul(&h[2][b])
                .add(&h[1][c].mul(&h[2][d]).scale(&CycNum::from_int(1, -1)))
        };
        let t0 = h[0][0].mul(&minor(1, 2, 2, 1));
        let t1 = h[0][1].mul(&minor(0, 2, 2, 0));
        let t2 = h[0][2].mul(&minor(0, 1, 1, 0));
        t0.add(&t1.scale(&CycNum::from_int(1, -1))).add(&t2)
    }

    /// The form `v ↦ P(M v)`.
    pub fn substitute(&self, m: &Mat3) -> Form {
        let rows: Vec<Form> = m
            .iter()
            .map(|r| {
                Form::new(
                    1,
                    [
                        ((1, 0, 0), r[0].clone()),
                        ((0, 1, 0), r[1].clone()),
                        ((0, 0, 1), r[2].clone()),
                    ],
                )
                .unwrap()
            })
            .collect();
        let order = common_order(m.iter().flatten().chain(self.coeffs.values()))
            .expect("orders were compatible when the inputs were built");
        let mut acc = Form::zero(self.degree, order);
        let one = Form::new(0, [((0, 0, 0), CycNum::one(order))]).unwrap();
        for (&mono, c) in &self.coeffs {
            let mut t = one.clone();
            for (var, e) in [mono.0, mono.1, mono.2].into_iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&rows[var]);
                }
            }
            acc = acc.add(&t.scale(c));
        }
        acc
    }

    /// Coefficients `c_k` of `P(a + t b) = Σ c_k t^k`, k = 0..=degree.
    pub fn restrict(&self, a: &Vec3, b: &Vec3) -> UniPoly {
        let order = common_order(a.iter().chain(b.iter()).chain(self.coeffs.values()))
            .expect("compatible orders");
        let lin: Vec<UniPoly> = (0..3)
            .map(|i| vec![a[i].embed(order).unwrap(), b[i].embed(order).unwrap()])
            .collect();
        let mut out = vec![CycNum::zero(order); self.degree as usize + 1];
        for (&mono, c) in &self.coeffs {
            let mut t: UniPoly = vec![c.embed(order).unwrap()];
            for (var, e) in [mono.0, mono.1, mono.2].into_iter().enumerate() {
                for _ in 0..e {
                    t = poly::mul(&t, &lin[var], order);
                }
            }
            for (k, v) in t.into_iter().enumerate() {
                out[k] = &out[k] + &v;
            }
        }
        out
    }

    /// True when the form vanishes identically on the line.
    pub fn vanishes_on(&self, l: &ProjLine) -> bool {
        let (a, b) = two_points_on(l);
        self.restrict(&a, &b).iter().all(CycNum::is_zero)
    }

    /// Exact quotient by a linear form, if it divides.
    pub fn divide_linear(&self, l: &ProjLine) -> Option<Form> {
        let lc = l.coeffs();
        let v = lc.iter().position(|c| !c.is_zero()).unwrap();
        let key = |m: &Monomial| {
            let e = [m.0, m.1, m.2];
            (e[v], e)
        };
        let lin = Form::linear(l);
        let lead_inv = lc[v].inv().unwrap();
        let mut rem = self.clone();
        let mut q = Form::zero(self.degree.checked_sub(1)?, self.order);
        while let Some((&m, c)) = rem.coeffs.iter().max_by_key(|(m, _)| key(m)) {
            let mut e = [m.0, m.1, m.2];
            if e[v] == 0 {
                return None;
            }
            e[v] -= 1;
            let t = Form::new(self.degree - 1, [((e[0], e[1], e[2]), c * &lead_inv)]).unwrap();
            rem = rem.add(&t.mul(&lin).scale(&CycNum::from_int(1, -1)));
            q = q.add(&t);
        }
        Some(q)
    }

    /// Scaled so that the first nonzero coefficient in monomial order is 1.
    pub fn normalized(&self) -> Form {
        match monomials(self.degree)
            .into_iter()
            .find_map(|m| self.coeffs.get(&m).cloned())
        {
            Some(c) => self.scale(&c.inv().unwrap()),
            None => self.clone(),
        }
    }

    pub fn proportional(&self, other: &Form) -> bool {
        self.degree == other.degree && self.normalized() == other.normalized()
    }
}

/// Two distinct points spanning the line.
pub fn two_points_on(l: &ProjLine) -> (Vec3, Vec3) {
    let c = l.coeffs();
    let order = c[0].order();
    let e: [Vec3; 3] =
        std::array::from_fn(|i| std::array::from_fn(|j| CycNum::from_int(order, (i == j) as i64)));
    // crossing with two coordinate vectors not both parallel to the normal
    let mut pts: Vec<Vec3> = e
        .iter()
        .map(|ei| crate::projgeom::cross(c, ei))
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    let a = pts.remove(0);
    let b = pts
        .into_iter()
        .find(|b| crate::projgeom::cross(&a, b).iter().any(|x| !x.is_zero()))
        .expect("a line has two independent points");
    (a, b)
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for m in monomials(self.degree) {
            if let Some(c) = self.coeffs.get(&m) {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({c})")?;
                for (name, e) in [("x", m.0), ("y", m.1), ("z", m.2)] {
                    match e {
                        0 => {}
                        1 => write!(f, "{name}")?,
                        _ => write!(f, "{name}^{e}")?,
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form[{self}]")
    }
}

/// A plane curve of degree ≥ 1, optionally with a known factorization.
#[derive(Clone, PartialEq, Eq)]
pub struct Curve {
    form: Form,
    components: Option<Vec<(Curve, u32)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveMembership {
    pub point: ProjPoint,
    pub on_curve: bool,
    pub singular: bool,
    pub component_index: Option<usize>,
}

/// Indices of configuration points per component, plus the leftovers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    pub parts: Vec<Vec<usize>>,
    pub err: Vec<usize>,
}

impl Curve {
    pub fn new(form: Form) -> Result<Self, CurveError> {
        if form.degree == 0 {
            return Err(CurveError::ZeroDegree);
        }
        if form.is_zero() {
            return Err(CurveError::ZeroPolynomial);
        }
        Ok(Curve {
            form,
            components: None,
        })
    }

    pub fn from_ints(
        order: u32,
        degree: u32,
        terms: &[(Monomial, i64)],
    ) -> Result<Self, CurveError> {
        Self::new(Form::from_ints(order, degree, terms)?)
    }

    pub fn line(l: &ProjLine) -> Self {
        Curve {
            form: Form::linear(l),
            components: None,
        }
    }

    /// The product of the components with multiplicity.
    pub fn product(components: Vec<(Curve, u32)>) -> Result<Self, CurveError> {
        let mut it = components.iter();
        let (first, k) = it.next().ok_or(CurveError::ZeroPolynomial)?;
        let mut form = first.form.clone();
        for _ in 1..*k {
            form = form.mul(&first.form);
        }
        for (c, k) in it {
            for _ in 0..*k {
                form = form.mul(&c.form);
            }
        }
        let components = components
            .into_iter()
            .map(|(c, k)| (c.without_components(), k))
            .collect();
        Ok(Curve {
            form,
            components: Some(components),
        })
    }

    /// Attaches a factorization after checking that it multiplies out to
    /// a scalar multiple of the curve.
    pub fn with_components(self, components: Vec<(Curve, u32)>) -> Result<Self, CurveError> {
        let prod = Curve::product(components)?;
        if !prod.form.proportional(&self.form) {
            return Err(CurveError::BadComponents);
        }
        Ok(Curve {
            form: self.form,
            components: prod.components,
        })
    }

    fn without_components(self) -> Curve {
        Curve {
            form: self.form,
            components: None,
        }
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn degree(&self) -> u32 {
        self.form.degree
    }

    pub fn order(&self) -> u32 {
        self.form.order
    }

    pub fn components(&self) -> Option<&[(Curve, u32)]> {
        self.components.as_deref()
    }

    /// The defining line of a degree-1 curve.
    pub fn as_line(&self) -> Option<ProjLine> {
        (self.degree() == 1).then(|| {
            ProjLine::new(
                self.form.coeff((1, 0, 0)),
                self.form.coeff((0, 1, 0)),
                self.form.coeff((0, 0, 1)),
            )
            .unwrap()
        })
    }

    pub fn eval(&self, p: &ProjPoint) -> CycNum {
        self.form.eval(p)
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        self.eval(p).is_zero()
    }

    fn gradient_vanishes(&self, p: &ProjPoint) -> bool {
        (0..3).all(|i| self.form.partial(i).eval(p).is_zero())
    }

    pub fn is_singular(&self, p: &ProjPoint) -> Result<bool, CurveError> {
        if !self.contains(p) {
            return Err(CurveError::NotOnCurve(p.to_string()));
        }
        Ok(self.gradient_vanishes(p))
    }

    /// Membership with respect to the reduced curve: a point lying on one
    /// component only, and smooth there, gets that component's index.
    pub fn membership(&self, p: &ProjPoint) -> CurveMembership {
        let on_curve = self.contains(p);
        let (singular, component_index) = match &self.components {
            None => (on_curve && self.gradient_vanishes(p), None),
            Some(comps) => {
                let hits: Vec<usize> = (0..comps.len())
                    .filter(|&i| comps[i].0.contains(p))
                    .collect();
                if hits.len() == 1 && !comps[hits[0]].0.gradient_vanishes(p) {
                    (false, Some(hits[0]))
                } else {
                    (on_curve, None)
                }
            }
        };
        CurveMembership {
            point: p.clone(),
            on_curve,
            singular,
            component_index,
        }
    }

    pub fn assign_components(&self, points: &[ProjPoint]) -> ComponentPartition {
        let n = self.components.as_ref().map_or(1, Vec::len);
        let mut parts = vec![Vec::new(); n];
        let mut err = Vec::new();
        for (idx, p) in points.iter().enumerate() {
            let m = self.membership(p);
            match (m.component_index, &self.components) {
                (Some(c), _) => parts[c].push(idx),
                (None, None) if m.on_curve && !m.singular => parts[0].push(idx),
                _ => err.push(idx),
            }
        }
        ComponentPartition { parts, err }
    }

    /// Image under `t`: the curve `P ∘ t⁻¹`, components included.
    pub fn transform(&self, t: &ProjTransform) -> Curve {
        let inv = t.inverse();
        Curve {
            form: self.form.substitute(inv.matrix()).normalized(),
            components: self
                .components
                .as_ref()
                .map(|cs| cs.iter().map(|(c, k)| (c.transform(t), *k)).collect()),
        }
    }

    /// Splits off linear factors among `candidates` (tried in order, each
    /// as often as it divides). What remains, if of positive degree, is
    /// recorded as one more component.
    pub fn split_linear_factors(&self, candidates: &[ProjLine]) -> Curve {
        let mut rest = self.form.clone();
        let mut comps: Vec<(Curve, u32)> = Vec::new();
        for l in candidates {
            if rest.degree == 0 {
                break;
            }
            let mut k = 0;
            while rest.degree > 0 && rest.vanishes_on(l) {
                rest = rest
                    .divide_linear(l)
                    .expect("a form vanishing on a line is divisible by it");
                k += 1;
            }
            if k > 0 {
                comps.push((Curve::line(l), k));
            }
        }
        if rest.degree > 0 {
            comps.push((
                Curve {
                    form: rest.normalized(),
                    components: None,
                },
                1,
            ));
        }
        Curve {
            form: self.form.clone(),
            components: Some(comps),
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.form)
    }
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve[{}]", self.form)?;
        if let Some(cs) = &self.components {
            write!(f, " = ")?;
            for (c, k) in cs {
                write!(f, "({})^{k} ", c.form)?;
            }
        }
        Ok(())
    }
}

/// Monomial evaluation matrix: one row per point, one column per monomial.
pub fn monomial_matrix(points: &[ProjPoint], d: u32) -> linalg::Matrix {
    let monos = monomials(d);
    points
        .iter()
        .map(|p| {
            monos
                .iter()
                .map(|&m| monomial_value(m, p.coords()))
                .collect()
        })
        .collect()
}

/// A degree-`d` curve through all points, or `None` when no such curve
/// exists. Among a nullspace basis the vector for the first free column
/// is returned, canonically scaled.
pub fn fit_curve(points: &[ProjPoint], d: u32) -> Option<Curve> {
    assert!(d >= 1);
    let order = common_order(points.iter().flat_map(|p| p.coords().iter())).ok()?;
    let points: Vec<ProjPoint> = points
        .iter()
        .map(|p| p.embed(order))
        .collect::<Result<_, _>>()
        .ok()?;
    let monos = monomials(d);
    let m = monomial_matrix(&points, d);
    let basis = if m.is_empty() {
        let mut v = vec![CycNum::zero(order); monos.len()];
        v[0] = CycNum::one(order);
        vec![v]
    } else {
        linalg::nullspace(&m, monos.len(), order)
    };
    let v = basis.into_iter().next()?;
    let form = Form::new(d, monos.into_iter().zip(v)).ok()?.normalized();
    Curve::new(form).ok()
}
