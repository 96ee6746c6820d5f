//! The group law on the smooth locus of a plane cubic.
//!
//! Every cubic kind is first moved to a normal position by a projective
//! transform; the coordinate charts are exact rational maps defined there.
//! Smooth cubics use chord-tangent addition with an inflection point as
//! the identity.

use std::fmt;

use thiserror::Error;

use crate::curves::{monomials, Curve, CurveError, Form};
use crate::cycfield::{CycError, CycNum};
use crate::linalg;
use crate::projgeom::{
    concurrent, cross, meet, transform_from_points, transform_mapping_lines, GeomError, ProjLine,
    ProjPoint, ProjTransform, Vec3,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CubicError {
    #[error("expected a cubic, got degree {0}")]
    NotCubic(u32),
    #[error("unsupported cubic: {0}")]
    Unsupported(String),
    #[error("no inflection point found; supply a base point")]
    NoInflection,
    #[error("base point {0} is not an inflection point of the curve")]
    NotInflection(String),
    #[error("required radical does not exist in the working field: {0}")]
    NoRadical(String),
    #[error("point {0} is not a smooth point of the cubic")]
    NotSmoothPoint(String),
    #[error("points violate the component balance condition")]
    ComponentBalance,
    #[error("value {0} is outside the chart of component {1}")]
    OutsideChart(String, usize),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Field(#[from] CycError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CubicKind {
    ThreeNonconcurrentLines,
    ThreeConcurrentLines,
    ConicPlusLine2pt,
    ConicPlusLine1pt,
    Nodal,
    Cuspidal,
    Smooth,
}

impl CubicKind {
    pub const ALL: [CubicKind; 7] = [
        CubicKind::ThreeNonconcurrentLines,
        CubicKind::ThreeConcurrentLines,
        CubicKind::ConicPlusLine2pt,
        CubicKind::ConicPlusLine1pt,
        CubicKind::Nodal,
        CubicKind::Cuspidal,
        CubicKind::Smooth,
    ];

    pub fn is_multiplicative(self) -> bool {
        matches!(
            self,
            CubicKind::ThreeNonconcurrentLines | CubicKind::ConicPlusLine2pt | CubicKind::Nodal
        )
    }

    pub fn is_additive(self) -> bool {
        matches!(
            self,
            CubicKind::ThreeConcurrentLines | CubicKind::ConicPlusLine1pt | CubicKind::Cuspidal
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            CubicKind::ThreeNonconcurrentLines => "three-nonconcurrent-lines",
            CubicKind::ThreeConcurrentLines => "three-concurrent-lines",
            CubicKind::ConicPlusLine2pt => "conic-plus-line-2pt",
            CubicKind::ConicPlusLine1pt => "conic-plus-line-1pt",
            CubicKind::Nodal => "nodal",
            CubicKind::Cuspidal => "cuspidal",
            CubicKind::Smooth => "smooth",
        }
    }
}

impl fmt::Display for CubicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupValue {
    Scalar(CycNum),
    Point(ProjPoint),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub kind: CubicKind,
    pub value: GroupValue,
    pub component_index: usize,
}

#[derive(Clone, Debug)]
enum Chart {
    /// Coordinate lines x = 0, y = 0, z = 0 for components 0, 1, 2.
    Triangle,
    /// Lines x = a_i z through [0:1:0], with weights w_i.
    Concurrent {
        a: [CycNum; 3],
        w: [CycNum; 3],
    },
    /// Conic yz = x² with the line x = 0 (two points) or z = 0 (tangent).
    ConicLine {
        conic: usize,
        line: usize,
    },
    /// c·xyz + αx³ + βx²y + γxy² + δy³ with κ³ = −δ/α.
    Nodal {
        c: CycNum,
        f3: [CycNum; 4],
        kappa: CycNum,
    },
    /// c·y²z + αx³ + βx²y + γxy² + δy³.
    Cuspidal {
        c: CycNum,
        f3: [CycNum; 4],
    },
    Smooth {
        identity: ProjPoint,
    },
}

/// Exact coordinate charts for one cubic.
#[derive(Clone, Debug)]
pub struct GroupMap {
    cubic: Curve,
    kind: CubicKind,
    to_normal: ProjTransform,
    chart: Chart,
}

fn neg_one(order: u32) -> CycNum {
    CycNum::from_int(order, -1)
}

/// Roots `[s : t]` of the binary quadratic `c0 s² + c1 s t + c2 t²`,
/// as points `s·a + t·b`.
fn quadratic_points(c: &[CycNum], a: &Vec3, b: &Vec3) -> Result<Vec<ProjPoint>, CubicError> {
    let comb =
        |s: &CycNum, t: &CycNum| -> Vec3 { std::array::from_fn(|i| &(s * &a[i]) + &(t * &b[i])) };
    let order = crate::projgeom::common_order(c.iter().chain(a.iter()).chain(b.iter()))?;
    let one = CycNum::one(order);
    if c[2].is_zero() {
        let mut out = vec![ProjPoint::from_vec(b)?];
        if !c[1].is_zero() {
            out.push(ProjPoint::from_vec(&comb(&c[1], &-&c[0]))?);
        }
        return Ok(out);
    }
    let disc = &(&c[1] * &c[1]) - &(&c[0] * &c[2]).scale_int(4);
    if disc.is_zero() {
        let t = -&(&c[1] * &c[2].scale_int(2).inv()?);
        return Ok(vec![ProjPoint::from_vec(&comb(&one, &t))?]);
    }
    let sq = disc
        .nth_root(2)
        .ok_or_else(|| CubicError::NoRadical(format!("sqrt({disc})")))?;
    let den = c[2].scale_int(2).inv()?;
    let t1 = &(&-&c[1] + &sq) * &den;
    let t2 = &(&-&c[1] - &sq) * &den;
    Ok(vec![
        ProjPoint::from_vec(&comb(&one, &t1))?,
        ProjPoint::from_vec(&comb(&one, &t2))?,
    ])
}

fn tangent_line(f: &Form, p: &ProjPoint) -> Result<ProjLine, CubicError> {
    let g: Vec3 = std::array::from_fn(|i| f.partial(i).eval(p));
    Ok(ProjLine::from_vec(&g)?)
}

fn conic_is_degenerate(q: &Form) -> bool {
    let c = |m| q.coeff(m);
    let two = |m| q.coeff(m).scale_int(2);
    let m: crate::projgeom::Mat3 = [
        [two((2, 0, 0)), c((1, 1, 0)), c((1, 0, 1))],
        [c((1, 1, 0)), two((0, 2, 0)), c((0, 1, 1))],
        [c((1, 0, 1)), c((0, 1, 1)), two((0, 0, 2))],
    ];
    crate::projgeom::mat_det(&m).is_zero()
}

/// Unit vectors completing `p` to a basis, as a transform sending `p` to [0:0:1].
fn move_to_e3(p: &ProjPoint) -> Result<ProjTransform, CubicError> {
    let order = p.order();
    let e: Vec<ProjPoint> = (0..3)
        .map(|i| ProjPoint::from_ints(order, std::array::from_fn(|j| (i == j) as i64)).unwrap())
        .collect();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if let Ok(t) = transform_from_points(&[e[i].clone(), e[j].clone(), p.clone()]) {
            return Ok(t);
        }
    }
    unreachable!("some pair of unit vectors completes any point to a basis")
}

/// Evaluation functionals annihilating the degree-`deg` part of the ideal
/// generated by `gens`.
fn dual_points(gens: &[Form], deg: u32, order: u32) -> Vec<Vec<CycNum>> {
    let monos = monomials(deg);
    let mut rows = Vec::new();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        for m in monomials(deg - g.degree()) {
            let prod = g.mul(&Form::new(deg - g.degree(), [(m, CycNum::one(order))]).unwrap());
            rows.push(monos.iter().map(|&mm| prod.coeff(mm)).collect());
        }
    }
    linalg::nullspace(&rows, monos.len(), order)
}

/// The unique singular point of an irreducible cubic, or `None` when the
/// cubic is smooth.
pub fn singular_point(c: &Curve) -> Result<Option<ProjPoint>, CubicError> {
    if c.degree() != 3 {
        return Err(CubicError::NotCubic(c.degree()));
    }
    let f = c.form();
    let order = f.order();
    let deg = 6;
    let mut gens: Vec<Form> = f.gradient().to_vec();
    let mut dual = dual_points(&gens, deg, order);
    if dual.is_empty() {
        return Ok(None);
    }
    if dual.len() > 1 {
        // cusps give a non-reduced scheme; the Hessian minors cut it down
        let h: Vec<Vec<Form>> = (0..3)
            .map(|i| (0..3).map(|j| f.partial(i).partial(j)).collect())
            .collect();
        for (r1, r2) in [(0, 1), (0, 2), (1, 2)] {
            for (c1, c2) in [(0, 1), (0, 2), (1, 2)] {
                let m = h[r1][c1]
                    .mul(&h[r2][c2])
                    .add(&h[r1][c2].mul(&h[r2][c1]).scale(&neg_one(order)));
                gens.push(m);
            }
        }
        dual = dual_points(&gens, deg, order);
    }
    if dual.len() != 1 {
        return Err(CubicError::Unsupported(
            "cubic is reducible or has several singular points; supply components".into(),
        ));
    }
    let v = &dual[0];
    let monos = monomials(deg);
    let idx = |m| monos.iter().position(|&x| x == m).unwrap();
    let pure = [(deg, 0, 0), (0, deg, 0), (0, 0, deg)];
    let i = (0..3)
        .find(|&i| !v[idx(pure[i])].is_zero())
        .expect("evaluation functional is nonzero on some pure power");
    let lead = v[idx(pure[i])].inv()?;
    let coords: Vec3 = std::array::from_fn(|j| {
        if j == i {
            CycNum::one(order)
        } else {
            let mut e = [0u32; 3];
            e[i] = deg - 1;
            e[j] = 1;
            &v[idx((e[0], e[1], e[2]))] * &lead
        }
    });
    let p = ProjPoint::from_vec(&coords)?;
    if !c.is_singular(&p).unwrap_or(false) {
        return Err(CubicError::Unsupported(
            "singular locus is not a single point".into(),
        ));
    }
    Ok(Some(p))
}

impl GroupMap {
    /// Charts for a cubic whose components (if reducible) are attached.
    /// Smooth cubics need an inflection point; the coordinate vertices are
    /// tried, otherwise use [`GroupMap::with_base_point`].
    pub fn build(c: &Curve) -> Result<Self, CubicError> {
        Self::build_inner(c, None)
    }

    pub fn with_base_point(c: &Curve, base: &ProjPoint) -> Result<Self, CubicError> {
        Self::build_inner(c, Some(base))
    }

    fn build_inner(c: &Curve, base: Option<&ProjPoint>) -> Result<Self, CubicError> {
        if c.degree() != 3 {
            return Err(CubicError::NotCubic(c.degree()));
        }
        let comps: Vec<&Curve> = match c.components() {
            None => vec![c],
            Some(cs) => {
                if cs.iter().any(|(_, k)| *k != 1) {
                    return Err(CubicError::Unsupported("repeated component".into()));
                }
                cs.iter().map(|(c, _)| c).collect()
            }
        };
        let degrees: Vec<u32> = comps.iter().map(|c| c.degree()).collect();
        match degrees.as_slice() {
            [1, 1, 1] => {
                let lines: [ProjLine; 3] = std::array::from_fn(|i| comps[i].as_line().unwrap());
                if lines[0] == lines[1] || lines[0] == lines[2] || lines[1] == lines[2] {
                    return Err(CubicError::Unsupported("repeated line".into()));
                }
                if concurrent(&lines[0], &lines[1], &lines[2]) {
                    Self::concurrent_lines(c, &lines)
                } else {
                    let t =
                        transform_mapping_lines(&lines, &ProjLine::coordinate_lines(c.order()))?;
                    Ok(GroupMap {
                        cubic: c.clone(),
                        kind: CubicKind::ThreeNonconcurrentLines,
                        to_normal: t,
                        chart: Chart::Triangle,
                    })
                }
            }
            [2, 1] => Self::conic_line(c, comps[0], comps[1], 0, 1),
            [1, 2] => Self::conic_line(c, comps[1], comps[0], 1, 0),
            [3] => match singular_point(c)? {
                Some(p) => Self::singular(c, &p),
                None => Self::smooth(c, base),
            },
            _ => Err(CubicError::Unsupported(format!(
                "component degrees {degrees:?}"
            ))),
        }
    }

    fn concurrent_lines(c: &Curve, lines: &[ProjLine; 3]) -> Result<Self, CubicError> {
        let order = c.order();
        let o = meet(&lines[0], &lines[1])?;
        let k = (0..3).find(|&k| !o.coords()[k].is_zero()).unwrap();
        let ek: Vec3 = std::array::from_fn(|j| CycNum::from_int(order, (j == k) as i64));
        let l0 = lines[0].coeffs();
        let l1 = lines[1].coeffs();
        // a third line through O, different from all three components
        let r3 = (1..=3)
            .map(|s| -> Vec3 { std::array::from_fn(|i| &l0[i] + &l1[i].scale_int(s)) })
            .find(|v| {
                let l = ProjLine::from_vec(v).unwrap();
                !lines.contains(&l)
            })
            .unwrap();
        let t = ProjTransform::new([l0.clone(), ek, r3])?;
        let mut a: Vec<CycNum> = Vec::new();
        for l in lines {
            let img = t.apply_line(l);
            let (p, q) = (&img.coeffs()[0], &img.coeffs()[2]);
            a.push(-&(q * &p.inv()?));
        }
        let a: [CycNum; 3] = a.try_into().unwrap();
        let w = [&a[1] - &a[2], &a[2] - &a[0], &a[0] - &a[1]];
        Ok(GroupMap {
            cubic: c.clone(),
            kind: CubicKind::ThreeConcurrentLines,
            to_normal: t,
            chart: Chart::Concurrent { a, w },
        })
    }

    fn conic_line(
        c: &Curve,
        conic: &Curve,
        line: &Curve,
        ci: usize,
        li: usize,
    ) -> Result<Self, CubicError> {
        let q = conic.form();
        if conic_is_degenerate(q) {
            return Err(CubicError::Unsupported("degenerate conic component".into()));
        }
        let l = line.as_line().unwrap();
        let (a, b) = crate::curves::two_points_on(&l);
        let hits = quadratic_points(&q.restrict(&a, &b), &a, &b)?;
        let (p, r, kind) = if hits.len() == 2 {
            (
                hits[0].clone(),
                hits[1].clone(),
                CubicKind::ConicPlusLine2pt,
            )
        } else {
            // second point of an auxiliary line through the tangency point
            let p = hits[0].clone();
            let order = p.order();
            let aux = (0..4)
                .map(|i| {
                    ProjPoint::from_ints(
                        order,
                        if i < 3 {
                            std::array::from_fn(|j| (i == j) as i64)
                        } else {
                            [1, 1, 1]
                        },
                    )
                    .unwrap()
                })
                .find(|x| x != &p && !l.contains(x))
                .unwrap();
            let coeffs = q.restrict(p.coords(), aux.coords());
            let r = if coeffs[2].is_zero() {
                aux
            } else {
                let t = -&(&coeffs[1] * &coeffs[2].inv()?);
                ProjPoint::from_vec(&std::array::from_fn(|i| {
                    &p.coords()[i] + &(&t * &aux.coords()[i])
                }))?
            };
            (p, r, CubicKind::ConicPlusLine1pt)
        };
        let tp = tangent_line(q, &p)?;
        let tr = tangent_line(q, &r)?;
        let apex = meet(&tp, &tr)?;
        let frame = transform_from_points(&[apex, p, r])?;
        let qn = q.substitute(frame.inverse().matrix());
        let mu = -&(&qn.coeff((0, 1, 1)) * &qn.coeff((2, 0, 0)).inv()?);
        let d = ProjTransform::diagonal([CycNum::one(c.order()), mu, CycNum::one(c.order())])?;
        let t = d.compose(&frame);
        Ok(GroupMap {
            cubic: c.clone(),
            kind,
            to_normal: t,
            chart: Chart::ConicLine {
                conic: ci,
                line: li,
            },
        })
    }

    fn singular(c: &Curve, node: &ProjPoint) -> Result<Self, CubicError> {
        let order = c.order();
        let t0 = move_to_e3(node)?;
        let f1 = c.form().substitute(t0.inverse().matrix());
        let (a, b, cc) = (
            f1.coeff((2, 0, 1)),
            f1.coeff((1, 1, 1)),
            f1.coeff((0, 2, 1)),
        );
        let disc = &(&b * &b) - &(&a * &cc).scale_int(4);
        let zero = CycNum::zero(order);
        let one = CycNum::one(order);
        let rows: [Vec3; 2] = if !disc.is_zero() {
            // tangent lines through the node
            if a.is_zero() {
                [
                    [zero.clone(), one.clone(), zero.clone()],
                    [b.clone(), cc.clone(), zero.clone()],
                ]
            } else {
                let sq = disc
                    .nth_root(2)
                    .ok_or_else(|| CubicError::NoRadical(format!("sqrt({disc})")))?;
                let den = a.scale_int(2).inv()?;
                let r1 = &(&-&b + &sq) * &den;
                let r2 = &(&-&b - &sq) * &den;
                [
                    [one.clone(), -&r1, zero.clone()],
                    [one.clone(), -&r2, zero.clone()],
                ]
            }
        } else if a.is_zero() && b.is_zero() {
            if cc.is_zero() {
                return Err(CubicError::Unsupported(
                    "triple point: the cubic is a union of lines".into(),
                ));
            }
            [
                [one.clone(), zero.clone(), zero.clone()],
                [zero.clone(), one.clone(), zero.clone()],
            ]
        } else {
            // tangent x - r y with r = -b / 2a
            let r = -&(&b * &a.scale_int(2).inv()?);
            [
                [zero.clone(), one.clone(), zero.clone()],
                [one.clone(), -&r, zero.clone()],
            ]
        };
        let [r1, r2] = rows;
        let lin = ProjTransform::new([r1, r2, [zero.clone(), zero.clone(), one.clone()]])?;
        let t = lin.compose(&t0);
        let f = c.form().substitute(t.inverse().matrix());
        let f3 = [
            f.coeff((3, 0, 0)),
            f.coeff((2, 1, 0)),
            f.coeff((1, 2, 0)),
            f.coeff((0, 3, 0)),
        ];
        if disc.is_zero() {
            if f3[0].is_zero() {
                return Err(CubicError::Unsupported(
                    "cusp tangent lies on the curve".into(),
                ));
            }
            let c2 = f.coeff((0, 2, 1));
            Ok(GroupMap {
                cubic: c.clone(),
                kind: CubicKind::Cuspidal,
                to_normal: t,
                chart: Chart::Cuspidal { c: c2, f3 },
            })
        } else {
            if f3[0].is_zero() || f3[3].is_zero() {
                return Err(CubicError::Unsupported(
                    "a nodal tangent lies on the curve".into(),
                ));
            }
            let ratio = -&(&f3[3] * &f3[0].inv()?);
            let kappa = ratio
                .nth_root(3)
                .ok_or_else(|| CubicError::NoRadical(format!("cbrt({ratio})")))?;
            let c1 = f.coeff((1, 1, 1));
            Ok(GroupMap {
                cubic: c.clone(),
                kind: CubicKind::Nodal,
                to_normal: t,
                chart: Chart::Nodal { c: c1, f3, kappa },
            })
        }
    }

    fn smooth(c: &Curve, base: Option<&ProjPoint>) -> Result<Self, CubicError> {
        let h = c.form().hessian();
        let is_flex = |p: &ProjPoint| c.contains(p) && h.eval(p).is_zero();
        let identity = match base {
            Some(b) if is_flex(b) => b.clone(),
            Some(b) => return Err(CubicError::NotInflection(b.to_string())),
            None => (0..3)
                .map(|i| {
                    ProjPoint::from_ints(c.order(), std::array::from_fn(|j| (i == j) as i64))
                        .unwrap()
                })
                .find(is_flex)
                .ok_or(CubicError::NoInflection)?,
        };
        Ok(GroupMap {
            cubic: c.clone(),
            kind: CubicKind::Smooth,
            to_normal: ProjTransform::identity(c.order()),
            chart: Chart::Smooth { identity },
        })
    }

    pub fn kind(&self) -> CubicKind {
        self.kind
    }

    pub fn cubic(&self) -> &Curve {
        &self.cubic
    }

    /// Transform to the normal position the charts are written in.
    pub fn normalizing_transform(&self) -> &ProjTransform {
        &self.to_normal
    }

    pub fn component_count(&self) -> usize {
        self.cubic.components().map_or(1, <[_]>::len)
    }

    /// Component index of a smooth point, or an error for singular or
    /// off-curve points.
    pub fn component_of(&self, p: &ProjPoint) -> Result<usize, CubicError> {
        let m = self.cubic.membership(p);
        match (m.component_index, self.cubic.components()) {
            (Some(i), _) => Ok(i),
            (None, None) if m.on_curve && !m.singular => Ok(0),
            _ => Err(CubicError::NotSmoothPoint(p.to_string())),
        }
    }

    pub fn rho(&self, p: &ProjPoint) -> Result<GroupElement, CubicError> {
        let comp = self.component_of(p)?;
        let q = self.to_normal.apply(p);
        let v = q.coords();
        let div = |a: &CycNum, b: &CycNum| -> Result<CycNum, CubicError> { Ok(a * &b.inv()?) };
        let value = match &self.chart {
            Chart::Triangle => GroupValue::Scalar(match comp {
                0 => div(&v[1], &v[2])?,
                1 => -&div(&v[2], &v[0])?,
                _ => div(&v[0], &v[1])?,
            }),
            Chart::Concurrent { w, .. } => GroupValue::Scalar(&w[comp] * &div(&v[1], &v[2])?),
            Chart::ConicLine { conic, .. } => GroupValue::Scalar(if comp == *conic {
                div(&v[0], &v[2])?
            } else if self.kind == CubicKind::ConicPlusLine2pt {
                -&div(&v[2], &v[1])?
            } else {
                -&div(&v[1], &v[0])?
            }),
            Chart::Nodal { kappa, .. } => GroupValue::Scalar(kappa * &div(&v[1], &v[0])?),
            Chart::Cuspidal { f3, .. } => {
                let shift = div(&f3[1], &f3[0].scale_int(3))?;
                GroupValue::Scalar(&div(&v[0], &v[1])? + &shift)
            }
            Chart::Smooth { .. } => GroupValue::Point(p.clone()),
        };
        Ok(GroupElement {
            kind: self.kind,
            value,
            component_index: comp,
        })
    }

    /// Inverse chart: the smooth point of `component` with the given
    /// scalar value. Not available for smooth cubics.
    pub fn point_of(&self, component: usize, value: &CycNum) -> Result<ProjPoint, CubicError> {
        let order = self.cubic.order();
        let one = CycNum::one(order);
        let zero = CycNum::zero(order);
        let outside = || CubicError::OutsideChart(value.to_string(), component);
        if self.kind.is_multiplicative() && value.is_zero() {
            return Err(outside());
        }
        let normal: Vec3 = match &self.chart {
            Chart::Triangle => match component {
                0 => [zero, value.clone(), one],
                1 => [one, zero, -value],
                _ => [value.clone(), one, zero],
            },
            Chart::Concurrent { a, w } => [a[component].clone(), value * &w[component].inv()?, one],
            Chart::ConicLine { conic, .. } => {
                if component == *conic {
                    [value.clone(), value * value, one]
                } else if self.kind == CubicKind::ConicPlusLine2pt {
                    [zero, neg_one(order), value.clone()]
                } else {
                    [one, -value, zero]
                }
            }
            Chart::Nodal { c, f3, kappa } => {
                let u = value * &kappa.inv()?;
                let g =
                    &(&(&f3[0] + &(&f3[1] * &u)) + &(&f3[2] * &u.pow(2))) + &(&f3[3] * &u.pow(3));
                [-&(c * &u), -&(c * &u.pow(2)), g]
            }
            Chart::Cuspidal { c, f3 } => {
                let w = value - &(&f3[1] * &f3[0].scale_int(3).inv()?);
                let h =
                    &(&(&(&f3[0] * &w.pow(3)) + &(&f3[1] * &w.pow(2))) + &(&f3[2] * &w)) + &f3[3];
                [-&(c * &w), -c, h]
            }
            Chart::Smooth { .. } => {
                return Err(CubicError::Unsupported(
                    "smooth cubics have no scalar chart".into(),
                ))
            }
        };
        let p = self
            .to_normal
            .inverse()
            .apply(&ProjPoint::from_vec(&normal).map_err(|_| outside())?);
        if self.component_of(&p).ok() != Some(component) {
            return Err(outside());
        }
        Ok(p)
    }

    /// The identity of the chord-tangent law (smooth cubics only).
    pub fn identity_point(&self) -> Option<&ProjPoint> {
        match &self.chart {
            Chart::Smooth { identity } => Some(identity),
            _ => None,
        }
    }

    /// Third intersection of the line through `p` and `q` (the tangent when
    /// they coincide) with the cubic.
    pub fn third_point(&self, p: &ProjPoint, q: &ProjPoint) -> Result<ProjPoint, CubicError> {
        third_point(&self.cubic, p, q)
    }

    pub fn add(&self, p: &ProjPoint, q: &ProjPoint) -> Result<ProjPoint, CubicError> {
        let o = self.identity_point().ok_or_else(|| {
            CubicError::Unsupported("chord-tangent law needs a smooth cubic".into())
        })?;
        chord_tangent_add(&self.cubic, o, p, q)
    }

    pub fn neg(&self, p: &ProjPoint) -> Result<ProjPoint, CubicError> {
        let o = self.identity_point().ok_or_else(|| {
            CubicError::Unsupported("chord-tangent law needs a smooth cubic".into())
        })?;
        third_point(&self.cubic, o, p)
    }

    /// Whether ρ(p) + ρ(q) + ρ(r) is the identity. The points must be
    /// distinct smooth points meeting every component in as many points as
    /// its degree.
    pub fn group_sum_is_zero(
        &self,
        p: &ProjPoint,
        q: &ProjPoint,
        r: &ProjPoint,
    ) -> Result<bool, CubicError> {
        if p == q || p == r || q == r {
            return Err(CubicError::ComponentBalance);
        }
        self.elements_sum_is_zero(&[self.rho(p)?, self.rho(q)?, self.rho(r)?])
    }

    /// Same test on precomputed chart values of three distinct points.
    pub fn elements_sum_is_zero(&self, els: &[GroupElement; 3]) -> Result<bool, CubicError> {
        let mut counts = vec![0u32; self.component_count()];
        for e in els {
            counts[e.component_index] += 1;
        }
        let balanced = match self.cubic.components() {
            None => true,
            Some(cs) => cs.iter().zip(&counts).all(|((c, _), &n)| c.degree() == n),
        };
        if !balanced {
            return Err(CubicError::ComponentBalance);
        }
        match &els.each_ref().map(|e| &e.value) {
            [GroupValue::Point(p), GroupValue::Point(q), GroupValue::Point(r)] => {
                let s = self.add(&self.add(p, q)?, r)?;
                Ok(Some(&s) == self.identity_point())
            }
            [GroupValue::Scalar(a), GroupValue::Scalar(b), GroupValue::Scalar(c)] => {
                Ok(if self.kind.is_multiplicative() {
                    (&(a * b) * c).is_one()
                } else {
                    (&(a + b) + c).is_zero()
                })
            }
            _ => Err(CubicError::Unsupported(format!(
                "mixed group values for {}",
                self.kind
            ))),
        }
    }

    /// Human-readable chart description.
    pub fn describe(&self) -> Vec<String> {
        let mut out = vec![
            format!("kind: {}", self.kind),
            format!("curve: {}", self.cubic),
        ];
        if let Some(cs) = self.cubic.components() {
            for (i, (c, _)) in cs.iter().enumerate() {
                out.push(format!("component {i}: {c}"));
            }
        }
        let m = self.to_normal.matrix();
        for row in m {
            out.push(format!("normalize: [{} , {} , {}]", row[0], row[1], row[2]));
        }
        match &self.chart {
            Chart::Triangle => {
                out.push("chart 0: [0:y:z] -> y/z".into());
                out.push("chart 1: [x:0:z] -> -z/x".into());
                out.push("chart 2: [x:y:0] -> x/y".into());
                out.push("law: product = 1".into());
            }
            Chart::Concurrent { a, w } => {
                for i in 0..3 {
                    out.push(format!("chart {i}: [{} : y : 1] -> ({}) y", a[i], w[i]));
                }
                out.push("law: sum = 0".into());
            }
            Chart::ConicLine { conic, line } => {
                out.push(format!("chart {conic}: yz = x^2, [x:y:z] -> x/z"));
                if self.kind == CubicKind::ConicPlusLine2pt {
                    out.push(format!("chart {line}: x = 0, [0:y:z] -> -z/y"));
                    out.push("law: product = 1".into());
                } else {
                    out.push(format!("chart {line}: z = 0, [x:y:0] -> -y/x"));
                    out.push("law: sum = 0".into());
                }
            }
            Chart::Nodal { c, f3, kappa } => {
                out.push(format!(
                    "normal form: ({c})xyz + ({})x^3 + ({})x^2y + ({})xy^2 + ({})y^3",
                    f3[0], f3[1], f3[2], f3[3]
                ));
                out.push(format!("chart 0: [x:y:z] -> ({kappa}) y/x"));
                out.push("law: product = 1".into());
            }
            Chart::Cuspidal { c, f3 } => {
                out.push(format!(
                    "normal form: ({c})y^2z + ({})x^3 + ({})x^2y + ({})xy^2 + ({})y^3",
                    f3[0], f3[1], f3[2], f3[3]
                ));
                out.push(format!(
                    "chart 0: [x:y:z] -> x/y + ({})/(3*({}))",
                    f3[1], f3[0]
                ));
                out.push("law: sum = 0".into());
            }
            Chart::Smooth { identity } => {
                out.push(format!("identity: {identity}"));
                out.push("law: chord-tangent, collinear triples sum to the identity".into());
            }
        }
        out
    }
}

/// Third intersection of the chord (or tangent) through `p`, `q` with `c`.
pub fn third_point(c: &Curve, p: &ProjPoint, q: &ProjPoint) -> Result<ProjPoint, CubicError> {
    for x in [p, q] {
        if !c.contains(x) {
            return Err(CubicError::NotSmoothPoint(x.to_string()));
        }
    }
    let f = c.form();
    let (a, b) = if p != q {
        (p.coords().clone(), q.coords().clone())
    } else {
        let t = tangent_line(f, p).map_err(|_| CubicError::NotSmoothPoint(p.to_string()))?;
        let (u, v) = crate::curves::two_points_on(&t);
        let w = [u, v]
            .into_iter()
            .find(|w| cross(w, p.coords()).iter().any(|x| !x.is_zero()))
            .expect("a line has a point other than p");
        (p.coords().clone(), w)
    };
    // P(a + t b) = c0 + c1 t + c2 t^2 + c3 t^3
    let co = f.restrict(&a, &b);
    let v: Vec3 = if p != q {
        // roots t = 0 and t = ∞ are p and q
        std::array::from_fn(|i| &(&co[2] * &a[i]) - &(&co[1] * &b[i]))
    } else {
        // t = 0 is a double root
        std::array::from_fn(|i| &(&co[3] * &a[i]) - &(&co[2] * &b[i]))
    };
    ProjPoint::from_vec(&v)
        .map_err(|_| CubicError::Unsupported("line is contained in the curve".into()))
}

pub fn chord_tangent_add(
    c: &Curve,
    o: &ProjPoint,
    p: &ProjPoint,
    q: &ProjPoint,
) -> Result<ProjPoint, CubicError> {
    let r = third_point(c, p, q)?;
    third_point(c, o, &r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projgeom::collinear;

    fn pt(order: u32, v: [i64; 3]) -> ProjPoint {
        ProjPoint::from_ints(order, v).unwrap()
    }

    fn triangle(order: u32) -> Curve {
        let lines = ProjLine::coordinate_lines(order).map(|l| (Curve::line(&l), 1));
        Curve::product(lines.to_vec()).unwrap()
    }

    #[test]
    fn triangle_chart_values() {
        let z = crate::cycfield::zeta(5).unwrap();
        let g = GroupMap::build(&triangle(5)).unwrap();
        assert_eq!(g.kind(), CubicKind::ThreeNonconcurrentLines);
        let p = ProjPoint::new(CycNum::zero(5), z.clone(), CycNum::one(5)).unwrap();
        assert_eq!(g.rho(&p).unwrap().value, GroupValue::Scalar(z.clone()));
        let a = ProjPoint::new(CycNum::zero(5), -&z.pow(2), CycNum::one(5)).unwrap();
        assert_eq!(g.rho(&a).unwrap().value, GroupValue::Scalar(-&z.pow(2)));
        let pts = [pt(1, [0, 1, 1]), pt(1, [1, 0, 1]), pt(1, [-1, 1, 0])];
        let g1 = GroupMap::build(&triangle(1)).unwrap();
        assert!(g1.group_sum_is_zero(&pts[0], &pts[1], &pts[2]).unwrap());
        assert_eq!(
            g1.group_sum_is_zero(&pt(1, [0, 1, 1]), &pt(1, [0, 2, 1]), &pt(1, [1, 0, 1])),
            Err(CubicError::ComponentBalance)
        );
    }

    #[test]
    fn conic_chart_parametrization() {
        let conic = Curve::from_ints(1, 2, &[((0, 1, 1), 1), ((2, 0, 0), -1)]).unwrap();
        let line = Curve::line(&ProjLine::from_ints(1, [1, 0, 0]).unwrap());
        let c = Curve::product(vec![(conic, 1), (line, 1)]).unwrap();
        let g = GroupMap::build(&c).unwrap();
        assert_eq!(g.kind(), CubicKind::ConicPlusLine2pt);
        let v = g.rho(&pt(1, [6, 4, 9])).unwrap();
        // normal position may differ from the input by the chart's symmetries
        let GroupValue::Scalar(s) = v.value else {
            panic!()
        };
        assert!(s == CycNum::from_frac(1, 2, 3) || s == CycNum::from_frac(1, 3, 2));
    }

    #[test]
    fn smooth_chord_tangent_examples() {
        // y^2 z = x^3 - x z^2
        let c = Curve::from_ints(1, 3, &[((0, 2, 1), 1), ((3, 0, 0), -1), ((1, 0, 2), 1)]).unwrap();
        let g = GroupMap::build(&c).unwrap();
        assert_eq!(g.kind(), CubicKind::Smooth);
        let o = pt(1, [0, 1, 0]);
        assert_eq!(g.identity_point(), Some(&o));
        let (p, q, r) = (pt(1, [0, 0, 1]), pt(1, [1, 0, 1]), pt(1, [-1, 0, 1]));
        assert_eq!(g.add(&p, &q).unwrap(), r);
        assert!(g.group_sum_is_zero(&p, &q, &r).unwrap());
        assert_eq!(g.add(&p, &o).unwrap(), p);
        assert_eq!(g.add(&p, &g.neg(&p).unwrap()).unwrap(), o);
    }

    #[test]
    fn singular_point_detection() {
        let nodal =
            Curve::from_ints(1, 3, &[((1, 1, 1), 1), ((3, 0, 0), 1), ((0, 3, 0), -1)]).unwrap();
        assert_eq!(singular_point(&nodal).unwrap(), Some(pt(1, [0, 0, 1])));
        let cusp = Curve::from_ints(1, 3, &[((0, 2, 1), 1), ((3, 0, 0), -1)]).unwrap();
        assert_eq!(singular_point(&cusp).unwrap(), Some(pt(1, [0, 0, 1])));
        let smooth =
            Curve::from_ints(1, 3, &[((0, 2, 1), 1), ((3, 0, 0), -1), ((1, 0, 2), 1)]).unwrap();
        assert_eq!(singular_point(&smooth).unwrap(), None);
        assert_eq!(GroupMap::build(&nodal).unwrap().kind(), CubicKind::Nodal);
        assert_eq!(GroupMap::build(&cusp).unwrap().kind(), CubicKind::Cuspidal);
    }

    #[test]
    fn nodal_and_cuspidal_laws() {
        for c in [
            Curve::from_ints(1, 3, &[((1, 1, 1), 1), ((3, 0, 0), 1), ((0, 3, 0), -1)]).unwrap(),
            Curve::from_ints(1, 3, &[((0, 2, 1), 1), ((3, 0, 0), -1), ((2, 1, 0), 2)]).unwrap(),
        ] {
            let g = GroupMap::build(&c).unwrap();
            let vals: Vec<CycNum> = [1, 2, 3, -1, -2, 5, 7]
                .iter()
                .map(|&v| CycNum::from_frac(1, v, 3))
                .collect();
            let pts: Vec<ProjPoint> = vals.iter().filter_map(|v| g.point_of(0, v).ok()).collect();
            assert!(pts.len() >= 6);
            for (i, p) in pts.iter().enumerate() {
                for (j, q) in pts.iter().enumerate().skip(i + 1) {
                    for r in pts.iter().skip(j + 1) {
                        assert_eq!(g.group_sum_is_zero(p, q, r).unwrap(), collinear(p, q, r));
                    }
                }
            }
        }
    }
}
