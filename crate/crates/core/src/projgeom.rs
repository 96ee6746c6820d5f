//! Points, lines and projective transformations of the projective plane over Q(ζ_N).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cycfield::{CycError, CycNum};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("all homogeneous coordinates are zero")]
    ZeroVector,
    #[error("cannot join a point with itself")]
    DegenerateJoin,
    #[error("the three lines are concurrent")]
    DegenerateFrame,
    #[error("matrix is not invertible")]
    Singular,
    #[error("malformed point or line '{0}'")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] CycError),
}

pub type Vec3 = [CycNum; 3];

/// Promotes all entries to a common order and scales so that the first
/// nonzero entry equals 1.
fn canonical(v: &Vec3) -> Result<Vec3, GeomError> {
    let order = common_order(v.iter())?;
    let v: Vec<CycNum> = v.iter().map(|c| c.embed(order)).collect::<Result<_, _>>()?;
    let lead = v
        .iter()
        .position(|c| !c.is_zero())
        .ok_or(GeomError::ZeroVector)?;
    let s = v[lead].inv()?;
    Ok([&v[0] * &s, &v[1] * &s, &v[2] * &s])
}

pub fn common_order<'a>(it: impl Iterator<Item = &'a CycNum>) -> Result<u32, CycError> {
    let mut order = 1u32;
    for c in it {
        if !order.is_multiple_of(c.order()) {
            let l = num_integer::lcm(order, c.order());
            if l > crate::cycfield::MAX_PROMOTED_ORDER {
                return Err(CycError::OrderMismatch(order, c.order()));
            }
            order = l;
        }
    }
    Ok(order)
}

pub fn dot(a: &Vec3, b: &Vec3) -> CycNum {
    &(&(&a[0] * &b[0]) + &(&a[1] * &b[1])) + &(&a[2] * &b[2])
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
        &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
        &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
    ]
}

pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> CycNum {
    dot(a, &cross(b, c))
}

/// A point `[x : y : z]`, stored with its first nonzero coordinate equal to 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    coords: Vec3,
}

impl ProjPoint {
    pub fn new(x: CycNum, y: CycNum, z: CycNum) -> Result<Self, GeomError> {
        Self::from_vec(&[x, y, z])
    }

    pub fn from_vec(v: &Vec3) -> Result<Self, GeomError> {
        Ok(ProjPoint {
            coords: canonical(v)?,
        })
    }

    pub fn from_ints(order: u32, v: [i64; 3]) -> Result<Self, GeomError> {
        Self::new(
            CycNum::from_int(order, v[0]),
            CycNum::from_int(order, v[1]),
            CycNum::from_int(order, v[2]),
        )
    }

    pub fn coords(&self) -> &Vec3 {
        &self.coords
    }

    pub fn order(&self) -> u32 {
        self.coords[0].order()
    }

    pub fn embed(&self, order: u32) -> Result<Self, GeomError> {
        let v = [
            self.coords[0].embed(order)?,
            self.coords[1].embed(order)?,
            self.coords[2].embed(order)?,
        ];
        Ok(ProjPoint { coords: v })
    }
}

/// A line `ax + by + cz = 0`, canonically scaled like points.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjLine {
    coeffs: Vec3,
}

impl ProjLine {
    pub fn new(a: CycNum, b: CycNum, c: CycNum) -> Result<Self, GeomError> {
        Self::from_vec(&[a, b, c])
    }

    pub fn from_vec(v: &Vec3) -> Result<Self, GeomError> {
        Ok(ProjLine {
            coeffs: canonical(v)?,
        })
    }

    pub fn from_ints(order: u32, v: [i64; 3]) -> Result<Self, GeomError> {
        Self::new(
            CycNum::from_int(order, v[0]),
            CycNum::from_int(order, v[1]),
            CycNum::from_int(order, v[2]),
        )
    }

    pub fn coeffs(&self) -> &Vec3 {
        &self.coeffs
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        dot(&self.coeffs, &p.coords).is_zero()
    }

    /// The coordinate lines x = 0, y = 0, z = 0.
    pub fn coordinate_lines(order: u32) -> [ProjLine; 3] {
        [
            Self::from_ints(order, [1, 0, 0]).unwrap(),
            Self::from_ints(order, [0, 1, 0]).unwrap(),
            Self::from_ints(order, [0, 0, 1]).unwrap(),
        ]
    }
}

/// Coincident points count as collinear.
pub fn collinear(p: &ProjPoint, q: &ProjPoint, r: &ProjPoint) -> bool {
    det3(&p.coords, &q.coords, &r.coords).is_zero()
}

pub fn join(p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine, GeomError> {
    if p == q {
        return Err(GeomError::DegenerateJoin);
    }
    ProjLine::from_vec(&cross(&p.coords, &q.coords))
}

/// Intersection point of two distinct lines.
pub fn meet(l: &ProjLine, m: &ProjLine) -> Result<ProjPoint, GeomError> {
    if l == m {
        return Err(GeomError::DegenerateJoin);
    }
    ProjPoint::from_vec(&cross(&l.coeffs, &m.coeffs))
}

pub fn concurrent(a: &ProjLine, b: &ProjLine, c: &ProjLine) -> bool {
    det3(&a.coeffs, &b.coeffs, &c.coeffs).is_zero()
}

pub type Mat3 = [Vec3; 3];

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut acc = &a[i][0] * &b[0][j];
            for k in 1..3 {
                acc = &acc + &(&a[i][k] * &b[k][j]);
            }
            acc
        })
    })
}

pub fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| dot(&a[i], v))
}

fn transpose(a: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].clone()))
}

pub fn mat_det(a: &Mat3) -> CycNum {
    det3(&a[0], &a[1], &a[2])
}

/// Inverse by adjugate; `None` when singular.
pub fn mat_inverse(a: &Mat3) -> Option<Mat3> {
    let det = mat_det(a);
    let inv_det = det.inv().ok()?;
    // columns of the inverse are cross products of rows
    let c0 = cross(&a[1], &a[2]);
    let c1 = cross(&a[2], &a[0]);
    let c2 = cross(&a[0], &a[1]);
    let cols = [c0, c1, c2];
    Some(std::array::from_fn(|i| {
        std::array::from_fn(|j| &cols[j][i] * &inv_det)
    }))
}

/// An invertible 3×3 matrix acting on points by `p ↦ M p`.
#[derive(Clone, PartialEq, Eq)]
pub struct ProjTransform {
    m: Mat3,
}

impl ProjTransform {
    pub fn new(m: Mat3) -> Result<Self, GeomError> {
        if mat_det(&m).is_zero() {
            return Err(GeomError::Singular);
        }
        Ok(ProjTransform { m })
    }

    pub fn identity(order: u32) -> Self {
        let z = CycNum::zero(order);
        let o = CycNum::one(order);
        ProjTransform {
            m: [
                [o.clone(), z.clone(), z.clone()],
                [z.clone(), o.clone(), z.clone()],
                [z.clone(), z, o],
            ],
        }
    }

    pub fn diagonal(d: [CycNum; 3]) -> Result<Self, GeomError> {
        let order = common_order(d.iter())?;
        let z = CycNum::zero(order);
        let [a, b, c] = d;
        Self::new([
            [a, z.clone(), z.clone()],
            [z.clone(), b, z.clone()],
            [z.clone(), z, c],
        ])
    }

    pub fn from_ints(order: u32, m: [[i64; 3]; 3]) -> Result<Self, GeomError> {
        Self::new(m.map(|row| row.map(|v| CycNum::from_int(order, v))))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn inverse(&self) -> Self {
        ProjTransform {
            m: mat_inverse(&self.m).expect("transform is invertible by construction"),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &ProjTransform) -> Self {
        ProjTransform {
            m: mat_mul(&self.m, &other.m),
        }
    }

    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        ProjPoint::from_vec(&mat_vec(&self.m, &p.coords))
            .expect("invertible map sends nonzero to nonzero")
    }

    /// Image of a line: coefficients transform by the inverse transpose.
    pub fn apply_line(&self, l: &ProjLine) -> ProjLine {
        let inv_t = transpose(&self.inverse().m);
        ProjLine::from_vec(&mat_vec(&inv_t, &l.coeffs))
            .expect("invertible map sends nonzero to nonzero")
    }
}

impl fmt::Debug for ProjTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProjTransform{:?}", self.m)
    }
}

/// A transform sending `src[i]` onto `dst[i]`.
///
/// With `S` the matrix whose rows are the canonically scaled source lines
/// (and `D` likewise), the result is `D⁻¹ S`; it also carries the line
/// `src[0] + src[1] + src[2]` to `dst[0] + dst[1] + dst[2]`, which pins
/// the otherwise free diagonal scaling.
pub fn transform_mapping_lines(
    src: &[ProjLine; 3],
    dst: &[ProjLine; 3],
) -> Result<ProjTransform, GeomError> {
    let s: Mat3 = std::array::from_fn(|i| src[i].coeffs.clone());
    let d: Mat3 = std::array::from_fn(|i| dst[i].coeffs.clone());
    let d_inv = mat_inverse(&d).ok_or(GeomError::DegenerateFrame)?;
    if mat_det(&s).is_zero() {
        return Err(GeomError::DegenerateFrame);
    }
    ProjTransform::new(mat_mul(&d_inv, &s))
}

/// A transform sending the three points to `[1:0:0]`, `[0:1:0]`, `[0:0:1]`.
pub fn transform_from_points(p: &[ProjPoint; 3]) -> Result<ProjTransform, GeomError> {
    let cols: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| p[j].coords[i].clone()));
    let inv = mat_inverse(&cols).ok_or(GeomError::DegenerateFrame)?;
    ProjTransform::new(inv)
}

fn fmt_vec3(v: &Vec3, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "[{} : {} : {}]", v[0], v[1], v[2])
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_vec3(&self.coords, f)
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_vec3(&self.coords, f)
    }
}

impl fmt::Display for ProjLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_vec3(&self.coeffs, f)
    }
}

impl fmt::Debug for ProjLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line")?;
        fmt_vec3(&self.coeffs, f)
    }
}

/// Splits `[a : b : c]` into its three scalar fields. A top-level ':'
/// directly followed by '[' is the `N:[..]` prefix of a scalar, any other
/// top-level ':' separates fields.
pub(crate) fn split_triple(s: &str) -> Option<[String; 3]> {
    let body = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    let bytes = body.as_bytes();
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'[' => depth += 1,
            b']' => depth -= 1,
            b':' if depth == 0 && bytes.get(i + 1) != Some(&b'[') => {
                parts.push(body[start..i].trim().to_string());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(body[start..].trim().to_string());
    parts.try_into().ok()
}

fn parse_vec3(s: &str) -> Result<Vec3, GeomError> {
    let parts = split_triple(s).ok_or_else(|| GeomError::Parse(s.to_string()))?;
    let mut out = Vec::with_capacity(3);
    for p in &parts {
        out.push(
            p.parse::<CycNum>()
                .map_err(|_| GeomError::Parse(s.to_string()))?,
        );
    }
    Ok(out.try_into().unwrap())
}

impl FromStr for ProjPoint {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self, GeomError> {
        Self::from_vec(&parse_vec3(s)?)
    }
}

impl FromStr for ProjLine {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self, GeomError> {
        Self::from_vec(&parse_vec3(s)?)
    }
}
