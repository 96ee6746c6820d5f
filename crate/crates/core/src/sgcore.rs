//! Sylvester–Gallai checks, collinear-triple counting and the structure
//! pipeline ending in canonicalization to a Fermat configuration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::addcomb::{grid_constant, recover_subgroup, CosetCertificate, GridStats, GroupKind};
use crate::cubicgroup::{third_point, CubicKind, GroupMap, GroupValue};
use crate::curves::{fit_curve, ComponentPartition, Curve};
use crate::cycfield::{CycError, CycNum, Rational};
use crate::poly;
use crate::projgeom::{
    collinear, common_order, concurrent, join, meet, GeomError, ProjLine, ProjPoint, ProjTransform,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SgError {
    #[error("Fermat configurations need n >= 3, got {0}")]
    TooSmall(u32),
    #[error("configuration is degenerate: {0}")]
    Degenerate(String),
    #[error("point {0} lies on the curve")]
    OnCurve(String),
    #[error("invalid classifier parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Field(#[from] CycError),
}

/// A finite set of distinct points over Q(ζ_order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    order: u32,
    points: Vec<ProjPoint>,
    labels: Vec<Option<String>>,
}

impl Configuration {
    /// Embeds every point into Q(ζ_order) and drops repeated points (the
    /// first occurrence keeps its label). Returns the number dropped.
    pub fn new(
        order: u32,
        points: Vec<ProjPoint>,
        labels: Vec<Option<String>>,
    ) -> Result<(Self, usize), SgError> {
        let mut seen = BTreeSet::new();
        let mut out_p = Vec::new();
        let mut out_l = Vec::new();
        let mut labels = labels.into_iter();
        let mut dropped = 0;
        for p in points {
            let label = labels.next().flatten();
            let p = p.embed(order)?;
            if seen.insert(p.clone()) {
                out_p.push(p);
                out_l.push(label);
            } else {
                dropped += 1;
            }
        }
        if out_p.is_empty() {
            return Err(SgError::Degenerate("no points".into()));
        }
        Ok((
            Configuration {
                order,
                points: out_p,
                labels: out_l,
            },
            dropped,
        ))
    }

    pub fn from_points(order: u32, points: Vec<ProjPoint>) -> Result<Self, SgError> {
        let n = points.len();
        Ok(Self::new(order, points, vec![None; n])?.0)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn apply(&self, t: &ProjTransform) -> Configuration {
        Configuration {
            order: self.order,
            points: self.points.iter().map(|p| t.apply(p)).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn without(&self, idx: usize) -> Configuration {
        let mut c = self.clone();
        c.points.remove(idx);
        c.labels.remove(idx);
        c
    }

    pub fn point_set(&self) -> BTreeSet<ProjPoint> {
        self.points.iter().cloned().collect()
    }
}

/// The 3n points a_j = [0 : −ζ^j : 1], b_j = [−ζ^j : 0 : 1],
/// c_j = [1 : −ζ^j : 0] over Q(ζ_n).
pub fn fermat_config(n: u32) -> Result<Configuration, SgError> {
    if n < 3 {
        return Err(SgError::TooSmall(n));
    }
    let zero = CycNum::zero(n);
    let one = CycNum::one(n);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (name, slot) in [("a", 0), ("b", 1), ("c", 2)] {
        for j in 0..n {
            let v = -CycNum::zeta_pow(n, j as i64);
            let coords = match slot {
                0 => [zero.clone(), v, one.clone()],
                1 => [v, zero.clone(), one.clone()],
                _ => [one.clone(), v, zero.clone()],
            };
            points.push(ProjPoint::from_vec(&coords)?);
            labels.push(Some(format!("{name}{j}")));
        }
    }
    Ok(Configuration::new(n, points, labels)?.0)
}

/// Lines spanned by pairs of configuration points with their incident
/// point indices, in a deterministic order.
#[derive(Debug, Clone)]
pub struct LineIncidenceIndex {
    lines: Vec<(ProjLine, Vec<usize>)>,
}

impl LineIncidenceIndex {
    pub fn build(config: &Configuration) -> Self {
        let pts = config.points();
        let n = pts.len();
        // each line is recorded once, from its two smallest indices
        let mut lines: Vec<(ProjLine, Vec<usize>)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut found: Vec<(ProjLine, Vec<usize>)> = Vec::new();
                let mut done = vec![false; n];
                for j in i + 1..n {
                    if done[j] {
                        continue;
                    }
                    let l = join(&pts[i], &pts[j]).expect("configuration points are distinct");
                    if (0..i).any(|k| l.contains(&pts[k])) {
                        continue;
                    }
                    let mut members = vec![i, j];
                    for (k, d) in done.iter_mut().enumerate().skip(j + 1) {
                        if l.contains(&pts[k]) {
                            members.push(k);
                            *d = true;
                        }
                    }
                    found.push((l, members));
                }
                found
            })
            .collect();
        lines.sort_by(|a, b| a.1.cmp(&b.1));
        LineIncidenceIndex { lines }
    }

    pub fn lines(&self) -> &[(ProjLine, Vec<usize>)] {
        &self.lines
    }

    pub fn get(&self, l: &ProjLine) -> Option<&[usize]> {
        self.lines
            .iter()
            .find(|(m, _)| m == l)
            .map(|(_, v)| v.as_slice())
    }

    pub fn ordinary_lines(&self) -> impl Iterator<Item = &ProjLine> {
        self.lines
            .iter()
            .filter(|(_, v)| v.len() == 2)
            .map(|(l, _)| l)
    }

    /// |T| = Σ k(k−1)(k−2) over lines with k points.
    pub fn triple_count(&self) -> u64 {
        self.lines
            .iter()
            .map(|(_, v)| falling3(v.len() as u64))
            .sum()
    }

    pub fn size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for (_, v) in &self.lines {
            *h.entry(v.len()).or_insert(0) += 1;
        }
        h
    }

    /// Ordered triples (x, y, z) of distinct collinear points with x ∈ I,
    /// y ∈ J, z ∈ K (index sets into the configuration).
    pub fn triples_between(&self, i: &[usize], j: &[usize], k: &[usize]) -> u64 {
        let n = self
            .lines
            .iter()
            .flat_map(|(_, v)| v.iter())
            .max()
            .map_or(0, |m| m + 1);
        let mask = |s: &[usize]| {
            let mut m = vec![false; n.max(s.iter().max().map_or(0, |x| x + 1))];
            for &x in s {
                m[x] = true;
            }
            m
        };
        let (mi, mj, mk) = (mask(i), mask(j), mask(k));
        let inm = |m: &Vec<bool>, x: usize| m.get(x).copied().unwrap_or(false);
        self.lines
            .par_iter()
            .map(|(_, v)| {
                let (mut a, mut b, mut c, mut ab, mut ac, mut bc, mut abc) =
                    (0u64, 0u64, 0u64, 0u64, 0u64, 0u64, 0u64);
                for &x in v {
                    let (xi, xj, xk) = (inm(&mi, x), inm(&mj, x), inm(&mk, x));
                    a += xi as u64;
                    b += xj as u64;
                    c += xk as u64;
                    ab += (xi && xj) as u64;
                    ac += (xi && xk) as u64;
                    bc += (xj && xk) as u64;
                    abc += (xi && xj && xk) as u64;
                }
                // inclusion–exclusion over coincidences among the three slots
                a * b * c + 2 * abc - ab * c - ac * b - bc * a
            })
            .sum()
    }
}

fn falling3(k: u64) -> u64 {
    if k < 3 {
        0
    } else {
        k * (k - 1) * (k - 2)
    }
}

/// Ordered proper collinear triples by direct enumeration.
pub fn naive_triple_count(config: &Configuration) -> u64 {
    let p = config.points();
    let n = p.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut c = 0;
            for j in i + 1..n {
                for k in j + 1..n {
                    if collinear(&p[i], &p[j], &p[k]) {
                        c += 6;
                    }
                }
            }
            c
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SgReport {
    pub is_sg: bool,
    pub collinear: bool,
    /// at most `limit` lines, in index order
    pub ordinary_lines: Vec<ProjLine>,
    pub ordinary_line_count: usize,
    pub triple_count: u64,
    pub line_size_histogram: BTreeMap<usize, usize>,
}

pub fn sg_check_with_index(
    config: &Configuration,
    index: &LineIncidenceIndex,
    limit: usize,
) -> Result<SgReport, SgError> {
    if config.len() < 3 {
        return Err(SgError::Degenerate(format!(
            "{} distinct points",
            config.len()
        )));
    }
    let all_collinear = index.lines().len() == 1;
    let ordinary: Vec<&ProjLine> = index.ordinary_lines().collect();
    Ok(SgReport {
        is_sg: !all_collinear && ordinary.is_empty(),
        collinear: all_collinear,
        ordinary_lines: ordinary.iter().take(limit).map(|l| (*l).clone()).collect(),
        ordinary_line_count: ordinary.len(),
        triple_count: index.triple_count(),
        line_size_histogram: index.size_histogram(),
    })
}

pub fn sg_check(config: &Configuration) -> Result<SgReport, SgError> {
    sg_check_with_index(config, &LineIncidenceIndex::build(config), usize::MAX)
}

/// A family of concurrent lines through `center` covering the
/// configuration apart from the center itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcurrentCover {
    pub center: ProjPoint,
    pub lines: Vec<(ProjLine, usize)>,
}

impl ConcurrentCover {
    pub fn through(config: &Configuration, center: &ProjPoint) -> Self {
        let mut counts: BTreeMap<ProjLine, usize> = BTreeMap::new();
        for p in config.points().iter().filter(|p| *p != center) {
            *counts.entry(join(center, p).unwrap()).or_insert(0) += 1;
        }
        let mut lines: Vec<(ProjLine, usize)> = counts.into_iter().collect();
        lines.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ConcurrentCover {
            center: center.clone(),
            lines,
        }
    }

    /// m ≥ 2 lines and one of them carries more than m − 2 points.
    pub fn hypothesis_holds(&self) -> bool {
        let m = self.lines.len();
        m >= 2 && self.lines.iter().any(|(_, k)| *k + 2 > m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcurrentCheck {
    pub cover: ConcurrentCover,
    pub ordinary_line: Option<ProjLine>,
}

/// Looks for a concurrent cover meeting the hypothesis of the concurrent
/// lines theorem (centers tried: points of the configuration, then
/// intersections of its rich lines) and, if one exists, searches the index
/// exhaustively for an ordinary line.
pub fn concurrent_lines_check(
    config: &Configuration,
    index: &LineIncidenceIndex,
) -> Result<Option<ConcurrentCheck>, SgError> {
    if index.lines().len() < 2 {
        return Err(SgError::Degenerate("configuration is collinear".into()));
    }
    let mut centers: Vec<ProjPoint> = config.points().to_vec();
    let mut rich: Vec<&(ProjLine, Vec<usize>)> =
        index.lines().iter().filter(|(_, v)| v.len() >= 3).collect();
    rich.sort_by_key(|(_, v)| std::cmp::Reverse(v.len()));
    rich.truncate(12);
    for (a, (l1, _)) in rich.iter().enumerate() {
        for (l2, _) in rich.iter().skip(a + 1) {
            if let Ok(p) = meet(l1, l2) {
                if !centers.contains(&p) {
                    centers.push(p);
                }
            }
        }
    }
    Ok(centers
        .iter()
        .map(|c| ConcurrentCover::through(config, c))
        .find(|cover| cover.hypothesis_holds())
        .map(|cover| ConcurrentCheck {
            cover,
            ordinary_line: index.ordinary_lines().next().cloned(),
        }))
}

/// The same check for a supplied concurrency point.
pub fn concurrent_lines_check_at(
    config: &Configuration,
    index: &LineIncidenceIndex,
    center: &ProjPoint,
) -> Result<Option<ConcurrentCheck>, SgError> {
    if index.lines().len() < 2 {
        return Err(SgError::Degenerate("configuration is collinear".into()));
    }
    let center = center.embed(config.order())?;
    let cover = ConcurrentCover::through(config, &center);
    Ok(cover.hypothesis_holds().then(|| ConcurrentCheck {
        cover,
        ordinary_line: index.ordinary_lines().next().cloned(),
    }))
}

/// Number of lines through `p` meeting the cubic in fewer than three
/// distinct points, counted exactly from the discriminant of the
/// restriction to the pencil.
pub fn tangent_count(c: &Curve, p: &ProjPoint) -> Result<usize, SgError> {
    if c.contains(p) {
        return Err(SgError::OnCurve(p.to_string()));
    }
    if c.degree() != 3 {
        return Err(SgError::Degenerate(format!("degree {} curve", c.degree())));
    }
    let order = common_order(p.coords().iter().chain(c.form().terms().map(|(_, v)| v)))?;
    // a line not through p, spanned by u and v, parametrizes the pencil
    let e: Vec<ProjPoint> = (0..3)
        .map(|i| ProjPoint::from_ints(order, std::array::from_fn(|j| (i == j) as i64)).unwrap())
        .collect();
    let basis = [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .find(|&(i, j)| !collinear(&e[i], &e[j], p))
        .expect("p is off some coordinate-vertex line");
    let (u, v) = (e[basis.0].coords().clone(), e[basis.1].coords().clone());
    let disc_at = |q: &crate::projgeom::Vec3| -> CycNum {
        let k = c.form().restrict(p.coords(), q);
        // binary cubic a s^3 + b s^2 w + c s w^2 + d w^3
        let (a, b, cc, d) = (&k[0], &k[1], &k[2], &k[3]);
        let t1 = &(&(b * b) * &(cc * cc)) - (&(a * &cc.pow(3)).scale_int(4));
        let t2 = &(&b.pow(3) * d).scale_int(4) + &(&(a * a) * &(d * d)).scale_int(27);
        let t3 = (&(&(a * b) * cc) * d).scale_int(18);
        &(&t1 - &t2) + &t3
    };
    let ts: Vec<CycNum> = (0..7).map(|t| CycNum::from_int(order, t)).collect();
    let ys: Vec<CycNum> = ts
        .iter()
        .map(|t| disc_at(&std::array::from_fn(|i| &u[i] + &(t * &v[i]))))
        .collect();
    let disc = poly::interpolate(&ts, &ys, order);
    let Some(deg) = poly::degree(&disc) else {
        return Err(SgError::Degenerate(
            "every line through the point is deficient".into(),
        ));
    };
    // a degree drop means the line towards v is deficient too
    Ok(poly::distinct_root_count(&disc, order) + (deg < 6) as usize)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierParams {
    pub d: u32,
    pub delta: Rational,
    pub epsilon: Rational,
    /// fraction of |A| below which a component is dropped; δ/(100d) if unset
    pub significance: Option<Rational>,
    /// largest subgroup order searched; 2|A| if unset
    pub max_m: Option<u32>,
    pub seed: u64,
    pub ransac_rounds: usize,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            d: 3,
            delta: Rational::new(1.into(), 5.into()),
            epsilon: Rational::new(1.into(), 20.into()),
            significance: None,
            max_m: None,
            seed: 0,
            ransac_rounds: 200,
        }
    }
}

impl ClassifierParams {
    pub fn validate(&self) -> Result<(), SgError> {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        if self.d < 2 {
            return Err(SgError::Params(format!("d = {} (need d >= 2)", self.d)));
        }
        if !(zero < self.epsilon && self.epsilon <= self.delta && self.delta < one) {
            return Err(SgError::Params(format!(
                "need 0 < epsilon <= delta < 1, got epsilon = {}, delta = {}",
                self.epsilon, self.delta
            )));
        }
        Ok(())
    }

    pub fn significance_fraction(&self) -> Rational {
        self.significance
            .clone()
            .unwrap_or_else(|| &self.delta / Rational::from_integer((100 * self.d).into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    SgCheck,
    CurveFit,
    Components,
    SingularPoints,
    ConcurrentLines,
    GroupMap,
    SubgroupRecovery,
    Canonicalization,
    TangentFamily,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::SgCheck => "sg-check",
            Stage::CurveFit => "curve-fit",
            Stage::Components => "components",
            Stage::SingularPoints => "singular-points",
            Stage::ConcurrentLines => "concurrent-lines",
            Stage::GroupMap => "group-map",
            Stage::SubgroupRecovery => "subgroup-recovery",
            Stage::Canonicalization => "canonicalization",
            Stage::TangentFamily => "tangent-family",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    FermatEquivalent { transform: ProjTransform, m: u32 },
    OrdinaryLine { line: ProjLine, source: Stage },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone)]
pub struct StructureVerdict {
    pub stage: Stage,
    pub curve: Option<Curve>,
    pub coverage: usize,
    pub partition: Option<ComponentPartition>,
    pub cubic_kind: Option<CubicKind>,
    pub grids: Vec<GridStats>,
    pub certificates: Vec<Option<CosetCertificate>>,
    pub outcome: Outcome,
}

impl StructureVerdict {
    fn new(stage: Stage, outcome: Outcome) -> Self {
        StructureVerdict {
            stage,
            curve: None,
            coverage: 0,
            partition: None,
            cubic_kind: None,
            grids: Vec::new(),
            certificates: Vec::new(),
            outcome,
        }
    }

    fn finish(mut self, stage: Stage, outcome: Outcome) -> Self {
        self.stage = stage;
        self.outcome = outcome;
        self
    }
}

fn ordinary(line: &ProjLine, source: Stage) -> Outcome {
    Outcome::OrdinaryLine {
        line: line.clone(),
        source,
    }
}

fn inconclusive(reason: impl Into<String>) -> Outcome {
    Outcome::Inconclusive {
        reason: reason.into(),
    }
}

/// Lines of the index chosen greedily by number of not yet covered points,
/// at most `d` of them, stopping once `target` points are covered.
fn greedy_lines(
    index: &LineIncidenceIndex,
    n: usize,
    d: u32,
    target: usize,
) -> Option<(Vec<ProjLine>, usize)> {
    let mut covered = vec![false; n];
    let mut chosen = Vec::new();
    let mut count = 0;
    while chosen.len() < d as usize && count < target {
        let (best, gain) = index
            .lines()
            .iter()
            .map(|(l, v)| (l, v.iter().filter(|&&i| !covered[i]).count()))
            .fold(
                (None, 0),
                |acc, (l, g)| if g > acc.1 { (Some(l), g) } else { acc },
            );
        let best = best?;
        if gain < 3 {
            return None;
        }
        for &i in index.get(best).unwrap() {
            covered[i] = true;
        }
        count += gain;
        chosen.push(best.clone());
    }
    (count >= target).then_some((chosen, count))
}

fn coverage(c: &Curve, pts: &[ProjPoint]) -> usize {
    pts.iter().filter(|p| c.contains(p)).count()
}

/// A curve of degree ≤ d through at least `target` points: products of
/// rich lines first, then exact fits, then seeded random sampling.
fn fit_stage(
    config: &Configuration,
    index: &LineIncidenceIndex,
    params: &ClassifierParams,
    target: usize,
) -> Option<(Curve, usize)> {
    let pts = config.points();
    let n = pts.len();
    if let Some((lines, count)) = greedy_lines(index, n, params.d, target) {
        let comps = lines.iter().map(|l| (Curve::line(l), 1)).collect();
        return Some((Curve::product(comps).unwrap(), count));
    }
    for k in 1..=params.d {
        if let Some(c) = fit_curve(pts, k) {
            return Some((c, n));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(Curve, usize)> = None;
    for k in 1..=params.d {
        let need = ((k + 1) * (k + 2) / 2 - 1) as usize;
        if need > n {
            break;
        }
        for _ in 0..params.ransac_rounds {
            let idx = sample(&mut rng, n, need);
            let chosen: Vec<ProjPoint> = idx.iter().map(|i| pts[i].clone()).collect();
            if let Some(c) = fit_curve(&chosen, k) {
                let cov = coverage(&c, pts);
                if best.as_ref().is_none_or(|(_, b)| cov > *b) {
                    best = Some((c, cov));
                }
            }
        }
        if best.as_ref().is_some_and(|(_, b)| *b >= target) {
            break;
        }
    }
    best.filter(|(_, cov)| *cov >= target)
}

fn coverage_target(n: usize, params: &ClassifierParams) -> usize {
    let t = (Rational::from_integer(1.into()) - &params.epsilon) * Rational::from_integer(n.into());
    t.ceil().to_integer().try_into().unwrap_or(n)
}

fn fit_with_components(
    config: &Configuration,
    index: &LineIncidenceIndex,
    params: &ClassifierParams,
) -> Option<(Curve, usize)> {
    let (curve, cov) = fit_stage(config, index, params, coverage_target(config.len(), params))?;
    if curve.components().is_some() {
        return Some((curve, cov));
    }
    let mut rich: Vec<&(ProjLine, Vec<usize>)> =
        index.lines().iter().filter(|(_, p)| p.len() >= 3).collect();
    rich.sort_by_key(|(_, p)| std::cmp::Reverse(p.len()));
    let rich: Vec<ProjLine> = rich.into_iter().map(|(l, _)| l.clone()).collect();
    Some((curve.split_linear_factors(&rich), cov))
}

/// A curve of degree at most `params.d` through at least (1 − ε)|A| points,
/// with its linear components split off, and the number of points covered.
pub fn fit_low_degree_curve(
    config: &Configuration,
    params: &ClassifierParams,
) -> Result<Option<(Curve, usize)>, SgError> {
    params.validate()?;
    Ok(fit_with_components(
        config,
        &LineIncidenceIndex::build(config),
        params,
    ))
}

/// Runs the structure pipeline on a configuration.
pub fn classify(
    config: &Configuration,
    params: &ClassifierParams,
) -> Result<StructureVerdict, SgError> {
    params.validate()?;
    let n = config.len();
    let index = LineIncidenceIndex::build(config);
    let sg = sg_check_with_index(config, &index, 1)?;
    if !sg.is_sg {
        if sg.collinear {
            return Ok(StructureVerdict::new(
                Stage::SgCheck,
                inconclusive("configuration is collinear"),
            ));
        }
        // at most d concurrent lines covering everything: the concurrent
        // lines theorem already names the configuration
        if let Some((lines, _)) = greedy_lines(&index, n, params.d, n) {
            if lines.len() >= 2 {
                if let Ok(center) = meet(&lines[0], &lines[1]) {
                    if lines.iter().all(|l| l.contains(&center))
                        && ConcurrentCover::through(config, &center).hypothesis_holds()
                    {
                        let l = &sg.ordinary_lines[0];
                        return Ok(StructureVerdict::new(
                            Stage::ConcurrentLines,
                            ordinary(l, Stage::ConcurrentLines),
                        ));
                    }
                }
            }
        }
        return Ok(StructureVerdict::new(
            Stage::SgCheck,
            ordinary(&sg.ordinary_lines[0], Stage::SgCheck),
        ));
    }

    // (1) a low-degree curve through almost all points, (2) its components
    let mut v = StructureVerdict::new(Stage::CurveFit, inconclusive(""));
    let target = coverage_target(n, params);
    let Some((curve, cov)) = fit_with_components(config, &index, params) else {
        return Ok(v.finish(
            Stage::CurveFit,
            inconclusive(format!(
                "no curve of degree <= {} covers {target} points",
                params.d
            )),
        ));
    };
    v.coverage = cov;
    let n_big = Rational::from_integer(n.into());
    let threshold = params.significance_fraction() * &n_big;
    let partition = curve.assign_components(config.points());
    let comps = curve.components().unwrap().to_vec();
    let significant: Vec<usize> = (0..comps.len())
        .filter(|&j| Rational::from_integer(partition.parts[j].len().into()) >= threshold)
        .collect();
    v.curve = Some(curve.clone());
    v.partition = Some(partition.clone());
    if significant.len() < comps.len() {
        let kept: Vec<(Curve, u32)> = significant.iter().map(|&j| comps[j].clone()).collect();
        if kept.is_empty() {
            return Ok(v.finish(Stage::Components, inconclusive("no significant component")));
        }
        let reduced = Curve::product(kept).unwrap();
        v.partition = Some(reduced.assign_components(config.points()));
        v.curve = Some(reduced);
    }
    let curve = v.curve.clone().unwrap();
    let partition = v.partition.clone().unwrap();

    // points on the curve but in its singular locus
    for &i in &partition.err {
        let p = &config.points()[i];
        if curve.contains(p) {
            if let Some((l, _)) = index
                .lines()
                .iter()
                .find(|(_, m)| m.len() == 2 && m.contains(&i))
            {
                return Ok(v.finish(Stage::SingularPoints, ordinary(l, Stage::SingularPoints)));
            }
        }
    }

    // (3) concurrent significant lines
    let comps = curve.components().unwrap();
    let lines: Vec<ProjLine> = comps.iter().filter_map(|(c, _)| c.as_line()).collect();
    if lines.len() == comps.len()
        && lines.len() >= 3
        && lines.windows(3).all(|w| concurrent(&w[0], &w[1], &w[2]))
    {
        return Ok(match concurrent_lines_check(config, &index)? {
            Some(ConcurrentCheck {
                ordinary_line: Some(l),
                ..
            }) => v.finish(Stage::ConcurrentLines, ordinary(&l, Stage::ConcurrentLines)),
            _ => v.finish(
                Stage::ConcurrentLines,
                inconclusive("concurrent lines without an ordinary line"),
            ),
        });
    }

    // (4) charts and cosets
    if curve.degree() != 3 {
        return Ok(v.finish(
            Stage::GroupMap,
            inconclusive(format!("significant part has degree {}", curve.degree())),
        ));
    }
    let map = match GroupMap::build(&curve) {
        Ok(m) => m,
        Err(e) => return Ok(v.finish(Stage::GroupMap, inconclusive(e.to_string()))),
    };
    v.cubic_kind = Some(map.kind());
    let max_m = params.max_m.unwrap_or(2 * n as u32);
    let mut classes: Vec<Vec<CycNum>> = Vec::new();
    if map.kind() != CubicKind::Smooth {
        for part in &partition.parts {
            let mut vals = Vec::new();
            for &i in part {
                if let Ok(GroupValue::Scalar(s)) = map.rho(&config.points()[i]).map(|e| e.value) {
                    vals.push(s);
                }
            }
            let kind = if map.kind().is_multiplicative() {
                GroupKind::Multiplicative
            } else {
                GroupKind::Additive
            };
            if let Ok((_, stats)) = grid_constant(&vals, kind, &Rational::from_integer(1.into())) {
                v.grids.push(stats);
            }
            classes.push(vals);
        }
    }

    if map.kind() == CubicKind::ThreeNonconcurrentLines {
        // (5) three cosets of one subgroup, then the explicit normalization
        for vals in &classes {
            v.certificates
                .push(recover_subgroup(vals, max_m).ok().flatten());
        }
        let certs: Vec<&CosetCertificate> = v.certificates.iter().flatten().collect();
        if certs.len() != 3 || certs.iter().any(|c| c.sym_diff != 0 || c.m != certs[0].m) {
            return Ok(v.finish(
                Stage::SubgroupRecovery,
                inconclusive("component classes are not exact cosets of one subgroup"),
            ));
        }
        let m = certs[0].m;
        let lambda: Vec<CycNum> = certs.iter().map(|c| c.lambda.clone()).collect();
        let product = &(&lambda[0] * &lambda[1]) * &lambda[2];
        if !crate::addcomb::unity_order(&product).is_some_and(|o| m.is_multiple_of(o)) {
            return Ok(v.finish(
                Stage::SubgroupRecovery,
                inconclusive("coset representatives do not multiply into the subgroup"),
            ));
        }
        return Ok(match canonicalize(config, &map, &lambda, m) {
            Ok(t) => v.finish(
                Stage::Canonicalization,
                Outcome::FermatEquivalent { transform: t, m },
            ),
            Err(reason) => v.finish(Stage::Canonicalization, inconclusive(reason)),
        });
    }

    // (6) tangent lines through x and the third point −2x
    for part in &partition.parts {
        for &i in part {
            let p = &config.points()[i];
            let Ok(q) = third_point(&curve, p, p) else {
                continue;
            };
            if q == *p || !config.points().contains(&q) {
                continue;
            }
            let l = join(p, &q)?;
            if index.get(&l).is_some_and(|m| m.len() == 2) {
                return Ok(v.finish(Stage::TangentFamily, ordinary(&l, Stage::TangentFamily)));
            }
        }
    }
    Ok(v.finish(
        Stage::TangentFamily,
        inconclusive(format!(
            "{} cubic: no ordinary line in the tangent family",
            map.kind()
        )),
    ))
}

/// The transform diag(λ2, −1/λ1, 1) ∘ frame, checked to send the
/// configuration exactly onto F_m.
fn canonicalize(
    config: &Configuration,
    map: &GroupMap,
    lambda: &[CycNum],
    m: u32,
) -> Result<ProjTransform, String> {
    let order = num_integer::lcm(config.order(), m);
    let embed = |x: &CycNum| x.embed(order).map_err(|e| e.to_string());
    let d = ProjTransform::diagonal([
        embed(&lambda[1])?,
        embed(&-&lambda[0].inv().map_err(|e| e.to_string())?)?,
        CycNum::one(order),
    ])
    .map_err(|e| e.to_string())?;
    let frame = map.normalizing_transform();
    let frame = ProjTransform::new(
        frame
            .matrix()
            .clone()
            .map(|r| r.map(|x| x.embed(order).unwrap())),
    )
    .map_err(|e| e.to_string())?;
    let t = d.compose(&frame);
    let image: BTreeSet<ProjPoint> = config
        .points()
        .iter()
        .map(|p| t.apply(&p.embed(order).unwrap()))
        .collect();
    let target: BTreeSet<ProjPoint> = fermat_config(m)
        .map_err(|e| e.to_string())?
        .points()
        .iter()
        .map(|p| p.embed(order).unwrap())
        .collect();
    if image != target {
        return Err(format!("normalized configuration differs from F_{m}"));
    }
    Ok(t)
}

/// Ordinary lines of a configuration keyed by line, for reports.
pub fn ordinary_line_map(index: &LineIncidenceIndex) -> HashMap<ProjLine, [usize; 2]> {
    index
        .lines()
        .iter()
        .filter(|(_, v)| v.len() == 2)
        .map(|(l, v)| (l.clone(), [v[0], v[1]]))
        .collect()
}
