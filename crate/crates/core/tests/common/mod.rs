#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sglab::cubicgroup::{CubicKind, GroupMap};
use sglab::curves::Curve;
use sglab::cycfield::{zeta, CycNum};
use sglab::projgeom::{ProjLine, ProjPoint, ProjTransform};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pt(order: u32, v: [i64; 3]) -> ProjPoint {
    ProjPoint::from_ints(order, v).unwrap()
}

/// Invertible matrix with small integer entries.
pub fn random_transform(rng: &mut ChaCha8Rng, order: u32) -> ProjTransform {
    loop {
        let m = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-3i64..=3)));
        if let Ok(t) = ProjTransform::from_ints(order, m) {
            return t;
        }
    }
}

pub fn line_curve(order: u32, v: [i64; 3]) -> (Curve, u32) {
    (Curve::line(&ProjLine::from_ints(order, v).unwrap()), 1)
}

/// A cubic of the given kind in normal position with its components, and
/// for smooth cubics an inflection point.
pub fn normal_cubic(kind: CubicKind) -> (Curve, Option<ProjPoint>) {
    let conic = || {
        (
            Curve::from_ints(1, 2, &[((0, 1, 1), 1), ((2, 0, 0), -1)]).unwrap(),
            1,
        )
    };
    match kind {
        CubicKind::ThreeNonconcurrentLines => (
            Curve::product(vec![
                line_curve(1, [1, 0, 0]),
                line_curve(1, [0, 1, 0]),
                line_curve(1, [0, 0, 1]),
            ])
            .unwrap(),
            None,
        ),
        CubicKind::ThreeConcurrentLines => (
            Curve::product(vec![
                line_curve(1, [1, 0, 0]),
                line_curve(1, [1, 0, -1]),
                line_curve(1, [1, 0, 2]),
            ])
            .unwrap(),
            None,
        ),
        CubicKind::ConicPlusLine2pt => (
            Curve::product(vec![conic(), line_curve(1, [1, 0, 0])]).unwrap(),
            None,
        ),
        CubicKind::ConicPlusLine1pt => (
            Curve::product(vec![line_curve(1, [0, 0, 1]), conic()]).unwrap(),
            None,
        ),
        CubicKind::Nodal => (
            Curve::from_ints(1, 3, &[((1, 1, 1), 1), ((3, 0, 0), 1), ((0, 3, 0), -1)]).unwrap(),
            None,
        ),
        CubicKind::Cuspidal => (
            Curve::from_ints(1, 3, &[((0, 2, 1), 1), ((3, 0, 0), -1), ((2, 1, 0), 2)]).unwrap(),
            None,
        ),
        CubicKind::Smooth => (
            Curve::from_ints(1, 3, &[((0, 2, 1), 1), ((3, 0, 0), -1), ((0, 0, 3), -17)]).unwrap(),
            Some(pt(1, [0, 1, 0])),
        ),
    }
}

/// Distinct nonzero rationals ±a/b in order of height max(a, b).
pub fn small_values(count: usize) -> Vec<CycNum> {
    let mut out: Vec<CycNum> = Vec::new();
    for h in 1i64.. {
        for a in 1..=h {
            for b in 1..=h {
                if a.max(b) != h || num_integer::gcd(a, b) != 1 {
                    continue;
                }
                for s in [1, -1] {
                    out.push(CycNum::from_frac(1, s * a, b));
                    if out.len() == count {
                        return out;
                    }
                }
            }
        }
    }
    unreachable!()
}

/// Multiples aP + bQ on y² = x³ + 17 with P = (−1, 4), Q = (2, 5).
pub fn mordell_points(map: &GroupMap, count: usize) -> Vec<ProjPoint> {
    let p = pt(1, [-1, 4, 1]);
    let q = pt(1, [2, 5, 1]);
    let o = map.identity_point().unwrap().clone();
    let mut out = Vec::new();
    let mut row = o.clone();
    'outer: for _a in 0..12 {
        let mut cur = row.clone();
        for _b in 0..6 {
            if cur != o && !out.contains(&cur) {
                out.push(cur.clone());
                if out.len() == count {
                    break 'outer;
                }
            }
            let neg = map.neg(&cur).unwrap();
            if neg != o && !out.contains(&neg) {
                out.push(neg);
                if out.len() == count {
                    break 'outer;
                }
            }
            cur = map.add(&cur, &q).unwrap();
        }
        row = map.add(&row, &p).unwrap();
    }
    out
}

/// A cubic of the given kind moved by a random transform, its charts, and
/// at least `per_component` smooth points on each component.
pub fn sampled_cubic(
    kind: CubicKind,
    rng: &mut ChaCha8Rng,
    per_component: usize,
) -> (GroupMap, Vec<Vec<ProjPoint>>) {
    let (c, base) = normal_cubic(kind);
    let t = random_transform(rng, 1);
    let moved = c.transform(&t);
    if kind == CubicKind::Smooth {
        let base = t.apply(&base.unwrap());
        let normal_map = GroupMap::with_base_point(&c, &normal_cubic(kind).1.unwrap()).unwrap();
        let pts = mordell_points(&normal_map, per_component)
            .iter()
            .map(|p| t.apply(p))
            .collect();
        return (GroupMap::with_base_point(&moved, &base).unwrap(), vec![pts]);
    }
    let map = GroupMap::build(&moved).unwrap();
    assert_eq!(map.kind(), kind);
    let values = small_values(per_component + 10);
    let parts = (0..map.component_count())
        .map(|comp| {
            let pts: Vec<ProjPoint> = values
                .iter()
                .filter_map(|v| map.point_of(comp, v).ok())
                .take(per_component)
                .collect();
            assert_eq!(pts.len(), per_component);
            pts
        })
        .collect();
    (map, parts)
}

/// Triples meeting the component-balance condition: all on one irreducible
/// cubic, one per line, or two on the conic and one on the line.
pub fn balanced_triples(map: &GroupMap, parts: &[Vec<ProjPoint>]) -> Vec<[ProjPoint; 3]> {
    let mut out = Vec::new();
    let comps = map
        .cubic()
        .components()
        .map(|c| c.iter().map(|(c, _)| c.degree()).collect::<Vec<_>>());
    match comps.as_deref() {
        None | Some([3]) => {
            let a = &parts[0];
            for i in 0..a.len() {
                for j in i + 1..a.len() {
                    for k in j + 1..a.len() {
                        out.push([a[i].clone(), a[j].clone(), a[k].clone()]);
                    }
                }
            }
        }
        Some([1, 1, 1]) => {
            for p in &parts[0] {
                for q in &parts[1] {
                    for r in &parts[2] {
                        out.push([p.clone(), q.clone(), r.clone()]);
                    }
                }
            }
        }
        Some(degs) => {
            let (two, one) = if degs[0] == 2 { (0, 1) } else { (1, 0) };
            let a = &parts[two];
            for i in 0..a.len() {
                for j in i + 1..a.len() {
                    for r in &parts[one] {
                        out.push([a[i].clone(), a[j].clone(), r.clone()]);
                    }
                }
            }
        }
    }
    out
}

/// y²z = x³ − xz² over Q(ζ_5): the point (−4/5, 6√5/25) and 2-torsion.
pub fn legendre_points(map: &GroupMap) -> Vec<ProjPoint> {
    let z = zeta(5).unwrap();
    let sqrt5 = &(&CycNum::one(5) + &z.scale_int(2)) + &z.pow(4).scale_int(2);
    let p = ProjPoint::new(
        CycNum::from_frac(5, -4, 5),
        sqrt5.scale(&CycNum::from_frac(1, 6, 25).as_rational().unwrap()),
        CycNum::one(5),
    )
    .unwrap();
    let torsion = [
        pt(5, [0, 1, 0]),
        pt(5, [0, 0, 1]),
        pt(5, [1, 0, 1]),
        pt(5, [-1, 0, 1]),
    ];
    let mut multiples = vec![p.clone()];
    for _ in 0..2 {
        multiples.push(map.add(multiples.last().unwrap(), &p).unwrap());
    }
    let mut out = Vec::new();
    for m in &multiples {
        for t in &torsion {
            let a = map.add(m, t).unwrap();
            out.push(map.neg(&a).unwrap());
            out.push(a);
        }
    }
    out.extend(torsion.iter().cloned());
    out.sort();
    out.dedup();
    out
}

pub fn check_axioms(map: &GroupMap, pts: &[ProjPoint], triples: usize, seed: u64) {
    let o = map.identity_point().unwrap().clone();
    for p in pts {
        assert_eq!(&map.add(p, &o).unwrap(), p);
        assert_eq!(map.add(p, &map.neg(p).unwrap()).unwrap(), o);
        for q in pts {
            assert_eq!(map.add(p, q).unwrap(), map.add(q, p).unwrap());
        }
    }
    let mut rng = rng(seed);
    for _ in 0..triples {
        let t: Vec<&ProjPoint> = pts.choose_multiple(&mut rng, 3).collect();
        let left = map.add(&map.add(t[0], t[1]).unwrap(), t[2]).unwrap();
        let right = map.add(t[0], &map.add(t[1], t[2]).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}
