//! The `sglab-config/1` text format.
//!
//! ```text
//! format: sglab-config/1
//! order: 3
//! point: [0 : [-1,0] : 1] a0
//! curve: 3
//! term: 1,1,1: 1
//! scalar: [0,1]
//! pair: 2, 3/4
//! mobius: 1, 1, 0, 1
//! ```
//!
//! Scalars are rationals, coefficient vectors `[c0,c1,...]` in powers of
//! ζ_order, or `N:[...]` for an explicit field. `#` starts a comment.

use std::fmt::{self, Write};

use sglab::addcomb::MobiusMap;
use sglab::curves::{Curve, Form, Monomial};
use sglab::cycfield::CycNum;
use sglab::projgeom::ProjPoint;

pub const VERSION: &str = "sglab-config/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSpec {
    pub degree: u32,
    pub terms: Vec<(Monomial, CycNum)>,
}

impl CurveSpec {
    pub fn from_curve(c: &Curve) -> Self {
        CurveSpec {
            degree: c.degree(),
            terms: c.form().terms().map(|(m, v)| (*m, v.clone())).collect(),
        }
    }

    pub fn to_curve(&self) -> Result<Curve, sglab::curves::CurveError> {
        Curve::new(Form::new(self.degree, self.terms.iter().cloned())?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigFile {
    pub order: u32,
    pub points: Vec<(ProjPoint, Option<String>)>,
    pub curves: Vec<CurveSpec>,
    pub scalars: Vec<CycNum>,
    pub pairs: Vec<(CycNum, CycNum)>,
    pub maps: Vec<[CycNum; 4]>,
}

impl ConfigFile {
    pub fn new(order: u32) -> Self {
        ConfigFile {
            order,
            points: Vec::new(),
            curves: Vec::new(),
            scalars: Vec::new(),
            pairs: Vec::new(),
            maps: Vec::new(),
        }
    }

    pub fn mobius_maps(&self) -> Result<Vec<MobiusMap>, sglab::addcomb::AddcombError> {
        self.maps
            .iter()
            .map(|[a, b, c, d]| MobiusMap::new(a.clone(), b.clone(), c.clone(), d.clone()))
            .collect()
    }
}

/// A scalar in the shortest form that reads back in a file of `order`.
pub fn scalar_text(x: &CycNum, order: u32) -> String {
    if let Some(q) = x.as_rational().filter(|_| x.order() == order) {
        return if q.denom() == &1.into() {
            q.numer().to_string()
        } else {
            format!("{}/{}", q.numer(), q.denom())
        };
    }
    let full = x.to_string();
    if x.order() == order {
        full.split_once(':')
            .map(|(_, body)| body.to_string())
            .unwrap_or(full)
    } else {
        full
    }
}

pub fn point_text(p: &ProjPoint, order: u32) -> String {
    let c = p.coords();
    format!(
        "[{} : {} : {}]",
        scalar_text(&c[0], order),
        scalar_text(&c[1], order),
        scalar_text(&c[2], order)
    )
}

pub fn emit(f: &ConfigFile) -> String {
    let mut s = String::new();
    let o = f.order;
    writeln!(s, "format: {VERSION}").unwrap();
    writeln!(s, "order: {o}").unwrap();
    for (p, label) in &f.points {
        match label {
            Some(l) => writeln!(s, "point: {} {l}", point_text(p, o)),
            None => writeln!(s, "point: {}", point_text(p, o)),
        }
        .unwrap();
    }
    for c in &f.curves {
        writeln!(s, "curve: {}", c.degree).unwrap();
        for ((i, j, k), v) in &c.terms {
            writeln!(s, "term: {i},{j},{k}: {}", scalar_text(v, o)).unwrap();
        }
    }
    for x in &f.scalars {
        writeln!(s, "scalar: {}", scalar_text(x, o)).unwrap();
    }
    for (x, y) in &f.pairs {
        writeln!(s, "pair: {}, {}", scalar_text(x, o), scalar_text(y, o)).unwrap();
    }
    for m in &f.maps {
        let t: Vec<String> = m.iter().map(|x| scalar_text(x, o)).collect();
        writeln!(s, "mobius: {}", t.join(", ")).unwrap();
    }
    s
}

struct Cursor {
    line: usize,
}

impl Cursor {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message: message.into(),
        }
    }
}

fn parse_scalar(s: &str, order: u32) -> Option<CycNum> {
    let s = s.trim();
    if s.contains(':') {
        s.parse().ok()
    } else if s.starts_with('[') {
        format!("{order}:{s}").parse().ok()
    } else {
        s.parse::<CycNum>().ok()?.embed(order).ok()
    }
}

/// Splits on `sep` outside brackets, keeping the byte offset of each part.
fn split_top(s: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            // `N:[...]` carries its own field and is not a separator
            c if c == sep && depth == 0 && !s[i + 1..].starts_with('[') => {
                out.push((start, &s[start..i]));
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

fn scalars(
    cur: &Cursor,
    body: &str,
    col: usize,
    order: u32,
    count: usize,
) -> Result<Vec<CycNum>, ParseError> {
    let parts = split_top(body, ',');
    if parts.len() != count {
        return Err(cur.err(col, format!("expected {count} comma-separated scalars")));
    }
    parts
        .into_iter()
        .map(|(off, t)| {
            parse_scalar(t, order)
                .ok_or_else(|| cur.err(col + off + lead(t), format!("bad scalar '{}'", t.trim())))
        })
        .collect()
}

pub fn parse(text: &str) -> Result<ConfigFile, ParseError> {
    let mut file: Option<ConfigFile> = None;
    let mut seen_format = false;
    for (n, raw) in text.lines().enumerate() {
        let cur = Cursor { line: n + 1 };
        let line = raw.split('#').next().unwrap();
        if line.trim().is_empty() {
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(cur.err(1, "expected 'key: value'"));
        };
        let key_col = line.len() - line.trim_start().len() + 1;
        let col = key.len() + 2 + (rest.len() - rest.trim_start().len());
        let value = rest.trim();
        let key = key.trim();
        if !seen_format {
            if key != "format" {
                return Err(cur.err(key_col, format!("first entry must be 'format: {VERSION}'")));
            }
            if value != VERSION {
                return Err(cur.err(
                    col,
                    format!("unsupported format '{value}', this reader knows {VERSION}"),
                ));
            }
            seen_format = true;
            continue;
        }
        if key == "order" {
            if file.is_some() {
                return Err(cur.err(key_col, "order given twice"));
            }
            let order: u32 = value
                .parse()
                .ok()
                .filter(|&o| o > 0)
                .ok_or_else(|| cur.err(col, format!("bad order '{value}'")))?;
            file = Some(ConfigFile::new(order));
            continue;
        }
        let Some(f) = file.as_mut() else {
            return Err(cur.err(key_col, "'order' must precede other entries"));
        };
        let order = f.order;
        match key {
            "point" => {
                let close = value
                    .starts_with('[')
                    .then(|| matching_bracket(value))
                    .flatten();
                let Some(close) = close else {
                    return Err(cur.err(col, "expected '[x : y : z]'"));
                };
                let inner = &value[1..close];
                let parts = split_top(inner, ':');
                if parts.len() != 3 {
                    return Err(cur.err(col, "expected three coordinates separated by ' : '"));
                }
                let mut v = Vec::with_capacity(3);
                for (off, t) in parts {
                    v.push(parse_scalar(t, order).ok_or_else(|| {
                        cur.err(
                            col + 1 + off + lead(t),
                            format!("bad scalar '{}'", t.trim()),
                        )
                    })?);
                }
                let p = ProjPoint::from_vec(&[v[0].clone(), v[1].clone(), v[2].clone()])
                    .map_err(|e| cur.err(col, e.to_string()))?;
                let label = value[close + 1..].trim();
                f.points
                    .push((p, (!label.is_empty()).then(|| label.to_string())));
            }
            "curve" => {
                let degree: u32 = value
                    .parse()
                    .ok()
                    .filter(|&d| d > 0)
                    .ok_or_else(|| cur.err(col, format!("bad degree '{value}'")))?;
                f.curves.push(CurveSpec {
                    degree,
                    terms: Vec::new(),
                });
            }
            "term" => {
                let Some(c) = f.curves.last_mut() else {
                    return Err(cur.err(key_col, "'term' before any 'curve'"));
                };
                let Some((mono, coeff)) = value.split_once(':') else {
                    return Err(cur.err(col, "expected 'i,j,k: scalar'"));
                };
                let e: Vec<u32> = mono
                    .split(',')
                    .filter_map(|t| t.trim().parse().ok())
                    .collect();
                if e.len() != 3 || e.iter().sum::<u32>() != c.degree {
                    return Err(cur.err(
                        col,
                        format!("exponents must be three integers summing to {}", c.degree),
                    ));
                }
                let v = parse_scalar(coeff, order).ok_or_else(|| {
                    cur.err(
                        col + mono.len() + 1 + lead(coeff),
                        format!("bad scalar '{}'", coeff.trim()),
                    )
                })?;
                c.terms.push(((e[0], e[1], e[2]), v));
            }
            "scalar" => f
                .scalars
                .push(scalars(&cur, value, col, order, 1)?.remove(0)),
            "pair" => {
                let mut v = scalars(&cur, value, col, order, 2)?;
                let y = v.pop().unwrap();
                f.pairs.push((v.pop().unwrap(), y));
            }
            "mobius" => {
                let v = scalars(&cur, value, col, order, 4)?;
                f.maps
                    .push([v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]);
            }
            "format" => return Err(cur.err(key_col, "format given twice")),
            other => return Err(cur.err(key_col, format!("unknown key '{other}' in {VERSION}"))),
        }
    }
    if !seen_format {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: format!("missing 'format: {VERSION}' header"),
        });
    }
    file.ok_or(ParseError {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing 'order'".into(),
    })
}

fn lead(t: &str) -> usize {
    t.len() - t.trim_start().len()
}

fn matching_bracket(s: &str) -> Option<usize> {
    let mut depth = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_carry_positions() {
        let e = parse("format: sglab-config/1\norder: 3\npoint: [1 : 2 : x]\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 17));
        let e = parse("format: sglab-config/2\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 9));
        let e = parse("format: sglab-config/1\norder: 3\n  colour: red\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 3));
        assert!(e.message.contains("sglab-config/1"));
    }

    #[test]
    fn comments_and_labels() {
        let f =
            parse("# header\nformat: sglab-config/1\norder: 4\npoint: [1 : [0,1] : 0] c1 # note\n")
                .unwrap();
        assert_eq!(f.points.len(), 1);
        assert_eq!(f.points[0].1.as_deref(), Some("c1"));
        assert_eq!(parse(&emit(&f)).unwrap(), f);
    }
}
