//! Command-line front end: file loading, subcommands and `key: value`
//! reports.

pub mod format;

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use sglab::addcomb::{
    expansion_report, grid_constant, mobius_incidences, mobius_incidences_naive, subgroup,
    ExpansionMode, GroupKind, MobiusMap,
};
use sglab::cubicgroup::{GroupMap, GroupValue};
use sglab::cycfield::CycNum;
use sglab::projgeom::{common_order, ProjLine, ProjPoint};
use sglab::sgcore::{
    classify, fermat_config, fit_low_degree_curve, naive_triple_count, sg_check_with_index,
    ClassifierParams, Configuration, LineIncidenceIndex, Outcome,
};

use format::{emit, parse, scalar_text, ConfigFile, CurveSpec};

#[derive(Parser, Debug)]
#[command(
    name = "sglab",
    version,
    about = "Exact Sylvester–Gallai configuration lab"
)]
pub struct Cli {
    /// seed for randomized steps
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// worker threads (defaults to the number of cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated configuration
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Check for ordinary lines and count collinear triples
    Verify {
        input: PathBuf,
        /// ordinary lines listed at most
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
    /// Run the structure pipeline
    Classify {
        input: PathBuf,
        #[command(flatten)]
        params: ClassifyArgs,
    },
    /// Additive-combinatorial and counting measurements
    Measure {
        #[command(subcommand)]
        what: Measure,
    },
    /// Print the group charts of the first curve in a file
    Describe {
        input: PathBuf,
        /// identity point for smooth cubics, as `[x : y : z]`
        #[arg(long)]
        base: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// The 3n-point Fermat configuration over Q(ζ_n)
    Fermat {
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    #[arg(long, default_value = "1/5", value_parser = parse_rational)]
    pub delta: BigRational,
    #[arg(long, default_value = "1/20", value_parser = parse_rational)]
    pub epsilon: BigRational,
    /// smallest kept component as a fraction of |A| (default delta/(100 d))
    #[arg(long, value_parser = parse_rational)]
    pub significance: Option<BigRational>,
    /// largest subgroup order searched (default 2|A|)
    #[arg(long)]
    pub max_m: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Measure {
    /// Index and naive counts of ordered collinear triples
    Triples {
        input: PathBuf,
        /// skip the cubic-time oracle
        #[arg(long)]
        no_naive: bool,
    },
    /// Difference or ratio sets of the scalars in a file, or of the chart
    /// images of each curve component
    Grids {
        input: PathBuf,
        #[arg(long, default_value = "2", value_parser = parse_rational)]
        c: BigRational,
        /// group for plain scalars: mult or add
        #[arg(long, default_value = "mult")]
        kind: String,
    },
    /// |A:A| and |ψ(A):ψ(A)| style expansion of a set under a Möbius map
    Expansion {
        /// file whose scalars form A (and whose first mobius line is ψ)
        #[arg(
            long,
            conflicts_with = "subgroup",
            required_unless_present = "subgroup"
        )]
        input: Option<PathBuf>,
        /// use A = H_m, dropping zeros and poles of ψ
        #[arg(long)]
        subgroup: Option<u32>,
        #[arg(long, default_value = "two-pt")]
        mode: String,
    },
    /// Incidences between the pairs and the Möbius graphs in a file
    Mobius {
        input: PathBuf,
        #[arg(long)]
        no_naive: bool,
    },
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    s.parse()
        .map_err(|_| format!("'{s}' is not a rational number"))
}

pub enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Domain(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) => m,
        }
    }
}

fn domain(e: impl Display) -> Failure {
    Failure::Domain(e.to_string())
}

/// Ordered `key: value` lines.
#[derive(Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        self.lines
            .iter()
            .map(|(k, v)| format!("{k}: {v}\n"))
            .collect()
    }
}

fn read_file(path: &Path) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure::Usage(format!("{}:{e}", path.display())))
}

fn load_config(f: &ConfigFile) -> Result<(Configuration, usize), Failure> {
    let (points, labels): (Vec<ProjPoint>, Vec<Option<String>>) = f.points.iter().cloned().unzip();
    if points.is_empty() {
        return Err(Failure::Domain("file has no points".into()));
    }
    Configuration::new(f.order, points, labels).map_err(domain)
}

fn promote(xs: &[CycNum], order: u32) -> Result<Vec<CycNum>, Failure> {
    xs.iter()
        .map(|x| {
            x.embed(order).map_err(|e| {
                Failure::Domain(format!("cannot promote {x} into Q(zeta_{order}): {e}"))
            })
        })
        .collect()
}

fn histogram_text(h: &std::collections::BTreeMap<usize, usize>) -> String {
    h.iter()
        .map(|(k, c)| format!("{k}x{c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses arguments, runs the command and returns (stdout, exit code);
/// failures are written to stderr.
pub fn run<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                return (text, 0);
            }
            eprint!("{text}");
            return (String::new(), 1);
        }
    };
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return (String::new(), 1);
        }
    };
    let start = Instant::now();
    match pool.install(|| dispatch(&cli)) {
        Ok(Output::Raw(s)) => (s, 0),
        Ok(Output::Report(body)) => {
            let mut r = Report::default();
            r.put("command", echo.join(" "));
            r.put("seed", cli.seed);
            r.lines.extend(body.lines);
            r.put("elapsed_ms", start.elapsed().as_millis());
            r.put("status", "ok");
            (r.render(), 0)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            (String::new(), f.code())
        }
    }
}

enum Output {
    Raw(String),
    Report(Report),
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Gen {
            kind: GenKind::Fermat { n, out },
        } => gen_fermat(*n, out.as_deref()),
        Command::Verify { input, limit } => verify(input, *limit).map(Output::Report),
        Command::Classify { input, params } => {
            run_classify(input, params, cli.seed).map(Output::Report)
        }
        Command::Measure { what } => measure(what, cli.seed).map(Output::Report),
        Command::Describe { input, base } => describe(input, base.as_deref()).map(Output::Report),
    }
}

fn gen_fermat(n: u32, out: Option<&Path>) -> Result<Output, Failure> {
    let f = fermat_config(n).map_err(domain)?;
    let mut file = ConfigFile::new(n);
    file.points = f
        .points()
        .iter()
        .cloned()
        .zip(f.labels().iter().cloned())
        .collect();
    let text = emit(&file);
    let Some(out) = out else {
        return Ok(Output::Raw(text));
    };
    std::fs::write(out, &text).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    let mut r = Report::default();
    r.put("kind", "fermat");
    r.put("n", n);
    r.put("points", f.len());
    r.put("out", out.display());
    Ok(Output::Report(r))
}

fn verify(input: &Path, limit: usize) -> Result<Report, Failure> {
    let file = read_file(input)?;
    let (config, dropped) = load_config(&file)?;
    let index = LineIncidenceIndex::build(&config);
    let sg = sg_check_with_index(&config, &index, limit).map_err(domain)?;
    let mut r = Report::default();
    r.put("limit", limit);
    r.put("order", config.order());
    r.put("points", config.len());
    r.put("duplicates_removed", dropped);
    r.put("lines", index.lines().len());
    r.put("is_sg", sg.is_sg);
    r.put("collinear", sg.collinear);
    r.put("ordinary_lines", sg.ordinary_line_count);
    for (l, members) in index
        .lines()
        .iter()
        .filter(|(_, m)| m.len() == 2)
        .take(limit)
    {
        let name = |i: usize| {
            config.labels()[i]
                .clone()
                .unwrap_or_else(|| format!("#{i}"))
        };
        r.put(
            "ordinary_line",
            format!(
                "{} through {} {}",
                line_text(l, config.order()),
                name(members[0]),
                name(members[1])
            ),
        );
    }
    r.put("triple_count", sg.triple_count);
    r.put("line_sizes", histogram_text(&sg.line_size_histogram));
    Ok(r)
}

fn line_text(l: &ProjLine, order: u32) -> String {
    let c = l.coeffs();
    format!(
        "<{} : {} : {}>",
        scalar_text(&c[0], order),
        scalar_text(&c[1], order),
        scalar_text(&c[2], order)
    )
}

fn run_classify(input: &Path, a: &ClassifyArgs, seed: u64) -> Result<Report, Failure> {
    let params = ClassifierParams {
        d: a.d,
        delta: a.delta.clone(),
        epsilon: a.epsilon.clone(),
        significance: a.significance.clone(),
        max_m: a.max_m,
        seed,
        ..ClassifierParams::default()
    };
    params
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let file = read_file(input)?;
    let (config, dropped) = load_config(&file)?;
    let v = classify(&config, &params).map_err(domain)?;
    let mut r = Report::default();
    r.put("d", params.d);
    r.put("delta", &params.delta);
    r.put("epsilon", &params.epsilon);
    r.put("significance", params.significance_fraction());
    r.put(
        "max_m",
        params
            .max_m
            .map_or_else(|| format!("{} (2|A|)", 2 * config.len()), |m| m.to_string()),
    );
    r.put("points", config.len());
    r.put("duplicates_removed", dropped);
    r.put("stage", v.stage);
    if let Some(c) = &v.curve {
        r.put("curve", c);
        r.put("coverage", v.coverage);
    }
    if let Some(k) = v.cubic_kind {
        r.put("cubic_kind", k);
    }
    for (i, g) in v.grids.iter().enumerate() {
        r.put(
            &format!("grid.{i}"),
            format!(
                "size {} differences {} doubling {}",
                g.set_size, g.diff_or_ratio_size, g.doubling_constant
            ),
        );
    }
    for (i, c) in v.certificates.iter().enumerate() {
        let text = c.as_ref().map_or("none".to_string(), |c| {
            format!(
                "m {} lambda {} sym_diff {}",
                c.m,
                scalar_text(&c.lambda, config.order()),
                c.sym_diff
            )
        });
        r.put(&format!("certificate.{i}"), text);
    }
    match &v.outcome {
        Outcome::FermatEquivalent { transform, m } => {
            r.put("outcome", "fermat-equivalent");
            r.put("m", m);
            let order = common_order(transform.matrix().iter().flatten()).map_err(domain)?;
            for (i, row) in transform.matrix().iter().enumerate() {
                let t: Vec<String> = row.iter().map(|x| scalar_text(x, order)).collect();
                r.put(&format!("transform.row{i}"), format!("[{}]", t.join(" , ")));
            }
            r.put("transform.order", order);
        }
        Outcome::OrdinaryLine { line, source } => {
            r.put("outcome", "ordinary-line");
            r.put("line", line_text(line, config.order()));
            r.put("source", source);
        }
        Outcome::Inconclusive { reason } => {
            r.put("outcome", "inconclusive");
            r.put("reason", reason);
        }
    }
    Ok(r)
}

fn measure(what: &Measure, seed: u64) -> Result<Report, Failure> {
    let mut r = Report::default();
    match what {
        Measure::Triples { input, no_naive } => {
            let (config, _) = load_config(&read_file(input)?)?;
            let index = LineIncidenceIndex::build(&config);
            let fast = index.triple_count();
            r.put("points", config.len());
            r.put("triple_count", fast);
            if !no_naive {
                let slow = naive_triple_count(&config);
                r.put("naive_count", slow);
                r.put("agree", fast == slow);
            }
        }
        Measure::Grids { input, c, kind } => {
            let file = read_file(input)?;
            r.put("c", c);
            if !file.scalars.is_empty() {
                let kind = match kind.as_str() {
                    "mult" => GroupKind::Multiplicative,
                    "add" => GroupKind::Additive,
                    other => {
                        return Err(Failure::Usage(format!(
                            "unknown group kind '{other}' (mult or add)"
                        )))
                    }
                };
                let q = promote(&file.scalars, file.order)?;
                put_grid(&mut r, "set", &q, kind, c)?;
            } else {
                let (config, _) = load_config(&file)?;
                let curve = match file.curves.first() {
                    Some(spec) => {
                        let c = spec.to_curve().map_err(domain)?;
                        let index = LineIncidenceIndex::build(&config);
                        let mut candidates = ProjLine::coordinate_lines(c.order()).to_vec();
                        candidates.extend(
                            index
                                .lines()
                                .iter()
                                .filter(|(_, m)| m.len() >= 3)
                                .map(|(l, _)| l.clone()),
                        );
                        c.split_linear_factors(&candidates)
                    }
                    None => {
                        let params = ClassifierParams {
                            seed,
                            ..ClassifierParams::default()
                        };
                        fit_low_degree_curve(&config, &params)
                            .map_err(domain)?
                            .ok_or_else(|| Failure::Domain("no cubic fits the points".into()))?
                            .0
                    }
                };
                let map = GroupMap::build(&curve).map_err(domain)?;
                let kind = if map.kind().is_multiplicative() {
                    GroupKind::Multiplicative
                } else {
                    GroupKind::Additive
                };
                r.put("cubic_kind", map.kind());
                let mut parts: Vec<Vec<CycNum>> = vec![Vec::new(); map.component_count()];
                let mut off = 0;
                for p in config.points() {
                    match map.rho(p) {
                        Ok(e) => match e.value {
                            GroupValue::Scalar(s) => parts[e.component_index].push(s),
                            GroupValue::Point(_) => {
                                return Err(Failure::Domain(
                                    "smooth cubics have no scalar chart".into(),
                                ))
                            }
                        },
                        Err(_) => off += 1,
                    }
                }
                r.put("points_off_chart", off);
                for (i, q) in parts.iter().enumerate() {
                    if !q.is_empty() {
                        put_grid(&mut r, &format!("component.{i}"), q, kind, c)?;
                    }
                }
            }
        }
        Measure::Expansion {
            input,
            subgroup: m,
            mode,
        } => {
            let mode = ExpansionMode::parse(mode).ok_or_else(|| {
                Failure::Usage(format!("unknown mode '{mode}' (two-pt, one-pt, mixed)"))
            })?;
            let (a, psi, dropped) = match (input, m) {
                (Some(path), _) => {
                    let file = read_file(path)?;
                    let psi = match file.mobius_maps().map_err(domain)?.first() {
                        Some(p) => p.clone(),
                        None => MobiusMap::from_ints(file.order, [1, 1, 0, 1]).map_err(domain)?,
                    };
                    let order = common_order(
                        [&psi.a, &psi.b, &psi.c, &psi.d]
                            .into_iter()
                            .chain(file.scalars.iter()),
                    )
                    .map_err(domain)?;
                    (promote(&file.scalars, order)?, promote_map(&psi, order)?, 0)
                }
                (None, Some(m)) => {
                    let psi = MobiusMap::from_ints(*m, [1, 1, 0, 1]).map_err(domain)?;
                    let all = subgroup(*m, *m);
                    let kept: Vec<CycNum> = all
                        .iter()
                        .filter(|x| psi.apply(x).is_some_and(|y| !y.is_zero()))
                        .cloned()
                        .collect();
                    (kept.clone(), psi, all.len() - kept.len())
                }
                (None, None) => unreachable!("clap requires one of the inputs"),
            };
            r.put("mode", mode.name());
            r.put(
                "psi",
                format!(
                    "({} x + {}) / ({} x + {})",
                    scalar_text(&psi.a, psi.a.order()),
                    scalar_text(&psi.b, psi.a.order()),
                    scalar_text(&psi.c, psi.a.order()),
                    scalar_text(&psi.d, psi.a.order())
                ),
            );
            r.put("dropped", dropped);
            let rep = expansion_report(&a, &psi, mode).map_err(domain)?;
            r.put("n", rep.n);
            r.put("quotient_set", rep.set_size);
            r.put("image_quotient_set", rep.image_size);
            r.put("max", rep.max);
            r.put("normalized", format!("{:.6}", rep.normalized));
        }
        Measure::Mobius { input, no_naive } => {
            let file = read_file(input)?;
            let flat: Vec<CycNum> = file
                .pairs
                .iter()
                .flat_map(|(x, y)| [x.clone(), y.clone()])
                .collect();
            let pairs_flat = promote(&flat, file.order)?;
            let pairs: Vec<(CycNum, CycNum)> = pairs_flat
                .chunks(2)
                .map(|c| (c[0].clone(), c[1].clone()))
                .collect();
            let maps_flat = promote(
                &file.maps.iter().flatten().cloned().collect::<Vec<_>>(),
                file.order,
            )?;
            let maps: Vec<MobiusMap> = maps_flat
                .chunks(4)
                .map(|c| MobiusMap::new(c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()))
                .collect::<Result<_, _>>()
                .map_err(domain)?;
            r.put("pairs", pairs.len());
            r.put("maps", maps.len());
            let fast = mobius_incidences(&pairs, &maps);
            r.put("incidences", fast);
            if !no_naive {
                let slow = mobius_incidences_naive(&pairs, &maps);
                r.put("naive_incidences", slow);
                r.put("agree", fast == slow);
            }
        }
    }
    Ok(r)
}

fn promote_map(psi: &MobiusMap, order: u32) -> Result<MobiusMap, Failure> {
    let v = promote(
        &[psi.a.clone(), psi.b.clone(), psi.c.clone(), psi.d.clone()],
        order,
    )?;
    MobiusMap::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()).map_err(domain)
}

fn put_grid(
    r: &mut Report,
    name: &str,
    q: &[CycNum],
    kind: GroupKind,
    c: &BigRational,
) -> Result<(), Failure> {
    let (ok, s) = grid_constant(q, kind, c).map_err(domain)?;
    r.put(&format!("{name}.size"), s.set_size);
    r.put(
        &format!(
            "{name}.{}",
            if kind == GroupKind::Multiplicative {
                "ratios"
            } else {
                "differences"
            }
        ),
        s.diff_or_ratio_size,
    );
    r.put(&format!("{name}.doubling"), s.doubling_constant);
    r.put(&format!("{name}.is_grid"), ok);
    Ok(())
}

fn describe(input: &Path, base: Option<&str>) -> Result<Report, Failure> {
    let file = read_file(input)?;
    let spec: &CurveSpec = file
        .curves
        .first()
        .ok_or_else(|| Failure::Domain("file has no curve".into()))?;
    let curve = spec.to_curve().map_err(domain)?;
    let map = match base {
        Some(b) => {
            let p: ProjPoint = b
                .parse()
                .map_err(|e| Failure::Usage(format!("--base: {e}")))?;
            GroupMap::with_base_point(&curve, &p)
        }
        None => GroupMap::build(&curve),
    }
    .map_err(domain)?;
    let mut r = Report::default();
    for line in map.describe() {
        match line.split_once(": ") {
            Some((k, v)) => r.put(k, v),
            None => r.put("note", line),
        }
    }
    Ok(r)
}
