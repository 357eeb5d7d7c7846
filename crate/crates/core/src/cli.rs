//! The `mixext` command line: argument parsing, subcommands and report
//! rendering (human text or JSON with `meta`, `results`, `warnings`).

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use num::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::atlas::{chart_for, tilde_of_profile, ChartId, ChartPoint, StrategyLabel};
use crate::equilibrium::{enumerate_nash_with, NashReport, SolverOptions, SolverWarning, Tolerances};
use crate::error::{Error, Result};
use crate::format::parse_game;
use crate::game::{parse_shape, random_game, support_of, FiniteGame, MixedProfile, NumericMode, PayoffDistribution};
use crate::genericity::{find_cycle, is_good, transversal_at, GoodFamily, TransversalityReport};
use crate::multilinear::{affine_monomials, lambda_decomposition, lambda_decomposition_exact, MultilinearForm};
use crate::scalar::{format_rational, parse_rational, Scalar};

/// Exit status when a degeneracy witness was found.
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "mixext", version, about = "Equilibria and genericity checks for finite games")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Exact rational arithmetic (two-player games only).
    #[arg(long, global = true)]
    pub exact: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Membership and best-reply tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Relative singular-value threshold.
    #[arg(long = "rank-tol", global = true, default_value_t = 1e-8)]
    pub rank_tol: f64,
}

#[derive(Debug, Clone, Args, Default)]
pub struct FamilyArgs {
    /// Coordinate hyperplanes `i:j[,j...]` (player 1-based, `inf` allowed).
    #[arg(long = "t", value_name = "SPEC")]
    pub t: Vec<String>,
    /// Payoff-difference pairs `i:j-k[,j-k...]`.
    #[arg(long = "r", value_name = "SPEC")]
    pub r: Vec<String>,
}

impl FamilyArgs {
    fn is_empty(&self) -> bool {
        self.t.is_empty() && self.r.is_empty()
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate all Nash equilibria of a game file.
    Solve { file: String },
    /// Print the κ/λ decomposition of a player's payoff.
    Lambda {
        file: String,
        /// Player (1-based); all players when omitted.
        #[arg(long)]
        player: Option<usize>,
    },
    /// Check whether a family of hypersurfaces is good.
    Goodcheck {
        /// Shape such as `3x2`; inferred from the family when omitted.
        #[arg(long)]
        shape: Option<String>,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Sample random games and summarize equilibrium counts.
    Sample {
        shape: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = "uniform")]
        dist: String,
    },
    /// Transversality report of a family at a point.
    Certify {
        file: String,
        /// Mixed weights per player, e.g. `0.5,0.5;1/3,2/3`.
        #[arg(long, conflicts_with = "from_solve")]
        point: Option<String>,
        /// JSON report of `solve` to read the point from.
        #[arg(long = "from-solve", requires = "equilibrium")]
        from_solve: Option<String>,
        /// 1-based index into the solve report's equilibria.
        #[arg(long)]
        equilibrium: Option<usize>,
        #[command(flatten)]
        family: FamilyArgs,
        /// Chart `l1,l2,...`; chosen from the point when omitted.
        #[arg(long)]
        chart: Option<String>,
    },
    /// List the charts of a shape and their complements.
    Charts { shape: String },
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli) {
        Ok(rendered) => {
            let _ = out.write_all(rendered.text.as_bytes());
            rendered.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Rendered output of one command.
pub struct Rendered {
    pub text: String,
    pub code: i32,
}

struct Report {
    command: &'static str,
    meta: Value,
    results: Value,
    warnings: Vec<Value>,
    text: String,
    code: i32,
}

fn execute(cli: &Cli) -> Result<Rendered> {
    let g = &cli.global;
    if !(g.tol > 0.0 && g.tol.is_finite()) || !(g.rank_tol > 0.0 && g.rank_tol.is_finite()) {
        return Err(Error::Usage("--tol and --rank-tol must be positive".into()));
    }
    let report = match &cli.command {
        Command::Solve { file } => cmd_solve(g, file)?,
        Command::Lambda { file, player } => cmd_lambda(g, file, *player)?,
        Command::Goodcheck { shape, family } => cmd_goodcheck(shape.as_deref(), family)?,
        Command::Sample { shape, count, dist } => cmd_sample(g, shape, *count, dist)?,
        Command::Certify { file, point, from_solve, equilibrium, family, chart } => cmd_certify(
            g,
            file,
            PointSource::from_args(point.as_deref(), from_solve.as_deref(), *equilibrium)?,
            family,
            chart.as_deref(),
        )?,
        Command::Charts { shape } => cmd_charts(shape)?,
    };
    let text = if g.json {
        let mut meta = json!({
            "command": report.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": g.seed,
            "tol": g.tol,
            "rank_tol": g.rank_tol,
            "exact": g.exact,
        });
        if let (Value::Object(m), Value::Object(extra)) = (&mut meta, report.meta) {
            m.extend(extra);
        }
        let doc = json!({ "meta": meta, "results": report.results, "warnings": report.warnings });
        serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
    } else {
        report.text
    };
    Ok(Rendered { text, code: report.code })
}

fn tolerances(g: &GlobalOpts) -> Tolerances {
    Tolerances { membership: g.tol, margin: g.tol, equality: g.tol, rank: g.rank_tol, ..Tolerances::default() }
}

fn solver_options(g: &GlobalOpts) -> SolverOptions {
    SolverOptions { tol: tolerances(g), seed: g.seed, ..SolverOptions::default() }
}

fn load_game(g: &GlobalOpts, path: &str) -> Result<FiniteGame> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read `{path}`: {e}")))?;
    let mode = if g.exact { NumericMode::Exact } else { NumericMode::Float };
    let game = parse_game(&text, mode)?;
    if g.exact && game.num_players() != 2 {
        return Err(Error::Usage(format!(
            "--exact is only available for two-player games (this game has {})",
            game.num_players()
        )));
    }
    Ok(game)
}

fn shape_string(counts: &[usize]) -> String {
    counts.iter().map(ToString::to_string).collect::<Vec<_>>().join("x")
}

fn game_meta(path: &str, game: &FiniteGame) -> Value {
    json!({ "input": path, "players": game.num_players(), "strategies": game.strategy_counts() })
}

fn num(x: f64, exact: Option<&BigRational>) -> Value {
    match exact {
        Some(r) => Value::String(format_rational(r)),
        None => json!(x),
    }
}

fn fmt_num(x: f64, exact: Option<&BigRational>) -> String {
    exact.map_or_else(|| format!("{x}"), format_rational)
}

fn fmt_opt_sv(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.6e}"))
}

fn profile_text(p: &MixedProfile<f64>) -> String {
    let players: Vec<String> = p
        .weights
        .iter()
        .map(|w| format!("({})", w.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("({})", players.join(", "))
}

fn profile_json(p: &MixedProfile<f64>, exact: Option<&MixedProfile<BigRational>>) -> Value {
    Value::Array(
        p.weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                Value::Array(
                    w.iter().enumerate().map(|(j, &x)| num(x, exact.map(|e| &e.weights[i][j]))).collect(),
                )
            })
            .collect(),
    )
}

fn warning_json(w: &SolverWarning) -> Value {
    json!({
        "kind": w.kind,
        "support": w.support.supports,
        "message": w.message,
        "witness": w.witness.as_ref().map(|x| json!({
            "point": x.point.weights,
            "rank": x.rank,
            "expected_rank": x.expected_rank,
            "smallest_singular_value": x.smallest_singular_value,
        })),
    })
}

fn warning_text(w: &SolverWarning) -> String {
    let mut s = format!("warning: {}", w.message);
    if let Some(x) = &w.witness {
        s += &format!(
            "\n  witness: point {}, Jacobian rank {} of {}, smallest singular value {}",
            profile_text(&x.point),
            x.rank,
            x.expected_rank,
            fmt_opt_sv(x.smallest_singular_value)
        );
    }
    s
}

fn cmd_solve(g: &GlobalOpts, path: &str) -> Result<Report> {
    let game = load_game(g, path)?;
    let report = enumerate_nash_with(&game, &solver_options(g));
    let exact_out = g.exact;
    let mut text = format!(
        "game: {} players, strategies {}\n",
        game.num_players(),
        shape_string(game.strategy_counts())
    );
    let equilibria: Vec<Value> = report
        .equilibria
        .iter()
        .map(|c| {
            let exact_point = if exact_out { c.exact_point.as_ref() } else { None };
            let exact_pay = if exact_out { c.exact_payoffs.as_ref() } else { None };
            json!({
                "support": c.support.supports,
                "point": profile_json(&c.point, exact_point),
                "payoffs": c.payoffs.iter().enumerate()
                    .map(|(i, &v)| num(v, exact_pay.map(|e| &e[i]))).collect::<Vec<_>>(),
                "equality_residual": c.equality_residual,
                "inequality_margin": c.inequality_margin,
                "boundary_degenerate": c.boundary_degenerate,
                "jacobian": c.jacobian,
                "exact": c.exact,
            })
        })
        .collect();
    match (&report.continuum, report.count()) {
        (Some(cw), _) => {
            text += &format!("non-generic: continuum detected on support {}\n", cw.support);
            for p in &cw.points {
                text += &format!("  equilibrium in the continuum: {}\n", profile_text(p));
            }
            if !report.equilibria.is_empty() {
                text += &format!("isolated equilibria found besides: {}\n", report.equilibria.len());
            }
        }
        (None, Some(n)) => text += &format!("equilibria: {n}\n"),
        _ => unreachable!(),
    }
    for (k, c) in report.equilibria.iter().enumerate() {
        text += &format!("[{}] support {}\n", k + 1, c.support);
        for (i, w) in c.point.weights.iter().enumerate() {
            let entries: Vec<String> = w
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    fmt_num(x, if exact_out { c.exact_point.as_ref().map(|e| &e.weights[i][j]) } else { None })
                })
                .collect();
            text += &format!("    player {}: {}\n", i + 1, entries.join(" "));
        }
        let pays: Vec<String> = c
            .payoffs
            .iter()
            .enumerate()
            .map(|(i, &v)| fmt_num(v, if exact_out { c.exact_payoffs.as_ref().map(|e| &e[i]) } else { None }))
            .collect();
        text += &format!("    payoffs: {}\n", pays.join(" "));
        text += &format!(
            "    residual {:.3e}, margin {}, Jacobian {} (rank {} of {}, smallest singular value {})\n",
            c.equality_residual,
            c.inequality_margin.map_or_else(|| "none".into(), |m| format!("{m:.6e}")),
            if c.jacobian.regular { "regular" } else { "degenerate" },
            c.jacobian.rank,
            c.jacobian.size,
            fmt_opt_sv(c.jacobian.smallest_singular_value),
        );
    }
    for w in &report.warnings {
        text += &warning_text(w);
        text.push('\n');
    }
    let code = if report.degeneracy_witnessed() { EXIT_DEGENERATE } else { 0 };
    Ok(Report {
        command: "solve",
        meta: game_meta(path, &game),
        results: json!({
            "finite": report.is_finite(),
            "count": report.count(),
            "equilibria": equilibria,
            "continuum": report.continuum.as_ref().map(|c| json!({
                "support": c.support.supports,
                "points": c.points.iter().map(|p| p.weights.clone()).collect::<Vec<_>>(),
            })),
        }),
        warnings: report.warnings.iter().map(warning_json).collect(),
        text,
        code,
    })
}

fn monomial_name(factors: &[(usize, usize)]) -> String {
    if factors.is_empty() {
        return "1".into();
    }
    factors.iter().map(|(p, j)| format!("g{}_{}", p + 1, j)).collect::<Vec<_>>().join("*")
}

fn form_terms<T: Scalar>(form: &MultilinearForm<T>, show: impl Fn(&T) -> (Value, String)) -> (Value, String) {
    let mut rows = Vec::new();
    let mut text = String::new();
    for (factors, c) in affine_monomials(form) {
        let name = monomial_name(&factors);
        let (v, s) = show(&c);
        text += &format!("    {name:<16} {s}\n");
        rows.push(json!({ "monomial": name, "coeff": v }));
    }
    (Value::Array(rows), text)
}

fn cmd_lambda(g: &GlobalOpts, path: &str, player: Option<usize>) -> Result<Report> {
    let game = load_game(g, path)?;
    let m = game.num_players();
    let players: Vec<usize> = match player {
        Some(p) if p == 0 || p > m => {
            return Err(Error::Usage(format!("player {p} out of range: the game has {m} players")))
        }
        Some(p) => vec![p - 1],
        None => (0..m).collect(),
    };
    let mut text = String::new();
    let mut results = Vec::new();
    for i in players {
        let (kappa, lambdas): ((Value, String), Vec<(Value, String)>) = if g.exact {
            let d = lambda_decomposition_exact(&game, i);
            let show = |c: &BigRational| (Value::String(format_rational(c)), format_rational(c));
            (form_terms(&d.kappa, show), d.lambdas[1..].iter().map(|f| form_terms(f, show)).collect())
        } else {
            let d = lambda_decomposition(&game, i);
            let show = |c: &f64| (json!(c), format!("{c}"));
            (form_terms(&d.kappa, show), d.lambdas[1..].iter().map(|f| form_terms(f, show)).collect())
        };
        text += &format!("player {}\n  kappa\n{}", i + 1, kappa.1);
        for (j, l) in lambdas.iter().enumerate() {
            text += &format!("  lambda_{}\n{}", j + 1, l.1);
        }
        results.push(json!({
            "player": i + 1,
            "kappa": kappa.0,
            "lambdas": lambdas.into_iter().enumerate()
                .map(|(j, l)| json!({ "strategy": j + 1, "terms": l.0 })).collect::<Vec<_>>(),
        }));
    }
    Ok(Report {
        command: "lambda",
        meta: game_meta(path, &game),
        results: Value::Array(results),
        warnings: Vec::new(),
        text,
        code: 0,
    })
}

fn split_player(spec: &str) -> Result<(usize, &str)> {
    let (p, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Usage(format!("bad family spec `{spec}`: expected `player:list`")))?;
    let p: usize = p
        .trim()
        .parse()
        .ok()
        .filter(|&p| p >= 1)
        .ok_or_else(|| Error::Usage(format!("bad player `{p}` in `{spec}` (players are 1-based)")))?;
    Ok((p - 1, rest))
}

/// Parse `--t` / `--r` specs into per-player sets, sized to `players`
/// (or to the largest player mentioned when `None`).
pub fn parse_family(args: &FamilyArgs, players: Option<usize>) -> Result<GoodFamily> {
    let mut t: Vec<(usize, StrategyLabel)> = Vec::new();
    let mut r: Vec<(usize, (usize, usize))> = Vec::new();
    for spec in &args.t {
        let (p, list) = split_player(spec)?;
        for item in list.split(',') {
            t.push((p, item.trim().parse()?));
        }
    }
    for spec in &args.r {
        let (p, list) = split_player(spec)?;
        for item in list.split(',') {
            let bad = || Error::Usage(format!("bad pair `{item}` in `{spec}`: expected `j-k`"));
            let (a, b) = item.trim().split_once('-').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == b {
                return Err(Error::Usage(format!("pair `{item}` is a loop; pairs need two distinct strategies")));
            }
            r.push((p, (a.min(b), a.max(b))));
        }
    }
    let mentioned = t.iter().map(|x| x.0 + 1).chain(r.iter().map(|x| x.0 + 1)).max().unwrap_or(0);
    let m = match players {
        Some(m) if mentioned > m => {
            return Err(Error::Usage(format!("family mentions player {mentioned} but the game has {m}")))
        }
        Some(m) => m,
        None => mentioned,
    };
    let mut family = GoodFamily::empty(m);
    for (p, l) in t {
        family.t[p].insert(l);
    }
    for (p, e) in r {
        family.r[p].insert(e);
    }
    Ok(family)
}

fn inferred_counts(family: &GoodFamily) -> Vec<usize> {
    family
        .t
        .iter()
        .zip(&family.r)
        .map(|(t, r)| {
            let from_t = t.iter().filter_map(|l| if let StrategyLabel::Finite(j) = l { Some(j + 1) } else { None });
            let from_r = r.iter().map(|&(_, k)| k + 1);
            from_t.chain(from_r).max().unwrap_or(0).max(2)
        })
        .collect()
}

fn family_text(family: &GoodFamily) -> String {
    let names: Vec<String> = family.hypersurfaces().iter().map(ToString::to_string).collect();
    if names.is_empty() {
        "(empty)".into()
    } else {
        names.join(" ")
    }
}

fn cmd_goodcheck(shape: Option<&str>, args: &FamilyArgs) -> Result<Report> {
    let counts = shape.map(parse_shape).transpose()?;
    let family = parse_family(args, counts.as_ref().map(Vec::len))?;
    let counts = counts.unwrap_or_else(|| inferred_counts(&family));
    family.validate(&counts)?;
    let good = is_good(&family);
    let cycle = (0..family.num_players()).find_map(|p| find_cycle(&family, p).map(|c| (p, c)));
    let mut text = format!("family: {}\n", family_text(&family));
    match &cycle {
        None => text += "good\n",
        Some((p, c)) => {
            let cs: Vec<String> = c.iter().map(ToString::to_string).collect();
            text += &format!("not good: player {} has cycle ({})\n", p + 1, cs.join(","));
        }
    }
    Ok(Report {
        command: "goodcheck",
        meta: json!({ "strategies": counts }),
        results: json!({
            "good": good,
            "family": family.hypersurfaces().iter().map(ToString::to_string).collect::<Vec<_>>(),
            "cycle": cycle.map(|(p, c)| json!({ "player": p + 1, "vertices": c })),
        }),
        warnings: Vec::new(),
        text,
        code: 0,
    })
}

/// Per-game summary of a sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub seed: u64,
    pub count: Option<usize>,
    pub odd: bool,
    pub regular: bool,
    pub degeneracy_witnessed: bool,
    pub warnings: usize,
}

pub fn sample_row(report: &NashReport, seed: u64) -> SampleRow {
    let count = report.count();
    SampleRow {
        seed,
        count,
        odd: count.is_some_and(|n| n % 2 == 1),
        regular: report.all_regular(),
        degeneracy_witnessed: report.degeneracy_witnessed(),
        warnings: report.warnings.len(),
    }
}

fn cmd_sample(g: &GlobalOpts, shape: &str, count: usize, dist: &str) -> Result<Report> {
    if g.exact {
        return Err(Error::Usage("--exact does not apply to sample: sampled games are floating point".into()));
    }
    if count == 0 {
        return Err(Error::Usage("--count must be at least 1".into()));
    }
    let counts = parse_shape(shape)?;
    let dist: PayoffDistribution = dist.parse()?;
    let opts = solver_options(g);
    let rows: Vec<SampleRow> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let seed = g.seed.wrapping_add(k);
            let game = random_game(&counts, seed, dist).expect("shape validated");
            sample_row(&enumerate_nash_with(&game, &opts), seed)
        })
        .collect();
    let odd = rows.iter().filter(|r| r.odd).count();
    let degenerate = rows.iter().filter(|r| r.degeneracy_witnessed).count();
    let oddness_rate = odd as f64 / count as f64;
    let degeneracy_rate = degenerate as f64 / count as f64;
    let mut text = format!("shape {}, {} games, seeds {}..{}\n", shape_string(&counts), count, g.seed, g.seed + count as u64 - 1);
    for r in &rows {
        text += &format!(
            "seed {:>6}: equilibria {:>4}  odd {:<5}  regular {:<5}  warnings {}\n",
            r.seed,
            r.count.map_or_else(|| "inf".into(), |n| n.to_string()),
            r.odd,
            r.regular,
            r.warnings
        );
    }
    text += &format!("oddness rate {oddness_rate:.4} ({odd}/{count})\n");
    text += &format!("degeneracy-witness rate {degeneracy_rate:.4} ({degenerate}/{count})\n");
    Ok(Report {
        command: "sample",
        meta: json!({ "strategies": counts, "count": count, "distribution": format!("{dist:?}").to_lowercase() }),
        results: json!({
            "games": rows.iter().map(|r| json!({
                "seed": r.seed,
                "count": r.count,
                "odd": r.odd,
                "regular": r.regular,
                "degeneracy_witnessed": r.degeneracy_witnessed,
                "warnings": r.warnings,
            })).collect::<Vec<_>>(),
            "oddness_rate": oddness_rate,
            "degeneracy_rate": degeneracy_rate,
        }),
        warnings: Vec::new(),
        text,
        code: 0,
    })
}

pub enum PointSource<'a> {
    Inline(&'a str),
    FromSolve { path: &'a str, index: usize },
}

impl<'a> PointSource<'a> {
    fn from_args(point: Option<&'a str>, from_solve: Option<&'a str>, index: Option<usize>) -> Result<Self> {
        match (point, from_solve, index) {
            (Some(p), None, _) => Ok(Self::Inline(p)),
            (None, Some(path), Some(index)) => Ok(Self::FromSolve { path, index }),
            _ => Err(Error::Usage("certify needs --point or --from-solve with --equilibrium".into())),
        }
    }
}

/// Parse `a,b;c,d` into per-player weights.
pub fn parse_point(spec: &str) -> Result<Vec<Vec<f64>>> {
    spec.split(';')
        .map(|player| {
            player
                .split(',')
                .map(|x| {
                    parse_rational(x)
                        .map(|r| r.as_f64())
                        .ok_or_else(|| Error::Usage(format!("bad coordinate `{}` in point `{spec}`", x.trim())))
                })
                .collect()
        })
        .collect()
}

fn point_from_solve(path: &str, index: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read `{path}`: {e}")))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("`{path}` is not a JSON report: {e}")))?;
    let eqs = doc["results"]["equilibria"]
        .as_array()
        .ok_or_else(|| Error::Usage(format!("`{path}` has no results.equilibria")))?;
    let eq = index
        .checked_sub(1)
        .and_then(|k| eqs.get(k))
        .ok_or_else(|| Error::Usage(format!("equilibrium {index} not found ({} in report)", eqs.len())))?;
    let bad = || Error::Usage(format!("malformed point in equilibrium {index}"));
    eq["point"]
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|w| {
            w.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|x| match x {
                    Value::Number(n) => n.as_f64().ok_or_else(bad),
                    Value::String(s) => parse_rational(s).map(|r| r.as_f64()).ok_or_else(bad),
                    _ => Err(bad()),
                })
                .collect()
        })
        .collect()
}

fn transversality_json(r: &TransversalityReport) -> Value {
    json!({
        "chart": r.chart.to_string(),
        "point": r.point.coords,
        "active": r.active.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "jacobian": r.jacobian,
        "rank": r.rank,
        "smallest_singular_value": r.smallest_singular_value,
        "verdict": r.verdict,
    })
}

fn cmd_certify(
    g: &GlobalOpts,
    path: &str,
    source: PointSource<'_>,
    args: &FamilyArgs,
    chart: Option<&str>,
) -> Result<Report> {
    let game = load_game(g, path)?;
    let counts = game.strategy_counts().to_vec();
    let weights = match source {
        PointSource::Inline(spec) => parse_point(spec)?,
        PointSource::FromSolve { path, index } => point_from_solve(path, index)?,
    };
    let profile = MixedProfile::new(weights);
    if !profile.matches_shape(&counts) {
        return Err(Error::DimensionMismatch {
            expected: counts.len(),
            got: profile.num_players(),
        });
    }
    if profile.weights.iter().any(|w| w.iter().all(|&x| x == 0.0)) {
        return Err(Error::Usage("each player's weight vector must be nonzero".into()));
    }
    let tilde = tilde_of_profile(&profile);
    let chart: ChartId = match chart {
        Some(c) => {
            let id: ChartId = c.parse()?;
            id.validate(&counts)?;
            id
        }
        None => chart_for(&tilde),
    };
    let point = ChartPoint::from_tilde(&tilde, chart.clone())?;
    let family = if args.is_empty() {
        let sums: Vec<f64> = profile.weights.iter().map(|w| w.iter().sum()).collect();
        let normalized = MixedProfile::new(
            profile.weights.iter().zip(&sums).map(|(w, s)| w.iter().map(|x| x / s).collect()).collect(),
        );
        GoodFamily::canonical(&counts, &support_of(&normalized, crate::game::DEFAULT_ZERO_TOL))
    } else {
        parse_family(args, Some(counts.len()))?
    };
    family.validate(&counts)?;
    if !is_good(&family) {
        return Err(Error::InvalidFamily(format!("{} is not good: a pair graph has a cycle", family_text(&family))));
    }
    let report = match transversal_at(&game, &family, &point, g.tol, g.rank_tol) {
        Err(Error::ChartExcludesHypersurface { chart, hypersurface }) => {
            return Err(Error::Usage(format!(
                "chart {chart} excludes {hypersurface}: that hypersurface lies in the chart's complement \
                 (a chart l never contains the hyperplane indexed by l_i); choose another --chart"
            )))
        }
        other => other?,
    };
    let mut text = format!("family: {}\nchart: {}\npoint: {:?}\n", family_text(&family), report.chart, report.point.coords);
    let active: Vec<String> = report.active.iter().map(ToString::to_string).collect();
    text += &format!("active: {}\n", if active.is_empty() { "(none)".into() } else { active.join(" ") });
    if !report.jacobian.is_empty() {
        text += "jacobian:\n";
        for row in &report.jacobian {
            text += &format!("  [{}]\n", row.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", "));
        }
    }
    text += &format!(
        "rank {} of {}, smallest singular value {}\n",
        report.rank,
        report.active.len(),
        fmt_opt_sv(report.smallest_singular_value)
    );
    let transversal = report.is_transversal();
    text += if transversal {
        if report.active.is_empty() {
            "verdict: transversal (no family member passes through the point)\n"
        } else {
            "verdict: transversal\n"
        }
    } else {
        "verdict: degenerate\n"
    };
    let warnings = if transversal {
        Vec::new()
    } else {
        vec![json!({
            "kind": "degenerate_jacobian",
            "message": format!("rank {} below the {} active hypersurfaces", report.rank, report.active.len()),
        })]
    };
    Ok(Report {
        command: "certify",
        meta: game_meta(path, &game),
        results: transversality_json(&report),
        warnings,
        text,
        code: if transversal { 0 } else { EXIT_DEGENERATE },
    })
}

fn cmd_charts(shape: &str) -> Result<Report> {
    let counts = parse_shape(shape)?;
    let mut text = format!("shape {}: {} charts\n", shape_string(&counts), ChartId::all(&counts).len());
    let mut rows = Vec::new();
    for chart in ChartId::all(&counts) {
        let complement: Vec<String> = chart.complement().iter().map(ToString::to_string).collect();
        text += &format!("chart {:<12} complement {}\n", chart.to_string(), complement.join(" u "));
        rows.push(json!({ "chart": chart.to_string(), "complement": complement }));
    }
    Ok(Report {
        command: "charts",
        meta: json!({ "strategies": counts }),
        results: Value::Array(rows),
        warnings: Vec::new(),
        text,
        code: 0,
    })
}
