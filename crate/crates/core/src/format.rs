//! Plain-text game files.
//!
//! ```text
//! # matching pennies
//! players 2
//! strategies 2 2
//! payoff 1
//! 1 -1 -1 1
//! payoff 2
//! -1 1 1 -1
//! ```
//!
//! Payoff entries are flattened row-major with the last player's strategy
//! varying fastest, and may be decimals or rationals `p/q`.

use num::BigRational;

use crate::error::{Error, Result};
use crate::game::{FiniteGame, NumericMode};
use crate::scalar::{format_rational, parse_rational, ratio_to_f64};

struct Token<'a> {
    line: usize,
    text: &'a str,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    text.lines()
        .enumerate()
        .flat_map(|(n, line)| {
            let content = line.split('#').next().unwrap_or("");
            content.split_whitespace().map(move |t| Token { line: n + 1, text: t })
        })
        .collect()
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, message: message.into() }
}

struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&Token<'a>> {
        let last = self.last_line;
        let tok = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| syntax(last, format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        self.last_line = tok.line;
        Ok(tok)
    }

    fn keyword(&mut self, kw: &str) -> Result<usize> {
        let tok = self.next(&format!("`{kw}`"))?;
        if tok.text != kw {
            return Err(syntax(tok.line, format!("expected `{kw}`, found `{}`", tok.text)));
        }
        Ok(tok.line)
    }

    fn integer(&mut self, what: &str) -> Result<(usize, usize)> {
        let tok = self.next(what)?;
        let v = tok
            .text
            .parse::<usize>()
            .map_err(|_| syntax(tok.line, format!("expected {what}, found `{}`", tok.text)))?;
        Ok((tok.line, v))
    }

    fn peek_is_keyword(&self) -> bool {
        self.tokens
            .get(self.pos)
            .is_some_and(|t| matches!(t.text, "players" | "strategies" | "payoff"))
    }
}

/// Parse a game file. In [`NumericMode::Exact`] every entry is kept as an exact
/// rational; in [`NumericMode::Float`] decimals are read as `f64` directly and
/// rationals are rounded once.
pub fn parse_game(text: &str, mode: NumericMode) -> Result<FiniteGame> {
    let mut cur = Cursor { tokens: tokenize(text), pos: 0, last_line: 1 };
    cur.keyword("players")?;
    let (line, m) = cur.integer("player count")?;
    if m == 0 {
        return Err(syntax(line, "player count must be at least 1"));
    }
    let strat_line = cur.keyword("strategies")?;
    let mut counts = Vec::with_capacity(m);
    while !cur.peek_is_keyword() && cur.pos < cur.tokens.len() {
        let (line, c) = cur.integer("strategy count")?;
        if c < 2 {
            return Err(syntax(line, format!("strategy count {c}: every player needs at least 2")));
        }
        counts.push(c);
    }
    if counts.len() != m {
        return Err(syntax(
            strat_line,
            format!("declared {m} players but {} strategy counts", counts.len()),
        ));
    }
    let cells: usize = counts.iter().product();
    let mut exact: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut float: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 1..=m {
        let kw_line = match cur.keyword("payoff") {
            Ok(l) => l,
            Err(Error::Syntax { line, message }) if message.starts_with("unexpected end") => {
                return Err(Error::ShapeMismatch(format!(
                    "line {line}: declared {m} players but found {} payoff tensors",
                    i - 1
                )));
            }
            Err(e) => return Err(e),
        };
        let (line, idx) = cur.integer("player index")?;
        if idx != i {
            return Err(syntax(line, format!("expected `payoff {i}`, found `payoff {idx}`")));
        }
        let mut ex = Vec::new();
        let mut fl = Vec::new();
        while cur.pos < cur.tokens.len() && !cur.peek_is_keyword() {
            let tok = cur.next("payoff entry")?;
            let value = parse_rational(tok.text)
                .ok_or_else(|| syntax(tok.line, format!("bad number `{}`", tok.text)))?;
            match mode {
                NumericMode::Exact => ex.push(value),
                NumericMode::Float => {
                    let x = if tok.text.contains('/') {
                        ratio_to_f64(&value)
                    } else {
                        tok.text
                            .parse::<f64>()
                            .map_err(|_| syntax(tok.line, format!("bad number `{}`", tok.text)))?
                    };
                    if !x.is_finite() {
                        return Err(syntax(tok.line, format!("non-finite number `{}`", tok.text)));
                    }
                    fl.push(x);
                }
            }
        }
        let got = ex.len().max(fl.len());
        if got != cells {
            return Err(Error::ShapeMismatch(format!(
                "line {kw_line}: payoff {i} has {got} entries, expected {cells}"
            )));
        }
        exact.push(ex);
        float.push(fl);
    }
    if let Some(tok) = cur.tokens.get(cur.pos) {
        return Err(syntax(tok.line, format!("trailing content `{}`", tok.text)));
    }
    match mode {
        NumericMode::Exact => FiniteGame::new_exact(counts, exact),
        NumericMode::Float => FiniteGame::new(counts, float),
    }
}

/// Inverse of [`parse_game`]: exact games print `p/q`, float games print the
/// shortest decimal that reads back to the same `f64`.
pub fn serialize_game(game: &FiniteGame) -> String {
    let counts = game.strategy_counts();
    let last = *counts.last().unwrap_or(&1);
    let mut out = format!(
        "players {}\nstrategies {}\n",
        game.num_players(),
        counts.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    );
    for i in 0..game.num_players() {
        out.push_str(&format!("payoff {}\n", i + 1));
        let entries: Vec<String> = match game.exact_payoffs() {
            Some(ex) => ex[i].data().iter().map(format_rational).collect(),
            None => game.payoff(i).data().iter().map(|x| format!("{x:?}")).collect(),
        };
        for row in entries.chunks(last) {
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}
