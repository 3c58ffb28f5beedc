//! JSON file formats for games, k-player games and bipartite graphs.
//!
//! Two-player games:
//!
//! ```text
//! { "x_size": 2, "y_size": 2, "a_size": 2, "b_size": 2,
//!   "mu": [[x, y, num, den], ...],
//!   "predicate": [[a, b, x, y], ...],
//!   "weights": [[a, b, x, y, num, den], ...],
//!   "provenance": { "key": "value", ... } }
//! ```
//!
//! Omitted `mu` pairs have mass 0 and omitted predicate tuples lose.
//! `weights` is optional and carries fractional acceptance probabilities.
//! Numerators and denominators are JSON integers, or decimal strings when
//! they do not fit in 64 bits. Writers emit entries in sorted order, one per
//! line, so equal games serialize to equal bytes.
//!
//! k-player games use `question_sizes`, `answer_sizes`, `mu` entries
//! `[q_1, …, q_k, num, den]` and predicate entries `[a_1, …, a_k, q_1, …, q_k]`.
//! Graphs are `{ "left_size", "right_size", "edges": [[left, right], ...] }`
//! with repeated pairs for multi-edges.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{Map, Value};

use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::game::{Game, Predicate};
use crate::kplayer::KPlayerGame;
use crate::spectral::BipartiteGraph;

pub type Provenance = BTreeMap<String, String>;

/// A parsed game file of either arity.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyGame {
    Two(Game),
    Many(KPlayerGame),
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| fmt_err(format!("missing field {key:?}")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| fmt_err(format!("{what} must be a non-negative integer, got {v}")))
}

fn size_field(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    as_usize(field(obj, key)?, key)
}

fn as_bigint(v: &Value, what: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| fmt_err(format!("{what} must be an integer, got {n}"))),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| fmt_err(format!("{what} is not an integer string: {s:?}"))),
        other => Err(fmt_err(format!("{what} must be an integer, got {other}"))),
    }
}

fn as_rational(num: &Value, den: &Value) -> Result<Rational> {
    let n = as_bigint(num, "numerator")?;
    let d = as_bigint(den, "denominator")?;
    if d.is_zero() {
        return Err(fmt_err("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

fn rows<'a>(obj: &'a Map<String, Value>, key: &str, width: usize) -> Result<Vec<&'a [Value]>> {
    let Some(v) = obj.get(key) else {
        return Ok(Vec::new());
    };
    let arr = v
        .as_array()
        .ok_or_else(|| fmt_err(format!("{key:?} must be an array")))?;
    arr.iter()
        .map(|row| {
            let r = row
                .as_array()
                .ok_or_else(|| fmt_err(format!("entries of {key:?} must be arrays")))?;
            if r.len() != width {
                return Err(fmt_err(format!(
                    "entries of {key:?} need {width} fields, got {}",
                    r.len()
                )));
            }
            Ok(r.as_slice())
        })
        .collect()
}

fn index(row: &[Value], i: usize, bound: usize, what: &str) -> Result<usize> {
    let v = as_usize(&row[i], what)?;
    if v >= bound {
        return Err(fmt_err(format!("{what} {v} out of range (size {bound})")));
    }
    Ok(v)
}

fn provenance_of(obj: &Map<String, Value>) -> Result<Provenance> {
    let mut out = Provenance::new();
    if let Some(p) = obj.get("provenance") {
        let p = p
            .as_object()
            .ok_or_else(|| fmt_err("\"provenance\" must be an object"))?;
        for (k, v) in p {
            let s = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.insert(k.clone(), s);
        }
    }
    Ok(out)
}

fn parse_object(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(text)? {
        Value::Object(m) => Ok(m),
        _ => Err(fmt_err("top level must be an object")),
    }
}

fn game_from_object(obj: &Map<String, Value>) -> Result<Game> {
    let xs = size_field(obj, "x_size")?;
    let ys = size_field(obj, "y_size")?;
    let as_ = size_field(obj, "a_size")?;
    let bs = size_field(obj, "b_size")?;
    let mut mu = vec![Rational::zero(); xs * ys];
    for r in rows(obj, "mu", 4)? {
        let x = index(r, 0, xs, "x")?;
        let y = index(r, 1, ys, "y")?;
        mu[x * ys + y] += as_rational(&r[2], &r[3])?;
    }
    let n = xs * ys * as_ * bs;
    let at = |a: usize, b: usize, x: usize, y: usize| ((x * ys + y) * as_ + a) * bs + b;
    let mut weights = vec![Rational::zero(); n];
    for r in rows(obj, "predicate", 4)? {
        let (a, b) = (index(r, 0, as_, "a")?, index(r, 1, bs, "b")?);
        let (x, y) = (index(r, 2, xs, "x")?, index(r, 3, ys, "y")?);
        weights[at(a, b, x, y)] = Rational::one();
    }
    let extra = rows(obj, "weights", 6)?;
    let boolean = extra.is_empty();
    for r in extra {
        let (a, b) = (index(r, 0, as_, "a")?, index(r, 1, bs, "b")?);
        let (x, y) = (index(r, 2, xs, "x")?, index(r, 3, ys, "y")?);
        weights[at(a, b, x, y)] = as_rational(&r[4], &r[5])?;
    }
    let predicate = if boolean {
        Predicate::Boolean(weights.iter().map(|w| w.is_one()).collect())
    } else {
        Predicate::Weighted(weights).simplify()
    };
    Game::new(xs, ys, as_, bs, mu, predicate)
}

fn kplayer_from_object(obj: &Map<String, Value>) -> Result<KPlayerGame> {
    let sizes = |key: &str| -> Result<Vec<usize>> {
        field(obj, key)?
            .as_array()
            .ok_or_else(|| fmt_err(format!("{key:?} must be an array")))?
            .iter()
            .map(|v| as_usize(v, key))
            .collect()
    };
    let qs = sizes("question_sizes")?;
    let an = sizes("answer_sizes")?;
    let k = qs.len();
    if an.len() != k || k == 0 {
        return Err(fmt_err("question_sizes and answer_sizes must have the same non-zero length"));
    }
    let qtotal: usize = qs.iter().product();
    let atotal: usize = an.iter().product();
    let flat = |digits: &[usize], radix: &[usize]| digits.iter().zip(radix).fold(0, |acc, (d, r)| acc * r + d);
    let mut mu = vec![Rational::zero(); qtotal];
    for r in rows(obj, "mu", k + 2)? {
        let q = (0..k)
            .map(|i| index(r, i, qs[i], "question"))
            .collect::<Result<Vec<_>>>()?;
        mu[flat(&q, &qs)] += as_rational(&r[k], &r[k + 1])?;
    }
    let mut pred = vec![false; qtotal * atotal];
    for r in rows(obj, "predicate", 2 * k)? {
        let a = (0..k)
            .map(|i| index(r, i, an[i], "answer"))
            .collect::<Result<Vec<_>>>()?;
        let q = (0..k)
            .map(|i| index(r, k + i, qs[i], "question"))
            .collect::<Result<Vec<_>>>()?;
        pred[flat(&q, &qs) * atotal + flat(&a, &an)] = true;
    }
    KPlayerGame::new(qs, an, mu, pred)
}

pub fn parse_game(text: &str) -> Result<(Game, Provenance)> {
    let obj = parse_object(text)?;
    Ok((game_from_object(&obj)?, provenance_of(&obj)?))
}

pub fn parse_kplayer_game(text: &str) -> Result<(KPlayerGame, Provenance)> {
    let obj = parse_object(text)?;
    Ok((kplayer_from_object(&obj)?, provenance_of(&obj)?))
}

/// Dispatches on `question_sizes`: present means k-player.
pub fn parse_any_game(text: &str) -> Result<(AnyGame, Provenance)> {
    let obj = parse_object(text)?;
    let g = if obj.contains_key("question_sizes") {
        AnyGame::Many(kplayer_from_object(&obj)?)
    } else {
        AnyGame::Two(game_from_object(&obj)?)
    };
    Ok((g, provenance_of(&obj)?))
}

pub fn parse_graph(text: &str) -> Result<BipartiteGraph> {
    let obj = parse_object(text)?;
    let l = size_field(&obj, "left_size")?;
    let r = size_field(&obj, "right_size")?;
    let edges = rows(&obj, "edges", 2)?
        .into_iter()
        .map(|e| Ok((index(e, 0, l, "left vertex")?, index(e, 1, r, "right vertex")?)))
        .collect::<Result<Vec<_>>>()?;
    BipartiteGraph::new(l, r, edges)
}

fn int_json(n: &BigInt) -> String {
    match n.to_i64() {
        Some(v) => v.to_string(),
        None => format!("\"{n}\""),
    }
}

fn write_rows(out: &mut String, key: &str, rows: &[String], last: bool) {
    if rows.is_empty() {
        let _ = write!(out, "  \"{key}\": []");
    } else {
        let _ = writeln!(out, "  \"{key}\": [");
        for (i, r) in rows.iter().enumerate() {
            let sep = if i + 1 < rows.len() { "," } else { "" };
            let _ = writeln!(out, "    [{r}]{sep}");
        }
        out.push_str("  ]");
    }
    out.push_str(if last { "\n" } else { ",\n" });
}

fn write_provenance(out: &mut String, prov: &Provenance) {
    out.push_str("  \"provenance\": {");
    if prov.is_empty() {
        out.push_str("}\n");
        return;
    }
    out.push('\n');
    for (i, (k, v)) in prov.iter().enumerate() {
        let sep = if i + 1 < prov.len() { "," } else { "" };
        let _ = writeln!(
            out,
            "    {}: {}{sep}",
            Value::String(k.clone()),
            Value::String(v.clone())
        );
    }
    out.push_str("  }\n");
}

fn rat_cells(r: &Rational) -> String {
    format!("{}, {}", int_json(r.numer()), int_json(r.denom()))
}

/// Canonical text of a two-player game.
pub fn game_to_json(g: &Game, prov: &Provenance) -> String {
    let (xs, ys, as_, bs) = (g.x_size(), g.y_size(), g.a_size(), g.b_size());
    let mut mu = Vec::new();
    for x in 0..xs {
        for y in 0..ys {
            let m = g.mu(x, y);
            if !m.is_zero() {
                mu.push(format!("{x}, {y}, {}", rat_cells(m)));
            }
        }
    }
    let mut wins = Vec::new();
    let mut weights = Vec::new();
    for a in 0..as_ {
        for b in 0..bs {
            for x in 0..xs {
                for y in 0..ys {
                    let w = g.accept(a, b, x, y);
                    if w.is_one() {
                        wins.push(format!("{a}, {b}, {x}, {y}"));
                    } else if !w.is_zero() {
                        weights.push(format!("{a}, {b}, {x}, {y}, {}", rat_cells(&w)));
                    }
                }
            }
        }
    }
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"x_size\": {xs},");
    let _ = writeln!(out, "  \"y_size\": {ys},");
    let _ = writeln!(out, "  \"a_size\": {as_},");
    let _ = writeln!(out, "  \"b_size\": {bs},");
    write_rows(&mut out, "mu", &mu, false);
    write_rows(&mut out, "predicate", &wins, false);
    if !weights.is_empty() {
        write_rows(&mut out, "weights", &weights, false);
    }
    write_provenance(&mut out, prov);
    out.push_str("}\n");
    out
}

pub fn kplayer_to_json(g: &KPlayerGame, prov: &Provenance) -> String {
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
    let mut mu = Vec::new();
    let mut wins = Vec::new();
    crate::arith::odometer(g.question_sizes(), |q| {
        let m = g.mu_at(q);
        if !m.is_zero() {
            mu.push(format!("{}, {}", join(q), rat_cells(m)));
        }
        true
    });
    crate::arith::odometer(g.answer_sizes(), |a| {
        crate::arith::odometer(g.question_sizes(), |q| {
            if g.wins(a, q) {
                wins.push(format!("{}, {}", join(a), join(q)));
            }
            true
        });
        true
    });
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"question_sizes\": [{}],", join(g.question_sizes()));
    let _ = writeln!(out, "  \"answer_sizes\": [{}],", join(g.answer_sizes()));
    write_rows(&mut out, "mu", &mu, false);
    write_rows(&mut out, "predicate", &wins, false);
    write_provenance(&mut out, prov);
    out.push_str("}\n");
    out
}

pub fn graph_to_json(g: &BipartiteGraph) -> String {
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    edges.sort_unstable();
    let rows: Vec<String> = edges.iter().map(|(l, r)| format!("{l}, {r}")).collect();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"left_size\": {},", g.left_size());
    let _ = writeln!(out, "  \"right_size\": {},", g.right_size());
    write_rows(&mut out, "edges", &rows, true);
    out.push_str("}\n");
    out
}

pub fn read_game(path: &Path) -> Result<(Game, Provenance)> {
    parse_game(&std::fs::read_to_string(path)?)
}

pub fn read_any_game(path: &Path) -> Result<(AnyGame, Provenance)> {
    parse_any_game(&std::fs::read_to_string(path)?)
}

pub fn read_graph(path: &Path) -> Result<BipartiteGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::library::{chsh, parity_game};
    use crate::spectral::shift_union_graph;

    #[test]
    fn chsh_round_trip() {
        let mut prov = Provenance::new();
        prov.insert("source".into(), "library".into());
        let text = game_to_json(&chsh(), &prov);
        let (g, p) = parse_game(&text).unwrap();
        assert_eq!(g, chsh());
        assert_eq!(p, prov);
        assert_eq!(game_to_json(&g, &p), text);
    }

    #[test]
    fn weighted_round_trip() {
        let g = Game::new(
            1,
            1,
            2,
            1,
            vec![rat(1, 1)],
            Predicate::Weighted(vec![rat(1, 3), rat(1, 1)]),
        )
        .unwrap();
        let text = game_to_json(&g, &Provenance::new());
        assert!(text.contains("\"weights\""));
        assert_eq!(parse_game(&text).unwrap().0, g);
    }

    #[test]
    fn big_integers_as_strings() {
        let big: BigInt = BigInt::from(1u8) << 80usize;
        let m = Rational::new(BigInt::one(), big.clone());
        let rest = Rational::one() - &m;
        let g = Game::new(1, 2, 1, 1, vec![m, rest], Predicate::Boolean(vec![true, true])).unwrap();
        let text = game_to_json(&g, &Provenance::new());
        assert!(text.contains(&format!("\"{big}\"")));
        assert_eq!(parse_game(&text).unwrap().0, g);
    }

    #[test]
    fn kplayer_round_trip() {
        let g = parity_game(3, 2);
        let text = kplayer_to_json(&g, &Provenance::new());
        let (h, _) = parse_kplayer_game(&text).unwrap();
        assert_eq!(h, g);
        assert!(matches!(parse_any_game(&text).unwrap().0, AnyGame::Many(_)));
    }

    #[test]
    fn graph_round_trip_keeps_multiplicity() {
        let g = BipartiteGraph::new(2, 2, vec![(0, 0), (0, 0), (1, 1), (1, 1)]).unwrap();
        assert_eq!(parse_graph(&graph_to_json(&g)).unwrap(), g);
        let s = shift_union_graph(4, &[0, 1]).unwrap();
        assert_eq!(parse_graph(&graph_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_game("[]").is_err());
        assert!(parse_game(r#"{"x_size":1,"y_size":1,"a_size":1,"b_size":1,"mu":[[0,0,1,0]]}"#).is_err());
        assert!(parse_game(r#"{"x_size":1,"y_size":1,"a_size":1,"b_size":1,"mu":[[1,0,1,1]]}"#).is_err());
        assert!(parse_game(r#"{"x_size":1,"y_size":1,"a_size":1,"b_size":1,"mu":[[0,0,1,2]]}"#).is_err());
        assert!(parse_graph(r#"{"left_size":1,"right_size":1,"edges":[[0,1]]}"#).is_err());
    }
}
