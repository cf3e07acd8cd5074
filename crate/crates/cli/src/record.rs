//! The chain record file: a short `key value` header, then one best
//! approximation per line.
//!
//! ```text
//! dioph-chain 1
//! grammar 1
//! r 1
//! alpha root(2, 2)
//! precision-cap 65536
//! search-bound 30
//! precision-used 69
//! # nu m_0 .. m_r M zeta_lo zeta_hi
//! 1 -1 1 1 0xd413cccfe7799211p-65 0x6a09e667f3bcc909p-64
//! 2 3 -2 2 0x57d86660310cdbddp-65 0x2bec333018866defp-64
//! ```
//!
//! Endpoints are exact dyadics, so reading a file back gives the same chain bit for bit.

use std::fmt::Write as _;

use dioph::realnum::{Dyadic, DyadicInterval, Precision};
use dioph::{BAChain, BestApprox, IntVector, LinearForm};
use num_bigint::BigInt;

use crate::expr::{parse_expr, GRAMMAR_VERSION};

pub const CHAIN_MAGIC: &str = "dioph-chain";
pub const CHAIN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("chain rejected: {0}")]
    Invalid(#[from] dioph::Error),
}

pub fn write_chain(chain: &BAChain) -> String {
    let form = chain.form();
    let mut out = String::new();
    let _ = writeln!(out, "{CHAIN_MAGIC} {CHAIN_FORMAT_VERSION}");
    let _ = writeln!(out, "grammar {GRAMMAR_VERSION}");
    let _ = writeln!(out, "r {}", chain.r());
    for a in form.alphas() {
        let _ = writeln!(out, "alpha {a}");
    }
    let _ = writeln!(out, "precision-cap {}", form.precision().cap_bits);
    let _ = writeln!(out, "search-bound {}", chain.search_bound());
    let _ = writeln!(out, "precision-used {}", chain.precision_used());
    out.push_str("# nu m_0 .. m_r M zeta_lo zeta_hi\n");
    for rec in chain.records() {
        let _ = write!(out, "{}", rec.index);
        for c in rec.m.coords() {
            let _ = write!(out, " {c}");
        }
        let _ = writeln!(out, " {} {} {}", rec.norm, rec.zeta.lower(), rec.zeta.upper());
    }
    out
}

#[derive(Default)]
struct Header {
    grammar: Option<u32>,
    r: Option<usize>,
    alphas: Vec<String>,
    cap: Option<u32>,
    bound: Option<u64>,
    used: Option<u32>,
}

fn syntax(line: usize, msg: impl Into<String>) -> RecordError {
    RecordError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn number<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, RecordError> {
    s.trim()
        .parse()
        .map_err(|_| syntax(line, format!("bad {what} {s:?}")))
}

fn set<T>(slot: &mut Option<T>, v: T, line: usize, key: &str) -> Result<(), RecordError> {
    if slot.replace(v).is_some() {
        return Err(syntax(line, format!("duplicate {key}")));
    }
    Ok(())
}

pub fn read_chain(text: &str) -> Result<BAChain, RecordError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| syntax(1, "empty file"))?;
    let version = first
        .strip_prefix(CHAIN_MAGIC)
        .ok_or_else(|| syntax(1, format!("not a chain file (expected {CHAIN_MAGIC:?})")))?;
    let version: u32 = number(1, "format version", version)?;
    if version != CHAIN_FORMAT_VERSION {
        return Err(syntax(1, format!("unsupported format version {version}")));
    }

    let mut h = Header::default();
    let mut rows = Vec::new();
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.as_bytes()[0].is_ascii_digit() {
            rows.push((no, line));
            continue;
        }
        if !rows.is_empty() {
            return Err(syntax(no, "header line after records"));
        }
        let (key, val) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "grammar" => set(&mut h.grammar, number(no, "grammar version", val)?, no, key)?,
            "r" => set(&mut h.r, number(no, "dimension", val)?, no, key)?,
            "alpha" => h.alphas.push(val.trim().to_string()),
            "precision-cap" => set(&mut h.cap, number(no, "precision cap", val)?, no, key)?,
            "search-bound" => set(&mut h.bound, number(no, "search bound", val)?, no, key)?,
            "precision-used" => set(&mut h.used, number(no, "precision", val)?, no, key)?,
            other => return Err(syntax(no, format!("unknown header key {other:?}"))),
        }
    }

    let missing = |k: &str| syntax(0, format!("header is missing {k}"));
    let grammar = h.grammar.ok_or_else(|| missing("grammar"))?;
    if grammar > GRAMMAR_VERSION {
        return Err(syntax(0, format!("expression grammar {grammar} is newer than {GRAMMAR_VERSION}")));
    }
    let r = h.r.ok_or_else(|| missing("r"))?;
    if h.alphas.len() != r {
        return Err(syntax(0, format!("r = {r} but {} alpha lines", h.alphas.len())));
    }
    let alphas = h
        .alphas
        .iter()
        .map(|a| parse_expr(a).map_err(|e| syntax(0, format!("alpha {a:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let cap = h.cap.ok_or_else(|| missing("precision-cap"))?;
    let form = LinearForm::new(alphas)?.with_precision(Precision::with_cap(cap));

    let records = rows
        .into_iter()
        .map(|(no, line)| parse_record(no, line, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BAChain::new(
        form,
        records,
        h.bound.ok_or_else(|| missing("search-bound"))?,
        h.used.ok_or_else(|| missing("precision-used"))?,
    )?)
}

fn parse_record(no: usize, line: &str, r: usize) -> Result<BestApprox, RecordError> {
    let fields: Vec<&str> = line.split_ascii_whitespace().collect();
    if fields.len() != r + 5 {
        return Err(syntax(no, format!("expected {} fields, found {}", r + 5, fields.len())));
    }
    let index = number(no, "index", fields[0])?;
    let m = fields[1..r + 2]
        .iter()
        .map(|f| number::<BigInt>(no, "coordinate", f))
        .collect::<Result<Vec<_>, _>>()?;
    let norm = number(no, "norm", fields[r + 2])?;
    let lo: Dyadic = number(no, "dyadic", fields[r + 3])?;
    let hi: Dyadic = number(no, "dyadic", fields[r + 4])?;
    let zeta = DyadicInterval::new(lo, hi).map_err(|e| syntax(no, e.to_string()))?;
    Ok(BestApprox {
        index,
        m: IntVector(m),
        norm,
        zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dioph::enumerate_chain;
    use dioph::realnum::RealExpr;
    use proptest::prelude::*;

    fn chain(src: &[&str], max_norm: u64, cap: u32) -> BAChain {
        let alphas = src.iter().map(|s| parse_expr(s).unwrap()).collect();
        let form = LinearForm::new(alphas).unwrap().with_precision(Precision::with_cap(cap));
        enumerate_chain(&form, max_norm).unwrap()
    }

    #[test]
    fn sqrt2_file() {
        let c = chain(&["root(2,2)"], 30, 65536);
        let text = write_chain(&c);
        assert!(text.starts_with("dioph-chain 1\ngrammar 1\nr 1\nalpha root(2, 2)\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 5);
        let back = read_chain(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(write_chain(&back), text);
    }

    fn bump_norm(text: &str, nu: usize) -> String {
        text.lines()
            .map(|l| {
                let mut f: Vec<String> = l.split(' ').map(String::from).collect();
                if f[0] == nu.to_string() {
                    let at = f.len() - 3;
                    f[at] = "7".into();
                }
                f.join(" ") + "\n"
            })
            .collect()
    }

    #[test]
    fn rejects_tampering() {
        let text = write_chain(&chain(&["root(2,2)"], 12, 65536));
        let cases = [
            text.replace("dioph-chain 1", "dioph-chain 2"),
            text.replace("grammar 1", "grammar 9"),
            text.replace("r 1", "r 2"),
            bump_norm(&text, 2),
            text.replace("\n3 ", "\n4 "),
            text.replace("search-bound 12", "search-bound 3"),
            text.replace("search-bound 12", "search-bound 12\nsearch-bound 12"),
            text.replace("precision-used", "precision-spent"),
            text + "alpha root(3, 2)\n",
        ];
        for bad in cases {
            assert!(read_chain(&bad).is_err(), "accepted:\n{bad}");
        }
    }

    #[test]
    fn empty_chain_round_trips() {
        let c = chain(&["root(3,2) - 1", "root(5, 3)"], 3, 256).truncated(0);
        assert!(c.is_empty());
        assert_eq!(read_chain(&write_chain(&c)).unwrap(), c);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip(a in 2i64..200, b in 2i64..200, idx in 2u32..4, r2 in any::<bool>(), n in 1u64..40, cap in 96u32..2048) {
            let x = RealExpr::int_root(a, idx).unwrap();
            prop_assume!(x.as_rational().is_none() && RealExpr::int_root(b, 2).unwrap().as_rational().is_none());
            let mut src = vec![format!("root({a}, {idx})")];
            if r2 {
                src.push(format!("({b} - root({b}, 2)) / 7"));
            }
            let refs: Vec<&str> = src.iter().map(String::as_str).collect();
            let alphas: Vec<RealExpr> = refs.iter().map(|s| parse_expr(s).unwrap()).collect();
            let form = LinearForm::new(alphas).unwrap().with_precision(Precision::with_cap(cap));
            let Ok(c) = enumerate_chain(&form, if r2 { n.min(12) } else { n }) else {
                return Ok(());
            };
            let text = write_chain(&c);
            let back = read_chain(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(write_chain(&back), text);
        }
    }
}
