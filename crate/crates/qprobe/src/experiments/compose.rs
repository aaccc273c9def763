//! Dataset composition mini-language.
//!
//! A composition is a list of terms separated by `;` or top-level `,`:
//!
//! ```text
//! 150xG(50,0.6)
//! 90xG(50,p=0.2|0.4|0.6|0.8)
//! 90xG(n=20|40|60|80,0.5)
//! 100xG(30,0.4); 50xG(40,0.5)
//! ```
//!
//! A term `m x G(n-part, p-part)` expands to one cell of `m` graphs per
//! listed `(n, p)` combination, n-major.

use crate::error::{Error, Result};
use crate::experiments::{EnsembleCell, EnsembleSpec};

/// Parse a composition string into an expanded cell list.
pub fn parse_composition(text: &str) -> Result<EnsembleSpec> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::parameter("empty dataset composition"));
    }
    let mut cells = Vec::new();
    for term in split_terms(trimmed) {
        cells.extend(parse_term(term.trim())?);
    }
    let spec = EnsembleSpec { cells };
    validate(&spec, text)?;
    Ok(spec)
}

/// Split on `;` and on commas that sit outside parentheses.
fn split_terms(text: &str) -> Vec<&str> {
    let mut terms = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ';' | ',' if depth == 0 => {
                terms.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    terms.push(&text[start..]);
    terms
}

fn parse_term(term: &str) -> Result<Vec<EnsembleCell>> {
    let bad = |why: &str| Error::parameter(format!("composition term \"{term}\": {why}"));

    let (count_text, rest) = term
        .split_once(['x', 'X'])
        .ok_or_else(|| bad("expected \"<count>xG(<n>,<p>)\""))?;
    let count: usize = count_text
        .trim()
        .parse()
        .map_err(|_| bad("count must be a positive integer"))?;

    let rest = rest.trim();
    let inner = rest
        .strip_prefix('G')
        .or_else(|| rest.strip_prefix('g'))
        .map(str::trim)
        .and_then(|s| s.strip_prefix('('))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| bad("expected G(...) after the count"))?;

    let (n_part, p_part) = inner
        .split_once(',')
        .ok_or_else(|| bad("expected two comma-separated arguments inside G(...)"))?;

    let ns = parse_list(n_part, "n", |s| s.parse::<usize>().ok()).map_err(|e| bad(&e))?;
    let ps = parse_list(p_part, "p", |s| s.parse::<f64>().ok()).map_err(|e| bad(&e))?;

    let mut cells = Vec::with_capacity(ns.len() * ps.len());
    for &n in &ns {
        for &p in &ps {
            cells.push(EnsembleCell { count, n, p });
        }
    }
    Ok(cells)
}

/// Parse `v`, `key=v` or `key=v1|v2|...`; a bare value may not carry `|`.
fn parse_list<T>(
    part: &str,
    key: &str,
    parse: impl Fn(&str) -> Option<T>,
) -> std::result::Result<Vec<T>, String> {
    let part = part.trim();
    let values = match part.split_once('=') {
        Some((k, rest)) if k.trim() == key => rest,
        Some((k, _)) => return Err(format!("expected \"{key}=\", found \"{}=\"", k.trim())),
        None => part,
    };
    let list: Option<Vec<T>> = values.split('|').map(|v| parse(v.trim())).collect();
    list.filter(|l| !l.is_empty())
        .ok_or_else(|| format!("could not parse {key} values from \"{values}\""))
}

fn validate(spec: &EnsembleSpec, text: &str) -> Result<()> {
    for c in &spec.cells {
        if c.count == 0 || c.n < 2 || !(c.p > 0.0 && c.p < 1.0) {
            return Err(Error::parameter(format!(
                "composition \"{text}\": invalid cell (count={}, n={}, p={})",
                c.count, c.n, c.p
            )));
        }
    }
    Ok(())
}
