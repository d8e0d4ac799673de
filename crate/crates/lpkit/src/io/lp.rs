//! CPLEX-style LP text format, minimization subset.
//!
//! The writer emits one constraint per line and an explicit bound line for
//! every variable, so a parse of the output reconstructs the variable set,
//! names, bounds, and coefficients exactly. Numbers use shortest
//! round-tripping decimals.

use crate::error::LpError;
use crate::io::fmt_f64;
use crate::problem::{Problem, Sense, VarKind};
use std::collections::HashMap;
use std::fmt::Write as _;

fn legal_lp_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    // Leading 'e'/'E' collides with exponent notation in some readers.
    if name.starts_with(['e', 'E']) {
        return false;
    }
    name.chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Replace illegal characters with `_` and prefix names that could be read as
/// numbers; collisions after sanitization are an error.
fn sanitize(names: impl Iterator<Item = String>) -> Result<Vec<String>, LpError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (k, raw) in names.enumerate() {
        let mut s: String = raw
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        if !legal_lp_name(&s) {
            s = format!("v_{s}");
        }
        if let Some(&other) = seen.get(&s) {
            return Err(LpError::InvalidName(format!(
                "names #{other} and #{k} both sanitize to `{s}`"
            )));
        }
        seen.insert(s.clone(), k);
        out.push(s);
    }
    Ok(out)
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    let mut first = true;
    for &(j, a) in terms {
        if a == 0.0 {
            continue;
        }
        if first {
            if a < 0.0 {
                out.push_str("- ");
            }
            first = false;
        } else if a < 0.0 {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let _ = write!(out, "{} {}", fmt_f64(a.abs()), names[j]);
    }
    if first {
        out.push('0');
    }
}

pub fn write_lp(problem: &Problem) -> Result<String, LpError> {
    let var_names = sanitize(problem.vars().iter().map(|v| v.name.clone()))?;
    let con_names = sanitize(problem.cons().iter().map(|c| c.name.clone()))?;

    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", problem.name);
    out.push_str("Minimize\n obj: ");
    let obj_terms: Vec<(usize, f64)> = problem
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.obj != 0.0)
        .map(|(j, v)| (j, v.obj))
        .collect();
    write_terms(&mut out, &obj_terms, &var_names);
    out.push_str("\nSubject To\n");
    for (i, c) in problem.cons().iter().enumerate() {
        let _ = write!(out, " {}: ", con_names[i]);
        write_terms(&mut out, &c.terms, &var_names);
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {} {}", sense, fmt_f64(c.rhs));
    }
    out.push_str("Bounds\n");
    for (j, v) in problem.vars().iter().enumerate() {
        let name = &var_names[j];
        let line = match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => format!(" {} <= {} <= {}", fmt_f64(v.lower), name, fmt_f64(v.upper)),
            (true, false) => format!(" {} >= {}", name, fmt_f64(v.lower)),
            (false, true) => format!(" -inf <= {} <= {}", name, fmt_f64(v.upper)),
            (false, false) => format!(" {} free", name),
        };
        out.push_str(&line);
        out.push('\n');
    }
    let generals: Vec<&String> = problem
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Integer)
        .map(|(j, _)| &var_names[j])
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for g in generals {
            let _ = writeln!(out, " {g}");
        }
    }
    let binaries: Vec<&String> = problem
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| &var_names[j])
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for b in binaries {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    Ok(out)
}

// --- parsing ---

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Le,
    Ge,
    Eq,
    Colon,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, LpError> {
    let mut toks = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('\\').next().unwrap_or("");
        let mut chars = line.char_indices().peekable();
        while let Some(&(start, c)) = chars.peek() {
            let lno = lineno + 1;
            match c {
                ' ' | '\t' | '\r' => {
                    chars.next();
                }
                '+' => {
                    chars.next();
                    toks.push((lno, Tok::Plus));
                }
                '-' => {
                    chars.next();
                    toks.push((lno, Tok::Minus));
                }
                ':' => {
                    chars.next();
                    toks.push((lno, Tok::Colon));
                }
                '<' | '>' | '=' => {
                    chars.next();
                    // Accept <=, >=, =, =<, =>, <, >.
                    let second = chars.peek().map(|&(_, c2)| c2);
                    let tok = match (c, second) {
                        ('<', Some('=')) => {
                            chars.next();
                            Tok::Le
                        }
                        ('>', Some('=')) => {
                            chars.next();
                            Tok::Ge
                        }
                        ('=', Some('<')) => {
                            chars.next();
                            Tok::Le
                        }
                        ('=', Some('>')) => {
                            chars.next();
                            Tok::Ge
                        }
                        ('<', _) => Tok::Le,
                        ('>', _) => Tok::Ge,
                        _ => Tok::Eq,
                    };
                    toks.push((lno, tok));
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let mut end = start;
                    let bytes = line.as_bytes();
                    while end < line.len() {
                        let ch = bytes[end] as char;
                        if ch.is_ascii_digit() || ch == '.' {
                            end += 1;
                        } else if (ch == 'e' || ch == 'E')
                            && end + 1 < line.len()
                            && ((bytes[end + 1] as char).is_ascii_digit()
                                || bytes[end + 1] == b'+'
                                || bytes[end + 1] == b'-')
                        {
                            end += 2;
                        } else {
                            break;
                        }
                    }
                    let lit = &line[start..end];
                    let v = lit.parse::<f64>().map_err(|_| LpError::Parse {
                        line: lno,
                        message: format!("bad number `{lit}`"),
                    })?;
                    toks.push((lno, Tok::Num(v)));
                    while matches!(chars.peek(), Some(&(p, _)) if p < end) {
                        chars.next();
                    }
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut end = start;
                    let bytes = line.as_bytes();
                    while end < line.len() {
                        let ch = bytes[end] as char;
                        if ch.is_ascii_alphanumeric() || ch == '_' || ch == '.' {
                            end += 1;
                        } else {
                            break;
                        }
                    }
                    toks.push((lno, Tok::Name(line[start..end].to_string())));
                    while matches!(chars.peek(), Some(&(p, _)) if p < end) {
                        chars.next();
                    }
                }
                other => {
                    return Err(LpError::Parse {
                        line: lno,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
    }
    Ok(toks)
}

fn keyword(toks: &[(usize, Tok)], at: usize, words: &[&str]) -> bool {
    words.iter().enumerate().all(|(k, w)| {
        matches!(
            toks.get(at + k),
            Some((_, Tok::Name(n))) if n.eq_ignore_ascii_case(w)
        )
    })
}

struct VarTable {
    ids: HashMap<String, usize>,
    problem: Problem,
}

impl VarTable {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&j) = self.ids.get(name) {
            return j;
        }
        let j = self
            .problem
            .add_var(name, 0.0, f64::INFINITY, VarKind::Continuous, 0.0);
        self.ids.insert(name.to_string(), j);
        j
    }
}

/// Parse a linear expression; returns (terms, tokens consumed).
fn parse_expr(
    toks: &[(usize, Tok)],
    mut at: usize,
    table: &mut VarTable,
) -> Result<(Vec<(usize, f64)>, usize), LpError> {
    let mut terms = Vec::new();
    let start = at;
    loop {
        let mut sign = 1.0;
        let mut advanced = false;
        while let Some((_, tok)) = toks.get(at) {
            match tok {
                Tok::Plus => {
                    at += 1;
                    advanced = true;
                }
                Tok::Minus => {
                    sign = -sign;
                    at += 1;
                    advanced = true;
                }
                _ => break,
            }
        }
        match toks.get(at) {
            Some((_, Tok::Num(v))) => {
                at += 1;
                match toks.get(at) {
                    Some((_, Tok::Name(n))) if !is_section_name(toks, at) => {
                        let j = table.get(&n.clone());
                        terms.push((j, sign * v));
                        at += 1;
                    }
                    _ => {
                        // Bare constant: only the literal 0 placeholder is allowed.
                        if *v != 0.0 {
                            let line = toks[at - 1].0;
                            return Err(LpError::Parse {
                                line,
                                message: "constant terms are not supported".into(),
                            });
                        }
                    }
                }
            }
            Some((_, Tok::Name(_))) if !is_section_name(toks, at) => {
                if let Some((_, Tok::Name(n))) = toks.get(at) {
                    let j = table.get(&n.clone());
                    terms.push((j, sign));
                }
                at += 1;
            }
            _ => {
                if advanced {
                    let line = toks.get(at).map(|t| t.0).unwrap_or(0);
                    return Err(LpError::Parse {
                        line,
                        message: "dangling sign".into(),
                    });
                }
                break;
            }
        }
        if at == start {
            break;
        }
        // Expression ends at a sense token, a section keyword, or a new
        // `name :` constraint header.
        match toks.get(at) {
            None | Some((_, Tok::Le)) | Some((_, Tok::Ge)) | Some((_, Tok::Eq)) => break,
            Some((_, Tok::Name(_))) if is_section_name(toks, at) => break,
            Some((_, Tok::Name(_))) if matches!(toks.get(at + 1), Some((_, Tok::Colon))) => break,
            _ => {}
        }
    }
    Ok((terms, at))
}

fn is_section_name(toks: &[(usize, Tok)], at: usize) -> bool {
    keyword(toks, at, &["subject", "to"])
        || keyword(toks, at, &["such", "that"])
        || keyword(toks, at, &["st"])
        || keyword(toks, at, &["s.t."])
        || keyword(toks, at, &["bounds"])
        || keyword(toks, at, &["bound"])
        || keyword(toks, at, &["generals"])
        || keyword(toks, at, &["general"])
        || keyword(toks, at, &["gen"])
        || keyword(toks, at, &["binaries"])
        || keyword(toks, at, &["binary"])
        || keyword(toks, at, &["bin"])
        || keyword(toks, at, &["end"])
        || keyword(toks, at, &["free"])
}

pub fn parse_lp(text: &str) -> Result<Problem, LpError> {
    let toks = tokenize(text)?;
    let mut at = 0usize;
    let mut table = VarTable {
        ids: HashMap::new(),
        problem: Problem::new("imported"),
    };

    if keyword(&toks, at, &["minimize"]) || keyword(&toks, at, &["min"]) {
        at += 1;
    } else if keyword(&toks, at, &["maximize"]) || keyword(&toks, at, &["max"]) {
        return Err(LpError::Parse {
            line: toks.get(at).map(|t| t.0).unwrap_or(1),
            message: "only minimization problems are supported".into(),
        });
    } else {
        return Err(LpError::Parse {
            line: 1,
            message: "expected `Minimize`".into(),
        });
    }

    // Optional objective label.
    if matches!(toks.get(at), Some((_, Tok::Name(_))))
        && matches!(toks.get(at + 1), Some((_, Tok::Colon)))
    {
        at += 2;
    }
    let (obj_terms, next) = parse_expr(&toks, at, &mut table)?;
    at = next;
    for (j, a) in obj_terms {
        let cur = table.problem.var(j).obj;
        table.problem.set_obj(j, cur + a);
    }

    if keyword(&toks, at, &["subject", "to"]) || keyword(&toks, at, &["such", "that"]) {
        at += 2;
    } else if keyword(&toks, at, &["st"]) || keyword(&toks, at, &["s.t."]) {
        at += 1;
    } else {
        return Err(LpError::Parse {
            line: toks.get(at).map(|t| t.0).unwrap_or(1),
            message: "expected `Subject To`".into(),
        });
    }

    // Constraints until a section keyword.
    let mut con_counter = 0usize;
    while at < toks.len() && !is_section_name(&toks, at) {
        let name = if matches!(toks.get(at), Some((_, Tok::Name(_))))
            && matches!(toks.get(at + 1), Some((_, Tok::Colon)))
        {
            let n = match &toks[at].1 {
                Tok::Name(n) => n.clone(),
                _ => unreachable!(),
            };
            at += 2;
            n
        } else {
            con_counter += 1;
            format!("c{con_counter}")
        };
        let (terms, next) = parse_expr(&toks, at, &mut table)?;
        at = next;
        let sense = match toks.get(at) {
            Some((_, Tok::Le)) => Sense::Le,
            Some((_, Tok::Ge)) => Sense::Ge,
            Some((_, Tok::Eq)) => Sense::Eq,
            other => {
                return Err(LpError::Parse {
                    line: other.map(|t| t.0).unwrap_or(0),
                    message: format!("constraint {name}: expected sense"),
                })
            }
        };
        at += 1;
        let mut rhs_sign = 1.0;
        while let Some((_, Tok::Minus | Tok::Plus)) = toks.get(at) {
            if matches!(toks[at].1, Tok::Minus) {
                rhs_sign = -rhs_sign;
            }
            at += 1;
        }
        let rhs = match toks.get(at) {
            Some((_, Tok::Num(v))) => rhs_sign * v,
            other => {
                return Err(LpError::Parse {
                    line: other.map(|t| t.0).unwrap_or(0),
                    message: format!("constraint {name}: expected numeric right-hand side"),
                })
            }
        };
        at += 1;
        table.problem.add_con(name, terms, sense, rhs)?;
    }

    // Bounds.
    if keyword(&toks, at, &["bounds"]) || keyword(&toks, at, &["bound"]) {
        at += 1;
        while at < toks.len() && !is_section_name(&toks, at) {
            at = parse_bound_line(&toks, at, &mut table)?;
        }
    }

    while at < toks.len() {
        if keyword(&toks, at, &["generals"])
            || keyword(&toks, at, &["general"])
            || keyword(&toks, at, &["gen"])
        {
            at += 1;
            while let Some((_, Tok::Name(n))) = toks.get(at) {
                if is_section_name(&toks, at) {
                    break;
                }
                let j = table.get(&n.clone());
                table.problem.vars_mut()[j].kind = VarKind::Integer;
                at += 1;
            }
        } else if keyword(&toks, at, &["binaries"])
            || keyword(&toks, at, &["binary"])
            || keyword(&toks, at, &["bin"])
        {
            at += 1;
            while let Some((_, Tok::Name(n))) = toks.get(at) {
                if is_section_name(&toks, at) {
                    break;
                }
                let j = table.get(&n.clone());
                let v = &mut table.problem.vars_mut()[j];
                v.kind = VarKind::Binary;
                v.lower = v.lower.max(0.0);
                v.upper = v.upper.min(1.0);
                at += 1;
            }
        } else if keyword(&toks, at, &["end"]) {
            break;
        } else {
            return Err(LpError::Parse {
                line: toks[at].0,
                message: "unexpected token after bounds".into(),
            });
        }
    }

    Ok(table.problem)
}

/// One bounds line: `l <= x <= u`, `x >= l`, `x <= u`, `x = v`, `x free`,
/// `-inf <= x <= u`.
fn parse_bound_line(
    toks: &[(usize, Tok)],
    mut at: usize,
    table: &mut VarTable,
) -> Result<usize, LpError> {
    let line = toks[at].0;
    let err = |message: String| LpError::Parse { line, message };

    let read_value = |at: &mut usize| -> Option<f64> {
        let mut sign = 1.0;
        let mut k = *at;
        while let Some((_, Tok::Minus | Tok::Plus)) = toks.get(k) {
            if matches!(toks[k].1, Tok::Minus) {
                sign = -sign;
            }
            k += 1;
        }
        match toks.get(k) {
            Some((_, Tok::Num(v))) => {
                *at = k + 1;
                Some(sign * v)
            }
            Some((_, Tok::Name(n))) if n.eq_ignore_ascii_case("inf") || n.eq_ignore_ascii_case("infinity") => {
                *at = k + 1;
                Some(sign * f64::INFINITY)
            }
            _ => None,
        }
    };

    // Case: value <= name [<= value]
    if let Some(lo) = read_value(&mut at) {
        if !matches!(toks.get(at), Some((_, Tok::Le))) {
            return Err(err("expected `<=` after bound value".into()));
        }
        at += 1;
        let name = match toks.get(at) {
            Some((_, Tok::Name(n))) => n.clone(),
            _ => return Err(err("expected variable name".into())),
        };
        at += 1;
        let j = table.get(&name);
        table.problem.vars_mut()[j].lower = lo;
        if matches!(toks.get(at), Some((_, Tok::Le))) {
            at += 1;
            let up = read_value(&mut at).ok_or_else(|| err("expected upper bound".into()))?;
            table.problem.vars_mut()[j].upper = up;
        }
        return Ok(at);
    }

    // Case: name <= v | name >= v | name = v | name free
    let name = match toks.get(at) {
        Some((_, Tok::Name(n))) => n.clone(),
        _ => return Err(err("expected variable name or bound value".into())),
    };
    at += 1;
    if let Some((_, Tok::Name(f))) = toks.get(at) {
        if f.eq_ignore_ascii_case("free") {
            let j = table.get(&name);
            table.problem.vars_mut()[j].lower = f64::NEG_INFINITY;
            table.problem.vars_mut()[j].upper = f64::INFINITY;
            return Ok(at + 1);
        }
    }
    let sense = match toks.get(at) {
        Some((_, Tok::Le)) => Sense::Le,
        Some((_, Tok::Ge)) => Sense::Ge,
        Some((_, Tok::Eq)) => Sense::Eq,
        _ => return Err(err(format!("bound for {name}: expected sense"))),
    };
    at += 1;
    let v = read_value(&mut at).ok_or_else(|| err("expected bound value".into()))?;
    let j = table.get(&name);
    match sense {
        Sense::Le => table.problem.vars_mut()[j].upper = v,
        Sense::Ge => table.problem.vars_mut()[j].lower = v,
        Sense::Eq => {
            table.problem.vars_mut()[j].lower = v;
            table.problem.vars_mut()[j].upper = v;
        }
    }
    Ok(at)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var_problem() -> Problem {
        let mut p = Problem::new("sample");
        let x = p.add_var("x", 0.0, 4.0, VarKind::Continuous, 1.0);
        let y = p.add_var("y", f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous, -2.5);
        p.add_con("cap", vec![(x, 1.0), (y, 2.0)], Sense::Le, 10.0)
            .unwrap();
        p.add_con("bal", vec![(x, -1.0), (y, 1.0)], Sense::Eq, 0.5)
            .unwrap();
        p
    }

    #[test]
    fn roundtrip_preserves_everything() {
        let p = two_var_problem();
        let text = write_lp(&p).unwrap();
        let q = parse_lp(&text).unwrap();
        assert_eq!(q.num_vars(), p.num_vars());
        assert_eq!(q.num_cons(), p.num_cons());
        for j in 0..p.num_vars() {
            assert_eq!(q.var(j).name, p.var(j).name);
            assert_eq!(q.var(j).lower, p.var(j).lower);
            assert_eq!(q.var(j).upper, p.var(j).upper);
            assert_eq!(q.var(j).obj, p.var(j).obj);
        }
        for i in 0..p.num_cons() {
            assert_eq!(q.con(i).terms, p.con(i).terms);
            assert_eq!(q.con(i).rhs, p.con(i).rhs);
            assert_eq!(q.con(i).sense, p.con(i).sense);
        }
    }

    #[test]
    fn integer_sections_roundtrip() {
        let mut p = Problem::new("kinds");
        p.add_var("a", 0.0, 3.0, VarKind::Integer, 1.0);
        p.add_var("b", 0.0, 1.0, VarKind::Binary, 2.0);
        p.add_var("c", 0.0, 9.0, VarKind::Continuous, 3.0);
        let text = write_lp(&p).unwrap();
        let q = parse_lp(&text).unwrap();
        assert_eq!(q.var(0).kind, VarKind::Integer);
        assert_eq!(q.var(1).kind, VarKind::Binary);
        assert_eq!(q.var(2).kind, VarKind::Continuous);
    }

    #[test]
    fn illegal_name_sanitized() {
        let mut p = Problem::new("n");
        p.add_var("a b", 0.0, 1.0, VarKind::Continuous, 1.0);
        let text = write_lp(&p).unwrap();
        assert!(text.contains("a_b"));
    }

    #[test]
    fn collision_detected() {
        let mut p = Problem::new("n");
        p.add_var("a b", 0.0, 1.0, VarKind::Continuous, 1.0);
        p.add_var("a,b", 0.0, 1.0, VarKind::Continuous, 1.0);
        assert!(matches!(write_lp(&p), Err(LpError::InvalidName(_))));
    }

    #[test]
    fn maximize_rejected() {
        let e = parse_lp("Maximize\n obj: x\nSubject To\n c: x <= 1\nEnd\n");
        assert!(matches!(e, Err(LpError::Parse { .. })));
    }
}
