//! Fixed MPS format, one coefficient per COLUMNS line.
//!
//! Fixed MPS limits names to 8 characters. Names that are legal and unique
//! are written as-is; otherwise every row and column is renamed positionally
//! (`R0000001`, `X0000001`), which cannot collide. Values are written with
//! full round-trip precision even when they overflow the classic 12-column
//! value field; the field start columns stay standard.

use crate::error::LpError;
use crate::io::fmt_f64;
use crate::problem::{Problem, Sense, VarKind};
use std::collections::HashMap;
use std::fmt::Write as _;

fn mps_legal(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 8
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Original names when all are legal and unique, positional names otherwise.
fn mps_names(names: &[String], prefix: char) -> Result<Vec<String>, LpError> {
    let all_legal = names.iter().all(|n| mps_legal(n));
    let mut seen = HashMap::new();
    if all_legal {
        let mut unique = true;
        for (k, n) in names.iter().enumerate() {
            if seen.insert(n.clone(), k).is_some() {
                unique = false;
                break;
            }
        }
        if unique {
            return Ok(names.to_vec());
        }
    }
    if names.len() > 9_999_999 {
        return Err(LpError::InvalidName(
            "too many names for positional MPS renaming".into(),
        ));
    }
    Ok((0..names.len())
        .map(|k| format!("{prefix}{k:07}"))
        .collect())
}

fn pad(field: &str, width: usize) -> String {
    format!("{field:<width$}")
}

pub fn write_mps(problem: &Problem) -> Result<String, LpError> {
    let row_names = mps_names(
        &problem
            .cons()
            .iter()
            .map(|c| c.name.clone())
            .collect::<Vec<_>>(),
        'R',
    )?;
    let col_names = mps_names(
        &problem
            .vars()
            .iter()
            .map(|v| v.name.clone())
            .collect::<Vec<_>>(),
        'X',
    )?;
    if row_names.iter().any(|r| r == "OBJ") {
        return Err(LpError::InvalidName(
            "row name OBJ collides with the objective row".into(),
        ));
    }

    let mut out = String::new();
    let _ = writeln!(out, "* Problem: {}", problem.name);
    let mut pname: String = problem
        .name
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect();
    pname.truncate(8);
    if pname.is_empty() {
        pname = "PROB".into();
    }
    let _ = writeln!(out, "NAME          {pname}");

    out.push_str("ROWS\n N  OBJ\n");
    for (i, c) in problem.cons().iter().enumerate() {
        let tag = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {}  {}", tag, row_names[i]);
    }

    out.push_str("COLUMNS\n");
    // Column-major entries; integer columns wrapped in INTORG/INTEND markers.
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); problem.num_vars()];
    for (i, c) in problem.cons().iter().enumerate() {
        for &(j, a) in &c.terms {
            by_col[j].push((i, a));
        }
    }
    let mut in_int = false;
    let marker = |out: &mut String, which: &str| {
        let _ = writeln!(
            out,
            "    {}  {}                 {}",
            pad("MARKER", 8),
            pad("'MARKER'", 8),
            which
        );
    };
    for (j, v) in problem.vars().iter().enumerate() {
        let is_int = v.kind.is_integral();
        if is_int && !in_int {
            marker(&mut out, "'INTORG'");
            in_int = true;
        } else if !is_int && in_int {
            marker(&mut out, "'INTEND'");
            in_int = false;
        }
        if v.obj != 0.0 {
            let _ = writeln!(
                out,
                "    {}  {}  {}",
                pad(&col_names[j], 8),
                pad("OBJ", 8),
                fmt_f64(v.obj)
            );
        }
        for &(i, a) in &by_col[j] {
            let _ = writeln!(
                out,
                "    {}  {}  {}",
                pad(&col_names[j], 8),
                pad(&row_names[i], 8),
                fmt_f64(a)
            );
        }
    }
    if in_int {
        marker(&mut out, "'INTEND'");
    }

    out.push_str("RHS\n");
    for (i, c) in problem.cons().iter().enumerate() {
        if c.rhs != 0.0 {
            let _ = writeln!(
                out,
                "    {}  {}  {}",
                pad("RHS", 8),
                pad(&row_names[i], 8),
                fmt_f64(c.rhs)
            );
        }
    }

    out.push_str("BOUNDS\n");
    for (j, v) in problem.vars().iter().enumerate() {
        let name = pad(&col_names[j], 8);
        let bnd = pad("BND", 8);
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            let _ = writeln!(out, " BV {bnd}  {}", col_names[j]);
            continue;
        }
        if v.lower == v.upper {
            let _ = writeln!(out, " FX {bnd}  {name}  {}", fmt_f64(v.lower));
            continue;
        }
        if v.lower.is_finite() {
            let _ = writeln!(out, " LO {bnd}  {name}  {}", fmt_f64(v.lower));
        } else {
            let _ = writeln!(out, " MI {bnd}  {}", col_names[j]);
        }
        if v.upper.is_finite() {
            let _ = writeln!(out, " UP {bnd}  {name}  {}", fmt_f64(v.upper));
        } else {
            let _ = writeln!(out, " PL {bnd}  {}", col_names[j]);
        }
    }

    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn parse_mps(text: &str) -> Result<Problem, LpError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Rows,
        Columns,
        Rhs,
        Bounds,
        Done,
    }
    let mut section = Section::None;
    let mut problem = Problem::new("imported");

    // Rows are collected first, constraints materialized at the end so that
    // column entries can arrive in any order.
    let mut row_sense: Vec<Sense> = Vec::new();
    let mut row_names: Vec<String> = Vec::new();
    let mut row_ids: HashMap<String, usize> = HashMap::new();
    let mut obj_row: Option<String> = None;
    let mut row_terms: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut row_rhs: Vec<f64> = Vec::new();
    let mut col_ids: HashMap<String, usize> = HashMap::new();
    let mut explicit_lower: Vec<bool> = Vec::new();
    let mut integer_mode = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let is_section_header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if is_section_header {
            section = match fields[0].to_ascii_uppercase().as_str() {
                "NAME" => {
                    if let Some(n) = fields.get(1) {
                        problem.name = (*n).to_string();
                    }
                    continue;
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => {
                    return Err(LpError::Parse {
                        line,
                        message: "RANGES sections are not supported".into(),
                    })
                }
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::Done,
                other => {
                    return Err(LpError::Parse {
                        line,
                        message: format!("unknown section `{other}`"),
                    })
                }
            };
            if section == Section::Done {
                break;
            }
            continue;
        }

        match section {
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(LpError::Parse {
                        line,
                        message: "ROWS line needs a type and a name".into(),
                    });
                }
                let name = fields[1].to_string();
                match fields[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(LpError::Parse {
                                line,
                                message: "multiple objective rows".into(),
                            });
                        }
                        obj_row = Some(name);
                    }
                    tag => {
                        let sense = match tag {
                            "L" => Sense::Le,
                            "G" => Sense::Ge,
                            "E" => Sense::Eq,
                            _ => {
                                return Err(LpError::Parse {
                                    line,
                                    message: format!("unknown row type `{tag}`"),
                                })
                            }
                        };
                        if row_ids.insert(name.clone(), row_sense.len()).is_some() {
                            return Err(LpError::Parse {
                                line,
                                message: format!("duplicate row `{name}`"),
                            });
                        }
                        row_sense.push(sense);
                        row_names.push(name);
                        row_terms.push(Vec::new());
                        row_rhs.push(0.0);
                    }
                }
            }
            Section::Columns => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    match *fields.last().unwrap() {
                        "'INTORG'" => integer_mode = true,
                        "'INTEND'" => integer_mode = false,
                        other => {
                            return Err(LpError::Parse {
                                line,
                                message: format!("unknown marker `{other}`"),
                            })
                        }
                    }
                    continue;
                }
                if fields.len() < 3 || fields.len().is_multiple_of(2) {
                    return Err(LpError::Parse {
                        line,
                        message: "COLUMNS line needs name then row/value pairs".into(),
                    });
                }
                let col = *col_ids.entry(fields[0].to_string()).or_insert_with(|| {
                    let kind = if integer_mode {
                        VarKind::Integer
                    } else {
                        VarKind::Continuous
                    };
                    explicit_lower.push(false);
                    problem.add_var(fields[0], 0.0, f64::INFINITY, kind, 0.0)
                });
                for pair in fields[1..].chunks(2) {
                    let value = pair[1].parse::<f64>().map_err(|_| LpError::Parse {
                        line,
                        message: format!("bad number `{}`", pair[1]),
                    })?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        let cur = problem.var(col).obj;
                        problem.set_obj(col, cur + value);
                    } else if let Some(&r) = row_ids.get(pair[0]) {
                        row_terms[r].push((col, value));
                    } else {
                        return Err(LpError::Parse {
                            line,
                            message: format!("unknown row `{}`", pair[0]),
                        });
                    }
                }
            }
            Section::Rhs => {
                if fields.len() < 3 || fields.len().is_multiple_of(2) {
                    return Err(LpError::Parse {
                        line,
                        message: "RHS line needs label then row/value pairs".into(),
                    });
                }
                for pair in fields[1..].chunks(2) {
                    let value = pair[1].parse::<f64>().map_err(|_| LpError::Parse {
                        line,
                        message: format!("bad number `{}`", pair[1]),
                    })?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        return Err(LpError::Parse {
                            line,
                            message: "objective constants are not supported".into(),
                        });
                    }
                    let &r = row_ids.get(pair[0]).ok_or_else(|| LpError::Parse {
                        line,
                        message: format!("unknown row `{}`", pair[0]),
                    })?;
                    row_rhs[r] = value;
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(LpError::Parse {
                        line,
                        message: "BOUNDS line needs type, set name, and column".into(),
                    });
                }
                let kind = fields[0].to_ascii_uppercase();
                let col_name = fields[2];
                let &j = col_ids.get(col_name).ok_or_else(|| LpError::Parse {
                    line,
                    message: format!("bound for unknown column `{col_name}`"),
                })?;
                let value = || -> Result<f64, LpError> {
                    fields
                        .get(3)
                        .ok_or_else(|| LpError::Parse {
                            line,
                            message: format!("bound `{kind}` needs a value"),
                        })?
                        .parse::<f64>()
                        .map_err(|_| LpError::Parse {
                            line,
                            message: format!("bad number `{}`", fields[3]),
                        })
                };
                let vars = problem.vars_mut();
                match kind.as_str() {
                    "UP" => vars[j].upper = value()?,
                    "LO" => {
                        vars[j].lower = value()?;
                        explicit_lower[j] = true;
                    }
                    "FX" => {
                        let v = value()?;
                        vars[j].lower = v;
                        vars[j].upper = v;
                        explicit_lower[j] = true;
                    }
                    "MI" => {
                        vars[j].lower = f64::NEG_INFINITY;
                        explicit_lower[j] = true;
                    }
                    "PL" => vars[j].upper = f64::INFINITY,
                    "BV" => {
                        vars[j].kind = VarKind::Binary;
                        vars[j].lower = 0.0;
                        vars[j].upper = 1.0;
                        explicit_lower[j] = true;
                    }
                    other => {
                        return Err(LpError::Parse {
                            line,
                            message: format!("unsupported bound type `{other}`"),
                        })
                    }
                }
            }
            Section::None | Section::Done => {
                return Err(LpError::Parse {
                    line,
                    message: "data before any section header".into(),
                })
            }
        }
    }

    // UP with a negative value and no explicit lower means a free-below
    // variable in classic MPS; mirror that convention.
    for (j, explicit) in explicit_lower.iter().enumerate() {
        if !explicit && problem.var(j).upper < 0.0 {
            problem.vars_mut()[j].lower = f64::NEG_INFINITY;
        }
    }

    for (r, terms) in row_terms.into_iter().enumerate() {
        problem.add_con(row_names[r].clone(), terms, row_sense[r], row_rhs[r])?;
    }
    Ok(problem)
}
