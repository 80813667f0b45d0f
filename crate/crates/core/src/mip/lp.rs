//! CPLEX LP text format.
//!
//! The writer lists every variable in `Bounds`, in declaration order, so the
//! reader recovers the exact variable order. Model metadata travels in a
//! `\ meta:` comment line as JSON.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mip::{
    Constraint, LinExpr, MilpModel, ModelMeta, Objective, Relation, Sense, VarKind, Variable,
};

const WRAP: usize = 200;

pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ quasi-clique model\n");
    if let Some(meta) = &model.meta {
        let json = serde_json::to_string(meta).expect("metadata serializes");
        let _ = writeln!(out, "\\ meta: {json}");
    }
    out.push_str(match model.objective.sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    write_expr(&mut out, " obj:", &model.objective.expr, model);
    out.push('\n');

    out.push_str("Subject To\n");
    for c in &model.constraints {
        write_expr(&mut out, &format!(" {}:", c.name), &c.expr, model);
        let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs);
    }

    out.push_str("Bounds\n");
    for v in &model.variables {
        let (lo, hi) = (v.lower, v.upper);
        let _ = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => writeln!(out, " {lo} <= {} <= {hi}", v.name),
            (true, false) => writeln!(out, " {} >= {lo}", v.name),
            (false, true) => writeln!(out, " -inf <= {} <= {hi}", v.name),
            (false, false) => writeln!(out, " {} free", v.name),
        };
    }

    let bins: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        let mut line = String::new();
        for b in bins {
            if line.len() + b.len() > WRAP {
                let _ = writeln!(out, "{line}");
                line.clear();
            }
            line.push(' ');
            line.push_str(b);
        }
        let _ = writeln!(out, "{line}");
    }
    out.push_str("End\n");
    out
}

fn write_expr(out: &mut String, label: &str, e: &LinExpr, model: &MilpModel) {
    let mut line = label.to_string();
    if e.0.is_empty() {
        if let Some(v) = model.variables.first() {
            let _ = write!(line, " 0 {}", v.name);
        }
    }
    for &(v, c) in &e.0 {
        let sign = if c.is_sign_negative() { '-' } else { '+' };
        let term = format!(" {sign} {} {}", c.abs(), model.variables[v].name);
        if line.len() + term.len() > WRAP {
            let _ = writeln!(out, "{line}");
            line = String::from(" ");
        }
        line.push_str(&term);
    }
    out.push_str(&line);
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Rel(Relation),
}

fn lex(text: &str, line: usize) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let cs: Vec<char> = text.chars().collect();
    let mut k = 0;
    while k < cs.len() {
        let c = cs[k];
        match c {
            _ if c.is_whitespace() => k += 1,
            '+' => {
                toks.push(Tok::Plus);
                k += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                k += 1;
            }
            ':' => {
                toks.push(Tok::Colon);
                k += 1;
            }
            '<' | '>' | '=' => {
                let next = cs.get(k + 1).copied();
                let (rel, len) = match (c, next) {
                    ('<', Some('=')) | ('=', Some('<')) => (Relation::Le, 2),
                    ('>', Some('=')) | ('=', Some('>')) => (Relation::Ge, 2),
                    ('<', _) => (Relation::Le, 1),
                    ('>', _) => (Relation::Ge, 1),
                    _ => (Relation::Eq, 1),
                };
                toks.push(Tok::Rel(rel));
                k += len;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = k;
                while k < cs.len() {
                    let d = cs[k];
                    let exp_sign = (d == '+' || d == '-') && matches!(cs[k - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        k += 1;
                    } else {
                        break;
                    }
                }
                let s: String = cs[start..k].iter().collect();
                let v = s
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad number {s:?}")))?;
                toks.push(Tok::Num(v));
            }
            _ => {
                let start = k;
                while k < cs.len() && !cs[k].is_whitespace() && !"+-:<>=".contains(cs[k]) {
                    k += 1;
                }
                let s: String = cs[start..k].iter().collect();
                match s.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => toks.push(Tok::Num(f64::INFINITY)),
                    _ => toks.push(Tok::Name(s)),
                }
            }
        }
    }
    Ok(toks)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "maximize" | "maximise" | "maximum" | "max" | "minimize" | "minimise" | "minimum"
        | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::End),
        _ => None,
    }
}

struct Reader {
    variables: Vec<Variable>,
    index: std::collections::HashMap<String, usize>,
}

impl Reader {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        self.variables.push(Variable {
            name: name.to_string(),
            kind: VarKind::Continuous,
            lower: 0.0,
            upper: f64::INFINITY,
        });
        self.index
            .insert(name.to_string(), self.variables.len() - 1);
        self.variables.len() - 1
    }
}

/// Parses a linear expression, returning the terms and the constant part.
fn parse_terms(
    toks: &[Tok],
    pos: &mut usize,
    r: &mut Reader,
    line: usize,
) -> Result<(Vec<(usize, f64)>, f64)> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    loop {
        let mut sign = 1.0;
        let mut seen = false;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = toks.get(*pos) {
            if *t == Tok::Minus {
                sign = -sign;
            }
            *pos += 1;
            seen = true;
        }
        let coef = match toks.get(*pos) {
            Some(Tok::Num(v)) => {
                *pos += 1;
                Some(*v)
            }
            _ => None,
        };
        match toks.get(*pos) {
            Some(Tok::Name(n)) => {
                *pos += 1;
                terms.push((r.var(n), sign * coef.unwrap_or(1.0)));
            }
            _ => match coef {
                Some(v) => constant += sign * v,
                None if seen => return Err(Error::parse(line, "dangling sign")),
                None => return Ok((terms, constant)),
            },
        }
    }
}

/// Reads LP text written by [`export_lp`] (and common variants of it).
pub fn read_lp(text: &str) -> Result<MilpModel> {
    let mut r = Reader {
        variables: Vec::new(),
        index: Default::default(),
    };
    let mut meta: Option<ModelMeta> = None;
    let mut sense = None;
    let mut section = Section::Preamble;
    let mut obj_toks = Vec::new();
    let mut row_toks: Vec<(usize, Tok)> = Vec::new();
    let mut binaries = Vec::new();
    let mut bounds: Vec<(usize, Vec<Tok>)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let (body, comment) = match raw.find('\\') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if let Some(json) = comment.and_then(|c| c.trim().strip_prefix("meta:")) {
            meta = Some(
                serde_json::from_str(json.trim()).map_err(|e| Error::parse(ln, e.to_string()))?,
            );
        }
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(s) = section_of(body) {
            if s == Section::Objective {
                sense = Some(if body.to_ascii_lowercase().starts_with("max") {
                    Sense::Maximize
                } else {
                    Sense::Minimize
                });
            }
            section = s;
            continue;
        }
        match section {
            Section::Preamble => {
                return Err(Error::parse(ln, "content before the objective section"))
            }
            Section::Objective => obj_toks.extend(lex(body, ln)?),
            Section::Constraints => row_toks.extend(lex(body, ln)?.into_iter().map(|t| (ln, t))),
            Section::Bounds => bounds.push((ln, lex(body, ln)?)),
            Section::Binaries => {
                binaries.extend(body.split_whitespace().map(|s| (ln, s.to_string())))
            }
            Section::End => return Err(Error::parse(ln, "content after End")),
        }
    }
    let sense = sense.ok_or_else(|| Error::parse(0, "missing objective section"))?;

    // Bounds first: they fix the variable order.
    for (ln, toks) in &bounds {
        parse_bound(toks, &mut r, *ln)?;
    }

    let mut pos = 0;
    if let [Tok::Name(_), Tok::Colon, ..] = obj_toks.as_slice() {
        pos = 2;
    }
    let (terms, _) = parse_terms(&obj_toks, &mut pos, &mut r, 0)?;
    if pos != obj_toks.len() {
        return Err(Error::parse(0, "trailing tokens in objective"));
    }
    let objective = Objective {
        sense,
        expr: LinExpr(terms).canonical(),
    };

    let toks: Vec<Tok> = row_toks.iter().map(|(_, t)| t.clone()).collect();
    let line_at = |p: usize| row_toks.get(p).map_or(0, |(l, _)| *l);
    let mut constraints = Vec::new();
    let mut pos = 0;
    while pos < toks.len() {
        let ln = line_at(pos);
        let name = match (&toks[pos], toks.get(pos + 1)) {
            (Tok::Name(n), Some(Tok::Colon)) => {
                pos += 2;
                n.clone()
            }
            _ => format!("R{}", constraints.len() + 1),
        };
        let (terms, constant) = parse_terms(&toks, &mut pos, &mut r, ln)?;
        let Some(Tok::Rel(relation)) = toks.get(pos) else {
            return Err(Error::parse(
                line_at(pos),
                format!("constraint {name} has no relation"),
            ));
        };
        pos += 1;
        let mut sign = 1.0;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = toks.get(pos) {
            if *t == Tok::Minus {
                sign = -sign;
            }
            pos += 1;
        }
        let Some(Tok::Num(rhs)) = toks.get(pos) else {
            return Err(Error::parse(
                line_at(pos),
                format!("constraint {name} has no right-hand side"),
            ));
        };
        pos += 1;
        constraints.push(Constraint {
            name,
            expr: LinExpr(terms).canonical(),
            relation: *relation,
            rhs: sign * rhs - constant,
        });
    }

    for (ln, b) in binaries {
        let Some(&v) = r.index.get(&b) else {
            return Err(Error::parse(
                ln,
                format!("binary {b} is not used in the model"),
            ));
        };
        let var = &mut r.variables[v];
        var.kind = VarKind::Binary;
        var.lower = 0.0;
        var.upper = 1.0;
    }

    let model = MilpModel {
        variables: r.variables,
        objective,
        constraints,
        meta,
    };
    model.validate()?;
    Ok(model)
}

fn signed_num(toks: &[Tok], pos: &mut usize) -> Option<f64> {
    let mut sign = 1.0;
    while let Some(t @ (Tok::Plus | Tok::Minus)) = toks.get(*pos) {
        if *t == Tok::Minus {
            sign = -sign;
        }
        *pos += 1;
    }
    match toks.get(*pos) {
        Some(Tok::Num(v)) => {
            *pos += 1;
            Some(sign * v)
        }
        _ => None,
    }
}

fn parse_bound(toks: &[Tok], r: &mut Reader, ln: usize) -> Result<()> {
    let bad = || Error::parse(ln, "unrecognized bound");
    let mut pos = 0;
    let lead = signed_num(toks, &mut pos);
    match lead {
        Some(lo) => {
            // lo <= x [<= hi]
            let Some(Tok::Rel(Relation::Le)) = toks.get(pos) else {
                return Err(bad());
            };
            let Some(Tok::Name(n)) = toks.get(pos + 1) else {
                return Err(bad());
            };
            pos += 2;
            let v = r.var(n);
            r.variables[v].lower = lo;
            if let Some(Tok::Rel(Relation::Le)) = toks.get(pos) {
                pos += 1;
                r.variables[v].upper = signed_num(toks, &mut pos).ok_or_else(bad)?;
            }
        }
        None => {
            let Some(Tok::Name(n)) = toks.first() else {
                return Err(bad());
            };
            let v = r.var(n);
            match toks.get(1) {
                Some(Tok::Name(f)) if f.eq_ignore_ascii_case("free") => {
                    r.variables[v].lower = f64::NEG_INFINITY;
                    r.variables[v].upper = f64::INFINITY;
                    pos = 2;
                }
                Some(Tok::Rel(rel)) => {
                    pos = 2;
                    let x = signed_num(toks, &mut pos).ok_or_else(bad)?;
                    let var = &mut r.variables[v];
                    match rel {
                        Relation::Ge => var.lower = x,
                        Relation::Le => var.upper = x,
                        Relation::Eq => {
                            var.lower = x;
                            var.upper = x;
                        }
                    }
                }
                _ => return Err(bad()),
            }
        }
    }
    if pos != toks.len() {
        return Err(bad());
    }
    Ok(())
}
