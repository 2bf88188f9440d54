//! CPLEX LP text output, readable by most external solvers.

use std::fmt::Write;

use super::{LpProblem, Relation, Sense};

/// LP-format identifiers may not start with a digit or contain most punctuation.
fn sanitize(name: &str, fallback: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E') {
        s = format!("{fallback}_{s}");
    }
    s
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut first = true;
    for (a, name) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { "-" } else if first { "" } else { "+" };
        let mag = a.abs();
        if !first {
            out.push(' ');
        }
        out.push_str(sign);
        if !sign.is_empty() {
            out.push(' ');
        }
        if mag != 1.0 {
            write!(out, "{mag} ").unwrap();
        }
        out.push_str(&name);
        first = false;
    }
    if first {
        out.push('0');
    }
}

pub(crate) fn write(p: &LpProblem) -> String {
    let names: Vec<String> = p
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| sanitize(&v.name, &format!("x{j}")))
        .collect();
    let mut out = String::new();
    out.push_str(match p.sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    out.push_str(" obj: ");
    write_terms(
        &mut out,
        p.variables.iter().zip(&names).map(|(v, n)| (v.objective, n.clone())),
    );
    out.push_str("\nSubject To\n");
    for (i, c) in p.constraints.iter().enumerate() {
        write!(out, " {}: ", sanitize(&c.name, &format!("r{i}"))).unwrap();
        write_terms(&mut out, c.terms.iter().map(|&(j, a)| (a, names[j].clone())));
        let rel = match c.relation {
            Relation::LessEq => "<=",
            Relation::Equal => "=",
            Relation::GreaterEq => ">=",
        };
        writeln!(out, " {rel} {}", c.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for (v, n) in p.variables.iter().zip(&names) {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => writeln!(out, " {n} free").unwrap(),
            (true, true) => writeln!(out, " {} <= {n} <= {}", v.lower, v.upper).unwrap(),
            (true, false) if v.lower == 0.0 => {}
            (true, false) => writeln!(out, " {n} >= {}", v.lower).unwrap(),
            (false, true) => writeln!(out, " -inf <= {n} <= {}", v.upper).unwrap(),
        }
    }
    out.push_str("End\n");
    out
}
