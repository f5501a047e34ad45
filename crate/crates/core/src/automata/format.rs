//! Versioned plain-text format and DOT export.
//!
//! ```text
//! mealy v1 <states> <inputs> <outputs>
//! <one input symbol per line>
//! <one output symbol per line>
//! <src> <input> <dst> <output>      (one line per transition)
//! ```
//!
//! The initial state is always state 0; machines are written in canonical
//! form so equal behaviour gives byte-identical files.

use std::fmt::Write;

use super::{AutomataError, MealyMachine, Symbol};

const HEADER: &str = "mealy v1";

pub fn to_text<I: Symbol, O: Symbol>(m: &MealyMachine<I, O>) -> String {
    let m = m.canonical();
    let mut out = String::new();
    writeln!(
        out,
        "{HEADER} {} {} {}",
        m.num_states(),
        m.inputs().len(),
        m.outputs().len()
    )
    .unwrap();
    for a in m.inputs().iter() {
        writeln!(out, "{a}").unwrap();
    }
    for o in m.outputs().iter() {
        writeln!(out, "{o}").unwrap();
    }
    for (src, a, dst, o) in m.transitions() {
        writeln!(out, "{src} {a} {dst} {o}").unwrap();
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> AutomataError {
    AutomataError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_symbol<T: Symbol>(text: &str, line: usize) -> Result<T, AutomataError> {
    text.parse::<T>()
        .map_err(|_| parse_err(line, format!("cannot parse symbol '{text}'")))
}

pub fn parse_mealy<I: Symbol, O: Symbol>(text: &str) -> Result<MealyMachine<I, O>, AutomataError> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim_end()));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let counts = header
        .strip_prefix(HEADER)
        .ok_or_else(|| parse_err(1, format!("expected header '{HEADER} ...'")))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(1, format!("bad count '{t}'"))))
        .collect::<Result<_, _>>()?;
    let [states, n_in, n_out] = counts[..] else {
        return Err(parse_err(1, "header needs three counts"));
    };

    let mut next_line = |what: &str| {
        lines
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of input, expected {what}")))
    };

    let mut inputs = Vec::with_capacity(n_in);
    for _ in 0..n_in {
        let (n, l) = next_line("input symbol")?;
        inputs.push(parse_symbol::<I>(l, n)?);
    }
    let mut outputs = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        let (n, l) = next_line("output symbol")?;
        outputs.push(parse_symbol::<O>(l, n)?);
    }

    let mut rows: Vec<Vec<Option<(usize, O)>>> = vec![vec![None; n_in]; states];
    for _ in 0..states * n_in {
        let (n, l) = next_line("transition")?;
        let fields: Vec<&str> = l.split_whitespace().collect();
        let [src, a, dst, o] = fields[..] else {
            return Err(parse_err(n, "transition needs four fields"));
        };
        let src: usize = src.parse().map_err(|_| parse_err(n, "bad source state"))?;
        let dst: usize = dst.parse().map_err(|_| parse_err(n, "bad target state"))?;
        if src >= states || dst >= states {
            return Err(parse_err(n, "state out of range"));
        }
        let a = parse_symbol::<I>(a, n)?;
        let o = parse_symbol::<O>(o, n)?;
        let i = inputs
            .iter()
            .position(|x| *x == a)
            .ok_or_else(|| parse_err(n, format!("input '{a}' not declared")))?;
        if !outputs.contains(&o) {
            return Err(parse_err(n, format!("output '{o}' not declared")));
        }
        if rows[src][i].replace((dst, o)).is_some() {
            return Err(parse_err(n, "duplicate transition"));
        }
    }
    if let Some((n, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(n, format!("trailing content '{l}'")));
    }

    let rows = rows
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.expect("all transitions read")).collect())
        .collect();
    if states == 0 {
        return Err(parse_err(1, "machine needs at least one state"));
    }
    MealyMachine::new(inputs, 0, rows)
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT digraph with `input/output` edge labels and a point-shaped entry
/// marker pointing at the initial state.
pub fn to_dot<I: Symbol, O: Symbol>(m: &MealyMachine<I, O>) -> String {
    let mut out = String::from("digraph mealy {\n  rankdir=LR;\n  __start [shape=point];\n");
    for s in 0..m.num_states() {
        writeln!(out, "  s{s} [shape=circle, label=\"{s}\"];").unwrap();
    }
    writeln!(out, "  __start -> s{};", m.initial()).unwrap();
    for (src, a, dst, o) in m.transitions() {
        writeln!(
            out,
            "  s{src} -> s{dst} [label=\"{}\"];",
            escape(&format!("{a}/{o}"))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toggle() -> MealyMachine<char, u8> {
        MealyMachine::new(vec!['a'], 0, vec![vec![(1, 0)], vec![(0, 1)]]).unwrap()
    }

    #[test]
    fn text_layout() {
        let text = to_text(&toggle());
        assert_eq!(text, "mealy v1 2 1 2\na\n0\n1\n0 a 1 0\n1 a 0 1\n");
    }

    #[test]
    fn parse_round_trip() {
        let m = toggle();
        let back: MealyMachine<char, u8> = parse_mealy(&to_text(&m)).unwrap();
        assert!(m.equivalent(&back).unwrap().is_equal());
        assert_eq!(to_text(&back), to_text(&m));
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(parse_mealy::<char, u8>("").is_err());
        assert!(parse_mealy::<char, u8>("mealy v2 1 1 1\na\n0\n0 a 0 0\n").is_err());
        // missing transition
        assert!(parse_mealy::<char, u8>("mealy v1 2 1 1\na\n0\n0 a 1 0\n").is_err());
        // undeclared output
        assert!(parse_mealy::<char, u8>("mealy v1 1 1 1\na\n0\n0 a 0 7\n").is_err());
        // trailing garbage
        assert!(parse_mealy::<char, u8>("mealy v1 1 1 1\na\n0\n0 a 0 0\nxyz\n").is_err());
    }

    #[test]
    fn dot_single_state() {
        let m = MealyMachine::new(vec!['a', 'b', 'c'], 0, vec![vec![(0, 0u8), (0, 1), (0, 2)]]).unwrap();
        let dot = to_dot(&m);
        assert_eq!(dot.matches("s0 -> s0").count(), 3);
        assert!(dot.contains("__start -> s0;"));
    }

    #[test]
    fn dot_toggle_labels() {
        let dot = to_dot(&toggle());
        assert!(dot.contains("s0 -> s1 [label=\"a/0\"];"));
        assert!(dot.contains("s1 -> s0 [label=\"a/1\"];"));
    }
}
