//! The epistemic formula language: AST, canonical printer and builders.

use std::fmt;

use serde::{Serialize, Serializer};

/// Which agents an `E` or `C` modality ranges over.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    /// Every agent of the model the formula is evaluated against.
    All,
    /// Named agents; resolved at evaluation time. Printable only when non-empty.
    Agents(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    True,
    False,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Knows(String, Box<Formula>),
    Everyone(Group, Box<Formula>),
    Common(Group, Box<Formula>),
    /// `[! announced] then`: after truthfully announcing the first formula,
    /// the second holds.
    Announce(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(f: Formula, g: Formula) -> Self {
        Formula::And(Box::new(f), Box::new(g))
    }

    pub fn or(f: Formula, g: Formula) -> Self {
        Formula::Or(Box::new(f), Box::new(g))
    }

    pub fn implies(f: Formula, g: Formula) -> Self {
        Formula::Implies(Box::new(f), Box::new(g))
    }

    pub fn iff(f: Formula, g: Formula) -> Self {
        Formula::Iff(Box::new(f), Box::new(g))
    }

    pub fn knows(agent: impl Into<String>, f: Formula) -> Self {
        Formula::Knows(agent.into(), Box::new(f))
    }

    pub fn everyone(group: Group, f: Formula) -> Self {
        Formula::Everyone(group, Box::new(f))
    }

    pub fn common(group: Group, f: Formula) -> Self {
        Formula::Common(group, Box::new(f))
    }

    pub fn announce(announced: Formula, then: Formula) -> Self {
        Formula::Announce(Box::new(announced), Box::new(then))
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => vec![],
            Formula::Not(f) | Formula::Knows(_, f) | Formula::Everyone(_, f) | Formula::Common(_, f) => vec![f],
            Formula::And(f, g)
            | Formula::Or(f, g)
            | Formula::Implies(f, g)
            | Formula::Iff(f, g)
            | Formula::Announce(f, g) => vec![f, g],
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut count = 0;
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            count += 1;
            stack.extend(f.children());
        }
        count
    }

    /// Height of the AST; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self, 1)];
        while let Some((f, d)) = stack.pop() {
            best = best.max(d);
            stack.extend(f.children().into_iter().map(|c| (c, d + 1)));
        }
        best
    }

    /// Longest chain of nested `E` operators.
    pub fn everyone_depth(&self) -> usize {
        let inner = self.children().into_iter().map(Formula::everyone_depth).max().unwrap_or(0);
        match self {
            Formula::Everyone(..) => inner + 1,
            _ => inner,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 0,
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 4,
        }
    }
}

/// Wraps `base` in `k` layers of `Everyone(group, ·)`.
pub fn nest_everyone(base: Formula, k: usize, group: &Group) -> Formula {
    (0..k).fold(base, |f, _| Formula::everyone(group.clone(), f))
}

/// Canonical text with the fewest parentheses the grammar needs.
pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f);
    out
}

fn write_group(out: &mut String, op: &str, group: &Group) {
    out.push_str(op);
    if let Group::Agents(names) = group {
        out.push('[');
        out.push_str(&names.join(","));
        out.push(']');
    }
    out.push(' ');
}

fn write_operand(out: &mut String, f: &Formula, min_prec: u8) {
    if f.precedence() < min_prec {
        out.push('(');
        write_formula(out, f);
        out.push(')');
    } else {
        write_formula(out, f);
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    stacker::maybe_grow(32 * 1024, 1024 * 1024, || match f {
        Formula::Atom(name) => out.push_str(name),
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Not(g) => {
            out.push('~');
            write_operand(out, g, 4);
        }
        Formula::Knows(agent, g) => {
            out.push_str("K[");
            out.push_str(agent);
            out.push_str("] ");
            write_operand(out, g, 4);
        }
        Formula::Everyone(group, g) => {
            write_group(out, "E", group);
            write_operand(out, g, 4);
        }
        Formula::Common(group, g) => {
            write_group(out, "C", group);
            write_operand(out, g, 4);
        }
        Formula::Announce(g, h) => {
            out.push_str("[! ");
            write_formula(out, g);
            out.push_str("] ");
            write_operand(out, h, 4);
        }
        // `&`, `|` and `<->` fold to the left, `->` to the right.
        Formula::And(g, h) => {
            write_operand(out, g, 3);
            out.push_str(" & ");
            write_operand(out, h, 4);
        }
        Formula::Or(g, h) => {
            write_operand(out, g, 2);
            out.push_str(" | ");
            write_operand(out, h, 3);
        }
        Formula::Implies(g, h) => {
            write_operand(out, g, 2);
            out.push_str(" -> ");
            write_operand(out, h, 1);
        }
        Formula::Iff(g, h) => {
            write_operand(out, g, 0);
            out.push_str(" <-> ");
            write_operand(out, h, 1);
        }
    })
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&render(self))
    }
}
