//! Recursive-descent parser for the formula grammar.

use std::fmt;

use thiserror::Error;

use crate::formula::{Formula, Group};

/// The concrete syntax, printed verbatim by `stobon grammar`.
pub const GRAMMAR: &str = r#"formula ::= iff ;  iff ::= imp { "<->" imp } ;  imp ::= or [ "->" imp ] ;
or ::= and { "|" and } ;  and ::= unary { "&" unary } ;
unary ::= "~" unary | "K" "[" name "]" unary | "E" [ "[" namelist "]" ] unary
        | "C" [ "[" namelist "]" ] unary | "[" "!" formula "]" unary
        | "(" formula ")" | "true" | "false" | name ;
namelist ::= name { "," name } ;
name ::= [a-zA-Z_][a-zA-Z0-9_]*   (K, E, C, true, false are reserved as atoms)
"#;

pub const DEFAULT_MAX_DEPTH: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_with_depth(text, DEFAULT_MAX_DEPTH)
}

/// Parses with an explicit nesting limit; deeper input fails with a
/// `ParseError` instead of exhausting the stack.
pub fn parse_with_depth(text: &str, max_depth: usize) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, depth: 0, max_depth };
    let f = parser.formula()?;
    parser.expect(&Tok::End, "end of input")?;
    Ok(f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bang,
    Comma,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "`{name}`"),
            Tok::Not => "\"~\"",
            Tok::And => "\"&\"",
            Tok::Or => "\"|\"",
            Tok::Implies => "\"->\"",
            Tok::Iff => "\"<->\"",
            Tok::LParen => "\"(\"",
            Tok::RParen => "\")\"",
            Tok::LBracket => "\"[\"",
            Tok::RBracket => "\"]\"",
            Tok::Bang => "\"!\"",
            Tok::Comma => "\",\"",
            Tok::End => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'~' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'!' => Tok::Bang,
            b',' => Tok::Comma,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Implies
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                i += 2;
                Tok::Iff
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                let found = text[start..].chars().next().expect("non-empty remainder");
                let expected = match c {
                    b'-' => "\"->\"",
                    b'<' => "\"<->\"",
                    _ => "a formula token",
                };
                return Err(ParseError {
                    offset: start,
                    expected: expected.into(),
                    found: format!("{found:?}"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "K" | "E" | "C" | "true" | "false")
}

enum Prefix {
    Not,
    Knows(String),
    Everyone(Group),
    Common(Group),
    Announce(Formula),
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
    max_depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].1
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let last = self.tokens.len() - 1;
        &self.tokens[(self.pos + ahead).min(last)].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].1.clone();
        if tok != Tok::End {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError { offset: self.offset(), expected: expected.into(), found: self.peek().to_string() }
    }

    fn expect(&mut self, tok: &Tok, expected: &str) -> Result<(), ParseError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    /// Charges `amount` levels of nesting against the depth budget.
    fn descend(&mut self, amount: usize) -> Result<(), ParseError> {
        self.depth += amount;
        if self.depth > self.max_depth {
            Err(ParseError {
                offset: self.offset(),
                expected: format!("nesting depth at most {}", self.max_depth),
                found: "deeper nesting".into(),
            })
        } else {
            Ok(())
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.iff())
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let saved = self.depth;
        let mut lhs = self.imp()?;
        while self.eat(&Tok::Iff) {
            self.descend(1)?;
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        self.depth = saved;
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let saved = self.depth;
        let mut operands = vec![self.or()?];
        while self.eat(&Tok::Implies) {
            self.descend(1)?;
            operands.push(self.or()?);
        }
        self.depth = saved;
        let mut acc = operands.pop().expect("at least one operand");
        while let Some(lhs) = operands.pop() {
            acc = Formula::implies(lhs, acc);
        }
        Ok(acc)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let saved = self.depth;
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            self.descend(1)?;
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        self.depth = saved;
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let saved = self.depth;
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            self.descend(1)?;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        self.depth = saved;
        Ok(lhs)
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.error("a name")),
        }
    }

    fn group(&mut self) -> Result<Group, ParseError> {
        // `E [! ...]` is an announcement operand, not a group list.
        if self.peek() != &Tok::LBracket || self.peek_at(1) == &Tok::Bang {
            return Ok(Group::All);
        }
        self.bump();
        let mut names = vec![self.name()?];
        while self.eat(&Tok::Comma) {
            names.push(self.name()?);
        }
        self.expect(&Tok::RBracket, "\"]\"")?;
        Ok(Group::Agents(names))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let saved = self.depth;
        let mut prefixes = Vec::new();
        loop {
            let prefix = match self.peek().clone() {
                Tok::Not => {
                    self.bump();
                    Prefix::Not
                }
                Tok::Ident(kw) if kw == "K" => {
                    self.bump();
                    self.expect(&Tok::LBracket, "\"[\"")?;
                    let agent = self.name()?;
                    self.expect(&Tok::RBracket, "\"]\"")?;
                    Prefix::Knows(agent)
                }
                Tok::Ident(kw) if kw == "E" => {
                    self.bump();
                    Prefix::Everyone(self.group()?)
                }
                Tok::Ident(kw) if kw == "C" => {
                    self.bump();
                    Prefix::Common(self.group()?)
                }
                Tok::LBracket => {
                    self.bump();
                    self.expect(&Tok::Bang, "\"!\"")?;
                    self.descend(1)?;
                    let announced = self.formula()?;
                    self.expect(&Tok::RBracket, "\"]\"")?;
                    Prefix::Announce(announced)
                }
                _ => break,
            };
            self.descend(1)?;
            prefixes.push(prefix);
        }
        let mut f = self.primary()?;
        while let Some(prefix) = prefixes.pop() {
            f = match prefix {
                Prefix::Not => Formula::not(f),
                Prefix::Knows(agent) => Formula::knows(agent, f),
                Prefix::Everyone(group) => Formula::everyone(group, f),
                Prefix::Common(group) => Formula::common(group, f),
                Prefix::Announce(announced) => Formula::announce(announced, f),
            };
        }
        self.depth = saved;
        Ok(f)
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                self.descend(1)?;
                let f = self.formula()?;
                self.expect(&Tok::RParen, "\")\"")?;
                Ok(f)
            }
            Tok::Ident(name) if name == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(name) if name == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) if !is_reserved(&name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            _ => Err(self.error("a formula")),
        }
    }
}
