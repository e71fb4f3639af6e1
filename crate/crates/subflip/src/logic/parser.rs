//! Formula text grammar:
//!
//! ```text
//! form := "top" | "bot" | "E(" id "," id ")" | id "=" id | NAME "(" id ")"
//!       | "~" form | form "&" form | form "|" form
//!       | "exists" id form | "forall" id form
//!       | "existsS" NAME form | "forallS" NAME form
//!       | "dist<=" INT "(" id "," id ")" | "(" form ")"
//! ```
//!
//! Precedence `~` > `&` > `|`; quantifier bodies extend maximally.
//! Identifiers starting with a lowercase letter or `_` are vertex
//! variables, uppercase-initial names are colors (or set variables when
//! bound by `existsS`/`forallS`). `dist<=r(x,y)` is sugar for the chain of
//! `r-1` existentials with variables `z1..z(r-1)`.

use super::Formula;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    Comma,
    Amp,
    Pipe,
    Tilde,
    EqSign,
    Le,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    end: usize,
}

fn lex(text: &str) -> Result<Lexer> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            '&' => {
                toks.push((Tok::Amp, i));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Pipe, i));
                i += 1;
            }
            '~' => {
                toks.push((Tok::Tilde, i));
                i += 1;
            }
            '=' => {
                toks.push((Tok::EqSign, i));
                i += 1;
            }
            '<' => {
                if i + 1 < bytes.len() && bytes[i + 1] as char == '=' {
                    toks.push((Tok::Le, i));
                    i += 2;
                } else {
                    return Err(Error::Syntax { offset: i, message: "expected `<=`".into() });
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let value: u64 = text[start..i]
                    .parse()
                    .map_err(|_| Error::Syntax { offset: start, message: "bad integer".into() })?;
                toks.push((Tok::Int(value), start));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let ch = bytes[i] as char;
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(Lexer { toks, end: text.len() })
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    set_scope: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, o)| o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let offset = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(Error::Syntax { offset, message: format!("expected {what}") }),
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset: self.offset(), message: message.into() })
    }

    fn parse_or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.parse_and()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.bump();
            parts.push(self.parse_and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn parse_and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.parse_unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            parts.push(self.parse_unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn parse_unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.bump();
                Ok(Formula::not(self.parse_unary()?))
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.parse_or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(_)) => self.parse_ident_lead(),
            _ => self.err("expected a formula"),
        }
    }

    fn parse_ident_lead(&mut self) -> Result<Formula> {
        let offset = self.offset();
        let name = match self.bump() {
            Some(Tok::Ident(name)) => name,
            _ => unreachable!(),
        };
        match name.as_str() {
            "top" => Ok(Formula::Top),
            "bot" => Ok(Formula::Bot),
            "exists" | "forall" => {
                let var = self.expect_lower_ident("a vertex variable")?;
                let body = self.parse_or()?;
                Ok(if name == "exists" {
                    Formula::exists(var, body)
                } else {
                    Formula::forall(var, body)
                })
            }
            "existsS" | "forallS" => {
                let set_name = self.expect_upper_ident("a set-variable name")?;
                self.set_scope.push(set_name.clone());
                let body = self.parse_or();
                self.set_scope.pop();
                let body = body?;
                Ok(if name == "existsS" {
                    Formula::ExistsSet(set_name, Box::new(body))
                } else {
                    Formula::ForallSet(set_name, Box::new(body))
                })
            }
            "dist" => {
                self.expect(Tok::Le, "`<=`")?;
                let r_offset = self.offset();
                let r = match self.bump() {
                    Some(Tok::Int(r)) => r,
                    _ => return Err(Error::Syntax { offset: r_offset, message: "expected a radius".into() }),
                };
                if r == 0 {
                    return Err(Error::Syntax {
                        offset: r_offset,
                        message: "distance radius must be at least 1".into(),
                    });
                }
                self.expect(Tok::LParen, "`(`")?;
                let x = self.expect_lower_ident("a vertex variable")?;
                self.expect(Tok::Comma, "`,`")?;
                let y = self.expect_lower_ident("a vertex variable")?;
                self.expect(Tok::RParen, "`)`")?;
                for i in 1..r {
                    let z = format!("z{i}");
                    if x == z || y == z {
                        return Err(Error::Syntax {
                            offset: r_offset,
                            message: format!("argument `{z}` collides with a distance chain variable"),
                        });
                    }
                }
                Ok(dist_at_most(r as usize, &x, &y))
            }
            "E" if self.peek() == Some(&Tok::LParen) => {
                self.bump();
                let x = self.expect_lower_ident("a vertex variable")?;
                self.expect(Tok::Comma, "`,`")?;
                let y = self.expect_lower_ident("a vertex variable")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Formula::edge(x, y))
            }
            _ if starts_upper(&name) => {
                self.expect(Tok::LParen, "`(`")?;
                let x = self.expect_lower_ident("a vertex variable")?;
                self.expect(Tok::RParen, "`)`")?;
                if self.set_scope.contains(&name) {
                    Ok(Formula::SetMem(name, x))
                } else {
                    Ok(Formula::Color(name, x))
                }
            }
            _ => {
                // A lowercase identifier: only `id = id` remains.
                if self.peek() == Some(&Tok::EqSign) {
                    self.bump();
                    let y = self.expect_lower_ident("a vertex variable")?;
                    Ok(Formula::eq(name, y))
                } else {
                    Err(Error::Syntax { offset, message: format!("unexpected identifier `{name}`") })
                }
            }
        }
    }

    fn expect_lower_ident(&mut self, what: &str) -> Result<String> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Ident(name)) if !starts_upper(&name) => Ok(name),
            _ => Err(Error::Syntax { offset, message: format!("expected {what}") }),
        }
    }

    fn expect_upper_ident(&mut self, what: &str) -> Result<String> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Ident(name)) if starts_upper(&name) => Ok(name),
            _ => Err(Error::Syntax { offset, message: format!("expected {what}") }),
        }
    }
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

/// The nested expansion of `dist <= r`: a chain of `r-1` existentials
/// over `z1..z(r-1)` with binary conjunctions.
pub(crate) fn dist_at_most(r: usize, x: &str, y: &str) -> Formula {
    fn chain(i: usize, r: usize, prev: &str, y: &str) -> Formula {
        if i == r {
            Formula::edge(prev, y)
        } else {
            let z = format!("z{i}");
            Formula::exists(
                z.clone(),
                Formula::and(vec![Formula::edge(prev, &z), chain(i + 1, r, &z, y)]),
            )
        }
    }
    chain(1, r, x, y)
}

/// Parses a formula; free vertex variables are permitted, and
/// uppercase-initial atoms outside any `existsS`/`forallS` scope are read
/// as colors.
pub fn parse_formula(text: &str) -> Result<Formula> {
    parse_formula_with_sets(text, &[])
}

/// Like [`parse_formula`], with the listed names treated as free set
/// variables instead of colors.
pub fn parse_formula_with_sets(text: &str, set_vars: &[&str]) -> Result<Formula> {
    let lexer = lex(text)?;
    let mut parser = Parser {
        toks: &lexer.toks,
        pos: 0,
        end: lexer.end,
        set_scope: set_vars.iter().map(|s| s.to_string()).collect(),
    };
    let formula = parser.parse_or()?;
    if parser.pos != parser.toks.len() {
        return parser.err("trailing input");
    }
    Ok(formula)
}

/// Canonical text for a formula; `parse(render(f)) == f`.
pub fn render(f: &Formula) -> String {
    render_prec(f, 0)
}

// Precedence levels: 0 = or, 1 = and, 2 = unary/atom.
fn render_prec(f: &Formula, level: u8) -> String {
    let (text, my_level) = match f {
        Formula::Top => ("top".into(), 2),
        Formula::Bot => ("bot".into(), 2),
        Formula::Edge(x, y) => (format!("E({x},{y})"), 2),
        Formula::Eq(x, y) => (format!("{x} = {y}"), 2),
        Formula::Color(name, x) | Formula::SetMem(name, x) => (format!("{name}({x})"), 2),
        Formula::Not(inner) => (format!("~{}", render_prec(inner, 2)), 2),
        Formula::And(fs) => {
            let parts: Vec<String> = fs.iter().map(|c| render_child(c, 1)).collect();
            (parts.join(" & "), 1)
        }
        Formula::Or(fs) => {
            let parts: Vec<String> = fs.iter().map(|c| render_child(c, 0)).collect();
            (parts.join(" | "), 0)
        }
        Formula::Exists(v, body) => (format!("exists {v} {}", render_body(body)), 0),
        Formula::Forall(v, body) => (format!("forall {v} {}", render_body(body)), 0),
        Formula::ExistsSet(s, body) => (format!("existsS {s} {}", render_body(body)), 0),
        Formula::ForallSet(s, body) => (format!("forallS {s} {}", render_body(body)), 0),
    };
    if my_level < level {
        format!("({text})")
    } else {
        text
    }
}

// Quantifier bodies are maximal, so a quantifier appearing under `&`/`|`
// or `~` always needs parentheses unless it is the last operand; always
// adding them keeps the output canonical.
fn render_child(f: &Formula, level: u8) -> String {
    match f {
        Formula::Exists(..) | Formula::Forall(..) | Formula::ExistsSet(..) | Formula::ForallSet(..) => {
            format!("({})", render_prec(f, 0))
        }
        _ => render_prec(f, level),
    }
}

fn render_body(f: &Formula) -> String {
    match f {
        Formula::Top
        | Formula::Bot
        | Formula::Edge(..)
        | Formula::Eq(..)
        | Formula::Color(..)
        | Formula::SetMem(..) => render_prec(f, 0),
        _ => format!("({})", render_prec(f, 0)),
    }
}
