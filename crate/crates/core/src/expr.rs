//! A small arithmetic-expression language for user-supplied profiles of `xi`.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr   = term (("+" | "-") term)*
//! term   = unary (("*" | "/") unary)*
//! unary  = "-" unary | power
//! power  = atom ("^" unary)?
//! atom   = number | "xi" | "ξ" | "pi" | "e" | name "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Functions: `exp`, `log` (alias `ln`), `sqrt`, `sin`, `cos`, `pow(base, exponent)`.
//! `×` and `÷` are accepted for `*` and `/`.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "exp" => (Func::Exp, 1),
            "log" | "ln" => (Func::Log, 1),
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }
}

/// A parsed expression in the single variable `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            end: source.len(),
        };
        let root = parser.expr()?;
        if let Some(t) = parser.peek() {
            return Err(Error::Parse {
                pos: t.pos,
                msg: format!("unexpected {}", t.kind),
            });
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Value and first two derivatives at `xi`.
    pub fn eval(&self, xi: f64) -> Jet {
        eval(&self.root, Jet::variable(xi))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn eval(node: &Node, x: Jet) -> Jet {
    match node {
        Node::Num(v) => Jet::constant(*v),
        Node::Var => x,
        Node::Neg(a) => -eval(a, x),
        Node::Add(a, b) => eval(a, x) + eval(b, x),
        Node::Sub(a, b) => eval(a, x) - eval(b, x),
        Node::Mul(a, b) => eval(a, x) * eval(b, x),
        Node::Div(a, b) => eval(a, x) / eval(b, x),
        Node::Pow(a, b) => eval(a, x).pow(eval(b, x)),
        Node::Call(func, args) => {
            let a = eval(&args[0], x);
            match func {
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sqrt => a.powf(0.5),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Pow => a.pow(eval(&args[1], x)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Num(v) => write!(f, "number {v}"),
            Kind::Ident(s) => write!(f, "`{s}`"),
            Kind::Plus => f.write_str("`+`"),
            Kind::Minus => f.write_str("`-`"),
            Kind::Star => f.write_str("`*`"),
            Kind::Slash => f.write_str("`/`"),
            Kind::Caret => f.write_str("`^`"),
            Kind::LParen => f.write_str("`(`"),
            Kind::RParen => f.write_str("`)`"),
            Kind::Comma => f.write_str("`,`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    kind: Kind,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let single = match c {
            '+' => Some(Kind::Plus),
            '-' | '−' => Some(Kind::Minus),
            '*' | '×' => Some(Kind::Star),
            '/' | '÷' => Some(Kind::Slash),
            '^' => Some(Kind::Caret),
            '(' => Some(Kind::LParen),
            ')' => Some(Kind::RParen),
            ',' => Some(Kind::Comma),
            _ => None,
        };
        if let Some(kind) = single {
            chars.next();
            out.push(Token { kind, pos });
            continue;
        }
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_digit() || c == '.' {
            let mut end = pos;
            let mut prev = ' ';
            while let Some(&(i, d)) = chars.peek() {
                let exponent_sign = (d == '+' || d == '-') && (prev == 'e' || prev == 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exponent_sign {
                    end = i + d.len_utf8();
                    prev = d;
                    chars.next();
                } else {
                    break;
                }
            }
            let text = &src[pos..end];
            let value = text.parse::<f64>().map_err(|_| Error::Parse {
                pos,
                msg: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                kind: Kind::Num(value),
                pos,
            });
        } else if c.is_alphabetic() || c == '_' {
            let mut end = pos;
            while let Some(&(i, d)) = chars.peek() {
                if d.is_alphanumeric() || d == '_' {
                    end = i + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token {
                kind: Kind::Ident(src[pos..end].to_string()),
                pos,
            });
        } else {
            return Err(Error::Parse {
                pos,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &Kind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: Kind) -> Result<()> {
        match self.next() {
            Some(t) if t.kind == kind => Ok(()),
            Some(t) => Err(Error::Parse {
                pos: t.pos,
                msg: format!("expected {kind}, found {}", t.kind),
            }),
            None => Err(Error::Parse {
                pos: self.end,
                msg: format!("expected {kind}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Kind::Plus) {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Kind::Minus) {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Kind::Star) {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(&Kind::Slash) {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(&Kind::Minus) {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(&Kind::Caret) {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(tok) = self.next() else {
            return Err(Error::Parse {
                pos: self.end,
                msg: "unexpected end of input".into(),
            });
        };
        match &tok.kind {
            Kind::Num(v) => Ok(Node::Num(*v)),
            Kind::LParen => {
                let inner = self.expr()?;
                self.expect(Kind::RParen)?;
                Ok(inner)
            }
            Kind::Ident(name) => match name.as_str() {
                "xi" | "ξ" => Ok(Node::Var),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                _ => {
                    let Some((func, arity)) = Func::lookup(name) else {
                        return Err(Error::Parse {
                            pos: tok.pos,
                            msg: format!("unknown name `{name}`"),
                        });
                    };
                    self.expect(Kind::LParen)?;
                    let mut args = vec![self.expr()?];
                    while self.eat(&Kind::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(Kind::RParen)?;
                    if args.len() != arity {
                        return Err(Error::Parse {
                            pos: tok.pos,
                            msg: format!("`{name}` takes {arity} argument(s), got {}", args.len()),
                        });
                    }
                    Ok(Node::Call(func, args))
                }
            },
            other => Err(Error::Parse {
                pos: tok.pos,
                msg: format!("unexpected {other}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn jet(src: &str, xi: f64) -> Jet {
        Expression::parse(src).unwrap().eval(xi)
    }

    #[test]
    fn polynomial_and_precedence() {
        let j = jet("1 + 2*xi^2 - xi/4", 3.0);
        assert_relative_eq!(j.value, 1.0 + 18.0 - 0.75);
        assert_relative_eq!(j.d1, 12.0 - 0.25);
        assert_relative_eq!(j.d2, 4.0);
        assert_eq!(jet("-xi^2", 3.0).value, -9.0);
        assert_eq!(jet("2^3^2", 0.0).value, 512.0);
        assert_eq!(jet("xi^-1", 2.0).value, 0.5);
    }

    #[test]
    fn functions_and_unicode() {
        let j = jet("exp(0.5*ξ) × log(ξ)", 2.0);
        let expect = (1f64).exp() * 2f64.ln();
        assert_relative_eq!(j.value, expect, epsilon = 1e-15);
        let j = jet("pow(xi, 3)", 2.0);
        assert_eq!((j.value, j.d1, j.d2), (8.0, 12.0, 12.0));
        assert_relative_eq!(jet("sqrt(xi)", 4.0).d1, 0.25);
        assert_relative_eq!(jet("1.5e-1 * 2e+1", 0.0).value, 3.0);
    }

    #[test]
    fn errors_carry_positions() {
        for (src, pos) in [("1 +", 3), ("foo(xi)", 0), ("(xi", 3), ("xi $ 2", 3), ("pow(xi)", 0), ("xi xi", 3)] {
            match Expression::parse(src) {
                Err(Error::Parse { pos: p, .. }) => assert_eq!(p, pos, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
