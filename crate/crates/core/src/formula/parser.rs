//! Text syntax.
//!
//! ```text
//! formula  := implies
//! implies  := or ( "->" implies )?          right associative, sugar for !a | b
//! or       := and ( "|" and )*
//! and      := unary ( "&" unary )*
//! unary    := "!" unary | quant | "(" formula ")" | atom
//! quant    := ("E" | "A") var "."? formula   the body extends as far as possible
//! atom     := "true" | "false"
//!           | letter "(" var ")"             single-character name
//!           | name "(" var ( "," var )? ")"  name of two or more characters
//!           | var ( "<" | ">" | "=" ) var
//! ```
//!
//! `∃ ∀ ¬ ∧ ∨ →` are accepted for `E A ! & | ->`, and `#` starts a comment
//! running to the end of the line. Error offsets count characters from 1.

use thiserror::Error;

use super::{Formula, Quantifier, EQ, LESS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Lt,
    Gt,
    Equals,
    And,
    Or,
    Not,
    Arrow,
    Exists,
    Forall,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".to_string(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Equals => "`=`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Not => "`!`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Exists => "`E`".into(),
            Tok::Forall => "`A`".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char, parameterised: bool) -> bool {
    c.is_alphanumeric()
        || matches!(c, '_' | '\'' | ':')
        || parameterised && matches!(c, '.' | '/' | '-')
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            '=' => Some(Tok::Equals),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            '!' | '¬' | '~' => Some(Tok::Not),
            '→' => Some(Tok::Arrow),
            '∃' => Some(Tok::Exists),
            '∀' => Some(Tok::Forall),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, pos));
            i += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Arrow, pos));
            i += 2;
            continue;
        }
        if is_ident_start(c) || c.is_ascii_digit() {
            let start = i;
            // catalogue names such as `rand:7:0.5` or `rel:data/r.txt` carry
            // parameters after a colon, where `.`, `/` and `-` are allowed too
            let mut parameterised = false;
            while i < chars.len() && is_ident_continue(chars[i], parameterised) {
                parameterised |= chars[i] == ':';
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "E" => Tok::Exists,
                "A" => Tok::Forall,
                _ => Tok::Ident(word),
            };
            out.push((tok, pos));
            continue;
        }
        return Err(ParseError {
            offset: pos,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::Eof, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.pos(),
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(wanted),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            items.push(self.conjunction()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Or(items)
        })
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::And(items)
        })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Exists | Tok::Forall => {
                let q = if self.bump() == Tok::Exists {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                let var = self.ident("a variable after the quantifier")?;
                if *self.peek() == Tok::Dot {
                    self.bump();
                }
                let body = self.formula()?;
                Ok(Formula::Quant(q, var, Box::new(body)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(_) => self.atom(),
            _ => self.unexpected("a formula"),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos();
        let name = self.ident("an atom")?;
        match (name.as_str(), self.peek()) {
            ("true", t) if *t != Tok::LParen => return Ok(Formula::True),
            ("false", t) if *t != Tok::LParen => return Ok(Formula::False),
            _ => {}
        }
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let mut args = vec![self.ident("a variable")?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.ident("a variable")?);
                }
                self.expect(Tok::RParen)?;
                let mut chars = name.chars();
                match (chars.next(), chars.next()) {
                    (Some(letter), None) => {
                        if args.len() != 1 {
                            return Err(ParseError {
                                offset: start,
                                message: format!(
                                    "letter atom `{name}` takes one variable, got {}",
                                    args.len()
                                ),
                            });
                        }
                        Ok(Formula::Letter {
                            letter,
                            var: args.pop().unwrap(),
                        })
                    }
                    _ => {
                        if args.len() > 2 {
                            return Err(ParseError {
                                offset: start,
                                message: format!(
                                    "predicate `{name}` applied to {} variables; at most 2 allowed",
                                    args.len()
                                ),
                            });
                        }
                        Ok(Formula::Pred { name, args })
                    }
                }
            }
            Tok::Lt | Tok::Gt | Tok::Equals => {
                let op = self.bump();
                let rhs = self.ident("a variable")?;
                Ok(match op {
                    Tok::Lt => Formula::pred(LESS, [name, rhs]),
                    Tok::Gt => Formula::pred(LESS, [rhs, name]),
                    _ => Formula::pred(EQ, [name, rhs]),
                })
            }
            _ => self.unexpected("`(` or a comparison"),
        }
    }
}

/// Parses a formula in the text syntax above.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unclosed_atom_reports_end_offset() {
        let err = parse("E x a(x").unwrap_err();
        assert_eq!(err.offset, 8);
    }

    #[test]
    fn comparisons() {
        assert_eq!(parse("x < y").unwrap(), Formula::less("x", "y"));
        assert_eq!(parse("x > y").unwrap(), Formula::less("y", "x"));
        assert_eq!(parse("x = y").unwrap(), Formula::equal("x", "y"));
    }

    #[test]
    fn precedence_and_sugar() {
        let f = parse("a(x) | b(x) & c(x) -> d(x)").unwrap();
        let expected = Formula::implies(
            Formula::or([
                Formula::letter('a', "x"),
                Formula::and([Formula::letter('b', "x"), Formula::letter('c', "x")]),
            ]),
            Formula::letter('d', "x"),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn unicode_and_comments() {
        let a = parse("∃x. ¬a(x) ∧ b(x) # trailing\n").unwrap();
        let b = parse("E x. !a(x) & b(x)").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse("∀x (a(x) ∨ x = x)").unwrap(), parse("A x. a(x) | x = x").unwrap());
    }

    #[test]
    fn catalogue_names_lex_as_identifiers() {
        let f = parse("E x. linmul:2(x, y) & rand:7:0.5(x, y) & rel:data/r-1.txt(y, x)").unwrap();
        let names: Vec<_> = f.predicates().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ["linmul:2", "rand:7:0.5", "rel:data/r-1.txt"]);
    }

    #[test]
    fn errors() {
        assert!(parse("").is_err());
        assert!(parse("a(x, y)").is_err());
        assert!(parse("foo(x, y, z)").is_err());
        assert!(parse("E . a(x)").is_err());
        assert!(parse("a(x) )").is_err());
        assert_eq!(parse("a(x) $").unwrap_err().offset, 6);
    }
}
