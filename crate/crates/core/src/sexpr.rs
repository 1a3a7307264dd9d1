//! Minimal s-expression reader used by the domain and problem languages.
//!
//! Atoms are any run of characters that is not whitespace, a parenthesis or
//! the start of a `;` comment. Every node remembers where it started so that
//! later stages can report errors with a line and column.

use std::fmt;

use crate::error::{Error, Result};

/// One-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// Case-insensitive comparison against an atom.
    pub fn is_atom(&self, name: &str) -> bool {
        self.as_atom().is_some_and(|s| s.eq_ignore_ascii_case(name))
    }

    /// Head atom of a list, upper-cased.
    pub fn head(&self) -> Option<String> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(Sexp::as_atom)
            .map(str::to_ascii_uppercase)
    }
}

impl PartialEq for Sexp {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Sexp::Atom(a, _), Sexp::Atom(b, _)) => a == b,
            (Sexp::List(a, _), Sexp::List(b, _)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => f.write_str(s),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, col: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>> {
        self.skip_trivia();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Ok(None),
            Some(')') => Err(Error::Parse {
                pos: start,
                msg: "unexpected ')'".into(),
            }),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(Error::Parse {
                                pos: start,
                                msg: "unclosed '('".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, start)));
                        }
                        Some(_) => {
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
            }
            Some(_) => {
                let mut atom = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    self.bump();
                }
                Ok(Some(Sexp::Atom(atom, start)))
            }
        }
    }
}

/// Reads every top-level form in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>> {
    let mut reader = Reader::new(text);
    let mut forms = Vec::new();
    while let Some(form) = reader.read()? {
        forms.push(form);
    }
    Ok(forms)
}

/// Reads exactly one form; trailing forms are an error.
pub fn read_one(text: &str) -> Result<Sexp> {
    let mut forms = read_all(text)?;
    match forms.len() {
        1 => Ok(forms.remove(0)),
        0 => Err(Error::Parse {
            pos: Pos { line: 1, col: 1 },
            msg: "expected one form, found none".into(),
        }),
        _ => Err(Error::Parse {
            pos: forms[1].pos(),
            msg: "expected a single form".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_and_comments() {
        let forms = read_all("; header\n(a (b c) ; trailing\n d)\n(e)").unwrap();
        assert_eq!(forms.len(), 2);
        assert_eq!(forms[0].to_string(), "(a (b c) d)");
        assert_eq!(forms[1].pos(), Pos { line: 4, col: 1 });
    }

    #[test]
    fn reports_unclosed_paren_position() {
        let err = read_all("\n  (a (b)").unwrap_err();
        match err {
            Error::Parse { pos, .. } => assert_eq!(pos, Pos { line: 2, col: 3 }),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stray_close_paren_is_an_error() {
        assert!(read_all("(a))").is_err());
    }

    #[test]
    fn equality_ignores_positions() {
        let a = read_one("(x y)").unwrap();
        let b = read_one("\n\n   (x   y)").unwrap();
        assert_eq!(a, b);
    }
}
