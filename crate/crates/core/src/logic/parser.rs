//! Recursive-descent reader for the textual atom syntax.
//!
//! ```text
//! line   := [ '!' | '?' ] atom
//! atom   := symbol [ '(' term { ',' term } ')' ]
//! term   := symbol [ '(' term { ',' term } ')' ] | variable | placemarker
//! ```
//!
//! Constant and function symbols start with an ASCII alphanumeric character
//! (or `-` followed by a digit) and continue with alphanumerics, `_`, `.` or
//! `-`. Variables (`_0`, `_x`) are only accepted when reading clauses, and
//! placemarkers (`+type`, `-type`, `#type`) only when reading mode templates.

use crate::error::{Error, Result};

use super::schema::Schema;
use super::term::{Atom, Term};

/// Prefix marker of an atom line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marker {
    None,
    /// `!`
    Negated,
    /// `?`
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PlaceKind {
    Input,
    Output,
    Constant,
}

#[derive(Clone, Debug)]
pub(crate) enum RawLeaf {
    Symbol,
    Variable,
    Place(PlaceKind),
}

#[derive(Clone, Debug)]
pub(crate) struct RawTerm {
    pub symbol: String,
    pub offset: usize,
    pub leaf: RawLeaf,
    pub args: Option<Vec<RawTerm>>,
}

#[derive(Clone, Copy, Default)]
pub(crate) struct Syntax {
    pub variables: bool,
    pub placemarkers: bool,
}

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    syntax: Syntax,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str, syntax: Syntax) -> Self {
        Cursor {
            src,
            pos: 0,
            syntax,
        }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<u8> {
        self.src.as_bytes().get(self.pos + ahead).copied()
    }

    pub fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    pub fn eat(&mut self, byte: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, byte: u8) -> Result<()> {
        if self.eat(byte) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", byte as char)))
        }
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    pub fn expect_end(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input".into()))
        }
    }

    pub fn error(&self, message: String) -> Error {
        let found = match self.src[self.pos..].chars().next() {
            Some(c) => format!(", found `{c}`"),
            None => ", found end of input".into(),
        };
        Error::Syntax {
            offset: self.pos,
            message: message + &found,
        }
    }

    fn symbol_start(&self) -> bool {
        match self.peek() {
            Some(b) if b.is_ascii_alphanumeric() => true,
            Some(b'-') => matches!(self.peek_at(1), Some(b) if b.is_ascii_digit()),
            _ => false,
        }
    }

    fn take_while_symbol(&mut self) -> &'a str {
        let start = self.pos;
        self.pos += 1;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b'-')
        {
            self.pos += 1;
        }
        // a trailing '.' terminates a declaration statement
        while self.pos > start + 1 && self.src.as_bytes()[self.pos - 1] == b'.' {
            self.pos -= 1;
        }
        &self.src[start..self.pos]
    }

    /// Reads a bare identifier (keyword, predicate or type name).
    pub fn symbol(&mut self) -> Result<(String, usize)> {
        self.skip_ws();
        if !self.symbol_start() {
            return Err(self.error("expected a symbol".into()));
        }
        let offset = self.pos;
        Ok((self.take_while_symbol().to_string(), offset))
    }

    pub fn unsigned(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| Error::Syntax {
                offset: start,
                message: "expected a non-negative integer".into(),
            })
    }

    pub fn term(&mut self) -> Result<RawTerm> {
        self.skip_ws();
        let offset = self.pos;
        match self.peek() {
            Some(b'_') if self.syntax.variables => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(self.error("expected a variable name".into()));
                }
                return Ok(RawTerm {
                    symbol: self.src[offset..self.pos].to_string(),
                    offset,
                    leaf: RawLeaf::Variable,
                    args: None,
                });
            }
            Some(b @ (b'+' | b'-' | b'#')) if self.syntax.placemarkers => {
                let kind = match b {
                    b'+' => PlaceKind::Input,
                    b'-' => PlaceKind::Output,
                    _ => PlaceKind::Constant,
                };
                self.pos += 1;
                let (ty, _) = self.symbol()?;
                return Ok(RawTerm {
                    symbol: ty,
                    offset,
                    leaf: RawLeaf::Place(kind),
                    args: None,
                });
            }
            _ => {}
        }
        if !self.symbol_start() {
            return Err(self.error("expected a term".into()));
        }
        let symbol = self.take_while_symbol().to_string();
        let args = self.arguments()?;
        Ok(RawTerm {
            symbol,
            offset,
            leaf: RawLeaf::Symbol,
            args,
        })
    }

    /// Parses an optional parenthesised argument list.
    pub fn arguments(&mut self) -> Result<Option<Vec<RawTerm>>> {
        if !self.eat(b'(') {
            return Ok(None);
        }
        let mut args = Vec::new();
        if self.eat(b')') {
            return Ok(Some(args));
        }
        loop {
            args.push(self.term()?);
            if self.eat(b',') {
                continue;
            }
            if self.eat(b')') {
                return Ok(Some(args));
            }
            return Err(self.error("expected `,` or `)`".into()));
        }
    }

    /// Parses `[marker] symbol [args]` as an atom skeleton.
    pub fn raw_atom(&mut self) -> Result<(Marker, RawTerm)> {
        self.skip_ws();
        let marker = if self.eat(b'!') {
            Marker::Negated
        } else if self.eat(b'?') {
            Marker::Unknown
        } else {
            Marker::None
        };
        self.skip_ws();
        let offset = self.pos;
        if !self.symbol_start() {
            return Err(self.error("expected a predicate symbol".into()));
        }
        let symbol = self.take_while_symbol().to_string();
        let args = self.arguments()?;
        Ok((
            marker,
            RawTerm {
                symbol,
                offset,
                leaf: RawLeaf::Symbol,
                args,
            },
        ))
    }
}

/// Type-checks an atom skeleton against the schema.
pub(crate) fn check_atom(raw: &RawTerm, schema: &Schema) -> Result<Atom> {
    let signature = schema
        .predicate(&raw.symbol)
        .ok_or_else(|| Error::UnknownSymbol {
            kind: "predicate",
            symbol: raw.symbol.clone(),
        })?;
    let raw_args = raw.args.as_deref().unwrap_or(&[]);
    if raw_args.len() != signature.len() {
        return Err(Error::Arity {
            symbol: raw.symbol.clone(),
            expected: signature.len(),
            found: raw_args.len(),
        });
    }
    let args = raw_args
        .iter()
        .zip(signature)
        .map(|(arg, ty)| check_term(arg, ty, schema))
        .collect::<Result<Vec<_>>>()?;
    Ok(Atom::new(raw.symbol.clone(), args))
}

fn check_term(raw: &RawTerm, expected: &str, schema: &Schema) -> Result<Term> {
    match (&raw.leaf, &raw.args) {
        (RawLeaf::Variable, _) => Ok(Term::Variable(raw.symbol.clone())),
        (RawLeaf::Place(_), _) => Err(Error::Syntax {
            offset: raw.offset,
            message: "placemarker outside a mode declaration".into(),
        }),
        (RawLeaf::Symbol, None) => Ok(Term::Constant(raw.symbol.clone())),
        (RawLeaf::Symbol, Some(raw_args)) => {
            let func = schema
                .function(&raw.symbol)
                .ok_or_else(|| Error::UnknownSymbol {
                    kind: "function",
                    symbol: raw.symbol.clone(),
                })?;
            if raw_args.len() != func.args.len() {
                return Err(Error::Arity {
                    symbol: raw.symbol.clone(),
                    expected: func.args.len(),
                    found: raw_args.len(),
                });
            }
            if func.returns != expected {
                return Err(Error::TypeMismatch {
                    symbol: raw.symbol.clone(),
                    expected: expected.to_string(),
                    found: func.returns.clone(),
                });
            }
            let args = raw_args
                .iter()
                .zip(&func.args)
                .map(|(arg, ty)| check_term(arg, ty, schema))
                .collect::<Result<Vec<_>>>()?;
            Ok(Term::Function(raw.symbol.clone(), args))
        }
    }
}

/// Parses one ground atom; a leading `!` sets the negation flag.
pub fn parse_atom(text: &str, schema: &Schema) -> Result<Atom> {
    match parse_marked(text, schema)? {
        (Marker::Unknown, _) => Err(Error::Syntax {
            offset: text.find('?').unwrap_or(0),
            message: "`?` marker is only valid on stream lines".into(),
        }),
        (_, atom) => Ok(atom),
    }
}

/// Parses one ground atom together with its `!`/`?` marker. The returned atom
/// is negated only for the `!` marker.
pub fn parse_marked(text: &str, schema: &Schema) -> Result<(Marker, Atom)> {
    let mut cursor = Cursor::new(text, Syntax::default());
    let (marker, raw) = cursor.raw_atom()?;
    cursor.expect_end()?;
    let mut atom = check_atom(&raw, schema)?;
    atom.negated = marker == Marker::Negated;
    Ok((marker, atom))
}

/// Parses an atom that may contain `_name` variables (used for clause text).
pub(crate) fn parse_open_atom(cursor: &mut Cursor<'_>, schema: &Schema) -> Result<Atom> {
    let (marker, raw) = cursor.raw_atom()?;
    if marker == Marker::Unknown {
        return Err(Error::Syntax {
            offset: raw.offset.saturating_sub(1),
            message: "`?` marker is not valid inside a clause".into(),
        });
    }
    let mut atom = check_atom(&raw, schema)?;
    atom.negated = marker == Marker::Negated;
    Ok(atom)
}
