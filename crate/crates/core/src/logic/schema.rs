use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

use super::parser::{Cursor, PlaceKind, RawLeaf, RawTerm, Syntax};
use super::term::{Atom, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSignature {
    pub args: Vec<String>,
    pub returns: String,
}

/// Argument types of every predicate and function symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    types: BTreeSet<String>,
    predicates: BTreeMap<String, Vec<String>>,
    functions: BTreeMap<String, FunctionSignature>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_type(&mut self, name: impl Into<String>) {
        self.types.insert(name.into());
    }

    pub fn add_predicate(&mut self, name: impl Into<String>, args: Vec<String>) -> Result<()> {
        let name = name.into();
        if self.predicates.contains_key(&name) {
            return Err(Error::Declaration(format!(
                "predicate `{name}` declared twice"
            )));
        }
        self.types.extend(args.iter().cloned());
        self.predicates.insert(name, args);
        Ok(())
    }

    pub fn add_function(
        &mut self,
        name: impl Into<String>,
        args: Vec<String>,
        returns: impl Into<String>,
    ) -> Result<()> {
        let name = name.into();
        if args.is_empty() {
            return Err(Error::Declaration(format!(
                "function `{name}` needs at least one argument"
            )));
        }
        if self.functions.contains_key(&name) {
            return Err(Error::Declaration(format!(
                "function `{name}` declared twice"
            )));
        }
        let returns = returns.into();
        self.types.extend(args.iter().cloned());
        self.types.insert(returns.clone());
        self.functions
            .insert(name, FunctionSignature { args, returns });
        Ok(())
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(String::as_str)
    }

    pub fn predicate(&self, name: &str) -> Option<&[String]> {
        self.predicates.get(name).map(Vec::as_slice)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSignature> {
        self.functions.get(name)
    }

    /// Calls `visit(leaf, type)` for every leaf (constant or variable) position
    /// of `atom`, descending through function arguments.
    pub fn visit_leaves<'a, 's>(
        &'s self,
        atom: &'a Atom,
        mut visit: impl FnMut(&'a Term, &'s str),
    ) -> Result<()> {
        let signature = self
            .predicate(&atom.predicate)
            .ok_or_else(|| Error::UnknownSymbol {
                kind: "predicate",
                symbol: atom.predicate.clone(),
            })?;
        if signature.len() != atom.arity() {
            return Err(Error::Arity {
                symbol: atom.predicate.clone(),
                expected: signature.len(),
                found: atom.arity(),
            });
        }
        for (arg, ty) in atom.args.iter().zip(signature) {
            self.visit_term(arg, ty, &mut visit)?;
        }
        Ok(())
    }

    fn visit_term<'a, 's>(
        &'s self,
        term: &'a Term,
        ty: &'s str,
        visit: &mut impl FnMut(&'a Term, &'s str),
    ) -> Result<()> {
        match term {
            Term::Constant(_) | Term::Variable(_) => visit(term, ty),
            Term::Function(name, args) => {
                let func = self.function(name).ok_or_else(|| Error::UnknownSymbol {
                    kind: "function",
                    symbol: name.clone(),
                })?;
                if func.args.len() != args.len() {
                    return Err(Error::Arity {
                        symbol: name.clone(),
                        expected: func.args.len(),
                        found: args.len(),
                    });
                }
                for (arg, ty) in args.iter().zip(&func.args) {
                    self.visit_term(arg, ty, visit)?;
                }
            }
        }
        Ok(())
    }
}

/// The set of types of all leaf positions of `atom`.
pub fn types_of<'s>(atom: &Atom, schema: &'s Schema) -> Result<BTreeSet<&'s str>> {
    let mut types = BTreeSet::new();
    schema.visit_leaves(atom, |_, ty| {
        types.insert(ty);
    })?;
    Ok(types)
}

/// Every leaf constant of `atom` with the type of its position, in traversal
/// order, duplicates preserved.
pub fn typed_constants<'a, 's>(
    atom: &'a Atom,
    schema: &'s Schema,
) -> Result<Vec<(&'a str, &'s str)>> {
    let mut out = Vec::new();
    schema.visit_leaves(atom, |leaf, ty| {
        if let Term::Constant(c) = leaf {
            out.push((c.as_str(), ty));
        }
    })?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placemarker {
    /// `+type`
    Input,
    /// `-type`
    Output,
    /// `#type`
    Constant,
}

impl Placemarker {
    pub fn is_variable(self) -> bool {
        !matches!(self, Placemarker::Constant)
    }
}

/// One argument slot of a mode template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Place(Placemarker, String),
    Function(String, Vec<ModeArg>),
}

impl ModeArg {
    fn matches(&self, term: &Term) -> bool {
        match (self, term) {
            (ModeArg::Place(..), _) => true,
            (ModeArg::Function(name, args), Term::Function(other, targs)) => {
                name == other
                    && args.len() == targs.len()
                    && args.iter().zip(targs).all(|(a, t)| a.matches(t))
            }
            _ => false,
        }
    }

    fn collect(&self, out: &mut Vec<Placemarker>) {
        match self {
            ModeArg::Place(p, _) => out.push(*p),
            ModeArg::Function(_, args) => args.iter().for_each(|a| a.collect(out)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeDeclaration {
    pub predicate: String,
    pub recall: u32,
    pub template: Vec<ModeArg>,
}

impl ModeDeclaration {
    pub fn matches(&self, atom: &Atom) -> bool {
        self.predicate == atom.predicate
            && self.template.len() == atom.arity()
            && self
                .template
                .iter()
                .zip(&atom.args)
                .all(|(m, t)| m.matches(t))
    }

    /// Placemarkers in leaf order.
    pub fn placemarkers(&self) -> Vec<Placemarker> {
        let mut out = Vec::new();
        self.template.iter().for_each(|a| a.collect(&mut out));
        out
    }
}

/// A schema together with the mode declarations that apply to it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Declarations {
    pub schema: Schema,
    pub modes: Vec<ModeDeclaration>,
}

impl Declarations {
    /// The first mode declaration whose template matches `atom`.
    pub fn mode_for(&self, atom: &Atom) -> Option<&ModeDeclaration> {
        self.modes.iter().find(|m| m.matches(atom))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_named(&text, path)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, Path::new("<declarations>"))
    }

    fn parse_named(text: &str, path: &Path) -> Result<Self> {
        let mut decls = Declarations::default();
        let mut modes = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut cursor = Cursor::new(
                trimmed,
                Syntax {
                    variables: false,
                    placemarkers: true,
                },
            );
            let statement = (|| -> Result<Option<(u32, RawTerm)>> {
                let (keyword, _) = cursor.symbol()?;
                let parsed = match keyword.as_str() {
                    "type" => {
                        loop {
                            let (name, _) = cursor.symbol()?;
                            decls.schema.add_type(name);
                            if !cursor.eat(b',') {
                                break;
                            }
                        }
                        None
                    }
                    "pred" => {
                        let (name, _) = cursor.symbol()?;
                        let args = type_list(&mut cursor)?;
                        decls.schema.add_predicate(name, args)?;
                        None
                    }
                    "func" => {
                        let (name, _) = cursor.symbol()?;
                        let args = type_list(&mut cursor)?;
                        cursor.expect(b':')?;
                        let (ret, _) = cursor.symbol()?;
                        decls.schema.add_function(name, args, ret)?;
                        None
                    }
                    "mode" => {
                        let recall = cursor.unsigned()?;
                        let (_, raw) = cursor.raw_atom()?;
                        Some((recall, raw))
                    }
                    other => return Err(Error::Declaration(format!("unknown keyword `{other}`"))),
                };
                cursor.expect(b'.')?;
                cursor.expect_end()?;
                Ok(parsed)
            })()
            .map_err(|e| e.at_line(path, n + 1))?;
            if let Some(mode) = statement {
                modes.push((n + 1, mode));
            }
        }
        for (line, (recall, raw)) in modes {
            let mode =
                check_mode(recall, &raw, &decls.schema).map_err(|e| e.at_line(path, line))?;
            decls.modes.push(mode);
        }
        Ok(decls)
    }
}

fn type_list(cursor: &mut Cursor<'_>) -> Result<Vec<String>> {
    let mut out = Vec::new();
    if !cursor.eat(b'(') {
        return Ok(out);
    }
    if cursor.eat(b')') {
        return Ok(out);
    }
    loop {
        out.push(cursor.symbol()?.0);
        if cursor.eat(b',') {
            continue;
        }
        cursor.expect(b')')?;
        return Ok(out);
    }
}

fn check_mode(recall: u32, raw: &RawTerm, schema: &Schema) -> Result<ModeDeclaration> {
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
    let template = raw_args
        .iter()
        .zip(signature)
        .map(|(arg, ty)| check_mode_arg(arg, ty, schema))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeDeclaration {
        predicate: raw.symbol.clone(),
        recall,
        template,
    })
}

fn check_mode_arg(raw: &RawTerm, expected: &str, schema: &Schema) -> Result<ModeArg> {
    match (&raw.leaf, &raw.args) {
        (RawLeaf::Place(kind), _) => {
            if raw.symbol != expected {
                return Err(Error::TypeMismatch {
                    symbol: raw.symbol.clone(),
                    expected: expected.to_string(),
                    found: raw.symbol.clone(),
                });
            }
            let p = match kind {
                PlaceKind::Input => Placemarker::Input,
                PlaceKind::Output => Placemarker::Output,
                PlaceKind::Constant => Placemarker::Constant,
            };
            Ok(ModeArg::Place(p, raw.symbol.clone()))
        }
        (RawLeaf::Symbol, Some(raw_args)) => {
            let func = schema
                .function(&raw.symbol)
                .ok_or_else(|| Error::UnknownSymbol {
                    kind: "function",
                    symbol: raw.symbol.clone(),
                })?;
            if func.args.len() != raw_args.len() {
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
                .map(|(a, ty)| check_mode_arg(a, ty, schema))
                .collect::<Result<Vec<_>>>()?;
            Ok(ModeArg::Function(raw.symbol.clone(), args))
        }
        _ => Err(Error::Syntax {
            offset: raw.offset,
            message: "mode arguments must be placemarkers or function templates".into(),
        }),
    }
}
