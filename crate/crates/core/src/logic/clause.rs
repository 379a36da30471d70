use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::partition::{Polarity, Vertex};

use super::parser::{parse_open_atom, Cursor, Syntax};
use super::schema::{Declarations, ModeArg, Schema};
use super::term::{Atom, Term};

/// Upper bound on the number of complete body orderings explored when
/// breaking ties during canonicalisation.
const TIE_BUDGET: usize = 4096;

/// A lifted example: the labelled query atom as head, its evidence as body,
/// in canonical form.
///
/// Variables are named `_0`, `_1`, ... by first occurrence, head first, then
/// body atoms in canonical order. Two clauses are alpha-equivalent exactly
/// when their renderings are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    head: Atom,
    body: Vec<Atom>,
    rendering: String,
}

impl Clause {
    /// Canonicalises a clause whose variables may carry arbitrary names.
    pub fn new(head: Atom, body: Vec<Atom>) -> Self {
        let mut names = HashMap::new();
        for_each_variable(&head, &mut |v| {
            let next = names.len();
            names.entry(v.to_string()).or_insert(next);
        });

        let body_refs: Vec<&Atom> = body.iter().collect();
        let mut search = OrderSearch {
            budget: TIE_BUDGET,
            best: None,
        };
        search.run(&body_refs, &mut Vec::new(), &names);
        let (order, names) = search.best.expect("search always yields an ordering");

        let head = rename(&head, &names);
        let body: Vec<Atom> = order
            .into_iter()
            .map(|i| rename(&body[i], &names))
            .collect();
        let rendering = render(&head, &body);
        Clause {
            head,
            body,
            rendering,
        }
    }

    /// Lifts a labelled vertex: constants at variable-marked mode positions
    /// become variables, equal constants sharing one variable.
    pub fn lift(vertex: &Vertex, decls: &Declarations) -> Result<Self> {
        let polarity = vertex.label.polarity().ok_or_else(|| {
            Error::Config(format!("cannot lift unlabelled vertex `{}`", vertex.query))
        })?;
        let head_template = decls.mode_for(&vertex.query).map(|m| m.template.as_slice());
        let mut head = match head_template {
            Some(template) => variabilize_with(&vertex.query, template),
            None => Atom {
                args: vertex.query.args.iter().map(variabilize_all).collect(),
                ..vertex.query.clone()
            },
        };
        head.negated = polarity == Polarity::Negative;
        let body = vertex
            .evidence
            .iter()
            .map(|e| {
                let mode = decls
                    .mode_for(e)
                    .ok_or_else(|| Error::MissingMode(e.to_string()))?;
                Ok(variabilize_with(e, &mode.template))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Clause::new(head, body))
    }

    /// Parses a rendering such as `!P(_0) :- Q(_0,a), R(_0)`.
    pub fn parse(text: &str, schema: &Schema) -> Result<Self> {
        let mut cursor = Cursor::new(
            text,
            Syntax {
                variables: true,
                placemarkers: false,
            },
        );
        let head = parse_open_atom(&mut cursor, schema)?;
        let mut body = Vec::new();
        if cursor.eat_str(":-") {
            loop {
                let atom = parse_open_atom(&mut cursor, schema)?;
                if atom.negated {
                    return Err(Error::Syntax {
                        offset: cursor.pos(),
                        message: "body atoms must be positive".into(),
                    });
                }
                body.push(atom);
                if !cursor.eat(b',') {
                    break;
                }
            }
        }
        cursor.expect_end()?;
        Ok(Clause::new(head, body))
    }

    pub fn head(&self) -> &Atom {
        &self.head
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn as_str(&self) -> &str {
        &self.rendering
    }

    /// Same body, head negation flipped.
    pub fn opposite(&self) -> Clause {
        Clause::new(self.head.clone().negate(), self.body.clone())
    }

    pub fn alpha_equivalent(&self, other: &Clause) -> bool {
        self.rendering == other.rendering
    }

    /// Number of distinct variables.
    pub fn variable_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        for atom in std::iter::once(&self.head).chain(&self.body) {
            for_each_variable(atom, &mut |v| {
                seen.insert(v.to_string());
            });
        }
        seen.len()
    }

    /// Replaces every variable by a constant produced by `name(index)`.
    pub fn ground(&self, mut name: impl FnMut(usize) -> String) -> (Atom, Vec<Atom>) {
        let mut ground = |atom: &Atom| Atom {
            args: atom
                .args
                .iter()
                .map(|t| ground_term(t, &mut name))
                .collect(),
            ..atom.clone()
        };
        let head = ground(&self.head);
        let body = self.body.iter().map(ground).collect();
        (head, body)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendering)
    }
}

fn ground_term(term: &Term, name: &mut impl FnMut(usize) -> String) -> Term {
    match term {
        Term::Variable(v) => {
            let index = v.trim_start_matches('_').parse().unwrap_or(0);
            Term::Constant(name(index))
        }
        Term::Constant(_) => term.clone(),
        Term::Function(f, args) => Term::Function(
            f.clone(),
            args.iter().map(|a| ground_term(a, name)).collect(),
        ),
    }
}

fn render(head: &Atom, body: &[Atom]) -> String {
    let mut out = head.to_string();
    for (i, atom) in body.iter().enumerate() {
        out.push_str(if i == 0 { " :- " } else { ", " });
        out.push_str(&atom.to_string());
    }
    out
}

fn variabilize_all(term: &Term) -> Term {
    match term {
        Term::Constant(c) => Term::Variable(c.clone()),
        Term::Variable(_) => term.clone(),
        Term::Function(f, args) => {
            Term::Function(f.clone(), args.iter().map(variabilize_all).collect())
        }
    }
}

fn variabilize_arg(term: &Term, template: &ModeArg) -> Term {
    match (template, term) {
        (ModeArg::Place(p, _), _) if p.is_variable() => variabilize_all(term),
        (ModeArg::Place(..), _) => term.clone(),
        (ModeArg::Function(_, targs), Term::Function(f, args)) => Term::Function(
            f.clone(),
            args.iter()
                .zip(targs)
                .map(|(a, t)| variabilize_arg(a, t))
                .collect(),
        ),
        // template matching is checked by the caller
        _ => term.clone(),
    }
}

fn variabilize_with(atom: &Atom, template: &[ModeArg]) -> Atom {
    Atom {
        args: atom
            .args
            .iter()
            .zip(template)
            .map(|(a, t)| variabilize_arg(a, t))
            .collect(),
        ..atom.clone()
    }
}

fn for_each_variable<'a>(atom: &'a Atom, f: &mut impl FnMut(&'a str)) {
    fn walk<'a>(t: &'a Term, f: &mut impl FnMut(&'a str)) {
        match t {
            Term::Variable(v) => f(v),
            Term::Constant(_) => {}
            Term::Function(_, args) => args.iter().for_each(|a| walk(a, f)),
        }
    }
    atom.args.iter().for_each(|a| walk(a, f));
}

fn rename(atom: &Atom, names: &HashMap<String, usize>) -> Atom {
    fn go(t: &Term, names: &HashMap<String, usize>) -> Term {
        match t {
            Term::Variable(v) => Term::Variable(format!("_{}", names[v.as_str()])),
            Term::Constant(_) => t.clone(),
            Term::Function(f, args) => {
                Term::Function(f.clone(), args.iter().map(|a| go(a, names)).collect())
            }
        }
    }
    Atom {
        args: atom.args.iter().map(|a| go(a, names)).collect(),
        ..atom.clone()
    }
}

/// Renders `atom` with already-numbered variables as `_n` and still-free
/// variables as `?k`, `k` counting first occurrences within the atom.
fn partial_render(atom: &Atom, names: &HashMap<String, usize>) -> String {
    fn go(t: &Term, names: &HashMap<String, usize>, local: &mut Vec<String>, out: &mut String) {
        match t {
            Term::Constant(c) => out.push_str(c),
            Term::Variable(v) => match names.get(v.as_str()) {
                Some(n) => {
                    out.push('_');
                    out.push_str(&n.to_string());
                }
                None => {
                    let k = match local.iter().position(|l| l == v) {
                        Some(k) => k,
                        None => {
                            local.push(v.clone());
                            local.len() - 1
                        }
                    };
                    out.push('?');
                    out.push_str(&k.to_string());
                }
            },
            Term::Function(f, args) => {
                out.push_str(f);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    go(a, names, local, out);
                }
                out.push(')');
            }
        }
    }
    let mut out = atom.predicate.clone();
    let mut local = Vec::new();
    if !atom.args.is_empty() {
        out.push('(');
        for (i, a) in atom.args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            go(a, names, &mut local, &mut out);
        }
        out.push(')');
    }
    out
}

type Candidate = (Vec<usize>, HashMap<String, usize>);

/// Chooses the body order by repeatedly taking the atom with the smallest
/// partial rendering; ties are explored and the lexicographically smallest
/// full rendering wins.
struct OrderSearch {
    budget: usize,
    best: Option<Candidate>,
}

impl OrderSearch {
    fn run(&mut self, body: &[&Atom], chosen: &mut Vec<usize>, names: &HashMap<String, usize>) {
        if chosen.len() == body.len() {
            self.offer(body, chosen.clone(), names.clone());
            self.budget = self.budget.saturating_sub(1);
            return;
        }
        let mut min: Option<String> = None;
        let mut ties = Vec::new();
        for (i, atom) in body.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let r = partial_render(atom, names);
            match &min {
                Some(m) if r > *m => {}
                Some(m) if r == *m => ties.push(i),
                _ => {
                    min = Some(r);
                    ties.clear();
                    ties.push(i);
                }
            }
        }
        for (n, &i) in ties.iter().enumerate() {
            if n > 0 && self.budget == 0 {
                break;
            }
            let mut names = names.clone();
            for_each_variable(body[i], &mut |v| {
                let next = names.len();
                names.entry(v.to_string()).or_insert(next);
            });
            chosen.push(i);
            self.run(body, chosen, &names);
            chosen.pop();
        }
    }

    fn offer(&mut self, body: &[&Atom], order: Vec<usize>, names: HashMap<String, usize>) {
        let better = match &self.best {
            None => true,
            Some((best_order, best_names)) => {
                let a = order.iter().map(|&i| rename(body[i], &names).to_string());
                let b = best_order
                    .iter()
                    .map(|&i| rename(body[i], best_names).to_string());
                a.lt(b)
            }
        };
        if better {
            self.best = Some((order, names));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_atom;
    use crate::partition::Label;

    fn decls() -> Declarations {
        Declarations::parse(
            "pred HappensAt(event, time).\n\
             pred HoldsAt(fluent, time).\n\
             pred Close(id, id, dist, time).\n\
             func walking(id): event.\n\
             func exit(id): event.\n\
             func move(id, id): fluent.\n\
             mode 1 HoldsAt(move(+id,+id), +time).\n\
             mode 2 HappensAt(walking(+id), +time).\n\
             mode 2 HappensAt(exit(+id), +time).\n\
             mode 2 Close(+id, +id, #dist, +time).\n",
        )
        .unwrap()
    }

    fn vertex(d: &Declarations, query: &str, label: Label, evidence: &[&str]) -> Vertex {
        Vertex::new(
            parse_atom(query, &d.schema).unwrap(),
            label,
            evidence
                .iter()
                .map(|e| parse_atom(e, &d.schema).unwrap())
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn lifts_the_exit_walking_example() {
        let d = decls();
        let v = vertex(
            &d,
            "HoldsAt(move(ID1,ID2),5)",
            Label::Negative,
            &["HappensAt(exit(ID1),5)", "HappensAt(walking(ID2),5)"],
        );
        let c = Clause::lift(&v, &d).unwrap();
        assert_eq!(
            c.as_str(),
            "!HoldsAt(move(_0,_1),_2) :- HappensAt(exit(_0),_2), HappensAt(walking(_1),_2)"
        );
        assert_eq!(
            c.opposite().as_str(),
            "HoldsAt(move(_0,_1),_2) :- HappensAt(exit(_0),_2), HappensAt(walking(_1),_2)"
        );
    }

    #[test]
    fn constant_placemarkers_stay_ground() {
        let d = decls();
        let v = vertex(
            &d,
            "HoldsAt(move(A,B),7)",
            Label::Positive,
            &["Close(A,B,34,7)"],
        );
        let c = Clause::lift(&v, &d).unwrap();
        assert_eq!(c.as_str(), "HoldsAt(move(_0,_1),_2) :- Close(_0,_1,34,_2)");
    }

    #[test]
    fn unit_clause_and_its_opposite() {
        let d = decls();
        let v = vertex(&d, "HoldsAt(move(A,B),7)", Label::Positive, &[]);
        let c = Clause::lift(&v, &d).unwrap();
        assert_eq!(c.as_str(), "HoldsAt(move(_0,_1),_2)");
        assert_eq!(c.opposite().as_str(), "!HoldsAt(move(_0,_1),_2)");
        assert_eq!(c.opposite().opposite(), c);
        assert!(!c.alpha_equivalent(&c.opposite()));
    }

    #[test]
    fn renaming_constants_gives_the_same_clause() {
        let d = decls();
        let a = vertex(
            &d,
            "HoldsAt(move(ID1,ID2),5)",
            Label::Negative,
            &["HappensAt(walking(ID2),5)", "HappensAt(exit(ID1),5)"],
        );
        let b = vertex(
            &d,
            "HoldsAt(move(P,Q),900)",
            Label::Negative,
            &["HappensAt(exit(P),900)", "HappensAt(walking(Q),900)"],
        );
        let ca = Clause::lift(&a, &d).unwrap();
        let cb = Clause::lift(&b, &d).unwrap();
        assert!(ca.alpha_equivalent(&cb));
        assert!(ca.alpha_equivalent(&ca));
    }

    #[test]
    fn body_only_variables_are_canonical_regardless_of_order() {
        let d = decls();
        // C and D do not occur in the head; any input order must agree.
        let ev = [
            "HappensAt(walking(C),5)",
            "HappensAt(walking(D),5)",
            "Close(C,A,1,5)",
            "Close(B,D,2,5)",
        ];
        let a = vertex(&d, "HoldsAt(move(A,B),5)", Label::Positive, &ev);
        let mut reversed = ev;
        reversed.reverse();
        let b = vertex(&d, "HoldsAt(move(A,B),5)", Label::Positive, &reversed);
        let c = vertex(
            &d,
            "HoldsAt(move(A,B),5)",
            Label::Positive,
            &[
                "HappensAt(walking(Y),5)",
                "HappensAt(walking(X),5)",
                "Close(Y,A,1,5)",
                "Close(B,X,2,5)",
            ],
        );
        let ca = Clause::lift(&a, &d).unwrap();
        assert_eq!(ca, Clause::lift(&b, &d).unwrap());
        assert_eq!(ca, Clause::lift(&c, &d).unwrap());
    }

    #[test]
    fn missing_mode_is_an_error() {
        let d = Declarations::parse("pred Q(id).\npred E(id).\nmode 1 Q(+id).\n").unwrap();
        let v = vertex(&d, "Q(a)", Label::Positive, &["E(a)"]);
        assert!(matches!(Clause::lift(&v, &d), Err(Error::MissingMode(_))));
    }

    #[test]
    fn unlabelled_vertices_cannot_be_lifted() {
        let d = decls();
        let v = vertex(&d, "HoldsAt(move(A,B),7)", Label::Unknown, &[]);
        assert!(Clause::lift(&v, &d).is_err());
    }

    #[test]
    fn parse_round_trips_rendering() {
        let d = decls();
        let v = vertex(
            &d,
            "HoldsAt(move(ID1,ID2),5)",
            Label::Negative,
            &[
                "HappensAt(exit(ID1),5)",
                "HappensAt(walking(ID2),5)",
                "Close(ID1,ID2,34,5)",
            ],
        );
        let c = Clause::lift(&v, &d).unwrap();
        let parsed = Clause::parse(c.as_str(), &d.schema).unwrap();
        assert_eq!(parsed, c);
        assert!(Clause::parse("HoldsAt(move(_0,_1),_2) :- !Close(_0,_1,3,_2)", &d.schema).is_err());
    }

    #[test]
    fn grounding_replaces_variables() {
        let d = decls();
        let c = Clause::parse(
            "HoldsAt(move(_0,_1),_2) :- HappensAt(walking(_1),_2)",
            &d.schema,
        )
        .unwrap();
        assert_eq!(c.variable_count(), 3);
        let (head, body) = c.ground(|i| format!("k{i}"));
        assert_eq!(head.to_string(), "HoldsAt(move(k0,k1),k2)");
        assert_eq!(body[0].to_string(), "HappensAt(walking(k1),k2)");
    }
}
