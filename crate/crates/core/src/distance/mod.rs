//! Structural distance between ground expressions and between sets of ground
//! atoms matched one-to-one.

mod hungarian;

pub use hungarian::{hungarian, Assignment, CostMatrix};

use crate::logic::{Atom, Term};
use crate::partition::Vertex;

/// Distance between two ground terms, bounded by 1.
///
/// Identical terms are at distance 0; terms with different symbols or arities
/// at distance 1; otherwise the distance is `1/(2k)` times the sum of the
/// argument distances.
pub fn term_distance(a: &Term, b: &Term) -> f64 {
    match (a, b) {
        (Term::Function(f, fa), Term::Function(g, ga)) if f == g && fa.len() == ga.len() => {
            args_distance(fa, ga)
        }
        _ if a == b => 0.0,
        _ => 1.0,
    }
}

/// Distance between two ground atoms. An atom and its negation are treated as
/// different predicates.
pub fn atom_distance(a: &Atom, b: &Atom) -> f64 {
    if a.negated != b.negated || a.predicate != b.predicate || a.arity() != b.arity() {
        return 1.0;
    }
    args_distance(&a.args, &b.args)
}

fn args_distance(a: &[Term], b: &[Term]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sum: f64 = a.iter().zip(b).map(|(s, t)| term_distance(s, t)).sum();
    sum / (2 * a.len()) as f64
}

/// Optimal-matching distance between atom multisets, in `[0, 1]`.
///
/// With `M` the larger and `K` the smaller size, the cost is
/// `((M - K) + matched) / M`; every atom left unmatched is charged 1. Two
/// empty sets are at distance 0.
pub fn set_distance(a: &[Atom], b: &[Atom]) -> f64 {
    let m = a.len().max(b.len());
    if m == 0 {
        return 0.0;
    }
    let k = a.len().min(b.len());
    let costs = CostMatrix::padded(a.len(), b.len(), |i, j| atom_distance(&a[i], &b[j]));
    let matched = hungarian(&costs).total_cost;
    ((m - k) as f64 + matched) / m as f64
}

/// Edge weight between two vertices: one minus the distance of their
/// evidence sets. The query atoms do not take part.
pub fn similarity(a: &Vertex, b: &Vertex) -> f64 {
    1.0 - set_distance(&a.evidence, &b.evidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_atom, Declarations};
    use crate::partition::Label;

    fn decls() -> Declarations {
        Declarations::parse(
            "pred HappensAt(event, time).\n\
             pred P(id).\n\
             pred Q(id).\n\
             pred Z.\n\
             func walking(id): event.\n",
        )
        .unwrap()
    }

    fn atom(s: &str) -> Atom {
        parse_atom(s, &decls().schema).unwrap()
    }

    #[test]
    fn identical_atoms_are_at_zero() {
        let a = atom("HappensAt(walking(ID1),100)");
        assert_eq!(atom_distance(&a, &a), 0.0);
        assert_eq!(atom_distance(&atom("Z"), &atom("Z")), 0.0);
    }

    #[test]
    fn different_predicates_are_at_one() {
        assert_eq!(atom_distance(&atom("P(a)"), &atom("Q(a)")), 1.0);
        assert_eq!(atom_distance(&atom("P(a)"), &atom("!P(a)")), 1.0);
    }

    #[test]
    fn nested_recursion_worked_value() {
        let d = atom_distance(
            &atom("HappensAt(walking(ID1),100)"),
            &atom("HappensAt(walking(ID2),100)"),
        );
        // 1/(2*2) * (1/(2*1) * 1 + 0)
        assert_eq!(d, 0.125);
    }

    #[test]
    fn constant_against_function_is_one() {
        let f = Term::function("walking", vec![Term::constant("a")]);
        assert_eq!(term_distance(&f, &Term::constant("walking")), 1.0);
    }

    #[test]
    fn set_distance_worked_values() {
        let a = atom("P(a)");
        let b = atom("Q(a)");
        assert_eq!(set_distance(&[a.clone()], &[a.clone(), b.clone()]), 0.5);
        assert_eq!(set_distance(&[a.clone(), b.clone()], &[a.clone()]), 0.5);
        assert_eq!(set_distance(&[a.clone()], &[b.clone()]), 1.0);
        assert_eq!(
            set_distance(&[a.clone(), b.clone()], &[a.clone(), b.clone()]),
            0.0
        );
        assert_eq!(set_distance(&[], &[]), 0.0);
        assert_eq!(set_distance(&[], &[a]), 1.0);
    }

    #[test]
    fn similarity_uses_evidence_only() {
        let a = atom("P(a)");
        let b = atom("Q(a)");
        let q1 = atom("P(x)");
        let q2 = atom("Q(y)");
        let v1 = Vertex::new(q1, Label::Positive, [a.clone()]);
        let v2 = Vertex::new(q2, Label::Unknown, [a.clone(), b.clone()]);
        let v3 = Vertex::new(atom("P(z)"), Label::Negative, [b]);
        assert_eq!(similarity(&v1, &v2), 0.5);
        assert_eq!(similarity(&v2, &v1), 0.5);
        assert_eq!(similarity(&v1, &v3), 0.0);
        assert_eq!(similarity(&v1, &v1), 1.0);
    }
}
