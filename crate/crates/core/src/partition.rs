//! Splitting a micro-batch into examples: one vertex per ground query atom,
//! carrying the true evidence atoms whose typed constants it shares.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logic::{typed_constants, types_of, Atom, Declarations};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn value(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
    Unknown,
}

impl Label {
    pub fn polarity(self) -> Option<Polarity> {
        match self {
            Label::Positive => Some(Polarity::Positive),
            Label::Negative => Some(Polarity::Negative),
            Label::Unknown => None,
        }
    }

    pub fn is_known(self) -> bool {
        self != Label::Unknown
    }
}

impl From<Polarity> for Label {
    fn from(p: Polarity) -> Self {
        match p {
            Polarity::Positive => Label::Positive,
            Polarity::Negative => Label::Negative,
        }
    }
}

/// One unit of streaming input.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MicroBatch {
    pub index: usize,
    /// Query atoms (never negated) with their labels, in input order.
    pub queries: Vec<(Atom, Label)>,
    /// Evidence atoms with their truth value, in input order.
    pub evidence: Vec<(Atom, bool)>,
}

impl MicroBatch {
    pub fn new(index: usize) -> Self {
        MicroBatch {
            index,
            ..Default::default()
        }
    }
}

/// An example: a query atom and its relevant true evidence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub query: Atom,
    pub label: Label,
    /// Deduplicated and sorted.
    pub evidence: Vec<Atom>,
}

impl Vertex {
    pub fn new(query: Atom, label: Label, evidence: impl IntoIterator<Item = Atom>) -> Self {
        let evidence: BTreeSet<Atom> = evidence.into_iter().collect();
        Vertex {
            query,
            label,
            evidence: evidence.into_iter().collect(),
        }
    }
}

struct PreparedEvidence<'a> {
    atom: &'a Atom,
    constants: Vec<(&'a str, &'a str)>,
}

/// Partitions `batch` into vertices, one per query atom in input order.
pub fn partition(batch: &MicroBatch, decls: &Declarations) -> Result<Vec<Vertex>> {
    partition_counted(batch, decls).map(|(v, _)| v)
}

/// As [`partition`], also returning how many evidence atoms were read.
///
/// Evidence `e` joins the vertex of `q` iff `e` is true, its mode recall is
/// positive, and every constant of `e` whose position type also occurs in
/// `q` appears in `q` at a position of that same type.
pub fn partition_counted(batch: &MicroBatch, decls: &Declarations) -> Result<(Vec<Vertex>, usize)> {
    let schema = &decls.schema;
    let mut scanned = 0;
    let mut prepared = Vec::with_capacity(batch.evidence.len());
    for (atom, truth) in &batch.evidence {
        scanned += 1;
        if !*truth || atom.negated {
            continue;
        }
        let mode = decls
            .mode_for(atom)
            .ok_or_else(|| Error::MissingMode(atom.to_string()))?;
        if mode.recall == 0 {
            continue;
        }
        prepared.push(PreparedEvidence {
            atom,
            constants: typed_constants(atom, schema)?,
        });
    }

    let vertices = batch
        .queries
        .par_iter()
        .map(|(query, label)| {
            let query_types = types_of(query, schema)?;
            let query_constants: HashSet<(&str, &str)> =
                typed_constants(query, schema)?.into_iter().collect();
            let evidence = prepared
                .iter()
                .filter(|e| {
                    e.constants
                        .iter()
                        .filter(|(_, ty)| query_types.contains(ty))
                        .all(|c| query_constants.contains(c))
                })
                .map(|e| e.atom.clone());
            Ok(Vertex::new(query.clone(), *label, evidence))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((vertices, scanned))
}

/// Order-stable split into (labelled, unlabelled).
pub fn split_by_label(vertices: Vec<Vertex>) -> (Vec<Vertex>, Vec<Vertex>) {
    vertices.into_iter().partition(|v| v.label.is_known())
}
