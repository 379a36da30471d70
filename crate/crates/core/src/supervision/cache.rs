use std::io::{self, BufRead, Write};

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::logic::{Clause, Declarations, Schema};
use crate::partition::{Label, Vertex};

use super::hoeffding::HoeffdingConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub clause: Clause,
    /// First ground vertex seen for this clause.
    pub representative: Vertex,
    pub count: u64,
    opposite: String,
}

impl CacheEntry {
    fn new(clause: Clause, representative: Vertex, count: u64) -> Self {
        let opposite = clause.opposite().as_str().to_string();
        CacheEntry {
            clause,
            representative,
            count,
            opposite,
        }
    }
}

/// Outcome of testing one cached entry against its opposite clause.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    /// No opposite clause is cached.
    Uncontested,
    /// The opposite is cached but does not dominate by more than epsilon.
    Kept { margin: f64, epsilon: f64 },
    /// The opposite dominates by more than epsilon.
    Filtered { margin: f64, epsilon: f64 },
}

impl Verdict {
    pub fn emitted(self) -> bool {
        !matches!(self, Verdict::Filtered { .. })
    }
}

/// Lifted labelled examples seen so far, one entry per clause class, in
/// first-seen order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabelCache {
    entries: IndexMap<String, CacheEntry>,
}

impl LabelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values()
    }

    pub fn get(&self, clause: &Clause) -> Option<&CacheEntry> {
        self.entries.get(clause.as_str())
    }

    /// Counts one labelled vertex, inserting its clause if unseen.
    pub fn observe(&mut self, vertex: &Vertex, decls: &Declarations) -> Result<()> {
        let clause = Clause::lift(vertex, decls)?;
        self.add(clause, vertex, 1);
        Ok(())
    }

    fn add(&mut self, clause: Clause, vertex: &Vertex, count: u64) {
        match self.entries.get_mut(clause.as_str()) {
            Some(entry) => entry.count += count,
            None => {
                let key = clause.as_str().to_string();
                self.entries
                    .insert(key, CacheEntry::new(clause, vertex.clone(), count));
            }
        }
    }

    /// With `N = n_c + n_c'` and `p = n / N`, an entry is dropped when its
    /// opposite leads by more than `epsilon(N)`; otherwise it is kept.
    pub fn verdict(&self, entry: &CacheEntry, hoeffding: &HoeffdingConfig) -> Verdict {
        let Some(opposite) = self.entries.get(&entry.opposite) else {
            return Verdict::Uncontested;
        };
        let total = entry.count + opposite.count;
        let p_c = entry.count as f64 / total as f64;
        let p_o = opposite.count as f64 / total as f64;
        let margin = p_c - p_o;
        let epsilon = hoeffding.epsilon(total);
        if -margin > epsilon {
            Verdict::Filtered { margin, epsilon }
        } else {
            Verdict::Kept { margin, epsilon }
        }
    }

    /// Representatives of every entry that survives filtering, in cache order.
    pub fn filtered(&self, hoeffding: &HoeffdingConfig) -> Vec<&CacheEntry> {
        self.entries()
            .filter(|e| self.verdict(e, hoeffding).emitted())
            .collect()
    }

    /// Writes `clause<TAB>count`, one entry per line.
    pub fn write_snapshot(&self, mut out: impl Write) -> io::Result<()> {
        for entry in self.entries() {
            writeln!(out, "{}\t{}", entry.clause, entry.count)?;
        }
        Ok(())
    }

    /// Reads a snapshot written by [`write_snapshot`](Self::write_snapshot).
    ///
    /// Snapshot lines carry no ground atoms, so each representative is
    /// rebuilt by grounding the clause with fresh constants private to the
    /// entry.
    pub fn read_snapshot(input: impl BufRead, schema: &Schema) -> Result<Self> {
        let mut cache = LabelCache::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<cache snapshot>", e))?;
            let at = |e: Error| e.at_line("<cache snapshot>", n + 1);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (text, count) = line.rsplit_once('\t').ok_or_else(|| {
                at(Error::Syntax {
                    offset: 0,
                    message: "expected `clause<TAB>count`".into(),
                })
            })?;
            let count: u64 = count
                .trim()
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| {
                    at(Error::Syntax {
                        offset: text.len() + 1,
                        message: format!("invalid count `{}`", count.trim()),
                    })
                })?;
            let clause = Clause::parse(text, schema).map_err(at)?;
            let entry = cache.len();
            let (head, body) = clause.ground(|v| format!("_e{entry}v{v}"));
            let label = if head.negated {
                Label::Negative
            } else {
                Label::Positive
            };
            let representative = Vertex::new(head.positive(), label, body);
            cache.add(clause, &representative, count);
        }
        Ok(cache)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_atom;

    fn decls() -> Declarations {
        Declarations::parse(
            "pred Q(id, time).\n\
             pred E(id, time).\n\
             pred F(id, time).\n\
             mode 1 Q(+id, +time).\n\
             mode 1 E(+id, +time).\n\
             mode 1 F(+id, +time).\n",
        )
        .unwrap()
    }

    fn vertex(d: &Declarations, id: &str, t: u32, label: Label, ev: &[&str]) -> Vertex {
        let atom = |s: String| parse_atom(&s, &d.schema).unwrap();
        Vertex::new(
            atom(format!("Q({id},{t})")),
            label,
            ev.iter().map(|p| atom(format!("{p}({id},{t})"))),
        )
    }

    fn observe_n(cache: &mut LabelCache, d: &Declarations, label: Label, n: u32) {
        for t in 0..n {
            cache
                .observe(&vertex(d, &format!("a{t}"), t, label, &["E"]), d)
                .unwrap();
        }
    }

    #[test]
    fn counts_alpha_equivalent_examples_together() {
        let d = decls();
        let mut cache = LabelCache::new();
        observe_n(&mut cache, &d, Label::Positive, 3);
        cache
            .observe(&vertex(&d, "b", 9, Label::Positive, &["F"]), &d)
            .unwrap();
        assert_eq!(cache.len(), 2);
        let counts: Vec<u64> = cache.entries().map(|e| e.count).collect();
        assert_eq!(counts, vec![3, 1]);
        // the first occurrence stays the representative
        let first = cache.entries().next().unwrap();
        assert_eq!(first.representative.query.to_string(), "Q(a0,0)");
    }

    #[test]
    fn dominant_side_filters_the_minority() {
        let d = decls();
        let h = HoeffdingConfig::new(0.05).unwrap();
        let mut cache = LabelCache::new();
        observe_n(&mut cache, &d, Label::Positive, 9);
        observe_n(&mut cache, &d, Label::Negative, 1);
        let kept: Vec<_> = cache.filtered(&h);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].count, 9);
        let minority = cache.entries().nth(1).unwrap();
        match cache.verdict(minority, &h) {
            Verdict::Filtered { margin, epsilon } => {
                assert!((margin + 0.8).abs() < 1e-12);
                assert!((epsilon - 0.42947).abs() < 1e-4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn balanced_contradiction_keeps_both() {
        let d = decls();
        let h = HoeffdingConfig::new(0.05).unwrap();
        let mut cache = LabelCache::new();
        observe_n(&mut cache, &d, Label::Positive, 5);
        observe_n(&mut cache, &d, Label::Negative, 5);
        assert_eq!(cache.filtered(&h).len(), 2);
    }

    #[test]
    fn unopposed_entries_are_always_kept() {
        let d = decls();
        let h = HoeffdingConfig::new(0.5).unwrap();
        let mut cache = LabelCache::new();
        observe_n(&mut cache, &d, Label::Negative, 1);
        let e = cache.entries().next().unwrap();
        assert_eq!(cache.verdict(e, &h), Verdict::Uncontested);
        assert_eq!(cache.filtered(&h).len(), 1);
    }

    #[test]
    fn snapshot_round_trip() {
        let d = decls();
        let mut cache = LabelCache::new();
        observe_n(&mut cache, &d, Label::Positive, 4);
        cache
            .observe(&vertex(&d, "b", 9, Label::Negative, &["E", "F"]), &d)
            .unwrap();
        let mut out = Vec::new();
        cache.write_snapshot(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "Q(_0,_1) :- E(_0,_1)\t4\n!Q(_0,_1) :- E(_0,_1), F(_0,_1)\t1\n"
        );
        let back = LabelCache::read_snapshot(text.as_bytes(), &d.schema).unwrap();
        let counts: Vec<_> = back
            .entries()
            .map(|e| (e.clause.as_str().to_string(), e.count))
            .collect();
        let orig: Vec<_> = cache
            .entries()
            .map(|e| (e.clause.as_str().to_string(), e.count))
            .collect();
        assert_eq!(counts, orig);
        let rep = &back.entries().nth(1).unwrap().representative;
        assert_eq!(rep.label, Label::Negative);
        assert_eq!(rep.evidence.len(), 2);
        // re-lifting the rebuilt representative gives the same clause
        assert_eq!(
            Clause::lift(rep, &d).unwrap().as_str(),
            "!Q(_0,_1) :- E(_0,_1), F(_0,_1)"
        );
    }

    #[test]
    fn snapshot_errors_carry_line_numbers() {
        let d = decls();
        let err = LabelCache::read_snapshot("Q(_0,_1)\t1\nQ(_0,_1)\tzero\n".as_bytes(), &d.schema)
            .unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
        assert!(LabelCache::read_snapshot("Q(_0,_1)\n".as_bytes(), &d.schema).is_err());
        assert!(LabelCache::read_snapshot("Q(_0,_1)\t0\n".as_bytes(), &d.schema).is_err());
    }
}
