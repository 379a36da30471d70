//! Reading and writing streams in the line-oriented atom format.
//!
//! One atom per line; `#` starts a comment line; blank lines are ignored; a
//! line holding `---` ends a micro-batch. Query atoms are bare (positive),
//! `!`-prefixed (negative) or `?`-prefixed (unlabelled). Other atoms are
//! evidence, `!` marking a false evidence atom. A directory is read as one
//! or more batches per file, files in name order.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::logic::{parse_marked, Atom, Marker, Schema};
use crate::partition::{Label, MicroBatch};
use crate::supervision::{CompletedBatch, StreamOutput};

pub const BATCH_DELIMITER: &str = "---";

impl CompletedBatch {
    pub fn to_micro_batch(&self) -> MicroBatch {
        MicroBatch {
            index: self.index,
            queries: self
                .queries
                .iter()
                .map(|q| (q.atom.clone(), q.polarity.into()))
                .collect(),
            evidence: self.evidence.clone(),
        }
    }
}

/// Parses stream text. Batches are numbered from `first_index`; delimiters
/// with no atoms in between do not produce empty batches.
pub fn parse_stream(
    text: &str,
    source: &Path,
    schema: &Schema,
    query_predicate: &str,
    first_index: usize,
) -> Result<Vec<MicroBatch>> {
    let mut batches = Vec::new();
    let mut current = MicroBatch::new(first_index);
    let flush = |current: &mut MicroBatch, batches: &mut Vec<MicroBatch>| {
        if !current.queries.is_empty() || !current.evidence.is_empty() {
            let next = MicroBatch::new(current.index + 1);
            batches.push(std::mem::replace(current, next));
        }
    };
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == BATCH_DELIMITER {
            flush(&mut current, &mut batches);
            continue;
        }
        let (marker, mut atom) =
            parse_marked(line, schema).map_err(|e| e.at_line(source, n + 1))?;
        if atom.predicate == query_predicate {
            atom.negated = false;
            let label = match marker {
                Marker::None => Label::Positive,
                Marker::Negated => Label::Negative,
                Marker::Unknown => Label::Unknown,
            };
            current.queries.push((atom, label));
        } else {
            match marker {
                Marker::Unknown => {
                    return Err(Error::Syntax {
                        offset: 0,
                        message: format!("`?` is only valid on `{query_predicate}` atoms"),
                    }
                    .at_line(source, n + 1))
                }
                Marker::Negated => {
                    atom.negated = false;
                    current.evidence.push((atom, false));
                }
                Marker::None => current.evidence.push((atom, true)),
            }
        }
    }
    flush(&mut current, &mut batches);
    Ok(batches)
}

fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut entries = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .map(|entry| entry.map(|e| e.path()))
                .collect::<io::Result<Vec<_>>>()
                .map_err(|e| Error::io(path, e))?;
            entries.retain(|p| p.is_file());
            entries.sort();
            files.extend(entries);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}

/// Reads every path (files, or directories of files) into one batch sequence.
pub fn ingest(
    paths: &[PathBuf],
    schema: &Schema,
    query_predicate: &str,
) -> Result<Vec<MicroBatch>> {
    if schema.predicate(query_predicate).is_none() {
        return Err(Error::Config(format!(
            "query predicate `{query_predicate}` is not declared"
        )));
    }
    let mut batches = Vec::new();
    for file in expand(paths)? {
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        batches.extend(parse_stream(
            &text,
            &file,
            schema,
            query_predicate,
            batches.len(),
        )?);
    }
    Ok(batches)
}

fn write_atom(out: &mut impl Write, prefix: &str, atom: &Atom) -> io::Result<()> {
    writeln!(out, "{prefix}{atom}")
}

/// Writes batches in input syntax: per batch, evidence first, then query atoms,
/// each group in input order.
pub fn write_stream(batches: &[MicroBatch], mut out: impl Write) -> io::Result<()> {
    for (i, batch) in batches.iter().enumerate() {
        if i > 0 {
            writeln!(out, "{BATCH_DELIMITER}")?;
        }
        for (atom, truth) in &batch.evidence {
            write_atom(&mut out, if *truth { "" } else { "!" }, atom)?;
        }
        for (atom, label) in &batch.queries {
            let prefix = match label {
                Label::Positive => "",
                Label::Negative => "!",
                Label::Unknown => "?",
            };
            write_atom(&mut out, prefix, atom)?;
        }
    }
    Ok(())
}

/// Writes a completed stream; negative labels carry a `!` prefix.
pub fn emit_completed(batches: &[CompletedBatch], out: impl Write) -> io::Result<()> {
    let plain: Vec<MicroBatch> = batches.iter().map(CompletedBatch::to_micro_batch).collect();
    write_stream(&plain, out)
}

pub fn emit_completed_to(output: &StreamOutput, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = io::BufWriter::new(file);
    emit_completed(&output.batches, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Declarations;

    fn schema() -> Schema {
        Declarations::parse(
            "pred HoldsAt(fluent, time).\npred HappensAt(event, time).\n\
             func move(id, id): fluent.\nfunc walking(id): event.\n",
        )
        .unwrap()
        .schema
    }

    #[test]
    fn markers_become_labels() {
        let text = "\
# frame 100
HappensAt(walking(ID1),100)
!HappensAt(walking(ID2),100)
HoldsAt(move(ID1,ID2),100)
---
?HoldsAt(move(ID1,ID2),150)
!HoldsAt(move(ID2,ID1),150)
";
        let b = parse_stream(text, Path::new("t"), &schema(), "HoldsAt", 0).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].queries[0].1, Label::Positive);
        assert!(!b[0].evidence[1].1);
        assert!(!b[0].evidence[1].0.negated);
        assert_eq!(b[1].index, 1);
        assert_eq!(b[1].queries[0].1, Label::Unknown);
        assert_eq!(b[1].queries[1].1, Label::Negative);
        assert!(!b[1].queries[1].0.negated);
    }

    #[test]
    fn empty_input_has_no_batches() {
        let b = parse_stream("", Path::new("t"), &schema(), "HoldsAt", 0).unwrap();
        assert!(b.is_empty());
        let b = parse_stream(
            "---\n# nothing\n---\n",
            Path::new("t"),
            &schema(),
            "HoldsAt",
            0,
        )
        .unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn unknown_marker_on_evidence_is_rejected() {
        let err = parse_stream(
            "?HappensAt(walking(A),1)\n",
            Path::new("s.txt"),
            &schema(),
            "HoldsAt",
            0,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("s.txt:1:"), "{err}");
    }

    #[test]
    fn parse_errors_carry_file_and_line() {
        let err = parse_stream(
            "\n\nHoldsAt(move(A,B),1\n",
            Path::new("s.txt"),
            &schema(),
            "HoldsAt",
            0,
        )
        .unwrap_err();
        assert!(
            err.to_string().starts_with("s.txt:3: syntax error"),
            "{err}"
        );
    }

    #[test]
    fn write_then_parse_is_identity() {
        let text = "HappensAt(walking(A),1)\n!HappensAt(walking(B),1)\nHoldsAt(move(A,B),1)\n?HoldsAt(move(B,A),1)\n---\n!HoldsAt(move(A,B),2)\n";
        let b = parse_stream(text, Path::new("t"), &schema(), "HoldsAt", 0).unwrap();
        let mut out = Vec::new();
        write_stream(&b, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn ingest_reads_directories_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.txt"), "HoldsAt(move(A,B),2)\n").unwrap();
        std::fs::write(
            dir.path().join("a.txt"),
            "HoldsAt(move(A,B),1)\n---\n?HoldsAt(move(A,B),3)\n",
        )
        .unwrap();
        let b = ingest(&[dir.path().to_path_buf()], &schema(), "HoldsAt").unwrap();
        let q: Vec<String> = b.iter().map(|b| b.queries[0].0.to_string()).collect();
        assert_eq!(
            q,
            vec![
                "HoldsAt(move(A,B),1)",
                "HoldsAt(move(A,B),3)",
                "HoldsAt(move(A,B),2)"
            ]
        );
        assert_eq!(b.iter().map(|b| b.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(ingest(&[dir.path().to_path_buf()], &schema(), "Nope").is_err());
    }
}
