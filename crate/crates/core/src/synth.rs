//! Seeded synthetic activity streams with a known conjunctive target rule.
//!
//! Each batch spans a run of time points. At every time point a few entities
//! are drawn from a pool; each performs one activity, some pairs are close,
//! and every pair gets a query atom `HoldsAt(<fluent>(a,b),t)` whose label is
//! true iff both entities perform the rule's activity (and, if required, are
//! close).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::write_stream;
use crate::logic::{Atom, Declarations, Term};
use crate::partition::{Label, MicroBatch, Polarity};

pub const ACTIVITIES: [&str; 4] = ["walking", "active", "inactive", "running"];
pub const QUERY_PREDICATE: &str = "HoldsAt";
const DISTANCES: [&str; 4] = ["10", "20", "30", "40"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    /// Every batch keeps the given fraction of its labels.
    PerBatch,
    /// The given fraction of batches is fully labelled, the rest unlabelled.
    WholeBatch,
}

impl std::str::FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "per-batch" => Ok(Placement::PerBatch),
            "whole-batch" => Ok(Placement::WholeBatch),
            _ => Err(format!("unknown placement `{s}` (per-batch | whole-batch)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetRule {
    pub fluent: String,
    pub activity: String,
    pub require_close: bool,
}

impl Default for TargetRule {
    fn default() -> Self {
        TargetRule {
            fluent: "move".into(),
            activity: "walking".into(),
            require_close: true,
        }
    }
}

impl TargetRule {
    /// Whether the rule holds for `(a, b)` given the true evidence of a batch.
    pub fn holds(&self, a: &str, b: &str, time: &str, evidence: &[(Atom, bool)]) -> bool {
        let does = |who: &str| {
            evidence.iter().any(|(e, truth)| {
                *truth
                    && e.predicate == "HappensAt"
                    && e.args[1] == Term::constant(time)
                    && e.args[0] == Term::function(self.activity.clone(), vec![Term::constant(who)])
            })
        };
        let close = || {
            evidence.iter().any(|(e, truth)| {
                *truth
                    && e.predicate == "Close"
                    && e.args[0] == Term::constant(a)
                    && e.args[1] == Term::constant(b)
                    && e.args[3] == Term::constant(time)
            })
        };
        does(a) && does(b) && (!self.require_close || close())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthParams {
    pub batches: usize,
    pub time_points: usize,
    /// Entities present at each time point; each unordered pair yields one query.
    pub present: usize,
    pub entities: usize,
    pub rule: TargetRule,
    pub label_fraction: f64,
    pub placement: Placement,
    /// How many symbols of [`ACTIVITIES`] are in use (2 to 4).
    pub activities: usize,
    /// Probability that an entity performs the rule's activity.
    pub activity_bias: f64,
    /// Probability that a pair is close.
    pub close_probability: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            batches: 20,
            time_points: 60,
            present: 2,
            entities: 2,
            rule: TargetRule::default(),
            label_fraction: 0.2,
            placement: Placement::WholeBatch,
            activities: 2,
            activity_bias: 0.7,
            close_probability: 0.6,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.present < 2 || self.entities < self.present {
            return Err(Error::Config(
                "need at least 2 entities per time point and a pool at least that large".into(),
            ));
        }
        if !(2..=ACTIVITIES.len()).contains(&self.activities) {
            return Err(Error::Config(format!(
                "activity count must lie in 2..={}",
                ACTIVITIES.len()
            )));
        }
        if self.time_points == 0 {
            return Err(Error::Config(
                "need at least one time point per batch".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.label_fraction) {
            return Err(Error::Config("label fraction must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.activity_bias)
            || !(0.0..=1.0).contains(&self.close_probability)
        {
            return Err(Error::Config("probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticStream {
    pub declarations: String,
    /// Fully labelled.
    pub truth: Vec<MicroBatch>,
    /// Same atoms with labels hidden according to the placement regime.
    pub stream: Vec<MicroBatch>,
}

impl SyntheticStream {
    pub fn parse_declarations(&self) -> Declarations {
        Declarations::parse(&self.declarations).expect("generated declarations are valid")
    }

    /// Writes `declarations.txt`, `stream.txt` and `truth.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<[PathBuf; 3]> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = [
            dir.join("declarations.txt"),
            dir.join("stream.txt"),
            dir.join("truth.txt"),
        ];
        fs::write(&paths[0], &self.declarations).map_err(|e| Error::io(&paths[0], e))?;
        for (path, batches) in [(&paths[1], &self.stream), (&paths[2], &self.truth)] {
            let mut buf = Vec::new();
            write_stream(batches, &mut buf).map_err(|e| Error::io(path, e))?;
            fs::write(path, buf).map_err(|e| Error::io(path, e))?;
        }
        Ok(paths)
    }
}

pub fn declarations(rule: &TargetRule) -> String {
    let mut s = String::new();
    s.push_str("type id, time, dist, pos.\n");
    s.push_str("pred HappensAt(event, time).\n");
    s.push_str("pred HoldsAt(fluent, time).\n");
    s.push_str("pred Close(id, id, dist, time).\n");
    s.push_str("pred Coord(id, pos, pos, time).\n");
    for a in ACTIVITIES {
        writeln!(s, "func {a}(id): event.").unwrap();
    }
    writeln!(s, "func {}(id, id): fluent.", rule.fluent).unwrap();
    writeln!(s, "mode 1 HoldsAt({}(+id,+id), +time).", rule.fluent).unwrap();
    for a in ACTIVITIES {
        writeln!(s, "mode 1 HappensAt({a}(+id), +time).").unwrap();
    }
    s.push_str("mode 1 Close(+id, +id, -dist, +time).\n");
    s.push_str("mode 0 Coord(+id, #pos, #pos, +time).\n");
    s
}

/// The fully labelled stream.
pub fn generate_truth(seed: u64, params: &SynthParams) -> Result<Vec<MicroBatch>> {
    params.validate()?;
    let in_use = &ACTIVITIES[..params.activities];
    if !in_use.contains(&params.rule.activity.as_str()) {
        return Err(Error::Config(format!(
            "rule activity must be one of {in_use:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let others: Vec<&str> = in_use
        .iter()
        .copied()
        .filter(|a| *a != params.rule.activity)
        .collect();
    let pool: Vec<String> = (0..params.entities).map(|i| format!("ID{i}")).collect();

    let mut batches = Vec::with_capacity(params.batches);
    for index in 0..params.batches {
        let mut batch = MicroBatch::new(index);
        for step in 0..params.time_points {
            let time = ((index * params.time_points + step) * 40).to_string();
            time_point(&mut rng, params, &pool, &others, &time, &mut batch);
        }
        batches.push(batch);
    }
    Ok(batches)
}

fn time_point(
    rng: &mut ChaCha8Rng,
    params: &SynthParams,
    pool: &[String],
    others: &[&str],
    time: &str,
    batch: &mut MicroBatch,
) {
    let mut present: Vec<&String> = pool.choose_multiple(rng, params.present).collect();
    present.sort();
    {
        for id in &present {
            let activity = if rng.gen_bool(params.activity_bias) {
                params.rule.activity.as_str()
            } else {
                others[rng.gen_range(0..others.len())]
            };
            batch.evidence.push((
                Atom::new(
                    "HappensAt",
                    vec![
                        Term::function(activity, vec![Term::constant(id.as_str())]),
                        Term::constant(time),
                    ],
                ),
                true,
            ));
            let (x, y) = (rng.gen_range(0..640u32), rng.gen_range(0..480u32));
            batch.evidence.push((
                Atom::new(
                    "Coord",
                    vec![
                        Term::constant(id.as_str()),
                        Term::constant(x.to_string()),
                        Term::constant(y.to_string()),
                        Term::constant(time),
                    ],
                ),
                true,
            ));
        }
        for (i, a) in present.iter().enumerate() {
            for b in &present[i + 1..] {
                if rng.gen_bool(params.close_probability) {
                    let d = DISTANCES[rng.gen_range(0..DISTANCES.len())];
                    batch.evidence.push((
                        Atom::new(
                            "Close",
                            vec![
                                Term::constant(a.as_str()),
                                Term::constant(b.as_str()),
                                Term::constant(d),
                                Term::constant(time),
                            ],
                        ),
                        true,
                    ));
                }
            }
        }
        for (i, a) in present.iter().enumerate() {
            for b in &present[i + 1..] {
                let label = if params.rule.holds(a, b, time, &batch.evidence) {
                    Label::Positive
                } else {
                    Label::Negative
                };
                let query = Atom::new(
                    QUERY_PREDICATE,
                    vec![
                        Term::function(
                            params.rule.fluent.clone(),
                            vec![Term::constant(a.as_str()), Term::constant(b.as_str())],
                        ),
                        Term::constant(time),
                    ],
                );
                batch.queries.push((query, label));
            }
        }
    }
}

fn retained(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).min(n)
}

/// Hides labels of a fully labelled stream according to `placement`.
pub fn hide_labels(
    truth: &[MicroBatch],
    fraction: f64,
    placement: Placement,
    rng: &mut impl Rng,
) -> Vec<MicroBatch> {
    let mut out = truth.to_vec();
    let hide_all = |b: &mut MicroBatch| b.queries.iter_mut().for_each(|(_, l)| *l = Label::Unknown);
    match placement {
        Placement::WholeBatch => {
            let keep = retained(out.len(), fraction);
            let mut labelled = vec![false; out.len()];
            for i in index::sample(rng, out.len(), keep) {
                labelled[i] = true;
            }
            for (b, keep) in out.iter_mut().zip(labelled) {
                if !keep {
                    hide_all(b);
                }
            }
        }
        Placement::PerBatch => {
            for b in &mut out {
                let n = b.queries.len();
                let mut keep = vec![false; n];
                for i in index::sample(rng, n, retained(n, fraction)) {
                    keep[i] = true;
                }
                for ((_, l), k) in b.queries.iter_mut().zip(keep) {
                    if !k {
                        *l = Label::Unknown;
                    }
                }
            }
        }
    }
    out
}

/// Generates a stream and its ground truth, deterministic in `seed`.
pub fn synth_gen(seed: u64, params: &SynthParams) -> Result<SyntheticStream> {
    let truth = generate_truth(seed, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let stream = hide_labels(&truth, params.label_fraction, params.placement, &mut rng);
    Ok(SyntheticStream {
        declarations: declarations(&params.rule),
        truth,
        stream,
    })
}

/// Share of positive labels in a fully labelled stream.
pub fn positive_rate(truth: &[MicroBatch]) -> f64 {
    let (pos, total) =
        truth
            .iter()
            .flat_map(|b| &b.queries)
            .fold((0usize, 0usize), |(p, t), (_, l)| {
                (
                    p + usize::from(l.polarity() == Some(Polarity::Positive)),
                    t + 1,
                )
            });
    if total == 0 {
        0.0
    } else {
        pos as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::partition;

    fn unknown_count(b: &[MicroBatch]) -> usize {
        b.iter()
            .flat_map(|b| &b.queries)
            .filter(|(_, l)| !l.is_known())
            .count()
    }

    #[test]
    fn label_fraction_extremes() {
        for placement in [Placement::PerBatch, Placement::WholeBatch] {
            let full = synth_gen(
                1,
                &SynthParams {
                    label_fraction: 1.0,
                    placement,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(unknown_count(&full.stream), 0);
            let none = synth_gen(
                1,
                &SynthParams {
                    label_fraction: 0.0,
                    placement,
                    ..Default::default()
                },
            )
            .unwrap();
            let total: usize = none.stream.iter().map(|b| b.queries.len()).sum();
            assert_eq!(unknown_count(&none.stream), total);
        }
    }

    #[test]
    fn whole_batch_regime_labels_entire_batches() {
        let s = synth_gen(3, &SynthParams::default()).unwrap();
        let labelled = s
            .stream
            .iter()
            .filter(|b| b.queries.iter().all(|(_, l)| l.is_known()))
            .count();
        let unlabelled = s
            .stream
            .iter()
            .filter(|b| b.queries.iter().all(|(_, l)| !l.is_known()))
            .count();
        assert_eq!(labelled, 4);
        assert_eq!(labelled + unlabelled, 20);
    }

    #[test]
    fn same_seed_same_bytes() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let p = SynthParams::default();
        let a = synth_gen(42, &p).unwrap().write_to(dir_a.path()).unwrap();
        let b = synth_gen(42, &p).unwrap().write_to(dir_b.path()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        let c = synth_gen(43, &p).unwrap();
        assert_ne!(c.truth, synth_gen(42, &p).unwrap().truth);
    }

    #[test]
    fn truth_is_consistent_with_the_rule() {
        let p = SynthParams::default();
        let s = synth_gen(5, &p).unwrap();
        for b in &s.truth {
            for (q, l) in &b.queries {
                let args = q.args[0].args();
                let time = q.args[1].symbol();
                let expected = p
                    .rule
                    .holds(args[0].symbol(), args[1].symbol(), time, &b.evidence);
                assert_eq!(l.polarity() == Some(Polarity::Positive), expected);
            }
        }
        let rate = positive_rate(&s.truth);
        assert!(rate > 0.05 && rate < 0.6, "positive rate {rate}");
    }

    #[test]
    fn generated_stream_partitions_cleanly() {
        let s = synth_gen(9, &SynthParams::default()).unwrap();
        let d = s.parse_declarations();
        for b in &s.truth {
            let vs = partition(b, &d).unwrap();
            assert_eq!(vs.len(), b.queries.len());
            assert!(vs
                .iter()
                .all(|v| v.evidence.iter().all(|e| e.predicate != "Coord")));
            assert!(
                vs.iter().all(|v| (2..=3).contains(&v.evidence.len())),
                "{vs:?}"
            );
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = SynthParams {
            present: 1,
            ..Default::default()
        };
        assert!(synth_gen(0, &p).is_err());
        p.present = 2;
        p.label_fraction = 1.5;
        assert!(synth_gen(0, &p).is_err());
        p.label_fraction = 0.5;
        p.rule.activity = "dancing".into();
        assert!(synth_gen(0, &p).is_err());
    }
}
