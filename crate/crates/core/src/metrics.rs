//! Micro-averaged scores of completed labels against ground truth.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::partition::{Label, MicroBatch, Polarity};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Metrics {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
        }
    }

    pub fn record(&mut self, predicted: Polarity, truth: Polarity) {
        match (predicted, truth) {
            (Polarity::Positive, Polarity::Positive) => self.true_positives += 1,
            (Polarity::Positive, Polarity::Negative) => self.false_positives += 1,
            (Polarity::Negative, Polarity::Negative) => self.true_negatives += 1,
            (Polarity::Negative, Polarity::Positive) => self.false_negatives += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    pub fn precision(&self) -> f64 {
        ratio(
            self.true_positives,
            self.true_positives + self.false_positives,
        )
    }

    pub fn recall(&self) -> f64 {
        ratio(
            self.true_positives,
            self.true_positives + self.false_negatives,
        )
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// `key=value` lines for scripts.
    pub fn key_values(&self) -> String {
        format!(
            "tp={}\nfp={}\ntn={}\nfn={}\nprecision={:.6}\nrecall={:.6}\nf1={:.6}\n",
            self.true_positives,
            self.false_positives,
            self.true_negatives,
            self.false_negatives,
            self.precision(),
            self.recall(),
            self.f1()
        )
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "              truth +   truth -")?;
        writeln!(
            f,
            "predicted +  {:>8}  {:>8}",
            self.true_positives, self.false_positives
        )?;
        writeln!(
            f,
            "predicted -  {:>8}  {:>8}",
            self.false_negatives, self.true_negatives
        )?;
        writeln!(f, "precision    {:.4}", self.precision())?;
        writeln!(f, "recall       {:.4}", self.recall())?;
        write!(f, "f1           {:.4}", self.f1())
    }
}

fn index(batches: &[MicroBatch]) -> HashMap<(usize, String), Label> {
    batches
        .iter()
        .flat_map(|b| {
            b.queries
                .iter()
                .map(move |(a, l)| ((b.index, a.to_string()), *l))
        })
        .collect()
}

/// Scores `predicted` against `truth` over the query atoms that are unlabelled
/// in `input`. Atoms are matched by batch index and rendering.
pub fn evaluate(
    input: &[MicroBatch],
    predicted: &[MicroBatch],
    truth: &[MicroBatch],
) -> Result<Metrics> {
    let predicted = index(predicted);
    let truth = index(truth);
    let mut metrics = Metrics::default();
    for batch in input {
        for (atom, label) in &batch.queries {
            if label.is_known() {
                continue;
            }
            let key = (batch.index, atom.to_string());
            let p = predicted
                .get(&key)
                .and_then(|l| l.polarity())
                .ok_or_else(|| {
                    Error::Config(format!(
                        "batch {}: no completed label for `{atom}`",
                        batch.index
                    ))
                })?;
            let t = truth
                .get(&key)
                .and_then(|l| l.polarity())
                .ok_or_else(|| Error::MissingTruth(key.1.clone()))?;
            metrics.record(p, t);
        }
    }
    Ok(metrics)
}
