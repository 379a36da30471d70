//! The online completion loop: cache lifted labelled examples, filter
//! contradictions, and label the unlabelled query atoms of each micro-batch.

mod cache;
mod hoeffding;

pub use cache::{CacheEntry, LabelCache, Verdict};
pub use hoeffding::{hoeffding_epsilon, HoeffdingConfig};

use crate::error::Result;
use crate::graph::{build_weights, Connector, WeightMatrix};
use crate::harmonic::{self, HarmonicSolution};
use crate::logic::{Atom, Declarations};
use crate::partition::{partition_counted, MicroBatch, Polarity, Vertex};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpliceConfig {
    pub connector: Connector,
    pub hoeffding: HoeffdingConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletedQuery {
    pub atom: Atom,
    pub polarity: Polarity,
    /// `true` when the label came from the input rather than completion.
    pub given: bool,
}

/// A micro-batch with every query atom labelled.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletedBatch {
    pub index: usize,
    pub evidence: Vec<(Atom, bool)>,
    pub queries: Vec<CompletedQuery>,
}

/// Everything produced while completing one batch.
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub completed: CompletedBatch,
    /// Number of cached labelled vertices that took part in the graph.
    pub emitted_labelled: usize,
    /// Sparsified weights, present when a harmonic solve ran.
    pub weights: Option<WeightMatrix>,
    pub solution: Option<HarmonicSolution>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StreamSummary {
    pub batches: usize,
    pub evidence_scanned: usize,
    pub labelled: usize,
    pub unlabelled: usize,
    pub completed_positive: usize,
    pub completed_negative: usize,
    /// Sum over batches of cached vertices used as labelled examples.
    pub emitted_labelled: usize,
    /// Sum over batches of cached vertices suppressed by filtering.
    pub filtered_out: usize,
    /// Batches whose unlabelled atoms had no labelled side to learn from.
    pub unsupervised_batches: usize,
    pub cache_size: usize,
    pub peak_cache_size: usize,
}

#[derive(Clone, Debug)]
pub struct StreamOutput {
    pub batches: Vec<CompletedBatch>,
    pub summary: StreamSummary,
}

/// State carried from one micro-batch to the next.
#[derive(Clone, Debug)]
pub struct SpliceState {
    decls: Declarations,
    config: SpliceConfig,
    cache: LabelCache,
    summary: StreamSummary,
}

impl SpliceState {
    pub fn new(decls: Declarations, config: SpliceConfig) -> Self {
        Self::with_cache(decls, config, LabelCache::new())
    }

    /// Starts from a previously saved cache.
    pub fn with_cache(decls: Declarations, config: SpliceConfig, cache: LabelCache) -> Self {
        let summary = StreamSummary {
            cache_size: cache.len(),
            peak_cache_size: cache.len(),
            ..Default::default()
        };
        SpliceState {
            decls,
            config,
            cache,
            summary,
        }
    }

    pub fn cache(&self) -> &LabelCache {
        &self.cache
    }

    pub fn config(&self) -> &SpliceConfig {
        &self.config
    }

    pub fn declarations(&self) -> &Declarations {
        &self.decls
    }

    pub fn summary(&self) -> &StreamSummary {
        &self.summary
    }

    /// Counts `labelled` into the cache and returns the cached vertices that
    /// survive contradiction filtering.
    pub fn cache_update_and_filter(&mut self, labelled: &[Vertex]) -> Result<Vec<Vertex>> {
        for v in labelled {
            self.cache.observe(v, &self.decls)?;
        }
        self.summary.cache_size = self.cache.len();
        self.summary.peak_cache_size = self.summary.peak_cache_size.max(self.cache.len());
        let kept: Vec<Vertex> = self
            .cache
            .filtered(&self.config.hoeffding)
            .into_iter()
            .map(|e| e.representative.clone())
            .collect();
        self.summary.filtered_out += self.cache.len() - kept.len();
        Ok(kept)
    }

    pub fn process_batch(&mut self, batch: &MicroBatch) -> Result<BatchOutcome> {
        self.process_inner(batch)
            .map_err(|e| e.in_batch(batch.index))
    }

    fn process_inner(&mut self, batch: &MicroBatch) -> Result<BatchOutcome> {
        let (vertices, scanned) = partition_counted(batch, &self.decls)?;
        self.summary.batches += 1;
        self.summary.evidence_scanned += scanned;

        let mut labelled = Vec::new();
        let mut unlabelled = Vec::new();
        let mut positions = Vec::new();
        for (i, v) in vertices.into_iter().enumerate() {
            if v.label.is_known() {
                labelled.push(v);
            } else {
                positions.push(i);
                unlabelled.push(v);
            }
        }
        self.summary.labelled += labelled.len();
        self.summary.unlabelled += unlabelled.len();

        let kept = self.cache_update_and_filter(&labelled)?;
        let mut weights = None;
        let mut solution = None;
        let completions: Vec<Polarity> = if unlabelled.is_empty() {
            Vec::new()
        } else if kept.is_empty() {
            log::warn!(
                "batch {}: no labelled examples available, {} query atoms default to negative",
                batch.index,
                unlabelled.len()
            );
            self.summary.unsupervised_batches += 1;
            vec![Polarity::Negative; unlabelled.len()]
        } else {
            let w = self
                .config
                .connector
                .apply(&build_weights(&kept, &unlabelled));
            let y_l: Vec<Polarity> = kept
                .iter()
                .map(|v| v.label.polarity().expect("cached vertices are labelled"))
                .collect();
            let s = harmonic::solve(&w, &y_l)?;
            let labels = s.labels_u.clone();
            weights = Some(w);
            solution = Some(s);
            labels
        };

        let mut completed = completions.into_iter();
        let mut next_unknown = positions.into_iter().peekable();
        let queries = batch
            .queries
            .iter()
            .enumerate()
            .map(|(i, (atom, label))| match label.polarity() {
                Some(polarity) => CompletedQuery {
                    atom: atom.clone(),
                    polarity,
                    given: true,
                },
                None => {
                    debug_assert_eq!(next_unknown.next(), Some(i));
                    let polarity = completed.next().expect("one completion per unknown atom");
                    match polarity {
                        Polarity::Positive => self.summary.completed_positive += 1,
                        Polarity::Negative => self.summary.completed_negative += 1,
                    }
                    CompletedQuery {
                        atom: atom.clone(),
                        polarity,
                        given: false,
                    }
                }
            })
            .collect();
        self.summary.emitted_labelled += if unlabelled.is_empty() { 0 } else { kept.len() };

        Ok(BatchOutcome {
            completed: CompletedBatch {
                index: batch.index,
                evidence: batch.evidence.clone(),
                queries,
            },
            emitted_labelled: kept.len(),
            weights,
            solution,
        })
    }

    /// Folds [`process_batch`](Self::process_batch) over the stream, consuming
    /// each batch once.
    pub fn run_stream(
        &mut self,
        batches: impl IntoIterator<Item = MicroBatch>,
    ) -> Result<StreamOutput> {
        let mut out = Vec::new();
        for batch in batches {
            out.push(self.process_batch(&batch)?.completed);
        }
        Ok(StreamOutput {
            batches: out,
            summary: self.summary,
        })
    }
}
