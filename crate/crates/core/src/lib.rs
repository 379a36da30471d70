//! Online semi-supervised label completion for relational event streams.
//!
//! Each micro-batch is split into examples (one per ground query atom with its
//! type-connected evidence), examples are linked by a structural similarity
//! built from an optimal one-to-one matching of their evidence atoms, and the
//! missing labels are read off the harmonic solution of the resulting graph.
//! Labelled examples are lifted to clauses and cached across batches, with
//! contradicting clauses resolved by a Hoeffding-bound test.
//!
//! ```
//! use splice_core::{io, logic::Declarations, supervision::{SpliceConfig, SpliceState}};
//!
//! let decls = Declarations::parse(
//!     "pred Q(id, time).\npred E(id, time).\nmode 1 Q(+id,+time).\nmode 1 E(+id,+time).\n",
//! ).unwrap();
//! let text = "E(a,1)\nQ(a,1)\n---\nE(b,2)\n?Q(b,2)\n";
//! let batches = io::parse_stream(text, "inline".as_ref(), &decls.schema, "Q", 0).unwrap();
//! let mut state = SpliceState::new(decls, SpliceConfig::default());
//! let out = state.run_stream(batches).unwrap();
//! let mut rendered = Vec::new();
//! io::emit_completed(&out.batches, &mut rendered).unwrap();
//! assert_eq!(String::from_utf8(rendered).unwrap(), "E(a,1)\nQ(a,1)\n---\nE(b,2)\nQ(b,2)\n");
//! ```

pub mod distance;
pub mod error;
pub mod graph;
pub mod harmonic;
pub mod io;
pub mod logic;
pub mod metrics;
pub mod partition;
pub mod supervision;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
pub use graph::{Connector, WeightMatrix};
pub use logic::{Atom, Clause, Declarations, Term};
pub use metrics::Metrics;
pub use partition::{Label, MicroBatch, Polarity, Vertex};
pub use supervision::{CompletedBatch, SpliceConfig, SpliceState, StreamOutput, StreamSummary};
