//! Knowledge Graph Change Language: a change model for ontologies and
//! knowledge graphs, a controlled natural language for writing changes,
//! and engines to apply change sets and to diff two graphs.

pub mod apply;
pub mod cnl;
pub mod diff;
pub mod graph;
pub mod model;
mod par;
pub mod request;
pub mod serialization;

pub use apply::{apply_change, apply_changeset, apply_pending, ApplyOptions, ApplyReport, OnError, PendingSelector};
pub use cnl::{parse_command, parse_document, render_command, render_document};
pub use diff::{diff, diff_sequential, format_diff, DiffOptions};
#[cfg(feature = "parallel")]
pub use diff::diff_parallel;
pub use graph::{graph_equal, Edge, Graph, Node, NodeId};
pub use model::{Change, ChangeKind, ChangeSet, NodeRef, SynonymScope};
pub use serialization::Format;
