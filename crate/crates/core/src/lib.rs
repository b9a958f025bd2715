//! Key-player analysis for interaction networks.
//!
//! Builds undirected networks from photo co-appearance or dyadic interaction
//! logs, selects key-player sets (KPP-NEG: removal maximizes fragmentation;
//! KPP-POS: maximal reach), and reports how removing role groups changes the
//! fragmentation of the network.
//!
//! ```
//! use std::collections::BTreeSet;
//! use kpkit::graph::{Graph, NodeId};
//! use kpkit::keyplayer::{fit_neg, select_key_players, KpConfig, KpMethod};
//!
//! let id = |s: &str| NodeId::new(s).unwrap();
//! let g = Graph::from_edges([(id("a"), id("b")), (id("b"), id("c")), (id("c"), id("d"))]).unwrap();
//! let best = select_key_players(&g, KpMethod::Neg, &KpConfig::with_k(1)).unwrap();
//! assert_eq!(best.chosen, BTreeSet::from([id("b")]));
//! assert_eq!(fit_neg(&g, &best.chosen).unwrap(), best.fit);
//! ```

pub mod cli;
pub mod graph;
pub mod ingest;
pub mod keyplayer;
pub mod report;
pub mod synth;

pub use graph::{Graph, GraphError, NodeId};
pub use ingest::{Dataset, Role, RoleTable};
pub use keyplayer::{FragmentationDelta, KeyPlayerResult, KpConfig, KpMethod};
pub use report::AnalysisReport;
