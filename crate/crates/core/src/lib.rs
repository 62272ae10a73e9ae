//! Link-spam detection on directed web graphs.
//!
//! The pipeline starts from a page-level edge list ([`webgraph`]), collapses it
//! into domain clusters, scores pages with PageRank and HITS ([`linkrank`]),
//! derives per-domain link features ([`features`]), groups domains with fuzzy
//! c-means ([`fcmclust`]), and flags link farms with the domain IN/OUT
//! intersection test ([`detector`]). A cost-sensitive decision tree
//! ([`classifier`]) learns from the same features, and [`synthcorpus`] produces
//! labelled graphs with planted farms for evaluation.

pub mod classifier;
pub mod detector;
pub mod dot;
pub mod error;
pub mod fcmclust;
pub mod features;
pub mod label;
pub mod linkrank;
pub mod synthcorpus;
pub mod webgraph;

pub use error::{Error, Result};
pub use label::Label;
pub use webgraph::{domain_of, DomainClustering, WebGraph};
