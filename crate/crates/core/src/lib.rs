//! Classical-planning benchmark toolkit.
//!
//! Parses and grounds STRIPS PDDL, solves tasks optimally with A* and LM-Cut,
//! validates plans, generates seeded benchmark datasets for six IPC domains,
//! encodes problems into compact and prompt forms, and scores model-generated
//! plans.

pub mod encoding;
pub mod generators;
pub mod metrics;
pub mod pddl;
pub mod planner;
pub mod validate;

/// Toolkit version recorded in dataset and run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
