//! Desk-scale laboratory for training-free temporal reuse in video pipelines.
//!
//! The crate is organized around five subsystems plus fixtures and reporting:
//!
//! - [`framestream`]: frame loading (binary PPM), square-pad preprocessing with
//!   active-region masks, and seeded synthetic streams with exact change truth.
//! - [`planner`]: per-block temporal change classification, bounded staleness,
//!   and effective fresh-frame accounting.
//! - [`ceiling`]: stage-share speedup ceilings, scatter-back predictions, and
//!   residual reports.
//! - [`session`]: cache-session policy state machines over a deterministic
//!   answer oracle and a parametric latency model.
//! - [`drift`]: paired choice/correctness drift auditing, pathological-output
//!   detection, and cache-correctness text diffing.
//! - [`baselines`]: fixed-evidence streaming frame-selection policies scored
//!   against event windows.

pub mod baselines;
pub mod ceiling;
pub mod drift;
pub mod fixtures;
pub mod framestream;
pub mod planner;
pub mod report;
pub mod session;
