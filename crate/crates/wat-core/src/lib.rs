//! Classification of web attacks observed in HTTP traffic.
//!
//! The crate models an attack as a nine-axis vector (entry point,
//! vulnerability, threat, action, length, HTTP element, target, scope,
//! privileges), encodes vectors in a variable-length text and binary form,
//! classifies parsed HTTP requests and access-log entries against a
//! declarative rule set, and runs distance, clustering, and severity
//! analysis directly over the encoded bytes.

pub mod analysis;
pub mod classifier;
pub mod codec;
pub mod http;
pub mod store;
pub mod taxonomy;

pub use taxonomy::{AttackVector, Axis, ValidationMode};
