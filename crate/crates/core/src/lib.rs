//! Register of processing activities (ROPA) toolkit.
//!
//! * [`registry`]: the embedded table of 43 GDPR concepts, their DPV
//!   alignment and the six regulator template profiles.
//! * [`model`] and [`validate`]: typed records and Article 30 / profile checks.
//! * [`template`]: canonical interchange CSV and template-shaped conversion.
//! * [`rdf`]: Turtle and JSON-LD export.
//! * [`query`]: cross-record compliance queries.
//! * [`batch`]: order-preserving batch evaluation, parallel by default.

pub mod batch;
pub mod model;
pub mod query;
pub mod rdf;
pub mod registry;
pub mod template;
pub mod validate;

pub use batch::Execution;
pub use model::{FieldValue, ModelError, RecordId, RopaRecord, ValueKind, ValueSchema};
pub use registry::{
    load_registry, registry, ConceptDescriptor, ConceptId, ConceptRegistry, JurisdictionId,
    JurisdictionProfile, MappingOutcome, RegistryError,
};
pub use validate::{gap_matrix, validate_against_profile, validate_article30, validate_values, ValidationReport};
