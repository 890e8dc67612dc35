//! Materials selection engine.
//!
//! The pipeline classifies a design requirement into a material class with a
//! rule knowledgebase, fragments the materials database down to that class
//! and the requirement's properties, scores every candidate with one of six
//! distance or similarity functions and ranks the results.
//!
//! ```
//! use matsel_core::*;
//!
//! let schema = PropertySchema::default_schema();
//! let kb = Knowledgebase::default_rules(&schema).unwrap();
//! let db = generate_synthetic(42, 300, &schema);
//! let req = DesignRequirement::from_cells(
//!     &schema,
//!     &[("Tensile Strength", "20"), ("Tensile Modulus", "2000")],
//! )
//! .unwrap();
//! let report = compare_metrics(&db, &req, &kb, &schema, &CompareOptions::default()).unwrap();
//! assert_eq!(report.class, MaterialClass::Polymer);
//! assert_eq!(report.reports.len(), 6);
//! ```

pub mod axioms;
pub mod datastore;
pub mod knowledgebase;
pub mod metrics;
pub mod model;
pub mod schema;
pub mod selector;
pub mod synth;

pub use axioms::{check_metric_axioms, Axiom, AxiomReport, Counterexample, Tally};
pub use datastore::{
    fragment, ingest_csv, to_matrix, validate_csv, DataError, DataMatrix, FragmentDatabase,
    FragmentRow, MaterialDatabase,
};
pub use knowledgebase::{
    classify, ClassificationResult, ClassifyError, DecisionRule, KbError, Knowledgebase, NearMiss,
    Node,
};
pub use metrics::{
    absolute_exponential, city_block, correlation_coefficient, euclidean, exponential_similarity,
    geometric_average_min, min_max_normalize, FeatureVector, MetricError, MetricKind, Normalized,
    Orientation, UnknownMetric,
};
pub use model::{
    encode_ordinal, scalarize, DesignRequirement, Material, MaterialClass, PropertyValue,
    RequirementError, ValueError,
};
pub use schema::{OrdinalScale, PropertyDef, PropertyKind, PropertySchema, SchemaError};
pub use selector::{
    compare_metrics, rank_top_k, select_best, CompareOptions, ComparisonReport, Exclusion,
    PipelineError, RankEntry, RequirementEcho, SelectError, SelectionMode, SelectionReport,
    UnscoredMetric,
};
pub use synth::generate_synthetic;
