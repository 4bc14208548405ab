//! Lines in finite metric spaces, in the betweenness sense, and exhaustive
//! checks of the De Bruijn-Erdos property on 1-2 metric spaces.
//!
//! * [`metric`]: exact distance matrices, validation, the 1-2 bitmask form and
//!   its label-code encoding.
//! * [`lines`]: betweenness, lines, line families and the De Bruijn-Erdos
//!   verdict.
//! * [`structure`]: twins, same-line edge classes and structural checkers.
//! * [`canon`]: canonical label codes and isomorphism-class enumeration.
//! * [`verify`]: partitioned sweeps over all label codes with mergeable
//!   reports, witness constructions and randomized general-metric checks.

pub mod canon;
pub mod lines;
pub mod metric;
pub mod pointset;
pub mod structure;
pub mod verify;

pub use lines::{all_lines, dbe_verdict, is_between, is_universal, line_of, line_of_fast, DbeVerdict, LineFamily, LineSpace};
pub use metric::{
    as_one_two, code_from_space, pair_index, parse_distance_matrix, space_from_code, validate_metric, DistanceMatrix,
    LabelCode, MetricError, MetricSpace, OneTwoSpace, PointId,
};
pub use pointset::PointSet;
pub use structure::{ClassShape, EdgePair, EquivClass, Violation};
