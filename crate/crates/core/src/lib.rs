//! Optimal placement of bearing-only, range-only and RSS sensors.
//!
//! A placement is optimal when its frame operator `G = Σ c_i² g_i g_iᵀ` has
//! the smallest possible Frobenius norm for the given coefficients `c_i`.
//! For regular coefficients this means `G` is a multiple of the identity
//! (a tight frame), which in turn maximizes the determinant and minimizes
//! the trace of the inverse Fisher information.

pub mod coefficients;
pub mod construction;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod linalg;
pub mod optimality;
pub mod sensor;

pub use coefficients::{irregularity, is_regular, range_regularity_check, CoefficientSequence, IrregularityReport};
pub use construction::{
    construct, construct_2d, construct_3d_five, construct_dplus1, construct_irregular, construct_square,
    construct_with, union_placements, ConstructOptions, Construction, Method, MethodChoice,
};
pub use error::{Error, Result};
pub use flow::{simulate, FlowConfig, Integrator, Outcome, Trajectory};
pub use geometry::{
    placements_equivalent, transform_placement, EquivalenceWitness, OrthogonalTransform, Permutation,
    Placement, SignPattern,
};
pub use optimality::{certify, lower_bound, optimality_error, OptimalityCertificate, Regime};
pub use sensor::{coefficients, fim, frame_operator, objective, Fim, FrameOperator, SensorKind, SensorSpec};

pub use nalgebra::DVector;
