//! Markov partitions for hyperbolic automorphisms of the 2-torus.
//!
//! The pipeline: shadow pseudo-orbits of a dense grid to get a cover by
//! rectangles, refine the cover along the fibers of overlapping rectangles,
//! and read off the transition matrix and symbolic coding of the resulting
//! partition.

pub mod torus_model;

pub use torus_model::{
    apply, apply_inverse, displacement, hyperbolicity_constants, iterate, make_automorphism,
    torus_distance, Displacement, ToralAutomorphism, TorusError, TorusPoint,
};
pub mod shadowing;

pub use shadowing::{
    defect, expansivity_constant, gamma_net, shadow, verify_shadow, DenseNet, PseudoOrbit,
    ShadowError, ShadowResult,
};
pub mod local_product;

pub use local_product::{
    bracket, fiber, make_budget, ConstantsBudget, Direction, FiberSegment, ProductError,
};
pub mod rectangles;

pub use rectangles::{
    image_rectangle, intersect, preimage_rectangle, BoxComplex, EigenBox, Interval, RectError,
    Rectangle, TOL,
};
pub mod partition_builder;

pub use partition_builder::{
    build_cover, build_cover_at, build_partition, validate_partition, verify_markov, Cell, Cover,
    MarkovPartition, MarkovReport,
};
pub mod symbolic;

pub use symbolic::{
    cylinder, encode, is_admissible, perron_eigenvalue, pi_point, semiconjugacy_residual,
    transition_matrix, Coding, CylinderIntersection, ItineraryWindow, SymbolicError,
    TransitionMatrix,
};
