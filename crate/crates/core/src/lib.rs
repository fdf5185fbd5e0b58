//! Cross-dimensional linear systems.
//!
//! Semi-tensor products of matrices with mismatched dimensions, the
//! dimension-free vector space 𝒱 and its quotient by block replication,
//! least-squares projections between Euclidean spaces of different
//! dimension, and linear dynamics whose state dimension changes over time.
//!
//! ```
//! use crossdim::{mv2, CrossVec, Mat};
//!
//! let a = Mat::from_rows(&[[1.0, 0.0, -1.0, 0.0], [0.0, -1.0, 0.0, 1.0]]).unwrap();
//! let x = CrossVec::from_slice(&[1.0, 0.0, 1.0]).unwrap();
//! let y = mv2(&a, &x).unwrap();
//! assert!(y.approx_eq(&CrossVec::ones(6).scale(2.0 / 3.0), 1e-15));
//! ```

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod mat;
pub mod par;
pub mod projection;
pub mod quotient;
pub mod stp;
pub mod transient;
pub mod vspace;

pub use dynamics::{
    dimension_orbit, operator_vnorm, restricted_matrix, sampled_gain, simulate_continuous,
    simulate_discrete, DimensionOrbit, Phase, Trajectory,
};
pub use error::{Error, Result};
pub use mat::{CrossVec, Mat};
pub use par::Execution;
pub use projection::{
    pi_matrix, project_output, project_system, project_sysmatrix, project_vector, LinSys,
    Projector, TimeKind,
};
pub use quotient::{reduce_matrix, reduce_vecmat, reduce_vector, MatClass, VecClass, VecMatClass};
pub use stp::{kron, lcm, mv2, spectral_norm, stp1, stp2};
pub use transient::{
    clutch_models, gramian, is_controllable, min_energy_control, realize_batch,
    realize_transience, run_phased, MuSchedule, PostPhase, PrePhase, Target, TransientScenario,
};
pub use vspace::{path, vadd, vdist, vinner, vnorm, vsub};
