//! Recovery of the potential coefficients `q_{n-1}` for `n >= 2` from
//! order-n scattering data. The data integral equations are evaluated on a
//! contour `k_m = 2 pi m / (nu b) + i xi` in the upper half-plane, where the
//! kernel becomes a perturbation of the Fourier-series operator; its inverse
//! is applied either as a Neumann series or by regularized least squares,
//! and the exponential weight is undone to expose the coefficient.

mod contour;
mod data;
mod solvers;
mod special;
mod system;

pub use contour::{find_xi0, find_xi0_for_route, s_bound, s_of_xi, ContourGrid, DataRoute};
pub use data::{
    compute_en, compute_fn, compute_hn_for_data, known_cascade, ConstantQ2, DataSetDn,
    ExponentialQ2, OrderData,
};
pub use solvers::{
    invert_direct, invert_neumann, recover_all, recover_q, DirectOutcome, InversionMethod,
    NeumannOutcome, ReconstructionResult, RecoveryConfig, Regularizer, XiChoice,
};
pub use special::{fourier_invert_special, SpecialMethod, SpecialReconstruction, ThirdOrderSource};
pub use system::{build_system, InversionGrid, InversionSystem, SystemConfig, SystemDiagnostics};
