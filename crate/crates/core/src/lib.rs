//! Direct Zernike-based reconstruction for two-dimensional linearized
//! electrical impedance tomography on the unit disk.
//!
//! The linearized forward map decouples by angular frequency: the Zernike
//! coefficients `c_{j,k}` with a fixed `j` only influence the `j`th diagonal of
//! the Fourier data matrix, through a lower-triangular block `F^{|j|,M}`.
//! The crate provides
//!
//! * [`zernike`]: the orthonormal Zernike basis and expansion evaluation,
//! * [`forward`]: the explicit block operator and data-matrix bookkeeping,
//! * [`disk`]: exact nonlinear data for a disk inclusion via Möbius maps,
//!   trapezoidal data-matrix quadrature and the additive noise model,
//! * [`inversion`]: truncated SVD and truncated triangular solvers with
//!   discrepancy-principle parameter choice,
//! * [`raster`], [`io`] and [`pipeline`]: grid export, file formats and the
//!   command implementations behind the `zernike-eit` binary.

pub mod disk;
pub mod error;
pub mod forward;
pub mod inversion;
pub mod io;
pub mod pipeline;
pub mod raster;
pub mod zernike;

pub use error::{Error, Result};
pub use forward::{
    apply_forward, coefficient, diagonal_data_to_matrix, extract_diagonals, BlockDiagonalOperator,
    DataMatrix, DiagonalData, TriangularBlock,
};
pub use inversion::{
    build_ordering, forward_substitution, morozov_select, triangular_truncation_solve,
    truncated_svd_solve, BlockSvd, Method, OrderingKind, OrderingMap, RegularizedSolution, Solver,
};
pub use zernike::{eval_expansion, radial_poly, zernike_eval, ZernikeCoefficients, ZernikeIndex};
