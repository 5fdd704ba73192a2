use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("block is numerically singular (condition number {cond:.3e})")]
    SingularBlock { cond: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid block split {top} for a {dim}x{dim} matrix")]
    InvalidSplit { top: usize, dim: usize },

    #[error("coefficient {index} is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { index: usize, min_eig: f64 },

    #[error("complement dimensions differ: domain {domain}, range {range}")]
    DefectMismatch { domain: usize, range: usize },

    #[error("action is not an isometry (residual {residual:.3e})")]
    NotIsometric { residual: f64 },

    #[error("phi samples violate the decomposition identity (residual {residual:.3e})")]
    InconsistentSamples { residual: f64 },

    #[error("sample grid does not contain the base point E")]
    MissingBasePoint,

    #[error("entry blocks do not commute (relative commutator {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("tuple is not strictly accretive (min Hermitian eigenvalue {min_eig:.3e})")]
    NotAccretive { min_eig: f64 },

    #[error("tuple is not strictly contractive (max norm {norm:.6})")]
    NotContractive { norm: f64 },

    #[error("1 lies in the spectrum (I - F is numerically singular)")]
    SpectrumAtOne,

    #[error("point lies outside the domain of definition")]
    OutOfDomain,

    #[error("kernel identity violated (residual {residual:.3e})")]
    IdentityViolated { residual: f64 },

    #[error("generator Gram matrices differ (residual {residual:.3e})")]
    IsometryDefect { residual: f64 },

    #[error("operator is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("colligation is not self-adjoint (residual {residual:.3e})")]
    NotSelfAdjoint { residual: f64 },

    #[error("J does not define an anti-unitary involution (residual {residual:.3e})")]
    NotInvolution { residual: f64 },

    #[error("function is not real with respect to the involution (residual {residual:.3e})")]
    NotRealFunction { residual: f64 },

    #[error("subspace is not invariant under the involution (loss {loss:.3e})")]
    NotInvariant { loss: f64 },

    #[error("non-finite entry in input")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;
