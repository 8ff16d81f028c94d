use thiserror::Error;

/// Errors produced by the certification toolkit.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share a shape or dimension do not.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A square matrix was required.
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// A Hermitian matrix was required.
    #[error("matrix is not Hermitian (defect {defect:.3e} exceeds tolerance {tolerance:.3e})")]
    NotHermitian { defect: f64, tolerance: f64 },

    /// A dimension argument must be at least one.
    #[error("dimension must be positive")]
    ZeroDimension,

    /// A unit vector was required.
    #[error("vector norm {norm:.12} is not 1 within {tolerance:.3e}")]
    NotUnit { norm: f64, tolerance: f64 },

    /// POVM effects must be positive semidefinite and sum to the identity.
    #[error("invalid POVM: {reason} (residual {residual:.3e})")]
    InvalidPovm { reason: &'static str, residual: f64 },

    /// Projective-measurement validation failed.
    #[error("invalid projective measurement: {reason} (residual {residual:.3e})")]
    InvalidProjection { reason: &'static str, residual: f64 },

    /// A density matrix failed positivity or normalization.
    #[error("invalid density matrix: {reason} (residual {residual:.3e})")]
    InvalidDensityMatrix { reason: &'static str, residual: f64 },

    /// A game predicate violates the synchronous rule-set invariant.
    #[error("predicate is not synchronous: V({a},{b}|{x},{x}) = 1 with {a} != {b}")]
    NotSynchronousGame { x: usize, a: usize, b: usize },

    /// A strategy expected to be perfect for a game is not.
    #[error("strategy is not perfect: game loss {loss:.3e} exceeds {tolerance:.3e}")]
    NotPerfect { loss: f64, tolerance: f64 },

    /// A word refers to a generator the family does not define.
    #[error("unknown generator ({x},{a})")]
    UnknownGenerator { x: usize, a: usize },

    /// Game-algebra relation residuals exceeded the tolerance.
    #[error("game relations violated: max residual {residual:.3e} exceeds {tolerance:.3e}")]
    RelationsViolated { residual: f64, tolerance: f64 },

    /// Two operator families that must commute do not.
    #[error("families do not mutually commute: max commutator {residual:.3e} exceeds {tolerance:.3e}")]
    NonCommuting { residual: f64, tolerance: f64 },

    /// Simultaneous block diagonalization failed to separate invariant blocks.
    #[error("block separation failed: {reason} (residual {residual:.3e})")]
    BlockSeparationFailed { reason: &'static str, residual: f64 },

    /// The block structure of a family is incompatible with the ideal strategy.
    #[error("block structure incompatible with the ideal strategy: {reason}")]
    IncompatibleBlocks { reason: &'static str },

    /// A spectral certificate is required to have a positive gap.
    #[error("spectral gap {gap:.3e} is not positive")]
    NonPositiveGap { gap: f64 },

    /// No feasible robustness constant exists for the requested target.
    #[error("no feasible dilation accuracy for target eps = {eps:.3e}")]
    InfeasibleTarget { eps: f64 },

    /// The mapped state carries no mass in the certified top eigenspace.
    #[error("state is orthogonal to the top eigenspace (weight {alpha:.3e})")]
    OrthogonalToTopEigenspace { alpha: f64 },

    /// A certificate produced under an irreducibility claim failed its own
    /// consistency conditions; indicates numerical breakdown.
    #[error("certificate inconsistent: {reason}")]
    CertificateInconsistent { reason: &'static str },

    /// An operation's stated precondition does not hold for the input.
    #[error("precondition failed: {what} (measured {measured:.3e}, allowed {allowed:.3e})")]
    PreconditionFailed {
        what: &'static str,
        measured: f64,
        allowed: f64,
    },

    /// A quantitative bound that must hold mathematically was violated,
    /// signalling numerical breakdown rather than a bad input.
    #[error("bound violated: {what} (lhs {lhs:.6e} > rhs {rhs:.6e})")]
    BoundViolated { what: &'static str, lhs: f64, rhs: f64 },

    /// A linear-constraint-system description is malformed.
    #[error("invalid constraint system: {reason}")]
    InvalidLcs { reason: String },

    /// A JSON document does not match any known schema or is inconsistent.
    #[error("invalid input format: {reason}")]
    InvalidFormat { reason: String },
}
