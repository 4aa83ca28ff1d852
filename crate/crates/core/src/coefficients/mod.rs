//! Dirichlet coefficients A(m) generated from Euler local factors.

pub mod family;
pub mod local;
pub mod spec;
pub mod table;
pub mod tau;

pub use family::{
    kronecker, CustomFactors, DeltaProvider, LocalFactorProvider, RealCharacter, SatoTateProvider,
    ZetaProvider,
};
pub use local::{local_coefficients, EulerLocalFactor};
pub use spec::{parse_spec, FamilyKind, LFunctionSpec, ValidationProfile, DEFAULT_EPSILON};
pub use table::{sieve, sieve_with, CoefficientTable, SieveDiagnostics, SieveOptions};
pub use tau::{tau_qexpansion, TAU_MAX};

/// Degree-2 synthetic spec with semicircle-distributed a_p, fixed by `seed`.
pub fn random_sato_tate_spec(seed: u64) -> LFunctionSpec {
    LFunctionSpec::sato_tate(seed)
}
