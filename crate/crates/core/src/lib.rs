//! Bent and near-bent functions over odd prime characteristic: finite field
//! arithmetic, exact Walsh spectra in `Z[e^{2 pi i/p}]`, quadratic near-bent
//! functions and the gluing construction of bent functions on `F_{p^n} x F_p`.

pub mod construct;
pub mod cyclotomic;
pub mod gfpn;
pub mod quadratic;
pub mod spectrum;
pub mod verify;

pub use construct::{GluedSpec, ScanReport};
pub use cyclotomic::{Coeff, CycError, ValueShape, Zeta};
pub use gfpn::{FieldCtx, FieldDesc, FieldElement, FieldError, LinearizedPoly, MatrixFp};
pub use quadratic::{BinomialVariant, NearBentCertificate, QuadraticError, QuadraticSpec};
pub use spectrum::{Classification, Domain, PFunction, SpectrumError, SpectrumReport};

/// Cyclotomic integers with machine-word coefficients.
pub type CycInt = cyclotomic::CycInt<i64>;
/// Cyclotomic integers with 128-bit coefficients.
pub type WideCycInt = cyclotomic::CycInt<i128>;
/// Cyclotomic integers with arbitrary-precision coefficients.
pub type BigCycInt = cyclotomic::CycInt<num_bigint::BigInt>;

pub type WalshSpectrum = spectrum::WalshSpectrum<i64>;
pub type WideWalshSpectrum = spectrum::WalshSpectrum<i128>;
