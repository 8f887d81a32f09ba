//! Linear algebra kernels: sparse storage, the complex-symmetric envelope
//! factorization, dense and tridiagonal symmetric eigensolvers, Lanczos.

pub mod dense;
pub mod envelope;
pub mod lanczos;
pub mod sparse;
pub mod tridiag;

pub use envelope::EnvelopeLdlt;
pub use sparse::CsrMatrix;
