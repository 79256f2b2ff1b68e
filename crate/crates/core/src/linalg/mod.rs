//! Small dense complex linear algebra: just enough for n <= ~50.

mod cmat;
mod eig;
mod schur;
mod svd;
mod unitary;

pub use cmat::{inner, normalize, vec_norm, CMat};
pub use eig::{hermitian_eig, HermitianEig};
pub use schur::{eigenvalues, hessenberg, schur_triangular};
pub use svd::{top_singular, TopSingular};
pub use unitary::{gauss, random_orthogonal, random_unitary};
