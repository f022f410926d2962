//! Exact binary-form algebra and rational linear algebra.

pub mod fform;
pub mod form;
pub mod matrix;
pub mod rational;
pub mod roots;
pub mod unipoly;

pub use form::{
    bf_eval, bf_gcd, bf_gcd_all, is_squarefree, resultant, sturm_real_root_count,
    sylvester_matrix, BinaryForm,
};
pub use matrix::{det_exact, kernel_exact, RatMatrix};
pub use rational::{rat, ratio, Rational};
pub use roots::{complex_roots, complex_roots_c, complex_roots_f64, ComplexPoint};
pub use unipoly::UniPoly;
