//! Signed counts of real lines on real hypersurfaces of degree `2n - 1` in
//! `P^{n+1}`.
//!
//! A line `l = {x_1 = … = x_n = 0}` on `X` is summarized by its jet curve
//! `C = [p_1 : … : p_n]`, a rational curve of degree `2n - 2` in `P^{n-1}`.
//! Three signs are attached to `C`:
//!
//! * the Euler index, `sgn det A_C` ([`jet::euler_index`]);
//! * the Segre index, a product of local weights of the residual pencils cut
//!   by hyperplanes through the `(n-3)`-dimensional `(2n-4)`-secants of `C`
//!   ([`segre::segre_index`]);
//! * the Welschinger weight, the spin class of the frame loop induced by a
//!   real splitting of the normal bundle ([`welsch::welschinger_weight`]).
//!
//! All three coincide off the discriminant `det A_C = 0` and flip across it.
//! [`lines`] enumerates the real lines of a given hypersurface and checks the
//! signed count `(2n-1)!!`.

pub mod error;
pub mod exactalg;
pub mod generators;
pub mod jet;
pub mod lines;
pub mod newton;
pub mod secants;
pub mod segre;
pub mod welsch;

pub use error::{Error, Result};
pub use exactalg::{BinaryForm, ComplexPoint, RatMatrix, Rational};
pub use generators::{CrossingReport, IndexTriple, PlaneConfig};
pub use jet::{DiscriminantFlags, Hypersurface, JetCurve};
pub use lines::{LineSearch, RealLine};
pub use newton::SolverConfig;
pub use secants::{Divisor, Secant, SecantReport};
pub use segre::{ResidualPencil, SegrePoints};
pub use welsch::{FrameLoop, SplittingSections};

/// `(2n - 1)!! = 1 · 3 · … · (2n - 1)`, the signed number of real lines.
pub fn double_factorial_odd(n: usize) -> u64 {
    (1..=n as u64).map(|k| 2 * k - 1).product()
}

/// `C(n, 2)`, the Castelnuovo count of `(n-3)`-dimensional `(2n-4)`-secants.
pub fn castelnuovo_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}
