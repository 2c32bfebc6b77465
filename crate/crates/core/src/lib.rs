//! Exact certificates and finite experiments for quantitative recurrence.
//!
//! The crate is organized around six pillars:
//!
//! * [`linalg`] — arbitrary-precision integer matrices, Smith/Hermite normal
//!   forms, lattices and their indices. Every certificate below rests on these.
//! * [`poly`] — integer-valued polynomials in the binomial basis, vectors of
//!   them, multiplicative complexity via invariant factors, hyperplane-fleeing
//!   tests, and the monomial substitution that flattens multivariate orbit
//!   polynomials to a single variable.
//! * [`expsum`] — characters of `Z^r`, complete polynomial exponential sums in
//!   double-double precision, decay scans, and the modulus schedule derived
//!   from the assumed power-saving constant.
//! * [`orbits`] — unipotent matrices, the adjoint action on trace-zero
//!   matrices, companion matrices, conjugation-difference identities, orbit
//!   polynomial construction, and coset-fleeing certificates.
//! * [`systems`] — exact finite models of measure-preserving `Z^r` actions:
//!   ergodic components, equidistribution, the measure increment loop,
//!   spectral projections, mean ergodic deviations, and recurrence searches.
//! * [`diffscan`] — difference sets of integer windows and their images under
//!   quadratic forms and polynomial shift maps, with meet-in-the-middle
//!   enumeration and coverage certificates.
//!
//! All certificate-bearing arithmetic is exact (big integers and rationals);
//! floating point appears only in the double-double layer of [`hiprec`] where
//! magnitudes of exponential sums are evaluated.

pub mod bitset;
pub mod diffscan;
pub mod expsum;
pub mod hiprec;
pub mod linalg;
pub mod orbits;
pub mod poly;
pub mod systems;
