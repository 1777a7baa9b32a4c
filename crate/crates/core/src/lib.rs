//! Discriminators of integer sequences and a k-regular sequence engine.
//!
//! The discriminator of a sequence of distinct integers sends `n` to the
//! least positive modulus under which the first `n` terms are pairwise
//! incongruent. This crate computes discriminator profiles by brute force,
//! provides closed forms for the odious, evil and square sequences together
//! with the constructive witnesses behind them, and implements a k-regular
//! sequence engine: linear representations over exact rationals, recurrence
//! systems across residue classes, closure constructions, relation
//! verification and exact relation guessing from data.
//!
//! All arithmetic is exact. Core linear algebra is generic over the scalar
//! type (see [`linalg::Scalar`]); the concrete instantiations used throughout
//! are the unbounded [`Int`]/[`Nat`] integers and the exact rational [`Rat`].

pub mod discriminator;
pub mod kregular;
pub mod linalg;
pub mod numkit;
pub mod selfdisc;
pub mod seqdsl;
pub mod sequences;

/// Unbounded signed integer used for all sequence values.
pub type Int = num_bigint::BigInt;
/// Unbounded nonnegative integer used for indices and digit values.
pub type Nat = num_bigint::BigUint;
/// Exact rational scalar; always in lowest terms with positive denominator.
pub type Rat = num_rational::BigRational;
/// Dense matrix over the exact rational scalar.
pub type Mat = linalg::Matrix<Rat>;
