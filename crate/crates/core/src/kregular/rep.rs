//! Linear representations `(u, mu, w)` with `s(n) = u · mu(digits of n) · w`.
//!
//! Digits are consumed least significant first: evaluating at `n` multiplies
//! `u` on the right by `mu(d)` for each digit `d` of `n` from the low end up.
//! The empty digit string (n = 0) evaluates to `u · w`.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::{dot, row_times_matrix, Matrix, Scalar};
use crate::{Int, Nat, Rat};

/// Refuse mod-construction state spaces beyond this size unless overridden.
pub const DEFAULT_STATE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepError {
    /// The two representations live over different bases.
    BaseMismatch { left: u32, right: u32 },
    /// Vector or matrix dimensions do not agree.
    Shape { detail: String },
    /// A base smaller than 2.
    InvalidBase { base: u32 },
    /// The mod construction needs integer entries throughout.
    NonIntegerEntry,
    /// The reachable state set exceeded the cap; nothing partial is returned.
    StateCapExceeded { cap: usize },
}

impl fmt::Display for RepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepError::BaseMismatch { left, right } => {
                write!(f, "base mismatch: {left} vs {right}")
            }
            RepError::Shape { detail } => write!(f, "shape error: {detail}"),
            RepError::InvalidBase { base } => write!(f, "invalid base {base}"),
            RepError::NonIntegerEntry => {
                write!(f, "mod construction requires integer entries")
            }
            RepError::StateCapExceeded { cap } => {
                write!(f, "reachable state count exceeds the cap of {cap}")
            }
        }
    }
}

impl std::error::Error for RepError {}

/// A rank-r linear representation over base-k digits, generic in the scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRep<T> {
    k: u32,
    u: Vec<T>,
    mu: Vec<Matrix<T>>,
    w: Vec<T>,
}

/// The concrete exact-rational instantiation used throughout the crate.
pub type LinearRepresentation = LinearRep<Rat>;

impl<T: Scalar> LinearRep<T> {
    pub fn new(k: u32, u: Vec<T>, mu: Vec<Matrix<T>>, w: Vec<T>) -> Result<Self, RepError> {
        if k < 2 {
            return Err(RepError::InvalidBase { base: k });
        }
        let rank = u.len();
        if rank == 0 {
            return Err(RepError::Shape { detail: "rank must be at least 1".into() });
        }
        if w.len() != rank {
            return Err(RepError::Shape {
                detail: format!("w has length {}, expected {rank}", w.len()),
            });
        }
        if mu.len() != k as usize {
            return Err(RepError::Shape {
                detail: format!("expected {k} digit matrices, found {}", mu.len()),
            });
        }
        for (d, m) in mu.iter().enumerate() {
            if m.rows() != rank || m.cols() != rank {
                return Err(RepError::Shape {
                    detail: format!(
                        "mu({d}) is {}x{}, expected {rank}x{rank}",
                        m.rows(),
                        m.cols()
                    ),
                });
            }
        }
        Ok(LinearRep { k, u, mu, w })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn rank(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    pub fn w(&self) -> &[T] {
        &self.w
    }

    pub fn mu(&self, digit: u32) -> &Matrix<T> {
        &self.mu[digit as usize]
    }

    /// `u · mu(d_0) · mu(d_1) ... · w` over the canonical digits of `n`,
    /// least significant first; the empty product gives `u · w`.
    pub fn eval(&self, n: &Nat) -> T {
        let mut state = self.u.clone();
        let mut rest = n.clone();
        let base = Nat::from(self.k);
        while !rest.is_zero() {
            let (q, r) = rest.div_rem(&base);
            let digit = r.to_usize().expect("digit below the base");
            state = row_times_matrix(&state, &self.mu[digit]);
            rest = q;
        }
        dot(&state, &self.w)
    }

    /// Evaluate at every `n < count` by sharing low-digit prefixes across a
    /// digit tree; one vector-matrix product per tree node.
    pub fn eval_range(&self, count: u64) -> Vec<T> {
        let mut out = vec![T::zero(); usize::try_from(count).expect("count fits usize")];
        if count == 0 {
            return out;
        }
        out[0] = dot(&self.u, &self.w);
        let k = u64::from(self.k);
        let mut frontier: Vec<(u64, Vec<T>)> = vec![(0, self.u.clone())];
        let mut weight: u64 = 1;
        while weight < count {
            let mut next = Vec::new();
            for (value, state) in &frontier {
                for d in 0..k {
                    let val = value + d * weight;
                    if val >= count && d > 0 {
                        break;
                    }
                    let child = row_times_matrix(state, &self.mu[d as usize]);
                    if d > 0 {
                        out[val as usize] = dot(&child, &self.w);
                    }
                    // keep only nodes whose subtree can still reach a
                    // canonical value below count
                    if (val as u128) + (weight as u128) * (k as u128) < count as u128 {
                        next.push((val, child));
                    }
                }
            }
            frontier = next;
            weight = weight.saturating_mul(k);
        }
        out
    }

    /// Pointwise sum via the block-diagonal construction; the rank adds.
    pub fn sum(&self, other: &Self) -> Result<Self, RepError> {
        if self.k != other.k {
            return Err(RepError::BaseMismatch { left: self.k, right: other.k });
        }
        let u = self.u.iter().chain(&other.u).cloned().collect();
        let w = self.w.iter().chain(&other.w).cloned().collect();
        let mu = self
            .mu
            .iter()
            .zip(&other.mu)
            .map(|(a, b)| a.block_diag(b))
            .collect();
        LinearRep::new(self.k, u, mu, w)
    }

    /// Pointwise product via the Kronecker construction; the rank multiplies.
    pub fn product(&self, other: &Self) -> Result<Self, RepError> {
        if self.k != other.k {
            return Err(RepError::BaseMismatch { left: self.k, right: other.k });
        }
        let kron_vec = |a: &[T], b: &[T]| -> Vec<T> {
            let mut out = Vec::with_capacity(a.len() * b.len());
            for x in a {
                for y in b {
                    out.push(if x.is_zero() || y.is_zero() {
                        T::zero()
                    } else {
                        x.clone() * y.clone()
                    });
                }
            }
            out
        };
        let u = kron_vec(&self.u, &other.u);
        let w = kron_vec(&self.w, &other.w);
        let mu = self
            .mu
            .iter()
            .zip(&other.mu)
            .map(|(a, b)| a.kronecker(b))
            .collect();
        LinearRep::new(self.k, u, mu, w)
    }

    /// True when appending a most-significant zero digit never changes the
    /// value, i.e. `mu(0) · w = w`. Guessed representations need not be
    /// zero-robust, so this is a diagnostic rather than an invariant.
    pub fn is_padding_invariant(&self) -> bool {
        let m = &self.mu[0];
        for i in 0..self.rank() {
            if dot(m.row(i), &self.w) != self.w[i] {
                return false;
            }
        }
        true
    }
}

impl LinearRepresentation {
    /// The sequence `s(n) = n`: `u = (1 0)`, `mu(d) = [[k, d], [0, 1]]`,
    /// `w = (0 1)^T`.
    pub fn identity(k: u32) -> Self {
        let rat = |v: i64| Rat::from(Int::from(v));
        let mu = (0..k)
            .map(|d| {
                Matrix::from_rows(vec![
                    vec![rat(i64::from(k)), rat(i64::from(d))],
                    vec![rat(0), rat(1)],
                ])
            })
            .collect();
        LinearRep::new(k, vec![rat(1), rat(0)], mu, vec![rat(0), rat(1)])
            .expect("identity representation is well formed")
    }

    /// The constant sequence `s(n) = c`.
    pub fn constant(k: u32, c: &Int) -> Self {
        let mu = (0..k).map(|_| Matrix::identity(1)).collect();
        LinearRep::new(k, vec![Rat::one()], mu, vec![Rat::from(c.clone())])
            .expect("constant representation is well formed")
    }

    /// Integer-entry representation of the odious numbers; the state tracks
    /// the value, the bit parity and a constant.
    pub fn odious_rep() -> Self {
        Self::parity_affine(true)
    }

    /// Integer-entry representation of the evil numbers.
    pub fn evil_rep() -> Self {
        Self::parity_affine(false)
    }

    // Shared three-state machine: od(n) = 2n + 1 - p(n), ev(n) = 2n + p(n)
    // where p is the bit parity.
    fn parity_affine(odious: bool) -> Self {
        let rat = |v: i64| Rat::from(Int::from(v));
        // rows act on the functional basis (f, p, 1)
        let m0 = if odious {
            // od(2x) = 2 od(x) + p(x) - 1 ; p(2x) = p(x)
            Matrix::from_rows(vec![
                vec![rat(2), rat(1), rat(-1)],
                vec![rat(0), rat(1), rat(0)],
                vec![rat(0), rat(0), rat(1)],
            ])
        } else {
            // ev(2x) = 2 ev(x) - p(x) ; p(2x) = p(x)
            Matrix::from_rows(vec![
                vec![rat(2), rat(-1), rat(0)],
                vec![rat(0), rat(1), rat(0)],
                vec![rat(0), rat(0), rat(1)],
            ])
        };
        let m1 = if odious {
            // od(2x+1) = 2 od(x) + 3 p(x) ; p(2x+1) = 1 - p(x)
            Matrix::from_rows(vec![
                vec![rat(2), rat(3), rat(0)],
                vec![rat(0), rat(-1), rat(1)],
                vec![rat(0), rat(0), rat(1)],
            ])
        } else {
            // ev(2x+1) = 2 ev(x) - 3 p(x) + 3 ; p(2x+1) = 1 - p(x)
            Matrix::from_rows(vec![
                vec![rat(2), rat(-3), rat(3)],
                vec![rat(0), rat(-1), rat(1)],
                vec![rat(0), rat(0), rat(1)],
            ])
        };
        let value0 = if odious { rat(1) } else { rat(0) };
        LinearRep::new(
            2,
            vec![rat(1), rat(0), rat(0)],
            vec![m0, m1],
            vec![value0, rat(0), rat(1)],
        )
        .expect("parity representation is well formed")
    }

    /// Reduce a representation with integer entries mod `m >= 1`.
    ///
    /// Builds the finite-state system whose states are the reachable reduced
    /// row vectors `u · mu(x) mod m`, with digit maps given by right
    /// multiplication mod m and output `state · w mod m`, then re-encodes it
    /// as a representation over state-indicator vectors. Aborts without a
    /// partial result when the reachable state count exceeds `state_cap`.
    pub fn modulo(&self, m: u64, state_cap: usize) -> Result<LinearRepresentation, RepError> {
        if m == 0 {
            return Err(RepError::Shape { detail: "modulus must be at least 1".into() });
        }
        let to_residue = |r: &Rat| -> Result<u64, RepError> {
            if !r.is_integer() {
                return Err(RepError::NonIntegerEntry);
            }
            let v = r.to_integer().mod_floor(&Int::from(m));
            Ok(v.to_u64().expect("reduced residue fits u64"))
        };
        let rank = self.rank();
        let u0: Vec<u64> = self.u.iter().map(&to_residue).collect::<Result<_, _>>()?;
        let w0: Vec<u64> = self.w.iter().map(&to_residue).collect::<Result<_, _>>()?;
        let mut mu0: Vec<Vec<Vec<u64>>> = Vec::with_capacity(self.k as usize);
        for mat in &self.mu {
            let mut rows = Vec::with_capacity(rank);
            for i in 0..rank {
                rows.push(
                    mat.row(i)
                        .iter()
                        .map(&to_residue)
                        .collect::<Result<Vec<u64>, _>>()?,
                );
            }
            mu0.push(rows);
        }
        let step = |state: &[u64], digit: usize| -> Vec<u64> {
            let mat = &mu0[digit];
            let mut out = vec![0u64; rank];
            for (i, &s) in state.iter().enumerate() {
                if s == 0 {
                    continue;
                }
                for (j, slot) in out.iter_mut().enumerate() {
                    let add = (u128::from(s) * u128::from(mat[i][j])) % u128::from(m);
                    *slot = ((u128::from(*slot) + add) % u128::from(m)) as u64;
                }
            }
            out
        };
        let output = |state: &[u64]| -> u64 {
            let mut acc = 0u128;
            for (s, w) in state.iter().zip(&w0) {
                acc = (acc + u128::from(*s) * u128::from(*w)) % u128::from(m);
            }
            acc as u64
        };

        let mut ids: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut states: Vec<Vec<u64>> = Vec::new();
        let mut transitions: Vec<Vec<usize>> = Vec::new();
        ids.insert(u0.clone(), 0);
        states.push(u0);
        let mut cursor = 0;
        while cursor < states.len() {
            let mut outgoing = Vec::with_capacity(self.k as usize);
            for d in 0..self.k as usize {
                let next = step(&states[cursor], d);
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= state_cap {
                            return Err(RepError::StateCapExceeded { cap: state_cap });
                        }
                        let id = states.len();
                        ids.insert(next.clone(), id);
                        states.push(next);
                        id
                    }
                };
                outgoing.push(id);
            }
            transitions.push(outgoing);
            cursor += 1;
        }

        let n = states.len();
        let mut u = vec![Rat::zero(); n];
        u[0] = Rat::one();
        let w: Vec<Rat> = states
            .iter()
            .map(|s| Rat::from(Int::from(output(s))))
            .collect();
        let mu: Vec<Matrix<Rat>> = (0..self.k as usize)
            .map(|d| {
                let mut mat = Matrix::zeros(n, n);
                for (from, outs) in transitions.iter().enumerate() {
                    mat.set(from, outs[d], Rat::one());
                }
                mat
            })
            .collect();
        LinearRep::new(self.k, u, mu, w)
    }
}

/// Free-function spelling of [`LinearRep::eval`].
pub fn eval_rep(rep: &LinearRepresentation, n: &Nat) -> Rat {
    rep.eval(n)
}

/// Free-function spelling of [`LinearRep::sum`].
pub fn rep_sum(
    a: &LinearRepresentation,
    b: &LinearRepresentation,
) -> Result<LinearRepresentation, RepError> {
    a.sum(b)
}

/// Free-function spelling of [`LinearRep::product`].
pub fn rep_product(
    a: &LinearRepresentation,
    b: &LinearRepresentation,
) -> Result<LinearRepresentation, RepError> {
    a.product(b)
}

/// Free-function spelling of [`LinearRep::modulo`].
pub fn rep_mod(
    a: &LinearRepresentation,
    m: u64,
    state_cap: usize,
) -> Result<LinearRepresentation, RepError> {
    a.modulo(m, state_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences;

    fn rat(v: i64) -> Rat {
        Rat::from(Int::from(v))
    }

    #[test]
    fn identity_rep_evaluates_to_n() {
        let rep = LinearRepresentation::identity(2);
        assert_eq!(rep.eval(&Nat::from(13u32)), rat(13));
        assert_eq!(rep.eval(&Nat::zero()), rat(0));
        for n in 0u64..1 << 10 {
            assert_eq!(rep.eval(&Nat::from(n)), rat(n as i64));
        }
        let rep3 = LinearRepresentation::identity(3);
        assert_eq!(rep3.eval(&Nat::from(26u32)), rat(26));
    }

    #[test]
    fn eval_range_matches_pointwise() {
        let rep = LinearRepresentation::odious_rep();
        let bulk = rep.eval_range(1 << 9);
        for (n, got) in bulk.iter().enumerate() {
            assert_eq!(got, &rep.eval(&Nat::from(n)), "n = {n}");
        }
    }

    #[test]
    fn odious_and_evil_reps_match_generators() {
        let od = LinearRepresentation::odious_rep();
        let ev = LinearRepresentation::evil_rep();
        for n in 0u64..1 << 12 {
            assert_eq!(od.eval(&Nat::from(n)), Rat::from(sequences::odious(n)));
            assert_eq!(ev.eval(&Nat::from(n)), Rat::from(sequences::evil(n)));
        }
    }

    #[test]
    fn sum_and_product_examples() {
        let id = LinearRepresentation::identity(2);
        let doubled = id.sum(&id).unwrap();
        assert_eq!(doubled.rank(), 4);
        assert_eq!(doubled.eval(&Nat::from(7u32)), rat(14));

        let squared = id.product(&id).unwrap();
        assert_eq!(squared.rank(), 4);
        assert_eq!(squared.eval(&Nat::from(5u32)), rat(25));

        let od = LinearRepresentation::odious_rep();
        let ev = LinearRepresentation::evil_rep();
        let both = od.sum(&ev).unwrap();
        let prod = od.product(&ev).unwrap();
        for n in 0u64..1 << 10 {
            // od(n) + ev(n) = 4n + 1
            assert_eq!(both.eval(&Nat::from(n)), rat(4 * n as i64 + 1));
            assert_eq!(
                prod.eval(&Nat::from(n)),
                Rat::from(sequences::odious(n) * sequences::evil(n))
            );
        }

        let zero = LinearRepresentation::constant(2, &Int::zero());
        let one = LinearRepresentation::constant(2, &Int::from(1));
        let id_plus_zero = id.sum(&zero).unwrap();
        let id_times_one = id.product(&one).unwrap();
        for n in 0u64..1 << 10 {
            assert_eq!(id_plus_zero.eval(&Nat::from(n)), rat(n as i64));
            assert_eq!(id_times_one.eval(&Nat::from(n)), rat(n as i64));
        }
    }

    #[test]
    fn base_mismatch_rejected() {
        let a = LinearRepresentation::identity(2);
        let b = LinearRepresentation::identity(3);
        assert_eq!(
            a.sum(&b).unwrap_err(),
            RepError::BaseMismatch { left: 2, right: 3 }
        );
        assert!(a.product(&b).is_err());
    }

    #[test]
    fn mod_construction() {
        let id = LinearRepresentation::identity(2);
        let parity = id.modulo(2, DEFAULT_STATE_CAP).unwrap();
        for n in 0u64..16 {
            assert_eq!(parity.eval(&Nat::from(n)), rat((n % 2) as i64));
        }
        let od = LinearRepresentation::odious_rep();
        let od3 = od.modulo(3, DEFAULT_STATE_CAP).unwrap();
        for n in 0u64..1 << 10 {
            let want = sequences::odious(n).mod_floor(&Int::from(3));
            assert_eq!(od3.eval(&Nat::from(n)), Rat::from(want), "n = {n}");
        }
        let trivial = od.modulo(1, DEFAULT_STATE_CAP).unwrap();
        for n in 0u64..32 {
            assert_eq!(trivial.eval(&Nat::from(n)), rat(0));
        }
    }

    #[test]
    fn mod_rejects_non_integer_entries() {
        let rat_rep = LinearRep::new(
            2,
            vec![Rat::new(Int::one(), Int::from(2))],
            vec![Matrix::identity(1), Matrix::identity(1)],
            vec![Rat::one()],
        )
        .unwrap();
        assert_eq!(
            rat_rep.modulo(2, DEFAULT_STATE_CAP).unwrap_err(),
            RepError::NonIntegerEntry
        );
    }

    #[test]
    fn mod_state_cap() {
        let id = LinearRepresentation::identity(2);
        assert_eq!(
            id.modulo(97, 3).unwrap_err(),
            RepError::StateCapExceeded { cap: 3 }
        );
    }

    #[test]
    fn padding_diagnostic() {
        assert!(LinearRepresentation::identity(2).is_padding_invariant());
        assert!(LinearRepresentation::odious_rep().is_padding_invariant());
        // a rep that counts digit positions is not padding-invariant
        let len_rep = LinearRep::new(
            2,
            vec![Rat::one(), Rat::zero()],
            vec![
                Matrix::from_rows(vec![vec![rat(1), rat(1)], vec![rat(0), rat(1)]]),
                Matrix::from_rows(vec![vec![rat(1), rat(1)], vec![rat(0), rat(1)]]),
            ],
            vec![Rat::zero(), Rat::one()],
        )
        .unwrap();
        assert!(!len_rep.is_padding_invariant());
    }
}
