//! Generators for the concrete sequences under study and the prefix-set
//! machinery used by the counting identities.

use std::fmt;

use num_traits::{One, Zero};

use crate::numkit::{from_base_k, parity_u64, to_base_k};
use crate::{Int, Nat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqError {
    /// An explicit-list sequence was asked for a term past its end.
    IndexPastEnd { index: u64, len: usize },
}

impl fmt::Display for SeqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqError::IndexPastEnd { index, len } => {
                write!(f, "index {index} past the end of an explicit list of {len} terms")
            }
        }
    }
}

impl std::error::Error for SeqError {}

/// The parity class of a nonnegative integer: odious numbers have an odd
/// number of ones in their binary expansion, evil numbers an even number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityClass {
    Odious,
    Evil,
}

/// n-th odious number, 0-indexed.
///
/// Uses the index formula `od(n) = 2n + 1 - ones_parity(n)`; the tests
/// validate it against the filter-the-naturals oracle.
pub fn odious(n: u64) -> Int {
    Int::from(2 * u128::from(n) + 1 - u128::from(parity_u64(n)))
}

/// n-th evil number, 0-indexed; `ev(n) = 2n + ones_parity(n)`.
pub fn evil(n: u64) -> Int {
    Int::from(2 * u128::from(n) + u128::from(parity_u64(n)))
}

/// n-th Cantor number: the n-th nonnegative integer whose base-3 expansion
/// uses only the digits 0 and 2. Computed by digit transcription as
/// `2 · [(n)_2]_3`.
pub fn cantor(n: u64) -> Int {
    let bits = to_base_k(&Nat::from(n), 2).expect("base 2 is valid");
    let transcribed = from_base_k(bits.digits(), 3).expect("binary digits are valid in base 3");
    Int::from(transcribed * Nat::from(2u32))
}

/// n-th positive square, `(n+1)^2`.
pub fn square(n: u64) -> Int {
    let v = Int::from(n) + 1;
    &v * &v
}

/// Which generator a [`Sequence`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Odious,
    Evil,
    Cantor,
    Squares,
    Naturals,
    ExplicitList,
}

impl SequenceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SequenceKind::Odious => "odious",
            SequenceKind::Evil => "evil",
            SequenceKind::Cantor => "cantor",
            SequenceKind::Squares => "squares",
            SequenceKind::Naturals => "naturals",
            SequenceKind::ExplicitList => "explicit",
        }
    }
}

/// A deterministic generator of an integer sequence by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    kind: SequenceKind,
    terms: Option<Vec<Int>>,
}

impl Sequence {
    pub fn odious() -> Self {
        Sequence { kind: SequenceKind::Odious, terms: None }
    }

    pub fn evil() -> Self {
        Sequence { kind: SequenceKind::Evil, terms: None }
    }

    pub fn cantor() -> Self {
        Sequence { kind: SequenceKind::Cantor, terms: None }
    }

    pub fn squares() -> Self {
        Sequence { kind: SequenceKind::Squares, terms: None }
    }

    pub fn naturals() -> Self {
        Sequence { kind: SequenceKind::Naturals, terms: None }
    }

    pub fn explicit(terms: Vec<Int>) -> Self {
        Sequence { kind: SequenceKind::ExplicitList, terms: Some(terms) }
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    /// Number of available terms; `None` for the built-in generators.
    pub fn len(&self) -> Option<usize> {
        self.terms.as_ref().map(Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn try_term(&self, n: u64) -> Result<Int, SeqError> {
        match self.kind {
            SequenceKind::Odious => Ok(odious(n)),
            SequenceKind::Evil => Ok(evil(n)),
            SequenceKind::Cantor => Ok(cantor(n)),
            SequenceKind::Squares => Ok(square(n)),
            SequenceKind::Naturals => Ok(Int::from(n)),
            SequenceKind::ExplicitList => {
                let terms = self.terms.as_ref().expect("explicit list has payload");
                usize::try_from(n)
                    .ok()
                    .and_then(|i| terms.get(i))
                    .cloned()
                    .ok_or(SeqError::IndexPastEnd { index: n, len: terms.len() })
            }
        }
    }

    /// Panicking variant of [`Sequence::try_term`] for the total generators.
    pub fn term(&self, n: u64) -> Int {
        self.try_term(n).expect("term index in range")
    }
}

/// The set of odious (or evil) numbers strictly below a bound, stored as a
/// sorted member list so the counting identities can do set algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixSet {
    bound: Int,
    members: Vec<Int>,
}

impl PrefixSet {
    pub fn bound(&self) -> &Int {
        &self.bound
    }

    pub fn members(&self) -> &[Int] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Translate every member by `offset`, keeping the result sorted.
    pub fn shift(&self, offset: &Int) -> PrefixSet {
        PrefixSet {
            bound: &self.bound + offset,
            members: self.members.iter().map(|m| m + offset).collect(),
        }
    }

    /// Union that insists on disjointness; `None` when the sets overlap.
    pub fn union_disjoint(&self, other: &PrefixSet) -> Option<PrefixSet> {
        let mut merged = Vec::with_capacity(self.members.len() + other.members.len());
        let (mut a, mut b) = (self.members.iter().peekable(), other.members.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    if x == y {
                        return None;
                    }
                    if x < y {
                        merged.push(a.next().unwrap().clone());
                    } else {
                        merged.push(b.next().unwrap().clone());
                    }
                }
                (Some(_), None) => merged.push(a.next().unwrap().clone()),
                (None, Some(_)) => merged.push(b.next().unwrap().clone()),
                (None, None) => break,
            }
        }
        Some(PrefixSet {
            bound: self.bound.clone().max(other.bound.clone()),
            members: merged,
        })
    }
}

/// All odious (resp. evil) numbers strictly less than `bound`.
pub fn prefix_below(class: ParityClass, bound: &Int) -> PrefixSet {
    let mut members = Vec::new();
    if bound > &Int::zero() {
        let gen: fn(u64) -> Int = match class {
            ParityClass::Odious => odious,
            ParityClass::Evil => evil,
        };
        let mut idx = 0u64;
        loop {
            let v = gen(idx);
            if &v >= bound {
                break;
            }
            members.push(v);
            idx += 1;
        }
    }
    PrefixSet { bound: bound.clone(), members }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::ones_parity;
    use num_traits::ToPrimitive;

    #[test]
    fn matches_listings() {
        // first terms as printed in the source material
        let od: Vec<i64> = vec![
            1, 2, 4, 7, 8, 11, 13, 14, 16, 19, 21, 22, 25, 26, 28, 31, 32, 35, 37, 38, 41,
        ];
        let ev: Vec<i64> = vec![
            0, 3, 5, 6, 9, 10, 12, 15, 17, 18, 20, 23, 24, 27, 29, 30, 33, 34, 36, 39, 40, 43,
        ];
        for (n, want) in od.iter().enumerate() {
            assert_eq!(odious(n as u64), Int::from(*want));
        }
        for (n, want) in ev.iter().enumerate() {
            assert_eq!(evil(n as u64), Int::from(*want));
        }
        let cn: Vec<i64> = vec![
            0, 2, 6, 8, 18, 20, 24, 26, 54, 56, 60, 62, 72, 74, 78, 80, 162, 164, 168, 170, 180,
        ];
        for (n, want) in cn.iter().enumerate() {
            assert_eq!(cantor(n as u64), Int::from(*want));
        }
    }

    #[test]
    fn spot_values() {
        assert_eq!(odious(5), Int::from(11));
        assert_eq!(evil(6), Int::from(12));
        assert_eq!(cantor(5), Int::from(20));
        assert_eq!(square(0), Int::from(1));
        assert_eq!(square(3), Int::from(16));
        assert_eq!(square(9), Int::from(100));
    }

    #[test]
    fn power_of_two_indices() {
        for i in 1u32..=10 {
            let idx = 1u64 << (i - 1);
            assert_eq!(odious(idx), Int::from(1u64 << i));
            assert_eq!(evil(idx), Int::from((1u64 << i) + 1));
        }
    }

    #[test]
    fn index_formula_matches_filter_oracle() {
        // filter the naturals by bit parity and compare with the formulas
        let mut od_seen = 0u64;
        let mut ev_seen = 0u64;
        for v in 0u64..1 << 16 {
            if parity_u64(v) == 1 {
                assert_eq!(odious(od_seen), Int::from(v));
                od_seen += 1;
            } else {
                assert_eq!(evil(ev_seen), Int::from(v));
                ev_seen += 1;
            }
        }
    }

    #[test]
    fn parity_partition() {
        // merging the two sequences gives back the naturals
        for n in 0u64..1 << 15 {
            let p = ones_parity(&Nat::from(n));
            assert!(p == 0 || p == 1);
        }
        let mut merged: Vec<u64> = (0..1 << 12)
            .map(|n| odious(n).to_u64().unwrap())
            .chain((0..1 << 12).map(|n| evil(n).to_u64().unwrap()))
            .collect();
        merged.sort_unstable();
        assert_eq!(merged, (0..1 << 13).collect::<Vec<u64>>());
    }

    #[test]
    fn cantor_recurrences() {
        for n in 0u64..1 << 14 {
            let c = cantor(n);
            assert_eq!(cantor(2 * n), &c * 3);
            assert_eq!(cantor(2 * n + 1), &c * 3 + 2);
        }
    }

    #[test]
    fn strict_monotonicity() {
        for n in 0u64..1 << 14 {
            assert!(odious(n + 1) > odious(n));
            assert!(evil(n + 1) > evil(n));
            assert!(cantor(n + 1) > cantor(n));
        }
    }

    #[test]
    fn prefix_sets() {
        let o8 = prefix_below(ParityClass::Odious, &Int::from(8));
        assert_eq!(
            o8.members(),
            &[Int::from(1), Int::from(2), Int::from(4), Int::from(7)]
        );
        assert!(prefix_below(ParityClass::Odious, &Int::from(0)).is_empty());
        for i in 1u32..=14 {
            let e = prefix_below(ParityClass::Evil, &Int::from(1u64 << i));
            assert_eq!(e.len(), 1 << (i - 1));
        }
    }

    #[test]
    fn prefix_set_recursion() {
        // O_{2^{i+1}} = O_{2^i} ⊔ (E_{2^i} + 2^i) and the evil twin
        for i in 1u32..=14 {
            let half = Int::from(1u64 << i);
            let full = Int::from(1u64 << (i + 1));
            let o_half = prefix_below(ParityClass::Odious, &half);
            let e_half = prefix_below(ParityClass::Evil, &half);
            let o_full = prefix_below(ParityClass::Odious, &full);
            let e_full = prefix_below(ParityClass::Evil, &full);
            let o_built = o_half.union_disjoint(&e_half.shift(&half)).expect("disjoint");
            assert_eq!(o_built.members(), o_full.members());
            let e_built = e_half.union_disjoint(&o_half.shift(&half)).expect("disjoint");
            assert_eq!(e_built.members(), e_full.members());
        }
    }

    #[test]
    fn explicit_list_bounds() {
        let s = Sequence::explicit(vec![Int::from(3), Int::from(9)]);
        assert_eq!(s.try_term(1).unwrap(), Int::from(9));
        assert_eq!(
            s.try_term(2).unwrap_err(),
            SeqError::IndexPastEnd { index: 2, len: 2 }
        );
    }
}
