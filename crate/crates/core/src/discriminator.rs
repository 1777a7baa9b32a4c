//! The discriminator engine: brute-force computation, closed forms,
//! constructive witnesses, the lex-least reconstruction and the prime-valued
//! combination built from the squares discriminator.

use std::collections::HashSet;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::numkit::{is_prime_u64, ones_parity};
use crate::sequences::{SeqError, Sequence};
use crate::{Int, Nat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscError {
    /// Input values were not pairwise distinct.
    DuplicateValues,
    /// Modulus smaller than 1.
    InvalidModulus,
    /// The value list was empty.
    EmptyInput,
    /// An argument fell outside an operation's domain.
    OutOfDomain { op: &'static str, detail: String },
    /// The greedy reconstruction found no feasible next term below its cap.
    ConstructionFailure { index: u64 },
    /// The underlying sequence could not produce enough terms.
    Sequence(SeqError),
}

impl fmt::Display for DiscError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscError::DuplicateValues => write!(f, "values must be pairwise distinct"),
            DiscError::InvalidModulus => write!(f, "modulus must be at least 1"),
            DiscError::EmptyInput => write!(f, "value list must be nonempty"),
            DiscError::OutOfDomain { op, detail } => write!(f, "{op}: out of domain: {detail}"),
            DiscError::ConstructionFailure { index } => {
                write!(f, "greedy construction stuck at index {index}")
            }
            DiscError::Sequence(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DiscError {}

impl From<SeqError> for DiscError {
    fn from(e: SeqError) -> Self {
        DiscError::Sequence(e)
    }
}

/// The list `D_s(0..N)` for a sequence prefix.
///
/// Invariants: `values[0] = 0`, `values[n] >= n` for `n >= 1`, and the list
/// is nondecreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscriminatorProfile {
    values: Vec<Int>,
}

impl DiscriminatorProfile {
    pub fn values(&self) -> &[Int] {
        &self.values
    }

    /// `D_s(n)`; panics when `n` is past the computed range.
    pub fn get(&self, n: u64) -> &Int {
        &self.values[usize::try_from(n).expect("index fits usize")]
    }

    /// Largest computed index.
    pub fn max_index(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// Check the profile invariants, returning the first offending index.
    pub fn check_invariants(&self) -> Result<(), u64> {
        if self.values.is_empty() || !self.values[0].is_zero() {
            return Err(0);
        }
        for n in 1..self.values.len() {
            if self.values[n] < Int::from(n) || self.values[n] < self.values[n - 1] {
                return Err(n as u64);
            }
        }
        Ok(())
    }
}

/// Two same-parity-class numbers realizing a prescribed difference within a
/// prescribed bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPair {
    pub j: Nat,
    pub ell: Nat,
    pub difference: Nat,
    pub bound: Nat,
}

impl WitnessPair {
    /// Both members odious, `j >= 1`, `j < ell <= bound`, `ell - j = difference`.
    pub fn is_valid_odious(&self) -> bool {
        self.shape_ok()
            && !self.j.is_zero()
            && ones_parity(&self.j) == 1
            && ones_parity(&self.ell) == 1
    }

    /// Both members evil, `j >= 0`, `j < ell <= bound`, `ell - j = difference`.
    pub fn is_valid_evil(&self) -> bool {
        self.shape_ok() && ones_parity(&self.j) == 0 && ones_parity(&self.ell) == 0
    }

    fn shape_ok(&self) -> bool {
        self.j < self.ell && self.ell <= self.bound && &self.ell - &self.j == self.difference
    }
}

// ---------------------------------------------------------------------------
// brute-force kernel
// ---------------------------------------------------------------------------

/// Residue scan state. Values that fit a machine word use a stamped direct
/// table; anything else falls back to exact big-integer residues.
struct Scanner {
    small: Option<Vec<u64>>,
    big: Vec<Int>,
    stamps: Vec<u64>,
    stamp: u64,
}

impl Scanner {
    fn new() -> Self {
        Scanner { small: Some(Vec::new()), big: Vec::new(), stamps: Vec::new(), stamp: 0 }
    }

    fn from_values(values: &[Int]) -> Self {
        let mut s = Scanner::new();
        for v in values {
            s.push(v.clone());
        }
        s
    }

    fn push(&mut self, v: Int) {
        if let Some(small) = &mut self.small {
            match v.to_u64() {
                Some(w) => small.push(w),
                None => self.small = None,
            }
        }
        self.big.push(v);
    }

    fn len(&self) -> usize {
        self.big.len()
    }

    fn pop(&mut self) {
        self.big.pop();
        if let Some(small) = &mut self.small {
            small.pop();
        }
    }

    fn discriminates(&mut self, m: &Int) -> bool {
        if let (Some(small), Some(m)) = (&self.small, m.to_u64()) {
            self.stamp += 1;
            let mu = m as usize;
            if self.stamps.len() < mu {
                self.stamps.resize(mu, 0);
            }
            for &v in small {
                let r = (v % m) as usize;
                if self.stamps[r] == self.stamp {
                    return false;
                }
                self.stamps[r] = self.stamp;
            }
            true
        } else {
            let mut seen = HashSet::with_capacity(self.big.len());
            for v in &self.big {
                if !seen.insert(v.mod_floor(m)) {
                    return false;
                }
            }
            true
        }
    }

    /// Least `m >= lo` that discriminates the stored values.
    fn minimal_from(&mut self, lo: Int) -> Int {
        let mut m = lo.max(Int::one());
        while !self.discriminates(&m) {
            m += 1;
        }
        m
    }
}

fn ensure_distinct(values: &[Int]) -> Result<(), DiscError> {
    let mut seen = HashSet::with_capacity(values.len());
    for v in values {
        if !seen.insert(v) {
            return Err(DiscError::DuplicateValues);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

/// True iff the values are pairwise incongruent mod `m`.
pub fn discriminates(values: &[Int], m: &Int) -> Result<bool, DiscError> {
    if m < &Int::one() {
        return Err(DiscError::InvalidModulus);
    }
    ensure_distinct(values)?;
    Ok(Scanner::from_values(values).discriminates(m))
}

/// The least positive integer that discriminates the given distinct values.
///
/// The search starts at `m = values.len()`: fewer residues cannot separate
/// that many values.
pub fn discriminator(values: &[Int]) -> Result<Int, DiscError> {
    if values.is_empty() {
        return Err(DiscError::EmptyInput);
    }
    ensure_distinct(values)?;
    Ok(Scanner::from_values(values).minimal_from(Int::from(values.len())))
}

/// The profile `D_s(0..=n_max)`, computed incrementally: the scan for index
/// `n` starts at `max(D_s(n-1), n)`.
pub fn profile(s: &Sequence, n_max: u64) -> Result<DiscriminatorProfile, DiscError> {
    let mut values = Vec::with_capacity(n_max as usize + 1);
    values.push(Int::zero());
    let mut scanner = Scanner::new();
    let mut seen = HashSet::new();
    let mut prev = Int::one();
    for n in 1..=n_max {
        let term = s.try_term(n - 1).map_err(DiscError::Sequence)?;
        if !seen.insert(term.clone()) {
            return Err(DiscError::DuplicateValues);
        }
        scanner.push(term);
        let d = scanner.minimal_from(prev.clone().max(Int::from(n)));
        prev = d.clone();
        values.push(d);
    }
    Ok(DiscriminatorProfile { values })
}

/// `D_od(n) = 2^ceil(log2 n)`, computed by bit length.
pub fn closed_form_odious(n: u64) -> Result<Int, DiscError> {
    if n == 0 {
        return Err(DiscError::OutOfDomain { op: "closed_form_odious", detail: "n = 0".into() });
    }
    Ok(Int::one() << bit_length(n - 1))
}

/// The three-case closed form for `D_ev(n)`. The `n <= 4` values are frozen
/// from brute force.
pub fn closed_form_evil(n: u64) -> Result<Int, DiscError> {
    if n == 0 {
        return Err(DiscError::OutOfDomain { op: "closed_form_evil", detail: "n = 0".into() });
    }
    Ok(match n {
        1 => Int::one(),
        2 => Int::from(2),
        3 | 4 => Int::from(4),
        _ => {
            let m = n - 1;
            if m.is_power_of_two() {
                let i = bit_length(m) - 1;
                if i % 2 == 1 {
                    (Int::one() << (i + 1)) - 3
                } else {
                    (Int::one() << (i + 1)) - 1
                }
            } else {
                Int::one() << bit_length(n - 1)
            }
        }
    })
}

/// The squares discriminator: table values for `n <= 4`, then the least
/// `k >= 2n` that is a prime or twice a prime.
pub fn closed_form_squares(n: u64) -> Result<Int, DiscError> {
    match n {
        0 => Err(DiscError::OutOfDomain { op: "closed_form_squares", detail: "n = 0".into() }),
        1 => Ok(Int::one()),
        2 => Ok(Int::from(2)),
        3 => Ok(Int::from(6)),
        4 => Ok(Int::from(9)),
        _ => {
            let mut k = 2 * n;
            loop {
                if is_prime_u64(k) || (k % 2 == 0 && is_prime_u64(k / 2)) {
                    return Ok(Int::from(k));
                }
                k += 1;
            }
        }
    }
}

fn bit_length(n: u64) -> u32 {
    u64::BITS - n.leading_zeros()
}

fn nat_bit(n: &Nat, pos: u64) -> bool {
    ((n >> pos) & Nat::one()).is_one()
}

fn nat_bit_length(n: &Nat) -> u64 {
    n.bits()
}

/// Two odious numbers `1 <= j < ell <= 2^i` with `ell - j = m`, built by the
/// three-case construction on the binary expansion of `m`.
pub fn odious_witness(m: &Nat, i: u32) -> Result<WitnessPair, DiscError> {
    let bound = Nat::one() << i;
    if m.is_zero() || *m >= bound {
        return Err(DiscError::OutOfDomain {
            op: "odious_witness",
            detail: format!("m = {m} not in [1, 2^{i})"),
        });
    }
    let msb = nat_bit_length(m) - 1;
    // a "01" factor: a one bit with a zero strictly above it, inside the string
    let factor = (0..msb).find(|&q| nat_bit(m, q) && !nat_bit(m, q + 1));
    let (j, ell) = match factor {
        None => {
            // w = 1^a 0^b: take ell = 2^(a+b), j = 2^b
            let b = (0..=msb).find(|&q| nat_bit(m, q)).expect("m is nonzero");
            (Nat::one() << b, Nat::one() << (msb + 1))
        }
        Some(p) => {
            // w = x01y; x11y stays odious when |xy| has odd weight,
            // x10y when even
            let ones_xy = m.count_ones() - 1;
            let j = if ones_xy % 2 == 1 { Nat::one() << (p + 1) } else { Nat::one() << p };
            let ell = m + &j;
            (j, ell)
        }
    };
    Ok(WitnessPair { j, ell, difference: m.clone(), bound })
}

/// Two evil numbers `0 <= j < ell <= 2^i + 1` with `ell - j = m`, by the
/// seven-case construction; cases are tried in order and the first match wins.
pub fn evil_witness(m: &Nat, i: u32) -> Result<WitnessPair, DiscError> {
    if i < 3 {
        return Err(DiscError::OutOfDomain {
            op: "evil_witness",
            detail: format!("i = {i} must be at least 3"),
        });
    }
    let limit = (Nat::one() << i) - Nat::from(3u32);
    if m.is_zero() || *m >= limit {
        return Err(DiscError::OutOfDomain {
            op: "evil_witness",
            detail: format!("m = {m} not in [1, 2^{i} - 3)"),
        });
    }
    let bound = (Nat::one() << i) + Nat::one();
    let pack = |j: Nat, ell: Nat| WitnessPair { j, ell, difference: m.clone(), bound: bound.clone() };

    // case 1: m itself is evil
    if ones_parity(m) == 0 {
        return Ok(pack(Nat::zero(), m.clone()));
    }
    let msb = nat_bit_length(m) - 1;
    // case 2: no zeros, m = 2^a - 1
    if *m == (Nat::one() << (msb + 1)) - Nat::one() {
        if m.is_one() {
            return Ok(pack(Nat::from(5u32), Nat::from(6u32)));
        }
        return Ok(pack(Nat::from(3u32), (Nat::one() << (msb + 1)) + Nat::from(2u32)));
    }
    let b = (0..=msb).find(|&q| nat_bit(m, q)).expect("m is nonzero");
    // case 3: w = 1^a 0^b with b >= 1
    if b >= 1 && (m >> b) == (Nat::one() << (msb - b + 1)) - Nat::one() {
        return Ok(pack((Nat::one() << b) + Nat::one(), (Nat::one() << (msb + 1)) + Nat::one()));
    }
    let zeros: Vec<u64> = (0..msb).filter(|&q| !nat_bit(m, q)).collect();
    if zeros.len() == 1 {
        let z = zeros[0];
        // case 4: w = 1^a 01
        if z == 1 {
            return Ok(pack(Nat::from(5u32), (Nat::one() << (msb + 1)) + Nat::from(2u32)));
        }
        // case 5: w = 1^a 0 1^b with b >= 2
        return Ok(pack((Nat::one() << z) + Nat::from(2u32), (Nat::one() << (msb + 1)) + Nat::one()));
    }
    // case 6: w = x01y0z -- a "01" factor with a further zero below it
    for p in (0..msb).rev() {
        if nat_bit(m, p) && !nat_bit(m, p + 1) {
            for q in (0..p).rev() {
                if !nat_bit(m, q) {
                    let j = (Nat::one() << p) + (Nat::one() << q);
                    let ell = m + &j;
                    return Ok(pack(j, ell));
                }
            }
        }
    }
    // case 7: w = x0y01z -- a zero with a "01" factor further below
    for r in (0..msb).rev() {
        if !nat_bit(m, r) {
            for q in (0..r.saturating_sub(1)).rev() {
                if nat_bit(m, q) && !nat_bit(m, q + 1) {
                    let j = (Nat::one() << r) + (Nat::one() << q);
                    let ell = m + &j;
                    return Ok(pack(j, ell));
                }
            }
        }
    }
    unreachable!("the seven cases cover every binary form of m")
}

/// Greedily build the lexicographically least increasing sequence of
/// positive integers whose discriminator is `2^ceil(log2 n)` at every prefix
/// length. Each step searches up to `4 * (j + 1)`; a dead end is reported
/// rather than silently mis-answered.
pub fn lex_least_power_discriminator(n: u64) -> Result<Vec<Int>, DiscError> {
    if n == 0 {
        return Err(DiscError::OutOfDomain {
            op: "lex_least_power_discriminator",
            detail: "n = 0".into(),
        });
    }
    let mut terms: Vec<Int> = Vec::with_capacity(n as usize);
    let mut scanner = Scanner::new();
    let mut prev_d = Int::zero();
    for j in 0..n {
        let target = closed_form_odious(j + 1)?;
        let lo = terms.last().map_or(Int::one(), |t| t + 1);
        let cap = Int::from(4 * (j + 1));
        let mut candidate = lo;
        let mut found = None;
        while candidate <= cap {
            scanner.push(candidate.clone());
            let lower = prev_d.clone().max(Int::from(j + 1));
            let d = scanner.minimal_from(lower);
            if d == target {
                found = Some(candidate.clone());
                break;
            }
            scanner.pop();
            candidate += 1;
        }
        match found {
            Some(x) => {
                prev_d = target;
                terms.push(x);
            }
            None => return Err(DiscError::ConstructionFailure { index: j }),
        }
    }
    Ok(terms)
}

/// `E(n) = F(n) + B(n)` with `A = D mod 2`, `F = A·D`, `B = 2 - 2A` for the
/// squares discriminator `D`; equals `D` when `D` is odd and `2` otherwise.
pub fn squares_e(n: u64) -> Result<Int, DiscError> {
    if n <= 4 {
        return Err(DiscError::OutOfDomain {
            op: "squares_e",
            detail: format!("n = {n} must exceed 4"),
        });
    }
    let d = closed_form_squares(n)?;
    let a = d.mod_floor(&Int::from(2));
    Ok(&a * &d + (Int::from(2) - 2 * a))
}
