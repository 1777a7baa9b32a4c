//! Exact arithmetic and base-k digit utilities shared by every other module.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Int, Nat, Rat};

/// Errors from digit and primality utilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumError {
    /// The base was smaller than 2.
    InvalidBase { base: u32 },
    /// A digit fell outside `[0, base)`.
    InvalidDigit { digit: u32, base: u32 },
}

impl fmt::Display for NumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumError::InvalidBase { base } => write!(f, "invalid base {base}: must be at least 2"),
            NumError::InvalidDigit { digit, base } => {
                write!(f, "invalid digit {digit} for base {base}")
            }
        }
    }
}

impl std::error::Error for NumError {}

/// Canonical base-k representation of a nonnegative integer.
///
/// Digits are stored most significant first with no leading zeros; zero is
/// the empty digit string, so the string and value maps are mutually inverse
/// on canonical forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digits {
    base: u32,
    digits: Vec<u32>,
}

impl Digits {
    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The value of this digit string, `Σ digit_i · base^position`.
    pub fn value(&self) -> Nat {
        from_base_k(&self.digits, self.base).expect("canonical digits are in range")
    }
}

impl fmt::Display for Digits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.base <= 10 {
            for d in &self.digits {
                write!(f, "{d}")?;
            }
        } else {
            for (pos, d) in self.digits.iter().enumerate() {
                if pos > 0 {
                    write!(f, ".")?;
                }
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

/// Canonical base-k representation of `n`, most significant digit first.
///
/// `n = 0` maps to the empty digit string.
pub fn to_base_k(n: &Nat, k: u32) -> Result<Digits, NumError> {
    if k < 2 {
        return Err(NumError::InvalidBase { base: k });
    }
    let mut digits = Vec::new();
    let mut rest = n.clone();
    let base = BigUint::from(k);
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(&base);
        digits.push(r.to_u32().expect("remainder below a u32 base"));
        rest = q;
    }
    digits.reverse();
    Ok(Digits { base: k, digits })
}

/// Value of a digit string as a base-k number. Leading zeros are permitted;
/// the value function is total on digit strings.
pub fn from_base_k(digits: &[u32], k: u32) -> Result<Nat, NumError> {
    if k < 2 {
        return Err(NumError::InvalidBase { base: k });
    }
    let base = BigUint::from(k);
    let mut value = Nat::zero();
    for &d in digits {
        if d >= k {
            return Err(NumError::InvalidDigit { digit: d, base: k });
        }
        value = value * &base + BigUint::from(d);
    }
    Ok(value)
}

/// Number of ones in the binary expansion of `n`, reduced mod 2.
pub fn ones_parity(n: &Nat) -> u8 {
    (n.count_ones() & 1) as u8
}

/// `ones_parity` specialised to machine words; used by the hot generators.
#[inline]
pub fn parity_u64(n: u64) -> u8 {
    (n.count_ones() & 1) as u8
}

/// Deterministic primality by trial division. Desk-scale inputs only.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Primality for unbounded inputs; falls back to big-integer trial division
/// when the value does not fit a machine word.
pub fn is_prime(n: &Nat) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let two = BigUint::from(2u32);
    if n.is_even() {
        return false;
    }
    let mut d = BigUint::from(3u32);
    while &d * &d <= *n {
        if n.is_multiple_of(&d) {
            return false;
        }
        d += &two;
    }
    true
}

/// Parse a rational from `"p"` or `"p/q"` decimal notation. Returns `None`
/// for malformed input or a zero denominator.
pub fn parse_rational(text: &str) -> Option<Rat> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (text, None),
    };
    let num: Int = num.parse().ok()?;
    let den: Int = match den {
        Some(d) => d.parse().ok()?,
        None => Int::one(),
    };
    if den.is_zero() {
        return None;
    }
    Some(Rat::new(num, den))
}

/// Render a rational as `"p"` or `"p/q"`, the inverse of [`parse_rational`]
/// on reduced forms.
pub fn format_rational(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True when the rational is an integer and nonnegative.
pub fn rat_is_nat(r: &Rat) -> bool {
    r.is_integer() && !r.numer().is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn nat(n: u64) -> Nat {
        Nat::from(n)
    }

    #[test]
    fn canonical_forms() {
        assert!(to_base_k(&nat(0), 2).unwrap().is_empty());
        assert_eq!(to_base_k(&nat(26), 3).unwrap().digits(), &[2, 2, 2]);
        assert_eq!(to_base_k(&nat(5), 2).unwrap().digits(), &[1, 0, 1]);
        assert_eq!(to_base_k(&nat(5), 2).unwrap().to_string(), "101");
    }

    #[test]
    fn values_and_leading_zeros() {
        assert_eq!(from_base_k(&[1, 1, 1], 2).unwrap(), nat(7));
        assert_eq!(from_base_k(&[], 3).unwrap(), nat(0));
        assert_eq!(from_base_k(&[0, 1, 0, 1], 2).unwrap(), nat(5));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            to_base_k(&nat(3), 1).unwrap_err(),
            NumError::InvalidBase { base: 1 }
        );
        assert_eq!(
            from_base_k(&[2, 0], 2).unwrap_err(),
            NumError::InvalidDigit { digit: 2, base: 2 }
        );
    }

    #[test]
    fn parity_examples() {
        assert_eq!(ones_parity(&nat(0)), 0);
        assert_eq!(ones_parity(&nat(3)), 0);
        assert_eq!(ones_parity(&nat(7)), 1);
    }

    #[test]
    fn prime_examples() {
        assert!(is_prime_u64(2));
        assert!(!is_prime_u64(1));
        assert!(is_prime_u64(10007));
    }

    #[test]
    fn prime_agrees_with_sieve_below_1e6() {
        let limit = 1_000_000usize;
        let mut composite = vec![false; limit];
        let mut p = 2usize;
        while p * p < limit {
            if !composite[p] {
                let mut q = p * p;
                while q < limit {
                    composite[q] = true;
                    q += p;
                }
            }
            p += 1;
        }
        for n in 0..limit {
            let sieve_says = n >= 2 && !composite[n];
            assert_eq!(is_prime_u64(n as u64), sieve_says, "n = {n}");
        }
    }

    #[test]
    fn rational_round_trip() {
        for text in ["0", "-3", "9/2", "-15/2", "11/6"] {
            let r = parse_rational(text).unwrap();
            assert_eq!(format_rational(&r), text);
        }
        assert_eq!(parse_rational("4/6"), Some(Rat::new(Int::from(2), Int::from(3))));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("1.5").is_none());
        assert!(parse_rational("x").is_none());
    }

    proptest! {
        #[test]
        fn digit_round_trip(n in 0u64..1 << 16, k in prop::sample::select(vec![2u32, 3, 10])) {
            let d = to_base_k(&nat(n), k).unwrap();
            prop_assert_eq!(d.value(), nat(n));
            if n > 0 {
                prop_assert_ne!(d.digits()[0], 0);
            }
        }

        #[test]
        fn parity_recurrences(n in 0u64..1 << 16) {
            prop_assert_eq!(ones_parity(&nat(2 * n)), ones_parity(&nat(n)));
            prop_assert_eq!(ones_parity(&nat(2 * n + 1)), 1 - ones_parity(&nat(n)));
            prop_assert_eq!(parity_u64(n), ones_parity(&nat(n)));
        }

        #[test]
        fn rational_sum_reduced(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
            let x = Rat::new(Int::from_i64(a).unwrap(), Int::from_i64(b).unwrap());
            let y = Rat::new(Int::from_i64(c).unwrap(), Int::from_i64(d).unwrap());
            let s = &x + &y;
            prop_assert_eq!(s.numer().gcd(s.denom()), Int::one());
            prop_assert!(s.denom() > &Int::from(0));
        }
    }
}
