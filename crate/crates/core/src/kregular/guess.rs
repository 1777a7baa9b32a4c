//! Exact relation guessing: rediscover a recurrence system from term data by
//! solving for rational coefficients class by class.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_traits::Zero;

use crate::linalg::{solve_exact, Matrix, Solve};
use crate::{Int, Nat, Rat};

use super::recurrence::{verify_relations, ClassRef, RecurrenceSystem, Relation, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessConfig {
    /// Levels searched before splitting kicks in.
    pub max_level: u32,
    /// How many extra levels an unresolved class may be split into its
    /// children; 0 disables splitting.
    pub split_depth: u32,
    /// Required row surplus: a class is only solved when the data gives at
    /// least this many rows per unknown.
    pub overdetermination: usize,
    /// Guard on the base-value seeding loop.
    pub base_seed_cap: usize,
}

impl Default for GuessConfig {
    fn default() -> Self {
        GuessConfig { max_level: 3, split_depth: 2, overdetermination: 4, base_seed_cap: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuessError {
    /// Classes that admitted no relation at the split depth limit.
    IncompleteCover { unresolved: Vec<ClassRef> },
    /// The seeding loop failed to make the system well founded.
    SeedLoop { cap: usize },
    /// Term data too short to start at level 1.
    InsufficientData { needed: usize, have: usize },
}

impl fmt::Display for GuessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuessError::IncompleteCover { unresolved } => {
                write!(f, "no relation found for {} class(es):", unresolved.len())?;
                for c in unresolved {
                    write!(f, " (level {}, offset {})", c.level, c.offset)?;
                }
                Ok(())
            }
            GuessError::SeedLoop { cap } => {
                write!(f, "base-value seeding did not converge within {cap} steps")
            }
            GuessError::InsufficientData { needed, have } => {
                write!(f, "need at least {needed} terms, have {have}")
            }
        }
    }
}

impl std::error::Error for GuessError {}

/// Guess a recurrence system for `terms[0..=N]` over base `k`.
///
/// Classes are visited from level 1 upward. For each class the solver looks
/// for exact rational coefficients expressing it over the lower-level kernel
/// classes plus a constant companion, preferring the fewest nonzero terms and
/// then lexicographically earlier classes; a candidate solution is accepted
/// only when it verifies against all supplied data. A class with no relation
/// splits into its k children until the split depth runs out. Emitted base
/// values are seeded greedily until the system determines every input index.
pub fn guess_relations(
    terms: &[Int],
    k: u32,
    config: &GuessConfig,
) -> Result<RecurrenceSystem, GuessError> {
    let needed = (config.overdetermination + 1) * (k as usize + 1);
    if terms.len() < needed {
        return Err(GuessError::InsufficientData { needed, have: terms.len() });
    }
    let data: Vec<Rat> = terms.iter().cloned().map(Rat::from).collect();
    let mut queue: VecDeque<ClassRef> = (0..u64::from(k)).map(|i| ClassRef::new(1, i)).collect();
    let mut relations = Vec::new();
    let mut unresolved = Vec::new();
    let depth_limit = config.max_level + config.split_depth;
    while let Some(class) = queue.pop_front() {
        match solve_class(&data, k, class, config.overdetermination) {
            Some(relation) => relations.push(relation),
            None if class.level < depth_limit => {
                for d in 0..k {
                    queue.push_back(class.child(k, d).expect("desk-scale class levels"));
                }
            }
            None => unresolved.push(class),
        }
    }
    if !unresolved.is_empty() {
        unresolved.sort();
        return Err(GuessError::IncompleteCover { unresolved });
    }
    let mut system = RecurrenceSystem::new(k, "f", relations, BTreeMap::new())
        .expect("solver emits validated relations");
    debug_assert!(verify_relations(&system, terms)
        .map(|r| r.verified())
        .unwrap_or(false));
    // seed base values greedily until every input index is determined
    let bound = terms.len() as u64;
    for _ in 0..config.base_seed_cap {
        let underdetermined = system.underdetermined_below(bound);
        let Some(&first) = underdetermined.first() else {
            return Ok(system);
        };
        system.set_base_value(Nat::from(first), terms[first as usize].clone());
    }
    Err(GuessError::SeedLoop { cap: config.base_seed_cap })
}

/// All kernel classes strictly below `level`, in `(level, offset)` order.
fn candidate_classes(k: u32, level: u32) -> Vec<ClassRef> {
    let mut out = Vec::new();
    for e in 0..level {
        let modulus = u64::from(k).pow(e);
        for i in 0..modulus {
            out.push(ClassRef::new(e, i));
        }
    }
    out
}

/// Find the minimal verified relation for one target class, or `None`.
fn solve_class(
    data: &[Rat],
    k: u32,
    target: ClassRef,
    overdetermination: usize,
) -> Option<Relation> {
    let n_max = (data.len() - 1) as u64;
    let candidates = candidate_classes(k, target.level);
    let ncols = candidates.len() + 1; // trailing constant companion
    let target_modulus = target.modulus(k)?;

    // rows: every n with the target and all candidate indices in range
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    let mut n = 0u64;
    loop {
        let Some(t) = target_modulus.checked_mul(n).and_then(|v| v.checked_add(target.offset))
        else {
            break;
        };
        if t > n_max {
            break;
        }
        let refs: Option<Vec<u64>> = candidates
            .iter()
            .map(|c| {
                let m = c.modulus(k).expect("candidate modulus fits");
                m.checked_mul(n)
                    .and_then(|v| v.checked_add(c.offset))
                    .filter(|&r| r <= n_max)
            })
            .collect();
        match refs {
            Some(refs) => {
                let mut row: Vec<Rat> = refs.iter().map(|&r| data[r as usize].clone()).collect();
                row.push(Rat::one());
                rows.push(row);
                rhs.push(data[t as usize].clone());
            }
            None => break,
        }
        n += 1;
    }
    if rows.len() < overdetermination * ncols {
        return None;
    }
    // quick rejection: if the full-candidate system is inconsistent, no
    // column subset can be consistent either
    if !consistent(&rows, &rhs) {
        return None;
    }
    // minimal support first, then lexicographically earliest column subset
    for size in 0..=ncols {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            if let Some(solution) = try_subset(&rows, &rhs, &combo, overdetermination) {
                return Some(build_relation(target, &candidates, &combo, solution));
            }
            if !next_combination(&mut combo, ncols) {
                break;
            }
        }
    }
    None
}

/// Gaussian consistency check allowing free columns.
fn consistent(rows: &[Vec<Rat>], rhs: &[Rat]) -> bool {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut w: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let nrows = w.len();
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&r| !w[r][col].is_zero()) else {
            continue;
        };
        w.swap(rank, p);
        let pivot = w[rank][col].clone();
        for r in rank + 1..nrows {
            if w[r][col].is_zero() {
                continue;
            }
            let factor = &w[r][col] / &pivot;
            for c in col..=ncols {
                let sub = &factor * &w[rank][c];
                w[r][c] = &w[r][c] - sub;
            }
        }
        rank += 1;
        if rank == nrows {
            return true;
        }
    }
    w.iter().skip(rank).all(|row| row[ncols].is_zero())
}

/// Solve on a 4x-overdetermined row prefix, escalating to all rows when the
/// prefix leaves the subset underdetermined; verify any candidate solution
/// against every row.
fn try_subset(
    rows: &[Vec<Rat>],
    rhs: &[Rat],
    combo: &[usize],
    overdetermination: usize,
) -> Option<Vec<Rat>> {
    let take = |count: usize| -> (Matrix<Rat>, Vec<Rat>) {
        let m = Matrix::from_fn(count, combo.len(), |i, j| rows[i][combo[j]].clone());
        (m, rhs[..count].to_vec())
    };
    let prefix_len = (overdetermination * (combo.len() + 1)).min(rows.len());
    let (a, b) = take(prefix_len);
    let solution = match solve_exact(&a, &b) {
        Solve::Unique(x) => x,
        Solve::Inconsistent => return None,
        Solve::Underdetermined => {
            let (a, b) = take(rows.len());
            match solve_exact(&a, &b) {
                Solve::Unique(x) => return Some(x), // all rows were constraints
                _ => return None,
            }
        }
    };
    // verify on the remaining rows
    for (row, want) in rows.iter().zip(rhs).skip(prefix_len) {
        let mut acc = Rat::zero();
        for (j, &col) in combo.iter().enumerate() {
            if !solution[j].is_zero() && !row[col].is_zero() {
                acc += &solution[j] * &row[col];
            }
        }
        if &acc != want {
            return None;
        }
    }
    Some(solution)
}

fn build_relation(
    target: ClassRef,
    candidates: &[ClassRef],
    combo: &[usize],
    solution: Vec<Rat>,
) -> Relation {
    let mut terms = Vec::new();
    let mut constant = Rat::zero();
    for (&col, coeff) in combo.iter().zip(solution) {
        if coeff.is_zero() {
            continue;
        }
        if col == candidates.len() {
            constant = coeff;
        } else {
            terms.push(Term { coeff, class: candidates[col] });
        }
    }
    Relation { target, terms, constant }
}

/// Advance `combo` to the next size-|combo| subset of `0..n` in
/// lexicographic order; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kregular::eval_recurrence;
    use crate::sequences;

    fn rat(n: i64) -> Rat {
        Rat::from(Int::from(n))
    }

    #[test]
    fn combinations_order() {
        let mut combo = vec![0, 1];
        let mut seen = vec![combo.clone()];
        while next_combination(&mut combo, 4) {
            seen.push(combo.clone());
        }
        assert_eq!(seen, vec![
            vec![0, 1], vec![0, 2], vec![0, 3],
            vec![1, 2], vec![1, 3], vec![2, 3],
        ]);
    }

    #[test]
    fn guesses_identity_sequence() {
        let terms: Vec<Int> = (0..257).map(Int::from).collect();
        let config = GuessConfig { max_level: 1, split_depth: 0, ..GuessConfig::default() };
        let sys = guess_relations(&terms, 2, &config).unwrap();
        assert_eq!(sys.relations().len(), 2);
        // s(2n) = 2 s(n); s(2n+1) = 2 s(n) + 1 via the constant companion
        let even = &sys.relations()[0];
        assert_eq!(even.target, ClassRef::new(1, 0));
        assert_eq!(even.terms.len(), 1);
        assert_eq!(even.terms[0].coeff, rat(2));
        assert_eq!(even.constant, rat(0));
        let odd = &sys.relations()[1];
        assert_eq!(odd.terms[0].coeff, rat(2));
        assert_eq!(odd.constant, rat(1));
        assert_eq!(sys.base_values().len(), 1);
        for n in 0u64..257 {
            assert_eq!(eval_recurrence(&sys, &Nat::from(n)).unwrap(), Int::from(n));
        }
    }

    #[test]
    fn guesses_odious_relations() {
        let terms: Vec<Int> = (0..(1 << 12) + 4).map(sequences::odious).collect();
        let config = GuessConfig { max_level: 2, split_depth: 0, ..GuessConfig::default() };
        let sys = guess_relations(&terms, 2, &config).unwrap();
        // the four shared relations, rediscovered with their exact coefficients
        assert_eq!(sys.relations().len(), 4);
        let rel = &sys.relations()[2]; // target 4n+2
        assert_eq!(rel.target, ClassRef::new(2, 2));
        assert_eq!(rel.terms[0].coeff, Rat::new(Int::from(2), Int::from(3)));
        assert_eq!(rel.terms[1].coeff, Rat::new(Int::from(5), Int::from(3)));
        let report = verify_relations(&sys, &terms).unwrap();
        assert!(report.verified());
        // held-out data beyond the guessing window
        let extended: Vec<Int> = (0..(1 << 13)).map(sequences::odious).collect();
        assert!(verify_relations(&sys, &extended).unwrap().verified());
        let mut ev = crate::kregular::Evaluator::new(&sys);
        for n in 0u64..1 << 12 {
            assert_eq!(ev.eval(&Nat::from(n)).unwrap(), sequences::odious(n));
        }
    }

    #[test]
    fn split_limits_are_reported() {
        // random-ish distinct data admits no relation at any level
        let terms: Vec<Int> = (0u64..512)
            .map(|n| Int::from(n * n * n % 1013 + 2000 * n))
            .collect();
        let config = GuessConfig { max_level: 1, split_depth: 1, ..GuessConfig::default() };
        match guess_relations(&terms, 2, &config) {
            Err(GuessError::IncompleteCover { unresolved }) => {
                assert!(!unresolved.is_empty());
                assert!(unresolved.iter().all(|c| c.level == 2));
            }
            other => panic!("expected incomplete cover, got {other:?}"),
        }
    }

    #[test]
    fn insufficient_data_is_an_error() {
        let terms: Vec<Int> = (0..5).map(Int::from).collect();
        assert!(matches!(
            guess_relations(&terms, 2, &GuessConfig::default()),
            Err(GuessError::InsufficientData { .. })
        ));
    }
}
