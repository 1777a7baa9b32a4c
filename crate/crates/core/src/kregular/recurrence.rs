//! Recurrence systems `s(k^e n + i) = Σ_j a_j s(k^(e_j) n + i_j) + c` with
//! explicit base values, their memoized evaluation, exact verification
//! against term data, and conversion to a linear representation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};

use crate::linalg::Matrix;
use crate::{Int, Nat, Rat};

use super::rep::{LinearRep, LinearRepresentation, RepError};

/// A residue class `k^level · n + offset` of indices, `offset < k^level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassRef {
    pub level: u32,
    pub offset: u64,
}

impl ClassRef {
    pub fn new(level: u32, offset: u64) -> Self {
        ClassRef { level, offset }
    }

    /// `k^level`, the modulus of the class; `None` on overflow.
    pub fn modulus(&self, k: u32) -> Option<u64> {
        u64::from(k).checked_pow(self.level)
    }

    /// The d-th child class one level deeper: indices `n ≡ offset + d·k^level
    /// (mod k^(level+1))`.
    pub fn child(&self, k: u32, d: u32) -> Option<ClassRef> {
        let m = self.modulus(k)?;
        let offset = m.checked_mul(u64::from(d))?.checked_add(self.offset)?;
        Some(ClassRef { level: self.level + 1, offset })
    }

    /// Render as the class expression inside `f(...)`, e.g. `8n+3`.
    pub fn render(&self, k: u32) -> String {
        let m = self.modulus(k).expect("class modulus fits u64");
        let coeff = if m == 1 { String::new() } else { m.to_string() };
        if self.offset == 0 {
            format!("{coeff}n")
        } else {
            format!("{coeff}n+{}", self.offset)
        }
    }
}

/// One summand `coeff · s(class)` on the right-hand side of a relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rat,
    pub class: ClassRef,
}

/// A single relation: `s(target) = Σ terms + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub target: ClassRef,
    pub terms: Vec<Term>,
    pub constant: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecurrenceError {
    /// Base smaller than 2.
    InvalidBase { base: u32 },
    /// A class offset at or above `k^level`.
    OffsetRange { class: ClassRef },
    /// A right-hand-side term at a level not below its target's level.
    LevelViolation { target: ClassRef, term: ClassRef },
    /// Two relations share a left-hand class.
    DuplicateTarget { class: ClassRef },
    /// A class modulus overflowed the machine-word range.
    ClassTooLarge { level: u32 },
    /// No relation or base value covers an index reached during descent.
    Underdetermined { index: Nat },
    /// A rational combination failed to land on an integer.
    NonIntegerValue { index: Nat, value: Rat },
    /// The term list handed to verification was empty.
    EmptyTerms,
    /// Basis closure for the representation construction did not terminate
    /// within the cap.
    BasisExplosion { cap: usize },
    /// Representation construction failed downstream.
    Rep(RepError),
}

impl fmt::Display for RecurrenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecurrenceError::InvalidBase { base } => write!(f, "invalid base {base}"),
            RecurrenceError::OffsetRange { class } => write!(
                f,
                "offset {} is out of range for level {}",
                class.offset, class.level
            ),
            RecurrenceError::LevelViolation { target, term } => write!(
                f,
                "term level {} must be below target level {}",
                term.level, target.level
            ),
            RecurrenceError::DuplicateTarget { class } => {
                write!(f, "duplicate relation for a left-hand class at level {}", class.level)
            }
            RecurrenceError::ClassTooLarge { level } => {
                write!(f, "class modulus k^{level} does not fit a machine word")
            }
            RecurrenceError::Underdetermined { index } => {
                write!(f, "index {index} is not determined by the system")
            }
            RecurrenceError::NonIntegerValue { index, value } => {
                write!(f, "index {index} evaluates to the non-integer {value}")
            }
            RecurrenceError::EmptyTerms => write!(f, "term data must be nonempty"),
            RecurrenceError::BasisExplosion { cap } => {
                write!(f, "representation basis exceeded {cap} classes")
            }
            RecurrenceError::Rep(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RecurrenceError {}

impl From<RepError> for RecurrenceError {
    fn from(e: RepError) -> Self {
        RecurrenceError::Rep(e)
    }
}

/// A finite system of cross-residue-class recurrences plus base values.
///
/// Relations and their terms are kept in canonical `(level, offset)` order,
/// so structural equality is order-insensitive on the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceSystem {
    k: u32,
    name: String,
    relations: Vec<Relation>,
    base_values: BTreeMap<Nat, Int>,
}

impl RecurrenceSystem {
    pub fn new(
        k: u32,
        name: impl Into<String>,
        relations: Vec<Relation>,
        base_values: BTreeMap<Nat, Int>,
    ) -> Result<Self, RecurrenceError> {
        if k < 2 {
            return Err(RecurrenceError::InvalidBase { base: k });
        }
        let mut relations = relations;
        for rel in &mut relations {
            let modulus = rel
                .target
                .modulus(k)
                .ok_or(RecurrenceError::ClassTooLarge { level: rel.target.level })?;
            if rel.target.offset >= modulus {
                return Err(RecurrenceError::OffsetRange { class: rel.target });
            }
            for term in &rel.terms {
                if term.class.level >= rel.target.level {
                    return Err(RecurrenceError::LevelViolation {
                        target: rel.target,
                        term: term.class,
                    });
                }
                let m = term
                    .class
                    .modulus(k)
                    .ok_or(RecurrenceError::ClassTooLarge { level: term.class.level })?;
                if term.class.offset >= m {
                    return Err(RecurrenceError::OffsetRange { class: term.class });
                }
            }
            // canonical term order with duplicate classes folded together
            rel.terms.sort_by_key(|t| t.class);
            let mut folded: Vec<Term> = Vec::with_capacity(rel.terms.len());
            for term in rel.terms.drain(..) {
                match folded.last_mut() {
                    Some(last) if last.class == term.class => {
                        last.coeff = last.coeff.clone() + term.coeff;
                    }
                    _ => folded.push(term),
                }
            }
            folded.retain(|t| !t.coeff.is_zero());
            rel.terms = folded;
        }
        relations.sort_by_key(|r| r.target);
        for pair in relations.windows(2) {
            if pair[0].target == pair[1].target {
                return Err(RecurrenceError::DuplicateTarget { class: pair[0].target });
            }
        }
        Ok(RecurrenceSystem { k, name: name.into(), relations, base_values })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn base_values(&self) -> &BTreeMap<Nat, Int> {
        &self.base_values
    }

    pub fn set_base_value(&mut self, index: Nat, value: Int) {
        self.base_values.insert(index, value);
    }

    /// The relation matching `n`'s residue class at the highest applicable
    /// level, along with its index in canonical order.
    pub fn relation_for(&self, n: &Nat) -> Option<(usize, &Relation)> {
        let mut best: Option<(usize, &Relation)> = None;
        for (idx, rel) in self.relations.iter().enumerate() {
            let modulus = rel.target.modulus(self.k).expect("validated modulus");
            if (n % Nat::from(modulus)).to_u64() == Some(rel.target.offset)
                && best.map_or(true, |(_, b)| rel.target.level > b.target.level)
            {
                best = Some((idx, rel));
            }
        }
        best
    }

    /// Indices below `bound` that the relations plus base values do not
    /// determine, computed as a fixpoint.
    pub fn underdetermined_below(&self, bound: u64) -> Vec<u64> {
        let size = usize::try_from(bound).expect("bound fits usize");
        let mut determined = vec![false; size];
        for idx in self.base_values.keys() {
            if let Some(i) = idx.to_u64().filter(|&i| i < bound) {
                determined[i as usize] = true;
            }
        }
        // per-index applicable relation, highest level first
        let relation_at = |idx: u64| -> Option<&Relation> {
            let mut best: Option<&Relation> = None;
            for rel in &self.relations {
                let m = rel.target.modulus(self.k).expect("validated modulus");
                if idx % m == rel.target.offset
                    && best.map_or(true, |b| rel.target.level > b.target.level)
                {
                    best = Some(rel);
                }
            }
            best
        };
        let mut changed = true;
        while changed {
            changed = false;
            for idx in 0..bound {
                if determined[idx as usize] {
                    continue;
                }
                let Some(rel) = relation_at(idx) else { continue };
                let modulus = rel.target.modulus(self.k).expect("validated modulus");
                let n = (idx - rel.target.offset) / modulus;
                let all_known = rel.terms.iter().all(|t| {
                    let m = t.class.modulus(self.k).expect("validated modulus");
                    match m.checked_mul(n).and_then(|v| v.checked_add(t.class.offset)) {
                        Some(r) if r < bound => determined[r as usize],
                        _ => false,
                    }
                });
                if all_known {
                    determined[idx as usize] = true;
                    changed = true;
                }
            }
        }
        (0..bound).filter(|&i| !determined[i as usize]).collect()
    }
}

/// Memoized top-down evaluator. The memo table is per-instance, so two
/// evaluators never share state.
pub struct Evaluator<'a> {
    system: &'a RecurrenceSystem,
    memo: HashMap<Nat, Int>,
    in_progress: HashSet<Nat>,
}

impl<'a> Evaluator<'a> {
    pub fn new(system: &'a RecurrenceSystem) -> Self {
        Evaluator { system, memo: HashMap::new(), in_progress: HashSet::new() }
    }

    pub fn eval(&mut self, n: &Nat) -> Result<Int, RecurrenceError> {
        if let Some(v) = self.system.base_values.get(n) {
            return Ok(v.clone());
        }
        if let Some(v) = self.memo.get(n) {
            return Ok(v.clone());
        }
        if !self.in_progress.insert(n.clone()) {
            return Err(RecurrenceError::Underdetermined { index: n.clone() });
        }
        let result = self.eval_uncached(n);
        self.in_progress.remove(n);
        if let Ok(v) = &result {
            self.memo.insert(n.clone(), v.clone());
        }
        result
    }

    fn eval_uncached(&mut self, n: &Nat) -> Result<Int, RecurrenceError> {
        let Some((_, rel)) = self.system.relation_for(n) else {
            return Err(RecurrenceError::Underdetermined { index: n.clone() });
        };
        let rel = rel.clone();
        let modulus = rel.target.modulus(self.system.k).expect("validated modulus");
        let m = (n - Nat::from(rel.target.offset)) / Nat::from(modulus);
        let mut acc = rel.constant.clone();
        for term in &rel.terms {
            let tm = term.class.modulus(self.system.k).expect("validated modulus");
            let idx = &m * Nat::from(tm) + Nat::from(term.class.offset);
            let value = self.eval(&idx)?;
            acc += &term.coeff * Rat::from(value);
        }
        if !acc.is_integer() {
            return Err(RecurrenceError::NonIntegerValue { index: n.clone(), value: acc });
        }
        Ok(acc.to_integer())
    }
}

/// One-shot evaluation with a fresh memo table.
pub fn eval_recurrence(system: &RecurrenceSystem, n: &Nat) -> Result<Int, RecurrenceError> {
    Evaluator::new(system).eval(n)
}

/// A mismatch found while checking a relation against term data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index of the relation in the system's canonical order.
    pub relation: usize,
    pub n: u64,
    /// Right-hand side computed from the data.
    pub expected: Rat,
    /// The data value at the target index.
    pub actual: Int,
}

/// Outcome of checking every relation instance that fits in the data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    pub checked_count: u64,
    pub violations: Vec<Violation>,
    /// Instances whose right-hand side is not an integer; always also
    /// violations.
    pub integrality_failures: Vec<(usize, u64)>,
}

impl RelationReport {
    pub fn verified(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every relation exactly against `terms[0..=N]`, never evaluating
/// outside the supplied data: an instance is checked only when the target
/// index and every referenced index fall within range.
pub fn verify_relations(
    system: &RecurrenceSystem,
    terms: &[Int],
) -> Result<RelationReport, RecurrenceError> {
    if terms.is_empty() {
        return Err(RecurrenceError::EmptyTerms);
    }
    let n_max = (terms.len() - 1) as u64;
    let mut report = RelationReport {
        checked_count: 0,
        violations: Vec::new(),
        integrality_failures: Vec::new(),
    };
    for (ridx, rel) in system.relations().iter().enumerate() {
        let modulus = rel.target.modulus(system.k()).expect("validated modulus");
        let mut n = 0u64;
        loop {
            let Some(target) = modulus.checked_mul(n).and_then(|v| v.checked_add(rel.target.offset))
            else {
                break;
            };
            if target > n_max {
                break;
            }
            let refs: Option<Vec<u64>> = rel
                .terms
                .iter()
                .map(|t| {
                    let m = t.class.modulus(system.k()).expect("validated modulus");
                    m.checked_mul(n)
                        .and_then(|v| v.checked_add(t.class.offset))
                        .filter(|&r| r <= n_max)
                })
                .collect();
            if let Some(refs) = refs {
                report.checked_count += 1;
                let mut rhs = rel.constant.clone();
                for (term, &r) in rel.terms.iter().zip(&refs) {
                    rhs += &term.coeff * Rat::from(terms[r as usize].clone());
                }
                let lhs = &terms[target as usize];
                if rhs != Rat::from(lhs.clone()) {
                    if !rhs.is_integer() {
                        report.integrality_failures.push((ridx, n));
                    }
                    report.violations.push(Violation {
                        relation: ridx,
                        n,
                        expected: rhs,
                        actual: lhs.clone(),
                    });
                }
            }
            n += 1;
        }
    }
    Ok(report)
}

const BASIS_CAP: usize = 4096;

/// Build a linear representation from a recurrence system by closing the
/// kernel basis under digit transitions and rewriting higher classes through
/// the relations. Base values supply the output vector, so the system must
/// determine every basis offset.
pub fn rep_from_system(system: &RecurrenceSystem) -> Result<LinearRepresentation, RecurrenceError> {
    let k = system.k();
    // phase 1: discover the basis
    let mut basis: Vec<ClassRef> = vec![ClassRef::new(0, 0)];
    let mut seen: HashSet<ClassRef> = basis.iter().copied().collect();
    let mut cursor = 0;
    while cursor < basis.len() {
        let class = basis[cursor];
        cursor += 1;
        for d in 0..k {
            let child = class
                .child(k, d)
                .ok_or(RecurrenceError::ClassTooLarge { level: class.level + 1 })?;
            let mut stack = vec![child];
            while let Some(c) = stack.pop() {
                if seen.contains(&c) {
                    continue;
                }
                match rewriting_relation(system, c) {
                    Some(rel) => {
                        for t in rewrite_classes(k, c, rel) {
                            stack.push(t);
                        }
                    }
                    None => {
                        if basis.len() >= BASIS_CAP {
                            return Err(RecurrenceError::BasisExplosion { cap: BASIS_CAP });
                        }
                        seen.insert(c);
                        basis.push(c);
                    }
                }
            }
        }
    }
    let index_of: HashMap<ClassRef, usize> =
        basis.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let rank = basis.len() + 1; // trailing constant component
    // phase 2: transition matrices over the frozen basis
    let mut mu = Vec::with_capacity(k as usize);
    for d in 0..k {
        let mut mat = Matrix::zeros(rank, rank);
        for (row, class) in basis.iter().enumerate() {
            let child = class.child(k, d).expect("validated in phase 1");
            let (combo, constant) = expand_over_basis(system, child, &index_of)?;
            for (col, coeff) in combo {
                mat.set(row, col, coeff);
            }
            mat.set(row, rank - 1, constant);
        }
        mat.set(rank - 1, rank - 1, Rat::one());
        mu.push(mat);
    }
    let mut u = vec![Rat::zero(); rank];
    u[0] = Rat::one();
    let mut w = Vec::with_capacity(rank);
    let mut evaluator = Evaluator::new(system);
    for class in &basis {
        let value = evaluator.eval(&Nat::from(class.offset))?;
        w.push(Rat::from(value));
    }
    w.push(Rat::one());
    LinearRep::new(k, u, mu, w).map_err(RecurrenceError::from)
}

/// Highest-level relation able to rewrite `class`, if any.
fn rewriting_relation(system: &RecurrenceSystem, class: ClassRef) -> Option<&Relation> {
    let k = system.k();
    let mut best: Option<&Relation> = None;
    for rel in system.relations() {
        if rel.target.level > class.level {
            continue;
        }
        let m = rel.target.modulus(k).expect("validated modulus");
        if class.offset % m == rel.target.offset
            && best.map_or(true, |b| rel.target.level > b.target.level)
        {
            best = Some(rel);
        }
    }
    best
}

/// The classes produced by rewriting `class` through `rel` (coefficients are
/// recomputed in `expand_over_basis`; phase 1 only needs reachability).
fn rewrite_classes(k: u32, class: ClassRef, rel: &Relation) -> Vec<ClassRef> {
    let m = rel.target.modulus(k).expect("validated modulus");
    let q = (class.offset - rel.target.offset) / m;
    rel.terms
        .iter()
        .map(|t| {
            let tm = t.class.modulus(k).expect("validated modulus");
            ClassRef::new(
                t.class.level + class.level - rel.target.level,
                tm * q + t.class.offset,
            )
        })
        .collect()
}

/// Express `s(class)` as a linear combination over the frozen basis plus a
/// constant, recursing through the relations.
fn expand_over_basis(
    system: &RecurrenceSystem,
    class: ClassRef,
    index_of: &HashMap<ClassRef, usize>,
) -> Result<(Vec<(usize, Rat)>, Rat), RecurrenceError> {
    if let Some(&idx) = index_of.get(&class) {
        return Ok((vec![(idx, Rat::one())], Rat::zero()));
    }
    let rel = rewriting_relation(system, class).ok_or(RecurrenceError::Underdetermined {
        index: Nat::from(class.offset),
    })?;
    let mut acc: HashMap<usize, Rat> = HashMap::new();
    let mut constant = rel.constant.clone();
    let children = rewrite_classes(system.k(), class, rel);
    for (term, child) in rel.terms.iter().zip(children) {
        let (combo, c) = expand_over_basis(system, child, index_of)?;
        constant += &term.coeff * c;
        for (idx, coeff) in combo {
            let entry = acc.entry(idx).or_insert_with(Rat::zero);
            *entry = entry.clone() + &term.coeff * coeff;
        }
    }
    let mut combo: Vec<(usize, Rat)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    combo.sort_by_key(|(idx, _)| *idx);
    Ok((combo, constant))
}
