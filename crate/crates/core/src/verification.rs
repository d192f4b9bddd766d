//! Maximal-recoverability checks.
//!
//! Two independent routes decide whether a local code is maximally
//! recoverable:
//!
//! * [`verify_mr`] works on the coefficients alone. Puncturing one slot
//!   `e(i)` per group leaves an MDS code exactly when the difference multiset
//!   `T(S, e) = { alpha(i,s) + alpha(i,e(i)) : s != e(i) }` is `h`-wise
//!   independent over GF(2), so each puncturing costs one XOR-sum search.
//! * [`verify_mr_oracle`] builds the parity-check matrix, eliminates the
//!   punctured coordinates by Gaussian elimination over the field, and checks
//!   every `h`-column minor of what is left.
//!
//! Both enumerate puncturing vectors in lexicographic order and report the
//! first failure.

use std::cell::RefCell;
use std::fmt;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::gf2::{FieldDescriptor, FieldElement, FieldError, Subfield};
use crate::linalg::Matrix;
use crate::subsets::{binomial, for_each_combination};
use crate::topology::{build_parity_check, CodeInstance, CodeKind, PuncturingSpace, TopologyError};

/// Default cap on puncturing vectors for the difference-set verifier.
pub const DEFAULT_FAST_BUDGET: u64 = 1 << 24;
/// Default cap on minor checks for the rank-based verifiers.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("expected a {expected} code, got a {got} code")]
    WrongKind { expected: CodeKind, got: CodeKind },
    #[error(
        "exhaustive verification needs {required} checks but the budget is {budget}; \
         raise the budget or verify a random sample of puncturings (--sample N)"
    )]
    BudgetExceeded { required: u128, budget: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Which field the linear combinations range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scalars {
    Binary,
    /// The subfield configured on the ambient field descriptor.
    Subfield,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Independence {
    Independent,
    /// Indices of a smallest dependent sub-multiset (lexicographically first
    /// among those of that size).
    Dependent(Vec<usize>),
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent)
    }

    pub fn witness(&self) -> Option<&[usize]> {
        match self {
            Independence::Independent => None,
            Independence::Dependent(w) => Some(w),
        }
    }
}

/// Whether every sub-multiset of `set` with at most `t` members is linearly
/// independent over the chosen scalars. Repeated elements count separately,
/// so a repeat is a 2-element dependence.
pub fn is_independent(
    field: &FieldDescriptor,
    set: &[FieldElement],
    t: usize,
    over: Scalars,
) -> Result<Independence, VerifyError> {
    match over {
        Scalars::Binary => Ok(binary_independence(set, t)),
        Scalars::Subfield => {
            let sub = field
                .subfield()
                .ok_or(FieldError::NoSubfield(field.degree()))?;
            Ok(subfield_independence(sub, set, t))
        }
    }
}

/// Whether no sub-multiset `T` with `2 <= |T| <= t` sums to zero. A single
/// zero element is allowed.
pub fn is_weakly_independent(set: &[FieldElement], t: usize) -> Independence {
    if t < 2 {
        return Independence::Independent;
    }
    let zeros = set.iter().filter(|a| a.is_zero()).count();
    let nonzero: Vec<FieldElement> = set.iter().copied().filter(|a| !a.is_zero()).collect();
    // Any vanishing T either holds two zeros or, after dropping its zero,
    // still has at least one nonzero member and at most t of them.
    if zeros <= 1 && !has_small_zero_sum(&nonzero, t) {
        return Independence::Independent;
    }
    Independence::Dependent(
        first_zero_sum(set, 2, t).expect("detected dependence must have a witness"),
    )
}

fn binary_independence(set: &[FieldElement], t: usize) -> Independence {
    if !has_small_zero_sum(set, t) {
        return Independence::Independent;
    }
    Independence::Dependent(
        first_zero_sum(set, 1, t).expect("detected dependence must have a witness"),
    )
}

fn xor_of(values: &[FieldElement], idx: &[usize]) -> u64 {
    idx.iter().fold(0, |acc, &i| acc ^ values[i].bits())
}

/// Whether some nonempty sub-multiset of at most `t` members sums to zero.
///
/// Meet in the middle: a vanishing `D` splits into halves `A`, `B` of sizes
/// `ceil(|D|/2)` and `floor(|D|/2)` with equal sums. Conversely two distinct
/// subsets with equal sums and `|A| + |B| <= t` have a nonempty symmetric
/// difference of size at most `t` that vanishes. So it suffices to tabulate
/// sums of all subsets of size up to `ceil(t/2)` (the empty one included) and
/// look for a collision whose sizes add up to at most `t`.
pub(crate) fn has_small_zero_sum(values: &[FieldElement], t: usize) -> bool {
    let t = t.min(values.len());
    if t == 0 {
        return false;
    }
    let half = t.div_ceil(2);
    // Sums of all subsets of size <= half, grown one index at a time; each
    // frontier entry remembers where its next member may start.
    let mut levels: Vec<Vec<u64>> = vec![vec![0]];
    let mut frontier: Vec<(u64, usize)> = vec![(0, 0)];
    for _ in 1..=half {
        let mut next = Vec::new();
        for &(sum, start) in &frontier {
            for (i, v) in values.iter().enumerate().skip(start) {
                next.push((sum ^ v.bits(), i + 1));
            }
        }
        levels.push(next.iter().map(|&(sum, _)| sum).collect());
        frontier = next;
    }
    let total: usize = levels.iter().map(Vec::len).sum();
    SUM_TABLE.with(|table| table.borrow_mut().find_collision(&levels, total, t))
}

/// Open-addressing table reused across calls; a slot is live only when its
/// stamp equals the current epoch, so nothing is cleared between calls.
#[derive(Default)]
struct SumTable {
    keys: Vec<u64>,
    sizes: Vec<usize>,
    stamps: Vec<u32>,
    epoch: u32,
}

thread_local! {
    static SUM_TABLE: RefCell<SumTable> = RefCell::new(SumTable::default());
}

impl SumTable {
    /// Levels arrive by ascending size, so the stored size for a sum is the
    /// smallest one seen.
    fn find_collision(&mut self, levels: &[Vec<u64>], total: usize, t: usize) -> bool {
        let bits = (2 * total).next_power_of_two().trailing_zeros().max(4);
        let capacity = 1usize << bits;
        if self.keys.len() < capacity || self.epoch == u32::MAX {
            let capacity = capacity.max(self.keys.len());
            *self = SumTable {
                keys: vec![0; capacity],
                sizes: vec![0; capacity],
                stamps: vec![0; capacity],
                epoch: 0,
            };
        }
        self.epoch += 1;
        let mask = capacity - 1;
        for (size, level) in levels.iter().enumerate() {
            for &sum in level {
                let mut slot = (sum.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> (64 - bits)) as usize;
                loop {
                    if self.stamps[slot] != self.epoch {
                        self.stamps[slot] = self.epoch;
                        self.keys[slot] = sum;
                        self.sizes[slot] = size;
                        break;
                    }
                    if self.keys[slot] == sum {
                        if self.sizes[slot] + size <= t {
                            return true;
                        }
                        break;
                    }
                    slot = (slot + 1) & mask;
                }
            }
        }
        false
    }
}

/// Smallest (then lexicographically first) sub-multiset with size in
/// `min..=max` whose sum vanishes.
pub(crate) fn first_zero_sum(
    values: &[FieldElement],
    min: usize,
    max: usize,
) -> Option<Vec<usize>> {
    (min..=max.min(values.len())).find_map(|size| {
        for_each_combination(values.len(), size, |c| {
            if xor_of(values, c) == 0 {
                ControlFlow::Break(c.to_vec())
            } else {
                ControlFlow::Continue(())
            }
        })
    })
}

fn subfield_independence(sub: &Subfield, set: &[FieldElement], t: usize) -> Independence {
    let small = sub.field();
    let coords: Vec<Vec<FieldElement>> = set.iter().map(|&a| sub.decompose(a)).collect();
    let dependent = |idx: &[usize]| {
        let columns: Vec<Vec<FieldElement>> = (0..sub.dimension())
            .map(|row| idx.iter().map(|&i| coords[i][row]).collect())
            .collect();
        Matrix::from_rows(columns).rank(small) < idx.len()
    };
    let top = t.min(set.len());
    let any_dependent = top > 0
        && for_each_combination(set.len(), top, |c| {
            if dependent(c) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_some();
    if !any_dependent {
        return Independence::Independent;
    }
    let witness = (1..=top)
        .find_map(|size| {
            for_each_combination(set.len(), size, |c| {
                if dependent(c) {
                    ControlFlow::Break(c.to_vec())
                } else {
                    ControlFlow::Continue(())
                }
            })
        })
        .expect("dependent subset exists");
    Independence::Dependent(witness)
}

fn require_kind(code: &CodeInstance, expected: CodeKind) -> Result<(), VerifyError> {
    let got = code.topology().kind();
    if got == expected {
        Ok(())
    } else {
        Err(VerifyError::WrongKind { expected, got })
    }
}

fn check_puncturing(code: &CodeInstance, e: &[usize]) -> Result<(), VerifyError> {
    code.topology().puncturing_coordinates(e)?;
    Ok(())
}

/// `T(S, e)` in `(group, slot)` order, skipping each group's punctured slot.
pub fn difference_set(code: &CodeInstance, e: &[usize]) -> Result<Vec<FieldElement>, VerifyError> {
    require_kind(code, CodeKind::Local)?;
    check_puncturing(code, e)?;
    Ok(differences(code, e))
}

/// The `(group, slot)` label of each member of [`difference_set`].
pub fn difference_labels(code: &CodeInstance, e: &[usize]) -> Vec<(usize, usize)> {
    let r = code.topology().r();
    e.iter()
        .enumerate()
        .flat_map(|(group, &skip)| (0..=r).filter(move |&s| s != skip).map(move |s| (group, s)))
        .collect()
}

fn differences(code: &CodeInstance, e: &[usize]) -> Vec<FieldElement> {
    let r = code.topology().r();
    let mut out = Vec::with_capacity(e.len() * r);
    for (group, &skip) in e.iter().enumerate() {
        let base = code.alpha(group, skip);
        for s in (0..=r).filter(|&s| s != skip) {
            out.push(code.alpha(group, s) + base);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Members `(group, slot)` of `T(S, e)`, at most `h` of them, whose
    /// differences sum to zero.
    DependentDifferences {
        e: Vec<usize>,
        members: Vec<(usize, usize)>,
    },
    /// `h` surviving coordinates whose columns in the punctured parity check
    /// are linearly dependent.
    SingularMinor { e: Vec<usize>, columns: Vec<usize> },
    /// The punctured parity check does not have rank `h`, so the punctured
    /// code is not a `[k+h, k]` code.
    PuncturedRank { e: Vec<usize>, rank: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::DependentDifferences { e, members } => {
                write!(f, "puncturing {e:?}: differences at (group, slot)")?;
                for (g, s) in members {
                    write!(f, " ({g},{s})")?;
                }
                f.write_str(" sum to zero")
            }
            Witness::SingularMinor { e, columns } => {
                write!(f, "puncturing {e:?}: columns {columns:?} of the punctured parity check are dependent")
            }
            Witness::PuncturedRank { e, rank } => {
                write!(
                    f,
                    "puncturing {e:?}: punctured parity check has rank {rank}"
                )
            }
        }
    }
}

impl Witness {
    pub fn puncturing(&self) -> &[usize] {
        match self {
            Witness::DependentDifferences { e, .. }
            | Witness::SingularMinor { e, .. }
            | Witness::PuncturedRank { e, .. } => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Mr,
    NotMr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive {
        checked: u64,
    },
    /// Only `samples` random puncturings drawn from `seed` were checked, so
    /// an `Mr` status is evidence rather than proof.
    Sampled {
        samples: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub coverage: Coverage,
}

impl Verdict {
    pub fn is_mr(&self) -> bool {
        self.status == Status::Mr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Overrides the verifier's default budget.
    pub budget: Option<u64>,
    /// Check random puncturings instead of all of them.
    pub sampling: Option<Sampling>,
}

impl VerifyOptions {
    pub fn sampled(samples: u64, seed: u64) -> Self {
        VerifyOptions {
            budget: None,
            sampling: Some(Sampling { samples, seed }),
        }
    }
}

/// Runs `check` over the puncturing space (or a sample of it) and returns the
/// first failure in enumeration order. `unit_cost` is the work per
/// puncturing charged against the budget.
fn search(
    space: PuncturingSpace,
    options: &VerifyOptions,
    default_budget: u64,
    unit_cost: u64,
    check: impl Fn(&[usize]) -> Option<Witness> + Sync,
) -> Result<Verdict, VerifyError> {
    let budget = options.budget.unwrap_or(default_budget);
    let vectors = match options.sampling {
        Some(s) => s.samples as u128,
        None => space.count().map_or(u128::MAX, u128::from),
    };
    let required = vectors.saturating_mul(unit_cost as u128);
    if required > budget as u128 {
        return Err(VerifyError::BudgetExceeded { required, budget });
    }
    let (witness, coverage) = match options.sampling {
        None => {
            let count = vectors as u64;
            let witness = (0..count)
                .into_par_iter()
                .find_map_first(|index| check(&space.vector(index)));
            (witness, Coverage::Exhaustive { checked: count })
        }
        Some(Sampling { samples, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let drawn: Vec<Vec<usize>> = (0..samples)
                .map(|_| {
                    (0..space.groups())
                        .map(|_| rng.gen_range(0..space.slots()))
                        .collect()
                })
                .collect();
            let witness = drawn.par_iter().find_map_first(|e| check(e));
            (witness, Coverage::Sampled { samples, seed })
        }
    };
    Ok(Verdict {
        status: if witness.is_some() {
            Status::NotMr
        } else {
            Status::Mr
        },
        witness,
        coverage,
    })
}

fn fast_failure(code: &CodeInstance, e: &[usize]) -> Option<Witness> {
    let h = code.topology().h();
    let diffs = differences(code, e);
    if !has_small_zero_sum(&diffs, h) {
        return None;
    }
    let idx = first_zero_sum(&diffs, 1, h).expect("detected dependence must have a witness");
    let labels = difference_labels(code, e);
    Some(Witness::DependentDifferences {
        e: e.to_vec(),
        members: idx.into_iter().map(|i| labels[i]).collect(),
    })
}

/// Decides maximal recoverability of a local code through the
/// difference-set criterion, using the default budget.
pub fn verify_mr(code: &CodeInstance) -> Result<Verdict, VerifyError> {
    verify_mr_with(code, &VerifyOptions::default())
}

pub fn verify_mr_with(
    code: &CodeInstance,
    options: &VerifyOptions,
) -> Result<Verdict, VerifyError> {
    require_kind(code, CodeKind::Local)?;
    search(
        code.topology().puncturings(),
        options,
        DEFAULT_FAST_BUDGET,
        1,
        |e| fast_failure(code, e),
    )
}

pub(crate) enum MdsFailure {
    Rank(usize),
    Minor(Vec<usize>),
}

/// Checks that puncturing `parity_check` at `punctured` leaves an MDS code
/// with `h` checks. Reported columns use the original coordinate numbering.
pub(crate) fn punctured_mds_failure(
    field: &FieldDescriptor,
    parity_check: &Matrix,
    punctured: &[usize],
    h: usize,
) -> Option<MdsFailure> {
    let mut effective = parity_check.eliminate_columns(field, punctured);
    let rank = effective.echelon(field).len();
    if rank != h {
        return Some(MdsFailure::Rank(rank));
    }
    let effective = effective.select_rows(&(0..rank).collect::<Vec<_>>());
    let survivors: Vec<usize> = (0..parity_check.cols())
        .filter(|c| !punctured.contains(c))
        .collect();
    for_each_combination(survivors.len(), h, |cols| {
        if effective.select_columns(cols).rank(field) < h {
            ControlFlow::Break(MdsFailure::Minor(
                cols.iter().map(|&i| survivors[i]).collect(),
            ))
        } else {
            ControlFlow::Continue(())
        }
    })
}

fn oracle_failure(code: &CodeInstance, parity_check: &Matrix, e: &[usize]) -> Option<Witness> {
    let punctured = code
        .topology()
        .puncturing_coordinates(e)
        .expect("vector drawn from the topology's own space");
    punctured_mds_failure(code.field(), parity_check, &punctured, code.topology().h()).map(|f| {
        match f {
            MdsFailure::Rank(rank) => Witness::PuncturedRank {
                e: e.to_vec(),
                rank,
            },
            MdsFailure::Minor(columns) => Witness::SingularMinor {
                e: e.to_vec(),
                columns,
            },
        }
    })
}

fn minors_per_puncturing(code: &CodeInstance) -> u64 {
    let t = code.topology();
    binomial((t.k() + t.h()) as u64, t.h() as u64)
}

/// Rank-based maximal-recoverability check for a local code, independent of
/// the difference-set criterion.
pub fn verify_mr_oracle(code: &CodeInstance) -> Result<Verdict, VerifyError> {
    verify_mr_oracle_with(code, &VerifyOptions::default())
}

pub fn verify_mr_oracle_with(
    code: &CodeInstance,
    options: &VerifyOptions,
) -> Result<Verdict, VerifyError> {
    require_kind(code, CodeKind::Local)?;
    let parity_check = build_parity_check(code);
    search(
        code.topology().puncturings(),
        options,
        DEFAULT_ORACLE_BUDGET,
        minors_per_puncturing(code),
        |e| oracle_failure(code, parity_check.matrix(), e),
    )
}

/// Data-local maximal recoverability: every choice of one coordinate in
/// each of the `k/r` groups must leave an MDS `[k+h, k]` code.
pub fn verify_data_local_mr(code: &CodeInstance) -> Result<Verdict, VerifyError> {
    verify_data_local_mr_with(code, &VerifyOptions::default())
}

pub fn verify_data_local_mr_with(
    code: &CodeInstance,
    options: &VerifyOptions,
) -> Result<Verdict, VerifyError> {
    require_kind(code, CodeKind::DataLocal)?;
    let parity_check = build_parity_check(code);
    search(
        code.topology().puncturings(),
        options,
        DEFAULT_ORACLE_BUDGET,
        minors_per_puncturing(code),
        |e| oracle_failure(code, parity_check.matrix(), e),
    )
}

/// Re-checks a witness against the code from scratch: true iff it really
/// exhibits a failure.
pub fn check_witness(code: &CodeInstance, witness: &Witness) -> bool {
    let topo = code.topology();
    let h = topo.h();
    let e = witness.puncturing();
    let Ok(punctured) = topo.puncturing_coordinates(e) else {
        return false;
    };
    match witness {
        Witness::DependentDifferences { members, .. } => {
            if topo.kind() != CodeKind::Local || members.is_empty() || members.len() > h {
                return false;
            }
            let mut seen = members.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != members.len() {
                return false;
            }
            let valid = members
                .iter()
                .all(|&(g, s)| g < topo.groups() && s <= topo.r() && s != e[g]);
            valid
                && members
                    .iter()
                    .map(|&(g, s)| code.alpha(g, s) + code.alpha(g, e[g]))
                    .sum::<FieldElement>()
                    .is_zero()
        }
        Witness::SingularMinor { columns, .. } => {
            if columns.len() != h
                || columns
                    .iter()
                    .any(|c| punctured.contains(c) || *c >= topo.len())
            {
                return false;
            }
            let parity_check = build_parity_check(code);
            let mut effective = parity_check
                .matrix()
                .eliminate_columns(code.field(), &punctured);
            let rank = effective.echelon(code.field()).len();
            let survivors: Vec<usize> =
                (0..topo.len()).filter(|c| !punctured.contains(c)).collect();
            let picked: Vec<usize> = columns
                .iter()
                .map(|c| survivors.iter().position(|s| s == c).unwrap())
                .collect();
            effective
                .select_rows(&(0..rank).collect::<Vec<_>>())
                .select_columns(&picked)
                .rank(code.field())
                < h
        }
        Witness::PuncturedRank { rank, .. } => {
            let parity_check = build_parity_check(code);
            let effective = parity_check
                .matrix()
                .eliminate_columns(code.field(), &punctured);
            let actual = effective.rank(code.field());
            actual == *rank && actual != h
        }
    }
}
