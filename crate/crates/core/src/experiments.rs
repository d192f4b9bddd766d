//! Desk-scale experiments: how often random codes are maximally
//! recoverable, exhaustive searches for small alphabets, and the field
//! degrees the two constructions need.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constructions::{basic_parameters, optimized_parameters, ConstructionError};
use crate::gf2::{make_field, FieldElement, FieldError};
use crate::linalg::Matrix;
use crate::topology::{CodeInstance, LocalTopology, TopologyError};
use crate::verification::{
    punctured_mds_failure, verify_mr_with, VerifyError, VerifyOptions, DEFAULT_FAST_BUDGET,
};

/// Normal quantile for a two-sided 95% interval.
pub const WILSON_Z: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExperimentError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("search needs {required} checks, over the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

/// Parameters of a random-code experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    pub k: usize,
    pub r: usize,
    pub h: usize,
    pub q_degree: u32,
    pub trials: u64,
    pub seed: u64,
    /// Per-trial verification budget; `None` keeps the verifier default.
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomEstimate {
    pub spec: RandomSpec,
    pub successes: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `(1 - 1/(2^h e^(h-1)))^(k/2)`, present when `q <= C(floor(k/2), h-1)`.
    pub bound: Option<f64>,
}

impl RandomEstimate {
    /// Whether the estimate is compatible with the upper bound: the
    /// interval's lower end does not exceed it.
    pub fn respects_bound(&self) -> bool {
        self.bound.is_none_or(|b| self.ci_low <= b)
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// The random-code upper bound and whether its precondition holds.
pub fn random_code_bound(k: usize, h: usize, q_degree: u32) -> Option<f64> {
    let threshold = crate::subsets::binomial((k / 2) as u64, h.saturating_sub(1) as u64);
    let applies = q_degree < 64 && (1u64 << q_degree) <= threshold;
    applies.then(|| {
        let eps = 1.0 / (2f64.powi(h as i32) * std::f64::consts::E.powi(h as i32 - 1));
        (1.0 - eps).powf(k as f64 / 2.0)
    })
}

/// Draws every coefficient of a local `(k, r, h)` code independently and
/// uniformly from GF(2^q) and counts how many draws are maximally
/// recoverable. Trial `i` uses stream `i` of the seeded generator, so runs
/// with different `q` see paired randomness.
pub fn random_mr_probability(spec: &RandomSpec) -> Result<RandomEstimate, ExperimentError> {
    if spec.trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    let topo = LocalTopology::local(spec.k, spec.r, spec.h)?;
    let field = make_field(spec.q_degree, None)?;
    let options = VerifyOptions {
        budget: spec.budget,
        sampling: None,
    };
    let budget = spec.budget.unwrap_or(DEFAULT_FAST_BUDGET);
    let required = topo.puncturings().count().map_or(u128::MAX, u128::from);
    if required > budget as u128 {
        return Err(VerifyError::BudgetExceeded { required, budget }.into());
    }

    let mask = field.mask();
    let successes = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(trial);
            let alphas = (0..topo.alpha_count())
                .map(|_| FieldElement::from_bits(rng.gen::<u64>() & mask))
                .collect();
            let code = CodeInstance::new(topo, field.clone(), alphas)?;
            Ok(u64::from(verify_mr_with(&code, &options)?.is_mr()))
        })
        .collect::<Result<Vec<u64>, ExperimentError>>()?
        .into_iter()
        .sum();

    let (ci_low, ci_high) = wilson_interval(successes, spec.trials, WILSON_Z);
    Ok(RandomEstimate {
        spec: *spec,
        successes,
        fraction: successes as f64 / spec.trials as f64,
        ci_low,
        ci_high,
        bound: random_code_bound(spec.k, spec.h, spec.q_degree),
    })
}

pub const RANDOM_CSV_HEADER: &str =
    "k,r,h,q_degree,trials,seed,successes,fraction,ci_low,ci_high,bound";

pub fn random_csv_row(e: &RandomEstimate) -> String {
    let s = &e.spec;
    format!(
        "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{}",
        s.k,
        s.r,
        s.h,
        s.q_degree,
        s.trials,
        s.seed,
        e.successes,
        e.fraction,
        e.ci_low,
        e.ci_high,
        e.bound.map(|b| format!("{b:.6}")).unwrap_or_default()
    )
}

/// Result of searching every heavy-parity assignment over a small field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// `coefficients[j][i]` is the weight of data symbol `i` in heavy
    /// parity `j` of the first maximally recoverable assignment found.
    ExistsMr {
        coefficients: Vec<Vec<FieldElement>>,
        checked: u64,
    },
    NoneExists {
        checked: u64,
    },
}

impl SearchOutcome {
    pub fn exists(&self) -> bool {
        matches!(self, SearchOutcome::ExistsMr { .. })
    }

    pub fn checked(&self) -> u64 {
        match self {
            SearchOutcome::ExistsMr { checked, .. } | SearchOutcome::NoneExists { checked } => {
                *checked
            }
        }
    }
}

/// Parity checks of the local code whose heavy parity `j` equals
/// `sum_i c[j][i] * d_i`: heavy rows `c[j] | e_j` on the primaries, then the
/// all-ones group rows.
fn generic_parity_check(topo: &LocalTopology, coefficients: &[Vec<FieldElement>]) -> Matrix {
    let h = topo.h();
    let mut m = Matrix::zeros(h + topo.groups(), topo.len());
    let data = topo.data_coordinates();
    for (j, &heavy) in topo.heavy_coordinates().iter().enumerate() {
        for (&coord, &c) in data.iter().zip(&coefficients[j]) {
            m.set(j, coord, c);
        }
        m.set(j, heavy, FieldElement::ONE);
    }
    for g in 0..topo.groups() {
        for coord in topo.group_range(g) {
            m.set(h + g, coord, FieldElement::ONE);
        }
    }
    m
}

/// Enumerates all `q^(hk)` ways to choose the heavy parities as linear
/// combinations of the data over GF(2^q), keeping the local parities as
/// plain sums, and returns the first maximally recoverable one in
/// lexicographic order (first coefficient most significant), or certifies
/// that none exists. Each assignment is checked with the rank oracle on
/// every puncturing; the budget bounds assignments times puncturings.
pub fn exhaustive_lower_bound_search(
    k: usize,
    r: usize,
    h: usize,
    q_degree: u32,
    budget: Option<u64>,
) -> Result<SearchOutcome, ExperimentError> {
    let topo = LocalTopology::local(k, r, h)?;
    let field = make_field(q_degree, None)?;
    let budget = budget.unwrap_or(DEFAULT_FAST_BUDGET);
    let q = field.size();
    let cells = (h * k) as u32;
    let assignments = q.checked_pow(cells).unwrap_or(u128::MAX);
    let puncturings = topo.puncturings().count().map_or(u128::MAX, u128::from);
    let required = assignments.saturating_mul(puncturings);
    if required > budget as u128 {
        return Err(ExperimentError::BudgetExceeded { required, budget });
    }
    let assignments = assignments as u64;
    let space = topo.puncturings();
    let q_degree = field.degree();

    let decode = |index: u64| -> Vec<Vec<FieldElement>> {
        let mut digits = vec![FieldElement::ZERO; h * k];
        let mut rest = index;
        for d in digits.iter_mut().rev() {
            *d = FieldElement::from_bits(rest & field.mask());
            rest >>= q_degree;
        }
        digits.chunks(k).map(<[FieldElement]>::to_vec).collect()
    };

    let found = (0..assignments).into_par_iter().find_map_first(|index| {
        let coefficients = decode(index);
        let parity_check = generic_parity_check(&topo, &coefficients);
        let count = space.count().expect("checked against the budget");
        let all_mds = (0..count).all(|p| {
            let punctured = topo
                .puncturing_coordinates(&space.vector(p))
                .expect("vector drawn from the topology's own space");
            punctured_mds_failure(&field, &parity_check, &punctured, h).is_none()
        });
        all_mds.then_some((index, coefficients))
    });

    Ok(match found {
        Some((index, coefficients)) => SearchOutcome::ExistsMr {
            coefficients,
            checked: index + 1,
        },
        None => SearchOutcome::NoneExists {
            checked: assignments,
        },
    })
}

pub const SEARCH_CSV_HEADER: &str = "k,r,h,q_degree,checked,outcome,coefficients";

pub fn search_csv_row(
    k: usize,
    r: usize,
    h: usize,
    q_degree: u32,
    outcome: &SearchOutcome,
) -> String {
    let (label, coefficients) = match outcome {
        SearchOutcome::ExistsMr { coefficients, .. } => (
            "exists_mr",
            coefficients
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| format!("{c:#x}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect::<Vec<_>>()
                .join(" | "),
        ),
        SearchOutcome::NoneExists { .. } => ("none_exists", String::new()),
    };
    format!(
        "{k},{r},{h},{q_degree},{},{label},{coefficients}",
        outcome.checked()
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSizeRow {
    pub k: usize,
    pub r: usize,
    pub h: usize,
    pub t_basic: u64,
    pub t_optimized: u64,
}

/// Field degrees both constructions would use, without building them.
pub fn field_size_table(
    grid: &[(usize, usize, usize)],
) -> Result<Vec<FieldSizeRow>, ExperimentError> {
    grid.iter()
        .map(|&(k, r, h)| {
            Ok(FieldSizeRow {
                k,
                r,
                h,
                t_basic: basic_parameters(k, r, h)?.1,
                t_optimized: optimized_parameters(k, r, h)?.1,
            })
        })
        .collect()
}

pub const TABLE_CSV_HEADER: &str = "k,r,h,t_basic,t_optimized";

pub fn table_csv(rows: &[FieldSizeRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{TABLE_CSV_HEADER}").unwrap();
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.k, row.r, row.h, row.t_basic, row.t_optimized
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(q_degree: u32, trials: u64) -> RandomSpec {
        RandomSpec {
            k: 6,
            r: 2,
            h: 2,
            q_degree,
            trials,
            seed: 7,
            budget: None,
        }
    }

    #[test]
    fn wilson_reference_values() {
        // 0/10 and 10/10 are symmetric; 5/10 is centered
        let (lo, hi) = wilson_interval(0, 10, WILSON_Z);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 1e-3, "{hi}");
        let (lo2, hi2) = wilson_interval(10, 10, WILSON_Z);
        assert!((lo2 - (1.0 - hi)).abs() < 1e-12 && hi2 == 1.0);
        let (lo, hi) = wilson_interval(5, 10, WILSON_Z);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!((lo - 0.2366).abs() < 1e-3, "{lo}");
    }

    #[test]
    fn bound_precondition() {
        // C(3, 1) = 3: only q = 2 qualifies
        assert!(random_code_bound(6, 2, 1).is_some());
        assert!(random_code_bound(6, 2, 2).is_none());
        let b = random_code_bound(6, 2, 1).unwrap();
        let expect = (1.0 - 1.0 / (4.0 * std::f64::consts::E)).powf(3.0);
        assert!((b - expect).abs() < 1e-12);
        // h = 1 makes the threshold C(., 0) = 1 < q
        assert!(random_code_bound(6, 1, 1).is_none());
    }

    #[test]
    fn zero_trials_is_an_error() {
        assert_eq!(
            random_mr_probability(&spec(4, 0)),
            Err(ExperimentError::NoTrials)
        );
    }

    #[test]
    fn random_runs_are_reproducible() {
        let a = random_mr_probability(&spec(6, 40)).unwrap();
        let b = random_mr_probability(&spec(6, 40)).unwrap();
        assert_eq!(a, b);
        assert!(a.ci_low <= a.fraction && a.fraction <= a.ci_high);
    }

    #[test]
    fn tiny_field_never_mr() {
        // eight differences cannot be distinct and nonzero in GF(4)
        let e = random_mr_probability(&spec(2, 50)).unwrap();
        assert_eq!(e.successes, 0);
        assert!(e.respects_bound());
    }

    #[test]
    fn random_budget_is_checked_up_front() {
        let mut s = spec(8, 10);
        s.budget = Some(10);
        assert!(matches!(
            random_mr_probability(&s),
            Err(ExperimentError::Verify(VerifyError::BudgetExceeded { .. }))
        ));
    }

    #[test]
    fn h1_search_threshold() {
        // one heavy parity, two groups of two primaries
        assert!(!exhaustive_lower_bound_search(3, 2, 1, 1, None)
            .unwrap()
            .exists());
        let found = exhaustive_lower_bound_search(3, 2, 1, 2, None).unwrap();
        let SearchOutcome::ExistsMr { coefficients, .. } = &found else {
            panic!("expected a witness");
        };
        assert_eq!(coefficients.len(), 1);
        assert!(coefficients[0].iter().all(|c| !c.is_zero()));
    }

    #[test]
    fn search_budget() {
        assert!(matches!(
            exhaustive_lower_bound_search(4, 2, 2, 2, Some(1000)),
            Err(ExperimentError::BudgetExceeded { required, .. }) if required == 65536 * 27
        ));
    }

    #[test]
    fn generic_matrix_shape() {
        let topo = LocalTopology::local(4, 2, 2).unwrap();
        let c = vec![vec![FieldElement::ONE; 4]; 2];
        let m = generic_parity_check(&topo, &c);
        assert_eq!((m.rows(), m.cols()), (5, 9));
        assert_eq!(m.rank(&make_field(2, None).unwrap()), 5);
    }

    #[test]
    fn table_rows() {
        let rows = field_size_table(&[(60, 4, 4), (6, 2, 2)]).unwrap();
        assert_eq!((rows[0].t_basic, rows[0].t_optimized), (28, 16));
        assert_eq!(rows[1].t_optimized, 4);
        let csv = table_csv(&rows);
        assert!(csv.starts_with("k,r,h,t_basic,t_optimized\n60,4,4,28,16\n"));
    }

    #[test]
    fn csv_rows() {
        let e = random_mr_probability(&spec(1, 5)).unwrap();
        let row = random_csv_row(&e);
        assert_eq!(row.split(',').count(), RANDOM_CSV_HEADER.split(',').count());
        assert!(row.starts_with("6,2,2,1,5,7,0,"));
        let row = search_csv_row(3, 2, 1, 1, &SearchOutcome::NoneExists { checked: 8 });
        assert_eq!(row, "3,2,1,1,8,none_exists,");
    }
}
