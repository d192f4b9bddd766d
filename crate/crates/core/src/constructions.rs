//! Explicit maximally recoverable local codes.
//!
//! Both constructions pick the coefficient multiset `S = {alpha(i,s)}` of a
//! local `(k, r, h)` code so that every difference set `T(S, e)` is `h`-wise
//! independent over GF(2).
//!
//! * Basic: `S` is `2h`-wise independent over GF(2), which already forces
//!   every `T(S, e)` to be `h`-wise independent. Each coefficient is the
//!   vector `(b, b^3, ..., b^(2h-1))` of a distinct nonzero `b` in GF(2^m),
//!   read as an element of GF(2^(hm)) over GF(2^m) (the columns of a binary
//!   BCH parity check).
//! * Optimized: `alpha(i,s) = lambda_i * xi_s`, where `{xi_s}` is a basis of
//!   GF(2^r) plus zero and `{lambda_i}` is `h`-wise independent over GF(2^r).
//!   The `lambda_i` are `(1, b, b^2, ..., b^(h-1))` over distinct `b` in
//!   GF(2^m), dropping powers `b^j` with `2^r | j`: those are Frobenius
//!   images of lower powers and add no constraints over GF(2^r).

use crate::gf2::{make_field, FieldDescriptor, FieldElement, FieldError, MAX_DEGREE};
use crate::topology::{CodeInstance, CodeKind, LocalTopology, TopologyError};
use crate::verification::{
    is_independent, is_weakly_independent, Independence, Scalars, VerifyError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("the construction needs GF(2^{degree}) but only degrees up to 64 are supported")]
    FieldTooLarge { degree: u64 },
    #[error("S1 must have r+1 = {expected} elements, got {got}")]
    S1Size { expected: usize, got: usize },
    #[error("S1 element {0} does not lie in the subfield")]
    S1OutOfSubfield(FieldElement),
    #[error(
        "S1 is not {t}-wise weakly independent over GF(2): elements at {witness:?} sum to zero"
    )]
    S1Dependent { t: usize, witness: Vec<usize> },
    #[error(
        "S2 is not {t}-wise independent over the subfield: elements at {witness:?} are dependent"
    )]
    S2Dependent { t: usize, witness: Vec<usize> },
    #[error("S2 with {groups} elements and r={r} gives k+h={total}, too small for h={h}")]
    S2TooSmall {
        groups: usize,
        r: usize,
        h: usize,
        total: usize,
    },
    #[error("the combining field GF(2^{0}) has no subfield configured")]
    NoSubfield(u32),
    #[error("expected a local code")]
    NotLocal,
    #[error("target k'={target} must be a positive multiple of r={r} no larger than k={k}")]
    InvalidTarget { target: usize, r: usize, k: usize },
    #[error("k={k} is smaller than r={r}, so no complete data group remains")]
    NoDataGroup { k: usize, r: usize },
}

impl From<VerifyError> for ConstructionError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Field(f) => ConstructionError::Field(f),
            VerifyError::Topology(t) => ConstructionError::Topology(t),
            other => unreachable!("independence checks do not fail with {other}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Basic,
    Optimized,
    Custom,
}

/// How a coefficient multiset was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSetReport {
    pub set_kind: SetKind,
    pub field_degree: u32,
    /// Degree of the field the `b` values are drawn from (basic, optimized).
    pub m: Option<u32>,
    /// Degree of the field holding `S1` (optimized, custom).
    pub a: Option<u32>,
    /// Degree of the field holding `S2` and the code (optimized, custom).
    pub b: Option<u32>,
    /// The `xi_s`, as elements of GF(2^a).
    pub s1: Vec<FieldElement>,
    /// The `lambda_i`, as elements of GF(2^b).
    pub s2: Vec<FieldElement>,
    /// `S` in coordinate order.
    pub alphas: Vec<FieldElement>,
}

/// `(m, t)` for the basic construction: `m` is the least integer with
/// `n <= 2^m - 1` and the field is GF(2^(hm)). `t` may exceed 64.
pub fn basic_parameters(k: usize, r: usize, h: usize) -> Result<(u32, u64), ConstructionError> {
    let topo = LocalTopology::local(k, r, h)?;
    let n = topo.len() as u128;
    let m = (1u32..).find(|&m| n < (1u128 << m)).unwrap();
    Ok((m, h as u64 * m as u64))
}

/// `(m, t)` for the optimized construction: `m` is the least multiple of
/// `r` with `l <= 2^m` and `t = r + m * ceil((h-1)(1 - 2^-r))`.
pub fn optimized_parameters(k: usize, r: usize, h: usize) -> Result<(u32, u64), ConstructionError> {
    let topo = LocalTopology::local(k, r, h)?;
    let groups = topo.groups() as u128;
    let r32 =
        u32::try_from(r).map_err(|_| ConstructionError::FieldTooLarge { degree: u64::MAX })?;
    let m = (1u32..)
        .map(|i| i * r32)
        .find(|&m| m >= 128 || groups <= (1u128 << m))
        .unwrap();
    let t = r as u64 + m as u64 * retained_powers(r, h).len() as u64;
    Ok((m, t))
}

/// Exponents `1 <= j <= h-1` not divisible by `2^r`; there are
/// `ceil((h-1)(1 - 2^-r))` of them.
fn retained_powers(r: usize, h: usize) -> Vec<usize> {
    (1..h)
        .filter(|&j| r >= usize::BITS as usize || j % (1usize << r) != 0)
        .collect()
}

fn check_degree(t: u64) -> Result<u32, ConstructionError> {
    if t > MAX_DEGREE as u64 {
        Err(ConstructionError::FieldTooLarge { degree: t })
    } else {
        Ok(t as u32)
    }
}

pub fn basic_generator_set(
    k: usize,
    r: usize,
    h: usize,
) -> Result<GeneratorSetReport, ConstructionError> {
    let (m, t) = basic_parameters(k, r, h)?;
    let t = check_degree(t)?;
    let topo = LocalTopology::local(k, r, h)?;
    let big = make_field(t, Some(m))?;
    let sub = big.subfield().expect("configured above");
    let small = sub.field();

    let alphas = (1..=topo.len() as u64)
        .map(|b| {
            let beta = FieldElement::from_bits(b);
            let coords: Vec<FieldElement> =
                (0..h).map(|j| small.pow(beta, 2 * j as u128 + 1)).collect();
            sub.compose(&coords)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeneratorSetReport {
        set_kind: SetKind::Basic,
        field_degree: t,
        m: Some(m),
        a: None,
        b: None,
        s1: Vec::new(),
        s2: Vec::new(),
        alphas,
    })
}

/// Local `(k, r, h)` code over GF(2^(hm)) from `2h`-wise independent
/// coefficients.
pub fn construct_basic(k: usize, r: usize, h: usize) -> Result<CodeInstance, ConstructionError> {
    let report = basic_generator_set(k, r, h)?;
    let field = make_field(report.field_degree, None)?;
    Ok(CodeInstance::new(
        LocalTopology::local(k, r, h)?,
        field,
        report.alphas,
    )?)
}

/// `{1, x, ..., x^(r-1)} ∪ {0}` in GF(2^r).
pub fn standard_s1(r: usize) -> Vec<FieldElement> {
    (0..r)
        .map(|u| FieldElement::from_bits(1 << u))
        .chain(std::iter::once(FieldElement::ZERO))
        .collect()
}

/// The `lambda_i` over the first `groups` elements of GF(2^m), composed in
/// `target` over its GF(2^r) subfield.
fn optimized_s2(
    m_field: &FieldDescriptor,
    target: &FieldDescriptor,
    r: usize,
    h: usize,
    groups: usize,
) -> Result<Vec<FieldElement>, ConstructionError> {
    let m_sub = m_field.subfield().expect("GF(2^m) carries GF(2^r)");
    let t_sub = target.subfield().expect("GF(2^t) carries GF(2^r)");
    let powers = retained_powers(r, h);
    (0..groups as u64)
        .map(|b| {
            let beta = FieldElement::from_bits(b);
            let mut coords = vec![FieldElement::ONE];
            for &j in &powers {
                coords.extend(m_sub.decompose(m_field.pow(beta, j as u128)));
            }
            Ok(t_sub.compose(&coords)?)
        })
        .collect()
}

pub fn optimized_generator_set(
    k: usize,
    r: usize,
    h: usize,
) -> Result<GeneratorSetReport, ConstructionError> {
    let (m, t) = optimized_parameters(k, r, h)?;
    let t = check_degree(t)?;
    let m = check_degree(m as u64)?;
    let topo = LocalTopology::local(k, r, h)?;
    let r32 = r as u32;
    let m_field = make_field(m, Some(r32))?;
    let target = make_field(t, Some(r32))?;
    let s1 = standard_s1(r);
    let s2 = optimized_s2(&m_field, &target, r, h, topo.groups())?;
    let alphas = product_set(&target, &s1, &s2);
    Ok(GeneratorSetReport {
        set_kind: SetKind::Optimized,
        field_degree: t,
        m: Some(m),
        a: Some(r32),
        b: Some(t),
        s1,
        s2,
        alphas,
    })
}

/// Local `(k, r, h)` code over GF(2^t), `t = r + m * ceil((h-1)(1 - 2^-r))`.
pub fn construct_optimized(
    k: usize,
    r: usize,
    h: usize,
) -> Result<CodeInstance, ConstructionError> {
    let report = optimized_generator_set(k, r, h)?;
    let field = make_field(report.field_degree, None)?;
    Ok(CodeInstance::new(
        LocalTopology::local(k, r, h)?,
        field,
        report.alphas,
    )?)
}

/// `alpha(i,s) = lambda_i * embed(xi_s)` in coordinate order.
fn product_set(
    field: &FieldDescriptor,
    s1: &[FieldElement],
    s2: &[FieldElement],
) -> Vec<FieldElement> {
    let sub = field
        .subfield()
        .expect("product needs the subfield embedding");
    let xis: Vec<FieldElement> = s1.iter().map(|&xi| sub.embed(xi)).collect();
    s2.iter()
        .flat_map(|&lambda| xis.iter().map(move |&xi| field.mul(lambda, xi)))
        .collect()
}

/// Builds `C(S1 * S2, r, h)` after checking the product-set preconditions:
/// `S1` (in the subfield of `field`) has `r+1` elements and is
/// `h`-weakly independent (`h+1` for odd `h`); `S2` (in `field`) is
/// `h`-wise independent over the subfield. `k` is `|S2| * r - h`.
pub fn combine_sets(
    field: &FieldDescriptor,
    s1: &[FieldElement],
    s2: &[FieldElement],
    r: usize,
    h: usize,
) -> Result<CodeInstance, ConstructionError> {
    let sub = field
        .subfield()
        .ok_or(ConstructionError::NoSubfield(field.degree()))?;
    if s1.len() != r + 1 {
        return Err(ConstructionError::S1Size {
            expected: r + 1,
            got: s1.len(),
        });
    }
    if let Some(&bad) = s1.iter().find(|&&xi| !sub.field().contains(xi)) {
        return Err(ConstructionError::S1OutOfSubfield(bad));
    }
    if let Some(&bad) = s2.iter().find(|&&l| !field.contains(l)) {
        return Err(FieldError::ElementOutOfRange {
            degree: field.degree(),
            value: bad.bits(),
        }
        .into());
    }
    let weak_t = if h.is_multiple_of(2) { h } else { h + 1 };
    if let Independence::Dependent(witness) = is_weakly_independent(s1, weak_t) {
        return Err(ConstructionError::S1Dependent { t: weak_t, witness });
    }
    if let Independence::Dependent(witness) = is_independent(field, s2, h, Scalars::Subfield)? {
        return Err(ConstructionError::S2Dependent { t: h, witness });
    }
    let total = s2.len() * r;
    if total <= h {
        return Err(ConstructionError::S2TooSmall {
            groups: s2.len(),
            r,
            h,
            total,
        });
    }
    let topo = LocalTopology::local(total - h, r, h)?;
    let plain = FieldDescriptor::with_modulus(field.degree(), field.modulus(), None)?;
    Ok(CodeInstance::new(topo, plain, product_set(field, s1, s2))?)
}

/// Turns a local `(k, r, h)` code into a data-local `(k', r, h)` code.
///
/// The first `k'/r` groups become the data groups. Of the primary symbols in
/// the remaining groups, the first `k - k'` ("special" symbols) are fixed to
/// zero and dropped, the last `h` become the heavy parities, and those groups
/// lose their local parities. Eliminating each dropped parity from the
/// global constraints turns a kept primary `(i, s)` into a coefficient
/// `alpha(i,s) + alpha(i,r)`. Punctured data-local codes are shortenings of
/// punctured local ones, so maximal recoverability carries over.
pub fn derive_data_local(
    code: &CodeInstance,
    k_target: Option<usize>,
) -> Result<CodeInstance, ConstructionError> {
    let topo = code.topology();
    if topo.kind() != CodeKind::Local {
        return Err(ConstructionError::NotLocal);
    }
    let (k, r, h) = (topo.k(), topo.r(), topo.h());
    let k_new = match k_target {
        Some(target) => {
            if target == 0 || target % r != 0 || target > k {
                return Err(ConstructionError::InvalidTarget { target, r, k });
            }
            target
        }
        None => {
            if k < r {
                return Err(ConstructionError::NoDataGroup { k, r });
            }
            k / r * r
        }
    };
    let data_groups = k_new / r;
    let mut alphas = Vec::with_capacity(k_new + h);
    for group in 0..data_groups {
        let parity = code.alpha(group, r);
        alphas.extend((0..r).map(|s| code.alpha(group, s) + parity));
    }
    let trailing: Vec<(usize, usize)> = (data_groups..topo.groups())
        .flat_map(|g| (0..r).map(move |s| (g, s)))
        .collect();
    let specials = k - k_new;
    alphas.extend(
        trailing[specials..]
            .iter()
            .map(|&(g, s)| code.alpha(g, s) + code.alpha(g, r)),
    );
    let target = LocalTopology::data_local(k_new, r, h)?;
    Ok(CodeInstance::new(target, code.field().clone(), alphas)?)
}
