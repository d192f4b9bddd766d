//! Code topologies, code instances and their parity-check matrices.
//!
//! Coordinates follow one fixed layout. Local groups come first, in order;
//! each holds `r` primary symbols followed by its local parity, so group `i`
//! occupies coordinates `i*(r+1) .. (i+1)*(r+1)`.
//!
//! * Local `(k, r, h)`: the `k + h` primary symbols (data first, then heavy
//!   parities) fill `(k+h)/r` groups; `n = k + h + (k+h)/r`.
//! * Data-local `(k, r, h)`: the `k` data symbols fill `k/r` groups and the
//!   `h` heavy parities follow the last group; `n = k + k/r + h`.
//!
//! A data-local code is sometimes described as having `k/r + h` "symbols"
//! when counted per group; everything here counts coordinates.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use crate::gf2::{FieldDescriptor, FieldElement};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("k, r and h must all be positive (got k={k}, r={r}, h={h})")]
    NonPositive { k: usize, r: usize, h: usize },
    #[error("locality r={r} does not divide {what}={value}")]
    Divisibility {
        r: usize,
        what: &'static str,
        value: usize,
    },
    #[error("expected {expected} coefficients, got {got}")]
    AlphaCount { expected: usize, got: usize },
    #[error("coefficient {value} at index {index} is not an element of GF(2^{degree})")]
    AlphaOutOfField {
        index: usize,
        value: FieldElement,
        degree: u32,
    },
    #[error("coordinate {coord} is out of range for a code of length {len}")]
    CoordinateOutOfRange { coord: usize, len: usize },
    #[error("coordinate {0} is listed twice")]
    DuplicateCoordinate(usize),
    #[error("puncturing vector has {got} entries, expected {expected}")]
    PuncturingLength { expected: usize, got: usize },
    #[error("puncturing slot {slot} in group {group} exceeds group size {size}")]
    PuncturingSlot {
        group: usize,
        slot: usize,
        size: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeKind {
    Local,
    DataLocal,
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeKind::Local => "local",
            CodeKind::DataLocal => "datalocal",
        })
    }
}

/// Shape of a local or data-local `(k, r, h)` code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalTopology {
    kind: CodeKind,
    k: usize,
    r: usize,
    h: usize,
}

impl LocalTopology {
    pub fn new(kind: CodeKind, k: usize, r: usize, h: usize) -> Result<Self, TopologyError> {
        if k == 0 || r == 0 || h == 0 {
            return Err(TopologyError::NonPositive { k, r, h });
        }
        let (what, value) = match kind {
            CodeKind::Local => ("k+h", k + h),
            CodeKind::DataLocal => ("k", k),
        };
        if value % r != 0 {
            return Err(TopologyError::Divisibility { r, what, value });
        }
        Ok(LocalTopology { kind, k, r, h })
    }

    pub fn local(k: usize, r: usize, h: usize) -> Result<Self, TopologyError> {
        Self::new(CodeKind::Local, k, r, h)
    }

    pub fn data_local(k: usize, r: usize, h: usize) -> Result<Self, TopologyError> {
        Self::new(CodeKind::DataLocal, k, r, h)
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Number of local groups, `l`.
    pub fn groups(&self) -> usize {
        match self.kind {
            CodeKind::Local => (self.k + self.h) / self.r,
            CodeKind::DataLocal => self.k / self.r,
        }
    }

    /// Code length `n`.
    pub fn len(&self) -> usize {
        self.k + self.h + self.groups()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Redundancy `n - k`.
    pub fn redundancy(&self) -> usize {
        self.h + self.groups()
    }

    pub fn group_size(&self) -> usize {
        self.r + 1
    }

    pub fn group_range(&self, group: usize) -> Range<usize> {
        let start = group * (self.r + 1);
        start..start + self.r + 1
    }

    pub fn local_parity(&self, group: usize) -> usize {
        group * (self.r + 1) + self.r
    }

    pub fn group_of(&self, coord: usize) -> Option<usize> {
        let g = coord / (self.r + 1);
        (g < self.groups()).then_some(g)
    }

    pub fn is_local_parity(&self, coord: usize) -> bool {
        self.group_of(coord).is_some() && coord % (self.r + 1) == self.r
    }

    /// Data then heavy-parity coordinates, in primary order.
    pub fn primary_coordinates(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| !self.is_local_parity(c))
            .collect()
    }

    pub fn data_coordinates(&self) -> Vec<usize> {
        self.primary_coordinates()[..self.k].to_vec()
    }

    pub fn heavy_coordinates(&self) -> Vec<usize> {
        self.primary_coordinates()[self.k..].to_vec()
    }

    pub fn local_parity_coordinates(&self) -> Vec<usize> {
        (0..self.groups()).map(|g| self.local_parity(g)).collect()
    }

    /// Coordinates that carry a coefficient in the global constraints: every
    /// coordinate of a local code, and the primary ones of a data-local code.
    pub fn alpha_coordinates(&self) -> Vec<usize> {
        match self.kind {
            CodeKind::Local => (0..self.len()).collect(),
            CodeKind::DataLocal => self.primary_coordinates(),
        }
    }

    pub fn alpha_count(&self) -> usize {
        match self.kind {
            CodeKind::Local => self.len(),
            CodeKind::DataLocal => self.k + self.h,
        }
    }

    /// One-coordinate-per-group puncturings, in lexicographic order.
    pub fn puncturings(&self) -> PuncturingSpace {
        PuncturingSpace {
            groups: self.groups(),
            slots: self.r + 1,
        }
    }

    /// Coordinates erased by the puncturing vector `e` (slot per group).
    pub fn puncturing_coordinates(&self, e: &[usize]) -> Result<Vec<usize>, TopologyError> {
        if e.len() != self.groups() {
            return Err(TopologyError::PuncturingLength {
                expected: self.groups(),
                got: e.len(),
            });
        }
        e.iter()
            .enumerate()
            .map(|(group, &slot)| {
                if slot > self.r {
                    Err(TopologyError::PuncturingSlot {
                        group,
                        slot,
                        size: self.r + 1,
                    })
                } else {
                    Ok(group * (self.r + 1) + slot)
                }
            })
            .collect()
    }
}

/// The puncturing vectors `[r+1]^l`, indexed in mixed radix with group 0 as
/// the most significant digit so that index order is lexicographic order.
/// Slots are numbered from 0; slot `r` is the local parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PuncturingSpace {
    groups: usize,
    slots: usize,
}

impl PuncturingSpace {
    /// `(r+1)^l`, or `None` if it overflows `u64`.
    pub fn count(&self) -> Option<u64> {
        (self.slots as u64).checked_pow(self.groups as u32)
    }

    pub fn vector(&self, mut index: u64) -> Vec<usize> {
        let mut e = vec![0; self.groups];
        for slot in e.iter_mut().rev() {
            *slot = (index % self.slots as u64) as usize;
            index /= self.slots as u64;
        }
        e
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn slots(&self) -> usize {
        self.slots
    }
}

/// A topology together with the coefficients of its global constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeInstance {
    topology: LocalTopology,
    field: FieldDescriptor,
    alphas: Vec<FieldElement>,
}

impl CodeInstance {
    /// `alphas` follow [`LocalTopology::alpha_coordinates`]: for a local code
    /// `alphas[i*(r+1) + s]` is the coefficient of slot `s` in group `i`; for
    /// a data-local code the data coefficients come first, then the heavy
    /// ones.
    pub fn new(
        topology: LocalTopology,
        field: FieldDescriptor,
        alphas: Vec<FieldElement>,
    ) -> Result<Self, TopologyError> {
        if alphas.len() != topology.alpha_count() {
            return Err(TopologyError::AlphaCount {
                expected: topology.alpha_count(),
                got: alphas.len(),
            });
        }
        if let Some((index, &value)) = alphas.iter().enumerate().find(|(_, &a)| !field.contains(a))
        {
            return Err(TopologyError::AlphaOutOfField {
                index,
                value,
                degree: field.degree(),
            });
        }
        Ok(CodeInstance {
            topology,
            field,
            alphas,
        })
    }

    pub fn topology(&self) -> &LocalTopology {
        &self.topology
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn alphas(&self) -> &[FieldElement] {
        &self.alphas
    }

    /// Coefficient of slot `slot` in group `group` (local codes only).
    pub fn alpha(&self, group: usize, slot: usize) -> FieldElement {
        debug_assert_eq!(self.topology.kind, CodeKind::Local);
        self.alphas[group * (self.topology.r + 1) + slot]
    }

    /// Global-constraint coefficient of a coordinate; zero on the local
    /// parities of a data-local code.
    pub fn coefficient(&self, coord: usize) -> FieldElement {
        match self.topology.kind {
            CodeKind::Local => self.alphas[coord],
            CodeKind::DataLocal => {
                if self.topology.is_local_parity(coord) {
                    FieldElement::ZERO
                } else {
                    let group_parities_before = self
                        .topology
                        .group_of(coord)
                        .unwrap_or(self.topology.groups());
                    self.alphas[coord - group_parities_before]
                }
            }
        }
    }

    pub fn with_alphas(&self, alphas: Vec<FieldElement>) -> Result<Self, TopologyError> {
        CodeInstance::new(self.topology, self.field.clone(), alphas)
    }
}

/// `(h + l) x n` parity-check matrix: `h` global rows, then `l` local rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    matrix: Matrix,
    global_rows: usize,
}

impl ParityCheckMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn global_rows(&self) -> usize {
        self.global_rows
    }

    pub fn local_rows(&self) -> usize {
        self.matrix.rows() - self.global_rows
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn syndrome(&self, field: &FieldDescriptor, word: &[FieldElement]) -> Vec<FieldElement> {
        self.matrix.mul_vec(field, word)
    }
}

/// Global row `j` (0-based) holds `alpha^(2^j)` per coordinate; local row
/// `i` is the all-ones indicator of group `i`.
pub fn build_parity_check(code: &CodeInstance) -> ParityCheckMatrix {
    let topo = code.topology();
    let field = code.field();
    let n = topo.len();
    let mut matrix = Matrix::zeros(topo.h() + topo.groups(), n);
    for coord in 0..n {
        let mut v = code.coefficient(coord);
        for j in 0..topo.h() {
            matrix.set(j, coord, v);
            v = field.square(v);
        }
    }
    for group in 0..topo.groups() {
        for coord in topo.group_range(group) {
            matrix.set(topo.h() + group, coord, FieldElement::ONE);
        }
    }
    ParityCheckMatrix {
        matrix,
        global_rows: topo.h(),
    }
}

/// A set of erased coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ErasurePattern {
    coords: BTreeSet<usize>,
}

impl ErasurePattern {
    pub fn new(
        topology: &LocalTopology,
        coords: impl IntoIterator<Item = usize>,
    ) -> Result<Self, TopologyError> {
        let mut set = BTreeSet::new();
        for c in coords {
            if c >= topology.len() {
                return Err(TopologyError::CoordinateOutOfRange {
                    coord: c,
                    len: topology.len(),
                });
            }
            if !set.insert(c) {
                return Err(TopologyError::DuplicateCoordinate(c));
            }
        }
        Ok(ErasurePattern { coords: set })
    }

    pub fn empty() -> Self {
        ErasurePattern::default()
    }

    pub fn coords(&self) -> &BTreeSet<usize> {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn contains(&self, coord: usize) -> bool {
        self.coords.contains(&coord)
    }

    /// Number of local groups with at least one erasure.
    pub fn groups_touched(&self, topology: &LocalTopology) -> usize {
        self.coords
            .iter()
            .filter_map(|&c| topology.group_of(c))
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn is_superset(&self, other: &ErasurePattern) -> bool {
        self.coords.is_superset(&other.coords)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternClass {
    PotentiallyCorrectable,
    ProvablyUncorrectable,
}

/// A pattern touching `t'` local groups with more than `t' + h` erasures
/// cannot be corrected by any code of this topology. Everything else is
/// dominated by "one erasure per group plus `h` more" and is corrected by
/// every maximally recoverable code.
pub fn classify_pattern(
    topology: &LocalTopology,
    pattern: &ErasurePattern,
) -> Result<PatternClass, TopologyError> {
    if let Some(&c) = pattern.coords.iter().find(|&&c| c >= topology.len()) {
        return Err(TopologyError::CoordinateOutOfRange {
            coord: c,
            len: topology.len(),
        });
    }
    let touched = pattern.groups_touched(topology);
    Ok(if pattern.len() > touched + topology.h() {
        PatternClass::ProvablyUncorrectable
    } else {
        PatternClass::PotentiallyCorrectable
    })
}

/// Every one-coordinate-per-group pattern, in lexicographic order of the
/// puncturing vector. For a data-local code only the `k/r` data groups take
/// part.
pub fn enumerate_mr_patterns(
    topology: &LocalTopology,
) -> impl Iterator<Item = ErasurePattern> + '_ {
    let space = topology.puncturings();
    let count = space.count().expect("puncturing space overflows u64");
    (0..count).map(move |index| {
        let coords = topology
            .puncturing_coordinates(&space.vector(index))
            .expect("vector drawn from the topology's own space");
        ErasurePattern {
            coords: coords.into_iter().collect(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::make_field;

    fn topo(k: usize, r: usize, h: usize) -> LocalTopology {
        LocalTopology::local(k, r, h).unwrap()
    }

    fn pattern(t: &LocalTopology, coords: &[usize]) -> ErasurePattern {
        ErasurePattern::new(t, coords.iter().copied()).unwrap()
    }

    #[test]
    fn layouts() {
        let t = topo(4, 2, 2);
        assert_eq!((t.groups(), t.len()), (3, 9));
        assert_eq!(t.primary_coordinates(), vec![0, 1, 3, 4, 6, 7]);
        assert_eq!(t.data_coordinates(), vec![0, 1, 3, 4]);
        assert_eq!(t.heavy_coordinates(), vec![6, 7]);
        assert_eq!(t.local_parity_coordinates(), vec![2, 5, 8]);

        let d = LocalTopology::data_local(4, 2, 3).unwrap();
        assert_eq!((d.groups(), d.len()), (2, 9));
        assert_eq!(d.heavy_coordinates(), vec![6, 7, 8]);
        assert_eq!(d.group_of(7), None);
        assert_eq!(d.alpha_coordinates(), vec![0, 1, 3, 4, 6, 7, 8]);
    }

    #[test]
    fn divisibility_is_enforced() {
        assert!(matches!(
            LocalTopology::local(8, 2, 3),
            Err(TopologyError::Divisibility { what: "k+h", .. })
        ));
        assert!(matches!(
            LocalTopology::data_local(5, 2, 3),
            Err(TopologyError::Divisibility { what: "k", .. })
        ));
        assert!(LocalTopology::local(0, 2, 2).is_err());
    }

    #[test]
    fn parity_check_shape_for_4_2_2() {
        let t = topo(4, 2, 2);
        let f = make_field(8, None).unwrap();
        let alphas = (1..=9).map(FieldElement::from_bits).collect();
        let code = CodeInstance::new(t, f.clone(), alphas).unwrap();
        let pcm = build_parity_check(&code);
        assert_eq!((pcm.rows(), pcm.cols()), (5, 9));
        for row in 2..5 {
            let ones = pcm
                .matrix()
                .row(row)
                .iter()
                .filter(|&&v| v == FieldElement::ONE)
                .count();
            assert_eq!(ones, 3);
            assert_eq!(
                pcm.matrix()
                    .row(row)
                    .iter()
                    .filter(|v| !v.is_zero())
                    .count(),
                3
            );
        }
        let row1 = pcm.matrix().row(1);
        for (j, &v) in pcm.matrix().row(0).iter().enumerate() {
            assert_eq!(v, code.alphas()[j]);
            assert_eq!(row1[j], f.frobenius_power(v, 1));
        }
    }

    #[test]
    fn h1_first_row_is_the_alphas() {
        let t = topo(3, 2, 1);
        let f = make_field(4, None).unwrap();
        let alphas: Vec<_> = (1..=6).map(FieldElement::from_bits).collect();
        let code = CodeInstance::new(t, f, alphas.clone()).unwrap();
        assert_eq!(build_parity_check(&code).matrix().row(0), &alphas[..]);
    }

    #[test]
    fn data_local_global_rows_vanish_on_local_parities() {
        let t = LocalTopology::data_local(4, 2, 2).unwrap();
        let f = make_field(4, None).unwrap();
        let alphas: Vec<_> = (1..=6).map(FieldElement::from_bits).collect();
        let code = CodeInstance::new(t, f, alphas).unwrap();
        let pcm = build_parity_check(&code);
        assert_eq!((pcm.rows(), pcm.cols()), (4, 8));
        for j in 0..2 {
            assert!(pcm.matrix().get(j, 2).is_zero());
            assert!(pcm.matrix().get(j, 5).is_zero());
        }
        assert_eq!(pcm.matrix().get(0, 6), FieldElement::from_bits(5));
        assert_eq!(pcm.matrix().get(0, 3), FieldElement::from_bits(3));
    }

    #[test]
    fn alphas_are_validated() {
        let t = topo(4, 2, 2);
        let f = make_field(2, None).unwrap();
        assert!(matches!(
            CodeInstance::new(t, f.clone(), vec![FieldElement::ONE; 8]),
            Err(TopologyError::AlphaCount {
                expected: 9,
                got: 8
            })
        ));
        let mut alphas = vec![FieldElement::ONE; 9];
        alphas[4] = FieldElement::from_bits(4);
        assert!(matches!(
            CodeInstance::new(t, f, alphas),
            Err(TopologyError::AlphaOutOfField { index: 4, .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let t = topo(4, 2, 2);
        let classify = |coords: &[usize]| classify_pattern(&t, &pattern(&t, coords)).unwrap();
        assert_eq!(classify(&[]), PatternClass::PotentiallyCorrectable);
        assert_eq!(classify(&[0, 1, 2]), PatternClass::PotentiallyCorrectable);
        assert_eq!(
            classify(&[0, 1, 2, 3]),
            PatternClass::PotentiallyCorrectable
        );
        assert_eq!(
            classify(&[0, 1, 2, 3, 4, 5]),
            PatternClass::ProvablyUncorrectable
        );
    }

    #[test]
    fn pattern_validation() {
        let t = topo(4, 2, 2);
        assert_eq!(
            ErasurePattern::new(&t, [1, 9]),
            Err(TopologyError::CoordinateOutOfRange { coord: 9, len: 9 })
        );
        assert_eq!(
            ErasurePattern::new(&t, [1, 1]),
            Err(TopologyError::DuplicateCoordinate(1))
        );
        let other = topo(60, 4, 4);
        let far = pattern(&other, &[70]);
        assert!(classify_pattern(&t, &far).is_err());
    }

    #[test]
    fn enumeration_counts_and_order() {
        let one_group = topo(1, 2, 1);
        assert_eq!(enumerate_mr_patterns(&one_group).count(), 3);

        let t = topo(4, 2, 2);
        let all: Vec<_> = enumerate_mr_patterns(&t).collect();
        assert_eq!(all.len(), 27);
        assert_eq!(all[0], pattern(&t, &[0, 3, 6]));
        assert_eq!(all[1], pattern(&t, &[0, 3, 7]));
        assert_eq!(all[26], pattern(&t, &[2, 5, 8]));

        let big = topo(9, 3, 3);
        let patterns: BTreeSet<Vec<usize>> = enumerate_mr_patterns(&big)
            .map(|p| p.coords().iter().copied().collect())
            .collect();
        assert_eq!(patterns.len(), 256);
    }

    #[test]
    fn puncturing_vectors_are_validated() {
        let t = topo(4, 2, 2);
        assert_eq!(t.puncturing_coordinates(&[0, 1, 2]).unwrap(), vec![0, 4, 8]);
        assert!(matches!(
            t.puncturing_coordinates(&[0, 3, 0]),
            Err(TopologyError::PuncturingSlot {
                group: 1,
                slot: 3,
                ..
            })
        ));
        assert!(t.puncturing_coordinates(&[0]).is_err());
    }
}
