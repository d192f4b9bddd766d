//! Systematic encoding and erasure decoding.

use std::collections::BTreeSet;

use crate::gf2::FieldElement;
use crate::linalg::Solution;
use crate::topology::{build_parity_check, CodeInstance, ErasurePattern, ParityCheckMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("expected {expected} data symbols, got {got}")]
    DataLength { expected: usize, got: usize },
    #[error("expected {expected} code symbols, got {got}")]
    WordLength { expected: usize, got: usize },
    #[error("symbol {value} at position {index} is not an element of GF(2^{degree})")]
    SymbolOutOfField {
        index: usize,
        value: FieldElement,
        degree: u32,
    },
    #[error("erasure position {coord} is out of range for a code of length {len}")]
    ErasureOutOfRange { coord: usize, len: usize },
    #[error("the parity coordinates do not form an invertible system (rank {rank} of {unknowns}); the code is not systematically encodable")]
    SingularParity { rank: usize, unknowns: usize },
    #[error(
        "the erasures cannot be recovered: {unknowns} unknowns but the system has rank {rank}"
    )]
    Uncorrectable { rank: usize, unknowns: usize },
    #[error("the surviving symbols violate the parity checks (corruption, not erasure)")]
    Inconsistent,
    #[error("coordinate {0} belongs to no local group")]
    NoLocalGroup(usize),
    #[error("local repair of {coord} needs coordinate {blocked}, which is also erased")]
    RepairBlocked { coord: usize, blocked: usize },
}

/// Code symbols in coordinate order. Erased positions hold arbitrary values
/// that decoding ignores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub symbols: Vec<FieldElement>,
    pub erasures: BTreeSet<usize>,
}

impl Codeword {
    pub fn new(symbols: Vec<FieldElement>) -> Self {
        Codeword {
            symbols,
            erasures: BTreeSet::new(),
        }
    }

    /// Marks `pattern` as erased and zeroes those symbols.
    pub fn erase(&self, pattern: &ErasurePattern) -> Self {
        let mut symbols = self.symbols.clone();
        for &c in pattern.coords() {
            symbols[c] = FieldElement::ZERO;
        }
        Codeword {
            symbols,
            erasures: pattern.coords().clone(),
        }
    }

    pub fn is_erased(&self, coord: usize) -> bool {
        self.erasures.contains(&coord)
    }

    /// `a + b` symbolwise; erasure sets are united.
    pub fn add(&self, other: &Codeword) -> Codeword {
        Codeword {
            symbols: self
                .symbols
                .iter()
                .zip(&other.symbols)
                .map(|(&a, &b)| a + b)
                .collect(),
            erasures: self.erasures.union(&other.erasures).copied().collect(),
        }
    }
}

fn check_symbols(code: &CodeInstance, symbols: &[FieldElement]) -> Result<(), CodecError> {
    match symbols
        .iter()
        .enumerate()
        .find(|(_, &v)| !code.field().contains(v))
    {
        Some((index, &value)) => Err(CodecError::SymbolOutOfField {
            index,
            value,
            degree: code.field().degree(),
        }),
        None => Ok(()),
    }
}

/// Solves `H[:, unknown] x = H[:, known] * word[known]` (characteristic 2,
/// so no sign flip).
fn solve_unknowns(
    code: &CodeInstance,
    parity: &ParityCheckMatrix,
    symbols: &[FieldElement],
    unknown: &[usize],
) -> Solution {
    let field = code.field();
    let h = parity.matrix();
    let known: Vec<usize> = (0..h.cols()).filter(|c| !unknown.contains(c)).collect();
    let known_values: Vec<FieldElement> = known.iter().map(|&c| symbols[c]).collect();
    let rhs = h.select_columns(&known).mul_vec(field, &known_values);
    h.select_columns(unknown).solve(field, &rhs)
}

/// Extends `data` (placed on the data coordinates) by the heavy and local
/// parities.
pub fn encode(code: &CodeInstance, data: &[FieldElement]) -> Result<Codeword, CodecError> {
    let topo = code.topology();
    if data.len() != topo.k() {
        return Err(CodecError::DataLength {
            expected: topo.k(),
            got: data.len(),
        });
    }
    check_symbols(code, data)?;
    let mut symbols = vec![FieldElement::ZERO; topo.len()];
    for (&c, &d) in topo.data_coordinates().iter().zip(data) {
        symbols[c] = d;
    }
    let data_coords: BTreeSet<usize> = topo.data_coordinates().into_iter().collect();
    let unknown: Vec<usize> = (0..topo.len())
        .filter(|c| !data_coords.contains(c))
        .collect();
    let parity = build_parity_check(code);
    match solve_unknowns(code, &parity, &symbols, &unknown) {
        Solution::Unique(values) => {
            for (&c, v) in unknown.iter().zip(values) {
                symbols[c] = v;
            }
            Ok(Codeword::new(symbols))
        }
        Solution::Underdetermined { rank } => Err(CodecError::SingularParity {
            rank,
            unknowns: unknown.len(),
        }),
        // only a singular square system can be inconsistent
        Solution::Inconsistent => Err(CodecError::SingularParity {
            rank: parity.matrix().select_columns(&unknown).rank(code.field()),
            unknowns: unknown.len(),
        }),
    }
}

/// The data symbols of a codeword.
pub fn extract_data(code: &CodeInstance, word: &Codeword) -> Vec<FieldElement> {
    code.topology()
        .data_coordinates()
        .into_iter()
        .map(|c| word.symbols[c])
        .collect()
}

/// Result of repairing one coordinate from its local group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRepair {
    pub value: FieldElement,
    /// Coordinates read, exactly `r` of them.
    pub reads: Vec<usize>,
}

/// Recovers `coord` as the sum of the other members of its local group.
pub fn repair_local(
    code: &CodeInstance,
    word: &Codeword,
    coord: usize,
) -> Result<LocalRepair, CodecError> {
    let topo = code.topology();
    let group = topo
        .group_of(coord)
        .ok_or(CodecError::NoLocalGroup(coord))?;
    let reads: Vec<usize> = topo.group_range(group).filter(|&c| c != coord).collect();
    if let Some(&blocked) = reads.iter().find(|&&c| word.is_erased(c)) {
        return Err(CodecError::RepairBlocked { coord, blocked });
    }
    let value = reads.iter().map(|&c| word.symbols[c]).sum();
    Ok(LocalRepair { value, reads })
}

/// Fills in every erased symbol, or reports that the surviving symbols do
/// not determine them.
///
/// Groups with a single erasure are repaired locally (repeating until no
/// such group remains); whatever is left is solved from the full
/// parity-check system. The answer is the unique completion either way.
pub fn decode_erasures(code: &CodeInstance, word: &Codeword) -> Result<Codeword, CodecError> {
    let topo = code.topology();
    if word.symbols.len() != topo.len() {
        return Err(CodecError::WordLength {
            expected: topo.len(),
            got: word.symbols.len(),
        });
    }
    if let Some(&coord) = word.erasures.iter().find(|&&c| c >= topo.len()) {
        return Err(CodecError::ErasureOutOfRange {
            coord,
            len: topo.len(),
        });
    }
    let mut current = word.clone();
    for &c in &current.erasures {
        current.symbols[c] = FieldElement::ZERO;
    }
    check_symbols(code, &current.symbols)?;

    loop {
        let single = (0..topo.groups()).find_map(|g| {
            let mut erased = topo.group_range(g).filter(|c| current.is_erased(*c));
            match (erased.next(), erased.next()) {
                (Some(c), None) => Some(c),
                _ => None,
            }
        });
        let Some(coord) = single else { break };
        let repair = repair_local(code, &current, coord)?;
        current.symbols[coord] = repair.value;
        current.erasures.remove(&coord);
    }

    let parity = build_parity_check(code);
    let unknown: Vec<usize> = current.erasures.iter().copied().collect();
    match solve_unknowns(code, &parity, &current.symbols, &unknown) {
        Solution::Unique(values) => {
            for (&c, v) in unknown.iter().zip(values) {
                current.symbols[c] = v;
            }
            current.erasures.clear();
            Ok(current)
        }
        Solution::Underdetermined { rank } => Err(CodecError::Uncorrectable {
            rank,
            unknowns: unknown.len(),
        }),
        Solution::Inconsistent => Err(CodecError::Inconsistent),
    }
}

/// Whether the erased columns of the parity-check matrix are independent,
/// which is exactly when decoding succeeds on a consistent word.
pub fn is_recoverable(code: &CodeInstance, pattern: &ErasurePattern) -> bool {
    let parity = build_parity_check(code);
    let cols: Vec<usize> = pattern.coords().iter().copied().collect();
    parity.matrix().select_columns(&cols).rank(code.field()) == cols.len()
}
