//! Polynomials over GF(2) packed into `u128` bitmasks (bit `i` is the
//! coefficient of `x^i`). Enough machinery to pick and test moduli of degree
//! up to 64.

use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use super::MAX_DEGREE;

pub(crate) fn degree(p: u128) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(127 - p.leading_zeros())
    }
}

/// Remainder of `a` modulo a nonzero `m`.
pub(crate) fn rem(mut a: u128, m: u128) -> u128 {
    let dm = degree(m).expect("division by the zero polynomial");
    while let Some(da) = degree(a) {
        if da < dm {
            break;
        }
        a ^= m << (da - dm);
    }
    a
}

pub(crate) fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Carry-less product of two polynomials of degree < 64.
pub(crate) fn clmul(a: u64, b: u64) -> u128 {
    let (a, mut b) = (a as u128, b);
    let mut acc = 0u128;
    let mut shift = 0;
    while b != 0 {
        let tz = b.trailing_zeros();
        shift += tz;
        acc ^= a << shift;
        b >>= tz;
        b >>= 1;
        shift += 1;
    }
    acc
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    // Both operands are already reduced, so they have degree < 64.
    rem(clmul(a as u64, b as u64), m)
}

/// Ben-Or irreducibility test: `f` of degree `t` is irreducible iff
/// `gcd(f, x^(2^i) - x) = 1` for every `1 <= i <= t/2`.
pub fn is_irreducible(f: u128) -> bool {
    let t = match degree(f) {
        Some(0) | None => return false,
        Some(t) => t,
    };
    if t > MAX_DEGREE {
        return false;
    }
    let x = rem(0b10, f);
    let mut power = x;
    for _ in 0..t / 2 {
        power = mulmod(power, power, f);
        if gcd(f, power ^ x) != 1 {
            return false;
        }
    }
    true
}

/// Smallest irreducible polynomial of the given degree, ordered as an
/// integer bitmask. Degree 1 yields `x` itself.
pub fn canonical_modulus(degree: u32) -> u128 {
    assert!((1..=MAX_DEGREE).contains(&degree));
    static TABLE: OnceLock<Vec<OnceLock<u128>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| (0..=MAX_DEGREE).map(|_| OnceLock::new()).collect());
    *table[degree as usize].get_or_init(|| {
        let lead = 1u128 << degree;
        (lead..lead << 1)
            .find(|&candidate| is_irreducible(candidate))
            .expect("every degree has an irreducible polynomial")
    })
}

/// The canonical modulus table rendered one `degree 0x<hex>` line per degree.
pub fn modulus_table() -> String {
    (1..=MAX_DEGREE)
        .map(|d| format!("{d} {:#x}\n", canonical_modulus(d)))
        .collect()
}

/// SHA-256 of [`modulus_table`] as lowercase hex.
pub fn modulus_table_digest() -> String {
    let digest = Sha256::digest(modulus_table().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
