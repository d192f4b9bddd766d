//! Arithmetic in GF(2^t) for `1 <= t <= 64`.
//!
//! Elements are `t`-bit masks in the polynomial basis `{1, x, ..., x^(t-1)}`;
//! addition is XOR and multiplication is carry-less multiplication followed by
//! reduction modulo the field's irreducible polynomial. A field may carry a
//! designated subfield GF(2^r), `r | t`, together with a fixed basis of
//! GF(2^t) over it so elements can be split into and rebuilt from subfield
//! coordinates.

mod binpoly;
mod subfield;

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

pub use binpoly::{canonical_modulus, is_irreducible, modulus_table, modulus_table_digest};
pub use subfield::Subfield;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("field degree {0} is outside 1..=64")]
    DegreeOutOfRange(u32),
    #[error("subfield degree {sub} does not divide field degree {degree}")]
    SubfieldDoesNotDivide { degree: u32, sub: u32 },
    #[error("modulus {modulus:#x} is not an irreducible polynomial of degree {degree}")]
    ReducibleModulus { degree: u32, modulus: u128 },
    #[error("no subfield is configured for GF(2^{0})")]
    NoSubfield(u32),
    #[error("expected {expected} subfield coordinates, got {got}")]
    CoordinateCount { expected: usize, got: usize },
    #[error("element {value:#x} does not fit in GF(2^{degree})")]
    ElementOutOfRange { degree: u32, value: u64 },
}

/// An element of some GF(2^t), stored as its coefficient bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub const fn from_bits(bits: u64) -> Self {
        FieldElement(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElement {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

impl Sum for FieldElement {
    fn sum<I: Iterator<Item = FieldElement>>(iter: I) -> FieldElement {
        iter.fold(FieldElement::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a FieldElement> for FieldElement {
    fn sum<I: Iterator<Item = &'a FieldElement>>(iter: I) -> FieldElement {
        iter.copied().sum()
    }
}

impl fmt::LowerHex for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// Description of GF(2^t): its degree, modulus and optional subfield.
///
/// Immutable after construction; all arithmetic goes through `&self`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDescriptor {
    degree: u32,
    modulus: u128,
    subfield: Option<Box<Subfield>>,
}

impl FieldDescriptor {
    /// GF(2^degree) with the canonical modulus, optionally with the subfield
    /// GF(2^subfield_degree) embedded.
    pub fn new(degree: u32, subfield_degree: Option<u32>) -> Result<Self, FieldError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(FieldError::DegreeOutOfRange(degree));
        }
        Self::with_modulus(degree, canonical_modulus(degree), subfield_degree)
    }

    /// GF(2^degree) defined by an explicit modulus (leading bit included).
    pub fn with_modulus(
        degree: u32,
        modulus: u128,
        subfield_degree: Option<u32>,
    ) -> Result<Self, FieldError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(FieldError::DegreeOutOfRange(degree));
        }
        if binpoly::degree(modulus) != Some(degree) || !is_irreducible(modulus) {
            return Err(FieldError::ReducibleModulus { degree, modulus });
        }
        if let Some(sub) = subfield_degree {
            if sub == 0 || !degree.is_multiple_of(sub) {
                return Err(FieldError::SubfieldDoesNotDivide { degree, sub });
            }
        }
        let mut field = FieldDescriptor {
            degree,
            modulus,
            subfield: None,
        };
        if let Some(sub) = subfield_degree {
            field.subfield = Some(Box::new(Subfield::build(&field, sub)?));
        }
        Ok(field)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    /// Number of elements, `2^t`.
    pub fn size(&self) -> u128 {
        1u128 << self.degree
    }

    /// Bitmask selecting the `t` coefficient bits.
    pub fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    pub fn subfield(&self) -> Option<&Subfield> {
        self.subfield.as_deref()
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 & !self.mask() == 0
    }

    pub fn element(&self, bits: u64) -> Result<FieldElement, FieldError> {
        let a = FieldElement(bits);
        if self.contains(a) {
            Ok(a)
        } else {
            Err(FieldError::ElementOutOfRange {
                degree: self.degree,
                value: bits,
            })
        }
    }

    /// The element `x`, the class of the indeterminate. In GF(2) this is 0
    /// because the canonical degree-1 modulus is `x` itself.
    pub fn generator(&self) -> FieldElement {
        self.reduce(0b10)
    }

    #[inline]
    fn reduce(&self, mut wide: u128) -> FieldElement {
        let t = self.degree;
        while wide >> t != 0 {
            let top = 127 - wide.leading_zeros();
            wide ^= self.modulus << (top - t);
        }
        FieldElement(wide as u64)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        self.reduce(binpoly::clmul(a.0, b.0))
    }

    #[inline]
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElement, mut exp: u128) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while exp != 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^t - 2)`; `None` for zero.
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        Some(self.pow(a, (1u128 << self.degree) - 2))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Option<FieldElement> {
        self.inv(b).map(|b_inv| self.mul(a, b_inv))
    }

    /// `a^(2^j)`. The Frobenius map has order `t`, so only `j mod t` squarings
    /// are performed.
    pub fn frobenius_power(&self, a: FieldElement, j: u64) -> FieldElement {
        let mut out = a;
        for _ in 0..j % self.degree as u64 {
            out = self.square(out);
        }
        out
    }

    /// Coordinates of `a` over the configured subfield, each a GF(2^r)
    /// element in that subfield's own polynomial basis.
    pub fn decompose_over_subfield(
        &self,
        a: FieldElement,
    ) -> Result<Vec<FieldElement>, FieldError> {
        let sub = self.subfield().ok_or(FieldError::NoSubfield(self.degree))?;
        Ok(sub.decompose(a))
    }

    /// Inverse of [`Self::decompose_over_subfield`].
    pub fn compose_over_subfield(
        &self,
        coords: &[FieldElement],
    ) -> Result<FieldElement, FieldError> {
        let sub = self.subfield().ok_or(FieldError::NoSubfield(self.degree))?;
        sub.compose(coords)
    }

    /// Every element of the field in increasing bitmask order. Only sensible
    /// for small degrees.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        let mask = self.mask();
        (0..=mask).map(FieldElement)
    }

    /// `degree modulus` as written in code-instance files.
    pub fn serialize(&self) -> String {
        format!("{} {:#x}", self.degree, self.modulus)
    }
}

/// GF(2^degree) with the canonical modulus.
pub fn make_field(
    degree: u32,
    subfield_degree: Option<u32>,
) -> Result<FieldDescriptor, FieldError> {
    FieldDescriptor::new(degree, subfield_degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(t: u32) -> FieldDescriptor {
        make_field(t, None).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(make_field(0, None), Err(FieldError::DegreeOutOfRange(0)));
        assert_eq!(make_field(65, None), Err(FieldError::DegreeOutOfRange(65)));
        assert_eq!(
            make_field(6, Some(4)),
            Err(FieldError::SubfieldDoesNotDivide { degree: 6, sub: 4 })
        );
        assert!(matches!(
            FieldDescriptor::with_modulus(4, 0b10101, None),
            Err(FieldError::ReducibleModulus { .. })
        ));
        assert_eq!(
            gf(4).decompose_over_subfield(FieldElement::ONE),
            Err(FieldError::NoSubfield(4))
        );
    }

    #[test]
    fn gf2_is_binary_arithmetic() {
        let f = gf(1);
        assert_eq!(f.modulus(), 0b10);
        let (zero, one) = (FieldElement::ZERO, FieldElement::ONE);
        assert_eq!(f.mul(one, one), one);
        assert_eq!(f.mul(one, zero), zero);
        assert_eq!(f.inv(one), Some(one));
        assert_eq!(f.elements().count(), 2);
    }

    #[test]
    fn gf4_products() {
        let f = gf(2);
        assert_eq!(f.modulus(), 0b111);
        let x = FieldElement::from_bits(0b10);
        assert_eq!(f.mul(x, x), FieldElement::from_bits(0b11));
        for a in f.elements() {
            assert_eq!(f.mul(a, FieldElement::ONE), a);
        }
    }

    #[test]
    fn gf256_inverses() {
        let f = gf(8);
        for a in f.elements().skip(1) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        }
        assert_eq!(f.inv(FieldElement::ZERO), None);
    }

    #[test]
    fn frobenius_examples() {
        for t in [1, 2, 3, 5, 8] {
            let f = gf(t);
            for a in f.elements() {
                assert_eq!(f.frobenius_power(a, 0), a);
                assert_eq!(f.frobenius_power(a, t as u64), a);
            }
        }
        let f = gf(64);
        let a = FieldElement::from_bits(0x0123_4567_89ab_cdef);
        assert_eq!(f.frobenius_power(a, 64), a);
        assert_eq!(f.frobenius_power(a, 3), f.pow(a, 8));
    }

    #[test]
    fn degree_64_inverse() {
        let f = gf(64);
        let a = FieldElement::from_bits(0xfeed_face_cafe_beef);
        assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        assert_eq!(f.mask(), u64::MAX);
    }

    #[test]
    fn element_range_check() {
        let f = gf(4);
        assert!(f.element(15).is_ok());
        assert_eq!(
            f.element(16),
            Err(FieldError::ElementOutOfRange {
                degree: 4,
                value: 16
            })
        );
    }

    #[test]
    fn serialization_includes_leading_bit() {
        assert_eq!(gf(8).serialize(), "8 0x11b");
        assert_eq!(gf(1).serialize(), "1 0x2");
    }
}
