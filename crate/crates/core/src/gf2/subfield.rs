use super::{FieldDescriptor, FieldElement, FieldError};

/// GF(2^r) embedded in a parent GF(2^t), `r | t`.
///
/// The embedding sends the subfield's polynomial generator to `theta`, the
/// smallest (as a bitmask) root of the subfield modulus in the parent field.
/// GF(2^t) is then a `t/r`-dimensional space over the image with basis
/// `{1, x, ..., x^(t/r - 1)}`, where `x` is the parent's own generator; `x`
/// generates GF(2^t) over GF(2), so its powers are independent over any
/// subfield.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subfield {
    field: FieldDescriptor,
    theta: FieldElement,
    /// `theta^u` for `u < r`: the images of the subfield's polynomial basis.
    images: Vec<FieldElement>,
    /// GF(2)-basis of the parent, index `j * r + u` holding `theta^u * x^j`.
    basis: Vec<FieldElement>,
    /// Rows of the inverse change of basis; coordinate bit `b` of `a` is the
    /// parity of `inverse[b] & a`.
    inverse: Vec<u64>,
}

impl Subfield {
    pub(super) fn build(parent: &FieldDescriptor, r: u32) -> Result<Self, FieldError> {
        let field = FieldDescriptor::new(r, None)?;
        let t = parent.degree();
        let theta = smallest_root(parent, field.modulus());

        let mut images = Vec::with_capacity(r as usize);
        let mut power = FieldElement::ONE;
        for _ in 0..r {
            images.push(power);
            power = parent.mul(power, theta);
        }

        let x = parent.generator();
        let mut basis = Vec::with_capacity(t as usize);
        let mut x_power = FieldElement::ONE;
        for _ in 0..t / r {
            basis.extend(images.iter().map(|&img| parent.mul(img, x_power)));
            x_power = parent.mul(x_power, x);
        }
        let inverse = invert_gf2(&basis, t).expect("subfield basis must be invertible");

        Ok(Subfield {
            field,
            theta,
            images,
            basis,
            inverse,
        })
    }

    /// The subfield as a standalone GF(2^r).
    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn degree(&self) -> u32 {
        self.field.degree()
    }

    /// Image of the subfield's generator.
    pub fn theta(&self) -> FieldElement {
        self.theta
    }

    /// Number of subfield coordinates of a parent element.
    pub fn dimension(&self) -> usize {
        self.basis.len() / self.images.len()
    }

    /// The field homomorphism GF(2^r) -> GF(2^t).
    pub fn embed(&self, c: FieldElement) -> FieldElement {
        bits_of(c.bits()).map(|u| self.images[u]).sum()
    }

    /// Inverse of [`Self::embed`] on its image; `None` for elements outside it.
    pub fn project(&self, a: FieldElement) -> Option<FieldElement> {
        let coords = self.decompose(a);
        if coords[1..].iter().all(|c| c.is_zero()) {
            Some(coords[0])
        } else {
            None
        }
    }

    pub fn decompose(&self, a: FieldElement) -> Vec<FieldElement> {
        let r = self.degree();
        let mut bits = 0u64;
        for (b, row) in self.inverse.iter().enumerate() {
            bits |= (((row & a.bits()).count_ones() & 1) as u64) << b;
        }
        let mask = self.field.mask();
        (0..self.dimension())
            .map(|j| FieldElement::from_bits(bits.checked_shr(j as u32 * r).unwrap_or(0) & mask))
            .collect()
    }

    pub fn compose(&self, coords: &[FieldElement]) -> Result<FieldElement, FieldError> {
        if coords.len() != self.dimension() {
            return Err(FieldError::CoordinateCount {
                expected: self.dimension(),
                got: coords.len(),
            });
        }
        let r = self.images.len();
        let mut out = FieldElement::ZERO;
        for (j, &c) in coords.iter().enumerate() {
            if !self.field.contains(c) {
                return Err(FieldError::ElementOutOfRange {
                    degree: self.degree(),
                    value: c.bits(),
                });
            }
            for u in bits_of(c.bits()) {
                out += self.basis[j * r + u];
            }
        }
        Ok(out)
    }
}

fn bits_of(mut v: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if v == 0 {
            None
        } else {
            let b = v.trailing_zeros() as usize;
            v &= v - 1;
            Some(b)
        }
    })
}

/// Inverts the `t x t` GF(2) matrix whose columns are `columns`.
fn invert_gf2(columns: &[FieldElement], t: u32) -> Option<Vec<u64>> {
    let t = t as usize;
    // rows[i] bit j = bit i of column j
    let mut rows: Vec<u64> = (0..t)
        .map(|i| {
            columns
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, c)| acc | (((c.bits() >> i) & 1) << j))
        })
        .collect();
    let mut inv: Vec<u64> = (0..t).map(|i| 1u64 << i).collect();
    for col in 0..t {
        let pivot = (col..t).find(|&i| (rows[i] >> col) & 1 == 1)?;
        rows.swap(col, pivot);
        inv.swap(col, pivot);
        for i in 0..t {
            if i != col && (rows[i] >> col) & 1 == 1 {
                rows[i] ^= rows[col];
                inv[i] ^= inv[col];
            }
        }
    }
    Some(inv)
}

/// Dense polynomial over the parent field, lowest coefficient first, no
/// trailing zeros.
type Poly = Vec<FieldElement>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_rem(f: &FieldDescriptor, mut a: Poly, m: &[FieldElement]) -> Poly {
    let dm = m.len() - 1;
    let lead_inv = f.inv(m[dm]).expect("nonzero leading coefficient");
    while a.len() > dm {
        let top = a.len() - 1;
        let q = f.mul(*a.last().unwrap(), lead_inv);
        for (i, &mi) in m.iter().enumerate() {
            a[top - dm + i] += f.mul(q, mi);
        }
        a = trim(a);
    }
    a
}

fn poly_div_exact(f: &FieldDescriptor, a: &[FieldElement], m: &[FieldElement]) -> Poly {
    let dm = m.len() - 1;
    let lead_inv = f.inv(m[dm]).unwrap();
    let mut rem = a.to_vec();
    let mut quot = vec![FieldElement::ZERO; a.len() - dm];
    while rem.len() > dm {
        let top = rem.len() - 1;
        let q = f.mul(*rem.last().unwrap(), lead_inv);
        quot[top - dm] = q;
        for (i, &mi) in m.iter().enumerate() {
            rem[top - dm + i] += f.mul(q, mi);
        }
        rem = trim(rem);
    }
    debug_assert!(rem.is_empty());
    trim(quot)
}

fn poly_gcd(f: &FieldDescriptor, a: Poly, b: Poly) -> Poly {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let r = poly_rem(f, a, &b);
        a = b;
        b = r;
    }
    a
}

/// `p^2 mod m`; squaring is coefficientwise in characteristic 2.
fn poly_square_mod(f: &FieldDescriptor, p: &[FieldElement], m: &[FieldElement]) -> Poly {
    let mut sq = vec![FieldElement::ZERO; p.len() * 2];
    for (i, &c) in p.iter().enumerate() {
        sq[2 * i] = f.square(c);
    }
    poly_rem(f, trim(sq), m)
}

/// Smallest root in `parent` of the binary polynomial `modulus`, which must
/// split into distinct linear factors there (true when its degree divides
/// the parent degree).
fn smallest_root(parent: &FieldDescriptor, modulus: u128) -> FieldElement {
    let r = 127 - modulus.leading_zeros();
    let poly: Poly = (0..=r)
        .map(|i| FieldElement::from_bits(((modulus >> i) & 1) as u64))
        .collect();
    let root = one_root(parent, poly);
    (0..r as u64)
        .map(|i| parent.frobenius_power(root, i))
        .min()
        .unwrap()
}

/// Berlekamp trace splitting: for `delta` running over the polynomial basis,
/// `gcd(f, Tr(delta * y))` separates any two roots whose traces differ, and
/// some basis element separates every pair because the trace form is
/// nondegenerate.
fn one_root(field: &FieldDescriptor, mut f: Poly) -> FieldElement {
    let t = field.degree();
    'split: loop {
        if f.len() == 2 {
            return field.div(f[0], f[1]).unwrap();
        }
        for i in 0..t {
            let delta = field.pow(field.generator(), i as u128);
            let delta = if t == 1 { FieldElement::ONE } else { delta };
            let mut term = poly_rem(field, vec![FieldElement::ZERO, delta], &f);
            let mut trace = term.clone();
            for _ in 1..t {
                term = poly_square_mod(field, &term, &f);
                trace.resize(trace.len().max(term.len()), FieldElement::ZERO);
                for (acc, &c) in trace.iter_mut().zip(&term) {
                    *acc += c;
                }
            }
            let g = poly_gcd(field, f.clone(), trim(trace));
            if g.len() > 1 && g.len() < f.len() {
                let cofactor = poly_div_exact(field, &f, &g);
                f = if g.len() <= cofactor.len() {
                    g
                } else {
                    cofactor
                };
                continue 'split;
            }
        }
        unreachable!("polynomial does not split into distinct linear factors");
    }
}
