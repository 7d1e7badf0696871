//! Arithmetic in prime fields `F_q`.
//!
//! Every [`FieldElement`] remembers the modulus it was created under, so
//! elements of different fields can never be combined silently: the checked
//! entry points on [`FieldCtx`] return [`GfError::FieldMismatch`] and the
//! operator overloads panic.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest modulus accepted by [`FieldCtx::new`]. Products of two residues
/// stay far below `u64::MAX`.
pub const MAX_MODULUS: u32 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("q must be prime (got {0})")]
    NotPrime(u32),
    #[error("q must be at most {MAX_MODULUS} (got {0})")]
    ModulusTooLarge(u32),
    #[error("elements belong to different fields (F_{0} vs F_{1})")]
    FieldMismatch(u32, u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("t must divide q-1 (q={q}, t={t})")]
    SubgroupOrder { q: u32, t: u32 },
}

/// Binary field operation selector for [`FieldCtx::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
}

/// The prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldCtx {
    q: u32,
}

/// A canonical residue in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u32,
    q: u32,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldCtx {
    pub fn new(q: u32) -> Result<Self, GfError> {
        if q > MAX_MODULUS {
            return Err(GfError::ModulusTooLarge(q));
        }
        if !is_prime(q) {
            return Err(GfError::NotPrime(q));
        }
        Ok(FieldCtx { q })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> FieldElement {
        FieldElement {
            value: (v % self.q as u64) as u32,
            q: self.q,
        }
    }

    /// Reduces a signed integer into the field.
    pub fn elem_i64(&self, v: i64) -> FieldElement {
        FieldElement {
            value: v.rem_euclid(self.q as i64) as u32,
            q: self.q,
        }
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    fn check(&self, a: FieldElement) -> Result<(), GfError> {
        if a.q != self.q {
            Err(GfError::FieldMismatch(self.q, a.q))
        } else {
            Ok(())
        }
    }

    /// Checked binary operation; rejects operands from another field.
    pub fn arith(&self, op: Op, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(match op {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
        })
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        a.inv()
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> Result<FieldElement, GfError> {
        self.check(a)?;
        Ok(a.pow(e))
    }

    /// All elements `0, 1, ..., q-1` in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |v| FieldElement {
            value: v,
            q: self.q,
        })
    }

    /// The multiplicative subgroup of order `t`, i.e. the roots of `x^t = 1`,
    /// sorted by residue.
    pub fn subgroup_of_order(&self, t: u32) -> Result<Vec<FieldElement>, GfError> {
        if t == 0 || !(self.q - 1).is_multiple_of(t) {
            return Err(GfError::SubgroupOrder { q: self.q, t });
        }
        let h: Vec<FieldElement> = self
            .elements()
            .skip(1)
            .filter(|x| x.pow(t as u64).value == 1)
            .collect();
        debug_assert_eq!(h.len(), t as usize);
        Ok(h)
    }
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.q
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// The zero of the same field.
    #[inline]
    pub fn zero_like(self) -> FieldElement {
        FieldElement {
            value: 0,
            q: self.q,
        }
    }

    /// Square-and-multiply; `0^0 = 1`.
    pub fn pow(self, mut e: u64) -> FieldElement {
        let q = self.q as u64;
        let mut base = self.value as u64;
        let mut acc = 1 % q;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            e >>= 1;
        }
        FieldElement {
            value: acc as u32,
            q: self.q,
        }
    }

    /// Inverse via Fermat's little theorem.
    pub fn inv(self) -> Result<FieldElement, GfError> {
        if self.value == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(self.pow(self.q as u64 - 2))
    }

    #[inline]
    fn same_field(self, rhs: FieldElement) {
        assert_eq!(self.q, rhs.q, "field mismatch: F_{} vs F_{}", self.q, rhs.q);
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.same_field(rhs);
        let s = self.value + rhs.value;
        FieldElement {
            value: if s >= self.q { s - self.q } else { s },
            q: self.q,
        }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.same_field(rhs);
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + self.q - rhs.value
        };
        FieldElement {
            value: v,
            q: self.q,
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.same_field(rhs);
        FieldElement {
            value: ((self.value as u64 * rhs.value as u64) % self.q as u64) as u32,
            q: self.q,
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn neg(self) -> FieldElement {
        FieldElement {
            value: if self.value == 0 {
                0
            } else {
                self.q - self.value
            },
            q: self.q,
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> FieldCtx {
        FieldCtx::new(q).unwrap()
    }

    #[test]
    fn small_arith() {
        let k = f(7);
        assert_eq!(k.arith(Op::Add, k.elem(3), k.elem(5)).unwrap().value(), 1);
        assert_eq!(k.arith(Op::Mul, k.elem(3), k.elem(5)).unwrap().value(), 1);
        assert_eq!(k.arith(Op::Sub, k.elem(0), k.elem(1)).unwrap().value(), 6);
    }

    #[test]
    fn mismatch_is_rejected() {
        let a = f(7).elem(3);
        let b = f(5).elem(3);
        assert_eq!(f(7).arith(Op::Add, a, b), Err(GfError::FieldMismatch(7, 5)));
        assert!(f(5).inv(a).is_err());
    }

    #[test]
    #[should_panic(expected = "field mismatch")]
    fn mismatch_panics_in_operators() {
        let _ = f(7).elem(1) * f(11).elem(1);
    }

    #[test]
    fn inverses() {
        let k = f(7);
        assert_eq!(k.elem(3).inv().unwrap().value(), 5);
        for q in [2, 3, 5, 7, 11, 13, 31] {
            let k = f(q);
            assert_eq!(k.one().inv().unwrap(), k.one());
            let m1 = k.elem(q as u64 - 1);
            assert_eq!(m1.inv().unwrap(), m1);
            assert_eq!(k.zero().inv(), Err(GfError::ZeroInverse));
        }
    }

    #[test]
    fn powers() {
        let k = f(7);
        assert_eq!(k.elem(2).pow(3).value(), 1);
        assert_eq!(k.zero().pow(5).value(), 0);
        assert_eq!(k.zero().pow(0).value(), 1);
        for a in k.elements().skip(1) {
            assert_eq!(a.pow(6).value(), 1);
        }
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(FieldCtx::new(4), Err(GfError::NotPrime(4)));
        assert_eq!(FieldCtx::new(1), Err(GfError::NotPrime(1)));
        assert_eq!(FieldCtx::new(0), Err(GfError::NotPrime(0)));
        assert!(matches!(
            FieldCtx::new(2_000_003),
            Err(GfError::ModulusTooLarge(_))
        ));
        assert!(FieldCtx::new(1_048_573).is_ok());
    }

    #[test]
    fn element_listing() {
        let v: Vec<u32> = f(2).elements().map(|x| x.value()).collect();
        assert_eq!(v, vec![0, 1]);
        let v: Vec<u32> = f(3).elements().map(|x| x.value()).collect();
        assert_eq!(v, vec![0, 1, 2]);
        assert_eq!(f(13).elements().count(), 13);
    }

    fn values(h: &[FieldElement]) -> Vec<u32> {
        h.iter().map(|x| x.value()).collect()
    }

    #[test]
    fn subgroups() {
        assert_eq!(values(&f(7).subgroup_of_order(3).unwrap()), vec![1, 2, 4]);
        assert_eq!(values(&f(5).subgroup_of_order(2).unwrap()), vec![1, 4]);
        assert_eq!(
            values(&f(13).subgroup_of_order(4).unwrap()),
            vec![1, 5, 8, 12]
        );
        assert!(f(7).subgroup_of_order(4).is_err());
    }

    // Brute-force oracle: x^t computed by repeated multiplication.
    #[test]
    fn subgroup_matches_enumeration() {
        for q in [3u32, 5, 7, 11, 13, 31] {
            let k = f(q);
            for t in 2..q {
                if (q - 1) % t != 0 {
                    continue;
                }
                let oracle: Vec<u32> = (1..q)
                    .filter(|&x| (0..t).fold(1u64, |acc, _| acc * x as u64 % q as u64) == 1)
                    .collect();
                let h = k.subgroup_of_order(t).unwrap();
                assert_eq!(values(&h), oracle);
                assert_eq!(h.len(), t as usize);
                for &a in &h {
                    assert!(h.contains(&a.inv().unwrap()));
                    for &b in &h {
                        assert!(h.contains(&(a * b)));
                    }
                }
                let sum = h.iter().fold(k.zero(), |acc, &x| acc + x);
                assert!(sum.is_zero(), "sum of H nonzero for q={q} t={t}");
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2u32, 3, 5, 7, 11, 13] {
            let k = f(q);
            let els: Vec<_> = k.elements().collect();
            for &a in &els {
                assert_eq!(a + k.zero(), a);
                assert_eq!(a * k.one(), a);
                assert_eq!(a + (-a), k.zero());
                if !a.is_zero() {
                    assert_eq!(a * a.inv().unwrap(), k.one());
                }
                for &b in &els {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    assert_eq!((a - b) + b, a);
                    for &c in &els {
                        assert_eq!((a + b) + c, a + (b + c));
                        assert_eq!((a * b) * c, a * (b * c));
                        assert_eq!(a * (b + c), a * b + a * c);
                    }
                }
            }
        }
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        for q in [2u32, 3, 5, 7, 11, 13] {
            let k = f(q);
            for a in k.elements() {
                let mut acc = k.one();
                for e in 0..=20u64 {
                    assert_eq!(a.pow(e), acc, "q={q} a={a} e={e}");
                    acc = acc * a;
                }
            }
        }
    }

    #[test]
    fn serializes_as_residue() {
        assert_eq!(serde_json::to_string(&f(7).elem(12)).unwrap(), "5");
    }
}
