//! Exact arithmetic for finite abelian groups, their Pontryagin duals, and
//! unit phases.
//!
//! A group is a product of cyclic factors `Z/n_1 x ... x Z/n_r` given by its
//! list of moduli, in the order supplied by the caller. Elements are
//! coordinate vectors reduced componentwise. The dual group is identified
//! with the group itself through the componentwise pairing
//! `(a, y) -> exp(2 pi i sum_i a_i y_i / n_i)`, so [`DualElement`] is an
//! alias for [`GroupElement`]; this fixes all phase conventions once and for
//! all. Phases are reduced fractions in `Q/Z` ([`UnitPhase`]) and stay exact
//! end to end; floating point enters only when a phase multiplies an
//! operator entry.

use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// An exact root of unity `exp(2 pi i num/den)`, stored as the reduced
/// fraction `num/den` in `Q/Z`.
///
/// Canonical form: `den >= 1`, `0 <= num < den`, `gcd(num, den) = 1`, so
/// equality of phases is structural equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitPhase {
    num: i64,
    den: i64,
}

impl UnitPhase {
    /// Reduce `num/den` to canonical form. Panics on a zero denominator.
    pub fn new(mut num: i64, mut den: i64) -> Self {
        assert!(den != 0, "unit phase with zero denominator");
        if den < 0 {
            num = -num;
            den = -den;
        }
        num = num.rem_euclid(den);
        let g = num.gcd(&den);
        UnitPhase {
            num: num / g,
            den: den / g,
        }
    }

    /// The trivial phase 1.
    pub fn one() -> Self {
        UnitPhase { num: 0, den: 1 }
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn as_fraction(&self) -> (i64, i64) {
        (self.num, self.den)
    }

    pub fn inv(&self) -> Self {
        UnitPhase::new(-self.num, self.den)
    }

    pub fn pow(&self, e: i64) -> Self {
        let num = (self.num as i128 * e as i128).rem_euclid(self.den as i128);
        UnitPhase::new(num as i64, self.den)
    }

    /// Evaluate as a complex number on the unit circle.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * self.num as f64 / self.den as f64)
    }
}

impl std::ops::Mul for UnitPhase {
    type Output = UnitPhase;

    fn mul(self, rhs: UnitPhase) -> UnitPhase {
        let den = self.den.lcm(&rhs.den);
        let num = self.num * (den / self.den) + rhs.num * (den / rhs.den);
        UnitPhase::new(num, den)
    }
}

impl fmt::Debug for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Display for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// An element of a [`FiniteAbelianGroup`], as a vector of reduced residues.
///
/// Elements do not carry a handle to their parent group; all arithmetic goes
/// through the group, which checks coordinate shapes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A character of the group, written additively in the same coordinates as
/// the group itself: `a` stands for `y -> exp(2 pi i sum_i a_i y_i / n_i)`.
pub type DualElement = GroupElement;

/// A finite abelian group `Z/n_1 x ... x Z/n_r`.
///
/// Elements are enumerated in mixed-radix order with the last coordinate
/// varying fastest: `index(x) = sum_i x_i * prod_{j>i} n_j`. The enumeration
/// is the row/column indexing used for all operators on `L^2(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    moduli: Vec<u64>,
    weights: Vec<u64>,
    order: u64,
    exponent: u64,
}

impl FiniteAbelianGroup {
    /// Build a group from its list of cyclic moduli (each at least 2).
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidGroup("empty list of moduli".into()));
        }
        let mut order: u64 = 1;
        let mut exponent: u64 = 1;
        for &n in moduli {
            if n < 2 {
                return Err(Error::InvalidGroup(format!("modulus {n} < 2")));
            }
            order = order
                .checked_mul(n)
                .ok_or_else(|| Error::InvalidGroup("group order overflows u64".into()))?;
            exponent = exponent.lcm(&n);
        }
        let mut weights = vec![1u64; moduli.len()];
        for i in (0..moduli.len().saturating_sub(1)).rev() {
            weights[i] = weights[i + 1] * moduli[i + 1];
        }
        Ok(FiniteAbelianGroup {
            moduli: moduli.to_vec(),
            weights,
            order,
            exponent,
        })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub(crate) fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_odd_order(&self) -> bool {
        self.order % 2 == 1
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.moduli.len()],
        }
    }

    /// Make an element from signed coordinates, reducing componentwise.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.moduli.len() {
            return Err(Error::ShapeMismatch {
                expected: self.moduli.len(),
                got: coords.len(),
            });
        }
        let coords = coords
            .iter()
            .zip(&self.moduli)
            .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
            .collect();
        Ok(GroupElement { coords })
    }

    /// The element at position `index` in the enumeration.
    pub fn element_at(&self, index: u64) -> GroupElement {
        assert!(index < self.order, "element index out of range");
        let mut rem = index;
        let coords = self
            .weights
            .iter()
            .map(|&w| {
                let c = rem / w;
                rem %= w;
                c
            })
            .collect();
        GroupElement { coords }
    }

    /// Position of `x` in the enumeration.
    pub fn index_of(&self, x: &GroupElement) -> u64 {
        debug_assert_eq!(x.coords.len(), self.moduli.len());
        x.coords
            .iter()
            .zip(&self.weights)
            .map(|(&c, &w)| c * w)
            .sum()
    }

    /// All elements, in enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| self.element_at(i))
    }

    fn check_shape(&self, x: &GroupElement) -> Result<()> {
        if x.coords.len() != self.moduli.len() {
            return Err(Error::ShapeMismatch {
                expected: self.moduli.len(),
                got: x.coords.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check_shape(x)?;
        self.check_shape(y)?;
        let coords = x
            .coords
            .iter()
            .zip(&y.coords)
            .zip(&self.moduli)
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        Ok(GroupElement { coords })
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.add(x, &self.neg(y)?)
    }

    pub fn neg(&self, x: &GroupElement) -> Result<GroupElement> {
        self.check_shape(x)?;
        let coords = x
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(&a, &n)| (n - a) % n)
            .collect();
        Ok(GroupElement { coords })
    }

    /// Integer multiple `c * x`.
    pub fn scale(&self, c: i64, x: &GroupElement) -> Result<GroupElement> {
        self.check_shape(x)?;
        let coords = x
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(&a, &n)| ((c as i128 * a as i128).rem_euclid(n as i128)) as u64)
            .collect();
        Ok(GroupElement { coords })
    }

    /// The inverse of doubling: the unique `y` with `2y = x`.
    ///
    /// Componentwise `y_i = ((n_i + 1)/2) * x_i mod n_i`; only defined when
    /// the group has odd order.
    pub fn halve(&self, x: &GroupElement) -> Result<GroupElement> {
        if !self.is_odd_order() {
            return Err(Error::EvenOrder);
        }
        self.check_shape(x)?;
        let coords = x
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(&a, &n)| (((n + 1) / 2) as u128 * a as u128 % n as u128) as u64)
            .collect();
        Ok(GroupElement { coords })
    }

    /// The standard pairing: `chi_a(y) = exp(2 pi i sum_i a_i y_i / n_i)`,
    /// returned exactly with denominator dividing the group exponent.
    pub fn pairing(&self, a: &DualElement, y: &GroupElement) -> Result<UnitPhase> {
        self.check_shape(a)?;
        self.check_shape(y)?;
        Ok(self.pairing_parts(&a.coords, &y.coords))
    }

    /// Pairing on raw reduced coordinate slices; shapes are the caller's
    /// responsibility.
    pub(crate) fn pairing_parts(&self, a: &[u64], y: &[u64]) -> UnitPhase {
        let den = self.exponent as i128;
        let mut num: i128 = 0;
        for ((&ai, &yi), &n) in a.iter().zip(y).zip(&self.moduli) {
            num += ai as i128 * yi as i128 % n as i128 * (den / n as i128);
        }
        UnitPhase::new(num.rem_euclid(den) as i64, den as i64)
    }
}
