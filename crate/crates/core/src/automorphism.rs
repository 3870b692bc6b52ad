//! Centre-fixing automorphisms of the Heisenberg group, the symplectic group
//! over `Z/p^n`, and closure/orbit machinery on the phase space.
//!
//! An automorphism fixing the unit-circle centre acts on Weyl operators as
//! `W_k -> sigma1(k) W_{sigma2(k)}`, where `sigma2` must be an additive
//! bijection of `K` and the pair must satisfy the exact phase constraint
//!
//! ```text
//! sigma1(k) sigma1(l) sigma1(k+l)^{-1} = c(k, l) c(sigma2 k, sigma2 l)^{-1}
//! ```
//!
//! on every pair of phase points. [`CentreFixingAutomorphism::validate`]
//! checks both conditions exhaustively in exact phase arithmetic. A
//! `sigma2` preserving the commutator form always admits such a `sigma1` in
//! the odd-order case (the canonical section [`from_symplectic`]); in
//! general [`lift`] solves the constraint as a congruence system with an
//! escalating phase denominator.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::abelian::UnitPhase;
use crate::error::{Error, Result};
use crate::heisenberg::{PhasePoint, PhaseSpace};
use crate::modsolve::CongruenceSystem;

/// Default element bound for [`closure`].
pub const DEFAULT_CLOSURE_BOUND: usize = 1_000_000;

/// An additive bijection of the phase space `K`, stored as an image table on
/// the enumeration of `K`. When the automorphism came from a symplectic
/// matrix the matrix is kept alongside.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KAutomorphism {
    table: Vec<u32>,
    matrix: Option<SymplecticMatrix>,
}

impl KAutomorphism {
    /// Validate a raw image table: it must be a bijection and additive on
    /// every pair of phase points.
    pub fn from_table(space: &PhaseSpace, table: Vec<u32>) -> Result<Self> {
        let kn = space.len();
        if table.len() != kn {
            return Err(Error::ShapeMismatch {
                expected: kn,
                got: table.len(),
            });
        }
        let mut seen = vec![false; kn];
        for &img in &table {
            let img = img as usize;
            if img >= kn || seen[img] {
                return Err(Error::NotBijective);
            }
            seen[img] = true;
        }
        let points: Vec<PhasePoint> = space.points().collect();
        for i in 0..kn {
            for j in i..kn {
                let sum = space.index_of(&space.add(&points[i], &points[j]));
                let img_sum = space.index_of(&space.add(
                    &points[table[i] as usize],
                    &points[table[j] as usize],
                ));
                if table[sum] as usize != img_sum {
                    return Err(Error::NotAdditive { k: i, l: j });
                }
            }
        }
        Ok(KAutomorphism {
            table,
            matrix: None,
        })
    }

    /// Build and validate the table of a pointwise map.
    pub fn from_fn(
        space: &PhaseSpace,
        f: impl Fn(&PhasePoint) -> PhasePoint,
    ) -> Result<Self> {
        let table = space
            .points()
            .map(|k| space.index_of(&f(&k)) as u32)
            .collect();
        KAutomorphism::from_table(space, table)
    }

    pub fn identity(space: &PhaseSpace) -> Self {
        KAutomorphism {
            table: (0..space.len() as u32).collect(),
            matrix: None,
        }
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn matrix(&self) -> Option<&SymplecticMatrix> {
        self.matrix.as_ref()
    }

    pub fn apply_idx(&self, index: usize) -> usize {
        self.table[index] as usize
    }

    pub fn apply(&self, space: &PhaseSpace, k: &PhasePoint) -> PhasePoint {
        space.point_at(self.apply_idx(space.index_of(k)))
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// Composite `self o other` (apply `other` first).
    pub fn compose(&self, other: &KAutomorphism) -> KAutomorphism {
        assert_eq!(self.table.len(), other.table.len());
        let table = other.table.iter().map(|&i| self.table[i as usize]).collect();
        let matrix = match (&self.matrix, &other.matrix) {
            (Some(a), Some(b)) => Some(a.mul(b)),
            _ => None,
        };
        KAutomorphism { table, matrix }
    }

    pub fn inverse(&self) -> KAutomorphism {
        let mut table = vec![0u32; self.table.len()];
        for (i, &v) in self.table.iter().enumerate() {
            table[v as usize] = i as u32;
        }
        KAutomorphism {
            table,
            matrix: None,
        }
    }

    /// Whether `e(k, l) = e(alpha k, alpha l)` on every pair.
    pub fn preserves_commutator(&self, space: &PhaseSpace) -> bool {
        let points: Vec<PhasePoint> = space.points().collect();
        let images: Vec<PhasePoint> = self
            .table
            .iter()
            .map(|&i| points[i as usize].clone())
            .collect();
        for (i, k) in points.iter().enumerate() {
            for (j, l) in points.iter().enumerate().skip(i + 1) {
                if space.commutator_form(k, l) != space.commutator_form(&images[i], &images[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// The subgroup of phase points fixed by this automorphism.
    pub fn fixed_point_indices(&self) -> Vec<usize> {
        self.table
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| (i == v as usize).then_some(i))
            .collect()
    }

    fn key_bytes(&self) -> Vec<u8> {
        self.table.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

/// A `2g x 2g` matrix over `Z/p^n`, acting on `K = (Z/p^n)^{2g}` written as
/// column vectors `(x, y)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymplecticMatrix {
    g: usize,
    modulus: u64,
    entries: Vec<u64>,
}

impl std::fmt::Debug for SymplecticMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d = 2 * self.g;
        write!(f, "[mod {}]", self.modulus)?;
        for r in 0..d {
            write!(f, " [")?;
            for c in 0..d {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.entries[r * d + c])?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl SymplecticMatrix {
    pub fn new(g: usize, modulus: u64, entries: &[i64]) -> Result<Self> {
        let d = 2 * g;
        if g == 0 || entries.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {d}x{d} matrix",
                d * d
            )));
        }
        if modulus < 2 {
            return Err(Error::InvalidArgument("modulus must be at least 2".into()));
        }
        let entries = entries
            .iter()
            .map(|&e| e.rem_euclid(modulus as i64) as u64)
            .collect();
        Ok(SymplecticMatrix {
            g,
            modulus,
            entries,
        })
    }

    pub fn identity(g: usize, modulus: u64) -> Self {
        let d = 2 * g;
        let mut entries = vec![0u64; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        SymplecticMatrix {
            g,
            modulus,
            entries,
        }
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.entries[row * 2 * self.g + col]
    }

    pub fn mul(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        assert_eq!(self.g, other.g);
        assert_eq!(self.modulus, other.modulus);
        let d = 2 * self.g;
        let m = self.modulus as u128;
        let mut entries = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: u128 = 0;
                for t in 0..d {
                    acc += self.entries[i * d + t] as u128 * other.entries[t * d + j] as u128;
                }
                entries[i * d + j] = (acc % m) as u64;
            }
        }
        SymplecticMatrix {
            g: self.g,
            modulus: self.modulus,
            entries,
        }
    }

    /// Whether `M^T J M = J (mod p^n)` for the standard symplectic Gram
    /// matrix `J`.
    pub fn is_symplectic(&self) -> bool {
        let d = 2 * self.g;
        let m = self.modulus as i128;
        // J has block form [[0, I], [-I, 0]].
        let j_entry = |r: usize, c: usize| -> i128 {
            if c == r + self.g {
                1
            } else if r == c + self.g {
                -1
            } else {
                0
            }
        };
        for a in 0..d {
            for b in 0..d {
                let mut acc: i128 = 0;
                for r in 0..d {
                    for c in 0..d {
                        let jrc = j_entry(r, c);
                        if jrc == 0 {
                            continue;
                        }
                        acc += self.entries[r * d + a] as i128 * jrc
                            * self.entries[c * d + b] as i128;
                    }
                }
                if (acc - j_entry(a, b)).rem_euclid(m) != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Reduce entries modulo a divisor of the modulus.
    pub fn reduced(&self, new_modulus: u64) -> Result<SymplecticMatrix> {
        if new_modulus < 2 || self.modulus % new_modulus != 0 {
            return Err(Error::InvalidArgument(format!(
                "{new_modulus} does not divide {}",
                self.modulus
            )));
        }
        Ok(SymplecticMatrix {
            g: self.g,
            modulus: new_modulus,
            entries: self.entries.iter().map(|&e| e % new_modulus).collect(),
        })
    }

    /// Interpret the matrix as an automorphism of the phase space of
    /// `A = (Z/p^n)^g`. Requires the base group to be homogeneous with
    /// matching modulus and rank.
    pub fn to_k_automorphism(&self, space: &PhaseSpace) -> Result<KAutomorphism> {
        let base = space.base();
        if base.rank() != self.g || base.moduli().iter().any(|&n| n != self.modulus) {
            return Err(Error::InvalidArgument(format!(
                "matrix over Z/{} of genus {} does not act on A with moduli {:?}",
                self.modulus,
                self.g,
                base.moduli()
            )));
        }
        let d = 2 * self.g;
        let m = self.modulus as u128;
        let mut table = Vec::with_capacity(space.len());
        for k in space.points() {
            let x = space.x_part(&k);
            let chi = space.chi_part(&k);
            let v: Vec<u64> = x
                .coords()
                .iter()
                .chain(chi.coords().iter())
                .copied()
                .collect();
            let mut img = vec![0i64; d];
            for (i, out) in img.iter_mut().enumerate() {
                let mut acc: u128 = 0;
                for (j, &vj) in v.iter().enumerate() {
                    acc += self.entries[i * d + j] as u128 * vj as u128;
                }
                *out = (acc % m) as i64;
            }
            let xi = base.element(&img[..self.g])?;
            let ci = base.element(&img[self.g..])?;
            table.push(space.index_of(&space.point(&xi, &ci)?) as u32);
        }
        // Bijectivity is checked in full; additivity on (basis generator,
        // any point) pairs, which implies it on all pairs by induction over
        // the coordinates of the first argument.
        let kn = space.len();
        let mut seen = vec![false; kn];
        for &img in &table {
            let img = img as usize;
            if img >= kn || seen[img] {
                return Err(Error::NotBijective);
            }
            seen[img] = true;
        }
        let points: Vec<PhasePoint> = space.points().collect();
        for gen_idx in basis_generator_indices(space) {
            for l in 0..kn {
                let sum = space.index_of(&space.add(&points[gen_idx], &points[l]));
                let img_sum = space.index_of(&space.add(
                    &points[table[gen_idx] as usize],
                    &points[table[l] as usize],
                ));
                if table[sum] as usize != img_sum {
                    return Err(Error::NotAdditive { k: gen_idx, l });
                }
            }
        }
        Ok(KAutomorphism {
            table,
            matrix: Some(self.clone()),
        })
    }

    fn key_bytes(&self) -> Vec<u8> {
        self.entries.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

/// Indices of the coordinate generators of the phase space: the points with
/// a single coordinate equal to 1.
fn basis_generator_indices(space: &PhaseSpace) -> Vec<usize> {
    let base = space.base();
    let rank = base.rank();
    (0..2 * rank)
        .map(|i| {
            let mut coords = vec![0i64; 2 * rank];
            coords[i] = 1;
            let x = base.element(&coords[..rank]).expect("valid coords");
            let chi = base.element(&coords[rank..]).expect("valid coords");
            space.index_of(&space.point(&x, &chi).expect("valid point"))
        })
        .collect()
}

/// Generators of `Sp_2g(Z/p^n)`: for `g = 1` the classical pair
/// `S = [[0,1],[-1,0]]`, `T = [[1,1],[0,1]]`; for larger `g` the symplectic
/// rotation `J` together with Siegel-parabolic translations over elementary
/// symmetric matrices and the `GL_g` block embeddings of elementary
/// transvections (the reduction from the integral symplectic group is
/// surjective, so these generate).
pub fn symplectic_generators(p: u64, n: u32, g: usize) -> Result<Vec<SymplecticMatrix>> {
    if g == 0 || n == 0 || p < 2 {
        return Err(Error::InvalidArgument(
            "need p >= 2, n >= 1, g >= 1".into(),
        ));
    }
    let modulus = p
        .checked_pow(n)
        .ok_or_else(|| Error::InvalidArgument("modulus overflows u64".into()))?;
    if g == 1 {
        return Ok(vec![
            SymplecticMatrix::new(1, modulus, &[0, 1, -1, 0])?,
            SymplecticMatrix::new(1, modulus, &[1, 1, 0, 1])?,
        ]);
    }
    let d = 2 * g;
    let mut gens = Vec::new();
    // J = [[0, I], [-I, 0]]
    let mut j = vec![0i64; d * d];
    for i in 0..g {
        j[i * d + (i + g)] = 1;
        j[(i + g) * d + i] = -1;
    }
    gens.push(SymplecticMatrix::new(g, modulus, &j)?);
    // T_B = [[I, B], [0, I]] for elementary symmetric B
    let mut push_translation = |b: Vec<(usize, usize)>| -> Result<()> {
        let mut t = vec![0i64; d * d];
        for i in 0..d {
            t[i * d + i] = 1;
        }
        for (r, c) in b {
            t[r * d + (c + g)] += 1;
        }
        gens.push(SymplecticMatrix::new(g, modulus, &t)?);
        Ok(())
    };
    for i in 0..g {
        push_translation(vec![(i, i)])?;
    }
    for i in 0..g {
        for jx in i + 1..g {
            push_translation(vec![(i, jx), (jx, i)])?;
        }
    }
    // D_U = diag(U, (U^T)^{-1}) for U = I + E_{ij}
    for i in 0..g {
        for jx in 0..g {
            if i == jx {
                continue;
            }
            let mut m = vec![0i64; d * d];
            for t in 0..d {
                m[t * d + t] = 1;
            }
            m[i * d + jx] = 1;
            m[(g + jx) * d + (g + i)] = -1;
            gens.push(SymplecticMatrix::new(g, modulus, &m)?);
        }
    }
    Ok(gens)
}

/// A validated centre-fixing automorphism: the pair `(sigma1, sigma2)` with
/// `sigma1` stored as one exact phase per phase-space index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentreFixingAutomorphism {
    sigma1: Vec<UnitPhase>,
    sigma2: KAutomorphism,
}

impl CentreFixingAutomorphism {
    /// Check the phase constraint on all `|K|^2` pairs and return the
    /// validated automorphism. The error names the first failing pair.
    ///
    /// The pair loop works on integer phase exponents modulo the common
    /// denominator of every phase involved, which keeps it exact and
    /// allocation-free.
    pub fn validate(
        space: &PhaseSpace,
        sigma1: Vec<UnitPhase>,
        sigma2: KAutomorphism,
    ) -> Result<Self> {
        let kn = space.len();
        if sigma1.len() != kn {
            return Err(Error::ShapeMismatch {
                expected: kn,
                got: sigma1.len(),
            });
        }
        let doubled = space.doubled();
        let rank = doubled.rank();
        let base_rank = rank / 2;
        let moduli = doubled.moduli().to_vec();
        let weights = doubled.weights().to_vec();
        let mut coords: Vec<u64> = Vec::with_capacity(kn * rank);
        for i in 0..kn {
            coords.extend_from_slice(doubled.element_at(i as u64).coords());
        }
        let common: i64 = sigma1.iter().fold(space.base().exponent() as i64, |acc, p| {
            use num_integer::Integer;
            acc.lcm(&p.denominator())
        });
        let sig_num: Vec<i64> = sigma1
            .iter()
            .map(|p| p.numerator() * (common / p.denominator()))
            .collect();
        // exponent of c(a, b) scaled to the common denominator
        let c_num = |a: usize, b: usize| -> i64 {
            let chi = &coords[a * rank + base_rank..a * rank + rank];
            let x = &coords[b * rank..b * rank + base_rank];
            let mut acc: i128 = 0;
            for ((&ci, &xi), &n) in chi.iter().zip(x).zip(&moduli) {
                acc += ci as i128 * xi as i128 % n as i128 * (common as i128 / n as i128);
            }
            acc.rem_euclid(common as i128) as i64
        };
        let table = sigma2.table();
        for i in 0..kn {
            for j in i..kn {
                let mut sum_idx: u64 = 0;
                for t in 0..rank {
                    let c = (coords[i * rank + t] + coords[j * rank + t]) % moduli[t];
                    sum_idx += c * weights[t];
                }
                let lhs = sig_num[i] + sig_num[j] - sig_num[sum_idx as usize];
                let rhs =
                    c_num(i, j) - c_num(table[i] as usize, table[j] as usize);
                if (lhs - rhs).rem_euclid(common) != 0 {
                    let lhs = sigma1[i] * sigma1[j] * sigma1[sum_idx as usize].inv();
                    let ki = space.point_at(i);
                    let kj = space.point_at(j);
                    let rhs = space.heisenberg_phase(&ki, &kj)
                        * space
                            .heisenberg_phase(
                                &space.point_at(table[i] as usize),
                                &space.point_at(table[j] as usize),
                            )
                            .inv();
                    return Err(Error::ConstraintViolation {
                        k: i,
                        l: j,
                        lhs: lhs.to_string(),
                        rhs: rhs.to_string(),
                    });
                }
            }
        }
        Ok(CentreFixingAutomorphism { sigma1, sigma2 })
    }

    pub fn identity(space: &PhaseSpace) -> Self {
        CentreFixingAutomorphism {
            sigma1: vec![UnitPhase::one(); space.len()],
            sigma2: KAutomorphism::identity(space),
        }
    }

    /// The twist with `sigma2 = id` and `sigma1` the character of `K`
    /// indexed by `c`. Always satisfies the phase constraint.
    pub fn character_twist(space: &PhaseSpace, c: &PhasePoint) -> Self {
        let sigma1 = space
            .points()
            .map(|k| space.character(c, &k))
            .collect();
        CentreFixingAutomorphism {
            sigma1,
            sigma2: KAutomorphism::identity(space),
        }
    }

    /// Conjugation by the Weyl operator `W_l`: `sigma2 = id` and
    /// `sigma1(k) = e(l, k)`.
    pub fn inner(space: &PhaseSpace, l: &PhasePoint) -> Self {
        let sigma1 = space
            .points()
            .map(|k| space.commutator_form(l, &k))
            .collect();
        CentreFixingAutomorphism {
            sigma1,
            sigma2: KAutomorphism::identity(space),
        }
    }

    pub fn sigma1(&self) -> &[UnitPhase] {
        &self.sigma1
    }

    pub fn sigma1_at(&self, index: usize) -> UnitPhase {
        self.sigma1[index]
    }

    pub fn sigma2(&self) -> &KAutomorphism {
        &self.sigma2
    }

    pub fn is_identity(&self) -> bool {
        self.sigma2.is_identity() && self.sigma1.iter().all(UnitPhase::is_one)
    }

    /// Composite `self o tau` (apply `tau` first):
    /// `sigma2 = self2 o tau2`, `sigma1(k) = tau1(k) self1(tau2 k)`.
    pub fn compose(&self, tau: &CentreFixingAutomorphism) -> CentreFixingAutomorphism {
        assert_eq!(self.sigma1.len(), tau.sigma1.len());
        let sigma2 = self.sigma2.compose(&tau.sigma2);
        let sigma1 = (0..self.sigma1.len())
            .map(|i| tau.sigma1[i] * self.sigma1[tau.sigma2.apply_idx(i)])
            .collect();
        CentreFixingAutomorphism { sigma1, sigma2 }
    }

    pub fn invert(&self) -> CentreFixingAutomorphism {
        let inv2 = self.sigma2.inverse();
        let sigma1 = (0..self.sigma1.len())
            .map(|i| self.sigma1[inv2.apply_idx(i)].inv())
            .collect();
        CentreFixingAutomorphism {
            sigma1,
            sigma2: inv2,
        }
    }

    /// The phase function in normalised coordinates,
    /// `sigma(NW_k) = nsigma1(k) NW_{sigma2 k}`; a character of `K`.
    /// Odd order only.
    pub fn normalized_sigma1(&self, space: &PhaseSpace, index: usize) -> Result<UnitPhase> {
        let k = space.point_at(index);
        let img = space.point_at(self.sigma2.apply_idx(index));
        Ok(self.sigma1[index]
            * space.normalization_phase(&k)?
            * space.normalization_phase(&img)?.inv())
    }

    /// Whether the conjugacy class of this automorphism meets the canonical
    /// symplectic section: true iff the normalised phase function is trivial
    /// on the fixed subgroup of `sigma2`. Odd order only.
    pub fn class_meets_symplectic(&self, space: &PhaseSpace) -> Result<bool> {
        for i in self.sigma2.fixed_point_indices() {
            if !self.normalized_sigma1(space, i)?.is_one() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_record(&self) -> AutomorphismRecord {
        AutomorphismRecord {
            sigma2: self.sigma2.table().to_vec(),
            sigma1: self.sigma1.iter().map(|p| p.as_fraction()).collect(),
        }
    }

    /// Rebuild from a record, revalidating both constraints.
    pub fn from_record(space: &PhaseSpace, record: &AutomorphismRecord) -> Result<Self> {
        let sigma2 = KAutomorphism::from_table(space, record.sigma2.clone())?;
        let sigma1 = record
            .sigma1
            .iter()
            .map(|&(num, den)| {
                if den == 0 {
                    Err(Error::InvalidArgument("phase with zero denominator".into()))
                } else {
                    Ok(UnitPhase::new(num, den))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        CentreFixingAutomorphism::validate(space, sigma1, sigma2)
    }

    fn key_bytes(&self) -> Vec<u8> {
        let mut out = self.sigma2.key_bytes();
        for p in &self.sigma1 {
            let (num, den) = p.as_fraction();
            out.extend(num.to_le_bytes());
            out.extend(den.to_le_bytes());
        }
        out
    }
}

/// Serialisable form of a centre-fixing automorphism: the image table of
/// `sigma2` and `sigma1` as `[num, den]` fractions, both indexed by the
/// enumeration of `K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismRecord {
    pub sigma2: Vec<u32>,
    pub sigma1: Vec<(i64, i64)>,
}

/// The canonical odd-order section over the commutator-preserving
/// automorphisms: the unique lift acting on normalised Weyl operators with
/// trivial phase, `sigma1(k) = chi'(x'/2) chi(x/2)^{-1}` for
/// `(x', chi') = alpha(k)`.
pub fn from_symplectic(
    space: &PhaseSpace,
    alpha: &KAutomorphism,
) -> Result<CentreFixingAutomorphism> {
    if !space.base().is_odd_order() {
        return Err(Error::EvenOrder);
    }
    // A verified symplectic matrix preserves the form by the Gram identity
    // (e is exp(2 pi i k^T J l / p^n) and M^T J M = J); only table-built
    // automorphisms need the pairwise scan.
    let preserves = match alpha.matrix() {
        Some(m) => m.is_symplectic(),
        None => alpha.preserves_commutator(space),
    };
    if !preserves {
        return Err(Error::InvalidArgument(
            "automorphism does not preserve the commutator form".into(),
        ));
    }
    let sigma1 = (0..space.len())
        .map(|i| {
            let k = space.point_at(i);
            let img = space.point_at(alpha.apply_idx(i));
            Ok(space.normalization_phase(&img)? * space.normalization_phase(&k)?.inv())
        })
        .collect::<Result<Vec<_>>>()?;
    CentreFixingAutomorphism::validate(space, sigma1, alpha.clone())
}

/// Lift a commutator-preserving automorphism of `K` to a centre-fixing
/// automorphism by solving the phase constraint for integer exponents
/// `f(k) + f(l) - f(k+l) = t(k, l) (mod M)` over all pairs, with the
/// denominator `M` escalating through `2 exp(K)`, `4 exp(K)`, `8 exp(K)`.
pub fn lift(space: &PhaseSpace, alpha: &KAutomorphism) -> Result<CentreFixingAutomorphism> {
    if !alpha.preserves_commutator(space) {
        return Err(Error::InvalidArgument(
            "automorphism does not preserve the commutator form".into(),
        ));
    }
    let kn = space.len();
    let points: Vec<PhasePoint> = space.points().collect();
    let images: Vec<PhasePoint> = alpha
        .table()
        .iter()
        .map(|&i| points[i as usize].clone())
        .collect();
    let exponent = space.base().exponent() as i64;
    let mut max_denominator = 0;
    for factor in [2i64, 4, 8] {
        let m = factor * exponent;
        max_denominator = m;
        let mut sys = CongruenceSystem::new(kn, m);
        'rows: for i in 0..kn {
            for j in i..kn {
                let sum = space.index_of(&space.add(&points[i], &points[j]));
                let mut coeffs = vec![0i64; kn];
                coeffs[i] += 1;
                coeffs[j] += 1;
                coeffs[sum] -= 1;
                let target = space.heisenberg_phase(&points[i], &points[j])
                    * space.heisenberg_phase(&images[i], &images[j]).inv();
                let (tn, td) = target.as_fraction();
                debug_assert_eq!(m % td, 0);
                sys.add_row(coeffs, tn * (m / td));
                if sys.is_inconsistent() {
                    break 'rows;
                }
            }
        }
        if let Some(f) = sys.solve() {
            let sigma1 = f.iter().map(|&v| UnitPhase::new(v, m)).collect();
            return CentreFixingAutomorphism::validate(space, sigma1, alpha.clone());
        }
    }
    Err(Error::NoLift { max_denominator })
}

/// Deterministic closure of a finite set of generators under a product, by
/// breadth-first search from the identity. Errors out when the element count
/// would exceed `bound`.
pub fn closure<T, M, K>(identity: T, generators: &[T], mul: M, key: K, bound: usize) -> Result<Vec<T>>
where
    T: Clone,
    M: Fn(&T, &T) -> T,
    K: Fn(&T) -> Vec<u8>,
{
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    seen.insert(key(&identity));
    let mut order = vec![identity];
    let mut head = 0;
    while head < order.len() {
        for gen in generators {
            let w = mul(&order[head], gen);
            let kb = key(&w);
            if !seen.contains(&kb) {
                if order.len() >= bound {
                    return Err(Error::ClosureBound { bound });
                }
                seen.insert(kb);
                order.push(w);
            }
        }
        head += 1;
    }
    Ok(order)
}

/// Closure of symplectic matrices under multiplication.
pub fn closure_matrices(
    generators: &[SymplecticMatrix],
    bound: usize,
) -> Result<Vec<SymplecticMatrix>> {
    let Some(first) = generators.first() else {
        return Err(Error::InvalidArgument("no generators".into()));
    };
    closure(
        SymplecticMatrix::identity(first.genus(), first.modulus()),
        generators,
        |a, b| a.mul(b),
        SymplecticMatrix::key_bytes,
        bound,
    )
}

/// Closure of phase-space automorphism tables under composition.
pub fn closure_k_automorphisms(
    space: &PhaseSpace,
    generators: &[KAutomorphism],
    bound: usize,
) -> Result<Vec<KAutomorphism>> {
    closure(
        KAutomorphism::identity(space),
        generators,
        |a, b| a.compose(b),
        KAutomorphism::key_bytes,
        bound,
    )
}

/// Closure of centre-fixing automorphisms under composition.
pub fn closure_automorphisms(
    space: &PhaseSpace,
    generators: &[CentreFixingAutomorphism],
    bound: usize,
) -> Result<Vec<CentreFixingAutomorphism>> {
    closure(
        CentreFixingAutomorphism::identity(space),
        generators,
        |a, b| a.compose(b),
        CentreFixingAutomorphism::key_bytes,
        bound,
    )
}

/// Orbits of the group generated by the given automorphisms on the phase
/// space, as sorted index lists ordered by minimal element.
pub fn orbits(space: &PhaseSpace, generators: &[KAutomorphism]) -> Vec<Vec<usize>> {
    let kn = space.len();
    let mut visited = vec![false; kn];
    let mut out = Vec::new();
    for start in 0..kn {
        if visited[start] {
            continue;
        }
        let mut orbit = vec![start];
        visited[start] = true;
        let mut head = 0;
        while head < orbit.len() {
            let cur = orbit[head];
            for gen in generators {
                let img = gen.apply_idx(cur);
                if !visited[img] {
                    visited[img] = true;
                    orbit.push(img);
                }
            }
            head += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}
