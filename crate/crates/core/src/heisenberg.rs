//! Weyl operators on `L^2(A)`, the bicharacters attached to the phase space
//! `K = A x A^`, and expansion of operators in the Weyl basis.
//!
//! For `k = (x, chi)` the Weyl operator is `W_k = T_x M_chi`, the composite
//! of the translation `T_x f(u) = f(u - x)` and the modulation
//! `M_chi f(u) = chi(u) f(u)`. The `|K|` Weyl operators form a basis of the
//! endomorphisms of `L^2(A)`; [`Heisenberg::weyl_expand`] computes the
//! coordinates of an arbitrary operator in that basis.

use ndarray::Array2;
use num_complex::Complex64;

use crate::abelian::{DualElement, FiniteAbelianGroup, GroupElement, UnitPhase};
use crate::error::{Error, Result};

/// Max-norm tolerance used for operator comparisons on a space of the given
/// dimension.
pub fn operator_tol(dim: usize) -> f64 {
    1e-9 * dim as f64
}

/// The phase space `K = A x A^`, with the dual identified with `A` by the
/// standard pairing.
///
/// Internally `K` is the "doubled" group whose moduli repeat the moduli of
/// `A` twice, so enumeration, arithmetic and automorphism tables on `K`
/// reuse the plain group machinery. A point stores its `x` coordinates
/// followed by its `chi` coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseSpace {
    base: FiniteAbelianGroup,
    doubled: FiniteAbelianGroup,
}

/// An element `k = (x, chi)` of the phase space.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasePoint {
    inner: GroupElement,
}

impl std::fmt::Debug for PhasePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.inner)
    }
}

impl PhaseSpace {
    pub fn new(base: &FiniteAbelianGroup) -> Self {
        let mut moduli = base.moduli().to_vec();
        moduli.extend_from_slice(base.moduli());
        let doubled = FiniteAbelianGroup::new(&moduli).expect("doubled moduli are valid");
        PhaseSpace {
            base: base.clone(),
            doubled,
        }
    }

    pub fn base(&self) -> &FiniteAbelianGroup {
        &self.base
    }

    pub(crate) fn doubled(&self) -> &FiniteAbelianGroup {
        &self.doubled
    }

    /// Number of points `|K| = |A|^2`.
    pub fn len(&self) -> usize {
        self.doubled.order() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero(&self) -> PhasePoint {
        PhasePoint {
            inner: self.doubled.zero(),
        }
    }

    pub fn point(&self, x: &GroupElement, chi: &DualElement) -> Result<PhasePoint> {
        let rank = self.base.rank();
        if x.coords().len() != rank {
            return Err(Error::ShapeMismatch {
                expected: rank,
                got: x.coords().len(),
            });
        }
        if chi.coords().len() != rank {
            return Err(Error::ShapeMismatch {
                expected: rank,
                got: chi.coords().len(),
            });
        }
        let mut coords: Vec<i64> = x.coords().iter().map(|&c| c as i64).collect();
        coords.extend(chi.coords().iter().map(|&c| c as i64));
        Ok(PhasePoint {
            inner: self.doubled.element(&coords)?,
        })
    }

    pub fn point_at(&self, index: usize) -> PhasePoint {
        PhasePoint {
            inner: self.doubled.element_at(index as u64),
        }
    }

    pub fn index_of(&self, k: &PhasePoint) -> usize {
        self.doubled.index_of(&k.inner) as usize
    }

    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }

    /// The translation component `x` of `k = (x, chi)`.
    pub fn x_part(&self, k: &PhasePoint) -> GroupElement {
        let rank = self.base.rank();
        let coords: Vec<i64> = k.inner.coords()[..rank].iter().map(|&c| c as i64).collect();
        self.base.element(&coords).expect("x part has base shape")
    }

    /// The modulation component `chi` of `k = (x, chi)`.
    pub fn chi_part(&self, k: &PhasePoint) -> DualElement {
        let rank = self.base.rank();
        let coords: Vec<i64> = k.inner.coords()[rank..].iter().map(|&c| c as i64).collect();
        self.base.element(&coords).expect("chi part has base shape")
    }

    pub fn add(&self, k: &PhasePoint, l: &PhasePoint) -> PhasePoint {
        PhasePoint {
            inner: self.doubled.add(&k.inner, &l.inner).expect("same space"),
        }
    }

    pub fn neg(&self, k: &PhasePoint) -> PhasePoint {
        PhasePoint {
            inner: self.doubled.neg(&k.inner).expect("same space"),
        }
    }

    pub fn sub(&self, k: &PhasePoint, l: &PhasePoint) -> PhasePoint {
        PhasePoint {
            inner: self.doubled.sub(&k.inner, &l.inner).expect("same space"),
        }
    }

    pub fn scale(&self, c: i64, k: &PhasePoint) -> PhasePoint {
        PhasePoint {
            inner: self.doubled.scale(c, &k.inner).expect("same space"),
        }
    }

    pub fn halve(&self, k: &PhasePoint) -> Result<PhasePoint> {
        Ok(PhasePoint {
            inner: self.doubled.halve(&k.inner)?,
        })
    }

    /// The Heisenberg bicharacter `c(k, l) = chi(y)` for `k = (x, chi)`,
    /// `l = (y, lambda)`; the phase in `W_k W_l = c(k, l) W_{k+l}`.
    pub fn heisenberg_phase(&self, k: &PhasePoint, l: &PhasePoint) -> UnitPhase {
        let rank = self.base.rank();
        self.base
            .pairing_parts(&k.inner.coords()[rank..], &l.inner.coords()[..rank])
    }

    /// The commutator form `e(k, l) = c(k, l) c(l, k)^{-1}`, an alternating
    /// nondegenerate pairing on `K`.
    pub fn commutator_form(&self, k: &PhasePoint, l: &PhasePoint) -> UnitPhase {
        self.heisenberg_phase(k, l) * self.heisenberg_phase(l, k).inv()
    }

    /// The normalised bicharacter `c~(k, l) = chi(y/2) lambda(x/2)^{-1}`,
    /// the phase in the product law of the normalised Weyl operators.
    /// Requires odd order.
    pub fn normalized_phase(&self, k: &PhasePoint, l: &PhasePoint) -> Result<UnitPhase> {
        let half_y = self.base.halve(&self.x_part(l))?;
        let half_x = self.base.halve(&self.x_part(k))?;
        let a = self.base.pairing(&self.chi_part(k), &half_y)?;
        let b = self.base.pairing(&self.chi_part(l), &half_x)?;
        Ok(a * b.inv())
    }

    /// The character of `K` indexed by `c` under the self-duality of `K`:
    /// `k -> exp(2 pi i <c, k>)` with the componentwise pairing on the
    /// doubled coordinates.
    pub fn character(&self, c: &PhasePoint, k: &PhasePoint) -> UnitPhase {
        self.doubled
            .pairing(&c.inner, &k.inner)
            .expect("same space")
    }

    /// The phase `chi(x/2)` relating `W_k` to its normalised form. Odd order
    /// only.
    pub fn normalization_phase(&self, k: &PhasePoint) -> Result<UnitPhase> {
        let half_x = self.base.halve(&self.x_part(k))?;
        self.base.pairing(&self.chi_part(k), &half_x)
    }
}

/// A dense complex operator on `L^2(A)`, rows and columns indexed by the
/// element enumeration of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: Array2<Complex64>,
}

impl Operator {
    pub fn from_matrix(mat: Array2<Complex64>) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c {
            return Err(Error::SizeMismatch {
                expected: r,
                rows: r,
                cols: c,
            });
        }
        Ok(Operator { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            mat: Array2::from_shape_fn((dim, dim), |(i, j)| {
                Complex64::new(f64::from(i == j), 0.0)
            }),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            mat: Array2::zeros((dim, dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.mat
    }

    pub fn mul(&self, other: &Operator) -> Operator {
        Operator {
            mat: self.mat.dot(&other.mat),
        }
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            mat: self.mat.t().mapv(|z| z.conj()),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diag().sum()
    }

    pub fn scale(&self, z: Complex64) -> Operator {
        Operator {
            mat: self.mat.mapv(|v| v * z),
        }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        Operator {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        Operator {
            mat: &self.mat - &other.mat,
        }
    }

    /// Hilbert-Schmidt inner product `tr(self other^*)`.
    pub fn hilbert_schmidt(&self, other: &Operator) -> Complex64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint()
            .mul(self)
            .max_abs_diff(&Operator::identity(self.dim()))
            <= tol
    }
}

/// Coordinates of an operator in the Weyl basis, indexed by the enumeration
/// of `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylExpansion {
    coeffs: Vec<Complex64>,
}

impl WeylExpansion {
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        WeylExpansion { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, index: usize) -> Complex64 {
        self.coeffs[index]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
}

/// The Weyl operator calculus for one group: phase space plus the cached
/// dense matrices `W_k` for every `k` in `K`.
pub struct Heisenberg {
    space: PhaseSpace,
    weyl: Vec<Operator>,
}

impl Heisenberg {
    pub fn new(group: FiniteAbelianGroup) -> Self {
        let space = PhaseSpace::new(&group);
        let weyl = (0..space.len())
            .map(|i| {
                let k = space.point_at(i);
                build_weyl(&space, &k)
            })
            .collect();
        Heisenberg { space, weyl }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.space.base()
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    /// Dimension of `L^2(A)`.
    pub fn dim(&self) -> usize {
        self.group().order() as usize
    }

    pub fn tol(&self) -> f64 {
        operator_tol(self.dim())
    }

    /// `T_x f(u) = f(u - x)`: the permutation matrix with entry 1 at
    /// `(u, u - x)`.
    pub fn translation(&self, x: &GroupElement) -> Result<Operator> {
        let g = self.group();
        let n = self.dim();
        let mut mat = Array2::zeros((n, n));
        for v in g.elements() {
            let u = g.add(&v, x)?;
            mat[[g.index_of(&u) as usize, g.index_of(&v) as usize]] = Complex64::new(1.0, 0.0);
        }
        Ok(Operator { mat })
    }

    /// `M_chi f(u) = chi(u) f(u)`: the diagonal matrix of character values.
    pub fn modulation(&self, chi: &DualElement) -> Result<Operator> {
        let g = self.group();
        let n = self.dim();
        let mut mat = Array2::zeros((n, n));
        for u in g.elements() {
            let i = g.index_of(&u) as usize;
            mat[[i, i]] = g.pairing(chi, &u)?.value();
        }
        Ok(Operator { mat })
    }

    /// The cached Weyl operator `W_k`.
    pub fn weyl(&self, k: &PhasePoint) -> &Operator {
        &self.weyl[self.space.index_of(k)]
    }

    pub fn weyl_at(&self, index: usize) -> &Operator {
        &self.weyl[index]
    }

    /// The phase `chi(x/2)` relating `W_k` to its normalised form. Odd order
    /// only.
    pub fn normalization_phase(&self, k: &PhasePoint) -> Result<UnitPhase> {
        self.space.normalization_phase(k)
    }

    /// The normalised Weyl operator `chi(x/2) W_k`. Odd order only.
    pub fn normalized_weyl(&self, k: &PhasePoint) -> Result<Operator> {
        let phase = self.normalization_phase(k)?;
        Ok(self.weyl(k).scale(phase.value()))
    }

    /// Coordinates of `phi` in the Weyl basis:
    /// `phi_k = tr(phi W_k^*) / |A|`.
    pub fn weyl_expand(&self, phi: &Operator) -> Result<WeylExpansion> {
        let n = self.dim();
        if phi.dim() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                rows: phi.dim(),
                cols: phi.dim(),
            });
        }
        let scale = 1.0 / n as f64;
        let coeffs = self
            .weyl
            .iter()
            .map(|w| phi.hilbert_schmidt(w) * scale)
            .collect();
        Ok(WeylExpansion { coeffs })
    }

    /// Reassemble `sum_k phi_k W_k`.
    pub fn weyl_assemble(&self, expansion: &WeylExpansion) -> Result<Operator> {
        if expansion.len() != self.space.len() {
            return Err(Error::SizeMismatch {
                expected: self.space.len(),
                rows: expansion.len(),
                cols: 1,
            });
        }
        let mut out = Operator::zeros(self.dim());
        for (w, &c) in self.weyl.iter().zip(expansion.coeffs()) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            out.mat.zip_mut_with(&w.mat, |o, wv| *o += c * wv);
        }
        Ok(out)
    }
}

fn build_weyl(space: &PhaseSpace, k: &PhasePoint) -> Operator {
    let g = space.base();
    let n = g.order() as usize;
    let x = space.x_part(k);
    let chi = space.chi_part(k);
    let mut mat = Array2::zeros((n, n));
    // W_k = T_x M_chi has entry chi(v) at (v + x, v).
    for v in g.elements() {
        let u = g.add(&v, &x).expect("same group");
        let phase = g.pairing(&chi, &v).expect("same group");
        mat[[g.index_of(&u) as usize, g.index_of(&v) as usize]] = phase.value();
    }
    Operator { mat }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn heis(moduli: &[u64]) -> Heisenberg {
        Heisenberg::new(FiniteAbelianGroup::new(moduli).unwrap())
    }

    fn omega(n: u64) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU / n as f64)
    }

    #[test]
    fn translation_by_zero_is_identity() {
        let h = heis(&[3]);
        let t = h.translation(&h.group().zero()).unwrap();
        assert_eq!(t.max_abs_diff(&Operator::identity(3)), 0.0);
    }

    #[test]
    fn translation_is_the_cyclic_shift() {
        let h = heis(&[3]);
        let g = h.group();
        let t = h.translation(&g.element(&[1]).unwrap()).unwrap();
        // sends basis vector e_u to e_{u+1}
        for u in 0..3usize {
            for v in 0..3usize {
                let expect = f64::from(u == (v + 1) % 3);
                assert!((t.matrix()[[u, v]] - Complex64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn translations_compose_additively() {
        let h = heis(&[3]);
        let g = h.group();
        for x in g.elements() {
            for y in g.elements() {
                let lhs = h
                    .translation(&x)
                    .unwrap()
                    .mul(&h.translation(&y).unwrap());
                let rhs = h.translation(&g.add(&x, &y).unwrap()).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn modulation_of_zero_is_identity_and_diag_otherwise() {
        let h = heis(&[3]);
        let g = h.group();
        let m0 = h.modulation(&g.zero()).unwrap();
        assert_eq!(m0.max_abs_diff(&Operator::identity(3)), 0.0);
        let m1 = h.modulation(&g.element(&[1]).unwrap()).unwrap();
        let w = omega(3);
        for u in 0..3usize {
            let expect = w.powu(u as u32);
            assert!((m1.matrix()[[u, u]] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn modulations_compose_additively() {
        let h = heis(&[5]);
        let g = h.group();
        for a in g.elements() {
            for b in g.elements() {
                let lhs = h.modulation(&a).unwrap().mul(&h.modulation(&b).unwrap());
                let rhs = h.modulation(&g.add(&a, &b).unwrap()).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn weyl_at_zero_is_identity_and_all_are_unitary() {
        for moduli in [&[3][..], &[2, 4][..]] {
            let h = heis(moduli);
            let n = h.dim();
            assert_eq!(
                h.weyl(&h.space().zero()).max_abs_diff(&Operator::identity(n)),
                0.0
            );
            for k in h.space().points() {
                assert!(h.weyl(&k).is_unitary(operator_tol(n)));
            }
        }
    }

    /// `W_k W_l = c(k, l) W_{k+l}` with `c(k, l) = chi(y)`, checked on every
    /// pair of phase points.
    fn check_product_law(h: &Heisenberg) {
        let s = h.space();
        for k in s.points() {
            for l in s.points() {
                let lhs = h.weyl(&k).mul(h.weyl(&l));
                let phase = s.heisenberg_phase(&k, &l).value();
                let rhs = h.weyl(&s.add(&k, &l)).scale(phase);
                assert!(lhs.max_abs_diff(&rhs) <= operator_tol(h.dim()));
            }
        }
    }

    #[test]
    fn weyl_product_law_holds_for_all_pairs() {
        check_product_law(&heis(&[3]));
        check_product_law(&heis(&[2, 2]));
        check_product_law(&heis(&[5]));
    }

    #[test]
    fn weyl_operators_are_trace_orthogonal() {
        // tr(W_k W_l^*) = |A| delta_{k,l}, by brute-force products
        let h = heis(&[3]);
        let s = h.space();
        for k in s.points() {
            for l in s.points() {
                let gram = h.weyl(&k).mul(&h.weyl(&l).adjoint()).trace();
                let expect = if k == l {
                    Complex64::new(3.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((gram - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conjugation_scales_weyl_operators_by_the_commutator_form() {
        // W_k W_l W_k^* = e(k, l) W_l with e(k, l) = chi(y) lambda(x)^{-1}
        for moduli in [&[3][..], &[2, 2][..], &[9][..]] {
            let h = heis(moduli);
            let s = h.space();
            for k in s.points() {
                for l in s.points() {
                    let lhs = h.weyl(&k).mul(h.weyl(&l)).mul(&h.weyl(&k).adjoint());
                    let rhs = h.weyl(&l).scale(s.commutator_form(&k, &l).value());
                    assert!(lhs.max_abs_diff(&rhs) <= operator_tol(h.dim()));
                }
            }
        }
    }

    #[test]
    fn heisenberg_phase_known_values() {
        let h = heis(&[3]);
        let s = h.space();
        let g = h.group();
        let e0 = g.zero();
        let e1 = g.element(&[1]).unwrap();
        // chi trivial: phase 1 regardless of the other point
        let k = s.point(&e1, &e0).unwrap();
        let l = s.point(&e1, &e1).unwrap();
        assert!(s.heisenberg_phase(&k, &l).is_one());
        // c((0,1),(1,0)) = chi_1(1) = omega
        let k = s.point(&e0, &e1).unwrap();
        let l = s.point(&e1, &e0).unwrap();
        assert_eq!(s.heisenberg_phase(&k, &l), UnitPhase::new(1, 3));
        // bicharacter in the first slot
        for a in s.points() {
            for b in s.points() {
                for l in s.points() {
                    let lhs = s.heisenberg_phase(&s.add(&a, &b), &l);
                    let rhs = s.heisenberg_phase(&a, &l) * s.heisenberg_phase(&b, &l);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn commutator_form_examples_and_nondegeneracy() {
        let h = heis(&[3]);
        let s = h.space();
        let g = h.group();
        for k in s.points() {
            assert!(s.commutator_form(&k, &k).is_one());
        }
        let k = s
            .point(&g.element(&[1]).unwrap(), &g.zero())
            .unwrap();
        let l = s
            .point(&g.zero(), &g.element(&[1]).unwrap())
            .unwrap();
        // e((1,0),(0,1)) = omega^{-1} = omega^2
        assert_eq!(s.commutator_form(&k, &l), UnitPhase::new(2, 3));

        // nondegeneracy on |A| <= 9: every nonzero k pairs nontrivially
        for moduli in [&[2][..], &[3][..], &[2, 2][..], &[9][..], &[3, 3][..]] {
            let h = heis(moduli);
            let s = h.space();
            for k in s.points() {
                if k == s.zero() {
                    continue;
                }
                assert!(
                    s.points().any(|l| !s.commutator_form(&k, &l).is_one()),
                    "degenerate point {k:?} in {moduli:?}"
                );
            }
        }
    }

    #[test]
    fn normalized_weyl_phase_and_inverses() {
        let h = heis(&[3]);
        let s = h.space();
        let g = h.group();
        // k = (0, chi) keeps phase 1
        let k = s.point(&g.zero(), &g.element(&[1]).unwrap()).unwrap();
        assert!(h.normalization_phase(&k).unwrap().is_one());
        // k = (1, 1): phase chi_1(2) = omega^2
        let k = s
            .point(&g.element(&[1]).unwrap(), &g.element(&[1]).unwrap())
            .unwrap();
        assert_eq!(h.normalization_phase(&k).unwrap(), UnitPhase::new(2, 3));
        let nw = h.normalized_weyl(&k).unwrap();
        assert!(nw.max_abs_diff(&h.weyl(&k).scale(omega(3).powu(2))) < 1e-14);
        // normalised operators invert pairwise
        for k in s.points() {
            let prod = h
                .normalized_weyl(&k)
                .unwrap()
                .mul(&h.normalized_weyl(&s.neg(&k)).unwrap());
            assert!(prod.max_abs_diff(&Operator::identity(3)) <= operator_tol(3));
        }
    }

    #[test]
    fn normalized_weyl_rejects_even_order() {
        let h = heis(&[2]);
        let k = h.space().zero();
        assert!(matches!(h.normalized_weyl(&k), Err(Error::EvenOrder)));
    }

    #[test]
    fn normalized_product_law_and_phase_identities() {
        let h = heis(&[3]);
        let s = h.space();
        for k in s.points() {
            assert!(s.normalized_phase(&k, &k).unwrap().is_one());
            for l in s.points() {
                // product law with the normalised bicharacter
                let lhs = h
                    .normalized_weyl(&k)
                    .unwrap()
                    .mul(&h.normalized_weyl(&l).unwrap());
                let phase = s.normalized_phase(&k, &l).unwrap().value();
                let rhs = h.normalized_weyl(&s.add(&k, &l)).unwrap().scale(phase);
                assert!(lhs.max_abs_diff(&rhs) <= operator_tol(3));
                // c~(2k, 2l) = e(k, l)^2
                let dbl = s.normalized_phase(&s.scale(2, &k), &s.scale(2, &l)).unwrap();
                assert_eq!(dbl, s.commutator_form(&k, &l).pow(2));
            }
        }
        // antisymmetry on Z/5
        let h = heis(&[5]);
        let s = h.space();
        for k in s.points() {
            for l in s.points() {
                let prod = s.normalized_phase(&k, &l).unwrap()
                    * s.normalized_phase(&l, &k).unwrap();
                assert!(prod.is_one());
            }
        }
    }

    #[test]
    fn expansion_of_identity_and_weyl_operators() {
        let h = heis(&[3]);
        let s = h.space();
        let exp = h.weyl_expand(&Operator::identity(3)).unwrap();
        for i in 0..s.len() {
            let expect = if i == s.index_of(&s.zero()) { 1.0 } else { 0.0 };
            assert!((exp.coeff(i) - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
        for l in 0..s.len() {
            let exp = h.weyl_expand(h.weyl_at(l)).unwrap();
            for i in 0..s.len() {
                let expect = f64::from(i == l);
                assert!((exp.coeff(i) - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn expansion_round_trips_on_random_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        for moduli in [&[3][..], &[2, 4][..], &[3, 3][..]] {
            let h = heis(moduli);
            let n = h.dim();
            for _ in 0..5 {
                let mat = Array2::from_shape_fn((n, n), |_| Complex64::new(unit(), unit()));
                let op = Operator::from_matrix(mat).unwrap();
                let back = h.weyl_assemble(&h.weyl_expand(&op).unwrap()).unwrap();
                assert!(back.max_abs_diff(&op) <= 1e-9);
            }
        }
    }

    #[test]
    fn expansion_rejects_wrong_size() {
        let h = heis(&[3]);
        assert!(matches!(
            h.weyl_expand(&Operator::identity(4)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn gram_matrix_is_a_scaled_identity() {
        // restatement of linear independence at matrix level, |A| <= 9
        for moduli in [&[3][..], &[2, 4][..], &[9][..]] {
            let h = heis(moduli);
            let n = h.dim() as f64;
            for i in 0..h.space().len() {
                for j in 0..h.space().len() {
                    let gram = h.weyl_at(i).hilbert_schmidt(h.weyl_at(j));
                    let expect = Complex64::new(if i == j { n } else { 0.0 }, 0.0);
                    assert!((gram - expect).norm() <= operator_tol(h.dim()));
                }
            }
        }
    }
}
