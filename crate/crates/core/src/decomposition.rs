//! Commutant of the Weil representation of a subgroup `S` of centre-fixing
//! automorphisms: orbit propagation with exact phases, multiplicity counts,
//! and the parity idempotents.
//!
//! An operator `phi = sum_k phi_k W_k` commutes with every `W(sigma)`,
//! `sigma in S`, exactly when `phi_{sigma2(k)} = sigma1(k) phi_k` for all
//! `k` and `sigma`. Propagating that constraint along each `S`-orbit from
//! its minimal representative either determines the coefficients up to one
//! free scalar (an *admissible* orbit, contributing one commutant basis
//! element) or runs into an exact phase inconsistency on some cycle, which
//! happens precisely when a stabilizing element carries a nontrivial phase
//! (an inadmissible orbit, contributing nothing). The number of admissible
//! orbits equals `sum m_pi^2` over the irreducible multiplicities.

use ndarray::Array2;
use num_complex::Complex64;

use crate::abelian::UnitPhase;
use crate::automorphism::CentreFixingAutomorphism;
use crate::error::{Error, Result};
use crate::heisenberg::{Heisenberg, Operator, PhaseSpace, WeylExpansion};
use crate::linalg;
use crate::weil::intertwiner;

/// One orbit of the `S`-action on the phase space.
#[derive(Clone, Debug)]
pub struct OrbitData {
    /// Sorted phase-space indices.
    pub points: Vec<usize>,
    /// Minimal index, used as propagation root.
    pub representative: usize,
    /// Whether every stabilizer phase on the orbit is trivial.
    pub admissible: bool,
}

/// A stabilizing group element carrying a nontrivial phase at a point, as
/// indices into a materialised element list and the phase space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StabilizerWitness {
    pub element: usize,
    pub point: usize,
}

/// Orbits of the generated group on the phase space with admissibility
/// flags. Witnesses are only populated by [`stabilizer_witnesses`], which
/// needs the group materialised.
#[derive(Clone, Debug, Default)]
pub struct OrbitDecomposition {
    pub orbits: Vec<OrbitData>,
    pub witnesses: Vec<StabilizerWitness>,
}

impl OrbitDecomposition {
    pub fn admissible_count(&self) -> usize {
        self.orbits.iter().filter(|o| o.admissible).count()
    }
}

/// Orbit decomposition together with the propagated coefficient phases
/// (`None` off the admissible orbits' spanning trees is never the case:
/// every visited point of an admissible orbit carries a phase).
fn propagate(
    space: &PhaseSpace,
    generators: &[CentreFixingAutomorphism],
) -> (OrbitDecomposition, Vec<Option<UnitPhase>>) {
    let kn = space.len();
    let mut phase: Vec<Option<UnitPhase>> = vec![None; kn];
    let mut orbits = Vec::new();
    for start in 0..kn {
        if phase[start].is_some() {
            continue;
        }
        phase[start] = Some(UnitPhase::one());
        let mut points = vec![start];
        let mut admissible = true;
        let mut head = 0;
        while head < points.len() {
            let cur = points[head];
            let cur_phase = phase[cur].expect("visited points carry a phase");
            for sigma in generators {
                let img = sigma.sigma2().apply_idx(cur);
                let candidate = sigma.sigma1_at(cur) * cur_phase;
                match phase[img] {
                    None => {
                        phase[img] = Some(candidate);
                        points.push(img);
                    }
                    Some(existing) => {
                        // a closing edge: the cycle holonomy must be trivial
                        if existing != candidate {
                            admissible = false;
                        }
                    }
                }
            }
            head += 1;
        }
        points.sort_unstable();
        orbits.push(OrbitData {
            representative: points[0],
            points,
            admissible,
        });
    }
    (
        OrbitDecomposition {
            orbits,
            witnesses: Vec::new(),
        },
        phase,
    )
}

/// Orbits of the group generated by `generators`, with the stabilizer phase
/// condition evaluated by exact cycle propagation.
pub fn orbit_decomposition(
    space: &PhaseSpace,
    generators: &[CentreFixingAutomorphism],
) -> OrbitDecomposition {
    propagate(space, generators).0
}

/// Scan a materialised group for stabilizer pairs `(sigma, k)` with
/// `sigma2(k) = k` but `sigma1(k) != 1`; these witness inadmissible orbits.
pub fn stabilizer_witnesses(elements: &[CentreFixingAutomorphism]) -> Vec<StabilizerWitness> {
    let mut out = Vec::new();
    for (ei, sigma) in elements.iter().enumerate() {
        for point in sigma.sigma2().fixed_point_indices() {
            if !sigma.sigma1_at(point).is_one() {
                out.push(StabilizerWitness { element: ei, point });
            }
        }
    }
    out
}

/// One Weyl-coefficient basis element per admissible orbit: coefficient 1 at
/// the minimal representative, propagated along the orbit by the commutation
/// constraint, zero elsewhere.
pub fn commutant_basis(
    space: &PhaseSpace,
    generators: &[CentreFixingAutomorphism],
) -> Vec<WeylExpansion> {
    let (decomposition, phase) = propagate(space, generators);
    decomposition
        .orbits
        .iter()
        .filter(|o| o.admissible)
        .map(|o| {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); space.len()];
            for &i in &o.points {
                coeffs[i] = phase[i].expect("orbit point carries a phase").value();
            }
            WeylExpansion::from_coeffs(coeffs)
        })
        .collect()
}

/// `sum m_pi^2` for the decomposition of `L^2(A)` under the group generated
/// by `generators`: the number of admissible orbits.
pub fn multiplicity_square_sum(
    space: &PhaseSpace,
    generators: &[CentreFixingAutomorphism],
) -> usize {
    orbit_decomposition(space, generators).admissible_count()
}

/// Independent commutant dimension: the nullity of the stacked linear system
/// `X W(sigma_i) - W(sigma_i) X = 0` over the generators, computed by dense
/// Gaussian elimination on the `(g n^2) x n^2` coefficient matrix.
pub fn commutant_dim_oracle(
    h: &Heisenberg,
    generators: &[CentreFixingAutomorphism],
) -> Result<usize> {
    let n = h.dim();
    if generators.is_empty() {
        return Ok(n * n);
    }
    let mut system: Array2<Complex64> = Array2::zeros((generators.len() * n * n, n * n));
    for (gi, sigma) in generators.iter().enumerate() {
        let w = intertwiner(h, sigma)?;
        let wm = w.matrix();
        let base = gi * n * n;
        // row (u, v) of [X, W]: sum_w X[u, w] W[w, v] - W[u, w] X[w, v]
        for u in 0..n {
            for v in 0..n {
                let row = base + u * n + v;
                for t in 0..n {
                    system[[row, u * n + t]] += wm[[t, v]];
                    system[[row, t * n + v]] -= wm[[u, t]];
                }
            }
        }
    }
    let tol = 1e-7;
    Ok(n * n - linalg::rank(&system, tol))
}

/// The parity idempotents `(1 ± R)/2` built from Weyl sums: `delta_0 = NW_0`
/// and `delta_K = sum_k NW_k`, with `eps_± = (delta_0 ± delta_K/sqrt(|K|))/2`.
/// They project onto the even and odd functions. Odd order only.
pub fn parity_idempotents(h: &Heisenberg) -> Result<(Operator, Operator)> {
    let space = h.space();
    let n = h.dim();
    let mut delta_k = Operator::zeros(n);
    for k in space.points() {
        delta_k = delta_k.add(&h.normalized_weyl(&k)?);
    }
    let scale = 1.0 / (space.len() as f64).sqrt();
    let half = Complex64::new(0.5, 0.0);
    let reflected = delta_k.scale(Complex64::new(scale, 0.0));
    let id = Operator::identity(n);
    let plus = id.add(&reflected).scale(half);
    let minus = id.sub(&reflected).scale(half);
    Ok((plus, minus))
}

/// Outcome of the parity-invariance verification.
#[derive(Clone, Copy, Debug)]
pub struct ParityCheck {
    /// Largest commutator residual of the idempotents against the generator
    /// Weil operators.
    pub commute_residual: f64,
    /// Number of admissible orbits (the commutant dimension).
    pub commutant_dim: usize,
    /// Whether the group exponent is prime.
    pub prime_exponent: bool,
    pub pass: bool,
}

/// Verify that the parity idempotents commute with `W(sigma)` for every
/// generator. With `full_group` set (the generators generate the whole
/// commutator-preserving group), additionally require the commutant
/// dimension to be exactly 2 precisely when the group exponent is prime,
/// which makes the even and odd subspaces irreducible.
pub fn parity_invariance_check(
    h: &Heisenberg,
    generators: &[CentreFixingAutomorphism],
    full_group: bool,
) -> Result<ParityCheck> {
    let (plus, minus) = parity_idempotents(h)?;
    let mut residual = 0.0f64;
    for sigma in generators {
        let w = intertwiner(h, sigma)?;
        for eps in [&plus, &minus] {
            residual = residual.max(eps.mul(&w).max_abs_diff(&w.mul(eps)));
        }
    }
    let commutant_dim = multiplicity_square_sum(h.space(), generators);
    let prime_exponent = is_prime(h.group().exponent());
    let mut pass = residual <= h.tol();
    if full_group && prime_exponent {
        pass = pass && commutant_dim == 2;
    }
    Ok(ParityCheck {
        commute_residual: residual,
        commutant_dim,
        prime_exponent,
        pass,
    })
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::FiniteAbelianGroup;
    use crate::automorphism::{from_symplectic, symplectic_generators, CentreFixingAutomorphism};
    use crate::weil::verify_intertwiner;

    fn heis(moduli: &[u64]) -> Heisenberg {
        Heisenberg::new(FiniteAbelianGroup::new(moduli).unwrap())
    }

    fn symplectic_sections(h: &Heisenberg, p: u64, n: u32) -> Vec<CentreFixingAutomorphism> {
        symplectic_generators(p, n, 1)
            .unwrap()
            .iter()
            .map(|m| from_symplectic(h.space(), &m.to_k_automorphism(h.space()).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn trivial_group_has_full_commutant() {
        let h = heis(&[3]);
        let id = CentreFixingAutomorphism::identity(h.space());
        let basis = commutant_basis(h.space(), &[id.clone()]);
        assert_eq!(basis.len(), 9);
        assert_eq!(multiplicity_square_sum(h.space(), &[id]), 9);
    }

    #[test]
    fn symplectic_commutant_counts() {
        let h3 = heis(&[3]);
        let gens = symplectic_sections(&h3, 3, 1);
        assert_eq!(multiplicity_square_sum(h3.space(), &gens), 2);
        assert_eq!(commutant_basis(h3.space(), &gens).len(), 2);

        let h9 = heis(&[9]);
        let gens = symplectic_sections(&h9, 3, 2);
        assert_eq!(multiplicity_square_sum(h9.space(), &gens), 3);
    }

    #[test]
    fn commutant_basis_elements_commute_with_the_generators() {
        let h = heis(&[9]);
        let gens = symplectic_sections(&h, 3, 2);
        let basis = commutant_basis(h.space(), &gens);
        for expansion in &basis {
            let op = h.weyl_assemble(expansion).unwrap();
            for sigma in &gens {
                let w = intertwiner(&h, sigma).unwrap();
                let residual = op.mul(&w).max_abs_diff(&w.mul(&op));
                assert!(residual <= h.tol(), "residual {residual}");
            }
        }
    }

    #[test]
    fn orbit_count_matches_the_rank_oracle() {
        let h = heis(&[3]);
        let gens = symplectic_sections(&h, 3, 1);
        assert_eq!(
            commutant_dim_oracle(&h, &gens).unwrap(),
            multiplicity_square_sum(h.space(), &gens)
        );
        // and with an inner twist thrown in, which kills some orbits
        let h = heis(&[3]);
        let inner = CentreFixingAutomorphism::inner(h.space(), &h.space().point_at(4));
        let gens = vec![inner];
        assert_eq!(
            commutant_dim_oracle(&h, &gens).unwrap(),
            multiplicity_square_sum(h.space(), &gens)
        );
    }

    #[test]
    fn inner_twist_makes_unpaired_points_inadmissible() {
        // conjugation by W_l stabilises every point; the phase e(l, k) is
        // nontrivial unless k pairs trivially with l
        let h = heis(&[3]);
        let s = h.space();
        let l = s.point_at(4);
        let inner = CentreFixingAutomorphism::inner(s, &l);
        let decomposition = orbit_decomposition(s, &[inner.clone()]);
        let admissible = decomposition.admissible_count();
        let expected = (0..s.len())
            .filter(|&i| s.commutator_form(&l, &s.point_at(i)).is_one())
            .count();
        assert_eq!(admissible, expected);
        assert_eq!(admissible, 3);

        let witnesses = stabilizer_witnesses(&[inner]);
        assert_eq!(witnesses.len(), s.len() - expected);
    }

    #[test]
    fn admissibility_does_not_depend_on_the_representative() {
        // relabel the phase space by feeding generators in different orders;
        // the admissible orbit sets must agree pointwise
        let h = heis(&[9]);
        let gens = symplectic_sections(&h, 3, 2);
        let rev: Vec<_> = gens.iter().rev().cloned().collect();
        let a = orbit_decomposition(h.space(), &gens);
        let b = orbit_decomposition(h.space(), &rev);
        let admissible_a: Vec<_> = a.orbits.iter().map(|o| (o.points.clone(), o.admissible)).collect();
        let admissible_b: Vec<_> = b.orbits.iter().map(|o| (o.points.clone(), o.admissible)).collect();
        assert_eq!(admissible_a, admissible_b);
    }

    #[test]
    fn parity_idempotents_are_orthogonal_projections() {
        for moduli in [&[3][..], &[9][..]] {
            let h = heis(moduli);
            let (plus, minus) = parity_idempotents(&h).unwrap();
            let tol = h.tol();
            assert!(plus.add(&minus).max_abs_diff(&Operator::identity(h.dim())) <= tol);
            assert!(plus.mul(&plus).max_abs_diff(&plus) <= tol);
            assert!(minus.mul(&minus).max_abs_diff(&minus) <= tol);
            assert!(plus.mul(&minus).max_abs() <= tol);
            assert!(plus.adjoint().max_abs_diff(&plus) <= tol);
            assert!(minus.adjoint().max_abs_diff(&minus) <= tol);
        }
    }

    #[test]
    fn parity_idempotents_act_by_point_reflection() {
        // eps_± f(u) = (f(u) ± f(-u))/2
        let h = heis(&[9]);
        let g = h.group();
        let n = h.dim();
        let (plus, minus) = parity_idempotents(&h).unwrap();
        let mut direct_plus = Array2::zeros((n, n));
        let mut direct_minus = Array2::zeros((n, n));
        for u in g.elements() {
            let i = g.index_of(&u) as usize;
            let j = g.index_of(&g.neg(&u).unwrap()) as usize;
            direct_plus[[i, i]] += Complex64::new(0.5, 0.0);
            direct_plus[[i, j]] += Complex64::new(0.5, 0.0);
            direct_minus[[i, i]] += Complex64::new(0.5, 0.0);
            direct_minus[[i, j]] -= Complex64::new(0.5, 0.0);
        }
        assert!(plus.max_abs_diff(&Operator::from_matrix(direct_plus).unwrap()) <= h.tol());
        assert!(minus.max_abs_diff(&Operator::from_matrix(direct_minus).unwrap()) <= h.tol());
    }

    #[test]
    fn parity_ranks_count_even_and_odd_functions() {
        for (moduli, expect_plus, expect_minus) in [(&[3][..], 2, 1), (&[9][..], 5, 4)] {
            let h = heis(moduli);
            let (plus, minus) = parity_idempotents(&h).unwrap();
            assert_eq!(linalg::rank(plus.matrix(), 1e-9), expect_plus);
            assert_eq!(linalg::rank(minus.matrix(), 1e-9), expect_minus);
        }
    }

    #[test]
    fn parity_check_distinguishes_prime_exponent() {
        let h3 = heis(&[3]);
        let gens = symplectic_sections(&h3, 3, 1);
        let chk = parity_invariance_check(&h3, &gens, true).unwrap();
        assert!(chk.pass && chk.prime_exponent && chk.commutant_dim == 2);

        let h9 = heis(&[9]);
        let gens = symplectic_sections(&h9, 3, 2);
        let chk = parity_invariance_check(&h9, &gens, true).unwrap();
        assert!(chk.pass && !chk.prime_exponent && chk.commutant_dim == 3);
        // commutes regardless of the subgroup
        assert!(chk.commute_residual <= h9.tol());
    }

    #[test]
    fn sections_verify_before_use() {
        // guard: the generator Weil operators in these tests really do
        // intertwine
        let h = heis(&[9]);
        for sigma in symplectic_sections(&h, 3, 2) {
            let w = intertwiner(&h, &sigma).unwrap();
            assert!(verify_intertwiner(&h, &w, &sigma) <= h.tol());
        }
    }
}
