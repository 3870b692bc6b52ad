//! The complete symplectic worked example over `A = (Z/p^n)^g` for odd
//! prime `p`: the delta-operator algebra spanning the commutant, the nested
//! chain of invariant subspaces with its dimension table, and the level
//! structure of the restriction to congruence kernels.
//!
//! The commutant of the full symplectic Weil representation is spanned by
//!
//! ```text
//! Delta_r = sum_{k in p^r K} NW_k,   r = 0, ..., n,
//! ```
//!
//! with the product rule
//! `Delta_r Delta_s = p^{2g(n - max)} Delta_{max(min(r,s), n - max(r,s))}`.
//! For `2r <= n`, `p^{-2gr} Delta_{n-r}` is the orthogonal projection onto
//! the subspace `V_{n-2r}` of functions supported on `p^r A` and invariant
//! under `p^{n-r} A`; intersecting with the parity split and removing each
//! deeper layer yields the `n + 1` irreducible invariant subspaces
//! `U_{n-2r}^{±}`.

use std::cell::RefCell;
use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64;

use crate::abelian::FiniteAbelianGroup;
use crate::automorphism::{from_symplectic, symplectic_generators, SymplecticMatrix};
use crate::decomposition::{is_prime, parity_idempotents};
use crate::error::{Error, Result};
use crate::heisenberg::{Heisenberg, Operator};
use crate::linalg;
use crate::weil::intertwiner;

/// Parity of a function subspace under `f(u) -> f(-u)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Even => write!(f, "+"),
            Parity::Odd => write!(f, "-"),
        }
    }
}

/// An orthonormal basis of an invariant subspace of `L^2(A)`.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    /// `|A| x d` matrix with orthonormal columns.
    pub columns: Array2<Complex64>,
    /// `V{m}` or `U{m}{+/-}` with `m = n - 2r`.
    pub label: String,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }
}

/// Matrix-product check of the delta-operator product rule at one `(r, s)`.
#[derive(Clone, Debug)]
pub struct DeltaProductCheck {
    pub computed: Operator,
    pub predicted: Operator,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimensionRow {
    /// `m = n - 2r`.
    pub m: u32,
    pub parity: Parity,
    pub expected: u64,
    pub computed: u64,
}

#[derive(Clone, Debug)]
pub struct DimensionTable {
    pub rows: Vec<DimensionRow>,
    pub total_expected: u64,
    pub total_computed: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct IrreducibilityReport {
    pub subspace_count: usize,
    pub expected_count: usize,
    pub invariance_residual: f64,
    pub orthogonality_residual: f64,
    pub total_dimension: u64,
    pub pass: bool,
}

const DELTA_TOL: f64 = 1e-8;
const SCALAR_TOL: f64 = 1e-6;

/// The worked example for one `(p, n, g)`.
pub struct SpExample {
    p: u64,
    n: u32,
    g: usize,
    modulus: u64,
    heisenberg: Heisenberg,
    weil_cache: RefCell<HashMap<Vec<u8>, Operator>>,
}

impl SpExample {
    pub fn new(p: u64, n: u32, g: usize) -> Result<Self> {
        if p % 2 == 0 || !is_prime(p) {
            return Err(Error::InvalidArgument(format!("p = {p} is not an odd prime")));
        }
        if n == 0 || g == 0 {
            return Err(Error::InvalidArgument("need n >= 1 and g >= 1".into()));
        }
        let modulus = p
            .checked_pow(n)
            .ok_or_else(|| Error::InvalidArgument("p^n overflows u64".into()))?;
        let group = FiniteAbelianGroup::new(&vec![modulus; g])?;
        Ok(SpExample {
            p,
            n,
            g,
            modulus,
            heisenberg: Heisenberg::new(group),
            weil_cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn heisenberg(&self) -> &Heisenberg {
        &self.heisenberg
    }

    /// Dimension of `L^2(A)`, i.e. `p^{gn}`.
    pub fn dim(&self) -> usize {
        self.heisenberg.dim()
    }

    pub fn tol(&self) -> f64 {
        self.heisenberg.tol()
    }

    pub fn generators(&self) -> Vec<SymplecticMatrix> {
        symplectic_generators(self.p, self.n, self.g).expect("validated parameters")
    }

    /// The Weil operator of a symplectic matrix through the canonical
    /// odd-order section, memoised per matrix.
    pub fn weil_of(&self, mat: &SymplecticMatrix) -> Result<Operator> {
        let key: Vec<u8> = mat_key(mat);
        if let Some(op) = self.weil_cache.borrow().get(&key) {
            return Ok(op.clone());
        }
        let space = self.heisenberg.space();
        let sigma = from_symplectic(space, &mat.to_k_automorphism(space)?)?;
        let op = intertwiner(&self.heisenberg, &sigma)?;
        self.weil_cache.borrow_mut().insert(key, op.clone());
        Ok(op)
    }

    /// Indices of the subgroup `p^r K` in the phase-space enumeration.
    fn subgroup_indices(&self, r: u32) -> Vec<usize> {
        let space = self.heisenberg.space();
        let pr = self.p.pow(r);
        let per_coord = self.modulus / pr;
        let rank = 2 * self.g;
        let mut out = Vec::with_capacity((per_coord as usize).pow(rank as u32));
        let mut counter = vec![0u64; rank];
        loop {
            let coords: Vec<i64> = counter.iter().map(|&t| (t * pr) as i64).collect();
            let base = space.base();
            let x = base.element(&coords[..self.g]).expect("valid coords");
            let chi = base.element(&coords[self.g..]).expect("valid coords");
            out.push(space.index_of(&space.point(&x, &chi).expect("valid point")));
            // mixed-radix increment
            let mut i = rank;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                counter[i] += 1;
                if counter[i] < per_coord {
                    break;
                }
                counter[i] = 0;
            }
        }
    }

    /// `Delta_r = sum_{k in p^r K} NW_k` for `0 <= r <= n`.
    pub fn delta_operator(&self, r: u32) -> Result<Operator> {
        if r > self.n {
            return Err(Error::InvalidArgument(format!(
                "r = {r} out of range 0..={}",
                self.n
            )));
        }
        let space = self.heisenberg.space();
        let mut sum = Operator::zeros(self.dim());
        for idx in self.subgroup_indices(r) {
            sum = sum.add(&self.heisenberg.normalized_weyl(&space.point_at(idx))?);
        }
        Ok(sum)
    }

    /// Compare `Delta_r Delta_s` with its closed form
    /// `p^{2g(n - max)} Delta_{max(min(r,s), n - max(r,s))}`.
    pub fn delta_product_check(&self, r: u32, s: u32) -> Result<DeltaProductCheck> {
        let computed = self.delta_operator(r)?.mul(&self.delta_operator(s)?);
        let hi = r.max(s);
        let lo = r.min(s);
        let coeff = (self.p as f64).powi((2 * self.g as u32 * (self.n - hi)) as i32);
        let predicted = self
            .delta_operator(lo.max(self.n - hi))?
            .scale(Complex64::new(coeff, 0.0));
        let residual = computed.max_abs_diff(&predicted);
        Ok(DeltaProductCheck {
            computed,
            predicted,
            residual,
            pass: residual <= DELTA_TOL,
        })
    }

    /// Orthonormal basis of `V_{n-2r}`, the image of the projection
    /// `p^{-2gr} Delta_{n-r}`: functions supported on `p^r A` invariant
    /// under `p^{n-r} A`. Requires `2r <= n`; the dimension is
    /// `p^{g(n-2r)}`.
    pub fn subspace_v(&self, r: u32) -> Result<SubspaceBasis> {
        if 2 * r > self.n {
            return Err(Error::InvalidArgument(format!(
                "r = {r} out of range 0..={}",
                self.n / 2
            )));
        }
        let scale = (self.p as f64).powi(-(2 * self.g as i32 * r as i32));
        let projector = self
            .delta_operator(self.n - r)?
            .scale(Complex64::new(scale, 0.0));
        let tol = self.tol();
        if projector.mul(&projector).max_abs_diff(&projector) > tol {
            return Err(Error::Disagreement(format!(
                "p^(-2gr) Delta_(n-r) is not idempotent at r = {r}"
            )));
        }
        if projector.adjoint().max_abs_diff(&projector) > tol {
            return Err(Error::Disagreement(format!(
                "p^(-2gr) Delta_(n-r) is not self-adjoint at r = {r}"
            )));
        }
        let columns = linalg::orthonormal_span(projector.matrix(), 1e-6);
        let m = self.n - 2 * r;
        let expected = self.p.pow(self.g as u32 * m);
        if columns.ncols() as u64 != expected {
            return Err(Error::Disagreement(format!(
                "V_{m} has rank {} but dimension {expected} was expected",
                columns.ncols()
            )));
        }
        Ok(SubspaceBasis {
            columns,
            label: format!("V{m}"),
        })
    }

    /// Orthonormal basis of the parity part of `V_{n-2r}`.
    fn subspace_v_parity(&self, r: u32, parity: Parity) -> Result<Array2<Complex64>> {
        let v = self.subspace_v(r)?;
        let (plus, minus) = parity_idempotents(&self.heisenberg)?;
        let eps = match parity {
            Parity::Even => plus,
            Parity::Odd => minus,
        };
        let projected = eps.matrix().dot(&v.columns);
        Ok(linalg::orthonormal_span(&projected, 1e-6))
    }

    /// Orthonormal basis of `U_{n-2r}^{±}`: the orthogonal complement of the
    /// parity part of `V_{n-2r-2}` inside the parity part of `V_{n-2r}`; at
    /// the innermost layer `r = floor(n/2)` the parity part itself. The odd
    /// part at `m = 0` is zero-dimensional.
    pub fn subspace_u(&self, r: u32, parity: Parity) -> Result<SubspaceBasis> {
        let vp = self.subspace_v_parity(r, parity)?;
        let m = self.n - 2 * r;
        let label = format!("U{m}{parity}");
        if r == self.n / 2 {
            return Ok(SubspaceBasis {
                columns: vp,
                label,
            });
        }
        let inner = self.subspace_v_parity(r + 1, parity)?;
        let complement = linalg::project_out(&inner, &vp);
        Ok(SubspaceBasis {
            columns: linalg::orthonormal_span(&complement, 1e-6),
            label,
        })
    }

    fn expected_u_dim(&self, r: u32, parity: Parity) -> u64 {
        let m = self.n - 2 * r;
        let pm = self.p.pow(self.g as u32 * m);
        if r < self.n / 2 {
            (pm - self.p.pow(self.g as u32 * (m - 2))) / 2
        } else {
            match parity {
                Parity::Even => (pm + 1) / 2,
                Parity::Odd => (pm - 1) / 2,
            }
        }
    }

    /// Expected against constructed dimensions of every subspace in the
    /// decomposition, skipping the vanishing odd part at `m = 0`.
    pub fn dimension_table(&self) -> Result<DimensionTable> {
        let mut rows = Vec::new();
        let mut total_expected = 0;
        let mut total_computed = 0;
        for r in 0..=self.n / 2 {
            for parity in [Parity::Even, Parity::Odd] {
                let expected = self.expected_u_dim(r, parity);
                if expected == 0 {
                    continue;
                }
                let computed = self.subspace_u(r, parity)?.dim() as u64;
                total_expected += expected;
                total_computed += computed;
                rows.push(DimensionRow {
                    m: self.n - 2 * r,
                    parity,
                    expected,
                    computed,
                });
            }
        }
        Ok(DimensionTable {
            rows,
            total_expected,
            total_computed,
        })
    }

    fn nonzero_subspaces(&self) -> Result<Vec<SubspaceBasis>> {
        let mut out = Vec::new();
        for r in 0..=self.n / 2 {
            for parity in [Parity::Even, Parity::Odd] {
                if self.expected_u_dim(r, parity) == 0 {
                    continue;
                }
                out.push(self.subspace_u(r, parity)?);
            }
        }
        Ok(out)
    }

    /// Verify the invariant-subspace decomposition: `n + 1` nonzero
    /// subspaces, each invariant under the generator Weil operators,
    /// pairwise orthogonal, jointly spanning `L^2(A)`.
    pub fn irreducibility_check(&self) -> Result<IrreducibilityReport> {
        let subspaces = self.nonzero_subspaces()?;
        let expected_count = self.n as usize + 1;
        let mut invariance_residual = 0.0f64;
        for mat in self.generators() {
            let w = self.weil_of(&mat)?;
            for sub in &subspaces {
                let image = w.matrix().dot(&sub.columns);
                let outside = linalg::project_out(&sub.columns, &image);
                invariance_residual = invariance_residual
                    .max(outside.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        let mut orthogonality_residual = 0.0f64;
        for i in 0..subspaces.len() {
            for j in i + 1..subspaces.len() {
                let overlap = subspaces[i]
                    .columns
                    .t()
                    .mapv(|z| z.conj())
                    .dot(&subspaces[j].columns);
                orthogonality_residual = orthogonality_residual
                    .max(overlap.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        let total_dimension: u64 = subspaces.iter().map(|s| s.dim() as u64).sum();
        let tol = self.tol();
        let pass = subspaces.len() == expected_count
            && invariance_residual <= tol
            && orthogonality_residual <= tol
            && total_dimension == self.dim() as u64;
        Ok(IrreducibilityReport {
            subspace_count: subspaces.len(),
            expected_count,
            invariance_residual,
            orthogonality_residual,
            total_dimension,
            pass,
        })
    }

    /// Deterministic elements of the congruence kernel `N_m` (matrices
    /// `I + p^m X`): exhaustive for `g = 1` when the coefficient scan is
    /// small, otherwise symplectic transvections `I - p^m mu v v^T J` over a
    /// fixed direction list and their pairwise products. `N_n` is trivial.
    fn kernel_sample(&self, m: u32) -> Result<Vec<SymplecticMatrix>> {
        if m > self.n {
            return Err(Error::InvalidArgument(format!(
                "kernel depth {m} out of range 0..={}",
                self.n
            )));
        }
        if m == self.n {
            return Ok(Vec::new());
        }
        if m == 0 {
            // a bounded slice of the group itself, generators first
            let gens = self.generators();
            let mut out = gens.clone();
            for a in &gens {
                for b in &gens {
                    out.push(a.mul(b));
                }
                out.push(a.mul(a).mul(a));
            }
            return Ok(dedup_matrices(out, 64));
        }
        let d = 2 * self.g;
        let span = self.p.pow(self.n - m);
        let scan_size = (span as f64).powi((d * d) as i32);
        if self.g == 1 && scan_size <= 7000.0 {
            let mut out = Vec::new();
            let pm = self.p.pow(m) as i64;
            let total = (span as usize).pow(4);
            for code in 0..total {
                let mut c = code;
                let mut entries = [0i64; 4];
                for e in entries.iter_mut() {
                    *e = (c % span as usize) as i64;
                    c /= span as usize;
                }
                let mat = SymplecticMatrix::new(
                    1,
                    self.modulus,
                    &[
                        1 + pm * entries[0],
                        pm * entries[1],
                        pm * entries[2],
                        1 + pm * entries[3],
                    ],
                )?;
                if mat.is_symplectic() {
                    out.push(mat);
                }
            }
            return Ok(dedup_matrices(out, usize::MAX));
        }
        // transvection sample
        let mut dirs: Vec<Vec<i64>> = Vec::new();
        for i in 0..d {
            let mut v = vec![0i64; d];
            v[i] = 1;
            dirs.push(v);
        }
        for i in 0..d {
            for j in i + 1..d {
                for sign in [1i64, -1] {
                    let mut v = vec![0i64; d];
                    v[i] = 1;
                    v[j] = sign;
                    dirs.push(v);
                }
            }
        }
        let mut singles = Vec::new();
        for v in &dirs {
            for mu in 1..=2i64 {
                let lambda = (self.p.pow(m) as i64) * mu;
                singles.push(self.transvection(v, lambda)?);
            }
        }
        let mut out = singles.clone();
        for (i, a) in singles.iter().enumerate() {
            for b in singles.iter().skip(i + 1) {
                out.push(a.mul(b));
            }
        }
        Ok(dedup_matrices(out, 64))
    }

    /// `x -> x + lambda <x, v> v`, always symplectic.
    fn transvection(&self, v: &[i64], lambda: i64) -> Result<SymplecticMatrix> {
        let d = 2 * self.g;
        let mut entries = vec![0i64; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        // <x, v> = x^T J v with J = [[0, I], [-I, 0]]
        let jv: Vec<i64> = (0..d)
            .map(|a| {
                if a < self.g {
                    v[a + self.g]
                } else {
                    -v[a - self.g]
                }
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] += lambda * v[i] * jv[j];
            }
        }
        let mat = SymplecticMatrix::new(self.g, self.modulus, &entries)?;
        debug_assert!(mat.is_symplectic());
        Ok(mat)
    }

    fn acts_by_scalar(&self, w: &Operator, basis: Option<&Array2<Complex64>>) -> bool {
        let (trace, dim) = match basis {
            None => (w.trace(), self.dim()),
            Some(b) => {
                let restricted = b.t().mapv(|z| z.conj()).dot(w.matrix()).dot(b);
                (restricted.diag().sum(), b.ncols())
            }
        };
        (trace.norm() - dim as f64).abs() <= SCALAR_TOL
    }

    fn level_on(&self, basis: Option<&Array2<Complex64>>) -> Result<u32> {
        for m in 0..=self.n {
            let mut all_scalar = true;
            for mat in self.kernel_sample(m)? {
                let w = self.weil_of(&mat)?;
                if !self.acts_by_scalar(&w, basis) {
                    all_scalar = false;
                    break;
                }
            }
            if all_scalar {
                return Ok(m);
            }
        }
        unreachable!("the kernel at depth n is trivial")
    }

    /// Level of the full representation: the smallest `m` such that every
    /// sampled element of `N_m` acts by a scalar (0 when the whole group
    /// does).
    pub fn level(&self) -> Result<u32> {
        self.level_on(None)
    }

    /// Level of the restriction to `U_{n-2r}^{±}`. One-dimensional
    /// subspaces carry a scalar action of the whole group and come out at
    /// level 0.
    pub fn level_of_subspace(&self, r: u32, parity: Parity) -> Result<u32> {
        let basis = self.subspace_u(r, parity)?;
        if basis.dim() == 0 {
            return Err(Error::InvalidArgument(format!(
                "subspace {} is zero",
                basis.label
            )));
        }
        self.level_on(Some(&basis.columns))
    }

    /// Check the identification of `V_{n-2r}` with the lower-level model:
    /// the graded embedding `j` of `L^2((Z/p^{n-2r})^g)` (functions pulled
    /// back along `p^r A -> A'`, extended by zero) intertwines normalised
    /// Weyl operators for compatible phase points, and conjugating the
    /// restricted Weil operators by `j` matches the Weil operators of the
    /// small model up to a unimodular scalar per generator. Returns the
    /// largest residual.
    pub fn level_embedding_check(&self, r: u32) -> Result<f64> {
        if 2 * r > self.n {
            return Err(Error::InvalidArgument(format!(
                "r = {r} out of range 0..={}",
                self.n / 2
            )));
        }
        if r == 0 {
            // j is the identity
            return Ok(0.0);
        }
        let m_exp = self.n - 2 * r;
        if m_exp == 0 {
            // one-dimensional target: restrictions are 1x1 unitaries
            let v = self.subspace_v(r)?;
            let mut worst = 0.0f64;
            for mat in self.generators() {
                let w = self.weil_of(&mat)?;
                let restricted = v.columns.t().mapv(|z| z.conj()).dot(w.matrix()).dot(&v.columns);
                worst = worst.max((restricted[[0, 0]].norm() - 1.0).abs());
            }
            return Ok(worst);
        }

        let small = SpExample::new(self.p, m_exp, self.g)?;
        let small_modulus = small.modulus;
        let pr = self.p.pow(r);
        let group = self.heisenberg.group();
        let small_group = small.heisenberg.group();

        // embedding matrix: column u' is the indicator of the fibre of
        // p^r A -> A' over u'
        let nbig = self.dim();
        let nsmall = small.dim();
        let mut embed: Array2<Complex64> = Array2::zeros((nbig, nsmall));
        for u in group.elements() {
            if u.coords().iter().any(|&c| c % pr != 0) {
                continue;
            }
            let reduced: Vec<i64> = u
                .coords()
                .iter()
                .map(|&c| ((c / pr) % small_modulus) as i64)
                .collect();
            let target = small_group.element(&reduced)?;
            embed[[
                group.index_of(&u) as usize,
                small_group.index_of(&target) as usize,
            ]] = Complex64::new(1.0, 0.0);
        }
        let iso_scale = 1.0 / (self.p as f64).powi((self.g as u32 * r) as i32).sqrt();
        let basis = embed.mapv(|z| z * iso_scale);

        let mut worst = 0.0f64;

        // compatible normalised Weyl operators: k = p^r * (integer lift of k')
        let small_space = small.heisenberg.space();
        let space = self.heisenberg.space();
        for kp in small_space.points() {
            let lifted: Vec<i64> = small_space
                .x_part(&kp)
                .coords()
                .iter()
                .chain(small_space.chi_part(&kp).coords().iter())
                .map(|&c| (c * pr) as i64)
                .collect();
            let x = group.element(&lifted[..self.g])?;
            let chi = group.element(&lifted[self.g..])?;
            let k = space.point(&x, &chi)?;
            let lhs = self.heisenberg.normalized_weyl(&k)?.matrix().dot(&embed);
            let rhs = embed.dot(small.heisenberg.normalized_weyl(&kp)?.matrix());
            let diff = (&lhs - &rhs)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            worst = worst.max(diff);
        }

        // restricted big Weil operators match the small model up to a
        // unimodular scalar
        for mat in self.generators() {
            let w = self.weil_of(&mat)?;
            let restricted = basis.t().mapv(|z| z.conj()).dot(w.matrix()).dot(&basis);
            let reduced = mat.reduced(small_modulus)?;
            let wq = small.weil_of(&reduced)?;
            let scalar: Complex64 = wq
                .matrix()
                .iter()
                .zip(restricted.iter())
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                / nsmall as f64;
            worst = worst.max((scalar.norm() - 1.0).abs());
            let diff = restricted
                .iter()
                .zip(wq.matrix().iter())
                .map(|(r, q)| (r - q * scalar).norm())
                .fold(0.0, f64::max);
            worst = worst.max(diff);
        }
        Ok(worst)
    }
}

fn mat_key(mat: &SymplecticMatrix) -> Vec<u8> {
    let d = 2 * mat.genus();
    let mut out = Vec::with_capacity(8 * d * d + 8);
    out.extend(mat.modulus().to_le_bytes());
    for r in 0..d {
        for c in 0..d {
            out.extend(mat.entry(r, c).to_le_bytes());
        }
    }
    out
}

fn dedup_matrices(mats: Vec<SymplecticMatrix>, cap: usize) -> Vec<SymplecticMatrix> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let identity = mats
        .first()
        .map(|m| SymplecticMatrix::identity(m.genus(), m.modulus()));
    for m in mats {
        if Some(&m) == identity.as_ref() {
            continue;
        }
        if seen.insert(mat_key(&m)) {
            out.push(m);
            if out.len() >= cap {
                break;
            }
        }
    }
    out
}
