//! Weil operators: for each validated centre-fixing automorphism, the
//! unitary intertwiner realising it by conjugation, plus the character
//! quantities and the projective cocycle the intertwiners carry.
//!
//! The intertwiner is built by averaging: for a trial operator `X`,
//!
//! ```text
//! U0 = (1/|K|) sum_k sigma1(k) W_{sigma2 k} X W_k^*
//! ```
//!
//! intertwines by construction, and is a scalar multiple of the (unique up
//! to phase) unitary solution, so the first trial with non-negligible norm
//! is rescaled and phase-normalised. Matrix units are tried in row-major
//! order and the whole construction is deterministic: rebuilding the same
//! operator yields bitwise-identical matrices.

use ndarray::Array2;
use num_complex::Complex64;

use crate::automorphism::CentreFixingAutomorphism;
use crate::error::{Error, Result};
use crate::heisenberg::{Heisenberg, Operator};

/// Frobenius-norm threshold below which an averaged trial is considered
/// null and the next matrix unit is tried.
const NULL_TRIAL_THRESHOLD: f64 = 1e-6;

/// Construct the unitary `U` with `U W_k U^* = sigma1(k) W_{sigma2 k}` for
/// every `k`, normalised so that the first entry of modulus above 1e-6 (in
/// row-major order) is real and positive.
pub fn intertwiner(h: &Heisenberg, sigma: &CentreFixingAutomorphism) -> Result<Operator> {
    let space = h.space();
    let group = h.group();
    let n = h.dim();
    let kn = space.len();
    if sigma.sigma1().len() != kn {
        return Err(Error::ShapeMismatch {
            expected: kn,
            got: sigma.sigma1().len(),
        });
    }

    // Per phase point: the x-part translation offsets (as indices acting on
    // row/column labels) and the exact entry phases of the single non-zero
    // coefficient each term contributes.
    //
    // W_{sigma2 k} E_{ab} W_k^* has the lone entry
    //   (a + x', b + x) -> chi'(a) conj(chi(b)),
    // where k = (x, chi) and sigma2 k = (x', chi').
    let elements: Vec<_> = group.elements().collect();
    let mut term_data = Vec::with_capacity(kn);
    for ki in 0..kn {
        let k = space.point_at(ki);
        let img = space.point_at(sigma.sigma2().apply_idx(ki));
        let x = space.x_part(&k);
        let chi = space.chi_part(&k);
        let xi = space.x_part(&img);
        let chii = space.chi_part(&img);
        let s1 = sigma.sigma1_at(ki).value();
        term_data.push((x, chi, xi, chii, s1));
    }

    for a in 0..n {
        for b in 0..n {
            let ea = &elements[a];
            let eb = &elements[b];
            let mut u0: Array2<Complex64> = Array2::zeros((n, n));
            for (x, chi, xi, chii, s1) in &term_data {
                let row = group.index_of(&group.add(ea, xi)?) as usize;
                let col = group.index_of(&group.add(eb, x)?) as usize;
                let phase = group.pairing(chii, ea)?.value()
                    * group.pairing(chi, eb)?.value().conj();
                u0[[row, col]] += s1 * phase;
            }
            let norm = u0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / kn as f64;
            if norm <= NULL_TRIAL_THRESHOLD {
                continue;
            }
            // rescale (a unitary has Frobenius norm sqrt(n)) and fix the
            // global phase
            let scale = (n as f64).sqrt() / (norm * kn as f64);
            let mut u = u0.mapv(|z| z * scale);
            let anchor = u
                .iter()
                .copied()
                .find(|z| z.norm() > NULL_TRIAL_THRESHOLD)
                .expect("rescaled operator has an entry above threshold");
            let phase_fix = anchor.conj() / anchor.norm();
            u.mapv_inplace(|z| z * phase_fix);
            let op = Operator::from_matrix(u)?;
            if !op.is_unitary(h.tol()) {
                return Err(Error::Intertwiner(
                    "rescaled average is not unitary; invalid automorphism or numerical failure"
                        .into(),
                ));
            }
            return Ok(op);
        }
    }
    Err(Error::Intertwiner(
        "all matrix-unit trials averaged to zero".into(),
    ))
}

/// Largest max-norm residual of `U W_k U^* - sigma1(k) W_{sigma2 k}` over
/// all phase points.
pub fn verify_intertwiner(h: &Heisenberg, u: &Operator, sigma: &CentreFixingAutomorphism) -> f64 {
    let space = h.space();
    let adj = u.adjoint();
    let mut worst = 0.0f64;
    for ki in 0..space.len() {
        let lhs = u.mul(h.weyl_at(ki)).mul(&adj);
        let rhs = h
            .weyl_at(sigma.sigma2().apply_idx(ki))
            .scale(sigma.sigma1_at(ki).value());
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    worst
}

/// The trace of conjugation by `W(sigma)` on the operator algebra: the exact
/// phase sum `sum_{sigma2 k = k} sigma1(k)`, evaluated as a complex number.
pub fn kappa_trace(sigma: &CentreFixingAutomorphism) -> Complex64 {
    sigma
        .sigma2()
        .fixed_point_indices()
        .into_iter()
        .map(|i| sigma.sigma1_at(i).value())
        .sum()
}

/// Outcome of the character-modulus identity
/// `|tr W(sigma)|^2 = sum_{sigma2 k = k} sigma1(k)`.
#[derive(Clone, Copy, Debug)]
pub struct AbsTraceCheck {
    /// `|tr W(sigma)|^2` from the constructed intertwiner.
    pub lhs: f64,
    /// Real part of the fixed-point phase sum.
    pub rhs: f64,
    /// Absolute size of the imaginary part of the phase sum (must vanish).
    pub imag: f64,
    pub pass: bool,
}

const CHARACTER_TOL: f64 = 1e-6;

/// Compare `|tr W(sigma)|^2` with the fixed-point phase sum.
pub fn abs_trace_check(h: &Heisenberg, sigma: &CentreFixingAutomorphism) -> Result<AbsTraceCheck> {
    let u = intertwiner(h, sigma)?;
    let lhs = u.trace().norm_sqr();
    let kappa = kappa_trace(sigma);
    let imag = kappa.im.abs();
    let rhs = kappa.re;
    let pass = imag <= CHARACTER_TOL && rhs >= -CHARACTER_TOL && (lhs - rhs).abs() <= CHARACTER_TOL;
    Ok(AbsTraceCheck {
        lhs,
        rhs,
        imag,
        pass,
    })
}

/// Whether `tr W(sigma)` vanishes; checks that this agrees with the
/// conjugacy-class criterion (the normalised phase function being nontrivial
/// on the fixed subgroup). Odd order only.
pub fn trace_vanishing_check(h: &Heisenberg, sigma: &CentreFixingAutomorphism) -> Result<bool> {
    if !h.group().is_odd_order() {
        return Err(Error::EvenOrder);
    }
    let u = intertwiner(h, sigma)?;
    let vanishes = u.trace().norm() <= CHARACTER_TOL;
    let meets = sigma.class_meets_symplectic(h.space())?;
    if vanishes == meets {
        return Err(Error::Disagreement(format!(
            "trace modulus {} but class-meets-section criterion is {meets}",
            u.trace().norm()
        )));
    }
    Ok(vanishes)
}

/// The projective cocycle `c(sigma, tau)` defined by
/// `W(sigma) W(tau) = c(sigma, tau) W(sigma tau)` under this module's phase
/// normalisation. Errors if the ratio is not a unimodular scalar.
pub fn cocycle(
    h: &Heisenberg,
    sigma: &CentreFixingAutomorphism,
    tau: &CentreFixingAutomorphism,
) -> Result<Complex64> {
    let ws = intertwiner(h, sigma)?;
    let wt = intertwiner(h, tau)?;
    let wst = intertwiner(h, &sigma.compose(tau))?;
    let ratio = ws.mul(&wt).mul(&wst.adjoint());
    let c = ratio.trace() / h.dim() as f64;
    let residual = ratio.max_abs_diff(&Operator::identity(h.dim()).scale(c));
    if residual > h.tol() {
        return Err(Error::NonScalar(format!(
            "cocycle ratio deviates from a scalar by {residual}"
        )));
    }
    if (c.norm() - 1.0).abs() > h.tol() {
        return Err(Error::NonScalar(format!(
            "cocycle modulus {} is not 1",
            c.norm()
        )));
    }
    Ok(c)
}
