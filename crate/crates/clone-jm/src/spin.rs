//! Symmetric qubit cloning and the joint spin measurement it induces.
//!
//! The pipeline: project `|psi><psi| (x) 1^(m-1)` onto the symmetric
//! subspace to clone one qubit into `m`, measure the three clones of the
//! `m = 3` machine along orthogonal axes, and pull the product measurement
//! back to an eight-outcome POVM on the input qubit. The effects come out
//! as `(1/8)(1 + (5/9) m.sigma)`: the Bloch vector of each clone shrinks by
//! 5/9, and after rescaling outcomes by 9/5 to remove the bias the summed
//! variance of the three spin estimates lands at 109/50 — above the value 2
//! reached by projecting onto spin-coherent states, which a sphere-
//! quadrature oracle reproduces here. A discrete eight-effect family that
//! would nominally reach the optimum is also constructed and audited; its
//! effects fail positivity, which [`validate_povm`] reports as a fact.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::quad::gauss_legendre;
use crate::tensor::{Operator, Vector};

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("qubit count {n} outside supported range 1..=12")]
    QubitCountOutOfRange { n: usize },
    #[error("clone count {m} outside supported range 1..=6")]
    CloneCountOutOfRange { m: usize },
    #[error("state is not normalized: |alpha|^2 + |beta|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("rescaling factor must be positive, got {lambda}")]
    NonPositiveRescale { lambda: f64 },
    #[error("effects do not form a POVM: {reason}")]
    InvalidPovm { reason: String },
    #[error("effect dimensions disagree: {left} vs {right}")]
    EffectDimensionMismatch { left: usize, right: usize },
    #[error("spin quantum number {j} is not a positive half-integer")]
    NonHalfIntegerSpin { j: f64 },
    #[error("sphere quadrature did not converge below {target:.1e} after {levels} refinements")]
    QuadratureNotConverged { target: f64, levels: usize },
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> Operator {
    Operator::from_vec(vec![2], vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
}

pub fn pauli_y() -> Operator {
    Operator::from_vec(vec![2], vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap()
}

pub fn pauli_z() -> Operator {
    Operator::from_vec(vec![2], vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]).unwrap()
}

fn paulis() -> [Operator; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Normalized single-qubit pure state `alpha |0> + beta |1>`.
#[derive(Clone, Copy, Debug)]
pub struct PureQubit {
    alpha: Complex64,
    beta: Complex64,
}

impl PureQubit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, SpinError> {
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(SpinError::NotNormalized { norm_sqr });
        }
        Ok(Self { alpha, beta })
    }

    /// Bloch angles: `(cos(theta/2), e^{i phi} sin(theta/2))`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let half = 0.5 * theta;
        Self {
            alpha: c(half.cos(), 0.0),
            beta: Complex64::from_polar(half.sin(), phi),
        }
    }

    /// Haar-uniform random pure state.
    pub fn random_with(rng: &mut impl Rng) -> Self {
        let u: f64 = rng.random_range(-1.0..1.0);
        let theta = u.acos();
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        Self::from_angles(theta, phi)
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn state_vector(&self) -> Vector {
        Vector::from_vec(vec![2], vec![self.alpha, self.beta]).expect("two amplitudes")
    }

    pub fn density(&self) -> Operator {
        self.state_vector().projector()
    }

    pub fn bloch_vector(&self) -> BlochVector {
        let cross = self.alpha.conj() * self.beta;
        BlochVector {
            nx: 2.0 * cross.re,
            ny: 2.0 * cross.im,
            nz: self.alpha.norm_sqr() - self.beta.norm_sqr(),
        }
    }
}

/// Real three-vector of Pauli expectations.
#[derive(Clone, Copy, Debug)]
pub struct BlochVector {
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
}

impl BlochVector {
    pub fn components(&self) -> [f64; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn length(&self) -> f64 {
        (self.nx * self.nx + self.ny * self.ny + self.nz * self.nz).sqrt()
    }
}

/// Bloch vector of a 2x2 density operator, `n_a = Re Tr[rho sigma_a]`.
pub fn bloch_vector_of(rho: &Operator) -> BlochVector {
    assert_eq!(rho.dim(), 2, "Bloch vector needs a qubit operator");
    let comp = paulis().map(|p| (&p * rho).trace().re);
    BlochVector {
        nx: comp[0],
        ny: comp[1],
        nz: comp[2],
    }
}

/// Orthonormal symmetric-subspace basis of `n` qubits: the `k`-th vector is
/// the equal-weight superposition of all computational states with `k`
/// ones.
pub fn dicke_states(n: usize) -> Result<Vec<Vector>, SpinError> {
    if !(1..=12).contains(&n) {
        return Err(SpinError::QubitCountOutOfRange { n });
    }
    let dim = 1usize << n;
    let dims = vec![2usize; n];
    let mut states = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let indices: Vec<usize> = (0..dim).filter(|i| i.count_ones() as usize == k).collect();
        let amp = c(1.0 / (indices.len() as f64).sqrt(), 0.0);
        let mut amps = vec![c(0.0, 0.0); dim];
        for &i in &indices {
            amps[i] = amp;
        }
        states.push(Vector::from_vec(dims.clone(), amps).expect("length matches"));
    }
    Ok(states)
}

/// Projector onto the symmetric subspace of `n` qubits.
#[derive(Clone, Debug)]
pub struct SymmetricProjector {
    n_qubits: usize,
    op: Operator,
}

impl SymmetricProjector {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }
}

pub fn symmetric_projector(n: usize) -> Result<SymmetricProjector, SpinError> {
    let basis = dicke_states(n)?;
    let mut op = Operator::zeros(&vec![2usize; n]);
    for v in &basis {
        op = &op + &v.projector();
    }
    Ok(SymmetricProjector { n_qubits: n, op })
}

/// Clone one qubit into `m` symmetric copies:
/// `rho_m = (2/(m+1)) S_m (|psi><psi| (x) 1^(m-1)) S_m`.
///
/// The `2/(m+1)` prefactor is the unit-trace normalization of the
/// symmetric projection; each reduced clone carries a Bloch vector shrunk
/// by [`shrink_factor`]`(m)`.
pub fn clone_1to_m(psi: &PureQubit, m: usize) -> Result<Operator, SpinError> {
    if !(1..=6).contains(&m) {
        return Err(SpinError::CloneCountOutOfRange { m });
    }
    let mut seed = psi.density();
    if m > 1 {
        seed = seed.tensor_product(&Operator::identity(&vec![2usize; m - 1]));
    }
    let s = symmetric_projector(m)?;
    let projected = &(s.op() * &seed) * s.op();
    Ok(projected.scaled(c(2.0 / (m as f64 + 1.0), 0.0)))
}

/// Reduced state of a single clone.
pub fn reduced_clone(psi: &PureQubit, m: usize) -> Result<Operator, SpinError> {
    Ok(clone_1to_m(psi, m)?.partial_trace(&[0])?)
}

/// Bloch contraction of each reduced clone of the symmetric 1->m machine,
/// `(m+2)/(3m)`; equals 5/9 at `m = 3`.
pub fn shrink_factor(m: usize) -> f64 {
    (m as f64 + 2.0) / (3.0 * m as f64)
}

/// One sign per measurement axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }
}

/// Joint outcome of measuring the three clones along x, y, z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TripleOutcome {
    pub mx: Sign,
    pub my: Sign,
    pub mz: Sign,
}

impl TripleOutcome {
    pub fn new(mx: Sign, my: Sign, mz: Sign) -> Self {
        Self { mx, my, mz }
    }

    /// All eight outcomes in lexicographic (mx, my, mz) order.
    pub fn all() -> [TripleOutcome; 8] {
        let signs = [Sign::Minus, Sign::Plus];
        let mut out = [TripleOutcome::new(Sign::Minus, Sign::Minus, Sign::Minus); 8];
        let mut idx = 0;
        for &mx in &signs {
            for &my in &signs {
                for &mz in &signs {
                    out[idx] = TripleOutcome::new(mx, my, mz);
                    idx += 1;
                }
            }
        }
        out
    }

    pub fn components(&self) -> [f64; 3] {
        [self.mx.value(), self.my.value(), self.mz.value()]
    }
}

/// `(1/8)(1 + coefficient * m.sigma)`: the common shape of all effects in
/// this module. The pullback POVM has coefficient 5/9; coefficient 1 gives
/// the audited discrete family.
pub fn bloch_effect(out: TripleOutcome, coefficient: f64) -> Operator {
    let m = out.components();
    let mut acc = Operator::identity(&[2]);
    for (p, &mi) in paulis().iter().zip(&m) {
        acc = &acc + &p.scaled(c(coefficient * mi, 0.0));
    }
    acc.scaled(c(0.125, 0.0))
}

fn single_axis_projector(pauli: &Operator, sign: f64) -> Operator {
    let sum = &Operator::identity(&[2]) + &pauli.scaled(c(sign, 0.0));
    sum.scaled(c(0.5, 0.0))
}

fn outcome_operator_for_axes(out: TripleOutcome, axes: [usize; 3]) -> Operator {
    let p = paulis();
    let m = out.components();
    let mut acc = single_axis_projector(&p[axes[0]], m[0]);
    for k in 1..3 {
        acc = acc.tensor_product(&single_axis_projector(&p[axes[k]], m[k]));
    }
    acc
}

/// Product of rank-1 spin projectors on the three clones:
/// `(1/8)(1 + mx sx)(x)(1 + my sy)(x)(1 + mz sz)`.
pub fn outcome_operator(out: TripleOutcome) -> Operator {
    outcome_operator_for_axes(out, [0, 1, 2])
}

/// Eight-effect POVM on a single qubit.
///
/// Construction checks completeness (`sum = 1` within 1e-12) and
/// Hermiticity of every effect; positivity is *not* required here — it is
/// what [`validate_povm`] audits.
#[derive(Clone, Debug)]
pub struct SpinPovm {
    effects: BTreeMap<TripleOutcome, Operator>,
}

impl SpinPovm {
    pub fn new(effects: BTreeMap<TripleOutcome, Operator>) -> Result<Self, SpinError> {
        if effects.len() != 8 {
            return Err(SpinError::InvalidPovm {
                reason: format!("expected 8 effects, got {}", effects.len()),
            });
        }
        let mut sum = Operator::zeros(&[2]);
        for (out, e) in &effects {
            if e.dim() != 2 {
                return Err(SpinError::InvalidPovm {
                    reason: format!("effect for {out:?} is not a qubit operator"),
                });
            }
            if !e.is_hermitian(1e-12) {
                return Err(SpinError::InvalidPovm {
                    reason: format!("effect for {out:?} is not Hermitian"),
                });
            }
            sum = &sum + e;
        }
        let completeness = sum.identity_residual();
        if completeness > 1e-12 {
            return Err(SpinError::InvalidPovm {
                reason: format!("effects sum to identity only within {completeness:.3e}"),
            });
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &BTreeMap<TripleOutcome, Operator> {
        &self.effects
    }

    pub fn effect(&self, out: TripleOutcome) -> &Operator {
        &self.effects[&out]
    }
}

fn pullback_povm_for_axes(axes: [usize; 3]) -> SpinPovm {
    let s3 = symmetric_projector(3).expect("n = 3 in range").op;
    let mut effects = BTreeMap::new();
    for out in TripleOutcome::all() {
        let sandwiched = &(&s3 * &outcome_operator_for_axes(out, axes)) * &s3;
        let effect = sandwiched
            .partial_trace(&[0])
            .expect("factor 0 exists")
            .scaled(c(0.5, 0.0));
        effects.insert(out, effect.hermitized());
    }
    SpinPovm::new(effects).expect("pullback effects form a POVM")
}

/// Pull the product measurement on the three clones back through the
/// cloning map: `Pi(m) = (1/2) Tr_23[ S3 Omega(m) S3 ]`.
///
/// Every effect equals `(1/8)(1 + (5/9) m.sigma)`.
pub fn pullback_povm() -> SpinPovm {
    pullback_povm_for_axes([0, 1, 2])
}

#[cfg(test)]
pub(crate) fn pullback_povm_with_axes(axes: [usize; 3]) -> SpinPovm {
    pullback_povm_for_axes(axes)
}

/// Born-rule outcome distribution for a pure input state, in
/// [`TripleOutcome::all`] order.
pub fn outcome_distribution(psi: &PureQubit, povm: &SpinPovm) -> Vec<(TripleOutcome, f64)> {
    outcome_distribution_density(&psi.density(), povm)
}

/// Born-rule distribution for a general density operator. Entries can be
/// negative when the effects are not positive semidefinite; they always
/// sum to the trace of `rho`.
pub fn outcome_distribution_density(rho: &Operator, povm: &SpinPovm) -> Vec<(TripleOutcome, f64)> {
    TripleOutcome::all()
        .into_iter()
        .map(|out| (out, (rho * povm.effect(out)).trace().re))
        .collect()
}

/// Variance scoring of the rescaled three-axis spin estimate.
#[derive(Clone, Copy, Debug)]
pub struct JointVarianceReport {
    pub rescale_lambda: f64,
    /// Mean of the estimator `lambda m_a / 2` per axis.
    pub per_axis_mean: [f64; 3],
    /// Sum over axes of the estimator variances (spin units, hbar = 1).
    pub total_variance: f64,
    /// Spin-coherent-state reference value for j = 1/2.
    pub bound: f64,
    pub unbiased: bool,
    /// Largest deviation of the per-axis mean from `n_a / 2`.
    pub unbiased_residual: f64,
}

/// Score the pullback POVM: outcomes `m_a = +-1` are mapped to spin
/// estimates `lambda m_a / 2` and the three estimator variances are summed,
/// all from the exact eight-outcome distribution. `lambda = 9/5` removes
/// the 5/9 bias and gives 109/50 for every pure state.
pub fn joint_variance(psi: &PureQubit, rescale_lambda: f64) -> Result<JointVarianceReport, SpinError> {
    joint_variance_for_family(psi, &pullback_povm(), rescale_lambda)
}

/// Same scoring for an arbitrary eight-effect family (used to audit
/// families that are not positive semidefinite).
pub fn joint_variance_for_family(
    psi: &PureQubit,
    povm: &SpinPovm,
    rescale_lambda: f64,
) -> Result<JointVarianceReport, SpinError> {
    if rescale_lambda <= 0.0 {
        return Err(SpinError::NonPositiveRescale {
            lambda: rescale_lambda,
        });
    }
    let distribution = outcome_distribution(psi, povm);
    let half_lambda = 0.5 * rescale_lambda;
    let mut mean = [0.0f64; 3];
    let mut second = [0.0f64; 3];
    for (out, p) in &distribution {
        for (axis, &mi) in out.components().iter().enumerate() {
            let estimate = half_lambda * mi;
            mean[axis] += p * estimate;
            second[axis] += p * estimate * estimate;
        }
    }
    let total_variance: f64 = (0..3).map(|a| second[a] - mean[a] * mean[a]).sum();
    let n = psi.bloch_vector().components();
    let unbiased_residual = (0..3)
        .map(|a| (mean[a] - 0.5 * n[a]).abs())
        .fold(0.0, f64::max);
    Ok(JointVarianceReport {
        rescale_lambda,
        per_axis_mean: mean,
        total_variance,
        bound: coherent_state_bound(0.5).expect("1/2 is half-integer"),
        unbiased: unbiased_residual <= 1e-12,
        unbiased_residual,
    })
}

/// The eight effects `(1/8)(1 + m.sigma)` with unit Bloch coefficient.
///
/// They are complete and Hermitian but not positive semidefinite (minimum
/// eigenvalue `(1 - sqrt(3))/8`), and with `lambda = 1` their summed
/// variance is 1/2; see [`validate_povm`] and [`joint_variance_for_family`].
pub fn discrete_family() -> SpinPovm {
    let effects = TripleOutcome::all()
        .into_iter()
        .map(|out| (out, bloch_effect(out, 1.0)))
        .collect();
    SpinPovm::new(effects).expect("family is complete and Hermitian")
}

/// Joint-measurement variance floor `2j + 1` reached by spin-coherent-state
/// projection; `j` must be a positive half-integer.
pub fn coherent_state_bound(j: f64) -> Result<f64, SpinError> {
    let doubled = 2.0 * j;
    if j <= 0.0 || (doubled - doubled.round()).abs() > 1e-12 {
        return Err(SpinError::NonHalfIntegerSpin { j });
    }
    Ok(doubled + 1.0)
}

/// Result of the sphere-quadrature check of the spin-coherent measurement.
#[derive(Clone, Copy, Debug)]
pub struct SphereOracle {
    /// Summed variance of the unbiased estimator `3 Omega_a / 2`.
    pub total_variance: f64,
    /// `max | integral of density - 1 |` entrywise.
    pub completeness_residual: f64,
    /// `max_a | E[3 Omega_a / 2] - n_a / 2 |`.
    pub first_moment_max_residual: f64,
    /// Change of the variance across the last grid refinement.
    pub refinement_delta: f64,
}

/// Integrate the continuous POVM density `(1 + Omega.sigma)/(4 pi)` over
/// the unit sphere with a product Gauss-Legendre (cos theta) x uniform
/// (phi) rule, refining until successive levels agree below 1e-6.
///
/// For the unbiased estimator `3 Omega_a / 2` on a pure state the summed
/// variance reproduces the j = 1/2 floor of [`coherent_state_bound`]; the
/// state used here is a fixed generic one, and rotation invariance of the
/// result is covered by tests.
pub fn spin_coherent_variance_oracle() -> Result<SphereOracle, SpinError> {
    let psi = PureQubit::from_angles(1.1, 0.7);
    let target = 1e-6;
    let mut previous: Option<SphereOracle> = None;
    let mut levels = 0usize;
    for level in 0..5 {
        let n_polar = 8usize << level;
        let current = sphere_quadrature(&psi, n_polar, 2 * n_polar);
        levels = level + 1;
        if let Some(prev) = previous {
            let delta = (current.total_variance - prev.total_variance).abs();
            if delta < target {
                return Ok(SphereOracle {
                    refinement_delta: delta,
                    ..current
                });
            }
        }
        previous = Some(current);
    }
    Err(SpinError::QuadratureNotConverged { target, levels })
}

fn sphere_quadrature(psi: &PureQubit, n_polar: usize, n_azimuth: usize) -> SphereOracle {
    let (u_nodes, u_weights) = gauss_legendre(n_polar);
    let phi_weight = std::f64::consts::TAU / n_azimuth as f64;
    let n = psi.bloch_vector().components();
    let inv_4pi = 1.0 / (4.0 * std::f64::consts::PI);

    let mut density_sum = Operator::zeros(&[2]);
    let mut first = [0.0f64; 3];
    let mut second = [0.0f64; 3];
    let p = paulis();
    for (&u, &wu) in u_nodes.iter().zip(&u_weights) {
        let sin_theta = (1.0 - u * u).max(0.0).sqrt();
        for k in 0..n_azimuth {
            let phi = phi_weight * k as f64;
            let omega = [sin_theta * phi.cos(), sin_theta * phi.sin(), u];
            let w = wu * phi_weight;
            let mut density = Operator::identity(&[2]);
            for (pa, &oa) in p.iter().zip(&omega) {
                density = &density + &pa.scaled(c(oa, 0.0));
            }
            let density = density.scaled(c(w * inv_4pi, 0.0));
            density_sum = &density_sum + &density;
            let prob = w * inv_4pi
                * (1.0 + omega[0] * n[0] + omega[1] * n[1] + omega[2] * n[2]);
            for a in 0..3 {
                let estimate = 1.5 * omega[a];
                first[a] += prob * estimate;
                second[a] += prob * estimate * estimate;
            }
        }
    }
    let total_variance: f64 = (0..3).map(|a| second[a] - first[a] * first[a]).sum();
    let first_moment_max_residual = (0..3)
        .map(|a| (first[a] - 0.5 * n[a]).abs())
        .fold(0.0, f64::max);
    SphereOracle {
        total_variance,
        completeness_residual: density_sum.identity_residual(),
        first_moment_max_residual,
        refinement_delta: f64::NAN,
    }
}

/// Completeness and positivity audit of a list of candidate effects.
#[derive(Clone, Copy, Debug)]
pub struct PovmValidation {
    /// `max | sum of effects - 1 |` entrywise.
    pub completeness_residual: f64,
    /// Smallest eigenvalue across all effects.
    pub min_eigenvalue: f64,
}

pub fn validate_povm(effects: &[Operator]) -> Result<PovmValidation, SpinError> {
    let first = effects.first().ok_or_else(|| SpinError::InvalidPovm {
        reason: "no effects given".into(),
    })?;
    let dim = first.dim();
    let mut sum = Operator::zeros(first.factor_dims());
    let mut min_eigenvalue = f64::INFINITY;
    for e in effects {
        if e.dim() != dim {
            return Err(SpinError::EffectDimensionMismatch {
                left: dim,
                right: e.dim(),
            });
        }
        let eig = e.hermitian_eigenvalues()?;
        min_eigenvalue = min_eigenvalue.min(eig[0]);
        sum = &sum + e;
    }
    Ok(PovmValidation {
        completeness_residual: sum.identity_residual(),
        min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ROOT3: f64 = 1.732050807568877293527446341505872367_f64;

    #[test]
    fn dicke_states_match_listed_three_qubit_basis() {
        let basis = dicke_states(3).unwrap();
        assert_eq!(basis.len(), 4);
        let amp = 1.0 / 3.0f64.sqrt();
        let s1 = &basis[1];
        for (idx, expect) in [(1usize, amp), (2, amp), (4, amp), (0, 0.0), (7, 0.0)] {
            assert!((s1.amplitudes()[idx] - c(expect, 0.0)).norm() <= 1e-15);
        }
        assert!((basis[0].amplitudes()[0] - c(1.0, 0.0)).norm() == 0.0);
        assert!((basis[3].amplitudes()[7] - c(1.0, 0.0)).norm() == 0.0);
    }

    #[test]
    fn dicke_states_single_qubit() {
        let basis = dicke_states(1).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(basis[0].amplitudes()[0], c(1.0, 0.0));
        assert_eq!(basis[1].amplitudes()[1], c(1.0, 0.0));
    }

    #[test]
    fn dicke_states_are_orthonormal() {
        for n in [2usize, 3, 5] {
            let basis = dicke_states(n).unwrap();
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((a.inner(b) - c(want, 0.0)).norm() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn dicke_states_reject_out_of_range() {
        assert!(matches!(
            dicke_states(0),
            Err(SpinError::QubitCountOutOfRange { .. })
        ));
        assert!(matches!(
            dicke_states(13),
            Err(SpinError::QubitCountOutOfRange { .. })
        ));
    }

    #[test]
    fn symmetric_projector_three_qubits() {
        let s = symmetric_projector(3).unwrap();
        assert!((s.op().trace() - c(4.0, 0.0)).norm() <= 1e-13);
        assert!(s.op().hermiticity_residual() <= 1e-13);
        let idem = &(s.op() * s.op()) - s.op();
        assert!(idem.max_abs() <= 1e-13);

        // symmetric state is fixed
        let v000 = Vector::basis(&[2, 2, 2], 0);
        assert!(s.op().apply(&v000).sub(&v000).norm() <= 1e-14);

        // antisymmetric component annihilated
        let anti = Vector::basis(&[2, 2, 2], 1).sub(&Vector::basis(&[2, 2, 2], 2));
        assert!(s.op().apply(&anti).norm() <= 1e-14);
    }

    #[test]
    fn clone_single_copy_is_identity_map() {
        let psi = PureQubit::from_angles(0.9, 2.1);
        let rho = clone_1to_m(&psi, 1).unwrap();
        assert!(rho.max_abs_diff(&psi.density()) <= 1e-15);
    }

    #[test]
    fn clone_three_copies_shrinks_bloch_vector_by_five_ninths() {
        let psi = PureQubit::from_angles(0.4, 5.0);
        let reduced = reduced_clone(&psi, 3).unwrap();
        let len = bloch_vector_of(&reduced).length();
        assert!((len - 5.0 / 9.0).abs() <= 1e-12, "length {len}");
    }

    #[test]
    fn clone_family_shrink_factors() {
        let psi = PureQubit::from_angles(1.3, 0.2);
        for m in 2..=5 {
            let reduced = reduced_clone(&psi, m).unwrap();
            let len = bloch_vector_of(&reduced).length();
            assert!(
                (len - shrink_factor(m)).abs() <= 1e-10,
                "m={m}: {len} vs {}",
                shrink_factor(m)
            );
        }
        assert!((shrink_factor(3) - 5.0 / 9.0).abs() == 0.0);
    }

    #[test]
    fn clone_output_is_valid_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..20 {
            let psi = PureQubit::random_with(&mut rng);
            let rho = clone_1to_m(&psi, 3).unwrap();
            assert!((rho.trace() - c(1.0, 0.0)).norm() <= 1e-12);
            assert!(rho.is_hermitian(1e-12));
            let eig = rho.hermitian_eigenvalues().unwrap();
            assert!(eig[0] >= -1e-12, "min eigenvalue {}", eig[0]);
        }
    }

    #[test]
    fn clone_output_is_permutation_invariant() {
        let psi = PureQubit::from_angles(2.0, 1.1);
        let rho = clone_1to_m(&psi, 3).unwrap();
        for perm in [[1usize, 0, 2], [2, 1, 0], [1, 2, 0]] {
            let permuted = rho.permute_factors(&perm).unwrap();
            assert!(rho.max_abs_diff(&permuted) <= 1e-13);
        }
    }

    #[test]
    fn clone_rejects_out_of_range() {
        let psi = PureQubit::from_angles(0.0, 0.0);
        assert!(matches!(
            clone_1to_m(&psi, 0),
            Err(SpinError::CloneCountOutOfRange { .. })
        ));
        assert!(matches!(
            clone_1to_m(&psi, 7),
            Err(SpinError::CloneCountOutOfRange { .. })
        ));
    }

    #[test]
    fn outcome_operators_complete_and_rank_one() {
        let mut sum = Operator::zeros(&[2, 2, 2]);
        for out in TripleOutcome::all() {
            let omega = outcome_operator(out);
            assert!((omega.trace() - c(1.0, 0.0)).norm() <= 1e-14);
            sum = &sum + &omega;
        }
        assert!(sum.identity_residual() <= 1e-14);

        let omega = outcome_operator(TripleOutcome::new(Sign::Plus, Sign::Plus, Sign::Plus));
        let eig = omega.hermitian_eigenvalues().unwrap();
        assert!((eig[7] - 1.0).abs() <= 1e-13);
        for &ev in &eig[..7] {
            assert!(ev.abs() <= 1e-13);
        }
    }

    #[test]
    fn pullback_effects_match_closed_form() {
        let povm = pullback_povm();
        for out in TripleOutcome::all() {
            let expected = bloch_effect(out, 5.0 / 9.0);
            let diff = povm.effect(out).max_abs_diff(&expected);
            assert!(diff <= 1e-12, "outcome {out:?}: {diff:.3e}");
        }
    }

    #[test]
    fn pullback_effect_eigenvalues() {
        let povm = pullback_povm();
        let lo = (1.0 - 5.0 * ROOT3 / 9.0) / 8.0;
        let hi = (1.0 + 5.0 * ROOT3 / 9.0) / 8.0;
        for out in TripleOutcome::all() {
            let eig = povm.effect(out).hermitian_eigenvalues().unwrap();
            assert!((eig[0] - lo).abs() <= 1e-13);
            assert!((eig[1] - hi).abs() <= 1e-13);
        }
    }

    #[test]
    fn pullback_is_invariant_under_axis_reassignment() {
        let reference = pullback_povm();
        for axes in [[1usize, 2, 0], [2, 0, 1], [0, 2, 1], [1, 0, 2], [2, 1, 0]] {
            let permuted = pullback_povm_with_axes(axes);
            // compare as sets of effects
            for effect in permuted.effects().values() {
                let closest = reference
                    .effects()
                    .values()
                    .map(|e| e.max_abs_diff(effect))
                    .fold(f64::INFINITY, f64::min);
                assert!(closest <= 1e-12, "axes {axes:?}: {closest:.3e}");
            }
        }
    }

    #[test]
    fn distribution_for_north_pole_state() {
        let psi = PureQubit::from_angles(0.0, 0.0);
        let povm = pullback_povm();
        for (out, p) in outcome_distribution(&psi, &povm) {
            let expected = 0.125 * (1.0 + (5.0 / 9.0) * out.mz.value());
            assert!((p - expected).abs() <= 1e-14, "{out:?}: {p}");
        }
    }

    #[test]
    fn distribution_for_maximally_mixed_input_is_uniform() {
        let rho = Operator::identity(&[2]).scaled(c(0.5, 0.0));
        let povm = pullback_povm();
        for (out, p) in outcome_distribution_density(&rho, &povm) {
            assert!((p - 0.125).abs() <= 1e-14, "{out:?}: {p}");
        }
    }

    #[test]
    fn outcome_means_show_five_ninths_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let povm = pullback_povm();
        for _ in 0..20 {
            let psi = PureQubit::random_with(&mut rng);
            let n = psi.bloch_vector().components();
            let distribution = outcome_distribution(&psi, &povm);
            for (axis, &na) in n.iter().enumerate() {
                let mean: f64 = distribution
                    .iter()
                    .map(|(out, p)| p * out.components()[axis])
                    .sum();
                assert!((mean - (5.0 / 9.0) * na).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn joint_variance_reproduces_109_over_50() {
        let psi = PureQubit::from_angles(0.0, 0.0);
        let report = joint_variance(&psi, 9.0 / 5.0).unwrap();
        assert!((report.total_variance - 109.0 / 50.0).abs() <= 1e-12);
        assert!(report.unbiased);
        assert!((report.total_variance - 2.18).abs() <= 1e-12);
        assert!(report.bound == 2.0);
    }

    #[test]
    fn joint_variance_is_state_independent_at_unbiased_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(137);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for _ in 0..100 {
            let psi = PureQubit::random_with(&mut rng);
            let report = joint_variance(&psi, 9.0 / 5.0).unwrap();
            lo = lo.min(report.total_variance);
            hi = hi.max(report.total_variance);
            let n = psi.bloch_vector().components();
            for (mean, &na) in report.per_axis_mean.iter().zip(&n) {
                assert!((mean - 0.5 * na).abs() <= 1e-12);
            }
        }
        assert!(hi - lo <= 1e-12, "spread {}", hi - lo);
        assert!((hi - 109.0 / 50.0).abs() <= 1e-12);
    }

    #[test]
    fn joint_variance_rejects_non_positive_lambda() {
        let psi = PureQubit::from_angles(0.3, 0.3);
        assert!(matches!(
            joint_variance(&psi, 0.0),
            Err(SpinError::NonPositiveRescale { .. })
        ));
    }

    #[test]
    fn coherent_bound_values() {
        assert_eq!(coherent_state_bound(0.5).unwrap(), 2.0);
        assert_eq!(coherent_state_bound(1.0).unwrap(), 3.0);
        assert_eq!(coherent_state_bound(1.5).unwrap(), 4.0);
        assert!(matches!(
            coherent_state_bound(0.7),
            Err(SpinError::NonHalfIntegerSpin { .. })
        ));
        assert!(matches!(
            coherent_state_bound(-0.5),
            Err(SpinError::NonHalfIntegerSpin { .. })
        ));
        let cloning = joint_variance(&PureQubit::from_angles(0.0, 0.0), 9.0 / 5.0)
            .unwrap()
            .total_variance;
        assert!(coherent_state_bound(0.5).unwrap() < cloning);
    }

    #[test]
    fn sphere_oracle_reproduces_bound() {
        let oracle = spin_coherent_variance_oracle().unwrap();
        assert!(
            (oracle.total_variance - 2.0).abs() <= 1e-3,
            "variance {}",
            oracle.total_variance
        );
        assert!(oracle.first_moment_max_residual <= 1e-3);
        assert!(oracle.completeness_residual <= 1e-6);
    }

    #[test]
    fn validate_povm_on_pullback_family() {
        let povm = pullback_povm();
        let effects: Vec<Operator> = povm.effects().values().cloned().collect();
        let v = validate_povm(&effects).unwrap();
        assert!(v.completeness_residual <= 1e-12);
        let expected = (1.0 - 5.0 * ROOT3 / 9.0) / 8.0;
        assert!((v.min_eigenvalue - expected).abs() <= 1e-13);
        assert!(v.min_eigenvalue > 0.0);
    }

    #[test]
    fn validate_povm_flags_discrete_family_negativity() {
        let family = discrete_family();
        let effects: Vec<Operator> = family.effects().values().cloned().collect();
        let v = validate_povm(&effects).unwrap();
        assert!(v.completeness_residual <= 1e-12);
        let expected = (1.0 - ROOT3) / 8.0;
        assert!((v.min_eigenvalue - expected).abs() <= 1e-12);
        assert!(v.min_eigenvalue < 0.0);
    }

    #[test]
    fn validate_povm_trivial_family() {
        let half = Operator::identity(&[2]).scaled(c(0.5, 0.0));
        let v = validate_povm(&[half.clone(), half]).unwrap();
        assert!(v.completeness_residual == 0.0);
        assert!((v.min_eigenvalue - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn validate_povm_rejects_dimension_mismatch() {
        let a = Operator::identity(&[2]);
        let b = Operator::identity(&[2, 2]);
        assert!(matches!(
            validate_povm(&[a, b]),
            Err(SpinError::EffectDimensionMismatch { .. })
        ));
    }

    #[test]
    fn discrete_family_variance_at_unit_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(173);
        let family = discrete_family();
        for _ in 0..10 {
            let psi = PureQubit::random_with(&mut rng);
            let report = joint_variance_for_family(&psi, &family, 1.0).unwrap();
            assert!(
                (report.total_variance - 0.5).abs() <= 1e-12,
                "variance {}",
                report.total_variance
            );
            assert!(report.unbiased);
        }
    }

    #[test]
    fn pure_qubit_normalization_enforced() {
        assert!(PureQubit::new(c(1.0, 0.0), c(0.1, 0.0)).is_err());
        let psi = PureQubit::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let n = psi.bloch_vector();
        assert!((n.length() - 1.0).abs() <= 1e-12);
        assert!((n.nz - (0.36 - 0.64)).abs() <= 1e-15);
    }
}
