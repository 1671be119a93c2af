//! Truncated Fock-space toolkit: mode operators, squeeze / displacement /
//! beamsplitter unitaries, quadratures, and quadrature eigenvectors.
//!
//! All gates are built by exponentiating the *truncated* generator, never
//! from analytic matrix elements, so every construction shares one code
//! path. Truncation corrupts the top of the ladder; the crate-wide
//! convention is to drop the top [`INTERIOR_DROP`] levels per mode in any
//! operator comparison (the "interior block"). Parameter caps reject
//! inputs whose state support would reach the truncation edge instead of
//! silently returning corrupted results.
//!
//! Quadratures are normalized as `X_theta = (c e^{-i theta} + c^dag
//! e^{i theta})/2` (vacuum variance 1/4). With that convention `S(r)` for
//! `r > 0` stretches the theta = 0 quadrature: the variance of `X_0` in
//! `S(r)|0>` follows `e^{+2r}/4`, which a test pins numerically.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::quad::{gauss_legendre_on, trapezoid_on};
use crate::tensor::{expm, Operator, Vector};

/// Levels dropped from the top of each mode in interior-block comparisons.
pub const INTERIOR_DROP: usize = 10;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("invalid Fock configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("squeeze parameter |r| = {r} exceeds cap {cap}")]
    SqueezeOutOfRange { r: f64, cap: f64 },
    #[error("displacement |alpha| = {alpha} exceeds cap {cap} at this truncation")]
    DisplacementOutOfRange { alpha: f64, cap: f64 },
    #[error("quadrature value {x} outside grid halfwidth {halfwidth}")]
    OutsideGrid { x: f64, halfwidth: f64 },
}

/// 1-D integration rule used on the quadrature grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationRule {
    Trapezoid,
    GaussLegendre,
}

/// Truncation level and quadrature grid for the bosonic pipeline.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FockConfig {
    /// Highest retained Fock state; the mode space is `0..=n_max`.
    pub n_max: usize,
    /// Grid half-width `L`; quadrature values live in `[-L, L]`.
    pub grid_halfwidth: f64,
    /// Number of grid points (odd, >= 51).
    pub grid_points: usize,
    pub integration_rule: IntegrationRule,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            n_max: 60,
            grid_halfwidth: 6.0,
            grid_points: 601,
            integration_rule: IntegrationRule::Trapezoid,
        }
    }
}

impl FockConfig {
    pub fn validate(&self) -> Result<(), FockError> {
        if self.n_max < 8 {
            return Err(FockError::InvalidConfig {
                reason: format!("n_max = {} must be at least 8", self.n_max),
            });
        }
        if self.grid_points < 51 || self.grid_points.is_multiple_of(2) {
            return Err(FockError::InvalidConfig {
                reason: format!("grid_points = {} must be odd and >= 51", self.grid_points),
            });
        }
        if self.grid_halfwidth.is_nan() || self.grid_halfwidth <= 0.0 {
            return Err(FockError::InvalidConfig {
                reason: format!("grid_halfwidth = {} must be positive", self.grid_halfwidth),
            });
        }
        Ok(())
    }

    /// Single-mode dimension `n_max + 1`.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Side of the interior block (top [`INTERIOR_DROP`] levels removed).
    pub fn interior_dim(&self) -> usize {
        self.dim().saturating_sub(INTERIOR_DROP).max(1)
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        Self { n_max, ..self }
    }

    pub fn with_grid_points(self, grid_points: usize) -> Self {
        Self {
            grid_points,
            ..self
        }
    }

    pub fn with_halfwidth(self, grid_halfwidth: f64) -> Self {
        Self {
            grid_halfwidth,
            ..self
        }
    }

    /// Displacement cap `0.25 sqrt(n_max)`.
    pub fn displacement_cap(&self) -> f64 {
        0.25 * (self.n_max as f64).sqrt()
    }
}

/// Single-mode operator tied to a truncation level.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    op: Operator,
}

impl ModeOperator {
    fn new(op: Operator) -> Self {
        Self { op }
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        self.op.matrix()
    }
}

/// Phase of a rotated quadrature, reduced to `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    theta: f64,
}

impl QuadratureSpec {
    pub fn new(theta: f64) -> Self {
        Self {
            theta: theta.rem_euclid(std::f64::consts::TAU),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Lowering operator: `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(cfg: &FockConfig) -> ModeOperator {
    let d = cfg.dim();
    let mut mat = Array2::from_elem((d, d), c(0.0, 0.0));
    for n in 1..d {
        mat[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    ModeOperator::new(Operator::from_matrix(vec![d], mat).expect("square"))
}

/// Raising operator `a^dag`.
pub fn creation(cfg: &FockConfig) -> ModeOperator {
    ModeOperator::new(annihilation(cfg).op().dagger())
}

/// Photon-number operator `a^dag a = diag(0, 1, ..., n_max)`.
pub fn number_operator(cfg: &FockConfig) -> ModeOperator {
    let d = cfg.dim();
    let mut mat = Array2::from_elem((d, d), c(0.0, 0.0));
    for n in 0..d {
        mat[(n, n)] = c(n as f64, 0.0);
    }
    ModeOperator::new(Operator::from_matrix(vec![d], mat).expect("square"))
}

/// Squeeze unitary `S(r) = exp[r (a^dag^2 - a^2)/2]`, truncated generator.
pub fn squeeze(r: f64, cfg: &FockConfig) -> Result<ModeOperator, FockError> {
    const CAP: f64 = 2.0;
    if r.abs() > CAP {
        return Err(FockError::SqueezeOutOfRange { r, cap: CAP });
    }
    let a = annihilation(cfg);
    let adag = a.op().dagger();
    let gen = &(&adag * &adag) - &(a.op() * a.op());
    Ok(ModeOperator::new(
        gen.scaled(c(0.5 * r, 0.0)).matrix_exponential(),
    ))
}

/// Displacement unitary `D(alpha) = exp(alpha a^dag - alpha* a)`,
/// truncated generator. `|alpha|` is capped at `0.25 sqrt(n_max)` so the
/// displaced support stays clear of the truncation edge.
pub fn displacement(alpha: Complex64, cfg: &FockConfig) -> Result<ModeOperator, FockError> {
    let cap = cfg.displacement_cap();
    if alpha.norm() > cap {
        return Err(FockError::DisplacementOutOfRange {
            alpha: alpha.norm(),
            cap,
        });
    }
    let a = annihilation(cfg);
    let adag = a.op().dagger();
    let gen = &adag.scaled(alpha) - &a.op().scaled(alpha.conj());
    Ok(ModeOperator::new(gen.matrix_exponential()))
}

/// Phase rotation `exp(i theta a^dag a)` (diagonal).
pub fn phase_rotation(theta: f64, cfg: &FockConfig) -> ModeOperator {
    let d = cfg.dim();
    let mut mat = Array2::from_elem((d, d), c(0.0, 0.0));
    for n in 0..d {
        mat[(n, n)] = Complex64::from_polar(1.0, theta * n as f64);
    }
    ModeOperator::new(Operator::from_matrix(vec![d], mat).expect("square"))
}

/// Rotated quadrature `X_theta = (c e^{-i theta} + c^dag e^{i theta})/2`.
/// `theta = 0` gives `X = (c + c^dag)/2`, `theta = pi/2` gives
/// `Y = (c - c^dag)/2i`.
pub fn quadrature(spec: QuadratureSpec, cfg: &FockConfig) -> ModeOperator {
    let a = annihilation(cfg);
    let phase = Complex64::from_polar(0.5, -spec.theta());
    let lower = a.op().scaled(phase);
    ModeOperator::new(&lower + &lower.dagger())
}

/// Per-sector blocks of the 50:50 beamsplitter
/// `V = exp[(pi/4)(c^dag a - c a^dag)]`.
///
/// The generator conserves total photon number, so it stays block diagonal
/// over sectors `N = n_c + n_a` after truncation; exponentiating each
/// block is exactly the exponential of the truncated generator. A sector
/// stores its lowest c-mode occupation `m_lo` and the dense block over
/// `m = m_lo ..= m_hi`, `n = N - m`.
struct BeamsplitterSectors {
    sectors: Vec<(usize, Array2<Complex64>)>,
}

fn beamsplitter_sectors(cfg: &FockConfig, max_total: usize) -> BeamsplitterSectors {
    let n_max = cfg.n_max;
    let mut sectors = Vec::with_capacity(max_total + 1);
    for total in 0..=max_total {
        let m_lo = total.saturating_sub(n_max);
        let m_hi = total.min(n_max);
        let size = m_hi - m_lo + 1;
        let mut gen = Array2::from_elem((size, size), c(0.0, 0.0));
        for i in 0..size.saturating_sub(1) {
            let m = m_lo + i;
            // <m+1, n-1| c^dag a |m, n> with n = total - m
            let coupling = (((m + 1) * (total - m)) as f64).sqrt();
            gen[(i + 1, i)] = c(std::f64::consts::FRAC_PI_4 * coupling, 0.0);
            gen[(i, i + 1)] = c(-std::f64::consts::FRAC_PI_4 * coupling, 0.0);
        }
        sectors.push((m_lo, expm(&gen)));
    }
    BeamsplitterSectors { sectors }
}

/// Dense two-mode 50:50 beamsplitter `V = exp[(pi/4)(c^dag a - c a^dag)]`
/// with mode `c` as the left (slowest) factor; `V|0,0> = |0,0>`.
pub fn beamsplitter(cfg: &FockConfig) -> Operator {
    let d = cfg.dim();
    let blocks = beamsplitter_sectors(cfg, 2 * cfg.n_max);
    let mut mat = Array2::from_elem((d * d, d * d), c(0.0, 0.0));
    for (total, (m_lo, block)) in blocks.sectors.iter().enumerate() {
        let size = block.nrows();
        for i in 0..size {
            let row = (m_lo + i) * d + (total - m_lo - i);
            for j in 0..size {
                let col = (m_lo + j) * d + (total - m_lo - j);
                mat[(row, col)] = block[(i, j)];
            }
        }
    }
    Operator::from_matrix(vec![d, d], mat).expect("square")
}

/// Columns `V |0, k>` for `k = 0..=n_max`, as a `(d*d) x d` matrix.
/// `|0, k>` sits in the full sector `N = k`, so these columns carry no
/// truncation error at all.
pub(crate) fn beamsplitter_vacuum_columns(cfg: &FockConfig) -> Array2<Complex64> {
    let d = cfg.dim();
    let blocks = beamsplitter_sectors(cfg, cfg.n_max);
    let mut cols = Array2::from_elem((d * d, d), c(0.0, 0.0));
    for (k, (m_lo, block)) in blocks.sectors.iter().enumerate() {
        debug_assert_eq!(*m_lo, 0);
        for i in 0..block.nrows() {
            let row = i * d + (k - i);
            cols[(row, k)] = block[(i, 0)];
        }
    }
    cols
}

/// Integration nodes and weights on `[-L, L]` for the configured rule.
pub fn integration_grid(cfg: &FockConfig) -> (Vec<f64>, Vec<f64>) {
    let l = cfg.grid_halfwidth;
    match cfg.integration_rule {
        IntegrationRule::Trapezoid => trapezoid_on(cfg.grid_points, -l, l),
        IntegrationRule::GaussLegendre => gauss_legendre_on(cfg.grid_points, -l, l),
    }
}

/// Harmonic-oscillator eigenfunctions `psi_n(x)` for `n = 0..=n_max` in the
/// vacuum-variance-1/4 scaling, by the pre-weighted three-term recurrence
/// `psi_{n+1} = (2x psi_n - sqrt(n) psi_{n-1}) / sqrt(n+1)`.
///
/// The raw Hermite polynomials overflow doubles near `n = 30`; folding the
/// Gaussian weight and normalization into the recurrence keeps every value
/// of order one.
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n_max + 1);
    let psi0 = (2.0 / std::f64::consts::PI).powf(0.25) * (-x * x).exp();
    psi.push(psi0);
    if n_max == 0 {
        return psi;
    }
    psi.push(2.0 * x * psi0);
    for n in 1..n_max {
        let next = (2.0 * x * psi[n] - (n as f64).sqrt() * psi[n - 1]) / ((n + 1) as f64).sqrt();
        psi.push(next);
    }
    psi
}

/// Delta-normalized eigenvector of `X_theta` with eigenvalue `x`:
/// components `<n|x>_theta = e^{i n theta} psi_n(x)`.
pub fn quadrature_vector(
    x: f64,
    spec: QuadratureSpec,
    cfg: &FockConfig,
) -> Result<Vector, FockError> {
    if x.abs() > cfg.grid_halfwidth {
        return Err(FockError::OutsideGrid {
            x,
            halfwidth: cfg.grid_halfwidth,
        });
    }
    let psi = hermite_functions(x, cfg.n_max);
    let amps: Vec<Complex64> = psi
        .iter()
        .enumerate()
        .map(|(n, &p)| Complex64::from_polar(p, spec.theta() * n as f64))
        .collect();
    Ok(Vector::from_vec(vec![cfg.dim()], amps).expect("length matches"))
}

/// `max |A - B|` over the interior block (per-factor limit).
pub fn interior_residual(a: &Operator, b: &Operator, cfg: &FockConfig) -> f64 {
    let limit = cfg.interior_dim();
    let limits: Vec<usize> = a.factor_dims().iter().map(|_| limit).collect();
    a.restrict(&limits)
        .expect("interior limits valid")
        .max_abs_diff(&b.restrict(&limits).expect("interior limits valid"))
}

/// `max |U^dag U - 1|` over the interior block.
pub fn interior_unitarity_residual(u: &Operator, cfg: &FockConfig) -> f64 {
    let limit = cfg.interior_dim();
    let limits: Vec<usize> = u.factor_dims().iter().map(|_| limit).collect();
    (&u.dagger() * u)
        .restrict(&limits)
        .expect("interior limits valid")
        .identity_residual()
}
