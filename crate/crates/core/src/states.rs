//! True states: Bell states, random ensembles and state diagnostics.

use std::fmt;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, kron, Hermitian, Ket, Matrix, Matrix2, Matrix4, C64, ONE, ZERO};
use crate::pom::{sigma_x, sigma_y, sigma_z};
use crate::rng::{derive_seed, rng_from_seed, Rng};

pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

/// Draws per Monte Carlo estimate in [`calibrate_biased_mean`].
pub const CALIBRATION_DRAWS: usize = 10_000;

/// A positive unit-trace 4×4 operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Hermitian<4>);

impl DensityMatrix {
    pub fn new(h: Hermitian<4>) -> Result<Self> {
        let trace = h.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace}")));
        }
        let min = h.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix(h))
    }

    pub fn from_matrix(m: Matrix4) -> Result<Self> {
        Self::new(Hermitian::new(m)?)
    }

    /// Normalizes a positive semidefinite operator to unit trace, no checks.
    pub(crate) fn from_positive(m: Matrix4) -> Self {
        let h = Hermitian::symmetrized(m);
        let t = h.trace();
        DensityMatrix(h.scale(1.0 / t))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Hermitian::identity().scale(0.25))
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`
    pub fn pure(ket: &Ket<4>) -> Self {
        Self::from_positive(Matrix::outer(ket, ket))
    }

    pub fn matrix(&self) -> &Matrix4 {
        self.0.matrix()
    }

    pub fn hermitian(&self) -> &Hermitian<4> {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, u: &Matrix4) -> Self {
        DensityMatrix(self.0.conjugate_by(u))
    }

    /// Row-major real and imaginary parts, `[re00, im00, re01, im01, …]`.
    pub fn to_record(&self) -> [f64; 32] {
        let m = self.matrix();
        std::array::from_fn(|k| {
            let z = m.0[k / 8][(k / 2) % 4];
            if k % 2 == 0 {
                z.re
            } else {
                z.im
            }
        })
    }

    pub fn from_record(record: &[f64; 32]) -> Result<Self> {
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let k = 8 * i + 2 * j;
                m.0[i][j] = c(record[k], record[k + 1]);
            }
        }
        Self::from_matrix(m)
    }
}

/// `tr(ρ²)`
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.0.trace_with(&rho.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellState {
    PsiMinus,
    PhiMinus,
    PhiPlus,
    PsiPlus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [BellState::PsiMinus, BellState::PhiMinus, BellState::PhiPlus, BellState::PsiPlus];

    pub fn label(&self) -> &'static str {
        match self {
            BellState::PsiMinus => "rho_0",
            BellState::PhiMinus => "rho_x",
            BellState::PhiPlus => "rho_y",
            BellState::PsiPlus => "rho_z",
        }
    }

    /// Signs of the `σ_x⊗σ_x`, `σ_y⊗σ_y`, `σ_z⊗σ_z` terms.
    fn correlation_signs(&self) -> [f64; 3] {
        match self {
            BellState::PsiMinus => [-1.0, -1.0, -1.0],
            BellState::PhiMinus => [-1.0, 1.0, 1.0],
            BellState::PhiPlus => [1.0, -1.0, 1.0],
            BellState::PsiPlus => [1.0, 1.0, -1.0],
        }
    }

    pub fn ket(&self) -> Ket<4> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BellState::PsiMinus => [ZERO, c(h, 0.0), c(-h, 0.0), ZERO],
            BellState::PsiPlus => [ZERO, c(h, 0.0), c(h, 0.0), ZERO],
            BellState::PhiMinus => [c(h, 0.0), ZERO, ZERO, c(-h, 0.0)],
            BellState::PhiPlus => [c(h, 0.0), ZERO, ZERO, c(h, 0.0)],
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Bell state from its Pauli expansion `(1 ± σ_x⊗σ_x ± σ_y⊗σ_y ± σ_z⊗σ_z)/4`.
pub fn bell_state(which: BellState) -> DensityMatrix {
    let [sx, sy, sz] = which.correlation_signs();
    let m = Matrix4::identity()
        + kron(&sigma_x(), &sigma_x()).scale(sx)
        + kron(&sigma_y(), &sigma_y()).scale(sy)
        + kron(&sigma_z(), &sigma_z()).scale(sz);
    DensityMatrix(Hermitian::symmetrized(m.scale(0.25)))
}

/// `|⟨ψ|σ_y⊗σ_y|ψ*⟩|` for a normalized two-qubit ket.
pub fn concurrence_pure(psi: &Ket<4>) -> Result<f64> {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized(norm));
    }
    let yy = kron(&sigma_y(), &sigma_y());
    let flipped = psi.map(|z| z.conj());
    Ok(yy.sandwich(psi, &flipped).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    UnbiasedMixed,
    BiasedMixed,
    Pure,
    MaxEntangled,
    Bell,
    Fixed,
}

impl EnsembleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnsembleKind::UnbiasedMixed => "unbiased_mixed",
            EnsembleKind::BiasedMixed => "biased_mixed",
            EnsembleKind::Pure => "pure",
            EnsembleKind::MaxEntangled => "max_entangled",
            EnsembleKind::Bell => "bell",
            EnsembleKind::Fixed => "fixed",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "unbiased_mixed" => EnsembleKind::UnbiasedMixed,
            "biased_mixed" => EnsembleKind::BiasedMixed,
            "pure" => EnsembleKind::Pure,
            "max_entangled" => EnsembleKind::MaxEntangled,
            "bell" => EnsembleKind::Bell,
            "fixed" => EnsembleKind::Fixed,
            other => return Err(Error::Config(format!("unknown ensemble `{other}`"))),
        })
    }
}

/// Mean of the Gaussian matrix `Y`, 4 rows by `rank` columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanMatrix(pub Vec<Vec<C64>>);

impl MeanMatrix {
    pub fn zeros(rank: usize) -> Self {
        MeanMatrix(vec![vec![ZERO; rank]; 4])
    }

    /// `s·u v†` with `u = e₀` in the ket space and `v = e₀` in the rank space.
    pub fn dominant(scale: f64, rank: usize) -> Self {
        let mut m = Self::zeros(rank);
        m.0[0][0] = c(scale, 0.0);
        m
    }

    pub fn rank(&self) -> usize {
        self.0.first().map_or(0, Vec::len)
    }

    fn is_well_formed(&self, rank: usize) -> bool {
        self.0.len() == 4 && self.0.iter().all(|row| row.len() == rank)
    }

    fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|z| *z == ZERO)
    }
}

/// A family of true states with its sampling seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_matrix: Option<MeanMatrix>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell: Option<BellState>,
    /// Row-major real/imaginary record, for `kind = fixed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<f64>>,
}

fn default_rank() -> usize {
    4
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, seed: u64) -> Self {
        let rank = match kind {
            EnsembleKind::Pure => 1,
            _ => 4,
        };
        EnsembleSpec { kind, rank, mean_matrix: None, seed, bell: None, state: None }
    }

    pub fn unbiased_mixed(seed: u64) -> Self {
        Self::new(EnsembleKind::UnbiasedMixed, seed)
    }

    pub fn biased_mixed(mean: MeanMatrix, seed: u64) -> Self {
        let mut spec = Self::new(EnsembleKind::BiasedMixed, seed);
        spec.rank = mean.rank();
        spec.mean_matrix = Some(mean);
        spec
    }

    pub fn pure(seed: u64) -> Self {
        Self::new(EnsembleKind::Pure, seed)
    }

    pub fn max_entangled(seed: u64) -> Self {
        Self::new(EnsembleKind::MaxEntangled, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.rank) {
            return Err(Error::InvalidEnsemble(format!("rank {} outside 1..=4", self.rank)));
        }
        match self.kind {
            EnsembleKind::UnbiasedMixed => {
                if self.rank != 4 {
                    return Err(Error::InvalidEnsemble("unbiased mixed states need rank 4".into()));
                }
                if self.mean_matrix.as_ref().is_some_and(|m| !m.is_zero()) {
                    return Err(Error::InvalidEnsemble("unbiased mixed states need M = 0".into()));
                }
            }
            EnsembleKind::BiasedMixed => match &self.mean_matrix {
                Some(m) if m.is_well_formed(self.rank) => {}
                Some(_) => return Err(Error::InvalidEnsemble(format!("mean matrix must be 4×{}", self.rank))),
                None => return Err(Error::InvalidEnsemble("biased ensemble needs a mean matrix".into())),
            },
            EnsembleKind::Pure => {
                if self.rank != 1 {
                    return Err(Error::InvalidEnsemble("pure states have rank 1".into()));
                }
            }
            EnsembleKind::MaxEntangled => {}
            EnsembleKind::Bell => {
                if self.bell.is_none() {
                    return Err(Error::InvalidEnsemble("bell ensemble needs `bell`".into()));
                }
            }
            EnsembleKind::Fixed => match &self.state {
                Some(s) if s.len() == 32 => {}
                _ => return Err(Error::InvalidEnsemble("fixed ensemble needs a 32-number `state`".into())),
            },
        }
        Ok(())
    }

    /// The `index`-th state of the seeded sequence.
    pub fn sample(&self, index: u64) -> Result<DensityMatrix> {
        let mut rng = rng_from_seed(derive_seed(self.seed, &[index]));
        random_state(self, &mut rng)
    }
}

fn complex_gaussian(rng: &mut Rng) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `YY†/tr(YY†)` for a 4×rank matrix `Y` of unit-variance complex Gaussians
/// centered at `mean`.
fn ginibre_state(rank: usize, mean: Option<&MeanMatrix>, rng: &mut Rng) -> DensityMatrix {
    let mut y = [[ZERO; 4]; 4];
    for (i, row) in y.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().take(rank).enumerate() {
            let offset = mean.map_or(ZERO, |m| m.0[i][k]);
            *entry = offset + complex_gaussian(rng);
        }
    }
    let y = Matrix4::from_rows(y);
    DensityMatrix::from_positive(y * y.adjoint())
}

/// Haar-distributed 2×2 unitary by Gram–Schmidt on a complex Ginibre matrix.
/// Gram–Schmidt leaves a positive real triangular factor, which fixes the
/// column phases.
pub fn haar_unitary_2(rng: &mut Rng) -> Matrix2 {
    let a = [complex_gaussian(rng), complex_gaussian(rng)];
    let b = [complex_gaussian(rng), complex_gaussian(rng)];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let q0 = [a[0] / na, a[1] / na];
    let proj = q0[0].conj() * b[0] + q0[1].conj() * b[1];
    let r = [b[0] - q0[0] * proj, b[1] - q0[1] * proj];
    let nr = (r[0].norm_sqr() + r[1].norm_sqr()).sqrt();
    let q1 = [r[0] / nr, r[1] / nr];
    Matrix2::from_rows([[q0[0], q1[0]], [q0[1], q1[1]]])
}

/// Draws one state from the ensemble described by `spec`.
pub fn random_state(spec: &EnsembleSpec, rng: &mut Rng) -> Result<DensityMatrix> {
    spec.validate()?;
    Ok(match spec.kind {
        EnsembleKind::UnbiasedMixed | EnsembleKind::Pure => ginibre_state(spec.rank, None, rng),
        EnsembleKind::BiasedMixed => ginibre_state(spec.rank, spec.mean_matrix.as_ref(), rng),
        EnsembleKind::MaxEntangled => {
            let u = haar_unitary_2(rng);
            let v = haar_unitary_2(rng);
            let phi_plus = BellState::PhiPlus.ket();
            DensityMatrix::pure(&kron(&u, &v).apply(&phi_plus))
        }
        EnsembleKind::Bell => bell_state(spec.bell.expect("validated")),
        EnsembleKind::Fixed => {
            let s = spec.state.as_ref().expect("validated");
            let record: [f64; 32] = s.as_slice().try_into().expect("validated");
            DensityMatrix::from_record(&record)?
        }
    })
}

/// Reduced state of the first (`qubit = 0`) or second qubit.
pub fn partial_trace(rho: &DensityMatrix, qubit: usize) -> Matrix2 {
    let m = rho.matrix();
    let mut r = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            r.0[a][b] =
                (0..2).map(|k| if qubit == 0 { m.0[2 * a + k][2 * b + k] } else { m.0[2 * k + a][2 * k + b] }).sum();
        }
    }
    r
}

/// Purity of `YY†/tr(YY†)` for `Y = W + s·E₀₀`, computed from the Gram matrix.
fn biased_purity(noise: &Matrix4, scale: f64) -> f64 {
    let mut y = *noise;
    y.0[0][0] += ONE * scale;
    let g = Hermitian::symmetrized(y * y.adjoint());
    let t = g.trace();
    g.trace_with(&g) / (t * t)
}

fn fraction_above(noise: &[Matrix4], scale: f64, target: f64) -> f64 {
    let hits = noise.iter().filter(|w| biased_purity(w, scale) > target).count();
    hits as f64 / noise.len() as f64
}

/// Finds the scale `s` of the rank-1 mean `M = s·e₀e₀†` such that the
/// Monte Carlo estimate of `P(tr ρ² > target_purity)` reaches `confidence`.
///
/// The estimate uses common random numbers across the bisection. The
/// acceptance level is raised by three binomial standard errors so the
/// returned mean also meets `confidence` on fresh draws.
pub fn calibrate_biased_mean(target_purity: f64, confidence: f64, rng: &mut Rng) -> Result<MeanMatrix> {
    if !(0.25 < target_purity && target_purity < 1.0) {
        return Err(Error::Calibration(format!("target purity {target_purity} outside (1/4, 1)")));
    }
    if !(0.0 < confidence && confidence < 1.0) {
        return Err(Error::Calibration(format!("confidence {confidence} outside (0, 1)")));
    }
    let noise: Vec<Matrix4> = (0..CALIBRATION_DRAWS)
        .map(|_| Matrix4::from_rows(std::array::from_fn(|_| std::array::from_fn(|_| complex_gaussian(rng)))))
        .collect();
    let level = (confidence + 3.0 * (confidence * (1.0 - confidence) / CALIBRATION_DRAWS as f64).sqrt()).min(1.0);

    if fraction_above(&noise, 0.0, target_purity) >= level {
        return Ok(MeanMatrix::dominant(0.0, 4));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut bracketed = false;
    for _ in 0..30 {
        if fraction_above(&noise, hi, target_purity) >= level {
            bracketed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !bracketed {
        return Err(Error::Calibration(format!("no scale up to {hi} reaches P(purity > {target_purity}) ≥ {level}")));
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if fraction_above(&noise, mid, target_purity) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MeanMatrix::dominant(hi, 4))
}
