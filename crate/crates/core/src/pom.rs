//! Two-qubit probability-operator measurements.
//!
//! Two 16-outcome measurements are provided:
//!
//! * the product measurement `T_m ⊗ T_n`, each qubit measured with its own
//!   tetrahedron measurement;
//! * the symmetric informationally complete measurement generated from
//!   Appleby's fiducial ket by the two-qubit Heisenberg–Weyl group.
//!
//! Both carry their dual reconstruction operators `P_j` with
//! `tr(P_j Π_k) = δ_jk`, so that `ρ = Σ_j p_j P_j`.
//! Outcomes are ordered by `(m, n)` lexicographically in both cases.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, kron, Hermitian, Ket, Matrix, Matrix2, Matrix4, C64, I, ONE, ZERO};
use crate::states::DensityMatrix;

pub const OUTCOMES: usize = 16;
const DIM: usize = 4;

/// Threshold on the smallest singular value of the outcome Gram matrix.
pub const IC_THRESHOLD: f64 = 1e-8;
/// Residual tolerance of the structural checks in [`verify_pom`].
pub const VERIFY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PomKind {
    Product,
    Sic,
}

impl PomKind {
    pub const ALL: [PomKind; 2] = [PomKind::Product, PomKind::Sic];

    pub fn as_str(&self) -> &'static str {
        match self {
            PomKind::Product => "product",
            PomKind::Sic => "sic",
        }
    }
}

impl fmt::Display for PomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PomKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" | "prod" => Ok(PomKind::Product),
            "sic" => Ok(PomKind::Sic),
            other => Err(Error::Config(format!("unknown POM kind `{other}`"))),
        }
    }
}

/// Rank-1 SIC parameters, `tr(Π_jΠ_k) = a δ_jk + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SicParameters {
    pub d: usize,
    pub a: f64,
    pub b: f64,
}

impl SicParameters {
    pub fn rank_one(d: usize) -> Self {
        let d_f = d as f64;
        let a = 1.0 / (d_f + d_f * d_f);
        SicParameters { d, a, b: a / d_f }
    }

    pub fn gram(&self, j: usize, k: usize) -> f64 {
        if j == k {
            self.a + self.b
        } else {
            self.b
        }
    }
}

/// A 16-outcome two-qubit measurement together with its dual frame.
#[derive(Clone, Debug)]
pub struct Pom {
    kind: PomKind,
    outcomes: [Hermitian<4>; OUTCOMES],
    duals: [Hermitian<4>; OUTCOMES],
    labels: [(usize, usize); OUTCOMES],
}

fn lexicographic_labels() -> [(usize, usize); OUTCOMES] {
    std::array::from_fn(|j| (j / 4, j % 4))
}

impl Pom {
    /// Assembles a measurement from raw parts without checking it; use
    /// [`verify_pom`] to inspect the result.
    pub fn from_parts(kind: PomKind, outcomes: [Hermitian<4>; OUTCOMES], duals: [Hermitian<4>; OUTCOMES]) -> Self {
        Pom { kind, outcomes, duals, labels: lexicographic_labels() }
    }

    pub fn kind(&self) -> PomKind {
        self.kind
    }

    pub fn outcomes(&self) -> &[Hermitian<4>; OUTCOMES] {
        &self.outcomes
    }

    pub fn duals(&self) -> &[Hermitian<4>; OUTCOMES] {
        &self.duals
    }

    pub fn labels(&self) -> &[(usize, usize); OUTCOMES] {
        &self.labels
    }

    /// `tr(A Π_j)` for an arbitrary Hermitian operator.
    pub fn expectations(&self, a: &Matrix4) -> [f64; OUTCOMES] {
        std::array::from_fn(|j| crate::linalg::trace_of_product(a, self.outcomes[j].matrix()).re)
    }

    /// `Σ_j w_j P_j`
    pub fn reconstruct(&self, weights: &[f64; OUTCOMES]) -> Matrix4 {
        let mut m = Matrix4::zeros();
        for (w, p) in weights.iter().zip(self.duals.iter()) {
            m += p.matrix().scale(*w);
        }
        m
    }

    pub fn build(kind: PomKind) -> Self {
        match kind {
            PomKind::Product => product_pom(),
            PomKind::Sic => sic_pom(),
        }
    }

    pub fn export(&self) -> PomExport {
        PomExport {
            kind: self.kind,
            labels: self.labels.iter().map(|&(m, n)| [m, n]).collect(),
            outcomes: self.outcomes.iter().map(|h| OperatorExport::from(h.matrix())).collect(),
            duals: self.duals.iter().map(|h| OperatorExport::from(h.matrix())).collect(),
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &self.export())?;
        Ok(())
    }
}

/// Serialized form of a measurement: real and imaginary entry arrays per operator.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PomExport {
    pub kind: PomKind,
    pub labels: Vec<[usize; 2]>,
    pub outcomes: Vec<OperatorExport>,
    pub duals: Vec<OperatorExport>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorExport {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl<const D: usize> From<&Matrix<D>> for OperatorExport {
    fn from(m: &Matrix<D>) -> Self {
        OperatorExport {
            re: m.0.iter().map(|row| row.iter().map(|z| z.re).collect()).collect(),
            im: m.0.iter().map(|row| row.iter().map(|z| z.im).collect()).collect(),
        }
    }
}

impl OperatorExport {
    pub fn to_matrix4(&self) -> Result<Matrix4> {
        if self.re.len() != DIM || self.im.len() != DIM {
            return Err(Error::Config("operator must be 4×4".into()));
        }
        let mut m = Matrix4::zeros();
        for i in 0..DIM {
            if self.re[i].len() != DIM || self.im[i].len() != DIM {
                return Err(Error::Config("operator must be 4×4".into()));
            }
            for j in 0..DIM {
                m.0[i][j] = c(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }
}

pub fn sigma_x() -> Matrix2 {
    Matrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
}

pub fn sigma_y() -> Matrix2 {
    Matrix::from_rows([[ZERO, -I], [I, ZERO]])
}

pub fn sigma_z() -> Matrix2 {
    Matrix::from_rows([[ONE, ZERO], [ZERO, -ONE]])
}

/// Bloch vectors of the tetrahedron outcomes (length 1).
pub fn tetrahedron_vectors() -> [[f64; 3]; 4] {
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, -s, s], [-s, s, -s]]
}

/// The four qubit outcomes `T_j = (1 + t_j·σ)/4`.
pub fn tetrahedron() -> [Hermitian<2>; 4] {
    let (sx, sy, sz) = (sigma_x(), sigma_y(), sigma_z());
    tetrahedron_vectors().map(|t| {
        let m = Matrix2::identity() + sx.scale(t[0]) + sy.scale(t[1]) + sz.scale(t[2]);
        Hermitian::symmetrized(m.scale(0.25))
    })
}

/// `T_m ⊗ T_n` with duals `(6T_m − 1) ⊗ (6T_n − 1)`.
pub fn product_pom() -> Pom {
    let t = tetrahedron();
    let dual1: [Matrix2; 4] = t.map(|tj| tj.matrix().scale(6.0).sub_identity(1.0));
    let labels = lexicographic_labels();
    let outcomes = labels.map(|(m, n)| Hermitian::symmetrized(kron(t[m].matrix(), t[n].matrix())));
    let duals = labels.map(|(m, n)| Hermitian::symmetrized(kron(&dual1[m], &dual1[n])));
    Pom { kind: PomKind::Product, outcomes, duals, labels }
}

/// Two-qubit Heisenberg–Weyl generators in the basis `|00⟩,|01⟩,|10⟩,|11⟩`.
#[derive(Clone, Copy, Debug)]
pub struct HwGroup {
    pub d: usize,
    pub x: Matrix4,
    pub z: Matrix4,
}

impl HwGroup {
    /// `X^m Z^n`
    pub fn displacement(&self, m: usize, n: usize) -> Matrix4 {
        self.x.pow(m % self.d) * self.z.pow(n % self.d)
    }

    /// `F → X^m Z^n F Z^{-n} X^{-m}`
    pub fn act(&self, m: usize, n: usize, f: &Matrix4) -> Matrix4 {
        let u = self.displacement(m, n);
        u * *f * u.adjoint()
    }

    /// `F → Z^n X^m F X^{-m} Z^{-n}`
    pub fn act_reversed(&self, m: usize, n: usize, f: &Matrix4) -> Matrix4 {
        let u = self.z.pow(n % self.d) * self.x.pow(m % self.d);
        u * *f * u.adjoint()
    }
}

/// `Z = (1+i)/2 σ_z⊗(1 − iσ_z)`, `X = ½(1+σ_x)⊗σ_x − (i/2)(1−σ_x)⊗σ_y`.
pub fn hw_group() -> HwGroup {
    let one = Matrix2::identity();
    let (sx, sy, sz) = (sigma_x(), sigma_y(), sigma_z());
    let z = kron(&sz, &(one - sz * I)) * c(0.5, 0.5);
    let x = kron(&(one + sx), &sx).scale(0.5) - kron(&(one - sx), &sy) * c(0.0, 0.5);
    HwGroup { d: DIM, x, z }
}

/// Golden-ratio constant `G = (√5 − 1)/2`.
pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Appleby's fiducial ket for `d = 4`.
pub fn appleby_fiducial() -> Ket<4> {
    let g = golden();
    let w = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let wbar = w.conj();
    let gi = c(0.0, g.powf(-1.5));
    let norm = 1.0 / (2.0 * (3.0 + g).sqrt());
    [ONE + wbar, w + gi, ONE - wbar, w - gi].map(|z| z * norm)
}

/// The Heisenberg–Weyl covariant SIC measurement seeded by [`appleby_fiducial`],
/// `Π_mn = X^m Z^n |f⟩¼⟨f| Z^{-n} X^{-m}`, with duals `P_mn = 20 Π_mn − 1`.
pub fn sic_pom() -> Pom {
    let hw = hw_group();
    let fid = appleby_fiducial();
    let seed = Matrix4::outer(&fid, &fid).scale(1.0 / DIM as f64);
    let params = SicParameters::rank_one(DIM);
    let dual_scale = 1.0 / params.a;
    let labels = lexicographic_labels();
    let outcomes = labels.map(|(m, n)| Hermitian::symmetrized(hw.act(m, n, &seed)));
    let duals = outcomes.map(|o| Hermitian::symmetrized(o.matrix().scale(dual_scale).sub_identity(1.0)));
    Pom { kind: PomKind::Sic, outcomes, duals, labels }
}

/// `G_jk = tr(Π_j Π_k)` as a 16×16 real symmetric matrix.
pub fn gram_matrix(outcomes: &[Hermitian<4>; OUTCOMES]) -> Matrix<OUTCOMES> {
    let mut g = Matrix::<OUTCOMES>::zeros();
    for j in 0..OUTCOMES {
        for k in j..OUTCOMES {
            let v = c(outcomes[j].trace_with(&outcomes[k]), 0.0);
            g.0[j][k] = v;
            g.0[k][j] = v;
        }
    }
    g
}

/// Dual frame from the inverse Gram matrix, `P_j = Σ_k (G⁻¹)_jk Π_k`.
/// Fails if the outcomes are not informationally complete.
pub fn duals_from_gram(outcomes: &[Hermitian<4>; OUTCOMES]) -> Result<[Hermitian<4>; OUTCOMES]> {
    let eig = Hermitian::symmetrized(gram_matrix(outcomes)).eig();
    let smallest = eig.values[OUTCOMES - 1];
    if smallest.abs() < IC_THRESHOLD {
        return Err(Error::Config(format!(
            "outcomes are not informationally complete (smallest Gram eigenvalue {smallest:.3e})"
        )));
    }
    let mut inverse = [[0.0; OUTCOMES]; OUTCOMES];
    for (k, &lambda) in eig.values.iter().enumerate() {
        let v = eig.vector(k);
        for i in 0..OUTCOMES {
            for j in 0..OUTCOMES {
                inverse[i][j] += (v[i] * v[j].conj()).re / lambda;
            }
        }
    }
    Ok(std::array::from_fn(|j| {
        let mut p = Matrix4::zeros();
        for k in 0..OUTCOMES {
            p += outcomes[k].matrix().scale(inverse[j][k]);
        }
        Hermitian::symmetrized(p)
    }))
}

/// `p_j = tr(ρ Π_j)`
pub fn probabilities(pom: &Pom, rho: &DensityMatrix) -> [f64; OUTCOMES] {
    pom.expectations(rho.matrix())
}

/// How a check result is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Passes when `value ≤ threshold`.
    Residual,
    /// Passes when `value ≥ threshold`.
    LowerBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub mode: CheckMode,
    pub passed: bool,
    /// Informational checks do not affect [`PomReport::passed`].
    pub required: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PomReport {
    pub kind: PomKind,
    pub checks: Vec<Check>,
}

impl PomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.required).all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest residual over the required residual checks.
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().filter(|c| c.required && c.mode == CheckMode::Residual).map(|c| c.value).fold(0.0, f64::max)
    }
}

impl fmt::Display for PomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "POM `{}`", self.kind)?;
        writeln!(f, "{:<28} {:>12} {:>12} {:>6}", "check", "value", "threshold", "status")?;
        for check in &self.checks {
            let status = match (check.passed, check.required) {
                (true, _) => "ok",
                (false, true) => "FAIL",
                (false, false) => "no",
            };
            let op = match check.mode {
                CheckMode::Residual => "<=",
                CheckMode::LowerBound => ">=",
            };
            writeln!(f, "{:<28} {:>12.3e} {op}{:>10.1e} {:>6}", check.name, check.value, check.threshold, status)?;
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

fn residual(name: &'static str, value: f64, required: bool) -> Check {
    Check { name, value, threshold: VERIFY_TOL, mode: CheckMode::Residual, passed: value <= VERIFY_TOL, required }
}

/// Checks completeness, positivity, outcome traces, the SIC Gram pattern,
/// duality, the dual sum and informational completeness.
///
/// The SIC Gram check is required only for [`PomKind::Sic`]; for the product
/// measurement it is reported for information.
pub fn verify_pom(pom: &Pom) -> PomReport {
    let outcomes = pom.outcomes();
    let duals = pom.duals();
    let identity = Matrix4::identity();
    let mut checks = Vec::new();

    let total = outcomes.iter().fold(Matrix4::zeros(), |acc, o| acc + *o.matrix());
    checks.push(residual("completeness", total.max_abs_diff(&identity), true));

    let negativity = outcomes.iter().map(|o| (-o.min_eigenvalue()).max(0.0)).fold(0.0, f64::max);
    checks.push(residual("positivity", negativity, true));

    let hermiticity = outcomes.iter().chain(duals.iter()).map(|o| o.matrix().hermitian_asymmetry()).fold(0.0, f64::max);
    checks.push(residual("hermiticity", hermiticity, true));

    let trace_dev = outcomes.iter().map(|o| (o.trace() - 1.0 / DIM as f64).abs()).fold(0.0, f64::max);
    checks.push(residual("outcome_trace", trace_dev, true));

    let gram = gram_matrix(outcomes);
    let params = SicParameters::rank_one(DIM);
    let mut gram_dev: f64 = 0.0;
    for j in 0..OUTCOMES {
        for k in 0..OUTCOMES {
            gram_dev = gram_dev.max((gram.0[j][k].re - params.gram(j, k)).abs());
        }
    }
    checks.push(residual("sic_gram", gram_dev, pom.kind() == PomKind::Sic));

    let mut duality: f64 = 0.0;
    for j in 0..OUTCOMES {
        for k in 0..OUTCOMES {
            let delta = if j == k { 1.0 } else { 0.0 };
            duality = duality.max((duals[j].trace_with(&outcomes[k]) - delta).abs());
        }
    }
    checks.push(residual("duality", duality, true));

    let dual_trace = duals.iter().map(|p| (p.trace() - 1.0).abs()).fold(0.0, f64::max);
    checks.push(residual("dual_trace", dual_trace, true));

    let dual_total = duals.iter().fold(Matrix4::zeros(), |acc, p| acc + *p.matrix());
    checks.push(residual("dual_sum", dual_total.max_abs_diff(&identity.scale(DIM as f64)), true));

    // The Gram matrix is symmetric positive semidefinite, so its singular
    // values are its eigenvalues.
    let smallest = Hermitian::symmetrized(gram).min_eigenvalue().max(0.0);
    checks.push(Check {
        name: "informational_completeness",
        value: smallest,
        threshold: IC_THRESHOLD,
        mode: CheckMode::LowerBound,
        passed: smallest >= IC_THRESHOLD,
        required: true,
    });

    PomReport { kind: pom.kind(), checks }
}
