//! Dense complex linear algebra on one- and two-qubit spaces.
//!
//! Basis ordering is fixed everywhere: the first tensor factor is Alice (or
//! the gate's control), the second is Bob (the target), and each qubit uses
//! `H = 0`, `V = 1`. Two-qubit amplitudes are therefore ordered
//! `(HH, HV, VH, VV)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{input, Error, Result};

pub type C64 = Complex64;

/// Tolerance for operators built directly from closed-form entries.
pub const CONSTRUCT_TOL: f64 = 1e-12;
/// Tolerance for quantities that pass through an eigendecomposition.
pub const SPECTRAL_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Tensor product of two objects of the same kind.
pub trait Kron {
    fn kron(&self, other: &Self) -> Self;
}

pub fn kron<T: Kron>(a: &T, b: &T) -> T {
    a.kron(b)
}

/// A square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return input(format!("operator must be square, got {}x{}", mat.nrows(), mat.ncols()));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return input("operator has non-finite entries");
        }
        Ok(Self { mat })
    }

    /// Builds a `dim`×`dim` operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return input(format!("expected {} entries for dim {dim}, got {}", dim * dim, entries.len()));
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let z: Vec<C64> = entries.iter().map(|&x| c(x, 0.0)).collect();
        Self::from_rows(dim, &z)
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: DMatrix::zeros(dim, dim) }
    }

    /// `|psi><psi|`
    pub fn projector(psi: &PureState) -> Self {
        Self { mat: &psi.amps * psi.amps.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { mat: self.mat.map(|z| z * k) }
    }

    pub fn scale_complex(&self, k: C64) -> Self {
        Self { mat: self.mat.map(|z| z * k) }
    }

    /// `max_ij |A_ij - conj(A_ji)|`
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.hermitian_part().symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Eigenpairs of the Hermitian part, ascending by eigenvalue.
    pub fn hermitian_eigen(&self) -> Vec<(f64, PureState)> {
        let eig = self.hermitian_part().symmetric_eigen();
        let mut pairs: Vec<(f64, PureState)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &val)| (val, PureState { amps: eig.eigenvectors.column(k).into_owned() }))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }

    fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.mat + self.mat.adjoint()) * c(0.5, 0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues()[0]
    }

    /// `<psi|A|psi>`
    pub fn expectation(&self, psi: &PureState) -> C64 {
        psi.amps.dotc(&(&self.mat * &psi.amps))
    }

    /// `Tr[A B]`
    pub fn trace_product(&self, other: &Operator) -> C64 {
        let n = self.dim();
        let mut acc = c(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.mat[(i, k)] * other.mat[(k, i)];
            }
        }
        acc
    }

    pub fn apply(&self, psi: &PureState) -> DVector<C64> {
        &self.mat * &psi.amps
    }

    /// Partial transpose on the second qubit of a two-qubit operator.
    pub fn partial_transpose(&self) -> Result<Operator> {
        if self.dim() != 4 {
            return input(format!("partial transpose needs a 4x4 operator, got dim {}", self.dim()));
        }
        let mut out = DMatrix::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        out[(2 * a + b2, 2 * a2 + b)] = self.mat[(2 * a + b, 2 * a2 + b2)];
                    }
                }
            }
        }
        Ok(Operator { mat: out })
    }
}

impl Kron for Operator {
    fn kron(&self, other: &Self) -> Self {
        Self { mat: self.mat.kronecker(&other.mat) }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat * &rhs.mat }
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dim: usize,
    entries: Vec<(f64, f64)>,
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.mat[(i, j)].re, self.mat[(i, j)].im))
            .collect();
        OperatorRepr { dim: n, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(d)?;
        let z: Vec<C64> = repr.entries.iter().map(|&(re, im)| c(re, im)).collect();
        Operator::from_rows(repr.dim, &z).map_err(serde::de::Error::custom)
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
}

impl PureState {
    /// Accepts amplitudes whose squared norm is 1 within 1e-12.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amps);
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > CONSTRUCT_TOL {
            return input(format!("state is not normalized (squared norm {n2})"));
        }
        Ok(Self { amps: v })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amps);
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return input("cannot normalize a zero or non-finite vector");
        }
        Ok(Self { amps: v / c(n, 0.0) })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = DVector::zeros(dim);
        amps[index] = c(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amp(&self, k: usize) -> C64 {
        self.amps[k]
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Phase-insensitive equality: `|<a|b>| = 1` within 1e-10.
    pub fn same_ray(&self, other: &PureState) -> bool {
        self.dim() == other.dim() && (self.inner(other).norm() - 1.0).abs() < SPECTRAL_TOL
    }

    pub fn density(&self) -> Operator {
        Operator::projector(self)
    }
}

impl Kron for PureState {
    fn kron(&self, other: &Self) -> Self {
        Self { amps: self.amps.kronecker(&other.amps) }
    }
}

/// A two-qubit density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityOperator(Operator);

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        if op.dim() != 4 {
            return input(format!("density operator must be 4x4, got dim {}", op.dim()));
        }
        let herm = op.hermiticity_error();
        if herm > CONSTRUCT_TOL {
            return input(format!("density operator not Hermitian (deviation {herm:e})"));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > CONSTRUCT_TOL || tr.im.abs() > CONSTRUCT_TOL {
            return input(format!("density operator trace is {tr}, expected 1"));
        }
        let min = op.min_eigenvalue();
        if min < -CONSTRUCT_TOL {
            return input(format!("density operator has negative eigenvalue {min:e}"));
        }
        Ok(Self(op))
    }

    pub fn pure(psi: &PureState) -> Result<Self> {
        Self::new(psi.density())
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }
}

/// Weight `q` of the antisymmetric projector in a Werner state.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct WernerParameter(f64);

impl WernerParameter {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return input(format!("Werner parameter must lie in [0, 1], got {q}"));
        }
        Ok(Self(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// The four Bell states in polarization notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellState {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellState {
    pub const ALL: [BellState; 4] =
        [BellState::PsiMinus, BellState::PsiPlus, BellState::PhiMinus, BellState::PhiPlus];

    pub fn name(self) -> &'static str {
        match self {
            BellState::PsiMinus => "psi_minus",
            BellState::PsiPlus => "psi_plus",
            BellState::PhiMinus => "phi_minus",
            BellState::PhiPlus => "phi_plus",
        }
    }

    pub fn is_singlet(self) -> bool {
        self == BellState::PsiMinus
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BellState::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown Bell state label '{s}'")))
    }
}

/// `|psi±> = (|HV> ± |VH>)/√2`, `|phi±> = (|HH> ± |VV>)/√2`.
pub fn bell_state(label: BellState) -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match label {
        BellState::PsiMinus => [0.0, h, -h, 0.0],
        BellState::PsiPlus => [0.0, h, h, 0.0],
        BellState::PhiMinus => [h, 0.0, 0.0, -h],
        BellState::PhiPlus => [h, 0.0, 0.0, h],
    };
    PureState { amps: DVector::from_iterator(4, amps.iter().map(|&x| c(x, 0.0))) }
}

/// Projectors onto the symmetric (triplet) and antisymmetric (singlet)
/// subspaces, returned as `(Π_S, Π_A)`.
pub fn sym_antisym_projectors() -> (Operator, Operator) {
    let pi_a = Operator::projector(&bell_state(BellState::PsiMinus));
    let pi_s = &Operator::identity(4) - &pi_a;
    (pi_s, pi_a)
}

/// `q Π_A + (1-q) Π_S / 3`
pub fn werner(q: WernerParameter) -> DensityOperator {
    let (pi_s, pi_a) = sym_antisym_projectors();
    let q = q.value();
    let op = &pi_a.scale(q) + &pi_s.scale((1.0 - q) / 3.0);
    DensityOperator::new(op).expect("Werner states are valid density operators")
}

/// Measurement `{E0, E1}`; outcome 0 means "orthogonal", 1 means "identical".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoOutcomePovm {
    pub e0: Operator,
    pub e1: Operator,
}

impl TwoOutcomePovm {
    pub fn new(e0: Operator, e1: Operator) -> Self {
        Self { e0, e1 }
    }

    /// Completes `e1` to a POVM with `e0 = I - e1`.
    pub fn from_identical_element(e1: Operator) -> Self {
        let e0 = &Operator::identity(e1.dim()) - &e1;
        Self { e0, e1 }
    }

    pub fn swapped(&self) -> Self {
        Self { e0: self.e1.clone(), e1: self.e0.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PovmReport {
    pub min_eigenvalue_e0: f64,
    pub min_eigenvalue_e1: f64,
    pub completeness_deviation: f64,
    pub valid: bool,
}

pub fn validate_povm(m: &TwoOutcomePovm) -> PovmReport {
    if m.e0.dim() != m.e1.dim() {
        return PovmReport {
            min_eigenvalue_e0: f64::NAN,
            min_eigenvalue_e1: f64::NAN,
            completeness_deviation: f64::INFINITY,
            valid: false,
        };
    }
    let min0 = m.e0.min_eigenvalue();
    let min1 = m.e1.min_eigenvalue();
    let herm = m.e0.hermiticity_error().max(m.e1.hermiticity_error());
    let dev = (&m.e0 + &m.e1).max_abs_diff(&Operator::identity(m.e0.dim()));
    PovmReport {
        min_eigenvalue_e0: min0,
        min_eigenvalue_e1: min1,
        completeness_deviation: dev,
        valid: herm <= CONSTRUCT_TOL
            && min0 >= -CONSTRUCT_TOL
            && min1 >= -CONSTRUCT_TOL
            && dev <= CONSTRUCT_TOL,
    }
}

/// Prior probabilities of the orthogonal (`j = 0`) and identical (`j = 1`)
/// correlation classes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Priors {
    pub orthogonal: f64,
    pub identical: f64,
}

impl Priors {
    pub const EQUAL: Priors = Priors { orthogonal: 0.5, identical: 0.5 };

    pub fn new(orthogonal: f64, identical: f64) -> Result<Self> {
        if !(orthogonal >= 0.0 && identical >= 0.0) || (orthogonal + identical - 1.0).abs() > CONSTRUCT_TOL {
            return input(format!("priors must be nonnegative and sum to 1, got ({orthogonal}, {identical})"));
        }
        Ok(Self { orthogonal, identical })
    }

    pub fn swapped(self) -> Self {
        Self { orthogonal: self.identical, identical: self.orthogonal }
    }
}

impl Default for Priors {
    fn default() -> Self {
        Self::EQUAL
    }
}

/// `π0 Tr[E0 ρ0] + π1 Tr[E1 ρ1]`
pub fn expected_payoff(
    m: &TwoOutcomePovm,
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    priors: Priors,
) -> Result<f64> {
    let report = validate_povm(m);
    if !report.valid {
        return input(format!(
            "invalid POVM (min eigenvalues {:e}, {:e}; completeness deviation {:e})",
            report.min_eigenvalue_e0, report.min_eigenvalue_e1, report.completeness_deviation
        ));
    }
    if m.e0.dim() != 4 {
        return input("payoff needs two-qubit measurement operators");
    }
    let p = m.e0.trace_product(rho0.operator()) * priors.orthogonal
        + m.e1.trace_product(rho1.operator()) * priors.identical;
    debug_assert!(p.im.abs() < CONSTRUCT_TOL);
    Ok(p.re)
}

/// Sum of absolute eigenvalues of a Hermitian operator.
pub fn trace_norm(a: &Operator) -> Result<f64> {
    let herm = a.hermiticity_error();
    if herm > SPECTRAL_TOL {
        return input(format!("trace norm needs a Hermitian operator (deviation {herm:e})"));
    }
    Ok(a.hermitian_eigenvalues().iter().map(|x| x.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pol(h: C64, v: C64) -> PureState {
        PureState::normalized(vec![h, v]).unwrap()
    }

    fn rho0() -> DensityOperator {
        werner(WernerParameter::new(0.5).unwrap())
    }

    fn rho1() -> DensityOperator {
        werner(WernerParameter::new(0.0).unwrap())
    }

    #[test]
    fn kron_identity_and_basis() {
        let i4 = kron(&Operator::identity(2), &Operator::identity(2));
        assert_eq!(i4, Operator::identity(4));

        let hv = kron(&PureState::basis(2, 0), &PureState::basis(2, 1));
        assert_eq!(hv, PureState::basis(4, 1));

        let d = pol(c(1.0, 0.0), c(1.0, 0.0));
        let dd = d.kron(&d);
        for k in 0..4 {
            assert_abs_diff_eq!(dd.amp(k).re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(dd.amp(k).im, 0.0);
        }
    }

    #[test]
    fn bell_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi_m = bell_state(BellState::PsiMinus);
        let expected = [0.0, h, -h, 0.0];
        for (k, &e) in expected.iter().enumerate() {
            assert_eq!(psi_m.amp(k), c(e, 0.0));
        }
        let phi_p = bell_state(BellState::PhiPlus);
        let phi_m = bell_state(BellState::PhiMinus);
        assert_abs_diff_eq!(phi_p.inner(&phi_m).norm(), 0.0);
        for (i, a) in BellState::ALL.iter().enumerate() {
            for (j, b) in BellState::ALL.iter().enumerate() {
                let g = bell_state(*a).inner(&bell_state(*b));
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g.re, want, epsilon = 1e-15);
                assert_abs_diff_eq!(g.im, 0.0);
            }
        }
    }

    #[test]
    fn bell_label_parsing() {
        assert_eq!("psi_minus".parse::<BellState>().unwrap(), BellState::PsiMinus);
        assert!(matches!("psi_zero".parse::<BellState>(), Err(Error::Input(_))));
    }

    #[test]
    fn projectors() {
        let (pi_s, pi_a) = sym_antisym_projectors();
        assert_abs_diff_eq!(pi_a.trace().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pi_s.trace().re, 3.0, epsilon = 1e-15);
        assert!((&pi_s + &pi_a).max_abs_diff(&Operator::identity(4)) < 1e-15);
        assert!((&pi_s * &pi_s).max_abs_diff(&pi_s) < 1e-15);
        assert!((&pi_a * &pi_a).max_abs_diff(&pi_a) < 1e-15);

        let phi = bell_state(BellState::PhiPlus);
        let s_phi = pi_s.apply(&phi);
        let a_phi = pi_a.apply(&phi);
        assert!((s_phi - phi.amplitudes()).norm() < 1e-15);
        assert!(a_phi.norm() < 1e-15);
    }

    #[test]
    fn werner_endpoints() {
        let (pi_s, pi_a) = sym_antisym_projectors();
        assert!(rho1().operator().max_abs_diff(&pi_s.scale(1.0 / 3.0)) < 1e-15);
        let want0 = &pi_a.scale(0.5) + &pi_s.scale(1.0 / 6.0);
        assert!(rho0().operator().max_abs_diff(&want0) < 1e-15);
        let singlet = werner(WernerParameter::new(1.0).unwrap());
        assert!(singlet.operator().max_abs_diff(&pi_a) < 1e-15);
        assert_abs_diff_eq!(singlet.purity(), 1.0, epsilon = 1e-14);
        assert!(WernerParameter::new(1.5).is_err());
        assert!(WernerParameter::new(-0.01).is_err());
    }

    #[test]
    fn werner_family_is_valid() {
        for k in 0..=10 {
            let q = WernerParameter::new(k as f64 / 10.0).unwrap();
            let rho = werner(q);
            assert!(DensityOperator::new(rho.operator().clone()).is_ok());
        }
    }

    #[test]
    fn povm_validation() {
        let (pi_s, pi_a) = sym_antisym_projectors();
        assert!(validate_povm(&TwoOutcomePovm::new(pi_a.clone(), pi_s.clone())).valid);
        assert!(validate_povm(&TwoOutcomePovm::new(Operator::identity(4), Operator::zeros(4))).valid);
        let bad = validate_povm(&TwoOutcomePovm::new(pi_a.scale(1.5), pi_s));
        assert!(!bad.valid);
        assert_abs_diff_eq!(bad.completeness_deviation, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn payoff_examples() {
        let (pi_s, pi_a) = sym_antisym_projectors();
        let joint = TwoOutcomePovm::new(pi_a, pi_s);
        let p = expected_payoff(&joint, &rho0(), &rho1(), Priors::EQUAL).unwrap();
        assert_abs_diff_eq!(p, 0.75, epsilon = 1e-12);

        let guess = TwoOutcomePovm::new(Operator::identity(4), Operator::zeros(4));
        let p = expected_payoff(&guess, &rho0(), &rho1(), Priors::EQUAL).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);

        // H/V on both qubits, "identical" iff outcomes agree.
        let hh = Operator::projector(&PureState::basis(4, 0));
        let vv = Operator::projector(&PureState::basis(4, 3));
        let local = TwoOutcomePovm::from_identical_element(&hh + &vv);
        let p = expected_payoff(&local, &rho0(), &rho1(), Priors::EQUAL).unwrap();
        assert_abs_diff_eq!(p, 2.0 / 3.0, epsilon = 1e-12);

        let invalid = TwoOutcomePovm::new(Operator::identity(4).scale(1.5), Operator::zeros(4));
        assert!(expected_payoff(&invalid, &rho0(), &rho1(), Priors::EQUAL).is_err());
    }

    #[test]
    fn priors_validation() {
        assert!(Priors::new(0.3, 0.7).is_ok());
        assert!(Priors::new(0.6, 0.6).is_err());
        assert!(Priors::new(-0.1, 1.1).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        let (_, pi_a) = sym_antisym_projectors();
        assert_abs_diff_eq!(trace_norm(&pi_a).unwrap(), 1.0, epsilon = 1e-12);
        let diff = rho0().operator() - rho1().operator();
        assert_abs_diff_eq!(trace_norm(&diff).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(trace_norm(&Operator::zeros(4)).unwrap(), 0.0);

        let skew = Operator::from_real_rows(2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(trace_norm(&skew).is_err());
    }

    #[test]
    fn partial_transpose_of_singlet_is_not_positive() {
        let singlet = bell_state(BellState::PsiMinus).density();
        let pt = singlet.partial_transpose().unwrap();
        assert_abs_diff_eq!(pt.min_eigenvalue(), -0.5, epsilon = 1e-12);
        let hv = PureState::basis(4, 1).density();
        assert!(hv.partial_transpose().unwrap().min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn operator_json_is_row_major_pairs() {
        let op = Operator::from_rows(2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(3.0, 0.0)]).unwrap();
        let json = serde_json::to_string(&op).unwrap();
        assert_eq!(json, r#"{"dim":2,"entries":[[1.0,0.0],[0.0,2.0],[0.0,-2.0],[3.0,0.0]]}"#);
        let back: Operator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn density_operator_rejects_bad_input() {
        assert!(DensityOperator::new(Operator::identity(4)).is_err());
        assert!(DensityOperator::new(Operator::identity(2).scale(0.5)).is_err());
        let neg = Operator::from_real_rows(4, &[
            1.5, 0.0, 0.0, 0.0, //
            0.0, -0.5, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0,
        ])
        .unwrap();
        assert!(DensityOperator::new(neg).is_err());
    }
}
