//! Two-qubit states, binary observables and the CHSH machinery.
//!
//! Matrices are written in the computational basis `|00>, |01>, |10>, |11>`
//! with Alice's qubit first. The Bell basis is
//!
//! ```text
//! Phi_1,2 = (|00> +- |11>)/sqrt(2)      Phi_3,4 = (|01> +- |10>)/sqrt(2)
//! ```
//!
//! so Bell-diagonal weights `p` and diagonal correlations `c = (c_x, c_y, c_z)`
//! are related by
//!
//! ```text
//! c_x =  p1 - p2 + p3 - p4
//! c_y = -p1 + p2 + p3 - p4
//! c_z =  p1 + p2 - p3 - p4
//! ```
//!
//! With the standard measurements `A0 = X, A1 = Z, B0 = (X - Z)/sqrt(2),
//! B1 = (X + Z)/sqrt(2)` the CHSH value is `sqrt(2) (T_xx - T_zz)`. It reaches
//! `2 sqrt(2)` on `Phi_3`, whose correlation tensor is `diag(1, 1, -1)`; that
//! state is the canonical maximally entangled state of this crate
//! ([`TwoQubitState::canonical_entangled`]).

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Ket4 = Vector4<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn pauli(self) -> Mat2 {
        match self {
            Axis::X => Mat2::new(ZERO, ONE, ONE, ZERO),
            Axis::Y => Mat2::new(ZERO, -I, I, ZERO),
            Axis::Z => Mat2::new(ONE, ZERO, ZERO, -ONE),
        }
    }
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

/// Kronecker product `a ⊗ b` of two single-qubit operators.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

fn trace_product(a: &Mat4, b: &Mat4) -> C64 {
    let mut acc = ZERO;
    for i in 0..4 {
        for k in 0..4 {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn max_abs_entry<const R: usize, const C: usize>(
    m: &nalgebra::SMatrix<C64, R, C>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The four Bell vectors in the order `Phi_1 .. Phi_4`.
pub fn bell_basis() -> [Ket4; 4] {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    [
        Ket4::new(s, ZERO, ZERO, s),
        Ket4::new(s, ZERO, ZERO, -s),
        Ket4::new(ZERO, s, s, ZERO),
        Ket4::new(ZERO, s, -s, ZERO),
    ]
}

/// A two-qubit density matrix.
///
/// The stored matrix is Hermitian and has unit trace to machine precision;
/// construction symmetrizes and renormalizes inputs that pass validation.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: Mat4,
}

impl TwoQubitState {
    pub fn new(matrix: Mat4) -> Result<Self> {
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let skew = max_abs_entry(&(matrix - matrix.adjoint()));
        if skew > tol::INPUT {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |rho - rho^dag| = {skew:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > tol::INPUT {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let hermitian = (matrix + matrix.adjoint()).unscale(2.0);
        let normalized = hermitian.unscale(hermitian.trace().re);
        let state = TwoQubitState { matrix: normalized };
        let min_eig = state.eigenvalues()[0];
        if min_eig < -tol::PSD {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(state)
    }

    pub fn from_pure(psi: &Ket4) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let psi = psi.unscale(norm);
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        TwoQubitState {
            matrix: Mat4::identity().unscale(4.0),
        }
    }

    /// Product state `rho_a ⊗ rho_b` of two single-qubit density matrices.
    pub fn product(rho_a: &Mat2, rho_b: &Mat2) -> Result<Self> {
        Self::new(kron(rho_a, rho_b))
    }

    /// `Phi_3 = (|01> + |10>)/sqrt(2)`, the Bell state on which the standard
    /// CHSH measurements reach `2 sqrt(2)`.
    pub fn canonical_entangled() -> Self {
        BellDiagonalState::pure(2).to_state()
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    /// `Tr[op rho]` for a Hermitian `op` (imaginary rounding is dropped).
    pub fn expectation(&self, op: &Mat4) -> f64 {
        trace_product(op, &self.matrix).re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = self.matrix.symmetric_eigen();
        let mut vals = [0.0; 4];
        vals.copy_from_slice(eig.eigenvalues.as_slice());
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }

    pub fn reduced_alice(&self) -> Mat2 {
        let m = &self.matrix;
        Mat2::new(
            m[(0, 0)] + m[(1, 1)],
            m[(0, 2)] + m[(1, 3)],
            m[(2, 0)] + m[(3, 1)],
            m[(2, 2)] + m[(3, 3)],
        )
    }

    pub fn reduced_bob(&self) -> Mat2 {
        let m = &self.matrix;
        Mat2::new(
            m[(0, 0)] + m[(2, 2)],
            m[(0, 1)] + m[(2, 3)],
            m[(1, 0)] + m[(3, 2)],
            m[(1, 1)] + m[(3, 3)],
        )
    }

    /// Conjugation by a unitary on the two qubits, `U rho U^dag`.
    fn conjugated(&self, unitary: &Mat4) -> Mat4 {
        unitary * self.matrix * unitary.adjoint()
    }
}

/// Local Bloch vectors and correlation tensor of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliForm {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl PauliForm {
    /// `(1/4)(1⊗1 + Σ a_j σ_j⊗1 + Σ b_j 1⊗σ_j + Σ T_jk σ_j⊗σ_k)`, without
    /// checking positivity.
    pub fn to_matrix(&self) -> Mat4 {
        let id = identity2();
        let mut m = Mat4::identity();
        for (j, axis) in Axis::ALL.iter().enumerate() {
            let sj = axis.pauli();
            m += kron(&sj, &id).scale(self.a[j]);
            m += kron(&id, &sj).scale(self.b[j]);
            for (k, other) in Axis::ALL.iter().enumerate() {
                m += kron(&sj, &other.pauli()).scale(self.t[(j, k)]);
            }
        }
        m.unscale(4.0)
    }

    pub fn to_state(&self) -> Result<TwoQubitState> {
        TwoQubitState::new(self.to_matrix())
    }

    /// Diagonal of the correlation tensor, `(T_xx, T_yy, T_zz)`.
    pub fn diagonal_correlations(&self) -> [f64; 3] {
        [self.t[(0, 0)], self.t[(1, 1)], self.t[(2, 2)]]
    }
}

pub fn pauli_decompose(rho: &TwoQubitState) -> PauliForm {
    let id = identity2();
    let mut a = Vector3::zeros();
    let mut b = Vector3::zeros();
    let mut t = Matrix3::zeros();
    for (j, axis) in Axis::ALL.iter().enumerate() {
        let sj = axis.pauli();
        a[j] = rho.expectation(&kron(&sj, &id));
        b[j] = rho.expectation(&kron(&id, &sj));
        for (k, other) in Axis::ALL.iter().enumerate() {
            t[(j, k)] = rho.expectation(&kron(&sj, &other.pauli()));
        }
    }
    PauliForm { a, b, t }
}

/// Probability weights over the Bell basis `Phi_1 .. Phi_4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalState {
    p: [f64; 4],
}

impl BellDiagonalState {
    /// Entries in `[-1e-12, 0)` are clamped to zero; the sum must be one to
    /// within `1e-12` and is then renormalized.
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let p = validate_probabilities(&p, tol::ALGEBRAIC)?;
        let mut out = [0.0; 4];
        out.copy_from_slice(&p);
        Ok(BellDiagonalState { p: out })
    }

    /// The pure Bell state `Phi_{index+1}`.
    pub fn pure(index: usize) -> Self {
        let mut p = [0.0; 4];
        p[index] = 1.0;
        BellDiagonalState { p }
    }

    pub fn uniform() -> Self {
        BellDiagonalState { p: [0.25; 4] }
    }

    /// Inverse of the correlation map: `p1 = (1 + c_x - c_y + c_z)/4` etc.
    pub fn from_correlations(c: [f64; 3]) -> Result<Self> {
        let [cx, cy, cz] = c;
        Self::new([
            0.25 * (1.0 + cx - cy + cz),
            0.25 * (1.0 - cx + cy + cz),
            0.25 * (1.0 + cx + cy - cz),
            0.25 * (1.0 - cx - cy - cz),
        ])
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.p
    }

    pub fn correlations(&self) -> [f64; 3] {
        let [p1, p2, p3, p4] = self.p;
        [
            p1 - p2 + p3 - p4,
            -p1 + p2 + p3 - p4,
            p1 + p2 - p3 - p4,
        ]
    }

    pub fn to_matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        for (pj, phi) in self.p.iter().zip(bell_basis().iter()) {
            m += (phi * phi.adjoint()).scale(*pj);
        }
        m
    }

    pub fn to_state(&self) -> TwoQubitState {
        TwoQubitState {
            matrix: self.to_matrix(),
        }
    }

    /// Populations `<Phi_j| rho |Phi_j>` of an arbitrary state.
    pub fn bell_populations(rho: &TwoQubitState) -> [f64; 4] {
        let basis = bell_basis();
        let mut p = [0.0; 4];
        for (pj, phi) in p.iter_mut().zip(basis.iter()) {
            *pj = (phi.adjoint() * rho.matrix() * phi)[(0, 0)].re;
        }
        p
    }
}

/// Validates a probability vector: finite, entries `>= -tolerance` (clamped
/// to zero) and total within `tolerance` of one (renormalized).
pub fn validate_probabilities(p: &[f64], tolerance: f64) -> Result<Vec<f64>> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty vector".into()));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidProbabilities(format!("non-finite entry {bad}")));
    }
    if let Some(neg) = p.iter().find(|&&v| v < -tolerance) {
        return Err(Error::InvalidProbabilities(format!("negative entry {neg}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tolerance {
        return Err(Error::InvalidProbabilities(format!(
            "entries sum to {total}, not 1"
        )));
    }
    let clamped: Vec<f64> = p.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    Ok(clamped.into_iter().map(|v| v / total).collect())
}

/// A binary (`±1`-valued) Hermitian observable on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable {
    matrix: Mat2,
}

impl Observable {
    pub fn new(matrix: Mat2) -> Result<Self> {
        let skew = max_abs_entry(&(matrix - matrix.adjoint()));
        if skew > tol::ALGEBRAIC {
            return Err(Error::InvalidObservable(format!("not Hermitian ({skew:e})")));
        }
        let square = max_abs_entry(&(matrix * matrix - Mat2::identity()));
        if square > tol::ALGEBRAIC {
            return Err(Error::InvalidObservable(format!(
                "eigenvalues are not ±1 (|A^2 - 1| = {square:e})"
            )));
        }
        Ok(Observable { matrix })
    }

    pub fn pauli(axis: Axis) -> Self {
        Observable {
            matrix: axis.pauli(),
        }
    }

    /// `n · σ` for a unit vector `n`.
    pub fn along(n: [f64; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (norm - 1.0).abs() > tol::INPUT {
            return Err(Error::InvalidObservable(format!(
                "direction has norm {norm}, expected 1"
            )));
        }
        let m = Axis::ALL
            .iter()
            .zip(n.iter())
            .fold(Mat2::zeros(), |acc, (axis, c)| acc + axis.pauli().scale(c / norm));
        Observable::new(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    /// Projector onto outcome bit `bit`: bit 0 is eigenvalue +1, bit 1 is -1.
    pub fn projector(&self, bit: u8) -> Mat2 {
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        (Mat2::identity() + self.matrix.scale(sign)).unscale(2.0)
    }
}

/// Alice's and Bob's two binary observables each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshMeasurementSet {
    pub a0: Observable,
    pub a1: Observable,
    pub b0: Observable,
    pub b1: Observable,
}

impl ChshMeasurementSet {
    /// `A0 = X, A1 = Z, B0 = (X - Z)/sqrt(2), B1 = (X + Z)/sqrt(2)`.
    pub fn standard() -> Self {
        ChshMeasurementSet {
            a0: Observable::pauli(Axis::X),
            a1: Observable::pauli(Axis::Z),
            b0: Observable {
                matrix: (Axis::X.pauli() - Axis::Z.pauli()).scale(FRAC_1_SQRT_2),
            },
            b1: Observable {
                matrix: (Axis::X.pauli() + Axis::Z.pauli()).scale(FRAC_1_SQRT_2),
            },
        }
    }

    pub fn alice(&self, x: u8) -> &Observable {
        if x == 0 {
            &self.a0
        } else {
            &self.a1
        }
    }

    pub fn bob(&self, y: u8) -> &Observable {
        if y == 0 {
            &self.b0
        } else {
            &self.b1
        }
    }

    /// `A0⊗B0 + A0⊗B1 + A1⊗B0 - A1⊗B1`.
    pub fn operator(&self) -> Mat4 {
        let (a0, a1, b0, b1) = (
            self.a0.matrix(),
            self.a1.matrix(),
            self.b0.matrix(),
            self.b1.matrix(),
        );
        kron(a0, b0) + kron(a0, b1) + kron(a1, b0) - kron(a1, b1)
    }
}

pub fn chsh_value(rho: &TwoQubitState, m: &ChshMeasurementSet) -> f64 {
    rho.expectation(&m.operator())
}

/// Largest CHSH value reachable on `rho` with any binary observables.
///
/// With `s1 >= s2` the two largest singular values of the correlation
/// tensor this is `2 sqrt(s1^2 + s2^2)`, floored at the value 2 that
/// trivial measurements always reach.
pub fn beta_max(rho: &TwoQubitState) -> f64 {
    beta_max_from_tensor(&pauli_decompose(rho).t)
}

pub fn beta_max_from_tensor(t: &Matrix3<f64>) -> f64 {
    let mut s: Vec<f64> = t.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let m = s[0] * s[0] + s[1] * s[1];
    if m <= 1.0 {
        2.0
    } else {
        2.0 * m.sqrt()
    }
}

/// `(1/4) Σ_j (U_j⊗U_j) rho (U_j⊗U_j)^dag` over `U_j ∈ {1, X, Y, Z}`.
pub fn twirl_state(rho: &TwoQubitState) -> TwoQubitState {
    let mut acc = rho.matrix;
    for axis in Axis::ALL {
        let u = kron(&axis.pauli(), &axis.pauli());
        acc += rho.conjugated(&u);
    }
    TwoQubitState {
        matrix: acc.unscale(4.0),
    }
}

/// The Bell-diagonal state obtained by twirling `rho`.
pub fn twirl(rho: &TwoQubitState) -> BellDiagonalState {
    let twirled = twirl_state(rho);
    let p = BellDiagonalState::bell_populations(&twirled);
    // Populations of a valid state are nonnegative and sum to the trace.
    BellDiagonalState::new(p).expect("twirl of a valid state is Bell-diagonal")
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::out_of_range(name, value, 0.0, 1.0));
    }
    Ok(())
}

/// With probability `q` Bob's qubit is replaced by the maximally mixed state.
pub fn depolarizing(rho: &TwoQubitState, q: f64) -> Result<TwoQubitState> {
    check_unit_interval("q", q)?;
    let noise = kron(&rho.reduced_alice(), &identity2().unscale(2.0));
    TwoQubitState::new(rho.matrix.scale(1.0 - q) + noise.scale(q))
}

/// `p rho + (1 - p) (1⊗σ) rho (1⊗σ)` with `σ` the Pauli matrix along `axis`.
pub fn dephasing(rho: &TwoQubitState, p: f64, axis: Axis) -> Result<TwoQubitState> {
    check_unit_interval("p", p)?;
    let flip = kron(&identity2(), &axis.pauli());
    TwoQubitState::new(rho.matrix.scale(p) + rho.conjugated(&flip).scale(1.0 - p))
}
