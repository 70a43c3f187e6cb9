//! Truncated Fock space, qubit⊗boson operators and the dense kernels built on them.
//!
//! Composite indices are laid out qubit-major: `index = q * (n_max + 1) + n`, where
//! `q = 0` is the excited state |e⟩ and `q = 1` the ground state |g⟩.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const HERMITIAN_RTOL: f64 = 1e-12;

/// Maximum photon number kept in the boson factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidCutoff(n_max));
        }
        Ok(FockCutoff(n_max))
    }

    pub fn n_max(self) -> usize {
        self.0
    }

    pub fn boson_dim(self) -> usize {
        self.0 + 1
    }

    pub fn composite_dim(self) -> usize {
        2 * (self.0 + 1)
    }

    /// Composite index of `|qubit, n⟩` (qubit 0 = |e⟩, 1 = |g⟩).
    pub fn index(self, qubit: usize, n: usize) -> usize {
        debug_assert!(qubit < 2 && n <= self.0);
        qubit * self.boson_dim() + n
    }
}

impl TryFrom<usize> for FockCutoff {
    type Error = Error;
    fn try_from(n_max: usize) -> Result<Self> {
        FockCutoff::new(n_max)
    }
}

impl From<FockCutoff> for usize {
    fn from(c: FockCutoff) -> usize {
        c.0
    }
}

/// Dense square complex matrix. `cutoff` is set for operators on the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    cutoff: Option<FockCutoff>,
}

impl Operator {
    /// Wraps a square matrix acting on a factor space (or any unstructured space).
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Operator {
            matrix,
            cutoff: None,
        })
    }

    /// Wraps a matrix on the composite qubit⊗boson space.
    pub fn composite(matrix: DMatrix<C64>, cutoff: FockCutoff) -> Result<Self> {
        let dim = cutoff.composite_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Operator {
            matrix,
            cutoff: Some(cutoff),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            matrix: DMatrix::identity(dim, dim),
            cutoff: None,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            matrix: DMatrix::zeros(dim, dim),
            cutoff: None,
        }
    }

    pub fn composite_identity(cutoff: FockCutoff) -> Self {
        let dim = cutoff.composite_dim();
        Operator {
            matrix: DMatrix::identity(dim, dim),
            cutoff: Some(cutoff),
        }
    }

    pub fn composite_zeros(cutoff: FockCutoff) -> Self {
        let dim = cutoff.composite_dim();
        Operator {
            matrix: DMatrix::zeros(dim, dim),
            cutoff: Some(cutoff),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cutoff(&self) -> Option<FockCutoff> {
        self.cutoff
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            matrix: self.matrix.adjoint(),
            cutoff: self.cutoff,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            matrix: self.matrix.scale(factor),
            cutoff: self.cutoff,
        }
    }

    pub fn scale_complex(&self, factor: C64) -> Operator {
        Operator {
            matrix: &self.matrix * factor,
            cutoff: self.cutoff,
        }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// `max |A − A†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut dev = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= HERMITIAN_RTOL * self.max_abs()
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation <= HERMITIAN_RTOL * self.max_abs() {
            Ok(())
        } else {
            Err(Error::NotHermitian { deviation })
        }
    }

    /// `max |U†U − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut gram = self.matrix.adjoint() * &self.matrix;
        for i in 0..gram.nrows() {
            gram[(i, i)] -= C64::new(1.0, 0.0);
        }
        max_abs(&gram)
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { deviation })
        }
    }

    /// `max |self − other|`, panicking on shape mismatch.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(StateVector {
            amplitudes: &self.matrix * &psi.amplitudes,
            cutoff: psi.cutoff.or(self.cutoff),
        })
    }

    /// `self^power` by repeated squaring.
    pub fn pow(&self, mut power: usize) -> Operator {
        let mut result: Option<DMatrix<C64>> = None;
        let mut base = self.matrix.clone();
        while power > 0 {
            if power & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r * &base,
                });
            }
            power >>= 1;
            if power > 0 {
                base = &base * &base;
            }
        }
        Operator {
            matrix: result.unwrap_or_else(|| DMatrix::identity(self.dim(), self.dim())),
            cutoff: self.cutoff,
        }
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            cutoff: self.cutoff.or(rhs.cutoff),
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix - &rhs.matrix,
            cutoff: self.cutoff.or(rhs.cutoff),
        }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix * &rhs.matrix,
            cutoff: self.cutoff.or(rhs.cutoff),
        }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    cutoff: Option<FockCutoff>,
}

impl StateVector {
    pub(crate) const NORM_TOL: f64 = 1e-10;

    /// Accepts amplitudes that are already unit-norm (within 1e-10).
    pub fn new(amplitudes: DVector<C64>, cutoff: Option<FockCutoff>) -> Result<Self> {
        if let Some(c) = cutoff {
            if amplitudes.len() != c.composite_dim() {
                return Err(Error::DimensionMismatch {
                    expected: c.composite_dim(),
                    found: amplitudes.len(),
                });
            }
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvariantViolation(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(StateVector { amplitudes, cutoff })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: DVector<C64>, cutoff: Option<FockCutoff>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm("normalization"));
        }
        StateVector::new(amplitudes.unscale(norm), cutoff)
    }

    /// `|qubit, n⟩` on the composite space.
    pub fn basis(cutoff: FockCutoff, qubit: usize, n: usize) -> Result<Self> {
        if n > cutoff.n_max() {
            return Err(Error::FockIndexOutOfRange {
                index: n,
                n_max: cutoff.n_max(),
            });
        }
        let mut amps = DVector::zeros(cutoff.composite_dim());
        amps[cutoff.index(qubit, n)] = C64::new(1.0, 0.0);
        Ok(StateVector {
            amplitudes: amps,
            cutoff: Some(cutoff),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn cutoff(&self) -> Option<FockCutoff> {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Rebuilds a state from amplitudes produced by a norm-preserving map.
    pub(crate) fn from_evolved(amplitudes: DVector<C64>, cutoff: Option<FockCutoff>) -> Self {
        StateVector { amplitudes, cutoff }
    }
}

/// Which single-qubit operator `pauli` builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// σ⁺ = |e⟩⟨g|
    Plus,
    /// σ⁻ = |g⟩⟨e|
    Minus,
}

/// 2×2 Pauli-type operator in the (|e⟩, |g⟩) basis.
pub fn pauli(which: Pauli) -> Operator {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match which {
        Pauli::X => [z, one, one, z],
        Pauli::Y => [z, -i, i, z],
        Pauli::Z => [one, z, z, -one],
        Pauli::Plus => [z, one, z, z],
        Pauli::Minus => [z, z, one, z],
    };
    Operator {
        matrix: DMatrix::from_row_slice(2, 2, &entries),
        cutoff: None,
    }
}

/// Boson annihilation operator `b` on `{|0⟩, …, |n_max⟩}`.
pub fn annihilation(cutoff: FockCutoff) -> Operator {
    let d = cutoff.boson_dim();
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator {
        matrix: m,
        cutoff: None,
    }
}

/// Boson number operator `b†b`.
pub fn number(cutoff: FockCutoff) -> Operator {
    let d = cutoff.boson_dim();
    Operator {
        matrix: DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| C64::new(n as f64, 0.0))),
        cutoff: None,
    }
}

/// Boson number parity `(−1)^{b†b}`.
pub fn number_parity(cutoff: FockCutoff) -> Operator {
    let d = cutoff.boson_dim();
    Operator {
        matrix: DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| {
            C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })),
        cutoff: None,
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator {
        matrix: a.matrix.kronecker(&b.matrix),
        cutoff: None,
    }
}

/// `a ⊗ I_fock`.
pub fn embed_qubit(a: &Operator, cutoff: FockCutoff) -> Result<Operator> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.dim(),
        });
    }
    let id = DMatrix::identity(cutoff.boson_dim(), cutoff.boson_dim());
    Operator::composite(a.matrix.kronecker(&id), cutoff)
}

/// `I_2 ⊗ a`.
pub fn embed_boson(a: &Operator, cutoff: FockCutoff) -> Result<Operator> {
    if a.dim() != cutoff.boson_dim() {
        return Err(Error::DimensionMismatch {
            expected: cutoff.boson_dim(),
            found: a.dim(),
        });
    }
    let id = DMatrix::<C64>::identity(2, 2);
    Operator::composite(id.kronecker(&a.matrix), cutoff)
}

/// `q ⊗ b` with both factors checked against `cutoff`.
pub fn embed_product(q: &Operator, b: &Operator, cutoff: FockCutoff) -> Result<Operator> {
    if q.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: q.dim(),
        });
    }
    if b.dim() != cutoff.boson_dim() {
        return Err(Error::DimensionMismatch {
            expected: cutoff.boson_dim(),
            found: b.dim(),
        });
    }
    Operator::composite(q.matrix.kronecker(&b.matrix), cutoff)
}

/// Eigendecomposition `H = V Λ V†` of a Hermitian operator, reusable for
/// propagators at any time step.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    values: DVector<f64>,
    vectors: DMatrix<C64>,
    cutoff: Option<FockCutoff>,
}

impl HermitianEigen {
    pub fn new(h: &Operator) -> Result<Self> {
        h.ensure_hermitian()?;
        // Symmetrize away the sub-tolerance residue before handing to the solver.
        let sym = (&h.matrix + h.matrix.adjoint()).unscale(2.0);
        let eig = sym.symmetric_eigen();
        Ok(HermitianEigen {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
            cutoff: h.cutoff,
        })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Phase factors `exp(−i·scale·λ_k)`.
    pub fn phases(&self, scale: f64) -> DVector<C64> {
        self.values.map(|l| C64::from_polar(1.0, -scale * l))
    }

    /// `exp(−i·scale·H)`.
    pub fn propagator(&self, scale: f64) -> Operator {
        let phases = self.phases(scale);
        let mut vd = self.vectors.clone();
        for (k, mut col) in vd.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        Operator {
            matrix: vd * self.vectors.adjoint(),
            cutoff: self.cutoff,
        }
    }

    /// `exp(−i·scale·H)|ψ⟩` without forming the propagator.
    pub fn evolve(&self, scale: f64, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        let mut coeffs = self.vectors.ad_mul(&psi.amplitudes);
        coeffs.component_mul_assign(&self.phases(scale));
        Ok(StateVector::from_evolved(
            &self.vectors * coeffs,
            psi.cutoff.or(self.cutoff),
        ))
    }
}

/// `exp(−i·scale·h)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_hermitian(h: &Operator, scale: f64) -> Result<Operator> {
    Ok(HermitianEigen::new(h)?.propagator(scale))
}

/// Largest singular value.
pub fn spectral_norm(a: &Operator) -> f64 {
    if a.dim() == 0 {
        return 0.0;
    }
    a.matrix.clone().singular_values().max()
}
