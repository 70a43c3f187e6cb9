//! Markovian open-system dynamics in GKSL form,
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_k γ_k (2 L_k ρ L_k† − {L_k† L_k, ρ})
//! ```
//!
//! integrated with fixed-step RK4. Note the factor 2 on the jump term: a channel
//! `L = σ⁻` empties the excited state at rate `2γ`, four times the rate of the
//! `LρL† − ½{L†L, ρ}` convention at equal `γ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{max_abs, spectral_norm, FockCutoff, HermitianEigen, Operator, StateVector, C64};

/// Trace drift or negativity beyond this aborts an integration.
pub const ABORT_TOL: f64 = 1e-6;

/// Mixed state on the composite (or any) space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    cutoff: Option<FockCutoff>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-8;
    pub const NEGATIVITY_TOL: f64 = 1e-8;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<C64>, cutoff: Option<FockCutoff>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if let Some(c) = cutoff {
            if matrix.nrows() != c.composite_dim() {
                return Err(Error::DimensionMismatch {
                    expected: c.composite_dim(),
                    found: matrix.nrows(),
                });
            }
        }
        let rho = DensityMatrix { matrix, cutoff };
        rho.check(Self::HERMITIAN_TOL, Self::TRACE_TOL, Self::NEGATIVITY_TOL)?;
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|`
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        DensityMatrix {
            matrix: a * a.adjoint(),
            cutoff: psi.cutoff(),
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

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.adjoint()).unscale(2.0);
        sym.symmetric_eigenvalues().min()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    fn check(&self, herm_tol: f64, trace_tol: f64, neg_tol: f64) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > herm_tol {
            return Err(Error::InvariantViolation(format!(
                "density matrix not Hermitian: max |rho - rho^dag| = {herm:e}"
            )));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::InvariantViolation(format!(
                "density matrix trace {tr} drifted from 1"
            )));
        }
        let min = self.min_eigenvalue();
        if min < -neg_tol {
            return Err(Error::InvariantViolation(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }
}

/// One dissipation channel `γ (2LρL† − {L†L, ρ})`.
#[derive(Clone, Debug)]
pub struct Channel {
    pub operator: Operator,
    pub gamma: f64,
}

#[derive(Clone, Debug)]
pub struct LindbladSpec {
    pub hamiltonian: Operator,
    pub channels: Vec<Channel>,
    pub t_span: (f64, f64),
    pub dt: f64,
    /// Record a sample every this many steps (the final state is always recorded).
    pub sample_every: usize,
}

impl LindbladSpec {
    /// All collapse operators share one rate `gamma`; `dt` defaults to [`default_dt`].
    pub fn uniform(
        hamiltonian: Operator,
        collapse_ops: Vec<Operator>,
        gamma: f64,
        t_span: (f64, f64),
    ) -> Result<Self> {
        let channels: Vec<Channel> = collapse_ops
            .into_iter()
            .map(|operator| Channel { operator, gamma })
            .collect();
        let dt = default_dt(&hamiltonian, &channels);
        let spec = LindbladSpec {
            hamiltonian,
            channels,
            t_span,
            dt,
            sample_every: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (t0, t1) = self.t_span;
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_span must satisfy t1 > t0, got ({t0}, {t1})"
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
        }
        self.hamiltonian.ensure_hermitian()?;
        for ch in &self.channels {
            if !(ch.gamma >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "channel rate must be >= 0, got {}",
                    ch.gamma
                )));
            }
            if ch.operator.dim() != self.hamiltonian.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.hamiltonian.dim(),
                    found: ch.operator.dim(),
                });
            }
        }
        Ok(())
    }
}

/// `min(0.01/‖H‖, 0.01/γ_max)`, ignoring vanishing terms.
pub fn default_dt(hamiltonian: &Operator, channels: &[Channel]) -> f64 {
    let h_norm = spectral_norm(hamiltonian);
    let gamma = channels.iter().map(|c| c.gamma).fold(0.0, f64::max);
    [h_norm, gamma]
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| 0.01 / x)
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

/// Precomputed generator: `H_nh = H − i Σγ_k L_k†L_k` and the jump operators.
struct Generator {
    h_nh: DMatrix<C64>,
    jumps: Vec<(DMatrix<C64>, DMatrix<C64>, f64)>,
}

impl Generator {
    fn new(spec: &LindbladSpec) -> Self {
        let mut h_nh = spec.hamiltonian.matrix().clone();
        let mut jumps = Vec::with_capacity(spec.channels.len());
        for ch in &spec.channels {
            if ch.gamma == 0.0 {
                continue;
            }
            let l = ch.operator.matrix();
            let l_dag = l.adjoint();
            h_nh -= (&l_dag * l) * C64::new(0.0, ch.gamma);
            jumps.push((l.clone(), l_dag, ch.gamma));
        }
        Generator { h_nh, jumps }
    }

    /// Assumes `rho` Hermitian, so `ρ H_nh† = (H_nh ρ)†`.
    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let x = &self.h_nh * rho;
        let mut out = (&x - x.adjoint()) * C64::new(0.0, -1.0);
        for (l, l_dag, gamma) in &self.jumps {
            out += (l * rho * l_dag) * C64::new(2.0 * gamma, 0.0);
        }
        out
    }
}

/// Right-hand side of the master equation at `rho`.
pub fn lindblad_rhs(rho: &DensityMatrix, spec: &LindbladSpec) -> Result<Operator> {
    if rho.dim() != spec.hamiltonian.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.hamiltonian.dim(),
            found: rho.dim(),
        });
    }
    for ch in &spec.channels {
        if ch.operator.dim() != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho.dim(),
                found: ch.operator.dim(),
            });
        }
    }
    let out = Generator::new(spec).apply(&rho.matrix);
    match rho.cutoff {
        Some(c) => Operator::composite(out, c),
        None => Operator::new(out),
    }
}

/// Integrates from `rho0`, handing every sample to `observe` as it is produced.
/// Returns the number of RK4 steps taken.
pub fn evolve_master_with<F>(rho0: &DensityMatrix, spec: &LindbladSpec, mut observe: F) -> Result<usize>
where
    F: FnMut(f64, &DensityMatrix) -> Result<()>,
{
    spec.validate()?;
    if rho0.dim() != spec.hamiltonian.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.hamiltonian.dim(),
            found: rho0.dim(),
        });
    }
    let (t0, t1) = spec.t_span;
    let span = t1 - t0;
    let ratio = span / spec.dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    }
    .max(1.0) as usize;
    let h = span / steps as f64;
    let gen = Generator::new(spec);
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let sixth = C64::new(h / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);

    let mut rho = rho0.clone();
    rho.check(ABORT_TOL, ABORT_TOL, ABORT_TOL)?;
    observe(t0, &rho)?;
    for step in 1..=steps {
        let r = &rho.matrix;
        let k1 = gen.apply(r);
        let k2 = gen.apply(&(r + &k1 * half));
        let k3 = gen.apply(&(r + &k2 * half));
        let k4 = gen.apply(&(r + &k3 * full));
        rho.matrix += (k1 + (k2 + k3) * two + k4) * sixth;
        if step % spec.sample_every == 0 || step == steps {
            let t = t0 + step as f64 * h;
            rho.check(ABORT_TOL, ABORT_TOL, ABORT_TOL).map_err(|e| {
                Error::InvariantViolation(format!("at t = {t}: {e} (dt = {h} may be too large)"))
            })?;
            observe(t, &rho)?;
        }
    }
    Ok(steps)
}

/// Integrates from `rho0` and returns all `(t, ρ(t))` samples.
pub fn evolve_master(rho0: &DensityMatrix, spec: &LindbladSpec) -> Result<Vec<(f64, DensityMatrix)>> {
    let mut samples = Vec::new();
    evolve_master_with(rho0, spec, |t, rho| {
        samples.push((t, rho.clone()));
        Ok(())
    })?;
    Ok(samples)
}

/// Exact unitary reference `U ρ U†` used by tests and the runner's consistency checks.
pub fn unitary_conjugate(rho: &DensityMatrix, u: &HermitianEigen, t: f64) -> DensityMatrix {
    let prop = u.propagator(t);
    DensityMatrix {
        matrix: prop.matrix() * &rho.matrix * prop.matrix().adjoint(),
        cutoff: rho.cutoff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{pauli, Pauli};

    fn qubit_rho(pe: f64) -> DensityMatrix {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(pe, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0 - pe, 0.0)],
        );
        DensityMatrix::new(m, None).unwrap()
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(DMatrix::identity(2, 2), None).is_err());
        let neg = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.5, 0.0)],
        );
        assert!(DensityMatrix::new(neg, None).is_err());
        let non_herm = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
        );
        assert!(DensityMatrix::new(non_herm, None).is_err());
        assert!(DensityMatrix::new(DMatrix::identity(2, 2).unscale(2.0), None).is_ok());
    }

    #[test]
    fn single_jump_rhs() {
        // H = 0, L = σ⁻, ρ = |e⟩⟨e|: dρ/dt = γ(2|g⟩⟨g| − 2|e⟩⟨e|).
        let gamma = 0.7;
        let spec = LindbladSpec::uniform(Operator::zeros(2), vec![pauli(Pauli::Minus)], gamma, (0.0, 1.0))
            .unwrap();
        let d = lindblad_rhs(&qubit_rho(1.0), &spec).unwrap();
        assert!((d.get(0, 0) - C64::new(-2.0 * gamma, 0.0)).norm() < 1e-15);
        assert!((d.get(1, 1) - C64::new(2.0 * gamma, 0.0)).norm() < 1e-15);
        assert_eq!(d.get(0, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn unitary_rhs_is_traceless_commutator() {
        let h = &pauli(Pauli::X).scale(0.4) + &pauli(Pauli::Z).scale(1.1);
        let spec = LindbladSpec::uniform(h.clone(), vec![], 0.0, (0.0, 1.0)).unwrap();
        let rho = qubit_rho(0.3);
        let d = lindblad_rhs(&rho, &spec).unwrap();
        assert!(d.trace().norm() < 1e-15);
        let rho_op = Operator::new(rho.matrix().clone()).unwrap();
        let expect = h.commutator(&rho_op).scale_complex(C64::new(0.0, -1.0));
        assert!(d.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn spec_validation() {
        let mut spec = LindbladSpec::uniform(Operator::zeros(2), vec![pauli(Pauli::Minus)], 1.0, (0.0, 1.0))
            .unwrap();
        spec.dt = 0.0;
        assert!(spec.validate().is_err());
        assert!(LindbladSpec::uniform(Operator::zeros(2), vec![], 1.0, (1.0, 1.0)).is_err());
        assert!(LindbladSpec::uniform(Operator::zeros(2), vec![pauli(Pauli::Minus)], -1.0, (0.0, 1.0)).is_err());
        assert!(LindbladSpec::uniform(Operator::zeros(2), vec![Operator::identity(3)], 1.0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn default_dt_rule() {
        let h = pauli(Pauli::Z).scale(4.0);
        let ch = vec![Channel { operator: pauli(Pauli::Minus), gamma: 2.0 }];
        assert!((default_dt(&h, &ch) - 0.0025).abs() < 1e-15);
        let ch = vec![Channel { operator: pauli(Pauli::Minus), gamma: 0.1 }];
        assert!((default_dt(&h, &ch) - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn sampling_includes_endpoints() {
        let mut spec = LindbladSpec::uniform(Operator::zeros(2), vec![pauli(Pauli::Minus)], 1.0, (0.0, 0.1))
            .unwrap();
        spec.dt = 0.01;
        spec.sample_every = 3;
        let samples = evolve_master(&qubit_rho(1.0), &spec).unwrap();
        let times: Vec<f64> = samples.iter().map(|(t, _)| *t).collect();
        assert_eq!(times.len(), 5);
        assert_eq!(times[0], 0.0);
        assert!((times[4] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn oversized_step_aborts() {
        let h = pauli(Pauli::X).scale(50.0);
        let mut spec = LindbladSpec::uniform(h, vec![pauli(Pauli::Minus)], 1.0, (0.0, 5.0)).unwrap();
        spec.dt = 0.2;
        let err = evolve_master(&qubit_rho(1.0), &spec).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(_)));
    }
}
