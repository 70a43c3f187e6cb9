//! Exact and Trotterized propagators, the commutator error estimate and
//! digitization fidelity.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{spectral_norm, HermitianEigen, Operator, StateVector, C64};

/// Unitarity gate applied to propagators handed to [`fidelity`].
pub const UNITARY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `(e^{−iH_1τ} ⋯ e^{−iH_pτ})^l`
    General,
    /// Palindromic step with half steps on all but the last term.
    Symmetrized,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::General => "general",
            Scheme::Symmetrized => "symmetrized",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A product-formula approximation of `exp(−i(ΣH_i)T)` with `steps` repetitions.
#[derive(Clone, Debug)]
pub struct TrotterPlan {
    pub scheme: Scheme,
    pub steps: usize,
    pub terms: Vec<Operator>,
    pub total_time: f64,
}

impl TrotterPlan {
    pub fn new(scheme: Scheme, steps: usize, terms: Vec<Operator>, total_time: f64) -> Result<Self> {
        let plan = TrotterPlan {
            scheme,
            steps,
            terms,
            total_time,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("trotter steps must be >= 1".into()));
        }
        if !self.total_time.is_finite() {
            return Err(Error::InvalidParameter("total time is not finite".into()));
        }
        check_terms(&self.terms)
    }

    /// `ΣH_i`
    pub fn hamiltonian(&self) -> Operator {
        sum_terms(&self.terms)
    }
}

fn check_terms(terms: &[Operator]) -> Result<()> {
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidParameter("trotter plan has no terms".into()))?;
    for t in terms {
        if t.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: t.dim(),
            });
        }
        t.ensure_hermitian()?;
    }
    Ok(())
}

fn sum_terms(terms: &[Operator]) -> Operator {
    let mut it = terms.iter();
    let first = it.next().expect("nonempty terms").clone();
    it.fold(first, |acc, t| &acc + t)
}

/// `U(T) = exp(−iHT)`.
pub fn exact_propagator(h: &Operator, total_time: f64) -> Result<Operator> {
    Ok(HermitianEigen::new(h)?.propagator(total_time))
}

/// Eigendecompositions of the split terms, shared across step counts and times.
#[derive(Clone, Debug)]
pub struct Trotterizer {
    terms: Vec<HermitianEigen>,
    /// `basis_change[a][b] = V_a† V_b`
    basis_change: Vec<Vec<DMatrix<C64>>>,
}

impl Trotterizer {
    pub fn new(terms: &[Operator]) -> Result<Self> {
        check_terms(terms)?;
        let terms: Vec<HermitianEigen> = terms
            .iter()
            .map(HermitianEigen::new)
            .collect::<Result<_>>()?;
        let basis_change = terms
            .iter()
            .map(|a| {
                terms
                    .iter()
                    .map(|b| a.vectors().ad_mul(b.vectors()))
                    .collect()
            })
            .collect();
        Ok(Trotterizer {
            terms,
            basis_change,
        })
    }

    pub fn dim(&self) -> usize {
        self.terms[0].dim()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Factors `(term, duration)` of a single step, leftmost first.
    fn step_factors(&self, scheme: Scheme, tau: f64) -> Vec<(usize, f64)> {
        let p = self.terms.len();
        match scheme {
            Scheme::General => (0..p).map(|i| (i, tau)).collect(),
            Scheme::Symmetrized => {
                let mut f: Vec<(usize, f64)> = (0..p - 1).map(|i| (i, tau / 2.0)).collect();
                f.push((p - 1, tau));
                f.extend((0..p - 1).rev().map(|i| (i, tau / 2.0)));
                f
            }
        }
    }

    /// Propagator of one step of duration `total_time / steps`.
    pub fn step_propagator(&self, scheme: Scheme, steps: usize, total_time: f64) -> Operator {
        let tau = total_time / steps as f64;
        let mut cache: HashMap<(usize, u64), Operator> = HashMap::new();
        let mut product: Option<Operator> = None;
        for (i, dt) in self.step_factors(scheme, tau) {
            let factor = cache
                .entry((i, dt.to_bits()))
                .or_insert_with(|| self.terms[i].propagator(dt));
            product = Some(match product {
                None => factor.clone(),
                Some(acc) => &acc * &*factor,
            });
        }
        product.expect("at least one factor")
    }

    /// Full product-formula propagator.
    pub fn propagator(&self, scheme: Scheme, steps: usize, total_time: f64) -> Operator {
        assert!(steps >= 1, "trotter steps must be >= 1");
        self.step_propagator(scheme, steps, total_time).pow(steps)
    }

    /// Applies the product formula to a state without building any propagator.
    ///
    /// Adjacent factors of the same term are merged, and the state is carried in
    /// the eigenbasis of the current term between factors.
    pub fn evolve(
        &self,
        scheme: Scheme,
        steps: usize,
        total_time: f64,
        psi: &StateVector,
    ) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        assert!(steps >= 1, "trotter steps must be >= 1");
        let tau = total_time / steps as f64;
        let step = self.step_factors(scheme, tau);

        // Operator order is right-to-left on the state: the rightmost factor acts first.
        let mut sequence: Vec<(usize, f64)> = Vec::with_capacity(step.len() * steps);
        for _ in 0..steps {
            for &(i, dt) in step.iter().rev() {
                match sequence.last_mut() {
                    Some((j, acc)) if *j == i => *acc += dt,
                    _ => sequence.push((i, dt)),
                }
            }
        }

        let (first, _) = sequence[0];
        let mut coeffs = self.terms[first].vectors().ad_mul(psi.amplitudes());
        let mut current = first;
        for &(i, dt) in &sequence {
            if i != current {
                coeffs = &self.basis_change[i][current] * coeffs;
                current = i;
            }
            coeffs.component_mul_assign(&self.terms[i].phases(dt));
        }
        let amplitudes = self.terms[current].vectors() * coeffs;
        Ok(StateVector::from_evolved(amplitudes, psi.cutoff()))
    }
}

/// `(∏_i exp(−iH_i T/l))^l`, product in `terms` order.
pub fn trotter_general(plan: &TrotterPlan) -> Result<Operator> {
    plan.validate()?;
    if plan.scheme != Scheme::General {
        return Err(Error::InvalidParameter(
            "trotter_general needs a general-scheme plan".into(),
        ));
    }
    Ok(Trotterizer::new(&plan.terms)?.propagator(Scheme::General, plan.steps, plan.total_time))
}

/// Symmetrized product formula with `l⁻²` error.
pub fn trotter_symmetrized(plan: &TrotterPlan) -> Result<Operator> {
    plan.validate()?;
    if plan.scheme != Scheme::Symmetrized {
        return Err(Error::InvalidParameter(
            "trotter_symmetrized needs a symmetrized-scheme plan".into(),
        ));
    }
    Ok(Trotterizer::new(&plan.terms)?.propagator(
        Scheme::Symmetrized,
        plan.steps,
        plan.total_time,
    ))
}

/// Dispatches on `plan.scheme`.
pub fn trotterize(plan: &TrotterPlan) -> Result<Operator> {
    match plan.scheme {
        Scheme::General => trotter_general(plan),
        Scheme::Symmetrized => trotter_symmetrized(plan),
    }
}

/// Leading-order estimate `Σ_{i<j} ‖[H_i, H_j]‖ T² / (2l)`.
pub fn trotter_error_bound(plan: &TrotterPlan) -> Result<f64> {
    plan.validate()?;
    if plan.terms.len() < 2 {
        return Err(Error::InvalidParameter(
            "error estimate needs at least two terms".into(),
        ));
    }
    let mut total = 0.0;
    for (i, a) in plan.terms.iter().enumerate() {
        for b in &plan.terms[i + 1..] {
            total += spectral_norm(&a.commutator(b));
        }
    }
    Ok(total * plan.total_time * plan.total_time / (2.0 * plan.steps as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityReport {
    /// `max(0, 1 − ‖U_approx − U_exact‖)`
    pub lower_bound: f64,
    /// `|⟨ψ|U_exact† U_approx|ψ⟩|`
    pub overlap: f64,
    /// Spectral norm of `U_approx − U_exact`.
    pub norm_error: f64,
}

impl FidelityReport {
    /// `lower_bound ≤ overlap ≤ 1`, both up to `slack`.
    pub fn chain_holds(&self, slack: f64) -> bool {
        self.lower_bound <= self.overlap + slack && self.overlap <= 1.0 + slack
    }
}

pub fn fidelity(exact: &Operator, approx: &Operator, psi0: &StateVector) -> Result<FidelityReport> {
    if approx.dim() != exact.dim() {
        return Err(Error::DimensionMismatch {
            expected: exact.dim(),
            found: approx.dim(),
        });
    }
    if psi0.dim() != exact.dim() {
        return Err(Error::DimensionMismatch {
            expected: exact.dim(),
            found: psi0.dim(),
        });
    }
    exact.ensure_unitary(UNITARY_TOL)?;
    approx.ensure_unitary(UNITARY_TOL)?;
    let norm_error = spectral_norm(&(approx - exact));
    let overlap = exact.apply(psi0)?.inner(&approx.apply(psi0)?).norm();
    Ok(FidelityReport {
        lower_bound: (1.0 - norm_error).max(0.0),
        overlap,
        norm_error,
    })
}
