//! Hamiltonians of the qubit-boson system and the physical-to-simulated parameter map.
//!
//! All frequencies are angular, in rad/ns (ħ = 1). Use [`ghz`] to convert an
//! ordinary frequency `f` quoted as "2π × f GHz".

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, embed_boson, embed_product, embed_qubit, number, number_parity, pauli,
    FockCutoff, Operator, Pauli,
};

/// First-step qubit frequency, GHz.
pub const QUBIT1_GHZ: f64 = 6.381;
/// Second-step qubit frequency, GHz.
pub const QUBIT2_GHZ: f64 = 5.452;
/// Qubit-resonator coupling, GHz.
pub const COUPLING_GHZ: f64 = 1.79;

/// `2π·f` rad/ns for a frequency `f` in GHz.
pub fn ghz(f: f64) -> f64 {
    TAU * f
}

/// Physical parameters of the qubit-resonator system and its rotating frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiParams {
    /// Qubit splitting ω_Q.
    pub omega_q: f64,
    /// Bosonic mode frequency ω_b.
    pub omega_b: f64,
    /// Coupling g.
    pub g: f64,
    /// Qubit frequency during the JC step.
    pub omega_q1: f64,
    /// Qubit frequency during the anti-JC step.
    pub omega_q2: f64,
    /// Rotating-frame frequency.
    pub omega_re: f64,
    #[serde(rename = "n_max")]
    pub cutoff: FockCutoff,
}

impl RabiParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_q", self.omega_q),
            ("omega_b", self.omega_b),
            ("g", self.g),
            ("omega_q1", self.omega_q1),
            ("omega_q2", self.omega_q2),
            ("omega_re", self.omega_re),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} is not finite")));
        }
        if self.omega_b <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega_b must be positive, got {}",
                self.omega_b
            )));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "g must be non-negative, got {}",
                self.g
            )));
        }
        Ok(())
    }

    pub fn delta_b(&self) -> f64 {
        self.omega_b - self.omega_re
    }

    pub fn delta_q(&self) -> f64 {
        self.omega_q - self.omega_re
    }

    pub fn delta_q1(&self) -> f64 {
        self.omega_q1 - self.omega_re
    }

    pub fn delta_q2(&self) -> f64 {
        self.omega_q2 - self.omega_re
    }
}

/// Parameters of the Rabi model realized by the two-step digital sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveParams {
    pub g_eff: f64,
    pub omega_b_eff: f64,
    pub omega_q_eff: f64,
}

pub fn effective_params(p: &RabiParams) -> EffectiveParams {
    EffectiveParams {
        g_eff: p.g,
        omega_b_eff: 2.0 * p.delta_b(),
        omega_q_eff: p.delta_q1() - p.delta_q2(),
    }
}

/// Parameters in the rotating frame, laid out so that `h_jc + h_ajc` of the
/// result is the Rabi Hamiltonian with the effective parameters of `p`.
pub fn simulation_params(p: &RabiParams) -> RabiParams {
    let eff = effective_params(p);
    RabiParams {
        omega_q: eff.omega_q_eff,
        omega_b: eff.omega_b_eff,
        g: eff.g_eff,
        omega_q1: p.delta_q1(),
        omega_q2: p.delta_q2(),
        omega_re: 0.0,
        cutoff: p.cutoff,
    }
}

/// Composite-space ladder and Pauli operators for one cutoff.
#[derive(Clone, Debug)]
pub struct CompositeOps {
    pub cutoff: FockCutoff,
    /// I⊗b
    pub b: Operator,
    /// I⊗b†
    pub b_dag: Operator,
    /// I⊗b†b
    pub n: Operator,
    pub sigma_x: Operator,
    pub sigma_z: Operator,
    /// σ⁺⊗I
    pub sigma_plus: Operator,
    /// σ⁻⊗I
    pub sigma_minus: Operator,
    /// b†σ⁻ + bσ⁺
    pub jc_coupling: Operator,
    /// b†σ⁺ + bσ⁻
    pub ajc_coupling: Operator,
}

impl CompositeOps {
    pub fn new(cutoff: FockCutoff) -> Self {
        let embed_q = |which| embed_qubit(&pauli(which), cutoff).expect("2x2 factor");
        let b_factor = annihilation(cutoff);
        let bd_factor = b_factor.adjoint();
        let b = embed_boson(&b_factor, cutoff).expect("boson factor");
        let b_dag = b.adjoint();
        let n = embed_boson(&number(cutoff), cutoff).expect("boson factor");
        let product = |q, bf: &Operator| embed_product(&pauli(q), bf, cutoff).expect("factors");
        let jc_coupling =
            &product(Pauli::Minus, &bd_factor) + &product(Pauli::Plus, &b_factor);
        let ajc_coupling =
            &product(Pauli::Plus, &bd_factor) + &product(Pauli::Minus, &b_factor);
        CompositeOps {
            cutoff,
            b,
            b_dag,
            n,
            sigma_x: embed_q(Pauli::X),
            sigma_z: embed_q(Pauli::Z),
            sigma_plus: embed_q(Pauli::Plus),
            sigma_minus: embed_q(Pauli::Minus),
            jc_coupling,
            ajc_coupling,
        }
    }

    /// σ_x⊗(b + b†)
    pub fn rabi_coupling(&self) -> Operator {
        &self.sigma_x * &(&self.b + &self.b_dag)
    }
}

/// `(ω_Q/2)σ_z + ω_b b†b + g σ_x(b† + b)`.
pub fn h_rabi(p: &RabiParams) -> Operator {
    let ops = CompositeOps::new(p.cutoff);
    let mut h = ops.sigma_z.scale(p.omega_q / 2.0);
    h = &h + &ops.n.scale(p.omega_b);
    &h + &ops.rabi_coupling().scale(p.g)
}

/// `(ω_b/2)b†b + (ω_1^Q/2)σ_z + g(b†σ⁻ + bσ⁺)`.
pub fn h_jc(p: &RabiParams) -> Operator {
    let ops = CompositeOps::new(p.cutoff);
    let h = &ops.n.scale(p.omega_b / 2.0) + &ops.sigma_z.scale(p.omega_q1 / 2.0);
    &h + &ops.jc_coupling.scale(p.g)
}

/// `(ω_b/2)b†b − (ω_2^Q/2)σ_z + g(b†σ⁺ + bσ⁻)`.
pub fn h_ajc(p: &RabiParams) -> Operator {
    let ops = CompositeOps::new(p.cutoff);
    let h = &ops.n.scale(p.omega_b / 2.0) - &ops.sigma_z.scale(p.omega_q2 / 2.0);
    &h + &ops.ajc_coupling.scale(p.g)
}

/// Rotating-frame JC form `Δ_b b†b − (Δ_Q/2)σ_z + g(b†σ⁻ + bσ⁺)`.
pub fn h_eff(p: &RabiParams) -> Operator {
    let ops = CompositeOps::new(p.cutoff);
    let h = &ops.n.scale(p.delta_b()) - &ops.sigma_z.scale(p.delta_q() / 2.0);
    &h + &ops.jc_coupling.scale(p.g)
}

/// Counter-rotating form `Δ_b b†b − δ σ_z + g(b†σ⁺ + bσ⁻)` with a free qubit detuning `δ`.
pub fn h_eff_counter_rotating(
    cutoff: FockCutoff,
    delta_b: f64,
    qubit_detuning: f64,
    g: f64,
) -> Operator {
    let ops = CompositeOps::new(cutoff);
    let h = &ops.n.scale(delta_b) - &ops.sigma_z.scale(qubit_detuning);
    &h + &ops.ajc_coupling.scale(g)
}

/// `(σ_x⊗I) h (σ_x⊗I)`.
pub fn conjugate_by_sigma_x(h: &Operator) -> Result<Operator> {
    let cutoff = h.cutoff().ok_or(Error::InvalidParameter(
        "sigma_x conjugation needs a composite operator".into(),
    ))?;
    if h.dim() != cutoff.composite_dim() {
        return Err(Error::DimensionMismatch {
            expected: cutoff.composite_dim(),
            found: h.dim(),
        });
    }
    // σ_x⊗I swaps the |e⟩ and |g⟩ blocks; permute instead of multiplying.
    let half = cutoff.boson_dim();
    let flip = |i: usize| if i < half { i + half } else { i - half };
    let m = h.matrix();
    let out = nalgebra::DMatrix::from_fn(h.dim(), h.dim(), |i, j| m[(flip(i), flip(j))]);
    Operator::composite(out, cutoff)
}

/// Total parity `σ_z ⊗ (−1)^{b†b}`.
pub fn parity_operator(cutoff: FockCutoff) -> Operator {
    embed_product(&pauli(Pauli::Z), &number_parity(cutoff), cutoff).expect("factors")
}

/// Excitation number `b†b + σ⁺σ⁻`.
pub fn excitation_number(cutoff: FockCutoff) -> Operator {
    let ops = CompositeOps::new(cutoff);
    &ops.n + &(&ops.sigma_plus * &ops.sigma_minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::HermitianEigen;

    fn params(n_max: usize) -> RabiParams {
        RabiParams {
            omega_q: 1.3,
            omega_b: 0.9,
            g: 0.7,
            omega_q1: 1.1,
            omega_q2: 0.4,
            omega_re: 0.25,
            cutoff: FockCutoff::new(n_max).unwrap(),
        }
    }

    /// Largest entry of `m` over rows/cols strictly below the cutoff edge in both qubit blocks.
    fn max_abs_below_edge(m: &Operator, cutoff: FockCutoff) -> f64 {
        let keep = |i: usize| i % cutoff.boson_dim() < cutoff.n_max();
        let mut worst = 0.0f64;
        for i in (0..m.dim()).filter(|&i| keep(i)) {
            for j in (0..m.dim()).filter(|&j| keep(j)) {
                worst = worst.max(m.get(i, j).norm());
            }
        }
        worst
    }

    #[test]
    fn validation() {
        let mut p = params(4);
        assert!(p.validate().is_ok());
        p.omega_b = 0.0;
        assert!(p.validate().is_err());
        let mut p = params(4);
        p.g = -0.1;
        assert!(p.validate().is_err());
        let mut p = params(4);
        p.omega_re = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn builders_are_hermitian() {
        let p = params(6);
        for h in [h_rabi(&p), h_jc(&p), h_ajc(&p), h_eff(&p)] {
            assert!(h.hermiticity_deviation() <= 1e-12 * h.max_abs());
            assert_eq!(h.cutoff(), Some(p.cutoff));
        }
    }

    #[test]
    fn uncoupled_rabi_spectrum() {
        let mut p = params(5);
        p.g = 0.0;
        let h = h_rabi(&p);
        let mut got: Vec<f64> = HermitianEigen::new(&h).unwrap().values().iter().copied().collect();
        got.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = (0..=5)
            .flat_map(|n| {
                let n = n as f64;
                [p.omega_q / 2.0 + n * p.omega_b, -p.omega_q / 2.0 + n * p.omega_b]
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn jc_sum_cancels_qubit_term() {
        let mut p = params(8);
        p.omega_q1 = 2.2;
        p.omega_q2 = 2.2;
        let ops = CompositeOps::new(p.cutoff);
        let sum = &h_jc(&p) + &h_ajc(&p);
        let target = &ops.n.scale(p.omega_b) + &ops.rabi_coupling().scale(p.g);
        assert!(sum.max_abs_diff(&target) <= 1e-12);
    }

    #[test]
    fn jc_sum_is_rabi_of_simulation_params() {
        let p = params(7);
        let sim = simulation_params(&p);
        let sum = &h_jc(&sim) + &h_ajc(&sim);
        assert!(sum.max_abs_diff(&h_rabi(&sim)) <= 1e-12);
        let eff = effective_params(&p);
        assert_eq!(sim.omega_b, eff.omega_b_eff);
        assert_eq!(sim.omega_q, eff.omega_q_eff);
    }

    #[test]
    fn jc_conserves_excitations_below_edge() {
        let p = params(8);
        let nex = excitation_number(p.cutoff);
        for h in [h_jc(&p), h_eff(&p)] {
            let comm = h.commutator(&nex);
            assert!(max_abs_below_edge(&comm, p.cutoff) <= 1e-10);
        }
        // The anti-JC coupling does not.
        let comm = h_ajc(&p).commutator(&nex);
        assert!(max_abs_below_edge(&comm, p.cutoff) > 0.1);
    }

    #[test]
    fn rabi_conserves_parity() {
        let p = params(10);
        let comm = h_rabi(&p).commutator(&parity_operator(p.cutoff));
        assert!(comm.max_abs() <= 1e-10);
    }

    #[test]
    fn uncoupled_jc_is_diagonal() {
        let mut p = params(4);
        p.g = 0.0;
        let h = h_jc(&p);
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if i != j {
                    assert_eq!(h.get(i, j).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn eff_in_lab_frame_is_rescaled_jc() {
        let mut p = params(6);
        p.omega_re = 0.0;
        // ω_b b†b − (ω_Q/2)σ_z is the JC form with ω_b → 2ω_b and ω_1^Q → −ω_Q.
        let mapped = RabiParams {
            omega_b: 2.0 * p.omega_b,
            omega_q1: -p.omega_q,
            ..p.clone()
        };
        assert!(h_eff(&p).max_abs_diff(&h_jc(&mapped)) <= 1e-12);
    }

    #[test]
    fn eff_in_resonant_frame_is_pure_coupling() {
        let mut p = params(6);
        p.omega_q = p.omega_b;
        p.omega_re = p.omega_b;
        let ops = CompositeOps::new(p.cutoff);
        assert!(h_eff(&p).max_abs_diff(&ops.jc_coupling.scale(p.g)) <= 1e-15);
    }

    #[test]
    fn sigma_x_conjugation_maps_jc_to_counter_rotating() {
        let p = params(8);
        let conj = conjugate_by_sigma_x(&h_eff(&p)).unwrap();
        let direct = h_eff_counter_rotating(p.cutoff, p.delta_b(), -p.delta_q() / 2.0, p.g);
        assert!(conj.max_abs_diff(&direct) <= 1e-12);

        // Matches explicit multiplication, is an involution and keeps the spectrum.
        let sx = CompositeOps::new(p.cutoff).sigma_x;
        let h = h_rabi(&p);
        let explicit = &(&sx * &h) * &sx;
        let conj = conjugate_by_sigma_x(&h).unwrap();
        assert!(conj.max_abs_diff(&explicit) <= 1e-14);
        assert_eq!(conjugate_by_sigma_x(&conj).unwrap(), h);
        let mut a: Vec<f64> = HermitianEigen::new(&h).unwrap().values().iter().copied().collect();
        let mut b: Vec<f64> = HermitianEigen::new(&conj).unwrap().values().iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn conjugation_needs_composite_operator() {
        assert!(conjugate_by_sigma_x(&Operator::identity(4)).is_err());
    }

    #[test]
    fn effective_parameter_map() {
        let cutoff = FockCutoff::new(4).unwrap();
        let g = ghz(COUPLING_GHZ);
        let omega_re = ghz(QUBIT2_GHZ);
        // Δ_b = g/2 with Δ_2Q = 0 gives g/ω_b_eff = 1.
        let p = RabiParams {
            omega_q: ghz(QUBIT1_GHZ),
            omega_b: omega_re + g / 2.0,
            g,
            omega_q1: ghz(QUBIT1_GHZ),
            omega_q2: omega_re,
            omega_re,
            cutoff,
        };
        let eff = effective_params(&p);
        assert!((eff.g_eff / eff.omega_b_eff - 1.0).abs() < 1e-12);
        assert!((eff.omega_q_eff - p.delta_q1()).abs() < 1e-12);

        let degenerate_boson = RabiParams {
            omega_re: p.omega_b,
            ..p.clone()
        };
        assert_eq!(effective_params(&degenerate_boson).omega_b_eff, 0.0);

        let degenerate_qubit = RabiParams {
            omega_q1: p.omega_q2,
            ..p
        };
        assert_eq!(effective_params(&degenerate_qubit).omega_q_eff, 0.0);
    }
}
