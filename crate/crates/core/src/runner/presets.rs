//! Built-in scenarios.

use std::path::PathBuf;

use crate::digitize::Scheme;
use crate::hilbert::FockCutoff;
use crate::model::{ghz, RabiParams, COUPLING_GHZ, QUBIT1_GHZ, QUBIT2_GHZ};
use crate::observables::{BosonState, QubitState};

use super::config::{
    ChannelKind, ChannelSpec, DissipationSpec, InitialSpec, Mode, Ordering, PlanSpec, Scenario,
    SweepSpec, TimeSpec, TimeUnit, DEFAULT_LEAKAGE_THRESHOLD, DEFAULT_SAMPLES,
};

/// Other names accepted by [`preset`].
const ALIASES: &[(&str, &str)] = &[("fig5_left", "fig5_dsc")];

/// Physical parameters with the rotating frame on the second qubit frequency,
/// giving `ω_b_eff = omega_b_eff` and `g_eff = 2π·1.79 GHz`.
///
/// `degenerate` puts both steps at the same qubit frequency, so `ω_q_eff = 0`.
pub fn device_params(omega_b_eff: f64, degenerate: bool, n_max: usize) -> RabiParams {
    let re = ghz(QUBIT2_GHZ);
    let q1 = if degenerate { re } else { ghz(QUBIT1_GHZ) };
    RabiParams {
        omega_q: q1,
        omega_b: re + omega_b_eff / 2.0,
        g: ghz(COUPLING_GHZ),
        omega_q1: q1,
        omega_q2: re,
        omega_re: re,
        cutoff: FockCutoff::new(n_max).expect("preset cutoff"),
    }
}

fn scenario(name: &str, description: &str, mode: Mode, params: RabiParams) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        mode,
        n_samples: DEFAULT_SAMPLES,
        leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
        outputs: PathBuf::from("out"),
        params,
        plan: PlanSpec {
            schemes: vec![Scheme::General],
            steps: (1..=64).collect(),
            ordering: Ordering::JcFirst,
        },
        initial: InitialSpec {
            qubit: QubitState::E,
            boson: BosonState::Vacuum,
        },
        time: TimeSpec {
            unit: TimeUnit::Periods,
            values: vec![1.0],
        },
        dissipation: None,
        sweep: None,
    }
}

fn compare(name: &str, description: &str, f_b: f64, degenerate: bool, schemes: Vec<Scheme>) -> Scenario {
    let mut s = scenario(name, description, Mode::Compare, device_params(ghz(f_b), degenerate, 100));
    s.plan.schemes = schemes;
    s.plan.steps = vec![32, 64, 128, 256];
    s.time = TimeSpec {
        unit: TimeUnit::Ns,
        values: vec![1.0],
    };
    if degenerate {
        s.initial.qubit = QubitState::G;
    }
    s
}

fn all() -> Vec<Scenario> {
    let g = ghz(COUPLING_GHZ);

    let mut fig1_upper = scenario(
        "fig1_upper",
        "Overlap vs Trotter steps, g = omega_b, one and two effective periods",
        Mode::FidelityScan,
        device_params(g, false, 50),
    );
    fig1_upper.time.values = vec![1.0, 2.0];

    let mut fig1_lower = fig1_upper.clone();
    fig1_lower.name = "fig1_lower".into();
    fig1_lower.description = "Overlap vs Trotter steps, g = omega_b, quarter and half period".into();
    fig1_lower.time.values = vec![0.25, 0.5];

    let mut fig2 = fig1_upper.clone();
    fig2.name = "fig2_ordering".into();
    fig2.description = "As fig1_upper with the anti-JC factor applied first".into();
    fig2.plan.ordering = Ordering::AjcFirst;

    let mut fig3 = scenario(
        "fig3_ratio_scan",
        "Overlap vs Trotter steps across coupling ratios, both schemes, fixed 0.5 ns",
        Mode::FidelityScan,
        device_params(g, false, 50),
    );
    fig3.plan.schemes = vec![Scheme::General, Scheme::Symmetrized];
    fig3.time = TimeSpec {
        unit: TimeUnit::Ns,
        values: vec![0.5],
    };
    fig3.sweep = Some(SweepSpec {
        g_over_omega_b: vec![2.67, 1.19, 0.62],
    });

    let fig4 = compare(
        "fig4_degenerate",
        "Degenerate qubit (omega_q = 0): exact vs digital photon number and excitation",
        COUPLING_GHZ,
        true,
        vec![Scheme::General, Scheme::Symmetrized],
    );
    let fig5_dsc = compare(
        "fig5_dsc",
        "Deep strong coupling, g/omega_b = 2.67, general scheme",
        0.67,
        false,
        vec![Scheme::General],
    );
    let fig5_right = compare(
        "fig5_right",
        "g/omega_b = 1.19, symmetrized scheme",
        1.5,
        false,
        vec![Scheme::Symmetrized],
    );
    let fig6 = compare(
        "fig6_usc",
        "Ultrastrong coupling, g/omega_b = 0.62, general scheme",
        2.9,
        false,
        vec![Scheme::General],
    );

    let mut degenerate = scenario(
        "degenerate",
        "Exact degenerate dynamics from |g,0> over one period",
        Mode::EvolveExact,
        device_params(g, true, 60),
    );
    degenerate.initial.qubit = QubitState::G;
    degenerate.plan.steps = vec![];

    let mut lindblad = scenario(
        "lindblad_decay",
        "Degenerate model with photon loss and qubit relaxation, gamma = 1/ns",
        Mode::EvolveLindblad,
        device_params(g, true, 20),
    );
    lindblad.initial.qubit = QubitState::G;
    lindblad.plan.steps = vec![];
    lindblad.n_samples = 201;
    lindblad.dissipation = Some(DissipationSpec {
        gamma: 1.0,
        channels: vec![
            ChannelSpec {
                kind: ChannelKind::PhotonLoss,
                gamma: None,
            },
            ChannelSpec {
                kind: ChannelKind::QubitRelaxation,
                gamma: None,
            },
        ],
        dt: None,
    });

    vec![
        fig1_upper, fig1_lower, fig2, fig3, fig4, fig5_dsc, fig5_right, fig6, degenerate, lindblad,
    ]
}

/// `(name, description)` for every preset, in a fixed order.
pub fn list_presets() -> Vec<(String, String)> {
    all().into_iter().map(|s| (s.name, s.description)).collect()
}

pub fn preset(name: &str) -> Option<Scenario> {
    let name = ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map_or(name, |(_, target)| target);
    all().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::effective_params;

    #[test]
    fn presets_validate_and_round_trip() {
        let names = list_presets();
        assert!(names.len() >= 8);
        for (name, _) in names {
            let s = preset(&name).unwrap();
            s.validate().unwrap();
            assert_eq!(Scenario::from_toml(&s.to_toml().unwrap()).unwrap(), s);
        }
    }

    #[test]
    fn alias_resolves() {
        assert_eq!(preset("fig5_left").unwrap().name, "fig5_dsc");
        assert!(preset("nope").is_none());
    }

    #[test]
    fn device_params_hit_targets() {
        let g = ghz(COUPLING_GHZ);
        let e = effective_params(&device_params(ghz(0.67), false, 10));
        assert!((e.g_eff / e.omega_b_eff - 1.79 / 0.67).abs() < 1e-12);
        assert!((e.omega_q_eff - ghz(QUBIT1_GHZ - QUBIT2_GHZ)).abs() < 1e-9);
        let e = effective_params(&device_params(g, true, 10));
        assert_eq!(e.omega_q_eff, 0.0);
        assert!((e.omega_b_eff - g).abs() < 1e-12);
    }
}
