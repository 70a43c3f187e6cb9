//! Library results checked against independent reference computations.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use qrabi::digitize::{
    exact_propagator, trotter_error_bound, trotterize, Scheme, TrotterPlan, Trotterizer,
};
use qrabi::dissipation::{evolve_master, unitary_conjugate, DensityMatrix, LindbladSpec};
use qrabi::hilbert::{
    annihilation, expm_hermitian, spectral_norm, FockCutoff, HermitianEigen, Operator,
};
use qrabi::model::{h_ajc, h_jc, h_rabi, RabiParams};
use qrabi::observables::{
    cat_overlap, initial_state, total_parity, BosonState, CatParity, QubitState,
};
use qrabi::C64;

fn cut(n: usize) -> FockCutoff {
    FockCutoff::new(n).unwrap()
}

fn params(n_max: usize, omega_q: f64, omega_b: f64, g: f64) -> RabiParams {
    RabiParams {
        omega_q,
        omega_b,
        g,
        omega_q1: omega_q,
        omega_q2: 0.0,
        omega_re: 0.0,
        cutoff: cut(n_max),
    }
}

/// Deterministic dense Hermitian test matrix.
fn hermitian(n: usize, seed: f64) -> Operator {
    let a = DMatrix::from_fn(n, n, |i, j| {
        let x = (i * n + j) as f64 + seed;
        C64::new((1.3 * x).sin(), (0.7 * x + 0.4).cos())
    });
    Operator::new((&a + a.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

fn taylor_exp(h: &Operator, scale: f64) -> DMatrix<C64> {
    let n = h.dim();
    let x = h.matrix() * C64::new(0.0, -scale);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..120 {
        term = &term * &x / C64::new(k as f64, 0.0);
        sum += &term;
    }
    sum
}

#[test]
fn expm_matches_taylor_series() {
    let h = hermitian(6, 0.3);
    for scale in [0.1, 0.7, 1.5] {
        let u = expm_hermitian(&h, scale).unwrap();
        let reference = taylor_exp(&h, scale);
        let diff = (u.matrix() - reference).camax();
        assert!(diff < 1e-11, "scale {scale}: {diff}");
    }
}

#[test]
fn spectral_norm_matches_power_iteration() {
    let a = DMatrix::from_fn(8, 8, |i, j| {
        C64::new(((3 * i + j) as f64).cos(), ((i * j) as f64 * 0.3).sin())
    });
    let ata = a.adjoint() * &a;
    let mut v = DVector::from_element(8, C64::new(1.0, 0.25));
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let w = &ata * &v;
        lambda = w.norm() / v.norm();
        v = w.unscale(w.norm());
    }
    let op = Operator::new(a).unwrap();
    let s = spectral_norm(&op);
    assert!((s - lambda.sqrt()).abs() < 1e-10 * s, "{s} vs {}", lambda.sqrt());
}

#[test]
fn displaced_oscillator_spectrum() {
    // ω_Q = 0: each σ_x sector is a displaced oscillator with levels nω − g²/ω.
    let (w, g) = (1.0, 0.8);
    let p = params(60, 0.0, w, g);
    let eig = HermitianEigen::new(&h_rabi(&p)).unwrap();
    let mut values: Vec<f64> = eig.values().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    for n in 0..10 {
        let expected = n as f64 * w - g * g / w;
        for k in [2 * n, 2 * n + 1] {
            assert!((values[k] - expected).abs() < 1e-9, "level {k}: {} vs {expected}", values[k]);
        }
    }
}

#[test]
fn single_step_error_matches_commutator_estimate() {
    let p = params(8, 1.0, 1.0, 1.0);
    let terms = vec![h_jc(&p), h_ajc(&p)];
    let h = &terms[0] + &terms[1];
    let t = 1e-3 / spectral_norm(&h);
    let plan = TrotterPlan::new(Scheme::General, 1, terms.clone(), t).unwrap();
    let measured = spectral_norm(&(&trotterize(&plan).unwrap() - &exact_propagator(&h, t).unwrap()));
    let estimate = 0.5 * spectral_norm(&terms[0].commutator(&terms[1])) * t * t;
    assert!((measured / estimate - 1.0).abs() < 1e-2, "{measured} vs {estimate}");
    assert!((trotter_error_bound(&plan).unwrap() - estimate).abs() < 1e-12 * estimate);
}

#[test]
fn error_bound_dominates_measured_error() {
    let p = params(8, 1.0, 1.0, 1.0);
    let terms = vec![h_jc(&p), h_ajc(&p)];
    let h = &terms[0] + &terms[1];
    let t = 0.5 / spectral_norm(&h);
    let exact = exact_propagator(&h, t).unwrap();
    for l in [8, 16, 32] {
        let plan = TrotterPlan::new(Scheme::General, l, terms.clone(), t).unwrap();
        let measured = spectral_norm(&(&trotterize(&plan).unwrap() - &exact));
        let bound = trotter_error_bound(&plan).unwrap();
        assert!(measured <= bound, "l = {l}: {measured} > {bound}");
    }
}

#[test]
fn lindblad_without_channels_is_unitary() {
    let p = params(6, 1.1, 0.9, 0.6);
    let h = h_rabi(&p);
    let psi = initial_state(QubitState::Plus, BosonState::Fock(1), p.cutoff).unwrap();
    let rho0 = DensityMatrix::from_pure(&psi);
    let spec = LindbladSpec::uniform(h.clone(), vec![annihilation(p.cutoff)], 0.0, (0.0, 2.0));
    // A boson-only operator cannot act on the composite space.
    assert!(spec.is_err());
    let mut spec = LindbladSpec::uniform(h.clone(), vec![], 0.0, (0.0, 2.0)).unwrap();
    spec.sample_every = 100;
    let eig = HermitianEigen::new(&h).unwrap();
    for (t, rho) in evolve_master(&rho0, &spec).unwrap() {
        let exact = unitary_conjugate(&rho0, &eig, t);
        let diff = (rho.matrix() - exact.matrix()).camax();
        assert!(diff < 1e-8, "t = {t}: {diff}");
    }
}

#[test]
fn total_parity_is_conserved_along_evolution() {
    let p = params(30, 1.3, 1.0, 0.9);
    let psi = initial_state(QubitState::E, BosonState::Fock(3), p.cutoff).unwrap();
    let p0 = total_parity(&psi, p.cutoff).unwrap();
    assert!((p0.abs() - 1.0).abs() < 1e-14);
    let eig = HermitianEigen::new(&h_rabi(&p)).unwrap();
    let trotter = Trotterizer::new(&[h_jc(&p), h_ajc(&p)]).unwrap();
    for k in 1..=20 {
        let t = 0.2 * k as f64;
        let exact = eig.evolve(t, &psi).unwrap();
        assert!((total_parity(&exact, p.cutoff).unwrap() - p0).abs() < 1e-10);
        let digital = trotter.evolve(Scheme::Symmetrized, 5, t, &psi).unwrap();
        assert!((total_parity(&digital, p.cutoff).unwrap() - p0).abs() < 1e-10);
    }
}

#[test]
fn degenerate_half_period_forms_cat_states() {
    // From |g,0⟩ the two σ_x branches are displaced to ±2g/ω after half a period.
    let (w, g) = (1.0, 1.0);
    let p = params(40, 0.0, w, g);
    let psi = initial_state(QubitState::G, BosonState::Vacuum, p.cutoff).unwrap();
    let state = HermitianEigen::new(&h_rabi(&p)).unwrap().evolve(PI / w, &psi).unwrap();
    let alpha = C64::new(2.0 * g / w, 0.0);
    let even = cat_overlap(&state, alpha, CatParity::Even, QubitState::G).unwrap();
    let odd = cat_overlap(&state, alpha, CatParity::Odd, QubitState::E).unwrap();
    assert!((even - 1.0).abs() < 1e-8, "{even}");
    assert!((odd - 1.0).abs() < 1e-8, "{odd}");
    // Projecting onto |+⟩ leaves a single coherent state: |⟨cat₊|α⟩|² = (1 + e^{−2|α|²})/2.
    let mixed = cat_overlap(&state, alpha, CatParity::Even, QubitState::Plus).unwrap();
    let expected = 0.5 * (1.0 + (-2.0 * alpha.norm_sqr()).exp());
    assert!((mixed - expected).abs() < 1e-8, "{mixed} vs {expected}");
}

#[test]
fn degenerate_photon_number_closed_form() {
    let (w, g) = (1.3, 0.9);
    let p = params(60, 0.0, w, g);
    let psi = initial_state(QubitState::G, BosonState::Vacuum, p.cutoff).unwrap();
    let eig = HermitianEigen::new(&h_rabi(&p)).unwrap();
    let n_op = qrabi::model::CompositeOps::new(p.cutoff).n;
    for k in 0..=50 {
        let t = TAU / w * k as f64 / 50.0;
        let s = eig.evolve(t, &psi).unwrap();
        let n = s.inner(&n_op.apply(&s).unwrap()).re;
        let expected = 4.0 * (g / w).powi(2) * (w * t / 2.0).sin().powi(2);
        assert!((n - expected).abs() < 1e-10, "t = {t}: {n} vs {expected}");
    }
}
