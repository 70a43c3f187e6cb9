//! Initial states and the measured quantities: populations, parities, cat overlaps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dissipation::DensityMatrix;
use crate::error::{Error, Result};
use crate::hilbert::{FockCutoff, Operator, StateVector, C64};
use crate::model::CompositeOps;

/// Imaginary residue tolerated in the expectation of a Hermitian observable.
const IMAG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitState {
    E,
    G,
    /// (|e⟩ + |g⟩)/√2
    Plus,
    /// (|e⟩ − |g⟩)/√2
    Minus,
}

impl QubitState {
    /// Amplitudes on (|e⟩, |g⟩).
    pub fn amplitudes(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            QubitState::E => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            QubitState::G => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            QubitState::Plus => [C64::new(h, 0.0), C64::new(h, 0.0)],
            QubitState::Minus => [C64::new(h, 0.0), C64::new(-h, 0.0)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BosonState {
    Vacuum,
    Fock(usize),
    Coherent { re: f64, im: f64 },
}

/// Normalized coherent-state amplitudes `e^{−|α|²/2} αⁿ/√n!` on `0..=n_max`,
/// renormalized after truncation. Returns the amplitudes and the norm lost to truncation.
pub fn coherent_amplitudes(alpha: C64, cutoff: FockCutoff) -> (DVector<C64>, f64) {
    let d = cutoff.boson_dim();
    let mut amps = DVector::zeros(d);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps[0] = c;
    for n in 1..d {
        c = c * alpha / (n as f64).sqrt();
        amps[n] = c;
    }
    let norm = amps.norm();
    (amps.unscale(norm), (1.0 - norm * norm).max(0.0))
}

fn boson_amplitudes(boson: BosonState, cutoff: FockCutoff) -> Result<DVector<C64>> {
    let d = cutoff.boson_dim();
    Ok(match boson {
        BosonState::Vacuum => {
            let mut v = DVector::zeros(d);
            v[0] = C64::new(1.0, 0.0);
            v
        }
        BosonState::Fock(n) => {
            if n > cutoff.n_max() {
                return Err(Error::FockIndexOutOfRange {
                    index: n,
                    n_max: cutoff.n_max(),
                });
            }
            let mut v = DVector::zeros(d);
            v[n] = C64::new(1.0, 0.0);
            v
        }
        BosonState::Coherent { re, im } => {
            let alpha = C64::new(re, im);
            let (amps, lost) = coherent_amplitudes(alpha, cutoff);
            if lost > 1e-12 {
                log::info!(
                    "coherent state alpha = {alpha} truncated at n_max = {}: renormalized away {lost:.3e} of the norm",
                    cutoff.n_max()
                );
            }
            amps
        }
    })
}

/// Product state `|qubit⟩ ⊗ |boson⟩`.
pub fn initial_state(qubit: QubitState, boson: BosonState, cutoff: FockCutoff) -> Result<StateVector> {
    let q = DVector::from_row_slice(&qubit.amplitudes());
    let b = boson_amplitudes(boson, cutoff)?;
    StateVector::normalized(q.kronecker(&b), Some(cutoff))
}

/// States that support `⟨O⟩`.
pub trait Expectation {
    fn dim(&self) -> usize;
    /// `⟨ψ|O|ψ⟩` or `tr(Oρ)` without any Hermiticity check.
    fn raw_expectation(&self, obs: &DMatrix<C64>) -> C64;
    /// Population of each composite basis state.
    fn populations(&self) -> Vec<f64>;
}

impl Expectation for StateVector {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    fn raw_expectation(&self, obs: &DMatrix<C64>) -> C64 {
        self.amplitudes().dotc(&(obs * self.amplitudes()))
    }

    fn populations(&self) -> Vec<f64> {
        self.amplitudes().iter().map(|a| a.norm_sqr()).collect()
    }
}

impl Expectation for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn raw_expectation(&self, obs: &DMatrix<C64>) -> C64 {
        // tr(Oρ) = Σ_ij O_ij ρ_ji
        let rho = self.matrix();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..rho.ncols() {
            for i in 0..rho.nrows() {
                acc += obs[(i, j)] * rho[(j, i)];
            }
        }
        acc
    }

    fn populations(&self) -> Vec<f64> {
        self.matrix().diagonal().iter().map(|z| z.re).collect()
    }
}

/// Real expectation value of a Hermitian observable.
pub fn expectation<S: Expectation + ?Sized>(state: &S, obs: &Operator) -> Result<f64> {
    if obs.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: obs.dim(),
        });
    }
    obs.ensure_hermitian()?;
    let value = state.raw_expectation(obs.matrix());
    let scale = obs.max_abs().max(1.0);
    if value.im.abs() > IMAG_TOL * scale {
        return Err(Error::InvariantViolation(format!(
            "expectation has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parity {
    /// ⟨σ_z⊗I⟩
    pub atom: f64,
    /// ⟨I⊗(−1)^{b†b}⟩
    pub photon: f64,
}

/// Atom and photon-number parities; both are diagonal so only populations are needed.
pub fn parity<S: Expectation + ?Sized>(state: &S, cutoff: FockCutoff) -> Result<Parity> {
    if state.dim() != cutoff.composite_dim() {
        return Err(Error::DimensionMismatch {
            expected: cutoff.composite_dim(),
            found: state.dim(),
        });
    }
    let d = cutoff.boson_dim();
    let mut atom = 0.0;
    let mut photon = 0.0;
    for (i, p) in state.populations().into_iter().enumerate() {
        atom += if i < d { p } else { -p };
        photon += if (i % d) % 2 == 0 { p } else { -p };
    }
    Ok(Parity { atom, photon })
}

/// ⟨σ_z ⊗ (−1)^{b†b}⟩
pub fn total_parity<S: Expectation + ?Sized>(state: &S, cutoff: FockCutoff) -> Result<f64> {
    let d = cutoff.boson_dim();
    if state.dim() != cutoff.composite_dim() {
        return Err(Error::DimensionMismatch {
            expected: cutoff.composite_dim(),
            found: state.dim(),
        });
    }
    Ok(state
        .populations()
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let qubit = if i < d { 1.0 } else { -1.0 };
            let photon = if (i % d) % 2 == 0 { 1.0 } else { -1.0 };
            qubit * photon * p
        })
        .sum())
}

/// Population of the top Fock level `|n_max⟩` summed over the qubit.
pub fn leakage<S: Expectation + ?Sized>(state: &S, cutoff: FockCutoff) -> f64 {
    let pops = state.populations();
    let top = cutoff.n_max();
    pops[cutoff.index(0, top)] + pops[cutoff.index(1, top)]
}

/// The plotted observables at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Snapshot {
    /// ⟨b†b⟩
    pub photons: f64,
    /// ⟨σ⁺σ⁻⟩
    pub excited: f64,
    pub atom_parity: f64,
    pub photon_parity: f64,
    pub leakage: f64,
}

/// Populations-only observables for a composite state (all of them are diagonal).
pub fn snapshot<S: Expectation + ?Sized>(state: &S, cutoff: FockCutoff) -> Result<Snapshot> {
    if state.dim() != cutoff.composite_dim() {
        return Err(Error::DimensionMismatch {
            expected: cutoff.composite_dim(),
            found: state.dim(),
        });
    }
    let d = cutoff.boson_dim();
    let pops = state.populations();
    let photons = pops.iter().enumerate().map(|(i, p)| (i % d) as f64 * p).sum();
    let excited = pops[..d].iter().sum();
    let par = parity(state, cutoff)?;
    Ok(Snapshot {
        photons,
        excited,
        atom_parity: par.atom,
        photon_parity: par.photon,
        leakage: leakage(state, cutoff),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatParity {
    Even,
    Odd,
}

/// Normalized `|α⟩ ± |−α⟩` on the truncated boson space.
pub fn cat_state(alpha: C64, sign: CatParity, cutoff: FockCutoff) -> Result<DVector<C64>> {
    let (plus, _) = coherent_amplitudes(alpha, cutoff);
    let (minus, _) = coherent_amplitudes(-alpha, cutoff);
    let v = match sign {
        CatParity::Even => plus + minus,
        CatParity::Odd => plus - minus,
    };
    let norm = v.norm();
    if norm < 1e-12 {
        return Err(Error::ZeroNorm("building the odd cat state at alpha = 0"));
    }
    Ok(v.unscale(norm))
}

/// `|⟨cat±(α)|φ⟩|²` where `φ` is the boson state left after projecting the qubit onto
/// `project_onto` and renormalizing.
pub fn cat_overlap(
    state: &StateVector,
    alpha: C64,
    sign: CatParity,
    project_onto: QubitState,
) -> Result<f64> {
    let cutoff = state.cutoff().ok_or(Error::InvalidParameter(
        "cat overlap needs a composite state".into(),
    ))?;
    let d = cutoff.boson_dim();
    let q = project_onto.amplitudes();
    let amps = state.amplitudes();
    let conditional = DVector::from_fn(d, |n, _| q[0].conj() * amps[n] + q[1].conj() * amps[d + n]);
    let norm = conditional.norm();
    if norm < 1e-12 {
        return Err(Error::ZeroNorm("projecting the qubit"));
    }
    let cat = cat_state(alpha, sign, cutoff)?;
    Ok((cat.dotc(&conditional) / norm).norm_sqr())
}

/// Composite observables used by the runner, built once per cutoff.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    /// I⊗b†b
    pub photons: Operator,
    /// σ⁺σ⁻⊗I
    pub excited: Operator,
}

impl ObservableSet {
    pub fn new(cutoff: FockCutoff) -> Self {
        let ops = CompositeOps::new(cutoff);
        ObservableSet {
            excited: &ops.sigma_plus * &ops.sigma_minus,
            photons: ops.n,
        }
    }
}

/// Labeled samples of one observable.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>) -> Self {
        TimeSeries {
            label: label.into(),
            points: Vec::new(),
        }
    }

    /// Appends a point; times must strictly increase and values must be finite.
    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if !value.is_finite() || !t.is_finite() {
            return Err(Error::InvariantViolation(format!(
                "{}: non-finite sample ({t}, {value})",
                self.label
            )));
        }
        if let Some(&(last, _)) = self.points.last() {
            if t <= last {
                return Err(Error::InvariantViolation(format!(
                    "{}: time {t} does not increase past {last}",
                    self.label
                )));
            }
        }
        self.points.push((t, value));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, v)| v)
    }

    /// Time of the first sample that is a local maximum (strictly above its
    /// predecessor, not below its successor) and at least `min_rise` above the
    /// running minimum before it.
    pub fn first_peak(&self, min_rise: f64) -> Option<f64> {
        let p = &self.points;
        let mut low = f64::INFINITY;
        for i in 1..p.len().saturating_sub(1) {
            low = low.min(p[i - 1].1);
            let v = p[i].1;
            if v > p[i - 1].1 && v >= p[i + 1].1 && v - low >= min_rise {
                return Some(p[i].0);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    #[test]
    fn product_states() {
        let c = cut(4);
        let s = initial_state(QubitState::E, BosonState::Vacuum, c).unwrap();
        assert_eq!(s.amplitudes()[c.index(0, 0)], C64::new(1.0, 0.0));
        assert!((s.norm() - 1.0).abs() < 1e-15);

        let s = initial_state(QubitState::Plus, BosonState::Vacuum, c).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[c.index(0, 0)].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[c.index(1, 0)].re - h).abs() < 1e-15);

        assert!(matches!(
            initial_state(QubitState::G, BosonState::Fock(5), c),
            Err(Error::FockIndexOutOfRange { index: 5, n_max: 4 })
        ));
    }

    #[test]
    fn coherent_photon_number() {
        // Oracle: direct sum Σ n |c_n|² of the untruncated amplitudes.
        let alpha = 2.0f64;
        let mut c = (-alpha * alpha / 2.0).exp();
        let mut mean = 0.0;
        let mut total = c * c;
        for n in 1..=30 {
            c *= alpha / (n as f64).sqrt();
            mean += n as f64 * c * c;
            total += c * c;
        }
        let oracle = mean / total;
        assert!((oracle - 4.0).abs() < 1e-6);

        let c30 = cut(30);
        let s = initial_state(QubitState::G, BosonState::Coherent { re: 2.0, im: 0.0 }, c30).unwrap();
        let n = expectation(&s, &ObservableSet::new(c30).photons).unwrap();
        assert!((n - oracle).abs() < 1e-12);
        assert!((n - 4.0).abs() < 1e-6);
    }

    #[test]
    fn basic_expectations() {
        let c = cut(3);
        let obs = ObservableSet::new(c);
        let e0 = initial_state(QubitState::E, BosonState::Vacuum, c).unwrap();
        assert_eq!(expectation(&e0, &obs.excited).unwrap(), 1.0);
        let g0 = initial_state(QubitState::G, BosonState::Vacuum, c).unwrap();
        assert_eq!(expectation(&g0, &obs.photons).unwrap(), 0.0);
        let rho = DensityMatrix::from_pure(&e0);
        assert_eq!(expectation(&rho, &obs.excited).unwrap(), 1.0);
        let b = CompositeOps::new(c).b;
        assert!(matches!(expectation(&e0, &b), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expectation_is_linear() {
        let c = cut(5);
        let obs = ObservableSet::new(c);
        let s = initial_state(QubitState::Minus, BosonState::Coherent { re: 0.8, im: -0.4 }, c).unwrap();
        let combo = &obs.photons.scale(2.5) + &obs.excited.scale(-0.75);
        let lhs = expectation(&s, &combo).unwrap();
        let rhs = 2.5 * expectation(&s, &obs.photons).unwrap() - 0.75 * expectation(&s, &obs.excited).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn parities_of_basis_states() {
        let c = cut(4);
        let e0 = initial_state(QubitState::E, BosonState::Vacuum, c).unwrap();
        assert_eq!(parity(&e0, c).unwrap(), Parity { atom: 1.0, photon: 1.0 });
        let g1 = initial_state(QubitState::G, BosonState::Fock(1), c).unwrap();
        assert_eq!(parity(&g1, c).unwrap(), Parity { atom: -1.0, photon: -1.0 });
        assert_eq!(total_parity(&g1, c).unwrap(), 1.0);
        // Cross-check against the operator route.
        let p = crate::model::parity_operator(c);
        assert_eq!(expectation(&g1, &p).unwrap(), 1.0);
    }

    #[test]
    fn snapshot_and_leakage() {
        let c = cut(3);
        let top = initial_state(QubitState::G, BosonState::Fock(3), c).unwrap();
        let s = snapshot(&top, c).unwrap();
        assert_eq!(s.photons, 3.0);
        assert_eq!(s.excited, 0.0);
        assert_eq!(s.leakage, 1.0);
        assert_eq!(s.photon_parity, -1.0);
    }

    #[test]
    fn cat_overlaps() {
        let c = cut(30);
        let alpha = C64::new(1.5, 0.5);
        // |g⟩ ⊗ cat₊ built analytically.
        let cat = cat_state(alpha, CatParity::Even, c).unwrap();
        let mut amps = DVector::zeros(c.composite_dim());
        amps.rows_mut(c.boson_dim(), c.boson_dim()).copy_from(&cat);
        let s = StateVector::normalized(amps, Some(c)).unwrap();
        let ov = cat_overlap(&s, alpha, CatParity::Even, QubitState::G).unwrap();
        assert!((ov - 1.0).abs() < 1e-12);
        // Orthogonal parity sector.
        let ov = cat_overlap(&s, alpha, CatParity::Odd, QubitState::G).unwrap();
        assert!(ov < 1e-20);
        // Nothing left after projecting onto |e⟩.
        assert!(matches!(
            cat_overlap(&s, alpha, CatParity::Even, QubitState::E),
            Err(Error::ZeroNorm(_))
        ));

        // cat₊(0) = |0⟩.
        let vac = initial_state(QubitState::E, BosonState::Vacuum, c).unwrap();
        let ov = cat_overlap(&vac, C64::new(0.0, 0.0), CatParity::Even, QubitState::E).unwrap();
        assert!((ov - 1.0).abs() < 1e-14);
        assert!(cat_state(C64::new(0.0, 0.0), CatParity::Odd, c).is_err());
    }

    #[test]
    fn time_series_rules() {
        let mut ts = TimeSeries::new("n");
        ts.push(0.0, 1.0).unwrap();
        assert!(ts.push(0.0, 2.0).is_err());
        assert!(ts.push(1.0, f64::NAN).is_err());
        ts.push(1.0, 3.0).unwrap();
        ts.push(2.0, 2.0).unwrap();
        ts.push(3.0, 5.0).unwrap();
        assert_eq!(ts.first_peak(0.5), Some(1.0));
        assert_eq!(ts.first_peak(2.5), None);
        assert_eq!(ts.len(), 4);
    }
}
