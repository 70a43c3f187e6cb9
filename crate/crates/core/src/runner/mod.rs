//! Scenario execution: builds the simulated-frame Hamiltonians, runs the
//! requested mode and collects the results as CSV tables.

pub mod config;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};

use log::{info, warn};

use crate::digitize::{fidelity, Scheme, Trotterizer};
use crate::dissipation::{default_dt, evolve_master_with, Channel, DensityMatrix, LindbladSpec};
use crate::error::{Error, Result};
use crate::hilbert::{spectral_norm, HermitianEigen, Operator, StateVector};
use crate::model::{effective_params, h_ajc, h_jc, simulation_params, CompositeOps, RabiParams};
use crate::observables::{initial_state, snapshot, BosonState, Snapshot};

pub use config::{Mode, Ordering, Scenario};
pub use output::Table;
pub use presets::{list_presets, preset};

/// Slack allowed in `lower_bound ≤ overlap ≤ 1`.
pub const CHAIN_SLACK: f64 = 1e-9;

/// Environment variable that overrides the scenario's output directory.
pub const OUT_DIR_ENV: &str = "QRABI_OUT_DIR";

#[derive(Clone, Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub tables: Vec<Table>,
}

impl RunReport {
    pub fn reference_leakage_exceeded(&self) -> bool {
        self.tables.iter().any(Table::reference_leakage_exceeded)
    }
}

/// `explicit`, else `$QRABI_OUT_DIR`, else the scenario's `outputs`.
pub fn resolve_out_dir(scenario: &Scenario, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => scenario.outputs.clone(),
    }
}

/// Computes every table of a scenario and writes them to `out_dir`.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    let tables = execute(scenario)?;
    let mut files = Vec::with_capacity(tables.len());
    for table in &tables {
        if table.leakage_exceeded() {
            warn!(
                "{}: top Fock level population {:.3e} exceeds {:.1e}; raise n_max",
                table.file_name, table.max_leakage, table.leakage_threshold
            );
        }
        let path = table.write(out_dir)?;
        info!("wrote {}", path.display());
        files.push(path);
    }
    Ok(RunReport {
        files,
        tables,
    })
}

/// Computes every table of a scenario without touching the filesystem.
pub fn execute(scenario: &Scenario) -> Result<Vec<Table>> {
    scenario.validate()?;
    let params = scenario.resolved_params();
    let sweep = scenario.sweep.as_ref().map(|s| s.g_over_omega_b.clone());
    let mut tables = Vec::new();
    for (k, p) in params.iter().enumerate() {
        let variant = Variant {
            scenario,
            params: p,
            sim: simulation_params(p),
            ratio: sweep.as_ref().map(|r| r[k]),
        };
        match scenario.mode {
            Mode::FidelityScan => {
                for &value in &scenario.time.values {
                    for &scheme in &scenario.plan.schemes {
                        tables.push(variant.fidelity_scan(scheme, value)?);
                    }
                }
            }
            Mode::EvolveExact => tables.push(variant.evolve_exact()?),
            Mode::EvolveTrotter => {
                for &scheme in &scenario.plan.schemes {
                    for &l in &scenario.plan.steps {
                        tables.push(variant.evolve_trotter(scheme, l)?);
                    }
                }
            }
            Mode::EvolveLindblad => tables.push(variant.evolve_lindblad()?),
            Mode::Compare => {
                for &scheme in &scenario.plan.schemes {
                    tables.push(variant.compare(scheme)?);
                }
            }
        }
    }
    Ok(tables)
}

const SNAPSHOT_COLUMNS: [&str; 5] = ["n_photon", "p_excited", "atom_parity", "photon_parity", "leakage"];

fn snapshot_values(s: &Snapshot) -> [f64; 5] {
    [s.photons, s.excited, s.atom_parity, s.photon_parity, s.leakage]
}

/// One parameter set of a scenario (one entry of a ratio sweep).
struct Variant<'a> {
    scenario: &'a Scenario,
    params: &'a RabiParams,
    sim: RabiParams,
    ratio: Option<f64>,
}

impl Variant<'_> {
    fn cutoff(&self) -> crate::hilbert::FockCutoff {
        self.params.cutoff
    }

    fn stem(&self) -> String {
        match self.ratio {
            Some(r) => format!("{}_r{}", self.scenario.name, r),
            None => self.scenario.name.clone(),
        }
    }

    /// Split terms, leftmost factor first.
    fn terms(&self) -> Vec<Operator> {
        let (jc, ajc) = (h_jc(&self.sim), h_ajc(&self.sim));
        match self.scenario.plan.ordering {
            Ordering::JcFirst => vec![jc, ajc],
            Ordering::AjcFirst => vec![ajc, jc],
        }
    }

    fn hamiltonian(&self) -> Operator {
        h_jc(&self.sim) + h_ajc(&self.sim)
    }

    fn psi0(&self) -> Result<StateVector> {
        let init = &self.scenario.initial;
        if let BosonState::Coherent { re, im } = init.boson {
            let (_, lost) = crate::observables::coherent_amplitudes(
                crate::hilbert::C64::new(re, im),
                self.cutoff(),
            );
            if lost > self.scenario.leakage_threshold {
                warn!("coherent initial state loses {lost:.3e} of its norm to the cutoff");
            }
        }
        initial_state(init.qubit, init.boson, self.cutoff())
    }

    fn total_time(&self, value: f64) -> f64 {
        self.scenario.total_time(self.params, value)
    }

    fn sample_times(&self, total_time: f64) -> Vec<f64> {
        let n = self.scenario.n_samples;
        (0..n)
            .map(|k| total_time * k as f64 / (n - 1) as f64)
            .collect()
    }

    fn table(&self, file_name: String, columns: Vec<String>, total_time: f64) -> Table {
        let s = self.scenario;
        let p = self.params;
        let eff = effective_params(p);
        let mut t = Table::new(file_name, columns, s.leakage_threshold);
        t.meta("generator", format!("qrabi {}", env!("CARGO_PKG_VERSION")));
        t.meta("scenario", &s.name);
        if !s.description.is_empty() {
            t.meta("description", &s.description);
        }
        t.meta("mode", s.mode.as_str());
        t.meta("units", "rad/ns, ns");
        if let Some(r) = self.ratio {
            t.meta("g_over_omega_b", r);
        }
        for (k, v) in [
            ("omega_q", p.omega_q),
            ("omega_b", p.omega_b),
            ("g", p.g),
            ("omega_q1", p.omega_q1),
            ("omega_q2", p.omega_q2),
            ("omega_re", p.omega_re),
            ("g_eff", eff.g_eff),
            ("omega_b_eff", eff.omega_b_eff),
            ("omega_q_eff", eff.omega_q_eff),
        ] {
            t.meta(k, output::fmt_num(v));
        }
        t.meta("n_max", p.cutoff.n_max());
        t.meta(
            "initial",
            format!("qubit={:?} boson={:?}", s.initial.qubit, s.initial.boson).to_lowercase(),
        );
        t.meta("ordering", s.plan.ordering.as_str());
        t.meta("total_time", output::fmt_num(total_time));
        t
    }

    fn fidelity_scan(&self, scheme: Scheme, value: f64) -> Result<Table> {
        let total_time = self.total_time(value);
        let terms = self.terms();
        let commutator = spectral_norm(&terms[0].commutator(&terms[1]));
        let trotter = Trotterizer::new(&terms)?;
        let exact = HermitianEigen::new(&self.hamiltonian())?.propagator(total_time);
        let psi0 = self.psi0()?;
        let reference = exact.apply(&psi0)?;
        let ref_leak = crate::observables::leakage(&reference, self.cutoff());

        let tag = match self.scenario.time.unit {
            config::TimeUnit::Ns => format!("T{value}ns"),
            config::TimeUnit::Periods => format!("wT{value}"),
        };
        let columns = ["l", "overlap", "lower_bound", "norm_error", "error_estimate"]
            .map(String::from)
            .to_vec();
        let mut table = self.table(
            format!("{}_{}_{}.csv", self.stem(), scheme, tag),
            columns,
            total_time,
        );
        table.meta("scheme", scheme);
        table.meta("error_estimate", "first-order commutator estimate |[H1,H2]| T^2 / 2l");
        table.meta("time_value", format!("{value} {:?}", self.scenario.time.unit).to_lowercase());
        table.note_leakage(ref_leak, true);
        for &l in &self.scenario.plan.steps {
            let approx = trotter.propagator(scheme, l, total_time);
            let report = fidelity(&exact, &approx, &psi0)?;
            if !report.chain_holds(CHAIN_SLACK) {
                return Err(Error::InvariantViolation(format!(
                    "{} l = {l}: fidelity chain broken (lower bound {}, overlap {})",
                    table.file_name, report.lower_bound, report.overlap
                )));
            }
            let estimate = commutator * total_time * total_time / (2.0 * l as f64);
            table.note_leakage(crate::observables::leakage(&approx.apply(&psi0)?, self.cutoff()), false);
            table.push_row(vec![l as f64, report.overlap, report.lower_bound, report.norm_error, estimate])?;
        }
        Ok(table)
    }

    fn evolve_exact(&self) -> Result<Table> {
        let total_time = self.total_time(self.scenario.time.values[0]);
        let eig = HermitianEigen::new(&self.hamiltonian())?;
        let psi0 = self.psi0()?;
        let columns = std::iter::once("t")
            .chain(SNAPSHOT_COLUMNS)
            .map(String::from)
            .collect();
        let mut table = self.table(format!("{}_exact.csv", self.stem()), columns, total_time);
        for t in self.sample_times(total_time) {
            let s = snapshot(&eig.evolve(t, &psi0)?, self.cutoff())?;
            table.note_leakage(s.leakage, true);
            let mut row = vec![t];
            row.extend(snapshot_values(&s));
            table.push_row(row)?;
        }
        Ok(table)
    }

    fn evolve_trotter(&self, scheme: Scheme, l: usize) -> Result<Table> {
        let total_time = self.total_time(self.scenario.time.values[0]);
        let trotter = Trotterizer::new(&self.terms())?;
        let psi0 = self.psi0()?;
        let columns = std::iter::once("t")
            .chain(SNAPSHOT_COLUMNS)
            .map(String::from)
            .collect();
        let mut table = self.table(
            format!("{}_{}_l{}.csv", self.stem(), scheme, l),
            columns,
            total_time,
        );
        table.meta("scheme", scheme);
        table.meta("steps", l);
        for t in self.sample_times(total_time) {
            let s = snapshot(&trotter.evolve(scheme, l, t, &psi0)?, self.cutoff())?;
            table.note_leakage(s.leakage, false);
            let mut row = vec![t];
            row.extend(snapshot_values(&s));
            table.push_row(row)?;
        }
        Ok(table)
    }

    fn compare(&self, scheme: Scheme) -> Result<Table> {
        let total_time = self.total_time(self.scenario.time.values[0]);
        let eig = HermitianEigen::new(&self.hamiltonian())?;
        let trotter = Trotterizer::new(&self.terms())?;
        let psi0 = self.psi0()?;
        let steps = &self.scenario.plan.steps;
        let mut columns = vec!["t".to_string()];
        let prefixes: Vec<String> = std::iter::once("exact".to_string())
            .chain(steps.iter().map(|l| format!("l{l}")))
            .collect();
        for prefix in &prefixes {
            for c in &SNAPSHOT_COLUMNS[..4] {
                columns.push(format!("{prefix}_{c}"));
            }
        }
        let mut table = self.table(
            format!("{}_compare_{}.csv", self.stem(), scheme),
            columns,
            total_time,
        );
        table.meta("scheme", scheme);
        table.meta(
            "steps",
            steps.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "),
        );
        for t in self.sample_times(total_time) {
            let mut row = vec![t];
            let s = snapshot(&eig.evolve(t, &psi0)?, self.cutoff())?;
            table.note_leakage(s.leakage, true);
            row.extend(&snapshot_values(&s)[..4]);
            for &l in steps {
                let s = snapshot(&trotter.evolve(scheme, l, t, &psi0)?, self.cutoff())?;
                table.note_leakage(s.leakage, false);
                row.extend(&snapshot_values(&s)[..4]);
            }
            table.push_row(row)?;
        }
        Ok(table)
    }

    fn evolve_lindblad(&self) -> Result<Table> {
        let total_time = self.total_time(self.scenario.time.values[0]);
        let diss = self
            .scenario
            .dissipation
            .as_ref()
            .ok_or_else(|| Error::Config("missing dissipation table".into()))?;
        let ops = CompositeOps::new(self.cutoff());
        let channels: Vec<Channel> = diss
            .channels
            .iter()
            .map(|c| Channel {
                operator: match c.kind {
                    config::ChannelKind::PhotonLoss => ops.b.clone(),
                    config::ChannelKind::QubitRelaxation => ops.sigma_minus.clone(),
                },
                gamma: c.gamma.unwrap_or(diss.gamma),
            })
            .collect();
        let hamiltonian = self.hamiltonian();
        let target_dt = diss.dt.unwrap_or_else(|| default_dt(&hamiltonian, &channels));
        let interval = total_time / (self.scenario.n_samples - 1) as f64;
        let per_sample = (interval / target_dt).ceil().max(1.0) as usize;
        let spec = LindbladSpec {
            hamiltonian,
            channels,
            t_span: (0.0, total_time),
            dt: interval / per_sample as f64,
            sample_every: per_sample,
        };
        let rho0 = DensityMatrix::from_pure(&self.psi0()?);

        let columns = std::iter::once("t")
            .chain(SNAPSHOT_COLUMNS)
            .chain(["trace", "purity"])
            .map(String::from)
            .collect();
        let mut table = self.table(format!("{}_lindblad.csv", self.stem()), columns, total_time);
        table.meta("dt", output::fmt_num(spec.dt));
        for c in &diss.channels {
            table.meta(
                &format!("gamma_{}", c.kind.as_str()),
                output::fmt_num(c.gamma.unwrap_or(diss.gamma)),
            );
        }
        let cutoff = self.cutoff();
        let steps = evolve_master_with(&rho0, &spec, |t, rho| {
            let s = snapshot(rho, cutoff)?;
            table.note_leakage(s.leakage, true);
            let mut row = vec![t];
            row.extend(snapshot_values(&s));
            row.push(rho.trace().re);
            row.push(rho.purity());
            table.push_row(row)
        })?;
        info!("{}: {steps} RK4 steps", table.file_name);
        if table.rows.len() != self.scenario.n_samples {
            return Err(Error::InvariantViolation(format!(
                "expected {} samples, integrator produced {}",
                self.scenario.n_samples,
                table.rows.len()
            )));
        }
        Ok(table)
    }
}
