//! One function per experiment kind, each producing a [`ResultTable`].

use std::f64::consts::PI;

use dipolar_spin_core::couplings::{CouplingModel, ResonanceGuard, RingForm};
use dipolar_spin_core::crystal::CrystalSpec;
use dipolar_spin_core::dynamics::{graph_fidelity, graph_state, SpinPhononSystem, SpinState, ThermalSpec};
use dipolar_spin_core::oracle::{evolve_thermal, thermal_initial, OracleOptions, DEFAULT_TAIL_TOLERANCE};
use dipolar_spin_core::ring::{ring_profile, RingDrive};
use dipolar_spin_core::rotor::{
    ac_amplitude_for, find_sweet_spot, linear_window, modulation_depth, stark_map, RotorSpec,
};
use dipolar_spin_core::spinmodel::{adiabatic_sweep, phase_diagram, NamedState, OrderLabel, Schedule, SweepOptions};
use dipolar_spin_core::Error;
use rayon::prelude::*;
use serde_json::json;

use crate::config::*;
use crate::error::{CliError, Context};
use crate::table::{Cell, ResultTable};

/// Half-width of the window around the gate time over which `1 - P` is
/// maximised: one period of the slow beat between the coupled modes.
pub const ENVELOPE_HALF_WIDTH: f64 = 2.0 * PI / 0.2;

pub const COUPLING_UNIT: &str = "D eps^2/(hbar a^3)";
pub const RING_UNIT: &str = "D eps^2/(hbar a^3)";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Only exact poles are rejected.
    pub override_resonance_guard: bool,
}

impl RunOptions {
    fn guard(&self, factor: f64) -> ResonanceGuard {
        if self.override_resonance_guard {
            ResonanceGuard::PoleOnly
        } else {
            ResonanceGuard::Margin(factor)
        }
    }
}

fn check_positive(key: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(key, format!("{v} must be positive")))
    }
}

fn harmonic_model(n: usize, eps: f64, ratio: f64) -> Result<CouplingModel, CliError> {
    CouplingModel::harmonic(&CrystalSpec::harmonic(n, eps).with_dipolar_ratio(ratio))
        .context(|| format!("crystal with N = {n}, epsilon = {eps}"))
}

pub fn run(config: &ExperimentConfig, options: RunOptions) -> Result<ResultTable, CliError> {
    match &config.params {
        Params::CouplingScan(p) => coupling_scan(p, options),
        Params::GraphFidelity(p) => graph_fidelity_scan(p, config.seed, options),
        Params::PurityScan(p) => purity_scan(p, options),
        Params::PhaseDiagram(p) => phase_diagram_scan(p, options),
        Params::Adiabatic(p) => adiabatic(p, options),
        Params::RingProfile(p) => ring_profiles(p, options),
        Params::StarkMap(p) => stark(p),
        Params::RegressAll(p) => Ok(crate::regress::regress_all(p, config.seed)?.table()),
    }
}

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub fn coupling_scan(p: &CouplingScanParams, options: RunOptions) -> Result<ResultTable, CliError> {
    let omegas = grid("omegas", &p.omegas, "omega_min", p.omega_min, p.omega_max, p.omega_step)?;
    let model = harmonic_model(p.n_molecules, p.epsilon, p.dipolar_ratio)?;
    let regions = model.valid_regions(p.margin_factor);
    let guard = options.guard(p.margin_factor);
    let pairs = pairs(p.n_molecules);
    let mut table = ResultTable::new().column("omega", "nu");
    for (i, j) in &pairs {
        table = table.diverging_column(&format!("G_{}{}", i + 1, j + 1), COUPLING_UNIT);
    }
    table = table.diverging_column("G_rms", COUPLING_UNIT).column("valid", "bool");
    let rows: Vec<Vec<Cell>> = omegas
        .par_iter()
        .map(|&w| {
            let valid = model.total(w, guard).is_ok();
            let mut row: Vec<Cell> = vec![w.into()];
            match model.total(w, ResonanceGuard::PoleOnly) {
                Ok(g) => {
                    row.extend(pairs.iter().map(|&(i, j)| Cell::from(g.matrix[(i, j)])));
                    row.push(g.rms.into());
                }
                Err(Error::ResonantDrive { .. }) => {
                    row.extend((0..=pairs.len()).map(|_| Cell::from(f64::NAN)));
                }
                Err(e) => return Err(e).context(|| format!("coupling scan at omega = {w}")),
            }
            row.push(if valid { 1.0 } else { 0.0 }.into());
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    table.rows = rows;
    table.note(
        "valid_regions",
        regions.iter().map(|r| json!([r.lo, r.hi])).collect::<Vec<_>>(),
    );
    table.note("mode_frequencies", model.spectrum.frequencies.clone());
    table.note("coupling_unit_in_nu", model.coupling_unit());
    Ok(table)
}

/// `pi / (4 G_12)` with `G_12` in rates of `nu`.
pub fn gate_time(sys: &SpinPhononSystem) -> Result<f64, CliError> {
    let g12 = sys.effective_couplings()[(0, 1)];
    if g12 == 0.0 {
        return Err(CliError::config("epsilon", "G_12 vanishes, so the gate time is undefined"));
    }
    Ok(PI / (4.0 * g12.abs()))
}

fn time_grid(t_end: f64, omega: f64, per_period: usize) -> Vec<f64> {
    let periods = t_end * omega / (2.0 * PI);
    let count = (periods * per_period as f64).ceil().max(1.0) as usize;
    (0..=count).map(|k| t_end * k as f64 / count as f64).collect()
}

pub fn graph_fidelity_scan(p: &GraphFidelityParams, seed: u64, options: RunOptions) -> Result<ResultTable, CliError> {
    if p.epsilons.is_empty() {
        return Err(CliError::config("epsilons", "empty grid"));
    }
    if p.samples_per_period == 0 {
        return Err(CliError::config("samples_per_period", "must be at least 1"));
    }
    check_positive("gate_fraction_end", p.gate_fraction_end)?;
    if !(p.nbar >= 0.0) {
        return Err(CliError::config("nbar", "must be non-negative"));
    }
    let target = graph_state(p.n_molecules);
    let plus = SpinState::plus(p.n_molecules);
    let mut table = ResultTable::new()
        .column("epsilon", "1")
        .column("t", "1/nu")
        .column("t_over_gate", "1")
        .column("fidelity_closed", "1")
        .diverging_column("fidelity_oracle", "1")
        .column("purity_closed", "1")
        .diverging_column("purity_oracle", "1");
    let mut gates = Vec::new();
    for &eps in &p.epsilons {
        let model = harmonic_model(p.n_molecules, eps, p.dipolar_ratio)?;
        model.total(p.omega, options.guard(p.margin_factor)).context(|| format!("graph-fidelity drive, epsilon = {eps}"))?;
        let sys = SpinPhononSystem::from_model(&model, p.omega).context(|| format!("spin-phonon system, epsilon = {eps}"))?;
        let tg = gate_time(&sys)?;
        gates.push(json!({"epsilon": eps, "t_gate": tg}));
        let times = time_grid(p.gate_fraction_end * tg, p.omega, p.samples_per_period);
        let thermal = ThermalSpec::Occupations(vec![p.nbar; sys.n_modes()]);
        let closed: Vec<(f64, f64)> = times
            .par_iter()
            .map(|t| {
                let rho = sys.reduced_density(&plus, &thermal, *t)?;
                Ok((graph_fidelity(&rho, &target)?, rho.purity()))
            })
            .collect::<dipolar_spin_core::Result<_>>()
            .context(|| format!("closed-form evolution, epsilon = {eps}"))?;
        let oracle: Vec<(f64, f64)> = if p.oracle {
            let opts = OracleOptions { n_max: p.n_max, ..Default::default() };
            let ensemble = thermal_initial(&sys, &thermal, p.n_max, DEFAULT_TAIL_TOLERANCE, p.thermal_samples, seed)
                .context(|| format!("thermal ensemble, epsilon = {eps}"))?;
            let rhos = evolve_thermal(&sys, &plus, &ensemble, &times, &opts)
                .context(|| format!("oracle evolution, epsilon = {eps}"))?;
            rhos.iter()
                .map(|rho| Ok((graph_fidelity(rho, &target)?, rho.purity())))
                .collect::<dipolar_spin_core::Result<_>>()
                .context(|| "oracle fidelity".to_string())?
        } else {
            vec![(f64::NAN, f64::NAN); times.len()]
        };
        for ((t, c), o) in times.iter().zip(&closed).zip(&oracle) {
            table.push(vec![eps.into(), (*t).into(), (t / tg).into(), c.0.into(), o.0.into(), c.1.into(), o.1.into()]);
        }
    }
    table.note("gate_times", gates);
    table.note("nbar", p.nbar);
    Ok(table)
}

/// Largest `1 - P` over `[t_gate - half_width, t_gate + half_width]`.
pub fn purity_envelope(
    sys: &SpinPhononSystem,
    thermal: &ThermalSpec,
    t_gate: f64,
    half_width: f64,
    per_period: usize,
) -> dipolar_spin_core::Result<f64> {
    let lo = (t_gate - half_width).max(0.0);
    let span = t_gate + half_width - lo;
    let plus = SpinState::plus(sys.n_spins());
    let count = ((span * sys.omega / (2.0 * PI)) * per_period as f64).ceil().max(1.0) as usize;
    (0..=count)
        .into_par_iter()
        .map(|k| sys.purity(&plus, thermal, lo + span * k as f64 / count as f64).map(|p| 1.0 - p))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Least-squares `y = c x^2` through the origin and its R^2.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxx: f64 = x.iter().map(|v| v.powi(4)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * a * b).sum();
    let c = sxy / sxx;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - c * a * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    (c, 1.0 - ss_res / ss_tot)
}

pub fn purity_scan(p: &PurityScanParams, options: RunOptions) -> Result<ResultTable, CliError> {
    let eps = match &p.epsilons {
        Some(v) if v.is_empty() => return Err(CliError::config("epsilons", "empty grid")),
        Some(v) => v.clone(),
        None => linspace("epsilon_count", p.epsilon_min, p.epsilon_max, p.epsilon_count)?,
    };
    check_positive("envelope_half_width", p.envelope_half_width)?;
    let mut table = ResultTable::new()
        .column("epsilon", "1")
        .column("t_gate", "1/nu")
        .column("one_minus_purity_at_gate", "1")
        .column("one_minus_purity_envelope", "1")
        .column("envelope_over_eps2", "1");
    let mut env = Vec::with_capacity(eps.len());
    for &e in &eps {
        let model = harmonic_model(p.n_molecules, e, p.dipolar_ratio)?;
        model.total(p.omega, options.guard(p.margin_factor)).context(|| format!("purity drive, epsilon = {e}"))?;
        let sys = SpinPhononSystem::from_model(&model, p.omega).context(|| format!("spin-phonon system, epsilon = {e}"))?;
        let thermal = ThermalSpec::Occupations(vec![p.nbar; sys.n_modes()]);
        let tg = gate_time(&sys)?;
        let at_gate = 1.0 - sys.purity(&SpinState::plus(p.n_molecules), &thermal, tg).context(|| "purity".into())?;
        let envelope = purity_envelope(&sys, &thermal, tg, p.envelope_half_width, p.samples_per_period)
            .context(|| format!("purity envelope, epsilon = {e}"))?;
        env.push(envelope);
        table.push(vec![e.into(), tg.into(), at_gate.into(), envelope.into(), (envelope / (e * e)).into()]);
    }
    if eps.len() >= 2 {
        let (c, r2) = quadratic_fit(&eps, &env);
        table.note("fit_c", c);
        table.note("fit_r2", r2);
    }
    Ok(table)
}

pub fn label_code(label: OrderLabel) -> f64 {
    match label {
        OrderLabel::Fm => 0.0,
        OrderLabel::Afms => 1.0,
        OrderLabel::Afma => 2.0,
        OrderLabel::Paramagnetic => 3.0,
        OrderLabel::Mixed => 4.0,
    }
}

pub fn phase_diagram_scan(p: &PhaseDiagramParams, options: RunOptions) -> Result<ResultTable, CliError> {
    let omegas = grid("omegas", &p.omegas, "omega_min", p.omega_min, p.omega_max, p.omega_step)?;
    let fields = grid("field_ratios", &p.field_ratios, "field_min", p.field_min, p.field_max, p.field_step)?;
    let model = harmonic_model(p.n_molecules, p.epsilon, p.dipolar_ratio)?;
    let guard = options.guard(p.margin_factor);
    let mut allowed = Vec::new();
    for &w in &omegas {
        match model.total(w, guard) {
            Ok(_) => allowed.push(true),
            Err(Error::ResonantDrive { .. }) => allowed.push(false),
            Err(e) => return Err(e).context(|| format!("phase diagram at omega = {w}")),
        }
    }
    let kept: Vec<f64> = omegas.iter().zip(&allowed).filter(|(_, a)| **a).map(|(w, _)| *w).collect();
    let points = phase_diagram(&model, &kept, &fields, guard).context(|| "phase diagram".into())?;
    let mut table = ResultTable::new()
        .column("omega", "nu")
        .column("field_over_Grms", "1")
        .column("label", "code")
        .diverging_column("p_fm", "1")
        .diverging_column("p_afms", "1")
        .diverging_column("p_afma", "1")
        .diverging_column("p_paramagnetic", "1");
    let mut it = points.iter();
    for (w, ok) in omegas.iter().zip(&allowed) {
        for b in &fields {
            if *ok {
                let pt = it.next().expect("one point per kept omega and field");
                let s = &pt.scores;
                table.push(vec![(*w).into(), (*b).into(), label_code(s.label).into(), s.fm.into(), s.afms.into(), s.afma.into(), s.paramagnetic.into()]);
            } else {
                let nan = Cell::from(f64::NAN);
                table.push(vec![(*w).into(), (*b).into(), (-1.0).into(), nan.clone(), nan.clone(), nan.clone(), nan]);
            }
        }
    }
    table.note("label_codes", json!({"-1": "excluded", "0": "FM", "1": "AFMS", "2": "AFMA", "3": "PM", "4": "mixed"}));
    Ok(table)
}

pub fn adiabatic(p: &AdiabaticParams, options: RunOptions) -> Result<ResultTable, CliError> {
    check_positive("stretch", p.stretch)?;
    let t_final = p.t_final.unwrap_or(60.0 * p.stretch);
    check_positive("t_final", t_final)?;
    if p.samples < 2 {
        return Err(CliError::config("samples", "need at least 2"));
    }
    let model = harmonic_model(3, p.epsilon, p.dipolar_ratio)?;
    let g = model.total(p.omega, options.guard(p.margin_factor)).context(|| format!("sweep at omega = {}", p.omega))?;
    let schedule = Schedule::standard(g.rms).stretched(p.stretch);
    let targets: Vec<SpinState> = NamedState::ALL.iter().map(|s| s.state()).collect();
    let sweep = SweepOptions { samples: p.samples, ground_window: p.ground_window, ..Default::default() };
    let traj = adiabatic_sweep(&g.matrix, schedule, &SpinState::minus(3), t_final, &targets, &sweep)
        .context(|| format!("adiabatic sweep at omega = {}", p.omega))?;
    let mut table = ResultTable::new().column("t", "1/G").column("field_over_Grms", "1");
    for s in NamedState::ALL {
        table = table.column(&format!("overlap_{}", s.name()), "1");
    }
    table = table.column("ground_fidelity", "1");
    for k in 0..traj.times.len() {
        let mut row: Vec<Cell> = vec![traj.times[k].into(), (traj.fields[k] / g.rms).into()];
        row.extend(traj.overlaps[k].iter().map(|v| Cell::from(*v)));
        row.push(traj.ground_fidelity[k].into());
        table.push(row);
    }
    let last = traj.overlaps.last().expect("sweep has samples");
    table.note(
        "final_overlaps",
        NamedState::ALL.iter().zip(last).map(|(s, v)| (s.name().to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
    );
    table.note("G_rms", g.rms);
    table.note("norm_drift", traj.norm_drift);
    Ok(table)
}

pub fn ring_profiles(p: &RingProfileParams, options: RunOptions) -> Result<ResultTable, CliError> {
    if p.midpoints.is_empty() && p.omega_tildes.is_empty() {
        return Err(CliError::config("midpoints", "no drive given (midpoints and omega_tildes are both empty)"));
    }
    if p.n_molecules < 3 {
        return Err(CliError::config("n_molecules", "a ring needs at least 3 molecules"));
    }
    let spec = CrystalSpec::ring(p.n_molecules, p.epsilon, p.gamma);
    let form = match p.form {
        RingFormName::NearestNeighbour => RingForm::NearestNeighbour,
        RingFormName::LatticeSum => RingForm::LatticeSum,
    };
    let guard = match p.margin_factor {
        Some(f) if !options.override_resonance_guard => ResonanceGuard::Margin(f),
        _ => ResonanceGuard::PoleOnly,
    };
    let mut drives: Vec<(String, RingDrive)> = Vec::new();
    for &k in &p.midpoints {
        if k == 0 || k + 1 > p.n_molecules / 2 {
            return Err(CliError::config("midpoints", format!("mode pair ({k}, {}) is outside the band", k + 1)));
        }
        drives.push((format!("G_mid{k}"), RingDrive::Midpoint(k)));
    }
    for (i, &w) in p.omega_tildes.iter().enumerate() {
        check_positive("omega_tildes", w)?;
        drives.push((format!("G_w{i}"), RingDrive::Explicit(w)));
    }
    let profiles = drives
        .iter()
        .map(|(name, d)| ring_profile(&spec, *d, guard, form).context(|| format!("ring profile {name}")))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = ResultTable::new().column("d", "sites").column("bare_half", RING_UNIT);
    for (name, _) in &drives {
        table = table.column(name, RING_UNIT);
    }
    for (k, d) in profiles[0].distances.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*d as f64).into(), profiles[0].bare_half[k].into()];
        row.extend(profiles.iter().map(|pr| Cell::from(pr.total[k])));
        table.push(row);
    }
    table.note(
        "omega_tilde",
        drives.iter().zip(&profiles).map(|((n, _), pr)| (n.clone(), json!(pr.omega_tilde))).collect::<serde_json::Map<_, _>>(),
    );
    Ok(table)
}

pub fn stark(p: &StarkMapParams) -> Result<ResultTable, CliError> {
    if p.states == 0 || p.states > p.j_max + 1 {
        return Err(CliError::config("states", format!("must be in 1..={}", p.j_max + 1)));
    }
    if p.pair[0] == p.pair[1] || p.pair.iter().any(|s| *s > p.j_max) {
        return Err(CliError::config("pair", "needs two distinct tracked states"));
    }
    let spec = RotorSpec::uniform(p.j_max, p.field_min, p.field_max, p.points).map_err(|e| CliError::config("points", e))?;
    let map = stark_map(&spec).context(|| "Stark map".into())?;
    let mut table = ResultTable::new().column("E_dc", "B/mu");
    for s in 0..p.states {
        table = table.column(&format!("energy_{s}"), "B");
    }
    for s in 0..p.states {
        table = table.column(&format!("dipole_{s}"), "mu");
    }
    for (k, f) in map.fields.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*f).into()];
        row.extend(map.energies[k][..p.states].iter().map(|v| Cell::from(*v)));
        row.extend(map.dipoles[k][..p.states].iter().map(|v| Cell::from(*v)));
        table.push(row);
    }
    table.note("refined_points", map.refined_points as u64);
    match find_sweet_spot(&map, (p.pair[0], p.pair[1])) {
        Ok(s) => {
            table.note("sweet_spot", json!({"E0": s.field, "mu0": s.dipole, "slopes": [s.slopes.0, s.slopes.1]}));
            let w = linear_window(&map, &s, p.window_tolerance).context(|| "linear window".into())?;
            table.note("linear_window", json!({"lo": w.lo, "hi": w.hi, "tolerance": w.tolerance}));
            let e_ac = [ac_amplitude_for(&s, p.epsilon_target, 0), ac_amplitude_for(&s, p.epsilon_target, 1)];
            let inside = modulation_depth(&s, &w, e_ac[0]).is_ok();
            table.note("ac_amplitude", json!({"epsilon": p.epsilon_target, "from_first": e_ac[0], "from_second": e_ac[1], "inside_window": inside}));
        }
        Err(Error::NoCrossing) => table.note("sweet_spot", serde_json::Value::Null),
        Err(e) => return Err(e).context(|| "sweet spot".into()),
    }
    Ok(table)
}
