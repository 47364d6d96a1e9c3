//! Transverse-field Ising model `H = B sum_i sx_i + sum_{i<j} G_ij sz_i sz_j`.
//!
//! Couplings and field share one energy unit (the coupling scale
//! `D eps^2 / hbar a^3` for the crystal); times are in the inverse unit.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::couplings::{coupling_rms, CouplingModel, ResonanceGuard};
use crate::dynamics::{spin_sign, SpinState};
use crate::error::{Error, Result};
use crate::integrate::{Dopri5, StepControl};

pub const MAX_SPINS: usize = 16;
/// Relative energy window for counting degenerate ground states.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;
/// Field that resolves a degenerate classical manifold, relative to `G_rms`.
pub const SELECTION_FIELD: f64 = 1e-3;
pub const ORDER_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct IsingSpec {
    pub couplings: DMatrix<f64>,
    pub field: f64,
}

impl IsingSpec {
    pub fn new(couplings: DMatrix<f64>, field: f64) -> Result<Self> {
        let n = couplings.nrows();
        if couplings.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: couplings.ncols(),
            });
        }
        if n == 0 || n > MAX_SPINS {
            return Err(Error::InvalidInput(format!("{n} spins outside 1..={MAX_SPINS}")));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal coupling at site {i}")));
            }
            for j in 0..i {
                if (couplings[(i, j)] - couplings[(j, i)]).abs() > 1e-12 * couplings[(i, j)].abs().max(1.0) {
                    return Err(Error::InvalidInput(format!("couplings not symmetric at ({i}, {j})")));
                }
            }
        }
        if !(field >= 0.0) || !field.is_finite() {
            return Err(Error::InvalidInput(format!("transverse field {field} must be >= 0")));
        }
        Ok(Self { couplings, field })
    }

    pub fn n_spins(&self) -> usize {
        self.couplings.nrows()
    }

    pub fn g_rms(&self) -> f64 {
        coupling_rms(&self.couplings)
    }
}

/// `sum_{i<j} G_ij s_i s_j` for every basis configuration.
pub fn classical_energies(couplings: &DMatrix<f64>) -> Vec<f64> {
    let n = couplings.nrows();
    (0..1usize << n)
        .map(|s| {
            let mut e = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    e += couplings[(i, j)] * spin_sign(s, i) * spin_sign(s, j);
                }
            }
            e
        })
        .collect()
}

pub fn hamiltonian(couplings: &DMatrix<f64>, field: f64) -> DMatrix<f64> {
    let n = couplings.nrows();
    let dim = 1usize << n;
    let diag = classical_energies(couplings);
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        h[(s, s)] = diag[s];
        for i in 0..n {
            h[(s ^ (1 << i), s)] += field;
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub state: SpinState,
    pub degeneracy: usize,
}

fn energy_scale(spec: &IsingSpec) -> f64 {
    spec.g_rms().max(spec.field).max(f64::MIN_POSITIVE)
}

fn lowest_eigenvector(h: DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let v = eig.eigenvectors.column(order[0]).iter().copied().collect();
    (values, v)
}

fn real_state(mut v: Vec<f64>) -> Result<SpinState> {
    // fix the global sign: largest-magnitude component positive
    let lead = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
    if lead < 0.0 {
        v.iter_mut().for_each(|c| *c = -*c);
    }
    SpinState::normalized(v.into_iter().map(|c| Complex64::new(c, 0.0)).collect())
}

/// Lowest eigenpair and the number of states within the degeneracy window.
///
/// At zero field the ground manifold is classical and usually degenerate; the
/// returned state is the superposition selected by a small field
/// `SELECTION_FIELD * G_rms`, projected back onto the manifold.
pub fn ground_state(spec: &IsingSpec) -> Result<GroundState> {
    let scale = energy_scale(spec);
    let window = DEGENERACY_TOLERANCE * scale;
    if spec.field > 0.0 {
        let (values, v) = lowest_eigenvector(hamiltonian(&spec.couplings, spec.field));
        let degeneracy = values.iter().filter(|e| **e - values[0] <= window).count();
        return Ok(GroundState {
            energy: values[0],
            state: real_state(v)?,
            degeneracy,
        });
    }
    let classical = classical_energies(&spec.couplings);
    let e0 = classical.iter().copied().fold(f64::INFINITY, f64::min);
    let manifold: Vec<bool> = classical.iter().map(|e| e - e0 <= window).collect();
    let degeneracy = manifold.iter().filter(|m| **m).count();
    let selector = SELECTION_FIELD * spec.g_rms().max(f64::MIN_POSITIVE);
    let (_, v) = lowest_eigenvector(hamiltonian(&spec.couplings, selector));
    let projected = v.iter().zip(&manifold).map(|(c, m)| if *m { *c } else { 0.0 }).collect();
    Ok(GroundState {
        energy: e0,
        state: real_state(projected)?,
        degeneracy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedState {
    Ghz,
    WSuperposition,
    Afms,
    Afma,
    Graph3,
    ParamagneticMinus,
}

// three-spin configuration indices; the leftmost letter is spin 1 (bit 0)
const GGG: usize = 0b000;
const EEE: usize = 0b111;
const EGE: usize = 0b101;
const GEG: usize = 0b010;
const GGE: usize = 0b100;
const EGG: usize = 0b001;
const EEG: usize = 0b011;
const GEE: usize = 0b110;

impl NamedState {
    pub const ALL: [NamedState; 6] = [
        NamedState::Ghz,
        NamedState::WSuperposition,
        NamedState::Afms,
        NamedState::Afma,
        NamedState::Graph3,
        NamedState::ParamagneticMinus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NamedState::Ghz => "GHZ",
            NamedState::WSuperposition => "W",
            NamedState::Afms => "AFMS",
            NamedState::Afma => "AFMA",
            NamedState::Graph3 => "graph",
            NamedState::ParamagneticMinus => "minus",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name().eq_ignore_ascii_case(name))
    }

    /// Three-spin amplitudes with the printed relative signs.
    pub fn state(&self) -> SpinState {
        let terms: &[(usize, f64)] = match self {
            NamedState::Ghz => &[(GGG, 1.0), (EEE, -1.0)],
            NamedState::Afms => &[(GEG, 1.0), (EGE, -1.0)],
            NamedState::Afma => &[(GGE, 1.0), (EGG, 1.0), (EEG, -1.0), (GEE, -1.0)],
            NamedState::WSuperposition => &[
                (GGE, 1.0),
                (EGG, 1.0),
                (GEG, 1.0),
                (EEG, -1.0),
                (GEE, -1.0),
                (EGE, -1.0),
            ],
            NamedState::Graph3 => return crate::dynamics::graph_state(3),
            NamedState::ParamagneticMinus => return SpinState::minus(3),
        };
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 8];
        for &(idx, sign) in terms {
            amplitudes[idx] = Complex64::new(sign, 0.0);
        }
        SpinState::normalized(amplitudes).expect("named states are nonzero")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderLabel {
    Fm,
    Afms,
    Afma,
    Paramagnetic,
    Mixed,
}

impl OrderLabel {
    pub fn name(&self) -> &'static str {
        match self {
            OrderLabel::Fm => "FM",
            OrderLabel::Afms => "AFMS",
            OrderLabel::Afma => "AFMA",
            OrderLabel::Paramagnetic => "PM",
            OrderLabel::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderScores {
    /// `P_ggg + P_eee`.
    pub fm: f64,
    /// `P_ege + P_geg`.
    pub afms: f64,
    /// `P_gge + P_egg + P_eeg + P_gee`.
    pub afma: f64,
    /// `|<---|psi>|^2`.
    pub paramagnetic: f64,
    pub label: OrderLabel,
    /// Raw configuration probabilities (any `N`).
    pub probabilities: Vec<f64>,
}

/// Order scores of a three-spin state; other sizes get raw probabilities and
/// the `Mixed` label.
pub fn classify_order(state: &SpinState) -> OrderScores {
    let p = state.probabilities();
    if state.n_spins() != 3 {
        return OrderScores {
            fm: f64::NAN,
            afms: f64::NAN,
            afma: f64::NAN,
            paramagnetic: f64::NAN,
            label: OrderLabel::Mixed,
            probabilities: p,
        };
    }
    let fm = p[GGG] + p[EEE];
    let afms = p[EGE] + p[GEG];
    let afma = p[GGE] + p[EGG] + p[EEG] + p[GEE];
    let paramagnetic = state.fidelity(&SpinState::minus(3)).unwrap_or(0.0);
    let label = if fm > ORDER_THRESHOLD {
        OrderLabel::Fm
    } else if afms > ORDER_THRESHOLD {
        OrderLabel::Afms
    } else if afma > ORDER_THRESHOLD {
        OrderLabel::Afma
    } else if paramagnetic > ORDER_THRESHOLD {
        OrderLabel::Paramagnetic
    } else {
        OrderLabel::Mixed
    };
    OrderScores {
        fm,
        afms,
        afma,
        paramagnetic,
        label,
        probabilities: p,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub omega: f64,
    /// `B / G_rms`.
    pub field_ratio: f64,
    pub scores: OrderScores,
}

/// Ground-state order on an `omega x B/G_rms` grid, rows ordered by omega
/// then field.
pub fn phase_diagram(
    model: &CouplingModel,
    omegas: &[f64],
    field_ratios: &[f64],
    guard: ResonanceGuard,
) -> Result<Vec<PhasePoint>> {
    let couplings: Vec<DMatrix<f64>> = omegas
        .iter()
        .map(|w| model.total(*w, guard).map(|t| t.matrix))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..omegas.len())
        .flat_map(|a| (0..field_ratios.len()).map(move |b| (a, b)))
        .collect();
    jobs.par_iter()
        .map(|&(a, b)| {
            let g = &couplings[a];
            let spec = IsingSpec::new(g.clone(), field_ratios[b] * coupling_rms(g))?;
            let gs = ground_state(&spec)?;
            Ok(PhasePoint {
                omega: omegas[a],
                field_ratio: field_ratios[b],
                scores: classify_order(&gs.state),
            })
        })
        .collect()
}

/// Transverse field as a function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `amplitude * exp(-t^2 / width_sq)`.
    Gaussian { amplitude: f64, width_sq: f64 },
}

impl Schedule {
    /// `B(t) = 10 G_rms exp(-t^2 / (50 pi))`.
    pub fn standard(g_rms: f64) -> Self {
        Schedule::Gaussian {
            amplitude: 10.0 * g_rms,
            width_sq: 50.0 * std::f64::consts::PI,
        }
    }

    /// Same field values reached `factor` times more slowly.
    pub fn stretched(self, factor: f64) -> Self {
        match self {
            Schedule::Gaussian { amplitude, width_sq } => Schedule::Gaussian {
                amplitude,
                width_sq: width_sq * factor * factor,
            },
            c => c,
        }
    }

    pub fn field(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant(b) => b,
            Schedule::Gaussian { amplitude, width_sq } => amplitude * (-t * t / width_sq).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub control: StepControl,
    /// Number of equally spaced samples including both end points.
    pub samples: usize,
    /// Width of the instantaneous ground space relative to `G_rms`.
    pub ground_window: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            control: StepControl::default().with_tolerances(1e-12, 1e-14),
            samples: 201,
            ground_window: DEGENERACY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<f64>,
    /// `overlaps[k][m]`: population of target `m` at sample `k`.
    pub overlaps: Vec<Vec<f64>>,
    /// Weight of the state in the instantaneous ground space.
    pub ground_fidelity: Vec<f64>,
    pub final_state: SpinState,
    pub norm_drift: f64,
}

fn ground_space_weight(couplings: &DMatrix<f64>, field: f64, psi: &[Complex64], window: f64) -> f64 {
    let eig = SymmetricEigen::new(hamiltonian(couplings, field));
    let e0 = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w = 0.0;
    for (k, e) in eig.eigenvalues.iter().enumerate() {
        if e - e0 <= window {
            let v = eig.eigenvectors.column(k);
            let amp: Complex64 = v.iter().zip(psi).map(|(a, b)| b * *a).sum();
            w += amp.norm_sqr();
        }
    }
    w
}

/// Integrates the Schrödinger equation with a time-dependent field from
/// `t = 0` to `t_final`, recording target overlaps on a uniform grid.
pub fn adiabatic_sweep(
    couplings: &DMatrix<f64>,
    schedule: Schedule,
    initial: &SpinState,
    t_final: f64,
    targets: &[SpinState],
    options: &SweepOptions,
) -> Result<SweepTrajectory> {
    let spec = IsingSpec::new(couplings.clone(), schedule.field(0.0).max(0.0))?;
    let n = spec.n_spins();
    if initial.n_spins() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: initial.n_spins(),
        });
    }
    if let Some(t) = targets.iter().find(|t| t.n_spins() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: t.n_spins(),
        });
    }
    if !(t_final > 0.0) || options.samples < 2 {
        return Err(Error::InvalidInput("sweep needs t_final > 0 and at least two samples".into()));
    }
    let diag = classical_energies(couplings);
    let dim = 1usize << n;
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let b = schedule.field(t);
        for s in 0..dim {
            let mut acc = y[s] * diag[s];
            for i in 0..n {
                acc += y[s ^ (1 << i)] * b;
            }
            dy[s] = Complex64::new(acc.im, -acc.re);
        }
    };
    let mut stepper = Dopri5::new(rhs, 0.0, initial.amplitudes().to_vec(), options.control);
    let window = options.ground_window * spec.g_rms().max(f64::MIN_POSITIVE);
    let mut trajectory = SweepTrajectory {
        times: Vec::with_capacity(options.samples),
        fields: Vec::with_capacity(options.samples),
        overlaps: Vec::with_capacity(options.samples),
        ground_fidelity: Vec::with_capacity(options.samples),
        final_state: initial.clone(),
        norm_drift: 0.0,
    };
    for k in 0..options.samples {
        let t = t_final * k as f64 / (options.samples - 1) as f64;
        stepper.advance_to(t)?;
        let psi = stepper.state();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        trajectory.norm_drift = trajectory.norm_drift.max((norm - 1.0).abs());
        let state = SpinState::normalized(psi.to_vec())?;
        trajectory.times.push(t);
        trajectory.fields.push(schedule.field(t));
        trajectory
            .overlaps
            .push(targets.iter().map(|target| target.fidelity(&state)).collect::<Result<_>>()?);
        trajectory
            .ground_fidelity
            .push(ground_space_weight(couplings, schedule.field(t), psi, window));
    }
    trajectory.final_state = SpinState::normalized(stepper.into_state())?;
    Ok(trajectory)
}

/// Exact evolution under `sum_{i<j} G_ij sz_i sz_j`.
pub fn ising_evolve(couplings: &DMatrix<f64>, initial: &SpinState, t: f64) -> Result<SpinState> {
    if initial.n_spins() != couplings.nrows() {
        return Err(Error::DimensionMismatch {
            expected: couplings.nrows(),
            found: initial.n_spins(),
        });
    }
    let energies = classical_energies(couplings);
    let amplitudes = initial
        .amplitudes()
        .iter()
        .zip(&energies)
        .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
        .collect();
    SpinState::new(amplitudes)
}
