//! Brute-force propagation of the driven spin-phonon Hamiltonian on a
//! truncated Fock space.
//!
//! Only modes with nonzero spin-phonon coupling are represented; uncoupled
//! modes (the centre-of-mass mode of a harmonic trap) factor out of the
//! interaction-picture dynamics exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{spin_sign, SpinDensity, SpinPhononSystem, SpinState, ThermalSpec};
use crate::error::{Error, Result};
use crate::integrate::{Dopri5, StepControl};

pub const DEFAULT_N_MAX: usize = 5;
pub const DEFAULT_LEAK_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-3;
/// Members enumerated exactly up to this many spins, sampled beyond.
pub const EXACT_THERMAL_MAX_SPINS: usize = 3;

/// Product of truncated Fock spaces, first mode most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    pub n_modes: usize,
    pub n_max: usize,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    pub fn new(n_modes: usize, n_max: usize) -> Self {
        let levels = n_max + 1;
        let mut strides = vec![1; n_modes];
        for m in (0..n_modes.saturating_sub(1)).rev() {
            strides[m] = strides[m + 1] * levels;
        }
        Self {
            n_modes,
            n_max,
            strides,
            dim: levels.pow(n_modes as u32),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self, occupations: &[usize]) -> usize {
        occupations.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % (self.n_max + 1)
    }
}

/// Spin-major amplitudes over `2^N x Fock`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub n_spins: usize,
    pub fock: FockSpace,
    pub amplitudes: Vec<Complex64>,
}

impl FullState {
    pub fn product(spin: &SpinState, occupations: &[usize], n_max: usize) -> Result<Self> {
        if let Some(k) = occupations.iter().find(|k| **k > n_max) {
            return Err(Error::InvalidInput(format!("occupation {k} exceeds n_max = {n_max}")));
        }
        let fock = FockSpace::new(occupations.len(), n_max);
        let f = fock.index(occupations);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); spin.dim() * fock.dim()];
        for (s, c) in spin.amplitudes().iter().enumerate() {
            amplitudes[s * fock.dim() + f] = *c;
        }
        Ok(Self {
            n_spins: spin.n_spins(),
            fock,
            amplitudes,
        })
    }

    pub fn vacuum(spin: &SpinState, n_modes: usize, n_max: usize) -> Result<Self> {
        Self::product(spin, &vec![0; n_modes], n_max)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest population in the top Fock level of any mode.
    pub fn leakage(&self) -> f64 {
        leakage(&self.fock, &self.amplitudes)
    }

    pub fn reduced_spin_density(&self) -> SpinDensity {
        let dim_s = 1usize << self.n_spins;
        let fd = self.fock.dim();
        let a = &self.amplitudes;
        let matrix = DMatrix::from_fn(dim_s, dim_s, |s, r| {
            (0..fd).map(|f| a[s * fd + f] * a[r * fd + f].conj()).sum()
        });
        SpinDensity { matrix }
    }

    /// Mean occupation of each represented mode.
    pub fn mean_occupations(&self) -> Vec<f64> {
        let fd = self.fock.dim();
        (0..self.fock.n_modes)
            .map(|m| {
                self.amplitudes
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| c.norm_sqr() * self.fock.occupation(idx % fd, m) as f64)
                    .sum()
            })
            .collect()
    }
}

fn leakage(fock: &FockSpace, amplitudes: &[Complex64]) -> f64 {
    if fock.n_modes == 0 {
        return 0.0;
    }
    let fd = fock.dim();
    let mut top = vec![0.0; fock.n_modes];
    for (idx, c) in amplitudes.iter().enumerate() {
        let f = idx % fd;
        let p = c.norm_sqr();
        for (m, t) in top.iter_mut().enumerate() {
            if fock.occupation(f, m) == fock.n_max {
                *t += p;
            }
        }
    }
    top.into_iter().fold(0.0, f64::max)
}

/// Terms dropped by the effective description, re-enabled for error budgets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualTerms {
    /// Rates `h_i` of the single-spin term `h_i cos(wt) s_i`.
    pub single_spin: Option<Vec<f64>>,
    /// Replace `cos^2(wt)` in the bare term by its average 1/2, removing the
    /// `cos(2wt)` ripple.
    pub average_bare: bool,
}

impl ResidualTerms {
    pub fn none() -> Self {
        Self::default()
    }
}

/// Single-spin rates `epsilon * lambda * sum_j 1/|x_ij|^3` of a harmonic crystal.
pub fn single_spin_field(model: &crate::couplings::CouplingModel) -> Vec<f64> {
    let scale = model.spec.epsilon * model.spec.dipolar_ratio;
    (0..model.n_molecules())
        .map(|i| scale * model.bare.row(i).iter().sum::<f64>())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    pub n_max: usize,
    pub control: StepControl,
    pub leak_tol: f64,
    pub residual: ResidualTerms,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            control: StepControl::default(),
            leak_tol: DEFAULT_LEAK_TOLERANCE,
            residual: ResidualTerms::none(),
        }
    }
}

/// Matrix-free interaction-picture Hamiltonian.
pub struct Hamiltonian {
    n_spins: usize,
    fock: FockSpace,
    omega: f64,
    mode_frequencies: Vec<f64>,
    /// `sum_{i<j} G0_ij s_i s_j` per spin configuration.
    bare_diag: Vec<f64>,
    /// `sum_i h_i s_i` per configuration, zero when the term is off.
    single_diag: Option<Vec<f64>>,
    /// `sum_i g_{m,i} s_i`, row = configuration.
    mode_drive: Vec<Vec<f64>>,
    average_bare: bool,
    /// `occupations[f][m]`.
    occupations: Vec<Vec<usize>>,
}

impl Hamiltonian {
    pub fn assemble(system: &SpinPhononSystem, n_max: usize, residual: &ResidualTerms) -> Result<Self> {
        let n = system.n_spins();
        let coupled: Vec<usize> = (0..system.n_modes()).filter(|m| system.is_coupled(*m)).collect();
        let fock = FockSpace::new(coupled.len(), n_max);
        let dim_s = 1usize << n;
        let bare_diag = (0..dim_s)
            .map(|s| {
                let mut e = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        e += system.bare[(i, j)] * spin_sign(s, i) * spin_sign(s, j);
                    }
                }
                e
            })
            .collect();
        let single_diag = match &residual.single_spin {
            None => None,
            Some(h) => {
                if h.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: h.len() });
                }
                Some((0..dim_s).map(|s| (0..n).map(|i| h[i] * spin_sign(s, i)).sum()).collect())
            }
        };
        let mode_drive = (0..dim_s)
            .map(|s| {
                coupled
                    .iter()
                    .map(|&m| (0..n).map(|i| system.spin_phonon[(m, i)] * spin_sign(s, i)).sum())
                    .collect()
            })
            .collect();
        let occupations = (0..fock.dim())
            .map(|f| (0..fock.n_modes).map(|m| fock.occupation(f, m)).collect())
            .collect();
        Ok(Self {
            n_spins: n,
            mode_frequencies: coupled.iter().map(|&m| system.frequencies[m]).collect(),
            fock,
            omega: system.omega,
            bare_diag,
            single_diag,
            mode_drive,
            average_bare: residual.average_bare,
            occupations,
        })
    }

    pub fn dim(&self) -> usize {
        (1usize << self.n_spins) * self.fock.dim()
    }

    pub fn fock(&self) -> &FockSpace {
        &self.fock
    }

    /// `out = -i H(t) psi`.
    pub fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let cw = (self.omega * t).cos();
        let bare_shape = if self.average_bare { 0.5 } else { cw * cw };
        let phases: Vec<Complex64> = self
            .mode_frequencies
            .iter()
            .map(|w| Complex64::from_polar(1.0, -w * t))
            .collect();
        let fd = self.fock.dim();
        let minus_i = Complex64::new(0.0, -1.0);
        for s in 0..(1usize << self.n_spins) {
            let mut diag = bare_shape * self.bare_diag[s];
            if let Some(h) = &self.single_diag {
                diag += cw * h[s];
            }
            let drive: Vec<Complex64> = self.mode_drive[s].iter().zip(&phases).map(|(c, p)| p * (cw * c)).collect();
            let block = &psi[s * fd..(s + 1) * fd];
            let target = &mut out[s * fd..(s + 1) * fd];
            for f in 0..fd {
                let mut acc = block[f] * diag;
                let occ = &self.occupations[f];
                for m in 0..self.fock.n_modes {
                    let stride = self.fock.strides[m];
                    let k = occ[m];
                    // a e^{-i w t}: <k|a|k+1> = sqrt(k+1)
                    if k < self.fock.n_max {
                        acc += drive[m] * ((k + 1) as f64).sqrt() * block[f + stride];
                    }
                    // a^dag e^{+i w t}: <k|a^dag|k-1> = sqrt(k)
                    if k > 0 {
                        acc += drive[m].conj() * (k as f64).sqrt() * block[f - stride];
                    }
                }
                target[f] = minus_i * acc;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationReport {
    pub final_state: FullState,
    pub max_leakage: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Largest `| ||psi||^2 - 1 |` seen at accepted steps.
    pub norm_drift: f64,
}

fn check_initial(system: &SpinPhononSystem, initial: &FullState, n_max: usize) -> Result<()> {
    let coupled = (0..system.n_modes()).filter(|m| system.is_coupled(*m)).count();
    if initial.n_spins != system.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: system.n_spins(),
            found: initial.n_spins,
        });
    }
    if initial.fock.n_modes != coupled {
        return Err(Error::DimensionMismatch {
            expected: coupled,
            found: initial.fock.n_modes,
        });
    }
    if initial.fock.n_max != n_max {
        return Err(Error::InvalidInput(format!(
            "state truncated at {} but options ask for n_max = {n_max}",
            initial.fock.n_max
        )));
    }
    if n_max < 3 {
        return Err(Error::InvalidInput(format!("n_max = {n_max} must be at least 3")));
    }
    if (initial.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("initial state is not normalized".into()));
    }
    Ok(())
}

/// Propagates `initial` and records the reduced spin state at each sample time.
pub fn evolve_sampled(
    system: &SpinPhononSystem,
    initial: &FullState,
    times: &[f64],
    options: &OracleOptions,
) -> Result<(Vec<SpinDensity>, IntegrationReport)> {
    check_initial(system, initial, options.n_max)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidInput("sample times must be non-negative and sorted".into()));
    }
    let h = Hamiltonian::assemble(system, options.n_max, &options.residual)?;
    let fock = h.fock().clone();
    let mut control = options.control;
    // resolve the drive and the fastest phonon phase
    let fastest = h.mode_frequencies.iter().fold(system.omega, |a, b| a.max(*b)) + system.omega;
    control.max_step = control.max_step.min(2.0 * std::f64::consts::PI / fastest / 4.0);
    let mut stepper = Dopri5::new(|t, y, dy| h.apply(t, y, dy), 0.0, initial.amplitudes.clone(), control);
    let mut max_leakage = initial.leakage();
    let mut norm_drift: f64 = 0.0;
    let leak_tol = options.leak_tol;
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        stepper.advance_with(t, |_, y| {
            let l = leakage(&fock, y);
            max_leakage = max_leakage.max(l);
            let n: f64 = y.iter().map(|c| c.norm_sqr()).sum();
            norm_drift = norm_drift.max((n - 1.0).abs());
            if l > leak_tol {
                return Err(Error::TruncationLeak { leakage: l, tolerance: leak_tol });
            }
            Ok(())
        })?;
        let state = FullState {
            n_spins: initial.n_spins,
            fock: fock.clone(),
            amplitudes: stepper.state().to_vec(),
        };
        samples.push(state.reduced_spin_density());
    }
    let steps = stepper.accepted;
    let rejected_steps = stepper.rejected;
    let final_state = FullState {
        n_spins: initial.n_spins,
        fock,
        amplitudes: stepper.into_state(),
    };
    Ok((
        samples,
        IntegrationReport {
            final_state,
            max_leakage,
            steps,
            rejected_steps,
            norm_drift,
        },
    ))
}

pub fn evolve_full(
    system: &SpinPhononSystem,
    initial: &FullState,
    t_final: f64,
    options: &OracleOptions,
) -> Result<IntegrationReport> {
    evolve_sampled(system, initial, &[t_final], options).map(|(_, report)| report)
}

/// Weighted Fock product states approximating the thermal phonon state.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    pub members: Vec<(f64, Vec<usize>)>,
    /// Probability mass not represented.
    pub tail: f64,
    pub n_max: usize,
    /// Seed of the sampler, `None` for exact enumeration.
    pub seed: Option<u64>,
}

impl ThermalEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|(w, _)| w).sum()
    }
}

/// Bose-distributed initial phonon occupations for the coupled modes of
/// `system`.
///
/// Up to [`EXACT_THERMAL_MAX_SPINS`] spins every product state above the
/// weight cutoff is enumerated; larger systems draw `samples` members with
/// the seeded generator.
pub fn thermal_initial(
    system: &SpinPhononSystem,
    thermal: &ThermalSpec,
    n_max: usize,
    tail_tol: f64,
    samples: usize,
    seed: u64,
) -> Result<ThermalEnsemble> {
    let coupled: Vec<usize> = (0..system.n_modes()).filter(|m| system.is_coupled(*m)).collect();
    let all = thermal.occupations(&system.frequencies)?;
    let nbar: Vec<f64> = coupled.iter().map(|&m| all[m]).collect();
    if let Some(&worst) = nbar.iter().find(|n| **n > n_max as f64 / 4.0) {
        return Err(Error::TruncationLeak {
            leakage: worst,
            tolerance: n_max as f64 / 4.0,
        });
    }
    if nbar.iter().all(|n| *n == 0.0) {
        return Ok(ThermalEnsemble {
            members: vec![(1.0, vec![0; coupled.len()])],
            tail: 0.0,
            n_max,
            seed: None,
        });
    }
    let per_mode_tail = tail_tol / coupled.len().max(1) as f64;
    // highest occupation kept per mode: geometric tail r^(k+1) below the budget
    let cutoffs: Vec<usize> = nbar
        .iter()
        .map(|&n| {
            if n == 0.0 {
                0
            } else {
                let r = n / (1.0 + n);
                ((per_mode_tail.ln() / r.ln()).ceil() as usize).saturating_sub(1)
            }
        })
        .collect();
    // room for the drive to displace the highest kept level
    if let Some(&k) = cutoffs.iter().find(|k| **k + 2 > n_max) {
        return Err(Error::TruncationLeak {
            leakage: k as f64,
            tolerance: n_max as f64,
        });
    }
    let p = |m: usize, k: usize| -> f64 {
        let n = nbar[m];
        n.powi(k as i32) / (1.0 + n).powi(k as i32 + 1)
    };
    if system.n_spins() <= EXACT_THERMAL_MAX_SPINS {
        let mut members = vec![(1.0, Vec::new())];
        for m in 0..coupled.len() {
            members = members
                .into_iter()
                .flat_map(|(w, occ)| {
                    (0..=cutoffs[m]).map(move |k| {
                        let mut o: Vec<usize> = occ.clone();
                        o.push(k);
                        (w * p(m, k), o)
                    })
                })
                .collect();
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        Ok(ThermalEnsemble {
            members,
            tail: 1.0 - total,
            n_max,
            seed: None,
        })
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut members = Vec::with_capacity(samples);
        let mut tail = 0.0;
        for m in 0..coupled.len() {
            let kept: f64 = (0..=cutoffs[m]).map(|k| p(m, k)).sum();
            tail += 1.0 - kept;
        }
        for _ in 0..samples {
            let occ = (0..coupled.len())
                .map(|m| {
                    let r = nbar[m] / (1.0 + nbar[m]);
                    // inverse-CDF draw from the geometric distribution
                    let u: f64 = rng.random();
                    let k = if r == 0.0 { 0 } else { ((1.0 - u).ln() / r.ln()).floor() as usize };
                    k.min(cutoffs[m])
                })
                .collect();
            members.push(((1.0 - tail) / samples as f64, occ));
        }
        Ok(ThermalEnsemble {
            members,
            tail,
            n_max,
            seed: Some(seed),
        })
    }
}

/// Reduced spin state of the thermal ensemble at each sample time; members
/// propagate in parallel and the weights are renormalized to one. Each
/// member may leak up to `leak_tol / weight`.
pub fn evolve_thermal(
    system: &SpinPhononSystem,
    spin: &SpinState,
    ensemble: &ThermalEnsemble,
    times: &[f64],
    options: &OracleOptions,
) -> Result<Vec<SpinDensity>> {
    let results: Vec<Result<(f64, Vec<SpinDensity>)>> = ensemble
        .members
        .par_iter()
        .map(|(w, occ)| {
            let initial = FullState::product(spin, occ, options.n_max)?;
            // leakage of the mixed state is the weighted member leakage
            let member = OracleOptions {
                leak_tol: options.leak_tol / w.max(f64::MIN_POSITIVE),
                ..options.clone()
            };
            let (samples, _) = evolve_sampled(system, &initial, times, &member)?;
            Ok((*w, samples))
        })
        .collect();
    let total = ensemble.total_weight();
    let dim = spin.dim();
    let mut acc: Vec<DMatrix<Complex64>> = vec![DMatrix::zeros(dim, dim); times.len()];
    for r in results {
        let (w, samples) = r?;
        for (a, s) in acc.iter_mut().zip(samples) {
            *a += s.matrix * Complex64::new(w / total, 0.0);
        }
    }
    Ok(acc.into_iter().map(|matrix| SpinDensity { matrix }).collect())
}
