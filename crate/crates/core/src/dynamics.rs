//! Exact spin dynamics of the driven crystal without transverse field.
//!
//! The Hamiltonian is linear in the phonon operators and diagonal in the
//! spins, so the propagator factorizes into spin-dependent displacements and
//! an Ising phase. Times are in units of `1/nu` and rates in units of `nu`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::couplings::{CouplingModel, POLE_TOLERANCE};
use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-12;

/// `+1` for `|g>` (bit clear), `-1` for `|e>` (bit set); qubit 0 is the
/// least significant bit of the basis index.
#[inline]
pub fn spin_sign(index: usize, site: usize) -> f64 {
    if (index >> site) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    n_spins: usize,
    amplitudes: Vec<Complex64>,
}

impl SpinState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidInput(format!("state norm {norm} differs from 1")));
        }
        Ok(Self {
            n_spins: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Normalizes before construction.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|c| *c /= norm);
        Self::new(amplitudes)
    }

    pub fn basis(n_spins: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_spins];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { n_spins, amplitudes }
    }

    /// `((|g> + |e>)/sqrt 2)^N`.
    pub fn plus(n_spins: usize) -> Self {
        let dim = 1usize << n_spins;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            n_spins,
            amplitudes: vec![a; dim],
        }
    }

    /// `((|g> - |e>)/sqrt 2)^N`, the ground state of a strong positive
    /// transverse field.
    pub fn minus(n_spins: usize) -> Self {
        let dim = 1usize << n_spins;
        let a = 1.0 / (dim as f64).sqrt();
        let amplitudes = (0..dim)
            .map(|idx| Complex64::new(a * if idx.count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        Self { n_spins, amplitudes }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &SpinState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &SpinState) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    pub fn density(&self) -> SpinDensity {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        SpinDensity {
            matrix: &v * v.adjoint(),
        }
    }

    /// Populations `|C_s|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Ising-evolved graph state `exp(-i pi/4 sum_{i<j} s_i s_j) |+...+>` on the
/// complete graph; for three spins this is the triangle graph state in the
/// frame the dipolar evolution produces.
pub fn graph_state(n_spins: usize) -> SpinState {
    let dim = 1usize << n_spins;
    let a = 1.0 / (dim as f64).sqrt();
    let amplitudes = (0..dim)
        .map(|idx| {
            let mut zz = 0.0;
            for i in 0..n_spins {
                for j in i + 1..n_spins {
                    zz += spin_sign(idx, i) * spin_sign(idx, j);
                }
            }
            Complex64::from_polar(a, -std::f64::consts::FRAC_PI_4 * zz)
        })
        .collect();
    SpinState { n_spins, amplitudes }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinDensity {
    pub matrix: DMatrix<Complex64>,
}

impl SpinDensity {
    pub fn maximally_mixed(n_spins: usize) -> Self {
        let dim = 1usize << n_spins;
        Self {
            matrix: DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_sr|^2 for Hermitian rho
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, state: &SpinState) -> Result<f64> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }
}

/// `(1/2) Tr |a - b|`.
pub fn trace_distance(a: &SpinDensity, b: &SpinDensity) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = &a.matrix - &b.matrix;
    let h = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(0.5 * SymmetricEigen::new(h).eigenvalues.iter().map(|v| v.abs()).sum::<f64>())
}

pub fn graph_fidelity(rho: &SpinDensity, target: &SpinState) -> Result<f64> {
    rho.expectation(target)
}

/// Phonon temperature.
#[derive(Debug, Clone, PartialEq)]
pub enum ThermalSpec {
    Zero,
    /// `k_B T / (hbar nu)`; every mode Bose-occupied.
    Temperature(f64),
    /// Mean occupation per mode.
    Occupations(Vec<f64>),
}

impl ThermalSpec {
    /// Mean occupation of each mode.
    pub fn occupations(&self, frequencies: &[f64]) -> Result<Vec<f64>> {
        match self {
            ThermalSpec::Zero => Ok(vec![0.0; frequencies.len()]),
            ThermalSpec::Temperature(kt) => {
                if !(*kt >= 0.0) {
                    return Err(Error::InvalidInput(format!("temperature {kt} is negative")));
                }
                Ok(frequencies
                    .iter()
                    .map(|w| if *kt == 0.0 { 0.0 } else { 1.0 / (w / kt).exp_m1() })
                    .collect())
            }
            ThermalSpec::Occupations(nbar) => {
                if nbar.len() != frequencies.len() {
                    return Err(Error::DimensionMismatch {
                        expected: frequencies.len(),
                        found: nbar.len(),
                    });
                }
                if let Some(bad) = nbar.iter().find(|n| !(**n >= 0.0)) {
                    return Err(Error::InvalidInput(format!("negative occupation {bad}")));
                }
                Ok(nbar.clone())
            }
        }
    }

    /// `coth(hbar w_n / 2 k_B T) = 1 + 2 nbar_n`.
    pub fn coth_factors(&self, frequencies: &[f64]) -> Result<Vec<f64>> {
        Ok(self.occupations(frequencies)?.iter().map(|n| 1.0 + 2.0 * n).collect())
    }
}

/// Driven spin-phonon system in rates of `nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPhononSystem {
    pub frequencies: Vec<f64>,
    /// `g_{n,i}`, row = mode.
    pub spin_phonon: DMatrix<f64>,
    /// `G^0_{ij}` of the pair term `G^0_ij cos^2(wt) s_i s_j`, `i < j`.
    pub bare: DMatrix<f64>,
    pub omega: f64,
}

/// Snapshot of the closed-form solution at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLedger {
    pub t: f64,
    pub alpha: DMatrix<Complex64>,
    pub phi0: DMatrix<f64>,
    pub phi1: DMatrix<f64>,
}

impl PhaseLedger {
    pub fn phase(&self, i: usize, j: usize) -> f64 {
        self.phi0[(i, j)] + self.phi1[(i, j)]
    }

    /// `sum_{i<j} Phi_ij s_i s_j` for the basis configuration `index`.
    pub fn configuration_phase(&self, index: usize) -> f64 {
        let n = self.phi0.nrows();
        let mut p = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                p += self.phase(i, j) * spin_sign(index, i) * spin_sign(index, j);
            }
        }
        p
    }

    /// `|sum_i alpha_{n,i} (s_i - r_i)|^2` for mode `n`, zero temperature.
    pub fn decoherence_exponent(&self, mode: usize, s: usize, r: usize) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.alpha.ncols() {
            let d = spin_sign(s, i) - spin_sign(r, i);
            if d != 0.0 {
                acc += self.alpha[(mode, i)] * d;
            }
        }
        acc.norm_sqr()
    }
}

impl SpinPhononSystem {
    pub fn new(
        frequencies: Vec<f64>,
        spin_phonon: DMatrix<f64>,
        bare: DMatrix<f64>,
        omega: f64,
    ) -> Result<Self> {
        let n_modes = frequencies.len();
        if spin_phonon.nrows() != n_modes {
            return Err(Error::DimensionMismatch {
                expected: n_modes,
                found: spin_phonon.nrows(),
            });
        }
        let n = spin_phonon.ncols();
        if bare.nrows() != n || bare.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bare.nrows(),
            });
        }
        if !(omega > 0.0) {
            return Err(Error::InvalidInput(format!("drive frequency {omega} must be positive")));
        }
        let system = Self {
            frequencies,
            spin_phonon,
            bare,
            omega,
        };
        for mode in 0..n_modes {
            if system.is_coupled(mode) {
                let detuning = omega - system.frequencies[mode];
                if detuning.abs() < POLE_TOLERANCE {
                    return Err(Error::ResonantDrive {
                        omega,
                        mode,
                        mode_frequency: system.frequencies[mode],
                        detuning,
                        margin: 0.0,
                    });
                }
            }
        }
        Ok(system)
    }

    /// Harmonic-trap crystal driven at `omega` (units of `nu`).
    pub fn from_model(model: &CouplingModel, omega: f64) -> Result<Self> {
        let unit = model.coupling_unit();
        Self::new(
            model.spectrum.frequencies.clone(),
            model.rates(),
            model.bare.clone() * unit,
            omega,
        )
    }

    pub fn n_spins(&self) -> usize {
        self.spin_phonon.ncols()
    }

    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_coupled(&self, mode: usize) -> bool {
        self.spin_phonon.row(mode).iter().any(|g| *g != 0.0)
    }

    /// Long-time coupling rates `G_ij = lim Phi_ij / t`.
    pub fn effective_couplings(&self) -> DMatrix<f64> {
        let n = self.n_spins();
        let w = self.omega;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                return 0.0;
            }
            let mut g = 0.5 * self.bare[(i, j)];
            for (mode, &wn) in self.frequencies.iter().enumerate() {
                if self.is_coupled(mode) {
                    g += self.spin_phonon[(mode, i)] * self.spin_phonon[(mode, j)] * wn / (w * w - wn * wn);
                }
            }
            g
        })
    }

    pub fn displacement_amplitudes(&self, t: f64) -> Result<DMatrix<Complex64>> {
        check_time(t)?;
        let w = self.omega;
        let i = Complex64::new(0.0, 1.0);
        let mut alpha = DMatrix::zeros(self.n_modes(), self.n_spins());
        for (mode, &wn) in self.frequencies.iter().enumerate() {
            if !self.is_coupled(mode) {
                continue;
            }
            let a = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -(wn - w) * t)) / (w - wn);
            let b = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -(wn + w) * t)) / (w + wn);
            let bracket = i * (a - b) * 0.5;
            for site in 0..self.n_spins() {
                alpha[(mode, site)] = bracket * self.spin_phonon[(mode, site)];
            }
        }
        Ok(alpha)
    }

    /// Bare and phonon-mediated accumulated phases.
    pub fn accumulated_phases(&self, t: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        check_time(t)?;
        let n = self.n_spins();
        let w = self.omega;
        let bare_shape = t + (2.0 * w * t).sin() / (2.0 * w);
        let phi0 = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.5 * self.bare[(i, j)] * bare_shape });
        let mut phi1 = DMatrix::zeros(n, n);
        let (sw, cw) = (w * t).sin_cos();
        for (mode, &wn) in self.frequencies.iter().enumerate() {
            if !self.is_coupled(mode) {
                continue;
            }
            let d = w * w - wn * wn;
            let (sn, cn) = (wn * t).sin_cos();
            let shape = 0.5 * t + (2.0 * w * t).sin() / (4.0 * w) + (wn * cw * sn - w * sw * cn) / d;
            let pref = 2.0 * wn / d * shape;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        phi1[(i, j)] += pref * self.spin_phonon[(mode, i)] * self.spin_phonon[(mode, j)];
                    }
                }
            }
        }
        Ok((phi0, phi1))
    }

    pub fn ledger(&self, t: f64) -> Result<PhaseLedger> {
        let alpha = self.displacement_amplitudes(t)?;
        let (phi0, phi1) = self.accumulated_phases(t)?;
        Ok(PhaseLedger { t, alpha, phi0, phi1 })
    }

    fn check_state(&self, initial: &SpinState) -> Result<()> {
        if initial.n_spins() != self.n_spins() {
            return Err(Error::DimensionMismatch {
                expected: self.n_spins(),
                found: initial.n_spins(),
            });
        }
        Ok(())
    }

    /// Total decoherence exponent `sum_n F_n(t, s, r)` for every pair `(s, r)`.
    fn decoherence_table(&self, ledger: &PhaseLedger, coth: &[f64]) -> DMatrix<f64> {
        let dim = 1usize << self.n_spins();
        let mut table = DMatrix::zeros(dim, dim);
        for s in 0..dim {
            for r in 0..s {
                let mut f = 0.0;
                for mode in 0..self.n_modes() {
                    if self.is_coupled(mode) {
                        f += ledger.decoherence_exponent(mode, s, r) * coth[mode];
                    }
                }
                table[(s, r)] = f;
                table[(r, s)] = f;
            }
        }
        table
    }

    pub fn reduced_density(&self, initial: &SpinState, thermal: &ThermalSpec, t: f64) -> Result<SpinDensity> {
        self.check_state(initial)?;
        let coth = thermal.coth_factors(&self.frequencies)?;
        let ledger = self.ledger(t)?;
        let f = self.decoherence_table(&ledger, &coth);
        let dim = initial.dim();
        let phases: Vec<f64> = (0..dim).map(|s| ledger.configuration_phase(s)).collect();
        let c = initial.amplitudes();
        let matrix = DMatrix::from_fn(dim, dim, |s, r| {
            if s == r {
                return Complex64::new(c[s].norm_sqr(), 0.0);
            }
            c[s] * c[r].conj() * Complex64::from_polar((-0.5 * f[(s, r)]).exp(), -(phases[s] - phases[r]))
        });
        Ok(SpinDensity { matrix })
    }

    /// `sum_{s,r} |C_s|^2 |C_r|^2 exp(-sum_n F_n)`.
    pub fn purity(&self, initial: &SpinState, thermal: &ThermalSpec, t: f64) -> Result<f64> {
        self.check_state(initial)?;
        let coth = thermal.coth_factors(&self.frequencies)?;
        let ledger = self.ledger(t)?;
        let f = self.decoherence_table(&ledger, &coth);
        let p = initial.probabilities();
        let mut sum = 0.0;
        for s in 0..p.len() {
            for r in 0..p.len() {
                sum += p[s] * p[r] * (-f[(s, r)]).exp();
            }
        }
        Ok(sum)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("time {t} must be finite and non-negative")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::CrystalSpec;
    use std::f64::consts::PI;

    fn system(eps: f64, omega: f64) -> SpinPhononSystem {
        let model = CouplingModel::harmonic(&CrystalSpec::harmonic(3, eps)).unwrap();
        SpinPhononSystem::from_model(&model, omega).unwrap()
    }

    fn gate_time(sys: &SpinPhononSystem) -> f64 {
        PI / (4.0 * sys.effective_couplings()[(0, 1)])
    }

    #[test]
    fn basis_ordering_puts_first_spin_in_lowest_bit() {
        assert_eq!(spin_sign(0b001, 0), -1.0);
        assert_eq!(spin_sign(0b001, 1), 1.0);
        assert_eq!(spin_sign(0b100, 2), -1.0);
    }

    #[test]
    fn state_requires_normalization() {
        let bad = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(SpinState::new(bad.clone()).is_err());
        assert!(SpinState::normalized(bad).is_ok());
        assert!(SpinState::new(vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn everything_vanishes_at_zero_time() {
        let sys = system(0.1, 2.977);
        let l = sys.ledger(0.0).unwrap();
        assert!(l.alpha.iter().all(|a| a.norm() == 0.0));
        assert!(l.phi0.iter().all(|p| *p == 0.0));
        assert!(l.phi1.iter().all(|p| p.abs() < 1e-15));
    }

    #[test]
    fn full_rephasing_zeros_alpha_and_restores_purity() {
        // Choose w, w_n commensurate so both exponentials return to one.
        let wn = 2.0;
        let w = 3.0;
        let g = DMatrix::from_row_slice(1, 2, &[0.05, -0.03]);
        let bare = DMatrix::from_row_slice(2, 2, &[0.0, 0.001, 0.001, 0.0]);
        let sys = SpinPhononSystem::new(vec![wn], g, bare, w).unwrap();
        let t = 2.0 * PI;
        let alpha = sys.displacement_amplitudes(t).unwrap();
        assert!(alpha.iter().all(|a| a.norm() < 1e-14));
        let p = sys.purity(&SpinState::plus(2), &ThermalSpec::Zero, t).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let p_mid = sys.purity(&SpinState::plus(2), &ThermalSpec::Zero, 0.7).unwrap();
        assert!(p_mid < 1.0);
    }

    #[test]
    fn alpha_respects_bound() {
        let sys = system(0.1, 2.977);
        for k in 0..50 {
            let t = 0.37 * k as f64;
            let alpha = sys.displacement_amplitudes(t).unwrap();
            for (mode, &wn) in sys.frequencies.iter().enumerate() {
                for i in 0..3 {
                    let g = sys.spin_phonon[(mode, i)].abs();
                    let bound = g * (1.0 / (sys.omega - wn).abs() + 1.0 / (sys.omega + wn));
                    assert!(alpha[(mode, i)].norm() <= bound + 1e-15);
                }
            }
        }
    }

    #[test]
    fn exact_pole_is_rejected() {
        let model = CouplingModel::harmonic(&CrystalSpec::harmonic(3, 0.1)).unwrap();
        let w = model.spectrum.frequencies[1];
        assert!(matches!(
            SpinPhononSystem::from_model(&model, w),
            Err(Error::ResonantDrive { mode: 1, .. })
        ));
        // the uncoupled centre-of-mass mode is not a pole
        assert!(SpinPhononSystem::from_model(&model, 1.0).is_ok());
    }

    #[test]
    fn effective_couplings_match_coupling_module() {
        let model = CouplingModel::harmonic(&CrystalSpec::harmonic(3, 0.1)).unwrap();
        let sys = SpinPhononSystem::from_model(&model, 2.977).unwrap();
        let total = model
            .total(2.977, crate::couplings::ResonanceGuard::PoleOnly)
            .unwrap()
            .matrix
            * model.coupling_unit();
        assert!((sys.effective_couplings() - total).amax() < 1e-14);
    }

    #[test]
    fn phase_slope_approaches_total_coupling() {
        let sys = system(0.1, 2.977);
        let g = sys.effective_couplings();
        let g_rms = crate::couplings::coupling_rms(&g);
        let t = 1e3 / g_rms;
        let (p0, p1) = sys.accumulated_phases(t).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let slope = (p0[(i, j)] + p1[(i, j)]) / t;
            assert!((slope / g[(i, j)] - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn gate_phase_is_quarter_pi_up_to_bounded_residue() {
        let sys = system(0.1, 2.977);
        let t = gate_time(&sys);
        let l = sys.ledger(t).unwrap();
        let w = sys.omega;
        let mut bound = sys.bare[(0, 1)] / (2.0 * w);
        for (mode, &wn) in sys.frequencies.iter().enumerate() {
            let gg = (sys.spin_phonon[(mode, 0)] * sys.spin_phonon[(mode, 1)]).abs();
            bound += 2.0 * gg * wn * (w + wn) / (w * w - wn * wn).powi(2);
        }
        assert!((l.phase(0, 1) - PI / 4.0).abs() < bound);
    }

    #[test]
    fn zero_modulation_leaves_state_untouched() {
        let sys = system(0.0, 2.977);
        let psi = SpinState::plus(3);
        let rho = sys.reduced_density(&psi, &ThermalSpec::Zero, 37.0).unwrap();
        assert!((rho.matrix - psi.density().matrix).camax() < 1e-15);
    }

    #[test]
    fn basis_state_stays_pure() {
        let sys = system(0.1, 2.977);
        let psi = SpinState::basis(3, 5);
        let rho = sys.reduced_density(&psi, &ThermalSpec::Temperature(2.0), 12.3).unwrap();
        assert!((rho.matrix - psi.density().matrix).camax() < 1e-15);
    }

    #[test]
    fn graph_fidelity_trivial_cases() {
        let g = graph_state(3);
        assert!((graph_fidelity(&g.density(), &g).unwrap() - 1.0).abs() < 1e-14);
        let mixed = SpinDensity::maximally_mixed(3);
        assert!((graph_fidelity(&mixed, &g).unwrap() - 0.125).abs() < 1e-14);
        assert!(matches!(
            graph_fidelity(&mixed, &graph_state(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn graph_fidelity_at_gate_time() {
        let sys = system(0.1, 2.977);
        let t = gate_time(&sys);
        let rho = sys.reduced_density(&SpinState::plus(3), &ThermalSpec::Zero, t).unwrap();
        let f = graph_fidelity(&rho, &graph_state(3)).unwrap();
        assert!((f - 0.965).abs() < 0.01, "fidelity {f}");
    }

    #[test]
    fn purity_operation_matches_trace_of_square() {
        let sys = system(0.1, 2.977);
        let psi = SpinState::plus(3);
        for &t in &[0.3, 5.0, 41.7, gate_time(&sys)] {
            let thermal = ThermalSpec::Occupations(vec![0.0, 0.5, 1.5]);
            let rho = sys.reduced_density(&psi, &thermal, t).unwrap();
            let p = sys.purity(&psi, &thermal, t).unwrap();
            assert!((rho.purity() - p).abs() < 1e-10);
        }
    }

    #[test]
    fn purity_decreases_with_temperature() {
        let sys = system(0.1, 2.977);
        let psi = SpinState::plus(3);
        let t = gate_time(&sys);
        let mut last = 1.0 + 1e-15;
        for kt in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let p = sys.purity(&psi, &ThermalSpec::Temperature(kt), t).unwrap();
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn coth_matches_occupation() {
        let f = ThermalSpec::Temperature(1.3).coth_factors(&[0.7, 2.0]).unwrap();
        for (c, w) in f.iter().zip([0.7f64, 2.0]) {
            assert!((c - 1.0 / (w / 2.6).tanh()).abs() < 1e-12);
        }
        assert_eq!(ThermalSpec::Zero.coth_factors(&[1.0]).unwrap(), vec![1.0]);
        assert!(ThermalSpec::Occupations(vec![-0.1]).coth_factors(&[1.0]).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let a = SpinState::basis(2, 0).density();
        let b = SpinState::basis(2, 3).density();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
    }
}
