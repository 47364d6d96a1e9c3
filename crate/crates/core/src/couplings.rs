//! Bare, spin-phonon and phonon-mediated Ising couplings.
//!
//! Coupling matrices are normalized to the dipolar scale `D eps^2 / (hbar a^3)`;
//! spin-phonon couplings `g_bar` follow the same normalization so that
//! `G1_ij = sum_n g_bar_{n,i} g_bar_{n,j} / (omega^2 - omega_n^2)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::crystal::{
    phonon_modes, ring_frequency, ring_frequency_lattice_sum, ring_mode_indices, sin_pi_ratio,
    solve_equilibrium, CrystalSpec, EquilibriumConfig, PhononSpectrum, Trap,
};
use crate::error::{Error, Result};

/// Detunings smaller than this are treated as exact resonances.
pub const POLE_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MARGIN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    pub omega: f64,
    pub epsilon: f64,
}

/// How close to a coupled phonon mode the drive may be tuned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResonanceGuard {
    /// Require `|omega - omega_n| >= factor * max_i |g_{n,i}| / 2`.
    Margin(f64),
    /// Only reject exact coincidences with a mode frequency.
    PoleOnly,
}

impl Default for ResonanceGuard {
    fn default() -> Self {
        ResonanceGuard::Margin(DEFAULT_MARGIN_FACTOR)
    }
}

impl ResonanceGuard {
    fn factor(self) -> f64 {
        match self {
            ResonanceGuard::Margin(f) => f,
            ResonanceGuard::PoleOnly => 0.0,
        }
    }
}

/// Open interval of admissible drive frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

/// `G0_ij = 1 / |x_i - x_j|^3` in units of `a`.
pub fn bare_couplings(eq: &EquilibriumConfig) -> DMatrix<f64> {
    let n = eq.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            eq.separation(i, j).abs().powi(-3)
        }
    })
}

/// Normalized spin-phonon couplings, row `n` per mode, column `i` per molecule.
pub fn spin_phonon_couplings(eq: &EquilibriumConfig, spectrum: &PhononSpectrum) -> DMatrix<f64> {
    let n = eq.len();
    let Some(xi) = eq.xi else {
        return DMatrix::zeros(spectrum.n_modes(), n);
    };
    let prefactor = -3.0 / xi.powf(2.5);
    DMatrix::from_fn(spectrum.n_modes(), n, |mode, i| {
        let mut sum = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let dc = spectrum.modes[(mode, i)] - spectrum.modes[(mode, j)];
            if dc == 0.0 {
                continue;
            }
            let d = eq.separation(i, j);
            sum += d / d.abs().powi(5) * dc;
        }
        prefactor * sum
    })
}

fn is_coupled(g_sp: &DMatrix<f64>, mode: usize) -> bool {
    g_sp.row(mode).iter().any(|g| *g != 0.0)
}

fn check_detuning(omega: f64, mode: usize, mode_frequency: f64, margin: f64) -> Result<()> {
    let detuning = omega - mode_frequency;
    if detuning.abs() < margin.max(POLE_TOLERANCE) {
        return Err(Error::ResonantDrive {
            omega,
            mode,
            mode_frequency,
            detuning,
            margin,
        });
    }
    Ok(())
}

/// Phonon-mediated couplings at drive frequency `omega` (units of the mode
/// frequencies). `margins[n]` is the excluded half-width around mode `n`.
pub fn mediated_couplings(
    g_sp: &DMatrix<f64>,
    spectrum: &PhononSpectrum,
    omega: f64,
    margins: &[f64],
) -> Result<DMatrix<f64>> {
    let n = g_sp.ncols();
    let mut g1 = DMatrix::zeros(n, n);
    for mode in 0..spectrum.n_modes() {
        if !is_coupled(g_sp, mode) {
            continue;
        }
        let w_n = spectrum.frequencies[mode];
        check_detuning(omega, mode, w_n, margins.get(mode).copied().unwrap_or(0.0))?;
        let denom = omega * omega - w_n * w_n;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g1[(i, j)] += g_sp[(mode, i)] * g_sp[(mode, j)] / denom;
                }
            }
        }
    }
    Ok(g1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalCouplings {
    /// `G_ij = (G0_ij + G1_ij) / 2`.
    pub matrix: DMatrix<f64>,
    pub rms: f64,
}

pub fn coupling_rms(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += g[(i, j)] * g[(i, j)];
        }
    }
    (sum / pairs as f64).sqrt()
}

pub fn total_couplings(bare: &DMatrix<f64>, mediated: &DMatrix<f64>) -> TotalCouplings {
    let matrix = (bare + mediated) * 0.5;
    let rms = coupling_rms(&matrix);
    TotalCouplings { matrix, rms }
}

/// Complement of the excluded bands `[omega_n - m_n, omega_n + m_n]` of all
/// coupled modes within `(0, inf)`.
pub fn valid_regions(g_sp: &DMatrix<f64>, spectrum: &PhononSpectrum, margins: &[f64]) -> Vec<Interval> {
    let mut bands: Vec<(f64, f64)> = (0..spectrum.n_modes())
        .filter(|&m| is_coupled(g_sp, m))
        .map(|m| {
            let w = spectrum.frequencies[m];
            let half = margins.get(m).copied().unwrap_or(0.0);
            (w - half, w + half)
        })
        .collect();
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut regions = Vec::new();
    let mut lo = 0.0;
    for (a, b) in bands {
        if a > lo {
            regions.push(Interval { lo, hi: a });
        }
        lo = lo.max(b);
    }
    regions.push(Interval { lo, hi: f64::INFINITY });
    regions
}

/// Harmonic-trap crystal with its couplings, ready for scans over the drive
/// frequency.
#[derive(Debug, Clone)]
pub struct CouplingModel {
    pub spec: CrystalSpec,
    pub equilibrium: EquilibriumConfig,
    pub spectrum: PhononSpectrum,
    pub bare: DMatrix<f64>,
    pub spin_phonon: DMatrix<f64>,
}

impl CouplingModel {
    pub fn harmonic(spec: &CrystalSpec) -> Result<Self> {
        spec.validate()?;
        let equilibrium = solve_equilibrium(spec)?;
        let spectrum = phonon_modes(spec, &equilibrium)?;
        let bare = bare_couplings(&equilibrium);
        let spin_phonon = spin_phonon_couplings(&equilibrium, &spectrum);
        Ok(Self {
            spec: spec.clone(),
            equilibrium,
            spectrum,
            bare,
            spin_phonon,
        })
    }

    pub fn n_molecules(&self) -> usize {
        self.equilibrium.len()
    }

    /// The coupling unit `D eps^2 / (hbar a^3)` expressed in units of `nu`.
    pub fn coupling_unit(&self) -> f64 {
        self.spec.epsilon * self.spec.epsilon * self.spec.dipolar_ratio
    }

    /// Spin-phonon rates `g_{n,i}` in units of `nu`.
    pub fn rates(&self) -> DMatrix<f64> {
        let eps = self.spec.epsilon;
        let ratio = self.spec.dipolar_ratio;
        DMatrix::from_fn(self.spin_phonon.nrows(), self.spin_phonon.ncols(), |n, i| {
            let g = self.spin_phonon[(n, i)];
            if g == 0.0 {
                0.0
            } else {
                eps * (ratio / (2.0 * self.spectrum.frequencies[n])).sqrt() * g
            }
        })
    }

    /// Excluded half-widths `factor * max_i |g_{n,i}| / 2` per mode.
    pub fn margins(&self, factor: f64) -> Vec<f64> {
        let rates = self.rates();
        (0..rates.nrows())
            .map(|n| factor * rates.row(n).amax() / 2.0)
            .collect()
    }

    pub fn valid_regions(&self, factor: f64) -> Vec<Interval> {
        valid_regions(&self.spin_phonon, &self.spectrum, &self.margins(factor))
    }

    pub fn mediated(&self, omega: f64, guard: ResonanceGuard) -> Result<DMatrix<f64>> {
        mediated_couplings(&self.spin_phonon, &self.spectrum, omega, &self.margins(guard.factor()))
    }

    pub fn total(&self, omega: f64, guard: ResonanceGuard) -> Result<TotalCouplings> {
        Ok(total_couplings(&self.bare, &self.mediated(omega, guard)?))
    }
}

/// Which ring dispersion and spin-phonon amplitudes to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RingForm {
    /// `2 sqrt(12) |sin(pi n/N)|` and `6 sin(2 pi n/N)`.
    #[default]
    NearestNeighbour,
    /// All-neighbour lattice sums.
    LatticeSum,
}

/// Spin-phonon amplitude `g~_n` of ring mode `n`.
pub fn ring_spin_phonon(n_molecules: usize, n: i64, form: RingForm) -> f64 {
    let big_n = n_molecules as i64;
    match form {
        RingForm::NearestNeighbour => 6.0 * sin_pi_ratio(2 * n, big_n),
        RingForm::LatticeSum => (1..=4000i64)
            .map(|d| 6.0 * sin_pi_ratio(2 * n * d, big_n) / (d as f64).powi(4))
            .sum(),
    }
}

pub fn ring_mode_frequency(n_molecules: usize, n: i64, form: RingForm) -> f64 {
    match form {
        RingForm::NearestNeighbour => ring_frequency(n_molecules, n),
        RingForm::LatticeSum => ring_frequency_lattice_sum(n_molecules, n),
    }
}

/// Minimum-image bare coupling on the ring, `1 / min(d, N - d)^3`.
pub fn ring_bare_coupling(n_molecules: usize, separation: i64) -> f64 {
    let big_n = n_molecules as i64;
    let d = separation.rem_euclid(big_n);
    let d = d.min(big_n - d);
    if d == 0 {
        0.0
    } else {
        (d as f64).powi(-3)
    }
}

/// Complex normalized spin-phonon coupling `g_bar_{n,j}` on the ring.
pub fn ring_spin_phonon_coupling(spec: &CrystalSpec, n: i64, site: i64, form: RingForm) -> Complex64 {
    let big_n = spec.n_molecules as i64;
    let w_bar = ring_mode_frequency(spec.n_molecules, n, form) / spec.gamma.sqrt();
    if w_bar == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let amplitude = (spec.epsilon * spec.epsilon / (2.0 * big_n as f64 * spec.gamma * w_bar)).sqrt()
        * ring_spin_phonon(spec.n_molecules, n, form);
    let angle = 2.0 * PI * (site * n).rem_euclid(big_n) as f64 / big_n as f64;
    Complex64::new(0.0, -amplitude) * Complex64::from_polar(1.0, angle)
}

/// Excluded half-width around ring mode `n` in units of `omega~`.
pub fn ring_margin(spec: &CrystalSpec, n: i64, factor: f64, form: RingForm) -> f64 {
    let g = ring_spin_phonon_coupling(spec, n, 0, form).norm();
    factor * g * spec.gamma.sqrt() / 2.0
}

/// Half the phonon-mediated ring coupling, `G1_ij / 2`, for sites separated by
/// `separation`, with the drive `omega~` in ring units. Assembled from the
/// complex couplings `g_bar g_bar*`, so every intermediate carries `gamma`.
pub fn ring_mediated_couplings(
    spec: &CrystalSpec,
    omega_tilde: f64,
    separation: i64,
    guard: ResonanceGuard,
    form: RingForm,
) -> Result<f64> {
    if spec.trap != Trap::Ring {
        return Err(Error::InvalidInput("ring couplings need a ring trap".into()));
    }
    let big_n = spec.n_molecules as i64;
    if separation.rem_euclid(big_n) == 0 {
        return Ok(0.0);
    }
    let eps2 = if spec.epsilon > 0.0 { spec.epsilon * spec.epsilon } else { 1.0 };
    let probe = CrystalSpec { epsilon: eps2.sqrt(), ..spec.clone() };
    let sqrt_gamma = spec.gamma.sqrt();
    let w_bar = omega_tilde / sqrt_gamma;
    let mut g1 = 0.0;
    for n in ring_mode_indices(spec.n_molecules) {
        if n == 0 {
            continue;
        }
        let w_n_tilde = ring_mode_frequency(spec.n_molecules, n, form);
        let g_i = ring_spin_phonon_coupling(&probe, n, separation, form);
        let g_j = ring_spin_phonon_coupling(&probe, n, 0, form);
        if g_j.norm() == 0.0 {
            continue;
        }
        check_detuning(
            omega_tilde,
            n.unsigned_abs() as usize,
            w_n_tilde,
            ring_margin(spec, n, guard.factor(), form),
        )?;
        let w_n = w_n_tilde / sqrt_gamma;
        g1 += 2.0 * (g_i * g_j.conj()).re * w_n / (eps2 * (w_bar * w_bar - w_n * w_n));
    }
    Ok(g1 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize) -> CouplingModel {
        CouplingModel::harmonic(&CrystalSpec::harmonic(n, 0.1)).unwrap()
    }

    #[test]
    fn bare_three_molecules() {
        let m = model(3);
        assert!((m.bare[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((m.bare[(1, 2)] - 1.0).abs() < 1e-12);
        assert!((m.bare[(0, 2)] - 0.125).abs() < 1e-12);
        assert_eq!(m.bare[(1, 1)], 0.0);
    }

    #[test]
    fn bare_ten_molecules_matches_positions() {
        let m = model(10);
        let x = &m.equilibrium.positions;
        assert_eq!(m.bare[(0, 4)], (x[0] - x[4]).abs().powi(-3));
        assert!(m.bare.iter().all(|g| *g >= 0.0));
        assert_eq!(m.bare, m.bare.transpose());
    }

    #[test]
    fn com_row_is_exactly_zero() {
        for n in [2, 3, 5, 8] {
            let m = model(n);
            assert!(m.spin_phonon.row(0).iter().all(|g| *g == 0.0));
        }
    }

    #[test]
    fn breathing_mode_two_molecules_couples_both_spins_equally() {
        // Stretching the pair changes both dipole fields the same way.
        let m = model(2);
        let g = &m.spin_phonon;
        let xi = 6f64.powf(0.2);
        let expected = 3.0 * 2f64.sqrt() / xi.powf(2.5);
        assert!((g[(1, 0)] - expected).abs() < 1e-12);
        assert!((g[(1, 0)] - g[(1, 1)]).abs() < 1e-12);
    }

    #[test]
    fn zero_spin_phonon_gives_zero_mediated() {
        let m = model(3);
        let zero = DMatrix::zeros(3, 3);
        let g1 = mediated_couplings(&zero, &m.spectrum, 2.0, &[0.0; 3]).unwrap();
        assert_eq!(g1, DMatrix::zeros(3, 3));
    }

    #[test]
    fn far_detuned_total_is_half_bare() {
        let m = model(3);
        let t = m.total(1e6, ResonanceGuard::PoleOnly).unwrap();
        assert!((t.matrix.clone() - m.bare.clone() * 0.5).amax() < 1e-10);
    }

    #[test]
    fn resonant_drive_rejected() {
        let m = model(3);
        let w2 = m.spectrum.frequencies[1];
        assert!(matches!(
            m.mediated(w2 + 0.01, ResonanceGuard::default()),
            Err(Error::ResonantDrive { mode: 1, .. })
        ));
        assert!(m.mediated(w2 + 0.01, ResonanceGuard::PoleOnly).is_ok());
        assert!(m.mediated(w2, ResonanceGuard::PoleOnly).is_err());
        // The COM mode is uncoupled and imposes no restriction.
        assert!(m.mediated(1.0, ResonanceGuard::default()).is_ok());
    }

    #[test]
    fn equal_coupling_point() {
        let t = model(3).total(2.977, ResonanceGuard::default()).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((t.matrix[(i, j)] - 0.911).abs() < 0.911 * 0.01);
        }
        assert!((t.rms - 0.911).abs() < 0.01);
    }

    #[test]
    fn afma_favoured_at_3_2() {
        let t = model(3).total(3.2, ResonanceGuard::default()).unwrap();
        assert!(t.matrix[(0, 2)] > t.matrix[(0, 1)]);
        assert!(t.matrix[(0, 1)] > 0.0);
    }

    #[test]
    fn regions_three_molecules() {
        let r = model(3).valid_regions(10.0);
        assert_eq!(r.len(), 3);
        let bounds = [r[0].hi, r[1].lo, r[1].hi, r[2].lo];
        for (b, want) in bounds.iter().zip([1.84, 2.63, 3.23, 3.78]) {
            assert!((b - want).abs() < 0.02 * want, "{b} vs {want}");
        }
        assert!(r[2].hi.is_infinite());
    }

    #[test]
    fn regions_two_molecules_only_breathing_band() {
        let r = model(2).valid_regions(10.0);
        assert_eq!(r.len(), 2);
        let w = 5f64.sqrt();
        assert!((r[0].hi + r[1].lo - 2.0 * w).abs() < 1e-12);
        assert!(r[0].hi < w && r[1].lo > w);
    }

    #[test]
    fn regions_shrink_to_points_as_epsilon_vanishes() {
        let m = CouplingModel::harmonic(&CrystalSpec::harmonic(3, 0.0)).unwrap();
        let r = m.valid_regions(10.0);
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].hi, r[1].lo);
        assert_eq!(r[0].hi, m.spectrum.frequencies[1]);
    }

    #[test]
    fn ring_routes_agree_and_ignore_gamma() {
        let n = 21usize;
        let wt = (ring_frequency(n, 1) + ring_frequency(n, 2)) / 2.0;
        for d in 1..=10i64 {
            let a = ring_mediated_couplings(&CrystalSpec::ring(n, 0.1, 100.0), wt, d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
            let b = ring_mediated_couplings(&CrystalSpec::ring(n, 0.1, 1e4), wt, d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
            assert!((a - b).abs() < 1e-12);
            // cosine form summed over n > 0
            let direct: f64 = (1..=(n as i64 - 1) / 2)
                .map(|k| {
                    let g = ring_spin_phonon(n, k, RingForm::NearestNeighbour);
                    let w = ring_frequency(n, k);
                    g * g * (2.0 * PI * (d * k) as f64 / n as f64).cos() / (n as f64 * (wt * wt - w * w))
                })
                .sum();
            assert!((a - direct).abs() < 1e-12, "d={d}: {a} vs {direct}");
        }
    }

    #[test]
    fn ring_translation_invariance() {
        let spec = CrystalSpec::ring(21, 0.1, 100.0);
        let wt = 3.3;
        for d in 1..21i64 {
            let a = ring_mediated_couplings(&spec, wt, d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
            let b = ring_mediated_couplings(&spec, wt, 21 - d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
        assert_eq!(ring_bare_coupling(21, 20), 1.0);
        assert_eq!(ring_bare_coupling(21, 0), 0.0);
    }

    #[test]
    fn ring_lattice_sum_amplitude_close_to_closed_form() {
        // the lattice sum adds the 1/d^4 tail, a few percent at short wavelengths
        let a = ring_spin_phonon(21, 1, RingForm::NearestNeighbour);
        let b = ring_spin_phonon(21, 1, RingForm::LatticeSum);
        assert!(b > a && (b / a - 1.0) < 0.25);
        assert_eq!(ring_spin_phonon(22, 11, RingForm::LatticeSum), 0.0);
    }
}
