//! Classical equilibrium and small oscillations of a 1D dipolar crystal.
//!
//! Harmonic-trap quantities are dimensionless: the solver works in the natural
//! length `(D/m nu^2)^(1/5)` and reports positions in units of the minimal
//! spacing `a`, with frequencies in units of the trap frequency `nu`.
//! Ring-trap frequencies are in units of `D/(hbar a^3)` scaled by `sqrt(gamma)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Squared frequencies below this are classified as zero modes.
pub const ZERO_MODE_THRESHOLD: f64 = 1e-9;

const FORCE_TOLERANCE: f64 = 1e-13;
/// Residual accepted once Newton steps stop making progress (rounding floor).
const FORCE_FLOOR: f64 = 1e-10;
const MAX_NEWTON_ITERATIONS: usize = 200;
const RING_IMAGE_CUTOFF: usize = 64;
const LATTICE_SUM_TERMS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trap {
    Harmonic,
    Ring,
}

/// Geometry and dimensionless constants of the crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    pub n_molecules: usize,
    pub trap: Trap,
    /// Relative modulation depth of the induced dipole moment.
    pub epsilon: f64,
    /// `D m / (hbar^2 a)`, ratio of dipolar to kinetic energy (ring trap).
    pub gamma: f64,
    /// `D / (hbar a^3 nu)`, dipolar energy at the lattice spacing over the
    /// trap quantum (harmonic trap). Sets the spin-phonon coupling rates in
    /// units of `nu`; the default 1/2 reproduces the published detuning
    /// windows of the three-molecule crystal.
    pub dipolar_ratio: f64,
}

impl CrystalSpec {
    pub const DEFAULT_DIPOLAR_RATIO: f64 = 0.5;

    pub fn harmonic(n_molecules: usize, epsilon: f64) -> Self {
        Self {
            n_molecules,
            trap: Trap::Harmonic,
            epsilon,
            gamma: f64::NAN,
            dipolar_ratio: Self::DEFAULT_DIPOLAR_RATIO,
        }
    }

    pub fn ring(n_molecules: usize, epsilon: f64, gamma: f64) -> Self {
        Self {
            n_molecules,
            trap: Trap::Ring,
            epsilon,
            gamma,
            dipolar_ratio: f64::NAN,
        }
    }

    pub fn with_dipolar_ratio(mut self, ratio: f64) -> Self {
        self.dipolar_ratio = ratio;
        self
    }

    /// Checks hard constraints and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.n_molecules == 0 {
            return Err(Error::InvalidInput("n_molecules must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "epsilon = {} outside [0, 0.5]",
                self.epsilon
            )));
        }
        if self.epsilon > 0.2 {
            warnings.push(format!(
                "epsilon = {} is large; the small-modulation expansion may be inaccurate",
                self.epsilon
            ));
        }
        match self.trap {
            Trap::Harmonic => {
                if !(self.dipolar_ratio > 0.0) {
                    return Err(Error::InvalidInput(
                        "dipolar_ratio must be positive for a harmonic trap".into(),
                    ));
                }
            }
            Trap::Ring => {
                if !(self.gamma > 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "gamma = {} must exceed 1 for a ring crystal",
                        self.gamma
                    )));
                }
                if self.gamma < 100.0 {
                    warnings.push(format!(
                        "gamma = {} < 100; the crystal may not be well localized",
                        self.gamma
                    ));
                }
                if self.n_molecules < 3 {
                    return Err(Error::InvalidInput("a ring needs at least 3 molecules".into()));
                }
            }
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumConfig {
    /// Positions in units of the minimal spacing `a`, strictly increasing.
    pub positions: Vec<f64>,
    /// Positions in units of `(D/m nu^2)^(1/5)`.
    pub natural_positions: Vec<f64>,
    /// Max-norm of the force at the solution, natural units.
    pub residual: f64,
    /// `a / (D/m nu^2)^(1/5)`; `None` for a single molecule.
    pub xi: Option<f64>,
    pub iterations: usize,
}

impl EquilibriumConfig {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Dimensionless separation `x_i - x_j` in units of `a`.
    pub fn separation(&self, i: usize, j: usize) -> f64 {
        self.positions[i] - self.positions[j]
    }
}

fn energy(x: &[f64]) -> f64 {
    let mut e = 0.5 * x.iter().map(|v| v * v).sum::<f64>();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            e += (x[i] - x[j]).abs().powi(-3);
        }
    }
    e
}

fn gradient(x: &[f64]) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(n, |i, _| {
        let mut f = x[i];
        for j in 0..n {
            if j != i {
                let d = x[i] - x[j];
                f -= 3.0 * d / d.abs().powi(5);
            }
        }
        f
    })
}

/// Hessian of the trap plus dipolar potential in natural units (`m nu^2`).
pub fn natural_hessian(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut h = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let k = 12.0 / (x[i] - x[j]).abs().powi(5);
                h[(i, i)] += k;
                h[(i, j)] -= k;
            }
        }
    }
    h
}

fn is_ordered(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] > w[0])
}

/// Force-balance equilibrium of `N` dipoles in a harmonic trap.
///
/// The potential is strictly convex on the ordered cone, so a Newton
/// iteration with backtracking converges from the equally spaced guess.
pub fn solve_equilibrium(spec: &CrystalSpec) -> Result<EquilibriumConfig> {
    if spec.trap != Trap::Harmonic {
        return Err(Error::InvalidInput(
            "solve_equilibrium needs a harmonic trap; ring sites are equally spaced".into(),
        ));
    }
    let n = spec.n_molecules;
    if n == 0 {
        return Err(Error::InvalidInput("n_molecules must be at least 1".into()));
    }
    if n == 1 {
        return Ok(EquilibriumConfig {
            positions: vec![0.0],
            natural_positions: vec![0.0],
            residual: 0.0,
            xi: None,
            iterations: 0,
        });
    }

    let spacing = 6f64.powf(0.2);
    let centre = (n as f64 - 1.0) / 2.0;
    let mut x: Vec<f64> = (0..n).map(|i| (i as f64 - centre) * spacing).collect();
    let mut e = energy(&x);
    let mut grad = gradient(&x);
    let mut residual = grad.amax();
    let mut iterations = 0;

    while residual > FORCE_TOLERANCE {
        if iterations >= MAX_NEWTON_ITERATIONS {
            if residual < FORCE_FLOOR {
                break;
            }
            return Err(Error::NonConvergence {
                iterations,
                best_residual: residual,
            });
        }
        iterations += 1;
        let h = natural_hessian(&x);
        let step = match h.cholesky() {
            Some(chol) => -chol.solve(&grad),
            None => -grad.clone(),
        };
        let slope = grad.dot(&step);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + lambda * b).collect();
            if is_ordered(&trial) {
                let e_trial = energy(&trial);
                // Near the minimum the energy change drops below rounding; accept
                // any step that still reduces the force there.
                if e_trial <= e + 1e-4 * lambda * slope
                    || (gradient(&trial).amax() < residual && (e_trial - e).abs() < 1e-12 * e.abs())
                {
                    x = trial;
                    e = e_trial;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if residual < FORCE_FLOOR {
                break;
            }
            return Err(Error::NonConvergence {
                iterations,
                best_residual: residual,
            });
        }
        grad = gradient(&x);
        residual = grad.amax();
    }

    // Mirror symmetry about the trap centre.
    let sym: Vec<f64> = (0..n).map(|i| 0.5 * (x[i] - x[n - 1 - i])).collect();
    let residual = gradient(&sym).amax();
    let xi = sym.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(EquilibriumConfig {
        positions: sym.iter().map(|v| v / xi).collect(),
        natural_positions: sym,
        residual,
        xi: Some(xi),
        iterations,
    })
}

/// Normal modes: ascending frequencies and orthonormal mode vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononSpectrum {
    pub frequencies: Vec<f64>,
    /// Row `n` holds the mode vector `c_{n,i}`.
    pub modes: DMatrix<f64>,
    pub zero_modes: usize,
}

impl PhononSpectrum {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn mode(&self, n: usize) -> Vec<f64> {
        self.modes.row(n).iter().copied().collect()
    }

    fn from_dynamical_matrix(k: DMatrix<f64>) -> Result<Self> {
        let n = k.nrows();
        let eig = SymmetricEigen::new(k);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let lowest = eig.eigenvalues[order[0]];
        if lowest < -1e-10 {
            return Err(Error::NegativeEigenvalue { value: lowest });
        }
        let mut frequencies = Vec::with_capacity(n);
        let mut modes = DMatrix::zeros(n, n);
        let mut zero_modes = 0;
        for (row, &idx) in order.iter().enumerate() {
            let w2 = eig.eigenvalues[idx];
            if w2.abs() < ZERO_MODE_THRESHOLD {
                zero_modes += 1;
            }
            frequencies.push(w2.max(0.0).sqrt());
            let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            // sign convention: first significant component positive
            if let Some(first) = v.iter().find(|c| c.abs() > 1e-8) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|c| *c = -*c);
                }
            }
            for (i, c) in v.into_iter().enumerate() {
                modes[(row, i)] = c;
            }
        }
        Ok(Self {
            frequencies,
            modes,
            zero_modes,
        })
    }
}

/// Phonon modes of the harmonic-trap crystal, frequencies in units of `nu`.
///
/// The centre-of-mass mode is stored as the exact uniform vector so that its
/// spin-phonon couplings vanish identically.
pub fn phonon_modes(spec: &CrystalSpec, eq: &EquilibriumConfig) -> Result<PhononSpectrum> {
    if spec.trap != Trap::Harmonic {
        return ring_phonon_modes(spec);
    }
    if eq.len() != spec.n_molecules {
        return Err(Error::DimensionMismatch {
            expected: spec.n_molecules,
            found: eq.len(),
        });
    }
    let mut spectrum = PhononSpectrum::from_dynamical_matrix(natural_hessian(&eq.natural_positions))?;
    let n = eq.len();
    let uniform = 1.0 / (n as f64).sqrt();
    for row in 0..n {
        let is_com = (spectrum.frequencies[row] - 1.0).abs() < 1e-8
            && spectrum.modes.row(row).iter().all(|c| (c - uniform).abs() < 1e-8);
        if is_com {
            spectrum.frequencies[row] = 1.0;
            spectrum.modes.row_mut(row).fill(uniform);
        }
    }
    Ok(spectrum)
}

/// Dimensionless dynamical matrix of the periodic ring with all-neighbour
/// `1/r^3` couplings summed over periodic images.
pub fn ring_dynamical_matrix(n_molecules: usize) -> DMatrix<f64> {
    let n = n_molecules;
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // Self-images move rigidly with the site and exert no restoring force.
            if i == j {
                continue;
            }
            let mut coupling = 0.0;
            for m in -(RING_IMAGE_CUTOFF as i64)..=(RING_IMAGE_CUTOFF as i64) {
                let d = (j as i64 - i as i64 + m * n as i64).abs();
                if d != 0 {
                    coupling += 12.0 / (d as f64).powi(5);
                }
            }
            k[(i, i)] += coupling;
            k[(i, j)] -= coupling;
        }
    }
    k
}

/// Numerically diagonalized ring spectrum (real standing-wave basis).
pub fn ring_phonon_modes(spec: &CrystalSpec) -> Result<PhononSpectrum> {
    PhononSpectrum::from_dynamical_matrix(ring_dynamical_matrix(spec.n_molecules))
}

/// `sin(pi * p / q)` with exact zeros at integer multiples of `pi`.
pub(crate) fn sin_pi_ratio(p: i64, q: i64) -> f64 {
    let r = p.rem_euclid(2 * q);
    if r == 0 || r == q {
        0.0
    } else if r > q {
        -(PI * (2 * q - r) as f64 / q as f64).sin()
    } else {
        (PI * r as f64 / q as f64).sin()
    }
}

/// Closed-form ring mode `n` with plane-wave phases `exp(i 2 pi j n / N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingMode {
    pub index: i64,
    pub frequency: f64,
    pub phases: Vec<Complex64>,
}

/// Nearest-neighbour closed form `2 sqrt(12) |sin(pi n / N)|`.
pub fn ring_frequency(n_molecules: usize, n: i64) -> f64 {
    2.0 * 12f64.sqrt() * sin_pi_ratio(n, n_molecules as i64).abs()
}

/// Full dispersion summed over all lattice neighbours.
pub fn ring_frequency_lattice_sum(n_molecules: usize, n: i64) -> f64 {
    let big_n = n_molecules as i64;
    let w2: f64 = (1..=LATTICE_SUM_TERMS as i64)
        .map(|d| {
            let s = sin_pi_ratio(n * d, big_n);
            // 1 - cos(2 pi n d / N) = 2 sin^2(pi n d / N)
            24.0 / (d as f64).powi(5) * 2.0 * s * s
        })
        .sum();
    w2.sqrt()
}

pub fn ring_spectrum(spec: &CrystalSpec, n: i64) -> Result<RingMode> {
    if spec.trap != Trap::Ring {
        return Err(Error::InvalidInput("ring_spectrum needs a ring trap".into()));
    }
    let big_n = spec.n_molecules as i64;
    if 2 * n.abs() > big_n {
        return Err(Error::InvalidInput(format!(
            "mode index {n} outside -N/2..=N/2 for N = {big_n}"
        )));
    }
    let phases = (0..big_n)
        .map(|j| {
            let angle = 2.0 * PI * ((j * n).rem_euclid(big_n)) as f64 / big_n as f64;
            Complex64::from_polar(1.0, angle)
        })
        .collect();
    Ok(RingMode {
        index: n,
        frequency: ring_frequency(spec.n_molecules, n),
        phases,
    })
}

/// Distinct ring mode labels `-N/2 < n <= N/2`.
pub fn ring_mode_indices(n_molecules: usize) -> Vec<i64> {
    let big_n = n_molecules as i64;
    ((-(big_n - 1) / 2)..=(big_n / 2)).collect()
}
