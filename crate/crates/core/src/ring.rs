//! Coupling profiles and lattice-distortion estimates for a homogeneous ring
//! of `N` molecules, in the ring units `D/(hbar a^3)` scaled by `sqrt(gamma)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::couplings::{
    ring_bare_coupling, ring_mediated_couplings, ring_spin_phonon, ResonanceGuard, RingForm,
    POLE_TOLERANCE,
};
use crate::crystal::{ring_frequency, sin_pi_ratio, CrystalSpec};
use crate::error::{Error, Result};

/// Where to put the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RingDrive {
    /// `(w~_k + w~_{k+1}) / 2`.
    Midpoint(usize),
    Explicit(f64),
}

impl RingDrive {
    pub fn omega_tilde(&self, n_molecules: usize) -> f64 {
        match *self {
            RingDrive::Midpoint(k) => {
                0.5 * (ring_frequency(n_molecules, k as i64) + ring_frequency(n_molecules, k as i64 + 1))
            }
            RingDrive::Explicit(w) => w,
        }
    }
}

/// Debye frequency `w~_{N/2}` of the closed-form dispersion.
pub fn debye_frequency() -> f64 {
    2.0 * 12f64.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingProfile {
    pub n_molecules: usize,
    pub omega_tilde: f64,
    /// `1..=N/2`.
    pub distances: Vec<usize>,
    /// `G(d) = G0(d)/2 + G1(d)/2`.
    pub total: Vec<f64>,
    pub bare_half: Vec<f64>,
    pub mediated_half: Vec<f64>,
}

pub fn ring_profile(spec: &CrystalSpec, drive: RingDrive, guard: ResonanceGuard, form: RingForm) -> Result<RingProfile> {
    spec.validate()?;
    let n = spec.n_molecules;
    let omega_tilde = drive.omega_tilde(n);
    let distances: Vec<usize> = (1..=n / 2).collect();
    let mut bare_half = Vec::with_capacity(distances.len());
    let mut mediated_half = Vec::with_capacity(distances.len());
    for &d in &distances {
        bare_half.push(0.5 * ring_bare_coupling(n, d as i64));
        mediated_half.push(ring_mediated_couplings(spec, omega_tilde, d as i64, guard, form)?);
    }
    let total = bare_half.iter().zip(&mediated_half).map(|(a, b)| a + b).collect();
    Ok(RingProfile {
        n_molecules: n,
        omega_tilde,
        distances,
        total,
        bare_half,
        mediated_half,
    })
}

/// Spin configuration used for a displacement estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum SpinConfiguration {
    Ferromagnetic,
    /// Alternating signs; needs even `N` to close on the ring.
    Antiferromagnetic,
    Explicit(Vec<i8>),
    Random { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementEstimate {
    pub n_molecules: usize,
    pub epsilon: f64,
    pub omega_tilde: f64,
    /// `|dx_0 - dx_1|` from the full mode sum, one entry per configuration.
    pub full: Vec<f64>,
    /// Same from the long-wavelength form `|sum_n pref_n (2 pi n / N) S_n|`.
    pub low_band: Vec<f64>,
    /// `sum_n |pref_n 2 pi n / N| / sqrt(N)`, the estimate with `|S_n| = 1/sqrt(N)`.
    pub random_bound: f64,
    pub seed: Option<u64>,
}

impl DisplacementEstimate {
    pub fn median(&self) -> f64 {
        median(&self.full)
    }

    pub fn median_low_band(&self) -> f64 {
        median(&self.low_band)
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `S_n = (1/N) sum_j cos(2 pi j n / N) s_j`.
pub fn structure_factor(config: &[i8], n: i64) -> f64 {
    let big_n = config.len() as i64;
    let sum: f64 = config
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let angle = 2.0 * PI * ((j as i64 * n).rem_euclid(big_n)) as f64 / big_n as f64;
            angle.cos() * f64::from(*s)
        })
        .sum();
    sum / big_n as f64
}

/// Polaron shift prefactors `(eps / w~_n) (g~_n / D~_n)` for `n = 1..=N/2`.
fn prefactors(n_molecules: usize, epsilon: f64, omega_tilde: f64) -> Result<Vec<f64>> {
    (1..=(n_molecules / 2) as i64)
        .map(|n| {
            let wn = ring_frequency(n_molecules, n);
            let g = ring_spin_phonon(n_molecules, n, RingForm::NearestNeighbour);
            if g == 0.0 {
                return Ok(0.0);
            }
            let detuning = wn - omega_tilde;
            if detuning.abs() < POLE_TOLERANCE {
                return Err(Error::ResonantDrive {
                    omega: omega_tilde,
                    mode: n as usize,
                    mode_frequency: wn,
                    detuning,
                    margin: 0.0,
                });
            }
            Ok(epsilon / wn * g / detuning)
        })
        .collect()
}

/// Real-space kernel `K(d) = (1/N) sum_n pref_n sin(2 pi d n / N)`, odd in `d`.
fn kernel(n_molecules: usize, pref: &[f64]) -> Vec<f64> {
    let big_n = n_molecules as i64;
    (0..big_n)
        .map(|d| {
            pref.iter()
                .enumerate()
                .map(|(k, p)| p * sin_pi_ratio(2 * d * (k as i64 + 1), big_n))
                .sum::<f64>()
                / big_n as f64
        })
        .collect()
}

/// Shift of site `i`, paired so that equal spins at `i +- d` cancel exactly.
fn site_shift(config: &[i8], kernel: &[f64], i: usize) -> f64 {
    let n = config.len();
    let mut x = 0.0;
    for d in 1..=(n - 1) / 2 {
        let plus = f64::from(config[(i + d) % n]);
        let minus = f64::from(config[(i + n - d) % n]);
        if plus != minus {
            x += kernel[d] * (plus - minus);
        }
    }
    x
}

fn relative_displacement(config: &[i8], kernel: &[f64]) -> f64 {
    (site_shift(config, kernel, 0) - site_shift(config, kernel, 1)).abs()
}

fn low_band_displacement(config: &[i8], pref: &[f64]) -> f64 {
    let n = config.len() as f64;
    pref.iter()
        .enumerate()
        .map(|(k, p)| {
            let m = (k + 1) as i64;
            p * 2.0 * PI * m as f64 / n * structure_factor(config, m)
        })
        .sum::<f64>()
        .abs()
}

pub fn displacement_bound(
    n_molecules: usize,
    epsilon: f64,
    drive: RingDrive,
    configuration: &SpinConfiguration,
) -> Result<DisplacementEstimate> {
    if n_molecules < 3 {
        return Err(Error::InvalidInput("a ring needs at least 3 molecules".into()));
    }
    let omega_tilde = drive.omega_tilde(n_molecules);
    let pref = prefactors(n_molecules, epsilon, omega_tilde)?;
    let kern = kernel(n_molecules, &pref);
    let n = n_molecules;
    let (configs, seed): (Vec<Vec<i8>>, Option<u64>) = match configuration {
        SpinConfiguration::Ferromagnetic => (vec![vec![1; n]], None),
        SpinConfiguration::Antiferromagnetic => {
            if n % 2 == 1 {
                return Err(Error::InvalidInput("an alternating ring needs even N".into()));
            }
            (vec![(0..n).map(|j| if j % 2 == 0 { 1 } else { -1 }).collect()], None)
        }
        SpinConfiguration::Explicit(c) => {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
            if c.iter().any(|s| *s != 1 && *s != -1) {
                return Err(Error::InvalidInput("spins must be +1 or -1".into()));
            }
            (vec![c.clone()], None)
        }
        SpinConfiguration::Random { samples, seed } => (random_configurations(n, *samples, *seed), Some(*seed)),
    };
    let full = configs.par_iter().map(|c| relative_displacement(c, &kern)).collect();
    let low_band = configs.par_iter().map(|c| low_band_displacement(c, &pref)).collect();
    let random_bound = pref
        .iter()
        .enumerate()
        .map(|(k, p)| (p * 2.0 * PI * (k + 1) as f64 / n as f64).abs())
        .sum::<f64>()
        / (n as f64).sqrt();
    Ok(DisplacementEstimate {
        n_molecules,
        epsilon,
        omega_tilde,
        full,
        low_band,
        random_bound,
        seed,
    })
}

/// Uniform random `+-1` configurations from a seeded generator.
pub fn random_configurations(n_molecules: usize, samples: usize, seed: u64) -> Vec<Vec<i8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| (0..n_molecules).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> CrystalSpec {
        CrystalSpec::ring(n, 0.1, 100.0)
    }

    #[test]
    fn far_detuned_profile_is_half_bare() {
        let p = ring_profile(
            &spec(21),
            RingDrive::Explicit(30.0 * debye_frequency()),
            ResonanceGuard::PoleOnly,
            RingForm::NearestNeighbour,
        )
        .unwrap();
        for (d, g) in p.distances.iter().zip(&p.total) {
            let bare = 0.5 / (*d as f64).powi(3);
            assert!((g / bare - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn profile_length_and_reflection() {
        let s = spec(21);
        let p = ring_profile(&s, RingDrive::Midpoint(1), ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
        assert_eq!(p.distances.len(), 10);
        for d in 1..=10i64 {
            let a = ring_mediated_couplings(&s, p.omega_tilde, d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour).unwrap();
            let b = ring_mediated_couplings(&s, p.omega_tilde, 21 - d, ResonanceGuard::PoleOnly, RingForm::NearestNeighbour)
                .unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn structure_factor_is_bounded() {
        let configs = random_configurations(21, 100, 3);
        for c in &configs {
            for n in 0..=10 {
                assert!(structure_factor(c, n).abs() <= 1.0 + 1e-15);
            }
        }
        assert!((structure_factor(&[1; 21], 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ordered_configurations_do_not_distort() {
        let drive = RingDrive::Midpoint(1);
        let fm = displacement_bound(21, 0.1, drive, &SpinConfiguration::Ferromagnetic).unwrap();
        assert_eq!(fm.full, vec![0.0]);
        let afm = displacement_bound(22, 0.1, drive, &SpinConfiguration::Antiferromagnetic).unwrap();
        assert_eq!(afm.full, vec![0.0]);
        assert!(displacement_bound(21, 0.1, drive, &SpinConfiguration::Antiferromagnetic).is_err());
    }

    #[test]
    fn single_flip_distorts() {
        let mut c = vec![1i8; 21];
        c[5] = -1;
        let e = displacement_bound(21, 0.1, RingDrive::Midpoint(1), &SpinConfiguration::Explicit(c)).unwrap();
        assert!(e.full[0] > 0.0);
    }

    #[test]
    fn random_sampling_is_seeded() {
        let a = displacement_bound(21, 0.1, RingDrive::Midpoint(1), &SpinConfiguration::Random { samples: 20, seed: 9 })
            .unwrap();
        let b = displacement_bound(21, 0.1, RingDrive::Midpoint(1), &SpinConfiguration::Random { samples: 20, seed: 9 })
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed, Some(9));
    }

    #[test]
    fn displacement_is_linear_in_epsilon() {
        let c = SpinConfiguration::Random { samples: 10, seed: 4 };
        let a = displacement_bound(21, 0.05, RingDrive::Midpoint(2), &c).unwrap();
        let b = displacement_bound(21, 0.1, RingDrive::Midpoint(2), &c).unwrap();
        for (x, y) in a.full.iter().zip(&b.full) {
            assert!((2.0 * x - y).abs() < 1e-14);
        }
    }
}
