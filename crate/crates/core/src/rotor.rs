//! Rigid-rotor Stark maps in the `M = 0` block.
//!
//! Energies are in units of the rotational constant `B`, fields in `B/mu_c`
//! and dipoles in `mu_c`. The Hamiltonian `J^2 - f cos(theta)` is tridiagonal
//! in `|J, 0>` with `<J+1|cos|J> = (J+1)/sqrt((2J+1)(2J+3))`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub const DEFAULT_J_MAX: usize = 12;
pub const MIN_J_MAX: usize = 6;
/// Overlap below which consecutive grid points count as ambiguous.
pub const TRACKING_MIN_OVERLAP: f64 = 0.5;
/// Overlap below which the grid is refined locally.
pub const REFINE_OVERLAP: f64 = 0.9;
pub const DEFAULT_WINDOW_TOLERANCE: f64 = 0.005;
const MAX_REFINEMENT_DEPTH: usize = 12;
const SLOPE_STEP: f64 = 1e-4;
const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RotorSpec {
    pub j_max: usize,
    /// Strictly increasing dc fields.
    pub fields: Vec<f64>,
}

impl RotorSpec {
    pub fn new(j_max: usize, fields: Vec<f64>) -> Result<Self> {
        if j_max < MIN_J_MAX {
            return Err(Error::InvalidInput(format!("j_max = {j_max} below {MIN_J_MAX}")));
        }
        if fields.is_empty() {
            return Err(Error::InvalidInput("empty field grid".into()));
        }
        if fields.windows(2).any(|w| !(w[1] > w[0])) || fields.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidInput("field grid must be finite and strictly increasing".into()));
        }
        Ok(Self { j_max, fields })
    }

    /// Uniform grid `[lo, hi]` with `points` entries.
    pub fn uniform(j_max: usize, lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidInput("need at least two grid points".into()));
        }
        let fields = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
        Self::new(j_max, fields)
    }
}

pub fn cos_matrix_element(j: usize) -> f64 {
    let j = j as f64;
    (j + 1.0) / ((2.0 * j + 1.0) * (2.0 * j + 3.0)).sqrt()
}

pub fn cos_operator(j_max: usize) -> DMatrix<f64> {
    let dim = j_max + 1;
    let mut c = DMatrix::zeros(dim, dim);
    for j in 0..j_max {
        let v = cos_matrix_element(j);
        c[(j, j + 1)] = v;
        c[(j + 1, j)] = v;
    }
    c
}

pub fn rotor_hamiltonian(j_max: usize, field: f64) -> DMatrix<f64> {
    let mut h = cos_operator(j_max) * (-field);
    for j in 0..=j_max {
        h[(j, j)] = (j * (j + 1)) as f64;
    }
    h
}

/// Eigenpairs at one field, ascending in energy.
fn diagonalize(j_max: usize, field: f64) -> (Vec<f64>, Vec<DVector<f64>>) {
    let eig = SymmetricEigen::new(rotor_hamiltonian(j_max, field));
    let mut order: Vec<usize> = (0..=j_max).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    (values, vectors)
}

fn expectation(op: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(op * v))
}

/// Tracked states along the field grid; index `k` is the state that is
/// `|k, 0>` at the first grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct StarkMap {
    pub j_max: usize,
    pub fields: Vec<f64>,
    /// `energies[point][state]`.
    pub energies: Vec<Vec<f64>>,
    /// `<cos theta>` = induced dipole in units of `mu_c`.
    pub dipoles: Vec<Vec<f64>>,
    /// Tracked eigenvectors, sign-aligned along the grid.
    vectors: Vec<Vec<DVector<f64>>>,
    /// Grid points inserted by local refinement.
    pub refined_points: usize,
}

impl StarkMap {
    pub fn n_states(&self) -> usize {
        self.j_max + 1
    }

    pub fn dipole_curve(&self, state: usize) -> Vec<f64> {
        self.dipoles.iter().map(|d| d[state]).collect()
    }

    pub fn energy_curve(&self, state: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[state]).collect()
    }

    /// Grid index whose field is closest to `field`.
    fn nearest(&self, field: f64) -> usize {
        match self.fields.binary_search_by(|f| f.total_cmp(&field)) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) if k >= self.fields.len() => self.fields.len() - 1,
            Err(k) => {
                if field - self.fields[k - 1] < self.fields[k] - field {
                    k - 1
                } else {
                    k
                }
            }
        }
    }

    /// Energy, dipole and eigenvector of tracked `state` at an arbitrary
    /// field, matched by overlap with the nearest grid point.
    pub fn evaluate(&self, state: usize, field: f64) -> Result<(f64, f64)> {
        let reference = &self.vectors[self.nearest(field)][state];
        let (values, vectors) = diagonalize(self.j_max, field);
        let (best, overlap) = vectors
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.dot(reference).abs()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if overlap < TRACKING_MIN_OVERLAP {
            return Err(Error::TrackingAmbiguity { field, overlap });
        }
        Ok((values[best], expectation(&cos_operator(self.j_max), &vectors[best])))
    }

    pub fn dipole_at(&self, state: usize, field: f64) -> Result<f64> {
        self.evaluate(state, field).map(|(_, d)| d)
    }

    /// `d mu / d E_dc` by a centred difference of the tracked dipole.
    pub fn dipole_slope(&self, state: usize, field: f64) -> Result<f64> {
        let up = self.dipole_at(state, field + SLOPE_STEP)?;
        let down = self.dipole_at(state, field - SLOPE_STEP)?;
        Ok((up - down) / (2.0 * SLOPE_STEP))
    }
}

/// Assigns each previous state its best-overlapping new eigenvector.
fn match_states(previous: &[DVector<f64>], vectors: &[DVector<f64>]) -> (Vec<usize>, f64) {
    let mut taken = vec![false; vectors.len()];
    let mut assignment = vec![0; previous.len()];
    let mut worst: f64 = 1.0;
    for (p, prev) in previous.iter().enumerate() {
        let (best, overlap) = vectors
            .iter()
            .enumerate()
            .filter(|(k, _)| !taken[*k])
            .map(|(k, v)| (k, v.dot(prev).abs()))
            .fold((usize::MAX, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        taken[best] = true;
        assignment[p] = best;
        worst = worst.min(overlap);
    }
    (assignment, worst)
}

struct Tracker {
    j_max: usize,
    cos: DMatrix<f64>,
    map: StarkMap,
}

impl Tracker {
    fn push(&mut self, field: f64, values: &[f64], vectors: &[DVector<f64>], assignment: &[usize]) {
        let previous = self.map.vectors.last();
        let mut tracked = Vec::with_capacity(assignment.len());
        for (state, &k) in assignment.iter().enumerate() {
            let mut v = vectors[k].clone();
            if let Some(prev) = previous {
                if v.dot(&prev[state]) < 0.0 {
                    v = -v;
                }
            }
            tracked.push(v);
        }
        self.map.fields.push(field);
        self.map.energies.push(assignment.iter().map(|&k| values[k]).collect());
        self.map
            .dipoles
            .push(tracked.iter().map(|v| expectation(&self.cos, v)).collect());
        self.map.vectors.push(tracked);
    }

    /// Advances from the last stored point to `field`, bisecting the step
    /// while consecutive overlaps stay below the refinement threshold.
    fn advance(&mut self, field: f64, depth: usize) -> Result<()> {
        let (values, vectors) = diagonalize(self.j_max, field);
        let previous = self.map.vectors.last().expect("tracker starts with one point").clone();
        let (assignment, worst) = match_states(&previous, &vectors);
        if worst >= REFINE_OVERLAP {
            self.push(field, &values, &vectors, &assignment);
            return Ok(());
        }
        if depth >= MAX_REFINEMENT_DEPTH {
            if worst < TRACKING_MIN_OVERLAP {
                return Err(Error::TrackingAmbiguity { field, overlap: worst });
            }
            self.push(field, &values, &vectors, &assignment);
            return Ok(());
        }
        let last = *self.map.fields.last().expect("nonempty");
        let mid = 0.5 * (last + field);
        self.advance(mid, depth + 1)?;
        self.map.refined_points += 1;
        self.advance(field, depth + 1)
    }
}

/// Diagonalizes on the grid and follows each state by overlap continuity.
pub fn stark_map(spec: &RotorSpec) -> Result<StarkMap> {
    let spec = RotorSpec::new(spec.j_max, spec.fields.clone())?;
    let j_max = spec.j_max;
    let mut tracker = Tracker {
        j_max,
        cos: cos_operator(j_max),
        map: StarkMap {
            j_max,
            fields: Vec::new(),
            energies: Vec::new(),
            dipoles: Vec::new(),
            vectors: Vec::new(),
            refined_points: 0,
        },
    };
    let (values, mut vectors) = diagonalize(j_max, spec.fields[0]);
    // sign convention: the component on |k, 0> of state k is positive
    for (k, v) in vectors.iter_mut().enumerate() {
        if v[k] < 0.0 {
            *v = -v.clone();
        }
    }
    let identity: Vec<usize> = (0..=j_max).collect();
    tracker.push(spec.fields[0], &values, &vectors, &identity);
    for &f in &spec.fields[1..] {
        tracker.advance(f, 0)?;
    }
    // drop refinement points so the map lines up with the requested grid
    if tracker.map.refined_points > 0 {
        let keep: Vec<usize> = tracker
            .map
            .fields
            .iter()
            .enumerate()
            .filter(|(_, f)| spec.fields.contains(f))
            .map(|(k, _)| k)
            .collect();
        let m = &mut tracker.map;
        m.fields = keep.iter().map(|&k| m.fields[k]).collect();
        m.energies = keep.iter().map(|&k| m.energies[k].clone()).collect();
        m.dipoles = keep.iter().map(|&k| m.dipoles[k].clone()).collect();
        m.vectors = keep.iter().map(|&k| m.vectors[k].clone()).collect();
    }
    Ok(tracker.map)
}

/// Largest change of the lowest `states` dipoles between `j_max` and
/// `j_max + 2` at `field`.
pub fn basis_convergence(j_max: usize, field: f64, states: usize) -> f64 {
    let dip = |jm: usize| -> Vec<f64> {
        let (_, vectors) = diagonalize(jm, field);
        let cos = cos_operator(jm);
        vectors.iter().take(states).map(|v| expectation(&cos, v)).collect()
    };
    let a = dip(j_max);
    let b = dip(j_max + 2);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweetSpot {
    pub states: (usize, usize),
    /// `E_0` in `B/mu_c`.
    pub field: f64,
    /// Common induced dipole in `mu_c`.
    pub dipole: f64,
    /// `d mu / d E` of each state at `E_0`.
    pub slopes: (f64, f64),
}

/// First crossing of the two tracked dipole curves on the grid, refined by
/// bisection with re-diagonalization.
pub fn find_sweet_spot(map: &StarkMap, states: (usize, usize)) -> Result<SweetSpot> {
    let (a, b) = states;
    if a >= map.n_states() || b >= map.n_states() || a == b {
        return Err(Error::InvalidInput(format!("invalid state pair ({a}, {b})")));
    }
    let diff: Vec<f64> = map.dipoles.iter().map(|d| d[a] - d[b]).collect();
    let bracket = (1..diff.len()).find(|&k| diff[k - 1] != 0.0 && diff[k - 1].signum() != diff[k].signum());
    let k = bracket.ok_or(Error::NoCrossing)?;
    let mut lo = map.fields[k - 1];
    let mut hi = map.fields[k];
    let f = |x: f64| -> Result<f64> { Ok(map.dipole_at(a, x)? - map.dipole_at(b, x)?) };
    let mut f_lo = f(lo)?;
    if diff[k] == 0.0 {
        lo = hi;
    } else {
        while hi - lo > ROOT_TOLERANCE * hi.abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            let f_mid = f(mid)?;
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
    }
    let field = 0.5 * (lo + hi);
    let dipole = 0.5 * (map.dipole_at(a, field)? + map.dipole_at(b, field)?);
    Ok(SweetSpot {
        states,
        field,
        dipole,
        slopes: (map.dipole_slope(a, field)?, map.dipole_slope(b, field)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearWindow {
    pub lo: f64,
    pub hi: f64,
    pub tolerance: f64,
}

impl LinearWindow {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, field: f64) -> bool {
        field >= self.lo && field <= self.hi
    }
}

/// Largest tangent deviation of either state at offset `delta` from `E_0`.
fn tangent_deviation(map: &StarkMap, sweet: &SweetSpot, delta: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (state, slope) in [(sweet.states.0, sweet.slopes.0), (sweet.states.1, sweet.slopes.1)] {
        for sign in [-1.0, 1.0] {
            let x = sweet.field + sign * delta;
            let mu = map.dipole_at(state, x)?;
            worst = worst.max((mu - sweet.dipole - slope * sign * delta).abs());
        }
    }
    Ok(worst)
}

/// Maximal symmetric interval around `E_0` in which both dipole curves stay
/// within `tolerance * mu_c` of their tangents.
pub fn linear_window(map: &StarkMap, sweet: &SweetSpot, tolerance: f64) -> Result<LinearWindow> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {tolerance} must be >= 0")));
    }
    let limit = (sweet.field - map.fields[0]).min(map.fields[map.fields.len() - 1] - sweet.field);
    let step = (limit / 2000.0).max(1e-6);
    let mut good = 0.0;
    let mut bad = None;
    let mut delta = step;
    while delta <= limit {
        if tangent_deviation(map, sweet, delta)? >= tolerance {
            bad = Some(delta);
            break;
        }
        good = delta;
        delta += step;
    }
    if let Some(mut hi) = bad {
        // the deviation grows monotonically inside one step; bisect the edge
        let mut lo = good;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if tangent_deviation(map, sweet, mid)? < tolerance {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        good = lo;
    }
    Ok(LinearWindow {
        lo: sweet.field - good,
        hi: sweet.field + good,
        tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationDepth {
    /// `|d mu_a/dE| E_ac / |mu_0|`.
    pub from_first: f64,
    pub from_second: f64,
}

impl ModulationDepth {
    pub fn mean(&self) -> f64 {
        0.5 * (self.from_first + self.from_second)
    }
}

pub fn modulation_depth(sweet: &SweetSpot, window: &LinearWindow, e_ac: f64) -> Result<ModulationDepth> {
    let e_ac = e_ac.abs();
    if e_ac > window.half_width() {
        return Err(Error::OutsideLinearWindow {
            e_ac,
            half_width: window.half_width(),
        });
    }
    let mu0 = sweet.dipole.abs();
    Ok(ModulationDepth {
        from_first: sweet.slopes.0.abs() * e_ac / mu0,
        from_second: sweet.slopes.1.abs() * e_ac / mu0,
    })
}

/// `E_ac` giving modulation depth `epsilon` for state `which` of the pair.
pub fn ac_amplitude_for(sweet: &SweetSpot, epsilon: f64, which: usize) -> f64 {
    let slope = if which == 0 { sweet.slopes.0 } else { sweet.slopes.1 };
    epsilon * sweet.dipole.abs() / slope.abs()
}
