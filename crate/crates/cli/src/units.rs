//! Conversion of the dimensionless outputs to laboratory units.
//!
//! Everything the simulator reads or writes is dimensionless. Frequencies are
//! in units of the trap frequency `nu`, lengths in `l = (D / (m nu^2))^(1/5)`
//! and couplings in `D eps^2 / (hbar a^3)` with `a` the lattice constant.

/// Typical total coupling at the equal-coupling point of three molecules.
pub const EXAMPLE_COUPLING: f64 = 0.911;

/// Formulas plus a worked example for a given `D / (2 pi hbar a^3)` in kHz.
pub fn units_text(dipolar_khz: f64, epsilon: f64) -> String {
    let g_khz = EXAMPLE_COUPLING * epsilon * epsilon * dipolar_khz;
    // pi / (4 G) with G = 2 pi g_khz kHz
    let gate_us = 1e3 / (8.0 * g_khz);
    format!(
        "\
Units used by dipolar-spin-sim

  frequency       omega            in units of the trap frequency nu
  time            t                in units of 1/nu (sweeps: 1/G, G = D eps^2/(hbar a^3))
  length          x                in units of l = (D/(m nu^2))^(1/5); lattice constant a = xi l
  coupling        G_ij             in units of D eps^2/(hbar a^3)
  ring drive      omega~           in units of sqrt(D/(m a^5))
  Stark field     E_dc             in units of B/mu (rotational constant over dipole moment)
  dipole          mu               in units of the permanent dipole moment

Conversions

  G_ij/(2 pi) [Hz] = G_ij(dimensionless) * eps^2 * D/(2 pi hbar a^3) [Hz]
  t_gate           = pi / (4 G_12)  = 1 / (8 G_12/(2 pi))
  E_dc [V/m]       = E_dc(dimensionless) * B / mu
  dipolar ratio    = D/(hbar a^3 nu), the coupling scale in units of the trap frequency

Example (D/(2 pi hbar a^3) = {dipolar_khz} kHz, eps = {epsilon})

  G_12/(2 pi) = {EXAMPLE_COUPLING} * {epsilon}^2 * {dipolar_khz} kHz = {g_khz:.3} kHz
  t_gate      = {gate_us:.0} us
"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_numbers() {
        let text = units_text(100.0, 0.1);
        assert!(text.contains("0.911 kHz"), "{text}");
        assert!(text.contains("137 us"), "{text}");
    }
}
