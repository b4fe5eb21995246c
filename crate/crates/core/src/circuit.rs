//! Lumped-element descriptions of the two line segments and their ABCD
//! (transfer) matrices.
//!
//! The superlattice is a left-handed line: every cell has a series
//! capacitor and a shunt inductor. A supercell holds two such cells, the
//! second scaled by `epsilon` in both L and C so the characteristic
//! impedance is unchanged. The right-handed segment is an ordinary
//! series-L / shunt-C ladder, usually treated in its continuum limit.
//!
//! All quantities are SI (H, F, m, rad/s).

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Geometry and element values of the two-cell left-handed superlattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperlatticeSpec {
    inductance: f64,
    capacitance: f64,
    epsilon: f64,
    supercells: usize,
    supercell_length: f64,
}

impl SuperlatticeSpec {
    pub fn new(
        inductance: f64,
        capacitance: f64,
        epsilon: f64,
        supercells: usize,
        supercell_length: f64,
    ) -> Result<Self> {
        positive("superlattice.inductance", inductance)?;
        positive("superlattice.capacitance", capacitance)?;
        positive("superlattice.epsilon", epsilon)?;
        positive("superlattice.supercell_length", supercell_length)?;
        if supercells == 0 {
            return Err(Error::InvalidParameter {
                name: "superlattice.supercells",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            inductance,
            capacitance,
            epsilon,
            supercells,
            supercell_length,
        })
    }

    /// Returns a copy with a different cell ratio.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(
            self.inductance,
            self.capacitance,
            epsilon,
            self.supercells,
            self.supercell_length,
        )
    }

    /// Returns a copy with a different number of supercells.
    pub fn with_supercells(&self, supercells: usize) -> Result<Self> {
        Self::new(
            self.inductance,
            self.capacitance,
            self.epsilon,
            supercells,
            self.supercell_length,
        )
    }

    pub fn inductance(&self) -> f64 {
        self.inductance
    }

    pub fn capacitance(&self) -> f64 {
        self.capacitance
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn supercells(&self) -> usize {
        self.supercells
    }

    /// Δz, the length of one supercell.
    pub fn supercell_length(&self) -> f64 {
        self.supercell_length
    }

    /// Resonance of the first cell, 1/√(L·C).
    pub fn omega_sl(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }

    /// Total superlattice length n_sl·Δz.
    pub fn length(&self) -> f64 {
        self.supercells as f64 * self.supercell_length
    }

    /// Nominal characteristic impedance √(L/C), shared by both cells.
    pub fn impedance(&self) -> f64 {
        (self.inductance / self.capacitance).sqrt()
    }

    /// Element values (L, C) of a given cell; B is always the ε-scaled copy of A.
    pub fn cell_elements(&self, cell: Cell) -> (f64, f64) {
        match cell {
            Cell::A => (self.inductance, self.capacitance),
            Cell::B => (
                self.epsilon * self.inductance,
                self.epsilon * self.capacitance,
            ),
        }
    }
}

/// Discrete right-handed line of `cells` series-L / shunt-C sections over `length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RightHandedSpec {
    cell_inductance: f64,
    cell_capacitance: f64,
    cells: usize,
    length: f64,
}

impl RightHandedSpec {
    pub fn new(cell_inductance: f64, cell_capacitance: f64, cells: usize, length: f64) -> Result<Self> {
        positive("right_handed.cell_inductance", cell_inductance)?;
        positive("right_handed.cell_capacitance", cell_capacitance)?;
        positive("right_handed.length", length)?;
        if cells == 0 {
            return Err(Error::InvalidParameter {
                name: "right_handed.cells",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            cell_inductance,
            cell_capacitance,
            cells,
            length,
        })
    }

    pub fn cell_inductance(&self) -> f64 {
        self.cell_inductance
    }

    pub fn cell_capacitance(&self) -> f64 {
        self.cell_capacitance
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Inductance per unit length, H/m.
    pub fn inductance_per_length(&self) -> f64 {
        self.cells as f64 * self.cell_inductance / self.length
    }

    /// Capacitance per unit length, F/m.
    pub fn capacitance_per_length(&self) -> f64 {
        self.cells as f64 * self.cell_capacitance / self.length
    }

    /// Cell resonance 1/√(L̃·C̃).
    pub fn omega_r(&self) -> f64 {
        1.0 / (self.cell_inductance * self.cell_capacitance).sqrt()
    }

    pub fn impedance(&self) -> f64 {
        (self.cell_inductance / self.cell_capacitance).sqrt()
    }

    /// Upper edge of the discrete ladder's passband, 2·ω_r.
    pub fn cutoff(&self) -> f64 {
        2.0 * self.omega_r()
    }

    /// Largest wave number of the discrete ladder, π·n_r/d_r.
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI * self.cells as f64 / self.length
    }
}

/// One of the two cells of a supercell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    A,
    B,
}

/// Complex 2×2 transfer matrix mapping (V, I) at the input of a two-port to
/// (V, I) at its output.
///
/// `b12` is in ohms, `b21` in siemens, the diagonal is dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortMatrix {
    pub b11: Complex64,
    pub b12: Complex64,
    pub b21: Complex64,
    pub b22: Complex64,
}

impl TwoPortMatrix {
    pub fn new(b11: Complex64, b12: Complex64, b21: Complex64, b22: Complex64) -> Self {
        Self { b11, b12, b21, b22 }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    pub fn det(&self) -> Complex64 {
        self.b11 * self.b22 - self.b12 * self.b21
    }

    pub fn trace(&self) -> Complex64 {
        self.b11 + self.b22
    }

    /// Applies the matrix to a (V, I) pair.
    pub fn apply(&self, voltage: Complex64, current: Complex64) -> (Complex64, Complex64) {
        (
            self.b11 * voltage + self.b12 * current,
            self.b21 * voltage + self.b22 * current,
        )
    }
}

impl Mul for TwoPortMatrix {
    type Output = TwoPortMatrix;

    fn mul(self, rhs: TwoPortMatrix) -> TwoPortMatrix {
        TwoPortMatrix::new(
            self.b11 * rhs.b11 + self.b12 * rhs.b21,
            self.b11 * rhs.b12 + self.b12 * rhs.b22,
            self.b21 * rhs.b11 + self.b22 * rhs.b21,
            self.b21 * rhs.b12 + self.b22 * rhs.b22,
        )
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            quantity: "omega",
            value: omega,
            domain: "(0, ∞)".into(),
        })
    }
}

/// ABCD matrix of a single left-handed cell: series capacitor followed by a
/// shunt inductor.
pub fn single_cell_abcd(spec: &SuperlatticeSpec, cell: Cell, omega: f64) -> Result<TwoPortMatrix> {
    check_omega(omega)?;
    let (l, c) = spec.cell_elements(cell);
    let i_omega = Complex64::new(0.0, omega);
    // 1 − ω_cell²/ω² with ω_cell² = 1/(L·C)
    let diag = 1.0 - 1.0 / (omega * omega * l * c);
    Ok(TwoPortMatrix::new(
        Complex64::new(diag, 0.0),
        (i_omega * c).inv(),
        (i_omega * l).inv(),
        Complex64::new(1.0, 0.0),
    ))
}

/// Supercell matrix b = b_A · b_B.
pub fn supercell_abcd(spec: &SuperlatticeSpec, omega: f64) -> Result<TwoPortMatrix> {
    Ok(single_cell_abcd(spec, Cell::A, omega)? * single_cell_abcd(spec, Cell::B, omega)?)
}

/// Expanded closed form of the supercell matrix, written out entry by entry.
/// Independent of the matrix product and used to cross-check it.
pub fn supercell_abcd_closed_form(spec: &SuperlatticeSpec, omega: f64) -> Result<TwoPortMatrix> {
    check_omega(omega)?;
    let e = spec.epsilon();
    let u = (spec.omega_sl() / omega).powi(2);
    let i_omega = Complex64::new(0.0, omega);
    let b11 = 1.0 - u * (1.0 + 1.0 / e + 1.0 / (e * e) - u / (e * e));
    let b12 = (i_omega * spec.capacitance()).inv() * (1.0 + 1.0 / e - u / e);
    let b21 = (i_omega * spec.inductance()).inv() * (1.0 + 1.0 / e - u / (e * e));
    let b22 = 1.0 - u / e;
    Ok(TwoPortMatrix::new(
        Complex64::new(b11, 0.0),
        b12,
        b21,
        Complex64::new(b22, 0.0),
    ))
}

/// Element values used for every figure-scale computation: L·C = 1.2e-22 s²
/// and Z = √3000 Ω for the superlattice, L̃·C̃ = 1.875e-22 s² with the same Z
/// for the right-handed line.
pub mod defaults {
    pub const SL_INDUCTANCE: f64 = 6.0e-10;
    pub const SL_CAPACITANCE: f64 = 2.0e-13;
    pub const RH_CELL_INDUCTANCE: f64 = 7.5e-10;
    pub const RH_CELL_CAPACITANCE: f64 = 2.5e-13;
    /// Puts the junction at 0.01 m for 200 supercells.
    pub const SUPERCELL_LENGTH: f64 = 5.0e-5;
    pub const RH_CELLS: usize = 10;
    pub const RH_LENGTH: f64 = 0.01;
    pub const EPSILON: f64 = 2.0;
    pub const SUPERCELLS: usize = 200;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(epsilon: f64) -> SuperlatticeSpec {
        SuperlatticeSpec::new(6e-10, 2e-13, epsilon, 200, 5e-5).unwrap()
    }

    #[test]
    fn cell_a_tends_to_identity_at_high_frequency() {
        let s = spec(2.0);
        let b = single_cell_abcd(&s, Cell::A, 1e6 * s.omega_sl()).unwrap();
        let id = TwoPortMatrix::identity();
        for (x, y) in [(b.b11, id.b11), (b.b22, id.b22)] {
            assert!((x - y).norm() < 1e-6);
        }
        // |b12|, |b21| scale as 1/ω; compared against their resonance values
        let at_res = single_cell_abcd(&s, Cell::A, s.omega_sl()).unwrap();
        assert!((b.b12.norm() / at_res.b12.norm() - 1e-6).abs() < 1e-15);
        assert!((b.b21.norm() / at_res.b21.norm() - 1e-6).abs() < 1e-15);
    }

    #[test]
    fn cell_a_at_resonance() {
        let s = spec(2.0);
        let w = s.omega_sl();
        let b = single_cell_abcd(&s, Cell::A, w).unwrap();
        assert_abs_diff_eq!(b.b11.re, 0.0, epsilon = 1e-15);
        assert_eq!(b.b22, Complex64::new(1.0, 0.0));
        let b12 = Complex64::new(0.0, w * s.capacitance()).inv();
        let b21 = Complex64::new(0.0, w * s.inductance()).inv();
        assert!((b.b12 - b12).norm() / b12.norm() < 1e-15);
        assert!((b.b21 - b21).norm() / b21.norm() < 1e-15);
    }

    #[test]
    fn cell_b_diagonal_with_epsilon_two() {
        let s = spec(2.0);
        let b = single_cell_abcd(&s, Cell::B, s.omega_sl()).unwrap();
        assert_abs_diff_eq!(b.b11.re, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn supercell_at_resonance_with_identical_cells() {
        let s = spec(1.0);
        let w = s.omega_sl();
        let b = supercell_abcd(&s, w).unwrap();
        assert!((b.b11 - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!(b.b22.norm() < 1e-12);
        let b12 = Complex64::new(0.0, w * s.capacitance()).inv();
        assert!((b.b12 - b12).norm() / b12.norm() < 1e-12);
        assert!((b.trace() - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn supercell_identity_limit_and_unit_determinant() {
        for e in [0.5, 1.0, 2.0, 5.0] {
            let s = spec(e);
            let b = supercell_abcd(&s, 1e6 * s.omega_sl()).unwrap();
            assert!((b.b11 - 1.0).norm() < 1e-6);
            assert!((b.b22 - 1.0).norm() < 1e-6);
        }
        let s = spec(2.0);
        let det = supercell_abcd(&s, 0.5 * s.omega_sl()).unwrap().det();
        assert!((det - 1.0).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_frequency() {
        let s = spec(2.0);
        assert!(matches!(
            single_cell_abcd(&s, Cell::A, 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(supercell_abcd(&s, -1.0).is_err());
        assert!(supercell_abcd(&s, f64::NAN).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SuperlatticeSpec::new(0.0, 2e-13, 2.0, 10, 1e-4).is_err());
        assert!(SuperlatticeSpec::new(6e-10, 2e-13, -1.0, 10, 1e-4).is_err());
        assert!(SuperlatticeSpec::new(6e-10, 2e-13, 2.0, 0, 1e-4).is_err());
        assert!(RightHandedSpec::new(7.5e-10, 2.5e-13, 0, 0.01).is_err());
    }

    #[test]
    fn derived_quantities_match_default_parameter_set() {
        let s = spec(2.0);
        assert!((s.omega_sl() - 1.0 / 1.2e-22f64.sqrt()).abs() / s.omega_sl() < 1e-15);
        assert!((s.omega_sl() / 1e9 - 91.287).abs() < 1e-3);
        assert!((s.impedance() - 3000f64.sqrt()).abs() < 1e-12);
        assert!((s.length() - 0.01).abs() < 1e-15);
        let (l, c) = s.cell_elements(Cell::B);
        assert!(((l / c).sqrt() - s.impedance()).abs() < 1e-12);
        let r = RightHandedSpec::new(7.5e-10, 2.5e-13, 10, 0.01).unwrap();
        assert!((r.omega_r() / 1e9 - 73.030).abs() < 1e-3);
        assert!((r.impedance() - 3000f64.sqrt()).abs() < 1e-12);
    }
}
