// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin operators, model Hamiltonians and the split-step propagator.
//!
//! Basis states are ordered by descending magnetic quantum number
//! (m = s, s-1, ..., -s), so `Iz` is diagonal with its largest entry first.
//! All generators and amplitudes are angular frequencies (rad/s).

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{self, CMatrix, HermitianEigen, I, ONE, ZERO};

/// Multiplicity `2s + 1`, validating that `2s` is a positive integer.
pub fn multiplicity(s: f64) -> Result<usize> {
    let twice = 2.0 * s;
    if !s.is_finite() || s <= 0.0 || (twice - twice.round()).abs() > 1e-9 {
        return invalid(format!("spin quantum number {s} is not a positive half-integer"));
    }
    Ok(twice.round() as usize + 1)
}

#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    pub s: f64,
    pub ix: CMatrix,
    pub iy: CMatrix,
    pub iz: CMatrix,
    pub iplus: CMatrix,
    pub iminus: CMatrix,
    pub identity: CMatrix,
}

impl SpinOperatorSet {
    pub fn dim(&self) -> usize {
        self.iz.nrows()
    }

    /// `Iz^2`, convenient for quadrupolar terms.
    pub fn iz_squared(&self) -> CMatrix {
        &self.iz * &self.iz
    }
}

pub fn angular_momentum_operators(s: f64) -> Result<SpinOperatorSet> {
    let dim = multiplicity(s)?;
    let m = |a: usize| s - a as f64;

    let iz = CMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex64::new(m(r), 0.0)
        } else {
            ZERO
        }
    });
    // <m+1| I+ |m> = sqrt(s(s+1) - m(m+1)); state m+1 sits one row above m.
    let iplus = CMatrix::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            let mc = m(c);
            Complex64::new((s * (s + 1.0) - mc * (mc + 1.0)).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let iminus = iplus.adjoint();
    let ix = (&iplus + &iminus).map(|z| z * 0.5);
    let iy = (&iplus - &iminus).map(|z| z / (2.0 * I));

    Ok(SpinOperatorSet {
        s,
        ix,
        iy,
        iz,
        iplus,
        iminus,
        identity: linalg::identity(dim),
    })
}

/// Place a single-spin operator at `position` in the tensor product space of `spins`.
pub fn embed(op: &CMatrix, position: usize, spins: &[f64]) -> Result<CMatrix> {
    if position >= spins.len() {
        return invalid(format!(
            "position {position} out of range for {} spins",
            spins.len()
        ));
    }
    let expected = multiplicity(spins[position])?;
    if !op.is_square() || op.nrows() != expected {
        return invalid(format!(
            "operator of dimension {}x{} does not match spin {} (multiplicity {expected})",
            op.nrows(),
            op.ncols(),
            spins[position]
        ));
    }
    let mut out = CMatrix::from_element(1, 1, ONE);
    for (idx, &s) in spins.iter().enumerate() {
        let factor = if idx == position {
            op.clone()
        } else {
            linalg::identity(multiplicity(s)?)
        };
        out = linalg::kron(&out, &factor);
    }
    Ok(out)
}

/// Product of the multiplicities of `spins`.
pub fn hilbert_dim(spins: &[f64]) -> Result<usize> {
    spins.iter().try_fold(1usize, |acc, &s| Ok(acc * multiplicity(s)?))
}

/// Weak scalar coupling `pi J 2 Iz Sz` for a spin-1/2 pair, `J` in Hz.
pub fn j_coupling_hamiltonian(j_hz: f64) -> Result<CMatrix> {
    let spins = [0.5, 0.5];
    let half = angular_momentum_operators(0.5)?;
    let iz = embed(&half.iz, 0, &spins)?;
    let sz = embed(&half.iz, 1, &spins)?;
    Ok((iz * sz).map(|z| z * (2.0 * std::f64::consts::PI * j_hz)))
}

/// First-order quadrupolar term `(omega_q / 2)(3 Iz^2 - s(s+1))`, `omega_q` in rad/s.
pub fn quadrupolar_hamiltonian(omega_q: f64, s: f64) -> Result<CMatrix> {
    multiplicity(s)?;
    if s < 1.0 {
        return invalid("quadrupolar interaction vanishes for spin 1/2");
    }
    let ops = angular_momentum_operators(s)?;
    let shift = s * (s + 1.0);
    let dim = ops.dim();
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            let m = ops.iz[(r, r)].re;
            Complex64::new(0.5 * omega_q * (3.0 * m * m - shift), 0.0)
        } else {
            ZERO
        }
    }))
}

/// `A = exp(-i dt H0 / 2)`.
pub fn half_step_factor(h0: &CMatrix, dt: f64) -> CMatrix {
    linalg::expm_hermitian(h0, 0.5 * dt)
}

/// Summed control generator `sum_k w_k H_k`.
pub fn control_generator(amplitudes: &[f64], control_ops: &[CMatrix]) -> CMatrix {
    let dim = control_ops.first().map_or(0, |h| h.nrows());
    let mut g = linalg::zeros(dim);
    for (w, h) in amplitudes.iter().zip(control_ops) {
        g += h.map(|z| z * *w);
    }
    g
}

/// Single Strang step `A exp(-i dt sum_k w_k H_k) A`.
pub fn step_propagator(a: &CMatrix, amplitudes: &[f64], control_ops: &[CMatrix], dt: f64) -> CMatrix {
    let v = linalg::expm_hermitian(&control_generator(amplitudes, control_ops), dt);
    a * v * a
}

/// A spin system with drift `h0` and labelled control operators.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    pub spins: Vec<f64>,
    pub h0: CMatrix,
    pub controls: Vec<(String, CMatrix)>,
    dim: usize,
}

impl SpinSystem {
    pub fn new(spins: Vec<f64>, h0: CMatrix, controls: Vec<(String, CMatrix)>) -> Result<Self> {
        let dim = hilbert_dim(&spins)?;
        if h0.nrows() != dim || !linalg::is_hermitian(&h0, 1e-12) {
            return invalid(format!("drift Hamiltonian must be Hermitian of dimension {dim}"));
        }
        for (label, h) in &controls {
            if h.nrows() != dim || !linalg::is_hermitian(h, 1e-12) {
                return invalid(format!(
                    "control operator {label} must be Hermitian of dimension {dim}"
                ));
            }
        }
        Ok(Self {
            spins,
            h0,
            controls,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn control_ops(&self) -> Vec<CMatrix> {
        self.controls.iter().map(|(_, h)| h.clone()).collect()
    }

    pub fn control_labels(&self) -> Vec<String> {
        self.controls.iter().map(|(l, _)| l.clone()).collect()
    }

    /// Total `sum_i I_x^{(i)}` (or y, z) over every spin.
    pub fn total_operator(&self, pick: impl Fn(&SpinOperatorSet) -> &CMatrix) -> Result<CMatrix> {
        let mut total = linalg::zeros(self.dim);
        for (idx, &s) in self.spins.iter().enumerate() {
            let ops = angular_momentum_operators(s)?;
            total += embed(pick(&ops), idx, &self.spins)?;
        }
        Ok(total)
    }

    pub fn drift_eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.h0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::random_hermitian;
    use crate::linalg::{expm_hermitian, frobenius_norm, unitarity_defect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_fn(values.len(), values.len(), |r, c| {
            if r == c {
                Complex64::new(values[r], 0.0)
            } else {
                ZERO
            }
        })
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        frobenius_norm(&(a - b)) <= tol
    }

    #[test]
    fn iz_diagonals() {
        let half = angular_momentum_operators(0.5).unwrap();
        assert!(close(&half.iz, &diag(&[0.5, -0.5]), 1e-15));
        let three_halves = angular_momentum_operators(1.5).unwrap();
        assert!(close(&three_halves.iz, &diag(&[1.5, 0.5, -0.5, -1.5]), 1e-15));
    }

    #[test]
    fn ix_spin_half() {
        let half = angular_momentum_operators(0.5).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[ZERO, Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0), ZERO],
        );
        assert!(close(&half.ix, &expected, 1e-15));
    }

    #[test]
    fn commutation_relations() {
        for s in [0.5, 1.0, 1.5, 2.0] {
            let ops = angular_momentum_operators(s).unwrap();
            let comm = &ops.ix * &ops.iy - &ops.iy * &ops.ix;
            let defect = comm - ops.iz.map(|z| z * I);
            assert!(frobenius_norm(&defect) < 1e-12, "s = {s}");
            assert!(close(&ops.iplus, &(&ops.ix + ops.iy.map(|z| z * I)), 1e-14));
            assert!(close(&ops.iminus, &ops.iplus.adjoint(), 0.0));
            for h in [&ops.ix, &ops.iy, &ops.iz] {
                assert!(linalg::is_hermitian(h, 1e-15));
            }
        }
    }

    #[test]
    fn rejects_bad_spin() {
        assert!(angular_momentum_operators(0.3).is_err());
        assert!(angular_momentum_operators(0.0).is_err());
        assert!(angular_momentum_operators(-0.5).is_err());
    }

    #[test]
    fn embedding() {
        let half = angular_momentum_operators(0.5).unwrap();
        let spins = [0.5, 0.5];
        let iz = embed(&half.iz, 0, &spins).unwrap();
        assert!(close(&iz, &diag(&[0.5, 0.5, -0.5, -0.5]), 1e-15));
        let e = embed(&half.identity, 1, &spins).unwrap();
        assert!(close(&e, &linalg::identity(4), 0.0));
        let sz = embed(&half.iz, 1, &spins).unwrap();
        assert!(close(&(iz * sz), &diag(&[0.25, -0.25, -0.25, 0.25]), 1e-15));

        let spin1 = angular_momentum_operators(1.0).unwrap();
        assert!(embed(&spin1.iz, 0, &spins).is_err());
        assert!(embed(&half.iz, 2, &spins).is_err());
    }

    #[test]
    fn j_coupling() {
        let h = j_coupling_hamiltonian(140.0).unwrap();
        let q = PI * 140.0 / 2.0;
        assert!((q - 219.911).abs() < 1e-3);
        assert!(close(&h, &diag(&[q, -q, -q, q]), 1e-12));
        assert!(linalg::trace(&h).norm() < 1e-12);
        assert!(frobenius_norm(&j_coupling_hamiltonian(0.0).unwrap()) == 0.0);
    }

    #[test]
    fn quadrupolar() {
        let wq = 2.0 * PI * 60.0;
        let h = quadrupolar_hamiltonian(wq, 1.5).unwrap();
        let expected = diag(&[3.0, -3.0, -3.0, 3.0]).map(|z| z * (wq / 2.0));
        assert!(close(&h, &expected, 1e-12));
        assert!((h[(0, 0)].re - 565.4867).abs() < 1e-3);
        assert!(frobenius_norm(&quadrupolar_hamiltonian(0.0, 1.5).unwrap()) == 0.0);
        assert!(quadrupolar_hamiltonian(wq, 0.5).is_err());
    }

    #[test]
    fn half_step_properties() {
        let a = half_step_factor(&linalg::zeros(4), 1e-3);
        assert!(close(&a, &linalg::identity(4), 0.0));

        let h0 = diag(&[1.0, -2.0, 3.5, 0.25]).map(|z| z * 100.0);
        let a = half_step_factor(&h0, 1e-3);
        assert!(close(&(&a * &a), &expm_hermitian(&h0, 1e-3), 1e-13));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 4, 1e3);
            assert!(unitarity_defect(&half_step_factor(&h, 1e-3)) < 1e-12);
        }
    }

    #[test]
    fn step_propagator_examples() {
        let half = angular_momentum_operators(0.5).unwrap();
        let a = half_step_factor(&linalg::zeros(2), 0.1);
        let u = step_propagator(&a, &[0.0], &[half.ix.clone()], 0.1);
        assert!(close(&u, &linalg::identity(2), 1e-15));

        // pi rotation about x
        let dt = 1e-3;
        let u = step_propagator(&a, &[PI / dt], &[half.ix.clone()], dt);
        let expected = CMatrix::from_row_slice(2, 2, &[ZERO, -I, -I, ZERO]);
        assert!(close(&u, &expected, 1e-12));
    }

    #[test]
    fn commuting_controls_reduce_to_exact_exponential() {
        let spins = [0.5, 0.5];
        let half = angular_momentum_operators(0.5).unwrap();
        let h0 = j_coupling_hamiltonian(140.0).unwrap();
        let ops = vec![
            embed(&half.iz, 0, &spins).unwrap(),
            embed(&half.iz, 1, &spins).unwrap(),
        ];
        let dt = 2e-4;
        let amps = [1234.0, -777.0];
        let a = half_step_factor(&h0, dt);
        let u = step_propagator(&a, &amps, &ops, dt);
        let full = &h0 + control_generator(&amps, &ops);
        assert!(close(&u, &expm_hermitian(&full, dt), 1e-10));
    }

    #[test]
    fn local_error_is_third_order() {
        // Richardson-style oracle: compare the split step with the dense
        // exponential of the full Hamiltonian at two step sizes.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h0 = random_hermitian(&mut rng, 4, 1.0);
        let ops = vec![random_hermitian(&mut rng, 4, 1.0), random_hermitian(&mut rng, 4, 1.0)];
        let amps = [0.8, -1.3];
        let err = |dt: f64| {
            let a = half_step_factor(&h0, dt);
            let split = step_propagator(&a, &amps, &ops, dt);
            let exact = expm_hermitian(&(&h0 + control_generator(&amps, &ops)), dt);
            frobenius_norm(&(split - exact))
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 8.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn spin_system_validation() {
        let half = angular_momentum_operators(0.5).unwrap();
        let bad = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(SpinSystem::new(vec![0.5], half.iz.clone(), vec![("x".into(), bad)]).is_err());
        assert!(SpinSystem::new(vec![0.5, 0.5], half.iz.clone(), vec![]).is_err());
        let ok = SpinSystem::new(vec![0.5], half.iz.clone(), vec![("x".into(), half.ix.clone())]).unwrap();
        assert_eq!(ok.dim(), 2);
        assert_eq!(ok.n_controls(), 1);
    }
}
