// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix helpers shared by the propagation code.
//!
//! Every exponential in this crate is of the form `exp(-i t H)` with `H`
//! Hermitian, so it is evaluated through the eigendecomposition of `H`.
//! This keeps propagators unitary to round-off for the small (d <= 16)
//! Hilbert spaces we work with.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||U U^dagger - E||_F`
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u * u.adjoint();
    frobenius_norm(&(prod - identity(u.nrows())))
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && frobenius_norm(&(m - m.adjoint())) <= tol * (1.0 + frobenius_norm(m))
}

pub fn real_scaled(m: &CMatrix, s: f64) -> CMatrix {
    m.map(|z| z * s)
}

/// Eigendecomposition `H = Q diag(values) Q^dagger` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Self {
        // Symmetrize so tiny anti-Hermitian round-off does not leak into the solver.
        let sym = (h + h.adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(sym);
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// Eigenvalues sorted in descending order.
    pub fn sorted_values_desc(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    /// Rebuild `Q diag(f(lambda)) Q^dagger`.
    pub fn map_values(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let q = &self.vectors;
        let n = q.nrows();
        let mut scaled = q.clone();
        for (c, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for r in 0..n {
                scaled[(r, c)] *= w;
            }
        }
        scaled * q.adjoint()
    }

    /// `Q^dagger m Q`
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    HermitianEigen::new(h).map_values(|lambda| Complex64::from_polar(1.0, -t * lambda))
}

/// sin(x)/x with a series branch near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// The unitary `exp(-i dt G)` of a Hermitian generator together with what is
/// needed to differentiate it with respect to perturbations of `G`.
#[derive(Debug, Clone)]
pub struct UnitaryExp {
    pub eig: HermitianEigen,
    pub dt: f64,
    pub phases: Vec<Complex64>,
}

impl UnitaryExp {
    pub fn new(generator: &CMatrix, dt: f64) -> Self {
        let eig = HermitianEigen::new(generator);
        let phases = eig
            .values
            .iter()
            .map(|&g| Complex64::from_polar(1.0, -dt * g))
            .collect();
        Self { eig, dt, phases }
    }

    pub fn value(&self) -> CMatrix {
        let dt = self.dt;
        self.eig.map_values(|g| Complex64::from_polar(1.0, -dt * g))
    }

    /// Divided-difference kernel `Gamma` in the eigenbasis, such that
    /// `d/de exp(-i dt (G + e D)) = Q (Q^dagger D Q o Gamma) Q^dagger`.
    pub fn derivative_kernel(&self) -> CMatrix {
        let n = self.phases.len();
        let g = &self.eig.values;
        let dt = self.dt;
        CMatrix::from_fn(n, n, |a, b| {
            let mean = Complex64::from_polar(1.0, -0.5 * dt * (g[a] + g[b]));
            mean * sinc(0.5 * dt * (g[a] - g[b])) * Complex64::new(0.0, -dt)
        })
    }

    /// Directional derivative of the exponential along `direction`.
    pub fn directional_derivative(&self, direction: &CMatrix) -> CMatrix {
        let d = self.eig.to_eigenbasis(direction);
        let kernel = self.derivative_kernel();
        let inner = d.component_mul(&kernel);
        &self.eig.vectors * inner * self.eig.vectors.adjoint()
    }
}
