//! The DNLS ring
//!
//! ```text
//! i dpsi_n/dt = sum_{j=1}^{N_c} kappa_j (psi_{n+j} - 2 psi_n + psi_{n-j}) + F(|psi_n|^2) psi_n
//! ```
//!
//! with indices taken modulo `N`, plus its two conserved quantities.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Ring geometry: site count, interaction radius and couplings `kappa_1..kappa_{N_c}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeConfig {
    n_sites: usize,
    kappa: Vec<f64>,
    kappa_bar: f64,
}

impl LatticeConfig {
    pub fn new(n_sites: usize, kappa: Vec<f64>) -> Result<Self> {
        if n_sites < 3 {
            return Err(Error::InvalidParameter(format!(
                "ring needs at least 3 sites, got {n_sites}"
            )));
        }
        let radius = kappa.len();
        if radius < 1 || radius > (n_sites - 1) / 2 {
            return Err(Error::InvalidParameter(format!(
                "interaction radius {radius} outside 1..={} for N = {n_sites}",
                (n_sites - 1) / 2
            )));
        }
        if kappa.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coupling".into()));
        }
        let kappa_bar = kappa.iter().sum();
        Ok(Self {
            n_sites,
            kappa,
            kappa_bar,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Interaction radius `N_c`.
    pub fn radius(&self) -> usize {
        self.kappa.len()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    /// `kappa_bar = sum_j kappa_j`.
    pub fn kappa_bar(&self) -> f64 {
        self.kappa_bar
    }

    /// `sum_j |kappa_j|`, used by the tail estimates of the band function.
    pub fn kappa_abs_sum(&self) -> f64 {
        self.kappa.iter().map(|k| k.abs()).sum()
    }

    /// Iterator over `(j, kappa_j)` with `j` starting at 1.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.kappa.iter().enumerate().map(|(i, &k)| (i + 1, k))
    }

    /// Same geometry with every coupling multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n_sites, self.kappa.iter().map(|k| k * factor).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl LatticeState {
    pub fn new(psi: Vec<Complex64>, t: f64) -> Self {
        Self { psi, t }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); n], 0.0)
    }

    /// `psi_n = A e^{i K n}`.
    pub fn plane_wave(n: usize, wavenumber: f64, amplitude: f64) -> Self {
        let psi = (0..n)
            .map(|site| Complex64::from_polar(amplitude, wavenumber * site as f64))
            .collect();
        Self::new(psi, 0.0)
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    fn check(&self, config: &LatticeConfig) -> Result<()> {
        if self.psi.len() != config.n_sites() {
            return Err(Error::SizeMismatch {
                state: self.psi.len(),
                config: config.n_sites(),
            });
        }
        Ok(())
    }
}

/// `sum_j kappa_j (psi_{n+j} - 2 psi_n + psi_{n-j}) + F(|psi_n|^2) psi_n`, i.e. `i dpsi/dt`.
pub fn hamiltonian_field(
    state: &LatticeState,
    config: &LatticeConfig,
    nl: &Nonlinearity,
) -> Result<Vec<Complex64>> {
    state.check(config)?;
    let n = config.n_sites();
    let psi = &state.psi;
    let out = (0..n)
        .map(|site| {
            let centre = psi[site];
            let coupling: Complex64 = config
                .couplings()
                .map(|(j, k)| k * (psi[(site + j) % n] - 2.0 * centre + psi[(site + n - j) % n]))
                .sum();
            coupling + nl.f(centre.norm_sqr()) * centre
        })
        .collect();
    Ok(out)
}

/// Time derivative `dpsi_n/dt` of every site.
pub fn eval_rhs(state: &LatticeState, config: &LatticeConfig, nl: &Nonlinearity) -> Result<Vec<Complex64>> {
    let mut field = hamiltonian_field(state, config, nl)?;
    for z in field.iter_mut() {
        *z *= -I;
    }
    Ok(field)
}

/// Conserved power `sum_n |psi_n|^2`.
pub fn power(state: &LatticeState) -> f64 {
    state.psi.iter().map(|z| z.norm_sqr()).sum()
}

/// Conserved energy `sum_n [G(|psi_n|^2) - sum_j kappa_j |psi_{n+j} - psi_n|^2]`;
/// every ordered bond `(n, n+j)` enters once.
pub fn energy(state: &LatticeState, config: &LatticeConfig, nl: &Nonlinearity) -> Result<f64> {
    state.check(config)?;
    let n = config.n_sites();
    let psi = &state.psi;
    let total = (0..n)
        .map(|site| {
            let bonds: f64 = config
                .couplings()
                .map(|(j, k)| k * (psi[(site + j) % n] - psi[site]).norm_sqr())
                .sum();
            nl.g(psi[site].norm_sqr()) - bonds
        })
        .sum();
    Ok(total)
}

/// Frequency of the exact plane wave `A e^{i(K n - Omega t)}`:
/// `Omega = F(A^2) - 4 sum_j kappa_j sin^2(K j / 2)`.
pub fn plane_wave_frequency(
    wavenumber: f64,
    amplitude: f64,
    config: &LatticeConfig,
    nl: &Nonlinearity,
) -> f64 {
    let dispersion: f64 = config
        .couplings()
        .map(|(j, k)| k * (0.5 * wavenumber * j as f64).sin().powi(2))
        .sum();
    nl.f(amplitude * amplitude) - 4.0 * dispersion
}
