//! Steering vectors and Rician communication/sensing channels.
//!
//! The transmit and receive arrays share one centred half-wavelength ULA of
//! `N = N_t + N_r` elements: element `m` has phase `pi (m - (N-1)/2) beta`,
//! the first `N_t` elements transmit and the last `N_r` receive.

use std::f64::consts::PI;

use num_complex::Complex;
use thiserror::Error;

use crate::numerics::{sample_complex_gaussian, SeededRng};
use crate::scenario::{ScenarioGeometry, SystemParams};
use crate::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("|beta| = {0} exceeds 1")]
    InvalidBeta(f64),
    #[error("array split {n_part} exceeds aperture {n_total}")]
    InvalidAperture { n_part: usize, n_total: usize },
}

/// Small-scale fading model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fading {
    /// Deterministic line-of-sight only (the `kappa -> inf` limit, built exactly).
    LosOnly,
    /// LoS plus i.i.d. Rayleigh scattering weighted by the Rician factor.
    Rician,
}

const PURPOSE_COMM: u64 = 0xC0;
const PURPOSE_SENSE: u64 = 0x5E;

fn steering(beta: f64, first: usize, len: usize, n_total: usize) -> Result<ComplexMatrix, ChannelError> {
    if !(beta.abs() <= 1.0) {
        return Err(ChannelError::InvalidBeta(beta));
    }
    if first + len > n_total {
        return Err(ChannelError::InvalidAperture {
            n_part: first + len,
            n_total,
        });
    }
    let centre = (n_total as f64 - 1.0) / 2.0;
    Ok(ComplexMatrix::column(
        (first..first + len)
            .map(|m| Complex::from_polar(1.0, PI * (m as f64 - centre) * beta))
            .collect(),
    ))
}

/// Transmit steering vector `a_t(beta)` (the first `n_tx` aperture elements).
pub fn steering_tx(beta: f64, n_tx: usize, n_total: usize) -> Result<ComplexMatrix, ChannelError> {
    steering(beta, 0, n_tx, n_total)
}

/// Receive steering vector `a_r(beta)` (the last `n_rx` aperture elements).
pub fn steering_rx(beta: f64, n_rx: usize, n_total: usize) -> Result<ComplexMatrix, ChannelError> {
    if n_rx > n_total {
        return Err(ChannelError::InvalidAperture { n_part: n_rx, n_total });
    }
    steering(beta, n_total - n_rx, n_rx, n_total)
}

/// Large-scale power gain `L0 (d/d0)^-exponent`.
pub fn path_gain(params: &SystemParams, distance: f64, exponent: f64) -> f64 {
    params.l0 * (distance / params.d0).powf(-exponent)
}

fn rician_weights(params: &SystemParams) -> (f64, f64) {
    let k = params.kappa;
    ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
}

/// Communication/powering channel `h_k` (`N_t x 1`).
pub fn comm_channel(
    params: &SystemParams,
    geometry: &ScenarioGeometry,
    rng: &mut SeededRng,
    node: usize,
    fading: Fading,
) -> Result<ComplexMatrix, ChannelError> {
    let d = geometry.distances[node];
    let a_t = steering_tx(geometry.beta[node], params.n_tx, params.n_total())?;
    let los = a_t.scale(path_gain(params, d, params.alpha).sqrt());
    match fading {
        Fading::LosOnly => Ok(los),
        Fading::Rician => {
            let g = sample_complex_gaussian(rng, params.n_tx, 1);
            let nlos = g.scale(path_gain(params, d, params.alpha_nlos).sqrt());
            let (w_los, w_nlos) = rician_weights(params);
            let mut h = los.scale(w_los);
            h.axpy(w_nlos, &nlos);
            Ok(h)
        }
    }
}

/// Mono-static sensing channel `H_k` (`N_r x N_t`) over the round trip `2 d_k`.
pub fn sensing_channel(
    params: &SystemParams,
    geometry: &ScenarioGeometry,
    rng: &mut SeededRng,
    node: usize,
    fading: Fading,
) -> Result<ComplexMatrix, ChannelError> {
    let d2 = 2.0 * geometry.distances[node];
    let beta = geometry.beta[node];
    let a_t = steering_tx(beta, params.n_tx, params.n_total())?;
    let a_r = steering_rx(beta, params.n_rx, params.n_total())?;
    let amp = (path_gain(params, d2, params.alpha) * params.rcs).sqrt();
    let los = (&a_r * &a_t.adjoint()).scale(amp);
    match fading {
        Fading::LosOnly => Ok(los),
        Fading::Rician => {
            let g = sample_complex_gaussian(rng, params.n_rx, params.n_tx);
            let amp_nlos = (path_gain(params, d2, params.alpha_nlos) * params.rcs).sqrt();
            let (w_los, w_nlos) = rician_weights(params);
            let mut h = los.scale(w_los);
            h.axpy(w_nlos * amp_nlos, &g);
            Ok(h)
        }
    }
}

/// Per-node communication and sensing channels of one drop.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    pub h: Vec<ComplexMatrix>,
    pub h_big: Vec<ComplexMatrix>,
    pub los_only: bool,
}

impl ChannelSet {
    /// Draws every node's channels. Node `k` uses its own streams keyed by
    /// `(drop_key.., purpose, k)`, so results do not depend on node order.
    pub fn draw(
        params: &SystemParams,
        geometry: &ScenarioGeometry,
        fading: Fading,
        master_seed: u64,
        drop_key: &[u64],
    ) -> Result<Self, ChannelError> {
        let n = geometry.n_nodes();
        let mut h = Vec::with_capacity(n);
        let mut h_big = Vec::with_capacity(n);
        let mut key = drop_key.to_vec();
        key.extend([0, 0]);
        let len = key.len();
        for k in 0..n {
            key[len - 1] = k as u64;
            key[len - 2] = PURPOSE_COMM;
            let mut rng = SeededRng::for_parts(master_seed, &key);
            h.push(comm_channel(params, geometry, &mut rng, k, fading)?);
            key[len - 2] = PURPOSE_SENSE;
            let mut rng = SeededRng::for_parts(master_seed, &key);
            h_big.push(sensing_channel(params, geometry, &mut rng, k, fading)?);
        }
        Ok(Self {
            h,
            h_big,
            los_only: fading == Fading::LosOnly,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.h.len()
    }

    /// The first `count` nodes' channels.
    pub fn truncated(&self, count: usize) -> Self {
        Self {
            h: self.h[..count].to_vec(),
            h_big: self.h_big[..count].to_vec(),
            los_only: self.los_only,
        }
    }
}
