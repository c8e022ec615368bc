//! Communication SINR, sensing SINR, harvested power and constraint checks.

use crate::scenario::{SystemParams, Thresholds};
use crate::ComplexMatrix;

/// Relative tolerance on SINR and harvested-power thresholds.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor for power comparisons, in watts.
pub const ABS_TOL_W: f64 = 1e-15;

/// Transmit beams, receive combiners and power-splitting ratios for all nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamformingState {
    pub w: Vec<ComplexMatrix>,
    pub u: Vec<ComplexMatrix>,
    pub rho: Vec<f64>,
}

impl BeamformingState {
    pub fn n_nodes(&self) -> usize {
        self.w.len()
    }

    pub fn total_power(&self) -> f64 {
        self.w.iter().map(|w| w.frobenius_norm_sqr()).sum()
    }

    /// Transmit covariance `S = sum_l w_l w_l^H`.
    pub fn covariance(&self) -> ComplexMatrix {
        let n = self.w.first().map_or(0, |w| w.rows());
        let mut s = ComplexMatrix::zeros(n, n);
        for w in &self.w {
            s += &w.outer();
        }
        s
    }
}

/// `|h_k^H w_j|^2`.
pub fn beam_gain(h: &ComplexMatrix, w: &ComplexMatrix) -> f64 {
    h.dot(w).norm_sqr()
}

/// Useful and interference power at node `k`: `(|h_k^H w_k|^2, sum_{j!=k} |h_k^H w_j|^2)`.
fn comm_powers(h: &[ComplexMatrix], state: &BeamformingState, k: usize) -> (f64, f64) {
    let mut own = 0.0;
    let mut other = 0.0;
    for (j, w) in state.w.iter().enumerate() {
        let g = beam_gain(&h[k], w);
        if j == k {
            own = g;
        } else {
            other += g;
        }
    }
    (own, other)
}

/// Information-decoding SINR of node `k` after the power splitter.
pub fn comm_sinr(h: &[ComplexMatrix], state: &BeamformingState, params: &SystemParams, k: usize) -> f64 {
    let (own, other) = comm_powers(h, state, k);
    let id = 1.0 - state.rho[k];
    id * own / (id * (other + params.sigma2_c) + params.delta2)
}

/// Power harvested by node `k`, in watts.
pub fn harvested_power(h: &[ComplexMatrix], state: &BeamformingState, params: &SystemParams, k: usize) -> f64 {
    let (own, other) = comm_powers(h, state, k);
    params.zeta * state.rho[k] * (own + other + params.sigma2_c)
}

/// `u^H H_j S H_j^H u` evaluated beam by beam.
fn echo_power(h_big: &ComplexMatrix, u: &ComplexMatrix, w: &[ComplexMatrix]) -> f64 {
    let y = &h_big.adjoint() * u;
    w.iter().map(|wl| y.dot(wl).norm_sqr()).sum()
}

/// Sensing SINR of target `k` at the BS receive combiner `u_k`.
pub fn sensing_sinr(h_big: &[ComplexMatrix], state: &BeamformingState, params: &SystemParams, k: usize) -> f64 {
    let u = &state.u[k];
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, hj) in h_big.iter().enumerate() {
        let p = echo_power(hj, u, &state.w);
        if j == k {
            signal = p;
        } else {
            interference += p;
        }
    }
    signal / (interference + params.sigma2_s * u.frobenius_norm_sqr())
}

/// Per-constraint slack, `value - threshold` in natural units. A negative
/// entry is a violation.
#[derive(Clone, Debug, PartialEq)]
pub struct Margins {
    pub sinr_c: Vec<f64>,
    pub sinr_s: Vec<f64>,
    pub harvested: Vec<f64>,
    /// `p_max - total_power`.
    pub power: f64,
    /// `min(rho_k, 1 - rho_k)`.
    pub rho: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub sinr_c: Vec<f64>,
    pub sinr_s: Vec<f64>,
    pub harvested: Vec<f64>,
    pub total_power: f64,
    pub feasible: bool,
    pub margins: Margins,
}

impl ConstraintReport {
    pub fn sum_harvested(&self) -> f64 {
        self.harvested.iter().sum()
    }

    pub fn min_sinr_c(&self) -> f64 {
        self.sinr_c.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_sinr_s(&self) -> f64 {
        self.sinr_s.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn meets(value: f64, threshold: f64) -> bool {
    value >= threshold - REL_TOL * threshold.abs()
}

pub(crate) fn meets_energy(value: f64, threshold: f64) -> bool {
    value >= threshold - (REL_TOL * threshold).max(ABS_TOL_W)
}

/// Evaluates every node's metrics and the power budget against `thresholds`.
pub fn check_constraints(
    h: &[ComplexMatrix],
    h_big: &[ComplexMatrix],
    state: &BeamformingState,
    params: &SystemParams,
    thresholds: &Thresholds,
) -> ConstraintReport {
    let n = state.n_nodes();
    let sinr_c: Vec<f64> = (0..n).map(|k| comm_sinr(h, state, params, k)).collect();
    let sinr_s: Vec<f64> = (0..n).map(|k| sensing_sinr(h_big, state, params, k)).collect();
    let harvested: Vec<f64> = (0..n).map(|k| harvested_power(h, state, params, k)).collect();
    let total_power = state.total_power();

    let margins = Margins {
        sinr_c: sinr_c.iter().map(|s| s - thresholds.gamma).collect(),
        sinr_s: sinr_s.iter().map(|s| s - thresholds.eta).collect(),
        harvested: harvested.iter().map(|e| e - thresholds.e_min).collect(),
        power: params.p_max - total_power,
        rho: state.rho.iter().map(|&r| r.min(1.0 - r)).collect(),
    };
    let feasible = sinr_c.iter().all(|&s| meets(s, thresholds.gamma))
        && sinr_s.iter().all(|&s| meets(s, thresholds.eta))
        && harvested.iter().all(|&e| meets_energy(e, thresholds.e_min))
        && total_power <= params.p_max + REL_TOL
        && state.rho.iter().all(|&r| r > 0.0 && r < 1.0)
        && sinr_c.iter().chain(&sinr_s).chain(&harvested).all(|x| x.is_finite());

    ConstraintReport {
        sinr_c,
        sinr_s,
        harvested,
        total_power,
        feasible,
        margins,
    }
}
