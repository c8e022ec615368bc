//! Maximum ratio transmission with closed-form power splitting.

use crate::channel::ChannelSet;
use crate::metrics::{meets, meets_energy, sensing_sinr, BeamformingState};
use crate::scenario::SystemParams;
use crate::subproblems::{optimize_rx, RHO_EPS};
use crate::ComplexMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct MrtResult {
    pub w: Vec<ComplexMatrix>,
    /// Zero for nodes whose communication threshold cannot be met.
    pub rho: Vec<f64>,
    /// `sum_k zeta rho_k (b_k + c_k)`, in watts.
    pub sum_he: f64,
    /// Communication SINR and harvested power hold at every node.
    pub feasible: bool,
    /// Useful power `|h_k^H w_k|^2`.
    pub b: Vec<f64>,
    /// Interference plus antenna noise `sum_{j!=k} |h_k^H w_j|^2 + sigma_c^2`.
    pub c: Vec<f64>,
    pub u: Vec<ComplexMatrix>,
    /// Sensing SINR with optimal combiners. Reported only, never enforced.
    pub sinr_s: Vec<f64>,
}

/// MRT beams `sqrt(p_max / K) h_k / |h_k|` with the largest splitting ratio
/// that still meets the communication SINR threshold.
pub fn mrt_baseline(channels: &ChannelSet, params: &SystemParams) -> MrtResult {
    let k = channels.n_nodes();
    let share = (params.p_max / k as f64).sqrt();
    let w: Vec<ComplexMatrix> = channels.h.iter().map(|h| h.normalized().scale(share)).collect();

    let mut b = Vec::with_capacity(k);
    let mut c = Vec::with_capacity(k);
    for (i, h) in channels.h.iter().enumerate() {
        let mut other = params.sigma2_c;
        for (j, wj) in w.iter().enumerate() {
            if j != i {
                other += h.dot(wj).norm_sqr();
            }
        }
        b.push(h.dot(&w[i]).norm_sqr());
        c.push(other);
    }

    let gamma = params.gamma;
    let mut feasible = true;
    let rho: Vec<f64> = (0..k)
        .map(|i| {
            let excess = b[i] - gamma * c[i];
            if !(excess > 0.0) {
                feasible = false;
                return 0.0;
            }
            let r = (1.0 - gamma * params.delta2 / excess).min(1.0 - RHO_EPS);
            if r <= 0.0 {
                feasible = false;
                return 0.0;
            }
            r
        })
        .collect();

    let mut sum_he = 0.0;
    for i in 0..k {
        let id = 1.0 - rho[i];
        let sinr = id * b[i] / (id * c[i] + params.delta2);
        let e = params.zeta * rho[i] * (b[i] + c[i]);
        feasible &= rho[i] > 0.0 && meets(sinr, gamma) && meets_energy(e, params.e_min);
        sum_he += e;
    }

    let u: Vec<ComplexMatrix> = (0..k)
        .map(|i| optimize_rx(channels, &w, params, i).unwrap_or_else(|_| ComplexMatrix::zeros(params.n_rx, 1)))
        .collect();
    let state = BeamformingState {
        w: w.clone(),
        u: u.clone(),
        rho: rho.clone(),
    };
    let sinr_s = (0..k)
        .map(|i| sensing_sinr(&channels.h_big, &state, params, i))
        .collect();

    MrtResult {
        w,
        rho,
        sum_he,
        feasible,
        b,
        c,
        u,
        sinr_s,
    }
}
