//! The three per-block solvers of the alternating optimisation: transmit
//! beamforming by semidefinite relaxation, power splitting in closed form,
//! and receive combining by a generalized Rayleigh quotient.

use num_complex::Complex;
use thiserror::Error;

use crate::channel::ChannelSet;
use crate::metrics::{check_constraints, BeamformingState};
use crate::numerics::{hermitian_eig, principal_generalized_eigvec, sample_complex_gaussian, LinalgError, SeededRng};
use crate::scenario::{SystemParams, Thresholds};
use crate::sdp::{solve_sdp, SdpError, SdpProblem, SdpStatus, Sense, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::ComplexMatrix;

/// Upper clamp on the splitting ratio, keeping `rho < 1` strictly.
pub const RHO_EPS: f64 = 1e-9;
/// Eigenvalue ratio below which an SDP block counts as rank one.
pub const RANK_ONE_RATIO: f64 = 1e-6;
/// Relative tightening of the thresholds inside the relaxed problem, so that
/// beams recovered from an interior-point solution meet the exact thresholds.
pub const P2_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubproblemError {
    #[error("power splitting infeasible at node {0}")]
    PsInfeasible(usize),
    #[error("beamforming relaxation not solved ({0:?})")]
    P2Failed(SdpStatus),
    #[error("no feasible rank-one beam set recovered")]
    ExtractionFailed,
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Data of the relaxed transmit-beamforming problem at fixed `rho` and `u`.
#[derive(Clone, Debug)]
pub struct P2Instance<'a> {
    pub channels: &'a ChannelSet,
    /// `F_k = h_k h_k^H`.
    pub f: Vec<ComplexMatrix>,
    /// `g[k][j] = G_{k,j} = (H_j^H u_k)(H_j^H u_k)^H`.
    pub g: Vec<Vec<ComplexMatrix>>,
    pub rho_fixed: Vec<f64>,
    pub u: Vec<ComplexMatrix>,
    pub u_norm2: Vec<f64>,
    pub thresholds: Thresholds,
    pub p_max: f64,
}

impl<'a> P2Instance<'a> {
    pub fn new(
        channels: &'a ChannelSet,
        state: &BeamformingState,
        params: &SystemParams,
        thresholds: &Thresholds,
    ) -> Self {
        let k = channels.n_nodes();
        let f = channels.h.iter().map(|h| h.outer()).collect();
        let g = (0..k)
            .map(|kk| {
                channels
                    .h_big
                    .iter()
                    .map(|hj| (&hj.adjoint() * &state.u[kk]).outer())
                    .collect()
            })
            .collect();
        Self {
            channels,
            f,
            g,
            rho_fixed: state.rho.clone(),
            u: state.u.clone(),
            u_norm2: state.u.iter().map(|u| u.frobenius_norm_sqr()).collect(),
            thresholds: *thresholds,
            p_max: params.p_max,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.f.len()
    }

    /// The relaxed problem with every threshold multiplied by `1 + margin`.
    pub fn to_sdp(&self, params: &SystemParams, margin: f64) -> SdpProblem<f64> {
        let k = self.n_nodes();
        let n = params.n_tx;
        let t = self.thresholds;
        let (gamma, eta, e_min) = (
            t.gamma * (1.0 + margin),
            t.eta * (1.0 + margin),
            t.e_min * (1.0 + margin),
        );
        let mut p = SdpProblem::new(n, k);
        let mut f_sum = ComplexMatrix::zeros(n, n);
        for fk in &self.f {
            f_sum += fk;
        }
        p.objective = vec![f_sum; k];

        for node in 0..k {
            let fk = &self.f[node];
            let rho = self.rho_fixed[node];
            // Communication SINR, linear in R = sum W.
            let coeffs = (0..k)
                .map(|b| if b == node { fk.clone() } else { fk.scale(-gamma) })
                .collect();
            let rhs = gamma * params.sigma2_c + gamma * params.delta2 / (1.0 - rho);
            p.push(coeffs, Sense::Ge, rhs);

            // Sensing SINR with the combiner u_k fixed.
            let mut gc = self.g[node][node].clone();
            for (j, gj) in self.g[node].iter().enumerate() {
                if j != node {
                    gc.axpy(-eta, gj);
                }
            }
            p.push(vec![gc; k], Sense::Ge, eta * params.sigma2_s * self.u_norm2[node]);

            // Harvested power.
            let zr = params.zeta * rho;
            p.push(vec![fk.scale(zr); k], Sense::Ge, e_min - zr * params.sigma2_c);
        }
        p.push(vec![ComplexMatrix::identity(n); k], Sense::Le, self.p_max);
        p
    }
}

/// Relaxed transmit-beamforming problem for the current `rho`, `u`.
pub fn build_p2(
    channels: &ChannelSet,
    state: &BeamformingState,
    params: &SystemParams,
    thresholds: &Thresholds,
) -> SdpProblem<f64> {
    P2Instance::new(channels, state, params, thresholds).to_sdp(params, 0.0)
}

#[derive(Clone, Debug)]
pub struct P2Solution {
    pub w: Vec<ComplexMatrix>,
    /// Optimal value of the relaxation, an upper bound on `sum tr(F_k R)`.
    pub sdr_bound: f64,
    /// `(sdr_bound - achieved) / sdr_bound` for the returned beams.
    pub rank1_gap: f64,
    /// Whether every relaxed block was numerically rank one.
    pub rank_one: bool,
    pub sdp_iterations: usize,
}

fn p2_objective(f: &[ComplexMatrix], w: &[ComplexMatrix]) -> f64 {
    f.iter()
        .map(|fk| w.iter().map(|wj| fk.quad_form(wj)).sum::<f64>())
        .sum()
}

/// Solves the relaxation and recovers feasible rank-one beams.
///
/// Candidates are the per-block principal eigenvectors, the channel
/// projections `W_k h_k / sqrt(h_k^H W_k h_k)`, and `gr_samples` Gaussian
/// draws `r_k ~ CN(0, W_k)` normalised to `tr(W_k)`. Each candidate set is
/// scaled up to the full power budget (every SINR and harvested power grows
/// with a common scale) and checked against the instance thresholds with
/// `rho` and `u` fixed; the feasible set with the largest harvested sum wins.
pub fn solve_p2_and_extract(
    instance: &P2Instance<'_>,
    rng: &mut SeededRng,
    params: &SystemParams,
) -> Result<P2Solution, SubproblemError> {
    let problem = instance.to_sdp(params, P2_MARGIN);
    let sol = solve_sdp(&problem, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    if sol.status != SdpStatus::Optimal {
        return Err(SubproblemError::P2Failed(sol.status));
    }
    let k = instance.n_nodes();
    let n = params.n_tx;
    let eigs = sol.blocks.iter().map(hermitian_eig).collect::<Result<Vec<_>, _>>()?;

    let mut state = BeamformingState {
        w: Vec::new(),
        u: instance.u.clone(),
        rho: instance.rho_fixed.clone(),
    };
    let mut evaluate = |mut w: Vec<ComplexMatrix>| -> Option<(Vec<ComplexMatrix>, f64)> {
        let total: f64 = w.iter().map(|v| v.frobenius_norm_sqr()).sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        let c = (instance.p_max / total).sqrt();
        for v in &mut w {
            *v = v.scale(c);
        }
        state.w = w;
        let report = check_constraints(
            &instance.channels.h,
            &instance.channels.h_big,
            &state,
            params,
            &instance.thresholds,
        );
        report
            .feasible
            .then(|| (std::mem::take(&mut state.w), report.sum_harvested()))
    };
    let consider = |best: &mut Option<(Vec<ComplexMatrix>, f64)>, cand: Option<(Vec<ComplexMatrix>, f64)>| {
        if let Some((w, e)) = cand {
            if best.as_ref().is_none_or(|(_, be)| e > *be) {
                *best = Some((w, e));
            }
        }
    };

    let principal: Vec<ComplexMatrix> = eigs
        .iter()
        .map(|e| e.principal_vector().scale(e.max_eigenvalue().max(0.0).sqrt()))
        .collect();
    let rank_one = eigs.iter().all(|e| {
        let l1 = e.max_eigenvalue();
        let l2 = if n > 1 { e.eigenvalues[n - 2] } else { 0.0 };
        l1 > 0.0 && l2 <= RANK_ONE_RATIO * l1
    });

    let mut best = None;
    consider(&mut best, evaluate(principal));
    if !(rank_one && best.is_some()) {
        let projected: Vec<ComplexMatrix> = (0..k)
            .map(|b| {
                let wh = &sol.blocks[b] * &instance.channels.h[b];
                let denom = instance.channels.h[b].dot(&wh).re;
                if denom > 0.0 {
                    wh.scale(1.0 / denom.sqrt())
                } else {
                    ComplexMatrix::zeros(n, 1)
                }
            })
            .collect();
        consider(&mut best, evaluate(projected));

        // V diag(sqrt(lambda_+)) per block for the Gaussian draws.
        let factors: Vec<ComplexMatrix> = eigs
            .iter()
            .map(|e| {
                let mut v = e.eigenvectors.clone();
                for (j, &l) in e.eigenvalues.iter().enumerate() {
                    let s = Complex::new(l.max(0.0).sqrt(), 0.0);
                    for i in 0..n {
                        v[(i, j)] *= s;
                    }
                }
                v
            })
            .collect();
        let traces: Vec<f64> = sol.blocks.iter().map(|b| b.trace().re.max(0.0)).collect();
        for _ in 0..params.gr_samples {
            let cand = (0..k)
                .map(|b| {
                    let z = sample_complex_gaussian(rng, n, 1);
                    let r = &factors[b] * &z;
                    let norm2 = r.frobenius_norm_sqr();
                    if norm2 > 0.0 {
                        r.scale((traces[b] / norm2).sqrt())
                    } else {
                        r
                    }
                })
                .collect();
            consider(&mut best, evaluate(cand));
        }
    }

    let (w, _) = best.ok_or(SubproblemError::ExtractionFailed)?;
    let achieved = p2_objective(&instance.f, &w);
    let sdr_bound = sol.objective_value;
    Ok(P2Solution {
        rank1_gap: (sdr_bound - achieved) / sdr_bound,
        w,
        sdr_bound,
        rank_one,
        sdp_iterations: sol.iterations,
    })
}

/// Per-node bounds `(lower, upper)` on `rho` implied by the communication and
/// harvesting thresholds at fixed beams.
pub fn ps_bounds(
    channels: &ChannelSet,
    w: &[ComplexMatrix],
    params: &SystemParams,
    thresholds: &Thresholds,
    node: usize,
) -> Result<(f64, f64), SubproblemError> {
    let h = &channels.h[node];
    let mut a = 0.0;
    let mut c = params.sigma2_c;
    for (j, wj) in w.iter().enumerate() {
        let g = h.dot(wj).norm_sqr();
        if j == node {
            a = g;
        } else {
            c += g;
        }
    }
    ps_bounds_from_powers(a, c, params, thresholds).ok_or(SubproblemError::PsInfeasible(node))
}

/// Bounds from the useful power `a` and interference-plus-noise `c`.
pub fn ps_bounds_from_powers(a: f64, c: f64, params: &SystemParams, t: &Thresholds) -> Option<(f64, f64)> {
    let excess = a - t.gamma * c;
    if !(excess > 0.0) {
        return None;
    }
    let upper = 1.0 - t.gamma * params.delta2 / excess;
    let lower = t.e_min / (params.zeta * (a + c));
    (lower < 1.0 && upper >= lower).then_some((lower, upper))
}

/// Largest splitting ratio per node that keeps the communication SINR and
/// harvested power at or above their thresholds.
pub fn optimize_ps(
    channels: &ChannelSet,
    w: &[ComplexMatrix],
    params: &SystemParams,
    thresholds: &Thresholds,
) -> Result<Vec<f64>, SubproblemError> {
    (0..channels.n_nodes())
        .map(|k| {
            let (_, upper) = ps_bounds(channels, w, params, thresholds, k)?;
            let rho = upper.min(1.0 - RHO_EPS);
            if rho <= 0.0 {
                return Err(SubproblemError::PsInfeasible(k));
            }
            Ok(rho)
        })
        .collect()
}

/// Unit-norm receive combiner maximising the sensing SINR of target `node`.
pub fn optimize_rx(
    channels: &ChannelSet,
    w: &[ComplexMatrix],
    params: &SystemParams,
    node: usize,
) -> Result<ComplexMatrix, SubproblemError> {
    let n_r = params.n_rx;
    // H_i S H_i^H = sum_l (H_i w_l)(H_i w_l)^H.
    let echo = |hi: &ComplexMatrix| {
        let mut m = ComplexMatrix::zeros(n_r, n_r);
        for wl in w {
            m += &(hi * wl).outer();
        }
        m
    };
    let a = echo(&channels.h_big[node]);
    let mut b = ComplexMatrix::identity(n_r).scale(params.sigma2_s);
    for (i, hi) in channels.h_big.iter().enumerate() {
        if i != node {
            b += &echo(hi);
        }
    }
    Ok(principal_generalized_eigvec(&a, &b)?.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Fading;
    use crate::metrics::{comm_sinr, harvested_power, sensing_sinr};
    use crate::scenario::place_nodes_uniform;

    fn drop(seed: u64, k: usize, fading: Fading) -> (SystemParams, ChannelSet) {
        let mut params = SystemParams::default();
        params.n_nodes = k;
        let geo = place_nodes_uniform(&mut SeededRng::new(seed, 0), k, 25.0, 10.0);
        let ch = ChannelSet::draw(&params, &geo, fading, seed, &[0]).unwrap();
        (params, ch)
    }

    fn init_state(params: &SystemParams, ch: &ChannelSet) -> BeamformingState {
        let k = ch.n_nodes();
        let mut rng = SeededRng::new(77, 0);
        BeamformingState {
            w: (0..k)
                .map(|_| sample_complex_gaussian(&mut rng, params.n_tx, 1).scale(0.3))
                .collect(),
            u: (0..k)
                .map(|_| sample_complex_gaussian(&mut rng, params.n_rx, 1).normalized())
                .collect(),
            rho: vec![0.5; k],
        }
    }

    #[test]
    fn p2_structure() {
        let (params, ch) = drop(1, 4, Fading::Rician);
        let state = init_state(&params, &ch);
        let p = build_p2(&ch, &state, &params, &params.thresholds());
        p.validate().unwrap();
        assert_eq!(p.constraints.len(), 13);
        let mut f_sum = ComplexMatrix::zeros(8, 8);
        for h in &ch.h {
            f_sum += &h.outer();
        }
        for c in &p.objective {
            assert!((c - &f_sum).frobenius_norm() <= 1e-15 * f_sum.frobenius_norm());
        }
    }

    #[test]
    fn p2_rows_reproduce_the_metrics() {
        // At W_k = w_k w_k^H each row's slack has the sign of the metric margin.
        let (params, ch) = drop(2, 3, Fading::Rician);
        let state = init_state(&params, &ch);
        let t = params.thresholds();
        let p = build_p2(&ch, &state, &params, &t);
        let blocks: Vec<_> = state.w.iter().map(|w| w.outer()).collect();
        for k in 0..3 {
            let id = 1.0 - state.rho[k];
            let c1 = p.lhs_at(3 * k, &blocks) - p.constraints[3 * k].rhs;
            let sinr = comm_sinr(&ch.h, &state, &params, k);
            // c1 = (interference + noise + delta2/(1-rho)) (sinr - gamma)
            let (_, other) = {
                let own = ch.h[k].dot(&state.w[k]).norm_sqr();
                (own, blocks.iter().map(|b| b.quad_form(&ch.h[k])).sum::<f64>() - own)
            };
            let denom = other + params.sigma2_c + params.delta2 / id;
            assert!((c1 - denom * (sinr - t.gamma)).abs() <= 1e-9 * c1.abs().max(1e-20));

            let c2 = p.lhs_at(3 * k + 1, &blocks) - p.constraints[3 * k + 1].rhs;
            let s = sensing_sinr(&ch.h_big, &state, &params, k);
            assert_eq!(c2 >= 0.0, s >= t.eta);

            let c3 = p.lhs_at(3 * k + 2, &blocks) - p.constraints[3 * k + 2].rhs;
            let e = harvested_power(&ch.h, &state, &params, k);
            assert!((c3 - (e - t.e_min)).abs() <= 1e-12 * e);
        }
    }

    #[test]
    fn single_node_sensing_row_has_no_interference() {
        let (params, ch) = drop(3, 1, Fading::LosOnly);
        let state = init_state(&params, &ch);
        let inst = P2Instance::new(&ch, &state, &params, &params.thresholds());
        let p = inst.to_sdp(&params, 0.0);
        assert_eq!(p.constraints.len(), 4);
        assert!((&p.constraints[1].coeffs[0] - &inst.g[0][0]).frobenius_norm() == 0.0);
        assert_eq!(p.constraints[1].rhs, params.eta * params.sigma2_s);
    }

    #[test]
    fn ps_closed_form_example() {
        let params = SystemParams::default();
        let t = Thresholds {
            gamma: 10.0,
            eta: 10.0,
            e_min: 1e-9,
        };
        let (lo, up) = ps_bounds_from_powers(1e-6, 2e-12, &params, &t).unwrap();
        assert!(((1.0 - up) - 1e-12 / (1e-6 - 2e-11)).abs() < 1e-15);
        assert!((1.0 - up - 1.00002e-6).abs() < 1e-11);
        assert!((lo - 1e-9 / (1e-6 + 2e-12)).abs() < 1e-15);
        assert!(ps_bounds_from_powers(1e-11, 2e-12, &params, &t).is_none());
    }

    #[test]
    fn ps_result_saturates_sinr() {
        let (params, ch) = drop(4, 3, Fading::Rician);
        let mut state = init_state(&params, &ch);
        // Strong own beams so the SINR target is reachable.
        for k in 0..3 {
            state.w[k] = ch.h[k].normalized().scale(0.5);
        }
        let t = Thresholds {
            gamma: 1.0,
            eta: 1.0,
            e_min: 1e-12,
        };
        let rho = optimize_ps(&ch, &state.w, &params, &t).unwrap();
        state.rho = rho.clone();
        for k in 0..3 {
            let s = comm_sinr(&ch.h, &state, &params, k);
            if rho[k] < 1.0 - RHO_EPS {
                assert!((s - t.gamma).abs() <= 1e-9 * t.gamma, "{s}");
            } else {
                assert!(s >= t.gamma);
            }
        }
    }

    #[test]
    fn rx_single_target_reduces_to_eigenvector() {
        let (params, ch) = drop(5, 1, Fading::Rician);
        let state = init_state(&params, &ch);
        let u = optimize_rx(&ch, &state.w, &params, 0).unwrap();
        let a = {
            let mut m = ComplexMatrix::zeros(12, 12);
            for w in &state.w {
                m += &(&ch.h_big[0] * w).outer();
            }
            m
        };
        let top = hermitian_eig(&a).unwrap();
        assert!((u.dot(&top.principal_vector()).norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn extraction_on_single_node_is_rank_one() {
        let (mut params, ch) = drop(6, 1, Fading::LosOnly);
        params.gamma = 1.0;
        params.eta = 1.0;
        params.e_min = 1e-12;
        let mut state = init_state(&params, &ch);
        let mut st = state.clone();
        st.w = vec![ch.h[0].clone()];
        state.u = vec![optimize_rx(&ch, &st.w, &params, 0).unwrap()];
        let inst = P2Instance::new(&ch, &state, &params, &params.thresholds());
        let sol = solve_p2_and_extract(&inst, &mut SeededRng::new(1, 1), &params).unwrap();
        assert!(sol.rank_one);
        assert!(sol.rank1_gap.abs() <= 1e-6);
        let expected = params.p_max * ch.h[0].frobenius_norm_sqr();
        assert!((sol.sdr_bound - expected).abs() <= 1e-6 * expected);
        let align = ch.h[0].dot(&sol.w[0]).norm() / (ch.h[0].norm() * sol.w[0].norm());
        assert!(align > 1.0 - 1e-9);
    }
}
