//! Alternating optimisation over transmit beams, splitting ratios and receive
//! combiners, with threshold relaxation for hard starts.

use std::time::Instant;

use crate::channel::{steering_rx, ChannelSet};
use crate::metrics::{check_constraints, BeamformingState, ConstraintReport};
use crate::numerics::SeededRng;
use crate::scenario::{ScenarioGeometry, SystemParams, Thresholds};
use crate::sdp::SdpStatus;
use crate::subproblems::{optimize_ps, optimize_rx, solve_p2_and_extract, P2Instance, SubproblemError, P2_MARGIN};
use crate::ComplexMatrix;

/// Splitting ratios are chosen against thresholds tightened by this relative
/// amount, which leaves the next relaxed problem strictly feasible at the
/// current beams.
pub const PS_MARGIN: f64 = 2.0 * P2_MARGIN;
/// Splitting ratio used before any beams exist and as a retry point.
pub const RHO_INIT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct AoIteration {
    pub chi: f64,
    /// `None` when the relaxation could not be posed.
    pub sdp_status: Option<SdpStatus>,
    /// Whether this iteration produced a state meeting the `chi`-scaled thresholds.
    pub feasible: bool,
    /// Harvested sum of this iteration's state (NaN when infeasible).
    pub sum_he: f64,
    /// Best harvested sum so far at full thresholds (NaN before the first).
    pub best_sum_he: f64,
    pub sinr_c: Vec<f64>,
    pub sinr_s: Vec<f64>,
    pub rank1_gap: f64,
    /// Seconds since the start of the run.
    pub wall_time: f64,
}

#[derive(Clone, Debug)]
pub struct AoTrace {
    pub iterations: Vec<AoIteration>,
    pub converged: bool,
    pub feasible_at_full_thresholds: bool,
    pub final_state: BeamformingState,
    /// Constraint check of `final_state` at full thresholds.
    pub final_report: ConstraintReport,
}

impl AoTrace {
    /// Harvested sum of the final state, when it meets the full thresholds.
    pub fn sum_he(&self) -> Option<f64> {
        self.feasible_at_full_thresholds
            .then(|| self.final_report.sum_harvested())
    }

    /// Number of outer iterations until the stopping rule fired.
    pub fn n_iterations(&self) -> usize {
        self.iterations.len()
    }

    /// Best-so-far harvested sum per iteration.
    pub fn best_sequence(&self) -> Vec<f64> {
        self.iterations.iter().map(|i| i.best_sum_he).collect()
    }
}

/// Linear relaxation ramp `min(1, r / ramp)`.
pub fn chi_schedule(iter: usize, ramp: usize) -> f64 {
    assert!(ramp >= 1, "ramp must be at least one iteration");
    (iter as f64 / ramp as f64).min(1.0)
}

/// Matched-filter combiners `a_r(beta_k) / sqrt(N_r)`, `rho = 0.5`, zero beams.
pub fn initialize(channels: &ChannelSet, geometry: &ScenarioGeometry, params: &SystemParams) -> BeamformingState {
    let k = channels.n_nodes();
    let u = (0..k)
        .map(|i| {
            steering_rx(geometry.beta[i], params.n_rx, params.n_total())
                .expect("geometry yields |beta| <= 1")
                .scale(1.0 / (params.n_rx as f64).sqrt())
        })
        .collect();
    BeamformingState {
        w: vec![ComplexMatrix::zeros(params.n_tx, 1); k],
        u,
        rho: vec![RHO_INIT; k],
    }
}

struct Step {
    state: BeamformingState,
    report: ConstraintReport,
    rank1_gap: f64,
}

/// One P2 -> P3 -> P5 pass at thresholds `t` from `state`.
fn step(
    channels: &ChannelSet,
    state: &BeamformingState,
    params: &SystemParams,
    t: &Thresholds,
    rng: &mut SeededRng,
) -> (Option<SdpStatus>, Option<Step>) {
    let inst = P2Instance::new(channels, state, params, t);
    let p2 = match solve_p2_and_extract(&inst, rng, params) {
        Ok(p2) => p2,
        Err(SubproblemError::P2Failed(s)) => return (Some(s), None),
        Err(SubproblemError::ExtractionFailed) => return (Some(SdpStatus::Optimal), None),
        Err(_) => return (None, None),
    };
    let rho = optimize_ps(channels, &p2.w, params, &t.scaled(1.0 + PS_MARGIN))
        .or_else(|_| optimize_ps(channels, &p2.w, params, t))
        .unwrap_or_else(|_| state.rho.clone());
    let u = (0..channels.n_nodes())
        .map(|k| optimize_rx(channels, &p2.w, params, k).unwrap_or_else(|_| state.u[k].clone()))
        .collect();
    let next = BeamformingState { w: p2.w, u, rho };
    let report = check_constraints(&channels.h, &channels.h_big, &next, params, t);
    if !report.feasible {
        return (Some(SdpStatus::Optimal), None);
    }
    (
        Some(SdpStatus::Optimal),
        Some(Step {
            state: next,
            report,
            rank1_gap: p2.rank1_gap,
        }),
    )
}

/// Runs the alternating optimisation on one drop.
///
/// Outer iteration `r` targets the thresholds scaled by
/// `chi_schedule(r, chi_ramp_iters)`. A failed iteration on the ramp keeps
/// the previous state; a failure at full thresholds ends the run. At full
/// thresholds the best state is kept, and the run stops once the best
/// harvested sum improves by at most `tau`.
pub fn run_ao(
    channels: &ChannelSet,
    geometry: &ScenarioGeometry,
    params: &SystemParams,
    rng: &mut SeededRng,
) -> AoTrace {
    let start = Instant::now();
    let full = params.thresholds();
    let ramp = params.chi_ramp_iters.max(1);
    let mut state = initialize(channels, geometry, params);
    let mut iterations = Vec::new();
    let mut best: Option<(BeamformingState, f64)> = None;
    let mut have_beams = false;
    let mut last_chi = f64::NAN;
    let mut converged = false;

    for r in 0..params.max_iters {
        let chi = chi_schedule(r, ramp);
        let t = full.scaled(chi);
        if have_beams && chi != last_chi {
            if let Ok(rho) = optimize_ps(channels, &state.w, params, &t.scaled(1.0 + PS_MARGIN)) {
                state.rho = rho;
            }
        }
        last_chi = chi;
        let (mut status, mut outcome) = step(channels, &state, params, &t, rng);
        if outcome.is_none() && state.rho.iter().any(|&r| r != RHO_INIT) {
            let mut retry = state.clone();
            retry.rho = vec![RHO_INIT; retry.n_nodes()];
            (status, outcome) = step(channels, &retry, params, &t, rng);
        }

        let mut record = AoIteration {
            chi,
            sdp_status: status,
            feasible: outcome.is_some(),
            sum_he: f64::NAN,
            best_sum_he: best.as_ref().map_or(f64::NAN, |b| b.1),
            sinr_c: Vec::new(),
            sinr_s: Vec::new(),
            rank1_gap: f64::NAN,
            wall_time: 0.0,
        };

        let Some(out) = outcome else {
            record.wall_time = start.elapsed().as_secs_f64();
            iterations.push(record);
            if chi < 1.0 {
                continue;
            }
            break;
        };

        let sum_he = out.report.sum_harvested();
        record.sum_he = sum_he;
        record.sinr_c = out.report.sinr_c.clone();
        record.sinr_s = out.report.sinr_s.clone();
        record.rank1_gap = out.rank1_gap;
        have_beams = true;
        state = out.state;

        if chi == 1.0 {
            let previous = best.as_ref().map(|b| b.1);
            match previous {
                Some(prev) if sum_he <= prev => state = best.as_ref().expect("best exists").0.clone(),
                _ => best = Some((state.clone(), sum_he)),
            }
            let now = best.as_ref().expect("best exists").1;
            record.best_sum_he = now;
            record.wall_time = start.elapsed().as_secs_f64();
            iterations.push(record);
            if let Some(prev) = previous {
                if (now - prev).abs() <= params.tau {
                    converged = true;
                    break;
                }
            }
        } else {
            record.wall_time = start.elapsed().as_secs_f64();
            iterations.push(record);
        }
    }

    let final_state = best.map_or(state, |b| b.0);
    let final_report = check_constraints(&channels.h, &channels.h_big, &final_state, params, &full);
    AoTrace {
        iterations,
        converged,
        feasible_at_full_thresholds: final_report.feasible,
        final_state,
        final_report,
    }
}
