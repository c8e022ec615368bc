//! Worked examples checked against independent references: hand arithmetic,
//! closed forms, sampling and brute-force search.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex;

use crate::ao::run_ao;
use crate::baselines::mrt_baseline;
use crate::channel::{comm_channel, sensing_channel, steering_rx, steering_tx, ChannelSet, Fading};
use crate::config::Config;
use crate::experiment::{run_experiment, ChannelModel, CurveSpec, ExperimentKind, ExperimentSpec, XAxis};
use crate::metrics::{check_constraints, comm_sinr, harvested_power, sensing_sinr, BeamformingState};
use crate::numerics::{
    hermitian_eig, hermitian_eigenvalues, principal_generalized_eigvec, project_psd, sample_complex_gaussian, SeededRng,
};
use crate::scenario::{angles_from_positions, place_nodes_uniform, ScenarioGeometry, SystemParams, Thresholds};
use crate::sdp::{embed_matrix, solve_sdp, SdpProblem, SdpStatus, Sense, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::subproblems::{optimize_ps, optimize_rx, ps_bounds_from_powers, solve_p2_and_extract, P2Instance, RHO_EPS};
use crate::ComplexMatrix;

#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<String, String>;

const SEED: u64 = 0x0AC1E;

fn rng(stream: u64) -> SeededRng {
    SeededRng::new(SEED, stream)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_hermitian(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    sample_complex_gaussian::<f64>(rng, n, n).hermitian_part()
}

fn random_psd(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    let g = sample_complex_gaussian::<f64>(rng, n, n);
    &g * &g.adjoint()
}

fn random_unit(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    sample_complex_gaussian::<f64>(rng, n, 1).normalized()
}

/// Geometry with one node at horizontal offset `(x, 0)` below a BS at height `z`.
fn single_node(x: f64, z: f64) -> ScenarioGeometry {
    ScenarioGeometry::from_positions([0.0, 0.0, z], vec![[x, 0.0, 0.0]]).expect("offset node")
}

fn eig_reconstruction() -> Outcome {
    let a = random_hermitian(&mut rng(1), 8);
    let e = hermitian_eig(&a).map_err(|e| e.to_string())?;
    let err = (&e.reconstruct() - &a).frobenius_norm();
    ensure(err <= 1e-8, format!("|A - V L V^H|_F = {err:.2e}"))
}

fn psd_projection_optimality() -> Outcome {
    let mut r = rng(2);
    let a = random_hermitian(&mut r, 6);
    let p = project_psd(&a).map_err(|e| e.to_string())?;
    let dist = (&a - &p).frobenius_norm();
    let mut closest = f64::INFINITY;
    // PSD points scattered around the projection at several radii.
    for i in 0..1000 {
        let eps = 10f64.powi(-(i % 4));
        let x = project_psd(&(&p + &random_hermitian(&mut r, 6).scale(eps))).map_err(|e| e.to_string())?;
        closest = closest.min((&a - &x).frobenius_norm());
    }
    ensure(
        dist <= closest,
        format!("|A - P(A)| = {dist:.4}, nearest of 1000 PSD samples {closest:.4}"),
    )
}

fn generalized_rayleigh() -> Outcome {
    let mut r = rng(3);
    let a = random_psd(&mut r, 4);
    let b = &random_psd(&mut r, 4) + &ComplexMatrix::identity(4);
    let u = principal_generalized_eigvec(&a, &b).map_err(|e| e.to_string())?;
    let q = |v: &ComplexMatrix| a.quad_form(v) / b.quad_form(v);
    let value = q(&u);
    let sampled = (0..100_000).map(|_| q(&random_unit(&mut r, 4))).fold(0.0, f64::max);
    // A u = lambda B u.
    let resid = (&(&a * &u) - &(&b * &u).scale(value)).norm() / (&a * &u).norm();
    ensure(
        sampled <= value * (1.0 + 1e-12) && resid <= 1e-10,
        format!("returned {value:.6}, sampled max {sampled:.6}, pencil residual {resid:.1e}"),
    )
}

fn gaussian_moments() -> Outcome {
    let n = 100_000;
    let z = sample_complex_gaussian::<f64>(&mut rng(4), n, 1);
    let mean: Complex<f64> = z.as_slice().iter().sum::<Complex<f64>>() / n as f64;
    let var = z.as_slice().iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
    ensure(
        mean.norm() <= 0.02 && (var - 1.0).abs() <= 0.03,
        format!("|mean| = {:.4}, variance = {var:.4}", mean.norm()),
    )
}

fn node_distances() -> Outcome {
    let geo = place_nodes_uniform(&mut rng(5), 4, 25.0, 10.0);
    let hi = (25.0f64 * 25.0 + 25.0 * 25.0 + 10.0 * 10.0).sqrt();
    let ok = geo.distances.iter().all(|&d| (10.0..=hi).contains(&d));
    ensure(ok, format!("distances {:?} within [10, {hi:.2}]", geo.distances))
}

fn angle_examples() -> Outcome {
    let a = angles_from_positions([0.0, 0.0, 10.0], [3.0, 4.0, 0.0]).map_err(|e| e.to_string())?;
    let b = angles_from_positions([0.0, 0.0, 10.0], [0.0, -5.0, 0.0]).map_err(|e| e.to_string())?;
    let cos_phi = 10.0 / 125f64.sqrt();
    let ok = (a.sin_theta + 0.8).abs() < 1e-12
        && (a.cos_phi - cos_phi).abs() < 1e-12
        && (a.beta + 0.8 * cos_phi).abs() < 1e-12
        && (b.sin_theta - 1.0).abs() < 1e-12
        && (b.cos_phi - cos_phi).abs() < 1e-12;
    ensure(
        ok,
        format!("beta = {:.6}, second node sin_theta = {}", a.beta, b.sin_theta),
    )
}

fn steering_phases() -> Outcome {
    let at = steering_tx(0.5, 8, 20).map_err(|e| e.to_string())?;
    let ar = steering_rx(0.5, 12, 20).map_err(|e| e.to_string())?;
    let wrap = |x: f64| (x + PI).rem_euclid(2.0 * PI) - PI;
    let et = wrap(at[(0, 0)].arg() + PI * 9.5 * 0.5).abs();
    let er = wrap(ar[(0, 0)].arg() + 0.75 * PI).abs();
    ensure(
        et < 1e-12 && er < 1e-12,
        format!("phase errors {et:.1e} (tx) and {er:.1e} (rx)"),
    )
}

fn los_norms() -> Outcome {
    let params = SystemParams::default();
    let mut r = rng(6);
    // d = 1 m for the link, d = 0.5 m (2d = d0) for the echo.
    let h = comm_channel(&params, &single_node(0.8, 0.6), &mut r, 0, Fading::LosOnly).map_err(|e| e.to_string())?;
    let hb = sensing_channel(&params, &single_node(0.4, 0.3), &mut r, 0, Fading::LosOnly).map_err(|e| e.to_string())?;
    let (nh, nb) = (h.frobenius_norm_sqr(), hb.frobenius_norm_sqr());
    ensure(
        rel(nh, 8e-4) < 1e-12 && rel(nb, 9.6e-3) < 1e-12,
        format!("|h|^2 = {nh:.6e}, |H|_F^2 = {nb:.6e}"),
    )
}

fn rician_moments() -> Outcome {
    let params = SystemParams {
        kappa: 5.0,
        ..SystemParams::default()
    };
    let geo = single_node(6.0, 8.0);
    let mut r = rng(7);
    let draws = 10_000;
    let mean_h = (0..draws)
        .map(|_| comm_channel(&params, &geo, &mut r, 0, Fading::Rician).map(|h| h.frobenius_norm_sqr()))
        .sum::<Result<f64, _>>()
        .map_err(|e| e.to_string())?
        / draws as f64;
    let expect_h = (5.0 / 6.0) * 1e-4 * 1e-2 * 8.0 + (1.0 / 6.0) * 1e-4 * 10f64.powf(-3.2) * 8.0;

    let nlos = SystemParams {
        kappa: 0.0,
        ..SystemParams::default()
    };
    let mean_b = (0..draws)
        .map(|_| sensing_channel(&nlos, &geo, &mut r, 0, Fading::Rician).map(|h| h.frobenius_norm_sqr()))
        .sum::<Result<f64, _>>()
        .map_err(|e| e.to_string())?
        / draws as f64;
    let expect_b = 1e-4 * 20f64.powf(-3.2) * nlos.rcs * 96.0;
    ensure(
        rel(mean_h, expect_h) <= 0.03 && rel(mean_b, expect_b) <= 0.03,
        format!(
            "E|h|^2 off by {:.2}%, E|H_nlos|_F^2 off by {:.2}%",
            100.0 * rel(mean_h, expect_h),
            100.0 * rel(mean_b, expect_b)
        ),
    )
}

/// One node whose link gain is `gain` with unit beam.
fn scalar_link(gain: f64, rho: f64) -> (Vec<ComplexMatrix>, BeamformingState) {
    let h = vec![ComplexMatrix::column(vec![Complex::new(gain.sqrt(), 0.0)])];
    let one = ComplexMatrix::column(vec![Complex::new(1.0, 0.0)]);
    let state = BeamformingState {
        w: vec![one.clone()],
        u: vec![one],
        rho: vec![rho],
    };
    (h, state)
}

fn link_metric_examples() -> Outcome {
    let params = SystemParams {
        sigma2_c: 1e-12,
        delta2: 1e-13,
        zeta: 1.0,
        ..SystemParams::default()
    };
    let (h, s0) = scalar_link(1e-6, 0.0);
    let sinr = comm_sinr(&h, &s0, &params, 0);
    let (h, s1) = scalar_link(1e-6, 1.0);
    let e = harvested_power(&h, &s1, &params, 0);
    ensure(
        rel(sinr, 1e-6 / 1.1e-12) < 1e-12 && rel(e, 1.000001e-6) < 1e-12,
        format!("SINR = {sinr:.6e}, harvested = {e:.7e} W"),
    )
}

/// Two LoS targets at `beta = -0.25, 0.25`; their transmit and receive
/// steering vectors are both orthogonal for `N_t = 8`, `N_r = 12`.
fn orthogonal_pair(params: &SystemParams) -> (ScenarioGeometry, ChannelSet) {
    // A node at (0, y, 0) under a 10 m BS has beta = -sign(y) 10 / sqrt(y^2 + 100).
    let nodes = [-0.25f64, 0.25]
        .iter()
        .map(|&b| [0.0, -b.signum() * ((10.0 / b.abs()).powi(2) - 100.0).sqrt(), 0.0])
        .collect();
    let geo = ScenarioGeometry::from_positions([0.0, 0.0, 10.0], nodes).expect("offset nodes");
    let ch = ChannelSet::draw(params, &geo, Fading::LosOnly, SEED, &[0]).expect("valid geometry");
    (geo, ch)
}

fn orthogonal_sensing() -> Outcome {
    let params = SystemParams {
        n_nodes: 2,
        ..SystemParams::default()
    };
    let (geo, ch) = orthogonal_pair(&params);
    let nt = params.n_total();
    let mut w = Vec::new();
    let mut u = Vec::new();
    for k in 0..2 {
        if (geo.beta[k] - [-0.25, 0.25][k]).abs() > 1e-12 {
            return Err(format!("construction gave beta = {:?}", geo.beta));
        }
        let at = steering_tx(geo.beta[k], params.n_tx, nt).map_err(|e| e.to_string())?;
        w.push(at.scale([0.3, 0.5][k]));
        u.push(
            steering_rx(geo.beta[k], params.n_rx, nt)
                .map_err(|e| e.to_string())?
                .normalized(),
        );
    }
    let state = BeamformingState {
        w: w.clone(),
        u,
        rho: vec![0.5; 2],
    };
    let mut worst: f64 = 0.0;
    for k in 0..2 {
        let at = steering_tx(geo.beta[k], params.n_tx, nt).map_err(|e| e.to_string())?;
        let amp2 = params.l0 * (2.0 * geo.distances[k] / params.d0).powf(-params.alpha) * params.rcs;
        let s_at: f64 = w.iter().map(|wl| at.dot(wl).norm_sqr()).sum();
        let expect = params.n_rx as f64 * amp2 * s_at / params.sigma2_s;
        worst = worst.max(rel(sensing_sinr(&ch.h_big, &state, &params, k), expect));
    }
    ensure(worst < 1e-9, format!("largest relative error {worst:.1e}"))
}

fn ao_output_margins() -> Outcome {
    let params = SystemParams::default();
    let geo = place_nodes_uniform(&mut rng(8), params.n_nodes, 25.0, 10.0);
    let ch = ChannelSet::draw(&params, &geo, Fading::Rician, SEED, &[8]).map_err(|e| e.to_string())?;
    let trace = run_ao(&ch, &geo, &params, &mut rng(9));
    let t = params.thresholds();
    let rep = check_constraints(&ch.h, &ch.h_big, &trace.final_state, &params, &t);
    let m = &rep.margins;
    let worst = m
        .sinr_c
        .iter()
        .map(|v| v / t.gamma)
        .chain(m.sinr_s.iter().map(|v| v / t.eta))
        .chain(m.harvested.iter().map(|v| v / t.e_min))
        .chain([m.power / params.p_max])
        .fold(f64::INFINITY, f64::min);
    ensure(
        rep.feasible && worst >= -1e-9,
        format!("feasible = {}, smallest relative margin {worst:.2e}", rep.feasible),
    )
}

fn sdp_diagonal_example() -> Outcome {
    let mut p = SdpProblem::new(2, 1);
    p.objective[0] = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
    p.push(vec![ComplexMatrix::identity(2)], Sense::Le, 1.0);
    let sol = solve_sdp(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).map_err(|e| e.to_string())?;
    let e1 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
    let err = (&sol.blocks[0] - &e1).frobenius_norm();
    ensure(
        sol.status == SdpStatus::Optimal && (sol.objective_value - 1.0).abs() < 1e-6 && err < 1e-4,
        format!("objective {:.9}, |W - e1 e1^T| = {err:.1e}", sol.objective_value),
    )
}

/// `max h^H W h` subject to `tr W <= p_max`.
fn power_only(h: &ComplexMatrix, p_max: f64) -> SdpProblem<f64> {
    let n = h.rows();
    let mut p = SdpProblem::new(n, 1);
    p.objective[0] = h.outer();
    p.push(vec![ComplexMatrix::identity(n)], Sense::Le, p_max);
    p
}

fn sdp_single_node() -> Outcome {
    let mut r = rng(10);
    let h = sample_complex_gaussian::<f64>(&mut r, 8, 1).scale(1e-2);
    let sol = solve_sdp(&power_only(&h, 1.0), DEFAULT_TOL, DEFAULT_MAX_ITERS).map_err(|e| e.to_string())?;
    let expect = h.frobenius_norm_sqr();
    let err = rel(sol.objective_value, expect);

    // Brute force over rank-one W = v v^H on a sphere grid for N_t = 2.
    let h2 = sample_complex_gaussian::<f64>(&mut r, 2, 1);
    let sol2 = solve_sdp(&power_only(&h2, 1.0), DEFAULT_TOL, DEFAULT_MAX_ITERS).map_err(|e| e.to_string())?;
    let steps = 400;
    let mut grid: f64 = 0.0;
    for i in 0..=steps {
        let t = 0.5 * PI * i as f64 / steps as f64;
        for j in 0..steps {
            let ph = 2.0 * PI * j as f64 / steps as f64;
            let v = ComplexMatrix::column(vec![Complex::new(t.cos(), 0.0), Complex::from_polar(t.sin(), ph)]);
            grid = grid.max(h2.dot(&v).norm_sqr());
        }
    }
    let ok = sol.status == SdpStatus::Optimal
        && err <= 1e-6
        && sol2.objective_value >= grid * (1.0 - 1e-6)
        && sol2.objective_value <= grid * (1.0 + 1e-4);
    ensure(
        ok,
        format!(
            "N_t = 8 error {err:.1e}; N_t = 2 solver {:.6} vs grid {grid:.6}",
            sol2.objective_value
        ),
    )
}

fn embedding_example() -> Outcome {
    let x = ComplexMatrix::from_row_major(
        2,
        2,
        vec![
            Complex::new(0.0, 0.0),
            Complex::new(0.0, -1.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, 0.0),
        ],
    )
    .map_err(|e| e.to_string())?;
    let eigs = hermitian_eigenvalues(&embed_matrix(&x)).map_err(|e| e.to_string())?;
    let expect = [-1.0, -1.0, 1.0, 1.0];
    let ok = eigs.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12);
    ensure(ok, format!("eigenvalues {eigs:?}"))
}

/// Single-node LoS drop 12 m from the foot of a 10 m BS.
fn single_node_drop(params: &SystemParams) -> (ScenarioGeometry, ChannelSet) {
    let geo = single_node(12.0, 10.0);
    let ch = ChannelSet::draw(params, &geo, Fading::LosOnly, SEED, &[1]).expect("valid geometry");
    (geo, ch)
}

fn extraction_single_node() -> Outcome {
    let params = SystemParams {
        n_nodes: 1,
        ..SystemParams::default()
    };
    let (geo, ch) = single_node_drop(&params);
    let state = crate::ao::initialize(&ch, &geo, &params);
    let inst = P2Instance::new(&ch, &state, &params, &params.thresholds());
    let sol = solve_p2_and_extract(&inst, &mut rng(11), &params).map_err(|e| e.to_string())?;
    ensure(sol.rank1_gap <= 1e-6, format!("rank-one gap {:.1e}", sol.rank1_gap))
}

fn ps_example() -> Outcome {
    let params = SystemParams {
        delta2: 1e-13,
        zeta: 1.0,
        ..SystemParams::default()
    };
    let t = Thresholds {
        gamma: 10.0,
        eta: 10.0,
        e_min: 1e-9,
    };
    let (lo, hi) = ps_bounds_from_powers(1e-6, 2e-12, &params, &t).ok_or("instance reported infeasible")?;
    let ok = rel(1.0 - hi, 1.00002e-6) < 1e-5 && rel(lo, 1e-3) < 1e-5 && (hi - 0.999999).abs() < 1e-7;
    ensure(ok, format!("bounds [{lo:.6e}, {hi:.9}]"))
}

/// Random drop with random beams at full budget that admits a splitting ratio.
fn feasible_ps_instance(r: &mut SeededRng, params: &SystemParams) -> (ChannelSet, Vec<ComplexMatrix>) {
    loop {
        let geo = place_nodes_uniform(r, params.n_nodes, 25.0, 10.0);
        let ch = ChannelSet::draw(
            params,
            &geo,
            Fading::Rician,
            r.stream_id(),
            &[r.uniform(0.0, 1e9) as u64],
        )
        .expect("valid geometry");
        let share = (params.p_max / params.n_nodes as f64).sqrt();
        let w: Vec<ComplexMatrix> =
            ch.h.iter()
                .map(|h| {
                    let mut v = h.normalized();
                    v.axpy(0.2, &random_unit(r, params.n_tx));
                    v.normalized().scale(share)
                })
                .collect();
        if optimize_ps(&ch, &w, params, &params.thresholds()).is_ok() {
            return (ch, w);
        }
    }
}

/// Largest `rho` on the grid `{step, 2 step, ...}` meeting the SINR and
/// energy thresholds, by direct evaluation of the link metrics.
pub fn grid_ps(
    channels: &ChannelSet,
    w: &[ComplexMatrix],
    params: &SystemParams,
    t: &Thresholds,
    node: usize,
    step: f64,
) -> Option<f64> {
    let n = (1.0 / step).round() as usize;
    let mut state = BeamformingState {
        w: w.to_vec(),
        u: Vec::new(),
        rho: vec![0.5; channels.n_nodes()],
    };
    let mut best = None;
    for i in 1..n {
        state.rho[node] = i as f64 * step;
        let s = comm_sinr(&channels.h, &state, params, node);
        let e = harvested_power(&channels.h, &state, params, node);
        if s >= t.gamma && e >= t.e_min {
            best = Some(state.rho[node]);
        }
    }
    best
}

fn ps_grid_oracle() -> Outcome {
    let params = SystemParams {
        n_nodes: 2,
        ..SystemParams::default()
    };
    let mut r = rng(12);
    let t = params.thresholds();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (ch, w) = feasible_ps_instance(&mut r, &params);
        let rho = optimize_ps(&ch, &w, &params, &t).map_err(|e| e.to_string())?;
        for k in 0..2 {
            let g = grid_ps(&ch, &w, &params, &t, k, 1e-4).ok_or("grid found no feasible ratio")?;
            worst = worst.max((g - rho[k]).abs());
        }
    }
    ensure(worst <= 1e-4, format!("largest grid distance {worst:.2e}"))
}

fn rx_alignment() -> Outcome {
    let params = SystemParams {
        n_nodes: 2,
        ..SystemParams::default()
    };
    let (geo, ch) = orthogonal_pair(&params);
    let nt = params.n_total();
    let w: Vec<ComplexMatrix> = (0..2)
        .map(|k| steering_tx(geo.beta[k], params.n_tx, nt).map(|a| a.scale(0.25)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 1.0;
    for k in 0..2 {
        let u = optimize_rx(&ch, &w, &params, k).map_err(|e| e.to_string())?;
        let ar = steering_rx(geo.beta[k], params.n_rx, nt).map_err(|e| e.to_string())?;
        worst = worst.min(u.dot(&ar).norm() / (params.n_rx as f64).sqrt());
    }
    ensure(
        worst >= 1.0 - 1e-8,
        format!("smallest |u^H a_r| / sqrt(N_r) = {worst:.12}"),
    )
}

fn rx_sphere_oracle() -> Outcome {
    let params = SystemParams::default();
    let mut r = rng(13);
    let geo = place_nodes_uniform(&mut r, params.n_nodes, 25.0, 10.0);
    let ch = ChannelSet::draw(&params, &geo, Fading::Rician, SEED, &[13]).map_err(|e| e.to_string())?;
    let w: Vec<ComplexMatrix> = (0..params.n_nodes)
        .map(|_| random_unit(&mut r, params.n_tx).scale(0.5))
        .collect();
    let mut state = BeamformingState {
        w: w.clone(),
        u: vec![ComplexMatrix::zeros(params.n_rx, 1); params.n_nodes],
        rho: vec![0.5; params.n_nodes],
    };
    let node = 0;
    state.u[node] = optimize_rx(&ch, &w, &params, node).map_err(|e| e.to_string())?;
    let value = sensing_sinr(&ch.h_big, &state, &params, node);
    let mut sampled: f64 = 0.0;
    for _ in 0..10_000 {
        state.u[node] = random_unit(&mut r, params.n_rx);
        sampled = sampled.max(sensing_sinr(&ch.h_big, &state, &params, node));
    }
    ensure(
        value >= sampled * (1.0 - 1e-6),
        format!("returned {value:.6e}, sampled max {sampled:.6e}"),
    )
}

/// `rho* (p_max |h|^2 + sigma_c^2)` times `zeta`, with `rho*` the largest
/// ratio meeting the SINR threshold.
fn single_node_chain(params: &SystemParams, h: &ComplexMatrix) -> f64 {
    let a = params.p_max * h.frobenius_norm_sqr();
    let rho = (1.0 - params.gamma * params.delta2 / (a - params.gamma * params.sigma2_c)).min(1.0 - RHO_EPS);
    params.zeta * rho * (a + params.sigma2_c)
}

fn ao_single_node() -> Outcome {
    let params = SystemParams {
        n_nodes: 1,
        gamma: 1.0,
        eta: 1.0,
        e_min: 1e-12,
        ..SystemParams::default()
    };
    let (geo, ch) = single_node_drop(&params);
    let trace = run_ao(&ch, &geo, &params, &mut rng(14));
    let got = trace.sum_he().ok_or("run ended infeasible")?;
    let expect = single_node_chain(&params, &ch.h[0]);
    ensure(
        trace.converged && rel(got, expect) <= 1e-4,
        format!("sum HE {got:.9e} W vs chain {expect:.9e} W"),
    )
}

fn mrt_single_node() -> Outcome {
    let params = SystemParams {
        n_nodes: 1,
        ..SystemParams::default()
    };
    let (_, ch) = single_node_drop(&params);
    let got = mrt_baseline(&ch, &params).sum_he;
    let expect = single_node_chain(&params, &ch.h[0]);
    ensure(
        rel(got, expect) <= 1e-12,
        format!("sum HE {got:.9e} W vs chain {expect:.9e} W"),
    )
}

fn trivial_thresholds() -> Outcome {
    let mut config = Config::default();
    config.params.e_min = 1e-20;
    let mut curve = CurveSpec::new(
        "trivial",
        ChannelModel::Rician {
            kappa: config.params.kappa,
        },
    );
    curve.eta_db = Some(-60.0);
    let spec = ExperimentSpec {
        kind: ExperimentKind::FeasibilityVsGamma,
        x_axis: XAxis::GammaDb,
        x: vec![-60.0],
        curves: vec![curve],
        drops: 50,
        seed: SEED,
        threads: 0,
    };
    let res = run_experiment(&spec, &config, None).map_err(|e| e.to_string())?;
    let p = res.columns[1][0];
    ensure(p >= 0.95, format!("feasibility probability {p:.2} over 50 drops"))
}

/// Runs every check and reports each outcome.
pub fn run_oracles() -> Vec<OracleCheck> {
    let checks: [(&'static str, fn() -> Outcome); 24] = [
        ("eigendecomposition reconstruction", eig_reconstruction),
        ("psd projection optimality", psd_projection_optimality),
        ("generalized rayleigh quotient vs sphere sampling", generalized_rayleigh),
        ("complex gaussian moments", gaussian_moments),
        ("node distance bounds", node_distances),
        ("angle examples", angle_examples),
        ("steering phase convention", steering_phases),
        ("line-of-sight channel norms", los_norms),
        ("rician channel moments", rician_moments),
        ("link sinr and harvested power", link_metric_examples),
        ("sensing sinr with orthogonal targets", orthogonal_sensing),
        ("alternating optimisation output margins", ao_output_margins),
        ("sdp two-by-two eigen example", sdp_diagonal_example),
        ("sdp single node vs closed form and grid", sdp_single_node),
        ("real embedding eigenvalues", embedding_example),
        ("single node extraction is rank one", extraction_single_node),
        ("splitting bounds example", ps_example),
        ("splitting ratio vs grid search", ps_grid_oracle),
        ("receive combiner alignment", rx_alignment),
        ("receive combiner vs sphere sampling", rx_sphere_oracle),
        ("alternating optimisation single node chain", ao_single_node),
        ("mrt single node chain", mrt_single_node),
        ("trivial thresholds are always feasible", trivial_thresholds),
        ("unreachable threshold is never feasible", unreachable_threshold),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            OracleCheck {
                name,
                passed,
                detail: format!("{detail} ({:.2} s)", start.elapsed().as_secs_f64()),
            }
        })
        .collect()
}

fn unreachable_threshold() -> Outcome {
    let config = Config::default();
    let mut spec = ExperimentSpec::standard(ExperimentKind::FeasibilityVsGamma, &config);
    spec.x = vec![60.0];
    spec.curves.truncate(1);
    spec.drops = 20;
    let res = run_experiment(&spec, &config, None).map_err(|e| e.to_string())?;
    let p = res.columns[1][0];
    ensure(p == 0.0, format!("feasibility probability {p:.2} at gamma = 60 dB"))
}
