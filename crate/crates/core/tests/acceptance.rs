//! Acceptance suite. Prints one line per criterion and exits non-zero when
//! any criterion fails. `ACCEPTANCE_ONLY=3,7` runs a subset.

use std::time::{Duration, Instant};

use iscap_core::ao::run_ao;
use iscap_core::channel::{comm_channel, sensing_channel, ChannelSet, Fading};
use iscap_core::config::Config;
use iscap_core::experiment::{run_experiment, ExperimentKind, ExperimentResult, ExperimentSpec, Method};
use iscap_core::metrics::{comm_sinr, harvested_power, sensing_sinr, BeamformingState};
use iscap_core::numerics::{hermitian_eig, hermitian_eigenvalues, project_psd, sample_complex_gaussian, SeededRng};
use iscap_core::scenario::{place_nodes_uniform, ScenarioGeometry, SystemParams};
use iscap_core::sdp::{embed_hermitian, embed_matrix, solve_sdp, unembed_matrix, SdpProblem, SdpStatus, Sense};
use iscap_core::subproblems::{optimize_ps, optimize_rx};
use iscap_core::ComplexMatrix;

type Verdict = (bool, String);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn unit(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    sample_complex_gaussian::<f64>(rng, n, 1).normalized()
}

fn hermitian(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    sample_complex_gaussian::<f64>(rng, n, n).hermitian_part()
}

fn drop_channels(params: &SystemParams, seed: u64, d: u64, fading: Fading) -> (ScenarioGeometry, ChannelSet) {
    let geo = place_nodes_uniform(&mut SeededRng::for_parts(seed, &[d, 1]), params.n_nodes, 25.0, 10.0);
    let ch = ChannelSet::draw(params, &geo, fading, seed, &[d]).expect("valid geometry");
    (geo, ch)
}

fn sdp_oracle() -> Verdict {
    let mut rng = SeededRng::new(101, 0);
    let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
    let mut all_optimal = true;
    for i in 0..50 {
        let scale = 10f64.powf(rng.uniform(-4.0, 0.0));
        let h = sample_complex_gaussian::<f64>(&mut rng, 8, 1).scale(scale);
        let p_max = [1.0, 0.5, 2.0][i % 3];
        let mut p = SdpProblem::new(8, 1);
        p.objective[0] = h.outer();
        p.push(vec![ComplexMatrix::identity(8)], Sense::Le, p_max);
        let start = Instant::now();
        let sol = solve_sdp(&p, 1e-9, 100).expect("well-formed problem");
        slowest = slowest.max(start.elapsed());
        all_optimal &= sol.status == SdpStatus::Optimal;
        worst = worst.max(rel(sol.objective_value, p_max * h.frobenius_norm_sqr()));
    }
    (
        all_optimal && worst <= 1e-4 && slowest < Duration::from_secs(1),
        format!(
            "50 instances, worst relative error {worst:.2e}, slowest {:.1} ms",
            slowest.as_secs_f64() * 1e3
        ),
    )
}

/// Largest grid ratio meeting the SINR and energy thresholds at `node`.
fn grid_rho(ch: &ChannelSet, w: &[ComplexMatrix], params: &SystemParams, node: usize, step: f64) -> Option<f64> {
    let n = (1.0 / step).round() as usize;
    let mut state = BeamformingState {
        w: w.to_vec(),
        u: Vec::new(),
        rho: vec![0.5; w.len()],
    };
    let mut best = None;
    for i in 1..n {
        state.rho[node] = i as f64 * step;
        if comm_sinr(&ch.h, &state, params, node) >= params.gamma
            && harvested_power(&ch.h, &state, params, node) >= params.e_min
        {
            best = Some(state.rho[node]);
        }
    }
    best
}

fn ps_oracle() -> Verdict {
    let mut rng = SeededRng::new(102, 0);
    let (mut instances, mut tries, mut worst) = (0, 0u64, 0.0f64);
    let mut failures = 0;
    while instances < 100 {
        tries += 1;
        let params = SystemParams {
            n_nodes: 1 + (tries % 4) as usize,
            ..SystemParams::default()
        };
        let (_, ch) = drop_channels(&params, 102, tries, Fading::Rician);
        let share = (params.p_max / params.n_nodes as f64).sqrt();
        let w: Vec<ComplexMatrix> =
            ch.h.iter()
                .map(|h| {
                    let mut v = h.normalized();
                    v.axpy(rng.uniform(0.0, 0.5), &unit(&mut rng, params.n_tx));
                    v.normalized().scale(share)
                })
                .collect();
        let Ok(rho) = optimize_ps(&ch, &w, &params, &params.thresholds()) else {
            continue;
        };
        instances += 1;
        for (k, &r) in rho.iter().enumerate() {
            match grid_rho(&ch, &w, &params, k, 1e-4) {
                Some(g) => worst = worst.max((g - r).abs()),
                None => failures += 1,
            }
        }
    }
    (
        failures == 0 && worst <= 1e-4,
        format!("100 instances ({tries} drawn), largest distance to grid {worst:.2e}, grid misses {failures}"),
    )
}

fn rx_oracle() -> Verdict {
    let mut rng = SeededRng::new(103, 0);
    let params = SystemParams::default();
    let mut worst = f64::INFINITY;
    for i in 0..100u64 {
        let (_, ch) = drop_channels(
            &params,
            103,
            i,
            if i % 2 == 0 { Fading::Rician } else { Fading::LosOnly },
        );
        let w: Vec<ComplexMatrix> = (0..params.n_nodes)
            .map(|_| unit(&mut rng, params.n_tx).scale(0.5))
            .collect();
        let node = (i % params.n_nodes as u64) as usize;
        let mut state = BeamformingState {
            w: w.clone(),
            u: vec![ComplexMatrix::zeros(params.n_rx, 1); params.n_nodes],
            rho: vec![0.5; params.n_nodes],
        };
        state.u[node] = optimize_rx(&ch, &w, &params, node).expect("positive definite noise");
        let value = sensing_sinr(&ch.h_big, &state, &params, node);
        let mut sampled = 0.0f64;
        for _ in 0..10_000 {
            state.u[node] = unit(&mut rng, params.n_rx);
            sampled = sampled.max(sensing_sinr(&ch.h_big, &state, &params, node));
        }
        worst = worst.min((value - sampled) / sampled);
    }
    (
        worst >= -1e-6,
        format!("100 instances, smallest relative advantage over sampling {worst:.3e}"),
    )
}

fn ao_convergence() -> Verdict {
    let params = SystemParams::default();
    let start = Instant::now();
    let (mut feasible, mut drawn, mut quick, mut monotone) = (0, 0u64, 0, true);
    let mut iters = Vec::new();
    while feasible < 50 {
        let (geo, ch) = drop_channels(&params, 104, drawn, Fading::Rician);
        let mut rng = SeededRng::for_parts(104, &[drawn, 2]);
        drawn += 1;
        let trace = run_ao(&ch, &geo, &params, &mut rng);
        if !trace.feasible_at_full_thresholds {
            continue;
        }
        feasible += 1;
        let best: Vec<f64> = trace.best_sequence().into_iter().filter(|v| v.is_finite()).collect();
        monotone &= best.windows(2).all(|p| p[1] >= p[0]);
        let n = trace.n_iterations();
        iters.push(n);
        if trace.converged && n <= 15 {
            quick += 1;
        }
    }
    let elapsed = start.elapsed();
    let frac = quick as f64 / 50.0;
    let max_iters = iters.iter().max().copied().unwrap_or(0);
    (
        monotone && frac >= 0.9 && elapsed < Duration::from_secs(600),
        format!(
            "50 feasible of {drawn} drops, monotone = {monotone}, converged within 15 iterations on {:.0}% (max {max_iters}), {:.1} s",
            100.0 * frac,
            elapsed.as_secs_f64()
        ),
    )
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

fn run(kind: ExperimentKind, config: &Config, edit: impl FnOnce(&mut ExperimentSpec)) -> ExperimentResult {
    let mut spec = ExperimentSpec::standard(kind, config);
    edit(&mut spec);
    run_experiment(&spec, config, None).expect("experiment runs")
}

fn fmt_curve(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

fn tradeoff_trend() -> Verdict {
    let config = Config::default();
    let res = run(ExperimentKind::Tradeoff, &config, |_| {});
    let x = &res.columns[0];
    let mut ok = true;
    let mut parts = Vec::new();
    for (c, curve) in res.spec.curves.iter().enumerate() {
        let y = &res.columns[c + 1];
        let r = spearman(x, y);
        ok &= r <= 0.0;
        parts.push(format!("{} spearman {r:+.3} [{}]", curve.label, fmt_curve(y)));
    }
    (ok, format!("M = {}; {}", res.spec.drops, parts.join("; ")))
}

fn rises(p: &[f64]) -> Vec<f64> {
    p.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect()
}

fn feasibility_trends() -> Verdict {
    let config = Config::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [ExperimentKind::FeasibilityVsNodes, ExperimentKind::FeasibilityVsGamma] {
        let res = run(kind, &config, |_| {});
        for (c, curve) in res.spec.curves.iter().enumerate() {
            let p = &res.columns[c + 1];
            // At most one rise, of at most 0.05.
            let up = rises(p);
            let largest = up.iter().copied().fold(0.0, f64::max);
            let good = up.len() <= 1 && largest <= 0.05;
            ok &= good;
            let shown: Vec<String> = p.iter().map(|v| format!("{v:.3}")).collect();
            parts.push(format!(
                "{}/{} {} ({} rises, largest {largest:.3}) [{}]",
                kind.name(),
                curve.label,
                if good { "ok" } else { "violated" },
                up.len(),
                shown.join(" ")
            ));
        }
    }
    (ok, format!("M = {}; {}", config.drops, parts.join("; ")))
}

fn mrt_dominance() -> Verdict {
    let config = Config::default();
    let res = run(ExperimentKind::MrtCompare, &config, |s| {
        s.x = vec![1.0, 5.0, 10.0, 15.0]
    });
    let curves = &res.spec.curves;
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, ca) in curves.iter().enumerate().filter(|(_, c)| c.method == Method::Ao) {
        let m = curves
            .iter()
            .position(|c| c.method == Method::Mrt && c.channel == ca.channel)
            .expect("matching baseline curve");
        for (p, &gamma) in res.spec.x.iter().enumerate() {
            let (mut both, mut wins) = (0, 0);
            for (ao, mrt) in res.outcomes[p][a].iter().zip(&res.outcomes[p][m]) {
                if ao.feasible && mrt.feasible {
                    both += 1;
                    if ao.sum_he >= mrt.sum_he {
                        wins += 1;
                    }
                }
            }
            let frac = if both == 0 { 1.0 } else { wins as f64 / both as f64 };
            ok &= frac >= 0.9;
            parts.push(format!("{} {gamma} dB {wins}/{both}", ca.label));
        }
    }
    (ok, format!("M = {}; {}", res.spec.drops, parts.join(", ")))
}

fn channel_statistics() -> Verdict {
    let draws = 10_000;
    let mut ok = true;
    let mut parts = Vec::new();
    for (kappa, x, z) in [(5.0, 6.0, 8.0), (1.0, 20.0, 15.0), (10.0, 3.0, 30.0)] {
        let params = SystemParams {
            kappa,
            ..SystemParams::default()
        };
        let geo = ScenarioGeometry::from_positions([0.0, 0.0, z], vec![[x, 0.0, 0.0]]).unwrap();
        let d = geo.distances[0];
        let mut rng = SeededRng::new(108, kappa as u64);
        let (mut sh, mut sb) = (0.0, 0.0);
        for _ in 0..draws {
            sh += comm_channel(&params, &geo, &mut rng, 0, Fading::Rician)
                .unwrap()
                .frobenius_norm_sqr();
            sb += sensing_channel(&params, &geo, &mut rng, 0, Fading::Rician)
                .unwrap()
                .frobenius_norm_sqr();
        }
        let (wl, wn) = (kappa / (1.0 + kappa), 1.0 / (1.0 + kappa));
        let nt = params.n_tx as f64;
        let nr = params.n_rx as f64;
        let eh = nt * params.l0 * (wl * d.powf(-params.alpha) + wn * d.powf(-params.alpha_nlos));
        let eb = nt
            * nr
            * params.l0
            * params.rcs
            * (wl * (2.0 * d).powf(-params.alpha) + wn * (2.0 * d).powf(-params.alpha_nlos));
        let (eh_err, eb_err) = (rel(sh / draws as f64, eh), rel(sb / draws as f64, eb));
        ok &= eh_err <= 0.03 && eb_err <= 0.03;
        parts.push(format!(
            "kappa {kappa} d {d:.1} m: |h|^2 {:.2}%, |H|_F^2 {:.2}%",
            100.0 * eh_err,
            100.0 * eb_err
        ));
    }
    (ok, format!("{draws} draws; {}", parts.join("; ")))
}

fn determinism() -> Verdict {
    let mut config = Config::default();
    config.seed = 109;
    config.drops = 2;
    let mut ok = true;
    let mut checked = Vec::new();
    for kind in ExperimentKind::ALL {
        let mut tables = Vec::new();
        for threads in [1, 1, 8, 8] {
            let dir = tempfile::tempdir().unwrap();
            let mut spec = ExperimentSpec::standard(kind, &config);
            spec.threads = threads;
            let res = run_experiment(&spec, &config, None).expect("experiment runs");
            res.write(&config, dir.path()).expect("table written");
            tables.push(std::fs::read(dir.path().join(kind.table_name())).unwrap());
        }
        let same = tables.windows(2).all(|w| w[0] == w[1]);
        ok &= same;
        checked.push(format!(
            "{} {}",
            kind.name(),
            if same { "identical" } else { "DIFFERENT" }
        ));
    }
    (ok, format!("runs at 1, 1, 8, 8 threads: {}", checked.join(", ")))
}

fn kernel_suite() -> Verdict {
    let mut rng = SeededRng::new(110, 0);
    let (mut recon, mut ortho, mut resid) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let a = hermitian(&mut rng, 8);
        let e = hermitian_eig(&a).unwrap();
        recon = recon.max((&e.reconstruct() - &a).frobenius_norm());
        let v = &e.eigenvectors;
        ortho = ortho.max((&(&v.adjoint() * v) - &ComplexMatrix::identity(8)).frobenius_norm());
        for (j, &l) in e.eigenvalues.iter().enumerate() {
            let c = v.col(j);
            resid = resid.max((&(&a * &c) - &c.scale(l)).norm());
        }
    }
    let eig_ok = recon <= 1e-8 && ortho <= 1e-10 && resid <= 1e-10;

    // Projection: nearest among PSD points around P(A), and min eigenvalue.
    let (mut proj_ok, mut min_eig) = (true, f64::INFINITY);
    for _ in 0..10 {
        let a = hermitian(&mut rng, 8);
        let p = project_psd(&a).unwrap();
        min_eig = min_eig.min(hermitian_eigenvalues(&p).unwrap()[0]);
        let dist = (&a - &p).frobenius_norm();
        for i in 0..1000 {
            let eps = 10f64.powi(-(i % 4));
            let x = project_psd(&(&p + &hermitian(&mut rng, 8).scale(eps))).unwrap();
            proj_ok &= dist <= (&a - &x).frobenius_norm() * (1.0 + 1e-12);
        }
    }
    proj_ok &= min_eig >= -1e-10;

    // Embedding round trip, spectrum doubling, inner products and solver agreement.
    let (mut trip, mut spec_err, mut inner_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let x = hermitian(&mut rng, 6);
        let y = hermitian(&mut rng, 6);
        trip = trip.max((&unembed_matrix(&embed_matrix(&x)) - &x).max_abs());
        let ex = hermitian_eigenvalues(&x).unwrap();
        let et = hermitian_eigenvalues(&embed_matrix(&x)).unwrap();
        for (i, l) in ex.iter().enumerate() {
            spec_err = spec_err.max((et[2 * i] - l).abs()).max((et[2 * i + 1] - l).abs());
        }
        let lhs = embed_matrix(&x).inner(&embed_matrix(&y));
        inner_err = inner_err.max((lhs - 2.0 * x.trace_product_re(&y)).abs() / (1.0 + lhs.abs()));
    }
    let mut p = SdpProblem::new(4, 2);
    p.objective = vec![hermitian(&mut rng, 4), hermitian(&mut rng, 4)];
    let g = sample_complex_gaussian::<f64>(&mut rng, 4, 1);
    p.push(vec![g.outer(), g.outer().scale(-0.5)], Sense::Ge, 0.1);
    p.push(vec![ComplexMatrix::identity(4); 2], Sense::Le, 1.0);
    let direct = solve_sdp(&p, 1e-9, 100).unwrap();
    let embedded = solve_sdp(&embed_hermitian(&p), 1e-9, 100).unwrap();
    let route = rel(embedded.objective_value, direct.objective_value);
    let embed_ok = trip == 0.0 && spec_err <= 1e-10 && inner_err <= 1e-12 && route <= 1e-6;

    (
        eig_ok && proj_ok && embed_ok,
        format!(
            "eig: reconstruction {recon:.1e}, orthonormality {ortho:.1e}, residual {resid:.1e}; \
             projection optimal = {proj_ok}, min eigenvalue {min_eig:.1e}; \
             embedding: round trip {trip:.1e}, spectrum {spec_err:.1e}, inner product {inner_err:.1e}, \
             complex vs real solve {route:.1e}"
        ),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Verdict); 10] = [
        (1, "sdp single-node optimum", sdp_oracle),
        (2, "splitting ratio vs grid", ps_oracle),
        (3, "receive combiner vs sphere sampling", rx_oracle),
        (4, "ao monotonicity and convergence", ao_convergence),
        (5, "sensing/harvesting trade-off trend", tradeoff_trend),
        (6, "feasibility trends", feasibility_trends),
        (7, "dominance over mrt", mrt_dominance),
        (8, "channel statistics", channel_statistics),
        (9, "determinism across threads", determinism),
        (10, "kernel invariants", kernel_suite),
    ];
    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let (ok, detail) = f();
        println!(
            "criterion {id:>2} {} {name}: {detail} [{:.1} s]",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !ok {
            failed.push(id);
        }
    }
    if ran == 0 {
        println!("acceptance: no criteria selected");
    } else if failed.is_empty() {
        println!("acceptance: all {ran} criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
