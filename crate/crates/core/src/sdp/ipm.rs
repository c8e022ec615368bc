//! Infeasible-start primal-dual path following with the HKM search direction
//! and Mehrotra predictor-corrector steps.
//!
//! Internally the problem is put in standard form
//! `min <C, X>  s.t.  A(X) = b,  X >= 0`, where `X` holds the Hermitian blocks
//! plus one nonnegative slack per inequality. Rows and the objective are
//! scaled to unit norm before iterating.

use super::{SdpError, SdpProblem, SdpSolution, SdpStatus, Sense};
use crate::numerics::{cholesky_with_floor, congruence_inverse, forward_solve, min_eigenvalue, CMatrix, Real};

struct Row<T> {
    blocks: Vec<Option<CMatrix<T>>>,
    /// `(s, g)` with block `= s g g^H` where a block is rank one.
    outer: Vec<Option<(T, CMatrix<T>)>>,
    /// Slack coefficient, `-1` for `>=` rows and `+1` for `<=` rows.
    slack: T,
    b: T,
}

struct Standard<T> {
    n: usize,
    k: usize,
    rows: Vec<Row<T>>,
    c: Vec<CMatrix<T>>,
    c_norm: T,
    b_norm: T,
    /// Cholesky factor of the Gram matrix `A A*`, used to restore exact
    /// linear feasibility of search directions.
    gram: Vec<T>,
}

#[derive(Clone)]
struct Point<T> {
    x: Vec<CMatrix<T>>,
    xs: Vec<T>,
    z: Vec<CMatrix<T>>,
    zs: Vec<T>,
    y: Vec<T>,
}

struct Direction<T> {
    dx: Vec<CMatrix<T>>,
    dxs: Vec<T>,
    dz: Vec<CMatrix<T>>,
    dzs: Vec<T>,
    dy: Vec<T>,
}

enum Prepared<T> {
    Ready(Standard<T>),
    /// A constraint with all-zero coefficients that cannot hold.
    TriviallyInfeasible,
}

fn prepare<T: Real>(p: &SdpProblem<T>) -> Prepared<T> {
    let n = p.block_dim;
    let mut rows = Vec::with_capacity(p.constraints.len());
    for con in &p.constraints {
        let norm = con.coeffs.iter().map(|a| a.frobenius_norm_sqr()).sum::<T>().sqrt();
        let slack = match con.sense {
            Sense::Ge => -T::one(),
            Sense::Le => T::one(),
        };
        if norm == T::zero() {
            // 0 >= rhs or 0 <= rhs.
            if slack * con.rhs < T::zero() {
                return Prepared::TriviallyInfeasible;
            }
            continue;
        }
        let blocks = con
            .coeffs
            .iter()
            .map(|a| (a.max_abs() > T::zero()).then(|| a.hermitian_part().scale(T::one() / norm)))
            .collect::<Vec<_>>();
        let outer = blocks.iter().map(|a| a.as_ref().and_then(rank_one)).collect();
        rows.push(Row {
            blocks,
            outer,
            slack,
            b: con.rhs / norm,
        });
    }
    let c_raw = p.objective.iter().map(|c| c.frobenius_norm_sqr()).sum::<T>().sqrt();
    let c_scale = if c_raw > T::zero() { c_raw } else { T::one() };
    // Maximisation becomes minimisation of the negated objective.
    let c: Vec<CMatrix<T>> = p
        .objective
        .iter()
        .map(|c| c.hermitian_part().scale(-T::one() / c_scale))
        .collect();
    let c_norm = c.iter().map(|m| m.frobenius_norm_sqr()).sum::<T>().sqrt();
    let b_norm = rows.iter().map(|r| r.b * r.b).sum::<T>().sqrt();
    let mut std = Standard {
        n,
        k: p.n_blocks,
        rows,
        c,
        c_norm,
        b_norm,
        gram: Vec::new(),
    };
    std.gram = std.gram_factor();
    Prepared::Ready(std)
}

/// Detects `a = s g g^H` with `s = +-1`.
fn rank_one<T: Real>(a: &CMatrix<T>) -> Option<(T, CMatrix<T>)> {
    let n = a.rows();
    let j = (0..n).max_by(|&p, &q| {
        a[(p, p)]
            .re
            .abs()
            .partial_cmp(&a[(q, q)].re.abs())
            .expect("finite diagonal")
    })?;
    let d = a[(j, j)].re;
    if d == T::zero() {
        return None;
    }
    let s = d.signum();
    let g = a.col(j).scale(T::one() / d.abs().sqrt());
    let mut resid = a.clone();
    resid.axpy(-s, &g.outer());
    (resid.frobenius_norm() <= T::lit(1e-13) * a.frobenius_norm()).then_some((s, g))
}

/// `L_z^{-1} A L_x` for one row block, kept factored when `A` is rank one.
enum Congruent<T> {
    Outer(T, CMatrix<T>, CMatrix<T>),
    Dense(CMatrix<T>),
}

impl<T: Real> Congruent<T> {
    /// `Re tr(B_self B_other^H)`.
    fn inner(&self, other: &Self) -> T {
        match (self, other) {
            (Self::Outer(s, a, c), Self::Outer(t, p, q)) => *s * *t * (p.dot(a) * c.dot(q)).re,
            (Self::Outer(s, a, c), Self::Dense(m)) | (Self::Dense(m), Self::Outer(s, a, c)) => *s * a.dot(&(m * c)).re,
            (Self::Dense(m), Self::Dense(p)) => m.inner(p),
        }
    }
}

impl<T: Real> Standard<T> {
    fn m(&self) -> usize {
        self.rows.len()
    }

    /// Total cone dimension (sum of block sides plus slacks).
    fn cone_dim(&self) -> T {
        T::from_usize(self.k * self.n + self.m()).expect("small dimension")
    }

    fn apply(&self, x: &[CMatrix<T>], xs: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut v = r.slack * xs[i];
                for (a, xb) in r.blocks.iter().zip(x) {
                    if let Some(a) = a {
                        v += a.inner(xb);
                    }
                }
                v
            })
            .collect()
    }

    fn adjoint(&self, y: &[T]) -> (Vec<CMatrix<T>>, Vec<T>) {
        let mut blocks = vec![CMatrix::zeros(self.n, self.n); self.k];
        for (r, &yi) in self.rows.iter().zip(y) {
            for (a, out) in r.blocks.iter().zip(blocks.iter_mut()) {
                if let Some(a) = a {
                    out.axpy(yi, a);
                }
            }
        }
        let slack = self.rows.iter().zip(y).map(|(r, &yi)| r.slack * yi).collect();
        (blocks, slack)
    }

    fn gram_factor(&self) -> Vec<T> {
        let m = self.m();
        let mut g = vec![T::zero(); m * m];
        for i in 0..m {
            for j in 0..=i {
                let mut v = if i == j { T::one() } else { T::zero() };
                for (a, b) in self.rows[i].blocks.iter().zip(&self.rows[j].blocks) {
                    if let (Some(a), Some(b)) = (a, b) {
                        v += a.inner(b);
                    }
                }
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        // The slack identity makes the Gram matrix positive definite.
        let ok = real_cholesky(&mut g, m);
        debug_assert!(ok);
        g
    }

    /// Adds the least-norm correction making `A(dX) = rp` hold to rounding.
    fn restore_feasibility(&self, rp: &[T], dx: &mut [CMatrix<T>], dxs: &mut [T]) {
        let m = self.m();
        let ad = self.apply(dx, dxs);
        let r: Vec<T> = rp.iter().zip(&ad).map(|(a, b)| *a - *b).collect();
        let v = real_cholesky_solve(&self.gram, m, &r);
        let (blocks, slack) = self.adjoint(&v);
        for (d, b) in dx.iter_mut().zip(&blocks) {
            *d += b;
        }
        for (d, s) in dxs.iter_mut().zip(&slack) {
            *d += *s;
        }
    }

    fn initial_point(&self) -> Point<T> {
        let ten = T::lit(10.0);
        let nf = T::from_usize(self.n).expect("small dimension");
        let b_max = self.rows.iter().map(|r| r.b.abs()).fold(T::zero(), T::max);
        let xi = ten.max(nf.sqrt()).max(nf * (T::one() + b_max) / T::lit(2.0));
        let eta = ten.max(nf.sqrt());
        Point {
            x: vec![CMatrix::identity(self.n).scale(xi); self.k],
            xs: vec![xi; self.m()],
            z: vec![CMatrix::identity(self.n).scale(eta); self.k],
            zs: vec![eta; self.m()],
            y: vec![T::zero(); self.m()],
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// In-place real Cholesky of a dense symmetric `m x m` matrix (lower part).
fn real_cholesky<T: Real>(a: &mut [T], m: usize) -> bool {
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return false;
        }
        let djj = d.sqrt();
        a[j * m + j] = djj;
        for i in (j + 1)..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / djj;
        }
    }
    true
}

fn real_cholesky_solve<T: Real>(l: &[T], m: usize, rhs: &[T]) -> Vec<T> {
    let mut x = rhs.to_vec();
    for i in 0..m {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * m + k] * x[k];
        }
        x[i] = s / l[i * m + i];
    }
    for i in (0..m).rev() {
        let mut s = x[i];
        for k in (i + 1)..m {
            s -= l[k * m + i] * x[k];
        }
        x[i] = s / l[i * m + i];
    }
    x
}

/// Largest `alpha` keeping `X + alpha dX` positive semidefinite, given the
/// Cholesky factor of `X`. Infinite when `dX` is PSD.
fn max_step_psd<T: Real>(lx: &CMatrix<T>, dx: &CMatrix<T>) -> T {
    let y = congruence_inverse(lx, dx);
    match min_eigenvalue(&y) {
        Ok(l) if l < T::zero() => -T::one() / l,
        Ok(_) => T::infinity(),
        Err(_) => T::zero(),
    }
}

fn max_step_lp<T: Real>(x: &[T], dx: &[T]) -> T {
    x.iter()
        .zip(dx)
        .filter(|(_, d)| **d < T::zero())
        .map(|(v, d)| -*v / *d)
        .fold(T::infinity(), T::min)
}

struct Factors<T> {
    lx: Vec<CMatrix<T>>,
    lz: Vec<CMatrix<T>>,
    zinv: Vec<CMatrix<T>>,
    schur: Vec<T>,
}

impl<T: Real> Standard<T> {
    fn factor(&self, pt: &Point<T>) -> Option<Factors<T>> {
        let floor = T::zero();
        let mut lx = Vec::with_capacity(self.k);
        let mut lz = Vec::with_capacity(self.k);
        let mut zinv = Vec::with_capacity(self.k);
        let m = self.m();
        let mut schur = vec![T::zero(); m * m];
        for b in 0..self.k {
            let l = cholesky_with_floor(&pt.x[b], floor).ok()?;
            let lxh = l.adjoint();
            lx.push(l);
            let l = cholesky_with_floor(&pt.z[b], floor).ok()?;
            let lzinv = forward_solve(&l, &CMatrix::identity(self.n));
            zinv.push((&lzinv.adjoint() * &lzinv).hermitian_part());
            lz.push(l);
            // M_ij = Re tr(A_j X A_i Z^{-1}) = Re <B_j, B_i> with B = L_z^{-1} A L_x.
            let congruent: Vec<Option<Congruent<T>>> = self
                .rows
                .iter()
                .map(|r| match (&r.outer[b], &r.blocks[b]) {
                    (Some((s, g)), _) => Some(Congruent::Outer(*s, &lzinv * g, &lxh * g)),
                    (None, Some(a)) => Some(Congruent::Dense(&(&lzinv * a) * &lx[b])),
                    (None, None) => None,
                })
                .collect();
            for i in 0..m {
                let Some(bi) = &congruent[i] else { continue };
                for j in 0..=i {
                    if let Some(bj) = &congruent[j] {
                        schur[i * m + j] += bi.inner(bj);
                    }
                }
            }
        }
        for i in 0..m {
            schur[i * m + i] += pt.xs[i] / pt.zs[i];
            for j in 0..i {
                schur[j * m + i] = schur[i * m + j];
            }
        }
        let max_diag = (0..m).map(|i| schur[i * m + i]).fold(T::zero(), T::max);
        let mut reg = T::zero();
        for _ in 0..8 {
            let mut f = schur.clone();
            for i in 0..m {
                f[i * m + i] += reg;
            }
            if real_cholesky(&mut f, m) {
                return Some(Factors { lx, lz, zinv, schur: f });
            }
            reg = if reg == T::zero() {
                max_diag * T::lit(1e-14)
            } else {
                reg * T::lit(100.0)
            };
        }
        None
    }

    /// Solves the linearised system for target `sigma_mu` with an optional
    /// second-order correction `(dX_aff dZ_aff, dxs_aff dzs_aff)`.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        pt: &Point<T>,
        f: &Factors<T>,
        rp: &[T],
        rd: &[CMatrix<T>],
        rds: &[T],
        sigma_mu: T,
        corr: Option<(&[CMatrix<T>], &[T])>,
    ) -> Direction<T> {
        let m = self.m();
        // H = sigma_mu Z^{-1} - X - (X Rd + Corr) Z^{-1}
        let mut h = Vec::with_capacity(self.k);
        for b in 0..self.k {
            let mut t = &pt.x[b] * &rd[b];
            if let Some((c, _)) = corr {
                t += &c[b];
            }
            let mut hb = f.zinv[b].scale(sigma_mu);
            hb -= &pt.x[b];
            hb -= &(&t * &f.zinv[b]);
            h.push(hb);
        }
        let hs: Vec<T> = (0..m)
            .map(|i| {
                let c = corr.map_or(T::zero(), |(_, cs)| cs[i]);
                sigma_mu / pt.zs[i] - pt.xs[i] - (pt.xs[i] * rds[i] + c) / pt.zs[i]
            })
            .collect();
        let ah = self.apply(&h, &hs);
        let rhs: Vec<T> = rp.iter().zip(&ah).map(|(a, b)| *a - *b).collect();
        let dy = real_cholesky_solve(&f.schur, m, &rhs);
        let (aty, atys) = self.adjoint(&dy);
        let dz: Vec<CMatrix<T>> = rd.iter().zip(&aty).map(|(r, a)| r - a).collect();
        let dzs: Vec<T> = rds.iter().zip(&atys).map(|(r, a)| *r - *a).collect();
        let mut dx: Vec<CMatrix<T>> = (0..self.k)
            .map(|b| {
                let mut t = &pt.x[b] * &dz[b];
                if let Some((c, _)) = corr {
                    t += &c[b];
                }
                let mut d = f.zinv[b].scale(sigma_mu);
                d -= &pt.x[b];
                d -= &(&t * &f.zinv[b]);
                d.hermitian_part()
            })
            .collect();
        let mut dxs: Vec<T> = (0..m)
            .map(|i| {
                let c = corr.map_or(T::zero(), |(_, cs)| cs[i]);
                sigma_mu / pt.zs[i] - pt.xs[i] - (pt.xs[i] * dzs[i] + c) / pt.zs[i]
            })
            .collect();
        self.restore_feasibility(rp, &mut dx, &mut dxs);
        Direction { dx, dxs, dz, dzs, dy }
    }

    fn step_lengths(&self, pt: &Point<T>, f: &Factors<T>, d: &Direction<T>) -> (T, T) {
        let mut ap = max_step_lp(&pt.xs, &d.dxs);
        let mut ad = max_step_lp(&pt.zs, &d.dzs);
        for b in 0..self.k {
            ap = ap.min(max_step_psd(&f.lx[b], &d.dx[b]));
            ad = ad.min(max_step_psd(&f.lz[b], &d.dz[b]));
        }
        (ap, ad)
    }
}

fn complementarity<T: Real>(x: &[CMatrix<T>], xs: &[T], z: &[CMatrix<T>], zs: &[T]) -> T {
    x.iter().zip(z).map(|(a, b)| a.inner(b)).sum::<T>() + dot(xs, zs)
}

fn advance<T: Real>(pt: &mut Point<T>, d: &Direction<T>, ap: T, ad: T) {
    for (x, dx) in pt.x.iter_mut().zip(&d.dx) {
        x.axpy(ap, dx);
    }
    for (x, dx) in pt.xs.iter_mut().zip(&d.dxs) {
        *x += ap * *dx;
    }
    for (z, dz) in pt.z.iter_mut().zip(&d.dz) {
        z.axpy(ad, dz);
        *z = z.hermitian_part();
    }
    for (z, dz) in pt.zs.iter_mut().zip(&d.dzs) {
        *z += ad * *dz;
    }
    for (y, dy) in pt.y.iter_mut().zip(&d.dy) {
        *y += ad * *dy;
    }
}

/// Consecutive near-optimal iterations accepted in place of full convergence.
const NEAR_ITERS: usize = 8;

/// Solves `problem` to relative accuracy `tol` on the scaled primal and dual
/// residuals and duality gap, within `max_iters` interior-point iterations.
pub fn solve_sdp<T: Real>(problem: &SdpProblem<T>, tol: T, max_iters: usize) -> Result<SdpSolution<T>, SdpError> {
    problem.validate()?;
    if !(tol > T::zero()) {
        return Err(SdpError::Malformed("tolerance must be positive".into()));
    }
    let zero_blocks = || vec![problem.zero_block(); problem.n_blocks];
    let std = match prepare(problem) {
        Prepared::Ready(s) => s,
        Prepared::TriviallyInfeasible => {
            return Ok(finish(problem, zero_blocks(), SdpStatus::Infeasible, 0));
        }
    };
    let ncone = std.cone_dim();
    let b: Vec<T> = std.rows.iter().map(|r| r.b).collect();
    let mut pt = std.initial_point();
    // Primal residual target is tighter than the gap target so that small
    // right-hand sides are met to high relative accuracy.
    let tol_p = (tol * T::lit(1e-3)).max(T::epsilon() * T::lit(100.0));
    let tol_inf = tol.max(T::epsilon() * T::lit(1e3));
    let mut status = SdpStatus::MaxIters;
    let mut iterations = 0;
    let mut stalls = 0;
    let mut near = 0;

    for iter in 0..max_iters {
        iterations = iter;
        let ax = std.apply(&pt.x, &pt.xs);
        let rp: Vec<T> = b.iter().zip(&ax).map(|(a, c)| *a - *c).collect();
        let (aty, atys) = std.adjoint(&pt.y);
        let rd: Vec<CMatrix<T>> = (0..std.k).map(|k| &(&std.c[k] - &pt.z[k]) - &aty[k]).collect();
        let rds: Vec<T> = (0..std.m()).map(|i| -pt.zs[i] - atys[i]).collect();

        let mu = complementarity(&pt.x, &pt.xs, &pt.z, &pt.zs) / ncone;
        let pobj: T = std.c.iter().zip(&pt.x).map(|(c, x)| c.inner(x)).sum();
        let dobj = dot(&b, &pt.y);
        let rd_norm = (rd.iter().map(|m| m.frobenius_norm_sqr()).sum::<T>() + dot(&rds, &rds)).sqrt();
        let pinf = norm(&rp) / (T::one() + std.b_norm);
        let dinf = rd_norm / (T::one() + std.c_norm);
        let gap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
        if pinf <= tol_p && dinf <= tol && gap <= tol {
            status = SdpStatus::Optimal;
            break;
        }
        // Near the optimum rounding can stall the gap just above `tol`;
        // accept a feasible pair whose gap stays below sqrt(tol).
        status = SdpStatus::MaxIters;
        if pinf <= tol_p && dinf <= tol && gap <= tol.sqrt() {
            near += 1;
            if near >= NEAR_ITERS {
                status = SdpStatus::Optimal;
                break;
            }
        } else {
            near = 0;
        }
        // A break below (factorisation or step failure) keeps this verdict.
        if near > 0 {
            status = SdpStatus::Optimal;
        }
        // Dual ray: A*(y) + Z = C - Rd stays bounded while b^T y grows.
        if dobj > T::zero() {
            let ray = (rd
                .iter()
                .zip(&std.c)
                .map(|(r, c)| (c - r).frobenius_norm_sqr())
                .sum::<T>()
                + dot(&rds, &rds))
            .sqrt();
            if ray / dobj < tol_inf && pinf > tol_p {
                status = SdpStatus::Infeasible;
                break;
            }
        }

        let Some(f) = std.factor(&pt) else { break };
        let pred = std.direction(&pt, &f, &rp, &rd, &rds, T::zero(), None);
        let (ap, ad) = std.step_lengths(&pt, &f, &pred);
        let (ap1, ad1) = (ap.min(T::one()), ad.min(T::one()));
        let x_aff: Vec<CMatrix<T>> =
            pt.x.iter()
                .zip(&pred.dx)
                .map(|(x, d)| {
                    let mut v = x.clone();
                    v.axpy(ap1, d);
                    v
                })
                .collect();
        let z_aff: Vec<CMatrix<T>> =
            pt.z.iter()
                .zip(&pred.dz)
                .map(|(z, d)| {
                    let mut v = z.clone();
                    v.axpy(ad1, d);
                    v
                })
                .collect();
        let xs_aff: Vec<T> = pt.xs.iter().zip(&pred.dxs).map(|(x, d)| *x + ap1 * *d).collect();
        let zs_aff: Vec<T> = pt.zs.iter().zip(&pred.dzs).map(|(z, d)| *z + ad1 * *d).collect();
        let mu_aff = complementarity(&x_aff, &xs_aff, &z_aff, &zs_aff) / ncone;
        let ratio = (mu_aff / mu).max(T::zero()).min(T::one());
        let sigma = ratio * ratio * ratio;

        let corr: Vec<CMatrix<T>> = pred.dx.iter().zip(&pred.dz).map(|(a, b)| a * b).collect();
        let corrs: Vec<T> = pred.dxs.iter().zip(&pred.dzs).map(|(a, b)| *a * *b).collect();
        let dir = std.direction(&pt, &f, &rp, &rd, &rds, sigma * mu, Some((&corr, &corrs)));
        let (ap, ad) = std.step_lengths(&pt, &f, &dir);
        let gamma = T::lit(0.9) + T::lit(0.09) * ap1.min(ad1);
        let ap = (gamma * ap).min(T::one());
        let ad = (gamma * ad).min(T::one());
        if !(ap > T::zero() && ad > T::zero()) {
            break;
        }
        if ap.max(ad) < T::lit(1e-8) {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        let mut next = pt.clone();
        advance(&mut next, &dir, ap, ad);
        if next.x.iter().chain(&next.z).any(|m| !m.is_finite()) || next.y.iter().any(|v| !v.is_finite()) {
            break;
        }
        pt = next;
        iterations = iter + 1;
    }

    let blocks = pt.x.iter().map(|x| x.hermitian_part()).collect();
    Ok(finish(problem, blocks, status, iterations))
}

fn finish<T: Real>(
    problem: &SdpProblem<T>,
    blocks: Vec<CMatrix<T>>,
    status: SdpStatus,
    iterations: usize,
) -> SdpSolution<T> {
    SdpSolution {
        objective_value: problem.objective_at(&blocks),
        primal_residual: problem.max_violation(&blocks),
        blocks,
        status,
        iterations,
    }
}
