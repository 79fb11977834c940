//! Block updates of one ADMM sweep. Each function reads the state and
//! returns the new value of a single block; the caller decides the order.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::config::{SolverConfig, USolve, YDiagonal, CG_TOL};
use super::state::DotState;
use crate::error::{Error, Result};
use crate::framelet::{Coefficients, FrameletSystem};
use crate::graph::{Graph, Signal, DENSE_SOLVE_LIMIT};
use crate::linalg;
use crate::prox;

/// diag(w) + μ₁ L₀ᵀL₀ with L₀ = I − Y, the U-subproblem operator.
#[derive(Debug, Clone)]
pub struct USystem {
    diag: Vec<f64>,
    mu1: f64,
    y: Array2<f64>,
}

impl USystem {
    pub fn new(diag: Vec<f64>, mu1: f64, y: Array2<f64>) -> Self {
        USystem { diag, mu1, y }
    }

    fn l0(&self, v: &ArrayView2<f64>) -> Array2<f64> {
        &v.to_owned() - &self.y.dot(v)
    }

    fn l0t(&self, v: &ArrayView2<f64>) -> Array2<f64> {
        &v.to_owned() - &self.y.t().dot(v)
    }

    fn diag_apply(&self, v: &ArrayView2<f64>) -> Array2<f64> {
        let mut out = v.to_owned();
        for (mut row, &w) in out.rows_mut().into_iter().zip(&self.diag) {
            row.mapv_inplace(|x| x * w);
        }
        out
    }

    pub fn apply(&self, v: &ArrayView2<f64>) -> Array2<f64> {
        let coupling = self.l0t(&self.l0(v).view());
        self.diag_apply(v) + coupling * self.mu1
    }

    pub fn dense(&self) -> Array2<f64> {
        let n = self.diag.len();
        let l0 = Array2::<f64>::eye(n) - &self.y;
        let mut a = l0.t().dot(&l0) * self.mu1;
        for i in 0..n {
            a[[i, i]] += self.diag[i];
        }
        a
    }

    pub fn solve(&self, rhs: &ArrayView2<f64>, mode: USolve) -> Result<Signal> {
        let n = self.diag.len();
        match mode {
            USolve::Auto if n <= DENSE_SOLVE_LIMIT => self.solve(rhs, USolve::Cholesky),
            USolve::Auto | USolve::ConjugateGradient => {
                linalg::conjugate_gradient(|v| self.apply(v), rhs, CG_TOL, 10 * n.max(1)).map(|(x, _)| x)
            }
            USolve::Cholesky => linalg::cholesky_solve(&self.dense().view(), rhs),
            USolve::TaylorApprox => {
                // (P + μ₁K)⁻¹ ≈ P⁻¹ − μ₁P⁻¹KP⁻¹ with P the diagonal part
                if let Some(i) = self.diag.iter().position(|&w| w <= 0.0) {
                    return Err(Error::SolveFailed(format!(
                        "first-order expansion needs a positive diagonal; row {i} is {}",
                        self.diag[i]
                    )));
                }
                let inv: Vec<f64> = self.diag.iter().map(|w| 1.0 / w).collect();
                let scale = |m: &mut Array2<f64>| {
                    for (mut row, &s) in m.rows_mut().into_iter().zip(&inv) {
                        row.mapv_inplace(|x| x * s);
                    }
                };
                let mut base = rhs.to_owned();
                scale(&mut base);
                let mut corr = self.l0t(&self.l0(&base.view()).view());
                scale(&mut corr);
                Ok(base - corr * self.mu1)
            }
        }
    }
}

/// Operator and right-hand side of the U-subproblem. With a framelet
/// system the operator carries the μ₂ shift and the rhs the synthesis of
/// μ₂Q + Λ₂; without one both are dropped.
pub fn u_system(
    state: &DotState,
    g: &Graph,
    sys: Option<&FrameletSystem>,
    x: &ArrayView2<f64>,
    cfg: &SolverConfig,
) -> Result<(USystem, Array2<f64>)> {
    let [mu1, mu2, _, _] = state.mu;
    let shift = if sys.is_some() { mu2 } else { 0.0 };
    let degrees = g.degrees();
    let diag = degrees.iter().map(|d| cfg.lambda2 * d + shift).collect();

    let mut rhs = state.l0t_apply(&(&state.e * mu1 - &state.lam1).view());
    for ((mut row, xr), &d) in rhs.rows_mut().into_iter().zip(x.rows()).zip(degrees) {
        row.scaled_add(cfg.lambda2 * d, &xr);
    }
    if let Some(sys) = sys {
        let mut target = state.q.scaled(mu2);
        for (k, block) in target.iter_mut() {
            *block += state.lam2.get(*k).expect("multiplier keyed like Q");
        }
        rhs += &sys.reconstruct(&target)?;
    }
    Ok((USystem::new(diag, mu1, state.y.clone()), rhs))
}

pub fn update_u(state: &DotState, g: &Graph, sys: &FrameletSystem, x: &ArrayView2<f64>, cfg: &SolverConfig) -> Result<Signal> {
    let (system, rhs) = u_system(state, g, Some(sys), x, cfg)?;
    system.solve(&rhs.view(), cfg.u_solve)
}

/// Z = R − diag(R), R = T_{1/μ₄}(Y + Λ₄/μ₄).
pub fn update_z(state: &DotState) -> Array2<f64> {
    let mu4 = state.mu[3];
    let eta = 1.0 / mu4;
    let mut z = ndarray::Zip::from(&state.y)
        .and(&state.lam4)
        .map_collect(|&y, &l| prox::shrink(y + l / mu4, eta));
    z.diag_mut().fill(0.0);
    z
}

/// Row-group threshold of (I − Y)U + Λ₁/μ₁.
pub fn update_e(state: &DotState, g: &Graph, cfg: &SolverConfig) -> Result<Array2<f64>> {
    let mu1 = state.mu[0];
    let mut v = state.l0_apply(&state.u.view());
    v.scaled_add(1.0 / mu1, &state.lam1);
    prox::soft_threshold_rows(&v.view(), &cfg.e_thresholds(g.degrees(), mu1))
}

/// [√μ₁U, √μ₃𝟙].
fn stacked_factor(u: &ArrayView2<f64>, mu1: f64, mu3: f64) -> Array2<f64> {
    let (n, d) = u.dim();
    let mut out = Array2::from_elem((n, d + 1), mu3.sqrt());
    out.slice_mut(ndarray::s![.., ..d]).assign(&(u * mu1.sqrt()));
    out
}

/// (μ₁UUᵀ + μ₃𝟙𝟙ᵀ + μ₄I)⁻¹ through the (d+1)×(d+1) Woodbury solve.
pub fn woodbury_inverse(u: &ArrayView2<f64>, mu1: f64, mu3: f64, mu4: f64) -> Result<Array2<f64>> {
    let n = u.nrows();
    let ut = stacked_factor(u, mu1, mu3);
    let inner_sol = inner_solve(&ut, mu4)?;
    let mut m = -ut.dot(&inner_sol);
    for i in 0..n {
        m[[i, i]] += 1.0;
    }
    Ok(m / mu4)
}

/// (μ₄I + ŨᵀŨ)⁻¹Ũᵀ.
fn inner_solve(ut: &Array2<f64>, mu4: f64) -> Result<Array2<f64>> {
    let mut s = ut.t().dot(ut);
    for i in 0..s.nrows() {
        s[[i, i]] += mu4;
    }
    linalg::cholesky_solve(&s.view(), &ut.t())
}

/// B = μ₁(U − E)Uᵀ + μ₃𝟙𝟙ᵀ + μ₄Z + Λ₁Uᵀ − Λ₃𝟙ᵀ − Λ₄.
pub fn y_rhs(state: &DotState) -> Array2<f64> {
    let [mu1, _, mu3, mu4] = state.mu;
    let left = (&state.u - &state.e) * mu1 + &state.lam1;
    let mut b = left.dot(&state.u.t());
    b.scaled_add(mu4, &state.z);
    b -= &state.lam4;
    for (mut row, &l3) in b.rows_mut().into_iter().zip(state.lam3.iter()) {
        row.mapv_inplace(|v| v + mu3 - l3);
    }
    b
}

/// Y = B·(μ₁UUᵀ + μ₃𝟙𝟙ᵀ + μ₄I)⁻¹, optionally restricted to a zero diagonal.
pub fn update_y(state: &DotState, cfg: &SolverConfig) -> Result<Array2<f64>> {
    let [mu1, _, mu3, mu4] = state.mu;
    let b = y_rhs(state);
    let ut = stacked_factor(&state.u.view(), mu1, mu3);
    let inner_sol = inner_solve(&ut, mu4)?;
    let mut y = (&b - &b.dot(&ut).dot(&inner_sol)) / mu4;
    if cfg.y_diagonal == YDiagonal::Zero {
        let mut minv = -ut.dot(&inner_sol);
        for i in 0..minv.nrows() {
            minv[[i, i]] += 1.0;
        }
        minv /= mu4;
        // row i: subtract the multiple of M⁻¹[i,:] that zeroes entry i
        for i in 0..y.nrows() {
            let t = y[[i, i]] / minv[[i, i]];
            let mrow = minv.row(i).to_owned();
            y.row_mut(i).scaled_add(-t, &mrow);
            y[[i, i]] = 0.0;
        }
    }
    Ok(y)
}

/// ν_{k,l}·d_i/μ₂ per row, for one channel.
fn q_thresholds(cfg: &SolverConfig, key: (usize, usize), degrees: &[f64], mu2: f64) -> Vec<f64> {
    let nu = cfg.nu_for(key);
    degrees.iter().map(|d| nu * d / mu2).collect()
}

/// Thresholded framelet coefficients given 𝒲U.
pub(crate) fn q_from_analysis(wu: &Coefficients, lam2: &Coefficients, degrees: &[f64], mu2: f64, cfg: &SolverConfig) -> Coefficients {
    let mut q = wu.clone();
    for (key, block) in q.iter_mut() {
        block.scaled_add(-1.0 / mu2, lam2.get(*key).expect("multiplier keyed like Q"));
        *block = prox::shrink_by_row(&block.view(), &q_thresholds(cfg, *key, degrees, mu2));
    }
    q
}

pub fn update_q(state: &DotState, g: &Graph, sys: &FrameletSystem, cfg: &SolverConfig) -> Result<Coefficients> {
    let wu = sys.decompose(&state.u.view())?;
    Ok(q_from_analysis(&wu, &state.lam2, g.degrees(), state.mu[1], cfg))
}

/// Constraint residuals in Frobenius norm. `r2` is the largest per-channel
/// residual and is absent without a framelet term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimalResiduals {
    pub r1: f64,
    pub r2: Option<f64>,
    pub r3: f64,
    pub r4: f64,
}

impl PrimalResiduals {
    pub fn max(&self) -> f64 {
        [self.r1, self.r2.unwrap_or(0.0), self.r3, self.r4].into_iter().fold(0.0, f64::max)
    }
}

pub(crate) struct ResidualBlocks {
    pub c1: Array2<f64>,
    pub c2: Option<Coefficients>,
    pub c3: Array1<f64>,
    pub c4: Array2<f64>,
}

impl ResidualBlocks {
    pub fn norms(&self) -> PrimalResiduals {
        PrimalResiduals {
            r1: linalg::frobenius(&self.c1.view()),
            r2: self
                .c2
                .as_ref()
                .map(|c| c.iter().map(|(_, b)| linalg::frobenius(&b.view())).fold(0.0, f64::max)),
            r3: self.c3.dot(&self.c3).sqrt(),
            r4: linalg::frobenius(&self.c4.view()),
        }
    }
}

/// U − YU − E, Q − 𝒲U, Y𝟙 − 𝟙, Y − Z + diag(Z).
pub(crate) fn residual_blocks(state: &DotState, wu: Option<&Coefficients>) -> ResidualBlocks {
    let c1 = &state.l0_apply(&state.u.view()) - &state.e;
    let c2 = wu.map(|wu| {
        let mut c = state.q.clone();
        for (k, b) in c.iter_mut() {
            *b -= wu.get(*k).expect("analysis keyed like Q");
        }
        c
    });
    let c3 = state.y.sum_axis(Axis(1)) - 1.0;
    let mut c4 = &state.y - &state.z;
    for i in 0..c4.nrows() {
        c4[[i, i]] += state.z[[i, i]];
    }
    ResidualBlocks { c1, c2, c3, c4 }
}

pub fn primal_residuals(state: &DotState, wu: Option<&Coefficients>) -> PrimalResiduals {
    residual_blocks(state, wu).norms()
}

/// Dual ascent on every multiplier with the current μ, then μ ← min(ρμ, μ_max).
/// `wu` is 𝒲U for the current U, or `None` when the run has no framelet term.
/// Returns the residuals the ascent step used.
pub fn update_multipliers_penalties(state: &mut DotState, wu: Option<&Coefficients>, cfg: &SolverConfig) -> PrimalResiduals {
    let blocks = residual_blocks(state, wu);
    let [mu1, mu2, mu3, mu4] = state.mu;
    state.lam1.scaled_add(mu1, &blocks.c1);
    if let Some(c2) = &blocks.c2 {
        for (k, lam) in state.lam2.iter_mut() {
            lam.scaled_add(mu2, c2.get(*k).expect("residual keyed like Λ₂"));
        }
    }
    state.lam3.scaled_add(mu3, &blocks.c3);
    state.lam4.scaled_add(mu4, &blocks.c4);
    advance_penalties(&mut state.mu, cfg);
    blocks.norms()
}

pub(crate) fn advance_penalties(mu: &mut [f64; 4], cfg: &SolverConfig) {
    for (m, cap) in mu.iter_mut().zip(cfg.mu_max) {
        *m = (cfg.rho * *m).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dot::state::init_state;
    use crate::framelet::build_framelet_system;
    use crate::graph::LaplacianKind;
    use ndarray::array;

    fn p3() -> Graph {
        Graph::from_pairs(&[(0, 1), (1, 2)], 3).unwrap()
    }

    fn blank_state(n: usize, d: usize, mu: [f64; 4]) -> DotState {
        DotState {
            u: Array2::zeros((n, d)),
            z: Array2::zeros((n, n)),
            e: Array2::zeros((n, d)),
            y: Array2::zeros((n, n)),
            q: Coefficients::zeros(&[], n, d),
            lam1: Array2::zeros((n, d)),
            lam2: Coefficients::zeros(&[], n, d),
            lam3: Array1::zeros(n),
            lam4: Array2::zeros((n, n)),
            mu,
            iter: 0,
        }
    }

    #[test]
    fn z_examples() {
        let mut s = blank_state(2, 1, [1.0; 4]);
        s.y = array![[0.0, 2.0], [0.5, 0.0]];
        assert_eq!(update_z(&s), array![[0.0, 1.0], [0.0, 0.0]]);

        s.y = Array2::eye(2);
        s.mu[3] = 2.0;
        assert_eq!(update_z(&s), Array2::<f64>::zeros((2, 2)));

        s.y = array![[0.3, -4.0], [2.5, 1.0]];
        s.lam4 = &s.y * -2.0;
        assert_eq!(update_z(&s), Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn e_examples() {
        let g = Graph::from_pairs(&[(0, 1)], 2).unwrap();
        let mut s = blank_state(2, 2, [1.0; 4]);
        s.u = array![[3.0, 4.0], [0.0, 0.0]];
        let cfg = SolverConfig::default();
        let e = update_e(&s, &g, &cfg).unwrap();
        assert!((e[[0, 0]] - 2.4).abs() < 1e-15 && (e[[0, 1]] - 3.2).abs() < 1e-15);

        s.u.fill(0.0);
        assert_eq!(update_e(&s, &g, &cfg).unwrap(), Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn e_threshold_modes_differ_by_row_schedule() {
        let g = Graph::from_pairs(&[(0, 1), (1, 2)], 3).unwrap();
        let mut s = blank_state(3, 2, [2.0; 4]);
        s.u = array![[3.0, 4.0], [6.0, 8.0], [0.6, 0.8]];
        let uniform = SolverConfig::default();
        let weighted = SolverConfig {
            e_threshold_mode: crate::dot::EThreshold::DegreeWeighted,
            lambda1: 1.5,
            ..SolverConfig::default()
        };
        let a = update_e(&s, &g, &uniform).unwrap();
        let b = update_e(&s, &g, &weighted).unwrap();
        // row norms 5, 10, 1 shrink by 1/2 (uniform) or 1.5·d_i/2 (weighted)
        let expect = |norm: f64, eta: f64| ((norm - eta).max(0.0)) / norm;
        for (i, (norm, d)) in [(5.0, 1.0), (10.0, 2.0), (1.0, 1.0)].into_iter().enumerate() {
            assert!((a[[i, 0]] - s.u[[i, 0]] * expect(norm, 0.5)).abs() < 1e-14);
            assert!((b[[i, 0]] - s.u[[i, 0]] * expect(norm, 0.75 * d)).abs() < 1e-14);
        }
    }

    #[test]
    fn woodbury_matches_dense_inverse_for_zero_signal() {
        let u = Array2::<f64>::zeros((4, 1));
        let (mu3, mu4) = (2.0, 3.0);
        let got = woodbury_inverse(&u.view(), 1.0, mu3, mu4).unwrap();
        let dense = Array2::from_elem((4, 4), mu3) + Array2::<f64>::eye(4) * mu4;
        let want = linalg::dense_inverse(&dense.view()).unwrap();
        assert!(linalg::max_abs(&(&got - &want).view()) <= 1e-12);
        // closed form (1/μ₄)(I − μ₃𝟙(μ₄ + μ₃n)⁻¹𝟙ᵀ)
        let closed = (Array2::<f64>::eye(4) - Array2::from_elem((4, 4), mu3 / (mu4 + mu3 * 4.0))) / mu4;
        assert!(linalg::max_abs(&(&got - &closed).view()) <= 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero_y() {
        let mut s = blank_state(3, 1, [1.0, 1.0, 1.0, 1.0]);
        // B = μ₃𝟙𝟙ᵀ − Λ₃𝟙ᵀ vanishes when Λ₃ = μ₃
        s.lam3.fill(1.0);
        s.u = array![[1.0], [2.0], [3.0]];
        s.e = s.u.clone();
        assert!(linalg::max_abs(&update_y(&s, &SolverConfig::default()).unwrap().view()) < 1e-15);
    }

    #[test]
    fn zero_diagonal_y_is_constrained_minimizer() {
        let g = p3();
        let x = array![[1.0, 0.5], [-0.3, 2.0], [0.7, -1.1]];
        let cfg = SolverConfig {
            y_diagonal: YDiagonal::Zero,
            ..SolverConfig::default()
        };
        let mut s = init_state(&g, None, &x.view(), &cfg).unwrap();
        s.lam4[[0, 1]] = 0.4;
        s.lam3[2] = -0.2;
        let y = update_y(&s, &cfg).unwrap();
        assert!(y.diag().iter().all(|&v| v == 0.0));
        // stationarity of the quadratic restricted to off-diagonal entries
        let [mu1, _, mu3, mu4] = s.mu;
        let m = s.u.dot(&s.u.t()) * mu1 + Array2::from_elem((3, 3), mu3) + Array2::<f64>::eye(3) * mu4;
        let grad = y.dot(&m) - y_rhs(&s);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(grad[[i, j]].abs() < 1e-12, "{i},{j}: {}", grad[[i, j]]);
                }
            }
        }
    }

    #[test]
    fn q_examples() {
        let g = p3();
        let sys = build_framelet_system(&g, LaplacianKind::Normalized, 1, 10).unwrap();
        let cfg = SolverConfig {
            nu0: 0.0,
            ..SolverConfig::default()
        };
        let x = array![[1.0], [-2.0], [0.5]];
        let mut s = init_state(&g, Some(&sys), &x.view(), &cfg).unwrap();
        s.lam2.get_mut((1, 1)).unwrap()[[0, 0]] = 0.3;
        let q = update_q(&s, &g, &sys, &cfg).unwrap();
        let wu = sys.decompose(&x.view()).unwrap();
        assert_eq!(q.get((0, 1)), wu.get((0, 1)));
        assert!((q.get((1, 1)).unwrap()[[0, 0]] - (wu.get((1, 1)).unwrap()[[0, 0]] - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn q_single_entry_and_isolated_row() {
        // ν_{1,1} = ν₀/16; entry 2 with ν·d/μ₂ = 0.5 shrinks to 1.5
        let cfg = SolverConfig {
            nu0: 16.0,
            ..SolverConfig::default()
        };
        let mut wu = Coefficients::zeros(&[(0, 1), (1, 1)], 2, 1);
        wu.get_mut((1, 1)).unwrap().fill(2.0);
        let lam2 = Coefficients::zeros(&[(0, 1), (1, 1)], 2, 1);
        let q = q_from_analysis(&wu, &lam2, &[0.5, 0.0], 1.0, &cfg);
        assert_eq!(q.get((1, 1)).unwrap()[[0, 0]], 1.5);
        assert_eq!(q.get((1, 1)).unwrap()[[1, 0]], 2.0);
    }

    #[test]
    fn penalty_schedule() {
        let cfg = SolverConfig {
            rho: 1.5,
            mu_max: [10.0; 4],
            ..SolverConfig::default()
        };
        let mut mu = [1.0, 8.0, 10.0, 2.0];
        advance_penalties(&mut mu, &cfg);
        assert_eq!(mu, [1.5, 10.0, 10.0, 3.0]);
    }

    #[test]
    fn multiplier_ascent_on_lambda3() {
        let g = Graph::from_pairs(&[(0, 1)], 2).unwrap();
        let cfg = SolverConfig {
            mu_init: [1.0, 1.0, 2.0, 1.0],
            ..SolverConfig::default()
        };
        let mut s = init_state(&g, None, &array![[1.0], [2.0]].view(), &cfg).unwrap();
        s.y = array![[0.0, 1.5], [1.0, 0.0]];
        s.z = s.y.clone();
        s.e = s.l0_apply(&s.u.view());
        let r = update_multipliers_penalties(&mut s, None, &cfg);
        assert_eq!(s.lam3.to_vec(), vec![1.0, 0.0]);
        assert_eq!(r.r1, 0.0);
        assert_eq!(r.r4, 0.0);
        assert_eq!(s.lam1, Array2::<f64>::zeros((2, 1)));
        assert!((s.mu[2] - 2.2).abs() < 1e-15);
    }

    #[test]
    fn feasible_state_keeps_multipliers() {
        let g = p3();
        let sys = build_framelet_system(&g, LaplacianKind::Normalized, 2, 10).unwrap();
        let cfg = SolverConfig::default();
        let x = array![[1.0], [0.0], [2.0]];
        let mut s = init_state(&g, Some(&sys), &x.view(), &cfg).unwrap();
        let before = s.clone();
        let wu = sys.decompose(&s.u.view()).unwrap();
        let r = update_multipliers_penalties(&mut s, Some(&wu), &cfg);
        assert_eq!(r.max(), 0.0);
        assert_eq!(s.lam1, before.lam1);
        assert_eq!(s.lam2, before.lam2);
        assert_eq!(s.lam4, before.lam4);
        assert!(s.mu.iter().all(|&m| (m - 1.1).abs() < 1e-15));
    }

    #[test]
    fn zero_rhs_gives_zero_u() {
        let g = p3();
        let sys = build_framelet_system(&g, LaplacianKind::Normalized, 2, 10).unwrap();
        let cfg = SolverConfig::default();
        let x = Array2::<f64>::zeros((3, 2));
        let s = init_state(&g, Some(&sys), &x.view(), &cfg).unwrap();
        assert_eq!(update_u(&s, &g, &sys, &x.view(), &cfg).unwrap(), Array2::<f64>::zeros((3, 2)));
    }

    #[test]
    fn solve_modes_agree_on_small_system() {
        let y = array![[0.0, 0.6, 0.4], [0.5, 0.0, 0.5], [0.2, 0.8, 0.0]];
        let sys = USystem::new(vec![3.0, 2.0, 4.0], 0.5, y);
        let rhs = array![[1.0, 0.0], [2.0, -1.0], [0.5, 3.0]];
        let a = sys.solve(&rhs.view(), USolve::Cholesky).unwrap();
        let b = sys.solve(&rhs.view(), USolve::ConjugateGradient).unwrap();
        assert!(linalg::max_abs(&(&a - &b).view()) < 1e-7);
        let resid = sys.apply(&a.view()) - &rhs;
        assert!(linalg::frobenius(&resid.view()) <= 1e-12 * linalg::frobenius(&rhs.view()));
        assert!(linalg::max_abs(&(sys.dense().dot(&a) - &rhs).view()) < 1e-12);
    }

    #[test]
    fn taylor_is_first_order_accurate() {
        let y = array![[0.0, 0.6, 0.4], [0.5, 0.0, 0.5], [0.2, 0.8, 0.0]];
        let rhs = array![[1.0], [2.0], [0.5]];
        let err = |mu1: f64| {
            let sys = USystem::new(vec![3.0, 2.0, 4.0], mu1, y.clone());
            let exact = sys.solve(&rhs.view(), USolve::Cholesky).unwrap();
            let approx = sys.solve(&rhs.view(), USolve::TaylorApprox).unwrap();
            linalg::frobenius(&(&exact - &approx).view())
        };
        // second-order remainder: halving μ₁ cuts the error about fourfold
        let ratio = err(0.02) / err(0.01);
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
        let zero_diag = USystem::new(vec![0.0, 1.0, 1.0], 0.1, y);
        assert!(zero_diag.solve(&rhs.view(), USolve::TaylorApprox).is_err());
    }
}
