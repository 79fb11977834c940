//! Undecimated tight framelet transform on graphs.
//!
//! Each channel operator is a product of Chebyshev approximations of the
//! filter-bank scaling functions evaluated at dilated copies of the graph
//! Laplacian. Decomposition and reconstruction are matrix-free polynomial
//! chains; no channel operator is ever formed densely.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{estimate_lambda_max, laplacian, Graph, LaplacianKind, Signal};
use crate::linalg;
use crate::sparse::CsrMatrix;

/// Grid used to certify filter-bank tightness.
pub const TIGHTNESS_GRID: usize = 1001;
pub const TIGHTNESS_TOL: f64 = 1e-12;
/// Largest graph accepted by the dense-eigendecomposition transform.
pub const EXACT_NODE_CAP: usize = 200;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Low-pass scaling function plus K high-pass functions on [0, π].
#[derive(Clone)]
pub struct FilterBank {
    name: String,
    low: ScalarFn,
    highs: Vec<ScalarFn>,
}

impl fmt::Debug for FilterBank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterBank")
            .field("name", &self.name)
            .field("high_pass_count", &self.highs.len())
            .finish()
    }
}

impl FilterBank {
    /// Accepts a user bank only if it is tight on [0, π].
    pub fn new(name: impl Into<String>, low: ScalarFn, highs: Vec<ScalarFn>) -> Result<Self> {
        if highs.is_empty() {
            return Err(Error::InvalidInput("filter bank needs at least one high-pass filter".into()));
        }
        let bank = FilterBank {
            name: name.into(),
            low,
            highs,
        };
        let worst = bank.tightness_defect();
        if worst > TIGHTNESS_TOL {
            return Err(Error::InvalidInput(format!(
                "filter bank '{}' is not tight: max |Σ|filter|² − 1| = {worst:.3e}",
                bank.name
            )));
        }
        Ok(bank)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of high-pass filters K.
    pub fn high_pass_count(&self) -> usize {
        self.highs.len()
    }

    /// Filter 0 is the low pass, filters 1..=K the high passes.
    pub fn eval(&self, filter: usize, xi: f64) -> f64 {
        if filter == 0 {
            (self.low)(xi)
        } else {
            (self.highs[filter - 1])(xi)
        }
    }

    pub fn tightness_defect(&self) -> f64 {
        (0..TIGHTNESS_GRID)
            .map(|i| {
                let xi = PI * i as f64 / (TIGHTNESS_GRID - 1) as f64;
                let energy: f64 = (0..=self.high_pass_count()).map(|f| self.eval(f, xi).powi(2)).sum();
                (energy - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Haar-type bank: cos(ξ/2) low pass, sin(ξ/2) high pass.
pub fn haar_filter_bank() -> FilterBank {
    FilterBank {
        name: "haar".into(),
        low: Arc::new(|xi: f64| (xi / 2.0).cos()),
        highs: vec![Arc::new(|xi: f64| (xi / 2.0).sin())],
    }
}

/// Smallest H ≥ 0 with `lambda_max ≤ 2^H π`.
pub fn dilation_scale(lambda_max: f64) -> Result<u32> {
    if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lambda_max must be finite and nonnegative, got {lambda_max}"
        )));
    }
    let mut h = 0u32;
    while lambda_max > 2f64.powi(h as i32) * PI {
        h += 1;
    }
    Ok(h)
}

/// Chebyshev interpolant of a scalar function on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevFit {
    coeffs: Vec<f64>,
    lo: f64,
    hi: f64,
}

/// Interpolates `g` at the m+1 Chebyshev-Gauss points of `domain`.
pub fn chebyshev_fit<G: Fn(f64) -> f64>(g: G, m: usize, domain: (f64, f64)) -> ChebyshevFit {
    let (lo, hi) = domain;
    let count = m + 1;
    let samples: Vec<(f64, f64)> = (0..count)
        .map(|k| {
            let theta = PI * (k as f64 + 0.5) / count as f64;
            let xi = 0.5 * (hi - lo) * theta.cos() + 0.5 * (hi + lo);
            (theta, g(xi))
        })
        .collect();
    let coeffs = (0..count)
        .map(|j| {
            let s: f64 = samples.iter().map(|&(theta, gv)| gv * (j as f64 * theta).cos()).sum();
            let c = 2.0 * s / count as f64;
            if j == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect();
    ChebyshevFit { coeffs, lo, hi }
}

impl ChebyshevFit {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn to_unit(&self, xi: f64) -> f64 {
        (2.0 * xi - (self.hi + self.lo)) / (self.hi - self.lo)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, xi: f64) -> f64 {
        let t = self.to_unit(xi);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }
}

/// p(L_s) X for the fitted polynomial p, where `l_scaled` already carries the
/// dilation and has its spectrum inside the fit domain.
pub fn chebyshev_apply(fit: &ChebyshevFit, l_scaled: &CsrMatrix, x: &ArrayView2<f64>) -> Result<Signal> {
    if l_scaled.ncols() != x.nrows() || l_scaled.nrows() != l_scaled.ncols() {
        return Err(Error::dims("chebyshev_apply", l_scaled.ncols(), x.nrows()));
    }
    let scale = 2.0 / (fit.hi - fit.lo);
    let shift = (fit.hi + fit.lo) / (fit.hi - fit.lo);
    // M v = scale·L_s v − shift·v maps the fit domain onto [−1, 1]
    let apply_m = |v: &ArrayView2<f64>| {
        let mut out = l_scaled.mul_dense(v);
        out.mapv_inplace(|e| e * scale);
        out.scaled_add(-shift, v);
        out
    };
    let c = &fit.coeffs;
    let mut acc = x.to_owned() * c[0];
    if c.len() == 1 {
        return Ok(acc);
    }
    let mut prev = x.to_owned();
    let mut cur = apply_m(x);
    acc.scaled_add(c[1], &cur);
    for &cj in &c[2..] {
        let mut next = apply_m(&cur.view());
        next.mapv_inplace(|e| 2.0 * e);
        next -= &prev;
        acc.scaled_add(cj, &next);
        prev = cur;
        cur = next;
    }
    Ok(acc)
}

/// Key (k, l) of a framelet channel: k = 0 is the low pass, l the level.
pub type ChannelKey = (usize, usize);

/// How the dilation exponents of a channel chain are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DilationSchedule {
    /// Level l applies l−1 low passes at 2^{−H}, …, 2^{−H−l+2} and then the
    /// channel filter at 2^{−H−l+1}. The frame telescopes and is tight for
    /// every level count.
    #[default]
    Telescoping,
    /// Level 1 uses the channel filter at 2^{−H}; level l ≥ 2 applies l low
    /// passes at 2^{−H}, …, 2^{−H−l+1} and the channel filter at 2^{−H−l}.
    /// Tight only for a single level.
    Shifted,
}

/// Channel operator T_filter(2^{−exponent} L) · P_prefix where P_j is the
/// product of the first j low-pass factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ChannelChain {
    key: ChannelKey,
    prefix: usize,
    filter: usize,
    exponent: u32,
}

fn channel_plan(high_passes: usize, levels: usize, h: u32, schedule: DilationSchedule) -> Vec<ChannelChain> {
    let chain = |k: usize, l: usize| -> ChannelChain {
        let (prefix, exponent) = match schedule {
            DilationSchedule::Telescoping => (l - 1, h + l as u32 - 1),
            DilationSchedule::Shifted if l == 1 => (0, h),
            DilationSchedule::Shifted => (l, h + l as u32),
        };
        ChannelChain {
            key: (k, l),
            prefix,
            filter: k,
            exponent,
        }
    };
    let mut plan = vec![chain(0, levels)];
    for k in 1..=high_passes {
        for l in 1..=levels {
            plan.push(chain(k, l));
        }
    }
    plan
}

/// Per-channel n×d blocks keyed by the channel index set.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    blocks: BTreeMap<ChannelKey, Array2<f64>>,
}

impl Coefficients {
    pub fn new(blocks: BTreeMap<ChannelKey, Array2<f64>>) -> Result<Self> {
        let mut dims = blocks.values().map(|b| b.dim());
        if let Some(first) = dims.next() {
            if let Some(bad) = dims.find(|d| *d != first) {
                return Err(Error::dims("coefficient blocks", format!("{first:?}"), format!("{bad:?}")));
            }
        }
        Ok(Coefficients { blocks })
    }

    pub fn zeros(keys: &[ChannelKey], rows: usize, cols: usize) -> Self {
        Coefficients {
            blocks: keys.iter().map(|&k| (k, Array2::zeros((rows, cols)))).collect(),
        }
    }

    pub fn keys(&self) -> Vec<ChannelKey> {
        self.blocks.keys().copied().collect()
    }

    pub fn get(&self, key: ChannelKey) -> Option<&Array2<f64>> {
        self.blocks.get(&key)
    }

    pub fn get_mut(&mut self, key: ChannelKey) -> Option<&mut Array2<f64>> {
        self.blocks.get_mut(&key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ChannelKey, &Array2<f64>)> {
        self.blocks.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&ChannelKey, &mut Array2<f64>)> {
        self.blocks.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Σ over channels of ‖block‖²_F.
    pub fn energy(&self) -> f64 {
        self.blocks.values().map(|b| b.iter().map(|v| v * v).sum::<f64>()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Coefficients {
            blocks: self.blocks.iter().map(|(&k, b)| (k, b * s)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Coefficients) -> Result<f64> {
        if self.keys() != other.keys() {
            return Err(Error::InvalidInput("coefficient key sets differ".into()));
        }
        Ok(self
            .blocks
            .iter()
            .map(|(k, b)| linalg::max_abs(&(b - &other.blocks[k]).view()))
            .fold(0.0, f64::max))
    }
}

/// Transform parameters shared by the solvers and the CLI config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameletConfig {
    pub levels: usize,
    pub cheb_order: usize,
    pub laplacian: LaplacianKind,
    pub schedule: DilationSchedule,
}

impl Default for FrameletConfig {
    fn default() -> Self {
        FrameletConfig {
            levels: 2,
            cheb_order: 10,
            laplacian: LaplacianKind::Normalized,
            schedule: DilationSchedule::Telescoping,
        }
    }
}

/// Chebyshev-approximated framelet system bound to one graph.
#[derive(Debug, Clone)]
pub struct FrameletSystem {
    bank: FilterBank,
    levels: usize,
    cheb_order: usize,
    dilation: u32,
    lambda_max: f64,
    kind: LaplacianKind,
    schedule: DilationSchedule,
    laplacian: CsrMatrix,
    /// fits[f] approximates filter f on [0, π]
    fits: Vec<ChebyshevFit>,
    /// 2^{−e} L for every exponent the plan touches
    dilated: BTreeMap<u32, CsrMatrix>,
    plan: Vec<ChannelChain>,
}

pub const LAMBDA_MAX_TOL: f64 = 1e-6;

/// Haar bank, telescoping schedule.
pub fn build_framelet_system(g: &Graph, kind: LaplacianKind, levels: usize, m: usize) -> Result<FrameletSystem> {
    let cfg = FrameletConfig {
        levels,
        cheb_order: m,
        laplacian: kind,
        schedule: DilationSchedule::Telescoping,
    };
    FrameletSystem::new(g, &cfg, haar_filter_bank())
}

impl FrameletSystem {
    pub fn new(g: &Graph, cfg: &FrameletConfig, bank: FilterBank) -> Result<Self> {
        if cfg.levels == 0 {
            return Err(Error::InvalidInput("framelet levels must be at least 1".into()));
        }
        if cfg.cheb_order == 0 {
            return Err(Error::InvalidInput("Chebyshev order must be at least 1".into()));
        }
        let lap = laplacian(g, cfg.laplacian);
        let lambda_max = match estimate_lambda_max(&lap, LAMBDA_MAX_TOL) {
            Ok(v) => v,
            // fall back to a guaranteed upper bound; only H depends on it
            Err(Error::NotConverged { .. }) => lap.gershgorin_bound(),
            Err(e) => return Err(e),
        };
        let dilation = dilation_scale(lambda_max)?;
        let fits = (0..=bank.high_pass_count())
            .map(|f| chebyshev_fit(|xi| bank.eval(f, xi), cfg.cheb_order, (0.0, PI)))
            .collect();
        let plan = channel_plan(bank.high_pass_count(), cfg.levels, dilation, cfg.schedule);
        let mut dilated = BTreeMap::new();
        let max_prefix = plan.iter().map(|c| c.prefix).max().unwrap_or(0);
        let exponents = plan.iter().map(|c| c.exponent).chain((0..max_prefix).map(|j| dilation + j as u32));
        for e in exponents {
            dilated.entry(e).or_insert_with(|| lap.scaled(2f64.powi(-(e as i32))));
        }
        Ok(FrameletSystem {
            bank,
            levels: cfg.levels,
            cheb_order: cfg.cheb_order,
            dilation,
            lambda_max,
            kind: cfg.laplacian,
            schedule: cfg.schedule,
            laplacian: lap,
            fits,
            dilated,
            plan,
        })
    }

    pub fn n(&self) -> usize {
        self.laplacian.nrows()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn cheb_order(&self) -> usize {
        self.cheb_order
    }

    pub fn dilation(&self) -> u32 {
        self.dilation
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn laplacian_kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn schedule(&self) -> DilationSchedule {
        self.schedule
    }

    pub fn laplacian(&self) -> &CsrMatrix {
        &self.laplacian
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn high_pass_count(&self) -> usize {
        self.bank.high_pass_count()
    }

    /// {(0, L)} ∪ {(k, l) : 1 ≤ k ≤ K, 1 ≤ l ≤ L}, in map order.
    pub fn index_set(&self) -> Vec<ChannelKey> {
        let mut keys: Vec<_> = self.plan.iter().map(|c| c.key).collect();
        keys.sort();
        keys
    }

    pub fn low_pass_key(&self) -> ChannelKey {
        (0, self.levels)
    }

    fn low_factor(&self, j: usize, x: &ArrayView2<f64>) -> Signal {
        let e = self.dilation + j as u32;
        chebyshev_apply(&self.fits[0], &self.dilated[&e], x).expect("shape checked by caller")
    }

    fn final_factor(&self, c: &ChannelChain, x: &ArrayView2<f64>) -> Signal {
        chebyshev_apply(&self.fits[c.filter], &self.dilated[&c.exponent], x).expect("shape checked by caller")
    }

    fn check_rows(&self, x: &ArrayView2<f64>, context: &'static str) -> Result<()> {
        if x.nrows() != self.n() {
            return Err(Error::dims(context, self.n(), x.nrows()));
        }
        Ok(())
    }

    /// Q_{k,l} = W_{k,l} X for every channel.
    pub fn decompose(&self, x: &ArrayView2<f64>) -> Result<Coefficients> {
        self.check_rows(x, "framelet_decompose")?;
        let max_prefix = self.plan.iter().map(|c| c.prefix).max().unwrap_or(0);
        let mut prefixes = vec![x.to_owned()];
        for j in 0..max_prefix {
            let next = self.low_factor(j, &prefixes[j].view());
            prefixes.push(next);
        }
        let blocks = self
            .plan
            .iter()
            .map(|c| (c.key, self.final_factor(c, &prefixes[c.prefix].view())))
            .collect();
        Ok(Coefficients { blocks })
    }

    /// Σ_{(k,l)} W_{k,l}ᵀ Q_{k,l}, evaluated as a nested chain over the shared
    /// low-pass prefixes.
    pub fn reconstruct(&self, q: &Coefficients) -> Result<Signal> {
        if q.keys() != self.index_set() {
            return Err(Error::InvalidInput(format!(
                "coefficient keys {:?} do not match the index set {:?}",
                q.keys(),
                self.index_set()
            )));
        }
        let (rows, cols) = q.blocks.values().next().map(|b| b.dim()).unwrap_or((self.n(), 0));
        if rows != self.n() {
            return Err(Error::dims("framelet_reconstruct", self.n(), rows));
        }
        let max_prefix = self.plan.iter().map(|c| c.prefix).max().unwrap_or(0);
        let mut acc = vec![Array2::<f64>::zeros((rows, cols)); max_prefix + 1];
        for c in &self.plan {
            let part = self.final_factor(c, &q.blocks[&c.key].view());
            acc[c.prefix] += &part;
        }
        let mut out = acc.pop().expect("at least one prefix level");
        for j in (0..max_prefix).rev() {
            out = self.low_factor(j, &out.view());
            out += &acc[j];
        }
        Ok(out)
    }

    /// W_{k,l} X for a single channel.
    pub fn apply_channel(&self, key: ChannelKey, x: &ArrayView2<f64>) -> Result<Signal> {
        self.check_rows(x, "apply_channel")?;
        let c = self
            .plan
            .iter()
            .find(|c| c.key == key)
            .ok_or_else(|| Error::InvalidInput(format!("channel {key:?} not in the index set")))?;
        let mut v = x.to_owned();
        for j in 0..c.prefix {
            v = self.low_factor(j, &v.view());
        }
        Ok(self.final_factor(c, &v.view()))
    }

    /// Exact spectral response of channel `key` at Laplacian eigenvalue `lambda`.
    pub fn channel_response(&self, key: ChannelKey, lambda: f64) -> f64 {
        let c = self.plan.iter().find(|c| c.key == key).expect("channel in index set");
        chain_response(&self.bank, self.dilation, c, lambda)
    }
}

fn chain_response(bank: &FilterBank, h: u32, c: &ChannelChain, lambda: f64) -> f64 {
    let mut g = bank.eval(c.filter, lambda / 2f64.powi(c.exponent as i32));
    for j in 0..c.prefix {
        g *= bank.eval(0, lambda / 2f64.powi((h + j as u32) as i32));
    }
    g
}

/// Framelet transform evaluated through a dense eigendecomposition of the
/// Laplacian, with the scaling functions applied exactly to the spectrum.
#[derive(Debug, Clone)]
pub struct ExactFramelet {
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<f64>,
    /// per-channel spectral gains, one per eigenvalue
    gains: BTreeMap<ChannelKey, Array1<f64>>,
}

impl ExactFramelet {
    /// Exact counterpart of a Chebyshev system: same bank, dilation and plan.
    pub fn from_system(sys: &FrameletSystem) -> Result<Self> {
        Self::from_parts(&sys.laplacian, &sys.bank, sys.dilation, &sys.plan)
    }

    /// Builds from scratch with H taken from the exact largest eigenvalue.
    pub fn new(g: &Graph, cfg: &FrameletConfig, bank: &FilterBank) -> Result<Self> {
        if cfg.levels == 0 {
            return Err(Error::InvalidInput("framelet levels must be at least 1".into()));
        }
        let lap = laplacian(g, cfg.laplacian);
        let (vals, _) = Self::check_and_eigen(&lap)?;
        let lmax = vals.iter().fold(0.0f64, |a, &b| a.max(b));
        let h = dilation_scale(lmax.max(0.0))?;
        let plan = channel_plan(bank.high_pass_count(), cfg.levels, h, cfg.schedule);
        Self::from_parts(&lap, bank, h, &plan)
    }

    fn check_and_eigen(lap: &CsrMatrix) -> Result<(Array1<f64>, Array2<f64>)> {
        if lap.nrows() > EXACT_NODE_CAP {
            return Err(Error::InvalidInput(format!(
                "exact framelet transform is capped at {EXACT_NODE_CAP} nodes, got {}",
                lap.nrows()
            )));
        }
        Ok(linalg::symmetric_eigen(&lap.to_dense().view()))
    }

    fn from_parts(lap: &CsrMatrix, bank: &FilterBank, h: u32, plan: &[ChannelChain]) -> Result<Self> {
        let (eigenvalues, eigenvectors) = Self::check_and_eigen(lap)?;
        let gains = plan
            .iter()
            .map(|c| {
                // clamp tiny negative round-off in the spectrum
                (c.key, eigenvalues.mapv(|lam| chain_response(bank, h, c, lam.max(0.0))))
            })
            .collect();
        Ok(ExactFramelet {
            eigenvalues,
            eigenvectors,
            gains,
        })
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn index_set(&self) -> Vec<ChannelKey> {
        self.gains.keys().copied().collect()
    }

    fn spectral_filter(&self, gain: &Array1<f64>, x: &ArrayView2<f64>) -> Signal {
        let mut coeffs = self.eigenvectors.t().dot(x);
        for (mut row, g) in coeffs.rows_mut().into_iter().zip(gain.iter()) {
            row.mapv_inplace(|v| v * g);
        }
        self.eigenvectors.dot(&coeffs)
    }

    pub fn decompose(&self, x: &ArrayView2<f64>) -> Result<Coefficients> {
        if x.nrows() != self.eigenvalues.len() {
            return Err(Error::dims("exact_framelet_decompose", self.eigenvalues.len(), x.nrows()));
        }
        let blocks = self.gains.iter().map(|(&k, gain)| (k, self.spectral_filter(gain, x))).collect();
        Ok(Coefficients { blocks })
    }

    pub fn reconstruct(&self, q: &Coefficients) -> Result<Signal> {
        if q.keys() != self.index_set() {
            return Err(Error::InvalidInput("coefficient keys do not match the index set".into()));
        }
        let mut out: Option<Signal> = None;
        for (k, block) in q.iter() {
            let part = self.spectral_filter(&self.gains[k], &block.view());
            out = Some(match out {
                Some(acc) => acc + part,
                None => part,
            });
        }
        out.ok_or_else(|| Error::InvalidInput("empty coefficient set".into()))
    }

    pub fn apply_channel(&self, key: ChannelKey, x: &ArrayView2<f64>) -> Result<Signal> {
        let gain = self
            .gains
            .get(&key)
            .ok_or_else(|| Error::InvalidInput(format!("channel {key:?} not in the index set")))?;
        Ok(self.spectral_filter(gain, x))
    }
}

/// Ground-truth decomposition through dense eigenpairs (Haar bank,
/// telescoping schedule). Capped at [`EXACT_NODE_CAP`] nodes.
pub fn exact_framelet_decompose(g: &Graph, kind: LaplacianKind, levels: usize, x: &ArrayView2<f64>) -> Result<Coefficients> {
    let cfg = FrameletConfig {
        levels,
        laplacian: kind,
        ..FrameletConfig::default()
    };
    ExactFramelet::new(g, &cfg, &haar_filter_bank())?.decompose(x)
}
