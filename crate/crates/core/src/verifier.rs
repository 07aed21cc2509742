//! Finite-section checks of the converse sampling theorem.
//!
//! Every statement of the form "for all f in B" is tested on the span of
//! `{S_j : |j| <= N}`. The sampling space `B_samp` is handled through its
//! coefficient isometry: `f = Σ d_j S_j` is identified with `d`, and
//!
//! ```text
//! M_j = conj(a_j)^{-1} G_samp(t_j, ·)  <->  m_j = φ*(t_j) / conj(a_j) ∈ ℓ_p
//! [f, M_j]_samp = [d, m_j]_p
//! ```
//!
//! Frame and Riesz constants are estimated by seeded random search on the
//! coefficient sphere followed by coordinate refinement. Such estimates are
//! one-sided: a reported lower constant can only overestimate the true one
//! and a reported upper constant can only underestimate it.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::funcspace::{feature_on, quadrature_eval, sip_fn, weighted_lp_norm, Grid, GridFn};
use crate::kernels::{gsamp_eval, phi_star_seq, sinc};
use crate::quadrature::DEFAULT_PANEL_ORDER;
use crate::sampling::{check_interpolation, check_sampling_basis, SamplingSystem};
use crate::seqspace::{lp_norm_slice, pairing, sip_seq, CoeffSeq};

/// Random vectors with smaller norm are redrawn.
const DEGENERATE_NORM: f64 = 1e-12;
/// Step halvings during coordinate refinement.
const REFINE_LEVELS: usize = 10;
/// Full coordinate sweeps allowed per step size.
const REFINE_SWEEPS: usize = 4;
/// Relative gain a refinement move must achieve to be kept.
const REFINE_GAIN: f64 = 1e-13;
/// Lattice used by the formula checks when none is given.
pub const DEFAULT_LATTICE: [f64; 10] = [-3.3, -0.9, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 0.9, 3.3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    RandomSearch,
    Exhaustive,
}

/// Lower and upper constants of a two-sided norm inequality, as observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEstimate {
    pub lower: f64,
    pub upper: f64,
    pub method: EstimateMethod,
    pub trials: usize,
    pub seed: u64,
}

/// Settings shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub trials: usize,
    pub seed: u64,
    /// Gauss–Legendre nodes per quadrature panel.
    pub panel_order: usize,
}

impl EstimatorConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            panel_order: DEFAULT_PANEL_ORDER,
        }
    }
}

/// `ℓ_p` coefficients of `M_j` in the `S`-expansion: `φ*(t_j)/conj(a_j)`.
fn mj_coefficients(sys: &SamplingSystem, rank: usize) -> CoeffSeq {
    let star = phi_star_seq(sys, sys.nodes()[rank]);
    star.scaled(ONE / sys.weights()[rank].conj())
}

/// `M_j(·) = conj(a_j)^{-1} G_samp(t_j, ·)`.
#[derive(Debug, Clone)]
pub struct SampKernelFn<'a> {
    sys: &'a SamplingSystem,
    index: i64,
    coefficients: CoeffSeq,
}

impl SampKernelFn<'_> {
    pub fn index(&self) -> i64 {
        self.index
    }

    /// Coefficients of `M_j` against `{S_k}`, an element of `ℓ_p`.
    pub fn coefficients(&self) -> &CoeffSeq {
        &self.coefficients
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let node = self.sys.node(self.index).expect("index checked on construction");
        let a = self.sys.weight(self.index).expect("index checked on construction");
        gsamp_eval(self.sys, node, t) / a.conj()
    }
}

pub fn make_mj(sys: &SamplingSystem, j: i64) -> Result<SampKernelFn<'_>> {
    sys.node(j)?;
    let rank = crate::seqspace::rank_of(j);
    Ok(SampKernelFn {
        sys,
        index: j,
        coefficients: mj_coefficients(sys, rank),
    })
}

/// `max_{j,k} |[S_j, M_k]_samp - δ_{jk}|`, with `S_j` identified with the
/// unit coefficient vector `e_j`.
pub fn biorth_matrix_sm(sys: &SamplingSystem) -> f64 {
    let p = sys.exponent().p();
    let n = sys.len();
    let mut worst = 0.0f64;
    for k in 0..n {
        let m = mj_coefficients(sys, k);
        // [e_j, m_k]_p is the j-th entry of the duality image of m_k
        let star = crate::seqspace::duality_map_slice(m.entries(), p);
        for (j, v) in star.iter().enumerate() {
            let target = if j == k { ONE } else { ZERO };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

/// `[S_j, M_k]_samp` (rows `j`, columns `k`, both in ascending index order).
pub fn biorth_matrix(sys: &SamplingSystem) -> Vec<Vec<Complex64>> {
    let p = sys.exponent().p();
    let stars: Vec<Vec<Complex64>> = (0..sys.len())
        .map(|k| crate::seqspace::duality_map_slice(mj_coefficients(sys, k).entries(), p))
        .collect();
    let mut asc: Vec<usize> = (0..sys.len()).collect();
    asc.sort_by_key(|&r| crate::seqspace::index_at(r));
    asc.iter()
        .map(|&j| asc.iter().map(|&k| stars[k][j]).collect())
        .collect()
}

/// Gram matrix `[m_j, m_k]_p` of the `M_j` coefficient vectors, ascending.
pub fn samp_gram_matrix(sys: &SamplingSystem) -> Vec<Vec<Complex64>> {
    let p = sys.exponent().p();
    let coeffs: Vec<CoeffSeq> = (0..sys.len()).map(|r| mj_coefficients(sys, r)).collect();
    let mut asc: Vec<usize> = (0..sys.len()).collect();
    asc.sort_by_key(|&r| crate::seqspace::index_at(r));
    asc.iter()
        .map(|&j| {
            asc.iter()
                .map(|&k| sip_seq(&coeffs[j], &coeffs[k], p).expect("same window"))
                .collect()
        })
        .collect()
}

/// Rows `j,k,re,im` of a square matrix indexed by `-N..=N`.
pub fn write_matrix_csv<W: std::io::Write>(half_width: usize, m: &[Vec<Complex64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "k", "re", "im"])?;
    let n = half_width as i64;
    for (row, j) in m.iter().zip(-n..=n) {
        for (v, k) in row.iter().zip(-n..=n) {
            w.write_record([j.to_string(), k.to_string(), crate::fmt_f64(v.re), crate::fmt_f64(v.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `max_j |[f, M_j]_samp - c_j|` for `f = Σ c_j S_j`.
pub fn riesz_fischer_check(sys: &SamplingSystem, c: &CoeffSeq) -> Result<f64> {
    if c.half_width() != sys.half_width() {
        return Err(Error::Shape("coefficients and system windows differ".into()));
    }
    let p = sys.exponent().p();
    let mut worst = 0.0f64;
    for (r, (_, cj)) in c.iter().enumerate() {
        let v = sip_seq(c, &mj_coefficients(sys, r), p)?;
        worst = worst.max((v - cj).norm());
    }
    Ok(worst)
}

/// `max_j |[f, M_j]_samp - a_j^{-1} f(t_j)|` for `f = Σ d_k S_k`.
///
/// The left side is computed in coefficient space; the right side
/// evaluates `f(t_j)` by quadrature of `f̂ = Σ d_k Ŝ_k`.
pub fn sampling_identity_dev(sys: &SamplingSystem, d: &CoeffSeq, grid: &Arc<Grid>) -> Result<f64> {
    if d.half_width() != sys.half_width() {
        return Err(Error::Shape("coefficients and system windows differ".into()));
    }
    let p = sys.exponent().p();
    let spectrum = GridFn::from_fn(grid.clone(), |w| {
        d.entries()
            .iter()
            .enumerate()
            .map(|(r, dk)| dk * sys.kernel_spectrum_at_rank(r, w))
            .sum()
    })?;
    let mut worst = 0.0f64;
    for r in 0..sys.len() {
        let lhs = sip_seq(d, &mj_coefficients(sys, r), p)?;
        let rhs = quadrature_eval(&spectrum, sys.nodes()[r]) / sys.weights()[r];
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Right side of the `B_samp` biorthogonal formula for index `j`,
/// `Σ_k [φ*(t_j)/conj(a_j), φ*(t_k)/conj(a_k)]_p S_k`, compared with
/// `M_j` on `lattice`.
pub fn check_formula3(sys: &SamplingSystem, j: i64, lattice: &[f64]) -> Result<f64> {
    let mj = make_mj(sys, j)?;
    let p = sys.exponent().p();
    let gram: Vec<Complex64> = (0..sys.len())
        .map(|k| sip_seq(mj.coefficients(), &mj_coefficients(sys, k), p))
        .collect::<Result<_>>()?;
    Ok(lattice
        .iter()
        .map(|&t| {
            let rhs = pairing(&gram, &sys.kernel_values(t));
            (rhs - mj.eval(t)).norm()
        })
        .fold(0.0, f64::max))
}

/// Right side of the `B` biorthogonal formula for index `j`,
/// `Σ_k [Φ(t_j)/conj(a_j), Φ(t_k)/conj(a_k)]_p S_k`, with the Gram entries
/// computed by quadrature, compared with `conj(a_j)^{-1} G(t_j, ·)`.
pub fn check_formula4(sys: &SamplingSystem, j: i64, lattice: &[f64], grid: &Arc<Grid>) -> Result<f64> {
    let tj = sys.node(j)?;
    let aj = sys.weight(j)?;
    let p = sys.exponent().p();
    let left = feature_on(grid, tj).scaled(ONE / aj.conj());
    let gram: Vec<Complex64> = sys
        .nodes()
        .iter()
        .zip(sys.weights())
        .map(|(&tk, ak)| sip_fn(&left, &feature_on(grid, tk).scaled(ONE / ak.conj()), p))
        .collect::<Result<_>>()?;
    Ok(lattice
        .iter()
        .map(|&t| {
            let rhs = pairing(&gram, &sys.kernel_values(t));
            let want = sinc(t - tj) / aj.conj();
            (rhs - want).norm()
        })
        .fold(0.0, f64::max))
}

/// A linear map `ℂ^n → ℂ^m` followed by a (weighted) `L_r` norm.
#[derive(Debug, Clone)]
struct NormedMap {
    /// `None` is the identity.
    columns: Option<Vec<Vec<Complex64>>>,
    weights: Option<Vec<f64>>,
    exponent: f64,
}

impl NormedMap {
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        match &self.columns {
            None => x.to_vec(),
            Some(cols) => {
                let mut out = vec![ZERO; cols[0].len()];
                for (xk, col) in x.iter().zip(cols) {
                    if *xk != ZERO {
                        for (o, c) in out.iter_mut().zip(col) {
                            *o += xk * c;
                        }
                    }
                }
                out
            }
        }
    }

    fn norm(&self, image: &[Complex64]) -> f64 {
        match &self.weights {
            None => lp_norm_slice(image, self.exponent),
            Some(w) => weighted_lp_norm(w, image, self.exponent),
        }
    }

    /// `image + delta · column_k` into `out`.
    fn shifted(&self, image: &[Complex64], k: usize, delta: Complex64, out: &mut Vec<Complex64>) {
        out.clear();
        out.extend_from_slice(image);
        match &self.columns {
            None => out[k] += delta,
            Some(cols) => {
                for (o, c) in out.iter_mut().zip(&cols[k]) {
                    *o += delta * c;
                }
            }
        }
    }
}

/// Generator for one trial: the seed picks the key, the trial the stream,
/// so trials are independent of scheduling and of each other.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// `‖A x‖ / ‖B x‖`, the quantity whose extremes are the constants.
#[derive(Debug, Clone)]
struct RatioObjective {
    num: NormedMap,
    den: NormedMap,
    dim: usize,
}

impl RatioObjective {
    fn ratio(&self, x: &[Complex64]) -> Option<f64> {
        let d = self.den.norm(&self.den.apply(x));
        (d >= DEGENERATE_NORM).then(|| self.num.norm(&self.num.apply(x)) / d)
    }

    /// Seeded draw `trial`: complex Gaussian entries, normalized in the
    /// denominator norm; degenerate draws are redrawn from the same stream.
    fn draw(&self, seed: u64, trial: usize) -> Vec<Complex64> {
        let mut rng = trial_rng(seed, trial);
        loop {
            let x: Vec<Complex64> = (0..self.dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let d = self.den.norm(&self.den.apply(&x));
            if d >= DEGENERATE_NORM {
                return x.iter().map(|v| v / d).collect();
            }
        }
    }

    /// Coordinate search from `x`, ascending when `maximize`, otherwise
    /// descending. Returns the final ratio.
    #[allow(clippy::needless_range_loop)] // k also indexes both maps
    fn refine(&self, mut x: Vec<Complex64>, maximize: bool) -> f64 {
        let mut a = self.num.apply(&x);
        let mut b = self.den.apply(&x);
        let mut best = self.num.norm(&a) / self.den.norm(&b);
        let dirs = [ONE, -ONE, Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        let mut step = 0.5 * x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let (mut a2, mut b2) = (Vec::new(), Vec::new());
        for _ in 0..REFINE_LEVELS {
            for _ in 0..REFINE_SWEEPS {
                let mut improved = false;
                for k in 0..self.dim {
                    for d in dirs {
                        let delta = d * step;
                        self.num.shifted(&a, k, delta, &mut a2);
                        self.den.shifted(&b, k, delta, &mut b2);
                        let den = self.den.norm(&b2);
                        if den < DEGENERATE_NORM {
                            continue;
                        }
                        let r = self.num.norm(&a2) / den;
                        let better = if maximize {
                            r > best * (1.0 + REFINE_GAIN)
                        } else {
                            r < best * (1.0 - REFINE_GAIN)
                        };
                        if better {
                            best = r;
                            x[k] += delta;
                            std::mem::swap(&mut a, &mut a2);
                            std::mem::swap(&mut b, &mut b2);
                            improved = true;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            step *= 0.5;
        }
        best
    }
}

/// Ratios of every trial, in trial order.
fn trial_ratios(obj: &RatioObjective, cfg: &EstimatorConfig) -> Vec<f64> {
    let eval = |i: usize| obj.ratio(&obj.draw(cfg.seed, i)).expect("draws are normalized");
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..cfg.trials).into_par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..cfg.trials).map(eval).collect()
    }
}

/// Index of the extreme ratio; the first one wins ties.
fn extreme(ratios: &[f64], maximize: bool) -> usize {
    let mut best = 0;
    for (i, &r) in ratios.iter().enumerate() {
        if (maximize && r > ratios[best]) || (!maximize && r < ratios[best]) {
            best = i;
        }
    }
    best
}

/// Raw search plus optional refinement of either extreme.
struct Search {
    raw_min: f64,
    raw_max: f64,
    lower: f64,
    upper: f64,
}

/// Coordinate vector `e_k` normalized in the denominator norm; `None` when
/// the denominator vanishes on it.
fn unit_probe(obj: &RatioObjective, k: usize) -> Option<Vec<Complex64>> {
    let mut x = vec![ZERO; obj.dim];
    x[k] = ONE;
    let d = obj.den.norm(&obj.den.apply(&x));
    (d >= DEGENERATE_NORM).then(|| x.iter().map(|v| v / d).collect())
}

/// Random trials, then the `dim` coordinate probes (extremal for
/// Hausdorff–Young type ratios, where random starts stall). Each extreme
/// is refined from the best random start and the best probe.
fn search(obj: &RatioObjective, cfg: &EstimatorConfig, refine_min: bool, refine_max: bool) -> Result<Search> {
    if cfg.trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    let ratios = trial_ratios(obj, cfg);
    let imin = extreme(&ratios, false);
    let imax = extreme(&ratios, true);
    let raw_min = ratios[imin];
    let raw_max = ratios[imax];

    let probes: Vec<(Vec<Complex64>, f64)> = (0..obj.dim)
        .filter_map(|k| unit_probe(obj, k))
        .map(|x| {
            let r = obj.ratio(&x).expect("probe is normalized");
            (x, r)
        })
        .collect();
    let probe_ratios: Vec<f64> = probes.iter().map(|(_, r)| *r).collect();

    let mut lower = raw_min;
    let mut upper = raw_max;
    if !probes.is_empty() {
        lower = lower.min(probe_ratios[extreme(&probe_ratios, false)]);
        upper = upper.max(probe_ratios[extreme(&probe_ratios, true)]);
    }
    if refine_min {
        lower = lower.min(obj.refine(obj.draw(cfg.seed, imin), false));
        if !probes.is_empty() {
            let k = extreme(&probe_ratios, false);
            lower = lower.min(obj.refine(probes[k].0.clone(), false));
        }
    }
    if refine_max {
        upper = upper.max(obj.refine(obj.draw(cfg.seed, imax), true));
        if !probes.is_empty() {
            let k = extreme(&probe_ratios, true);
            upper = upper.max(obj.refine(probes[k].0.clone(), true));
        }
    }
    Ok(Search {
        raw_min,
        raw_max,
        lower,
        upper,
    })
}

fn synthesis_grid(sys: &SamplingSystem, panel_order: usize) -> Result<Arc<Grid>> {
    let p = sys.exponent().p();
    let bandwidth = p.max(2.0) * sys.center_reach() + 1.0;
    Ok(Arc::new(Grid::composite(
        crate::quadrature::panels_for_bandwidth(bandwidth),
        panel_order,
    )?))
}

/// `x ↦ ‖Σ x_j Ŝ_j‖_{L_p}` over `x ↦ ‖x‖_q`.
fn synthesis_objective(sys: &SamplingSystem, grid: &Arc<Grid>) -> RatioObjective {
    let e = sys.exponent();
    let columns = (0..sys.len())
        .map(|r| {
            grid.nodes()
                .iter()
                .map(|&w| sys.kernel_spectrum_at_rank(r, w))
                .collect()
        })
        .collect();
    RatioObjective {
        num: NormedMap {
            columns: Some(columns),
            weights: Some(grid.weights().to_vec()),
            exponent: e.p(),
        },
        den: NormedMap {
            columns: None,
            weights: None,
            exponent: e.q(),
        },
        dim: sys.len(),
    }
}

/// `f = Σ x_k S_k ↦ ‖{f(t_j)/a_j}‖_q` over `‖f̂‖_{L_p}`.
fn analysis_objective(sys: &SamplingSystem, grid: &Arc<Grid>) -> RatioObjective {
    let e = sys.exponent();
    let n = sys.len();
    let sample_cols = (0..n)
        .map(|k| {
            (0..n)
                .map(|j| sys.kernel_at_rank(k, sys.nodes()[j]) / sys.weights()[j])
                .collect()
        })
        .collect();
    let spectrum_cols = (0..n)
        .map(|r| {
            grid.nodes()
                .iter()
                .map(|&w| sys.kernel_spectrum_at_rank(r, w))
                .collect()
        })
        .collect();
    RatioObjective {
        num: NormedMap {
            columns: Some(sample_cols),
            weights: None,
            exponent: e.q(),
        },
        den: NormedMap {
            columns: Some(spectrum_cols),
            weights: Some(grid.weights().to_vec()),
            exponent: e.p(),
        },
        dim: n,
    }
}

fn estimate(lower: f64, upper: f64, cfg: &EstimatorConfig) -> BoundEstimate {
    BoundEstimate {
        lower,
        upper,
        method: EstimateMethod::RandomSearch,
        trials: cfg.trials,
        seed: cfg.seed,
    }
}

/// Bessel constant of the synthesis map `d ↦ Σ d_j S_j` from the `ℓ_q`
/// sphere into `B_p`. `upper` is the refined maximum; `lower` is the
/// smallest raw ratio seen.
pub fn bessel_bound(sys: &SamplingSystem, cfg: &EstimatorConfig) -> Result<BoundEstimate> {
    let grid = synthesis_grid(sys, cfg.panel_order)?;
    let s = search(&synthesis_objective(sys, &grid), cfg, false, true)?;
    Ok(estimate(s.lower, s.upper, cfg))
}

/// Frame constants of `{M_j}`: extremes of `‖{f(t_j)/a_j}‖_q / ‖f̂‖_p`
/// over `f` in the span of the kernels.
pub fn frame_bounds_m(sys: &SamplingSystem, cfg: &EstimatorConfig) -> Result<BoundEstimate> {
    let grid = synthesis_grid(sys, cfg.panel_order)?;
    let s = search(&analysis_objective(sys, &grid), cfg, true, true)?;
    Ok(estimate(s.lower, s.upper, cfg))
}

/// Riesz constants of `{S_j}`: extremes of `‖Σ c_j Ŝ_j‖_p / ‖c‖_q`.
pub fn riesz_bounds_s(sys: &SamplingSystem, cfg: &EstimatorConfig) -> Result<BoundEstimate> {
    Ok(riesz_with_raw(sys, cfg)?.0)
}

fn riesz_with_raw(sys: &SamplingSystem, cfg: &EstimatorConfig) -> Result<(BoundEstimate, (f64, f64))> {
    let grid = synthesis_grid(sys, cfg.panel_order)?;
    let s = search(&synthesis_objective(sys, &grid), cfg, true, true)?;
    Ok((estimate(s.lower, s.upper, cfg), (s.raw_min, s.raw_max)))
}

/// Outcome of [`minimality_check`].
#[derive(Debug, Clone)]
pub enum Minimality {
    /// Biorthogonal duals `g_k` in the span, with
    /// `residual = max |[f_j, g_k]_p - δ_{jk}|`.
    Minimal {
        duals: Vec<GridFn>,
        residual: f64,
        condition: f64,
    },
    /// The family is numerically dependent at this section.
    NonMinimal {
        condition: f64,
        smallest_singular_value: f64,
    },
}

/// Singular values of the family relative to the largest beyond which it
/// counts as dependent.
const RANK_TOL: f64 = 1e-10;

/// Biorthogonal duals of a finite family in `L_p(I)` within its own span.
///
/// For each `k` the dual is `g_k = u_k / ‖u_k‖_p²`, where
/// `u_k = f_k - Σ_{i≠k} β_i f_i` is the best `L_p` approximation residual
/// (found by damped Newton). Its optimality conditions are `[f_i, u_k] = 0`
/// for `i ≠ k`, and `[f_k, u_k] = ‖u_k‖²`.
pub fn minimality_check(family: &[GridFn], p: f64) -> Result<Minimality> {
    crate::seqspace::Exponent::new(p)?;
    let n = family.len();
    if n == 0 {
        return Err(invalid("empty family"));
    }
    let grid = family[0].grid().clone();
    if family.iter().any(|f| **f.grid() != *grid) {
        return Err(Error::Shape("family members live on different grids".into()));
    }
    let m = grid.order();
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let a = DMatrix::from_fn(m, n, |i, j| family[j].values()[i] * sw[i]);
    let sv = a.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if smax == 0.0 || smin <= RANK_TOL * smax {
        return Ok(Minimality::NonMinimal {
            condition,
            smallest_singular_value: smin,
        });
    }

    let mut duals = Vec::with_capacity(n);
    for k in 0..n {
        let u = best_approximation_residual(family, k, p)?;
        let norm = weighted_lp_norm(grid.weights(), &u, p);
        duals.push(GridFn::new(
            grid.clone(),
            u.iter().map(|v| v / (norm * norm)).collect(),
        )?);
    }
    let mut residual = 0.0f64;
    for (k, g) in duals.iter().enumerate() {
        for (j, f) in family.iter().enumerate() {
            let target = if j == k { 1.0 } else { 0.0 };
            residual = residual.max((sip_fn(f, g, p)? - target).norm());
        }
    }
    Ok(Minimality::Minimal {
        duals,
        residual,
        condition,
    })
}

/// `argmin_β ‖f_k - Σ_{i≠k} β_i f_i‖_p^p`, returned as the residual values.
fn best_approximation_residual(family: &[GridFn], k: usize, p: f64) -> Result<Vec<Complex64>> {
    let w = family[k].grid().weights();
    let target = family[k].values();
    let others: Vec<&[Complex64]> = family
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, f)| f.values())
        .collect();
    if others.is_empty() {
        return Ok(target.to_vec());
    }
    let dim = 2 * others.len();
    // direction of real parameter a: ∂u/∂x_a
    let direction = |a: usize, m: usize| -> Complex64 {
        let f = others[a / 2][m];
        if a.is_multiple_of(2) {
            -f
        } else {
            -Complex64::new(0.0, 1.0) * f
        }
    };
    let residual = |x: &DVector<f64>| -> Vec<Complex64> {
        (0..target.len())
            .map(|m| {
                let mut u = target[m];
                for a in 0..dim {
                    u += x[a] * direction(a, m);
                }
                u
            })
            .collect()
    };
    let objective = |u: &[Complex64]| -> f64 { w.iter().zip(u).map(|(wi, ui)| wi * ui.norm().powf(p)).sum() };

    let mut x = DVector::zeros(dim);
    let mut u = residual(&x);
    let mut fx = objective(&u);
    let scale = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for (m, um) in u.iter().enumerate() {
            let r = um.norm().max(floor);
            let uhat = *um / r;
            let c1 = p * r.powf(p - 2.0) * w[m];
            let dirs: Vec<Complex64> = (0..dim).map(|a| direction(a, m)).collect();
            for a in 0..dim {
                let ra = (um.conj() * dirs[a]).re;
                grad[a] += c1 * ra;
                let pa = (uhat.conj() * dirs[a]).re;
                for b in a..dim {
                    let pb = (uhat.conj() * dirs[b]).re;
                    let h = c1 * ((dirs[a].conj() * dirs[b]).re + (p - 2.0) * pa * pb);
                    hess[(a, b)] += h;
                    if a != b {
                        hess[(b, a)] += h;
                    }
                }
            }
        }
        let gnorm = grad.norm();
        if gnorm <= 1e-15 * fx.max(1e-300) {
            break;
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => -&grad,
        };
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &x + &step * t;
            let uc = residual(&cand);
            let fc = objective(&uc);
            if fc <= fx + 1e-4 * t * slope {
                x = cand;
                u = uc;
                fx = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || (step.norm() * t) <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    Ok(u)
}

/// Samp-side and B-side checks of the converse theorem for one system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub header: ReportHeader,
    pub interpolation_dev: f64,
    #[serde(rename = "biorth_SM_dev")]
    pub biorth_sm_dev: f64,
    #[serde(rename = "biorth_SG_dev")]
    pub biorth_sg_dev: f64,
    pub bessel_b: BoundEstimate,
    pub frame_ab: BoundEstimate,
    pub riesz_ab: BoundEstimate,
    pub formula3_dev: f64,
    pub formula4_dev: f64,
    /// Smallest and largest `‖Σ c_j Ŝ_j‖_p / ‖c‖_q` over the raw draws.
    pub norm_equiv_ratio_range: (f64, f64),
    pub sampling_identity_dev: f64,
    pub riesz_trend: Vec<TrendPoint>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub semantics: String,
    pub p: f64,
    pub q: f64,
    pub n_trunc: usize,
    pub panel_order: usize,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendPoint {
    pub n_trunc: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub estimator: EstimatorConfig,
    pub tol: f64,
}

/// Random functions used for the sampling-identity column of the report.
const IDENTITY_SAMPLES: usize = 200;

pub(crate) fn random_coefficients(sys: &SamplingSystem, seed: u64, trial: usize) -> CoeffSeq {
    let mut rng = trial_rng(seed, trial);
    CoeffSeq::from_fn(sys.half_width(), sys.exponent(), |_| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
    .expect("gaussian draws are finite")
}

pub fn verify(sys: &SamplingSystem, cfg: &VerifyConfig) -> Result<VerificationReport> {
    if !(cfg.tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let est = &cfg.estimator;
    let e = sys.exponent();
    let n = sys.half_width();
    let pair_grid = Arc::new(Grid::composite(
        crate::quadrature::panels_for_bandwidth(sys.spectral_bandwidth() + 1.0),
        est.panel_order,
    )?);

    let interpolation_dev = check_interpolation(sys);
    let biorth_sm_dev = biorth_matrix_sm(sys);
    let biorth_sg_dev = check_sampling_basis(sys, e.p(), &pair_grid)?;

    let bessel_b = bessel_bound(sys, est)?;
    let frame_ab = frame_bounds_m(sys, est)?;
    let (riesz_ab, norm_equiv_ratio_range) = riesz_with_raw(sys, est)?;

    let mut formula3_dev = 0.0f64;
    let mut formula4_dev = 0.0f64;
    for j in sys.indices() {
        formula3_dev = formula3_dev.max(check_formula3(sys, j, &DEFAULT_LATTICE)?);
        formula4_dev = formula4_dev.max(check_formula4(sys, j, &DEFAULT_LATTICE, &pair_grid)?);
    }

    let id_grid = Arc::new(Grid::composite(
        crate::quadrature::panels_for_bandwidth(sys.spectral_bandwidth() + 1.0),
        est.panel_order,
    )?);
    let mut sampling_identity_dev = 0.0f64;
    for i in 0..IDENTITY_SAMPLES.min(est.trials.max(1)) {
        let d = random_coefficients(sys, est.seed, i);
        sampling_identity_dev = sampling_identity_dev.max(sampling_identity_dev_of(sys, &d, &id_grid)?);
    }

    let mut riesz_trend = Vec::new();
    let mut sizes = vec![n / 4, n / 2];
    sizes.retain(|&m| m >= 1 && m < n);
    sizes.dedup();
    for m in sizes {
        let r = riesz_bounds_s(&sys.truncated(m)?, est)?;
        riesz_trend.push(TrendPoint {
            n_trunc: m,
            lower: r.lower,
            upper: r.upper,
        });
    }
    riesz_trend.push(TrendPoint {
        n_trunc: n,
        lower: riesz_ab.lower,
        upper: riesz_ab.upper,
    });

    let pass = [
        interpolation_dev,
        biorth_sm_dev,
        biorth_sg_dev,
        formula3_dev,
        formula4_dev,
    ]
    .iter()
    .all(|&d| d <= cfg.tol);

    Ok(VerificationReport {
        header: ReportHeader {
            semantics: format!(
                "finite section: window |j| <= {n}; statements quantified over the whole space are checked on span{{S_j : |j| <= {n}}}"
            ),
            p: e.p(),
            q: e.q(),
            n_trunc: n,
            panel_order: est.panel_order,
            seed: est.seed,
            trials: est.trials,
            tol: cfg.tol,
        },
        interpolation_dev,
        biorth_sm_dev,
        biorth_sg_dev,
        bessel_b,
        frame_ab,
        riesz_ab,
        formula3_dev,
        formula4_dev,
        norm_equiv_ratio_range,
        sampling_identity_dev,
        riesz_trend,
        pass,
    })
}

fn sampling_identity_dev_of(sys: &SamplingSystem, d: &CoeffSeq, grid: &Arc<Grid>) -> Result<f64> {
    sampling_identity_dev(sys, d, grid)
}
