//! Kramer-type sampling: the system `({S_j}, {t_j}, {a_j})`, truncated
//! reconstruction `f(t) ≈ Σ_{|j|<=N} f(t_j) S_j(t)/a_j`, and the explicit
//! truncation and decay bounds of the sinc instance.
//!
//! Kernels are shifted, scaled sincs `S_j(t) = s_j · sinc(t - c_j)`, so each
//! has the spectrum `s_j e^{-2πi c_j ω}` on `I`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::funcspace::{feature, feature_on, lp_norm_fn, sip_fn, weighted_lp_norm, BandlimitedFn, Grid, GridFn};
use crate::kernels::sinc;
use crate::seqspace::{index_at, rank_of, window_indices, CoeffSeq, Exponent};

/// Terms summed explicitly past the window before the Euler–Maclaurin
/// remainder takes over.
const DIRECT_TAIL_TERMS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSystem {
    half_width: usize,
    exponent: Exponent,
    // all per-index data in rank order
    centers: Vec<f64>,
    scales: Vec<Complex64>,
    nodes: Vec<f64>,
    weights: Vec<Complex64>,
}

impl SamplingSystem {
    /// `S_j = sinc(· - j)`, `t_j = j`, `a_j = 1` on `|j| <= N`.
    pub fn sinc(half_width: usize, exponent: Exponent) -> Self {
        let idx: Vec<f64> = window_indices(half_width).map(|j| j as f64).collect();
        let ones = vec![Complex64::new(1.0, 0.0); idx.len()];
        Self {
            half_width,
            exponent,
            centers: idx.clone(),
            scales: ones.clone(),
            nodes: idx,
            weights: ones,
        }
    }

    /// Sets `a_j` and rescales `S_j` by the same factor, keeping the
    /// interpolation condition `S_j(t_k) = a_j δ_{jk}` intact.
    pub fn with_weights(self, a: impl Fn(i64) -> Complex64) -> Result<Self> {
        let scales: Vec<Complex64> = window_indices(self.half_width).map(&a).collect();
        let mut out = self.with_weights_only(a)?;
        out.scales = scales;
        Ok(out)
    }

    /// Sets `a_j` without touching the kernels.
    pub fn with_weights_only(mut self, a: impl Fn(i64) -> Complex64) -> Result<Self> {
        let weights: Vec<Complex64> = window_indices(self.half_width).map(a).collect();
        if let Some(r) = weights
            .iter()
            .position(|w| *w == Complex64::new(0.0, 0.0) || !w.is_finite())
        {
            return Err(invalid(format!("weight a_{} must be finite and nonzero", index_at(r))));
        }
        self.weights = weights;
        Ok(self)
    }

    /// Moves node `t_j` by `delta`, leaving `S_j` alone.
    pub fn with_node_shift(mut self, j: i64, delta: f64) -> Result<Self> {
        self.check_index(j)?;
        let r = rank_of(j);
        self.nodes[r] += delta;
        if !self.nodes[r].is_finite() {
            return Err(invalid("non-finite node"));
        }
        let t = self.nodes[r];
        if self.nodes.iter().enumerate().any(|(i, &x)| i != r && x == t) {
            return Err(invalid(format!("node t_{j} = {t} coincides with another node")));
        }
        Ok(self)
    }

    /// Same system with another exponent.
    pub fn with_exponent(mut self, exponent: Exponent) -> Self {
        self.exponent = exponent;
        self
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + Clone {
        window_indices(self.half_width)
    }

    pub fn node(&self, j: i64) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.nodes[rank_of(j)])
    }

    pub fn weight(&self, j: i64) -> Result<Complex64> {
        self.check_index(j)?;
        Ok(self.weights[rank_of(j)])
    }

    /// Nodes in rank order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights in rank order.
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `S_j(t)`.
    pub fn eval_kernel(&self, j: i64, t: f64) -> Result<Complex64> {
        self.check_index(j)?;
        Ok(self.kernel_at_rank(rank_of(j), t))
    }

    pub(crate) fn kernel_at_rank(&self, r: usize, t: f64) -> Complex64 {
        self.scales[r] * sinc(t - self.centers[r])
    }

    /// `{S_j(t)}` in rank order.
    pub fn kernel_values(&self, t: f64) -> Vec<Complex64> {
        (0..self.len()).map(|r| self.kernel_at_rank(r, t)).collect()
    }

    /// `Ŝ_j(ω) = s_j e^{-2πi c_j ω}`.
    pub(crate) fn kernel_spectrum_at_rank(&self, r: usize, omega: f64) -> Complex64 {
        self.scales[r] * feature(self.centers[r], omega)
    }

    /// `Ŝ_j` on a grid.
    pub fn kernel_spectrum(&self, j: i64, grid: &Arc<Grid>) -> Result<GridFn> {
        self.check_index(j)?;
        let r = rank_of(j);
        GridFn::from_fn(grid.clone(), |w| self.kernel_spectrum_at_rank(r, w))
    }

    /// Largest `|c_j|` and `|t_j|`, summed: the oscillation a pairing of a
    /// kernel spectrum with a node feature can reach.
    pub fn spectral_bandwidth(&self) -> f64 {
        let c = self.centers.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let t = self.nodes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        c + t
    }

    /// Largest `|c_j|`: the frequency reach of any `Σ x_j Ŝ_j`.
    pub(crate) fn center_reach(&self) -> f64 {
        self.centers.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// The same system restricted to `|j| <= n`.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n > self.half_width {
            return Err(invalid(format!(
                "cannot widen a window from {} to {n}",
                self.half_width
            )));
        }
        let keep = 2 * n + 1;
        Ok(Self {
            half_width: n,
            exponent: self.exponent,
            centers: self.centers[..keep].to_vec(),
            scales: self.scales[..keep].to_vec(),
            nodes: self.nodes[..keep].to_vec(),
            weights: self.weights[..keep].to_vec(),
        })
    }

    fn check_index(&self, j: i64) -> Result<()> {
        if j.unsigned_abs() as usize > self.half_width {
            return Err(Error::OutOfWindow {
                index: j,
                half_width: self.half_width,
            });
        }
        Ok(())
    }
}

/// `max_{j,k} |S_j(t_k) - a_j δ_{jk}|`.
pub fn check_interpolation(sys: &SamplingSystem) -> f64 {
    let n = sys.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let target = if j == k {
                sys.weights[j]
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((sys.kernel_at_rank(j, sys.nodes[k]) - target).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionResult {
    pub value: Complex64,
    /// Window half-width `N` of the truncated series.
    pub truncation: usize,
    /// `(1/π)(Σ_{|j|>N} |t-j|^{-q})^{1/q}`, the `ℓ_q` mass of the unit-spaced
    /// sinc family left out of the window.
    pub tail_bound: f64,
    /// `Σ |f(t_j) S_j(t)/a_j|`.
    pub absolute_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumOrder {
    /// `0, -1, 1, -2, 2, …`
    #[default]
    Rank,
    /// `-N, …, N`
    Ascending,
}

/// Truncated sampling series at `t` from raw samples `f(t_j)`.
pub fn reconstruct(sys: &SamplingSystem, samples: &CoeffSeq, t: f64) -> Result<ReconstructionResult> {
    reconstruct_ordered(sys, samples, t, SumOrder::Rank)
}

pub fn reconstruct_ordered(
    sys: &SamplingSystem,
    samples: &CoeffSeq,
    t: f64,
    order: SumOrder,
) -> Result<ReconstructionResult> {
    if samples.half_width() != sys.half_width() {
        return Err(Error::Shape(format!(
            "{} samples for a system of {} nodes",
            samples.len(),
            sys.len()
        )));
    }
    let term = |r: usize| samples.entries()[r] * sys.kernel_at_rank(r, t) / sys.weights[r];
    let ranks: Vec<usize> = match order {
        SumOrder::Rank => (0..sys.len()).collect(),
        SumOrder::Ascending => {
            let n = sys.half_width as i64;
            (-n..=n).map(rank_of).collect()
        }
    };
    let mut value = Complex64::new(0.0, 0.0);
    let mut absolute_sum = 0.0;
    for r in ranks {
        let v = term(r);
        value += v;
        absolute_sum += v.norm();
    }
    Ok(ReconstructionResult {
        value,
        truncation: sys.half_width,
        tail_bound: tail_bound(t, sys.half_width, sys.exponent.q()),
        absolute_sum,
    })
}

/// `f(t_j)` for every node, in rank order. Closed-form spectra are
/// evaluated analytically, others by quadrature on `grid`.
pub fn sample_at_nodes(sys: &SamplingSystem, f: &BandlimitedFn, grid: &Arc<Grid>) -> Result<CoeffSeq> {
    let values = sys
        .nodes
        .iter()
        .map(|&t| crate::funcspace::bandlimited_eval(f, t, grid))
        .collect::<Result<Vec<_>>>()?;
    CoeffSeq::from_rank_order(sys.half_width, values, f.exponent)
}

/// Reads samples written as `j,t_j,re,im` rows.
pub fn read_samples_csv<R: Read>(input: R, exponent: Exponent) -> Result<CoeffSeq> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Shape(format!("expected 4 columns, got {}", rec.len())));
        }
        let j: i64 = rec[0].trim().parse().map_err(|e| invalid(format!("index: {e}")))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| invalid(format!("column {i}: {e}")))
        };
        rows.push((j, Complex64::new(num(2)?, num(3)?)));
    }
    let half_width = rows.iter().map(|(j, _)| j.unsigned_abs() as usize).max().unwrap_or(0);
    if rows.len() != 2 * half_width + 1 {
        return Err(Error::Shape(format!(
            "{} rows do not cover the window |j| <= {half_width}",
            rows.len()
        )));
    }
    let mut seq = CoeffSeq::zeros(half_width, exponent);
    for (j, v) in rows {
        seq.set(j, v)?;
    }
    Ok(seq)
}

/// Writes samples as `j,t_j,re,im` rows in rank order.
pub fn write_samples_csv<W: Write>(sys: &SamplingSystem, samples: &CoeffSeq, out: W) -> Result<()> {
    if samples.half_width() != sys.half_width() {
        return Err(Error::Shape("samples and system windows differ".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "t_j", "re", "im"])?;
    for (r, (j, v)) in samples.iter().enumerate() {
        w.write_record([
            j.to_string(),
            crate::fmt_f64(sys.nodes[r]),
            crate::fmt_f64(v.re),
            crate::fmt_f64(v.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `Σ_{k>=start} (k - shift)^{-s}` for `start - shift > 0` and `s > 1`:
/// direct summation of a block of terms, then the Euler–Maclaurin
/// remainder through the third derivative.
pub(crate) fn shifted_zeta_tail(start: i64, shift: f64, s: f64) -> f64 {
    debug_assert!(start as f64 - shift > 0.0 && s > 1.0);
    let mut sum = 0.0;
    let end = start + DIRECT_TAIL_TERMS as i64;
    for k in start..end {
        sum += (k as f64 - shift).powf(-s);
    }
    // Σ_{k>=end} g(k), g(x) = (x - shift)^{-s}
    let x = end as f64 - shift;
    let g = x.powf(-s);
    let integral = x.powf(1.0 - s) / (s - 1.0);
    let g1 = -s * x.powf(-s - 1.0);
    let g3 = -s * (s + 1.0) * (s + 2.0) * x.powf(-s - 3.0);
    sum + integral + 0.5 * g - g1 / 12.0 + g3 / 720.0
}

/// `(1/π)(Σ_{|j|>N} |t-j|^{-q})^{1/q}`, the `ℓ_q` envelope of the sinc
/// terms a window of half-width `N` leaves out.
///
/// Terms with `|t-j| < 1/π` are capped at 1 (the sinc bound), so the value
/// stays finite for `|t| > N`.
pub fn tail_bound(t: f64, half_width: usize, q: f64) -> f64 {
    let n = half_width as i64;
    let mut sum = 0.0;
    // j > N: |t - j| = j - t; terms with j - t small are handled directly
    let side = |sign: f64| {
        // indices j = sign·k, k > N; distance |sign·k - t| = k - sign·t
        let shift = sign * t;
        let mut k = n + 1;
        let mut acc = 0.0;
        while (k as f64 - shift) <= 1.0 {
            let d = (k as f64 - shift).abs();
            acc += if d < 1.0 / PI { 1.0 } else { (PI * d).powf(-q) };
            k += 1;
        }
        acc + PI.powf(-q) * shifted_zeta_tail(k, shift, q)
    };
    sum += side(1.0);
    sum += side(-1.0);
    sum.powf(1.0 / q)
}

/// The exact truncation factor `(∫_I |Σ_{|j|>N} Ĝ_j(ω) G_j(t)|^q dω)^{1/q}`
/// for the unit-spaced sinc family, evaluated as the `L_q` distance between
/// `e^{-2πitω}` and its partial Fourier sum of degree `N`.
pub fn tail_factor(t: f64, half_width: usize, q: f64, panel_order: usize) -> Result<f64> {
    let bandwidth = half_width as f64 + t.abs() + 1.0;
    let panels = crate::quadrature::panels_for_bandwidth(bandwidth);
    let grid = Grid::composite(panels, panel_order)?;
    let n = half_width as i64;
    let coeffs: Vec<(f64, f64)> = (-n..=n).map(|j| (j as f64, sinc(t - j as f64))).collect();
    let values: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&w| {
            let partial: Complex64 = coeffs.iter().map(|&(j, c)| c * feature(j, w)).sum();
            feature(t, w) - partial
        })
        .collect();
    Ok(weighted_lp_norm(grid.weights(), &values, q))
}

/// Max deviation from the identity of `[a_j^{-1} S_j, G_{t_k}]`, computed in
/// the spectrum picture as `[Ŝ_j/a_j, Φ(t_k)]_p`.
pub fn check_sampling_basis(sys: &SamplingSystem, p: f64, grid: &Arc<Grid>) -> Result<f64> {
    Exponent::new(p)?;
    let n = sys.len();
    let spectra: Vec<GridFn> = (0..n)
        .map(|r| GridFn::from_fn(grid.clone(), |w| sys.kernel_spectrum_at_rank(r, w) / sys.weights[r]))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for k in 0..n {
        let g = feature_on(grid, sys.nodes[k]);
        for (j, s) in spectra.iter().enumerate() {
            let v = sip_fn(s, &g, p)?;
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayEntry {
    pub j: i64,
    /// `|f(j)|^p`
    pub lhs: f64,
    /// `C(p) ‖f̂'‖_p^p / |j|^p`
    pub rhs: f64,
}

/// Integration-by-parts decay bound for integer samples of a band-limited
/// function with differentiable spectrum.
///
/// From `f(j) = (-1)^j (f̂(1/2) - f̂(-1/2))/(2πij) - (1/(2πij)) ∫ f̂' e^{2πijω}`:
/// `|f(j)|^p <= ((β + ‖f̂'‖_1)/(2π))^p / |j|^p` with `β = |f̂(1/2) - f̂(-1/2)|`,
/// written as `C(p) ‖f̂'‖_p^p / |j|^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCheck {
    pub p: f64,
    pub boundary_jump: f64,
    pub derivative_l1: f64,
    pub derivative_lp: f64,
    /// `None` when `f̂' ≡ 0`; then the bound is `(β/(2π|j|))^p` directly.
    pub c_p: Option<f64>,
    pub entries: Vec<DecayEntry>,
    /// `(Σ_{|j|<=J} |f(j)|^p)^{1/p}` for `J = 0, 1, …`.
    pub partial_lp_norms: Vec<f64>,
    /// `max(‖f̂‖_p, (C(p)‖f̂'‖_p^p)^{1/p}) (1 + 2ζ(p))^{1/p}`.
    pub lp_norm_bound: f64,
}

impl DecayCheck {
    pub fn violations(&self) -> Vec<i64> {
        self.entries.iter().filter(|e| e.lhs > e.rhs).map(|e| e.j).collect()
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
            && self.partial_lp_norms.windows(2).all(|w| w[1] >= w[0])
            && self.partial_lp_norms.iter().all(|&v| v <= self.lp_norm_bound)
    }
}

pub fn sample_decay_check(f: &BandlimitedFn, p: f64, max_index: usize, grid: &Arc<Grid>) -> Result<DecayCheck> {
    if max_index < 1 {
        return Err(invalid("decay check needs J >= 1"));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("decay exponent must be finite and >= 1, got {p}")));
    }
    let spec = &f.spectrum;
    let edge = |w: f64| spec.value(w).ok_or_else(|| Error::UnsupportedSpectrum(spec.name()));
    let boundary_jump = (edge(0.5)? - edge(-0.5)?).norm();
    let deriv: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&w| spec.derivative(w))
        .collect::<Result<_>>()?;
    let derivative_l1 = weighted_lp_norm(grid.weights(), &deriv, 1.0);
    let derivative_lp = weighted_lp_norm(grid.weights(), &deriv, p);
    let numerator = ((boundary_jump + derivative_l1) / (2.0 * PI)).powf(p);
    let c_p = (derivative_lp > 0.0).then(|| numerator / derivative_lp.powf(p));

    let sample = |j: i64| -> Result<f64> { Ok(crate::funcspace::bandlimited_eval(f, j as f64, grid)?.norm().powf(p)) };
    let mut entries = Vec::with_capacity(2 * max_index);
    for k in 1..=max_index as i64 {
        for j in [-k, k] {
            let rhs = match c_p {
                Some(c) => c * derivative_lp.powf(p) / (j.abs() as f64).powf(p),
                None => numerator / (j.abs() as f64).powf(p),
            };
            entries.push(DecayEntry {
                j,
                lhs: sample(j)?,
                rhs,
            });
        }
    }
    let mut acc = sample(0)?;
    let mut partial_lp_norms = vec![acc.powf(1.0 / p)];
    for pair in entries.chunks(2) {
        acc += pair[0].lhs + pair[1].lhs;
        partial_lp_norms.push(acc.powf(1.0 / p));
    }
    let spec_norm = lp_norm_fn(&spec.on_grid(grid)?, p)?;
    let zeta = if p > 1.0 {
        shifted_zeta_tail(1, 0.0, p)
    } else {
        f64::INFINITY
    };
    let lp_norm_bound = spec_norm.max(numerator.powf(1.0 / p)) * (1.0 + 2.0 * zeta).powf(1.0 / p);
    Ok(DecayCheck {
        p,
        boundary_jump,
        derivative_l1,
        derivative_lp,
        c_p,
        entries,
        partial_lp_norms,
        lp_norm_bound,
    })
}
