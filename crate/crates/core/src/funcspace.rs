//! `L_p(I)` on `I = [-1/2, 1/2]`, discretized by composite quadrature, and
//! the band-limited functions synthesized from spectra on `I`.
//!
//! A band-limited `f` is stored through its spectrum `f̂ ∈ L_p(I)` and
//! evaluated by `f(t) = ∫_I f̂(ω) e^{2πitω} dω`. Its norm is `‖f̂‖_{L_p(I)}`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::kernels::sinc;
use crate::quadrature::{self, DEFAULT_PANELS};
use crate::seqspace::{check_finite, CoeffSeq, Exponent};

/// Tolerance on `Σ weights = |I|`.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Quadrature nodes and positive weights on `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// `panels` Gauss–Legendre panels of `per_panel` nodes each.
    pub fn composite(panels: usize, per_panel: usize) -> Result<Self> {
        let (nodes, weights) = quadrature::composite_rule(panels, per_panel)?;
        Self::from_parts(nodes, weights)
    }

    /// A 16-node-per-panel grid with enough panels to integrate
    /// oscillations of up to `bandwidth` cycles over `I`.
    pub fn for_bandwidth(bandwidth: f64) -> Self {
        Self::composite(
            quadrature::panels_for_bandwidth(bandwidth),
            quadrature::DEFAULT_PANEL_ORDER,
        )
        .expect("default panel order is valid")
    }

    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Shape(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.len() < 2 {
            return Err(invalid("a grid needs at least two nodes"));
        }
        if let Some(x) = nodes.iter().find(|x| !(x.abs() < 0.5)) {
            return Err(invalid(format!("node {x} is not strictly inside [-1/2, 1/2]")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(invalid(format!("weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node count `M`.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_I g` by the rule.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> Complex64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

/// The default grid: [`DEFAULT_PANELS`] panels of `order` nodes.
pub fn make_grid(order: usize) -> Result<Grid> {
    Grid::composite(DEFAULT_PANELS, order)
}

/// Complex values on the nodes of a shared grid.
#[derive(Debug, Clone)]
pub struct GridFn {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl GridFn {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.order() {
            return Err(Error::Shape(format!(
                "{} values for a grid of order {}",
                values.len(),
                grid.order()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_grid(self, other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// Rows `node,weight,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "weight", "re", "im"])?;
        for ((x, wt), v) in self.grid.nodes().iter().zip(self.grid.weights()).zip(&self.values) {
            w.write_record([
                crate::fmt_f64(*x),
                crate::fmt_f64(*wt),
                crate::fmt_f64(v.re),
                crate::fmt_f64(v.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`GridFn::write_csv`]; the grid is
    /// rebuilt from the node and weight columns and validated.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let (mut nodes, mut weights, mut values) = (Vec::new(), Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::Shape(format!("expected 4 columns, got {}", rec.len())));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("column {i}: {e}")))
            };
            nodes.push(num(0)?);
            weights.push(num(1)?);
            values.push(Complex64::new(num(2)?, num(3)?));
        }
        let grid = Arc::new(Grid::from_parts(nodes, weights)?);
        Self::new(grid, values)
    }
}

fn same_grid(a: &GridFn, b: &GridFn) -> Result<()> {
    if Arc::ptr_eq(&a.grid, &b.grid) || a.grid == b.grid {
        Ok(())
    } else {
        Err(Error::Shape("grid functions live on different grids".into()))
    }
}

pub fn lp_norm_fn(f: &GridFn, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("norm exponent must be finite and >= 1, got {p}")));
    }
    Ok(weighted_lp_norm(f.grid.weights(), &f.values, p))
}

/// `(Σ w_m |v_m|^p)^{1/p}`, scaled by the largest modulus.
pub(crate) fn weighted_lp_norm(weights: &[f64], values: &[Complex64], p: f64) -> f64 {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * (v.norm() / scale).powf(p))
        .sum();
    scale * sum.powf(1.0 / p)
}

/// The duality map of `L_p(I)` applied pointwise: `conj(g)|g|^{p-2}/‖g‖_p^{p-2}`,
/// zero where `g` vanishes.
pub(crate) fn duality_density(weights: &[f64], g: &[Complex64], p: f64) -> Vec<Complex64> {
    let norm = weighted_lp_norm(weights, g, p);
    g.iter()
        .map(|&v| {
            let m = v.norm();
            if m == 0.0 || norm == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                v.conj() * (m / norm).powf(p - 2.0)
            }
        })
        .collect()
}

/// `[f, g]_p = ∫_I f · conj(g)|g|^{p-2}/‖g‖_p^{p-2} dm`.
pub fn sip_fn(f: &GridFn, g: &GridFn, p: f64) -> Result<Complex64> {
    same_grid(f, g)?;
    Exponent::new(p)?;
    let star = duality_density(g.grid.weights(), &g.values, p);
    Ok(f.grid
        .weights()
        .iter()
        .zip(&f.values)
        .zip(&star)
        .map(|((w, a), b)| w * a * b)
        .sum())
}

/// `Φ(t)(ω) = e^{-2πitω}`, the feature map into `L_p(I)`.
pub fn feature(t: f64, omega: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * t * omega)
}

/// `Φ(t)` sampled on a grid.
pub fn feature_on(grid: &Arc<Grid>, t: f64) -> GridFn {
    GridFn::from_fn(grid.clone(), |w| feature(t, w)).expect("unimodular values are finite")
}

/// Spectra on `I`. All but [`Spectrum::Sampled`] have closed-form
/// inverse transforms and derivatives, which the tests use as oracles.
#[derive(Debug, Clone)]
pub enum Spectrum {
    /// `f̂ ≡ 1`, so `f = sinc`.
    Const,
    /// `f̂(ω) = e^{2πi t₀ ω}`, so `f(t) = sinc(t + t₀)`.
    Shift(f64),
    /// `f̂(ω) = cos(πω)`, so `f(t) = (sinc(t + 1/2) + sinc(t - 1/2))/2`.
    CosWindow,
    /// `f̂(ω) = Σ_k c_k e^{-2πikω}`, so `f(t) = Σ_k c_k sinc(t - k)` and
    /// `f(k) = c_k`.
    TrigPoly(CoeffSeq),
    /// Values on a grid, no closed form.
    Sampled(GridFn),
}

impl Spectrum {
    /// Parses a registry name: `const`, `shift:<t0>`, `coswin`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "const" => Ok(Self::Const),
            "coswin" => Ok(Self::CosWindow),
            _ => match name.strip_prefix("shift:") {
                Some(arg) => {
                    let t0: f64 = arg
                        .trim()
                        .parse()
                        .map_err(|_| Error::UnknownSpectrum(name.to_string()))?;
                    if !t0.is_finite() {
                        return Err(Error::UnknownSpectrum(name.to_string()));
                    }
                    Ok(Self::Shift(t0))
                }
                None => Err(Error::UnknownSpectrum(name.to_string())),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Const => "const".into(),
            Self::Shift(t0) => format!("shift:{t0}"),
            Self::CosWindow => "coswin".into(),
            Self::TrigPoly(c) => format!("trigpoly:{}", c.half_width()),
            Self::Sampled(_) => "sampled".into(),
        }
    }

    /// `f̂(ω)`; `None` for sampled spectra.
    pub fn value(&self, omega: f64) -> Option<Complex64> {
        Some(match self {
            Self::Const => Complex64::new(1.0, 0.0),
            Self::Shift(t0) => Complex64::from_polar(1.0, 2.0 * PI * t0 * omega),
            Self::CosWindow => Complex64::new((PI * omega).cos(), 0.0),
            Self::TrigPoly(c) => c.iter().map(|(k, ck)| ck * feature(k as f64, omega)).sum(),
            Self::Sampled(_) => return None,
        })
    }

    /// `f̂'(ω)` for closed-form spectra.
    pub fn derivative(&self, omega: f64) -> Result<Complex64> {
        Ok(match self {
            Self::Const => Complex64::new(0.0, 0.0),
            Self::Shift(t0) => Complex64::new(0.0, 2.0 * PI * t0) * Complex64::from_polar(1.0, 2.0 * PI * t0 * omega),
            Self::CosWindow => Complex64::new(-PI * (PI * omega).sin(), 0.0),
            Self::TrigPoly(c) => c
                .iter()
                .map(|(k, ck)| ck * Complex64::new(0.0, -2.0 * PI * k as f64) * feature(k as f64, omega))
                .sum(),
            Self::Sampled(_) => return Err(Error::UnsupportedSpectrum(self.name())),
        })
    }

    /// `f(t)` from the analytic inverse transform, when one exists.
    pub fn closed_form(&self, t: f64) -> Option<Complex64> {
        let re = |x: f64| Complex64::new(x, 0.0);
        Some(match self {
            Self::Const => re(sinc(t)),
            Self::Shift(t0) => re(sinc(t + t0)),
            Self::CosWindow => re(0.5 * (sinc(t + 0.5) + sinc(t - 0.5))),
            Self::TrigPoly(c) => c.iter().map(|(k, ck)| ck * sinc(t - k as f64)).sum(),
            Self::Sampled(_) => return None,
        })
    }

    /// `f̂` on `grid`. A sampled spectrum must already live on that grid.
    pub fn on_grid(&self, grid: &Arc<Grid>) -> Result<GridFn> {
        match self {
            Self::Sampled(g) => {
                if Arc::ptr_eq(g.grid(), grid) || **g.grid() == **grid {
                    Ok(g.clone())
                } else {
                    Err(Error::Shape("sampled spectrum lives on a different grid".into()))
                }
            }
            _ => GridFn::from_fn(grid.clone(), |w| self.value(w).expect("closed-form spectrum")),
        }
    }

    /// Largest frequency (cycles over `I`) present in the spectrum, used
    /// to size quadrature grids.
    pub fn bandwidth(&self) -> f64 {
        match self {
            Self::Const | Self::Sampled(_) => 0.0,
            Self::Shift(t0) => t0.abs(),
            Self::CosWindow => 0.5,
            Self::TrigPoly(c) => c.half_width() as f64,
        }
    }
}

/// A member of the band-limited space `B_p`, held by its spectrum.
#[derive(Debug, Clone)]
pub struct BandlimitedFn {
    pub spectrum: Spectrum,
    pub exponent: Exponent,
}

impl BandlimitedFn {
    pub fn new(spectrum: Spectrum, exponent: Exponent) -> Self {
        Self { spectrum, exponent }
    }

    /// `‖f‖_{B_p} = ‖f̂‖_{L_p(I)}`.
    pub fn norm(&self, grid: &Arc<Grid>) -> Result<f64> {
        lp_norm_fn(&self.spectrum.on_grid(grid)?, self.exponent.p())
    }
}

/// `f(t)`: the closed form when the spectrum has one, otherwise the
/// quadrature of `f̂(ω) e^{2πitω}`.
pub fn bandlimited_eval(f: &BandlimitedFn, t: f64, grid: &Arc<Grid>) -> Result<Complex64> {
    match f.spectrum.closed_form(t) {
        Some(v) => Ok(v),
        None => bandlimited_eval_quadrature(f, t, grid),
    }
}

/// `f(t) = ∫_I f̂(ω) e^{2πitω} dω` by quadrature only.
pub fn bandlimited_eval_quadrature(f: &BandlimitedFn, t: f64, grid: &Arc<Grid>) -> Result<Complex64> {
    let spec = f.spectrum.on_grid(grid)?;
    Ok(quadrature_eval(&spec, t))
}

pub(crate) fn quadrature_eval(spec: &GridFn, t: f64) -> Complex64 {
    spec.grid
        .nodes()
        .iter()
        .zip(spec.grid.weights())
        .zip(&spec.values)
        .map(|((&w, &wt), &v)| wt * v * feature(-t, w))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> Arc<Grid> {
        Arc::new(make_grid(16).unwrap())
    }

    fn one(_: f64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn grid_integrates_simple_moments() {
        let g = Grid::composite(1, 2).unwrap();
        assert_abs_diff_eq!(g.integrate(one).re, 1.0, epsilon = 1e-15);
        let g = grid();
        assert_abs_diff_eq!(g.integrate(|w| Complex64::new(w, 0.0)).norm(), 0.0, epsilon = 1e-16);
        // ∫ e^{2πiω} over I = sinc(1) = 0
        assert_abs_diff_eq!(g.integrate(|w| feature(-1.0, w)).norm(), 0.0, epsilon = 1e-15);
        assert!(make_grid(1).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::from_parts(vec![0.0, 0.5], vec![0.5, 0.5]).is_err());
        assert!(Grid::from_parts(vec![-0.2, 0.2], vec![0.5, 0.4]).is_err());
        assert!(Grid::from_parts(vec![-0.2, 0.2], vec![1.5, -0.5]).is_err());
        assert!(Grid::from_parts(vec![-0.2, 0.2], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn norm_examples() {
        let g = grid();
        for p in [1.0, 1.5, 2.0, 3.0, 7.5] {
            let f = GridFn::from_fn(g.clone(), one).unwrap();
            assert_abs_diff_eq!(lp_norm_fn(&f, p).unwrap(), 1.0, epsilon = 1e-14);
            let f = feature_on(&g, 3.7);
            assert_abs_diff_eq!(lp_norm_fn(&f, p).unwrap(), 1.0, epsilon = 1e-14);
        }
        let f = GridFn::from_fn(g, |w| Complex64::new(w, 0.0)).unwrap();
        assert_abs_diff_eq!(lp_norm_fn(&f, 2.0).unwrap(), (1.0f64 / 12.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn sip_examples() {
        let g = grid();
        let w = GridFn::from_fn(g.clone(), |x| Complex64::new(x, 0.5 * x * x)).unwrap();
        for p in [1.5, 2.0, 3.0, 4.0] {
            let n = lp_norm_fn(&w, p).unwrap();
            assert_abs_diff_eq!(sip_fn(&w, &w, p).unwrap().re, n * n, epsilon = 1e-12);
        }
        // p = 2: ∫ e^{2πisω} e^{-2πitω} = sinc(s - t)
        let (s, t) = (0.3, 1.7);
        let f = feature_on(&g, -s);
        let h = feature_on(&g, -t);
        assert_abs_diff_eq!(sip_fn(&f, &h, 2.0).unwrap().re, sinc(s - t), epsilon = 1e-14);
        // p = 4, f ≡ 1, g = ω: odd integrand
        let f = GridFn::from_fn(g.clone(), one).unwrap();
        let h = GridFn::from_fn(g, |x| Complex64::new(x, 0.0)).unwrap();
        assert_abs_diff_eq!(sip_fn(&f, &h, 4.0).unwrap().norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sip_rejects_grid_mismatch() {
        let a = feature_on(&grid(), 0.0);
        let b = feature_on(&Arc::new(make_grid(8).unwrap()), 0.0);
        assert!(matches!(sip_fn(&a, &b, 2.0), Err(Error::Shape(_))));
    }

    #[test]
    fn bandlimited_eval_examples() {
        let g = grid();
        let e = Exponent::new(2.0).unwrap();
        let f = BandlimitedFn::new(Spectrum::Const, e);
        assert_abs_diff_eq!(bandlimited_eval(&f, 0.0, &g).unwrap().re, 1.0);
        assert_abs_diff_eq!(
            bandlimited_eval_quadrature(&f, 0.0, &g).unwrap().re,
            1.0,
            epsilon = 1e-15
        );
        for j in 1..6 {
            assert_abs_diff_eq!(
                bandlimited_eval_quadrature(&f, j as f64, &g).unwrap().norm(),
                0.0,
                epsilon = 1e-14
            );
            assert_eq!(bandlimited_eval(&f, -(j as f64), &g).unwrap().norm(), 0.0);
        }
        let t0 = 0.37;
        let f = BandlimitedFn::new(Spectrum::Shift(t0), e);
        for t in [-3.2, 0.0, 0.5, 4.4] {
            let q = bandlimited_eval_quadrature(&f, t, &g).unwrap();
            assert_abs_diff_eq!(q.re, sinc(t + t0), epsilon = 1e-13);
            assert_abs_diff_eq!(q.im, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        let g = grid();
        let e = Exponent::new(3.0).unwrap();
        let c = CoeffSeq::from_fn(3, e, |k| Complex64::new(1.0 / (1.0 + k.abs() as f64), 0.3 * k as f64)).unwrap();
        for spec in [
            Spectrum::Const,
            Spectrum::Shift(-1.25),
            Spectrum::CosWindow,
            Spectrum::TrigPoly(c),
        ] {
            let f = BandlimitedFn::new(spec, e);
            for t in [-7.3, -1.0, 0.0, 0.2, 2.5, 9.9] {
                let a = bandlimited_eval(&f, t, &g).unwrap();
                let b = bandlimited_eval_quadrature(&f, t, &g).unwrap();
                assert!((a - b).norm() < 1e-12, "{} at {t}: {a} vs {b}", f.spectrum.name());
            }
        }
    }

    #[test]
    fn trig_poly_samples_are_its_coefficients() {
        let e = Exponent::new(2.0).unwrap();
        let c = CoeffSeq::from_fn(4, e, |k| Complex64::new(k as f64, 1.0)).unwrap();
        let s = Spectrum::TrigPoly(c.clone());
        for (k, ck) in c.iter() {
            assert_eq!(s.closed_form(k as f64).unwrap(), ck);
        }
    }

    #[test]
    fn spectrum_registry() {
        assert!(matches!(Spectrum::parse("const"), Ok(Spectrum::Const)));
        assert!(matches!(Spectrum::parse("coswin"), Ok(Spectrum::CosWindow)));
        assert!(matches!(Spectrum::parse("shift:0.5"), Ok(Spectrum::Shift(t)) if t == 0.5));
        assert!(matches!(Spectrum::parse("shift:x"), Err(Error::UnknownSpectrum(_))));
        assert!(matches!(Spectrum::parse("gauss"), Err(Error::UnknownSpectrum(_))));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for spec in [Spectrum::Const, Spectrum::Shift(0.7), Spectrum::CosWindow] {
            for w in [-0.4, -0.1, 0.0, 0.33] {
                let fd = (spec.value(w + h).unwrap() - spec.value(w - h).unwrap()) / (2.0 * h);
                assert!((fd - spec.derivative(w).unwrap()).norm() < 1e-7);
            }
        }
        let g = grid();
        let sampled = Spectrum::Sampled(feature_on(&g, 0.0));
        assert!(matches!(sampled.derivative(0.0), Err(Error::UnsupportedSpectrum(_))));
    }

    #[test]
    fn csv_round_trip() {
        let g = Arc::new(make_grid(4).unwrap());
        let f = GridFn::from_fn(g, |w| Complex64::new(w.cos(), w.sin() / 3.0)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = GridFn::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(**back.grid(), **f.grid());
    }
}
