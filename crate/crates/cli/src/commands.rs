//! The four subcommands. Each returns its rendered output and whether the
//! assertions it makes held.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use sip_sampling::funcspace::{bandlimited_eval, Grid, GridFn};
use sip_sampling::quadrature::panels_for_bandwidth;
use sip_sampling::sampling::{reconstruct, sample_at_nodes, tail_factor};
use sip_sampling::verifier::{
    bessel_bound, biorth_matrix, frame_bounds_m, riesz_bounds_s, samp_gram_matrix, verify, write_matrix_csv,
    BoundEstimate, EstimatorConfig, VerificationReport, VerifyConfig,
};
use sip_sampling::{fmt_f64, kernel_g, sinc, BandlimitedFn, KernelBackend, Spectrum};

use crate::config::{Format, RunConfig};
use crate::{Failure, UsageError};

/// Window half-widths swept by `reconstruct`.
pub const SWEEP_WINDOWS: [usize; 5] = [4, 8, 16, 32, 64];

/// Rendered output plus pass/fail.
pub struct Outcome {
    pub body: String,
    pub pass: bool,
    pub summary: String,
}

fn grid(bandwidth: f64, order: usize) -> Result<Arc<Grid>, Failure> {
    Ok(Arc::new(Grid::composite(panels_for_bandwidth(bandwidth), order)?))
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(sip_sampling::Error::from)?;
    for row in rows {
        w.write_record(&row).map_err(sip_sampling::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| UsageError(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of ascii numbers"))
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct KernelRow {
    s: f64,
    t: f64,
    closed: f64,
    quadrature_re: f64,
    quadrature_im: f64,
    abs_diff: f64,
}

#[derive(Serialize)]
struct KernelDump<'a> {
    p: f64,
    grid_order: usize,
    tol: f64,
    max_diff: f64,
    pass: bool,
    rows: &'a [KernelRow],
}

/// Closed-form `sinc(t-s)` against the quadrature s.i.p. of features.
pub fn cmd_kernel(cfg: &RunConfig, s_values: &[f64], t_values: &[f64]) -> Result<Outcome, Failure> {
    let span = s_values
        .iter()
        .flat_map(|s| t_values.iter().map(move |t| (t - s).abs()))
        .fold(0.0, f64::max);
    let kernel = kernel_g(cfg.p, KernelBackend::Quadrature)?.with_grid(grid(span + 1.0, cfg.grid_order)?);
    let mut rows = Vec::with_capacity(s_values.len() * t_values.len());
    for &s in s_values {
        for &t in t_values {
            let closed = sinc(t - s);
            let quad = kernel.eval(s, t);
            let abs_diff = (quad - closed).norm();
            rows.push(KernelRow {
                s,
                t,
                closed,
                quadrature_re: quad.re,
                quadrature_im: quad.im,
                abs_diff,
            });
        }
    }
    let max_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    let pass = max_diff <= cfg.tol;
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_text(
            &["s", "t", "closed", "quadrature_re", "quadrature_im", "abs_diff"],
            rows.iter().map(|r| {
                [r.s, r.t, r.closed, r.quadrature_re, r.quadrature_im, r.abs_diff]
                    .map(fmt_f64)
                    .to_vec()
            }),
        )?,
        Format::Json => json_text(&KernelDump {
            p: cfg.p,
            grid_order: cfg.grid_order,
            tol: cfg.tol,
            max_diff,
            pass,
            rows: &rows,
        }),
    };
    Ok(Outcome {
        body,
        pass,
        summary: format!("kernel: {} points, max |diff| = {max_diff:e}", rows.len()),
    })
}

#[derive(Serialize)]
struct ReconRow {
    t: f64,
    n: usize,
    value_re: f64,
    value_im: f64,
    exact_re: f64,
    exact_im: f64,
    abs_err: f64,
    /// `‖f̂‖_p · tail_factor(t, N, q)`
    tail_bound: f64,
    /// `(1/π)(Σ_{|j|>N} |t-j|^{-q})^{1/q}`, the sinc envelope.
    envelope: f64,
    within_bound: bool,
}

#[derive(Serialize)]
struct ReconDump<'a> {
    spectrum: String,
    p: f64,
    spectrum_norm: f64,
    asserted: bool,
    pass: bool,
    rows: &'a [ReconRow],
}

/// Truncated sampling series for `N ∈ SWEEP_WINDOWS` at every `t`.
///
/// Rows are ordered by `t`, then `N`. A spectrum read from CSV has no
/// closed form, so its rows are reported but not asserted.
pub fn cmd_reconstruct(
    cfg: &RunConfig,
    spectrum: &str,
    spectrum_csv: Option<&Path>,
    t_values: &[f64],
) -> Result<Outcome, Failure> {
    let spectrum = match spectrum_csv {
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| UsageError(format!("cannot open spectrum {}: {e}", path.display())))?;
            Spectrum::Sampled(GridFn::read_csv(file)?)
        }
        None => Spectrum::parse(spectrum)?,
    };
    let asserted = !matches!(spectrum, Spectrum::Sampled(_));
    let e = cfg.exponent();
    let f = BandlimitedFn::new(spectrum, e);
    let reach = t_values.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let g = match &f.spectrum {
        Spectrum::Sampled(s) => s.grid().clone(),
        other => grid(other.bandwidth() + reach + 1.0, cfg.grid_order)?,
    };
    let norm = f.norm(&g)?;
    let systems = SWEEP_WINDOWS
        .iter()
        .map(|&n| cfg.system_with(n))
        .collect::<Result<Vec<_>, _>>()?;
    let samples = systems
        .iter()
        .map(|s| sample_at_nodes(s, &f, &g))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(t_values.len() * SWEEP_WINDOWS.len());
    for &t in t_values {
        let exact = bandlimited_eval(&f, t, &g)?;
        for ((sys, smp), &n) in systems.iter().zip(&samples).zip(&SWEEP_WINDOWS) {
            let r = reconstruct(sys, smp, t)?;
            let abs_err = (r.value - exact).norm();
            let bound = norm * tail_factor(t, n, e.q(), cfg.grid_order)?;
            rows.push(ReconRow {
                t,
                n,
                value_re: r.value.re,
                value_im: r.value.im,
                exact_re: exact.re,
                exact_im: exact.im,
                abs_err,
                tail_bound: bound,
                envelope: r.tail_bound,
                // roundoff allowance for rows whose bound is ~0
                within_bound: abs_err <= bound + 4.0 * f64::EPSILON * (1.0 + exact.norm()),
            });
        }
    }
    let violations = rows.iter().filter(|r| !r.within_bound).count();
    let pass = !asserted || violations == 0;
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_text(
            &[
                "t",
                "N",
                "value_re",
                "value_im",
                "exact_re",
                "exact_im",
                "abs_err",
                "tail_bound",
                "envelope",
            ],
            rows.iter().map(|r| {
                let mut row = vec![fmt_f64(r.t), r.n.to_string()];
                row.extend(
                    [
                        r.value_re,
                        r.value_im,
                        r.exact_re,
                        r.exact_im,
                        r.abs_err,
                        r.tail_bound,
                        r.envelope,
                    ]
                    .map(fmt_f64),
                );
                row
            }),
        )?,
        Format::Json => json_text(&ReconDump {
            spectrum: f.spectrum.name(),
            p: cfg.p,
            spectrum_norm: norm,
            asserted,
            pass,
            rows: &rows,
        }),
    };
    let summary = format!(
        "reconstruct {}: {} rows, {violations} above the bound{}",
        f.spectrum.name(),
        rows.len(),
        if asserted { "" } else { " (not asserted)" }
    );
    Ok(Outcome { body, pass, summary })
}

fn estimator(cfg: &RunConfig) -> Result<EstimatorConfig, Failure> {
    if cfg.trials == 0 {
        return Err(UsageError("trials must be >= 1".into()).into());
    }
    Ok(EstimatorConfig {
        trials: cfg.trials,
        seed: cfg.seed,
        panel_order: cfg.grid_order,
    })
}

fn json_only(cfg: &RunConfig, what: &str) -> Result<(), Failure> {
    match cfg.format {
        Some(Format::Csv) => Err(UsageError(format!("{what} emits JSON only")).into()),
        _ => Ok(()),
    }
}

/// Full verification report; passes when every deterministic deviation is
/// within `tol`. With `matrices`, also writes `biorth_sm.csv` and
/// `gram_samp.csv` there.
pub fn cmd_verify(cfg: &RunConfig, matrices: Option<&Path>) -> Result<Outcome, Failure> {
    json_only(cfg, "verify")?;
    let sys = cfg.system()?;
    let report: VerificationReport = verify(
        &sys,
        &VerifyConfig {
            estimator: estimator(cfg)?,
            tol: cfg.tol,
        },
    )?;
    if let Some(dir) = matrices {
        std::fs::create_dir_all(dir).map_err(sip_sampling::Error::from)?;
        for (name, m) in [
            ("biorth_sm.csv", biorth_matrix(&sys)),
            ("gram_samp.csv", samp_gram_matrix(&sys)),
        ] {
            let file = std::fs::File::create(dir.join(name)).map_err(sip_sampling::Error::from)?;
            write_matrix_csv(sys.half_width(), &m, file)?;
        }
    }
    let summary = format!(
        "verify p={} N={}: interpolation {:e}, biorth {:e}/{:e}, formulas {:e}/{:e}",
        cfg.p,
        cfg.n_trunc,
        report.interpolation_dev,
        report.biorth_sm_dev,
        report.biorth_sg_dev,
        report.formula3_dev,
        report.formula4_dev
    );
    Ok(Outcome {
        body: json_text(&report),
        pass: report.pass,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Bessel,
    Frame,
    Riesz,
}

#[derive(Serialize)]
struct BoundsDump {
    target: Target,
    p: f64,
    q: f64,
    n_trunc: usize,
    estimate: BoundEstimate,
}

pub fn cmd_bounds(cfg: &RunConfig, target: Target) -> Result<Outcome, Failure> {
    json_only(cfg, "bounds")?;
    let sys = cfg.system()?;
    let est = estimator(cfg)?;
    let estimate = match target {
        Target::Bessel => bessel_bound(&sys, &est)?,
        Target::Frame => frame_bounds_m(&sys, &est)?,
        Target::Riesz => riesz_bounds_s(&sys, &est)?,
    };
    let e = cfg.exponent();
    let summary = format!("bounds {target:?}: [{}, {}]", estimate.lower, estimate.upper);
    let dump = BoundsDump {
        target,
        p: e.p(),
        q: e.q(),
        n_trunc: cfg.n_trunc,
        estimate,
    };
    Ok(Outcome {
        body: json_text(&dump),
        pass: true,
        summary,
    })
}
