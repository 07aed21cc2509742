//! Composite Gauss–Legendre rules on `I = [-1/2, 1/2]`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Panels used by [`crate::funcspace::make_grid`].
pub const DEFAULT_PANELS: usize = 8;
/// Nodes per panel used by the default grid.
pub const DEFAULT_PANEL_ORDER: usize = 16;

/// Oscillation periods a 16-node panel is asked to resolve when the grid
/// is sized from a bandwidth.
const CYCLES_PER_PANEL: f64 = 2.0;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of `panels` equal Gauss–Legendre panels covering
/// `[-1/2, 1/2]`; weights sum to one.
pub fn composite_rule(panels: usize, per_panel: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if panels == 0 {
        return Err(invalid("a composite rule needs at least one panel"));
    }
    if per_panel < 2 {
        return Err(invalid(format!("panel order must be >= 2, got {per_panel}")));
    }
    let (x, w) = gauss_legendre(per_panel);
    let h = 1.0 / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for k in 0..panels {
        let mid = -0.5 + (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    Ok((nodes, weights))
}

/// Panel count for integrands whose frequency content (in cycles over
/// `I`) is at most `bandwidth`.
pub fn panels_for_bandwidth(bandwidth: f64) -> usize {
    let needed = (bandwidth.abs() / CYCLES_PER_PANEL).ceil() as usize;
    needed.max(DEFAULT_PANELS)
}
