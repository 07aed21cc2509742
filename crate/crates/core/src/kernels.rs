//! Reproducing kernels: the s.i.p. kernel `G(s, t) = [Φ(s), Φ(t)]_p` of the
//! band-limited space and the sampling kernel `G_samp` built from a
//! sampling system.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::funcspace::{feature_on, make_grid, sip_fn, Grid};
use crate::quadrature::DEFAULT_PANEL_ORDER;
use crate::sampling::SamplingSystem;
use crate::seqspace::{duality_map_slice, pairing, CoeffSeq, Exponent};

/// Below this the Taylor polynomial replaces `sin(πx)/(πx)`.
const SINC_TAYLOR_RADIUS: f64 = 1e-6;

/// `sin(πx)/(πx)`, equal to 1 at 0 and exactly 0 at nonzero integers.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_TAYLOR_RADIUS {
        let y = (PI * x) * (PI * x);
        return 1.0 - y / 6.0 + y * y / 120.0 - y * y * y / 5040.0;
    }
    // reduce to sin(πr) with |r| <= 1/2, r exact
    let n = x.round();
    let r = x - n;
    if r == 0.0 {
        return 0.0;
    }
    let sign = if n.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
    sign * (PI * r).sin() / (PI * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelBackend {
    ClosedForm,
    Quadrature,
}

/// `G(s, t)` for the exponential feature map, by either backend.
#[derive(Debug, Clone)]
pub struct Kernel {
    backend: KernelBackend,
    exponent: Exponent,
    grid: Arc<Grid>,
}

impl Kernel {
    pub fn backend(&self) -> KernelBackend {
        self.backend
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Swaps the quadrature grid, e.g. for wide lattices.
    pub fn with_grid(mut self, grid: Arc<Grid>) -> Self {
        self.grid = grid;
        self
    }

    pub fn eval(&self, s: f64, t: f64) -> Complex64 {
        match self.backend {
            KernelBackend::ClosedForm => Complex64::new(sinc(t - s), 0.0),
            KernelBackend::Quadrature => {
                let a = feature_on(&self.grid, s);
                let b = feature_on(&self.grid, t);
                sip_fn(&a, &b, self.exponent.p()).expect("features share a grid")
            }
        }
    }

    /// Rows `s,t,re,im` over the product lattice.
    pub fn write_lattice_csv<W: Write>(&self, s_values: &[f64], t_values: &[f64], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "t", "re", "im"])?;
        for &s in s_values {
            for &t in t_values {
                let v = self.eval(s, t);
                w.write_record([
                    crate::fmt_f64(s),
                    crate::fmt_f64(t),
                    crate::fmt_f64(v.re),
                    crate::fmt_f64(v.im),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// The s.i.p. kernel of `B_p`. The quadrature backend evaluates
/// `[Φ(s), Φ(t)]_p` on the default grid; both backends agree for every
/// `p` because `|Φ(t)| ≡ 1`.
pub fn kernel_g(p: f64, backend: KernelBackend) -> Result<Kernel> {
    Ok(Kernel {
        backend,
        exponent: Exponent::new(p)?,
        grid: Arc::new(make_grid(DEFAULT_PANEL_ORDER)?),
    })
}

/// `φ(t) = {S_j(t)}_{|j|<=N}`, an element of `ℓ_q`.
pub fn phi_seq(sys: &SamplingSystem, t: f64) -> CoeffSeq {
    let q = Exponent::new(sys.exponent().q()).expect("q > 1");
    CoeffSeq::from_rank_order(sys.half_width(), sys.kernel_values(t), q).expect("kernel values are finite")
}

/// `φ*(t)`, the `ℓ_q` duality image of `φ(t)`, an element of `ℓ_p`.
pub fn phi_star_seq(sys: &SamplingSystem, t: f64) -> CoeffSeq {
    let e = sys.exponent();
    let star = duality_map_slice(&sys.kernel_values(t), e.q());
    CoeffSeq::from_rank_order(sys.half_width(), star, e).expect("duality image is finite")
}

/// `G_samp(s, t) = Σ_{|j|<=N} (S_j(s))* S_j(t)`, the star taken in `ℓ_q`.
pub fn gsamp_eval(sys: &SamplingSystem, s: f64, t: f64) -> Complex64 {
    let star = duality_map_slice(&sys.kernel_values(s), sys.exponent().q());
    pairing(&star, &sys.kernel_values(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SamplingSystem;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        for k in 1..200 {
            assert_eq!(sinc(k as f64), 0.0);
            assert_eq!(sinc(-(k as f64)), 0.0);
        }
        assert_abs_diff_eq!(sinc(1.4), -0.21623620818304484, epsilon = 1e-16);
        assert_abs_diff_eq!(sinc(0.5), 2.0 / PI, epsilon = 1e-16);
        assert_abs_diff_eq!(sinc(-2.5), 2.0 / (5.0 * PI), epsilon = 1e-16);
    }

    #[test]
    fn sinc_taylor_branch_is_continuous() {
        for x in [9.99e-7, 1e-6, 1.01e-6, 5e-7, 1e-9] {
            let direct = (PI * x).sin() / (PI * x);
            assert_abs_diff_eq!(sinc(x), direct, epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_backends_agree() {
        for p in [1.5, 2.0, 3.0, 4.0] {
            let closed = kernel_g(p, KernelBackend::ClosedForm).unwrap();
            let quad = kernel_g(p, KernelBackend::Quadrature).unwrap();
            assert_abs_diff_eq!(quad.eval(1.1, 1.1).re, 1.0, epsilon = 1e-14);
            let v = quad.eval(0.3, 1.7);
            assert_abs_diff_eq!(v.re, -0.21623620818304484, epsilon = 1e-10);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!((closed.eval(0.3, 1.7) - v).norm(), 0.0, epsilon = 1e-10);
            for j in -3..=3 {
                for k in -3..=3 {
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert_eq!(closed.eval(j as f64, k as f64).re, want);
                    assert_abs_diff_eq!(quad.eval(j as f64, k as f64).re, want, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn lattice_csv_has_one_row_per_pair() {
        let k = kernel_g(2.0, KernelBackend::ClosedForm).unwrap();
        let mut buf = Vec::new();
        k.write_lattice_csv(&[0.0, 1.0], &[0.0, 0.5, 1.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("s,t,re,im"));
    }

    #[test]
    fn phi_at_integers_is_a_unit_vector() {
        let sys = SamplingSystem::sinc(4, Exponent::new(3.0).unwrap());
        for k in -4..=4 {
            let phi = phi_seq(&sys, k as f64);
            for (j, v) in phi.iter() {
                assert_eq!(v, Complex64::new(if j == k { 1.0 } else { 0.0 }, 0.0));
            }
        }
    }

    #[test]
    fn phi_at_half() {
        let sys = SamplingSystem::sinc(2, Exponent::new(2.0).unwrap());
        let phi = phi_seq(&sys, 0.5);
        assert_eq!(phi.len(), 5);
        assert_abs_diff_eq!(phi.get(0).unwrap().re, 2.0 / PI, epsilon = 1e-16);
        assert_abs_diff_eq!(phi.get(1).unwrap().re, 2.0 / PI, epsilon = 1e-16);
        assert_abs_diff_eq!(phi.get(-1).unwrap().re, -2.0 / (3.0 * PI), epsilon = 1e-16);
        assert_abs_diff_eq!(phi.get(2).unwrap().re, -2.0 / (3.0 * PI), epsilon = 1e-16);
        assert_abs_diff_eq!(phi.get(-2).unwrap().re, 2.0 / (5.0 * PI), epsilon = 1e-16);
    }

    #[test]
    fn gsamp_examples() {
        let sys = SamplingSystem::sinc(0, Exponent::new(2.0).unwrap());
        assert_eq!(gsamp_eval(&sys, 0.0, 0.0).re, 1.0);
        let sys = SamplingSystem::sinc(7, Exponent::new(2.0).unwrap());
        assert_eq!(gsamp_eval(&sys, 0.0, 0.0).re, 1.0);
        // regression against a 40-digit summation of the same truncated series
        let sys = SamplingSystem::sinc(64, Exponent::new(4.0).unwrap());
        let v = gsamp_eval(&sys, 0.5, 0.25);
        assert_abs_diff_eq!(v.re, 2.460655980387096, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0);
    }

    #[test]
    fn gsamp_at_a_node_reduces_to_one_term() {
        let e = Exponent::new(3.0).unwrap();
        let sys = SamplingSystem::sinc(5, e)
            .with_weights(|j| Complex64::new(1.0 + 0.25 * j as f64, 0.5))
            .unwrap();
        for k in -5..=5 {
            let a = sys.weight(k).unwrap();
            for t in [-1.3, 0.2, 4.7] {
                // φ(t_k) = a_k e_k, so φ*(t_k) = conj(a_k)/|a_k| · |a_k| e_k
                let want = a.conj() * sys.eval_kernel(k, t).unwrap();
                assert_abs_diff_eq!((gsamp_eval(&sys, k as f64, t) - want).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gsamp_is_symmetric_for_p2() {
        let sys = SamplingSystem::sinc(16, Exponent::new(2.0).unwrap());
        for s in [-2.2, 0.1, 0.75] {
            for t in [-0.4, 1.9, 3.3] {
                let d = gsamp_eval(&sys, s, t) - gsamp_eval(&sys, t, s).conj();
                assert!(d.norm() <= 1e-10);
            }
        }
    }
}
