//! Finite sections of `ℓ_p(ℤ)`.
//!
//! Sequences live on a symmetric window `|j| <= N` and are stored in the
//! interleaved rank order `0, -1, 1, -2, 2, …`. Every `ℓ_p` space with
//! `1 < p < ∞` is smooth and uniformly convex, so it carries a unique
//! semi-inner product compatible with its norm:
//!
//! ```text
//! [c, d]_p = Σ_j c_j · conj(d_j) |d_j|^{p-2} / ‖d‖_p^{p-2}
//! ```
//!
//! The second factor is the normalized duality map `d ↦ d*`, an isometry
//! from `ℓ_p` onto `ℓ_q`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on `1/p + 1/q = 1`.
const CONJUGACY_TOL: f64 = 1e-14;

/// A conjugate pair `(p, q)` with `1/p + 1/q = 1` and `1 < p, q < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    p: f64,
    q: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(invalid(format!("exponent p must lie in (1, inf), got {p}")));
        }
        let q = p / (p - 1.0);
        debug_assert!((1.0 / p + 1.0 / q - 1.0).abs() <= CONJUGACY_TOL);
        Ok(Self { p, q })
    }

    /// Builds the pair from both sides, checking conjugacy.
    pub fn from_pair(p: f64, q: f64) -> Result<Self> {
        let e = Self::new(p)?;
        if !q.is_finite() || q <= 1.0 || (1.0 / p + 1.0 / q - 1.0).abs() > CONJUGACY_TOL {
            return Err(invalid(format!("{p} and {q} are not conjugate exponents")));
        }
        Ok(Self { p: e.p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The pair with roles swapped, `(q, p)`.
    pub fn dual(&self) -> Self {
        Self { p: self.q, q: self.p }
    }
}

/// Position of index `j` in the order `0, -1, 1, -2, 2, …`.
pub fn rank_of(j: i64) -> usize {
    if j > 0 {
        (2 * j) as usize
    } else {
        (-2 * j) as usize - usize::from(j < 0)
    }
}

/// Inverse of [`rank_of`].
pub fn index_at(rank: usize) -> i64 {
    let r = rank as i64;
    if r % 2 == 0 {
        r / 2
    } else {
        -(r + 1) / 2
    }
}

/// Indices of the window `|j| <= half_width`, in rank order.
pub fn window_indices(half_width: usize) -> impl Iterator<Item = i64> + Clone {
    (0..2 * half_width + 1).map(index_at)
}

/// A complex sequence on the window `|j| <= N`, tagged with the `ℓ_p` it
/// is regarded as an element of.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    half_width: usize,
    entries: Vec<Complex64>,
    exponent: Exponent,
}

impl CoeffSeq {
    pub fn zeros(half_width: usize, exponent: Exponent) -> Self {
        Self {
            half_width,
            entries: vec![Complex64::new(0.0, 0.0); 2 * half_width + 1],
            exponent,
        }
    }

    /// Fills the window by evaluating `f(j)`.
    pub fn from_fn(half_width: usize, exponent: Exponent, mut f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        let entries = window_indices(half_width).map(&mut f).collect();
        Self::from_rank_order(half_width, entries, exponent)
    }

    /// Wraps entries already laid out in rank order.
    pub fn from_rank_order(half_width: usize, entries: Vec<Complex64>, exponent: Exponent) -> Result<Self> {
        if entries.len() != 2 * half_width + 1 {
            return Err(Error::Shape(format!(
                "expected {} entries for half-width {half_width}, got {}",
                2 * half_width + 1,
                entries.len()
            )));
        }
        check_finite(&entries)?;
        Ok(Self {
            half_width,
            entries,
            exponent,
        })
    }

    /// Builds from entries listed by ascending index `-N, …, N`.
    pub fn from_ascending(entries: &[Complex64], exponent: Exponent) -> Result<Self> {
        if entries.len().is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "a symmetric window needs an odd entry count, got {}",
                entries.len()
            )));
        }
        let half_width = entries.len() / 2;
        Self::from_fn(half_width, exponent, |j| entries[(j + half_width as i64) as usize])
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    /// Entries in rank order.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, j: i64) -> Result<Complex64> {
        self.check_index(j)?;
        Ok(self.entries[rank_of(j)])
    }

    pub fn set(&mut self, j: i64, value: Complex64) -> Result<()> {
        self.check_index(j)?;
        if !value.is_finite() {
            return Err(invalid(format!("non-finite entry at index {j}")));
        }
        self.entries[rank_of(j)] = value;
        Ok(())
    }

    /// `(j, c_j)` pairs in rank order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.entries.iter().enumerate().map(|(r, &v)| (index_at(r), v))
    }

    /// Entries listed by ascending index `-N, …, N`.
    pub fn to_ascending(&self) -> Vec<Complex64> {
        let n = self.half_width as i64;
        (-n..=n).map(|j| self.entries[rank_of(j)]).collect()
    }

    pub fn with_exponent(mut self, exponent: Exponent) -> Self {
        self.exponent = exponent;
        self
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            half_width: self.half_width,
            entries: self.entries.iter().map(|&v| alpha * v).collect(),
            exponent: self.exponent,
        }
    }

    /// `self + other`, windows must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        same_window(self, other)?;
        Ok(Self {
            half_width: self.half_width,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
            exponent: self.exponent,
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

pub(crate) fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(invalid(format!("non-finite entry at position {i}"))),
        None => Ok(()),
    }
}

fn same_window(a: &CoeffSeq, b: &CoeffSeq) -> Result<()> {
    if a.half_width != b.half_width {
        return Err(Error::Shape(format!(
            "window mismatch: |j| <= {} vs |j| <= {}",
            a.half_width, b.half_width
        )));
    }
    Ok(())
}

/// `(Σ |v|^p)^{1/p}` for `p >= 1`, rescaled by the largest modulus so
/// that large or tiny entries do not overflow.
pub(crate) fn lp_norm_slice(values: &[Complex64], p: f64) -> f64 {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|v| (v.norm() / scale).powf(p)).sum();
    scale * sum.powf(1.0 / p)
}

/// Duality map on a raw slice; returns zeros for the zero vector.
pub(crate) fn duality_map_slice(values: &[Complex64], p: f64) -> Vec<Complex64> {
    let norm = lp_norm_slice(values, p);
    values
        .iter()
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

pub fn lp_norm(c: &CoeffSeq, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("norm exponent must be finite and >= 1, got {p}")));
    }
    check_finite(&c.entries)?;
    Ok(lp_norm_slice(&c.entries, p))
}

/// Normalized duality map `ℓ_p → ℓ_q`: `d*_j = conj(d_j)|d_j|^{p-2}/‖d‖_p^{p-2}`.
///
/// Zero components map to zero, as does the zero sequence. The result is
/// tagged with the conjugate exponent.
pub fn duality_map_seq(d: &CoeffSeq, p: f64) -> Result<CoeffSeq> {
    let exponent = Exponent::new(p)?;
    check_finite(&d.entries)?;
    Ok(CoeffSeq {
        half_width: d.half_width,
        entries: duality_map_slice(&d.entries, p),
        exponent: exponent.dual(),
    })
}

/// Semi-inner product `[c, d]_p = Σ_j c_j (d*)_j`.
pub fn sip_seq(c: &CoeffSeq, d: &CoeffSeq, p: f64) -> Result<Complex64> {
    same_window(c, d)?;
    check_finite(&c.entries)?;
    let star = duality_map_seq(d, p)?;
    Ok(pairing(&c.entries, &star.entries))
}

/// Bilinear pairing `Σ c_j d_j` in rank order.
pub(crate) fn pairing(c: &[Complex64], d: &[Complex64]) -> Complex64 {
    c.iter().zip(d).map(|(a, b)| a * b).sum()
}
