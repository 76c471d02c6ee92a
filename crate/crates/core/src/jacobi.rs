//! Jacobi polynomials, their norms, the `Z_n` kernel and Gauss-Jacobi rules.
//!
//! Conventions: `P_n^{(α,β)}` is the classical polynomial on `[-1,1]`,
//! orthogonal against `w_{α,β}(x) = (1-x)^α (1+x)^β`. Norms `h_n` are taken
//! against the normalized measure `c'_{α,β} w_{α,β}`, so `h_0 = 1`, and
//! `p_n = P_n / sqrt(h_n)` is orthonormal with `p_0 = 1`.
//!
//! On `[0,1]` the weight is `ϖ_{α,β}(t) = t^α (1-t)^β` and the argument map
//! is `x = 1 - 2t`.

use crate::error::{Error, Result};
use crate::jet::{Jet, Ring};

/// An exponent pair `(α, β)` with `α, β > -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::ParameterDomain(format!("Jacobi exponents must exceed -1, got ({alpha}, {beta})")));
        }
        Ok(Self { alpha, beta })
    }

    /// Legendre exponents `(0, 0)`.
    pub const fn legendre() -> Self {
        Self { alpha: 0.0, beta: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The pair with exponents swapped.
    pub fn swapped(&self) -> Self {
        Self { alpha: self.beta, beta: self.alpha }
    }

    /// `∫_{-1}^{1} (1-x)^α (1+x)^β dx`.
    pub fn mass(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        ((a + b + 1.0) * std::f64::consts::LN_2 + libm::lgamma(a + 1.0) + libm::lgamma(b + 1.0)
            - libm::lgamma(a + b + 2.0))
        .exp()
    }

    /// `c_{α,β}`: the reciprocal of `∫_0^1 t^α (1-t)^β dt`.
    pub fn unit_normalizer(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        (libm::lgamma(a + b + 2.0) - libm::lgamma(a + 1.0) - libm::lgamma(b + 1.0)).exp()
    }

    /// Coefficients of the orthonormal three-term recurrence
    /// `x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`.
    fn diagonal(&self, k: usize) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        if k == 0 {
            return (b - a) / (a + b + 2.0);
        }
        let s = 2.0 * k as f64 + a + b;
        (b * b - a * a) / (s * (s + 2.0))
    }

    fn off_diagonal(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        let (a, b) = (self.alpha, self.beta);
        let kf = k as f64;
        let sq = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
        } else {
            let s = 2.0 * kf + a + b;
            4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
        };
        sq.sqrt()
    }
}

/// `(a)_n` by repeated multiplication.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

/// `P_n^{(α,β)}(t)` by the forward three-term recurrence.
pub fn jacobi_eval(params: &JacobiParams, n: usize, t: f64) -> f64 {
    jacobi_eval_ring(params, n, t)
}

/// Recurrence evaluation over any [`Ring`]; with a [`Jet`] argument it also
/// returns the first two derivatives.
pub fn jacobi_eval_ring<R: Ring>(params: &JacobiParams, n: usize, t: R) -> R {
    let (a, b) = (params.alpha, params.beta);
    let mut prev = R::constant(1.0);
    if n == 0 {
        return prev;
    }
    let mut cur = R::constant(a + 1.0) + (t - R::constant(1.0)).scale(0.5 * (a + b + 2.0));
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let lead = 2.0 * (kf + 1.0) * (kf + a + b + 1.0) * s;
        let c1 = (s + 1.0) * (s + 2.0) * s;
        let c0 = (s + 1.0) * (a * a - b * b);
        let c2 = 2.0 * (kf + a) * (kf + b) * (s + 2.0);
        let next = (cur * (t.scale(c1) + R::constant(c0)) - prev.scale(c2)).scale(1.0 / lead);
        prev = cur;
        cur = next;
    }
    cur
}

/// `h_n^{(α,β)}`, the squared norm of `P_n` under the normalized measure.
pub fn jacobi_norm(params: &JacobiParams, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (a, b) = (params.alpha, params.beta);
    let nf = n as f64;
    let mut h = (a + b + nf + 1.0) / (a + b + 2.0 * nf + 1.0);
    for k in 0..n {
        let kf = k as f64;
        h *= (a + 1.0 + kf) * (b + 1.0 + kf) / ((kf + 1.0) * (a + b + 2.0 + kf));
    }
    h
}

/// `Z_n^{(α,β)}(t) = P_n(t) P_n(1) / h_n`.
pub fn zn_kernel(params: &JacobiParams, n: usize, t: f64) -> f64 {
    jacobi_eval(params, n, t) * jacobi_eval(params, n, 1.0) / jacobi_norm(params, n)
}

/// Precomputed orthonormal recurrence coefficients up to a fixed degree.
#[derive(Debug, Clone)]
pub struct OrthonormalLadder {
    params: JacobiParams,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl OrthonormalLadder {
    pub fn new(params: JacobiParams, max_degree: usize) -> Self {
        let a = (0..=max_degree).map(|k| params.diagonal(k)).collect();
        // b[k] couples degrees k-1 and k; b[0] is unused.
        let b = (0..=max_degree + 1).map(|k| if k == 0 { 0.0 } else { params.off_diagonal(k) }).collect();
        Self { params, a, b }
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    pub fn max_degree(&self) -> usize {
        self.a.len() - 1
    }

    /// Writes `p_0(x), ..., p_n(x)` into `out`.
    pub fn fill<R: Ring>(&self, n: usize, x: R, out: &mut Vec<R>) {
        assert!(n <= self.max_degree(), "degree {n} beyond ladder");
        out.clear();
        out.push(R::constant(1.0));
        if n == 0 {
            return;
        }
        out.push((x - R::constant(self.a[0])).scale(1.0 / self.b[1]));
        for k in 1..n {
            let next = ((x - R::constant(self.a[k])) * out[k] - out[k - 1].scale(self.b[k])).scale(1.0 / self.b[k + 1]);
            out.push(next);
        }
    }

    pub fn values(&self, n: usize, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        self.fill(n, x, &mut out);
        out
    }

    /// `p_n` alone together with its first two derivatives.
    pub fn jet(&self, n: usize, x: f64) -> Jet {
        let mut buf = Vec::with_capacity(n + 1);
        self.fill(n, Jet::variable(x), &mut buf);
        buf[n]
    }
}

/// Where a rule lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// `[-1,1]` with weight `(1-x)^α (1+x)^β`.
    Symmetric,
    /// `[0,1]` with weight `t^α (1-t)^β`.
    Unit,
    /// `[a,b]` with unit weight.
    Segment(f64, f64),
}

/// Nodes and positive weights with a declared polynomial exactness.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
    pub params: JacobiParams,
    pub support: Support,
    /// Weights rescaled to sum to one.
    pub normalized: bool,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The `[0,1]` rule for `ϖ_{α,β}` obtained through `t = (1-x)/2`.
    pub fn to_unit(&self) -> Result<Self> {
        if self.support != Support::Symmetric {
            return Err(Error::Configuration("only [-1,1] rules map to [0,1]".into()));
        }
        let scale = if self.normalized {
            1.0
        } else {
            (-(self.params.alpha + self.params.beta + 1.0) * std::f64::consts::LN_2).exp()
        };
        let mut pairs: Vec<(f64, f64)> =
            self.nodes.iter().zip(&self.weights).map(|(&x, &w)| ((1.0 - x) / 2.0, w * scale)).collect();
        pairs.reverse();
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self {
            nodes,
            weights,
            exact_degree: self.exact_degree,
            params: self.params,
            support: Support::Unit,
            normalized: self.normalized,
        })
    }

    /// The same rule with weights summing to one.
    pub fn normalized(&self) -> Self {
        let total = self.total_weight();
        Self { weights: self.weights.iter().map(|w| w / total).collect(), normalized: true, ..self.clone() }
    }

    /// Confirms that this is a `[0,1]` rule for `ϖ_{α,β}`.
    pub fn expect_unit(&self, params: &JacobiParams, normalized: bool) -> Result<()> {
        let ok = self.support == Support::Unit
            && (self.params.alpha - params.alpha).abs() < 1e-14
            && (self.params.beta - params.beta).abs() < 1e-14
            && self.normalized == normalized;
        if ok {
            Ok(())
        } else {
            Err(Error::Configuration(format!(
                "rule for ({}, {}) on {:?} does not match weight ({}, {})",
                self.params.alpha, self.params.beta, self.support, params.alpha, params.beta
            )))
        }
    }
}

/// Gauss-Jacobi rule with `num_nodes` nodes on `[-1,1]` (Golub-Welsch).
pub fn gauss_jacobi_rule(params: &JacobiParams, num_nodes: usize) -> Result<QuadratureRule> {
    if num_nodes == 0 {
        return Err(Error::Configuration("a rule needs at least one node".into()));
    }
    let n = num_nodes;
    let mut d: Vec<f64> = (0..n).map(|k| params.diagonal(k)).collect();
    let mut e: Vec<f64> = (0..n).map(|k| if k + 1 < n { params.off_diagonal(k + 1) } else { 0.0 }).collect();
    tridiagonal_eigenvalues(&mut d, &mut e)?;
    d.sort_by(|a, b| a.total_cmp(b));

    let ladder = OrthonormalLadder::new(*params, n);
    let mass = params.mass();
    let mut buf = Vec::with_capacity(n + 1);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in &d {
        let mut x = x0;
        for _ in 0..3 {
            let j = ladder.jet(n, x);
            let step = j.v / j.d1;
            if !step.is_finite() || step.abs() > 1e-6 {
                break;
            }
            x -= step;
        }
        ladder.fill(n - 1, x, &mut buf);
        let christoffel: f64 = buf.iter().map(|p| p * p).sum();
        nodes.push(x);
        weights.push(mass / christoffel);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exact_degree: 2 * n - 1,
        params: *params,
        support: Support::Symmetric,
        normalized: false,
    })
}

/// Gauss-Jacobi rule for `ϖ_{α,β}` on `[0,1]`.
pub fn gauss_jacobi_unit(params: &JacobiParams, num_nodes: usize) -> Result<QuadratureRule> {
    gauss_jacobi_rule(params, num_nodes)?.to_unit()
}

/// Gauss-Legendre rule on `[lo, hi]`.
pub fn gauss_legendre_on(lo: f64, hi: f64, num_nodes: usize) -> Result<QuadratureRule> {
    let base = gauss_jacobi_rule(&JacobiParams::legendre(), num_nodes)?;
    let half = 0.5 * (hi - lo);
    Ok(QuadratureRule {
        nodes: base.nodes.iter().map(|x| lo + half * (x + 1.0)).collect(),
        weights: base.weights.iter().map(|w| w * half).collect(),
        support: Support::Segment(lo, hi),
        ..base
    })
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson
/// shifts. `e[i]` couples rows `i` and `i+1`; it is destroyed.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    const MAX_SWEEPS: usize = 60;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= 1e-14 * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NumericalFailure(format!("tridiagonal QL did not converge for eigenvalue {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
