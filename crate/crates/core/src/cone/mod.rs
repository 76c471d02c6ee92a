//! The solid cone `V = {(x,t): ‖x‖ ≤ t ≤ 1}` with weight
//! `W_γ(x,t) = (t² - ‖x‖²)^{-1/2} (1-t)^γ`.
//!
//! Everything is computed on the conic surface one dimension up. A cone
//! point lifts to `X = (x, ±Φ(x,t))` with `Φ = √(t² - ‖x‖²)`, and a cone
//! function `f` to the even extension `f̃(X,t) = f(x,t)`. Under the lift the
//! normalized measure `W_γ` becomes the normalized surface measure.

mod modulus;

pub use modulus::*;

use std::sync::Arc;

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::interval::binomial;
use crate::jacobi::{gauss_jacobi_unit, JacobiParams, QuadratureRule};
use crate::norm::Exponent;
use crate::sphere::{sphere_area, spherical_quadrature, SphericalQuadrature};
use crate::surface::{
    ambient, best_approx, best_approx_l2_many, BestApprox, SurfaceExpansion, SurfaceKernelEvaluator, SurfaceOperator,
    SurfacePoint, SurfaceRules, SurfaceWeight,
};

/// Slack allowed on `‖x‖ ≤ t` and `‖X‖ = t`.
const GEOMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeWeight {
    d: usize,
    gamma: f64,
}

impl ConeWeight {
    /// `d` is the dimension of `x`; the lift needs `d + 1 ≤ 4`.
    pub fn new(d: usize, gamma: f64) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::Dimension(d));
        }
        SurfaceWeight::new(d + 1, gamma)?;
        Ok(Self { d, gamma })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The weight on the lifted surface `V₀^{d+2}`.
    pub fn surface(&self) -> SurfaceWeight {
        SurfaceWeight::new(self.d + 1, self.gamma).expect("validated")
    }

    /// `t^{d-1} (1-t)^γ`, the weight left in `t` after integrating out `x`.
    pub fn t_params(&self) -> JacobiParams {
        self.surface().t_params()
    }

    /// `s^{(d-2)/2} (1-s)^{-1/2}` in `s = ‖x‖²/t²`.
    pub fn s_params(&self) -> JacobiParams {
        JacobiParams::new((self.d as f64 - 2.0) / 2.0, -0.5).expect("valid")
    }

    /// `W_γ(x,t)`; infinite on the lateral boundary.
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        let q = t * t - x.iter().map(|c| c * c).sum::<f64>();
        (1.0 - t).powf(self.gamma) / q.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    x: Vec<f64>,
    t: f64,
}

impl ConePoint {
    pub fn new(x: Vec<f64>, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t must lie in [0,1], got {t}")));
        }
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > t + GEOMETRY_TOL {
            return Err(Error::Domain(format!("‖x‖ = {norm} exceeds t = {t}")));
        }
        Ok(Self { x, t })
    }

    /// The point `(t y, t)` for `y` in the unit ball.
    pub fn from_ball(y: &[f64], t: f64) -> Result<Self> {
        Self::new(y.iter().map(|c| t * c).collect(), t)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn d(&self) -> usize {
        self.x.len()
    }

    /// `Φ(x,t) = √(t² - ‖x‖²)`.
    pub fn phi(&self) -> f64 {
        cone_phi(&self.x, self.t)
    }

    /// `(x, t)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x.clone();
        c.push(self.t);
        c
    }
}

pub(crate) fn cone_phi(x: &[f64], t: f64) -> f64 {
    (t * t - x.iter().map(|c| c * c).sum::<f64>()).max(0.0).sqrt()
}

/// Which of the two preimages `x_{d+1} = ±Φ` to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    Upper,
    Lower,
}

impl Sheet {
    fn sign(self) -> f64 {
        match self {
            Sheet::Upper => 1.0,
            Sheet::Lower => -1.0,
        }
    }
}

/// A point `(X, t)` of `V₀^{d+2}` with `‖X‖ = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    big_x: Vec<f64>,
    t: f64,
}

impl LiftedPoint {
    pub fn new(big_x: Vec<f64>, t: f64) -> Result<Self> {
        let norm = big_x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - t).abs() > GEOMETRY_TOL.max(1e-12 * t) * 10.0 {
            return Err(Error::Domain(format!("‖X‖ = {norm} differs from t = {t}")));
        }
        Ok(Self { big_x, t })
    }

    pub fn coords(&self) -> &[f64] {
        &self.big_x
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `X_* = (x, -x_{d+1})`.
    pub fn reflected(&self) -> Self {
        let mut big_x = self.big_x.clone();
        if let Some(last) = big_x.last_mut() {
            *last = -*last;
        }
        Self { big_x, t: self.t }
    }

    /// The cone point below.
    pub fn project(&self) -> ConePoint {
        let d = self.big_x.len() - 1;
        ConePoint { x: self.big_x[..d].to_vec(), t: self.t }
    }

    /// `(ξ, t)` with `ξ = X/t`; the apex is given the direction `e_{d+1}`.
    pub fn surface_point(&self) -> Result<SurfacePoint> {
        let xi = if self.t > 0.0 {
            self.big_x.iter().map(|c| c / self.t).collect()
        } else {
            let mut e = vec![0.0; self.big_x.len()];
            *e.last_mut().expect("nonempty") = 1.0;
            e
        };
        SurfacePoint::from_coords(xi, self.t)
    }

    /// `(X, t)` as ambient coordinates.
    pub fn ambient(&self) -> Vec<f64> {
        let mut c = self.big_x.clone();
        c.push(self.t);
        c
    }
}

pub fn lift(p: &ConePoint, sheet: Sheet) -> LiftedPoint {
    let mut big_x = p.x.clone();
    big_x.push(sheet.sign() * p.phi());
    LiftedPoint { big_x, t: p.t }
}

/// The even extension `f̃(X,t) = f(x,t)` of a cone field.
#[derive(Clone, Copy)]
pub struct Lifted<'a>(pub &'a dyn Field);

impl Field for Lifted<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(&drop_lifted(x))
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = self.0.gradient(&drop_lifted(x))?;
        g.insert(x.len() - 2, 0.0);
        Some(g)
    }

    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        let h = self.0.hessian(&drop_lifted(x))?;
        let n = x.len();
        let k = n - 2;
        let src = |a: usize| {
            if a < k {
                Some(a)
            } else if a == k {
                None
            } else {
                Some(a - 1)
            }
        };
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                if let (Some(i), Some(j)) = (src(a), src(b)) {
                    out[a * n + b] = h[i * (n - 1) + j];
                }
            }
        }
        Some(out)
    }
}

/// `(x, t)` from `(x, x_{d+1}, t)`.
fn drop_lifted(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut c = x[..n - 2].to_vec();
    c.push(x[n - 1]);
    c
}

/// `𝐋_n((x,t),(y,s)) = 𝖫_n((X,t),(Y,s)) + 𝖫_n((X,t),(Y_*,s))`.
pub fn cone_kernel_eval(ev: &SurfaceKernelEvaluator, a: &ConePoint, b: &ConePoint) -> Result<f64> {
    if ev.weight().d() != a.d() + 1 || a.d() != b.d() {
        return Err(Error::Configuration(format!(
            "kernel built for V₀^{} cannot act on cone points of dimension {} and {}",
            ev.weight().d() + 1,
            a.d(),
            b.d()
        )));
    }
    let x = lift(a, Sheet::Upper).surface_point()?;
    let y = lift(b, Sheet::Upper);
    let first = ev.eval(&x, &y.surface_point()?)?;
    let second = ev.eval(&x, &y.reflected().surface_point()?)?;
    Ok(first + second)
}

/// `dim V_n(V^{d+1}, W) = C(n+d, n)`, the number of degree-`n` orthogonal polynomials.
pub fn cone_space_dim(d: usize, n: usize) -> usize {
    binomial(n + d, n).round() as usize
}

/// `dim Π_n(V^{d+1}) = C(n+d+1, n)`.
pub fn cone_polynomial_dim(d: usize, n: usize) -> usize {
    binomial(n + d + 1, n).round() as usize
}

/// Direct product rule on the cone: `t` against `t^{d-1}(1-t)^γ`, `s = ‖x‖²/t²`
/// against `s^{(d-2)/2}(1-s)^{-1/2}`, and a rule on `S^{d-1}`; weights sum to one.
#[derive(Debug, Clone)]
pub struct ConeRules {
    weight: ConeWeight,
    pub t_rule: QuadratureRule,
    pub s_rule: QuadratureRule,
    pub sphere: SphericalQuadrature,
}

impl ConeRules {
    pub fn new(weight: ConeWeight, t_nodes: usize, s_nodes: usize, sphere_degree: usize) -> Result<Self> {
        let t_rule = gauss_jacobi_unit(&weight.t_params(), t_nodes)?.normalized();
        let s_rule = gauss_jacobi_unit(&weight.s_params(), s_nodes)?.normalized();
        let sphere = spherical_quadrature(weight.d, sphere_degree)?;
        Ok(Self { weight, t_rule, s_rule, sphere })
    }

    /// Exact for polynomials of degree `k`.
    pub fn for_degree(weight: ConeWeight, k: usize) -> Result<Self> {
        Self::new(weight, k + 32, k / 2 + 16, k + 8)
    }

    pub fn weight(&self) -> &ConeWeight {
        &self.weight
    }

    pub fn len(&self) -> usize {
        self.t_rule.len() * self.s_rule.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(weight, t, y)` with `y = x/t` in the unit ball.
    pub fn nodes(&self) -> Vec<(f64, f64, Vec<f64>)> {
        let area = sphere_area(self.weight.d);
        let mut out = Vec::with_capacity(self.len());
        for (&t, &wt) in self.t_rule.nodes.iter().zip(&self.t_rule.weights) {
            for (&s, &ws) in self.s_rule.nodes.iter().zip(&self.s_rule.weights) {
                let r = s.sqrt();
                for (eta, &we) in self.sphere.points.iter().zip(&self.sphere.weights) {
                    let y = eta.coords().iter().map(|c| r * c).collect();
                    out.push((wt * ws * we / area, t, y));
                }
            }
        }
        out
    }

    /// `∫ f W_γ` normalized so that `1 ↦ 1`.
    pub fn integrate(&self, f: &dyn Field) -> f64 {
        use rayon::prelude::*;
        let terms: Vec<f64> = self.nodes().par_iter().map(|(w, t, y)| w * f.value(&ambient(*t, y))).collect();
        terms.iter().sum()
    }

    /// `‖g‖_{p,W_γ}` with `g` given in `(t, y)`; the sup is taken over the nodes.
    pub fn norm(&self, p: Exponent, g: impl Fn(f64, &[f64]) -> f64 + Sync) -> f64 {
        use rayon::prelude::*;
        let samples: Vec<(f64, f64)> = self.nodes().par_iter().map(|(w, t, y)| (*w, g(*t, y))).collect();
        p.norm(samples)
    }
}

/// `∫_V f W_γ` through the lift, on rules for `V₀^{d+2}`.
pub fn cone_integrate(f: &dyn Field, weight: &ConeWeight, rules: &SurfaceRules) -> Result<f64> {
    check_lift(weight, rules.weight())?;
    Ok(crate::surface::surface_measure_integrate(&Lifted(f), rules))
}

fn check_lift(weight: &ConeWeight, surface: &SurfaceWeight) -> Result<()> {
    if *surface != weight.surface() {
        return Err(Error::Configuration(format!(
            "surface rules for d={} γ={} do not match the lift of the cone weight d={} γ={}",
            surface.d(),
            surface.gamma(),
            weight.d,
            weight.gamma
        )));
    }
    Ok(())
}

/// A polynomial on the cone stored as an even polynomial on the lift.
#[derive(Debug, Clone)]
pub struct ConeExpansion {
    inner: SurfaceExpansion,
}

impl ConeExpansion {
    pub fn new(inner: SurfaceExpansion) -> Self {
        Self { inner }
    }

    pub fn surface(&self) -> &SurfaceExpansion {
        &self.inner
    }

    pub fn eval(&self, p: &ConePoint) -> Result<f64> {
        Ok(self.inner.eval_point(&lift(p, Sheet::Upper).surface_point()?))
    }
}

impl Field for ConeExpansion {
    fn value(&self, x: &[f64]) -> f64 {
        let d = x.len() - 1;
        let t = x[d];
        if t <= 0.0 {
            let mut e = vec![0.0; d + 1];
            e[d] = 1.0;
            return self.inner.eval(0.0, &e);
        }
        let mut xi: Vec<f64> = x[..d].iter().map(|c| c / t).collect();
        xi.push(cone_phi(&x[..d], t) / t);
        self.inner.eval(t, &xi)
    }
}

/// `𝐋_n f` computed as `𝖫_n f̃` on the lift.
#[derive(Debug, Clone)]
pub struct ConeOperator {
    weight: ConeWeight,
    inner: SurfaceOperator,
}

impl ConeOperator {
    pub fn new(weight: ConeWeight, n: usize, cutoff: CutoffSpec, rules: Arc<SurfaceRules>) -> Result<Self> {
        check_lift(&weight, rules.weight())?;
        Ok(Self { weight, inner: SurfaceOperator::new(weight.surface(), n, cutoff, rules)? })
    }

    pub fn with_default_rules(weight: ConeWeight, n: usize, cutoff: CutoffSpec) -> Result<Self> {
        Ok(Self { weight, inner: SurfaceOperator::with_default_rules(weight.surface(), n, cutoff)? })
    }

    pub fn weight(&self) -> &ConeWeight {
        &self.weight
    }

    pub fn surface(&self) -> &SurfaceOperator {
        &self.inner
    }

    pub fn apply(&self, f: &dyn Field) -> Result<ConeExpansion> {
        Ok(ConeExpansion::new(self.inner.apply(&Lifted(f))?))
    }
}

pub fn cone_nearbest_apply(op: &ConeOperator, f: &dyn Field, p: &ConePoint) -> Result<f64> {
    op.apply(f)?.eval(p)
}

/// `𝐋_n f(x)` by direct cone quadrature of `½ ∫ f(y) 𝐋_n(x,y) W_γ(y)`.
pub fn cone_nearbest_direct(
    ev: &SurfaceKernelEvaluator,
    f: &dyn Field,
    p: &ConePoint,
    rules: &ConeRules,
) -> Result<f64> {
    use rayon::prelude::*;
    rules
        .nodes()
        .par_iter()
        .map(|(w, t, y)| {
            let q = ConePoint::from_ball(y, *t)?;
            Ok(w * f.value(&q.coords()) * cone_kernel_eval(ev, p, &q)?)
        })
        .collect::<Result<Vec<f64>>>()
        .map(|terms| 0.5 * terms.iter().sum::<f64>())
}

/// `𝐄_n(f)_p` through the lift; see [`best_approx`].
pub fn cone_best_approx(
    f: &dyn Field,
    weight: &ConeWeight,
    n: usize,
    p: Exponent,
    cutoff: CutoffSpec,
) -> Result<BestApprox> {
    best_approx(&Lifted(f), weight.surface(), n, p, cutoff)
}

/// `𝐄_n(f)_2` for several `n`, sharing one projection of `f̃`.
pub fn cone_best_approx_l2_many(f: &dyn Field, weight: &ConeWeight, ns: &[usize]) -> Result<Vec<BestApprox>> {
    best_approx_l2_many(&Lifted(f), weight.surface(), ns, None)
}

#[cfg(test)]
mod tests;
