use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ambient, SurfaceBasis, SurfaceExpansion, SurfaceOperator, SurfacePoint, SurfaceRules, SurfaceWeight};
use crate::error::{Error, Result};
use crate::field::{gradient_of, hessian_of, Derivatives, Field};
use crate::interval::{dt_difference, phi, ModulusOptions, Sampler};
use crate::jet::{Jet, Ring};
use crate::norm::Exponent;
use crate::sphere::{
    euler_difference, rotation_jet, sphere_area, spherical_quadrature, RotationSpec, SphericalQuadrature,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceOptions {
    pub interval: ModulusOptions,
    /// Exactness of the spherical factor of norm rules.
    pub sphere_degree: usize,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self { interval: ModulusOptions { rho: 12.0, theta_steps: 16, nodes: 192, sup_grid: 257 }, sphere_degree: 24 }
    }
}

impl SurfaceOptions {
    /// Norm rules adequate for polynomials of degree `2n`.
    pub fn for_degree(n: usize) -> Self {
        let mut o = Self::default();
        o.interval.nodes = o.interval.nodes.max(4 * n + 64);
        o.sphere_degree = o.sphere_degree.max(4 * n + 8);
        o
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.interval.rho = rho;
        self
    }
}

/// Points and weights for `‖·‖_{p,γ}` on the surface, optionally with `t`
/// restricted to a subinterval.
pub struct SurfaceSampler {
    t: Sampler,
    sphere: SphericalQuadrature,
    sphere_weights: Vec<f64>,
}

impl SurfaceSampler {
    pub fn new(weight: &SurfaceWeight, p: Exponent, range: Option<(f64, f64)>, opts: &SurfaceOptions) -> Result<Self> {
        let t = Sampler::new(Some(&weight.t_params()), range, p, &opts.interval)?;
        let sphere = spherical_quadrature(weight.d(), opts.sphere_degree)?;
        let area = sphere_area(weight.d());
        let sphere_weights = sphere.weights.iter().map(|w| w / area).collect();
        Ok(Self { t, sphere, sphere_weights })
    }

    pub fn norm(&self, p: Exponent, g: impl Fn(f64, &[f64]) -> f64 + Sync) -> f64 {
        self.norm_try(p, |t, xi| Ok(g(t, xi))).expect("infallible")
    }

    /// Like [`norm_try`](Self::norm_try) with `g` evaluated a whole `t`-row at a time.
    pub fn norm_rows(&self, p: Exponent, g: impl Fn(f64, &[&[f64]]) -> Result<Vec<f64>> + Sync) -> Result<f64> {
        use rayon::prelude::*;
        let xis: Vec<&[f64]> = self.sphere.points.iter().map(|x| x.coords()).collect();
        let rows: Vec<Vec<(f64, f64)>> = self
            .t
            .points
            .par_iter()
            .zip(&self.t.weights)
            .map(|(&t, &wt)| {
                Ok(g(t, &xis)?.into_iter().zip(&self.sphere_weights).map(|(v, ws)| (wt * ws, v)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(p.norm(rows.into_iter().flatten()))
    }

    pub fn norm_try(&self, p: Exponent, g: impl Fn(f64, &[f64]) -> Result<f64> + Sync) -> Result<f64> {
        use rayon::prelude::*;
        let rows: Vec<Vec<(f64, f64)>> = self
            .t
            .points
            .par_iter()
            .zip(&self.t.weights)
            .map(|(&t, &wt)| {
                self.sphere
                    .points
                    .iter()
                    .zip(&self.sphere_weights)
                    .map(|(xi, ws)| Ok((wt * ws, g(t, xi.coords())?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(p.norm(rows.into_iter().flatten()))
    }
}

/// The two parts of the surface modulus at one increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceModulus {
    pub h: f64,
    /// `sup_θ ‖Δ^r_{θφ} f_ξ‖` over `t ∈ J_{rh}`.
    pub radial: f64,
    /// `sup_θ max_{i<j} ‖Δ^r_{i,j,θ/√t} f‖`.
    pub euler: f64,
}

impl SurfaceModulus {
    pub fn total(&self) -> f64 {
        self.radial + self.euler
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceModulusReport {
    pub r: usize,
    pub p: Exponent,
    pub values: Vec<SurfaceModulus>,
}

impl SurfaceModulusReport {
    pub fn totals(&self) -> Vec<f64> {
        self.values.iter().map(SurfaceModulus::total).collect()
    }
}

/// Rotation angle `θ/√t` reduced to `[0, 2π)`.
fn euler_angle(theta: f64, t: f64) -> f64 {
    (theta / t.sqrt()).rem_euclid(std::f64::consts::TAU)
}

/// `Δ^r_{i,j,θ/√t} f(tξ, t)`; zero at the apex, where every rotation is trivial.
pub fn surface_euler_difference(f: &dyn Field, spec: &RotationSpec, r: usize, theta: f64, t: f64, xi: &[f64]) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    euler_difference(f, &spec.with_angle(euler_angle(theta, t)), r, &ambient(t, xi))
}

/// `Δ^r_{θφ} f_ξ(t)` with `f_ξ(s) = f(sξ, s)`.
pub fn surface_radial_difference(f: &dyn Field, r: usize, theta: f64, t: f64, xi: &[f64]) -> f64 {
    dt_difference(&|s| f.value(&ambient(s, xi)), r, theta, t)
}

fn check_increment(r: usize, h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Domain(format!("increment must lie in (0,1], got {h}")));
    }
    if r == 0 {
        return Err(Error::ParameterDomain("modulus order must be >= 1".into()));
    }
    Ok(())
}

/// `ω_A`: `sup_θ ‖Δ^r_{θφ} f_ξ‖` over the main part `J_{rh}`.
pub fn surface_radial_modulus(
    f: &dyn Field,
    weight: &SurfaceWeight,
    r: usize,
    h: f64,
    p: Exponent,
    opts: &SurfaceOptions,
) -> Result<f64> {
    check_increment(r, h)?;
    let main = SurfaceSampler::new(weight, p, Some(opts.interval.main_part(r, h)?), opts)?;
    Ok(opts
        .interval
        .theta_grid(h)
        .into_iter()
        .map(|theta| main.norm(p, |t, xi| surface_radial_difference(f, r, theta, t, xi)))
        .fold(0.0, f64::max))
}

/// `ω_B`: `sup_θ max_{i<j} ‖Δ^r_{i,j,θ/√t} f‖`.
pub fn surface_euler_modulus(
    f: &dyn Field,
    weight: &SurfaceWeight,
    r: usize,
    h: f64,
    p: Exponent,
    opts: &SurfaceOptions,
) -> Result<f64> {
    check_increment(r, h)?;
    let full = SurfaceSampler::new(weight, p, None, opts)?;
    let planes = RotationSpec::planes(weight.d());
    let mut euler = 0.0f64;
    for theta in opts.interval.theta_grid(h) {
        for plane in &planes {
            euler = euler.max(full.norm(p, |t, xi| surface_euler_difference(f, plane, r, theta, t, xi)));
        }
    }
    Ok(euler)
}

pub fn surface_modulus(
    f: &dyn Field,
    weight: &SurfaceWeight,
    r: usize,
    h: f64,
    p: Exponent,
    opts: &SurfaceOptions,
) -> Result<SurfaceModulus> {
    let radial = surface_radial_modulus(f, weight, r, h, p, opts)?;
    let euler = surface_euler_modulus(f, weight, r, h, p, opts)?;
    Ok(SurfaceModulus { h, radial, euler })
}

pub fn surface_modulus_report(
    f: &dyn Field,
    weight: &SurfaceWeight,
    r: usize,
    hs: &[f64],
    p: Exponent,
    opts: &SurfaceOptions,
) -> Result<SurfaceModulusReport> {
    let values = hs.iter().map(|&h| surface_modulus(f, weight, r, h, p, opts)).collect::<Result<_>>()?;
    Ok(SurfaceModulusReport { r, p, values })
}

/// A quantity a candidate reports at `(tξ, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Value,
    /// `∂_t^r` along the ray.
    Radial(usize),
    /// `D_{i,j}^r`, axes from 1.
    Angular {
        i: usize,
        j: usize,
        r: usize,
    },
}

/// A smooth `g` offered to the K-functional, with the derivatives it needs.
pub trait SurfaceCandidate: Sync {
    fn value(&self, t: f64, xi: &[f64]) -> f64;
    /// `∂_t^r g(sξ, s)` at `s = t`.
    fn radial_derivative(&self, r: usize, t: f64, xi: &[f64]) -> Result<f64>;
    /// `D_{i,j}^r g` at `(tξ, t)`, axes from 1.
    fn angular_derivative(&self, i: usize, j: usize, r: usize, t: f64, xi: &[f64]) -> Result<f64>;

    /// `q` at `(tξ, t)` for every `ξ` of one row.
    fn row(&self, q: Quantity, t: f64, xis: &[&[f64]]) -> Result<Vec<f64>> {
        xis.iter()
            .map(|xi| match q {
                Quantity::Value => Ok(self.value(t, xi)),
                Quantity::Radial(r) => self.radial_derivative(r, t, xi),
                Quantity::Angular { i, j, r } => self.angular_derivative(i, j, r, t, xi),
            })
            .collect()
    }
}

fn check_order(r: usize) -> Result<()> {
    if (1..=2).contains(&r) {
        Ok(())
    } else {
        Err(Error::Capability(format!("derivatives of order {r} are not available")))
    }
}

impl SurfaceCandidate for SurfaceExpansion {
    fn value(&self, t: f64, xi: &[f64]) -> f64 {
        self.eval(t, xi)
    }

    fn radial_derivative(&self, r: usize, t: f64, xi: &[f64]) -> Result<f64> {
        check_order(r)?;
        Ok(self.radial_jet(t, xi).derivative(r))
    }

    fn angular_derivative(&self, i: usize, j: usize, r: usize, t: f64, xi: &[f64]) -> Result<f64> {
        check_order(r)?;
        Ok(self.angular_jet(i, j, t, xi).derivative(r))
    }

    fn row(&self, q: Quantity, t: f64, xis: &[&[f64]]) -> Result<Vec<f64>> {
        let basis = self.basis();
        match q {
            Quantity::Value => {
                let b = self.row_coefficients(&basis.radial_table(t));
                Ok(xis.iter().map(|xi| dot_blocks(&b, &basis.harmonics().values(xi))).collect())
            }
            Quantity::Radial(r) => {
                check_order(r)?;
                let b = self.row_coefficients(&basis.radial_table(Jet::variable(t)));
                Ok(xis
                    .iter()
                    .map(|xi| {
                        let harm = basis.harmonics().values(xi);
                        let mut acc = Jet::constant(0.0);
                        for (bm, hm) in b.iter().zip(&harm) {
                            for (x, y) in bm.iter().zip(hm) {
                                acc = acc + x.scale(*y);
                            }
                        }
                        acc.derivative(r)
                    })
                    .collect())
            }
            Quantity::Angular { i, j, r } => {
                check_order(r)?;
                let b = self.row_coefficients(&basis.radial_table(t));
                let mut harm = Vec::new();
                Ok(xis
                    .iter()
                    .map(|xi| {
                        basis.harmonics().fill(&rotation_jet(i, j, xi), &mut harm);
                        let mut acc = Jet::constant(0.0);
                        for (bm, hm) in b.iter().zip(&harm) {
                            for (x, y) in bm.iter().zip(hm) {
                                acc = acc + y.scale(*x);
                            }
                        }
                        acc.derivative(r)
                    })
                    .collect())
            }
        }
    }
}

fn dot_blocks(b: &[Vec<f64>], harm: &[Vec<f64>]) -> f64 {
    b.iter().zip(harm).map(|(x, y)| x.iter().zip(y).map(|(a, c)| a * c).sum::<f64>()).sum()
}

/// A [`Field`] used as its own candidate; derivatives come from its partials.
pub struct FieldCandidate<'a> {
    pub field: &'a dyn Field,
    pub mode: Derivatives,
}

impl SurfaceCandidate for FieldCandidate<'_> {
    fn value(&self, t: f64, xi: &[f64]) -> f64 {
        self.field.value(&ambient(t, xi))
    }

    fn radial_derivative(&self, r: usize, t: f64, xi: &[f64]) -> Result<f64> {
        check_order(r)?;
        let x = ambient(t, xi);
        let n = x.len();
        // direction of the ray: (ξ, 1)
        let dir: Vec<f64> = xi.iter().copied().chain(std::iter::once(1.0)).collect();
        if r == 1 {
            let g = gradient_of(self.field, &x, self.mode)?;
            return Ok(g.iter().zip(&dir).map(|(a, b)| a * b).sum());
        }
        let h = hessian_of(self.field, &x, self.mode)?;
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += dir[a] * h[a * n + b] * dir[b];
            }
        }
        Ok(acc)
    }

    fn angular_derivative(&self, i: usize, j: usize, r: usize, t: f64, xi: &[f64]) -> Result<f64> {
        check_order(r)?;
        crate::sphere::angular_derivative(self.field, i, j, r, &ambient(t, xi), self.mode)
    }
}

/// The three terms of the K-functional for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KTerms {
    pub fit: f64,
    pub radial: f64,
    pub angular: f64,
}

impl KTerms {
    pub fn total(&self, r: usize, h: f64) -> f64 {
        self.fit + h.powi(r as i32) * (self.radial + self.angular)
    }
}

/// `‖f-g‖`, `‖φ^r ∂_t^r g‖` and `max_{i<j} ‖t^{-r/2} D^r_{i,j} g‖`.
pub fn surface_kterms(
    f: &dyn Field,
    g: &dyn SurfaceCandidate,
    weight: &SurfaceWeight,
    r: usize,
    p: Exponent,
    sampler: &SurfaceSampler,
) -> Result<KTerms> {
    check_order(r)?;
    let fit = sampler.norm_rows(p, |t, xis| {
        let g = g.row(Quantity::Value, t, xis)?;
        Ok(xis.iter().zip(g).map(|(xi, v)| f.value(&ambient(t, xi)) - v).collect())
    })?;
    let radial = sampler.norm_rows(p, |t, xis| {
        let s = phi(t).powi(r as i32);
        Ok(g.row(Quantity::Radial(r), t, xis)?.into_iter().map(|v| s * v).collect())
    })?;
    let mut angular = 0.0f64;
    for plane in RotationSpec::planes(weight.d()) {
        let v = sampler.norm_rows(p, |t, xis| {
            if t <= 0.0 {
                return Ok(vec![0.0; xis.len()]);
            }
            let s = t.powf(r as f64 / 2.0);
            Ok(g.row(Quantity::Angular { i: plane.i(), j: plane.j(), r }, t, xis)?.into_iter().map(|v| v / s).collect())
        })?;
        angular = angular.max(v);
    }
    Ok(KTerms { fit, radial, angular })
}

/// Candidate-minimum upper bound for `K_r(f, h)`.
pub fn surface_kfunctional(
    f: &dyn Field,
    weight: &SurfaceWeight,
    r: usize,
    h: f64,
    p: Exponent,
    candidates: &[&dyn SurfaceCandidate],
    opts: &SurfaceOptions,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::Configuration("the K-functional needs at least one candidate".into()));
    }
    let sampler = SurfaceSampler::new(weight, p, None, opts)?;
    let mut best = f64::INFINITY;
    for g in candidates {
        best = best.min(surface_kterms(f, *g, weight, r, p, &sampler)?.total(r, h));
    }
    Ok(best)
}

/// `L_{2^j} f` for `j = 0..=jmax`.
pub fn default_surface_candidates(
    f: &dyn Field,
    weight: SurfaceWeight,
    jmax: u32,
    cutoff: crate::cutoff::CutoffSpec,
) -> Result<Vec<SurfaceExpansion>> {
    (0..=jmax)
        .map(|j| {
            let n = 1usize << j;
            let rules = Arc::new(SurfaceRules::new(weight, 4 * n + 64, 4 * n + 8)?);
            SurfaceOperator::new(weight, n, cutoff, rules)?.apply(f)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutationKind {
    RadialDifference,
    EulerDifference,
}

/// Settings for [`commutation_check`].
#[derive(Debug, Clone)]
pub struct CommutationParams {
    pub r: usize,
    pub theta: f64,
    /// Rotation plane for the Euler kind.
    pub plane: (usize, usize),
    pub points: Vec<SurfacePoint>,
}

/// `max |Δ(L_n f) - L_n(Δf)|` over the sample points.
///
/// For the Euler kind the angle `ψ = θ/√t` is fixed by each evaluation
/// point and the same rotation is used on both sides.
pub fn commutation_check(
    op: &SurfaceOperator,
    f: &dyn Field,
    kind: CommutationKind,
    params: &CommutationParams,
) -> Result<f64> {
    let d = op.basis().weight().d();
    let lf = op.apply(f)?;
    let r = params.r;
    let theta = params.theta;
    let mut worst = 0.0f64;
    match kind {
        CommutationKind::RadialDifference => {
            let diff = move |x: &[f64]| {
                let (t, xi) = super::expansion::split_ambient(x);
                surface_radial_difference(f, r, theta, t, &xi)
            };
            let ldiff = op.apply(&diff)?;
            for p in &params.points {
                let xi = p.xi().coords();
                let lhs = dt_difference(&|s| lf.eval(s, xi), r, theta, p.t());
                worst = worst.max((lhs - ldiff.eval_point(p)).abs());
            }
        }
        CommutationKind::EulerDifference => {
            let plane = RotationSpec::new(d, params.plane.0, params.plane.1, 0.0)?;
            for p in &params.points {
                let spec = plane.with_angle(euler_angle(theta, p.t().max(f64::MIN_POSITIVE)));
                let lhs = euler_difference(&lf, &spec, r, &p.ambient());
                let diff = |x: &[f64]| euler_difference(f, &spec, r, x);
                let rhs = op.apply(&diff)?.eval_point(p);
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinRatios {
    pub n: usize,
    /// `max ‖t^{-r/2} D^r_{i,j} f‖ / (n^r ‖f‖)`
    pub angular: f64,
    /// `max ‖φ^r ∂_t^r f‖ / (n^r ‖f‖)`
    pub radial: f64,
}

/// Random polynomial of degree `n` with standard normal coefficients.
pub fn random_polynomial(weight: SurfaceWeight, n: usize, rng: &mut ChaCha8Rng) -> Result<SurfaceExpansion> {
    let basis = Arc::new(SurfaceBasis::new(weight, n)?);
    let coeffs = (0..basis.len()).map(|_| StandardNormal.sample(rng)).collect();
    SurfaceExpansion::new(basis, coeffs)
}

pub fn bernstein_ratio(
    weight: SurfaceWeight,
    n: usize,
    r: usize,
    trials: usize,
    p: Exponent,
    seed: u64,
) -> Result<BernsteinRatios> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys = (0..trials).map(|_| random_polynomial(weight, n, &mut rng)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&dyn SurfaceCandidate> = polys.iter().map(|g| g as &dyn SurfaceCandidate).collect();
    bernstein_ratio_for(&weight, n, r, &refs, p)
}

/// Bernstein ratios for given polynomials of degree at most `n`.
pub fn bernstein_ratio_for(
    weight: &SurfaceWeight,
    n: usize,
    r: usize,
    polys: &[&dyn SurfaceCandidate],
    p: Exponent,
) -> Result<BernsteinRatios> {
    let sampler = SurfaceSampler::new(weight, p, None, &SurfaceOptions::for_degree(n))?;
    let zero = |_: &[f64]| 0.0;
    let scale = (n.max(1) as f64).powi(r as i32);
    let (mut angular, mut radial) = (0.0f64, 0.0f64);
    for g in polys {
        let terms = surface_kterms(&zero, *g, weight, r, p, &sampler)?;
        if terms.fit > 0.0 {
            angular = angular.max(terms.angular / (scale * terms.fit));
            radial = radial.max(terms.radial / (scale * terms.fit));
        }
    }
    Ok(BernsteinRatios { n, angular, radial })
}
