use serde::{Deserialize, Serialize};

use super::{cone_phi, ConeRules, ConeWeight, Lifted};
use crate::error::{Error, Result};
use crate::field::{gradient_of, hessian_of, Derivatives, Field};
use crate::interval::phi;
use crate::norm::Exponent;
use crate::sphere::{rotate, RotationSpec};
use crate::surface::{
    ambient, surface_euler_difference, surface_radial_difference, FieldCandidate, Quantity, SurfaceCandidate,
    SurfaceExpansion, SurfaceOptions, SurfaceSampler,
};

/// The radial part of the cone modulus can be restricted to either interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialInterval {
    /// `J_{rh} = [ρ r²h², 1 - ρ r²h²]` as on the surface.
    Surface,
    /// `I_{rh} = [r²h², 1 - r²h²]`.
    Cone,
}

impl RadialInterval {
    pub fn range(&self, r: usize, h: f64, opts: &SurfaceOptions) -> Result<(f64, f64)> {
        match self {
            RadialInterval::Surface => opts.interval.main_part(r, h),
            RadialInterval::Cone => {
                let e = (r * r) as f64 * h * h;
                if e >= 0.5 {
                    return Err(Error::DegenerateInput(format!("interval I_(rh) is empty for r={r}, h={h}")));
                }
                Ok((e, 1.0 - e))
            }
        }
    }
}

/// The components of the cone modulus at one increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeModulus {
    pub h: f64,
    /// `sup_θ max_{i<j≤d} ‖Δ^r_{i,j,θ/√t} f‖_{p,W_γ}`.
    pub inner: f64,
    /// `sup_θ max_{i≤d} ‖Δ^r_{i,d+1,θ/√t} f̃‖` on the lift.
    pub lateral: f64,
    /// `sup_θ ‖Δ^r_{θφ} f̃‖` over `J_{rh}`.
    pub radial: f64,
    /// The same over `I_{rh}`, or `None` when that interval is empty.
    pub radial_cone_interval: Option<f64>,
}

impl ConeModulus {
    pub fn total(&self) -> f64 {
        self.inner + self.lateral + self.radial
    }

    /// Total with the radial part over `I_{rh}`.
    pub fn total_cone_interval(&self) -> Option<f64> {
        self.radial_cone_interval.map(|r| self.inner + self.lateral + r)
    }
}

/// Direct cone rules matching the resolution of `opts`.
pub fn cone_norm_rules(weight: &ConeWeight, opts: &SurfaceOptions) -> Result<ConeRules> {
    ConeRules::new(*weight, opts.interval.nodes, (opts.interval.nodes / 2).max(8), opts.sphere_degree)
}

pub fn cone_modulus(
    f: &dyn Field,
    weight: &ConeWeight,
    r: usize,
    h: f64,
    p: Exponent,
    opts: &SurfaceOptions,
) -> Result<ConeModulus> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Domain(format!("increment must lie in (0,1], got {h}")));
    }
    if r == 0 {
        return Err(Error::ParameterDomain("modulus order must be >= 1".into()));
    }
    let d = weight.d();
    let sw = weight.surface();
    let lifted = Lifted(f);
    let cone = cone_norm_rules(weight, opts)?;
    let full = SurfaceSampler::new(&sw, p, None, opts)?;
    let main = SurfaceSampler::new(&sw, p, Some(RadialInterval::Surface.range(r, h, opts)?), opts)?;
    let alt = match RadialInterval::Cone.range(r, h, opts) {
        Ok(range) => Some(SurfaceSampler::new(&sw, p, Some(range), opts)?),
        Err(Error::DegenerateInput(_)) => None,
        Err(e) => return Err(e),
    };
    let inner_planes = RotationSpec::planes(d);
    let lateral_planes = (1..=d).map(|i| RotationSpec::new(d + 1, i, d + 1, 0.0)).collect::<Result<Vec<_>>>()?;
    let mut out =
        ConeModulus { h, inner: 0.0, lateral: 0.0, radial: 0.0, radial_cone_interval: alt.as_ref().map(|_| 0.0) };
    for theta in opts.interval.theta_grid(h) {
        for plane in &inner_planes {
            let v = cone.norm(p, |t, y| surface_euler_difference(f, plane, r, theta, t, y));
            out.inner = out.inner.max(v);
        }
        for plane in &lateral_planes {
            let v = full.norm(p, |t, xi| surface_euler_difference(&lifted, plane, r, theta, t, xi));
            out.lateral = out.lateral.max(v);
        }
        let radial = |t: f64, xi: &[f64]| surface_radial_difference(&lifted, r, theta, t, xi);
        out.radial = out.radial.max(main.norm(p, radial));
        if let (Some(s), Some(v)) = (&alt, out.radial_cone_interval.as_mut()) {
            *v = v.max(s.norm(p, radial));
        }
    }
    Ok(out)
}

/// Maximum deviation in the identity `(-Φ∂_i)^r g(x,t) = D^r_{i,d+1} g̃(X,t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiIdentityCheck {
    pub max_deviation: f64,
    pub evaluated: usize,
    /// Samples with `Φ < 1e-6`.
    pub skipped: usize,
}

/// `(Φ ∂_i)^r g` at cone coordinates `(x, t)`, for `r ≤ 2`.
pub fn phi_derivative(g: &dyn Field, i: usize, r: usize, x: &[f64], mode: Derivatives) -> Result<f64> {
    let d = x.len() - 1;
    if i == 0 || i > d {
        return Err(Error::Index(format!("axis {i} outside 1..={d}")));
    }
    let k = i - 1;
    let big_phi = cone_phi(&x[..d], x[d]);
    match r {
        1 => Ok(big_phi * gradient_of(g, x, mode)?[k]),
        // Φ∂_i(Φ ∂_i g) with ∂_iΦ = -x_i/Φ
        2 => {
            let grad = gradient_of(g, x, mode)?;
            let hess = hessian_of(g, x, mode)?;
            Ok(big_phi * big_phi * hess[k * (d + 1) + k] - x[k] * grad[k])
        }
        _ => Err(Error::Capability(format!("derivatives of order {r} are not available"))),
    }
}

const PHI_SKIP: f64 = 1e-6;

/// `d^r/dθ^r f(Q_θ x)` at `θ = 0` from Richardson-extrapolated central
/// differences, for `r ≤ 2`.
pub fn rotation_derivative(f: &dyn Field, i: usize, j: usize, r: usize, x: &[f64]) -> Result<f64> {
    let spec = RotationSpec::new(x.len(), i, j, 0.0)?;
    let at = |theta: f64| f.value(&rotate(&spec.with_angle(theta), x));
    let (quotient, step): (Box<dyn Fn(f64) -> f64>, f64) = match r {
        1 => (Box::new(|h| (at(h) - at(-h)) / (2.0 * h)), 2e-3),
        2 => {
            let mid = at(0.0);
            (Box::new(move |h| (at(h) - 2.0 * mid + at(-h)) / (h * h)), 2e-2)
        }
        _ => return Err(Error::Capability(format!("rotation derivatives of order {r} are not available"))),
    };
    Ok((4.0 * quotient(step / 2.0) - quotient(step)) / 3.0)
}

/// Compares `(-Φ∂_i)^r g`, with derivatives per `mode`, against `D^r_{i,d+1} g̃`
/// obtained by rotating the lifted point.
pub fn phi_derivative_identity_check(
    g: &dyn Field,
    i: usize,
    r: usize,
    samples: &[super::ConePoint],
    mode: Derivatives,
) -> Result<PhiIdentityCheck> {
    let lifted = Lifted(g);
    let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut out = PhiIdentityCheck { max_deviation: 0.0, evaluated: 0, skipped: 0 };
    for p in samples {
        if p.phi() < PHI_SKIP {
            out.skipped += 1;
            continue;
        }
        let lhs = sign * phi_derivative(g, i, r, &p.coords(), mode)?;
        let big = super::lift(p, super::Sheet::Upper).ambient();
        let rhs = rotation_derivative(&lifted, i, p.d() + 1, r, &big)?;
        out.max_deviation = out.max_deviation.max((lhs - rhs).abs());
        out.evaluated += 1;
    }
    Ok(out)
}

/// A smooth `g` for the cone K-functional, queried at lifted points `(tξ, t)`.
///
/// The radial derivative is taken along the ray through the lifted point.
pub trait ConeCandidate: SurfaceCandidate {
    /// `(Φ ∂_i)^r g` at the cone point below `(tξ, t)`.
    fn phi_derivative(&self, i: usize, r: usize, t: f64, xi: &[f64]) -> Result<f64>;

    /// [`phi_derivative`](Self::phi_derivative) for every `ξ` of one row.
    fn phi_row(&self, i: usize, r: usize, t: f64, xis: &[&[f64]]) -> Result<Vec<f64>> {
        xis.iter().map(|xi| self.phi_derivative(i, r, t, xi)).collect()
    }
}

fn phi_sign(r: usize) -> f64 {
    if r.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl ConeCandidate for SurfaceExpansion {
    fn phi_derivative(&self, i: usize, r: usize, t: f64, xi: &[f64]) -> Result<f64> {
        Ok(phi_sign(r) * self.angular_derivative(i, xi.len(), r, t, xi)?)
    }

    fn phi_row(&self, i: usize, r: usize, t: f64, xis: &[&[f64]]) -> Result<Vec<f64>> {
        let j = self.basis().weight().d();
        Ok(self.row(Quantity::Angular { i, j, r }, t, xis)?.into_iter().map(|v| phi_sign(r) * v).collect())
    }
}

/// A cone field used as its own candidate.
pub struct ConeFieldCandidate<'a> {
    lifted: Lifted<'a>,
    mode: Derivatives,
}

impl<'a> ConeFieldCandidate<'a> {
    pub fn new(field: &'a dyn Field, mode: Derivatives) -> Self {
        Self { lifted: Lifted(field), mode }
    }

    fn surface(&self) -> FieldCandidate<'_> {
        FieldCandidate { field: &self.lifted, mode: self.mode }
    }
}

impl SurfaceCandidate for ConeFieldCandidate<'_> {
    fn value(&self, t: f64, xi: &[f64]) -> f64 {
        self.surface().value(t, xi)
    }

    fn radial_derivative(&self, r: usize, t: f64, xi: &[f64]) -> Result<f64> {
        self.surface().radial_derivative(r, t, xi)
    }

    fn angular_derivative(&self, i: usize, j: usize, r: usize, t: f64, xi: &[f64]) -> Result<f64> {
        self.surface().angular_derivative(i, j, r, t, xi)
    }
}

impl ConeCandidate for ConeFieldCandidate<'_> {
    fn phi_derivative(&self, i: usize, r: usize, t: f64, xi: &[f64]) -> Result<f64> {
        let d = xi.len() - 1;
        phi_derivative(self.lifted.0, i, r, &ambient(t, &xi[..d]), self.mode)
    }
}

/// The four terms of the cone K-functional for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeKTerms {
    pub fit: f64,
    pub radial: f64,
    /// `max_{i<j≤d} ‖t^{-r/2} D^r_{i,j} g‖`
    pub angular: f64,
    /// `max_{i≤d} ‖t^{-r/2} (Φ∂_i)^r g‖`
    pub phi: f64,
}

impl ConeKTerms {
    pub fn total(&self, r: usize, h: f64) -> f64 {
        self.fit + h.powi(r as i32) * (self.radial + self.angular + self.phi)
    }
}

pub fn cone_kterms(
    f: &dyn Field,
    g: &dyn ConeCandidate,
    weight: &ConeWeight,
    r: usize,
    p: Exponent,
    sampler: &SurfaceSampler,
) -> Result<ConeKTerms> {
    if !(1..=2).contains(&r) {
        return Err(Error::Capability(format!("derivatives of order {r} are not available")));
    }
    let lifted = Lifted(f);
    let scaled = |t: f64, v: f64| {
        if t <= 0.0 {
            0.0
        } else {
            v / t.powf(r as f64 / 2.0)
        }
    };
    let fit = sampler.norm_rows(p, |t, xis| {
        let g = g.row(Quantity::Value, t, xis)?;
        Ok(xis.iter().zip(g).map(|(xi, v)| lifted.value(&ambient(t, xi)) - v).collect())
    })?;
    let radial = sampler.norm_rows(p, |t, xis| {
        let s = phi(t).powi(r as i32);
        Ok(g.row(Quantity::Radial(r), t, xis)?.into_iter().map(|v| s * v).collect())
    })?;
    let scaled_row = |t: f64, v: Vec<f64>| v.into_iter().map(|v| scaled(t, v)).collect::<Vec<f64>>();
    let mut angular = 0.0f64;
    for plane in RotationSpec::planes(weight.d()) {
        let q = Quantity::Angular { i: plane.i(), j: plane.j(), r };
        let v = sampler.norm_rows(p, |t, xis| {
            if t <= 0.0 {
                return Ok(vec![0.0; xis.len()]);
            }
            Ok(scaled_row(t, g.row(q, t, xis)?))
        })?;
        angular = angular.max(v);
    }
    let mut phi_term = 0.0f64;
    for i in 1..=weight.d() {
        let v = sampler.norm_rows(p, |t, xis| {
            if t <= 0.0 {
                return Ok(vec![0.0; xis.len()]);
            }
            Ok(scaled_row(t, g.phi_row(i, r, t, xis)?))
        })?;
        phi_term = phi_term.max(v);
    }
    Ok(ConeKTerms { fit, radial, angular, phi: phi_term })
}

/// Candidate-minimum upper bound for `𝐊_r(f, h)`.
pub fn cone_kfunctional(
    f: &dyn Field,
    weight: &ConeWeight,
    r: usize,
    h: f64,
    p: Exponent,
    candidates: &[&dyn ConeCandidate],
    opts: &SurfaceOptions,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::Configuration("the K-functional needs at least one candidate".into()));
    }
    let sampler = SurfaceSampler::new(&weight.surface(), p, None, opts)?;
    let mut best = f64::INFINITY;
    for g in candidates {
        best = best.min(cone_kterms(f, *g, weight, r, p, &sampler)?.total(r, h));
    }
    Ok(best)
}

/// `𝐋_{2^j} f` for `j = 0..=jmax`, stored on the lift.
pub fn default_cone_candidates(
    f: &dyn Field,
    weight: &ConeWeight,
    jmax: u32,
    cutoff: crate::cutoff::CutoffSpec,
) -> Result<Vec<SurfaceExpansion>> {
    crate::surface::default_surface_candidates(&Lifted(f), weight.surface(), jmax, cutoff)
}
