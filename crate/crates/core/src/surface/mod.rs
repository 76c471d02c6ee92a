//! The conic surface `V₀ = {(x,t): ‖x‖ = t, 0 ≤ t ≤ 1}` with weight
//! `t^{-1}(1-t)^γ`.
//!
//! Points are written `(tξ, t)`. Integrals factor as
//! `∫ f dm = ∫_0^1 t^{d-1} ∫_S f(tξ,t) dσ(ξ) dt`, so the weighted measure
//! is the product of `c ϖ_{d-2,γ}(t) dt` and `dσ/σ_d`.
//!
//! The orthonormal basis is
//! `Ŝ_{j,m,ℓ}(tξ,t) = s_m p_j^{(2m+d-2,γ)}(1-2t) t^m Y_{m,ℓ}(ξ)`, where
//! `p_j` are orthonormal for the normalized `[0,1]` Jacobi measure and
//! `s_m` absorbs the shift from `ϖ_{d-2,γ}` to `ϖ_{2m+d-2,γ}` and `σ_d`.

mod expansion;
mod kernel;
mod modulus;

pub use expansion::*;
pub use kernel::*;
pub use modulus::*;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::interval::clamped_acos;
use crate::jacobi::{gauss_jacobi_unit, jacobi_eval, jacobi_norm, JacobiParams, OrthonormalLadder, QuadratureRule};
use crate::jet::Ring;
use crate::sphere::{
    check_dim, harmonic_dim, sphere_area, spherical_quadrature, HarmonicBasis, SphericalQuadrature, UnitVector,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceWeight {
    d: usize,
    gamma: f64,
}

impl SurfaceWeight {
    pub fn new(d: usize, gamma: f64) -> Result<Self> {
        check_dim(d)?;
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::ParameterDomain(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Self { d, gamma })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Parameters of the effective radial weight `ϖ_{d-2,γ}`.
    pub fn t_params(&self) -> JacobiParams {
        JacobiParams::new(self.d as f64 - 2.0, self.gamma).expect("validated")
    }

    /// Radial parameters of the degree-`m` harmonic block.
    pub fn block_params(&self, m: usize) -> JacobiParams {
        JacobiParams::new((2 * m + self.d) as f64 - 2.0, self.gamma).expect("validated")
    }

    /// `𝗐_{γ,d}(n;t) = (t+n^{-2})^{(d-2)/2} (1-t+n^{-2})^{γ+1/2}`.
    pub fn regularized(&self, n: usize, t: f64) -> f64 {
        let e = 1.0 / (n * n).max(1) as f64;
        (t + e).powf((self.d as f64 - 2.0) / 2.0) * (1.0 - t + e).powf(self.gamma + 0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    xi: UnitVector,
    t: f64,
}

impl SurfacePoint {
    pub fn new(xi: UnitVector, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t must lie in [0,1], got {t}")));
        }
        Ok(Self { xi, t })
    }

    pub fn from_coords(xi: Vec<f64>, t: f64) -> Result<Self> {
        Self::new(UnitVector::new(xi)?, t)
    }

    pub fn xi(&self) -> &UnitVector {
        &self.xi
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn d(&self) -> usize {
        self.xi.dim()
    }

    /// `(tξ, t)`.
    pub fn ambient(&self) -> Vec<f64> {
        ambient(self.t, self.xi.coords())
    }
}

pub(crate) fn ambient(t: f64, xi: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = xi.iter().map(|c| t * c).collect();
    x.push(t);
    x
}

/// `arccos(√((⟨x,y⟩ + ts)/2) + √(1-t)√(1-s))`.
pub fn surface_distance(a: &SurfacePoint, b: &SurfacePoint) -> f64 {
    let (t, s) = (a.t, b.t);
    let inner = t * s * a.xi.dot(&b.xi);
    let c = ((inner + t * s) / 2.0).max(0.0).sqrt() + ((1.0 - t) * (1.0 - s)).sqrt();
    clamped_acos(c)
}

/// `n^d / (1 + n u)^κ`.
pub fn g_kappa(n: usize, d: usize, kappa: f64, u: f64) -> f64 {
    let n = n as f64;
    n.powi(d as i32) / (1.0 + n * u).powf(kappa)
}

/// `dim Π_n(V₀^{d+1}) = C(n+d, n) + C(n+d-1, n-1)`.
pub fn polynomial_space_dim(d: usize, n: usize) -> usize {
    let c = |a: usize, b: usize| crate::interval::binomial(a, b).round() as usize;
    c(n + d, n) + if n >= 1 { c(n + d - 1, n - 1) } else { 0 }
}

/// Product rule: normalized Gauss-Jacobi in `t` for `ϖ_{d-2,γ}` times a
/// spherical rule.
#[derive(Debug, Clone)]
pub struct SurfaceRules {
    weight: SurfaceWeight,
    pub t_rule: QuadratureRule,
    pub sphere: SphericalQuadrature,
}

impl SurfaceRules {
    pub fn new(weight: SurfaceWeight, t_nodes: usize, sphere_degree: usize) -> Result<Self> {
        let t_rule = gauss_jacobi_unit(&weight.t_params(), t_nodes)?.normalized();
        let sphere = spherical_quadrature(weight.d, sphere_degree)?;
        Ok(Self { weight, t_rule, sphere })
    }

    /// Rules resolving expansions up to total degree `k` with margin.
    pub fn for_degree(weight: SurfaceWeight, k: usize) -> Result<Self> {
        Self::new(weight, 2 * k + 32, 2 * k + 8)
    }

    pub fn from_parts(weight: SurfaceWeight, t_rule: QuadratureRule, sphere: SphericalQuadrature) -> Result<Self> {
        t_rule.expect_unit(&weight.t_params(), true)?;
        if sphere.d != weight.d {
            return Err(Error::Configuration(format!(
                "spherical rule for d={} used with weight for d={}",
                sphere.d, weight.d
            )));
        }
        Ok(Self { weight, t_rule, sphere })
    }

    pub fn weight(&self) -> &SurfaceWeight {
        &self.weight
    }

    /// Errors unless both factors integrate polynomials of degree `2k` exactly.
    pub fn check_exactness(&self, k: usize) -> Result<()> {
        if self.t_rule.exact_degree < 2 * k || self.sphere.exact_degree < 2 * k {
            return Err(Error::Configuration(format!(
                "rules exact to degrees ({}, {}) cannot resolve degree {k}",
                self.t_rule.exact_degree, self.sphere.exact_degree
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t_rule.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Normalized sphere weights `w/σ_d`.
    pub(crate) fn sphere_weights(&self) -> Vec<f64> {
        let area = sphere_area(self.weight.d);
        self.sphere.weights.iter().map(|w| w / area).collect()
    }

    /// `f` on the grid, row-major in `(t, ξ)`.
    pub fn sample(&self, f: &dyn Field) -> Vec<f64> {
        self.sample_with(|t, xi| f.value(&ambient(t, xi)))
    }

    pub fn sample_with(&self, f: impl Fn(f64, &[f64]) -> f64 + Sync) -> Vec<f64> {
        let ns = self.sphere.len();
        let mut out = vec![0.0; self.len()];
        out.par_chunks_mut(ns).zip(&self.t_rule.nodes).for_each(|(row, &t)| {
            for (v, xi) in row.iter_mut().zip(&self.sphere.points) {
                *v = f(t, xi.coords());
            }
        });
        out
    }

    /// Weighted sum of grid values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        let sw = self.sphere_weights();
        let ns = sw.len();
        self.t_rule
            .weights
            .iter()
            .enumerate()
            .map(|(i, wt)| wt * values[i * ns..(i + 1) * ns].iter().zip(&sw).map(|(v, w)| v * w).sum::<f64>())
            .sum()
    }

    /// `(weight, value)` pairs for norms of grid values.
    pub fn weighted<'a>(&'a self, values: &'a [f64]) -> impl Iterator<Item = (f64, f64)> + 'a {
        let area = sphere_area(self.weight.d);
        let ns = self.sphere.len();
        values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.t_rule.weights[k / ns] * self.sphere.weights[k % ns] / area, v))
    }
}

/// Integral of `f` against the normalized weight, so `1 ↦ 1`.
pub fn surface_measure_integrate(f: &dyn Field, rules: &SurfaceRules) -> f64 {
    rules.integrate_values(&rules.sample(f))
}

/// Like [`surface_measure_integrate`] with rules supplied separately.
pub fn surface_measure_integrate_with(
    f: &dyn Field,
    weight: &SurfaceWeight,
    t_rule: &QuadratureRule,
    s_rule: &SphericalQuadrature,
) -> Result<f64> {
    let rules = SurfaceRules::from_parts(*weight, t_rule.clone(), s_rule.clone())?;
    Ok(surface_measure_integrate(f, &rules))
}

/// Index of the classical basis polynomial `S^n_{m,ℓ}` (`ℓ` from 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceBasisIndex {
    pub n: usize,
    pub m: usize,
    pub ell: usize,
}

impl SurfaceBasisIndex {
    pub fn new(d: usize, n: usize, m: usize, ell: usize) -> Result<Self> {
        let dim = harmonic_dim(d, m);
        if m > n || !(1..=dim).contains(&ell) {
            return Err(Error::Index(format!("no basis element (n={n}, m={m}, ell={ell}) for d={d}")));
        }
        Ok(Self { n, m, ell })
    }
}

/// `S^n_{m,ℓ}(tξ,t) = P_{n-m}^{(2m+d-2,γ)}(1-2t) t^m Y_{m,ℓ}(ξ)`.
pub fn surface_basis_eval(idx: SurfaceBasisIndex, weight: &SurfaceWeight, p: &SurfacePoint) -> Result<f64> {
    if p.d() != weight.d {
        return Err(Error::Dimension(p.d()));
    }
    let SurfaceBasisIndex { n, m, ell } = SurfaceBasisIndex::new(weight.d, idx.n, idx.m, idx.ell)?;
    let y = crate::sphere::sph_harmonic_eval(weight.d, m, ell, p.xi())?;
    Ok(jacobi_eval(&weight.block_params(m), n - m, 1.0 - 2.0 * p.t) * p.t.powi(m as i32) * y)
}

/// `⟨S^n_{m,ℓ}, S^n_{m,ℓ}⟩` in the normalized inner product.
pub fn surface_basis_norm(weight: &SurfaceWeight, n: usize, m: usize) -> f64 {
    let base = weight.t_params().unit_normalizer();
    let block = weight.block_params(m);
    base / (sphere_area(weight.d) * block.unit_normalizer()) * jacobi_norm(&block, n - m)
}

/// The orthonormal basis up to total degree `max_degree`.
///
/// Coefficients are laid out by harmonic degree `m`, then harmonic index
/// `ℓ`, then radial degree `j ≤ K - m`.
#[derive(Debug, Clone)]
pub struct SurfaceBasis {
    weight: SurfaceWeight,
    max_degree: usize,
    harmonics: HarmonicBasis,
    ladders: Vec<OrthonormalLadder>,
    scale: Vec<f64>,
    offsets: Vec<usize>,
}

impl SurfaceBasis {
    pub fn new(weight: SurfaceWeight, max_degree: usize) -> Result<Self> {
        let harmonics = HarmonicBasis::new(weight.d, max_degree)?;
        let area = sphere_area(weight.d);
        let base = weight.t_params().unit_normalizer();
        let mut ladders = Vec::with_capacity(max_degree + 1);
        let mut scale = Vec::with_capacity(max_degree + 1);
        let mut offsets = vec![0];
        for m in 0..=max_degree {
            let params = weight.block_params(m);
            scale.push((area * params.unit_normalizer() / base).sqrt());
            ladders.push(OrthonormalLadder::new(params, max_degree - m));
            let last = *offsets.last().unwrap();
            offsets.push(last + harmonic_dim(weight.d, m) * (max_degree - m + 1));
        }
        Ok(Self { weight, max_degree, harmonics, ladders, scale, offsets })
    }

    pub fn weight(&self) -> &SurfaceWeight {
        &self.weight
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn harmonics(&self) -> &HarmonicBasis {
        &self.harmonics
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of `(m, ℓ, j)` with `ℓ` from 0.
    pub fn index(&self, m: usize, ell: usize, j: usize) -> usize {
        self.offsets[m] + ell * (self.max_degree - m + 1) + j
    }

    /// Total degree of every coefficient slot, in layout order.
    pub fn degrees(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        for m in 0..=self.max_degree {
            for _ in 0..harmonic_dim(self.weight.d, m) {
                out.extend((0..=self.max_degree - m).map(|j| m + j));
            }
        }
        out
    }

    /// Harmonic degree `m` of every slot, in layout order.
    pub fn harmonic_degrees(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        for m in 0..=self.max_degree {
            out.extend(std::iter::repeat_n(m, harmonic_dim(self.weight.d, m) * (self.max_degree - m + 1)));
        }
        out
    }

    /// Radial factors `s_m p_j(1-2t) t^m` for `j ≤ K - m`.
    pub fn radial<R: Ring>(&self, m: usize, t: R, out: &mut Vec<R>) {
        let x = R::constant(1.0) - t.scale(2.0);
        self.ladders[m].fill(self.max_degree - m, x, out);
        let mut tm = R::constant(self.scale[m]);
        for _ in 0..m {
            tm = tm * t;
        }
        for v in out.iter_mut() {
            *v = *v * tm;
        }
    }

    /// All radial factors at `t`, indexed `[m][j]`.
    pub fn radial_table<R: Ring>(&self, t: R) -> Vec<Vec<R>> {
        (0..=self.max_degree)
            .map(|m| {
                let mut v = Vec::with_capacity(self.max_degree - m + 1);
                self.radial(m, t, &mut v);
                v
            })
            .collect()
    }

    /// `Σ c_{m,ℓ,j} R_m[j] Y_m[ℓ]` for precomputed radial and harmonic factors.
    pub fn combine<R: Ring>(&self, coeffs: &[f64], radial: &[Vec<R>], harm: &[Vec<R>]) -> R {
        let mut acc = R::constant(0.0);
        for m in 0..=self.max_degree {
            let width = self.max_degree - m + 1;
            for (ell, &y) in harm[m].iter().enumerate() {
                let start = self.offsets[m] + ell * width;
                let mut s = R::constant(0.0);
                for (c, &r) in coeffs[start..start + width].iter().zip(&radial[m]) {
                    s = s + r.scale(*c);
                }
                acc = acc + s * y;
            }
        }
        acc
    }

    /// All basis values at a point, in layout order.
    pub fn values_at(&self, t: f64, xi: &[f64]) -> Vec<f64> {
        let radial = self.radial_table(t);
        let harm = self.harmonics.values(xi);
        let mut out = Vec::with_capacity(self.len());
        for m in 0..=self.max_degree {
            for &y in &harm[m] {
                out.extend(radial[m].iter().map(|r| r * y));
            }
        }
        out
    }
}
