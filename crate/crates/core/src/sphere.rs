//! Real spherical harmonics on `S^{d-1}` for `d ∈ {2,3,4}`, plane rotations,
//! Euler-angle differences and angular derivatives.
//!
//! Harmonics are orthonormal for the unnormalized surface measure `dσ`.
//! Degree-`m` members are built from degree-`k` members in one dimension
//! fewer, times a Gegenbauer ladder in the last coordinate:
//!
//! `Y(x) = A · |x|^j P_j^{(a,a)}(x_d/|x|) · Y'_k(x_1..x_{d-1})`, `m = k + j`,
//! `a = k + (d-3)/2`.
//!
//! Every evaluation is homogeneous of degree `m`, so the same code serves
//! points on and off the sphere.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{gradient_of, hessian_of, Derivatives, Field};
use crate::interval::binomial;
use crate::jacobi::{gauss_jacobi_rule, jacobi_norm, JacobiParams};
use crate::jet::{Jet, Ring};

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if (2..=4).contains(&d) {
        Ok(())
    } else {
        Err(Error::Dimension(d))
    }
}

/// Surface area `σ_d` of `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / libm::tgamma(d as f64 / 2.0)
}

/// `dim H_m^d = C(m+d-1, m) - C(m+d-3, m-2)`.
pub fn harmonic_dim(d: usize, m: usize) -> usize {
    let c = |n: usize, k: usize| binomial(n, k).round() as usize;
    let lower = if m >= 2 { c(m + d - 3, m - 2) } else { 0 };
    c(m + d - 1, m) - lower
}

/// Zonal kernel `Z_m^{(d-2)/2}(s)`, so that `σ_d Σ_ℓ Y_ℓ(ξ) Y_ℓ(η) = Z(⟨ξ,η⟩)`.
pub fn zonal(d: usize, m: usize, s: f64) -> f64 {
    let a = (d as f64 - 3.0) / 2.0;
    let params = JacobiParams::new(a, a).expect("a > -1 for d >= 2");
    crate::jacobi::zn_kernel(&params, m, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Renormalizes `coords`; a zero or non-finite vector is a domain error.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!("cannot normalize {coords:?}")));
        }
        Ok(Self(coords.into_iter().map(|c| c / r).collect()))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

/// Rotation by `theta` in the `(x_i, x_j)` plane, axes numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    i: usize,
    j: usize,
    theta: f64,
}

impl RotationSpec {
    pub fn new(d: usize, i: usize, j: usize, theta: f64) -> Result<Self> {
        if !(1 <= i && i < j && j <= d) {
            return Err(Error::Index(format!("rotation axes ({i},{j}) invalid for d={d}")));
        }
        Ok(Self { i, j, theta })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_angle(&self, theta: f64) -> Self {
        Self { theta, ..*self }
    }

    pub fn inverse(&self) -> Self {
        self.with_angle(-self.theta)
    }

    /// All axis pairs `i < j` of `ℝ^d`, zero angle.
    pub fn planes(d: usize) -> Vec<RotationSpec> {
        (1..=d).flat_map(|i| (i + 1..=d).map(move |j| RotationSpec { i, j, theta: 0.0 })).collect()
    }
}

/// Rotates `x` in place; coordinates beyond the sphere dimension are untouched.
pub fn rotate_in_place(spec: &RotationSpec, x: &mut [f64]) {
    let (s, c) = spec.theta.sin_cos();
    let (a, b) = (x[spec.i - 1], x[spec.j - 1]);
    x[spec.i - 1] = c * a - s * b;
    x[spec.j - 1] = s * a + c * b;
}

pub fn rotate(spec: &RotationSpec, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    rotate_in_place(spec, &mut y);
    y
}

/// Coordinates of `Q_θ x` as jets in `θ` at `θ = 0`.
pub fn rotation_jet(i: usize, j: usize, x: &[f64]) -> Vec<Jet> {
    let mut out: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
    let (a, b) = (x[i - 1], x[j - 1]);
    out[i - 1] = Jet::new(a, -b, -a);
    out[j - 1] = Jet::new(b, a, -b);
    out
}

/// `(I - T_Q)^r f(x)` with `T_Q f(x) = f(Q^{-1} x)`.
///
/// `x` may carry extra trailing coordinates (such as `t`); only the
/// rotation plane is moved.
pub fn euler_difference(f: &dyn Field, spec: &RotationSpec, r: usize, x: &[f64]) -> f64 {
    let mut y = x.to_vec();
    let back = spec.inverse();
    let mut acc = 0.0;
    for k in 0..=r {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(r, k) * f.value(&y);
        rotate_in_place(&back, &mut y);
    }
    acc
}

/// `D_{i,j}^r f(x)` for `r ≤ 2`, with `D_{i,j} = x_i ∂_j - x_j ∂_i`.
pub fn angular_derivative(f: &dyn Field, i: usize, j: usize, r: usize, x: &[f64], mode: Derivatives) -> Result<f64> {
    if !(1 <= i && i < j && j <= x.len()) {
        return Err(Error::Index(format!("axes ({i},{j}) invalid for {} coordinates", x.len())));
    }
    let (a, b) = (i - 1, j - 1);
    let (xi, xj) = (x[a], x[b]);
    match r {
        0 => Ok(f.value(x)),
        1 => {
            let g = gradient_of(f, x, mode)?;
            Ok(xi * g[b] - xj * g[a])
        }
        2 => {
            let g = gradient_of(f, x, mode)?;
            let h = hessian_of(f, x, mode)?;
            let n = x.len();
            Ok(xi * xi * h[b * n + b] - 2.0 * xi * xj * h[a * n + b] + xj * xj * h[a * n + a] - xi * g[a] - xj * g[b])
        }
        _ => Err(Error::Capability(format!("angular derivatives of order {r} are not supported"))),
    }
}

/// `Σ_{i<j} D_{i,j}^2 f(x)`, the Laplace-Beltrami operator for functions
/// constant along rays.
pub fn laplace_beltrami(f: &dyn Field, x: &[f64], mode: Derivatives) -> Result<f64> {
    RotationSpec::planes(x.len()).iter().map(|p| angular_derivative(f, p.i, p.j, 2, x, mode)).sum()
}

#[derive(Debug, Clone)]
struct Level {
    /// `rec[k][j] = (A_j, C_j)` for `Q_{j+1} = A_j x_d Q_j - C_j |x|^2 Q_{j-1}`.
    rec: Vec<Vec<(f64, f64)>>,
    norm: Vec<Vec<f64>>,
}

impl Level {
    fn new(dd: usize, max_degree: usize) -> Self {
        let mut rec = Vec::with_capacity(max_degree + 1);
        let mut norm = Vec::with_capacity(max_degree + 1);
        for k in 0..=max_degree {
            let a = k as f64 + (dd as f64 - 3.0) / 2.0;
            let params = JacobiParams::new(a, a).expect("a >= -1/2");
            let mass = params.mass();
            let jmax = max_degree - k;
            norm.push((0..=jmax).map(|j| 1.0 / (jacobi_norm(&params, j) * mass).sqrt()).collect());
            rec.push(
                (0..jmax.max(1))
                    .map(|j| {
                        if j == 0 {
                            return (a + 1.0, 0.0);
                        }
                        let (jf, s) = (j as f64, j as f64 + a);
                        let den = (jf + 1.0) * (jf + 2.0 * a + 1.0);
                        ((2.0 * s + 1.0) * (s + 1.0) / den, s * (s + 1.0) / den)
                    })
                    .collect(),
            );
        }
        Self { rec, norm }
    }
}

/// Evaluator for all harmonics of degree `0..=max_degree` in one dimension.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    d: usize,
    max_degree: usize,
    /// Levels for `3..=d`.
    levels: Vec<Level>,
}

impl HarmonicBasis {
    pub fn new(d: usize, max_degree: usize) -> Result<Self> {
        check_dim(d)?;
        let levels = (3..=d).map(|dd| Level::new(dd, max_degree)).collect();
        Ok(Self { d, max_degree, levels })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn dim(&self, m: usize) -> usize {
        harmonic_dim(self.d, m)
    }

    /// Fills `out[m][ℓ] = |x|^m Y_{m,ℓ}(x/|x|)` for `m ≤ max_degree`.
    /// Only the first `d` entries of `x` are read.
    pub fn fill<R: Ring>(&self, x: &[R], out: &mut Vec<Vec<R>>) {
        self.fill_level(self.d, x, out);
    }

    pub fn values(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        self.fill(x, &mut out);
        out
    }

    fn fill_level<R: Ring>(&self, dd: usize, x: &[R], out: &mut Vec<Vec<R>>) {
        let mmax = self.max_degree;
        out.clear();
        out.resize_with(mmax + 1, Vec::new);
        if dd == 2 {
            out[0].push(R::constant(1.0 / (2.0 * PI).sqrt()));
            let c = 1.0 / PI.sqrt();
            let (mut re, mut im) = (R::constant(1.0), R::constant(0.0));
            for row in out.iter_mut().skip(1) {
                (re, im) = (re * x[0] - im * x[1], re * x[1] + im * x[0]);
                row.push(re.scale(c));
                row.push(im.scale(c));
            }
            return;
        }
        let mut lower = Vec::new();
        self.fill_level(dd - 1, x, &mut lower);
        let level = &self.levels[dd - 3];
        let z = x[dd - 1];
        let r2 = x[..dd].iter().fold(R::constant(0.0), |acc, &v| acc + v * v);
        for k in 0..=mmax {
            let rec = &level.rec[k];
            let norm = &level.norm[k];
            let (mut q_prev, mut q) = (R::constant(0.0), R::constant(1.0));
            for j in 0..=mmax - k {
                if j > 0 {
                    let (a, c) = rec[j - 1];
                    let next = (z * q).scale(a) - (r2 * q_prev).scale(c);
                    (q_prev, q) = (q, next);
                }
                let factor = q.scale(norm[j]);
                let (src, dst) = (&lower[k], &mut out[k + j]);
                dst.extend(src.iter().map(|&y| y * factor));
            }
        }
    }

    /// Harmonics at `Q_θ x` as jets in `θ`, giving `Y`, `D_{i,j} Y`, `D_{i,j}^2 Y`.
    pub fn rotation_jets(&self, i: usize, j: usize, x: &[f64]) -> Vec<Vec<Jet>> {
        let mut out = Vec::new();
        self.fill(&rotation_jet(i, j, &x[..self.d]), &mut out);
        out
    }
}

/// Value of the `ell`-th (1-based) degree-`m` basis harmonic at `xi`.
pub fn sph_harmonic_eval(d: usize, m: usize, ell: usize, xi: &UnitVector) -> Result<f64> {
    check_dim(d)?;
    if xi.dim() != d {
        return Err(Error::Dimension(xi.dim()));
    }
    let dim = harmonic_dim(d, m);
    if !(1..=dim).contains(&ell) {
        return Err(Error::Index(format!("harmonic index {ell} outside 1..={dim}")));
    }
    let basis = HarmonicBasis::new(d, m)?;
    Ok(basis.values(xi.coords())[m][ell - 1])
}

/// Positive-weight rule on `S^{d-1}`, exact for harmonics up to `exact_degree`.
#[derive(Debug, Clone)]
pub struct SphericalQuadrature {
    pub d: usize,
    pub points: Vec<UnitVector>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl SphericalQuadrature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p.coords())).sum()
    }
}

pub fn spherical_quadrature(d: usize, exact_degree: usize) -> Result<SphericalQuadrature> {
    check_dim(d)?;
    if d == 2 {
        let n = exact_degree + 1;
        let points = (0..n)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                UnitVector(vec![phi.cos(), phi.sin()])
            })
            .collect();
        return Ok(SphericalQuadrature { d, points, weights: vec![2.0 * PI / n as f64; n], exact_degree });
    }
    let a = (d as f64 - 3.0) / 2.0;
    let polar = gauss_jacobi_rule(&JacobiParams::new(a, a)?, exact_degree / 2 + 1)?;
    let lower = spherical_quadrature(d - 1, exact_degree)?;
    let mut points = Vec::with_capacity(polar.len() * lower.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (&z, &wz) in polar.nodes.iter().zip(&polar.weights) {
        let s = (1.0 - z * z).max(0.0).sqrt();
        for (eta, &we) in lower.points.iter().zip(&lower.weights) {
            let mut c: Vec<f64> = eta.coords().iter().map(|e| s * e).collect();
            c.push(z);
            points.push(UnitVector(c));
            weights.push(wz * we);
        }
    }
    Ok(SphericalQuadrature { d, points, weights, exact_degree })
}
