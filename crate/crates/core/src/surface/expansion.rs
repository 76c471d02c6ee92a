use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ambient, SurfaceBasis, SurfacePoint, SurfaceRules, SurfaceWeight};
use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::interval::{cutoff_filter, IntervalKernel, IntervalOperator};
use crate::jet::{Jet, Ring};
use crate::norm::Exponent;
use crate::sphere::rotation_jet;

const PROJECTION_CHUNK: usize = 8;

/// `Σ c_{m,ℓ,j} Ŝ_{j,m,ℓ}` over a [`SurfaceBasis`].
#[derive(Debug, Clone)]
pub struct SurfaceExpansion {
    basis: Arc<SurfaceBasis>,
    coeffs: Vec<f64>,
}

impl SurfaceExpansion {
    pub fn new(basis: Arc<SurfaceBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Configuration(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    /// Discrete orthogonal projection of `f` onto the basis.
    pub fn project(basis: Arc<SurfaceBasis>, f: &dyn Field, rules: &SurfaceRules) -> Result<Self> {
        Self::check_rules(&basis, rules)?;
        let values = rules.sample(f);
        Self::project_values(basis, &values, rules)
    }

    fn check_rules(basis: &SurfaceBasis, rules: &SurfaceRules) -> Result<()> {
        if basis.weight() != rules.weight() {
            return Err(Error::Configuration("basis and rules use different weights".into()));
        }
        rules.check_exactness(basis.max_degree())
    }

    /// Projection from samples on the rule grid (row-major in `(t, ξ)`).
    pub fn project_values(basis: Arc<SurfaceBasis>, values: &[f64], rules: &SurfaceRules) -> Result<Self> {
        Self::check_rules(&basis, rules)?;
        let ns = rules.sphere.len();
        if values.len() != rules.len() {
            return Err(Error::Configuration(format!("{} samples for a grid of {}", values.len(), rules.len())));
        }
        let k = basis.max_degree();
        let sw = rules.sphere_weights();
        let harm: Vec<Vec<f64>> =
            rules.sphere.points.par_iter().map(|p| basis.harmonics().values(p.coords()).concat()).collect();
        let hdim = harm[0].len();
        let hoff: Vec<usize> = (0..=k)
            .scan(0, |acc, m| {
                let o = *acc;
                *acc += basis.harmonics().dim(m);
                Some(o)
            })
            .collect();
        // Fixed chunks summed in order keep the result independent of scheduling.
        let rows: Vec<usize> = (0..rules.t_rule.len()).collect();
        let partials: Vec<Vec<f64>> = rows
            .par_chunks(PROJECTION_CHUNK)
            .map(|chunk| {
                let mut acc = vec![0.0; basis.len()];
                let mut a = vec![0.0; hdim];
                for &i in chunk {
                    let (t, wt) = (rules.t_rule.nodes[i], rules.t_rule.weights[i]);
                    a.iter_mut().for_each(|x| *x = 0.0);
                    for ((v, w), h) in values[i * ns..(i + 1) * ns].iter().zip(&sw).zip(&harm) {
                        let s = v * w;
                        for (x, y) in a.iter_mut().zip(h) {
                            *x += s * y;
                        }
                    }
                    let radial = basis.radial_table(t);
                    for m in 0..=k {
                        for ell in 0..basis.harmonics().dim(m) {
                            let am = wt * a[hoff[m] + ell];
                            let start = basis.index(m, ell, 0);
                            for (c, r) in acc[start..start + radial[m].len()].iter_mut().zip(&radial[m]) {
                                *c += am * r;
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let mut coeffs = vec![0.0; basis.len()];
        for part in partials {
            coeffs.iter_mut().zip(part).for_each(|(x, y)| *x += y);
        }
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<SurfaceBasis> {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multiplies each coefficient by `g(total degree)`.
    pub fn filtered(&self, g: impl Fn(usize) -> f64) -> Self {
        let coeffs = self.coeffs.iter().zip(self.basis.degrees()).map(|(c, k)| c * g(k)).collect();
        Self { basis: self.basis.clone(), coeffs }
    }

    /// `Σ_{deg = k} c²` for each total degree `k`.
    pub fn degree_energy(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.basis.max_degree() + 1];
        for (c, k) in self.coeffs.iter().zip(self.basis.degrees()) {
            out[k] += c * c;
        }
        out
    }

    pub fn eval(&self, t: f64, xi: &[f64]) -> f64 {
        let radial = self.basis.radial_table(t);
        let harm = self.basis.harmonics().values(xi);
        self.basis.combine(&self.coeffs, &radial, &harm)
    }

    pub fn eval_point(&self, p: &SurfacePoint) -> f64 {
        self.eval(p.t(), p.xi().coords())
    }

    /// `b[m][ℓ] = Σ_j c_{m,ℓ,j} R_m[j]`: the expansion on one `t`-row as a
    /// harmonic series.
    pub fn row_coefficients<R: Ring>(&self, radial: &[Vec<R>]) -> Vec<Vec<R>> {
        (0..=self.basis.max_degree())
            .map(|m| {
                (0..self.basis.harmonics().dim(m))
                    .map(|ell| {
                        let start = self.basis.index(m, ell, 0);
                        let mut s = R::constant(0.0);
                        for (c, &r) in self.coeffs[start..start + radial[m].len()].iter().zip(&radial[m]) {
                            s = s + r.scale(*c);
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    /// Value and first two derivatives of `s ↦ g(sξ, s)` at `s = t`.
    pub fn radial_jet(&self, t: f64, xi: &[f64]) -> Jet {
        let radial = self.basis.radial_table(Jet::variable(t));
        let harm: Vec<Vec<Jet>> =
            self.basis.harmonics().values(xi).into_iter().map(|r| r.into_iter().map(Jet::constant).collect()).collect();
        self.basis.combine(&self.coeffs, &radial, &harm)
    }

    /// Value, `D_{i,j} g` and `D_{i,j}² g` at `(tξ, t)`.
    pub fn angular_jet(&self, i: usize, j: usize, t: f64, xi: &[f64]) -> Jet {
        let radial: Vec<Vec<Jet>> =
            self.basis.radial_table(t).into_iter().map(|r| r.into_iter().map(Jet::constant).collect()).collect();
        let mut harm = Vec::new();
        self.basis.harmonics().fill(&rotation_jet(i, j, xi), &mut harm);
        self.basis.combine(&self.coeffs, &radial, &harm)
    }

    /// Values on the rule grid, row-major in `(t, ξ)`.
    pub fn grid_values(&self, rules: &SurfaceRules) -> Vec<f64> {
        let harm: Vec<Vec<Vec<f64>>> =
            rules.sphere.points.par_iter().map(|p| self.basis.harmonics().values(p.coords())).collect();
        let k = self.basis.max_degree();
        let ns = rules.sphere.len();
        let mut out = vec![0.0; rules.len()];
        out.par_chunks_mut(ns).zip(&rules.t_rule.nodes).for_each(|(row, &t)| {
            let radial = self.basis.radial_table(t);
            // b[m][ℓ] = Σ_j c R_m[j](t)
            let b: Vec<Vec<f64>> = (0..=k)
                .map(|m| {
                    (0..self.basis.harmonics().dim(m))
                        .map(|ell| {
                            let start = self.basis.index(m, ell, 0);
                            self.coeffs[start..start + radial[m].len()].iter().zip(&radial[m]).map(|(c, r)| c * r).sum()
                        })
                        .collect()
                })
                .collect();
            for (v, h) in row.iter_mut().zip(&harm) {
                *v = (0..=k).map(|m| b[m].iter().zip(&h[m]).map(|(x, y)| x * y).sum::<f64>()).sum();
            }
        });
        out
    }
}

/// `t` and `ξ = x/t` from ambient coordinates, with `e_1` at the apex.
pub(crate) fn split_ambient(x: &[f64]) -> (f64, Vec<f64>) {
    let d = x.len() - 1;
    let t = x[d];
    if t <= 0.0 {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        return (0.0, e);
    }
    (t, x[..d].iter().map(|c| c / t).collect())
}

impl Field for SurfaceExpansion {
    fn value(&self, x: &[f64]) -> f64 {
        let (t, xi) = split_ambient(x);
        self.eval(t, &xi)
    }
}

/// The near-best operator `L_n` acting by coefficient filtering.
#[derive(Debug, Clone)]
pub struct SurfaceOperator {
    n: usize,
    cutoff: CutoffSpec,
    filter: Vec<f64>,
    basis: Arc<SurfaceBasis>,
    rules: Arc<SurfaceRules>,
}

impl SurfaceOperator {
    pub fn new(weight: SurfaceWeight, n: usize, cutoff: CutoffSpec, rules: Arc<SurfaceRules>) -> Result<Self> {
        let filter = cutoff_filter(cutoff, n);
        // â(2) = 0, so degree 2n never contributes.
        let k = if n == 0 { 0 } else { 2 * n - 1 };
        let basis = Arc::new(SurfaceBasis::new(weight, k)?);
        if *rules.weight() != weight {
            return Err(Error::Configuration("rules built for a different weight".into()));
        }
        rules.check_exactness(k)?;
        Ok(Self { n, cutoff, filter, basis, rules })
    }

    /// Operator with default rules for its degree.
    pub fn with_default_rules(weight: SurfaceWeight, n: usize, cutoff: CutoffSpec) -> Result<Self> {
        let k = if n == 0 { 0 } else { 2 * n - 1 };
        Self::new(weight, n, cutoff, Arc::new(SurfaceRules::for_degree(weight, k)?))
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> CutoffSpec {
        self.cutoff
    }

    pub fn rules(&self) -> &Arc<SurfaceRules> {
        &self.rules
    }

    pub fn basis(&self) -> &Arc<SurfaceBasis> {
        &self.basis
    }

    pub fn apply(&self, f: &dyn Field) -> Result<SurfaceExpansion> {
        self.apply_values(&self.rules.sample(f))
    }

    pub fn apply_values(&self, values: &[f64]) -> Result<SurfaceExpansion> {
        let e = SurfaceExpansion::project_values(self.basis.clone(), values, &self.rules)?;
        Ok(e.filtered(|k| self.filter[k]))
    }
}

/// `L_n f(p)`.
pub fn nearbest_apply(op: &SurfaceOperator, f: &dyn Field, p: &SurfacePoint) -> Result<f64> {
    Ok(op.apply(f)?.eval_point(p))
}

/// `G_n f(tξ,t)`: the `[0,1]` operator for `ϖ_{d-2,γ}` applied along the ray through `ξ`.
#[derive(Debug, Clone)]
pub struct RayOperator {
    inner: IntervalOperator,
}

impl RayOperator {
    pub fn new(weight: SurfaceWeight, n: usize, cutoff: CutoffSpec, rules: &SurfaceRules) -> Result<Self> {
        let kernel = IntervalKernel::new(weight.t_params(), n, cutoff);
        Ok(Self { inner: IntervalOperator::new(kernel, rules.t_rule.clone())? })
    }

    pub fn apply_at(&self, f: &dyn Field, p: &SurfacePoint) -> Result<f64> {
        let xi = p.xi().coords();
        let values: Vec<f64> = self.inner.rule().nodes.iter().map(|&s| f.value(&ambient(s, xi))).collect();
        Ok(self.inner.apply_values(&values)?.eval(p.t()))
    }

    /// `G_n f` on the grid of `rules`, whose `t`-rule must match this operator's.
    pub fn apply_grid(&self, f: &dyn Field, rules: &SurfaceRules) -> Result<Vec<f64>> {
        if rules.t_rule.nodes != self.inner.rule().nodes {
            return Err(Error::Configuration("ray operator and grid use different t-rules".into()));
        }
        let values = rules.sample(f);
        self.apply_grid_values(&values, rules)
    }

    pub fn apply_grid_values(&self, values: &[f64], rules: &SurfaceRules) -> Result<Vec<f64>> {
        let (nt, ns) = (rules.t_rule.len(), rules.sphere.len());
        let columns: Vec<Vec<f64>> = (0..ns)
            .into_par_iter()
            .map(|s| {
                let ray: Vec<f64> = (0..nt).map(|i| values[i * ns + s]).collect();
                let e = self.inner.apply_values(&ray)?;
                Ok(rules.t_rule.nodes.iter().map(|&t| e.eval(t)).collect())
            })
            .collect::<Result<_>>()?;
        let mut out = vec![0.0; nt * ns];
        for (s, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                out[i * ns + s] = *v;
            }
        }
        Ok(out)
    }
}

/// `(f - G_n f, G_n f - L_n f)` at `p`.
pub fn split_f1_f2(op: &SurfaceOperator, ray: &RayOperator, f: &dyn Field, p: &SurfacePoint) -> Result<(f64, f64)> {
    let fv = f.value(&p.ambient());
    let g = ray.apply_at(f, p)?;
    let l = nearbest_apply(op, f, p)?;
    Ok((fv - g, g - l))
}

/// Best-approximation estimate with its resolution floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestApprox {
    pub n: usize,
    /// Computed value; below `floor` it carries no digits.
    pub value: f64,
    pub floor: f64,
    pub p: Exponent,
    /// `‖f - L_{⌊n/2⌋} f‖_p` stands in for the best approximation (`p ≠ 2`).
    pub surrogate: bool,
}

impl BestApprox {
    pub fn resolved(&self) -> bool {
        self.value > self.floor
    }

    /// The value, or 0 when it sits below the resolution floor.
    pub fn effective(&self) -> f64 {
        if self.resolved() {
            self.value
        } else {
            0.0
        }
    }
}

/// Relative size of the quadrature noise floor for `L²` tails.
pub const TAIL_FLOOR: f64 = 1e-12;

/// `L²` tails `E_n(f)₂` for several `n`, sharing one projection.
///
/// Uses `E_n² = ‖f - S_K f‖² + Σ_{n<k≤K} ‖proj_k f‖²` with `K = 2 max n`,
/// evaluated on rules exact to degree `2K`.
pub fn best_approx_l2_many(
    f: &dyn Field,
    weight: SurfaceWeight,
    ns: &[usize],
    t_nodes: Option<usize>,
) -> Result<Vec<BestApprox>> {
    let nmax = ns.iter().copied().max().unwrap_or(0);
    let k = (2 * nmax).max(8);
    let rules = SurfaceRules::new(weight, t_nodes.unwrap_or(4 * k + 64), 2 * k + 8)?;
    let basis = Arc::new(SurfaceBasis::new(weight, k)?);
    let values = rules.sample(f);
    let e = SurfaceExpansion::project_values(basis, &values, &rules)?;
    let approx = e.grid_values(&rules);
    let resid: Vec<f64> = values.iter().zip(&approx).map(|(a, b)| a - b).collect();
    let beyond = Exponent::TWO.power_sum(rules.weighted(&resid));
    let total = Exponent::TWO.power_sum(rules.weighted(&values));
    let energy = e.degree_energy();
    let floor = TAIL_FLOOR * total.sqrt();
    Ok(ns
        .iter()
        .map(|&n| {
            let tail: f64 = energy.iter().skip(n + 1).sum();
            BestApprox { n, value: (beyond + tail).max(0.0).sqrt(), floor, p: Exponent::TWO, surrogate: false }
        })
        .collect())
}

pub fn best_approx_l2(f: &dyn Field, weight: SurfaceWeight, n: usize) -> Result<BestApprox> {
    Ok(best_approx_l2_many(f, weight, &[n], None)?[0])
}

/// `E_n(f)_p`: the `L²` tail for `p = 2`, otherwise `‖f - L_{⌊n/2⌋} f‖_p`.
pub fn best_approx(
    f: &dyn Field,
    weight: SurfaceWeight,
    n: usize,
    p: Exponent,
    cutoff: CutoffSpec,
) -> Result<BestApprox> {
    if p == Exponent::TWO {
        return best_approx_l2(f, weight, n);
    }
    let op = SurfaceOperator::with_default_rules(weight, n / 2, cutoff)?;
    let g = op.apply(f)?;
    let sampler = super::SurfaceSampler::new(&weight, p, None, &super::SurfaceOptions::for_degree(n))?;
    let value = sampler.norm(p, |t, xi| f.value(&ambient(t, xi)) - g.eval(t, xi));
    let scale = sampler.norm(p, |t, xi| f.value(&ambient(t, xi)));
    Ok(BestApprox { n, value, floor: TAIL_FLOOR * scale, p, surrogate: true })
}
