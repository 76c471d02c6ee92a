//! Localized Jacobi kernels and operators on `[0,1]`, the Ditzian-Totik
//! modulus and the weighted K-functional.
//!
//! Functions on `[0,1]` are plain closures `Fn(f64) -> f64`. The `[0,1]`
//! kernel is the `[-1,1]` kernel composed with `t ↦ 1 - 2t`.

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::jacobi::{
    gauss_jacobi_rule, gauss_jacobi_unit, gauss_legendre_on, JacobiParams, OrthonormalLadder, QuadratureRule,
};
use crate::jet::{Jet, Ring};
use crate::norm::Exponent;

/// `d_{[0,1]}(s,t) = arccos(√s√t + √(1-s)√(1-t))`.
pub fn interval_distance(s: f64, t: f64) -> Result<f64> {
    for v in [s, t] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{v} is outside [0,1]")));
        }
    }
    let c = s.sqrt() * t.sqrt() + (1.0 - s).sqrt() * (1.0 - t).sqrt();
    Ok(clamped_acos(c))
}

/// `arccos` of a cosine that may overshoot `[-1,1]` by round-off.
pub(crate) fn clamped_acos(c: f64) -> f64 {
    debug_assert!(c.abs() <= 1.0 + 1e-12, "cosine {c} far outside [-1,1]");
    c.clamp(-1.0, 1.0).acos()
}

/// `φ(t) = √(t(1-t))`.
pub fn phi(t: f64) -> f64 {
    (t * (1.0 - t)).max(0.0).sqrt()
}

/// `ϖ_{α,β}(n; x) = (1-x+n^{-2})^{α+1/2} (1+x+n^{-2})^{β+1/2}` on `[-1,1]`.
pub fn jacobi_weight_regularized(alpha: f64, beta: f64, n: usize, x: f64) -> f64 {
    let e = 1.0 / (n as f64).powi(2);
    (1.0 - x + e).powf(alpha + 0.5) * (1.0 + x + e).powf(beta + 0.5)
}

/// `Σ_{k≤2n} â(k/n) p_k(x) p_k(y)` with orthonormal `p_k`.
#[derive(Debug, Clone)]
pub struct IntervalKernel {
    params: JacobiParams,
    n: usize,
    cutoff: CutoffSpec,
    ladder: OrthonormalLadder,
    filter: Vec<f64>,
}

impl IntervalKernel {
    pub fn new(params: JacobiParams, n: usize, cutoff: CutoffSpec) -> Self {
        let filter = cutoff_filter(cutoff, n);
        let ladder = OrthonormalLadder::new(params, filter.len() - 1);
        Self { params, n, cutoff, ladder, filter }
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> CutoffSpec {
        self.cutoff
    }

    /// Highest polynomial degree in either variable.
    pub fn max_degree(&self) -> usize {
        self.filter.len() - 1
    }

    /// `â(k/n)` for `k = 0..=2n`.
    pub fn filter(&self) -> &[f64] {
        &self.filter
    }

    /// `â(k/n) / h_k`, the weight on `P_k(x) P_k(y)`.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.filter.get(k).copied().unwrap_or(0.0) / crate::jacobi::jacobi_norm(&self.params, k)
    }

    pub fn ladder(&self) -> &OrthonormalLadder {
        &self.ladder
    }

    /// Kernel on `[-1,1]`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let m = self.max_degree();
        let px = self.ladder.values(m, x);
        let py = self.ladder.values(m, y);
        self.filter.iter().zip(px.iter().zip(&py)).map(|(a, (u, v))| a * u * v).sum()
    }

    /// Kernel on `[0,1]`.
    pub fn eval_unit(&self, s: f64, t: f64) -> f64 {
        self.eval(1.0 - 2.0 * s, 1.0 - 2.0 * t)
    }
}

/// `â(k/n)` for `k ≤ 2n`; degree 0 keeps only the constant.
pub fn cutoff_filter(cutoff: CutoffSpec, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![1.0];
    }
    (0..=2 * n).map(|k| cutoff.eval(k as f64 / n as f64)).collect()
}

/// `L_n f(t) = c ∫ f(s) L̃_n(s,t) ϖ(s) ds` by direct quadrature of the kernel.
pub fn localized_operator_apply(
    ev: &IntervalKernel,
    f: &dyn Fn(f64) -> f64,
    t: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let scale = unit_rule_scale(rule, ev.params())?;
    Ok(scale * rule.integrate(|s| f(s) * ev.eval_unit(s, t)))
}

fn unit_rule_scale(rule: &QuadratureRule, params: &JacobiParams) -> Result<f64> {
    if rule.expect_unit(params, true).is_ok() {
        Ok(1.0)
    } else {
        rule.expect_unit(params, false)?;
        Ok(params.unit_normalizer())
    }
}

/// Orthonormal expansion `Σ c_k p_k(1-2t)` on `[0,1]`.
#[derive(Debug, Clone)]
pub struct IntervalExpansion {
    ladder: OrthonormalLadder,
    coeffs: Vec<f64>,
}

impl IntervalExpansion {
    /// Discrete projection onto degree `degree` from values at the nodes of a
    /// `[0,1]` rule for the ladder's weight.
    pub fn project(values: &[f64], rule: &QuadratureRule, ladder: &OrthonormalLadder, degree: usize) -> Result<Self> {
        let scale = unit_rule_scale(rule, ladder.params())?;
        if values.len() != rule.len() {
            return Err(Error::Configuration("one value per node is required".into()));
        }
        let mut coeffs = vec![0.0; degree + 1];
        let mut buf = Vec::with_capacity(degree + 1);
        for ((&s, &w), &v) in rule.nodes.iter().zip(&rule.weights).zip(values) {
            ladder.fill(degree, 1.0 - 2.0 * s, &mut buf);
            for (c, p) in coeffs.iter_mut().zip(&buf) {
                *c += scale * w * v * p;
            }
        }
        Ok(Self { ladder: ladder.clone(), coeffs })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficients multiplied by `weights[k]`; missing weights count as 0.
    pub fn filtered(&self, weights: &[f64]) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(k, c)| c * weights.get(k).copied().unwrap_or(0.0)).collect();
        Self { ladder: self.ladder.clone(), coeffs }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let vals = self.ladder.values(self.coeffs.len() - 1, 1.0 - 2.0 * t);
        vals.iter().zip(&self.coeffs).map(|(p, c)| p * c).sum()
    }

    /// Value with first and second `t`-derivatives.
    pub fn jet(&self, t: f64) -> Jet {
        let mut buf = Vec::with_capacity(self.coeffs.len());
        self.ladder.fill(self.coeffs.len() - 1, Jet::new(1.0 - 2.0 * t, -2.0, 0.0), &mut buf);
        buf.iter().zip(&self.coeffs).fold(Jet::default(), |acc, (p, &c)| acc + p.scale(c))
    }
}

/// `L_n` as coefficient filtering against a fixed normalized `[0,1]` rule.
#[derive(Debug, Clone)]
pub struct IntervalOperator {
    kernel: IntervalKernel,
    rule: QuadratureRule,
}

impl IntervalOperator {
    pub fn new(kernel: IntervalKernel, rule: QuadratureRule) -> Result<Self> {
        rule.expect_unit(kernel.params(), true)?;
        if rule.exact_degree < 2 * kernel.max_degree() {
            return Err(Error::Configuration(format!(
                "rule exact to degree {} cannot carry a degree-{} kernel",
                rule.exact_degree,
                kernel.max_degree()
            )));
        }
        Ok(Self { kernel, rule })
    }

    /// Builds the kernel together with a Gauss rule of `nodes` nodes.
    pub fn with_nodes(params: JacobiParams, n: usize, cutoff: CutoffSpec, nodes: usize) -> Result<Self> {
        let kernel = IntervalKernel::new(params, n, cutoff);
        let nodes = nodes.max(kernel.max_degree() + 1);
        let rule = gauss_jacobi_unit(&params, nodes)?.normalized();
        Self::new(kernel, rule)
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn kernel(&self) -> &IntervalKernel {
        &self.kernel
    }

    /// Filtered expansion from values at the rule's nodes.
    pub fn apply_values(&self, values: &[f64]) -> Result<IntervalExpansion> {
        let e = IntervalExpansion::project(values, &self.rule, self.kernel.ladder(), self.kernel.max_degree())?;
        Ok(e.filtered(self.kernel.filter()))
    }

    pub fn apply(&self, f: &dyn Fn(f64) -> f64) -> Result<IntervalExpansion> {
        let values: Vec<f64> = self.rule.nodes.iter().map(|&s| f(s)).collect();
        self.apply_values(&values)
    }
}

/// Knobs shared by the moduli on `[0,1]` and on the conic domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusOptions {
    /// The main-part interval is `[ρ r² h², 1 - ρ r² h²]`.
    pub rho: f64,
    /// `θ` runs over `h · 2^{-j/2}`, `j < theta_steps`.
    pub theta_steps: usize,
    /// Quadrature nodes for finite `p`.
    pub nodes: usize,
    /// Grid size for `p = ∞`.
    pub sup_grid: usize,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        Self { rho: 12.0, theta_steps: 16, nodes: 320, sup_grid: 2049 }
    }
}

impl ModulusOptions {
    pub fn theta_grid(&self, h: f64) -> Vec<f64> {
        (0..self.theta_steps).map(|j| h * (-(j as f64) / 2.0).exp2()).collect()
    }

    /// `J_{rh}`, or a degenerate-input error when it is empty.
    pub fn main_part(&self, r: usize, h: f64) -> Result<(f64, f64)> {
        let e = self.rho * (r * r) as f64 * h * h;
        if e >= 0.5 {
            return Err(Error::DegenerateInput(format!(
                "main-part interval is empty for r={r}, h={h}, rho={}",
                self.rho
            )));
        }
        Ok((e, 1.0 - e))
    }
}

/// Binomial coefficient as a float.
pub fn binomial(r: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (r - i) as f64 / (i + 1) as f64)
}

/// `Σ_j (-1)^j C(r,j) f(t + (r/2 - j) δ)`, or `None` if a stencil point leaves `[0,1]`.
pub fn central_difference(f: &dyn Fn(f64) -> f64, r: usize, t: f64, delta: f64) -> Option<f64> {
    let half = r as f64 / 2.0;
    if t - half * delta < 0.0 || t + half * delta > 1.0 {
        return None;
    }
    let mut acc = 0.0;
    for j in 0..=r {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(r, j) * f(t + (half - j as f64) * delta);
    }
    Some(acc)
}

/// `Δ^r_{θφ} f(t)` with the convention that it vanishes when the stencil exits `[0,1]`.
pub fn dt_difference(f: &dyn Fn(f64) -> f64, r: usize, theta: f64, t: f64) -> f64 {
    central_difference(f, r, t, theta * phi(t)).unwrap_or(0.0)
}

/// Sample points and weights for a norm on `[0,1]` (or on `[lo, hi]`).
pub(crate) struct Sampler {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Sampler {
    /// Normalized weighted measure `c ϖ` (or Lebesgue) on `[lo,hi] ⊂ [0,1]`.
    pub fn new(
        weight: Option<&JacobiParams>,
        range: Option<(f64, f64)>,
        p: Exponent,
        opts: &ModulusOptions,
    ) -> Result<Self> {
        let (lo, hi) = range.unwrap_or((0.0, 1.0));
        if p.is_infinite() {
            let m = opts.sup_grid.max(2);
            let points = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
            return Ok(Self { points, weights: vec![1.0; m] });
        }
        match (weight, range) {
            (Some(w), None) => {
                let rule = gauss_jacobi_unit(w, opts.nodes)?.normalized();
                Ok(Self { points: rule.nodes, weights: rule.weights })
            }
            (w, _) => {
                let rule = gauss_legendre_on(lo, hi, opts.nodes)?;
                let (c, a, b) = match w {
                    Some(w) => (w.unit_normalizer(), w.alpha(), w.beta()),
                    None => (1.0, 0.0, 0.0),
                };
                let weights = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&t, &q)| q * c * t.powf(a) * (1.0 - t).powf(b))
                    .collect();
                Ok(Self { points: rule.nodes, weights })
            }
        }
    }

    pub fn norm(&self, p: Exponent, g: impl Fn(f64) -> f64) -> f64 {
        p.norm(self.points.iter().zip(&self.weights).map(|(&t, &w)| (w, g(t))))
    }
}

/// Ditzian-Totik modulus `sup_{0<θ≤h} ‖Δ^r_{θφ} f‖_p`.
///
/// Without a weight the norm is Lebesgue on `[0,1]`. With `main_part` the
/// norm is restricted to `J_{rh}` and taken against `c_{α,β} ϖ_{α,β}`.
pub fn dt_modulus(
    f: &dyn Fn(f64) -> f64,
    r: usize,
    h: f64,
    p: Exponent,
    weight: Option<&JacobiParams>,
    main_part: bool,
    opts: &ModulusOptions,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("increment must be positive, got {h}")));
    }
    let range = if main_part {
        if weight.is_none() {
            return Err(Error::Configuration("the main-part modulus needs a weight".into()));
        }
        Some(opts.main_part(r, h)?)
    } else {
        None
    };
    let sampler = Sampler::new(weight, range, p, opts)?;
    Ok(opts
        .theta_grid(h)
        .into_iter()
        .map(|theta| sampler.norm(p, |t| dt_difference(f, r, theta, t)))
        .fold(0.0, f64::max))
}

/// Modulus values along a grid of increments.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModulusReport {
    pub h_values: Vec<f64>,
    pub component_values: Vec<f64>,
    pub p: Exponent,
    pub r: usize,
}

pub fn dt_modulus_report(
    f: &dyn Fn(f64) -> f64,
    r: usize,
    hs: &[f64],
    p: Exponent,
    weight: Option<&JacobiParams>,
    main_part: bool,
    opts: &ModulusOptions,
) -> Result<ModulusReport> {
    let component_values =
        hs.iter().map(|&h| dt_modulus(f, r, h, p, weight, main_part, opts)).collect::<Result<_>>()?;
    Ok(ModulusReport { h_values: hs.to_vec(), component_values, p, r })
}

/// A smooth approximant together with its `r`-th derivative.
pub struct IntervalCandidate<'a> {
    pub g: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub derivative: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
}

/// Candidate-minimum of `‖f - g‖ + h^r ‖φ^r g^{(r)}‖` against `c ϖ`.
pub fn dt_kfunctional(
    f: &dyn Fn(f64) -> f64,
    r: usize,
    h: f64,
    p: Exponent,
    weight: &JacobiParams,
    candidates: &[IntervalCandidate<'_>],
    opts: &ModulusOptions,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::Configuration("the K-functional needs at least one candidate".into()));
    }
    let sampler = Sampler::new(Some(weight), None, p, opts)?;
    let hr = h.powi(r as i32);
    Ok(candidates
        .iter()
        .map(|c| {
            let fit = sampler.norm(p, |t| f(t) - (c.g)(t));
            let smooth = sampler.norm(p, |t| phi(t).powi(r as i32) * (c.derivative)(t));
            fit + hr * smooth
        })
        .fold(f64::INFINITY, f64::min))
}

/// `L_{2^j} f` for `j = 0..=jmax` as K-functional candidates (`r ≤ 2`).
pub fn default_candidates(
    f: &dyn Fn(f64) -> f64,
    weight: &JacobiParams,
    r: usize,
    jmax: u32,
    cutoff: CutoffSpec,
) -> Result<Vec<IntervalCandidate<'static>>> {
    if r > 2 {
        return Err(Error::Capability(format!("expansion candidates carry derivatives up to order 2, not {r}")));
    }
    (0..=jmax)
        .map(|j| {
            let n = 1usize << j;
            let op = IntervalOperator::with_nodes(*weight, n, cutoff, 4 * n + 64)?;
            let e = op.apply(f)?;
            let e2 = e.clone();
            Ok(IntervalCandidate {
                g: Box::new(move |t| e.eval(t)),
                derivative: Box::new(move |t| e2.jet(t).derivative(r)),
            })
        })
        .collect()
}

/// For each `n`, the maximum over an `s`-grid in `[-1,1]` of
/// `∫ |L_n(s,t)| w_{α+γ,β+δ}(t) dt / ϖ_{γ-1/2,δ-1/2}(n; s)`.
pub fn jacobi_kernel_integral_check(
    params: &JacobiParams,
    gamma_shift: f64,
    delta_shift: f64,
    ns: &[usize],
    cutoff: CutoffSpec,
) -> Result<Vec<f64>> {
    if params.alpha() < -0.5 || params.beta() < -0.5 {
        return Err(Error::ParameterDomain("the integral bound needs α, β ≥ -1/2".into()));
    }
    if gamma_shift < 0.0 || delta_shift < 0.0 {
        return Err(Error::ParameterDomain("weight shifts must be nonnegative".into()));
    }
    let shifted = JacobiParams::new(params.alpha() + gamma_shift, params.beta() + delta_shift)?;
    ns.iter()
        .map(|&n| {
            let kernel = IntervalKernel::new(*params, n, cutoff);
            let rule = gauss_jacobi_rule(&shifted, 4 * n + 64)?;
            let m = kernel.max_degree();
            let ladder = kernel.ladder();
            let node_vals: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| ladder.values(m, x)).collect();
            let grid = 201;
            let mut worst: f64 = 0.0;
            for i in 0..grid {
                let s = (std::f64::consts::PI * i as f64 / (grid - 1) as f64).cos();
                let ps = ladder.values(m, s);
                let integral: f64 = node_vals
                    .iter()
                    .zip(&rule.weights)
                    .map(|(pt, w)| {
                        let k: f64 = kernel.filter().iter().zip(pt.iter().zip(&ps)).map(|(a, (u, v))| a * u * v).sum();
                        w * k.abs()
                    })
                    .sum();
                let bound = jacobi_weight_regularized(gamma_shift - 0.5, delta_shift - 0.5, n.max(1), s);
                worst = worst.max(integral / bound);
            }
            Ok(worst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{jacobi_eval, jacobi_norm};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn distances() {
        assert_eq!(interval_distance(0.37, 0.37).unwrap(), 0.0);
        assert_relative_eq!(interval_distance(0.0, 1.0).unwrap(), std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(interval_distance(0.25, 0.75).unwrap(), std::f64::consts::PI / 6.0, max_relative = 1e-14);
        assert!(matches!(interval_distance(-0.1, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn kernel_coefficients() {
        let ev = IntervalKernel::new(p(0.0, 0.0), 4, CutoffSpec::ExponentialBump);
        for k in 0..=4 {
            assert_eq!(ev.coefficient(k), 1.0 / jacobi_norm(&p(0.0, 0.0), k));
        }
        assert_eq!(ev.coefficient(8), 0.0);
        assert_eq!(ev.coefficient(9), 0.0);
        let zero = IntervalKernel::new(p(0.0, 0.0), 0, CutoffSpec::ExponentialBump);
        assert!((zero.eval_unit(0.2, 0.9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_matches_termwise_sum() {
        // Independent summation over classical polynomials at s = t = 1.
        let q = p(0.0, 0.0);
        let ev = IntervalKernel::new(q, 4, CutoffSpec::ExponentialBump);
        let want: f64 = (0..=8)
            .map(|k| {
                CutoffSpec::ExponentialBump.eval(k as f64 / 4.0) * jacobi_eval(&q, k, 1.0).powi(2) / jacobi_norm(&q, k)
            })
            .sum();
        assert_relative_eq!(ev.eval(1.0, 1.0), want, max_relative = 1e-13);
    }

    fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn horner(c: &[f64], t: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }

    #[test]
    fn reproduces_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(a, b) in &[(0.0, 0.0), (1.0, 0.5), (0.0, 1.0)] {
            let q = p(a, b);
            for n in [1usize, 2, 4, 6, 9, 16] {
                let ev = IntervalKernel::new(q, n, CutoffSpec::ExponentialBump);
                let rule = gauss_jacobi_unit(&q, 2 * n + 4).unwrap();
                let op = IntervalOperator::with_nodes(q, n, CutoffSpec::ExponentialBump, 2 * n + 4).unwrap();
                for _ in 0..5 {
                    let c = random_poly(&mut rng, n);
                    let f = |t: f64| horner(&c, t);
                    let e = op.apply(&f).unwrap();
                    for i in 0..=100 {
                        let t = i as f64 / 100.0;
                        assert!((e.eval(t) - f(t)).abs() < 1e-8, "n={n} t={t}");
                    }
                    let t = 0.37;
                    let direct = localized_operator_apply(&ev, &f, t, &rule).unwrap();
                    assert!((direct - f(t)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn operator_spot_values_and_rule_mismatch() {
        let q = p(1.0, 0.0);
        let ev = IntervalKernel::new(q, 3, CutoffSpec::RaisedCosine);
        let rule = gauss_jacobi_unit(&q, 12).unwrap();
        assert_relative_eq!(localized_operator_apply(&ev, &|_| 1.0, 0.4, &rule).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(localized_operator_apply(&ev, &|s| s, 0.4, &rule).unwrap(), 0.4, max_relative = 1e-12);
        let wrong = gauss_jacobi_unit(&p(0.0, 0.0), 12).unwrap();
        assert!(matches!(localized_operator_apply(&ev, &|s| s, 0.4, &wrong), Err(Error::Configuration(_))));
    }

    #[test]
    fn operator_error_bounded_by_projection_error() {
        // f = s^{n+3}: compare with the L² projection error from basis coefficients.
        let q = p(0.0, 0.0);
        let n = 6;
        let f = |s: f64| s.powi(n as i32 + 3);
        let op = IntervalOperator::with_nodes(q, n, CutoffSpec::ExponentialBump, 40).unwrap();
        let e = op.apply(&f).unwrap();
        let ladder = OrthonormalLadder::new(q, n + 3);
        let rule = op.rule().clone();
        let vals: Vec<f64> = rule.nodes.iter().map(|&s| f(s)).collect();
        let full = IntervalExpansion::project(&vals, &rule, &ladder, n + 3).unwrap();
        let best: f64 = full.coefficients()[n + 1..].iter().map(|c| c * c).sum::<f64>().sqrt();
        let err = rule.integrate(|s| (f(s) - e.eval(s)).powi(2)).sqrt();
        assert!(err > 0.0 && err <= 10.0 * best, "{err} vs {best}");
    }

    #[test]
    fn modulus_spot_values() {
        let opts = ModulusOptions::default();
        assert_eq!(dt_modulus(&|_| 3.0, 2, 0.1, Exponent::TWO, None, false, &opts).unwrap(), 0.0);
        let h = 0.125;
        let w = dt_modulus(&|t| t, 1, h, Exponent::INFINITY, None, false, &opts).unwrap();
        assert_relative_eq!(w, h / 2.0, max_relative = 1e-12);
        let ratios: Vec<f64> = (3..=7)
            .map(|k| {
                let h = (-(k as f64)).exp2();
                dt_modulus(&|t| t * t, 2, h, Exponent::INFINITY, None, false, &opts).unwrap() / (h * h)
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 1.05, "{ratios:?}");
    }

    #[test]
    fn main_part_requires_room() {
        let opts = ModulusOptions::default();
        let w = p(0.0, 0.0);
        assert!(matches!(
            dt_modulus(&|t| t, 1, 0.25, Exponent::TWO, Some(&w), true, &opts),
            Err(Error::DegenerateInput(_))
        ));
        assert!(dt_modulus(&|t| t, 1, 0.1, Exponent::TWO, Some(&w), true, &opts).is_ok());
        assert!(matches!(dt_modulus(&|t| t, 1, 0.1, Exponent::TWO, None, true, &opts), Err(Error::Configuration(_))));
    }

    fn suite() -> Vec<(&'static str, Box<dyn Fn(f64) -> f64 + Sync>)> {
        vec![
            ("smooth", Box::new(|t: f64| (-t).exp() * (1.0 + t))),
            ("edge", Box::new(|t: f64| (1.0 - t).powf(1.5))),
            ("rough", Box::new(|t: f64| (t - 0.5).abs().powf(1.5))),
            ("root", Box::new(|t: f64| t.sqrt())),
        ]
    }

    #[test]
    fn modulus_monotone_and_scaling() {
        let opts = ModulusOptions { nodes: 160, ..Default::default() };
        let hs: Vec<f64> = (2..=6).rev().map(|k| (-(k as f64)).exp2()).collect();
        for (name, f) in suite() {
            for r in 1..=2 {
                let rep = dt_modulus_report(f.as_ref(), r, &hs, Exponent::TWO, None, false, &opts).unwrap();
                assert!(rep.component_values.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)), "{name} r={r}");
                for &h in &hs[..hs.len() - 1] {
                    let a = dt_modulus(f.as_ref(), r, 2.0 * h, Exponent::TWO, None, false, &opts).unwrap();
                    let b = dt_modulus(f.as_ref(), r, h, Exponent::TWO, None, false, &opts).unwrap();
                    assert!(a <= 3f64.powi(r as i32) * b, "{name} r={r} h={h}");
                }
            }
            for &h in &hs {
                let w2 = dt_modulus(f.as_ref(), 2, h, Exponent::TWO, None, false, &opts).unwrap();
                let w1 = dt_modulus(f.as_ref(), 1, h, Exponent::TWO, None, false, &opts).unwrap();
                assert!(w2 <= 2.0 * w1 + 1e-14, "{name} h={h}");
            }
        }
    }

    #[test]
    fn theta_grid_refinement_is_stable() {
        let coarse = ModulusOptions { nodes: 160, ..Default::default() };
        let fine = ModulusOptions { theta_steps: 31, ..coarse };
        let fine_grid = |h: f64| -> Vec<f64> { (0..31).map(|j| h * (-(j as f64) / 4.0).exp2()).collect() };
        for (name, f) in suite() {
            let h = 1.0 / 16.0;
            let a = dt_modulus(f.as_ref(), 1, h, Exponent::TWO, None, false, &coarse).unwrap();
            let sampler = Sampler::new(None, None, Exponent::TWO, &fine).unwrap();
            let b = fine_grid(h)
                .into_iter()
                .map(|th| sampler.norm(Exponent::TWO, |t| dt_difference(f.as_ref(), 1, th, t)))
                .fold(0.0, f64::max);
            assert!((a - b).abs() <= 0.01 * b, "{name}: {a} vs {b}");
        }
    }

    #[test]
    fn kfunctional_basics() {
        let w = p(0.0, 0.0);
        let opts = ModulusOptions { nodes: 128, ..Default::default() };
        assert!(matches!(dt_kfunctional(&|t| t, 1, 0.1, Exponent::TWO, &w, &[], &opts), Err(Error::Configuration(_))));
        let zero = default_candidates(&|_| 0.0, &w, 2, 3, CutoffSpec::ExponentialBump).unwrap();
        assert!(dt_kfunctional(&|_| 0.0, 2, 0.1, Exponent::TWO, &w, &zero, &opts).unwrap().abs() < 1e-14);
        // g = f: only the derivative term survives.
        let f = |t: f64| t * t;
        let own = [IntervalCandidate { g: Box::new(f), derivative: Box::new(|_| 2.0) }];
        let k = dt_kfunctional(&f, 2, 0.1, Exponent::TWO, &w, &own, &opts).unwrap();
        // ‖φ² · 2‖_2 = 2 sqrt(∫ t²(1-t)²) = 2/sqrt(30)
        assert_relative_eq!(k, 0.01 * 2.0 / 30f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn modulus_and_kfunctional_are_equivalent() {
        let w = p(0.0, 0.0);
        let opts = ModulusOptions { rho: 1.0, nodes: 200, ..Default::default() };
        for (name, f) in suite() {
            for r in 1..=2 {
                let cands = default_candidates(f.as_ref(), &w, r, 6, CutoffSpec::ExponentialBump).unwrap();
                for h in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0] {
                    let om = dt_modulus(f.as_ref(), r, h, Exponent::TWO, Some(&w), true, &opts).unwrap();
                    let k = dt_kfunctional(f.as_ref(), r, h, Exponent::TWO, &w, &cands, &opts).unwrap();
                    let ratio = om / k;
                    assert!((1.0 / 50.0..=50.0).contains(&ratio), "{name} r={r} h={h}: {ratio}");
                }
            }
        }
    }

    #[test]
    fn kernel_integral_bound() {
        let cut = CutoffSpec::ExponentialBump;
        let n0 = IntervalKernel::new(p(0.0, 0.0), 0, cut);
        assert_eq!(n0.eval(0.3, -0.2), 1.0);
        let flat = jacobi_kernel_integral_check(&p(0.0, 0.0), 0.0, 0.0, &[8, 16, 32, 64], cut).unwrap();
        for w in flat.windows(2) {
            assert!(w[1] / w[0] < 1.1, "{flat:?}");
        }
        // The shifted weight approaches its bound from below: growth shrinks
        // step by step and has settled by the last step.
        let seq = jacobi_kernel_integral_check(&p(0.5, 0.5), 1.0, 0.0, &[8, 16, 32, 64, 128], cut).unwrap();
        let growth: Vec<f64> = seq.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(growth.windows(2).all(|g| g[1] < g[0]), "{seq:?}");
        assert!(*growth.last().unwrap() < 1.1, "{seq:?}");
        assert!(jacobi_kernel_integral_check(&p(-0.7, 0.0), 0.0, 0.0, &[4], cut).is_err());
    }

    #[test]
    fn kernel_localization() {
        // |L_n(s,t)| (1 + n d(s,t))^4 sqrt(ϖ(n;s) ϖ(n;t)) / n bounded in n.
        let q = p(0.0, 0.0);
        let t = 0.3;
        let x_t = 1.0 - 2.0 * t;
        let mut maxima = vec![];
        for n in [16usize, 32, 64, 128] {
            let ev = IntervalKernel::new(q, n, CutoffSpec::ExponentialBump);
            let mut m: f64 = 0.0;
            for i in 0..=400 {
                let s = i as f64 / 400.0;
                let x_s = 1.0 - 2.0 * s;
                let d = interval_distance(s, t).unwrap();
                let w =
                    (jacobi_weight_regularized(0.0, 0.0, n, x_s) * jacobi_weight_regularized(0.0, 0.0, n, x_t)).sqrt();
                m = m.max(ev.eval(x_s, x_t).abs() * (1.0 + n as f64 * d).powi(4) * w / n as f64);
            }
            maxima.push(m);
        }
        let (lo, hi) = maxima.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo < 2.0, "{maxima:?}");
    }

    #[test]
    fn expansion_jets_match_finite_differences() {
        let q = p(1.0, 2.0);
        let op = IntervalOperator::with_nodes(q, 5, CutoffSpec::ExponentialBump, 30).unwrap();
        let e = op.apply(&|t: f64| (3.0 * t).sin()).unwrap();
        let t = 0.41;
        let h = 1e-4;
        let j = e.jet(t);
        assert_relative_eq!(j.d1, (e.eval(t + h) - e.eval(t - h)) / (2.0 * h), max_relative = 1e-6);
        assert_relative_eq!(j.d2, (e.eval(t + h) - 2.0 * e.eval(t) + e.eval(t - h)) / (h * h), max_relative = 1e-4);
    }
}
