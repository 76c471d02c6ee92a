//! Named checks. Each one reduces to assertions of the form
//! `measure <= tolerance`; tolerances can be overridden from the config.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cone::{
    cone_integrate, cone_kernel_eval, cone_nearbest_direct, lift, phi_derivative_identity_check, ConeOperator,
    ConePoint, ConeRules, ConeWeight, Sheet,
};
use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::field::{Derivatives, Field, SuiteFunction};
use crate::interval::IntervalKernel;
use crate::jacobi::{gauss_jacobi_rule, jacobi_eval, jacobi_norm, JacobiParams};
use crate::norm::Exponent;
use crate::sphere::{sphere_area, spherical_quadrature};
use crate::surface::{
    ambient, bernstein_ratio, best_approx, best_approx_l2_many, commutation_check, default_surface_candidates,
    nearbest_apply, normalized_kernel_max, random_polynomial, split_f1_f2, surface_euler_modulus, surface_kfunctional,
    surface_radial_modulus, BestApprox, CommutationKind, CommutationParams, FieldCandidate, KernelBackend, RayOperator,
    SurfaceCandidate, SurfaceKernelEvaluator, SurfaceOperator, SurfaceOptions, SurfacePoint, SurfaceRules,
    SurfaceSampler, SurfaceWeight,
};

use super::config::ExperimentConfig;
use super::report::{Assertion, CheckRecord, Value};

/// What a check measured, before tolerance overrides.
#[derive(Debug, Clone, Default)]
pub struct CheckOutput {
    pub values: BTreeMap<String, Value>,
    pub fitted_constants: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
}

impl CheckOutput {
    fn value(&mut self, key: impl Into<String>, v: impl Into<Value>) {
        self.values.insert(key.into(), v.into());
    }

    fn fit(&mut self, key: impl Into<String>, c: f64) {
        self.fitted_constants.insert(key.into(), c);
    }

    fn assert(&mut self, label: impl Into<String>, measure: f64, tolerance: f64) {
        self.assertions.push(Assertion::new(label, measure, tolerance));
    }
}

pub struct CheckSpec {
    pub name: &'static str,
    pub anchor: &'static str,
    /// Acceptance criterion this check implements.
    pub criterion: Option<u8>,
    pub run: fn(&ExperimentConfig) -> Result<CheckOutput>,
}

pub const CHECKS: &[CheckSpec] = &[
    CheckSpec {
        name: "jacobi_orthonormality",
        anchor: "orthogonality and norms of Jacobi polynomials",
        criterion: Some(1),
        run: jacobi_orthonormality,
    },
    CheckSpec {
        name: "kernel_backends",
        anchor: "addition formula for the reproducing kernel on the conic surface",
        criterion: Some(2),
        run: kernel_backends,
    },
    CheckSpec {
        name: "polynomial_reproduction",
        anchor: "the near-best operator reproduces polynomials of degree n",
        criterion: Some(3),
        run: polynomial_reproduction,
    },
    CheckSpec {
        name: "kernel_localization",
        anchor: "pointwise localization estimate for the kernel on the conic surface",
        criterion: Some(4),
        run: kernel_localization,
    },
    CheckSpec {
        name: "ray_operator_lemma",
        anchor: "the ray operator acts as the identity on the range of the near-best operator",
        criterion: Some(5),
        run: ray_operator_lemma,
    },
    CheckSpec {
        name: "commutation",
        anchor: "commutation of the near-best operator with radial and Euler differences",
        criterion: Some(6),
        run: commutation,
    },
    CheckSpec {
        name: "direct_theorem",
        anchor: "direct estimate of best approximation by the modulus",
        criterion: Some(7),
        run: direct_theorem,
    },
    CheckSpec {
        name: "inverse_theorem",
        anchor: "inverse estimate of the modulus by best approximations",
        criterion: Some(8),
        run: inverse_theorem,
    },
    CheckSpec {
        name: "modulus_kfunctional_equivalence",
        anchor: "equivalence of the modulus and the K-functional",
        criterion: Some(9),
        run: modulus_kfunctional_equivalence,
    },
    CheckSpec {
        name: "modulus_properties",
        anchor: "scaling and Marchaud inequalities for the modulus",
        criterion: Some(10),
        run: modulus_properties,
    },
    CheckSpec {
        name: "cone_lift_identities",
        anchor: "kernel, integral, operator and derivative identities under the lift to the surface",
        criterion: Some(11),
        run: cone_lift_identities,
    },
    CheckSpec {
        name: "bernstein_ratios",
        anchor: "Bernstein inequalities for the radial and angular derivatives",
        criterion: Some(12),
        run: bernstein_ratios,
    },
    CheckSpec { name: "determinism", anchor: "plumbing", criterion: Some(13), run: determinism },
    CheckSpec {
        name: "cutoff_admissibility",
        anchor: "admissible cut-off function",
        criterion: None,
        run: cutoff_admissibility,
    },
    CheckSpec {
        name: "sphere_average_identity",
        anchor: "sphere averages of the near-best operator reduce to the interval operator",
        criterion: None,
        run: sphere_average_identity,
    },
    CheckSpec {
        name: "split_identity",
        anchor: "splitting of the approximation error through the ray operator",
        criterion: None,
        run: split_identity,
    },
];

pub fn find(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

pub fn for_criterion(criterion: u8) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.criterion == Some(criterion))
}

/// Runs one check and applies the config's tolerance overrides.
pub fn run_check(spec: &CheckSpec, config: &ExperimentConfig) -> (CheckRecord, f64) {
    let start = Instant::now();
    let result = (spec.run)(config);
    let elapsed = start.elapsed().as_secs_f64();
    let mut record = CheckRecord {
        name: spec.name.into(),
        anchor: spec.anchor.into(),
        values: BTreeMap::new(),
        fitted_constants: BTreeMap::new(),
        assertions: Vec::new(),
        pass: false,
        error: None,
    };
    match result {
        Ok(out) => {
            record.values = out.values;
            record.fitted_constants = out.fitted_constants;
            record.assertions = out
                .assertions
                .into_iter()
                .map(|a| {
                    let tol = config.tolerance(spec.name, &a.label, a.tolerance);
                    Assertion::new(a.label, a.measure, tol)
                })
                .collect();
            record.pass = !record.assertions.is_empty() && record.assertions.iter().all(|a| a.pass);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    (record, elapsed)
}

/// `max_{i<j} q_j / q_i` over the positive entries; 1 when fewer than two.
pub fn growth(seq: &[f64]) -> f64 {
    let q: Vec<f64> = seq.iter().copied().filter(|v| *v > 0.0 && v.is_finite()).collect();
    if q.len() < 2 {
        return 1.0;
    }
    let mut best = 0.0f64;
    let mut lo = q[0];
    for &v in &q[1..] {
        best = best.max(v / lo);
        lo = lo.min(v);
    }
    best
}

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Modulus settings used throughout the harness: the main part of the
/// radial modulus is `[r²h², 1 - r²h²]`.
pub fn modulus_options() -> SurfaceOptions {
    SurfaceOptions::default().with_rho(1.0)
}

pub(crate) fn surface_dim(config: &ExperimentConfig) -> usize {
    config.d.max(2)
}

pub(crate) fn surface_weight(config: &ExperimentConfig) -> Result<SurfaceWeight> {
    SurfaceWeight::new(surface_dim(config), config.gamma)
}

pub(crate) fn random_surface_point(rng: &mut ChaCha8Rng, d: usize) -> SurfacePoint {
    let xi: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    SurfacePoint::from_coords(xi, rng.gen_range(0.0..1.0)).expect("nonzero direction")
}

pub(crate) fn random_cone_point(rng: &mut ChaCha8Rng, d: usize) -> ConePoint {
    let t: f64 = rng.gen_range(0.02..1.0);
    loop {
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if y.iter().map(|c| c * c).sum::<f64>() < 1.0 {
            return ConePoint::from_ball(&y, t).expect("inside the ball");
        }
    }
}

/// `Σ c_α x^α t^k` with standard normal coefficients over `|α| + k ≤ n`.
pub(crate) struct ConePolynomial {
    terms: Vec<(Vec<i32>, f64)>,
}

impl ConePolynomial {
    pub(crate) fn random(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut exps = vec![vec![]];
        for _ in 0..=d {
            exps = exps
                .into_iter()
                .flat_map(|e: Vec<i32>| {
                    let used: i32 = e.iter().sum();
                    (0..=(n as i32 - used)).map(move |k| {
                        let mut e = e.clone();
                        e.push(k);
                        e
                    })
                })
                .collect();
        }
        Self { terms: exps.into_iter().map(|e| (e, rng.sample(StandardNormal))).collect() }
    }
}

impl Field for ConePolynomial {
    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k)).product::<f64>()).sum()
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn jacobi_orthonormality(_: &ExperimentConfig) -> Result<CheckOutput> {
    const PAIRS: [(f64, f64); 4] = [(-0.5, -0.5), (0.0, 0.0), (1.0, 0.0), (2.5, 0.7)];
    const N: usize = 40;
    let mut out = CheckOutput::default();
    let mut worst = 0.0f64;
    for (a, b) in PAIRS {
        let q = JacobiParams::new(a, b)?;
        let rule = gauss_jacobi_rule(&q, N + 2)?;
        let c = 1.0 / q.mass();
        let vals: Vec<Vec<f64>> =
            rule.nodes.iter().map(|&x| (0..=N).map(|k| jacobi_eval(&q, k, x)).collect()).collect();
        let norms: Vec<f64> = (0..=N).map(|k| jacobi_norm(&q, k)).collect();
        let mut dev = 0.0f64;
        for n in 0..=N {
            for m in 0..=n {
                let ip: f64 = c * vals.iter().zip(&rule.weights).map(|(v, w)| w * v[n] * v[m]).sum::<f64>();
                let want = if n == m { norms[n] } else { 0.0 };
                dev = dev.max((ip - want).abs() / (norms[n] * norms[m]).sqrt());
            }
        }
        out.value(format!("alpha_{a}_beta_{b}"), dev);
        worst = worst.max(dev);
    }
    out.assert("scaled_deviation", worst, 1e-10);
    Ok(out)
}

fn kernel_backends(config: &ExperimentConfig) -> Result<CheckOutput> {
    let mut out = CheckOutput::default();
    let mut rng = rng(config.seed, 2);
    for gamma in [0.0, 1.0] {
        let w = SurfaceWeight::new(2, gamma)?;
        let mut per_n = Vec::new();
        for n in [1, 5, 10, 20] {
            let a = SurfaceKernelEvaluator::new(w, n, config.cutoff, KernelBackend::BasisSum)?;
            let b = SurfaceKernelEvaluator::new(w, n, config.cutoff, KernelBackend::AdditionFormula)?;
            let mut dev = 0.0f64;
            for _ in 0..50 {
                let (p, q) = (random_surface_point(&mut rng, 2), random_surface_point(&mut rng, 2));
                let (x, y) = (a.eval(&p, &q)?, b.eval(&p, &q)?);
                dev = dev.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
            }
            per_n.push(dev);
        }
        out.assert(format!("gamma_{gamma}"), max_abs(per_n.iter().copied()), 1e-8);
        out.value(format!("gamma_{gamma}_by_degree"), per_n);
    }
    out.value("degrees", vec![1.0, 5.0, 10.0, 20.0]);
    Ok(out)
}

const REPRODUCTION_DEGREES: [usize; 4] = [2, 4, 8, 16];

fn polynomial_reproduction(config: &ExperimentConfig) -> Result<CheckOutput> {
    let mut out = CheckOutput::default();
    let mut rng = rng(config.seed, 3);
    for d in [2, 3] {
        let w = SurfaceWeight::new(d, config.gamma)?;
        let mut per_n = Vec::new();
        for n in REPRODUCTION_DEGREES {
            let op = SurfaceOperator::with_default_rules(w, n, config.cutoff)?;
            let mut dev = 0.0f64;
            for _ in 0..5 {
                let f = random_polynomial(w, n, &mut rng)?;
                let lf = op.apply_values(&f.grid_values(op.rules()))?;
                let pts: Vec<SurfacePoint> = (0..20).map(|_| random_surface_point(&mut rng, d)).collect();
                let scale = max_abs(pts.iter().map(|p| f.eval_point(p))).max(1.0);
                dev = dev.max(max_abs(pts.iter().map(|p| lf.eval_point(p) - f.eval_point(p))) / scale);
            }
            per_n.push(dev);
        }
        out.assert(format!("surface_d{d}"), max_abs(per_n.iter().copied()), 1e-8);
        out.value(format!("surface_d{d}_by_degree"), per_n);
    }
    let w = ConeWeight::new(2, config.gamma)?;
    let mut per_n = Vec::new();
    for n in REPRODUCTION_DEGREES {
        let op = ConeOperator::with_default_rules(w, n, config.cutoff)?;
        let mut dev = 0.0f64;
        for _ in 0..5 {
            let f = ConePolynomial::random(2, n, &mut rng);
            let lf = op.apply(&f)?;
            let pts: Vec<ConePoint> = (0..20).map(|_| random_cone_point(&mut rng, 2)).collect();
            let scale = max_abs(pts.iter().map(|p| f.value(&p.coords()))).max(1.0);
            let mut res = 0.0f64;
            for p in &pts {
                res = res.max((lf.eval(p)? - f.value(&p.coords())).abs());
            }
            dev = dev.max(res / scale);
        }
        per_n.push(dev);
    }
    out.assert("cone_d2", max_abs(per_n.iter().copied()), 1e-8);
    out.value("cone_d2_by_degree", per_n);
    Ok(out)
}

fn kernel_localization(config: &ExperimentConfig) -> Result<CheckOutput> {
    let d = surface_dim(config);
    let w = surface_weight(config)?;
    let mut rng = rng(config.seed, 4);
    let mut pairs = Vec::new();
    for _ in 0..40 {
        let a = random_surface_point(&mut rng, d);
        let b = random_surface_point(&mut rng, d);
        pairs.push((a.clone(), a));
        pairs.push((pairs.last().expect("pushed").0.clone(), b));
    }
    for t in [0.0, 1e-3, 0.5, 0.999, 1.0] {
        let mut xi = vec![0.0; d];
        xi[0] = 1.0;
        let a = SurfacePoint::from_coords(xi, t)?;
        pairs.push((a.clone(), a));
    }
    let ns = [8usize, 16, 32, 64];
    let maxima = ns
        .iter()
        .map(|&n| {
            let ev = SurfaceKernelEvaluator::new(w, n, config.cutoff, KernelBackend::AdditionFormula)?;
            normalized_kernel_max(&ev, 4.0, &pairs)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut out = CheckOutput::default();
    out.fit("c_kappa_4", max_abs(maxima.iter().copied()));
    out.assert("growth", growth(&maxima), 1.25);
    out.value("degrees", ns.iter().map(|&n| n as f64).collect::<Vec<_>>());
    out.value("normalized_max", maxima);
    Ok(out)
}

fn ray_operator_lemma(config: &ExperimentConfig) -> Result<CheckOutput> {
    let d = surface_dim(config);
    let w = surface_weight(config)?;
    let mut rng = rng(config.seed, 5);
    let pts: Vec<SurfacePoint> = (0..10).map(|_| random_surface_point(&mut rng, d)).collect();
    let mut out = CheckOutput::default();
    let mut worst = 0.0f64;
    for (m, n) in [(2usize, 4usize), (4, 8), (8, 16)] {
        let rules = SurfaceRules::for_degree(w, 2 * n)?;
        let gn = RayOperator::new(w, n, config.cutoff, &rules)?;
        let lm = SurfaceOperator::new(w, m, config.cutoff, Arc::new(rules.clone()))?;
        let mut dev = 0.0f64;
        for f in config.suite() {
            let lmf = lm.apply(&f)?;
            let lmgn = lm.apply_values(&gn.apply_grid(&f, &rules)?)?;
            for p in &pts {
                let want = lmf.eval_point(p);
                dev = dev.max((gn.apply_at(&lmf, p)? - want).abs()).max((lmgn.eval_point(p) - want).abs());
            }
        }
        out.value(format!("m{m}_n{n}"), dev);
        worst = worst.max(dev);
    }
    out.assert("residual", worst, 1e-7);
    Ok(out)
}

fn commutation(config: &ExperimentConfig) -> Result<CheckOutput> {
    let d = surface_dim(config);
    let w = surface_weight(config)?;
    let n = 8;
    let op = SurfaceOperator::with_default_rules(w, n, config.cutoff)?;
    let mut rng = rng(config.seed, 6);
    let points: Vec<SurfacePoint> = (0..20).map(|_| random_surface_point(&mut rng, d)).collect();
    let mut out = CheckOutput::default();
    let (mut euler, mut radial) = (0.0f64, 0.0f64);
    for r in 1..=2 {
        let params = CommutationParams { r, theta: 0.1, plane: (1, 2), points: points.clone() };
        for f in config.suite() {
            let e = commutation_check(&op, &f, CommutationKind::EulerDifference, &params)?;
            let q = commutation_check(&op, &f, CommutationKind::RadialDifference, &params)?;
            out.value(format!("euler_r{r}_{}", f.name()), e);
            out.value(format!("radial_r{r}_{}", f.name()), q);
            euler = euler.max(e);
            radial = radial.max(q);
        }
        // a polynomial of degree n is reproduced, yet its radial difference is not a polynomial
        let poly = random_polynomial(w, n, &mut rng)?;
        let q = commutation_check(&op, &poly, CommutationKind::RadialDifference, &params)?;
        out.value(format!("radial_r{r}_polynomial"), q);
        radial = radial.max(q);
    }
    out.assert("euler", euler, 1e-8);
    out.assert("radial", radial, 1e-8);
    Ok(out)
}

/// `E_n(f)_p` for each `n`: `L²` tails, otherwise the near-best surrogate.
pub(crate) fn surface_best_approx(
    f: &dyn Field,
    w: SurfaceWeight,
    ns: &[usize],
    p: Exponent,
    cutoff: CutoffSpec,
) -> Result<Vec<BestApprox>> {
    if p == Exponent::TWO {
        best_approx_l2_many(f, w, ns, None)
    } else {
        ns.iter().map(|&n| best_approx(f, w, n, p, cutoff)).collect()
    }
}

/// `ω_r(f; h)`, with the radial part taken as 0 when its main part is empty.
pub(crate) fn surface_modulus_total(
    f: &dyn Field,
    w: &SurfaceWeight,
    r: usize,
    h: f64,
    p: Exponent,
    opts: &SurfaceOptions,
) -> Result<f64> {
    let radial = match surface_radial_modulus(f, w, r, h, p, opts) {
        Ok(v) => v,
        Err(Error::DegenerateInput(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(radial + surface_euler_modulus(f, w, r, h, p, opts)?)
}

fn direct_theorem(config: &ExperimentConfig) -> Result<CheckOutput> {
    let w = surface_weight(config)?;
    let opts = modulus_options();
    let mut out = CheckOutput::default();
    let mut worst = 0.0f64;
    for f in config.suite() {
        let e = surface_best_approx(&f, w, &config.degrees, config.p, config.cutoff)?;
        let mut q = Vec::new();
        for (b, &n) in e.iter().zip(&config.degrees) {
            let om = surface_modulus_total(&f, &w, 1, 1.0 / n as f64, config.p, &opts)?;
            // unresolved tails carry no digits
            q.push(if b.resolved() { b.value / om } else { f64::NAN });
        }
        let resolved: Vec<f64> = q.iter().copied().filter(|v| v.is_finite()).collect();
        let g = growth(&resolved);
        out.fit(format!("c_{}", f.name()), max_abs(resolved.iter().copied()));
        out.value(
            format!("ratio_{}", f.name()),
            q.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect::<Vec<_>>(),
        );
        out.value(format!("growth_{}", f.name()), g);
        worst = worst.max(g);
    }
    out.value("degrees", config.degrees.iter().map(|&n| n as f64).collect::<Vec<_>>());
    out.assert("growth", worst, 1.25);
    Ok(out)
}

/// `n^{-r} Σ_{k≤n} (k+1)^{r-1} E_k` from `e[k] = E_k`.
pub(crate) fn inverse_sum(e: &[f64], r: usize, n: usize) -> f64 {
    (n as f64).powi(-(r as i32)) * (0..=n).map(|k| ((k + 1) as f64).powi(r as i32 - 1) * e[k]).sum::<f64>()
}

fn inverse_theorem(config: &ExperimentConfig) -> Result<CheckOutput> {
    let w = surface_weight(config)?;
    let opts = modulus_options();
    let nmax = *config.degrees.last().expect("validated");
    let ks: Vec<usize> = (0..=nmax).collect();
    let mut out = CheckOutput::default();
    let mut worst = [0.0f64; 2];
    for f in config.suite() {
        let e: Vec<f64> = surface_best_approx(&f, w, &ks, config.p, config.cutoff)?.iter().map(|b| b.value).collect();
        for r in 1..=2 {
            let c = config
                .degrees
                .iter()
                .map(
                    |&n| Ok(surface_modulus_total(&f, &w, r, 1.0 / n as f64, config.p, &opts)? / inverse_sum(&e, r, n)),
                )
                .collect::<Result<Vec<f64>>>()?;
            let g = growth(&c);
            out.fit(format!("c_r{r}_{}", f.name()), max_abs(c.iter().copied()));
            out.value(format!("c_r{r}_{}", f.name()), c);
            worst[r - 1] = worst[r - 1].max(g);
        }
    }
    out.value("degrees", config.degrees.iter().map(|&n| n as f64).collect::<Vec<_>>());
    out.assert("r1_growth", worst[0], 1.25);
    out.assert("r2_growth", worst[1], 1.25);
    Ok(out)
}

/// `L_{2^j} f` for `2^j` up to the largest degree, plus `f` itself.
pub(crate) fn surface_candidates(
    f: &dyn Field,
    w: SurfaceWeight,
    config: &ExperimentConfig,
) -> Result<Vec<crate::surface::SurfaceExpansion>> {
    let nmax = *config.degrees.last().expect("validated");
    let jmax = usize::BITS - 1 - nmax.leading_zeros();
    default_surface_candidates(f, w, jmax, config.cutoff)
}

fn modulus_kfunctional_equivalence(config: &ExperimentConfig) -> Result<CheckOutput> {
    let w = surface_weight(config)?;
    let opts = modulus_options();
    let mut out = CheckOutput::default();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for f in config.suite() {
        let cands = surface_candidates(&f, w, config)?;
        let own = FieldCandidate { field: &f, mode: Derivatives::Exact };
        let mut refs: Vec<&dyn SurfaceCandidate> = cands.iter().map(|c| c as &dyn SurfaceCandidate).collect();
        refs.push(&own);
        for r in 1..=2 {
            let ratios = config
                .degrees
                .iter()
                .map(|&n| {
                    let h = 1.0 / n as f64;
                    let om = surface_modulus_total(&f, &w, r, h, config.p, &opts)?;
                    let k = surface_kfunctional(&f, &w, r, h, config.p, &refs, &opts)?;
                    Ok(om / k)
                })
                .collect::<Result<Vec<f64>>>()?;
            lo = ratios.iter().copied().fold(lo, f64::min);
            hi = ratios.iter().copied().fold(hi, f64::max);
            out.value(format!("ratio_r{r}_{}", f.name()), ratios);
        }
    }
    out.fit("omega_over_k_max", hi);
    out.fit("k_over_omega_max", 1.0 / lo);
    out.value("degrees", config.degrees.iter().map(|&n| n as f64).collect::<Vec<_>>());
    out.assert("band", hi.max(1.0 / lo), 50.0);
    Ok(out)
}

fn modulus_properties(config: &ExperimentConfig) -> Result<CheckOutput> {
    let w = surface_weight(config)?;
    let opts = modulus_options();
    let hs: Vec<f64> = (0..=6).map(|k| (-(k as f64)).exp2()).collect();
    let mut out = CheckOutput::default();
    let (mut scaling, mut marchaud) = (0.0f64, 0.0f64);
    let sampler = SurfaceSampler::new(&w, config.p, None, &opts)?;
    for f in config.suite() {
        let norm = sampler.norm(config.p, |t, xi| f.value(&ambient(t, xi)));
        for r in 1..=2usize {
            let om = |r: usize| {
                hs.iter().map(|&h| surface_modulus_total(&f, &w, r, h, config.p, &opts)).collect::<Result<Vec<f64>>>()
            };
            let wr = om(r)?;
            let wr1 = om(r + 1)?;
            let bound = 3f64.powi(r as i32);
            let s: Vec<f64> = (2..=6).map(|k| wr[k - 1] / (bound * wr[k])).collect();
            scaling = s.iter().copied().fold(scaling, f64::max);
            // ∫_h^1 ω_{r+1}(u) u^{-r-1} du as a trapezoid in ln u on the dyadic grid
            let g: Vec<f64> = hs.iter().zip(&wr1).map(|(u, o)| o / u.powi(r as i32)).collect();
            let c: Vec<f64> = (2..=6)
                .map(|k| {
                    let integral: f64 = (0..k).map(|i| 0.5 * (g[i] + g[i + 1]) * std::f64::consts::LN_2).sum();
                    wr[k] / (hs[k].powi(r as i32) * integral)
                })
                .collect();
            marchaud = marchaud.max(growth(&c));
            out.fit(format!("marchaud_r{r}_{}", f.name()), max_abs(c.iter().copied()));
            out.fit(format!("bounded_r{r}_{}", f.name()), max_abs(wr[1..].iter().copied()) / norm);
            out.value(format!("omega_r{r}_{}", f.name()), wr);
            out.value(format!("scaling_r{r}_{}", f.name()), s);
            out.value(format!("marchaud_r{r}_{}", f.name()), c);
        }
    }
    out.value("h", hs);
    out.assert("scaling", scaling, 1.0);
    out.assert("marchaud_growth", marchaud, 1.25);
    Ok(out)
}

fn cone_lift_identities(config: &ExperimentConfig) -> Result<CheckOutput> {
    let d = 2;
    let w = ConeWeight::new(d, config.gamma)?;
    let sw = w.surface();
    let mut rng = rng(config.seed, 11);
    let mut out = CheckOutput::default();
    let points: Vec<ConePoint> = (0..10).map(|_| random_cone_point(&mut rng, d)).collect();

    // kernel: sheet symmetry, and reproduction through direct cone quadrature
    let n = 4;
    let ev = SurfaceKernelEvaluator::new(sw, n, config.cutoff, KernelBackend::BasisSum)?;
    let poly = ConePolynomial::random(d, n, &mut rng);
    let rules = ConeRules::for_degree(w, 4 * n)?;
    let mut kernel = 0.0f64;
    for (a, b) in points.iter().zip(points.iter().rev()) {
        let (x, y) = (lift(a, Sheet::Upper), lift(b, Sheet::Upper));
        let k = |p: &crate::cone::LiftedPoint, q: &crate::cone::LiftedPoint| -> Result<f64> {
            ev.eval(&p.surface_point()?, &q.surface_point()?)
        };
        let up = k(&x, &y)? + k(&x, &y.reflected())?;
        let down = k(&x.reflected(), &y)? + k(&x.reflected(), &y.reflected())?;
        let direct = cone_kernel_eval(&ev, a, b)?;
        kernel = kernel.max((up - down).abs() / up.abs().max(1.0)).max((up - direct).abs() / up.abs().max(1.0));
        let want = poly.value(&a.coords());
        let got = cone_nearbest_direct(&ev, &poly, a, &rules)?;
        kernel = kernel.max((got - want).abs() / want.abs().max(1.0));
    }
    out.assert("kernel", kernel, 1e-8);

    // integral: lifted surface rule against the direct cone rule, both exact
    let deg = 8;
    let poly = ConePolynomial::random(d, deg, &mut rng);
    let lifted = cone_integrate(&poly, &w, &SurfaceRules::for_degree(sw, deg)?)?;
    let direct = ConeRules::for_degree(w, deg)?.integrate(&poly);
    out.value("integral_lifted", lifted);
    out.value("integral_direct", direct);
    out.assert("integral", (lifted - direct).abs() / direct.abs().max(1.0), 1e-8);

    // operator: coefficient filtering on the lift against direct quadrature of the kernel
    let smooth = |x: &[f64]| (x[0] - 0.5 * x[d]).exp() * (1.0 + x[1] * x[1]);
    let n = 3;
    let op = ConeOperator::new(w, n, config.cutoff, Arc::new(SurfaceRules::new(sw, 80, 48)?))?;
    let g = op.apply(&smooth)?;
    let ev = SurfaceKernelEvaluator::new(sw, n, config.cutoff, KernelBackend::BasisSum)?;
    let direct_rules = ConeRules::new(w, 48, 28, 40)?;
    let mut operator = 0.0f64;
    for p in &points {
        let a = g.eval(p)?;
        let b = cone_nearbest_direct(&ev, &smooth, p, &direct_rules)?;
        operator = operator.max((a - b).abs() / a.abs().max(1.0));
    }
    out.assert("operator", operator, 1e-8);

    // (-Φ∂_i)^r g = D^r_{i,d+1} g̃
    let samples: Vec<ConePoint> = (0..50).map(|_| random_cone_point(&mut rng, d)).collect();
    let mut r1 = 0.0f64;
    for f in SuiteFunction::ALL {
        for i in 1..=d {
            r1 = r1.max(phi_derivative_identity_check(&f, i, 1, &samples, Derivatives::Exact)?.max_deviation);
        }
    }
    let r2 = phi_derivative_identity_check(&smooth, 1, 2, &samples, Derivatives::FiniteDifference)?.max_deviation;
    out.assert("phi_r1", r1, 1e-8);
    out.assert("phi_r2", r2, 1e-4);
    Ok(out)
}

fn bernstein_ratios(config: &ExperimentConfig) -> Result<CheckOutput> {
    let w = surface_weight(config)?;
    let ns = [4usize, 8, 16, 32];
    let mut out = CheckOutput::default();
    for r in 1..=2 {
        let seq = ns
            .iter()
            .map(|&n| bernstein_ratio(w, n, r, 20, config.p, config.seed.wrapping_add(n as u64)))
            .collect::<Result<Vec<_>>>()?;
        let angular: Vec<f64> = seq.iter().map(|b| b.angular).collect();
        let radial: Vec<f64> = seq.iter().map(|b| b.radial).collect();
        out.assert(format!("r{r}_angular_growth"), growth(&angular), 1.2);
        out.assert(format!("r{r}_radial_growth"), growth(&radial), 1.2);
        out.fit(format!("r{r}_angular"), max_abs(angular.iter().copied()));
        out.fit(format!("r{r}_radial"), max_abs(radial.iter().copied()));
        out.value(format!("r{r}_angular"), angular);
        out.value(format!("r{r}_radial"), radial);
    }
    out.value("degrees", ns.iter().map(|&n| n as f64).collect::<Vec<_>>());
    Ok(out)
}

/// Checks rerun by [`determinism`]: seeded sampling and parallel projections.
const DETERMINISM_PROBES: [&str; 2] = ["kernel_backends", "ray_operator_lemma"];

fn determinism(config: &ExperimentConfig) -> Result<CheckOutput> {
    let mut out = CheckOutput::default();
    let mut differing = 0.0;
    for name in DETERMINISM_PROBES {
        let spec = find(name).expect("registered");
        let a = serde_json::to_string(&run_check(spec, config).0).expect("serializable");
        let b = serde_json::to_string(&run_check(spec, config).0).expect("serializable");
        let same = a == b;
        out.value(format!("{name}_identical"), if same { 1.0 } else { 0.0 });
        if !same {
            differing += 1.0;
        }
    }
    out.assert("differing_records", differing, 0.0);
    Ok(out)
}

fn cutoff_admissibility(config: &ExperimentConfig) -> Result<CheckOutput> {
    let c = config.cutoff;
    let grid: Vec<f64> = (0..=3000).map(|i| i as f64 / 1000.0).collect();
    let mut violation = 0.0f64;
    for pair in grid.windows(2) {
        let (a, b) = (c.eval(pair[0]), c.eval(pair[1]));
        violation = violation.max(b - a);
    }
    for &t in &grid {
        let v = c.eval(t);
        if t <= 1.0 {
            violation = violation.max((v - 1.0).abs());
        } else if t >= 2.0 {
            violation = violation.max(v.abs());
        }
        violation = violation.max(-v).max(v - 1.0);
    }
    let mut out = CheckOutput::default();
    out.assert("violation", violation, 0.0);
    Ok(out)
}

fn sphere_average_identity(config: &ExperimentConfig) -> Result<CheckOutput> {
    let d = surface_dim(config);
    let w = surface_weight(config)?;
    let n = 6;
    let op = SurfaceOperator::with_default_rules(w, n, config.cutoff)?;
    let sphere = spherical_quadrature(d, 40)?;
    let area = sphere_area(d);
    let avg = |g: &dyn Fn(&[f64]) -> f64| sphere.integrate(|xi| g(xi)) / area;
    let interval = crate::interval::IntervalOperator::new(
        IntervalKernel::new(w.t_params(), n, config.cutoff),
        op.rules().t_rule.clone(),
    )?;
    let mut out = CheckOutput::default();
    let mut worst = 0.0f64;
    for f in config.suite() {
        let lf = op.apply(&f)?;
        let fbar: Vec<f64> = op.rules().t_rule.nodes.iter().map(|&s| avg(&|xi| f.value(&ambient(s, xi)))).collect();
        let want = interval.apply_values(&fbar)?;
        for s in [0.05, 0.3, 0.77, 0.98] {
            worst = worst.max((avg(&|xi| lf.eval(s, xi)) - want.eval(s)).abs());
        }
    }
    out.assert("residual", worst, 1e-8);
    Ok(out)
}

fn split_identity(config: &ExperimentConfig) -> Result<CheckOutput> {
    let d = surface_dim(config);
    let w = surface_weight(config)?;
    let n = 6;
    let op = SurfaceOperator::with_default_rules(w, n, config.cutoff)?;
    let ray = RayOperator::new(w, n, config.cutoff, op.rules())?;
    let mut rng = rng(config.seed, 16);
    let radial = |x: &[f64]| {
        let t = x[x.len() - 1];
        (1.0 - t).powf(1.5) + t
    };
    let (mut sum, mut radial_f2) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let p = random_surface_point(&mut rng, d);
        for f in config.suite() {
            let (a, b) = split_f1_f2(&op, &ray, &f, &p)?;
            let total = f.value(&p.ambient()) - nearbest_apply(&op, &f, &p)?;
            sum = sum.max((a + b - total).abs());
        }
        radial_f2 = radial_f2.max(split_f1_f2(&op, &ray, &radial, &p)?.1.abs());
    }
    let mut out = CheckOutput::default();
    out.assert("sum", sum, 1e-10);
    out.assert("radial_second_part", radial_f2, 1e-10);
    Ok(out)
}
