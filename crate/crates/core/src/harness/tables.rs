//! Table-producing runs over the configured domain.

use std::collections::BTreeMap;

use crate::cone::{
    cone_best_approx, cone_best_approx_l2_many, cone_kfunctional, cone_modulus, cone_norm_rules,
    default_cone_candidates, ConeCandidate, ConeFieldCandidate, ConeOperator, ConeWeight,
};
use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::field::{Derivatives, Field, SuiteFunction};
use crate::interval::{
    default_candidates, dt_kfunctional, dt_modulus, IntervalExpansion, IntervalOperator, ModulusOptions, Sampler,
};
use crate::jacobi::{gauss_jacobi_unit, JacobiParams, OrthonormalLadder};
use crate::norm::Exponent;
use crate::surface::{
    ambient, kernel_profile, surface_kfunctional, surface_modulus, BestApprox, FieldCandidate, KernelBackend,
    SurfaceCandidate, SurfaceKernelEvaluator, SurfaceOperator, SurfaceOptions, SurfacePoint, SurfaceSampler,
    SurfaceWeight, TAIL_FLOOR,
};

use super::checks::{growth, inverse_sum, modulus_options, surface_best_approx};
use super::config::{Domain, ExperimentConfig};
use super::report::{Assertion, CheckRecord, Table, Value};

/// The configured domain with its weight.
enum Problem {
    /// Suite functions read along `ξ = e_1`.
    Interval(JacobiParams),
    Surface(SurfaceWeight),
    Cone(ConeWeight),
}

fn along_ray(f: SuiteFunction) -> impl Fn(f64) -> f64 + Sync {
    move |t| f.value(&[t, t])
}

fn interval_options() -> ModulusOptions {
    modulus_options().interval
}

impl Problem {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        Ok(match config.domain {
            Domain::Interval => Problem::Interval(JacobiParams::new(0.0, config.gamma)?),
            Domain::Surface => Problem::Surface(SurfaceWeight::new(config.d, config.gamma)?),
            Domain::Cone => Problem::Cone(ConeWeight::new(config.d, config.gamma)?),
        })
    }

    fn best_approx(&self, f: SuiteFunction, ns: &[usize], p: Exponent, cutoff: CutoffSpec) -> Result<Vec<BestApprox>> {
        match self {
            Problem::Interval(params) => interval_best_approx(&along_ray(f), params, ns, p, cutoff),
            Problem::Surface(w) => surface_best_approx(&f, *w, ns, p, cutoff),
            Problem::Cone(w) if p == Exponent::TWO => cone_best_approx_l2_many(&f, w, ns),
            Problem::Cone(w) => ns.iter().map(|&n| cone_best_approx(&f, w, n, p, cutoff)).collect(),
        }
    }

    /// `ω_r(f; h)`, or NaN when the main part of the radial interval is empty.
    fn modulus(&self, f: SuiteFunction, r: usize, h: f64, p: Exponent) -> Result<f64> {
        let opts = modulus_options();
        let value = match self {
            Problem::Interval(params) => dt_modulus(&along_ray(f), r, h, p, Some(params), true, &opts.interval),
            Problem::Surface(w) => surface_modulus(&f, w, r, h, p, &opts).map(|m| m.total()),
            Problem::Cone(w) => cone_modulus(&f, w, r, h, p, &opts).map(|m| m.total()),
        };
        match value {
            Err(Error::DegenerateInput(_)) => Ok(f64::NAN),
            v => v,
        }
    }

    /// `K_r(f, h)` for each `h`, against `L_{2^j} f` (`2^j ≤ nmax`) and `f` itself.
    fn kfunctional(
        &self,
        f: SuiteFunction,
        r: usize,
        hs: &[f64],
        p: Exponent,
        nmax: usize,
        cutoff: CutoffSpec,
    ) -> Result<Vec<f64>> {
        let jmax = usize::BITS - 1 - nmax.max(1).leading_zeros();
        let opts = modulus_options();
        match self {
            Problem::Interval(params) => {
                let g = along_ray(f);
                let cands = default_candidates(&g, params, r, jmax, cutoff)?;
                hs.iter().map(|&h| dt_kfunctional(&g, r, h, p, params, &cands, &opts.interval)).collect()
            }
            Problem::Surface(w) => {
                let cands = crate::surface::default_surface_candidates(&f, *w, jmax, cutoff)?;
                let own = FieldCandidate { field: &f, mode: Derivatives::Exact };
                let mut refs: Vec<&dyn SurfaceCandidate> = cands.iter().map(|c| c as &dyn SurfaceCandidate).collect();
                refs.push(&own);
                hs.iter().map(|&h| surface_kfunctional(&f, w, r, h, p, &refs, &opts)).collect()
            }
            Problem::Cone(w) => {
                let cands = default_cone_candidates(&f, w, jmax, cutoff)?;
                let own = ConeFieldCandidate::new(&f, Derivatives::Exact);
                let mut refs: Vec<&dyn ConeCandidate> = cands.iter().map(|c| c as &dyn ConeCandidate).collect();
                refs.push(&own);
                hs.iter().map(|&h| cone_kfunctional(&f, w, r, h, p, &refs, &opts)).collect()
            }
        }
    }

    /// `‖f - L_n f‖_p`.
    fn operator_error(&self, f: SuiteFunction, n: usize, p: Exponent, cutoff: CutoffSpec) -> Result<f64> {
        match self {
            Problem::Interval(params) => {
                let g = along_ray(f);
                let lf = IntervalOperator::with_nodes(*params, n, cutoff, 4 * n + 64)?.apply(&g)?;
                let mut opts = interval_options();
                opts.nodes = opts.nodes.max(8 * n + 64);
                Ok(Sampler::new(Some(params), None, p, &opts)?.norm(p, |t| g(t) - lf.eval(t)))
            }
            Problem::Surface(w) => {
                let lf = SurfaceOperator::with_default_rules(*w, n, cutoff)?.apply(&f)?;
                let sampler = SurfaceSampler::new(w, p, None, &SurfaceOptions::for_degree(2 * n))?;
                Ok(sampler.norm(p, |t, xi| f.value(&ambient(t, xi)) - lf.eval(t, xi)))
            }
            Problem::Cone(w) => {
                let lf = ConeOperator::with_default_rules(*w, n, cutoff)?.apply(&f)?;
                let rules = cone_norm_rules(w, &SurfaceOptions::for_degree(2 * n))?;
                Ok(rules.norm(p, |t, y| {
                    let x = ambient(t, y);
                    f.value(&x) - lf.value(&x)
                }))
            }
        }
    }
}

/// `E_n(g)` on `[0,1]`: `L²` tails of one orthonormal projection, otherwise
/// `‖g - L_{⌊n/2⌋} g‖_p`.
fn interval_best_approx(
    g: &(dyn Fn(f64) -> f64 + Sync),
    params: &JacobiParams,
    ns: &[usize],
    p: Exponent,
    cutoff: CutoffSpec,
) -> Result<Vec<BestApprox>> {
    if p != Exponent::TWO {
        let opts = interval_options();
        let sampler = Sampler::new(Some(params), None, p, &opts)?;
        let scale = sampler.norm(p, g);
        return ns
            .iter()
            .map(|&n| {
                let lf = IntervalOperator::with_nodes(*params, n / 2, cutoff, 4 * n + 64)?.apply(g)?;
                let value = sampler.norm(p, |t| g(t) - lf.eval(t));
                Ok(BestApprox { n, value, floor: TAIL_FLOOR * scale, p, surrogate: true })
            })
            .collect();
    }
    let k = (2 * ns.iter().copied().max().unwrap_or(0)).max(8);
    let rule = gauss_jacobi_unit(params, 4 * k + 64)?.normalized();
    let values: Vec<f64> = rule.nodes.iter().map(|&t| g(t)).collect();
    let e = IntervalExpansion::project(&values, &rule, &OrthonormalLadder::new(*params, k), k)?;
    let total: f64 = rule.weights.iter().zip(&values).map(|(w, v)| w * v * v).sum();
    let beyond: f64 =
        rule.weights.iter().zip(&rule.nodes).zip(&values).map(|((w, &t), v)| w * (v - e.eval(t)).powi(2)).sum();
    let floor = TAIL_FLOOR * total.sqrt();
    Ok(ns
        .iter()
        .map(|&n| {
            let tail: f64 = e.coefficients().iter().skip(n + 1).map(|c| c * c).sum();
            BestApprox { n, value: (beyond + tail).max(0.0).sqrt(), floor, p, surrogate: false }
        })
        .collect())
}

/// Tables and summary records of one run.
pub struct TableRun {
    pub tables: Vec<Table>,
    pub records: Vec<CheckRecord>,
}

fn record(
    name: &str,
    anchor: &str,
    config: &ExperimentConfig,
    values: BTreeMap<String, Value>,
    fitted: BTreeMap<String, f64>,
    assertions: Vec<(String, f64, f64)>,
) -> CheckRecord {
    let assertions: Vec<Assertion> = assertions
        .into_iter()
        .map(|(label, measure, default)| {
            let tol = config.tolerance(name, &label, default);
            Assertion::new(label, measure, tol)
        })
        .collect();
    CheckRecord {
        name: name.into(),
        anchor: anchor.into(),
        values,
        fitted_constants: fitted,
        pass: assertions.iter().all(|a| a.pass),
        assertions,
        error: None,
    }
}

fn degrees_value(config: &ExperimentConfig) -> Value {
    config.degrees.iter().map(|&n| n as f64).collect::<Vec<_>>().into()
}

/// `E_n`, `ω_1(1/n)`, `ω_2(1/n)` with direct and inverse ratios.
pub fn run_convergence(config: &ExperimentConfig) -> Result<TableRun> {
    let problem = Problem::new(config)?;
    let nmax = *config.degrees.last().expect("validated");
    let ks: Vec<usize> = (0..=nmax).collect();
    let mut table = Table::new(
        "convergence",
        &[
            "function",
            "n",
            "best_approx",
            "resolved",
            "omega_1",
            "omega_2",
            "direct_ratio",
            "inverse_sum_1",
            "inverse_sum_2",
            "inverse_ratio_1",
            "inverse_ratio_2",
        ],
    );
    let mut values = BTreeMap::new();
    let mut fitted = BTreeMap::new();
    let (mut direct, mut inv1, mut inv2) = (0.0f64, 0.0f64, 0.0f64);
    for f in config.suite() {
        let e = problem.best_approx(f, &ks, config.p, config.cutoff)?;
        let ev: Vec<f64> = e.iter().map(|b| b.value).collect();
        let (mut q, mut c1, mut c2) = (Vec::new(), Vec::new(), Vec::new());
        for &n in &config.degrees {
            let h = 1.0 / n as f64;
            let (w1, w2) = (problem.modulus(f, 1, h, config.p)?, problem.modulus(f, 2, h, config.p)?);
            let (s1, s2) = (inverse_sum(&ev, 1, n), inverse_sum(&ev, 2, n));
            let ratio = e[n].value / w1;
            if e[n].resolved() {
                q.push(ratio);
            }
            c1.push(w1 / s1);
            c2.push(w2 / s2);
            table.push(vec![
                f.name().into(),
                n.into(),
                e[n].value.into(),
                e[n].resolved().into(),
                w1.into(),
                w2.into(),
                ratio.into(),
                s1.into(),
                s2.into(),
                (w1 / s1).into(),
                (w2 / s2).into(),
            ]);
        }
        direct = direct.max(growth(&q));
        inv1 = inv1.max(growth(&c1));
        inv2 = inv2.max(growth(&c2));
        fitted.insert(format!("direct_{}", f.name()), q.iter().copied().fold(0.0, f64::max));
        fitted.insert(format!("inverse_r1_{}", f.name()), c1.iter().copied().fold(0.0, f64::max));
        fitted.insert(format!("inverse_r2_{}", f.name()), c2.iter().copied().fold(0.0, f64::max));
    }
    values.insert("degrees".into(), degrees_value(config));
    let rec = record(
        "convergence",
        "direct and inverse estimates between best approximation and the modulus",
        config,
        values,
        fitted,
        vec![
            ("direct_growth".into(), direct, 1.25),
            ("r1_growth".into(), inv1, 1.25),
            ("r2_growth".into(), inv2, 1.25),
        ],
    );
    Ok(TableRun { tables: vec![table], records: vec![rec] })
}

/// `ω_r(f; 1/n)` for `r = 1, 2`.
pub fn run_modulus(config: &ExperimentConfig) -> Result<TableRun> {
    let problem = Problem::new(config)?;
    let mut table = Table::new("modulus", &["function", "r", "h", "omega"]);
    let mut worst = 0.0f64;
    for f in config.suite() {
        for r in 1..=2 {
            let om = config
                .degrees
                .iter()
                .map(|&n| problem.modulus(f, r, 1.0 / n as f64, config.p))
                .collect::<Result<Vec<f64>>>()?;
            for (&n, &w) in config.degrees.iter().zip(&om) {
                table.push(vec![f.name().into(), r.into(), (1.0 / n as f64).into(), w.into()]);
            }
            worst = worst.max(growth(&om));
        }
    }
    let mut values = BTreeMap::new();
    values.insert("degrees".into(), degrees_value(config));
    let rec = record(
        "modulus",
        "the modulus is non-decreasing in the increment",
        config,
        values,
        BTreeMap::new(),
        vec![("monotone".into(), worst, 1.0)],
    );
    Ok(TableRun { tables: vec![table], records: vec![rec] })
}

/// `ω_r(f; 1/n)` against the candidate-minimum `K_r(f, 1/n)`.
pub fn run_kfunc(config: &ExperimentConfig) -> Result<TableRun> {
    let problem = Problem::new(config)?;
    let nmax = *config.degrees.last().expect("validated");
    let hs: Vec<f64> = config.degrees.iter().map(|&n| 1.0 / n as f64).collect();
    let mut table = Table::new("kfunc", &["function", "r", "h", "omega", "kfunctional", "ratio"]);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for f in config.suite() {
        for r in 1..=2 {
            let k = problem.kfunctional(f, r, &hs, config.p, nmax, config.cutoff)?;
            for (&h, &kv) in hs.iter().zip(&k) {
                let om = problem.modulus(f, r, h, config.p)?;
                let ratio = om / kv;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                table.push(vec![f.name().into(), r.into(), h.into(), om.into(), kv.into(), ratio.into()]);
            }
        }
    }
    let mut fitted = BTreeMap::new();
    fitted.insert("omega_over_k_max".into(), hi);
    fitted.insert("k_over_omega_max".into(), 1.0 / lo);
    let rec = record(
        "kfunc",
        "equivalence of the modulus and the K-functional",
        config,
        BTreeMap::new(),
        fitted,
        vec![("band".into(), hi.max(1.0 / lo), 50.0)],
    );
    Ok(TableRun { tables: vec![table], records: vec![rec] })
}

/// `‖f - L_n f‖_p` against `E_n(f)_p`.
pub fn run_approx(config: &ExperimentConfig) -> Result<TableRun> {
    let problem = Problem::new(config)?;
    let mut table = Table::new("approx", &["function", "n", "operator_error", "best_approx", "resolved", "ratio"]);
    let mut fitted = BTreeMap::new();
    let mut worst = 0.0f64;
    for f in config.suite() {
        let e = problem.best_approx(f, &config.degrees, config.p, config.cutoff)?;
        let mut q = Vec::new();
        for (b, &n) in e.iter().zip(&config.degrees) {
            let err = problem.operator_error(f, n, config.p, config.cutoff)?;
            let ratio = err / b.value;
            if b.resolved() {
                q.push(ratio);
            }
            table.push(vec![f.name().into(), n.into(), err.into(), b.value.into(), b.resolved().into(), ratio.into()]);
        }
        fitted.insert(format!("near_best_{}", f.name()), q.iter().copied().fold(0.0, f64::max));
        worst = worst.max(q.iter().copied().fold(0.0, f64::max));
    }
    let rec = record(
        "approx",
        "the near-best operator approximates within a constant of the best approximation",
        config,
        BTreeMap::new(),
        fitted,
        vec![("near_best".into(), worst, 50.0)],
    );
    Ok(TableRun { tables: vec![table], records: vec![rec] })
}

/// The `n·dist` window of the decay fit.
pub const PROFILE_WINDOW: (f64, f64) = (2.0, 20.0);

/// Slope of `ln env` against `ln(1 + n·dist)` over the window, where `env`
/// is the non-increasing upper envelope of the profile.
pub fn envelope_slope(scaled: &[(f64, f64)]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = scaled.iter().copied().filter(|(_, v)| *v > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut env = 0.0f64;
    let mut fit = Vec::new();
    for &(x, v) in pts.iter().rev() {
        env = env.max(v);
        if (PROFILE_WINDOW.0..=PROFILE_WINDOW.1).contains(&x) {
            fit.push(((1.0 + x).ln(), env.ln()));
        }
    }
    if fit.len() < 3 {
        return None;
    }
    let m = fit.len() as f64;
    let (sx, sy) = fit.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = fit.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = fit.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

const PROFILE_POINTS: usize = 200;

/// Decay of the surface kernel from `(e_1, 1/2)` along a rotation sweep,
/// for the configured cut-off and the other one.
pub fn run_kernel_profile(config: &ExperimentConfig) -> Result<TableRun> {
    if config.domain != Domain::Surface {
        return Err(Error::Usage("kernel-profile runs on the surface domain".into()));
    }
    let d = config.d;
    let w = SurfaceWeight::new(d, config.gamma)?;
    let mut unit = vec![0.0; d];
    unit[0] = 1.0;
    let anchor = SurfacePoint::from_coords(unit, 0.5)?;
    let other = match config.cutoff {
        CutoffSpec::ExponentialBump => CutoffSpec::RaisedCosine,
        CutoffSpec::RaisedCosine => CutoffSpec::ExponentialBump,
    };
    let mut profile = Table::new("kernel_profile", &["cutoff", "n", "distance", "scaled_distance", "normalized"]);
    let mut summary = Table::new("kernel_profile_summary", &["cutoff", "n", "slope", "max_normalized"]);
    let mut fitted = BTreeMap::new();
    let mut symmetry = 0.0f64;
    let nmax = *config.degrees.last().expect("validated");
    let mut slopes = Vec::new();
    for cutoff in [config.cutoff, other] {
        for &n in &config.degrees {
            let ev = SurfaceKernelEvaluator::new(w, n, cutoff, KernelBackend::AdditionFormula)?;
            let hi = (120.0 / n as f64).min(std::f64::consts::PI).ln();
            let lo = (0.05 / n as f64).ln();
            let sweep = (0..PROFILE_POINTS)
                .map(|k| {
                    let a = (lo + (hi - lo) * k as f64 / (PROFILE_POINTS - 1) as f64).exp();
                    let mut xi = vec![0.0; d];
                    xi[0] = a.cos();
                    xi[1] = a.sin();
                    SurfacePoint::from_coords(xi, 0.5)
                })
                .collect::<Result<Vec<_>>>()?;
            let samples = kernel_profile(&ev, &anchor, &sweep)?;
            for b in sweep.iter().step_by(10) {
                let (x, y) = (ev.eval(&anchor, b)?, ev.eval(b, &anchor)?);
                symmetry = symmetry.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
            }
            let scaled: Vec<(f64, f64)> = samples.iter().map(|s| (n as f64 * s.distance, s.normalized)).collect();
            for (s, &(x, _)) in samples.iter().zip(&scaled) {
                profile.push(vec![cutoff.name().into(), n.into(), s.distance.into(), x.into(), s.normalized.into()]);
            }
            let slope = envelope_slope(&scaled).unwrap_or(f64::NAN);
            let max = samples.iter().map(|s| s.normalized).fold(0.0, f64::max);
            summary.push(vec![cutoff.name().into(), n.into(), slope.into(), max.into()]);
            fitted.insert(format!("slope_{}_n{n}", cutoff.name()), slope);
            if n == nmax {
                slopes.push((cutoff, slope));
            }
        }
    }
    let slope_of = |c: CutoffSpec| slopes.iter().find(|(k, _)| *k == c).map_or(f64::NAN, |(_, s)| *s);
    let (bump, cosine) = (slope_of(CutoffSpec::ExponentialBump), slope_of(CutoffSpec::RaisedCosine));
    let mut values = BTreeMap::new();
    values.insert("window".into(), Value::Series(vec![PROFILE_WINDOW.0, PROFILE_WINDOW.1]));
    let rec = record(
        "kernel_profile",
        "pointwise localization estimate for the kernel on the conic surface",
        config,
        values,
        fitted,
        vec![
            ("symmetry".into(), symmetry, 1e-10),
            ("exponential_bump_slope".into(), bump, -3.0),
            ("raised_cosine_shallower".into(), bump - cosine, 0.0),
        ],
    );
    Ok(TableRun { tables: vec![profile, summary], records: vec![rec] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|k| 0.1 * k as f64)
            .map(|x| (x, (1.0 + x).powf(-4.0) * (1.0 + (3.0 * x).cos().abs())))
            .collect();
        let s = envelope_slope(&pts).unwrap();
        assert!((s + 4.0).abs() < 0.3, "{s}");
        assert!(envelope_slope(&pts[..5]).is_none());
    }

    #[test]
    fn interval_tails_vanish_for_polynomials() {
        let params = JacobiParams::new(0.0, 1.0).unwrap();
        let g = |t: f64| 1.0 + t - 3.0 * t * t * t;
        let e = interval_best_approx(&g, &params, &[1, 2, 3, 5], Exponent::TWO, CutoffSpec::default()).unwrap();
        assert!(e[0].value > 0.1 && e[1].value > 0.01);
        assert!(!e[2].resolved() && !e[3].resolved());
    }
}
