use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cutoff::CutoffSpec;
use crate::field::{Derivatives, SuiteFunction};
use crate::interval::cutoff_filter;
use crate::jacobi::jacobi_eval;
use crate::surface::{
    surface_euler_difference, surface_kfunctional, surface_modulus, KernelBackend, SurfaceCandidate, SurfaceOptions,
    SurfaceSampler,
};

fn random_cone_point(rng: &mut ChaCha8Rng, d: usize) -> ConePoint {
    let t: f64 = rng.gen_range(0.02..1.0);
    loop {
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if y.iter().map(|c| c * c).sum::<f64>() < 1.0 {
            return ConePoint::from_ball(&y, t).unwrap();
        }
    }
}

fn light_opts() -> SurfaceOptions {
    let mut o = SurfaceOptions::default().with_rho(1.0);
    o.interval.nodes = 64;
    o.interval.theta_steps = 6;
    o.sphere_degree = 16;
    o
}

fn smooth(x: &[f64]) -> f64 {
    (x[0] - 0.5 * x[x.len() - 1]).exp() * (1.0 + x[1] * x[1])
}

#[test]
fn lift_examples() {
    let p = ConePoint::new(vec![0.3, 0.0], 0.5).unwrap();
    let up = lift(&p, Sheet::Upper);
    let down = lift(&p, Sheet::Lower);
    assert!((up.coords()[2] - 0.4).abs() < 1e-15);
    assert!((down.coords()[2] + 0.4).abs() < 1e-15);
    assert_eq!(up.reflected(), down);

    let rim = ConePoint::new(vec![0.6, 0.8], 1.0).unwrap();
    assert_eq!(lift(&rim, Sheet::Upper).coords()[2], 0.0);
    assert_eq!(lift(&rim, Sheet::Upper).project(), rim);

    let apex = ConePoint::new(vec![0.0, 0.0], 0.0).unwrap();
    let a = lift(&apex, Sheet::Lower);
    assert!(a.coords().iter().all(|&c| c == 0.0));
    assert_eq!(a.surface_point().unwrap().t(), 0.0);

    assert!(ConePoint::new(vec![0.6, 0.0], 0.5).is_err());
    assert!(LiftedPoint::new(vec![0.3, 0.0, 0.5], 0.5).is_err());
    assert!(LiftedPoint::new(vec![0.3, 0.0, 0.4], 0.5).is_ok());
}

#[test]
fn even_extension_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lifted = Lifted(&smooth);
    for _ in 0..1000 {
        let p = random_cone_point(&mut rng, 2);
        let up = lift(&p, Sheet::Upper);
        let v = lifted.value(&up.ambient());
        assert_eq!(v, lifted.value(&up.reflected().ambient()));
        assert_eq!(v, smooth(&p.coords()));
        assert!((up.coords().iter().map(|c| c * c).sum::<f64>().sqrt() - p.t()).abs() < 1e-12);
    }
}

#[test]
fn lifted_derivatives_embed() {
    let x = [0.1, -0.2, 0.3, 0.6];
    let f = SuiteFunction::Smooth;
    let g = Lifted(&f).gradient(&x).unwrap();
    let h = Lifted(&f).hessian(&x).unwrap();
    let gd = crate::field::fd_gradient(&Lifted(&f), &x);
    let hd = crate::field::fd_hessian(&Lifted(&f), &x);
    assert_eq!(g[2], 0.0);
    for (a, b) in g.iter().zip(&gd) {
        assert!((a - b).abs() < 1e-8);
    }
    for (a, b) in h.iter().zip(&hd) {
        assert!((a - b).abs() < 1e-4);
    }
}

#[test]
fn dimension_counts() {
    assert_eq!(cone_polynomial_dim(2, 3), 20);
    assert_eq!(cone_space_dim(2, 3), 10);
    for d in 2..=3 {
        for n in 0..8 {
            let sum: usize = (0..=n).map(|k| cone_space_dim(d, k)).sum();
            assert_eq!(sum, cone_polynomial_dim(d, n));
            // one J function per (m, ball index of degree m)
            let j: usize = (0..=n).map(|m| crate::interval::binomial(m + d - 1, m).round() as usize).sum();
            assert_eq!(j, cone_space_dim(d, n));
        }
    }
}

#[test]
fn integral_examples() {
    for gamma in [0.0, 1.5] {
        let w = ConeWeight::new(2, gamma).unwrap();
        let rules = SurfaceRules::for_degree(w.surface(), 6).unwrap();
        assert!((cone_integrate(&|_: &[f64]| 1.0, &w, &rules).unwrap() - 1.0).abs() < 1e-14);
        assert!(cone_integrate(&|x: &[f64]| x[0] * x[2], &w, &rules).unwrap().abs() < 1e-15);
    }
    let w = ConeWeight::new(2, 0.0).unwrap();
    let rules = SurfaceRules::for_degree(w.surface(), 6).unwrap();
    let t = cone_integrate(&|x: &[f64]| x[2], &w, &rules).unwrap();
    // t against t dt on [0,1], normalized
    assert!((t - 2.0 / 3.0).abs() < 1e-14);
    assert!((t - crate::surface::surface_measure_integrate(&|x: &[f64]| x[3], &rules)).abs() < 1e-15);
    let wrong = SurfaceRules::for_degree(SurfaceWeight::new(3, 1.0).unwrap(), 4).unwrap();
    assert!(matches!(cone_integrate(&|_: &[f64]| 1.0, &w, &wrong), Err(Error::Configuration(_))));
}

#[test]
fn integral_lift_matches_direct_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in 2..=3 {
        for gamma in [0.0, 0.5] {
            let w = ConeWeight::new(d, gamma).unwrap();
            let coeffs: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = move |x: &[f64]| {
                let t = x[d];
                coeffs[0]
                    + coeffs[1] * x[0] * x[0] * t
                    + coeffs[2] * x[1].powi(4)
                    + coeffs[3] * t.powi(5)
                    + coeffs[4] * x[0] * x[1] * x[d - 1]
                    + coeffs[5] * (x[0] * x[0] + x[1] * x[1]) * (1.0 - t)
            };
            let lifted = cone_integrate(&f, &w, &SurfaceRules::for_degree(w.surface(), 6).unwrap()).unwrap();
            let direct = ConeRules::for_degree(w, 6).unwrap().integrate(&f);
            assert!((lifted - direct).abs() < 1e-12, "d={d} γ={gamma}: {lifted} vs {direct}");
        }
    }
}

#[test]
fn kernel_reflection_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w = ConeWeight::new(2, 1.0).unwrap();
    let ev = SurfaceKernelEvaluator::new(w.surface(), 5, CutoffSpec::default(), KernelBackend::BasisSum).unwrap();
    for _ in 0..50 {
        let (a, b) = (random_cone_point(&mut rng, 2), random_cone_point(&mut rng, 2));
        let k = cone_kernel_eval(&ev, &a, &b).unwrap();
        let x = lift(&a, Sheet::Upper).surface_point().unwrap();
        let y = lift(&b, Sheet::Upper);
        let sum = ev.eval(&x, &y.surface_point().unwrap()).unwrap()
            + ev.eval(&x, &y.reflected().surface_point().unwrap()).unwrap();
        assert!((k - sum).abs() < 1e-9);
        // the lower sheet for b gives the same pair of terms
        let xl = lift(&a, Sheet::Lower).surface_point().unwrap();
        let mirrored = ev.eval(&xl, &y.reflected().surface_point().unwrap()).unwrap()
            + ev.eval(&xl, &y.surface_point().unwrap()).unwrap();
        assert!((k - mirrored).abs() < 1e-9 * k.abs().max(1.0));
        assert!((k - cone_kernel_eval(&ev, &b, &a).unwrap()).abs() < 1e-9 * k.abs().max(1.0));
    }
    let ev0 = SurfaceKernelEvaluator::new(w.surface(), 0, CutoffSpec::default(), KernelBackend::BasisSum).unwrap();
    let (a, b) = (random_cone_point(&mut rng, 2), random_cone_point(&mut rng, 2));
    assert!((cone_kernel_eval(&ev0, &a, &b).unwrap() - 2.0).abs() < 1e-13);
    let bad = SurfaceKernelEvaluator::new(
        SurfaceWeight::new(2, 1.0).unwrap(),
        2,
        CutoffSpec::default(),
        KernelBackend::BasisSum,
    )
    .unwrap();
    assert!(matches!(cone_kernel_eval(&bad, &a, &b), Err(Error::Configuration(_))));
}

/// Orthonormal basis of `V_n(V³, W_γ)` from Jacobi polynomials in `t` and
/// Chebyshev-type ball polynomials in `x/t`, normalized on the direct cone rule.
struct JBasis {
    gamma: f64,
    /// `(n, m, j, k, cosine?)` with `k = m - 2j`, and the squared norm.
    terms: Vec<((usize, usize, usize, usize, bool), f64)>,
}

impl JBasis {
    fn new(gamma: f64, max_degree: usize) -> Self {
        let w = ConeWeight::new(2, gamma).unwrap();
        let rules = ConeRules::for_degree(w, 2 * max_degree).unwrap();
        let nodes = rules.nodes();
        let mut terms = Vec::new();
        for n in 0..=max_degree {
            for m in 0..=n {
                for j in 0..=m / 2 {
                    let k = m - 2 * j;
                    for cosine in [true, false] {
                        if k == 0 && !cosine {
                            continue;
                        }
                        let key = (n, m, j, k, cosine);
                        let mut basis = Self { gamma, terms: vec![] };
                        basis.terms.push((key, 1.0));
                        let norm: f64 =
                            nodes.iter().map(|(wt, t, y)| wt * basis.raw(key, *t, &[t * y[0], t * y[1]]).powi(2)).sum();
                        terms.push((key, norm));
                    }
                }
            }
        }
        Self { gamma, terms }
    }

    fn raw(&self, (n, m, j, k, cosine): (usize, usize, usize, usize, bool), t: f64, x: &[f64]) -> f64 {
        let radial = jacobi_eval(&JacobiParams::new(2.0 * m as f64 + 1.0, self.gamma).unwrap(), n - m, 1.0 - 2.0 * t);
        if t == 0.0 {
            return if m == 0 { radial } else { 0.0 };
        }
        // t^m P(x/t) = t^{2j} P_j^{(-1/2,k)}(2r²-1) · |x|^k trig(kφ), r = |x|/t
        let r2 = (x[0] * x[0] + x[1] * x[1]) / (t * t);
        let ball = jacobi_eval(&JacobiParams::new(-0.5, k as f64).unwrap(), j, 2.0 * r2 - 1.0);
        let (re, im) = (0..k).fold((1.0, 0.0), |(a, b), _| (a * x[0] - b * x[1], a * x[1] + b * x[0]));
        radial * t.powi(2 * j as i32) * ball * if cosine { re } else { im }
    }

    fn kernel(&self, n: usize, cutoff: CutoffSpec, a: &ConePoint, b: &ConePoint) -> f64 {
        let filter = cutoff_filter(cutoff, n);
        self.terms
            .iter()
            .filter(|((deg, ..), _)| *deg < filter.len())
            .map(|(key, norm)| filter[key.0] * self.raw(*key, a.t(), a.x()) * self.raw(*key, b.t(), b.x()) / norm)
            .sum()
    }
}

#[test]
fn j_basis_is_orthogonal() {
    let basis = JBasis::new(1.0, 4);
    let w = ConeWeight::new(2, 1.0).unwrap();
    let nodes = ConeRules::for_degree(w, 8).unwrap().nodes();
    for (a, (ka, na)) in basis.terms.iter().enumerate() {
        for (kb, nb) in &basis.terms[a + 1..] {
            let g: f64 = nodes
                .iter()
                .map(|(wt, t, y)| {
                    let x = [t * y[0], t * y[1]];
                    wt * basis.raw(*ka, *t, &x) * basis.raw(*kb, *t, &x)
                })
                .sum();
            assert!(g.abs() < 1e-11 * (na * nb).sqrt(), "{ka:?} {kb:?} {g}");
        }
    }
    assert_eq!(basis.terms.iter().filter(|((n, ..), _)| *n == 3).count(), cone_space_dim(2, 3));
}

#[test]
fn kernel_matches_j_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for gamma in [0.0, 1.0] {
        let basis = JBasis::new(gamma, 11);
        let w = ConeWeight::new(2, gamma).unwrap();
        for n in 1..=6 {
            for backend in [KernelBackend::BasisSum, KernelBackend::AdditionFormula] {
                let ev = SurfaceKernelEvaluator::new(w.surface(), n, CutoffSpec::default(), backend).unwrap();
                for _ in 0..4 {
                    let (a, b) = (random_cone_point(&mut rng, 2), random_cone_point(&mut rng, 2));
                    let lifted = 0.5 * cone_kernel_eval(&ev, &a, &b).unwrap();
                    let direct = basis.kernel(n, CutoffSpec::default(), &a, &b);
                    let scale = basis.kernel(n, CutoffSpec::default(), &a, &a).abs().max(1.0);
                    assert!(
                        (lifted - direct).abs() < 1e-7 * scale,
                        "γ={gamma} n={n} {backend:?}: {lifted} vs {direct}"
                    );
                }
            }
        }
    }
}

#[test]
fn nearbest_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let w = ConeWeight::new(2, 0.5).unwrap();
    let op = ConeOperator::with_default_rules(w, 3, CutoffSpec::default()).unwrap();
    let one = op.apply(&|_: &[f64]| 1.0).unwrap();
    let xt = op.apply(&|x: &[f64]| x[0] * x[2]).unwrap();
    for _ in 0..20 {
        let p = random_cone_point(&mut rng, 2);
        assert!((one.eval(&p).unwrap() - 1.0).abs() < 1e-12);
        assert!((xt.eval(&p).unwrap() - p.x()[0] * p.t()).abs() < 1e-8);
        assert!((cone_nearbest_apply(&op, &|x: &[f64]| x[0] * x[2], &p).unwrap() - p.x()[0] * p.t()).abs() < 1e-8);
        assert!((xt.value(&p.coords()) - p.x()[0] * p.t()).abs() < 1e-8);
    }
}

#[test]
fn polynomial_reproduction_on_cone() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let w = ConeWeight::new(2, 1.0).unwrap();
    for n in [2, 4] {
        let op = ConeOperator::with_default_rules(w, n, CutoffSpec::default()).unwrap();
        // random combination of monomials x1^a x2^b t^c with a + b + c ≤ n
        let mut terms = Vec::new();
        for a in 0..=n {
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    terms.push((a as i32, b as i32, c as i32, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let f = move |x: &[f64]| {
            terms.iter().map(|&(a, b, c, k)| k * x[0].powi(a) * x[1].powi(b) * x[2].powi(c)).sum::<f64>()
        };
        let g = op.apply(&f).unwrap();
        for _ in 0..20 {
            let p = random_cone_point(&mut rng, 2);
            assert!((g.eval(&p).unwrap() - f(&p.coords())).abs() < 1e-8);
        }
    }
}

#[test]
fn operator_lift_matches_direct_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let w = ConeWeight::new(2, 1.0).unwrap();
    let n = 3;
    let rules = Arc::new(SurfaceRules::new(w.surface(), 80, 48).unwrap());
    let op = ConeOperator::new(w, n, CutoffSpec::default(), rules).unwrap();
    let g = op.apply(&smooth).unwrap();
    let ev = SurfaceKernelEvaluator::new(w.surface(), n, CutoffSpec::default(), KernelBackend::BasisSum).unwrap();
    let direct_rules = ConeRules::new(w, 48, 28, 40).unwrap();
    for _ in 0..10 {
        let p = random_cone_point(&mut rng, 2);
        let lifted = g.eval(&p).unwrap();
        let direct = cone_nearbest_direct(&ev, &smooth, &p, &direct_rules).unwrap();
        assert!((lifted - direct).abs() < 1e-8 * lifted.abs().max(1.0), "{lifted} vs {direct}");
    }
}

#[test]
fn best_approx_examples() {
    let w = ConeWeight::new(2, 0.0).unwrap();
    let poly = |x: &[f64]| 1.0 + x[0] * x[1] - x[2] * x[2] * x[0];
    let e = cone_best_approx_l2_many(&poly, &w, &[1, 2, 3, 4]).unwrap();
    assert!(e[0].effective() > 1e-3 && e[1].effective() > 1e-3);
    assert_eq!(e[2].effective(), 0.0);
    assert_eq!(e[3].effective(), 0.0);
    let rough = SuiteFunction::Rough;
    let e = cone_best_approx_l2_many(&rough, &w, &[2, 4, 8, 16]).unwrap();
    for pair in e.windows(2) {
        assert!(pair[1].value <= pair[0].value);
    }
    let single = cone_best_approx(&rough, &w, 8, Exponent::TWO, CutoffSpec::default()).unwrap();
    assert!((single.value - e[2].value).abs() < 1e-3 * e[2].value, "{} {}", single.value, e[2].value);
}

#[test]
fn modulus_components() {
    let w = ConeWeight::new(2, 0.0).unwrap();
    let opts = SurfaceOptions::default().with_rho(1.0);
    let zero = cone_modulus(&|_: &[f64]| 3.0, &w, 1, 0.25, Exponent::TWO, &opts).unwrap();
    assert!(zero.total() < 1e-14 && zero.radial_cone_interval.unwrap() < 1e-14);
    assert!(cone_modulus(&|_: &[f64]| 3.0, &w, 1, 0.0, Exponent::TWO, &opts).is_err());
    assert!(matches!(cone_modulus(&|_: &[f64]| 3.0, &w, 1, 0.9, Exponent::TWO, &opts), Err(Error::DegenerateInput(_))));

    // component (a) through the lift: the surface modulus with planes i < j ≤ d
    let f = |x: &[f64]| x[0];
    let m = cone_modulus(&f, &w, 1, 0.3, Exponent::TWO, &opts).unwrap();
    let sampler = SurfaceSampler::new(&w.surface(), Exponent::TWO, None, &opts).unwrap();
    let plane = crate::sphere::RotationSpec::new(3, 1, 2, 0.0).unwrap();
    let lifted = Lifted(&f);
    let via_lift = opts
        .interval
        .theta_grid(0.3)
        .into_iter()
        .map(|theta| sampler.norm(Exponent::TWO, |t, xi| surface_euler_difference(&lifted, &plane, 1, theta, t, xi)))
        .fold(0.0, f64::max);
    assert!((m.inner - via_lift).abs() < 1e-10 * via_lift, "{} vs {via_lift}", m.inner);
    assert!(m.lateral > 0.0 && m.radial > 0.0);
}

#[test]
fn modulus_matches_lifted_surface_modulus() {
    let w = ConeWeight::new(2, 1.0).unwrap();
    let opts = light_opts();
    for f in SuiteFunction::ALL {
        for h in [0.25, 0.125] {
            let cone = cone_modulus(&f, &w, 1, h, Exponent::TWO, &opts).unwrap();
            let surface = surface_modulus(&Lifted(&f), &w.surface(), 1, h, Exponent::TWO, &opts).unwrap();
            let ratio = cone.total() / surface.total();
            assert!((1.0 - 1e-9..=2.0).contains(&ratio), "{f:?} h={h}: {ratio}");
        }
    }
}

#[test]
fn phi_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let samples: Vec<ConePoint> = (0..50).map(|_| random_cone_point(&mut rng, 2)).collect();
    let x1 = crate::field::AnalyticField {
        value: |x: &[f64]| x[0],
        gradient: |_: &[f64]| vec![1.0, 0.0, 0.0],
        hessian: |_: &[f64]| vec![0.0; 9],
    };
    let c = phi_derivative_identity_check(&x1, 1, 1, &samples, Derivatives::Exact).unwrap();
    assert!(c.max_deviation <= 1e-9 && c.evaluated == 50);
    for p in &samples {
        let v = phi_derivative(&x1, 1, 1, &p.coords(), Derivatives::Exact).unwrap();
        assert!((v - p.phi()).abs() < 1e-15);
    }
    let constant = |_: &[f64]| 2.0;
    let c = phi_derivative_identity_check(&constant, 2, 2, &samples, Derivatives::FiniteDifference).unwrap();
    assert!(c.max_deviation < 1e-6);
    for f in SuiteFunction::ALL {
        for i in 1..=2 {
            let exact = phi_derivative_identity_check(&f, i, 1, &samples, Derivatives::Exact).unwrap();
            assert!(exact.max_deviation < 1e-9, "{f:?} r=1 {}", exact.max_deviation);
            let exact = phi_derivative_identity_check(&f, i, 2, &samples, Derivatives::Exact).unwrap();
            assert!(exact.max_deviation < 1e-8, "{f:?} r=2 {}", exact.max_deviation);
        }
    }
    let fd = phi_derivative_identity_check(&smooth, 1, 2, &samples, Derivatives::FiniteDifference).unwrap();
    assert!(fd.max_deviation < 1e-4, "{}", fd.max_deviation);
    let rim = [ConePoint::new(vec![0.5, 0.0], 0.5).unwrap()];
    let c = phi_derivative_identity_check(&smooth, 1, 1, &rim, Derivatives::FiniteDifference).unwrap();
    assert_eq!((c.skipped, c.evaluated), (1, 0));
    assert!(phi_derivative(&smooth, 3, 1, &[0.1, 0.1, 0.5], Derivatives::FiniteDifference).is_err());
}

#[test]
fn kfunctional_examples() {
    let w = ConeWeight::new(2, 0.0).unwrap();
    let opts = SurfaceOptions::default();
    let zero = |_: &[f64]| 0.0;
    let g0 = ConeFieldCandidate::new(&zero, Derivatives::FiniteDifference);
    assert_eq!(cone_kfunctional(&zero, &w, 1, 0.1, Exponent::TWO, &[&g0], &opts).unwrap(), 0.0);
    assert!(cone_kfunctional(&zero, &w, 1, 0.1, Exponent::TWO, &[], &opts).is_err());

    let f = SuiteFunction::Smooth;
    let g = ConeFieldCandidate::new(&f, Derivatives::Exact);
    let sampler = SurfaceSampler::new(&w.surface(), Exponent::TWO, None, &opts).unwrap();
    let terms = cone_kterms(&f, &g, &w, 2, Exponent::TWO, &sampler).unwrap();
    assert!(terms.fit < 1e-14 && terms.radial > 0.0 && terms.angular > 0.0 && terms.phi > 0.0);

    // the Φ-derivative term agrees between a field and its expansion
    let op = ConeOperator::with_default_rules(w, 4, CutoffSpec::default()).unwrap();
    let poly = |x: &[f64]| x[0] * x[0] * x[2] + x[1];
    let e = op.apply(&poly).unwrap();
    let pc = ConeFieldCandidate::new(&poly, Derivatives::FiniteDifference);
    for r in 1..=2 {
        let a = cone_kterms(&poly, e.surface(), &w, r, Exponent::TWO, &sampler).unwrap();
        let b = cone_kterms(&poly, &pc, &w, r, Exponent::TWO, &sampler).unwrap();
        assert!((a.phi - b.phi).abs() < 1e-5 * a.phi, "r={r} {} {}", a.phi, b.phi);
        assert!((a.angular - b.angular).abs() < 1e-5 * a.angular.max(1e-3));
    }
}

#[test]
fn kfunctional_matches_lifted_surface() {
    let w = ConeWeight::new(2, 1.0).unwrap();
    let opts = light_opts();
    for f in SuiteFunction::ALL {
        let cands = default_cone_candidates(&f, &w, 2, CutoffSpec::default()).unwrap();
        let cone: Vec<&dyn ConeCandidate> = cands.iter().map(|g| g as &dyn ConeCandidate).collect();
        let surf: Vec<&dyn SurfaceCandidate> = cands.iter().map(|g| g as &dyn SurfaceCandidate).collect();
        for r in 1..=2 {
            let k = cone_kfunctional(&f, &w, r, 0.125, Exponent::TWO, &cone, &opts).unwrap();
            let s = surface_kfunctional(&Lifted(&f), &w.surface(), r, 0.125, Exponent::TWO, &surf, &opts).unwrap();
            let ratio = k / s;
            assert!((0.5..=3.0).contains(&ratio), "{f:?} r={r}: {ratio}");
        }
    }
}

#[test]
fn rotation_derivative_matches_angular_derivative() {
    let x = [0.3, -0.2, 0.4, 0.6];
    for f in SuiteFunction::ALL {
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            for r in 1..=2 {
                let a = crate::sphere::angular_derivative(&f, i, j, r, &x, Derivatives::Exact).unwrap();
                let b = rotation_derivative(&f, i, j, r, &x).unwrap();
                assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{f:?} ({i},{j}) r={r}: {a} vs {b}");
            }
        }
    }
    assert!(rotation_derivative(&SuiteFunction::Smooth, 1, 2, 3, &x).is_err());
}
