use serde::{Deserialize, Serialize};

use super::{g_kappa, surface_distance, SurfaceBasis, SurfacePoint, SurfaceWeight};
use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::interval::{cutoff_filter, IntervalKernel};
use crate::jacobi::{gauss_jacobi_rule, JacobiParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelBackend {
    #[default]
    BasisSum,
    AdditionFormula,
}

#[derive(Debug, Clone)]
struct AdditionRules {
    v1: Vec<(f64, f64)>,
    v2: Vec<(f64, f64)>,
    zonal: IntervalKernel,
}

impl AdditionRules {
    fn new(weight: &SurfaceWeight, n: usize, cutoff: CutoffSpec) -> Result<Self> {
        let (d, gamma) = (weight.d() as f64, weight.gamma());
        let q = 2 * n + 1;
        let rule = |a: f64| -> Result<Vec<(f64, f64)>> {
            let r = gauss_jacobi_rule(&JacobiParams::new(a, a)?, q)?.normalized();
            Ok(r.nodes.into_iter().zip(r.weights).collect())
        };
        // For d = 2 the v₁ measure degenerates to the endpoint average.
        let v1 = if weight.d() == 2 { vec![(-1.0, 0.5), (1.0, 0.5)] } else { rule((d - 4.0) / 2.0)? };
        let v2 = if gamma == -0.5 { vec![(-1.0, 0.5), (1.0, 0.5)] } else { rule(gamma - 0.5)? };
        let zonal = IntervalKernel::new(JacobiParams::new(gamma + d - 1.5, -0.5)?, n, cutoff);
        Ok(Self { v1, v2, zonal })
    }

    fn eval(&self, a: &SurfacePoint, b: &SurfacePoint) -> f64 {
        let (t, s) = (a.t(), b.t());
        let u = ((t * s * a.xi().dot(b.xi()) + t * s) / 2.0).max(0.0).sqrt();
        let v = ((1.0 - t) * (1.0 - s)).max(0.0).sqrt();
        let mut acc = 0.0;
        for &(v1, w1) in &self.v1 {
            for &(v2, w2) in &self.v2 {
                let zeta = v1 * u + v2 * v;
                acc += w1 * w2 * self.zonal.eval(2.0 * zeta * zeta - 1.0, 1.0);
            }
        }
        acc
    }
}

/// Evaluator for the localized kernel `L_n((x,t),(y,s)) = Σ_k â(k/n) P_k`.
#[derive(Debug, Clone)]
pub struct SurfaceKernelEvaluator {
    weight: SurfaceWeight,
    n: usize,
    cutoff: CutoffSpec,
    backend: KernelBackend,
    filter: Vec<f64>,
    basis: Option<SurfaceBasis>,
    addition: Option<AdditionRules>,
}

impl SurfaceKernelEvaluator {
    pub fn new(weight: SurfaceWeight, n: usize, cutoff: CutoffSpec, backend: KernelBackend) -> Result<Self> {
        let filter = cutoff_filter(cutoff, n);
        let (basis, addition) = match backend {
            KernelBackend::BasisSum => (Some(SurfaceBasis::new(weight, filter.len() - 1)?), None),
            KernelBackend::AdditionFormula => (None, Some(AdditionRules::new(&weight, n, cutoff)?)),
        };
        Ok(Self { weight, n, cutoff, backend, filter, basis, addition })
    }

    pub fn weight(&self) -> &SurfaceWeight {
        &self.weight
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> CutoffSpec {
        self.cutoff
    }

    pub fn backend(&self) -> KernelBackend {
        self.backend
    }

    pub fn eval(&self, a: &SurfacePoint, b: &SurfacePoint) -> Result<f64> {
        if a.d() != self.weight.d() || b.d() != self.weight.d() {
            return Err(Error::Dimension(a.d().max(b.d())));
        }
        Ok(match (&self.basis, &self.addition) {
            (Some(basis), _) => self.eval_basis(basis, a, b),
            (None, Some(add)) => add.eval(a, b),
            _ => unreachable!("one backend is always built"),
        })
    }

    fn eval_basis(&self, basis: &SurfaceBasis, a: &SurfacePoint, b: &SurfacePoint) -> f64 {
        let (ra, rb) = (basis.radial_table(a.t()), basis.radial_table(b.t()));
        let (ya, yb) = (basis.harmonics().values(a.xi().coords()), basis.harmonics().values(b.xi().coords()));
        let mut acc = 0.0;
        for m in 0..=basis.max_degree() {
            let zonal: f64 = ya[m].iter().zip(&yb[m]).map(|(u, v)| u * v).sum();
            let radial: f64 = ra[m].iter().zip(&rb[m]).enumerate().map(|(j, (u, v))| self.filter[m + j] * u * v).sum();
            acc += zonal * radial;
        }
        acc
    }
}

/// `max |L_n(a,b)| √(𝗐(n;t) 𝗐(n;s)) / G^κ_{n,d}(𝖽(a,b))` over the given pairs.
pub fn normalized_kernel_max(
    ev: &SurfaceKernelEvaluator,
    kappa: f64,
    pairs: &[(SurfacePoint, SurfacePoint)],
) -> Result<f64> {
    let w = ev.weight();
    let n = ev.degree().max(1);
    let mut best = 0.0f64;
    for (a, b) in pairs {
        let k = ev.eval(a, b)?.abs();
        let scale = (w.regularized(n, a.t()) * w.regularized(n, b.t())).sqrt();
        best = best.max(k * scale / g_kappa(n, w.d(), kappa, surface_distance(a, b)));
    }
    Ok(best)
}

/// One point of a kernel decay profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub distance: f64,
    /// `|L_n| √(𝗐𝗐) / n^d`
    pub normalized: f64,
}

/// Kernel values from `anchor` to points along a sweep, normalized by the
/// diagonal scale `n^d / √(𝗐𝗐)`.
pub fn kernel_profile(
    ev: &SurfaceKernelEvaluator,
    anchor: &SurfacePoint,
    others: &[SurfacePoint],
) -> Result<Vec<ProfileSample>> {
    let w = ev.weight();
    let n = ev.degree().max(1);
    others
        .iter()
        .map(|b| {
            let k = ev.eval(anchor, b)?.abs();
            let scale = (w.regularized(n, anchor.t()) * w.regularized(n, b.t())).sqrt();
            Ok(ProfileSample {
                distance: surface_distance(anchor, b),
                normalized: k * scale / (n as f64).powi(w.d() as i32),
            })
        })
        .collect()
}
