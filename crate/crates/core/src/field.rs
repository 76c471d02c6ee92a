//! Scalar fields on ambient coordinates and the named test-function suite.
//!
//! Surface and cone fields take coordinates `(x_1, ..., x_d, t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A deterministic real function of ambient coordinates, optionally with
/// analytic first and second partial derivatives.
pub trait Field: Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Row-major Hessian.
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Field for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// A value closure bundled with analytic derivatives.
pub struct AnalyticField<V, G, H> {
    pub value: V,
    pub gradient: G,
    pub hessian: H,
}

impl<V, G, H> Field for AnalyticField<V, G, H>
where
    V: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
    H: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some((self.gradient)(x))
    }
    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some((self.hessian)(x))
    }
}

/// Where derivatives of a field come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Derivatives {
    /// Analytic derivatives, or a capability error when the field has none.
    Exact,
    /// Central differences with step [`FD_STEP`].
    FiniteDifference,
    /// Analytic when available, otherwise finite differences.
    #[default]
    Auto,
}

pub const FD_STEP: f64 = 1e-5;

pub fn fd_gradient(f: &dyn Field, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + FD_STEP;
            let a = f.value(&y);
            y[k] = x[k] - FD_STEP;
            let b = f.value(&y);
            y[k] = x[k];
            (a - b) / (2.0 * FD_STEP)
        })
        .collect()
}

pub fn fd_hessian(f: &dyn Field, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h = FD_STEP;
    let mut out = vec![0.0; n * n];
    let mut y = x.to_vec();
    let f0 = f.value(x);
    for a in 0..n {
        for b in a..n {
            let v = if a == b {
                y[a] = x[a] + h;
                let p = f.value(&y);
                y[a] = x[a] - h;
                let m = f.value(&y);
                y[a] = x[a];
                (p - 2.0 * f0 + m) / (h * h)
            } else {
                let mut eval = |da: f64, db: f64| {
                    y[a] = x[a] + da;
                    y[b] = x[b] + db;
                    let v = f.value(&y);
                    y[a] = x[a];
                    y[b] = x[b];
                    v
                };
                (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h)
            };
            out[a * n + b] = v;
            out[b * n + a] = v;
        }
    }
    out
}

pub fn gradient_of(f: &dyn Field, x: &[f64], mode: Derivatives) -> Result<Vec<f64>> {
    match mode {
        Derivatives::Exact => f.gradient(x).ok_or_else(|| Error::Capability("field has no analytic gradient".into())),
        Derivatives::FiniteDifference => Ok(fd_gradient(f, x)),
        Derivatives::Auto => Ok(f.gradient(x).unwrap_or_else(|| fd_gradient(f, x))),
    }
}

pub fn hessian_of(f: &dyn Field, x: &[f64], mode: Derivatives) -> Result<Vec<f64>> {
    match mode {
        Derivatives::Exact => f.hessian(x).ok_or_else(|| Error::Capability("field has no analytic Hessian".into())),
        Derivatives::FiniteDifference => Ok(fd_hessian(f, x)),
        Derivatives::Auto => Ok(f.hessian(x).unwrap_or_else(|| fd_hessian(f, x))),
    }
}

/// The fixed test functions, in coordinates `(x_1, ..., x_d, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteFunction {
    /// `(1 + x_1 + x_1²) e^{-t}`
    Smooth,
    /// `x_1 / √t`, i.e. `√t ξ_1` on the surface
    Apex,
    /// `(1 - t)^{3/2} (1 + x_1)`
    Edge,
    /// `|t - 1/2|^{3/2} (1 + x_1)`
    Rough,
}

impl SuiteFunction {
    pub const ALL: [SuiteFunction; 4] = [Self::Smooth, Self::Apex, Self::Edge, Self::Rough];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Smooth => "smooth",
            Self::Apex => "apex",
            Self::Edge => "edge",
            Self::Rough => "rough",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::Usage(format!("unknown test function {name:?}")))
    }

    /// `(ρ, ρ', ρ'')` of the `t` factor.
    fn radial(&self, t: f64) -> [f64; 3] {
        match self {
            Self::Smooth => {
                let e = (-t).exp();
                [e, -e, e]
            }
            Self::Apex => {
                if t <= 0.0 {
                    return [0.0, 0.0, 0.0];
                }
                let s = t.sqrt();
                [1.0 / s, -0.5 / (t * s), 0.75 / (t * t * s)]
            }
            Self::Edge => {
                let u = (1.0 - t).max(0.0);
                [u.powf(1.5), -1.5 * u.sqrt(), if u > 0.0 { 0.75 / u.sqrt() } else { f64::INFINITY }]
            }
            Self::Rough => {
                let u = t - 0.5;
                let a = u.abs();
                [a.powf(1.5), 1.5 * a.sqrt() * u.signum(), if a > 0.0 { 0.75 / a.sqrt() } else { f64::INFINITY }]
            }
        }
    }

    /// `(g, g', g'')` of the `x_1` factor.
    fn angular(&self, x1: f64) -> [f64; 3] {
        match self {
            Self::Smooth => [1.0 + x1 + x1 * x1, 1.0 + 2.0 * x1, 2.0],
            Self::Apex => [x1, 1.0, 0.0],
            Self::Edge | Self::Rough => [1.0 + x1, 1.0, 0.0],
        }
    }
}

impl Field for SuiteFunction {
    fn value(&self, x: &[f64]) -> f64 {
        let t = *x.last().expect("coordinates include t");
        self.radial(t)[0] * self.angular(x[0])[0]
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = x.len();
        let r = self.radial(x[n - 1]);
        let a = self.angular(x[0]);
        let mut g = vec![0.0; n];
        g[0] = r[0] * a[1];
        g[n - 1] += r[1] * a[0];
        Some(g)
    }

    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = x.len();
        let r = self.radial(x[n - 1]);
        let a = self.angular(x[0]);
        let mut h = vec![0.0; n * n];
        h[0] = r[0] * a[2];
        h[n - 1] = r[1] * a[1];
        h[(n - 1) * n] = r[1] * a[1];
        h[n * n - 1] += r[2] * a[0];
        Some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in SuiteFunction::ALL {
            assert_eq!(SuiteFunction::from_name(f.name()).unwrap(), f);
        }
        assert!(matches!(SuiteFunction::from_name("bogus"), Err(Error::Usage(_))));
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let x = [0.21, -0.33, 0.7];
        for f in SuiteFunction::ALL {
            let g = f.gradient(&x).unwrap();
            let gd = fd_gradient(&f, &x);
            let h = f.hessian(&x).unwrap();
            let hd = fd_hessian(&f, &x);
            for (a, b) in g.iter().zip(&gd) {
                assert!((a - b).abs() < 1e-7, "{f:?} gradient");
            }
            for (a, b) in h.iter().zip(&hd) {
                assert!((a - b).abs() < 1e-3, "{f:?} hessian {h:?} {hd:?}");
            }
        }
    }

    #[test]
    fn closures_lack_exact_derivatives() {
        let f = |x: &[f64]| x[0] * x[1];
        assert!(matches!(gradient_of(&f, &[1.0, 2.0], Derivatives::Exact), Err(Error::Capability(_))));
        let g = gradient_of(&f, &[1.0, 2.0], Derivatives::Auto).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 1.0).abs() < 1e-8);
    }
}
