//! Cut-off functions: equal to 1 on `[0,1]`, 0 on `[2,∞)`, non-increasing between.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffSpec {
    /// `C^∞` glue built from `σ(u) = exp(-1/u)`.
    #[default]
    ExponentialBump,
    /// `(1 + cos π(t-1)) / 2` on `[1,2]`; only `C^1`.
    RaisedCosine,
}

impl CutoffSpec {
    pub fn eval(&self, t: f64) -> f64 {
        cutoff_eval(*self, t)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CutoffSpec::ExponentialBump => "exponential_bump",
            CutoffSpec::RaisedCosine => "raised_cosine",
        }
    }
}

fn sigma(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

pub fn cutoff_eval(spec: CutoffSpec, t: f64) -> f64 {
    if t <= 1.0 {
        return 1.0;
    }
    if t >= 2.0 {
        return 0.0;
    }
    match spec {
        CutoffSpec::ExponentialBump => {
            let a = sigma(2.0 - t);
            a / (a + sigma(t - 1.0))
        }
        CutoffSpec::RaisedCosine => 0.5 * (1.0 + (std::f64::consts::PI * (t - 1.0)).cos()),
    }
}
