use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_dim, check_player, Game};
use crate::error::{Error, Result};

/// A twice-differentiable scalar function with its first two derivatives.
pub trait ScalarCost: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn first(&self, x: f64) -> f64;
    fn second(&self, x: f64) -> f64;
}

/// Any `(c, c', c'')` triple of closures is a cost.
impl<F, G, H> ScalarCost for (F, G, H)
where
    F: Fn(f64) -> f64 + Send + Sync,
    G: Fn(f64) -> f64 + Send + Sync,
    H: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
    fn first(&self, x: f64) -> f64 {
        (self.1)(x)
    }
    fn second(&self, x: f64) -> f64 {
        (self.2)(x)
    }
}

/// `c(x) = Σ_k poly[k] x^k + exp_scale · e^(exp_rate x)`.
///
/// This is the catalog form scenario files can express.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothCost {
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub exp_scale: f64,
    #[serde(default = "one")]
    pub exp_rate: f64,
}

fn one() -> f64 {
    1.0
}

impl SmoothCost {
    pub fn polynomial(poly: Vec<f64>) -> Self {
        SmoothCost { poly, exp_scale: 0.0, exp_rate: 1.0 }
    }

    pub fn with_exp(mut self, scale: f64, rate: f64) -> Self {
        self.exp_scale = scale;
        self.exp_rate = rate;
        self
    }

    fn horner(coeffs: impl DoubleEndedIterator<Item = f64>, x: f64) -> f64 {
        coeffs.rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn exp_term(&self, x: f64) -> f64 {
        if self.exp_scale == 0.0 {
            0.0
        } else {
            self.exp_scale * (self.exp_rate * x).exp()
        }
    }
}

impl ScalarCost for SmoothCost {
    fn value(&self, x: f64) -> f64 {
        Self::horner(self.poly.iter().copied(), x) + self.exp_term(x)
    }

    fn first(&self, x: f64) -> f64 {
        let d = self.poly.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c);
        Self::horner(d.collect::<Vec<_>>().into_iter(), x) + self.exp_rate * self.exp_term(x)
    }

    fn second(&self, x: f64) -> f64 {
        let d = self
            .poly
            .iter()
            .enumerate()
            .skip(2)
            .map(|(k, c)| (k * (k - 1)) as f64 * c);
        Self::horner(d.collect::<Vec<_>>().into_iter(), x)
            + self.exp_rate * self.exp_rate * self.exp_term(x)
    }
}

/// Game with costs `J_i(x) = c_i(x_i) + (Σ_k α_ik x_k) x_i`.
#[derive(Clone)]
pub struct AggregativeGame {
    c: Vec<Arc<dyn ScalarCost>>,
    kappa: Vec<f64>,
    alpha: DMatrix<f64>,
}

impl fmt::Debug for AggregativeGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AggregativeGame")
            .field("players", &self.c.len())
            .field("kappa", &self.kappa)
            .field("alpha", &self.alpha)
            .finish()
    }
}

/// Grid on which `c_i'' ≥ κ_i` is spot-checked at construction.
pub const CONVEXITY_PROBE: (f64, f64, usize) = (-5.0, 5.0, 201);

impl AggregativeGame {
    pub fn new(c: Vec<Arc<dyn ScalarCost>>, kappa: Vec<f64>, alpha: DMatrix<f64>) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        check_dim(n, kappa.len())?;
        if alpha.nrows() != n || alpha.ncols() != n {
            return Err(Error::InvalidGame(format!("alpha must be {n}x{n}")));
        }
        if alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("alpha".into()));
        }
        for i in 0..n {
            if alpha[(i, i)] != 0.0 {
                return Err(Error::InvalidGame(format!(
                    "alpha diagonal must be zero (alpha_{0}{0} = {1})",
                    i + 1,
                    alpha[(i, i)]
                )));
            }
            if !(kappa[i] > 0.0) {
                return Err(Error::InvalidGame(format!("kappa_{} must be positive", i + 1)));
            }
            let (lo, hi, m) = CONVEXITY_PROBE;
            for s in 0..m {
                let x = lo + (hi - lo) * s as f64 / (m - 1) as f64;
                let c2 = c[i].second(x);
                if !c2.is_finite() || c2 < kappa[i] - 1e-9 {
                    return Err(Error::InvalidGame(format!(
                        "c_{}''({x}) = {c2} is below kappa = {}",
                        i + 1,
                        kappa[i]
                    )));
                }
            }
        }
        Ok(AggregativeGame { c, kappa, alpha })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn own_cost(&self, i: usize) -> &dyn ScalarCost {
        self.c[i].as_ref()
    }

    /// `K_j = κ_j − Σ_{k≠j} |α_jk + α_kj| / 2`; all positive certifies strong monotonicity.
    pub fn monotonicity_margins(&self) -> DVector<f64> {
        let n = self.n();
        DVector::from_fn(n, |j, _| {
            let coupling: f64 = (0..n)
                .filter(|&k| k != j)
                .map(|k| (self.alpha[(j, k)] + self.alpha[(k, j)]).abs() / 2.0)
                .sum();
            self.kappa[j] - coupling
        })
    }

    /// `Ξ(x)`: diagonal `c_i''(x_i)`, off-diagonal `α_ik`.
    pub fn xi_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.n(), x.len())?;
        Ok(self.pseudogradient_jacobian(x))
    }

    pub fn check_player(&self, i: usize) -> Result<()> {
        check_player(i, self.n())
    }
}

impl Game for AggregativeGame {
    fn players(&self) -> usize {
        self.c.len()
    }

    fn cost_at(&self, i: usize, x: &[f64]) -> f64 {
        let agg: f64 = (0..x.len()).map(|k| self.alpha[(i, k)] * x[k]).sum();
        self.c[i].value(x[i]) + agg * x[i]
    }

    fn partial_at(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        if i == j {
            let agg: f64 = (0..x.len()).map(|k| self.alpha[(i, k)] * x[k]).sum();
            self.c[i].first(x[i]) + agg
        } else {
            self.alpha[(i, j)] * x[i]
        }
    }

    fn pseudogradient_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = self.alpha.clone();
        for i in 0..self.n() {
            m[(i, i)] = self.c[i].second(x[i]);
        }
        m
    }
}
