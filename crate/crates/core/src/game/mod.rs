//! N-player games with scalar actions.
//!
//! Two families are supported: quadratic games, whose pseudogradient is the
//! affine map `Qcal x + Bcal`, and aggregative games with separable convex
//! own-costs and linear coupling. Both implement [`Game`], which is all the
//! simulator and the generic analysis routines need.
//!
//! Player indices are zero-based throughout the library.

mod aggregative;
mod quadratic;

pub use aggregative::{AggregativeGame, ScalarCost, SmoothCost};
pub use quadratic::{PseudogradientMatrices, QuadraticGame};

use nalgebra::{DMatrix, DVector};
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Joint action profile, one scalar per player.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionVector(DVector<f64>);

impl ActionVector {
    pub fn new(values: Vec<f64>) -> Self {
        ActionVector(DVector::from_vec(values))
    }

    pub fn zeros(n: usize) -> Self {
        ActionVector(DVector::zeros(n))
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<DVector<f64>> for ActionVector {
    fn from(v: DVector<f64>) -> Self {
        ActionVector(v)
    }
}

impl From<Vec<f64>> for ActionVector {
    fn from(v: Vec<f64>) -> Self {
        ActionVector::new(v)
    }
}

impl Deref for ActionVector {
    type Target = DVector<f64>;
    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl DerefMut for ActionVector {
    fn deref_mut(&mut self) -> &mut DVector<f64> {
        &mut self.0
    }
}

/// A non-cooperative game in which every player minimises its own cost.
///
/// The `*_at` methods are unchecked fast paths used inside integrators; the
/// free functions [`cost`] and [`pseudogradient`] validate their inputs.
pub trait Game: Send + Sync {
    fn players(&self) -> usize;

    /// `J_i(x)`.
    fn cost_at(&self, i: usize, x: &[f64]) -> f64;

    /// `∂J_i/∂x_j` at `x`.
    fn partial_at(&self, i: usize, j: usize, x: &[f64]) -> f64;

    /// Jacobian of the pseudogradient.
    fn pseudogradient_jacobian(&self, x: &[f64]) -> DMatrix<f64>;

    fn pseudogradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.partial_at(i, i, x);
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_player(index: usize, players: usize) -> Result<()> {
    if index >= players {
        return Err(Error::PlayerOutOfRange { index, players });
    }
    Ok(())
}

/// Stacked own-action derivatives `[∇_1 J_1, …, ∇_N J_N]`.
pub fn pseudogradient(game: &dyn Game, x: &ActionVector) -> Result<DVector<f64>> {
    check_dim(game.players(), x.len())?;
    let mut out = DVector::zeros(x.len());
    game.pseudogradient_into(x.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// Cost of player `i` at `x`.
pub fn cost(game: &dyn Game, i: usize, x: &ActionVector) -> Result<f64> {
    check_dim(game.players(), x.len())?;
    check_player(i, game.players())?;
    Ok(game.cost_at(i, x.as_slice()))
}
