//! Local stability of the interconnection of the averaged flow and a scalar
//! deception integrator, analysed on a single time scale.
//!
//! For a two-player game with one deceiver the linearisation is
//!
//! ```text
//! A = [ −Qcal_δ      −(Qbar x + Bbar) ]
//!     [ ε wᵀ          0               ]
//! ```
//!
//! with `w = ∇J_d(x)` when the deceiver tracks a payoff and `w = e_d` when it
//! tracks a price. Its characteristic polynomial splits as
//! `P_A(s) = s P_Q(s) + ε p(s)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::deception::{build_deceptive_matrices, q_delta, DeceptionStructure};
use crate::error::{Error, Result};
use crate::game::{check_dim, QuadraticGame};
use crate::linalg;

/// What the deceiver's integrator regulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regulated {
    Payoff,
    Price,
}

/// Coefficients of `P_Q(s) = s² + a1 s + a0` and `p(s) = a1s s + a0s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyParts {
    pub a1: f64,
    pub a0: f64,
    pub a1_star: f64,
    pub a0_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterconnectionJacobian {
    pub a: DMatrix<f64>,
    /// `P_A`, monic, highest degree first.
    pub charpoly: Vec<f64>,
    pub parts: PolyParts,
    /// `p(s)` assembled directly from the block form, for cross-checking `parts`.
    pub p_direct: [f64; 2],
}

fn assemble(m: &DMatrix<f64>, v: &DVector<f64>, w: &DVector<f64>, eps: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(m);
    a.view_mut((0, n), (n, 1)).copy_from(v);
    a.view_mut((n, 0), (1, n)).copy_from(&(w.transpose() * eps));
    a
}

/// Builds `A(x, δ)` at the equilibrium `x` for the single deceiver in `ds`.
///
/// `epsilon` is the effective integrator gain (the product `ε ε_d` for payoff tracking).
pub fn build_jacobian(
    game: &QuadraticGame,
    ds: &DeceptionStructure,
    delta: f64,
    x: &[f64],
    epsilon: f64,
    regulated: Regulated,
) -> Result<InterconnectionJacobian> {
    if game.n() != 2 || ds.len() != 1 || ds.deceivers()[0].targets.len() != 1 {
        return Err(Error::Precondition(
            "the interconnection Jacobian is defined for two players with one deceiver".into(),
        ));
    }
    check_dim(2, x.len())?;
    let mats = build_deceptive_matrices(game, ds)?;
    let (q, _) = q_delta(game, &mats, &[delta])?;
    if !crate::deception::in_delta(&q)? {
        return Err(Error::OutsideDelta { delta: vec![delta] });
    }
    let xv = DVector::from_column_slice(x);
    let m = -q;
    let v = -(&mats.qbar_sum[0] * &xv + &mats.bbar_sum[0]);
    let dec = ds.deceivers()[0].player;
    let w = match regulated {
        Regulated::Payoff => game.q(dec) * &xv + game.b(dec),
        Regulated::Price => {
            let mut e = DVector::zeros(2);
            e[dec] = 1.0;
            e
        }
    };
    let a = assemble(&m, &v, &w, epsilon);
    let charpoly = linalg::charpoly(&a)?;
    let pq = linalg::charpoly(&m)?;
    // P_A is affine in ε: read p(s) off two evaluations.
    let c_one = linalg::charpoly(&assemble(&m, &v, &w, 1.0))?;
    let c_zero = linalg::charpoly(&assemble(&m, &v, &w, 0.0))?;
    let parts = PolyParts {
        a1: pq[1],
        a0: pq[2],
        a1_star: c_one[2] - c_zero[2],
        a0_star: c_one[3] - c_zero[3],
    };
    // p(s) = −wᵀ adj(sI − M) v
    let adj0 = DMatrix::from_row_slice(2, 2, &[-m[(1, 1)], m[(0, 1)], m[(1, 0)], -m[(0, 0)]]);
    let p_direct = [-w.dot(&v), -w.dot(&(adj0 * &v))];
    Ok(InterconnectionJacobian { a, charpoly, parts, p_direct })
}

/// Routh–Hurwitz test for the monic cubic `s³ + c2 s² + c1 s + c0`.
pub fn routh_hurwitz_3(c2: f64, c1: f64, c0: f64) -> bool {
    c2 > 0.0 && c0 > 0.0 && c2 * c1 > c0
}

/// Gain bound below which the interconnection stays Hurwitz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonStar {
    pub value: f64,
    pub bounded: bool,
}

/// `ε* = min(a0/|a1*|, a1 a0/|a1 a1* − a0*|)`.
pub fn epsilon_star(parts: &PolyParts) -> Result<EpsilonStar> {
    if !(parts.a0 > 0.0 && parts.a1 > 0.0) {
        return Err(Error::Precondition("epsilon* needs a0 > 0 and a1 > 0".into()));
    }
    let t1 = parts.a0 / parts.a1_star.abs();
    let t2 = parts.a1 * parts.a0 / (parts.a1 * parts.a1_star - parts.a0_star).abs();
    let value = t1.min(t2);
    Ok(EpsilonStar { value, bounded: value.is_finite() })
}

/// The interconnection matrix of the equal-marginal-cost duopoly at the
/// equilibrium where the deceiver's profit equals `jref`, and its characteristic polynomial.
pub fn equal_marginal_matrix(demand: f64, p: f64, jref: f64, epsilon: f64) -> Result<(DMatrix<f64>, [f64; 4])> {
    if !(jref > 0.0) {
        return Err(Error::Precondition("reference profit must be positive".into()));
    }
    if !(p > 0.0 && demand > 0.0) {
        return Err(Error::Precondition("demand and preference must be positive".into()));
    }
    let root = (jref * p).sqrt();
    let r = (jref / p).sqrt();
    let a = DMatrix::from_row_slice(
        3,
        3,
        &[
            -1.0 / (2.0 * p) - demand / (2.0 * root),
            1.0 / p,
            2.0 * r,
            1.0 / p,
            -2.0 / p,
            0.0,
            -epsilon * r,
            0.0,
            0.0,
        ],
    );
    let poly = [
        1.0,
        5.0 / (2.0 * p) + demand / (2.0 * root),
        2.0 * epsilon * jref / p + demand / (p * root),
        4.0 * epsilon * jref / (p * p),
    ];
    Ok((a, poly))
}
