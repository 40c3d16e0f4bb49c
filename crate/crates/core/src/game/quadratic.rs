use nalgebra::{DMatrix, DVector};

use super::{check_dim, check_player, ActionVector, Game};
use crate::error::{Error, Result};
use crate::linalg;

const SYMMETRY_TOL: f64 = 1e-12;

/// Game with costs `J_i(x) = ½ xᵀ Q_i x + b_iᵀ x + p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGame {
    q: Vec<DMatrix<f64>>,
    b: Vec<DVector<f64>>,
    p: Vec<f64>,
}

/// The affine pseudogradient `G(x) = Qcal x + Bcal`.
///
/// Row `i` of `qcal` is row `i` of `Q_i`; entry `i` of `bcal` is entry `i` of `b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudogradientMatrices {
    pub qcal: DMatrix<f64>,
    pub bcal: DVector<f64>,
}

impl QuadraticGame {
    pub fn new(q: Vec<DMatrix<f64>>, b: Vec<DVector<f64>>, p: Vec<f64>) -> Result<Self> {
        let n = q.len();
        if n == 0 {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        check_dim(n, b.len())?;
        check_dim(n, p.len())?;
        for (i, qi) in q.iter().enumerate() {
            if qi.nrows() != n || qi.ncols() != n {
                return Err(Error::InvalidGame(format!(
                    "Q_{} is {}x{}, expected {n}x{n}",
                    i + 1,
                    qi.nrows(),
                    qi.ncols()
                )));
            }
            check_dim(n, b[i].len())?;
            if qi.iter().chain(b[i].iter()).any(|v| !v.is_finite()) || !p[i].is_finite() {
                return Err(Error::NonFinite(format!("cost parameters of player {}", i + 1)));
            }
            let asym = (qi - qi.transpose()).amax();
            if asym > SYMMETRY_TOL * qi.amax().max(1.0) {
                return Err(Error::InvalidGame(format!(
                    "Q_{} is not symmetric (max asymmetry {asym:e})",
                    i + 1
                )));
            }
        }
        Ok(QuadraticGame { q, b, p })
    }

    /// Builds a game from row-major nested vectors, as they appear in scenario files.
    pub fn from_rows(q: &[Vec<Vec<f64>>], b: &[Vec<f64>], p: &[f64]) -> Result<Self> {
        let n = q.len();
        let mut qs = Vec::with_capacity(n);
        for (i, rows) in q.iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidGame(format!("Q_{} must be {n}x{n}", i + 1)));
            }
            qs.push(DMatrix::from_fn(n, n, |r, c| rows[r][c]));
        }
        let bs = b.iter().map(|v| DVector::from_column_slice(v)).collect();
        QuadraticGame::new(qs, bs, p.to_vec())
    }

    /// Price-setting duopoly with sales `s_2 = (x_1 - x_2)/p`, `s_1 = S_d - s_2`
    /// and costs equal to the negated profits `-s_i (x_i - m_i)`.
    pub fn duopoly(demand: f64, preference: f64, marginal_costs: [f64; 2]) -> Result<Self> {
        if !(preference > 0.0) {
            return Err(Error::InvalidGame("duopoly preference p must be positive".into()));
        }
        let ip = 1.0 / preference;
        let [m1, m2] = marginal_costs;
        let q1 = DMatrix::from_row_slice(2, 2, &[2.0 * ip, -ip, -ip, 0.0]);
        let q2 = DMatrix::from_row_slice(2, 2, &[0.0, -ip, -ip, 2.0 * ip]);
        let b1 = DVector::from_vec(vec![-demand - m1 * ip, m1 * ip]);
        let b2 = DVector::from_vec(vec![m2 * ip, -m2 * ip]);
        QuadraticGame::new(vec![q1, q2], vec![b1, b2], vec![demand * m1, 0.0])
    }

    pub fn q(&self, i: usize) -> &DMatrix<f64> {
        &self.q[i]
    }

    pub fn b(&self, i: usize) -> &DVector<f64> {
        &self.b[i]
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn pseudogradient_matrices(&self) -> PseudogradientMatrices {
        let n = self.n();
        let qcal = DMatrix::from_fn(n, n, |i, j| self.q[i][(i, j)]);
        let bcal = DVector::from_fn(n, |i, _| self.b[i][i]);
        PseudogradientMatrices { qcal, bcal }
    }

    /// `x* = -Qcal⁻¹ Bcal`.
    pub fn nash_equilibrium(&self) -> Result<ActionVector> {
        let pg = self.pseudogradient_matrices();
        let x = linalg::solve(&pg.qcal, &(-&pg.bcal), "Qcal")?;
        Ok(ActionVector::from(x))
    }

    /// Gradient of `J_i` with respect to the full action vector.
    pub fn cost_gradient(&self, i: usize, x: &ActionVector) -> Result<DVector<f64>> {
        check_player(i, self.n())?;
        check_dim(self.n(), x.len())?;
        Ok(&self.q[i] * &**x + &self.b[i])
    }
}

impl Game for QuadraticGame {
    fn players(&self) -> usize {
        self.q.len()
    }

    fn cost_at(&self, i: usize, x: &[f64]) -> f64 {
        let q = &self.q[i];
        let b = &self.b[i];
        let n = x.len();
        let mut quad = 0.0;
        let mut lin = 0.0;
        for r in 0..n {
            let mut row = 0.0;
            for c in 0..n {
                row += q[(r, c)] * x[c];
            }
            quad += x[r] * row;
            lin += b[r] * x[r];
        }
        0.5 * quad + lin + self.p[i]
    }

    fn partial_at(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        let q = &self.q[i];
        let mut s = self.b[i][j];
        for (c, xc) in x.iter().enumerate() {
            s += q[(j, c)] * xc;
        }
        s
    }

    fn pseudogradient_jacobian(&self, _x: &[f64]) -> DMatrix<f64> {
        self.pseudogradient_matrices().qcal
    }
}
