//! Exact discrete optimal transport (balanced transportation problem).
//!
//! Successive shortest augmenting paths with node potentials on the dense
//! bipartite residual network. The final potentials are a dual solution, and
//! every solve is certified by checking dual feasibility, complementary
//! slackness, and the duality gap.

use crate::error::{Error, Result};

const BALANCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportProblem {
    pub supply: Vec<f64>,
    pub demand: Vec<f64>,
    /// Row-major `supply.len() x demand.len()` ground costs.
    pub cost: Vec<f64>,
}

impl TransportProblem {
    pub fn new(supply: Vec<f64>, demand: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        if cost.len() != supply.len() * demand.len() {
            return Err(Error::SizeMismatch {
                left: cost.len(),
                right: supply.len() * demand.len(),
            });
        }
        if supply.iter().chain(&demand).any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParameter("masses must be finite and nonnegative".into()));
        }
        if cost.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidParameter("costs must be finite and nonnegative".into()));
        }
        let (a, b): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
        if (a - b).abs() > BALANCE_TOLERANCE * a.max(b).max(1.0) {
            return Err(Error::Unbalanced { supply: a, demand: b });
        }
        Ok(Self { supply, demand, cost })
    }

    pub fn rows(&self) -> usize {
        self.supply.len()
    }

    pub fn cols(&self) -> usize {
        self.demand.len()
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.demand.len() + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub cost: f64,
    /// Row-major optimal coupling.
    pub plan: Vec<f64>,
    /// Dual variables `u` (rows) and `v` (columns) with `v_j - u_i <= c_ij`.
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
}

impl TransportSolution {
    pub fn dual_objective(&self, problem: &TransportProblem) -> f64 {
        let v: f64 = problem.demand.iter().zip(&self.col_potential).map(|(b, v)| b * v).sum();
        let u: f64 = problem.supply.iter().zip(&self.row_potential).map(|(a, u)| a * u).sum();
        v - u
    }

    /// Largest violation among dual feasibility, complementary slackness, and
    /// the primal–dual gap, scaled by the largest cost.
    pub fn certificate_gap(&self, problem: &TransportProblem) -> f64 {
        let scale = problem.cost.iter().fold(1.0f64, |m, &c| m.max(c));
        let mut worst = 0.0f64;
        for i in 0..problem.rows() {
            for j in 0..problem.cols() {
                let reduced = problem.c(i, j) + self.row_potential[i] - self.col_potential[j];
                worst = worst.max(-reduced);
                if self.plan[i * problem.cols() + j] > 0.0 {
                    worst = worst.max(reduced.abs());
                }
            }
        }
        worst = worst.max((self.cost - self.dual_objective(problem)).abs());
        worst / scale
    }
}

const CERTIFICATE_TOLERANCE: f64 = 1e-9;

pub fn solve(problem: &TransportProblem) -> Result<TransportSolution> {
    let (s, t) = (problem.rows(), problem.cols());
    let total: f64 = problem.supply.iter().sum();
    let eps = 1e-14 * total.max(1e-300);
    let mut rem_a = problem.supply.clone();
    let mut rem_b = problem.demand.clone();
    let mut flow = vec![0.0; s * t];
    let mut pi_row = vec![0.0; s];
    let mut pi_col: Vec<f64> = (0..t)
        .map(|j| (0..s).map(|i| problem.c(i, j)).fold(f64::INFINITY, f64::min))
        .collect();
    if s == 0 || t == 0 {
        pi_col.iter_mut().for_each(|v| *v = 0.0);
    }

    let mut dist_row = vec![0.0; s];
    let mut dist_col = vec![0.0; t];
    // predecessor of a column is a row; predecessor of a row is a column or none
    let mut pred_col = vec![usize::MAX; t];
    let mut pred_row = vec![usize::MAX; s];
    let mut done_row = vec![false; s];
    let mut done_col = vec![false; t];

    loop {
        let active_rows = rem_a.iter().any(|&a| a > eps);
        let active_cols = rem_b.iter().any(|&b| b > eps);
        if !active_rows || !active_cols {
            break;
        }
        for i in 0..s {
            dist_row[i] = if rem_a[i] > eps { 0.0 } else { f64::INFINITY };
            pred_row[i] = usize::MAX;
            done_row[i] = false;
        }
        dist_col.iter_mut().for_each(|d| *d = f64::INFINITY);
        pred_col.iter_mut().for_each(|p| *p = usize::MAX);
        done_col.iter_mut().for_each(|d| *d = false);

        // dense Dijkstra over s + t nodes
        loop {
            let mut best = f64::INFINITY;
            let mut pick: Option<(bool, usize)> = None;
            for i in 0..s {
                if !done_row[i] && dist_row[i] < best {
                    best = dist_row[i];
                    pick = Some((true, i));
                }
            }
            for j in 0..t {
                if !done_col[j] && dist_col[j] < best {
                    best = dist_col[j];
                    pick = Some((false, j));
                }
            }
            let Some((is_row, k)) = pick else { break };
            if is_row {
                done_row[k] = true;
                for j in 0..t {
                    if done_col[j] {
                        continue;
                    }
                    let reduced = (problem.c(k, j) + pi_row[k] - pi_col[j]).max(0.0);
                    let nd = best + reduced;
                    if nd < dist_col[j] {
                        dist_col[j] = nd;
                        pred_col[j] = k;
                    }
                }
            } else {
                done_col[k] = true;
                for i in 0..s {
                    if done_row[i] || flow[i * t + k] <= eps {
                        continue;
                    }
                    let reduced = (-(problem.c(i, k) + pi_row[i] - pi_col[k])).max(0.0);
                    let nd = best + reduced;
                    if nd < dist_row[i] {
                        dist_row[i] = nd;
                        pred_row[i] = k;
                    }
                }
            }
        }

        let target = (0..t)
            .filter(|&j| rem_b[j] > eps && dist_col[j].is_finite())
            .min_by(|&a, &b| dist_col[a].total_cmp(&dist_col[b]).then(a.cmp(&b)));
        let Some(target) = target else {
            // residual mass below tolerance cannot be routed
            break;
        };
        let reach = dist_col[target];
        for i in 0..s {
            pi_row[i] += dist_row[i].min(reach);
        }
        for j in 0..t {
            pi_col[j] += dist_col[j].min(reach);
        }

        // walk back to find the bottleneck
        let mut bottleneck = rem_b[target];
        let mut j = target;
        let start_row;
        loop {
            let i = pred_col[j];
            match pred_row[i] {
                usize::MAX => {
                    start_row = i;
                    break;
                }
                prev_col => {
                    bottleneck = bottleneck.min(flow[i * t + prev_col]);
                    j = prev_col;
                }
            }
        }
        bottleneck = bottleneck.min(rem_a[start_row]);

        let mut j = target;
        loop {
            let i = pred_col[j];
            flow[i * t + j] += bottleneck;
            match pred_row[i] {
                usize::MAX => break,
                prev_col => {
                    let back = &mut flow[i * t + prev_col];
                    *back -= bottleneck;
                    if *back < eps {
                        *back = 0.0;
                    }
                    j = prev_col;
                }
            }
        }
        rem_a[start_row] -= bottleneck;
        rem_b[target] -= bottleneck;
    }

    let cost = flow.iter().zip(&problem.cost).map(|(f, c)| f * c).sum();
    let solution = TransportSolution {
        cost,
        plan: flow,
        row_potential: pi_row,
        col_potential: pi_col,
    };
    let gap = solution.certificate_gap(problem);
    if gap > CERTIFICATE_TOLERANCE {
        return Err(Error::NotOptimal(gap));
    }
    Ok(solution)
}

/// Optimal transport cost.
pub fn exact_w1(problem: &TransportProblem) -> Result<f64> {
    solve(problem).map(|s| s.cost)
}
