//! Exact two-phase simplex with Bland's anti-cycling rule.
//!
//! [`minimize_standard`] works on `min cᵀx, Ax = b, x ≥ 0` and returns a
//! Farkas certificate when the system is infeasible. [`Problem`] is a small
//! modelling layer on top of it with free variables and inequality rows.

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Field;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StandardOutcome<F> {
    Optimal {
        x: Vec<F>,
        value: F,
    },
    /// `w` with `wᵀA ≥ 0` componentwise and `wᵀb < 0`.
    Infeasible {
        farkas: Vec<F>,
    },
    Unbounded,
}

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    cost: Vec<F>,
    basis: Vec<usize>,
    width: usize,
}

impl<F: Field> Tableau<F> {
    fn rhs(&self) -> usize {
        self.width
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = F::one() / self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x = x.clone() * inv.clone();
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<F>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.basis[r] = c;
    }

    /// Runs Bland-rule pivots until optimal (`true`) or unbounded (`false`).
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> bool {
        let rhs = self.rhs();
        loop {
            let Some(enter) = (0..self.width).find(|&j| allowed(j) && self.cost[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, F)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Solves `min cᵀx` subject to `Ax = b`, `x ≥ 0`.
pub fn minimize_standard<F: Field>(a: &Matrix<F>, b: &[F], c: &[F]) -> Result<StandardOutcome<F>> {
    let (m, n) = (a.nrows(), a.ncols());
    if b.len() != m || c.len() != n {
        return Err(Error::dimension(format!(
            "LP with {m}x{n} matrix, {} right-hand sides, {} costs",
            b.len(),
            c.len()
        )));
    }
    let width = n + m;
    let mut signs = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for (i, bi) in b.iter().enumerate() {
        let flip = bi.is_negative();
        signs.push(flip);
        let mut row: Vec<F> = a.row(i).iter().map(|x| if flip { -x.clone() } else { x.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { F::one() } else { F::zero() }));
        row.push(if flip { -bi.clone() } else { bi.clone() });
        rows.push(row);
    }
    let mut cost = vec![F::zero(); width + 1];
    for row in &rows {
        for j in 0..n {
            cost[j] = cost[j].clone() - row[j].clone();
        }
        cost[width] = cost[width].clone() - row[width].clone();
    }
    for k in 0..m {
        cost[n + k] = F::zero();
    }
    let mut t = Tableau { rows, cost, basis: (n..n + m).collect(), width };

    // Phase 1 over original and artificial columns; the objective is bounded below by 0.
    t.run(|_| true);
    let infeasibility = -t.cost[width].clone();
    if infeasibility.is_positive() {
        // Artificial reduced costs are 1 - y_i, so the phase-1 duals are y_i = 1 - d_{n+i}.
        let farkas: Vec<F> = (0..m)
            .map(|i| {
                let y = F::one() - t.cost[n + i].clone();
                if signs[i] {
                    y
                } else {
                    -y
                }
            })
            .collect();
        let at = a.covector_mul(&farkas)?;
        if at.iter().any(|x| x.is_negative()) || !dot(&farkas, b).is_negative() {
            return Err(Error::Internal("phase-1 Farkas certificate failed to verify".into()));
        }
        return Ok(StandardOutcome::Infeasible { farkas });
    }

    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
            }
        }
    }
    let basic_cost = |j: usize| if j < n { c[j].clone() } else { F::zero() };
    let mut cost = vec![F::zero(); width + 1];
    for j in 0..=width {
        let mut d = if j < n { c[j].clone() } else { F::zero() };
        for (i, row) in t.rows.iter().enumerate() {
            let cb = basic_cost(t.basis[i]);
            if !cb.is_zero() && !row[j].is_zero() {
                d = d - cb * row[j].clone();
            }
        }
        cost[j] = d;
    }
    t.cost = cost;
    if !t.run(|j| j < n) {
        return Ok(StandardOutcome::Unbounded);
    }
    let mut x = vec![F::zero(); n];
    for (i, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.rows[i][width].clone();
        }
    }
    let value = dot(c, &x);
    Ok(StandardOutcome::Optimal { x, value })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    NonNeg,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<F> {
    Optimal { x: Vec<F>, value: F },
    Infeasible,
    Unbounded,
}

impl<F> Outcome<F> {
    pub fn optimal(self) -> Option<(Vec<F>, F)> {
        match self {
            Outcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

/// A linear program over named-by-index variables.
#[derive(Clone, Debug)]
pub struct Problem<F> {
    kinds: Vec<VarKind>,
    rows: Vec<(Vec<F>, Sense, F)>,
    objective: Vec<F>,
    maximize: bool,
}

impl<F: Field> Default for Problem<F> {
    fn default() -> Self {
        Self { kinds: Vec::new(), rows: Vec::new(), objective: Vec::new(), maximize: false }
    }
}

impl<F: Field> Problem<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, kind: VarKind) -> usize {
        self.kinds.push(kind);
        self.kinds.len() - 1
    }

    pub fn add_vars(&mut self, count: usize, kind: VarKind) -> std::ops::Range<usize> {
        let start = self.kinds.len();
        self.kinds.extend(std::iter::repeat_n(kind, count));
        start..self.kinds.len()
    }

    pub fn num_vars(&self) -> usize {
        self.kinds.len()
    }

    /// Adds `coeffs · x (sense) rhs`; `coeffs` shorter than the variable count is zero-padded.
    pub fn constrain(&mut self, coeffs: Vec<F>, sense: Sense, rhs: F) {
        self.rows.push((coeffs, sense, rhs));
    }

    /// Sparse variant of [`Problem::constrain`].
    pub fn constrain_sparse(&mut self, terms: &[(usize, F)], sense: Sense, rhs: F) {
        let len = terms.iter().map(|(j, _)| j + 1).max().unwrap_or(0);
        let mut coeffs = vec![F::zero(); len];
        for (j, v) in terms {
            coeffs[*j] = coeffs[*j].clone() + v.clone();
        }
        self.rows.push((coeffs, sense, rhs));
    }

    pub fn maximize(&mut self, coeffs: Vec<F>) {
        self.objective = coeffs;
        self.maximize = true;
    }

    pub fn minimize(&mut self, coeffs: Vec<F>) {
        self.objective = coeffs;
        self.maximize = false;
    }

    pub fn solve(&self) -> Result<Outcome<F>> {
        let nv = self.kinds.len();
        let mut column_of = Vec::with_capacity(nv);
        let mut ncols = 0;
        for kind in &self.kinds {
            column_of.push(ncols);
            ncols += if *kind == VarKind::Free { 2 } else { 1 };
        }
        let structural = ncols;
        ncols += self.rows.iter().filter(|(_, s, _)| *s != Sense::Eq).count();

        let mut a = Matrix::zeros(self.rows.len(), ncols);
        let mut b = Vec::with_capacity(self.rows.len());
        let mut slack = structural;
        for (i, (coeffs, sense, rhs)) in self.rows.iter().enumerate() {
            if coeffs.len() > nv {
                return Err(Error::dimension(format!(
                    "constraint {i} has {} coefficients for {nv} variables",
                    coeffs.len()
                )));
            }
            for (j, v) in coeffs.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                a[(i, column_of[j])] = v.clone();
                if self.kinds[j] == VarKind::Free {
                    a[(i, column_of[j] + 1)] = -v.clone();
                }
            }
            match sense {
                Sense::Le => {
                    a[(i, slack)] = F::one();
                    slack += 1;
                }
                Sense::Ge => {
                    a[(i, slack)] = -F::one();
                    slack += 1;
                }
                Sense::Eq => {}
            }
            b.push(rhs.clone());
        }
        let mut c = vec![F::zero(); ncols];
        for (j, v) in self.objective.iter().enumerate().take(nv) {
            let v = if self.maximize { -v.clone() } else { v.clone() };
            c[column_of[j]] = v.clone();
            if self.kinds[j] == VarKind::Free {
                c[column_of[j] + 1] = -v;
            }
        }
        Ok(match minimize_standard(&a, &b, &c)? {
            StandardOutcome::Infeasible { .. } => Outcome::Infeasible,
            StandardOutcome::Unbounded => Outcome::Unbounded,
            StandardOutcome::Optimal { x: cols, .. } => {
                let x: Vec<F> = self
                    .kinds
                    .iter()
                    .zip(&column_of)
                    .map(|(kind, &col)| match kind {
                        VarKind::NonNeg => cols[col].clone(),
                        VarKind::Free => cols[col].clone() - cols[col + 1].clone(),
                    })
                    .collect();
                let value = dot(&self.objective[..self.objective.len().min(nv)], &x[..self.objective.len().min(nv)]);
                Outcome::Optimal { x, value }
            }
        })
    }
}
