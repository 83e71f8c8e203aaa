//! Dense exact linear algebra over a [`Field`].
//!
//! Vectors are plain `Vec<F>`; matrices are row-major [`Matrix`] values.
//! Subspace bases are always returned in reduced row-echelon form with unit
//! leading coefficients, so two bases of the same subspace compare equal.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self.row_iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
        write!(f, "Matrix{rows:?}")
    }
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have `cols` entries.
    pub fn from_rows(rows: Vec<Vec<F>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::dimension(format!("row {i} has {} entries, expected {cols}", row.len())));
            }
            data.extend(row);
        }
        Ok(Self { rows: n, cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<F>], rows: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::dimension(format!("column {j} has {} entries, expected {rows}", c.len())));
            }
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[F]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        self.row_iter().map(<[F]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[F]) -> Result<Vec<F>> {
        if v.len() != self.cols {
            return Err(Error::dimension(format!("matrix has {} columns, vector has {} entries", self.cols, v.len())));
        }
        Ok(self.row_iter().map(|r| dot(r, v)).collect())
    }

    /// Row vector times matrix, i.e. pulls a covector back through the map.
    pub fn covector_mul(&self, w: &[F]) -> Result<Vec<F>> {
        if w.len() != self.rows {
            return Err(Error::dimension(format!("matrix has {} rows, covector has {} entries", self.rows, w.len())));
        }
        let mut out = vec![F::zero(); self.cols];
        for (i, wi) in w.iter().enumerate() {
            if wi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o = o.clone() + wi.clone() * a.clone();
            }
        }
        Ok(out)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product, matching [`tensor`] on vectors.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a.clone() * rhs[(k, l)].clone();
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &F) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Reduced row-echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = F::one() / m[(r, c)].clone();
            for j in c..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    let t = m[(r, j)].clone();
                    if !t.is_zero() {
                        m[(i, j)] = m[(i, j)].clone() - f.clone() * t;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical basis of the null space `{x : A x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![F::zero(); self.cols];
            v[free] = F::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r[(i, free)].clone();
            }
            basis.push(v);
        }
        canonical_basis(&basis, self.cols)
    }

    /// Exact inverse, or `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = F::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }
}

use num_traits::Zero;

impl<F> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn add<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn sub<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn scale<F: Field>(c: &F, a: &[F]) -> Vec<F> {
    a.iter().map(|x| c.clone() * x.clone()).collect()
}

pub fn is_zero_vec<F: Field>(a: &[F]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// `Σ w_i v_i` over equal-length vectors of dimension `dim`.
pub fn combination<F: Field>(weights: &[F], vectors: &[Vec<F>], dim: usize) -> Vec<F> {
    let mut out = vec![F::zero(); dim];
    for (w, v) in weights.iter().zip(vectors) {
        if w.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o = o.clone() + w.clone() * x.clone();
        }
    }
    out
}

/// Arithmetic mean of a nonempty list of vectors.
pub fn barycenter<F: Field>(vectors: &[Vec<F>]) -> Vec<F> {
    let dim = vectors.first().map_or(0, Vec::len);
    let w = F::one() / F::int(vectors.len() as i64);
    combination(&vec![w; vectors.len()], vectors, dim)
}

fn check_dims<F>(vectors: &[Vec<F>], dim: usize) -> Result<()> {
    match vectors.iter().position(|v| v.len() != dim) {
        Some(i) => Err(Error::dimension(format!("vector {i} has {} entries, expected {dim}", vectors[i].len()))),
        None => Ok(()),
    }
}

/// Reduced row-echelon basis of `Span[vectors]` (all of length `dim`).
pub fn canonical_basis<F: Field>(vectors: &[Vec<F>], dim: usize) -> Vec<Vec<F>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = Matrix::from_rows(vectors.to_vec(), dim).expect("uniform dimension");
    let (r, pivots) = m.rref();
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

/// Rank of a list of vectors.
pub fn rank_of<F: Field>(vectors: &[Vec<F>], dim: usize) -> usize {
    canonical_basis(vectors, dim).len()
}

/// Indices of a maximal linearly independent prefix-greedy subset.
pub fn independent_subset<F: Field>(vectors: &[Vec<F>], dim: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<F>> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        basis.push(v.clone());
        if rank_of(&basis, dim) == basis.len() {
            chosen.push(i);
        } else {
            basis.pop();
        }
        if chosen.len() == dim {
            break;
        }
    }
    chosen
}

/// One solution of `A x = b` together with a kernel basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution<F> {
    pub x: Vec<F>,
    pub kernel: Vec<Vec<F>>,
}

/// Solves `A x = b` exactly. Free variables are set to zero in `x`.
pub fn solve_linear<F: Field>(a: &Matrix<F>, b: &[F]) -> Result<Option<LinearSolution<F>>> {
    if b.len() != a.nrows() {
        return Err(Error::dimension(format!(
            "right-hand side has {} entries, matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    let n = a.ncols();
    let mut aug = Matrix::zeros(a.nrows(), n + 1);
    for i in 0..a.nrows() {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n)] = b[i].clone();
    }
    let (r, pivots) = aug.rref();
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = vec![F::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[(i, n)].clone();
    }
    Ok(Some(LinearSolution { x, kernel: a.kernel() }))
}

/// Basis of `Span[u] ∩ Span[v]`; an empty result means the intersection is `{0}`.
pub fn span_intersection<F: Field>(u: &[Vec<F>], v: &[Vec<F>]) -> Result<Vec<Vec<F>>> {
    let Some(dim) = u.first().or(v.first()).map(Vec::len) else {
        return Ok(Vec::new());
    };
    check_dims(u, dim)?;
    check_dims(v, dim)?;
    if u.is_empty() || v.is_empty() {
        return Ok(Vec::new());
    }
    // Columns [u_1 .. u_p | -v_1 .. -v_q]; kernel vectors give coincident points.
    let mut cols: Vec<Vec<F>> = u.to_vec();
    cols.extend(v.iter().map(|w| scale(&-F::one(), w)));
    let m = Matrix::from_columns(&cols, dim)?;
    let points: Vec<Vec<F>> = m.kernel().into_iter().map(|k| combination(&k[..u.len()], u, dim)).collect();
    Ok(canonical_basis(&points, dim))
}

/// Coordinate tensor product in row-major order: `(u ⊗ v)[i·|v| + j] = u_i v_j`.
pub fn tensor<F: Field>(u: &[F], v: &[F]) -> Vec<F> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        for b in v {
            out.push(a.clone() * b.clone());
        }
    }
    out
}

/// Which summand a vector is embedded into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Zero-padded embedding into a direct sum of dimensions `(left, right)`.
pub fn direct_sum_embed<F: Field>(u: &[F], side: Side, dims: (usize, usize)) -> Result<Vec<F>> {
    let (l, r) = dims;
    let expected = match side {
        Side::Left => l,
        Side::Right => r,
    };
    if u.len() != expected {
        return Err(Error::dimension(format!("{side:?} summand has dimension {expected}, vector has {}", u.len())));
    }
    let mut out = vec![F::zero(); l + r];
    let offset = if side == Side::Left { 0 } else { l };
    out[offset..offset + u.len()].clone_from_slice(u);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BigRational as Q;

    fn q(p: i64, d: i64) -> Q {
        Q::ratio(p, d)
    }

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| Q::int(x)).collect()
    }

    #[test]
    fn identity_solve() {
        let s = solve_linear(&Matrix::<Q>::identity(3), &v(&[1, 2, 3])).unwrap().unwrap();
        assert_eq!(s.x, v(&[1, 2, 3]));
        assert!(s.kernel.is_empty());
    }

    #[test]
    fn one_equation_line() {
        let a = Matrix::from_rows(vec![v(&[1, 1])], 2).unwrap();
        let s = solve_linear(&a, &v(&[1])).unwrap().unwrap();
        assert_eq!(s.x, v(&[1, 0]));
        assert_eq!(s.kernel, vec![v(&[1, -1])]);
    }

    #[test]
    fn inconsistent_system() {
        let a = Matrix::from_rows(vec![v(&[1, 1]), v(&[2, 2])], 2).unwrap();
        assert!(solve_linear(&a, &v(&[1, 3])).unwrap().is_none());
    }

    #[test]
    fn dimension_mismatch_is_error() {
        assert!(Matrix::<Q>::from_rows(vec![v(&[1, 2]), v(&[1])], 2).is_err());
        assert!(solve_linear(&Matrix::<Q>::identity(2), &v(&[1])).is_err());
        assert!(span_intersection(&[v(&[1, 0])], &[v(&[1])]).is_err());
    }

    #[test]
    fn ranks() {
        assert_eq!(Matrix::<Q>::zeros(3, 4).rank(), 0);
        assert_eq!(Matrix::<Q>::identity(4).rank(), 4);
        // Cone rays of the left and right edges of the unit square.
        let rays = vec![v(&[0, 0, 1]), v(&[0, 1, 1]), v(&[1, 0, 1]), v(&[1, 1, 1])];
        assert_eq!(Matrix::from_rows(rays, 3).unwrap().rank(), 3);
    }

    #[test]
    fn intersections() {
        assert!(span_intersection(&[v(&[1, 0])], &[v(&[0, 1])]).unwrap().is_empty());
        assert_eq!(span_intersection(&[v(&[1, 1])], &[v(&[1, 1])]).unwrap(), vec![v(&[1, 1])]);
        let left = vec![v(&[0, 0, 1]), v(&[0, 1, 1])];
        let right = vec![v(&[1, 0, 1]), v(&[1, 1, 1])];
        assert_eq!(span_intersection(&left, &right).unwrap(), vec![v(&[0, 1, 0])]);
    }

    #[test]
    fn tensor_and_sum() {
        assert_eq!(tensor(&v(&[1, 0]), &v(&[0, 1])), v(&[0, 1, 0, 0]));
        assert_eq!(direct_sum_embed(&v(&[1, 2]), Side::Left, (2, 3)).unwrap(), v(&[1, 2, 0, 0, 0]));
        assert_eq!(direct_sum_embed(&v(&[1, 2, 3]), Side::Right, (2, 3)).unwrap(), v(&[0, 0, 1, 2, 3]));
    }

    #[test]
    fn inverse_round_trip() {
        let a = Matrix::from_rows(vec![vec![q(2, 1), q(1, 3)], vec![q(-1, 2), q(5, 1)]], 2).unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(2));
        let singular = Matrix::from_rows(vec![v(&[1, 2]), v(&[2, 4])], 2).unwrap();
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn kron_matches_tensor() {
        let a = Matrix::from_rows(vec![v(&[1, 2]), v(&[0, 1])], 2).unwrap();
        let b = Matrix::from_rows(vec![v(&[3, 0, 1])], 3).unwrap();
        let x = v(&[1, -1]);
        let y = v(&[2, 5, 7]);
        let lhs = a.kron(&b).mul_vec(&tensor(&x, &y)).unwrap();
        let rhs = tensor(&a.mul_vec(&x).unwrap(), &b.mul_vec(&y).unwrap());
        assert_eq!(lhs, rhs);
    }
}
