#![allow(dead_code)]

use classlim::convex::{make_body, ConvexBody};
use classlim::linalg::{self, Matrix};
use classlim::maps::LinearMap;
use classlim::{Field, Rational};
use proptest::prelude::*;

pub type Q = Rational;

pub fn q(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

pub fn rational() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| Q::ratio(n, d))
}

pub fn vector(n: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::vec(rational(), n)
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Q>> {
    proptest::collection::vec(vector(cols), rows).prop_map(move |r| Matrix::from_rows(r, cols).unwrap())
}

/// Random polytope in `R^dim` from small integer points.
pub fn body(dim: usize, max_points: usize) -> impl Strategy<Value = ConvexBody<Q>> {
    proptest::collection::vec(proptest::collection::vec(0i64..=4, dim), 1..=max_points).prop_map(|pts| {
        let pts: Vec<Vec<Q>> = pts.into_iter().map(|p| p.into_iter().map(Q::int).collect()).collect();
        make_body("random", pts).unwrap()
    })
}

/// Convex weights from positive integers.
pub fn weights(n: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::vec(0i64..=5, n).prop_map(|w| {
        let total: i64 = w.iter().sum();
        if total == 0 {
            let mut out = vec![Q::int(0); w.len()];
            out[0] = Q::int(1);
            out
        } else {
            w.into_iter().map(|x| Q::ratio(x, total)).collect()
        }
    })
}

/// Point of `body` given by a weight pattern over its vertices (cycled if too short).
pub fn point_in(body: &ConvexBody<Q>, w: &[Q]) -> Vec<Q> {
    let n = body.num_vertices();
    let mut weights = vec![Q::int(0); n];
    for (i, x) in w.iter().enumerate() {
        weights[i % n] = weights[i % n].clone() + x.clone();
    }
    linalg::combination(&weights, body.vertices(), body.ambient_dim())
}

/// The eight symmetries of the unit square as affine maps.
pub fn square_symmetries(sq: &ConvexBody<Q>) -> Vec<LinearMap<Q>> {
    let mut out = Vec::new();
    for swap in [false, true] {
        for fx in [false, true] {
            for fy in [false, true] {
                let (a, b) = if swap { ((0, 1), (1, 0)) } else { ((1, 0), (0, 1)) };
                let sx = if fx { -1 } else { 1 };
                let sy = if fy { -1 } else { 1 };
                let m = Matrix::from_rows(
                    vec![vec![Q::int(sx * a.0), Q::int(sx * a.1)], vec![Q::int(sy * b.0), Q::int(sy * b.1)]],
                    2,
                )
                .unwrap();
                let off = vec![Q::int(fx as i64), Q::int(fy as i64)];
                out.push(LinearMap::affine(sq.clone(), sq.clone(), &m, &off).unwrap());
            }
        }
    }
    out
}

/// A convex mixture of symmetries and a constant map: always a valid transformation.
pub fn mixture(sq: &ConvexBody<Q>, w: &[Q], target: &[Q]) -> LinearMap<Q> {
    let syms = square_symmetries(sq);
    let constant = LinearMap::affine(sq.clone(), sq.clone(), &Matrix::zeros(2, 2), target).unwrap();
    let mut m: Matrix<Q> = Matrix::zeros(3, 3);
    for (k, map) in syms.iter().chain([&constant]).enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = m[(i, j)].clone() + w[k].clone() * map.matrix[(i, j)].clone();
            }
        }
    }
    LinearMap::new(sq.clone(), sq.clone(), m).unwrap()
}
