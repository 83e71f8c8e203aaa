//! Vertex-to-facet conversion by the double description method.
//!
//! The cone is first expressed in coordinates of its own linear span (the
//! pivot columns of the generators' row-echelon form), where it is
//! full-dimensional and pointed. Facets are then the extreme rays of the
//! dual cone, built by inserting one generator constraint at a time in
//! lexicographic order. Two rays are combined only if they are adjacent,
//! decided by the rank of their common tight constraints.

use fixedbitset::FixedBitSet;

use crate::linalg::{self, dot, Matrix};
use crate::scalar::Field;

/// Facet description of a cone: `facets[i] · x ≥ 0` and `equalities[j] · x = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HRep<F> {
    pub facets: Vec<Vec<F>>,
    pub equalities: Vec<Vec<F>>,
    /// For each facet, the generator indices where it is tight.
    pub incidence: Vec<Vec<usize>>,
    num_generators: usize,
}

impl<F: Field> HRep<F> {
    pub fn contains(&self, x: &[F]) -> bool {
        self.equalities.iter().all(|e| dot(e, x).is_zero()) && self.facets.iter().all(|h| !dot(h, x).is_negative())
    }

    /// Facet indices tight at `x`.
    pub fn tight_at(&self, x: &[F]) -> Vec<usize> {
        (0..self.facets.len()).filter(|&j| dot(&self.facets[j], x).is_zero()).collect()
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    /// Generators tight on every listed facet (all generators for an empty list).
    pub fn generators_on(&self, facets: &[usize]) -> Vec<usize> {
        let mut set = FixedBitSet::with_capacity(self.num_generators);
        set.insert_range(..);
        for &j in facets {
            let mut tight = FixedBitSet::with_capacity(self.num_generators);
            for &g in &self.incidence[j] {
                tight.insert(g);
            }
            set.intersect_with(&tight);
        }
        set.ones().collect()
    }

    /// Facets tight on every listed generator (all facets for an empty list).
    pub fn facets_on(&self, generators: &[usize]) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&j| generators.iter().all(|g| self.incidence[j].binary_search(g).is_ok()))
            .collect()
    }
}

struct DualRay<F> {
    h: Vec<F>,
    zero: FixedBitSet,
}

fn normalize<F: Field>(v: &mut [F]) {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
        for x in v.iter_mut() {
            *x = x.clone() / lead.clone();
        }
    }
}

/// Computes the irredundant H-representation of the cone spanned by `generators`.
pub fn double_description<F: Field>(generators: &[Vec<F>], dim: usize) -> HRep<F> {
    let m = generators.len();
    let gen_matrix = Matrix::from_rows(generators.to_vec(), dim).expect("uniform generator dimension");
    let equalities = gen_matrix.kernel();
    let (_, pivots) = gen_matrix.rref();
    let k = pivots.len();
    let projected: Vec<Vec<F>> = generators.iter().map(|g| pivots.iter().map(|&p| g[p].clone()).collect()).collect();

    let init = linalg::independent_subset(&projected, k);
    let base = Matrix::from_rows(init.iter().map(|&i| projected[i].clone()).collect(), k).expect("square");
    let inv = base.inverse().expect("independent generators");
    let mut rays: Vec<DualRay<F>> = (0..k)
        .map(|j| {
            let mut zero = FixedBitSet::with_capacity(m);
            for (t, &g) in init.iter().enumerate() {
                if t != j {
                    zero.insert(g);
                }
            }
            let mut h = inv.column(j);
            normalize(&mut h);
            DualRay { h, zero }
        })
        .collect();

    let needed = k as isize - 2;
    for i in (0..m).filter(|i| !init.contains(i)) {
        let row = &projected[i];
        let values: Vec<F> = rays.iter().map(|r| dot(row, &r.h)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&r| values[r].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&r| values[r].is_negative()).collect();
        let mut next: Vec<DualRay<F>> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let mut common = rays[p].zero.clone();
                common.intersect_with(&rays[n].zero);
                if (common.count_ones(..) as isize) < needed {
                    continue;
                }
                let dominated = rays.iter().enumerate().any(|(r, ray)| r != p && r != n && common.is_subset(&ray.zero));
                if dominated {
                    continue;
                }
                let tight: Vec<Vec<F>> = common.ones().map(|t| projected[t].clone()).collect();
                if linalg::rank_of(&tight, k) as isize != needed {
                    continue;
                }
                let mut h = linalg::sub(&linalg::scale(&values[p], &rays[n].h), &linalg::scale(&values[n], &rays[p].h));
                normalize(&mut h);
                common.insert(i);
                next.push(DualRay { h, zero: common });
            }
        }
        let old = std::mem::take(&mut rays);
        for (r, mut ray) in old.into_iter().enumerate() {
            if values[r].is_zero() {
                ray.zero.insert(i);
                rays.push(ray);
            } else if values[r].is_positive() {
                rays.push(ray);
            }
        }
        rays.extend(next);
    }

    let mut facets: Vec<Vec<F>> = rays
        .into_iter()
        .map(|r| {
            let mut full = vec![F::zero(); dim];
            for (j, &p) in pivots.iter().enumerate() {
                full[p] = r.h[j].clone();
            }
            normalize(&mut full);
            full
        })
        .collect();
    facets.sort();
    facets.dedup();
    let incidence = facets.iter().map(|h| (0..m).filter(|&g| dot(h, &generators[g]).is_zero()).collect()).collect();
    HRep { facets, equalities, incidence, num_generators: m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BigRational as Q;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| Q::int(x)).collect()
    }

    #[test]
    fn square_cone_facets() {
        // Supporting planes of the four rays (x, y, 1) over the unit square, found by hand.
        let rays = vec![v(&[0, 0, 1]), v(&[0, 1, 1]), v(&[1, 0, 1]), v(&[1, 1, 1])];
        let h = double_description(&rays, 3);
        let mut expected = vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[-1, 0, 1]), v(&[0, -1, 1])];
        expected.sort();
        assert_eq!(h.facets, expected);
        assert!(h.equalities.is_empty());
        for inc in &h.incidence {
            assert_eq!(inc.len(), 2);
        }
    }

    #[test]
    fn degenerate_span() {
        // A segment embedded in the plane: cone of dimension 2 inside R^3.
        let rays = vec![v(&[0, 0, 1]), v(&[1, 1, 1])];
        let h = double_description(&rays, 3);
        assert_eq!(h.facets.len(), 2);
        assert_eq!(h.equalities.len(), 1);
        assert!(h.contains(&v(&[1, 1, 2])));
        assert!(!h.contains(&v(&[1, 0, 2])));
    }

    #[test]
    fn single_ray() {
        let h = double_description(&[v(&[1])], 1);
        assert_eq!(h.facets, vec![v(&[1])]);
        assert!(h.incidence[0].is_empty());
    }
}
