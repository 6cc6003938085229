//! First-order simplicial elements on the Kuhn split of the cell lattice.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::{DiscreteDomain, Point};
use crate::linalg::CsrMatrix;

const NO_NODE: u32 = u32::MAX;

/// One simplex of a cell: corner offsets and the gradient rule
/// `∇u = D · (u_{p_0}, …, u_{p_n})`.
#[derive(Debug, Clone, PartialEq)]
pub struct KuhnSimplex {
    /// Vertex offsets from the lower corner of the cell.
    pub offsets: Vec<[usize; 3]>,
    /// `n × (n+1)` differentiation matrix for unit `h`.
    pub grad: Vec<Vec<f64>>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// The `n!` simplices `p_k = p_{k−1} + e_{σ(k)}` of the unit cube.
pub fn kuhn_simplices(dim: usize) -> Vec<KuhnSimplex> {
    permutations(dim)
        .into_iter()
        .map(|sigma| {
            let mut offsets = vec![[0usize; 3]];
            let mut grad = vec![vec![0.0; dim + 1]; dim];
            for (k, &axis) in sigma.iter().enumerate() {
                let mut next = offsets[k];
                next[axis] += 1;
                offsets.push(next);
                grad[axis][k + 1] = 1.0;
                grad[axis][k] = -1.0;
            }
            KuhnSimplex { offsets, grad }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FeMesh {
    dim: usize,
    h: f64,
    node_counts: [usize; 3],
    nodes: Vec<[usize; 3]>,
    node_lookup: Vec<u32>,
    boundary: Vec<bool>,
    /// `2^n` corner nodes of each cell, lexicographic in the offsets.
    cell_nodes: Vec<Vec<usize>>,
    simplices: Vec<KuhnSimplex>,
    interior: Vec<usize>,
    boundary_nodes: Vec<usize>,
    cell_delta: Vec<f64>,
    origin: Point,
}

impl FeMesh {
    pub fn new(domain: &DiscreteDomain) -> Self {
        let dim = domain.dim();
        let counts = domain.counts();
        let mut node_counts = [1usize; 3];
        for k in 0..dim {
            node_counts[k] = counts[k] + 1;
        }
        let total = node_counts[0] * node_counts[1] * node_counts[2];
        let lin = |v: [usize; 3]| v[0] + node_counts[0] * (v[1] + node_counts[1] * v[2]);
        let corners: Vec<[usize; 3]> = (0..1usize << dim)
            .map(|c| std::array::from_fn(|k| if k < dim { (c >> k) & 1 } else { 0 }))
            .collect();
        let mut incidence = vec![0u8; total];
        for cell in domain.cells() {
            for off in &corners {
                let v: [usize; 3] = std::array::from_fn(|k| cell.index[k] + off[k]);
                incidence[lin(v)] += 1;
            }
        }
        let mut node_lookup = vec![NO_NODE; total];
        let mut nodes = Vec::new();
        let mut boundary = Vec::new();
        for l in 0..total {
            if incidence[l] > 0 {
                node_lookup[l] = nodes.len() as u32;
                nodes.push([
                    l % node_counts[0],
                    (l / node_counts[0]) % node_counts[1],
                    l / (node_counts[0] * node_counts[1]),
                ]);
                boundary.push(incidence[l] < (1u8 << dim));
            }
        }
        let cell_nodes = domain
            .cells()
            .iter()
            .map(|cell| {
                corners
                    .iter()
                    .map(|off| {
                        let v: [usize; 3] = std::array::from_fn(|k| cell.index[k] + off[k]);
                        node_lookup[lin(v)] as usize
                    })
                    .collect()
            })
            .collect();
        let interior = (0..nodes.len()).filter(|&i| !boundary[i]).collect();
        let boundary_nodes = (0..nodes.len()).filter(|&i| boundary[i]).collect();
        Self {
            dim,
            h: domain.h(),
            node_counts,
            nodes,
            node_lookup,
            boundary,
            cell_nodes,
            simplices: kuhn_simplices(dim),
            interior,
            boundary_nodes,
            cell_delta: domain.cells().iter().map(|c| c.delta).collect(),
            origin: domain.origin(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cell_nodes.len()
    }

    pub fn node_position(&self, i: usize) -> Point {
        let v = self.nodes[i];
        std::array::from_fn(|k| {
            if k < self.dim {
                self.origin[k] + v[k] as f64 * self.h
            } else {
                0.0
            }
        })
    }

    pub fn node_at(&self, v: [usize; 3]) -> Option<usize> {
        if (0..3).any(|k| v[k] >= self.node_counts[k]) {
            return None;
        }
        let l = v[0] + self.node_counts[0] * (v[1] + self.node_counts[1] * v[2]);
        match self.node_lookup[l] {
            NO_NODE => None,
            n => Some(n as usize),
        }
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn cell_nodes(&self, cell: usize) -> &[usize] {
        &self.cell_nodes[cell]
    }

    pub fn simplices(&self) -> &[KuhnSimplex] {
        &self.simplices
    }

    /// Global node ids of simplex `s` of `cell`.
    pub fn simplex_nodes(&self, cell: usize, s: usize) -> Vec<usize> {
        self.simplices[s]
            .offsets
            .iter()
            .map(|off| {
                let c = off[0] | (off[1] << 1) | (off[2] << 2);
                self.cell_nodes[cell][c]
            })
            .collect()
    }

    pub fn simplex_volume(&self) -> f64 {
        let fact: usize = (1..=self.dim).product();
        self.h.powi(self.dim as i32) / fact as f64
    }

    /// Gradient of `u` on simplex `s` of `cell`.
    pub fn simplex_gradient(&self, u: &[Complex64], cell: usize, s: usize) -> [Complex64; 3] {
        let ids = self.simplex_nodes(cell, s);
        let g = &self.simplices[s].grad;
        std::array::from_fn(|a| {
            if a >= self.dim {
                return Complex64::new(0.0, 0.0);
            }
            ids.iter()
                .enumerate()
                .map(|(j, &n)| u[n] * g[a][j])
                .sum::<Complex64>()
                / self.h
        })
    }

    /// Mean of the simplex gradients of a cell.
    pub fn cell_gradient(&self, u: &[Complex64], cell: usize) -> [Complex64; 3] {
        let m = self.simplices.len() as f64;
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for s in 0..self.simplices.len() {
            let g = self.simplex_gradient(u, cell, s);
            for a in 0..3 {
                acc[a] += g[a];
            }
        }
        acc.map(|v| v / m)
    }

    /// Mean of the `2^n` corner values.
    pub fn cell_value(&self, u: &[Complex64], cell: usize) -> Complex64 {
        let ids = &self.cell_nodes[cell];
        ids.iter().map(|&n| u[n]).sum::<Complex64>() / ids.len() as f64
    }

    /// Assembles `Σ_cells Σ_simplices local(cell, D, |T|)` where `local`
    /// returns an `(n+1)²` row-major block; blocks are merged in cell order.
    pub fn assemble<F>(&self, local: F) -> CsrMatrix
    where
        F: Fn(usize, &KuhnSimplex, f64) -> Vec<Complex64> + Sync,
    {
        let vol = self.simplex_volume();
        let m = self.dim + 1;
        let blocks: Vec<Vec<(usize, usize, Complex64)>> = (0..self.cell_count())
            .into_par_iter()
            .map(|cell| {
                let mut out = Vec::with_capacity(self.simplices.len() * m * m);
                for (s, simplex) in self.simplices.iter().enumerate() {
                    let ids = self.simplex_nodes(cell, s);
                    let block = local(cell, simplex, vol);
                    for i in 0..m {
                        for j in 0..m {
                            let v = block[i * m + j];
                            if v != Complex64::new(0.0, 0.0) {
                                out.push((ids[i], ids[j], v));
                            }
                        }
                    }
                }
                out
            })
            .collect();
        let n = self.node_count();
        CsrMatrix::from_triplets(n, n, blocks.into_iter().flatten().collect())
            .expect("mesh node ids are in range")
    }

    /// `∫ ∇φ_j · ∇φ_i`, the gradient Gram matrix on all nodes.
    pub fn laplace_stiffness(&self) -> CsrMatrix {
        let (dim, h) = (self.dim, self.h);
        self.assemble(|_, simplex, vol| {
            let m = dim + 1;
            let mut k = vec![Complex64::new(0.0, 0.0); m * m];
            for i in 0..m {
                for j in 0..m {
                    let s: f64 = (0..dim).map(|a| simplex.grad[a][i] * simplex.grad[a][j]).sum();
                    k[i * m + j] = Complex64::new(vol * s / (h * h), 0.0);
                }
            }
            k
        })
    }

    /// Quadrature matrix of `∫ |w|²/δ²`: simplex-mean values against the
    /// cell-center distance.
    pub fn hardy_matrix(&self) -> CsrMatrix {
        let m = self.dim + 1;
        let w = 1.0 / (m * m) as f64;
        self.assemble(|cell, _, vol| {
            let d = self.cell_delta[cell];
            vec![Complex64::new(vol * w / (d * d), 0.0); m * m]
        })
    }

    /// Lumped mass `h^n` per node (cells contribute `h^n/2^n` per corner).
    pub fn lumped_mass(&self) -> Vec<f64> {
        let share = self.h.powi(self.dim as i32) / (1usize << self.dim) as f64;
        let mut m = vec![0.0; self.node_count()];
        for nodes in &self.cell_nodes {
            for &n in nodes {
                m[n] += share;
            }
        }
        m
    }

    pub fn cell_delta(&self, cell: usize) -> f64 {
        self.cell_delta[cell]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainPreset;

    #[test]
    fn kuhn_counts() {
        assert_eq!(kuhn_simplices(2).len(), 2);
        assert_eq!(kuhn_simplices(3).len(), 6);
        for s in kuhn_simplices(3) {
            let last = s.offsets.last().unwrap();
            assert_eq!(*last, [1, 1, 1]);
            // Gradient of a constant vanishes.
            for row in &s.grad {
                assert_eq!(row.iter().sum::<f64>(), 0.0);
            }
        }
    }

    #[test]
    fn five_point_stencil() {
        let d = DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, 0.25).unwrap();
        let mesh = FeMesh::new(&d);
        assert_eq!(mesh.node_count(), 25);
        assert_eq!(mesh.interior_nodes().len(), 9);
        let g = mesh.laplace_stiffness();
        let c = mesh.node_at([2, 2, 0]).unwrap();
        assert!((g.get(c, c).re - 4.0).abs() < 1e-14);
        assert!((g.get(c, mesh.node_at([1, 2, 0]).unwrap()).re + 1.0).abs() < 1e-14);
        assert_eq!(g.get(c, mesh.node_at([1, 1, 0]).unwrap()).norm(), 0.0);
        let ones = vec![Complex64::new(1.0, 0.0); mesh.node_count()];
        assert!(g.matvec(&ones).iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn seven_point_stencil() {
        let d = DiscreteDomain::build(&DomainPreset::Cube { side: 1.0 }, 0.25).unwrap();
        let mesh = FeMesh::new(&d);
        let g = mesh.laplace_stiffness();
        let c = mesh.node_at([2, 2, 2]).unwrap();
        let h = 0.25;
        assert!((g.get(c, c).re - 6.0 * h).abs() < 1e-14);
        assert!((g.get(c, mesh.node_at([2, 2, 1]).unwrap()).re + h).abs() < 1e-14);
        assert_eq!(g.get(c, mesh.node_at([1, 1, 1]).unwrap()).norm(), 0.0);
    }

    #[test]
    fn gradients_of_linear_functions() {
        let d = DiscreteDomain::build(&DomainPreset::LShape, 1.0 / 8.0).unwrap();
        let mesh = FeMesh::new(&d);
        let u: Vec<Complex64> = (0..mesh.node_count())
            .map(|i| {
                let p = mesh.node_position(i);
                Complex64::new(2.0 * p[0] - p[1], p[1])
            })
            .collect();
        for cell in 0..mesh.cell_count() {
            let g = mesh.cell_gradient(&u, cell);
            assert!((g[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
            assert!((g[1] - Complex64::new(-1.0, 1.0)).norm() < 1e-12);
        }
    }
}
