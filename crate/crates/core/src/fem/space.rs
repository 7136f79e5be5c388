use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::mesh::{midpoint, BoundaryMarker, EdgeTable, Mesh, Point};

use super::element::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    P1,
    P2,
}

impl Order {
    pub fn local_dofs(self) -> usize {
        match self {
            Order::P1 => 3,
            Order::P2 => 6,
        }
    }
}

/// Continuous piecewise polynomial space on a mesh.
///
/// Dofs are the mesh vertices in mesh order followed, for P2, by the edge
/// midpoints in edge-table order. Local P2 dof `3 + i` sits on the edge
/// opposite local vertex `i`. Dofs on Dirichlet edges are fixed.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    edges: EdgeTable,
    order: Order,
    n_dofs: usize,
    fixed: Vec<bool>,
    free: Vec<usize>,
    free_pos: Vec<usize>,
    locator: OnceLock<PointLocator>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, order: Order) -> Self {
        let edges = EdgeTable::new(&mesh);
        let nv = mesh.n_vertices();
        let n_dofs = match order {
            Order::P1 => nv,
            Order::P2 => nv + edges.len(),
        };
        let mut fixed = vec![false; n_dofs];
        for (e, &[a, b]) in edges.edges().iter().enumerate() {
            if mesh.boundary_marker(a, b) == Some(BoundaryMarker::Dirichlet) {
                fixed[a] = true;
                fixed[b] = true;
                if order == Order::P2 {
                    fixed[nv + e] = true;
                }
            }
        }
        let free: Vec<usize> = (0..n_dofs).filter(|&i| !fixed[i]).collect();
        let mut free_pos = vec![usize::MAX; n_dofs];
        for (k, &i) in free.iter().enumerate() {
            free_pos[i] = k;
        }
        FeSpace {
            mesh,
            edges,
            order,
            n_dofs,
            fixed,
            free,
            free_pos,
            locator: OnceLock::new(),
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn edges(&self) -> &EdgeTable {
        &self.edges
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Number of free (non-Dirichlet) dofs.
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Position of dof `i` among the free dofs, `usize::MAX` if fixed.
    pub fn free_pos(&self) -> &[usize] {
        &self.free_pos
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed[i]
    }

    /// Global dofs of triangle `t`; only the first `order.local_dofs()` are meaningful.
    #[inline]
    pub fn dofs(&self, t: usize) -> [usize; 6] {
        let [a, b, c] = self.mesh.triangles()[t];
        match self.order {
            Order::P1 => [a, b, c, 0, 0, 0],
            Order::P2 => {
                let nv = self.mesh.n_vertices();
                let e = self.edges.triangle_edges(t);
                [a, b, c, nv + e[0], nv + e[1], nv + e[2]]
            }
        }
    }

    pub fn dof_coords(&self) -> Vec<Point> {
        let mut p = self.mesh.vertices().to_vec();
        if self.order == Order::P2 {
            let v = self.mesh.vertices();
            p.extend(self.edges.edges().iter().map(|&[a, b]| midpoint(v[a], v[b])));
        }
        p
    }

    pub fn geometry(&self, t: usize) -> Geometry {
        Geometry::new(self.mesh.coords(t))
    }

    /// Nodal interpolant of `g` (values at dof coordinates).
    pub fn interpolate(&self, g: &dyn Fn(Point) -> f64) -> Vec<f64> {
        self.dof_coords().into_iter().map(g).collect()
    }

    /// Locates the triangle containing `x` and its barycentric coordinates.
    pub fn locate(&self, x: Point) -> Result<(usize, [f64; 3])> {
        self.locator.get_or_init(|| PointLocator::new(&self.mesh)).locate(&self.mesh, x)
    }
}

/// Uniform bucket grid over the mesh bounding box.
#[derive(Debug)]
pub(crate) struct PointLocator {
    origin: Point,
    cell: [f64; 2],
    n: [usize; 2],
    start: Vec<usize>,
    items: Vec<usize>,
}

impl PointLocator {
    pub(crate) fn new(mesh: &Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let side = ((mesh.n_triangles() as f64).sqrt().ceil() as usize).max(1);
        let n = [side, side];
        let cell = [((hi[0] - lo[0]) / side as f64).max(1e-300), ((hi[1] - lo[1]) / side as f64).max(1e-300)];
        let cell_of = |x: f64, d: usize| (((x - lo[d]) / cell[d]).floor().max(0.0) as usize).min(n[d] - 1);
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(2 * mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            let p = mesh.coords(t);
            let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
            for q in p {
                i0 = i0.min(cell_of(q[0], 0));
                i1 = i1.max(cell_of(q[0], 0));
                j0 = j0.min(cell_of(q[1], 1));
                j1 = j1.max(cell_of(q[1], 1));
            }
            for j in j0..=j1 {
                for i in i0..=i1 {
                    pairs.push((j * n[0] + i, t));
                }
            }
        }
        pairs.sort_unstable();
        let mut start = vec![0; n[0] * n[1] + 1];
        for &(c, _) in &pairs {
            start[c + 1] += 1;
        }
        for c in 0..n[0] * n[1] {
            start[c + 1] += start[c];
        }
        PointLocator {
            origin: lo,
            cell,
            n,
            start,
            items: pairs.into_iter().map(|(_, t)| t).collect(),
        }
    }

    pub(crate) fn locate(&self, mesh: &Mesh, x: Point) -> Result<(usize, [f64; 3])> {
        let tol = 1e-12;
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        let consider = |best: &mut Option<(f64, usize, [f64; 3])>, t: usize| {
            let l = Geometry::new(mesh.coords(t)).barycentric(x);
            let m = l[0].min(l[1]).min(l[2]);
            if best.map_or(true, |b| m > b.0) {
                *best = Some((m, t, l));
            }
        };
        let ci = ((x[0] - self.origin[0]) / self.cell[0]).floor();
        let cj = ((x[1] - self.origin[1]) / self.cell[1]).floor();
        let i = ci.clamp(0.0, (self.n[0] - 1) as f64) as usize;
        let j = cj.clamp(0.0, (self.n[1] - 1) as f64) as usize;
        let c = j * self.n[0] + i;
        for &t in &self.items[self.start[c]..self.start[c + 1]] {
            consider(&mut best, t);
        }
        if best.map_or(true, |b| b.0 < -tol) {
            for t in 0..mesh.n_triangles() {
                consider(&mut best, t);
            }
        }
        match best {
            Some((m, t, l)) if m >= -1e-10 => Ok((t, l)),
            _ => Err(Error::PointOutsideMesh(x[0], x[1])),
        }
    }
}
