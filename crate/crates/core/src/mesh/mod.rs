//! Triangulations with reference-edge bookkeeping.
//!
//! Triangles are stored counterclockwise as vertex triples `[a, b, c]` whose
//! reference edge is `(a, b)`, i.e. the edge opposite the third local vertex.
//! Local edge `i` is the edge opposite local vertex `i`, so local edge 2 is
//! always the reference edge.

mod edges;
mod generate;
mod io;
mod refine;

use std::collections::BTreeMap;

pub use edges::EdgeTable;
pub use generate::{generate_structured, DomainKind};
pub(crate) use generate::segment_distance;
pub use refine::{refine_leb, uniform_refine, UniformMode};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryMarker {
    Dirichlet,
    Neumann,
}

impl BoundaryMarker {
    pub fn code(self) -> u8 {
        match self {
            BoundaryMarker::Dirichlet => 1,
            BoundaryMarker::Neumann => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(BoundaryMarker::Dirichlet),
            2 => Some(BoundaryMarker::Neumann),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: BTreeMap<(usize, usize), BoundaryMarker>,
    generation: usize,
}

#[inline]
pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
pub(crate) fn signed_double_area(p: Point, q: Point, r: Point) -> f64 {
    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
}

#[inline]
pub(crate) fn dist2(p: Point, q: Point) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    dx * dx + dy * dy
}

#[inline]
pub(crate) fn midpoint(p: Point, q: Point) -> Point {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

/// Rotates `tri` so that its longest edge becomes the reference edge.
///
/// Ties between equally long edges go to the edge whose sorted vertex-id pair
/// is lexicographically smallest.
pub(crate) fn with_longest_reference(vertices: &[Point], tri: [usize; 3]) -> [usize; 3] {
    let mut best = 2;
    let mut best_len = -1.0;
    let mut best_key = (usize::MAX, usize::MAX);
    for i in 0..3 {
        let a = tri[(i + 1) % 3];
        let b = tri[(i + 2) % 3];
        let len = dist2(vertices[a], vertices[b]);
        let key = edge_key(a, b);
        if len > best_len || (len == best_len && key < best_key) {
            best = i;
            best_len = len;
            best_key = key;
        }
    }
    // local vertex `best` is opposite the chosen edge; move it to slot 2
    [tri[(best + 1) % 3], tri[(best + 2) % 3], tri[best]]
}

impl Mesh {
    /// Builds a mesh, marking every edge that belongs to a single triangle
    /// with `marker`.
    pub fn from_parts(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, marker: BoundaryMarker) -> Result<Self> {
        let mut mesh = Mesh {
            vertices,
            triangles,
            boundary: BTreeMap::new(),
            generation: 0,
        };
        let table = EdgeTable::new(&mesh);
        for (e, pair) in table.edges().iter().enumerate() {
            if table.is_boundary(e) {
                mesh.boundary.insert((pair[0], pair[1]), marker);
            }
        }
        mesh.check_orientation()?;
        Ok(mesh)
    }

    pub fn from_raw(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: BTreeMap<(usize, usize), BoundaryMarker>,
        generation: usize,
    ) -> Result<Self> {
        let mesh = Mesh {
            vertices,
            triangles,
            boundary,
            generation,
        };
        mesh.check_orientation()?;
        Ok(mesh)
    }

    fn check_orientation(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::InvalidArgument(format!("triangle {t} references a missing vertex")));
            }
            let [a, b, c] = *tri;
            if signed_double_area(self.vertices[a], self.vertices[b], self.vertices[c]) <= 0.0 {
                return Err(Error::DegenerateTriangle(t));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &BTreeMap<(usize, usize), BoundaryMarker> {
        &self.boundary
    }

    pub fn boundary_marker(&self, a: usize, b: usize) -> Option<BoundaryMarker> {
        self.boundary.get(&edge_key(a, b)).copied()
    }

    /// Replaces the marker of every boundary edge selected by `select`.
    pub fn set_boundary_markers(&mut self, mut select: impl FnMut(Point, Point) -> Option<BoundaryMarker>) {
        for (&(a, b), marker) in self.boundary.iter_mut() {
            if let Some(m) = select(self.vertices[a], self.vertices[b]) {
                *marker = m;
            }
        }
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn coords(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [p, q, r] = self.coords(t);
        0.5 * signed_double_area(p, q, r)
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.n_triangles() {
            let p = self.coords(t);
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (dist2(a, b).sqrt() * dist2(a, c).sqrt());
                min = min.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        min
    }

    /// Checks every structural invariant: orientation, conformity and
    /// boundary markers.
    pub fn validate(&self) -> Result<()> {
        self.check_orientation()?;
        let table = EdgeTable::new(self);
        if let Some(e) = table.overloaded_edge() {
            return Err(Error::InvalidArgument(format!("edge {:?} is shared by more than two triangles", table.edges()[e])));
        }
        let coords: std::collections::HashSet<(u64, u64)> =
            self.vertices.iter().map(|p| (p[0].to_bits(), p[1].to_bits())).collect();
        for (e, pair) in table.edges().iter().enumerate() {
            let key = (pair[0], pair[1]);
            let boundary = table.is_boundary(e);
            match (boundary, self.boundary.contains_key(&key)) {
                (true, false) => {
                    return Err(Error::InvalidArgument(format!("edge {key:?} has one neighbour but no boundary marker")));
                }
                (false, true) => {
                    return Err(Error::InvalidArgument(format!("interior edge {key:?} carries a boundary marker")));
                }
                _ => {}
            }
            if boundary {
                let m = midpoint(self.vertices[key.0], self.vertices[key.1]);
                if coords.contains(&(m[0].to_bits(), m[1].to_bits())) {
                    return Err(Error::InvalidArgument(format!("hanging node on edge {key:?}")));
                }
            }
        }
        if self.boundary.len() != table.edges().iter().enumerate().filter(|(e, _)| table.is_boundary(*e)).count() {
            return Err(Error::InvalidArgument("boundary markers reference missing edges".into()));
        }
        Ok(())
    }
}
