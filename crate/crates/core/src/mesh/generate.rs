use super::{with_longest_reference, BoundaryMarker, Mesh, Point};
use crate::error::{Error, Result};

/// The computational domains available to the structured generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// (-1,1)^2
    Square,
    /// (-1,1)^2 without (-1,0]^2
    LShaped,
    /// (-1,1)^2 without the closed triangle conv{(0,0), (-1,d), (-1,-d)}
    Slit(f64),
}

impl DomainKind {
    fn check(self) -> Result<()> {
        if let DomainKind::Slit(d) = self {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::InvalidDomain(format!("slit half-width must lie in (0,1), got {d}")));
            }
        }
        Ok(())
    }

    /// Counterclockwise boundary polygon.
    pub fn boundary_polygon(self) -> Vec<Point> {
        match self {
            DomainKind::Square => vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
            DomainKind::LShaped => vec![[0.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, 0.0], [0.0, 0.0]],
            DomainKind::Slit(d) => vec![
                [-1.0, -1.0],
                [1.0, -1.0],
                [1.0, 1.0],
                [-1.0, 1.0],
                [-1.0, d],
                [0.0, 0.0],
                [-1.0, -d],
            ],
        }
    }

    pub fn contains(self, p: Point) -> bool {
        let poly = self.boundary_polygon();
        let mut inside = false;
        let n = poly.len();
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the domain boundary.
    pub fn distance_to_boundary(self, p: Point) -> f64 {
        let poly = self.boundary_polygon();
        let n = poly.len();
        (0..n)
            .map(|i| segment_distance(p, poly[i], poly[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    let q = [a[0] + s * d[0] - p[0], a[1] + s * d[1] - p[1]];
    (q[0] * q[0] + q[1] * q[1]).sqrt()
}

/// Structured right-angled triangulation of `domain`.
///
/// Each quadrant of (-1,1)^2 carries a `2^level × 2^level` grid of squares
/// whose diagonals point towards the origin. The square at level 0 has 8
/// triangles, the L-shape 6; every level multiplies the count by 4. All
/// boundary edges are Dirichlet.
pub fn generate_structured(domain: DomainKind, level: u32) -> Result<Mesh> {
    domain.check()?;
    if level > 12 {
        return Err(Error::InvalidArgument(format!("level {level} is too large")));
    }
    let n = 1usize << level;
    let side = 2 * n + 1;
    let h = 1.0 / n as f64;
    let coord = |i: usize| -1.0 + i as f64 * h;

    let mut vertices: Vec<Point> = Vec::new();
    let mut id = vec![usize::MAX; side * side];
    // lower copies of slit vertices, indexed by grid column
    let mut lower = vec![usize::MAX; side];
    let keep_cell = |ci: usize, cj: usize| !(domain == DomainKind::LShaped && ci < n && cj < n);
    let used = |i: usize, j: usize| -> bool {
        let cells = [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)];
        cells.iter().any(|&(ci, cj)| ci < 2 * n && cj < 2 * n && keep_cell(ci, cj))
    };
    for j in 0..side {
        for i in 0..side {
            if !used(i, j) {
                continue;
            }
            let (x, y) = (coord(i), coord(j));
            match domain {
                DomainKind::Slit(d) if j == n && i < n => {
                    id[j * side + i] = vertices.len();
                    vertices.push([x, -d * x]);
                    lower[i] = vertices.len();
                    vertices.push([x, d * x]);
                }
                _ => {
                    id[j * side + i] = vertices.len();
                    vertices.push([x, y]);
                }
            }
        }
    }

    let mut triangles = Vec::with_capacity(8 * n * n);
    for cj in 0..2 * n {
        for ci in 0..2 * n {
            if !keep_cell(ci, cj) {
                continue;
            }
            let vid = |i: usize, j: usize| {
                if matches!(domain, DomainKind::Slit(_)) && j == n && i < n && cj < n {
                    lower[i]
                } else {
                    id[j * side + i]
                }
            };
            let p00 = vid(ci, cj);
            let p10 = vid(ci + 1, cj);
            let p11 = vid(ci + 1, cj + 1);
            let p01 = vid(ci, cj + 1);
            // quadrants I and III use the LL-UR diagonal
            let upper_right = ci >= n;
            let upper = cj >= n;
            if upper_right == upper {
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            } else {
                triangles.push([p00, p10, p01]);
                triangles.push([p10, p11, p01]);
            }
        }
    }
    for tri in triangles.iter_mut() {
        *tri = with_longest_reference(&vertices, *tri);
    }
    Mesh::from_parts(vertices, triangles, BoundaryMarker::Dirichlet)
}
