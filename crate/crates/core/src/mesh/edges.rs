use super::{edge_key, Mesh};

/// Edge connectivity of a mesh.
///
/// Edges are numbered in lexicographic order of their sorted vertex pairs,
/// which makes the numbering independent of the triangle order.
#[derive(Debug, Clone)]
pub struct EdgeTable {
    edges: Vec<[usize; 2]>,
    edge_of_triangle: Vec<[usize; 3]>,
    triangles_of_edge: Vec<[usize; 2]>,
    overloaded: Option<usize>,
}

const NONE: usize = usize::MAX;

impl EdgeTable {
    pub fn new(mesh: &Mesh) -> Self {
        let tris = mesh.triangles();
        let mut items: Vec<(usize, usize, u32, u8)> = Vec::with_capacity(3 * tris.len());
        for (t, tri) in tris.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3]);
                items.push((a, b, t as u32, i as u8));
            }
        }
        items.sort_unstable();

        let mut edges = Vec::with_capacity(items.len() / 2 + 1);
        let mut edge_of_triangle = vec![[NONE; 3]; tris.len()];
        let mut triangles_of_edge: Vec<[usize; 2]> = Vec::with_capacity(items.len() / 2 + 1);
        let mut overloaded = None;
        for &(a, b, t, i) in &items {
            let new_edge = edges.last().map_or(true, |e: &[usize; 2]| e[0] != a || e[1] != b);
            if new_edge {
                edges.push([a, b]);
                triangles_of_edge.push([t as usize, NONE]);
            } else {
                let slot = triangles_of_edge.last_mut().unwrap();
                if slot[1] == NONE {
                    slot[1] = t as usize;
                } else if overloaded.is_none() {
                    overloaded = Some(edges.len() - 1);
                }
            }
            edge_of_triangle[t as usize][i as usize] = edges.len() - 1;
        }
        EdgeTable {
            edges,
            edge_of_triangle,
            triangles_of_edge,
            overloaded,
        }
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edge id of local edge `local` (opposite local vertex `local`) of triangle `t`.
    pub fn edge_of_triangle(&self, t: usize, local: usize) -> usize {
        self.edge_of_triangle[t][local]
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.edge_of_triangle[t]
    }

    /// The one or two triangles sharing edge `e`.
    pub fn triangles_of_edge(&self, e: usize) -> (usize, Option<usize>) {
        let [a, b] = self.triangles_of_edge[e];
        (a, if b == NONE { None } else { Some(b) })
    }

    /// The triangle across edge `e` from triangle `t`, if any.
    pub fn neighbour(&self, e: usize, t: usize) -> Option<usize> {
        let [a, b] = self.triangles_of_edge[e];
        let other = if a == t { b } else { a };
        (other != NONE).then_some(other)
    }

    pub fn is_boundary(&self, e: usize) -> bool {
        self.triangles_of_edge[e][1] == NONE
    }

    /// Looks up the id of the edge joining vertices `a` and `b`.
    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        let (a, b) = edge_key(a, b);
        self.edges.binary_search(&[a, b]).ok()
    }

    pub(crate) fn overloaded_edge(&self) -> Option<usize> {
        self.overloaded
    }
}
