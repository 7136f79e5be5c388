use std::collections::HashMap;

use super::{edge_key, midpoint, with_longest_reference, EdgeTable, Mesh, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformMode {
    Bisec3,
    Red,
}

struct Midpoints {
    map: HashMap<(usize, usize), usize>,
}

impl Midpoints {
    fn get(&mut self, vertices: &mut Vec<Point>, a: usize, b: usize) -> usize {
        *self.map.entry(edge_key(a, b)).or_insert_with(|| {
            vertices.push(midpoint(vertices[a], vertices[b]));
            vertices.len() - 1
        })
    }
}

/// Splits every boundary edge in `split` into its two halves.
fn split_boundary(mesh: &mut Mesh, split: &[(usize, usize)], mids: &Midpoints) {
    for key in split {
        if let Some(marker) = mesh.boundary.remove(key) {
            let m = mids.map[key];
            mesh.boundary.insert(edge_key(key.0, m), marker);
            mesh.boundary.insert(edge_key(m, key.1), marker);
        }
    }
}

/// Conforming newest-vertex/longest-edge bisection.
///
/// Every edge in `marked` (ids of `EdgeTable::new(mesh)`) is halved, together
/// with whatever closure is needed to keep the mesh conforming. Returns the
/// refined mesh and, for each output triangle, the input triangle it came
/// from. New vertices are appended, so input vertex ids are preserved.
pub fn refine_leb(mesh: &Mesh, marked: &[usize]) -> Result<(Mesh, Vec<usize>)> {
    let table = EdgeTable::new(mesh);
    if let Some(&bad) = marked.iter().find(|&&e| e >= table.len()) {
        return Err(Error::InvalidEdge(bad, table.len()));
    }
    if marked.is_empty() {
        return Ok((mesh.clone(), (0..mesh.n_triangles()).collect()));
    }
    let mut pending: Vec<(usize, usize)> = marked
        .iter()
        .map(|&e| {
            let [a, b] = table.edges()[e];
            (a, b)
        })
        .collect();
    pending.sort_unstable();
    pending.dedup();

    let mut out = mesh.clone();
    out.generation += 1;
    let mut parent: Vec<usize> = (0..mesh.n_triangles()).collect();
    let mut mids = Midpoints { map: HashMap::new() };
    let mut first_round = Some(table);

    while !pending.is_empty() {
        let table = first_round.take().unwrap_or_else(|| EdgeTable::new(&out));
        let mut split = vec![false; table.len()];
        let mut queue = Vec::new();
        for &(a, b) in &pending {
            if let Some(e) = table.find(a, b) {
                if !split[e] {
                    split[e] = true;
                    let (t0, t1) = table.triangles_of_edge(e);
                    queue.push(t0);
                    queue.extend(t1);
                }
            }
        }
        // closure: a triangle with any split edge must have its reference edge split
        while let Some(t) = queue.pop() {
            let r = table.edge_of_triangle(t, 2);
            if !split[r] {
                split[r] = true;
                let (t0, t1) = table.triangles_of_edge(r);
                queue.push(t0);
                queue.extend(t1);
            }
        }

        let mut triangles = Vec::with_capacity(out.triangles.len() + 16);
        let mut new_parent = Vec::with_capacity(out.triangles.len() + 16);
        let mut bisected = Vec::new();
        for (t, &tri) in out.triangles.iter().enumerate() {
            if split[table.edge_of_triangle(t, 2)] {
                let [a, b, c] = tri;
                let m = mids.get(&mut out.vertices, a, b);
                triangles.push(with_longest_reference(&out.vertices, [a, m, c]));
                triangles.push(with_longest_reference(&out.vertices, [m, b, c]));
                new_parent.push(parent[t]);
                new_parent.push(parent[t]);
                bisected.push(edge_key(a, b));
            } else {
                triangles.push(tri);
                new_parent.push(parent[t]);
            }
        }
        bisected.sort_unstable();
        bisected.dedup();
        split_boundary(&mut out, &bisected, &mids);
        out.triangles = triangles;
        parent = new_parent;

        // an edge bisected from one side only still exists on the other side
        let remaining = EdgeTable::new(&out);
        pending = table
            .edges()
            .iter()
            .enumerate()
            .filter(|&(e, [a, b])| split[e] && remaining.find(*a, *b).is_some())
            .map(|(_, &[a, b])| (a, b))
            .collect();
        first_round = Some(remaining);
    }
    Ok((out, parent))
}

/// Uniform refinement producing four children per triangle.
pub fn uniform_refine(mesh: &Mesh, mode: UniformMode) -> Mesh {
    match mode {
        UniformMode::Bisec3 => {
            let all: Vec<usize> = (0..EdgeTable::new(mesh).len()).collect();
            refine_leb(mesh, &all).expect("all edge ids are valid").0
        }
        UniformMode::Red => {
            let table = EdgeTable::new(mesh);
            let mut out = mesh.clone();
            out.generation += 1;
            let mut mids = Midpoints { map: HashMap::new() };
            for &[a, b] in table.edges() {
                mids.get(&mut out.vertices, a, b);
            }
            let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
            for &[a, b, c] in mesh.triangles() {
                let mab = mids.map[&edge_key(a, b)];
                let mbc = mids.map[&edge_key(b, c)];
                let mca = mids.map[&edge_key(c, a)];
                for child in [[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mab, mbc, mca]] {
                    triangles.push(with_longest_reference(&out.vertices, child));
                }
            }
            let all: Vec<(usize, usize)> = table.edges().iter().map(|&[a, b]| (a, b)).collect();
            split_boundary(&mut out, &all, &mids);
            out.triangles = triangles;
            out
        }
    }
}
