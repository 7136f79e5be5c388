//! Plain-text mesh dump.
//!
//! ```text
//! vertices N triangles M
//! x y                  (N lines)
//! v1 v2 v3 refedge     (M lines, refedge = local vertex opposite the reference edge)
//! v1 v2 marker         (one line per boundary edge, 1 = Dirichlet, 2 = Neumann)
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{edge_key, BoundaryMarker, Mesh};
use crate::error::{Error, Result};

impl Mesh {
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "vertices {} triangles {}", self.n_vertices(), self.n_triangles())?;
        for p in self.vertices() {
            writeln!(w, "{:.16e} {:.16e}", p[0], p[1])?;
        }
        for t in self.triangles() {
            writeln!(w, "{} {} {} 3", t[0], t[1], t[2])?;
        }
        for (&(a, b), m) in self.boundary() {
            writeln!(w, "{a} {b} {}", m.code())?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Mesh> {
        let parse_err = |line: usize, message: &str| Error::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let header = header?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "vertices" || h[2] != "triangles" {
            return Err(parse_err(1, "expected 'vertices N triangles M'"));
        }
        let nv: usize = h[1].parse().map_err(|_| parse_err(1, "bad vertex count"))?;
        let nt: usize = h[3].parse().map_err(|_| parse_err(1, "bad triangle count"))?;

        let mut vertices = Vec::with_capacity(nv);
        let mut triangles = Vec::with_capacity(nt);
        let mut boundary = BTreeMap::new();
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            if vertices.len() < nv {
                if f.len() != 2 {
                    return Err(parse_err(lineno, "expected 'x y'"));
                }
                let x: f64 = f[0].parse().map_err(|_| parse_err(lineno, "bad coordinate"))?;
                let y: f64 = f[1].parse().map_err(|_| parse_err(lineno, "bad coordinate"))?;
                vertices.push([x, y]);
            } else if triangles.len() < nt {
                let ids: Vec<usize> = f
                    .iter()
                    .map(|s| s.parse().map_err(|_| parse_err(lineno, "bad index")))
                    .collect::<Result<_>>()?;
                if ids.len() != 4 || !(1..=3).contains(&ids[3]) {
                    return Err(parse_err(lineno, "expected 'v1 v2 v3 refedge'"));
                }
                let r = ids[3] - 1;
                triangles.push([ids[(r + 1) % 3], ids[(r + 2) % 3], ids[r]]);
            } else {
                if f.len() != 3 {
                    return Err(parse_err(lineno, "expected 'v1 v2 marker'"));
                }
                let a: usize = f[0].parse().map_err(|_| parse_err(lineno, "bad index"))?;
                let b: usize = f[1].parse().map_err(|_| parse_err(lineno, "bad index"))?;
                let code: u8 = f[2].parse().map_err(|_| parse_err(lineno, "bad marker"))?;
                let marker = BoundaryMarker::from_code(code).ok_or_else(|| parse_err(lineno, "unknown marker"))?;
                boundary.insert(edge_key(a, b), marker);
            }
        }
        if vertices.len() != nv || triangles.len() != nt {
            return Err(parse_err(0, "file ended early"));
        }
        let mesh = Mesh::from_raw(vertices, triangles, boundary, 0)?;
        mesh.validate()?;
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, refine_leb, DomainKind};

    #[test]
    fn dump_is_lossless() {
        let m = generate_structured(DomainKind::Slit(0.005), 1).unwrap();
        let (m, _) = refine_leb(&m, &[3, 7]).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = Mesh::read_text(&buf[..]).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary(), m.boundary());
    }

    #[test]
    fn rejects_truncated_input() {
        let text = "vertices 3 triangles 1\n0 0\n1 0\n";
        assert!(Mesh::read_text(text.as_bytes()).is_err());
    }
}
