use std::io::Write;

use super::FieldSolution;
use crate::error::Result;

impl FieldSolution {
    /// Writes `dofs N` followed by one `x y value` line per dof.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let coords = self.space.dof_coords();
        writeln!(w, "dofs {}", coords.len())?;
        for (p, v) in coords.iter().zip(&self.values) {
            writeln!(w, "{:.16e} {:.16e} {:.16e}", p[0], p[1], v)?;
        }
        Ok(())
    }

    /// Legacy ASCII VTK file with the vertex values as point data.
    pub fn write_vtk<W: Write>(&self, mut w: W, name: &str) -> Result<()> {
        let mesh = self.space.mesh();
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "{name}")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", mesh.n_vertices())?;
        for p in mesh.vertices() {
            writeln!(w, "{:.16e} {:.16e} 0", p[0], p[1])?;
        }
        writeln!(w, "CELLS {} {}", mesh.n_triangles(), 4 * mesh.n_triangles())?;
        for t in mesh.triangles() {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "CELL_TYPES {}", mesh.n_triangles())?;
        for _ in 0..mesh.n_triangles() {
            writeln!(w, "5")?;
        }
        writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &self.values[..mesh.n_vertices()] {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use crate::fem::{FeSpace, FieldSolution, Order};
    use crate::mesh::{generate_structured, DomainKind};

    #[test]
    fn text_dump_has_one_line_per_dof() {
        let mesh = Arc::new(generate_structured(DomainKind::Square, 0).unwrap());
        let space = Arc::new(FeSpace::new(mesh, Order::P2));
        let values = (0..space.n_dofs()).map(|i| i as f64 / 3.0).collect();
        let sol = FieldSolution { space, values };
        let mut buf = Vec::new();
        sol.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "dofs 25");
        assert_eq!(lines.len(), 26);
        let v: f64 = lines[2].split_whitespace().nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }
}
