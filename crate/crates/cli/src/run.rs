use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use tifiss_core::adapt::{adaptive_solve, AdaptiveReport};
use tifiss_core::goal::goafem_solve;
use tifiss_core::sgfem::adaptive_sgfem;

use crate::config::Job;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn write_with(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> tifiss_core::Result<()>) -> Result<()> {
    let mut w = create(dir, name)?;
    f(&mut w).with_context(|| format!("writing {name}"))?;
    w.flush()?;
    Ok(())
}

fn strip_timings(report: &AdaptiveReport) -> AdaptiveReport {
    let mut r = report.clone();
    for rec in &mut r.records {
        rec.t_solve = 0.0;
        rec.t_estimate = 0.0;
        rec.t_mark = 0.0;
        rec.t_refine = 0.0;
    }
    r
}

/// Runs `job`, writes the artifacts into `out` and returns the summary line.
pub fn execute(job: Job, out: &Path, timings: bool) -> Result<String> {
    match job {
        Job::Deterministic { problem, mesh, config, probe } => {
            let res = adaptive_solve(&problem, mesh, &config).context("adaptive loop")?;
            let probe_value = probe.map(|p| res.solution().evaluate(p).context("point evaluation")).transpose()?;
            std::fs::create_dir_all(out)?;
            let report = if timings { res.report.clone() } else { strip_timings(&res.report) };
            write_with(out, "history.csv", |w| report.write_csv(w))?;
            write_with(out, "final_mesh.txt", |w| res.mesh().write_text(w))?;
            write_with(out, "final_solution.txt", |w| res.solution().write_text(w))?;
            let last = res.report.records.last().expect("at least one iteration");
            let mut line = format!("L = {}, eta_L = {:.4e}, #T_L = {}, n_L = {}", last.iter, last.eta, last.elements, last.dofs);
            if let (Some(p), Some(v)) = (probe, probe_value) {
                line += &format!(", u({}, {}) = {v:.11}", p[0], p[1]);
            }
            Ok(line)
        }
        Job::Goafem { problem, goal, mesh, config } => {
            let res = goafem_solve(&problem, &goal, mesh, &config).context("goal-oriented adaptive loop")?;
            std::fs::create_dir_all(out)?;
            write_with(out, "history.csv", |w| res.report.write_csv(w))?;
            write_with(out, "final_mesh.txt", |w| res.mesh().write_text(w))?;
            write_with(out, "final_solution.txt", |w| res.primal.write_text(w))?;
            write_with(out, "final_dual.txt", |w| res.dual.write_text(w))?;
            let last = res.report.records.last().expect("at least one iteration");
            Ok(format!(
                "L = {}, mu*zeta = {:.4e}, #T_L = {}, n_L = {}, G(u_L) = {:.10}",
                last.iter,
                last.mu_zeta(),
                last.elements,
                last.dofs,
                last.goal_value
            ))
        }
        Job::Sgfem { problem, mesh, initial, config } => {
            let res = adaptive_sgfem(&problem, mesh, initial, &config).context("adaptive stochastic Galerkin loop")?;
            std::fs::create_dir_all(out)?;
            write_with(out, "history.csv", |w| res.report.write_csv(w))?;
            write_with(out, "final_mesh.txt", |w| res.mesh().write_text(w))?;
            write_with(out, "final_solution.txt", |w| res.solution.write_text(w))?;
            write_with(out, "index_set.txt", |w| res.report.write_index_set(w))?;
            write_with(out, "minres_iters.csv", |w| res.report.write_minres_csv(w))?;
            let last = res.report.records.last().expect("at least one iteration");
            Ok(format!(
                "L = {}, eta_L = {:.4e}, #T_L = {}, N_X = {}, N_P = {}, n_L = {}",
                last.iter,
                last.eta,
                last.elements,
                last.n_x,
                last.n_p,
                last.dofs()
            ))
        }
    }
}
