use crate::adapt::{descending_order, mark_doerfler};
use crate::error::{Error, Result};

/// Strategies for merging the primal and dual edge markings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GoMark {
    /// Union of both sets.
    Go1,
    /// The smaller set; the primal set on ties.
    Go2,
    /// Dörfler marking on `β(E) = (μ_E² ζ² + ζ_E² μ²)^{1/2}`.
    Go3,
    /// The smaller set plus as many of the largest-indicator edges of the other.
    #[default]
    Go4,
}

/// Combined marking, returned in ascending edge order. `mu_ind` and
/// `zeta_ind` are the primal and dual edge indicators, `mu` and `zeta` their
/// totals.
#[allow(clippy::too_many_arguments)]
pub fn combine_markings(
    mu_set: &[usize],
    zeta_set: &[usize],
    strategy: GoMark,
    mu_ind: &[f64],
    zeta_ind: &[f64],
    mu: f64,
    zeta: f64,
    theta: f64,
) -> Result<Vec<usize>> {
    let n = mu_ind.len();
    if zeta_ind.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: zeta_ind.len() });
    }
    if let Some(&e) = mu_set.iter().chain(zeta_set).find(|&&e| e >= n) {
        return Err(Error::InvalidEdge(e, n));
    }
    let primal_smaller = mu_set.len() <= zeta_set.len();
    let mut out: Vec<usize> = match strategy {
        GoMark::Go1 => mu_set.iter().chain(zeta_set).copied().collect(),
        GoMark::Go2 => {
            if primal_smaller {
                mu_set.to_vec()
            } else {
                zeta_set.to_vec()
            }
        }
        GoMark::Go3 => {
            let beta: Vec<f64> = (0..n).map(|e| (mu_ind[e].powi(2) * zeta * zeta + zeta_ind[e].powi(2) * mu * mu).sqrt()).collect();
            mark_doerfler(&beta, theta)?
        }
        GoMark::Go4 => {
            let (small, large, ind) = if primal_smaller { (mu_set, zeta_set, zeta_ind) } else { (zeta_set, mu_set, mu_ind) };
            let large_vals: Vec<f64> = large.iter().map(|&e| ind[e]).collect();
            // ties by edge id, so sort the large set first
            let mut order_src: Vec<(usize, f64)> = large.iter().copied().zip(large_vals).collect();
            order_src.sort_by_key(|p| p.0);
            let vals: Vec<f64> = order_src.iter().map(|p| p.1).collect();
            let top = descending_order(&vals).into_iter().take(small.len()).map(|k| order_src[k].0);
            small.iter().copied().chain(top).collect()
        }
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_checked_seven_edges() {
        let mu_ind = [5.0, 4.0, 0.1, 0.1, 0.1, 0.1, 0.1];
        let zeta_ind = [0.1, 0.1, 3.0, 1.0, 6.0, 2.0, 5.0];
        let mu_set = [0, 1];
        let zeta_set = [2, 3, 4, 5, 6];
        let c = |s| combine_markings(&mu_set, &zeta_set, s, &mu_ind, &zeta_ind, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(c(GoMark::Go1), vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(c(GoMark::Go2), vec![0, 1]);
        // top two dual indicators in the dual set: edges 4 (6.0) and 6 (5.0)
        assert_eq!(c(GoMark::Go4), vec![0, 1, 4, 6]);
    }

    #[test]
    fn ties_and_subsets() {
        let ind = [1.0; 4];
        assert_eq!(combine_markings(&[0, 1], &[2, 3], GoMark::Go2, &ind, &ind, 1.0, 1.0, 0.5).unwrap(), vec![0, 1]);
        assert_eq!(combine_markings(&[0, 1, 2], &[1], GoMark::Go1, &ind, &ind, 1.0, 1.0, 0.5).unwrap(), vec![0, 1, 2]);
        assert!(combine_markings(&[9], &[1], GoMark::Go1, &ind, &ind, 1.0, 1.0, 0.5).is_err());
        assert!(combine_markings(&[0], &[1], GoMark::Go1, &ind, &ind[..3], 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn go3_with_vanishing_primal_indicators_is_dual_doerfler() {
        let mu_ind = [0.0; 6];
        let zeta_ind = [0.3, 2.0, 1.0, 0.5, 1.5, 0.2];
        let got = combine_markings(&[], &[], GoMark::Go3, &mu_ind, &zeta_ind, 0.7, 1.3, 0.6).unwrap();
        assert_eq!(got, mark_doerfler(&zeta_ind, 0.6).unwrap());
    }
}
