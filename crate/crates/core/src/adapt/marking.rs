use crate::error::{Error, Result};
use crate::estimate::Carrier;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkingStrategy {
    Maximum,
    Doerfler,
}

/// How a marked element is turned into edges to bisect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElementRefinement {
    /// The element's reference edge.
    #[default]
    ReferenceEdge,
    /// All three edges (bisec3 of the element).
    AllEdges,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkingConfig {
    pub strategy: MarkingStrategy,
    pub theta: f64,
    pub carrier: Carrier,
    pub element_refinement: ElementRefinement,
}

impl MarkingConfig {
    pub fn doerfler(theta: f64, carrier: Carrier) -> Self {
        MarkingConfig {
            strategy: MarkingStrategy::Doerfler,
            theta,
            carrier,
            element_refinement: ElementRefinement::default(),
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok = match self.strategy {
            MarkingStrategy::Maximum => (0.0..=1.0).contains(&self.theta),
            MarkingStrategy::Doerfler => self.theta > 0.0 && self.theta <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("marking parameter {} out of range for {:?}", self.theta, self.strategy)))
        }
    }

    pub fn mark(&self, values: &[f64]) -> Result<Vec<usize>> {
        self.check()?;
        match self.strategy {
            MarkingStrategy::Maximum => mark_maximum(values, self.theta),
            MarkingStrategy::Doerfler => mark_doerfler(values, self.theta),
        }
    }
}

/// Ids `s` with `β(s) ≥ θ max β`, ascending.
pub fn mark_maximum(values: &[f64], theta: f64) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(Error::EmptyIndicators);
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    Ok((0..values.len()).filter(|&i| values[i] >= theta * max).collect())
}

/// The shortest prefix of the indicators sorted by decreasing value (ties by
/// increasing id) whose squares reach `θ Σ β²`, returned in ascending id
/// order. All-zero indicators give an empty set.
pub fn mark_doerfler(values: &[f64], theta: f64) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(Error::EmptyIndicators);
    }
    let order = descending_order(values);
    let total: f64 = order.iter().map(|&i| values[i] * values[i]).sum();
    if total == 0.0 {
        return Ok(Vec::new());
    }
    let target = theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for &i in &order {
        if acc >= target || values[i] == 0.0 {
            break;
        }
        acc += values[i] * values[i];
        marked.push(i);
    }
    marked.sort_unstable();
    Ok(marked)
}

/// Ids sorted by decreasing value, ties by increasing id.
pub fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Edges to bisect for a marking on `carrier`. `triangle_edges` lists a
/// triangle's edges by local index, the reference edge last.
pub fn marked_edges(carrier: Carrier, mode: ElementRefinement, marked: &[usize], triangle_edges: impl Fn(usize) -> [usize; 3]) -> Vec<usize> {
    match carrier {
        Carrier::Edges => marked.to_vec(),
        Carrier::Elements => {
            let mut e: Vec<usize> = match mode {
                ElementRefinement::ReferenceEdge => marked.iter().map(|&t| triangle_edges(t)[2]).collect(),
                ElementRefinement::AllEdges => marked.iter().flat_map(|&t| triangle_edges(t)).collect(),
            };
            e.sort_unstable();
            e.dedup();
            e
        }
    }
}
