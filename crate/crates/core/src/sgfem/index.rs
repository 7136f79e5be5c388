use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// A finitely supported multi-index, stored as `(m, ν_m)` pairs with
/// `m ≥ 1` strictly increasing and `ν_m > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    entries: Vec<(usize, u32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex::default()
    }

    /// The Kronecker index `ε^(m)`.
    pub fn unit(m: usize) -> Self {
        assert!(m >= 1, "parameter positions start at 1");
        MultiIndex { entries: vec![(m, 1)] }
    }

    /// From dense values `(ν_1, ν_2, ...)`.
    pub fn from_dense(v: &[u32]) -> Self {
        MultiIndex {
            entries: v.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, &x)| (i + 1, x)).collect(),
        }
    }

    pub fn get(&self, m: usize) -> u32 {
        self.entries.iter().find(|e| e.0 == m).map_or(0, |e| e.1)
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest active position, 0 for the zero index.
    pub fn max_position(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0)
    }

    /// `ν + s ε^(m)` for `s = ±1`; `None` when a component would go negative.
    pub fn shifted(&self, m: usize, up: bool) -> Option<MultiIndex> {
        let mut entries = self.entries.clone();
        match entries.iter().position(|e| e.0 == m) {
            Some(k) => {
                if up {
                    entries[k].1 += 1;
                } else if entries[k].1 == 1 {
                    entries.remove(k);
                } else {
                    entries[k].1 -= 1;
                }
            }
            None if up => {
                let at = entries.partition_point(|e| e.0 < m);
                entries.insert(at, (m, 1));
            }
            None => return None,
        }
        Some(MultiIndex { entries })
    }

    pub fn to_dense(&self, len: usize) -> Vec<u32> {
        (1..=len.max(self.max_position())).map(|m| self.get(m)).collect()
    }

    /// `Some(m)` when `self` and `other` differ by one in coordinate `m` only.
    pub fn unit_difference(&self, other: &MultiIndex) -> Option<usize> {
        if self.degree().abs_diff(other.degree()) != 1 {
            return None;
        }
        let (hi, lo) = if self.degree() > other.degree() { (self, other) } else { (other, self) };
        let mut diff = None;
        for &(m, v) in &hi.entries {
            match v.cmp(&lo.get(m)) {
                Ordering::Equal => {}
                Ordering::Greater if v == lo.get(m) + 1 && diff.is_none() => diff = Some(m),
                _ => return None,
            }
        }
        // lo must not have support outside hi
        if lo.entries.iter().any(|&(m, v)| hi.get(m) < v) {
            return None;
        }
        diff
    }

    /// Space-separated dense values in parentheses, e.g. `(1 0 2)`.
    pub fn display_padded(&self, len: usize) -> String {
        let v: Vec<String> = self.to_dense(len).iter().map(|x| x.to_string()).collect();
        format!("({})", v.join(" "))
    }
}

impl Ord for MultiIndex {
    /// Total degree, then reverse lexicographic order of the dense values,
    /// so that `(2 0)` precedes `(1 1)` precedes `(0 2)`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.max_position().max(other.max_position());
            for m in 1..=n {
                match other.get(m).cmp(&self.get(m)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_padded(1))
    }
}

/// A finite index set in κ order (the zero index first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl MultiIndexSet {
    /// Sorts into κ order. Fails on duplicates or a missing zero index.
    pub fn new(mut indices: Vec<MultiIndex>) -> Result<Self> {
        indices.sort();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate multi-index".into()));
        }
        if indices.first().map_or(true, |i| !i.is_zero()) {
            return Err(Error::InvalidArgument("index set must contain the zero index".into()));
        }
        let lookup = indices.iter().cloned().enumerate().map(|(k, i)| (i, k)).collect();
        Ok(MultiIndexSet { indices, lookup })
    }

    /// `{0, ε^(1), ..., ε^(m)}`.
    pub fn first_order(m: usize) -> Self {
        let mut v = vec![MultiIndex::zero()];
        v.extend((1..=m).map(MultiIndex::unit));
        MultiIndexSet::new(v).expect("distinct indices")
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, k: usize) -> &MultiIndex {
        &self.indices[k]
    }

    /// κ⁻¹.
    pub fn position(&self, nu: &MultiIndex) -> Option<usize> {
        self.lookup.get(nu).copied()
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.lookup.contains_key(nu)
    }

    /// Number of active parameters `M_P`.
    pub fn n_active(&self) -> usize {
        self.indices.iter().map(MultiIndex::max_position).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> u32 {
        self.indices.iter().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Indices `ν ∉ P` with `ν = μ ± ε^(m)` for some `μ ∈ P` and
    /// `m ≤ M_P + m_bar`, in κ order.
    pub fn neighborhood(&self, m_bar: usize) -> Vec<MultiIndex> {
        let m_max = self.n_active() + m_bar;
        let mut out = BTreeSet::new();
        for mu in &self.indices {
            for m in 1..=m_max {
                for up in [true, false] {
                    if let Some(nu) = mu.shifted(m, up) {
                        if !self.contains(&nu) {
                            out.insert(nu);
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// The set with `extra` added.
    pub fn extended(&self, extra: &[MultiIndex]) -> Result<Self> {
        let mut v = self.indices.clone();
        v.extend(extra.iter().filter(|i| !self.contains(i)).cloned());
        v.sort();
        v.dedup();
        MultiIndexSet::new(v)
    }
}
