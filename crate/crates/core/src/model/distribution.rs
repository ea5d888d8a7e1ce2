
use crate::numeric::Scalar;

use super::StateId;

/// Probability distribution over states, stored sparsely and sorted by state.
///
/// Construction does not enforce the distribution invariants so that
/// malformed input can be reported by validation instead of rejected early.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<N> {
    entries: Vec<(StateId, N)>,
}

impl<N: Scalar> Distribution<N> {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn point(target: StateId) -> Self {
        Self {
            entries: vec![(target, N::one())],
        }
    }

    /// Builds a distribution, merging duplicate targets.
    pub fn from_entries(entries: impl IntoIterator<Item = (StateId, N)>) -> Self {
        let mut entries: Vec<(StateId, N)> = entries.into_iter().collect();
        entries.sort_by_key(|(t, _)| *t);
        let mut merged: Vec<(StateId, N)> = Vec::with_capacity(entries.len());
        for (t, p) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == t => *acc = acc.clone() + p,
                _ => merged.push((t, p)),
            }
        }
        Self { entries: merged }
    }

    /// Uniform distribution over the given targets.
    pub fn uniform(targets: &[StateId]) -> Self {
        let n = targets.len() as i64;
        Self::from_entries(targets.iter().map(|&t| (t, N::from_ratio(1, n))))
    }

    pub fn entries(&self) -> &[(StateId, N)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, &N)> + '_ {
        self.entries.iter().map(|(t, p)| (*t, p))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prob(&self, target: StateId) -> N {
        self.entries
            .binary_search_by_key(&target, |(t, _)| *t)
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_else(|_| N::zero())
    }

    /// States with strictly positive probability.
    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.entries
            .iter()
            .filter(|(_, p)| *p > N::zero())
            .map(|(t, _)| *t)
    }

    pub fn total(&self) -> N {
        self.entries
            .iter()
            .fold(N::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// Expected value of `values` under the distribution.
    pub fn expectation(&self, values: &[N]) -> N {
        self.entries
            .iter()
            .fold(N::zero(), |acc, (t, p)| acc + p.clone() * values[*t].clone())
    }

    /// Weighted sum `Σ_k w_k · d_k` of distributions.
    pub fn mix<'a>(parts: impl IntoIterator<Item = (N, &'a Distribution<N>)>) -> Self
    where
        N: 'a,
    {
        let entries = parts
            .into_iter()
            .filter(|(w, _)| !w.is_zero())
            .flat_map(|(w, d)| d.entries.iter().map(move |(t, p)| (*t, w.clone() * p.clone())))
            .collect::<Vec<_>>();
        let mut d = Self::from_entries(entries);
        d.entries.retain(|(_, p)| !p.is_zero());
        d
    }

    pub fn convert<M: Scalar>(&self) -> Distribution<M> {
        Distribution {
            entries: self
                .entries
                .iter()
                .map(|(t, p)| (*t, M::from_rational(&p.to_rational())))
                .collect(),
        }
    }
}
