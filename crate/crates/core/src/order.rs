//! Cyclic orders, compared up to rotation (never up to reversal).

use std::collections::BTreeSet;
use std::fmt;

/// A cyclic sequence of distinct labels.
///
/// Stored rotated so that the smallest label comes first, which makes the
/// derived `Eq`/`Ord` coincide with rotation-equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicOrder<L> {
    seq: Vec<L>,
}

impl<L: Ord + Clone> CyclicOrder<L> {
    pub fn new(mut seq: Vec<L>) -> Self {
        if let Some(pos) = seq
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| i)
        {
            seq.rotate_left(pos);
        }
        Self { seq }
    }

    pub fn as_slice(&self) -> &[L] {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut seq = self.seq.clone();
        seq.reverse();
        Self::new(seq)
    }

    pub fn labels(&self) -> BTreeSet<L> {
        self.seq.iter().cloned().collect()
    }

    /// The cyclic order induced on `subset`.
    pub fn restrict(&self, subset: &BTreeSet<L>) -> Self {
        Self::new(self.seq.iter().filter(|l| subset.contains(*l)).cloned().collect())
    }

    /// Successor of `l` in the cyclic order.
    pub fn successor(&self, l: &L) -> Option<&L> {
        let i = self.seq.iter().position(|x| x == l)?;
        Some(&self.seq[(i + 1) % self.seq.len()])
    }

    /// The sequence rotated so that it starts with `first`.
    pub fn starting_at(&self, first: &L) -> Option<Vec<L>> {
        let i = self.seq.iter().position(|x| x == first)?;
        let mut v = self.seq.clone();
        v.rotate_left(i);
        Some(v)
    }

    pub fn map<M: Ord + Clone>(&self, f: impl FnMut(&L) -> M) -> CyclicOrder<M> {
        CyclicOrder::new(self.seq.iter().map(f).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &L> {
        self.seq.iter()
    }
}

impl<L: fmt::Display> fmt::Display for CyclicOrder<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.seq.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// All cyclic orders of `labels`; `(n-1)!` of them.
pub fn all_cyclic_orders<L: Ord + Clone>(labels: &BTreeSet<L>) -> Vec<CyclicOrder<L>> {
    let mut items: Vec<L> = labels.iter().cloned().collect();
    let Some(first) = items.first().cloned() else {
        return vec![CyclicOrder::new(Vec::new())];
    };
    let rest = items.split_off(1);
    let mut out = Vec::new();
    for perm in itertools::Itertools::permutations(rest.iter().cloned(), rest.len()) {
        let mut seq = vec![first.clone()];
        seq.extend(perm);
        out.push(CyclicOrder::new(seq));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_equality_but_not_reversal() {
        let a = CyclicOrder::new(vec![1, 2, 3, 4]);
        assert_eq!(a, CyclicOrder::new(vec![3, 4, 1, 2]));
        assert_ne!(a, CyclicOrder::new(vec![4, 3, 2, 1]));
        assert_eq!(a.reversed(), CyclicOrder::new(vec![4, 3, 2, 1]));
    }

    #[test]
    fn counts_of_all_orders() {
        let s: BTreeSet<_> = (0..4).collect();
        assert_eq!(all_cyclic_orders(&s).len(), 6);
        let s: BTreeSet<_> = (0..1).collect();
        assert_eq!(all_cyclic_orders(&s).len(), 1);
    }

    #[test]
    fn restriction_keeps_cyclic_sequence() {
        let a = CyclicOrder::new(vec![5, 1, 4, 2, 3]);
        let r = a.restrict(&[5, 2, 3].into_iter().collect());
        assert_eq!(r, CyclicOrder::new(vec![2, 3, 5]));
        assert_eq!(a.successor(&3), Some(&5));
    }
}
