use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition is empty")]
    Empty,
    #[error("label 0 is not allowed; cluster ids start at 1")]
    ZeroLabel,
    #[error("cluster ids must cover 1..={k}; id {missing} never occurs")]
    Gap { k: usize, missing: usize },
}

/// Assignment of rows to clusters `1..=k`, every id used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validates labels that already use ids `1..=k`.
    pub fn new(labels: Vec<usize>) -> Result<Self, PartitionError> {
        if labels.is_empty() {
            return Err(PartitionError::Empty);
        }
        if labels.contains(&0) {
            return Err(PartitionError::ZeroLabel);
        }
        let k = *labels.iter().max().expect("non-empty");
        let mut used = vec![false; k];
        for &l in &labels {
            used[l - 1] = true;
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(PartitionError::Gap { k, missing: missing + 1 });
        }
        Ok(Partition { labels, k })
    }

    /// Renumbers arbitrary labels by order of first appearance.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Result<Self, PartitionError> {
        if labels.is_empty() {
            return Err(PartitionError::Empty);
        }
        let mut seen: Vec<&T> = Vec::new();
        let ids = labels
            .iter()
            .map(|l| match seen.iter().position(|s| *s == l) {
                Some(p) => p + 1,
                None => {
                    seen.push(l);
                    seen.len()
                }
            })
            .collect();
        Ok(Partition {
            labels: ids,
            k: seen.len(),
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }

    /// Same grouping with ids renumbered by first appearance.
    pub fn canonical(&self) -> Partition {
        Partition::from_labels(&self.labels).expect("non-empty")
    }

    /// Whether every cluster of `self` lies inside a cluster of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut parent = vec![0usize; self.k];
        for (&fine, &coarse) in self.labels.iter().zip(&coarser.labels) {
            let slot = &mut parent[fine - 1];
            if *slot == 0 {
                *slot = coarse;
            } else if *slot != coarse {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert_eq!(Partition::new(vec![]), Err(PartitionError::Empty));
        assert_eq!(Partition::new(vec![1, 0]), Err(PartitionError::ZeroLabel));
        assert_eq!(Partition::new(vec![1, 3]), Err(PartitionError::Gap { k: 3, missing: 2 }));
        let p = Partition::new(vec![2, 1, 2]).unwrap();
        assert_eq!(p.k(), 2);
        assert_eq!(p.sizes(), vec![1, 2]);
        assert_eq!(p.canonical().labels(), &[1, 2, 1]);
    }

    #[test]
    fn from_arbitrary_labels() {
        let p = Partition::from_labels(&["b", "a", "b", "c"]).unwrap();
        assert_eq!(p.labels(), &[1, 2, 1, 3]);
        assert_eq!(p.k(), 3);
    }

    #[test]
    fn refinement() {
        let fine = Partition::new(vec![1, 2, 3, 3]).unwrap();
        let coarse = Partition::new(vec![1, 1, 2, 2]).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }
}
