//! Batch evaluation over record sets.
//!
//! With the `parallel` feature (default) independent records are processed
//! on the rayon pool; without it every batch runs sequentially. Results are
//! always returned in input order, so the two modes are observably identical.

use std::collections::BTreeMap;

use crate::model::RopaRecord;
use crate::registry::{ConceptRegistry, JurisdictionId, JurisdictionProfile};
use crate::validate::{gap_matrix, validate_against_profile, validate_article30, Readiness, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether this build can actually run in parallel.
    pub fn is_parallel(self) -> bool {
        self == Execution::Parallel && cfg!(feature = "parallel")
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

pub fn validate_article30_batch(
    records: &[RopaRecord],
    registry: &ConceptRegistry,
    execution: Execution,
) -> Vec<ValidationReport> {
    execution.map(records, |r| validate_article30(r, registry))
}

pub fn validate_profile_batch(
    records: &[RopaRecord],
    profile: &JurisdictionProfile,
    registry: &ConceptRegistry,
    execution: Execution,
) -> Vec<ValidationReport> {
    execution.map(records, |r| validate_against_profile(r, profile, registry))
}

pub fn gap_matrix_batch(
    records: &[RopaRecord],
    registry: &ConceptRegistry,
    execution: Execution,
) -> Vec<BTreeMap<JurisdictionId, Readiness>> {
    execution.map(records, |r| gap_matrix(r, registry))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_in_both_modes() {
        let items: Vec<u32> = (0..10_000).collect();
        let seq = Execution::Sequential.map(&items, |x| x * 2);
        let par = Execution::Parallel.map(&items, |x| x * 2);
        assert_eq!(seq, par);
        assert_eq!(seq[9_999], 19_998);
    }
}
