pub mod analyze;
pub mod coevolve;
pub mod simulate;
pub mod sweep;
pub mod trend;

use std::collections::BTreeSet;

use imitanet_core::analysis::leader_classes;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderClass {
    pub leaders: Vec<usize>,
    pub members: Vec<usize>,
}

pub fn classes(partition: &[BTreeSet<usize>]) -> Vec<LeaderClass> {
    leader_classes(partition)
        .into_iter()
        .map(|(s, members)| LeaderClass { leaders: s.into_iter().collect(), members })
        .collect()
}
