use crate::error::{Error, Result};
use crate::graph::DirectedEdgeList;

/// Number of attractive updates per edge over a run, proportional to its
/// weight, with events spread evenly across the epochs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingSchedule {
    counts: Vec<u32>,
    epochs: usize,
}

impl SamplingSchedule {
    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total_events(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Epoch of the j-th event of edge e: floor(j E / c_e).
    #[inline]
    pub fn event_epoch(&self, edge: usize, j: u32) -> usize {
        event_epoch(j, self.counts[edge], self.epochs)
    }

    /// Epochs at which edge e fires, in order.
    pub fn events(&self, edge: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.counts[edge];
        (0..c).map(move |j| event_epoch(j, c, self.epochs))
    }
}

#[inline]
fn event_epoch(j: u32, count: u32, epochs: usize) -> usize {
    ((j as u64 * epochs as u64) / count as u64) as usize
}

pub fn build_sampling_schedule(edges: &DirectedEdgeList, epochs: usize) -> Result<SamplingSchedule> {
    if epochs == 0 {
        return Err(Error::Config("epoch count must be positive".into()));
    }
    if edges.is_empty() {
        return Err(Error::InvalidData("edge list is empty".into()));
    }
    if let Some(e) = edges.edges.iter().find(|e| !(e.weight.is_finite() && e.weight >= 0.0)) {
        return Err(Error::InvalidData(format!(
            "edge {} -> {} has invalid weight {}",
            e.head, e.tail, e.weight
        )));
    }
    let w_max = edges.max_weight();
    if w_max <= 0.0 {
        return Err(Error::InvalidData("all edge weights are zero".into()));
    }
    let counts = edges
        .edges
        .iter()
        .map(|e| (epochs as f64 * e.weight / w_max).ceil().min(epochs as f64) as u32)
        .collect();
    Ok(SamplingSchedule { counts, epochs })
}
