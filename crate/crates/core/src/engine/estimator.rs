//! Per-location load estimation.
//!
//! The allocator needs the load each location is currently carrying. The
//! estimator sums the service demand (request sizes in unit tasks) routed
//! to a location per window and smooths the windowed rate with an EWMA, so
//! the estimate is commensurable with node drain rates; under a constant
//! unit-demand input rate it converges to that rate.

use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct LoadEstimator {
    window_s: f64,
    alpha: f64,
    demand: BTreeMap<u32, f64>,
    estimates: BTreeMap<u32, f64>,
}

impl LoadEstimator {
    pub fn new(window_s: f64, alpha: f64, location_ids: impl IntoIterator<Item = u32>) -> Self {
        let mut demand = BTreeMap::new();
        let mut estimates = BTreeMap::new();
        for id in location_ids {
            demand.insert(id, 0.0);
            estimates.insert(id, 0.0);
        }
        Self { window_s, alpha, demand, estimates }
    }

    /// Books one request of `size` unit tasks routed to `location_id` in
    /// the current window.
    pub fn record_arrival(&mut self, location_id: u32, size: f64) {
        *self.demand.entry(location_id).or_insert(0.0) += size;
    }

    /// Closes the current window, folding its empirical rate into the
    /// running estimates.
    pub fn roll_window(&mut self) {
        for (id, demand) in self.demand.iter_mut() {
            let rate = *demand / self.window_s;
            let est = self.estimates.entry(*id).or_insert(0.0);
            *est = self.alpha * rate + (1.0 - self.alpha) * *est;
            *demand = 0.0;
        }
    }

    /// Smoothed offered rate for one location, tasks/s.
    pub fn estimate(&self, location_id: u32) -> f64 {
        self.estimates.get(&location_id).copied().unwrap_or(0.0)
    }

    pub fn estimates(&self) -> &BTreeMap<u32, f64> {
        &self.estimates
    }
}
