use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Direction, Group, LoadBasis, Orchestrator, ScalingCause, ScalingEvent};

/// Guards threshold comparisons against rounding in the window mean.
const THRESHOLD_EPS: f64 = 1e-9;

/// Hysteresis thresholds on the window mean of group utilization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingPolicy {
    pub hi: f64,
    pub lo: f64,
    pub window: usize,
    /// Ticks after a scaling during which the opposite decision is blocked.
    pub cooldown: u64,
}

impl Default for ScalingPolicy {
    fn default() -> Self {
        Self { hi: 0.8, lo: 0.3, window: 5, cooldown: 3 }
    }
}

impl ScalingPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.lo && self.lo < self.hi && self.hi <= 1.0) {
            return Err(format!("need 0 < lo < hi <= 1, got lo {} hi {}", self.lo, self.hi));
        }
        if self.window == 0 {
            return Err("window must be at least 1".into());
        }
        Ok(())
    }
}

/// Utilization samples of one group since its last scaling.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UtilizationHistory {
    samples: VecDeque<f64>,
    last_scaling: Option<(u64, Direction)>,
}

impl UtilizationHistory {
    pub fn record(&mut self, window: usize, utilization: f64) {
        self.samples.push_back(utilization);
        while self.samples.len() > window {
            self.samples.pop_front();
        }
    }

    /// Mean over the window once it is full.
    pub fn window_mean(&self, window: usize) -> Option<f64> {
        (self.samples.len() >= window && window > 0)
            .then(|| self.samples.iter().sum::<f64>() / self.samples.len() as f64)
    }

    pub fn mark_scaled(&mut self, now: u64, direction: Direction) {
        self.samples.clear();
        self.last_scaling = Some((now, direction));
    }

    fn blocked(&self, policy: &ScalingPolicy, now: u64, direction: Direction) -> bool {
        matches!(self.last_scaling, Some((t, d)) if d != direction && now.saturating_sub(t) < policy.cooldown)
    }
}

/// Scale up when the full-window mean exceeds `hi`, down when it falls below
/// `lo`, provided a level exists in that direction and the opposite move is
/// not cooling down.
pub fn evaluate_scaling_policy(
    policy: &ScalingPolicy,
    history: &UtilizationHistory,
    now: u64,
    has_lower: bool,
    has_higher: bool,
) -> Option<Direction> {
    let mean = history.window_mean(policy.window)?;
    let direction = if mean > policy.hi + THRESHOLD_EPS && has_higher {
        Direction::Up
    } else if mean < policy.lo - THRESHOLD_EPS && has_lower {
        Direction::Down
    } else {
        return None;
    };
    (!history.blocked(policy, now, direction)).then_some(direction)
}

/// Applies a [`ScalingPolicy`] to every scaling group of an orchestrator.
#[derive(Debug, Clone, Default)]
pub struct Autoscaler {
    pub policy: ScalingPolicy,
    histories: BTreeMap<Group, UtilizationHistory>,
}

impl Autoscaler {
    pub fn new(policy: ScalingPolicy) -> Self {
        Self { policy, histories: BTreeMap::new() }
    }

    pub fn history(&self, group: &Group) -> Option<&UtilizationHistory> {
        self.histories.get(group)
    }

    /// Records each group's utilization on allocated PRBs and executes the
    /// resulting decisions. Groups in `pressure` saw a vCPU rejection this
    /// tick and scale up regardless of the window. Refused operations
    /// produce no event.
    pub fn step(&mut self, orchestrator: &mut Orchestrator, pressure: &BTreeSet<Group>) -> Vec<ScalingEvent> {
        let now = orchestrator.time();
        let loads = orchestrator.instance_loads(LoadBasis::Allocated);
        let mut events = Vec::new();
        for group in orchestrator.groups() {
            let utilization =
                loads.iter().filter(|l| l.group == group).map(super::InstanceLoad::utilization).fold(0.0, f64::max);
            let history = self.histories.entry(group.clone()).or_default();
            history.record(self.policy.window, utilization);

            let has_lower = orchestrator.can_scale(&group, Direction::Down);
            let has_higher = orchestrator.can_scale(&group, Direction::Up);
            let decision =
                if pressure.contains(&group) && has_higher && !history.blocked(&self.policy, now, Direction::Up) {
                    Some((Direction::Up, ScalingCause::Admission))
                } else {
                    evaluate_scaling_policy(&self.policy, history, now, has_lower, has_higher).map(|d| match d {
                        Direction::Up => (d, ScalingCause::LoadIncrease),
                        Direction::Down => (d, ScalingCause::LoadDecrease),
                    })
                };
            let Some((direction, cause)) = decision else { continue };
            if let Ok(mut done) = orchestrator.scale_group(&group, direction, cause) {
                history.mark_scaled(now, direction);
                events.append(&mut done);
            }
        }
        events
    }
}
