use std::time::Instant;

use crate::fragdb::TemplateId;
use crate::model::{AssemblyModel, PlacementState};

/// Why a labeling pass ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    /// The whole tree was explored.
    Exhausted,
    /// The solution callback asked to stop.
    Stopped,
    /// Deadline or node budget ran out.
    OutOfBudget,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelingStats {
    /// Placement attempts.
    pub nodes: u64,
    /// Attempts rejected by a link, steric or diameter check.
    pub failures: u64,
    /// Assignments undone because nothing below them was accepted.
    pub backtracks: u64,
}

/// What to do with a complete assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leaf {
    /// Accept it and keep enumerating.
    Continue,
    /// Accept it and stop.
    Stop,
    /// Not acceptable (e.g. fails an energy bound); keep searching.
    Reject,
}

/// Depth-first labeling of the code variables, leftmost first, each domain
/// in the given order.
pub struct Labeler<'m, 'a> {
    pub model: &'m AssemblyModel<'a>,
    pub domains: &'m [Vec<TemplateId>],
    pub deadline: Option<Instant>,
    pub node_limit: Option<u64>,
    pub stats: LabelingStats,
}

impl<'m, 'a> Labeler<'m, 'a> {
    pub fn new(model: &'m AssemblyModel<'a>, domains: &'m [Vec<TemplateId>]) -> Self {
        Labeler {
            model,
            domains,
            deadline: None,
            node_limit: None,
            stats: LabelingStats::default(),
        }
    }

    fn out_of_budget(&self) -> bool {
        if self.node_limit.is_some_and(|l| self.stats.nodes >= l) {
            return true;
        }
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn run(&mut self, on_solution: &mut dyn FnMut(&PlacementState) -> Leaf) -> Flow {
        if self.domains.iter().any(Vec::is_empty) {
            return Flow::Exhausted;
        }
        let mut state = self.model.new_state();
        self.descend(&mut state, on_solution).0
    }

    /// Returns the flow and whether any leaf below was accepted.
    fn descend(
        &mut self,
        state: &mut PlacementState,
        on_solution: &mut dyn FnMut(&PlacementState) -> Leaf,
    ) -> (Flow, bool) {
        let k = state.windows();
        if k == self.domains.len() {
            if self.model.terminal_violation(state).is_some() {
                self.stats.failures += 1;
                return (Flow::Exhausted, false);
            }
            return match on_solution(state) {
                Leaf::Continue => (Flow::Exhausted, true),
                Leaf::Stop => (Flow::Stopped, true),
                Leaf::Reject => (Flow::Exhausted, false),
            };
        }
        let mut any = false;
        for idx in 0..self.domains[k].len() {
            if self.out_of_budget() {
                return (Flow::OutOfBudget, any);
            }
            let id = self.domains[k][idx];
            self.stats.nodes += 1;
            if self.model.try_place(state, id).is_err() {
                self.stats.failures += 1;
                continue;
            }
            let (flow, found) = self.descend(state, on_solution);
            state.pop();
            any |= found;
            if !found {
                self.stats.backtracks += 1;
            }
            if flow != Flow::Exhausted {
                return (flow, any);
            }
        }
        (Flow::Exhausted, any)
    }
}
