use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragdb::TemplateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveKind {
    Pivot,
    Crankshaft,
}

/// Code variables to unbind: one (pivot) or two disjoint (crankshaft)
/// half-open ranges of window indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub ranges: Vec<(usize, usize)>,
}

impl Move {
    pub fn pivot(start: usize, len: usize, vars: usize) -> Result<Move> {
        if len == 0 {
            return Err(Error::InvalidInput(
                "pivot range must cover at least one variable".into(),
            ));
        }
        if start + len > vars {
            return Err(Error::InvalidInput(format!(
                "pivot {start}+{len} beyond {vars} variables"
            )));
        }
        Ok(Move {
            kind: MoveKind::Pivot,
            ranges: vec![(start, start + len)],
        })
    }

    /// Two ranges separated by at least one bound variable.
    pub fn crankshaft(a: (usize, usize), b: (usize, usize), vars: usize) -> Result<Move> {
        let ok = a.0 < a.1 && b.0 < b.1 && a.1 < b.0 && b.1 <= vars;
        if !ok {
            return Err(Error::InvalidInput(format!(
                "invalid crankshaft ranges {a:?} {b:?}"
            )));
        }
        Ok(Move {
            kind: MoveKind::Crankshaft,
            ranges: vec![a, b],
        })
    }

    pub fn unbinds(&self, k: usize) -> bool {
        self.ranges.iter().any(|&(s, e)| s <= k && k < e)
    }

    /// Domains for relabeling: unbound variables get their model domain
    /// (pinned variables stay pinned), the rest their previous value.
    pub fn relaxed_domains(
        &self,
        last: &[TemplateId],
        domains: &[Vec<TemplateId>],
        forced: &[bool],
    ) -> Vec<Vec<TemplateId>> {
        (0..last.len())
            .map(|k| {
                if self.unbinds(k) && !forced[k] {
                    domains[k].clone()
                } else {
                    vec![last[k]]
                }
            })
            .collect()
    }
}

/// Draws a move over `vars` variables with window lengths uniform in
/// `[min_w, max_w]`. Crankshaft is chosen with probability
/// `1 − pivot_weight` and needs room for two ranges and a gap; otherwise a
/// pivot is used.
pub fn draw_move<R: Rng>(
    rng: &mut R,
    vars: usize,
    min_w: usize,
    max_w: usize,
    pivot_weight: f64,
) -> Move {
    let min_w = min_w.clamp(1, vars);
    let max_w = max_w.clamp(min_w, vars);
    let crank = rng.gen::<f64>() >= pivot_weight;
    if crank && vars > 2 * min_w {
        let cap = (vars - 1) / 2;
        let l1 = rng.gen_range(min_w..=max_w.min(cap).max(min_w));
        let l2 = rng.gen_range(min_w..=max_w.min(vars - 1 - l1).max(min_w));
        let start1 = rng.gen_range(0..=vars - l1 - 1 - l2);
        let start2 = rng.gen_range(start1 + l1 + 1..=vars - l2);
        return Move::crankshaft((start1, start1 + l1), (start2, start2 + l2), vars)
            .expect("ranges drawn within bounds");
    }
    let len = rng.gen_range(min_w..=max_w);
    let start = rng.gen_range(0..=vars - len);
    Move::pivot(start, len, vars).expect("range drawn within bounds")
}
