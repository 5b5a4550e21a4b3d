//! Single-pass connectivity over an edge stream with `O(k)` state.
//!
//! The automaton keeps the last `k + 1` edges, a component label per window
//! edge and an `alive` flag. A new edge takes over the smallest label among
//! the window edges it touches (or the smallest free label) and every touched
//! label is rewritten to it. When an edge leaves the window and no remaining
//! edge shares its label, its component can never grow again, so the graph
//! is disconnected and `alive` drops. The answer is correct whenever the
//! stream's node locality is at most `k`.

mod hybrid;

pub use hybrid::{hybrid_connectivity, terminals_joined};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_permutation, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    /// The bare automaton; trusts the locality precondition.
    Relaxed,
    /// Also tracks retired nodes over `0..nodes` to flag locality violations
    /// and to catch nodes the stream never mentions.
    Strict { nodes: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamOutcome {
    pub connected: bool,
    /// Stream positions (0-based) where a retired node reappeared.
    pub violations: Vec<usize>,
    pub max_window: usize,
}

/// Hidden state of the automaton.
#[derive(Debug, Clone)]
pub struct StreamState {
    k: usize,
    window: VecDeque<((usize, usize), usize)>,
    free: Vec<bool>,
    alive: bool,
    pos: usize,
    max_window: usize,
    max_labels: usize,
    retired: Option<Vec<bool>>,
    seen: Option<Vec<bool>>,
    violations: Vec<usize>,
}

/// What happened to a label during one step, for observers that track
/// particular components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum LabelEvent {
    /// `from` was rewritten to `to`.
    Merged { from: usize, to: usize },
    /// The component with this label left the window for good.
    Closed(usize),
}

impl StreamState {
    pub fn new(k: usize, mode: StreamMode) -> StreamState {
        let (retired, seen) = match mode {
            StreamMode::Relaxed => (None, None),
            StreamMode::Strict { nodes } => (Some(vec![false; nodes]), Some(vec![false; nodes])),
        };
        StreamState {
            k,
            window: VecDeque::with_capacity(k + 2),
            free: vec![true; k + 1],
            alive: true,
            pos: 0,
            max_window: 0,
            max_labels: 0,
            retired,
            seen,
            violations: Vec::new(),
        }
    }

    pub fn alive(&self) -> bool {
        self.alive
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn max_window(&self) -> usize {
        self.max_window
    }

    /// Largest number of distinct labels alive at once.
    pub fn max_labels(&self) -> usize {
        self.max_labels
    }

    /// Consumes one edge.
    pub fn push(&mut self, e: (usize, usize)) -> Result<()> {
        self.push_observed(e).map(|_| ())
    }

    pub(crate) fn push_observed(&mut self, (u, v): (usize, usize)) -> Result<(usize, Vec<LabelEvent>)> {
        let mut events = Vec::new();
        if let Some(seen) = &self.seen {
            for w in [u, v] {
                if w >= seen.len() {
                    return Err(Error::InvalidGraph(format!(
                        "stream mentions node {w} but only {} nodes were declared",
                        seen.len()
                    )));
                }
            }
        }
        if self.window.len() == self.k + 1 {
            let ((a, b), label) = self.window.pop_front().expect("window is full");
            if !self.window.iter().any(|&(_, l)| l == label) {
                self.alive = false;
                self.free[label] = true;
                events.push(LabelEvent::Closed(label));
            }
            if let Some(retired) = &mut self.retired {
                retired[a] = true;
                retired[b] = true;
            }
        }
        if let (Some(retired), Some(seen)) = (&self.retired, &mut self.seen) {
            if retired[u] || retired[v] {
                self.violations.push(self.pos);
            }
            seen[u] = true;
            seen[v] = true;
        }

        let touched: Vec<usize> = self
            .window
            .iter()
            .filter(|&&((a, b), _)| a == u || a == v || b == u || b == v)
            .map(|&(_, l)| l)
            .collect();
        let label = match touched.iter().min() {
            Some(&target) => {
                for &l in &touched {
                    if l != target && !self.free[l] {
                        self.free[l] = true;
                        events.push(LabelEvent::Merged { from: l, to: target });
                    }
                }
                for (_, l) in self.window.iter_mut() {
                    if touched.contains(l) {
                        *l = target;
                    }
                }
                target
            }
            None => {
                let fresh = self.free.iter().position(|&f| f).expect("a label is free after eviction");
                self.free[fresh] = false;
                fresh
            }
        };
        self.window.push_back(((u, v), label));
        self.pos += 1;
        self.max_window = self.max_window.max(self.window.len());
        self.max_labels = self.max_labels.max(self.free.iter().filter(|&&f| !f).count());
        Ok((label, events))
    }

    /// Final answer plus diagnostics.
    pub fn finish(self) -> StreamOutcome {
        let one_label = self.window.iter().all(|&(_, l)| l == self.window[0].1);
        let mut connected = self.alive && one_label;
        if let Some(seen) = &self.seen {
            // With no edges at all, only a graph of at most one node is connected.
            let all_seen = seen.iter().all(|&s| s);
            connected = if self.pos == 0 { seen.len() <= 1 } else { connected && all_seen };
        }
        StreamOutcome {
            connected,
            violations: self.violations,
            max_window: self.max_window,
        }
    }
}

/// Runs the automaton over `edges` with window size `k`.
pub fn stream_connectivity(edges: &[(usize, usize)], k: usize, mode: StreamMode) -> Result<StreamOutcome> {
    let mut st = StreamState::new(k, mode);
    for &e in edges {
        st.push(e)?;
    }
    Ok(st.finish())
}

/// Edge order induced by a node order: edges sorted by the later of their
/// endpoints' positions, then the earlier one, then edge index.
pub fn edge_order_from_node_order(g: &Graph, node_order: &[usize]) -> Result<Vec<usize>> {
    check_permutation(node_order, g.n())?;
    let mut pos = vec![0; g.n()];
    for (p, &v) in node_order.iter().enumerate() {
        pos[v] = p;
    }
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by_key(|&i| {
        let (u, v) = g.edge(i);
        (pos[u].max(pos[v]), pos[u].min(pos[v]), i)
    });
    Ok(order)
}
