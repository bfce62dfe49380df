//! Forward decomposition search over a [`GroundProblem`](crate::ground::GroundProblem).
//!
//! Both engines run best-first over an explicit frontier. Nodes are ordered
//! by fewest non-decomposed (compound) tasks, then fewest actions, then
//! insertion order.

pub mod network;
pub mod pfd;
pub mod tfd;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::plan::{Plan, PlanStep};

/// Selection key of a search node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Priority {
    /// Compound tasks left in the network.
    pub non_decomposed: usize,
    /// Actions in the plan prefix.
    pub actions: usize,
}

/// The node comparator: fewer non-decomposed tasks first, then fewer actions.
pub fn compare_nodes(a: &Priority, b: &Priority) -> Ordering {
    a.non_decomposed.cmp(&b.non_decomposed).then(a.actions.cmp(&b.actions))
}

/// Index of the node to expand next. Ties go to the earliest entry.
pub fn select_node(frontier: &[Priority]) -> Option<usize> {
    frontier.iter().enumerate().min_by(|(i, a), (j, b)| compare_nodes(a, b).then(i.cmp(j))).map(|(i, _)| i)
}

struct Entry<N> {
    key: (usize, usize, u64),
    node: N,
}

impl<N> PartialEq for Entry<N> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<N> Eq for Entry<N> {}
impl<N> PartialOrd for Entry<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<N> Ord for Entry<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

/// Priority queue realizing [`select_node`] with FIFO tie-breaking.
pub struct Frontier<N> {
    heap: BinaryHeap<Reverse<Entry<N>>>,
    seq: u64,
}

impl<N> Default for Frontier<N> {
    fn default() -> Self {
        Frontier { heap: BinaryHeap::new(), seq: 0 }
    }
}

impl<N> Frontier<N> {
    pub fn push(&mut self, priority: Priority, node: N) {
        let key = (priority.non_decomposed, priority.actions, self.seq);
        self.seq += 1;
        self.heap.push(Reverse(Entry { key, node }));
    }

    pub fn pop(&mut self) -> Option<N> {
        self.heap.pop().map(|Reverse(e)| e.node)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchLimits {
    pub timeout: Option<Duration>,
    /// Maximum number of node expansions.
    pub max_nodes: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub limits: SearchLimits,
    /// Skip successors whose (state, remaining network) was already generated.
    pub duplicate_detection: bool,
    /// PFD only: branch on the first free task instead of all of them.
    pub first_free_only: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { limits: SearchLimits::default(), duplicate_detection: true, first_free_only: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource {
    Timeout,
    MaxNodes,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resource::Timeout => "timeout",
            Resource::MaxNodes => "max-nodes",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Solved(Plan),
    /// The frontier emptied.
    Unsolvable,
    ResourceExhausted(Resource),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    pub duplicates: u64,
    /// PFD decompositions discarded for cyclic orderings.
    pub cyclic: u64,
    pub time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("totally ordered search needs a totally ordered problem: {0}")]
    PartiallyOrdered(String),
}

/// Persistent list of plan steps; successors share their parent's history.
#[derive(Debug, Clone, Default)]
pub struct Trail(Option<Rc<TrailLink>>);

#[derive(Debug)]
struct TrailLink {
    step: PlanStep,
    prev: Trail,
}

impl Trail {
    pub fn push(&self, step: PlanStep) -> Trail {
        Trail(Some(Rc::new(TrailLink { step, prev: self.clone() })))
    }

    /// Steps oldest first.
    pub fn steps(&self) -> Vec<PlanStep> {
        let mut out = Vec::new();
        let mut cur = &self.0;
        while let Some(link) = cur {
            out.push(link.step.clone());
            cur = &link.prev.0;
        }
        out.reverse();
        out
    }
}

// Long chains would otherwise be freed recursively and overflow the stack.
impl Drop for TrailLink {
    fn drop(&mut self) {
        let mut next = self.prev.0.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut link) => next = link.prev.0.take(),
                Err(_) => break,
            }
        }
    }
}

/// Tracks expansion budget for one search run.
pub(crate) struct Budget {
    start: Instant,
    limits: SearchLimits,
}

impl Budget {
    pub(crate) fn new(limits: SearchLimits) -> Self {
        Budget { start: Instant::now(), limits }
    }

    pub(crate) fn exceeded(&self, expanded: u64) -> Option<Resource> {
        if self.limits.max_nodes.is_some_and(|m| expanded >= m) {
            return Some(Resource::MaxNodes);
        }
        if self.limits.timeout.is_some_and(|t| self.start.elapsed() >= t) {
            return Some(Resource::Timeout);
        }
        None
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

pub(crate) fn plan_from_trail(root: Vec<network::InstanceId>, trail: &Trail) -> Plan {
    let steps = trail.steps();
    let actions = steps
        .iter()
        .filter_map(|s| if let PlanStep::Execute { action, .. } = s { Some(*action) } else { None })
        .collect();
    Plan { actions, root, steps }
}
