//! Task networks with before-constraints kept as a transitively closed
//! boolean matrix.

use std::fmt;

use crate::bitset::BitSet;
use crate::ground::TaskId;

/// Square boolean matrix; `get(i, j)` means i must precede j.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BoolMatrix {
    rows: Vec<BitSet>,
}

impl BoolMatrix {
    pub fn new(n: usize) -> Self {
        BoolMatrix { rows: vec![BitSet::new(n); n] }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = BoolMatrix::new(n);
        for (i, j) in pairs {
            m.set(i, j);
        }
        m
    }

    /// Strict chain 0 < 1 < ... < n-1, already closed.
    pub fn chain(n: usize) -> Self {
        let mut m = BoolMatrix::new(n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.rows[i].insert(j);
    }

    pub fn row(&self, i: usize) -> &BitSet {
        &self.rows[i]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.ones().map(move |j| (i, j)))
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.size()).all(|i| !self.get(i, i))
    }

    pub fn has_predecessor(&self, j: usize) -> bool {
        self.rows.iter().any(|r| r.contains(j))
    }

    pub fn in_degree(&self, j: usize) -> usize {
        self.rows.iter().filter(|r| r.contains(j)).count()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.rows[i].count()
    }

    /// Number of predecessors of every position.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.size()];
        for r in &self.rows {
            for j in r.ones() {
                deg[j] += 1;
            }
        }
        deg
    }

    /// Positions with at least one predecessor.
    pub fn has_predecessors(&self) -> BitSet {
        let mut any = BitSet::new(self.size());
        for r in &self.rows {
            any.union_with(r);
        }
        any
    }

    /// The matrix restricted to `keep`, in that order.
    pub fn select(&self, keep: &[usize]) -> BoolMatrix {
        let mut index = vec![usize::MAX; self.size()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let rows = keep
            .iter()
            .map(|&oi| {
                BitSet::from_indices(
                    keep.len(),
                    self.rows[oi].ones().map(|oj| index[oj]).filter(|&nj| nj != usize::MAX),
                )
            })
            .collect();
        BoolMatrix { rows }
    }

    /// Whether the closed relation orders every pair of distinct positions.
    pub fn is_total(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| i == j || self.get(i, j) || self.get(j, i)))
    }
}

/// Warshall's algorithm: for every intermediate k, every row that reaches k
/// absorbs row k.
pub fn warshall_closure(before: &BoolMatrix) -> BoolMatrix {
    let mut m = before.clone();
    let n = m.size();
    for k in 0..n {
        let row_k = m.rows[k].clone();
        for i in 0..n {
            if m.rows[i].contains(k) {
                m.rows[i].union_with(&row_k);
            }
        }
    }
    m
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.pairs()).finish()
    }
}

pub type InstanceId = u32;

/// A task occurrence inside a network. Instance ids are unique along one
/// search path and tie plan steps to the decomposition that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetworkTask {
    pub task: TaskId,
    pub instance: InstanceId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("decomposition makes the ordering constraints cyclic")]
pub struct Cyclic;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TaskNetwork {
    pub tasks: Vec<NetworkTask>,
    /// Transitively closed and irreflexive.
    pub before: BoolMatrix,
}

impl TaskNetwork {
    pub fn new(tasks: Vec<NetworkTask>, before: BoolMatrix) -> Self {
        debug_assert_eq!(tasks.len(), before.size());
        TaskNetwork { tasks, before }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Positions with no predecessor, ascending.
    pub fn free_tasks(&self) -> Vec<usize> {
        let blocked = self.before.has_predecessors();
        (0..self.len()).filter(|&i| !blocked.contains(i)).collect()
    }

    /// Drops task `i` with its row and column.
    pub fn remove(&self, i: usize) -> TaskNetwork {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| k != i).collect();
        TaskNetwork { tasks: keep.iter().map(|&k| self.tasks[k]).collect(), before: self.before.select(&keep) }
    }

    /// Layout shared by both decomposition routes: subtasks take position `i`.
    fn spliced(&self, i: usize, subtasks: &[NetworkTask]) -> (Vec<NetworkTask>, Vec<Option<usize>>) {
        let mut tasks = Vec::with_capacity(self.len() + subtasks.len() - 1);
        let mut origin = Vec::with_capacity(tasks.capacity());
        for (k, t) in self.tasks.iter().enumerate() {
            if k == i {
                tasks.extend_from_slice(subtasks);
                origin.extend(std::iter::repeat_n(None, subtasks.len()));
            } else {
                tasks.push(*t);
                origin.push(Some(k));
            }
        }
        (tasks, origin)
    }

    /// The spliced relation before closing: constraints among old tasks
    /// kept, each constraint on `i` copied to every subtask, `internal` among
    /// the subtasks.
    fn spliced_matrix(&self, i: usize, k: usize, internal: &BoolMatrix) -> BoolMatrix {
        let n = self.len() + k - 1;
        let map = |j: usize| if j < i { j } else { j + k - 1 };
        let remap = |row: &BitSet| {
            let mut out = BitSet::from_indices(n, row.ones().filter(|&j| j != i).map(map));
            if row.contains(i) {
                for s in 0..k {
                    out.insert(i + s);
                }
            }
            out
        };
        let mut rows = Vec::with_capacity(n);
        for (x, row) in self.before.rows.iter().enumerate() {
            if x == i {
                for s in 0..k {
                    let mut r = remap(row);
                    for t in internal.row(s).ones() {
                        r.insert(i + t);
                    }
                    rows.push(r);
                }
            } else {
                rows.push(remap(row));
            }
        }
        BoolMatrix { rows }
    }

    /// Replaces task `i` by `subtasks` ordered by `internal`, inheriting every
    /// constraint on `i`, then re-closes the whole matrix with Warshall.
    pub fn decompose(&self, i: usize, subtasks: &[NetworkTask], internal: &BoolMatrix) -> Result<TaskNetwork, Cyclic> {
        let (tasks, _) = self.spliced(i, subtasks);
        let closed = warshall_closure(&self.spliced_matrix(i, subtasks.len(), internal));
        if closed.is_irreflexive() {
            Ok(TaskNetwork { tasks, before: closed })
        } else {
            Err(Cyclic)
        }
    }

    /// Same result as [`TaskNetwork::decompose`] without a full closure pass:
    /// with a closed input, only the method's internal order needs closing.
    pub fn decompose_incremental(
        &self,
        i: usize,
        subtasks: &[NetworkTask],
        internal: &BoolMatrix,
    ) -> Result<TaskNetwork, Cyclic> {
        let internal = warshall_closure(internal);
        if !internal.is_irreflexive() {
            return Err(Cyclic);
        }
        let (tasks, _) = self.spliced(i, subtasks);
        Ok(TaskNetwork { tasks, before: self.spliced_matrix(i, subtasks.len(), &internal) })
    }

    /// Immediate-successor pairs of a closed acyclic relation. The closure
    /// of the result is the relation again, so it identifies it exactly.
    pub fn cover_pairs(&self) -> Vec<(usize, usize)> {
        // In a closed DAG a predecessor always has the smaller in-degree, so
        // scanning a row by in-degree meets minimal elements first, and only
        // their rows need to be absorbed.
        let ins = self.before.in_degrees();
        let mut pairs = Vec::new();
        for i in 0..self.len() {
            let mut succ: Vec<usize> = self.before.row(i).ones().collect();
            succ.sort_by_key(|&k| ins[k]);
            let mut covered = BitSet::new(self.len());
            for k in succ {
                if !covered.contains(k) {
                    pairs.push((i, k));
                    covered.union_with(self.before.row(k));
                }
            }
        }
        pairs
    }

    /// Isomorphism-invariant-ish key: tasks sorted by (task id, in-degree,
    /// out-degree, position), with the cover pairs renumbered to match.
    /// Equal keys always mean equal networks up to instance ids. Storing
    /// covers rather than the closed matrix keeps long chains linear in size.
    pub fn canonical_key(&self) -> (Vec<TaskId>, Vec<(u32, u32)>) {
        let ins = self.before.in_degrees();
        let outs: Vec<usize> = (0..self.len()).map(|k| self.before.out_degree(k)).collect();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&k| (self.tasks[k].task, ins[k], outs[k], k));
        let mut rank = vec![0u32; self.len()];
        for (r, &k) in order.iter().enumerate() {
            rank[k] = r as u32;
        }
        let mut covers: Vec<(u32, u32)> = self.cover_pairs().into_iter().map(|(a, b)| (rank[a], rank[b])).collect();
        covers.sort_unstable();
        (order.iter().map(|&k| self.tasks[k].task).collect(), covers)
    }
}
