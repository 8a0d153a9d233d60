//! Fill-reducing nested-dissection ordering from BFS level-set separators.

use std::collections::VecDeque;

use super::SparseMatrix;

/// Subgraphs at or below this size are not dissected further.
const LEAF_SIZE: usize = 48;

struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    /// Pattern of `A + A^T` without the diagonal.
    fn symmetric_pattern(a: &SparseMatrix) -> Graph {
        let n = a.nrows();
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for (j, _) in a.row(i) {
                if i != j {
                    lists[i].push(j);
                    lists[j].push(i);
                }
            }
        }
        let mut ptr = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        ptr.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            adj.extend(l);
            ptr.push(adj.len());
        }
        Graph { ptr, adj }
    }

    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.ptr[v]..self.ptr[v + 1]]
    }
}

struct Dissector<'a> {
    graph: &'a Graph,
    label: Vec<u32>,
    next_label: u32,
    dist: Vec<usize>,
    order: Vec<usize>,
}

impl Dissector<'_> {
    fn relabel(&mut self, nodes: &[usize]) -> u32 {
        self.next_label += 1;
        for &v in nodes {
            self.label[v] = self.next_label;
        }
        self.next_label
    }

    /// BFS levels from `root` within nodes carrying `id`.
    fn levels(&mut self, root: usize, id: u32) -> Vec<Vec<usize>> {
        let mut levels: Vec<Vec<usize>> = vec![vec![root]];
        let mut queue = VecDeque::from([root]);
        let mut seen = vec![root];
        self.dist[root] = 0;
        while let Some(v) = queue.pop_front() {
            let d = self.dist[v];
            for &w in self.graph.neighbors(v) {
                if self.label[w] == id && self.dist[w] == usize::MAX {
                    self.dist[w] = d + 1;
                    if levels.len() <= d + 1 {
                        levels.push(Vec::new());
                    }
                    levels[d + 1].push(w);
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        for v in seen {
            self.dist[v] = usize::MAX;
        }
        levels
    }

    fn dissect(&mut self, nodes: Vec<usize>) {
        if nodes.len() <= LEAF_SIZE {
            self.order.extend(nodes);
            return;
        }
        let id = self.relabel(&nodes);
        let mut levels = self.levels(nodes[0], id);
        let reached: usize = levels.iter().map(Vec::len).sum();
        if reached < nodes.len() {
            // disconnected: peel off the component of nodes[0]
            let comp: Vec<usize> = levels.concat();
            self.relabel(&comp);
            let rest: Vec<usize> = nodes.into_iter().filter(|&v| self.label[v] == id).collect();
            self.dissect(comp);
            self.dissect(rest);
            return;
        }
        // pseudo-peripheral root: restart from the last level while eccentricity grows
        for _ in 0..4 {
            let last = levels.last().unwrap();
            let cand = *last
                .iter()
                .min_by_key(|&&v| self.graph.neighbors(v).iter().filter(|&&w| self.label[w] == id).count())
                .unwrap();
            let next = self.levels(cand, id);
            if next.len() > levels.len() {
                levels = next;
            } else {
                break;
            }
        }
        if levels.len() < 3 {
            self.order.extend(nodes);
            return;
        }
        let total = nodes.len();
        let mut best: Option<(usize, usize)> = None;
        let mut before = 0;
        for (k, level) in levels.iter().enumerate() {
            let frac = before as f64 / total as f64;
            if k > 0 && k + 1 < levels.len() && (0.3..=0.7).contains(&frac) {
                if best.is_none_or(|(_, size)| level.len() < size) {
                    best = Some((k, level.len()));
                }
            }
            before += level.len();
        }
        let split = match best {
            Some((k, _)) => k,
            None => {
                // fall back to the level holding the median node
                let mut acc = 0;
                let mut k = 1;
                for (i, l) in levels.iter().enumerate() {
                    acc += l.len();
                    if acc * 2 >= total {
                        k = i;
                        break;
                    }
                }
                k.clamp(1, levels.len() - 2)
            }
        };
        let separator = levels[split].clone();
        let low: Vec<usize> = levels[..split].concat();
        let high: Vec<usize> = levels[split + 1..].concat();
        self.relabel(&separator);
        self.dissect(low);
        self.dissect(high);
        self.order.extend(separator);
    }
}

/// Elimination order for the symmetric pattern of `a`: `perm[k]` is the
/// index eliminated at step `k`. Indices with a structurally zero diagonal
/// follow their last neighbour. Rows/columns with very high degree (such
/// as mean-value constraints) are placed last.
pub fn nested_dissection(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let graph = Graph::symmetric_pattern(a);
    let dense_threshold = (10.0 * (n as f64).sqrt()).max(64.0) as usize;
    let (dense, sparse): (Vec<usize>, Vec<usize>) = (0..n).partition(|&v| graph.neighbors(v).len() > dense_threshold);
    let mut d = Dissector {
        graph: &graph,
        label: vec![0; n],
        next_label: 0,
        dist: vec![usize::MAX; n],
        order: Vec::with_capacity(n),
    };
    for &v in &dense {
        d.label[v] = u32::MAX;
    }
    d.dissect(sparse);
    d.order.extend(dense);
    delay_zero_diagonals(a, &graph, d.order, &d.label)
}

/// Moves each index with a structurally zero diagonal to just after its
/// last-eliminated neighbour, so the pivot has been filled in by the time
/// it is reached (saddle-point constraint rows).
fn delay_zero_diagonals(a: &SparseMatrix, graph: &Graph, order: Vec<usize>, label: &[u32]) -> Vec<usize> {
    let n = order.len();
    let mut pos = vec![0usize; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let late: Vec<bool> = (0..n).map(|v| a.get(v, v) == 0.0).collect();
    let mut key: Vec<(usize, bool, usize)> = order
        .iter()
        .map(|&v| {
            if !late[v] || label[v] == u32::MAX {
                return (pos[v], false, v);
            }
            let last = graph
                .neighbors(v)
                .iter()
                .filter(|&&w| !late[w] && label[w] != u32::MAX)
                .map(|&w| pos[w])
                .max()
                .unwrap_or(pos[v]);
            (last.max(pos[v]), true, v)
        })
        .collect();
    key.sort_unstable();
    key.into_iter().map(|(_, _, v)| v).collect()
}
