//! Max-flow on small graphs with real capacities.
//!
//! Dinic's algorithm with `f64` capacities. Instances here are tiny
//! (transportation feasibility between discrete distributions), so the
//! emphasis is on simplicity and a clean min-cut interface rather than
//! asymptotics. Residual capacities below [`FLOW_EPS`] count as saturated to
//! keep the augmenting loop terminating.

pub const FLOW_EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
    /// Index of the reverse edge in `graph[to]`.
    rev: usize,
}

#[derive(Debug)]
pub struct MaxFlow {
    graph: Vec<Vec<Edge>>,
}

impl MaxFlow {
    pub fn new(nodes: usize) -> Self {
        MaxFlow {
            graph: vec![Vec::new(); nodes],
        }
    }

    /// Directed edge `from → to` with the given capacity. Returns an edge
    /// handle usable with [`MaxFlow::flow_on`].
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> (usize, usize) {
        let rev_from = self.graph[to].len();
        let rev_to = self.graph[from].len();
        self.graph[from].push(Edge { to, cap, rev: rev_from });
        self.graph[to].push(Edge {
            to: from,
            cap: 0.0,
            rev: rev_to,
        });
        (from, rev_to)
    }

    fn bfs_levels(&self, source: usize, sink: usize) -> Option<Vec<i32>> {
        let mut level = vec![-1; self.graph.len()];
        let mut queue = std::collections::VecDeque::new();
        level[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for e in &self.graph[u] {
                if e.cap > FLOW_EPS && level[e.to] < 0 {
                    level[e.to] = level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        if level[sink] < 0 {
            None
        } else {
            Some(level)
        }
    }

    fn dfs_augment(
        &mut self,
        u: usize,
        sink: usize,
        pushed: f64,
        level: &[i32],
        iter: &mut [usize],
    ) -> f64 {
        if u == sink {
            return pushed;
        }
        while iter[u] < self.graph[u].len() {
            let i = iter[u];
            let (to, cap, rev) = {
                let e = &self.graph[u][i];
                (e.to, e.cap, e.rev)
            };
            if cap > FLOW_EPS && level[to] == level[u] + 1 {
                let d = self.dfs_augment(to, sink, pushed.min(cap), level, iter);
                if d > FLOW_EPS {
                    self.graph[u][i].cap -= d;
                    self.graph[to][rev].cap += d;
                    return d;
                }
            }
            iter[u] += 1;
        }
        0.0
    }

    /// Run to completion; returns the max-flow value.
    pub fn run(&mut self, source: usize, sink: usize) -> f64 {
        let mut total = 0.0;
        while let Some(level) = self.bfs_levels(source, sink) {
            let mut iter = vec![0usize; self.graph.len()];
            loop {
                let d = self.dfs_augment(source, sink, f64::INFINITY, &level, &mut iter);
                if d <= FLOW_EPS {
                    break;
                }
                total += d;
            }
        }
        total
    }

    /// Flow pushed along an edge handle returned by [`MaxFlow::add_edge`]:
    /// the residual capacity of its reverse edge.
    pub fn flow_on(&self, handle: (usize, usize)) -> f64 {
        let (from, idx) = handle;
        let e = &self.graph[from][idx];
        self.graph[e.to][e.rev].cap
    }

    /// Nodes reachable from `source` in the residual graph (the source side
    /// of a min cut once `run` has finished).
    pub fn min_cut_source_side(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.graph.len()];
        let mut stack = vec![source];
        seen[source] = true;
        while let Some(u) = stack.pop() {
            for e in &self.graph[u] {
                if e.cap > FLOW_EPS && !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path() {
        let mut f = MaxFlow::new(3);
        f.add_edge(0, 1, 0.7);
        f.add_edge(1, 2, 0.4);
        assert!((f.run(0, 2) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn parallel_paths_saturate() {
        let mut f = MaxFlow::new(4);
        f.add_edge(0, 1, 0.5);
        f.add_edge(0, 2, 0.5);
        f.add_edge(1, 3, 0.5);
        f.add_edge(2, 3, 0.5);
        assert!((f.run(0, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rerouting_through_back_edges() {
        // Classic diamond where a greedy first path must be undone.
        let mut f = MaxFlow::new(4);
        f.add_edge(0, 1, 1.0);
        f.add_edge(0, 2, 1.0);
        f.add_edge(1, 2, 1.0);
        f.add_edge(1, 3, 1.0);
        f.add_edge(2, 3, 1.0);
        assert!((f.run(0, 3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn min_cut_separates() {
        let mut f = MaxFlow::new(4);
        f.add_edge(0, 1, 1.0);
        f.add_edge(1, 2, 0.25);
        f.add_edge(2, 3, 1.0);
        let v = f.run(0, 3);
        assert!((v - 0.25).abs() < 1e-12);
        let side = f.min_cut_source_side(0);
        assert!(side[0] && side[1]);
        assert!(!side[2] && !side[3]);
    }

    #[test]
    fn flow_on_reports_edge_flow() {
        let mut f = MaxFlow::new(3);
        let e1 = f.add_edge(0, 1, 0.9);
        let e2 = f.add_edge(1, 2, 0.3);
        f.run(0, 2);
        assert!((f.flow_on(e1) - 0.3).abs() < 1e-12);
        assert!((f.flow_on(e2) - 0.3).abs() < 1e-12);
    }
}
