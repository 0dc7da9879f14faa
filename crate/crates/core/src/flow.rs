//! Integer max-flow by shortest augmenting paths (Edmonds-Karp).

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: i64,
}

#[derive(Clone, Debug)]
pub(crate) struct MaxFlow {
    adj: Vec<Vec<usize>>,
    // arcs come in pairs: 2k forward, 2k + 1 reverse
    arcs: Vec<Arc>,
    initial: Vec<i64>,
}

impl MaxFlow {
    pub(crate) fn new(nodes: usize) -> Self {
        MaxFlow { adj: vec![Vec::new(); nodes], arcs: Vec::new(), initial: Vec::new() }
    }

    /// Adds `from -> to` and returns the arc id.
    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap });
        self.arcs.push(Arc { to: from, cap: 0 });
        self.initial.push(cap);
        self.initial.push(0);
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub(crate) fn run(&mut self, source: usize, sink: usize) -> i64 {
        let n = self.adj.len();
        let mut total = 0;
        loop {
            let mut parent: Vec<Option<usize>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &a in &self.adj[u] {
                    let v = self.arcs[a].to;
                    if !seen[v] && self.arcs[a].cap > 0 {
                        seen[v] = true;
                        parent[v] = Some(a);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut bottleneck = i64::MAX;
            let mut v = sink;
            while let Some(a) = parent[v] {
                bottleneck = bottleneck.min(self.arcs[a].cap);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = sink;
            while let Some(a) = parent[v] {
                self.arcs[a].cap -= bottleneck;
                self.arcs[a ^ 1].cap += bottleneck;
                v = self.arcs[a ^ 1].to;
            }
            total += bottleneck;
        }
    }

    pub(crate) fn flow_on(&self, arc: usize) -> i64 {
        self.initial[arc] - self.arcs[arc].cap
    }

    /// Nodes from which `sink` is reachable in the residual graph.
    pub(crate) fn reaches(&self, sink: usize) -> Vec<bool> {
        let n = self.adj.len();
        let mut mark = vec![false; n];
        mark[sink] = true;
        let mut queue = VecDeque::from([sink]);
        while let Some(v) = queue.pop_front() {
            // residual u -> v exists iff the paired arc stored at v has reverse capacity
            for &a in &self.adj[v] {
                let u = self.arcs[a].to;
                if !mark[u] && self.arcs[a ^ 1].cap > 0 {
                    mark[u] = true;
                    queue.push_back(u);
                }
            }
        }
        mark
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        // CLRS figure 26.1: max flow 23
        let mut g = MaxFlow::new(6);
        for &(u, v, c) in &[(0, 1, 16), (0, 2, 13), (1, 3, 12), (2, 1, 4), (2, 4, 14), (3, 2, 9), (3, 5, 20), (4, 3, 7), (4, 5, 4)] {
            g.add_arc(u, v, c);
        }
        assert_eq!(g.run(0, 5), 23);
        let r = g.reaches(5);
        assert!(r[5] && !r[0]);
    }
}
