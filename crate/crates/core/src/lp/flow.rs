//! Min-cost circulation with lower bounds, by successive shortest paths.

use std::collections::VecDeque;

use crate::error::{internal, invalid, Result};

const COST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub upper: i64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowNetwork {
    nodes: usize,
    arcs: Vec<FlowArc>,
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(nodes: usize) -> Self {
        Residual { head: Vec::new(), cap: Vec::new(), cost: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    /// Returns the index of the forward edge; its reverse is `index ^ 1`.
    fn add(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let e = self.head.len();
        self.head.push(to);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[from].push(e);
        self.head.push(from);
        self.cap.push(0);
        self.cost.push(-cost);
        self.adj[to].push(e + 1);
        e
    }

    fn push(&mut self, e: usize, amount: i64) {
        self.cap[e] -= amount;
        self.cap[e ^ 1] += amount;
    }

    /// Cheapest augmenting path by SPFA; returns predecessor edges.
    fn shortest_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut queued = vec![false; n];
        let mut relax_count = vec![0usize; n];
        let mut queue = VecDeque::new();
        dist[s] = 0.0;
        queue.push_back(s);
        queued[s] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &e in &self.adj[u] {
                if self.cap[e] <= 0 {
                    continue;
                }
                let v = self.head[e];
                let nd = dist[u] + self.cost[e];
                if nd < dist[v] - COST_TOL * (1.0 + dist[v].abs().min(1e300)) {
                    dist[v] = nd;
                    pred[v] = e;
                    relax_count[v] += 1;
                    if relax_count[v] > n + 1 {
                        // only reachable through a numerically negative cycle
                        return None;
                    }
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        if !dist[t].is_finite() {
            return None;
        }
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let e = pred[v];
            path.push(e);
            v = self.head[e ^ 1];
        }
        path.reverse();
        Some(path)
    }
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { nodes, arcs: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    pub fn add_arc(&mut self, from: usize, to: usize, lower: i64, upper: i64, cost: f64) -> usize {
        self.arcs.push(FlowArc { from, to, lower, upper, cost });
        self.arcs.len() - 1
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    fn validate(&self) -> Result<()> {
        for (k, a) in self.arcs.iter().enumerate() {
            if a.from >= self.nodes || a.to >= self.nodes {
                return Err(invalid!("arc {k} names an unknown node"));
            }
            if a.lower < 0 || a.lower > a.upper {
                return Err(invalid!("arc {k} has bounds [{}, {}]", a.lower, a.upper));
            }
            if !a.cost.is_finite() {
                return Err(invalid!("arc {k} has a non-finite cost"));
            }
        }
        Ok(())
    }

    /// Minimum-cost feasible circulation, or `None` when the bounds admit none.
    pub fn min_cost_circulation(&self) -> Result<Option<Vec<i64>>> {
        self.validate()?;
        let s = self.nodes;
        let t = self.nodes + 1;
        let mut res = Residual::new(self.nodes + 2);
        let mut excess = vec![0i64; self.nodes];
        let mut base = vec![0i64; self.arcs.len()];
        let mut edges = Vec::with_capacity(self.arcs.len());
        for (k, a) in self.arcs.iter().enumerate() {
            let cap = a.upper - a.lower;
            let e = res.add(a.from, a.to, cap, a.cost);
            base[k] = a.lower;
            // negative arcs start saturated so the residual graph has no negative cycle
            if a.cost < 0.0 && cap > 0 {
                res.push(e, cap);
            }
            let moved = a.lower + if a.cost < 0.0 { cap } else { 0 };
            excess[a.to] += moved;
            excess[a.from] -= moved;
            edges.push(e);
        }
        let mut demand = 0i64;
        for (v, &x) in excess.iter().enumerate() {
            if x > 0 {
                res.add(s, v, x, 0.0);
                demand += x;
            } else if x < 0 {
                res.add(v, t, -x, 0.0);
            }
        }
        let mut sent = 0i64;
        while sent < demand {
            let Some(path) = res.shortest_path(s, t) else { break };
            let amount = path.iter().map(|&e| res.cap[e]).min().unwrap_or(0);
            if amount <= 0 {
                return Err(internal!("augmenting path without capacity"));
            }
            let amount = amount.min(demand - sent);
            for &e in &path {
                res.push(e, amount);
            }
            sent += amount;
        }
        if sent < demand {
            return Ok(None);
        }
        let flows = self
            .arcs
            .iter()
            .zip(&edges)
            .zip(&base)
            .map(|((a, &e), &lo)| lo + (a.upper - a.lower - res.cap[e]))
            .collect();
        Ok(Some(flows))
    }

    pub fn cost_of(&self, flows: &[i64]) -> f64 {
        self.arcs.iter().zip(flows).map(|(a, &f)| a.cost * f as f64).sum()
    }
}
