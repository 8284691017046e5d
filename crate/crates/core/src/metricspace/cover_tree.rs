//! Simplified cover tree over point indices.
//!
//! Every node holds one point. A child sits exactly one level below its
//! parent (leveling), lies within `base^level(parent)` of it (covering), and
//! siblings are more than `base^(level(parent) - 1)` apart (separation). The
//! metric is bounded by 1, so a root at level 0 covers every point and the
//! root never has to be raised.

/// Floating-point slack for pruning; distances can violate the triangle
/// inequality by a few ulps.
const PRUNE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Node {
    point: usize,
    level: i32,
    /// Largest distance from this node's point to any descendant.
    max_dist: f64,
    children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct CoverTree {
    base: f64,
    nodes: Vec<Node>,
}

impl CoverTree {
    pub fn new(base: f64) -> Self {
        assert!(base > 1.0, "cover tree base must exceed 1");
        CoverTree {
            base,
            nodes: Vec::new(),
        }
    }

    fn covdist(&self, level: i32) -> f64 {
        self.base.powi(level)
    }

    /// Inserts `point`; `dist(a)` is the distance from point `a` to `point`.
    pub fn insert(&mut self, point: usize, dist: impl Fn(usize) -> f64) {
        if self.nodes.is_empty() {
            self.nodes.push(Node {
                point,
                level: 0,
                max_dist: 0.0,
                children: Vec::new(),
            });
            return;
        }
        let mut cur = 0;
        let mut d_cur = dist(self.nodes[0].point);
        loop {
            let node = &mut self.nodes[cur];
            node.max_dist = node.max_dist.max(d_cur);
            let next = self.nodes[cur].children.iter().find_map(|&c| {
                let child = &self.nodes[c];
                let d = dist(child.point);
                (d <= self.covdist(child.level)).then_some((c, d))
            });
            match next {
                Some((c, d)) => {
                    cur = c;
                    d_cur = d;
                }
                None => {
                    let level = self.nodes[cur].level - 1;
                    let id = self.nodes.len();
                    self.nodes.push(Node {
                        point,
                        level,
                        max_dist: 0.0,
                        children: Vec::new(),
                    });
                    self.nodes[cur].children.push(id);
                    return;
                }
            }
        }
    }

    /// Exact k nearest points to a query. `dist(a)` is the distance from point
    /// `a` to the query; `before(a, b)` orders equidistant points. Results are
    /// sorted by (distance, `before`).
    pub fn knn(
        &self,
        k: usize,
        dist: impl Fn(usize) -> f64,
        before: impl Fn(usize, usize) -> std::cmp::Ordering,
    ) -> Vec<(usize, f64)> {
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        if self.nodes.is_empty() || k == 0 {
            return best;
        }
        let offer = |best: &mut Vec<(usize, f64)>, p: usize, d: f64| {
            let pos = best
                .iter()
                .position(|&(q, dq)| d < dq || (d == dq && before(p, q).is_lt()))
                .unwrap_or(best.len());
            if pos < k {
                best.insert(pos, (p, d));
                best.truncate(k);
            }
        };
        let mut stack = vec![(0usize, dist(self.nodes[0].point))];
        while let Some((n, d_n)) = stack.pop() {
            let node = &self.nodes[n];
            if best.len() == k && d_n - node.max_dist > best[k - 1].1 + PRUNE_SLACK {
                continue;
            }
            offer(&mut best, node.point, d_n);
            let mut kids: Vec<(usize, f64)> = node
                .children
                .iter()
                .map(|&c| (c, dist(self.nodes[c].point)))
                .collect();
            // Closest child is visited first, so it goes on the stack last.
            kids.sort_by(|a, b| b.1.total_cmp(&a.1));
            stack.extend(kids);
        }
        best
    }

    /// Checks leveling, covering, separation, `max_dist` bounds and that every
    /// point appears exactly once. `dist(a, b)` is the point metric.
    pub fn check_invariants(
        &self,
        n_points: usize,
        dist: impl Fn(usize, usize) -> f64,
    ) -> Result<(), String> {
        if self.nodes.len() != n_points {
            return Err(format!("{} nodes for {n_points} points", self.nodes.len()));
        }
        let mut seen = vec![false; n_points];
        for node in &self.nodes {
            if std::mem::replace(&mut seen[node.point], true) {
                return Err(format!("point {} stored twice", node.point));
            }
        }
        let mut reached = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut reached[n], true) {
                return Err(format!("node {n} reachable twice"));
            }
            let node = &self.nodes[n];
            for &c in &node.children {
                let child = &self.nodes[c];
                if child.level != node.level - 1 {
                    return Err(format!("leveling broken at node {c}"));
                }
                let d = dist(node.point, child.point);
                if d > self.covdist(node.level) {
                    return Err(format!("covering broken: node {c} is {d} from its parent"));
                }
                stack.push(c);
            }
            let sep = self.covdist(node.level - 1);
            for (i, &a) in node.children.iter().enumerate() {
                for &b in &node.children[i + 1..] {
                    let d = dist(self.nodes[a].point, self.nodes[b].point);
                    if d <= sep {
                        return Err(format!("separation broken between nodes {a} and {b}: {d}"));
                    }
                }
            }
            let mut desc = node.children.clone();
            while let Some(x) = desc.pop() {
                let d = dist(node.point, self.nodes[x].point);
                if d > node.max_dist + PRUNE_SLACK {
                    return Err(format!("max_dist of node {n} understates descendant {x}"));
                }
                desc.extend(&self.nodes[x].children);
            }
        }
        if reached.iter().any(|r| !r) {
            return Err("unreachable node".into());
        }
        Ok(())
    }
}
