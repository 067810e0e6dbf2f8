use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::theory::WeightMatrix;
use crate::types::RankType;

/// Edge `a -> b` whenever `W(a, b) > W(b, a)`: ranking `a` first gains more.
/// Pairs with equal opposing weights are not critical and get no edge.
#[derive(Debug, Clone)]
pub struct CriticalDigraph {
    types: Vec<RankType>,
    succ: Vec<Vec<usize>>,
}

impl CriticalDigraph {
    /// Builds a graph from explicit edges over `types` (indices into it).
    pub fn from_edges(types: Vec<RankType>, edges: &[(usize, usize)]) -> Self {
        let mut succ = vec![Vec::new(); types.len()];
        for &(a, b) in edges {
            succ[a].push(b);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        CriticalDigraph { types, succ }
    }

    pub fn types(&self) -> &[RankType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succ[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.succ[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }
}

pub fn build_critical_digraph(weights: &WeightMatrix) -> CriticalDigraph {
    let n = weights.len();
    let succ = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| a != b && weights.compare(a, b) == Ordering::Greater)
                .collect()
        })
        .collect();
    CriticalDigraph {
        types: weights.types().to_vec(),
        succ,
    }
}

/// Component sizes bucketed as 1 / 2-7 / 8-11 / 12+ plus the largest size.
/// A strongly connected component of a graph with at most one edge per pair
/// never has exactly two members, so the second bucket is in practice 3-7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeHistogram {
    /// Components with a single type.
    pub singletons: usize,
    pub small: usize,
    pub medium: usize,
    pub large: usize,
    pub max: usize,
    /// Number of types minus the number of multi-type components, i.e. the
    /// node count after contracting every multi-type component except for
    /// one representative. Some published SCC tables list this figure in
    /// their size-1 row.
    pub contracted_singletons: usize,
}

impl SizeHistogram {
    pub fn from_sizes(sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut h = SizeHistogram {
            singletons: 0,
            small: 0,
            medium: 0,
            large: 0,
            max: 0,
            contracted_singletons: 0,
        };
        let mut total = 0;
        for s in sizes {
            total += s;
            match s {
                0 => {}
                1 => h.singletons += 1,
                2..=7 => h.small += 1,
                8..=11 => h.medium += 1,
                _ => h.large += 1,
            }
            h.max = h.max.max(s);
        }
        h.contracted_singletons = total - (h.small + h.medium + h.large);
        h
    }

    /// `[1, 3-7, 8-11, >=12, max]`.
    pub fn as_row(&self) -> [usize; 5] {
        [self.singletons, self.small, self.medium, self.large, self.max]
    }

    /// As [`Self::as_row`] with the contracted count in the first slot.
    pub fn contracted_row(&self) -> [usize; 5] {
        [self.contracted_singletons, self.small, self.medium, self.large, self.max]
    }
}

/// Strongly connected components listed in a topological order of the
/// condensation. Members of each component are sorted by type index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPlan {
    pub components: Vec<Vec<usize>>,
}

impl ComponentPlan {
    pub fn histogram(&self) -> SizeHistogram {
        SizeHistogram::from_sizes(self.components.iter().map(Vec::len))
    }
}

/// Tarjan's algorithm, iterative. Returns the component id of every node.
fn tarjan(graph: &CriticalDigraph) -> (Vec<usize>, usize) {
    let n = graph.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![UNSEEN; n];
    let mut next_index = 0;
    let mut comps = 0;
    // (node, next successor slot)
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut slot)) = call.last_mut() {
            if let Some(&w) = graph.successors(v).get(*slot) {
                *slot += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp[w] = comps;
                    if w == v {
                        break;
                    }
                }
                comps += 1;
            }
        }
    }
    (comp, comps)
}

/// Strongly connected components in topological order. Among components
/// that are free to go next, the one with the highest Borda score among its
/// members goes first, then the one holding the lexicographically smallest
/// type.
pub fn condense(graph: &CriticalDigraph) -> ComponentPlan {
    let (comp, count) = tarjan(graph);
    let mut members = vec![Vec::new(); count];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    let mut indegree = vec![0usize; count];
    let mut dag: Vec<Vec<usize>> = vec![Vec::new(); count];
    for v in 0..graph.len() {
        for &w in graph.successors(v) {
            if comp[v] != comp[w] {
                dag[comp[v]].push(comp[w]);
            }
        }
    }
    for out in &mut dag {
        out.sort_unstable();
        out.dedup();
        for &c in out.iter() {
            indegree[c] += 1;
        }
    }
    let key = |c: usize| {
        let best = members[c]
            .iter()
            .map(|&v| graph.types()[v].borda_score())
            .max()
            .unwrap_or(0);
        let least = members[c].iter().map(|&v| &graph.types()[v]).min().cloned();
        (best, Reverse(least))
    };
    let mut ready: BinaryHeap<_> = (0..count)
        .filter(|&c| indegree[c] == 0)
        .map(|c| (key(c), c))
        .collect();
    let mut components = Vec::with_capacity(count);
    while let Some((_, c)) = ready.pop() {
        components.push(members[c].clone());
        for &d in &dag[c] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push((key(d), d));
            }
        }
    }
    assert_eq!(components.len(), count, "condensation must be acyclic");
    ComponentPlan { components }
}
