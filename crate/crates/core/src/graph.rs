//! Dependency graph over unclocked buses, network validation and the
//! static trigger schedule derived from both.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{BusId, Network, ProcessId};

/// `from` writes an unclocked bus that the unclocked process `to` reads, so
/// `to` must trigger after `from` within a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DepEdge {
    pub from: ProcessId,
    pub to: ProcessId,
    pub bus: BusId,
}

#[derive(Debug, Clone)]
pub struct DepGraph {
    pub nodes: Vec<ProcessId>,
    pub edges: Vec<DepEdge>,
    /// Clocked processes; they form the first wave of every cycle.
    pub roots: Vec<ProcessId>,
    preds: Vec<Vec<ProcessId>>,
    succs: Vec<Vec<ProcessId>>,
}

impl DepGraph {
    fn from_network(net: &Network) -> DepGraph {
        let n = net.processes.len();
        let mut edges = BTreeSet::new();
        for bus in net.buses.iter().filter(|b| !b.clocked()) {
            for &w in &bus.output_of {
                for &r in &bus.readers {
                    if !net.process(r).clocked() {
                        edges.insert(DepEdge {
                            from: w,
                            to: r,
                            bus: bus.id,
                        });
                    }
                }
            }
        }
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for e in &edges {
            if !preds[e.to.0].contains(&e.from) {
                preds[e.to.0].push(e.from);
            }
            if !succs[e.from.0].contains(&e.to) {
                succs[e.from.0].push(e.to);
            }
        }
        DepGraph {
            nodes: net.processes.iter().map(|p| p.id).collect(),
            edges: edges.into_iter().collect(),
            roots: net
                .processes
                .iter()
                .filter(|p| p.clocked())
                .map(|p| p.id)
                .collect(),
            preds,
            succs,
        }
    }

    pub fn predecessors(&self, p: ProcessId) -> &[ProcessId] {
        &self.preds[p.0]
    }

    pub fn successors(&self, p: ProcessId) -> &[ProcessId] {
        &self.succs[p.0]
    }

    pub fn incoming(&self, p: ProcessId) -> impl Iterator<Item = &DepEdge> {
        self.edges.iter().filter(move |e| e.to == p)
    }

    /// Trigger waves for one cycle: the clocked processes first, then
    /// repeatedly every untriggered process whose predecessors have all
    /// triggered. Ties keep registration order.
    pub fn waves(&self) -> Result<Vec<Vec<ProcessId>>, GraphError> {
        let n = self.nodes.len();
        let mut done = vec![false; n];
        let mut remaining = n;
        let mut waves = Vec::new();
        let first: Vec<ProcessId> = self.roots.clone();
        for p in &first {
            done[p.0] = true;
        }
        remaining -= first.len();
        waves.push(first);
        while remaining > 0 {
            let next: Vec<ProcessId> = self
                .nodes
                .iter()
                .copied()
                .filter(|p| !done[p.0] && self.preds[p.0].iter().all(|q| done[q.0]))
                .collect();
            if next.is_empty() {
                let stuck = self.nodes.iter().copied().filter(|p| !done[p.0]).collect();
                return Err(GraphError::Deadlock(stuck));
            }
            for p in &next {
                done[p.0] = true;
            }
            remaining -= next.len();
            waves.push(next);
        }
        Ok(waves)
    }

    /// Processes in trigger order.
    pub fn topological_order(&self) -> Result<Vec<ProcessId>, GraphError> {
        Ok(self.waves()?.into_iter().flatten().collect())
    }

    /// Every elementary cycle representative: one per strongly connected
    /// component that contains a cycle, as the node path around it.
    pub fn cycles(&self) -> Vec<Vec<ProcessId>> {
        let comps = tarjan(&self.succs);
        let mut out = Vec::new();
        for comp in comps {
            let start = *comp.iter().min().unwrap();
            let self_loop = self.succs[start.0].contains(&start);
            if comp.len() == 1 && !self_loop {
                continue;
            }
            let members: BTreeSet<_> = comp.iter().copied().collect();
            out.push(find_cycle(&self.succs, start, &members));
        }
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    UnclockedCycle(Vec<ProcessId>),
    Deadlock(Vec<ProcessId>),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::UnclockedCycle(p) => write!(f, "unclocked cycle through {p:?}"),
            GraphError::Deadlock(p) => write!(f, "no schedulable process among {p:?}"),
        }
    }
}

impl std::error::Error for GraphError {}

pub fn build_dependency_graph(net: &Network) -> Result<DepGraph, GraphError> {
    let g = DepGraph::from_network(net);
    if let Some(c) = g.cycles().into_iter().next() {
        return Err(GraphError::UnclockedCycle(c));
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    /// Process names around the cycle, starting from the lowest id.
    UnclockedCycle {
        path: Vec<String>,
    },
    ZombieBus {
        bus: String,
    },
    /// A clocked process reads a field with no initial value.
    UnguardedRead {
        process: String,
        field: String,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::UnclockedCycle { path } => {
                write!(f, "unclocked cycle: {} -> {}", path.join(" -> "), path[0])
            }
            Issue::ZombieBus { bus } => write!(f, "zombie bus `{bus}` has no readers or writers"),
            Issue::UnguardedRead { process, field } => write!(
                f,
                "clocked process `{process}` reads `{field}` which has no initial value"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn validate_network(net: &Network) -> ValidationReport {
    let mut report = ValidationReport::default();
    let g = DepGraph::from_network(net);
    for cycle in g.cycles() {
        report.errors.push(Issue::UnclockedCycle {
            path: cycle.iter().map(|p| net.process(*p).name.clone()).collect(),
        });
    }
    for bus in &net.buses {
        if bus.is_zombie() {
            report.warnings.push(Issue::ZombieBus {
                bus: bus.name.clone(),
            });
        }
    }
    for p in net.processes.iter().filter(|p| p.clocked()) {
        for f in net.fields_read_by(p.id) {
            if net.field_spec(f).initial.is_none() {
                report.warnings.push(Issue::UnguardedRead {
                    process: p.name.clone(),
                    field: net.field_name(f),
                });
            }
        }
    }
    report
}

fn tarjan(succs: &[Vec<ProcessId>]) -> Vec<Vec<ProcessId>> {
    struct State<'a> {
        succs: &'a [Vec<ProcessId>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<ProcessId>>,
    }
    fn visit(s: &mut State, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for w in s.succs[v].clone() {
            let w = w.0;
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack[w] = false;
                comp.push(ProcessId(w));
                if w == v {
                    break;
                }
            }
            comp.sort();
            s.out.push(comp);
        }
    }
    let n = succs.len();
    let mut s = State {
        succs,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

/// Shortest path from `start` back to itself inside one component (BFS).
fn find_cycle(
    succs: &[Vec<ProcessId>],
    start: ProcessId,
    members: &BTreeSet<ProcessId>,
) -> Vec<ProcessId> {
    use std::collections::VecDeque;
    let mut parent: std::collections::HashMap<ProcessId, ProcessId> = Default::default();
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &succs[v.0] {
            if !members.contains(&w) {
                continue;
            }
            if w == start {
                let mut path = vec![v];
                let mut cur = v;
                while cur != start {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return path;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(v);
                queue.push_back(w);
            }
        }
    }
    vec![start]
}
