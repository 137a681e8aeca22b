//! Inductive-miner-style process discovery with a configurable noise
//! threshold.
//!
//! Cut detection runs in the fixed order exclusive-choice, sequence,
//! parallel, loop on a frequency-filtered directly-follows graph. Noise
//! affects discovery in three places:
//!
//! * edge filtering — an edge survives only if it is frequent relative to
//!   both the strongest edge leaving its source and the strongest edge
//!   entering its target;
//! * start/end filtering — infrequent start and end activities are dropped
//!   relative to the strongest start/end;
//! * split-level filtering — empty projections, repeated single activities
//!   and off-component events are treated as noise once they fall below the
//!   threshold relative to the dominant behaviour.
//!
//! At noise 0 all three reduce to the exact inductive-miner semantics: no
//! event is ever dropped and every empty projection produces a silent branch.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::event::EventLog;
use crate::tree::{Operator, ProcessTree};

/// Weighted directly-follows relation of a log, after noise filtering.
///
/// The edge filter is outgoing-relative: `(a, b)` is removed when
/// `freq(a, b) < noise * max_c freq(a, c)`. Start and end sets are filtered
/// against their own maxima the same way. `noise == 0` keeps everything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectlyFollowsGraph {
    pub nodes: Vec<String>,
    pub edge_freq: BTreeMap<(String, String), u64>,
    pub start_freq: BTreeMap<String, u64>,
    pub end_freq: BTreeMap<String, u64>,
}

pub fn build_dfg(log: &EventLog, noise: f64) -> DirectlyFollowsGraph {
    let noise = noise.clamp(0.0, 1.0);
    let mut edges: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut starts: BTreeMap<String, u64> = BTreeMap::new();
    let mut ends: BTreeMap<String, u64> = BTreeMap::new();
    for trace in &log.traces {
        let seq: Vec<&str> = trace.activities().collect();
        if let Some(first) = seq.first() {
            *starts.entry(first.to_string()).or_insert(0) += 1;
        }
        if let Some(last) = seq.last() {
            *ends.entry(last.to_string()).or_insert(0) += 1;
        }
        for pair in seq.windows(2) {
            *edges.entry((pair[0].to_string(), pair[1].to_string())).or_insert(0) += 1;
        }
    }
    if noise > 0.0 {
        let mut max_out: BTreeMap<&str, u64> = BTreeMap::new();
        for ((a, _), f) in &edges {
            let m = max_out.entry(a).or_insert(0);
            *m = (*m).max(*f);
        }
        let keep: BTreeSet<(String, String)> = edges
            .iter()
            .filter(|((a, _), f)| (**f as f64) >= noise * max_out[a.as_str()] as f64)
            .map(|(k, _)| k.clone())
            .collect();
        edges.retain(|k, _| keep.contains(k));
        let max_start = starts.values().copied().max().unwrap_or(0);
        starts.retain(|_, f| (*f as f64) >= noise * max_start as f64);
        let max_end = ends.values().copied().max().unwrap_or(0);
        ends.retain(|_, f| (*f as f64) >= noise * max_end as f64);
    }
    DirectlyFollowsGraph {
        nodes: log.activity_alphabet.clone(),
        edge_freq: edges,
        start_freq: starts,
        end_freq: ends,
    }
}

/// Discover a process tree from a log. Total: when no cut applies the
/// affected sub-log collapses to a flower model.
pub fn discover(log: &EventLog, noise: f64) -> ProcessTree {
    discover_with_observer(log, noise, &mut |_| {})
}

/// Like [`discover`], reporting each decision to `observer` (used by tests
/// and debugging tools).
pub fn discover_with_observer(
    log: &EventLog,
    noise: f64,
    observer: &mut dyn FnMut(&str),
) -> ProcessTree {
    let noise = noise.clamp(0.0, 1.0);
    let names = log.activity_alphabet.clone();
    let index: BTreeMap<&str, Act> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as Act))
        .collect();
    let traces: Vec<Vec<Act>> = log
        .traces
        .iter()
        .map(|t| t.activities().map(|a| index[a]).collect())
        .collect();
    let mut ctx = Ctx { names, noise, observer };
    let mut tree = ctx.mine(traces, 0);
    tree.renumber_taus();
    tree
}

type Act = u32;

struct Ctx<'a> {
    names: Vec<String>,
    noise: f64,
    observer: &'a mut dyn FnMut(&str),
}

/// Directly-follows data of one sub-log, with both raw and filtered views.
struct Graph {
    nodes: Vec<Act>,
    raw_edges: BTreeMap<(Act, Act), u64>,
    edges: BTreeSet<(Act, Act)>,
    start_acts: BTreeSet<Act>,
    end_acts: BTreeSet<Act>,
    raw_start_acts: BTreeSet<Act>,
    raw_end_acts: BTreeSet<Act>,
}

impl Graph {
    fn build(traces: &[Vec<Act>], noise: f64) -> Graph {
        let mut raw_edges: BTreeMap<(Act, Act), u64> = BTreeMap::new();
        let mut starts: BTreeMap<Act, u64> = BTreeMap::new();
        let mut ends: BTreeMap<Act, u64> = BTreeMap::new();
        let mut nodes: Vec<Act> = Vec::new();
        let mut seen: BTreeSet<Act> = BTreeSet::new();
        for trace in traces {
            for &a in trace {
                if seen.insert(a) {
                    nodes.push(a);
                }
            }
            if let Some(&first) = trace.first() {
                *starts.entry(first).or_insert(0) += 1;
            }
            if let Some(&last) = trace.last() {
                *ends.entry(last).or_insert(0) += 1;
            }
            for pair in trace.windows(2) {
                *raw_edges.entry((pair[0], pair[1])).or_insert(0) += 1;
            }
        }
        let mut max_out: BTreeMap<Act, u64> = BTreeMap::new();
        let mut max_in: BTreeMap<Act, u64> = BTreeMap::new();
        for (&(a, b), &f) in &raw_edges {
            let mo = max_out.entry(a).or_insert(0);
            *mo = (*mo).max(f);
            let mi = max_in.entry(b).or_insert(0);
            *mi = (*mi).max(f);
        }
        let edges: BTreeSet<(Act, Act)> = raw_edges
            .iter()
            .filter(|(&(a, b), &f)| {
                noise == 0.0
                    || ((f as f64) >= noise * max_out[&a] as f64
                        && (f as f64) >= noise * max_in[&b] as f64)
            })
            .map(|(&k, _)| k)
            .collect();
        let max_start = starts.values().copied().max().unwrap_or(0);
        let max_end = ends.values().copied().max().unwrap_or(0);
        let start_acts: BTreeSet<Act> = starts
            .iter()
            .filter(|(_, &f)| (f as f64) >= noise * max_start as f64)
            .map(|(&a, _)| a)
            .collect();
        let end_acts: BTreeSet<Act> = ends
            .iter()
            .filter(|(_, &f)| (f as f64) >= noise * max_end as f64)
            .map(|(&a, _)| a)
            .collect();
        Graph {
            nodes,
            raw_edges,
            edges,
            start_acts,
            end_acts,
            raw_start_acts: starts.keys().copied().collect(),
            raw_end_acts: ends.keys().copied().collect(),
        }
    }

    /// Activities with no surviving edge in either direction and no start or
    /// end occurrence: disconnected noise, dropped before cut detection.
    fn orphans(&self) -> BTreeSet<Act> {
        let mut connected: BTreeSet<Act> = BTreeSet::new();
        for &(a, b) in &self.edges {
            connected.insert(a);
            connected.insert(b);
        }
        self.nodes
            .iter()
            .copied()
            .filter(|a| {
                !connected.contains(a)
                    && !self.raw_start_acts.contains(a)
                    && !self.raw_end_acts.contains(a)
            })
            .collect()
    }

    fn has_edge(&self, a: Act, b: Act) -> bool {
        self.edges.contains(&(a, b))
    }
}

impl<'a> Ctx<'a> {
    fn name(&self, a: Act) -> &str {
        &self.names[a as usize]
    }

    fn fmt_group(&self, group: &BTreeSet<Act>) -> String {
        let names: Vec<&str> = group.iter().map(|&a| self.name(a)).collect();
        format!("{{{}}}", names.join(","))
    }

    fn mine(&mut self, mut traces: Vec<Vec<Act>>, depth: usize) -> ProcessTree {
        loop {
            // Empty-trace handling.
            let empties = traces.iter().filter(|t| t.is_empty()).count();
            if empties == traces.len() {
                return ProcessTree::Tau(0);
            }
            if empties > 0 {
                let nonempty: Vec<Vec<Act>> = traces.iter().filter(|t| !t.is_empty()).cloned().collect();
                let max_variant = variant_counts(&nonempty).into_values().max().unwrap_or(0);
                let wrap = (empties as f64) >= self.noise * max_variant as f64;
                (self.observer)(&format!(
                    "depth {depth}: {empties} empty projections, max variant {max_variant}, {}",
                    if wrap { "silent branch" } else { "dropped as noise" }
                ));
                if wrap {
                    let subtree = self.mine(nonempty, depth + 1);
                    let mut children = vec![ProcessTree::Tau(0)];
                    match subtree {
                        ProcessTree::Node(Operator::Xor, mut sub) => children.append(&mut sub),
                        other => children.push(other),
                    }
                    return ProcessTree::Node(Operator::Xor, children);
                }
                traces = nonempty;
                continue;
            }
            // Single-activity base case.
            let first = traces[0][0];
            if traces.iter().all(|t| t.iter().all(|&a| a == first)) {
                let singles = traces.iter().filter(|t| t.len() == 1).count();
                let multis = traces.len() - singles;
                let leaf = ProcessTree::Activity(self.name(first).to_string());
                if multis == 0 {
                    return leaf;
                }
                if (multis as f64) >= self.noise * singles as f64 {
                    (self.observer)(&format!(
                        "depth {depth}: {} repeats ({multis} of {} traces): loop",
                        self.name(first),
                        traces.len()
                    ));
                    return ProcessTree::looped(leaf, ProcessTree::Tau(0));
                }
                (self.observer)(&format!(
                    "depth {depth}: {} repeats below threshold: leaf",
                    self.name(first)
                ));
                return leaf;
            }
            // Drop disconnected noise activities, then re-check base cases.
            let graph = Graph::build(&traces, self.noise);
            let orphans = graph.orphans();
            if orphans.is_empty() {
                return self.cut(traces, graph, depth);
            }
            (self.observer)(&format!(
                "depth {depth}: dropping disconnected {}",
                self.fmt_group(&orphans)
            ));
            for trace in &mut traces {
                trace.retain(|a| !orphans.contains(a));
            }
        }
    }

    fn cut(&mut self, traces: Vec<Vec<Act>>, graph: Graph, depth: usize) -> ProcessTree {
        if let Some(components) = xor_cut(&graph) {
            (self.observer)(&format!(
                "depth {depth}: xor cut {}",
                components.iter().map(|c| self.fmt_group(c)).collect::<Vec<_>>().join(" ")
            ));
            let assigned = xor_split(&traces, &components);
            let children = assigned
                .into_iter()
                .map(|part| self.mine(part, depth + 1))
                .collect();
            return ProcessTree::Node(Operator::Xor, children);
        }
        if let Some(groups) = seq_cut(&graph) {
            (self.observer)(&format!(
                "depth {depth}: seq cut {}",
                groups.iter().map(|g| self.fmt_group(g)).collect::<Vec<_>>().join(" -> ")
            ));
            let children = groups
                .iter()
                .map(|group| {
                    let part: Vec<Vec<Act>> = traces
                        .iter()
                        .map(|t| t.iter().copied().filter(|a| group.contains(a)).collect())
                        .collect();
                    self.mine(part, depth + 1)
                })
                .collect();
            return ProcessTree::Node(Operator::Seq, children);
        }
        if let Some((first, rest)) = parallel_cut(&graph, &traces) {
            (self.observer)(&format!(
                "depth {depth}: parallel cut {} || {}",
                self.fmt_group(&first),
                self.fmt_group(&rest)
            ));
            let project = |group: &BTreeSet<Act>| -> Vec<Vec<Act>> {
                traces
                    .iter()
                    .map(|t| t.iter().copied().filter(|a| group.contains(a)).collect())
                    .collect()
            };
            let left = self.mine(project(&first), depth + 1);
            let right = self.mine(project(&rest), depth + 1);
            return ProcessTree::and(vec![left, right]);
        }
        if let Some((body, redo)) = loop_cut(&graph) {
            (self.observer)(&format!(
                "depth {depth}: loop cut body {} redo {}",
                self.fmt_group(&body),
                self.fmt_group(&redo)
            ));
            let (body_segs, redo_segs) = loop_split(&traces, &body);
            let body_tree = self.mine(body_segs, depth + 1);
            let redo_tree = self.mine(redo_segs, depth + 1);
            return ProcessTree::looped(body_tree, redo_tree);
        }
        // Fall-through: flower model over the remaining activities.
        let mut seen = BTreeSet::new();
        let mut leaves = Vec::new();
        for trace in &traces {
            for &a in trace {
                if seen.insert(a) {
                    leaves.push(ProcessTree::Activity(self.name(a).to_string()));
                }
            }
        }
        (self.observer)(&format!("depth {depth}: no cut applies, flower over {} activities", leaves.len()));
        ProcessTree::looped(ProcessTree::Node(Operator::Xor, leaves), ProcessTree::Tau(0))
    }
}

fn variant_counts(traces: &[Vec<Act>]) -> BTreeMap<Vec<Act>, u64> {
    let mut counts = BTreeMap::new();
    for t in traces {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    counts
}

/// First position of any member of `group`, scanning traces in order.
fn first_occurrence(traces: &[Vec<Act>], group: &BTreeSet<Act>) -> (usize, usize) {
    for (ti, trace) in traces.iter().enumerate() {
        for (ei, a) in trace.iter().enumerate() {
            if group.contains(a) {
                return (ti, ei);
            }
        }
    }
    (usize::MAX, usize::MAX)
}

// ---------------------------------------------------------------------------
// Cuts
// ---------------------------------------------------------------------------

fn undirected_components(nodes: &[Act], edges: &BTreeSet<(Act, Act)>) -> Vec<BTreeSet<Act>> {
    let mut parent: BTreeMap<Act, Act> = nodes.iter().map(|&a| (a, a)).collect();
    fn find(parent: &mut BTreeMap<Act, Act>, a: Act) -> Act {
        let mut root = a;
        while parent[&root] != root {
            root = parent[&root];
        }
        let mut cur = a;
        while parent[&cur] != root {
            let next = parent[&cur];
            parent.insert(cur, root);
            cur = next;
        }
        root
    }
    for &(a, b) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            parent.insert(ra, rb);
        }
    }
    let mut groups: BTreeMap<Act, BTreeSet<Act>> = BTreeMap::new();
    for &a in nodes {
        let r = find(&mut parent, a);
        groups.entry(r).or_default().insert(a);
    }
    groups.into_values().collect()
}

fn xor_cut(graph: &Graph) -> Option<Vec<BTreeSet<Act>>> {
    let comps = undirected_components(&graph.nodes, &graph.edges);
    if comps.len() >= 2 {
        Some(comps)
    } else {
        None
    }
}

/// Assign each trace to the component holding most of its events; ties go to
/// the component of the earliest tied event. Off-component events are dropped.
fn xor_split(traces: &[Vec<Act>], components: &[BTreeSet<Act>]) -> Vec<Vec<Vec<Act>>> {
    // order components by first occurrence
    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by_key(|&i| first_occurrence(traces, &components[i]));
    let ordered: Vec<&BTreeSet<Act>> = order.iter().map(|&i| &components[i]).collect();
    let comp_of = |a: Act| ordered.iter().position(|c| c.contains(&a));
    let mut result: Vec<Vec<Vec<Act>>> = vec![Vec::new(); ordered.len()];
    for trace in traces {
        let mut counts = vec![0usize; ordered.len()];
        for &a in trace {
            if let Some(c) = comp_of(a) {
                counts[c] += 1;
            }
        }
        let best = counts.iter().copied().max().unwrap_or(0);
        if best == 0 {
            continue;
        }
        // tie-break: earliest event belonging to a maximal component
        let chosen = trace
            .iter()
            .filter_map(|&a| comp_of(a))
            .find(|&c| counts[c] == best)
            .expect("some event belongs to a component");
        let projected: Vec<Act> = trace
            .iter()
            .copied()
            .filter(|&a| ordered[chosen].contains(&a))
            .collect();
        result[chosen].push(projected);
    }
    result
}

fn seq_cut(graph: &Graph) -> Option<Vec<BTreeSet<Act>>> {
    let sccs = strongly_connected(&graph.nodes, &graph.edges);
    let n = sccs.len();
    if n < 2 {
        return None;
    }
    let comp_of: BTreeMap<Act, usize> = sccs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&a| (a, i)))
        .collect();
    // transitive reachability between SCCs
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in &graph.edges {
        let (ca, cb) = (comp_of[&a], comp_of[&b]);
        if ca != cb {
            reach[ca][cb] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    // merge mutually unreachable (and, defensively, mutually reachable)
    // SCC groups until a total order remains
    let mut group_of: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if group_of[i] == group_of[j] {
                    continue;
                }
                let (gi, gj) = (group_of[i], group_of[j]);
                let fwd = (0..n).any(|x| {
                    (0..n).any(|y| group_of[x] == gi && group_of[y] == gj && reach[x][y])
                });
                let bwd = (0..n).any(|x| {
                    (0..n).any(|y| group_of[x] == gj && group_of[y] == gi && reach[x][y])
                });
                if fwd == bwd {
                    for g in group_of.iter_mut() {
                        if *g == gj {
                            *g = gi;
                        }
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<Act>> = BTreeMap::new();
    for (scc_idx, scc) in sccs.iter().enumerate() {
        groups.entry(group_of[scc_idx]).or_default().extend(scc.iter().copied());
    }
    if groups.len() < 2 {
        return None;
    }
    // order groups by reachability
    let mut ordered: Vec<(usize, BTreeSet<Act>)> = groups.into_iter().collect();
    ordered.sort_by(|(ga, _), (gb, _)| {
        let fwd = (0..n).any(|x| {
            (0..n).any(|y| group_of[x] == *ga && group_of[y] == *gb && reach[x][y])
        });
        if fwd {
            core::cmp::Ordering::Less
        } else {
            core::cmp::Ordering::Greater
        }
    });
    Some(ordered.into_iter().map(|(_, g)| g).collect())
}

fn strongly_connected(nodes: &[Act], edges: &BTreeSet<(Act, Act)>) -> Vec<BTreeSet<Act>> {
    // iterative Tarjan
    let idx_of: BTreeMap<Act, usize> = nodes.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let n = nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[idx_of[&a]].push(idx_of[&b]);
    }
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut counter = 0usize;
    let mut result: Vec<BTreeSet<Act>> = Vec::new();
    // explicit DFS stack: (node, child cursor)
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut dfs: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&(v, cursor)) = dfs.last() {
            if cursor == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if cursor < adj[v].len() {
                dfs.last_mut().expect("non-empty dfs").1 += 1;
                let w = adj[v][cursor];
                if index[w] == usize::MAX {
                    dfs.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut comp = BTreeSet::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.insert(nodes[w]);
                        if w == v {
                            break;
                        }
                    }
                    result.push(comp);
                }
                dfs.pop();
                if let Some(&(parent, _)) = dfs.last() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }
    result
}

/// Parallel cut, binarized: the smallest valid component first, everything
/// else merged into the second branch.
fn parallel_cut(graph: &Graph, traces: &[Vec<Act>]) -> Option<(BTreeSet<Act>, BTreeSet<Act>)> {
    if graph.nodes.len() < 2 {
        return None;
    }
    // complement relation: activities not doubly connected stay together
    let mut h_edges: BTreeSet<(Act, Act)> = BTreeSet::new();
    for (i, &a) in graph.nodes.iter().enumerate() {
        for &b in &graph.nodes[i + 1..] {
            if !(graph.has_edge(a, b) && graph.has_edge(b, a)) {
                h_edges.insert((a, b));
            }
        }
    }
    let comps = undirected_components(&graph.nodes, &h_edges);
    if comps.len() < 2 {
        return None;
    }
    let valid = |c: &BTreeSet<Act>| {
        c.iter().any(|a| graph.raw_start_acts.contains(a))
            && c.iter().any(|a| graph.raw_end_acts.contains(a))
    };
    let (mut valids, invalids): (Vec<BTreeSet<Act>>, Vec<BTreeSet<Act>>) =
        comps.into_iter().partition(valid);
    if valids.len() < 2 {
        return None;
    }
    // fold invalid components into the most strongly connected valid one
    for inv in invalids {
        let weight = |c: &BTreeSet<Act>| -> u64 {
            graph
                .raw_edges
                .iter()
                .filter(|(&(a, b), _)| {
                    (inv.contains(&a) && c.contains(&b)) || (c.contains(&a) && inv.contains(&b))
                })
                .map(|(_, &f)| f)
                .sum()
        };
        let best = (0..valids.len())
            .max_by_key(|&i| (weight(&valids[i]), core::cmp::Reverse(first_occurrence(traces, &valids[i]))))
            .expect("at least one valid component");
        valids[best].extend(inv);
    }
    valids.sort_by_key(|c| (c.len(), first_occurrence(traces, c)));
    let first = valids.remove(0);
    let rest: BTreeSet<Act> = valids.into_iter().flatten().collect();
    Some((first, rest))
}

/// Loop cut: body spans all filtered start/end activities; redo components
/// connect only end -> redo -> start.
fn loop_cut(graph: &Graph) -> Option<(BTreeSet<Act>, BTreeSet<Act>)> {
    let mut body: BTreeSet<Act> = graph.start_acts.union(&graph.end_acts).copied().collect();
    if body.is_empty() {
        return None;
    }
    let outside: Vec<Act> = graph.nodes.iter().copied().filter(|a| !body.contains(a)).collect();
    if outside.is_empty() {
        return None;
    }
    let sub_edges: BTreeSet<(Act, Act)> = graph
        .edges
        .iter()
        .copied()
        .filter(|(a, b)| !body.contains(a) && !body.contains(b))
        .collect();
    let comps = undirected_components(&outside, &sub_edges);
    let mut redo: BTreeSet<Act> = BTreeSet::new();
    for comp in comps {
        let mut ok = true;
        for &(a, b) in &graph.edges {
            let a_in = comp.contains(&a);
            let b_in = comp.contains(&b);
            if a_in == b_in {
                continue;
            }
            if b_in && !graph.end_acts.contains(&a) {
                ok = false; // entering the component from a non-end
                break;
            }
            if a_in && !graph.start_acts.contains(&b) {
                ok = false; // leaving the component towards a non-start
                break;
            }
        }
        if ok {
            redo.extend(comp);
        } else {
            body.extend(comp);
        }
    }
    if redo.is_empty() {
        return None;
    }
    Some((body, redo))
}

/// Segment traces into alternating body/redo stretches.
fn loop_split(traces: &[Vec<Act>], body: &BTreeSet<Act>) -> (Vec<Vec<Act>>, Vec<Vec<Act>>) {
    let mut body_segments = Vec::new();
    let mut redo_segments = Vec::new();
    for trace in traces {
        let mut segment: Vec<Act> = Vec::new();
        let mut in_body = true;
        for &a in trace {
            let a_in_body = body.contains(&a);
            if segment.is_empty() || a_in_body == in_body {
                in_body = a_in_body;
                segment.push(a);
            } else {
                if in_body {
                    body_segments.push(core::mem::take(&mut segment));
                } else {
                    redo_segments.push(core::mem::take(&mut segment));
                }
                in_body = a_in_body;
                segment.push(a);
            }
        }
        if !segment.is_empty() {
            if in_body {
                body_segments.push(segment);
            } else {
                redo_segments.push(segment);
            }
        }
    }
    (body_segments, redo_segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{Event, EventLog, Trace};
    use crate::tree::parse_tree;

    fn log_of(variants: &[(&[&str], usize)]) -> EventLog {
        let mut traces = Vec::new();
        let mut case = 0;
        for (acts, count) in variants {
            for _ in 0..*count {
                case += 1;
                traces.push(Trace {
                    case_id: format!("{case}"),
                    events: acts.iter().map(|a| Event::new(*a)).collect(),
                });
            }
        }
        EventLog::from_traces(traces, "inline").unwrap()
    }

    fn running_example() -> EventLog {
        log_of(&[
            (&["Register_request", "Examine_thoroughly", "Check_ticket", "Decide", "Reject_request"], 1),
            (&["Register_request", "Check_ticket", "Examine_casually", "Decide", "Pay_compensation"], 1),
            (&["Register_request", "Examine_casually", "Check_ticket", "Decide", "Reinitiate_request",
               "Examine_thoroughly", "Check_ticket", "Decide", "Pay_compensation"], 1),
            (&["Register_request", "Check_ticket", "Examine_thoroughly", "Decide", "Reject_request"], 1),
            (&["Register_request", "Examine_casually", "Check_ticket", "Decide", "Reinitiate_request",
               "Check_ticket", "Examine_casually", "Decide", "Reinitiate_request", "Examine_casually",
               "Check_ticket", "Decide", "Reject_request"], 1),
            (&["Register_request", "Check_ticket", "Examine_casually", "Decide", "Pay_compensation"], 1),
        ])
    }

    #[test]
    fn dfg_counts_adjacent_pairs() {
        let log = log_of(&[(&["a", "b"], 2), (&["a", "c"], 1)]);
        let dfg = build_dfg(&log, 0.0);
        assert_eq!(dfg.edge_freq[&("a".into(), "b".into())], 2);
        assert_eq!(dfg.edge_freq[&("a".into(), "c".into())], 1);
        assert_eq!(dfg.start_freq[&"a".to_string()], 3);
    }

    #[test]
    fn dfg_noise_filter_is_outgoing_relative() {
        // freq(a,c)=1 < 0.6 * max_out(a)=2 -> removed
        let log = log_of(&[(&["a", "b"], 2), (&["a", "c"], 1)]);
        let dfg = build_dfg(&log, 0.6);
        assert!(dfg.edge_freq.contains_key(&("a".into(), "b".into())));
        assert!(!dfg.edge_freq.contains_key(&("a".into(), "c".into())));
    }

    #[test]
    fn dfg_singleton_trace() {
        let log = log_of(&[(&["a"], 1)]);
        let dfg = build_dfg(&log, 0.0);
        assert!(dfg.edge_freq.is_empty());
        assert_eq!(dfg.start_freq[&"a".to_string()], 1);
        assert_eq!(dfg.end_freq[&"a".to_string()], 1);
    }

    #[test]
    fn dfg_pruning_is_monotone_in_noise() {
        let log = log_of(&[
            (&["a", "b", "d"], 5),
            (&["a", "c", "d"], 2),
            (&["a", "b", "c", "d"], 1),
        ]);
        let mut previous = usize::MAX;
        for noise in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let count = build_dfg(&log, noise).edge_freq.len();
            assert!(count <= previous, "edge count grew at noise {noise}");
            previous = count;
        }
    }

    #[test]
    fn forced_sequence_cut() {
        let log = log_of(&[(&["a", "b"], 1)]);
        let tree = discover(&log, 0.0);
        assert_eq!(tree, parse_tree("Seq(a, b)").unwrap());
    }

    #[test]
    fn xor_of_disjoint_traces() {
        let log = log_of(&[(&["a"], 1), (&["b"], 1)]);
        let tree = discover(&log, 0.0);
        assert!(tree.structurally_equal(&parse_tree("Xor(a, b)").unwrap()));
    }

    #[test]
    fn parallel_needs_both_orders() {
        let log = log_of(&[(&["a", "b"], 1), (&["b", "a"], 1)]);
        let tree = discover(&log, 0.0);
        assert!(tree.structurally_equal(&parse_tree("And(a, b)").unwrap()));
    }

    #[test]
    fn loop_detected_from_repetition() {
        let log = log_of(&[(&["a", "b"], 1), (&["a", "b", "r", "a", "b"], 1)]);
        let tree = discover(&log, 0.0);
        assert!(tree.structurally_equal(&parse_tree("Loop(Seq(a, b), r)").unwrap()));
    }

    #[test]
    fn optional_activity_becomes_silent_branch() {
        let log = log_of(&[(&["a", "b"], 1), (&["a"], 1)]);
        let tree = discover(&log, 0.0);
        assert!(tree.structurally_equal(&parse_tree("Seq(a, Xor(tau, b))").unwrap()));
    }

    #[test]
    fn single_activity_with_repeats_loops() {
        let log = log_of(&[(&["a"], 2), (&["a", "a"], 1)]);
        let tree = discover(&log, 0.0);
        assert!(tree.structurally_equal(&parse_tree("Loop(a, tau)").unwrap()));
    }

    #[test]
    fn running_example_reproduces_reference_tree() {
        let tree = discover(&running_example(), 0.0);
        let expected = parse_tree(
            "Seq(Register_request, Loop(Seq(And(Check_ticket, Xor(Examine_thoroughly, \
             Examine_casually)), Decide), Reinitiate_request), Xor(Reject_request, Pay_compensation))",
        )
        .unwrap();
        assert!(
            tree.structurally_equal(&expected),
            "got: {tree}"
        );
        // exact child order, not just up-to-commutativity
        assert_eq!(tree.to_string(), expected.to_string());
    }

    #[test]
    fn running_example_replays_fully_at_noise_zero() {
        let log = running_example();
        let tree = discover(&log, 0.0);
        for trace in log.activity_sequences() {
            let refs: Vec<&str> = trace.iter().map(|s| s.as_str()).collect();
            assert!(crate::tree::replays(&tree, &refs), "trace {refs:?} must replay");
        }
    }

    #[test]
    fn discovery_is_deterministic() {
        let log = running_example();
        let a = discover(&log, 0.0);
        let b = discover(&log, 0.0);
        assert_eq!(a, b);
    }

    #[test]
    fn flower_on_unstructured_log() {
        // pairwise one-directional cycle soup without loop structure
        let log = log_of(&[
            (&["a", "b", "c"], 1),
            (&["b", "c", "a"], 1),
            (&["c", "a", "b"], 1),
        ]);
        let tree = discover(&log, 0.0);
        // total function: some tree comes out and it replays the input
        for trace in log.activity_sequences() {
            let refs: Vec<&str> = trace.iter().map(|s| s.as_str()).collect();
            assert!(crate::tree::replays(&tree, &refs), "trace {refs:?} must replay, got {tree}");
        }
    }

    #[test]
    fn tau_ids_are_unique_and_preorder() {
        let log = log_of(&[
            (&["a", "b", "c"], 3),
            (&["a", "c"], 2),
            (&["a", "b", "b", "c"], 1),
        ]);
        let tree = discover(&log, 0.0);
        tree.validate().unwrap();
    }
}
