//! Block-structured process trees: operators over activity and tau leaves.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    Seq,
    Xor,
    And,
    Loop,
}

impl Operator {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Seq => "Seq",
            Operator::Xor => "Xor",
            Operator::And => "And",
            Operator::Loop => "Loop",
        }
    }
}

/// Hierarchical process model. `Loop` nodes have exactly two children
/// (body, redo); other operators have at least two.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcessTree {
    Activity(String),
    /// Silent step; ids are unique within a tree, numbered pre-order.
    Tau(u32),
    Node(Operator, Vec<ProcessTree>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    /// Operator node with fewer children than its arity allows.
    UnsupportedShape(String),
    Parse { offset: usize, message: String },
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::UnsupportedShape(m) => write!(f, "unsupported tree shape: {m}"),
            TreeError::Parse { offset, message } => {
                write!(f, "tree syntax error at offset {offset}: {message}")
            }
        }
    }
}

impl core::error::Error for TreeError {}

impl ProcessTree {
    pub fn seq(children: Vec<ProcessTree>) -> Self {
        ProcessTree::Node(Operator::Seq, children)
    }
    pub fn xor(children: Vec<ProcessTree>) -> Self {
        ProcessTree::Node(Operator::Xor, children)
    }
    pub fn and(children: Vec<ProcessTree>) -> Self {
        ProcessTree::Node(Operator::And, children)
    }
    pub fn looped(body: ProcessTree, redo: ProcessTree) -> Self {
        ProcessTree::Node(Operator::Loop, vec![body, redo])
    }
    pub fn activity(name: impl Into<String>) -> Self {
        ProcessTree::Activity(name.into())
    }

    /// Structural validity: operator arities and unique tau ids.
    pub fn validate(&self) -> Result<(), TreeError> {
        let mut taus = BTreeSet::new();
        self.validate_inner(&mut taus)
    }

    fn validate_inner(&self, taus: &mut BTreeSet<u32>) -> Result<(), TreeError> {
        match self {
            ProcessTree::Activity(_) => Ok(()),
            ProcessTree::Tau(id) => {
                if !taus.insert(*id) {
                    return Err(TreeError::UnsupportedShape(format!("duplicate tau id {id}")));
                }
                Ok(())
            }
            ProcessTree::Node(op, children) => {
                match op {
                    Operator::Loop if children.len() != 2 => {
                        return Err(TreeError::UnsupportedShape(format!(
                            "Loop must have exactly 2 children, got {}",
                            children.len()
                        )));
                    }
                    Operator::Loop => {}
                    _ if children.len() < 2 => {
                        return Err(TreeError::UnsupportedShape(format!(
                            "{} must have at least 2 children, got {}",
                            op.name(),
                            children.len()
                        )));
                    }
                    _ => {}
                }
                for c in children {
                    c.validate_inner(taus)?;
                }
                Ok(())
            }
        }
    }

    /// Renumber tau leaves 1.. in pre-order (left-to-right).
    pub fn renumber_taus(&mut self) {
        fn walk(node: &mut ProcessTree, next: &mut u32) {
            match node {
                ProcessTree::Tau(id) => {
                    *id = *next;
                    *next += 1;
                }
                ProcessTree::Node(_, children) => {
                    for c in children {
                        walk(c, next);
                    }
                }
                ProcessTree::Activity(_) => {}
            }
        }
        let mut next = 1;
        walk(self, &mut next);
    }

    /// Equality up to tau numbering and up to the order of children under
    /// commutative operators (Xor, And).
    pub fn structurally_equal(&self, other: &ProcessTree) -> bool {
        canonical(self) == canonical(other)
    }

    pub fn leaves(&self) -> Vec<&ProcessTree> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a ProcessTree, out: &mut Vec<&'a ProcessTree>) {
            match node {
                ProcessTree::Node(_, children) => children.iter().for_each(|c| walk(c, out)),
                leaf => out.push(leaf),
            }
        }
        walk(self, &mut out);
        out
    }
}

/// Canonical form for structural comparison: taus erased to a common marker,
/// Xor/And children sorted.
fn canonical(node: &ProcessTree) -> ProcessTree {
    match node {
        ProcessTree::Activity(a) => ProcessTree::Activity(a.clone()),
        ProcessTree::Tau(_) => ProcessTree::Tau(0),
        ProcessTree::Node(op, children) => {
            let mut canon: Vec<ProcessTree> = children.iter().map(canonical).collect();
            if matches!(op, Operator::Xor | Operator::And) {
                canon.sort();
            }
            ProcessTree::Node(*op, canon)
        }
    }
}

/// Structural metrics of a tree.
///
/// `height` uses the node-count convention: a bare leaf has height 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeMetrics {
    /// Leaf count, silent leaves included.
    pub activities_all: usize,
    /// Distinct named activities among the leaves.
    pub activities_no_tau: usize,
    pub height: usize,
    pub leaf_count: usize,
}

pub fn tree_metrics(tree: &ProcessTree) -> TreeMetrics {
    fn height(node: &ProcessTree) -> usize {
        match node {
            ProcessTree::Node(_, children) => {
                1 + children.iter().map(height).max().unwrap_or(0)
            }
            _ => 1,
        }
    }
    let leaves = tree.leaves();
    let mut named = BTreeSet::new();
    for leaf in &leaves {
        if let ProcessTree::Activity(a) = leaf {
            named.insert(a.clone());
        }
    }
    TreeMetrics {
        activities_all: leaves.len(),
        activities_no_tau: named.len(),
        height: height(tree),
        leaf_count: leaves.len(),
    }
}

// ---------------------------------------------------------------------------
// Textual form: `Seq(Register_request, Loop(Seq(...), Reinitiate_request), ...)`
// with tau leaves rendered `tau<N>`. Grammar (whitespace-insensitive):
//
//   tree  := op '(' tree (',' tree)* ')' | leaf
//   op    := 'Seq' | 'Xor' | 'And' | 'Loop'
//   leaf  := 'tau' digits? | name
//   name  := [A-Za-z_][A-Za-z0-9_]*
// ---------------------------------------------------------------------------

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessTree::Activity(a) => write!(f, "{a}"),
            ProcessTree::Tau(id) => write!(f, "tau{id}"),
            ProcessTree::Node(op, children) => {
                write!(f, "{}(", op.name())?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub fn parse_tree(text: &str) -> Result<ProcessTree, TreeError> {
    let mut parser = Parser { text, pos: 0, next_tau: 1 };
    let tree = parser.parse_node()?;
    parser.skip_ws();
    if parser.pos != parser.text.len() {
        return Err(TreeError::Parse {
            offset: parser.pos,
            message: "trailing input".to_string(),
        });
    }
    tree.validate()?;
    Ok(tree)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    next_tau: u32,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn parse_node(&mut self) -> Result<ProcessTree, TreeError> {
        self.skip_ws();
        let start = self.pos;
        let word = self.parse_word()?;
        self.skip_ws();
        let op = match word.as_str() {
            "Seq" => Some(Operator::Seq),
            "Xor" => Some(Operator::Xor),
            "And" => Some(Operator::And),
            "Loop" => Some(Operator::Loop),
            _ => None,
        };
        if let (Some(op), Some('(')) = (op, self.peek()) {
            self.pos += 1;
            let mut children = Vec::new();
            loop {
                children.push(self.parse_node()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => {
                        return Err(TreeError::Parse {
                            offset: self.pos,
                            message: "expected ',' or ')'".to_string(),
                        })
                    }
                }
            }
            return Ok(ProcessTree::Node(op, children));
        }
        // leaf
        if word.is_empty() {
            return Err(TreeError::Parse {
                offset: start,
                message: "expected a node".to_string(),
            });
        }
        if let Some(rest) = word.strip_prefix("tau") {
            if rest.is_empty() {
                let id = self.next_tau;
                self.next_tau += 1;
                return Ok(ProcessTree::Tau(id));
            }
            if let Ok(id) = rest.parse::<u32>() {
                return Ok(ProcessTree::Tau(id));
            }
        }
        Ok(ProcessTree::Activity(word))
    }

    fn parse_word(&mut self) -> Result<String, TreeError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(TreeError::Parse {
                offset: start,
                message: "expected an identifier".to_string(),
            });
        }
        Ok(self.text[start..self.pos].to_string())
    }
}

// ---------------------------------------------------------------------------
// Brute-force language replay. Used for replay-fitness checks on small logs.
// ---------------------------------------------------------------------------

/// True when `trace` is a word of the tree's language.
///
/// The tree is compiled to an epsilon-free NFA (And nodes become product
/// automata over their children), then simulated over the trace.
pub fn replays(tree: &ProcessTree, trace: &[&str]) -> bool {
    let nfa = Nfa::compile(tree);
    nfa.accepts(trace)
}

struct Nfa {
    /// transitions[state] = (label, target)*
    transitions: Vec<Vec<(String, usize)>>,
    start: usize,
    accepting: BTreeSet<usize>,
}

impl Nfa {
    fn accepts(&self, word: &[&str]) -> bool {
        let mut current: BTreeSet<usize> = BTreeSet::new();
        current.insert(self.start);
        for symbol in word {
            let mut next = BTreeSet::new();
            for &state in &current {
                for (label, target) in &self.transitions[state] {
                    if label == symbol {
                        next.insert(*target);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        current.iter().any(|s| self.accepting.contains(s))
    }

    fn compile(tree: &ProcessTree) -> Nfa {
        let frag = Frag::build(tree);
        // fragment states are already a complete machine
        Nfa {
            transitions: frag.transitions,
            start: frag.start,
            accepting: frag.accepting,
        }
    }
}

/// NFA fragment with a single start state and a set of accepting states.
#[derive(Clone)]
struct Frag {
    transitions: Vec<Vec<(String, usize)>>,
    start: usize,
    accepting: BTreeSet<usize>,
}

impl Frag {
    fn build(tree: &ProcessTree) -> Frag {
        match tree {
            ProcessTree::Activity(a) => {
                let mut transitions = vec![Vec::new(), Vec::new()];
                transitions[0].push((a.clone(), 1));
                Frag {
                    transitions,
                    start: 0,
                    accepting: BTreeSet::from([1]),
                }
            }
            ProcessTree::Tau(_) => Frag {
                transitions: vec![Vec::new()],
                start: 0,
                accepting: BTreeSet::from([0]),
            },
            ProcessTree::Node(Operator::Seq, children) => {
                let mut acc = Frag::build(&children[0]);
                for child in &children[1..] {
                    acc = acc.concat(&Frag::build(child));
                }
                acc
            }
            ProcessTree::Node(Operator::Xor, children) => {
                let mut acc = Frag::build(&children[0]);
                for child in &children[1..] {
                    acc = acc.union(&Frag::build(child));
                }
                acc
            }
            ProcessTree::Node(Operator::And, children) => {
                let mut acc = Frag::build(&children[0]);
                for child in &children[1..] {
                    acc = acc.shuffle(&Frag::build(child));
                }
                acc
            }
            ProcessTree::Node(Operator::Loop, children) => {
                let body = Frag::build(&children[0]);
                let redo = Frag::build(&children[1]);
                body.looped(&redo)
            }
        }
    }

    fn offset(&self, by: usize) -> Frag {
        Frag {
            transitions: self
                .transitions
                .iter()
                .map(|edges| edges.iter().map(|(l, t)| (l.clone(), t + by)).collect())
                .collect(),
            start: self.start + by,
            accepting: self.accepting.iter().map(|s| s + by).collect(),
        }
    }

    /// self then other: every accepting state of self gains other's start
    /// edges; acceptance moves to other (plus self's accepting states when
    /// other accepts the empty word).
    fn concat(&self, other: &Frag) -> Frag {
        let other = other.offset(self.transitions.len());
        let mut transitions = self.transitions.clone();
        transitions.extend(other.transitions.clone());
        let start_edges = other.transitions[other.start - self.transitions.len()].clone();
        for &acc in &self.accepting {
            transitions[acc].extend(start_edges.iter().cloned());
        }
        let mut accepting = other.accepting.clone();
        if accepting.contains(&other.start) {
            accepting.extend(self.accepting.iter().copied());
        }
        Frag {
            transitions,
            start: self.start,
            accepting,
        }
    }

    fn union(&self, other: &Frag) -> Frag {
        let other_off = other.offset(self.transitions.len());
        let mut transitions = self.transitions.clone();
        transitions.extend(other_off.transitions.clone());
        // fresh start state with both start edge sets
        let fresh = transitions.len();
        let mut edges = self.transitions[self.start].clone();
        edges.extend(other_off.transitions[other_off.start - self.transitions.len()].iter().cloned());
        transitions.push(edges);
        let mut accepting: BTreeSet<usize> = self.accepting.clone();
        accepting.extend(other_off.accepting.iter().copied());
        if self.accepting.contains(&self.start) || other.accepting.contains(&other.start) {
            accepting.insert(fresh);
        }
        Frag {
            transitions,
            start: fresh,
            accepting,
        }
    }

    /// Interleaving product.
    fn shuffle(&self, other: &Frag) -> Frag {
        let n = other.transitions.len();
        let index = |a: usize, b: usize| a * n + b;
        let mut transitions = vec![Vec::new(); self.transitions.len() * n];
        for a in 0..self.transitions.len() {
            for b in 0..n {
                let mut edges = Vec::new();
                for (l, t) in &self.transitions[a] {
                    edges.push((l.clone(), index(*t, b)));
                }
                for (l, t) in &other.transitions[b] {
                    edges.push((l.clone(), index(a, *t)));
                }
                transitions[index(a, b)] = edges;
            }
        }
        let mut accepting = BTreeSet::new();
        for &a in &self.accepting {
            for &b in &other.accepting {
                accepting.insert(index(a, b));
            }
        }
        Frag {
            transitions,
            start: index(self.start, other.start),
            accepting,
        }
    }

    /// body (redo body)*
    fn looped(&self, redo: &Frag) -> Frag {
        // chain: body -> redo -> body. Implemented by adding, from each body
        // accepting state, the redo start edges, and from each redo accepting
        // state, the body start edges (re-entering the same body fragment).
        let redo_off = redo.offset(self.transitions.len());
        let mut transitions = self.transitions.clone();
        transitions.extend(redo_off.transitions.clone());
        let redo_start_edges = redo_off.transitions[redo_off.start - self.transitions.len()].clone();
        let body_start_edges = self.transitions[self.start].clone();
        let body_accepts_empty = self.accepting.contains(&self.start);
        let redo_accepts_empty = redo.accepting.contains(&redo.start);
        for &acc in &self.accepting {
            transitions[acc].extend(redo_start_edges.iter().cloned());
            if redo_accepts_empty {
                // empty redo: body may restart immediately
                transitions[acc].extend(body_start_edges.iter().cloned());
            }
        }
        for &acc in &redo_off.accepting {
            transitions[acc].extend(body_start_edges.iter().cloned());
        }
        let mut accepting = self.accepting.clone();
        if body_accepts_empty {
            // empty body: redo accepting states may terminate a round
            accepting.extend(redo_off.accepting.iter().copied());
        }
        Frag {
            transitions,
            start: self.start,
            accepting,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3_tree() -> ProcessTree {
        parse_tree(
            "Seq(Register_request, Loop(Seq(And(Check_ticket, Xor(Examine_thoroughly, \
             Examine_casually)), Decide), Reinitiate_request), Xor(Reject_request, Pay_compensation))",
        )
        .unwrap()
    }

    #[test]
    fn print_parse_round_trip() {
        let tree = fig3_tree();
        let text = tree.to_string();
        let reparsed = parse_tree(&text).unwrap();
        assert_eq!(tree, reparsed);
    }

    #[test]
    fn bare_tau_gets_sequential_ids() {
        let tree = parse_tree("Xor(tau, Xor(tau, a))").unwrap();
        assert_eq!(tree, ProcessTree::xor(vec![
            ProcessTree::Tau(1),
            ProcessTree::xor(vec![ProcessTree::Tau(2), ProcessTree::activity("a")]),
        ]));
    }

    #[test]
    fn metrics_on_single_leaf() {
        let m = tree_metrics(&ProcessTree::activity("a"));
        assert_eq!(m, TreeMetrics { activities_all: 1, activities_no_tau: 1, height: 1, leaf_count: 1 });
    }

    #[test]
    fn metrics_on_fig3_tree() {
        let m = tree_metrics(&fig3_tree());
        assert_eq!(m.activities_all, 8);
        assert_eq!(m.activities_no_tau, 8);
        assert_eq!(m.height, 6);
    }

    #[test]
    fn structural_equality_ignores_xor_order_and_tau_ids() {
        let a = parse_tree("Xor(tau1, And(x, y))").unwrap();
        let b = parse_tree("Xor(And(y, x), tau7)").unwrap();
        assert!(a.structurally_equal(&b));
        let c = parse_tree("Xor(tau1, And(x, z))").unwrap();
        assert!(!a.structurally_equal(&c));
    }

    #[test]
    fn seq_order_is_significant() {
        let a = parse_tree("Seq(x, y)").unwrap();
        let b = parse_tree("Seq(y, x)").unwrap();
        assert!(!a.structurally_equal(&b));
    }

    #[test]
    fn loop_arity_enforced() {
        assert!(parse_tree("Loop(a, b, c)").is_err());
        assert!(parse_tree("Seq(a)").is_err());
    }

    #[test]
    fn replay_seq_and_xor() {
        let tree = parse_tree("Seq(a, Xor(b, c))").unwrap();
        assert!(replays(&tree, &["a", "b"]));
        assert!(replays(&tree, &["a", "c"]));
        assert!(!replays(&tree, &["a"]));
        assert!(!replays(&tree, &["a", "b", "c"]));
    }

    #[test]
    fn replay_and_interleaves() {
        let tree = parse_tree("And(a, Seq(b, c))").unwrap();
        assert!(replays(&tree, &["a", "b", "c"]));
        assert!(replays(&tree, &["b", "a", "c"]));
        assert!(replays(&tree, &["b", "c", "a"]));
        assert!(!replays(&tree, &["c", "b", "a"]));
    }

    #[test]
    fn replay_loop_rounds() {
        let tree = parse_tree("Loop(a, r)").unwrap();
        assert!(replays(&tree, &["a"]));
        assert!(replays(&tree, &["a", "r", "a"]));
        assert!(!replays(&tree, &["a", "r"]));
        assert!(!replays(&tree, &[]));
    }

    #[test]
    fn replay_loop_with_tau_redo() {
        let tree = parse_tree("Loop(a, tau)").unwrap();
        assert!(replays(&tree, &["a"]));
        assert!(replays(&tree, &["a", "a", "a"]));
        assert!(!replays(&tree, &[]));
    }

    #[test]
    fn replay_xor_tau_is_skippable() {
        let tree = parse_tree("Seq(a, Xor(tau, b))").unwrap();
        assert!(replays(&tree, &["a"]));
        assert!(replays(&tree, &["a", "b"]));
    }

    #[test]
    fn replay_fig3_examples() {
        let tree = fig3_tree();
        assert!(replays(&tree, &[
            "Register_request", "Examine_thoroughly", "Check_ticket", "Decide", "Reject_request"
        ]));
        assert!(replays(&tree, &[
            "Register_request", "Examine_casually", "Check_ticket", "Decide",
            "Reinitiate_request", "Examine_thoroughly", "Check_ticket", "Decide", "Pay_compensation"
        ]));
        // Decide may not be skipped
        assert!(!replays(&tree, &[
            "Register_request", "Examine_casually", "Check_ticket", "Reject_request"
        ]));
    }
}
