//! Pattern expressions: a fixed vocabulary of behavioural patterns
//! (`Seq2..Seq5`, `Xor2`, `Xor3`, `And2..And4`, `Loop`) into which process
//! trees are rewritten before logic generation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::tree::{Operator, ProcessTree};

/// The approved pattern vocabulary. Arities are fixed: sequences take their
/// index in activities, choice/parallel patterns list only their branch
/// arguments (entry/exit markers are synthesized during logic generation),
/// and `Loop` takes a body and a redo part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternKind {
    Seq2,
    Seq3,
    Seq4,
    Seq5,
    Xor2,
    Xor3,
    And2,
    And3,
    And4,
    Loop,
}

impl PatternKind {
    pub fn name(&self) -> &'static str {
        match self {
            PatternKind::Seq2 => "Seq2",
            PatternKind::Seq3 => "Seq3",
            PatternKind::Seq4 => "Seq4",
            PatternKind::Seq5 => "Seq5",
            PatternKind::Xor2 => "Xor2",
            PatternKind::Xor3 => "Xor3",
            PatternKind::And2 => "And2",
            PatternKind::And3 => "And3",
            PatternKind::And4 => "And4",
            PatternKind::Loop => "Loop",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            PatternKind::Seq2 | PatternKind::Xor2 | PatternKind::And2 | PatternKind::Loop => 2,
            PatternKind::Seq3 | PatternKind::Xor3 | PatternKind::And3 => 3,
            PatternKind::Seq4 | PatternKind::And4 => 4,
            PatternKind::Seq5 => 5,
        }
    }

    pub fn from_name(name: &str) -> Option<PatternKind> {
        Some(match name {
            "Seq2" => PatternKind::Seq2,
            "Seq3" => PatternKind::Seq3,
            "Seq4" => PatternKind::Seq4,
            "Seq5" => PatternKind::Seq5,
            "Xor2" => PatternKind::Xor2,
            "Xor3" => PatternKind::Xor3,
            "And2" => PatternKind::And2,
            "And3" => PatternKind::And3,
            "And4" => PatternKind::And4,
            "Loop" => PatternKind::Loop,
            _ => return None,
        })
    }

    /// Does an instance of this pattern own synthesized entry/exit markers?
    /// Sequences compose through their first/last argument instead.
    pub fn has_markers(&self) -> bool {
        matches!(
            self,
            PatternKind::Xor2
                | PatternKind::Xor3
                | PatternKind::And2
                | PatternKind::And3
                | PatternKind::And4
                | PatternKind::Loop
        )
    }
}

/// Literal nesting of approved patterns over activity atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternExpr {
    Atom { name: String, is_tau: bool },
    App { kind: PatternKind, args: Vec<PatternExpr> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternError {
    UnsupportedShape(String),
    Parse { offset: usize, message: String },
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternError::UnsupportedShape(m) => write!(f, "unsupported shape: {m}"),
            PatternError::Parse { offset, message } => {
                write!(f, "pattern syntax error at offset {offset}: {message}")
            }
        }
    }
}

impl core::error::Error for PatternError {}

impl PatternExpr {
    pub fn atom(name: impl Into<String>) -> Self {
        PatternExpr::Atom { name: name.into(), is_tau: false }
    }

    pub fn tau(name: impl Into<String>) -> Self {
        PatternExpr::Atom { name: name.into(), is_tau: true }
    }

    /// All atoms, pre-order, with duplicates removed.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        fn walk<'a>(expr: &'a PatternExpr, out: &mut Vec<&'a str>) {
            match expr {
                PatternExpr::Atom { name, .. } => {
                    if !out.contains(&name.as_str()) {
                        out.push(name);
                    }
                }
                PatternExpr::App { args, .. } => args.iter().for_each(|a| walk(a, out)),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Number of pattern instances (the "used patterns" metric).
    pub fn instance_count(&self) -> usize {
        match self {
            PatternExpr::Atom { .. } => 0,
            PatternExpr::App { args, .. } => {
                1 + args.iter().map(PatternExpr::instance_count).sum::<usize>()
            }
        }
    }

    /// Arity check over the whole expression.
    pub fn validate(&self) -> Result<(), PatternError> {
        match self {
            PatternExpr::Atom { .. } => Ok(()),
            PatternExpr::App { kind, args } => {
                if args.len() != kind.arity() {
                    return Err(PatternError::UnsupportedShape(format!(
                        "{} expects {} arguments, got {}",
                        kind.name(),
                        kind.arity(),
                        args.len()
                    )));
                }
                args.iter().try_for_each(PatternExpr::validate)
            }
        }
    }
}

/// Rewrite a process tree into a pattern expression.
///
/// Operators wider than the vocabulary fold to the right:
/// `Seq` beyond 5 children nests the tail in a fresh sequence pattern,
/// `Xor` beyond 3 nests the tail as an extra choice argument, `And` beyond 4
/// likewise.
pub fn extract(tree: &ProcessTree) -> Result<PatternExpr, PatternError> {
    match tree {
        ProcessTree::Activity(a) => Ok(PatternExpr::atom(a.clone())),
        ProcessTree::Tau(id) => Ok(PatternExpr::tau(format!("tau{id}"))),
        ProcessTree::Node(op, children) => {
            if matches!(op, Operator::Loop) {
                if children.len() != 2 {
                    return Err(PatternError::UnsupportedShape(
                        "Loop must have exactly two children".to_string(),
                    ));
                }
                return Ok(PatternExpr::App {
                    kind: PatternKind::Loop,
                    args: vec![extract(&children[0])?, extract(&children[1])?],
                });
            }
            if children.len() < 2 {
                return Err(PatternError::UnsupportedShape(format!(
                    "{} with fewer than two children",
                    op.name()
                )));
            }
            let (max, kinds): (usize, [PatternKind; 4]) = match op {
                Operator::Seq => (5, [PatternKind::Seq2, PatternKind::Seq3, PatternKind::Seq4, PatternKind::Seq5]),
                Operator::Xor => (3, [PatternKind::Xor2, PatternKind::Xor3, PatternKind::Xor2, PatternKind::Xor2]),
                Operator::And => (4, [PatternKind::And2, PatternKind::And3, PatternKind::And4, PatternKind::And2]),
                Operator::Loop => unreachable!(),
            };
            if children.len() <= max {
                let kind = kinds[children.len() - 2];
                let args = children.iter().map(extract).collect::<Result<Vec<_>, _>>()?;
                return Ok(PatternExpr::App { kind, args });
            }
            // fold: first max-1 children directly, tail re-wrapped
            let head = &children[..max - 1];
            let tail = ProcessTree::Node(*op, children[max - 1..].to_vec());
            let mut args = head.iter().map(extract).collect::<Result<Vec<_>, _>>()?;
            args.push(extract(&tail)?);
            Ok(PatternExpr::App { kind: kinds[max - 2], args })
        }
    }
}

// ---------------------------------------------------------------------------
// Entry/exit composition markers.
//
// Patterns with an entry slot `s` and exit slot `e` (choice, parallel, loop)
// own one synthesized null activity per slot, named after the instance's
// pre-order position: `s_<k>` / `e_<k>`. A loop has only `s`; its exit marker
// is the entry of its body. Sequences enter through their first argument and
// exit through their last.
// ---------------------------------------------------------------------------

/// Marker names for one pattern instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMarkers {
    /// Pre-order index of the instance within the expression, 1-based.
    pub index: usize,
    pub entry: Option<String>,
    pub exit: Option<String>,
}

/// Per-instance marker assignment for a whole expression, collision-free
/// against the expression's atoms.
#[derive(Debug, Clone)]
pub struct MarkerTable {
    markers: Vec<(usize, InstanceMarkers)>, // keyed by pre-order id of the App node
}

impl MarkerTable {
    pub fn build(expr: &PatternExpr) -> MarkerTable {
        let taken: Vec<String> = expr.atoms().iter().map(|a| a.to_string()).collect();
        let mut markers = Vec::new();
        let mut next_index = 0usize;
        fn fresh(base: String, taken: &[String], allocated: &mut Vec<String>) -> String {
            let mut candidate = base.clone();
            let mut suffix = 2;
            while taken.contains(&candidate) || allocated.contains(&candidate) {
                candidate = format!("{base}_{suffix}");
                suffix += 1;
            }
            allocated.push(candidate.clone());
            candidate
        }
        let mut allocated: Vec<String> = Vec::new();
        fn walk(
            expr: &PatternExpr,
            next_index: &mut usize,
            taken: &[String],
            allocated: &mut Vec<String>,
            markers: &mut Vec<(usize, InstanceMarkers)>,
        ) {
            if let PatternExpr::App { kind, args } = expr {
                *next_index += 1;
                let index = *next_index;
                let (entry, exit) = if kind.has_markers() {
                    let entry = fresh(format!("s_{index}"), taken, allocated);
                    let exit = if matches!(kind, PatternKind::Loop) {
                        None
                    } else {
                        Some(fresh(format!("e_{index}"), taken, allocated))
                    };
                    (Some(entry), exit)
                } else {
                    (None, None)
                };
                markers.push((index, InstanceMarkers { index, entry, exit }));
                for arg in args {
                    walk(arg, next_index, taken, allocated, markers);
                }
            }
        }
        walk(expr, &mut next_index, &taken, &mut allocated, &mut markers);
        MarkerTable { markers }
    }

    fn get(&self, index: usize) -> &InstanceMarkers {
        &self
            .markers
            .iter()
            .find(|(i, _)| *i == index)
            .expect("marker index allocated during build")
            .1
    }

    /// Markers of the instance at pre-order position `index` (1-based).
    pub fn markers_of(&self, index: usize) -> &InstanceMarkers {
        self.get(index)
    }
}

/// Entry activity of an expression under a marker table. `index` is the
/// pre-order position of `expr` within the full expression the table was
/// built for.
fn entry_at(expr: &PatternExpr, index: usize, table: &MarkerTable) -> String {
    match expr {
        PatternExpr::Atom { name, .. } => name.clone(),
        PatternExpr::App { kind, args } => match kind {
            PatternKind::Seq2 | PatternKind::Seq3 | PatternKind::Seq4 | PatternKind::Seq5 => {
                entry_at(&args[0], index + 1, table)
            }
            _ => table.get(index).entry.clone().expect("marker patterns own an entry"),
        },
    }
}

fn exit_at(expr: &PatternExpr, index: usize, table: &MarkerTable) -> String {
    match expr {
        PatternExpr::Atom { name, .. } => name.clone(),
        PatternExpr::App { kind, args } => match kind {
            PatternKind::Seq2 | PatternKind::Seq3 | PatternKind::Seq4 | PatternKind::Seq5 => {
                let mut offset = index + 1;
                for arg in &args[..args.len() - 1] {
                    offset += subtree_instances(arg);
                }
                exit_at(args.last().expect("sequences are non-empty"), offset, table)
            }
            // a loop is left through its body's entry
            PatternKind::Loop => entry_at(&args[0], index + 1, table),
            _ => table.get(index).exit.clone().expect("choice/parallel own an exit"),
        },
    }
}

fn subtree_instances(expr: &PatternExpr) -> usize {
    expr.instance_count()
}

/// Entry marker of a whole expression.
pub fn entry(expr: &PatternExpr) -> String {
    let table = MarkerTable::build(expr);
    entry_at(expr, 1, &table)
}

/// Exit marker of a whole expression.
pub fn exit(expr: &PatternExpr) -> String {
    let table = MarkerTable::build(expr);
    exit_at(expr, 1, &table)
}

pub(crate) use {entry_at as entry_with_table, exit_at as exit_with_table};

// ---------------------------------------------------------------------------
// Textual form, mirroring the tree syntax: `Seq3(a, Loop(b, c), d)`.
// ---------------------------------------------------------------------------

impl fmt::Display for PatternExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternExpr::Atom { name, .. } => write!(f, "{name}"),
            PatternExpr::App { kind, args } => {
                write!(f, "{}(", kind.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub fn parse_pattern(text: &str) -> Result<PatternExpr, PatternError> {
    let mut p = PatParser { text, pos: 0 };
    let expr = p.parse_expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(PatternError::Parse { offset: p.pos, message: "trailing input".into() });
    }
    expr.validate()?;
    Ok(expr)
}

struct PatParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> PatParser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn parse_expr(&mut self) -> Result<PatternExpr, PatternError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_alphanumeric() || c == '_' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(PatternError::Parse { offset: start, message: "expected identifier".into() });
        }
        let word = &self.text[start..self.pos];
        self.skip_ws();
        if let Some(kind) = PatternKind::from_name(word) {
            if self.text[self.pos..].starts_with('(') {
                self.pos += 1;
                let mut args = Vec::new();
                loop {
                    args.push(self.parse_expr()?);
                    self.skip_ws();
                    if self.text[self.pos..].starts_with(',') {
                        self.pos += 1;
                    } else if self.text[self.pos..].starts_with(')') {
                        self.pos += 1;
                        break;
                    } else {
                        return Err(PatternError::Parse {
                            offset: self.pos,
                            message: "expected ',' or ')'".into(),
                        });
                    }
                }
                return Ok(PatternExpr::App { kind, args });
            }
        }
        let is_tau = word.starts_with("tau")
            && (word.len() == 3 || word[3..].chars().all(|c| c.is_ascii_digit()));
        Ok(PatternExpr::Atom { name: word.to_string(), is_tau })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_tree;

    fn w1_text() -> &'static str {
        "Seq3(Register_request, Loop(Seq2(And2(Check_ticket, Xor2(Examine_thoroughly, \
         Examine_casually)), Decide), Reinitiate_request), Xor2(Reject_request, Pay_compensation))"
    }

    #[test]
    fn extract_reference_tree_to_w1() {
        let tree = parse_tree(
            "Seq(Register_request, Loop(Seq(And(Check_ticket, Xor(Examine_thoroughly, \
             Examine_casually)), Decide), Reinitiate_request), Xor(Reject_request, Pay_compensation))",
        )
        .unwrap();
        let w = extract(&tree).unwrap();
        assert_eq!(w, parse_pattern(w1_text()).unwrap());
    }

    #[test]
    fn extract_folds_wide_sequences() {
        let tree = parse_tree("Seq(a, b, c, d, e, f, g)").unwrap();
        let w = extract(&tree).unwrap();
        assert_eq!(w, parse_pattern("Seq5(a, b, c, d, Seq3(e, f, g))").unwrap());
    }

    #[test]
    fn extract_folds_wide_choices_and_parallels() {
        let xor = parse_tree("Xor(a, b, c, d)").unwrap();
        assert_eq!(extract(&xor).unwrap(), parse_pattern("Xor3(a, b, Xor2(c, d))").unwrap());
        let and = parse_tree("And(a, b, c, d, e, f)").unwrap();
        assert_eq!(
            extract(&and).unwrap(),
            parse_pattern("And4(a, b, c, And3(d, e, f))").unwrap()
        );
    }

    #[test]
    fn fold_preserves_child_order() {
        let tree = parse_tree("Seq(a, b, c, d, e, f, g)").unwrap();
        let w = extract(&tree).unwrap();
        // flattening the folded expression recovers the original order
        fn flatten(expr: &PatternExpr, out: &mut Vec<String>) {
            match expr {
                PatternExpr::Atom { name, .. } => out.push(name.clone()),
                PatternExpr::App { args, .. } => args.iter().for_each(|a| flatten(a, out)),
            }
        }
        let mut names = Vec::new();
        flatten(&w, &mut names);
        assert_eq!(names, ["a", "b", "c", "d", "e", "f", "g"]);
    }

    #[test]
    fn singleton_tree_is_a_bare_atom() {
        let w = extract(&ProcessTree::activity("a")).unwrap();
        assert_eq!(w, PatternExpr::atom("a"));
    }

    #[test]
    fn entry_and_exit_of_atoms() {
        let w = PatternExpr::atom("a");
        assert_eq!(entry(&w), "a");
        assert_eq!(exit(&w), "a");
    }

    #[test]
    fn entry_of_seq_is_first_argument_entry() {
        let w = parse_pattern(w1_text()).unwrap();
        assert_eq!(entry(&w), "Register_request");
        // exit: the trailing Xor2 owns an exit marker
        assert!(exit(&w).starts_with("e_"));
    }

    #[test]
    fn loop_entry_is_a_synthesized_null() {
        let w = parse_pattern("Loop(b, r)").unwrap();
        assert!(entry(&w).starts_with("s_"));
        assert_eq!(exit(&w), "b");
    }

    #[test]
    fn markers_avoid_colliding_with_activities() {
        let w = parse_pattern("Xor2(s_1, e_1)").unwrap();
        let table = MarkerTable::build(&w);
        let m = table.get(1);
        assert_eq!(m.entry.as_deref(), Some("s_1_2"));
        assert_eq!(m.exit.as_deref(), Some("e_1_2"));
    }

    #[test]
    fn print_parse_round_trip() {
        let w = parse_pattern(w1_text()).unwrap();
        assert_eq!(parse_pattern(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn arity_violations_rejected() {
        assert!(parse_pattern("Seq2(a)").is_err());
        assert!(parse_pattern("Xor2(a, b, c)").is_err());
    }

    #[test]
    fn extract_is_total_on_mined_trees() {
        // property-ish: random trees via the miner's own vocabulary
        let trees = [
            "Seq(a, b, c, d, e, f, g, h, i)",
            "Xor(a, b, c, d, e)",
            "And(a, Xor(b, c), Seq(d, e), f, g)",
            "Loop(Seq(a, b), Xor(c, tau))",
        ];
        for text in trees {
            let tree = parse_tree(text).unwrap();
            let w = extract(&tree).unwrap();
            w.validate().unwrap();
        }
    }
}
