//! Instantiation of the fixed logical pattern templates over a pattern
//! expression, producing the specification as a deduplicated formula list.
//!
//! Composition conventions:
//!
//! * every choice/parallel/loop instance owns fresh null activities for its
//!   entry (`s_<k>`) and, except loops, exit (`e_<k>`) slot; sequences chain
//!   through their arguments' entry/exit representatives;
//! * a sub-pattern argument is consumed through its entry marker where the
//!   template position starts behaviour and through its exit marker where it
//!   ends behaviour;
//! * only the outermost instance asserts its entry eventuality (`F(entry)`);
//!   for nested instances that eventuality is induced by the enclosing
//!   pattern's chaining formulas, and asserting it for optional branches
//!   would force them to run;
//! * silent atoms never coincide with any other atom; one coherence axiom
//!   states this whenever silent atoms occur.
//!
//! The degenerate single-atom expression yields just `F(atom)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::pattern::{entry_with_table, exit_with_table, MarkerTable, PatternExpr, PatternKind};
use crate::pltl::TemporalFormula;

/// Where a formula came from: pattern instance (pre-order position) and
/// template slot, e.g. `Xor2#5 template 3`. The silent-coherence axiom uses
/// instance 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub pattern: String,
    pub instance: usize,
    pub template_index: usize,
}

impl Origin {
    fn label(&self) -> String {
        format!("{}#{} template {}", self.pattern, self.instance, self.template_index)
    }
}

/// Generated logical specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalSpec {
    pub formulas: Vec<TemporalFormula>,
    /// Atoms in first-use order across `formulas`.
    pub alphabet: Vec<String>,
    /// Silent atoms originating from tree taus.
    pub tau_atoms: Vec<String>,
    /// All synthesized atoms: tree taus plus entry/exit markers.
    pub synthetic_atoms: Vec<String>,
    /// Per formula, every origin that produced it (duplicates merge).
    pub provenance: Vec<Vec<Origin>>,
}

/// Instantiate the pattern templates over `expr`.
pub fn generate(expr: &PatternExpr) -> LogicalSpec {
    // Tree taus whose names collide with real activities get a numeric
    // suffix before anything else looks at atom names.
    let expr = disambiguate_taus(expr);
    let table = MarkerTable::build(&expr);
    let mut sink = Sink::default();

    match &expr {
        PatternExpr::Atom { name, .. } => {
            sink.push(
                TemporalFormula::sometime(TemporalFormula::atom(name.clone())),
                Origin { pattern: "Atom".into(), instance: 0, template_index: 0 },
            );
        }
        PatternExpr::App { .. } => {
            emit_instance(&expr, 1, true, &table, &mut sink);
        }
    }

    let mut tau_atoms: Vec<String> = Vec::new();
    collect_taus(&expr, &mut tau_atoms);
    // Coherence of silent steps: a tau atom coincides with nothing else.
    if !tau_atoms.is_empty() {
        let alphabet_so_far = sink.alphabet.clone();
        let others: Vec<String> = alphabet_so_far
            .iter()
            .filter(|a| !tau_atoms.contains(a))
            .cloned()
            .collect();
        if !others.is_empty() {
            let lhs = TemporalFormula::disjunction(
                tau_atoms.iter().map(TemporalFormula::atom).collect(),
            );
            let rhs = TemporalFormula::not(TemporalFormula::disjunction(
                others.iter().map(TemporalFormula::atom).collect(),
            ));
            sink.push(
                TemporalFormula::always(TemporalFormula::implies(lhs, rhs)),
                Origin { pattern: "silent".into(), instance: 0, template_index: 0 },
            );
        }
    }

    let mut synthetic: Vec<String> = tau_atoms.clone();
    for atom in &sink.alphabet {
        if (atom.starts_with("s_") || atom.starts_with("e_")) && !synthetic.contains(atom) {
            synthetic.push(atom.clone());
        }
    }

    LogicalSpec {
        formulas: sink.formulas,
        alphabet: sink.alphabet,
        tau_atoms,
        synthetic_atoms: synthetic,
        provenance: sink.provenance,
    }
}

fn collect_taus(expr: &PatternExpr, out: &mut Vec<String>) {
    match expr {
        PatternExpr::Atom { name, is_tau } => {
            if *is_tau && !out.contains(name) {
                out.push(name.clone());
            }
        }
        PatternExpr::App { args, .. } => args.iter().for_each(|a| collect_taus(a, out)),
    }
}

fn disambiguate_taus(expr: &PatternExpr) -> PatternExpr {
    let mut real: Vec<String> = Vec::new();
    fn collect_real(expr: &PatternExpr, out: &mut Vec<String>) {
        match expr {
            PatternExpr::Atom { name, is_tau: false } => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            PatternExpr::Atom { .. } => {}
            PatternExpr::App { args, .. } => args.iter().for_each(|a| collect_real(a, out)),
        }
    }
    collect_real(expr, &mut real);
    fn rename(expr: &PatternExpr, real: &[String]) -> PatternExpr {
        match expr {
            PatternExpr::Atom { name, is_tau: true } if real.contains(name) => {
                let mut candidate = format!("{name}_2");
                let mut suffix = 3;
                while real.contains(&candidate) {
                    candidate = format!("{name}_{suffix}");
                    suffix += 1;
                }
                PatternExpr::Atom { name: candidate, is_tau: true }
            }
            PatternExpr::Atom { .. } => expr.clone(),
            PatternExpr::App { kind, args } => PatternExpr::App {
                kind: *kind,
                args: args.iter().map(|a| rename(a, real)).collect(),
            },
        }
    }
    rename(expr, &real)
}

#[derive(Default)]
struct Sink {
    formulas: Vec<TemporalFormula>,
    provenance: Vec<Vec<Origin>>,
    alphabet: Vec<String>,
    seen: BTreeMap<TemporalFormula, usize>,
}

impl Sink {
    fn push(&mut self, formula: TemporalFormula, origin: Origin) {
        if let Some(&at) = self.seen.get(&formula) {
            self.provenance[at].push(origin);
            return;
        }
        for atom in formula.atoms() {
            if !self.alphabet.contains(&atom) {
                self.alphabet.push(atom);
            }
        }
        self.seen.insert(formula.clone(), self.formulas.len());
        self.formulas.push(formula);
        self.provenance.push(vec![origin]);
    }
}

fn atom(name: &str) -> TemporalFormula {
    TemporalFormula::atom(name)
}
fn som(f: TemporalFormula) -> TemporalFormula {
    TemporalFormula::sometime(f)
}
fn alw(f: TemporalFormula) -> TemporalFormula {
    TemporalFormula::always(f)
}
fn no_overlap(a: TemporalFormula, b: TemporalFormula) -> TemporalFormula {
    alw(TemporalFormula::not(TemporalFormula::and(a, b)))
}

/// Emit the template formulas of the instance rooted at `expr` (an `App`)
/// and recurse into sub-pattern arguments. `index` is the instance's
/// pre-order position; nested instances skip their leading entry
/// eventuality.
fn emit_instance(
    expr: &PatternExpr,
    index: usize,
    is_root: bool,
    table: &MarkerTable,
    sink: &mut Sink,
) {
    let PatternExpr::App { kind, args } = expr else {
        return;
    };
    // pre-order indices of the argument positions
    let mut arg_index = Vec::with_capacity(args.len());
    let mut cursor = index + 1;
    for arg in args {
        arg_index.push(cursor);
        cursor += arg.instance_count();
    }
    let ent = |i: usize| entry_with_table(&args[i], arg_index[i], table);
    let ext = |i: usize| exit_with_table(&args[i], arg_index[i], table);
    let markers = table.markers_of(index);

    let mut slot = 0usize;
    let mut push = |sink: &mut Sink, formula: TemporalFormula| {
        let origin = Origin {
            pattern: kind.name().to_string(),
            instance: index,
            template_index: slot,
        };
        slot += 1;
        sink.push(formula, origin);
    };

    match kind {
        PatternKind::Seq2 | PatternKind::Seq3 | PatternKind::Seq4 | PatternKind::Seq5 => {
            if is_root {
                push(sink, som(atom(&ent(0))));
            } else {
                slot += 1;
            }
            for i in 0..args.len() - 1 {
                push(sink, alw(TemporalFormula::implies(atom(&ext(i)), som(atom(&ent(i + 1))))));
            }
            for i in 0..args.len() {
                for j in i + 1..args.len() {
                    push(sink, no_overlap(atom(&ent(i)), atom(&ent(j))));
                }
            }
        }
        PatternKind::Xor2 | PatternKind::Xor3 => {
            let s = markers.entry.as_deref().expect("xor owns an entry marker");
            let e = markers.exit.as_deref().expect("xor owns an exit marker");
            if is_root {
                push(sink, som(atom(s)));
            } else {
                slot += 1;
            }
            // exclusive-choice axiom: exactly one branch ever runs
            let n = args.len();
            let mut choice_arms = Vec::with_capacity(n);
            for chosen in 0..n {
                let mut parts = Vec::with_capacity(n);
                for i in 0..n {
                    let occurs = som(atom(&ent(i)));
                    parts.push(if i == chosen {
                        occurs
                    } else {
                        TemporalFormula::not(occurs)
                    });
                }
                choice_arms.push(TemporalFormula::conjunction(parts));
            }
            push(
                sink,
                alw(TemporalFormula::implies(atom(s), TemporalFormula::disjunction(choice_arms))),
            );
            // any branch completion leads to the exit
            let completions =
                TemporalFormula::disjunction((0..n).map(|i| atom(&ext(i))).collect());
            push(sink, alw(TemporalFormula::implies(completions, som(atom(e)))));
            // pairwise exclusions over s, branches, e
            for i in 0..n {
                push(sink, no_overlap(atom(s), atom(&ent(i))));
            }
            push(sink, no_overlap(atom(s), atom(e)));
            for i in 0..n {
                for j in i + 1..n {
                    push(sink, no_overlap(atom(&ent(i)), atom(&ent(j))));
                }
            }
            for i in 0..n {
                push(sink, no_overlap(atom(&ext(i)), atom(e)));
            }
        }
        PatternKind::And2 | PatternKind::And3 | PatternKind::And4 => {
            let s = markers.entry.as_deref().expect("and owns an entry marker");
            let e = markers.exit.as_deref().expect("and owns an exit marker");
            if is_root {
                push(sink, som(atom(s)));
            } else {
                slot += 1;
            }
            let n = args.len();
            let all_branches =
                TemporalFormula::conjunction((0..n).map(|i| som(atom(&ent(i)))).collect());
            push(sink, alw(TemporalFormula::implies(atom(s), all_branches)));
            for i in 0..n {
                push(sink, alw(TemporalFormula::implies(atom(&ext(i)), som(atom(e)))));
            }
            let entries = TemporalFormula::disjunction((0..n).map(|i| atom(&ent(i))).collect());
            push(sink, no_overlap(atom(s), entries));
            let exits = TemporalFormula::disjunction((0..n).map(|i| atom(&ext(i))).collect());
            push(sink, no_overlap(exits, atom(e)));
        }
        PatternKind::Loop => {
            let s = markers.entry.as_deref().expect("loop owns an entry marker");
            let body_entry = ent(0);
            let redo_entry = ent(1);
            let redo_exit = ext(1);
            if is_root {
                push(sink, som(atom(s)));
            } else {
                slot += 1;
            }
            push(sink, alw(TemporalFormula::implies(atom(s), som(atom(&body_entry)))));
            // after the body: either the redo part runs and the body recurs,
            // or the redo part never runs
            push(
                sink,
                alw(TemporalFormula::implies(
                    atom(&body_entry),
                    TemporalFormula::or(
                        TemporalFormula::and(som(atom(&redo_entry)), som(atom(&body_entry))),
                        TemporalFormula::not(som(atom(&redo_entry))),
                    ),
                )),
            );
            push(sink, alw(TemporalFormula::implies(atom(&redo_exit), som(atom(&body_entry)))));
            push(sink, no_overlap(atom(s), atom(&body_entry)));
            push(sink, no_overlap(atom(s), atom(&redo_entry)));
            push(sink, no_overlap(atom(&body_entry), atom(&redo_entry)));
        }
    }

    for (i, arg) in args.iter().enumerate() {
        if matches!(arg, PatternExpr::App { .. }) {
            emit_instance(arg, arg_index[i], false, table, sink);
        }
    }
}

// ---------------------------------------------------------------------------
// Dump format: header comments, then per formula one provenance comment and
// one formula line in the requirement grammar. Stable ordering.
// ---------------------------------------------------------------------------

impl LogicalSpec {
    pub fn formula_count(&self) -> usize {
        self.formulas.len()
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# formulas: {}", self.formulas.len());
        let _ = writeln!(out, "# alphabet: {}", self.alphabet.join(" "));
        let _ = writeln!(out, "# tau: {}", self.tau_atoms.join(" "));
        let _ = writeln!(out, "# synthetic: {}", self.synthetic_atoms.join(" "));
        for (formula, origins) in self.formulas.iter().zip(&self.provenance) {
            let labels: Vec<String> = origins.iter().map(Origin::label).collect();
            let _ = writeln!(out, "# {}", labels.join("; "));
            let _ = writeln!(out, "{formula}");
        }
        out
    }

    /// Parse a dump back. Inverse of [`LogicalSpec::dump`] up to provenance
    /// label granularity.
    pub fn parse_dump(text: &str) -> Result<LogicalSpec, crate::pltl::RequirementError> {
        let mut alphabet: Vec<String> = Vec::new();
        let mut tau_atoms: Vec<String> = Vec::new();
        let mut synthetic: Vec<String> = Vec::new();
        let mut formulas = Vec::new();
        let mut provenance: Vec<Vec<Origin>> = Vec::new();
        let mut pending: Vec<Origin> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(list) = rest.strip_prefix("alphabet:") {
                    alphabet = list.split_whitespace().map(|s| s.to_string()).collect();
                } else if let Some(list) = rest.strip_prefix("tau:") {
                    tau_atoms = list.split_whitespace().map(|s| s.to_string()).collect();
                } else if let Some(list) = rest.strip_prefix("synthetic:") {
                    synthetic = list.split_whitespace().map(|s| s.to_string()).collect();
                } else if rest.contains("template") {
                    pending = rest
                        .split(';')
                        .map(|part| Origin {
                            pattern: part.trim().to_string(),
                            instance: 0,
                            template_index: 0,
                        })
                        .collect();
                }
                continue;
            }
            let ctx = crate::pltl::RequirementContext {
                alphabet: &alphabet,
                tau_atoms: &tau_atoms,
                allow_free_atoms: true,
            };
            let formula = crate::pltl::parse_requirement(line, &ctx)?;
            formulas.push(formula);
            provenance.push(core::mem::take(&mut pending));
        }
        Ok(LogicalSpec { formulas, alphabet, tau_atoms, synthetic_atoms: synthetic, provenance })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse_pattern;

    fn texts(spec: &LogicalSpec) -> Vec<String> {
        spec.formulas.iter().map(|f| f.to_string()).collect()
    }

    #[test]
    fn seq2_over_atoms_instantiates_exactly() {
        let spec = generate(&parse_pattern("Seq2(a, b)").unwrap());
        assert_eq!(texts(&spec), vec!["F(a)", "G(a -> F(b))", "G(!(a & b))"]);
    }

    #[test]
    fn xor2_over_atoms_yields_nine_formulas() {
        let spec = generate(&parse_pattern("Xor2(a, b)").unwrap());
        let t = texts(&spec);
        assert_eq!(t.len(), 9);
        assert_eq!(t[0], "F(s_1)");
        assert_eq!(t[1], "G(s_1 -> F(a) & !F(b) | !F(a) & F(b))");
        assert_eq!(t[2], "G(a | b -> F(e_1))");
        assert!(t[3..].iter().all(|f| f.starts_with("G(!(")));
    }

    #[test]
    fn degenerate_atom_yields_single_eventuality() {
        let spec = generate(&PatternExpr::atom("a"));
        assert_eq!(texts(&spec), vec!["F(a)"]);
    }

    #[test]
    fn loop_template_shape() {
        let spec = generate(&parse_pattern("Loop(b, r)").unwrap());
        let t = texts(&spec);
        assert_eq!(t.len(), 7);
        assert_eq!(t[0], "F(s_1)");
        assert_eq!(t[1], "G(s_1 -> F(b))");
        assert_eq!(t[2], "G(b -> F(r) & F(b) | !F(r))");
        assert_eq!(t[3], "G(r -> F(b))");
    }

    #[test]
    fn alphabet_covers_exactly_the_used_atoms() {
        let spec = generate(&parse_pattern("Seq2(a, Xor2(b, c))").unwrap());
        let mut used: Vec<String> = Vec::new();
        for f in &spec.formulas {
            for a in f.atoms() {
                if !used.contains(&a) {
                    used.push(a);
                }
            }
        }
        assert_eq!(spec.alphabet, used);
    }

    #[test]
    fn generation_is_idempotent() {
        let w = parse_pattern("Seq3(a, Loop(b, c), Xor2(d, e))").unwrap();
        assert_eq!(generate(&w), generate(&w));
    }

    #[test]
    fn tau_coherence_axiom_emitted_once() {
        let spec = generate(&parse_pattern("Xor2(tau1, b)").unwrap());
        let t = texts(&spec);
        assert_eq!(t.len(), 10); // 9 template formulas + coherence
        assert!(t.last().unwrap().starts_with("G(tau1 ->"));
        assert_eq!(spec.tau_atoms, vec!["tau1".to_string()]);
    }

    #[test]
    fn tau_name_collision_gets_suffixed() {
        // an actual activity named tau1 alongside a silent tau1
        let w = PatternExpr::App {
            kind: PatternKind::Xor2,
            args: vec![PatternExpr::tau("tau1"), PatternExpr::atom("tau1")],
        };
        let spec = generate(&w);
        assert_eq!(spec.tau_atoms, vec!["tau1_2".to_string()]);
        assert!(spec.alphabet.iter().any(|a| a == "tau1"));
    }

    #[test]
    fn nested_instances_skip_entry_eventuality() {
        let spec = generate(&parse_pattern("Seq2(a, Xor2(b, c))").unwrap());
        let t = texts(&spec);
        // F(a) from the root sequence, but no F(s_2) for the nested choice
        assert!(t.contains(&"F(a)".to_string()));
        assert!(!t.iter().any(|f| f == "F(s_2)"));
    }

    #[test]
    fn w1_reference_counts() {
        let w = parse_pattern(
            "Seq3(Register_request, Loop(Seq2(And2(Check_ticket, Xor2(Examine_thoroughly, \
             Examine_casually)), Decide), Reinitiate_request), Xor2(Reject_request, Pay_compensation))",
        )
        .unwrap();
        let spec = generate(&w);
        assert_eq!(w.instance_count(), 6);
        assert_eq!(spec.formula_count(), 35);
        // chaining into and out of the loop
        let t = texts(&spec);
        assert!(t.contains(&"G(Register_request -> F(s_2))".to_string()));
        assert!(t.contains(&"G(s_2 -> F(s_4))".to_string()));
        assert!(t.contains(&"G(s_4 -> F(s_6))".to_string()));
    }

    #[test]
    fn dump_round_trips() {
        let w = parse_pattern("Seq3(a, Loop(b, tau1), Xor2(c, d))").unwrap();
        let spec = generate(&w);
        let dump = spec.dump();
        let parsed = LogicalSpec::parse_dump(&dump).unwrap();
        assert_eq!(parsed.formulas, spec.formulas);
        assert_eq!(parsed.alphabet, spec.alphabet);
        assert_eq!(parsed.tau_atoms, spec.tau_atoms);
        assert_eq!(parsed.synthetic_atoms, spec.synthetic_atoms);
    }
}
