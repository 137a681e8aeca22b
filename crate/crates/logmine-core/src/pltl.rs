//! Temporal formulas over activity atoms, restricted to `always`/`sometime`
//! plus Booleans, and the parser for user-written requirement formulas.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// PLTL fragment used throughout: atoms, Booleans, `□` (always) and `◇`
/// (sometime). No next/until.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemporalFormula {
    Atom(String),
    Not(Box<TemporalFormula>),
    And(Box<TemporalFormula>, Box<TemporalFormula>),
    Or(Box<TemporalFormula>, Box<TemporalFormula>),
    Implies(Box<TemporalFormula>, Box<TemporalFormula>),
    Always(Box<TemporalFormula>),
    Sometime(Box<TemporalFormula>),
}

impl TemporalFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        TemporalFormula::Atom(name.into())
    }
    pub fn not(f: TemporalFormula) -> Self {
        TemporalFormula::Not(Box::new(f))
    }
    pub fn and(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::Implies(Box::new(a), Box::new(b))
    }
    pub fn always(f: TemporalFormula) -> Self {
        TemporalFormula::Always(Box::new(f))
    }
    pub fn sometime(f: TemporalFormula) -> Self {
        TemporalFormula::Sometime(Box::new(f))
    }

    /// Left-folded conjunction; panics on an empty list.
    pub fn conjunction(mut parts: Vec<TemporalFormula>) -> TemporalFormula {
        assert!(!parts.is_empty(), "conjunction of nothing");
        let first = parts.remove(0);
        parts.into_iter().fold(first, TemporalFormula::and)
    }

    /// Left-folded disjunction; panics on an empty list.
    pub fn disjunction(mut parts: Vec<TemporalFormula>) -> TemporalFormula {
        assert!(!parts.is_empty(), "disjunction of nothing");
        let first = parts.remove(0);
        parts.into_iter().fold(first, TemporalFormula::or)
    }

    /// Atom names in first-occurrence order.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn walk(f: &TemporalFormula, out: &mut Vec<String>) {
            match f {
                TemporalFormula::Atom(a) => {
                    if !out.iter().any(|x| x == a) {
                        out.push(a.clone());
                    }
                }
                TemporalFormula::Not(x)
                | TemporalFormula::Always(x)
                | TemporalFormula::Sometime(x) => walk(x, out),
                TemporalFormula::And(a, b)
                | TemporalFormula::Or(a, b)
                | TemporalFormula::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

// Printer uses the requirement grammar so dumps can be re-parsed:
// G(...) for always, F(...) for sometime, !, &, |, ->.
// Precedence: ! > & > | > ->.
impl fmt::Display for TemporalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 0, f)
    }
}

fn write_prec(formula: &TemporalFormula, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = match formula {
        TemporalFormula::Implies(..) => 1,
        TemporalFormula::Or(..) => 2,
        TemporalFormula::And(..) => 3,
        _ => 4,
    };
    let parens = prec < min;
    if parens {
        write!(f, "(")?;
    }
    match formula {
        TemporalFormula::Atom(a) => write!(f, "{a}")?,
        TemporalFormula::Not(x) => {
            write!(f, "!")?;
            write_prec(x, 4, f)?;
        }
        TemporalFormula::Always(x) => {
            write!(f, "G(")?;
            write_prec(x, 0, f)?;
            write!(f, ")")?;
        }
        TemporalFormula::Sometime(x) => {
            write!(f, "F(")?;
            write_prec(x, 0, f)?;
            write!(f, ")")?;
        }
        TemporalFormula::And(a, b) => {
            write_prec(a, 3, f)?;
            write!(f, " & ")?;
            write_prec(b, 4, f)?;
        }
        TemporalFormula::Or(a, b) => {
            write_prec(a, 2, f)?;
            write!(f, " | ")?;
            write_prec(b, 3, f)?;
        }
        TemporalFormula::Implies(a, b) => {
            write_prec(a, 2, f)?;
            write!(f, " -> ")?;
            write_prec(b, 1, f)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

/// Requirement-formula parse/resolution errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RequirementError {
    Syntax { offset: usize, message: String },
    UnknownAtom { name: String, nearest: Vec<String> },
    /// `null` used against a specification without any silent activities.
    NoNullActivities,
}

impl fmt::Display for RequirementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequirementError::Syntax { offset, message } => {
                write!(f, "syntax error at offset {offset}: {message}")
            }
            RequirementError::UnknownAtom { name, nearest } => {
                write!(f, "unknown atom {name:?}")?;
                if !nearest.is_empty() {
                    write!(f, " (closest known: {})", nearest.join(", "))?;
                }
                Ok(())
            }
            RequirementError::NoNullActivities => {
                write!(f, "`null` used, but the specification has no silent activities")
            }
        }
    }
}

impl core::error::Error for RequirementError {}

/// Alphabet context for requirement parsing: the known atoms and which of
/// them are silent (`null` expands to the disjunction of the latter).
pub struct RequirementContext<'a> {
    pub alphabet: &'a [String],
    pub tau_atoms: &'a [String],
    pub allow_free_atoms: bool,
}

/// Parse a requirement formula.
///
/// Grammar: `G(..)`/`[]` for always, `F(..)`/`<>` for sometime, `&`, `|`,
/// `!`, `->`, parentheses and atom identifiers; `->` associates to the
/// right. The keyword `null` stands for any silent activity.
pub fn parse_requirement(
    text: &str,
    ctx: &RequirementContext<'_>,
) -> Result<TemporalFormula, RequirementError> {
    let mut parser = ReqParser { text, pos: 0, ctx };
    let formula = parser.parse_implication()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(RequirementError::Syntax {
            offset: parser.pos,
            message: "trailing input".to_string(),
        });
    }
    Ok(formula)
}

struct ReqParser<'a> {
    text: &'a str,
    pos: usize,
    ctx: &'a RequirementContext<'a>,
}

impl<'a> ReqParser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn parse_implication(&mut self) -> Result<TemporalFormula, RequirementError> {
        let lhs = self.parse_disjunction()?;
        if self.eat("->") {
            let rhs = self.parse_implication()?;
            return Ok(TemporalFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_disjunction(&mut self) -> Result<TemporalFormula, RequirementError> {
        let mut acc = self.parse_conjunction()?;
        loop {
            self.skip_ws();
            // `|` but not `->`-lookahead issues; `|` is unambiguous here
            if self.rest().starts_with('|') {
                self.pos += 1;
                let rhs = self.parse_conjunction()?;
                acc = TemporalFormula::or(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_conjunction(&mut self) -> Result<TemporalFormula, RequirementError> {
        let mut acc = self.parse_unary()?;
        loop {
            self.skip_ws();
            if self.rest().starts_with('&') {
                self.pos += 1;
                let rhs = self.parse_unary()?;
                acc = TemporalFormula::and(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_unary(&mut self) -> Result<TemporalFormula, RequirementError> {
        self.skip_ws();
        if self.eat("!") {
            return Ok(TemporalFormula::not(self.parse_unary()?));
        }
        if self.eat("[]") {
            return Ok(TemporalFormula::always(self.parse_unary()?));
        }
        if self.eat("<>") {
            return Ok(TemporalFormula::sometime(self.parse_unary()?));
        }
        if self.eat("(") {
            let inner = self.parse_implication()?;
            if !self.eat(")") {
                return Err(RequirementError::Syntax {
                    offset: self.pos,
                    message: "expected ')'".to_string(),
                });
            }
            return Ok(inner);
        }
        let start = self.pos;
        let word = self.parse_word()?;
        match word.as_str() {
            "G" | "F" => {
                if !self.eat("(") {
                    return Err(RequirementError::Syntax {
                        offset: self.pos,
                        message: format!("expected '(' after {word}"),
                    });
                }
                let inner = self.parse_implication()?;
                if !self.eat(")") {
                    return Err(RequirementError::Syntax {
                        offset: self.pos,
                        message: "expected ')'".to_string(),
                    });
                }
                Ok(if word == "G" {
                    TemporalFormula::always(inner)
                } else {
                    TemporalFormula::sometime(inner)
                })
            }
            "null" => {
                if self.ctx.tau_atoms.is_empty() {
                    return Err(RequirementError::NoNullActivities);
                }
                Ok(TemporalFormula::disjunction(
                    self.ctx.tau_atoms.iter().map(TemporalFormula::atom).collect(),
                ))
            }
            _ => {
                if self.ctx.alphabet.iter().any(|a| a == &word) || self.ctx.allow_free_atoms {
                    Ok(TemporalFormula::atom(word))
                } else {
                    let _ = start;
                    Err(RequirementError::UnknownAtom {
                        nearest: nearest_matches(&word, self.ctx.alphabet),
                        name: word,
                    })
                }
            }
        }
    }

    fn parse_word(&mut self) -> Result<String, RequirementError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.rest().chars().next() {
            if c.is_alphanumeric() || c == '_' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(RequirementError::Syntax {
                offset: start,
                message: "expected an atom or operator".to_string(),
            });
        }
        Ok(self.text[start..self.pos].to_owned())
    }
}

/// Up to three alphabet entries closest to `word` by edit distance.
fn nearest_matches(word: &str, alphabet: &[String]) -> Vec<String> {
    let mut scored: Vec<(usize, &String)> =
        alphabet.iter().map(|a| (edit_distance(word, a), a)).collect();
    scored.sort_by_key(|(d, a)| (*d, (*a).clone()));
    scored.into_iter().take(3).map(|(_, a)| a.clone()).collect()
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ctx<'a>(alphabet: &'a [String], taus: &'a [String]) -> RequirementContext<'a> {
        RequirementContext { alphabet, tau_atoms: taus, allow_free_atoms: false }
    }

    #[test]
    fn parses_liveness_requirement() {
        let alphabet: Vec<String> = ["Register_request", "Reject_request", "Pay_compensation"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let f = parse_requirement(
            "G(Register_request -> F(Reject_request | Pay_compensation))",
            &ctx(&alphabet, &[]),
        )
        .unwrap();
        let expected = TemporalFormula::always(TemporalFormula::implies(
            TemporalFormula::atom("Register_request"),
            TemporalFormula::sometime(TemporalFormula::or(
                TemporalFormula::atom("Reject_request"),
                TemporalFormula::atom("Pay_compensation"),
            )),
        ));
        assert_eq!(f, expected);
    }

    #[test]
    fn null_expands_to_tau_disjunction() {
        let alphabet: Vec<String> =
            ["Inform_user", "tau1", "tau2"].iter().map(|s| s.to_string()).collect();
        let taus: Vec<String> = ["tau1", "tau2"].iter().map(|s| s.to_string()).collect();
        let f = parse_requirement("G(!(Inform_user & null))", &ctx(&alphabet, &taus)).unwrap();
        let expected = TemporalFormula::always(TemporalFormula::not(TemporalFormula::and(
            TemporalFormula::atom("Inform_user"),
            TemporalFormula::or(TemporalFormula::atom("tau1"), TemporalFormula::atom("tau2")),
        )));
        assert_eq!(f, expected);
    }

    #[test]
    fn syntax_error_carries_offset() {
        let alphabet: Vec<String> = vec!["a".to_string()];
        let err = parse_requirement("G(", &ctx(&alphabet, &[])).unwrap_err();
        assert_eq!(err, RequirementError::Syntax { offset: 2, message: "expected an atom or operator".into() });
    }

    #[test]
    fn unknown_atom_suggests_nearest() {
        let alphabet: Vec<String> =
            ["Register_request", "Reject_request"].iter().map(|s| s.to_string()).collect();
        match parse_requirement("F(Registr_request)", &ctx(&alphabet, &[])).unwrap_err() {
            RequirementError::UnknownAtom { name, nearest } => {
                assert_eq!(name, "Registr_request");
                assert_eq!(nearest[0], "Register_request");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn free_atoms_admitted_when_enabled() {
        let alphabet: Vec<String> = vec!["a".to_string()];
        let ctx = RequirementContext { alphabet: &alphabet, tau_atoms: &[], allow_free_atoms: true };
        assert!(parse_requirement("F(brand_new)", &ctx).is_ok());
    }

    #[test]
    fn implication_is_right_associative() {
        let alphabet: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let f = parse_requirement("a -> b -> c", &ctx(&alphabet, &[])).unwrap();
        assert_eq!(
            f,
            TemporalFormula::implies(
                TemporalFormula::atom("a"),
                TemporalFormula::implies(TemporalFormula::atom("b"), TemporalFormula::atom("c"))
            )
        );
    }

    #[test]
    fn ascii_modality_aliases() {
        let alphabet: Vec<String> = vec!["a".to_string()];
        let f = parse_requirement("[] <> a", &ctx(&alphabet, &[])).unwrap();
        assert_eq!(f, TemporalFormula::always(TemporalFormula::sometime(TemporalFormula::atom("a"))));
    }

    #[test]
    fn printer_output_reparses() {
        let alphabet: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let texts = [
            "G(a -> F(b | c))",
            "G(!(a & b))",
            "F(a) & G(b) -> (c | !d)",
            "!(a | b & c) -> F(G(d))",
        ];
        for text in texts {
            let f = parse_requirement(text, &ctx(&alphabet, &[])).unwrap();
            let printed = f.to_string();
            let reparsed = parse_requirement(&printed, &ctx(&alphabet, &[])).unwrap();
            assert_eq!(f, reparsed, "printed form: {printed}");
        }
    }
}
