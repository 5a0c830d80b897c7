//! Fuzzy IF-THEN rules: the text format, and generation of the combination
//! base restricted to the linguistic terms actually observed in the data.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::it2::{Category, It2Error, ParameterTable, Pollutant, Variable};

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("rule file line {line}: duplicate atom for {pollutant}")]
    DuplicateAtom { line: usize, pollutant: Pollutant },
    #[error("rule file line {line}: missing antecedent for {pollutant}")]
    MissingAtom { line: usize, pollutant: Pollutant },
    #[error("duplicate antecedent combination at line {line}")]
    DuplicateRule { line: usize },
    #[error("rule base is empty")]
    Empty,
    #[error("observed range for {pollutant} [{min}, {max}] intersects no term support")]
    NoRetainedTerms { pollutant: Pollutant, min: f64, max: f64 },
    #[error("observed range for {pollutant} has min {min} > max {max}")]
    BadRange { pollutant: Pollutant, min: f64, max: f64 },
    #[error(transparent)]
    It2(#[from] It2Error),
}

/// One IF-THEN rule: a linguistic term per pollutant and an AQI consequent.
/// `weight` is filled in by the inference engine when a weight policy is
/// applied; parsed and generated rules start at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyRule {
    /// Antecedent terms indexed by [`Pollutant::index`].
    pub antecedent: [Category; 7],
    pub consequent: Category,
    pub weight: f64,
}

impl FuzzyRule {
    pub fn new(antecedent: [Category; 7], consequent: Category) -> FuzzyRule {
        FuzzyRule { antecedent, consequent, weight: 1.0 }
    }

    pub fn term(&self, pollutant: Pollutant) -> Category {
        self.antecedent[pollutant.index()]
    }

    /// Pollutants whose antecedent term equals the consequent severity.
    pub fn drivers(&self) -> impl Iterator<Item = Pollutant> + '_ {
        Pollutant::ALL.into_iter().filter(|p| self.term(*p) == self.consequent)
    }
}

impl fmt::Display for FuzzyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IF ")?;
        for (i, p) in Pollutant::ALL.into_iter().enumerate() {
            if i > 0 {
                write!(f, " and ")?;
            }
            write!(f, "{} is {}", p, self.term(p))?;
        }
        write!(f, " THEN AQI is {}", self.consequent)
    }
}

/// How a rule base came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Generated,
    HandAuthored,
}

/// An ordered set of rules with unique antecedent combinations.
#[derive(Debug, Clone)]
pub struct RuleBase {
    rules: Vec<FuzzyRule>,
    index: HashMap<[Category; 7], usize>,
    pub provenance: Provenance,
}

impl RuleBase {
    pub fn new(rules: Vec<FuzzyRule>, provenance: Provenance) -> Result<RuleBase, RuleError> {
        if rules.is_empty() {
            return Err(RuleError::Empty);
        }
        let mut index = HashMap::with_capacity(rules.len());
        for (i, rule) in rules.iter().enumerate() {
            if index.insert(rule.antecedent, i).is_some() {
                return Err(RuleError::DuplicateRule { line: i + 1 });
            }
        }
        Ok(RuleBase { rules, index, provenance })
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Look up the rule with exactly this antecedent combination.
    pub fn find(&self, antecedent: &[Category; 7]) -> Option<&FuzzyRule> {
        self.index.get(antecedent).map(|&i| &self.rules[i])
    }

    /// Rules in the text format, one per line.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push_str(&rule.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parse the rule text format: one rule per line,
/// `IF <pollutant> is <term> and ... THEN AQI is <term>`, `#` comments.
pub fn parse_rules(text: &str) -> Result<RuleBase, RuleError> {
    let mut rules = Vec::new();
    let mut seen: HashMap<[Category; 7], usize> = HashMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let rule = parse_rule_line(line, line_no)?;
        if let Some(first) = seen.insert(rule.antecedent, line_no) {
            return Err(RuleError::Parse {
                line: line_no,
                message: format!("antecedent already used at line {first}"),
            });
        }
        rules.push(rule);
    }
    RuleBase::new(rules, Provenance::HandAuthored)
}

fn parse_rule_line(line: &str, line_no: usize) -> Result<FuzzyRule, RuleError> {
    let lower = line.to_ascii_lowercase();
    let rest = lower
        .strip_prefix("if ")
        .map(|_| &line[3..])
        .ok_or_else(|| RuleError::Parse { line: line_no, message: "rule must start with IF".into() })?;
    let then_pos = lower.find(" then ").ok_or_else(|| RuleError::Parse {
        line: line_no,
        message: "rule is missing THEN".into(),
    })?;
    let antecedent_text = &rest[..then_pos - 3];
    let consequent_text = &line[then_pos + 6..];

    let mut terms: [Option<Category>; 7] = [None; 7];
    for atom in split_keyword(antecedent_text, " and ") {
        let (pollutant, term) = parse_atom(atom, line_no)?;
        let slot = &mut terms[pollutant.index()];
        if slot.is_some() {
            return Err(RuleError::DuplicateAtom { line: line_no, pollutant });
        }
        *slot = Some(term);
    }
    let mut antecedent = [Category::Good; 7];
    for p in Pollutant::ALL {
        antecedent[p.index()] =
            terms[p.index()].ok_or(RuleError::MissingAtom { line: line_no, pollutant: p })?;
    }

    let (var, term) = split_is(consequent_text, line_no)?;
    if !var.trim().eq_ignore_ascii_case("AQI") {
        return Err(RuleError::Parse {
            line: line_no,
            message: format!("consequent variable must be AQI, got {var:?}"),
        });
    }
    let consequent: Category = term
        .trim()
        .trim_end_matches('.')
        .parse()
        .map_err(|e: It2Error| RuleError::Parse { line: line_no, message: e.to_string() })?;
    Ok(FuzzyRule::new(antecedent, consequent))
}

fn parse_atom(atom: &str, line_no: usize) -> Result<(Pollutant, Category), RuleError> {
    let (var, term) = split_is(atom, line_no)?;
    let pollutant: Pollutant = var
        .trim()
        .parse()
        .map_err(|e: It2Error| RuleError::Parse { line: line_no, message: e.to_string() })?;
    let term: Category = term
        .trim()
        .parse()
        .map_err(|e: It2Error| RuleError::Parse { line: line_no, message: e.to_string() })?;
    Ok((pollutant, term))
}

fn split_is(text: &str, line_no: usize) -> Result<(&str, &str), RuleError> {
    let lower = text.to_ascii_lowercase();
    let pos = lower.find(" is ").ok_or_else(|| RuleError::Parse {
        line: line_no,
        message: format!("expected `<variable> is <term>` in {text:?}"),
    })?;
    Ok((&text[..pos], &text[pos + 4..]))
}

/// Case-insensitive split on a keyword surrounded by spaces.
fn split_keyword<'a>(text: &'a str, keyword: &str) -> Vec<&'a str> {
    let lower = text.to_ascii_lowercase();
    let mut parts = Vec::new();
    let mut start = 0;
    let mut search = 0;
    while let Some(pos) = lower[search..].find(keyword) {
        let abs = search + pos;
        parts.push(&text[start..abs]);
        start = abs + keyword.len();
        search = start;
    }
    parts.push(&text[start..]);
    parts
}

/// Min/max observed concentration per pollutant, indexed like [`Pollutant::ALL`].
pub type ObservedRanges = [(f64, f64); 7];

/// Terms whose upper membership support intersects the observed range.
pub fn retained_terms(
    pollutant: Pollutant,
    range: (f64, f64),
    table: &ParameterTable,
) -> Result<Vec<Category>, RuleError> {
    let (min, max) = range;
    if min > max {
        return Err(RuleError::BadRange { pollutant, min, max });
    }
    let retained: Vec<Category> = table
        .terms(Variable::Pollutant(pollutant))
        .filter(|(_, set)| {
            let (a, d) = set.umf.support();
            a <= max && min <= d
        })
        .map(|(term, _)| *term)
        .collect();
    if retained.is_empty() {
        return Err(RuleError::NoRetainedTerms { pollutant, min, max });
    }
    Ok(retained)
}

/// Build the combination rule base over the retained terms of each pollutant.
///
/// Every combination becomes one rule whose consequent is its most severe
/// antecedent term. Rules are emitted in lexicographic order of the
/// severity tuple, pollutants in priority order.
pub fn generate_rules(
    ranges: &ObservedRanges,
    table: &ParameterTable,
) -> Result<RuleBase, RuleError> {
    let mut retained: Vec<Vec<Category>> = Vec::with_capacity(7);
    for p in Pollutant::ALL {
        retained.push(retained_terms(p, ranges[p.index()], table)?);
    }
    let count: usize = retained.iter().map(Vec::len).product();
    let mut rules = Vec::with_capacity(count);
    let mut cursor = [0usize; 7];
    loop {
        let mut antecedent = [Category::Good; 7];
        for i in 0..7 {
            antecedent[i] = retained[i][cursor[i]];
        }
        let consequent = antecedent.into_iter().max().expect("seven terms");
        rules.push(FuzzyRule::new(antecedent, consequent));
        // odometer increment, last pollutant fastest
        let mut i = 7;
        loop {
            if i == 0 {
                return RuleBase::new(rules, Provenance::Generated);
            }
            i -= 1;
            cursor[i] += 1;
            if cursor[i] < retained[i].len() {
                break;
            }
            cursor[i] = 0;
        }
    }
}
