//! Lightweight knowledge-graph layer: a triple store, forward-chaining Horn
//! rules with numeric comparison builtins, a small SELECT query subset, and
//! conjunctive instance queries.

mod parse;
mod query;

pub use parse::{parse_dl_query, parse_query, parse_rules, parse_schema, parse_triples};
pub use query::{dl_membership, execute_query, match_bgp, Bindings, QueryResult};

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use ordered_float::OrderedFloat;
use thiserror::Error;

use crate::inference::TypeReducedInterval;
use crate::ingest::CleanRecord;
use crate::it2::{Category, Pollutant};

pub const AQ_NS: &str = "http://example.org/airquality#";
pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

pub const DEMO_KB: &str = include_str!("../../fixtures/demo_kb.nt");
pub const DEMO_RULES: &str = include_str!("../../fixtures/rules.txt");
pub const DEMO_SCHEMA: &str = include_str!("../../fixtures/schema.txt");
pub const QUERY_1: &str = include_str!("../../fixtures/query1.rq");
pub const QUERY_2: &str = include_str!("../../fixtures/query2.rq");
pub const QUERY_3: &str = include_str!("../../fixtures/query3.dl");

#[derive(Debug, Error)]
pub enum KgError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("rule {rule}: head variable ?{var} does not occur in the body")]
    UnsafeHeadVariable { rule: String, var: String },
    #[error("rule {rule}: builtin variable ?{var} is not bound by any body pattern")]
    UnboundBuiltinVariable { rule: String, var: String },
    #[error("rule {rule}: builtins may only appear in the body")]
    BuiltinInHead { rule: String },
    #[error("projected variable ?{0} does not appear in the graph pattern")]
    UnboundProjection(String),
    #[error("variables may not be stored in the ground store")]
    VariableInStore,
    #[error("materialization did not reach a fixpoint within {0} rounds")]
    FixpointCap(usize),
}

/// A full IRI. Displays in prefixed form when it falls inside one of the two
/// known namespaces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(pub String);

impl Iri {
    pub fn aq(local: &str) -> Iri {
        Iri(format!("{AQ_NS}{local}"))
    }

    pub fn rdf_type() -> Iri {
        Iri(format!("{RDF_NS}type"))
    }

    /// Local name when the IRI is in the `aq:` namespace.
    pub fn aq_local(&self) -> Option<&str> {
        self.0.strip_prefix(AQ_NS)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(local) = self.0.strip_prefix(AQ_NS) {
            write!(f, "aq:{local}")
        } else if let Some(local) = self.0.strip_prefix(RDF_NS) {
            write!(f, "rdf:{local}")
        } else {
            write!(f, "<{}>", self.0)
        }
    }
}

/// A typed literal: a number with its datatype tag, or plain text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Number { value: OrderedFloat<f64>, datatype: String },
    Text(String),
}

impl Literal {
    pub fn float(value: f64) -> Literal {
        Literal::Number { value: OrderedFloat(value), datatype: "float".into() }
    }

    pub fn number_value(&self) -> Option<f64> {
        match self {
            Literal::Number { value, .. } => Some(value.0),
            Literal::Text(_) => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number { value, datatype } => {
                let v = value.0;
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    write!(f, "\"{v:.1}\"^^{datatype}")
                } else {
                    write!(f, "\"{v}\"^^{datatype}")
                }
            }
            Literal::Text(t) => write!(f, "\"{}\"", t.replace('"', "\\\"")),
        }
    }
}

/// A term of the graph: an IRI, a literal, or (in rules and queries only)
/// a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Var(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Literal(l) => l.fmt(f),
            Term::Var(v) => write!(f, "?{v}"),
        }
    }
}

/// A ground triple. Subjects and predicates are IRIs; objects may be IRIs or
/// literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: Term) -> Result<Triple, KgError> {
        if object.is_var() {
            return Err(KgError::VariableInStore);
        }
        Ok(Triple { subject, predicate, object })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A triple pattern: any position may hold a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object].into_iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    LessThan,
    GreaterThan,
}

/// A body atom: a triple pattern or a numeric comparison builtin.
#[derive(Debug, Clone, PartialEq)]
pub enum BodyAtom {
    Pattern(TriplePattern),
    Builtin { op: CmpOp, lhs: Term, rhs: Term },
}

/// A Horn rule over triple patterns. Head variables must occur in body
/// patterns and builtins are restricted to the body.
#[derive(Debug, Clone, PartialEq)]
pub struct HornRule {
    pub name: String,
    pub body: Vec<BodyAtom>,
    pub head: Vec<TriplePattern>,
}

/// Where a stored triple came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TripleProvenance {
    Asserted,
    Inferred { rule: String },
}

/// Insertion-ordered, duplicate-free triple store.
///
/// One writer or many readers; materialization takes `&mut` while queries
/// run on a shared snapshot.
#[derive(Debug, Default, Clone)]
pub struct Store {
    entries: Vec<(Triple, TripleProvenance)>,
    seen: HashSet<Triple>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    /// Insert a triple; returns false when it was already present.
    pub fn insert(&mut self, triple: Triple, provenance: TripleProvenance) -> bool {
        if self.seen.contains(&triple) {
            return false;
        }
        self.seen.insert(triple.clone());
        self.entries.push((triple, provenance));
        true
    }

    pub fn assert_triple(&mut self, triple: Triple) -> bool {
        self.insert(triple, TripleProvenance::Asserted)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.seen.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.entries.iter().map(|(t, _)| t)
    }

    pub fn entries(&self) -> impl Iterator<Item = &(Triple, TripleProvenance)> {
        self.entries.iter()
    }

    pub fn inferred_count(&self) -> usize {
        self.entries.iter().filter(|(_, p)| matches!(p, TripleProvenance::Inferred { .. })).count()
    }

    /// Serialize one line per triple; inferred triples carry a provenance
    /// comment.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (triple, prov) in &self.entries {
            out.push_str(&triple.to_string());
            if let TripleProvenance::Inferred { rule } = prov {
                out.push_str(&format!(" # inferred by {rule}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MaterializeOptions {
    pub max_rounds: usize,
}

impl Default for MaterializeOptions {
    fn default() -> Self {
        // No builtin creates new terms, so the fixpoint is finite; the cap
        // only guards against pathological rule sets.
        MaterializeOptions { max_rounds: 1000 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MaterializeReport {
    pub rounds: usize,
    pub inferred: usize,
}

/// Naive forward chaining to the least fixpoint. Asserted triples are
/// retained and every inferred triple records the rule that produced it.
pub fn materialize(
    store: &mut Store,
    rules: &[HornRule],
    options: MaterializeOptions,
) -> Result<MaterializeReport, KgError> {
    let mut report = MaterializeReport::default();
    for round in 0..options.max_rounds {
        let mut added = 0usize;
        for rule in rules {
            let bindings = query::match_rule_body(store, &rule.body);
            let mut new_triples = Vec::new();
            for binding in &bindings {
                for head in &rule.head {
                    let triple = query::instantiate(head, binding)
                        .expect("head variables are body-safe");
                    if !store.contains(&triple) {
                        new_triples.push(triple);
                    }
                }
            }
            for t in new_triples {
                if store.insert(t, TripleProvenance::Inferred { rule: rule.name.clone() }) {
                    added += 1;
                }
            }
        }
        if added == 0 {
            report.rounds = round + 1;
            return Ok(report);
        }
        report.inferred += added;
    }
    Err(KgError::FixpointCap(options.max_rounds))
}

/// Predicate IRI for a pollutant's category property, e.g. `aq:hasPM25Category`.
pub fn category_predicate(p: Pollutant) -> Iri {
    Iri::aq(&format!("has{}Category", p.compact_name()))
}

/// Individual IRI for a pollutant category, e.g. `aq:PM10_Severe`.
pub fn category_individual(p: Pollutant, c: Category) -> Iri {
    Iri::aq(&format!("{}_{}", p.compact_name(), c.name()))
}

/// Individual IRI for an AQI category, e.g. `aq:AQIVeryPoor`.
pub fn aqi_individual(c: Category) -> Iri {
    Iri::aq(&format!("AQI{}", c.name()))
}

/// Station ids become IRI local names; anything outside the identifier
/// alphabet is mapped to `_` so emitted files stay parseable.
fn station_local(station: &str) -> String {
    station
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Map one assessed record to its observation triples. `index` is the
/// 1-based observation number; naming is deterministic.
pub fn observation_to_triples(
    record: &CleanRecord,
    result: &TypeReducedInterval,
    category: Category,
    pollutant_categories: &[Category; 7],
    index: usize,
) -> Vec<Triple> {
    let obs = Iri::aq(&format!("Observation{index}"));
    let mut triples = Vec::with_capacity(11);
    let push = |v: &mut Vec<Triple>, p: Iri, o: Term| {
        v.push(Triple { subject: obs.clone(), predicate: p, object: o });
    };
    push(&mut triples, Iri::rdf_type(), Term::Iri(Iri::aq("Observation")));
    push(&mut triples, Iri::aq("hasStationId"), Term::Iri(Iri::aq(&station_local(&record.station))));
    let rounded = (result.aqi * 10.0).round() / 10.0;
    push(&mut triples, Iri::aq("hasAQIValue"), Term::Literal(Literal::float(rounded)));
    push(&mut triples, Iri::aq("hasAQICategory"), Term::Iri(aqi_individual(category)));
    for p in Pollutant::ALL {
        push(
            &mut triples,
            category_predicate(p),
            Term::Iri(category_individual(p, pollutant_categories[p.index()])),
        );
    }
    triples
}

/// Declarations loaded from a schema file.
#[derive(Debug, Default, Clone)]
pub struct Schema {
    pub classes: BTreeSet<String>,
    pub object_properties: BTreeSet<String>,
    pub data_properties: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
    pub subclass_axioms: Vec<(String, String)>,
    pub class_assertions: usize,
}

/// Entity counts used by the ontology quality scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OntologyCounts {
    pub classes: usize,
    pub object_properties: usize,
    pub data_properties: usize,
    pub individuals: usize,
    pub subclass_axioms: usize,
    pub logical_axioms: usize,
}

/// Count declared schema entities plus individuals present in the store.
///
/// A store IRI counts as an individual when it is not a declared class or
/// property and not a predicate; objects of `rdf:type` are classes, not
/// individuals.
pub fn ontology_counts(store: Option<&Store>, schema: &Schema) -> OntologyCounts {
    let mut individuals: BTreeSet<String> = schema.individuals.clone();
    if let Some(store) = store {
        let rdf_type = Iri::rdf_type();
        let local = |iri: &Iri| iri.aq_local().unwrap_or(&iri.0).to_string();
        let declared = |name: &str| {
            schema.classes.contains(name)
                || schema.object_properties.contains(name)
                || schema.data_properties.contains(name)
        };
        for triple in store.triples() {
            let s = local(&triple.subject);
            if !declared(&s) {
                individuals.insert(s);
            }
            if triple.predicate != rdf_type {
                if let Term::Iri(obj) = &triple.object {
                    let o = local(obj);
                    if !declared(&o) {
                        individuals.insert(o);
                    }
                }
            }
        }
    }
    OntologyCounts {
        classes: schema.classes.len(),
        object_properties: schema.object_properties.len(),
        data_properties: schema.data_properties.len(),
        individuals: individuals.len(),
        subclass_axioms: schema.subclass_axioms.len(),
        logical_axioms: schema.subclass_axioms.len() + schema.class_assertions,
    }
}
