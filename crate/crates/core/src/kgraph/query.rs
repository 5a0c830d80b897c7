//! Basic graph pattern matching, rule-body evaluation, the SELECT query
//! evaluator, and conjunctive instance queries.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::parse::{DlQuery, SelectQuery};
use super::{BodyAtom, CmpOp, Iri, KgError, Literal, Store, Term, Triple, TriplePattern};

/// A solution mapping from variable names to ground terms.
pub type Bindings = BTreeMap<String, Term>;

fn unify(pattern: &Term, ground: &Term, binding: &mut Bindings) -> bool {
    match pattern {
        Term::Var(name) => match binding.get(name) {
            Some(bound) => bound == ground,
            None => {
                binding.insert(name.clone(), ground.clone());
                true
            }
        },
        other => other == ground,
    }
}

fn match_pattern(store: &Store, pattern: &TriplePattern, binding: &Bindings, out: &mut Vec<Bindings>) {
    for triple in store.triples() {
        let mut candidate = binding.clone();
        if unify(&pattern.subject, &Term::Iri(triple.subject.clone()), &mut candidate)
            && unify(&pattern.predicate, &Term::Iri(triple.predicate.clone()), &mut candidate)
            && unify(&pattern.object, &triple.object, &mut candidate)
        {
            out.push(candidate);
        }
    }
}

/// All solution mappings of a basic graph pattern, via backtracking join in
/// pattern order. Enumeration follows store insertion order, so results are
/// deterministic.
pub fn match_bgp(store: &Store, patterns: &[TriplePattern]) -> Vec<Bindings> {
    let mut solutions = vec![Bindings::new()];
    for pattern in patterns {
        let mut next = Vec::new();
        for binding in &solutions {
            match_pattern(store, pattern, binding, &mut next);
        }
        solutions = next;
        if solutions.is_empty() {
            break;
        }
    }
    solutions
}

fn eval_builtin(op: CmpOp, lhs: &Term, rhs: &Term, binding: &Bindings) -> bool {
    let resolve = |t: &Term| -> Option<f64> {
        let ground = match t {
            Term::Var(v) => binding.get(v)?.clone(),
            other => other.clone(),
        };
        match ground {
            Term::Literal(l) => l.number_value(),
            _ => None,
        }
    };
    match (resolve(lhs), resolve(rhs)) {
        (Some(a), Some(b)) => match op {
            CmpOp::LessThan => a < b,
            CmpOp::GreaterThan => a > b,
        },
        _ => false,
    }
}

/// Solutions of a rule body: triple patterns joined first, numeric builtins
/// applied as filters afterwards.
pub fn match_rule_body(store: &Store, body: &[BodyAtom]) -> Vec<Bindings> {
    let patterns: Vec<TriplePattern> = body
        .iter()
        .filter_map(|a| match a {
            BodyAtom::Pattern(p) => Some(p.clone()),
            BodyAtom::Builtin { .. } => None,
        })
        .collect();
    let mut solutions = match_bgp(store, &patterns);
    for atom in body {
        if let BodyAtom::Builtin { op, lhs, rhs } = atom {
            solutions.retain(|b| eval_builtin(*op, lhs, rhs, b));
        }
    }
    solutions
}

/// Substitute a binding into a head pattern; fails if any variable is free.
pub fn instantiate(pattern: &TriplePattern, binding: &Bindings) -> Result<Triple, KgError> {
    let ground = |term: &Term| -> Result<Term, KgError> {
        match term {
            Term::Var(v) => binding.get(v).cloned().ok_or(KgError::VariableInStore),
            other => Ok(other.clone()),
        }
    };
    let subject = match ground(&pattern.subject)? {
        Term::Iri(iri) => iri,
        _ => return Err(KgError::VariableInStore),
    };
    let predicate = match ground(&pattern.predicate)? {
        Term::Iri(iri) => iri,
        _ => return Err(KgError::VariableInStore),
    };
    Triple::new(subject, predicate, ground(&pattern.object)?)
}

/// Total order over ground terms: numbers first (by value), then IRIs
/// (by full text), then text literals.
pub fn term_cmp(a: &Term, b: &Term) -> Ordering {
    let rank = |t: &Term| match t {
        Term::Literal(Literal::Number { .. }) => 0u8,
        Term::Iri(_) => 1,
        Term::Literal(Literal::Text(_)) => 2,
        Term::Var(_) => 3,
    };
    match (rank(a), rank(b)) {
        (x, y) if x != y => x.cmp(&y),
        _ => match (a, b) {
            (
                Term::Literal(Literal::Number { value: va, .. }),
                Term::Literal(Literal::Number { value: vb, .. }),
            ) => va.cmp(vb),
            (Term::Iri(ia), Term::Iri(ib)) => ia.0.cmp(&ib.0),
            (Term::Literal(Literal::Text(ta)), Term::Literal(Literal::Text(tb))) => ta.cmp(tb),
            (Term::Var(va), Term::Var(vb)) => va.cmp(vb),
            _ => Ordering::Equal,
        },
    }
}

/// A solved SELECT query: column names and rows of ground terms.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

impl QueryResult {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Term::to_string).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Evaluate a SELECT query. Rows are ordered by the ORDER BY variables when
/// given, otherwise by every projected column, so output is deterministic.
pub fn execute_query(store: &Store, query: &SelectQuery) -> QueryResult {
    let solutions = match_bgp(store, &query.patterns);
    let mut rows: Vec<Vec<Term>> = solutions
        .iter()
        .map(|b| {
            query
                .variables
                .iter()
                .map(|v| b.get(v).cloned().expect("projection validated at parse"))
                .collect()
        })
        .collect();
    let keys: Vec<usize> = if query.order_by.is_empty() {
        (0..query.variables.len()).collect()
    } else {
        query
            .order_by
            .iter()
            .filter_map(|v| query.variables.iter().position(|c| c == v))
            .collect()
    };
    rows.sort_by(|a, b| {
        for &k in &keys {
            let ord = term_cmp(&a[k], &b[k]);
            if ord != Ordering::Equal {
                return ord;
            }
        }
        // full-row comparison keeps the order total
        for (x, y) in a.iter().zip(b) {
            let ord = term_cmp(x, y);
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    });
    QueryResult { columns: query.variables.clone(), rows }
}

/// Individuals satisfying every constraint of a conjunctive instance query,
/// sorted by IRI. The store should already be materialized.
pub fn dl_membership(store: &Store, query: &DlQuery) -> Vec<Iri> {
    let mut required: Vec<TriplePattern> = Vec::with_capacity(query.constraints.len() + 1);
    let var = Term::Var("x".to_string());
    required.push(TriplePattern {
        subject: var.clone(),
        predicate: Term::Iri(Iri::rdf_type()),
        object: Term::Iri(Iri::aq(&query.class)),
    });
    for (prop, value) in &query.constraints {
        required.push(TriplePattern {
            subject: var.clone(),
            predicate: Term::Iri(Iri::aq(prop)),
            object: Term::Iri(Iri::aq(value)),
        });
    }
    let mut out: Vec<Iri> = match_bgp(store, &required)
        .into_iter()
        .filter_map(|b| match b.get("x") {
            Some(Term::Iri(iri)) => Some(iri.clone()),
            _ => None,
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse::{parse_dl_query, parse_query, parse_rules, parse_triples};
    use super::super::{
        materialize, MaterializeOptions, Term, TripleProvenance, DEMO_KB, DEMO_RULES, QUERY_1,
        QUERY_2, QUERY_3,
    };
    use super::*;

    fn demo_store() -> Store {
        let mut store = parse_triples(DEMO_KB).unwrap();
        let rules = parse_rules(DEMO_RULES).unwrap();
        materialize(&mut store, &rules, MaterializeOptions::default()).unwrap();
        store
    }

    #[test]
    fn query_on_empty_store_is_empty() {
        let store = Store::new();
        let q = parse_query(QUERY_1).unwrap();
        assert!(execute_query(&store, &q).rows.is_empty());
    }

    #[test]
    fn query1_returns_the_ch001_observation() {
        let store = demo_store();
        let q = parse_query(QUERY_1).unwrap();
        let result = execute_query(&store, &q);
        assert_eq!(result.rows.len(), 1);
        let row = &result.rows[0];
        assert_eq!(row[0], Term::Iri(Iri::aq("Observation4")));
        assert_eq!(row[1].to_string(), "\"142.0\"^^float");
        assert_eq!(row[2], Term::Iri(Iri::aq("AQIModerate")));
    }

    #[test]
    fn query2_returns_the_two_construction_ban_rows_in_order() {
        let store = demo_store();
        let q = parse_query(QUERY_2).unwrap();
        let result = execute_query(&store, &q);
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.rows[0][0], Term::Iri(Iri::aq("Observation3")));
        assert_eq!(result.rows[0][1], Term::Iri(Iri::aq("AP001")));
        assert_eq!(result.rows[0][2].to_string(), "\"310.0\"^^float");
        assert_eq!(result.rows[0][3], Term::Iri(Iri::aq("AQIVeryPoor")));
        assert_eq!(result.rows[1][0], Term::Iri(Iri::aq("Observation10")));
        assert_eq!(result.rows[1][1], Term::Iri(Iri::aq("BR006")));
        assert_eq!(result.rows[1][2].to_string(), "\"367.0\"^^float");
        assert_eq!(result.rows[1][3], Term::Iri(Iri::aq("AQIVeryPoor")));
    }

    #[test]
    fn dl_query_finds_exactly_the_moderate_ch001_observation() {
        let store = demo_store();
        let q = parse_dl_query(QUERY_3).unwrap();
        let hits = dl_membership(&store, &q);
        assert_eq!(hits, vec![Iri::aq("Observation4")]);
    }

    #[test]
    fn dl_query_with_contradictory_constraints_is_empty() {
        let store = demo_store();
        let mut q = parse_dl_query(QUERY_3).unwrap();
        q.constraints.push(("hasStationId".into(), "AP001".into()));
        assert!(dl_membership(&store, &q).is_empty());
    }

    #[test]
    fn dl_query_single_class_constraint_lists_all_observations() {
        let store = demo_store();
        let q = parse_dl_query("Observation").unwrap();
        assert_eq!(dl_membership(&store, &q).len(), 11);
    }

    #[test]
    fn primary_rule_infers_severe_for_observation7() {
        let store = demo_store();
        let t = Triple::new(
            Iri::aq("Observation7"),
            Iri::aq("hasAQICategory"),
            Term::Iri(Iri::aq("AQISevere")),
        )
        .unwrap();
        assert!(store.contains(&t));
        let prov = store
            .entries()
            .find(|(triple, _)| triple == &t)
            .map(|(_, p)| p.clone())
            .unwrap();
        assert_eq!(prov, TripleProvenance::Inferred { rule: "rule-1".to_string() });
    }

    #[test]
    fn severe_consequences_are_all_inferred() {
        let store = demo_store();
        let expect = [
            ("hasImpact", "PrematureMortalityRisk"),
            ("hasImpact", "BreathingDifficulty"),
            ("affectsVulnerableGroup", "AsthmaPatients"),
            ("affectsVulnerableGroup", "CardiacPatients"),
            ("hasRecommendedAction", "IndustrialShutdown"),
            ("hasRecommendedAction", "EmergencyAlertAction"),
            ("determinesActuator", "IndustrialEmissionController_Instance"),
            ("executedBy", "StateAuthority"),
            ("appliesPenalty", "IndustrialClosure"),
        ];
        for (p, o) in expect {
            let t = Triple::new(Iri::aq("Observation7"), Iri::aq(p), Term::Iri(Iri::aq(o))).unwrap();
            assert!(store.contains(&t), "missing {p} {o}");
        }
    }

    #[test]
    fn wind_rule_fires_below_threshold_only() {
        // speed 1.5 in the fixture fires the escalation
        let store = demo_store();
        let escalation = Triple::new(
            Iri::aq("Observation7"),
            Iri::aq("hasEscalationEvent"),
            Term::Iri(Iri::aq("AQIEscalation_Instance")),
        )
        .unwrap();
        assert!(store.contains(&escalation));

        // same knowledge base with speed 2.5 must not fire
        let calm = DEMO_KB.replace("\"1.5\"^^float", "\"2.5\"^^float");
        let mut store = parse_triples(&calm).unwrap();
        let rules = parse_rules(DEMO_RULES).unwrap();
        materialize(&mut store, &rules, MaterializeOptions::default()).unwrap();
        assert!(!store.contains(&escalation));
    }

    #[test]
    fn materialization_is_idempotent_and_monotone() {
        let mut store = parse_triples(DEMO_KB).unwrap();
        let asserted = store.len();
        let rules = parse_rules(DEMO_RULES).unwrap();
        materialize(&mut store, &rules, MaterializeOptions::default()).unwrap();
        let after_first = store.len();
        assert!(after_first > asserted);
        let report = materialize(&mut store, &rules, MaterializeOptions::default()).unwrap();
        assert_eq!(store.len(), after_first);
        assert_eq!(report.inferred, 0);
    }

    #[test]
    fn materialization_fixpoint_is_order_independent() {
        let rules = parse_rules(DEMO_RULES).unwrap();
        let mut forward = parse_triples(DEMO_KB).unwrap();
        materialize(&mut forward, &rules, MaterializeOptions::default()).unwrap();
        let mut reversed_rules = rules.clone();
        reversed_rules.reverse();
        let mut backward = parse_triples(DEMO_KB).unwrap();
        materialize(&mut backward, &reversed_rules, MaterializeOptions::default()).unwrap();
        let mut a: Vec<String> = forward.triples().map(Triple::to_string).collect();
        let mut b: Vec<String> = backward.triples().map(Triple::to_string).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn ordering_is_numbers_then_iris_then_text() {
        let mut terms = [
            Term::Literal(Literal::Text("zz".into())),
            Term::Iri(Iri::aq("B")),
            Term::Literal(Literal::float(5.0)),
            Term::Iri(Iri::aq("A")),
            Term::Literal(Literal::float(1.0)),
        ];
        terms.sort_by(term_cmp);
        assert_eq!(terms[0], Term::Literal(Literal::float(1.0)));
        assert_eq!(terms[1], Term::Literal(Literal::float(5.0)));
        assert_eq!(terms[2], Term::Iri(Iri::aq("A")));
        assert_eq!(terms[4], Term::Literal(Literal::Text("zz".into())));
    }
}
