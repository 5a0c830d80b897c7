//! Text formats of the knowledge-graph layer: triples, Horn rules, the
//! SELECT query subset, conjunctive instance queries, and schema files.

use std::collections::BTreeSet;

use ordered_float::OrderedFloat;

use super::{
    BodyAtom, CmpOp, HornRule, Iri, KgError, Literal, Schema, Store, Term, Triple, TriplePattern,
    TripleProvenance, AQ_NS, RDF_NS,
};

/// Strip a `#` comment, ignoring `#` inside `<...>` or `"..."`.
fn strip_comment(line: &str) -> &str {
    let mut in_iri = false;
    let mut in_str = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '<' if !in_str => in_iri = true,
            '>' if !in_str => in_iri = false,
            '"' if !in_iri => in_str = !in_str,
            '#' if !in_iri && !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Split a line into terms, keeping `<...>` and `"..."` (with `^^tag`) whole.
fn tokenize(line: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut in_iri = false;
    let mut in_str = false;
    for ch in line.chars() {
        match ch {
            '<' if !in_str => {
                in_iri = true;
                current.push(ch);
            }
            '>' if in_iri => {
                in_iri = false;
                current.push(ch);
            }
            '"' if !in_iri => {
                in_str = !in_str;
                current.push(ch);
            }
            c if c.is_whitespace() && !in_iri && !in_str => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Parse one term token. `allow_bare` maps unprefixed names into the `aq:`
/// namespace (rule and instance-query syntax); bare numbers become float
/// literals.
fn parse_term(token: &str, allow_bare: bool, line: usize) -> Result<Term, KgError> {
    if let Some(var) = token.strip_prefix('?') {
        if var.is_empty() {
            return Err(KgError::Parse { line, message: "empty variable name".into() });
        }
        return Ok(Term::Var(var.to_string()));
    }
    if token.starts_with('<') && token.ends_with('>') {
        return Ok(Term::Iri(Iri(token[1..token.len() - 1].to_string())));
    }
    if let Some(body) = token.strip_prefix('"') {
        let Some(end) = body.find('"') else {
            return Err(KgError::Parse { line, message: format!("unterminated literal {token:?}") });
        };
        let lex = &body[..end];
        let rest = &body[end + 1..];
        if let Some(tag) = rest.strip_prefix("^^") {
            let datatype = tag
                .strip_prefix("xsd:")
                .unwrap_or(tag)
                .trim_start_matches('<')
                .trim_end_matches('>')
                .rsplit('#')
                .next()
                .unwrap_or(tag)
                .to_string();
            let value: f64 = lex.parse().map_err(|_| KgError::Parse {
                line,
                message: format!("cannot parse {lex:?} as a number"),
            })?;
            return Ok(Term::Literal(Literal::Number { value: OrderedFloat(value), datatype }));
        }
        return Ok(Term::Literal(Literal::Text(lex.to_string())));
    }
    if let Some(local) = token.strip_prefix("aq:") {
        return Ok(Term::Iri(Iri(format!("{AQ_NS}{local}"))));
    }
    if let Some(local) = token.strip_prefix("rdf:") {
        return Ok(Term::Iri(Iri(format!("{RDF_NS}{local}"))));
    }
    if token == "a" {
        return Ok(Term::Iri(Iri::rdf_type()));
    }
    if let Ok(value) = token.parse::<f64>() {
        return Ok(Term::Literal(Literal::float(value)));
    }
    if allow_bare && token.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Ok(Term::Iri(Iri(format!("{AQ_NS}{token}"))));
    }
    Err(KgError::Parse { line, message: format!("cannot parse term {token:?}") })
}

/// Parse a line-oriented triples file into a store of asserted triples.
pub fn parse_triples(text: &str) -> Result<Store, KgError> {
    let mut store = Store::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = tokenize(line);
        if tokens.last().is_some_and(|t| t == ".") {
            tokens.pop();
        }
        if tokens.len() != 3 {
            return Err(KgError::Parse {
                line: line_no,
                message: format!("expected `subject predicate object`, got {} terms", tokens.len()),
            });
        }
        let subject = match parse_term(&tokens[0], false, line_no)? {
            Term::Iri(iri) => iri,
            other => {
                return Err(KgError::Parse {
                    line: line_no,
                    message: format!("subject must be an IRI, got {other}"),
                })
            }
        };
        let predicate = match parse_term(&tokens[1], false, line_no)? {
            Term::Iri(iri) => iri,
            other => {
                return Err(KgError::Parse {
                    line: line_no,
                    message: format!("predicate must be an IRI, got {other}"),
                })
            }
        };
        let object = parse_term(&tokens[2], false, line_no)?;
        if object.is_var() {
            return Err(KgError::Parse {
                line: line_no,
                message: "variables are not allowed in a triples file".into(),
            });
        }
        store.insert(Triple { subject, predicate, object }, TripleProvenance::Asserted);
    }
    Ok(store)
}

/// Parse a rule file: atoms joined by `^`, `->` between body and head, rules
/// separated by blank lines, `#` comments.
///
/// Unary atoms `C(?x)` desugar to `?x rdf:type aq:C`; binary atoms
/// `p(?x, y)` to `?x aq:p y`. Builtins are `swrlb:lessThan` and
/// `swrlb:greaterThan`.
pub fn parse_rules(text: &str) -> Result<Vec<HornRule>, KgError> {
    let mut rules = Vec::new();
    let mut chunk = String::new();
    let mut chunk_start = 0usize;
    let flush = |chunk: &mut String, start: usize, rules: &mut Vec<HornRule>| -> Result<(), KgError> {
        let body = chunk.trim().to_string();
        chunk.clear();
        if body.is_empty() {
            return Ok(());
        }
        let name = format!("rule-{}", rules.len() + 1);
        rules.push(parse_rule_chunk(&body, name, start)?);
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            flush(&mut chunk, chunk_start, &mut rules)?;
            continue;
        }
        if chunk.is_empty() {
            chunk_start = idx + 1;
        }
        chunk.push(' ');
        chunk.push_str(line);
    }
    flush(&mut chunk, chunk_start, &mut rules)?;
    Ok(rules)
}

fn parse_rule_chunk(text: &str, name: String, line: usize) -> Result<HornRule, KgError> {
    let Some((body_text, head_text)) = text.split_once("->") else {
        return Err(KgError::Parse { line, message: "rule is missing `->`".into() });
    };
    let mut body = Vec::new();
    for atom in body_text.split('^') {
        let atom = atom.trim();
        if atom.is_empty() {
            continue;
        }
        body.push(parse_atom(atom, line)?);
    }
    let mut head = Vec::new();
    for atom in head_text.split('^') {
        let atom = atom.trim();
        if atom.is_empty() {
            continue;
        }
        match parse_atom(atom, line)? {
            BodyAtom::Pattern(p) => head.push(p),
            BodyAtom::Builtin { .. } => return Err(KgError::BuiltinInHead { rule: name }),
        }
    }
    if body.is_empty() || head.is_empty() {
        return Err(KgError::Parse { line, message: "rule needs a body and a head".into() });
    }
    let rule = HornRule { name, body, head };
    check_safety(&rule)?;
    Ok(rule)
}

fn check_safety(rule: &HornRule) -> Result<(), KgError> {
    let bound: BTreeSet<&str> = rule
        .body
        .iter()
        .filter_map(|a| match a {
            BodyAtom::Pattern(p) => Some(p),
            BodyAtom::Builtin { .. } => None,
        })
        .flat_map(|p| p.variables())
        .collect();
    for pattern in &rule.head {
        for var in pattern.variables() {
            if !bound.contains(var) {
                return Err(KgError::UnsafeHeadVariable {
                    rule: rule.name.clone(),
                    var: var.to_string(),
                });
            }
        }
    }
    for atom in &rule.body {
        if let BodyAtom::Builtin { lhs, rhs, .. } = atom {
            for term in [lhs, rhs] {
                if let Term::Var(v) = term {
                    if !bound.contains(v.as_str()) {
                        return Err(KgError::UnboundBuiltinVariable {
                            rule: rule.name.clone(),
                            var: v.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

fn parse_atom(atom: &str, line: usize) -> Result<BodyAtom, KgError> {
    let Some(open) = atom.find('(') else {
        return Err(KgError::Parse { line, message: format!("atom {atom:?} is missing `(`") });
    };
    if !atom.ends_with(')') {
        return Err(KgError::Parse { line, message: format!("atom {atom:?} is missing `)`") });
    }
    let functor = atom[..open].trim();
    let args: Vec<&str> = atom[open + 1..atom.len() - 1].split(',').map(str::trim).collect();
    if let Some(builtin) = functor.strip_prefix("swrlb:") {
        let op = match builtin {
            "lessThan" => CmpOp::LessThan,
            "greaterThan" => CmpOp::GreaterThan,
            other => {
                return Err(KgError::Parse {
                    line,
                    message: format!("unsupported builtin swrlb:{other}"),
                })
            }
        };
        if args.len() != 2 {
            return Err(KgError::Parse { line, message: "builtins take two arguments".into() });
        }
        let lhs = parse_term(args[0], true, line)?;
        let rhs = parse_term(args[1], true, line)?;
        return Ok(BodyAtom::Builtin { op, lhs, rhs });
    }
    match args.len() {
        1 => {
            let subject = parse_term(args[0], true, line)?;
            Ok(BodyAtom::Pattern(TriplePattern {
                subject,
                predicate: Term::Iri(Iri::rdf_type()),
                object: Term::Iri(Iri::aq(functor)),
            }))
        }
        2 => {
            let subject = parse_term(args[0], true, line)?;
            let object = parse_term(args[1], true, line)?;
            Ok(BodyAtom::Pattern(TriplePattern {
                subject,
                predicate: Term::Iri(Iri::aq(functor)),
                object,
            }))
        }
        n => Err(KgError::Parse { line, message: format!("atom {atom:?} has {n} arguments") }),
    }
}

/// A parsed SELECT query: projected variables, a basic graph pattern, and an
/// optional ORDER BY variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectQuery {
    pub variables: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub order_by: Vec<String>,
}

/// Parse the SELECT subset: PREFIX declarations, SELECT, WHERE with triple
/// patterns, optional ORDER BY.
pub fn parse_query(text: &str) -> Result<SelectQuery, KgError> {
    let mut tokens: Vec<String> = Vec::new();
    for raw in text.lines() {
        let line = strip_comment(raw);
        for tok in tokenize(line) {
            // split structural braces and pattern separators glued to terms
            let mut rest = tok.as_str();
            while let Some(p) = rest.find(['{', '}']) {
                if p > 0 {
                    tokens.push(rest[..p].to_string());
                }
                tokens.push(rest[p..p + 1].to_string());
                rest = &rest[p + 1..];
            }
            if !rest.is_empty() {
                tokens.push(rest.to_string());
            }
        }
    }

    let mut pos = 0usize;
    let mut prefixes: Vec<(String, String)> = Vec::new();
    let peek = |pos: usize| tokens.get(pos).map(String::as_str);
    while peek(pos).is_some_and(|t| t.eq_ignore_ascii_case("prefix")) {
        let name = tokens.get(pos + 1).cloned().ok_or(KgError::Parse {
            line: 0,
            message: "PREFIX needs a name and an IRI".into(),
        })?;
        let iri = tokens.get(pos + 2).cloned().ok_or(KgError::Parse {
            line: 0,
            message: "PREFIX needs an IRI".into(),
        })?;
        let iri = iri.trim_start_matches('<').trim_end_matches('>').to_string();
        prefixes.push((name.trim_end_matches(':').to_string(), iri));
        pos += 3;
    }
    if !peek(pos).is_some_and(|t| t.eq_ignore_ascii_case("select")) {
        return Err(KgError::Parse { line: 0, message: "expected SELECT".into() });
    }
    pos += 1;
    let mut variables = Vec::new();
    while let Some(tok) = peek(pos) {
        if let Some(var) = tok.strip_prefix('?') {
            variables.push(var.to_string());
            pos += 1;
        } else {
            break;
        }
    }
    if variables.is_empty() {
        return Err(KgError::Parse { line: 0, message: "SELECT needs at least one variable".into() });
    }
    if !peek(pos).is_some_and(|t| t.eq_ignore_ascii_case("where")) {
        return Err(KgError::Parse { line: 0, message: "expected WHERE".into() });
    }
    pos += 1;
    if peek(pos) != Some("{") {
        return Err(KgError::Parse { line: 0, message: "expected `{` after WHERE".into() });
    }
    pos += 1;
    let resolve = |tok: &str| -> Result<Term, KgError> {
        for (name, iri) in &prefixes {
            if let Some(local) = tok.strip_prefix(&format!("{name}:")) {
                return Ok(Term::Iri(Iri(format!("{iri}{local}"))));
            }
        }
        parse_term(tok, false, 0)
    };
    let mut patterns = Vec::new();
    let mut triple: Vec<Term> = Vec::new();
    while let Some(tok) = peek(pos) {
        if tok == "}" {
            pos += 1;
            break;
        }
        if tok == "." {
            pos += 1;
            continue;
        }
        triple.push(resolve(tok)?);
        pos += 1;
        if triple.len() == 3 {
            let object = triple.pop().unwrap();
            let predicate = triple.pop().unwrap();
            let subject = triple.pop().unwrap();
            patterns.push(TriplePattern { subject, predicate, object });
        }
    }
    if !triple.is_empty() {
        return Err(KgError::Parse { line: 0, message: "incomplete triple pattern".into() });
    }
    let mut order_by = Vec::new();
    if peek(pos).is_some_and(|t| t.eq_ignore_ascii_case("order")) {
        pos += 1;
        if !peek(pos).is_some_and(|t| t.eq_ignore_ascii_case("by")) {
            return Err(KgError::Parse { line: 0, message: "expected BY after ORDER".into() });
        }
        pos += 1;
        while let Some(tok) = peek(pos) {
            if let Some(var) = tok.strip_prefix('?') {
                order_by.push(var.to_string());
                pos += 1;
            } else {
                break;
            }
        }
    }
    if let Some(extra) = peek(pos) {
        return Err(KgError::Parse {
            line: 0,
            message: format!("unsupported trailing token {extra:?}"),
        });
    }
    let query = SelectQuery { variables, patterns, order_by };
    let in_pattern: BTreeSet<&str> = query.patterns.iter().flat_map(|p| p.variables()).collect();
    for v in &query.variables {
        if !in_pattern.contains(v.as_str()) {
            return Err(KgError::UnboundProjection(v.clone()));
        }
    }
    Ok(query)
}

/// A conjunctive instance query: a class plus `property value individual`
/// constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct DlQuery {
    pub class: String,
    pub constraints: Vec<(String, String)>,
}

/// Parse the instance-query format: the class name, then
/// `and <property> value <individual>` lines.
pub fn parse_dl_query(text: &str) -> Result<DlQuery, KgError> {
    let joined: String = text
        .lines()
        .map(strip_comment)
        .collect::<Vec<_>>()
        .join(" ");
    let mut chunks = joined.split(" and ").map(str::trim).filter(|c| !c.is_empty());
    let class = chunks
        .next()
        .ok_or(KgError::Parse { line: 0, message: "empty instance query".into() })?
        .to_string();
    if class.contains(' ') {
        return Err(KgError::Parse {
            line: 0,
            message: format!("class name {class:?} must be a single identifier"),
        });
    }
    let mut constraints = Vec::new();
    for chunk in chunks {
        let parts: Vec<&str> = chunk.split_whitespace().collect();
        if parts.len() != 3 || parts[1] != "value" {
            return Err(KgError::Parse {
                line: 0,
                message: format!("expected `<property> value <individual>`, got {chunk:?}"),
            });
        }
        constraints.push((parts[0].to_string(), parts[2].to_string()));
    }
    Ok(DlQuery { class, constraints })
}

/// Parse a schema declaration file.
pub fn parse_schema(text: &str) -> Result<Schema, KgError> {
    let mut schema = Schema::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match (parts[0], parts.len()) {
            ("class", 2) => {
                schema.classes.insert(parts[1].to_string());
            }
            ("subclass", 3) => {
                schema.subclass_axioms.push((parts[1].to_string(), parts[2].to_string()));
            }
            ("objectproperty", 2) => {
                schema.object_properties.insert(parts[1].to_string());
            }
            ("dataproperty", 2) => {
                schema.data_properties.insert(parts[1].to_string());
            }
            ("individual", 2) => {
                schema.individuals.insert(parts[1].to_string());
            }
            ("individual", 3) => {
                schema.individuals.insert(parts[1].to_string());
                schema.class_assertions += 1;
            }
            _ => {
                return Err(KgError::Parse {
                    line: line_no,
                    message: format!("unrecognized declaration {line:?}"),
                })
            }
        }
    }
    Ok(schema)
}
