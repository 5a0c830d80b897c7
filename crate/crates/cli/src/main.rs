//! Command-line pipeline: preprocess, weights, assess, reason, query, eval,
//! and an end-to-end demo over the bundled sample data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use airq_core::evalkit::{
    self, classification_metrics, confusion_from_series, error_metrics, round2, sample_indices,
    ConfusionCounts, OrdinalSeries,
};
use airq_core::fahp::{
    self, compute_weights, ComparisonMatrix, Consistency, FahpError, WeightOptions, WeightVector,
};
use airq_core::inference::{
    Engine, EngineConfig, InferenceError, PollutantVector, PollutantWeights, WeightPolicy,
};
use airq_core::ingest::{self, load_csv, preprocess, validate_units, CleanRecord, ImputeScope};
use airq_core::it2::{Category, ParameterTable, Pollutant, Variable};
use airq_core::kgraph::{
    self, dl_membership, execute_query, materialize, observation_to_triples, ontology_counts,
    parse_dl_query, parse_query, parse_rules as parse_kg_rules, parse_schema, parse_triples,
    KgError, MaterializeOptions, Store, TripleProvenance,
};
use airq_core::rulebase::{generate_rules, parse_rules as parse_fuzzy_rules, RuleBase};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INFERENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "airq", version, about = "Uncertainty-aware air quality assessment pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a CSV export: drop unlabeled rows, impute missing values.
    Preprocess(PreprocessArgs),
    /// Derive pollutant weights from a pairwise comparison matrix.
    Weights(WeightsArgs),
    /// Assess observations: AQI interval, crisp AQI and category per row.
    Assess(AssessArgs),
    /// Materialize rule inferences over a triples file.
    Reason(ReasonArgs),
    /// Run a SELECT or instance query against a triples file.
    Query(QueryArgs),
    /// Count schema entities and report ontology quality scores.
    Counts(CountsArgs),
    /// Compare predicted categories against actual ones.
    Eval(EvalArgs),
    /// Run the whole pipeline on the bundled sample data.
    Demo(DemoArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input CSV (station, date, pollutant columns, AQI bucket).
    #[arg(long = "in")]
    input: PathBuf,
    /// Cleaned CSV destination.
    #[arg(long = "out")]
    output: PathBuf,
    /// Machine-readable stats destination (JSON).
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ImputeScopeArg::Global)]
    impute_scope: ImputeScopeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImputeScopeArg {
    Global,
    Station,
}

impl From<ImputeScopeArg> for ImputeScope {
    fn from(v: ImputeScopeArg) -> Self {
        match v {
            ImputeScopeArg::Global => ImputeScope::Global,
            ImputeScopeArg::Station => ImputeScope::Station,
        }
    }
}

#[derive(Args)]
struct WeightsArgs {
    /// Pairwise comparison matrix file; the bundled expert matrix by default.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Consistency ratio above which the matrix is rejected.
    #[arg(long, default_value_t = fahp::DEFAULT_CR_THRESHOLD)]
    cr_threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightPolicyArg {
    Driver,
    GlobalMax,
}

impl From<WeightPolicyArg> for WeightPolicy {
    fn from(v: WeightPolicyArg) -> Self {
        match v {
            WeightPolicyArg::Driver => WeightPolicy::Driver,
            WeightPolicyArg::GlobalMax => WeightPolicy::GlobalMax,
        }
    }
}

#[derive(Args)]
struct AssessArgs {
    /// Observation CSV; rows must carry all seven concentrations.
    #[arg(long = "in")]
    input: PathBuf,
    /// Per-row output CSV: aqi_l, aqi_r, aqi, category.
    #[arg(long = "out")]
    output: PathBuf,
    /// Membership parameter config; bundled defaults when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Pairwise comparison matrix for the pollutant weights.
    #[arg(long = "weights")]
    matrix: Option<PathBuf>,
    /// Rule file; a base generated from the observed ranges when omitted.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WeightPolicyArg::Driver)]
    weight_policy: WeightPolicyArg,
    /// Evaluate the most severe terms literally instead of saturating them.
    #[arg(long)]
    no_saturation: bool,
    #[arg(long, default_value_t = fahp::DEFAULT_CR_THRESHOLD)]
    cr_threshold: f64,
    /// Also write observation triples for the knowledge-graph layer.
    #[arg(long)]
    emit_triples: Option<PathBuf>,
    /// Dump the rule base that was used, in rule text format.
    #[arg(long)]
    dump_rules: Option<PathBuf>,
}

#[derive(Args)]
struct ReasonArgs {
    #[arg(long)]
    triples: PathBuf,
    #[arg(long)]
    rules: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    triples: PathBuf,
    /// Query file: SELECT syntax, or an instance query (class + `and
    /// <property> value <individual>` lines).
    #[arg(long)]
    query: PathBuf,
    /// Optional rule file to materialize before querying.
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct CountsArgs {
    #[arg(long)]
    schema: PathBuf,
    /// Optional triples whose individuals are counted as well.
    #[arg(long)]
    triples: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct EvalArgs {
    #[command(subcommand)]
    scores: Option<EvalSubcommand>,
    /// Predicted categories, one label per line.
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Actual categories, one label per line.
    #[arg(long)]
    actual: Option<PathBuf>,
    /// Evaluate a random sample of this size instead of the full series.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Most severe category still counted as healthy air.
    #[arg(long, default_value = "Satisfactory")]
    healthy_max: String,
    /// Machine-readable report destination.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EvalSubcommand {
    /// Ontology quality scores from entity counts.
    Scores(ScoresArgs),
}

#[derive(Args)]
struct ScoresArgs {
    /// JSON counts file as produced by `counts`; overridden by the flags.
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    subclass: Option<usize>,
    #[arg(long)]
    relations: Option<usize>,
    #[arg(long)]
    properties: Option<usize>,
    #[arg(long)]
    individuals: Option<usize>,
}

#[derive(Args)]
struct DemoArgs {
    /// Output directory for every artifact of the run.
    #[arg(long)]
    out: PathBuf,
    /// Seed for the sampled evaluation stage.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_DATA, message: message.into() }
    }

    fn inference(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_INFERENCE, message: message.into() }
    }
}

macro_rules! from_data_error {
    ($($ty:ty),*) => {
        $(impl From<$ty> for Failure {
            fn from(e: $ty) -> Failure {
                Failure::data(e.to_string())
            }
        })*
    };
}

from_data_error!(
    std::io::Error,
    airq_core::it2::It2Error,
    airq_core::ingest::IngestError,
    airq_core::rulebase::RuleError,
    airq_core::evalkit::EvalError,
    serde_json::Error
);

impl From<FahpError> for Failure {
    fn from(e: FahpError) -> Failure {
        match e {
            FahpError::Inconsistent { .. } => Failure::inference(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<InferenceError> for Failure {
    fn from(e: InferenceError) -> Failure {
        match e {
            InferenceError::ZeroFiring(_) | InferenceError::NoFiredRules => {
                Failure::inference(e.to_string())
            }
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<KgError> for Failure {
    fn from(e: KgError) -> Failure {
        match e {
            KgError::FixpointCap(_) => Failure::inference(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

/// Tracks files written by the current command so they can be removed when a
/// later step fails; a successful run disarms the guard.
struct OutputGuard {
    created: Vec<PathBuf>,
    armed: bool,
}

impl OutputGuard {
    fn new() -> OutputGuard {
        OutputGuard { created: Vec::new(), armed: true }
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<(), Failure> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(path, contents)?;
        self.created.push(path.to_path_buf());
        Ok(())
    }

    fn disarm(mut self) {
        self.armed = false;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.armed {
            for path in &self.created {
                let _ = fs::remove_file(path);
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; usage problems exit with 1
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::Weights(args) => cmd_weights(args),
        Command::Assess(args) => cmd_assess(args),
        Command::Reason(args) => cmd_reason(args),
        Command::Query(args) => cmd_query(args),
        Command::Counts(args) => cmd_counts(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Demo(args) => cmd_demo(args),
    }
}

fn load_params(path: &Option<PathBuf>) -> Result<ParameterTable, Failure> {
    match path {
        Some(p) => Ok(ParameterTable::parse(&fs::read_to_string(p)?)?),
        None => Ok(ParameterTable::default_table()),
    }
}

fn load_matrix(path: &Option<PathBuf>) -> Result<ComparisonMatrix, Failure> {
    match path {
        Some(p) => Ok(fahp::parse_matrix(&fs::read_to_string(p)?)?),
        None => Ok(ComparisonMatrix::default_matrix()),
    }
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<(), Failure> {
    let mut guard = OutputGuard::new();
    let loaded = load_csv(&args.input)?;
    for issue in &loaded.issues {
        eprintln!("warning: line {} column {}: {}", issue.line, issue.column, issue.message);
    }
    if !loaded.report.ignored.is_empty() {
        eprintln!("ignored columns: {}", loaded.report.ignored.join(", "));
    }
    let (clean, stats) = preprocess(&loaded.records, args.impute_scope.into())?;
    let table = ParameterTable::default_table();
    for w in validate_units(&clean, &table) {
        eprintln!(
            "warning: {} {}: {} = {} exceeds plausibility bound {}",
            w.station, w.date, w.pollutant, w.value, w.bound
        );
    }
    let mut csv_out = Vec::new();
    ingest::write_clean_csv(&clean, &mut csv_out)
        .map_err(|e| Failure::data(e.to_string()))?;
    guard.write(&args.output, &String::from_utf8_lossy(&csv_out))?;
    if let Some(stats_path) = &args.stats {
        guard.write(stats_path, &(serde_json::to_string_pretty(&stats)? + "\n"))?;
    }
    print!("{}", stats.render_text());
    guard.disarm();
    Ok(())
}

fn render_weights(w: &WeightVector, c: &Consistency) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "lambda_max = {:.6}  CI = {:.6}  CR = {:.6}",
        c.lambda_max, c.ci, c.cr
    );
    let _ = write!(out, "{w}");
    out
}

fn cmd_weights(args: WeightsArgs) -> Result<(), Failure> {
    let matrix = load_matrix(&args.matrix)?;
    let (weights, consistency) =
        compute_weights(&matrix, &WeightOptions { cr_threshold: args.cr_threshold })?;
    print!("{}", render_weights(&weights, &consistency));
    Ok(())
}

/// Rows that carry every concentration, rejecting incomplete ones.
fn complete_records(loaded: &ingest::LoadResult) -> Result<Vec<CleanRecord>, Failure> {
    let mut records = Vec::with_capacity(loaded.records.len());
    for (i, raw) in loaded.records.iter().enumerate() {
        let mut conc = [0.0; 7];
        for p in Pollutant::ALL {
            conc[p.index()] = raw.concentrations[p.index()].ok_or_else(|| {
                Failure::data(format!(
                    "row {}: missing {} value; run `preprocess` first",
                    i + 1,
                    p.name()
                ))
            })?;
        }
        records.push(CleanRecord {
            station: raw.station.clone(),
            date: raw.date.clone(),
            concentrations: conc,
            aqi: raw.aqi,
            bucket: raw.bucket.unwrap_or(Category::Good),
        });
    }
    Ok(records)
}

struct AssessedBatch {
    csv: String,
    triples: Store,
    categories: Vec<Category>,
}

fn assess_batch(
    records: &[CleanRecord],
    table: &ParameterTable,
    rulebase: &RuleBase,
    weights: PollutantWeights,
    config: EngineConfig,
) -> Result<AssessedBatch, Failure> {
    let engine = Engine::new(table, rulebase, weights, config)?;
    let mut csv = String::from("station,date,aqi_l,aqi_r,aqi,category\n");
    let mut store = Store::new();
    let mut categories = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        let x = PollutantVector(record.concentrations);
        let (reduced, category) = engine.assess(&x).map_err(|e| {
            let f: Failure = e.into();
            Failure { code: f.code, message: format!("row {}: {}", i + 1, f.message) }
        })?;
        let _ = writeln!(
            csv,
            "{},{},{:.4},{:.4},{:.4},{}",
            record.station, record.date, reduced.aqi_l, reduced.aqi_r, reduced.aqi, category
        );
        let mut pollutant_categories = [Category::Good; 7];
        for p in Pollutant::ALL {
            pollutant_categories[p.index()] =
                airq_core::inference::categorize_value(Variable::Pollutant(p), record.get(p), table);
        }
        for t in observation_to_triples(record, &reduced, category, &pollutant_categories, i + 1) {
            store.assert_triple(t);
        }
        categories.push(category);
    }
    Ok(AssessedBatch { csv, triples: store, categories })
}

fn cmd_assess(args: AssessArgs) -> Result<(), Failure> {
    let mut guard = OutputGuard::new();
    let table = load_params(&args.params)?;
    let matrix = load_matrix(&args.matrix)?;
    let (weight_vector, _) =
        compute_weights(&matrix, &WeightOptions { cr_threshold: args.cr_threshold })?;
    let weights = PollutantWeights::from_weight_vector(&weight_vector)?;

    let loaded = load_csv(&args.input)?;
    let records = complete_records(&loaded)?;
    if records.is_empty() {
        return Err(Failure::data("no observations in the input"));
    }
    let rulebase = match &args.rules {
        Some(path) => parse_fuzzy_rules(&fs::read_to_string(path)?)?,
        None => {
            let ranges = ingest::observed_ranges(&records)
                .ok_or_else(|| Failure::data("cannot derive ranges from an empty input"))?;
            generate_rules(&ranges, &table)?
        }
    };
    let config = EngineConfig {
        weight_policy: args.weight_policy.into(),
        saturate_top_term: !args.no_saturation,
        ..EngineConfig::default()
    };
    let batch = assess_batch(&records, &table, &rulebase, weights, config)?;
    guard.write(&args.output, &batch.csv)?;
    if let Some(path) = &args.emit_triples {
        guard.write(path, &batch.triples.render())?;
    }
    if let Some(path) = &args.dump_rules {
        guard.write(path, &rulebase.to_dsl())?;
    }
    println!("assessed {} observations with {} rules", records.len(), rulebase.len());
    guard.disarm();
    Ok(())
}

fn cmd_reason(args: ReasonArgs) -> Result<(), Failure> {
    let mut guard = OutputGuard::new();
    let mut store = parse_triples(&fs::read_to_string(&args.triples)?)?;
    let rules = parse_kg_rules(&fs::read_to_string(&args.rules)?)?;
    let asserted = store.len();
    let report = materialize(&mut store, &rules, MaterializeOptions::default())?;
    guard.write(&args.out, &store.render())?;
    println!(
        "asserted {} triples, inferred {} in {} rounds",
        asserted, report.inferred, report.rounds
    );
    guard.disarm();
    Ok(())
}

fn run_query_text(store: &Store, text: &str) -> Result<String, Failure> {
    let head = text.trim_start().to_ascii_uppercase();
    if head.starts_with("PREFIX") || head.starts_with("SELECT") {
        let query = parse_query(text)?;
        Ok(execute_query(store, &query).render_table())
    } else {
        let query = parse_dl_query(text)?;
        let hits = dl_membership(store, &query);
        let mut out = String::from("individual\n");
        for iri in hits {
            let _ = writeln!(out, "{iri}");
        }
        Ok(out)
    }
}

fn cmd_query(args: QueryArgs) -> Result<(), Failure> {
    let mut store = parse_triples(&fs::read_to_string(&args.triples)?)?;
    if let Some(rules_path) = &args.rules {
        let rules = parse_kg_rules(&fs::read_to_string(rules_path)?)?;
        materialize(&mut store, &rules, MaterializeOptions::default())?;
    }
    let text = fs::read_to_string(&args.query)?;
    print!("{}", run_query_text(&store, &text)?);
    Ok(())
}

fn render_counts(counts: &kgraph::OntologyCounts) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "classes            {}", counts.classes);
    let _ = writeln!(out, "object properties  {}", counts.object_properties);
    let _ = writeln!(out, "data properties    {}", counts.data_properties);
    let _ = writeln!(out, "individuals        {}", counts.individuals);
    let _ = writeln!(out, "subclass axioms    {}", counts.subclass_axioms);
    let _ = writeln!(out, "logical axioms     {}", counts.logical_axioms);
    match evalkit::score_om(
        counts.classes,
        counts.subclass_axioms,
        counts.object_properties,
        counts.data_properties,
    ) {
        Ok(s) => {
            let _ = writeln!(out, "score_om           {:.2}", round2(s));
        }
        Err(e) => {
            let _ = writeln!(out, "score_om           undefined ({e})");
        }
    }
    match evalkit::score_kb(counts.classes, counts.individuals) {
        Ok(s) => {
            let _ = writeln!(out, "score_kb           {:.2}", round2(s));
        }
        Err(e) => {
            let _ = writeln!(out, "score_kb           undefined ({e})");
        }
    }
    out
}

fn cmd_counts(args: CountsArgs) -> Result<(), Failure> {
    let schema = parse_schema(&fs::read_to_string(&args.schema)?)?;
    let store = match &args.triples {
        Some(path) => Some(parse_triples(&fs::read_to_string(path)?)?),
        None => None,
    };
    let counts = ontology_counts(store.as_ref(), &schema);
    print!("{}", render_counts(&counts));
    println!("{}", serde_json::to_string(&counts)?);
    Ok(())
}

fn parse_labels(path: &Path) -> Result<Vec<Category>, Failure> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cat: Category = line
            .parse()
            .map_err(|e| Failure::data(format!("{} line {}: {e}", path.display(), i + 1)))?;
        labels.push(cat);
    }
    Ok(labels)
}

#[derive(serde::Serialize)]
struct MetricsReport {
    n: usize,
    category_accuracy: f64,
    mae: f64,
    rmse: f64,
    healthy_max: String,
    confusion: ConfusionCounts,
    precision: Option<f64>,
    accuracy: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
}

fn build_metrics(
    actual: &[Category],
    predicted: &[Category],
    healthy_max: Category,
) -> Result<MetricsReport, Failure> {
    let series = OrdinalSeries::new(actual, predicted)?;
    let (mae, rmse) = error_metrics(&series)?;
    let confusion = confusion_from_series(&series, healthy_max);
    let metrics = classification_metrics(&confusion)?;
    Ok(MetricsReport {
        n: series.len(),
        category_accuracy: series.category_accuracy()?,
        mae,
        rmse,
        healthy_max: healthy_max.to_string(),
        confusion,
        precision: metrics.precision,
        accuracy: metrics.accuracy,
        recall: metrics.recall,
        f1: metrics.f1,
    })
}

fn render_metrics(report: &MetricsReport) -> String {
    let pct = |v: Option<f64>| match v {
        Some(v) => format!("{:.2}%", v * 100.0),
        None => "undefined".to_string(),
    };
    let mut out = String::new();
    let _ = writeln!(out, "samples            {}", report.n);
    let _ = writeln!(out, "category accuracy  {:.2}%", report.category_accuracy * 100.0);
    let _ = writeln!(out, "MAE                {:.3}", report.mae);
    let _ = writeln!(out, "RMSE               {:.3}", report.rmse);
    let _ = writeln!(out, "healthy boundary   <= {}", report.healthy_max);
    let c = &report.confusion;
    let _ = writeln!(
        out,
        "confusion          tp={} fp={} tn={} fn={}",
        c.true_pos, c.false_pos, c.true_neg, c.false_neg
    );
    let _ = writeln!(out, "precision          {}", pct(report.precision));
    let _ = writeln!(out, "accuracy           {}", pct(report.accuracy));
    let _ = writeln!(out, "recall             {}", pct(report.recall));
    let _ = writeln!(out, "F1                 {}", pct(report.f1));
    out
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    if let Some(EvalSubcommand::Scores(scores)) = args.scores {
        return cmd_eval_scores(scores);
    }
    let (Some(pred_path), Some(actual_path)) = (&args.pred, &args.actual) else {
        return Err(Failure {
            code: EXIT_USAGE,
            message: "eval requires --pred and --actual (or the `scores` subcommand)".into(),
        });
    };
    let mut guard = OutputGuard::new();
    let predicted = parse_labels(pred_path)?;
    let actual = parse_labels(actual_path)?;
    if predicted.len() != actual.len() {
        return Err(Failure::data(format!(
            "--pred has {} labels but --actual has {}",
            predicted.len(),
            actual.len()
        )));
    }
    let healthy_max: Category =
        args.healthy_max.parse().map_err(|e| Failure::data(format!("--healthy-max: {e}")))?;
    let (actual, predicted) = match args.sample {
        Some(0) => return Err(Failure::data("--sample must be positive")),
        Some(n) => {
            let idx = sample_indices(actual.len(), n, args.seed);
            (
                idx.iter().map(|&i| actual[i]).collect::<Vec<_>>(),
                idx.iter().map(|&i| predicted[i]).collect::<Vec<_>>(),
            )
        }
        None => (actual, predicted),
    };
    let report = build_metrics(&actual, &predicted, healthy_max)?;
    print!("{}", render_metrics(&report));
    if let Some(path) = &args.json {
        guard.write(path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    guard.disarm();
    Ok(())
}

fn cmd_eval_scores(args: ScoresArgs) -> Result<(), Failure> {
    let base: Option<kgraph::OntologyCounts> = match &args.counts {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            // accept either the bare JSON object or the last JSON line of
            // `counts` output
            let line = text
                .lines()
                .rev()
                .find(|l| l.trim_start().starts_with('{'))
                .ok_or_else(|| Failure::data("no JSON object found in counts file"))?;
            Some(serde_json::from_str(line)?)
        }
        None => None,
    };
    let pick = |flag: Option<usize>, from_file: Option<usize>, name: &str| {
        flag.or(from_file).ok_or_else(|| Failure::data(format!("missing --{name}")))
    };
    let classes = pick(args.classes, base.map(|b| b.classes), "classes")?;
    let subclass = pick(args.subclass, base.map(|b| b.subclass_axioms), "subclass")?;
    let relations = pick(args.relations, base.map(|b| b.object_properties), "relations")?;
    let properties = pick(args.properties, base.map(|b| b.data_properties), "properties")?;
    let individuals = pick(args.individuals, base.map(|b| b.individuals), "individuals")?;
    let om = evalkit::score_om(classes, subclass, relations, properties)?;
    let kb = evalkit::score_kb(classes, individuals)?;
    println!("score_om {:.2}", round2(om));
    println!("score_kb {:.2}", round2(kb));
    Ok(())
}

fn cmd_demo(args: DemoArgs) -> Result<(), Failure> {
    let mut guard = OutputGuard::new();
    let out = &args.out;
    fs::create_dir_all(out)?;

    // bundled inputs, exported so every stage can be rerun in isolation
    let fixtures = out.join("fixtures");
    let table = ParameterTable::default_table();
    guard.write(&fixtures.join("params.toml"), &table.to_toml_string())?;
    guard.write(&fixtures.join("matrix.txt"), fahp::DEFAULT_MATRIX_TEXT)?;
    guard.write(&fixtures.join("sample.csv"), ingest::DEMO_SAMPLE_CSV)?;
    guard.write(&fixtures.join("kb.nt"), kgraph::DEMO_KB)?;
    guard.write(&fixtures.join("rules.txt"), kgraph::DEMO_RULES)?;
    guard.write(&fixtures.join("schema.txt"), kgraph::DEMO_SCHEMA)?;
    guard.write(&fixtures.join("query1.rq"), kgraph::QUERY_1)?;
    guard.write(&fixtures.join("query2.rq"), kgraph::QUERY_2)?;
    guard.write(&fixtures.join("query3.dl"), kgraph::QUERY_3)?;

    let mut transcript = String::new();

    // 1. preprocess the bundled sample
    let loaded = ingest::load_csv_str(ingest::DEMO_SAMPLE_CSV)?;
    let (clean, stats) = preprocess(&loaded.records, ImputeScope::Global)?;
    let mut csv_out = Vec::new();
    ingest::write_clean_csv(&clean, &mut csv_out).map_err(|e| Failure::data(e.to_string()))?;
    guard.write(&out.join("cleaned.csv"), &String::from_utf8_lossy(&csv_out))?;
    guard.write(&out.join("stats.json"), &(serde_json::to_string_pretty(&stats)? + "\n"))?;
    let _ = writeln!(transcript, "== preprocess ==");
    transcript.push_str(&stats.render_text());
    let warnings = validate_units(&clean, &table);
    let _ = writeln!(transcript, "unit warnings: {}", warnings.len());

    // 2. pollutant weights from the bundled expert matrix
    let matrix = ComparisonMatrix::default_matrix();
    let (weight_vector, consistency) = compute_weights(&matrix, &WeightOptions::default())?;
    let weights_text = render_weights(&weight_vector, &consistency);
    guard.write(&out.join("weights.txt"), &weights_text)?;
    let _ = writeln!(transcript, "\n== weights ==");
    transcript.push_str(&weights_text);

    // 3. assess every cleaned row with a rule base generated from the
    //    observed ranges
    let ranges = ingest::observed_ranges(&clean)
        .ok_or_else(|| Failure::data("empty cleaned sample"))?;
    let rulebase = generate_rules(&ranges, &table)?;
    let weights = PollutantWeights::from_weight_vector(&weight_vector)?;
    let batch = assess_batch(&clean, &table, &rulebase, weights, EngineConfig::default())?;
    guard.write(&out.join("assessments.csv"), &batch.csv)?;
    let _ = writeln!(transcript, "\n== assess ==");
    let _ = writeln!(
        transcript,
        "assessed {} observations with {} generated rules",
        clean.len(),
        rulebase.len()
    );

    // 4. emit observation triples and materialize the rule layer over them
    let rules = parse_kg_rules(kgraph::DEMO_RULES)?;
    let mut pipeline_store = batch.triples.clone();
    guard.write(&out.join("observations.nt"), &pipeline_store.render())?;
    let report = materialize(&mut pipeline_store, &rules, MaterializeOptions::default())?;
    guard.write(&out.join("observations_inferred.nt"), &pipeline_store.render())?;
    let _ = writeln!(transcript, "\n== reason (pipeline observations) ==");
    let _ = writeln!(
        transcript,
        "asserted {} triples, inferred {} in {} rounds",
        pipeline_store.len() - pipeline_store.inferred_count(),
        report.inferred,
        report.rounds
    );
    let severe_chain = pipeline_store
        .entries()
        .filter(|(t, p)| {
            matches!(p, TripleProvenance::Inferred { .. })
                && t.predicate == kgraph::Iri::aq("hasRecommendedAction")
        })
        .count();
    let _ = writeln!(transcript, "recommended actions inferred: {severe_chain}");

    // 5. materialize the curated knowledge base and run the three queries
    let mut kb = parse_triples(kgraph::DEMO_KB)?;
    let kb_report = materialize(&mut kb, &rules, MaterializeOptions::default())?;
    guard.write(&out.join("kb_inferred.nt"), &kb.render())?;
    let _ = writeln!(transcript, "\n== reason (curated knowledge base) ==");
    let _ = writeln!(
        transcript,
        "asserted {} triples, inferred {} in {} rounds",
        kb.len() - kb.inferred_count(),
        kb_report.inferred,
        kb_report.rounds
    );
    for (name, text) in [("query1", kgraph::QUERY_1), ("query2", kgraph::QUERY_2), ("query3", kgraph::QUERY_3)] {
        let rendered = run_query_text(&kb, text)?;
        guard.write(&out.join(format!("{name}.txt")), &rendered)?;
        let _ = writeln!(transcript, "\n-- {name} --");
        transcript.push_str(&rendered);
    }

    // 6. schema counts and quality scores
    let schema = parse_schema(kgraph::DEMO_SCHEMA)?;
    let counts = ontology_counts(Some(&kb), &schema);
    let counts_text = render_counts(&counts);
    guard.write(&out.join("counts.txt"), &counts_text)?;
    let _ = writeln!(transcript, "\n== counts ==");
    transcript.push_str(&counts_text);

    // 7. sampled evaluation of predictions against the recorded buckets
    let actual: Vec<Category> = clean.iter().map(|r| r.bucket).collect();
    let report = build_metrics(&actual, &batch.categories, Category::Satisfactory)?;
    let idx = sample_indices(actual.len(), 58, args.seed);
    let sample_actual: Vec<Category> = idx.iter().map(|&i| actual[i]).collect();
    let sample_predicted: Vec<Category> = idx.iter().map(|&i| batch.categories[i]).collect();
    let sampled = build_metrics(&sample_actual, &sample_predicted, Category::Satisfactory)?;
    guard.write(&out.join("metrics.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    let _ = writeln!(transcript, "\n== eval (all {} rows) ==", report.n);
    transcript.push_str(&render_metrics(&report));
    let _ = writeln!(transcript, "\n== eval (58-row sample, seed {}) ==", args.seed);
    transcript.push_str(&render_metrics(&sampled));

    guard.write(&out.join("transcript.txt"), &transcript)?;
    print!("{transcript}");
    guard.disarm();
    Ok(())
}
