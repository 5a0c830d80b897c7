//! Weighted interval type-2 Mamdani inference: fuzzification, rule firing,
//! weighted firing, Karnik-Mendel type reduction, and category assignment.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fahp::WeightVector;
use crate::it2::{Category, It2Error, It2Set, MembershipInterval, ParameterTable, Pollutant, Variable};
use crate::rulebase::RuleBase;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error(transparent)]
    It2(#[from] It2Error),
    #[error("weight vector has no entry for {0}")]
    MissingWeight(Pollutant),
    #[error("consequent set has empty support on the sampling grid")]
    EmptySupport,
    #[error("no rule fires for input ({0})")]
    ZeroFiring(String),
    #[error("type reduction needs at least one rule with positive upper firing")]
    NoFiredRules,
}

/// One observation: a concentration per pollutant, indexed by
/// [`Pollutant::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PollutantVector(pub [f64; 7]);

impl PollutantVector {
    pub fn get(&self, p: Pollutant) -> f64 {
        self.0[p.index()]
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        for (p, v) in Pollutant::ALL.into_iter().zip(self.0) {
            if !v.is_finite() || v < 0.0 {
                return Err(It2Error::BadInput(v).into());
            }
            let _ = p;
        }
        Ok(())
    }

    fn describe(&self) -> String {
        Pollutant::ALL
            .into_iter()
            .map(|p| format!("{}={}", p, self.get(p)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Activation strength of a rule, as an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiringInterval {
    pub lo: f64,
    pub hi: f64,
}

impl FiringInterval {
    pub fn scaled(self, w: f64) -> FiringInterval {
        FiringInterval { lo: w * self.lo, hi: w * self.hi }
    }
}

/// Left and right centroid of an interval type-2 consequent set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsequentCentroid {
    pub cl: f64,
    pub cr: f64,
}

/// Type-reduced output interval and the crisp value at its midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeReducedInterval {
    pub aqi_l: f64,
    pub aqi_r: f64,
    pub aqi: f64,
}

/// Which pollutant weight scales a rule's firing interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightPolicy {
    /// Highest weight among the rule's driver pollutants (antecedent term
    /// equal to the consequent); falls back to the global maximum when no
    /// driver exists.
    #[default]
    Driver,
    /// Always the highest weight overall.
    GlobalMax,
}

#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    pub weight_policy: WeightPolicy,
    /// Treat the most severe term of each input variable as a right shoulder,
    /// so concentrations beyond the modeled range keep full membership
    /// instead of dropping to zero.
    pub saturate_top_term: bool,
    /// Grid resolution for consequent centroid computation.
    pub centroid_grid: usize,
    /// Sampling domain for the output variable.
    pub centroid_domain: (f64, f64),
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            weight_policy: WeightPolicy::Driver,
            saturate_top_term: true,
            centroid_grid: 2001,
            centroid_domain: (0.0, 600.0),
        }
    }
}

/// Crisp pollutant weights in pollutant order.
#[derive(Debug, Clone, Copy)]
pub struct PollutantWeights(pub [f64; 7]);

impl PollutantWeights {
    pub fn from_weight_vector(w: &WeightVector) -> Result<PollutantWeights, InferenceError> {
        let mut out = [0.0; 7];
        for p in Pollutant::ALL {
            out[p.index()] =
                w.get(p.name()).ok_or(InferenceError::MissingWeight(p))?;
        }
        Ok(PollutantWeights(out))
    }

    pub fn get(&self, p: Pollutant) -> f64 {
        self.0[p.index()]
    }

    pub fn max(&self) -> f64 {
        self.0.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Membership intervals of one input value over every term of its variable.
pub type Fuzzified = BTreeMap<Pollutant, BTreeMap<Category, MembershipInterval>>;

/// Step 1: membership intervals of each pollutant concentration.
///
/// With `saturate_top_term`, the most severe term of each variable keeps full
/// membership past its plateau instead of following the falling shoulder.
pub fn fuzzify(
    x: &PollutantVector,
    table: &ParameterTable,
    saturate_top_term: bool,
) -> Result<Fuzzified, InferenceError> {
    x.validate()?;
    let mut out = Fuzzified::new();
    for p in Pollutant::ALL {
        let variable = Variable::Pollutant(p);
        let top = table.top_term(variable);
        let mut terms = BTreeMap::new();
        for (term, set) in table.terms(variable) {
            let value = x.get(p);
            let m = if saturate_top_term && Some(*term) == top {
                set.membership(value)?; // keep the domain guard
                MembershipInterval {
                    lo: set.lmf.eval_right_shoulder(value),
                    hi: set.umf.eval_right_shoulder(value),
                }
            } else {
                set.membership(value)?
            };
            terms.insert(*term, m);
        }
        out.insert(p, terms);
    }
    Ok(out)
}

/// Step 2: minimum t-norm across the seven antecedent membership intervals.
pub fn firing_interval(
    rule: &crate::rulebase::FuzzyRule,
    fuzzified: &Fuzzified,
) -> FiringInterval {
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    for p in Pollutant::ALL {
        let m = fuzzified
            .get(&p)
            .and_then(|terms| terms.get(&rule.term(p)))
            .copied()
            .unwrap_or(MembershipInterval { lo: 0.0, hi: 0.0 });
        lo = lo.min(m.lo);
        hi = hi.min(m.hi);
    }
    FiringInterval { lo, hi }
}

/// Step 3: scale the firing interval by the rule's pollutant weight.
pub fn weighted_firing(
    rule: &crate::rulebase::FuzzyRule,
    firing: FiringInterval,
    weights: &PollutantWeights,
    policy: WeightPolicy,
) -> FiringInterval {
    let w = rule_weight(rule, weights, policy);
    firing.scaled(w)
}

pub fn rule_weight(
    rule: &crate::rulebase::FuzzyRule,
    weights: &PollutantWeights,
    policy: WeightPolicy,
) -> f64 {
    match policy {
        WeightPolicy::GlobalMax => weights.max(),
        WeightPolicy::Driver => {
            let best = rule.drivers().map(|p| weights.get(p)).fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                best
            } else {
                weights.max()
            }
        }
    }
}

/// Karnik-Mendel centroid of a consequent set, sampled on a uniform grid and
/// resolved by exhaustive embedded-set switch search.
pub fn consequent_centroid(
    set: &It2Set,
    grid: usize,
    domain: (f64, f64),
) -> Result<ConsequentCentroid, InferenceError> {
    assert!(grid >= 2, "centroid grid needs at least two points");
    let (lo, hi) = domain;
    let steps = (grid - 1) as f64;
    let mut xs = Vec::with_capacity(grid);
    let mut upper = Vec::with_capacity(grid);
    let mut lower = Vec::with_capacity(grid);
    for i in 0..grid {
        let x = lo + (hi - lo) * i as f64 / steps;
        xs.push(x);
        upper.push(set.umf.eval(x));
        lower.push(set.lmf.eval(x));
    }
    if upper.iter().sum::<f64>() <= 0.0 {
        return Err(InferenceError::EmptySupport);
    }
    // prefix sums over x*mu and mu for both membership functions
    let mut pu_x = vec![0.0; grid + 1];
    let mut pu = vec![0.0; grid + 1];
    let mut pl_x = vec![0.0; grid + 1];
    let mut pl = vec![0.0; grid + 1];
    for i in 0..grid {
        pu_x[i + 1] = pu_x[i] + xs[i] * upper[i];
        pu[i + 1] = pu[i] + upper[i];
        pl_x[i + 1] = pl_x[i] + xs[i] * lower[i];
        pl[i + 1] = pl[i] + lower[i];
    }
    let mut cl = f64::INFINITY;
    let mut cr = f64::NEG_INFINITY;
    for k in 0..=grid {
        // left: upper membership below the switch, lower above
        let num = pu_x[k] + (pl_x[grid] - pl_x[k]);
        let den = pu[k] + (pl[grid] - pl[k]);
        if den > 0.0 {
            cl = cl.min(num / den);
        }
        // right: lower membership below the switch, upper above
        let num = pl_x[k] + (pu_x[grid] - pu_x[k]);
        let den = pl[k] + (pu[grid] - pu[k]);
        if den > 0.0 {
            cr = cr.max(num / den);
        }
    }
    Ok(ConsequentCentroid { cl, cr })
}

/// Step 4 and 5: Karnik-Mendel type reduction over the fired rules, then the
/// crisp value as the interval midpoint.
///
/// Rules with zero upper firing are ignored; at least one rule must have
/// positive upper firing.
pub fn km_type_reduce(
    rules: &[(FiringInterval, ConsequentCentroid)],
) -> Result<TypeReducedInterval, InferenceError> {
    let fired: Vec<&(FiringInterval, ConsequentCentroid)> =
        rules.iter().filter(|(f, _)| f.hi > 0.0).collect();
    if fired.is_empty() {
        return Err(InferenceError::NoFiredRules);
    }
    let (aqi_l, aqi_r) = if fired.len() == 1 {
        let (_, c) = fired[0];
        (c.cl, c.cr)
    } else {
        let left = km_endpoint(&fired, Side::Left);
        let right = km_endpoint(&fired, Side::Right);
        (left, right)
    };
    Ok(TypeReducedInterval { aqi_l, aqi_r, aqi: (aqi_l + aqi_r) / 2.0 })
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
}

/// Iterative Karnik-Mendel endpoint computation.
///
/// Centroids are sorted ascending; the switch point moves monotonically, so
/// the loop terminates within the number of rules.
fn km_endpoint(fired: &[&(FiringInterval, ConsequentCentroid)], side: Side) -> f64 {
    let mut items: Vec<(f64, f64, f64)> = fired
        .iter()
        .map(|(f, c)| {
            let centroid = match side {
                Side::Left => c.cl,
                Side::Right => c.cr,
            };
            (centroid, f.lo, f.hi)
        })
        .collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("centroids are finite"));

    let n = items.len();
    // initial estimate from the mean firing strengths
    let mut num = 0.0;
    let mut den = 0.0;
    for &(c, lo, hi) in &items {
        let f = 0.5 * (lo + hi);
        num += f * c;
        den += f;
    }
    let mut y = num / den;
    let mut prev_k = usize::MAX;
    for _ in 0..=n {
        let k = items.partition_point(|&(c, _, _)| c <= y).max(1);
        if k == prev_k {
            break;
        }
        prev_k = k;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &(c, lo, hi)) in items.iter().enumerate() {
            let f = match side {
                Side::Left => {
                    if i < k {
                        hi
                    } else {
                        lo
                    }
                }
                Side::Right => {
                    if i < k {
                        lo
                    } else {
                        hi
                    }
                }
            };
            num += f * c;
            den += f;
        }
        if den <= 0.0 {
            break;
        }
        y = num / den;
    }
    y
}

/// A prepared assessment pipeline: rule lookup index, per-rule weights, and
/// precomputed consequent centroids. Immutable once built, so assessments may
/// run concurrently.
pub struct Engine<'a> {
    table: &'a ParameterTable,
    rulebase: &'a RuleBase,
    weights: PollutantWeights,
    config: EngineConfig,
    centroids: BTreeMap<Category, ConsequentCentroid>,
}

impl<'a> Engine<'a> {
    pub fn new(
        table: &'a ParameterTable,
        rulebase: &'a RuleBase,
        weights: PollutantWeights,
        config: EngineConfig,
    ) -> Result<Engine<'a>, InferenceError> {
        let mut centroids = BTreeMap::new();
        for (term, set) in table.terms(Variable::Aqi) {
            centroids
                .insert(*term, consequent_centroid(set, config.centroid_grid, config.centroid_domain)?);
        }
        Ok(Engine { table, rulebase, weights, config, centroids })
    }

    pub fn centroid(&self, term: Category) -> ConsequentCentroid {
        self.centroids[&term]
    }

    /// Full pipeline for one observation.
    pub fn assess(&self, x: &PollutantVector) -> Result<(TypeReducedInterval, Category), InferenceError> {
        let fuzzified = fuzzify(x, self.table, self.config.saturate_top_term)?;
        // Per pollutant, the terms with positive upper membership; only
        // combinations of these can fire, so the rule lookup walks the
        // product of active terms instead of the whole base.
        let mut active: Vec<Vec<Category>> = Vec::with_capacity(7);
        for p in Pollutant::ALL {
            let acts: Vec<Category> = fuzzified[&p]
                .iter()
                .filter(|(_, m)| m.hi > 0.0)
                .map(|(t, _)| *t)
                .collect();
            if acts.is_empty() {
                return Err(InferenceError::ZeroFiring(x.describe()));
            }
            active.push(acts);
        }
        let mut fired: Vec<(FiringInterval, ConsequentCentroid)> = Vec::new();
        let mut cursor = [0usize; 7];
        'combos: loop {
            let mut antecedent = [Category::Good; 7];
            for i in 0..7 {
                antecedent[i] = active[i][cursor[i]];
            }
            if let Some(rule) = self.rulebase.find(&antecedent) {
                let f = firing_interval(rule, &fuzzified);
                if f.hi > 0.0 {
                    let w = weighted_firing(rule, f, &self.weights, self.config.weight_policy);
                    fired.push((w, self.centroids[&rule.consequent]));
                }
            }
            let mut i = 7;
            loop {
                if i == 0 {
                    break 'combos;
                }
                i -= 1;
                cursor[i] += 1;
                if cursor[i] < active[i].len() {
                    break;
                }
                cursor[i] = 0;
            }
        }
        if fired.is_empty() {
            return Err(InferenceError::ZeroFiring(x.describe()));
        }
        let reduced = km_type_reduce(&fired)?;
        let category = categorize(reduced.aqi, self.table);
        Ok((reduced, category))
    }
}

/// One-shot assessment; builds a throwaway [`Engine`].
pub fn assess(
    x: &PollutantVector,
    rulebase: &RuleBase,
    weights: PollutantWeights,
    table: &ParameterTable,
    config: EngineConfig,
) -> Result<(TypeReducedInterval, Category), InferenceError> {
    Engine::new(table, rulebase, weights, config)?.assess(x)
}

/// Map a crisp AQI value to the term with the highest upper membership;
/// ties break toward the more severe term, and values beyond every support
/// resolve to the most severe term.
pub fn categorize(aqi: f64, table: &ParameterTable) -> Category {
    categorize_value(Variable::Aqi, aqi, table)
}

/// Same argmax rule for any variable; used to tag per-pollutant categories.
pub fn categorize_value(variable: Variable, value: f64, table: &ParameterTable) -> Category {
    let mut best = f64::NEG_INFINITY;
    let mut chosen = Category::Severe;
    for (term, set) in table.terms(variable) {
        let m = set.umf.eval(value);
        if m >= best {
            best = m;
            chosen = *term;
        }
    }
    chosen
}
