//! Interval type-2 trapezoidal fuzzy sets: membership evaluation and the
//! parameter table mapping each (variable, linguistic term) to a set.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of grid points used to check footprint-of-uncertainty containment
/// when a parameter table is loaded.
const LOAD_VALIDATION_GRID: usize = 1001;

#[derive(Debug, Error)]
pub enum It2Error {
    #[error("trapezoid parameters must satisfy a <= b <= c <= d, got ({a}, {b}, {c}, {d})")]
    BadOrdering { a: f64, b: f64, c: f64, d: f64 },
    #[error("trapezoid height must be in (0, 1], got {0}")]
    BadHeight(f64),
    #[error("trapezoid parameters must be finite")]
    NonFinite,
    #[error("{variable}/{term}: lower membership height {lower} exceeds upper height {upper}")]
    HeightInversion { variable: String, term: String, lower: f64, upper: f64 },
    #[error("{variable}/{term}: lower support [{la}, {ld}] is not contained in upper support [{ua}, {ud}]")]
    SupportNotContained { variable: String, term: String, la: f64, ld: f64, ua: f64, ud: f64 },
    #[error("{variable}/{term}: LMF({x}) = {lower} exceeds UMF({x}) = {upper}")]
    FouViolation { variable: String, term: String, x: f64, lower: f64, upper: f64 },
    #[error("concentration must be finite and non-negative, got {0}")]
    BadInput(f64),
    #[error("unknown variable name {0:?}")]
    UnknownVariable(String),
    #[error("unknown linguistic term {0:?}")]
    UnknownTerm(String),
    #[error("duplicate entry for ({variable}, {term})")]
    DuplicateEntry { variable: String, term: String },
    #[error("variable {0} declares no terms")]
    EmptyVariable(String),
    #[error("AQI must declare all six terms, {0} is missing")]
    MissingAqiTerm(Category),
    #[error("no entry for ({variable}, {term})")]
    MissingEntry { variable: String, term: Category },
    #[error("parameter config: {0}")]
    Parse(String),
}

/// The six linguistic levels shared by every pollutant variable and the AQI
/// output, ordered from least to most severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Good,
    Satisfactory,
    Moderate,
    Poor,
    VeryPoor,
    Severe,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Good,
        Category::Satisfactory,
        Category::Moderate,
        Category::Poor,
        Category::VeryPoor,
        Category::Severe,
    ];

    /// Ordinal severity code, 0 (Good) through 5 (Severe).
    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Category> {
        Category::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Good => "Good",
            Category::Satisfactory => "Satisfactory",
            Category::Moderate => "Moderate",
            Category::Poor => "Poor",
            Category::VeryPoor => "VeryPoor",
            Category::Severe => "Severe",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = It2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace() && *c != '_').collect();
        match compact.to_ascii_lowercase().as_str() {
            "good" => Ok(Category::Good),
            "satisfactory" => Ok(Category::Satisfactory),
            "moderate" => Ok(Category::Moderate),
            "poor" => Ok(Category::Poor),
            "verypoor" => Ok(Category::VeryPoor),
            "severe" => Ok(Category::Severe),
            _ => Err(It2Error::UnknownTerm(s.to_string())),
        }
    }
}

/// The seven CPCB pollutants, in priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pollutant {
    Pm25,
    Pm10,
    Co,
    O3,
    No2,
    So2,
    Nh3,
}

impl Pollutant {
    pub const ALL: [Pollutant; 7] = [
        Pollutant::Pm25,
        Pollutant::Pm10,
        Pollutant::Co,
        Pollutant::O3,
        Pollutant::No2,
        Pollutant::So2,
        Pollutant::Nh3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Pollutant::Pm25 => "PM2.5",
            Pollutant::Pm10 => "PM10",
            Pollutant::Co => "CO",
            Pollutant::O3 => "O3",
            Pollutant::No2 => "NO2",
            Pollutant::So2 => "SO2",
            Pollutant::Nh3 => "NH3",
        }
    }

    /// Short name usable in IRIs and identifiers (no dot).
    pub fn compact_name(self) -> &'static str {
        match self {
            Pollutant::Pm25 => "PM25",
            Pollutant::Pm10 => "PM10",
            Pollutant::Co => "CO",
            Pollutant::O3 => "O3",
            Pollutant::No2 => "NO2",
            Pollutant::So2 => "SO2",
            Pollutant::Nh3 => "NH3",
        }
    }
}

impl fmt::Display for Pollutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pollutant {
    type Err = It2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace('_', ".").as_str() {
            "PM2.5" | "PM25" => Ok(Pollutant::Pm25),
            "PM10" => Ok(Pollutant::Pm10),
            "CO" => Ok(Pollutant::Co),
            "O3" => Ok(Pollutant::O3),
            "NO2" => Ok(Pollutant::No2),
            "SO2" => Ok(Pollutant::So2),
            "NH3" => Ok(Pollutant::Nh3),
            _ => Err(It2Error::UnknownVariable(s.to_string())),
        }
    }
}

/// A fuzzy variable: one of the seven pollutants or the AQI output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    Pollutant(Pollutant),
    Aqi,
}

impl Variable {
    pub const ALL: [Variable; 8] = [
        Variable::Pollutant(Pollutant::Pm25),
        Variable::Pollutant(Pollutant::Pm10),
        Variable::Pollutant(Pollutant::Co),
        Variable::Pollutant(Pollutant::O3),
        Variable::Pollutant(Pollutant::No2),
        Variable::Pollutant(Pollutant::So2),
        Variable::Pollutant(Pollutant::Nh3),
        Variable::Aqi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::Pollutant(p) => p.name(),
            Variable::Aqi => "AQI",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = It2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("AQI") {
            Ok(Variable::Aqi)
        } else {
            Ok(Variable::Pollutant(s.parse()?))
        }
    }
}

/// A trapezoidal membership function scaled to height `h`.
///
/// The plateau `[b, c]` is closed on both ends and the shoulders are linear;
/// `b == c` degenerates to a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trapezoid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub h: f64,
}

impl Trapezoid {
    pub fn new(a: f64, b: f64, c: f64, d: f64, h: f64) -> Result<Self, It2Error> {
        if ![a, b, c, d, h].iter().all(|v| v.is_finite()) {
            return Err(It2Error::NonFinite);
        }
        if !(a <= b && b <= c && c <= d) {
            return Err(It2Error::BadOrdering { a, b, c, d });
        }
        if !(h > 0.0 && h <= 1.0) {
            return Err(It2Error::BadHeight(h));
        }
        Ok(Trapezoid { a, b, c, d, h })
    }

    /// Membership degree at `x`: 0 outside `[a, d]`, `h` on `[b, c]`,
    /// linear on the shoulders.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.d {
            0.0
        } else if x >= self.b && x <= self.c {
            self.h
        } else if x < self.b {
            self.h * (x - self.a) / (self.b - self.a)
        } else {
            self.h * (self.d - x) / (self.d - self.c)
        }
    }

    /// Membership with the falling shoulder removed: values past the plateau
    /// keep the full height. Used to saturate the most severe term.
    pub fn eval_right_shoulder(&self, x: f64) -> f64 {
        if x >= self.c {
            self.h
        } else {
            self.eval(x)
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.d)
    }
}

/// Interval membership degree `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipInterval {
    pub lo: f64,
    pub hi: f64,
}

/// One linguistic term's footprint of uncertainty: the region between the
/// upper and lower membership functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct It2Set {
    pub term: Category,
    pub umf: Trapezoid,
    pub lmf: Trapezoid,
}

impl It2Set {
    pub fn new(term: Category, umf: Trapezoid, lmf: Trapezoid) -> Result<Self, It2Error> {
        let set = It2Set { term, umf, lmf };
        set.check_containment("", term.name())?;
        Ok(set)
    }

    fn check_containment(&self, variable: &str, term: &str) -> Result<(), It2Error> {
        if self.lmf.h > self.umf.h {
            return Err(It2Error::HeightInversion {
                variable: variable.to_string(),
                term: term.to_string(),
                lower: self.lmf.h,
                upper: self.umf.h,
            });
        }
        if self.lmf.a < self.umf.a || self.lmf.d > self.umf.d {
            return Err(It2Error::SupportNotContained {
                variable: variable.to_string(),
                term: term.to_string(),
                la: self.lmf.a,
                ld: self.lmf.d,
                ua: self.umf.a,
                ud: self.umf.d,
            });
        }
        let (lo, hi) = self.umf.support();
        let steps = LOAD_VALIDATION_GRID - 1;
        for i in 0..LOAD_VALIDATION_GRID {
            let x = lo + (hi - lo) * i as f64 / steps as f64;
            let l = self.lmf.eval(x);
            let u = self.umf.eval(x);
            if l > u + 1e-12 {
                return Err(It2Error::FouViolation {
                    variable: variable.to_string(),
                    term: term.to_string(),
                    x,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(())
    }

    /// Membership interval at `x`; rejects negative or non-finite input.
    pub fn membership(&self, x: f64) -> Result<MembershipInterval, It2Error> {
        if !x.is_finite() || x < 0.0 {
            return Err(It2Error::BadInput(x));
        }
        Ok(MembershipInterval { lo: self.lmf.eval(x), hi: self.umf.eval(x) })
    }
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    umf: [f64; 5],
    lmf: [f64; 5],
}

/// Membership function parameters for every (variable, term) pair.
///
/// Immutable after load; evaluation is pure, so a table may be shared freely
/// across threads.
#[derive(Debug, Clone)]
pub struct ParameterTable {
    sets: BTreeMap<Variable, BTreeMap<Category, It2Set>>,
}

pub const DEFAULT_PARAMS_TOML: &str = include_str!("../fixtures/params.toml");

impl ParameterTable {
    /// The table every CLI command falls back to when no config is given.
    pub fn default_table() -> ParameterTable {
        ParameterTable::parse(DEFAULT_PARAMS_TOML)
            .expect("embedded default parameter table must be valid")
    }

    pub fn parse(text: &str) -> Result<ParameterTable, It2Error> {
        let raw: BTreeMap<String, BTreeMap<String, RawEntry>> =
            toml::from_str(text).map_err(|e| It2Error::Parse(e.to_string()))?;
        let mut sets: BTreeMap<Variable, BTreeMap<Category, It2Set>> = BTreeMap::new();
        for (var_name, terms) in raw {
            let variable: Variable = var_name.parse()?;
            for (term_name, entry) in terms {
                let term: Category = term_name.parse()?;
                let [ua, ub, uc, ud, uh] = entry.umf;
                let [la, lb, lc, ld, lh] = entry.lmf;
                let umf = Trapezoid::new(ua, ub, uc, ud, uh)?;
                let lmf = Trapezoid::new(la, lb, lc, ld, lh)?;
                let set = It2Set { term, umf, lmf };
                set.check_containment(variable.name(), term.name())?;
                if sets.entry(variable).or_default().insert(term, set).is_some() {
                    return Err(It2Error::DuplicateEntry {
                        variable: variable.name().to_string(),
                        term: term.name().to_string(),
                    });
                }
            }
        }
        let table = ParameterTable { sets };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), It2Error> {
        for variable in Variable::ALL {
            match self.sets.get(&variable) {
                None => return Err(It2Error::EmptyVariable(variable.name().to_string())),
                Some(terms) if terms.is_empty() => {
                    return Err(It2Error::EmptyVariable(variable.name().to_string()))
                }
                _ => {}
            }
        }
        let aqi = &self.sets[&Variable::Aqi];
        for term in Category::ALL {
            if !aqi.contains_key(&term) {
                return Err(It2Error::MissingAqiTerm(term));
            }
        }
        Ok(())
    }

    pub fn get(&self, variable: Variable, term: Category) -> Result<&It2Set, It2Error> {
        self.sets
            .get(&variable)
            .and_then(|m| m.get(&term))
            .ok_or(It2Error::MissingEntry { variable: variable.name().to_string(), term })
    }

    /// Terms declared for a variable, in severity order.
    pub fn terms(&self, variable: Variable) -> impl Iterator<Item = (&Category, &It2Set)> {
        self.sets.get(&variable).into_iter().flat_map(|m| m.iter())
    }

    /// Most severe term declared for a variable.
    pub fn top_term(&self, variable: Variable) -> Option<Category> {
        self.sets.get(&variable).and_then(|m| m.keys().next_back()).copied()
    }

    /// Membership interval of `x` in (variable, term).
    pub fn membership(
        &self,
        variable: Variable,
        term: Category,
        x: f64,
    ) -> Result<MembershipInterval, It2Error> {
        self.get(variable, term)?.membership(x)
    }

    /// Serialize back to the config format accepted by [`ParameterTable::parse`].
    pub fn to_toml_string(&self) -> String {
        let mut raw: BTreeMap<String, BTreeMap<String, RawEntry>> = BTreeMap::new();
        for (variable, terms) in &self.sets {
            let entry = raw.entry(variable.name().to_string()).or_default();
            for (term, set) in terms {
                entry.insert(
                    term.name().to_string(),
                    RawEntry {
                        umf: [set.umf.a, set.umf.b, set.umf.c, set.umf.d, set.umf.h],
                        lmf: [set.lmf.a, set.lmf.b, set.lmf.c, set.lmf.d, set.lmf.h],
                    },
                );
            }
        }
        toml::to_string(&raw).expect("parameter table serialization cannot fail")
    }
}
