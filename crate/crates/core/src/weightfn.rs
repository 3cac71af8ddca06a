//! Weight distributions over risk cutoffs.
//!
//! A weight `w(c)` on (0, 1) describes how the cost ratio, and therefore the
//! optimal treatment cutoff, varies across a population. Every weighted score
//! only needs three functionals of `w`:
//!
//! * the CDF `F_w(r)`,
//! * the first incomplete moment `m_w(r) = ∫_0^r c w(c) dc`,
//! * the mean `μ_w = m_w(1)`.
//!
//! For a Beta(a, b) weight, `m_w(r) = a / (a + b) · I_r(a + 1, b)`, so both
//! functionals reduce to the regularized incomplete beta function.
//!
//! A point mass at `c0` is accepted and reproduces the single-cutoff loss
//! `L(c0)`; the resulting score is proper but not strictly proper. It has no
//! density, so [`WeightSpec::density`] returns `None` for it.
//!
//! Text grammar (used by the CLI and the C API):
//!
//! ```text
//! uniform
//! beta:<a>,<b>
//! point:<c0>
//! mix:<w1>*<spec1>+<w2>*<spec2>+...     (components are not mixtures)
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_unit, Error, Result};
use crate::special::{inc_beta, inc_beta_and_front, ln_beta};

/// A single, non-mixture weight distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Uniform,
    Beta { a: f64, b: f64 },
    PointMass(f64),
}

impl Component {
    fn validate(self) -> Result<Self> {
        match self {
            Component::Uniform => Ok(self),
            Component::Beta { a, b } => {
                if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                    Ok(self)
                } else {
                    Err(Error::InvalidWeight(format!(
                        "beta shapes must be positive and finite, got ({a}, {b})"
                    )))
                }
            }
            Component::PointMass(c0) => {
                if c0 > 0.0 && c0 < 1.0 {
                    Ok(self)
                } else {
                    Err(Error::InvalidWeight(format!(
                        "point mass location must lie in (0, 1), got {c0}"
                    )))
                }
            }
        }
    }

    fn cdf(self, r: f64) -> f64 {
        match self {
            Component::Uniform => r,
            Component::Beta { a, b } => inc_beta(r, a, b),
            Component::PointMass(c0) => {
                if r >= c0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn inc_moment(self, r: f64) -> f64 {
        match self {
            Component::Uniform => 0.5 * r * r,
            Component::Beta { a, b } => a / (a + b) * inc_beta(r, a + 1.0, b),
            Component::PointMass(c0) => {
                if r >= c0 {
                    c0
                } else {
                    0.0
                }
            }
        }
    }

    /// `(F(r), m(r))` sharing one incomplete-beta evaluation.
    fn cdf_and_moment(self, r: f64) -> (f64, f64) {
        match self {
            Component::Beta { a, b } => {
                let (cdf, front) = inc_beta_and_front(r, a, b);
                (cdf, ((a * cdf - front) / (a + b)).max(0.0))
            }
            _ => (self.cdf(r), self.inc_moment(r)),
        }
    }

    fn mean(self) -> f64 {
        match self {
            Component::Uniform => 0.5,
            Component::Beta { a, b } => a / (a + b),
            Component::PointMass(c0) => c0,
        }
    }

    fn density(self, c: f64) -> Option<f64> {
        if !(0.0..=1.0).contains(&c) {
            return Some(0.0);
        }
        match self {
            Component::Uniform => Some(1.0),
            Component::Beta { a, b } => {
                Some(((a - 1.0) * c.ln() + (b - 1.0) * (-c).ln_1p() - ln_beta(a, b)).exp())
            }
            Component::PointMass(_) => None,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Uniform => write!(f, "uniform"),
            Component::Beta { a, b } => write!(f, "beta:{a},{b}"),
            Component::PointMass(c0) => write!(f, "point:{c0}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Single(Component),
    Mixture(Vec<(f64, Component)>),
}

/// A validated weight distribution `w(c)` on (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec(Repr);

/// `F_w`, `m_w` and `μ_w` evaluated at one risk value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightMoments {
    pub cdf: f64,
    pub inc_moment: f64,
    pub mean: f64,
}

impl WeightMoments {
    /// `A(r) = ∫_r^1 (1 - c) w(c) dc`, the loss charged to a case predicted `r`.
    #[inline]
    pub fn case_loss(&self) -> f64 {
        (1.0 - self.cdf + self.inc_moment - self.mean).max(0.0)
    }

    /// `B(r) = ∫_0^r c w(c) dc`, the loss charged to a control predicted `r`.
    #[inline]
    pub fn control_loss(&self) -> f64 {
        self.inc_moment.max(0.0)
    }

    /// `ℓ_w(r, q) = q A(r) + (1 - q) B(r)`: the expected loss of predicting
    /// `r` when the event probability is `q`.
    #[inline]
    pub fn loss(&self, q: f64) -> f64 {
        q * self.case_loss() + (1.0 - q) * self.control_loss()
    }

    #[inline]
    pub fn outcome_loss(&self, outcome: bool) -> f64 {
        if outcome {
            self.case_loss()
        } else {
            self.control_loss()
        }
    }

    /// `A(r) - B(r) = 1 - F_w(r) - μ_w`.
    #[inline]
    pub fn contrast(&self) -> f64 {
        1.0 - self.cdf - self.mean
    }
}

impl WeightSpec {
    pub fn uniform() -> Self {
        WeightSpec(Repr::Single(Component::Uniform))
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Component::Beta { a, b }.validate().map(|c| WeightSpec(Repr::Single(c)))
    }

    pub fn point_mass(c0: f64) -> Result<Self> {
        Component::PointMass(c0).validate().map(|c| WeightSpec(Repr::Single(c)))
    }

    pub fn single(component: Component) -> Result<Self> {
        component.validate().map(|c| WeightSpec(Repr::Single(c)))
    }

    /// Finite mixture. Weights must be nonnegative with a positive sum; they
    /// are normalized to sum to one.
    pub fn mixture(components: Vec<(f64, Component)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidWeight("mixture has no components".into()));
        }
        let mut total = 0.0;
        for &(weight, component) in &components {
            if !(weight >= 0.0 && weight.is_finite()) {
                return Err(Error::InvalidWeight(format!(
                    "mixture weights must be nonnegative, got {weight}"
                )));
            }
            component.validate()?;
            total += weight;
        }
        if total <= 0.0 {
            return Err(Error::InvalidWeight("mixture weights sum to zero".into()));
        }
        let normalized = components
            .into_iter()
            .map(|(weight, component)| (weight / total, component))
            .collect();
        Ok(WeightSpec(Repr::Mixture(normalized)))
    }

    /// Components with their (normalized) mixing weights; a single
    /// distribution is reported as one component of weight 1.
    pub fn components(&self) -> Vec<(f64, Component)> {
        match &self.0 {
            Repr::Single(c) => vec![(1.0, *c)],
            Repr::Mixture(parts) => parts.clone(),
        }
    }

    pub fn is_mixture(&self) -> bool {
        matches!(self.0, Repr::Mixture(_))
    }

    /// True when `w(c) > 0` almost everywhere, i.e. the weighted Brier score
    /// is strictly proper.
    pub fn is_strictly_proper(&self) -> bool {
        self.components()
            .iter()
            .any(|&(weight, c)| weight > 0.0 && !matches!(c, Component::PointMass(_)))
    }

    fn fold(&self, f: impl Fn(Component) -> f64) -> f64 {
        match &self.0 {
            Repr::Single(c) => f(*c),
            Repr::Mixture(parts) => parts.iter().map(|&(weight, c)| weight * f(c)).sum(),
        }
    }

    pub fn cdf(&self, r: f64) -> Result<f64> {
        let r = check_unit("cutoff", r)?;
        Ok(self.fold(|c| c.cdf(r)).clamp(0.0, 1.0))
    }

    pub fn inc_moment(&self, r: f64) -> Result<f64> {
        let r = check_unit("cutoff", r)?;
        Ok(self.fold(|c| c.inc_moment(r)).max(0.0))
    }

    pub fn mean(&self) -> f64 {
        self.fold(Component::mean)
    }

    /// Density at `c`; `None` when the distribution has an atom.
    pub fn density(&self, c: f64) -> Option<f64> {
        match &self.0 {
            Repr::Single(component) => component.density(c),
            Repr::Mixture(parts) => parts
                .iter()
                .map(|&(weight, component)| component.density(c).map(|d| weight * d))
                .sum(),
        }
    }

    pub fn moments(&self, r: f64) -> Result<WeightMoments> {
        check_unit("risk", r)?;
        Ok(self.moments_unchecked(r))
    }

    /// Moments at a risk already known to lie in [0, 1].
    #[inline]
    pub(crate) fn moments_unchecked(&self, r: f64) -> WeightMoments {
        let (cdf, inc_moment) = match &self.0 {
            Repr::Single(c) => c.cdf_and_moment(r),
            Repr::Mixture(parts) => parts.iter().fold((0.0, 0.0), |(f, m), &(weight, c)| {
                let (cf, cm) = c.cdf_and_moment(r);
                (f + weight * cf, m + weight * cm)
            }),
        };
        WeightMoments {
            cdf: cdf.clamp(0.0, 1.0),
            inc_moment: inc_moment.max(0.0),
            mean: self.mean(),
        }
    }
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::uniform()
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Single(c) => write!(f, "{c}"),
            Repr::Mixture(parts) => {
                write!(f, "mix:")?;
                for (i, (weight, c)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{weight}*{c}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_number(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidWeight(format!("cannot parse {what} from {text:?}")))
}

fn parse_component(text: &str) -> Result<Component> {
    let text = text.trim();
    let (kind, args) = match text.split_once(':') {
        Some((kind, args)) => (kind.trim(), Some(args)),
        None => (text, None),
    };
    let component = match (kind.to_ascii_lowercase().as_str(), args) {
        ("uniform", None) => Component::Uniform,
        ("beta", Some(args)) => {
            let (a, b) = args.split_once(',').ok_or_else(|| {
                Error::InvalidWeight(format!("beta needs two shapes `beta:a,b`, got {text:?}"))
            })?;
            Component::Beta {
                a: parse_number(a, "beta shape a")?,
                b: parse_number(b, "beta shape b")?,
            }
        }
        ("point", Some(arg)) => Component::PointMass(parse_number(arg, "point mass location")?),
        ("mix", _) => {
            return Err(Error::InvalidWeight(
                "mixture components cannot themselves be mixtures".into(),
            ))
        }
        _ => return Err(Error::InvalidWeight(format!("unrecognized weight {text:?}"))),
    };
    component.validate()
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            Some((kind, body)) if kind.trim().eq_ignore_ascii_case("mix") => {
                let mut parts = Vec::new();
                for term in body.split('+') {
                    let (weight, spec) = term.split_once('*').ok_or_else(|| {
                        Error::InvalidWeight(format!("mixture term {term:?} is not `weight*spec`"))
                    })?;
                    parts.push((parse_number(weight, "mixture weight")?, parse_component(spec)?));
                }
                WeightSpec::mixture(parts)
            }
            _ => parse_component(s).map(|c| WeightSpec(Repr::Single(c))),
        }
    }
}

impl Serialize for WeightSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeightSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
