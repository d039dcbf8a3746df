//! Bidder type distributions on `[0, t̄]` and the objects derived from them:
//! density, hazard rate, virtual value and the distribution of the highest of
//! the `N - 1` opposing types.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{linspace, MonotoneCubic};

/// A CDF given by knots `(t_i, F(t_i))`, interpolated with a monotone cubic.
/// The density is the derivative of the interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    curve: MonotoneCubic,
}

impl TabulatedCdf {
    /// Knots must start at `(0, 0)`, end at `(t̄, 1)`, and be strictly increasing
    /// in both coordinates.
    pub fn new(types: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if types.first() != Some(&0.0) || probs.first() != Some(&0.0) {
            return Err(Error::InvalidParameter(
                "tabulated CDF must start at (0, 0)".into(),
            ));
        }
        if probs.last() != Some(&1.0) {
            return Err(Error::InvalidParameter(
                "tabulated CDF must end at 1".into(),
            ));
        }
        if probs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "tabulated CDF must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            curve: MonotoneCubic::new(types, probs)?,
        })
    }

    pub fn upper(&self) -> f64 {
        *self.curve.xs().last().expect("at least two knots")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Uniform,
    /// `F(t) = (t / t̄)^a`.
    Power {
        exponent: f64,
    },
    /// Exponential with the given rate, truncated to `[0, t̄]`.
    TruncatedExponential {
        rate: f64,
    },
    Tabulated(TabulatedCdf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDistribution {
    family: Family,
    upper: f64,
}

/// Outcome of scanning the hazard rate for monotonicity.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub regular: bool,
    /// Grid point at which the hazard rate first decreased.
    pub first_violation: Option<f64>,
    pub grid_size: usize,
}

impl TypeDistribution {
    pub fn uniform(upper: f64) -> Result<Self> {
        Self::new(Family::Uniform, upper)
    }

    pub fn power(exponent: f64, upper: f64) -> Result<Self> {
        Self::new(Family::Power { exponent }, upper)
    }

    pub fn truncated_exponential(rate: f64, upper: f64) -> Result<Self> {
        Self::new(Family::TruncatedExponential { rate }, upper)
    }

    pub fn tabulated(cdf: TabulatedCdf) -> Result<Self> {
        let upper = cdf.upper();
        Self::new(Family::Tabulated(cdf), upper)
    }

    pub fn new(family: Family, upper: f64) -> Result<Self> {
        if !(upper > 0.0 && upper.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support upper bound must be positive and finite, got {upper}"
            )));
        }
        match &family {
            Family::Power { exponent } if !(*exponent > 0.0 && exponent.is_finite()) => {
                return Err(Error::InvalidParameter(format!(
                    "power exponent must be positive, got {exponent}"
                )))
            }
            Family::TruncatedExponential { rate } if !(*rate > 0.0 && rate.is_finite()) => {
                return Err(Error::InvalidParameter(format!(
                    "exponential rate must be positive, got {rate}"
                )))
            }
            Family::Tabulated(cdf) if cdf.upper() != upper => {
                return Err(Error::InvalidParameter(
                    "tabulated CDF support does not match upper bound".into(),
                ))
            }
            _ => {}
        }
        Ok(Self { family, upper })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Upper end of the support, `t̄`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    fn check(&self, t: f64) -> Result<()> {
        if (0.0..=self.upper).contains(&t) {
            Ok(())
        } else {
            Err(Error::domain("type", t, 0.0, self.upper))
        }
    }

    /// `F(t)` without domain checks; clamps outside the support.
    pub(crate) fn cdf_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.upper {
            return 1.0;
        }
        let x = t / self.upper;
        match &self.family {
            Family::Uniform => x,
            Family::Power { exponent } => x.powf(*exponent),
            Family::TruncatedExponential { rate } => {
                (-rate * t).exp_m1() / (-rate * self.upper).exp_m1()
            }
            Family::Tabulated(c) => c.curve.eval(t).clamp(0.0, 1.0),
        }
    }

    /// `f(t)` without domain checks; zero outside the support.
    pub(crate) fn pdf_at(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.upper {
            return 0.0;
        }
        let x = t / self.upper;
        match &self.family {
            Family::Uniform => 1.0 / self.upper,
            Family::Power { exponent } => {
                if t == 0.0 {
                    if *exponent < 1.0 {
                        f64::INFINITY
                    } else if *exponent == 1.0 {
                        1.0 / self.upper
                    } else {
                        0.0
                    }
                } else {
                    exponent * x.powf(exponent - 1.0) / self.upper
                }
            }
            Family::TruncatedExponential { rate } => {
                -rate * (-rate * t).exp() / (-rate * self.upper).exp_m1()
            }
            Family::Tabulated(c) => c.curve.derivative(t).max(0.0),
        }
    }

    /// `(1 - F(t)) / f(t)`, the inverse hazard rate.
    pub(crate) fn inverse_hazard_at(&self, t: f64) -> f64 {
        (1.0 - self.cdf_at(t)) / self.pdf_at(t)
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.cdf_at(t))
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.pdf_at(t))
    }

    /// `f(t) / (1 - F(t))` on `[0, t̄)`.
    pub fn hazard(&self, t: f64) -> Result<f64> {
        if !(0.0..self.upper).contains(&t) {
            return Err(Error::Domain {
                what: "type",
                value: t,
                domain: format!("[0, {}) (hazard is unbounded at t̄)", self.upper),
            });
        }
        Ok(self.pdf_at(t) / (1.0 - self.cdf_at(t)))
    }

    /// `V(t) = t - (1 - F(t)) / f(t)`, extended by continuity to `V(t̄) = t̄`.
    pub fn virtual_value(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.virtual_value_at(t))
    }

    pub(crate) fn virtual_value_at(&self, t: f64) -> f64 {
        if t >= self.upper {
            return self.upper;
        }
        let f = self.pdf_at(t);
        if f == 0.0 {
            return f64::NEG_INFINITY;
        }
        t - (1.0 - self.cdf_at(t)) / f
    }

    /// CDF of the highest of `n - 1` independent draws, `F₁(t) = F(t)^(n-1)`.
    pub fn order_stat_cdf(&self, n: usize, t: f64) -> Result<f64> {
        check_n(n)?;
        self.check(t)?;
        Ok(self.cdf_at(t).powi(n as i32 - 1))
    }

    /// Density of the highest of `n - 1` draws, `f₁(t) = (n-1) F(t)^(n-2) f(t)`.
    pub fn order_stat_pdf(&self, n: usize, t: f64) -> Result<f64> {
        check_n(n)?;
        self.check(t)?;
        Ok(opp_pdf(self, n, t))
    }

    /// Inverse CDF, used for sampling.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.family {
            Family::Uniform => u * self.upper,
            Family::Power { exponent } => self.upper * u.powf(1.0 / exponent),
            Family::TruncatedExponential { rate } => {
                -(u * (-rate * self.upper).exp_m1()).ln_1p() / rate
            }
            Family::Tabulated(c) => c.curve.inverse(u).clamp(0.0, self.upper),
        }
    }

    /// Scan the hazard rate on `grid_size` evenly spaced points of `[0, t̄)`
    /// and report whether it is nondecreasing (up to rounding).
    pub fn check_regularity(&self, grid_size: usize) -> RegularityReport {
        let grid_size = grid_size.max(2);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..grid_size {
            let t = self.upper * k as f64 / grid_size as f64;
            let h = self.pdf_at(t) / (1.0 - self.cdf_at(t));
            let decreased = if prev == f64::INFINITY {
                h < prev
            } else {
                h < prev - 1e-9 * prev.abs().max(1.0)
            };
            if h.is_nan() || decreased {
                return RegularityReport {
                    regular: false,
                    first_violation: Some(t),
                    grid_size,
                };
            }
            prev = h;
        }
        RegularityReport {
            regular: true,
            first_violation: None,
            grid_size,
        }
    }

    /// Error unless [`check_regularity`](Self::check_regularity) passes on the
    /// default 1024-point grid.
    pub fn require_regular(&self) -> Result<()> {
        let report = self.check_regularity(1024);
        match report.first_violation {
            None => Ok(()),
            Some(at) => Err(Error::Irregular { at }),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidParameter(format!(
            "number of bidders must be at least 2, got {n}"
        )))
    } else {
        Ok(())
    }
}

pub(crate) fn opp_pdf(d: &TypeDistribution, n: usize, t: f64) -> f64 {
    let f = d.pdf_at(t);
    if n == 2 {
        return f;
    }
    (n - 1) as f64 * d.cdf_at(t).powi(n as i32 - 2) * f
}

impl fmt::Display for TypeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Uniform => write!(f, "dist=uniform upper={}", self.upper),
            Family::Power { exponent } => {
                write!(f, "dist=power a={exponent} upper={}", self.upper)
            }
            Family::TruncatedExponential { rate } => {
                write!(f, "dist=truncexp rate={rate} upper={}", self.upper)
            }
            Family::Tabulated(_) => write!(f, "dist=tabulated upper={}", self.upper),
        }
    }
}

/// Parses whitespace-separated `key=value` tokens, e.g. `dist=power a=2 upper=1.0`.
/// Unknown keys are rejected; `upper` defaults to 1.
impl FromStr for TypeDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut dist = None;
        let mut upper = 1.0;
        let mut a = None;
        let mut rate = None;
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{token}`")))?;
            let number = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("`{key}` expects a number, got `{value}`")))
            };
            match key {
                "dist" => dist = Some(value.to_ascii_lowercase()),
                "upper" => upper = number()?,
                "a" => a = Some(number()?),
                "rate" => rate = Some(number()?),
                _ => return Err(Error::Parse(format!("unknown distribution key `{key}`"))),
            }
        }
        match dist.as_deref() {
            Some("uniform") => TypeDistribution::uniform(upper),
            Some("power") => TypeDistribution::power(
                a.ok_or_else(|| Error::Parse("power distribution needs a=<exponent>".into()))?,
                upper,
            ),
            Some("truncexp") | Some("exponential") => TypeDistribution::truncated_exponential(
                rate.ok_or_else(|| Error::Parse("truncexp distribution needs rate=<r>".into()))?,
                upper,
            ),
            Some(other) => Err(Error::Parse(format!("unknown distribution `{other}`"))),
            None => Err(Error::Parse("missing dist=<family>".into())),
        }
    }
}

/// The auction environment: type distribution, number of bidders `N` and the
/// seller's value `tˢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionEnv {
    pub dist: TypeDistribution,
    pub n_bidders: usize,
    pub seller_value: f64,
}

impl AuctionEnv {
    pub fn new(dist: TypeDistribution, n_bidders: usize, seller_value: f64) -> Result<Self> {
        check_n(n_bidders)?;
        if !(seller_value >= 0.0 && seller_value < dist.upper()) {
            return Err(Error::Domain {
                what: "seller value",
                value: seller_value,
                domain: format!("[0, {})", dist.upper()),
            });
        }
        Ok(Self {
            dist,
            n_bidders,
            seller_value,
        })
    }

    pub fn upper(&self) -> f64 {
        self.dist.upper()
    }

    /// `F₁(t)`, unchecked.
    pub(crate) fn opp_cdf(&self, t: f64) -> f64 {
        self.dist.cdf_at(t).powi(self.n_bidders as i32 - 1)
    }

    /// `f₁(t)`, unchecked.
    pub(crate) fn opp_pdf(&self, t: f64) -> f64 {
        opp_pdf(&self.dist, self.n_bidders, t)
    }

    /// `F(t)^N`: probability that no bidder's type reaches `t`.
    pub(crate) fn none_above(&self, t: f64) -> f64 {
        self.dist.cdf_at(t).powi(self.n_bidders as i32)
    }

    /// Evenly spaced points on `[0, t̄]`.
    pub fn type_grid(&self, n: usize) -> Vec<f64> {
        linspace(0.0, self.upper(), n)
    }
}
