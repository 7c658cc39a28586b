//! Menus of tests: closed-form construction, indirect utility and revenue.

mod access;
mod screening;
mod statics;
mod welfare;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distribution::{Thresholds, TypeDistribution};
use crate::error::{Error, Result};
use crate::model::{sender_value, Environment, InfluenceBundle};
use crate::tolerance;

pub use access::{access_pricing, willingness_to_pay, AccessSolution};
pub use screening::{
    coercion_menu, extended_menu, first_best, optimal_menu, CoercionSolution, CoercionStatus,
};
pub use statics::{comparative_statics, StaticsPoint, StaticsReport};
pub use welfare::{
    receiver_optimal_equalizing_test, receiver_welfare, segment_experiment, welfare_comparison,
    EqualizingTest, SegmentWelfare, WelfareComparison, WelfareMode, WelfareReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuKind {
    FirstBest,
    Balanced,
    Unbalanced,
    Extended,
    Coercive,
}

impl fmt::Display for MenuKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MenuKind::FirstBest => "first_best",
            MenuKind::Balanced => "balanced",
            MenuKind::Unbalanced => "unbalanced",
            MenuKind::Extended => "extended",
            MenuKind::Coercive => "coercive",
        };
        f.write_str(s)
    }
}

/// Price of a segment. Only first-best menus charge type-dependent prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Price {
    Flat { value: f64 },
    Affine { intercept: f64, slope: f64 },
}

impl Price {
    pub fn at(&self, theta: f64) -> f64 {
        match *self {
            Price::Flat { value } => value,
            Price::Affine { intercept, slope } => intercept + slope * theta,
        }
    }

    pub fn slope(&self) -> f64 {
        match *self {
            Price::Flat { .. } => 0.0,
            Price::Affine { slope, .. } => slope,
        }
    }

    fn mirrored(self) -> Price {
        match self {
            Price::Flat { .. } => self,
            Price::Affine { intercept, slope } => Price::Affine {
                intercept: intercept + slope,
                slope: -slope,
            },
        }
    }
}

/// Types in `[theta_lo, theta_hi]` buy `bundle`. A type sitting on the knot
/// between two segments is assigned to the right one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub label: String,
    pub bundle: InfluenceBundle,
    pub price: Price,
}

impl Segment {
    fn mirrored(&self) -> Segment {
        Segment {
            theta_lo: 1.0 - self.theta_hi,
            theta_hi: 1.0 - self.theta_lo,
            label: mirror_label(&self.label),
            bundle: self.bundle.mirrored(),
            price: self.price.mirrored(),
        }
    }
}

fn mirror_label(label: &str) -> String {
    match label {
        "L*" => "R*",
        "R*" => "L*",
        "L0*" => "R0*",
        "R0*" => "L0*",
        other => other,
    }
    .to_string()
}

/// A single menu item a type can pick: a bundle at a given price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub segment: usize,
    pub bundle: InfluenceBundle,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Menu {
    pub kind: MenuKind,
    pub env: Environment,
    pub theta_low: f64,
    pub theta_high: f64,
    /// Worst-off type anchoring the envelope.
    pub theta0: f64,
    /// `U(theta0)`: zero, or the outside-option value under coercion.
    pub anchor_utility: f64,
    /// What a non-participating sender gets.
    pub outside_option: InfluenceBundle,
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub thresholds: Option<Thresholds>,
    /// Thresholds refer to the relabelled problem `theta -> 1 - theta`.
    #[serde(default)]
    pub mirrored: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Pieces `(lo, hi, bundle, label)` to be priced by the envelope condition.
pub(crate) type Allocation = Vec<(f64, f64, InfluenceBundle, &'static str)>;

impl Menu {
    /// Prices each piece so that `U` has slope `q_R - q_L` and equals
    /// `anchor` at `theta0`. Empty pieces are dropped.
    pub(crate) fn from_envelope(
        kind: MenuKind,
        env: &Environment,
        dist: &TypeDistribution,
        pieces: Allocation,
        theta0: f64,
        outside_option: InfluenceBundle,
    ) -> Menu {
        let anchor = sender_value(&outside_option, theta0);
        let pieces: Vec<_> = pieces.into_iter().filter(|p| p.1 > p.0).collect();
        let mut menu = Menu {
            kind,
            env: *env,
            theta_low: dist.low(),
            theta_high: dist.high(),
            theta0,
            anchor_utility: anchor,
            outside_option,
            segments: pieces
                .iter()
                .map(|&(lo, hi, bundle, label)| Segment {
                    theta_lo: lo,
                    theta_hi: hi,
                    label: label.to_string(),
                    bundle,
                    price: Price::Flat { value: 0.0 },
                })
                .collect(),
            thresholds: None,
            mirrored: false,
            warnings: Vec::new(),
        };
        let prices: Vec<f64> = menu
            .segments
            .iter()
            .map(|s| {
                sender_value(&s.bundle, s.theta_lo) - menu.envelope_utility_unchecked(s.theta_lo)
            })
            .collect();
        for (s, value) in menu.segments.iter_mut().zip(prices) {
            s.price = Price::Flat { value };
        }
        menu
    }

    /// Relabels `theta -> 1 - theta` and swaps `L` and `R`.
    pub fn mirrored(&self) -> Menu {
        Menu {
            kind: self.kind,
            env: self.env.mirrored(),
            theta_low: 1.0 - self.theta_high,
            theta_high: 1.0 - self.theta_low,
            theta0: 1.0 - self.theta0,
            anchor_utility: self.anchor_utility,
            outside_option: self.outside_option.mirrored(),
            segments: self.segments.iter().rev().map(Segment::mirrored).collect(),
            thresholds: self.thresholds,
            mirrored: !self.mirrored,
            warnings: self.warnings.clone(),
        }
    }

    fn check_support(&self, theta: f64) -> Result<()> {
        let slack = tolerance::GEOMETRY;
        if theta < self.theta_low - slack || theta > self.theta_high + slack || theta.is_nan() {
            return Err(Error::OutsideSupport {
                theta,
                low: self.theta_low,
                high: self.theta_high,
            });
        }
        Ok(())
    }

    fn index_unchecked(&self, theta: f64) -> usize {
        self.segments
            .partition_point(|s| s.theta_lo <= theta)
            .saturating_sub(1)
            .min(self.segments.len().saturating_sub(1))
    }

    /// Index of the segment serving `theta`.
    pub fn segment_index(&self, theta: f64) -> Result<usize> {
        self.check_support(theta)?;
        if self.segments.is_empty() {
            return Err(Error::InvalidArgument("menu has no segments".into()));
        }
        Ok(self.index_unchecked(theta))
    }

    pub fn segment_at(&self, theta: f64) -> Result<&Segment> {
        Ok(&self.segments[self.segment_index(theta)?])
    }

    pub fn allocation(&self, theta: f64) -> Result<InfluenceBundle> {
        Ok(self.segment_at(theta)?.bundle)
    }

    pub fn price(&self, theta: f64) -> Result<f64> {
        Ok(self.segment_at(theta)?.price.at(theta))
    }

    /// `U(theta) = u(q(theta), theta) - p(theta)`.
    pub fn indirect_utility(&self, theta: f64) -> Result<f64> {
        let s = self.segment_at(theta)?;
        Ok(sender_value(&s.bundle, theta) - s.price.at(theta))
    }

    /// `U(theta0)` plus the integral of `dU/dtheta = q_R - q_L - p'` from
    /// `theta0`.
    pub fn envelope_utility(&self, theta: f64) -> Result<f64> {
        self.check_support(theta)?;
        Ok(self.envelope_utility_unchecked(theta))
    }

    fn envelope_utility_unchecked(&self, theta: f64) -> f64 {
        self.anchor_utility + self.slope_integral(theta) - self.slope_integral(self.theta0)
    }

    /// Integral of the utility slope from the bottom of the support.
    fn slope_integral(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for s in &self.segments {
            if theta <= s.theta_lo {
                break;
            }
            let hi = theta.min(s.theta_hi);
            acc += (s.bundle.tilt() - s.price.slope()) * (hi - s.theta_lo);
        }
        acc
    }

    /// Expected payment. Exact for flat prices; affine prices integrate
    /// through the distribution's partial mean.
    pub fn revenue(&self, dist: &TypeDistribution) -> f64 {
        self.segments
            .iter()
            .map(|s| match s.price {
                Price::Flat { value } => value * dist.mass(s.theta_lo, s.theta_hi),
                Price::Affine { intercept, slope } => {
                    intercept * dist.mass(s.theta_lo, s.theta_hi)
                        + slope * dist.partial_mean(s.theta_lo, s.theta_hi)
                }
            })
            .sum()
    }

    /// Distinct purchase options. An affine-priced segment contributes its two
    /// endpoint prices, the cheapest ways to obtain its bundle.
    pub fn items(&self) -> Vec<Item> {
        let mut items = Vec::with_capacity(self.segments.len() * 2);
        for (k, s) in self.segments.iter().enumerate() {
            match s.price {
                Price::Flat { value } => items.push(Item {
                    segment: k,
                    bundle: s.bundle,
                    price: value,
                }),
                Price::Affine { .. } => {
                    for t in [s.theta_lo, s.theta_hi] {
                        items.push(Item {
                            segment: k,
                            bundle: s.bundle,
                            price: s.price.at(t),
                        });
                    }
                }
            }
        }
        items
    }

    /// Utility-maximising choice of `theta` among the items and the outside
    /// option. Ties go to the type's own segment, then to buying. `None`
    /// means staying out.
    pub fn choose(&self, theta: f64) -> Option<(Item, f64)> {
        let own = self.index_unchecked(theta);
        let outside = sender_value(&self.outside_option, theta);
        let mut best: Option<(Item, f64)> = None;
        for item in self.items() {
            let v = sender_value(&item.bundle, theta) - item.price;
            let better = match best {
                None => true,
                Some((b, bv)) => {
                    v > bv + 1e-12 || (v >= bv - 1e-12 && item.segment == own && b.segment != own)
                }
            };
            if better {
                best = Some((item, v));
            }
        }
        best.filter(|&(_, v)| v >= outside - 1e-12)
    }

    /// Segment boundaries strictly inside the support.
    pub fn knots(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.theta_lo).collect()
    }
}
