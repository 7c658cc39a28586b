use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// Receiver's decision problem: action `L` is optimal at posteriors below
/// `mu_low`, `R` above `mu_high`, and the default `S` in between. The prior
/// sits strictly inside so that `S` is optimal without information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnvironment", deny_unknown_fields)]
pub struct Environment {
    mu_low: f64,
    mu_prior: f64,
    mu_high: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    mu_low: f64,
    mu_prior: f64,
    mu_high: f64,
}

impl TryFrom<RawEnvironment> for Environment {
    type Error = Error;

    fn try_from(raw: RawEnvironment) -> Result<Self> {
        Environment::new(raw.mu_low, raw.mu_prior, raw.mu_high)
    }
}

impl Environment {
    /// Validates `0 <= mu_low < mu_prior < mu_high <= 1`.
    pub fn new(mu_low: f64, mu_prior: f64, mu_high: f64) -> Result<Self> {
        if !(mu_low.is_finite() && mu_prior.is_finite() && mu_high.is_finite()) {
            return Err(Error::InvalidEnvironment(
                "finiteness of mu_low, mu_prior, mu_high",
            ));
        }
        if !(mu_low >= 0.0) {
            return Err(Error::InvalidEnvironment("0 <= mu_low"));
        }
        if !(mu_low < mu_prior) {
            return Err(Error::InvalidEnvironment("mu_low < mu_prior"));
        }
        if !(mu_prior < mu_high) {
            return Err(Error::InvalidEnvironment("mu_prior < mu_high"));
        }
        if !(mu_high <= 1.0) {
            return Err(Error::InvalidEnvironment("mu_high <= 1"));
        }
        Ok(Environment {
            mu_low,
            mu_prior,
            mu_high,
        })
    }

    pub fn mu_low(&self) -> f64 {
        self.mu_low
    }

    pub fn mu_prior(&self) -> f64 {
        self.mu_prior
    }

    pub fn mu_high(&self) -> f64 {
        self.mu_high
    }

    /// Same receiver thresholds with a different prior.
    pub fn with_prior(&self, mu_prior: f64) -> Result<Self> {
        Environment::new(self.mu_low, mu_prior, self.mu_high)
    }

    /// Slope of the face bounding `q_R` from above.
    pub fn kappa_r(&self) -> f64 {
        self.mu_low / (self.mu_high - self.mu_low)
    }

    /// Slope of the face bounding `q_L` from the right; infinite when
    /// `mu_high = 1`.
    pub fn kappa_l(&self) -> f64 {
        if self.mu_high >= 1.0 {
            f64::INFINITY
        } else {
            (self.mu_high - self.mu_low) / (1.0 - self.mu_high)
        }
    }

    /// `kappa_r < 1`, decided without dividing.
    pub fn kappa_r_below_one(&self) -> bool {
        2.0 * self.mu_low < self.mu_high
    }

    /// `kappa_l > 1`, decided without dividing.
    pub fn kappa_l_above_one(&self) -> bool {
        self.mu_high - self.mu_low > 1.0 - self.mu_high
    }

    /// `1 / (1 - kappa_r)`, finite only when `kappa_r < 1`.
    pub fn right_extreme_target(&self) -> Option<f64> {
        self.kappa_r_below_one()
            .then(|| (self.mu_high - self.mu_low) / (self.mu_high - 2.0 * self.mu_low))
    }

    /// `-1 / (kappa_l - 1)`, finite only when `kappa_l > 1`.
    pub fn left_extreme_target(&self) -> Option<f64> {
        self.kappa_l_above_one()
            .then(|| -(1.0 - self.mu_high) / (2.0 * self.mu_high - self.mu_low - 1.0))
    }

    /// Bundle maximising the probability of `R`.
    pub fn r_star(&self) -> InfluenceBundle {
        let r = self.mu_prior / self.mu_high;
        InfluenceBundle::new(1.0 - r, r)
    }

    /// Bundle maximising the probability of `L`.
    pub fn l_star(&self) -> InfluenceBundle {
        InfluenceBundle::new(
            (1.0 - self.mu_prior) / (1.0 - self.mu_low),
            (self.mu_prior - self.mu_low) / (1.0 - self.mu_low),
        )
    }

    /// Largest `q_R` without ever inducing `L`.
    pub fn r0_star(&self) -> InfluenceBundle {
        InfluenceBundle::new(
            0.0,
            (self.mu_prior - self.mu_low) / (self.mu_high - self.mu_low),
        )
    }

    /// Largest `q_L` without ever inducing `R`.
    pub fn l0_star(&self) -> InfluenceBundle {
        InfluenceBundle::new(
            (self.mu_high - self.mu_prior) / (self.mu_high - self.mu_low),
            0.0,
        )
    }

    /// Crossing of the 45 degree line with the `q_R` face. Only inside the
    /// implementable set when `R*` lies on or below the diagonal.
    pub fn crossing_bundle(&self) -> InfluenceBundle {
        let b = (self.mu_prior - self.mu_low) / (self.mu_high - 2.0 * self.mu_low);
        InfluenceBundle::new(b, b)
    }

    /// Outside option used by the coercive menu: same `q_R - q_L` as `R*`
    /// with `q_R = 0`.
    pub fn coercive_outside_option(&self) -> InfluenceBundle {
        InfluenceBundle::new(1.0 - 2.0 * self.mu_prior / self.mu_high, 0.0)
    }

    /// Relabels states and actions: `L <-> R`, beliefs `mu -> 1 - mu`.
    pub fn mirrored(&self) -> Environment {
        Environment {
            mu_low: 1.0 - self.mu_high,
            mu_prior: 1.0 - self.mu_prior,
            mu_high: 1.0 - self.mu_low,
        }
    }

    pub fn classification(&self) -> Classification {
        let two_prior = 2.0 * self.mu_prior;
        let lower = two_prior - self.mu_high;
        let upper = two_prior - (1.0 + self.mu_low);
        if lower.abs() <= tolerance::GEOMETRY {
            Classification::BoundaryBalancedUnbalanced
        } else if upper.abs() <= tolerance::GEOMETRY {
            Classification::BoundaryBalancedMirror
        } else if lower < 0.0 {
            Classification::Unbalanced
        } else if upper > 0.0 {
            Classification::MirrorUnbalanced
        } else {
            Classification::Balanced
        }
    }
}

/// Unconditional probabilities of actions `L` and `R` induced by a test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceBundle {
    pub q_l: f64,
    pub q_r: f64,
}

impl InfluenceBundle {
    pub const ORIGIN: InfluenceBundle = InfluenceBundle { q_l: 0.0, q_r: 0.0 };
    pub const EQUALIZING: InfluenceBundle = InfluenceBundle { q_l: 0.5, q_r: 0.5 };

    pub const fn new(q_l: f64, q_r: f64) -> Self {
        InfluenceBundle { q_l, q_r }
    }

    /// Probability of the default action.
    pub fn q_s(&self) -> f64 {
        1.0 - self.q_l - self.q_r
    }

    /// Slope of indirect utility for a type holding this bundle.
    pub fn tilt(&self) -> f64 {
        self.q_r - self.q_l
    }

    /// Swaps the roles of `L` and `R`.
    pub fn mirrored(&self) -> InfluenceBundle {
        InfluenceBundle::new(self.q_r, self.q_l)
    }

    pub fn distance(&self, other: &InfluenceBundle) -> f64 {
        (self.q_l - other.q_l).hypot(self.q_r - other.q_r)
    }
}

impl fmt::Display for InfluenceBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q_l, self.q_r)
    }
}

/// Orientation of `R*` and `L*` relative to the 45 degree line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `R*` above and `L*` below the diagonal.
    Balanced,
    /// Both below the diagonal.
    Unbalanced,
    /// Both above the diagonal; an unbalanced problem after relabeling.
    MirrorUnbalanced,
    /// `R*` exactly on the diagonal.
    BoundaryBalancedUnbalanced,
    /// `L*` exactly on the diagonal.
    BoundaryBalancedMirror,
}

impl Classification {
    /// Whether the balanced solver applies (boundaries included).
    pub fn solves_as_balanced(self) -> bool {
        matches!(
            self,
            Classification::Balanced
                | Classification::BoundaryBalancedUnbalanced
                | Classification::BoundaryBalancedMirror
        )
    }

    pub fn is_boundary(self) -> bool {
        matches!(
            self,
            Classification::BoundaryBalancedUnbalanced | Classification::BoundaryBalancedMirror
        )
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Balanced => "balanced",
            Classification::Unbalanced => "unbalanced",
            Classification::MirrorUnbalanced => "mirror-unbalanced",
            Classification::BoundaryBalancedUnbalanced => "boundary balanced/unbalanced",
            Classification::BoundaryBalancedMirror => "boundary balanced/mirror",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremePoints {
    pub origin: InfluenceBundle,
    pub r0_star: InfluenceBundle,
    pub r_star: InfluenceBundle,
    pub l_star: InfluenceBundle,
    pub l0_star: InfluenceBundle,
}

impl ExtremePoints {
    /// Vertices in counter-clockwise order starting at the origin.
    pub fn named(&self) -> [(&'static str, InfluenceBundle); 5] {
        [
            ("origin", self.origin),
            ("L0star", self.l0_star),
            ("Lstar", self.l_star),
            ("Rstar", self.r_star),
            ("R0star", self.r0_star),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolytopeGeometry {
    pub kappa_l: f64,
    pub kappa_r: f64,
    pub extreme_points: ExtremePoints,
    pub classification: Classification,
}

pub fn geometry(env: &Environment) -> PolytopeGeometry {
    PolytopeGeometry {
        kappa_l: env.kappa_l(),
        kappa_r: env.kappa_r(),
        extreme_points: ExtremePoints {
            origin: InfluenceBundle::ORIGIN,
            r0_star: env.r0_star(),
            r_star: env.r_star(),
            l_star: env.l_star(),
            l0_star: env.l0_star(),
        },
        classification: env.classification(),
    }
}

/// Slack of each implementability constraint, `rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub inside: bool,
    /// `1 - q_L - q_R`.
    pub total: f64,
    /// Slack of the face with slope `kappa_l`.
    pub left_face: f64,
    /// Slack of the face with slope `kappa_r`.
    pub right_face: f64,
    pub q_l: f64,
    pub q_r: f64,
}

impl Membership {
    /// Name of the most violated constraint, if any.
    pub fn violated(&self) -> Option<&'static str> {
        let candidates = [
            (self.q_l, "q_L >= 0"),
            (self.q_r, "q_R >= 0"),
            (self.total, "q_L + q_R <= 1"),
            (self.left_face, "left face"),
            (self.right_face, "right face"),
        ];
        candidates
            .iter()
            .filter(|(s, _)| *s < -tolerance::GEOMETRY)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, name)| *name)
    }

    /// Constraints holding with equality.
    pub fn binding(&self) -> Vec<&'static str> {
        [
            (self.total, "total"),
            (self.left_face, "left_face"),
            (self.right_face, "right_face"),
        ]
        .iter()
        .filter(|(s, _)| s.abs() <= tolerance::GEOMETRY)
        .map(|(_, n)| *n)
        .collect()
    }
}

/// Tests the three implementability inequalities plus nonnegativity.
pub fn contains(env: &Environment, b: &InfluenceBundle) -> Membership {
    let (lo, pr, hi) = (env.mu_low, env.mu_prior, env.mu_high);
    let total = 1.0 - b.q_l - b.q_r;
    let left_face = (hi - pr) - (b.q_l * (hi - lo) - b.q_r * (1.0 - hi));
    let right_face = (pr - lo) - (-lo * b.q_l + (hi - lo) * b.q_r);
    let mut m = Membership {
        inside: false,
        total,
        left_face,
        right_face,
        q_l: b.q_l,
        q_r: b.q_r,
    };
    m.inside = m.violated().is_none();
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn rejects_disordered_thresholds() {
        assert_eq!(
            Environment::new(0.5, 0.5, 2.0 / 3.0),
            Err(Error::InvalidEnvironment("mu_low < mu_prior"))
        );
        assert!(Environment::new(0.25, 0.7, 2.0 / 3.0).is_err());
        assert!(Environment::new(-0.1, 0.3, 0.6).is_err());
        assert!(Environment::new(0.1, 0.3, 1.2).is_err());
        assert!(Environment::new(f64::NAN, 0.3, 0.6).is_err());
    }

    #[test]
    fn balanced_worked_geometry() {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        let g = geometry(&env);
        let r = g.extreme_points.r_star;
        let l = g.extreme_points.l_star;
        assert!(close(r.q_l, 0.25) && close(r.q_r, 0.75));
        assert!(close(l.q_l, 2.0 / 3.0) && close(l.q_r, 1.0 / 3.0));
        assert!(close(g.kappa_r, 0.6) && close(g.kappa_l, 1.25));
        assert_eq!(g.classification, Classification::Balanced);
    }

    #[test]
    fn unbalanced_worked_geometry() {
        let env = Environment::new(0.25, 0.3, 2.0 / 3.0).unwrap();
        let g = geometry(&env);
        let r = g.extreme_points.r_star;
        let l = g.extreme_points.l_star;
        assert!(close(r.q_l, 0.55) && close(r.q_r, 0.45));
        assert!(close(l.q_l, 14.0 / 15.0) && close(l.q_r, 1.0 / 15.0));
        assert_eq!(g.classification, Classification::Unbalanced);
        let b = env.crossing_bundle();
        assert!(close(b.q_l, 0.3));
        assert!(contains(&env, &b).inside);
    }

    #[test]
    fn boundary_classification() {
        let env = Environment::new(0.25, 1.0 / 3.0, 2.0 / 3.0).unwrap();
        assert_eq!(
            env.classification(),
            Classification::BoundaryBalancedUnbalanced
        );
        let r = env.r_star();
        assert!(close(r.q_l, r.q_r));
        let mirror = Environment::new(0.2, 0.6, 0.7).unwrap();
        assert_eq!(
            mirror.classification(),
            Classification::BoundaryBalancedMirror
        );
        let mu = Environment::new(1.0 / 3.0, 0.7, 0.75).unwrap();
        assert_eq!(mu.classification(), Classification::MirrorUnbalanced);
    }

    #[test]
    fn kappa_edge_cases() {
        let env = Environment::new(0.0, 0.5, 1.0).unwrap();
        assert!(env.kappa_l().is_infinite());
        assert_eq!(env.kappa_r(), 0.0);
        assert!(env.kappa_l_above_one());
        assert_eq!(env.left_extreme_target(), Some(-0.0));
    }

    #[test]
    fn membership_examples() {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        let origin = contains(&env, &InfluenceBundle::ORIGIN);
        assert!(origin.inside);
        assert!(origin.total > 0.0 && origin.left_face > 0.0 && origin.right_face > 0.0);

        let r = contains(&env, &env.r_star());
        assert!(r.inside);
        assert_eq!(r.binding(), vec!["total", "right_face"]);

        let out = contains(&env, &InfluenceBundle::new(0.9, 0.9));
        assert!(!out.inside);
        assert_eq!(out.violated(), Some("q_L + q_R <= 1"));
    }

    #[test]
    fn mirrored_environment() {
        let env = Environment::new(1.0 / 3.0, 0.7, 0.75).unwrap();
        let m = env.mirrored();
        assert!(close(m.mu_low(), 0.25));
        assert!(close(m.mu_prior(), 0.3));
        assert!(close(m.mu_high(), 1.0 / 3.0 + 1.0 / 3.0));
        assert_eq!(m.classification(), Classification::Unbalanced);
    }
}
