//! Sender-type distributions, virtual types and screening cutoffs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Environment;
use crate::root::bisect_increasing;
use crate::tolerance;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Uniform,
    /// Knots `(t, F(t))`, strictly increasing in both coordinates, from
    /// `(low, 0)` to `(high, 1)`.
    PiecewiseLinear(Vec<(f64, f64)>),
    /// User evaluators. `flipped` evaluates the mirror image `t -> 1 - t`.
    Custom {
        cdf: Evaluator,
        pdf: Evaluator,
        flipped: bool,
    },
}

/// Distribution of the sender's type on `[low, high]` with a positive
/// density.
#[derive(Clone)]
pub struct TypeDistribution {
    low: f64,
    high: f64,
    shape: Shape,
}

impl fmt::Debug for TypeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.shape {
            Shape::Uniform => "Uniform".to_string(),
            Shape::PiecewiseLinear(k) => format!("PiecewiseLinear({k:?})"),
            Shape::Custom { flipped, .. } => format!("Custom(flipped={flipped})"),
        };
        write!(f, "TypeDistribution[{}, {}] {kind}", self.low, self.high)
    }
}

fn check_support(low: f64, high: f64) -> Result<()> {
    if !(low.is_finite() && high.is_finite() && low < high) {
        return Err(Error::Distribution(format!("bad support [{low}, {high}]")));
    }
    Ok(())
}

impl TypeDistribution {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        check_support(low, high)?;
        Ok(TypeDistribution {
            low,
            high,
            shape: Shape::Uniform,
        })
    }

    /// CDF interpolating `knots` linearly. The first knot must have `F = 0`,
    /// the last `F = 1`, and both coordinates must strictly increase.
    pub fn piecewise_linear_cdf(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Distribution("need at least two knots".into()));
        }
        let (low, f0) = knots[0];
        let (high, f1) = knots[knots.len() - 1];
        check_support(low, high)?;
        if f0 != 0.0 || f1 != 1.0 {
            return Err(Error::Distribution(
                "first knot must have F = 0 and last F = 1".into(),
            ));
        }
        for w in knots.windows(2) {
            let ((t0, p0), (t1, p1)) = (w[0], w[1]);
            if !(t1 > t0) || !t1.is_finite() {
                return Err(Error::Distribution(
                    "knot types must strictly increase".into(),
                ));
            }
            if !(p1 > p0) {
                return Err(Error::Distribution(
                    "CDF must strictly increase between knots (density > 0)".into(),
                ));
            }
        }
        Ok(TypeDistribution {
            low,
            high,
            shape: Shape::PiecewiseLinear(knots),
        })
    }

    /// Distribution given by evaluators, validated on a 1000-point grid:
    /// endpoint values, monotone CDF, positive density, and agreement of the
    /// CDF with the integrated density on a spread of subintervals.
    pub fn custom<C, P>(low: f64, high: f64, cdf: C, pdf: P) -> Result<Self>
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_support(low, high)?;
        let dist = TypeDistribution {
            low,
            high,
            shape: Shape::Custom {
                cdf: Arc::new(cdf),
                pdf: Arc::new(pdf),
                flipped: false,
            },
        };
        dist.validate_evaluators()?;
        Ok(dist)
    }

    fn validate_evaluators(&self) -> Result<()> {
        let (lo, hi) = (self.low, self.high);
        if self.raw_cdf(lo).abs() > 1e-9 || (self.raw_cdf(hi) - 1.0).abs() > 1e-9 {
            return Err(Error::Distribution(
                "CDF must run from 0 to 1 on the support".into(),
            ));
        }
        let grid = 1000;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=grid {
            let t = lo + (hi - lo) * k as f64 / grid as f64;
            let f = self.raw_cdf(t);
            let d = self.pdf(t);
            if !(f.is_finite() && d.is_finite()) {
                return Err(Error::Distribution(format!("non-finite evaluation at {t}")));
            }
            if f < prev {
                return Err(Error::Distribution(format!("CDF decreases near {t}")));
            }
            if !(d > 0.0) {
                return Err(Error::Distribution(format!("density not positive at {t}")));
            }
            prev = f;
        }
        // Low-discrepancy subintervals; deterministic so construction is pure.
        let golden = 0.618_033_988_749_894_9;
        for k in 1..=20 {
            let u = (k as f64 * golden).fract();
            let v = (k as f64 * golden * golden).fract();
            let (a, b) = (lo + (hi - lo) * u.min(v), lo + (hi - lo) * u.max(v));
            let integral = self.integrate(|t| self.pdf(t), a, b);
            let diff = self.raw_cdf(b) - self.raw_cdf(a) - integral;
            if diff.abs() > 1e-6 {
                return Err(Error::Distribution(format!(
                    "CDF and density disagree by {diff:e} on [{a}, {b}]"
                )));
            }
        }
        Ok(())
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.shape, Shape::Uniform)
    }

    fn raw_cdf(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Uniform => (t - self.low) / (self.high - self.low),
            Shape::PiecewiseLinear(knots) => {
                let k = knots
                    .partition_point(|&(x, _)| x <= t)
                    .clamp(1, knots.len() - 1);
                let ((t0, f0), (t1, f1)) = (knots[k - 1], knots[k]);
                f0 + (f1 - f0) * (t - t0) / (t1 - t0)
            }
            Shape::Custom { cdf, flipped, .. } => {
                if *flipped {
                    1.0 - cdf(1.0 - t)
                } else {
                    cdf(t)
                }
            }
        }
    }

    /// `F(t)`, clamped to `[0, 1]` and to 0/1 outside the support.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.low {
            0.0
        } else if t >= self.high {
            1.0
        } else {
            self.raw_cdf(t).clamp(0.0, 1.0)
        }
    }

    /// Density on the support; right-continuous at interior knots.
    pub fn pdf(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Uniform => 1.0 / (self.high - self.low),
            Shape::PiecewiseLinear(knots) => {
                let k = knots
                    .partition_point(|&(x, _)| x <= t)
                    .clamp(1, knots.len() - 1);
                let ((t0, f0), (t1, f1)) = (knots[k - 1], knots[k]);
                (f1 - f0) / (t1 - t0)
            }
            Shape::Custom { pdf, flipped, .. } => {
                if *flipped {
                    pdf(1.0 - t)
                } else {
                    pdf(t)
                }
            }
        }
    }

    /// Probability of `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }

    /// `F^-1(p)`: closed form for the built-in shapes, bisection otherwise.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Distribution(format!(
                "quantile level {p} outside [0, 1]"
            )));
        }
        match &self.shape {
            Shape::Uniform => Ok(self.low + p * (self.high - self.low)),
            Shape::PiecewiseLinear(knots) => {
                let k = knots
                    .partition_point(|&(_, f)| f <= p)
                    .clamp(1, knots.len() - 1);
                let ((t0, f0), (t1, f1)) = (knots[k - 1], knots[k]);
                Ok(t0 + (t1 - t0) * (p - f0) / (f1 - f0))
            }
            Shape::Custom { .. } => bisect_increasing(
                |t| self.cdf(t),
                p,
                self.low,
                self.high,
                tolerance::ROOT * 1e-2,
            )
            .map_err(|e| Error::Distribution(format!("CDF inversion at {p} failed: {e}"))),
        }
    }

    /// Breakpoints between which the CDF is affine, for the built-in shapes.
    pub fn affine_pieces(&self) -> Option<Vec<f64>> {
        match &self.shape {
            Shape::Uniform => Some(vec![self.low, self.high]),
            Shape::PiecewiseLinear(knots) => Some(knots.iter().map(|k| k.0).collect()),
            Shape::Custom { .. } => None,
        }
    }

    /// `\int_a^b t dF(t)`, exact for the built-in shapes.
    pub fn partial_mean(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.low);
        let b = b.min(self.high);
        if !(b > a) {
            return 0.0;
        }
        match self.affine_pieces() {
            Some(points) => {
                let mut cuts: Vec<f64> = vec![a];
                cuts.extend(points.into_iter().filter(|&x| x > a && x < b));
                cuts.push(b);
                cuts.windows(2)
                    .map(|w| self.pdf(0.5 * (w[0] + w[1])) * 0.5 * (w[1] * w[1] - w[0] * w[0]))
                    .sum()
            }
            None => self.integrate(|t| t * self.pdf(t), a, b),
        }
    }

    pub fn mean(&self) -> f64 {
        self.partial_mean(self.low, self.high)
    }

    /// Adaptive Simpson quadrature at [`tolerance::QUADRATURE`].
    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        adaptive_simpson(&f, a, b, tolerance::QUADRATURE)
    }

    fn check_in_support(&self, theta: f64) -> Result<()> {
        if theta < self.low - tolerance::GEOMETRY || theta > self.high + tolerance::GEOMETRY {
            return Err(Error::OutsideSupport {
                theta,
                low: self.low,
                high: self.high,
            });
        }
        Ok(())
    }

    fn density_at(&self, theta: f64) -> Result<f64> {
        self.check_in_support(theta)?;
        let f = self.pdf(theta);
        if !(f > 0.0) {
            return Err(Error::Distribution(format!(
                "density {f} at {theta} is not positive"
            )));
        }
        Ok(f)
    }

    /// `theta - (1 - F) / f`: virtual type when downward deviations bind.
    pub fn virtual_plus(&self, theta: f64) -> Result<f64> {
        let f = self.density_at(theta)?;
        Ok(theta - (1.0 - self.cdf(theta)) / f)
    }

    /// `theta + F / f`: virtual type when upward deviations bind.
    pub fn virtual_minus(&self, theta: f64) -> Result<f64> {
        let f = self.density_at(theta)?;
        Ok(theta + self.cdf(theta) / f)
    }

    /// Distribution of `1 - theta`.
    pub fn mirrored(&self) -> TypeDistribution {
        let shape = match &self.shape {
            Shape::Uniform => Shape::Uniform,
            Shape::PiecewiseLinear(knots) => Shape::PiecewiseLinear(
                knots
                    .iter()
                    .rev()
                    .map(|&(t, f)| (1.0 - t, 1.0 - f))
                    .collect(),
            ),
            Shape::Custom { cdf, pdf, flipped } => Shape::Custom {
                cdf: cdf.clone(),
                pdf: pdf.clone(),
                flipped: !flipped,
            },
        };
        TypeDistribution {
            low: 1.0 - self.high,
            high: 1.0 - self.low,
            shape,
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if !(b > a) {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Grid point where a virtual type fails to increase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityWitness {
    pub which: &'static str,
    pub theta: f64,
    pub next_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// Both virtual types strictly increasing on the grid.
    pub a1_ok: bool,
    pub a1_witness: Option<MonotonicityWitness>,
    /// Neutral type inside the support and extreme types bounded.
    pub a2_ok: bool,
    pub neutral_inside: bool,
    pub left_bound_ok: bool,
    pub right_bound_ok: bool,
    /// Every type is moderate (`[low, high]` inside `[0, 1]`); coercion
    /// cannot raise revenue.
    pub all_moderate: bool,
    pub grid: usize,
}

impl AssumptionReport {
    pub fn require_a1(&self) -> Result<()> {
        match self.a1_witness {
            Some(w) if !self.a1_ok => Err(Error::IroningUnsupported {
                which: w.which,
                at: w.theta,
            }),
            _ => Ok(()),
        }
    }

    pub fn require_a2(&self) -> Result<()> {
        if self.a2_ok {
            return Ok(());
        }
        let mut failed = Vec::new();
        if !self.neutral_inside {
            failed.push("support must contain the neutral type 1/2");
        }
        if !self.left_bound_ok {
            failed.push("lowest type too extreme for the L* face");
        }
        if !self.right_bound_ok {
            failed.push("highest type too extreme for the R* face");
        }
        Err(Error::TypeBounds(failed.join("; ")))
    }
}

pub fn check_assumptions(dist: &TypeDistribution, env: &Environment) -> AssumptionReport {
    check_assumptions_on(dist, env, tolerance::ASSUMPTION_GRID)
}

/// [`check_assumptions`] with an explicit monotonicity grid size.
pub fn check_assumptions_on(
    dist: &TypeDistribution,
    env: &Environment,
    grid: usize,
) -> AssumptionReport {
    let grid = grid.max(2);
    let (lo, hi) = (dist.low(), dist.high());
    let mut witness = None;
    let mut prev: Option<(f64, f64, f64)> = None;
    for k in 0..grid {
        let t = lo + (hi - lo) * k as f64 / (grid - 1) as f64;
        let plus = dist.virtual_plus(t).unwrap_or(f64::NAN);
        let minus = dist.virtual_minus(t).unwrap_or(f64::NAN);
        if let Some((pt, pp, pm)) = prev {
            if !(plus > pp) {
                witness = Some(MonotonicityWitness {
                    which: "phi_plus",
                    theta: pt,
                    next_theta: t,
                });
            } else if !(minus > pm) {
                witness = Some(MonotonicityWitness {
                    which: "phi_minus",
                    theta: pt,
                    next_theta: t,
                });
            }
            if witness.is_some() {
                break;
            }
        }
        prev = Some((t, plus, minus));
    }

    let neutral_inside = lo < 0.5 && 0.5 < hi;
    let (mu_l, mu_h) = (env.mu_low(), env.mu_high());
    // lo > -1/(kappa_l - 1), multiplied through by (1 - mu_high) > 0.
    let left_bound_ok =
        !env.kappa_l_above_one() || lo * (2.0 * mu_h - mu_l - 1.0) + (1.0 - mu_h) > 0.0;
    // hi < 1/(1 - kappa_r), multiplied through by (mu_high - mu_low) > 0.
    let right_bound_ok = !env.kappa_r_below_one() || hi * (mu_h - 2.0 * mu_l) < mu_h - mu_l;

    AssumptionReport {
        a1_ok: witness.is_none(),
        a1_witness: witness,
        a2_ok: neutral_inside && left_bound_ok && right_bound_ok,
        neutral_inside,
        left_bound_ok,
        right_bound_ok,
        all_moderate: lo >= 0.0 && hi <= 1.0,
        grid,
    }
}

/// Cutoff types of the screening menus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `phi_minus = 1/2`: switch from `L*` to the next bundle.
    pub theta_star: f64,
    /// `phi_plus = 1/2`: switch from the equalizing bundle to `R*`.
    pub theta_star_star_b: f64,
    /// `phi_minus = 1/(1 - kappa_r)`, or the top type when not attained.
    pub theta_star_star_u: f64,
    /// `phi_plus = 1/(1 - kappa_r)` inside the support.
    pub theta_dagger: Option<f64>,
    /// `phi_minus = -1/(kappa_l - 1)` inside the support.
    pub theta_double_dagger: Option<f64>,
}

pub fn solve_thresholds(dist: &TypeDistribution, env: &Environment) -> Result<Thresholds> {
    solve_thresholds_on(dist, env, tolerance::ASSUMPTION_GRID)
}

/// [`solve_thresholds`] with an explicit monotonicity grid size.
pub fn solve_thresholds_on(
    dist: &TypeDistribution,
    env: &Environment,
    grid: usize,
) -> Result<Thresholds> {
    let report = check_assumptions_on(dist, env, grid);
    report.require_a1()?;
    if !report.neutral_inside {
        return Err(Error::TypeBounds(format!(
            "support [{}, {}] must contain the neutral type 1/2",
            dist.low(),
            dist.high()
        )));
    }
    let (lo, hi) = (dist.low(), dist.high());
    let minus = |t: f64| dist.virtual_minus(t).unwrap_or(f64::NAN);
    let plus = |t: f64| dist.virtual_plus(t).unwrap_or(f64::NAN);
    let tol = tolerance::ROOT;

    let theta_star = bisect_increasing(minus, 0.5, lo, 0.5, tol)?;
    let theta_star_star_b = bisect_increasing(plus, 0.5, 0.5, hi, tol)?;

    let right_target = env.right_extreme_target();
    let theta_star_star_u = match right_target {
        Some(target) if minus(hi) >= target => bisect_increasing(minus, target, lo, hi, tol)?,
        _ => hi,
    };
    let theta_dagger = match right_target {
        Some(target) if hi > target => Some(bisect_increasing(plus, target, 0.5, hi, tol)?),
        _ => None,
    };
    let theta_double_dagger = match env.left_extreme_target() {
        Some(target) if lo < target => Some(bisect_increasing(minus, target, lo, 0.5, tol)?),
        _ => None,
    };
    Ok(Thresholds {
        theta_star,
        theta_star_star_b,
        theta_star_star_u,
        theta_dagger,
        theta_double_dagger,
    })
}
