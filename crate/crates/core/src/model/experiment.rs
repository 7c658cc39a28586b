use std::fmt;

use serde::{Deserialize, Serialize};

use super::environment::{contains, Environment, InfluenceBundle};
use crate::error::{Error, Result};
use crate::root::bisect_increasing;
use crate::tolerance;

/// Atoms with probability at or below this are dropped.
const NEGLIGIBLE_MASS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    L,
    S,
    R,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::L, Action::S, Action::R];

    pub fn index(self) -> usize {
        match self {
            Action::L => 0,
            Action::S => 1,
            Action::R => 2,
        }
    }

    /// Receiver payoff from taking this action at `posterior`.
    pub fn receiver_payoff(self, env: &Environment, posterior: f64) -> f64 {
        match self {
            Action::L => env.mu_low() - posterior,
            Action::S => 0.0,
            Action::R => posterior - env.mu_high(),
        }
    }

    /// Whether a receiver holding `posterior` is willing to take the action.
    pub fn is_obedient(self, env: &Environment, posterior: f64) -> bool {
        let tol = tolerance::GEOMETRY;
        match self {
            Action::L => posterior <= env.mu_low() + tol,
            Action::S => posterior >= env.mu_low() - tol && posterior <= env.mu_high() + tol,
            Action::R => posterior >= env.mu_high() - tol,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::L => "L",
            Action::S => "S",
            Action::R => "R",
        })
    }
}

/// One recommendation of an obedient decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub posterior: f64,
    pub prob: f64,
    pub action: Action,
}

impl Atom {
    pub fn new(posterior: f64, prob: f64, action: Action) -> Self {
        Atom {
            posterior,
            prob,
            action,
        }
    }
}

/// A Bayes-plausible distribution of posteriors, each tagged with the
/// action the receiver is recommended (and willing) to take.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    atoms: Vec<Atom>,
}

impl Experiment {
    /// Drops null atoms and checks total mass, Bayes plausibility and
    /// obedience against `env`.
    pub fn new(env: &Environment, atoms: Vec<Atom>) -> Result<Self> {
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .filter(|a| a.prob > NEGLIGIBLE_MASS)
            .collect();
        let e = Experiment { atoms };
        e.validate(env)?;
        Ok(e)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn validate(&self, env: &Environment) -> Result<()> {
        let tol = tolerance::GEOMETRY;
        for a in &self.atoms {
            if !(a.prob >= 0.0 && a.prob <= 1.0 + tol) {
                return Err(Error::InvalidExperiment(format!(
                    "probability {} out of range",
                    a.prob
                )));
            }
            if !(a.posterior >= -tol && a.posterior <= 1.0 + tol) {
                return Err(Error::InvalidExperiment(format!(
                    "posterior {} out of range",
                    a.posterior
                )));
            }
        }
        let mass: f64 = self.atoms.iter().map(|a| a.prob).sum();
        if (mass - 1.0).abs() > tol {
            return Err(Error::InvalidExperiment(format!(
                "probabilities sum to {mass}"
            )));
        }
        let mean: f64 = self.atoms.iter().map(|a| a.prob * a.posterior).sum();
        if (mean - env.mu_prior()).abs() > tol {
            return Err(Error::InvalidExperiment(format!(
                "posteriors average to {mean}, prior is {}",
                env.mu_prior()
            )));
        }
        if let Some(a) = self
            .atoms
            .iter()
            .find(|a| !a.action.is_obedient(env, a.posterior))
        {
            return Err(Error::InvalidExperiment(format!(
                "recommendation {} at posterior {} is not obeyed",
                a.action, a.posterior
            )));
        }
        Ok(())
    }

    /// Unconditional action probabilities.
    pub fn bundle(&self) -> InfluenceBundle {
        let mut b = InfluenceBundle::ORIGIN;
        for a in &self.atoms {
            match a.action {
                Action::L => b.q_l += a.prob,
                Action::R => b.q_r += a.prob,
                Action::S => {}
            }
        }
        b
    }

    /// Probability of each recommendation conditional on the state,
    /// `kernel[state][action]` with state 0 first. Recovered by Bayes'
    /// rule from the posteriors.
    pub fn kernel(&self, prior: f64) -> Result<[[f64; 3]; 2]> {
        if !(prior > 0.0 && prior < 1.0) {
            return Err(Error::DegeneratePrior(prior));
        }
        let mut k = [[0.0; 3]; 2];
        for a in &self.atoms {
            let i = a.action.index();
            k[1][i] += a.prob * a.posterior / prior;
            k[0][i] += a.prob * (1.0 - a.posterior) / (1.0 - prior);
        }
        Ok(k)
    }

    /// Reveals nothing; the receiver keeps the default action.
    pub fn uninformative(env: &Environment) -> Experiment {
        Experiment {
            atoms: vec![Atom::new(env.mu_prior(), 1.0, Action::S)],
        }
    }

    /// Reveals the state.
    pub fn full_information(env: &Environment) -> Experiment {
        let p = env.mu_prior();
        Experiment {
            atoms: vec![
                Atom::new(0.0, 1.0 - p, Action::L),
                Atom::new(1.0, p, Action::R),
            ],
        }
    }
}

/// Sender's willingness to pay, `(1 - theta) q_L + theta q_R`.
pub fn sender_value(b: &InfluenceBundle, theta: f64) -> f64 {
    (1.0 - theta) * b.q_l + theta * b.q_r
}

/// Receiver's expected payoff net of the default action.
pub fn receiver_value(env: &Environment, e: &Experiment) -> Result<f64> {
    e.validate(env)?;
    Ok(e.atoms
        .iter()
        .map(|a| a.prob * a.action.receiver_payoff(env, a.posterior))
        .sum())
}

/// Canonical experiment implementing `b`: posteriors
/// `(t mu_low, (1-t) mu_low + t mu_high, (1-t) mu_high + t)` for actions
/// `L, S, R`, with `t` chosen by bisection so the posteriors average to the
/// prior.
pub fn bundle_to_experiment(env: &Environment, b: &InfluenceBundle) -> Result<Experiment> {
    let m = contains(env, b);
    if let Some(constraint) = m.violated() {
        return Err(Error::NotImplementable {
            q_l: b.q_l,
            q_r: b.q_r,
            constraint,
        });
    }
    let q_l = b.q_l.max(0.0);
    let q_r = b.q_r.max(0.0);
    let q_s = (1.0 - q_l - q_r).max(0.0);
    let (lo, hi) = (env.mu_low(), env.mu_high());
    let posteriors = |t: f64| (t * lo, (1.0 - t) * lo + t * hi, (1.0 - t) * hi + t);
    let mean = |t: f64| {
        let (pl, ps, pr) = posteriors(t);
        q_l * pl + q_s * ps + q_r * pr
    };
    let prior = env.mu_prior();
    // Membership allows a sliver of slack, so clamp the bracket ends.
    let t = if mean(0.0) >= prior {
        0.0
    } else if mean(1.0) <= prior {
        1.0
    } else {
        bisect_increasing(mean, prior, 0.0, 1.0, tolerance::ROOT * 1e-2)?
    };
    let (pl, ps, pr) = posteriors(t);
    Experiment::new(
        env,
        vec![
            Atom::new(pl, q_l, Action::L),
            Atom::new(ps, q_s, Action::S),
            Atom::new(pr, q_r, Action::R),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced() -> Environment {
        Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap()
    }

    fn unbalanced() -> Environment {
        Environment::new(0.25, 0.3, 2.0 / 3.0).unwrap()
    }

    fn assert_atoms(e: &Experiment, expected: &[(f64, f64, Action)]) {
        assert_eq!(e.atoms().len(), expected.len(), "{e:?}");
        for (a, (post, prob, act)) in e.atoms().iter().zip(expected) {
            assert!((a.posterior - post).abs() < 1e-12, "{a:?}");
            assert!((a.prob - prob).abs() < 1e-12, "{a:?}");
            assert_eq!(a.action, *act);
        }
    }

    #[test]
    fn three_atom_bundle_on_right_face() {
        let env = unbalanced();
        let e = bundle_to_experiment(&env, &InfluenceBundle::new(0.3, 0.3)).unwrap();
        assert_atoms(
            &e,
            &[
                (0.0, 0.3, Action::L),
                (0.25, 0.4, Action::S),
                (2.0 / 3.0, 0.3, Action::R),
            ],
        );
        let mean: f64 = e.atoms().iter().map(|a| a.prob * a.posterior).sum();
        assert!((mean - 0.3).abs() < 1e-15);
    }

    #[test]
    fn origin_is_uninformative() {
        let env = balanced();
        let e = bundle_to_experiment(&env, &InfluenceBundle::ORIGIN).unwrap();
        assert_atoms(&e, &[(0.5, 1.0, Action::S)]);
        assert_eq!(receiver_value(&env, &e).unwrap(), 0.0);
    }

    #[test]
    fn r_star_drops_safe_atom() {
        let env = balanced();
        let e = bundle_to_experiment(&env, &env.r_star()).unwrap();
        assert_atoms(&e, &[(0.0, 0.25, Action::L), (2.0 / 3.0, 0.75, Action::R)]);
    }

    #[test]
    fn l_star_value_for_receiver() {
        let env = balanced();
        let e = bundle_to_experiment(&env, &env.l_star()).unwrap();
        assert_atoms(
            &e,
            &[(0.25, 2.0 / 3.0, Action::L), (1.0, 1.0 / 3.0, Action::R)],
        );
        assert!((receiver_value(&env, &e).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn full_information_value() {
        let env = balanced();
        let e = Experiment::full_information(&env);
        assert!((receiver_value(&env, &e).unwrap() - 7.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn infeasible_bundle_names_constraint() {
        let env = balanced();
        let err = bundle_to_experiment(&env, &InfluenceBundle::new(0.9, 0.9)).unwrap_err();
        assert!(
            matches!(err, Error::NotImplementable { constraint, .. } if constraint.contains("q_L + q_R"))
        );
        let err = bundle_to_experiment(&env, &InfluenceBundle::new(0.0, 0.7)).unwrap_err();
        assert!(
            matches!(err, Error::NotImplementable { constraint, .. } if constraint.contains("right face"))
        );
    }

    #[test]
    fn disobedient_experiment_rejected() {
        let env = balanced();
        let atoms = vec![
            Atom::new(0.4, 0.5, Action::L),
            Atom::new(0.6, 0.5, Action::R),
        ];
        assert!(Experiment::new(&env, atoms).is_err());
        let bogus = Experiment {
            atoms: vec![
                Atom::new(0.4, 0.5, Action::L),
                Atom::new(0.6, 0.5, Action::R),
            ],
        };
        assert!(receiver_value(&env, &bogus).is_err());
    }

    #[test]
    fn sender_values() {
        let half = InfluenceBundle::EQUALIZING;
        for theta in [-1.0, 0.0, 0.3, 2.0] {
            assert!((sender_value(&half, theta) - 0.5).abs() < 1e-15);
        }
        let env = balanced();
        assert!((sender_value(&env.l_star(), 0.25) - 7.0 / 12.0).abs() < 1e-15);
        assert!((sender_value(&unbalanced().r_star(), 1.0) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn kernel_requires_interior_prior() {
        let env = balanced();
        let e = Experiment::full_information(&env);
        assert_eq!(e.kernel(0.0), Err(Error::DegeneratePrior(0.0)));
        assert_eq!(e.kernel(1.0), Err(Error::DegeneratePrior(1.0)));
        let k = e.kernel(0.5).unwrap();
        assert_eq!(k, [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    }
}
