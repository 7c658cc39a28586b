use serde::{Deserialize, Serialize};

use super::environment::Environment;
use super::experiment::Experiment;
use crate::error::Result;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::tolerance;

/// Outcome of a garbling test. `certificate[i][j]` is the probability that
/// fine recommendation `i` is relabelled as coarse recommendation `j`
/// (order `L, S, R`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarblingVerdict {
    pub garbling: bool,
    pub certificate: Option<[[f64; 3]; 3]>,
    /// Smallest achievable L1 mismatch of the kernel identity.
    pub residual: f64,
}

fn var(i: usize, j: usize) -> usize {
    3 * i + j
}

/// Is `coarse` a garbling of `fine`? Looks for a row-stochastic `M` with
/// `kernel(coarse) = kernel(fine) M` in both states. Among all such maps the
/// one with the largest trace is returned, so an experiment garbles itself
/// through the identity.
pub fn is_garbling(
    env: &Environment,
    coarse: &Experiment,
    fine: &Experiment,
) -> Result<GarblingVerdict> {
    coarse.validate(env)?;
    fine.validate(env)?;
    let prior = env.mu_prior();
    let kc = coarse.kernel(prior)?;
    let kf = fine.kernel(prior)?;
    let used: Vec<bool> = (0..3).map(|i| kf[0][i] + kf[1][i] > 0.0).collect();

    // Variables: 9 entries of M, then a positive and negative mismatch for
    // each of the 6 kernel equations.
    let n = 9 + 12;
    let build = |sense: Sense| {
        let mut lp = LinearProgram::new(sense, n);
        for i in 0..3 {
            if used[i] {
                lp.add_constraint(
                    (0..3).map(|j| (var(i, j), 1.0)).collect(),
                    Relation::Eq,
                    1.0,
                );
            } else {
                for j in 0..3 {
                    let v = if i == j { 1.0 } else { 0.0 };
                    lp.add_constraint(vec![(var(i, j), 1.0)], Relation::Eq, v);
                }
            }
        }
        for s in 0..2 {
            for j in 0..3 {
                let e = 9 + 2 * (3 * s + j);
                let mut row: Vec<(usize, f64)> = (0..3)
                    .filter(|&i| kf[s][i] != 0.0)
                    .map(|i| (var(i, j), kf[s][i]))
                    .collect();
                row.push((e, 1.0));
                row.push((e + 1, -1.0));
                lp.add_constraint(row, Relation::Eq, kc[s][j]);
            }
        }
        lp
    };

    let mut fit = build(Sense::Minimize);
    fit.objective[9..].iter_mut().for_each(|c| *c = 1.0);
    let residual = fit.solve()?.objective.max(0.0);
    if residual > tolerance::FEASIBILITY {
        return Ok(GarblingVerdict {
            garbling: false,
            certificate: None,
            residual,
        });
    }

    let mut pick = build(Sense::Maximize);
    for i in 0..3 {
        pick.objective[var(i, i)] = 1.0;
    }
    pick.add_constraint(
        (9..n).map(|k| (k, 1.0)).collect(),
        Relation::Le,
        residual + tolerance::FEASIBILITY * 1e-3,
    );
    let x = pick.solve()?.x;
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = x[var(i, j)].max(0.0);
        }
    }
    Ok(GarblingVerdict {
        garbling: true,
        certificate: Some(m),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bundle_to_experiment, InfluenceBundle};

    fn unbalanced() -> Environment {
        Environment::new(0.25, 0.3, 2.0 / 3.0).unwrap()
    }

    #[test]
    fn crossing_bundle_garbles_r_star() {
        let env = unbalanced();
        let b = bundle_to_experiment(&env, &env.crossing_bundle()).unwrap();
        let r = bundle_to_experiment(&env, &env.r_star()).unwrap();
        let v = is_garbling(&env, &b, &r).unwrap();
        assert!(v.garbling);
        let m = v.certificate.unwrap();
        assert!((m[0][1] - 5.0 / 11.0).abs() < 1e-9, "{m:?}");
        assert!((m[2][1] - 1.0 / 3.0).abs() < 1e-9, "{m:?}");
        assert!(!is_garbling(&env, &r, &b).unwrap().garbling);
    }

    #[test]
    fn reflexive_through_identity() {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        let e = bundle_to_experiment(&env, &InfluenceBundle::new(0.3, 0.2)).unwrap();
        let v = is_garbling(&env, &e, &e).unwrap();
        let m = v.certificate.unwrap();
        for (i, row) in m.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert!((x - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn information_cannot_be_created() {
        let env = Environment::new(0.25, 0.5, 2.0 / 3.0).unwrap();
        let full = Experiment::full_information(&env);
        let none = Experiment::uninformative(&env);
        assert!(!is_garbling(&env, &full, &none).unwrap().garbling);
        assert!(is_garbling(&env, &none, &full).unwrap().garbling);
    }
}
