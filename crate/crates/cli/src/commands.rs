use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use influence::menu::willingness_to_pay;
use influence::{
    access_pricing, coercion_menu, comparative_statics, compare_to_oracle, discretize,
    extended_menu, first_best, geometry, lp_oracle, optimal_menu, solve_thresholds, verify_menu,
    welfare_comparison, Environment, InfluenceBundle, Menu, TypeDistribution,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, MenuChoice, ScenarioConfig, SweepParameter};
use crate::output::{Cell, Csv, Output};

/// A computed artifact failed its own certification; maps to exit code 4.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub env: Environment,
    pub dist: TypeDistribution,
    pub out: Output,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig, out_dir: &Path) -> Result<Self> {
        let env = cfg.env()?;
        let dist = cfg.dist()?;
        Ok(Scenario {
            env,
            dist,
            cfg,
            out: Output::new(out_dir)?,
        })
    }

    fn menu(&self) -> Result<Menu> {
        Ok(match self.cfg.solver.menu {
            MenuChoice::Optimal => optimal_menu(&self.env, &self.dist)?,
            MenuChoice::Extended => extended_menu(&self.env, &self.dist)?,
        })
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.cfg.solver.grid_size;
        let (lo, hi) = (self.dist.low(), self.dist.high());
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

#[derive(Serialize)]
struct MenuFile<'a> {
    classification: String,
    revenue: f64,
    theta0: f64,
    thresholds: Option<influence::Thresholds>,
    menu: &'a Menu,
}

pub fn solve(ctx: &Scenario) -> Result<()> {
    let menu = ctx.menu()?;
    let file = MenuFile {
        classification: ctx.env.classification().to_string(),
        revenue: menu.revenue(&ctx.dist),
        theta0: menu.theta0,
        thresholds: menu.thresholds,
        menu: &menu,
    };
    let mut csv = Csv::new(&["theta", "utility", "wtp"]);
    for t in ctx.grid() {
        csv.row(vec![
            t.into(),
            menu.indirect_utility(t)?.into(),
            willingness_to_pay(&ctx.env, t).into(),
        ]);
    }
    report(&[
        ctx.out.json("menu.json", &file)?,
        ctx.out.csv("utility.csv", &csv)?,
    ]);
    Ok(())
}

/// Reads a menu written by `solve`, or a bare menu object.
pub fn load_menu(path: &Path) -> Result<Menu> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if let Some(inner) = v.get_mut("menu") {
        v = inner.take();
    }
    let menu = serde_json::from_value(v)
        .map_err(|e| ConfigError(format!("{}: not a menu: {e}", path.display())))?;
    Ok(menu)
}

pub fn verify(ctx: &Scenario, menu_path: Option<&Path>) -> Result<()> {
    let menu = match menu_path {
        Some(p) => load_menu(p)?,
        None => ctx.menu()?,
    };
    let tol = ctx.cfg.solver.tolerances.constraint;
    let r = verify_menu(&menu, ctx.cfg.solver.grid_size);
    let passes = r.passes() && r.worst_ic_violation <= tol && r.worst_ir_violation <= tol;
    let file = json!({ "passes": passes, "tolerance": tol, "report": r });
    report(&[ctx.out.json("violations.json", &file)?]);
    if passes {
        Ok(())
    } else {
        Err(VerificationFailed(format!(
            "worst IC {} and IR {} violations, monotone {}, implementable {}",
            r.worst_ic_violation, r.worst_ir_violation, r.mon_ok, r.implementability_ok
        ))
        .into())
    }
}

pub fn oracle(ctx: &Scenario) -> Result<()> {
    let coercion = ctx.cfg.coercion;
    let n = ctx.cfg.solver.oracle_n;
    let menu = if coercion {
        coercion_menu(&ctx.env, &ctx.dist)?.menu
    } else {
        ctx.menu()?
    };
    let instance = discretize(&ctx.env, &ctx.dist, n)?;
    let sol = lp_oracle(&instance, coercion)?;
    let cmp = compare_to_oracle(&menu, &instance, &sol);
    let (ic, ir) = sol.discrete_violations();
    let tol = ctx.cfg.solver.tolerances;
    let passes = cmp.within(tol.oracle_gap) && ic <= tol.constraint && ir <= tol.constraint;
    let gap = json!({
        "n": n,
        "coercion": coercion,
        "oracle_revenue": cmp.oracle_revenue,
        "menu_revenue": cmp.menu_revenue,
        "analytic_revenue": menu.revenue(&ctx.dist),
        "gap": cmp.gap,
        "tolerance": tol.oracle_gap,
        "within_tolerance": cmp.within(tol.oracle_gap),
        "oracle_ic_violation": ic,
        "oracle_ir_violation": ir,
        "lp_residual": sol.lp_residual,
        "max_distance_away_from_knots": cmp.max_distance_away_from_knots,
        "mismatches_away_from_knots": cmp.mismatches_away_from_knots,
        "passes": passes,
    });
    let mut csv = Csv::new(&[
        "theta",
        "oracle_q_l",
        "oracle_q_r",
        "menu_q_l",
        "menu_q_r",
        "distance",
        "oracle_utility",
        "menu_utility",
        "near_knot",
    ]);
    for c in &cmp.per_type {
        let m = c.menu_bundle.unwrap_or(menu.outside_option);
        csv.row(vec![
            c.theta.into(),
            c.oracle_bundle.q_l.into(),
            c.oracle_bundle.q_r.into(),
            m.q_l.into(),
            m.q_r.into(),
            c.distance.into(),
            c.oracle_utility.into(),
            c.menu_utility.into(),
            if c.near_knot { "true" } else { "false" }.into(),
        ]);
    }
    report(&[
        ctx.out.json("oracle.json", &sol)?,
        ctx.out.json("gap.json", &gap)?,
        ctx.out.csv("oracle_types.csv", &csv)?,
    ]);
    if passes {
        Ok(())
    } else {
        Err(VerificationFailed(format!(
            "oracle gap {} (tolerance {})",
            cmp.gap, tol.oracle_gap
        ))
        .into())
    }
}

pub fn coerce(ctx: &Scenario) -> Result<()> {
    let c = coercion_menu(&ctx.env, &ctx.dist)?;
    if let Some(a) = &c.advisory {
        eprintln!("note: {a}");
    }
    report(&[ctx.out.json("coercion.json", &c)?]);
    Ok(())
}

pub fn access(ctx: &Scenario) -> Result<()> {
    let a = access_pricing(&ctx.env, &ctx.dist)?;
    // Screening needs monotone virtual types; access pricing does not.
    let screening = optimal_menu(&ctx.env, &ctx.dist)
        .ok()
        .map(|m| m.revenue(&ctx.dist));
    let file = json!({ "access": a, "screening_revenue": screening });
    report(&[ctx.out.json("access.json", &file)?]);
    Ok(())
}

pub fn welfare(ctx: &Scenario) -> Result<()> {
    let w = welfare_comparison(&ctx.env, &ctx.dist, ctx.cfg.welfare.equalizing)?;
    report(&[ctx.out.json("welfare.json", &w)?]);
    Ok(())
}

const SWEEP_HEADER: [&str; 15] = [
    "parameter",
    "value",
    "mu_prior",
    "classification",
    "theta_star",
    "theta_star_star_b",
    "theta_star_star_u",
    "revenue_screening",
    "revenue_coercive",
    "revenue_access",
    "revenue_first_best",
    "welfare_screening",
    "welfare_unmediated",
    "welfare_coercive",
    "note",
];

fn sweep_point(
    base: &Environment,
    dist: &TypeDistribution,
    ctx_cfg: &ScenarioConfig,
    parameter: SweepParameter,
    value: f64,
) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![parameter.name().into(), value.into()];
    let (mut l, mut p, mut h) = (base.mu_low(), base.mu_prior(), base.mu_high());
    match parameter {
        SweepParameter::MuLow => l = value,
        SweepParameter::MuPrior => p = value,
        SweepParameter::MuHigh => h = value,
    }
    row.push(p.into());
    let computed = (|| -> influence::Result<Vec<Cell>> {
        let env = Environment::new(l, p, h)?;
        let t = solve_thresholds(dist, &env)?;
        let screening = optimal_menu(&env, dist)?.revenue(dist);
        let coercive = coercion_menu(&env, dist)?.revenue;
        let access = access_pricing(&env, dist)?.revenue;
        let fb = first_best(&env, dist)?.revenue(dist);
        let w = welfare_comparison(&env, dist, ctx_cfg.welfare.equalizing)?;
        Ok(vec![
            env.classification().to_string().into(),
            t.theta_star.into(),
            t.theta_star_star_b.into(),
            t.theta_star_star_u.into(),
            screening.into(),
            coercive.into(),
            access.into(),
            fb.into(),
            w.screening.welfare.into(),
            w.unmediated.welfare.into(),
            w.coercive.welfare.into(),
            "".into(),
        ])
    })();
    match computed {
        Ok(cells) => row.extend(cells),
        Err(e) => {
            row.push("".into());
            row.extend((0..10).map(|_| Cell::Num(f64::NAN)));
            row.push(e.to_string().into());
        }
    }
    row
}

pub fn sweep(ctx: &Scenario) -> Result<()> {
    let s = ctx
        .cfg
        .sweep
        .ok_or_else(|| ConfigError("at `sweep`: the sweep command needs a sweep block".into()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = s.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().context("starting sweep workers")?;
    let rows: Vec<Vec<Cell>> = pool.install(|| {
        s.values()
            .par_iter()
            .map(|&v| sweep_point(&ctx.env, &ctx.dist, &ctx.cfg, s.parameter, v))
            .collect()
    });
    let mut csv = Csv::new(&SWEEP_HEADER);
    rows.into_iter().for_each(|r| csv.row(r));
    report(&[ctx.out.csv("sweep.csv", &csv)?]);
    Ok(())
}

pub fn figures(ctx: &Scenario) -> Result<()> {
    let env = &ctx.env;
    let mut written = Vec::new();

    // Implementable set and the named bundles.
    let g = geometry(env);
    let mut poly = Csv::new(&["series", "label", "q_l", "q_r"]);
    let named = g.extreme_points.named();
    for (label, b) in named.iter().chain(std::iter::once(&named[0])) {
        poly.row(vec![
            "polygon".into(),
            (*label).into(),
            b.q_l.into(),
            b.q_r.into(),
        ]);
    }
    let mut extras = vec![("equalizing", InfluenceBundle::EQUALIZING)];
    if !env.classification().solves_as_balanced() {
        extras.push(("B", env.crossing_bundle()));
        extras.push(("Cstar", env.coercive_outside_option()));
    }
    for (label, b) in extras {
        if influence::contains(env, &b).inside {
            poly.row(vec![
                "point".into(),
                label.into(),
                b.q_l.into(),
                b.q_r.into(),
            ]);
        }
    }
    written.push(ctx.out.csv("polytope.csv", &poly)?);

    let screening = ctx.menu()?;
    let mut curve = Csv::new(&["theta", "utility", "wtp", "segment"]);
    for t in ctx.grid() {
        let s = screening.segment_at(t)?;
        curve.row(vec![
            t.into(),
            screening.indirect_utility(t)?.into(),
            willingness_to_pay(env, t).into(),
            s.label.clone().into(),
        ]);
    }
    written.push(ctx.out.csv("utility_curve.csv", &curve)?);

    let c = coercion_menu(env, &ctx.dist)?;
    let mut coerced = Csv::new(&[
        "theta",
        "utility_screening",
        "utility_coercive",
        "outside_value",
        "price_coercive",
    ]);
    for t in ctx.grid() {
        let s = c.menu.segment_at(t)?;
        coerced.row(vec![
            t.into(),
            screening.indirect_utility(t)?.into(),
            c.menu.indirect_utility(t)?.into(),
            influence::sender_value(&c.outside_option, t).into(),
            s.price.at(t).into(),
        ]);
    }
    written.push(ctx.out.csv("coercion_curve.csv", &coerced)?);

    match comparative_statics(
        env,
        &ctx.dist,
        ctx.cfg.figures.statics_delta,
        ctx.cfg.solver.grid_size,
    ) {
        Ok(r) => {
            let mut drop = Csv::new(&["theta", "utility_before", "utility_after", "delta"]);
            for p in &r.points {
                drop.row(vec![
                    p.theta.into(),
                    p.before.into(),
                    p.after.into(),
                    p.delta.into(),
                ]);
            }
            written.push(ctx.out.csv("prior_drop.csv", &drop)?);
        }
        Err(e) if e.is_scope() => eprintln!("note: prior_drop.csv skipped: {e}"),
        Err(e) => return Err(e.into()),
    }
    report(&written);
    Ok(())
}
