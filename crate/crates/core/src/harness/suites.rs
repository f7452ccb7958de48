//! Verification suites. Each appends ledger entries and outputs to the run
//! context; a failing computation becomes a failed entry, not an abort.

use num_complex::Complex64;
use rand::Rng as _;
use serde_json::json;

use super::config::{ExperimentConfig, VerifySettings};
use super::record::{LedgerEntry, Row};
use super::RunContext;
use crate::boundary::{
    lemma49_witness, poisson, verify_monotone_union, verify_th410, verify_th43,
    weak_regularity_probe, write_probe_csv, Lemma49Params, Th410Params, Th43Params,
};
use crate::capacity::{axiom_suite, polar_disc_test, AxiomFamily, AxiomKind, PolarParams};
use crate::discs::{choose_theta, disc_vs_envelope, OptimizerParams, Th21Params, Th21Report};
use crate::envelope::{solve_extremal, SolverParams};
use crate::error::Result;
use crate::geometry::{ComplexPoint, DomainSpec, Rect, SetExpr, TorusSet, TAU};
use crate::rng;

/// Stream ids for sub-seeds drawn from the root seed.
mod streams {
    pub const OPEN: u64 = 1;
    pub const CLOSED: u64 = 2;
    pub const TWIST: u64 = 3;
    pub const BOUNDARY: u64 = 4;
    pub const SEARCH: u64 = 5;
    pub const POLAR: u64 = 6;
}

pub fn sub_seed(root: u64, id: u64) -> u64 {
    rng::stream(root, id).gen()
}

pub fn run_suite(name: &str, cfg: &ExperimentConfig, ctx: &mut RunContext) {
    match name {
        "radial" => radial(cfg, ctx),
        "poletsky-open" => poletsky_open(cfg, ctx),
        "closed-inequality" => closed_inequality(cfg, ctx),
        "twist" => twist(cfg, ctx),
        "boundary-disc" => boundary_disc(cfg, ctx),
        "cantor" => cantor(cfg, ctx),
        "choquet" => choquet(cfg, ctx),
        "pluripolar" => pluripolar(cfg, ctx),
        "full" => {
            for s in super::config::SUITES.iter().filter(|s| **s != "full") {
                run_suite(s, cfg, ctx);
            }
        }
        other => ctx.fail(other, None, None, format!("unknown suite `{other}`")),
    }
}

/// Closed-form value `max(-1, log|z| / log(1/r))` for `ClosedDisc(0, r)`.
pub fn radial_closed_form(z: f64, r: f64) -> f64 {
    (z.ln() / (1.0 / r).ln()).max(-1.0)
}

fn radial(cfg: &ExperimentConfig, ctx: &mut RunContext) {
    let v = &cfg.verify;
    let solver = SolverParams {
        h: Some(v.radial_h),
        ..cfg.solver.clone()
    };
    ctx.step("radial", Some(Row::BorelInequality), Some(1), |ctx| {
        let (_, env) = solve_extremal(&DomainSpec::UnitDisc, &SetExpr::closed_disc0(0.5), &solver)?;
        let mut err: f64 = 0.0;
        let mut nodes = 0usize;
        for (i, u) in env.field.live() {
            let p = env.field.grid().coords(i);
            let r = p[0].hypot(p[1]);
            if (0.55..=0.95).contains(&r) {
                err = err.max((u - radial_closed_form(r, 0.5)).abs());
                nodes += 1;
            }
        }
        ctx.write_field("radial.csv", &env.field)?;
        ctx.output(
            "radial",
            json!({"h": v.radial_h, "sup_error": err, "nodes": nodes, "converged": env.converged,
                   "sweeps": env.sweeps, "policy_iterations": env.policy_iterations}),
        );
        ctx.push(
            LedgerEntry::new("radial-closed-form", Some(Row::BorelInequality), Some(1), err <= v.radial_tol && env.converged)
                .with_value(err, v.radial_tol)
                .with_detail(format!("{nodes} nodes with 0.55 <= |z| <= 0.95")),
        );
        Ok(())
    });
}

fn probe_list(v: &VerifySettings, extra: Option<&ComplexPoint>) -> Vec<ComplexPoint> {
    let mut xs = v.probes.clone();
    if let Some(p) = extra {
        if !xs.contains(p) {
            xs.push(p.clone());
        }
    }
    xs
}

fn disc_outputs(ctx: &mut RunContext, prefix: &str, reports: &[Th21Report]) -> Result<serde_json::Value> {
    let mut rows = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        ctx.write_json(&format!("discs/{prefix}_{k}.json"), &r.discs)?;
        rows.push(json!({
            "x": r.x, "omega_est": r.omega_est, "omega_upper": r.omega_upper,
            "sigma": r.discs.sigma, "upper_ok": r.upper_ok, "lower_ok": r.lower_ok,
        }));
    }
    Ok(serde_json::Value::Array(rows))
}

fn poletsky_open(cfg: &ExperimentConfig, ctx: &mut RunContext) {
    let v = &cfg.verify;
    let params = Th21Params {
        solver: cfg.solver.clone(),
        optimizer: OptimizerParams {
            seed: sub_seed(cfg.root_seed(), streams::OPEN),
            ..cfg.optimizer.clone()
        },
        upper_tol: v.upper_tol,
        lower_tol: v.lower_tol,
    };
    ctx.step("open-equality", Some(Row::OpenSetEquality), Some(2), |ctx| {
        let xs = probe_list(v, Some(&v.open_point));
        let reports = disc_vs_envelope(&DomainSpec::UnitDisc, &SetExpr::open_disc0(0.5), &xs, &params)?;
        let rows = disc_outputs(ctx, "open", &reports)?;
        ctx.output("poletsky_open", rows);
        let at = reports.iter().find(|r| r.x == v.open_point).expect("open point is probed");
        ctx.push(
            LedgerEntry::new("open-sigma", Some(Row::OpenSetEquality), Some(2), at.discs.sigma >= v.open_sigma_target)
                .with_value(at.discs.sigma, v.open_sigma_target)
                .with_detail(format!(
                    "degree {}, {} restarts, {:?} sigma",
                    params.optimizer.degree, params.optimizer.restarts, params.optimizer.mode
                )),
        );
        let worst = reports.iter().map(|r| r.omega_est - r.omega_upper).fold(f64::NEG_INFINITY, f64::max);
        ctx.push(
            LedgerEntry::new("open-lower", Some(Row::OpenSetEquality), Some(2), reports.iter().all(|r| r.lower_ok))
                .with_value(worst, v.lower_tol)
                .with_detail("max of omega_est - omega_upper over probes"),
        );
        Ok(())
    });
}

fn closed_inequality(cfg: &ExperimentConfig, ctx: &mut RunContext) {
    let v = &cfg.verify;
    let params = Th21Params {
        solver: cfg.solver.clone(),
        optimizer: OptimizerParams {
            seed: sub_seed(cfg.root_seed(), streams::CLOSED),
            ..v.closed_optimizer.clone()
        },
        upper_tol: v.upper_tol,
        lower_tol: v.lower_tol,
    };
    ctx.step("closed-upper", Some(Row::ClosedSetInequality), Some(3), |ctx| {
        let xs = probe_list(v, None);
        let reports = disc_vs_envelope(&DomainSpec::UnitDisc, &SetExpr::closed_disc0(0.5), &xs, &params)?;
        let rows = disc_outputs(ctx, "closed", &reports)?;
        ctx.output("closed_inequality", rows);
        let worst = reports.iter().map(|r| r.omega_upper - r.omega_est).fold(f64::NEG_INFINITY, f64::max);
        ctx.push(
            LedgerEntry::new("closed-upper", Some(Row::ClosedSetInequality), Some(3), reports.iter().all(|r| r.upper_ok))
                .with_value(worst, v.upper_tol)
                .with_detail(format!("max of omega_upper - omega_est over {} probes", reports.len())),
        );
        Ok(())
    });
}

/// Union of up to three random rectangles.
pub fn random_torus_set(g: &mut rng::Rng) -> TorusSet {
    let n = g.gen_range(1..=3);
    let side = |g: &mut rng::Rng| {
        let a: f64 = g.gen_range(0.0..1.0);
        let b: f64 = g.gen_range(0.0..1.0);
        (a.min(b), a.max(b))
    };
    TorusSet::new((0..n).map(|_| Rect::new(side(g), side(g)).expect("sides are sorted in [0, 1]")).collect())
}

fn twist(cfg: &ExperimentConfig, ctx: &mut RunContext) {
    let v = &cfg.verify;
    let root = sub_seed(cfg.root_seed(), streams::TWIST);
    ctx.step("twist", Some(Row::ClosedSetInequality), Some(4), |ctx| {
        let t = v.twist_grid;
        let mut mean_err: f64 = 0.0;
        let mut max_short: f64 = f64::NEG_INFINITY;
        let mut rows = Vec::new();
        for s in 0..v.twist_sets {
            let c = random_torus_set(&mut rng::stream(root, s as u64));
            for k in 1..=8u32 {
                let ch = choose_theta(&c, k, t)?;
                mean_err = mean_err.max((ch.grid_mean - ch.sigma2).abs());
                max_short = max_short.max(ch.sigma2 - ch.value);
                rows.push(json!({"set": s, "k": k, "rects": c.rects().len(), "choice": ch}));
            }
        }
        ctx.output("twist", serde_json::Value::Array(rows));
        let tol = 1.0 / t as f64;
        ctx.push(
            LedgerEntry::new("twist-mean", Some(Row::ClosedSetInequality), Some(4), mean_err <= tol)
                .with_value(mean_err, tol)
                .with_detail(format!("{} sets, k = 1..8, T = {t}", v.twist_sets)),
        );
        ctx.push(
            LedgerEntry::new("twist-max", Some(Row::ClosedSetInequality), Some(4), max_short <= 1e-6)
                .with_value(max_short, 1e-6)
                .with_detail("max of sigma2 - sigma(C'(theta))"),
        );
        Ok(())
    });
}

/// Union of up to three random arcs, as a set expression. Arcs crossing
/// angle zero are split in two.
pub fn random_arc_union(g: &mut rng::Rng) -> SetExpr {
    let n = g.gen_range(1..=3);
    let mut parts = Vec::new();
    for _ in 0..n {
        let a: f64 = g.gen_range(0.0..TAU);
        let b = a + g.gen_range(0.05..2.0);
        if b > TAU {
            parts.push(SetExpr::arc(a, TAU));
            parts.push(SetExpr::arc(0.0, b - TAU));
        } else {
            parts.push(SetExpr::arc(a, b));
        }
    }
    SetExpr::union(parts)
}

fn boundary_disc(cfg: &ExperimentConfig, ctx: &mut RunContext) {
    let v = &cfg.verify;
    let root = sub_seed(cfg.root_seed(), streams::BOUNDARY);
    let search = Th43Params {
        seed: sub_seed(cfg.root_seed(), streams::SEARCH),
        ..Th43Params::default()
    };
    ctx.step("boundary-formula", Some(Row::BoundaryDiscFormula), Some(5), |ctx| {
        let mut gap: f64 = 0.0;
        let mut centre: f64 = 0.0;
        let mut excess: f64 = f64::NEG_INFINITY;
        let mut rows = Vec::new();
        for k in 0..v.boundary_pairs {
            let mut g = rng::stream(root, k as u64);
            let u = random_arc_union(&mut g);
            let x = Complex64::from_polar(g.gen_range(0.0..0.95), g.gen_range(0.0..TAU));
            let rep = verify_th43(x, &u, &search)?;
            let p0 = poisson(Complex64::new(0.0, 0.0), &u)?;
            let sigma = u.to_arcs()?.measure();
            gap = gap.max(rep.equality_gap);
            centre = centre.max((p0 + sigma).abs());
            excess = excess.max(rep.worst_excess);
            rows.push(json!({"set": u, "report": rep, "poisson_0": p0, "sigma": sigma}));
        }
        ctx.output("boundary_disc", serde_json::Value::Array(rows));
        ctx.push(
            LedgerEntry::new("boundary-equality", Some(Row::BoundaryDiscFormula), Some(5), gap <= 1e-9)
                .with_value(gap, 1e-9)
                .with_detail(format!("{} pairs", v.boundary_pairs)),
        );
        ctx.push(
            LedgerEntry::new("boundary-centre", Some(Row::BoundaryDiscFormula), Some(5), centre <= 1e-12)
                .with_value(centre, 1e-12),
        );
        ctx.push(
            LedgerEntry::new("boundary-search", Some(Row::BoundaryDiscFormula), None, excess <= 1e-9)
                .with_value(excess, 1e-9)
                .with_detail("random Blaschke discs never beat the envelope"),
        );
        Ok(())
    });
    ctx.step("boundary-monotone", Some(Row::BoundaryDiscFormula), None, |ctx| {
        let sets: Vec<SetExpr> = (1..=12).map(|j| SetExpr::arc(0.0, 2.0 - (-(j as f64)).exp2())).collect();
        let limit = SetExpr::arc(0.0, 2.0);
        let rep = verify_monotone_union(Complex64::new(0.3, 0.2), &sets, &limit, 1e-3)?;
        ctx.push(
            LedgerEntry::new("boundary-monotone-union", Some(Row::BoundaryDiscFormula), None, rep.pass)
                .with_value(rep.final_gap, 1e-3),
        );
        ctx.output("boundary_monotone", serde_json::to_value(&rep)?);
        Ok(())
    });
    ctx.step("boundary-rays", Some(Row::BoundaryDiscFormula), None, |ctx| {
        let set = SetExpr::union(vec![SetExpr::arc(0.5, 2.0), SetExpr::arc(3.0, 4.5)]);
        let rep = weak_regularity_probe(&set, &v.rays)?;
        let mut buf = Vec::new();
        write_probe_csv(&rep.traces, &mut buf)?;
        ctx.write_bytes("fields/rays.csv", &buf)?;
        ctx.push(
            LedgerEntry::new("boundary-weak-regularity", Some(Row::BoundaryDiscFormula), None, rep.pass)
                .with_value(rep.max_defect, v.rays.tol)
                .with_detail(format!("{} scored rays", rep.scored)),
        );
        ctx.output("boundary_rays", json!({"max_defect": rep.max_defect, "scored": rep.scored}));
        Ok(())
    });
}

fn cantor(cfg: &ExperimentConfig, ctx: &mut RunContext) {
    let v = &cfg.verify;
    ctx.step("cantor", Some(Row::BoundaryNullSets), Some(6), |ctx| {
        let mut err: f64 = 0.0;
        let mut rows = Vec::new();
        for m in 1..=v.cantor_levels {
            let p = poisson(Complex64::new(0.0, 0.0), &SetExpr::cantor(m, 1.0 / 3.0))?;
            let want = (2.0f64 / 3.0).powi(m as i32);
            err = err.max((p.abs() - want).abs());
            rows.push(json!({"level": m, "poisson_0": p, "expected": want}));
        }
        ctx.output("cantor", serde_json::Value::Array(rows));
        ctx.push(
            LedgerEntry::new("cantor-decay", Some(Row::BoundaryNullSets), Some(6), err <= 1e-9)
                .with_value(err, 1e-9)
                .with_detail(format!("levels 1..={}", v.cantor_levels)),
        );
        Ok(())
    });
    let search = Th43Params {
        seed: sub_seed(cfg.root_seed(), streams::SEARCH),
        ..Th43Params::default()
    };
    ctx.step("null-points", Some(Row::BoundaryNullSets), None, |ctx| {
        let params = Th410Params {
            search: search.clone(),
            ..Th410Params::default()
        };
        let rep = verify_th410(Complex64::new(0.2, -0.3), &SetExpr::arc(0.0, 1.5), &[2.5, 4.0, 5.5], &params)?;
        ctx.push(
            LedgerEntry::new("null-points-closure", Some(Row::BoundaryNullSets), None, rep.pass)
                .with_value(rep.omega_closure - rep.disc_value, params.tol),
        );
        ctx.output("null_points", serde_json::to_value(&rep)?);
        Ok(())
    });
    ctx.step("null-witness", Some(Row::BoundaryNullSets), None, |ctx| {
        let params = Lemma49Params::default();
        let set = SetExpr::circle_points(&[0.0, 2.0, 4.0]);
        let rep = lemma49_witness(&set, Complex64::new(0.0, 0.0), &params)?;
        ctx.push(
            LedgerEntry::new("null-witness", Some(Row::BoundaryNullSets), None, rep.pass)
                .with_value(rep.max_probe, params.threshold)
                .with_detail(format!("u(0) = {}", rep.u_x0)),
        );
        ctx.output("null_witness", serde_json::to_value(&rep)?);
        Ok(())
    });
}

/// Five monotone families plus one decreasing and one increasing family.
pub fn choquet_families() -> Vec<AxiomFamily> {
    let js = [4, 16, 64, 256, 1024];
    let boxes = |name: &str, c: Complex64, sizes: &[f64]| AxiomFamily {
        name: name.into(),
        kind: AxiomKind::Monotone,
        sets: sizes
            .iter()
            .map(|&s| SetExpr::Box {
                lo: c - Complex64::new(s, s),
                hi: c + Complex64::new(s, s),
            })
            .collect(),
        gaps: Vec::new(),
        limit: None,
    };
    let unions = AxiomFamily {
        name: "disc-unions".into(),
        kind: AxiomKind::Monotone,
        sets: (1..=4)
            .map(|n| {
                SetExpr::union(
                    (0..n)
                        .map(|k| SetExpr::closed_disc(Complex64::from_polar(0.4, k as f64 * TAU / 4.0), 0.15))
                        .collect(),
                )
            })
            .collect(),
        gaps: Vec::new(),
        limit: None,
    };
    vec![
        AxiomFamily::nested_discs("centred-discs", &[0.1, 0.2, 0.3, 0.5, 0.7]),
        AxiomFamily::nested_discs("small-discs", &[0.02, 0.05, 0.1]),
        boxes("boxes", Complex64::new(0.0, 0.0), &[0.05, 0.15, 0.3, 0.45]),
        boxes("offset-boxes", Complex64::new(0.3, -0.2), &[0.05, 0.1, 0.2]),
        unions,
        AxiomFamily::decreasing_discs("decreasing", 0.5, &js),
        AxiomFamily::increasing_discs("increasing", 0.5, &js),
    ]
}

fn choquet(cfg: &ExperimentConfig, ctx: &mut RunContext) {
    let v = &cfg.verify;
    let solver = SolverParams {
        h: Some(v.capacity_h),
        ..cfg.solver.clone()
    };
    ctx.step("choquet", Some(Row::CapacityAxioms), Some(7), |ctx| {
        let rep = axiom_suite(&DomainSpec::UnitDisc, &choquet_families(), &solver, v.capacity_rel_tol)?;
        let mut buf = Vec::new();
        rep.write_csv(&mut buf)?;
        ctx.write_bytes("fields/axioms.csv", &buf)?;
        for (id, check) in [("choquet-order", "order"), ("choquet-limit", "limit")] {
            let es: Vec<_> = rep.entries.iter().filter(|e| e.check == check).collect();
            let pass = !es.is_empty() && es.iter().all(|e| e.pass);
            let worst = es
                .iter()
                .filter_map(|e| e.reference.map(|r| ((e.value - r) / r).abs()))
                .fold(0.0, f64::max);
            let entry = LedgerEntry::new(id, Some(Row::CapacityAxioms), Some(7), pass).with_detail(format!("{} checks", es.len()));
            ctx.push(if check == "limit" { entry.with_value(worst, v.capacity_rel_tol) } else { entry });
        }
        ctx.output("choquet", serde_json::to_value(&rep)?);
        Ok(())
    });
}

fn pluripolar(cfg: &ExperimentConfig, ctx: &mut RunContext) {
    let params = PolarParams {
        seed: sub_seed(cfg.root_seed(), streams::POLAR),
        ..cfg.verify.polar.clone()
    };
    ctx.step("pluripolar", Some(Row::PluripolarSets), Some(8), |ctx| {
        let rep = polar_disc_test(&params)?;
        ctx.push(
            LedgerEntry::new("pluripolar-finite", Some(Row::PluripolarSets), Some(8), rep.finite.pass)
                .with_value(rep.finite.max_sigma, 0.0)
                .with_detail(format!("{} discs", rep.finite.discs)),
        );
        let worst = rep
            .shrinking
            .iter()
            .filter_map(|s| Some((s.ratio? / s.expected? - 1.0).abs()))
            .fold(0.0, f64::max);
        ctx.push(
            LedgerEntry::new("pluripolar-shrinking", Some(Row::PluripolarSets), Some(8), rep.shrinking.iter().all(|s| s.pass))
                .with_value(worst, params.ratio_tol),
        );
        if !rep.exhaustion.is_empty() {
            ctx.push(LedgerEntry::new(
                "pluripolar-exhaustion",
                Some(Row::PluripolarSets),
                None,
                rep.exhaustion_monotone,
            ));
        }
        ctx.output("pluripolar", serde_json::to_value(&rep)?);
        Ok(())
    });
}
