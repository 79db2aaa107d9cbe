//! Property checks run by `raybound verify`. A check that errors counts as a
//! failure and reports the error.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde_json::json;

use raybound::config::FieldConfig;
use raybound::io::sci;
use raybound::jump::{characteristic, extract_jump, predicted_jump, PredictedDiscontinuity};
use raybound::solver::{random_interior_samples, residual, solve, RadianceField};
use raybound::{Result, TransportProblem, Vec3};

use crate::failure::Failure;
use crate::stages::Run;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// CSV body of one check's report.
type Table = (String, Vec<String>);

struct Verdict {
    passed: bool,
    detail: String,
    table: Table,
}

fn verdict(passed: bool, detail: String, header: &str, rows: Vec<String>) -> Result<Verdict> {
    Ok(Verdict {
        passed,
        detail,
        table: (header.to_string(), rows),
    })
}

pub fn run_verify(run: &mut Run) -> std::result::Result<Vec<Check>, Failure> {
    let start = Instant::now();
    // one solve shared by the field-based checks
    let field = solve(&run.problem, &run.settings);
    let checks: [(&'static str, Box<dyn Fn(&Run) -> Result<Verdict>>); 5] = [
        ("measure_change", Box::new(measure_change)),
        ("contraction", Box::new(|r| contraction(r, field.as_ref().map_err(Clone::clone)?))),
        ("residual", Box::new(|r| residual_check(r, field.as_ref().map_err(Clone::clone)?))),
        ("straddle", Box::new(|r| straddle(r, field.as_ref().map_err(Clone::clone)?))),
        (
            "scattering_invariance",
            Box::new(|r| scattering_invariance(r, field.as_ref().map_err(Clone::clone)?)),
        ),
    ];
    let mut out = Vec::new();
    let mut outputs = vec!["verify.csv".to_string()];
    for (name, check) in checks {
        let file = format!("verify_{name}.csv");
        let (passed, detail, table) = match check(run) {
            Ok(v) => (v.passed, v.detail, v.table),
            Err(e) => (false, e.to_string(), ("error".to_string(), vec![format!("\"{e}\"")])),
        };
        run.write(&file, |w| {
            writeln!(w, "{}", table.0)?;
            for row in &table.1 {
                writeln!(w, "{row}")?;
            }
            Ok(())
        })?;
        log::info!("{name}: {} ({detail})", if passed { "pass" } else { "FAIL" });
        outputs.push(file);
        out.push(Check { name, passed, detail });
    }
    run.write("verify.csv", |w| {
        writeln!(w, "check,passed,detail")?;
        for c in &out {
            writeln!(w, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"))?;
        }
        Ok(())
    })?;
    let summary: BTreeMap<_, _> = out.iter().map(|c| (c.name.to_string(), json!(c.passed))).collect();
    let outputs: Vec<&str> = outputs.iter().map(String::as_str).collect();
    run.record("verify", start, &[], &outputs, summary)?;
    Ok(out)
}

/// Directional versus boundary form of the same integral at interior points.
fn measure_change(run: &Run) -> Result<Verdict> {
    let geo = &run.problem.geometry;
    let v = &run.config.verify;
    let (nodes, tol) = if geo.dim() == 3 {
        (v.measure_nodes_3d, v.measure_tol_3d)
    } else {
        (v.measure_nodes, v.measure_tol)
    };
    let (lo, hi) = geo.bounding_box();
    let c = (lo + hi) * 0.5;
    let half = (hi - lo) * 0.5;
    let x = c + Vec3::new(0.3 * half.x, 0.2 * half.y, 0.1 * half.z);
    let tests: [(&str, &dyn Fn(Vec3) -> f64); 3] = [
        ("1+y1^2", &|y| 1.0 + y.x * y.x),
        ("exp(y2)", &|y| y.y.exp()),
        ("2+cos(3phi)*y1", &|y| 2.0 + (3.0 * (y - c).angle()).cos() * y.x),
    ];
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, f) in tests {
        let (a, b) = geo.measure_change_integrals(x, nodes, f)?;
        let gap = (a - b).abs() / a.abs();
        worst = worst.max(gap);
        rows.push(format!("{name},{},{},{}", sci(a), sci(b), sci(gap)));
    }
    verdict(
        worst <= tol,
        format!("max relative gap {worst:.2e} with {nodes} nodes (tol {tol:.0e})"),
        "function,directional,boundary,rel_gap",
        rows,
    )
}

/// Term ratios stay below `M` and the sum stays below `sup f0 / (1 - M)`.
fn contraction(run: &Run, field: &RadianceField) -> Result<Verdict> {
    let cert = field.certificate();
    let bound = run.problem.source.sup_abs() / (1.0 - cert.m);
    let sup = field.arrays().2.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, s) in cert.term_sups.iter().enumerate() {
        let ratio = if n == 0 || cert.term_sups[n - 1] == 0.0 {
            0.0
        } else {
            s / cert.term_sups[n - 1]
        };
        worst = worst.max(ratio);
        rows.push(format!("{n},{},{},{}", sci(*s), sci(ratio), sci(cert.m)));
    }
    verdict(
        worst <= cert.m && sup <= bound,
        format!(
            "M = {:.4}, N = {}, worst ratio {worst:.4}, sup f {sup:.4} <= {bound:.4}",
            cert.m, cert.n_terms
        ),
        "n,sup,ratio,m",
        rows,
    )
}

fn residual_check(run: &Run, field: &RadianceField) -> Result<Verdict> {
    let v = &run.config.verify;
    let samples = random_interior_samples(
        &run.problem.geometry,
        v.residual_samples,
        field.directions().len(),
        run.config.seed,
        1.0,
    );
    let rep = residual(field, &run.problem, &samples)?;
    verdict(
        rep.integral <= v.residual_max && rep.differential <= v.residual_max,
        format!(
            "integral {:.2e}, differential {:.2e} over {} samples (max {:.0e})",
            rep.integral, rep.differential, rep.samples, v.residual_max
        ),
        "samples,integral,differential,threshold",
        vec![format!(
            "{},{},{},{}",
            rep.samples,
            sci(rep.integral),
            sci(rep.differential),
            sci(v.residual_max)
        )],
    )
}

/// Characteristic entering along the inward normal at the first point of
/// `gamma`, if the source has one.
fn normal_characteristic(problem: &TransportProblem) -> Result<Option<PredictedDiscontinuity>> {
    let set = problem.source.discontinuity_set(&problem.geometry, 16);
    let Some(fam) = set.families.first() else {
        return Ok(None);
    };
    characteristic(&problem.geometry, fam.base.position, -fam.base.normal).map(Some)
}

/// `F_1` differences across the characteristic shrink with the offset
/// while `F_0` differences approach the ballistic jump.
fn straddle(run: &Run, field: &RadianceField) -> Result<Verdict> {
    let p = &run.problem;
    let header = "t,eps,f0_diff,f1_diff,jump";
    let pd = match normal_characteristic(p)? {
        Some(pd) if p.dim() == 2 => pd,
        _ => return verdict(true, "skipped: needs a planar A/B source".into(), header, Vec::new()),
    };
    let ratio = run.config.verify.straddle_ratio;
    let intensity = p.source.intensity().unwrap_or(1.0);
    let xi = pd.dir;
    let across = xi.perp();
    let h = field.spacing();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for frac in [0.25, 0.5, 0.75] {
        let t = frac * pd.chord;
        let x = pd.base.position + xi * t;
        let jump = intensity * p.attenuation(x, xi, t)?;
        let mut d1 = Vec::new();
        for eps in [h, h / 2.0, h / 4.0] {
            let (a, b) = (x + across * eps, x - across * eps);
            let f1 = (field.f1_at(p, a, xi)? - field.f1_at(p, b, xi)?).abs();
            let f0 = (p.ballistic(a, xi)? - p.ballistic(b, xi)?).abs();
            rows.push(format!("{},{},{},{},{}", sci(t), sci(eps), sci(f0), sci(f1), sci(jump)));
            d1.push(f1);
        }
        let limit = (2.0 * d1[2] - d1[1]).abs();
        worst = worst.max(limit / jump);
    }
    verdict(
        worst < ratio,
        format!("extrapolated F1 difference <= {:.2}% of the jump (max {:.0}%)", 100.0 * worst, 100.0 * ratio),
        header,
        rows,
    )
}

/// The measured jump follows the decay law with and without scattering.
fn scattering_invariance(run: &Run, field: &RadianceField) -> Result<Verdict> {
    let p = &run.problem;
    let header = "medium,extracted,predicted,rel_err";
    let Some(pd) = normal_characteristic(p)? else {
        return verdict(true, "skipped: the source is continuous".into(), header, Vec::new());
    };
    let tol = run.config.verify.jump_tol;
    let mut clear = run.config.clone();
    clear.medium.mu_s = vec![FieldConfig::Constant(0.0); clear.medium.mu_s.len()];
    let clear = clear.problem()?;
    let clear_field = solve(&clear, &run.settings)?;
    let predicted = predicted_jump(p, &pd)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (label, problem, f) in [("configured", p, field), ("scattering_free", &clear, &clear_field)] {
        let m = extract_jump(problem, f, &pd, None)?;
        let err = (m.extracted - predicted).abs() / predicted;
        worst = worst.max(err);
        rows.push(format!("{label},{},{},{}", sci(m.extracted), sci(predicted), sci(err)));
    }
    verdict(
        worst <= tol,
        format!(
            "jump along a chord of length {:.3}: worst deviation {:.2}% from {predicted:.5} (tol {:.0}%)",
            pd.chord,
            100.0 * worst,
            100.0 * tol
        ),
        header,
        rows,
    )
}
