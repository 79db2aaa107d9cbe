//! Pipeline stages. Each writes its artifacts into the output directory and
//! then commits the manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};

use raybound::config::RunConfig;
use raybound::io::{
    read_field_csv, read_sinogram_csv, sci, write_field_csv, write_image_csv, write_jumps_csv, write_pgm,
    write_plan_csv, write_sinogram_csv,
};
use raybound::jump::{extract_jump, predict_discontinuities};
use raybound::quadrature::DirectionSet;
use raybound::solver::{solve, ConvergenceCert, RadianceField, SolverSettings, SpatialGrid};
use raybound::xray::{
    fbp_reconstruct, image_error, jump_to_sinogram, oracle_sinogram, ArcBasis, JumpMode, SinogramGrid,
};
use raybound::{Error, TransportProblem};

use crate::failure::Failure;
use crate::manifest::{sha256_text, Manifest, SelfTest, SolverRecord, StageRecord};

/// Nodes spot-checked against ray tracing after a solve.
const SELF_TEST_NODES: usize = 64;

pub struct Run {
    pub config: RunConfig,
    pub problem: TransportProblem,
    pub settings: SolverSettings,
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Run {
    pub fn new(config: RunConfig, dir: PathBuf) -> Result<Self, Failure> {
        let problem = config.problem()?;
        let settings = config.solver_settings()?;
        fs::create_dir_all(&dir).map_err(Failure::io(format!("creating {}", dir.display())))?;
        let mut hashed = config.clone();
        hashed.out = None;
        let text = hashed.to_toml();
        let manifest = Manifest::open(&dir, &sha256_text(&text), config.seed, rayon::current_num_threads());
        let run = Run {
            config,
            problem,
            settings,
            dir,
            manifest,
        };
        run.write("config.toml", |w| w.write_all(text.as_bytes()))?;
        Ok(run)
    }

    pub fn write<T>(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<T>) -> Result<T, Failure> {
        let path = self.dir.join(name);
        let ctx = || format!("writing {}", path.display());
        let mut w = BufWriter::new(File::create(&path).map_err(Failure::io(ctx()))?);
        let out = f(&mut w).map_err(Failure::io(ctx()))?;
        w.flush().map_err(Failure::io(ctx()))?;
        Ok(out)
    }

    pub fn record(
        &mut self,
        stage: &str,
        start: Instant,
        inputs: &[&str],
        outputs: &[&str],
        summary: BTreeMap<String, Value>,
    ) -> Result<(), Failure> {
        let mut outputs: Vec<String> = outputs.iter().map(|s| s.to_string()).collect();
        outputs.push("config.toml".into());
        self.manifest.stages.insert(
            stage.to_string(),
            StageRecord {
                seconds: start.elapsed().as_secs_f64(),
                inputs: inputs.iter().map(|s| s.to_string()).collect(),
                outputs,
                summary,
            },
        );
        let dir = self.dir.clone();
        self.manifest
            .commit(&dir)
            .map_err(Failure::io(format!("writing manifest in {}", dir.display())))
    }

    fn sinogram_grid(&self) -> Result<SinogramGrid, Failure> {
        let e = &self.config.experiment;
        Ok(SinogramGrid::new(&self.problem.geometry, e.n_angles, e.n_offsets)?)
    }
}

fn summary<const N: usize>(items: [(&str, Value); N]) -> BTreeMap<String, Value> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn run_solve(run: &mut Run) -> Result<(), Failure> {
    let start = Instant::now();
    let field = solve(&run.problem, &run.settings)?;
    run.write("field.csv", |w| write_field_csv(w, &field))?;
    let cert = field.certificate();
    run.write("terms.csv", |w| {
        writeln!(w, "n,sup,ratio")?;
        for (n, s) in cert.term_sups.iter().enumerate() {
            let ratio = if n == 0 { f64::NAN } else { s / cert.term_sups[n - 1] };
            writeln!(w, "{n},{},{}", sci(*s), sci(ratio))?;
        }
        Ok(())
    })?;
    run.manifest.solver = Some(SolverRecord {
        m: cert.m,
        m_sampled: cert.m_sampled,
        tau_max: cert.tau_max,
        n_terms: cert.n_terms,
        tail_bound: cert.tail_bound,
    });
    run.manifest.self_test = Some(self_test(&run.problem, &field)?);
    log::info!("solved: M = {:.4}, N = {}, tail {:.2e}", cert.m, cert.n_terms, cert.tail_bound);
    let s = summary([
        ("m", json!(cert.m)),
        ("n_terms", json!(cert.n_terms)),
        ("tail_bound", json!(cert.tail_bound)),
    ]);
    run.record("solve", start, &[], &["field.csv", "terms.csv"], s)
}

/// Compares stored nodal values with ray-traced attenuation on a fixed
/// stride of interior nodes.
fn self_test(problem: &TransportProblem, field: &RadianceField) -> Result<SelfTest, Failure> {
    let nodes = field.grid().interior_nodes();
    let n_dirs = field.directions().len();
    let samples = SELF_TEST_NODES.min(nodes.len());
    let scattering_free = problem.medium.is_scattering_free();
    let (mut ballistic, mut total) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let node = nodes[i * nodes.len() / samples];
        let k = (7 * i) % n_dirs;
        let exact = problem.ballistic(field.grid().position(node), field.directions().direction(k))?;
        ballistic = ballistic.max((field.f0_node(node, k) - exact).abs());
        total = total.max((field.total_node(node, k) - exact).abs());
    }
    Ok(SelfTest {
        samples,
        ballistic_max_err: ballistic,
        total_max_err: scattering_free.then_some(total),
    })
}

/// Rebuilds the solved field from the solve stage's dump.
pub fn load_field(run: &Run) -> Result<RadianceField, Failure> {
    let path = run.manifest.upstream(&run.dir, "solve", "field.csv")?;
    let rec = run
        .manifest
        .solver
        .clone()
        .ok_or_else(|| Failure::MissingArtifact("solver record in the manifest".into()))?;
    let grid = SpatialGrid::new(&run.problem.geometry, run.settings.h);
    let n_dirs = DirectionSet::for_dimension(run.problem.dim(), run.settings.n_directions).len();
    let file = File::open(&path).map_err(Failure::io(format!("reading {}", path.display())))?;
    let (f0, f1) = read_field_csv(BufReader::new(file), &grid, n_dirs)?;
    let cert = ConvergenceCert {
        m: rec.m,
        m_sampled: rec.m_sampled,
        tau_max: rec.tau_max,
        n_terms: rec.n_terms,
        tail_bound: rec.tail_bound,
        term_sups: Vec::new(),
    };
    Ok(RadianceField::from_nodal(&run.problem, &run.settings, cert, f0, f1)?)
}

pub fn run_jump_scan(run: &mut Run) -> Result<(), Failure> {
    let start = Instant::now();
    let field = load_field(run)?;
    let p = &run.problem;
    let predicted = predict_discontinuities(&p.source, &p.geometry, run.config.experiment.fan);
    if predicted.is_empty() {
        log::warn!("the boundary source is continuous; no jumps to measure");
    }
    let mut rows = Vec::new();
    for pd in predicted.iter().filter(|pd| !pd.grazing) {
        match extract_jump(p, &field, pd, None) {
            Ok(m) => rows.push(m),
            Err(e @ (Error::NotOutgoing { .. } | Error::SideMisclassification { .. })) => {
                log::debug!("skipping characteristic from {:?}: {e}", pd.base.position);
            }
            Err(e) => return Err(e.into()),
        }
    }
    run.write("jumps.csv", |w| write_jumps_csv(w, p.dim(), &rows))?;
    let worst = rows.iter().map(|m| m.rel_err()).fold(0.0, f64::max);
    log::info!("measured {} jumps, worst relative error {worst:.2e}", rows.len());
    let s = summary([("jumps", json!(rows.len())), ("max_rel_err", json!(worst))]);
    run.record("jump-scan", start, &["field.csv"], &["jumps.csv"], s)
}

pub fn run_sinogram(run: &mut Run) -> Result<(), Failure> {
    let start = Instant::now();
    let grid = run.sinogram_grid()?;
    let e = &run.config.experiment;
    let mode = match e.mode.as_str() {
        "exact" => JumpMode::Exact,
        "direct" => JumpMode::Direct(run.settings.clone()),
        "arc_basis" => {
            let s = SolverSettings {
                h: e.basis_h,
                n_directions: e.basis_directions,
                tol: e.basis_tol,
                ..run.settings.clone()
            };
            JumpMode::ArcBasis(ArcBasis::build(&run.problem, e.basis_arcs, &s)?)
        }
        other => {
            return Err(Error::config(
                "experiment.mode",
                format!("unknown mode `{other}` (exact, direct, arc_basis)"),
            )
            .into())
        }
    };
    let intensity = run.problem.source.intensity().unwrap_or(1.0);
    let report = jump_to_sinogram(&run.problem, grid, &mode, intensity)?;
    let oracle = oracle_sinogram(&run.problem, grid)?;
    run.write("plan.csv", |w| write_plan_csv(w, &report.plans))?;
    run.write("sinogram.csv", |w| write_sinogram_csv(w, &report.sinogram))?;
    run.write("sinogram_oracle.csv", |w| write_sinogram_csv(w, &oracle))?;
    let measured: Vec<_> = report.measurements.iter().flatten().copied().collect();
    run.write("sinogram_jumps.csv", |w| write_jumps_csv(w, 2, &measured))?;
    let deviation = report
        .sinogram
        .values
        .iter()
        .zip(&oracle.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !report.sinogram.inpainted.is_empty() {
        log::warn!("{} sinogram entries were inpainted", report.sinogram.inpainted.len());
    }
    let s = summary([
        ("mode", json!(e.mode)),
        ("inpainted", json!(report.sinogram.inpainted.len())),
        ("max_rel_err", json!(report.max_rel_err())),
        ("max_abs_dev_from_oracle", json!(deviation)),
    ]);
    run.record(
        "sinogram",
        start,
        &[],
        &["plan.csv", "sinogram.csv", "sinogram_oracle.csv", "sinogram_jumps.csv"],
        s,
    )
}

pub fn run_reconstruct(run: &mut Run) -> Result<(), Failure> {
    let start = Instant::now();
    let grid = run.sinogram_grid()?;
    let e = run.config.experiment.clone();
    let p = &run.problem;
    let truth = |x| p.medium.mu_t_at(&p.geometry, &p.partition, x);
    let mut errors = Vec::new();
    let mut image = None;
    for (label, name) in [("measured", "sinogram.csv"), ("oracle", "sinogram_oracle.csv")] {
        let path = run.manifest.upstream(&run.dir, "sinogram", name)?;
        let file = File::open(&path).map_err(Failure::io(format!("reading {}", path.display())))?;
        let sino = read_sinogram_csv(BufReader::new(file), grid)?;
        let img = fbp_reconstruct(&sino, e.image_size)?;
        errors.push((label, image_error(&img, truth, e.mask)));
        if image.is_none() {
            image = Some(img);
        }
    }
    let image = image.expect("measured image");
    let (lo, hi) = run.write("image.pgm", |w| write_pgm(w, &image))?;
    run.write("image.csv", |w| write_image_csv(w, &image))?;
    run.write("reconstruct_error.csv", |w| {
        writeln!(w, "sinogram,rel_l2,max_abs,mask")?;
        for (label, err) in &errors {
            writeln!(w, "{label},{},{},{}", sci(err.rel_l2), sci(err.max_abs), sci(e.mask))?;
        }
        Ok(())
    })?;
    log::info!("reconstructed: relative L2 error {:.3e}", errors[0].1.rel_l2);
    let s = summary([
        ("rel_l2", json!(errors[0].1.rel_l2)),
        ("max_abs", json!(errors[0].1.max_abs)),
        ("oracle_rel_l2", json!(errors[1].1.rel_l2)),
        ("pgm_lo", json!(lo)),
        ("pgm_hi", json!(hi)),
    ]);
    run.record(
        "reconstruct",
        start,
        &["sinogram.csv", "sinogram_oracle.csv"],
        &["image.pgm", "image.csv", "reconstruct_error.csv"],
        s,
    )
}
