//! Pipeline stages behind the subcommands. Every stage writes files into the
//! output directory and registers them in the run manifest; intermediate
//! artifacts are plain files so stages compose.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use shadowlab::entropy::{
    check_partial_shadowing, check_submultiplicativity, count_types, katok_entropy_estimate,
    main_report, phi0_mean, topological_entropy_estimate, GapInputs,
};
use shadowlab::extended::{iterate_extended, ExtCtx};
use shadowlab::io as labio;
use shadowlab::measure::{
    check_defect_identity, defect_alpha_with_tail, lyapunov_exponent, EmpiricalMeasure,
    MeasureSequence,
};
use shadowlab::shadow::{
    build_decomposition, choose_delta, coverage_report, geometric_schedule, validate_psi,
    ShadowContext, ShadowParams,
};
use shadowlab::{
    compute_constants, find_critical_points, iterate, CriticalPoint, MapConstants, Orbit,
    SmoothMap,
};

use crate::config::ExperimentConfig;

pub struct Runner {
    pub cfg: ExperimentConfig,
    pub out_dir: PathBuf,
    pub config_sha256: String,
    pub outputs: Vec<OutputFile>,
    started: Instant,
    map: SmoothMap,
    criticals: Vec<CriticalPoint>,
    constants: MapConstants,
}

#[derive(Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config_sha256: &'a str,
    artifact_version: &'a str,
    outputs: &'a [OutputFile],
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_ms: Option<u128>,
}

impl Runner {
    pub fn new(cfg: ExperimentConfig, config_text: &str, out_dir: PathBuf) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&out_dir)
            .with_context(|| format!("cannot create {}", out_dir.display()))?;
        let map = cfg.build_map()?;
        let criticals = find_critical_points(&map, 2000)?;
        let constants = compute_constants(&map, &criticals, 2000);
        let config_sha256 = hex_digest(config_text.as_bytes());
        Ok(Runner {
            cfg,
            out_dir,
            config_sha256,
            outputs: Vec::new(),
            started: Instant::now(),
            map,
            criticals,
            constants,
        })
    }

    fn crit_locs(&self) -> Vec<f64> {
        self.criticals.iter().map(|c| c.location).collect()
    }

    fn write_file<F: FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>>(
        &mut self,
        name: &str,
        write: F,
    ) -> anyhow::Result<()> {
        let path = self.out_dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        write(&mut w)?;
        drop(w);
        let bytes = std::fs::read(&path)?;
        self.outputs.push(OutputFile { path: name.to_string(), sha256: hex_digest(&bytes) });
        Ok(())
    }

    /// Base orbit: configured x0 or the first seeded draw; extended-precision
    /// iteration when requested.
    fn base_orbit(&self) -> anyhow::Result<Orbit> {
        let x0 = match self.cfg.orbit.x0 {
            Some(x) => x,
            None => seeded_points(self.cfg.seed, 1)[0],
        };
        self.orbit_from(x0)
    }

    fn orbit_from(&self, x0: f64) -> anyhow::Result<Orbit> {
        let oc = &self.cfg.orbit;
        if oc.precision_bits >= 64 {
            let ctx = ExtCtx::new(oc.precision_bits);
            Ok(iterate_extended(&self.map, &ctx.big(x0), oc.n, oc.precision_bits))
        } else {
            Ok(iterate(&self.map, x0, oc.n, oc.escape)?)
        }
    }

    pub fn run_lyapunov(&mut self) -> anyhow::Result<()> {
        let lc = self.cfg.lyapunov.clone();
        let x0s: Vec<f64> = match self.cfg.orbit.x0 {
            Some(x) => {
                let mut v = vec![x];
                v.extend(seeded_points(self.cfg.seed, lc.seeds - 1));
                v
            }
            None => seeded_points(self.cfg.seed, lc.seeds),
        };
        let orbits: Vec<Orbit> = rayon_map(&x0s, |&x0| self.orbit_from(x0))?;

        #[derive(Serialize)]
        struct LyapunovSummary {
            lambda_per_seed: Vec<f64>,
            lambda_mean: f64,
            alpha_estimate: f64,
            identity_residual: f64,
            delta_grid: Vec<f64>,
        }

        let mut rows: Vec<(usize, f64, usize, f64)> = Vec::new();
        let mut lambda_full = Vec::new();
        for (i, orbit) in orbits.iter().enumerate() {
            for &w in &lc.window_schedule {
                let w = w.min(orbit.horizon());
                let m = EmpiricalMeasure::new(orbit, 0..w)?;
                rows.push((i, orbit.x0, w, lyapunov_exponent(&m)));
            }
            lambda_full.push(lyapunov_exponent(&EmpiricalMeasure::full(orbit)));
        }
        self.write_file("lyapunov.csv", |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["seed_index", "x0", "window", "lambda"])?;
            for (i, x0, win, lam) in &rows {
                wtr.write_record([
                    i.to_string(),
                    format!("{x0:.17e}"),
                    win.to_string(),
                    format!("{lam:.17e}"),
                ])?;
            }
            wtr.flush()?;
            Ok(())
        })?;

        // defect table over prefix windows of the first orbit
        let base = &orbits[0];
        let measures: Vec<EmpiricalMeasure> = lc
            .window_schedule
            .iter()
            .map(|&w| EmpiricalMeasure::new(base, 0..w.min(base.horizon())))
            .collect::<Result<_, _>>()?;
        let seq = MeasureSequence::new(measures, "prefix-windows")?;
        let table = defect_alpha_with_tail(&seq, &lc.delta_grid, lc.tail_fraction)?;
        let residual = check_defect_identity(&seq, &EmpiricalMeasure::full(base), &table);
        self.write_file("defect.json", |w| Ok(labio::write_defect_json(w, &table)?))?;

        let mean = lambda_full.iter().sum::<f64>() / lambda_full.len() as f64;
        let summary = LyapunovSummary {
            lambda_per_seed: lambda_full,
            lambda_mean: mean,
            alpha_estimate: table.alpha_estimate,
            identity_residual: residual,
            delta_grid: lc.delta_grid.clone(),
        };
        self.write_file("lyapunov_summary.json", |w| Ok(labio::write_json(w, &summary)?))?;
        Ok(())
    }

    pub fn run_shadowing(&mut self) -> anyhow::Result<()> {
        let sc = self.cfg.shadowing.clone();
        let orbit = self.base_orbit()?;
        let delta = if sc.delta > 0.0 {
            sc.delta
        } else {
            choose_delta(&self.map, &self.criticals, &self.constants, sc.epsilon, sc.l_min)?
        };
        let params = ShadowParams { epsilon: sc.epsilon, delta, l_min: sc.l_min };
        let ctx = ShadowContext::with_precision(
            &self.map,
            &orbit,
            &self.criticals,
            &self.constants,
            params,
            sc.precision_bits.max(64),
        )?;
        let dec = build_decomposition(&ctx)?;
        let schedule = geometric_schedule(sc.schedule_start, sc.schedule_ratio, orbit.horizon());
        let coverage = coverage_report(&ctx, &dec, &schedule);

        // per-lemma assertion summary over the built decomposition
        #[derive(Serialize, Default)]
        struct LemmaSummary {
            delta: f64,
            visits: usize,
            lemma_delta_checked: usize,
            lemma_delta_passed: usize,
            ceil_l_at_least_l_min: usize,
            right_maximal_psis: usize,
            partial_psis: usize,
            lemma_last_passed: usize,
            lemma_length_passed: usize,
            members: usize,
            members_shadowing: usize,
            psi_valid: usize,
            conditions: Option<shadowlab::entropy::PartialShadowingCheck>,
        }
        let mut summary = LemmaSummary { delta, visits: ctx.a_set.len(), ..Default::default() };
        for &a in &ctx.a_set {
            let l = ctx.shadow_length(a);
            let len = l.ceil() as usize;
            if len >= sc.l_min {
                summary.ceil_l_at_least_l_min += 1;
            }
            if a + len < orbit.horizon() {
                if let Some(c) = ctx.critical_near(orbit.points[a]) {
                    summary.lemma_delta_checked += 1;
                    let iv = shadowlab::shadow::ShadowingInterval {
                        a,
                        b: a + len,
                        critical: c,
                        epsilon: sc.epsilon,
                    };
                    if ctx.verify_shadowing(&iv) {
                        summary.lemma_delta_passed += 1;
                    }
                }
            }
        }
        let kp1 = (self.constants.k_max_order as f64 + 1.0) * std::f64::consts::LN_2
            / self.constants.lambda_log;
        for psi in &dec.psis {
            if !psi.right_maximal {
                summary.partial_psis += 1;
                continue;
            }
            summary.right_maximal_psis += 1;
            if !ctx.in_a(psi.end()) {
                summary.lemma_last_passed += 1;
            }
            let rhs: f64 = (psi.start()..psi.end())
                .filter(|&a| ctx.in_a(a))
                .map(|a| ctx.shadow_length(a) - kp1)
                .sum();
            if psi.support_len() as f64 >= rhs - 1e-9 {
                summary.lemma_length_passed += 1;
            }
            if validate_psi(&ctx, psi).all_ok() {
                summary.psi_valid += 1;
            }
        }
        summary.members = dec.intervals.len();
        summary.members_shadowing =
            dec.intervals.iter().filter(|iv| ctx.verify_shadowing(iv)).count();
        summary.conditions = Some(check_partial_shadowing(&ctx, &dec, &coverage, sc.tau));

        self.write_file("decomposition.json", |w| {
            Ok(labio::write_decomposition_json(w, &dec, &coverage)?)
        })?;
        self.write_file("coverage.csv", |w| Ok(labio::write_coverage_csv(w, &coverage)?))?;
        self.write_file("lemma_summary.json", |w| Ok(labio::write_json(w, &summary)?))?;
        Ok(())
    }

    pub fn run_gap(&mut self) -> anyhow::Result<()> {
        let ec = self.cfg.entropy.clone();
        let crit_locs = self.crit_locs();
        let orbit = self.base_orbit()?;

        let topo =
            topological_entropy_estimate(&self.map, &crit_locs, &ec.eps_schedule, &ec.n_schedule)?;

        let measures: Vec<EmpiricalMeasure> = ec
            .katok_windows
            .iter()
            .map(|&w| EmpiricalMeasure::new(&orbit, 0..w.min(orbit.horizon())))
            .collect::<Result<_, _>>()?;
        let seq = MeasureSequence::new(measures, "katok-windows")?;
        let katok: Vec<_> = seq
            .measures
            .iter()
            .map(|m| {
                katok_entropy_estimate(&self.map, &crit_locs, m, ec.katok_epsilon, &ec.katok_n_schedule)
            })
            .collect::<Result<_, _>>()?;

        let table = defect_alpha_with_tail(&seq, &self.cfg.lyapunov.delta_grid, self.cfg.lyapunov.tail_fraction)?;
        let phi = phi0_mean(&orbit, ec.delta0, self.constants.lambda_log, 0..orbit.horizon());

        let report = main_report(&GapInputs {
            topo: &topo,
            katok: &katok,
            table: &table,
            phi_mean: phi,
            lambda_log: self.constants.lambda_log,
            critical_count: self.criticals.len(),
            l_min: self.cfg.shadowing.l_min.max(4),
            epsilon: ec.katok_epsilon,
            gamma: ec.gamma,
            delta0: ec.delta0,
        })?;

        #[derive(Serialize)]
        struct GapDoc<'a> {
            lambda_cap: f64,
            lambda_log: f64,
            k_max_order: u32,
            epsilon1: f64,
            report: &'a shadowlab::entropy::GapReport,
            alpha_table: &'a str,
            submultiplicativity: Vec<shadowlab::entropy::SubmultiplicativityCheck>,
        }
        let mut submul = Vec::new();
        for split in &ec.submul_splits {
            submul.push(check_submultiplicativity(
                &self.map,
                &crit_locs,
                ec.submul_n,
                split,
                ec.katok_epsilon * 2.0,
            )?);
        }
        let doc = GapDoc {
            lambda_cap: self.constants.lambda_cap,
            lambda_log: self.constants.lambda_log,
            k_max_order: self.constants.k_max_order,
            epsilon1: self.constants.epsilon1,
            report: &report,
            alpha_table: "defect.json",
            submultiplicativity: submul,
        };
        self.write_file("gap_report.json", |w| Ok(labio::write_json(w, &doc)?))?;
        self.write_file("defect.json", |w| Ok(labio::write_defect_json(w, &table)?))?;

        let fits: Vec<&shadowlab::entropy::EntropyFit> =
            std::iter::once(&topo).chain(katok.iter()).collect();
        self.write_file("spanning.csv", |w| Ok(labio::write_spanning_csv(w, &fits)?))?;
        self.write_types(&ec.types_n, &ec.types_l)?;
        Ok(())
    }

    pub fn run_types(&mut self) -> anyhow::Result<()> {
        let (ns, ls) = (self.cfg.entropy.types_n.clone(), self.cfg.entropy.types_l.clone());
        self.write_types(&ns, &ls)
    }

    fn write_types(&mut self, ns: &[usize], ls: &[usize]) -> anyhow::Result<()> {
        let mut counts = Vec::new();
        for &n in ns {
            for &l in ls {
                counts.push(count_types(n, l));
            }
        }
        self.write_file("types.csv", |w| Ok(labio::write_types_csv(w, &counts)?))?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        let wall = self.started.elapsed().as_millis();
        let record = self.cfg.record_timing;
        let sha = self.config_sha256.clone();
        let outputs = std::mem::take(&mut self.outputs);
        let manifest = RunManifest {
            config_sha256: &sha,
            artifact_version: env!("CARGO_PKG_VERSION"),
            outputs: &outputs,
            wall_clock_ms: record.then_some(wall),
        };
        let path = self.out_dir.join("run_manifest.json");
        let mut w = BufWriter::new(File::create(path)?);
        labio::write_json(&mut w, &manifest)?;
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let d = h.finalize();
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// Seeded start points, drawn sequentially so the list is independent of the
/// worker count.
fn seeded_points(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0.01..0.99)).collect()
}

/// Order-preserving parallel map.
fn rayon_map<T, U, F>(items: &[T], f: F) -> anyhow::Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> anyhow::Result<U> + Send + Sync,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}
