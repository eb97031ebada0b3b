//! Experiment configuration: one TOML file drives every pipeline stage.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use shadowlab::{DomainKind, EscapePolicy, SmoothMap};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for every pseudo-random draw in the run.
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    /// 0 = take LAB_WORKERS or the rayon default.
    #[serde(default)]
    pub workers: usize,
    /// Record wall-clock in the manifest (off by default: timing breaks
    /// byte-identical reruns).
    #[serde(default)]
    pub record_timing: bool,
    pub map: MapConfig,
    pub orbit: OrbitConfig,
    #[serde(default)]
    pub lyapunov: LyapunovConfig,
    #[serde(default)]
    pub shadowing: ShadowingConfig,
    #[serde(default)]
    pub entropy: EntropyConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    /// logistic | doubling | cubic | trig_circle | poly.
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
    /// Ascending-degree coefficients as decimal strings (family = "poly").
    #[serde(default)]
    pub coefficients: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    /// Explicit start point; absent = seeded draws.
    #[serde(default)]
    pub x0: Option<f64>,
    pub n: usize,
    #[serde(default)]
    pub escape: EscapePolicy,
    /// 0 = plain f64 iteration; >= 64 = extended-precision iteration.
    #[serde(default)]
    pub precision_bits: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovConfig {
    /// Number of seeded orbits.
    pub seeds: usize,
    /// Prefix-window lengths for the measure sequence.
    pub window_schedule: Vec<usize>,
    pub delta_grid: Vec<f64>,
    pub tail_fraction: f64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            seeds: 8,
            window_schedule: vec![1000, 10_000, 100_000],
            delta_grid: vec![0.5, 0.1, 0.02, 0.004, 0.0008],
            tail_fraction: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShadowingConfig {
    pub epsilon: f64,
    pub l_min: usize,
    /// 0.0 = admissible delta from the constants (choose_delta).
    pub delta: f64,
    pub schedule_start: usize,
    pub schedule_ratio: f64,
    /// Admissible final deficit rate for the coverage condition.
    pub tau: f64,
    pub precision_bits: usize,
}

impl Default for ShadowingConfig {
    fn default() -> Self {
        ShadowingConfig {
            epsilon: 0.1,
            l_min: 3,
            delta: 0.0,
            schedule_start: 1024,
            schedule_ratio: 2.0,
            tau: 0.02,
            precision_bits: 256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyConfig {
    pub eps_schedule: Vec<f64>,
    pub n_schedule: Vec<usize>,
    pub katok_epsilon: f64,
    pub katok_n_schedule: Vec<usize>,
    /// Window prefixes of the base orbit used as the measure sequence.
    pub katok_windows: Vec<usize>,
    pub gamma: f64,
    /// δ₀ of the φ₀ observable.
    pub delta0: f64,
    pub types_n: Vec<usize>,
    pub types_l: Vec<usize>,
    pub submul_n: usize,
    pub submul_splits: Vec<Vec<usize>>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            eps_schedule: vec![0.2, 0.1],
            n_schedule: vec![8, 9, 10, 11, 12],
            katok_epsilon: 0.1,
            katok_n_schedule: vec![4, 5, 6, 7, 8, 9, 10],
            katok_windows: vec![1000, 10_000, 100_000],
            gamma: 0.05,
            delta0: 0.001,
            types_n: vec![4, 200],
            types_l: vec![2, 8, 16, 32],
            submul_n: 12,
            submul_splits: vec![vec![6, 6], vec![4, 4, 4]],
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> anyhow::Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
        cfg.validate()?;
        Ok((cfg, text))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.orbit.n < 1 {
            bail!("orbit.n must be >= 1");
        }
        if self.lyapunov.seeds == 0 {
            bail!("lyapunov.seeds must be >= 1");
        }
        if self.lyapunov.window_schedule.is_empty() {
            bail!("lyapunov.window_schedule must be nonempty");
        }
        if !(self.shadowing.epsilon > 0.0) {
            bail!("shadowing.epsilon must be positive");
        }
        if self.shadowing.l_min == 0 {
            bail!("shadowing.l_min must be >= 1");
        }
        if self.entropy.types_l.iter().any(|&l| l == 0) {
            bail!("entropy.types_l entries must be >= 1");
        }
        if let Some(x0) = self.orbit.x0 {
            if !(0.0..=1.0).contains(&x0) {
                bail!("orbit.x0 must lie in [0, 1]");
            }
        }
        Ok(())
    }

    pub fn build_map(&self) -> anyhow::Result<SmoothMap> {
        let m = &self.map;
        let map = match m.family.as_str() {
            "logistic" => {
                let a = *m.params.first().unwrap_or(&4.0);
                SmoothMap::logistic(a)
            }
            "doubling" => SmoothMap::doubling(),
            "cubic" => SmoothMap::cubic(),
            "trig_circle" => {
                if m.params.len() != 3 {
                    bail!("trig_circle needs params = [m, beta, k]");
                }
                SmoothMap::trig_circle(m.params[0] as i32, m.params[1], m.params[2])
            }
            "poly" => {
                if m.coefficients.is_empty() {
                    bail!("poly needs coefficients (ascending degree, decimal strings)");
                }
                let coeffs: Vec<f64> = m
                    .coefficients
                    .iter()
                    .map(|s| s.trim().parse::<f64>().context("bad coefficient"))
                    .collect::<anyhow::Result<_>>()?;
                SmoothMap::polynomial(coeffs)
            }
            other => bail!("unknown map family {other:?}"),
        };
        if map.domain == DomainKind::UnitInterval {
            map.check_into_domain(2000)
                .map_err(|e| anyhow::anyhow!("map does not preserve [0,1]: {e}"))?;
        }
        Ok(map)
    }
}
