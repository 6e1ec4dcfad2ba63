//! Run configuration, resolved from four layers in increasing precedence:
//! built-in defaults, a `key = value` file, `SEMISCALE_*` environment
//! variables, and command-line flags.
//!
//! Keys (file, env, and CLI share them; `-` and `_` are interchangeable):
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `lambda` | scale `λ` of the simulated process | 2 |
//! | `hurst` | `H`; a comma list for `bench` | 0.9 (`bench`: 0.1,…,0.9) |
//! | `hurst_prime` | `H′` of the underlying fBm | 0.2 |
//! | `grid` | `uniform` or `geometric` | uniform |
//! | `t` | points per scale interval (geometric) | 20 |
//! | `m` | number of scale intervals (geometric) | 20 |
//! | `n` | uniform steps / bench path length | 100000 (`bench`: 10000) |
//! | `c` | uniform grid end | `n + 1` |
//! | `seed` | master seed | 0 |
//! | `reps` | Monte Carlo repetitions | 500 |
//! | `b_star` | moving-variance window | 10 |
//! | `d_star` | moving-average window | 20 |
//! | `l_star` | variance-split margin | 30 |
//! | `j_star` | variance-split back-off | 50 |
//! | `k_star` | refinement split margin | 20 |
//! | `kmax` | largest stride for the ratio estimators | 5 |
//! | `coverage` | trailing-interval sample coverage | 0.95 |
//! | `grid_width` | candidate half-width (`auto` = 2.5% of `λ₀`) | auto |
//! | `grid_points` | number of candidates | 1000 |
//! | `method` | Hurst method(s): `auto`, `ratio1`, `ratio2`, `qv` | `auto` (`bench`: ratio1,ratio2,qv) |
//! | `initializer` | `split` or `cusum` | split |
//! | `objective` | refinement split objective, `trend` or `level` | trend |
//! | `variance_mode` | `mean_square` or `second_difference` | mean_square |
//! | `input` | `time,value` CSV to analyse instead of simulating | none |
//! | `out` | output directory | out |
//! | `rescale` | estimate-hurst: divide out the scale factor first | false |
//! | `lambda_star` | estimate-hurst: known `λ*` for rescaling | none |
//! | `h_gap` | estimate-hurst: known `H − H′` for rescaling | none |

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::BenchSettings;
use crate::changepoint::ChangePointMethod;
use crate::error::{Error, Result};
use crate::hurst::HurstMethod;
use crate::pipeline::{HurstChoice, ScaleSettings};
use crate::scale::SplitObjective;
use crate::series::SamplingGrid;
use crate::sim::SfbmParams;
use crate::stats::IntervalVarianceMode;

pub const ENV_PREFIX: &str = "SEMISCALE_";

pub const KEYS: &[&str] = &[
    "lambda",
    "hurst",
    "hurst_prime",
    "grid",
    "t",
    "m",
    "n",
    "c",
    "seed",
    "reps",
    "b_star",
    "d_star",
    "l_star",
    "j_star",
    "k_star",
    "kmax",
    "coverage",
    "grid_width",
    "grid_points",
    "method",
    "initializer",
    "objective",
    "variance_mode",
    "input",
    "out",
    "rescale",
    "lambda_star",
    "h_gap",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    EstimateScale,
    EstimateHurst,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    Geometric,
}

/// Every setting with defaults materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub lambda: f64,
    pub hurst: Vec<f64>,
    pub hurst_prime: f64,
    pub grid: GridKind,
    pub t: usize,
    pub m: usize,
    pub n: usize,
    pub c: f64,
    pub seed: u64,
    pub reps: usize,
    pub b_star: usize,
    pub d_star: usize,
    pub l_star: usize,
    pub j_star: usize,
    pub k_star: usize,
    pub kmax: usize,
    pub coverage: f64,
    pub grid_width: Option<f64>,
    pub grid_points: usize,
    pub method: Vec<String>,
    pub initializer: ChangePointMethod,
    pub objective: SplitObjective,
    pub variance_mode: IntervalVarianceMode,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub rescale: bool,
    pub lambda_star: Option<f64>,
    pub h_gap: Option<f64>,
}

/// Settings from one source, keyed by normalized name.
pub type Layer = BTreeMap<String, String>;

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn insert_checked(layer: &mut Layer, key: &str, value: &str, source: &str) -> Result<()> {
    let key = normalize_key(key);
    if !KEYS.contains(&key.as_str()) {
        return Err(Error::Config(format!("unknown key '{key}' in {source}")));
    }
    layer.insert(key, value.trim().to_string());
    Ok(())
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, source: &str) -> Result<Layer> {
    let mut layer = Layer::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{source}:{}: expected key = value", i + 1)))?;
        insert_checked(&mut layer, k, v, source)?;
    }
    Ok(layer)
}

/// Layer from `SEMISCALE_<KEY>` variables; other variables are ignored.
pub fn env_layer(vars: impl IntoIterator<Item = (String, String)>) -> Result<Layer> {
    let mut layer = Layer::new();
    for (k, v) in vars {
        if let Some(key) = k.strip_prefix(ENV_PREFIX) {
            insert_checked(&mut layer, key, &v, "environment")?;
        }
    }
    Ok(layer)
}

pub fn pairs_layer<'a>(pairs: impl IntoIterator<Item = (&'a str, String)>) -> Result<Layer> {
    let mut layer = Layer::new();
    for (k, v) in pairs {
        insert_checked(&mut layer, k, &v, "command line")?;
    }
    Ok(layer)
}

struct Merged(Layer);

impl Merged {
    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.0.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{s}' for '{key}'"))),
        }
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key).map(String::as_str) {
            None | Some("auto") | Some("none") | Some("") => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("invalid value '{s}' for '{key}'"))),
        }
    }

    fn list(&self, key: &str) -> Option<Vec<String>> {
        self.0.get(key).map(|s| {
            s.split(',')
                .map(|p| p.trim().to_string())
                .filter(|p| !p.is_empty())
                .collect()
        })
    }
}

fn parse_enum<T: for<'de> Deserialize<'de>>(key: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

impl RunConfig {
    /// Merge `layers` (later wins) over the defaults for `command`.
    pub fn resolve(command: Command, layers: &[Layer]) -> Result<Self> {
        let mut merged = Layer::new();
        for layer in layers {
            merged.extend(layer.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        let m = Merged(merged);
        let bench = command == Command::Bench;

        let hurst = match m.list("hurst") {
            Some(items) => items
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Config(format!("invalid Hurst value '{s}'")))
                })
                .collect::<Result<Vec<_>>>()?,
            None if bench => BenchSettings::default().hursts,
            None => vec![0.9],
        };
        let n = m.get("n", if bench { 10_000 } else { 100_000 })?;
        let method = m.list("method").unwrap_or_else(|| {
            if bench {
                vec!["ratio1".into(), "ratio2".into(), "qv".into()]
            } else {
                vec!["auto".into()]
            }
        });
        let initializer = match m.0.get("initializer").map(String::as_str) {
            None | Some("split") | Some("variance_split") => ChangePointMethod::VarianceSplit,
            Some("cusum") => ChangePointMethod::Cusum,
            Some(other) => return Err(Error::Config(format!("invalid value '{other}' for 'initializer'"))),
        };
        let objective = match m.0.get("objective") {
            Some(v) => parse_enum("objective", v)?,
            None => SplitObjective::default(),
        };
        let variance_mode = match m.0.get("variance_mode") {
            Some(v) => parse_enum("variance_mode", v)?,
            None => IntervalVarianceMode::default(),
        };
        let grid = match m.0.get("grid").map(String::as_str) {
            None | Some("uniform") => GridKind::Uniform,
            Some("geometric") => GridKind::Geometric,
            Some(other) => return Err(Error::Config(format!("invalid value '{other}' for 'grid'"))),
        };

        let cfg = Self {
            command,
            lambda: m.get("lambda", 2.0)?,
            hurst,
            hurst_prime: m.get("hurst_prime", 0.2)?,
            grid,
            t: m.get("t", 20)?,
            m: m.get("m", 20)?,
            n,
            c: m.get("c", n as f64 + 1.0)?,
            seed: m.get("seed", 0)?,
            reps: m.get("reps", 500)?,
            b_star: m.get("b_star", crate::stats::DEFAULT_MSV_WINDOW)?,
            d_star: m.get("d_star", crate::stats::DEFAULT_AVERAGE_WINDOW)?,
            l_star: m.get("l_star", crate::changepoint::DEFAULT_SPLIT_MARGIN)?,
            j_star: m.get("j_star", crate::changepoint::DEFAULT_BACKOFF)?,
            k_star: m.get("k_star", crate::scale::DEFAULT_SPLIT_MARGIN)?,
            kmax: m.get("kmax", crate::hurst::DEFAULT_MAX_STRIDE)?,
            coverage: m.get("coverage", crate::scale::DEFAULT_COVERAGE)?,
            grid_width: m.opt("grid_width")?,
            grid_points: m.get("grid_points", crate::scale::DEFAULT_CANDIDATES)?,
            method,
            initializer,
            objective,
            variance_mode,
            input: m.opt("input")?,
            out: m.get("out", PathBuf::from("out"))?,
            rescale: m.get("rescale", false)?,
            lambda_star: m.opt("lambda_star")?,
            h_gap: m.opt("h_gap")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.b_star < 2 || self.d_star < 2 || self.l_star < 2 || self.k_star < 2 {
            return bad("all windows (b*, d*, l*, k*) must be >= 2".into());
        }
        if self.reps < 1 {
            return bad("reps must be >= 1".into());
        }
        if self.hurst.is_empty() {
            return bad("at least one Hurst value is required".into());
        }
        if self.command != Command::Bench && self.hurst.len() != 1 {
            return bad("a single Hurst value is expected outside 'bench'".into());
        }
        if self.method.is_empty() {
            return bad("at least one method is required".into());
        }
        match self.command {
            Command::Bench => {
                self.bench_methods()?;
            }
            _ => {
                self.hurst_choice()?;
            }
        }
        Ok(())
    }

    pub fn sfbm_params(&self) -> Result<SfbmParams> {
        SfbmParams::new(self.lambda, self.hurst[0], self.hurst_prime)
    }

    pub fn sampling_grid(&self) -> SamplingGrid {
        match self.grid {
            GridKind::Uniform => SamplingGrid::Uniform {
                end: self.c,
                steps: self.n,
            },
            GridKind::Geometric => SamplingGrid::Geometric {
                lambda: self.lambda,
                points_per_interval: self.t,
                intervals: self.m,
            },
        }
    }

    pub fn scale_settings(&self) -> ScaleSettings {
        ScaleSettings {
            msv_window: self.b_star,
            average_window: self.d_star,
            split_margin: self.l_star,
            backoff: self.j_star,
            refine_margin: self.k_star,
            coverage: self.coverage,
            grid_half_width: self.grid_width,
            grid_points: self.grid_points,
            initializer: self.initializer,
            objective: self.objective,
            variance_mode: self.variance_mode,
        }
    }

    pub fn hurst_choice(&self) -> Result<HurstChoice> {
        match self.method.as_slice() {
            [one] => one.parse().map_err(|_| Error::Config(format!("unknown method '{one}'"))),
            _ => Err(Error::Config("a single method is expected outside 'bench'".into())),
        }
    }

    pub fn bench_methods(&self) -> Result<Vec<HurstMethod>> {
        self.method
            .iter()
            .map(|s| s.parse().map_err(|_| Error::Config(format!("unknown method '{s}'"))))
            .collect()
    }

    pub fn bench_settings(&self) -> Result<BenchSettings> {
        Ok(BenchSettings {
            hursts: self.hurst.clone(),
            n: self.n,
            repetitions: self.reps,
            methods: self.bench_methods()?,
            k_max: self.kmax,
            seed: self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(pairs: &[(&str, &str)]) -> Layer {
        pairs_layer(pairs.iter().map(|&(k, v)| (k, v.to_string()))).unwrap()
    }

    #[test]
    fn defaults_are_materialized() {
        let c = RunConfig::resolve(Command::EstimateScale, &[]).unwrap();
        assert_eq!((c.n, c.c, c.b_star, c.d_star, c.l_star, c.j_star, c.k_star), (100_000, 100_001.0, 10, 20, 30, 50, 20));
        assert_eq!(c.grid_width, None);
        assert_eq!(c.initializer, ChangePointMethod::VarianceSplit);
        let b = RunConfig::resolve(Command::Bench, &[]).unwrap();
        assert_eq!(b.hurst.len(), 9);
        assert_eq!(b.n, 10_000);
        assert_eq!(b.bench_methods().unwrap().len(), 3);
    }

    #[test]
    fn later_layers_win() {
        let file = parse_config_text("# comment\nseed = 4\nb-star=12\nlambda = 4 # trailing\n", "cfg").unwrap();
        let env = env_layer([
            ("SEMISCALE_SEED".to_string(), "5".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ])
        .unwrap();
        let cli = layer(&[("seed", "6")]);
        let c = RunConfig::resolve(Command::Simulate, &[file.clone(), env.clone()]).unwrap();
        assert_eq!((c.seed, c.b_star, c.lambda), (5, 12, 4.0));
        let c = RunConfig::resolve(Command::Simulate, &[file, env, cli]).unwrap();
        assert_eq!(c.seed, 6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config_text("nonsense", "cfg").is_err());
        assert!(parse_config_text("colour = red", "cfg").is_err());
        assert!(env_layer([("SEMISCALE_BOGUS".to_string(), "1".to_string())]).is_err());
        let e = RunConfig::resolve(Command::Simulate, &[layer(&[("b_star", "1")])]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(RunConfig::resolve(Command::Simulate, &[layer(&[("seed", "x")])]).is_err());
        assert!(RunConfig::resolve(Command::Bench, &[layer(&[("method", "ratio1,wavelet")])]).is_err());
        assert!(RunConfig::resolve(Command::EstimateHurst, &[layer(&[("hurst", "0.3,0.4")])]).is_err());
    }

    #[test]
    fn enumerations_parse() {
        let c = RunConfig::resolve(
            Command::EstimateScale,
            &[layer(&[
                ("objective", "level"),
                ("variance_mode", "second_difference"),
                ("initializer", "cusum"),
                ("grid", "geometric"),
                ("grid_width", "0.1"),
            ])],
        )
        .unwrap();
        assert_eq!(c.objective, SplitObjective::Level);
        assert_eq!(c.variance_mode, IntervalVarianceMode::SecondDifference);
        assert_eq!(c.initializer, ChangePointMethod::Cusum);
        assert_eq!(c.grid, GridKind::Geometric);
        assert_eq!(c.grid_width, Some(0.1));
    }
}
