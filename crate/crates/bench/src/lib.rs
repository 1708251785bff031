//! Sweep harness over splitting weights and polynomial order.
//!
//! For each random LQR instance, every `(preset, m)` pair solves the same set
//! of right-hand sides with PCG and, optionally, computes the exact condition
//! number `kappa(L^T A L)` with `L L^T = M_m^{-1}`. Results are averaged per
//! `(preset, m)` and the condition numbers are normalized by the block Jacobi
//! (`DiagonalOnly`, `m = 1`) average.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use stairprecond::ocpgen::{random_instance, random_rhs, GeneratorConfig};
use stairprecond::spectral::spectrum_of_preconditioned;
use stairprecond::{
    factorize, pcg_solve, BlockFactorization, BlockTridiagMatrix, BlockVector, PcgConfig, PolyPreconditioner,
    SplittingWeights,
};
use thiserror::Error;

/// Largest `N n` for which condition numbers are computed densely.
pub const MAX_SPECTRAL_DIM: usize = 600;

/// Attempts per instance before giving up on finding an s.p.d. Schur complement.
const MAX_RESAMPLES: u64 = 16;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] stairprecond::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// A labelled weight pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub label: String,
    pub weights: SplittingWeights,
}

impl Preset {
    pub fn diagonal_only() -> Self {
        Self::named("DiagonalOnly", SplittingWeights::diagonal_only())
    }

    pub fn stairs_only() -> Self {
        Self::named("StairsOnly", SplittingWeights::stairs_only())
    }

    pub fn equal_weights() -> Self {
        Self::named("EqualWeights", SplittingWeights::equal())
    }

    pub fn optimal() -> Self {
        Self::named("Optimal", SplittingWeights::optimal())
    }

    /// `(a, 1 - 2a)`
    pub fn custom(a: f64) -> Self {
        Self::named(&format!("Custom(a={a})"), SplittingWeights::from_a(a))
    }

    fn named(label: &str, weights: SplittingWeights) -> Self {
        Self {
            label: label.to_string(),
            weights,
        }
    }

    /// The four standard presets in plotting order.
    pub fn standard() -> Vec<Self> {
        vec![
            Self::diagonal_only(),
            Self::stairs_only(),
            Self::equal_weights(),
            Self::optimal(),
        ]
    }

    /// Parses the CLI short names `diag`, `stairs`, `equal`, `optimal`.
    pub fn from_short_name(name: &str) -> Option<Self> {
        match name.trim() {
            "diag" => Some(Self::diagonal_only()),
            "stairs" => Some(Self::stairs_only()),
            "equal" => Some(Self::equal_weights()),
            "optimal" => Some(Self::optimal()),
            _ => None,
        }
    }

    fn is_reference(&self) -> bool {
        self.weights == SplittingWeights::diagonal_only()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub num_blocks: usize,
    pub block_size: usize,
    pub num_matrices: usize,
    pub num_rhs: usize,
    pub m_list: Vec<usize>,
    pub presets: Vec<Preset>,
    pub tol: f64,
    pub seed: u64,
    pub with_spectra: bool,
    /// Worker threads; 0 picks the rayon default.
    pub threads: usize,
    /// Writes every instance (text matrix + JSON sidecar) into this directory.
    pub dump_instances: Option<PathBuf>,
    /// Generator knobs other than seed and shape.
    pub generator: GeneratorConfig,
}

impl ExperimentConfig {
    /// 50 matrices, 100 right-hand sides, `m = 1..4`, the four standard
    /// presets, `tol = 1e-6`, spectra on.
    pub fn new(num_blocks: usize, block_size: usize, seed: u64) -> Self {
        Self {
            num_blocks,
            block_size,
            num_matrices: 50,
            num_rhs: 100,
            m_list: vec![1, 2, 3, 4],
            presets: Preset::standard(),
            tol: 1e-6,
            seed,
            with_spectra: true,
            threads: 0,
            dump_instances: None,
            generator: GeneratorConfig::new(seed, num_blocks, block_size),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::Config(msg.to_string()));
        if self.num_matrices == 0 || self.num_rhs == 0 {
            return bad("matrices and rhs counts must be at least 1");
        }
        if self.m_list.is_empty() || self.m_list.contains(&0) {
            return bad("m values must be at least 1");
        }
        if self.presets.is_empty() {
            return bad("no presets selected");
        }
        for p in &self.presets {
            if SplittingWeights::new(p.weights.a(), p.weights.b()).is_err() {
                return bad("preset weights must satisfy 2a + b = 1");
            }
        }
        if !(self.tol > 0.0) {
            return bad("tolerance must be positive");
        }
        Ok(())
    }

    fn instance_config(&self, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            num_blocks: self.num_blocks,
            block_size: self.block_size,
            ..self.generator.clone()
        }
    }

    fn spectra_enabled(&self) -> bool {
        self.with_spectra && self.num_blocks * self.block_size <= MAX_SPECTRAL_DIM
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub preset: String,
    pub m: usize,
    pub mean_iterations: f64,
    pub mean_cond: Option<f64>,
    pub mean_cond_normalized: Option<f64>,
    pub num_failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub rows: Vec<ExperimentRow>,
    /// Instances whose Schur complement failed the s.p.d. check and were re-drawn.
    pub spd_rejections: usize,
}

struct Instance {
    factor: Arc<BlockFactorization>,
    rhs: Vec<BlockVector>,
}

#[derive(Debug, Default, Clone, Copy)]
struct CellStats {
    iterations: usize,
    solved: usize,
    failures: usize,
    cond: Option<f64>,
}

/// Instance `k` is drawn from seed `seed ^ k`; a rejected draw is retried with
/// `seed ^ k ^ (attempt << 32)`.
fn generate_instance(cfg: &ExperimentConfig, k: usize) -> Result<(Instance, usize, GeneratorConfig), BenchError> {
    let base = cfg.seed ^ k as u64;
    let mut rejections = 0;
    for attempt in 0..MAX_RESAMPLES {
        let gen = cfg.instance_config(base ^ (attempt << 32));
        match random_instance(&gen) {
            Ok(matrix) => {
                let matrix = Arc::new(matrix);
                let factor = Arc::new(factorize(matrix)?);
                let rhs = random_rhs(&gen, cfg.num_rhs);
                return Ok((Instance { factor, rhs }, rejections, gen));
            }
            Err(stairprecond::Error::SchurNotSpd { .. }) => rejections += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Err(BenchError::Config(format!(
        "instance {k}: no s.p.d. Schur complement after {MAX_RESAMPLES} draws"
    )))
}

fn build_preconditioner(
    weights: SplittingWeights,
    m: usize,
    factor: &Arc<BlockFactorization>,
) -> Result<PolyPreconditioner, stairprecond::Error> {
    if weights.in_c_g() {
        PolyPreconditioner::new(weights, m, factor.clone())
    } else {
        PolyPreconditioner::new_unguaranteed(weights, m, factor.clone())
    }
}

fn run_cell(
    inst: &Instance,
    weights: SplittingWeights,
    m: usize,
    tol: f64,
    spectra: bool,
) -> Result<CellStats, BenchError> {
    let p = build_preconditioner(weights, m, &inst.factor)?;
    let a: &BlockTridiagMatrix = inst.factor.matrix();
    let pcg_cfg = PcgConfig::for_matrix(a).with_tol(tol);
    let mut stats = CellStats::default();
    for b in &inst.rhs {
        match pcg_solve(a, b, &p, &pcg_cfg) {
            Ok(res) => {
                stats.iterations += res.iterations;
                stats.solved += 1;
            }
            Err(_) => stats.failures += 1,
        }
    }
    if spectra {
        stats.cond = spectrum_of_preconditioned(&p).ok().map(|r| r.cond);
    }
    Ok(stats)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Runs the full sweep. Results are independent of the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, BenchError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| BenchError::ThreadPool(e.to_string()))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, BenchError> {
    let generated: Vec<(Instance, usize, GeneratorConfig)> = (0..cfg.num_matrices)
        .into_par_iter()
        .map(|k| generate_instance(cfg, k))
        .collect::<Result<_, _>>()?;

    if let Some(dir) = &cfg.dump_instances {
        std::fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.clone(),
            source,
        })?;
        for (k, (inst, _, gen)) in generated.iter().enumerate() {
            let stem = dir.join(format!("instance_{k:03}"));
            inst.factor.matrix().save(stem.with_extension("txt"))?;
            gen.write_sidecar(stem.with_extension("json"))?;
        }
    }

    let spd_rejections = generated.iter().map(|g| g.1).sum();
    let instances: Vec<&Instance> = generated.iter().map(|g| &g.0).collect();
    let spectra = cfg.spectra_enabled();

    let combos: Vec<(usize, usize)> = (0..cfg.presets.len())
        .flat_map(|p| cfg.m_list.iter().map(move |&m| (p, m)))
        .collect();
    let tasks: Vec<(usize, usize, usize)> = (0..instances.len())
        .flat_map(|k| combos.iter().map(move |&(p, m)| (k, p, m)))
        .collect();
    let cells: Vec<CellStats> = tasks
        .par_iter()
        .map(|&(k, p, m)| run_cell(instances[k], cfg.presets[p].weights, m, cfg.tol, spectra))
        .collect::<Result<_, _>>()?;

    // Block Jacobi with m = 1 is the normalization reference, computed even when
    // it is not part of the sweep.
    let reference_cond = if spectra {
        let conds: Vec<Option<f64>> = match combos
            .iter()
            .position(|&(p, m)| cfg.presets[p].is_reference() && m == 1)
        {
            Some(idx) => (0..instances.len()).map(|k| cells[k * combos.len() + idx].cond).collect(),
            None => instances
                .par_iter()
                .map(|inst| {
                    let p = PolyPreconditioner::new(SplittingWeights::diagonal_only(), 1, inst.factor.clone()).ok()?;
                    spectrum_of_preconditioned(&p).ok().map(|r| r.cond)
                })
                .collect(),
        };
        mean(conds.into_iter().flatten())
    } else {
        None
    };

    let rows = combos
        .iter()
        .enumerate()
        .map(|(idx, &(p, m))| {
            let per_matrix: Vec<&CellStats> = (0..instances.len()).map(|k| &cells[k * combos.len() + idx]).collect();
            let iterations: usize = per_matrix.iter().map(|c| c.iterations).sum();
            let solved: usize = per_matrix.iter().map(|c| c.solved).sum();
            let failures = per_matrix.iter().map(|c| c.failures).sum();
            let mean_cond = if spectra {
                mean(per_matrix.iter().filter_map(|c| c.cond))
            } else {
                None
            };
            let normalized = match (mean_cond, reference_cond) {
                (Some(c), Some(r)) => Some(c / r),
                _ => None,
            };
            ExperimentRow {
                preset: cfg.presets[p].label.clone(),
                m,
                mean_iterations: if solved > 0 {
                    iterations as f64 / solved as f64
                } else {
                    f64::NAN
                },
                mean_cond,
                mean_cond_normalized: normalized,
                num_failures: failures,
            }
        })
        .collect();

    Ok(ExperimentOutcome { rows, spd_rejections })
}

/// Formats with 6 significant digits in the style of C's `%g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

pub const CSV_HEADER: &str = "preset,m,mean_iterations,mean_cond,mean_cond_normalized,num_failures";

struct CsvRow<'a>(&'a ExperimentRow);

impl fmt::Display for CsvRow<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        let opt = |v: Option<f64>| v.map(format_sig6).unwrap_or_default();
        write!(
            f,
            "{},{},{},{},{},{}",
            r.preset,
            r.m,
            format_sig6(r.mean_iterations),
            opt(r.mean_cond),
            opt(r.mean_cond_normalized),
            r.num_failures
        )
    }
}

pub fn to_csv_string(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&CsvRow(r).to_string());
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[ExperimentRow], path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    std::fs::write(path, to_csv_string(rows)).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRow>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(BenchError::Csv {
                line: 1,
                msg: "missing header".into(),
            })
        }
    }
    lines
        .map(|(i, line)| {
            let err = |msg: &str| BenchError::Csv {
                line: i + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(err("expected 6 fields"));
            }
            let opt = |s: &str| -> Result<Option<f64>, BenchError> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| err("bad number"))
                }
            };
            Ok(ExperimentRow {
                preset: fields[0].to_string(),
                m: fields[1].parse().map_err(|_| err("bad m"))?,
                mean_iterations: fields[2].parse().map_err(|_| err("bad mean_iterations"))?,
                mean_cond: opt(fields[3])?,
                mean_cond_normalized: opt(fields[4])?,
                num_failures: fields[5].parse().map_err(|_| err("bad num_failures"))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(12.3456789), "12.3457");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(-2.5e-7), "-2.5e-7");
        assert_eq!(format_sig6(999999.7), "1e6");
        assert_eq!(format_sig6(0.0), "0");
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(to_csv_string(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            ExperimentRow {
                preset: "Optimal".into(),
                m: 3,
                mean_iterations: 17.123456789,
                mean_cond: Some(123.456789),
                mean_cond_normalized: Some(0.0123456789),
                num_failures: 2,
            },
            ExperimentRow {
                preset: "DiagonalOnly".into(),
                m: 1,
                mean_iterations: 40.0,
                mean_cond: None,
                mean_cond_normalized: None,
                num_failures: 0,
            },
        ];
        let text = to_csv_string(&rows);
        assert!(!text.contains('\r'));
        let back = parse_csv(&text).unwrap();
        let close = |x: f64, y: f64| ((x - y) / y).abs() < 5e-6;
        assert_eq!(back[0].preset, "Optimal");
        assert!(close(back[0].mean_iterations, rows[0].mean_iterations));
        assert!(close(back[0].mean_cond.unwrap(), 123.456789));
        assert!(close(back[0].mean_cond_normalized.unwrap(), 0.0123456789));
        assert_eq!(back[1], rows[1]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(4, 2, 0);
        assert!(cfg.validate().is_ok());
        cfg.m_list = vec![0];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(4, 2, 0);
        cfg.num_rhs = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn preset_names() {
        assert_eq!(Preset::from_short_name("optimal"), Some(Preset::optimal()));
        assert_eq!(Preset::from_short_name("equal").unwrap().weights, SplittingWeights::equal());
        assert!(Preset::from_short_name("nope").is_none());
        assert_eq!(Preset::custom(0.25).weights.b(), 0.5);
    }
}
