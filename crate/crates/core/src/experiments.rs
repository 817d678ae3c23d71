//! Rank-resolved Haar scan of particleness against coherence.
//!
//! [`run_scan`] draws `samples_per_rank` states for every requested rank
//! (Haar pure states for rank 1, the induced measure otherwise) and
//! evaluates both trace-norm measures. [`check_bound`] tests the records
//! against the line `P + a·C ≤ b` and [`find_saturating_pure`] searches for
//! pure states that maximize the left-hand side.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::measures::{
    coherence_trace_with, complementarity_value_with, particleness_trace_with, MeasureOptions, MAX_ACCEPTED_GAP,
};
use crate::resource::SystemSpec;
use crate::states::{density_from_pure, sample_haar_pure, sample_state_of_rank, PureState, RandomSeed, PRNG_IDENTITY};

pub const DEFAULT_SLOPE: f64 = 1.3;
pub const DEFAULT_INTERCEPT: f64 = 1.8;
pub const DEFAULT_BOUND_TOL: f64 = 0.02;
/// Largest tolerated fraction of failed samples.
pub const MAX_FAILURE_FRACTION: f64 = 1e-3;
/// Largest dimension the scan accepts; the solver cones grow as `d²`.
pub const MAX_SCAN_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub dim: usize,
    pub samples_per_rank: usize,
    pub ranks: Vec<usize>,
    pub seed: u64,
    /// Interior-point gap and feasibility tolerance.
    pub solver_tolerance: f64,
    pub output: PathBuf,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            samples_per_rank: 3000,
            ranks: vec![1, 2, 3],
            seed: 2020,
            solver_tolerance: 1e-10,
            output: PathBuf::from("scan.csv"),
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 || self.dim > MAX_SCAN_DIM {
            return Err(Error::Config(format!(
                "dim must be in 2..={MAX_SCAN_DIM}, got {}",
                self.dim
            )));
        }
        if self.samples_per_rank == 0 {
            return Err(Error::Config("samples_per_rank must be at least 1".into()));
        }
        if self.ranks.is_empty() {
            return Err(Error::Config("ranks must not be empty".into()));
        }
        if let Some(&r) = self.ranks.iter().find(|&&r| r == 0 || r > self.dim) {
            return Err(Error::InvalidRank { rank: r, dim: self.dim });
        }
        let mut sorted = self.ranks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.ranks.len() {
            return Err(Error::Config("ranks must not repeat".into()));
        }
        if !(self.solver_tolerance > 0.0 && self.solver_tolerance < 1.0) {
            return Err(Error::Config("solver_tolerance must be in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sidecar metadata path: `scan.csv` → `scan.meta.json`.
    pub fn metadata_path(&self) -> PathBuf {
        self.output.with_extension("meta.json")
    }

    /// Plot script path: `scan.csv` → `scan.gp`.
    pub fn plot_path(&self) -> PathBuf {
        self.output.with_extension("gp")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub rank: usize,
    pub sample_index: usize,
    pub coherence: f64,
    pub particleness: f64,
    pub coherence_gap: f64,
    pub particleness_gap: f64,
}

impl ScanRecord {
    pub fn lhs(&self, a: f64) -> f64 {
        self.particleness + a * self.coherence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFailure {
    pub rank: usize,
    pub sample_index: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub config: ScanConfig,
    pub prng: String,
    pub library_version: String,
    pub max_accepted_gap: f64,
    pub evaluated: usize,
    pub failed: usize,
    pub failures: Vec<ScanFailure>,
    pub wall_time_seconds: f64,
    pub mean_sample_millis: f64,
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    /// Successful records ordered by `(rank, sample_index)`.
    pub records: Vec<ScanRecord>,
    pub metadata: ScanMetadata,
}

fn stream_index(rank: usize, sample_index: usize) -> u64 {
    ((rank as u64) << 32) | sample_index as u64
}

/// The state evaluated for `(rank, sample_index)` in a scan with this seed.
pub fn scan_state(cfg: &ScanConfig, rank: usize, sample_index: usize) -> Result<crate::states::DensityMatrix> {
    let mut rng = RandomSeed(cfg.seed).stream(stream_index(rank, sample_index));
    sample_state_of_rank(cfg.dim, rank, &mut rng)
}

fn evaluate(cfg: &ScanConfig, spec: &SystemSpec, opts: &MeasureOptions, rank: usize, idx: usize) -> Result<ScanRecord> {
    let rho = scan_state(cfg, rank, idx)?;
    let c = coherence_trace_with(&rho, opts)?;
    let p = particleness_trace_with(&rho, spec, opts)?;
    Ok(ScanRecord {
        rank,
        sample_index: idx,
        coherence: c.value,
        particleness: p.value,
        coherence_gap: c.certificate.gap,
        particleness_gap: p.certificate.gap,
    })
}

fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Runs the scan in memory. Samples whose solver fails are logged and left
/// out of the records; more than 0.1% failures is an error.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanOutput> {
    cfg.validate()?;
    let spec = SystemSpec::zero_detuning(cfg.dim);
    let opts = MeasureOptions::with_tolerance(cfg.solver_tolerance);
    let jobs: Vec<(usize, usize)> = cfg
        .ranks
        .iter()
        .flat_map(|&r| (0..cfg.samples_per_rank).map(move |i| (r, i)))
        .collect();
    let started = Instant::now();
    let results = map_ordered(&jobs, |&(r, i)| evaluate(cfg, &spec, &opts, r, i));
    let wall = started.elapsed().as_secs_f64();

    let mut records = Vec::with_capacity(jobs.len());
    let mut failures = Vec::new();
    for (&(rank, sample_index), res) in jobs.iter().zip(results) {
        match res {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::warn!("scan sample rank={rank} index={sample_index} failed: {e}");
                failures.push(ScanFailure {
                    rank,
                    sample_index,
                    error: e.to_string(),
                });
            }
        }
    }
    records.sort_by_key(|r| (r.rank, r.sample_index));
    let total = jobs.len();
    if failures.len() as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total,
        });
    }
    let metadata = ScanMetadata {
        config: cfg.clone(),
        prng: PRNG_IDENTITY.to_string(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        max_accepted_gap: MAX_ACCEPTED_GAP,
        evaluated: total,
        failed: failures.len(),
        failures,
        wall_time_seconds: wall,
        mean_sample_millis: 1e3 * wall / total as f64,
    };
    Ok(ScanOutput { records, metadata })
}

pub const CSV_HEADER: &str = "rank,sample_index,coherence,particleness,coherence_gap,particleness_gap";

/// Decimal rendering with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || x.abs() < 1e-300 {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let decimals = |v: f64| (11 - v.abs().log10().floor() as i32).max(0) as usize;
    let mut prec = decimals(x);
    let s = format!("{x:.prec$}");
    // Rounding can carry into a new leading digit.
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals(rounded) < prec {
        prec = decimals(rounded);
        return format!("{x:.prec$}");
    }
    s
}

pub fn records_to_csv(records: &[ScanRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.rank,
            r.sample_index,
            format_sig12(r.coherence),
            format_sig12(r.particleness),
            format_sig12(r.coherence_gap),
            format_sig12(r.particleness_gap)
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ScanRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidData("unexpected CSV header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::InvalidData(format!("bad CSV row: {line}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::InvalidData(format!("{s}: {e}")));
            let int = |s: &str| s.parse::<usize>().map_err(|e| Error::InvalidData(format!("{s}: {e}")));
            Ok(ScanRecord {
                rank: int(f[0])?,
                sample_index: int(f[1])?,
                coherence: num(f[2])?,
                particleness: num(f[3])?,
                coherence_gap: num(f[4])?,
                particleness_gap: num(f[5])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrittenScan {
    pub csv: PathBuf,
    pub metadata: PathBuf,
}

/// Writes the CSV at `cfg.output` and the metadata sidecar next to it.
pub fn write_scan(out: &ScanOutput) -> Result<WrittenScan> {
    let cfg = &out.metadata.config;
    if let Some(dir) = cfg.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&cfg.output, records_to_csv(&out.records))?;
    let meta = cfg.metadata_path();
    fs::write(&meta, serde_json::to_string_pretty(&out.metadata)? + "\n")?;
    Ok(WrittenScan {
        csv: cfg.output.clone(),
        metadata: meta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMaximum {
    pub rank: usize,
    pub count: usize,
    pub max_lhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub a: f64,
    pub b: f64,
    pub tol_bound: f64,
    pub max_lhs: f64,
    pub violations: usize,
    /// `(rank, sample_index)` of the record attaining `max_lhs`.
    pub argmax: (usize, usize),
    /// Ascending in rank.
    pub per_rank: Vec<RankMaximum>,
    /// Whether the per-rank maxima strictly decrease with rank; `None` with a single rank.
    pub ordered_by_rank: Option<bool>,
    /// Smallest intercept `b'` with `P + a·C ≤ b'` on every record.
    pub fitted_intercept: f64,
}

pub fn check_bound(records: &[ScanRecord], a: f64, b: f64, tol_bound: f64) -> Result<BoundCheck> {
    let first = records.first().ok_or(Error::EmptyInput)?;
    let mut max_lhs = first.lhs(a);
    let mut argmax = (first.rank, first.sample_index);
    let mut violations = 0;
    let mut per_rank: Vec<RankMaximum> = Vec::new();
    for r in records {
        let lhs = r.lhs(a);
        if lhs > b + tol_bound {
            violations += 1;
        }
        if lhs > max_lhs {
            max_lhs = lhs;
            argmax = (r.rank, r.sample_index);
        }
        match per_rank.iter_mut().find(|m| m.rank == r.rank) {
            Some(m) => {
                m.count += 1;
                m.max_lhs = m.max_lhs.max(lhs);
            }
            None => per_rank.push(RankMaximum {
                rank: r.rank,
                count: 1,
                max_lhs: lhs,
            }),
        }
    }
    per_rank.sort_by_key(|m| m.rank);
    let ordered_by_rank = (per_rank.len() > 1).then(|| per_rank.windows(2).all(|w| w[0].max_lhs > w[1].max_lhs));
    Ok(BoundCheck {
        a,
        b,
        tol_bound,
        max_lhs,
        violations,
        argmax,
        per_rank,
        ordered_by_rank,
        fitted_intercept: max_lhs,
    })
}

/// Writes a gnuplot script that plots the scan CSV (referenced by `csv_name`,
/// relative to the script) colored by rank, with the line `P + a·C = b`.
pub fn emit_plot_script(records: &[ScanRecord], csv_name: &str, a: f64, b: f64, path: &Path) -> Result<()> {
    let mut ranks: Vec<usize> = records.iter().map(|r| r.rank).collect();
    ranks.sort_unstable();
    ranks.dedup();
    let image = path
        .file_stem()
        .map(|s| format!("{}.png", s.to_string_lossy()))
        .unwrap_or_else(|| "scan.png".into());
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script: trace-norm particleness against coherence");
    let _ = writeln!(s, "set terminal pngcairo size 800,600");
    let _ = writeln!(s, "set output '{image}'");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set xlabel 'C_{{tr}}'");
    let _ = writeln!(s, "set ylabel 'P_{{tr}}'");
    let _ = writeln!(s, "set xrange [0:2]");
    let _ = writeln!(s, "set yrange [0:2]");
    let _ = writeln!(s, "set key top right");
    let _ = writeln!(s, "bound(x) = {b} - {a}*x");
    let mut clauses: Vec<String> = ranks
        .iter()
        .map(|r| {
            format!("'{csv_name}' every ::1 using ($1=={r} ? $3 : 1/0):4 with points pt 7 ps 0.4 title 'rank {r}'")
        })
        .collect();
    clauses.push(format!(
        "bound(x) with lines lw 2 lc rgb 'black' title 'P + {a} C = {b}'"
    ));
    let _ = writeln!(s, "plot {}", clauses.join(", \\\n     "));
    fs::write(path, s)?;
    Ok(())
}

/// Maps `(θ₁, θ₂, φ₁, φ₂)` to `(cos θ₁, sin θ₁ cos θ₂ e^{iφ₁}, sin θ₁ sin θ₂ e^{iφ₂})`.
pub fn qutrit_from_angles(x: &[f64]) -> PureState {
    let (t1, t2, p1, p2) = (x[0], x[1], x[2], x[3]);
    PureState::normalized(vec![
        C64::new(t1.cos(), 0.0),
        C64::from_polar(t1.sin() * t2.cos(), p1),
        C64::from_polar(t1.sin() * t2.sin(), p2),
    ])
    .expect("angles give a unit vector")
}

pub fn angles_from_qutrit(psi: &PureState) -> [f64; 4] {
    let c = psi.amplitudes();
    let t1 = c[0].norm().clamp(0.0, 1.0).acos();
    let t2 = c[2].norm().atan2(c[1].norm());
    let base = c[0].arg();
    [t1, t2, c[1].arg() - base, c[2].arg() - base]
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of size `step`.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let along =
        |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect() };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= ftol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].0.clone();
        let xr = along(&centroid, &worst, -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(&centroid, &worst, -2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let x = along(&centroid, &worst, -0.5);
                let fx = f(&x);
                (x, fx)
            } else {
                let x = along(&centroid, &worst, 0.5);
                let fx = f(&x);
                (x, fx)
            };
            evals += 1;
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = along(&best, &entry.0, 0.5);
                    entry.1 = f(&x);
                    entry.0 = x;
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

#[derive(Debug, Clone, Copy)]
pub struct SaturationOptions {
    pub a: f64,
    pub restarts: usize,
    pub seed: RandomSeed,
    pub max_evals: usize,
    pub initial_step: f64,
}

impl Default for SaturationOptions {
    fn default() -> Self {
        Self {
            a: DEFAULT_SLOPE,
            restarts: 50,
            seed: RandomSeed(0x5a7),
            max_evals: 400,
            initial_step: 0.3,
        }
    }
}

/// Multistart Nelder–Mead maximization of `P + a·C` over pure qutrits.
/// Restart 0 starts from `|2⟩`, the others from Haar-random states.
pub fn find_saturating_pure(spec: &SystemSpec, opts: &SaturationOptions) -> Result<(PureState, f64)> {
    if spec.dim != 3 {
        return Err(Error::WrongDimension {
            expected: 3,
            got: spec.dim,
        });
    }
    if !spec.is_zero_detuning() {
        return Err(Error::WrongSpec);
    }
    if opts.restarts == 0 {
        return Err(Error::Config("restarts must be at least 1".into()));
    }
    let measure = MeasureOptions::default();
    let lhs = |psi: &PureState| complementarity_value_with(&density_from_pure(psi), spec, opts.a, &measure);
    let starts: Vec<usize> = (0..opts.restarts).collect();
    let runs = map_ordered(&starts, |&k| {
        let start = if k == 0 {
            PureState::basis(3, 2)
        } else {
            sample_haar_pure(3, &mut opts.seed.stream(k as u64))
        };
        let x0 = angles_from_qutrit(&start);
        let (x, neg) = nelder_mead(
            |x| match lhs(&qutrit_from_angles(x)) {
                Ok(v) => -v,
                Err(e) => {
                    log::debug!("saturation objective failed: {e}");
                    f64::INFINITY
                }
            },
            &x0,
            opts.initial_step,
            opts.max_evals,
            1e-10,
        );
        (qutrit_from_angles(&x), -neg)
    });
    let (psi, value) = runs
        .into_iter()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Config("every saturation restart failed".into()))?;
    Ok((psi, value))
}
