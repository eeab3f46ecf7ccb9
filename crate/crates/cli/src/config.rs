//! Run configuration: a TOML file with one section per module, overridden
//! by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qofc::comb::DEFAULT_FSR_HZ;
use qofc::gaussian::{BuildOptions, StoragePolicy, DENSE_MODE_THRESHOLD};
use qofc::homodyne::{BhdConfig, DEFAULT_BANDWIDTH_HZ, DEFAULT_DARK_DB};
use qofc::{from_db, r_from_db, CombSpec, Pol, PumpConfig, Tolerances};

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub comb: CombSection,
    #[serde(default)]
    pub pumps: PumpSection,
    #[serde(default)]
    pub bhd: BhdSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub imperfect: ImperfectSection,
    #[serde(default)]
    pub bench: BenchSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombSection {
    pub n_min: Option<i64>,
    pub n_max: Option<i64>,
    pub delta_omega: Option<f64>,
    pub omega0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub p_z: Option<i64>,
    pub p_y: Option<i64>,
    pub r: Option<f64>,
    pub r_z: Option<f64>,
    pub r_y: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BhdSection {
    pub lo_center: Option<Pol>,
    pub lo_offset: Option<f64>,
    pub sideband_n: Option<i64>,
    pub theta_lo: Option<f64>,
    pub theta_o: Option<f64>,
    pub dark_db: Option<f64>,
    pub bandwidth_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub points: Option<usize>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImperfectSection {
    pub r: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub modes: Option<usize>,
    pub storage: Option<Storage>,
    pub dense_threshold: Option<usize>,
    pub allow_large_dense: Option<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Storage {
    #[default]
    Auto,
    Dense,
    Sparse,
}

impl From<Storage> for StoragePolicy {
    fn from(s: Storage) -> Self {
        match s {
            Storage::Auto => StoragePolicy::Auto,
            Storage::Dense => StoragePolicy::Dense,
            Storage::Sparse => StoragePolicy::Sparse,
        }
    }
}

/// Values given on the command line; `None` keeps the file value.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub r: Option<f64>,
    pub epsilon: Option<f64>,
    pub p_z: Option<i64>,
    pub p_y: Option<i64>,
    pub n_min: Option<i64>,
    pub n_max: Option<i64>,
    pub dark_db: Option<f64>,
}

/// Default window: 60 modes around the half-pump frequency.
pub const DEFAULT_N_MIN: i64 = -15;
pub const DEFAULT_N_MAX: i64 = 14;

/// Where a value came from, for error messages.
struct Source<'a> {
    path: Option<&'a Path>,
    text: &'a str,
}

impl Source<'_> {
    /// 1-based line of `key = ...` inside `[section]`, or of the section
    /// header when the key is absent.
    fn locate(&self, section: &str, key: Option<&str>) -> Option<usize> {
        let mut in_section = false;
        let mut header = None;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('[') {
                in_section = line.trim_matches(|c| c == '[' || c == ']').trim() == section;
                if in_section {
                    header = Some(i + 1);
                }
                continue;
            }
            if in_section {
                if let Some(key) = key {
                    let name = line.split('=').next().unwrap_or("").trim();
                    if name == key {
                        return Some(i + 1);
                    }
                }
            }
        }
        header
    }

    fn error(&self, section: &str, key: Option<&str>, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.path.map(Path::to_path_buf),
            line: self.locate(section, key),
            message: message.into(),
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub comb: CombSpec,
    pub pumps: PumpConfig,
    pub bhd: BhdConfig,
    pub scan_grid: Vec<f64>,
    pub out_dir: PathBuf,
    pub format: Format,
    pub imperfect_r: f64,
    pub epsilons: Vec<f64>,
    pub bench_modes: usize,
    pub build: BuildOptions,
}

/// The bench window holds `modes / 2` frequencies, each with two rails.
pub fn check_bench_modes(modes: usize) -> Result<(), CliError> {
    if modes < 4 || modes % 2 != 0 {
        return Err(CliError::Config {
            path: None,
            line: None,
            message: format!("bench modes must be an even number of at least 4, got {modes}"),
        });
    }
    Ok(())
}

pub fn read_file(path: &Path) -> Result<(String, FileConfig), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: Some(path.to_path_buf()),
        line: None,
        message: format!("cannot read config: {e}"),
    })?;
    let parsed = toml::from_str::<FileConfig>(&text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
        CliError::Config {
            path: Some(path.to_path_buf()),
            line,
            message: e.message().to_string(),
        }
    })?;
    Ok((text, parsed))
}

/// Reads and validates the configuration. The `[imperfect]` values are
/// only checked when `check_imperfect` is set.
pub fn load(path: Option<&Path>, flags: &Overrides, check_imperfect: bool) -> Result<RunConfig, CliError> {
    let (text, file) = match path {
        Some(p) => read_file(p)?,
        None => (String::new(), FileConfig::default()),
    };
    resolve(&file, flags, Source { path, text: &text }, check_imperfect)
}

fn resolve(
    file: &FileConfig,
    flags: &Overrides,
    src: Source<'_>,
    check_imperfect: bool,
) -> Result<RunConfig, CliError> {
    let tolerances = file.tolerances.unwrap_or_default();
    for (key, v) in [
        ("symmetry", tolerances.symmetry),
        ("symplectic", tolerances.symplectic),
        ("purity", tolerances.purity),
        ("block_zero", tolerances.block_zero),
        ("theta_independence", tolerances.theta_independence),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(src.error("tolerances", Some(key), format!("{key} must be positive, got {v}")));
        }
    }

    let n_min = flags.n_min.or(file.comb.n_min).unwrap_or(DEFAULT_N_MIN);
    let n_max = flags.n_max.or(file.comb.n_max).unwrap_or(DEFAULT_N_MAX);
    let comb = CombSpec::new(
        file.comb.delta_omega.unwrap_or(DEFAULT_FSR_HZ),
        file.comb.omega0.unwrap_or(0.0),
        n_min,
        n_max,
    )
    .map_err(|e| src.error("comb", Some(if n_min >= n_max { "n_max" } else { "delta_omega" }), e.to_string()))?;

    let p = &file.pumps;
    let r = flags.r.or(p.r).unwrap_or_else(|| r_from_db(-3.2));
    let epsilon = flags.epsilon.or(p.epsilon).unwrap_or(0.0);
    let (r_z, r_y) = if flags.r.is_some() || flags.epsilon.is_some() {
        (r + epsilon, r - epsilon)
    } else {
        (p.r_z.unwrap_or(r + epsilon), p.r_y.unwrap_or(r - epsilon))
    };
    let pumps = PumpConfig::new(flags.p_z.or(p.p_z).unwrap_or(1), flags.p_y.or(p.p_y).unwrap_or(-1), r_z, r_y)
        .map_err(|e| {
            let key = if r_z < 0.0 || r_y < 0.0 { "r" } else { "p_y" };
            src.error("pumps", Some(key), e.to_string())
        })?;

    let b = &file.bhd;
    let dark_db = flags.dark_db.or(b.dark_db).unwrap_or(DEFAULT_DARK_DB);
    let bhd = BhdConfig {
        lo_center: b.lo_center.unwrap_or(Pol::Y),
        lo_offset: b.lo_offset.unwrap_or(0.0),
        sideband_n: b.sideband_n.unwrap_or(0),
        theta_lo: b.theta_lo.unwrap_or(0.0),
        theta_o: b.theta_o.unwrap_or(0.0),
        dark_to_shot: from_db(dark_db),
        bandwidth_hz: b.bandwidth_hz.unwrap_or(DEFAULT_BANDWIDTH_HZ),
    };
    bhd.validate(&comb).map_err(|e| src.error("bhd", Some("sideband_n"), e.to_string()))?;

    let points = file.scan.points.unwrap_or(64);
    let theta_min = file.scan.theta_min.unwrap_or(0.0);
    let theta_max = file.scan.theta_max.unwrap_or(2.0 * std::f64::consts::PI);
    if points == 0 {
        return Err(src.error("scan", Some("points"), "points must be at least 1"));
    }
    if !(theta_max > theta_min) {
        return Err(src.error("scan", Some("theta_max"), "theta_max must exceed theta_min"));
    }

    let imperfect_r = flags.r.or(file.imperfect.r).unwrap_or(0.4);
    let epsilons = match (flags.epsilon, &file.imperfect.epsilons) {
        (Some(e), _) => vec![e],
        (None, Some(list)) => list.clone(),
        (None, None) => vec![0.005, 0.01, 0.02, 0.05],
    };
    if check_imperfect && epsilons.is_empty() {
        return Err(src.error("imperfect", Some("epsilons"), "at least one epsilon is needed"));
    }
    for &e in epsilons.iter().filter(|_| check_imperfect) {
        qofc::imperfect::ImbalanceSpec::new(imperfect_r, e)
            .map_err(|err| src.error("imperfect", Some("epsilons"), err.to_string()))?;
    }

    let bench_modes = file.bench.modes.unwrap_or(6700);
    check_bench_modes(bench_modes).map_err(|e| match e {
        CliError::Config { message, .. } => src.error("bench", Some("modes"), message),
        other => other,
    })?;
    let build = BuildOptions {
        policy: file.bench.storage.unwrap_or_default().into(),
        dense_threshold: file.bench.dense_threshold.unwrap_or(DENSE_MODE_THRESHOLD),
        allow_large_dense: file.bench.allow_large_dense.unwrap_or(false),
        tolerances,
    };

    Ok(RunConfig {
        comb,
        pumps,
        bhd,
        scan_grid: qofc::homodyne::uniform_grid(points, theta_min, theta_max),
        out_dir: flags
            .out
            .clone()
            .or_else(|| file.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        format: flags.format.or(file.output.format).unwrap_or_default(),
        imperfect_r,
        epsilons,
        bench_modes,
        build,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        let file: FileConfig = toml::from_str(text).unwrap();
        resolve(&file, &Overrides::default(), Source { path: None, text }, true)
    }

    #[test]
    fn defaults() {
        let cfg = parse("").unwrap();
        assert_eq!((cfg.comb.n_min, cfg.comb.n_max), (-15, 14));
        assert_eq!((cfg.pumps.p_z, cfg.pumps.p_y), (1, -1));
        assert!((10.0 * (-2.0 * cfg.pumps.r_z).exp().log10() + 3.2).abs() < 1e-12);
        assert!((cfg.bhd.dark_to_shot - 10f64.powf(-1.3)).abs() < 1e-15);
        assert_eq!(cfg.scan_grid.len(), 64);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn flags_override_file() {
        let text = "[pumps]\np_z = 3\nr = 0.2\n";
        let file: FileConfig = toml::from_str(text).unwrap();
        let flags = Overrides { r: Some(0.5), p_y: Some(-3), ..Overrides::default() };
        let cfg = resolve(&file, &flags, Source { path: None, text }, true).unwrap();
        assert_eq!((cfg.pumps.p_z, cfg.pumps.p_y), (3, -3));
        assert_eq!((cfg.pumps.r_z, cfg.pumps.r_y), (0.5, 0.5));
    }

    #[test]
    fn epsilon_splits_squeezing() {
        let text = "[pumps]\nr = 0.4\nepsilon = 0.1\n";
        let cfg = parse(text).unwrap();
        assert!((cfg.pumps.r_z - 0.5).abs() < 1e-15 && (cfg.pumps.r_y - 0.3).abs() < 1e-15);
    }

    #[test]
    fn validation_errors_point_at_the_line() {
        let text = "[comb]\nn_min = 0\n\n[pumps]\np_z = 1\np_y = 2\n";
        let Err(CliError::Config { line, message, .. }) = parse(text) else {
            panic!("expected a config error");
        };
        assert_eq!(line, Some(6));
        assert!(message.contains("even"), "{message}");

        let text = "[comb]\nn_min = 5\nn_max = 3\n";
        let Err(CliError::Config { line, .. }) = parse(text) else {
            panic!("expected a config error");
        };
        assert_eq!(line, Some(3));
    }

    #[test]
    fn sideband_beyond_bandwidth() {
        let text = "[bhd]\nsideband_n = 20\n";
        let Err(CliError::Config { line, .. }) = parse(text) else {
            panic!("expected a config error");
        };
        assert_eq!(line, Some(2));
    }

    #[test]
    fn imperfect_checked_on_demand() {
        let text = "[imperfect]\nr = 0.1\nepsilons = [0.01, 0.2]\n";
        let file: FileConfig = toml::from_str(text).unwrap();
        let flags = Overrides::default();
        assert!(resolve(&file, &flags, Source { path: None, text }, false).is_ok());
        let Err(CliError::Config { line, .. }) = resolve(&file, &flags, Source { path: None, text }, true) else {
            panic!("expected a config error");
        };
        assert_eq!(line, Some(3));
    }
}
