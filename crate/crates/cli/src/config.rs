//! Job configuration: a line-oriented `key = value` format with `[section]`
//! headers. Numbers are written either as exact rationals `p/q` or decimals.
//!
//! ```text
//! [system]
//! ratios = 1/2, 1/2, 1/2
//! ambient_dim = 2
//!
//! [generator]
//! volume = 0.10825317547305483
//! inradius = 0.14433756729740643
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write};
use std::path::Path;

use fractube_core::ifs_zeta::{IfsSystem, DEFAULT_LATTICE_TOL};
use fractube_core::oracle::{PlanarIfs, PlanarMap, DEFAULT_NODE_BUDGET};
use fractube_core::MonophaseGenerator;

use crate::error::CliError;

/// A number as written in the config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Rational { num: i64, den: u64 },
    Decimal(f64),
}

impl Number {
    pub fn value(self) -> f64 {
        match self {
            Number::Rational { num, den } => num as f64 / den as f64,
            Number::Decimal(x) => x,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational { num, den } => write!(f, "{num}/{den}"),
            Number::Decimal(x) => write!(f, "{x:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Coefficients {
        inradius: Number,
        kappa: Vec<Number>,
    },
    Polytope {
        volume: Number,
        inradius: Number,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub maps: Vec<PlanarMap>,
    pub hull: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Numeric {
    pub im_max: f64,
    pub m_max: usize,
    pub seed: u64,
    pub budget: u64,
    pub lattice_tol: f64,
    pub tube_tol: f64,
    pub samples: u64,
    pub mc_eps: Option<f64>,
    pub strip: Option<(f64, f64)>,
}

impl Default for Numeric {
    fn default() -> Self {
        Self {
            im_max: 200.0,
            m_max: 2000,
            seed: 42,
            budget: DEFAULT_NODE_BUDGET,
            lattice_tol: DEFAULT_LATTICE_TOL,
            tube_tol: 1e-3,
            samples: 1_000_000,
            mc_eps: None,
            strip: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub ratios: Vec<Number>,
    pub ambient_dim: usize,
    pub lattice: Option<(Number, Vec<u32>)>,
    pub generator: GeneratorSpec,
    pub geometry: Option<Geometry>,
    pub compatibility: bool,
    pub outer_content_k: f64,
    pub numeric: Numeric,
}

/// The analysis objects a config describes.
#[derive(Debug, Clone)]
pub struct Job {
    pub system: IfsSystem,
    pub generator: MonophaseGenerator,
    pub planar: Option<PlanarIfs>,
    pub config: JobConfig,
}

const SECTIONS: [(&str, &[&str]); 5] = [
    (
        "system",
        &["ratios", "ambient_dim", "lattice_base", "lattice_exponents"],
    ),
    ("generator", &["volume", "inradius", "kappa"]),
    ("geometry", &["map", "hull"]),
    ("content", &["compatibility", "outer_content_k"]),
    (
        "numeric",
        &[
            "im_max",
            "m_max",
            "seed",
            "budget",
            "lattice_tol",
            "tube_tol",
            "samples",
            "mc_eps",
            "strip",
        ],
    ),
];

struct Entry {
    line: usize,
    section: &'static str,
    key: &'static str,
    value: String,
}

fn parse_error(line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut section: Option<&'static str> = None;
    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, format!("malformed section header `{content}`")))?
                .trim();
            section = Some(
                SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .map(|(s, _)| *s)
                    .ok_or_else(|| parse_error(line, format!("unknown section [{name}]")))?,
            );
            continue;
        }
        let sec = section.ok_or_else(|| parse_error(line, "key outside of any section"))?;
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let keys = SECTIONS.iter().find(|(s, _)| *s == sec).unwrap().1;
        let key = *keys
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| parse_error(line, format!("unknown key `{key}` in [{sec}]")))?;
        if key != "map" && !seen.insert((sec, key)) {
            return Err(parse_error(
                line,
                format!("duplicate key `{key}` in [{sec}]"),
            ));
        }
        entries.push(Entry {
            line,
            section: sec,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

fn parse_number(line: usize, s: &str) -> Result<Number, CliError> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: i64 = p
            .trim()
            .parse()
            .map_err(|_| parse_error(line, format!("bad numerator in `{s}`")))?;
        let den: u64 = q
            .trim()
            .parse()
            .map_err(|_| parse_error(line, format!("bad denominator in `{s}`")))?;
        if den == 0 {
            return Err(parse_error(line, format!("zero denominator in `{s}`")));
        }
        return Ok(Number::Rational { num, den });
    }
    let x: f64 = s
        .parse()
        .map_err(|_| parse_error(line, format!("not a number: `{s}`")))?;
    if !x.is_finite() {
        return Err(parse_error(line, format!("not a finite number: `{s}`")));
    }
    Ok(Number::Decimal(x))
}

fn parse_list(line: usize, s: &str) -> Result<Vec<Number>, CliError> {
    s.split(',').map(|t| parse_number(line, t)).collect()
}

fn parse_int<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| parse_error(line, format!("not a nonnegative integer: `{s}`")))
}

fn parse_bool(line: usize, s: &str) -> Result<bool, CliError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(parse_error(
            line,
            format!("expected true or false, got `{s}`"),
        )),
    }
}

pub fn parse_config_str(text: &str) -> Result<JobConfig, CliError> {
    let entries = tokenize(text)?;
    let mut ratios = None;
    let mut ambient_dim = None;
    let (mut lattice_base, mut lattice_exponents) = (None, None);
    let (mut volume, mut inradius, mut kappa) = (None, None, None);
    let mut maps = Vec::new();
    let mut hull = None;
    let mut compatibility = false;
    let mut outer_content_k = 0.0;
    let mut numeric = Numeric::default();
    let mut issues = Vec::new();

    for e in &entries {
        let (l, v) = (e.line, e.value.as_str());
        match (e.section, e.key) {
            ("system", "ratios") => ratios = Some(parse_list(l, v)?),
            ("system", "ambient_dim") => ambient_dim = Some(parse_int::<usize>(l, v)?),
            ("system", "lattice_base") => lattice_base = Some(parse_number(l, v)?),
            ("system", "lattice_exponents") => {
                lattice_exponents = Some(
                    v.split(',')
                        .map(|t| parse_int::<u32>(l, t))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
            ("generator", "volume") => volume = Some(parse_number(l, v)?),
            ("generator", "inradius") => inradius = Some(parse_number(l, v)?),
            ("generator", "kappa") => kappa = Some(parse_list(l, v)?),
            ("geometry", "map") => {
                let xs = parse_list(l, v)?;
                if xs.len() != 4 {
                    return Err(parse_error(l, "map needs scale, angle, tx, ty"));
                }
                maps.push(PlanarMap {
                    scale: xs[0].value(),
                    angle: xs[1].value(),
                    tx: xs[2].value(),
                    ty: xs[3].value(),
                });
            }
            ("geometry", "hull") => {
                let pts = v
                    .split(';')
                    .map(|p| {
                        let xy = parse_list(l, p)?;
                        if xy.len() != 2 {
                            return Err(parse_error(
                                l,
                                format!("hull vertex `{p}` needs two coordinates"),
                            ));
                        }
                        Ok((xy[0].value(), xy[1].value()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                hull = Some(pts);
            }
            ("content", "compatibility") => compatibility = parse_bool(l, v)?,
            ("content", "outer_content_k") => outer_content_k = parse_number(l, v)?.value(),
            ("numeric", "im_max") => numeric.im_max = parse_number(l, v)?.value(),
            ("numeric", "m_max") => numeric.m_max = parse_int(l, v)?,
            ("numeric", "seed") => numeric.seed = parse_int(l, v)?,
            ("numeric", "budget") => numeric.budget = parse_int(l, v)?,
            ("numeric", "lattice_tol") => numeric.lattice_tol = parse_number(l, v)?.value(),
            ("numeric", "tube_tol") => numeric.tube_tol = parse_number(l, v)?.value(),
            ("numeric", "samples") => numeric.samples = parse_int(l, v)?,
            ("numeric", "mc_eps") => numeric.mc_eps = Some(parse_number(l, v)?.value()),
            ("numeric", "strip") => {
                let xs = parse_list(l, v)?;
                if xs.len() != 2 {
                    return Err(parse_error(l, "strip needs two numbers: lo, hi"));
                }
                numeric.strip = Some((xs[0].value(), xs[1].value()));
            }
            _ => unreachable!("keys are checked while tokenizing"),
        }
    }

    let ratios = ratios.unwrap_or_else(|| {
        issues.push("[system] ratios is required".to_string());
        Vec::new()
    });
    let ambient_dim = match ambient_dim {
        Some(d) => {
            issues.extend(system_issues(&ratios, d));
            d
        }
        None => {
            issues.push("[system] ambient_dim is required".to_string());
            0
        }
    };
    issues.extend(knob_issues(outer_content_k, &numeric));
    let lattice = match (lattice_base, lattice_exponents) {
        (Some(b), Some(e)) => Some((b, e)),
        (None, None) => None,
        _ => {
            issues.push("lattice_base and lattice_exponents must be given together".to_string());
            None
        }
    };
    let generator = match (volume, inradius, kappa) {
        (Some(volume), Some(inradius), None) => Some(GeneratorSpec::Polytope { volume, inradius }),
        (None, Some(inradius), Some(kappa)) => {
            Some(GeneratorSpec::Coefficients { inradius, kappa })
        }
        (None, None, None) => {
            issues.push(
                "[generator] is missing: give volume + inradius or kappa + inradius".to_string(),
            );
            None
        }
        (Some(_), _, Some(_)) => {
            issues.push(
                "[generator] must use exactly one form, not both volume and kappa".to_string(),
            );
            None
        }
        _ => {
            issues.push("[generator] needs inradius together with volume or kappa".to_string());
            None
        }
    };
    let geometry = match (maps.is_empty(), hull) {
        (true, None) => None,
        (false, Some(hull)) => Some(Geometry { maps, hull }),
        _ => {
            issues.push("[geometry] needs both map lines and a hull".to_string());
            None
        }
    };
    if let Some(g) = &generator {
        issues.extend(generator_issues(g, ambient_dim));
    }
    match generator {
        Some(generator) if issues.is_empty() => Ok(JobConfig {
            ratios,
            ambient_dim,
            lattice,
            generator,
            geometry,
            compatibility,
            outer_content_k,
            numeric,
        }),
        _ => Err(CliError::Validation(issues)),
    }
}

pub fn parse_config(path: &Path) -> Result<JobConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn join(xs: &[Number]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Serialize so that [`parse_config_str`] reproduces `job` exactly.
pub fn write_config(job: &JobConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[system]");
    let _ = writeln!(out, "ratios = {}", join(&job.ratios));
    let _ = writeln!(out, "ambient_dim = {}", job.ambient_dim);
    if let Some((base, exps)) = &job.lattice {
        let _ = writeln!(out, "lattice_base = {base}");
        let exps: Vec<String> = exps.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "lattice_exponents = {}", exps.join(", "));
    }
    let _ = writeln!(out, "\n[generator]");
    match &job.generator {
        GeneratorSpec::Polytope { volume, inradius } => {
            let _ = writeln!(out, "volume = {volume}\ninradius = {inradius}");
        }
        GeneratorSpec::Coefficients { inradius, kappa } => {
            let _ = writeln!(out, "inradius = {inradius}\nkappa = {}", join(kappa));
        }
    }
    if let Some(geo) = &job.geometry {
        let _ = writeln!(out, "\n[geometry]");
        for m in &geo.maps {
            let _ = writeln!(
                out,
                "map = {:?}, {:?}, {:?}, {:?}",
                m.scale, m.angle, m.tx, m.ty
            );
        }
        let hull: Vec<String> = geo
            .hull
            .iter()
            .map(|(x, y)| format!("{x:?}, {y:?}"))
            .collect();
        let _ = writeln!(out, "hull = {}", hull.join("; "));
    }
    let _ = writeln!(out, "\n[content]");
    let _ = writeln!(out, "compatibility = {}", job.compatibility);
    let _ = writeln!(out, "outer_content_k = {:?}", job.outer_content_k);
    let n = &job.numeric;
    let _ = writeln!(out, "\n[numeric]");
    let _ = writeln!(
        out,
        "im_max = {:?}\nm_max = {}\nseed = {}\nbudget = {}",
        n.im_max, n.m_max, n.seed, n.budget
    );
    let _ = writeln!(
        out,
        "lattice_tol = {:?}\ntube_tol = {:?}\nsamples = {}",
        n.lattice_tol, n.tube_tol, n.samples
    );
    if let Some(e) = n.mc_eps {
        let _ = writeln!(out, "mc_eps = {e:?}");
    }
    if let Some((lo, hi)) = n.strip {
        let _ = writeln!(out, "strip = {lo:?}, {hi:?}");
    }
    out
}

fn system_issues(ratios: &[Number], ambient_dim: usize) -> Vec<String> {
    let mut issues = Vec::new();
    if ratios.len() < 2 {
        issues.push(format!("need at least two ratios, got {}", ratios.len()));
    }
    for r in ratios {
        let v = r.value();
        if !(v > 0.0 && v < 1.0) {
            issues.push(format!("ratio {r} is outside (0, 1)"));
        }
    }
    if ambient_dim == 0 {
        issues.push("ambient_dim must be positive".to_string());
    }
    issues
}

fn generator_issues(generator: &GeneratorSpec, ambient_dim: usize) -> Vec<String> {
    let mut issues = Vec::new();
    match generator {
        GeneratorSpec::Polytope { volume, inradius } => {
            if !(volume.value() > 0.0) {
                issues.push(format!("generator volume {volume} must be positive"));
            }
            if !(inradius.value() > 0.0) {
                issues.push(format!("generator inradius {inradius} must be positive"));
            }
        }
        GeneratorSpec::Coefficients { inradius, kappa } => {
            if !(inradius.value() > 0.0) {
                issues.push(format!("generator inradius {inradius} must be positive"));
            }
            if kappa.len() != ambient_dim {
                issues.push(format!(
                    "kappa needs {ambient_dim} entries, got {}",
                    kappa.len()
                ));
            }
        }
    }
    issues
}

fn knob_issues(outer_content_k: f64, n: &Numeric) -> Vec<String> {
    let mut issues = Vec::new();
    if !(outer_content_k >= 0.0) {
        issues.push(format!(
            "outer_content_k {outer_content_k} must be nonnegative"
        ));
    }
    for (name, v) in [
        ("im_max", n.im_max),
        ("lattice_tol", n.lattice_tol),
        ("tube_tol", n.tube_tol),
    ] {
        if !(v > 0.0) {
            issues.push(format!("{name} must be positive, got {v}"));
        }
    }
    for (name, v) in [
        ("m_max", n.m_max as u64),
        ("budget", n.budget),
        ("samples", n.samples),
    ] {
        if v == 0 {
            issues.push(format!("{name} must be positive"));
        }
    }
    if let Some(e) = n.mc_eps {
        if !(e > 0.0) {
            issues.push(format!("mc_eps must be positive, got {e}"));
        }
    }
    if let Some((lo, hi)) = n.strip {
        if !(lo < hi) {
            issues.push(format!("strip [{lo}, {hi}] is empty"));
        }
    }
    issues
}

impl JobConfig {
    /// Check every invariant, reporting all violations at once.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut issues = system_issues(&self.ratios, self.ambient_dim);
        issues.extend(generator_issues(&self.generator, self.ambient_dim));
        issues.extend(knob_issues(self.outer_content_k, &self.numeric));
        if issues.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(issues))
        }
    }

    /// Construct the system, generator and optional planar geometry.
    pub fn build(&self) -> Result<Job, CliError> {
        let d = self.ambient_dim;
        let rationals: Option<Vec<(u64, u64)>> = self
            .ratios
            .iter()
            .map(|r| match *r {
                Number::Rational { num, den } if num > 0 => Some((num as u64, den)),
                _ => None,
            })
            .collect();
        let system = match (&self.lattice, rationals) {
            (Some((base, exps)), _) => {
                let values: Vec<f64> = self.ratios.iter().map(|r| r.value()).collect();
                IfsSystem::new(&values, d)?.with_declared_lattice(base.value(), exps)?
            }
            (None, Some(exact)) => IfsSystem::from_rationals(&exact, d)?,
            (None, None) => {
                let values: Vec<f64> = self.ratios.iter().map(|r| r.value()).collect();
                IfsSystem::new(&values, d)?.classify(self.numeric.lattice_tol)?
            }
        };
        let generator = match &self.generator {
            GeneratorSpec::Polytope { volume, inradius } => {
                MonophaseGenerator::from_inscribed_polytope(d, volume.value(), inradius.value())?
            }
            GeneratorSpec::Coefficients { inradius, kappa } => {
                let k: Vec<f64> = kappa.iter().map(|x| x.value()).collect();
                MonophaseGenerator::from_coefficients(d, inradius.value(), &k)?
            }
        };
        let planar = match &self.geometry {
            Some(geo) => Some(PlanarIfs::new(&system, geo.maps.clone(), &geo.hull)?),
            None => None,
        };
        Ok(Job {
            system,
            generator,
            planar,
            config: self.clone(),
        })
    }
}
