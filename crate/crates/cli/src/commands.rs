//! Subcommand implementations. Each returns the text to emit and, for the
//! gating commands, an optional failure that maps to exit code 4.

use std::fmt::Write;

use fractube_core::content::fractal_content;
use fractube_core::ifs_zeta::{complex_dimensions, residue_at, zeta_eval};
use fractube_core::oracle::{compensated_average_content, mc_parallel_area};
use fractube_core::tube::{compare_with_oracle, default_strip, oscillation_on_grid, profile_eval};
use fractube_core::{
    abscissa, build_tube_model, direct_tiling_volume, periodic_profile, tiling_content,
    ContentReport, TubeModel,
};
use num_complex::Complex64;

use crate::config::Job;
use crate::error::CliError;

/// Emitted text plus an oracle-mismatch description when a gate failed.
pub struct Output {
    pub text: String,
    pub failure: Option<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Self {
            text,
            failure: None,
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn period(job: &Job) -> Option<f64> {
    job.system.lattice().map(|l| l.oscillatory_period())
}

/// Tube model over the configured (or default) strip. Lattice systems keep
/// `m_max` translates per line; nonlattice systems search up to `im_max`.
pub fn tube_model(job: &Job) -> Result<TubeModel, CliError> {
    let (lo, hi) = match job.config.numeric.strip {
        Some(s) => s,
        None => default_strip(&job.system)?,
    };
    let im_max = match period(job) {
        Some(p) => (job.config.numeric.m_max as f64 + 0.5) * p,
        None => job.config.numeric.im_max,
    };
    Ok(build_tube_model(
        &job.system,
        &job.generator,
        lo,
        hi,
        im_max,
    )?)
}

pub fn dims(job: &Job, strip: Option<(f64, f64)>, im_max: Option<f64>) -> Result<Output, CliError> {
    let dim = abscissa(&job.system);
    let (lo, hi) = match strip.or(job.config.numeric.strip) {
        Some(s) => s,
        None => default_strip(&job.system)?,
    };
    let im_max = im_max.unwrap_or(job.config.numeric.im_max);
    let found = complex_dimensions(&job.system, lo, hi, im_max)?;
    let mut out = String::new();
    let _ = writeln!(out, "# D = {}", sci(dim));
    match job.system.lattice() {
        Some(l) => {
            let _ = writeln!(
                out,
                "# lattice = true ({}), period = {}",
                l.provenance().label(),
                sci(l.oscillatory_period())
            );
        }
        None => {
            let _ = writeln!(out, "# lattice = false");
        }
    }
    let _ = writeln!(
        out,
        "# strip = [{}, {}], im_max = {}",
        sci(lo),
        sci(hi),
        sci(im_max)
    );
    let _ = writeln!(out, "re,im,residue_re,residue_im,critical_line");
    for w in &found {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sci(w.location.re),
            sci(w.location.im),
            sci(w.residue.re),
            sci(w.residue.im),
            w.on_critical_line
        );
    }
    Ok(Output::ok(out))
}

/// `decades` decades starting at `g/10`, ten points per decade. Scales near
/// `g` are left out: there the strip misses contributions of order one for
/// nonlattice systems.
pub fn eps_decades(inradius: f64, decades: u32) -> Vec<f64> {
    (0..=10 * decades)
        .map(|j| inradius * 10f64.powf(-1.0 - j as f64 / 10.0))
        .collect()
}

pub fn tube(job: &Job, eps: &[f64]) -> Result<Output, CliError> {
    let model = tube_model(job)?;
    let rows = compare_with_oracle(&model, eps, job.config.numeric.budget)?;
    let tol = job.config.numeric.tube_tol;
    let mut out = String::from("eps,V_tube,bound,V_oracle,rel_err\n");
    let mut worst: Option<(f64, f64)> = None;
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sci(r.eps),
            sci(r.v_tube),
            sci(r.bound),
            sci(r.v_oracle),
            sci(r.rel_err)
        );
        if r.rel_err > tol && worst.is_none_or(|(_, e)| r.rel_err > e) {
            worst = Some((r.eps, r.rel_err));
        }
    }
    let failure =
        worst.map(|(e, err)| format!("rel_err {err:e} at eps = {e:e} exceeds tube_tol = {tol:e}"));
    Ok(Output { text: out, failure })
}

fn report(job: &Job) -> Result<ContentReport, CliError> {
    let base = tiling_content(&job.system, &job.generator)?;
    let c = &job.config;
    Ok(if c.compatibility {
        fractal_content(&base, c.outer_content_k, true)?
    } else {
        ContentReport {
            outer_content_k: c.outer_content_k,
            ..base
        }
    })
}

fn report_fields(r: &ContentReport, ambient_dim: usize) -> Vec<(&'static str, String)> {
    vec![
        ("dimension", sci(r.dimension)),
        ("ambient_dim", ambient_dim.to_string()),
        ("lattice", r.lattice.to_string()),
        (
            "lattice_provenance",
            r.lattice_provenance.unwrap_or("none").to_string(),
        ),
        ("measurable_tiling", r.measurable_tiling.to_string()),
        ("content_kind", r.content_kind.label().to_string()),
        ("content_tiling", sci(r.content_tiling)),
        ("gamma_at_D", sci(r.gamma_at_d)),
        (
            "compatibility_declared",
            r.compatibility_declared.to_string(),
        ),
        ("outer_content_K", sci(r.outer_content_k)),
        (
            "content_fractal",
            r.content_fractal
                .map_or_else(|| "unavailable".to_string(), sci),
        ),
        ("verdict", r.verdict()),
    ]
}

pub fn content(job: &Job, csv: bool) -> Result<Output, CliError> {
    let fields = report_fields(&report(job)?, job.system.ambient_dim());
    let mut out = String::new();
    if csv {
        let keys: Vec<&str> = fields.iter().map(|f| f.0).collect();
        let values: Vec<String> = fields
            .iter()
            .map(|f| {
                if f.1.contains(',') || f.1.contains(';') {
                    format!("\"{}\"", f.1)
                } else {
                    f.1.clone()
                }
            })
            .collect();
        let _ = writeln!(out, "{}\n{}", keys.join(","), values.join(","));
    } else {
        for (k, v) in fields {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    Ok(Output::ok(out))
}

pub fn profile(job: &Job, grid_n: usize) -> Result<Output, CliError> {
    if grid_n < 2 {
        return Err(CliError::Usage(format!(
            "--grid-n must be at least 2, got {grid_n}"
        )));
    }
    let dim = abscissa(&job.system);
    let p = period(job).ok_or(fractube_core::Error::NotLattice)?;
    // The profile only needs the generator and the lattice; the strip just has to hold D.
    let model = build_tube_model(&job.system, &job.generator, dim - 1e-3, dim, 0.5 * p)?;
    let prof = periodic_profile(&model, job.config.numeric.m_max)?;
    let osc = oscillation_on_grid(&prof, grid_n);
    let mut out = String::from("x,G\n");
    for i in 0..grid_n {
        let x = i as f64 / grid_n as f64;
        let _ = writeln!(out, "{},{}", sci(x), sci(profile_eval(&prof, x)));
    }
    let _ = writeln!(out, "# amplitude = {}", sci(osc.amplitude));
    let _ = writeln!(out, "# min = {} at x = {}", sci(osc.min), sci(osc.argmin));
    let _ = writeln!(out, "# max = {} at x = {}", sci(osc.max), sci(osc.argmax));
    let _ = writeln!(out, "# truncation_bound = {}", sci(prof.truncation_bound()));
    Ok(Output::ok(out))
}

struct Check {
    name: &'static str,
    pass: Option<bool>,
    detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self {
            name,
            pass: Some(pass),
            detail,
        }
    }
}

fn oracle_grid(job: &Job, model: &TubeModel) -> Result<Check, CliError> {
    let g = job.generator.inradius();
    let eps: Vec<f64> = (0..=6)
        .map(|j| g * 10f64.powf(-1.0 - j as f64 / 2.0))
        .collect();
    let rows = compare_with_oracle(model, &eps, job.config.numeric.budget)?;
    let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let tol = job.config.numeric.tube_tol;
    Ok(Check::new(
        "oracle-equivalence",
        worst <= tol,
        format!(
            "max rel_err = {worst:.3e} over {} eps in [g/1e4, g/10] (tol {tol:e})",
            rows.len()
        ),
    ))
}

fn gamma_positivity(job: &Job) -> Result<Check, CliError> {
    let d = job.system.ambient_dim() as f64;
    let mut min = f64::INFINITY;
    for k in 0..100 {
        min = min.min(
            job.generator
                .gamma_real(d - 1.0 + (k as f64 + 0.5) / 100.0)?,
        );
    }
    let zeros = job.generator.gamma_zero_count()?;
    Ok(Check::new(
        "gamma-positivity",
        min > 0.0,
        format!("min Gamma_alpha on (d-1, d) = {min:.6e}, zero count = {zeros}"),
    ))
}

fn gamma_integral(job: &Job) -> Result<Check, CliError> {
    let dim = abscissa(&job.system);
    let (quad, closed) = job.generator.gamma_integral_check(dim, 150)?;
    let rel = ((quad - closed) / closed).abs();
    Ok(Check::new(
        "gamma-integral",
        rel <= 1e-10,
        format!("quadrature {quad:.15e} vs closed {closed:.15e}, rel {rel:.2e}"),
    ))
}

/// Residues checked against the symmetric difference `h (zeta(w+h) - zeta(w-h)) / 2`.
fn residue_identity(job: &Job, model: &TubeModel) -> Result<Check, CliError> {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for w in model.dims() {
        let s = w.location;
        let hc = Complex64::new(h, 0.0);
        let numeric =
            (zeta_eval(&job.system, s + hc)? - zeta_eval(&job.system, s - hc)?) * (h / 2.0);
        let formula = residue_at(&job.system, s)?;
        worst = worst.max((numeric - formula).norm() / formula.norm());
        worst = worst.max((w.residue - formula).norm() / formula.norm());
    }
    Ok(Check::new(
        "residue-identity",
        worst <= 1e-6,
        format!(
            "max rel deviation = {worst:.2e} over {} dimensions",
            model.dims().len()
        ),
    ))
}

fn renewal(job: &Job) -> Result<Check, CliError> {
    let d = job.system.ambient_dim() as i32;
    let g = job.generator.inradius();
    let budget = job.config.numeric.budget;
    let v = |e: f64| direct_tiling_volume(&job.system, &job.generator, e, budget);
    let mut worst: f64 = 0.0;
    for j in 0..10 {
        let eps = g * 10f64.powf(0.5 - 0.45 * j as f64);
        let lhs = v(eps)?;
        let mut rhs = job.generator.inner_volume(eps);
        for r in job.system.ratios() {
            rhs += r.powi(d) * v(eps / r)?;
        }
        worst = worst.max(((lhs - rhs) / lhs).abs());
    }
    Ok(Check::new(
        "renewal-identity",
        worst <= 1e-12,
        format!("max rel defect = {worst:.2e} over 10 eps"),
    ))
}

/// Oracle volume with the integer terms removed, sampled at `eps = r^{j+x}`,
/// against the periodic profile `G(x)`.
fn periodicity(job: &Job, model: &TubeModel) -> Result<Check, CliError> {
    let spec = job.system.lattice().expect("lattice system");
    let r = spec.base();
    let dim = abscissa(&job.system);
    let d = job.system.ambient_dim() as f64;
    let g = job.generator.inradius();
    let prof = periodic_profile(model, job.config.numeric.m_max)?;
    let scale = prof.coeff(0).re.abs();
    let j0 = ((g * 1e-6).ln() / r.ln()).ceil();
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        for q in 0..4 {
            let x = q as f64 / 4.0;
            let eps = r.powf(j0 + j as f64 + x);
            let v =
                direct_tiling_volume(&job.system, &job.generator, eps, job.config.numeric.budget)?;
            let normalized = (v - model.integer_terms(eps)) * eps.powf(dim - d);
            worst = worst.max((normalized - profile_eval(&prof, x)).abs() / scale);
        }
    }
    let tol = job.config.numeric.tube_tol;
    Ok(Check::new(
        "periodicity",
        worst <= tol,
        format!("max |eps^(D-d) V - G(x)| / |a_0| = {worst:.2e} over 3 periods (tol {tol:e})"),
    ))
}

fn limit(job: &Job, content: f64) -> Result<Check, CliError> {
    let dim = abscissa(&job.system);
    let d = job.system.ambient_dim() as f64;
    let eps = job.generator.inradius() * 1e-4;
    let v = direct_tiling_volume(&job.system, &job.generator, eps, job.config.numeric.budget)?
        * eps.powf(dim - d);
    let rel = ((v - content) / content).abs();
    Ok(Check::new(
        "minkowski-limit",
        rel <= 1e-2,
        format!("eps^(D-d) V at g*1e-4 = {v:.9e} vs content {content:.9e}, rel {rel:.2e}"),
    ))
}

fn time_average(job: &Job, content: f64) -> Result<Check, CliError> {
    let dim = abscissa(&job.system);
    let b = match job.system.lattice() {
        Some(l) => l.base().powi(-20),
        None => 1e6,
    };
    let avg = compensated_average_content(&job.system, &job.generator, dim, b, 40_000)?;
    let rel = ((avg - content) / content).abs();
    Ok(Check::new(
        "time-average",
        rel <= 1e-3,
        format!("compensated log-average over [g/b, g], b = {b:.3e}: {avg:.12e} vs {content:.12e}, rel {rel:.2e}"),
    ))
}

fn mc_decomposition(job: &Job, model: &TubeModel) -> Result<Check, CliError> {
    let name = "mc-decomposition";
    let Some(planar) = &job.planar else {
        return Ok(Check {
            name,
            pass: None,
            detail: "no planar geometry configured".to_string(),
        });
    };
    if !job.config.compatibility {
        return Ok(Check {
            name,
            pass: None,
            detail: "compatibility not declared".to_string(),
        });
    }
    let n = &job.config.numeric;
    let eps = n.mc_eps.unwrap_or(planar.diameter() / 50.0);
    let est = mc_parallel_area(planar, eps, n.samples, n.seed)?;
    let tiling = direct_tiling_volume(&job.system, model.generator(), eps, n.budget)?;
    let expect = tiling + planar.outer_steiner(eps);
    let z = (est.mean - expect).abs() / est.stderr;
    Ok(Check::new(
        name,
        z <= 3.0,
        format!(
            "eps = {eps:e}: MC {:.6e} +- {:.2e} vs {expect:.6e}, z = {z:.2}",
            est.mean, est.stderr
        ),
    ))
}

pub fn verify(job: &Job) -> Result<Output, CliError> {
    let model = tube_model(job)?;
    let content = tiling_content(&job.system, &job.generator)?.content_tiling;
    let mut checks = vec![
        oracle_grid(job, &model)?,
        gamma_positivity(job)?,
        gamma_integral(job)?,
        residue_identity(job, &model)?,
        renewal(job)?,
    ];
    if job.system.is_lattice() {
        checks.push(periodicity(job, &model)?);
    } else {
        checks.push(limit(job, content)?);
    }
    checks.push(time_average(job, content)?);
    checks.push(mc_decomposition(job, &model)?);

    let mut out = String::new();
    let mut failed = Vec::new();
    for c in &checks {
        let tag = match c.pass {
            Some(true) => "PASS",
            Some(false) => {
                failed.push(c.name);
                "FAIL"
            }
            None => "SKIP",
        };
        let _ = writeln!(out, "{tag} {:<20} {}", c.name, c.detail);
    }
    let ran = checks.iter().filter(|c| c.pass.is_some()).count();
    let _ = writeln!(out, "{} of {ran} checks passed", ran - failed.len());
    let failure = (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", ")));
    Ok(Output { text: out, failure })
}
