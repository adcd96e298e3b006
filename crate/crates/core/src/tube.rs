//! Fractal tube formula `V(T, eps) = sum c_w eps^{d-w} + sum_k c_k eps^{d-k}`
//! and the log-periodic profile of lattice tilings.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::MonophaseGenerator;
use crate::ifs_zeta::{
    abscissa, complex_dimensions, lattice_lines, residue_formula, zeta_real, ComplexDimension,
    IfsSystem,
};
use crate::oracle::direct_tiling_volume;

/// Tolerance for a complex dimension to count as an integer.
pub const INTEGER_COLLISION_TOL: f64 = 1e-9;
/// Grid used by [`oscillation_amplitude`].
pub const AMPLITUDE_GRID: usize = 10_000;

/// How the truncation bound of a tube evaluation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Summed `|a_m| <= C/m^2` tails of every vertical line in the strip.
    LatticeTail,
    /// Zero-density estimate of the omitted heights; the part left of the
    /// strip is only known to be `O(eps^{d - strip_lo})`.
    NonlatticeHeuristic,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::LatticeTail => "lattice-tail",
            BoundKind::NonlatticeHeuristic => "nonlattice-heuristic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TubeModel {
    system: IfsSystem,
    generator: MonophaseGenerator,
    dims: Vec<ComplexDimension>,
    c_omega: Vec<Complex64>,
    c_int: Vec<f64>,
    strip: (f64, f64),
    im_max: f64,
    /// Index pairs `(w, conj w)` ordered by `|Im w|`; real dimensions pair with themselves.
    pairs: Vec<(usize, usize)>,
    /// `(base point, residue, S)` for every lattice line inside the strip.
    lines: Vec<(Complex64, Complex64, f64)>,
    /// Whether every lattice line lies in the strip.
    complete: bool,
}

/// Strip used when none is given: every lattice line, or `[D - 0.25, D]`
/// kept inside `(d - 1, D)` for nonlattice systems.
pub fn default_strip(system: &IfsSystem) -> Result<(f64, f64)> {
    let dim = abscissa(system);
    if system.is_lattice() {
        let lo = lattice_lines(system)?
            .iter()
            .map(|s| s.re)
            .fold(dim, f64::min);
        Ok((lo - 1e-6, dim))
    } else {
        let floor = system.ambient_dim() as f64 - 1.0;
        let lo = if dim - 0.25 > floor {
            dim - 0.25
        } else {
            0.5 * (floor + dim)
        };
        Ok((lo, dim))
    }
}

/// Sum of `g^{Re s - k} (d - k) |kappa_k|`, so that `|Gamma_s| <= S / |Im s|`.
fn gamma_envelope(generator: &MonophaseGenerator, re: f64) -> f64 {
    let d = generator.ambient_dim();
    generator
        .kappa()
        .iter()
        .enumerate()
        .map(|(k, kk)| generator.inradius().powf(re - k as f64) * (d - k) as f64 * kk.abs())
        .sum()
}

pub fn build_tube_model(
    system: &IfsSystem,
    generator: &MonophaseGenerator,
    strip_lo: f64,
    strip_hi: f64,
    im_max: f64,
) -> Result<TubeModel> {
    let d = system.ambient_dim();
    if generator.ambient_dim() != d {
        return Err(Error::InvalidInput(format!(
            "generator dimension {} differs from system dimension {d}",
            generator.ambient_dim()
        )));
    }
    let dim = abscissa(system);
    for k in 0..=d {
        if (dim - k as f64).abs() < INTEGER_COLLISION_TOL {
            return Err(Error::IntegerCollision {
                re: dim,
                im: 0.0,
                k,
            });
        }
    }
    let dims = complex_dimensions(system, strip_lo, strip_hi, im_max)?;
    for w in &dims {
        for k in 0..=d {
            if (w.location - k as f64).norm() < INTEGER_COLLISION_TOL {
                return Err(Error::IntegerCollision {
                    re: w.location.re,
                    im: w.location.im,
                    k,
                });
            }
        }
    }
    let c_omega = dims
        .iter()
        .map(|w| Ok(w.residue * generator.gamma(w.location)? / (d as f64 - w.location)))
        .collect::<Result<Vec<_>>>()?;
    let c_int = (0..d)
        .map(|k| Ok(generator.kappa()[k] * zeta_real(system, k as f64)?))
        .collect::<Result<Vec<_>>>()?;

    // dims are sorted by Im, so the conjugate of index i sits at n - 1 - i.
    let n = dims.len();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .filter(|&i| dims[i].location.im >= 0.0)
        .map(|i| (i, n - 1 - i))
        .collect();
    for &(a, b) in &pairs {
        if (dims[a].location - dims[b].location.conj()).norm() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "complex dimensions are not conjugate-paired at {}",
                dims[a].location
            )));
        }
    }
    pairs.sort_by(|x, y| {
        let (a, b) = (dims[x.0].location, dims[y.0].location);
        a.im.partial_cmp(&b.im)
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
    });

    let (lines, complete) = match system.lattice() {
        Some(_) => {
            let all = lattice_lines(system)?;
            let inside: Vec<_> = all
                .iter()
                .filter(|s| s.re >= strip_lo - 1e-9 && s.re <= strip_hi + 1e-9)
                .map(|&s| {
                    (
                        s,
                        residue_formula(system, s),
                        gamma_envelope(generator, s.re),
                    )
                })
                .collect();
            let complete = inside.len() == all.len();
            (inside, complete)
        }
        None => (Vec::new(), false),
    };

    Ok(TubeModel {
        system: system.clone(),
        generator: generator.clone(),
        dims,
        c_omega,
        c_int,
        strip: (strip_lo, strip_hi),
        im_max,
        pairs,
        lines,
        complete,
    })
}

/// A tube-formula evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeValue {
    pub value: f64,
    /// Estimated truncation error.
    pub bound: f64,
    /// `|Im|` of the assembled complex sum.
    pub imag_residue: f64,
    pub bound_kind: BoundKind,
}

impl TubeModel {
    pub fn system(&self) -> &IfsSystem {
        &self.system
    }

    pub fn generator(&self) -> &MonophaseGenerator {
        &self.generator
    }

    pub fn dims(&self) -> &[ComplexDimension] {
        &self.dims
    }

    /// `c_w` for each entry of [`TubeModel::dims`].
    pub fn c_omega(&self) -> &[Complex64] {
        &self.c_omega
    }

    /// `c_k = kappa_k zeta_L(k)` for `k = 0, ..., d-1`.
    pub fn c_int(&self) -> &[f64] {
        &self.c_int
    }

    pub fn strip(&self) -> (f64, f64) {
        self.strip
    }

    pub fn im_max(&self) -> f64 {
        self.im_max
    }

    /// Whether the strip covers every lattice line, making the bound total.
    pub fn covers_all_lines(&self) -> bool {
        self.complete
    }

    /// `c_D`.
    pub fn c_dimension(&self) -> Option<f64> {
        self.dims
            .iter()
            .zip(&self.c_omega)
            .find(|(w, _)| w.location.im == 0.0 && w.on_critical_line)
            .map(|(_, c)| c.re)
    }

    fn check_eps(&self, eps: f64) -> Result<()> {
        let g = self.generator.inradius();
        if !(eps > 0.0 && eps <= g) {
            return Err(Error::EpsOutOfRange { eps, inradius: g });
        }
        Ok(())
    }

    /// `sum c_w eps^{d-w}` over the visible dimensions, in conjugate pairs
    /// ordered by height.
    pub fn head(&self, eps: f64) -> Result<Complex64> {
        self.check_eps(eps)?;
        let d = self.system.ambient_dim() as f64;
        let ln_eps = eps.ln();
        let term = |i: usize| self.c_omega[i] * ((d - self.dims[i].location) * ln_eps).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b) in &self.pairs {
            acc += if a == b { term(a) } else { term(a) + term(b) };
        }
        Ok(acc)
    }

    /// `sum_k c_k eps^{d-k}`.
    pub fn integer_terms(&self, eps: f64) -> f64 {
        let d = self.system.ambient_dim();
        self.c_int
            .iter()
            .enumerate()
            .map(|(k, c)| c * eps.powi((d - k) as i32))
            .sum()
    }

    fn truncation_bound(&self, eps: f64) -> (f64, BoundKind) {
        let d = self.system.ambient_dim() as f64;
        if let Some(spec) = self.system.lattice() {
            let p = spec.oscillatory_period();
            let bound = self
                .lines
                .iter()
                .map(|&(s0, res, envelope)| {
                    // First omitted height above this base point. The omitted
                    // heights below mirror those above the conjugate line.
                    let m = ((self.im_max - s0.im) / p).floor() + 1.0;
                    let t0 = (s0.im + m * p).max(p * 0.5);
                    2.0 * res.norm()
                        * envelope
                        * eps.powf(d - s0.re)
                        * (1.0 / (t0 * t0) + 1.0 / (p * t0))
                })
                .sum();
            (bound, BoundKind::LatticeTail)
        } else {
            let dim = abscissa(&self.system);
            let density = self
                .system
                .ratios()
                .iter()
                .map(|r| -r.ln())
                .fold(0.0, f64::max)
                / TAU;
            let res = self
                .dims
                .iter()
                .map(|w| w.residue.norm())
                .fold(0.0, f64::max);
            let envelope = gamma_envelope(&self.generator, dim);
            let bound = 2.0 * density * res * envelope * eps.powf(d - dim) / self.im_max;
            (bound, BoundKind::NonlatticeHeuristic)
        }
    }
}

/// Evaluate the truncated tube formula at `eps` in `(0, g]`.
pub fn tube_volume(model: &TubeModel, eps: f64) -> Result<TubeValue> {
    let head = model.head(eps)?;
    let total = head + model.integer_terms(eps);
    let (bound, bound_kind) = model.truncation_bound(eps);
    Ok(TubeValue {
        value: total.re,
        bound,
        imag_residue: total.im.abs(),
        bound_kind,
    })
}

/// One row of a tube-vs-oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeRow {
    pub eps: f64,
    pub v_tube: f64,
    pub bound: f64,
    pub v_oracle: f64,
    pub rel_err: f64,
}

/// Tube formula and direct oracle side by side, in input order.
pub fn compare_with_oracle(model: &TubeModel, eps: &[f64], budget: u64) -> Result<Vec<TubeRow>> {
    eps.par_iter()
        .map(|&e| {
            let t = tube_volume(model, e)?;
            let o = direct_tiling_volume(&model.system, &model.generator, e, budget)?;
            Ok(TubeRow {
                eps: e,
                v_tube: t.value,
                bound: t.bound,
                v_oracle: o,
                rel_err: ((t.value - o) / o).abs(),
            })
        })
        .collect()
}

/// The 1-periodic function `G(x)` with `V(T, eps) ~ eps^{d-D} G(log_{1/r} 1/eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    /// `a_{-M}, ..., a_M`.
    coeffs: Vec<Complex64>,
    m_max: usize,
    decay_constant: f64,
}

impl PeriodicProfile {
    /// Profile with given coefficients `a_0, ..., a_M` (negative indices by conjugation).
    pub fn from_nonnegative(coeffs: &[Complex64]) -> Self {
        let m_max = coeffs.len().saturating_sub(1);
        let mut all: Vec<Complex64> = coeffs.iter().skip(1).rev().map(|c| c.conj()).collect();
        all.extend_from_slice(coeffs);
        Self {
            coeffs: all,
            m_max,
            decay_constant: 0.0,
        }
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// `a_m`, zero beyond the truncation order.
    pub fn coeff(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.m_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(m + self.m_max as i64) as usize]
    }

    /// `C` with `|a_m| <= C / m^2`.
    pub fn decay_constant(&self) -> f64 {
        self.decay_constant
    }

    /// Bound on `sum_{|m| > M} |a_m|`.
    pub fn truncation_bound(&self) -> f64 {
        if self.m_max == 0 {
            return f64::INFINITY;
        }
        2.0 * self.decay_constant / self.m_max as f64
    }
}

pub fn periodic_profile(model: &TubeModel, m_max: usize) -> Result<PeriodicProfile> {
    let spec = model.system.lattice().ok_or(Error::NotLattice)?;
    let p = spec.oscillatory_period();
    let d = model.system.ambient_dim() as f64;
    let dim = abscissa(&model.system);
    let res = residue_formula(&model.system, Complex64::new(dim, 0.0)).re;
    let a = |m: i64| -> Result<Complex64> {
        let w = Complex64::new(dim, m as f64 * p);
        Ok(res * model.generator.gamma(w)? / (d - w))
    };
    let nonneg = (0..=m_max as i64).map(a).collect::<Result<Vec<_>>>()?;
    let mut profile = PeriodicProfile::from_nonnegative(&nonneg);
    // Use the directly evaluated negative coefficients rather than mirrored ones.
    for m in 1..=m_max as i64 {
        profile.coeffs[(m_max as i64 - m) as usize] = a(-m)?;
    }
    profile.decay_constant = res.abs() * gamma_envelope(&model.generator, dim) / (p * p);
    Ok(profile)
}

/// `Re sum_{|m| <= M} a_m e^{2 pi i m x}`.
pub fn profile_eval(profile: &PeriodicProfile, x: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    let mut acc = profile.coeff(0).re;
    for m in 1..=profile.m_max as i64 {
        let z = Complex64::from_polar(1.0, TAU * m as f64 * x);
        acc += (profile.coeff(m) * z + profile.coeff(-m) * z.conj()).re;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    pub amplitude: f64,
    pub min: f64,
    pub max: f64,
    pub argmin: f64,
    pub argmax: f64,
}

/// Max minus min of the profile on a uniform grid of [`AMPLITUDE_GRID`] points.
pub fn oscillation_amplitude(profile: &PeriodicProfile) -> Oscillation {
    oscillation_on_grid(profile, AMPLITUDE_GRID)
}

pub fn oscillation_on_grid(profile: &PeriodicProfile, n: usize) -> Oscillation {
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| profile_eval(profile, i as f64 / n as f64))
        .collect();
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = i;
        }
        if v > values[imax] {
            imax = i;
        }
    }
    Oscillation {
        amplitude: values[imax] - values[imin],
        min: values[imin],
        max: values[imax],
        argmin: imin as f64 / n as f64,
        argmax: imax as f64 / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs_zeta::{validate_ifs, DEFAULT_LATTICE_TOL};

    const GASKET_CONTENT: f64 = 1.8125913503790578;

    fn gasket() -> (IfsSystem, MonophaseGenerator) {
        let s = validate_ifs(&[0.5, 0.5, 0.5], 2)
            .unwrap()
            .classify(DEFAULT_LATTICE_TOL)
            .unwrap();
        let g = MonophaseGenerator::from_inscribed_polytope(
            2,
            3f64.sqrt() / 16.0,
            1.0 / (4.0 * 3f64.sqrt()),
        )
        .unwrap();
        (s, g)
    }

    fn cantor() -> (IfsSystem, MonophaseGenerator) {
        let s = validate_ifs(&[1.0 / 3.0, 1.0 / 3.0], 1)
            .unwrap()
            .classify(DEFAULT_LATTICE_TOL)
            .unwrap();
        let g = MonophaseGenerator::from_coefficients(1, 1.0 / 6.0, &[2.0]).unwrap();
        (s, g)
    }

    #[test]
    fn gasket_integer_coefficients() {
        let (s, g) = gasket();
        let m = build_tube_model(&s, &g, 1.0, 2.0, 50.0).unwrap();
        assert!((m.c_int()[0] - 1.5 * 3f64.sqrt()).abs() < 1e-13);
        assert!((m.c_int()[1] + 3.0).abs() < 1e-13);
        let c_d = m.c_dimension().unwrap();
        let dim = 3f64.log2();
        let expect = g.gamma_real(dim).unwrap() / (2f64.ln() * (2.0 - dim));
        assert!((c_d - expect).abs() < 1e-13);
        assert!((c_d - GASKET_CONTENT).abs() < 1e-9);
    }

    #[test]
    fn cantor_integer_coefficient() {
        let (s, g) = cantor();
        let m = build_tube_model(&s, &g, 0.0, 1.0, 50.0).unwrap();
        assert!((m.c_int()[0] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn integer_dimension_rejected() {
        let s = validate_ifs(&[0.5, 0.5], 2)
            .unwrap()
            .classify(DEFAULT_LATTICE_TOL)
            .unwrap();
        let g = MonophaseGenerator::from_coefficients(2, 0.25, &[-16.0, 8.0]).unwrap();
        assert!(matches!(
            build_tube_model(&s, &g, 0.5, 2.0, 10.0),
            Err(Error::IntegerCollision { k: 1, .. })
        ));
    }

    #[test]
    fn eps_range_enforced() {
        let (s, g) = gasket();
        let m = build_tube_model(&s, &g, 1.0, 2.0, 20.0).unwrap();
        assert!(matches!(
            tube_volume(&m, 0.0),
            Err(Error::EpsOutOfRange { .. })
        ));
        assert!(matches!(
            tube_volume(&m, 2.0 * g.inradius()),
            Err(Error::EpsOutOfRange { .. })
        ));
    }

    #[test]
    fn saturated_value_approaches_total_area() {
        let (s, g) = gasket();
        let p = TAU / 2f64.ln();
        let m = build_tube_model(&s, &g, 1.0, 2.0, 2000.5 * p).unwrap();
        let t = tube_volume(&m, g.inradius()).unwrap();
        let area = 3f64.sqrt() / 4.0;
        assert!(
            (t.value - area).abs() <= t.bound,
            "{} vs {area}, bound {}",
            t.value,
            t.bound
        );
        assert!(t.imag_residue < 1e-10 * t.value);
    }

    #[test]
    fn profile_constant_term_is_content() {
        let (s, g) = gasket();
        let m = build_tube_model(&s, &g, 1.0, 2.0, 10.0).unwrap();
        let prof = periodic_profile(&m, 200).unwrap();
        assert!((prof.coeff(0).re - GASKET_CONTENT).abs() < 1e-9);
        assert_eq!(prof.coeff(0).im, 0.0);
        assert!(prof.coeff(1).norm() > 0.0);
        for k in 1..=200 {
            assert!((prof.coeff(-k) - prof.coeff(k).conj()).norm() < 1e-15);
            assert!(prof.coeff(k).norm() <= prof.decay_constant() / (k * k) as f64);
        }
        assert!((profile_eval(&prof, 0.3) - profile_eval(&prof, 1.3)).abs() < 1e-14);
        let mean = (0..1000)
            .map(|i| profile_eval(&prof, i as f64 / 1000.0))
            .sum::<f64>()
            / 1000.0;
        assert!((mean - prof.coeff(0).re).abs() < 1e-6);
    }

    #[test]
    fn constant_profile_has_no_amplitude() {
        let prof = PeriodicProfile::from_nonnegative(&[
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        assert!(oscillation_amplitude(&prof).amplitude <= 1e-12);
    }

    #[test]
    fn nonlattice_profile_refused() {
        let s = validate_ifs(&[0.5, 1.0 / 3.0], 1)
            .unwrap()
            .classify(DEFAULT_LATTICE_TOL)
            .unwrap();
        let g = MonophaseGenerator::from_coefficients(1, 0.5, &[2.0]).unwrap();
        let m = build_tube_model(&s, &g, 0.7, 1.0, 20.0).unwrap();
        assert!(matches!(periodic_profile(&m, 10), Err(Error::NotLattice)));
    }
}
