//! Scaling complex dimensions: the zeros of `f(s) = 1 - sum r_n^s`.
//!
//! Lattice systems reduce to the polynomial `sum z^{k_n} = 1` in `z = r^s`.
//! Any system can be searched with the argument principle over rectangles,
//! which also serves as the cross-check for the polynomial route.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::roots;

use super::{abscissa, residue_formula, IfsSystem, POLE_TOL};

/// Minimum `|f'(w)|` for a pole to count as simple.
pub const SIMPLICITY_THRESHOLD: f64 = 1e-8;
/// `|Re w - D|` below which a dimension is on the critical line.
pub const CRITICAL_LINE_TOL: f64 = 1e-9;
/// Largest lattice exponent handled by the polynomial route under `Auto`.
pub const MAX_POLYNOMIAL_DEGREE: u32 = 4096;

const NEWTON_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-8;
const SLAB_HEIGHT: f64 = 8.0;
const EDGE_QUALITY: f64 = 1e-4;

/// A pole of the scaling zeta function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDimension {
    pub location: Complex64,
    pub residue: Complex64,
    pub on_critical_line: bool,
}

/// Root-finding strategy for [`complex_dimensions_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Polynomial roots for lattice systems of moderate degree, otherwise
    /// the argument principle.
    Auto,
    Polynomial,
    ArgumentPrinciple,
}

/// Complex dimensions with `strip_lo <= Re w <= strip_hi` and `|Im w| <= im_max`,
/// sorted by imaginary then real part.
pub fn complex_dimensions(
    system: &IfsSystem,
    strip_lo: f64,
    strip_hi: f64,
    im_max: f64,
) -> Result<Vec<ComplexDimension>> {
    complex_dimensions_with(system, strip_lo, strip_hi, im_max, SearchMethod::Auto)
}

pub fn complex_dimensions_with(
    system: &IfsSystem,
    strip_lo: f64,
    strip_hi: f64,
    im_max: f64,
    method: SearchMethod,
) -> Result<Vec<ComplexDimension>> {
    let d = system.ambient_dim() as f64;
    if !(strip_lo < strip_hi) || strip_hi > d + 1e-12 || !(im_max > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need strip_lo < strip_hi <= d and im_max > 0 (got [{strip_lo}, {strip_hi}], {im_max})"
        )));
    }
    let method = match method {
        SearchMethod::Auto => match system.lattice() {
            Some(spec) if spec.max_exponent() <= MAX_POLYNOMIAL_DEGREE => SearchMethod::Polynomial,
            _ => SearchMethod::ArgumentPrinciple,
        },
        m => m,
    };
    let upper = match method {
        SearchMethod::Polynomial => lattice_upper(system, strip_lo, strip_hi, im_max)?,
        _ => argument_principle_upper(system, strip_lo, strip_hi, im_max)?,
    };
    finalize(system, upper, strip_lo, strip_hi, im_max)
}

/// Newton iteration on `f`; returns the limit and `|f'|` there.
pub(crate) fn newton(system: &IfsSystem, start: Complex64) -> Option<(Complex64, f64)> {
    let mut s = start;
    let (mut value, mut slope) = system.moran_defect(s);
    for _ in 0..100 {
        if slope.norm() == 0.0 {
            return None;
        }
        let mut step = value / slope;
        let mut accepted = false;
        for _ in 0..20 {
            let next = s - step;
            let (v, sl) = system.moran_defect(next);
            if v.norm().is_finite() && v.norm() <= value.norm().max(1e-300) * 2.0 {
                s = next;
                value = v;
                slope = sl;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
        if step.norm() <= 1e-15 * s.norm().max(1.0) || value.norm() < 1e-16 {
            break;
        }
    }
    if value.norm() < NEWTON_TOL {
        Some((s, slope.norm()))
    } else {
        None
    }
}

/// One zero per vertical line of a lattice system, with imaginary part in
/// `(-p/2, p/2]`; every other zero is a translate by `i m p`.
pub fn lattice_lines(system: &IfsSystem) -> Result<Vec<Complex64>> {
    let spec = system.lattice().ok_or(Error::NotLattice)?;
    let degree = spec.max_exponent() as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
    coeffs[0] = Complex64::new(-1.0, 0.0);
    for &k in spec.exponents() {
        coeffs[k as usize] += Complex64::new(1.0, 0.0);
    }
    let ln_base = spec.base().ln();
    let period = spec.oscillatory_period();
    let mut lines: Vec<Complex64> = roots::all_roots(&coeffs, 1e-14)?
        .into_iter()
        .filter(|z| z.norm() > 0.0)
        .map(|z| {
            let s = z.ln() / ln_base;
            let (s, _) = newton(system, s).unwrap_or((s, 0.0));
            let shift = (s.im / period).round();
            let mut t = Complex64::new(s.re, s.im - shift * period);
            if t.im <= -0.5 * period {
                t.im += period;
            }
            t
        })
        .collect();
    lines.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(lines)
}

fn lattice_upper(
    system: &IfsSystem,
    strip_lo: f64,
    strip_hi: f64,
    im_max: f64,
) -> Result<Vec<Complex64>> {
    let period = system
        .lattice()
        .ok_or(Error::NotLattice)?
        .oscillatory_period();
    let mut upper = Vec::new();
    for s0 in lattice_lines(system)? {
        if s0.re < strip_lo - 1e-9 || s0.re > strip_hi + 1e-9 {
            continue;
        }
        let m_lo = ((-s0.im) / period).floor() as i64;
        let m_hi = ((im_max - s0.im) / period).floor() as i64;
        for m in m_lo..=m_hi {
            let s = Complex64::new(s0.re, s0.im + m as f64 * period);
            if s.im > -CRITICAL_LINE_TOL && s.im <= im_max {
                upper.push(s);
            }
        }
    }
    Ok(upper)
}

/// Polish, verify, deduplicate, mirror and sort.
fn finalize(
    system: &IfsSystem,
    candidates: Vec<Complex64>,
    strip_lo: f64,
    strip_hi: f64,
    im_max: f64,
) -> Result<Vec<ComplexDimension>> {
    let dim = abscissa(system);
    let mut upper: Vec<Complex64> = Vec::with_capacity(candidates.len());
    for s in candidates {
        let (polished, slope) = match newton(system, s) {
            Some(hit) => hit,
            None => {
                let (v, sl) = system.moran_defect(s);
                if v.norm() < POLE_TOL {
                    (s, sl.norm())
                } else {
                    return Err(Error::WindingMismatch(format!(
                        "candidate {s} did not converge to a zero"
                    )));
                }
            }
        };
        if slope < SIMPLICITY_THRESHOLD {
            return Err(Error::NonSimplePole {
                re: polished.re,
                im: polished.im,
                derivative: slope,
            });
        }
        // Zeros with Im <= 0 come from the real axis (D) or by mirroring.
        if polished.im <= 1e-9 {
            continue;
        }
        if polished.re < strip_lo - 1e-12 || polished.re > strip_hi + 1e-12 || polished.im > im_max
        {
            continue;
        }
        upper.push(polished);
    }
    upper.sort_by(|a, b| {
        a.im.partial_cmp(&b.im)
            .unwrap()
            .then(a.re.partial_cmp(&b.re).unwrap())
    });
    let mut deduped: Vec<Complex64> = Vec::with_capacity(upper.len());
    for s in upper {
        if !deduped
            .iter()
            .rev()
            .take(8)
            .any(|t| (t - s).norm() < DEDUP_TOL)
        {
            deduped.push(s);
        }
    }

    let mut all: Vec<Complex64> = Vec::with_capacity(2 * deduped.len() + 1);
    all.extend(deduped.iter().map(|s| s.conj()));
    if dim >= strip_lo - 1e-12 && dim <= strip_hi + 1e-12 {
        all.push(Complex64::new(dim, 0.0));
    }
    all.extend(deduped.iter().copied());
    all.sort_by(|a, b| {
        a.im.partial_cmp(&b.im)
            .unwrap()
            .then(a.re.partial_cmp(&b.re).unwrap())
    });

    all.into_iter()
        .map(|s| {
            let (defect, slope) = system.moran_defect(s);
            if defect.norm() >= POLE_TOL {
                return Err(Error::NotAPole {
                    re: s.re,
                    im: s.im,
                    residual: defect.norm(),
                });
            }
            if slope.norm() < SIMPLICITY_THRESHOLD {
                return Err(Error::NonSimplePole {
                    re: s.re,
                    im: s.im,
                    derivative: slope.norm(),
                });
            }
            Ok(ComplexDimension {
                location: s,
                residue: residue_formula(system, s),
                on_critical_line: (s.re - dim).abs() < CRITICAL_LINE_TOL,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }

    fn contains(&self, s: Complex64, margin: f64) -> bool {
        s.re >= self.x0 - margin
            && s.re <= self.x1 + margin
            && s.im >= self.y0 - margin
            && s.im <= self.y1 + margin
    }
}

struct Winding {
    count: i64,
    /// Approximates `(1 / 2 pi i) * integral of s f'/f ds`: the zero itself
    /// when `count == 1`.
    centroid: Complex64,
}

struct Contour<'a> {
    system: &'a IfsSystem,
    max_step: f64,
}

impl<'a> Contour<'a> {
    fn new(system: &'a IfsSystem) -> Self {
        let steep = system
            .ratios()
            .iter()
            .map(|r| r.ln().abs())
            .fold(0.0, f64::max);
        Self {
            system,
            max_step: 0.25 / steep,
        }
    }

    fn f(&self, s: Complex64) -> Result<Complex64> {
        let (v, _) = self.system.moran_defect(s);
        if v.norm() < 1e-13 {
            return Err(Error::WindingMismatch(format!(
                "contour passes through a zero near {s}"
            )));
        }
        Ok(v)
    }

    /// Smallest sampled `|f|` along a segment.
    fn quality(&self, a: Complex64, b: Complex64) -> f64 {
        let n = (((b - a).norm() / self.max_step).ceil() as usize * 4).max(16);
        (0..=n)
            .map(|i| {
                let s = a + (b - a) * (i as f64 / n as f64);
                self.system.moran_defect(s).0.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn winding(&self, rect: &Rect) -> Result<Winding> {
        let c = rect.corners();
        let mut dlog = Complex64::new(0.0, 0.0);
        let mut moment = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            let pieces = ((b - a).norm() / self.max_step).ceil().max(1.0) as usize;
            let mut prev = a;
            let mut f_prev = self.f(a)?;
            for j in 1..=pieces {
                let next = if j == pieces {
                    b
                } else {
                    a + (b - a) * (j as f64 / pieces as f64)
                };
                let f_next = self.f(next)?;
                let (dl, mo) = self.segment(prev, next, f_prev, f_next, 0)?;
                dlog += dl;
                moment += mo;
                prev = next;
                f_prev = f_next;
            }
        }
        let turns = dlog.im / TAU;
        let count = turns.round();
        if (turns - count).abs() > 0.01 {
            return Err(Error::WindingMismatch(format!(
                "winding {turns} on [{}, {}] x [{}, {}]",
                rect.x0, rect.x1, rect.y0, rect.y1
            )));
        }
        Ok(Winding {
            count: count as i64,
            centroid: moment / Complex64::new(0.0, TAU),
        })
    }

    /// Increment of `log f` and of `s d(log f)` along `[a, b]`, refined until
    /// the phase is resolved.
    fn segment(
        &self,
        a: Complex64,
        b: Complex64,
        fa: Complex64,
        fb: Complex64,
        depth: u32,
    ) -> Result<(Complex64, Complex64)> {
        let m = (a + b) * 0.5;
        let fm = self.f(m)?;
        let d1 = (fm / fa).ln();
        let d2 = (fb / fm).ln();
        let whole = (fb / fa).ln();
        let resolved =
            d1.im.abs() < 0.3 && d2.im.abs() < 0.3 && ((d1.im + d2.im) - whole.im).abs() < 1e-9;
        if resolved {
            return Ok((d1 + d2, (a + m) * 0.5 * d1 + (m + b) * 0.5 * d2));
        }
        if depth > 48 {
            return Err(Error::WindingMismatch(format!("phase unresolved near {m}")));
        }
        let (l1, m1) = self.segment(a, m, fa, fm, depth + 1)?;
        let (l2, m2) = self.segment(m, b, fm, fb, depth + 1)?;
        Ok((l1 + l2, m1 + m2))
    }

    /// Pick a cut position near `lo + frac (hi - lo)` where `|f|` stays large
    /// along the cut.
    fn cut<F: Fn(f64) -> (Complex64, Complex64)>(&self, lo: f64, hi: f64, line: F) -> f64 {
        let mut best = (0.5 * (lo + hi), -1.0);
        for frac in [0.5, 0.46, 0.54, 0.42, 0.58, 0.37, 0.63, 0.31, 0.69] {
            let x = lo + frac * (hi - lo);
            let (a, b) = line(x);
            let q = self.quality(a, b);
            if q > EDGE_QUALITY {
                return x;
            }
            if q > best.1 {
                best = (x, q);
            }
        }
        best.0
    }

    /// Place an outer edge at `base + delta` for the first delta in a
    /// growing sequence that keeps `|f|` away from zero.
    fn nudge<F: Fn(f64) -> (Complex64, Complex64)>(&self, base: f64, dir: f64, line: F) -> f64 {
        let mut best = (base + dir * 1e-3, -1.0);
        for k in 0..12 {
            let x = base + dir * 1e-3 * 1.7f64.powi(k);
            let (a, b) = line(x);
            let q = self.quality(a, b);
            if q > EDGE_QUALITY {
                return x;
            }
            if q > best.1 {
                best = (x, q);
            }
        }
        best.0
    }

    fn resolve(&self, rect: Rect, count: i64, centroid: Complex64) -> Result<Vec<Complex64>> {
        if count <= 0 {
            return Ok(Vec::new());
        }
        let width = rect.x1 - rect.x0;
        let height = rect.y1 - rect.y0;
        if count == 1 {
            for start in [
                centroid,
                Complex64::new(0.5 * (rect.x0 + rect.x1), 0.5 * (rect.y0 + rect.y1)),
            ] {
                if let Some((z, _)) = newton(self.system, start) {
                    if rect.contains(z, 1e-9 * width.max(height)) {
                        return Ok(vec![z]);
                    }
                }
            }
        }
        if width.max(height) < 1e-7 {
            let centre = Complex64::new(0.5 * (rect.x0 + rect.x1), 0.5 * (rect.y0 + rect.y1));
            let slope = self.system.moran_defect(centre).1.norm();
            return Err(Error::NonSimplePole {
                re: centre.re,
                im: centre.im,
                derivative: slope,
            });
        }
        let (a, b) = if height >= width {
            let y = self.cut(rect.y0, rect.y1, |y| {
                (Complex64::new(rect.x0, y), Complex64::new(rect.x1, y))
            });
            (Rect { y1: y, ..rect }, Rect { y0: y, ..rect })
        } else {
            let x = self.cut(rect.x0, rect.x1, |x| {
                (Complex64::new(x, rect.y0), Complex64::new(x, rect.y1))
            });
            (Rect { x1: x, ..rect }, Rect { x0: x, ..rect })
        };
        let wa = self.winding(&a)?;
        let wb = self.winding(&b)?;
        if wa.count + wb.count != count {
            return Err(Error::WindingMismatch(format!(
                "split counts {} + {} != {count}",
                wa.count, wb.count
            )));
        }
        let mut out = self.resolve(a, wa.count, wa.centroid)?;
        out.extend(self.resolve(b, wb.count, wb.centroid)?);
        Ok(out)
    }
}

fn argument_principle_upper(
    system: &IfsSystem,
    strip_lo: f64,
    strip_hi: f64,
    im_max: f64,
) -> Result<Vec<Complex64>> {
    let contour = Contour::new(system);
    let y_top_guess = im_max;
    // Outer edges nudged off any zeros; results are filtered back to the strip.
    let x0 = contour.nudge(strip_lo, -1.0, |x| {
        (Complex64::new(x, 0.0), Complex64::new(x, y_top_guess + 1.0))
    });
    let x1 = contour.nudge(strip_hi, 1.0, |x| {
        (Complex64::new(x, 0.0), Complex64::new(x, y_top_guess + 1.0))
    });
    // D is the only real zero and is simple, so a low bottom edge excludes it
    // without skipping any non-real zero.
    let y0 = contour.nudge(0.0, 1.0, |y| (Complex64::new(x0, y), Complex64::new(x1, y)));
    let y1 = contour.nudge(im_max, 1.0, |y| {
        (Complex64::new(x0, y), Complex64::new(x1, y))
    });

    let slabs = ((y1 - y0) / SLAB_HEIGHT).ceil().max(1.0) as usize;
    let mut cuts = vec![y0];
    for i in 1..slabs {
        let target = y0 + (y1 - y0) * i as f64 / slabs as f64;
        let span = 0.2 * (y1 - y0) / slabs as f64;
        let y = contour.cut(target - span, target + span, |y| {
            (Complex64::new(x0, y), Complex64::new(x1, y))
        });
        cuts.push(y);
    }
    cuts.push(y1);

    let rects: Vec<Rect> = cuts
        .windows(2)
        .map(|w| Rect {
            x0,
            x1,
            y0: w[0],
            y1: w[1],
        })
        .collect();
    let found: Vec<Result<Vec<Complex64>>> = rects
        .par_iter()
        .map(|rect| {
            let w = contour.winding(rect)?;
            contour.resolve(*rect, w.count, w.centroid)
        })
        .collect();
    let mut out = Vec::new();
    for r in found {
        out.extend(r?);
    }
    Ok(out)
}

/// Magnitude of the winding number of `f` around a rectangle, exposed for
/// diagnostics and tests.
pub fn zero_count(system: &IfsSystem, re: (f64, f64), im: (f64, f64)) -> Result<i64> {
    let contour = Contour::new(system);
    contour
        .winding(&Rect {
            x0: re.0,
            x1: re.1,
            y0: im.0,
            y1: im.1,
        })
        .map(|w| w.count)
}
