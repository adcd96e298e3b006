//! Minkowski measurability verdicts and (average) Minkowski contents.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generator::MonophaseGenerator;
use crate::ifs_zeta::{abscissa, IfsSystem};

/// What the reported content is a limit of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContentKind {
    Minkowski,
    Average,
}

impl ContentKind {
    pub fn label(self) -> &'static str {
        match self {
            ContentKind::Minkowski => "minkowski",
            ContentKind::Average => "average",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentReport {
    pub dimension: f64,
    pub lattice: bool,
    /// How the lattice structure was established, when there is one.
    pub lattice_provenance: Option<&'static str>,
    pub measurable_tiling: bool,
    pub content_tiling: f64,
    pub content_kind: ContentKind,
    pub gamma_at_d: f64,
    pub outer_content_k: f64,
    pub compatibility_declared: bool,
    pub content_fractal: Option<f64>,
}

impl ContentReport {
    pub fn verdict(&self) -> String {
        if self.measurable_tiling {
            "measurable (nonlattice)".to_string()
        } else {
            format!(
                "not measurable (lattice); average content = {:.17e}",
                self.content_tiling
            )
        }
    }
}

/// The common value of the similarity, Minkowski and Hausdorff dimensions.
pub fn dimension_report(system: &IfsSystem) -> f64 {
    abscissa(system)
}

fn check_hypothesis(dimension: f64, ambient_dim: usize) -> Result<()> {
    let d = ambient_dim as f64;
    if !(dimension > d - 1.0 && dimension < d) {
        return Err(Error::HypothesisViolation {
            dimension,
            ambient_dim,
        });
    }
    Ok(())
}

/// Minkowski content (nonlattice) or average Minkowski content (lattice) of the tiling.
pub fn tiling_content(system: &IfsSystem, generator: &MonophaseGenerator) -> Result<ContentReport> {
    let d = system.ambient_dim();
    if generator.ambient_dim() != d {
        return Err(Error::InvalidInput(format!(
            "generator dimension {} differs from system dimension {d}",
            generator.ambient_dim()
        )));
    }
    let dim = abscissa(system);
    check_hypothesis(dim, d)?;
    let gamma = generator.gamma(Complex64::new(dim, 0.0))?.re;
    let gap = d as f64 - dim;
    let (content, kind) = match system.lattice() {
        Some(spec) => {
            let r = spec.base();
            let moment: f64 = spec
                .exponents()
                .iter()
                .map(|&k| k as f64 * r.powf(k as f64 * dim) * (1.0 / r).ln())
                .sum();
            (gamma / (gap * moment), ContentKind::Average)
        }
        None => {
            let moment: f64 = system
                .ratios()
                .iter()
                .map(|&r| r.powf(dim) * (1.0 / r).ln())
                .sum();
            (gamma / (gap * moment), ContentKind::Minkowski)
        }
    };
    Ok(ContentReport {
        dimension: dim,
        lattice: system.is_lattice(),
        lattice_provenance: system.lattice().map(|s| s.provenance().label()),
        measurable_tiling: !system.is_lattice(),
        content_tiling: content,
        content_kind: kind,
        gamma_at_d: gamma,
        outer_content_k: 0.0,
        compatibility_declared: false,
        content_fractal: None,
    })
}

/// Transfer the tiling content to the self-similar set when the boundary of
/// the feasible set lies in the attractor.
pub fn fractal_content(
    report: &ContentReport,
    outer_content_k: f64,
    compatibility: bool,
) -> Result<ContentReport> {
    if !compatibility {
        return Err(Error::CompatibilityNotDeclared);
    }
    if !(outer_content_k >= 0.0 && outer_content_k.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "outer content of K must be finite and nonnegative, got {outer_content_k}"
        )));
    }
    Ok(ContentReport {
        outer_content_k,
        compatibility_declared: true,
        content_fractal: Some(report.content_tiling + outer_content_k),
        ..report.clone()
    })
}

/// Outer Minkowski content of a polytope hull, which vanishes because its
/// outer collar has volume `O(eps)` and `D > d - 1`.
pub fn outer_content_polytope_hull(dimension: f64, ambient_dim: usize) -> Result<f64> {
    check_hypothesis(dimension, ambient_dim)?;
    Ok(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs_zeta::{validate_ifs, DEFAULT_LATTICE_TOL};

    fn classified(ratios: &[f64], d: usize) -> IfsSystem {
        validate_ifs(ratios, d)
            .unwrap()
            .classify(DEFAULT_LATTICE_TOL)
            .unwrap()
    }

    #[test]
    fn gasket_average_content() {
        let s = classified(&[0.5, 0.5, 0.5], 2);
        let g = MonophaseGenerator::from_inscribed_polytope(
            2,
            3f64.sqrt() / 16.0,
            1.0 / (4.0 * 3f64.sqrt()),
        )
        .unwrap();
        let r = tiling_content(&s, &g).unwrap();
        assert!((r.content_tiling - 1.8125913503790578).abs() < 1e-9);
        assert_eq!(r.content_kind, ContentKind::Average);
        assert!(!r.measurable_tiling);
        assert!(r
            .verdict()
            .starts_with("not measurable (lattice); average content = "));
        let f = fractal_content(
            &r,
            outer_content_polytope_hull(r.dimension, 2).unwrap(),
            true,
        )
        .unwrap();
        assert_eq!(f.content_fractal, Some(r.content_tiling));
        let f = fractal_content(&r, 0.25, true).unwrap();
        assert_eq!(f.content_fractal, Some(r.content_tiling + 0.25));
        assert_eq!(
            fractal_content(&r, 0.0, false),
            Err(Error::CompatibilityNotDeclared)
        );
    }

    #[test]
    fn cantor_closed_form() {
        let s = classified(&[1.0 / 3.0, 1.0 / 3.0], 1);
        let g = MonophaseGenerator::from_coefficients(1, 1.0 / 6.0, &[2.0]).unwrap();
        let r = tiling_content(&s, &g).unwrap();
        let dim = 2f64.ln() / 3f64.ln();
        let expect = 2f64.powf(-dim) / (dim * (1.0 - dim) * 3f64.ln());
        assert!((r.content_tiling - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn nonlattice_is_measurable() {
        let s = classified(&[0.5, 1.0 / 3.0], 1);
        let g = MonophaseGenerator::from_coefficients(1, 0.5, &[2.0]).unwrap();
        let r = tiling_content(&s, &g).unwrap();
        assert!(r.measurable_tiling && r.content_tiling > 0.0 && r.content_tiling.is_finite());
        assert_eq!(r.verdict(), "measurable (nonlattice)");
    }

    #[test]
    fn hypothesis_gate() {
        // D = 1/2 <= d - 1 = 1.
        let s = classified(&[0.25, 0.25], 2);
        let g = MonophaseGenerator::from_inscribed_polytope(2, 1.0, 0.5).unwrap();
        assert!(matches!(
            tiling_content(&s, &g),
            Err(Error::HypothesisViolation { .. })
        ));
        assert!(outer_content_polytope_hull(0.5, 2).is_err());
        assert_eq!(
            outer_content_polytope_hull(8f64.ln() / 3f64.ln(), 2),
            Ok(0.0)
        );
        assert_eq!(outer_content_polytope_hull(0.3, 1), Ok(0.0));
    }

    #[test]
    fn dimension_examples() {
        assert!(
            (dimension_report(&classified(&[1.0 / 3.0; 8], 2)) - 8f64.ln() / 3f64.ln()).abs()
                < 1e-14
        );
        assert!((dimension_report(&classified(&[0.25, 0.25], 1)) - 0.5).abs() < 1e-15);
    }
}
