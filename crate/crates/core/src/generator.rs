//! Monophase generators: inner parallel volume `V(G, eps) = sum kappa_k eps^{d-k}`
//! on `[0, g]` and the generator factor `Gamma_s(G)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::adaptive_gk;
use crate::roots;

/// Distance to an integer below which `Gamma_s` is treated as singular.
pub const INTEGER_POLE_TOL: f64 = 1e-9;
const SIGN_GRID: usize = 1000;

/// How a generator's coefficients were obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorSource {
    Coefficients,
    InscribedPolytope { volume: f64, inradius: f64 },
}

impl GeneratorSource {
    pub fn label(&self) -> &'static str {
        match self {
            GeneratorSource::Coefficients => "coefficients",
            GeneratorSource::InscribedPolytope { .. } => "inscribed-polytope",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonophaseGenerator {
    ambient_dim: usize,
    inradius: f64,
    kappa: Vec<f64>,
    volume: f64,
    source: GeneratorSource,
}

impl MonophaseGenerator {
    /// Validate raw coefficients `kappa_0, ..., kappa_{d-1}`.
    pub fn from_coefficients(ambient_dim: usize, inradius: f64, kappa: &[f64]) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidInput(
                "ambient dimension must be positive".into(),
            ));
        }
        if !(inradius > 0.0 && inradius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "inradius must be positive, got {inradius}"
            )));
        }
        if kappa.len() != ambient_dim || kappa.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "expected {ambient_dim} finite coefficients, got {kappa:?}"
            )));
        }
        let mut g = Self {
            ambient_dim,
            inradius,
            kappa: kappa.to_vec(),
            volume: 0.0,
            source: GeneratorSource::Coefficients,
        };
        g.volume = g.polynomial(inradius);
        g.check_shape()?;
        Ok(g)
    }

    /// Generator of a convex polytope with an inscribed ball of radius `inradius`:
    /// the inner collar complement is the polytope scaled by `1 - eps/g`.
    pub fn from_inscribed_polytope(ambient_dim: usize, volume: f64, inradius: f64) -> Result<Self> {
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "volume must be positive, got {volume}"
            )));
        }
        if ambient_dim == 0 || !(inradius > 0.0 && inradius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "need d >= 1 and inradius > 0 (got d = {ambient_dim}, g = {inradius})"
            )));
        }
        let d = ambient_dim;
        let kappa = (0..d)
            .map(|k| {
                let sign = if (d - k + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * binomial(d, d - k) * volume * inradius.powi(k as i32 - d as i32)
            })
            .collect();
        let g = Self {
            ambient_dim,
            inradius,
            kappa,
            volume,
            source: GeneratorSource::InscribedPolytope { volume, inradius },
        };
        g.check_shape()?;
        Ok(g)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    /// `lambda_d(G) = V(G, g)`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn source(&self) -> GeneratorSource {
        self.source
    }

    /// `V(G, eps)`, saturating at the volume for `eps > g`.
    pub fn inner_volume(&self, eps: f64) -> f64 {
        if eps >= self.inradius {
            self.volume
        } else if eps <= 0.0 {
            0.0
        } else {
            self.polynomial(eps)
        }
    }

    fn polynomial(&self, eps: f64) -> f64 {
        // kappa_0 carries the highest power eps^d.
        self.kappa.iter().fold(0.0, |acc, &k| acc * eps + k) * eps
    }

    fn derivative(&self, eps: f64) -> f64 {
        let d = self.ambient_dim;
        self.kappa
            .iter()
            .enumerate()
            .fold(0.0, |acc, (k, &c)| acc * eps + c * (d - k) as f64)
    }

    /// Coefficients of `V` in ascending powers of eps (index j is eps^j).
    fn ascending(&self) -> Vec<f64> {
        let d = self.ambient_dim;
        let mut c = vec![0.0; d + 1];
        for (k, &kk) in self.kappa.iter().enumerate() {
            c[d - k] = kk;
        }
        c
    }

    /// Real roots of a real polynomial (ascending coefficients) inside `(0, g)`.
    fn interior_roots(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let c = roots::trim(&c, 1e-15);
        let g = self.inradius;
        Ok(roots::all_roots(&c, 1e-14)?
            .into_iter()
            .filter(|z| z.im.abs() <= 1e-9 * g.max(z.norm()) && z.re > 0.0 && z.re < g)
            .map(|z| z.re)
            .collect())
    }

    fn check_shape(&self) -> Result<()> {
        let g = self.inradius;
        let asc = self.ascending();
        // Sign near 0 is that of the lowest nonzero power.
        let lowest = asc
            .iter()
            .skip(1)
            .find(|c| **c != 0.0)
            .copied()
            .unwrap_or(0.0);
        if lowest <= 0.0 {
            let eps = g * 1e-6;
            return Err(Error::NonPositiveVolume {
                eps,
                value: self.polynomial(eps),
            });
        }
        let deriv: Vec<f64> = asc
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| j as f64 * c)
            .collect();
        let second: Vec<f64> = deriv
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| j as f64 * c)
            .collect();
        let grid = (1..=SIGN_GRID).map(|i| g * i as f64 / SIGN_GRID as f64);

        let mut points: Vec<f64> = grid.clone().collect();
        points.extend(self.interior_roots(&deriv)?);
        let scale = self.volume.abs().max(f64::MIN_POSITIVE);
        for &eps in &points {
            let v = self.polynomial(eps);
            if !(v > 0.0) {
                return Err(Error::NonPositiveVolume { eps, value: v });
            }
        }
        let mut points: Vec<f64> = grid.collect();
        if second.len() > 1 {
            points.extend(self.interior_roots(&second)?);
        }
        for &eps in &points {
            let slope = self.derivative(eps);
            if slope < -1e-12 * scale / g {
                return Err(Error::NonMonotone { eps, slope });
            }
        }
        if !(self.volume > 0.0) {
            return Err(Error::NonPositiveVolume {
                eps: g,
                value: self.volume,
            });
        }
        Ok(())
    }

    /// `Gamma_s(G) = sum_{k<d} g^{s-k} (d-k) kappa_k / (s-k)`.
    pub fn gamma(&self, s: Complex64) -> Result<Complex64> {
        let d = self.ambient_dim;
        let ln_g = self.inradius.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &kk) in self.kappa.iter().enumerate() {
            let shifted = s - k as f64;
            if shifted.norm() < INTEGER_POLE_TOL {
                return Err(Error::IntegerPole {
                    re: s.re,
                    im: s.im,
                    k,
                });
            }
            acc += (shifted * ln_g).exp() * ((d - k) as f64 * kk) / shifted;
        }
        Ok(acc)
    }

    pub fn gamma_real(&self, alpha: f64) -> Result<f64> {
        self.gamma(Complex64::new(alpha, 0.0)).map(|z| z.re)
    }

    /// Quadrature of `int_0^inf eps^{alpha-d-1} V(G, eps) d eps` next to the
    /// closed form `Gamma_alpha(G) / (d - alpha)`.
    pub fn gamma_integral_check(&self, alpha: f64, quad_points: usize) -> Result<(f64, f64)> {
        let d = self.ambient_dim as f64;
        if !(alpha > d - 1.0 && alpha < d) {
            return Err(Error::InvalidInput(format!(
                "alpha = {alpha} must lie in (d-1, d)"
            )));
        }
        // u = eps^beta turns the endpoint singularity into (V(eps)/eps)/beta.
        let beta = alpha - d + 1.0;
        let g = self.inradius;
        let integrand = |u: f64| {
            if u <= 0.0 {
                return self.kappa[self.ambient_dim - 1] / beta;
            }
            let eps = u.powf(1.0 / beta);
            let reduced = self.kappa.iter().fold(0.0, |acc, &k| acc * eps + k);
            reduced / beta
        };
        let panels = (quad_points / 15).max(1);
        let head = adaptive_gk(integrand, 0.0, g.powf(beta), 0.0, 1e-14, panels, 20_000).value;
        let tail = self.volume * g.powf(alpha - d) / (d - alpha);
        let closed = self.gamma_real(alpha)? / (d - alpha);
        Ok((head + tail, closed))
    }

    /// Number of zeros of `Gamma_s(G) s (s-1) ... (s-d+1) g^{-s}`, a polynomial
    /// of degree at most `d - 1`.
    pub fn gamma_zero_count(&self) -> Result<usize> {
        let d = self.ambient_dim;
        let mut total = vec![0.0; d];
        for (k, &kk) in self.kappa.iter().enumerate() {
            let weight = self.inradius.powi(-(k as i32)) * (d - k) as f64 * kk;
            let mut poly = vec![1.0];
            for j in (0..d).filter(|&j| j != k) {
                let mut next = vec![0.0; poly.len() + 1];
                for (i, &c) in poly.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= j as f64 * c;
                }
                poly = next;
            }
            for (i, c) in poly.into_iter().enumerate() {
                total[i] += weight * c;
            }
        }
        let coeffs: Vec<Complex64> = total.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let coeffs = roots::trim(&coeffs, 1e-13);
        Ok(roots::all_roots(&coeffs, 1e-13)?.len())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gasket() -> MonophaseGenerator {
        MonophaseGenerator::from_inscribed_polytope(
            2,
            3f64.sqrt() / 16.0,
            1.0 / (4.0 * 3f64.sqrt()),
        )
        .unwrap()
    }

    #[test]
    fn interval_generator() {
        let g = MonophaseGenerator::from_coefficients(1, 0.5, &[2.0]).unwrap();
        assert_eq!(g.volume(), 1.0);
        assert_eq!(g.inner_volume(0.25), 0.5);
        assert!(
            (g.gamma_real(1.0 - 1e-3).unwrap() - 0.5f64.powf(1.0 - 1e-3) * 2.0 / (1.0 - 1e-3))
                .abs()
                < 1e-15
        );
        assert_eq!(g.gamma_zero_count().unwrap(), 0);
    }

    #[test]
    fn gamma_at_one_for_interval() {
        let g = MonophaseGenerator::from_coefficients(1, 0.5, &[2.0]).unwrap();
        assert!((g.gamma(Complex64::new(1.0, 0.0)).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gasket_coefficients_from_incircle() {
        let g = gasket();
        assert!((g.kappa()[0] + 3.0 * 3f64.sqrt()).abs() < 1e-13);
        assert!((g.kappa()[1] - 1.5).abs() < 1e-14);
        assert!((g.inner_volume(g.inradius()) - 3f64.sqrt() / 16.0).abs() < 1e-15);
        assert_eq!(g.inner_volume(2.0 * g.inradius()), 3f64.sqrt() / 16.0);
        assert_eq!(g.inner_volume(0.0), 0.0);
        let raw = MonophaseGenerator::from_coefficients(
            2,
            1.0 / (4.0 * 3f64.sqrt()),
            &[-3.0 * 3f64.sqrt(), 1.5],
        )
        .unwrap();
        assert!((raw.volume() - 3f64.sqrt() / 16.0).abs() < 1e-15);
    }

    #[test]
    fn square_generator() {
        let g = MonophaseGenerator::from_inscribed_polytope(2, 1.0 / 9.0, 1.0 / 6.0).unwrap();
        assert!((g.kappa()[0] + 4.0).abs() < 1e-13);
        assert!((g.kappa()[1] - 4.0 / 3.0).abs() < 1e-14);
        assert!(g.gamma_zero_count().unwrap() <= 1);
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(matches!(
            MonophaseGenerator::from_coefficients(2, 1.0, &[5.0, -1.0]),
            Err(Error::NonPositiveVolume { .. })
        ));
        // V = eps - eps^2 on [0, 0.8] turns over at 1/2.
        assert!(matches!(
            MonophaseGenerator::from_coefficients(2, 0.8, &[-1.0, 1.0]),
            Err(Error::NonMonotone { .. })
        ));
        assert!(MonophaseGenerator::from_coefficients(2, 1.0, &[1.0]).is_err());
        assert!(MonophaseGenerator::from_coefficients(1, 0.0, &[1.0]).is_err());
    }

    #[test]
    fn gasket_gamma_partial_fractions() {
        // Gamma_w = g^w sqrt3 (6/(w-1) - 6/w) for the gasket generator.
        let g = gasket();
        let gg = g.inradius();
        for w in [
            Complex64::new(1.3, 0.0),
            Complex64::new(1.58, 9.06),
            Complex64::new(0.4, -3.0),
        ] {
            let expect = (w * gg.ln()).exp() * 3f64.sqrt() * (6.0 / (w - 1.0) - 6.0 / w);
            assert!((g.gamma(w).unwrap() - expect).norm() < 1e-13 * expect.norm());
        }
        assert!(g.gamma_real(3f64.log2()).unwrap() > 0.0);
        assert!(matches!(
            g.gamma(Complex64::new(1.0, 0.0)),
            Err(Error::IntegerPole { k: 1, .. })
        ));
    }

    #[test]
    fn integral_check_agrees() {
        let g = gasket();
        let (q, c) = g.gamma_integral_check(1.5, 150).unwrap();
        assert!(((q - c) / c).abs() < 1e-10, "{q} vs {c}");
        let i = MonophaseGenerator::from_coefficients(1, 0.5, &[2.0]).unwrap();
        let (q, c) = i.gamma_integral_check(0.5, 150).unwrap();
        assert!((c - 8.0 * 0.5f64.sqrt()).abs() < 1e-14);
        assert!(((q - c) / c).abs() < 1e-10);
    }
}
