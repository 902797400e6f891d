//! Stochastic-geometry averages of the harvested power.
//!
//! For a receiver at distance d under full reflection, with the other
//! reflectors forming a PPP of density λ' on `reflector_inner ≤ y ≤ ρ`, the
//! total harvested power X satisfies
//!
//! ```text
//! P(X > x) = exp(−Y σ²/(P_t τ)) · exp(−2πλ' ∫ Y y / (Y + y^{2α}) dy)
//! Y(x)     = (t − 1) / ((M + 1 − t) d^{-2α}),   t = x / (ζ P_t d^{-α})
//! ```
//!
//! and integrating the CCDF over `t ∈ [1, M+1]` yields the mean
//! retrodirective power. That integral is evaluated in the variable
//! `s = ln((t−1)/(M+1−t))`, under which `dt = M ℓ(s) ds` with ℓ the logistic
//! density; the singular endpoint t = M+1 moves to s = +∞ where ℓ decays
//! exponentially.

use std::f64::consts::PI;

use crate::error::{check_range, Error, Result};
use crate::params::SystemParams;
use crate::quadrature::{integrate, integrate_with_breaks, Tolerance};

/// Truncation of the logistic variable; ℓ(±40) ≈ 4e-18.
const LOGISTIC_SPAN: f64 = 40.0;

/// Annulus `inner < r < outer`, used for the omnidirectional average Λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    inner: f64,
    outer: f64,
}

impl AnnulusSpec {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner.is_finite() && outer.is_finite() && inner > 1.0 && outer > inner) {
            return Err(Error::InvalidParam {
                name: "annulus",
                reason: format!("need 1 < inner < outer, got inner={inner}, outer={outer}"),
            });
        }
        Ok(Self { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }
}

/// Point at which to evaluate the CCDF of the total harvested power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcdfQuery {
    /// Total harvested power threshold (W).
    pub x: f64,
    /// Distance of the tagged receiver (m).
    pub d: f64,
    /// Inner radius of the interfering reflectors (m).
    pub reflector_inner: f64,
    /// Density of interfering reflectors (per m²).
    pub density: f64,
}

/// Analytic evaluator bound to one parameter set.
#[derive(Debug, Clone)]
pub struct Analysis<'a> {
    params: &'a SystemParams,
    tol: Tolerance,
}

impl<'a> Analysis<'a> {
    pub fn new(params: &'a SystemParams) -> Self {
        Self {
            params,
            tol: Tolerance::default(),
        }
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn params(&self) -> &SystemParams {
        self.params
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// Λ(inner, outer) = 2ζP_t (outer^{2−α} − inner^{2−α}) / ((2−α)(outer² − inner²)),
    /// the mean of ζP_t d^{-α} over points uniform on the annulus.
    pub fn lambda_term(&self, spec: AnnulusSpec) -> f64 {
        let p = self.params;
        let e = 2.0 - p.alpha();
        let (a, b) = (spec.inner, spec.outer);
        2.0 * p.efficiency() * p.transmit_power() * (b.powf(e) - a.powf(e)) / (e * (b * b - a * a))
    }

    /// Λ(ξ, ρ).
    pub fn lambda_cell(&self) -> f64 {
        let spec = AnnulusSpec::new(self.params.exclusion_radius(), self.params.cell_radius())
            .expect("validated params");
        self.lambda_term(spec)
    }

    /// Distance-inversion average Λ(ξ,ρ)(1 + M/(λπ(ρ²−ξ²))), noiseless.
    pub fn q_dib(&self) -> Result<f64> {
        let mean = self.params.mean_count();
        if mean <= 1.0 {
            return Err(Error::InvalidParam {
                name: "density",
                reason: format!("closed form needs λπ(ρ²−ξ²) > 1, got {mean}"),
            });
        }
        Ok(self.lambda_cell() * (1.0 + self.params.m() / mean))
    }

    /// ∫_{inner}^{ρ} Y y / (Y + y^{2α}) dy for Y = exp(ln_y).
    ///
    /// With u = ln y² the integrand becomes ½ e^u / (1 + e^{αu − ln Y}), a
    /// smooth step located at u = ln Y / α.
    pub fn interference_integral(&self, ln_y: f64, inner: f64) -> f64 {
        let rho = self.params.cell_radius();
        if inner >= rho || ln_y == f64::NEG_INFINITY {
            return 0.0;
        }
        let alpha = self.params.alpha();
        let (lo, hi) = ((inner * inner).ln(), (rho * rho).ln());
        if ln_y == f64::INFINITY {
            return 0.5 * (rho * rho - inner * inner);
        }
        let f = |u: f64| {
            let z = alpha * u - ln_y;
            // e^u / (1 + e^z) without overflow
            if z > 0.0 {
                0.5 * (u - z).exp() / (1.0 + (-z).exp())
            } else {
                0.5 * u.exp() / (1.0 + z.exp())
            }
        };
        let step = ln_y / alpha;
        let width = 1.0 / alpha;
        let mut points = vec![lo];
        for c in [step - 4.0 * width, step, step + 4.0 * width] {
            if c > lo && c < hi {
                points.push(c);
            }
        }
        points.push(hi);
        let tol = Tolerance::new(1e-12, 0.0);
        integrate_with_breaks(f, &points, tol).value
    }

    /// CCDF in the logistic variable s, with ln Y = 2α ln d + s.
    fn ccdf_at_log_threshold(&self, ln_y: f64, inner: f64, density: f64) -> f64 {
        let p = self.params;
        let noise = if p.noise_power() == 0.0 {
            0.0
        } else {
            ln_y.exp() * p.noise_power() / (p.transmit_power() * p.waveform_duration())
        };
        let interference = if density == 0.0 {
            0.0
        } else {
            2.0 * PI * density * self.interference_integral(ln_y, inner)
        };
        (-(noise + interference)).exp()
    }

    fn check_reflectors(&self, inner: f64, density: f64) -> Result<()> {
        check_range(
            "reflector_inner",
            inner,
            self.params.exclusion_radius(),
            self.params.cell_radius(),
        )?;
        if !(density.is_finite() && density >= 0.0) {
            return Err(Error::InvalidParam {
                name: "density",
                reason: format!("{density} is not a finite non-negative density"),
            });
        }
        Ok(())
    }

    /// P(total harvested power > x) for a fully reflecting receiver at `q.d`.
    pub fn ccdf_total(&self, q: CcdfQuery) -> Result<f64> {
        let p = self.params;
        self.check_reflectors(q.reflector_inner, q.density)?;
        check_range("d", q.d, p.exclusion_radius(), p.cell_radius())?;
        let base = p.omni_power(q.d);
        let m = p.m();
        let t = q.x / base;
        // tolerate round-off at the support ends
        let slack = 1e-12 * (m + 1.0);
        if !(t >= 1.0 - slack && t <= m + 1.0 + slack) {
            return Err(Error::OutOfRange {
                name: "x",
                value: q.x,
                low: base,
                high: (m + 1.0) * base,
            });
        }
        if t <= 1.0 {
            return Ok(1.0);
        }
        if t >= m + 1.0 {
            return Ok(if p.noise_power() > 0.0 {
                0.0
            } else {
                (-q.density * PI * (p.cell_radius().powi(2) - q.reflector_inner.powi(2))).exp()
            });
        }
        let ln_y = (t - 1.0).ln() - (m + 1.0 - t).ln() + 2.0 * p.alpha() * q.d.ln();
        Ok(self.ccdf_at_log_threshold(ln_y, q.reflector_inner, q.density))
    }

    /// Mean retrodirective power of a fully reflecting receiver at distance
    /// `d`, i.e. the CCDF of the total integrated over its support
    /// `[ζP_t d^{-α}, (M+1)ζP_t d^{-α}]`.
    pub fn qbar_re(&self, d: f64, reflector_inner: f64, density: f64) -> Result<f64> {
        let p = self.params;
        self.check_reflectors(reflector_inner, density)?;
        check_range("d", d, p.exclusion_radius(), p.cell_radius())?;
        Ok(self.qbar_re_unchecked(d, reflector_inner, density, self.tol))
    }

    fn qbar_re_unchecked(&self, d: f64, inner: f64, density: f64, tol: Tolerance) -> f64 {
        let p = self.params;
        let alpha = p.alpha();
        let offset = 2.0 * alpha * d.ln();
        let integrand = |s: f64| {
            let weight = 0.25 / (0.5 * s).cosh().powi(2);
            weight * self.ccdf_at_log_threshold(offset + s, inner, density)
        };
        let mut points: Vec<f64> = (0..=20).map(|k| -LOGISTIC_SPAN + 4.0 * k as f64).collect();
        // interference switches on between ln Y = α ln inner² and α ln ρ²
        let mut features = vec![
            alpha * (inner * inner).ln() - offset,
            alpha * (p.cell_radius().powi(2)).ln() - offset,
        ];
        if p.noise_power() > 0.0 {
            let cutoff = (p.transmit_power() * p.waveform_duration() / p.noise_power()).ln();
            features.push(cutoff - offset);
        }
        for f in features {
            if f > -LOGISTIC_SPAN && f < LOGISTIC_SPAN {
                points.push(f);
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let r = integrate_with_breaks(integrand, &points, tol);
        p.m() * p.omni_power(d) * r.value
    }

    /// Mean retrodirective power averaged over a receiver uniform on
    /// `[reflector_inner, ρ]`, with interferers of the given density on the
    /// same annulus.
    pub fn q_fb_retro(&self, reflector_inner: f64, density: f64) -> Result<f64> {
        self.check_reflectors(reflector_inner, density)?;
        let rho = self.params.cell_radius();
        if reflector_inner >= rho {
            return Ok(0.0);
        }
        let inner_tol = Tolerance::new(self.tol.rel * 1e-2, self.tol.abs * 1e-2);
        let r = integrate(
            |y| y * self.qbar_re_unchecked(y, reflector_inner, density, inner_tol),
            reflector_inner,
            rho,
            self.tol,
        );
        Ok(2.0 * r.value / (rho * rho - reflector_inner * reflector_inner))
    }

    /// Full-backscattering average Λ(ξ,ρ) + Q_FB(ξ, λ).
    pub fn q_fb_total(&self) -> Result<f64> {
        let p = self.params;
        Ok(self.lambda_cell() + self.q_fb_retro(p.exclusion_radius(), p.density())?)
    }

    /// Distance-based binary average
    /// `ε Λ(ξ,Δ) + (1−ε)[Λ(Δ,ρ) + Q_FB(Δ, λ)]`, ε = (Δ²−ξ²)/(ρ²−ξ²).
    pub fn q_dbb(&self, delta: f64) -> Result<f64> {
        let p = self.params;
        let (xi, rho) = (p.exclusion_radius(), p.cell_radius());
        check_range("delta", delta, xi, rho)?;
        let eps = (delta * delta - xi * xi) / (rho * rho - xi * xi);
        let mut total = 0.0;
        if eps > 0.0 {
            total += eps * self.lambda_term(AnnulusSpec { inner: xi, outer: delta });
        }
        if eps < 1.0 {
            let active = self.lambda_term(AnnulusSpec { inner: delta, outer: rho })
                + self.q_fb_retro(delta, p.density())?;
            total += (1.0 - eps) * active;
        }
        Ok(total)
    }

    /// Probabilistic binary average Λ(ξ,ρ) + p Q_FB(ξ, pλ).
    pub fn q_pbb(&self, prob: f64) -> Result<f64> {
        check_range("p", prob, 0.0, 1.0)?;
        let p = self.params;
        let retro = if prob == 0.0 {
            0.0
        } else {
            prob * self.q_fb_retro(p.exclusion_radius(), prob * p.density())?
        };
        Ok(self.lambda_cell() + retro)
    }

    /// Dense- and sparse-network limits of the full-backscattering average:
    /// `(Λ(ξ,ρ), M Λ(ξ,ρ))`.
    pub fn asymptotic_limits(&self) -> (f64, f64) {
        let dense = self.lambda_cell();
        (dense, self.params.m() * dense)
    }

    /// Mean total power of a receiver pinned at `d` under DBB with threshold `delta`.
    pub fn dbb_tagged(&self, d: f64, delta: f64) -> Result<f64> {
        let p = self.params;
        check_range("delta", delta, p.exclusion_radius(), p.cell_radius())?;
        let om = p.omni_power(d);
        if d > delta {
            Ok(om + self.qbar_re(d, delta, p.density())?)
        } else {
            Ok(om)
        }
    }

    /// Mean total power of a receiver pinned at `d` under PBB with probability `prob`.
    pub fn pbb_tagged(&self, d: f64, prob: f64) -> Result<f64> {
        check_range("p", prob, 0.0, 1.0)?;
        let p = self.params;
        let om = p.omni_power(d);
        if prob == 0.0 {
            return Ok(om);
        }
        Ok(om + prob * self.qbar_re(d, p.exclusion_radius(), prob * p.density())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;

    fn params_with(f: impl FnOnce(&mut RawParams)) -> SystemParams {
        let mut raw = RawParams::baseline();
        f(&mut raw);
        raw.validate().unwrap()
    }

    #[test]
    fn lambda_cell_value() {
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        assert!((a.lambda_cell() - 1.0 / 960.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_term_matches_radial_quadrature() {
        // independent route: (2/(b²−a²)) ∫ y^{1−α} dy
        let p = params_with(|r| r.path_loss_exponent = 3.7);
        let a = Analysis::new(&p);
        let spec = AnnulusSpec::new(3.0, 17.0).unwrap();
        let q = integrate(|y: f64| y.powf(1.0 - 3.7), 3.0, 17.0, Tolerance::new(1e-13, 0.0));
        let expected = 2.0 * q.value / (17.0f64.powi(2) - 9.0);
        assert!((a.lambda_term(spec) / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_term_scales_and_orders() {
        let p1 = SystemParams::baseline();
        let p2 = params_with(|r| r.transmit_power = 2.0);
        let spec = AnnulusSpec::new(2.0, 30.0).unwrap();
        let (l1, l2) = (Analysis::new(&p1).lambda_term(spec), Analysis::new(&p2).lambda_term(spec));
        assert!((l2 / l1 - 2.0).abs() < 1e-14);
        for delta in [2.5, 10.0, 29.0] {
            let far = Analysis::new(&p1).lambda_term(AnnulusSpec::new(delta, 30.0).unwrap());
            assert!(far < l1);
        }
    }

    #[test]
    fn annulus_invariants() {
        assert!(AnnulusSpec::new(1.0, 3.0).is_err());
        assert!(AnnulusSpec::new(3.0, 3.0).is_err());
        assert!(AnnulusSpec::new(2.0, 3.0).is_ok());
    }

    #[test]
    fn q_dib_value_and_domain() {
        let p = SystemParams::baseline();
        let q = Analysis::new(&p).q_dib().unwrap();
        assert!((q - 1.9545e-2).abs() < 5e-6, "{q}");
        let sparse = params_with(|r| r.density = 1e-4);
        assert!(Analysis::new(&sparse).q_dib().is_err());
        let dense = params_with(|r| r.density = 1e6);
        let a = Analysis::new(&dense);
        assert!((a.q_dib().unwrap() / a.lambda_cell() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn interference_integral_matches_direct_quadrature() {
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        for y in [1e-3, 1.0, 1e4, 1e8, 1e12] {
            let direct = integrate_with_breaks(
                |r: f64| y * r / (y + r.powi(6)),
                &[2.0, 3.0, 5.0, 8.0, 13.0, 20.0, 30.0],
                Tolerance::new(1e-13, 0.0),
            );
            let ours = a.interference_integral(y.ln(), 2.0);
            assert!((ours / direct.value - 1.0).abs() < 1e-10, "Y={y}: {ours} vs {}", direct.value);
        }
        assert_eq!(a.interference_integral(f64::INFINITY, 2.0), 448.0);
        assert_eq!(a.interference_integral(f64::NEG_INFINITY, 2.0), 0.0);
    }

    #[test]
    fn ccdf_endpoints() {
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        let base = p.omni_power(15.0);
        let q = |x| CcdfQuery {
            x,
            d: 15.0,
            reflector_inner: 2.0,
            density: 0.01,
        };
        assert_eq!(a.ccdf_total(q(base)).unwrap(), 1.0);
        assert_eq!(a.ccdf_total(q(501.0 * base)).unwrap(), 0.0);
        assert!(a.ccdf_total(q(0.5 * base)).is_err());
        assert!(a.ccdf_total(q(502.0 * base)).is_err());

        // noiseless upper end: void probability of the reflector process
        let quiet = params_with(|r| r.noise_power = 0.0);
        let a = Analysis::new(&quiet);
        let void = (-0.01 * PI * (900.0 - 100.0f64)).exp();
        let at_end = a
            .ccdf_total(CcdfQuery {
                x: 501.0 * base,
                d: 15.0,
                reflector_inner: 10.0,
                density: 0.01,
            })
            .unwrap();
        assert!((at_end - void).abs() < 1e-15);
        let near_end = a
            .ccdf_total(CcdfQuery {
                x: (501.0 - 1e-9) * base,
                d: 15.0,
                reflector_inner: 10.0,
                density: 0.01,
            })
            .unwrap();
        assert!((near_end / void - 1.0).abs() < 1e-6, "{near_end} vs {void}");
    }

    #[test]
    fn ccdf_is_a_nonincreasing_probability() {
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        let base = p.omni_power(15.0);
        let mut prev = 1.0;
        for k in 0..=100 {
            let t = 1.0 + 500.0 * k as f64 / 100.0;
            let v = a
                .ccdf_total(CcdfQuery {
                    x: t * base,
                    d: 15.0,
                    reflector_inner: 2.0,
                    density: 0.01,
                })
                .unwrap();
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15, "t={t}");
            prev = v;
        }
    }

    #[test]
    fn qbar_without_interference_or_noise_is_full_beam() {
        let p = params_with(|r| r.noise_power = 0.0);
        let a = Analysis::new(&p);
        for d in [2.0, 11.0, 30.0] {
            let q = a.qbar_re(d, 2.0, 0.0).unwrap();
            let cap = p.m() * p.omni_power(d);
            assert!((q / cap - 1.0).abs() < 1e-9, "{d}: {q} vs {cap}");
        }
    }

    #[test]
    fn qbar_matches_direct_ccdf_integral() {
        // independent route: integrate the CCDF in t directly
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        let d = 6.0;
        let base = p.omni_power(d);
        let ccdf = |t: f64| {
            a.ccdf_total(CcdfQuery {
                x: t * base,
                d,
                reflector_inner: 2.0,
                density: 0.01,
            })
            .unwrap()
        };
        let mut pts = vec![1.0];
        let mut t = 1.0 + 1e-9;
        while t < 501.0 {
            pts.push(t);
            t = 1.0 + (t - 1.0) * 2.0;
        }
        pts.push(501.0);
        let direct = integrate_with_breaks(ccdf, &pts, Tolerance::new(1e-11, 0.0)).value * base;
        let ours = a.qbar_re(d, 2.0, 0.01).unwrap();
        assert!((ours / direct - 1.0).abs() < 1e-6, "{ours} vs {direct}");
    }

    #[test]
    fn qbar_bounded_and_decreasing_in_density() {
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        let d = 12.0;
        let cap = p.m() * p.omni_power(d);
        let mut prev = f64::INFINITY;
        for dens in [0.0, 0.001, 0.01, 0.05, 0.2] {
            let q = a.qbar_re(d, 2.0, dens).unwrap();
            assert!(q >= 0.0 && q <= cap);
            assert!(q < prev);
            prev = q;
        }
    }

    #[test]
    fn dbb_endpoints_and_epsilon() {
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        let at_rho = a.q_dbb(30.0).unwrap();
        assert!((at_rho / a.lambda_cell() - 1.0).abs() < 1e-13);
        let at_xi = a.q_dbb(2.0).unwrap();
        assert!((at_xi / a.q_fb_total().unwrap() - 1.0).abs() < 1e-13);
        assert!(a.q_dbb(1.0).is_err());
        // ε weight at Δ = 10
        let eps: f64 = (100.0 - 4.0) / (900.0 - 4.0);
        assert!((eps - 0.107_142_857).abs() < 1e-9);
    }

    #[test]
    fn dbb_mixture_recovers_lambda_when_silent() {
        // with no retro part, εΛ(ξ,Δ) + (1−ε)Λ(Δ,ρ) = Λ(ξ,ρ)
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        let delta = 10.0;
        let eps = (delta * delta - 4.0) / 896.0;
        let mix = eps * a.lambda_term(AnnulusSpec::new(2.0, delta).unwrap())
            + (1.0 - eps) * a.lambda_term(AnnulusSpec::new(delta, 30.0).unwrap());
        assert!((mix / a.lambda_cell() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn pbb_endpoints() {
        let p = SystemParams::baseline();
        let a = Analysis::new(&p);
        assert_eq!(a.q_pbb(0.0).unwrap(), a.lambda_cell());
        assert!((a.q_pbb(1.0).unwrap() / a.q_fb_total().unwrap() - 1.0).abs() < 1e-13);
        assert!(a.q_pbb(-0.1).is_err());
    }

    #[test]
    fn limits_ratio_is_m() {
        let p = SystemParams::baseline();
        let (dense, sparse) = Analysis::new(&p).asymptotic_limits();
        assert!((dense - 1.041_666_666_666_7e-3).abs() < 1e-15);
        assert!((sparse / dense - 500.0).abs() < 1e-12);
    }
}
