//! Max-min distance threshold for DBB and edge-optimal probability for PBB.

use crate::analysis::Analysis;
use crate::error::Result;
use crate::params::SystemParams;
use crate::quadrature::Tolerance;

/// Which crossing equation produced the DBB threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaBranch {
    /// The innermost receiver's omnidirectional power can be matched by the
    /// edge receiver: solve Q_OM(ξ) = Q_OM(ρ) + Q̄_RE(ρ; Δ).
    InnerBoundary,
    /// Otherwise solve Q_OM(Δ) = Q_OM(ρ) + Q̄_RE(ρ; Δ).
    Threshold,
}

impl std::fmt::Display for DeltaBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeltaBranch::InnerBoundary => "inner_boundary",
            DeltaBranch::Threshold => "threshold",
        })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OptResult {
    /// Δ* in metres or p* (dimensionless).
    pub argument: f64,
    /// Max-min (Δ*) or edge retrodirective (p*) objective at the argument (W).
    pub objective: f64,
    pub branch: Option<DeltaBranch>,
    /// Relative residual of the crossing equation at Δ*.
    pub residual: Option<f64>,
    /// Set when no interior solution exists and a boundary was returned.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Bracket width at which bisection may stop (m).
    pub delta_tol: f64,
    /// Relative residual at which bisection may stop.
    pub residual_tol: f64,
    /// Bracket width for golden-section search on p.
    pub p_tol: f64,
    /// Weight the edge receiver's retro power by its own reflection
    /// probability p. Without it the objective decreases in p.
    pub weight_by_own_reflection: bool,
    /// Quadrature tolerance for the Q̄_RE evaluations.
    pub quadrature: Tolerance,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            delta_tol: 1e-6,
            residual_tol: 1e-12,
            p_tol: 1e-6,
            weight_by_own_reflection: true,
            quadrature: Tolerance::new(1e-11, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Bisection for a sign change of `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `x_tol` and `|f| ≤ f_tol`, or when
/// the bracket can no longer be halved in floating point. Returns `None` when
/// `f(a)` and `f(b)` share a sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, x_tol: f64, f_tol: f64) -> Option<Root> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(Root { x: a, value: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Some(Root { x: b, value: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        iterations += 1;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm == 0.0 {
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if b - a <= x_tol && best.1.abs() <= f_tol {
            break;
        }
    }
    Some(Root {
        x: best.0,
        value: best.1,
        iterations,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Mean total power of the active edge receiver when only receivers beyond
/// `delta` reflect.
pub fn dbb_edge_power(analysis: &Analysis<'_>, delta: f64) -> Result<f64> {
    let p = analysis.params();
    let rho = p.cell_radius();
    Ok(p.omni_power(rho) + analysis.qbar_re(rho, delta, p.density())?)
}

/// The DBB threshold that balances the worst inactive and worst active receivers.
pub fn delta_star(params: &SystemParams, opts: &OptimizeOptions) -> Result<OptResult> {
    let analysis = Analysis::new(params).with_tolerance(opts.quadrature);
    let (xi, rho) = (params.exclusion_radius(), params.cell_radius());
    let inner_best = params.omni_power(xi);
    let edge = |delta: f64| dbb_edge_power(&analysis, delta).expect("delta inside the cell");
    let edge_alone = edge(rho);
    let branch = if inner_best <= edge_alone {
        DeltaBranch::InnerBoundary
    } else {
        DeltaBranch::Threshold
    };
    let inner = |delta: f64| match branch {
        DeltaBranch::InnerBoundary => inner_best,
        DeltaBranch::Threshold => params.omni_power(delta),
    };
    let gap = |delta: f64| edge(delta) - inner(delta);
    let scale = inner_best;
    match bisect(gap, xi, rho, opts.delta_tol, opts.residual_tol * scale) {
        Some(root) => {
            let objective = inner(root.x).min(edge(root.x));
            Ok(OptResult {
                argument: root.x,
                objective,
                branch: Some(branch),
                residual: Some(root.value.abs() / inner(root.x)),
                diagnostic: None,
            })
        }
        None => {
            // no crossing: keep the boundary with the better worst case
            let candidates = [xi, rho].map(|d| (d, inner(d).min(edge(d))));
            let (arg, obj) = if candidates[0].1 >= candidates[1].1 {
                candidates[0]
            } else {
                candidates[1]
            };
            Ok(OptResult {
                argument: arg,
                objective: obj,
                branch: Some(branch),
                residual: None,
                diagnostic: Some(format!(
                    "no sign change of the crossing equation on ({xi}, {rho}); returned boundary"
                )),
            })
        }
    }
}

/// Edge objective for PBB: the edge receiver's mean retrodirective power when
/// every receiver reflects with probability `p`.
pub fn pbb_edge_objective(analysis: &Analysis<'_>, p: f64, weight_by_own_reflection: bool) -> Result<f64> {
    let params = analysis.params();
    let retro = analysis.qbar_re(params.cell_radius(), params.exclusion_radius(), p * params.density())?;
    Ok(if weight_by_own_reflection { p * retro } else { retro })
}

/// The reflection probability maximizing the edge objective.
pub fn p_star(params: &SystemParams, opts: &OptimizeOptions) -> Result<OptResult> {
    let analysis = Analysis::new(params).with_tolerance(opts.quadrature);
    let objective = |p: f64| pbb_edge_objective(&analysis, p, opts.weight_by_own_reflection).expect("p in [0, 1]");
    let (arg, obj) = golden_section_max(objective, 0.0, 1.0, opts.p_tol);
    let diagnostic = if arg < 10.0 * opts.p_tol || arg > 1.0 - 10.0 * opts.p_tol {
        Some("optimum sits on the boundary of (0, 1)".to_string())
    } else {
        None
    };
    Ok(OptResult {
        argument: arg,
        objective: obj,
        branch: None,
        residual: None,
        diagnostic,
    })
}
