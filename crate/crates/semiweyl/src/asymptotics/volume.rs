//! Sublevel-set volumes and coarea densities by certified box subdivision.
//!
//! Cells are classified full/empty against the level `E` using the value
//! at the center plus a variation certificate from sampled coefficient
//! derivative bounds; mixed cells below the depth cap contribute half
//! their measure with an explicit error tally.

use crate::quad::gauss_legendre;
use crate::symcalc::PolySymbol;


use super::AsymptoticsError;

/// Rectangle in the (x, p) plane.
#[derive(Clone, Copy, Debug)]
pub struct PhaseRegion {
    pub x: (f64, f64),
    pub p: (f64, f64),
}

impl PhaseRegion {
    pub fn area(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.p.1 - self.p.0)
    }
}

/// Value with a deterministic error tally.
#[derive(Clone, Copy, Debug)]
pub struct VolumeResult {
    pub value: f64,
    pub error_est: f64,
}

/// Variation certificate of a polynomial symbol: per-term global bounds
/// `sup_x |c_k|` and `sup_x |c_k'|` are sampled once over the region's
/// x-range, after which each cell test is pure arithmetic,
///
/// `|a(y) - a(center)| <= Σ_k [ sup|c_k'| · hx + sup|c_k| · k p_max^{k-1} hp ] p-weights`.
struct SymbolBounds {
    /// Per term: (p-power k, sup |c_k|, Lipschitz-in-x rate of c_k).
    terms: Vec<(u32, f64, f64)>,
}

impl SymbolBounds {
    fn new(sym: &PolySymbol, xa: f64, xb: f64) -> Self {
        let samples = 512;
        let mut terms = Vec::new();
        for (alpha, coeff) in &sym.terms {
            let k = alpha.get(0);
            let mut c_sup = 0.0f64;
            let mut c_lip = 0.0f64;
            for mono in &coeff.monos {
                // sup of the monomial and of its x-derivative rate over the
                // whole x-range. Products bound via Σ var_i Π_{j≠i} sup_j.
                let mut sups = Vec::with_capacity(mono.atoms.len());
                let mut rates = Vec::with_capacity(mono.atoms.len());
                for atom in &mono.atoms {
                    let mut asup = 0.0f64;
                    for i in 0..=samples {
                        let x = xa + (xb - xa) * i as f64 / samples as f64;
                        asup = asup.max(atom.field.deriv(atom.order, x).abs());
                    }
                    sups.push(asup * 1.2 + 1e-12);
                    let next_ok = atom
                        .field
                        .max_order()
                        .map_or(true, |l| atom.order + 1 <= l);
                    let rate = if next_ok {
                        let mut dsup = 0.0f64;
                        for i in 0..=samples {
                            let x = xa + (xb - xa) * i as f64 / samples as f64;
                            dsup = dsup.max(atom.field.deriv(atom.order + 1, x).abs());
                        }
                        dsup * 1.2 + 1e-12
                    } else {
                        // Top derivative of a rough field: sampled Lipschitz
                        // quotient over the grid spacing used here.
                        let mut q = 0.0f64;
                        let h = (xb - xa) / samples as f64;
                        for i in 0..samples {
                            let x0 = xa + h * i as f64;
                            q = q.max(
                                (atom.field.deriv(atom.order, x0 + h)
                                    - atom.field.deriv(atom.order, x0))
                                .abs()
                                    / h,
                            );
                        }
                        q * 2.0 + 1e-9
                    };
                    rates.push(rate);
                }
                let scalar = mono.scalar.norm();
                let prod_sup: f64 = scalar * sups.iter().product::<f64>();
                let mut prod_rate = 0.0;
                for i in 0..rates.len() {
                    let mut others = scalar;
                    for (j, s) in sups.iter().enumerate() {
                        if j != i {
                            others *= s;
                        }
                    }
                    prod_rate += rates[i] * others;
                }
                c_sup += prod_sup;
                c_lip += prod_rate;
            }
            terms.push((k, c_sup, c_lip));
        }
        SymbolBounds { terms }
    }

    fn variation(&self, xa: f64, xb: f64, pa: f64, pb: f64) -> f64 {
        let hx = 0.5 * (xb - xa);
        let hp = 0.5 * (pb - pa);
        let pmax = pa.abs().max(pb.abs());
        let mut total = 0.0;
        for &(k, c_sup, c_lip) in &self.terms {
            total += c_lip * hx * pmax.powi(k as i32);
            if k > 0 {
                total += c_sup * k as f64 * pmax.powi(k as i32 - 1) * hp;
            }
        }
        total
    }
}

/// Flattened real evaluator for the hot subdivision loop: the BTreeMap /
/// expression walk is paid once, after which evaluation is a couple of
/// vector scans.
struct FlatSymbol {
    /// (p-power, monomials as (scalar, [(field, order)])).
    terms: Vec<(i32, Vec<(f64, Vec<(std::sync::Arc<dyn crate::coeffs::ScalarField>, u32)>)>)>,
}

impl FlatSymbol {
    fn new(sym: &PolySymbol) -> Self {
        let mut terms = Vec::new();
        for (alpha, coeff) in &sym.terms {
            let mut monos = Vec::new();
            for m in &coeff.monos {
                debug_assert!(m.scalar.im.abs() < 1e-12 * m.scalar.norm().max(1.0));
                monos.push((
                    m.scalar.re,
                    m.atoms
                        .iter()
                        .map(|a| (a.field.clone(), a.order))
                        .collect(),
                ));
            }
            terms.push((alpha.get(0) as i32, monos));
        }
        FlatSymbol { terms }
    }

    #[inline]
    fn eval(&self, x: f64, p: f64) -> f64 {
        let mut acc = 0.0;
        for (k, monos) in &self.terms {
            let mut c = 0.0;
            for (scalar, atoms) in monos {
                let mut v = *scalar;
                for (field, order) in atoms {
                    v *= field.deriv(*order, x);
                }
                c += v;
            }
            acc += c * p.powi(*k);
        }
        acc
    }
}

fn gl_cell_integral(
    f: &dyn Fn(f64, f64) -> f64,
    xa: f64,
    xb: f64,
    pa: f64,
    pb: f64,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    let hx = 0.5 * (xb - xa);
    let hp = 0.5 * (pb - pa);
    let cx = 0.5 * (xa + xb);
    let cp = 0.5 * (pa + pb);
    let mut acc = 0.0;
    for (xi, wi) in nodes.iter().zip(weights) {
        for (pj, wj) in nodes.iter().zip(weights) {
            acc += wi * wj * f(cx + hx * xi, cp + hp * pj);
        }
    }
    acc * hx * hp
}

/// Weight of a sublevel integral: the unit weight, a polynomial symbol
/// (evaluated through the flattened fast path), or a raw closure.
pub enum Weight<'a> {
    Unit,
    Poly(&'a PolySymbol),
    Func(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
}

enum FlatWeight<'a> {
    Unit,
    Poly(FlatSymbol),
    Func(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
}

/// Weighted sublevel volume `∫∫ 1_{a0 <= e} w dx dp` by certified
/// subdivision. The boundary of the region must be outside the sublevel
/// set (compactness certificate), otherwise an error is returned.
pub fn weighted_sublevel_volume(
    a0: &PolySymbol,
    w: Weight,
    region: PhaseRegion,
    e: f64,
    max_depth: u32,
) -> Result<VolumeResult, AsymptoticsError> {
    certify_compact(a0, region, e)?;
    let bounds = SymbolBounds::new(a0, region.x.0, region.x.1);
    let flat = FlatSymbol::new(a0);
    let (nodes, weights) = gauss_legendre(4);
    let (nodes2, weights2) = gauss_legendre(2);

    struct Ctx<'a> {
        flat: FlatSymbol,
        bounds: SymbolBounds,
        w: FlatWeight<'a>,
        e: f64,
        max_depth: u32,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        nodes2: Vec<f64>,
        weights2: Vec<f64>,
    }
    let ctx = Ctx {
        flat,
        bounds,
        w: match w {
            Weight::Unit => FlatWeight::Unit,
            Weight::Poly(p) => FlatWeight::Poly(FlatSymbol::new(p)),
            Weight::Func(f) => FlatWeight::Func(f),
        },
        e,
        max_depth,
        nodes,
        weights,
        nodes2,
        weights2,
    };

    // (∫∫_cell w, ∫∫_cell |w|): small deep cells get the cheap 2x2 rule.
    fn cell_weight(ctx: &Ctx, xa: f64, xb: f64, pa: f64, pb: f64, depth: u32) -> (f64, f64) {
        let (nodes, weights) = if depth >= 8 {
            (&ctx.nodes2, &ctx.weights2)
        } else {
            (&ctx.nodes, &ctx.weights)
        };
        match &ctx.w {
            FlatWeight::Unit => {
                let area = (xb - xa) * (pb - pa);
                (area, area)
            }
            FlatWeight::Poly(fw) => {
                let hx = 0.5 * (xb - xa);
                let hp = 0.5 * (pb - pa);
                let cx = 0.5 * (xa + xb);
                let cp = 0.5 * (pa + pb);
                let mut v = 0.0;
                let mut a = 0.0;
                for (xi, wi) in nodes.iter().zip(weights) {
                    for (pj, wj) in nodes.iter().zip(weights) {
                        let val = fw.eval(cx + hx * xi, cp + hp * pj);
                        v += wi * wj * val;
                        a += wi * wj * val.abs();
                    }
                }
                (v * hx * hp, a * hx * hp)
            }
            FlatWeight::Func(f) => {
                let v = gl_cell_integral(f, xa, xb, pa, pb, nodes, weights);
                let a = gl_cell_integral(&|x, p| f(x, p).abs(), xa, xb, pa, pb, nodes, weights);
                (v, a)
            }
        }
    }

    // (value, error) of the subtree; parallel fan-out near the root.
    fn rec(ctx: &Ctx, xa: f64, xb: f64, pa: f64, pb: f64, depth: u32) -> (f64, f64) {
        let cx = 0.5 * (xa + xb);
        let cp = 0.5 * (pa + pb);
        let val = ctx.flat.eval(cx, cp);
        let var = ctx.bounds.variation(xa, xb, pa, pb);
        if val - var > ctx.e {
            return (0.0, 0.0);
        }
        if val + var <= ctx.e {
            let (v, _) = cell_weight(ctx, xa, xb, pa, pb, depth);
            return (v, 0.0);
        }
        if depth >= ctx.max_depth {
            let (v, a) = cell_weight(ctx, xa, xb, pa, pb, depth);
            return (0.5 * v, 0.5 * a);
        }
        if depth < 4 {
            let ((a, b), (c, d)) = rayon::join(
                || {
                    rayon::join(
                        || rec(ctx, xa, cx, pa, cp, depth + 1),
                        || rec(ctx, cx, xb, pa, cp, depth + 1),
                    )
                },
                || {
                    rayon::join(
                        || rec(ctx, xa, cx, cp, pb, depth + 1),
                        || rec(ctx, cx, xb, cp, pb, depth + 1),
                    )
                },
            );
            ((a.0 + b.0) + (c.0 + d.0), (a.1 + b.1) + (c.1 + d.1))
        } else {
            let a = rec(ctx, xa, cx, pa, cp, depth + 1);
            let b = rec(ctx, cx, xb, pa, cp, depth + 1);
            let c = rec(ctx, xa, cx, cp, pb, depth + 1);
            let d = rec(ctx, cx, xb, cp, pb, depth + 1);
            ((a.0 + b.0) + (c.0 + d.0), (a.1 + b.1) + (c.1 + d.1))
        }
    }
    let (value, error_est) = rec(
        &ctx,
        region.x.0,
        region.x.1,
        region.p.0,
        region.p.1,
        0,
    );
    Ok(VolumeResult { value, error_est })
}

fn certify_compact(
    a0: &PolySymbol,
    region: PhaseRegion,
    e: f64,
) -> Result<(), AsymptoticsError> {
    let samples = 160;
    let margin = 1e-9;
    let check = |x: f64, p: f64| -> Result<(), AsymptoticsError> {
        let v = a0.eval1(x, p).re;
        if v <= e + margin {
            Err(AsymptoticsError::NotCompact { x, p, value: v })
        } else {
            Ok(())
        }
    };
    for i in 0..=samples {
        let x = region.x.0 + (region.x.1 - region.x.0) * i as f64 / samples as f64;
        check(x, region.p.0)?;
        check(x, region.p.1)?;
        let p = region.p.0 + (region.p.1 - region.p.0) * i as f64 / samples as f64;
        check(region.x.0, p)?;
        check(region.x.1, p)?;
    }
    Ok(())
}

/// Plain Weyl volume `∫∫ 1_{a0 <= e} dx dp`.
pub fn weyl_volume(
    a0: &PolySymbol,
    region: PhaseRegion,
    e: f64,
    max_depth: u32,
) -> Result<VolumeResult, AsymptoticsError> {
    weighted_sublevel_volume(a0, Weight::Unit, region, e, max_depth)
}

/// Adaptive integral of a smooth compactly supported function over the
/// region (quadtree refinement against the 2x2-split estimate).
pub fn adaptive_phase_integral(
    f: &dyn Fn(f64, f64) -> f64,
    region: PhaseRegion,
    tol: f64,
) -> f64 {
    let (nodes, weights) = gauss_legendre(4);
    fn rec(
        f: &dyn Fn(f64, f64) -> f64,
        xa: f64,
        xb: f64,
        pa: f64,
        pb: f64,
        tol: f64,
        depth: u32,
        nodes: &[f64],
        weights: &[f64],
    ) -> f64 {
        let coarse = gl_cell_integral(f, xa, xb, pa, pb, nodes, weights);
        let cx = 0.5 * (xa + xb);
        let cp = 0.5 * (pa + pb);
        let fine = gl_cell_integral(f, xa, cx, pa, cp, nodes, weights)
            + gl_cell_integral(f, cx, xb, pa, cp, nodes, weights)
            + gl_cell_integral(f, xa, cx, cp, pb, nodes, weights)
            + gl_cell_integral(f, cx, xb, cp, pb, nodes, weights);
        if (coarse - fine).abs() <= tol || depth >= 24 {
            return fine;
        }
        rec(f, xa, cx, pa, cp, tol / 4.0, depth + 1, nodes, weights)
            + rec(f, cx, xb, pa, cp, tol / 4.0, depth + 1, nodes, weights)
            + rec(f, xa, cx, cp, pb, tol / 4.0, depth + 1, nodes, weights)
            + rec(f, cx, xb, cp, pb, tol / 4.0, depth + 1, nodes, weights)
    }
    rec(
        f,
        region.x.0,
        region.x.1,
        region.p.0,
        region.p.1,
        tol,
        0,
        &nodes,
        &weights,
    )
}

/// Coarea density `∫_{a0=s} w / |∇a0| dS`, computed as the derivative of
/// the weighted sublevel volume by centered differences with a Richardson
/// step-size check.
pub fn coarea_density(
    a0: &PolySymbol,
    w: &Weight,
    region: PhaseRegion,
    s: f64,
    ds: f64,
    max_depth: u32,
) -> Result<f64, AsymptoticsError> {
    let reborrow = || match w {
        Weight::Unit => Weight::Unit,
        Weight::Poly(p) => Weight::Poly(p),
        Weight::Func(f) => Weight::Func(*f),
    };
    let vol = |e: f64| -> Result<f64, AsymptoticsError> {
        Ok(weighted_sublevel_volume(a0, reborrow(), region, e, max_depth)?.value)
    };
    let d1 = (vol(s + ds)? - vol(s - ds)?) / (2.0 * ds);
    let d2 = (vol(s + 0.5 * ds)? - vol(s - 0.5 * ds)?) / ds;
    let disagreement = (d1 - d2).abs();
    let tol = 0.05 * d2.abs().max(1e-6);
    if disagreement > tol {
        return Err(AsymptoticsError::CoareaStep {
            s,
            disagreement,
            tol,
        });
    }
    // Richardson extrapolation of the centered difference.
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Sampled non-criticality check near the level `s`: `|∇a0|` on points
/// with `|a0 - s| < band` must stay above `floor`.
pub fn check_noncritical(
    a0: &PolySymbol,
    region: PhaseRegion,
    s: f64,
    band: f64,
    floor: f64,
) -> Result<f64, AsymptoticsError> {
    let mut min_grad = f64::INFINITY;
    let n = 220;
    for i in 0..=n {
        for j in 0..=n {
            let x = region.x.0 + (region.x.1 - region.x.0) * i as f64 / n as f64;
            let p = region.p.0 + (region.p.1 - region.p.0) * j as f64 / n as f64;
            let v = a0.eval1(x, p).re;
            if (v - s).abs() > band {
                continue;
            }
            let dp = a0.dp(0).eval1(x, p).re;
            let dx = a0
                .dx(0)
                .map(|d| d.eval1(x, p).re)
                .unwrap_or(0.0);
            let g = (dp * dp + dx * dx).sqrt();
            min_grad = min_grad.min(g);
        }
    }
    if min_grad < floor {
        return Err(AsymptoticsError::Critical {
            s,
            grad: min_grad,
            floor,
        });
    }
    Ok(min_grad)
}

/// Riesz phase terms `Ψ0 = ∫∫ (a0)_-^γ` and `Ψ1 = γ ∫∫ a1 (a0)_-^{γ-1}`.
///
/// For γ < 1 the singular `(a0)_-^{γ-1}` factor is handled through the
/// coarea substitution `u = (-s)^γ`, which makes the outer integral
/// regular: `Ψ1 = ∫_0^{(-min a0)^γ} ρ(-u^{1/γ}) du` with
/// `ρ(s) = ∫_{a0=s} a1 / |∇a0| dS`.
pub fn riesz_phase_terms(
    a0: &PolySymbol,
    a1: Option<&PolySymbol>,
    region: PhaseRegion,
    gamma: f64,
    max_depth: u32,
) -> Result<(VolumeResult, VolumeResult), AsymptoticsError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(AsymptoticsError::BadGamma(gamma));
    }
    check_noncritical(a0, region, 0.0, 0.05, 1e-3)?;

    // Ψ0 by direct subdivision with the weight (E - a0)_+^γ ... i.e. the
    // integrand (a0)_-^γ vanishes continuously at the boundary, so the
    // same certified subdivision applies with the weight evaluated inside.
    let w0 = |x: f64, p: f64| {
        let v = a0.eval1(x, p).re;
        if v < 0.0 {
            (-v).powf(gamma)
        } else {
            0.0
        }
    };
    let psi0 = weighted_sublevel_volume(a0, Weight::Func(&w0), region, 0.0, max_depth)?;

    let psi1 = match a1 {
        None => VolumeResult {
            value: 0.0,
            error_est: 0.0,
        },
        Some(a1) => {
            if (gamma - 1.0).abs() < 1e-12 {
                let r = weighted_sublevel_volume(a0, Weight::Poly(a1), region, 0.0, max_depth)?;
                VolumeResult {
                    value: gamma * r.value,
                    error_est: gamma * r.error_est,
                }
            } else {
                // Sample min a0 for the substitution range.
                let mut smin = 0.0f64;
                for i in 0..=200 {
                    for j in 0..=200 {
                        let x = region.x.0 + (region.x.1 - region.x.0) * i as f64 / 200.0;
                        let p = region.p.0 + (region.p.1 - region.p.0) * j as f64 / 200.0;
                        smin = smin.min(a0.eval1(x, p).re);
                    }
                }
                let umax = (-smin).powf(gamma);
                let (nodes, weights) = gauss_legendre(16);
                let mut acc = 0.0;
                let mut err = 0.0;
                for (u, wq) in nodes.iter().zip(&weights) {
                    let uu = 0.5 * umax * (u + 1.0);
                    let s = -uu.powf(1.0 / gamma);
                    let rho = coarea_density(a0, &Weight::Poly(a1), region, s, 2e-3, max_depth)?;
                    acc += 0.5 * umax * wq * rho;
                    err += 0.5 * umax * wq * 1e-4 * rho.abs();
                }
                VolumeResult {
                    value: acc,
                    error_est: err,
                }
            }
        }
    };
    Ok((psi0, psi1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcalc::{CoeffExpr, PolySymbol};

    fn harmonic() -> PolySymbol {
        // a0 = x² + p² - 1
        let x2 = crate::coeffs::HoelderField::poly("x2", vec![-1.0, 0.0, 1.0]);
        PolySymbol::term1(2, CoeffExpr::real(1.0)).add(&PolySymbol::field_term1(0, x2))
    }

    fn region() -> PhaseRegion {
        PhaseRegion {
            x: (-2.0, 2.0),
            p: (-2.0, 2.0),
        }
    }

    #[test]
    fn unit_disk_volume() {
        let v = weyl_volume(&harmonic(), region(), 0.0, 23).unwrap();
        assert!(
            (v.value - std::f64::consts::PI).abs() < 1e-6,
            "vol {} err_est {}",
            v.value,
            v.error_est
        );
    }

    #[test]
    fn empty_below_minimum() {
        let v = weyl_volume(&harmonic(), region(), -1.5, 18).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn quartic_volume_against_1d_reduction() {
        // a0 = p² + x⁴ - 1: volume of {p² <= 1 - x⁴} is ∫ 2√(1-x⁴)_+ dx.
        let x4 = crate::coeffs::HoelderField::poly("x4", vec![-1.0, 0.0, 0.0, 0.0, 1.0]);
        let a0 = PolySymbol::term1(2, CoeffExpr::real(1.0)).add(&PolySymbol::field_term1(0, x4));
        let v = weyl_volume(&a0, region(), 0.0, 21).unwrap();
        let oracle = crate::quad::integrate_adaptive(
            &|x: f64| {
                let t = 1.0 - x.powi(4);
                if t > 0.0 {
                    2.0 * t.sqrt()
                } else {
                    0.0
                }
            },
            -1.0,
            1.0,
            1e-9,
        );
        assert!(
            (v.value - oracle).abs() < 1e-5,
            "vol {} oracle {oracle}",
            v.value
        );
    }

    #[test]
    fn scaling_identity() {
        // weyl_volume(a0 - c, 0) = weyl_volume(a0, c) exactly.
        let a0 = harmonic();
        let shifted = a0.add(&PolySymbol::constant(1, -0.25));
        let v1 = weyl_volume(&shifted, region(), 0.0, 19).unwrap();
        let v2 = weyl_volume(&a0, region(), 0.25, 19).unwrap();
        assert_eq!(v1.value, v2.value);
    }

    #[test]
    fn compactness_failure_detected() {
        // p² - x² has non-compact sublevels in the box.
        let mx2 = crate::coeffs::HoelderField::poly("mx2", vec![0.0, 0.0, -1.0]);
        let a0 = PolySymbol::term1(2, CoeffExpr::real(1.0)).add(&PolySymbol::field_term1(0, mx2));
        assert!(matches!(
            weyl_volume(&a0, region(), 0.0, 14),
            Err(AsymptoticsError::NotCompact { .. })
        ));
    }

    #[test]
    fn coarea_density_circle() {
        // For a0 = x² + p² - 1: ∫_{a0=s} |∇a0|^{-1} dS = π for s > -1.
        let a0 = harmonic();
        for s in [-0.5f64, 0.0, 0.3] {
            let d = coarea_density(&a0, &Weight::Unit, region(), s, 1e-3, 19).unwrap();
            assert!(
                (d - std::f64::consts::PI).abs() < 1e-3,
                "density {d} at s = {s}"
            );
        }
    }

    #[test]
    fn coarea_scaling_identity() {
        // For ã0 = 2 a0: density at s equals half the density of a0 at s/2.
        let a0 = harmonic();
        let a0s = a0.scale(num_complex::Complex64::new(2.0, 0.0));
        let d1 = coarea_density(&a0s, &Weight::Unit, region(), 0.1, 1e-3, 20).unwrap();
        let d2 = coarea_density(&a0, &Weight::Unit, region(), 0.05, 1e-3, 20).unwrap();
        assert!((d1 - 0.5 * d2).abs() < 2e-3, "{d1} vs half of {d2}");
    }

    #[test]
    fn coarea_consistency_with_volume() {
        // ∫_{s0}^{s1} density ds = Vol{s0 < a0 <= s1}.
        let a0 = harmonic();
        let (s0, s1) = (-0.4, -0.1);
        let (nodes, weights) = gauss_legendre(8);
        let mut integral = 0.0;
        for (u, w) in nodes.iter().zip(&weights) {
            let s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * u;
            integral +=
                0.5 * (s1 - s0) * w * coarea_density(&a0, &Weight::Unit, region(), s, 1e-3, 18).unwrap();
        }
        let v1 = weyl_volume(&a0, region(), s1, 20).unwrap().value;
        let v0 = weyl_volume(&a0, region(), s0, 20).unwrap().value;
        let rel = (integral - (v1 - v0)).abs() / (v1 - v0);
        assert!(rel < 1e-3, "rel {rel}");
    }

    #[test]
    fn riesz_terms_harmonic() {
        // Ψ0(γ=1) = ∫∫ (x²+p²-1)_- = π/2; Ψ1 = 0 without a1.
        let a0 = harmonic();
        let (psi0, psi1) = riesz_phase_terms(&a0, None, region(), 1.0, 20).unwrap();
        assert!(
            (psi0.value - std::f64::consts::FRAC_PI_2).abs() < 1e-4,
            "psi0 {}",
            psi0.value
        );
        assert_eq!(psi1.value, 0.0);
        // Layer-cake oracle: Ψ0 = ∫_{-1}^0 Vol(a0 <= s) ds = ∫ π(1+s) ds.
        let (nodes, weights) = gauss_legendre(20);
        let mut oracle = 0.0;
        for (u, w) in nodes.iter().zip(&weights) {
            let s = -0.5 + 0.5 * u;
            oracle += 0.5 * w * weyl_volume(&a0, region(), s, 19).unwrap().value;
        }
        assert!((psi0.value - oracle).abs() < 1e-4, "{} vs {oracle}", psi0.value);
    }

    #[test]
    fn riesz_monotone_in_gamma() {
        // On { |a0| <= 1 } the map γ -> Ψ0(γ) is decreasing.
        let a0 = harmonic();
        let mut last = f64::INFINITY;
        for gamma in [0.4, 0.7, 1.0] {
            let (psi0, _) = riesz_phase_terms(&a0, None, region(), gamma, 18).unwrap();
            assert!(psi0.value < last);
            last = psi0.value;
        }
    }

    #[test]
    fn riesz_gamma_half_with_subprincipal() {
        // γ = 1/2 with a1 = cos x: compare the coarea route against dense
        // direct sampling of γ ∫∫ a1 (a0)_-^{γ-1}.
        let a0 = harmonic();
        let c = crate::coeffs::HoelderField::trig("c", 0.0, vec![(1.0, 1.0, 0.0)]);
        let a1 = PolySymbol::field_term1(0, c);
        let (_, psi1) = riesz_phase_terms(&a0, Some(&a1), region(), 0.5, 18).unwrap();
        // Oracle in polar coordinates with u = √(1-r²) (removes the
        // integrable singularity exactly): for γ = 1/2,
        // ψ1 = (1/2) ∫∫ cos(√(1-u²) cosθ) du dθ over (0,1)x(0,2π).
        let oracle = 0.5
            * adaptive_phase_integral(
                &|u: f64, th: f64| ((1.0 - u * u).max(0.0).sqrt() * th.cos()).cos(),
                PhaseRegion {
                    x: (0.0, 1.0),
                    p: (0.0, 2.0 * std::f64::consts::PI),
                },
                1e-9,
            );
        let rel = (psi1.value - oracle).abs() / oracle.abs().max(0.1);
        assert!(rel < 2e-2, "psi1 {} oracle {oracle} rel {rel}", psi1.value);
    }

    #[test]
    fn adaptive_integral_gaussian() {
        let val = adaptive_phase_integral(
            &|x, p| (-x * x - 2.0 * p * p).exp(),
            PhaseRegion {
                x: (-8.0, 8.0),
                p: (-8.0, 8.0),
            },
            1e-10,
        );
        let expect = std::f64::consts::PI / 2.0f64.sqrt();
        assert!((val - expect).abs() < 1e-8);
    }
}
