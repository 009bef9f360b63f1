//! Coefficient fields with derivative oracles and declared `C^{k,μ}` class.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::CoeffsError;

static NEXT_FIELD_ID: AtomicU64 = AtomicU64::new(1);

/// Opaque identity used to intern derivative atoms in symbolic expressions.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FieldId(pub u64);

impl FieldId {
    fn fresh() -> Self {
        FieldId(NEXT_FIELD_ID.fetch_add(1, Ordering::Relaxed))
    }
}

/// A scalar coefficient function of one space variable with a derivative
/// oracle. Implementations must be pure; everything downstream assumes
/// repeated evaluation returns identical values.
pub trait ScalarField: Send + Sync {
    fn id(&self) -> FieldId;
    fn name(&self) -> &str;
    fn eval(&self, x: f64) -> f64;
    /// `order`-th derivative at `x`. Must be total for `order <= max_order`.
    fn deriv(&self, order: u32, x: f64) -> f64;
    /// Highest derivative order the oracle provides; `None` means smooth.
    fn max_order(&self) -> Option<u32>;
}

/// Concrete coefficient families.
#[derive(Clone)]
enum Family {
    /// `c`
    Const(f64),
    /// `Σ c_j x^j`
    Poly(Vec<f64>),
    /// `a0 + Σ_i (c_i cos(k_i x) + s_i sin(k_i x))`
    Trig {
        a0: f64,
        modes: Vec<(f64, f64, f64)>, // (k, cos coeff, sin coeff)
    },
    /// `scale |x|^{1+mu} + shift`  (class C^{1,mu})
    AbsPower { mu: f64, scale: f64, shift: f64 },
    /// `scale |sin(freq x)|^{k+mu} + shift`  (class C^{k,mu}, periodic)
    AbsPowSin {
        k: u32,
        mu: f64,
        scale: f64,
        shift: f64,
        freq: f64,
    },
    /// `scale Σ_{n=1}^{N} b^{-n(k+mu)} cos(b^n x) + shift`  (class C^{k,mu})
    Weierstrass {
        b: f64,
        k: u32,
        mu: f64,
        scale: f64,
        nterms: u32,
        shift: f64,
    },
    /// Arbitrary smooth oracle.
    Custom(Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>),
}

/// A coefficient field together with its declared regularity class and
/// tempered-weight data.
#[derive(Clone)]
pub struct HoelderField {
    id: FieldId,
    name: String,
    family: Family,
    pub dim: usize,
    /// Declared class `C^{k,mu}`.
    pub k: u32,
    pub mu: f64,
    /// Hölder seminorm bound of the k-th derivative.
    pub hoelder_const: f64,
    /// Tempered-weight constants `(C0, N0)`.
    pub growth_bound: (f64, f64),
    /// Max derivative order the oracle answers (`None` = smooth family).
    oracle_limit: Option<u32>,
}

impl fmt::Debug for HoelderField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HoelderField({}, k={}, mu={})",
            self.name, self.k, self.mu
        )
    }
}

/// `d^r/dx^r |u|^alpha` factors for the AbsPowSin family, `r <= 3`.
/// With u = sin(wx), sgn = sgn(u), c = cos(wx).
fn abs_pow_sin_deriv(alpha: f64, w: f64, r: u32, x: f64) -> f64 {
    let s = (w * x).sin();
    let c = (w * x).cos();
    let sg = if s >= 0.0 { 1.0 } else { -1.0 };
    let a = alpha;
    let pow = |b: f64| -> f64 {
        if s == 0.0 && b <= 0.0 {
            // Only reachable when its prefactor vanishes too; avoid inf*0.
            return 0.0;
        }
        s.abs().powf(b)
    };
    match r {
        0 => pow(a),
        1 => a * w * pow(a - 1.0) * sg * c,
        2 => a * w * w * ((a - 1.0) * pow(a - 2.0) * c * c - pow(a)),
        3 => {
            a * w * w * w
                * sg
                * ((a - 1.0) * (a - 2.0) * pow(a - 3.0) * c * c * c
                    - (3.0 * a - 2.0) * pow(a - 1.0) * c)
        }
        _ => unreachable!("AbsPowSin oracle limited to order 3"),
    }
}

impl ScalarField for HoelderField {
    fn id(&self) -> FieldId {
        self.id
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: f64) -> f64 {
        self.deriv(0, x)
    }

    fn deriv(&self, order: u32, x: f64) -> f64 {
        if let Some(limit) = self.oracle_limit {
            assert!(
                order <= limit,
                "field `{}` asked for derivative {} beyond oracle limit {}",
                self.name,
                order,
                limit
            );
        }
        match &self.family {
            Family::Const(c) => {
                if order == 0 {
                    *c
                } else {
                    0.0
                }
            }
            Family::Poly(cs) => {
                // Horner on the derivative coefficients.
                let mut acc = 0.0;
                for j in (order as usize..cs.len()).rev() {
                    let mut f = cs[j];
                    for t in 0..order {
                        f *= (j as u32 - t) as f64;
                    }
                    acc = acc * x + f;
                }
                acc
            }
            Family::Trig { a0, modes } => {
                let mut acc = if order == 0 { *a0 } else { 0.0 };
                for &(k, cc, sc) in modes {
                    let kp = k.powi(order as i32);
                    let phase = k * x + order as f64 * std::f64::consts::FRAC_PI_2;
                    // d^r cos(kx) = k^r cos(kx + r π/2), same shift for sin.
                    acc += kp * (cc * phase.cos() + sc * phase.sin());
                }
                acc
            }
            Family::AbsPower { mu, scale, shift } => {
                let a = 1.0 + mu;
                match order {
                    0 => scale * x.abs().powf(a) + shift,
                    1 => scale * a * x.abs().powf(a - 1.0) * x.signum(),
                    _ => unreachable!("AbsPower oracle limited to order 1"),
                }
            }
            Family::AbsPowSin {
                k,
                mu,
                scale,
                shift,
                freq,
            } => {
                let alpha = *k as f64 + mu;
                let v = scale * abs_pow_sin_deriv(alpha, *freq, order, x);
                if order == 0 {
                    v + shift
                } else {
                    v
                }
            }
            Family::Weierstrass {
                b,
                k,
                mu,
                scale,
                nterms,
                shift,
            } => {
                let alpha = *k as f64 + mu;
                let mut acc = if order == 0 { *shift } else { 0.0 };
                for n in 1..=*nterms {
                    let bn = b.powi(n as i32);
                    let amp = scale * bn.powf(-alpha) * bn.powi(order as i32);
                    let phase = bn * x + order as f64 * std::f64::consts::FRAC_PI_2;
                    acc += amp * phase.cos();
                }
                acc
            }
            Family::Custom(f) => f(order, x),
        }
    }

    fn max_order(&self) -> Option<u32> {
        self.oracle_limit
    }
}

impl HoelderField {
    fn new(
        name: impl Into<String>,
        family: Family,
        k: u32,
        mu: f64,
        hoelder_const: f64,
        growth_bound: (f64, f64),
        oracle_limit: Option<u32>,
    ) -> Arc<Self> {
        Arc::new(HoelderField {
            id: FieldId::fresh(),
            name: name.into(),
            family,
            dim: 1,
            k,
            mu,
            hoelder_const,
            growth_bound,
            oracle_limit,
        })
    }

    pub fn constant(name: &str, c: f64) -> Arc<Self> {
        Self::new(name, Family::Const(c), u32::MAX, 0.0, 0.0, (1.0, 0.0), None)
    }

    /// Polynomial `Σ c_j x^j`.
    pub fn poly(name: &str, coeffs: Vec<f64>) -> Arc<Self> {
        let degree = coeffs.len().saturating_sub(1) as f64;
        let c0 = coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1.0) * 2.0;
        Self::new(
            name,
            Family::Poly(coeffs),
            u32::MAX,
            0.0,
            0.0,
            (c0, degree),
            None,
        )
    }

    /// `a0 + Σ (c_i cos(k_i x) + s_i sin(k_i x))`.
    pub fn trig(name: &str, a0: f64, modes: Vec<(f64, f64, f64)>) -> Arc<Self> {
        Self::new(
            name,
            Family::Trig { a0, modes },
            u32::MAX,
            0.0,
            0.0,
            (2.0, 0.0),
            None,
        )
    }

    pub fn abs_power(name: &str, mu: f64, scale: f64, shift: f64) -> Result<Arc<Self>, CoeffsError> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(CoeffsError::BadParams(format!("mu = {mu} outside [0,1]")));
        }
        let hoelder = scale.abs() * (1.0 + mu) * 2.0;
        Ok(Self::new(
            name,
            Family::AbsPower { mu, scale, shift },
            1,
            mu,
            hoelder,
            (4.0, 4.0),
            Some(1),
        ))
    }

    pub fn abs_pow_sin(
        name: &str,
        k: u32,
        mu: f64,
        scale: f64,
        shift: f64,
        freq: f64,
    ) -> Result<Arc<Self>, CoeffsError> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(CoeffsError::BadParams(format!("mu = {mu} outside [0,1]")));
        }
        if k > 3 {
            return Err(CoeffsError::BadParams(format!(
                "AbsPowSin oracle implemented for k <= 3, got k = {k}"
            )));
        }
        let alpha = k as f64 + mu;
        let hoelder = scale.abs() * freq.abs().powf(alpha) * (alpha + 1.0).powi(k as i32 + 1) * 2.0;
        Ok(Self::new(
            name,
            Family::AbsPowSin {
                k,
                mu,
                scale,
                shift,
                freq,
            },
            k,
            mu,
            hoelder,
            (2.0, 0.0),
            Some(k),
        ))
    }

    pub fn weierstrass(
        name: &str,
        b: f64,
        k: u32,
        mu: f64,
        scale: f64,
        nterms: u32,
        shift: f64,
    ) -> Result<Arc<Self>, CoeffsError> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(CoeffsError::BadParams(format!("mu = {mu} outside [0,1]")));
        }
        if b <= 1.0 {
            return Err(CoeffsError::BadParams(format!("weierstrass base b = {b} <= 1")));
        }
        // C^{k,mu} seminorm of the truncated series: the k-th derivative is
        // Σ b^{-n mu} cos-like, whose mu-Hölder seminorm is bounded by
        // Σ_n b^{-n mu} b^{n mu} = nterms (each term has seminorm b^{n mu}·b^{-n mu}).
        let hoelder = scale.abs() * 2.0 * nterms as f64;
        Ok(Self::new(
            name,
            Family::Weierstrass {
                b,
                k,
                mu,
                scale,
                nterms,
                shift,
            },
            k,
            mu,
            hoelder,
            (2.0, 0.0),
            Some(k),
        ))
    }

    /// Arbitrary smooth oracle (all derivative orders answered by `f`).
    pub fn custom_smooth(
        name: &str,
        f: Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>,
        growth_bound: (f64, f64),
    ) -> Arc<Self> {
        Self::new(name, Family::Custom(f), u32::MAX, 0.0, 0.0, growth_bound, None)
    }

    /// Sampled sup of `|d^order/dx^order|` over `[a, b]`, with a safety
    /// factor; used as a Lipschitz certificate by the phase-space
    /// subdivision quadrature.
    pub fn deriv_sup_on(&self, order: u32, a: f64, b: f64, samples: usize) -> f64 {
        let mut sup: f64 = 0.0;
        for i in 0..=samples {
            let x = a + (b - a) * i as f64 / samples as f64;
            sup = sup.max(self.deriv(order, x).abs());
        }
        sup * 1.5 + 1e-12
    }
}

/// Test-field families exposed by the scenario layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestFamily {
    Weierstrass,
    AbsPower,
    Smooth,
}

/// Parameters for [`make_test_field`].
#[derive(Clone, Debug)]
pub struct FieldParams {
    pub k: i64,
    pub mu: f64,
    /// Additive offset guaranteeing the lower bound of Assumption-type
    /// conditions.
    pub shift: f64,
    pub scale: f64,
    /// Weierstrass base (ignored by the other families).
    pub base: f64,
    pub nterms: u32,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            k: 1,
            mu: 0.5,
            shift: 1.0,
            scale: 1.0,
            base: 2.0,
            nterms: 60,
        }
    }
}

/// Construct one of the exemplar coefficient fields.
///
/// * `Smooth`: `shift + scale·x²` (declared class is unconstrained),
/// * `AbsPower`: `scale·|x|^{1+mu} + shift` with class `C^{1,mu}`,
/// * `Weierstrass`: truncated `scale·Σ b^{-n(k+mu)} cos(bⁿx) + shift`.
pub fn make_test_field(
    family: TestFamily,
    params: &FieldParams,
) -> Result<Arc<HoelderField>, CoeffsError> {
    if params.k < 0 {
        return Err(CoeffsError::BadParams(format!("k = {} < 0", params.k)));
    }
    if !(0.0..=1.0).contains(&params.mu) {
        return Err(CoeffsError::BadParams(format!(
            "mu = {} outside [0,1]",
            params.mu
        )));
    }
    match family {
        TestFamily::Smooth => Ok(HoelderField::poly(
            "smooth_quadratic",
            vec![params.shift, 0.0, params.scale],
        )),
        TestFamily::AbsPower => {
            HoelderField::abs_power("abs_power", params.mu, params.scale, params.shift)
        }
        TestFamily::Weierstrass => HoelderField::weierstrass(
            "weierstrass",
            params.base,
            params.k as u32,
            params.mu,
            params.scale,
            params.nterms,
            params.shift,
        ),
    }
}

/// Check the Hölder condition of the top derivative on sampled pairs.
/// Returns the largest observed ratio `|f^{(k)}(x)-f^{(k)}(y)| / |x-y|^mu`.
pub fn sampled_hoelder_ratio(f: &dyn ScalarField, k: u32, mu: f64, xs: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        for &y in &xs[i + 1..] {
            let d = (x - y).abs();
            if d < 1e-12 {
                continue;
            }
            let r = (f.deriv(k, x) - f.deriv(k, y)).abs() / d.powf(mu);
            worst = worst.max(r);
        }
    }
    worst
}

/// Check the tempered-weight condition
/// `f(x) + z1 <= C0 (f(y) + z1)(1 + |x-y|)^{N0}` on sampled pairs.
/// Returns the largest observed `C0`-ratio.
pub fn sampled_tempered_ratio(f: &dyn ScalarField, z1: f64, n0: f64, xs: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &x in xs {
        for &y in xs {
            let num = f.eval(x) + z1;
            let den = (f.eval(y) + z1) * (1.0 + (x - y).abs()).powf(n0);
            if den > 0.0 {
                worst = worst.max(num / den);
            }
        }
    }
    worst
}
