//! Gauss–Legendre quadrature rules and composite panels.

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and its derivative by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A composite Gauss–Legendre rule over `[a, b]` split into `panels`
/// equal panels with `per_panel` nodes each.
#[derive(Clone, Debug)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(a: f64, b: f64, panels: usize, per_panel: usize) -> Self {
        let (xs, ws) = gauss_legendre(per_panel);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in xs.iter().zip(&ws) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        PanelRule { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        crate::util::pairwise_sum(&terms)
    }
}

/// Adaptive 1D integration by panel bisection with embedded GL error
/// estimate. Not for oscillatory integrands; those get their own rules.
pub fn integrate_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (x7, w7) = gauss_legendre(7);
    let (x15, w15) = gauss_legendre(15);
    fn panel(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        rule_lo: (&[f64], &[f64]),
        rule_hi: (&[f64], &[f64]),
    ) -> (f64, f64) {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let eval = |xs: &[f64], ws: &[f64]| -> f64 {
            xs.iter()
                .zip(ws)
                .map(|(&x, &w)| half * w * f(mid + half * x))
                .sum()
        };
        let lo = eval(rule_lo.0, rule_lo.1);
        let hi = eval(rule_hi.0, rule_hi.1);
        (hi, (hi - lo).abs())
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
        r7: (&[f64], &[f64]),
        r15: (&[f64], &[f64]),
    ) -> f64 {
        let (val, err) = panel(f, a, b, r7, r15);
        if err <= tol || depth >= 48 {
            return val;
        }
        let mid = 0.5 * (a + b);
        rec(f, a, mid, tol / 2.0, depth + 1, r7, r15) + rec(f, mid, b, tol / 2.0, depth + 1, r7, r15)
    }
    rec(f, a, b, tol, 0, (&x7, &w7), (&x15, &w15))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        // 5-point GL is exact through degree 9.
        let (xs, ws) = gauss_legendre(5);
        let val: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * x.powi(8)).sum();
        assert!((val - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_on_cosine() {
        let rule = PanelRule::new(0.0, std::f64::consts::PI, 8, 6);
        let val = rule.integrate(|x| x.sin());
        assert!((val - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_kink() {
        let val = integrate_adaptive(&|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10);
        assert!((val - 4.0 / 3.0).abs() < 1e-8);
    }
}
