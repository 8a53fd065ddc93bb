//! Gauss–Legendre rules and composite panel quadrature in time.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Composite Gauss–Legendre rule: `panels` equal panels on `[a, b]`, each
/// carrying a `points`-point rule.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(a: f64, b: f64, panels: usize, points: usize) -> Self {
        let (x, w) = gauss_legendre(points);
        let mut nodes = Vec::with_capacity(panels * points);
        let mut weights = Vec::with_capacity(panels * points);
        if panels == 0 || b <= a {
            return PanelRule { nodes, weights };
        }
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let left = a + p as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(left + 0.5 * (xi + 1.0) * width);
                weights.push(0.5 * wi * width);
            }
        }
        PanelRule { nodes, weights }
    }

    /// The panels of a uniform grid on `[0, horizon]` that intersect `[0, t]`,
    /// with the last one clipped at `t`.
    pub fn clipped(horizon: f64, panels: usize, points: usize, t: f64) -> Self {
        if t <= 0.0 || panels == 0 {
            return PanelRule { nodes: vec![], weights: vec![] };
        }
        let width = horizon / panels as f64;
        let full = ((t / width) * (1.0 + 1e-14)).floor() as usize;
        let full = full.min(panels);
        let mut rule = PanelRule::new(0.0, full as f64 * width, full, points);
        let done = full as f64 * width;
        if t - done > 1e-14 * horizon.max(1.0) {
            let tail = PanelRule::new(done, t, 1, points);
            rule.nodes.extend(tail.nodes);
            rule.weights.extend(tail.weights);
        }
        rule
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_rule_matches_tabulated_values() {
        let (x, w) = gauss_legendre(4);
        assert!((x[3] - 0.861_136_311_594_052_6).abs() < 1e-15);
        assert!((x[2] - 0.339_981_043_584_856_3).abs() < 1e-15);
        assert!((w[3] - 0.347_854_845_137_453_9).abs() < 1e-15);
        assert!((w[2] - 0.652_145_154_862_546_1).abs() < 1e-15);
        assert!((x[0] + x[3]).abs() < 1e-16);
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = 2.0 / deg as f64;
            assert!((q - exact).abs() < 1e-13, "n={n}: {q} vs {exact}");
        }
    }

    #[test]
    fn clipped_rule_covers_partial_interval() {
        let rule = PanelRule::clipped(4.0, 8, 4, 1.3);
        let v = rule.integrate(|t| t * t);
        assert!((v - 1.3f64.powi(3) / 3.0).abs() < 1e-13);
        assert!(PanelRule::clipped(4.0, 8, 4, 0.0).is_empty());
        let full = PanelRule::clipped(4.0, 8, 4, 4.0);
        assert_eq!(full.len(), 32);
    }
}
