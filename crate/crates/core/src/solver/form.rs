use crate::instance::MilpInstance;

use super::simplex::Lp;

/// Scaled computational form of an instance.
///
/// Structural `j` is scaled as `x = col[j] * x'` and row `i` as
/// `r' = row[i] * r`; costs are divided by `obj`. All factors are powers
/// of two so scaling itself is exact.
pub(crate) struct Form {
    pub lp: Lp,
    pub col: Vec<f64>,
    pub row: Vec<f64>,
    /// Unscaled rows (coefficients, lower, upper) after dropping empty rows.
    rows: Vec<(Vec<(usize, f64)>, f64, f64)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
}

fn pow2(v: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        2f64.powi(v.log2().round() as i32)
    } else {
        1.0
    }
}

impl Form {
    /// `None` when an empty row cannot be satisfied.
    pub fn new(instance: &MilpInstance) -> Option<Self> {
        let n = instance.num_vars();
        let mut rows = Vec::new();
        for r in &instance.rows {
            let (lo, hi) = r.limits();
            if r.coeffs.is_empty() {
                if lo > 1e-9 || hi < -1e-9 {
                    return None;
                }
                continue;
            }
            rows.push((r.coeffs.clone(), lo, hi));
        }
        let m = rows.len();
        let vars = instance.registry.vars();
        let lower: Vec<f64> = vars.iter().map(|v| v.lower).collect();
        let upper: Vec<f64> = vars.iter().map(|v| v.upper).collect();
        let cost: Vec<f64> = vars.iter().map(|v| v.cost).collect();

        let mut col = vec![1.0; n];
        let mut row = vec![1.0; m];
        for _ in 0..4 {
            for (i, (coeffs, _, _)) in rows.iter().enumerate() {
                let (mut big, mut small) = (0.0f64, f64::INFINITY);
                for &(j, a) in coeffs {
                    let v = (a * col[j]).abs();
                    big = big.max(v);
                    small = small.min(v);
                }
                row[i] = pow2(1.0 / (big * small).sqrt());
            }
            let mut big = vec![0.0f64; n];
            let mut small = vec![f64::INFINITY; n];
            for (i, (coeffs, _, _)) in rows.iter().enumerate() {
                for &(j, a) in coeffs {
                    let v = (a * row[i]).abs();
                    big[j] = big[j].max(v);
                    small[j] = small[j].min(v);
                }
            }
            for j in 0..n {
                if big[j] > 0.0 {
                    col[j] = pow2(1.0 / (big[j] * small[j]).sqrt());
                }
            }
        }
        let obj = pow2(cost.iter().zip(&col).map(|(c, s)| (c * s).abs()).fold(0.0, f64::max));
        let lp = Self::assemble(&rows, &lower, &upper, &cost, &col, &row, obj);
        Some(Form { lp, col, row, rows, lower, upper, cost })
    }

    fn assemble(
        rows: &[(Vec<(usize, f64)>, f64, f64)],
        lower: &[f64],
        upper: &[f64],
        cost: &[f64],
        col: &[f64],
        row: &[f64],
        obj: f64,
    ) -> Lp {
        let n = lower.len();
        let m = rows.len();
        let mut cols = vec![Vec::new(); n];
        let mut srows = Vec::with_capacity(m);
        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        let mut c = Vec::with_capacity(n + m);
        for (i, (coeffs, _, _)) in rows.iter().enumerate() {
            let r: Vec<(usize, f64)> = coeffs.iter().map(|&(j, a)| (j, a * row[i] * col[j])).collect();
            for &(j, a) in &r {
                cols[j].push((i, a));
            }
            srows.push(r);
        }
        for j in 0..n {
            lo.push(lower[j] / col[j]);
            hi.push(upper[j] / col[j]);
            c.push(cost[j] * col[j] / obj);
        }
        for (i, (_, rl, rh)) in rows.iter().enumerate() {
            lo.push(rl * row[i]);
            hi.push(rh * row[i]);
            c.push(0.0);
        }
        Lp { n, m, cols, rows: srows, cost: c, lo, hi }
    }

    /// The same problem without scaling, sharing variable numbering.
    pub fn unscaled_lp(&self) -> Lp {
        let ones_n = vec![1.0; self.lower.len()];
        let ones_m = vec![1.0; self.rows.len()];
        Self::assemble(&self.rows, &self.lower, &self.upper, &self.cost, &ones_n, &ones_m, 1.0)
    }

    pub fn unscale(&self, xs: &[f64]) -> Vec<f64> {
        (0..self.lp.n).map(|j| xs[j] * self.col[j]).collect()
    }

    /// Scaled bounds back to original units, logicals included.
    pub fn unscale_bounds(&self, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.lp.n;
        let f = |j: usize| if j < n { self.col[j] } else { 1.0 / self.row[j - n] };
        let lo = lo.iter().enumerate().map(|(j, v)| v * f(j)).collect();
        let hi = hi.iter().enumerate().map(|(j, v)| v * f(j)).collect();
        (lo, hi)
    }

    /// Original-unit bound on structural `j` expressed in scaled units.
    pub fn scale_bound(&self, j: usize, v: f64) -> f64 {
        v / self.col[j]
    }

    /// Largest row or bound violation of an original-unit point.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (coeffs, lo, hi) in &self.rows {
            let a: f64 = coeffs.iter().map(|&(j, c)| c * x[j]).sum();
            worst = worst.max(lo - a).max(a - hi);
        }
        for j in 0..x.len() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        worst
    }

    /// Snap values within rounding of a bound onto it.
    pub fn clamp(&self, mut x: Vec<f64>) -> Vec<f64> {
        for j in 0..x.len() {
            x[j] = x[j].clamp(self.lower[j], self.upper[j]);
        }
        x
    }
}
