//! Backward-Euler diffusion solves along grid lines.
//!
//! Every solve is written with nonnegative multipliers only, so the map from
//! right-hand side (and Dirichlet data) to solution is monotone in floating
//! point, not just in exact arithmetic.

/// Factorization of `tridiag(-r, 1 + 2r, -r)` on the interior of a line of
/// `n` nodes with Dirichlet ends.
#[derive(Debug, Clone)]
pub(crate) struct DirichletLine {
    r: f64,
    /// `1 / m_i` for interior rows.
    inv_m: Vec<f64>,
    /// `r / m_{i-1}` elimination multipliers.
    mult: Vec<f64>,
}

impl DirichletLine {
    pub(crate) fn new(n: usize, r: f64) -> Self {
        let interior = n - 2;
        let mut inv_m = Vec::with_capacity(interior);
        let mut mult = Vec::with_capacity(interior);
        let mut m_prev = 0.0;
        for k in 0..interior {
            let m = if k == 0 {
                1.0 + 2.0 * r
            } else {
                1.0 + 2.0 * r - r * r / m_prev
            };
            mult.push(if k == 0 { 0.0 } else { r / m_prev });
            inv_m.push(1.0 / m);
            m_prev = m;
        }
        Self { r, inv_m, mult }
    }

    /// Solves in place: `x[0]` and `x[n-1]` are boundary values, interior
    /// entries hold the right-hand side on entry and the solution on exit.
    /// `x` is read with the given stride.
    pub(crate) fn solve_strided(&self, x: &mut [f64], offset: usize, stride: usize) {
        let n = self.inv_m.len() + 2;
        let at = |k: usize| offset + k * stride;
        let left = x[at(0)];
        let right = x[at(n - 1)];
        // forward: y_1 = rhs_1 + r x_0, y_k = rhs_k + (r/m_{k-1}) y_{k-1}
        x[at(1)] += self.r * left;
        for k in 2..n - 1 {
            let prev = x[at(k - 1)];
            x[at(k)] += self.mult[k - 1] * prev;
        }
        x[at(n - 2)] += self.r * right;
        // back substitution: x_k = (y_k + r x_{k+1}) / m_k
        let last = n - 2;
        x[at(last)] *= self.inv_m[last - 1];
        for k in (1..last).rev() {
            let next = x[at(k + 1)];
            x[at(k)] = (x[at(k)] + self.r * next) * self.inv_m[k - 1];
        }
    }

    pub(crate) fn solve(&self, x: &mut [f64]) {
        self.solve_strided(x, 0, 1);
    }

    /// Solves every interior column of a row-major `nx * ny` array at once;
    /// rows `0` and `ny - 1` are boundary data. Row-wise loops keep memory
    /// access contiguous.
    pub(crate) fn solve_columns(&self, x: &mut [f64], nx: usize) {
        let n = self.inv_m.len() + 2;
        let (r, last) = (self.r, n - 2);
        for i in 0..nx {
            x[nx + i] += r * x[i];
        }
        for k in 2..n - 1 {
            let m = self.mult[k - 1];
            let (prev, cur) = x.split_at_mut(k * nx);
            let prev = &prev[(k - 1) * nx..];
            for i in 0..nx {
                cur[i] += m * prev[i];
            }
        }
        {
            let (head, tail) = x.split_at_mut((n - 1) * nx);
            let row = &mut head[last * nx..];
            for i in 0..nx {
                row[i] += r * tail[i];
            }
        }
        let inv = self.inv_m[last - 1];
        for v in &mut x[last * nx..(last + 1) * nx] {
            *v *= inv;
        }
        for k in (1..last).rev() {
            let inv = self.inv_m[k - 1];
            let (head, tail) = x.split_at_mut((k + 1) * nx);
            let cur = &mut head[k * nx..];
            let next = &tail[..nx];
            for i in 0..nx {
                cur[i] = (cur[i] + r * next[i]) * inv;
            }
        }
    }
}

/// Backward-Euler solve on a line where `pinned` nodes keep their values and
/// act as Dirichlet data for their neighbours. Both line ends must be pinned.
pub(crate) fn solve_pinned(x: &mut [f64], pinned: &[bool], r: f64) {
    let n = x.len();
    debug_assert!(pinned[0] && pinned[n - 1]);
    let mut start = 1;
    while start < n - 1 {
        if pinned[start] {
            start += 1;
            continue;
        }
        let mut end = start;
        while !pinned[end + 1] {
            end += 1;
        }
        solve_segment(&mut x[start - 1..=end + 1], r);
        start = end + 2;
    }
}

fn solve_segment(x: &mut [f64], r: f64) {
    // x[0] and x[len-1] are pinned neighbours
    let len = x.len();
    let interior = len - 2;
    let mut inv_m = vec![0.0; interior];
    let mut m_prev = 0.0;
    for k in 0..interior {
        let m = if k == 0 {
            1.0 + 2.0 * r
        } else {
            1.0 + 2.0 * r - r * r / m_prev
        };
        if k > 0 {
            x[k + 1] += (r / m_prev) * x[k];
        } else {
            x[1] += r * x[0];
        }
        inv_m[k] = 1.0 / m;
        m_prev = m;
    }
    x[len - 2] += r * x[len - 1];
    x[len - 2] *= inv_m[interior - 1];
    for k in (1..len - 2).rev() {
        x[k] = (x[k] + r * x[k + 1]) * inv_m[k - 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(x: &[f64], rhs: &[f64], r: f64) -> f64 {
        (1..x.len() - 1)
            .map(|i| ((1.0 + 2.0 * r) * x[i] - r * x[i - 1] - r * x[i + 1] - rhs[i]).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn dirichlet_solve_satisfies_system() {
        let n = 40;
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 * 0.3 - 0.2).collect();
        for r in [0.01, 1.0, 250.0] {
            let mut x = rhs.clone();
            DirichletLine::new(n, r).solve(&mut x);
            assert_eq!(x[0], rhs[0]);
            assert_eq!(x[n - 1], rhs[n - 1]);
            assert!(residual(&x, &rhs, r) < 1e-11 * (1.0 + r));
            let mut y = rhs.clone();
            let pinned: Vec<bool> = (0..n).map(|i| i == 0 || i == n - 1).collect();
            solve_pinned(&mut y, &pinned, r);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn column_solve_matches_line_solve() {
        let (nx, ny) = (5, 9);
        let data: Vec<f64> = (0..nx * ny).map(|k| ((k * 13) % 7) as f64 - 3.0).collect();
        let line = DirichletLine::new(ny, 0.7);
        let mut cols = data.clone();
        line.solve_columns(&mut cols, nx);
        let mut strided = data.clone();
        for i in 0..nx {
            line.solve_strided(&mut strided, i, nx);
        }
        for (a, b) in cols.iter().zip(&strided) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pinned_interior_nodes_split_the_line() {
        let n = 12;
        let mut pinned = vec![false; n];
        pinned[0] = true;
        pinned[n - 1] = true;
        pinned[5] = true;
        pinned[6] = true;
        let rhs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut x = rhs.clone();
        solve_pinned(&mut x, &pinned, 2.0);
        assert_eq!(x[5], 5.0);
        assert_eq!(x[6], 6.0);
        for i in (1..5).chain(7..n - 1) {
            let lhs = 5.0 * x[i] - 2.0 * x[i - 1] - 2.0 * x[i + 1];
            assert!((lhs - rhs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_is_monotone_in_data() {
        let n = 30;
        let a: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.clone();
        for (i, v) in b.iter_mut().enumerate() {
            if i % 3 == 0 {
                *v = f64::from_bits(v.to_bits()).next_up();
            }
        }
        let line = DirichletLine::new(n, 3.0);
        let (mut xa, mut xb) = (a, b);
        line.solve(&mut xa);
        line.solve(&mut xb);
        assert!(xa.iter().zip(&xb).all(|(p, q)| p <= q));
    }
}
