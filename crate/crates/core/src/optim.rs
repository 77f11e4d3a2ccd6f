//! Derivative-free Nelder-Mead simplex minimization.

#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_iters: usize,
    /// Stop when the spread of objective values over the simplex drops below
    /// this absolute tolerance.
    pub f_tol: f64,
    /// Stop when the simplex diameter drops below this tolerance.
    pub x_tol: f64,
    /// Restarts from the current best point with a fresh simplex.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { max_iters: 20_000, f_tol: 1e-15, x_tol: 1e-12, restarts: 4 }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iters: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    /// Minimizes `f` starting at `x0` with initial simplex edge lengths
    /// `step` (one per coordinate).
    pub fn minimize<F>(&self, f: F, x0: &[f64], step: &[f64]) -> Minimum
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut best = self.run(&f, x0, step, self.max_iters);
        for _ in 0..self.restarts {
            // Restart with a smaller simplex around the incumbent; stop when
            // a restart no longer improves it.
            let scale: Vec<f64> = step
                .iter()
                .zip(&best.x)
                .map(|(s, x)| (0.05 * x.abs()).max(s * 1e-3))
                .collect();
            let next = self.run(&f, &best.x, &scale, self.max_iters);
            let iters = best.iters + next.iters;
            let improved = next.f < best.f - self.f_tol.max(1e-14 * best.f.abs());
            if next.f <= best.f {
                best = Minimum { iters, ..next };
            } else {
                best.iters = iters;
            }
            if !improved {
                break;
            }
        }
        best
    }

    fn run<F>(&self, f: &F, x0: &[f64], step: &[f64], budget: usize) -> Minimum
    where
        F: Fn(&[f64]) -> f64,
    {
        let n = x0.len();
        let eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += if step[i] != 0.0 { step[i] } else { 1e-3 };
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

        let mut iters = 0;
        let mut converged = false;
        while iters < budget {
            iters += 1;
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diameter = simplex[1..]
                .iter()
                .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread.abs() <= self.f_tol || diameter <= self.x_tol {
                converged = true;
                break;
            }

            let centroid: Vec<f64> =
                (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| -> Vec<f64> {
                (0..n).map(|k| centroid[k] + t * (centroid[k] - simplex[n][k])).collect()
            };

            let xr = along(REFLECT);
            let fr = eval(&xr);
            if fr < values[0] {
                let xe = along(REFLECT * EXPAND);
                let fe = eval(&xe);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = along(REFLECT * CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            for i in 1..=n {
                for k in 0..n {
                    simplex[i][k] = simplex[0][k] + SHRINK * (simplex[i][k] - simplex[0][k]);
                }
                values[i] = eval(&simplex[i]);
            }
        }
        let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        Minimum { x: simplex[best].clone(), f: values[best], iters, converged }
    }
}
