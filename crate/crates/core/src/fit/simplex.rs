//! Nelder-Mead downhill simplex minimizer.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Relative spread of objective values across the simplex at which a
    /// pass is considered converged.
    pub tol: f64,
    /// How many times a converged simplex is rebuilt around its best vertex
    /// before giving up on further improvement.
    pub max_rebuilds: usize,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` starting from `x0`, using `steps[i]` as the initial edge
/// length along coordinate `i`. Non-finite objective values are treated as
/// `+inf`, so the simplex walks away from them.
pub fn minimize<F>(mut f: F, x0: &[f64], steps: &[f64], opts: SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), steps.len());
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_v = eval(x0);
    let mut iterations = 0usize;
    let mut rebuilds = 0usize;

    'outer: loop {
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        let mut vals: Vec<f64> = Vec::with_capacity(dim + 1);
        pts.push(best_x.clone());
        vals.push(best_v);
        for i in 0..dim {
            let mut p = best_x.clone();
            p[i] += steps[i];
            vals.push(eval(&p));
            pts.push(p);
        }
        let start_v = best_v;

        loop {
            // order vertices best to worst; stable so ties keep insertion order
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let lo = vals[0];
            let hi = vals[dim];
            if lo < best_v {
                best_v = lo;
                best_x.clone_from(&pts[0]);
            }
            let spread = (hi - lo).abs();
            if spread <= opts.tol * (lo.abs() + opts.tol) || iterations >= opts.max_iter {
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for p in &pts[..dim] {
                for (c, v) in centroid.iter_mut().zip(p) {
                    *c += v / dim as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&pts[dim]).map(|(c, w)| c + t * (c - w)).collect()
            };

            let xr = along(REFLECT);
            let vr = eval(&xr);
            if vr < vals[0] {
                let xe = along(EXPAND);
                let ve = eval(&xe);
                if ve < vr {
                    pts[dim] = xe;
                    vals[dim] = ve;
                } else {
                    pts[dim] = xr;
                    vals[dim] = vr;
                }
                continue;
            }
            if vr < vals[dim - 1] {
                pts[dim] = xr;
                vals[dim] = vr;
                continue;
            }
            let (xc, vc) = if vr < vals[dim] {
                let xc = along(CONTRACT);
                let vc = eval(&xc);
                (xc, vc)
            } else {
                let xc = along(-CONTRACT);
                let vc = eval(&xc);
                (xc, vc)
            };
            if vc < vals[dim].min(vr) {
                pts[dim] = xc;
                vals[dim] = vc;
                continue;
            }
            let anchor = pts[0].clone();
            for i in 1..=dim {
                for (p, a) in pts[i].iter_mut().zip(&anchor) {
                    *p = a + SHRINK * (*p - a);
                }
                vals[i] = eval(&pts[i]);
            }
        }

        let improved = start_v - best_v > opts.tol * (best_v.abs() + opts.tol);
        if !improved || rebuilds >= opts.max_rebuilds || iterations >= opts.max_iter {
            break 'outer;
        }
        rebuilds += 1;
    }

    Minimum { x: best_x, value: best_v, iterations, evaluations }
}
