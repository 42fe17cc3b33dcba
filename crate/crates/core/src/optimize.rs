//! Derivative-free local search and the multi-start driver used by the
//! power functionals.

use rayon::prelude::*;

/// Stopping rules for one local search.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalOptions {
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x0` with Nelder–Mead (dimension-adaptive
/// coefficients). A converged simplex is rebuilt around its best vertex and
/// the search continues until a restart no longer improves the value by
/// more than `value_tol` or the iteration budget runs out.
///
/// The returned value never exceeds `f(x0)`.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, opts: LocalOptions) -> LocalResult {
    let n = x0.len();
    let f0 = finite_or_inf(f(x0));
    if n == 0 {
        return LocalResult { x: Vec::new(), value: f0, iters: 0, converged: true };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) =
        if n >= 2 { (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf) } else { (1.0, 2.0, 0.5, 0.5) };

    let mut best_x = x0.to_vec();
    let mut best_f = f0;
    let mut iters = 0;
    let mut converged = false;

    while iters < opts.max_iters {
        let start_f = best_f;
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] += step;
            let fv = finite_or_inf(f(&v));
            simplex.push((v, fv));
        }

        let mut run_converged = false;
        while iters < opts.max_iters {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let diameter = simplex[1..]
                .iter()
                .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread <= opts.value_tol && diameter <= opts.step_tol {
                run_converged = true;
                break;
            }
            iters += 1;

            let mut centroid = vec![0.0; n];
            for (v, _) in &simplex[..n] {
                centroid.iter_mut().zip(v).for_each(|(c, x)| *c += x / nf);
            }
            let worst = simplex[n].0.clone();
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect() };

            let xr = along(alpha);
            let fr = finite_or_inf(f(&xr));
            if fr < simplex[0].1 {
                let xe = along(alpha * gamma);
                let fe = finite_or_inf(f(&xe));
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(alpha * rho);
                let fc = finite_or_inf(f(&xc));
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = finite_or_inf(f(&xc));
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for (v, fv) in simplex.iter_mut().skip(1) {
                v.iter_mut().zip(&anchor).for_each(|(x, a)| *x = a + sigma * (*x - a));
                *fv = finite_or_inf(f(v));
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best_f {
            best_f = simplex[0].1;
            best_x = simplex[0].0.clone();
        }
        if !run_converged {
            break;
        }
        if start_f - best_f <= opts.value_tol {
            converged = true;
            break;
        }
    }
    LocalResult { x: best_x, value: best_f, iters, converged }
}

/// Outcome of a multi-start maximization.
#[derive(Debug, Clone)]
pub(crate) struct MultiStart {
    pub best_index: usize,
    pub best: LocalResult,
}

/// Maximizes `f` from every start (each with its own initial step).
///
/// Starts run independently and are combined in index order: the winner
/// is the lowest-index start whose value is within `value_tol` of the
/// overall maximum, so the result does not depend on scheduling.
pub(crate) fn maximize_multistart<F>(f: &F, starts: &[(Vec<f64>, f64)], opts: LocalOptions) -> MultiStart
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(!starts.is_empty(), "at least one start required");
    let neg = |x: &[f64]| -f(x);
    let results: Vec<LocalResult> = starts
        .par_iter()
        .map(|(x0, step)| {
            let mut r = nelder_mead(&neg, x0, *step, opts);
            r.value = -r.value;
            r
        })
        .collect();
    let top = results.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let best_index = results.iter().position(|r| r.value >= top - opts.value_tol).unwrap_or(0);
    MultiStart { best_index, best: results[best_index].clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OPTS: LocalOptions = LocalOptions { max_iters: 5000, step_tol: 1e-10, value_tol: 1e-14 };

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(&f, &[-1.2, 1.0], 0.5, OPTS);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn minimizes_a_kink() {
        let f = |x: &[f64]| (x[0] - 0.3).abs() + 2.0 * (x[1] + 0.7).abs() + (x[2] - x[0]).abs();
        let r = nelder_mead(&f, &[0.0, 0.0, 0.0], 0.4, OPTS);
        assert!(r.value < 1e-8, "{}", r.value);
    }

    #[test]
    fn never_worse_than_the_start() {
        let f = |x: &[f64]| (x[0] * 3.0).sin() + x[0] * x[0] * 0.1;
        for x0 in [-2.0, -0.5, 0.0, 1.3, 4.0] {
            let r = nelder_mead(&f, &[x0], 0.7, OPTS);
            assert!(r.value <= f(&[x0]));
        }
    }

    #[test]
    fn multistart_picks_the_global_peak() {
        let f = |x: &[f64]| (-(x[0] - 2.0).powi(2)).exp() + 0.5 * (-(x[0] + 2.0).powi(2)).exp();
        let starts = vec![(vec![-2.5], 0.3), (vec![2.4], 0.3), (vec![-1.5], 0.3)];
        let m = maximize_multistart(&f, &starts, OPTS);
        assert_eq!(m.best_index, 1);
        assert!((m.best.x[0] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let f = |x: &[f64]| -(x[0] * x[0] - 1.0).powi(2);
        let starts = vec![(vec![-0.8], 0.1), (vec![0.9], 0.1)];
        assert_eq!(maximize_multistart(&f, &starts, LocalOptions { value_tol: 1e-9, ..OPTS }).best_index, 0);
    }
}
