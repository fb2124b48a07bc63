//! Bounded-memory quasi-Newton minimization with central finite-difference
//! gradients.
//!
//! Two-loop L-BFGS recursion over a short curvature history and a weak Wolfe
//! line search (bracketing with expansion). The curvature condition keeps
//! every stored pair positive, so the inverse-Hessian estimate stays well
//! defined even along narrow valleys.

/// Knobs for [`minimize`].
#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Central-difference step.
    pub gradient_step: f64,
    /// Stop when the objective improves by less than this between iterations.
    pub tolerance: f64,
    /// Curvature pairs kept.
    pub memory: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            gradient_step: 1e-5,
            tolerance: 1e-9,
            memory: 8,
        }
    }
}

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub value: f64,
    pub point: Vec<f64>,
    pub iterations: usize,
    /// Best value seen after each iteration; non-increasing.
    pub best_trace: Vec<f64>,
    pub converged: bool,
    /// Set when the objective returned a non-finite value where a finite one
    /// was required.
    pub aborted: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &mut [f64], h: f64) -> Option<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let xi = x[i];
        x[i] = xi + h;
        let up = f(x);
        x[i] = xi - h;
        let down = f(x);
        x[i] = xi;
        if !up.is_finite() || !down.is_finite() {
            return None;
        }
        g[i] = (up - down) / (2.0 * h);
    }
    Some(g)
}

struct LineSearchResult {
    point: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
}

/// Weak Wolfe search along `direction` from `x`: Armijo bisects down,
/// a failed curvature condition expands up. Returns `Ok(None)` when no
/// improving step exists and `Err(())` when the objective turned non-finite
/// everywhere useful.
#[allow(clippy::too_many_arguments)]
fn wolfe_search(
    f: &mut impl FnMut(&[f64]) -> f64,
    x: &[f64],
    fx: f64,
    direction: &[f64],
    slope: f64,
    first_step: f64,
    grad_step: f64,
) -> Result<Option<LineSearchResult>, ()> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    let mut low = 0.0f64;
    let mut high: Option<f64> = None;
    let mut t = first_step;
    let mut fallback: Option<LineSearchResult> = None;
    for _ in 0..40 {
        let mut candidate: Vec<f64> = x
            .iter()
            .zip(direction)
            .map(|(xi, di)| xi + t * di)
            .collect();
        let fc = f(&candidate);
        if !fc.is_finite() || fc > fx + C1 * t * slope {
            high = Some(t);
        } else {
            let Some(gc) = gradient(f, &mut candidate, grad_step) else {
                return Err(());
            };
            let candidate_slope = dot(&gc, direction);
            let result = LineSearchResult {
                point: candidate,
                value: fc,
                gradient: gc,
            };
            if candidate_slope >= C2 * slope {
                return Ok(Some(result));
            }
            // Sufficient decrease but the slope is still steep: go further.
            fallback = Some(result);
            low = t;
        }
        t = match high {
            Some(h) => 0.5 * (low + h),
            None => 2.0 * t,
        };
        if t < 1e-18 || high.is_some_and(|h| (h - low) < 1e-18 * (1.0 + low)) {
            break;
        }
    }
    Ok(fallback)
}

/// Minimize `f` from `x0`.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    options: MinimizeOptions,
) -> MinimizeOutcome {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut trace = Vec::with_capacity(options.max_iterations);
    if !fx.is_finite() {
        return MinimizeOutcome {
            value: f64::INFINITY,
            point: x,
            iterations: 0,
            best_trace: trace,
            converged: false,
            aborted: true,
        };
    }
    let Some(mut grad) = gradient(&mut f, &mut x, options.gradient_step) else {
        return MinimizeOutcome {
            value: fx,
            point: x,
            iterations: 0,
            best_trace: trace,
            converged: false,
            aborted: true,
        };
    };

    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new(); // (s, y, 1/s.y)
    let mut converged = false;
    let mut aborted = false;
    let mut iterations = 0;

    for _ in 0..options.max_iterations {
        iterations += 1;
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < 1e-10 {
            converged = true;
            trace.push(fx);
            break;
        }

        // Two-loop recursion, seeded with the negated gradient.
        let mut direction: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let alpha = rho * dot(s, &direction);
            for (d, yi) in direction.iter_mut().zip(y) {
                *d -= alpha * yi;
            }
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = history.last() {
            let scale = dot(s, y) / dot(y, y).max(1e-300);
            for d in &mut direction {
                *d *= scale;
            }
        }
        for ((s, y, rho), alpha) in history.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(y, &direction);
            for (d, si) in direction.iter_mut().zip(s) {
                *d += (alpha - beta) * si;
            }
        }

        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            history.clear();
            direction = grad.iter().map(|g| -g).collect();
            slope = -dot(&grad, &grad);
        }
        let first_step = if history.is_empty() {
            (1.0 / (1.0 + gnorm)).min(1.0)
        } else {
            1.0
        };

        let searched = match wolfe_search(
            &mut f,
            &x,
            fx,
            &direction,
            slope,
            first_step,
            options.gradient_step,
        ) {
            Ok(s) => s,
            Err(()) => {
                aborted = true;
                trace.push(fx);
                break;
            }
        };
        let Some(found) = searched else {
            // No improving step along the search direction.
            converged = true;
            trace.push(fx);
            break;
        };

        let s: Vec<f64> = found.point.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = found.gradient.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            history.push((s, y, 1.0 / sy));
            if history.len() > options.memory {
                history.remove(0);
            }
        }

        let improvement = fx - found.value;
        x = found.point;
        fx = found.value;
        grad = found.gradient;
        trace.push(fx);
        if improvement.abs() < options.tolerance {
            converged = true;
            break;
        }
    }

    // Make the trace a best-so-far sequence.
    let mut best = f64::INFINITY;
    for t in &mut trace {
        best = best.min(*t);
        *t = best;
    }
    MinimizeOutcome {
        value: fx,
        point: x,
        iterations,
        best_trace: trace,
        converged,
        aborted,
    }
}
