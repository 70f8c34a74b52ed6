//! Budgeted gradient-free minimisation: a midpoint grid over `[0, pi]^d`
//! followed by Nelder-Mead from the best grid point.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Largest `g >= 1` with `g^dims <= max(1, budget / 2)`.
pub fn grid_points_per_axis(dims: usize, budget: usize) -> usize {
    let grid_budget = (budget / 2).max(1);
    let mut g = 1usize;
    while (g + 1).checked_pow(dims as u32).is_some_and(|n| n <= grid_budget) {
        g += 1;
    }
    g
}

struct Budgeted<'f> {
    f: &'f mut dyn FnMut(&[f64]) -> f64,
    used: usize,
    budget: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl Budgeted<'_> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        let v = (self.f)(x);
        let better = match &self.best {
            Some((_, b)) => v < *b,
            None => true,
        };
        if better {
            self.best = Some((x.to_vec(), v));
        }
        Some(v)
    }
}

/// Minimises `f` over `dims` parameters using at most `budget` evaluations.
///
/// The origin is evaluated first, then the grid, then Nelder-Mead. The
/// returned value is the best seen, so it never exceeds `f(0)`.
pub fn minimize(dims: usize, budget: usize, f: &mut dyn FnMut(&[f64]) -> f64) -> Minimum {
    assert!(dims > 0 && budget > 0);
    let mut b = Budgeted {
        f,
        used: 0,
        budget,
        best: None,
    };
    b.eval(&vec![0.0; dims]);

    let g = grid_points_per_axis(dims, budget.saturating_sub(1));
    let step = PI / g as f64;
    let mut idx = vec![0usize; dims];
    'grid: loop {
        let x: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * step).collect();
        if b.eval(&x).is_none() {
            break;
        }
        let mut d = 0;
        while d < dims && idx[d] + 1 == g {
            idx[d] = 0;
            d += 1;
        }
        if d == dims {
            break 'grid;
        }
        idx[d] += 1;
    }

    let start = b.best.clone().expect("at least one evaluation").0;
    nelder_mead(&mut b, start, step / 2.0);

    let (point, value) = b.best.expect("at least one evaluation");
    Minimum {
        point,
        value,
        evaluations: b.used,
    }
}

fn nelder_mead(b: &mut Budgeted<'_>, start: Vec<f64>, scale: f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let Some(f0) = b.eval(&start) else { return };
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut x = start.clone();
        x[i] += scale;
        let Some(fx) = b.eval(&x) else { return };
        simplex.push((x, fx));
    }

    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };

    loop {
        simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < 1e-12 {
            return;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        // reflect: c + (c - w)
        let xr = combine(&centroid, &worst.0, -1.0);
        let Some(fr) = b.eval(&xr) else { return };
        if fr < simplex[0].1 {
            let xe = combine(&centroid, &worst.0, -2.0);
            let Some(fe) = b.eval(&xe) else { return };
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, outside) = if fr < worst.1 {
                (combine(&centroid, &xr, 0.5), true)
            } else {
                (combine(&centroid, &worst.0, 0.5), false)
            };
            let Some(fc) = b.eval(&xc) else { return };
            let accept = if outside { fc <= fr } else { fc < worst.1 };
            if accept {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &p.0, 0.5);
                    let Some(fx) = b.eval(&x) else { return };
                    *p = (x, fx);
                }
            }
        }
    }
}
