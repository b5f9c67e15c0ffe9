//! Grid search with iterative refinement, used for the low-dimensional inner
//! optimizations over transformation parameters (eta, nu, beta).
//!
//! The objectives are concave in the transform parameters, so re-centering a
//! shrinking window on the incumbent converges; a final parabolic fit pushes
//! the accuracy well past the last grid spacing.

#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Lay the grid out in log space (requires lo > 0).
    pub log_scale: bool,
}

impl GridSpec {
    pub fn linear(lo: f64, hi: f64, points: usize) -> Self {
        GridSpec { lo, hi, points, log_scale: false }
    }

    pub fn logarithmic(lo: f64, hi: f64, points: usize) -> Self {
        GridSpec { lo, hi, points, log_scale: true }
    }

    fn to_internal(&self, x: f64) -> f64 {
        if self.log_scale {
            x.ln()
        } else {
            x
        }
    }

    fn from_internal(&self, t: f64) -> f64 {
        if self.log_scale {
            t.exp()
        } else {
            t
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GridMax {
    pub arg: f64,
    pub value: f64,
    /// The best point never moved off the original search boundary.
    pub on_boundary: bool,
}

/// Maximize `f` over the grid, refining `rounds` times. `f` may return
/// -inf / NaN for infeasible points; those are skipped.
pub fn grid_max_1d<F: Fn(f64) -> f64>(f: F, spec: GridSpec, rounds: usize) -> GridMax {
    let n = spec.points.max(3);
    let (mut lo, mut hi) = (spec.to_internal(spec.lo), spec.to_internal(spec.hi));
    let (orig_lo, orig_hi) = (lo, hi);
    let mut best_arg = f64::NAN;
    let mut best_val = f64::NEG_INFINITY;
    let mut vals = vec![f64::NEG_INFINITY; n];

    for _ in 0..=rounds {
        let step = (hi - lo) / (n - 1) as f64;
        let mut best_i = usize::MAX;
        for (i, slot) in vals.iter_mut().enumerate() {
            let t = lo + step * i as f64;
            let v = f(spec.from_internal(t));
            *slot = v;
            if v.is_finite() && v > best_val {
                best_val = v;
                best_arg = t;
                best_i = i;
            } else if best_i == usize::MAX && v.is_finite() {
                best_i = i;
            }
        }
        if best_arg.is_nan() {
            // everything infeasible: report the midpoint with -inf
            return GridMax {
                arg: spec.from_internal(0.5 * (lo + hi)),
                value: f64::NEG_INFINITY,
                on_boundary: false,
            };
        }
        // parabolic polish when the incumbent is interior with finite neighbors
        if best_i != usize::MAX && best_i > 0 && best_i + 1 < n {
            let (vl, vc, vr) = (vals[best_i - 1], vals[best_i], vals[best_i + 1]);
            if vl.is_finite() && vr.is_finite() && vc >= vl && vc >= vr {
                let denom = vl - 2.0 * vc + vr;
                if denom < 0.0 {
                    let t = best_arg + 0.5 * step * (vl - vr) / denom;
                    let v = f(spec.from_internal(t));
                    if v.is_finite() && v > best_val {
                        best_val = v;
                        best_arg = t;
                    }
                }
            }
        }
        // shrink onto the incumbent, clipped to the original window
        let width = (hi - lo) / 3.0;
        lo = (best_arg - 0.5 * width).max(orig_lo);
        hi = (best_arg + 0.5 * width).min(orig_hi);
    }

    let edge = 1e-9 * (orig_hi - orig_lo);
    GridMax {
        arg: spec.from_internal(best_arg),
        value: best_val,
        on_boundary: (best_arg - orig_lo).abs() < edge || (best_arg - orig_hi).abs() < edge,
    }
}

/// Joint maximization over two parameters by grid refinement.
pub fn grid_max_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    spec_a: GridSpec,
    spec_b: GridSpec,
    rounds: usize,
) -> (f64, f64, f64) {
    let (na, nb) = (spec_a.points.max(3), spec_b.points.max(3));
    let (mut alo, mut ahi) = (spec_a.to_internal(spec_a.lo), spec_a.to_internal(spec_a.hi));
    let (mut blo, mut bhi) = (spec_b.to_internal(spec_b.lo), spec_b.to_internal(spec_b.hi));
    let (oalo, oahi, oblo, obhi) = (alo, ahi, blo, bhi);
    let mut best = (f64::NAN, f64::NAN, f64::NEG_INFINITY);

    for _ in 0..=rounds {
        let astep = (ahi - alo) / (na - 1) as f64;
        let bstep = (bhi - blo) / (nb - 1) as f64;
        for i in 0..na {
            let ta = alo + astep * i as f64;
            let a = spec_a.from_internal(ta);
            for j in 0..nb {
                let tb = blo + bstep * j as f64;
                let v = f(a, spec_b.from_internal(tb));
                if v.is_finite() && v > best.2 {
                    best = (ta, tb, v);
                }
            }
        }
        if best.0.is_nan() {
            return (
                spec_a.from_internal(0.5 * (alo + ahi)),
                spec_b.from_internal(0.5 * (blo + bhi)),
                f64::NEG_INFINITY,
            );
        }
        let awidth = (ahi - alo) / 3.0;
        let bwidth = (bhi - blo) / 3.0;
        alo = (best.0 - 0.5 * awidth).max(oalo);
        ahi = (best.0 + 0.5 * awidth).min(oahi);
        blo = (best.1 - 0.5 * bwidth).max(oblo);
        bhi = (best.1 + 0.5 * bwidth).min(obhi);
    }
    (spec_a.from_internal(best.0), spec_b.from_internal(best.1), best.2)
}
