//! Bracketing root finders shared by event location and survival-time solving.

/// Final bracket of a bisection: `f(inside)` keeps the sign the search
/// started with, `f(crossed)` has reached or passed zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub inside: f64,
    pub crossed: f64,
    pub f_inside: f64,
    pub f_crossed: f64,
    pub iterations: usize,
}

impl Bracket {
    /// The endpoint with the smaller residual.
    pub fn best(&self) -> (f64, f64) {
        if self.f_crossed.abs() <= self.f_inside.abs() {
            (self.crossed, self.f_crossed)
        } else {
            (self.inside, self.f_inside)
        }
    }
}

pub const MAX_BISECTIONS: usize = 200;

/// Bisect `f` on `[inside, crossed]` (either order) where `f(inside)` is
/// non-zero and `f(crossed)` is zero or of the opposite sign. Stops when the
/// bracket is narrower than `x_tol`, the midpoint is no longer representable
/// between the endpoints, or after [`MAX_BISECTIONS`] halvings.
pub fn bisect(f: impl Fn(f64) -> f64, inside: f64, crossed: f64, x_tol: f64) -> Bracket {
    let mut b = Bracket {
        inside,
        crossed,
        f_inside: f(inside),
        f_crossed: f(crossed),
        iterations: 0,
    };
    debug_assert!(b.f_inside != 0.0);
    let positive = b.f_inside > 0.0;
    while b.iterations < MAX_BISECTIONS && (b.crossed - b.inside).abs() > x_tol {
        let mid = 0.5 * (b.inside + b.crossed);
        if mid == b.inside || mid == b.crossed {
            break;
        }
        b.iterations += 1;
        let fm = f(mid);
        if fm == 0.0 || (fm > 0.0) != positive {
            b.crossed = mid;
            b.f_crossed = fm;
            if fm == 0.0 {
                break;
            }
        } else {
            b.inside = mid;
            b.f_inside = fm;
        }
    }
    b
}

/// Double the upper end of `[lo, lo + width]` until `crossed(hi)` holds or
/// `hi` would exceed `cap`. Returns the last two probe points.
pub fn expand_bracket(
    crossed: impl Fn(f64) -> bool,
    lo: f64,
    width: f64,
    cap: f64,
) -> Option<(f64, f64)> {
    let mut prev = lo;
    let mut hi = lo + width;
    loop {
        if crossed(hi) {
            return Some((prev, hi));
        }
        if hi >= cap {
            return None;
        }
        prev = hi;
        hi = (lo + 2.0 * (hi - lo)).min(cap);
    }
}
