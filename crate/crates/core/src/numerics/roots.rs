//! Grid-scanned, bracket-refined real root finding.

use crate::error::{Error, Result};
use crate::scalar::{count, lit, to_f64, Real};

/// All roots found on an interval, each with the bracket it was refined in.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet<T> {
    pub roots: Vec<T>,
    pub brackets: Vec<(T, T)>,
}

impl<T: Real> RootSet<T> {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Default scan resolution for [`find_all_roots`].
pub const DEFAULT_GRID_POINTS: usize = 512;

fn checked<T: Real, F: FnMut(T) -> Result<T>>(f: &mut F, x: T) -> Result<T> {
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: to_f64(x) })
    }
}

/// Refines a sign-change bracket `[lo, hi]` (with `f_lo·f_hi < 0`) to a point
/// where `|f| ≤ tol` or the bracket has collapsed to machine resolution.
///
/// Illinois-modified false position; whenever two consecutive steps fail to
/// halve the bracket the next step is a bisection, so convergence is never
/// slower than plain bisection.
pub fn refine_bracket<T, F>(mut f: F, lo: T, hi: T, f_lo: T, f_hi: T, tol: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, f_lo, f_hi);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::bracket(
            "refine_bracket",
            format!("no sign change on [{}, {}]", to_f64(lo), to_f64(hi)),
        ));
    }
    let half: T = lit(0.5);
    let mut retained = 0i8;
    let mut reference_width = (b - a).abs();
    let mut steps_since_check = 0;
    let mut bisect = false;
    for _ in 0..1000 {
        let width = (b - a).abs();
        let resolution = T::epsilon() * lit(4.0) * a.abs().max(b.abs()) + T::min_positive_value();
        if width <= resolution {
            break;
        }
        let mid = a + (b - a) * half;
        let x = if bisect {
            mid
        } else {
            let fp = (a * fb - b * fa) / (fb - fa);
            if fp > a.min(b) && fp < a.max(b) {
                fp
            } else {
                mid
            }
        };
        let fx = checked(&mut f, x)?;
        if fx.abs() <= tol || fx == T::zero() {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if retained == 1 {
                fb = fb * half;
            }
            retained = 1;
        } else {
            b = x;
            fb = fx;
            if retained == -1 {
                fa = fa * half;
            }
            retained = -1;
        }
        steps_since_check += 1;
        if steps_since_check == 2 {
            let w = (b - a).abs();
            bisect = w > reference_width * half;
            reference_width = w;
            steps_since_check = 0;
        } else {
            bisect = false;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Scans `grid_points` equally spaced nodes of `[lo, hi]` for sign changes
/// and refines every bracket with [`refine_bracket`].
///
/// Exact zeros on nodes are reported once. Roots are returned in increasing
/// order.
pub fn find_all_roots<T, F>(mut f: F, lo: T, hi: T, grid_points: usize, tol: T) -> Result<RootSet<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if !(lo < hi) {
        return Err(Error::domain(
            "find_all_roots",
            format!("need lo < hi, got [{}, {}]", to_f64(lo), to_f64(hi)),
        ));
    }
    if grid_points < 2 {
        return Err(Error::domain("find_all_roots", "grid_points must be at least 2"));
    }
    let step = (hi - lo) / count::<T>(grid_points - 1);
    let node = |k: usize| if k + 1 == grid_points { hi } else { lo + step * count::<T>(k) };

    let mut values = Vec::with_capacity(grid_points);
    for k in 0..grid_points {
        values.push(checked(&mut f, node(k))?);
    }

    let mut out = RootSet {
        roots: Vec::new(),
        brackets: Vec::new(),
    };
    for k in 0..grid_points {
        let (x0, f0) = (node(k), values[k]);
        if f0 == T::zero() {
            out.roots.push(x0);
            out.brackets.push((x0, x0));
            continue;
        }
        if k + 1 < grid_points {
            let (x1, f1) = (node(k + 1), values[k + 1]);
            if f1 != T::zero() && f0.signum() != f1.signum() {
                let r = refine_bracket(&mut f, x0, x1, f0, f1, tol)?;
                out.roots.push(r);
                out.brackets.push((x0, x1));
            }
        }
    }
    Ok(out)
}

/// Golden-section minimisation of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_minimize<T, F>(mut f: F, lo: T, hi: T, x_tol: T) -> Result<(T, T)>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let inv_phi: T = lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = checked(&mut f, c)?;
    let mut fd = checked(&mut f, d)?;
    for _ in 0..300 {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = checked(&mut f, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = checked(&mut f, d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}
