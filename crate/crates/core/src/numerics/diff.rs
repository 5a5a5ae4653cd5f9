//! Central finite differences with one Richardson extrapolation step.
//!
//! Each stencil has an even error expansion in `h`, so combining step `h`
//! and `h/2` as `(4·D(h/2) − D(h))/3` cancels the leading `h²` term.

use crate::error::Result;
use crate::scalar::{lit, Real};

fn richardson<T: Real>(coarse: T, fine: T) -> T {
    (lit::<T>(4.0) * fine - coarse) / lit(3.0)
}

/// `f′(x)` from the three-point stencil.
pub fn central_first<T, F>(mut f: F, x: T, h: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let mut stencil = |h: T| -> Result<T> { Ok((f(x + h)? - f(x - h)?) / (h + h)) };
    let coarse = stencil(h)?;
    let fine = stencil(h * lit(0.5))?;
    Ok(richardson(coarse, fine))
}

/// `f″(x)` from the three-point stencil.
pub fn central_second<T, F>(mut f: F, x: T, h: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let f0 = f(x)?;
    let mut stencil = |h: T| -> Result<T> { Ok((f(x + h)? - f0 - f0 + f(x - h)?) / (h * h)) };
    let coarse = stencil(h)?;
    let fine = stencil(h * lit(0.5))?;
    Ok(richardson(coarse, fine))
}

/// `f‴(x)` from the five-point antisymmetric stencil.
pub fn central_third<T, F>(mut f: F, x: T, h: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let two: T = lit(2.0);
    let mut stencil = |h: T| -> Result<T> {
        let num = f(x + two * h)? - two * f(x + h)? + two * f(x - h)? - f(x - two * h)?;
        Ok(num / (two * h * h * h))
    };
    let coarse = stencil(h)?;
    let fine = stencil(h * lit(0.5))?;
    Ok(richardson(coarse, fine))
}
