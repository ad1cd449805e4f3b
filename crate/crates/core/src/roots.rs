//! Derivative-free scalar bracketing: bisection and golden-section search.

const MAX_ITER: usize = 200;

/// Bisection on `[lo, hi]` where `f(lo) <= 0 <= f(hi)`.
///
/// Runs until the bracket stops shrinking in floating point or `f` hits
/// zero exactly, and returns whichever end has the smaller `|f|`.
pub fn bisect<E, F>(mut f: F, mut lo: f64, mut hi: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    debug_assert!(
        f_lo <= 0.0 && f_hi >= 0.0,
        "bracket does not straddle a root"
    );
    for _ in 0..MAX_ITER {
        if f_lo == 0.0 || f_hi == 0.0 {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        Ok((lo, f_lo))
    } else {
        Ok((hi, f_hi))
    }
}

/// Golden-section minimisation of a unimodal `f` on `[a, b]`.
pub fn golden_section_min<E, F>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    x_tol: f64,
) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..MAX_ITER {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}
