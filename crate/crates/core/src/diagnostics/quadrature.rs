use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;
const PANELS: usize = 16;

/// `int_a^b f` by adaptive Simpson to the given relative tolerance.
///
/// The tolerance is taken relative to a 16-panel composite estimate of the
/// integral of `|f|`; errors from `f` are passed through.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration bounds [{a}, {b}] are not finite"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / PANELS as f64;
    let mut nodes = Vec::with_capacity(2 * PANELS + 1);
    for i in 0..=2 * PANELS {
        let x = if i == 2 * PANELS {
            b
        } else {
            a + 0.5 * h * i as f64
        };
        nodes.push((x, f(x)?));
    }
    let panel = |i: usize| (nodes[2 * i], nodes[2 * i + 1], nodes[2 * i + 2]);
    let simpson = |(x0, f0): (f64, f64), fm: f64, (x1, f1): (f64, f64)| {
        (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1)
    };
    let scale: f64 = (0..PANELS)
        .map(|i| {
            let (l, m, r) = panel(i);
            simpson((l.0, l.1.abs()), m.1.abs(), (r.0, r.1.abs())).abs()
        })
        .sum();
    let tol = (rel_tol * scale).max(f64::MIN_POSITIVE) / PANELS as f64;
    let mut total = 0.0;
    for i in 0..PANELS {
        let (l, m, r) = panel(i);
        let whole = simpson(l, m.1, r);
        total += refine(&mut f, l, m, r, whole, tol, MAX_DEPTH)?;
    }
    if !total.is_finite() {
        return Err(Error::Numeric("integral is not finite".into()));
    }
    Ok(total)
}

fn refine<F>(
    f: &mut F,
    (a, fa): (f64, f64),
    (m, fm): (f64, f64),
    (b, fb): (f64, f64),
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(
        refine(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth - 1)?
            + refine(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth - 1)?,
    )
}
