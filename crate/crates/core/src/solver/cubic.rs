//! Real roots of `a3 x³ + a2 x² + a1 x + a0`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CubicError {
    #[error("all four coefficients are zero")]
    ZeroPolynomial,
    #[error("non-finite coefficient ({0}, {1}, {2}, {3})")]
    NonFinite(f64, f64, f64, f64),
}

/// Below `DEGENERATE_RATIO · max(|a2|, |a1|, |a0|)` the leading coefficient is
/// treated as a perturbation: roots are seeded from the quadratic part and
/// refined on the full cubic.
pub const DEGENERATE_RATIO: f64 = 1e-8;
/// Roots at or below this value are not counted as positive.
pub const POSITIVE_ROOT_CUTOFF: f64 = 1e-15;

const NEWTON_MAX_STEPS: usize = 64;
const NEWTON_RESIDUAL: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
struct Poly {
    c: [f64; 4],
}

impl Poly {
    fn eval(&self, x: f64) -> f64 {
        let [a3, a2, a1, a0] = self.c;
        ((a3 * x + a2) * x + a1) * x + a0
    }

    fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let [a3, a2, a1, a0] = self.c;
        let p = ((a3 * x + a2) * x + a1) * x + a0;
        let dp = (3.0 * a3 * x + 2.0 * a2) * x + a1;
        (p, dp)
    }

    /// Sum of term magnitudes at `x`, the natural scale of evaluation error.
    fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        let [a3, a2, a1, a0] = self.c;
        ((a3.abs() * ax + a2.abs()) * ax + a1.abs()) * ax + a0.abs()
    }

    fn max_coeff(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// All real roots in ascending order, repeated roots reported once.
///
/// The leading coefficient decides the route. When it is not negligible the
/// closed-form depressed-cubic solution is used, with
/// `P = (3ac − b²)/(3a²)`, `Q = (2b³ − 9abc + 27a²d)/(27a³)` and
/// `Δ = (Q/2)² + (P/3)³`: one root when `b² = 3ac` or `Δ > 0`, a simple and a
/// double root when `Δ = 0`, three distinct roots (trigonometric form) when
/// `Δ < 0`. Each root is then polished by Newton's method.
///
/// When `|a3| < 1e-8 · max(|a2|, |a1|, |a0|)`, the roots of `a2x² + a1x + a0`
/// seed Newton's method on the full cubic (at most 64 steps, bisection on a
/// sign-change bracket as fallback). The remaining root, typically far away
/// and of size about `|a2/a3|`, is recovered by deflating with a found root.
///
/// Either way the result is checked against the sign pattern of the cubic on
/// its monotone pieces (split at the critical points): every piece whose
/// ends differ in sign holds exactly one root, and a piece the closed form
/// missed (its Δ sign can flip under cancellation when the roots differ in
/// scale by many orders) is solved by bisection.
pub fn real_cubic_roots(a3: f64, a2: f64, a1: f64, a0: f64) -> Result<Vec<f64>, CubicError> {
    if ![a3, a2, a1, a0].iter().all(|v| v.is_finite()) {
        return Err(CubicError::NonFinite(a3, a2, a1, a0));
    }
    if a3 == 0.0 && a2 == 0.0 && a1 == 0.0 && a0 == 0.0 {
        return Err(CubicError::ZeroPolynomial);
    }
    let poly = Poly { c: [a3, a2, a1, a0] };
    let mut roots = if a3 == 0.0 {
        quadratic_roots(a2, a1, a0).into_iter().map(|r| polish(&poly, r)).collect()
    } else {
        let lower = a2.abs().max(a1.abs()).max(a0.abs());
        let candidates = if a3.abs() < DEGENERATE_RATIO * lower {
            degenerate_roots(&poly)
        } else {
            analytic_roots(a3, a2, a1, a0).into_iter().map(|r| polish(&poly, r)).collect()
        };
        complete(&poly, candidates)
    };
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
    Ok(roots)
}

/// One root per sign-changing monotone piece, preferring a candidate that
/// already lies in the piece, plus tangential roots at critical points.
fn complete(poly: &Poly, candidates: Vec<f64>) -> Vec<f64> {
    let [a3, a2, a1, a0] = poly.c;
    let mut crit = quadratic_roots(3.0 * a3, 2.0 * a2, a1);
    crit.sort_by(f64::total_cmp);
    crit.dedup();
    let cauchy = 1.0 + a2.abs().max(a1.abs()).max(a0.abs()) / a3.abs();
    let reach = crit.iter().fold(cauchy, |m, c| m.max(2.0 * c.abs() + 1.0));
    let mut marks = vec![-reach];
    marks.extend(crit.iter().copied());
    marks.push(reach);

    let mut roots = Vec::new();
    for w in marks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (plo, phi) = (poly.eval(lo), poly.eval(hi));
        if plo == 0.0 || phi == 0.0 || (plo < 0.0) == (phi < 0.0) {
            continue;
        }
        let inside = candidates
            .iter()
            .copied()
            .filter(|r| *r >= lo && *r <= hi)
            .min_by(|x, y| poly.eval(*x).abs().total_cmp(&poly.eval(*y).abs()));
        let root = match inside {
            Some(r) => r,
            None => {
                let r = polish(poly, bisect(poly, lo, hi));
                if r >= lo && r <= hi {
                    r
                } else {
                    bisect(poly, lo, hi)
                }
            }
        };
        roots.push(root);
    }
    for &c in &crit {
        let pc = poly.eval(c);
        if pc != 0.0 && pc.abs() > 1e-13 * poly.magnitude(c) {
            continue;
        }
        let near = |r: &f64| (r - c).abs() <= 1e-6 * c.abs().max(1.0);
        if roots.iter().any(near) {
            continue;
        }
        let best = candidates
            .iter()
            .copied()
            .filter(near)
            .min_by(|x, y| poly.eval(*x).abs().total_cmp(&poly.eval(*y).abs()));
        roots.push(best.unwrap_or(c));
    }
    roots
}

/// Smallest root strictly greater than `1e-15`; `+∞` when there is none.
pub fn smallest_positive_root(a3: f64, a2: f64, a1: f64, a0: f64) -> Result<f64, CubicError> {
    let roots = real_cubic_roots(a3, a2, a1, a0)?;
    Ok(roots.into_iter().find(|r| *r > POSITIVE_ROOT_CUTOFF).unwrap_or(f64::INFINITY))
}

fn analytic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let p = (3.0 * a * c - b * b) / (3.0 * a * a);
    let q = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let shift = -b / (3.0 * a);
    if b * b == 3.0 * a * c || disc > 0.0 {
        let s = disc.max(0.0).sqrt();
        vec![shift + (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else if disc == 0.0 {
        let t = (-q / 2.0).cbrt();
        vec![shift + 2.0 * t, shift - t]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let ratio = ((-q / 2.0) / (-p / 3.0).powf(1.5)).clamp(-1.0, 1.0);
        let theta = ratio.acos();
        (0..3)
            .map(|k| shift + m * ((theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos())
            .collect()
    }
}

/// Newton refinement that never returns a worse point than it started from.
fn polish(poly: &Poly, x0: f64) -> f64 {
    let (x, _) = newton(poly, x0);
    if x.is_finite() && poly.eval(x).abs() <= poly.eval(x0).abs() {
        x
    } else {
        x0
    }
}

/// Returns the final iterate and whether it met the residual or step test.
fn newton(poly: &Poly, x0: f64) -> (f64, bool) {
    let target = NEWTON_RESIDUAL * poly.max_coeff();
    let mut x = x0;
    let mut best = (x0, poly.eval(x0).abs());
    for _ in 0..NEWTON_MAX_STEPS {
        let (p, dp) = poly.eval_with_derivative(x);
        if p.abs() < best.1 {
            best = (x, p.abs());
        }
        if p.abs() <= target {
            return (x, true);
        }
        if dp == 0.0 || !dp.is_finite() {
            break;
        }
        let step = p / dp;
        let next = x - step;
        if !next.is_finite() {
            break;
        }
        if step.abs() <= 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE) {
            let pn = poly.eval(next).abs();
            return if pn <= best.1 { (next, true) } else { (best.0, true) };
        }
        x = next;
    }
    (best.0, false)
}

fn bisect(poly: &Poly, mut lo: f64, mut hi: f64) -> f64 {
    let mut plo = poly.eval(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pm = poly.eval(mid);
        if pm == 0.0 {
            return mid;
        }
        if (pm < 0.0) == (plo < 0.0) {
            lo = mid;
            plo = pm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Newton from `seed`, falling back to bisection on a bracket grown around
/// the seed until the polynomial changes sign.
fn refine(poly: &Poly, seed: f64) -> Option<f64> {
    let (x, ok) = newton(poly, seed);
    if ok {
        return Some(x);
    }
    let mut h = 1e-8 * seed.abs().max(1.0);
    for _ in 0..200 {
        let (lo, hi) = (seed - h, seed + h);
        if !lo.is_finite() || !hi.is_finite() {
            break;
        }
        let (plo, phi) = (poly.eval(lo), poly.eval(hi));
        if plo == 0.0 {
            return Some(lo);
        }
        if phi == 0.0 {
            return Some(hi);
        }
        if (plo < 0.0) != (phi < 0.0) {
            return Some(bisect(poly, lo, hi));
        }
        h *= 2.0;
    }
    None
}

/// Real roots of `q2 x² + q1 x + q0` without cancellation in the larger root.
fn quadratic_roots(q2: f64, q1: f64, q0: f64) -> Vec<f64> {
    if q2 == 0.0 {
        if q1 == 0.0 {
            return Vec::new();
        }
        return vec![-q0 / q1];
    }
    let disc = q1 * q1 - 4.0 * q2 * q0;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let t = -0.5 * (q1 + if q1 >= 0.0 { s } else { -s });
    if t == 0.0 {
        return vec![0.0];
    }
    vec![t / q2, q0 / t]
}

fn is_root(poly: &Poly, x: f64) -> bool {
    x.is_finite() && poly.eval(x).abs() <= 1e-9 * poly.magnitude(x)
}

fn degenerate_roots(poly: &Poly) -> Vec<f64> {
    let [a3, a2, a1, a0] = poly.c;
    let mut found: Vec<f64> = quadratic_roots(a2, a1, a0)
        .into_iter()
        .filter_map(|s| refine(poly, s))
        .filter(|r| is_root(poly, *r))
        .collect();
    if a3 == 0.0 {
        return found;
    }
    if found.is_empty() {
        // Odd degree: a sign change exists inside the Cauchy bound.
        let bound = 1.0 + a2.abs().max(a1.abs()).max(a0.abs()) / a3.abs();
        found.push(bisect(poly, -bound, bound));
    }
    // Deflate by one root; the quotient a3x² + (a2 + a3 r)x + (a1 + (a2 + a3 r) r)
    // carries the remaining pair, including the far root near −a2/a3.
    let r = found[0];
    let q1 = a2 + a3 * r;
    let q0 = a1 + q1 * r;
    for cand in quadratic_roots(a3, q1, q0) {
        let x = polish(poly, cand);
        if is_root(poly, x) {
            found.push(x);
        }
    }
    found
}
