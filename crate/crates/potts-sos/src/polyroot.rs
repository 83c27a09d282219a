//! Real-root machinery for the fixed-point polynomials.
//!
//! Translation-invariant boundary laws of the three-state model on the order-2
//! tree reduce to real roots of two one-variable polynomials in `y > 0`:
//!
//! * the symmetric-branch cubic (the `x = 1` family)
//!   `theta y^3 - r y^2 + (theta^2 + r) y - 2 theta = 0`, and
//! * the elimination quartic of the asymmetric branch (see
//!   [`quartic_branch_coefficients`]).
//!
//! The cubic is solved in closed form (Cardano, with the depressed-form
//! discriminant `Q = (p/3)^3 + (q/2)^2` driving the one/two/three-root
//! trichotomy). The quartic is solved numerically via companion-matrix
//! eigenvalues plus Newton polishing — closed-form quartic formulas are
//! numerically fragile near repeated roots, which this problem hits on whole
//! parameter lines. [`oracle_real_roots`] is a deliberately independent
//! bisection-based finder used to cross-check both solvers in tests.
//!
//! Conventions used throughout:
//! * coefficients are in descending degree order;
//! * roots are reported sorted ascending with explicit multiplicities;
//! * roots closer than `MERGE_TOL * max(1, |root|)` are merged into one
//!   multiple root;
//! * sign classification of discriminant-like quantities uses an absolute
//!   zero-band of `ZERO_BAND` around zero.

use nalgebra::Matrix4;
use thiserror::Error;

/// Relative tolerance below which two computed roots are considered one
/// multiple root.
pub const MERGE_TOL: f64 = 1e-7;

/// Absolute half-width of the band around zero inside which a sign
/// classification reports [`SignClass::Zero`].
pub const ZERO_BAND: f64 = 1e-10;

/// Errors from the root-finding layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    /// Every coefficient is zero: the root set of the zero polynomial is not
    /// meaningful.
    #[error("all polynomial coefficients are zero")]
    AllCoefficientsZero,
    /// A coefficient is NaN or infinite.
    #[error("polynomial coefficients must be finite")]
    NonFiniteCoefficients,
    /// [`bisect_root`] was called on an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    /// [`bisect_root`] was called with an empty or non-finite interval.
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
}

/// Three-way sign with a zero-band: values within [`ZERO_BAND`] of zero are
/// classified as zero so that boundary cases are detected instead of being
/// pushed to one side by rounding noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    Negative,
    Zero,
    Positive,
}

/// Classify `value` against the `±ZERO_BAND` band.
pub fn classify_sign(value: f64) -> SignClass {
    if value.abs() <= ZERO_BAND {
        SignClass::Zero
    } else if value < 0.0 {
        SignClass::Negative
    } else {
        SignClass::Positive
    }
}

/// The real roots of a polynomial, sorted ascending, with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    roots: Vec<f64>,
    multiplicities: Vec<u32>,
}

impl RootSet {
    fn from_pairs(mut pairs: Vec<(f64, u32)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        RootSet {
            roots: pairs.iter().map(|p| p.0).collect(),
            multiplicities: pairs.iter().map(|p| p.1).collect(),
        }
    }

    fn empty() -> Self {
        RootSet { roots: Vec::new(), multiplicities: Vec::new() }
    }

    /// Distinct real roots, ascending.
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Multiplicity of each root, parallel to [`RootSet::roots`].
    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    /// Number of distinct real roots.
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    /// True when no real root exists.
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Number of distinct roots strictly greater than zero.
    pub fn positive_count(&self) -> usize {
        self.roots.iter().filter(|&&r| r > 0.0).count()
    }

    /// Positive roots counted with multiplicity. Repeated roots of the
    /// elimination quartic carry several solution branches, so region
    /// bookkeeping counts them once per multiplicity.
    pub fn positive_count_with_multiplicity(&self) -> u32 {
        self.roots
            .iter()
            .zip(&self.multiplicities)
            .filter(|(&r, _)| r > 0.0)
            .map(|(_, &m)| m)
            .sum()
    }

    /// True when some root lies inside the zero-band around 0, making its
    /// positivity tolerance-ambiguous.
    pub fn has_root_in_zero_band(&self) -> bool {
        self.roots.iter().any(|&r| r.abs() <= ZERO_BAND)
    }

    /// Largest multiplicity among the strictly positive roots (0 if none).
    pub fn max_positive_multiplicity(&self) -> u32 {
        self.roots
            .iter()
            .zip(&self.multiplicities)
            .filter(|(&r, _)| r > 0.0)
            .map(|(_, &m)| m)
            .max()
            .unwrap_or(0)
    }

    /// Iterator over `(root, multiplicity)` pairs, ascending in the root.
    pub fn iter(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        self.roots.iter().copied().zip(self.multiplicities.iter().copied())
    }
}

/// Evaluate a polynomial given by descending coefficients at `x` (Horner).
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Descending coefficients of the derivative polynomial.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![0.0];
    }
    coeffs[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (n - 1 - i) as f64)
        .collect()
}

/// A magnitude scale for `p(x)`: the value the evaluation would have if every
/// term added up with the same sign. Residual tolerances are relative to this.
fn poly_scale(coeffs: &[f64], x: f64) -> f64 {
    let ax = x.abs().max(1.0);
    coeffs.iter().fold(0.0_f64, |acc, &c| acc * ax + c.abs()).max(f64::MIN_POSITIVE)
}

/// Coefficients `[c3, c2, c1, c0]` of the symmetric-branch cubic
/// `theta y^3 - r y^2 + (theta^2 + r) y - 2 theta`.
///
/// Its positive roots `y` are exactly the translation-invariant boundary laws
/// with `x = 1`; by the sign pattern of the coefficients every real root is
/// positive, so there are one, two or three such laws.
pub fn cubic_x1_coefficients(theta: f64, r: f64) -> [f64; 4] {
    [theta, -r, theta * theta + r, -2.0 * theta]
}

/// Coefficients `[c4, c3, c2, c1, c0]` of the elimination quartic for the
/// asymmetric branch (`x != 1`):
///
/// ```text
/// theta^2 (theta+1) (r^2 - 2 theta r + theta^3 - theta^2 + theta) y^4
///   - theta (r - theta^2) (r^2 + (theta^2+1) r - 3 theta^2) y^3
///   + ((theta+1) r + theta^3) (r - theta^2)^2 y^2
///   - (r + theta^2) (r - theta^2)^2 y
///   + theta (r - theta^2)^2
/// ```
///
/// Obtained by eliminating `x` from the two-variable fixed-point system; a
/// positive root is only a *candidate* and must be validated against the full
/// system (the elimination introduces spurious roots where its denominator
/// vanishes). On `r = theta^2` all coefficients below the leading one vanish;
/// at `(theta, r) = (1, 1)` the whole polynomial degenerates to zero.
pub fn quartic_branch_coefficients(theta: f64, r: f64) -> [f64; 5] {
    let t2 = theta * theta;
    let s = r - t2;
    let s2 = s * s;
    [
        t2 * (theta + 1.0) * (r * r - 2.0 * theta * r + t2 * theta - t2 + theta),
        -theta * s * (r * r + (t2 + 1.0) * r - 3.0 * t2),
        ((theta + 1.0) * r + t2 * theta) * s2,
        -(r + t2) * s2,
        theta * s2,
    ]
}

/// Depressed form of the symmetric-branch cubic.
///
/// Dividing the cubic by `theta` and substituting `y = z + r / (3 theta)`
/// turns it into `z^3 + p z + q = 0` with
///
/// ```text
/// p = r/theta + theta - r^2 / (3 theta^2)
/// q = r/3 + r^2 / (3 theta^2) - 2 r^3 / (27 theta^3) - 2
/// ```
///
/// `big_q = (p/3)^3 + (q/2)^2` decides the root count: positive means one real
/// root, zero a repeated root (triple when additionally `p = q = 0`), negative
/// three distinct real roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepressedCubic {
    /// Linear coefficient of the depressed cubic.
    pub p: f64,
    /// Constant coefficient of the depressed cubic.
    pub q: f64,
    /// The Cardano discriminant `(p/3)^3 + (q/2)^2`.
    pub big_q: f64,
    /// The substitution offset: `y = z + shift`, `shift = r / (3 theta)`.
    pub shift: f64,
}

/// Compute the depressed form of the symmetric-branch cubic at `(theta, r)`.
pub fn depressed_form(theta: f64, r: f64) -> DepressedCubic {
    let t2 = theta * theta;
    let p = r / theta + theta - r * r / (3.0 * t2);
    let q = r / 3.0 + r * r / (3.0 * t2) - 2.0 * r * r * r / (27.0 * t2 * theta) - 2.0;
    let big_q = (p / 3.0).powi(3) + (q / 2.0).powi(2);
    DepressedCubic { p, q, big_q, shift: r / (3.0 * theta) }
}

/// Merge a sorted list of root candidates into distinct roots with
/// multiplicities; candidates within `MERGE_TOL * max(1, |value|)` of the
/// running cluster mean are absorbed into the cluster.
fn merge_roots(mut candidates: Vec<(f64, u32)>) -> Vec<(f64, u32)> {
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, u32)> = Vec::new();
    for (v, m) in candidates {
        match merged.last_mut() {
            Some((mv, mm)) if (v - *mv).abs() <= MERGE_TOL * v.abs().max(1.0) => {
                // weighted cluster mean keeps the merged value centred
                let total = *mm + m;
                *mv = (*mv * (*mm as f64) + v * (m as f64)) / total as f64;
                *mm = total;
            }
            _ => merged.push((v, m)),
        }
    }
    merged
}

fn check_finite(coeffs: &[f64]) -> Result<(), PolyError> {
    if coeffs.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(PolyError::NonFiniteCoefficients)
    }
}

/// Real roots of a quadratic `a x^2 + b x + c` (general helper; degrades to
/// linear/constant when leading coefficients vanish).
fn solve_quadratic(a: f64, b: f64, c: f64) -> Result<RootSet, PolyError> {
    check_finite(&[a, b, c])?;
    if a == 0.0 {
        if b == 0.0 {
            return if c == 0.0 { Err(PolyError::AllCoefficientsZero) } else { Ok(RootSet::empty()) };
        }
        return Ok(RootSet::from_pairs(vec![(-c / b, 1)]));
    }
    let disc = b * b - 4.0 * a * c;
    let scale = b * b + (4.0 * a * c).abs();
    if disc.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Ok(RootSet::from_pairs(vec![(-b / (2.0 * a), 2)]));
    }
    if disc < 0.0 {
        return Ok(RootSet::empty());
    }
    // Citardauq on the small root avoids cancellation when |4ac| << b^2.
    let sd = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sd);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Ok(RootSet::from_pairs(merge_roots(vec![(r1, 1), (r2, 1)])))
}

/// All real roots of the cubic `c[0] y^3 + c[1] y^2 + c[2] y + c[3]`, by the
/// Cardano trichotomy on the depressed-form discriminant, with repeated roots
/// merged within [`MERGE_TOL`]. Degrades to the quadratic/linear solver when
/// leading coefficients are exactly zero.
pub fn solve_cubic(coeffs: [f64; 4]) -> Result<RootSet, PolyError> {
    check_finite(&coeffs)?;
    let [a, b, c, d] = coeffs;
    if a == 0.0 {
        return solve_quadratic(b, c, d);
    }
    // monic y^3 + bb y^2 + cc y + dd, depressed by y = t - bb/3
    let (bb, cc, dd) = (b / a, c / a, d / a);
    let shift = -bb / 3.0;
    let p = cc - bb * bb / 3.0;
    let q = 2.0 * bb * bb * bb / 27.0 - bb * cc / 3.0 + dd;
    let cube = (p / 3.0).powi(3);
    let square = (q / 2.0).powi(2);
    let big_q = cube + square;
    let scale = cube.abs() + square;

    let ts: Vec<(f64, u32)> = if scale == 0.0 {
        // p = q = 0: triple root at the inflection point
        vec![(0.0, 3)]
    } else if big_q.abs() <= 1e-12 * scale {
        // boundary: one simple and one double root (p != 0 here, since p = 0
        // with q != 0 forces big_q = scale > 0)
        vec![(3.0 * q / p, 1), (-1.5 * q / p, 2)]
    } else if big_q > 0.0 {
        // one real root; pick the cube-root branch that avoids cancellation
        let s = -q / 2.0;
        let w = if s >= 0.0 { s + big_q.sqrt() } else { s - big_q.sqrt() };
        let a1 = w.cbrt();
        vec![(a1 - p / (3.0 * a1), 1)]
    } else {
        // three distinct real roots (p < 0 guaranteed); trigonometric form
        let mag = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let phi = arg.clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| (mag * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos(), 1))
            .collect()
    };

    let pairs = merge_roots(ts.into_iter().map(|(t, m)| (t + shift, m)).collect());
    Ok(RootSet::from_pairs(pairs))
}

/// Multiplicity of `z` as a root of the monic polynomial `coeffs`, detected by
/// how many successive derivatives vanish relative to their magnitude scale.
fn multiplicity_at(coeffs: &[f64], z: f64) -> u32 {
    let degree = coeffs.len() - 1;
    let mut mult = 1u32;
    let mut d = derivative(coeffs);
    while (mult as usize) < degree {
        let val = eval_poly(&d, z);
        if val.abs() > 1e-5 * poly_scale(&d, z) {
            break;
        }
        mult += 1;
        d = derivative(&d);
    }
    mult
}

/// Newton-polish a real root candidate of the polynomial `coeffs`; keeps the
/// best-residual iterate, so multiple roots (where convergence is only
/// linear) still improve steadily.
fn polish_root(coeffs: &[f64], z0: f64) -> f64 {
    let deriv = derivative(coeffs);
    let mut z = z0;
    let mut best = z0;
    let mut best_res = eval_poly(coeffs, z0).abs();
    for _ in 0..80 {
        let f = eval_poly(coeffs, z);
        let fp = eval_poly(&deriv, z);
        if fp == 0.0 {
            break;
        }
        let step = f / fp;
        z -= step;
        let res = eval_poly(coeffs, z).abs();
        if res < best_res {
            best_res = res;
            best = z;
        }
        if step.abs() <= 1e-16 * z.abs().max(1.0) {
            break;
        }
    }
    best
}

/// All real roots of the quartic `c[0] y^4 + ... + c[4]`, computed from the
/// eigenvalues of the companion matrix and Newton-polished, with repeated
/// roots merged and multiplicities confirmed by the derivative cascade.
/// Degrades to the cubic solver when the leading coefficient is exactly zero.
pub fn solve_quartic(coeffs: [f64; 5]) -> Result<RootSet, PolyError> {
    check_finite(&coeffs)?;
    let [a, b, c, d, e] = coeffs;
    if a == 0.0 {
        return solve_cubic([b, c, d, e]);
    }
    let monic = [1.0, b / a, c / a, d / a, e / a];
    check_finite(&monic)?;
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -monic[4],
        1.0, 0.0, 0.0, -monic[3],
        0.0, 1.0, 0.0, -monic[2],
        0.0, 0.0, 1.0, -monic[1],
    );
    let eigen = companion.complex_eigenvalues();

    // Near-real eigenvalues are root candidates. A double real root shows up
    // as a conjugate pair with imaginary part ~ sqrt(machine eps), so the
    // acceptance window must sit well above that.
    let mut candidates: Vec<(f64, u32)> = Vec::new();
    for ev in eigen.iter() {
        if ev.im.abs() <= 1e-6 * ev.norm().max(1.0) {
            candidates.push((polish_root(&monic, ev.re), 1));
        }
    }
    let mut merged = merge_roots(candidates);

    // Confirm multiplicities: an eigenvalue cluster can lose members to the
    // imaginary-part filter (a triple root splits as eps^(1/3), past the
    // window), so the cluster size alone under-counts.
    let mut total: u32 = 0;
    for entry in &mut merged {
        entry.1 = entry.1.max(multiplicity_at(&monic, entry.0));
        total += entry.1;
    }
    // The multiplicity cascade can in principle over-count when two distinct
    // roots sit close together; trim from the largest multiplicities down.
    while total > 4 {
        let imax = (0..merged.len()).max_by_key(|&i| merged[i].1).unwrap();
        merged[imax].1 -= 1;
        total -= 1;
    }
    Ok(RootSet::from_pairs(merged))
}

/// Bisection on a bracketing interval. `tol` is the absolute interval width at
/// which iteration stops; the midpoint of the final bracket is returned.
pub fn bisect_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64, PolyError> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(PolyError::InvalidBracket { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(PolyError::NoBracket { lo, hi });
    }
    let mut sign_a = fa.signum();
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sign_a {
            a = mid;
        } else {
            b = mid;
        }
        sign_a = f(a).signum();
    }
    Ok(0.5 * (a + b))
}

/// Independent real-root oracle: recursive monotone subdivision.
///
/// The real roots of the derivative (found by the same routine, bottoming out
/// at degree one) split the line into intervals on which the polynomial is
/// monotone; each interval holds at most one simple root, found by bisection,
/// and each critical point with a vanishing polynomial value is a multiple
/// root whose multiplicity comes from the derivative cascade. This shares no
/// machinery with the closed-form cubic or the companion-matrix quartic, which
/// is the point: it is the cross-check.
pub fn oracle_real_roots(coeffs: &[f64]) -> Result<RootSet, PolyError> {
    check_finite(coeffs)?;
    let max_abs = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if max_abs == 0.0 {
        return Err(PolyError::AllCoefficientsZero);
    }
    // trim negligible leading coefficients so the degree is meaningful
    let trimmed: Vec<f64> = {
        let skip = coeffs.iter().take_while(|c| c.abs() <= 1e-14 * max_abs).count();
        coeffs[skip..].to_vec()
    };
    let degree = trimmed.len().saturating_sub(1);
    if degree == 0 {
        return Ok(RootSet::empty());
    }
    let monic: Vec<f64> = trimmed.iter().map(|c| c / trimmed[0]).collect();
    if degree == 1 {
        return Ok(RootSet::from_pairs(vec![(-monic[1], 1)]));
    }

    let crits = oracle_real_roots(&derivative(&monic))?;
    let bound = 1.0 + monic.iter().skip(1).fold(0.0_f64, |m, c| m.max(c.abs()));

    let mut breakpoints = vec![-bound];
    breakpoints.extend(crits.roots().iter().copied().filter(|c| c.abs() < bound));
    breakpoints.push(bound);

    let mut found: Vec<(f64, u32)> = Vec::new();
    let is_root = |x: f64| eval_poly(&monic, x).abs() <= 1e-9 * poly_scale(&monic, x);

    // multiple roots: critical points where the polynomial itself vanishes
    for &c in crits.roots() {
        if is_root(c) {
            found.push((c, multiplicity_at(&monic, c)));
        }
    }
    // simple roots: sign changes between consecutive critical points, with
    // endpoints nudged off any root so the bracketing signs are clean
    for w in breakpoints.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let nudge = 10.0 * MERGE_TOL;
        if is_root(a) {
            a += nudge * a.abs().max(1.0);
        }
        if is_root(b) {
            b -= nudge * b.abs().max(1.0);
        }
        if a >= b {
            continue;
        }
        let (fa, fb) = (eval_poly(&monic, a), eval_poly(&monic, b));
        if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        let root = bisect_root(|x| eval_poly(&monic, x), a, b, 0.0)
            .expect("sign change verified above");
        found.push((root, 1));
    }
    Ok(RootSet::from_pairs(merge_roots(found)))
}
