//! Integer-solution search and non-existence checks for constraint
//! polynomials. Scans are exact: evaluation is big-rational, perfect-square
//! testing uses integer square roots, and every reported solution is
//! re-verified before it is returned.
//!
//! The scans are data-parallel over their outer range. With the `parallel`
//! feature (on by default) they fan out through rayon; the `*_seq`
//! variants are always available and the public entry points fall back to
//! them when the feature is disabled. Results are merged in deterministic
//! order either way.

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::poly::{Param, PolyExpr};
use crate::rat::{as_int, exact_sqrt, rat, Int, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiophError {
    #[error("search box holds {0} points, over the {1}-point cap")]
    BoxTooLarge(u128, u128),
    #[error("polynomial has degree {0} in the quadratic variable, expected at most 2")]
    NotQuadratic(u32),
    #[error("polynomial mentions {0}, which is not a box variable")]
    UnboxedParam(String),
    #[error("polynomial vanishes identically at {0} = {1}; solutions are not enumerable")]
    DegenerateZero(String, i64),
    #[error("zero polynomial")]
    ZeroPolynomial,
}

/// Inclusive integer ranges for an ordered list of variables.
#[derive(Clone, Debug)]
pub struct SearchBox {
    pub vars: Vec<Param>,
    pub ranges: Vec<(i64, i64)>,
}

pub const DEFAULT_BOX_CAP: u128 = 10_000_000_000;

impl SearchBox {
    pub fn new(vars: Vec<Param>, ranges: Vec<(i64, i64)>) -> Self {
        assert_eq!(vars.len(), ranges.len());
        SearchBox { vars, ranges }
    }

    pub fn size(&self) -> u128 {
        self.ranges
            .iter()
            .map(|(lo, hi)| if hi < lo { 0u128 } else { (hi - lo) as u128 + 1 })
            .product()
    }
}

fn check_box(poly: &PolyExpr, bx: &SearchBox) -> Result<(), DiophError> {
    for p in poly.params() {
        if !bx.vars.contains(&p) {
            return Err(DiophError::UnboxedParam(p.name().to_string()));
        }
    }
    let size = bx.size();
    if size > DEFAULT_BOX_CAP {
        return Err(DiophError::BoxTooLarge(size, DEFAULT_BOX_CAP));
    }
    Ok(())
}

fn scan_cell(
    poly: &PolyExpr,
    bx: &SearchBox,
    fixed: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    let depth = fixed.len();
    if depth == bx.vars.len() {
        let assignment: BTreeMap<Param, Rat> = bx
            .vars
            .iter()
            .cloned()
            .zip(fixed.iter().map(|v| rat(*v)))
            .collect();
        if poly.eval(&assignment).unwrap().is_zero() {
            out.push(fixed.clone());
        }
        return;
    }
    let (lo, hi) = bx.ranges[depth];
    for v in lo..=hi {
        fixed.push(v);
        scan_cell(poly, bx, fixed, out);
        fixed.pop();
    }
}

/// All integer zeros of `poly` inside the box, in lexicographic order of
/// the box variables. Sequential implementation.
pub fn search_box_seq(poly: &PolyExpr, bx: &SearchBox) -> Result<Vec<Vec<i64>>, DiophError> {
    check_box(poly, bx)?;
    let mut out = Vec::new();
    scan_cell(poly, bx, &mut Vec::new(), &mut out);
    verify_solutions(poly, bx, &out);
    Ok(out)
}

/// All integer zeros of `poly` inside the box, in lexicographic order.
/// Fans out over the first variable when the `parallel` feature is on.
pub fn search_box(poly: &PolyExpr, bx: &SearchBox) -> Result<Vec<Vec<i64>>, DiophError> {
    #[cfg(feature = "parallel")]
    {
        check_box(poly, bx)?;
        if bx.vars.is_empty() {
            return search_box_seq(poly, bx);
        }
        let (lo, hi) = bx.ranges[0];
        let chunks: Vec<Vec<Vec<i64>>> = (lo..=hi)
            .into_par_iter()
            .map(|v| {
                let mut out = Vec::new();
                let mut fixed = vec![v];
                scan_cell(poly, bx, &mut fixed, &mut out);
                out
            })
            .collect();
        let out: Vec<Vec<i64>> = chunks.into_iter().flatten().collect();
        verify_solutions(poly, bx, &out);
        Ok(out)
    }
    #[cfg(not(feature = "parallel"))]
    {
        search_box_seq(poly, bx)
    }
}

fn verify_solutions(poly: &PolyExpr, bx: &SearchBox, sols: &[Vec<i64>]) {
    for sol in sols {
        let assignment: BTreeMap<Param, Rat> = bx
            .vars
            .iter()
            .cloned()
            .zip(sol.iter().map(|v| rat(*v)))
            .collect();
        assert!(
            poly.eval(&assignment).unwrap().is_zero(),
            "reported solution fails re-verification"
        );
    }
}

/// Exact univariate integer evaluation by Horner, for coefficient rows of
/// the quadratic scan.
fn eval_univariate(coeffs: &[Int], x: i64) -> Int {
    let x = Int::from(x);
    let mut acc = Int::zero();
    for c in coeffs.iter().rev() {
        acc = acc * &x + c;
    }
    acc
}

/// Solutions of a polynomial of degree at most two in `quad_var` whose
/// coefficients depend only on `scan_var`. For each scan value the
/// (at most quadratic) equation is solved exactly over the integers via
/// the discriminant; pairs come back as (quad value, scan value), ordered
/// by scan value then root. Sequential implementation.
pub fn quadratic_scan_seq(
    poly: &PolyExpr,
    quad_var: &Param,
    scan_var: &Param,
    scan_range: (i64, i64),
) -> Result<Vec<(i64, i64)>, DiophError> {
    let rows = quadratic_rows(poly, quad_var, scan_var)?;
    let mut out = Vec::new();
    for s in scan_range.0..=scan_range.1 {
        out.extend(solve_row(&rows, s, scan_var)?);
    }
    Ok(out)
}

/// Parallel front end of [`quadratic_scan_seq`]; identical output.
pub fn quadratic_scan(
    poly: &PolyExpr,
    quad_var: &Param,
    scan_var: &Param,
    scan_range: (i64, i64),
) -> Result<Vec<(i64, i64)>, DiophError> {
    #[cfg(feature = "parallel")]
    {
        let rows = quadratic_rows(poly, quad_var, scan_var)?;
        let results: Vec<Result<Vec<(i64, i64)>, DiophError>> = (scan_range.0..=scan_range.1)
            .into_par_iter()
            .map(|s| solve_row(&rows, s, scan_var))
            .collect();
        let mut out = Vec::new();
        for r in results {
            out.extend(r?);
        }
        Ok(out)
    }
    #[cfg(not(feature = "parallel"))]
    {
        quadratic_scan_seq(poly, quad_var, scan_var, scan_range)
    }
}

/// The three coefficient rows (constant, linear, quadratic in the quad
/// variable), each as integer coefficients in the scan variable. The
/// polynomial is scaled to integer coefficients first; zeros are
/// unaffected.
fn quadratic_rows(
    poly: &PolyExpr,
    quad_var: &Param,
    scan_var: &Param,
) -> Result<[Vec<Int>; 3], DiophError> {
    let deg = poly.degree_in(quad_var);
    if deg > 2 {
        return Err(DiophError::NotQuadratic(deg));
    }
    for p in poly.params() {
        if &p != quad_var && &p != scan_var {
            return Err(DiophError::UnboxedParam(p.name().to_string()));
        }
    }
    if poly.is_zero() {
        return Err(DiophError::ZeroPolynomial);
    }
    let scaled = poly.primitive();
    let coeffs = scaled.coefficients_in(quad_var);
    let mut rows: [Vec<Int>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (k, row) in rows.iter_mut().enumerate() {
        let c = coeffs.get(k).cloned().unwrap_or_else(PolyExpr::zero);
        let by_scan = c.coefficients_in(scan_var);
        *row = by_scan
            .iter()
            .map(|q| {
                as_int(&q.as_constant().expect("coefficients in scan var only"))
                    .expect("primitive form has integer coefficients")
            })
            .collect();
    }
    Ok(rows)
}

fn solve_row(
    rows: &[Vec<Int>; 3],
    s: i64,
    scan_var: &Param,
) -> Result<Vec<(i64, i64)>, DiophError> {
    let a = eval_univariate(&rows[2], s);
    let b = eval_univariate(&rows[1], s);
    let c = eval_univariate(&rows[0], s);
    let mut roots: Vec<Int> = Vec::new();
    if a.is_zero() {
        if b.is_zero() {
            if c.is_zero() {
                return Err(DiophError::DegenerateZero(scan_var.name().to_string(), s));
            }
        } else if (&c % &b).is_zero() {
            roots.push(-(&c / &b));
        }
    } else {
        let disc = &b * &b - Int::from(4) * &a * &c;
        if let Some(sq) = exact_sqrt(&disc) {
            let two_a = Int::from(2) * &a;
            for num in [-&b + &sq, -&b - &sq] {
                if (&num % &two_a).is_zero() {
                    let root = &num / &two_a;
                    if !roots.contains(&root) {
                        roots.push(root);
                    }
                }
            }
        }
    }
    roots.sort();
    Ok(roots
        .into_iter()
        .filter_map(|r| r.to_i64().map(|q| (q, s)))
        .collect())
}

/// Inclusive symmetric interval guaranteed to contain all real roots of a
/// univariate polynomial (Cauchy bound: 1 + max |a_i / a_deg|).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootBound {
    pub lo: Int,
    pub hi: Int,
}

pub fn rational_root_bound(poly: &PolyExpr, var: &Param) -> Result<RootBound, DiophError> {
    if poly.is_zero() {
        return Err(DiophError::ZeroPolynomial);
    }
    for p in poly.params() {
        if &p != var {
            return Err(DiophError::UnboxedParam(p.name().to_string()));
        }
    }
    let coeffs = poly.coefficients_in(var);
    let lead = coeffs
        .last()
        .and_then(|c| c.as_constant())
        .expect("univariate polynomial");
    let mut max_ratio = Rat::zero();
    for c in &coeffs[..coeffs.len() - 1] {
        let v = c.as_constant().expect("univariate polynomial");
        let ratio = (v / &lead).abs();
        if ratio > max_ratio {
            max_ratio = ratio;
        }
    }
    let bound = Rat::one() + max_ratio;
    let hi = bound.ceil().to_integer();
    Ok(RootBound {
        lo: -hi.clone(),
        hi,
    })
}

use num_traits::One;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratq;

    fn v(name: &str) -> PolyExpr {
        PolyExpr::var(name)
    }

    fn p(name: &str) -> Param {
        Param::new(name)
    }

    fn final_constraint() -> PolyExpr {
        // n(3r - 2) - 15r + 14
        v("n")
            .mul(&v("r").scale(&rat(3)).sub(&PolyExpr::int(2)))
            .sub(&v("r").scale(&rat(15)))
            .add(&PolyExpr::int(14))
    }

    #[test]
    fn search_box_finds_the_unique_solution() {
        let bx = SearchBox::new(vec![p("n"), p("r")], vec![(1, 100), (2, 100)]);
        let sols = search_box(&final_constraint(), &bx).unwrap();
        assert_eq!(sols, vec![vec![4, 2]]);
        let seq = search_box_seq(&final_constraint(), &bx).unwrap();
        assert_eq!(sols, seq);
    }

    #[test]
    fn search_box_trivial_cases() {
        let bx = SearchBox::new(vec![p("x")], vec![(0, 10)]);
        assert!(search_box(&PolyExpr::one(), &bx).unwrap().is_empty());
        // planted roots are all found
        let poly = v("x")
            .sub(&PolyExpr::int(3))
            .mul(&v("x").sub(&PolyExpr::int(7)));
        assert_eq!(
            search_box(&poly, &bx).unwrap(),
            vec![vec![3], vec![7]]
        );
    }

    #[test]
    fn search_box_rejects_bad_input() {
        let bx = SearchBox::new(vec![p("x")], vec![(0, 10)]);
        assert!(matches!(
            search_box(&v("y"), &bx),
            Err(DiophError::UnboxedParam(_))
        ));
        let huge = SearchBox::new(
            vec![p("x"), p("y")],
            vec![(0, 200_000), (0, 200_000)],
        );
        assert!(matches!(
            search_box(&v("x"), &huge),
            Err(DiophError::BoxTooLarge(..))
        ));
    }

    #[test]
    fn quadratic_scan_simple_square() {
        // r^2 - 4 with a degenerate scan variable
        let poly = v("r").pow(2).sub(&PolyExpr::int(4));
        let sols = quadratic_scan(&poly, &p("r"), &p("s"), (0, 0)).unwrap();
        assert_eq!(sols, vec![(-2, 0), (2, 0)]);
    }

    #[test]
    fn quadratic_scan_divisibility_case() {
        // n (3r - 2) - 15r + 14, linear in n, scanned over r:
        // n = (15r - 14)/(3r - 2) is an integer only at r = 2 (n = 4)
        let poly = final_constraint();
        let sols = quadratic_scan(&poly, &p("n"), &p("r"), (2, 1000)).unwrap();
        assert_eq!(sols, vec![(4, 2)]);
        let seq = quadratic_scan_seq(&poly, &p("n"), &p("r"), (2, 1000)).unwrap();
        assert_eq!(sols, seq);
    }

    #[test]
    fn quadratic_scan_agrees_with_search_box() {
        // x^2 - s x + 2s - 4 has planted integer roots for several s
        let poly = v("x")
            .pow(2)
            .sub(&v("s").mul(&v("x")))
            .add(&v("s").scale(&rat(2)))
            .sub(&PolyExpr::int(4));
        let scan = quadratic_scan(&poly, &p("x"), &p("s"), (-20, 20)).unwrap();
        let bx = SearchBox::new(vec![p("x"), p("s")], vec![(-60, 60), (-20, 20)]);
        let brute = search_box_seq(&poly, &bx).unwrap();
        let mut from_scan: Vec<Vec<i64>> = scan
            .iter()
            .filter(|(x, _)| (-60..=60).contains(x))
            .map(|(x, s)| vec![*x, *s])
            .collect();
        from_scan.sort();
        let mut brute_sorted = brute;
        brute_sorted.sort();
        assert_eq!(from_scan, brute_sorted);
    }

    #[test]
    fn quadratic_scan_rejects_cubics() {
        let poly = v("r").pow(3).sub(&PolyExpr::one());
        assert!(matches!(
            quadratic_scan(&poly, &p("r"), &p("s"), (0, 1)),
            Err(DiophError::NotQuadratic(3))
        ));
    }

    #[test]
    fn quadratic_scan_degenerate_zero() {
        // s * r^2: at s = 0 every r solves, which is not enumerable
        let poly = v("s").mul(&v("r").pow(2));
        assert!(matches!(
            quadratic_scan(&poly, &p("r"), &p("s"), (0, 3)),
            Err(DiophError::DegenerateZero(_, 0))
        ));
    }

    #[test]
    fn root_bounds() {
        let b = rational_root_bound(&v("r").sub(&PolyExpr::int(5)), &p("r")).unwrap();
        assert_eq!(b.hi, Int::from(6));
        assert_eq!(b.lo, Int::from(-6));
        let b = rational_root_bound(&v("c1").pow(9), &p("c1")).unwrap();
        assert_eq!(b.hi, Int::from(1));
        // rational coefficients are fine
        let poly = v("x").pow(2).scale(&ratq(1, 3)).sub(&v("x").scale(&rat(2)));
        let b = rational_root_bound(&poly, &p("x")).unwrap();
        assert_eq!(b.hi, Int::from(7)); // 1 + |(-2)/(1/3)| = 7
        assert!(matches!(
            rational_root_bound(&PolyExpr::zero(), &p("x")),
            Err(DiophError::ZeroPolynomial)
        ));
    }
}
