//! Formal Chern-class calculus for bundles of arbitrary rank, truncated at
//! the fourth class. Covers Whitney sums, duals, line-bundle twists and the
//! codimension-two and -three degeneracy-locus classes.

use std::sync::Arc;

use thiserror::Error;

use crate::chow::{ChowClass, ChowError, ChowModel};
use crate::poly::PolyExpr;
use crate::rat::{as_int, rat, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChernError {
    #[error("bundles live on different models")]
    ModelMismatch,
    #[error("twist with symbolic rank is supported only for the first Chern class")]
    SymbolicRankUnsupported,
    #[error("twisting class must be homogeneous of explicit degree 1, got {0}")]
    NotDegreeOne(String),
    #[error(transparent)]
    Chow(#[from] ChowError),
}

/// A bundle presented by its rank and Chern classes c1..c4 on a fixed
/// ambient model. Classes beyond c4 are truncated throughout.
#[derive(Clone, PartialEq, Debug)]
pub struct FormalBundle {
    pub rank: PolyExpr,
    pub c: [ChowClass; 4],
    pub model: Arc<ChowModel>,
}

impl FormalBundle {
    pub fn new(rank: PolyExpr, c: [ChowClass; 4], model: Arc<ChowModel>) -> Self {
        FormalBundle { rank, c, model }
    }

    pub fn trivial(rank: PolyExpr, model: Arc<ChowModel>) -> Self {
        FormalBundle {
            rank,
            c: [
                ChowClass::zero(),
                ChowClass::zero(),
                ChowClass::zero(),
                ChowClass::zero(),
            ],
            model,
        }
    }

    pub fn line(c1: ChowClass, model: Arc<ChowModel>) -> Self {
        FormalBundle {
            rank: PolyExpr::one(),
            c: [
                c1,
                ChowClass::zero(),
                ChowClass::zero(),
                ChowClass::zero(),
            ],
            model,
        }
    }

    /// c_k for k in 1..=4; c_0 is implicitly 1.
    pub fn c(&self, k: usize) -> &ChowClass {
        &self.c[k - 1]
    }

    pub fn det(&self) -> &ChowClass {
        &self.c[0]
    }

    fn concrete_rank(&self) -> Option<i64> {
        let c = self.rank.as_constant()?;
        let n = as_int(&c)?;
        i64::try_from(n).ok()
    }
}

/// Whitney sum: ranks add, total Chern classes multiply, truncated at
/// degree four.
pub fn whitney(a: &FormalBundle, b: &FormalBundle) -> Result<FormalBundle, ChernError> {
    if a.model != b.model {
        return Err(ChernError::ModelMismatch);
    }
    let m = &*a.model;
    let ca = |k: usize| -> ChowClass {
        match k {
            0 => ChowClass::one(),
            _ => a.c[k - 1].clone(),
        }
    };
    let cb = |k: usize| -> ChowClass {
        match k {
            0 => ChowClass::one(),
            _ => b.c[k - 1].clone(),
        }
    };
    let mut c = [
        ChowClass::zero(),
        ChowClass::zero(),
        ChowClass::zero(),
        ChowClass::zero(),
    ];
    for (k, slot) in c.iter_mut().enumerate() {
        let k = k + 1;
        let mut sum = ChowClass::zero();
        for i in 0..=k {
            sum = sum.add(&ca(i).mul(&cb(k - i), m)?);
        }
        *slot = sum;
    }
    Ok(FormalBundle {
        rank: a.rank.add(&b.rank),
        c,
        model: a.model.clone(),
    })
}

/// Dual bundle: c_i maps to (-1)^i c_i.
pub fn dual(b: &FormalBundle) -> FormalBundle {
    let mut c = b.c.clone();
    for (i, class) in c.iter_mut().enumerate() {
        if i % 2 == 0 {
            *class = class.neg();
        }
    }
    FormalBundle {
        rank: b.rank.clone(),
        c,
        model: b.model.clone(),
    }
}

fn binom_rat(top: i64, k: u32) -> Rat {
    let mut num = rat(1);
    for i in 0..k as i64 {
        num *= rat(top - i);
    }
    let mut den = rat(1);
    for i in 1..=k as i64 {
        den *= rat(i);
    }
    num / den
}

/// Twist by a line bundle: c_k(E(L)) = sum_i C(r - i, k - i) c_i(E) L^(k-i).
/// A symbolic rank is rejected because the binomials need an integer rank
/// as soon as k >= 2; use [`det_twist`] for the determinant alone.
pub fn twist_line(b: &FormalBundle, line: &ChowClass) -> Result<FormalBundle, ChernError> {
    if !line.is_zero() && line.homogeneous_degree() != Some(1) {
        return Err(ChernError::NotDegreeOne(line.to_string()));
    }
    let rank = b
        .concrete_rank()
        .ok_or(ChernError::SymbolicRankUnsupported)?;
    let m = &*b.model;
    let ci = |i: usize| -> ChowClass {
        match i {
            0 => ChowClass::one(),
            _ => b.c[i - 1].clone(),
        }
    };
    let mut c = [
        ChowClass::zero(),
        ChowClass::zero(),
        ChowClass::zero(),
        ChowClass::zero(),
    ];
    for (k, slot) in c.iter_mut().enumerate() {
        let k = k + 1;
        let mut sum = ChowClass::zero();
        for i in 0..=k {
            let coeff = binom_rat(rank - i as i64, (k - i) as u32);
            let lpow = line.pow((k - i) as u32, m)?;
            let term = ci(i)
                .mul(&lpow, m)?
                .scale(&PolyExpr::constant(coeff));
            sum = sum.add(&term);
        }
        *slot = sum;
    }
    Ok(FormalBundle {
        rank: b.rank.clone(),
        c,
        model: b.model.clone(),
    })
}

/// Determinant of the twist E(L): c1(E) + rank * L. Valid for symbolic
/// rank, which is the only symbolic-rank twist the calculus needs.
pub fn det_twist(b: &FormalBundle, line: &ChowClass) -> ChowClass {
    b.c[0].add(&line.scale(&b.rank))
}

/// Class of the codimension-two degeneracy locus of a general morphism
/// O^(r-1) -> E: c2^2 - c1 c3.
pub fn porteous_codim2(b: &FormalBundle) -> Result<ChowClass, ChernError> {
    let m = &*b.model;
    Ok(b.c(2).mul(b.c(2), m)?.sub(&b.c(1).mul(b.c(3), m)?))
}

/// Codimension-three degeneracy class, kept as the unevaluated pair
/// (c3^2, c2 c4); the difference is the class, but degree six truncates
/// on every model here so callers combine the parts after substitutions.
pub fn porteous_codim3(b: &FormalBundle) -> Result<(ChowClass, ChowClass), ChernError> {
    let m = &*b.model;
    Ok((b.c(3).mul(b.c(3), m)?, b.c(2).mul(b.c(4), m)?))
}

/// Schur class s_(2,2): identical to the codimension-two Porteous class.
pub fn schur_s22(b: &FormalBundle) -> Result<ChowClass, ChernError> {
    porteous_codim2(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chow::fixtures::{pf2_model, pf_model, sup_model};
    use crate::chow::{top_intersect, Dim, DivSym, DivisorCombo};
    use crate::poly::{binom_poly, Param};
    use crate::rat::ratq;

    fn v(name: &str) -> PolyExpr {
        PolyExpr::var(name)
    }

    /// Host for the pulled-back null-correlation example: only powers of
    /// the tautological class are used, so any model will do.
    fn host() -> Arc<ChowModel> {
        Arc::new(pf_model(Dim::Concrete(4)))
    }

    fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k > n {
            return Vec::new();
        }
        if k == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for first in 0..=n - k {
            for mut rest in k_subsets(n - first - 1, k - 1) {
                for x in rest.iter_mut() {
                    *x += first + 1;
                }
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    fn h() -> ChowClass {
        ChowClass::xi()
    }

    fn null_correlation(model: Arc<ChowModel>) -> FormalBundle {
        let m = &*model;
        let h2 = h().mul(&h(), m).unwrap();
        FormalBundle::new(
            PolyExpr::int(2),
            [ChowClass::zero(), h2, ChowClass::zero(), ChowClass::zero()],
            model.clone(),
        )
    }

    #[test]
    fn twist_null_correlation() {
        // c1 = 0, c2 = h^2 twisted by 6h gives c1 = 12h, c2 = 37h^2, c3 = 0
        let model = host();
        let n = null_correlation(model.clone());
        let e = twist_line(&n, &h().scale(&PolyExpr::int(6))).unwrap();
        let m = &*model;
        assert_eq!(e.c(1), &h().scale(&PolyExpr::int(12)));
        assert_eq!(
            e.c(2),
            &h().mul(&h(), m).unwrap().scale(&PolyExpr::int(37))
        );
        assert!(e.c(3).is_zero());
    }

    #[test]
    fn whitney_doubles_the_example() {
        // E with c = (12h, 37h^2, 0): E + E has c2 = 218h^2, c3 = 888h^3
        let model = host();
        let n = null_correlation(model.clone());
        let e = twist_line(&n, &h().scale(&PolyExpr::int(6))).unwrap();
        let ee = whitney(&e, &e).unwrap();
        let m = &*model;
        let h2 = h().mul(&h(), m).unwrap();
        let h3 = h2.mul(&h(), m).unwrap();
        assert_eq!(ee.rank, PolyExpr::int(4));
        assert_eq!(ee.c(1), &h().scale(&PolyExpr::int(24)));
        assert_eq!(ee.c(2), &h2.scale(&PolyExpr::int(218)));
        assert_eq!(ee.c(3), &h3.scale(&PolyExpr::int(888)));
    }

    #[test]
    fn whitney_with_trivial_is_identity_on_classes() {
        let model = host();
        let e = twist_line(&null_correlation(model.clone()), &h().scale(&PolyExpr::int(6)))
            .unwrap();
        let t = FormalBundle::trivial(v("s"), model);
        let sum = whitney(&e, &t).unwrap();
        assert_eq!(sum.rank, PolyExpr::int(2).add(&v("s")));
        assert_eq!(sum.c, e.c);
    }

    #[test]
    fn whitney_model_mismatch() {
        let a = FormalBundle::trivial(PolyExpr::one(), host());
        let b = FormalBundle::trivial(PolyExpr::one(), Arc::new(sup_model()));
        assert!(matches!(whitney(&a, &b), Err(ChernError::ModelMismatch)));
    }

    #[test]
    fn dual_is_an_involution() {
        let model = host();
        let e = twist_line(&null_correlation(model.clone()), &h().scale(&PolyExpr::int(6)))
            .unwrap();
        assert_eq!(dual(&dual(&e)), e);
        // line bundle L dualizes to -L
        let l = FormalBundle::line(h(), model);
        assert_eq!(dual(&l).c(1), &h().neg());
    }

    #[test]
    fn dual_then_det_twist_gives_fiber_multiple() {
        // E = (xi - f)^r on the curve model; det(E^*(K + 5 xi)) = r (d-1) f
        let model = Arc::new(pf_model(Dim::Concrete(4)));
        let m = &*model;
        let l = ChowClass::xi().sub(&ChowClass::fiber(m));
        let e = FormalBundle::new(
            v("r"),
            [
                l.scale(&v("r")),
                l.pow(2, m).unwrap().scale(&binom_poly(&v("r"), 2)),
                l.pow(3, m).unwrap().scale(&binom_poly(&v("r"), 3)),
                l.pow(4, m).unwrap().scale(&binom_poly(&v("r"), 4)),
            ],
            model.clone(),
        );
        let kx5 = crate::chow::canonical_class(m).add(&ChowClass::xi().scale(&PolyExpr::int(5)));
        let got = det_twist(&dual(&e), &kx5);
        let want = ChowClass::fiber(m).scale(&v("r").mul(&v("d").sub(&PolyExpr::int(1))));
        assert_eq!(got, want);
    }

    #[test]
    fn twist_symbolic_rank_rejected() {
        let model = host();
        let e = FormalBundle::trivial(v("r"), model);
        assert!(matches!(
            twist_line(&e, &h()),
            Err(ChernError::SymbolicRankUnsupported)
        ));
    }

    #[test]
    fn twist_by_zero_is_identity() {
        let model = host();
        let e = twist_line(&null_correlation(model), &h().scale(&PolyExpr::int(6))).unwrap();
        let t = twist_line(&e, &ChowClass::zero()).unwrap();
        assert_eq!(t, e);
    }

    #[test]
    fn twist_round_trip() {
        let model = host();
        let e = twist_line(&null_correlation(model), &h().scale(&PolyExpr::int(6))).unwrap();
        let l = h().scale(&PolyExpr::int(3));
        let back = twist_line(&twist_line(&e, &l).unwrap(), &l.neg()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn det_compatibility() {
        let model = host();
        let m = &*model;
        let a = twist_line(&null_correlation(model.clone()), &h().scale(&PolyExpr::int(6)))
            .unwrap();
        let b = FormalBundle::line(h().scale(&PolyExpr::int(2)), model.clone());
        // c1(a + b) = c1(a) + c1(b)
        assert_eq!(
            whitney(&a, &b).unwrap().c(1),
            &a.c(1).add(b.c(1))
        );
        // c1(b(L)) = c1(b) + rank L
        let l = h().scale(&PolyExpr::int(5));
        assert_eq!(
            twist_line(&a, &l).unwrap().c(1),
            &a.c(1).add(&l.scale(&PolyExpr::int(2)))
        );
        let _ = m;
    }

    #[test]
    fn porteous_and_schur() {
        let model = host();
        let m = &*model;
        let e = twist_line(&null_correlation(model.clone()), &h().scale(&PolyExpr::int(6)))
            .unwrap();
        let h4 = h().pow(4, m).unwrap();
        // c2^2 - c1 c3 = 1369 h^4 for (12h, 37h^2, 0)
        assert_eq!(
            porteous_codim2(&e).unwrap(),
            h4.scale(&PolyExpr::int(1369))
        );
        // for the doubled bundle: 218^2 - 24*888 = 26212
        let ee = whitney(&e, &e).unwrap();
        assert_eq!(
            porteous_codim2(&ee).unwrap(),
            h4.scale(&PolyExpr::int(26212))
        );
        assert_eq!(schur_s22(&ee).unwrap(), porteous_codim2(&ee).unwrap());
        // with c3 = c4 = 0 the codimension-three parts vanish
        let (a, b) = porteous_codim3(&e).unwrap();
        assert!(a.is_zero() && b.is_zero());
        // c2 = 0 leaves c3^2
        let mut only3 = FormalBundle::trivial(PolyExpr::int(3), model.clone());
        only3.c[2] = h().pow(3, m).unwrap();
        let (a, b) = porteous_codim3(&only3).unwrap();
        assert_eq!(a, h().pow(6, m).unwrap());
        assert!(b.is_zero());
    }

    #[test]
    fn splitting_principle_oracle() {
        // For sums of line bundles, Whitney-folded classes must equal the
        // elementary symmetric polynomials computed directly by summing
        // over index subsets.
        let model = Arc::new(pf2_model());
        let m = &*model;
        let r_sym = DivSym::new("R");
        let lines: Vec<ChowClass> = (0..5)
            .map(|i| {
                ChowClass::xi()
                    .scale(&PolyExpr::int((i % 3) as i64 - 1))
                    .add(&ChowClass::divisor(DivisorCombo::of([(
                        r_sym.clone(),
                        PolyExpr::int((i as i64) - 2),
                    )])))
            })
            .collect();
        for rank in 2..=5usize {
            let ls = &lines[..rank];
            let mut sum = FormalBundle::line(ls[0].clone(), model.clone());
            for l in &ls[1..] {
                sum = whitney(&sum, &FormalBundle::line(l.clone(), model.clone())).unwrap();
            }
            for k in 1..=4usize {
                // e_k = sum over k-subsets of the product of the chosen lines
                let mut ek = ChowClass::zero();
                for subset in k_subsets(rank, k) {
                    let mut prod = ChowClass::one();
                    for i in subset {
                        prod = prod.mul(&ls[i], m).unwrap();
                    }
                    ek = ek.add(&prod);
                }
                assert_eq!(sum.c(k), &ek, "rank {} c{}", rank, k);
            }
        }
    }

    #[test]
    fn r_fold_line_sum_matches_binomials() {
        // concrete r-fold Whitney sums of one line bundle agree with the
        // binomial closed form used for symbolic rank
        let model = Arc::new(pf_model(Dim::Concrete(4)));
        let m = &*model;
        let l = ChowClass::xi().sub(&ChowClass::fiber(m));
        for r in 2..=5u32 {
            let mut sum = FormalBundle::line(l.clone(), model.clone());
            for _ in 1..r {
                sum = whitney(&sum, &FormalBundle::line(l.clone(), model.clone())).unwrap();
            }
            for k in 1..=4u32 {
                let want = l
                    .pow(k, m)
                    .unwrap()
                    .scale(&binom_poly(&PolyExpr::int(r as i64), k));
                assert_eq!(sum.c(k as usize), &want, "r {} c{}", r, k);
            }
        }
        // top value of c2^2 for the r-fold sum is C(r,2)^2 (d - 4)
        let r = 3i64;
        let mut sum = FormalBundle::line(l.clone(), model.clone());
        for _ in 1..r {
            sum = whitney(&sum, &FormalBundle::line(l.clone(), model.clone())).unwrap();
        }
        let c22 = top_intersect(&[sum.c(2).clone(), sum.c(2).clone()], m).unwrap();
        let want = binom_poly(&PolyExpr::int(r), 2)
            .pow(2)
            .mul(&v("d").sub(&PolyExpr::int(4)));
        assert_eq!(c22, want);
        let n4 = Param::new("d");
        let _ = n4;
        let _ = ratq(1, 2);
    }
}
