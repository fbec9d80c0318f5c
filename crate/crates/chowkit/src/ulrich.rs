//! Numerical identities satisfied by Ulrich bundles, expressed as residual
//! polynomials (left side minus right side). A residual of exact zero, or a
//! residual solved for an unknown pairing value, is the basic move of every
//! derivation chain.

use thiserror::Error;

use crate::chern::FormalBundle;
use crate::chow::{
    c2_tangent, canonical_class, top_intersect, ChowClass, ChowError, ChowModel, DivisorCombo,
};
use crate::poly::{Param, PolyError, PolyExpr};
use crate::rat::{rat, ratq};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UlrichError {
    #[error(transparent)]
    Chow(#[from] ChowError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("linear-section restriction is only supported for threefold sections, got {0}")]
    UnsupportedSection(u32),
    #[error("chi polynomial is identically zero")]
    ZeroPolynomial,
}

/// A bundle on a model together with the classes the identities refer to.
/// `kx`/`c2x` default to the model's own canonical class and tangent c2;
/// a chain may pin different representatives.
#[derive(Clone, Debug)]
pub struct UlrichContext {
    pub bundle: FormalBundle,
    pub kx: Option<ChowClass>,
    pub c2x: Option<ChowClass>,
}

impl UlrichContext {
    pub fn new(bundle: FormalBundle) -> Self {
        UlrichContext {
            bundle,
            kx: None,
            c2x: None,
        }
    }

    pub fn model(&self) -> &ChowModel {
        &self.bundle.model
    }

    pub fn kx(&self) -> ChowClass {
        self.kx
            .clone()
            .unwrap_or_else(|| canonical_class(self.model()))
    }

    pub fn c2x(&self) -> Result<ChowClass, ChowError> {
        match &self.c2x {
            Some(c) => Ok(c.clone()),
            None => c2_tangent(self.model()),
        }
    }
}

/// c1(E) H^(n-1) - (r/2) (K_X + (n+1) H) H^(n-1).
pub fn residual_c1(ctx: &UlrichContext) -> Result<PolyExpr, UlrichError> {
    let m = ctx.model();
    let n = m.dim.as_poly();
    let k = ctx.kx();
    let lhs = top_intersect(&[ctx.bundle.c(1).clone()], m)?;
    let kh = k.add(&ChowClass::xi().scale(&n.add(&PolyExpr::int(1))));
    let rhs = top_intersect(&[kh], m)?
        .mul(&ctx.bundle.rank)
        .scale(&ratq(1, 2));
    Ok(lhs.sub(&rhs))
}

/// c2(E) H^(n-2) minus the rank-r Ulrich expression in c1, K_X, c2(X).
pub fn residual_c2(ctx: &UlrichContext) -> Result<PolyExpr, UlrichError> {
    let m = ctx.model();
    let n = m.dim.as_poly();
    let k = ctx.kx();
    let c2x = ctx.c2x()?;
    let c1 = ctx.bundle.c(1);
    let deg = m.xi_top();

    let lhs = top_intersect(&[ctx.bundle.c(2).clone()], m)?;
    let c1c1 = top_intersect(&[c1.clone(), c1.clone()], m)?;
    let c1k = top_intersect(&[c1.clone(), k.clone()], m)?;
    let kk = top_intersect(&[k.clone(), k], m)?;
    let c2x_top = top_intersect(&[c2x], m)?;
    // (3n^2 + 5n + 2)/2 * H^2 H^(n-2)
    let hterm = n
        .pow(2)
        .scale(&rat(3))
        .add(&n.scale(&rat(5)))
        .add(&PolyExpr::int(2))
        .scale(&ratq(1, 2))
        .mul(&deg);
    let rhs = c1c1
        .sub(&c1k)
        .scale(&ratq(1, 2))
        .add(
            &kk.add(&c2x_top)
                .sub(&hterm)
                .mul(&ctx.bundle.rank)
                .scale(&ratq(1, 12)),
        );
    Ok(lhs.sub(&rhs))
}

/// c3(E) H^(n-3) minus the rank-r Ulrich expression: c1 c2 - c1^3/3
/// + (c1^2 - 2 c2) K/2 - c1 (K^2 + c2(X))/6 + r K c2(X)/12
/// + r n (n+1)^2 d / 24.
pub fn residual_c3(ctx: &UlrichContext) -> Result<PolyExpr, UlrichError> {
    let m = ctx.model();
    let n = m.dim.as_poly();
    let k = ctx.kx();
    let c2x = ctx.c2x()?;
    let c1 = ctx.bundle.c(1);
    let c2 = ctx.bundle.c(2);
    let deg = m.xi_top();

    let lhs = top_intersect(&[ctx.bundle.c(3).clone()], m)?;
    let c1c2 = top_intersect(&[c1.clone(), c2.clone()], m)?;
    let c1cubed = top_intersect(&[c1.clone(), c1.clone(), c1.clone()], m)?;
    let c1c1k = top_intersect(&[c1.clone(), c1.clone(), k.clone()], m)?;
    let c2k = top_intersect(&[c2.clone(), k.clone()], m)?;
    let c1kk = top_intersect(&[c1.clone(), k.clone(), k.clone()], m)?;
    let c1c2x = top_intersect(&[c1.clone(), c2x.clone()], m)?;
    let kc2x = top_intersect(&[k, c2x], m)?;
    let dterm = ctx
        .bundle
        .rank
        .mul(&n)
        .mul(&n.add(&PolyExpr::int(1)).pow(2))
        .mul(&deg)
        .scale(&ratq(1, 24));

    let rhs = c1c2
        .sub(&c1cubed.scale(&ratq(1, 3)))
        .add(&c1c1k.sub(&c2k.scale(&rat(2))).scale(&ratq(1, 2)))
        .sub(&c1kk.add(&c1c2x).scale(&ratq(1, 6)))
        .add(&kc2x.mul(&ctx.bundle.rank).scale(&ratq(1, 12)))
        .add(&dterm);
    Ok(lhs.sub(&rhs))
}

/// Second Chern class of the tangent bundle of a threefold linear section,
/// kept as classes on the ambient:
/// c2(X)|_3 + (n-3) K_X H + (n-2)(n-3)/2 H^2.
pub fn c2_linear_section(
    c2x: &ChowClass,
    kx: &ChowClass,
    section_dim: u32,
    model: &ChowModel,
) -> Result<ChowClass, UlrichError> {
    if section_dim != 3 {
        return Err(UlrichError::UnsupportedSection(section_dim));
    }
    let n = model.dim.as_poly();
    let n3 = n.sub(&PolyExpr::int(3));
    let kh = kx.mul(&ChowClass::xi(), model)?;
    let h2 = ChowClass::xi_pow(2);
    Ok(c2x
        .add(&kh.scale(&n3))
        .add(&h2.scale(&n.sub(&PolyExpr::int(2)).mul(&n3).scale(&ratq(1, 2)))))
}

/// Euler characteristic of a bundle G on the surface base by
/// Riemann-Roch: rank * (K_B^2 + c2(B))/12 + c1(G).(c1(G) - K_B)/2 - c2(G).
pub fn rr_surface_bundle(
    model: &ChowModel,
    rank: &PolyExpr,
    c1g: &DivisorCombo,
    c2g: &PolyExpr,
) -> Result<PolyExpr, UlrichError> {
    let (kb, c2b) = match &model.config {
        crate::chow::ModelConfig::Surface { kb, c2b, .. } => (kb, c2b),
        _ => return Err(UlrichError::Chow(ChowError::NotSurfaceBase)),
    };
    let k2 = model.pair(kb, kb)?;
    let noether = k2.add(c2b).mul(rank).scale(&ratq(1, 12));
    let sq = model.pair(c1g, c1g)?;
    let mixed = model.pair(c1g, kb)?;
    Ok(noether
        .add(&sq.sub(&mixed).scale(&ratq(1, 2)))
        .sub(c2g))
}

/// True when a nonzero polynomial of degree < `required_roots` in `var` is
/// asked to vanish at that many distinct integers, which forces the zero
/// polynomial: the stock contradiction device for chi-vanishing chains.
pub fn chi_root_count(
    chi: &PolyExpr,
    var: &Param,
    required_roots: u32,
) -> Result<bool, UlrichError> {
    if chi.is_zero() {
        return Err(UlrichError::ZeroPolynomial);
    }
    Ok(chi.degree_in(var) < required_roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chern::{twist_line, whitney, FormalBundle};
    use crate::chow::fixtures::{pf2_model, pf_model, qf_model, sup_model};
    use crate::chow::{Dim, DivSym};
    use crate::poly::binom_poly;
    use std::sync::Arc;

    fn v(name: &str) -> PolyExpr {
        PolyExpr::var(name)
    }

    fn p(name: &str) -> Param {
        Param::new(name)
    }

    /// The residuals must vanish identically on a bundle known to satisfy
    /// the identities: O(2)^r pulled back from the second factor of
    /// P^2 x P^3 = P(O(1)^4).
    #[test]
    fn residuals_vanish_on_known_bundle() {
        let model = Arc::new(pf2_model());
        let m = &*model;
        let h2 = ChowClass::xi().sub(&ChowClass::divisor(DivisorCombo::sym(DivSym::new("R"))));
        let line = FormalBundle::line(h2.scale(&PolyExpr::int(2)), model.clone());
        for r in 1..=4i64 {
            let mut e = line.clone();
            for _ in 1..r {
                e = whitney(&e, &line).unwrap();
            }
            let ctx = UlrichContext::new(e);
            // substitute the actual invariants of O(1)^4 on P^2
            let sub = |pe: PolyExpr| {
                pe.substitute(&p("c1"), &PolyExpr::int(4))
                    .substitute(&p("c2"), &PolyExpr::int(6))
            };
            assert!(sub(residual_c1(&ctx).unwrap()).is_zero(), "c1 at r={}", r);
            assert!(sub(residual_c2(&ctx).unwrap()).is_zero(), "c2 at r={}", r);
            assert!(sub(residual_c3(&ctx).unwrap()).is_zero(), "c3 at r={}", r);
        }
    }

    #[test]
    fn residual_c1_curve_case() {
        // E with c1 = a (xi - f) on the n = 4 curve model: (a - r)(d - 1)
        let model = Arc::new(pf_model(Dim::Concrete(4)));
        let m = &*model;
        let c1 = ChowClass::xi().sub(&ChowClass::fiber(m)).scale(&v("a"));
        let mut e = FormalBundle::trivial(v("r"), model.clone());
        e.c[0] = c1;
        let res = residual_c1(&UlrichContext::new(e)).unwrap();
        let want = v("a")
            .sub(&v("r"))
            .mul(&v("d").sub(&PolyExpr::int(1)));
        assert_eq!(res, want);
    }

    #[test]
    fn residual_c1_qf_solves_to_printed_m1() {
        let model = Arc::new(qf_model());
        let m = &*model;
        let c1 = ChowClass::xi().add(&ChowClass::fiber(m).scale(&v("m1")));
        let mut e = FormalBundle::trivial(v("r"), model.clone());
        e.c[0] = c1;
        let res = residual_c1(&UlrichContext::new(e)).unwrap();
        let m1 = res.solve_linear(&p("m1")).unwrap();
        // m1 = (r (2d + 2g - 2 - e) - d)/2
        let want = v("r")
            .mul(
                &v("d")
                    .scale(&rat(2))
                    .add(&v("g").scale(&rat(2)))
                    .sub(&PolyExpr::int(2))
                    .sub(&v("e")),
            )
            .sub(&v("d"))
            .scale(&ratq(1, 2));
        assert_eq!(m1, want);
    }

    #[test]
    fn residual_c2_qf_solves_to_printed_m2() {
        let model = Arc::new(qf_model());
        let m = &*model;
        let c1 = ChowClass::xi().add(&ChowClass::fiber(m).scale(&v("m1")));
        let c2 = c1
            .mul(&ChowClass::fiber(m).scale(&v("m2")), m)
            .unwrap();
        let mut e = FormalBundle::trivial(v("r"), model.clone());
        e.c[0] = c1;
        e.c[1] = c2;
        let ctx = UlrichContext::new(e);
        let m1v = residual_c1(&ctx).unwrap().solve_linear(&p("m1")).unwrap();
        let res2 = residual_c2(&ctx).unwrap().substitute(&p("m1"), &m1v);
        let m2v = res2.solve_linear(&p("m2")).unwrap();
        // m2 = (4 - 3d + 2e - 4g - 4r + 4dr - 3er + 4gr)/4
        let want = PolyExpr::int(4)
            .sub(&v("d").scale(&rat(3)))
            .add(&v("e").scale(&rat(2)))
            .sub(&v("g").scale(&rat(4)))
            .sub(&v("r").scale(&rat(4)))
            .add(&v("d").mul(&v("r")).scale(&rat(4)))
            .sub(&v("e").mul(&v("r")).scale(&rat(3)))
            .add(&v("g").mul(&v("r")).scale(&rat(4)))
            .scale(&ratq(1, 4));
        assert_eq!(m2v, want);
        // combined with deg M = g - 1: m1 - m2 - (g-1) = (d + e(r-2))/4
        let dm = m1v.sub(&m2v).sub(&v("g")).add(&PolyExpr::one());
        let want = v("d")
            .add(&v("e").mul(&v("r").sub(&PolyExpr::int(2))))
            .scale(&ratq(1, 4));
        assert_eq!(dm, want);
        assert_eq!(dm.primitive().to_string(), "d - 2*e + e*r");
    }

    #[test]
    fn residuals_linear_in_chern_slots() {
        // residual(E with c2 += delta) - residual(E) depends only on delta
        let model = Arc::new(qf_model());
        let m = &*model;
        let c1 = ChowClass::xi().add(&ChowClass::fiber(m).scale(&v("m1")));
        let delta = ChowClass::fiber(m)
            .mul(&ChowClass::xi(), m)
            .unwrap()
            .scale(&v("t"));
        let mut e = FormalBundle::trivial(v("r"), model.clone());
        e.c[0] = c1;
        let base = residual_c2(&UlrichContext::new(e.clone())).unwrap();
        let mut e1 = e.clone();
        e1.c[1] = delta.clone();
        let shifted = residual_c2(&UlrichContext::new(e1)).unwrap();
        let diff1 = shifted.sub(&base);
        // same shift on a bundle with a different c2 gives the same diff
        let mut e2a = e.clone();
        e2a.c[1] = ChowClass::fiber(m)
            .mul(&ChowClass::xi(), m)
            .unwrap()
            .scale(&v("u"));
        let mut e2b = e2a.clone();
        e2b.c[1] = e2b.c[1].add(&delta);
        let diff2 = residual_c2(&UlrichContext::new(e2b))
            .unwrap()
            .sub(&residual_c2(&UlrichContext::new(e2a)).unwrap());
        assert_eq!(diff1, diff2);
    }

    #[test]
    fn c2_linear_section_cases() {
        let model = sup_model();
        let c2x = c2_tangent(&model).unwrap();
        let kx = canonical_class(&model);
        // symbolic: the three-term sum
        let got = c2_linear_section(&c2x, &kx, 3, &model).unwrap();
        let n = v("n");
        let want = c2x
            .add(
                &kx.mul(&ChowClass::xi(), &model)
                    .unwrap()
                    .scale(&n.sub(&PolyExpr::int(3))),
            )
            .add(&ChowClass::xi_pow(2).scale(
                &n.sub(&PolyExpr::int(2))
                    .mul(&n.sub(&PolyExpr::int(3)))
                    .scale(&ratq(1, 2)),
            ));
        assert_eq!(got, want);
        // n = 3: identity on c2(X)
        let mut m3 = model.clone();
        m3.dim = Dim::Concrete(3);
        let c2x3 = c2_tangent(&m3).unwrap();
        let k3 = canonical_class(&m3);
        assert_eq!(c2_linear_section(&c2x3, &k3, 3, &m3).unwrap(), c2x3);
        // n = 4: c2(X) + K H + H^2
        let mut m4 = model.clone();
        m4.dim = Dim::Concrete(4);
        let c2x4 = c2_tangent(&m4).unwrap();
        let k4 = canonical_class(&m4);
        let got = c2_linear_section(&c2x4, &k4, 3, &m4).unwrap();
        let want = c2x4
            .add(&k4.mul(&ChowClass::xi(), &m4).unwrap())
            .add(&ChowClass::xi_pow(2));
        assert_eq!(got, want);
        // only threefold sections are supported
        assert!(matches!(
            c2_linear_section(&c2x, &kx, 2, &model),
            Err(UlrichError::UnsupportedSection(2))
        ));
    }

    #[test]
    fn rr_surface_identities() {
        let model = sup_model();
        // chi(O_B) = (K^2 + c2B)/12
        let chi_o = rr_surface_bundle(
            &model,
            &PolyExpr::one(),
            &DivisorCombo::zero(),
            &PolyExpr::zero(),
        )
        .unwrap();
        assert_eq!(
            chi_o,
            v("k2").add(&v("c2B")).scale(&ratq(1, 12))
        );
        // chi(M) for M = M1 - M2 with M2^2 = 0:
        // (k2+c2B)/12 + m12/2 - m1m2 - km1/2 + km2/2
        let m1 = DivisorCombo::sym(DivSym::new("M1"));
        let m2 = DivisorCombo::sym(DivSym::new("M2"));
        let chi_m = rr_surface_bundle(
            &model,
            &PolyExpr::one(),
            &m1.add(&m2.scale(&PolyExpr::int(-1))),
            &PolyExpr::zero(),
        )
        .unwrap();
        let want = v("k2")
            .add(&v("c2B"))
            .scale(&ratq(1, 12))
            .add(&v("m12").scale(&ratq(1, 2)))
            .sub(&v("m1m2"))
            .sub(&v("km1").scale(&ratq(1, 2)))
            .add(&v("km2").scale(&ratq(1, 2)));
        assert_eq!(chi_m, want);
        // chi(H(-det F)), rank r-1, c1(H) = M2, c2(H) = 0:
        // twisted data has c1 = M2 - (r-1) C1F and
        // c2 = C(r-1,2) c12 - (r-2) c1m2, giving the surface-case identity
        let rk = v("r").sub(&PolyExpr::one());
        let c1f = DivisorCombo::sym(DivSym::new("C1F"));
        let c1g = m2.add(&c1f.scale(&rk.neg()));
        let c2g = binom_poly(&rk, 2)
            .mul(&v("c12"))
            .sub(&v("r").sub(&PolyExpr::int(2)).mul(&v("c1m2")));
        let chi_g = rr_surface_bundle(&model, &rk, &c1g, &c2g).unwrap();
        let want = rk
            .mul(&v("k2").add(&v("c2B")))
            .scale(&ratq(1, 12))
            .add(&rk.mul(&v("c12")).scale(&ratq(1, 2)))
            .sub(&v("c1m2"))
            .sub(&v("km2").scale(&ratq(1, 2)))
            .add(&rk.mul(&v("kc1")).scale(&ratq(1, 2)));
        assert_eq!(chi_g, want);
        // chi(L) - chi(O) = L(L - K)/2 exactly
        let l = DivisorCombo::sym(DivSym::new("M1"));
        let chi_l = rr_surface_bundle(&model, &PolyExpr::one(), &l, &PolyExpr::zero()).unwrap();
        assert_eq!(
            chi_l.sub(&chi_o),
            v("m12").sub(&v("km1")).scale(&ratq(1, 2))
        );
    }

    #[test]
    fn chi_root_count_cases() {
        let chi = binom_poly(&v("m").add(&PolyExpr::int(3)), 4);
        assert_eq!(chi.degree_in(&p("m")), 4);
        assert!(chi_root_count(&chi, &p("m"), 5).unwrap());
        assert!(!chi_root_count(&chi, &p("m"), 4).unwrap());
        assert!(chi_root_count(&PolyExpr::int(7), &p("m"), 1).unwrap());
        assert!(matches!(
            chi_root_count(&PolyExpr::zero(), &p("m"), 1),
            Err(UlrichError::ZeroPolynomial)
        ));
    }

    #[test]
    fn twisted_line_residual_on_known_bundle() {
        // twist invariance sanity: the pf2-case bundle twisted by zero
        // keeps its residuals
        let model = Arc::new(pf2_model());
        let m = &*model;
        let h2 = ChowClass::xi().sub(&ChowClass::divisor(DivisorCombo::sym(DivSym::new("R"))));
        let e = FormalBundle::line(h2.scale(&PolyExpr::int(2)), model.clone());
        let t = twist_line(&e, &ChowClass::zero()).unwrap();
        let r1a = residual_c1(&UlrichContext::new(e)).unwrap();
        let r1b = residual_c1(&UlrichContext::new(t)).unwrap();
        assert_eq!(r1a, r1b);
        let _ = m;
    }
}
