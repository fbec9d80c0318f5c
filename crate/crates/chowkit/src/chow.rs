//! Graded class representation and top-intersection evaluation on three
//! fibration families: projective bundles over a curve, projective bundles
//! over a surface, and hyperquadric fibrations over a curve.
//!
//! Classes store small explicit powers of the tautological class together
//! with pulled-back base content; evaluation pads with the missing power
//! of the tautological class, so a symbolic fiber dimension costs nothing.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Signed;
use thiserror::Error;

use crate::poly::{binom_poly, Param, PolyExpr};
use crate::rat::{as_int, rat, ratq, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChowError {
    #[error("pairing table is missing an entry for ({0}, {1})")]
    IncompletePairingTable(String, String),
    #[error("explicit degree {degree} exceeds the top degree {top}")]
    DegreeOverflow { degree: u32, top: u32 },
    #[error("factor is not homogeneous: {0}")]
    InhomogeneousFactor(String),
    #[error("operation needs a surface-base model")]
    NotSurfaceBase,
    #[error("operation needs a concrete dimension: {0}")]
    SymbolicDimension(String),
}

/// A declared divisor symbol on the base of a fibration.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DivSym(Arc<str>);

impl DivSym {
    pub fn new(name: impl AsRef<str>) -> Self {
        DivSym(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for DivSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for DivSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A formal combination of base divisor symbols with polynomial
/// coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DivisorCombo(BTreeMap<DivSym, PolyExpr>);

impl DivisorCombo {
    pub fn zero() -> Self {
        DivisorCombo::default()
    }

    pub fn sym(s: DivSym) -> Self {
        let mut m = BTreeMap::new();
        m.insert(s, PolyExpr::one());
        DivisorCombo(m)
    }

    pub fn of(parts: impl IntoIterator<Item = (DivSym, PolyExpr)>) -> Self {
        let mut out = DivisorCombo::zero();
        for (s, c) in parts {
            out.add_term(s, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DivSym, &PolyExpr)> {
        self.0.iter()
    }

    fn add_term(&mut self, s: DivSym, c: PolyExpr) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(s) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &DivisorCombo) -> DivisorCombo {
        let mut out = self.clone();
        for (s, c) in other.terms() {
            out.add_term(s.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &PolyExpr) -> DivisorCombo {
        let mut out = DivisorCombo::zero();
        for (s, c) in self.terms() {
            out.add_term(s.clone(), c.mul(k));
        }
        out
    }
}

/// Symmetric table of products of base divisor symbols on a surface base.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PairingTable(BTreeMap<(DivSym, DivSym), PolyExpr>);

impl PairingTable {
    pub fn new() -> Self {
        PairingTable::default()
    }

    fn key(a: &DivSym, b: &DivSym) -> (DivSym, DivSym) {
        if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        }
    }

    pub fn set(&mut self, a: &DivSym, b: &DivSym, value: PolyExpr) {
        self.0.insert(Self::key(a, b), value);
    }

    pub fn get(&self, a: &DivSym, b: &DivSym) -> Result<&PolyExpr, ChowError> {
        self.0.get(&Self::key(a, b)).ok_or_else(|| {
            ChowError::IncompletePairingTable(a.name().to_string(), b.name().to_string())
        })
    }

    /// Check that every unordered pair of the declared symbols has an entry.
    pub fn validate(&self, symbols: &[DivSym]) -> Result<(), ChowError> {
        for (i, a) in symbols.iter().enumerate() {
            for b in &symbols[i..] {
                self.get(a, b)?;
            }
        }
        Ok(())
    }

    pub fn pair(&self, a: &DivisorCombo, b: &DivisorCombo) -> Result<PolyExpr, ChowError> {
        let mut out = PolyExpr::zero();
        for (sa, ca) in a.terms() {
            for (sb, cb) in b.terms() {
                out = out.add(&self.get(sa, sb)?.mul(ca).mul(cb));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModelKind {
    PBundleOverCurve,
    PBundleOverSurface,
    HyperquadricOverCurve,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::PBundleOverCurve => write!(f, "pcurve"),
            ModelKind::PBundleOverSurface => write!(f, "psurface"),
            ModelKind::HyperquadricOverCurve => write!(f, "hyperquadric"),
        }
    }
}

/// The ambient dimension n, which may stay a formal parameter.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Dim {
    Symbolic(Param),
    Concrete(u32),
}

impl Dim {
    pub fn as_poly(&self) -> PolyExpr {
        match self {
            Dim::Symbolic(p) => PolyExpr::param(p),
            Dim::Concrete(k) => PolyExpr::int(*k as i64),
        }
    }

    pub fn concrete(&self) -> Option<u32> {
        match self {
            Dim::Concrete(k) => Some(*k),
            Dim::Symbolic(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ModelConfig {
    /// P(F) -> B with B a smooth curve; divisor classes on B are
    /// identified with their degrees, `f` is the fiber class.
    Curve { genus: PolyExpr, deg_f: PolyExpr },
    /// Hyperquadric fibration over a curve: H^n = d, H^(n-1) F = 2,
    /// F^2 = 0; `deg_e` is the degree of the defining rank-(n+1) bundle.
    Hyperquadric {
        genus: PolyExpr,
        deg: PolyExpr,
        deg_e: PolyExpr,
    },
    /// P(F) -> B with B a smooth surface; products of base divisors
    /// resolve through the pairing table.
    Surface {
        symbols: Vec<DivSym>,
        pairing: PairingTable,
        c1f: DivisorCombo,
        c2f: PolyExpr,
        kb: DivisorCombo,
        c2b: PolyExpr,
        xi_top: PolyExpr,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChowModel {
    pub kind: ModelKind,
    pub dim: Dim,
    pub config: ModelConfig,
}

pub const CURVE_FIBER: &str = "f";
pub const HYPERQUADRIC_FIBER: &str = "F";

impl ChowModel {
    pub fn curve(genus: PolyExpr, deg_f: PolyExpr, dim: Dim) -> Self {
        ChowModel {
            kind: ModelKind::PBundleOverCurve,
            dim,
            config: ModelConfig::Curve { genus, deg_f },
        }
    }

    pub fn hyperquadric(genus: PolyExpr, deg: PolyExpr, deg_e: PolyExpr, dim: Dim) -> Self {
        ChowModel {
            kind: ModelKind::HyperquadricOverCurve,
            dim,
            config: ModelConfig::Hyperquadric { genus, deg, deg_e },
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn surface(
        symbols: Vec<DivSym>,
        pairing: PairingTable,
        c1f: DivisorCombo,
        c2f: PolyExpr,
        kb: DivisorCombo,
        c2b: PolyExpr,
        xi_top: Option<PolyExpr>,
        dim: Dim,
    ) -> Result<Self, ChowError> {
        pairing.validate(&symbols)?;
        let derived = pairing.pair(&c1f, &c1f)?.sub(&c2f);
        let xi_top = xi_top.unwrap_or(derived);
        Ok(ChowModel {
            kind: ModelKind::PBundleOverSurface,
            dim,
            config: ModelConfig::Surface {
                symbols,
                pairing,
                c1f,
                c2f,
                kb,
                c2b,
                xi_top,
            },
        })
    }

    pub fn base_dim(&self) -> u8 {
        match self.kind {
            ModelKind::PBundleOverSurface => 2,
            _ => 1,
        }
    }

    /// Degree of the polarization: the value of the full power of the
    /// tautological class.
    pub fn xi_top(&self) -> PolyExpr {
        match &self.config {
            ModelConfig::Curve { deg_f, .. } => deg_f.clone(),
            ModelConfig::Hyperquadric { deg, .. } => deg.clone(),
            ModelConfig::Surface { xi_top, .. } => xi_top.clone(),
        }
    }

    pub fn fiber_symbol(&self) -> Option<DivSym> {
        match self.kind {
            ModelKind::PBundleOverCurve => Some(DivSym::new(CURVE_FIBER)),
            ModelKind::HyperquadricOverCurve => Some(DivSym::new(HYPERQUADRIC_FIBER)),
            ModelKind::PBundleOverSurface => None,
        }
    }

    pub fn declared_symbols(&self) -> Vec<DivSym> {
        match &self.config {
            ModelConfig::Surface { symbols, .. } => symbols.clone(),
            _ => vec![self.fiber_symbol().unwrap()],
        }
    }

    pub fn pair(&self, a: &DivisorCombo, b: &DivisorCombo) -> Result<PolyExpr, ChowError> {
        match &self.config {
            ModelConfig::Surface { pairing, .. } => pairing.pair(a, b),
            _ => Ok(PolyExpr::zero()),
        }
    }

    /// Value of xi^(n-1) * pi^*(combo).
    fn eval_divisor(&self, combo: &DivisorCombo) -> Result<PolyExpr, ChowError> {
        match &self.config {
            ModelConfig::Curve { .. } => {
                let mut out = PolyExpr::zero();
                for (_, c) in combo.terms() {
                    out = out.add(c);
                }
                Ok(out)
            }
            ModelConfig::Hyperquadric { .. } => {
                let mut out = PolyExpr::zero();
                for (_, c) in combo.terms() {
                    out = out.add(&c.scale(&rat(2)));
                }
                Ok(out)
            }
            ModelConfig::Surface { pairing, c1f, .. } => pairing.pair(c1f, combo),
        }
    }
}

/// Base content of one class term, by base codimension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BaseContent {
    Scalar(PolyExpr),
    Divisor(DivisorCombo),
    Point(PolyExpr),
}

impl BaseContent {
    fn degree(&self) -> u8 {
        match self {
            BaseContent::Scalar(_) => 0,
            BaseContent::Divisor(_) => 1,
            BaseContent::Point(_) => 2,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            BaseContent::Scalar(p) | BaseContent::Point(p) => p.is_zero(),
            BaseContent::Divisor(d) => d.is_zero(),
        }
    }

    fn add(&self, other: &BaseContent) -> BaseContent {
        match (self, other) {
            (BaseContent::Scalar(a), BaseContent::Scalar(b)) => BaseContent::Scalar(a.add(b)),
            (BaseContent::Divisor(a), BaseContent::Divisor(b)) => BaseContent::Divisor(a.add(b)),
            (BaseContent::Point(a), BaseContent::Point(b)) => BaseContent::Point(a.add(b)),
            _ => unreachable!("mismatched base degrees"),
        }
    }

    fn scale(&self, k: &PolyExpr) -> BaseContent {
        match self {
            BaseContent::Scalar(a) => BaseContent::Scalar(a.mul(k)),
            BaseContent::Divisor(a) => BaseContent::Divisor(a.scale(k)),
            BaseContent::Point(a) => BaseContent::Point(a.mul(k)),
        }
    }
}

/// A formal sum of terms xi^p * pi^*(content); the explicit degree of a
/// term is p plus the base codimension of its content.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ChowClass {
    terms: BTreeMap<(u32, u8), BaseContent>,
}

impl ChowClass {
    pub fn zero() -> Self {
        ChowClass::default()
    }

    pub fn one() -> Self {
        ChowClass::scalar(PolyExpr::one())
    }

    pub fn scalar(p: PolyExpr) -> Self {
        let mut c = ChowClass::zero();
        c.insert(0, BaseContent::Scalar(p));
        c
    }

    /// The tautological class.
    pub fn xi() -> Self {
        ChowClass::xi_pow(1)
    }

    pub fn xi_pow(k: u32) -> Self {
        let mut c = ChowClass::zero();
        c.insert(k, BaseContent::Scalar(PolyExpr::one()));
        c
    }

    pub fn divisor(combo: DivisorCombo) -> Self {
        let mut c = ChowClass::zero();
        c.insert(0, BaseContent::Divisor(combo));
        c
    }

    pub fn point(p: PolyExpr) -> Self {
        let mut c = ChowClass::zero();
        c.insert(0, BaseContent::Point(p));
        c
    }

    /// The class of a fiber of the bundle map: pull-back of a point of the
    /// base, with the appropriate base codimension per model.
    pub fn fiber(model: &ChowModel) -> Self {
        match model.fiber_symbol() {
            Some(s) => ChowClass::divisor(DivisorCombo::sym(s)),
            None => ChowClass::point(PolyExpr::one()),
        }
    }

    fn insert(&mut self, xi_pow: u32, content: BaseContent) {
        if content.is_zero() {
            return;
        }
        let key = (xi_pow, content.degree());
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(content);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&content);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u8), &BaseContent)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &ChowClass) -> ChowClass {
        let mut out = self.clone();
        for ((p, _), c) in other.terms.iter() {
            out.insert(*p, c.clone());
        }
        out
    }

    pub fn neg(&self) -> ChowClass {
        self.scale(&PolyExpr::int(-1))
    }

    pub fn sub(&self, other: &ChowClass) -> ChowClass {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &PolyExpr) -> ChowClass {
        let mut out = ChowClass::zero();
        for ((p, _), c) in self.terms.iter() {
            out.insert(*p, c.scale(k));
        }
        out
    }

    /// Explicit degree when homogeneous, `None` for mixed classes.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut deg = None;
        for (p, b) in self.terms.keys() {
            let d = p + *b as u32;
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 == d => {}
                Some(_) => return None,
            }
        }
        deg
    }

    /// Bilinear product; base degree beyond the base dimension truncates
    /// to zero, and degree-one base products resolve through the model.
    pub fn mul(&self, other: &ChowClass, model: &ChowModel) -> Result<ChowClass, ChowError> {
        let base_dim = model.base_dim();
        let mut out = ChowClass::zero();
        for ((p1, b1), c1) in self.terms.iter() {
            for ((p2, b2), c2) in other.terms.iter() {
                if b1 + b2 > base_dim {
                    continue;
                }
                let p = p1 + p2;
                let content = match (c1, c2) {
                    (BaseContent::Scalar(a), b) | (b, BaseContent::Scalar(a)) => b.scale(a),
                    (BaseContent::Divisor(a), BaseContent::Divisor(b)) => {
                        BaseContent::Point(model.pair(a, b)?)
                    }
                    _ => unreachable!("base degrees above the base dimension are skipped"),
                };
                out.insert(p, content);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32, model: &ChowModel) -> Result<ChowClass, ChowError> {
        let mut out = ChowClass::one();
        for _ in 0..k {
            out = out.mul(self, model)?;
        }
        Ok(out)
    }
}

impl fmt::Display for ChowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // xi power descending, then base degree ascending
        let mut keys: Vec<&(u32, u8)> = self.terms.keys().collect();
        keys.sort_by(|(p1, b1), (p2, b2)| p2.cmp(p1).then(b1.cmp(b2)));
        let mut first = true;
        for key in keys {
            let (p, _) = key;
            match &self.terms[key] {
                BaseContent::Scalar(c) => write_term(f, &mut first, c, *p, None)?,
                BaseContent::Divisor(combo) => {
                    for (s, c) in combo.terms() {
                        write_term(f, &mut first, c, *p, Some(format!("pi({})", s)))?;
                    }
                }
                BaseContent::Point(c) => write_term(f, &mut first, c, *p, Some("pt".into()))?,
            }
        }
        Ok(())
    }
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    first: &mut bool,
    coeff: &PolyExpr,
    xi_pow: u32,
    base: Option<String>,
) -> fmt::Result {
    if coeff.is_zero() {
        return Ok(());
    }
    let (neg, mag) = match coeff.as_constant() {
        Some(c) if c.is_negative() => (true, PolyExpr::constant(-c)),
        Some(c) => (false, PolyExpr::constant(c)),
        None => (false, coeff.clone()),
    };
    if *first {
        if neg {
            write!(f, "-")?;
        }
        *first = false;
    } else if neg {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let mut factors: Vec<String> = Vec::new();
    if mag != PolyExpr::one() {
        if mag.num_terms() > 1 {
            factors.push(format!("({})", mag));
        } else {
            factors.push(mag.to_string());
        }
    }
    if xi_pow == 1 {
        factors.push("xi".to_string());
    } else if xi_pow > 1 {
        factors.push(format!("xi^{}", xi_pow));
    }
    if let Some(b) = base {
        factors.push(b);
    }
    if factors.is_empty() {
        factors.push("1".to_string());
    }
    write!(f, "{}", factors.join("*"))
}

/// Evaluate the product of homogeneous factors against the complementary
/// power of the tautological class.
pub fn top_intersect(factors: &[ChowClass], model: &ChowModel) -> Result<PolyExpr, ChowError> {
    let mut degree = 0u32;
    let mut prod = ChowClass::one();
    for fac in factors {
        if fac.is_zero() {
            return Ok(PolyExpr::zero());
        }
        let d = fac
            .homogeneous_degree()
            .filter(|_| {
                // all terms of equal explicit degree
                let degs: Vec<u32> = fac.terms.keys().map(|(p, b)| p + *b as u32).collect();
                degs.windows(2).all(|w| w[0] == w[1])
            })
            .ok_or_else(|| ChowError::InhomogeneousFactor(fac.to_string()))?;
        degree += d;
        prod = prod.mul(fac, model)?;
    }
    if let Some(n) = model.dim.concrete() {
        if degree > n {
            return Err(ChowError::DegreeOverflow { degree, top: n });
        }
    }
    let mut out = PolyExpr::zero();
    for (_, content) in prod.terms() {
        let v = match content {
            BaseContent::Scalar(c) => c.mul(&model.xi_top()),
            BaseContent::Divisor(combo) => model.eval_divisor(combo)?,
            BaseContent::Point(c) => c.clone(),
        };
        out = out.add(&v);
    }
    Ok(out)
}

/// The canonical class of the model.
pub fn canonical_class(model: &ChowModel) -> ChowClass {
    let n = model.dim.as_poly();
    match &model.config {
        ModelConfig::Curve { genus, deg_f } => {
            // K = -n xi + (2g - 2 + deg F) f
            let fdeg = genus.scale(&rat(2)).sub(&PolyExpr::int(2)).add(deg_f);
            ChowClass::xi()
                .scale(&n.neg())
                .add(&ChowClass::fiber(model).scale(&fdeg))
        }
        ModelConfig::Hyperquadric { genus, deg, deg_e } => {
            // K = -(n-1) H + (d + 2g - 2 - e) F
            let fdeg = deg
                .add(&genus.scale(&rat(2)))
                .sub(&PolyExpr::int(2))
                .sub(deg_e);
            ChowClass::xi()
                .scale(&n.sub(&PolyExpr::int(1)).neg())
                .add(&ChowClass::fiber(model).scale(&fdeg))
        }
        ModelConfig::Surface { c1f, kb, .. } => {
            // K = -(n-1) xi + pi^*(K_B) + pi^*(c1 F)
            ChowClass::xi()
                .scale(&n.sub(&PolyExpr::int(1)).neg())
                .add(&ChowClass::divisor(kb.add(c1f)))
        }
    }
}

/// Second Chern class of the tangent bundle, from the relative Euler
/// sequence and the base sequence of the fibration.
pub fn c2_tangent(model: &ChowModel) -> Result<ChowClass, ChowError> {
    let n = model.dim.as_poly();
    match &model.config {
        ModelConfig::Curve { genus, deg_f } => {
            // rank F = n: C(n,2) xi^2 - xi pi^*((n-1) c1F + n K_B)
            let quad = binom_poly(&n, 2);
            let fdeg = n
                .sub(&PolyExpr::int(1))
                .mul(deg_f)
                .add(&n.mul(&genus.scale(&rat(2)).sub(&PolyExpr::int(2))));
            Ok(ChowClass::xi_pow(2)
                .scale(&quad)
                .add(&ChowClass::xi().mul(&ChowClass::fiber(model).scale(&fdeg.neg()), model)?))
        }
        ModelConfig::Hyperquadric { genus, deg, deg_e } => {
            // (n^2 - 3n + 4)/2 H^2 + (-2 + 3d - 4e + 2g + 2n - dn + en - 2gn) H F
            let quad = n
                .pow(2)
                .sub(&n.scale(&rat(3)))
                .add(&PolyExpr::int(4))
                .scale(&ratq(1, 2));
            let lin = PolyExpr::int(-2)
                .add(&deg.scale(&rat(3)))
                .sub(&deg_e.scale(&rat(4)))
                .add(&genus.scale(&rat(2)))
                .add(&n.scale(&rat(2)))
                .sub(&deg.mul(&n))
                .add(&deg_e.mul(&n))
                .sub(&genus.mul(&n).scale(&rat(2)));
            Ok(ChowClass::xi_pow(2)
                .scale(&quad)
                .add(&ChowClass::xi().mul(&ChowClass::fiber(model).scale(&lin), model)?))
        }
        ModelConfig::Surface {
            pairing,
            c1f,
            c2f,
            kb,
            c2b,
            ..
        } => {
            // rank F = n-1:
            //   C(n-1,2) xi^2 - (n-2) xi pi^*(c1F) - (n-1) xi pi^*(K_B)
            //   + pi^*(c2F + K_B.c1F + c2B)
            let quad = binom_poly(&n.sub(&PolyExpr::int(1)), 2);
            let lin = c1f
                .scale(&n.sub(&PolyExpr::int(2)).neg())
                .add(&kb.scale(&n.sub(&PolyExpr::int(1)).neg()));
            let pt = c2f.add(&pairing.pair(kb, c1f)?).add(c2b);
            Ok(ChowClass::xi_pow(2)
                .scale(&quad)
                .add(&ChowClass::xi().mul(&ChowClass::divisor(lin), model)?)
                .add(&ChowClass::point(pt)))
        }
    }
}

/// Check that the evaluation rules agree with the defining relation of the
/// model: the top power of the tautological class computed directly must
/// equal the value obtained by expanding one power through the base.
pub fn relation_consistency_check(model: &ChowModel) -> Result<bool, ChowError> {
    let direct = top_intersect(&[ChowClass::xi()], model)?;
    let via_base = match &model.config {
        ModelConfig::Curve { deg_f, .. } => {
            // xi^n = xi^(n-1) pi^*(det F)
            top_intersect(&[ChowClass::fiber(model).scale(deg_f)], model)?
        }
        ModelConfig::Hyperquadric { deg, .. } => {
            // H^n = (d/2) H^(n-1) F
            top_intersect(
                &[ChowClass::fiber(model).scale(&deg.scale(&ratq(1, 2)))],
                model,
            )?
        }
        ModelConfig::Surface { c1f, c2f, .. } => {
            // xi^n = xi^(n-1) pi^*(c1 F) - xi^(n-2) pi^*(c2 F)
            top_intersect(&[ChowClass::divisor(c1f.clone())], model)?.sub(c2f)
        }
    };
    Ok(direct == via_base)
}

/// Largest k with a nonzero top value of the k-th power of `class`,
/// evaluated at a concrete assignment; zero for the zero class.
pub fn numerical_dimension(
    class: &ChowClass,
    model: &ChowModel,
    assignment: &BTreeMap<Param, Rat>,
) -> Result<u32, ChowError> {
    let n = match model.dim.concrete() {
        Some(n) => n,
        None => {
            let p = match &model.dim {
                Dim::Symbolic(p) => p.clone(),
                Dim::Concrete(_) => unreachable!(),
            };
            let v = assignment
                .get(&p)
                .and_then(as_int)
                .ok_or_else(|| ChowError::SymbolicDimension(p.name().to_string()))?;
            u32::try_from(v).map_err(|_| ChowError::SymbolicDimension(p.name().to_string()))?
        }
    };
    if class.is_zero() {
        return Ok(0);
    }
    for k in (1..=n).rev() {
        let factors = vec![class.clone(); k as usize];
        let value = top_intersect(&factors, model)?;
        let v = value
            .eval(assignment)
            .map_err(|e| ChowError::SymbolicDimension(e.to_string()))?;
        if !num_traits::Zero::is_zero(&v) {
            return Ok(k);
        }
    }
    Ok(0)
}
