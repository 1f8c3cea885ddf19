//! Kummer covers of open curves: ramification descriptions, automorphism
//! groups carried by explicit monomial rules, inertia subgroups with their
//! canonical characters, and the conjugation action of Frobenius.
//!
//! A cover of U = X - Z is cut out by classes (d_i, d'_i, f_i) with
//! n d_i = div(f_i) + d'_i; the total space is the normalization of X in
//! the field obtained by adjoining n-th roots z_i of the functions f_i.
//! Every automorphism over an automorphism of the base acts on the roots
//! by a monomial rule z_i -> h_i prod_j z_j^{e_ij} with rational functions
//! h_i on X and exponents reduced mod n. That expression is unique, so
//! automorphisms are stored and compared by value, groups are assembled by
//! plain closure under composition, and inertia is read off leading
//! coefficients at the point in question; the total space itself is never
//! materialized.

use crate::curve::{
    divisor_of_function, h1_decompose, lc_at, Curve, CurveFn, Divisor, H1Triple, Point,
};
use crate::error::{Error, Result};
use crate::field::{FieldTower, Fq, Poly};
use crate::group::{closure_under, group_from_concrete, FiniteGroup};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Cap on the order of the groups assembled by closure.
const CLOSURE_BOUND: usize = 4096;

/// Cap on the order of a single base automorphism when searching for its
/// inverse by repeated composition.
const BASE_ORDER_BOUND: usize = 1024;

/// Cap on the covering degree n^t of a Kummer cover.
const DEGREE_BOUND: u64 = 4096;

// ---------------------------------------------------------------------------
// Canonical uniformizers as functions.
// ---------------------------------------------------------------------------

/// The canonical uniformizer at a point, as a rational function: x - x0 at
/// affine points of the line and at non-Weierstrass affine points of
/// hyperelliptic models, y at Weierstrass points, 1/x at infinity on the
/// line and on degree 6 models, x/y at infinity on degree 3 models, and
/// x^2/y on degree 5 models. These match the conventions of the valuation
/// engine, so the leading coefficient of the returned function at the
/// point is 1.
pub fn uniformizer_at(p: &Point, curve: &Curve, t: &mut FieldTower) -> Result<CurveFn> {
    let u = match p {
        Point::Affine(x0, y0) => {
            if !curve.is_line() && y0.is_zero() {
                CurveFn::coord_y(t)?
            } else {
                let lin = Poly::new(vec![t.neg(x0)?, t.one()]);
                CurveFn::rational(lin, Poly::constant(t.one()), t)?
            }
        }
        Point::Infinity(_) => {
            let deg = curve.rhs().and_then(|f| f.degree()).unwrap_or(1);
            match deg {
                3 => {
                    let x = CurveFn::coord_x(t)?;
                    let y = CurveFn::coord_y(t)?;
                    x.div(&y, curve, t)?
                }
                5 => {
                    let x = CurveFn::coord_x(t)?;
                    let x2 = x.mul(&x, curve, t)?;
                    let y = CurveFn::coord_y(t)?;
                    x2.div(&y, curve, t)?
                }
                _ => CurveFn::rational(Poly::constant(t.one()), Poly::monomial(t.one(), 1), t)?,
            }
        }
    };
    #[cfg(debug_assertions)]
    {
        let (v, l) = lc_at(&u, p, curve, t)?;
        debug_assert_eq!(v, 1, "uniformizer valuation");
        debug_assert!(l.is_one(), "uniformizer leading coefficient");
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// Automorphisms of the base curve.
// ---------------------------------------------------------------------------

/// An automorphism of the base curve written in coordinates: the image of
/// the point (x, y) is (gx, gy). On the projective line gy is the zero
/// function by convention.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct BaseAut {
    /// The x coordinate of the image point.
    pub gx: CurveFn,
    /// The y coordinate of the image point; zero on the projective line.
    pub gy: CurveFn,
}

impl BaseAut {
    /// Build a base map from coordinate functions, checking that they
    /// satisfy the curve equation identically.
    pub fn new(gx: CurveFn, gy: CurveFn, curve: &Curve, t: &mut FieldTower) -> Result<BaseAut> {
        if curve.is_line() {
            if !gy.is_zero() {
                return Err(Error::InvalidInput(String::from(
                    "the projective line has no y coordinate",
                )));
            }
            return Ok(BaseAut { gx, gy });
        }
        let rhs = curve
            .rhs()
            .cloned()
            .ok_or_else(|| Error::InvalidInput(String::from("missing curve equation")))?;
        let lhs = gy.mul(&gy, curve, t)?;
        let rhs_at = eval_poly_at(&rhs, &gx, curve, t)?;
        if lhs != rhs_at {
            return Err(Error::InvalidInput(String::from(
                "coordinate functions do not satisfy the curve equation",
            )));
        }
        Ok(BaseAut { gx, gy })
    }

    /// The identity map.
    pub fn identity(curve: &Curve, t: &mut FieldTower) -> Result<BaseAut> {
        let gx = CurveFn::coord_x(t)?;
        let gy = if curve.is_line() {
            CurveFn::constant(t.zero(), t)?
        } else {
            CurveFn::coord_y(t)?
        };
        Ok(BaseAut { gx, gy })
    }

    /// The composite self after other: the map sending P to self(other(P)).
    pub fn compose(&self, other: &BaseAut, curve: &Curve, t: &mut FieldTower) -> Result<BaseAut> {
        let gx = self.gx.substitute(&other.gx, &other.gy, curve, t)?;
        let gy = if curve.is_line() {
            CurveFn::constant(t.zero(), t)?
        } else {
            self.gy.substitute(&other.gx, &other.gy, curve, t)?
        };
        Ok(BaseAut { gx, gy })
    }

    /// The inverse map, found as the power just before the order of the
    /// map; errors when no order below the bound is detected.
    pub fn inverse(&self, curve: &Curve, t: &mut FieldTower) -> Result<BaseAut> {
        let id = BaseAut::identity(curve, t)?;
        if *self == id {
            return Ok(id);
        }
        let mut prev = self.clone();
        for _ in 0..BASE_ORDER_BOUND {
            let next = self.compose(&prev, curve, t)?;
            if next == id {
                return Ok(prev);
            }
            prev = next;
        }
        Err(Error::BoundExceeded {
            what: String::from("order of a base automorphism"),
            bound: BASE_ORDER_BOUND,
        })
    }

    /// The image of a point under the map.
    ///
    /// Affine images are read off the values of the coordinate functions;
    /// a pole sends the point to infinity, with the branch on degree 6
    /// models decided by the limit of y/x^3 at the image.
    pub fn act_point(&self, p: &Point, curve: &Curve, t: &mut FieldTower) -> Result<Point> {
        let (vx, lx) = lc_at(&self.gx, p, curve, t)?;
        if curve.is_line() {
            if vx < 0 {
                return Ok(Point::Infinity(0));
            }
            let x = if vx > 0 { t.zero() } else { lx };
            return Ok(Point::on_line(x, t));
        }
        let (vy, ly) = lc_at(&self.gy, p, curve, t)?;
        if vx >= 0 && vy >= 0 {
            let x = if vx > 0 { t.zero() } else { lx };
            let y = if vy > 0 { t.zero() } else { ly };
            let q = Point::Affine(x, y);
            if !curve.is_on(&q, t)? {
                return Err(Error::Precondition(String::from(
                    "image point left the curve",
                )));
            }
            return Ok(q);
        }
        let deg = curve.rhs().and_then(|f| f.degree()).unwrap_or(0);
        if deg != 6 {
            return Ok(Point::Infinity(0));
        }
        let x3 = self.gx.pow(3, curve, t)?;
        let r = self.gy.div(&x3, curve, t)?;
        let (vr, lr) = lc_at(&r, p, curve, t)?;
        if vr != 0 {
            return Err(Error::Precondition(String::from(
                "degenerate branch data at infinity",
            )));
        }
        Ok(if lr.is_one() {
            Point::Infinity(0)
        } else {
            Point::Infinity(1)
        })
    }
}

/// Evaluate a polynomial in x at a rational function, by Horner's rule.
fn eval_poly_at(poly: &Poly, g: &CurveFn, curve: &Curve, t: &mut FieldTower) -> Result<CurveFn> {
    let mut acc = CurveFn::constant(t.zero(), t)?;
    for i in (0..poly.coeffs().len()).rev() {
        acc = acc.mul(g, curve, t)?;
        acc = acc.add(&CurveFn::constant(poly.coeff(i), t)?, t)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Covers and their automorphisms.
// ---------------------------------------------------------------------------

/// A Kummer cover of the open curve U = X - Z, cut out by adjoining n-th
/// roots z_i of the functions of the defining classes.
#[derive(Clone, Debug)]
pub struct KummerCover {
    /// The common order of the adjoined roots.
    pub n: u64,
    /// The defining classes; the total space depends only on the functions,
    /// the divisors carry the class bookkeeping.
    pub pairs: Vec<H1Triple>,
    /// The removed points, in canonical order.
    pub removed: Vec<Point>,
}

/// An automorphism of the total space of a Kummer cover lying over an
/// automorphism of the base: it sends z_i to hs[i] prod_j z_j^{exps[i][j]}.
///
/// With exponents reduced mod n this expression is unique, so equality of
/// automorphisms is equality of the stored data.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CoverAut {
    /// The underlying automorphism of the base curve.
    pub base: BaseAut,
    /// The function parts of the images of the roots.
    pub hs: Vec<CurveFn>,
    /// The exponent matrix of the images of the roots, entries in [0, n).
    pub exps: Vec<Vec<u64>>,
}

impl KummerCover {
    /// Validate the defining data and build the cover.
    ///
    /// Every class must satisfy its relation relative to the removed set.
    /// On curves of genus at most 1 the classes must also be independent,
    /// which makes the total space connected of degree n^t; each class is
    /// checked to not decompose in the remaining ones. Beyond genus 1 the
    /// decomposition machinery is not available and independence is the
    /// caller's responsibility.
    pub fn new(
        n: u64,
        pairs: Vec<H1Triple>,
        removed: Vec<Point>,
        curve: &Curve,
        t: &mut FieldTower,
    ) -> Result<KummerCover> {
        if n < 2 || crate::arith::gcd(n, curve.p()) != 1 {
            return Err(Error::InvalidInput(String::from(
                "the root order must be at least 2 and prime to the characteristic",
            )));
        }
        let mut removed = removed;
        removed.sort();
        removed.dedup();
        for pair in &pairs {
            pair.validate(n, &removed, curve, t)?;
        }
        if curve.genus() <= 1 {
            for i in 0..pairs.len() {
                let mut others = pairs.clone();
                let target = others.remove(i);
                if h1_decompose(&target, &others, n, curve, t).is_ok() {
                    return Err(Error::InvalidInput(String::from(
                        "defining classes are dependent",
                    )));
                }
            }
        }
        let cover = KummerCover { n, pairs, removed };
        cover.degree()?;
        Ok(cover)
    }

    /// The covering degree n^t.
    pub fn degree(&self) -> Result<u64> {
        let d = self
            .n
            .checked_pow(self.pairs.len() as u32)
            .unwrap_or(u64::MAX);
        if d > DEGREE_BOUND {
            return Err(Error::BoundExceeded {
                what: String::from("covering degree"),
                bound: DEGREE_BOUND as usize,
            });
        }
        Ok(d)
    }

    /// The identity automorphism of the total space.
    pub fn identity_aut(&self, curve: &Curve, t: &mut FieldTower) -> Result<CoverAut> {
        let k = self.pairs.len();
        let one = CurveFn::constant(t.one(), t)?;
        let mut exps = vec![vec![0u64; k]; k];
        for (i, row) in exps.iter_mut().enumerate() {
            row[i] = 1;
        }
        Ok(CoverAut {
            base: BaseAut::identity(curve, t)?,
            hs: vec![one; k],
            exps,
        })
    }

    /// The deck transformation multiplying the j-th root by the session
    /// primitive n-th root of unity and fixing everything else.
    pub fn deck(&self, j: usize, curve: &Curve, t: &mut FieldTower) -> Result<CoverAut> {
        if j >= self.pairs.len() {
            return Err(Error::InvalidInput(String::from(
                "deck index out of range",
            )));
        }
        let mut a = self.identity_aut(curve, t)?;
        let z = t.zeta(self.n)?;
        a.hs[j] = CurveFn::constant(z, t)?;
        Ok(a)
    }

    /// The composite a after b: base maps compose, and the monomial rules
    /// compose with exponents reduced mod n, folding every overflow z_k^n
    /// back into the function part as f_k.
    pub fn compose(
        &self,
        a: &CoverAut,
        b: &CoverAut,
        curve: &Curve,
        t: &mut FieldTower,
    ) -> Result<CoverAut> {
        let k = self.pairs.len();
        if a.hs.len() != k || b.hs.len() != k {
            return Err(Error::DimensionMismatch(String::from(
                "automorphism does not match the cover",
            )));
        }
        let base = a.base.compose(&b.base, curve, t)?;
        let mut hs = Vec::with_capacity(k);
        let mut exps = vec![vec![0u64; k]; k];
        for i in 0..k {
            let mut h = a.hs[i].substitute(&b.base.gx, &b.base.gy, curve, t)?;
            for j in 0..k {
                let e = a.exps[i][j];
                if e == 0 {
                    continue;
                }
                h = h.mul(&b.hs[j].pow(e as i64, curve, t)?, curve, t)?;
                for (l, cell) in exps[i].iter_mut().enumerate() {
                    *cell += e * b.exps[j][l];
                }
            }
            for (l, cell) in exps[i].iter_mut().enumerate() {
                let q = *cell / self.n;
                *cell %= self.n;
                if q != 0 {
                    h = h.mul(&self.pairs[l].f.pow(q as i64, curve, t)?, curve, t)?;
                }
            }
            hs.push(h);
        }
        Ok(CoverAut { base, hs, exps })
    }

    /// Check that a monomial rule defines an automorphism of the cover:
    /// the base map must permute the removed points, and pulling each
    /// defining function through the base map must equal the rule applied
    /// to it, raised to the n-th power where the root is.
    pub fn validate_aut(&self, a: &CoverAut, curve: &Curve, t: &mut FieldTower) -> Result<()> {
        let k = self.pairs.len();
        if a.hs.len() != k || a.exps.len() != k || a.exps.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch(String::from(
                "automorphism does not match the cover",
            )));
        }
        if a.exps.iter().flatten().any(|&e| e >= self.n) {
            return Err(Error::InvalidInput(String::from(
                "exponents must be reduced mod n",
            )));
        }
        for z in &self.removed {
            let image = a.base.act_point(z, curve, t)?;
            if !self.removed.contains(&image) {
                return Err(Error::InvalidInput(String::from(
                    "base map does not preserve the removed points",
                )));
            }
        }
        for i in 0..k {
            let lhs = self.pairs[i]
                .f
                .substitute(&a.base.gx, &a.base.gy, curve, t)?;
            let mut rhs = a.hs[i].pow(self.n as i64, curve, t)?;
            for j in 0..k {
                let e = a.exps[i][j];
                if e != 0 {
                    rhs = rhs.mul(&self.pairs[j].f.pow(e as i64, curve, t)?, curve, t)?;
                }
            }
            if lhs != rhs {
                return Err(Error::InvalidInput(String::from(
                    "monomial rule does not match the pulled back function",
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Cover descriptions: ramification and genus.
// ---------------------------------------------------------------------------

/// One row of the ramification table of a cover description.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RamificationRow {
    /// The removed point of the base.
    pub z: Point,
    /// The common ramification index of the points above z.
    pub index: u64,
    /// The number of points of the total space above z.
    pub count: u64,
}

/// The shape of a Kummer cover: its degree, the ramification over every
/// removed point, and the genus of the smooth projective model of the
/// total space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoverDescription {
    /// The common order of the adjoined roots.
    pub n: u64,
    /// The number of adjoined roots.
    pub roots: usize,
    /// The covering degree n^roots.
    pub degree: u64,
    /// The ramification data over each removed point, in canonical order.
    pub ramification: Vec<RamificationRow>,
    /// The genus of the smooth projective model of the total space.
    pub genus: u64,
}

/// Describe a Kummer cover.
///
/// Away from the removed points every defining function has valuation
/// divisible by n, so the cover is unramified there. Over a removed point
/// z the ramification index is n / gcd(n, v_z(f_1), ..., v_z(f_t)) and the
/// points above z all share it; the genus of the total space then comes
/// out of the Riemann-Hurwitz formula, all ramification being tame.
pub fn kummer_cover(
    cover: &KummerCover,
    curve: &Curve,
    t: &mut FieldTower,
) -> Result<CoverDescription> {
    let degree = cover.degree()?;
    let mut ramification = Vec::with_capacity(cover.removed.len());
    let mut excess: i64 = 0;
    for z in &cover.removed {
        let mut g = cover.n;
        for pair in &cover.pairs {
            let (v, _) = lc_at(&pair.f, z, curve, t)?;
            g = crate::arith::gcd(g, v.unsigned_abs() % cover.n);
        }
        let index = cover.n / g;
        let count = degree / index;
        excess += (count as i64) * (index as i64 - 1);
        ramification.push(RamificationRow {
            z: z.clone(),
            index,
            count,
        });
    }
    let base_genus = curve.genus() as i64;
    let rh = (degree as i64) * (2 * base_genus - 2) + excess;
    if rh < -2 || rh % 2 != 0 {
        return Err(Error::Precondition(String::from(
            "ramification data is inconsistent with a nonnegative genus",
        )));
    }
    Ok(CoverDescription {
        n: cover.n,
        roots: cover.pairs.len(),
        degree,
        ramification,
        genus: ((rh + 2) / 2) as u64,
    })
}

// ---------------------------------------------------------------------------
// Lifting base automorphisms.
// ---------------------------------------------------------------------------

/// The pullback of a class along a base automorphism: points move by the
/// inverse map, the function by substitution.
fn pullback_class(
    pair: &H1Triple,
    tau: &BaseAut,
    tau_inv: &BaseAut,
    curve: &Curve,
    t: &mut FieldTower,
) -> Result<H1Triple> {
    let mut d = Divisor::zero();
    for (p, c) in pair.d.iter() {
        d.add_point(tau_inv.act_point(p, curve, t)?, c);
    }
    let mut d_prime = Divisor::zero();
    for (p, c) in pair.d_prime.iter() {
        d_prime.add_point(tau_inv.act_point(p, curve, t)?, c);
    }
    let f = pair.f.substitute(&tau.gx, &tau.gy, curve, t)?;
    #[cfg(debug_assertions)]
    {
        let div_f = divisor_of_function(&f, curve, t)?;
        debug_assert_eq!(
            d.scale(pair_n_guess(&pair.d, &div_f, &d_prime)),
            div_f.add(&d_prime),
            "pulled back class relation"
        );
    }
    Ok(H1Triple { d, d_prime, f })
}

/// Recover n from a divisor relation for the debug check of a pullback:
/// the scale that matches degrees when the class divisor is nonzero.
#[cfg(debug_assertions)]
fn pair_n_guess(d: &Divisor, div_f: &Divisor, d_prime: &Divisor) -> i64 {
    for (p, c) in d.iter() {
        let rhs = div_f.coeff(p) + d_prime.coeff(p);
        if c != 0 && rhs % c == 0 && rhs != 0 {
            return rhs / c;
        }
    }
    1
}

/// Lift a base automorphism to the cover by decomposing each pulled back
/// class in the defining classes; the decomposition witness becomes the
/// function part of the lift. This needs the decomposition machinery, so
/// it works on curves of genus at most 1; on other curves the lift must be
/// supplied as a ready-made monomial rule.
pub fn lift_base_automorphism(
    cover: &KummerCover,
    tau: &BaseAut,
    curve: &Curve,
    t: &mut FieldTower,
) -> Result<CoverAut> {
    let tau_inv = tau.inverse(curve, t)?;
    let mut hs = Vec::with_capacity(cover.pairs.len());
    let mut exps = Vec::with_capacity(cover.pairs.len());
    for pair in &cover.pairs {
        let pulled = pullback_class(pair, tau, &tau_inv, curve, t)?;
        let (row, h) = h1_decompose(&pulled, &cover.pairs, cover.n, curve, t)?;
        hs.push(h);
        exps.push(row);
    }
    let a = CoverAut {
        base: tau.clone(),
        hs,
        exps,
    };
    cover.validate_aut(&a, curve, t)?;
    Ok(a)
}

// ---------------------------------------------------------------------------
// The automorphism group of a cover.
// ---------------------------------------------------------------------------

/// The automorphism group of the total space of a cover, with the concrete
/// monomial rule realizing each abstract element.
#[derive(Clone, Debug)]
pub struct CoverGroup {
    /// The abstract group; multiplication is composition of the elements.
    pub group: FiniteGroup,
    /// The concrete automorphisms; entry i realizes group element i.
    pub elements: Vec<CoverAut>,
}

impl CoverGroup {
    /// The index of a concrete automorphism, when it belongs to the group.
    pub fn index_of(&self, a: &CoverAut) -> Option<u32> {
        self.elements.iter().position(|x| x == a).map(|i| i as u32)
    }
}

/// Assemble the automorphism group generated by the deck transformations
/// and the given lifted base automorphisms.
///
/// Every lift is validated against the cover first. The result has order
/// equal to the covering degree times the order of the group generated by
/// the base maps, and this is checked; the group multiplication table is
/// the composition of the concrete rules.
pub fn cover_automorphisms(
    cover: &KummerCover,
    lifts: &[CoverAut],
    curve: &Curve,
    t: &mut FieldTower,
) -> Result<CoverGroup> {
    for a in lifts {
        cover.validate_aut(a, curve, t)?;
    }
    let id = cover.identity_aut(curve, t)?;
    let mut gens: Vec<CoverAut> = Vec::new();
    for j in 0..cover.pairs.len() {
        gens.push(cover.deck(j, curve, t)?);
    }
    gens.extend_from_slice(lifts);
    let elements = closure_under(
        &gens,
        id.clone(),
        |a, b| cover.compose(a, b, curve, t),
        CLOSURE_BOUND,
    )?;
    let base_id = BaseAut::identity(curve, t)?;
    let base_gens: Vec<BaseAut> = lifts.iter().map(|a| a.base.clone()).collect();
    let base_elements = closure_under(
        &base_gens,
        base_id,
        |a, b| a.compose(b, curve, t),
        CLOSURE_BOUND,
    )?;
    let expected = (base_elements.len() as u64).saturating_mul(cover.degree()?);
    if elements.len() as u64 != expected {
        return Err(Error::Precondition(String::from(
            "the automorphism closure does not have the expected order",
        )));
    }
    let (group, ordered) = group_from_concrete(
        &elements,
        &id,
        |a, b| cover.compose(a, b, curve, t),
        &gens,
    )?;
    Ok(CoverGroup {
        group,
        elements: ordered,
    })
}

// ---------------------------------------------------------------------------
// Inertia.
// ---------------------------------------------------------------------------

/// The inertia data of a cover group at the canonical point above a point
/// of the base.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InertiaDatum {
    /// The point of the base below the chosen point.
    pub z: Point,
    /// The chosen point above z, recorded by its tuple of root values: the
    /// lexicographically least tuple (c_1, ..., c_t) with c_i^n equal to
    /// the leading coefficient of f_i at z.
    pub chosen: Vec<Fq>,
    /// The group indices of the automorphisms fixing the chosen point, in
    /// increasing order.
    pub members: Vec<u32>,
    /// The canonical character: entry k is the root of unity by which
    /// members[k] scales a uniformizer at the chosen point.
    pub characters: Vec<Fq>,
    /// The members of p-power order: the wild part, which is exactly the
    /// kernel of the character.
    pub wild: Vec<u32>,
    /// The order of the tame quotient; the character image is the group of
    /// roots of unity of this order.
    pub tame_order: u64,
}

/// Whether an order is a power of the prime p (1 counts).
fn is_p_power(order: usize, p: u64) -> bool {
    let p = p as usize;
    let mut o = order;
    while o % p == 0 {
        o /= p;
    }
    o == 1
}

/// The inertia subgroup at the canonical point above z, with its character.
///
/// A point of the total space above z is a choice, for every i, of an n-th
/// root c_i of the leading coefficient of f_i at z; tuples differing by
/// the local monodromy give the same point, and the chosen point is the
/// lexicographically least tuple. An automorphism whose base map fixes z
/// fixes that point exactly when some root mu of the leading coefficient
/// of the pulled back uniformizer satisfies r_i = c_i mu^{v_i / g} for the
/// leading values r_i of the images of the roots; mu is then unique and is
/// the value of the canonical character.
pub fn inertia_at(
    cover: &KummerCover,
    group: &CoverGroup,
    z: &Point,
    curve: &Curve,
    t: &mut FieldTower,
) -> Result<InertiaDatum> {
    let n = cover.n;
    let k = cover.pairs.len();
    let mut vals: Vec<i64> = Vec::with_capacity(k);
    let mut chosen: Vec<Fq> = Vec::with_capacity(k);
    let mut g = n;
    for pair in &cover.pairs {
        let (v, l) = lc_at(&pair.f, z, curve, t)?;
        g = crate::arith::gcd(g, v.unsigned_abs() % n);
        vals.push(v);
        chosen.push(t.nth_root_min(&l, n)?);
    }
    let e_local = n / g;
    let u = uniformizer_at(z, curve, t)?;
    let zeta = t.zeta(e_local)?;
    let mut members: Vec<u32> = Vec::new();
    let mut characters: Vec<Fq> = Vec::new();
    for (idx, a) in group.elements.iter().enumerate() {
        if a.base.act_point(z, curve, t)? != *z {
            continue;
        }
        let pulled_u = u.substitute(&a.base.gx, &a.base.gy, curve, t)?;
        let (vb, lb) = lc_at(&pulled_u, z, curve, t)?;
        if vb != 1 {
            return Err(Error::Precondition(String::from(
                "base map does not preserve the valuation at the point",
            )));
        }
        // Leading values of the images of the roots on the chosen branch.
        let mut rs = Vec::with_capacity(k);
        for i in 0..k {
            let (_, lh) = lc_at(&a.hs[i], z, curve, t)?;
            let mut r = lh;
            for j in 0..k {
                let e = a.exps[i][j];
                if e != 0 {
                    let cj = t.pow(&chosen[j], e as i128)?;
                    r = t.mul(&r, &cj)?;
                }
            }
            rs.push(r);
        }
        let mut mu = t.nth_root_min(&lb, e_local)?;
        let mut found: Option<Fq> = None;
        for _ in 0..e_local {
            let mut ok = true;
            for i in 0..k {
                let mv = t.pow(&mu, (vals[i] / g as i64) as i128)?;
                let want = t.mul(&chosen[i], &mv)?;
                if rs[i] != want {
                    ok = false;
                    break;
                }
            }
            if ok {
                if found.is_some() {
                    return Err(Error::Precondition(String::from(
                        "character value is not unique",
                    )));
                }
                found = Some(mu.clone());
            }
            mu = t.mul(&mu, &zeta)?;
        }
        if let Some(mu) = found {
            members.push(idx as u32);
            characters.push(mu);
        }
    }
    // Internal consistency: the members close under composition, the
    // character is multiplicative, and its kernel is exactly the set of
    // members of p-power order.
    let fg = &group.group;
    let theta: BTreeMap<u32, Fq> = members
        .iter()
        .cloned()
        .zip(characters.iter().cloned())
        .collect();
    for &a in &members {
        for &b in &members {
            let ab = fg.mul(a, b);
            let tab = theta.get(&ab).ok_or_else(|| {
                Error::Precondition(String::from(
                    "inertia members do not close under composition",
                ))
            })?;
            let prod = t.mul(&theta[&a], &theta[&b])?;
            if *tab != prod {
                return Err(Error::Precondition(String::from(
                    "inertia character is not multiplicative",
                )));
            }
        }
    }
    let p = curve.p();
    let mut wild: Vec<u32> = Vec::new();
    for &m in &members {
        if is_p_power(fg.element_order(m), p) {
            wild.push(m);
        }
    }
    for &m in &members {
        if theta[&m].is_one() != wild.contains(&m) {
            return Err(Error::Precondition(String::from(
                "wild part does not match the character kernel",
            )));
        }
    }
    let tame_order = (members.len() / wild.len().max(1)) as u64;
    Ok(InertiaDatum {
        z: z.clone(),
        chosen,
        members,
        characters,
        wild,
        tame_order,
    })
}

// ---------------------------------------------------------------------------
// Frobenius conjugation.
// ---------------------------------------------------------------------------

/// Apply the p^k power field map to the coordinates of a point.
fn frobenius_point(p: &Point, k: usize, t: &mut FieldTower) -> Result<Point> {
    Ok(match p {
        Point::Infinity(b) => Point::Infinity(*b),
        Point::Affine(x, y) => Point::Affine(t.frobenius(x, k)?, t.frobenius(y, k)?),
    })
}

/// The conjugation action of the p^k power Frobenius on a cover group, as
/// the permutation of element indices.
///
/// The defining functions and the removed set must be fixed by the power
/// map; the conjugate of an automorphism then applies the power map to the
/// base coordinates and the function parts and keeps the exponents, and
/// is located in the element list. The returned map is checked to be a
/// group automorphism.
pub fn frobenius_on_group(
    cover: &KummerCover,
    group: &CoverGroup,
    k: usize,
    t: &mut FieldTower,
) -> Result<Vec<u32>> {
    for pair in &cover.pairs {
        if pair.f.frobenius(k, t)? != pair.f {
            return Err(Error::Unsupported(String::from(
                "conjugation needs defining functions fixed by the power map",
            )));
        }
    }
    for z in &cover.removed {
        if !cover.removed.contains(&frobenius_point(z, k, t)?) {
            return Err(Error::Unsupported(String::from(
                "conjugation needs a removed set fixed by the power map",
            )));
        }
    }
    let mut out = Vec::with_capacity(group.elements.len());
    for a in &group.elements {
        let mut hs = Vec::with_capacity(a.hs.len());
        for h in &a.hs {
            hs.push(h.frobenius(k, t)?);
        }
        let conj = CoverAut {
            base: BaseAut {
                gx: a.base.gx.frobenius(k, t)?,
                gy: a.base.gy.frobenius(k, t)?,
            },
            hs,
            exps: a.exps.clone(),
        };
        let idx = group.index_of(&conj).ok_or_else(|| {
            Error::Precondition(String::from("conjugate automorphism left the group"))
        })?;
        out.push(idx);
    }
    let fg = &group.group;
    let order = fg.order();
    for a in 0..order {
        for b in 0..order {
            let lhs = out[fg.mul(a as u32, b as u32) as usize];
            let rhs = fg.mul(out[a], out[b]);
            if lhs != rhs {
                return Err(Error::Precondition(String::from(
                    "conjugation is not a group homomorphism",
                )));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{
        elliptic_add, elliptic_torsion_basis, frobenius_on_h1, h1_triple_of_torsion,
        p1_punctured_h1_basis,
    };

    fn f7() -> FieldTower {
        FieldTower::new(7).expect("7 is prime")
    }

    fn pt(x: u64, t: &FieldTower) -> Point {
        Point::on_line(t.from_prime(x), t)
    }

    /// The map x -> -x on the projective line.
    fn negation(line: &Curve, t: &mut FieldTower) -> BaseAut {
        let m1 = t.neg(&t.one()).unwrap();
        let gx = CurveFn::rational(
            Poly::new(vec![t.zero(), m1]),
            Poly::constant(t.one()),
            t,
        )
        .unwrap();
        let gy = CurveFn::constant(t.zero(), t).unwrap();
        BaseAut::new(gx, gy, line, t).unwrap()
    }

    /// The line minus {0, 1, -1, inf} over F_7 with its standard classes,
    /// square roots everywhere.
    fn four_punctures() -> (FieldTower, Curve, KummerCover) {
        let mut t = f7();
        let line = Curve::projective_line(7);
        let z = vec![pt(0, &t), pt(1, &t), pt(6, &t), Point::Infinity(0)];
        let pairs = p1_punctured_h1_basis(&z, 2, &line, &mut t).unwrap();
        let cover = KummerCover::new(2, pairs, z, &line, &mut t).unwrap();
        (t, line, cover)
    }

    /// The canonical square root of -1 over F_7.
    fn root_of_minus_one(t: &mut FieldTower) -> Fq {
        let m1 = t.neg(&t.one()).unwrap();
        t.nth_root_min(&m1, 2).unwrap()
    }

    /// The distinguished lift of x -> -x on the four punctures cover: it
    /// scales every root by the canonical square root of -1 and swaps the
    /// roots of x - 1 and x + 1.
    fn distinguished_lift(line: &Curve, t: &mut FieldTower) -> CoverAut {
        let tau = negation(line, t);
        let i0 = root_of_minus_one(t);
        let ic = CurveFn::constant(i0, t).unwrap();
        CoverAut {
            base: tau,
            hs: vec![ic.clone(), ic.clone(), ic],
            exps: vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 0]],
        }
    }

    #[test]
    fn squaring_cover_of_the_doubly_punctured_line() {
        let mut t = f7();
        let line = Curve::projective_line(7);
        let z = vec![pt(0, &t), Point::Infinity(0)];
        let pairs = p1_punctured_h1_basis(&z, 2, &line, &mut t).unwrap();
        assert_eq!(pairs.len(), 1, "one class for two punctures");
        let cover = KummerCover::new(2, pairs, z, &line, &mut t).unwrap();
        let desc = kummer_cover(&cover, &line, &mut t).unwrap();
        assert_eq!(desc.degree, 2, "degree of the squaring cover");
        assert_eq!(desc.genus, 0, "the squaring cover is rational");
        assert_eq!(desc.ramification.len(), 2);
        for row in &desc.ramification {
            assert_eq!((row.index, row.count), (2, 1), "one branch point each");
        }
    }

    #[test]
    fn empty_root_list_gives_the_trivial_cover() {
        let mut t = f7();
        let line = Curve::projective_line(7);
        let z = vec![pt(0, &t), Point::Infinity(0)];
        let cover = KummerCover::new(2, Vec::new(), z, &line, &mut t).unwrap();
        let desc = kummer_cover(&cover, &line, &mut t).unwrap();
        assert_eq!(desc.degree, 1);
        assert_eq!(desc.genus, 0);
        for row in &desc.ramification {
            assert_eq!((row.index, row.count), (1, 1));
        }
        let cg = cover_automorphisms(&cover, &[], &line, &mut t).unwrap();
        assert_eq!(cg.group.order(), 1, "no roots, no deck transformations");
    }

    #[test]
    fn degree_eight_cover_of_the_four_punctures() {
        let (mut t, line, cover) = four_punctures();
        let desc = kummer_cover(&cover, &line, &mut t).unwrap();
        assert_eq!(desc.degree, 8);
        assert_eq!(desc.roots, 3);
        assert_eq!(desc.ramification.len(), 4);
        for row in &desc.ramification {
            assert_eq!(
                (row.index, row.count),
                (2, 4),
                "four points of index 2 over every puncture"
            );
        }
        assert_eq!(desc.genus, 1, "the total space has genus 1");
    }

    #[test]
    fn deck_transformations_form_an_elementary_abelian_group() {
        let (mut t, line, cover) = four_punctures();
        let cg = cover_automorphisms(&cover, &[], &line, &mut t).unwrap();
        assert_eq!(cg.group.order(), 8);
        assert!(cg.group.is_abelian());
        for a in 1..8u32 {
            assert_eq!(cg.group.element_order(a), 2, "every deck element squares to 1");
        }
    }

    #[test]
    fn lifting_the_negation_map_gives_the_order_sixteen_group() {
        let (mut t, line, cover) = four_punctures();
        let tau = negation(&line, &mut t);
        let lift = lift_base_automorphism(&cover, &tau, &line, &mut t).unwrap();
        assert_eq!(lift.base, tau, "the lift restricts to the base map");
        let cg = cover_automorphisms(&cover, &[lift.clone()], &line, &mut t).unwrap();
        assert_eq!(cg.group.order(), 16);
        assert!(!cg.group.is_abelian());
        assert!(cg.index_of(&lift).is_some(), "the computed lift is in the group");

        // The distinguished lift gamma and the three deck maps.
        let gamma = distinguished_lift(&line, &mut t);
        cover.validate_aut(&gamma, &line, &mut t).unwrap();
        let gi = cg.index_of(&gamma).expect("distinguished lift in the group");
        let si: Vec<u32> = (0..3)
            .map(|j| {
                let d = cover.deck(j, &line, &mut t).unwrap();
                cg.index_of(&d).unwrap()
            })
            .collect();
        let fg = &cg.group;
        // gamma squares to the product of all three deck maps and swaps
        // the second and third by conjugation.
        assert_eq!(fg.mul(gi, gi), fg.mul(si[0], fg.mul(si[1], si[2])));
        assert_eq!(fg.mul(gi, si[1]), fg.mul(si[2], gi));
        assert_eq!(fg.mul(gi, si[2]), fg.mul(si[1], gi));
        assert_eq!(fg.element_order(gi), 4);
        // Every element of the closure is itself a valid automorphism.
        for a in &cg.elements {
            cover.validate_aut(a, &line, &mut t).unwrap();
        }
    }

    #[test]
    fn inertia_of_the_degree_eight_cover_matches_the_table() {
        let (mut t, line, cover) = four_punctures();
        let lift = {
            let tau = negation(&line, &mut t);
            lift_base_automorphism(&cover, &tau, &line, &mut t).unwrap()
        };
        let cg = cover_automorphisms(&cover, &[lift], &line, &mut t).unwrap();
        let gamma = distinguished_lift(&line, &mut t);
        let gi = cg.index_of(&gamma).unwrap();
        let si: Vec<u32> = (0..3)
            .map(|j| {
                let d = cover.deck(j, &line, &mut t).unwrap();
                cg.index_of(&d).unwrap()
            })
            .collect();
        let fg = &cg.group;
        let i0 = root_of_minus_one(&mut t);
        let m1 = t.neg(&t.one()).unwrap();
        let mi0 = t.neg(&i0).unwrap();

        // Above 0 the inertia is cyclic of order 4, generated by the
        // composite of gamma and the second deck map, which scales the
        // local uniformizer by the canonical square root of -1.
        let d0 = inertia_at(&cover, &cg, &pt(0, &t), &line, &mut t).unwrap();
        assert_eq!(d0.chosen, vec![t.one(), i0.clone(), t.one()]);
        let gs2 = fg.mul(gi, si[1]);
        let expected = fg.subgroup(&[gs2]);
        assert_eq!(d0.members, expected.elements(), "inertia above 0");
        assert_eq!(d0.tame_order, 4);
        assert_eq!(d0.wild, vec![fg.identity()], "tame cover, trivial wild part");
        let pos = d0.members.iter().position(|&m| m == gs2).unwrap();
        assert_eq!(d0.characters[pos], i0, "character of the generator above 0");
        let pos1 = d0.members.iter().position(|&m| m == si[0]).unwrap();
        assert_eq!(d0.characters[pos1], m1, "the first deck map is inert above 0");
        assert!(!d0.members.contains(&si[1]));
        assert!(!d0.members.contains(&si[2]));

        // Above 1 and -1 the inertia groups are the deck maps of the
        // matching roots.
        let d1 = inertia_at(&cover, &cg, &pt(1, &t), &line, &mut t).unwrap();
        assert_eq!(d1.members, fg.subgroup(&[si[1]]).elements(), "inertia above 1");
        assert_eq!(d1.tame_order, 2);
        let posb = d1.members.iter().position(|&m| m == si[1]).unwrap();
        assert_eq!(d1.characters[posb], m1);
        let dm1 = inertia_at(&cover, &cg, &pt(6, &t), &line, &mut t).unwrap();
        assert_eq!(dm1.members, fg.subgroup(&[si[2]]).elements(), "inertia above -1");

        // Above infinity the inertia is generated by gamma itself, with
        // character the other square root of -1.
        let dinf = inertia_at(&cover, &cg, &Point::Infinity(0), &line, &mut t).unwrap();
        assert_eq!(dinf.members, fg.subgroup(&[gi]).elements(), "inertia above infinity");
        assert_eq!(dinf.tame_order, 4);
        let posg = dinf.members.iter().position(|&m| m == gi).unwrap();
        assert_eq!(dinf.characters[posg], mi0, "character of gamma above infinity");

        // Orbit counting: the group order is the inertia order times the
        // number of points above the base orbit of z.
        assert_eq!(16, d0.members.len() * 4, "orbit of 0 is itself, 4 points");
        assert_eq!(16, d1.members.len() * 8, "1 and -1 swap, 4 points each");
        assert_eq!(16, dinf.members.len() * 4);
    }

    #[test]
    fn inertia_at_an_unramified_point_is_trivial() {
        let (mut t, line, cover) = four_punctures();
        let lift = {
            let tau = negation(&line, &mut t);
            lift_base_automorphism(&cover, &tau, &line, &mut t).unwrap()
        };
        let cg = cover_automorphisms(&cover, &[lift], &line, &mut t).unwrap();
        let d = inertia_at(&cover, &cg, &pt(3, &t), &line, &mut t).unwrap();
        assert_eq!(d.members, vec![cg.group.identity()]);
        assert_eq!(d.tame_order, 1);
        assert!(d.characters[0].is_one());
    }

    #[test]
    fn frobenius_conjugation_twists_the_lift() {
        let (mut t, line, cover) = four_punctures();
        let lift = {
            let tau = negation(&line, &mut t);
            lift_base_automorphism(&cover, &tau, &line, &mut t).unwrap()
        };
        let cg = cover_automorphisms(&cover, &[lift], &line, &mut t).unwrap();
        let map = frobenius_on_group(&cover, &cg, 1, &mut t).unwrap();
        let gamma = distinguished_lift(&line, &mut t);
        let gi = cg.index_of(&gamma).unwrap();
        let si: Vec<u32> = (0..3)
            .map(|j| {
                let d = cover.deck(j, &line, &mut t).unwrap();
                cg.index_of(&d).unwrap()
            })
            .collect();
        let fg = &cg.group;
        for &s in &si {
            assert_eq!(map[s as usize], s, "deck maps are rational");
        }
        let twisted = fg.mul(si[0], fg.mul(si[1], fg.mul(si[2], gi)));
        assert_eq!(map[gi as usize], twisted, "the lift picks up all three deck maps");
        // Squaring the field map must give the identity conjugation.
        for a in 0..16usize {
            assert_eq!(map[map[a] as usize], a as u32);
        }
    }

    #[test]
    fn frobenius_conjugation_is_trivial_on_rational_data() {
        let (mut t, line, cover) = four_punctures();
        let cg = cover_automorphisms(&cover, &[], &line, &mut t).unwrap();
        let map = frobenius_on_group(&cover, &cg, 1, &mut t).unwrap();
        let expected: Vec<u32> = (0..8).collect();
        assert_eq!(map, expected);
    }

    #[test]
    fn dependent_root_data_is_rejected() {
        let mut t = f7();
        let line = Curve::projective_line(7);
        let z = vec![pt(0, &t), pt(1, &t), pt(6, &t), Point::Infinity(0)];
        let pairs = p1_punctured_h1_basis(&z, 2, &line, &mut t).unwrap();
        // The same class twice.
        let dup = vec![pairs[0].clone(), pairs[0].clone()];
        assert!(matches!(
            KummerCover::new(2, dup, z.clone(), &line, &mut t),
            Err(Error::InvalidInput(_))
        ));
        // A trivial class.
        let one = CurveFn::constant(t.one(), &mut t).unwrap();
        let trivial = H1Triple {
            d: Divisor::zero(),
            d_prime: Divisor::zero(),
            f: one,
        };
        assert!(KummerCover::new(2, vec![trivial], z, &line, &mut t).is_err());
    }

    #[test]
    fn lift_fails_when_the_pullback_leaves_the_span() {
        let mut t = f7();
        let line = Curve::projective_line(7);
        let z = vec![pt(0, &t), pt(1, &t), pt(6, &t), Point::Infinity(0)];
        let pairs = p1_punctured_h1_basis(&z, 2, &line, &mut t).unwrap();
        // Keep only the class of x - 1; negation pulls it to a class
        // supported at -1, outside the span.
        let cover = KummerCover::new(2, vec![pairs[1].clone()], z, &line, &mut t).unwrap();
        let tau = negation(&line, &mut t);
        assert!(lift_base_automorphism(&cover, &tau, &line, &mut t).is_err());
    }

    #[test]
    fn base_maps_act_on_points_of_every_model() {
        let mut t = f7();
        let line = Curve::projective_line(7);
        let tau = negation(&line, &mut t);
        assert_eq!(tau.act_point(&pt(0, &t), &line, &mut t).unwrap(), pt(0, &t));
        assert_eq!(tau.act_point(&pt(1, &t), &line, &mut t).unwrap(), pt(6, &t));
        assert_eq!(
            tau.act_point(&Point::Infinity(0), &line, &mut t).unwrap(),
            Point::Infinity(0)
        );
        // 1/x swaps 0 and infinity.
        let inv = BaseAut::new(
            CurveFn::rational(Poly::constant(t.one()), Poly::monomial(t.one(), 1), &mut t)
                .unwrap(),
            CurveFn::constant(t.zero(), &mut t).unwrap(),
            &line,
            &mut t,
        )
        .unwrap();
        assert_eq!(
            inv.act_point(&pt(0, &t), &line, &mut t).unwrap(),
            Point::Infinity(0)
        );
        assert_eq!(
            inv.act_point(&Point::Infinity(0), &line, &mut t).unwrap(),
            pt(0, &t)
        );
        assert_eq!(inv.inverse(&line, &mut t).unwrap(), inv, "an involution");

        // On a degree 3 model, y -> -y fixes the point at infinity.
        let rhs = Poly::new(vec![t.one(), t.zero(), t.zero(), t.one()]);
        let e = Curve::hyperelliptic(rhs, &mut t).unwrap();
        let x = CurveFn::coord_x(&mut t).unwrap();
        let y = CurveFn::coord_y(&mut t).unwrap();
        let m1c = {
            let m1 = t.neg(&t.one()).unwrap();
            CurveFn::constant(m1, &mut t).unwrap()
        };
        let my = y.mul(&m1c, &e, &mut t).unwrap();
        let hy = BaseAut::new(x, my, &e, &mut t).unwrap();
        assert_eq!(
            hy.act_point(&Point::Infinity(0), &e, &mut t).unwrap(),
            Point::Infinity(0)
        );
        let p23 = Point::Affine(t.from_prime(2), t.from_prime(3));
        assert_eq!(
            hy.act_point(&p23, &e, &mut t).unwrap(),
            Point::Affine(t.from_prime(2), t.from_prime(4))
        );
    }

    /// The genus 2 curve y^2 = (x^2-1)(x^2-2)(x^2-3) over F_11 with the
    /// degree 2 extension F_121 = F_11(a), a^2 + 7a + 2 = 0; a generates
    /// the multiplicative group and a^12 = 2.
    fn genus2() -> (FieldTower, Curve, Fq) {
        let mut t = FieldTower::new(11).expect("11 is prime");
        t.ensure_degree_with(2, &[2, 7, 1]).expect("irreducible");
        let a = t.generator(2).expect("level exists");
        let rhs = Poly::new(vec![
            t.from_prime(5),
            t.zero(),
            t.zero(),
            t.zero(),
            t.from_prime(5),
            t.zero(),
            t.one(),
        ]);
        let c = Curve::hyperelliptic(rhs, &mut t).expect("squarefree sextic");
        (t, c, a)
    }

    #[test]
    fn genus_two_cover_with_supplied_lift_data() {
        let (mut t, c, a) = genus2();
        let ap = |k: i128, t: &mut FieldTower| t.pow(&a, k).unwrap();
        let linear = |v: &Fq, t: &mut FieldTower| Poly::new(vec![t.neg(v).unwrap(), t.one()]);
        let wpt = |v: &Fq, t: &mut FieldTower| Point::Affine(v.clone(), t.zero());

        // Differences of Weierstrass points and their halved functions.
        let one = t.one();
        let m1 = t.neg(&one).unwrap();
        let a6 = ap(6, &mut t);
        let ma6 = t.neg(&a6).unwrap();
        let five = t.from_prime(5);
        let m5 = t.from_prime(6);
        let quot = |num: &Fq, den: &Fq, t: &mut FieldTower| {
            let n = linear(num, t);
            let d = linear(den, t);
            CurveFn::rational(n, d, t).unwrap()
        };
        let f1 = quot(&one, &m1, &mut t);
        let f2 = quot(&a6, &ma6, &mut t);
        let f3 = quot(&a6, &five, &mut t);
        let f4 = quot(&one, &m5, &mut t);
        let diff = |p: &Fq, q: &Fq, t: &mut FieldTower| {
            Divisor::from_pairs(vec![(wpt(p, t), 1), (wpt(q, t), -1)])
        };
        let tr = |d: Divisor, f: CurveFn| H1Triple {
            d,
            d_prime: Divisor::zero(),
            f,
        };
        let tr1 = tr(diff(&one, &m1, &mut t), f1.clone());
        let tr2 = tr(diff(&a6, &ma6, &mut t), f2.clone());
        let tr3 = tr(diff(&a6, &five, &mut t), f3);
        let tr4 = tr(diff(&one, &m5, &mut t), f4);

        // The class joining the two removed points: its double is cut by
        // (y + a^8 x^2 + 7)/x.
        let p_pt = Point::Affine(t.zero(), t.from_prime(4));
        let q_pt = Point::Affine(t.zero(), t.from_prime(7));
        let a8 = ap(8, &mut t);
        let f5 = CurveFn::new(
            Poly::new(vec![t.from_prime(7), t.zero(), a8]),
            Poly::constant(t.one()),
            Poly::monomial(t.one(), 1),
            &mut t,
        )
        .unwrap();
        let a41 = ap(41, &mut t);
        let a101 = ap(101, &mut t);
        let a29 = ap(29, &mut t);
        let dbar5 = Divisor::from_pairs(vec![
            (Point::Affine(a41, a29.clone()), 1),
            (Point::Affine(a101, a29), 1),
            (Point::Infinity(0), -1),
            (Point::Infinity(1), -1),
        ]);
        let dp5 = Divisor::from_pairs(vec![(q_pt.clone(), 1), (p_pt.clone(), -1)]);
        let tr5 = H1Triple {
            d: dbar5,
            d_prime: dp5,
            f: f5,
        };
        let z = vec![p_pt.clone(), q_pt.clone()];
        tr5.validate(2, &z, &c, &mut t).unwrap();

        let pairs = vec![tr1, tr2, tr3, tr4, tr5];
        let cover = KummerCover::new(2, pairs, z, &c, &mut t).unwrap();
        let desc = kummer_cover(&cover, &c, &mut t).unwrap();
        assert_eq!(desc.degree, 32);
        assert_eq!(desc.genus, 49, "genus from the ramification data");
        assert_eq!(desc.ramification.len(), 2);
        for row in &desc.ramification {
            assert_eq!((row.index, row.count), (2, 16));
        }

        // The involution x -> -x lifts with supplied function parts: the
        // first two roots invert, the next two pick up y over a cubic, the
        // last scales by a square root of -1.
        let gx = CurveFn::rational(
            Poly::new(vec![t.zero(), m1.clone()]),
            Poly::constant(t.one()),
            &mut t,
        )
        .unwrap();
        let gy = CurveFn::coord_y(&mut t).unwrap();
        let sigma = BaseAut::new(gx, gy, &c, &mut t).unwrap();
        let cubic = |r1: &Fq, r2: &Fq, r3: &Fq, t: &mut FieldTower| {
            let l1 = linear(r1, t);
            let l2 = linear(r2, t);
            let l3 = linear(r3, t);
            l1.mul(&l2, t).unwrap().mul(&l3, t).unwrap()
        };
        let c3 = cubic(&m5, &one, &a6, &mut t);
        let h3 = CurveFn::new(Poly::constant(t.zero()), Poly::constant(t.one()), c3, &mut t)
            .unwrap();
        let c4 = cubic(&one, &a6, &five, &mut t);
        let h4 = CurveFn::new(Poly::constant(t.zero()), Poly::constant(t.one()), c4, &mut t)
            .unwrap();
        let a30 = ap(30, &mut t);
        let h5 = CurveFn::constant(a30, &mut t).unwrap();
        let h1 = f1.inv(&c, &mut t).unwrap();
        let h2 = f2.inv(&c, &mut t).unwrap();
        let delta = CoverAut {
            base: sigma,
            hs: vec![h1, h2, h3, h4, h5],
            exps: vec![
                vec![1, 0, 0, 0, 0],
                vec![0, 1, 0, 0, 0],
                vec![1, 0, 1, 0, 0],
                vec![0, 1, 0, 1, 0],
                vec![0, 0, 0, 0, 1],
            ],
        };
        cover.validate_aut(&delta, &c, &mut t).unwrap();

        let cg = cover_automorphisms(&cover, &[delta.clone()], &c, &mut t).unwrap();
        assert_eq!(cg.group.order(), 64);
        let di = cg.index_of(&delta).unwrap();
        let g: Vec<u32> = (0..5)
            .map(|j| {
                let d = cover.deck(j, &c, &mut t).unwrap();
                cg.index_of(&d).unwrap()
            })
            .collect();
        let fg = &cg.group;
        assert_eq!(fg.element_order(di), 4);
        assert_eq!(
            fg.mul(di, di),
            fg.mul(g[2], fg.mul(g[3], g[4])),
            "square of the lift"
        );
        assert_eq!(
            fg.mul(di, g[0]),
            fg.mul(g[0], fg.mul(g[2], di)),
            "commutation with the first deck map"
        );
        assert_eq!(
            fg.mul(di, g[1]),
            fg.mul(g[1], fg.mul(g[3], di)),
            "commutation with the second deck map"
        );
        let center = fg.center();
        assert_eq!(
            center.elements(),
            fg.subgroup(&[g[2], g[3], g[4]]).elements(),
            "center of the order 64 group"
        );
        assert_eq!(
            fg.derived_subgroup().elements(),
            fg.subgroup(&[g[2], g[3]]).elements(),
            "derived subgroup"
        );

        // Inertia at a removed point: order 4, containing the deck map of
        // the joining class with character -1; orbit counting checks out.
        let dp = inertia_at(&cover, &cg, &p_pt, &c, &mut t).unwrap();
        assert_eq!(dp.members.len(), 4, "inertia order at a removed point");
        assert_eq!(dp.tame_order, 4);
        assert!(dp.members.contains(&g[4]));
        let pos = dp.members.iter().position(|&m| m == g[4]).unwrap();
        let m1v = t.neg(&t.one()).unwrap();
        assert_eq!(dp.characters[pos], m1v);
        assert_eq!(64, dp.members.len() * 16, "orbit of the removed point");
    }

    #[test]
    fn elliptic_frobenius_matrix_matches_the_pointwise_action() {
        let mut t = f7();
        let rhs = Poly::new(vec![t.one(), t.zero(), t.zero(), t.one()]);
        let e = Curve::hyperelliptic(rhs, &mut t).unwrap();
        let (p, q) = elliptic_torsion_basis(&e, 2, &mut t).unwrap();
        let basis = vec![
            h1_triple_of_torsion(&p, 2, &e, &mut t).unwrap(),
            h1_triple_of_torsion(&q, 2, &e, &mut t).unwrap(),
        ];
        let m = frobenius_on_h1(&basis, 1, 2, &e, &mut t).unwrap();
        // The expected matrix from the action on the points themselves.
        let mut rows = Vec::new();
        for pt in [&p, &q] {
            let image = match pt {
                Point::Affine(x, y) => {
                    Point::Affine(t.frobenius(x, 1).unwrap(), t.frobenius(y, 1).unwrap())
                }
                Point::Infinity(b) => Point::Infinity(*b),
            };
            let mut row = None;
            for cp in 0..2i64 {
                for cq in 0..2i64 {
                    let s = crate::curve::elliptic_mul(cp, &p, &e, &mut t).unwrap();
                    let sq = crate::curve::elliptic_mul(cq, &q, &e, &mut t).unwrap();
                    if elliptic_add(&s, &sq, &e, &mut t).unwrap() == image {
                        row = Some(vec![cp as u64, cq as u64]);
                    }
                }
            }
            rows.push(row.expect("image is 2-torsion"));
        }
        let expected = crate::mat::ZnMatrix::from_rows(2, 2, &rows).unwrap();
        assert_eq!(m, expected, "matrix against the pointwise field map");
    }
}
