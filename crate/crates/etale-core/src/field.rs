//! Towers of finite fields with recorded embeddings, and univariate
//! polynomial arithmetic over them.
//!
//! A [`FieldTower`] over a prime p maintains a distinguished top level
//! F_{p^T} together with one level F_{p^d} for every divisor d of T, each
//! presented as F_p[x]/(f_d) for a monic irreducible f_d. Every level is
//! embedded into the top by a recorded power basis of a chosen root, so
//! membership in a subfield and coordinates there are linear algebra.
//!
//! Elements ([`Fq`]) are always kept in canonical form: the smallest level
//! containing them, with coordinates in that level's power basis. This makes
//! equality and ordering of elements plain data comparisons, independent of
//! the tower's current size.
//!
//! Determinism rules, fixed once for the whole crate:
//! - defining polynomials are the lexicographically least monic irreducible
//!   of their degree (coefficients compared from the leading one down),
//!   unless a caller supplies an explicit polynomial for a level before its
//!   default creation;
//! - the top grows only by least common multiples, and the old top is
//!   embedded into the new one by the least root of its defining polynomial,
//!   so previously issued coordinates keep their meaning;
//! - every search over field elements (roots, roots of unity, splitting
//!   shifts) scans elements in ascending order of their coefficient vectors
//!   and returns the first hit.

use crate::arith::{factorize, gcd, inverse_mod, lcm, pow_mod};
use crate::error::{Error, Result};
use crate::mat::ZnMatrix;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Largest extension degree a tower will build. Keeps every element search
/// and every embedding computation at desk scale.
pub const TOWER_DEGREE_CAP: usize = 24;

/// Largest field size that element-enumeration searches will scan.
const ELEMENT_SCAN_CAP: u128 = 1 << 22;

fn gcd128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// ---------------------------------------------------------------------------
// Polynomials over F_p: dense coefficient vectors, low degree first, no
// trailing zeros. These are the raw material for level arithmetic.

fn fp_trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn fp_add(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + y) % p;
    }
    fp_trim(out)
}

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y % p) % p;
    }
    fp_trim(out)
}

fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u128 * y as u128) % p as u128;
        }
    }
    fp_trim(out.into_iter().map(|v| v as u64).collect())
}

/// Extended gcd over F_p[x]: returns (g, u, v) monic g with u*a + v*b = g.
fn fp_ext_gcd(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
    let mut r0 = fp_trim(a.to_vec());
    let mut r1 = fp_trim(b.to_vec());
    let mut s0: Vec<u64> = vec![1];
    let mut s1: Vec<u64> = Vec::new();
    let mut t0: Vec<u64> = Vec::new();
    let mut t1: Vec<u64> = vec![1];
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        let ns = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        let nt = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = ns;
        t0 = t1;
        t1 = nt;
    }
    if r0.is_empty() {
        return (r0, s0, t0);
    }
    // Normalize g to be monic.
    let lead = *r0.last().unwrap();
    let inv = inverse_mod(lead, p).expect("leading coefficient is a unit mod a prime");
    let scale = |v: &[u64]| fp_trim(v.iter().map(|&c| c as u128 as u64 * inv % p).collect());
    (scale(&r0), scale(&s0), scale(&t0))
}

/// Division with remainder by an arbitrary nonzero divisor over F_p.
fn fp_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let b = fp_trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = fp_trim(a.to_vec());
    let db = b.len() - 1;
    let inv = inverse_mod(*b.last().unwrap(), p).expect("unit leading coefficient mod a prime");
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - db];
    while r.len() > db {
        let lead = *r.last().unwrap() as u128 * inv as u128 % p as u128;
        let shift = r.len() - 1 - db;
        q[shift] = lead as u64;
        for (i, &bc) in b.iter().enumerate() {
            let sub = lead * bc as u128 % p as u128;
            r[shift + i] = ((r[shift + i] as u128 + p as u128 - sub) % p as u128) as u64;
        }
        r = fp_trim(r);
        if r.is_empty() {
            break;
        }
    }
    (fp_trim(q), r)
}

// ---------------------------------------------------------------------------
// Level contexts: arithmetic inside a single F_p[x]/(f), with elements as
// fixed-width coefficient vectors. All tower internals reduce to this.

struct LevelCtx<'a> {
    p: u64,
    f: &'a [u64],
}

impl LevelCtx<'_> {
    fn dim(&self) -> usize {
        self.f.len() - 1
    }

    fn pad(&self, v: Vec<u64>) -> Vec<u64> {
        let mut v = v;
        v.resize(self.dim(), 0);
        v
    }

    fn zero(&self) -> Vec<u64> {
        vec![0; self.dim()]
    }

    fn one(&self) -> Vec<u64> {
        self.scalar(1)
    }

    fn scalar(&self, c: u64) -> Vec<u64> {
        let mut v = self.zero();
        if self.dim() > 0 {
            v[0] = c % self.p;
        }
        v
    }

    fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.pad(fp_add(a, b, self.p))
    }

    fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.pad(fp_sub(a, b, self.p))
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let prod = fp_mul(a, b, self.p);
        let (_, r) = fp_divrem(&prod, self.f, self.p);
        self.pad(r)
    }

    fn inv(&self, a: &[u64]) -> Option<Vec<u64>> {
        if self.is_zero(a) {
            return None;
        }
        let (g, u, _) = fp_ext_gcd(a, self.f, self.p);
        if g.len() != 1 {
            return None;
        }
        // g is monic of degree 0, hence exactly 1, so u*a = 1 mod f.
        let (_, r) = fp_divrem(&u, self.f, self.p);
        Some(self.pad(r))
    }

    fn pow(&self, a: &[u64], mut e: u128) -> Vec<u64> {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Elements of the level in ascending coefficient order, as raw vectors.
    /// The first coordinate is the most significant in the ordering, matching
    /// the lexicographic comparison of coefficient vectors.
    fn enumerate(&self) -> LevelIter<'_> {
        LevelIter { p: self.p, next: Some(self.zero()), _marker: core::marker::PhantomData }
    }
}

struct LevelIter<'a> {
    p: u64,
    next: Option<Vec<u64>>,
    _marker: core::marker::PhantomData<&'a ()>,
}

impl Iterator for LevelIter<'_> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let cur = self.next.take()?;
        // Increment like an odometer with the LAST coordinate least
        // significant, so successive vectors ascend lexicographically.
        let mut nxt = cur.clone();
        let mut i = nxt.len();
        loop {
            if i == 0 {
                self.next = None;
                break;
            }
            i -= 1;
            nxt[i] += 1;
            if nxt[i] < self.p {
                self.next = Some(nxt);
                break;
            }
            nxt[i] = 0;
        }
        Some(cur)
    }
}

// ---------------------------------------------------------------------------
// Polynomials over a level context: vectors of raw elements, low degree
// first, trimmed. Used for root finding and irreducibility tests.

type CPoly = Vec<Vec<u64>>;

fn cp_trim(ctx: &LevelCtx, mut v: CPoly) -> CPoly {
    while v.last().map(|c| ctx.is_zero(c)) == Some(true) {
        v.pop();
    }
    v
}

fn cp_sub(ctx: &LevelCtx, a: &CPoly, b: &CPoly) -> CPoly {
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    for i in 0..a.len().max(b.len()) {
        let x = a.get(i).cloned().unwrap_or_else(|| ctx.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| ctx.zero());
        out.push(ctx.sub(&x, &y));
    }
    cp_trim(ctx, out)
}

fn cp_mul(ctx: &LevelCtx, a: &CPoly, b: &CPoly) -> CPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ctx.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if ctx.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = ctx.mul(x, y);
            out[i + j] = ctx.add(&out[i + j], &t);
        }
    }
    cp_trim(ctx, out)
}

fn cp_divrem(ctx: &LevelCtx, a: &CPoly, b: &CPoly) -> (CPoly, CPoly) {
    let b = cp_trim(ctx, b.clone());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = cp_trim(ctx, a.clone());
    let db = b.len() - 1;
    let inv = ctx.inv(b.last().unwrap()).expect("nonzero leading coefficient is invertible");
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![ctx.zero(); r.len() - db];
    while r.len() > db {
        let lead = ctx.mul(r.last().unwrap(), &inv);
        let shift = r.len() - 1 - db;
        q[shift] = lead.clone();
        for (i, bc) in b.iter().enumerate() {
            let sub = ctx.mul(&lead, bc);
            r[shift + i] = ctx.sub(&r[shift + i], &sub);
        }
        r = cp_trim(ctx, r);
        if r.is_empty() {
            break;
        }
    }
    (cp_trim(ctx, q), r)
}

fn cp_monic(ctx: &LevelCtx, a: &CPoly) -> CPoly {
    let a = cp_trim(ctx, a.clone());
    if a.is_empty() {
        return a;
    }
    let inv = ctx.inv(a.last().unwrap()).expect("nonzero leading coefficient is invertible");
    a.iter().map(|c| ctx.mul(c, &inv)).collect()
}

fn cp_gcd(ctx: &LevelCtx, a: &CPoly, b: &CPoly) -> CPoly {
    let mut r0 = cp_trim(ctx, a.clone());
    let mut r1 = cp_trim(ctx, b.clone());
    while !r1.is_empty() {
        let (_, r) = cp_divrem(ctx, &r0, &r1);
        r0 = r1;
        r1 = r;
    }
    cp_monic(ctx, &r0)
}

fn cp_pow_mod(ctx: &LevelCtx, base: &CPoly, mut e: u128, modulus: &CPoly) -> CPoly {
    let mut b = cp_divrem(ctx, base, modulus).1;
    let mut acc = vec![ctx.one()];
    while e > 0 {
        if e & 1 == 1 {
            acc = cp_divrem(ctx, &cp_mul(ctx, &acc, &b), modulus).1;
        }
        b = cp_divrem(ctx, &cp_mul(ctx, &b, &b), modulus).1;
        e >>= 1;
    }
    cp_trim(ctx, acc)
}

/// The polynomial X as a CPoly.
fn cp_x(ctx: &LevelCtx) -> CPoly {
    vec![ctx.zero(), ctx.one()]
}

/// Field size of the context as a u128, or an error when it overflows.
fn ctx_size(ctx: &LevelCtx) -> Result<u128> {
    (ctx.p as u128)
        .checked_pow(ctx.dim() as u32)
        .ok_or(Error::BoundExceeded { what: String::from("field size"), bound: 128 })
}

/// All roots of a nonzero polynomial inside the context's field, in
/// ascending coefficient order.
fn roots_in_ctx(ctx: &LevelCtx, poly: &CPoly) -> Result<Vec<Vec<u64>>> {
    let f = cp_monic(ctx, poly);
    if f.is_empty() {
        return Err(Error::Precondition(String::from("roots of the zero polynomial")));
    }
    if f.len() == 1 {
        return Ok(Vec::new());
    }
    let q = ctx_size(ctx)?;
    // gcd(f, X^q - X) collects exactly the distinct roots in this field.
    let xq = cp_pow_mod(ctx, &cp_x(ctx), q, &f);
    let lin = cp_gcd(ctx, &cp_sub(ctx, &xq, &cp_x(ctx)), &f);
    let mut roots = Vec::new();
    split_linear_product(ctx, &lin, q, &mut roots)?;
    roots.sort();
    Ok(roots)
}

/// Splits a monic product of distinct linear factors into its roots.
fn split_linear_product(
    ctx: &LevelCtx,
    g: &CPoly,
    q: u128,
    out: &mut Vec<Vec<u64>>,
) -> Result<()> {
    if g.len() <= 1 {
        return Ok(());
    }
    if g.len() == 2 {
        // X + c, root is -c.
        let root = ctx.sub(&ctx.zero(), &g[0]);
        out.push(root);
        return Ok(());
    }
    if ctx.p == 2 {
        return Err(Error::Unsupported(String::from(
            "root splitting over even characteristic",
        )));
    }
    // Deterministic splitting: shift by successive field elements c and test
    // which roots are squares after the shift. Distinct roots disagree for
    // some c, so the scan terminates.
    for c in ctx.enumerate() {
        let shifted = vec![c.clone(), ctx.one()];
        let pw = cp_pow_mod(ctx, &shifted, (q - 1) / 2, g);
        let h = cp_gcd(ctx, &cp_sub(ctx, &pw, &vec![ctx.one()]), g);
        if h.len() > 1 && h.len() < g.len() {
            let (rest, rem) = cp_divrem(ctx, g, &h);
            debug_assert!(rem.is_empty(), "splitting factor must divide exactly");
            split_linear_product(ctx, &h, q, out)?;
            split_linear_product(ctx, &rest, q, out)?;
            return Ok(());
        }
    }
    Err(Error::Precondition(String::from(
        "no splitting shift found, polynomial was not a product of distinct linear factors",
    )))
}

/// Irreducibility of a monic polynomial over the context's field, by the
/// standard criterion: X^{q^m} = X mod f, and for each prime r | m the
/// power X^{q^{m/r}} - X is coprime to f.
fn irreducible_in_ctx(ctx: &LevelCtx, poly: &CPoly) -> Result<bool> {
    let f = cp_monic(ctx, poly);
    let m = match f.len() {
        0 => return Err(Error::Precondition(String::from("irreducibility of zero"))),
        1 => return Ok(false),
        l => l - 1,
    };
    if m == 1 {
        return Ok(true);
    }
    let q = ctx_size(ctx)?;
    let x = cp_x(ctx);
    // X^{q^m} by m successive q-th powers, staying reduced mod f.
    let mut acc = x.clone();
    for _ in 0..m {
        acc = cp_pow_mod(ctx, &acc, q, &f);
    }
    if !cp_sub(ctx, &acc, &x).is_empty() {
        return Ok(false);
    }
    for (r, _) in factorize(m as u64) {
        let k = m / r as usize;
        let mut a = x.clone();
        for _ in 0..k {
            a = cp_pow_mod(ctx, &a, q, &f);
        }
        let g = cp_gcd(ctx, &cp_sub(ctx, &a, &x), &f);
        if g.len() > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The lexicographically least monic irreducible of degree d over F_p,
/// comparing coefficient tuples from the leading coefficient down.
fn lex_least_irreducible(p: u64, d: usize) -> Result<Vec<u64>> {
    let base = [0, 1];
    let ctx = LevelCtx { p, f: &base };
    if d == 1 {
        // x itself: the least monic linear polynomial.
        return Ok(vec![0, 1]);
    }
    // Enumerate the d lower coefficients as base-p digits, most significant
    // digit first, and take the first irreducible candidate.
    let total = (p as u128)
        .checked_pow(d as u32)
        .ok_or(Error::BoundExceeded { what: String::from("irreducible search space"), bound: 128 })?;
    let mut code = 0u128;
    while code < total {
        let mut f = vec![0u64; d + 1];
        f[d] = 1;
        let mut c = code;
        for i in 0..d {
            f[i] = (c % p as u128) as u64;
            c /= p as u128;
        }
        let cf: CPoly = f.iter().map(|&v| ctx.pad(vec![v])).collect();
        if irreducible_in_ctx(&ctx, &cf)? {
            return Ok(f);
        }
        code += 1;
    }
    Err(Error::Precondition(String::from("no irreducible polynomial found, impossible")))
}

// ---------------------------------------------------------------------------
// The tower and its elements.

/// An element of a [`FieldTower`], in canonical form: `d` is the smallest
/// level containing it and `c` its coordinates in that level's power basis,
/// constant coefficient first. Ordering is by (level, coordinates), which is
/// the tie-breaking order used by every search in the crate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Fq {
    d: usize,
    c: Vec<u64>,
}

impl Fq {
    /// The level this element canonically lives at.
    pub fn level(&self) -> usize {
        self.d
    }

    /// Coordinates in the power basis of its canonical level.
    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    /// Whether this is the zero element.
    pub fn is_zero(&self) -> bool {
        self.d == 1 && self.c[0] == 0
    }

    /// Whether this is the multiplicative identity.
    pub fn is_one(&self) -> bool {
        self.d == 1 && self.c[0] == 1
    }
}

struct Level {
    minpoly: Vec<u64>,
    /// Rows are the top-level coordinates of gen^0, ..., gen^{d-1}.
    to_top: Vec<Vec<u64>>,
}

/// A growing tower of finite fields over a fixed prime.
///
/// - the top level degree only grows, by least common multiples;
/// - every divisor of the top degree has a level, so canonical forms are
///   stable: they never depend on which levels happen to exist;
/// - all growth is behind `&mut self`; arithmetic never mutates observable
///   element values, only extends the registry.
pub struct FieldTower {
    p: u64,
    top: usize,
    levels: BTreeMap<usize, Level>,
}

impl FieldTower {
    /// A fresh tower over the prime p, holding only the prime field.
    pub fn new(p: u64) -> Result<FieldTower> {
        if p < 2 || factorize(p) != vec![(p, 1)] {
            return Err(Error::InvalidInput(String::from("tower characteristic must be prime")));
        }
        let mut levels = BTreeMap::new();
        levels.insert(1, Level { minpoly: vec![0, 1], to_top: vec![vec![1]] });
        Ok(FieldTower { p, top: 1, levels })
    }

    /// The characteristic.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Degree of the current top level over the prime field.
    pub fn top_degree(&self) -> usize {
        self.top
    }

    /// The defining polynomial of a level, if that level exists.
    pub fn minpoly(&self, d: usize) -> Option<&[u64]> {
        self.levels.get(&d).map(|l| l.minpoly.as_slice())
    }

    fn top_ctx(&self) -> LevelCtx<'_> {
        LevelCtx { p: self.p, f: &self.levels[&self.top].minpoly }
    }

    /// Ensures a level of the given degree exists, growing the top to the
    /// least common multiple if needed. The level gets the lexicographically
    /// least defining polynomial unless it was created explicitly before.
    pub fn ensure_degree(&mut self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::InvalidInput(String::from("level degree must be positive")));
        }
        let new_top = lcm(self.top as u64, d as u64) as usize;
        if new_top > TOWER_DEGREE_CAP {
            return Err(Error::BoundExceeded {
                what: String::from("tower degree"),
                bound: TOWER_DEGREE_CAP,
            });
        }
        if new_top != self.top {
            self.grow_top(new_top, None, None)?;
        }
        debug_assert!(self.levels.contains_key(&d), "divisor levels exist after growth");
        Ok(())
    }

    /// Ensures a level of degree d defined by the given monic irreducible
    /// polynomial over the prime field. Errors if the level already exists
    /// with a different polynomial.
    pub fn ensure_degree_with(&mut self, d: usize, minpoly: &[u64]) -> Result<()> {
        if d == 0 || minpoly.len() != d + 1 {
            return Err(Error::InvalidInput(String::from(
                "defining polynomial degree does not match the level",
            )));
        }
        let mp: Vec<u64> = minpoly.iter().map(|&c| c % self.p).collect();
        if *mp.last().unwrap() != 1 {
            return Err(Error::InvalidInput(String::from("defining polynomial must be monic")));
        }
        let base = [0, 1];
        let ctx = LevelCtx { p: self.p, f: &base };
        let cf: CPoly = mp.iter().map(|&v| ctx.pad(vec![v])).collect();
        if !irreducible_in_ctx(&ctx, &cf)? {
            return Err(Error::InvalidInput(String::from(
                "defining polynomial must be irreducible",
            )));
        }
        if let Some(level) = self.levels.get(&d) {
            if level.minpoly == mp {
                return Ok(());
            }
            return Err(Error::Precondition(String::from(
                "level already defined by a different polynomial",
            )));
        }
        let new_top = lcm(self.top as u64, d as u64) as usize;
        if new_top > TOWER_DEGREE_CAP {
            return Err(Error::BoundExceeded {
                what: String::from("tower degree"),
                bound: TOWER_DEGREE_CAP,
            });
        }
        if new_top == d {
            // The new level is the new top, so it carries the explicit
            // polynomial itself.
            return self.grow_top(new_top, Some(mp), None);
        }
        if new_top != self.top {
            // Grow first, leaving degree d for the explicit polynomial.
            self.grow_top(new_top, None, Some(d))?;
        }
        self.create_level(d, mp)
    }

    /// Grows the top level to new_top (a proper multiple of the current
    /// top), re-embedding all existing levels, then fills in levels for all
    /// divisors of the new top except `skip`. The new top's defining
    /// polynomial defaults to the lexicographically least irreducible.
    fn grow_top(
        &mut self,
        new_top: usize,
        top_minpoly: Option<Vec<u64>>,
        skip: Option<usize>,
    ) -> Result<()> {
        debug_assert!(new_top % self.top == 0 && new_top > self.top);
        let new_mp = match top_minpoly {
            Some(mp) => mp,
            None => lex_least_irreducible(self.p, new_top)?,
        };
        // Embed the old top by the least root of its defining polynomial.
        let old_mp = self.levels[&self.top].minpoly.clone();
        let ctx = LevelCtx { p: self.p, f: &new_mp };
        let cf: CPoly = old_mp.iter().map(|&v| ctx.pad(vec![v])).collect();
        let roots = roots_in_ctx(&ctx, &cf)?;
        let root = roots.into_iter().next().ok_or_else(|| {
            Error::Precondition(String::from("old defining polynomial has no root upstairs"))
        })?;
        // Power basis of the chosen root: old coordinates become new ones
        // linearly, so all recorded embeddings transport coherently.
        let mut powers = Vec::with_capacity(self.top);
        let mut acc = ctx.one();
        for _ in 0..self.top {
            powers.push(acc.clone());
            acc = ctx.mul(&acc, &root);
        }
        let transport = |row: &[u64]| -> Vec<u64> {
            let mut out = ctx.zero();
            for (j, &coef) in row.iter().enumerate() {
                let scaled = ctx.mul(&powers[j], &ctx.scalar(coef));
                out = ctx.add(&out, &scaled);
            }
            out
        };
        for level in self.levels.values_mut() {
            let moved: Vec<Vec<u64>> = level.to_top.iter().map(|r| transport(r)).collect();
            level.to_top = moved;
        }
        let mut id_rows = Vec::with_capacity(new_top);
        for i in 0..new_top {
            let mut r = vec![0u64; new_top];
            r[i] = 1;
            id_rows.push(r);
        }
        self.levels.insert(new_top, Level { minpoly: new_mp, to_top: id_rows });
        self.top = new_top;
        // Fill in any missing divisor levels with default polynomials.
        let divisors: Vec<usize> =
            (1..=new_top).filter(|d| new_top % d == 0 && !self.levels.contains_key(d)).collect();
        for d in divisors {
            if Some(d) == skip {
                continue;
            }
            let mp = lex_least_irreducible(self.p, d)?;
            self.create_level(d, mp)?;
        }
        Ok(())
    }

    /// Creates a level at degree d (a divisor of the top, not yet present)
    /// with the given defining polynomial, embedding it by its least root.
    fn create_level(&mut self, d: usize, mp: Vec<u64>) -> Result<()> {
        debug_assert!(self.top % d == 0 && !self.levels.contains_key(&d));
        let top_mp = self.levels[&self.top].minpoly.clone();
        let ctx = LevelCtx { p: self.p, f: &top_mp };
        let cf: CPoly = mp.iter().map(|&v| ctx.pad(vec![v])).collect();
        let roots = roots_in_ctx(&ctx, &cf)?;
        let root = roots.into_iter().next().ok_or_else(|| {
            Error::Precondition(String::from("defining polynomial has no root in the top level"))
        })?;
        let mut rows = Vec::with_capacity(d);
        let mut acc = ctx.one();
        for _ in 0..d {
            rows.push(acc.clone());
            acc = ctx.mul(&acc, &root);
        }
        self.levels.insert(d, Level { minpoly: mp, to_top: rows });
        Ok(())
    }

    /// Lifts level-d coordinates to raw top-level coordinates.
    fn lift_level(&self, d: usize, coords: &[u64]) -> Vec<u64> {
        let level = &self.levels[&d];
        let ctx = self.top_ctx();
        let mut out = ctx.zero();
        for (j, &coef) in coords.iter().enumerate() {
            let scaled = ctx.mul(&level.to_top[j], &ctx.scalar(coef));
            out = ctx.add(&out, &scaled);
        }
        out
    }

    /// Lifts an element to raw top-level coordinates.
    fn raw(&self, x: &Fq) -> Vec<u64> {
        self.lift_level(x.d, &x.c)
    }

    /// Canonicalizes raw level-d coordinates into an element.
    fn canon_from_level(&self, d: usize, coords: &[u64]) -> Fq {
        let raw = self.lift_level(d, coords);
        self.canon(&raw)
    }

    /// Canonicalizes raw top coordinates into the smallest containing level.
    fn canon(&self, raw: &[u64]) -> Fq {
        for (&d, level) in &self.levels {
            if d == self.top {
                break;
            }
            // Solve c * to_top = raw over F_p.
            let m = ZnMatrix::from_rows(self.p, self.top, &level.to_top)
                .expect("embedding rows have top width");
            if let Some(c) = m.solve_left(raw) {
                return Fq { d, c };
            }
        }
        Fq { d: self.top, c: raw.to_vec() }
    }

    /// Raw coordinates of x inside a specific level, when x lies there.
    fn raw_in_level(&self, x: &Fq, d: usize) -> Result<Vec<u64>> {
        if d == self.top {
            return Ok(self.raw(x));
        }
        let level = self.levels.get(&d).ok_or_else(|| {
            Error::Precondition(String::from("requested level does not exist"))
        })?;
        let m = ZnMatrix::from_rows(self.p, self.top, &level.to_top)
            .expect("embedding rows have top width");
        m.solve_left(&self.raw(x)).ok_or_else(|| {
            Error::Precondition(String::from("element does not lie in the requested level"))
        })
    }

    /// The prime-field element v mod p.
    pub fn from_prime(&self, v: u64) -> Fq {
        Fq { d: 1, c: vec![v % self.p] }
    }

    /// Zero.
    pub fn zero(&self) -> Fq {
        self.from_prime(0)
    }

    /// One.
    pub fn one(&self) -> Fq {
        self.from_prime(1)
    }

    /// The power-basis generator of the level of degree d.
    pub fn generator(&mut self, d: usize) -> Result<Fq> {
        self.ensure_degree(d)?;
        if d == 1 {
            return Ok(self.zero());
        }
        let mut c = vec![0u64; d];
        c[1] = 1;
        Ok(Fq { d, c })
    }

    /// The element with the given coordinates at level d, canonicalized.
    pub fn element(&mut self, d: usize, coeffs: &[u64]) -> Result<Fq> {
        self.ensure_degree(d)?;
        if coeffs.len() > d {
            return Err(Error::InvalidInput(String::from(
                "more coordinates than the level degree",
            )));
        }
        let mut c: Vec<u64> = coeffs.iter().map(|&v| v % self.p).collect();
        c.resize(d, 0);
        let raw = self.raw(&Fq { d, c });
        Ok(self.canon(&raw))
    }

    fn bin<F>(&mut self, a: &Fq, b: &Fq, f: F) -> Result<Fq>
    where
        F: FnOnce(&LevelCtx, &[u64], &[u64]) -> Vec<u64>,
    {
        let d = lcm(a.d as u64, b.d as u64) as usize;
        self.ensure_degree(d)?;
        let ra = self.raw(a);
        let rb = self.raw(b);
        let out = f(&self.top_ctx(), &ra, &rb);
        Ok(self.canon(&out))
    }

    /// Sum.
    pub fn add(&mut self, a: &Fq, b: &Fq) -> Result<Fq> {
        self.bin(a, b, |ctx, x, y| ctx.add(x, y))
    }

    /// Difference.
    pub fn sub(&mut self, a: &Fq, b: &Fq) -> Result<Fq> {
        self.bin(a, b, |ctx, x, y| ctx.sub(x, y))
    }

    /// Product.
    pub fn mul(&mut self, a: &Fq, b: &Fq) -> Result<Fq> {
        self.bin(a, b, |ctx, x, y| ctx.mul(x, y))
    }

    /// Additive inverse.
    pub fn neg(&mut self, a: &Fq) -> Result<Fq> {
        let z = self.zero();
        self.sub(&z, a)
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&mut self, a: &Fq) -> Result<Fq> {
        if a.is_zero() {
            return Err(Error::Precondition(String::from("inverse of zero")));
        }
        self.ensure_degree(a.d)?;
        let ra = self.raw(a);
        let out = self
            .top_ctx()
            .inv(&ra)
            .ok_or_else(|| Error::Precondition(String::from("inverse of zero")))?;
        Ok(self.canon(&out))
    }

    /// Quotient a / b; errors when b is zero.
    pub fn div(&mut self, a: &Fq, b: &Fq) -> Result<Fq> {
        let bi = self.inv(b)?;
        self.mul(a, &bi)
    }

    /// Power with a signed exponent; negative exponents invert first.
    pub fn pow(&mut self, a: &Fq, e: i128) -> Result<Fq> {
        let (base, exp) = if e < 0 { (self.inv(a)?, (-e) as u128) } else { (a.clone(), e as u128) };
        self.ensure_degree(base.d)?;
        let rb = self.raw(&base);
        let out = self.top_ctx().pow(&rb, exp);
        Ok(self.canon(&out))
    }

    /// The k-fold Frobenius a^(p^k).
    pub fn frobenius(&mut self, a: &Fq, k: usize) -> Result<Fq> {
        let mut out = a.clone();
        for _ in 0..(k % a.d.max(1)) {
            out = self.pow(&out, self.p as i128)?;
        }
        Ok(out)
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&mut self, a: &Fq) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::Precondition(String::from("order of zero")));
        }
        let q = (self.p as u128)
            .checked_pow(a.d as u32)
            .filter(|&q| q <= u64::MAX as u128)
            .ok_or(Error::BoundExceeded { what: String::from("field size"), bound: 64 })?
            as u64;
        let mut order = q - 1;
        for (r, _) in factorize(q - 1) {
            while order % r == 0 && self.pow(a, (order / r) as i128)?.is_one() {
                order /= r;
            }
        }
        Ok(order)
    }

    /// The least y with y^n = a, searching levels of ascending degree.
    /// Errors when no such y exists within the tower degree cap.
    pub fn nth_root_min(&mut self, a: &Fq, n: u64) -> Result<Fq> {
        if n == 0 {
            return Err(Error::InvalidInput(String::from("zeroth root")));
        }
        if a.is_zero() {
            return Ok(self.zero());
        }
        let mut m = 1usize;
        while a.d * m <= TOWER_DEGREE_CAP {
            let d = a.d * m;
            let q = (self.p as u128).checked_pow(d as u32).ok_or(Error::BoundExceeded {
                what: String::from("field size"),
                bound: 128,
            })?;
            // Solvability of y^n = a in a cyclic group of order q - 1.
            let g = gcd128(n as u128, q - 1);
            self.ensure_degree(d)?;
            if self.pow(a, ((q - 1) / g) as i128)?.is_one() {
                let mp = self.levels[&d].minpoly.clone();
                let ctx = LevelCtx { p: self.p, f: &mp };
                let mut poly: CPoly = vec![ctx.zero(); n as usize + 1];
                let ra = self.raw_in_level(a, d)?;
                poly[0] = ctx.sub(&ctx.zero(), &ctx.pad(ra));
                poly[n as usize] = ctx.one();
                let roots = roots_in_ctx(&ctx, &poly)?;
                let best = roots
                    .into_iter()
                    .map(|r| self.canon_from_level(d, &r))
                    .min()
                    .expect("solvability check guarantees a root");
                return Ok(best);
            }
            m += 1;
        }
        Err(Error::BoundExceeded {
            what: String::from("root extension degree"),
            bound: TOWER_DEGREE_CAP,
        })
    }

    /// A fixed primitive n-th root of unity: the least element of exact
    /// multiplicative order n, living in the smallest level that has one.
    pub fn zeta(&mut self, n: u64) -> Result<Fq> {
        if n == 0 || gcd(n, self.p) != 1 {
            return Err(Error::Precondition(String::from(
                "roots of unity need an order invertible in the field",
            )));
        }
        if n == 1 {
            return Ok(self.one());
        }
        // The smallest level with n-th roots of unity is the multiplicative
        // order of p mod n.
        let mut d = 1usize;
        loop {
            if pow_mod(self.p, d as u64, n) == 1 {
                break;
            }
            d += 1;
            if d > TOWER_DEGREE_CAP {
                return Err(Error::BoundExceeded {
                    what: String::from("cyclotomic level degree"),
                    bound: TOWER_DEGREE_CAP,
                });
            }
        }
        self.ensure_degree(d)?;
        let size = (self.p as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if size > ELEMENT_SCAN_CAP {
            return Err(Error::BoundExceeded {
                what: String::from("cyclotomic search space"),
                bound: ELEMENT_SCAN_CAP as usize,
            });
        }
        let primes: Vec<u64> = factorize(n).into_iter().map(|(r, _)| r).collect();
        let mp = self.levels[&d].minpoly.clone();
        let ctx = LevelCtx { p: self.p, f: &mp };
        for cand in ctx.enumerate() {
            if ctx.is_zero(&cand) {
                continue;
            }
            if ctx.pow(&cand, n as u128) != ctx.one() {
                continue;
            }
            let mut exact = true;
            for &r in &primes {
                if ctx.pow(&cand, (n / r) as u128) == ctx.one() {
                    exact = false;
                    break;
                }
            }
            if exact {
                // Elements of exact order n generate the level, so the raw
                // vector is already the canonical form at level d.
                let el = Fq { d, c: cand };
                debug_assert_eq!(self.canon(&self.raw(&el)), el);
                return Ok(el);
            }
        }
        Err(Error::Precondition(String::from("no primitive root found, impossible")))
    }
}

// ---------------------------------------------------------------------------
// Polynomials over a tower.

/// A dense univariate polynomial with coefficients in a [`FieldTower`],
/// constant term first and no trailing zero coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Poly {
    coeffs: Vec<Fq>,
}

impl Poly {
    /// Builds a polynomial from coefficients, trimming trailing zeros.
    pub fn new(mut coeffs: Vec<Fq>) -> Poly {
        while coeffs.last().map(Fq::is_zero) == Some(true) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// The zero polynomial.
    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    /// A constant polynomial.
    pub fn constant(c: Fq) -> Poly {
        Poly::new(vec![c])
    }

    /// The monomial c * X^k.
    pub fn monomial(c: Fq, k: usize) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Fq { d: 1, c: vec![0] }; k];
        coeffs.push(c);
        Poly { coeffs }
    }

    /// Degree, None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Whether this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The coefficient of X^i (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Fq {
        self.coeffs.get(i).cloned().unwrap_or(Fq { d: 1, c: vec![0] })
    }

    /// All coefficients, constant term first.
    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    /// Sum.
    pub fn add(&self, other: &Poly, t: &mut FieldTower) -> Result<Poly> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            out.push(t.add(&self.coeff(i), &other.coeff(i))?);
        }
        Ok(Poly::new(out))
    }

    /// Difference.
    pub fn sub(&self, other: &Poly, t: &mut FieldTower) -> Result<Poly> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            out.push(t.sub(&self.coeff(i), &other.coeff(i))?);
        }
        Ok(Poly::new(out))
    }

    /// Product.
    pub fn mul(&self, other: &Poly, t: &mut FieldTower) -> Result<Poly> {
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero());
        }
        let mut out = vec![t.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let prod = t.mul(a, b)?;
                out[i + j] = t.add(&out[i + j], &prod)?;
            }
        }
        Ok(Poly::new(out))
    }

    /// Scales by a constant.
    pub fn scale(&self, c: &Fq, t: &mut FieldTower) -> Result<Poly> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(t.mul(a, c)?);
        }
        Ok(Poly::new(out))
    }

    /// Division with remainder; the divisor must be nonzero.
    pub fn divrem(&self, other: &Poly, t: &mut FieldTower) -> Result<(Poly, Poly)> {
        if other.is_zero() {
            return Err(Error::Precondition(String::from("division by the zero polynomial")));
        }
        let db = other.coeffs.len() - 1;
        let inv = t.inv(other.coeffs.last().unwrap())?;
        let mut r = self.clone();
        if r.coeffs.len() <= db {
            return Ok((Poly::zero(), r));
        }
        let mut q = vec![t.zero(); r.coeffs.len() - db];
        while r.coeffs.len() > db {
            let lead = t.mul(r.coeffs.last().unwrap(), &inv)?;
            let shift = r.coeffs.len() - 1 - db;
            q[shift] = lead.clone();
            for (i, bc) in other.coeffs.iter().enumerate() {
                let sub = t.mul(&lead, bc)?;
                r.coeffs[shift + i] = t.sub(&r.coeffs[shift + i], &sub)?;
            }
            r = Poly::new(r.coeffs);
            if r.is_zero() {
                break;
            }
        }
        Ok((Poly::new(q), r))
    }

    /// Monic associate; errors on zero.
    pub fn monic(&self, t: &mut FieldTower) -> Result<Poly> {
        if self.is_zero() {
            return Err(Error::Precondition(String::from("monic associate of zero")));
        }
        let inv = t.inv(self.coeffs.last().unwrap())?;
        self.scale(&inv, t)
    }

    /// Monic greatest common divisor.
    pub fn gcd_monic(&self, other: &Poly, t: &mut FieldTower) -> Result<Poly> {
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        while !r1.is_zero() {
            let (_, r) = r0.divrem(&r1, t)?;
            r0 = r1;
            r1 = r;
        }
        if r0.is_zero() {
            return Ok(r0);
        }
        r0.monic(t)
    }

    /// Evaluation by Horner's rule.
    pub fn eval(&self, x: &Fq, t: &mut FieldTower) -> Result<Fq> {
        let mut acc = t.zero();
        for c in self.coeffs.iter().rev() {
            acc = t.mul(&acc, x)?;
            acc = t.add(&acc, c)?;
        }
        Ok(acc)
    }

    /// Formal derivative.
    pub fn derivative(&self, t: &mut FieldTower) -> Result<Poly> {
        let mut out = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            let factor = t.from_prime(i as u64 % t.p());
            out.push(t.mul(c, &factor)?);
        }
        Ok(Poly::new(out))
    }

    /// Lifts all coefficients to coordinates in one level, which must
    /// contain them all.
    fn coords_in_level(&self, d: usize, t: &mut FieldTower) -> Result<CPoly> {
        t.ensure_degree(d)?;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if d % c.level() != 0 {
                return Err(Error::Precondition(String::from(
                    "coefficient does not lie in the requested level",
                )));
            }
            let mut v = t.raw_in_level(c, d)?;
            v.resize(d, 0);
            out.push(v);
        }
        Ok(out)
    }

    /// All roots lying in the level of degree d, in ascending element order.
    pub fn roots_in_level(&self, d: usize, t: &mut FieldTower) -> Result<Vec<Fq>> {
        if self.is_zero() {
            return Err(Error::Precondition(String::from("roots of the zero polynomial")));
        }
        let coords = self.coords_in_level(d, t)?;
        let mp = t.levels[&d].minpoly.clone();
        let ctx = LevelCtx { p: t.p, f: &mp };
        let roots = roots_in_ctx(&ctx, &coords)?;
        let mut out: Vec<Fq> = roots.into_iter().map(|r| t.canon_from_level(d, &r)).collect();
        out.sort();
        Ok(out)
    }

    /// All roots in the algebraic closure reachable within the tower degree
    /// cap, in ascending element order. Every root of a degree-m polynomial
    /// generates an extension of degree at most m over the coefficient
    /// field, so scanning those levels finds them all.
    pub fn all_roots(&self, t: &mut FieldTower) -> Result<Vec<Fq>> {
        let deg = self
            .degree()
            .ok_or_else(|| Error::Precondition(String::from("roots of the zero polynomial")))?;
        let mut base = 1u64;
        for c in &self.coeffs {
            base = lcm(base, c.level() as u64);
        }
        let mut seen = alloc::collections::BTreeSet::new();
        for e in 1..=deg.max(1) {
            let d = lcm(base, e as u64) as usize;
            if d > TOWER_DEGREE_CAP {
                continue;
            }
            for r in self.roots_in_level(d, t)? {
                seen.insert(r);
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Irreducibility over the level of degree d, which must contain all
    /// coefficients.
    pub fn is_irreducible_over(&self, d: usize, t: &mut FieldTower) -> Result<bool> {
        if self.is_zero() {
            return Err(Error::Precondition(String::from("irreducibility of zero")));
        }
        let coords = self.coords_in_level(d, t)?;
        let mp = t.levels[&d].minpoly.clone();
        let ctx = LevelCtx { p: t.p, f: &mp };
        irreducible_in_ctx(&ctx, &coords)
    }
}
