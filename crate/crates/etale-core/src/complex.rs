//! Cochain complexes of presented Λ-modules.
//!
//! Complexes are finite windows of modules with differentials raising the
//! degree by one, validated to square to zero on classes. Cohomology at a
//! degree is a subquotient of the term there, so classes come with explicit
//! representative rows. Cones, shifts, truncations, and totalizations are
//! assembled as block matrices over the same machinery.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat::{RowSpan, ZnMatrix};
use crate::module::{direct_sum, subquotient, FpModule, ModuleMap};

/// A bounded cochain complex: terms in degrees lowest, lowest+1, ... with
/// differentials d^i: C^i -> C^{i+1}.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    lowest: i32,
    terms: Vec<FpModule>,
    diffs: Vec<ModuleMap>,
}

impl ChainComplex {
    /// Build a complex from consecutive terms and differentials.
    ///
    /// - diffs[k] must map terms[k] to terms[k+1]; d then d must vanish on
    ///   classes.
    pub fn new(lowest: i32, terms: Vec<FpModule>, diffs: Vec<ModuleMap>) -> Result<ChainComplex> {
        if terms.is_empty() {
            return Err(Error::InvalidInput(String::from("complex needs at least one term")));
        }
        if diffs.len() + 1 != terms.len() {
            return Err(Error::DimensionMismatch(String::from(
                "a complex with t terms needs t - 1 differentials",
            )));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.source() != &terms[k] || d.target() != &terms[k + 1] {
                return Err(Error::Precondition(format!(
                    "differential {k} endpoints do not match the terms"
                )));
            }
        }
        for k in 0..diffs.len().saturating_sub(1) {
            let dd = diffs[k].compose(&diffs[k + 1])?;
            if !dd.is_zero_map() {
                return Err(Error::Precondition(format!(
                    "differentials at positions {k} and {} do not square to zero",
                    k + 1
                )));
            }
        }
        Ok(ChainComplex { lowest, terms, diffs })
    }

    /// A complex concentrated in one degree.
    pub fn concentrated(module: FpModule, degree: i32) -> ChainComplex {
        ChainComplex { lowest: degree, terms: vec![module], diffs: Vec::new() }
    }

    /// Lowest degree carrying a term.
    pub fn lowest(&self) -> i32 {
        self.lowest
    }

    /// Highest degree carrying a term.
    pub fn highest(&self) -> i32 {
        self.lowest + self.terms.len() as i32 - 1
    }

    /// Modulus of the coefficient ring.
    pub fn n(&self) -> u64 {
        self.terms[0].n()
    }

    /// The term at absolute degree i, when inside the window.
    pub fn term(&self, i: i32) -> Option<&FpModule> {
        if i < self.lowest || i > self.highest() {
            None
        } else {
            Some(&self.terms[(i - self.lowest) as usize])
        }
    }

    /// The differential leaving degree i, when both endpoints exist.
    pub fn differential(&self, i: i32) -> Option<&ModuleMap> {
        if i < self.lowest || i >= self.highest() {
            None
        } else {
            Some(&self.diffs[(i - self.lowest) as usize])
        }
    }

    /// Cohomology at degree i: cocycles modulo coboundaries and relations.
    ///
    /// - returns the module together with representative rows: generator k
    ///   is the cocycle reps.row(k) in the generators of the term at i.
    /// - degrees outside the window return the zero module.
    pub fn cohomology_at(&self, i: i32) -> Result<(FpModule, ZnMatrix)> {
        let n = self.n();
        let term = match self.term(i) {
            Some(t) => t,
            None => return Ok((FpModule::zero(n), ZnMatrix::zero(n, 0, 0))),
        };
        let g = term.gens();
        // Cocycles: everything, or the kernel of the outgoing differential
        // on classes.
        let z = match self.differential(i) {
            None => ZnMatrix::identity(n, g),
            Some(d) => {
                let stacked = d.matrix().vstack(d.target().relations())?;
                stacked.left_kernel().column_block(0, g)
            }
        };
        // Coboundaries: the incoming differential's rows plus the term's
        // own relations.
        let b = match self.differential(i - 1) {
            None => term.relations().clone(),
            Some(d) => d.matrix().vstack(term.relations())?,
        };
        subquotient(n, g, &z, &b)
    }

    /// All cohomology modules across the window, lowest degree first.
    pub fn all_cohomology(&self) -> Result<Vec<(i32, FpModule, ZnMatrix)>> {
        let mut out = Vec::new();
        for i in self.lowest..=self.highest() {
            let (h, reps) = self.cohomology_at(i)?;
            out.push((i, h, reps));
        }
        Ok(out)
    }

    /// True when every cohomology module vanishes.
    pub fn is_acyclic(&self) -> Result<bool> {
        for i in self.lowest..=self.highest() {
            if !self.cohomology_at(i)?.0.is_trivial() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The multiplicative Euler characteristic prod |H^i|^(-1)^i, returned
    /// as a reduced fraction (numerator, denominator).
    pub fn euler_fraction(&self) -> Result<(u128, u128)> {
        let mut num: u128 = 1;
        let mut den: u128 = 1;
        for i in self.lowest..=self.highest() {
            let (h, _) = self.cohomology_at(i)?;
            let o = h.order();
            if i.rem_euclid(2) == 0 {
                num = num.checked_mul(o).expect("euler numerator overflow");
            } else {
                den = den.checked_mul(o).expect("euler denominator overflow");
            }
        }
        let g = gcd_u128(num, den);
        Ok((num / g, den / g))
    }

    /// Shift degrees down by k (the term once at degree i sits at i - k),
    /// scaling differentials by (-1)^k.
    pub fn shift(&self, k: i32) -> ChainComplex {
        let sign_flip = k.rem_euclid(2) == 1;
        let diffs = self
            .diffs
            .iter()
            .map(|d| if sign_flip { d.neg() } else { d.clone() })
            .collect();
        ChainComplex { lowest: self.lowest - k, terms: self.terms.clone(), diffs }
    }

    /// Truncate to degrees <= r, replacing the term at r by the kernel of
    /// the outgoing differential. Degrees above r vanish; cohomology at
    /// degrees <= r is unchanged.
    pub fn truncate_above(&self, r: i32) -> Result<ChainComplex> {
        if r < self.lowest {
            return Err(Error::Precondition(String::from(
                "truncation degree below the complex window",
            )));
        }
        if r >= self.highest() {
            return Ok(self.clone());
        }
        let cut = (r - self.lowest) as usize;
        let d_out = &self.diffs[cut];
        let (ker, incl) = d_out.kernel()?;
        let mut terms: Vec<FpModule> = self.terms[..cut].to_vec();
        terms.push(ker.clone());
        let mut diffs: Vec<ModuleMap> = self.diffs[..cut.saturating_sub(1)].to_vec();
        if cut > 0 {
            // Factor the incoming differential through the kernel
            // inclusion.
            let d_in = &self.diffs[cut - 1];
            let span = RowSpan::from_matrix(incl.matrix());
            let mut rows = Vec::with_capacity(d_in.source().gens());
            for i in 0..d_in.source().gens() {
                let img = d_in.matrix().row(i);
                let coeffs = span.express(img).ok_or_else(|| {
                    Error::Precondition(String::from(
                        "incoming differential does not land in the kernel",
                    ))
                })?;
                rows.push(coeffs);
            }
            let mat = ZnMatrix::from_rows(self.n(), ker.gens(), &rows)?;
            diffs.push(ModuleMap::new(d_in.source().clone(), ker, mat)?);
        }
        ChainComplex::new(self.lowest, terms, diffs)
    }
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// A degreewise map of complexes commuting with the differentials.
#[derive(Clone, Debug)]
pub struct ChainMap {
    source: ChainComplex,
    target: ChainComplex,
    // One map per degree of the common window; degrees where either side
    // is missing are represented by zero maps to or from zero modules.
    maps: Vec<ModuleMap>,
    lowest: i32,
}

impl ChainMap {
    /// Build a chain map from per-degree maps.
    ///
    /// - `maps[k]` must map source.term(lowest + k) to
    ///   target.term(lowest + k); every degree in which both complexes have
    ///   a term must be covered.
    /// - validates the commuting squares on classes.
    pub fn new(
        source: ChainComplex,
        target: ChainComplex,
        lowest: i32,
        maps: Vec<ModuleMap>,
    ) -> Result<ChainMap> {
        // Check coverage and endpoints.
        for (k, f) in maps.iter().enumerate() {
            let deg = lowest + k as i32;
            let s = source.term(deg).ok_or_else(|| {
                Error::Precondition(format!("chain map covers degree {deg} missing in source"))
            })?;
            let t = target.term(deg).ok_or_else(|| {
                Error::Precondition(format!("chain map covers degree {deg} missing in target"))
            })?;
            if f.source() != s || f.target() != t {
                return Err(Error::Precondition(format!(
                    "chain map component at degree {deg} has wrong endpoints"
                )));
            }
        }
        let lo = source.lowest().max(target.lowest());
        let hi = source.highest().min(target.highest());
        for deg in lo..=hi {
            let k = deg - lowest;
            if k < 0 || k as usize >= maps.len() {
                return Err(Error::Precondition(format!(
                    "chain map misses degree {deg} present in both complexes"
                )));
            }
        }
        // Commuting squares: f_i then d_T equals d_S then f_{i+1}, wherever
        // all pieces exist.
        for deg in lo..hi {
            let k = (deg - lowest) as usize;
            if let (Some(ds), Some(dt)) = (source.differential(deg), target.differential(deg)) {
                if (deg + 1 - lowest) as usize >= maps.len() {
                    continue;
                }
                let lhs = maps[k].compose(dt)?;
                let rhs = ds.compose(&maps[k + 1])?;
                if !lhs.eq_map(&rhs) {
                    return Err(Error::Precondition(format!(
                        "chain map square at degree {deg} does not commute"
                    )));
                }
            }
        }
        Ok(ChainMap { source, target, maps, lowest })
    }

    /// Source complex.
    pub fn source(&self) -> &ChainComplex {
        &self.source
    }

    /// Target complex.
    pub fn target(&self) -> &ChainComplex {
        &self.target
    }

    /// The component at absolute degree i, if covered.
    pub fn component(&self, i: i32) -> Option<&ModuleMap> {
        let k = i - self.lowest;
        if k < 0 {
            None
        } else {
            self.maps.get(k as usize)
        }
    }

    /// The map induced on cohomology at degree i.
    pub fn induced_on_cohomology(&self, i: i32) -> Result<ModuleMap> {
        let (hs, s_reps) = self.source.cohomology_at(i)?;
        let (ht, t_reps) = self.target.cohomology_at(i)?;
        let n = self.source.n();
        if hs.is_trivial() || ht.is_trivial() {
            return ModuleMap::new(hs, ht, ZnMatrix::zero(n, s_reps.rows(), t_reps.rows()));
        }
        let f = self.component(i).ok_or_else(|| {
            Error::Precondition(format!("chain map has no component at degree {i}"))
        })?;
        let t_span = RowSpan::from_matrix(&t_reps);
        let mut rows = Vec::with_capacity(hs.gens());
        for k in 0..hs.gens() {
            let cocycle = s_reps.row(k);
            let image = f.apply(cocycle);
            // The image class may differ from a representative combination
            // by a coboundary plus a relation; reduce that tail away before
            // expressing.
            let coeffs = express_modulo(&t_span, &image, &self.target, i)?;
            rows.push(coeffs);
        }
        let mat = ZnMatrix::from_rows(n, ht.gens(), &rows)?;
        ModuleMap::new(hs, ht, mat)
    }

    /// True when the map induces isomorphisms on all cohomology (checked
    /// over the union of both windows).
    pub fn is_quasi_isomorphism(&self) -> Result<bool> {
        Ok(cone(self)?.is_acyclic()?)
    }
}

// Express a cocycle's class over the representative basis of the target
// cohomology at degree i: subtract the coboundary-plus-relation part first.
fn express_modulo(
    reps_span: &RowSpan,
    cocycle: &[u64],
    cx: &ChainComplex,
    i: i32,
) -> Result<Vec<u64>> {
    let term = cx.term(i).expect("degree carries a term");
    let b = match cx.differential(i - 1) {
        None => term.relations().clone(),
        Some(d) => d.matrix().vstack(term.relations())?,
    };
    // Solve cocycle = x * reps + y * b against the stacked rows; the x
    // part is the class in representative coordinates.
    let joint = reps_span.basis().vstack(&b)?;
    let x = joint.solve_left(cocycle).ok_or_else(|| {
        Error::Precondition(String::from("cocycle class lies outside the computed cohomology"))
    })?;
    Ok(x[..reps_span.basis().rows()].to_vec())
}

/// The mapping cone of a chain map f: A -> B: degree i term B^i + A^{i+1},
/// differential (b, a) -> (d_B b + f a, -d_A a).
pub fn cone(f: &ChainMap) -> Result<ChainComplex> {
    let a = f.source();
    let b = f.target();
    let n = a.n();
    let lo = b.lowest().min(a.lowest() - 1);
    let hi = b.highest().max(a.highest() - 1);
    let zero = FpModule::zero(n);
    let mut terms = Vec::new();
    let mut pieces: Vec<(FpModule, FpModule)> = Vec::new();
    for i in lo..=hi {
        let bi = b.term(i).cloned().unwrap_or_else(|| zero.clone());
        let ai1 = a.term(i + 1).cloned().unwrap_or_else(|| zero.clone());
        let (sum, _, _) = direct_sum(&[bi.clone(), ai1.clone()])?;
        pieces.push((bi, ai1));
        terms.push(sum);
    }
    let mut diffs = Vec::new();
    for i in lo..hi {
        let k = (i - lo) as usize;
        let (bi, ai1) = &pieces[k];
        let (bi1, _) = &pieces[k + 1];
        let rows = terms[k].gens();
        let cols = terms[k + 1].gens();
        let mut mat = ZnMatrix::zero(n, rows, cols);
        // Block (B^i -> B^{i+1}): d_B.
        if let Some(db) = b.differential(i) {
            copy_block(&mut mat, db.matrix(), 0, 0);
        }
        // Block (A^{i+1} -> B^{i+1}): f at degree i+1.
        if !ai1.is_trivial() && !bi1.is_trivial() {
            if let Some(fi1) = f.component(i + 1) {
                copy_block(&mut mat, fi1.matrix(), bi.gens(), 0);
            }
        }
        // Block (A^{i+1} -> A^{i+2}): -d_A.
        if let Some(da) = a.differential(i + 1) {
            copy_block(&mut mat, &da.matrix().neg(), bi.gens(), bi1.gens());
        }
        diffs.push(ModuleMap::new(terms[k].clone(), terms[k + 1].clone(), mat)?);
    }
    ChainComplex::new(lo, terms, diffs)
}

fn copy_block(dst: &mut ZnMatrix, src: &ZnMatrix, row_off: usize, col_off: usize) {
    for i in 0..src.rows() {
        for j in 0..src.cols() {
            let v = src.get(i, j);
            if v != 0 {
                dst.set(row_off + i, col_off + j, v);
            }
        }
    }
}

/// One row of a double complex: a complex together with a vertical chain
/// map to the next row down.
#[derive(Clone, Debug)]
pub struct GridRow {
    /// The row complex.
    pub row: ChainComplex,
    /// The vertical map to the next row, absent for the last row.
    pub down: Option<ChainMap>,
}

/// Totalize a double complex given as rows with vertical chain maps.
///
/// Row p in degree q contributes to total degree p + q. The differential
/// sends x in position (p, q) to d_row(x) plus (-1)^q v_p(x); this squares
/// to zero because the verticals are chain maps and consecutive verticals
/// compose to zero (validated).
pub fn total_complex(rows: &[GridRow]) -> Result<ChainComplex> {
    if rows.is_empty() {
        return Err(Error::InvalidInput(String::from("totalization needs at least one row")));
    }
    let n = rows[0].row.n();
    // Validate vertical endpoints and the two-step vanishing.
    for (p, r) in rows.iter().enumerate() {
        if let Some(v) = &r.down {
            if p + 1 >= rows.len() {
                return Err(Error::Precondition(String::from(
                    "last grid row cannot have a downward map",
                )));
            }
            if v.source().lowest() != r.row.lowest() {
                return Err(Error::Precondition(String::from(
                    "vertical map source window mismatch",
                )));
            }
            if let Some(v2) = &rows[p + 1].down {
                for q in r.row.lowest()..=r.row.highest() {
                    if let (Some(a), Some(b)) = (v.component(q), v2.component(q)) {
                        if !a.compose(b)?.is_zero_map() {
                            return Err(Error::Precondition(String::from(
                                "consecutive vertical maps do not compose to zero",
                            )));
                        }
                    }
                }
            }
        } else if p + 1 < rows.len() {
            return Err(Error::Precondition(String::from(
                "every grid row except the last needs a downward map",
            )));
        }
    }
    let zero = FpModule::zero(n);
    let lo = rows
        .iter()
        .enumerate()
        .map(|(p, r)| r.row.lowest() + p as i32)
        .min()
        .expect("non-empty");
    let hi = rows
        .iter()
        .enumerate()
        .map(|(p, r)| r.row.highest() + p as i32)
        .max()
        .expect("non-empty");
    // For total degree k, the summands are (p, q = k - p) in row order.
    let piece = |p: usize, k: i32| -> FpModule {
        rows[p]
            .row
            .term(k - p as i32)
            .cloned()
            .unwrap_or_else(|| zero.clone())
    };
    let mut terms = Vec::new();
    for k in lo..=hi {
        let summands: Vec<FpModule> = (0..rows.len()).map(|p| piece(p, k)).collect();
        let (sum, _, _) = direct_sum(&summands)?;
        terms.push(sum);
    }
    let mut diffs = Vec::new();
    for k in lo..hi {
        let cur = &terms[(k - lo) as usize];
        let nxt = &terms[(k - lo + 1) as usize];
        let mut mat = ZnMatrix::zero(n, cur.gens(), nxt.gens());
        let mut row_off = 0usize;
        for p in 0..rows.len() {
            let q = k - p as i32;
            let here = piece(p, k);
            // Horizontal: (p, q) -> (p, q + 1) at column offset of p in
            // degree k + 1.
            if let Some(d) = rows[p].row.differential(q) {
                let col_off: usize = (0..p).map(|pp| piece(pp, k + 1).gens()).sum();
                copy_block(&mut mat, d.matrix(), row_off, col_off);
            }
            // Vertical with sign: (p, q) -> (p + 1, q), landing at row
            // p + 1 in total degree k + 1.
            if let Some(v) = &rows[p].down {
                if let Some(vq) = v.component(q) {
                    let col_off: usize = (0..=p).map(|pp| piece(pp, k + 1).gens()).sum();
                    let signed = if q.rem_euclid(2) == 1 { vq.matrix().neg() } else { vq.matrix().clone() };
                    copy_block(&mut mat, &signed, row_off, col_off);
                }
            }
            row_off += here.gens();
        }
        diffs.push(ModuleMap::new(cur.clone(), nxt.clone(), mat)?);
    }
    ChainComplex::new(lo, terms, diffs)
}
