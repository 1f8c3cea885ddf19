//! Finitely presented modules over Λ = Z/n and maps between them.
//!
//! A module is a cokernel presentation Λ^g / rowspan(R). Elements are
//! coefficient rows of length g; congruence modulo the relation span is
//! decided through the cached Howell basis, which also yields a unique
//! canonical representative per class. Maps are matrices acting on the
//! right of row vectors, validated to send relations into relations.
//!
//! The single workhorse is `subquotient`: given spans B ⊆ Z inside an
//! ambient free module, it presents Z/B on the Howell basis of Z. Kernels,
//! images, cohomology of complexes, and fixed-point modules all reduce to
//! it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::arith::inverse_mod;
use crate::error::{Error, Result};
use crate::mat::{cokernel_invariant_factors, RowSpan, ZnMatrix};

/// A finitely presented Λ-module Λ^gens / rowspan(relations).
#[derive(Clone, Debug)]
pub struct FpModule {
    n: u64,
    gens: usize,
    relations: RowSpan,
    factors: Vec<u64>,
}

impl PartialEq for FpModule {
    fn eq(&self, other: &FpModule) -> bool {
        self.n == other.n
            && self.gens == other.gens
            && self.relations.basis() == other.relations.basis()
    }
}

impl Eq for FpModule {}

impl FpModule {
    /// The free module Λ^rank.
    pub fn free(n: u64, rank: usize) -> FpModule {
        let relations = RowSpan::from_matrix(&ZnMatrix::zero(n, 0, rank));
        let factors = vec![n; rank];
        FpModule { n, gens: rank, relations, factors }
    }

    /// The zero module.
    pub fn zero(n: u64) -> FpModule {
        FpModule::free(n, 0)
    }

    /// Present Λ^gens modulo the row span of the given relations.
    ///
    /// - requires relations.cols() == gens and matching modulus.
    pub fn from_presentation(n: u64, gens: usize, relations: &ZnMatrix) -> Result<FpModule> {
        if relations.n() != n {
            return Err(Error::ModulusMismatch { left: n, right: relations.n() });
        }
        if relations.cols() != gens {
            return Err(Error::DimensionMismatch(String::from(
                "relation width does not match generator count",
            )));
        }
        let relations = RowSpan::from_matrix(relations);
        let factors = cokernel_invariant_factors(relations.basis(), gens);
        Ok(FpModule { n, gens, relations, factors })
    }

    /// The cyclic module Λ/(d).
    pub fn cyclic(n: u64, d: u64) -> FpModule {
        let rel = ZnMatrix::new(n, 1, 1, vec![d % n]).expect("1x1 relation");
        FpModule::from_presentation(n, 1, &rel).expect("shapes agree")
    }

    /// Modulus n.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of generators of the presentation.
    pub fn gens(&self) -> usize {
        self.gens
    }

    /// Canonical basis of the relation span.
    pub fn relations(&self) -> &ZnMatrix {
        self.relations.basis()
    }

    /// Invariant factors of the module as an ascending divisibility chain,
    /// trivial factors dropped. The empty chain is the zero module.
    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    /// Number of elements.
    ///
    /// - panics if the count overflows u128.
    pub fn order(&self) -> u128 {
        let mut o: u128 = 1;
        for &f in &self.factors {
            o = o.checked_mul(f as u128).expect("module order overflows u128");
        }
        o
    }

    /// True when the module has one element.
    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Canonical representative of the class of v. Classes are equal exactly
    /// when representatives are equal entrywise.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        debug_assert_eq!(v.len(), self.gens);
        self.relations.canonical_rep(v)
    }

    /// True when v represents zero.
    pub fn is_zero_elem(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// True when a and b represent the same class.
    pub fn elem_eq(&self, a: &[u64], b: &[u64]) -> bool {
        self.reduce(a) == self.reduce(b)
    }

    /// Sum of two element rows.
    pub fn add_elems(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a.len(), self.gens);
        debug_assert_eq!(b.len(), self.gens);
        a.iter().zip(b.iter()).map(|(&x, &y)| (x % self.n + y % self.n) % self.n).collect()
    }

    /// Scalar multiple of an element row.
    pub fn scale_elem(&self, c: u64, a: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a.len(), self.gens);
        let c = (c % self.n) as u128;
        a.iter().map(|&x| ((c * x as u128) % self.n as u128) as u64).collect()
    }

    /// Negation of an element row.
    pub fn neg_elem(&self, a: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a.len(), self.gens);
        a.iter().map(|&x| (self.n - x % self.n) % self.n).collect()
    }

    /// Enumerate all elements as canonical representatives, in a fixed
    /// order. Intended for small modules in tests and pairing tables.
    ///
    /// - returns an error when the order exceeds the given bound.
    pub fn enumerate(&self, bound: usize) -> Result<Vec<Vec<u64>>> {
        let order = self.order();
        if order > bound as u128 {
            return Err(Error::BoundExceeded { what: String::from("module enumeration"), bound });
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        // Walk the generator lattice in lexicographic order, keeping the
        // first appearance of each canonical representative.
        let mut counter = vec![0u64; self.gens];
        loop {
            let rep = self.reduce(&counter);
            if seen.insert(rep.clone()) {
                out.push(rep);
                if out.len() as u128 == order {
                    break;
                }
            }
            // Increment the mixed-radix counter.
            let mut k = 0;
            loop {
                if k == self.gens {
                    // Exhausted the lattice; everything was seen.
                    debug_assert_eq!(out.len() as u128, order);
                    return Ok(out);
                }
                counter[k] += 1;
                if counter[k] < self.n {
                    break;
                }
                counter[k] = 0;
                k += 1;
            }
        }
        Ok(out)
    }
}

/// A Λ-linear map between presented modules, stored as a matrix acting on
/// the right of element rows: v maps to v * matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMap {
    source: FpModule,
    target: FpModule,
    matrix: ZnMatrix,
}

impl ModuleMap {
    /// Build and validate a map: every source relation must land in the
    /// target relation span, otherwise the matrix does not define a map on
    /// classes.
    pub fn new(source: FpModule, target: FpModule, matrix: ZnMatrix) -> Result<ModuleMap> {
        if source.n != target.n || matrix.n() != source.n {
            return Err(Error::ModulusMismatch { left: source.n, right: matrix.n() });
        }
        if matrix.rows() != source.gens || matrix.cols() != target.gens {
            return Err(Error::DimensionMismatch(format!(
                "map matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                source.gens,
                target.gens
            )));
        }
        let rels = source.relations.basis();
        for i in 0..rels.rows() {
            let image = matrix.act_on_row(rels.row(i))?;
            if !target.relations.contains(&image) {
                return Err(Error::Precondition(format!(
                    "matrix does not define a module map: relation {i} maps outside the target relations"
                )));
            }
        }
        Ok(ModuleMap { source, target, matrix })
    }

    /// The identity map on m.
    pub fn identity(m: &FpModule) -> ModuleMap {
        ModuleMap {
            source: m.clone(),
            target: m.clone(),
            matrix: ZnMatrix::identity(m.n, m.gens),
        }
    }

    /// The zero map.
    pub fn zero_map(source: &FpModule, target: &FpModule) -> ModuleMap {
        ModuleMap {
            source: source.clone(),
            target: target.clone(),
            matrix: ZnMatrix::zero(source.n, source.gens, target.gens),
        }
    }

    /// Source module.
    pub fn source(&self) -> &FpModule {
        &self.source
    }

    /// Target module.
    pub fn target(&self) -> &FpModule {
        &self.target
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &ZnMatrix {
        &self.matrix
    }

    /// Apply to an element row of the source.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        self.matrix.act_on_row(v).expect("element length matches map source")
    }

    /// Composite: self then other.
    ///
    /// - requires other.source to be the same presentation as self.target.
    pub fn compose(&self, other: &ModuleMap) -> Result<ModuleMap> {
        if self.target != other.source {
            return Err(Error::Precondition(String::from(
                "composition endpoints do not match",
            )));
        }
        Ok(ModuleMap {
            source: self.source.clone(),
            target: other.target.clone(),
            matrix: self.matrix.mul(&other.matrix)?,
        })
    }

    /// Pointwise sum of parallel maps.
    pub fn add(&self, other: &ModuleMap) -> Result<ModuleMap> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::Precondition(String::from("maps are not parallel")));
        }
        Ok(ModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.add(&other.matrix)?,
        })
    }

    /// Pointwise negation.
    pub fn neg(&self) -> ModuleMap {
        ModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.neg(),
        }
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &ModuleMap) -> Result<ModuleMap> {
        self.add(&other.neg())
    }

    /// True when the map sends every generator to zero in the target.
    pub fn is_zero_map(&self) -> bool {
        (0..self.source.gens).all(|i| self.target.is_zero_elem(self.matrix.row(i)))
    }

    /// True when parallel maps agree on classes.
    pub fn eq_map(&self, other: &ModuleMap) -> bool {
        self.source == other.source
            && self.target == other.target
            && (0..self.source.gens)
                .all(|i| self.target.elem_eq(self.matrix.row(i), other.matrix.row(i)))
    }

    /// Kernel as a module with its inclusion into the source.
    ///
    /// Elements x with x * F inside the target relations form the kernel;
    /// they are the left-block parts of the left kernel of [F over R_t].
    pub fn kernel(&self) -> Result<(FpModule, ModuleMap)> {
        let stacked = self.matrix.vstack(self.target.relations.basis())?;
        let ker = stacked.left_kernel();
        let xs = ker.column_block(0, self.source.gens);
        let (module, reps) = subquotient(
            self.source.n,
            self.source.gens,
            &xs,
            self.source.relations.basis(),
        )?;
        let incl = ModuleMap::new(module.clone(), self.source.clone(), reps)?;
        Ok((module, incl))
    }

    /// Image presented as source modulo kernel, with its injection into the
    /// target.
    pub fn image(&self) -> Result<(FpModule, ModuleMap)> {
        let stacked = self.matrix.vstack(self.target.relations.basis())?;
        let ker = stacked.left_kernel();
        let xs = ker.column_block(0, self.source.gens);
        let image = FpModule::from_presentation(self.source.n, self.source.gens, &xs)?;
        let incl = ModuleMap::new(image.clone(), self.target.clone(), self.matrix.clone())?;
        Ok((image, incl))
    }

    /// Cokernel with the projection from the target.
    pub fn cokernel(&self) -> Result<(FpModule, ModuleMap)> {
        let rels = self.target.relations.basis().vstack(&self.matrix)?;
        let coker = FpModule::from_presentation(self.target.n, self.target.gens, &rels)?;
        let proj = ModuleMap::new(
            self.target.clone(),
            coker.clone(),
            ZnMatrix::identity(self.target.n, self.target.gens),
        )?;
        Ok((coker, proj))
    }

    /// True when the map is an isomorphism on classes.
    pub fn is_iso(&self) -> Result<bool> {
        Ok(self.kernel()?.0.is_trivial() && self.cokernel()?.0.is_trivial())
    }

    /// The inverse of an isomorphism.
    ///
    /// - requires the map to be bijective on classes.
    pub fn inverse(&self) -> Result<ModuleMap> {
        // Solve e_j = x * F + y * R_t for every target generator; the x
        // parts assemble the inverse matrix.
        let stacked = self.matrix.vstack(self.target.relations.basis())?;
        let mut rows = Vec::with_capacity(self.target.gens);
        for j in 0..self.target.gens {
            let mut e = vec![0u64; self.target.gens];
            e[j] = 1;
            let x = stacked.solve_left(&e).ok_or_else(|| {
                Error::Precondition(String::from("inverse of a non-surjective map"))
            })?;
            rows.push(x[..self.source.gens].to_vec());
        }
        let mat = ZnMatrix::from_rows(self.source.n, self.source.gens, &rows)?;
        let inv = ModuleMap::new(self.target.clone(), self.source.clone(), mat)?;
        let back = self.compose(&inv)?;
        if !back.eq_map(&ModuleMap::identity(&self.source)) {
            return Err(Error::Precondition(String::from("inverse of a non-injective map")));
        }
        debug_assert!(inv.compose(self).map(|m| m.eq_map(&ModuleMap::identity(&self.target))).unwrap_or(false));
        Ok(inv)
    }
}

/// Present the subquotient span(z) / span(b) of an ambient free module.
///
/// - requires every row of b to lie in the span of z.
/// - returns the module together with representative rows: generator i of
///   the module is the ambient vector reps.row(i), the i-th Howell basis
///   row of span(z).
pub fn subquotient(
    n: u64,
    ambient: usize,
    z: &ZnMatrix,
    b: &ZnMatrix,
) -> Result<(FpModule, ZnMatrix)> {
    if z.cols() != ambient || b.cols() != ambient {
        return Err(Error::DimensionMismatch(String::from(
            "subquotient spans must live in the ambient module",
        )));
    }
    let zspan = RowSpan::from_matrix(z);
    let basis = zspan.basis().clone();
    let k = basis.rows();
    // Relations on the basis coordinates: syzygies of the basis rows, plus
    // the expressions of the b rows.
    let syz = basis.left_kernel();
    let mut rel_rows = syz.row_vecs();
    for i in 0..b.rows() {
        let coeffs = zspan.express(b.row(i)).ok_or_else(|| {
            Error::Precondition(format!(
                "subquotient: relation row {i} lies outside the numerator span"
            ))
        })?;
        rel_rows.push(coeffs);
    }
    let rels = ZnMatrix::from_rows(n, k, &rel_rows)?;
    let module = FpModule::from_presentation(n, k, &rels)?;
    Ok((module, basis))
}

/// Direct sum with injections and projections, in input order.
pub fn direct_sum(summands: &[FpModule]) -> Result<(FpModule, Vec<ModuleMap>, Vec<ModuleMap>)> {
    let n = match summands.first() {
        Some(m) => m.n,
        None => {
            return Err(Error::InvalidInput(String::from(
                "direct sum needs at least one summand",
            )))
        }
    };
    let total: usize = summands.iter().map(|m| m.gens).sum();
    let mut rel_rows: Vec<Vec<u64>> = Vec::new();
    let mut offset = 0usize;
    for m in summands {
        if m.n != n {
            return Err(Error::ModulusMismatch { left: n, right: m.n });
        }
        let rels = m.relations.basis();
        for i in 0..rels.rows() {
            let mut row = vec![0u64; total];
            row[offset..offset + m.gens].copy_from_slice(rels.row(i));
            rel_rows.push(row);
        }
        offset += m.gens;
    }
    let rels = ZnMatrix::from_rows(n, total, &rel_rows)?;
    let sum = FpModule::from_presentation(n, total, &rels)?;
    let mut injections = Vec::with_capacity(summands.len());
    let mut projections = Vec::with_capacity(summands.len());
    let mut offset = 0usize;
    for m in summands {
        let mut inj = ZnMatrix::zero(n, m.gens, total);
        let mut proj = ZnMatrix::zero(n, total, m.gens);
        for i in 0..m.gens {
            inj.set(i, offset + i, 1);
            proj.set(offset + i, i, 1);
        }
        injections.push(ModuleMap::new(m.clone(), sum.clone(), inj)?);
        projections.push(ModuleMap::new(sum.clone(), m.clone(), proj)?);
        offset += m.gens;
    }
    Ok((sum, injections, projections))
}

/// Tensor product a ⊗ b, presented on the generators e_i ⊗ f_j indexed by
/// i * b.gens() + j, with the Kronecker relations r ⊗ f_j and e_i ⊗ s for
/// relations r of a and s of b.
pub fn tensor(a: &FpModule, b: &FpModule) -> Result<FpModule> {
    if a.n != b.n {
        return Err(Error::ModulusMismatch { left: a.n, right: b.n });
    }
    let n = a.n;
    let (ag, bg) = (a.gens, b.gens);
    let total = ag * bg;
    let mut rel_rows: Vec<Vec<u64>> = Vec::new();
    let ra = a.relations.basis();
    for i in 0..ra.rows() {
        let r = ra.row(i);
        for j in 0..bg {
            let mut row = vec![0u64; total];
            for (k, &rk) in r.iter().enumerate() {
                row[k * bg + j] = rk;
            }
            rel_rows.push(row);
        }
    }
    let rb = b.relations.basis();
    for i in 0..rb.rows() {
        let s = rb.row(i);
        for k in 0..ag {
            let mut row = vec![0u64; total];
            for (j, &sj) in s.iter().enumerate() {
                row[k * bg + j] = sj;
            }
            rel_rows.push(row);
        }
    }
    let rels = ZnMatrix::from_rows(n, total, &rel_rows)?;
    FpModule::from_presentation(n, total, &rels)
}

/// The pure tensor va ⊗ vb as an element row of `tensor`'s presentation.
pub fn pure_tensor(n: u64, va: &[u64], vb: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; va.len() * vb.len()];
    for (i, &x) in va.iter().enumerate() {
        for (j, &y) in vb.iter().enumerate() {
            out[i * vb.len() + j] = ((x as u128 * y as u128) % n as u128) as u64;
        }
    }
    out
}

/// The module Hom_Λ(a, b) together with the data to evaluate its elements
/// as maps.
#[derive(Clone, Debug)]
pub struct HomSpace {
    /// The Hom module itself.
    pub module: FpModule,
    /// Representative rows: generator i of the module is the flattened
    /// matrix reps.row(i), row-major a.gens() x b.gens().
    pub reps: ZnMatrix,
    source: FpModule,
    target: FpModule,
}

impl HomSpace {
    /// Realize a Hom element (a row in the Hom module's generators) as the
    /// module map it represents.
    pub fn as_map(&self, elem: &[u64]) -> Result<ModuleMap> {
        let flat = self.reps.act_on_row(elem)?;
        let matrix = ZnMatrix::new(
            self.source.n,
            self.source.gens,
            self.target.gens,
            flat,
        )?;
        ModuleMap::new(self.source.clone(), self.target.clone(), matrix)
    }

    /// Source of the represented maps.
    pub fn hom_source(&self) -> &FpModule {
        &self.source
    }

    /// Target of the represented maps.
    pub fn hom_target(&self) -> &FpModule {
        &self.target
    }

    /// Find a Hom element representing the given map, if the map's matrix
    /// flattens into the computed space (it does for every valid map).
    pub fn express_map(&self, map: &ModuleMap) -> Result<Vec<u64>> {
        if map.source() != &self.source || map.target() != &self.target {
            return Err(Error::Precondition(String::from(
                "map endpoints do not match the Hom space",
            )));
        }
        let mut flat = Vec::with_capacity(self.source.gens * self.target.gens);
        for i in 0..self.source.gens {
            flat.extend_from_slice(map.matrix().row(i));
        }
        // The flattened matrix lies in the span of valid matrices; express
        // it over the representative basis.
        let zspan = RowSpan::from_matrix(&self.reps);
        zspan.express(&flat).ok_or_else(|| {
            Error::Precondition(String::from(
                "valid map failed to express over the Hom basis",
            ))
        })
    }
}

/// Compute Hom_Λ(a, b) as a subquotient of flattened matrices: numerator
/// the matrices sending relations into relations, denominator the matrices
/// with every row inside b's relations (those are the zero maps).
pub fn hom_module(a: &FpModule, b: &FpModule) -> Result<HomSpace> {
    if a.n != b.n {
        return Err(Error::ModulusMismatch { left: a.n, right: b.n });
    }
    let n = a.n;
    let (ag, bg) = (a.gens, b.gens);
    let flat = ag * bg;
    let ra = a.relations.basis();
    let rb = b.relations.basis();
    let (ka, kb) = (ra.rows(), rb.rows());
    // Unknowns: the flattened matrix T (ag * bg) plus one slack row y per
    // (a-relation, b-relation basis row) pair expressing r * T = y_r * R_b.
    // Equations: for each a-relation r and each target column j,
    //   sum_i r[i] T[i][j] - sum_m y_{r,m} R_b[m][j] = 0.
    let unknowns = flat + ka * kb;
    let equations = ka * bg;
    let mut sys = ZnMatrix::zero(n, unknowns, equations);
    for ridx in 0..ka {
        let r = ra.row(ridx);
        for j in 0..bg {
            let eq = ridx * bg + j;
            for (i, &ri) in r.iter().enumerate() {
                sys.set(i * bg + j, eq, ri);
            }
            for m in 0..kb {
                let v = rb.get(m, j);
                sys.set(flat + ridx * kb + m, eq, (n - v) % n);
            }
        }
    }
    let ker = sys.left_kernel();
    let z = ker.column_block(0, flat);
    // Zero maps: row i of T equals a b-relation basis row, all else zero.
    let mut zero_rows: Vec<Vec<u64>> = Vec::new();
    for i in 0..ag {
        for m in 0..kb {
            let mut row = vec![0u64; flat];
            row[i * bg..(i + 1) * bg].copy_from_slice(rb.row(m));
            zero_rows.push(row);
        }
    }
    let bmat = ZnMatrix::from_rows(n, flat, &zero_rows)?;
    let (module, reps) = subquotient(n, flat, &z, &bmat)?;
    Ok(HomSpace { module, reps, source: a.clone(), target: b.clone() })
}

/// The dual module Hom_Λ(m, Λ).
pub fn dual(m: &FpModule) -> Result<HomSpace> {
    hom_module(m, &FpModule::free(m.n, 1))
}

/// Invariants of m under a family of endomorphisms: the joint kernel of
/// e - id, with its inclusion into m. An empty family returns m itself.
pub fn invariants(m: &FpModule, endos: &[ModuleMap]) -> Result<(FpModule, ModuleMap)> {
    if endos.is_empty() {
        return Ok((m.clone(), ModuleMap::identity(m)));
    }
    for e in endos {
        if e.source() != m || e.target() != m {
            return Err(Error::Precondition(String::from(
                "invariants require endomorphisms of the module",
            )));
        }
    }
    // Stack the differences horizontally: v maps to (v(e_1 - 1), ...).
    let id = ZnMatrix::identity(m.n, m.gens);
    let mut stacked = endos[0].matrix().sub(&id)?;
    for e in &endos[1..] {
        stacked = stacked.hstack(&e.matrix().sub(&id)?)?;
    }
    let copies: Vec<FpModule> = (0..endos.len()).map(|_| m.clone()).collect();
    let (sum, _, _) = direct_sum(&copies)?;
    let map = ModuleMap::new(m.clone(), sum, stacked)?;
    map.kernel()
}

/// Coinvariants of m under a family of endomorphisms: the cokernel of
/// (v_1, ..., v_k) -> sum v_i (e_i - 1), with the projection from m.
pub fn coinvariants(m: &FpModule, endos: &[ModuleMap]) -> Result<(FpModule, ModuleMap)> {
    if endos.is_empty() {
        return Ok((m.clone(), ModuleMap::identity(m)));
    }
    for e in endos {
        if e.source() != m || e.target() != m {
            return Err(Error::Precondition(String::from(
                "coinvariants require endomorphisms of the module",
            )));
        }
    }
    let id = ZnMatrix::identity(m.n, m.gens);
    let mut stacked = endos[0].matrix().sub(&id)?;
    for e in &endos[1..] {
        stacked = stacked.vstack(&e.matrix().sub(&id)?)?;
    }
    let copies: Vec<FpModule> = (0..endos.len()).map(|_| m.clone()).collect();
    let (sum, _, _) = direct_sum(&copies)?;
    let map = ModuleMap::new(sum, m.clone(), stacked)?;
    map.cokernel()
}

/// The averaging package for a finite group P of automorphisms of m whose
/// order is invertible in Λ: the projector, the invariant and coinvariant
/// modules, and the mutually inverse isomorphisms between them.
#[derive(Clone, Debug)]
pub struct Averaging {
    /// Order of the generated matrix group.
    pub group_order: usize,
    /// The idempotent projector m -> m averaging over the group.
    pub projector: ModuleMap,
    /// Invariant submodule with its inclusion into m.
    pub invariants: (FpModule, ModuleMap),
    /// Coinvariant quotient with its projection from m.
    pub coinvariants: (FpModule, ModuleMap),
    /// Isomorphism coinvariants -> invariants induced by the projector.
    pub section: ModuleMap,
    /// Inverse isomorphism invariants -> coinvariants (include, project).
    pub retraction: ModuleMap,
}

/// Close a set of automorphism matrices under multiplication, average, and
/// package the resulting natural isomorphism between coinvariants and
/// invariants.
///
/// - requires the generated group to be finite with order at most `bound`
///   and invertible in Λ (gcd(order, n) = 1).
pub fn averaging(m: &FpModule, endo_gens: &[ModuleMap], bound: usize) -> Result<Averaging> {
    for e in endo_gens {
        if e.source() != m || e.target() != m {
            return Err(Error::Precondition(String::from(
                "averaging requires endomorphisms of the module",
            )));
        }
    }
    let n = m.n;
    // BFS closure of the generated matrix monoid; for automorphisms of
    // finite order this is the generated group.
    let id = ZnMatrix::identity(n, m.gens);
    let mut seen: BTreeSet<ZnMatrix> = BTreeSet::new();
    seen.insert(id.clone());
    let mut frontier: Vec<ZnMatrix> = vec![id];
    while let Some(cur) = frontier.pop() {
        for g in endo_gens {
            let next = cur.mul(g.matrix())?;
            if seen.len() > bound {
                return Err(Error::BoundExceeded {
                    what: String::from("matrix group closure in averaging"),
                    bound,
                });
            }
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    let order = seen.len();
    let inv = inverse_mod(order as u64 % n, n).ok_or_else(|| {
        Error::Precondition(format!(
            "averaging requires the group order {order} to be invertible mod {n}"
        ))
    })?;
    let mut total = ZnMatrix::zero(n, m.gens, m.gens);
    for g in &seen {
        total = total.add(g)?;
    }
    let proj_matrix = total.scalar_mul(inv);
    let projector = ModuleMap::new(m.clone(), m.clone(), proj_matrix)?;
    let endos: Vec<ModuleMap> = endo_gens.to_vec();
    let (inv_mod, incl) = invariants(m, &endos)?;
    let (coinv_mod, proj) = coinvariants(m, &endos)?;
    // Section: [v] in coinvariants maps to v * pi, which is invariant;
    // express it in the invariant basis. Well defined because pi kills
    // every v(e - 1).
    let incl_span = RowSpan::from_matrix(incl.matrix());
    let mut section_rows: Vec<Vec<u64>> = Vec::new();
    for i in 0..coinv_mod.gens() {
        // Coinvariant generators are the generators of m (projection is the
        // identity matrix), so row i of the projector is the image of
        // generator i.
        let image = projector.matrix().row(i);
        let coeffs = incl_span.express(image).ok_or_else(|| {
            Error::Precondition(String::from(
                "projector image failed to land in the invariant span",
            ))
        })?;
        section_rows.push(coeffs);
    }
    let section_matrix = ZnMatrix::from_rows(n, inv_mod.gens(), &section_rows)?;
    let section = ModuleMap::new(coinv_mod.clone(), inv_mod.clone(), section_matrix)?;
    // Retraction: include invariants into m, then project to coinvariants.
    let retraction = incl.compose(&proj)?;
    debug_assert!(
        section.compose(&retraction)?.eq_map(&ModuleMap::identity(&coinv_mod)),
        "averaging section then retraction must be the identity"
    );
    debug_assert!(
        retraction.compose(&section)?.eq_map(&ModuleMap::identity(&inv_mod)),
        "averaging retraction then section must be the identity"
    );
    Ok(Averaging {
        group_order: order,
        projector,
        invariants: (inv_mod, incl),
        coinvariants: (coinv_mod, proj),
        section,
        retraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: u64, rows: usize, cols: usize) -> ZnMatrix {
        let data: Vec<u64> = (0..rows * cols).map(|_| rng.gen_range(0..n)).collect();
        ZnMatrix::new(n, rows, cols, data).unwrap()
    }

    #[test]
    fn cyclic_module_has_expected_factors_and_order() {
        let m = FpModule::cyclic(12, 4);
        assert_eq!(m.invariant_factors(), &[4]);
        assert_eq!(m.order(), 4);
        let f = FpModule::free(6, 3);
        assert_eq!(f.invariant_factors(), &[6, 6, 6]);
        assert_eq!(f.order(), 216);
        assert!(FpModule::zero(4).is_trivial());
    }

    #[test]
    fn subquotient_of_golden_spans_over_z4() {
        // span{(2,0),(0,1)} / span{(0,2)} inside Λ^2, Λ = Z/4, is
        // Z/2 x Z/2.
        let z = ZnMatrix::from_rows(4, 2, &[vec![2, 0], vec![0, 1]]).unwrap();
        let b = ZnMatrix::from_rows(4, 2, &[vec![0, 2]]).unwrap();
        let (m, reps) = subquotient(4, 2, &z, &b).unwrap();
        assert_eq!(m.invariant_factors(), &[2, 2]);
        assert_eq!(reps.rows(), m.gens());
    }

    #[test]
    fn subquotient_rejects_rows_outside_numerator() {
        let z = ZnMatrix::from_rows(4, 2, &[vec![2, 0]]).unwrap();
        let b = ZnMatrix::from_rows(4, 2, &[vec![1, 0]]).unwrap();
        assert!(subquotient(4, 2, &z, &b).is_err());
    }

    #[test]
    fn multiplication_by_two_on_z4_has_kernel_image_cokernel_z2() {
        let m = FpModule::free(4, 1);
        let f = ModuleMap::new(
            m.clone(),
            m.clone(),
            ZnMatrix::new(4, 1, 1, vec![2]).unwrap(),
        )
        .unwrap();
        let (ker, incl) = f.kernel().unwrap();
        assert_eq!(ker.invariant_factors(), &[2]);
        // The inclusion composed with f must vanish.
        assert!(incl.compose(&f).unwrap().is_zero_map());
        let (im, into) = f.image().unwrap();
        assert_eq!(im.invariant_factors(), &[2]);
        assert_eq!(into.target(), &m);
        let (coker, proj) = f.cokernel().unwrap();
        assert_eq!(coker.invariant_factors(), &[2]);
        assert!(f.compose(&proj).unwrap().is_zero_map());
    }

    #[test]
    fn map_validation_rejects_relation_violations() {
        // Z/2 -> Z/4 sending the generator to 1 is not well defined over
        // Λ = Z/4: the relation 2*x = 0 maps to 2 != 0.
        let a = FpModule::cyclic(4, 2);
        let b = FpModule::free(4, 1);
        let bad = ModuleMap::new(a, b, ZnMatrix::new(4, 1, 1, vec![1]).unwrap());
        assert!(bad.is_err());
    }

    // Force well-definedness of a random matrix by enlarging the target
    // relations with the images of the source relations.
    fn random_map(rng: &mut ChaCha8Rng, n: u64) -> ModuleMap {
        let sg = 1 + rng.gen_range(0..3);
        let tg = 1 + rng.gen_range(0..3);
        let sk = rng.gen_range(0..3);
        let tk = rng.gen_range(0..3);
        let sr = random_matrix(rng, n, sk, sg);
        let tr = random_matrix(rng, n, tk, tg);
        let f = random_matrix(rng, n, sg, tg);
        let source = FpModule::from_presentation(n, sg, &sr).unwrap();
        let pushed = sr.mul(&f).unwrap();
        let target_rels = tr.vstack(&pushed).unwrap();
        let target = FpModule::from_presentation(n, tg, &target_rels).unwrap();
        ModuleMap::new(source, target, f).unwrap()
    }

    #[test]
    fn kernel_times_image_equals_source_order_on_random_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4b_49_4d);
        for case in 0..220 {
            let n = [2u64, 3, 4, 6, 8, 9][case % 6];
            let f = random_map(&mut rng, n);
            let (ker, incl) = f.kernel().unwrap();
            let (im, _) = f.image().unwrap();
            assert_eq!(
                ker.order() * im.order(),
                f.source().order(),
                "case {case}: |ker| * |im| != |source|"
            );
            assert!(
                incl.compose(&f).unwrap().is_zero_map(),
                "case {case}: kernel inclusion must die under the map"
            );
            // Independent image count: span(F rows + target relations)
            // modulo span(target relations).
            let joint = f.matrix().vstack(f.target().relations()).unwrap();
            let joint_size = crate::mat::RowSpan::from_matrix(&joint).size();
            let rel_size = crate::mat::RowSpan::from_matrix(f.target().relations()).size();
            assert_eq!(
                im.order(),
                joint_size / rel_size,
                "case {case}: image order disagrees with span count"
            );
            let (coker, proj) = f.cokernel().unwrap();
            assert!(
                f.compose(&proj).unwrap().is_zero_map(),
                "case {case}: map followed by cokernel projection must vanish"
            );
            assert_eq!(
                coker.order() * im.order(),
                f.target().order(),
                "case {case}: |coker| * |im| != |target|"
            );
        }
    }

    #[test]
    fn tensor_of_cyclic_modules_follows_the_gcd_rule() {
        // Z/4 tensor Z/6 over Z/12 is Z/gcd(4,6) = Z/2.
        let a = FpModule::cyclic(12, 4);
        let b = FpModule::cyclic(12, 6);
        let t = tensor(&a, &b).unwrap();
        assert_eq!(t.invariant_factors(), &[2]);
        // All divisor pairs over a few moduli.
        for n in [4u64, 6, 8, 9, 12] {
            for a_d in (1..=n).filter(|d| n % d == 0) {
                for b_d in (1..=n).filter(|d| n % d == 0) {
                    let a = FpModule::cyclic(n, a_d);
                    let b = FpModule::cyclic(n, b_d);
                    let t = tensor(&a, &b).unwrap();
                    let g = crate::arith::gcd(a_d, b_d);
                    let expect: &[u64] = if g == 1 { &[] } else { core::slice::from_ref(&g) };
                    assert_eq!(
                        t.invariant_factors(),
                        expect,
                        "Z/{a_d} tensor Z/{b_d} over Z/{n}"
                    );
                }
            }
        }
    }

    #[test]
    fn tensor_with_free_module_copies_factors() {
        let m = FpModule::from_presentation(
            8,
            2,
            &ZnMatrix::from_rows(8, 2, &[vec![2, 0], vec![0, 4]]).unwrap(),
        )
        .unwrap();
        let f = FpModule::free(8, 2);
        let t = tensor(&f, &m).unwrap();
        // Two free generators, each contributing a copy of m.
        assert_eq!(t.invariant_factors(), &[2, 2, 4, 4]);
    }

    #[test]
    fn hom_between_cyclic_modules_follows_the_gcd_rule() {
        for n in [4u64, 6, 12] {
            for a_d in (1..=n).filter(|d| n % d == 0) {
                for b_d in (1..=n).filter(|d| n % d == 0) {
                    let a = FpModule::cyclic(n, a_d);
                    let b = FpModule::cyclic(n, b_d);
                    let h = hom_module(&a, &b).unwrap();
                    let g = crate::arith::gcd(a_d, b_d);
                    assert_eq!(
                        h.module.order(),
                        g as u128,
                        "Hom(Z/{a_d}, Z/{b_d}) over Z/{n}"
                    );
                }
            }
        }
    }

    #[test]
    fn hom_elements_evaluate_to_valid_distinct_maps() {
        let n = 8;
        let a = FpModule::from_presentation(
            n,
            2,
            &ZnMatrix::from_rows(n, 2, &[vec![4, 0]]).unwrap(),
        )
        .unwrap();
        let b = FpModule::cyclic(n, 4);
        let h = hom_module(&a, &b).unwrap();
        let elems = h.module.enumerate(512).unwrap();
        for e in &elems {
            // as_map validates well-definedness internally.
            let _ = h.as_map(e).unwrap();
        }
        // Distinct Hom classes give maps differing on some generator.
        for (i, e1) in elems.iter().enumerate() {
            for e2 in elems.iter().skip(i + 1) {
                let m1 = h.as_map(e1).unwrap();
                let m2 = h.as_map(e2).unwrap();
                assert!(
                    !m1.eq_map(&m2),
                    "distinct Hom elements must evaluate to distinct maps"
                );
            }
        }
    }

    #[test]
    fn dual_of_cyclic_module_matches_annihilator() {
        // Hom(Z/d, Z/n) is cyclic of order d for d dividing n.
        for n in [6u64, 8, 12] {
            for d in (1..=n).filter(|d| n % d == 0) {
                let m = FpModule::cyclic(n, d);
                let h = dual(&m).unwrap();
                assert_eq!(h.module.order(), d as u128, "dual of Z/{d} over Z/{n}");
            }
        }
    }

    #[test]
    fn express_map_round_trips_through_the_hom_space() {
        let n = 12;
        let a = FpModule::cyclic(n, 6);
        let b = FpModule::cyclic(n, 4);
        let h = hom_module(&a, &b).unwrap();
        let elems = h.module.enumerate(64).unwrap();
        for e in &elems {
            let map = h.as_map(e).unwrap();
            let back = h.express_map(&map).unwrap();
            assert!(
                h.module.elem_eq(e, &back),
                "expressing an evaluated Hom element must return its class"
            );
        }
    }

    #[test]
    fn invariants_and_coinvariants_of_the_swap_action() {
        // Λ^2 with coordinates swapped: invariants are the diagonal,
        // coinvariants identify the coordinates; both are free of rank 1.
        for n in [4u64, 9] {
            let m = FpModule::free(n, 2);
            let swap =
                ModuleMap::new(m.clone(), m.clone(), ZnMatrix::from_rows(n, 2, &[vec![0, 1], vec![1, 0]]).unwrap())
                    .unwrap();
            let (inv, incl) = invariants(&m, &[swap.clone()]).unwrap();
            assert_eq!(inv.invariant_factors(), &[n]);
            // The inclusion lands on the diagonal: applying swap fixes it.
            for i in 0..inv.gens() {
                let v = incl.matrix().row(i);
                let swapped = swap.apply(v);
                assert_eq!(v, &swapped[..]);
            }
            let (coinv, _) = coinvariants(&m, &[swap]).unwrap();
            assert_eq!(coinv.invariant_factors(), &[n]);
        }
    }

    #[test]
    fn averaging_gives_mutually_inverse_isomorphisms() {
        // Swap action on Λ^2 over Z/9: the group has order 2, invertible
        // mod 9.
        let n = 9;
        let m = FpModule::free(n, 2);
        let swap = ModuleMap::new(
            m.clone(),
            m.clone(),
            ZnMatrix::from_rows(n, 2, &[vec![0, 1], vec![1, 0]]).unwrap(),
        )
        .unwrap();
        let avg = averaging(&m, &[swap], 16).unwrap();
        assert_eq!(avg.group_order, 2);
        assert!(avg
            .section
            .compose(&avg.retraction)
            .unwrap()
            .eq_map(&ModuleMap::identity(&avg.coinvariants.0)));
        assert!(avg
            .retraction
            .compose(&avg.section)
            .unwrap()
            .eq_map(&ModuleMap::identity(&avg.invariants.0)));
        // The projector is idempotent.
        let pp = avg.projector.compose(&avg.projector).unwrap();
        assert!(pp.eq_map(&avg.projector));
    }

    #[test]
    fn averaging_rejects_non_invertible_group_order() {
        let n = 4;
        let m = FpModule::free(n, 2);
        let swap = ModuleMap::new(
            m.clone(),
            m.clone(),
            ZnMatrix::from_rows(n, 2, &[vec![0, 1], vec![1, 0]]).unwrap(),
        )
        .unwrap();
        assert!(averaging(&m, &[swap], 16).is_err());
    }

    #[test]
    fn direct_sum_assembles_injections_and_projections() {
        let a = FpModule::cyclic(6, 2);
        let b = FpModule::cyclic(6, 3);
        let (sum, inj, proj) = direct_sum(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(sum.order(), 6);
        // inj_i then proj_i is the identity; inj_i then proj_j is zero.
        assert!(inj[0].compose(&proj[0]).unwrap().eq_map(&ModuleMap::identity(&a)));
        assert!(inj[1].compose(&proj[1]).unwrap().eq_map(&ModuleMap::identity(&b)));
        assert!(inj[0].compose(&proj[1]).unwrap().is_zero_map());
        assert!(inj[1].compose(&proj[0]).unwrap().is_zero_map());
    }

    #[test]
    fn enumerate_lists_each_class_once() {
        let m = FpModule::from_presentation(
            4,
            2,
            &ZnMatrix::from_rows(4, 2, &[vec![2, 0]]).unwrap(),
        )
        .unwrap();
        let elems = m.enumerate(64).unwrap();
        assert_eq!(elems.len() as u128, m.order());
        let set: BTreeSet<Vec<u64>> = elems.iter().cloned().collect();
        assert_eq!(set.len(), elems.len());
    }
}
