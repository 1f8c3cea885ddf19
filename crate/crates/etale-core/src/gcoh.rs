//! Cohomology of finite groups with coefficients in presented Λ-modules.
//!
//! Low degrees are computed through crossed homomorphisms parametrized by
//! their values on the designated generators, which keeps the linear
//! algebra small even for largish groups. The normalized bar complex is
//! available in a bounded range as an independent route and as the home of
//! cup products. Inflation, restriction, and the section of inflation
//! through coinvariants connect the cohomology of a group, its subgroups,
//! and its quotients.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::mat::{span_intersection, ZnMatrix};
use crate::module::{
    averaging, direct_sum, pure_tensor, subquotient, Averaging, FpModule, ModuleMap,
};
use crate::group::{FiniteGroup, GModule, Subgroup};

/// Largest group order admitted by the bar complex route.
pub const BAR_GROUP_BOUND: usize = 64;

/// Budget on total matrix entries across the bar differentials.
pub const BAR_ENTRY_BUDGET: u128 = 1 << 26;

/// The space of crossed homomorphisms G -> M in generator coordinates.
///
/// A crossed homomorphism satisfies f(gh) = f(g) + g f(h) and is determined
/// by its values on the designated generators of G; the unknown vector is
/// the concatenation of those values. Full tables index the non-identity
/// elements 1..order in blocks of the module's generator count.
#[derive(Clone, Debug)]
pub struct CocycleSpace {
    gm: GModule,
    t: usize,
    m: usize,
    // Determination matrices: f(e) = u * f_det[e] for the unknown vector u.
    f_det: Vec<ZnMatrix>,
    // Howell basis of the cocycle solutions in the unknown coordinates.
    z: ZnMatrix,
}

impl CocycleSpace {
    /// Set up the cocycle space of a G-module.
    pub fn new(gm: &GModule) -> Result<CocycleSpace> {
        let g = gm.group().clone();
        let module = gm.module().clone();
        let n = module.n();
        let t = g.generators().len();
        let m = module.gens();
        let dim = t * m;
        // Selector of the i-th unknown block.
        let selector = |i: usize| -> ZnMatrix {
            let mut e = ZnMatrix::zero(n, dim, m);
            for k in 0..m {
                e.set(i * m + k, k, 1);
            }
            e
        };
        // Walk each element's word: f(cur s) = f(cur) + cur f(s), where a
        // letter -(i+1) stands for the inverse generator with
        // f(g^-1) = -(g^-1) f(g).
        let mut f_det = Vec::with_capacity(g.order());
        for e in 0..g.order() as u32 {
            let mut acc = ZnMatrix::zero(n, dim, m);
            let mut cur = g.identity();
            for &letter in g.word(e) {
                let i = (letter.unsigned_abs() - 1) as usize;
                let gi = g.generators()[i];
                let (step, fs) = if letter > 0 {
                    (gi, selector(i))
                } else {
                    let s = g.inv(gi);
                    (s, selector(i).mul(gm.action_matrix(s))?.neg())
                };
                acc = acc.add(&fs.mul(gm.action_matrix(cur))?)?;
                cur = g.mul(cur, step);
            }
            debug_assert_eq!(cur, e, "word walk must land on its element");
            f_det.push(acc);
        }
        // Cocycle constraints: for every element e and generator i the
        // value f(e g_i) computed two ways must agree modulo relations.
        let rels = module.relations();
        let mut blocks: Vec<ZnMatrix> = Vec::new();
        for e in 0..g.order() as u32 {
            for (i, &gi) in g.generators().iter().enumerate() {
                let target = g.mul(e, gi);
                let d = f_det[e as usize]
                    .add(&selector(i).mul(gm.action_matrix(e))?)?
                    .sub(&f_det[target as usize])?;
                if !d.is_zero() {
                    blocks.push(d);
                }
            }
        }
        let z = if blocks.is_empty() {
            ZnMatrix::identity(n, dim).howell_basis()
        } else if rels.rows() == 0 {
            // Free coefficients: one kernel of the concatenated blocks.
            let mut total = blocks[0].clone();
            for b in &blocks[1..] {
                total = total.hstack(b)?;
            }
            total.left_kernel()
        } else {
            // Presented coefficients: each block contributes the solutions
            // of u d = 0 modulo the relation span; intersect them all.
            let mut z = ZnMatrix::identity(n, dim);
            for d in &blocks {
                let stacked = d.vstack(rels)?;
                let sol = stacked.left_kernel().column_block(0, dim);
                z = span_intersection(&z, &sol)?;
            }
            z.howell_basis()
        };
        Ok(CocycleSpace { gm: gm.clone(), t, m, f_det, z })
    }

    /// The underlying G-module.
    pub fn gmodule(&self) -> &GModule {
        &self.gm
    }

    /// Length of the unknown vector (generators times module generators).
    pub fn unknown_dim(&self) -> usize {
        self.t * self.m
    }

    /// Howell basis of the cocycles in unknown coordinates.
    pub fn z_basis(&self) -> &ZnMatrix {
        &self.z
    }

    /// The full table of the cocycle with unknown vector u: values on the
    /// non-identity elements 1..order, concatenated.
    pub fn full_table(&self, u: &[u64]) -> Vec<u64> {
        let order = self.gm.group().order();
        let mut table = Vec::with_capacity((order - 1) * self.m);
        for e in 1..order {
            table.extend(self.f_det[e].act_on_row(u).expect("unknown vector length"));
        }
        table
    }

    /// Read the unknown vector back off a full table.
    pub fn unknowns_from_table(&self, table: &[u64]) -> Result<Vec<u64>> {
        let order = self.gm.group().order();
        if table.len() != (order - 1) * self.m {
            return Err(Error::DimensionMismatch(String::from(
                "cocycle table length does not match the group and module",
            )));
        }
        let mut u = Vec::with_capacity(self.unknown_dim());
        for &gi in self.gm.group().generators() {
            if gi == self.gm.group().identity() {
                u.extend(core::iter::repeat(0).take(self.m));
            } else {
                let off = (gi as usize - 1) * self.m;
                u.extend_from_slice(&table[off..off + self.m]);
            }
        }
        Ok(u)
    }

    /// Check the cocycle identity directly on every pair of elements.
    pub fn is_cocycle_table(&self, table: &[u64]) -> bool {
        let g = self.gm.group();
        let module = self.gm.module();
        let order = g.order() as u32;
        let value = |e: u32| -> Vec<u64> {
            if e == 0 {
                vec![0; self.m]
            } else {
                table[(e as usize - 1) * self.m..e as usize * self.m].to_vec()
            }
        };
        for a in 0..order {
            for b in 0..order {
                let lhs = value(g.mul(a, b));
                let rhs = module.add_elems(&value(a), &self.gm.act(a, &value(b)));
                if !module.elem_eq(&lhs, &rhs) {
                    return false;
                }
            }
        }
        true
    }

    /// The coboundary of a module element in unknown coordinates.
    pub fn coboundary(&self, v: &[u64]) -> Vec<u64> {
        let mut u = Vec::with_capacity(self.unknown_dim());
        for &gi in self.gm.group().generators() {
            let moved = self.gm.act(gi, v);
            let diff = self.gm.module().add_elems(&moved, &self.gm.module().neg_elem(v));
            u.extend(diff);
        }
        u
    }

    /// Rows spanning the coboundaries plus the coordinate ambiguity coming
    /// from the module relations, inside the unknown space.
    pub fn boundary_rows(&self) -> Result<ZnMatrix> {
        let n = self.gm.module().n();
        let dim = self.unknown_dim();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for j in 0..self.m {
            let mut e = vec![0u64; self.m];
            e[j] = 1;
            rows.push(self.coboundary(&e));
        }
        let rels = self.gm.module().relations();
        for i in 0..self.t {
            for r in 0..rels.rows() {
                let mut row = vec![0u64; dim];
                row[i * self.m..(i + 1) * self.m].copy_from_slice(rels.row(r));
                rows.push(row);
            }
        }
        ZnMatrix::from_rows(n, dim, &rows)
    }
}

/// H^0(G, M): the invariants with their inclusion into M.
pub fn h0(gm: &GModule) -> Result<(FpModule, ModuleMap)> {
    let endos: Vec<ModuleMap> = gm
        .group()
        .generators()
        .iter()
        .map(|&g| gm.action_map(g))
        .collect();
    crate::module::invariants(gm.module(), &endos)
}

/// H^1(G, M) as a subquotient of the cocycle space, with classes carrying
/// explicit cocycle representatives.
#[derive(Clone, Debug)]
pub struct H1 {
    cocycles: CocycleSpace,
    space: FpModule,
    reps: ZnMatrix,
}

impl H1 {
    /// The cohomology module.
    pub fn space(&self) -> &FpModule {
        &self.space
    }

    /// Representative unknown vectors, one row per module generator.
    pub fn reps(&self) -> &ZnMatrix {
        &self.reps
    }

    /// The underlying cocycle space.
    pub fn cocycles(&self) -> &CocycleSpace {
        &self.cocycles
    }

    /// The class of a cocycle given in unknown coordinates.
    pub fn class_of_unknowns(&self, u: &[u64]) -> Result<Vec<u64>> {
        let joint = self.reps.vstack(&self.cocycles.boundary_rows()?)?;
        let x = joint.solve_left(u).ok_or_else(|| {
            Error::Precondition(String::from("vector is not a cocycle for this module"))
        })?;
        Ok(self.space.reduce(&x[..self.reps.rows()]))
    }

    /// The class of a cocycle given as a full table.
    pub fn class_of_table(&self, table: &[u64]) -> Result<Vec<u64>> {
        let u = self.cocycles.unknowns_from_table(table)?;
        if !self.cocycles.is_cocycle_table(&self.cocycles.full_table(&u)) {
            return Err(Error::Precondition(String::from(
                "table does not satisfy the cocycle identity",
            )));
        }
        self.class_of_unknowns(&u)
    }

    /// A representative cocycle (unknown coordinates) for a class.
    pub fn rep_unknowns(&self, class: &[u64]) -> Vec<u64> {
        self.reps.act_on_row(class).expect("class length matches the presentation")
    }

    /// A representative cocycle as a full table.
    pub fn rep_table(&self, class: &[u64]) -> Vec<u64> {
        self.cocycles.full_table(&self.rep_unknowns(class))
    }
}

/// Compute H^1(G, M) through crossed homomorphisms on generators.
pub fn h1(gm: &GModule) -> Result<H1> {
    let cocycles = CocycleSpace::new(gm)?;
    let n = gm.module().n();
    let b = cocycles.boundary_rows()?;
    let (space, reps) = subquotient(n, cocycles.unknown_dim(), cocycles.z_basis(), &b)?;
    Ok(H1 { cocycles, space, reps })
}

// Flat indexing of r-tuples of non-identity elements, most significant
// coordinate first.
fn tuple_index(tuple: &[u32], q: usize) -> usize {
    let mut idx = 0usize;
    for &g in tuple {
        debug_assert!(g >= 1);
        idx = idx * q + (g as usize - 1);
    }
    idx
}

fn tuple_from_index(mut idx: usize, r: usize, q: usize) -> Vec<u32> {
    let mut tuple = vec![0u32; r];
    for slot in (0..r).rev() {
        tuple[slot] = (idx % q) as u32 + 1;
        idx /= q;
    }
    tuple
}

/// The normalized bar complex C^0 -> C^1 -> ... -> C^top of a G-module.
///
/// - C^r is the direct sum of one copy of M per r-tuple of non-identity
///   elements, ordered by the flat tuple index.
/// - requires top <= 3, |G| <= BAR_GROUP_BOUND, and total differential
///   entries within BAR_ENTRY_BUDGET.
pub fn bar_complex(gm: &GModule, top: usize) -> Result<ChainComplex> {
    let g = gm.group();
    let module = gm.module();
    let n = module.n();
    let order = g.order();
    let q = order - 1;
    let m = module.gens();
    if top > 3 {
        return Err(Error::BoundExceeded { what: String::from("bar complex degree"), bound: 3 });

    }
    if order > BAR_GROUP_BOUND {
        return Err(Error::BoundExceeded {
            what: String::from("bar complex group order"),
            bound: BAR_GROUP_BOUND,
        });
    }
    let mut entries: u128 = 0;
    for r in 0..top {
        let rows = (q as u128).pow(r as u32) * m as u128;
        let cols = (q as u128).pow(r as u32 + 1) * m as u128;
        entries = entries.saturating_add(rows * cols);
    }
    if entries > BAR_ENTRY_BUDGET {
        return Err(Error::BoundExceeded {
            what: String::from("bar complex entry budget"),
            bound: BAR_ENTRY_BUDGET as usize,
        });
    }
    let mut terms: Vec<FpModule> = Vec::with_capacity(top + 1);
    terms.push(module.clone());
    for r in 1..=top {
        let copies = vec![module.clone(); q.pow(r as u32)];
        let (sum, _, _) = direct_sum(&copies)?;
        terms.push(sum);
    }
    let mut diffs = Vec::with_capacity(top);
    for r in 0..top {
        let rows = terms[r].gens();
        let cols = terms[r + 1].gens();
        let mut mat = ZnMatrix::zero(n, rows, cols);
        // Build columns by target tuple: each summand of the formula for
        // (df)(h_1, ..., h_{r+1}) contributes a block from its source
        // tuple's rows into this target block.
        for tgt in 0..q.pow(r as u32 + 1) {
            let h = tuple_from_index(tgt, r + 1, q);
            let col_off = tgt * m;
            // Leading term: h_1 acting on f(h_2, ..., h_{r+1}).
            {
                let src = tuple_index(&h[1..], q);
                let a = gm.action_matrix(h[0]);
                for i in 0..m {
                    for j in 0..m {
                        let v = a.get(i, j);
                        if v != 0 {
                            let old = mat.get(src * m + i, col_off + j);
                            mat.set(src * m + i, col_off + j, (old + v) % n);
                        }
                    }
                }
            }
            // Inner terms: merge adjacent arguments, alternating signs.
            for i in 1..=r {
                let p = g.mul(h[i - 1], h[i]);
                if p == g.identity() {
                    continue;
                }
                let mut s = Vec::with_capacity(r);
                s.extend_from_slice(&h[..i - 1]);
                s.push(p);
                s.extend_from_slice(&h[i + 1..]);
                let src = tuple_index(&s, q);
                let sign = if i % 2 == 1 { n - 1 } else { 1 };
                for j in 0..m {
                    let old = mat.get(src * m + j, col_off + j);
                    mat.set(src * m + j, col_off + j, (old + sign) % n);
                }
            }
            // Trailing term: (-1)^{r+1} f(h_1, ..., h_r).
            {
                let src = tuple_index(&h[..r], q);
                let sign = if (r + 1) % 2 == 1 { n - 1 } else { 1 };
                for j in 0..m {
                    let old = mat.get(src * m + j, col_off + j);
                    mat.set(src * m + j, col_off + j, (old + sign) % n);
                }
            }
        }
        diffs.push(ModuleMap::new(terms[r].clone(), terms[r + 1].clone(), mat)?);
    }
    ChainComplex::new(0, terms, diffs)
}

/// Restrict a full cocycle table along a subgroup embedding.
///
/// - `embedding[h]` is the ambient index of the subgroup element h, as
///   produced by `Subgroup::as_group`.
pub fn restrict_table(table: &[u64], m: usize, embedding: &[u32]) -> Vec<u64> {
    let mut out = Vec::with_capacity((embedding.len() - 1) * m);
    for &amb in &embedding[1..] {
        debug_assert!(amb != 0, "only the identity embeds to the identity");
        let off = (amb as usize - 1) * m;
        out.extend_from_slice(&table[off..off + m]);
    }
    out
}

/// Inflate a full cocycle table along a projection G -> Q.
///
/// - `projection[g]` is the image of g in Q; elements mapping to the
///   identity get the value zero.
pub fn inflate_table(q_table: &[u64], m: usize, projection: &[u32], order: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity((order - 1) * m);
    for g in 1..order {
        let qg = projection[g] as usize;
        if qg == 0 {
            out.extend(core::iter::repeat(0).take(m));
        } else {
            out.extend_from_slice(&q_table[(qg - 1) * m..qg * m]);
        }
    }
    out
}

/// Inflate a G-module along a surjection G' -> G: g' acts through its
/// image.
pub fn inflate_gmodule(gm: &GModule, big: &FiniteGroup, projection: &[u32]) -> Result<GModule> {
    if projection.len() != big.order() {
        return Err(Error::DimensionMismatch(String::from(
            "projection table length must equal the big group order",
        )));
    }
    let acts: Vec<ZnMatrix> = projection
        .iter()
        .map(|&q| gm.action_matrix(q).clone())
        .collect();
    GModule::from_full_action(big, gm.module(), acts)
}

/// Data for passing between a group and a quotient by a normal subgroup of
/// invertible order: the coinvariants of the subgroup as a module for the
/// quotient, with the averaging isomorphisms.
#[derive(Clone, Debug)]
pub struct QuotientData {
    /// The quotient group.
    pub quotient: FiniteGroup,
    /// Projection table onto the quotient.
    pub projection: Vec<u32>,
    /// Least-lift section of the projection.
    pub section: Vec<u32>,
    /// The quotient acting on the coinvariants of the normal subgroup.
    pub action: GModule,
    /// Projection from the original module onto the coinvariants.
    pub proj_map: ModuleMap,
    /// The averaging package for the normal subgroup's action.
    pub averaging: Averaging,
}

/// Build the quotient data for a normal subgroup p of invertible order.
pub fn quotient_module_data(gm: &GModule, p: &Subgroup) -> Result<QuotientData> {
    let g = gm.group();
    let (quotient, projection, section) = g.quotient(p)?;
    let endos: Vec<ModuleMap> = p
        .elements()
        .iter()
        .filter(|&&e| e != g.identity())
        .map(|&e| gm.action_map(e))
        .collect();
    let avg = averaging(gm.module(), &endos, p.order())?;
    let (m_coinv, proj_map) = avg.coinvariants.clone();
    // The quotient acts on the coinvariants through any lift; the
    // presentation keeps the original generators, so lift action matrices
    // work unchanged.
    let acts: Vec<ZnMatrix> = section
        .iter()
        .map(|&lift| gm.action_matrix(lift).clone())
        .collect();
    let action = GModule::from_full_action(&quotient, &m_coinv, acts)?;
    Ok(QuotientData { quotient, projection, section, action, proj_map, averaging: avg })
}

/// The section of inflation: push a cocycle on G down to the quotient with
/// coefficients in the coinvariants, using the least lifts.
///
/// - the value at a quotient element is the coinvariant class of the
///   cocycle's value at the least lift; this is well defined because the
///   normal subgroup has invertible order.
pub fn inflation_section_table(qd: &QuotientData, gm: &GModule, table: &[u64]) -> Vec<u64> {
    let m = gm.module().gens();
    debug_assert_eq!(qd.proj_map.matrix().rows(), m);
    let mut out = Vec::with_capacity((qd.quotient.order() - 1) * qd.action.module().gens());
    for qbar in 1..qd.quotient.order() {
        let lift = qd.section[qbar] as usize;
        debug_assert!(lift != 0);
        let val = &table[(lift - 1) * m..lift * m];
        out.extend(qd.proj_map.apply(val));
    }
    out
}

/// Classic inflation: pull a quotient cocycle with coinvariant
/// coefficients back to the group with coefficients in the module, landing
/// in the invariant vectors via the averaging section.
pub fn inflate_from_quotient_table(qd: &QuotientData, gm: &GModule, q_table: &[u64]) -> Vec<u64> {
    let mq = qd.action.module().gens();
    let order = gm.group().order();
    // Coinvariants -> invariants -> M.
    let into_m = qd.averaging.section.compose(&qd.averaging.invariants.1).expect("composable");
    let mut out = Vec::with_capacity((order - 1) * gm.module().gens());
    for g in 1..order {
        let qg = qd.projection[g] as usize;
        if qg == 0 {
            out.extend(core::iter::repeat(0).take(gm.module().gens()));
        } else {
            let val = &q_table[(qg - 1) * mq..qg * mq];
            out.extend(into_m.apply(val));
        }
    }
    out
}

/// Evaluation data for H^1 of a cyclic group on its designated generator.
#[derive(Clone, Debug)]
pub struct CyclicH1 {
    /// The cohomology computed through crossed homomorphisms.
    pub h1: H1,
    /// Coinvariants of the full group action.
    pub coinvariants: FpModule,
    /// Projection from the module onto the coinvariants.
    pub proj: ModuleMap,
    /// The isomorphism H^1 -> coinvariants, f -> class of f(t).
    pub eval: ModuleMap,
    /// Its inverse.
    pub eval_inv: ModuleMap,
}

/// The evaluation isomorphism H^1(C, M) = M_C for a cyclic group C whose
/// order is a multiple of n = |Λ|, generated by the single designated
/// generator t, provided the subgroup of order dividing n acts trivially.
///
/// - requires exactly one designated generator whose powers exhaust C.
/// - requires n to divide |C| and t^{|C|/n} to act trivially on M.
pub fn cyclic_h1(gm: &GModule) -> Result<CyclicH1> {
    let g = gm.group();
    let module = gm.module();
    let n = module.n();
    if g.generators().len() != 1 {
        return Err(Error::Precondition(String::from(
            "cyclic evaluation needs a single designated generator",
        )));
    }
    let t = g.generators()[0];
    if g.element_order(t) != g.order() {
        return Err(Error::Precondition(String::from(
            "designated generator does not generate the cyclic group",
        )));
    }
    let order = g.order() as u64;
    if order % n != 0 {
        return Err(Error::Precondition(String::from(
            "cyclic evaluation needs the modulus to divide the group order",
        )));
    }
    let s = g.power(t, (order / n) as i64);
    let id_map = ModuleMap::identity(module);
    if !gm.action_map(s).eq_map(&id_map) {
        return Err(Error::Precondition(String::from(
            "the order-n subgroup must act trivially for cyclic evaluation",
        )));
    }
    let h1 = h1(gm)?;
    let endos: Vec<ModuleMap> = vec![gm.action_map(t)];
    let (coinv, proj) = crate::module::coinvariants(module, &endos)?;
    // eval: class -> class of representative's value at t. The unknown
    // block for the unique generator is the whole unknown vector.
    let m = module.gens();
    let mut rows = Vec::with_capacity(h1.space().gens());
    for k in 0..h1.space().gens() {
        let u = h1.reps().row(k);
        rows.push(proj.apply(&u[..m]));
    }
    let mat = ZnMatrix::from_rows(n, coinv.gens(), &rows)?;
    let eval = ModuleMap::new(h1.space().clone(), coinv.clone(), mat)?;
    let eval_inv = eval.inverse().map_err(|_| {
        Error::Precondition(String::from(
            "evaluation at the generator is not bijective; preconditions violated",
        ))
    })?;
    Ok(CyclicH1 { h1, coinvariants: coinv, proj, eval, eval_inv })
}

/// The cup product of two 1-cocycles as a normalized 2-cochain with values
/// in the tensor module: (a cup b)(g, h) = a(g) tensor g b(h).
///
/// - tables are full tables over the same group; the result is a vector in
///   the degree-2 bar term of the tensor module.
pub fn cup_tables(
    gma: &GModule,
    gmb: &GModule,
    table_a: &[u64],
    table_b: &[u64],
) -> Result<Vec<u64>> {
    if gma.group() != gmb.group() {
        return Err(Error::Precondition(String::from(
            "cup product needs modules over the same group",
        )));
    }
    let g = gma.group();
    let n = gma.module().n();
    let q = g.order() - 1;
    let ma = gma.module().gens();
    let mb = gmb.module().gens();
    let mt = ma * mb;
    let mut out = vec![0u64; q * q * mt];
    for gg in 1..g.order() as u32 {
        let va = &table_a[(gg as usize - 1) * ma..gg as usize * ma];
        for hh in 1..g.order() as u32 {
            let vb = &table_b[(hh as usize - 1) * mb..hh as usize * mb];
            let moved = gmb.act(gg, vb);
            let tens = pure_tensor(n, va, &moved);
            let idx = tuple_index(&[gg, hh], q) * mt;
            out[idx..idx + mt].copy_from_slice(&tens);
        }
    }
    Ok(out)
}

/// Degree-2 bar cohomology with explicit representatives.
pub fn h2_bar(gm: &GModule) -> Result<(FpModule, ZnMatrix)> {
    let bar = bar_complex(gm, 3)?;
    bar.cohomology_at(2)
}

/// Express a 2-cocycle's class in a precomputed bar H^2 presentation.
pub fn h2_class_of(
    bar: &ChainComplex,
    h2: &(FpModule, ZnMatrix),
    cocycle: &[u64],
) -> Result<Vec<u64>> {
    let term = bar.term(2).expect("bar complex carries degree 2");
    let b = match bar.differential(1) {
        None => term.relations().clone(),
        Some(d) => d.matrix().vstack(term.relations())?,
    };
    let joint = h2.1.vstack(&b)?;
    let x = joint.solve_left(cocycle).ok_or_else(|| {
        Error::Precondition(String::from("vector is not a 2-cocycle for this module"))
    })?;
    Ok(h2.0.reduce(&x[..h2.1.rows()]))
}

/// Cup products of 1-classes over a quotient group, inflated to a covering
/// group and read off against the image of inflation in its H^2.
///
/// For towers where the image of inflation is cyclic, pairing values are
/// scalars relative to a designated generator of the image (the first
/// presentation generator of full order). Values are canonical modulo the
/// image's order.
#[derive(Clone, Debug)]
pub struct CupTower {
    gm2: GModule,
    gm2_tensor: GModule,
    tensor_big: GModule,
    bar_big: ChainComplex,
    h2_big: (FpModule, ZnMatrix),
    projection: Vec<u32>,
    /// The image of inflated H^2(G2) classes inside H^2(G3).
    pub image: FpModule,
    /// Designated generator of the image in H^2(G3) class coordinates.
    pub generator: Vec<u64>,
    image_order: u64,
}

impl CupTower {
    /// Set up the tower: a module over the small quotient group, the big
    /// group, and the projection table big -> small.
    ///
    /// - requires the image of inflation in H^2 of the big group to be
    ///   cyclic.
    pub fn new(gm2: &GModule, big: &FiniteGroup, projection: &[u32]) -> Result<CupTower> {
        let gm2_tensor = gm2.tensor(gm2)?;
        let tensor_big = inflate_gmodule(&gm2_tensor, big, projection)?;
        let bar_big = bar_complex(&tensor_big, 3)?;
        let h2_big = bar_big.cohomology_at(2)?;
        // Inflate a basis of H^2(G2, M tensor M) and span its classes.
        let (h2_small, small_reps) = h2_bar(&gm2_tensor)?;
        let mt = gm2_tensor.module().gens();
        let q2 = gm2.group().order() - 1;
        let mut class_rows: Vec<Vec<u64>> = Vec::new();
        for k in 0..h2_small.gens() {
            let small_table = small_reps.row(k);
            let big_table = inflate_two_cochain(small_table, mt, q2, projection, big);
            class_rows.push(h2_class_of(&bar_big, &h2_big, &big_table)?);
        }
        let n = gm2.module().n();
        let z = ZnMatrix::from_rows(n, h2_big.0.gens(), &class_rows)?
            .vstack(h2_big.0.relations())?;
        let (image, image_reps) = subquotient(n, h2_big.0.gens(), &z, h2_big.0.relations())?;
        let factors = image.invariant_factors().to_vec();
        if factors.len() > 1 {
            return Err(Error::Unsupported(String::from(
                "cup tower needs a cyclic inflation image",
            )));
        }
        let image_order = factors.first().copied().unwrap_or(1);
        // Designated generator: the first presentation generator whose
        // class has full order in the image.
        let mut generator: Option<Vec<u64>> = None;
        if image_order > 1 {
            for k in 0..image.gens() {
                let mut e = vec![0u64; image.gens()];
                e[k] = 1;
                let ord = element_order_in(&image, &e);
                if ord == image_order {
                    generator = Some(image_reps.row(k).to_vec());
                    break;
                }
            }
        }
        let generator = match generator {
            Some(g) => g,
            None if image_order == 1 => vec![0u64; h2_big.0.gens()],
            None => {
                return Err(Error::Precondition(String::from(
                    "cyclic image has no full-order presentation generator",
                )))
            }
        };
        Ok(CupTower {
            gm2: gm2.clone(),
            gm2_tensor,
            tensor_big,
            bar_big,
            h2_big,
            projection: projection.to_vec(),
            image,
            generator,
            image_order,
        })
    }

    /// Order of the cyclic inflation image.
    pub fn image_order(&self) -> u64 {
        self.image_order
    }

    /// Pair two 1-cocycle tables over the small group: cup, inflate, and
    /// express as a scalar multiple of the designated image generator.
    pub fn pair(&self, table_a: &[u64], table_b: &[u64]) -> Result<u64> {
        let cup = cup_tables(&self.gm2, &self.gm2, table_a, table_b)?;
        let mt = self.gm2_tensor.module().gens();
        let q2 = self.gm2.group().order() - 1;
        let big_table =
            inflate_two_cochain(&cup, mt, q2, &self.projection, self.tensor_big.group());
        let class = h2_class_of(&self.bar_big, &self.h2_big, &big_table)?;
        if self.image_order == 1 {
            return Ok(0);
        }
        // Solve class = c * generator modulo the big H^2 relations.
        let n = self.gm2.module().n();
        let gen_row = ZnMatrix::from_rows(n, self.generator.len(), &[self.generator.clone()])?;
        let joint = gen_row.vstack(self.h2_big.0.relations())?;
        let x = joint.solve_left(&class).ok_or_else(|| {
            Error::Precondition(String::from("cup class escapes the inflation image"))
        })?;
        Ok(x[0] % self.image_order)
    }
}

// The additive order of an element's class in a presented module.
fn element_order_in(m: &FpModule, v: &[u64]) -> u64 {
    let n = m.n();
    let mut divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    divisors.sort_unstable();
    for d in divisors {
        if m.is_zero_elem(&m.scale_elem(d % n, v)) {
            return d;
        }
    }
    n
}

// Inflate a normalized 2-cochain table along a projection: value at
// (g, h) is the small table's value at (pi g, pi h), zero when either
// image is the identity.
fn inflate_two_cochain(
    small: &[u64],
    m: usize,
    q_small: usize,
    projection: &[u32],
    big: &FiniteGroup,
) -> Vec<u64> {
    let qb = big.order() - 1;
    let mut out = vec![0u64; qb * qb * m];
    for g in 1..big.order() as u32 {
        let pg = projection[g as usize];
        if pg == 0 {
            continue;
        }
        for h in 1..big.order() as u32 {
            let ph = projection[h as usize];
            if ph == 0 {
                continue;
            }
            let src = tuple_index(&[pg, ph], q_small) * m;
            let dst = tuple_index(&[g, h], qb) * m;
            out[dst..dst + m].copy_from_slice(&small[src..src + m]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Cyclic group of order k acting trivially on Z/n: H^0 = Z/n,
    // H^1 = Hom(C_k, Z/n) = Z/gcd(k, n), H^2 = Z/gcd(k, n).
    fn trivial_cyclic(k: usize, n: u64) -> GModule {
        let g = FiniteGroup::cyclic(k);
        GModule::trivial(&g, &FpModule::free(n, 1))
    }

    #[test]
    fn trivial_action_h1_is_homs_from_cyclic_group() {
        for (k, n, d) in [(2usize, 4u64, 2u64), (4, 4, 4), (3, 4, 1), (6, 4, 2), (8, 12, 4)] {
            let gm = trivial_cyclic(k, n);
            let h = h1(&gm).unwrap();
            let expect: &[u64] = if d == 1 { &[] } else { &[d] };
            assert_eq!(
                h.space().invariant_factors(),
                expect,
                "H^1(C_{k}, Z/{n}) must be Z/{d}"
            );
        }
    }

    #[test]
    fn sign_action_of_c2_on_z4_has_expected_low_cohomology() {
        // t acts by -1 on Z/4: invariants = 2Z/4 = Z/2, and
        // H^1 = ker(norm)/im(t - 1) = (Z/2 x Z/2) / ... computed: cocycles
        // f(t) with f(t) + t f(t) = 0, so 0 = f(t) - f(t): any value; but
        // the relation comes from f(t^2) = 0: f(t) - f(t) = 0. Coboundaries
        // are (t-1)m = 2m. So H^1 = Z/4 / 2Z/4 = Z/2.
        let g = FiniteGroup::cyclic(2);
        let neg = ZnMatrix::new(4, 1, 1, vec![3]).unwrap();
        let gm =
            GModule::from_generator_action(&g, &FpModule::free(4, 1), &[neg]).unwrap();
        let (h0m, _) = h0(&gm).unwrap();
        assert_eq!(h0m.invariant_factors(), &[2]);
        let h = h1(&gm).unwrap();
        assert_eq!(h.space().invariant_factors(), &[2]);
    }

    #[test]
    fn bar_and_crossed_hom_h1_agree_on_random_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x47_43_4f_48);
        let mut done = 0;
        for attempt in 0..400 {
            if done >= 40 {
                break;
            }
            let n = [2u64, 3, 4][attempt % 3];
            let k = [2usize, 3, 4, 6][attempt % 4];
            let g = FiniteGroup::cyclic(k);
            let m = 1 + (attempt % 2);
            // Random invertible-order action of the generator.
            let data: Vec<u64> = (0..m * m).map(|_| rng.gen_range(0..n)).collect();
            let mat = ZnMatrix::new(n, m, m, data).unwrap();
            let gm = match GModule::from_generator_action(
                &g,
                &FpModule::free(n, m),
                &[mat],
            ) {
                Ok(gm) => gm,
                Err(_) => continue,
            };
            done += 1;
            let viah1 = h1(&gm).unwrap();
            let bar = bar_complex(&gm, 2).unwrap();
            let (barh1, _) = bar.cohomology_at(1).unwrap();
            assert_eq!(
                viah1.space().invariant_factors(),
                barh1.invariant_factors(),
                "attempt {attempt}: crossed homomorphisms and bar H^1 must agree"
            );
            let (barh0, _) = bar.cohomology_at(0).unwrap();
            let (h0m, _) = h0(&gm).unwrap();
            assert_eq!(h0m.invariant_factors(), barh0.invariant_factors());
        }
        assert!(done >= 40, "need enough valid random actions");
    }

    #[test]
    fn bar_h2_of_cyclic_group_with_trivial_action_is_norm_quotient() {
        // H^2(C_k, Z/n) with trivial action is Z/gcd(k, n).
        for (k, n, d) in [(2usize, 4u64, 2u64), (4, 4, 4), (3, 9, 3), (4, 2, 2)] {
            let gm = trivial_cyclic(k, n);
            let (h2m, _) = h2_bar(&gm).unwrap();
            let expect: &[u64] = if d == 1 { &[] } else { &[d] };
            assert_eq!(h2m.invariant_factors(), expect, "H^2(C_{k}, Z/{n})");
        }
    }

    #[test]
    fn klein_group_h1_with_trivial_z2_coefficients_is_rank_two() {
        let g = FiniteGroup::from_presentation(
            2,
            &[
                (vec![1, 1], vec![]),
                (vec![2, 2], vec![]),
                (vec![1, 2], vec![2, 1]),
            ],
            &[],
            64,
        )
        .unwrap();
        let gm = GModule::trivial(&g, &FpModule::free(2, 1));
        let h = h1(&gm).unwrap();
        assert_eq!(h.space().invariant_factors(), &[2, 2]);
    }

    #[test]
    fn shapiro_isomorphism_for_induced_modules() {
        // H^i(G, Ind_H^G N) = H^i(H, N) in degrees 0 and 1.
        let mut rng = ChaCha8Rng::seed_from_u64(0x53_48_41_50);
        let mut done = 0;
        for attempt in 0..300 {
            if done >= 25 {
                break;
            }
            let n = [2u64, 4, 3][attempt % 3];
            // Ambient group: cyclic of order 4, 6, or 8, or the Klein
            // group via presentation.
            let g = FiniteGroup::cyclic([4usize, 6, 8][attempt % 3]);
            // Subgroup generated by a random element.
            let pick = rng.gen_range(0..g.order()) as u32;
            let sub = g.subgroup(&[pick]);
            let (h, emb) = sub.as_group(&g).unwrap();
            let m = 1 + (attempt % 2);
            let data: Vec<u64> = (0..m * m).map(|_| rng.gen_range(0..n)).collect();
            let mat = ZnMatrix::new(n, m, m, data).unwrap();
            // Action of the subgroup's designated generators on N.
            let nmods: Vec<ZnMatrix> = h.generators().iter().map(|_| mat.clone()).collect();
            let nmod = match GModule::from_generator_action(&h, &FpModule::free(n, m), &nmods)
            {
                Ok(v) => v,
                Err(_) => continue,
            };
            done += 1;
            let (ind, _) = induced_module_for_tests(&g, &h, &emb, &nmod);
            let hi_g = h1(&ind).unwrap();
            let hi_h = h1(&nmod).unwrap();
            assert_eq!(
                hi_g.space().invariant_factors(),
                hi_h.space().invariant_factors(),
                "attempt {attempt}: Shapiro must hold in degree 1"
            );
            let (h0g, _) = h0(&ind).unwrap();
            let (h0h, _) = h0(&nmod).unwrap();
            assert_eq!(
                h0g.invariant_factors(),
                h0h.invariant_factors(),
                "attempt {attempt}: Shapiro must hold in degree 0"
            );
        }
        assert!(done >= 25, "need enough valid Shapiro instances");
    }

    fn induced_module_for_tests(
        g: &FiniteGroup,
        h: &FiniteGroup,
        emb: &[u32],
        nmod: &GModule,
    ) -> (GModule, Vec<u32>) {
        crate::group::induced_module(g, h, emb, nmod).unwrap()
    }

    #[test]
    fn inflation_section_inverts_inflation() {
        // G = C4 acting on Z/3^2 through its quotient C2 by a swap; the
        // normal subgroup generated by t^2 has order 2, invertible mod 3.
        let g = FiniteGroup::cyclic(4);
        let n = 3;
        let swap = ZnMatrix::new(n, 2, 2, vec![0, 1, 1, 0]).unwrap();
        let gm = GModule::from_generator_action(&g, &FpModule::free(n, 2), &[swap]).unwrap();
        let t = g.generators()[0];
        let p = g.subgroup(&[g.mul(t, t)]);
        let qd = quotient_module_data(&gm, &p).unwrap();
        assert_eq!(qd.quotient.order(), 2);
        // Round trip: quotient cocycle -> inflate -> section -> same class.
        let hq = h1(&qd.action).unwrap();
        for k in 0..hq.space().gens() {
            let mut class = vec![0u64; hq.space().gens()];
            class[k] = 1;
            let q_table = hq.rep_table(&class);
            let big_table = inflate_from_quotient_table(&qd, &gm, &q_table);
            let cs = CocycleSpace::new(&gm).unwrap();
            assert!(cs.is_cocycle_table(&big_table), "inflated table must be a cocycle");
            let back = inflation_section_table(&qd, &gm, &big_table);
            let diff: Vec<u64> = q_table
                .iter()
                .zip(back.iter())
                .map(|(&a, &b)| (a + n - b % n) % n)
                .collect();
            // The difference must be a coboundary over the quotient.
            let hq_class = hq.class_of_table(&diff);
            assert!(hq_class.unwrap().iter().all(|&c| c == 0));
        }
        // And on the big side: inflate then section then inflate gives the
        // same class in H^1(G, M).
        let hg = h1(&gm).unwrap();
        for k in 0..hg.space().gens() {
            let mut class = vec![0u64; hg.space().gens()];
            class[k] = 1;
            let table = hg.rep_table(&class);
            let down = inflation_section_table(&qd, &gm, &table);
            let up = inflate_from_quotient_table(&qd, &gm, &down);
            let round = hg.class_of_table(&up).unwrap();
            assert_eq!(
                hg.space().reduce(&class),
                round,
                "inflation after its section must fix classes"
            );
        }
    }

    #[test]
    fn cyclic_evaluation_matches_coinvariants() {
        // C4 on Z/4 with trivial action: H^1 = Z/4, coinvariants = Z/4,
        // and evaluation at t is an isomorphism.
        let gm = trivial_cyclic(4, 4);
        let cy = cyclic_h1(&gm).unwrap();
        assert_eq!(cy.coinvariants.invariant_factors(), &[4]);
        assert!(cy.eval.is_iso().unwrap());
        // Round trip through the inverse.
        for k in 0..cy.h1.space().gens() {
            let mut class = vec![0u64; cy.h1.space().gens()];
            class[k] = 1;
            let v = cy.eval.apply(&class);
            let back = cy.eval_inv.apply(&v);
            assert!(cy.h1.space().elem_eq(&class, &back));
        }
    }

    #[test]
    fn cyclic_evaluation_rejects_wrong_preconditions() {
        // Order not divisible by the modulus.
        let gm = trivial_cyclic(3, 4);
        assert!(cyclic_h1(&gm).is_err());
        // Order-n subgroup acting nontrivially: C4 on Z/2 where t acts by
        // the swap on a rank-2 module; t^2 = id so this one passes the
        // triviality check; instead use C2 on Z/4... order 2 not divisible
        // by 4, already covered. Use C4 on Z/4 with t acting by -1: then
        // t^{4/4} = t acts nontrivially.
        let g = FiniteGroup::cyclic(4);
        let neg = ZnMatrix::new(4, 1, 1, vec![3]).unwrap();
        let gm2 =
            GModule::from_generator_action(&g, &FpModule::free(4, 1), &[neg]).unwrap();
        assert!(cyclic_h1(&gm2).is_err());
    }

    #[test]
    fn cup_product_on_klein_group_is_nontrivial() {
        // G = C2 x C2 over Z/2 with trivial coefficients: the cup product
        // H^1 x H^1 -> H^2 sends (x, y) to a nonzero class, and x cup x
        // is the Bockstein-type square, also nonzero for C2 factors.
        let g = FiniteGroup::from_presentation(
            2,
            &[
                (vec![1, 1], vec![]),
                (vec![2, 2], vec![]),
                (vec![1, 2], vec![2, 1]),
            ],
            &[],
            64,
        )
        .unwrap();
        let gm = GModule::trivial(&g, &FpModule::free(2, 1));
        let h = h1(&gm).unwrap();
        assert_eq!(h.space().gens(), 2);
        let bar = bar_complex(&gm.tensor(&gm).unwrap(), 3).unwrap();
        let h2 = bar.cohomology_at(2).unwrap();
        assert_eq!(h2.0.invariant_factors(), &[2, 2, 2], "H^2((C2)^2, Z/2) has rank 3");
        let ta = h.rep_table(&[1, 0]);
        let tb = h.rep_table(&[0, 1]);
        let cup_ab = cup_tables(&gm, &gm, &ta, &tb).unwrap();
        let class_ab = h2_class_of(&bar, &h2, &cup_ab).unwrap();
        assert!(class_ab.iter().any(|&c| c != 0), "x cup y must be nonzero");
        // Antisymmetry up to sign holds trivially mod 2; check instead
        // that x cup y and y cup x differ by the symmetric part: both are
        // nonzero.
        let cup_ba = cup_tables(&gm, &gm, &tb, &ta).unwrap();
        let class_ba = h2_class_of(&bar, &h2, &cup_ba).unwrap();
        assert!(class_ba.iter().any(|&c| c != 0));
    }

    #[test]
    fn cup_tower_for_rank_two_elementary_groups_gives_alternating_pairing() {
        // Small group (Z/2)^2, big group (Z/4)^2 with reduction mod 2.
        // The image of inflation in H^2 is rank one and the induced
        // pairing on H^1 is alternating and nondegenerate.
        let n = 2u64;
        let small = FiniteGroup::from_presentation(
            2,
            &[
                (vec![1, 1], vec![]),
                (vec![2, 2], vec![]),
                (vec![1, 2], vec![2, 1]),
            ],
            &[],
            64,
        )
        .unwrap();
        let big = FiniteGroup::from_presentation(
            2,
            &[
                (vec![1; 4], vec![]),
                (vec![2; 4], vec![]),
                (vec![1, 2], vec![2, 1]),
            ],
            &[],
            64,
        )
        .unwrap();
        assert_eq!(big.order(), 16);
        // Projection: map big generators to small generators; element g
        // with word w maps to the evaluation of w in small.
        let projection: Vec<u32> = (0..big.order() as u32)
            .map(|g| small.eval_word(big.word(g)).unwrap())
            .collect();
        let gm2 = GModule::trivial(&small, &FpModule::free(n, 1));
        let tower = CupTower::new(&gm2, &big, &projection).unwrap();
        assert_eq!(
            tower.image.invariant_factors(),
            &[2],
            "inflation image in H^2 must be rank one"
        );
        assert_eq!(tower.image_order(), 2);
        let h = h1(&gm2).unwrap();
        let x = h.rep_table(&[1, 0]);
        let y = h.rep_table(&[0, 1]);
        assert_eq!(tower.pair(&x, &x).unwrap(), 0, "pairing must be alternating: <x,x> = 0");
        assert_eq!(tower.pair(&y, &y).unwrap(), 0, "pairing must be alternating: <y,y> = 0");
        assert_eq!(tower.pair(&x, &y).unwrap(), 1, "<x,y> must generate the image");
        assert_eq!(tower.pair(&y, &x).unwrap(), 1, "<y,x> = -<x,y> = <x,y> mod 2");
    }

    #[test]
    fn presented_coefficients_use_relation_aware_cocycles() {
        // C2 acting by the swap on (Z/4)^2 / <(2, 2)>: the swap fixes the
        // relation. Compare crossed homomorphism H^1 with the bar route.
        let n = 4;
        let g = FiniteGroup::cyclic(2);
        let rel = ZnMatrix::new(n, 1, 2, vec![2, 2]).unwrap();
        let module = FpModule::from_presentation(n, 2, &rel).unwrap();
        let swap = ZnMatrix::new(n, 2, 2, vec![0, 1, 1, 0]).unwrap();
        let gm = GModule::from_generator_action(&g, &module, &[swap]).unwrap();
        let viah1 = h1(&gm).unwrap();
        let bar = bar_complex(&gm, 2).unwrap();
        let (barh1, _) = bar.cohomology_at(1).unwrap();
        assert_eq!(viah1.space().invariant_factors(), barh1.invariant_factors());
    }

    #[test]
    fn bar_complex_respects_bounds() {
        let g = FiniteGroup::cyclic(2);
        let gm = GModule::trivial(&g, &FpModule::free(2, 1));
        assert!(bar_complex(&gm, 4).is_err());
    }

    #[test]
    fn class_of_table_round_trips_representatives() {
        let gm = trivial_cyclic(4, 4);
        let h = h1(&gm).unwrap();
        for k in 0..h.space().gens() {
            let mut class = vec![0u64; h.space().gens()];
            class[k] = 1;
            let table = h.rep_table(&class);
            let back = h.class_of_table(&table).unwrap();
            assert_eq!(h.space().reduce(&class), back);
        }
    }
}
