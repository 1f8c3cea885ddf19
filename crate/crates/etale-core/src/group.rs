//! Finite groups as explicit multiplication tables, presentations resolved
//! by coset enumeration, and module actions.
//!
//! Elements are u32 indices with the identity at index 0. Groups built from
//! presentations get their element order from a breadth-first walk over the
//! generator action, so indices, words, and every downstream computation
//! are deterministic.
//!
//! Words over the generators are sequences of nonzero i32 letters: letter
//! k > 0 is generator k-1, letter -k is its inverse.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat::ZnMatrix;
use crate::module::{direct_sum, FpModule, ModuleMap};

/// A finite group with a full multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    generators: Vec<u32>,
    gen_names: Vec<String>,
    // Breadth-first word for each element over the designated generators.
    words: Vec<Vec<i32>>,
}

impl FiniteGroup {
    /// Build a group from a multiplication table, relabeling so the
    /// identity sits at index 0.
    ///
    /// - validates closure, identity, inverses, and associativity.
    /// - generator set: the designated generators if given (by original
    ///   index), otherwise a greedy small generating set.
    pub fn from_mul_table(table: &[Vec<u32>], generators: Option<Vec<u32>>) -> Result<FiniteGroup> {
        let order = table.len();
        if order == 0 {
            return Err(Error::InvalidInput(String::from("empty multiplication table")));
        }
        for row in table {
            if row.len() != order {
                return Err(Error::InvalidInput(String::from(
                    "multiplication table must be square",
                )));
            }
            if row.iter().any(|&v| v as usize >= order) {
                return Err(Error::InvalidInput(String::from(
                    "multiplication table entry out of range",
                )));
            }
        }
        // Find the two-sided identity.
        let mut identity = None;
        'outer: for e in 0..order {
            for a in 0..order {
                if table[e][a] != a as u32 || table[a][e] != a as u32 {
                    continue 'outer;
                }
            }
            identity = Some(e);
            break;
        }
        let e = identity
            .ok_or_else(|| Error::InvalidInput(String::from("table has no identity element")))?;
        // Relabel by swapping 0 and the identity.
        let relabel = |x: usize| -> u32 {
            if x == e {
                0
            } else if x == 0 {
                e as u32
            } else {
                x as u32
            }
        };
        let mut mul = vec![0u32; order * order];
        for a in 0..order {
            for b in 0..order {
                let (ra, rb) = (relabel(a) as usize, relabel(b) as usize);
                mul[ra * order + rb] = relabel(table[a][b] as usize);
            }
        }
        // Associativity; cubic, intended for desk-scale tables.
        for a in 0..order {
            for b in 0..order {
                let ab = mul[a * order + b] as usize;
                for c in 0..order {
                    let bc = mul[b * order + c] as usize;
                    if mul[ab * order + c] != mul[a * order + bc] {
                        return Err(Error::InvalidInput(String::from(
                            "multiplication table is not associative",
                        )));
                    }
                }
            }
        }
        let mut inv = vec![u32::MAX; order];
        for a in 0..order {
            for b in 0..order {
                if mul[a * order + b] == 0 {
                    inv[a] = b as u32;
                }
            }
        }
        if inv.iter().any(|&v| v == u32::MAX) {
            return Err(Error::InvalidInput(String::from("table has a non-invertible element")));
        }
        let generators = match generators {
            Some(gs) => {
                let gs: Vec<u32> = gs
                    .into_iter()
                    .map(|g| {
                        if (g as usize) < order {
                            Ok(relabel(g as usize))
                        } else {
                            Err(Error::InvalidInput(String::from("generator index out of range")))
                        }
                    })
                    .collect::<Result<_>>()?;
                gs
            }
            None => greedy_generators(order, &mul),
        };
        let gen_names = (0..generators.len()).map(|i| format!("g{i}")).collect();
        let mut group = FiniteGroup {
            order,
            mul,
            inv,
            generators,
            gen_names,
            words: Vec::new(),
        };
        group.words = group.compute_words()?;
        Ok(group)
    }

    /// The cyclic group of order k, generated by element 1.
    pub fn cyclic(k: usize) -> FiniteGroup {
        debug_assert!(k >= 1);
        let table: Vec<Vec<u32>> =
            (0..k).map(|a| (0..k).map(|b| ((a + b) % k) as u32).collect()).collect();
        FiniteGroup::from_mul_table(&table, Some(if k > 1 { vec![1] } else { vec![] }))
            .expect("cyclic table is a group")
    }

    /// Resolve a finite presentation by coset enumeration over the trivial
    /// subgroup.
    ///
    /// - `num_gens`: number of generators.
    /// - `relations`: pairs (lhs, rhs) of words meaning lhs = rhs.
    /// - `names`: one name per generator, defaulted to g0, g1, ... when
    ///   empty.
    /// - `bound`: maximum number of cosets alive at once.
    pub fn from_presentation(
        num_gens: usize,
        relations: &[(Vec<i32>, Vec<i32>)],
        names: &[String],
        bound: usize,
    ) -> Result<FiniteGroup> {
        for (l, r) in relations {
            for &letter in l.iter().chain(r.iter()) {
                if letter == 0 || letter.unsigned_abs() as usize > num_gens {
                    return Err(Error::InvalidInput(String::from(
                        "relation letter out of generator range",
                    )));
                }
            }
        }
        let mut relators: Vec<Vec<i32>> = Vec::new();
        for (l, r) in relations {
            let mut w = l.clone();
            w.extend(r.iter().rev().map(|&x| -x));
            relators.push(w);
        }
        let table = coset_enumeration(num_gens, &relators, bound)?;
        let order = table.len();
        // Breadth-first relabel over generator edges.
        let mut label = vec![u32::MAX; order];
        let mut bfs_order: Vec<usize> = Vec::with_capacity(order);
        label[0] = 0;
        bfs_order.push(0);
        let mut head = 0usize;
        while head < bfs_order.len() {
            let c = bfs_order[head];
            head += 1;
            for g in 0..num_gens {
                let d = table[c][2 * g] as usize;
                if label[d] == u32::MAX {
                    label[d] = bfs_order.len() as u32;
                    bfs_order.push(d);
                }
            }
        }
        if bfs_order.len() != order {
            return Err(Error::InvalidInput(String::from(
                "presentation generators do not reach every coset",
            )));
        }
        // Word for each element, following breadth-first parents.
        let mut words: Vec<Vec<i32>> = vec![Vec::new(); order];
        let mut have = vec![false; order];
        have[0] = true;
        for &c in &bfs_order {
            for g in 0..num_gens {
                let d = table[c][2 * g] as usize;
                if !have[d] {
                    have[d] = true;
                    let mut w = words[c].clone();
                    w.push(g as i32 + 1);
                    words[d] = w;
                }
            }
        }
        // Multiplication: trace the word of b from a.
        let trace = |start: usize, w: &[i32]| -> usize {
            let mut cur = start;
            for &letter in w {
                let col = letter_col(letter);
                cur = table[cur][col] as usize;
            }
            cur
        };
        let mut mul = vec![0u32; order * order];
        for a in 0..order {
            for b in 0..order {
                let (oa, ob) = (bfs_order[a], bfs_order[b]);
                let prod = trace(oa, &words[ob]);
                mul[a * order + b] = label[prod];
            }
        }
        let mut inv = vec![u32::MAX; order];
        for a in 0..order {
            for b in 0..order {
                if mul[a * order + b] == 0 {
                    inv[a] = b as u32;
                }
            }
        }
        let generators: Vec<u32> = (0..num_gens)
            .map(|g| label[table[0][2 * g] as usize])
            .collect();
        let gen_names: Vec<String> = if names.is_empty() {
            (0..num_gens).map(|i| format!("g{i}")).collect()
        } else if names.len() == num_gens {
            names.to_vec()
        } else {
            return Err(Error::InvalidInput(String::from(
                "generator name count does not match generator count",
            )));
        };
        let mut relabeled_words: Vec<Vec<i32>> = vec![Vec::new(); order];
        for a in 0..order {
            relabeled_words[label[a] as usize] = words[a].clone();
        }
        let group = FiniteGroup {
            order,
            mul,
            inv,
            generators,
            gen_names,
            words: relabeled_words,
        };
        debug_assert!(group.check_associative(), "coset table must give a group");
        Ok(group)
    }

    fn check_associative(&self) -> bool {
        for a in 0..self.order {
            for b in 0..self.order {
                let ab = self.mul(a as u32, b as u32);
                for c in 0..self.order {
                    let bc = self.mul(b as u32, c as u32);
                    if self.mul(ab, c as u32) != self.mul(a as u32, bc) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn compute_words(&self) -> Result<Vec<Vec<i32>>> {
        // Breadth-first walk keeps words short and deterministic.
        let mut words: Vec<Option<Vec<i32>>> = vec![None; self.order];
        words[0] = Some(Vec::new());
        let mut queue = vec![0u32];
        let mut head = 0;
        while head < queue.len() {
            let c = queue[head];
            head += 1;
            for (gi, &g) in self.generators.iter().enumerate() {
                let d = self.mul(c, g);
                if words[d as usize].is_none() {
                    let mut w = words[c as usize].clone().expect("visited");
                    w.push(gi as i32 + 1);
                    words[d as usize] = Some(w);
                    queue.push(d);
                }
            }
        }
        if words.iter().any(|w| w.is_none()) {
            return Err(Error::InvalidInput(String::from(
                "designated generators do not generate the group",
            )));
        }
        Ok(words.into_iter().map(|w| w.expect("checked")).collect())
    }

    /// Number of elements.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Identity element.
    pub fn identity(&self) -> u32 {
        0
    }

    /// Product a * b.
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.order + b as usize]
    }

    /// Inverse.
    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    /// a conjugated by b: b * a * b^{-1}.
    pub fn conj(&self, a: u32, b: u32) -> u32 {
        self.mul(self.mul(b, a), self.inv(b))
    }

    /// k-th power.
    pub fn power(&self, a: u32, k: i64) -> u32 {
        let mut result = 0u32;
        let base = if k >= 0 { a } else { self.inv(a) };
        for _ in 0..k.unsigned_abs() {
            result = self.mul(result, base);
        }
        result
    }

    /// Multiplicative order of an element.
    pub fn element_order(&self, a: u32) -> usize {
        let mut cur = a;
        let mut k = 1;
        while cur != 0 {
            cur = self.mul(cur, a);
            k += 1;
        }
        k
    }

    /// Designated generators.
    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    /// Names of the designated generators.
    pub fn gen_names(&self) -> &[String] {
        &self.gen_names
    }

    /// Breadth-first word of an element over the designated generators.
    pub fn word(&self, a: u32) -> &[i32] {
        &self.words[a as usize]
    }

    /// Human-readable form of an element via its word.
    pub fn describe(&self, a: u32) -> String {
        if a == 0 {
            return String::from("1");
        }
        let parts: Vec<String> = self.words[a as usize]
            .iter()
            .map(|&l| {
                let name = &self.gen_names[(l.unsigned_abs() - 1) as usize];
                if l > 0 {
                    name.clone()
                } else {
                    format!("{name}^-1")
                }
            })
            .collect();
        parts.join("*")
    }

    /// Evaluate a word to an element.
    pub fn eval_word(&self, w: &[i32]) -> Result<u32> {
        let mut cur = 0u32;
        for &letter in w {
            if letter == 0 || letter.unsigned_abs() as usize > self.generators.len() {
                return Err(Error::InvalidInput(String::from("word letter out of range")));
            }
            let g = self.generators[(letter.unsigned_abs() - 1) as usize];
            let g = if letter > 0 { g } else { self.inv(g) };
            cur = self.mul(cur, g);
        }
        Ok(cur)
    }

    /// True when the group is commutative.
    pub fn is_abelian(&self) -> bool {
        (0..self.order as u32)
            .all(|a| (0..self.order as u32).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// The subgroup generated by the given elements.
    pub fn subgroup(&self, gens: &[u32]) -> Subgroup {
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        seen.insert(0);
        let mut frontier: Vec<u32> = vec![0];
        while let Some(c) = frontier.pop() {
            for &g in gens {
                let d = self.mul(c, g);
                if seen.insert(d) {
                    frontier.push(d);
                }
            }
        }
        Subgroup { elements: seen.into_iter().collect() }
    }

    /// The center.
    pub fn center(&self) -> Subgroup {
        let elements: Vec<u32> = (0..self.order as u32)
            .filter(|&a| (0..self.order as u32).all(|b| self.mul(a, b) == self.mul(b, a)))
            .collect();
        Subgroup { elements }
    }

    /// The derived subgroup, generated by all commutators.
    pub fn derived_subgroup(&self) -> Subgroup {
        let mut comms: BTreeSet<u32> = BTreeSet::new();
        for a in 0..self.order as u32 {
            for b in 0..self.order as u32 {
                let c = self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)));
                comms.insert(c);
            }
        }
        let gens: Vec<u32> = comms.into_iter().collect();
        self.subgroup(&gens)
    }

    /// True when the subgroup is normal.
    pub fn is_normal(&self, sub: &Subgroup) -> bool {
        sub.elements.iter().all(|&h| {
            (0..self.order as u32).all(|g| sub.contains(self.conj(h, g)))
        })
    }

    /// Quotient by a normal subgroup.
    ///
    /// - returns the quotient group, the projection (element index to
    ///   quotient index), and the canonical section (quotient index to the
    ///   least element index in that coset).
    pub fn quotient(&self, sub: &Subgroup) -> Result<(FiniteGroup, Vec<u32>, Vec<u32>)> {
        if !self.is_normal(sub) {
            return Err(Error::Precondition(String::from(
                "quotient requires a normal subgroup",
            )));
        }
        // Canonical representative: least element of the coset gH.
        let mut rep_of = vec![u32::MAX; self.order];
        for g in 0..self.order as u32 {
            if rep_of[g as usize] != u32::MAX {
                continue;
            }
            let mut coset: Vec<u32> = sub.elements.iter().map(|&h| self.mul(g, h)).collect();
            coset.sort_unstable();
            let rep = coset[0];
            for c in coset {
                rep_of[c as usize] = rep;
            }
        }
        let mut reps: Vec<u32> = rep_of.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        reps.sort_unstable();
        // The identity coset contains 0 and 0 is the least element overall,
        // so reps[0] = 0: the quotient identity lands at index 0.
        debug_assert_eq!(reps[0], 0);
        let index_of: BTreeMap<u32, u32> =
            reps.iter().enumerate().map(|(i, &r)| (r, i as u32)).collect();
        let q = reps.len();
        let mut table: Vec<Vec<u32>> = vec![vec![0; q]; q];
        for (i, &a) in reps.iter().enumerate() {
            for (j, &b) in reps.iter().enumerate() {
                let prod_rep = rep_of[self.mul(a, b) as usize];
                table[i][j] = index_of[&prod_rep];
            }
        }
        // Project the designated generators; drop identities and repeats.
        let mut qgens: Vec<u32> = Vec::new();
        for &g in &self.generators {
            let qg = index_of[&rep_of[g as usize]];
            if qg != 0 && !qgens.contains(&qg) {
                qgens.push(qg);
            }
        }
        let quotient = FiniteGroup::from_mul_table(&table, Some(qgens))?;
        let projection: Vec<u32> =
            (0..self.order).map(|g| index_of[&rep_of[g]]).collect();
        let section: Vec<u32> = reps;
        Ok((quotient, projection, section))
    }
}

fn greedy_generators(order: usize, mul: &[u32]) -> Vec<u32> {
    let mut gens: Vec<u32> = Vec::new();
    let mut span: BTreeSet<u32> = BTreeSet::new();
    span.insert(0);
    for cand in 1..order as u32 {
        if span.contains(&cand) {
            continue;
        }
        gens.push(cand);
        // Recompute the closure of gens.
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        seen.insert(0);
        let mut frontier = vec![0u32];
        while let Some(c) = frontier.pop() {
            for &g in &gens {
                let d = mul[c as usize * order + g as usize];
                if seen.insert(d) {
                    frontier.push(d);
                }
            }
        }
        span = seen;
        if span.len() == order {
            break;
        }
    }
    gens
}

fn letter_col(letter: i32) -> usize {
    debug_assert_ne!(letter, 0);
    if letter > 0 {
        2 * (letter as usize - 1)
    } else {
        2 * ((-letter) as usize - 1) + 1
    }
}

// Coset enumeration over the trivial subgroup, HLT style with coincidence
// handling. Returns the completed table over 2 * num_gens columns; row i,
// column 2g is the action of generator g, column 2g + 1 of its inverse.
fn coset_enumeration(
    num_gens: usize,
    relators: &[Vec<i32>],
    bound: usize,
) -> Result<Vec<Vec<u32>>> {
    let width = 2 * num_gens;
    let mut table: Vec<Vec<Option<u32>>> = vec![vec![None; width]];
    // Union-find over cosets.
    let mut parent: Vec<u32> = vec![0];
    let mut live: usize = 1;

    fn find(parent: &mut Vec<u32>, mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let up = parent[parent[x as usize] as usize];
            parent[x as usize] = up;
            x = up;
        }
        x
    }

    let mut pending: Vec<(u32, u32)> = Vec::new();

    // Set f.letter = b (and the inverse link), queueing a coincidence on
    // conflict.
    macro_rules! set_entry {
        ($f:expr, $letter:expr, $b:expr) => {{
            let f = find(&mut parent, $f);
            let b = find(&mut parent, $b);
            let col = letter_col($letter);
            let icol = letter_col(-$letter);
            match table[f as usize][col] {
                Some(x) => {
                    let x = find(&mut parent, x);
                    if x != b {
                        pending.push((x, b));
                    }
                }
                None => {
                    table[f as usize][col] = Some(b);
                    match table[b as usize][icol] {
                        Some(y) => {
                            let y = find(&mut parent, y);
                            if y != f {
                                pending.push((y, f));
                            }
                        }
                        None => table[b as usize][icol] = Some(f),
                    }
                }
            }
        }};
    }

    macro_rules! process_pending {
        () => {{
            while let Some((a, b)) = pending.pop() {
                let a = find(&mut parent, a);
                let b = find(&mut parent, b);
                if a == b {
                    continue;
                }
                let (survivor, dead) = if a < b { (a, b) } else { (b, a) };
                parent[dead as usize] = survivor;
                live -= 1;
                // Move the dead row's entries onto the survivor.
                for col in 0..width {
                    if let Some(x) = table[dead as usize][col].take() {
                        let x = find(&mut parent, x);
                        let letter = col_letter(col);
                        match table[survivor as usize][col] {
                            Some(y) => {
                                let y = find(&mut parent, y);
                                if y != x {
                                    pending.push((y, x));
                                }
                            }
                            None => {
                                table[survivor as usize][col] = Some(x);
                                // Fix the reverse link on x.
                                let icol = letter_col(-letter);
                                match table[x as usize][icol] {
                                    Some(z) => {
                                        let z = find(&mut parent, z);
                                        if z != survivor {
                                            pending.push((z, survivor));
                                        }
                                    }
                                    None => table[x as usize][icol] = Some(survivor),
                                }
                            }
                        }
                    }
                }
            }
        }};
    }

    fn col_letter(col: usize) -> i32 {
        let g = (col / 2) as i32 + 1;
        if col % 2 == 0 {
            g
        } else {
            -g
        }
    }

    // Scan the relator at coset c, filling gaps with fresh cosets.
    // Returns Err on bound overrun.
    let mut cursor: u32 = 0;
    loop {
        // Skip dead cosets.
        let total = table.len() as u32;
        if cursor >= total {
            // One more sweep: ensure the table is complete and stable.
            let mut complete = true;
            for c in 0..table.len() as u32 {
                if find(&mut parent, c) != c {
                    continue;
                }
                if table[c as usize].iter().any(|e| e.is_none()) {
                    complete = false;
                    break;
                }
            }
            if complete && pending.is_empty() {
                break;
            }
            cursor = 0;
            continue;
        }
        let c = find(&mut parent, cursor);
        if c != cursor {
            cursor += 1;
            continue;
        }
        // Scan every relator at c.
        for rel in relators {
            if find(&mut parent, c) != c {
                break;
            }
            // Repeatedly close the relator cycle, defining cosets for gaps.
            loop {
                let c_live = find(&mut parent, c);
                let mut f = c_live;
                let mut i = 0usize;
                while i < rel.len() {
                    let col = letter_col(rel[i]);
                    match table[f as usize][col] {
                        Some(x) => {
                            f = find(&mut parent, x);
                            i += 1;
                        }
                        None => break,
                    }
                }
                if i == rel.len() {
                    if f != c_live {
                        pending.push((f, c_live));
                        process_pending!();
                    }
                    break;
                }
                let mut b = c_live;
                let mut j = rel.len();
                while j > i + 1 {
                    let col = letter_col(-rel[j - 1]);
                    match table[b as usize][col] {
                        Some(x) => {
                            b = find(&mut parent, x);
                            j -= 1;
                        }
                        None => break,
                    }
                }
                if j == i + 1 {
                    // Deduction: f * rel[i] = b closes the cycle.
                    set_entry!(f, rel[i], b);
                    process_pending!();
                    break;
                }
                // Gap: define a new coset at f * rel[i] and keep scanning.
                if live >= bound {
                    return Err(Error::BoundExceeded {
                        what: String::from("coset enumeration"),
                        bound,
                    });
                }
                let new = table.len() as u32;
                table.push(vec![None; width]);
                parent.push(new);
                live += 1;
                set_entry!(f, rel[i], new);
                process_pending!();
            }
        }
        // Fill undefined generator images at c with fresh cosets.
        let c = find(&mut parent, cursor);
        if c == cursor {
            for col in 0..width {
                let c = find(&mut parent, cursor);
                if c != cursor {
                    break;
                }
                if table[c as usize][col].is_none() {
                    if live >= bound {
                        return Err(Error::BoundExceeded {
                            what: String::from("coset enumeration"),
                            bound,
                        });
                    }
                    let new = table.len() as u32;
                    table.push(vec![None; width]);
                    parent.push(new);
                    live += 1;
                    set_entry!(c, col_letter(col), new);
                    process_pending!();
                }
            }
        }
        cursor += 1;
    }

    // Compact: collect live cosets, renumber, and rewrite entries.
    let mut index = vec![u32::MAX; table.len()];
    let mut live_rows: Vec<u32> = Vec::new();
    for c in 0..table.len() as u32 {
        if find(&mut parent, c) == c {
            index[c as usize] = live_rows.len() as u32;
            live_rows.push(c);
        }
    }
    let mut out: Vec<Vec<u32>> = Vec::with_capacity(live_rows.len());
    for &c in &live_rows {
        let row: Vec<u32> = table[c as usize]
            .iter()
            .map(|e| {
                let x = e.expect("completed table has no holes");
                index[find(&mut parent, x) as usize]
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// A subgroup, stored as its sorted element list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    elements: Vec<u32>,
}

impl Subgroup {
    /// Sorted elements.
    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    /// Number of elements.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Membership.
    pub fn contains(&self, g: u32) -> bool {
        self.elements.binary_search(&g).is_ok()
    }

    /// Realize the subgroup as a group in its own right.
    ///
    /// - returns the group and the embedding: subgroup element index to
    ///   ambient element index. The subgroup identity is index 0.
    pub fn as_group(&self, ambient: &FiniteGroup) -> Result<(FiniteGroup, Vec<u32>)> {
        let k = self.elements.len();
        let index_of: BTreeMap<u32, u32> = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i as u32))
            .collect();
        let mut table = vec![vec![0u32; k]; k];
        for (i, &a) in self.elements.iter().enumerate() {
            for (j, &b) in self.elements.iter().enumerate() {
                let p = ambient.mul(a, b);
                let q = index_of.get(&p).ok_or_else(|| {
                    Error::InvalidInput(String::from("element set is not closed under product"))
                })?;
                table[i][j] = *q;
            }
        }
        let group = FiniteGroup::from_mul_table(&table, None)?;
        // from_mul_table relabels by swapping 0 and the identity position;
        // mirror that swap in the embedding.
        let id_pos = index_of[&0] as usize;
        let mut embedding = self.elements.clone();
        embedding.swap(0, id_pos);
        Ok((group, embedding))
    }
}

/// Build a group from concrete elements closed under composition.
///
/// - `elements` must be closed and contain the identity; pass the output of
///   `closure_under`.
/// - returns the group plus the element list reordered so that index i of
///   the group corresponds to entry i of the list (identity first, the rest
///   in ascending order of T).
pub fn group_from_concrete<T, F>(
    elements: &[T],
    identity: &T,
    mut compose: F,
    generators: &[T],
) -> Result<(FiniteGroup, Vec<T>)>
where
    T: Ord + Clone,
    F: FnMut(&T, &T) -> Result<T>,
{
    let mut ordered: Vec<T> = elements.to_vec();
    ordered.sort();
    ordered.dedup();
    let id_pos = ordered
        .binary_search(identity)
        .map_err(|_| Error::InvalidInput(String::from("identity missing from element list")))?;
    ordered.swap(0, id_pos);
    // Keep the tail sorted for determinism.
    ordered[1..].sort();
    let index_of = |x: &T, ordered: &[T]| -> Result<u32> {
        ordered
            .iter()
            .position(|y| y == x)
            .map(|i| i as u32)
            .ok_or_else(|| Error::InvalidInput(String::from("composition left the element set")))
    };
    let k = ordered.len();
    let mut table = vec![vec![0u32; k]; k];
    for i in 0..k {
        for j in 0..k {
            let p = compose(&ordered[i], &ordered[j])?;
            table[i][j] = index_of(&p, &ordered)?;
        }
    }
    let mut gen_indices = Vec::with_capacity(generators.len());
    for g in generators {
        gen_indices.push(index_of(g, &ordered)?);
    }
    let group = FiniteGroup::from_mul_table(&table, Some(gen_indices))?;
    Ok((group, ordered))
}

/// Close a seed set under a binary operation, up to a bound.
pub fn closure_under<T, F>(seeds: &[T], identity: T, mut compose: F, bound: usize) -> Result<Vec<T>>
where
    T: Ord + Clone,
    F: FnMut(&T, &T) -> Result<T>,
{
    let mut seen: BTreeSet<T> = BTreeSet::new();
    seen.insert(identity.clone());
    let mut frontier: Vec<T> = vec![identity];
    while let Some(cur) = frontier.pop() {
        for s in seeds {
            let next = compose(&cur, s)?;
            if seen.len() > bound {
                return Err(Error::BoundExceeded {
                    what: String::from("closure under composition"),
                    bound,
                });
            }
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// A Λ-module with a left action of a finite group, stored as one matrix
/// per group element acting on the right of element rows.
///
/// The left-action law g(hv) = (gh)v becomes A(gh) = A(h) * A(g) in the
/// row convention.
#[derive(Clone, Debug)]
pub struct GModule {
    group: FiniteGroup,
    module: FpModule,
    acts: Vec<ZnMatrix>,
}

impl GModule {
    /// Build a module action from matrices for the designated generators.
    ///
    /// - each matrix must define an endomorphism of the module; the action
    ///   law is validated on all pairs of group elements.
    pub fn from_generator_action(
        group: &FiniteGroup,
        module: &FpModule,
        gen_mats: &[ZnMatrix],
    ) -> Result<GModule> {
        if gen_mats.len() != group.generators().len() {
            return Err(Error::InvalidInput(String::from(
                "need one action matrix per designated generator",
            )));
        }
        for m in gen_mats {
            // Validate shape, modulus, and relation preservation.
            ModuleMap::new(module.clone(), module.clone(), m.clone())?;
        }
        let order = group.order();
        let mut acts: Vec<Option<ZnMatrix>> = vec![None; order];
        acts[0] = Some(ZnMatrix::identity(module.n(), module.gens()));
        // Walk elements in breadth-first order via their stored words; the
        // word of an element composes generator matrices in reverse.
        for e in 0..order as u32 {
            if acts[e as usize].is_some() {
                continue;
            }
            let mut a = ZnMatrix::identity(module.n(), module.gens());
            for &letter in group.word(e) {
                let gi = (letter.unsigned_abs() - 1) as usize;
                debug_assert!(letter > 0, "breadth-first words use positive letters");
                // Prefix order e = g_{w1} g_{w2} ...; in the row convention
                // the later factor acts first.
                a = gen_mats[gi].mul(&a)?;
            }
            acts[e as usize] = Some(a);
        }
        let acts: Vec<ZnMatrix> = acts.into_iter().map(|a| a.expect("filled")).collect();
        // Validate the action law on all pairs.
        for a in 0..order as u32 {
            for b in 0..order as u32 {
                let ab = group.mul(a, b);
                let lhs = &acts[ab as usize];
                let rhs = acts[b as usize].mul(&acts[a as usize])?;
                if *lhs != rhs {
                    // Matrices may differ as matrices yet agree on classes;
                    // compare through the module.
                    let la = ModuleMap::new(module.clone(), module.clone(), lhs.clone())?;
                    let rb = ModuleMap::new(module.clone(), module.clone(), rhs)?;
                    if !la.eq_map(&rb) {
                        return Err(Error::Precondition(String::from(
                            "generator matrices do not satisfy the group relations on the module",
                        )));
                    }
                }
            }
        }
        Ok(GModule { group: group.clone(), module: module.clone(), acts })
    }

    /// The trivial action.
    pub fn trivial(group: &FiniteGroup, module: &FpModule) -> GModule {
        let id = ZnMatrix::identity(module.n(), module.gens());
        GModule {
            group: group.clone(),
            module: module.clone(),
            acts: vec![id; group.order()],
        }
    }

    /// Build from a full list of per-element matrices (validated).
    pub fn from_full_action(
        group: &FiniteGroup,
        module: &FpModule,
        acts: Vec<ZnMatrix>,
    ) -> Result<GModule> {
        if acts.len() != group.order() {
            return Err(Error::InvalidInput(String::from(
                "need one action matrix per group element",
            )));
        }
        for m in &acts {
            ModuleMap::new(module.clone(), module.clone(), m.clone())?;
        }
        if acts[0] != ZnMatrix::identity(module.n(), module.gens()) {
            return Err(Error::Precondition(String::from(
                "identity element must act as the identity matrix",
            )));
        }
        for a in 0..group.order() as u32 {
            for b in 0..group.order() as u32 {
                let ab = group.mul(a, b);
                let rhs = acts[b as usize].mul(&acts[a as usize])?;
                let la = ModuleMap::new(module.clone(), module.clone(), acts[ab as usize].clone())?;
                let rb = ModuleMap::new(module.clone(), module.clone(), rhs)?;
                if !la.eq_map(&rb) {
                    return Err(Error::Precondition(String::from(
                        "matrices do not satisfy the group law on the module",
                    )));
                }
            }
        }
        Ok(GModule { group: group.clone(), module: module.clone(), acts })
    }

    /// The acting group.
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// The underlying module.
    pub fn module(&self) -> &FpModule {
        &self.module
    }

    /// Action of g on an element row.
    pub fn act(&self, g: u32, v: &[u64]) -> Vec<u64> {
        self.acts[g as usize].act_on_row(v).expect("element length matches module")
    }

    /// The action matrix of g.
    pub fn action_matrix(&self, g: u32) -> &ZnMatrix {
        &self.acts[g as usize]
    }

    /// The action of g as an endomorphism map.
    pub fn action_map(&self, g: u32) -> ModuleMap {
        ModuleMap::new(self.module.clone(), self.module.clone(), self.acts[g as usize].clone())
            .expect("stored action matrices are valid")
    }

    /// Restrict the action along a subgroup embedding (as produced by
    /// `Subgroup::as_group`).
    pub fn restrict(&self, sub: &FiniteGroup, embedding: &[u32]) -> Result<GModule> {
        if embedding.len() != sub.order() {
            return Err(Error::InvalidInput(String::from(
                "embedding length does not match subgroup order",
            )));
        }
        let acts: Vec<ZnMatrix> = embedding
            .iter()
            .map(|&g| self.acts[g as usize].clone())
            .collect();
        GModule::from_full_action(sub, &self.module, acts)
    }

    /// Tensor product of two actions of the same group (diagonal action).
    pub fn tensor(&self, other: &GModule) -> Result<GModule> {
        if self.group != other.group {
            return Err(Error::Precondition(String::from(
                "tensor of actions needs a common group",
            )));
        }
        let module = crate::module::tensor(&self.module, &other.module)?;
        let mut acts = Vec::with_capacity(self.group.order());
        for g in 0..self.group.order() {
            acts.push(kronecker(&self.acts[g], &other.acts[g])?);
        }
        GModule::from_full_action(&self.group, &module, acts)
    }
}

/// Kronecker product in the index convention of `module::tensor`: entry
/// ((i, j), (k, l)) = a[i][k] * b[j][l] with row index i * b.rows() + j.
pub fn kronecker(a: &ZnMatrix, b: &ZnMatrix) -> Result<ZnMatrix> {
    if a.n() != b.n() {
        return Err(Error::ModulusMismatch { left: a.n(), right: b.n() });
    }
    let n = a.n();
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let mut out = ZnMatrix::zero(n, rows, cols);
    for i in 0..a.rows() {
        for j in 0..b.rows() {
            for k in 0..a.cols() {
                let av = a.get(i, k);
                if av == 0 {
                    continue;
                }
                for l in 0..b.cols() {
                    let bv = b.get(j, l);
                    if bv == 0 {
                        continue;
                    }
                    let v = ((av as u128 * bv as u128) % n as u128) as u64;
                    out.set(i * b.rows() + j, k * b.cols() + l, v);
                }
            }
        }
    }
    Ok(out)
}

/// Induce a module from a subgroup to the ambient group: the direct sum of
/// one copy of the module per left coset, permuted and twisted by the
/// action.
///
/// - `embedding` maps subgroup element indices to ambient indices, as from
///   `Subgroup::as_group`.
/// - returns the induced action together with the chosen coset
///   representatives (least ambient index per left coset, ascending).
pub fn induced_module(
    group: &FiniteGroup,
    sub: &FiniteGroup,
    embedding: &[u32],
    nmod: &GModule,
) -> Result<(GModule, Vec<u32>)> {
    if nmod.group() != sub {
        return Err(Error::Precondition(String::from(
            "induced module needs an action of the subgroup",
        )));
    }
    let ambient_of: Vec<u32> = embedding.to_vec();
    let sub_index: BTreeMap<u32, u32> = ambient_of
        .iter()
        .enumerate()
        .map(|(i, &g)| (g, i as u32))
        .collect();
    // Left cosets gH; representative = least ambient element index.
    let mut rep_of = vec![u32::MAX; group.order()];
    let mut reps: Vec<u32> = Vec::new();
    for g in 0..group.order() as u32 {
        if rep_of[g as usize] != u32::MAX {
            continue;
        }
        let mut coset: Vec<u32> = ambient_of.iter().map(|&h| group.mul(g, h)).collect();
        coset.sort_unstable();
        let rep = coset[0];
        for c in &coset {
            rep_of[*c as usize] = rep;
        }
        reps.push(rep);
    }
    reps.sort_unstable();
    let rep_index: BTreeMap<u32, usize> =
        reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let copies: Vec<FpModule> = (0..reps.len()).map(|_| nmod.module().clone()).collect();
    let (sum, _, _) = direct_sum(&copies)?;
    let m = nmod.module().gens();
    // Action of g: block (i, x) -> block j where g r_i = r_j h, twisted by
    // the action of h.
    let mut acts = Vec::with_capacity(group.order());
    for g in 0..group.order() as u32 {
        let mut mat = ZnMatrix::zero(sum.n(), sum.gens(), sum.gens());
        for (i, &ri) in reps.iter().enumerate() {
            let gri = group.mul(g, ri);
            let rj = rep_of[gri as usize];
            let j = rep_index[&rj];
            let h_ambient = group.mul(group.inv(rj), gri);
            let h = *sub_index.get(&h_ambient).ok_or_else(|| {
                Error::Precondition(String::from("coset algebra left the subgroup"))
            })?;
            let block = nmod.action_matrix(h);
            for r in 0..m {
                for c in 0..m {
                    let v = block.get(r, c);
                    if v != 0 {
                        mat.set(i * m + r, j * m + c, v);
                    }
                }
            }
        }
        acts.push(mat);
    }
    let induced = GModule::from_full_action(group, &sum, acts)?;
    Ok((induced, reps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> FiniteGroup {
        FiniteGroup::from_presentation(
            2,
            &[
                (vec![1, 1], vec![]),
                (vec![2, 2], vec![]),
                (vec![1, 2, 1, 2, 1, 2], vec![]),
            ],
            &[String::from("a"), String::from("b")],
            256,
        )
        .unwrap()
    }

    #[test]
    fn cyclic_group_of_order_four_has_expected_structure() {
        let g = FiniteGroup::cyclic(4);
        assert_eq!(g.order(), 4);
        assert_eq!(g.element_order(1), 4);
        assert_eq!(g.mul(3, 2), 1);
        assert_eq!(g.inv(1), 3);
        assert!(g.is_abelian());
    }

    #[test]
    fn mul_table_constructor_relabels_identity_to_zero() {
        // Z/3 written with identity at position 2.
        let table = vec![vec![1, 2, 0], vec![2, 0, 1], vec![0, 1, 2]];
        let g = FiniteGroup::from_mul_table(&table, None).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.mul(0, 1), 1);
        assert_eq!(g.element_order(1), 3);
    }

    #[test]
    fn presentation_of_trivial_and_cyclic_groups() {
        let t = FiniteGroup::from_presentation(1, &[(vec![1], vec![])], &[], 64).unwrap();
        assert_eq!(t.order(), 1);
        let c4 =
            FiniteGroup::from_presentation(1, &[(vec![1, 1, 1, 1], vec![])], &[], 64).unwrap();
        assert_eq!(c4.order(), 4);
        assert_eq!(c4.element_order(c4.generators()[0]), 4);
    }

    #[test]
    fn presentation_of_klein_four_group() {
        let k = FiniteGroup::from_presentation(
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
        assert_eq!(k.order(), 4);
        assert!(k.is_abelian());
        assert!((1..4).all(|e| k.element_order(e) == 2));
    }

    #[test]
    fn presentation_of_s3_is_nonabelian_of_order_six() {
        let g = s3();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        // Derived subgroup is the rotation subgroup of order 3.
        let der = g.derived_subgroup();
        assert_eq!(der.order(), 3);
        assert!(g.is_normal(&der));
    }

    #[test]
    fn presentation_of_quaternion_group() {
        // Q8 = <a, b | a^4, a^2 = b^2, b a b^-1 = a^-1>.
        let q = FiniteGroup::from_presentation(
            2,
            &[
                (vec![1, 1, 1, 1], vec![]),
                (vec![1, 1], vec![2, 2]),
                (vec![2, 1, -2], vec![-1]),
            ],
            &[],
            256,
        )
        .unwrap();
        assert_eq!(q.order(), 8);
        // Exactly one element of order 2 distinguishes Q8 from D4.
        let count = (0..8u32).filter(|&e| q.element_order(e) == 2).count();
        assert_eq!(count, 1);
    }

    #[test]
    fn presentation_of_the_order_sixteen_ramification_group() {
        // <g, s1, s2, s3>: the s_i commute and square to 1, g fixes s1,
        // swaps s2 and s3 under conjugation, and g^2 = s1 s2 s3.
        let g = FiniteGroup::from_presentation(
            4,
            &[
                (vec![2, 2], vec![]),
                (vec![3, 3], vec![]),
                (vec![4, 4], vec![]),
                (vec![2, 3], vec![3, 2]),
                (vec![2, 4], vec![4, 2]),
                (vec![3, 4], vec![4, 3]),
                (vec![1, 2], vec![2, 1]),
                (vec![1, 3], vec![4, 1]),
                (vec![1, 4], vec![3, 1]),
                (vec![1, 1], vec![2, 3, 4]),
            ],
            &[
                String::from("g"),
                String::from("s1"),
                String::from("s2"),
                String::from("s3"),
            ],
            1024,
        )
        .unwrap();
        assert_eq!(g.order(), 16);
        let gamma = g.generators()[0];
        assert_eq!(g.element_order(gamma), 4);
        // The abelian part <s1, s2, s3> is elementary of order 8.
        let s = g.subgroup(&g.generators()[1..].to_vec());
        assert_eq!(s.order(), 8);
        assert!(g.is_normal(&s));
    }

    #[test]
    fn free_presentation_exceeds_the_bound() {
        let err = FiniteGroup::from_presentation(2, &[], &[], 64);
        assert!(matches!(err, Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn quotient_of_s3_by_rotations_is_c2() {
        let g = s3();
        let der = g.derived_subgroup();
        let (q, proj, section) = g.quotient(&der).unwrap();
        assert_eq!(q.order(), 2);
        assert_eq!(proj[0], 0);
        // The section picks the least representative of each coset.
        assert_eq!(section[0], 0);
        for (qi, &rep) in section.iter().enumerate() {
            assert_eq!(proj[rep as usize] as usize, qi);
        }
    }

    #[test]
    fn quotient_rejects_non_normal_subgroups() {
        let g = s3();
        let refl = g.subgroup(&[g.generators()[0]]);
        assert_eq!(refl.order(), 2);
        assert!(!g.is_normal(&refl));
        assert!(g.quotient(&refl).is_err());
    }

    #[test]
    fn subgroup_as_group_preserves_products() {
        let g = s3();
        let der = g.derived_subgroup();
        let (h, emb) = der.as_group(&g).unwrap();
        assert_eq!(h.order(), 3);
        assert_eq!(emb[0], 0);
        for a in 0..3u32 {
            for b in 0..3u32 {
                let inside = h.mul(a, b);
                let outside = g.mul(emb[a as usize], emb[b as usize]);
                assert_eq!(emb[inside as usize], outside);
            }
        }
    }

    #[test]
    fn group_words_evaluate_back_to_their_elements() {
        let g = s3();
        for e in 0..g.order() as u32 {
            let w = g.word(e).to_vec();
            assert_eq!(g.eval_word(&w).unwrap(), e);
        }
    }

    #[test]
    fn center_of_q8_has_order_two() {
        let q = FiniteGroup::from_presentation(
            2,
            &[
                (vec![1, 1, 1, 1], vec![]),
                (vec![1, 1], vec![2, 2]),
                (vec![2, 1, -2], vec![-1]),
            ],
            &[],
            256,
        )
        .unwrap();
        assert_eq!(q.center().order(), 2);
    }

    #[test]
    fn gmodule_swap_action_of_c2_is_valid() {
        let c2 = FiniteGroup::cyclic(2);
        let m = FpModule::free(4, 2);
        let swap = ZnMatrix::from_rows(4, 2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let gm = GModule::from_generator_action(&c2, &m, &[swap]).unwrap();
        assert_eq!(gm.act(1, &[1, 2]), vec![2, 1]);
        assert_eq!(gm.act(0, &[1, 2]), vec![1, 2]);
    }

    #[test]
    fn gmodule_rejects_matrices_violating_relations() {
        let c2 = FiniteGroup::cyclic(2);
        let m = FpModule::free(4, 1);
        // Multiplication by 2 squares to multiplication by 4 = 0, not the
        // identity, so it cannot realize an action of C2.
        let bad = ZnMatrix::new(4, 1, 1, vec![2]).unwrap();
        assert!(GModule::from_generator_action(&c2, &m, &[bad]).is_err());
    }

    #[test]
    fn action_law_holds_in_the_row_convention() {
        // S3 on Λ^2 over Z/7: a acts as the swap, b as the swap composed
        // with negation of the first coordinate... use two reflections
        // generating a dihedral action; validation inside the constructor
        // is the real assertion here.
        let g = s3();
        let m = FpModule::free(7, 2);
        // Represent a and b by the reflection matrices of the triangle.
        let a = ZnMatrix::from_rows(7, 2, &[vec![0, 1], vec![1, 0]]).unwrap();
        // b: x -> -x - y, y -> y i.e. matrix rows (6, 0), (6, 1).
        let b = ZnMatrix::from_rows(7, 2, &[vec![6, 0], vec![6, 1]]).unwrap();
        let gm = GModule::from_generator_action(&g, &m, &[a, b]).unwrap();
        for x in 0..g.order() as u32 {
            for y in 0..g.order() as u32 {
                let xy = g.mul(x, y);
                let v = vec![3u64, 5];
                let direct = gm.act(xy, &v);
                let stepwise = gm.act(x, &gm.act(y, &v));
                assert_eq!(direct, stepwise, "left action law at ({x}, {y})");
            }
        }
    }

    #[test]
    fn induced_module_from_trivial_subgroup_is_the_regular_representation() {
        let c3 = FiniteGroup::cyclic(3);
        let triv = c3.subgroup(&[]);
        let (sub, emb) = triv.as_group(&c3).unwrap();
        let n = FpModule::free(9, 1);
        let nmod = GModule::trivial(&sub, &n);
        let (ind, reps) = induced_module(&c3, &sub, &emb, &nmod).unwrap();
        assert_eq!(reps.len(), 3);
        assert_eq!(ind.module().gens(), 3);
        // Each nonidentity element permutes the three coordinates without
        // fixed coordinate.
        for g in 1..3u32 {
            let mat = ind.action_matrix(g);
            for i in 0..3 {
                assert_eq!(mat.get(i, i), 0, "regular action of {g} fixes no coordinate");
            }
        }
    }

    #[test]
    fn induced_module_respects_the_subgroup_twist() {
        // Induce the sign action of C2 inside C4 up to C4: the result has
        // rank 2 and the generator of C4 swaps the two blocks.
        let c4 = FiniteGroup::cyclic(4);
        let sq = c4.subgroup(&[2]);
        let (sub, emb) = sq.as_group(&c4).unwrap();
        let m = FpModule::free(9, 1);
        let sign = ZnMatrix::new(9, 1, 1, vec![8]).unwrap();
        let nmod = GModule::from_generator_action(&sub, &m, &[sign]).unwrap();
        let (ind, reps) = induced_module(&c4, &sub, &emb, &nmod).unwrap();
        assert_eq!(reps, vec![0, 1]);
        assert_eq!(ind.module().gens(), 2);
        // The generator 1 sends rep 0 to coset of 1 (rep 1) and rep 1 to
        // 2 = rep 0 twisted by the sign.
        let a1 = ind.action_matrix(1);
        assert_eq!(a1.get(0, 1), 1);
        assert_eq!(a1.get(1, 0), 8);
    }

    #[test]
    fn closure_under_collects_a_matrix_group() {
        let swap = ZnMatrix::from_rows(5, 2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let id = ZnMatrix::identity(5, 2);
        let got = closure_under(&[swap.clone()], id.clone(), |a, b| a.mul(b), 16).unwrap();
        assert_eq!(got.len(), 2);
        let (group, elems) = group_from_concrete(&got, &id, |a, b| a.mul(b), &[swap]).unwrap();
        assert_eq!(group.order(), 2);
        assert_eq!(elems[0], id);
    }

    #[test]
    fn tensor_of_actions_acts_diagonally() {
        let c2 = FiniteGroup::cyclic(2);
        let m = FpModule::free(9, 2);
        let swap = ZnMatrix::from_rows(9, 2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let gm = GModule::from_generator_action(&c2, &m, &[swap]).unwrap();
        let tt = gm.tensor(&gm).unwrap();
        assert_eq!(tt.module().gens(), 4);
        let v = crate::module::pure_tensor(9, &[1, 0], &[0, 1]);
        let moved = tt.act(1, &v);
        let expect = crate::module::pure_tensor(9, &[0, 1], &[1, 0]);
        assert_eq!(moved, expect);
    }
}
