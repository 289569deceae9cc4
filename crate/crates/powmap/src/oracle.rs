//! Exact verification engine: eigenvalue densities as sparse symmetrized
//! Laurent polynomials with rational coefficients.
//!
//! Densities are stored orbit-collapsed: one canonical exponent vector per
//! symmetry orbit, carrying the total coefficient mass of that orbit. The
//! coefficient of a specific monomial is the mass divided by the orbit size,
//! so equality, moments, and divisible-part extraction all stay exact.

use num::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::classical::{Component, ComponentKind, Decomposition};
use crate::rat::{rat_int, rat_to_string, Rat};

pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("expansion needs {required} coefficient operations, budget is {budget}")]
    Budget { required: u64, budget: u64 },
    #[error("variable block sizes {got:?} do not match part variable counts {want:?}")]
    BlockMismatch { got: Vec<usize>, want: Vec<usize> },
    #[error("blocks must partition the ambient variables exactly once")]
    BadPartition,
}

/// Monomial exponents; true exponent k is entries[k] / global_denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExponentVector {
    pub entries: Vec<i64>,
    pub global_denominator: u32,
}

impl ExponentVector {
    pub fn integral(entries: Vec<i64>) -> ExponentVector {
        ExponentVector { entries, global_denominator: 1 }
    }

    pub fn halves(entries: Vec<i64>) -> ExponentVector {
        ExponentVector { entries, global_denominator: 2 }.canon()
    }

    /// Reduce the denominator when every entry allows it.
    pub fn canon(mut self) -> ExponentVector {
        assert!(self.global_denominator == 1 || self.global_denominator == 2);
        if self.global_denominator == 2 && self.entries.iter().all(|e| e % 2 == 0) {
            for e in &mut self.entries {
                *e /= 2;
            }
            self.global_denominator = 1;
        }
        self
    }

    pub fn is_integral(&self) -> bool {
        self.global_denominator == 1 || self.entries.iter().all(|e| e % 2 == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// No symmetrization.
    None,
    /// Permutations of the variables.
    S,
    /// Permutations and independent inversions.
    B,
}

/// Canonical orbit representative of an exponent vector.
pub fn canon_key(sym: Symmetry, v: &[i64]) -> Vec<i64> {
    let mut k = v.to_vec();
    match sym {
        Symmetry::None => {}
        Symmetry::S => k.sort_unstable_by(|a, b| b.cmp(a)),
        Symmetry::B => {
            for e in &mut k {
                *e = e.abs();
            }
            k.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    k
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Size of the orbit of a canonical key.
pub fn orbit_size(sym: Symmetry, key: &[i64]) -> u64 {
    match sym {
        Symmetry::None => 1,
        Symmetry::S => {
            let mut size = factorial(key.len());
            let mut run = 1;
            for i in 1..=key.len() {
                if i < key.len() && key[i] == key[i - 1] {
                    run += 1;
                } else {
                    size /= factorial(run);
                    run = 1;
                }
            }
            size
        }
        Symmetry::B => {
            let nonzero = key.iter().filter(|e| **e != 0).count() as u32;
            orbit_size(Symmetry::S, key) * 2u64.pow(nonzero)
        }
    }
}

/// Distinct rearrangements of a multiset, without duplicates.
fn multiset_permutations(key: &[i64]) -> Vec<Vec<i64>> {
    let mut values: Vec<i64> = key.to_vec();
    values.sort_unstable();
    values.dedup();
    let counts: Vec<usize> =
        values.iter().map(|v| key.iter().filter(|k| *k == v).count()).collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(key.len());
    fn rec(
        values: &[i64],
        counts: &mut [usize],
        current: &mut Vec<i64>,
        total: usize,
        out: &mut Vec<Vec<i64>>,
    ) {
        if current.len() == total {
            out.push(current.clone());
            return;
        }
        for i in 0..values.len() {
            if counts[i] > 0 {
                counts[i] -= 1;
                current.push(values[i]);
                rec(values, counts, current, total, out);
                current.pop();
                counts[i] += 1;
            }
        }
    }
    let mut counts = counts;
    rec(&values, &mut counts, &mut current, key.len(), &mut out);
    out
}

/// A symmetrized Laurent polynomial in orbit-collapsed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentDensity {
    pub vars: usize,
    pub symmetry: Symmetry,
    /// Canonical key -> total coefficient over the orbit.
    pub terms: BTreeMap<Vec<i64>, Rat>,
}

impl LaurentDensity {
    pub fn constant(vars: usize, sym: Symmetry) -> LaurentDensity {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; vars], rat_int(1));
        LaurentDensity { vars, symmetry: sym, terms }
    }

    fn add(&mut self, v: &[i64], c: Rat) {
        if c.is_zero() {
            return;
        }
        let key = canon_key(self.symmetry, v);
        let entry = self.terms.entry(key).or_insert_with(|| rat_int(0));
        *entry += c;
        if entry.is_zero() {
            let key = canon_key(self.symmetry, v);
            self.terms.remove(&key);
        }
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&vec![0; self.vars]).cloned().unwrap_or_else(|| rat_int(0))
    }

    fn normalize(&mut self) {
        let c = self.constant_term();
        assert!(c.is_positive(), "vanishing constant term");
        for coeff in self.terms.values_mut() {
            *coeff /= c.clone();
        }
    }

    /// Coefficient mass as explicit monomials; member coefficient is the
    /// orbit total divided by the orbit size.
    pub fn full_terms(&self) -> Vec<(Vec<i64>, Rat)> {
        let mut out = Vec::new();
        for (key, total) in &self.terms {
            let size = orbit_size(self.symmetry, key);
            let per = total.clone() / rat_int(size as i64);
            match self.symmetry {
                Symmetry::None => out.push((key.clone(), per)),
                Symmetry::S => {
                    for perm in multiset_permutations(key) {
                        out.push((perm, per.clone()));
                    }
                }
                Symmetry::B => {
                    for perm in multiset_permutations(key) {
                        let hot: Vec<usize> =
                            (0..perm.len()).filter(|&i| perm[i] != 0).collect();
                        for mask in 0..(1u32 << hot.len()) {
                            let mut member = perm.clone();
                            for (bit, &pos) in hot.iter().enumerate() {
                                if mask & (1 << bit) != 0 {
                                    member[pos] = -member[pos];
                                }
                            }
                            out.push((member, per.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    /// Number of explicit monomials `full_terms` would produce.
    pub fn full_size(&self) -> u64 {
        self.terms.keys().map(|k| orbit_size(self.symmetry, k)).sum()
    }

    /// Numeric value at a torus point given by angles in radians.
    pub fn evaluate(&self, angles: &[f64]) -> f64 {
        assert_eq!(angles.len(), self.vars);
        let mut re = 0.0;
        for (v, c) in self.full_terms() {
            let phase: f64 = v.iter().zip(angles).map(|(e, t)| *e as f64 * t).sum();
            re += c.to_f64().unwrap() * phase.cos();
        }
        re
    }

    /// Re-collapse under a coarser symmetry group.
    pub fn resymmetrize(&self, sym: Symmetry) -> LaurentDensity {
        let mut out = LaurentDensity { vars: self.vars, symmetry: sym, terms: BTreeMap::new() };
        for (key, total) in &self.terms {
            out.add(key, total.clone());
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(factorial(n) as usize);
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out
}

fn perm_sign(p: &[usize]) -> i64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1i64;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn check_budget(required: u64, budget: u64) -> Result<(), OracleError> {
    if required > budget {
        Err(OracleError::Budget { required, budget })
    } else {
        Ok(())
    }
}

fn unitary_density(n: usize, budget: u64) -> Result<LaurentDensity, OracleError> {
    let nf = factorial(n);
    check_budget(nf.saturating_mul(nf), budget)?;
    let perms = permutations(n);
    let mut d = LaurentDensity { vars: n, symmetry: Symmetry::S, terms: BTreeMap::new() };
    let signs: Vec<i64> = perms.iter().map(|p| perm_sign(p)).collect();
    for (p1, s1) in perms.iter().zip(&signs) {
        for (p2, s2) in perms.iter().zip(&signs) {
            let e: Vec<i64> = (0..n).map(|k| p1[k] as i64 - p2[k] as i64).collect();
            d.add(&e, rat_int(s1 * s2));
        }
    }
    let order = rat_int(nf as i64);
    for c in d.terms.values_mut() {
        *c /= order.clone();
    }
    Ok(d)
}

/// Which sign character weights a hyperoctahedral element.
#[derive(Clone, Copy, PartialEq, Eq)]
enum OrthSign {
    /// Sign of the underlying permutation only.
    PermOnly,
    /// Full sign: permutation sign times the product of the inversions.
    Full,
}

/// Signed-permutation kernel over doubled offsets (supports half-integers).
fn orth_density(two_delta: &[i64], sign: OrthSign, budget: u64) -> Result<LaurentDensity, OracleError> {
    let n = two_delta.len();
    let group = factorial(n).saturating_mul(1 << n);
    check_budget(group, budget)?;
    let mut d = LaurentDensity { vars: n, symmetry: Symmetry::B, terms: BTreeMap::new() };
    for p in permutations(n) {
        let ps = perm_sign(&p);
        for mask in 0..(1u32 << n) {
            let mut flips = 0;
            let mut e = vec![0i64; n];
            for k in 0..n {
                // Image position of coordinate k under the signed permutation.
                let eps = if mask & (1 << k) != 0 { -1 } else { 1 };
                if eps < 0 {
                    flips += 1;
                }
                let doubled = two_delta[k] - eps * two_delta[p[k]];
                assert!(doubled % 2 == 0, "offsets must differ by integers");
                e[k] = doubled / 2;
            }
            let s = match sign {
                OrthSign::PermOnly => ps,
                OrthSign::Full => ps * if flips % 2 == 0 { 1 } else { -1 },
            };
            d.add(&e, rat_int(s));
        }
    }
    d.normalize();
    Ok(d)
}

/// Doubled offset vector and character for an orthogonal coset on its free
/// conjugate pairs.
fn orth_parameters(c: &Component) -> (Vec<i64>, OrthSign) {
    match (c.kind, c.size % 2 == 0) {
        (ComponentKind::Oplus, true) => {
            let m = (c.size / 2) as i64;
            ((0..m).map(|k| 2 * k).collect(), OrthSign::PermOnly)
        }
        (ComponentKind::Ominus, true) => {
            let m = (c.size / 2) as i64;
            ((1..m).map(|k| 2 * k).collect(), OrthSign::Full)
        }
        (ComponentKind::Oplus, false) => {
            let m = ((c.size - 1) / 2) as i64;
            ((0..m).map(|k| 2 * k + 1).collect(), OrthSign::Full)
        }
        (ComponentKind::Ominus, false) => {
            let m = ((c.size - 1) / 2) as i64;
            ((0..m).map(|k| 2 * k + 1).collect(), OrthSign::PermOnly)
        }
        _ => unreachable!("orthogonal parameters need an orthogonal coset"),
    }
}

pub fn density(c: &Component) -> Result<LaurentDensity, OracleError> {
    density_with_budget(c, DEFAULT_BUDGET)
}

pub fn density_with_budget(c: &Component, budget: u64) -> Result<LaurentDensity, OracleError> {
    match c.kind {
        ComponentKind::U => unitary_density(c.size as usize, budget),
        ComponentKind::ReU => {
            let u = unitary_density(c.size as usize, budget)?;
            Ok(u.resymmetrize(Symmetry::B))
        }
        ComponentKind::Oplus | ComponentKind::Ominus => {
            let (two_delta, sign) = orth_parameters(c);
            orth_density(&two_delta, sign, budget)
        }
        ComponentKind::Sp => {
            // Same distribution on free pairs as the negative coset two up.
            let (two_delta, sign) = orth_parameters(&crate::classical::ominus(c.size + 2));
            orth_density(&two_delta, sign, budget)
        }
    }
}

/// Keep the terms whose true exponents are all multiples of p and re-index
/// by the p-th root of each variable.
pub fn p_divisible_part(d: &LaurentDensity, p: u64) -> LaurentDensity {
    assert!(p >= 1);
    let pi = p as i64;
    let mut out =
        LaurentDensity { vars: d.vars, symmetry: d.symmetry, terms: BTreeMap::new() };
    for (key, total) in &d.terms {
        if key.iter().all(|e| e % pi == 0) {
            let scaled: Vec<i64> = key.iter().map(|e| e / pi).collect();
            out.terms.insert(scaled, total.clone());
        }
    }
    out
}

/// Coefficient of the monomial with the given exponents in the symmetrized
/// polynomial.
pub fn moment(d: &LaurentDensity, mu: &ExponentVector) -> Rat {
    let mu = mu.clone().canon();
    if mu.global_denominator != 1 {
        return rat_int(0);
    }
    assert_eq!(mu.entries.len(), d.vars);
    let key = canon_key(d.symmetry, &mu.entries);
    match d.terms.get(&key) {
        None => rat_int(0),
        Some(total) => total.clone() / rat_int(orbit_size(d.symmetry, &key) as i64),
    }
}

fn validate_blocks(
    parts: &[LaurentDensity],
    blocks: &[Vec<usize>],
    ambient_vars: usize,
) -> Result<(), OracleError> {
    let got: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
    let want: Vec<usize> = parts.iter().map(|p| p.vars).collect();
    if got != want {
        return Err(OracleError::BlockMismatch { got, want });
    }
    let mut seen = vec![false; ambient_vars];
    for b in blocks {
        for &i in b {
            if i >= ambient_vars || seen[i] {
                return Err(OracleError::BadPartition);
            }
            seen[i] = true;
        }
    }
    if !seen.iter().all(|s| *s) {
        return Err(OracleError::BadPartition);
    }
    Ok(())
}

/// Product of independent densities on disjoint variable blocks, collapsed
/// under the ambient symmetry. Parts are expanded orbit by orbit.
pub fn product_density(
    parts: &[LaurentDensity],
    blocks: &[Vec<usize>],
    ambient: Symmetry,
    budget: u64,
) -> Result<LaurentDensity, OracleError> {
    let ambient_vars: usize = blocks.iter().map(|b| b.len()).sum();
    validate_blocks(parts, blocks, ambient_vars)?;
    if parts.len() == 1 && blocks[0].iter().enumerate().all(|(i, &b)| i == b) {
        let single = &parts[0];
        if single.symmetry == ambient {
            return Ok(single.clone());
        }
        return Ok(single.resymmetrize(ambient));
    }

    let mut required = 1u64;
    for part in parts {
        required = required.saturating_mul(part.full_size().max(1));
    }
    check_budget(required, budget)?;

    let expanded: Vec<Vec<(Vec<i64>, Rat)>> = parts.iter().map(|p| p.full_terms()).collect();
    let mut out =
        LaurentDensity { vars: ambient_vars, symmetry: ambient, terms: BTreeMap::new() };
    let mut idx = vec![0usize; parts.len()];
    loop {
        let mut vec = vec![0i64; ambient_vars];
        let mut coeff = rat_int(1);
        for (j, block) in blocks.iter().enumerate() {
            let (exps, c) = &expanded[j][idx[j]];
            for (slot, e) in block.iter().zip(exps) {
                vec[*slot] = *e;
            }
            coeff *= c.clone();
        }
        out.add(&vec, coeff);

        let mut j = parts.len();
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < expanded[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Product computed directly on collapsed totals, without expanding part
/// orbits: every pair of block orbits fuses into a single ambient orbit
/// (the ambient group contains each block group acting independently), so
/// the total masses multiply exactly. Independent arithmetic route kept for
/// cross-checking the expansion route.
pub fn product_density_kernel(
    components: &[Component],
    blocks: &[Vec<usize>],
    ambient: Symmetry,
    budget: u64,
) -> Result<LaurentDensity, OracleError> {
    let ambient_vars: usize = blocks.iter().map(|b| b.len()).sum();
    let mut parts: Vec<Vec<(Vec<i64>, Rat)>> = Vec::new();
    let mut want = Vec::new();
    for c in components {
        let d = density_with_budget(c, budget)?;
        want.push(d.vars);
        parts.push(d.terms.into_iter().collect());
    }
    let got: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
    if got != want {
        return Err(OracleError::BlockMismatch { got, want });
    }
    let mut required = 1u64;
    for p in &parts {
        required = required.saturating_mul(p.len().max(1) as u64);
    }
    check_budget(required, budget)?;

    let mut out =
        LaurentDensity { vars: ambient_vars, symmetry: ambient, terms: BTreeMap::new() };
    if parts.is_empty() {
        out.terms.insert(Vec::new(), rat_int(1));
        return Ok(out);
    }
    let mut idx = vec![0usize; parts.len()];
    loop {
        let mut vec = vec![0i64; ambient_vars];
        let mut coeff = rat_int(1);
        for (j, block) in blocks.iter().enumerate() {
            let (exps, c) = &parts[j][idx[j]];
            for (slot, e) in block.iter().zip(exps) {
                vec[*slot] = *e;
            }
            coeff *= c.clone();
        }
        out.add(&vec, coeff);

        let mut j = parts.len();
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < parts[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Witness {
    pub exponent: Vec<i64>,
    #[serde(with = "crate::rat::serde_rat")]
    pub lhs_coeff: Rat,
    #[serde(with = "crate::rat::serde_rat")]
    pub rhs_coeff: Rat,
}

impl Witness {
    pub fn to_json(&self) -> String {
        format!(
            "[{:?}, \"{}\", \"{}\"]",
            self.exponent,
            rat_to_string(&self.lhs_coeff),
            rat_to_string(&self.rhs_coeff)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum VerifyOutcome {
    Equal,
    Differs(Witness),
}

impl VerifyOutcome {
    pub fn is_equal(&self) -> bool {
        matches!(self, VerifyOutcome::Equal)
    }
}

/// Variable count of a component's density.
pub fn density_vars(c: &Component) -> usize {
    match c.kind {
        ComponentKind::U | ComponentKind::ReU => c.size as usize,
        ComponentKind::Sp => (c.size / 2) as usize,
        ComponentKind::Oplus | ComponentKind::Ominus => c.free_pairs() as usize,
    }
}

fn first_difference(lhs: &LaurentDensity, rhs: &LaurentDensity) -> Option<Witness> {
    let keys: std::collections::BTreeSet<&Vec<i64>> =
        lhs.terms.keys().chain(rhs.terms.keys()).collect();
    for key in keys {
        let l = lhs.terms.get(key).cloned().unwrap_or_else(|| rat_int(0));
        let r = rhs.terms.get(key).cloned().unwrap_or_else(|| rat_int(0));
        if l != r {
            let size = rat_int(orbit_size(lhs.symmetry, key) as i64);
            return Some(Witness {
                exponent: key.clone(),
                lhs_coeff: l / size.clone(),
                rhs_coeff: r / size,
            });
        }
    }
    None
}

pub fn verify_identity(
    lhs: &Component,
    p: u64,
    rhs: &Decomposition,
) -> Result<VerifyOutcome, OracleError> {
    verify_identity_with_budget(lhs, p, rhs, DEFAULT_BUDGET)
}

pub fn verify_identity_with_budget(
    lhs: &Component,
    p: u64,
    rhs: &Decomposition,
    budget: u64,
) -> Result<VerifyOutcome, OracleError> {
    let ambient = match lhs.kind {
        ComponentKind::U => Symmetry::S,
        _ => Symmetry::B,
    };
    let lhs_vars = density_vars(lhs);
    let rhs_vars: usize = rhs.components.iter().map(density_vars).sum();
    if lhs_vars != rhs_vars {
        // Distributions on different tori are never equal; witnessed by the
        // variable counts themselves.
        return Ok(VerifyOutcome::Differs(Witness {
            exponent: Vec::new(),
            lhs_coeff: rat_int(lhs_vars as i64),
            rhs_coeff: rat_int(rhs_vars as i64),
        }));
    }

    let lhs_density = p_divisible_part(&density_with_budget(lhs, budget)?, p);

    let mut parts = Vec::new();
    let mut blocks = Vec::new();
    let mut next = 0usize;
    for c in &rhs.components {
        let d = density_with_budget(c, budget)?;
        let vars = d.vars;
        parts.push(d);
        blocks.push((next..next + vars).collect::<Vec<usize>>());
        next += vars;
    }
    let rhs_density = if parts.is_empty() {
        LaurentDensity::constant(0, ambient)
    } else {
        product_density(&parts, &blocks, ambient, budget)?
    };

    match first_difference(&lhs_density, &rhs_density) {
        None => Ok(VerifyOutcome::Equal),
        Some(w) => Ok(VerifyOutcome::Differs(w)),
    }
}

/// E|Tr M^k|^2 for the density of a unitary block: the double sum of unit
/// exponent-difference moments.
pub fn trace_power_second_moment(d: &LaurentDensity, k: i64) -> Rat {
    let n = d.vars;
    let mut total = rat_int(0);
    for i in 0..n {
        for j in 0..n {
            let mut mu = vec![0i64; n];
            mu[i] += k;
            mu[j] -= k;
            total += moment(d, &ExponentVector::integral(mu));
        }
    }
    total
}
