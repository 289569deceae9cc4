//! Root systems with exact rational realizations, lattices, and group forms.
//!
//! A `RootDatum` carries a concrete realization of a finite crystallographic
//! root system: simple roots as rational vectors, the positive-root closure,
//! Cartan data, fundamental weights, and the standard lattices. A `GroupSpec`
//! pairs a datum with the character lattice of a compact-group form and an
//! optional cyclic twist.

use crate::rat::*;
use num::bigint::BigInt;
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootSysError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("invalid rank {rank} for family {family}")]
    InvalidRank { family: String, rank: usize },
    #[error("lattice error: {0}")]
    Lattice(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum FamilyKind {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct SimpleFactor {
    pub kind: FamilyKind,
    pub rank: usize,
}

impl fmt::Display for SimpleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.kind, self.rank)
    }
}

/// Number of positive roots for an irreducible factor.
fn positive_count(f: SimpleFactor) -> usize {
    match (f.kind, f.rank) {
        (FamilyKind::A, n) => n * (n + 1) / 2,
        (FamilyKind::B, n) | (FamilyKind::C, n) => n * n,
        (FamilyKind::D, n) => n * (n - 1),
        (FamilyKind::E, 6) => 36,
        (FamilyKind::E, 7) => 63,
        (FamilyKind::E, 8) => 120,
        (FamilyKind::F, 4) => 24,
        (FamilyKind::G, 2) => 6,
        _ => panic!("no positive-root count for {f}"),
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Order of the reflection group of an irreducible factor.
fn weyl_order_of(f: SimpleFactor) -> BigInt {
    match (f.kind, f.rank) {
        (FamilyKind::A, n) => factorial(n + 1),
        (FamilyKind::B, n) | (FamilyKind::C, n) => factorial(n) << n,
        (FamilyKind::D, n) => factorial(n) << (n - 1),
        (FamilyKind::E, 6) => BigInt::from(51_840),
        (FamilyKind::E, 7) => BigInt::from(2_903_040),
        (FamilyKind::E, 8) => BigInt::from(696_729_600),
        (FamilyKind::F, 4) => BigInt::from(1152),
        (FamilyKind::G, 2) => BigInt::from(12),
        _ => panic!("no Weyl order for {f}"),
    }
}

/// Collapse coincidences among low-rank labels so classification is unique.
fn canonical_factor(f: SimpleFactor) -> SimpleFactor {
    match (f.kind, f.rank) {
        (FamilyKind::B, 1) | (FamilyKind::C, 1) => SimpleFactor { kind: FamilyKind::A, rank: 1 },
        (FamilyKind::C, 2) => SimpleFactor { kind: FamilyKind::B, rank: 2 },
        _ => f,
    }
}

/// `2<x, r> / <r, r>`.
pub fn pairing(x: &[Rat], root: &[Rat]) -> Rat {
    let sq = dot(root, root);
    assert!(!sq.is_zero(), "pairing against the zero vector");
    rat_int(2) * dot(x, root) / sq
}

pub fn reflect_in_root(x: &[Rat], root: &[Rat]) -> RatVec {
    let c = pairing(x, root);
    vec_sub(x, &vec_scale(root, &c))
}

/// A finitely generated subgroup of rational vectors in a fixed ambient space.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub ambient_dim: usize,
    /// Linearly independent generators.
    pub basis: Vec<RatVec>,
    /// Least common denominator of all basis entries.
    pub denominator: BigInt,
}

impl Lattice {
    pub fn from_basis(ambient_dim: usize, basis: Vec<RatVec>) -> Lattice {
        for b in &basis {
            assert_eq!(b.len(), ambient_dim, "basis vector dimension mismatch");
        }
        if !basis.is_empty() {
            let (mat, _) = clear_denominators(&basis);
            let rank = smith_normal_form(&mat).invariant_factors().len();
            assert_eq!(rank, basis.len(), "dependent basis passed to from_basis");
        }
        let mut den = BigInt::one();
        for b in &basis {
            for x in b {
                den = num::integer::lcm(den.clone(), x.denom().clone());
            }
        }
        Lattice { ambient_dim, basis, denominator: den }
    }

    /// Lattice generated by an arbitrary (possibly dependent) list of vectors.
    pub fn from_generators(ambient_dim: usize, gens: &[RatVec]) -> Lattice {
        let gens: Vec<RatVec> = gens.iter().filter(|g| !is_zero_vec(g)).cloned().collect();
        if gens.is_empty() {
            return Lattice::from_basis(ambient_dim, Vec::new());
        }
        let (mat, den) = clear_denominators(&gens);
        let snf = smith_normal_form(&mat);
        let u_rat: Vec<RatVec> = snf
            .u
            .iter()
            .map(|row| row.iter().map(|x| Ratio::from_integer(x.clone())).collect())
            .collect();
        let u_inv = invert_rat_mat(&u_rat);
        let den_rat = Ratio::from_integer(den);
        let mut basis = Vec::new();
        for (j, dj) in (0..mat.len().min(mat[0].len())).map(|j| (j, snf.d[j][j].clone())) {
            if dj.is_zero() {
                continue;
            }
            let col: RatVec = (0..ambient_dim)
                .map(|i| &u_inv[i][j] * Ratio::from_integer(dj.clone()) / &den_rat)
                .collect();
            basis.push(col);
        }
        Lattice::from_basis(ambient_dim, basis)
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        match solve_in_basis(&self.basis, v) {
            None => false,
            Some(coords) => coords.iter().all(|c| c.denom().is_one()),
        }
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn same_lattice(&self, other: &Lattice) -> bool {
        self.contains_lattice(other) && other.contains_lattice(self)
    }

    pub fn scale(&self, c: &Rat) -> Lattice {
        assert!(!c.is_zero());
        Lattice::from_basis(
            self.ambient_dim,
            self.basis.iter().map(|b| vec_scale(b, c)).collect(),
        )
    }
}

impl serde::Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Lattice", 3)?;
        st.serialize_field("ambient_dim", &self.ambient_dim)?;
        let basis: Vec<Vec<String>> = self
            .basis
            .iter()
            .map(|b| b.iter().map(rat_to_string).collect())
            .collect();
        st.serialize_field("basis", &basis)?;
        st.serialize_field("denominator", &self.denominator.to_string())?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Lattice, D::Error> {
        use serde::de::Error as DeError;
        #[derive(serde::Deserialize)]
        struct Repr {
            ambient_dim: usize,
            basis: Vec<Vec<String>>,
            #[serde(default)]
            denominator: Option<String>,
        }
        let repr = Repr::deserialize(d)?;
        let mut basis = Vec::new();
        for row in &repr.basis {
            if row.len() != repr.ambient_dim {
                return Err(D::Error::custom("basis vector length != ambient_dim"));
            }
            let v: Result<RatVec, String> = row.iter().map(|s| rat_from_str(s)).collect();
            basis.push(v.map_err(D::Error::custom)?);
        }
        if !basis.is_empty() {
            let (mat, _) = clear_denominators(&basis);
            let rank = smith_normal_form(&mat).invariant_factors().len();
            if rank != basis.len() {
                return Err(D::Error::custom("dependent lattice basis"));
            }
        }
        let lat = Lattice::from_basis(repr.ambient_dim, basis);
        if let Some(den) = repr.denominator {
            if den != lat.denominator.to_string() {
                return Err(D::Error::custom(format!(
                    "denominator field {} does not match basis denominator {}",
                    den, lat.denominator
                )));
            }
        }
        Ok(lat)
    }
}

/// Dual lattice inside the real span of `lat`: all span vectors pairing
/// integrally with every generator.
pub fn dual_lattice_in_span(lat: &Lattice) -> Lattice {
    let k = lat.rank();
    if k == 0 {
        return Lattice::from_basis(lat.ambient_dim, Vec::new());
    }
    let gram: Vec<RatVec> = (0..k)
        .map(|i| (0..k).map(|j| dot(&lat.basis[i], &lat.basis[j])).collect())
        .collect();
    let ginv = invert_rat_mat(&gram);
    let basis: Vec<RatVec> = (0..k)
        .map(|j| {
            let mut v = zeros(lat.ambient_dim);
            for i in 0..k {
                v = vec_add(&v, &vec_scale(&lat.basis[i], &ginv[i][j]));
            }
            v
        })
        .collect();
    Lattice::from_basis(lat.ambient_dim, basis)
}

/// Sublattice of `lat` lying in the real span of `span`.
pub fn intersect_with_span(lat: &Lattice, span: &[RatVec]) -> Lattice {
    let k = lat.rank();
    if k == 0 {
        return lat.clone();
    }
    // Projection residue of each basis vector off the span; integer kernel of
    // the residue matrix gives the coefficient lattice of members in the span.
    let residues: Vec<RatVec> = lat
        .basis
        .iter()
        .map(|b| vec_sub(b, &project_onto_span(span, b)))
        .collect();
    let cols: Vec<RatVec> = residues;
    let (mat, _) = clear_denominators(&cols);
    let kernel = integer_kernel(&mat);
    let gens: Vec<RatVec> = kernel
        .iter()
        .map(|coef| {
            let mut v = zeros(lat.ambient_dim);
            for (i, c) in coef.iter().enumerate() {
                v = vec_add(&v, &vec_scale(&lat.basis[i], &Ratio::from_integer(c.clone())));
            }
            v
        })
        .collect();
    Lattice::from_generators(lat.ambient_dim, &gens)
}

/// Orthogonal projection of `v` onto the span of the given vectors.
pub fn project_onto_span(span: &[RatVec], v: &[Rat]) -> RatVec {
    if span.is_empty() {
        return zeros(v.len());
    }
    // Gram solve: projection = S c with (S^T S) c = S^T v.
    let k = span.len();
    let gram: Vec<RatVec> = (0..k)
        .map(|j| (0..k).map(|i| dot(&span[i], &span[j])).collect())
        .collect();
    let rhs: RatVec = (0..k).map(|i| dot(&span[i], v)).collect();
    let coef = solve_in_basis(&gram, &rhs).expect("gram system is square and invertible");
    let mut out = zeros(v.len());
    for (i, c) in coef.iter().enumerate() {
        out = vec_add(&out, &vec_scale(&span[i], c));
    }
    out
}

/// Root datum with a concrete rational realization.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RootDatum {
    /// Irreducible factors; empty for a torus.
    pub family: Vec<SimpleFactor>,
    pub rank: usize,
    pub dim: usize,
    #[serde(with = "serde_ratvecs")]
    pub simple_roots: Vec<RatVec>,
    /// `cartan_matrix[i][j] = 2<a_i, a_j> / <a_j, a_j>`.
    pub cartan_matrix: Vec<Vec<i64>>,
    #[serde(with = "serde_ratvecs")]
    pub positive_roots: Vec<RatVec>,
    /// Half the sum of the positive roots.
    #[serde(with = "serde_ratvec")]
    pub weyl_vector: RatVec,
    /// Highest root of the first factor.
    #[serde(with = "serde_ratvec")]
    pub highest_root: RatVec,
    /// Highest short root of the first factor.
    #[serde(with = "serde_ratvec")]
    pub highest_short_root: RatVec,
    #[serde(with = "serde_ratvecs")]
    pub fundamental_weights: Vec<RatVec>,
    /// Largest Coxeter number over the factors; 1 for a torus.
    pub coxeter_number: u64,
    #[serde(with = "serde_bigint")]
    pub weyl_order: BigInt,
    /// Simple-root index sets of the factors.
    pub components: Vec<Vec<usize>>,
    /// Lattice generated by the roots.
    pub root_lattice: Lattice,
    /// Vectors in the root span pairing integrally with every coroot.
    pub weight_lattice: Lattice,
    /// Translation lattice of the affine reflection group acting on alcoves.
    /// Equals `root_lattice` except for folded realizations.
    pub affine_lattice: Lattice,
}

impl RootDatum {
    pub fn torus(dim: usize) -> RootDatum {
        from_simple_system(dim, Vec::new(), None)
    }

    pub fn family_label(&self) -> String {
        if self.family.is_empty() {
            return "torus".into();
        }
        self.family
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn is_irreducible(&self) -> bool {
        self.family.len() == 1
    }

    /// Pairing of `x` against the coroot of `root`.
    pub fn coroot_pairing(&self, x: &[Rat], root: &[Rat]) -> Rat {
        pairing(x, root)
    }
}

/// Standard simple-root realization of an irreducible family.
fn standard_simple_roots(f: SimpleFactor) -> Option<(usize, Vec<RatVec>)> {
    let e = |dim: usize, i: usize| -> RatVec {
        let mut v = zeros(dim);
        v[i] = rat_int(1);
        v
    };
    let diff = |dim: usize, i: usize, j: usize| -> RatVec {
        let mut v = zeros(dim);
        v[i] = rat_int(1);
        v[j] = rat_int(-1);
        v
    };
    match (f.kind, f.rank) {
        (FamilyKind::A, n) if n >= 1 => {
            Some((n + 1, (0..n).map(|i| diff(n + 1, i, i + 1)).collect()))
        }
        (FamilyKind::B, n) if n >= 1 => {
            let mut s: Vec<RatVec> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            s.push(e(n, n - 1));
            Some((n, s))
        }
        (FamilyKind::C, n) if n >= 1 => {
            let mut s: Vec<RatVec> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            let mut last = zeros(n);
            last[n - 1] = rat_int(2);
            s.push(last);
            Some((n, s))
        }
        (FamilyKind::D, n) if n >= 3 => {
            let mut s: Vec<RatVec> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            let mut last = zeros(n);
            last[n - 2] = rat_int(1);
            last[n - 1] = rat_int(1);
            s.push(last);
            Some((n, s))
        }
        (FamilyKind::G, 2) => Some((
            3,
            vec![
                vec![rat_int(1), rat_int(-1), rat_int(0)],
                vec![rat_int(-2), rat_int(1), rat_int(1)],
            ],
        )),
        (FamilyKind::F, 4) => Some((
            4,
            vec![
                vec![rat_int(0), rat_int(1), rat_int(-1), rat_int(0)],
                vec![rat_int(0), rat_int(0), rat_int(1), rat_int(-1)],
                vec![rat_int(0), rat_int(0), rat_int(0), rat_int(1)],
                vec![rat(1, 2), rat(-1, 2), rat(-1, 2), rat(-1, 2)],
            ],
        )),
        (FamilyKind::E, n) if (6..=8).contains(&n) => {
            let mut a1 = vec![rat(-1, 2); 8];
            a1[0] = rat(1, 2);
            a1[7] = rat(1, 2);
            let mut s: Vec<RatVec> = vec![a1];
            let mut a2 = zeros(8);
            a2[0] = rat_int(1);
            a2[1] = rat_int(1);
            s.push(a2);
            for i in 0..6 {
                let mut v = zeros(8);
                v[i] = rat_int(-1);
                v[i + 1] = rat_int(1);
                s.push(v);
            }
            s.truncate(n);
            Some((8, s))
        }
        _ => None,
    }
}

/// Orbit of the simple roots under the reflections they generate.
fn reflection_closure(simple: &[RatVec]) -> Vec<RatVec> {
    let mut roots: Vec<RatVec> = simple.to_vec();
    let mut i = 0;
    while i < roots.len() {
        for s in simple {
            let img = reflect_in_root(&roots[i], s);
            if !roots.contains(&img) {
                roots.push(img);
            }
        }
        i += 1;
    }
    roots
}

/// Classify one irreducible simple system by Cartan pattern and root lengths.
fn classify_component(simple: &[RatVec]) -> SimpleFactor {
    let r = simple.len();
    assert!(r >= 1);
    if r == 1 {
        return SimpleFactor { kind: FamilyKind::A, rank: 1 };
    }
    let bond = |i: usize, j: usize| -> i64 {
        let a = pairing(&simple[i], &simple[j]);
        let b = pairing(&simple[j], &simple[i]);
        let p = a * b;
        assert!(p.denom().is_one(), "non-crystallographic pair");
        p.numer().to_i64().unwrap()
    };
    let mut max_bond = 0;
    let mut adj = vec![vec![false; r]; r];
    for i in 0..r {
        for j in (i + 1)..r {
            let b = bond(i, j);
            assert!(b <= 3, "bond multiplicity {b} is not finite type");
            if b > 0 {
                adj[i][j] = true;
                adj[j][i] = true;
            }
            max_bond = max_bond.max(b);
        }
    }
    if max_bond == 3 {
        assert_eq!(r, 2, "triple bond only occurs at rank 2");
        return SimpleFactor { kind: FamilyKind::G, rank: 2 };
    }
    if max_bond == 2 {
        let lengths: Vec<Rat> = simple.iter().map(|s| dot(s, s)).collect();
        let min_len = lengths.iter().min().unwrap().clone();
        let max_len = lengths.iter().max().unwrap().clone();
        let shorts = lengths.iter().filter(|l| **l == min_len).count();
        let longs = lengths.iter().filter(|l| **l == max_len).count();
        if r == 2 {
            return SimpleFactor { kind: FamilyKind::B, rank: 2 };
        }
        if r == 4 && shorts == 2 && longs == 2 {
            return SimpleFactor { kind: FamilyKind::F, rank: 4 };
        }
        if shorts == 1 {
            return SimpleFactor { kind: FamilyKind::B, rank: r };
        }
        assert_eq!(longs, 1, "unrecognized doubly laced diagram");
        return SimpleFactor { kind: FamilyKind::C, rank: r };
    }
    // Simply laced: look at the branch node if there is one.
    let degrees: Vec<usize> = (0..r).map(|i| (0..r).filter(|&j| adj[i][j]).count()).collect();
    let branch = (0..r).filter(|&i| degrees[i] >= 3).collect::<Vec<_>>();
    match branch.len() {
        0 => SimpleFactor { kind: FamilyKind::A, rank: r },
        1 => {
            let b = branch[0];
            assert_eq!(degrees[b], 3, "degree > 3 is not finite type");
            let mut arms: Vec<usize> = Vec::new();
            for start in (0..r).filter(|&j| adj[b][j]) {
                let mut len = 1;
                let mut prev = b;
                let mut cur = start;
                loop {
                    let next: Vec<usize> =
                        (0..r).filter(|&j| adj[cur][j] && j != prev).collect();
                    match next.len() {
                        0 => break,
                        1 => {
                            prev = cur;
                            cur = next[0];
                            len += 1;
                        }
                        _ => panic!("multiple branch nodes are not finite type"),
                    }
                }
                arms.push(len);
            }
            arms.sort_unstable();
            match arms.as_slice() {
                [1, 1, _] => SimpleFactor { kind: FamilyKind::D, rank: r },
                [1, 2, 2] => SimpleFactor { kind: FamilyKind::E, rank: 6 },
                [1, 2, 3] => SimpleFactor { kind: FamilyKind::E, rank: 7 },
                [1, 2, 4] => SimpleFactor { kind: FamilyKind::E, rank: 8 },
                _ => panic!("branch arms {arms:?} are not finite type"),
            }
        }
        _ => panic!("multiple branch nodes are not finite type"),
    }
}

/// Build the full datum from a simple system in a fixed ambient space.
/// The system may be reducible; factors are found by pairing adjacency.
/// With `hint` given, the classified factors must match it as a multiset.
pub fn from_simple_system(
    dim: usize,
    simple_roots: Vec<RatVec>,
    hint: Option<Vec<SimpleFactor>>,
) -> RootDatum {
    let rank = simple_roots.len();
    for s in &simple_roots {
        assert_eq!(s.len(), dim, "simple root dimension mismatch");
    }
    // Components by adjacency of nonzero pairings.
    let mut comp_id = vec![usize::MAX; rank];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for i in 0..rank {
        if comp_id[i] != usize::MAX {
            continue;
        }
        let cid = components.len();
        let mut stack = vec![i];
        let mut comp = Vec::new();
        comp_id[i] = cid;
        while let Some(x) = stack.pop() {
            comp.push(x);
            for j in 0..rank {
                if comp_id[j] == usize::MAX && !dot(&simple_roots[x], &simple_roots[j]).is_zero() {
                    comp_id[j] = cid;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }

    let family: Vec<SimpleFactor> = components
        .iter()
        .map(|comp| {
            let sub: Vec<RatVec> = comp.iter().map(|&i| simple_roots[i].clone()).collect();
            canonical_factor(classify_component(&sub))
        })
        .collect();
    if let Some(h) = hint {
        let mut a: Vec<SimpleFactor> = family.iter().map(|&f| canonical_factor(f)).collect();
        let mut b: Vec<SimpleFactor> = h.iter().map(|&f| canonical_factor(f)).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b, "classified factors disagree with the requested family");
    }

    let cartan_matrix: Vec<Vec<i64>> = (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| {
                    let p = pairing(&simple_roots[i], &simple_roots[j]);
                    assert!(p.denom().is_one(), "non-integral Cartan entry");
                    p.numer().to_i64().unwrap()
                })
                .collect()
        })
        .collect();

    let all_roots = reflection_closure(&simple_roots);
    let mut positive_roots = Vec::new();
    let mut heights: Vec<Rat> = Vec::new();
    let mut coords_of: Vec<RatVec> = Vec::new();
    for r in &all_roots {
        let coords = solve_in_basis(&simple_roots, r).expect("root outside simple span");
        let pos = coords.iter().all(|c| !c.is_negative());
        let neg = coords.iter().all(|c| !c.is_positive());
        assert!(pos || neg, "root with mixed-sign coordinates");
        if pos {
            heights.push(coords.iter().fold(Rat::zero(), |a, c| a + c));
            coords_of.push(coords);
            positive_roots.push(r.clone());
        }
    }

    // Per-factor highest roots, Coxeter numbers, and count checks.
    let mut coxeter_number = 1u64;
    let mut highest: Vec<RatVec> = Vec::new();
    let mut highest_short: Vec<RatVec> = Vec::new();
    for (cid, comp) in components.iter().enumerate() {
        let in_comp: Vec<usize> = (0..positive_roots.len())
            .filter(|&k| comp.iter().any(|&i| !coords_of[k][i].is_zero()))
            .collect();
        assert_eq!(
            in_comp.len(),
            positive_count(family[cid]),
            "positive-root count mismatch for {}",
            family[cid]
        );
        let th = in_comp
            .iter()
            .max_by(|&&a, &&b| heights[a].cmp(&heights[b]))
            .copied()
            .unwrap();
        let ht = heights[th].clone();
        assert!(ht.denom().is_one());
        let h = ht.numer().to_u64().unwrap() + 1;
        assert_eq!(
            2 * in_comp.len() as u64,
            comp.len() as u64 * h,
            "Coxeter count identity failed"
        );
        coxeter_number = coxeter_number.max(h);
        highest.push(positive_roots[th].clone());
        let min_len = in_comp
            .iter()
            .map(|&k| dot(&positive_roots[k], &positive_roots[k]))
            .min()
            .unwrap();
        let ths = in_comp
            .iter()
            .filter(|&&k| dot(&positive_roots[k], &positive_roots[k]) == min_len)
            .max_by(|&&a, &&b| heights[a].cmp(&heights[b]))
            .copied()
            .unwrap();
        highest_short.push(positive_roots[ths].clone());
    }

    // Fundamental weights: coordinates c with sum_k c_k C[k][j] = delta_ij.
    let cartan_rows: Vec<RatVec> = (0..rank)
        .map(|i| (0..rank).map(|j| rat_int(cartan_matrix[i][j])).collect())
        .collect();
    let fundamental_weights: Vec<RatVec> = (0..rank)
        .map(|i| {
            let mut target = zeros(rank);
            target[i] = rat_int(1);
            let coef = solve_in_basis(&cartan_rows, &target).expect("Cartan matrix invertible");
            let mut w = zeros(dim);
            for (k, c) in coef.iter().enumerate() {
                w = vec_add(&w, &vec_scale(&simple_roots[k], c));
            }
            w
        })
        .collect();

    let mut weyl_vector = zeros(dim);
    for r in &positive_roots {
        weyl_vector = vec_add(&weyl_vector, r);
    }
    weyl_vector = vec_scale(&weyl_vector, &rat(1, 2));
    for s in &simple_roots {
        assert!(pairing(&weyl_vector, s).is_one(), "Weyl vector pairing != 1");
    }
    let fw_sum = fundamental_weights
        .iter()
        .fold(zeros(dim), |acc, w| vec_add(&acc, w));
    assert_eq!(fw_sum, weyl_vector);

    let weyl_order = family
        .iter()
        .fold(BigInt::one(), |acc, &f| acc * weyl_order_of(f));

    let root_lattice = Lattice::from_basis(dim, simple_roots.clone());
    let weight_lattice = Lattice::from_basis(dim, fundamental_weights.clone());
    let affine_lattice = root_lattice.clone();
    let (highest_root, highest_short_root) = if components.is_empty() {
        (zeros(dim), zeros(dim))
    } else {
        (highest[0].clone(), highest_short[0].clone())
    };

    RootDatum {
        family,
        rank,
        dim,
        simple_roots,
        cartan_matrix,
        positive_roots,
        weyl_vector,
        highest_root,
        highest_short_root,
        fundamental_weights,
        coxeter_number,
        weyl_order,
        components,
        root_lattice,
        weight_lattice,
        affine_lattice,
    }
}

fn parse_family(family: &str, rank: usize) -> Result<SimpleFactor, RootSysError> {
    let fam = family.trim();
    let mk = |kind, fixed: usize| -> Result<SimpleFactor, RootSysError> {
        if rank == 0 || rank == fixed {
            Ok(SimpleFactor { kind, rank: fixed })
        } else {
            Err(RootSysError::InvalidRank { family: fam.into(), rank })
        }
    };
    match fam.to_ascii_uppercase().as_str() {
        "E6" => return mk(FamilyKind::E, 6),
        "E7" => return mk(FamilyKind::E, 7),
        "E8" => return mk(FamilyKind::E, 8),
        "F4" => return mk(FamilyKind::F, 4),
        "G2" => return mk(FamilyKind::G, 2),
        _ => {}
    }
    let kind = match fam.to_ascii_uppercase().as_str() {
        "A" => FamilyKind::A,
        "B" => FamilyKind::B,
        "C" => FamilyKind::C,
        "D" => FamilyKind::D,
        "E" => FamilyKind::E,
        "F" => FamilyKind::F,
        "G" => FamilyKind::G,
        _ => return Err(RootSysError::UnknownFamily(fam.into())),
    };
    let f = SimpleFactor { kind, rank };
    let valid = match kind {
        FamilyKind::A | FamilyKind::B | FamilyKind::C => rank >= 1,
        FamilyKind::D => rank >= 3,
        FamilyKind::E => (6..=8).contains(&rank),
        FamilyKind::F => rank == 4,
        FamilyKind::G => rank == 2,
    };
    if !valid {
        return Err(RootSysError::InvalidRank { family: fam.into(), rank });
    }
    Ok(f)
}

/// Standard realization of an irreducible root datum.
pub fn build_root_datum(family: &str, rank: usize) -> Result<RootDatum, RootSysError> {
    let f = parse_family(family, rank)?;
    let (dim, simple) = standard_simple_roots(f).ok_or(RootSysError::InvalidRank {
        family: family.into(),
        rank: f.rank,
    })?;
    Ok(from_simple_system(dim, simple, Some(vec![canonical_factor(f)])))
}

/// Orthogonal direct sum embedded in the concatenated ambient space.
pub fn direct_sum(parts: &[&RootDatum]) -> RootDatum {
    let dim: usize = parts.iter().map(|p| p.dim).sum();
    let mut simple = Vec::new();
    let mut family = Vec::new();
    let mut offset = 0usize;
    for p in parts {
        for s in &p.simple_roots {
            let mut v = zeros(dim);
            v[offset..offset + p.dim].clone_from_slice(s);
            simple.push(v);
        }
        family.extend(p.family.iter().copied());
        offset += p.dim;
    }
    let mut rd = from_simple_system(dim, simple, Some(family));
    // Carry over non-default translation lattices blockwise.
    let mut affine_gens = Vec::new();
    let mut offset = 0usize;
    for p in parts {
        for b in &p.affine_lattice.basis {
            let mut v = zeros(dim);
            v[offset..offset + p.dim].clone_from_slice(b);
            affine_gens.push(v);
        }
        offset += p.dim;
    }
    rd.affine_lattice = Lattice::from_generators(dim, &affine_gens);
    rd
}

/// True when the lattice contains every root and pairs integrally with every coroot.
pub fn is_subweight_lattice(lat: &Lattice, rd: &RootDatum) -> bool {
    if lat.ambient_dim != rd.dim {
        return false;
    }
    for r in &rd.positive_roots {
        if !lat.contains(r) {
            return false;
        }
    }
    for b in &lat.basis {
        for r in &rd.positive_roots {
            if !pairing(b, r).denom().is_one() {
                return false;
            }
        }
    }
    true
}

/// Finite abelian quotient of two commensurable lattices with equal span.
#[derive(Debug, Clone)]
pub struct QuotientGroup {
    pub order: BigInt,
    /// Cyclic factor orders > 1 in a divisibility chain.
    pub cyclic_orders: Vec<BigInt>,
    /// Coset representatives; index 0 is the identity.
    pub reps: Vec<RatVec>,
    /// Addition table on representative indices.
    pub table: Vec<Vec<usize>>,
}

pub fn quotient_group(sup: &Lattice, sub: &Lattice) -> Result<QuotientGroup, RootSysError> {
    if sup.ambient_dim != sub.ambient_dim {
        return Err(RootSysError::Lattice("ambient dimension mismatch".into()));
    }
    if sup.rank() != sub.rank() {
        return Err(RootSysError::Lattice("infinite quotient: ranks differ".into()));
    }
    let k = sup.rank();
    if k == 0 {
        return Ok(QuotientGroup {
            order: BigInt::one(),
            cyclic_orders: Vec::new(),
            reps: vec![zeros(sup.ambient_dim)],
            table: vec![vec![0]],
        });
    }
    // Integer coordinate matrix of sub's basis in sup's basis.
    let mut m: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); k]; k];
    for (j, b) in sub.basis.iter().enumerate() {
        let coords = solve_in_basis(&sup.basis, b)
            .ok_or_else(|| RootSysError::Lattice("sublattice outside span".into()))?;
        for (i, c) in coords.iter().enumerate() {
            if !c.denom().is_one() {
                return Err(RootSysError::Lattice("not a sublattice".into()));
            }
            m[i][j] = c.numer().clone();
        }
    }
    let snf = smith_normal_form(&m);
    let u_rat: Vec<RatVec> = snf
        .u
        .iter()
        .map(|row| row.iter().map(|x| Ratio::from_integer(x.clone())).collect())
        .collect();
    let u_inv = invert_rat_mat(&u_rat);
    // Adapted basis of sup: columns of S * U^{-1}.
    let adapted: Vec<RatVec> = (0..k)
        .map(|j| {
            let mut v = zeros(sup.ambient_dim);
            for i in 0..k {
                assert!(u_inv[i][j].denom().is_one(), "unimodular inverse not integral");
                v = vec_add(&v, &vec_scale(&sup.basis[i], &u_inv[i][j]));
            }
            v
        })
        .collect();
    let dia: Vec<BigInt> = (0..k).map(|i| snf.d[i][i].abs()).collect();
    let order = dia.iter().fold(BigInt::one(), |a, d| a * d);
    let order_usize = order
        .to_usize()
        .ok_or_else(|| RootSysError::Lattice("quotient too large to enumerate".into()))?;
    if order_usize > 1_000_000 {
        return Err(RootSysError::Lattice("quotient too large to enumerate".into()));
    }
    let cyclic_orders: Vec<BigInt> = dia.iter().filter(|d| **d > BigInt::one()).cloned().collect();
    let radix: Vec<usize> = dia.iter().map(|d| d.to_usize().unwrap()).collect();
    // Mixed-radix enumeration of representatives.
    let mut tuples: Vec<Vec<usize>> = vec![vec![0; k]];
    for (i, &r) in radix.iter().enumerate() {
        let mut next = Vec::with_capacity(tuples.len() * r);
        for t in &tuples {
            for a in 0..r {
                let mut t2 = t.clone();
                t2[i] = a;
                next.push(t2);
            }
        }
        tuples = next;
    }
    let index_of = |t: &[usize]| -> usize {
        let mut idx = 0usize;
        for i in 0..k {
            idx = idx * radix[i] + t[i];
        }
        idx
    };
    tuples.sort_by_key(|t| index_of(t));
    let reps: Vec<RatVec> = tuples
        .iter()
        .map(|t| {
            let mut v = zeros(sup.ambient_dim);
            for i in 0..k {
                v = vec_add(&v, &vec_scale(&adapted[i], &rat_int(t[i] as i64)));
            }
            v
        })
        .collect();
    let table: Vec<Vec<usize>> = tuples
        .iter()
        .map(|a| {
            tuples
                .iter()
                .map(|b| {
                    let sum: Vec<usize> = (0..k).map(|i| (a[i] + b[i]) % radix[i]).collect();
                    index_of(&sum)
                })
                .collect()
        })
        .collect();
    Ok(QuotientGroup { order, cyclic_orders, reps, table })
}

/// Cyclic twist classes for ensembles built from an outer symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TwistClass {
    /// Order-2 twist of A_{2m-1}; effective reflection group B_m.
    A2Odd { m: usize },
    /// Order-2 twist of A_{2m}; effective reflection group C_m.
    A2Even { m: usize },
    /// Order-2 twist of D_m; effective reflection group C_{m-1}.
    D2 { m: usize },
    /// Order-2 fold of E6 onto F4.
    E6Fold,
    /// Order-3 fold of D4 onto G2.
    D4Fold,
    /// Cyclic block permutation of identical unitary factors.
    CycleU { m: usize },
}

impl TwistClass {
    /// Extra factor multiplying the cycle length in the threshold gcd.
    pub fn threshold_multiplier(&self) -> u64 {
        match self {
            TwistClass::A2Odd { .. } | TwistClass::A2Even { .. } | TwistClass::E6Fold => 2,
            TwistClass::D4Fold => 3,
            TwistClass::D2 { .. } | TwistClass::CycleU { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Twist {
    pub class: TwistClass,
    /// Cycle length of the outer permutation.
    pub cycle: u64,
}

/// A compact-group form: root datum plus the character lattice of a maximal
/// torus, with an optional outer twist.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GroupSpec {
    pub label: String,
    pub root_datum: RootDatum,
    pub lattice: Lattice,
    pub twist: Option<Twist>,
}

pub fn adjoint_spec(family: &str, rank: usize) -> Result<GroupSpec, RootSysError> {
    let rd = build_root_datum(family, rank)?;
    let lattice = rd.root_lattice.clone();
    let label = format!("{} adjoint", rd.family_label());
    Ok(GroupSpec { label, root_datum: rd, lattice, twist: None })
}

pub fn simply_connected_spec(family: &str, rank: usize) -> Result<GroupSpec, RootSysError> {
    let rd = build_root_datum(family, rank)?;
    let lattice = rd.weight_lattice.clone();
    let label = format!("{} simply connected", rd.family_label());
    Ok(GroupSpec { label, root_datum: rd, lattice, twist: None })
}

/// U(n): permutation-plus-translation symmetry of n eigenvalue angles.
pub fn unitary_spec(n: usize) -> GroupSpec {
    assert!(n >= 1);
    let rd = if n == 1 {
        RootDatum::torus(1)
    } else {
        build_root_datum("A", n - 1).unwrap()
    };
    let basis: Vec<RatVec> = (0..n)
        .map(|i| {
            let mut v = zeros(n);
            v[i] = rat_int(1);
            v
        })
        .collect();
    let lattice = Lattice::from_basis(n, basis);
    GroupSpec {
        label: format!("U({n})"),
        root_datum: rd,
        lattice,
        twist: None,
    }
}

pub fn special_unitary_spec(n: usize) -> GroupSpec {
    assert!(n >= 2);
    let rd = build_root_datum("A", n - 1).unwrap();
    let lattice = rd.weight_lattice.clone();
    GroupSpec {
        label: format!("SU({n})"),
        root_datum: rd,
        lattice,
        twist: None,
    }
}

fn std_basis_lattice(dim: usize, scale: Rat) -> Lattice {
    let basis: Vec<RatVec> = (0..dim)
        .map(|i| {
            let mut v = zeros(dim);
            v[i] = scale.clone();
            v
        })
        .collect();
    Lattice::from_basis(dim, basis)
}

/// Effective data of a twisted ensemble: the folded reflection group, its
/// realization at the scale where the listed character lattice lives, and the
/// translation lattice of the folded affine group.
pub fn twisted_spec(
    class: TwistClass,
    cycle: u64,
    simply_connected_form: bool,
) -> Result<GroupSpec, RootSysError> {
    assert!(cycle >= 1);
    match class {
        TwistClass::A2Odd { m } => {
            if m < 2 {
                return Err(RootSysError::InvalidRank { family: "twisted a2_odd".into(), rank: m });
            }
            // Half-scale B_m realization.
            let mut simple: Vec<RatVec> = (0..m - 1)
                .map(|i| {
                    let mut v = zeros(m);
                    v[i] = rat(1, 2);
                    v[i + 1] = rat(-1, 2);
                    v
                })
                .collect();
            let mut last = zeros(m);
            last[m - 1] = rat(1, 2);
            simple.push(last);
            let rd = from_simple_system(m, simple, Some(vec![SimpleFactor { kind: FamilyKind::B, rank: m }]));
            let lattice = if simply_connected_form {
                std_basis_lattice(m, rat(1, 2))
            } else {
                // Half-scale D_m: even-coordinate-sum vectors.
                let mut basis: Vec<RatVec> = (0..m - 1)
                    .map(|i| {
                        let mut v = zeros(m);
                        v[i] = rat(1, 2);
                        v[i + 1] = rat(-1, 2);
                        v
                    })
                    .collect();
                let mut last = zeros(m);
                last[m - 2] = rat(1, 2);
                last[m - 1] = rat(1, 2);
                basis.push(last);
                Lattice::from_basis(m, basis)
            };
            Ok(GroupSpec {
                label: format!("twisted a2_odd m={m} n={cycle}"),
                root_datum: rd,
                lattice,
                twist: Some(Twist { class, cycle }),
            })
        }
        TwistClass::A2Even { m } => {
            if m < 1 {
                return Err(RootSysError::InvalidRank { family: "twisted a2_even".into(), rank: m });
            }
            // Half-scale C_m realization.
            let mut simple: Vec<RatVec> = (0..m.saturating_sub(1))
                .map(|i| {
                    let mut v = zeros(m);
                    v[i] = rat(1, 2);
                    v[i + 1] = rat(-1, 2);
                    v
                })
                .collect();
            let mut last = zeros(m);
            last[m - 1] = rat_int(1);
            simple.push(last);
            let hint = if m == 1 {
                vec![SimpleFactor { kind: FamilyKind::A, rank: 1 }]
            } else {
                vec![SimpleFactor { kind: FamilyKind::C, rank: m }]
            };
            let rd = from_simple_system(m, simple, Some(hint));
            let lattice = std_basis_lattice(m, rat(1, 2));
            Ok(GroupSpec {
                label: format!("twisted a2_even m={m} n={cycle}"),
                root_datum: rd,
                lattice,
                twist: Some(Twist { class, cycle }),
            })
        }
        TwistClass::D2 { m } => {
            if m < 2 {
                return Err(RootSysError::InvalidRank { family: "twisted d2".into(), rank: m });
            }
            let r = m - 1;
            let rd = if r == 1 {
                // C_1 realization: single long root 2 e_1.
                let mut a = zeros(1);
                a[0] = rat_int(2);
                from_simple_system(1, vec![a], Some(vec![SimpleFactor { kind: FamilyKind::A, rank: 1 }]))
            } else {
                build_root_datum("C", r)?
            };
            let lattice = if simply_connected_form {
                dual_lattice_in_span(&rd.root_lattice)
            } else {
                std_basis_lattice(r, rat_int(1))
            };
            Ok(GroupSpec {
                label: format!("twisted d2 m={m} n={cycle}"),
                root_datum: rd,
                lattice,
                twist: Some(Twist { class, cycle }),
            })
        }
        TwistClass::E6Fold => {
            let e6 = build_root_datum("E6", 6)?;
            let a = &e6.simple_roots;
            let half = rat(1, 2);
            let simple = vec![
                a[1].clone(),
                a[3].clone(),
                vec_scale(&vec_add(&a[2], &a[4]), &half),
                vec_scale(&vec_add(&a[0], &a[5]), &half),
            ];
            let mut rd =
                from_simple_system(8, simple, Some(vec![SimpleFactor { kind: FamilyKind::F, rank: 4 }]));
            let lattice = dual_lattice_in_span(&rd.root_lattice);
            rd.affine_lattice = lattice.clone();
            Ok(GroupSpec {
                label: format!("twisted e6_2 n={cycle}"),
                root_datum: rd,
                lattice,
                twist: Some(Twist { class, cycle }),
            })
        }
        TwistClass::D4Fold => {
            let d4 = build_root_datum("D", 4)?;
            let a = &d4.simple_roots;
            let third = rat(1, 3);
            let orbit_sum = vec_add(&vec_add(&a[0], &a[2]), &a[3]);
            let simple = vec![a[1].clone(), vec_scale(&orbit_sum, &third)];
            let mut rd =
                from_simple_system(4, simple, Some(vec![SimpleFactor { kind: FamilyKind::G, rank: 2 }]));
            let lattice = dual_lattice_in_span(&rd.root_lattice);
            rd.affine_lattice = lattice.clone();
            Ok(GroupSpec {
                label: format!("twisted d4_3 n={cycle}"),
                root_datum: rd,
                lattice,
                twist: Some(Twist { class, cycle }),
            })
        }
        TwistClass::CycleU { m } => {
            let mut spec = unitary_spec(m.max(1));
            spec.label = format!("twisted u m={m} n={cycle}");
            spec.twist = Some(Twist { class, cycle });
            Ok(spec)
        }
    }
}
