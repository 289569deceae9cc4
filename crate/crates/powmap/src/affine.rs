//! Affine Weyl group action: alcove reduction, wall incidence, and the
//! alcove automorphisms induced by a larger translation lattice.
//!
//! The affine group here is W x L for the datum's reflection group W and its
//! translation lattice L (`affine_lattice`). Reflections fix the hyperplanes
//! `<x, b^> = k t_b`, where `t_b` is the smallest positive multiple of the
//! root `b` lying in L. The fundamental alcove is cut out by the simple walls
//! and the single binding facet whose scaled coroot dominates all others.

use crate::rat::*;
use crate::rootsys::{pairing, quotient_group, reflect_in_root, intersect_with_span, RootDatum, Lattice};
use num::traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AffineError {
    #[error("point lies outside the closed fundamental alcove")]
    OutsideAlcove,
    #[error("datum must be irreducible for alcove operations")]
    NotIrreducible,
    #[error("translation lattice does not extend the affine lattice: {0}")]
    LatticeMismatch(String),
    #[error("alcove map does not permute the vertices")]
    NotAnAutomorphism,
}

/// Affine-rational map `x -> linear x + translation`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AffineElement {
    /// Row-major square matrix.
    #[serde(with = "serde_ratvecs")]
    pub linear: Vec<RatVec>,
    #[serde(with = "serde_ratvec")]
    pub translation: RatVec,
}

impl AffineElement {
    pub fn identity(dim: usize) -> AffineElement {
        let linear = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { rat_int(1) } else { Rat::zero() })
                    .collect()
            })
            .collect();
        AffineElement { linear, translation: zeros(dim) }
    }

    pub fn translation_by(t: &[Rat]) -> AffineElement {
        let mut e = AffineElement::identity(t.len());
        e.translation = t.to_vec();
        e
    }

    pub fn apply_linear(&self, x: &[Rat]) -> RatVec {
        self.linear
            .iter()
            .map(|row| dot(row, x))
            .collect()
    }

    pub fn apply(&self, x: &[Rat]) -> RatVec {
        vec_add(&self.apply_linear(x), &self.translation)
    }

    /// `after` composed with `before`: x -> after(before(x)).
    pub fn compose(after: &AffineElement, before: &AffineElement) -> AffineElement {
        let dim = after.translation.len();
        let linear: Vec<RatVec> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        (0..dim)
                            .map(|k| &after.linear[i][k] * &before.linear[k][j])
                            .fold(Rat::zero(), |a, b| a + b)
                    })
                    .collect()
            })
            .collect();
        let translation = vec_add(&after.apply_linear(&before.translation), &after.translation);
        AffineElement { linear, translation }
    }
}

/// Linear reflection in `root` as an affine element.
fn reflection_element(dim: usize, root: &[Rat]) -> AffineElement {
    let sq = dot(root, root);
    let mut linear = AffineElement::identity(dim).linear;
    for (i, row) in linear.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let delta = &root[i] * &root[j] * rat_int(2) / &sq;
            *cell = &*cell - &delta;
        }
    }
    AffineElement { linear, translation: zeros(dim) }
}

/// Wall spacings and the binding facet of an irreducible datum.
#[derive(Debug, Clone)]
pub struct WallSystem {
    /// `t_b` per positive root: least t > 0 with `t b` in the affine lattice.
    pub spacings: Vec<u64>,
    /// Index into `positive_roots` of the facet root.
    pub binding_index: usize,
    pub binding_spacing: u64,
}

pub fn wall_system(rd: &RootDatum) -> WallSystem {
    assert!(rd.is_irreducible(), "wall system needs an irreducible datum");
    let lat = &rd.affine_lattice;
    let spacings: Vec<u64> = rd
        .positive_roots
        .iter()
        .map(|b| {
            let coords = solve_in_basis(&lat.basis, b)
                .expect("root outside the affine lattice span");
            let mut t = num::BigInt::one();
            for c in &coords {
                t = num::integer::lcm(t, c.denom().clone());
            }
            t.to_u64().expect("wall spacing overflow")
        })
        .collect();
    // Scaled coroot coefficients in the simple-coroot basis.
    let coroot = |b: &RatVec| -> RatVec {
        let sq = dot(b, b);
        vec_scale(b, &(rat_int(2) / sq))
    };
    let simple_coroots: Vec<RatVec> = rd.simple_roots.iter().map(coroot).collect();
    let coeffs: Vec<RatVec> = rd
        .positive_roots
        .iter()
        .zip(&spacings)
        .map(|(b, &t)| {
            let c = solve_in_basis(&simple_coroots, &coroot(b)).expect("coroot outside span");
            vec_scale(&c, &rat(1, t as i64))
        })
        .collect();
    let dominated = |a: &RatVec, b: &RatVec| a.iter().zip(b).all(|(x, y)| x <= y);
    let mut binding = 0usize;
    for i in 1..coeffs.len() {
        if dominated(&coeffs[binding], &coeffs[i]) {
            binding = i;
        }
    }
    for c in &coeffs {
        assert!(
            dominated(c, &coeffs[binding]),
            "no coefficientwise-dominant facet root"
        );
    }
    WallSystem {
        spacings: spacings.clone(),
        binding_index: binding,
        binding_spacing: spacings[binding],
    }
}

/// Result of reducing a point into the fundamental alcove.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AlcoveReduction {
    /// Representative in the closed alcove.
    #[serde(with = "serde_ratvec")]
    pub v_bar: RatVec,
    /// Linear image of the input under the reducing map, made dominant for
    /// the stabilizer of `v_bar`.
    #[serde(with = "serde_ratvec")]
    pub v_tilde: RatVec,
    /// Affine map `g` with `g(input) = v_bar`.
    pub element: AffineElement,
}

/// Wall sweep order; reductions agree for every order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Forward,
    Reverse,
}

pub fn reduce_to_alcove(rd: &RootDatum, v: &[Rat]) -> AlcoveReduction {
    reduce_to_alcove_ordered(rd, v, SweepOrder::Forward)
}

pub fn reduce_to_alcove_ordered(rd: &RootDatum, v: &[Rat], order: SweepOrder) -> AlcoveReduction {
    assert_eq!(v.len(), rd.dim);
    if rd.rank == 0 {
        return AlcoveReduction {
            v_bar: v.to_vec(),
            v_tilde: v.to_vec(),
            element: AffineElement::identity(rd.dim),
        };
    }
    assert!(rd.is_irreducible(), "alcove reduction needs an irreducible datum");
    let ws = wall_system(rd);
    let bstar = rd.positive_roots[ws.binding_index].clone();
    let tstar = rat_int(ws.binding_spacing as i64);
    let affine_refl = {
        let mut e = reflection_element(rd.dim, &bstar);
        e.translation = vec_scale(&bstar, &tstar);
        e
    };

    let mut g = AffineElement::identity(rd.dim);
    let mut x = v.to_vec();
    let mut steps = 0usize;
    'outer: loop {
        steps += 1;
        assert!(steps < 1_000_000, "alcove reduction did not terminate");
        let simple_order: Vec<usize> = match order {
            SweepOrder::Forward => (0..rd.rank).collect(),
            SweepOrder::Reverse => (0..rd.rank).rev().collect(),
        };
        if order == SweepOrder::Reverse {
            let c = pairing(&x, &bstar);
            if c > tstar {
                x = affine_refl.apply(&x);
                g = AffineElement::compose(&affine_refl, &g);
                continue 'outer;
            }
        }
        for i in simple_order {
            let c = pairing(&x, &rd.simple_roots[i]);
            if c.is_negative() {
                let s = reflection_element(rd.dim, &rd.simple_roots[i]);
                x = s.apply(&x);
                g = AffineElement::compose(&s, &g);
                continue 'outer;
            }
        }
        if order == SweepOrder::Forward {
            let c = pairing(&x, &bstar);
            if c > tstar {
                x = affine_refl.apply(&x);
                g = AffineElement::compose(&affine_refl, &g);
                continue 'outer;
            }
        }
        break;
    }

    // Dominance adjustment of the linear image within the stabilizer of v_bar.
    let m_v = g.apply_linear(v);
    let mut base: Vec<RatVec> = Vec::new();
    for s in &rd.simple_roots {
        if pairing(&x, s).is_zero() {
            base.push(s.clone());
        }
    }
    if pairing(&x, &bstar) == tstar {
        base.push(vec_scale(&bstar, &rat_int(-1)));
    }
    let mut vt = m_v;
    let mut steps = 0usize;
    'dom: loop {
        steps += 1;
        assert!(steps < 1_000_000, "dominance adjustment did not terminate");
        for b in &base {
            if pairing(&vt, b).is_negative() {
                vt = reflect_in_root(&vt, b);
                continue 'dom;
            }
        }
        break;
    }

    assert!(rd.affine_lattice.contains(&g.translation));
    assert!(rd.affine_lattice.contains(&vec_sub(&x, &vt)));
    AlcoveReduction { v_bar: x, v_tilde: vt, element: g }
}

/// Indices of the alcove walls through `v_bar`: 0 is the facet wall, i in
/// 1..=rank is the wall of the i-th simple root.
pub fn wall_incidence(rd: &RootDatum, v_bar: &[Rat]) -> Result<Vec<usize>, AffineError> {
    if rd.rank == 0 {
        return Ok(Vec::new());
    }
    if !rd.is_irreducible() {
        return Err(AffineError::NotIrreducible);
    }
    let ws = wall_system(rd);
    let bstar = &rd.positive_roots[ws.binding_index];
    let tstar = rat_int(ws.binding_spacing as i64);
    let mut out = Vec::new();
    let c = pairing(v_bar, bstar);
    if c > tstar {
        return Err(AffineError::OutsideAlcove);
    }
    if c == tstar {
        out.push(0);
    }
    for (i, s) in rd.simple_roots.iter().enumerate() {
        let c = pairing(v_bar, s);
        if c.is_negative() {
            return Err(AffineError::OutsideAlcove);
        }
        if c.is_zero() {
            out.push(i + 1);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Vertices of the fundamental alcove, indexed like walls: vertex k is the
/// one opposite wall k.
pub fn alcove_vertices(rd: &RootDatum) -> Vec<RatVec> {
    let ws = wall_system(rd);
    let bstar = &rd.positive_roots[ws.binding_index];
    let tstar = rat_int(ws.binding_spacing as i64);
    let mut verts = vec![zeros(rd.dim)];
    for w in &rd.fundamental_weights {
        let c = &tstar / pairing(w, bstar);
        verts.push(vec_scale(w, &c));
    }
    verts
}

/// An isometry of the fundamental alcove induced by translation classes of a
/// lattice extending the affine lattice.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AlcoveAutomorphism {
    /// Image of each wall index under the map.
    pub node_perm: Vec<usize>,
    pub element: AffineElement,
    /// Translation-class representative inducing the map.
    #[serde(with = "serde_ratvec")]
    pub class_rep: RatVec,
}

impl AlcoveAutomorphism {
    pub fn is_identity(&self) -> bool {
        self.node_perm.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// All alcove automorphisms induced by `lattice` (cut to the root span)
/// modulo the affine lattice. The identity is always included.
pub fn diagram_automorphisms(
    rd: &RootDatum,
    lattice: &Lattice,
) -> Result<Vec<AlcoveAutomorphism>, AffineError> {
    if rd.rank == 0 {
        return Ok(vec![AlcoveAutomorphism {
            node_perm: Vec::new(),
            element: AffineElement::identity(rd.dim),
            class_rep: zeros(rd.dim),
        }]);
    }
    if !rd.is_irreducible() {
        return Err(AffineError::NotIrreducible);
    }
    let lam0 = intersect_with_span(lattice, &rd.simple_roots);
    let classes = quotient_group(&lam0, &rd.affine_lattice)
        .map_err(|e| AffineError::LatticeMismatch(e.to_string()))?;

    let verts = alcove_vertices(rd);
    // Generic interior point: positive prime-weighted vertex combination.
    let primes = [2i64, 3, 5, 7, 11, 13, 17, 19, 23];
    let total: i64 = primes[..=rd.rank].iter().sum();
    let mut x0 = zeros(rd.dim);
    for (k, v) in verts.iter().enumerate() {
        x0 = vec_add(&x0, &vec_scale(v, &rat(primes[k], total)));
    }

    let ws = wall_system(rd);
    let bstar = &rd.positive_roots[ws.binding_index];
    let mut normals: Vec<RatVec> = vec![vec_scale(bstar, &rat_int(-1))];
    normals.extend(rd.simple_roots.iter().cloned());

    let mut autos = Vec::new();
    for rep in &classes.reps {
        let shifted = vec_add(&x0, rep);
        let red = reduce_to_alcove(rd, &shifted);
        let psi = AffineElement::compose(&red.element, &AffineElement::translation_by(rep));
        let mut perm = vec![usize::MAX; rd.rank + 1];
        for (i, v) in verts.iter().enumerate() {
            let img = psi.apply(v);
            let j = verts
                .iter()
                .position(|u| *u == img)
                .ok_or(AffineError::NotAnAutomorphism)?;
            perm[i] = j;
        }
        for i in 0..normals.len() {
            for j in 0..normals.len() {
                let before = pairing(&normals[i], &normals[j]);
                let after = pairing(&normals[perm[i]], &normals[perm[j]]);
                if before != after {
                    return Err(AffineError::NotAnAutomorphism);
                }
            }
        }
        autos.push(AlcoveAutomorphism { node_perm: perm, element: psi, class_rep: rep.clone() });
    }
    for i in 0..autos.len() {
        for j in (i + 1)..autos.len() {
            assert_ne!(
                autos[i].node_perm, autos[j].node_perm,
                "distinct translation classes induced the same alcove map"
            );
        }
    }
    Ok(autos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_datum, twisted_spec, TwistClass};
    use proptest::prelude::*;

    fn g2() -> RootDatum {
        build_root_datum("G2", 2).unwrap()
    }

    #[test]
    fn binding_facet_matches_highest_roots() {
        for fam in ["A", "D"] {
            let rd = build_root_datum(fam, 4).unwrap();
            let ws = wall_system(&rd);
            assert_eq!(rd.positive_roots[ws.binding_index], rd.highest_short_root);
            assert_eq!(ws.binding_spacing, 1);
            assert!(ws.spacings.iter().all(|&t| t == 1));
        }
        for fam in ["B", "G2", "F4"] {
            let rd = build_root_datum(fam, if fam == "B" { 3 } else { 0 }).unwrap();
            let ws = wall_system(&rd);
            assert_eq!(rd.positive_roots[ws.binding_index], rd.highest_short_root);
            assert_eq!(ws.binding_spacing, 1);
        }
        // Folded data: the facet is the highest long root at spacing 1, while
        // short walls are spread three (resp. two) times as far apart.
        let fold = twisted_spec(TwistClass::D4Fold, 3, false).unwrap();
        let ws = wall_system(&fold.root_datum);
        assert_eq!(
            fold.root_datum.positive_roots[ws.binding_index],
            fold.root_datum.highest_root
        );
        assert_eq!(ws.binding_spacing, 1);
        let mut spacings = ws.spacings.clone();
        spacings.sort_unstable();
        assert_eq!(spacings, vec![1, 1, 1, 3, 3, 3]);

        let fold = twisted_spec(TwistClass::E6Fold, 2, false).unwrap();
        let ws = wall_system(&fold.root_datum);
        assert_eq!(
            fold.root_datum.positive_roots[ws.binding_index],
            fold.root_datum.highest_root
        );
        let longs = ws.spacings.iter().filter(|&&t| t == 1).count();
        let shorts = ws.spacings.iter().filter(|&&t| t == 2).count();
        assert_eq!((longs, shorts), (12, 12));
    }

    #[test]
    fn g2_weyl_vector_reductions() {
        let rd = g2();
        let delta = rd.weyl_vector.clone();

        // delta / 6 is interior: reduction is the identity.
        let sixth = vec_scale(&delta, &rat(1, 6));
        let red = reduce_to_alcove(&rd, &sixth);
        assert_eq!(red.v_bar, sixth);
        assert_eq!(red.v_tilde, sixth);
        assert_eq!(red.element, AffineElement::identity(3));
        assert_eq!(wall_incidence(&rd, &red.v_bar).unwrap(), Vec::<usize>::new());

        // delta lies in the root lattice, so it reduces to the origin with
        // dominant linear image delta itself.
        let red = reduce_to_alcove(&rd, &delta);
        assert!(is_zero_vec(&red.v_bar));
        assert_eq!(red.v_tilde, delta);
        assert_eq!(wall_incidence(&rd, &red.v_bar).unwrap(), vec![1, 2]);

        // delta / 2: representative on the facet wall and the long simple wall.
        let half = vec_scale(&delta, &rat(1, 2));
        let red = reduce_to_alcove(&rd, &half);
        assert_eq!(red.v_bar, vec![rat_int(0), rat(-1, 2), rat(1, 2)]);
        assert_eq!(red.v_tilde, vec![rat_int(-1), rat(3, 2), rat(-1, 2)]);
        assert_eq!(wall_incidence(&rd, &red.v_bar).unwrap(), vec![0, 2]);
    }

    #[test]
    fn wall_incidence_rejects_outside_points() {
        let rd = g2();
        let out = vec_scale(&rd.weyl_vector, &rat(1, 2));
        assert!(matches!(
            wall_incidence(&rd, &out),
            Err(AffineError::OutsideAlcove)
        ));
        let neg = vec_scale(&rd.weyl_vector, &rat(-1, 100));
        assert!(matches!(
            wall_incidence(&rd, &neg),
            Err(AffineError::OutsideAlcove)
        ));
    }

    #[test]
    fn automorphism_counts() {
        let a2 = build_root_datum("A", 2).unwrap();
        let autos = diagram_automorphisms(&a2, &a2.weight_lattice).unwrap();
        assert_eq!(autos.len(), 3);
        assert!(autos.iter().any(|a| a.is_identity()));
        for a in autos.iter().filter(|a| !a.is_identity()) {
            // The nontrivial maps rotate the triangle: no wall is fixed.
            assert!(a.node_perm.iter().enumerate().all(|(i, &j)| i != j));
        }

        let e7 = build_root_datum("E7", 7).unwrap();
        let autos = diagram_automorphisms(&e7, &e7.weight_lattice).unwrap();
        assert_eq!(autos.len(), 2);

        let e8 = build_root_datum("E8", 8).unwrap();
        let autos = diagram_automorphisms(&e8, &e8.weight_lattice).unwrap();
        assert_eq!(autos.len(), 1);

        let fold = twisted_spec(TwistClass::D4Fold, 3, false).unwrap();
        let autos = diagram_automorphisms(&fold.root_datum, &fold.lattice).unwrap();
        assert_eq!(autos.len(), 1);

        // Adjoint lattices never extend the affine lattice.
        let g2 = g2();
        let autos = diagram_automorphisms(&g2, &g2.root_lattice).unwrap();
        assert_eq!(autos.len(), 1);
    }

    fn test_data() -> Vec<RootDatum> {
        vec![
            build_root_datum("A", 2).unwrap(),
            build_root_datum("B", 2).unwrap(),
            build_root_datum("G2", 2).unwrap(),
            build_root_datum("A", 3).unwrap(),
            build_root_datum("C", 3).unwrap(),
            twisted_spec(TwistClass::D4Fold, 3, false).unwrap().root_datum,
            twisted_spec(TwistClass::E6Fold, 2, false).unwrap().root_datum,
        ]
    }

    proptest! {
        #[test]
        fn reduction_is_path_independent(
            which in 0usize..7,
            nums in proptest::collection::vec(-24i64..=24, 4),
            den in 1i64..=6,
        ) {
            let rd = &test_data()[which];
            let mut v = zeros(rd.dim);
            for i in 0..rd.rank {
                v = vec_add(&v, &vec_scale(&rd.simple_roots[i], &rat(nums[i % nums.len()], den)));
            }
            let a = reduce_to_alcove_ordered(rd, &v, SweepOrder::Forward);
            let b = reduce_to_alcove_ordered(rd, &v, SweepOrder::Reverse);
            prop_assert_eq!(&a.v_bar, &b.v_bar);
            prop_assert_eq!(&a.v_tilde, &b.v_tilde);
            prop_assert_eq!(a.element.apply(&v), a.v_bar.clone());
            prop_assert!(wall_incidence(rd, &a.v_bar).is_ok());
            // The reduced point and both images of v agree modulo the lattice.
            prop_assert!(rd.affine_lattice.contains(&vec_sub(&a.v_bar, &a.v_tilde)));
        }
    }
}
