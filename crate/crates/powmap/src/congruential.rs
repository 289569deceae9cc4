//! Subgroups of a Weyl group that move a point only by lattice translations.
//!
//! For a point `v` and an invariant lattice `L`, the set `{w : w(v) - v in L}`
//! is a group. It is generated by reflections in the walls through the alcove
//! image of `v`, extended by the alcove isometries induced by `L` that fix
//! that image. The groups at `v = delta / p` control which eigenvalue
//! statistics survive the p-th power map.

use num::integer::gcd;
use num::BigInt;
use thiserror::Error;

use crate::affine::{
    diagram_automorphisms, reduce_to_alcove, wall_incidence, wall_system, AffineElement,
    AffineError, AlcoveAutomorphism,
};
use crate::rat::{
    invert_rat_mat, rat_int, vec_scale, zeros, Rat, RatVec,
};
use crate::rootsys::{
    from_simple_system, intersect_with_span, is_subweight_lattice, project_onto_span, GroupSpec,
    Lattice, RootDatum,
};

#[derive(Debug, Error)]
pub enum CongruentialError {
    #[error("lattice is not between the root and weight lattices of the datum")]
    NotSubweight,
    #[error("lattice does not span the root directions")]
    SpanDeficient,
    #[error("operation needs a twisted spec")]
    NotTwisted,
    #[error("operation needs an untwisted spec")]
    Twisted,
    #[error(transparent)]
    Affine(#[from] AffineError),
}

/// The group `{w : w(v) - v in L}` in factored form.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CongruentialGroup {
    /// Reflection part: datum spanned by the walls through `v_bar`.
    /// Its simple system lives in the alcove frame.
    pub weyl_part: RootDatum,
    /// Alcove isometries induced by the lattice that fix `v_bar` exactly.
    /// Always contains the identity class.
    pub automorphism_part: Vec<AlcoveAutomorphism>,
    #[serde(with = "crate::rat::serde_bigint")]
    pub order: BigInt,
    /// Wall indices through `v_bar`: 0 is the bounding facet, i+1 simple wall i.
    pub wall_nodes: Vec<usize>,
    /// Alcove representative of `v`.
    #[serde(with = "crate::rat::serde_ratvec")]
    pub v_bar: RatVec,
    /// Linear image of `v` under the reducing map, dominant for the stabilizer.
    #[serde(with = "crate::rat::serde_ratvec")]
    pub v_tilde: RatVec,
    /// Roots whose reflections generate the group in the frame of the input
    /// point: the wall roots pulled back through the reducing map.
    #[serde(with = "crate::rat::serde_ratvecs")]
    pub generator_roots: Vec<RatVec>,
}

impl CongruentialGroup {
    pub fn is_trivial(&self) -> bool {
        self.order == BigInt::from(1)
    }
}

/// Lattice cut to the root span and the wall-translation lattice it induces.
pub fn translation_lattices(
    rd: &RootDatum,
    lattice: &Lattice,
) -> Result<(Lattice, Lattice), CongruentialError> {
    let lam0 = intersect_with_span(lattice, &rd.simple_roots);
    if lam0.rank() != rd.rank {
        return Err(CongruentialError::SpanDeficient);
    }
    let mut gens: Vec<RatVec> = Vec::new();
    for b in &rd.positive_roots {
        // Least t > 0 with t*b in the cut lattice.
        let mut t = BigInt::from(1);
        loop {
            let cand = vec_scale(b, &Rat::from_integer(t.clone()));
            if lam0.contains(&cand) {
                gens.push(cand);
                break;
            }
            t += 1;
            assert!(t < BigInt::from(1000), "unbounded wall spacing");
        }
    }
    let lam_a = Lattice::from_generators(rd.dim, &gens);
    Ok((lam0, lam_a))
}

fn congruential_core(
    rd: &RootDatum,
    lattice: &Lattice,
    v: &[Rat],
) -> Result<CongruentialGroup, CongruentialError> {
    if rd.rank == 0 {
        let autos = diagram_automorphisms(rd, lattice)?;
        return Ok(CongruentialGroup {
            weyl_part: RootDatum::torus(rd.dim),
            automorphism_part: autos,
            order: BigInt::from(1),
            wall_nodes: Vec::new(),
            v_bar: zeros(rd.dim),
            v_tilde: zeros(rd.dim),
            generator_roots: Vec::new(),
        });
    }
    // Components of v outside the root span never move under W.
    let v_span = project_onto_span(&rd.simple_roots, v);
    let (_lam0, lam_a) = translation_lattices(rd, lattice)?;
    let mut scoped = rd.clone();
    scoped.affine_lattice = lam_a;

    let red = reduce_to_alcove(&scoped, &v_span);
    let walls = wall_incidence(&scoped, &red.v_bar)?;
    let ws = wall_system(&scoped);
    let facet_root = &scoped.positive_roots[ws.binding_index];

    // The facet root is negated so the wall set is a simple system that is
    // nonnegative on v_tilde.
    let wall_roots: Vec<RatVec> = walls
        .iter()
        .map(|&node| {
            if node == 0 {
                vec_scale(facet_root, &rat_int(-1))
            } else {
                scoped.simple_roots[node - 1].clone()
            }
        })
        .collect();
    let weyl_part = if wall_roots.is_empty() {
        RootDatum::torus(rd.dim)
    } else {
        from_simple_system(rd.dim, wall_roots.clone(), None)
    };

    let autos = diagram_automorphisms(&scoped, lattice)?;
    let fixing: Vec<AlcoveAutomorphism> = autos
        .into_iter()
        .filter(|a| a.element.apply(&red.v_bar) == red.v_bar)
        .collect();
    assert!(!fixing.is_empty(), "identity class must fix the alcove point");

    let order = weyl_part.weyl_order.clone() * BigInt::from(fixing.len());
    let back = AffineElement {
        linear: invert_rat_mat(&red.element.linear),
        translation: zeros(rd.dim),
    };
    let generator_roots: Vec<RatVec> =
        wall_roots.iter().map(|b| back.apply_linear(b)).collect();

    Ok(CongruentialGroup {
        weyl_part,
        automorphism_part: fixing,
        order,
        wall_nodes: walls,
        v_bar: red.v_bar,
        v_tilde: red.v_tilde,
        generator_roots,
    })
}

/// The group `{w : w(v) - v in lattice}` for a lattice between the root and
/// weight lattices of `rd`.
pub fn congruential_subgroup(
    rd: &RootDatum,
    lattice: &Lattice,
    v: &[Rat],
) -> Result<CongruentialGroup, CongruentialError> {
    if rd.rank > 0 && !is_subweight_lattice(lattice, rd) {
        return Err(CongruentialError::NotSubweight);
    }
    congruential_core(rd, lattice, v)
}

/// The congruential group at `delta / p`, which controls the p-th power map.
/// Accepts every invariant lattice a spec can carry, including the rescaled
/// twisted ones.
pub fn w_p(spec: &GroupSpec, p: u64) -> Result<CongruentialGroup, CongruentialError> {
    assert!(p >= 1, "power must be positive");
    let v = vec_scale(
        &spec.root_datum.weyl_vector,
        &(rat_int(1) / rat_int(p as i64)),
    );
    congruential_core(&spec.root_datum, &spec.lattice, &v)
}

/// Structure flags of the congruential group at `delta / p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PowerConditions {
    /// The group is the pure reflection part: no extending isometries.
    pub is_weyl: bool,
    /// The projection of `v_tilde` onto the reflection part's root span is
    /// that part's own Weyl vector.
    pub weyl_vector_condition: bool,
    /// The lattice cut to the root span already equals the wall-translation
    /// lattice, so no isometry classes exist at any power.
    pub center_connected: bool,
}

pub fn power_conditions(spec: &GroupSpec, p: u64) -> Result<PowerConditions, CongruentialError> {
    let cg = w_p(spec, p)?;
    let is_weyl = cg.automorphism_part.len() == 1;
    let weyl_vector_condition = if cg.weyl_part.rank == 0 {
        true
    } else {
        project_onto_span(&cg.weyl_part.simple_roots, &cg.v_tilde) == cg.weyl_part.weyl_vector
    };
    let center_connected = if spec.root_datum.rank == 0 {
        true
    } else {
        let (lam0, lam_a) = translation_lattices(&spec.root_datum, &spec.lattice)?;
        lam0.same_lattice(&lam_a)
    };
    assert!(
        !center_connected || is_weyl,
        "a connected center leaves no room for isometry classes"
    );
    Ok(PowerConditions {
        is_weyl,
        weyl_vector_condition,
        center_connected,
    })
}

/// Smallest power at which eigenvalues become independent, with a flag for
/// whether they are exactly iid uniform there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Threshold {
    pub h: u64,
    pub iid_at_h: bool,
}

pub fn independence_threshold(spec: &GroupSpec) -> Result<Threshold, CongruentialError> {
    if spec.twist.is_some() {
        return Err(CongruentialError::Twisted);
    }
    let h = spec.root_datum.coxeter_number.max(1);
    let iid_at_h = if spec.root_datum.rank == 0 {
        true
    } else {
        let (lam0, lam_a) = translation_lattices(&spec.root_datum, &spec.lattice)?;
        lam0.same_lattice(&lam_a)
    };
    Ok(Threshold { h, iid_at_h })
}

/// Reduction of a power map on a twisted class to a power map on the
/// untwisted base with a substitution exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TwistedReduction {
    /// Power applied on the untwisted base: p / gcd(n, p).
    pub base_power: u64,
    /// Exponent substituted into the base density: n / gcd(n, p).
    pub substitution_exponent: u64,
    /// Modulus in the threshold gcd: cycle times the class multiplier.
    pub survival_modulus: u64,
    /// Effective power entering the independence threshold: p / gcd(p, modulus).
    pub threshold_power: u64,
}

pub fn twisted_reduce(spec: &GroupSpec, p: u64) -> Result<TwistedReduction, CongruentialError> {
    assert!(p >= 1, "power must be positive");
    let tw = spec.twist.ok_or(CongruentialError::NotTwisted)?;
    let n = tw.cycle;
    let g = gcd(n, p);
    let modulus = tw.class.threshold_multiplier() * n;
    Ok(TwistedReduction {
        base_power: p / g,
        substitution_exponent: n / g,
        survival_modulus: modulus,
        threshold_power: p / gcd(p, modulus),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{dot, is_zero_vec, rat, vec_add, vec_sub};
    use crate::rootsys::{
        adjoint_spec, build_root_datum, reflect_in_root, special_unitary_spec, twisted_spec,
        unitary_spec, FamilyKind, TwistClass,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn big(n: u64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn rank_one_points() {
        let rd = build_root_datum("A", 1).unwrap();
        let q = rd.root_lattice.clone();
        let alpha = rd.simple_roots[0].clone();

        let half = vec_scale(&alpha, &rat(1, 2));
        let cg = congruential_subgroup(&rd, &q, &half).unwrap();
        assert_eq!(cg.order, big(2));
        assert_eq!(cg.weyl_part.rank, 1);
        assert_eq!(cg.weyl_part.family[0].kind, FamilyKind::A);
        assert_eq!(cg.automorphism_part.len(), 1);

        let third = vec_scale(&alpha, &rat(1, 3));
        let cg = congruential_subgroup(&rd, &q, &third).unwrap();
        assert!(cg.is_trivial());
        assert_eq!(cg.weyl_part.rank, 0);
        assert!(cg.generator_roots.is_empty());

        // Components orthogonal to the roots never matter.
        let off = vec_add(&half, &vec![rat_int(1), rat_int(1)]);
        let cg = congruential_subgroup(&rd, &q, &off).unwrap();
        assert_eq!(cg.order, big(2));

        // A lattice missing the root direction at integer scale still works
        // when some multiple of the root lands inside; one that cannot reach
        // the roots at all is rejected as span-deficient.
        let doubled = Lattice::from_basis(2, vec![vec_scale(&alpha, &rat_int(2))]);
        assert!(matches!(
            congruential_subgroup(&rd, &doubled, &half),
            Err(CongruentialError::NotSubweight)
        ));
    }

    #[test]
    fn zero_point_gives_whole_weyl_group() {
        for (family, rank, form_weight) in [("A", 2, true), ("G", 2, false), ("B", 3, false)] {
            let rd = build_root_datum(family, rank).unwrap();
            let lat = if form_weight {
                rd.weight_lattice.clone()
            } else {
                rd.root_lattice.clone()
            };
            let cg = congruential_subgroup(&rd, &lat, &zeros(rd.dim)).unwrap();
            assert_eq!(cg.order, rd.weyl_order);
            assert_eq!(cg.weyl_part.rank, rd.rank);
            // The isometry classes rotate the origin vertex away, so only the
            // identity class stabilizes the point itself.
            assert_eq!(cg.automorphism_part.len(), 1);
        }
    }

    #[test]
    fn wp_matches_pinned_examples() {
        let g2 = adjoint_spec("G", 2).unwrap();
        let cg = w_p(&g2, 2).unwrap();
        assert_eq!(cg.order, big(4));
        let kinds: Vec<_> = cg.weyl_part.family.iter().map(|f| (f.kind, f.rank)).collect();
        assert_eq!(kinds, vec![(FamilyKind::A, 1), (FamilyKind::A, 1)]);

        let e8 = adjoint_spec("E", 8).unwrap();
        assert!(w_p(&e8, 30).unwrap().is_trivial());
        assert!(!w_p(&e8, 29).unwrap().is_trivial());

        for n in 2..=6 {
            let su = special_unitary_spec(n);
            let cg = w_p(&su, n as u64).unwrap();
            assert_eq!(cg.order, big(n as u64), "SU({n}) at p = {n}");
            assert_eq!(cg.weyl_part.rank, 0);
            assert_eq!(cg.automorphism_part.len(), n);

            // U(n) only carries the root-lattice classes, so the same power
            // is already trivial.
            let u = unitary_spec(n);
            assert!(w_p(&u, n as u64).unwrap().is_trivial());
        }
    }

    #[test]
    fn power_condition_flags() {
        let g2 = adjoint_spec("G", 2).unwrap();
        let c1 = power_conditions(&g2, 1).unwrap();
        assert!(c1.is_weyl && c1.weyl_vector_condition && c1.center_connected);
        let c2 = power_conditions(&g2, 2).unwrap();
        assert!(c2.is_weyl && c2.center_connected);
        assert!(!c2.weyl_vector_condition);
        let c3 = power_conditions(&g2, 3).unwrap();
        assert!(c3.weyl_vector_condition);

        let f4 = adjoint_spec("F", 4).unwrap();
        assert!(!power_conditions(&f4, 3).unwrap().weyl_vector_condition);
        assert!(power_conditions(&f4, 4).unwrap().weyl_vector_condition);

        let su2 = special_unitary_spec(2);
        let c = power_conditions(&su2, 2).unwrap();
        assert!(!c.is_weyl);
        assert!(!c.center_connected);

        // Connected center forces the pure reflection case at every power.
        for spec in [
            adjoint_spec("G", 2).unwrap(),
            adjoint_spec("F", 4).unwrap(),
            unitary_spec(4),
            special_unitary_spec(3),
        ] {
            for p in 1..=8 {
                let c = power_conditions(&spec, p).unwrap();
                assert!(!c.center_connected || c.is_weyl, "{} p={p}", spec.label);
            }
        }
    }

    #[test]
    fn thresholds() {
        let e8 = adjoint_spec("E", 8).unwrap();
        assert_eq!(
            independence_threshold(&e8).unwrap(),
            Threshold { h: 30, iid_at_h: true }
        );
        let g2 = adjoint_spec("G", 2).unwrap();
        assert_eq!(
            independence_threshold(&g2).unwrap(),
            Threshold { h: 6, iid_at_h: true }
        );
        let su4 = special_unitary_spec(4);
        let t = independence_threshold(&su4).unwrap();
        assert_eq!(t.h, 4);
        assert!(!t.iid_at_h);
        let torus = unitary_spec(1);
        assert_eq!(
            independence_threshold(&torus).unwrap(),
            Threshold { h: 1, iid_at_h: true }
        );

        // Exceptional adjoint groups become trivial exactly at h.
        for (family, rank) in [("G", 2), ("F", 4), ("E", 6), ("E", 7), ("E", 8)] {
            let spec = adjoint_spec(family, rank).unwrap();
            let h = spec.root_datum.coxeter_number;
            for p in 1..=h + 2 {
                let trivial = w_p(&spec, p).unwrap().is_trivial();
                assert_eq!(trivial, p >= h, "{family}{rank} p={p}");
            }
        }
        // SU(n) stays nontrivial through p = n.
        for n in 2..=8u64 {
            let spec = special_unitary_spec(n as usize);
            for p in 1..=n + 2 {
                let trivial = w_p(&spec, p).unwrap().is_trivial();
                assert_eq!(trivial, p > n, "SU({n}) p={p}");
            }
        }
    }

    #[test]
    fn twisted_reduction_arithmetic() {
        let spec = twisted_spec(TwistClass::A2Odd { m: 2 }, 2, true).unwrap();
        let r = twisted_reduce(&spec, 6).unwrap();
        assert_eq!(r.base_power, 3);
        assert_eq!(r.substitution_exponent, 1);
        let r = twisted_reduce(&spec, 4).unwrap();
        assert_eq!(r.base_power, 2);
        assert_eq!(r.substitution_exponent, 1);
        let spec3 = twisted_spec(TwistClass::D4Fold, 3, true).unwrap();
        let r = twisted_reduce(&spec3, 5).unwrap();
        assert_eq!((r.base_power, r.substitution_exponent), (5, 3));
        assert_eq!(r.survival_modulus, 9);

        let e6f = twisted_spec(TwistClass::E6Fold, 2, true).unwrap();
        assert_eq!(twisted_reduce(&e6f, 8).unwrap().threshold_power, 2);

        assert!(matches!(
            twisted_reduce(&adjoint_spec("G", 2).unwrap(), 2),
            Err(CongruentialError::NotTwisted)
        ));
        assert!(matches!(
            independence_threshold(&spec),
            Err(CongruentialError::Twisted)
        ));
    }

    #[test]
    fn cycled_scalar_is_uniform() {
        let spec = twisted_spec(TwistClass::CycleU { m: 1 }, 4, true).unwrap();
        assert_eq!(spec.root_datum.rank, 0);
        for p in 1..=6 {
            assert!(w_p(&spec, p).unwrap().is_trivial());
            let r = twisted_reduce(&spec, p).unwrap();
            assert_eq!(r.base_power * gcd(4, p), p);
        }
    }

    #[test]
    fn even_twist_classes_share_effective_data() {
        for m in 2..=4 {
            let a = twisted_spec(TwistClass::A2Even { m }, 1, false).unwrap();
            let d = twisted_spec(TwistClass::D2 { m: m + 1 }, 2, false).unwrap();
            let two = rat_int(2);
            let scaled: Vec<RatVec> = a
                .root_datum
                .simple_roots
                .iter()
                .map(|r| vec_scale(r, &two))
                .collect();
            assert_eq!(scaled, d.root_datum.simple_roots);
            assert!(a.lattice.scale(&two).same_lattice(&d.lattice));
            for p in 1..=12 {
                let ra = twisted_reduce(&a, p).unwrap();
                let rd = twisted_reduce(&d, p).unwrap();
                assert_eq!(ra.survival_modulus, rd.survival_modulus);
                assert_eq!(ra.threshold_power, rd.threshold_power);
            }
        }
    }

    fn identity_mat(dim: usize) -> Vec<RatVec> {
        (0..dim)
            .map(|i| {
                let mut row = zeros(dim);
                row[i] = rat_int(1);
                row
            })
            .collect()
    }

    fn mat_mul(a: &[RatVec], b: &[RatVec]) -> Vec<RatVec> {
        let n = a.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| a[i][k].clone() * b[k][j].clone()).sum())
                    .collect()
            })
            .collect()
    }

    fn mat_apply(m: &[RatVec], x: &[Rat]) -> RatVec {
        m.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a.clone() * b.clone()).sum())
            .collect()
    }

    fn reflection_matrix(dim: usize, root: &RatVec) -> Vec<RatVec> {
        let mut cols: Vec<RatVec> = Vec::new();
        for j in 0..dim {
            let mut e = zeros(dim);
            e[j] = rat_int(1);
            cols.push(reflect_in_root(&e, root));
        }
        (0..dim)
            .map(|i| (0..dim).map(|j| cols[j][i].clone()).collect())
            .collect()
    }

    fn matrix_closure(dim: usize, gens: &[Vec<RatVec>]) -> Vec<Vec<RatVec>> {
        let mut elems = vec![identity_mat(dim)];
        let mut frontier = vec![identity_mat(dim)];
        while let Some(w) = frontier.pop() {
            for g in gens {
                let p = mat_mul(g, &w);
                if !elems.contains(&p) {
                    elems.push(p.clone());
                    frontier.push(p);
                }
            }
        }
        elems
    }

    #[test]
    fn brute_force_enumeration_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (family, rank) in [("A", 1), ("A", 2), ("B", 2), ("G", 2), ("A", 3), ("B", 3)] {
            let rd = build_root_datum(family, rank).unwrap();
            let refl: Vec<_> = rd
                .simple_roots
                .iter()
                .map(|a| reflection_matrix(rd.dim, a))
                .collect();
            let weyl = matrix_closure(rd.dim, &refl);
            assert_eq!(BigInt::from(weyl.len()), rd.weyl_order);

            let lam = rd.root_lattice.clone();
            let (_, lam_a) = translation_lattices(&rd, &lam).unwrap();
            for _ in 0..100 {
                let mut v = zeros(rd.dim);
                for a in &rd.simple_roots {
                    let num = rng.gen_range(-6i64..=6);
                    let den = rng.gen_range(1i64..=4);
                    v = vec_add(&v, &vec_scale(a, &rat(num, den)));
                }
                let stab: Vec<&Vec<RatVec>> = weyl
                    .iter()
                    .filter(|w| lam_a.contains(&vec_sub(&mat_apply(w, &v), &v)))
                    .collect();
                let cg = congruential_subgroup(&rd, &lam, &v).unwrap();
                assert_eq!(BigInt::from(stab.len()), cg.order, "{family}{rank} v={v:?}");
                assert_eq!(cg.automorphism_part.len(), 1);

                let gens: Vec<_> = cg
                    .generator_roots
                    .iter()
                    .map(|r| reflection_matrix(rd.dim, r))
                    .collect();
                for g in &gens {
                    assert!(stab.iter().any(|w| *w == g), "generator outside stabilizer");
                }
                assert_eq!(matrix_closure(rd.dim, &gens).len(), stab.len());
            }
        }
    }

    #[test]
    fn generators_translate_by_the_spec_lattice() {
        for (spec, ps) in [
            (adjoint_spec("G", 2).unwrap(), vec![2, 3, 4, 5]),
            (adjoint_spec("F", 4).unwrap(), vec![2, 3, 6]),
            (special_unitary_spec(4), vec![2, 4]),
            (unitary_spec(5), vec![2, 3]),
        ] {
            for p in ps {
                let v = vec_scale(
                    &spec.root_datum.weyl_vector,
                    &(rat_int(1) / rat_int(p as i64)),
                );
                let cg = w_p(&spec, p).unwrap();
                for r in &cg.generator_roots {
                    let diff = vec_sub(&reflect_in_root(&v, r), &v);
                    assert!(spec.lattice.contains(&diff), "{} p={p}", spec.label);
                }
                // Every reflection-part root is an ambient root.
                for b in &cg.weyl_part.positive_roots {
                    let hit = spec.root_datum.positive_roots.iter().any(|r| {
                        *r == *b || is_zero_vec(&vec_add(r, b))
                    });
                    assert!(hit, "subsystem root escapes the ambient system");
                }
            }
        }
    }

    #[test]
    fn isometry_classes_normalize_the_reflection_part() {
        for n in 2..=5 {
            let spec = special_unitary_spec(n);
            for p in 1..=6 {
                let cg = w_p(&spec, p).unwrap();
                if cg.weyl_part.rank == 0 {
                    continue;
                }
                let scoped_walls: Vec<RatVec> = cg.weyl_part.simple_roots.clone();
                for auto in &cg.automorphism_part {
                    for b in &scoped_walls {
                        let image = auto.element.apply_linear(b);
                        let inside = cg.weyl_part.positive_roots.iter().any(|r| {
                            *r == image || is_zero_vec(&vec_add(r, &image))
                        });
                        assert!(inside, "SU({n}) p={p} conjugate leaves the subsystem");
                    }
                }
            }
        }
    }

    #[test]
    fn weyl_vector_condition_is_exact_projection() {
        let g2 = adjoint_spec("G", 2).unwrap();
        let cg = w_p(&g2, 2).unwrap();
        let proj = project_onto_span(&cg.weyl_part.simple_roots, &cg.v_tilde);
        assert_ne!(proj, cg.weyl_part.weyl_vector);
        // The pairing of v_tilde with each wall root stays positive even when
        // the condition fails: the stabilizer sees a dominant regular point.
        for b in &cg.weyl_part.simple_roots {
            let pairing = dot(&cg.v_tilde, b) * rat_int(2) / dot(b, b);
            assert!(pairing > rat_int(0));
        }
    }
}
