//! Averaging projections and the quotient identifications they induce.
//!
//! Each group element `g` acts on the free space by the linear isometry
//! `T_g(delta(x)) = delta(gx) - delta(g.base)` — the pushforward of the
//! (generally not base-preserving) bijection, re-anchored at the base. The
//! assignment `g -> T_g` is a homomorphism, and averaging it over a finite
//! group acting isometrically yields [`project_free`], a norm-one projection
//! whose fixed space consists exactly of the averaged vectors and whose
//! kernel is spanned by the differences `delta(gx) - delta(x)`.
//!
//! On the dual side, [`project_lip`] averages the conjugate action
//! `S_g(f)(m) = f(g^-1 m) - f(g^-1 base)` and is the adjoint of
//! [`project_free`] under the dual pairing.
//!
//! Three identifications tie the construction to the orbit space:
//! [`psi`] lifts a function on orbits to an invariant function upstairs
//! (isometrically, with inverse [`psi_inverse`]); the pushforward of vectors
//! descends to an isometry from the quotient of the free space by the kernel
//! onto the free space of the orbit space (certified numerically through
//! [`crate::free::quotient_norm`]); and [`t_embed`] maps the free space of
//! the orbit space isometrically onto the range of the projection, splitting
//! the pushforward. Everything here is finite-dimensional, so the averaged
//! operator lands in the free space itself and no duality detour is needed
//! to define it.
//!
//! All operations require the action to be isometric; average the metric
//! first (see [`crate::group::average_metric`]) when it is not.

use crate::free::{basis_index, generator_differences, FreeVector, LipFunction};
use crate::group::{check_isometric, ActingGroup, NotIsometric, PointBijection};
use crate::linalg::Matrix;
use crate::metric::PointedMetricSpace;
use crate::quotient::QuotientSpace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjectionError {
    #[error(transparent)]
    NotIsometric(#[from] NotIsometric),
    #[error("function is not constant on orbits: differs at points {x} and {y}")]
    NotConstantOnOrbit { x: usize, y: usize },
    #[error("quotient space does not match the group's orbits")]
    QuotientMismatch,
}

/// The matrix of `T_g` in the canonical basis `{delta(x) : x != base}`.
///
/// Column `x` holds `delta(gx) - delta(g.base)`; entries hitting the base
/// vanish. No isometry assumption is needed to write the matrix down.
pub fn induced_map<S: Scalar>(
    space: &PointedMetricSpace<S>,
    g: &PointBijection,
) -> Matrix<S> {
    let n = space.n();
    assert_eq!(g.n(), n, "bijection acts on a different point count");
    let dim = n - 1;
    let mut m = Matrix::zero(dim, dim);
    let g_base = g.apply(space.base());
    for x in space.support_points() {
        let col = basis_index(space, x);
        let gx = g.apply(x);
        if gx != space.base() {
            *m.at_mut(basis_index(space, gx), col) = S::one();
        }
        if g_base != space.base() {
            let row = basis_index(space, g_base);
            *m.at_mut(row, col) = m.at(row, col).clone() - S::one();
        }
    }
    m
}

/// `T_g v`: pushes each supported point through `g` and re-anchors at the
/// base. A linear isometry whenever `g` preserves distances.
pub fn apply_induced<S: Scalar>(
    space: &PointedMetricSpace<S>,
    g: &PointBijection,
    v: &FreeVector<S>,
) -> FreeVector<S> {
    let mut pairs: Vec<(usize, S)> =
        v.entries().map(|(x, c)| (g.apply(x), c.clone())).collect();
    pairs.push((g.apply(space.base()), S::zero() - v.mass()));
    FreeVector::from_pairs(space, &pairs).expect("bijection stays in range")
}

/// `A_g v = T_g v + delta(g.base)`: the affine isometry extending `g`
/// itself (it sends `delta(x)` to `delta(gx)` for every point, base
/// included). Averaging is blind to the affine shift: the group average of
/// `delta(g.base)` over `g` is the same as the average of `delta(base)`,
/// which is zero, so [`project_free`] composed with `A_g` equals
/// [`project_free`].
pub fn apply_affine<S: Scalar>(
    space: &PointedMetricSpace<S>,
    g: &PointBijection,
    v: &FreeVector<S>,
) -> FreeVector<S> {
    let shift = FreeVector::delta(space, g.apply(space.base()));
    apply_induced(space, g, v).add(&shift)
}

/// `S_g f`: the conjugate action on functions,
/// `(S_g f)(m) = f(g^-1 m) - f(g^-1 base)`. Satisfies
/// `<S_g f, T_g v> = <f, v>`.
pub fn apply_dual<S: Scalar>(
    space: &PointedMetricSpace<S>,
    g: &PointBijection,
    f: &LipFunction<S>,
) -> LipFunction<S> {
    let ginv = g.inverse();
    let at_base = f.value(ginv.apply(space.base())).clone();
    let values = (0..space.n())
        .map(|m| f.value(ginv.apply(m)).clone() - at_base.clone())
        .collect();
    LipFunction::from_values(space, values).expect("base maps to zero by construction")
}

/// The group average of the induced isometries applied to `v`:
/// `(1/|G|) sum_g T_g v`. A norm-one linear projection of the free space
/// onto its averaged (invariant) vectors.
pub fn project_free<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
    v: &FreeVector<S>,
) -> Result<FreeVector<S>, ProjectionError> {
    check_isometric(space, group)?;
    Ok(project_free_unchecked(space, group, v))
}

fn project_free_unchecked<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
    v: &FreeVector<S>,
) -> FreeVector<S> {
    let mut pairs: Vec<(usize, S)> = Vec::new();
    let mass = v.mass();
    for g in group.elements() {
        for (x, c) in v.entries() {
            pairs.push((g.apply(x), c.clone()));
        }
        pairs.push((g.apply(space.base()), S::zero() - mass.clone()));
    }
    let total = FreeVector::from_pairs(space, &pairs).expect("bijections stay in range");
    total.scale(&(S::one() / S::from_int(group.order() as i64)))
}

/// The matrix of [`project_free`] in the canonical basis.
pub fn project_free_matrix<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
) -> Result<Matrix<S>, ProjectionError> {
    check_isometric(space, group)?;
    let dim = space.n() - 1;
    let mut sum = Matrix::zero(dim, dim);
    for g in group.elements() {
        sum = sum.add(&induced_map(space, g));
    }
    Ok(sum.scale(&(S::one() / S::from_int(group.order() as i64))))
}

/// The group average of the conjugate action on functions:
/// `(P f)(m) = (1/|G|) sum_g [f(gm) - f(g.base)]`. Adjoint to
/// [`project_free`]: `<P f, v> = <f, R v>`.
pub fn project_lip<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
    f: &LipFunction<S>,
) -> Result<LipFunction<S>, ProjectionError> {
    check_isometric(space, group)?;
    let order = S::from_int(group.order() as i64);
    let values = (0..space.n())
        .map(|m| {
            let total = S::sum_of(group.elements().iter().map(|g| {
                f.value(g.apply(m)).clone() - f.value(g.apply(space.base())).clone()
            }));
            total / order.clone()
        })
        .collect();
    Ok(LipFunction::from_values(space, values).expect("base averages to zero"))
}

/// Lifts a function on the orbit space to the invariant function
/// `x -> fq(orbit of x)`. An isometry onto the invariant Lipschitz
/// functions; [`psi_inverse`] inverts it.
pub fn psi<S: Scalar>(
    q: &QuotientSpace<S>,
    fq: &LipFunction<S>,
) -> LipFunction<S> {
    let values = (0..q.source_n())
        .map(|x| fq.value(q.orbit_of(x)).clone())
        .collect();
    // The source base lands in the quotient base orbit, where fq is zero.
    LipFunction::raw_from_values(values)
}

/// Descends an orbit-constant function to the orbit space. Fails with a
/// witnessing pair of points when the function is not constant on some
/// orbit.
pub fn psi_inverse<S: Scalar>(
    q: &QuotientSpace<S>,
    f: &LipFunction<S>,
) -> Result<LipFunction<S>, ProjectionError> {
    for orbit in q.orbits() {
        let first = orbit[0];
        for &other in &orbit[1..] {
            if !f.value(first).eq_scalar(f.value(other)) {
                return Err(ProjectionError::NotConstantOnOrbit { x: first, y: other });
            }
        }
    }
    let values = q.orbits().iter().map(|o| f.value(o[0]).clone()).collect();
    // Orbit-constancy plus the source function vanishing at its base force
    // the base orbit's value to be (tolerance-)zero.
    Ok(LipFunction::from_values(q.space(), values)
        .expect("base orbit value vanishes for an orbit-constant function"))
}

/// Embeds the free space of the orbit space into the source free space:
/// each orbit goes to the averaged image of any of its representatives
/// (representative choice does not matter — averaging washes it out).
/// A norm-preserving linear map onto the range of [`project_free`], and a
/// section of the pushforward.
pub fn t_embed<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
    q: &QuotientSpace<S>,
    w: &FreeVector<S>,
) -> Result<FreeVector<S>, ProjectionError> {
    check_isometric(space, group)?;
    let (orbits, _) = group.orbits();
    if orbits != q.orbits() {
        return Err(ProjectionError::QuotientMismatch);
    }
    let mut out = FreeVector::zero();
    for (o, c) in w.entries() {
        let rep = q.orbits()[o][0];
        let averaged =
            project_free_unchecked(space, group, &FreeVector::delta(space, rep));
        out = out.add(&averaged.scale(c));
    }
    Ok(out)
}

/// A basis of the invariant vectors: the null space of the stacked
/// `T_g - I` over the supplied generators (invariance under generators
/// forces invariance under the whole group).
pub fn fixed_space_basis<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
) -> Result<Vec<FreeVector<S>>, ProjectionError> {
    check_isometric(space, group)?;
    let dim = space.n() - 1;
    let mut rows: Vec<Vec<S>> = Vec::new();
    for &gid in group.generator_ids() {
        let mut diff = induced_map(space, group.element(gid));
        let id = Matrix::identity(dim);
        diff = diff.sub(&id);
        for r in 0..dim {
            rows.push(diff.row(r).to_vec());
        }
    }
    if rows.is_empty() {
        // Trivial group: everything is invariant.
        return Ok(space
            .support_points()
            .map(|x| FreeVector::delta(space, x))
            .collect());
    }
    let basis = Matrix::from_rows(rows).null_space_basis();
    Ok(basis
        .into_iter()
        .map(|dense| FreeVector::from_dense(space, &dense))
        .collect())
}

/// A canonical basis of the span of the differences `delta(gx) - delta(x)`
/// over the supplied generators — the kernel of [`project_free`].
pub fn kernel_basis<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
) -> Result<Vec<FreeVector<S>>, ProjectionError> {
    check_isometric(space, group)?;
    let diffs = generator_differences(space, group);
    if diffs.is_empty() {
        return Ok(Vec::new());
    }
    let rows = diffs.iter().map(|d| d.to_dense(space)).collect();
    let basis = Matrix::from_rows(rows).row_space_basis();
    Ok(basis
        .into_iter()
        .map(|dense| FreeVector::from_dense(space, &dense))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::{kr_norm, lip_norm, pairing, pushforward};
    use crate::group::DEFAULT_CLOSURE_LIMIT;
    use crate::linalg::same_row_span;
    use crate::scalar::{rat, Scalar};
    use num::BigRational;

    fn perm(images: &[usize]) -> PointBijection {
        PointBijection::from_images(images.to_vec()).unwrap()
    }

    fn tee() -> (PointedMetricSpace<BigRational>, ActingGroup) {
        let space = PointedMetricSpace::from_int_matrix(
            &["0", "a", "b"],
            "0",
            &[&[0, 1, 1], &[1, 0, 2], &[1, 2, 0]],
        )
        .unwrap();
        let group =
            ActingGroup::close_generators(vec![perm(&[0, 2, 1])], DEFAULT_CLOSURE_LIMIT)
                .unwrap();
        (space, group)
    }

    /// Four points on an L1 circle; the cyclic rotation moves the base.
    fn square() -> (PointedMetricSpace<BigRational>, ActingGroup) {
        let space = PointedMetricSpace::from_int_matrix(
            &["p0", "p1", "p2", "p3"],
            "p0",
            &[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]],
        )
        .unwrap();
        let group =
            ActingGroup::close_generators(vec![perm(&[1, 2, 3, 0])], DEFAULT_CLOSURE_LIMIT)
                .unwrap();
        (space, group)
    }

    #[test]
    fn induced_maps_form_a_homomorphism() {
        let (space, group) = square();
        for g in group.elements() {
            for h in group.elements() {
                let gh = g.compose(h);
                let lhs = induced_map(&space, &gh);
                let rhs = induced_map(&space, g).mul(&induced_map(&space, h));
                assert!(lhs.eq_matrix(&rhs));
            }
        }
        let id = induced_map(&space, group.element(group.identity_id()));
        assert!(id.eq_matrix(&Matrix::identity(3)));
    }

    #[test]
    fn induced_maps_preserve_molecule_norms() {
        let (space, group) = square();
        for g in group.elements() {
            for x in 0..4 {
                for y in 0..4 {
                    if x == y {
                        continue;
                    }
                    let m = FreeVector::delta(&space, x)
                        .sub(&FreeVector::delta(&space, y));
                    let image = apply_induced(&space, g, &m);
                    assert_eq!(kr_norm(&space, &m).0, kr_norm(&space, &image).0);
                }
            }
        }
    }

    #[test]
    fn matrix_and_direct_application_agree() {
        let (space, group) = square();
        let v =
            FreeVector::from_pairs(&space, &[(1, rat(2, 1)), (3, rat(-1, 2))]).unwrap();
        for g in group.elements() {
            let direct = apply_induced(&space, g, &v);
            let via_matrix = FreeVector::from_dense(
                &space,
                &induced_map(&space, g).apply(&v.to_dense(&space)),
            );
            assert_eq!(direct, via_matrix);
        }
    }

    #[test]
    fn dual_action_is_adjoint_to_the_induced_action() {
        let (space, group) = square();
        let v =
            FreeVector::from_pairs(&space, &[(1, rat(1, 1)), (2, rat(-2, 1))]).unwrap();
        let f = LipFunction::from_values(
            &space,
            vec![rat(0, 1), rat(1, 1), rat(-1, 1), rat(1, 2)],
        )
        .unwrap();
        for g in group.elements() {
            let lhs = pairing(&apply_dual(&space, g, &f), &apply_induced(&space, g, &v));
            let rhs = pairing(&f, &v);
            assert_eq!(lhs, rhs);
            // The conjugate action also preserves Lipschitz constants.
            assert_eq!(
                lip_norm(&space, &apply_dual(&space, g, &f)),
                lip_norm(&space, &f)
            );
        }
    }

    #[test]
    fn averaging_ignores_the_affine_shift() {
        let (space, group) = square();
        let v =
            FreeVector::from_pairs(&space, &[(1, rat(2, 1)), (2, rat(-1, 3))]).unwrap();
        for g in group.elements() {
            // A_g sends delta(x) to delta(gx) for every point, so on a
            // combination it moves the support and parks the affine
            // remainder (1 - mass) at the image of the base.
            let affine = apply_affine(&space, g, &v);
            let mut pairs: Vec<(usize, BigRational)> =
                v.entries().map(|(x, c)| (g.apply(x), c.clone())).collect();
            pairs.push((g.apply(space.base()), rat(1, 1) - v.mass()));
            let by_hand = FreeVector::from_pairs(&space, &pairs).unwrap();
            assert_eq!(affine, by_hand);
            assert_eq!(
                project_free(&space, &group, &affine).unwrap(),
                project_free(&space, &group, &v).unwrap()
            );
        }
    }

    #[test]
    fn averaging_the_swap_splits_the_mass() {
        let (space, group) = tee();
        let averaged = project_free(&space, &group, &FreeVector::delta(&space, 1)).unwrap();
        let expected = FreeVector::from_pairs(
            &space,
            &[(1, rat(1, 2)), (2, rat(1, 2))],
        )
        .unwrap();
        assert_eq!(averaged, expected);
    }

    #[test]
    fn averaging_a_transitive_rotation_kills_every_point() {
        let (space, group) = square();
        for x in 0..4 {
            let averaged =
                project_free(&space, &group, &FreeVector::delta(&space, x)).unwrap();
            assert!(averaged.is_zero());
        }
    }

    #[test]
    fn projection_is_idempotent_and_invariant() {
        let (space, group) = square();
        let r = project_free_matrix(&space, &group).unwrap();
        assert!(r.mul(&r).eq_matrix(&r));
        for g in group.elements() {
            let t = induced_map(&space, g);
            assert!(t.mul(&r).eq_matrix(&r));
            assert!(r.mul(&t).eq_matrix(&r));
        }
    }

    #[test]
    fn projection_never_expands_molecules() {
        let (space, group) = square();
        for x in 0..4 {
            for y in 0..4 {
                if x == y {
                    continue;
                }
                let m =
                    FreeVector::delta(&space, x).sub(&FreeVector::delta(&space, y));
                let (norm_m, _) = kr_norm(&space, &m);
                let (norm_rm, _) =
                    kr_norm(&space, &project_free(&space, &group, &m).unwrap());
                assert!(norm_rm.le_scalar(&norm_m));
            }
        }
    }

    #[test]
    fn swap_average_of_an_odd_function_vanishes() {
        let (space, group) = tee();
        let f = LipFunction::from_values(
            &space,
            vec![rat(0, 1), rat(1, 1), rat(-1, 1)],
        )
        .unwrap();
        let averaged = project_lip(&space, &group, &f).unwrap();
        assert_eq!(averaged, LipFunction::zero(&space));
    }

    #[test]
    fn dual_projection_is_the_adjoint_of_the_primal_one() {
        let (space, group) = square();
        let v =
            FreeVector::from_pairs(&space, &[(1, rat(3, 1)), (2, rat(-1, 1))]).unwrap();
        let f = LipFunction::from_values(
            &space,
            vec![rat(0, 1), rat(1, 2), rat(1, 1), rat(-1, 1)],
        )
        .unwrap();
        let lhs = pairing(&project_lip(&space, &group, &f).unwrap(), &v);
        let rhs = pairing(&f, &project_free(&space, &group, &v).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn psi_lifts_isometrically_and_inverts() {
        let (space, group) = tee();
        let q = QuotientSpace::build(&space, &group).unwrap();
        let fq = LipFunction::from_values(q.space(), vec![rat(0, 1), rat(1, 1)]).unwrap();
        let lifted = psi(&q, &fq);
        assert_eq!(lifted.value(0), &rat(0, 1));
        assert_eq!(lifted.value(1), &rat(1, 1));
        assert_eq!(lifted.value(2), &rat(1, 1));
        assert_eq!(lip_norm(&space, &lifted), lip_norm(q.space(), &fq));
        assert_eq!(psi_inverse(&q, &lifted).unwrap(), fq);
    }

    #[test]
    fn psi_inverse_rejects_non_invariant_functions() {
        let (space, group) = tee();
        let q = QuotientSpace::build(&space, &group).unwrap();
        let f = LipFunction::from_values(
            &space,
            vec![rat(0, 1), rat(1, 1), rat(-1, 1)],
        )
        .unwrap();
        assert_eq!(
            psi_inverse(&q, &f).unwrap_err(),
            ProjectionError::NotConstantOnOrbit { x: 1, y: 2 }
        );
    }

    #[test]
    fn embedding_splits_the_pushforward_isometrically() {
        let (space, group) = tee();
        let q = QuotientSpace::build(&space, &group).unwrap();
        let w = FreeVector::delta(q.space(), 1);
        let embedded = t_embed(&space, &group, &q, &w).unwrap();
        let expected =
            FreeVector::from_pairs(&space, &[(1, rat(1, 2)), (2, rat(1, 2))]).unwrap();
        assert_eq!(embedded, expected);
        assert_eq!(kr_norm(&space, &embedded).0, kr_norm(q.space(), &w).0);
        assert_eq!(pushforward(&q, &embedded), w);

        // Averaged evaluation against an invariant function recovers the
        // function's value on the orbit.
        let fq = LipFunction::from_values(q.space(), vec![rat(0, 1), rat(1, 1)]).unwrap();
        let lifted = psi(&q, &fq);
        for x in 0..space.n() {
            let averaged =
                project_free(&space, &group, &FreeVector::delta(&space, x)).unwrap();
            assert_eq!(pairing(&lifted, &averaged), fq.value(q.orbit_of(x)).clone());
        }
    }

    #[test]
    fn fixed_space_and_kernel_decompose_the_free_space() {
        let (space, group) = tee();
        let fixed = fixed_space_basis(&space, &group).unwrap();
        let kernel = kernel_basis(&space, &group).unwrap();
        assert_eq!(fixed.len(), 1);
        assert_eq!(kernel.len(), 1);
        assert_eq!(fixed.len() + kernel.len(), space.n() - 1);

        // The projection matrix has the same image and kernel.
        let r = project_free_matrix(&space, &group).unwrap();
        let dim = space.n() - 1;
        let image_rows: Vec<Vec<BigRational>> = space
            .support_points()
            .map(|x| {
                project_free(&space, &group, &FreeVector::delta(&space, x))
                    .unwrap()
                    .to_dense(&space)
            })
            .collect();
        let fixed_rows: Vec<Vec<BigRational>> =
            fixed.iter().map(|v| v.to_dense(&space)).collect();
        assert!(same_row_span(&image_rows, &fixed_rows, dim));

        let null_rows = r.null_space_basis();
        let kernel_rows: Vec<Vec<BigRational>> =
            kernel.iter().map(|v| v.to_dense(&space)).collect();
        assert!(same_row_span(&null_rows, &kernel_rows, dim));
    }

    #[test]
    fn transitive_rotation_has_no_invariant_vectors() {
        let (space, group) = square();
        assert!(fixed_space_basis(&space, &group).unwrap().is_empty());
        assert_eq!(kernel_basis(&space, &group).unwrap().len(), 3);
    }

    #[test]
    fn trivial_group_fixes_everything() {
        let space = PointedMetricSpace::<BigRational>::from_int_matrix(
            &["0", "a", "b"],
            "0",
            &[&[0, 1, 1], &[1, 0, 2], &[1, 2, 0]],
        )
        .unwrap();
        let group = ActingGroup::trivial(3);
        assert_eq!(fixed_space_basis(&space, &group).unwrap().len(), 2);
        assert!(kernel_basis(&space, &group).unwrap().is_empty());
        let v = FreeVector::from_pairs(&space, &[(1, rat(3, 1))]).unwrap();
        assert_eq!(project_free(&space, &group, &v).unwrap(), v);
    }

    #[test]
    fn non_isometric_actions_are_refused() {
        let space = PointedMetricSpace::<BigRational>::from_int_matrix(
            &["0", "a", "b"],
            "0",
            &[&[0, 1, 3], &[1, 0, 2], &[3, 2, 0]],
        )
        .unwrap();
        let group =
            ActingGroup::close_generators(vec![perm(&[0, 2, 1])], DEFAULT_CLOSURE_LIMIT)
                .unwrap();
        let v = FreeVector::delta(&space, 1);
        assert!(matches!(
            project_free(&space, &group, &v),
            Err(ProjectionError::NotIsometric(_))
        ));
    }
}
