//! Finite groups acting on a metric space by bijections.
//!
//! A group element is a [`PointBijection`] — a permutation of the point
//! indices. [`ActingGroup::close_generators`] completes any finite set of
//! bijections to the group they generate. Every bijection of a finite metric
//! space is automatically bi-Lipschitz; [`distortion_bounds`] measures by how
//! much a given action stretches and compresses distances, and
//! [`average_metric`] builds the invariant metric obtained by averaging the
//! original distances over the group, under which the same action becomes
//! isometric.
//!
//! Nothing here models a topology on the group: a finite group is discrete,
//! every scalar function on it is continuous, and averaging over it is a
//! plain finite mean.

use std::collections::HashMap;

use crate::metric::{MetricError, PointedMetricSpace};
use crate::scalar::Scalar;

/// Generated groups larger than this many elements are rejected.
pub const DEFAULT_CLOSURE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("permutation image list has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("image list is not a bijection: index {0} appears twice")]
    NotBijective(usize),
    #[error("image index {0} is out of range")]
    OutOfRange(usize),
    #[error("generated group exceeds the closure limit of {0} elements")]
    ClosureExceedsLimit(usize),
    #[error("generators act on different point counts")]
    MixedSizes,
    #[error("unknown point label {0:?} in generator")]
    UnknownLabel(String),
}

/// A bijection of `{0, .., n-1}`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointBijection {
    map: Vec<usize>,
}

impl PointBijection {
    /// Wraps an image list after checking it is a bijection.
    pub fn from_images(map: Vec<usize>) -> Result<Self, GroupError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &img in &map {
            if img >= n {
                return Err(GroupError::OutOfRange(img));
            }
            if seen[img] {
                return Err(GroupError::NotBijective(img));
            }
            seen[img] = true;
        }
        Ok(PointBijection { map })
    }

    pub fn identity(n: usize) -> Self {
        PointBijection { map: (0..n).collect() }
    }

    /// Number of points acted on.
    pub fn n(&self) -> usize {
        self.map.len()
    }

    /// Image of point `x`.
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `self` after `other`: `(self * other)(x) = self(other(x))`.
    pub fn compose(&self, other: &PointBijection) -> PointBijection {
        PointBijection { map: other.map.iter().map(|&x| self.map[x]).collect() }
    }

    pub fn inverse(&self) -> PointBijection {
        let mut inv = vec![0; self.map.len()];
        for (x, &img) in self.map.iter().enumerate() {
            inv[img] = x;
        }
        PointBijection { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &img)| i == img)
    }

    pub fn images(&self) -> &[usize] {
        &self.map
    }
}

/// A finite group of point bijections, closed under composition and inverse.
///
/// Elements are stored in a canonical order (lexicographic by image list),
/// so the identity is always element `0` and reports are reproducible no
/// matter how the group was described.
#[derive(Debug, Clone)]
pub struct ActingGroup {
    elements: Vec<PointBijection>,
    generators: Vec<usize>,
}

impl ActingGroup {
    /// Breadth-first closure of a generating set.
    ///
    /// The identity is always included. Positive words in the generators
    /// exhaust the generated group (each element of a finite group is a
    /// power of itself past its order, so inverses come for free), and the
    /// closure aborts once it would exceed `limit` elements.
    pub fn close_generators(
        generators: Vec<PointBijection>,
        limit: usize,
    ) -> Result<Self, GroupError> {
        let n = match generators.first() {
            Some(g) => g.n(),
            None => panic!(
                "close_generators needs at least one generator; \
                 use ActingGroup::trivial(n) for the trivial group"
            ),
        };
        if generators.iter().any(|g| g.n() != n) {
            return Err(GroupError::MixedSizes);
        }

        let mut elements = vec![PointBijection::identity(n)];
        let mut index: HashMap<Vec<usize>, usize> =
            HashMap::from([(elements[0].map.clone(), 0)]);
        let mut frontier = 0;
        while frontier < elements.len() {
            let current = elements[frontier].clone();
            frontier += 1;
            for g in &generators {
                let next = current.compose(g);
                if !index.contains_key(&next.map) {
                    if elements.len() >= limit {
                        return Err(GroupError::ClosureExceedsLimit(limit));
                    }
                    index.insert(next.map.clone(), elements.len());
                    elements.push(next);
                }
            }
        }

        elements.sort();
        let find = |g: &PointBijection| {
            elements.binary_search(g).expect("generator is in its own closure")
        };
        let mut generator_ids: Vec<usize> = Vec::new();
        for g in &generators {
            let id = find(g);
            // The identity contributes nothing as a generator; duplicates
            // add nothing either.
            if !g.is_identity() && !generator_ids.contains(&id) {
                generator_ids.push(id);
            }
        }
        Ok(ActingGroup { elements, generators: generator_ids })
    }

    /// The one-element group on `n` points.
    pub fn trivial(n: usize) -> Self {
        ActingGroup { elements: vec![PointBijection::identity(n)], generators: vec![] }
    }

    /// Group order.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Number of points acted on.
    pub fn n(&self) -> usize {
        self.elements[0].n()
    }

    pub fn elements(&self) -> &[PointBijection] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> &PointBijection {
        &self.elements[id]
    }

    /// Index of the identity element (always 0 in canonical order).
    pub fn identity_id(&self) -> usize {
        0
    }

    /// Indices of the supplied generators (identity and duplicates dropped).
    pub fn generator_ids(&self) -> &[usize] {
        &self.generators
    }

    /// The orbit of a point, sorted by index.
    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n()];
        for g in &self.elements {
            seen[g.apply(x)] = true;
        }
        (0..self.n()).filter(|&i| seen[i]).collect()
    }

    /// All orbits and the point-to-orbit map. Orbits are numbered by their
    /// smallest member, in increasing order.
    pub fn orbits(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let n = self.n();
        let mut orbit_of = vec![usize::MAX; n];
        let mut orbits = Vec::new();
        for x in 0..n {
            if orbit_of[x] != usize::MAX {
                continue;
            }
            let members = self.orbit(x);
            let id = orbits.len();
            for &m in &members {
                orbit_of[m] = id;
            }
            orbits.push(members);
        }
        (orbits, orbit_of)
    }
}

/// A group element together with a pair of points, identifying one distance
/// comparison `d(x, y)` versus `d(gx, gy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionWitness {
    /// Element index within the group's canonical order.
    pub g: usize,
    pub x: usize,
    pub y: usize,
}

/// Error for operations that require an isometric action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("action is not isometric: element {} moves the distance between points {} and {}", .0.g, .0.x, .0.y)]
pub struct NotIsometric(pub ActionWitness);

/// The extreme distance ratios of an action.
///
/// `lower` is the least and `upper` the greatest value of
/// `d(x, y) / d(gx, gy)` over all group elements and point pairs, so that
/// `lower * d(gx, gy) <= d(x, y) <= upper * d(gx, gy)` always holds, and
/// `lower <= 1 <= upper` because the identity is in the group. The action is
/// isometric exactly when both bounds equal one.
#[derive(Debug, Clone)]
pub struct DistortionBounds<S> {
    pub lower: S,
    pub upper: S,
    /// First `(g, x, y)` attaining `lower`, scanning elements in canonical
    /// order and pairs lexicographically.
    pub lower_witness: ActionWitness,
    /// First `(g, x, y)` attaining `upper`, same scan order.
    pub upper_witness: ActionWitness,
}

impl<S: Scalar> DistortionBounds<S> {
    pub fn is_isometric(&self) -> bool {
        self.lower.eq_scalar(&S::one()) && self.upper.eq_scalar(&S::one())
    }
}

/// Scans every element and point pair for the extreme distance ratios.
///
/// Panics if the group and space disagree on the number of points.
pub fn distortion_bounds<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
) -> DistortionBounds<S> {
    assert_eq!(space.n(), group.n(), "group acts on a different point count");
    let mut lower: Option<(S, ActionWitness)> = None;
    let mut upper: Option<(S, ActionWitness)> = None;
    for (gid, g) in group.elements().iter().enumerate() {
        for x in 0..space.n() {
            for y in (x + 1)..space.n() {
                let ratio =
                    space.d(x, y).clone() / space.d(g.apply(x), g.apply(y)).clone();
                let witness = ActionWitness { g: gid, x, y };
                match &lower {
                    Some((best, _)) if !ratio.lt_scalar(best) => {}
                    _ => lower = Some((ratio.clone(), witness)),
                }
                match &upper {
                    Some((best, _)) if !best.lt_scalar(&ratio) => {}
                    _ => upper = Some((ratio, witness)),
                }
            }
        }
    }
    // A single-point space admits no pairs; every action on it is isometric.
    let one = S::one;
    let trivial = ActionWitness { g: 0, x: 0, y: 0 };
    let (lower, lower_witness) = lower.unwrap_or((one(), trivial));
    let (upper, upper_witness) = upper.unwrap_or((one(), trivial));
    DistortionBounds { lower, upper, lower_witness, upper_witness }
}

/// Checks whether the action preserves every distance, reporting the first
/// violation in scan order otherwise.
pub fn check_isometric<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
) -> Result<(), NotIsometric> {
    assert_eq!(space.n(), group.n(), "group acts on a different point count");
    for (gid, g) in group.elements().iter().enumerate() {
        for x in 0..space.n() {
            for y in (x + 1)..space.n() {
                if !space.d(x, y).eq_scalar(space.d(g.apply(x), g.apply(y))) {
                    return Err(NotIsometric(ActionWitness { g: gid, x, y }));
                }
            }
        }
    }
    Ok(())
}

/// The group-averaged metric `D(x, y) = mean over g of d(gx, gy)`.
///
/// The same group acts isometrically on the result, and the original metric
/// is sandwiched between `lower * D` and `upper * D` where `lower`/`upper`
/// are the distortion bounds of the action on the original metric. The
/// averaged matrix is re-validated before being returned.
pub fn average_metric<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
) -> Result<PointedMetricSpace<S>, MetricError> {
    assert_eq!(space.n(), group.n(), "group acts on a different point count");
    let n = space.n();
    let order = S::from_int(group.order() as i64);
    let mut matrix = vec![vec![S::zero(); n]; n];
    for x in 0..n {
        for y in (x + 1)..n {
            let total = S::sum_of(
                group
                    .elements()
                    .iter()
                    .map(|g| space.d(g.apply(x), g.apply(y)).clone()),
            );
            let avg = total / order.clone();
            matrix[x][y] = avg.clone();
            matrix[y][x] = avg;
        }
    }
    PointedMetricSpace::new(
        space.labels().to_vec(),
        space.label(space.base()),
        matrix,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num::BigRational;

    fn perm(images: &[usize]) -> PointBijection {
        PointBijection::from_images(images.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_bijections() {
        assert_eq!(
            PointBijection::from_images(vec![0, 0]),
            Err(GroupError::NotBijective(0))
        );
        assert_eq!(
            PointBijection::from_images(vec![0, 5]),
            Err(GroupError::OutOfRange(5))
        );
    }

    #[test]
    fn composition_and_inverse_behave_as_functions() {
        let a = perm(&[1, 2, 0]);
        let b = perm(&[0, 2, 1]);
        // (a * b)(x) = a(b(x))
        for x in 0..3 {
            assert_eq!(a.compose(&b).apply(x), a.apply(b.apply(x)));
        }
        assert!(a.compose(&a.inverse()).is_identity());
        assert!(a.inverse().compose(&a).is_identity());
    }

    #[test]
    fn closure_of_a_four_cycle_has_order_four() {
        // Oracle: the four powers of the cycle, enumerated directly.
        let c = perm(&[1, 2, 3, 0]);
        let mut powers = vec![PointBijection::identity(4)];
        for _ in 0..3 {
            let next = c.compose(powers.last().unwrap());
            powers.push(next);
        }
        powers.sort();

        let group = ActingGroup::close_generators(vec![c], DEFAULT_CLOSURE_LIMIT).unwrap();
        assert_eq!(group.order(), 4);
        assert_eq!(group.elements(), powers.as_slice());
        assert!(group.element(group.identity_id()).is_identity());
    }

    #[test]
    fn closure_is_a_group() {
        let group = ActingGroup::close_generators(
            vec![perm(&[1, 0, 2, 3]), perm(&[0, 2, 3, 1])],
            DEFAULT_CLOSURE_LIMIT,
        )
        .unwrap();
        // Exhaustive group-axiom check: closed under composition and inverse.
        for u in group.elements() {
            assert!(group.elements().binary_search(&u.inverse()).is_ok());
            for v in group.elements() {
                assert!(group.elements().binary_search(&u.compose(v)).is_ok());
            }
        }
    }

    #[test]
    fn closure_limit_is_enforced() {
        // The two generators below generate the full symmetric group S6,
        // of order 720.
        let err = ActingGroup::close_generators(
            vec![perm(&[1, 2, 3, 4, 5, 0]), perm(&[1, 0, 2, 3, 4, 5])],
            100,
        )
        .unwrap_err();
        assert_eq!(err, GroupError::ClosureExceedsLimit(100));
    }

    #[test]
    fn identity_generators_are_dropped() {
        let group = ActingGroup::close_generators(
            vec![PointBijection::identity(3), perm(&[0, 2, 1]), perm(&[0, 2, 1])],
            DEFAULT_CLOSURE_LIMIT,
        )
        .unwrap();
        assert_eq!(group.order(), 2);
        assert_eq!(group.generator_ids().len(), 1);
    }

    #[test]
    fn orbits_partition_the_points() {
        let group = ActingGroup::close_generators(
            vec![perm(&[0, 2, 1, 3])],
            DEFAULT_CLOSURE_LIMIT,
        )
        .unwrap();
        let (orbits, orbit_of) = group.orbits();
        assert_eq!(orbits, vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(orbit_of, vec![0, 1, 1, 2]);
        assert_eq!(group.orbit(2), vec![1, 2]);
    }

    fn asymmetric_space() -> PointedMetricSpace<BigRational> {
        PointedMetricSpace::from_int_matrix(
            &["0", "a", "b"],
            "0",
            &[&[0, 1, 3], &[1, 0, 2], &[3, 2, 0]],
        )
        .unwrap()
    }

    #[test]
    fn distortion_of_a_swap_on_an_asymmetric_space() {
        // Oracle: scan all (g, x, y) ratios by hand.
        let space = asymmetric_space();
        let group = ActingGroup::close_generators(
            vec![perm(&[0, 2, 1])],
            DEFAULT_CLOSURE_LIMIT,
        )
        .unwrap();
        let mut ratios = Vec::new();
        for g in group.elements() {
            for x in 0..3 {
                for y in (x + 1)..3 {
                    ratios.push(
                        space.d(x, y).clone() / space.d(g.apply(x), g.apply(y)).clone(),
                    );
                }
            }
        }
        let min = ratios.iter().cloned().reduce(BigRational::min_scalar).unwrap();
        let max = ratios.iter().cloned().reduce(BigRational::max_scalar).unwrap();

        let bounds = distortion_bounds(&space, &group);
        assert_eq!(bounds.lower, min);
        assert_eq!(bounds.upper, max);
        assert_eq!(bounds.lower, rat(1, 3));
        assert_eq!(bounds.upper, rat(3, 1));
        assert!(!bounds.is_isometric());
        // The swap is element 1 in canonical order (identity sorts first);
        // the first pair attaining 1/3 is (0, a).
        assert_eq!(bounds.lower_witness, ActionWitness { g: 1, x: 0, y: 1 });
        assert_eq!(bounds.upper_witness, ActionWitness { g: 1, x: 0, y: 2 });
    }

    #[test]
    fn averaging_makes_the_swap_isometric() {
        let space = asymmetric_space();
        let group = ActingGroup::close_generators(
            vec![perm(&[0, 2, 1])],
            DEFAULT_CLOSURE_LIMIT,
        )
        .unwrap();
        let averaged = average_metric(&space, &group).unwrap();
        assert_eq!(averaged.d(0, 1), &rat(2, 1));
        assert_eq!(averaged.d(0, 2), &rat(2, 1));
        assert_eq!(averaged.d(1, 2), &rat(2, 1));
        assert!(check_isometric(&averaged, &group).is_ok());
        assert!(distortion_bounds(&averaged, &group).is_isometric());

        // Sandwich: lower * D <= d <= upper * D for the original metric.
        let bounds = distortion_bounds(&space, &group);
        for x in 0..3 {
            for y in 0..3 {
                if x == y {
                    continue;
                }
                let d = space.d(x, y).clone();
                let avg = averaged.d(x, y).clone();
                assert!((bounds.lower.clone() * avg.clone()).le_scalar(&d));
                assert!(d.le_scalar(&(bounds.upper.clone() * avg)));
            }
        }
    }

    #[test]
    fn non_isometric_actions_are_flagged_with_a_witness() {
        let space = asymmetric_space();
        let group = ActingGroup::close_generators(
            vec![perm(&[0, 2, 1])],
            DEFAULT_CLOSURE_LIMIT,
        )
        .unwrap();
        let err = check_isometric(&space, &group).unwrap_err();
        assert_eq!(err.0, ActionWitness { g: 1, x: 0, y: 1 });
    }
}
