//! Orbit quotients of isometric actions.
//!
//! When a group acts on a pointed metric space by isometries, the orbits
//! form a metric space of their own: the distance between two orbits is the
//! smallest distance between representatives, which for isometric actions
//! coincides with the Hausdorff distance between the orbits as sets. The
//! base point of the quotient is the orbit of the original base point.
//!
//! Building the quotient of a non-isometric action is refused — averaging
//! the metric first (see [`crate::group::average_metric`]) is the supported
//! way to make an action isometric.

use crate::group::{check_isometric, ActingGroup, NotIsometric};
use crate::metric::{MetricError, PointedMetricSpace};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuotientError {
    #[error(transparent)]
    NotIsometric(#[from] NotIsometric),
    /// The orbit distances failed metric validation. With exact arithmetic
    /// this cannot happen for an isometric action; it guards against
    /// tolerance abuse on the float backend.
    #[error("quotient distances do not form a metric: {0}")]
    Degenerate(MetricError),
}

/// The space of orbits of an isometric action.
#[derive(Debug, Clone)]
pub struct QuotientSpace<S> {
    space: PointedMetricSpace<S>,
    orbits: Vec<Vec<usize>>,
    orbit_of: Vec<usize>,
}

impl<S: Scalar> QuotientSpace<S> {
    /// Builds the orbit space of an isometric action.
    ///
    /// Orbits are numbered by their smallest member; the orbit containing
    /// point `i` of the source space is labelled with the source labels of
    /// its members, joined by commas inside braces (singletons keep plain
    /// braces: `{a}`).
    pub fn build(
        space: &PointedMetricSpace<S>,
        group: &ActingGroup,
    ) -> Result<Self, QuotientError> {
        check_isometric(space, group)?;
        let (orbits, orbit_of) = group.orbits();
        let k = orbits.len();
        let labels: Vec<String> = orbits
            .iter()
            .map(|members| {
                let names: Vec<&str> =
                    members.iter().map(|&m| space.label(m)).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect();
        let mut matrix = vec![vec![S::zero(); k]; k];
        for a in 0..k {
            for b in (a + 1)..k {
                let d = space
                    .min_set_distance(&orbits[a], &orbits[b])
                    .expect("orbits are non-empty");
                matrix[a][b] = d.clone();
                matrix[b][a] = d;
            }
        }
        let base_label = labels[orbit_of[space.base()]].clone();
        let qspace = PointedMetricSpace::new(labels, &base_label, matrix)
            .map_err(QuotientError::Degenerate)?;
        Ok(QuotientSpace { space: qspace, orbits, orbit_of })
    }

    /// The orbits as a metric space in its own right.
    pub fn space(&self) -> &PointedMetricSpace<S> {
        &self.space
    }

    /// Orbit membership lists, sorted, numbered by smallest member.
    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    /// The canonical projection: source point index to orbit index.
    pub fn orbit_of(&self, x: usize) -> usize {
        self.orbit_of[x]
    }

    /// Number of points of the source space this quotient was built from.
    pub fn source_n(&self) -> usize {
        self.orbit_of.len()
    }

    /// Number of orbits.
    pub fn k(&self) -> usize {
        self.orbits.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ActingGroup, PointBijection, DEFAULT_CLOSURE_LIMIT};
    use crate::scalar::{rat, Scalar};
    use num::BigRational;

    fn swap_instance() -> (PointedMetricSpace<BigRational>, ActingGroup) {
        let space = PointedMetricSpace::from_int_matrix(
            &["0", "a", "b"],
            "0",
            &[&[0, 1, 1], &[1, 0, 2], &[1, 2, 0]],
        )
        .unwrap();
        let group = ActingGroup::close_generators(
            vec![PointBijection::from_images(vec![0, 2, 1]).unwrap()],
            DEFAULT_CLOSURE_LIMIT,
        )
        .unwrap();
        (space, group)
    }

    #[test]
    fn swap_quotient_collapses_the_swapped_pair() {
        let (space, group) = swap_instance();
        let q = QuotientSpace::build(&space, &group).unwrap();
        assert_eq!(q.k(), 2);
        assert_eq!(q.orbits(), &[vec![0], vec![1, 2]]);
        assert_eq!(q.orbit_of(0), 0);
        assert_eq!(q.orbit_of(2), 1);
        assert_eq!(q.space().labels(), &["{0}".to_string(), "{a,b}".to_string()]);
        assert_eq!(q.space().base(), 0);
        assert_eq!(q.space().d(0, 1), &rat(1, 1));
    }

    #[test]
    fn orbit_distance_equals_hausdorff_distance_under_isometry() {
        let (space, group) = swap_instance();
        let q = QuotientSpace::build(&space, &group).unwrap();
        for a in 0..q.k() {
            for b in 0..q.k() {
                if a == b {
                    continue;
                }
                let min = space.min_set_distance(&q.orbits()[a], &q.orbits()[b]).unwrap();
                let haus = space.hausdorff_distance(&q.orbits()[a], &q.orbits()[b]).unwrap();
                assert_eq!(min, haus);
                assert_eq!(&min, q.space().d(a, b));
            }
        }
    }

    #[test]
    fn quotient_map_is_onto_and_contracts_distances() {
        let (space, group) = swap_instance();
        let q = QuotientSpace::build(&space, &group).unwrap();
        let mut hit = vec![false; q.k()];
        for x in 0..space.n() {
            hit[q.orbit_of(x)] = true;
            for y in 0..space.n() {
                if x == y {
                    continue;
                }
                let (a, b) = (q.orbit_of(x), q.orbit_of(y));
                if a != b {
                    assert!(q.space().d(a, b).le_scalar(space.d(x, y)));
                }
            }
        }
        assert!(hit.iter().all(|&h| h));
    }

    #[test]
    fn non_isometric_actions_are_refused() {
        let space = PointedMetricSpace::<BigRational>::from_int_matrix(
            &["0", "a", "b"],
            "0",
            &[&[0, 1, 3], &[1, 0, 2], &[3, 2, 0]],
        )
        .unwrap();
        let group = ActingGroup::close_generators(
            vec![PointBijection::from_images(vec![0, 2, 1]).unwrap()],
            DEFAULT_CLOSURE_LIMIT,
        )
        .unwrap();
        assert!(matches!(
            QuotientSpace::build(&space, &group),
            Err(QuotientError::NotIsometric(_))
        ));
    }

    #[test]
    fn trivial_group_gives_back_the_space() {
        let space = PointedMetricSpace::<BigRational>::from_int_matrix(
            &["0", "a"],
            "0",
            &[&[0, 2], &[2, 0]],
        )
        .unwrap();
        let q = QuotientSpace::build(&space, &ActingGroup::trivial(2)).unwrap();
        assert_eq!(q.k(), 2);
        assert_eq!(q.space().d(0, 1), space.d(0, 1));
        assert!(q.space().d(0, 1).eq_scalar(&BigRational::from_int(2)));
    }
}
