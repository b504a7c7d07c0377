//! Finite pointed metric spaces.
//!
//! A [`PointedMetricSpace`] is a finite set of labelled points with a
//! distinguished base point and a full distance matrix. Construction
//! validates the metric axioms and reports the first violated one together
//! with a witnessing pair or triple, so a bad instance file fails with a
//! pinpointed reason rather than a mysterious downstream error.
//!
//! Points are handled by index internally; labels exist for input, output
//! and error messages. The base point is the vanishing point of Lipschitz
//! functions and the anchor of the free space built over the metric.

use std::fmt::Write as _;

use crate::scalar::Scalar;

/// Which Minkowski norm to use when building a metric from coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Minkowski {
    /// Sum of absolute coordinate differences.
    One,
    /// Euclidean distance. Requires the float backend: square roots of
    /// rationals are generally irrational.
    Two,
    /// Maximum absolute coordinate difference.
    Inf,
}

/// A violated construction invariant, with the first witness found.
///
/// Witnesses are reported by label. `TriangleViolation { x, y, via }` means
/// `d(x, y) > d(x, via) + d(via, y)`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("distance matrix must be square of side {expected}, got row of length {got}")]
    BadShape { expected: usize, got: usize },
    #[error("no points given")]
    Empty,
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("base {0:?} is not among the point labels")]
    UnknownBase(String),
    #[error("self-distance of {0:?} is not zero")]
    NonzeroDiagonal(String),
    #[error("distance matrix is not symmetric at ({0:?}, {1:?})")]
    NotSymmetric(String, String),
    #[error("distance between distinct points {0:?} and {1:?} is not positive")]
    NegativeOrZeroOffDiagonal(String, String),
    #[error("triangle inequality fails: d({x:?}, {y:?}) > d({x:?}, {via:?}) + d({via:?}, {y:?})")]
    TriangleViolation { x: String, y: String, via: String },
    #[error("point set is empty")]
    EmptySet,
    #[error("euclidean coordinates require the float backend")]
    EuclideanNeedsFloat,
    #[error("coordinate rows must all have the same dimension")]
    RaggedCoords,
    #[error("points {0:?} and {1:?} have identical coordinates")]
    CoincidentCoords(String, String),
}

/// A finite metric space with named points and a distinguished base point.
#[derive(Debug, Clone)]
pub struct PointedMetricSpace<S> {
    labels: Vec<String>,
    base: usize,
    n: usize,
    dist: Vec<S>, // row-major n x n
}

impl<S: Scalar> PointedMetricSpace<S> {
    /// Validates and wraps a distance matrix.
    ///
    /// Checks, in order: shape, label distinctness, base membership, zero
    /// diagonal, symmetry, positivity off the diagonal, and the triangle
    /// inequality. The first violation is returned with its witness.
    /// On the float backend all comparisons are tolerance-aware.
    pub fn new(
        labels: Vec<String>,
        base_label: &str,
        matrix: Vec<Vec<S>>,
    ) -> Result<Self, MetricError> {
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if matrix.len() != n {
            return Err(MetricError::BadShape { expected: n, got: matrix.len() });
        }
        for row in &matrix {
            if row.len() != n {
                return Err(MetricError::BadShape { expected: n, got: row.len() });
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(MetricError::DuplicateLabel(l.clone()));
            }
        }
        let base = labels
            .iter()
            .position(|l| l == base_label)
            .ok_or_else(|| MetricError::UnknownBase(base_label.to_string()))?;

        let dist: Vec<S> = matrix.into_iter().flatten().collect();
        let space = PointedMetricSpace { labels, base, n, dist };
        space.check_axioms()?;
        Ok(space)
    }

    fn check_axioms(&self) -> Result<(), MetricError> {
        let zero = S::zero();
        let n = self.n;
        for i in 0..n {
            if !self.d(i, i).eq_scalar(&zero) {
                return Err(MetricError::NonzeroDiagonal(self.labels[i].clone()));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !self.d(i, j).eq_scalar(self.d(j, i)) {
                    return Err(MetricError::NotSymmetric(
                        self.labels[i].clone(),
                        self.labels[j].clone(),
                    ));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.d(i, j);
                if d.eq_scalar(&zero) || d.lt_scalar(&zero) {
                    return Err(MetricError::NegativeOrZeroOffDiagonal(
                        self.labels[i].clone(),
                        self.labels[j].clone(),
                    ));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                if y == x {
                    continue;
                }
                for via in 0..n {
                    if via == x || via == y {
                        continue;
                    }
                    let detour = self.d(x, via).clone() + self.d(via, y).clone();
                    if !self.d(x, y).le_tol(&detour) {
                        return Err(MetricError::TriangleViolation {
                            x: self.labels[x].clone(),
                            y: self.labels[y].clone(),
                            via: self.labels[via].clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds a space from integer distances — handy in tests and examples.
    pub fn from_int_matrix(
        labels: &[&str],
        base_label: &str,
        rows: &[&[i64]],
    ) -> Result<Self, MetricError> {
        let matrix = rows
            .iter()
            .map(|row| row.iter().map(|&v| S::from_int(v)).collect())
            .collect();
        Self::new(labels.iter().map(|s| s.to_string()).collect(), base_label, matrix)
    }

    /// Builds a space from a point cloud under the given Minkowski norm.
    ///
    /// Coordinates must be pairwise distinct. Euclidean distances need
    /// square roots, so `Minkowski::Two` is only available on the float
    /// backend.
    pub fn from_coords(
        labels: Vec<String>,
        base_label: &str,
        coords: &[Vec<S>],
        p: Minkowski,
    ) -> Result<Self, MetricError> {
        let n = labels.len();
        if coords.len() != n {
            return Err(MetricError::BadShape { expected: n, got: coords.len() });
        }
        if n == 0 {
            return Err(MetricError::Empty);
        }
        let dim = coords[0].len();
        if coords.iter().any(|c| c.len() != dim) {
            return Err(MetricError::RaggedCoords);
        }
        if p == Minkowski::Two && S::EXACT {
            return Err(MetricError::EuclideanNeedsFloat);
        }
        let mut matrix = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let diffs =
                    (0..dim).map(|k| (coords[i][k].clone() - coords[j][k].clone()).abs());
                let d = match p {
                    Minkowski::One => S::sum_of(diffs),
                    Minkowski::Inf => diffs.fold(S::zero(), S::max_scalar),
                    Minkowski::Two => {
                        let sq = S::sum_of(diffs.map(|t| t.clone() * t));
                        sq.sqrt().ok_or(MetricError::EuclideanNeedsFloat)?
                    }
                };
                if d.is_zero() {
                    return Err(MetricError::CoincidentCoords(
                        labels[i].clone(),
                        labels[j].clone(),
                    ));
                }
                matrix[i][j] = d.clone();
                matrix[j][i] = d;
            }
        }
        Self::new(labels, base_label, matrix)
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of the base point.
    pub fn base(&self) -> usize {
        self.base
    }

    /// The distance between points `i` and `j`.
    pub fn d(&self, i: usize, j: usize) -> &S {
        &self.dist[i * self.n + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// All point indices except the base, in order. These index the
    /// canonical basis of the free space over this metric.
    pub fn support_points(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| i != self.base)
    }

    /// The full distance matrix, row-major.
    pub fn matrix(&self) -> Vec<Vec<S>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.d(i, j).clone()).collect())
            .collect()
    }

    /// Rebuilds the space with the same labels/base over another backend.
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> PointedMetricSpace<T> {
        PointedMetricSpace {
            labels: self.labels.clone(),
            base: self.base,
            n: self.n,
            dist: self.dist.iter().map(f).collect(),
        }
    }

    /// Smallest distance between two non-empty point sets.
    pub fn min_set_distance(&self, a: &[usize], b: &[usize]) -> Result<S, MetricError> {
        let mut best: Option<S> = None;
        for &x in a {
            for &y in b {
                let d = self.d(x, y).clone();
                best = Some(match best {
                    None => d,
                    Some(cur) => cur.min_scalar(d),
                });
            }
        }
        best.ok_or(MetricError::EmptySet)
    }

    /// Hausdorff distance between two non-empty point sets: the larger of
    /// the two directed deviations `max_{x in A} min_{y in B} d(x, y)`.
    pub fn hausdorff_distance(&self, a: &[usize], b: &[usize]) -> Result<S, MetricError> {
        if a.is_empty() || b.is_empty() {
            return Err(MetricError::EmptySet);
        }
        let directed = |from: &[usize], to: &[usize]| -> S {
            from.iter()
                .map(|&x| {
                    to.iter()
                        .map(|&y| self.d(x, y).clone())
                        .reduce(S::min_scalar)
                        .expect("non-empty target set")
                })
                .reduce(S::max_scalar)
                .expect("non-empty source set")
        };
        Ok(directed(a, b).max_scalar(directed(b, a)))
    }

    /// One-line description used by the CLI.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{} points, base {:?}",
            self.n, self.labels[self.base]
        );
        out
    }
}
