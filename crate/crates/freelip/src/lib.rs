//! Lipschitz-free spaces over finite pointed metric spaces, and the
//! norm-one projections induced by finite group actions.
//!
//! A finite pointed metric space `M` carries a free Banach space `F(M)`:
//! formal combinations of point masses with total mass zero (after
//! anchoring at the base point), normed by optimal transport cost. Its
//! dual is the space of Lipschitz functions vanishing at the base, normed
//! by the best Lipschitz constant. A finite group acting on the points by
//! distance-preserving bijections induces linear isometries of `F(M)`, and
//! averaging them produces a projection whose range is isometric to the
//! free space of the orbit space `M/G` and whose kernel is spanned by
//! elementary differences `delta(gx) - delta(x)`.
//!
//! The crate builds each ingredient explicitly and numerically certifies
//! the claimed identities:
//!
//! - [`metric`]: validated finite pointed metric spaces;
//! - [`group`]: group actions by bijections, closure from generators,
//!   distortion bounds, and metric averaging that turns any bi-Lipschitz
//!   action into an isometric one;
//! - [`quotient`]: the orbit space with the induced optimal-representative
//!   metric;
//! - [`free`]: free vectors, the transport norm with optimal plans and
//!   dual witnesses, Lipschitz norms, and quotient norms by linear
//!   programming;
//! - [`projections`]: the induced isometries, the averaging projection and
//!   its adjoint, and the isometric identifications with the orbit space;
//! - [`instance`] and [`verify`]: a JSON instance format and a check suite
//!   that replays every identity on a concrete instance, reporting
//!   machine-readable pass/fail results.
//!
//! Two scalar backends are supported throughout ([`scalar`]): exact
//! rational arithmetic, where every comparison is literal equality, and
//! `f64` with a fixed relative tolerance. The supporting numerics —
//! [`linalg`] for exact rank/null-space computations and [`simplex`] for
//! linear programs over either backend — are written against the same
//! scalar trait.
//!
//! ```
//! use freelip::metric::PointedMetricSpace;
//! use freelip::free::{kr_norm, FreeVector};
//! use freelip::scalar::rat;
//! use num::BigRational;
//!
//! // Three points: a base at distance 1 from two points that are 2 apart.
//! let space = PointedMetricSpace::<BigRational>::from_int_matrix(
//!     &["0", "a", "b"],
//!     "0",
//!     &[&[0, 1, 1], &[1, 0, 2], &[1, 2, 0]],
//! ).unwrap();
//!
//! // The optimal way to feed half a unit of mass to each of a and b from
//! // the base costs 1; no transport between a and b can do better.
//! let v = FreeVector::from_pairs(&space, &[(1, rat(1, 2)), (2, rat(1, 2))]).unwrap();
//! let (norm, plan) = kr_norm(&space, &v);
//! assert_eq!(norm, rat(1, 1));
//! assert_eq!(plan.cost(&space), norm);
//! ```

pub mod book;
pub mod free;
pub mod group;
pub mod instance;
pub mod linalg;
pub mod metric;
pub mod projections;
pub mod quotient;
pub mod scalar;
pub mod simplex;
pub mod verify;
