//! The verification harness: replays every identity the library claims on
//! a concrete instance and emits a machine-readable report.
//!
//! Each entry of [`CHECK_MANIFEST`] is one invariant. Checks marked by
//! their prefix run against different stages of the pipeline:
//!
//! - `metric/*` and the norm checks `free/delta_isometry`, `free/kr_duality`,
//!   `free/lip_norm_molecular`, `free/norm_axioms` exercise the instance's
//!   original metric;
//! - `group/*` covers closure, distortion bounds, and the averaged metric
//!   `D` (the group average of distances, on which the action is always
//!   isometric — when the action already was, `D` reproduces the input);
//! - `quotient/*`, `proj/*` and `free/quotient_norm_pushforward` run on
//!   the averaged space and its orbit quotient, where the isometry
//!   identities are meaningful.
//!
//! Randomized checks draw from a counter-based generator seeded by the
//! instance's `seed`, one independent stream per manifest position, so a
//! report depends only on `(instance bytes, seed, trials)` — reports are
//! byte-identical across runs and platforms apart from the `ms` timing
//! field. Exact-mode reports contain no tolerance fields; float-mode
//! reports state the relative tolerance on every check.
//!
//! A structurally sound instance whose metric or group data fail
//! validation still yields a report: the `instance/valid` gate fails with
//! the validation error as witness and every other check is `skipped`.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::free::{
    dual_witness, kr_norm, lip_norm, pairing, pushforward, quotient_norm, FreeVector,
    LipFunction,
};
use crate::group::{average_metric, distortion_bounds, ActingGroup, DistortionBounds};
use crate::instance::{AnyInstance, Instance, VerifyTarget};
use crate::linalg::{same_row_span, Matrix};
use crate::metric::PointedMetricSpace;
use crate::projections::{
    apply_affine, apply_induced, fixed_space_basis, induced_map, kernel_basis,
    project_free, project_free_matrix, project_lip, psi, psi_inverse, t_embed,
};
use crate::quotient::QuotientSpace;
use crate::scalar::Scalar;

/// Every check the suite performs, in report order (lexicographic). Each
/// library invariant appears exactly once; `instance/valid` is the
/// validation gate that blocks the rest when it fails.
pub const CHECK_MANIFEST: [&str; 29] = [
    "free/delta_isometry",
    "free/kr_duality",
    "free/lip_norm_molecular",
    "free/norm_axioms",
    "free/quotient_norm_pushforward",
    "group/averaged_action_isometric",
    "group/averaged_metric_valid",
    "group/closure_axioms",
    "group/distortion_sandwich",
    "group/orbits_partition",
    "instance/valid",
    "metric/hausdorff_pseudometric",
    "metric/min_le_hausdorff",
    "metric/validation_matches_bruteforce",
    "proj/adjoint_identity",
    "proj/average_invariance",
    "proj/contractivity_certificate",
    "proj/embed_isometry",
    "proj/embed_section",
    "proj/eval_identity",
    "proj/induced_homomorphism",
    "proj/induced_molecule_isometry",
    "proj/kernel_rank_identities",
    "proj/projection_idempotent",
    "proj/psi_isometry_roundtrip",
    "proj/range_equals_fixed_space",
    "quotient/hausdorff_coincidence",
    "quotient/map_contractive_onto",
    "quotient/metric_valid",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// One line of a report: the invariant checked, whether it held, and the
/// two quantities whose comparison decided it (values at the worst
/// observed case for aggregate checks, violation counts for composite
/// ones).
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: Status,
    pub lhs: Value,
    pub rhs: Value,
    pub witness: String,
}

/// A full verification report for one instance.
#[derive(Debug, Clone)]
pub struct CheckReport {
    /// SHA-256 of the instance bytes.
    pub instance: String,
    pub mode: String,
    pub checks: Vec<CheckOutcome>,
    pub overall: Status,
    /// Tolerance stated on every check in float mode; absent in exact mode.
    pub tol: Option<f64>,
    /// Wall-clock milliseconds the suite took. The only
    /// non-reproducible field.
    pub ms: u64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    /// Serializes with a fixed field order and two-space indentation, so
    /// reports are byte-comparable. The scalar fields hold `"p/q"` strings
    /// in exact mode and shortest-round-trip numbers in float mode.
    pub fn to_json(&self) -> String {
        fn quoted(text: &str) -> String {
            serde_json::to_string(text).expect("strings always serialize")
        }
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"instance\": {},\n", quoted(&self.instance)));
        out.push_str(&format!("  \"mode\": {},\n", quoted(&self.mode)));
        if self.checks.is_empty() {
            out.push_str("  \"checks\": [],\n");
        } else {
            out.push_str("  \"checks\": [\n");
            for (i, check) in self.checks.iter().enumerate() {
                out.push_str("    {\n");
                out.push_str(&format!("      \"name\": {},\n", quoted(check.name)));
                out.push_str(&format!(
                    "      \"status\": {},\n",
                    quoted(check.status.as_str())
                ));
                out.push_str(&format!("      \"lhs\": {},\n", check.lhs));
                out.push_str(&format!("      \"rhs\": {},\n", check.rhs));
                if let Some(tol) = self.tol {
                    out.push_str(&format!("      \"tol\": {},\n", Value::from(tol)));
                }
                out.push_str(&format!("      \"witness\": {}\n", quoted(&check.witness)));
                out.push_str(if i + 1 < self.checks.len() { "    },\n" } else { "    }\n" });
            }
            out.push_str("  ],\n");
        }
        out.push_str(&format!(
            "  \"overall\": {},\n",
            quoted(self.overall.as_str())
        ));
        out.push_str(&format!("  \"ms\": {}\n", self.ms));
        out.push_str("}\n");
        out
    }
}

/// Runs the full suite on a parsed target: a failing gate plus skipped
/// checks for invalid instances, the real thing otherwise.
pub fn run_target(target: &VerifyTarget) -> CheckReport {
    match target {
        VerifyTarget::Ready(instance) => run_suite(instance),
        VerifyTarget::Invalid { hash, mode, error } => {
            let mut checks = Vec::with_capacity(CHECK_MANIFEST.len());
            for name in CHECK_MANIFEST {
                if name == "instance/valid" {
                    checks.push(CheckOutcome {
                        name,
                        status: Status::Fail,
                        lhs: Value::from(1u64),
                        rhs: Value::from(0u64),
                        witness: format!("validation failed: {error}"),
                    });
                } else {
                    checks.push(CheckOutcome {
                        name,
                        status: Status::Skipped,
                        lhs: Value::from(0u64),
                        rhs: Value::from(0u64),
                        witness: "blocked: instance failed validation".to_string(),
                    });
                }
            }
            CheckReport {
                instance: hash.clone(),
                mode: mode.to_string(),
                checks,
                overall: Status::Fail,
                tol: if *mode == "float" { Some(crate::scalar::FLOAT_TOL) } else { None },
                ms: 0,
            }
        }
    }
}

/// Runs every manifest check on a valid instance.
pub fn run_suite(instance: &AnyInstance) -> CheckReport {
    match instance {
        AnyInstance::Exact(inst) => run_checks(inst, "exact"),
        AnyInstance::Float(inst) => run_checks(inst, "float"),
    }
}

struct Ctx<'a, S: Scalar> {
    /// The instance's own metric.
    space: &'a PointedMetricSpace<S>,
    group: &'a ActingGroup,
    bounds: DistortionBounds<S>,
    /// The group-averaged metric; the action is isometric here.
    dspace: PointedMetricSpace<S>,
    /// Orbit quotient of the averaged space.
    q: QuotientSpace<S>,
    trials: u32,
}

fn run_checks<S: Scalar>(inst: &Instance<S>, mode: &str) -> CheckReport {
    let start = Instant::now();
    let bounds = distortion_bounds(&inst.space, &inst.group);
    let dspace = average_metric(&inst.space, &inst.group)
        .expect("group averages of metrics satisfy the metric axioms");
    let q = QuotientSpace::build(&dspace, &inst.group)
        .expect("the action is isometric on the averaged metric");
    let ctx = Ctx {
        space: &inst.space,
        group: &inst.group,
        bounds,
        dspace,
        q,
        trials: inst.trials,
    };
    let mut checks = Vec::with_capacity(CHECK_MANIFEST.len());
    for (index, name) in CHECK_MANIFEST.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
        rng.set_stream(index as u64 + 1);
        checks.push(run_one(name, &ctx, &mut rng));
    }
    let overall = if checks.iter().all(|c| c.status == Status::Pass) {
        Status::Pass
    } else {
        Status::Fail
    };
    CheckReport {
        instance: inst.hash.clone(),
        mode: mode.to_string(),
        checks,
        overall,
        tol: S::tolerance(),
        ms: start.elapsed().as_millis() as u64,
    }
}

// ---------------------------------------------------------------------
// Randomized inputs. Coefficients stay small integers (or halves) so that
// exact-mode linear programs run over small rationals.
// ---------------------------------------------------------------------

/// A free vector over a uniformly chosen support with nonzero integer
/// coefficients in `[-3, 3]`.
fn random_vector<S: Scalar>(
    space: &PointedMetricSpace<S>,
    rng: &mut ChaCha8Rng,
) -> FreeVector<S> {
    let mut pairs = Vec::new();
    for x in space.support_points() {
        if rng.gen_bool(0.5) {
            let mut c: i64 = rng.gen_range(-3..=2);
            if c >= 0 {
                c += 1; // nonzero, uniform over ±{1,2,3}
            }
            pairs.push((x, S::from_int(c)));
        }
    }
    FreeVector::from_pairs(space, &pairs).expect("support points are in range")
}

/// A function with half-integer values in `[-2, 2]`, shifted to vanish at
/// the base.
fn random_function<S: Scalar>(
    space: &PointedMetricSpace<S>,
    rng: &mut ChaCha8Rng,
) -> LipFunction<S> {
    let values: Vec<S> = (0..space.n())
        .map(|_| S::ratio(rng.gen_range(-4..=4), 2))
        .collect();
    LipFunction::from_values_shifted(space, values)
}

/// A uniformly random nonempty subset of the points.
fn random_subset(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut subset: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    if subset.is_empty() {
        subset.push(rng.gen_range(0..n));
    }
    subset
}

// ---------------------------------------------------------------------
// Worst-case trackers and outcome builders.
// ---------------------------------------------------------------------

/// Tracks the comparison with the largest deviation seen, keeping the
/// first maximizer in scan order.
struct Worst<S: Scalar> {
    dev: Option<S>,
    lhs: S,
    rhs: S,
    witness: String,
}

impl<S: Scalar> Worst<S> {
    fn new(empty_note: &str) -> Self {
        Worst {
            dev: None,
            lhs: S::zero(),
            rhs: S::zero(),
            witness: empty_note.to_string(),
        }
    }

    fn consider(&mut self, dev: S, lhs: S, rhs: S, witness: impl FnOnce() -> String) {
        let better = match &self.dev {
            None => true,
            Some(cur) => cur.lt_scalar(&dev),
        };
        if better {
            self.dev = Some(dev);
            self.lhs = lhs;
            self.rhs = rhs;
            self.witness = witness();
        }
    }

    /// For equality checks: deviation is `|lhs - rhs|`.
    fn observe_eq(&mut self, lhs: S, rhs: S, witness: impl FnOnce() -> String) {
        let dev = (lhs.clone() - rhs.clone()).abs();
        self.consider(dev, lhs, rhs, witness);
    }

    /// For `lhs <= rhs` checks: deviation is the (signed) violation margin.
    fn observe_le(&mut self, lhs: S, rhs: S, witness: impl FnOnce() -> String) {
        let dev = lhs.clone() - rhs.clone();
        self.consider(dev, lhs, rhs, witness);
    }
}

fn scalar_check<S: Scalar>(name: &'static str, pass: bool, worst: Worst<S>) -> CheckOutcome {
    CheckOutcome {
        name,
        status: if pass { Status::Pass } else { Status::Fail },
        lhs: worst.lhs.to_json(),
        rhs: worst.rhs.to_json(),
        witness: worst.witness,
    }
}

fn count_check(name: &'static str, violations: usize, witness: String) -> CheckOutcome {
    CheckOutcome {
        name,
        status: if violations == 0 { Status::Pass } else { Status::Fail },
        lhs: Value::from(violations as u64),
        rhs: Value::from(0u64),
        witness,
    }
}

fn dims_check(
    name: &'static str,
    pass: bool,
    lhs: usize,
    rhs: usize,
    witness: String,
) -> CheckOutcome {
    CheckOutcome {
        name,
        status: if pass { Status::Pass } else { Status::Fail },
        lhs: Value::from(lhs as u64),
        rhs: Value::from(rhs as u64),
        witness,
    }
}

fn run_one<S: Scalar>(name: &'static str, ctx: &Ctx<S>, rng: &mut ChaCha8Rng) -> CheckOutcome {
    match name {
        "free/delta_isometry" => c_delta_isometry(name, ctx),
        "free/kr_duality" => c_kr_duality(name, ctx, rng),
        "free/lip_norm_molecular" => c_lip_norm_molecular(name, ctx, rng),
        "free/norm_axioms" => c_norm_axioms(name, ctx, rng),
        "free/quotient_norm_pushforward" => c_quotient_norm_pushforward(name, ctx, rng),
        "group/averaged_action_isometric" => c_averaged_action_isometric(name, ctx),
        "group/averaged_metric_valid" => c_averaged_metric_valid(name, ctx),
        "group/closure_axioms" => c_closure_axioms(name, ctx),
        "group/distortion_sandwich" => c_distortion_sandwich(name, ctx),
        "group/orbits_partition" => c_orbits_partition(name, ctx),
        "instance/valid" => CheckOutcome {
            name,
            status: Status::Pass,
            lhs: Value::from(0u64),
            rhs: Value::from(0u64),
            witness: format!(
                "metric axioms hold on {} points; group of order {} is closed",
                ctx.space.n(),
                ctx.group.order()
            ),
        },
        "metric/hausdorff_pseudometric" => c_hausdorff_pseudometric(name, ctx, rng),
        "metric/min_le_hausdorff" => c_min_le_hausdorff(name, ctx, rng),
        "metric/validation_matches_bruteforce" => c_validation_bruteforce(name, ctx, rng),
        "proj/adjoint_identity" => c_adjoint_identity(name, ctx, rng),
        "proj/average_invariance" => c_average_invariance(name, ctx, rng),
        "proj/contractivity_certificate" => c_contractivity(name, ctx),
        "proj/embed_isometry" => c_embed_isometry(name, ctx, rng),
        "proj/embed_section" => c_embed_section(name, ctx, rng),
        "proj/eval_identity" => c_eval_identity(name, ctx, rng),
        "proj/induced_homomorphism" => c_induced_homomorphism(name, ctx),
        "proj/induced_molecule_isometry" => c_induced_molecule_isometry(name, ctx),
        "proj/kernel_rank_identities" => c_kernel_rank_identities(name, ctx),
        "proj/projection_idempotent" => c_projection_idempotent(name, ctx),
        "proj/psi_isometry_roundtrip" => c_psi_isometry_roundtrip(name, ctx, rng),
        "proj/range_equals_fixed_space" => c_range_equals_fixed_space(name, ctx),
        "quotient/hausdorff_coincidence" => c_hausdorff_coincidence(name, ctx),
        "quotient/map_contractive_onto" => c_map_contractive_onto(name, ctx),
        "quotient/metric_valid" => c_quotient_metric_valid(name, ctx),
        other => unreachable!("unknown check {other}"),
    }
}

// ---------------------------------------------------------------------
// metric/*: properties of the instance's own metric.
// ---------------------------------------------------------------------

fn c_min_le_hausdorff<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let space = ctx.space;
    let mut worst = Worst::new("no subset pairs drawn");
    let mut pass = true;
    for trial in 0..ctx.trials {
        let a = random_subset(space.n(), rng);
        let b = random_subset(space.n(), rng);
        let min = space.min_set_distance(&a, &b).expect("nonempty subsets");
        let haus = space.hausdorff_distance(&a, &b).expect("nonempty subsets");
        if !min.le_tol(&haus) {
            pass = false;
        }
        worst.observe_le(min, haus, || {
            format!("trial {trial}: |A|={}, |B|={}", a.len(), b.len())
        });
    }
    scalar_check(name, pass, worst)
}

fn c_hausdorff_pseudometric<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let space = ctx.space;
    let mut worst = Worst::new("no subset triples drawn");
    let mut pass = true;
    for trial in 0..ctx.trials {
        let a = random_subset(space.n(), rng);
        let b = random_subset(space.n(), rng);
        let c = random_subset(space.n(), rng);
        let h = |x: &[usize], y: &[usize]| {
            space.hausdorff_distance(x, y).expect("nonempty subsets")
        };
        if !h(&a, &b).eq_scalar(&h(&b, &a)) {
            pass = false;
        }
        if !h(&a, &a).is_zero() {
            pass = false;
        }
        let direct = h(&a, &c);
        let detour = h(&a, &b) + h(&b, &c);
        if !direct.le_tol(&detour) {
            pass = false;
        }
        worst.observe_le(direct, detour, || {
            format!("trial {trial}: triangle through |B|={}", b.len())
        });
    }
    scalar_check(name, pass, worst)
}

/// An independent acceptance decision for the metric axioms: a flat scan
/// that looks for any violation, sharing only the scalar comparisons with
/// the validating constructor.
fn brute_force_accepts<S: Scalar>(matrix: &[Vec<S>]) -> bool {
    let n = matrix.len();
    let zero = S::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                if !matrix[i][j].eq_scalar(&zero) {
                    return false;
                }
                continue;
            }
            if !matrix[i][j].eq_scalar(&matrix[j][i]) {
                return false;
            }
            if matrix[i][j].lt_scalar(&zero) || matrix[i][j].eq_scalar(&zero) {
                return false;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let detour = matrix[i][k].clone() + matrix[k][j].clone();
                if !matrix[i][j].le_tol(&detour) {
                    return false;
                }
            }
        }
    }
    true
}

fn c_validation_bruteforce<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let space = ctx.space;
    let n = space.n();
    let labels: Vec<String> = space.labels().to_vec();
    let base = space.label(space.base()).to_string();
    let original = space.matrix();
    let mut violations = 0usize;
    let mut first = String::new();
    let mut cases = 0usize;
    let mut check_case = |matrix: Vec<Vec<S>>, what: &str| {
        cases += 1;
        let validated =
            PointedMetricSpace::new(labels.clone(), &base, matrix.clone()).is_ok();
        let brute = brute_force_accepts(&matrix);
        if validated != brute {
            violations += 1;
            if first.is_empty() {
                first = format!(
                    "; first disagreement on {what}: validator {validated}, direct scan {brute}"
                );
            }
        }
    };
    check_case(original.clone(), "the instance matrix");
    for trial in 0..ctx.trials {
        let mut mutated = original.clone();
        // Mutations 1-5 each target one axiom; 0 leaves the matrix valid.
        let op = if n == 1 { [0, 5][rng.gen_range(0..2)] } else { rng.gen_range(0..=5) };
        let i = rng.gen_range(0..n);
        let j = if n == 1 { i } else { (i + rng.gen_range(1..n)) % n };
        let what;
        match op {
            0 => {
                what = "an unmodified copy";
            }
            1 => {
                mutated[i][j] = S::zero() - mutated[i][j].clone();
                what = "a negated entry";
            }
            2 => {
                mutated[i][j] = S::zero();
                mutated[j][i] = S::zero();
                what = "a zeroed off-diagonal pair";
            }
            3 => {
                mutated[i][j] = mutated[i][j].clone() + S::one();
                what = "an asymmetric bump";
            }
            4 => {
                let total = S::sum_of(
                    mutated.iter().flat_map(|row| row.iter().cloned()),
                );
                let inflated = total + S::one();
                mutated[i][j] = inflated.clone();
                mutated[j][i] = inflated;
                what = "an inflated pair distance";
            }
            _ => {
                mutated[i][i] = S::one();
                what = "a nonzero diagonal entry";
            }
        }
        check_case(mutated, &format!("trial {trial} ({what})"));
    }
    count_check(
        name,
        violations,
        format!("{cases} matrices decided identically by both scans{first}"),
    )
}

// ---------------------------------------------------------------------
// group/*: closure, distortion, and the averaged metric.
// ---------------------------------------------------------------------

fn c_closure_axioms<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let group = ctx.group;
    let index: HashMap<Vec<usize>, usize> = group
        .elements()
        .iter()
        .enumerate()
        .map(|(i, g)| (g.images().to_vec(), i))
        .collect();
    let mut violations = 0usize;
    if index.len() != group.order() {
        violations += 1; // duplicate permutations
    }
    if !group.element(group.identity_id()).is_identity() {
        violations += 1;
    }
    for u in group.elements() {
        if !index.contains_key(u.inverse().images()) {
            violations += 1;
        }
        for v in group.elements() {
            if !index.contains_key(u.compose(v).images()) {
                violations += 1;
            }
        }
    }
    count_check(
        name,
        violations,
        format!(
            "order {}: {} products and {} inverses land in the group",
            group.order(),
            group.order() * group.order(),
            group.order()
        ),
    )
}

fn c_averaged_metric_valid<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let labels: Vec<String> = ctx.dspace.labels().to_vec();
    let base = ctx.dspace.label(ctx.dspace.base()).to_string();
    match PointedMetricSpace::new(labels, &base, ctx.dspace.matrix()) {
        Ok(_) => count_check(
            name,
            0,
            format!("averaged matrix over {} points revalidated", ctx.dspace.n()),
        ),
        Err(e) => count_check(name, 1, format!("averaged matrix rejected: {e}")),
    }
}

fn c_averaged_action_isometric<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let mut worst = Worst::new("single point: no pairs");
    let mut pass = true;
    for (gid, g) in ctx.group.elements().iter().enumerate() {
        for x in 0..d.n() {
            for y in (x + 1)..d.n() {
                let moved = d.d(g.apply(x), g.apply(y)).clone();
                let fixed = d.d(x, y).clone();
                if !moved.eq_scalar(&fixed) {
                    pass = false;
                }
                worst.observe_eq(moved, fixed, || {
                    format!("element {gid} on x={}, y={}", d.label(x), d.label(y))
                });
            }
        }
    }
    scalar_check(name, pass, worst)
}

fn c_distortion_sandwich<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let (space, d) = (ctx.space, &ctx.dspace);
    let (r, big_r) = (&ctx.bounds.lower, &ctx.bounds.upper);
    let mut worst = Worst::new("single point: no pairs");
    let mut pass = true;
    for x in 0..space.n() {
        for y in (x + 1)..space.n() {
            let lower = r.clone() * d.d(x, y).clone();
            let direct = space.d(x, y).clone();
            let upper = big_r.clone() * d.d(x, y).clone();
            if !lower.le_tol(&direct) {
                pass = false;
            }
            worst.observe_le(lower.clone(), direct.clone(), || {
                format!("r*D vs d on x={}, y={}", space.label(x), space.label(y))
            });
            if !direct.le_tol(&upper) {
                pass = false;
            }
            worst.observe_le(direct, upper, || {
                format!("d vs R*D on x={}, y={}", space.label(x), space.label(y))
            });
        }
    }
    scalar_check(name, pass, worst)
}

fn c_orbits_partition<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let group = ctx.group;
    let (orbits, orbit_of) = group.orbits();
    let mut violations = 0usize;
    let mut seen = vec![0usize; group.n()];
    for (oid, orbit) in orbits.iter().enumerate() {
        for &m in orbit {
            seen[m] += 1;
            if orbit_of[m] != oid {
                violations += 1;
            }
        }
        for g in group.elements() {
            let mut image: Vec<usize> = orbit.iter().map(|&m| g.apply(m)).collect();
            image.sort_unstable();
            if &image != orbit {
                violations += 1;
            }
        }
    }
    violations += seen.iter().filter(|&&count| count != 1).count();
    count_check(
        name,
        violations,
        format!(
            "{} orbits partition {} points and are stable under all {} elements",
            orbits.len(),
            group.n(),
            group.order()
        ),
    )
}

// ---------------------------------------------------------------------
// free/*: norms on the free space and its dual.
// ---------------------------------------------------------------------

fn c_delta_isometry<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let space = ctx.space;
    let mut worst = Worst::new("single point: no pairs");
    let mut pass = true;
    for x in 0..space.n() {
        for y in (x + 1)..space.n() {
            let m = FreeVector::delta(space, x).sub(&FreeVector::delta(space, y));
            let (value, _) = kr_norm(space, &m);
            let dist = space.d(x, y).clone();
            if !value.eq_scalar(&dist) {
                pass = false;
            }
            worst.observe_eq(value, dist, || {
                format!("x={}, y={}", space.label(x), space.label(y))
            });
        }
    }
    scalar_check(name, pass, worst)
}

fn c_kr_duality<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let space = ctx.space;
    let mut worst = Worst::new("no trials");
    let mut pass = true;
    for trial in 0..ctx.trials {
        let v = random_vector(space, rng);
        let (value, plan) = kr_norm(space, &v);
        if !plan.cost(space).eq_scalar(&value) {
            pass = false;
        }
        for x in 0..space.n() {
            let expected = if x == space.base() {
                S::zero() - v.mass()
            } else {
                v.coeff(x)
            };
            if !plan.divergence(x).eq_scalar(&expected) {
                pass = false;
            }
        }
        let f = dual_witness(space, &v);
        let lip = lip_norm(space, &f);
        if !lip.le_tol(&S::one()) {
            pass = false;
        }
        let attained = pairing(&f, &v);
        if !attained.eq_scalar(&value) {
            pass = false;
        }
        worst.observe_eq(value, attained, || {
            format!("trial {trial}: support {}, witness slope {lip}", v.support().count())
        });
    }
    scalar_check(name, pass, worst)
}

fn c_lip_norm_molecular<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let space = ctx.space;
    let mut worst = Worst::new("no trials");
    let mut pass = true;
    for trial in 0..ctx.trials {
        let f = random_function(space, rng);
        let direct = lip_norm(space, &f);
        let mut molecular = S::zero();
        for x in 0..space.n() {
            for y in (x + 1)..space.n() {
                let m = FreeVector::delta(space, x).sub(&FreeVector::delta(space, y));
                let slope = pairing(&f, &m).abs() / space.d(x, y).clone();
                molecular = molecular.max_scalar(slope);
            }
        }
        if !direct.eq_scalar(&molecular) {
            pass = false;
        }
        worst.observe_eq(direct, molecular, || format!("trial {trial}"));
    }
    scalar_check(name, pass, worst)
}

fn c_norm_axioms<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let space = ctx.space;
    let mut violations = 0usize;
    let mut first = String::new();
    let mut note = |what: String| {
        if first.is_empty() {
            first = format!("; first violation: {what}");
        }
    };
    if !kr_norm(space, &FreeVector::zero()).0.is_zero() {
        violations += 1;
        note("norm of zero".to_string());
    }
    for trial in 0..ctx.trials {
        let v = random_vector(space, rng);
        let w = random_vector(space, rng);
        let mut k: i64 = rng.gen_range(-6..=5);
        if k >= 0 {
            k += 1;
        }
        let alpha = S::ratio(k, 2);
        let norm_v = kr_norm(space, &v).0;
        let norm_w = kr_norm(space, &w).0;
        let scaled = kr_norm(space, &v.scale(&alpha)).0;
        if !scaled.eq_scalar(&(alpha.abs() * norm_v.clone())) {
            violations += 1;
            note(format!("homogeneity at trial {trial}"));
        }
        let summed = kr_norm(space, &v.add(&w)).0;
        if !summed.le_tol(&(norm_v.clone() + norm_w)) {
            violations += 1;
            note(format!("triangle inequality at trial {trial}"));
        }
        if !v.is_zero() && norm_v.is_zero() {
            violations += 1;
            note(format!("definiteness at trial {trial}"));
        }
    }
    count_check(
        name,
        violations,
        format!(
            "homogeneity, subadditivity and definiteness over {} trials{first}",
            ctx.trials
        ),
    )
}

fn c_quotient_norm_pushforward<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let mut worst = Worst::new("no trials");
    let mut pass = true;
    for trial in 0..ctx.trials {
        let v = random_vector(d, rng);
        let modulo = quotient_norm(d, ctx.group, &v)
            .expect("the action is isometric on the averaged metric");
        let downstairs = kr_norm(ctx.q.space(), &pushforward(&ctx.q, &v)).0;
        if !modulo.eq_scalar(&downstairs) {
            pass = false;
        }
        worst.observe_eq(modulo, downstairs, || {
            format!("trial {trial}: support {}", v.support().count())
        });
    }
    scalar_check(name, pass, worst)
}

// ---------------------------------------------------------------------
// quotient/*: the orbit space of the averaged metric.
// ---------------------------------------------------------------------

fn c_quotient_metric_valid<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let qs = ctx.q.space();
    let labels: Vec<String> = qs.labels().to_vec();
    let base = qs.label(qs.base()).to_string();
    match PointedMetricSpace::new(labels, &base, qs.matrix()) {
        Ok(_) => count_check(
            name,
            0,
            format!("quotient matrix over {} orbits revalidated", ctx.q.k()),
        ),
        Err(e) => count_check(name, 1, format!("quotient matrix rejected: {e}")),
    }
}

fn c_hausdorff_coincidence<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let d = &ctx.dspace;
    let orbits = ctx.q.orbits();
    let mut worst = Worst::new("single orbit: no pairs");
    let mut pass = true;
    for o1 in 0..orbits.len() {
        for o2 in (o1 + 1)..orbits.len() {
            let min = d
                .min_set_distance(&orbits[o1], &orbits[o2])
                .expect("orbits are nonempty");
            let haus = d
                .hausdorff_distance(&orbits[o1], &orbits[o2])
                .expect("orbits are nonempty");
            if !min.eq_scalar(&haus) {
                pass = false;
            }
            worst.observe_eq(min, haus, || {
                format!(
                    "orbits {} and {}",
                    ctx.q.space().label(o1),
                    ctx.q.space().label(o2)
                )
            });
        }
    }
    scalar_check(name, pass, worst)
}

fn c_map_contractive_onto<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let d = &ctx.dspace;
    let q = &ctx.q;
    let mut worst = Worst::new("single point: no pairs");
    let mut pass = true;
    let mut hit = vec![false; q.k()];
    for x in 0..d.n() {
        hit[q.orbit_of(x)] = true;
        for y in (x + 1)..d.n() {
            let downstairs = q.space().d(q.orbit_of(x), q.orbit_of(y)).clone();
            let upstairs = d.d(x, y).clone();
            if !downstairs.le_tol(&upstairs) {
                pass = false;
            }
            worst.observe_le(downstairs, upstairs, || {
                format!("x={}, y={}", d.label(x), d.label(y))
            });
        }
    }
    let onto = hit.iter().all(|&h| h);
    if !onto {
        pass = false;
        worst.witness.push_str("; some orbit has no preimage");
    }
    scalar_check(name, pass, worst)
}

// ---------------------------------------------------------------------
// proj/*: the induced isometries and the averaging projection, all on the
// averaged metric.
// ---------------------------------------------------------------------

fn c_induced_homomorphism<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let d = &ctx.dspace;
    let group = ctx.group;
    let index: HashMap<Vec<usize>, usize> = group
        .elements()
        .iter()
        .enumerate()
        .map(|(i, g)| (g.images().to_vec(), i))
        .collect();
    let matrices: Vec<Matrix<S>> =
        group.elements().iter().map(|g| induced_map(d, g)).collect();
    let dim = d.n() - 1;
    let mut violations = 0usize;
    if !matrices[group.identity_id()].eq_matrix(&Matrix::identity(dim)) {
        violations += 1;
    }
    for (gi, g) in group.elements().iter().enumerate() {
        for (hi, h) in group.elements().iter().enumerate() {
            let gh = index[g.compose(h).images()];
            if !matrices[gi].mul(&matrices[hi]).eq_matrix(&matrices[gh]) {
                violations += 1;
            }
        }
    }
    count_check(
        name,
        violations,
        format!(
            "{} composition pairs match their product matrices",
            group.order() * group.order()
        ),
    )
}

fn c_induced_molecule_isometry<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let mut worst = Worst::new("single point: no molecules");
    let mut pass = true;
    for (gid, g) in ctx.group.elements().iter().enumerate() {
        for x in 0..d.n() {
            for y in (x + 1)..d.n() {
                let m = FreeVector::delta(d, x).sub(&FreeVector::delta(d, y));
                let before = kr_norm(d, &m).0;
                let after = kr_norm(d, &apply_induced(d, g, &m)).0;
                if !after.eq_scalar(&before) {
                    pass = false;
                }
                worst.observe_eq(after, before, || {
                    format!("element {gid} on x={}, y={}", d.label(x), d.label(y))
                });
            }
        }
    }
    scalar_check(name, pass, worst)
}

fn c_projection_idempotent<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let r = project_free_matrix(&ctx.dspace, ctx.group)
        .expect("the action is isometric on the averaged metric");
    let rr = r.mul(&r);
    let pass = rr.eq_matrix(&r);
    let mut worst = Worst::new("");
    worst.observe_eq(rr.max_abs_diff(&r), S::zero(), || {
        format!("largest entry deviation of R*R from R, dimension {}", r.rows())
    });
    scalar_check(name, pass, worst)
}

fn c_average_invariance<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let r = project_free_matrix(d, ctx.group)
        .expect("the action is isometric on the averaged metric");
    let mut violations = 0usize;
    for g in ctx.group.elements() {
        let t = induced_map(d, g);
        if !t.mul(&r).eq_matrix(&r) {
            violations += 1;
        }
        if !r.mul(&t).eq_matrix(&r) {
            violations += 1;
        }
    }
    for _ in 0..ctx.trials {
        let v = random_vector(d, rng);
        let averaged = project_free(d, ctx.group, &v)
            .expect("the action is isometric on the averaged metric");
        for g in ctx.group.elements() {
            let shifted = project_free(d, ctx.group, &apply_affine(d, g, &v))
                .expect("the action is isometric on the averaged metric");
            if !vectors_agree(&shifted, &averaged) {
                violations += 1;
            }
        }
    }
    count_check(
        name,
        violations,
        format!(
            "T_g R = R = R T_g for {} elements; affine shifts wash out over {} trials",
            ctx.group.order(),
            ctx.trials
        ),
    )
}

fn c_contractivity<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let d = &ctx.dspace;
    let mut worst = Worst::new("single point: no molecules");
    let mut pass = true;
    let one = S::one();
    for x in 0..d.n() {
        for y in (x + 1)..d.n() {
            let m = FreeVector::delta(d, x).sub(&FreeVector::delta(d, y));
            let averaged = project_free(d, ctx.group, &m)
                .expect("the action is isometric on the averaged metric");
            let ratio = kr_norm(d, &averaged).0 / d.d(x, y).clone();
            if !ratio.le_tol(&one) {
                pass = false;
            }
            worst.observe_le(ratio, one.clone(), || {
                format!("molecule x={}, y={}", d.label(x), d.label(y))
            });
        }
    }
    scalar_check(name, pass, worst)
}

fn c_kernel_rank_identities<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let d = &ctx.dspace;
    let dim = d.n() - 1;
    let kernel = kernel_basis(d, ctx.group)
        .expect("the action is isometric on the averaged metric");
    let fixed = fixed_space_basis(d, ctx.group)
        .expect("the action is isometric on the averaged metric");
    let r = project_free_matrix(d, ctx.group)
        .expect("the action is isometric on the averaged metric");
    let kernel_rows: Vec<Vec<S>> = kernel.iter().map(|v| v.to_dense(d)).collect();
    let null_rows = r.null_space_basis();
    let spans_match = same_row_span(&kernel_rows, &null_rows, dim);
    let pass = spans_match && kernel.len() + fixed.len() == dim;
    dims_check(
        name,
        pass,
        kernel.len() + fixed.len(),
        dim,
        format!(
            "kernel dimension {} + fixed dimension {}; kernel span {} the null space of R",
            kernel.len(),
            fixed.len(),
            if spans_match { "equals" } else { "differs from" }
        ),
    )
}

fn c_range_equals_fixed_space<S: Scalar>(name: &'static str, ctx: &Ctx<S>) -> CheckOutcome {
    let d = &ctx.dspace;
    let dim = d.n() - 1;
    let fixed = fixed_space_basis(d, ctx.group)
        .expect("the action is isometric on the averaged metric");
    let image_rows: Vec<Vec<S>> = d
        .support_points()
        .map(|x| {
            project_free(d, ctx.group, &FreeVector::delta(d, x))
                .expect("the action is isometric on the averaged metric")
                .to_dense(d)
        })
        .collect();
    let fixed_rows: Vec<Vec<S>> = fixed.iter().map(|v| v.to_dense(d)).collect();
    let pass = same_row_span(&image_rows, &fixed_rows, dim);
    dims_check(
        name,
        pass,
        Matrix::from_rows(image_rows).rank(),
        fixed.len(),
        "span of averaged deltas versus the invariant-vector basis".to_string(),
    )
}

fn c_adjoint_identity<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let mut worst = Worst::new("no trials");
    let mut pass = true;
    for trial in 0..ctx.trials {
        let f = random_function(d, rng);
        let v = random_vector(d, rng);
        let dual_side = pairing(
            &project_lip(d, ctx.group, &f)
                .expect("the action is isometric on the averaged metric"),
            &v,
        );
        let primal_side = pairing(
            &f,
            &project_free(d, ctx.group, &v)
                .expect("the action is isometric on the averaged metric"),
        );
        if !dual_side.eq_scalar(&primal_side) {
            pass = false;
        }
        worst.observe_eq(dual_side, primal_side, || format!("trial {trial}"));
    }
    scalar_check(name, pass, worst)
}

fn c_psi_isometry_roundtrip<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let q = &ctx.q;
    let mut worst = Worst::new("no trials");
    let mut pass = true;
    for trial in 0..ctx.trials {
        // Up: a function on orbits lifts isometrically and comes back.
        let fq = random_function(q.space(), rng);
        let lifted = psi(q, &fq);
        let upstairs = lip_norm(d, &lifted);
        let downstairs = lip_norm(q.space(), &fq);
        if !upstairs.eq_scalar(&downstairs) {
            pass = false;
        }
        worst.observe_eq(upstairs, downstairs, || format!("trial {trial} (lift)"));
        match psi_inverse(q, &lifted) {
            Ok(back) => {
                if !functions_agree(&back, &fq) {
                    pass = false;
                }
            }
            Err(_) => pass = false,
        }
        // Down: an invariant function descends and comes back.
        let invariant = project_lip(d, ctx.group, &random_function(d, rng))
            .expect("the action is isometric on the averaged metric");
        match psi_inverse(q, &invariant) {
            Ok(descended) => {
                let relifted = psi(q, &descended);
                if !functions_agree(&relifted, &invariant) {
                    pass = false;
                }
                let norm_down = lip_norm(q.space(), &descended);
                let norm_up = lip_norm(d, &invariant);
                if !norm_down.eq_scalar(&norm_up) {
                    pass = false;
                }
                worst.observe_eq(norm_down, norm_up, || {
                    format!("trial {trial} (descend)")
                });
            }
            Err(_) => pass = false,
        }
    }
    scalar_check(name, pass, worst)
}

fn c_embed_isometry<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let q = &ctx.q;
    let mut worst = Worst::new("no trials");
    let mut pass = true;
    for trial in 0..ctx.trials {
        let w = random_vector(q.space(), rng);
        let embedded = t_embed(d, ctx.group, q, &w)
            .expect("the action is isometric on the averaged metric");
        let upstairs = kr_norm(d, &embedded).0;
        let downstairs = kr_norm(q.space(), &w).0;
        if !upstairs.eq_scalar(&downstairs) {
            pass = false;
        }
        worst.observe_eq(upstairs, downstairs, || {
            format!("trial {trial}: support {}", w.support().count())
        });
    }
    scalar_check(name, pass, worst)
}

fn c_embed_section<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let q = &ctx.q;
    let mut violations = 0usize;
    for _ in 0..ctx.trials {
        let w = random_vector(q.space(), rng);
        let embedded = t_embed(d, ctx.group, q, &w)
            .expect("the action is isometric on the averaged metric");
        if !vectors_agree(&pushforward(q, &embedded), &w) {
            violations += 1;
        }
    }
    count_check(
        name,
        violations,
        format!(
            "pushforward after embedding reproduced {} random vectors",
            ctx.trials
        ),
    )
}

fn c_eval_identity<S: Scalar>(
    name: &'static str,
    ctx: &Ctx<S>,
    rng: &mut ChaCha8Rng,
) -> CheckOutcome {
    let d = &ctx.dspace;
    let q = &ctx.q;
    let mut worst = Worst::new("no trials");
    let mut pass = true;
    for trial in 0..ctx.trials {
        let fq = random_function(q.space(), rng);
        let lifted = psi(q, &fq);
        for x in 0..d.n() {
            let averaged = project_free(d, ctx.group, &FreeVector::delta(d, x))
                .expect("the action is isometric on the averaged metric");
            let evaluated = pairing(&lifted, &averaged);
            let direct = fq.value(q.orbit_of(x)).clone();
            if !evaluated.eq_scalar(&direct) {
                pass = false;
            }
            worst.observe_eq(evaluated, direct, || {
                format!("trial {trial}, x={}", d.label(x))
            });
        }
    }
    scalar_check(name, pass, worst)
}

/// Coefficient-wise tolerant equality of free vectors.
fn vectors_agree<S: Scalar>(a: &FreeVector<S>, b: &FreeVector<S>) -> bool {
    a.support()
        .chain(b.support())
        .all(|x| a.coeff(x).eq_scalar(&b.coeff(x)))
}

/// Value-wise tolerant equality of functions.
fn functions_agree<S: Scalar>(a: &LipFunction<S>, b: &LipFunction<S>) -> bool {
    a.values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| x.eq_scalar(y))
}
