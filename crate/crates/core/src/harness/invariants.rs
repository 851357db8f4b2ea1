//! Exact-arithmetic checks of the compensated Newton step.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algos::{self, Kernels, NewtonTrace};
use crate::dyadic::DyadicRational;
use crate::fp::{self, BinaryFloat, Precision};
use crate::oracle;

use super::{Engine, HarnessError, SamplePlan, CHUNK};

/// Witnesses kept per family.
const MAX_WITNESSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantFamily {
    /// `sigma = 1/2 - (x/2) r` and `tau = y^2 - r` hold exactly.
    Exactness,
    /// `nu_bar` is the round-to-nearest-even of `sigma + mxhalf * tau`.
    NuBarRounding,
    /// With the exact `nu_bar = (1 - x y^2)/2 != 0`, `(1 + nu_bar) y` stays
    /// below `1/sqrt(x)`.
    Undercompensation,
    /// The naive result has `|nu| < 1.5 u (1 + 2^-20)`.
    NaiveBound,
    /// The compensated result is never further from the oracle than the naive one.
    MonotoneImprovement,
}

impl InvariantFamily {
    pub const ALL: [InvariantFamily; 5] = [
        InvariantFamily::Exactness,
        InvariantFamily::NuBarRounding,
        InvariantFamily::Undercompensation,
        InvariantFamily::NaiveBound,
        InvariantFamily::MonotoneImprovement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InvariantFamily::Exactness => "exactness",
            InvariantFamily::NuBarRounding => "nu_bar_rounding",
            InvariantFamily::Undercompensation => "undercompensation",
            InvariantFamily::NaiveBound => "naive_bound",
            InvariantFamily::MonotoneImprovement => "monotone_improvement",
        }
    }
}

impl fmt::Display for InvariantFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub family: InvariantFamily,
    pub checked: u64,
    pub skipped: u64,
    pub failed: u64,
    pub witnesses: Vec<Witness>,
}

impl FamilyResult {
    fn new(family: InvariantFamily) -> Self {
        FamilyResult { family, checked: 0, skipped: 0, failed: 0, witnesses: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    fn fail(&mut self, x: f64, detail: String) {
        self.failed += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(Witness { x, detail });
        }
    }

    fn merge(&mut self, other: FamilyResult) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.failed += other.failed;
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub families: Vec<FamilyResult>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(FamilyResult::passed)
    }

    pub fn family(&self, family: InvariantFamily) -> &FamilyResult {
        self.families.iter().find(|f| f.family == family).expect("all families present")
    }
}

fn d<F: BinaryFloat>(x: F) -> DyadicRational {
    DyadicRational::from_float(x)
}

fn check_one<F: Kernels>(t: &NewtonTrace<F>, naive_bound: &DyadicRational, out: &mut [FamilyResult; 5]) {
    let x = t.x;
    let xf = x.to_f64();
    let (dx, dr, dy) = (d(x), d(t.r), d(t.y));
    let half = DyadicRational::pow2(-1);

    // sigma and tau exact
    let sigma_exact = &half - &(&dx * &dr).half();
    let tau_exact = &(&dy * &dy) - &dr;
    let fam = &mut out[0];
    fam.checked += 1;
    if d(t.sigma) != sigma_exact {
        fam.fail(xf, format!("sigma = {:?}, exact {sigma_exact}", t.sigma));
    } else if d(t.tau) != tau_exact {
        fam.fail(xf, format!("tau = {:?}, exact {tau_exact}", t.tau));
    }

    // nu_bar correctly rounded from the computed sigma and tau
    let nu_bar_exact = &d(t.sigma) + &(&d(t.mxhalf) * &d(t.tau));
    let rounded: F = nu_bar_exact.round_to();
    let fam = &mut out[1];
    fam.checked += 1;
    if rounded.to_bits_u64() != t.nu_bar.to_bits_u64() {
        fam.fail(xf, format!("nu_bar = {:?}, correctly rounded {rounded:?}", t.nu_bar));
    }

    // (1 + nu_bar) y < 1/sqrt(x) whenever nu_bar != 0
    let true_nu_bar = (&DyadicRational::one() - &(&dx * &(&dy * &dy))).half();
    let fam = &mut out[2];
    if true_nu_bar.is_zero() {
        fam.skipped += 1;
    } else {
        fam.checked += 1;
        let compensated = &(&DyadicRational::one() + &true_nu_bar) * &dy;
        if oracle::compare_to_rsqrt(&compensated, x) != Ordering::Less {
            fam.fail(xf, format!("(1 + nu_bar) y is not below rsqrt, nu_bar = {true_nu_bar}"));
        }
    }

    // naive error bound
    let fam = &mut out[3];
    fam.checked += 1;
    if !oracle::relative_error_below(t.y, x, naive_bound) {
        fam.fail(xf, format!("naive y = {:?} exceeds 1.5u(1+2^-20)", t.y));
    }

    // compensation never hurts
    let correct = oracle::oracle_rsqrt(x).expect("positive finite");
    let naive_dist = fp::ulp_distance(t.y, correct).unwrap_or(u64::MAX);
    let comp_dist = fp::ulp_distance(t.result, correct).unwrap_or(u64::MAX);
    let fam = &mut out[4];
    fam.checked += 1;
    if comp_dist > naive_dist {
        fam.fail(xf, format!("compensated is {comp_dist} ulp off, naive {naive_dist}"));
    }
}

fn empty_results() -> [FamilyResult; 5] {
    InvariantFamily::ALL.map(FamilyResult::new)
}

impl Engine {
    /// Runs the five invariant families over the plan's sample stream using
    /// the real compensated Newton step.
    pub fn run_invariant_suite(&self, plan: &SamplePlan) -> Result<InvariantReport, HarnessError> {
        match plan.precision {
            Precision::Binary32 => run_invariant_suite_with(self, plan, algos::trace_newton::<f32>),
            Precision::Binary64 => run_invariant_suite_with(self, plan, algos::trace_newton::<f64>),
        }
    }
}

/// Like [`Engine::run_invariant_suite`] with a caller-supplied tracer, so a
/// faulty step sequence can be fed in deliberately.
pub fn run_invariant_suite_with<F, T>(
    engine: &Engine,
    plan: &SamplePlan,
    tracer: T,
) -> Result<InvariantReport, HarnessError>
where
    F: Kernels,
    T: Fn(F) -> NewtonTrace<F> + Sync,
{
    let mut plan = plan.clone();
    if plan.algorithms.is_empty() {
        plan.algorithms = vec![algos::AlgorithmId::Newton];
    }
    plan.validate()?;
    if plan.precision != F::PRECISION {
        return Err(HarnessError::InvalidPlan(format!(
            "plan precision {} does not match tracer precision {}",
            plan.precision,
            F::PRECISION
        )));
    }
    let lo = F::from_f64_exact(plan.lo).expect("validated");
    let hi = F::from_f64_exact(plan.hi).expect("validated");
    if !(algos::in_safe_window(lo) && hi <= algos::safe_window_max::<F>()) {
        return Err(HarnessError::InvalidPlan(
            "invariant checks need an interval inside the direct-evaluation window".into(),
        ));
    }
    let sampler = plan.sampler()?;
    // 1.5 u (1 + 2^-20) = 3 (2^20 + 1) 2^(-p-21)
    let naive_bound = DyadicRational::new(
        num_bigint::BigInt::from(3 * ((1u64 << 20) + 1)),
        -(F::PRECISION.p() as i64) - 21,
    );

    let starts: Vec<u64> = (0..plan.count).step_by(CHUNK as usize).collect();
    let count = plan.count;
    let parts: Vec<[FamilyResult; 5]> = engine.pool.install(|| {
        starts
            .par_iter()
            .map(|&start| {
                let mut out = empty_results();
                for i in start..(start + CHUNK).min(count) {
                    let x: F = sampler.sample(i);
                    check_one(&tracer(x), &naive_bound, &mut out);
                }
                out
            })
            .collect()
    });

    let mut families = empty_results();
    for part in parts {
        for (acc, p) in families.iter_mut().zip(part) {
            acc.merge(p);
        }
    }
    Ok(InvariantReport { families: families.into() })
}
