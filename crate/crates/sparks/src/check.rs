//! Row checks split over threads.

use std::num::NonZeroUsize;
use std::thread;

use sparks_core::harness::{finish, verify_steps, DenseAssignment, Objective, PartialReport, VerifyOptions, VerifyReport};
use sparks_core::lpgen::{BitPoint, LpModel};

/// Worker count from the machine, at least one.
pub fn default_workers() -> usize {
    thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1)
}

/// Same result as [`sparks_core::harness::verify`], with the time steps
/// split into contiguous chunks checked in parallel. Chunk reports are
/// merged in time order, so the report does not depend on scheduling.
pub fn verify_parallel(
    model: &LpModel,
    sol: &DenseAssignment,
    objective: Option<&Objective>,
    reference: Option<&BitPoint>,
    opts: &VerifyOptions,
    workers: usize,
) -> VerifyReport {
    let snapped = sol.snapped(opts.tol);
    let steps = model.horizon + 1;
    let workers = (workers.max(1) as u32).min(steps);
    let chunk = steps.div_ceil(workers);
    let parts: Vec<PartialReport> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|k| {
                let range = k * chunk..((k + 1) * chunk).min(steps);
                let snapped = snapped.as_ref();
                s.spawn(move || verify_steps(model, sol, snapped, range, opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("verifier thread panicked")).collect()
    });
    let mut checks = PartialReport::default();
    for p in parts {
        checks.merge(p, opts.max_listed);
    }
    finish(model, sol, snapped.as_ref(), checks, objective, reference, opts)
}
