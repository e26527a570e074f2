//! Shared fixtures for the benchmarks.

use trp_core::{generate, Domain, Generation, Level};

/// A builtin domain with its first source level.
pub fn fixture(name: &str) -> (Domain, Level) {
    let d = Domain::builtin(name).expect("builtin domain");
    let src = d.builtin_level("level1").expect("builtin level");
    (d, src)
}

/// One generation, for benchmarks of the later pipeline stages.
pub fn sample_generation(d: &Domain, src: &Level, seed: u64) -> Generation {
    generate(src, &d.rules, &d.kit, &d.budget, seed).expect("generation succeeds")
}
