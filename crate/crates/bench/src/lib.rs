//! Fixtures shared by the criterion benches.

use boussinesq_core::families::random_spacetime_field;
use boussinesq_core::{counterexample_grid, counterexample_pair, CounterexamplePair, GridSpec, SpaceTimeField, SpectralField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn counterexample(n: i64) -> CounterexamplePair {
    let grid = counterexample_grid(n).expect("valid N");
    counterexample_pair(n, &grid).expect("pair fits its own grid")
}

/// Two seeded random fields on a 32-mode grid with `τ ∈ [-320, 320]`.
pub fn random_pair(seed: u64) -> (SpaceTimeField, SpaceTimeField) {
    let grid = GridSpec::new(32).unwrap().with_tau_spacing(320.0, 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_spacetime_field(&grid, 12, 0.0, &mut rng);
    (u, random_spacetime_field(&grid, 12, 0.0, &mut rng))
}

/// Small smooth data `0.1 cos x` on a 16-mode grid with `dt = 0.005`.
pub fn smooth_data() -> (SpectralField, SpectralField) {
    let grid = GridSpec::new(16).unwrap().with_tau(32.0, 257).unwrap().with_time(0.005, 0.1).unwrap();
    (SpectralField::trig(&grid, &[(1, 0.1)], &[]).unwrap(), SpectralField::zeros(&grid))
}
