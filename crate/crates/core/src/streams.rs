//! Counter-based random substreams.
//!
//! Each (trial, machine) pair gets its own ChaCha8 stream: the key is
//! derived from the master seed and the trial index, and the machine id
//! selects the ChaCha stream number. Adding machines or trials never
//! changes the draws of existing ones, and the schedule that evaluates
//! them is irrelevant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_key(master: u64, trial: u64) -> [u8; 32] {
    let mut t = trial;
    let mut state = master ^ splitmix64(&mut t);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Random stream for `machine` (1-based) in `trial`.
pub fn machine_stream(master: u64, trial: u64, machine: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(trial_key(master, trial));
    rng.set_stream(machine);
    rng
}

/// Stream for auxiliary sampling (random test populations), kept apart
/// from machine streams by using stream number `u64::MAX`.
pub fn aux_stream(master: u64, label: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(trial_key(master, label));
    rng.set_stream(u64::MAX);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(mut rng: ChaCha8Rng) -> Vec<u64> {
        (0..8).map(|_| rng.random()).collect()
    }

    #[test]
    fn same_coordinates_same_stream() {
        assert_eq!(draws(machine_stream(42, 3, 7)), draws(machine_stream(42, 3, 7)));
    }

    #[test]
    fn coordinates_separate_streams() {
        let base = draws(machine_stream(42, 0, 1));
        assert_ne!(base, draws(machine_stream(42, 0, 2)));
        assert_ne!(base, draws(machine_stream(42, 1, 1)));
        assert_ne!(base, draws(machine_stream(43, 0, 1)));
        assert_ne!(base, draws(aux_stream(42, 0)));
    }
}
