mod common;

use common::{brute_force_feasible, guillotine, random_instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reliefnav::packing::{pack_feasible, validate_placements, GaConfig};

#[test]
fn oracle_known_cases() {
    assert!(brute_force_feasible([2, 2, 2], &[[1, 1, 1]; 8]));
    assert!(!brute_force_feasible([2, 2, 2], &[[1, 1, 1]; 9]));
    // Enough volume but no room: two 2x2x1 slabs in a 3x3x1 box.
    assert!(!brute_force_feasible([3, 3, 1], &[[2, 2, 1], [2, 2, 1]]));
    assert!(brute_force_feasible([3, 3, 1], &[[2, 1, 1], [2, 1, 1], [2, 1, 1], [2, 1, 1]]));
    // Pinwheel of four 2x1 bars around a hole in a 3x3x1 bay.
    assert!(brute_force_feasible([3, 3, 1], &[[1, 2, 1], [2, 1, 1], [1, 2, 1], [2, 1, 1]]));
    assert!(brute_force_feasible([1, 3, 1], &[[3, 1, 1]]));
    assert!(!brute_force_feasible([2, 2, 2], &[[3, 1, 1]]));
    assert!(brute_force_feasible([8, 10, 14], &[[14, 7, 5], [12, 7, 4]]));
    assert!(!brute_force_feasible([8, 10, 14], &[[14, 7, 5], [14, 7, 5], [12, 7, 4]]));
}

#[test]
fn oracle_accepts_every_guillotine_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let bay = [2, 3, 4].map(|_| rand::Rng::random_range(&mut rng, 2..=7u32));
        let boxes = guillotine(&mut rng, bay, 4);
        assert!(brute_force_feasible(bay, &boxes), "{bay:?} {boxes:?}");
    }
}

#[test]
fn ga_matches_oracle_on_small_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..60 {
        let inst = random_instance(&mut rng, 6);
        let expect = brute_force_feasible(inst.bay, &inst.boxes);
        let got = pack_feasible(inst.bay_f64(), &inst.items(), &GaConfig { seed: i, ..Default::default() }).unwrap();
        assert_eq!(got.feasible, expect, "{inst:?}");
        if got.feasible {
            validate_placements(inst.bay_f64(), &inst.items(), &got.placements).unwrap();
        }
    }
}
