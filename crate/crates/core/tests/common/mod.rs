#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subpix_core::{FlowField, ImageGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ImageGrid {
    ImageGrid::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

pub fn random_flow(rng: &mut ChaCha8Rng, w: usize, h: usize, max_mag: f64) -> FlowField {
    let u = (0..w * h).map(|_| rng.gen_range(-max_mag..max_mag)).collect();
    let v = (0..w * h).map(|_| rng.gen_range(-max_mag..max_mag)).collect();
    FlowField::new(w, h, u, v).unwrap()
}

/// Random flow whose SPMC sampling offsets stay at least `margin` away
/// from the bilinear kernel kinks (integer HR offsets).
pub fn random_flow_off_kinks(
    rng: &mut ChaCha8Rng,
    w: usize,
    h: usize,
    alpha: f64,
    margin: f64,
) -> FlowField {
    let mut component = |_: ()| -> Vec<f64> {
        (0..w * h)
            .map(|_| {
                loop {
                    let c: f64 = rng.gen_range(-1.5..1.5);
                    let frac = (alpha * c).rem_euclid(1.0);
                    if frac > margin && frac < 1.0 - margin {
                        return c;
                    }
                }
            })
            .collect()
    };
    let u = component(());
    let v = component(());
    FlowField::new(w, h, u, v).unwrap()
}
