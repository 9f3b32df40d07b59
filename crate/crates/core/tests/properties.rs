//! Randomized structural invariants: operator equivalences that must hold
//! bitwise, and metric symmetries.

mod common;

use proptest::prelude::*;
use subpix_core::metrics::{psnr, ssim, PSNR_CAP_DB};
use subpix_core::ops::{decimate, forward_warp, zero_upsample, DecimationFactor};
use subpix_core::spmc::{spmc_forward, SpmcConfig};
use subpix_core::{FlowField, ImageGrid, SamplingKernel};

fn image_strategy(max_dim: usize) -> impl Strategy<Value = ImageGrid> {
    (2..=max_dim, 2..=max_dim)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(0.0..1.0f64, w * h)
                .prop_map(move |data| ImageGrid::new(w, h, data).unwrap())
        })
}

fn flow_strategy(w: usize, h: usize, max_mag: f64) -> impl Strategy<Value = FlowField> {
    (
        proptest::collection::vec(-max_mag..max_mag, w * h),
        proptest::collection::vec(-max_mag..max_mag, w * h),
    )
        .prop_map(move |(u, v)| FlowField::new(w, h, u, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn zero_flow_splat_is_zero_upsampling(img in image_strategy(8), alpha in 2usize..=4) {
        let cfg = SpmcConfig::new(alpha as f64).unwrap();
        let (w, h) = img.dims();
        let flow = FlowField::zeros(w, h);
        let splat = spmc_forward(&img, &flow, &cfg).unwrap();
        let up = zero_upsample(&img, DecimationFactor::new(alpha).unwrap());
        prop_assert_eq!(splat, up);
    }

    #[test]
    fn unit_scale_splat_is_forward_warp((img, flow) in image_strategy(8).prop_flat_map(|img| {
        let (w, h) = img.dims();
        (Just(img), flow_strategy(w, h, 2.0))
    })) {
        let cfg = SpmcConfig::new(1.0).unwrap();
        let splat = spmc_forward(&img, &flow, &cfg).unwrap();
        let warped = forward_warp(&img, &flow, SamplingKernel::Bilinear).unwrap();
        prop_assert_eq!(splat, warped);
    }

    #[test]
    fn decimate_inverts_zero_upsample(img in image_strategy(8), alpha in 2usize..=4) {
        let f = DecimationFactor::new(alpha).unwrap();
        let up = zero_upsample(&img, f);
        let back = decimate(&up, f).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn psnr_is_symmetric(a in image_strategy(8)) {
        let b = a.map(|v| 1.0 - v);
        let ab = psnr(&a, &b, 1.0).unwrap();
        let ba = psnr(&b, &a, 1.0).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(psnr(&a, &a, 1.0).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn ssim_is_symmetric(seed in 0u64..1000) {
        // ssim needs at least one full 11x11 window
        let mut rng = common::rng(seed);
        let a = common::random_image(&mut rng, 16, 16);
        let b = common::random_image(&mut rng, 16, 16);
        let ab = ssim(&a, &b, 1.0).unwrap();
        let ba = ssim(&b, &a, 1.0).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((ssim(&a, &a, 1.0).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn splat_is_linear(seed in 0u64..1000) {
        let mut rng = common::rng(seed);
        let a = common::random_image(&mut rng, 6, 6);
        let b = common::random_image(&mut rng, 6, 6);
        let flow = common::random_flow(&mut rng, 6, 6, 1.5);
        let cfg = SpmcConfig::new(2.0).unwrap();
        let sum = ImageGrid::new(
            6,
            6,
            a.data().iter().zip(b.data()).map(|(x, y)| x + 2.0 * y).collect(),
        )
        .unwrap();
        let lhs = spmc_forward(&sum, &flow, &cfg).unwrap();
        let sa = spmc_forward(&a, &flow, &cfg).unwrap();
        let sb = spmc_forward(&b, &flow, &cfg).unwrap();
        for i in 0..lhs.data().len() {
            prop_assert!((lhs.data()[i] - (sa.data()[i] + 2.0 * sb.data()[i])).abs() <= 1e-12);
        }
    }
}
