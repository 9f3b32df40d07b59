//! Adjoint identities for every operator pair, both matrix-free (inner
//! products on random instances) and via dense materialization.

mod common;

use common::{random_flow, random_image, rng};
use rand::Rng;
use subpix_core::ops::{
    backward_warp, decimate, forward_warp, gaussian_blur, materialize_operator, zero_upsample,
    BlurSpec, DecimationFactor, LinearOp,
};
use subpix_core::spmc::{spmc_adjoint, spmc_forward, SpmcConfig};
use subpix_core::SamplingKernel;

const TOL: f64 = 1e-10;

#[test]
fn decimation_pair_inner_products() {
    let mut rng = rng(101);
    let f = DecimationFactor::new(2).unwrap();
    for _ in 0..100 {
        let x = random_image(&mut rng, 8, 8);
        let y = random_image(&mut rng, 4, 4);
        let lhs = decimate(&x, f).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&zero_upsample(&y, f)).unwrap();
        assert!((lhs - rhs).abs() <= TOL);
    }
}

#[test]
fn warp_pair_inner_products() {
    let mut rng = rng(102);
    for kernel in [SamplingKernel::Bilinear, SamplingKernel::BicubicA] {
        for _ in 0..100 {
            let x = random_image(&mut rng, 8, 8);
            let y = random_image(&mut rng, 8, 8);
            let flow = random_flow(&mut rng, 8, 8, 2.0);
            let lhs = backward_warp(&x, &flow, kernel).unwrap().dot(&y).unwrap();
            let rhs = x.dot(&forward_warp(&y, &flow, kernel).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= TOL, "{kernel:?}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn blur_is_self_adjoint() {
    let mut rng = rng(103);
    let spec = BlurSpec::new(1.2).unwrap();
    for _ in 0..100 {
        let x = random_image(&mut rng, 8, 8);
        let y = random_image(&mut rng, 8, 8);
        let lhs = gaussian_blur(&x, &spec).dot(&y).unwrap();
        let rhs = x.dot(&gaussian_blur(&y, &spec)).unwrap();
        assert!((lhs - rhs).abs() <= TOL);
    }
}

#[test]
fn spmc_forward_backward_pair() {
    let mut rng = rng(104);
    let cfg = SpmcConfig::new(2.0).unwrap();
    for _ in 0..100 {
        let x = random_image(&mut rng, 8, 8);
        let y = random_image(&mut rng, 16, 16);
        let flow = random_flow(&mut rng, 8, 8, 1.5);
        let lhs = spmc_forward(&x, &flow, &cfg).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&spmc_adjoint(&y, &flow, &cfg).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= TOL);
    }
}

#[test]
fn materialized_decimation_transpose() {
    let f = DecimationFactor::new(2).unwrap();
    let s = materialize_operator(&LinearOp::Decimate(f), 8, 8).unwrap();
    let st = materialize_operator(&LinearOp::ZeroUpsample(f), 4, 4).unwrap();
    assert!(s.transposed().max_abs_diff(&st) <= TOL);
}

#[test]
fn materialized_warp_transpose() {
    let mut rng = rng(105);
    for kernel in [SamplingKernel::Bilinear, SamplingKernel::BicubicA] {
        let flow = random_flow(&mut rng, 6, 6, 2.0);
        let w = materialize_operator(&LinearOp::BackwardWarp(&flow, kernel), 6, 6).unwrap();
        let wt = materialize_operator(&LinearOp::ForwardWarp(&flow, kernel), 6, 6).unwrap();
        assert!(w.transposed().max_abs_diff(&wt) <= TOL);
    }
}

#[test]
fn materialized_blur_symmetric() {
    let spec = BlurSpec::new(0.8).unwrap();
    let k = materialize_operator(&LinearOp::Blur(&spec), 6, 6).unwrap();
    assert!(k.transposed().max_abs_diff(&k) <= TOL);
}

#[test]
fn integer_interior_flow_permutes_pixels() {
    // every bilinear weight is 0 or 1, so forward warping permutes values
    let mut rng = rng(106);
    let img = random_image(&mut rng, 8, 8);
    let mut u = vec![0.0; 64];
    let mut v = vec![0.0; 64];
    for y in 2..6 {
        for x in 2..6 {
            u[y * 8 + x] = rng.gen_range(-2i64..=2) as f64;
            v[y * 8 + x] = rng.gen_range(-2i64..=2) as f64;
        }
    }
    let flow = subpix_core::FlowField::new(8, 8, u, v).unwrap();
    let out = forward_warp(&img, &flow, SamplingKernel::Bilinear).unwrap();
    // each output value is a sum of distinct source pixels; check that every
    // splatted weight was exactly 1 by materializing
    let m = materialize_operator(&LinearOp::ForwardWarp(&flow, SamplingKernel::Bilinear), 8, 8)
        .unwrap();
    for &w in &m.data {
        assert!(w == 0.0 || w == 1.0);
    }
    assert!((out.sum() - img.sum()).abs() <= TOL);
}

#[test]
fn normal_operator_diagonal_for_integer_interior_flow() {
    // W^T S^T S W is diagonal when the flow is integer-valued and interior
    let mut rng = rng(107);
    let f = DecimationFactor::new(2).unwrap();
    let mut u = vec![0.0; 64];
    let mut v = vec![0.0; 64];
    for y in 2..6 {
        for x in 2..6 {
            u[y * 8 + x] = rng.gen_range(-2i64..=2) as f64;
            v[y * 8 + x] = rng.gen_range(-2i64..=2) as f64;
        }
    }
    let flow = subpix_core::FlowField::new(8, 8, u, v).unwrap();
    let w = materialize_operator(&LinearOp::BackwardWarp(&flow, SamplingKernel::Bilinear), 8, 8)
        .unwrap();
    let s = materialize_operator(&LinearOp::Decimate(f), 8, 8).unwrap();
    // A = W^T S^T S W computed as dense products
    let n = 64;
    let mut sw = vec![0.0; s.rows * n];
    for r in 0..s.rows {
        for c in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += s.get(r, k) * w.get(k, c);
            }
            sw[r * n + c] = acc;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut acc = 0.0;
            for r in 0..s.rows {
                acc += sw[r * n + i] * sw[r * n + j];
            }
            assert!(acc.abs() <= TOL, "off-diagonal ({i}, {j}) = {acc}");
        }
    }
}
