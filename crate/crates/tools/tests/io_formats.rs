//! Format edge cases beyond the round trips in the acceptance gate.

use subpix_core::synth::smooth_random_texture;
use subpix_tools::io::{read_flo, read_image, write_image};
use subpix_tools::ToolError;

#[test]
fn pgm_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let img = smooth_random_texture(19, 11, 1.0, 3);
    let path = dir.path().join("frame.pgm");
    write_image(&path, &img).unwrap();
    let back = read_image(&path).unwrap();
    let quantized = img.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() / 255.0);
    assert_eq!(quantized, back);
}

#[test]
fn rgb_png_reads_as_luminance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("color.png");
    let mut rgb = image::RgbImage::new(8, 8);
    for (x, y, p) in rgb.enumerate_pixels_mut() {
        p.0 = [x as u8 * 30, y as u8 * 30, 128];
    }
    rgb.save(&path).unwrap();
    let gray = read_image(&path).unwrap();
    assert_eq!(gray.dims(), (8, 8));
    // BT.601 weights on the known corner pixel
    let expect: f64 = 0.299 * 0.0 + 0.587 * 0.0 + 0.114 * 128.0 / 255.0;
    assert!((gray.get(0, 0) - expect).abs() < 1e-12);
}

#[test]
fn flo_rejects_bad_tag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.flo");
    std::fs::write(&path, [0u8; 32]).unwrap();
    match read_flo(&path) {
        Err(ToolError::Format(msg)) => assert!(msg.contains("tag")),
        other => panic!("expected format error, got {other:?}"),
    }
}

#[test]
fn flo_rejects_truncated_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.flo");
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&202021.25f32.to_le_bytes());
    bytes.extend_from_slice(&4i32.to_le_bytes());
    bytes.extend_from_slice(&4i32.to_le_bytes());
    bytes.extend_from_slice(&[0u8; 8]); // far fewer than 4*4*2 floats
    std::fs::write(&path, bytes).unwrap();
    assert!(read_flo(&path).is_err());
}
