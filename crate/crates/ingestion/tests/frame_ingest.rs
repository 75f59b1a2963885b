use std::fs;

use cloudpose_ingestion::{
    crop_by_bbox, crop_rgb, depth_to_cloud, load_dataset_manifest, load_depth_png, load_rgb_png,
    save_depth_png, BBox2d, CameraIntrinsics, DepthMap, Error,
};
use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn intrinsics(w: u32, h: u32) -> CameraIntrinsics {
    CameraIntrinsics {
        width: w,
        height: h,
        ..CameraIntrinsics::default()
    }
}

/// Depth map with a deterministic mix of valid and missing pixels.
fn speckled_depth(w: u32, h: u32, seed: u64) -> DepthMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h)
        .map(|_| {
            if rng.gen_bool(0.2) {
                0
            } else {
                rng.gen_range(300..4000)
            }
        })
        .collect();
    DepthMap::new(w, h, data).unwrap()
}

#[test]
fn frontoparallel_plane_reconstructs_at_its_true_depth() {
    let k = CameraIntrinsics::default();
    let depth = DepthMap::new(k.width, k.height, vec![1000; (k.width * k.height) as usize]).unwrap();
    let cloud = depth_to_cloud(&depth, None, &k).unwrap();
    assert_eq!(cloud.len(), (k.width * k.height) as usize);
    for i in 0..cloud.len() {
        assert_eq!(cloud.point(i).z, 1.0);
    }
    // Plane extent matches the frustum cross-section at 1 m.
    let half_w = (k.width as f64 - 1.0 - k.cx).max(k.cx) / k.fx;
    for i in 0..cloud.len() {
        assert!(cloud.point(i).x.abs() <= half_w + 1e-12);
    }
}

#[test]
fn full_image_bbox_matches_whole_frame_ingestion_exactly() {
    let k = intrinsics(64, 48);
    let depth = speckled_depth(64, 48, 7);
    let mut rgb = RgbImage::new(64, 48);
    for (x, y, p) in rgb.enumerate_pixels_mut() {
        p.0 = [(x * 4) as u8, (y * 5) as u8, 128];
    }
    let whole = depth_to_cloud(&depth, Some(&rgb), &k).unwrap();
    let bbox = BBox2d::new(0, 0, 64, 48).unwrap();
    let cropped = crop_by_bbox(&depth, Some(&rgb), &k, &bbox).unwrap();
    assert_eq!(whole, cropped);
}

#[test]
fn half_image_bbox_keeps_exactly_the_left_pixels() {
    let k = intrinsics(40, 30);
    let depth = DepthMap::new(40, 30, vec![900; 1200]).unwrap();
    let bbox = BBox2d::new(0, 0, 20, 30).unwrap();
    let cloud = crop_by_bbox(&depth, None, &k, &bbox).unwrap();
    assert_eq!(cloud.len(), 20 * 30);
    for i in 0..cloud.len() {
        // u < 20 < cx, so every retained point sits left of the axis.
        assert!(cloud.point(i).x < 0.0);
    }
}

#[test]
fn reprojection_recovers_every_pixel() {
    let k = intrinsics(32, 24);
    let depth = speckled_depth(32, 24, 3);
    let cloud = depth_to_cloud(&depth, None, &k).unwrap();
    let mut idx = 0;
    for v in 0..24 {
        for u in 0..32 {
            let d = depth.get(u, v);
            if d == 0 {
                continue;
            }
            let p = cloud.point(idx);
            idx += 1;
            let u_rec = p.x / p.z * k.fx + k.cx;
            let v_rec = p.y / p.z * k.fy + k.cy;
            assert!((u_rec - u as f64).abs() <= 0.5);
            assert!((v_rec - v as f64).abs() <= 0.5);
            assert_eq!((p.z * k.depth_scale).round() as u16, d);
        }
    }
    assert_eq!(idx, cloud.len());
}

#[test]
fn colors_are_normalized_channel_values() {
    let k = intrinsics(8, 8);
    let depth = DepthMap::new(8, 8, vec![1500; 64]).unwrap();
    let mut rgb = RgbImage::new(8, 8);
    for (x, y, p) in rgb.enumerate_pixels_mut() {
        p.0 = [(x * 30) as u8, (y * 30) as u8, 255 - (x * 20) as u8];
    }
    let cloud = depth_to_cloud(&depth, Some(&rgb), &k).unwrap();
    let colors = cloud.colors().unwrap();
    let mut idx = 0;
    for y in 0..8u32 {
        for x in 0..8u32 {
            let p = rgb.get_pixel(x, y).0;
            assert_eq!(colors[idx].x, p[0] as f64 / 255.0);
            assert_eq!(colors[idx].y, p[1] as f64 / 255.0);
            assert_eq!(colors[idx].z, p[2] as f64 / 255.0);
            idx += 1;
        }
    }
}

#[test]
fn boxes_are_clipped_to_the_image() {
    let k = intrinsics(20, 20);
    let depth = DepthMap::new(20, 20, vec![700; 400]).unwrap();

    // Hangs off the top-left corner: only the inside part survives.
    let partial = BBox2d::new(-5, -5, 10, 10).unwrap();
    let cloud = crop_by_bbox(&depth, None, &k, &partial).unwrap();
    assert_eq!(cloud.len(), 25);

    let outside = BBox2d::new(25, 0, 10, 10).unwrap();
    assert!(matches!(
        crop_by_bbox(&depth, None, &k, &outside),
        Err(Error::EmptyCrop)
    ));
}

#[test]
fn a_box_over_missing_depth_is_an_empty_crop() {
    let k = intrinsics(16, 16);
    let mut data = vec![800u16; 256];
    for v in 0..8 {
        for u in 0..8 {
            data[v * 16 + u] = 0;
        }
    }
    let depth = DepthMap::new(16, 16, data).unwrap();
    let bbox = BBox2d::new(0, 0, 8, 8).unwrap();
    assert!(matches!(
        crop_by_bbox(&depth, None, &k, &bbox),
        Err(Error::EmptyCrop)
    ));
}

#[test]
fn rgb_crops_cover_the_clipped_box() {
    let k = intrinsics(10, 10);
    let mut rgb = RgbImage::new(10, 10);
    for (x, y, p) in rgb.enumerate_pixels_mut() {
        p.0 = [x as u8, y as u8, 0];
    }
    let crop = crop_rgb(&rgb, &k, &BBox2d::new(3, 4, 4, 2).unwrap()).unwrap();
    assert_eq!((crop.width(), crop.height()), (4, 2));
    assert_eq!(crop.get_pixel(0, 0).0, [3, 4, 0]);
    assert_eq!(crop.get_pixel(3, 1).0, [6, 5, 0]);

    let clipped = crop_rgb(&rgb, &k, &BBox2d::new(8, 8, 5, 5).unwrap()).unwrap();
    assert_eq!((clipped.width(), clipped.height()), (2, 2));
}

#[test]
fn a_dataset_round_trips_from_disk_to_clouds() {
    let dir = tempfile::tempdir().unwrap();
    let k = intrinsics(24, 18);
    let depth = speckled_depth(24, 18, 11);
    let mut rgb = RgbImage::new(24, 18);
    for (x, y, p) in rgb.enumerate_pixels_mut() {
        p.0 = [x as u8 * 10, y as u8 * 10, 50];
    }
    save_depth_png(&depth, &dir.path().join("d.png")).unwrap();
    rgb.save(dir.path().join("c.png")).unwrap();

    let manifest = serde_json::json!({
        "intrinsics": {
            "fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy,
            "width": k.width, "height": k.height, "depth_scale": k.depth_scale,
        },
        "frames": [{
            "id": "frame-000",
            "rgb": "c.png",
            "depth": "d.png",
            "annotations": [{"label": "box", "bbox": [2, 2, 10, 10]}],
        }],
    });
    let path = dir.path().join("dataset.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();

    let dataset = load_dataset_manifest(&path).unwrap();
    assert_eq!(dataset.intrinsics, k);
    let frame = &dataset.frames[0];
    let loaded_depth = load_depth_png(&frame.depth).unwrap();
    let loaded_rgb = load_rgb_png(&frame.rgb).unwrap();
    assert_eq!(loaded_depth, depth);
    assert_eq!(loaded_rgb, rgb);

    let cloud = crop_by_bbox(
        &loaded_depth,
        Some(&loaded_rgb),
        &dataset.intrinsics,
        &frame.annotations[0].bbox,
    )
    .unwrap();
    assert!(!cloud.is_empty());
    assert!(cloud.len() <= 100);
    assert!(cloud.colors().is_some());
}
