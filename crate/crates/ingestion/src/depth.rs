use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, RgbImage};

use crate::error::{Error, Result};

/// 16-bit depth raster; value 0 marks an invalid measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    data: Vec<u16>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, data: Vec<u16>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::Parse(format!(
                "depth buffer holds {} values for a {}x{} image",
                data.len(),
                width,
                height
            )));
        }
        Ok(DepthMap {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, u: u32, v: u32) -> u16 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|&&d| d != 0).count()
    }
}

/// Depth PNGs must be 16-bit single-channel; an 8-bit file silently scaled
/// would corrupt every distance, so it is an error instead.
pub fn load_depth_png(path: &Path) -> Result<DepthMap> {
    match image::open(path)? {
        DynamicImage::ImageLuma16(img) => {
            let (w, h) = img.dimensions();
            DepthMap::new(w, h, img.into_raw())
        }
        other => Err(Error::Parse(format!(
            "{}: depth must be 16-bit grayscale, found {:?}",
            path.display(),
            other.color()
        ))),
    }
}

pub fn save_depth_png(map: &DepthMap, path: &Path) -> Result<()> {
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(map.width, map.height, map.data.clone())
            .expect("dimensions validated at construction");
    img.save(path)?;
    Ok(())
}

pub fn load_rgb_png(path: &Path) -> Result<RgbImage> {
    match image::open(path)? {
        DynamicImage::ImageRgb8(img) => Ok(img),
        other => Err(Error::Parse(format!(
            "{}: color image must be 8-bit RGB, found {:?}",
            path.display(),
            other.color()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buffer_length_must_match_dimensions() {
        assert!(DepthMap::new(4, 3, vec![0; 12]).is_ok());
        assert!(DepthMap::new(4, 3, vec![0; 11]).is_err());
    }

    #[test]
    fn depth_png_round_trip_preserves_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("depth.png");
        let data: Vec<u16> = (0..12).map(|i| i * 5000).collect();
        let map = DepthMap::new(4, 3, data).unwrap();
        save_depth_png(&map, &path).unwrap();
        assert_eq!(load_depth_png(&path).unwrap(), map);
    }

    #[test]
    fn eight_bit_depth_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("depth8.png");
        image::GrayImage::from_pixel(4, 3, Luma([128u8]))
            .save(&path)
            .unwrap();
        assert!(matches!(load_depth_png(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn grayscale_color_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.png");
        image::GrayImage::from_pixel(4, 3, Luma([9u8]))
            .save(&path)
            .unwrap();
        assert!(matches!(load_rgb_png(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn rgb_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let mut img = RgbImage::new(3, 2);
        for (x, y, p) in img.enumerate_pixels_mut() {
            p.0 = [x as u8 * 40, y as u8 * 90, 200];
        }
        img.save(&path).unwrap();
        assert_eq!(load_rgb_png(&path).unwrap(), img);
    }
}
