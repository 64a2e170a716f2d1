//! Image ingestion, tensorization, observation masks, run reports and the
//! RSE metric.
//!
//! Pixel samples are flattened with the channel varying fastest, then the
//! column, then the row, then the frame. Tensorization reinterprets that
//! flat sequence with a new shape (first index fastest) and never permutes,
//! so `detensorize(tensorize(img)) == img` bit for bit and masks follow the
//! same mapping.

pub mod mask;
pub mod pnm;
pub mod report;

pub use mask::{make_mask, random_entries, MaskKind, MaskSpec, StripeAxis};
pub use pnm::{load_image, save_image, ImageBuffer};
pub use report::{trace_csv, Summary};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Geometry of a stack of equally sized images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelLayout {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub frames: usize,
}

/// Position of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
    pub channel: usize,
    pub frame: usize,
}

impl PixelLayout {
    pub fn of(img: &ImageBuffer) -> Self {
        Self {
            height: img.height(),
            width: img.width(),
            channels: img.channels(),
            frames: 1,
        }
    }

    pub fn frame_len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn len(&self) -> usize {
        self.frame_len() * self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, mut i: usize) -> Pixel {
        let channel = i % self.channels;
        i /= self.channels;
        let col = i % self.width;
        i /= self.width;
        let row = i % self.height;
        Pixel {
            row,
            col,
            channel,
            frame: i / self.height,
        }
    }

    /// Shape of the un-reshaped tensor: `(C, W, H)` plus `F` for stacks,
    /// with singleton channel and frame axes dropped.
    pub fn natural_shape(&self) -> Vec<usize> {
        let mut shape = Vec::with_capacity(4);
        if self.channels > 1 {
            shape.push(self.channels);
        }
        shape.push(self.width);
        shape.push(self.height);
        if self.frames > 1 {
            shape.push(self.frames);
        }
        shape
    }
}

/// Layout of a frame stack; every frame must share the first frame's size.
pub fn frames_layout(frames: &[ImageBuffer]) -> Result<PixelLayout> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Argument("no frames given".into()))?;
    let mut layout = PixelLayout::of(first);
    if let Some((i, f)) = frames
        .iter()
        .enumerate()
        .find(|(_, f)| PixelLayout::of(f) != layout)
    {
        return Err(Error::Shape(format!(
            "frame {i} is {}x{}x{}, expected {}x{}x{}",
            f.height(),
            f.width(),
            f.channels(),
            layout.height,
            layout.width,
            layout.channels
        )));
    }
    layout.frames = frames.len();
    Ok(layout)
}

pub fn tensorize(img: &ImageBuffer, target_shape: &[usize]) -> Result<DenseTensor> {
    tensorize_frames(std::slice::from_ref(img), target_shape)
}

pub fn tensorize_frames(frames: &[ImageBuffer], target_shape: &[usize]) -> Result<DenseTensor> {
    let layout = frames_layout(frames)?;
    let expected: usize = target_shape.iter().product();
    if expected != layout.len() {
        return Err(Error::Shape(format!(
            "target shape {target_shape:?} holds {expected} values, images hold {}",
            layout.len()
        )));
    }
    let data = frames.iter().flat_map(|f| f.pixels().iter().copied()).collect();
    DenseTensor::new(target_shape.to_vec(), data)
}

/// Splits a tensor back into frames, clamping samples into `[0, 1]`.
pub fn detensorize(x: &DenseTensor, layout: &PixelLayout) -> Result<Vec<ImageBuffer>> {
    if x.len() != layout.len() {
        return Err(Error::Shape(format!(
            "tensor holds {} values, layout needs {}",
            x.len(),
            layout.len()
        )));
    }
    x.data()
        .chunks(layout.frame_len())
        .map(|chunk| {
            ImageBuffer::new(
                layout.height,
                layout.width,
                layout.channels,
                chunk.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            )
        })
        .collect()
}

/// `||x - t||_F / ||t||_F`.
pub fn rse(x: &DenseTensor, t: &DenseTensor) -> Result<f64> {
    if !x.same_shape(t) {
        return Err(Error::Shape(format!(
            "cannot compare shapes {:?} and {:?}",
            x.shape(),
            t.shape()
        )));
    }
    let reference = t.frobenius_norm();
    if reference == 0.0 {
        return Err(Error::Argument("reference tensor has zero norm".into()));
    }
    Ok(x.distance(t) / reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(h: usize, w: usize, c: usize, offset: usize) -> ImageBuffer {
        let bytes: Vec<u8> = (0..h * w * c).map(|i| ((i * 31 + offset) % 256) as u8).collect();
        ImageBuffer::from_bytes(h, w, c, &bytes).unwrap()
    }

    #[test]
    fn rse_examples() {
        let t = DenseTensor::new(vec![2, 2], vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(rse(&t, &t).unwrap(), 0.0);
        let mut twice = t.clone();
        twice.scale(2.0);
        assert!((rse(&twice, &t).unwrap() - 1.0).abs() < 1e-15);
        let zero = DenseTensor::zeros(vec![2, 2]).unwrap();
        assert_eq!(rse(&zero, &t).unwrap(), 1.0);
        assert!(matches!(rse(&t, &zero), Err(Error::Argument(_))));
    }

    #[test]
    fn tensorize_ninth_order_image() {
        let img = gradient(256, 256, 3, 0);
        let shape = [4, 4, 4, 4, 4, 4, 4, 4, 3];
        let x = tensorize(&img, &shape).unwrap();
        assert_eq!(x.shape(), &shape);
        let back = detensorize(&x, &PixelLayout::of(&img)).unwrap();
        assert_eq!(back, vec![img]);
    }

    #[test]
    fn tensorize_video_stack() {
        let frames: Vec<ImageBuffer> = (0..32).map(|f| gradient(112, 160, 3, f)).collect();
        let x = tensorize_frames(&frames, &[16, 7, 16, 10, 3, 8, 4]).unwrap();
        assert_eq!(x.order(), 7);
        let layout = frames_layout(&frames).unwrap();
        assert_eq!(detensorize(&x, &layout).unwrap(), frames);
    }

    #[test]
    fn tensorize_rejects_count_mismatch() {
        let img = gradient(4, 4, 3, 0);
        assert!(matches!(
            tensorize(&img, &[4, 4, 4]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn positions_follow_channel_fastest_order() {
        let l = PixelLayout {
            height: 2,
            width: 3,
            channels: 3,
            frames: 2,
        };
        let p = l.position(1 + 3 * (2 + 3 * (1 + 2)));
        assert_eq!(
            p,
            Pixel {
                row: 1,
                col: 2,
                channel: 1,
                frame: 1
            }
        );
        assert_eq!(l.natural_shape(), vec![3, 3, 2, 2]);
    }

    #[test]
    fn detensorize_clamps_out_of_range() {
        let img = gradient(2, 2, 1, 0);
        let mut x = tensorize(&img, &[2, 2]).unwrap();
        x.data_mut()[0] = -0.5;
        x.data_mut()[1] = 1.5;
        let back = detensorize(&x, &PixelLayout::of(&img)).unwrap();
        assert_eq!(back[0].pixels()[..2], [0.0, 1.0]);
    }

    #[test]
    fn mismatched_frames_are_rejected() {
        let frames = vec![gradient(2, 2, 3, 0), gradient(2, 3, 3, 0)];
        assert!(frames_layout(&frames).is_err());
    }
}
