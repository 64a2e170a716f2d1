//! Observation masks over images and frame stacks.
//!
//! Masks are laid out like pixel data (see [`super::PixelLayout`]) so they
//! can be tensorized with exactly the same reshape as the samples.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::PixelLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    /// Every sample dropped independently.
    RandomEntries,
    /// Whole image columns (or rows) dropped.
    Stripes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StripeAxis {
    /// Missing columns, i.e. vertical stripes.
    #[default]
    Columns,
    Rows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    pub kind: MaskKind,
    /// Fraction of entries (or lines) missing, in `[0, 1)`.
    pub missing_ratio: f64,
    pub seed: u64,
    pub stripe_axis: StripeAxis,
    /// Draw a separate stripe set for every frame instead of sharing one.
    pub per_frame: bool,
}

impl MaskSpec {
    pub fn new(kind: MaskKind, missing_ratio: f64, seed: u64) -> Self {
        Self {
            kind,
            missing_ratio,
            seed,
            stripe_axis: StripeAxis::Columns,
            per_frame: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.missing_ratio) {
            return Err(Error::Argument(format!(
                "missing ratio must be < 1 and >= 0, got {}",
                self.missing_ratio
            )));
        }
        Ok(())
    }
}

/// `ceil(ratio * n)`, ignoring floating noise just above an integer, and
/// capped at `n - 1` so at least one line stays observed.
pub fn missing_lines(ratio: f64, n: usize) -> usize {
    let exact = ratio * n as f64;
    let rounded = exact.round();
    let count = if (exact - rounded).abs() < 1e-9 {
        rounded
    } else {
        exact.ceil()
    };
    (count as usize).min(n.saturating_sub(1))
}

/// Each of `len` entries missing independently with probability
/// `missing_ratio`; `true` marks an observed entry. At least one entry is
/// kept.
pub fn random_entries(len: usize, missing_ratio: f64, seed: u64) -> Result<Vec<bool>> {
    MaskSpec::new(MaskKind::RandomEntries, missing_ratio, seed).validate()?;
    Ok(draw_entries(
        &mut ChaCha8Rng::seed_from_u64(seed),
        len,
        missing_ratio,
    ))
}

fn draw_entries(rng: &mut ChaCha8Rng, len: usize, missing_ratio: f64) -> Vec<bool> {
    let mut mask: Vec<bool> = (0..len)
        .map(|_| rng.random::<f64>() >= missing_ratio)
        .collect();
    if len > 0 && !mask.iter().any(|&m| m) {
        let keep = rng.random_range(0..len);
        mask[keep] = true;
    }
    mask
}

/// `true` marks an observed sample. Deterministic in `spec.seed`.
pub fn make_mask(layout: &PixelLayout, spec: &MaskSpec) -> Result<Vec<bool>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let len = layout.len();
    let mask = match spec.kind {
        MaskKind::RandomEntries => draw_entries(&mut rng, len, spec.missing_ratio),
        MaskKind::Stripes => {
            let lines = match spec.stripe_axis {
                StripeAxis::Columns => layout.width,
                StripeAxis::Rows => layout.height,
            };
            let count = missing_lines(spec.missing_ratio, lines);
            let sets = if spec.per_frame { layout.frames } else { 1 };
            let missing: Vec<Vec<bool>> = (0..sets)
                .map(|_| {
                    let mut m = vec![false; lines];
                    for i in index::sample(&mut rng, lines, count) {
                        m[i] = true;
                    }
                    m
                })
                .collect();
            let mut mask = vec![true; len];
            for (i, observed) in mask.iter_mut().enumerate() {
                let p = layout.position(i);
                let line = match spec.stripe_axis {
                    StripeAxis::Columns => p.col,
                    StripeAxis::Rows => p.row,
                };
                let set = if spec.per_frame { p.frame } else { 0 };
                *observed = !missing[set][line];
            }
            mask
        }
    };
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(h: usize, w: usize, c: usize, f: usize) -> PixelLayout {
        PixelLayout {
            height: h,
            width: w,
            channels: c,
            frames: f,
        }
    }

    #[test]
    fn zero_ratio_observes_everything() {
        for kind in [MaskKind::RandomEntries, MaskKind::Stripes] {
            let mask = make_mask(&layout(5, 7, 3, 1), &MaskSpec::new(kind, 0.0, 9)).unwrap();
            assert!(mask.iter().all(|&m| m));
        }
    }

    #[test]
    fn stripe_count_is_exact() {
        assert_eq!(missing_lines(0.3, 10), 3);
        assert_eq!(missing_lines(0.3, 256), 77);
        assert_eq!(missing_lines(0.99, 10), 9);
        let l = layout(4, 10, 3, 1);
        let mask = make_mask(&l, &MaskSpec::new(MaskKind::Stripes, 0.3, 1)).unwrap();
        let missing_cols: Vec<usize> = (0..10)
            .filter(|&c| (0..4).all(|r| (0..3).all(|ch| !mask[ch + 3 * (c + 10 * r)])))
            .collect();
        assert_eq!(missing_cols.len(), 3);
        assert_eq!(mask.iter().filter(|&&m| !m).count(), 3 * 4 * 3);
    }

    #[test]
    fn row_stripes() {
        let l = layout(10, 4, 1, 1);
        let mut spec = MaskSpec::new(MaskKind::Stripes, 0.5, 2);
        spec.stripe_axis = StripeAxis::Rows;
        let mask = make_mask(&l, &spec).unwrap();
        for r in 0..10 {
            let row: Vec<bool> = (0..4).map(|c| mask[c + 4 * r]).collect();
            assert!(row.iter().all(|&m| m == row[0]));
        }
        assert_eq!(mask.iter().filter(|&&m| !m).count(), 5 * 4);
    }

    #[test]
    fn frames_share_stripes_unless_asked() {
        let l = layout(3, 12, 1, 4);
        let shared = make_mask(&l, &MaskSpec::new(MaskKind::Stripes, 0.25, 5)).unwrap();
        let frame = 3 * 12;
        for f in 1..4 {
            assert_eq!(shared[..frame], shared[f * frame..(f + 1) * frame]);
        }
        let mut spec = MaskSpec::new(MaskKind::Stripes, 0.25, 5);
        spec.per_frame = true;
        let separate = make_mask(&l, &spec).unwrap();
        assert!((1..4).any(|f| separate[..frame] != separate[f * frame..(f + 1) * frame]));
    }

    #[test]
    fn ratio_must_be_below_one() {
        let err = make_mask(&layout(2, 2, 1, 1), &MaskSpec::new(MaskKind::Stripes, 1.0, 0));
        assert!(matches!(err, Err(Error::Argument(m)) if m.contains("must be < 1")));
        assert!(MaskSpec::new(MaskKind::RandomEntries, -0.1, 0).validate().is_err());
    }

    #[test]
    fn random_entries_match_image_masks() {
        let l = layout(6, 5, 3, 1);
        let spec = MaskSpec::new(MaskKind::RandomEntries, 0.3, 4);
        assert_eq!(
            make_mask(&l, &spec).unwrap(),
            random_entries(l.len(), 0.3, 4).unwrap()
        );
        assert!(random_entries(10, 1.0, 0).is_err());
    }

    #[test]
    fn masks_are_seeded() {
        let l = layout(8, 8, 3, 1);
        for kind in [MaskKind::RandomEntries, MaskKind::Stripes] {
            let a = make_mask(&l, &MaskSpec::new(kind, 0.4, 17)).unwrap();
            let b = make_mask(&l, &MaskSpec::new(kind, 0.4, 17)).unwrap();
            let c = make_mask(&l, &MaskSpec::new(kind, 0.4, 18)).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }
}
