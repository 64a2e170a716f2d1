mod common;

use proptest::prelude::*;
use trnnm::data::{detensorize, tensorize, ImageBuffer, PixelLayout};
use trnnm::linalg::{nuclear_norm, svd, svt};
use trnnm::tensor::{flat_index, multi_index};
use trnnm::{circular_fold, circular_unfold, CircularUnfolding, DenseMatrix, DenseTensor};

fn shape_strategy(max_order: usize, max_dim: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_dim, 2..=max_order)
}

fn tensor_strategy() -> impl Strategy<Value = DenseTensor> {
    shape_strategy(6, 4).prop_flat_map(|shape| {
        let len: usize = shape.iter().product();
        prop::collection::vec(-1e3f64..1e3, len)
            .prop_map(move |data| DenseTensor::new(shape.clone(), data).unwrap())
    })
}

fn matrix_strategy(max: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10f64..10.0, r * c)
            .prop_map(move |data| DenseMatrix::new(r, c, data).unwrap())
    })
}

proptest! {
    #[test]
    fn flat_and_multi_index_are_inverse(
        shape in prop::collection::vec(1usize..=12, 2..=8)
            .prop_filter("at most 1e5 elements", |s| s.iter().product::<usize>() <= 100_000)
    ) {
        let len: usize = shape.iter().product();
        for flat in 0..len {
            let idx = multi_index(&shape, flat);
            prop_assert_eq!(flat_index(&shape, &idx), flat);
        }
    }

    #[test]
    fn unfold_then_fold_is_identity(x in tensor_strategy(), k_seed in 0usize..64, d_seed in 0usize..64) {
        let n = x.order();
        let spec = CircularUnfolding::new(1 + k_seed % n, 1 + d_seed % (n - 1), n).unwrap();
        let m = circular_unfold(&x, &spec).unwrap();
        prop_assert_eq!(m.rows() * m.cols(), x.len());
        let back = circular_fold(&m, &spec, x.shape()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn fold_then_unfold_is_identity(x in tensor_strategy(), k_seed in 0usize..64, d_seed in 0usize..64) {
        let n = x.order();
        let spec = CircularUnfolding::new(1 + k_seed % n, 1 + d_seed % (n - 1), n).unwrap();
        let (rows, cols) = spec.matrix_dims(x.shape()).unwrap();
        let m = DenseMatrix::new(rows, cols, x.data().to_vec()).unwrap();
        let folded = circular_fold(&m, &spec, x.shape()).unwrap();
        prop_assert_eq!(circular_unfold(&folded, &spec).unwrap(), m);
    }

    /// `X<k,d>` is the transpose of `X<t-1, N-d>`: the complementary step
    /// lists the same two mode groups with their roles swapped.
    #[test]
    fn complementary_steps_are_transposes(x in tensor_strategy(), k_seed in 0usize..64, d_seed in 0usize..64) {
        let n = x.order();
        let d = 1 + d_seed % (n - 1);
        let spec = CircularUnfolding::new(1 + k_seed % n, d, n).unwrap();
        let k_comp = if spec.t() == 1 { n } else { spec.t() - 1 };
        let comp = CircularUnfolding::new(k_comp, n - d, n).unwrap();
        prop_assert_eq!(comp.row_modes(), spec.col_modes());
        let a = circular_unfold(&x, &spec).unwrap();
        let b = circular_unfold(&x, &comp).unwrap();
        prop_assert_eq!(a.transpose(), b);
    }

    #[test]
    fn unfolding_dims_swap_under_complementary_step(shape in shape_strategy(7, 5), d_seed in 0usize..64) {
        let n = shape.len();
        let d = 1 + d_seed % (n - 1);
        let mut dims: Vec<(usize, usize)> = (1..=n)
            .map(|k| CircularUnfolding::new(k, d, n).unwrap().matrix_dims(&shape).unwrap())
            .collect();
        let mut swapped: Vec<(usize, usize)> = (1..=n)
            .map(|k| {
                let (r, c) = CircularUnfolding::new(k, n - d, n).unwrap().matrix_dims(&shape).unwrap();
                (c, r)
            })
            .collect();
        dims.sort_unstable();
        swapped.sort_unstable();
        prop_assert_eq!(dims, swapped);
    }

    #[test]
    fn svd_reconstructs_with_sorted_values(a in matrix_strategy(9)) {
        let f = svd(&a).unwrap();
        prop_assert_eq!(f.s.len(), a.rows().min(a.cols()));
        prop_assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(f.s.iter().all(|&v| v >= 0.0));
        let scale = a.frobenius_norm().max(1e-300);
        prop_assert!(f.reconstruct().distance(&a) <= 1e-10 * scale);
    }

    #[test]
    fn svt_shrinks_singular_values(a in matrix_strategy(8), tau in 0f64..5.0) {
        let s = svd(&a).unwrap().s;
        let out = svt(&a, tau).unwrap();
        prop_assert_eq!((out.rows(), out.cols()), (a.rows(), a.cols()));
        let shrunk = svd(&out).unwrap().s;
        for (got, orig) in shrunk.iter().zip(&s) {
            prop_assert!((got - (orig - tau).max(0.0)).abs() <= 1e-9 * (1.0 + orig));
        }
        prop_assert!(nuclear_norm(&out).unwrap() <= nuclear_norm(&a).unwrap() + 1e-9);
    }

    #[test]
    fn svt_is_non_expansive(
        (a, b) in (1usize..=7, 1usize..=7).prop_flat_map(|(r, c)| (
            prop::collection::vec(-10f64..10.0, r * c).prop_map(move |d| DenseMatrix::new(r, c, d).unwrap()),
            prop::collection::vec(-10f64..10.0, r * c).prop_map(move |d| DenseMatrix::new(r, c, d).unwrap()),
        )),
        tau in 0f64..5.0,
    ) {
        let lhs = svt(&a, tau).unwrap().distance(&svt(&b, tau).unwrap());
        prop_assert!(lhs <= a.distance(&b) + 1e-9);
    }

    #[test]
    fn tensorize_roundtrip_is_bit_exact(
        (h, w, c, bytes) in (1usize..=9, 1usize..=9, prop::sample::select(vec![1usize, 3]))
            .prop_flat_map(|(h, w, c)| (Just(h), Just(w), Just(c), prop::collection::vec(any::<u8>(), h * w * c)))
    ) {
        let img = ImageBuffer::from_bytes(h, w, c, &bytes).unwrap();
        let layout = PixelLayout::of(&img);
        let mut shape = layout.natural_shape();
        if shape.len() < 2 {
            shape.push(1);
        }
        let x = tensorize(&img, &shape).unwrap();
        let back = detensorize(&x, &layout).unwrap();
        prop_assert_eq!(back[0].pixels(), img.pixels());
    }
}
