use approx::assert_abs_diff_eq;
use medkit_core::image::neighbourhood_offsets;
use medkit_core::{Error, Image, Interpolation, Neighbourhood};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn defaults_of_a_new_image() {
    let im = Image::new(&[3, 3], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(im.ndim(), 2);
    assert!(im.data().iter().all(|&v| v == 0.0));
    assert_eq!(im.orientation(), &[1.0, 0.0, 0.0, 1.0]);
}

#[test]
fn centred_origin_expression() {
    let sz = [100.0, 120.0, 130.0];
    let sp = [1.1, 1.0, 0.9];
    let or: Vec<f64> = (0..3).map(|k| -(sz[k] - 1.0) / 2.0 * sp[k]).collect();
    let im = Image::new(&[100, 120, 130], &or, &sp).unwrap();
    for (a, b) in im.origin().iter().zip([-54.45, -59.5, -58.05]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
    }
    for c in im.geometric_centre() {
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn template_copy_keeps_padding() {
    let mut a = Image::new(&[4, 5], &[1.0, 2.0], &[0.5, 2.0]).unwrap();
    a.set_padding_value(5.0);
    a.set_pixel(&[2, 2], 3.0).unwrap();
    let b = Image::from_template(&a);
    assert_eq!(b.padding_value(), 5.0);
    assert_eq!(b.geometry(), a.geometry());
    assert!(b.data().iter().all(|&v| v == 0.0));
}

#[test]
fn index_world_examples() {
    let im = Image::new(&[3, 3], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(im.index_to_world(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    let rot = Image::with_orientation(&[4, 4], &[10.0, 10.0], &[2.0, 1.0], Some(&[0.0, -1.0, 1.0, 0.0])).unwrap();
    let p = rot.index_to_world(&[2.0, 1.0]).unwrap();
    assert_abs_diff_eq!(p[0], 10.0, epsilon = 1e-12);
    assert_abs_diff_eq!(p[1], 12.0, epsilon = 1e-12);
    let back = rot.continuous_index(&[10.0, 12.0]).unwrap();
    assert_abs_diff_eq!(back[0], 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(back[1], 1.0, epsilon = 1e-12);
    assert_eq!(rot.continuous_index(rot.origin()).unwrap(), vec![1.0, 1.0]);
}

#[test]
fn linear_and_nd_positions_agree() {
    let im = Image::new(&[3, 4], &[0.5, -1.0], &[1.5, 0.5]).unwrap();
    assert_eq!(im.linear_index(&[2, 3]).unwrap(), 8);
    assert_eq!(
        im.linear_to_world(&[8]).unwrap()[0],
        im.index_to_world(&[2.0, 3.0]).unwrap()
    );
    assert_eq!(im.linear_index(&[1, 1]).unwrap(), 1);
    let big = Image::new(&[3, 4, 5], &[0.0; 3], &[1.0; 3]).unwrap();
    for lin in 1..=big.len() {
        assert_eq!(big.linear_index(&big.nd_index(lin).unwrap()).unwrap(), lin);
    }
}

#[test]
fn random_index_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let im = Image::with_orientation(
        &[20, 30, 40],
        &[-3.0, 7.0, 1.0],
        &[0.7, 1.3, 2.1],
        Some(&[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
    )
    .unwrap();
    for _ in 0..100 {
        let idx: Vec<f64> = im.size().iter().map(|&s| rng.random_range(1.0..s as f64)).collect();
        let back = im.continuous_index(&im.index_to_world(&idx).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&idx) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }
}

#[test]
fn interpolation_examples() {
    let mut im = Image::new(&[2, 1], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    im.set_data(vec![0.0, 10.0]).unwrap();
    im.set_padding_value(-7.0);
    assert_eq!(im.value_at(&[0.5, 0.0], Interpolation::Linear).unwrap(), 5.0);
    for mode in [Interpolation::Linear, Interpolation::Nearest] {
        assert_eq!(im.value_at(&[1.0, 0.0], mode).unwrap(), 10.0);
        assert_eq!(im.value_at(&[3.0, 0.0], mode).unwrap(), -7.0);
    }
}

#[test]
fn pixel_access() {
    let mut im = Image::new(&[3, 3], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(im.get_pixel(&[1, 1]).unwrap(), 0.0);
    im.set_pixel(&[2, 2], 7.0).unwrap();
    assert_eq!(im.get_pixel(&[2, 2]).unwrap(), 7.0);
    assert!(matches!(im.get_pixel(&[0, 1]), Err(Error::Index { .. })));
}

#[test]
fn neighbourhoods() {
    assert_eq!(neighbourhood_offsets(2, 1, Neighbourhood::Cube).unwrap().len(), 9);
    assert_eq!(neighbourhood_offsets(3, 1, Neighbourhood::Ball).unwrap().len(), 7);
    assert_eq!(neighbourhood_offsets(3, 2, Neighbourhood::Cube).unwrap().len(), 125);
}

#[test]
fn bounds_examples() {
    let mut im = Image::new(&[8, 8], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    for x in 3..=5 {
        for y in 4..=6 {
            im.set_pixel(&[x, y], 1.0).unwrap();
        }
    }
    assert_eq!(im.bounds(0.0).unwrap(), vec![2.0, 4.0, 3.0, 5.0]);
    let ones = im.with_data(vec![1.0; 64]).unwrap();
    assert_eq!(ones.bounds(0.0).unwrap(), vec![0.0, 7.0, 0.0, 7.0]);
    let zeros = Image::from_template(&im);
    assert!(matches!(zeros.bounds(0.0), Err(Error::EmptyBounds(_))));
}

#[test]
fn frames_of_a_4d_image() {
    let mut im = Image::new(&[3, 2, 2, 4], &[1.0, 2.0, 3.0, 0.0], &[0.5, 0.5, 2.0, 1.0]).unwrap();
    let frame = 12;
    let data = (0..im.len()).map(|i| (i / frame + 1) as f64).collect();
    im.set_data(data).unwrap();
    let f2 = im.extract_frame(2).unwrap();
    assert_eq!(f2.size(), &[3, 2, 2]);
    assert!(f2.data().iter().all(|&v| v == 2.0));
    assert_eq!(f2.origin(), &[1.0, 2.0, 3.0]);
    assert_eq!(f2.spacing(), &[0.5, 0.5, 2.0]);
    assert!(im.extract_frame(0).is_err());
}

#[test]
fn centre_and_force_2d() {
    let im = Image::new(&[5, 1, 5], &[0.0; 3], &[1.0; 3]).unwrap();
    assert_eq!(im.force_2d().unwrap().size(), &[5, 5]);
    let mut sq = Image::new(&[3, 3], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(sq.geometric_centre(), vec![1.0, 1.0]);
    sq.set_origin_to_centre();
    for c in sq.geometric_centre() {
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
    }
}
