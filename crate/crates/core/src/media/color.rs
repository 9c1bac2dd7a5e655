use super::Frame;

/// sRGB electro-optical transfer function (exact piecewise form).
#[inline]
pub fn srgb_to_linear_value(v: f32) -> f32 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// Inverse of [`srgb_to_linear_value`].
#[inline]
pub fn linear_to_srgb_value(v: f32) -> f32 {
    if v <= 0.003_130_8 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

pub fn srgb_to_linear(f: &Frame) -> Frame {
    let data = f.data().iter().map(|&v| srgb_to_linear_value(v)).collect();
    Frame::from_clamped(f.height(), f.width(), data)
}

pub fn linear_to_srgb(f: &Frame) -> Frame {
    let data = f.data().iter().map(|&v| linear_to_srgb_value(v)).collect();
    Frame::from_clamped(f.height(), f.width(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        assert_eq!(srgb_to_linear_value(0.0), 0.0);
        assert_eq!(srgb_to_linear_value(1.0), 1.0);
        assert_eq!(linear_to_srgb_value(0.0), 0.0);
        assert!((linear_to_srgb_value(1.0) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn half_matches_direct_formula() {
        let expected = ((0.5f64 + 0.055) / 1.055).powf(2.4);
        assert!((expected - 0.214_041_14).abs() < 1e-8);
        assert!((srgb_to_linear_value(0.5) as f64 - 0.214_041_14).abs() < 1e-6);
        assert!((linear_to_srgb_value(0.214_041_14) as f64 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn round_trip_on_dense_grid() {
        for i in 0..1024 {
            let x = i as f32 / 1023.0;
            let back = linear_to_srgb_value(srgb_to_linear_value(x));
            assert!((back - x).abs() < 1e-6, "x={x} back={back}");
        }
    }

    #[test]
    fn frame_conversion_is_pure() {
        let f = Frame::from_fn(4, 4, |y, x| [y as f32 / 4.0, x as f32 / 4.0, 0.7]);
        assert_eq!(srgb_to_linear(&f), srgb_to_linear(&f));
        let back = linear_to_srgb(&srgb_to_linear(&f));
        for (a, b) in back.data().iter().zip(f.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
