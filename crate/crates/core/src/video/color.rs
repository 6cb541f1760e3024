//! sRGB to CIE Lab conversion.
//!
//! All patch matching and color-affinity computations run on Lab values
//! normalized per channel to `[0, 1]`: `L/100`, `(a+128)/255`, `(b+128)/255`.
//! The conversion assumes a D65 white point and the standard sRGB transfer
//! curve.

/// Row-major sRGB (linear) to XYZ matrix, D65.
const XYZ_FROM_RGB: [[f64; 3]; 3] = [
    [0.412_453, 0.357_580, 0.180_423],
    [0.212_671, 0.715_160, 0.072_169],
    [0.019_334, 0.119_193, 0.950_227],
];

/// XYZ (linear) to sRGB matrix, inverse of [`XYZ_FROM_RGB`].
const RGB_FROM_XYZ: [[f64; 3]; 3] = [
    [3.240_481_343_200_526, -1.537_151_516_271_319, -0.498_536_326_168_888],
    [-0.969_254_949_996_568, 1.875_990_001_489_891, 0.041_555_926_558_293],
    [0.055_646_639_135_177, -0.204_041_338_366_511, 1.057_311_069_645_344],
];

const D65: [f64; 3] = [0.950_47, 1.0, 1.088_83];

/// `(6/29)^3`, the knee of the Lab companding curve.
const LAB_EPS: f64 = 216.0 / 24389.0;
/// `(29/6)^2 / 3`, the slope below the knee.
const LAB_KAPPA: f64 = 841.0 / 108.0;

fn srgb_decode(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn srgb_encode(v: f64) -> f64 {
    if v <= 0.003_130_8 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPS {
        t.cbrt()
    } else {
        LAB_KAPPA * t + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > 6.0 / 29.0 {
        t * t * t
    } else {
        (t - 4.0 / 29.0) / LAB_KAPPA
    }
}

/// Converts one 8-bit sRGB pixel to normalized Lab in `[0, 1]` per channel.
pub fn rgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = [
        srgb_decode(rgb[0] as f64 / 255.0),
        srgb_decode(rgb[1] as f64 / 255.0),
        srgb_decode(rgb[2] as f64 / 255.0),
    ];
    let mut xyz = [0.0; 3];
    for (i, row) in XYZ_FROM_RGB.iter().enumerate() {
        xyz[i] = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / D65[0]);
    let fy = lab_f(xyz[1] / D65[1]);
    let fz = lab_f(xyz[2] / D65[2]);
    let l = 116.0 * fy - 16.0;
    let a = 500.0 * (fx - fy);
    let b = 200.0 * (fy - fz);
    [l / 100.0, (a + 128.0) / 255.0, (b + 128.0) / 255.0]
}

/// Inverse of [`rgb_to_lab`]; out-of-gamut values are clamped before
/// quantization. Used by the synthetic generator to realize Lab-space noise
/// as storable 8-bit frames.
pub fn lab_to_rgb(lab: [f64; 3]) -> [u8; 3] {
    let l = lab[0] * 100.0;
    let a = lab[1] * 255.0 - 128.0;
    let b = lab[2] * 255.0 - 128.0;
    let fy = (l + 16.0) / 116.0;
    let fx = fy + a / 500.0;
    let fz = fy - b / 200.0;
    let xyz = [
        lab_f_inv(fx) * D65[0],
        lab_f_inv(fy) * D65[1],
        lab_f_inv(fz) * D65[2],
    ];
    let mut out = [0u8; 3];
    for (i, row) in RGB_FROM_XYZ.iter().enumerate() {
        let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
        let v = srgb_encode(lin.clamp(0.0, 1.0)).clamp(0.0, 1.0);
        out[i] = (v * 255.0).round() as u8;
    }
    out
}
