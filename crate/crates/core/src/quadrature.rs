//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

#![allow(clippy::excessive_precision)]

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 4000;

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let centre = (a + b) * half;
    let radius = (b - a) * half;
    let fc = f(centre);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for (i, (&node, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = radius * T::lit(node);
        let pair = f(centre - dx) + f(centre + dx);
        kron = kron + pair * T::lit(wk);
        if i % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[i / 2]);
        }
    }
    Segment {
        a,
        b,
        value: kron * radius,
        error: ((kron - gauss) * radius).abs(),
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate falls below
/// `max(abs_tol, rel_tol * |I|)`.
///
/// Returns the estimate together with its error estimate. When the segment
/// budget runs out the best estimate so far is returned.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> (T, T) {
    if a == b {
        return (T::zero(), T::zero());
    }
    // Below a few hundred ulps the Kronrod/Gauss difference is rounding noise.
    let rel_tol = rel_tol.max(T::epsilon() * T::lit(50.0));
    let mut segments = vec![kronrod(&f, a, b)];
    loop {
        let total: T = segments.iter().fold(T::zero(), |s, g| s + g.value);
        let err: T = segments.iter().fold(T::zero(), |s, g| s + g.error);
        if err <= abs_tol.max(rel_tol * total.abs()) || segments.len() >= MAX_SEGMENTS {
            return (total, err);
        }
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                    if s.error > be {
                        (i, s.error)
                    } else {
                        (bi, be)
                    }
                });
        let seg = segments.swap_remove(worst);
        let mid = (seg.a + seg.b) * T::lit(0.5);
        if mid <= seg.a || mid >= seg.b {
            // interval cannot be split further
            segments.push(Segment {
                error: T::zero(),
                ..seg
            });
            continue;
        }
        segments.push(kronrod(&f, seg.a, mid));
        segments.push(kronrod(&f, mid, seg.b));
    }
}
