#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a quadrature: value and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// One 15-point Kronrod panel on `[a, b]` with the embedded 7-point Gauss error estimate.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Quadrature {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Quadrature { value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

struct Panel {
    a: f64,
    b: f64,
    q: Quadrature,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.q.error == other.q.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.q.error.total_cmp(&other.q.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol * |value|)` or `max_panels` is hit.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0 };
    }
    let first = gauss_kronrod_15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, q: first });
    let (mut value, mut error) = (first.value, first.error);
    while error > abs_tol.max(rel_tol * value.abs()) && heap.len() < max_panels {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod_15(&f, worst.a, mid);
        let right = gauss_kronrod_15(&f, mid, worst.b);
        value += left.value + right.value - worst.q.value;
        error += left.error + right.error - worst.q.error;
        heap.push(Panel { a: worst.a, b: mid, q: left });
        heap.push(Panel { a: mid, b: worst.b, q: right });
    }
    // resum to shed the drift of the incremental updates
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.q.value).sum();
    let error = panels.iter().map(|p| p.q.error).sum();
    Quadrature { value, error }
}
