//! Numerical integration rules.
//!
//! Adaptive Gauss–Kronrod (7/15) for the one-dimensional constitutive
//! integrals, plus the fixed Gauss–Legendre and triangle rules used by the
//! spatial discretisation.

use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-13,
            max_intervals: 4000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub intervals: usize,
}

pub(crate) fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], f64)
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    for c in 0..N {
        kronrod[c] = WGK[7] * fc[c];
        gauss[c] = WG[3] * fc[c];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            kronrod[c] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for c in 0..N {
        kronrod[c] *= half;
        gauss[c] *= half;
        err = err.max((kronrod[c] - gauss[c]).abs());
    }
    (kronrod, err)
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Segment<N> {}
impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of a vector-valued integrand
/// over `[a, b]` (either orientation).
///
/// The error criterion is applied to the largest component.
pub fn integrate<const N: usize, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Integral<N>
where
    F: Fn(f64) -> [f64; N],
{
    if a == b {
        return Integral {
            value: [0.0; N],
            error: 0.0,
            intervals: 0,
        };
    }
    let (value, error) = gk15(&f, a, b);
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut intervals = 1;
    loop {
        let magnitude = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if total_err <= tol.abs.max(tol.rel * magnitude) || intervals >= tol.max_intervals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        for c in 0..N {
            total[c] += v1[c] + v2[c] - worst.value[c];
        }
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        intervals += 1;
    }
    // re-sum to shed accumulated cancellation in the running totals
    let mut value = [0.0; N];
    let mut error = 0.0;
    for seg in heap.iter() {
        for c in 0..N {
            value[c] += seg.value[c];
        }
        error += seg.error;
    }
    Integral {
        value,
        error,
        intervals,
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> f64 {
    integrate(|x| [f(x)], a, b, tol).value[0]
}

/// Gauss–Legendre points and weights on `[-1, 1]`.
pub fn gauss_legendre(points: usize) -> (&'static [f64], &'static [f64]) {
    const X1: [f64; 1] = [0.0];
    const W1: [f64; 1] = [2.0];
    const X2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
    const W2: [f64; 2] = [1.0, 1.0];
    const X3: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W3: [f64; 3] = [0.555_555_555_555_555_6, 0.888_888_888_888_888_9, 0.555_555_555_555_555_6];
    const X4: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W4: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    match points {
        1 => (&X1, &W1),
        2 => (&X2, &W2),
        3 => (&X3, &W3),
        4 => (&X4, &W4),
        _ => panic!("gauss_legendre: unsupported point count {points}"),
    }
}

/// Six-point symmetric rule on the reference triangle, exact to degree 4.
/// Returns barycentric coordinates and weights summing to one.
pub fn triangle_order4() -> [([f64; 3], f64); 6] {
    const A1: f64 = 0.445_948_490_915_965;
    const B1: f64 = 1.0 - 2.0 * A1;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const B2: f64 = 1.0 - 2.0 * A2;
    const W2: f64 = 0.109_951_743_655_322;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate_scalar(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, Tolerance::default());
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let f = |x: f64| x.exp();
        let a = integrate_scalar(f, 0.0, 1.0, Tolerance::default());
        let b = integrate_scalar(f, 1.0, 0.0, Tolerance::default());
        assert!((a + b).abs() < 1e-14);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let v = integrate_scalar(|x| x.sqrt(), 0.0, 1.0, Tolerance::default());
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn vector_components_share_subdivision() {
        let r = integrate(|x| [x.sin(), x.cos()], 0.0, std::f64::consts::PI, Tolerance::default());
        assert!((r.value[0] - 2.0).abs() < 1e-13);
        assert!(r.value[1].abs() < 1e-13);
    }

    #[test]
    fn triangle_rule_degree_four() {
        // ∫_T λ1^2 λ2^2 = 2!2!0!2!/(6!) * |T| * ... with |T| normalised to 1: 2*4/720
        let s: f64 = triangle_order4()
            .iter()
            .map(|(l, w)| w * l[0].powi(2) * l[1].powi(2))
            .sum();
        assert!((s - 2.0 * 2.0 * 2.0 / 720.0).abs() < 1e-12);
        let total: f64 = triangle_order4().iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
