//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`, giving
//! roughly 106 bits of significand. Only the operations needed by the
//! Mittag-Leffler series are provided.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Unit roundoff of the double-double format (2^-104).
pub const DD_EPSILON: f64 = 4.930380657631324e-32;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = self.lo.mul_add(b, e);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    /// `self + a * b` with `a` double-double and `b` a double.
    #[inline]
    pub fn mul_add_f64(self, a: Dd, b: f64) -> Self {
        self + a.mul_f64(b)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl AddAssign for Dd {
    #[inline]
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }
}

/// Taylor coefficients of 1/Γ(x) about x = 3/2, as (hi, lo) pairs.
/// 36 terms reach ~1e-36 on |x - 3/2| <= 1/2.
const RGAMMA_TAYLOR: [(f64, f64); 37] = [
    // 1/Γ(3/2) = 2/√π
    (std::f64::consts::FRAC_2_SQRT_PI, 1.533545961316588e-17),
    (-0.0411745264452831, -3.3752130157375745e-18),
    (-0.5266544355255445, -6.112036385608127e-18),
    (0.17510202604393457, -1.0657471268514412e-17),
    (0.050966860247706074, 3.1247224718944427e-18),
    (-0.042155169368535604, 3.0976342103734477e-18),
    (0.006612897826824127, 3.573455638859823e-19),
    (0.002120731442572938, 1.3781297975220145e-19),
    (-0.0011107302545948906, -9.753454144222531e-20),
    (0.00015235762076747688, -1.0906520861329338e-20),
    (2.5355204923814165e-05, 4.893956349690275e-22),
    (-1.3896805717913756e-05, 2.1533543121307036e-22),
    (2.1562032905141724e-06, 8.714226745633228e-23),
    (5.7942640540526726e-08, -7.454341938541845e-25),
    (-8.913551118311116e-08, -3.639776989356635e-24),
    (1.7103469415915374e-08, 1.1274857846497739e-25),
    (-9.313686445241901e-10, -3.474969316158858e-26),
    (-2.6804741033496623e-10, -2.3612584194639298e-26),
    (7.458932233316326e-11, 2.4373478754056218e-27),
    (-8.012807061414718e-12, -7.570390468804759e-28),
    (-8.382343033451855e-14, 3.885823863175652e-30),
    (1.6946340904320522e-13, 2.2653509452158334e-30),
    (-2.7875756707125753e-14, 6.524116911441165e-31),
    (1.8670394695065306e-15, -4.254392590878746e-32),
    (1.3049499008587988e-16, -9.270238560188959e-33),
    (-4.8588741441877864e-17, -1.339620604759889e-33),
    (5.829542692459468e-18, -7.523759917630262e-35),
    (-2.592909417993784e-19, 4.8295929078260184e-36),
    (-3.326754010285789e-20, 1.6251345689863235e-36),
    (7.944961635768106e-21, -3.661196591132274e-37),
    (-7.755543288437357e-22, -3.001439691199397e-38),
    (2.5533736291329696e-23, 1.0788765942473458e-40),
    (4.274520160147173e-24, 2.7654689015952895e-40),
    (-8.263381374668449e-25, -2.4845851081041036e-41),
    (7.108187657253398e-26, 7.154417290279865e-43),
    (-2.0749463887704297e-27, 9.526265424997407e-44),
    (-3.2859544069948607e-28, 1.8037039593084174e-44),
];

/// Largest argument for which Γ(x) stays representable in double precision.
pub const RGAMMA_MAX_ARG: f64 = 171.0;

/// 1/Γ(x) in double-double precision for `0 < x <= RGAMMA_MAX_ARG`.
///
/// Reduces to `[1, 2)` with the recurrence Γ(x+1) = xΓ(x) and evaluates the
/// Taylor expansion about 3/2 there. Returns `None` outside the domain.
pub fn rgamma(x: Dd) -> Option<Dd> {
    if !(x.hi > 0.0) || x.hi > RGAMMA_MAX_ARG || !x.is_finite() {
        return None;
    }
    let mut y = x;
    // Γ(x) = Γ(y) * Π, y in [1, 2)
    let mut prod = Dd::ONE;
    let mut small = Dd::ONE;
    while y.hi < 1.0 {
        // 1/Γ(y) = y / Γ(y + 1)
        small = small * y;
        y = y.add_f64(1.0);
    }
    while y.hi >= 2.0 {
        y = y.add_f64(-1.0);
        prod = prod * y;
    }
    let z = y.add_f64(-1.5);
    let mut acc = Dd::new(RGAMMA_TAYLOR[36].0, RGAMMA_TAYLOR[36].1);
    for &(hi, lo) in RGAMMA_TAYLOR.iter().rev().skip(1) {
        acc = acc * z + Dd::new(hi, lo);
    }
    Some(acc * small / prod)
}
