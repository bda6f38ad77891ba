//! Double-double arithmetic for error measurements below machine epsilon.
//!
//! Only what the relative-error scan needs: the four operations, `exp`,
//! `ln`, and `Γ(α)` for `α ∈ (0, 1)`. Values carry roughly 32 significant
//! digits.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn scale(self, factor: f64) -> Self {
        // Exact for powers of two.
        Dd {
            hi: self.hi * factor,
            lo: self.lo * factor,
        }
    }

    pub fn exp(self) -> Self {
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * k;
        // exp(r) = (1 + s)^(2^10) with s = expm1(r / 2^10).
        let r = r.scale(1.0 / 1024.0);
        let mut s = r;
        let mut term = r;
        for n in 2..=12 {
            term = term * r / n as f64;
            s = s + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            s = s * 2.0 + s * s;
        }
        let out = s + 1.0;
        let k = k as i32;
        // Split the scaling so 2^k never overflows on its own.
        out.scale(2f64.powi(k / 2)).scale(2f64.powi(k - k / 2))
    }

    pub fn ln(self) -> Self {
        // One Newton step on exp(y) = x doubles the f64 accuracy of ln.
        let y = Dd::from(self.hi.ln());
        y + self * (-y).exp() - 1.0
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, o: f64) -> Dd {
        let (s, e) = two_sum(self.hi, o);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, o: f64) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, o: f64) -> Dd {
        let (p, e) = two_prod(self.hi, o);
        let (hi, lo) = quick_two_sum(p, e + self.lo * o);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        Dd::new(q1, q2) + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, o: f64) -> Dd {
        self / Dd::from(o)
    }
}

// Taylor coefficients c_1..c_46 of 1/Γ(z) about 0, split into hi + lo.
const RECIP_GAMMA: [(f64, f64); 46] = [
    (1.0, 0.0),
    (0.5772156649015329, -4.942915152430645e-18),
    (-0.6558780715202539, 2.137185197068536e-17),
    (-0.04200263503409524, 1.4920306285650505e-18),
    (0.16653861138229148, 1.0189144546842026e-17),
    (-0.04219773455554433, -3.3579992682480134e-18),
    (-0.009621971527876973, -5.300031368830263e-19),
    (0.0072189432466631, -3.6006537063394283e-19),
    (-0.0011651675918590652, 5.659947853880981e-20),
    (-0.00021524167411495098, 2.3758686180729364e-21),
    (0.0001280502823881162, -9.359124499198967e-21),
    (-2.013485478078824e-05, 3.0488773972037385e-23),
    (-1.2504934821426706e-06, -2.66214092271898e-23),
    (1.133027231981696e-06, -4.622235212104869e-23),
    (-2.056338416977607e-07, -3.0061601618645134e-24),
    (6.116095104481416e-09, -2.693458298171306e-25),
    (5.002007644469223e-09, -1.538123614056751e-26),
    (-1.18127457048702e-09, -1.0052356155716208e-25),
    (1.0434267116911005e-10, -2.9298419956825035e-27),
    (7.782263439905071e-12, 4.397255556595848e-28),
    (-3.696805618642206e-12, 2.7050034921703885e-28),
    (5.100370287454476e-13, 2.253001461085878e-29),
    (-2.0583260535665066e-14, -1.4747481491954336e-30),
    (-5.348122539423018e-15, -1.6208384686356568e-31),
    (1.2267786282382608e-15, -5.072915146023867e-32),
    (-1.1812593016974588e-16, 6.422257838149681e-33),
    (1.1866922547516004e-18, -4.2037265494226014e-35),
    (1.4123806553180319e-18, -7.576946701116294e-35),
    (-2.29874568443537e-19, 1.3335481917069145e-36),
    (1.7144063219273374e-20, 5.230715150426935e-38),
    (1.337351730493693e-22, 2.6434059649079228e-39),
    (-2.0542335517666728e-22, 3.6856892424568953e-39),
    (2.736030048608e-23, -2.8599315416397774e-39),
    (-1.7323564459105165e-24, -1.7540883508197598e-40),
    (-2.3606190244992872e-26, -1.260225016995785e-42),
    (1.8649829417172943e-26, 8.774775617290965e-43),
    (-2.2180956242071973e-27, 6.809640315042753e-44),
    (1.2977819749479937e-28, -3.325692466804093e-45),
    (1.1806974749665284e-30, -4.184949275966516e-48),
    (-1.124584349277088e-30, -2.01842815487355e-47),
    (1.277085175140866e-31, 1.0535632367878753e-47),
    (-7.391451169615141e-33, 1.8114253268366145e-49),
    (1.1347502575542158e-35, -4.9791058715013306e-52),
    (4.639134641058722e-35, 2.6040634859975098e-52),
    (-5.3473368184391986e-36, -2.3112956912714733e-52),
    (3.2079959236133524e-37, 2.002602532430018e-53),
];

/// `Γ(α)` for `α ∈ (0, 1]`, via `Γ(α) = 1 / (α Σ c_k α^(k-1))`.
pub(crate) fn gamma_unit(alpha: Dd) -> Dd {
    let mut acc = Dd::ZERO;
    for &(hi, lo) in RECIP_GAMMA.iter().rev() {
        acc = acc * alpha + Dd { hi, lo };
    }
    Dd::ONE / (acc * alpha)
}

/// `Γ(x)` for moderate `x > 0` by upward recurrence from `(0, 1]`.
pub(crate) fn gamma(x: Dd) -> Dd {
    let mut whole = x.hi.floor();
    let mut frac = x - whole;
    if frac.hi <= 0.0 {
        frac = frac + 1.0;
        whole -= 1.0;
    }
    let mut value = gamma_unit(frac);
    for i in 0..whole as usize {
        value = value * (frac + i as f64);
    }
    value
}

const PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};

/// `sin(π x)` for `|x| ≤ 1/2`.
pub(crate) fn sin_pi(x: f64) -> Dd {
    let z = PI * x;
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for k in 1..=30 {
        let d = (2 * k) as f64 * (2 * k + 1) as f64;
        term = -(term * z2) / d;
        sum = sum + term;
        if term.hi.abs() < 1e-34 * sum.hi.abs() {
            break;
        }
    }
    sum
}

/// `sin(πα) / π` for `α ∈ (0, 1)`.
pub(crate) fn representation_constant(alpha: f64) -> Dd {
    sin_pi(alpha.min(1.0 - alpha)) / PI
}

/// `2^p`.
pub(crate) fn exp2(p: Dd) -> Dd {
    (p * LN2).exp()
}

/// `x^p` for `x > 0`.
pub(crate) fn powf(x: Dd, p: Dd) -> Dd {
    (x.ln() * p).exp()
}
