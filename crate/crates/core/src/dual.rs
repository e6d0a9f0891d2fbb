//! Forward-mode automatic differentiation with a fixed four-slot tangent,
//! one slot per transmitter parameter (x, y, azimuth, tilt). Path gains are
//! per-transmitter products, so four partials per scalar are all the
//! propagation model ever needs.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value plus partial derivatives w.r.t. four independent parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual4 {
    pub val: f64,
    pub d: [f64; 4],
}

impl Dual4 {
    #[inline]
    pub fn constant(val: f64) -> Self {
        Self { val, d: [0.0; 4] }
    }

    /// A seed variable: unit derivative in slot `slot`.
    #[inline]
    pub fn variable(val: f64, slot: usize) -> Self {
        let mut d = [0.0; 4];
        d[slot] = 1.0;
        Self { val, d }
    }

    #[inline]
    fn chain(self, val: f64, dval: f64) -> Self {
        Self {
            val,
            d: [
                self.d[0] * dval,
                self.d[1] * dval,
                self.d[2] * dval,
                self.d[3] * dval,
            ],
        }
    }

    #[inline]
    pub fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        self.chain(r, 0.5 / r)
    }

    #[inline]
    pub fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e)
    }

    #[inline]
    pub fn ln(self) -> Self {
        self.chain(self.val.ln(), 1.0 / self.val)
    }

    #[inline]
    pub fn sin(self) -> Self {
        self.chain(self.val.sin(), self.val.cos())
    }

    #[inline]
    pub fn cos(self) -> Self {
        self.chain(self.val.cos(), -self.val.sin())
    }

    /// Arc cosine with the argument clamped just inside (-1, 1) so the
    /// derivative stays finite when a direction aligns with a frame axis.
    #[inline]
    pub fn acos_clamped(self) -> Self {
        let x = self.val.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
        self.chain(x.acos(), -1.0 / (1.0 - x * x).sqrt())
    }

    #[inline]
    pub fn powi(self, n: i32) -> Self {
        self.chain(self.val.powi(n), n as f64 * self.val.powi(n - 1))
    }

    #[inline]
    pub fn scale(self, k: f64) -> Self {
        Self {
            val: self.val * k,
            d: [self.d[0] * k, self.d[1] * k, self.d[2] * k, self.d[3] * k],
        }
    }

    /// Two-argument arctangent, derivatives w.r.t. both inputs.
    #[inline]
    pub fn atan2(self, x: Self) -> Self {
        let y = self;
        let denom = y.val * y.val + x.val * x.val;
        let mut d = [0.0; 4];
        for (di, (yd, xd)) in d.iter_mut().zip(y.d.iter().zip(x.d.iter())) {
            *di = (x.val * yd - y.val * xd) / denom;
        }
        Self {
            val: y.val.atan2(x.val),
            d,
        }
    }

    /// Logistic sigmoid `1 / (1 + exp(-steepness * x))` with an
    /// overflow-safe value and the exact chain-rule tangent.
    #[inline]
    pub fn logistic(self, steepness: f64) -> Dual4 {
        let z = steepness * self.val;
        let s = if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        };
        self.chain(s, steepness * s * (1.0 - s))
    }

    /// Smooth minimum via negative log-sum-exp with the given sharpness;
    /// tends to `min(a, b)` as sharpness grows.
    #[inline]
    pub fn smooth_min(self, other: Self, sharpness: f64) -> Self {
        let (lo, hi) = if self.val <= other.val {
            (self, other)
        } else {
            (other, self)
        };
        // lo - ln(1 + e^{-s (hi - lo)}) / s, shifted for stability.
        let gap = (hi - lo).scale(-sharpness).exp();
        let ln1p = Self {
            val: gap.val.ln_1p(),
            d: [
                gap.d[0] / (1.0 + gap.val),
                gap.d[1] / (1.0 + gap.val),
                gap.d[2] / (1.0 + gap.val),
                gap.d[3] / (1.0 + gap.val),
            ],
        };
        lo - ln1p.scale(1.0 / sharpness)
    }
}

impl Add for Dual4 {
    type Output = Dual4;
    #[inline]
    fn add(self, o: Dual4) -> Dual4 {
        Dual4 {
            val: self.val + o.val,
            d: [
                self.d[0] + o.d[0],
                self.d[1] + o.d[1],
                self.d[2] + o.d[2],
                self.d[3] + o.d[3],
            ],
        }
    }
}

impl Sub for Dual4 {
    type Output = Dual4;
    #[inline]
    fn sub(self, o: Dual4) -> Dual4 {
        Dual4 {
            val: self.val - o.val,
            d: [
                self.d[0] - o.d[0],
                self.d[1] - o.d[1],
                self.d[2] - o.d[2],
                self.d[3] - o.d[3],
            ],
        }
    }
}

impl Mul for Dual4 {
    type Output = Dual4;
    #[inline]
    fn mul(self, o: Dual4) -> Dual4 {
        Dual4 {
            val: self.val * o.val,
            d: [
                self.d[0] * o.val + self.val * o.d[0],
                self.d[1] * o.val + self.val * o.d[1],
                self.d[2] * o.val + self.val * o.d[2],
                self.d[3] * o.val + self.val * o.d[3],
            ],
        }
    }
}

impl Div for Dual4 {
    type Output = Dual4;
    #[inline]
    fn div(self, o: Dual4) -> Dual4 {
        let inv = 1.0 / o.val;
        let val = self.val * inv;
        Dual4 {
            val,
            d: [
                (self.d[0] - val * o.d[0]) * inv,
                (self.d[1] - val * o.d[1]) * inv,
                (self.d[2] - val * o.d[2]) * inv,
                (self.d[3] - val * o.d[3]) * inv,
            ],
        }
    }
}

impl Neg for Dual4 {
    type Output = Dual4;
    #[inline]
    fn neg(self) -> Dual4 {
        Dual4 {
            val: -self.val,
            d: [-self.d[0], -self.d[1], -self.d[2], -self.d[3]],
        }
    }
}
