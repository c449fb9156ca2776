//! Double-double arithmetic for the explicit reaction update.
//!
//! The update `u + dt * g(u)` is increasing in `u` whenever `dt * L < 1`.
//! Evaluating it to ~32 significant digits and rounding once makes the
//! computed map nondecreasing as well, so the discrete comparison principle
//! survives floating point even for ordered inputs a few ulps apart.

#[derive(Debug, Clone, Copy)]
pub(crate) struct DD {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    #[inline]
    pub(crate) fn from(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    #[inline]
    pub(crate) fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    #[inline]
    pub(crate) fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        DD { hi, lo }
    }

    #[inline]
    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `u + dt * (c0 + c1 u + c2 u^2 + c3 u^3)`, rounded once.
#[inline]
pub(crate) fn reaction_update(u: f64, dt: f64, c: &[f64; 4]) -> f64 {
    let mut p = DD::from(c[3]);
    p = p.mul_f64(u).add_f64(c[2]);
    p = p.mul_f64(u).add_f64(c[1]);
    p = p.mul_f64(u).add_f64(c[0]);
    p.mul_f64(dt).add_f64(u).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_is_monotone_for_adjacent_floats() {
        let c = [0.0, -0.25, 1.25, -1.0];
        let dt = 0.3;
        let mut u = 0.6_f64;
        for _ in 0..100_000 {
            let next = f64::from_bits(u.to_bits() + 1);
            assert!(reaction_update(u, dt, &c) <= reaction_update(next, dt, &c));
            u = next;
        }
    }

    #[test]
    fn linear_decay_is_correctly_rounded() {
        let v = reaction_update(1.0, 1e-3, &[0.0, -0.5, 0.0, 0.0]);
        assert_eq!(v, 1.0 - 0.5e-3);
    }
}
