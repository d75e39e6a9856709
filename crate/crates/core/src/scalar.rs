//! Scalar abstraction shared by every numerical module.
//!
//! All math in this crate is written against [`Real`], which is satisfied by
//! `f32` and `f64`. Accuracy contracts quoted in the docs assume `f64`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// A real floating-point scalar usable by the solver.
pub trait Real: RealField + Copy + ToPrimitive {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn c_zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn c_one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn c_i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub fn c_real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `|z|` without going through `hypot` overflow guards.
#[inline]
pub fn c_abs<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// Compensated sum of complex values, one accumulator per component.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedComplexSum<T> {
    re: CompensatedSum<T>,
    im: CompensatedSum<T>,
}

impl<T: Real> Default for CompensatedComplexSum<T> {
    fn default() -> Self {
        Self {
            re: CompensatedSum::default(),
            im: CompensatedSum::default(),
        }
    }
}

impl<T: Real> CompensatedComplexSum<T> {
    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

/// `ln(n!)` for the small integer orders used by the Taylor kernels.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    let mut acc = CompensatedSum::default();
    for k in 2..=n {
        acc.add(T::from_count(k).ln());
    }
    acc.value()
}
