//! Scalar abstraction over `f32`/`f64` plus free math functions that work
//! without `std` (falling back to `libm`).

/// Element type for tensors. The engine runs in 64-bit precision by default;
/// the 32-bit mode trades accuracy for speed in training.
pub trait Scalar:
    Copy
    + PartialOrd
    + PartialEq
    + core::fmt::Debug
    + core::fmt::Display
    + core::ops::Add<Output = Self>
    + core::ops::Sub<Output = Self>
    + core::ops::Mul<Output = Self>
    + core::ops::Div<Output = Self>
    + core::ops::Neg<Output = Self>
    + core::ops::AddAssign
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    const ONE: Self;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;

    /// C[m,n] = alpha * A[m,k] * B[k,n] + beta * C, with explicit row/column
    /// strides so transposed views need no copy.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

macro_rules! impl_scalar {
    ($t:ty, $gemm:path, $exp:path, $sqrt:path) => {
        impl Scalar for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;

            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn exp(self) -> Self {
                #[cfg(feature = "std")]
                {
                    self.exp()
                }
                #[cfg(not(feature = "std"))]
                {
                    $exp(self)
                }
            }
            #[inline]
            fn sqrt(self) -> Self {
                #[cfg(feature = "std")]
                {
                    self.sqrt()
                }
                #[cfg(not(feature = "std"))]
                {
                    $sqrt(self)
                }
            }
            #[inline]
            fn abs(self) -> Self {
                if self < 0.0 {
                    -self
                } else {
                    self
                }
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }

            #[inline]
            unsafe fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: *const Self,
                rsa: isize,
                csa: isize,
                b: *const Self,
                rsb: isize,
                csb: isize,
                beta: Self,
                c: *mut Self,
                rsc: isize,
                csc: isize,
            ) {
                $gemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
            }
        }
    };
}

impl_scalar!(f32, matrixmultiply::sgemm, libm::expf, libm::sqrtf);
impl_scalar!(f64, matrixmultiply::dgemm, libm::exp, libm::sqrt);

// f64 math for the non-generic modules (image ops, clustering, synthesis).
// With `std` these forward to the intrinsic-backed methods; without, to libm.

macro_rules! shim {
    ($(fn $name:ident($($arg:ident),+) -> f64 => $libm:path;)+) => {
        $(
            #[inline]
            pub fn $name($($arg: f64),+) -> f64 {
                #[cfg(feature = "std")]
                {
                    shim!(@std $name, $($arg),+)
                }
                #[cfg(not(feature = "std"))]
                {
                    $libm($($arg),+)
                }
            }
        )+
    };
    (@std $name:ident, $a:ident) => { f64::$name($a) };
    (@std $name:ident, $a:ident, $b:ident) => { f64::$name($a, $b) };
}

shim! {
    fn exp(x) -> f64 => libm::exp;
    fn ln(x) -> f64 => libm::log;
    fn sqrt(x) -> f64 => libm::sqrt;
    fn sin(x) -> f64 => libm::sin;
    fn cos(x) -> f64 => libm::cos;
    fn floor(x) -> f64 => libm::floor;
    fn ceil(x) -> f64 => libm::ceil;
    fn round(x) -> f64 => libm::round;
    fn atan2(y, x) -> f64 => libm::atan2;
    fn powf(x, y) -> f64 => libm::pow;
    fn hypot(x, y) -> f64 => libm::hypot;
}

pub const PI: f64 = core::f64::consts::PI;
