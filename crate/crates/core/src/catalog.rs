//! Built-in methods with exact coefficients, and the viewports used to draw
//! their stability regions.

use alloc::string::String;
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::method::MultistepScheme;
use crate::region::Viewport;

pub const BUILTIN_NAMES: &[&str] = &[
    "implicit_euler",
    "explicit_euler",
    "trapezoidal",
    "bdf1",
    "bdf2",
    "bdf3",
    "bdf4",
    "bdf5",
    "bdf6",
    "adams_moulton_1",
    "adams_moulton_2",
    "adams_moulton_3",
    "adams_moulton_4",
    "enright3",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method `{name}`; available: {}", BUILTIN_NAMES.join(", "))]
pub struct UnknownMethod {
    pub name: String,
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ints(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| q(x, 1)).collect()
}

fn over(v: &[i64], d: i64) -> Vec<BigRational> {
    v.iter().map(|&x| q(x, d)).collect()
}

fn lmm(name: &str, alpha: Vec<BigRational>, beta: Vec<BigRational>) -> MultistepScheme {
    MultistepScheme::from_lmm(name, alpha, beta).expect("catalog coefficients are valid")
}

/// Looks up a built-in method by name.
pub fn builtin(name: &str) -> Result<MultistepScheme, UnknownMethod> {
    let scheme = match name {
        "implicit_euler" | "bdf1" => lmm(name, ints(&[-1, 1]), ints(&[0, 1])),
        "explicit_euler" => lmm(name, ints(&[-1, 1]), ints(&[1, 0])),
        "trapezoidal" | "adams_moulton_1" => lmm(name, ints(&[-1, 1]), over(&[1, 1], 2)),
        // BDF in the integer normalisation of Σ_{j≤k} ∇^j y_{n+k} / j = h f_{n+k}.
        "bdf2" => lmm(name, ints(&[1, -4, 3]), ints(&[0, 0, 2])),
        "bdf3" => lmm(name, ints(&[-2, 9, -18, 11]), ints(&[0, 0, 0, 6])),
        "bdf4" => lmm(name, ints(&[3, -16, 36, -48, 25]), ints(&[0, 0, 0, 0, 12])),
        "bdf5" => lmm(name, ints(&[-12, 75, -200, 300, -300, 137]), ints(&[0, 0, 0, 0, 0, 60])),
        "bdf6" => lmm(name, ints(&[10, -72, 225, -400, 450, -360, 147]), ints(&[0, 0, 0, 0, 0, 0, 60])),
        "adams_moulton_2" => lmm(name, ints(&[0, -1, 1]), over(&[-1, 8, 5], 12)),
        "adams_moulton_3" => lmm(name, ints(&[0, 0, -1, 1]), over(&[1, -5, 19, 9], 24)),
        "adams_moulton_4" => lmm(name, ints(&[0, 0, 0, -1, 1]), over(&[-19, 106, -264, 646, 251], 720)),
        // Read off Φ(ζ,μ) = (19μ²/180 - 307μ/540 + 1)ζ³ + (-19μ/40 - 1)ζ² + μζ/20 - 7μ/1080.
        "enright3" => MultistepScheme::from_second_derivative(
            name,
            ints(&[0, 0, -1, 1]),
            alloc::vec![q(7, 1080), q(-1, 20), q(19, 40), q(307, 540)],
            alloc::vec![q(0, 1), q(0, 1), q(0, 1), q(-19, 180)],
        )
        .expect("catalog coefficients are valid"),
        _ => return Err(UnknownMethod { name: name.into() }),
    };
    Ok(scheme)
}

/// Plot window containing the exceptional set and the bounded part of the
/// instability (or stability) region.
pub fn standard_viewport(name: &str) -> Option<Viewport> {
    let (re_min, re_max, im_min, im_max) = match name {
        "implicit_euler" | "bdf1" | "explicit_euler" | "trapezoidal" | "adams_moulton_1" => (-3.0, 3.0, -3.0, 3.0),
        "bdf2" => (-2.0, 5.0, -3.0, 3.0),
        "bdf3" => (-2.0, 8.0, -5.0, 5.0),
        "bdf4" => (-2.0, 12.0, -8.0, 8.0),
        "bdf5" => (-4.0, 19.0, -13.0, 13.0),
        "bdf6" => (-8.0, 30.0, -22.0, 22.0),
        "adams_moulton_2" => (-7.0, 4.0, -4.0, 4.0),
        "adams_moulton_3" => (-4.0, 4.0, -3.0, 3.0),
        "adams_moulton_4" => (-3.0, 4.0, -2.5, 2.5),
        "enright3" => (-2.0, 7.0, -4.0, 4.0),
        _ => return None,
    };
    Some(Viewport::new(re_min, re_max, im_min, im_max).expect("catalog viewports are valid"))
}
