//! Fixtures shared by the benchmarks.

use dioph::{LinearForm, RealExpr};

pub fn sqrt2() -> LinearForm {
    LinearForm::new(vec![RealExpr::sqrt_int(2).unwrap()]).unwrap()
}

pub fn cube_roots() -> LinearForm {
    LinearForm::new(vec![RealExpr::int_root(2, 3).unwrap(), RealExpr::int_root(4, 3).unwrap()]).unwrap()
}

pub fn three_roots() -> LinearForm {
    let s = |n| RealExpr::sqrt_int(n).unwrap();
    LinearForm::new(vec![s(2), s(3), s(5)]).unwrap()
}
