use stabreg::parallel::scan;
use stabreg_core::catalog::{builtin, standard_viewport};
use stabreg_core::charpoly::exceptional_set;
use stabreg_core::region::{self, GridSpec};
use stabreg_core::{CharPoly, Tolerances};

#[test]
fn worker_count_does_not_change_the_grid() {
    let tol = Tolerances::default();
    for name in ["bdf2", "enright3", "trapezoidal"] {
        let cp = CharPoly::new(&builtin(name).unwrap());
        let exc = exceptional_set(&cp, &tol);
        let spec = GridSpec::new(standard_viewport(name).unwrap(), 57, 43).unwrap();
        let sequential = region::scan(&cp, &exc, &spec, &tol).unwrap();
        for workers in [1, 2, 5] {
            assert_eq!(scan(&cp, &exc, &spec, &tol, workers).unwrap(), sequential, "{name} with {workers} workers");
        }
    }
}

#[test]
fn zero_workers_is_an_error() {
    let tol = Tolerances::default();
    let cp = CharPoly::new(&builtin("bdf2").unwrap());
    let exc = exceptional_set(&cp, &tol);
    let spec = GridSpec::new(standard_viewport("bdf2").unwrap(), 5, 5).unwrap();
    assert!(scan(&cp, &exc, &spec, &tol, 0).is_err());
}
