use stabreg_core::catalog::{builtin, standard_viewport, BUILTIN_NAMES};
use stabreg_core::charpoly::exceptional_set;
use stabreg_core::locus::{min_distance, trace};
use stabreg_core::region::{scan, GridSpec, RegionGrid};
use stabreg_core::stability::Status;
use stabreg_core::{CharPoly, Tolerances};

fn grid(name: &str, n: usize) -> (CharPoly, RegionGrid) {
    let tol = Tolerances::default();
    let cp = CharPoly::new(&builtin(name).unwrap());
    let exc = exceptional_set(&cp, &tol);
    let spec = GridSpec::new(standard_viewport(name).unwrap(), n, n).unwrap();
    let g = scan(&cp, &exc, &spec, &tol).unwrap();
    (cp, g)
}

#[test]
fn conjugate_symmetry_and_refinement() {
    for name in BUILTIN_NAMES {
        let (_, g) = grid(name, 61);
        let spec = *g.spec();
        assert_eq!(spec.viewport.im_min, -spec.viewport.im_max, "{name}");
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let (a, b) = (g.cell(i, j), g.cell(i, spec.ny - 1 - j));
                if a.snapped || b.snapped {
                    continue;
                }
                assert_eq!(a.mu, b.mu.conj(), "{name}");
                assert_eq!((a.classical, a.refined), (b.classical, b.refined), "{name} at {}", a.mu);
                if a.refined == Status::Stable {
                    assert_eq!(a.classical, Status::Stable, "{name} at {}", a.mu);
                }
            }
        }
    }
}

#[test]
fn boundary_cells_lie_near_the_locus() {
    let tol = Tolerances::default();
    for name in BUILTIN_NAMES {
        let (cp, g) = grid(name, 81);
        let spec = *g.spec();
        let curve = trace(&cp, 10_000, &tol);
        let diagonal = spec.dx().hypot(spec.dy());
        let mut boundary = 0;
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let cell = g.cell(i, j);
                if cell.classical != Status::Stable || cell.degenerate {
                    continue;
                }
                let neighbours = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)]
                    .into_iter()
                    .filter_map(|(di, dj)| {
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        (ni >= 0 && nj >= 0 && (ni as usize) < spec.nx && (nj as usize) < spec.ny).then(|| g.cell(ni as usize, nj as usize))
                    });
                if neighbours.into_iter().any(|c| c.classical == Status::Unstable && !c.degenerate) {
                    boundary += 1;
                    let d = min_distance(&curve, spec.node(i, j)).unwrap();
                    assert!(d <= 2.0 * diagonal, "{name}: node {} is {d} from the locus", spec.node(i, j));
                }
            }
        }
        assert!(boundary > 0, "{name}");
    }
}
