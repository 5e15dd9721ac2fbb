use num_complex::Complex64;

use stringeq::cli_io::{parse_config, render_boundary_svg, render_map_svg, write_trajectory_csv};
use stringeq::evolution::{run_evolution, Mode, StopReason, Trajectory};
use stringeq::scenarios::{Family, ScenarioSpec};
use stringeq::Error;

fn run(family: Family, horizon: f64, dt: f64) -> Trajectory {
    let mut spec = ScenarioSpec::new(family);
    spec.horizon = horizon;
    spec.dt = dt;
    run_evolution(&spec).unwrap()
}

fn csv_column(traj: &Trajectory, name: &str) -> Vec<f64> {
    let mut buf = Vec::new();
    write_trajectory_csv(traj, &mut buf).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    let idx = rd
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .expect("column exists");
    rd.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn disk_csv_has_m0_equal_to_one_plus_t() {
    let traj = run(Family::Disk { radius: 1.0 }, 0.05, 0.01);
    let t = csv_column(&traj, "t");
    let m0 = csv_column(&traj, "M0");
    assert!(m0.windows(2).all(|w| w[1] > w[0]));
    for (t, m) in t.iter().zip(&m0) {
        assert!((m - 1.0 - t).abs() < 1e-12);
    }
}

#[test]
fn cardioid_csv_keeps_m1_constant() {
    let traj = run(
        Family::Polynomial {
            coeffs: vec![1.0.into(), 0.3.into()],
        },
        0.05,
        0.01,
    );
    let m1 = csv_column(&traj, "M1_re");
    // constant up to the RK4 truncation error at this step size
    assert!(m1.iter().all(|m| (m - 0.3).abs() < 1e-9), "{m1:?}");
}

#[test]
fn csv_uses_seventeen_significant_digits() {
    let traj = run(Family::Disk { radius: 1.0 }, 0.01, 0.01);
    let mut buf = Vec::new();
    write_trajectory_csv(&traj, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let row = text.lines().nth(1).unwrap();
    for field in row.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
    }
}

#[test]
fn empty_trajectory_is_an_error() {
    let traj = Trajectory {
        mode: Mode::Polynomial,
        states: Vec::new(),
        stop: StopReason::Completed,
    };
    assert!(matches!(write_trajectory_csv(&traj, Vec::new()), Err(Error::Io(_))));
    assert!(render_boundary_svg(&traj).is_err());
}

fn polyline_points(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.lines()
        .filter_map(|l| l.split("points=\"").nth(1))
        .map(|rest| {
            rest.split('"')
                .next()
                .unwrap()
                .split(' ')
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect()
        })
        .collect()
}

#[test]
fn subcase1_boundary_is_a_doubly_covered_circle() {
    let map = Family::Subcase1 {
        m0: 1.0,
        b1: Complex64::new(0.1, 0.15),
    }
    .build()
    .unwrap();
    let svg = render_map_svg(&map, &[]).unwrap();
    let curves = polyline_points(&svg);
    assert_eq!(curves.len(), 1);
    let pts = &curves[0];
    // center of the bounding box; the samples are not evenly spread in angle
    let fold = |f: fn(&(f64, f64)) -> f64| {
        pts.iter()
            .map(f)
            .fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(v), h.max(v)))
    };
    let (x_lo, x_hi) = fold(|p| p.0);
    let (y_lo, y_hi) = fold(|p| p.1);
    let (cx, cy) = ((x_lo + x_hi) / 2.0, (y_lo + y_hi) / 2.0);
    let radii: Vec<f64> = pts
        .iter()
        .map(|p| ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt())
        .collect();
    let (lo, hi) = radii
        .iter()
        .fold((f64::MAX, 0.0_f64), |(l, h), &r| (l.min(r), h.max(r)));
    // a circle in pixel space, up to rounding of the coordinates
    assert!(hi - lo < 0.05, "radius spread {}", hi - lo);
    // covered twice: the polar angle advances by 4 pi over the samples
    let mut winding = 0.0;
    for w in pts.windows(2) {
        let a0 = (w[0].1 - cy).atan2(w[0].0 - cx);
        let a1 = (w[1].1 - cy).atan2(w[1].0 - cx);
        let mut d = a1 - a0;
        if d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        } else if d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        winding += d;
    }
    assert!(
        (winding.abs() / std::f64::consts::TAU - 2.0).abs() < 1e-6,
        "winding {winding}"
    );
}

#[test]
fn growing_snapshots_are_nested() {
    let spec =
        parse_config("family = \"polynomial\"\ncoeffs = [1.0, 0.3]\nhorizon = 0.1\ndt = 0.01\noutput_every = 5\n")
            .unwrap();
    let traj = run_evolution(&spec).unwrap();
    let times: Vec<f64> = traj.states.iter().map(|s| s.t).collect();
    assert_eq!(times.len(), 3);
    assert!((times[1] - 0.05).abs() < 1e-12 && (times[2] - 0.1).abs() < 1e-12);
    let svg = render_boundary_svg(&traj).unwrap();
    for t in ["t=0.0000", "t=0.0500", "t=0.1000"] {
        assert!(svg.contains(t), "{t}");
    }
    // the image of z = 1 moves outward along the real axis
    let right: Vec<f64> = traj
        .states
        .iter()
        .map(|s| s.coeffs.iter().map(|c| c.re).sum())
        .collect();
    assert!(right[0] < right[1] && right[1] < right[2]);
    // and the area M0 grows
    assert!(traj.states.windows(2).all(|w| w[1].moments.m0 > w[0].moments.m0));
}
