use std::f64::consts::{FRAC_PI_2, PI};

use nodalmag::criticality::{morse_report_with, CriticalityConfig};
use nodalmag::duality::{interlace_slacks, tree_index};
use nodalmag::harness::{random_instance, InstanceSpec};
use nodalmag::nodal::nodal_report;
use nodalmag::operators::{build_magnetic, build_plain, perturbation_matrix, MagneticPhases};
use nodalmag::spectral::eig;
use nodalmag::CycleStructure;

#[test]
fn nodal_counts_stay_within_surplus_bounds() {
    let spec = InstanceSpec {
        seed: 500,
        count: 500,
        ..InstanceSpec::default()
    };
    let mut generic = 0;
    for k in 0..spec.count {
        let g = random_instance(&spec, k).unwrap();
        let cs = CycleStructure::new(&g, None);
        let sd = eig(&build_plain(&g)).unwrap();
        for level in 1..=g.n_vertices() {
            let r = nodal_report(&g, &cs, &sd, level).unwrap();
            if let Some(phi) = r.phi {
                generic += 1;
                assert!(phi + 1 >= level && phi < level + cs.betti(), "instance {k} level {level}: phi {phi}");
                assert!(r.within_bounds(cs.betti()));
            }
        }
    }
    assert!(generic > 3000);
}

#[test]
fn hessian_inertia_does_not_depend_on_the_spanning_tree() {
    let spec = InstanceSpec {
        seed: 20,
        min_beta: 2,
        count: 20,
        ..InstanceSpec::default()
    };
    let config = CriticalityConfig::default();
    let mut compared = 0;
    for k in 0..spec.count {
        let g = random_instance(&spec, k).unwrap();
        let sd = eig(&build_plain(&g)).unwrap();
        let trees: Vec<_> = [None, Some(1), Some(2)]
            .into_iter()
            .map(|seed| CycleStructure::new(&g, seed))
            .collect();
        for level in 1..=g.n_vertices() {
            let reports: Vec<_> = trees
                .iter()
                .map(|cs| morse_report_with(&g, cs, &sd, level, &config).unwrap())
                .collect();
            if reports.iter().any(|r| !r.generic || r.degenerate_hessian) {
                continue;
            }
            compared += 1;
            for r in &reports[1..] {
                assert_eq!(r.inertia, reports[0].inertia, "instance {k} level {level}");
            }
        }
    }
    assert!(compared > 100);
}

#[test]
fn different_trees_give_different_hessians() {
    // K4 with a potential: the matrices change with the basis, the index does not
    let edges: Vec<_> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
    let g = nodalmag::Graph::new(4, &edges, vec![0.13, -0.41, 0.27, 0.05]).unwrap();
    let sd = eig(&build_plain(&g)).unwrap();
    let config = CriticalityConfig::default();
    let a = morse_report_with(&g, &CycleStructure::new(&g, None), &sd, 2, &config).unwrap();
    let trees: Vec<_> = (0..10).map(|s| CycleStructure::new(&g, Some(s))).collect();
    let other = trees
        .iter()
        .map(|cs| morse_report_with(&g, cs, &sd, 2, &config).unwrap())
        .find(|r| r.hessian != a.hessian)
        .expect("some seeded tree differs from the default one");
    assert_eq!(other.inertia, a.inertia);
}

#[test]
fn cut_tree_gradient_vanishes_at_the_critical_parameters() {
    let spec = InstanceSpec {
        seed: 57,
        min_beta: 1,
        count: 60,
        ..InstanceSpec::default()
    };
    let mut checked = 0;
    for k in 0..spec.count {
        let g = random_instance(&spec, k).unwrap();
        let cs = CycleStructure::new(&g, None);
        let sd = eig(&build_plain(&g)).unwrap();
        for level in 1..=g.n_vertices() {
            let Ok(r) = tree_index(&g, &cs, &sd, level, 1e-3) else {
                continue;
            };
            checked += 1;
            // the raw derivative for cut parameters of size at least one, the
            // derivative in log|gamma| below that, where the -1/gamma entry
            // puts the rounding floor of the raw difference quotient near 1e-6
            for ((d, a), gm) in r.gradient.iter().zip(&r.analytic_gradient).zip(&r.gamma_tilde) {
                let scale = gm.abs().min(1.0);
                assert!(d.abs() * scale <= 1e-6, "instance {k} level {level}: {:?}", r.gradient);
                assert!(a.abs() * scale <= 1e-12, "instance {k} level {level}: {:?}", r.analytic_gradient);
            }
        }
    }
    assert!(checked > 300);
}

#[test]
fn interlacing_is_strict_when_the_eigenvector_sees_the_edge() {
    let spec = InstanceSpec {
        seed: 31,
        min_beta: 1,
        count: 40,
        ..InstanceSpec::default()
    };
    let mut certified = 0;
    for k in 0..spec.count {
        let g = random_instance(&spec, k).unwrap();
        let cs = CycleStructure::new(&g, None);
        let tol_gap = 1e-8;
        for (a, c) in [(3, 5), (11, 2), (7, 13)] {
            let alpha = -PI + 2.0 * PI * a as f64 / 17.0;
            let gamma = (-FRAC_PI_2 + (c as f64 + 0.25) * PI / 17.0).tan();
            let mut phases = vec![0.0; cs.betti()];
            phases[0] = alpha;
            let mag = eig(&build_magnetic(&g, &cs, &MagneticPhases::new(phases)).unwrap()).unwrap();
            let b = perturbation_matrix(&g, &cs, 0, gamma, alpha).unwrap();
            let slacks = interlace_slacks(&g, &cs, 0, gamma, alpha).unwrap();
            for level in 1..=g.n_vertices() {
                let f = mag.vector(level);
                let bf = b.matrix() * nalgebra::DVector::from_vec(f.clone());
                if mag.gap(level) > 1e-3 && bf.norm() > 1e-3 {
                    certified += 1;
                    assert!(slacks[level - 1] > tol_gap, "instance {k} level {level}: {}", slacks[level - 1]);
                }
            }
        }
    }
    assert!(certified > 500);
}
