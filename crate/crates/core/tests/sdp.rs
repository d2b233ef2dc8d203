use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selftest::algebra::Letter;
use selftest::realization::{ControlSet, ControlVariant, QubitRealization};
use selftest::sdp::{
    assemble_sdp, fig5_presets, solve_lower_bound, solve_lower_bound_with, sweep_curve, AuxChoice, CriterionConfig, InteriorPoint,
    LmiProblem, Multipliers, RawSolution, SdpBackend, SdpError, SolveStatus, CERTIFICATE_TOL,
};
use selftest::simulator::rho_swap_fidelity;

/// Bloch angle of the polar part of `X1 − c X0` for observables at angles
/// `a0`, `a1`; measuring it makes the localizing constraint hold.
fn polar_angle(a0: f64, a1: f64, c: f64) -> f64 {
    (a1.sin() - c * a0.sin()).atan2(a1.cos() - c * a0.cos())
}

/// A qubit strategy near the ideal one for `cfg`, with any auxiliary
/// observable set to the polar part of its localizer operator.
fn perturbed(cfg: &CriterionConfig, rng: &mut ChaCha8Rng, size: f64) -> QubitRealization {
    let ideal = cfg.ideal_realization();
    let mut jitter = |v: f64| v + rng.gen_range(-size..size);
    let a = [jitter(ideal.meas_angle_a[0]), jitter(ideal.meas_angle_a[1])];
    let b = [jitter(ideal.meas_angle_b[0]), jitter(ideal.meas_angle_b[1])];
    let mut r = selftest::realization::from_bloch_angles(a, b);
    let ang = &cfg.angles;
    if cfg.xa == AuxChoice::Auxiliary {
        r = r.with_aux_a(polar_angle(a[0], a[1], (ang.get(0, 0) + ang.get(1, 0)).cos()));
    }
    if cfg.xb == AuxChoice::Auxiliary {
        r = r.with_aux_b(polar_angle(b[0], b[1], (ang.get(1, 0) + ang.get(1, 1)).cos()));
    }
    if cfg.third_bob.is_some() {
        r = r.with_aux_b(jitter(ideal.aux_b.unwrap()));
    }
    r
}

fn observed_deviation(cfg: &CriterionConfig, r: &QubitRealization) -> f64 {
    cfg.observed()
        .iter()
        .map(|&(a, b, e)| (r.moment(&selftest::algebra::Word::new(&[a, b])).unwrap() - e).abs())
        .fold(0.0, f64::max)
}

fn simulated_fidelity(cfg: &CriterionConfig, r: &QubitRealization) -> f64 {
    let set = ControlSet { controls: cfg.controls(), variant: ControlVariant::Direct, angles: *r.angles() };
    let m = set.concretize(r).unwrap();
    rho_swap_fidelity(r.state(), &m, &cfg.target()).unwrap().1
}

/// Any concrete strategy whose statistics lie within ε is a feasible point
/// of the relaxation, so its fidelity can never fall below the bound.
#[test]
fn bound_never_exceeds_a_realized_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for cfg in fig5_presets(0.0) {
        for size in [0.01, 0.05, 0.1] {
            let r = perturbed(&cfg, &mut rng, size);
            let eps = observed_deviation(&cfg, &r) + 1e-12;
            let inst = assemble_sdp(&cfg.with_epsilon(eps)).unwrap();
            let y = inst.moments_of(&r).unwrap();
            let check = inst.check_point(&y);
            assert!(check.feasible(1e-9), "{} {size}: {check:?}", cfg.name);
            let f = simulated_fidelity(&cfg, &r);
            assert!((inst.objective(&y) - f).abs() <= 1e-9, "{}: objective {} vs simulator {f}", cfg.name, inst.objective(&y));
            let b = solve_lower_bound(&inst).unwrap();
            assert!(b.bound <= f + 1e-7, "{} ε={eps}: bound {} above realized {f}", cfg.name, b.bound);
        }
    }
}

#[test]
fn certificates_are_positive_and_bounds_below_primal() {
    let grid = [0.0, 0.002, 0.02];
    for cfg in fig5_presets(0.0) {
        for row in sweep_curve(&cfg, &grid).unwrap() {
            let b = row.result.unwrap();
            assert!(b.certificate.min_eigenvalues.iter().all(|&l| l >= -CERTIFICATE_TOL), "{}: {:?}", cfg.name, b.certificate);
            assert!(b.bound <= b.primal + 1e-9, "{} ε={}", cfg.name, b.epsilon);
            assert!(b.bound <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn chsh_curve_is_monotone_and_optimal() {
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.01).collect();
    let rows = sweep_curve(&CriterionConfig::chsh(0.0), &grid).unwrap();
    let bounds: Vec<f64> = rows.iter().map(|r| r.result.as_ref().unwrap().bound).collect();
    assert!(bounds[0] >= 0.999);
    for w in bounds.windows(2) {
        assert!(w[1] <= w[0] + 1e-5, "{bounds:?}");
    }
    assert!(rows.iter().all(|r| r.result.as_ref().unwrap().status == SolveStatus::Optimal));
}

#[test]
fn sweep_is_deterministic() {
    let grid = [0.0, 0.01];
    let cfg = &fig5_presets(0.0)[1];
    let a = sweep_curve(cfg, &grid).unwrap();
    let b = sweep_curve(cfg, &grid).unwrap();
    assert_eq!(a, b);
}

/// A backend that returns zero multipliers: the certificate still holds,
/// only weakly.
struct Lazy;

impl SdpBackend for Lazy {
    fn solve(&self, p: &LmiProblem) -> Result<RawSolution, SdpError> {
        let inner = InteriorPoint::default().solve(p)?;
        let blocks = p.blocks.iter().map(|b| nalgebra::DMatrix::zeros(b.dim, b.dim)).collect();
        Ok(RawSolution {
            multipliers: Multipliers { blocks, lower: vec![0.0; p.n_vars], upper: vec![0.0; p.n_vars] },
            trail: Vec::new(),
            ..inner
        })
    }
}

#[test]
fn weak_multipliers_give_a_valid_weak_bound() {
    let inst = assemble_sdp(&CriterionConfig::chsh(0.02)).unwrap();
    let strong = solve_lower_bound(&inst).unwrap();
    let weak = solve_lower_bound_with(&inst, &Lazy).unwrap();
    assert!(weak.bound <= strong.bound);
    assert_eq!(weak.status, SolveStatus::NumericalFailure);
    assert!(weak.diagnostics.is_some());
}

#[test]
fn invalid_configs_are_rejected() {
    let cfg = CriterionConfig::chsh(0.0).with_epsilon(-0.1);
    assert!(matches!(sweep_curve(&cfg, &[0.0]).unwrap()[0].result, Ok(_)));
    assert!(matches!(cfg.validate(), Err(SdpError::InvalidConfig(_))));
    assert_eq!(sweep_curve(&cfg, &[]), Err(SdpError::EmptyGrid));
    let mut my = CriterionConfig::mayers_yao(0.0);
    my.xb = AuxChoice::Auxiliary;
    assert!(my.validate().is_err());
    assert_eq!(my.alphabet().iter().filter(|&&l| l == Letter::B2).count(), 1);
}
