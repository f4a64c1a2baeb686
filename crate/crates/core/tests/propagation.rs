//! Propagator checks against closed-form Rabi solutions and an independent
//! fixed-step RK4 integration of the Schrödinger equation.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use zzlab::dynamics::propagate_interval;
use zzlab::{
    build_hamiltonian, frequency_at, logical_frame, project_logical, propagate, simulate_gate, BareLabel, Complex64,
    DeviceSpec, GateKind, ModeSpec, PulseSpec,
};

/// ν_a = 6.1 GHz parked, ν_b = 5.5 GHz, α_a = −250 MHz, α_b = +250 MHz, g = 15 MHz.
fn device() -> DeviceSpec {
    DeviceSpec::direct(ModeSpec::new(6.1, -250.0), ModeSpec::new(5.5, 250.0), 15.0)
}

fn cz_pulse() -> PulseSpec {
    PulseSpec::new(6.1, 5.75, 16.7).with_overshoot(4.194)
}

fn idx(na: usize, nb: usize, dev: &DeviceSpec) -> usize {
    BareLabel::qubits(na, nb, &dev.dims()).index(&dev.dims())
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Pulse whose frequency never moves, lasting `total` ns.
fn constant(freq: f64, total: f64) -> PulseSpec {
    let mut p = PulseSpec::new(freq, freq, 0.0);
    p.ramp_ns = 0.5;
    p.padding_ns = 0.0;
    p.hold_ns = total - p.ramp_ns;
    p
}

#[test]
fn unitary_and_block_diagonal() {
    let dev = device();
    let u = propagate(&dev, &cz_pulse()).unwrap();
    assert!(u.unitarity_deviation() < 1e-9, "{}", u.unitarity_deviation());
    let dims = dev.dims();
    for r in 0..dev.dimension() {
        for c in 0..dev.dimension() {
            if BareLabel::from_index(r, &dims).excitations() != BareLabel::from_index(c, &dims).excitations() {
                assert!(u.matrix[(r, c)].norm() < 1e-9);
            }
        }
    }
}

#[test]
fn free_evolution_is_diagonal_phases() {
    let dev = DeviceSpec::direct(ModeSpec::new(6.1, -250.0), ModeSpec::new(5.5, 250.0), 0.0);
    let p = constant(6.1, 7.3);
    let u = propagate(&dev, &p).unwrap();
    let h = build_hamiltonian(&dev, None).unwrap();
    for i in 0..dev.dimension() {
        let expect = Complex64::from_polar(1.0, -h[(i, i)].re * 7.3);
        assert!((u.matrix[(i, i)] - expect).norm() < 1e-9);
    }
}

#[test]
fn resonant_exchange_transfers_fully_at_quarter_period() {
    // T = 1/(4g) with g in GHz
    let g = 15.0;
    let dev = DeviceSpec::direct(ModeSpec::new(5.5, -250.0), ModeSpec::new(5.5, 250.0), g);
    let t = 1.0 / (4.0 * g / 1000.0);
    let u = propagate(&dev, &constant(5.5, t)).unwrap();
    let (s01, s10) = (idx(0, 1, &dev), idx(1, 0, &dev));
    assert!((u.matrix[(s10, s01)].norm_sqr() - 1.0).abs() < 1e-9);
    assert!(u.matrix[(s01, s01)].norm() < 1e-5);

    let half = propagate(&dev, &constant(5.5, t / 2.0)).unwrap();
    assert!((half.matrix[(s10, s01)].norm_sqr() - 0.5).abs() < 1e-9);
}

#[test]
fn triple_point_returns_11_after_one_rabi_cycle() {
    // ν_a = ν_b + α_b with δ_α = 0: |11> couples to (|02> + |20>)/√2 with 2g
    let g = 15.0;
    let dev = DeviceSpec::direct(ModeSpec::new(5.75, -250.0), ModeSpec::new(5.5, 250.0), g);
    let t = 1.0 / (2.0 * 2.0 * g / 1000.0);
    let s11 = idx(1, 1, &dev);
    let full = propagate(&dev, &constant(5.75, t)).unwrap();
    assert!((full.matrix[(s11, s11)].norm_sqr() - 1.0).abs() < 1e-9);
    // a full cycle flips the sign of the |11> amplitude relative to free evolution
    let e11 = build_hamiltonian(&dev, None).unwrap()[(s11, s11)].re;
    let rel = full.matrix[(s11, s11)] * Complex64::from_polar(1.0, e11 * t);
    assert!((rel + 1.0).norm() < 1e-6, "{rel}");

    let half = propagate(&dev, &constant(5.75, t / 2.0)).unwrap();
    assert!(half.matrix[(s11, s11)].norm() < 1e-6);
}

#[test]
fn split_interval_composes() {
    let dev = device();
    let p = cz_pulse();
    let total = p.total_duration();
    let whole = propagate(&dev, &p).unwrap();
    let split = |cut: f64| {
        let first = propagate_interval(&dev, &p, 0.0, cut).unwrap();
        let second = propagate_interval(&dev, &p, cut, total).unwrap();
        max_abs(&(&second.matrix * &first.matrix - &whole.matrix))
    };
    // cuts on the time grid reproduce the same steps
    for cut in [0.5 * total, p.padding_ns + 0.3 * p.ramp_ns, 7.84] {
        let diff = split(cut);
        assert!(diff < 1e-9, "cut {cut}: {diff:e}");
    }
    // an off-grid cut only moves the step boundaries
    let diff = split(0.37 * total);
    assert!(diff < 1e-7, "{diff:e}");
}

#[test]
fn halving_the_step_changes_projection_below_1e7() {
    let dev = device();
    let frame = logical_frame(&dev, 6.1).unwrap();
    for p in [cz_pulse(), PulseSpec::new(6.1, 5.5, 17.1).with_overshoot(3.5)] {
        let coarse = project_logical(&propagate(&dev, &p).unwrap(), &frame).unwrap();
        let mut fine_p = p;
        fine_p.time_step_ns /= 2.0;
        let fine = project_logical(&propagate(&dev, &fine_p).unwrap(), &frame).unwrap();
        let diff = (coarse.matrix - fine.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-7, "{diff:e}");
    }
}

/// RK4 on |ψ'> = −i (H(t) − ω_ref N) |ψ>. Subtracting a multiple of the
/// conserved excitation number keeps the integrand slow without touching the
/// conditional phase.
fn rk4_columns(dev: &DeviceSpec, p: &PulseSpec, cols: &[DVector<Complex64>], dt: f64) -> Vec<DVector<Complex64>> {
    let dims = dev.dims();
    let omega_ref = TAU * dev.mode_b.freq_ghz;
    let n_diag: Vec<f64> = (0..dev.dimension()).map(|i| BareLabel::from_index(i, &dims).excitations() as f64).collect();
    let h_at = |t: f64| {
        let f = frequency_at(p, t.min(p.total_duration())).unwrap();
        let mut h = build_hamiltonian(dev, Some(f)).unwrap();
        for (i, n) in n_diag.iter().enumerate() {
            h[(i, i)] -= Complex64::new(omega_ref * n, 0.0);
        }
        h * Complex64::new(0.0, -1.0)
    };
    let steps = (p.total_duration() / dt).round() as usize;
    let dt = p.total_duration() / steps as f64;
    let mut psi = DMatrix::from_columns(cols);
    for k in 0..steps {
        let t = k as f64 * dt;
        let (a, b, c) = (h_at(t), h_at(t + 0.5 * dt), h_at(t + dt));
        let k1 = &a * &psi;
        let k2 = &b * (&psi + &k1 * Complex64::from(0.5 * dt));
        let k3 = &b * (&psi + &k2 * Complex64::from(0.5 * dt));
        let k4 = &c * (&psi + &k3 * Complex64::from(dt));
        psi += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(dt / 6.0);
    }
    psi.column_iter().map(|c| c.into_owned()).collect()
}

/// Frame built with nalgebra's real symmetric solver: RWA couplings are real.
fn oracle_frame(dev: &DeviceSpec) -> Vec<DVector<Complex64>> {
    let h = build_hamiltonian(dev, None).unwrap().map(|z| z.re);
    let eig = h.symmetric_eigen();
    [(0, 0), (0, 1), (1, 0), (1, 1)]
        .iter()
        .map(|&(na, nb)| {
            let bare = idx(na, nb, dev);
            let k = (0..dev.dimension())
                .max_by(|&i, &j| eig.eigenvectors[(bare, i)].abs().total_cmp(&eig.eigenvectors[(bare, j)].abs()))
                .unwrap();
            let v = eig.eigenvectors.column(k);
            let sign = v[bare].signum();
            v.map(|x| Complex64::new(x * sign, 0.0))
        })
        .collect()
}

#[test]
fn cz_conditional_phase_matches_rk4() {
    let dev = device();
    let p = cz_pulse();
    let frame = oracle_frame(&dev);
    let out = rk4_columns(&dev, &p, &frame, 1e-3);
    let m = |i: usize, j: usize| frame[i].dotc(&out[j]);
    let phi_oracle = -(m(0, 0) * m(3, 3) / (m(1, 1) * m(2, 2))).arg();

    let metrics = simulate_gate(&dev, &p, GateKind::Cz).unwrap();
    let diff = (metrics.phi_measured - phi_oracle + PI).rem_euclid(TAU) - PI;
    assert!(diff.abs() < 1e-3, "magnus {} vs rk4 {phi_oracle}", metrics.phi_measured);
    let leak_oracle = 1.0 - m(3, 3).norm_sqr();
    assert!((metrics.epsilon_leak - leak_oracle).abs() < 1e-5, "{} vs {leak_oracle}", metrics.epsilon_leak);
}
