//! Every budget term checked against a direct physical-space evaluation
//! with spectrally shifted fields on an alias-free grid.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use turbkit::diag::bands::BandMaps;
use turbkit::diag::channels::SnapshotChannels;
use turbkit::diag::dots::{direction_terms, TermSample, GL8_W, GL8_X};
use turbkit::fft::FftEngine;
use turbkit::ops::pressure_recover;
use turbkit::{make_cutoff, CutoffKind, ScalarField, SpectralField, WaveGrid};

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Padded physical samples of `spec` with a per-mode multiplier applied.
fn phys_with(
    maps: &BandMaps,
    eng: &mut FftEngine,
    spec: &[Complex64],
    mul: impl Fn([i64; 3]) -> Complex64,
) -> Vec<f64> {
    let padded = maps.pad_spectrum_with(spec, |k, v| mul(k) * v);
    let mut work = Vec::new();
    let mut out = Vec::new();
    eng.inverse_real(&padded, &mut work, &mut out);
    out
}

struct OracleFields {
    cell: f64,
    n: usize,
    psi: Vec<f64>,
    dpsi: [Vec<f64>; 3],
    lap: Vec<f64>,
    u: [Vec<f64>; 3],
    z: [Vec<f64>; 3],
    p: Vec<f64>,
}

impl OracleFields {
    fn build(
        maps: &BandMaps,
        eng: &mut FftEngine,
        u: &SpectralField,
        z: &SpectralField,
        p: &ScalarField,
        psi: &ScalarField,
    ) -> Self {
        let one = |_k: [i64; 3]| Complex64::new(1.0, 0.0);
        OracleFields {
            cell: maps.pad.cell_volume(),
            n: maps.pad.len(),
            psi: phys_with(maps, eng, psi.coeffs(), one),
            dpsi: std::array::from_fn(|a| {
                phys_with(maps, eng, psi.coeffs(), |k| {
                    Complex64::new(0.0, k[a] as f64)
                })
            }),
            lap: phys_with(maps, eng, psi.coeffs(), |k| {
                Complex64::new(-((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64), 0.0)
            }),
            u: std::array::from_fn(|j| phys_with(maps, eng, u.comp(j), one)),
            z: std::array::from_fn(|j| phys_with(maps, eng, z.comp(j), one)),
            p: phys_with(maps, eng, p.coeffs(), one),
        }
    }
}

/// Direct evaluation of every term at one (direction, separation) pair.
#[allow(clippy::too_many_arguments)]
fn oracle_sample(
    f: &OracleFields,
    maps: &BandMaps,
    eng: &mut FftEngine,
    u: &SpectralField,
    z: &SpectralField,
    p: &ScalarField,
    nh: [f64; 3],
    ell: f64,
) -> TermSample {
    let h = [ell * nh[0], ell * nh[1], ell * nh[2]];
    let shift = |k: [i64; 3]| {
        Complex64::cis(k[0] as f64 * h[0] + k[1] as f64 * h[1] + k[2] as f64 * h[2])
    };
    let kn = |k: [i64; 3]| k[0] as f64 * nh[0] + k[1] as f64 * nh[1] + k[2] as f64 * nh[2];

    let tu: [Vec<f64>; 3] = std::array::from_fn(|j| phys_with(maps, eng, u.comp(j), shift));
    let tz: [Vec<f64>; 3] = std::array::from_fn(|j| phys_with(maps, eng, z.comp(j), shift));
    // T (grad p) and the shifted directional derivatives of u.
    let tgp: [Vec<f64>; 3] = std::array::from_fn(|a| {
        phys_with(maps, eng, p.coeffs(), |k| {
            Complex64::new(0.0, k[a] as f64) * shift(k)
        })
    });
    let tdu: [Vec<f64>; 3] = std::array::from_fn(|j| {
        phys_with(maps, eng, u.comp(j), |k| {
            Complex64::new(0.0, kn(k)) * shift(k)
        })
    });

    let mut s = TermSample::default();
    for x in 0..f.n {
        let uv = [f.u[0][x], f.u[1][x], f.u[2][x]];
        let tv = [tu[0][x], tu[1][x], tu[2][x]];
        let zv = [f.z[0][x], f.z[1][x], f.z[2][x]];
        let tzv = [tz[0][x], tz[1][x], tz[2][x]];
        let dv = [tv[0] - uv[0], tv[1] - uv[1], tv[2] - uv[2]];
        let gv = [f.dpsi[0][x], f.dpsi[1][x], f.dpsi[2][x]];
        let psi = f.psi[x];
        let lap = f.lap[x];
        let un = dot3(&uv, &nh);
        let tn = dot3(&tv, &nh);
        let dn = tn - un;
        let gn = dot3(&gv, &nh);
        let ug = dot3(&uv, &gv);
        let tg = dot3(&tv, &gv);
        let dg = tg - ug;
        let ut = dot3(&uv, &tv);
        let d2 = dot3(&dv, &dv);
        let t2 = dot3(&tv, &tv);

        s.s0 += psi * d2 * dn;
        s.spar += psi * dn * dn * dn;
        s.gamma += psi * ut;
        s.gamma_d += psi * (uv[0] * tdu[0][x] + uv[1] * tdu[1][x] + uv[2] * tdu[2][x]);
        s.gamma_t += psi * un * dot3(&[tdu[0][x], tdu[1][x], tdu[2][x]], &nh);
        s.q_bar += gn * ut;
        s.q1_t += gn * un * tn;
        s.q2_t += ug * tn;
        s.q3_t += un * tg;
        s.z_bar += psi * (dot3(&uv, &tzv) + dot3(&zv, &tv));
        s.z_t += psi * (tn * dot3(&zv, &nh) + un * dot3(&tzv, &nh));
        s.g_bar += lap * ut;
        s.g_t += lap * un * tn;
        s.h_bar += ug * ut;
        s.h_t += ug * un * tn;
        s.p1_bar += f.p[x] * tg;
        s.p1_t += f.p[x] * gn * tn;
        s.p2_bar += psi * (uv[0] * tgp[0][x] + uv[1] * tgp[1][x] + uv[2] * tgp[2][x]);
        s.f_bar += t2 * dg;
        s.f_t += tn * tn * dg;
    }
    let arr = s.to_array().map(|v| v * f.cell);
    let mut s = TermSample::from_array(arr);

    // Ball term by the same radial quadrature as the engine.
    let mut ball = 0.0;
    for q in 0..8 {
        let r = 0.5 * ell * (GL8_X[q] + 1.0);
        let wq = 0.5 * ell * GL8_W[q];
        let tp = phys_with(maps, eng, p.coeffs(), |k| Complex64::cis(r * kn(k)));
        let mut inner = 0.0;
        for x in 0..f.n {
            inner += (f.u[0][x] * f.dpsi[0][x]
                + f.u[1][x] * f.dpsi[1][x]
                + f.u[2][x] * f.dpsi[2][x])
                * tp[x];
        }
        ball += wq * r * r * inner * f.cell;
    }
    s.ball = ball;
    s
}

fn check_close(name: &str, engine: f64, oracle: f64, scale: f64) {
    let tol = 1e-9 * scale.max(1.0);
    assert!(
        (engine - oracle).abs() <= tol,
        "{name}: engine {engine:.15e} oracle {oracle:.15e} diff {:.3e} tol {tol:.3e}",
        (engine - oracle).abs()
    );
}

#[test]
fn all_terms_match_direct_evaluation() {
    let grid = WaveGrid::new(3, 16).unwrap();
    let maps = BandMaps::new(grid);
    let mut eng = FftEngine::new(grid);
    let mut eng_pad = FftEngine::new(maps.pad);
    let mut rng = ChaCha12Rng::seed_from_u64(4202);

    let u = SpectralField::random_divergence_free(grid, 3, 0.3, &mut rng);
    let z = SpectralField::random_divergence_free(grid, 2, 0.1, &mut rng);
    let p = pressure_recover(&u, &mut eng);
    let cutoff = make_cutoff(grid, CutoffKind::Bump, [3.0, 3.2, 2.9], 2.3, &mut eng).unwrap();

    let ch = SnapshotChannels::compute(&u, &z, &p, &cutoff, &maps, &mut eng_pad);
    let fields = OracleFields::build(&maps, &mut eng_pad, &u, &z, &p, cutoff.spectral());

    let dirs = [
        [0.0, 1.0, 0.0],
        [0.48, -0.6, 0.64],
        [-0.685_994_340_570_035_5, 0.514_495_755_427_526_6, 0.514_495_755_427_526_6],
    ];
    let ells = [0.4, 1.3];

    for nh in dirs {
        let norm = dot3(&nh, &nh).sqrt();
        let nh = [nh[0] / norm, nh[1] / norm, nh[2] / norm];
        let engine = direction_terms(&ch, &maps, nh, &ells);
        for (i, &ell) in ells.iter().enumerate() {
            let oracle = oracle_sample(&fields, &maps, &mut eng_pad, &u, &z, &p, nh, ell);
            let e = engine[i].to_array();
            let o = oracle.to_array();
            let names = [
                "s0", "spar", "gamma", "gamma_d", "gamma_t", "q_bar", "q1_t", "q2_t", "q3_t",
                "z_bar", "z_t", "g_bar", "g_t", "h_bar", "h_t", "p1_bar", "p1_t", "p2_bar",
                "ball", "f_bar", "f_t",
            ];
            let scale = o.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for j in 0..e.len() {
                check_close(
                    &format!("{} at ell={ell} nh=({:.2},{:.2},{:.2})", names[j], nh[0], nh[1], nh[2]),
                    e[j],
                    o[j],
                    scale,
                );
            }
        }
    }
}

/// Real samples of a spectral field on an `m` point grid, each point offset
/// by `shift`, summed mode by mode.
fn series_samples(grid: WaveGrid, coeffs: &[Complex64], m: usize, shift: [f64; 3]) -> Vec<f64> {
    let zero = Complex64::new(0.0, 0.0);
    let modes: Vec<([i64; 3], Complex64)> = (0..grid.len())
        .filter(|&f| coeffs[f] != zero)
        .map(|f| (grid.wavevector(f), coeffs[f]))
        .collect();
    let half = grid.n() as i64 / 2;
    let step = turbkit::grid::TWO_PI / m as f64;
    // Per-axis phase tables: tab[a][i * span + (k + half)] = e^{ik(i step + shift_a)}.
    let span = 2 * half as usize + 1;
    let tab: Vec<Vec<Complex64>> = (0..3)
        .map(|a| {
            let mut t = vec![zero; m * span];
            for i in 0..m {
                let x = i as f64 * step + shift[a];
                for k in -half..=half {
                    t[i * span + (k + half) as usize] = Complex64::cis(k as f64 * x);
                }
            }
            t
        })
        .collect();
    let mut out = vec![0.0; m * m * m];
    for i0 in 0..m {
        for i1 in 0..m {
            for i2 in 0..m {
                let mut acc = zero;
                for &(k, c) in &modes {
                    acc += c
                        * tab[0][i0 * span + (k[0] + half) as usize]
                        * tab[1][i1 * span + (k[1] + half) as usize]
                        * tab[2][i2 * span + (k[2] + half) as usize];
                }
                out[(i0 * m + i1) * m + i2] = acc.re;
            }
        }
    }
    out
}

#[test]
fn structure_functions_match_shifted_series_summation() {
    use turbkit::diag::structure_functions;
    use turbkit::integrator::Snapshot;
    use turbkit::lgrid::SeparationGrid;
    use turbkit::sphere::DirectionSet;

    let grid = WaveGrid::new(3, 16).unwrap();
    let mut eng = FftEngine::new(grid);
    let mut rng = ChaCha12Rng::seed_from_u64(907);

    let u = SpectralField::random_divergence_free(grid, 3, 0.5, &mut rng);
    let p = pressure_recover(&u, &mut eng);
    let cutoff = make_cutoff(grid, CutoffKind::Bump, [3.0, 3.2, 2.9], 2.3, &mut eng).unwrap();
    let snaps = vec![Snapshot {
        u: u.clone(),
        z: SpectralField::zeros(grid),
        t: 0.0,
        step_count: 0,
        p: Some(p),
    }];

    let nh = [0.0, 1.0, 0.0];
    let dirs = DirectionSet::from_directions(vec![nh]).unwrap();
    let ells = [0.2, 0.4];
    let lgrid = SeparationGrid::from_values(ells.to_vec(), cutoff.separation_margin()).unwrap();
    let sf = structure_functions(&snaps, &cutoff, &lgrid, &dirs, 1.0).unwrap();

    // 36 points per axis integrate psi (modes to 8) times a cubic in u
    // (modes to 9) exactly: highest product mode 17 < 36 - 17.
    let m = 36usize;
    let cell = (turbkit::grid::TWO_PI / m as f64).powi(3);
    let psi = series_samples(grid, cutoff.spectral().coeffs(), m, [0.0; 3]);
    let u0: [Vec<f64>; 3] =
        std::array::from_fn(|j| series_samples(grid, u.comp(j), m, [0.0; 3]));

    for (j, &ell) in ells.iter().enumerate() {
        let h = [ell * nh[0], ell * nh[1], ell * nh[2]];
        let tu: [Vec<f64>; 3] = std::array::from_fn(|c| series_samples(grid, u.comp(c), m, h));
        let mut s0 = 0.0;
        let mut spar = 0.0;
        for x in 0..m * m * m {
            let dv = [tu[0][x] - u0[0][x], tu[1][x] - u0[1][x], tu[2][x] - u0[2][x]];
            let dn = dv[0] * nh[0] + dv[1] * nh[1] + dv[2] * nh[2];
            let d2 = dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2];
            s0 += psi[x] * d2 * dn;
            spar += psi[x] * dn * dn * dn;
        }
        s0 *= cell;
        spar *= cell;
        assert!(
            (sf.s0[j] - s0).abs() <= 1e-8 * s0.abs().max(1e-10),
            "s0({ell}): engine {:.15e} series {s0:.15e}",
            sf.s0[j]
        );
        assert!(
            (sf.spar[j] - spar).abs() <= 1e-8 * spar.abs().max(1e-10),
            "spar({ell}): engine {:.15e} series {spar:.15e}",
            sf.spar[j]
        );
    }
}
