use num_complex::Complex64;

use crate::cutoff::CutoffField;
use crate::fft::FftEngine;
use crate::field::{ScalarField, SpectralField};

use super::bands::{BandMaps, BandMode, WideMode};

/// Symmetric pair order: (0,0),(1,1),(2,2),(0,1),(0,2),(1,2).
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

pub const PAIR_LUT: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];

/// Sorted triples with permutation multiplicities, indexing TRIPLE_LUT.
pub const TRIPLES: [([usize; 3], f64); 10] = [
    ([0, 0, 0], 1.0),
    ([0, 0, 1], 3.0),
    ([0, 0, 2], 3.0),
    ([0, 1, 1], 3.0),
    ([0, 1, 2], 6.0),
    ([0, 2, 2], 3.0),
    ([1, 1, 1], 1.0),
    ([1, 1, 2], 3.0),
    ([1, 2, 2], 3.0),
    ([2, 2, 2], 1.0),
];

pub const TRIPLE_LUT: [[[usize; 3]; 3]; 3] = [
    [[0, 1, 2], [1, 3, 4], [2, 4, 5]],
    [[1, 3, 4], [3, 6, 7], [4, 7, 8]],
    [[2, 4, 5], [4, 7, 8], [5, 8, 9]],
];

/// Every spectral factor a budget term needs, sampled once per snapshot.
///
/// Each two-point term is a cross-spectrum sum_k conj(A^)(k) B^(k) e^{i l k.n};
/// A is always a real product field, so its transform comes from the padded
/// grid (exact for support up to 3K), and B is either a simulation-band field
/// (sampled on `half`) or another product (sampled on `wide_half`). The
/// direction contractions all factor over these rank-one products, so only
/// the factors are stored; per-direction spectra are assembled in the dot
/// pass.
pub struct SnapshotChannels {
    // Simulation-band fields on the half list.
    pub uh: [Vec<Complex64>; 3],
    pub zh: [Vec<Complex64>; 3],
    pub ph: Vec<Complex64>,
    pub psih: Vec<Complex64>,
    // Padded-product factors on the half list.
    pub kpsiu: [Vec<Complex64>; 3],
    pub kg: Vec<Complex64>,
    pub ku2u: [Vec<Complex64>; 3],
    pub kpsiu2: Vec<Complex64>,
    pub kpsiuu: [Vec<Complex64>; 6],
    pub kuuu: [Vec<Complex64>; 10],
    pub kgdotu: [Vec<Complex64>; 3],
    pub kpsiz: [Vec<Complex64>; 3],
    pub klapu: [Vec<Complex64>; 3],
    pub kpdpsi: [Vec<Complex64>; 3],
    pub kdpsiu: [Vec<Complex64>; 9],
    // Direction-independent assembled spectra on the half list.
    pub tr_c: Vec<Complex64>,
    pub z_bar: Vec<Complex64>,
    pub g_bar: Vec<Complex64>,
    pub h_bar: Vec<Complex64>,
    pub p1_bar: Vec<Complex64>,
    pub p2_bar: Vec<Complex64>,
    pub ball: Vec<Complex64>,
    pub f1_bar: Vec<Complex64>,
    // Wide-band factors (two-field products on both sides).
    pub wpsiu: [Vec<Complex64>; 3],
    pub wg: Vec<Complex64>,
    pub wuu: [Vec<Complex64>; 6],
    pub wu2: Vec<Complex64>,
    pub wf2: Vec<Complex64>,
    // Shift-independent pieces.
    pub c6: [f64; 3],
    pub c3: [f64; 10],
    pub psi_gradsq: f64,
    // Zero-shift integrals for the local energy equality.
    pub lee_lap: f64,
    pub lee_adv: f64,
    pub lee_pr: f64,
    pub lee_inj: f64,
}

fn ifft_pad(eng: &mut FftEngine, work: &mut Vec<Complex64>, spec: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::new();
    eng.inverse_real(spec, work, &mut out);
    out
}

fn forward(eng: &mut FftEngine, vals: Vec<Complex64>) -> Vec<Complex64> {
    let mut buf = vals;
    eng.forward(&mut buf);
    buf
}

fn product2(a: &[f64], b: &[f64]) -> Vec<Complex64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x * y, 0.0))
        .collect()
}

fn product3(a: &[f64], b: &[f64], c: &[f64]) -> Vec<Complex64> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((&x, &y), &z)| Complex64::new(x * y * z, 0.0))
        .collect()
}

fn gather_half(spec: &[Complex64], modes: &[BandMode]) -> Vec<Complex64> {
    modes.iter().map(|m| spec[m.flat_pad]).collect()
}

fn gather_wide(spec: &[Complex64], modes: &[WideMode]) -> Vec<Complex64> {
    modes.iter().map(|m| spec[m.flat_pad]).collect()
}

fn gather_grid(spec: &[Complex64], modes: &[BandMode]) -> Vec<Complex64> {
    modes.iter().map(|m| spec[m.flat]).collect()
}

impl SnapshotChannels {
    pub fn compute(
        u: &SpectralField,
        z: &SpectralField,
        p: &ScalarField,
        cutoff: &CutoffField,
        maps: &BandMaps,
        eng_pad: &mut FftEngine,
    ) -> Self {
        let half = &maps.half;
        let wide = &maps.wide_half;
        let cell = maps.pad.cell_volume();
        let mut work: Vec<Complex64> = Vec::new();
        let psi_hat = cutoff.spectral().coeffs();
        let im = Complex64::new(0.0, 1.0);

        // Physical fields on the padded grid.
        let u_pad: Vec<Vec<f64>> = (0..3)
            .map(|j| ifft_pad(eng_pad, &mut work, &maps.pad_spectrum(u.comp(j))))
            .collect();
        let z_pad: Vec<Vec<f64>> = (0..3)
            .map(|j| ifft_pad(eng_pad, &mut work, &maps.pad_spectrum(z.comp(j))))
            .collect();
        let p_pad = ifft_pad(eng_pad, &mut work, &maps.pad_spectrum(p.coeffs()));
        let psi_pad = ifft_pad(eng_pad, &mut work, &maps.pad_spectrum(psi_hat));
        let dpsi_pad: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                let spec = maps.pad_spectrum_with(psi_hat, |k, v| im * k[a] as f64 * v);
                ifft_pad(eng_pad, &mut work, &spec)
            })
            .collect();
        let lap_psi_pad = {
            let spec = maps.pad_spectrum_with(psi_hat, |k, v| {
                let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                -k2 * v
            });
            ifft_pad(eng_pad, &mut work, &spec)
        };

        // psi-weighted squared gradient, one derivative field at a time.
        let mut psi_gradsq = 0.0;
        for j in 0..3 {
            for a in 0..3 {
                let spec = maps.pad_spectrum_with(u.comp(j), |k, v| im * k[a] as f64 * v);
                let du = ifft_pad(eng_pad, &mut work, &spec);
                psi_gradsq += du
                    .iter()
                    .zip(&psi_pad)
                    .map(|(&d, &ps)| ps * d * d)
                    .sum::<f64>();
            }
        }
        psi_gradsq *= cell;

        let npad = maps.pad.len();
        let mut gdot_pad = vec![0.0; npad];
        let mut u2_pad = vec![0.0; npad];
        for x in 0..npad {
            gdot_pad[x] = (0..3).map(|a| dpsi_pad[a][x] * u_pad[a][x]).sum();
            u2_pad[x] = (0..3).map(|j| u_pad[j][x] * u_pad[j][x]).sum();
        }

        let mut lee_lap = 0.0;
        let mut lee_adv = 0.0;
        let mut lee_pr = 0.0;
        let mut lee_inj = 0.0;
        for x in 0..npad {
            lee_lap += lap_psi_pad[x] * u2_pad[x];
            lee_adv += gdot_pad[x] * u2_pad[x];
            lee_pr += gdot_pad[x] * p_pad[x];
            lee_inj += psi_pad[x] * (0..3).map(|j| u_pad[j][x] * z_pad[j][x]).sum::<f64>();
        }
        lee_lap *= cell;
        lee_adv *= cell;
        lee_pr *= cell;
        lee_inj *= cell;

        let mut c6 = [0.0; 3];
        for j in 0..3 {
            c6[j] = cell
                * (0..npad)
                    .map(|x| psi_pad[x] * u2_pad[x] * u_pad[j][x])
                    .sum::<f64>();
        }
        let mut c3 = [0.0; 10];
        for (t, ([i, j, k], _)) in TRIPLES.iter().enumerate() {
            c3[t] = cell
                * (0..npad)
                    .map(|x| psi_pad[x] * u_pad[*i][x] * u_pad[*j][x] * u_pad[*k][x])
                    .sum::<f64>();
        }

        // Forward transforms of the product fields, gathered and dropped one
        // at a time to bound memory.
        let mut kpsiu: [Vec<Complex64>; 3] = Default::default();
        let mut wpsiu: [Vec<Complex64>; 3] = Default::default();
        for j in 0..3 {
            let s = forward(eng_pad, product2(&psi_pad, &u_pad[j]));
            kpsiu[j] = gather_half(&s, half);
            wpsiu[j] = gather_wide(&s, wide);
        }
        let (kg, wg) = {
            let s = forward(eng_pad, gdot_pad.iter().map(|&v| Complex64::new(v, 0.0)).collect());
            (gather_half(&s, half), gather_wide(&s, wide))
        };
        let mut wuu: [Vec<Complex64>; 6] = Default::default();
        for (pr, &(i, j)) in PAIRS.iter().enumerate() {
            let s = forward(eng_pad, product2(&u_pad[i], &u_pad[j]));
            wuu[pr] = gather_wide(&s, wide);
        }
        let wu2 = {
            let s = forward(eng_pad, u2_pad.iter().map(|&v| Complex64::new(v, 0.0)).collect());
            gather_wide(&s, wide)
        };
        let mut ku2u: [Vec<Complex64>; 3] = Default::default();
        for j in 0..3 {
            let s = forward(eng_pad, product2(&u2_pad, &u_pad[j]));
            ku2u[j] = gather_half(&s, half);
        }
        let kpsiu2 = gather_half(&forward(eng_pad, product2(&psi_pad, &u2_pad)), half);
        let mut kpsiuu: [Vec<Complex64>; 6] = Default::default();
        for (pr, &(i, j)) in PAIRS.iter().enumerate() {
            let s = forward(eng_pad, product3(&psi_pad, &u_pad[i], &u_pad[j]));
            kpsiuu[pr] = gather_half(&s, half);
        }
        let mut kuuu: [Vec<Complex64>; 10] = Default::default();
        for (t, ([i, j, k], _)) in TRIPLES.iter().enumerate() {
            let s = forward(eng_pad, product3(&u_pad[*i], &u_pad[*j], &u_pad[*k]));
            kuuu[t] = gather_half(&s, half);
        }
        let mut kgdotu: [Vec<Complex64>; 3] = Default::default();
        for i in 0..3 {
            let s = forward(eng_pad, product2(&gdot_pad, &u_pad[i]));
            kgdotu[i] = gather_half(&s, half);
        }
        let mut kpsiz: [Vec<Complex64>; 3] = Default::default();
        for j in 0..3 {
            let s = forward(eng_pad, product2(&psi_pad, &z_pad[j]));
            kpsiz[j] = gather_half(&s, half);
        }
        let mut klapu: [Vec<Complex64>; 3] = Default::default();
        for i in 0..3 {
            let s = forward(eng_pad, product2(&lap_psi_pad, &u_pad[i]));
            klapu[i] = gather_half(&s, half);
        }
        let mut kpdpsi: [Vec<Complex64>; 3] = Default::default();
        for a in 0..3 {
            let s = forward(eng_pad, product2(&p_pad, &dpsi_pad[a]));
            kpdpsi[a] = gather_half(&s, half);
        }
        let mut kdpsiu: [Vec<Complex64>; 9] = Default::default();
        for a in 0..3 {
            for i in 0..3 {
                let s = forward(eng_pad, product2(&dpsi_pad[a], &u_pad[i]));
                kdpsiu[a * 3 + i] = gather_half(&s, half);
            }
        }

        // Simulation-band fields sampled on the half list.
        let uh: [Vec<Complex64>; 3] =
            std::array::from_fn(|j| gather_grid(u.comp(j), half));
        let zh: [Vec<Complex64>; 3] =
            std::array::from_fn(|j| gather_grid(z.comp(j), half));
        let ph = gather_grid(p.coeffs(), half);
        let psih = gather_grid(psi_hat, half);

        // Direction-independent spectra.
        let h = half.len();
        let mut tr_c = vec![Complex64::default(); h];
        let mut z_bar = vec![Complex64::default(); h];
        let mut g_bar = vec![Complex64::default(); h];
        let mut h_bar = vec![Complex64::default(); h];
        let mut p1_bar = vec![Complex64::default(); h];
        let mut p2_bar = vec![Complex64::default(); h];
        let mut ball = vec![Complex64::default(); h];
        let mut f1_bar = vec![Complex64::default(); h];
        for idx in 0..h {
            let k = half[idx].k;
            for i in 0..3 {
                tr_c[idx] += kpsiu[i][idx].conj() * uh[i][idx];
                z_bar[idx] +=
                    kpsiz[i][idx].conj() * uh[i][idx] + kpsiu[i][idx].conj() * zh[i][idx];
                g_bar[idx] += klapu[i][idx].conj() * uh[i][idx];
                h_bar[idx] += kgdotu[i][idx].conj() * uh[i][idx];
                p1_bar[idx] += kpdpsi[i][idx].conj() * uh[i][idx];
                p2_bar[idx] += kpsiu[i][idx].conj() * (im * k[i] as f64 * ph[idx]);
                f1_bar[idx] += (im * k[i] as f64 * psih[idx]).conj() * ku2u[i][idx];
            }
            ball[idx] = kg[idx].conj() * ph[idx];
        }
        let wf2: Vec<Complex64> = wg
            .iter()
            .zip(&wu2)
            .map(|(g, s)| g.conj() * s)
            .collect();

        SnapshotChannels {
            uh,
            zh,
            ph,
            psih,
            kpsiu,
            kg,
            ku2u,
            kpsiu2,
            kpsiuu,
            kuuu,
            kgdotu,
            kpsiz,
            klapu,
            kpdpsi,
            kdpsiu,
            tr_c,
            z_bar,
            g_bar,
            h_bar,
            p1_bar,
            p2_bar,
            ball,
            f1_bar,
            wpsiu,
            wg,
            wuu,
            wu2,
            wf2,
            c6,
            c3,
            psi_gradsq,
            lee_lap,
            lee_adv,
            lee_pr,
            lee_inj,
        }
    }
}
