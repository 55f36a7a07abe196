use num_complex::Complex64;

use crate::grid::TWO_PI;

use super::bands::BandMaps;
use super::channels::{SnapshotChannels, PAIRS, PAIR_LUT, TRIPLES, TRIPLE_LUT};

/// Gauss-Legendre nodes and weights on [-1, 1], eight points.
pub const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
pub const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Every budget term at one (separation, direction) pair.
///
/// Barred entries are traces over vector indices, tilded entries carry the
/// longitudinal projections onto the separation direction. `ball` is the
/// radially integrated pressure correlation int_0^l r^2 g(r, n) dr.
#[derive(Debug, Clone, Copy, Default)]
pub struct TermSample {
    pub s0: f64,
    pub spar: f64,
    pub gamma: f64,
    pub gamma_d: f64,
    pub gamma_t: f64,
    pub q_bar: f64,
    pub q1_t: f64,
    pub q2_t: f64,
    pub q3_t: f64,
    pub z_bar: f64,
    pub z_t: f64,
    pub g_bar: f64,
    pub g_t: f64,
    pub h_bar: f64,
    pub h_t: f64,
    pub p1_bar: f64,
    pub p1_t: f64,
    pub p2_bar: f64,
    pub ball: f64,
    pub f_bar: f64,
    pub f_t: f64,
}

/// Direction-contracted spectra, conjugate-pair weights folded in, ready for
/// phase dots at any separation.
struct ContractedSpectra {
    // Simulation-band modes (one per conjugate pair).
    kn: Vec<f64>,
    c_gamma: Vec<Complex64>,
    c_gt: Vec<Complex64>,
    c_q2: Vec<Complex64>,
    c_qb: Vec<Complex64>,
    c_q1: Vec<Complex64>,
    c_q3: Vec<Complex64>,
    c_zb: Vec<Complex64>,
    c_zt: Vec<Complex64>,
    c_gb: Vec<Complex64>,
    c_glt: Vec<Complex64>,
    c_hb: Vec<Complex64>,
    c_ht: Vec<Complex64>,
    c_p1b: Vec<Complex64>,
    c_p1t: Vec<Complex64>,
    c_p2b: Vec<Complex64>,
    c_fb: Vec<Complex64>,
    c_ftk: Vec<Complex64>,
    c_s0k: Vec<Complex64>,
    c_spk: Vec<Complex64>,
    c_ball: Vec<Complex64>,
    // Product-band modes, |k|_inf up to twice the cutoff.
    wkn: Vec<f64>,
    c_ws0: Vec<Complex64>,
    c_wsp: Vec<Complex64>,
    c_wft: Vec<Complex64>,
    c_wfb: Vec<Complex64>,
    // Shift-independent pieces.
    c6n: f64,
    c3n: f64,
}

fn contract(ch: &SnapshotChannels, maps: &BandMaps, nh: [f64; 3]) -> ContractedSpectra {
    let h = maps.half.len();
    let wl = maps.wide_half.len();
    // n n and n n n contraction coefficients over symmetric storage.
    let mut cp = [0.0; 6];
    for (pr, &(i, j)) in PAIRS.iter().enumerate() {
        cp[pr] = if i == j { 1.0 } else { 2.0 } * nh[i] * nh[j];
    }
    let mut ct = [0.0; 10];
    for (t, ([i, j, k], mult)) in TRIPLES.iter().enumerate() {
        ct[t] = mult * nh[*i] * nh[*j] * nh[*k];
    }

    let mut out = ContractedSpectra {
        kn: vec![0.0; h],
        c_gamma: vec![Complex64::default(); h],
        c_gt: vec![Complex64::default(); h],
        c_q2: vec![Complex64::default(); h],
        c_qb: vec![Complex64::default(); h],
        c_q1: vec![Complex64::default(); h],
        c_q3: vec![Complex64::default(); h],
        c_zb: vec![Complex64::default(); h],
        c_zt: vec![Complex64::default(); h],
        c_gb: vec![Complex64::default(); h],
        c_glt: vec![Complex64::default(); h],
        c_hb: vec![Complex64::default(); h],
        c_ht: vec![Complex64::default(); h],
        c_p1b: vec![Complex64::default(); h],
        c_p1t: vec![Complex64::default(); h],
        c_p2b: vec![Complex64::default(); h],
        c_fb: vec![Complex64::default(); h],
        c_ftk: vec![Complex64::default(); h],
        c_s0k: vec![Complex64::default(); h],
        c_spk: vec![Complex64::default(); h],
        c_ball: vec![Complex64::default(); h],
        wkn: vec![0.0; wl],
        c_ws0: vec![Complex64::default(); wl],
        c_wsp: vec![Complex64::default(); wl],
        c_wft: vec![Complex64::default(); wl],
        c_wfb: vec![Complex64::default(); wl],
        c6n: (0..3).map(|j| nh[j] * ch.c6[j]).sum(),
        c3n: (0..10).map(|t| ct[t] * ch.c3[t]).sum(),
    };

    for (idx, m) in maps.half.iter().enumerate() {
        let w = m.weight;
        let k = m.k;
        out.kn[idx] = k[0] as f64 * nh[0] + k[1] as f64 * nh[1] + k[2] as f64 * nh[2];

        let un = (0..3).map(|j| nh[j] * ch.uh[j][idx]).sum::<Complex64>();
        let zn = (0..3).map(|j| nh[j] * ch.zh[j][idx]).sum::<Complex64>();
        let cpsin = (0..3).map(|j| nh[j] * ch.kpsiu[j][idx]).sum::<Complex64>();
        let psizn = (0..3).map(|j| nh[j] * ch.kpsiz[j][idx]).sum::<Complex64>();
        let lapn = (0..3).map(|j| nh[j] * ch.klapu[j][idx]).sum::<Complex64>();
        let gdotun = (0..3).map(|j| nh[j] * ch.kgdotu[j][idx]).sum::<Complex64>();
        let pdpsin = (0..3).map(|j| nh[j] * ch.kpdpsi[j][idx]).sum::<Complex64>();

        let d = std::array::from_fn::<Complex64, 3, _>(|i| {
            (0..3).map(|a| nh[a] * ch.kdpsiu[a * 3 + i][idx]).sum()
        });
        let dd = (0..3).map(|i| nh[i] * d[i]).sum::<Complex64>();
        let g = std::array::from_fn::<Complex64, 3, _>(|j| {
            (0..3).map(|i| nh[i] * ch.kdpsiu[j * 3 + i][idx]).sum()
        });
        let mvec = std::array::from_fn::<Complex64, 3, _>(|i| {
            (0..3)
                .map(|j| nh[j] * ch.kpsiuu[PAIR_LUT[i][j]][idx])
                .sum()
        });
        let psuun = (0..3).map(|i| nh[i] * mvec[i]).sum::<Complex64>();
        let nu2u = (0..3).map(|j| nh[j] * ch.ku2u[j][idx]).sum::<Complex64>();
        let u3n = (0..10)
            .map(|t| ct[t] * ch.kuuu[t][idx])
            .sum::<Complex64>();
        let mut ftk_inner = Complex64::default();
        for a in 0..3 {
            let ta = (0..6)
                .map(|pr| {
                    let (i, j) = PAIRS[pr];
                    cp[pr] * ch.kuuu[TRIPLE_LUT[i][j][a]][idx]
                })
                .sum::<Complex64>();
            ftk_inner += Complex64::new(0.0, -(k[a] as f64)) * ta;
        }

        out.c_gamma[idx] = w * ch.tr_c[idx];
        out.c_gt[idx] = w * cpsin.conj() * un;
        out.c_q2[idx] = w * ch.kg[idx].conj() * un;
        out.c_qb[idx] = w * (0..3).map(|i| d[i].conj() * ch.uh[i][idx]).sum::<Complex64>();
        out.c_q1[idx] = w * dd.conj() * un;
        out.c_q3[idx] = w * (0..3).map(|j| g[j].conj() * ch.uh[j][idx]).sum::<Complex64>();
        out.c_zb[idx] = w * ch.z_bar[idx];
        out.c_zt[idx] = w * (psizn.conj() * un + cpsin.conj() * zn);
        out.c_gb[idx] = w * ch.g_bar[idx];
        out.c_glt[idx] = w * lapn.conj() * un;
        out.c_hb[idx] = w * ch.h_bar[idx];
        out.c_ht[idx] = w * gdotun.conj() * un;
        out.c_p1b[idx] = w * ch.p1_bar[idx];
        out.c_p1t[idx] = w * pdpsin.conj() * un;
        out.c_p2b[idx] = w * ch.p2_bar[idx];
        out.c_fb[idx] = w * ch.f1_bar[idx];
        out.c_ftk[idx] = w * ch.psih[idx].conj() * ftk_inner;
        out.c_s0k[idx] = w
            * (ch.psih[idx].conj() * nu2u
                + 2.0
                    * (0..3)
                        .map(|i| mvec[i].conj() * ch.uh[i][idx])
                        .sum::<Complex64>()
                + ch.kpsiu2[idx].conj() * un);
        out.c_spk[idx] = w * (ch.psih[idx].conj() * u3n + 3.0 * psuun.conj() * un);
        out.c_ball[idx] = w * ch.ball[idx];
    }

    for (idx, m) in maps.wide_half.iter().enumerate() {
        let w = m.weight;
        let k = m.k;
        out.wkn[idx] = k[0] as f64 * nh[0] + k[1] as f64 * nh[1] + k[2] as f64 * nh[2];
        let wpn = (0..3).map(|j| nh[j] * ch.wpsiu[j][idx]).sum::<Complex64>();
        let wm = std::array::from_fn::<Complex64, 3, _>(|i| {
            (0..3).map(|j| nh[j] * ch.wuu[PAIR_LUT[i][j]][idx]).sum()
        });
        let wuun = (0..3).map(|i| nh[i] * wm[i]).sum::<Complex64>();
        out.c_ws0[idx] = w
            * (-wpn.conj() * ch.wu2[idx]
                - 2.0
                    * (0..3)
                        .map(|i| ch.wpsiu[i][idx].conj() * wm[i])
                        .sum::<Complex64>());
        out.c_wsp[idx] = -3.0 * w * wpn.conj() * wuun;
        out.c_wft[idx] = -w * ch.wg[idx].conj() * wuun;
        out.c_wfb[idx] = w * ch.wf2[idx];
    }

    out
}

/// Per-axis phase factors exp(i l n_a m) for m in -span..=span.
fn phase_tables(ell: f64, nh: [f64; 3], span: i64) -> [Vec<Complex64>; 3] {
    std::array::from_fn(|a| {
        (-span..=span)
            .map(|m| Complex64::cis(ell * nh[a] * m as f64))
            .collect()
    })
}

/// Sum of Re(X_k e^{i l k.n}) over the stored conjugate-pair modes.
///
/// The pair weight is already folded into the spectra, so this is the full
/// band sum; with a real total the imaginary parts cancel by symmetry.
fn dot_plain(
    values: &[Complex64],
    modes_k: &[[i64; 3]],
    tables: &[Vec<Complex64>; 3],
    span: i64,
) -> f64 {
    let mut acc = 0.0;
    for (v, k) in values.iter().zip(modes_k) {
        let ph = tables[0][(k[0] + span) as usize]
            * tables[1][(k[1] + span) as usize]
            * tables[2][(k[2] + span) as usize];
        acc += v.re * ph.re - v.im * ph.im;
    }
    acc
}

/// All terms at the given separations for one direction. The zero
/// separation is handled analytically elsewhere; `ells` must be positive.
pub fn direction_terms(
    ch: &SnapshotChannels,
    maps: &BandMaps,
    nh: [f64; 3],
    ells: &[f64],
) -> Vec<TermSample> {
    let sp = contract(ch, maps, nh);
    let vol = TWO_PI.powi(3);
    let kc = maps.cutoff;
    let span = 2 * kc;

    let half_k: Vec<[i64; 3]> = maps.half.iter().map(|m| m.k).collect();
    let wide_k: Vec<[i64; 3]> = maps.wide_half.iter().map(|m| m.k).collect();

    let mut out = Vec::with_capacity(ells.len());
    for &ell in ells {
        let tables = phase_tables(ell, nh, span);
        let mut s = TermSample::default();

        // Simulation-band dots, two of them phase-derivative weighted.
        let mut gamma = 0.0;
        let mut gamma_d = 0.0;
        let mut gamma_t = 0.0;
        let mut q2 = 0.0;
        let mut qb = 0.0;
        let mut q1 = 0.0;
        let mut q3 = 0.0;
        let mut zb = 0.0;
        let mut zt = 0.0;
        let mut gb = 0.0;
        let mut glt = 0.0;
        let mut hb = 0.0;
        let mut ht = 0.0;
        let mut p1b = 0.0;
        let mut p1t = 0.0;
        let mut p2b = 0.0;
        let mut fb = 0.0;
        let mut ftk = 0.0;
        let mut s0k = 0.0;
        let mut spk = 0.0;
        for idx in 0..half_k.len() {
            let k = half_k[idx];
            let ph = tables[0][(k[0] + span) as usize]
                * tables[1][(k[1] + span) as usize]
                * tables[2][(k[2] + span) as usize];
            let kn = sp.kn[idx];
            let g = sp.c_gamma[idx];
            gamma += g.re * ph.re - g.im * ph.im;
            gamma_d -= kn * (g.re * ph.im + g.im * ph.re);
            let gt = sp.c_gt[idx];
            gamma_t -= kn * (gt.re * ph.im + gt.im * ph.re);
            let re = |v: Complex64| v.re * ph.re - v.im * ph.im;
            q2 += re(sp.c_q2[idx]);
            qb += re(sp.c_qb[idx]);
            q1 += re(sp.c_q1[idx]);
            q3 += re(sp.c_q3[idx]);
            zb += re(sp.c_zb[idx]);
            zt += re(sp.c_zt[idx]);
            gb += re(sp.c_gb[idx]);
            glt += re(sp.c_glt[idx]);
            hb += re(sp.c_hb[idx]);
            ht += re(sp.c_ht[idx]);
            p1b += re(sp.c_p1b[idx]);
            p1t += re(sp.c_p1t[idx]);
            p2b += re(sp.c_p2b[idx]);
            fb += re(sp.c_fb[idx]);
            ftk += re(sp.c_ftk[idx]);
            s0k += re(sp.c_s0k[idx]);
            spk += re(sp.c_spk[idx]);
        }

        let ws0 = dot_plain(&sp.c_ws0, &wide_k, &tables, span);
        let wsp = dot_plain(&sp.c_wsp, &wide_k, &tables, span);
        let wft = dot_plain(&sp.c_wft, &wide_k, &tables, span);
        let wfb = dot_plain(&sp.c_wfb, &wide_k, &tables, span);

        // Pressure ball term: int_0^l r^2 g(r) dr by Gauss-Legendre.
        let mut ball = 0.0;
        for q in 0..8 {
            let r = 0.5 * ell * (GL8_X[q] + 1.0);
            let wq = 0.5 * ell * GL8_W[q];
            let tq = phase_tables(r, nh, kc);
            ball += wq * r * r * vol * dot_plain(&sp.c_ball, &half_k, &tq, kc);
        }

        s.s0 = vol * (s0k + ws0) - sp.c6n;
        s.spar = vol * (spk + wsp) - sp.c3n;
        s.gamma = vol * gamma;
        s.gamma_d = vol * gamma_d;
        s.gamma_t = vol * gamma_t;
        s.q_bar = vol * qb;
        s.q1_t = vol * q1;
        s.q2_t = vol * q2;
        s.q3_t = vol * q3;
        s.z_bar = vol * zb;
        s.z_t = vol * zt;
        s.g_bar = vol * gb;
        s.g_t = vol * glt;
        s.h_bar = vol * hb;
        s.h_t = vol * ht;
        s.p1_bar = vol * p1b;
        s.p1_t = vol * p1t;
        s.p2_bar = vol * p2b;
        s.ball = ball;
        s.f_bar = vol * (fb - wfb);
        s.f_t = vol * (ftk + wft);
        out.push(s);
    }
    out
}

/// Shift-free values that seed the tau integrals at zero separation.
///
/// Tilded terms are exact solid-angle moments of their barred partners at
/// l = 0 (averaging n n over the sphere gives I/3), the direction-odd terms
/// vanish, and both endpoint transports reduce to int p (u.grad psi).
pub fn origin_sample(ch: &SnapshotChannels, maps: &BandMaps) -> TermSample {
    let vol = TWO_PI.powi(3);
    let sum = |v: &[Complex64]| vol * super::bands::hermitian_sum(v, &maps.half);
    let gamma = sum(&ch.tr_c);
    let z_bar = sum(&ch.z_bar);
    let g_bar = sum(&ch.g_bar);
    let h_bar = sum(&ch.h_bar);
    let p1_bar = sum(&ch.p1_bar);
    let p2_bar = sum(&ch.p2_bar);
    TermSample {
        s0: 0.0,
        spar: 0.0,
        gamma,
        gamma_d: 0.0,
        gamma_t: 0.0,
        q_bar: 0.0,
        q1_t: 0.0,
        q2_t: 0.0,
        q3_t: 0.0,
        z_bar,
        z_t: z_bar / 3.0,
        g_bar,
        g_t: g_bar / 3.0,
        h_bar,
        h_t: h_bar / 3.0,
        p1_bar,
        p1_t: p1_bar / 3.0,
        p2_bar,
        ball: 0.0,
        f_bar: 0.0,
        f_t: 0.0,
    }
}
