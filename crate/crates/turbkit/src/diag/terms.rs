use crate::sphere::DirectionSet;

use super::bands::BandMaps;
use super::channels::SnapshotChannels;
use super::dots::{direction_terms, origin_sample, TermSample};

pub const TERM_COUNT: usize = 21;

impl TermSample {
    pub fn to_array(&self) -> [f64; TERM_COUNT] {
        [
            self.s0,
            self.spar,
            self.gamma,
            self.gamma_d,
            self.gamma_t,
            self.q_bar,
            self.q1_t,
            self.q2_t,
            self.q3_t,
            self.z_bar,
            self.z_t,
            self.g_bar,
            self.g_t,
            self.h_bar,
            self.h_t,
            self.p1_bar,
            self.p1_t,
            self.p2_bar,
            self.ball,
            self.f_bar,
            self.f_t,
        ]
    }

    pub fn from_array(a: [f64; TERM_COUNT]) -> Self {
        TermSample {
            s0: a[0],
            spar: a[1],
            gamma: a[2],
            gamma_d: a[3],
            gamma_t: a[4],
            q_bar: a[5],
            q1_t: a[6],
            q2_t: a[7],
            q3_t: a[8],
            z_bar: a[9],
            z_t: a[10],
            g_bar: a[11],
            g_t: a[12],
            h_bar: a[13],
            h_t: a[14],
            p1_bar: a[15],
            p1_t: a[16],
            p2_bar: a[17],
            ball: a[18],
            f_bar: a[19],
            f_t: a[20],
        }
    }
}

/// Shift-free integrals of one snapshot used by the energy-equality and
/// dissipation reports.
#[derive(Debug, Clone, Copy, Default)]
pub struct SnapshotScalars {
    pub psi_gradsq: f64,
    pub lee_lap: f64,
    pub lee_adv: f64,
    pub lee_pr: f64,
    pub lee_inj: f64,
}

/// Direction-averaged term values for one snapshot on the augmented grid
/// taus = [0, l_1, ..., l_L]. Row 0 holds the analytic zero-separation
/// values so the tau integrals need no extrapolation.
#[derive(Debug)]
pub struct TermProfiles {
    pub taus: Vec<f64>,
    pub rows: Vec<TermSample>,
    pub scalars: SnapshotScalars,
}

impl TermProfiles {
    pub fn series(&self, pick: impl Fn(&TermSample) -> f64) -> Vec<f64> {
        self.rows.iter().map(pick).collect()
    }
}

pub fn snapshot_profiles(
    ch: &SnapshotChannels,
    maps: &BandMaps,
    dirs: &DirectionSet,
    ells: &[f64],
) -> TermProfiles {
    let mut acc = vec![[0.0; TERM_COUNT]; ells.len()];
    for nh in dirs.dirs() {
        let samples = direction_terms(ch, maps, *nh, ells);
        for (a, s) in acc.iter_mut().zip(&samples) {
            let arr = s.to_array();
            for (dst, v) in a.iter_mut().zip(arr) {
                *dst += v;
            }
        }
    }
    let inv = 1.0 / dirs.len() as f64;
    let mut rows = Vec::with_capacity(ells.len() + 1);
    rows.push(origin_sample(ch, maps));
    for a in acc {
        rows.push(TermSample::from_array(std::array::from_fn(|i| a[i] * inv)));
    }
    let mut taus = Vec::with_capacity(ells.len() + 1);
    taus.push(0.0);
    taus.extend_from_slice(ells);
    let scalars = SnapshotScalars {
        psi_gradsq: ch.psi_gradsq,
        lee_lap: ch.lee_lap,
        lee_adv: ch.lee_adv,
        lee_pr: ch.lee_pr,
        lee_inj: ch.lee_inj,
    };
    TermProfiles { taus, rows, scalars }
}
