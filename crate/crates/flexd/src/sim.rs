//! Network realization generator: placement, pairing, fading, path loss,
//! shadowing, and the binary/CSV serialization of drawn networks.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::EveChannels;
use crate::linalg::{C64, CMat};
use crate::tensor::Tensor;

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("cannot place {requested} points with {separation_m} m separation in a {side_m} m square (capacity ~{capacity})")]
    PlacementInfeasible {
        requested: usize,
        separation_m: f64,
        side_m: f64,
        capacity: usize,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt realization file: {0}")]
    Corrupt(String),
    #[error("realization file version {found} unsupported (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },
}

/// Simulation parameters for one network draw.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub area_side_m: f64,
    pub n_pairs: usize,
    pub n_eves: usize,
    pub carrier_hz: f64,
    pub shadowing_db: f64,
    pub pmax_dbm: f64,
    pub noise_dbm: f64,
    pub min_separation_m: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            area_side_m: 1000.0,
            n_pairs: 2,
            n_eves: 2,
            carrier_hz: 1e9,
            shadowing_db: 8.0,
            pmax_dbm: 30.0,
            noise_dbm: -100.0,
            min_separation_m: 10.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.area_side_m > 0.0) {
            return Err(SimError::InvalidConfig("area_side_m must be positive".into()));
        }
        if self.n_pairs < 1 {
            return Err(SimError::InvalidConfig("n_pairs must be at least 1".into()));
        }
        if self.n_eves < 1 {
            return Err(SimError::InvalidConfig("n_eves must be at least 1".into()));
        }
        if !(self.min_separation_m >= 0.0) {
            return Err(SimError::InvalidConfig("min_separation_m must be >= 0".into()));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(SimError::InvalidConfig("carrier_hz must be positive".into()));
        }
        if !(self.shadowing_db >= 0.0) {
            return Err(SimError::InvalidConfig("shadowing_db must be >= 0".into()));
        }
        let pmax = dbm_to_watts(self.pmax_dbm);
        let noise = dbm_to_watts(self.noise_dbm);
        if !(pmax > 0.0 && pmax.is_finite()) || !(noise > 0.0 && noise.is_finite()) {
            return Err(SimError::InvalidConfig(
                "pmax_dbm/noise_dbm must convert to positive watts".into(),
            ));
        }
        Ok(())
    }

    pub fn n_users(&self) -> usize {
        2 * self.n_pairs
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Free-space path loss `(lambda / 4 pi d)^2` as a linear power gain.
pub fn path_loss_linear(d_m: f64, carrier_hz: f64) -> f64 {
    assert!(d_m > 0.0, "path loss domain error: distance {d_m} <= 0");
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    let x = lambda / (4.0 * std::f64::consts::PI * d_m);
    x * x
}

/// Channel coefficient assembled from its parts: free-space gain, a dB
/// shadowing excursion, and a unit fading coefficient.
pub fn channel_from_parts(d_m: f64, carrier_hz: f64, shadow_db: f64, fading: C64) -> C64 {
    let amp = (path_loss_linear(d_m, carrier_hz) * 10f64.powf(shadow_db / 10.0)).sqrt();
    fading * amp
}

/// Draws one Rayleigh-faded, log-normally shadowed channel coefficient.
pub fn draw_channel(d_m: f64, cfg: &SimConfig, rng: &mut impl Rng) -> C64 {
    let shadow_db: f64 = if cfg.shadowing_db > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        z * cfg.shadowing_db
    } else {
        0.0
    };
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    // Circularly-symmetric complex normal with E|z|^2 = 1.
    let fading = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
    channel_from_parts(d_m, cfg.carrier_hz, shadow_db, fading)
}

fn packing_capacity(side: f64, sep: f64) -> usize {
    // Hexagonal bound on points at pairwise distance >= sep in a square.
    (1.1547 * ((side / sep) + 1.0).powi(2)).floor() as usize
}

/// Draws `count` points uniformly in the square with pairwise separation at
/// least `sep`, by dart throwing over a neighbor grid.
pub fn sample_separated_points(
    count: usize,
    side: f64,
    sep: f64,
    rng: &mut impl Rng,
) -> Result<Vec<[f64; 2]>, SimError> {
    if sep <= 0.0 {
        return Ok((0..count)
            .map(|_| [rng.gen_range(0.0..=side), rng.gen_range(0.0..=side)])
            .collect());
    }
    let capacity = packing_capacity(side, sep);
    if count > capacity {
        return Err(SimError::PlacementInfeasible {
            requested: count,
            separation_m: sep,
            side_m: side,
            capacity,
        });
    }
    let cell = sep / std::f64::consts::SQRT_2;
    let grid_n = (side / cell).ceil() as usize + 1;
    let mut grid: Vec<Option<usize>> = vec![None; grid_n * grid_n];
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(count);
    let sep2 = sep * sep;
    let max_attempts_per_point = 5000usize;

    'outer: while points.len() < count {
        for _ in 0..max_attempts_per_point {
            let p = [rng.gen_range(0.0..=side), rng.gen_range(0.0..=side)];
            let (cx, cy) = ((p[0] / cell) as usize, (p[1] / cell) as usize);
            let x_lo = cx.saturating_sub(2);
            let y_lo = cy.saturating_sub(2);
            let x_hi = (cx + 2).min(grid_n - 1);
            let y_hi = (cy + 2).min(grid_n - 1);
            let mut ok = true;
            'scan: for gx in x_lo..=x_hi {
                for gy in y_lo..=y_hi {
                    if let Some(i) = grid[gx * grid_n + gy] {
                        let q = points[i];
                        let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                        if dx * dx + dy * dy < sep2 {
                            ok = false;
                            break 'scan;
                        }
                    }
                }
            }
            if ok {
                grid[cx * grid_n + cy] = Some(points.len());
                points.push(p);
                continue 'outer;
            }
        }
        return Err(SimError::PlacementInfeasible {
            requested: count,
            separation_m: sep,
            side_m: side,
            capacity,
        });
    }
    Ok(points)
}

/// User and eavesdropper positions with separation enforced across the union.
pub fn sample_positions(
    cfg: &SimConfig,
    rng: &mut impl Rng,
) -> Result<(Vec<[f64; 2]>, Vec<[f64; 2]>), SimError> {
    cfg.validate()?;
    let total = cfg.n_users() + cfg.n_eves;
    let mut all = sample_separated_points(total, cfg.area_side_m, cfg.min_separation_m, rng)?;
    let eves = all.split_off(cfg.n_users());
    Ok((all, eves))
}

/// Uniformly random perfect matching, returned as a permutation of the user
/// indices: consecutive entries form the pairs.
pub fn pair_users(n_users: usize, rng: &mut impl Rng) -> Vec<usize> {
    assert!(n_users % 2 == 0, "pairing requires an even user count");
    let mut perm: Vec<usize> = (0..n_users).collect();
    perm.shuffle(rng);
    perm
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// One drawn network. Users `2k` and `2k+1` form pair `k`. `h` holds the
/// user-to-user channels with `h[n][m]` the coefficient from user `m` to
/// user `n` (zero diagonal, non-reciprocal); `g[m][e]` is the channel from
/// user `m` to eavesdropper `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkRealization {
    pub n_pairs: usize,
    pub n_eves: usize,
    pub user_xy: Vec<[f64; 2]>,
    pub eve_xy: Vec<[f64; 2]>,
    pub h: CMat,
    pub g: CMat,
    /// User-to-eavesdropper distances in meters, 2N x K.
    pub d: Tensor,
    pub noise_w: f64,
    pub pmax_w: f64,
}

impl NetworkRealization {
    pub fn n_users(&self) -> usize {
        2 * self.n_pairs
    }

    /// Partner user of the same pair.
    pub fn partner(&self, user: usize) -> usize {
        assert!(user < self.n_users(), "user index {user} out of range");
        user ^ 1
    }

    /// Channel data consumed by the differentiable eavesdropper SINR op.
    pub fn eve_channels(&self) -> Arc<EveChannels> {
        Arc::new(EveChannels {
            gains: self.g.clone(),
            noise_w: self.noise_w,
        })
    }
}

/// Draws a full realization. Deterministic in `cfg` including the seed.
pub fn generate(cfg: &SimConfig) -> Result<NetworkRealization, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (raw_user_xy, eve_xy) = sample_positions(cfg, &mut rng)?;
    let perm = pair_users(cfg.n_users(), &mut rng);
    let user_xy: Vec<[f64; 2]> = perm.iter().map(|&i| raw_user_xy[i]).collect();

    let n_users = cfg.n_users();
    let mut h = CMat::zeros(n_users, n_users);
    for n in 0..n_users {
        for m in 0..n_users {
            if n == m {
                continue;
            }
            let d_nm = dist(user_xy[n], user_xy[m]);
            h.set(n, m, draw_channel(d_nm, cfg, &mut rng));
        }
    }
    let mut g = CMat::zeros(n_users, cfg.n_eves);
    let mut d = Tensor::zeros(n_users, cfg.n_eves);
    for m in 0..n_users {
        for e in 0..cfg.n_eves {
            let d_me = dist(user_xy[m], eve_xy[e]);
            d.set(m, e, d_me);
            g.set(m, e, draw_channel(d_me, cfg, &mut rng));
        }
    }
    Ok(NetworkRealization {
        n_pairs: cfg.n_pairs,
        n_eves: cfg.n_eves,
        user_xy,
        eve_xy,
        h,
        g,
        d,
        noise_w: dbm_to_watts(cfg.noise_dbm),
        pmax_w: dbm_to_watts(cfg.pmax_dbm),
    })
}

const REALIZATION_MAGIC: &[u8; 4] = b"FXNR";
const REALIZATION_VERSION: u16 = 1;

impl NetworkRealization {
    /// Binary record: magic, version, dims, then little-endian f64 payloads
    /// in row-major order (complex matrices interleave re/im).
    pub fn write_binary(&self, w: &mut impl Write) -> Result<(), SimError> {
        w.write_all(REALIZATION_MAGIC)?;
        w.write_all(&REALIZATION_VERSION.to_le_bytes())?;
        w.write_all(&(self.n_pairs as u32).to_le_bytes())?;
        w.write_all(&(self.n_eves as u32).to_le_bytes())?;
        let mut put = |v: f64| w.write_all(&v.to_le_bytes());
        for p in &self.user_xy {
            put(p[0])?;
            put(p[1])?;
        }
        for p in &self.eve_xy {
            put(p[0])?;
            put(p[1])?;
        }
        for v in self.h.as_slice() {
            put(v.re)?;
            put(v.im)?;
        }
        for v in self.g.as_slice() {
            put(v.re)?;
            put(v.im)?;
        }
        for &v in self.d.as_slice() {
            put(v)?;
        }
        put(self.noise_w)?;
        put(self.pmax_w)?;
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self, SimError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| SimError::Corrupt("missing header".into()))?;
        if &magic != REALIZATION_MAGIC {
            return Err(SimError::Corrupt("bad magic".into()));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)
            .map_err(|_| SimError::Corrupt("truncated version".into()))?;
        let version = u16::from_le_bytes(b2);
        if version != REALIZATION_VERSION {
            return Err(SimError::VersionMismatch {
                found: version,
                expected: REALIZATION_VERSION,
            });
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)
            .map_err(|_| SimError::Corrupt("truncated dims".into()))?;
        let n_pairs = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)
            .map_err(|_| SimError::Corrupt("truncated dims".into()))?;
        let n_eves = u32::from_le_bytes(b4) as usize;
        if n_pairs == 0 || n_eves == 0 || n_pairs > 1 << 20 || n_eves > 1 << 20 {
            return Err(SimError::Corrupt("implausible dimensions".into()));
        }
        let n_users = 2 * n_pairs;
        let mut get = || -> Result<f64, SimError> {
            let mut b8 = [0u8; 8];
            r.read_exact(&mut b8)
                .map_err(|_| SimError::Corrupt("truncated payload".into()))?;
            Ok(f64::from_le_bytes(b8))
        };
        let mut user_xy = Vec::with_capacity(n_users);
        for _ in 0..n_users {
            user_xy.push([get()?, get()?]);
        }
        let mut eve_xy = Vec::with_capacity(n_eves);
        for _ in 0..n_eves {
            eve_xy.push([get()?, get()?]);
        }
        let mut h = CMat::zeros(n_users, n_users);
        for v in h.as_mut_slice() {
            *v = C64::new(get()?, get()?);
        }
        let mut g = CMat::zeros(n_users, n_eves);
        for v in g.as_mut_slice() {
            *v = C64::new(get()?, get()?);
        }
        let mut d = Tensor::zeros(n_users, n_eves);
        for v in d.as_mut_slice() {
            *v = get()?;
        }
        let noise_w = get()?;
        let pmax_w = get()?;
        Ok(NetworkRealization {
            n_pairs,
            n_eves,
            user_xy,
            eve_xy,
            h,
            g,
            d,
            noise_w,
            pmax_w,
        })
    }

    /// Flat CSV dump for inspection: one row per scalar entry.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<(), SimError> {
        writeln!(w, "kind,i,j,re,im")?;
        for (i, p) in self.user_xy.iter().enumerate() {
            writeln!(w, "user_xy,{i},0,{},{}", p[0], p[1])?;
        }
        for (i, p) in self.eve_xy.iter().enumerate() {
            writeln!(w, "eve_xy,{i},0,{},{}", p[0], p[1])?;
        }
        for n in 0..self.n_users() {
            for m in 0..self.n_users() {
                let v = self.h.get(n, m);
                writeln!(w, "h,{n},{m},{},{}", v.re, v.im)?;
            }
        }
        for m in 0..self.n_users() {
            for e in 0..self.n_eves {
                let v = self.g.get(m, e);
                writeln!(w, "g,{m},{e},{},{}", v.re, v.im)?;
            }
        }
        for m in 0..self.n_users() {
            for e in 0..self.n_eves {
                writeln!(w, "d,{m},{e},{},0", self.d.get(m, e))?;
            }
        }
        writeln!(w, "noise_w,0,0,{},0", self.noise_w)?;
        writeln!(w, "pmax_w,0,0,{},0", self.pmax_w)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_respect_separation_and_bounds() {
        let cfg = SimConfig {
            n_pairs: 2,
            n_eves: 2,
            seed: 7,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (users, eves) = sample_positions(&cfg, &mut rng).unwrap();
        assert_eq!(users.len(), 4);
        assert_eq!(eves.len(), 2);
        let all: Vec<[f64; 2]> = users.iter().chain(eves.iter()).copied().collect();
        for p in &all {
            assert!(p[0] >= 0.0 && p[0] <= 1000.0);
            assert!(p[1] >= 0.0 && p[1] <= 1000.0);
        }
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                assert!(dist(all[i], all[j]) >= 10.0);
            }
        }
    }

    #[test]
    fn zero_separation_is_plain_uniform() {
        let cfg = SimConfig {
            min_separation_m: 0.0,
            n_pairs: 3,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (users, eves) = sample_positions(&cfg, &mut rng).unwrap();
        assert_eq!(users.len(), 6);
        assert_eq!(eves.len(), 2);
    }

    #[test]
    fn overpacked_area_is_infeasible() {
        // ~(side/sep)^2 is the packing ceiling; 100_001 points cannot fit.
        let cfg = SimConfig {
            n_pairs: 50_000,
            n_eves: 1,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match sample_positions(&cfg, &mut rng) {
            Err(SimError::PlacementInfeasible { .. }) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn two_users_have_single_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let perm = pair_users(2, &mut rng);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1]);
    }

    #[test]
    fn pairing_reproducible_across_runs() {
        let a = pair_users(4, &mut ChaCha8Rng::seed_from_u64(5));
        let b = pair_users(4, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    /// Chi-square style check: with 4 users the 3 matchings should each show
    /// up about 1000 times over 3000 seeds.
    #[test]
    fn pairing_uniform_over_matchings() {
        let mut counts = [0usize; 3];
        for seed in 0..3000u64 {
            let perm = pair_users(4, &mut ChaCha8Rng::seed_from_u64(seed));
            // Identify the matching by the partner of user 0.
            let pos0 = perm.iter().position(|&u| u == 0).unwrap();
            let partner = perm[pos0 ^ 1];
            counts[partner - 1] += 1;
        }
        for &c in &counts {
            assert!((900..=1100).contains(&c), "matching counts {counts:?}");
        }
    }

    #[test]
    fn free_space_path_loss_reference_values() {
        let pl_1m = path_loss_linear(1.0, 1e9);
        let db_1m = 10.0 * pl_1m.log10();
        assert!((db_1m + 32.4478).abs() < 0.01, "got {db_1m} dB");
        assert!((pl_1m - 5.70e-4).abs() < 5e-6);

        let pl_1km = path_loss_linear(1000.0, 1e9);
        let db_1km = 10.0 * pl_1km.log10();
        assert!((db_1km + 92.4478).abs() < 0.01, "got {db_1km} dB");
    }

    #[test]
    fn doubling_distance_costs_six_db() {
        let d = 37.0;
        let a = path_loss_linear(d, 1e9);
        let b = path_loss_linear(2.0 * d, 1e9);
        let delta_db = 10.0 * (b / a).log10();
        assert!((delta_db + 20.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "domain error")]
    fn nonpositive_distance_is_domain_error() {
        let _ = path_loss_linear(0.0, 1e9);
    }

    #[test]
    fn deterministic_fading_limb() {
        // No shadowing, unit fading: |h| = sqrt(path loss) exactly.
        let h = channel_from_parts(100.0, 1e9, 0.0, C64::new(1.0, 0.0));
        assert_eq!(h.im, 0.0);
        assert!((h.re - path_loss_linear(100.0, 1e9).sqrt()).abs() < 1e-18);
    }

    #[test]
    fn unit_rayleigh_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            acc += z.norm_sqr();
        }
        let mean = acc / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |z|^2 = {mean}");
    }

    #[test]
    fn shadowing_standard_deviation_is_eight_db() {
        let cfg = SimConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let shadow_db = z * cfg.shadowing_db;
            sum += shadow_db;
            sum2 += shadow_db * shadow_db;
        }
        let mean = sum / n as f64;
        let std = (sum2 / n as f64 - mean * mean).sqrt();
        assert!((std - 8.0).abs() < 0.2, "std = {std}");
    }

    /// Mean received power at fixed distance matches path loss times the
    /// log-normal mean within 5%.
    #[test]
    fn mean_received_power_matches_theory() {
        let cfg = SimConfig::default();
        let d = 200.0;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 200_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += draw_channel(d, &cfg, &mut rng).norm_sqr();
        }
        let mean = acc / n as f64;
        let sigma_ln = cfg.shadowing_db * std::f64::consts::LN_10 / 10.0;
        let expected = path_loss_linear(d, cfg.carrier_hz) * (0.5 * sigma_ln * sigma_ln).exp();
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean {mean:.3e} vs expected {expected:.3e}"
        );
    }

    #[test]
    fn generate_is_deterministic_and_shaped() {
        let cfg = SimConfig {
            n_pairs: 1,
            n_eves: 1,
            seed: 1,
            ..Default::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.h.rows(), 2);
        assert_eq!(a.h.cols(), 2);
        assert_eq!(a.g.rows(), 2);
        assert_eq!(a.g.cols(), 1);
        assert_eq!(a.d.shape(), (2, 1));
        assert_eq!(a.h.get(0, 0), C64::new(0.0, 0.0));
        assert_eq!(a.h.get(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn dbm_conversions() {
        let cfg = SimConfig::default();
        let r = generate(&cfg).unwrap();
        assert!((r.pmax_w - 1.0).abs() < 1e-12);
        assert!((r.noise_w - 1e-13).abs() < 1e-25);
    }

    #[test]
    fn channels_are_non_reciprocal_and_distances_consistent() {
        let cfg = SimConfig {
            n_pairs: 3,
            n_eves: 2,
            seed: 42,
            ..Default::default()
        };
        let r = generate(&cfg).unwrap();
        for n in 0..r.n_users() {
            for m in 0..r.n_users() {
                if n != m {
                    assert_ne!(r.h.get(n, m), r.h.get(m, n));
                }
            }
        }
        for m in 0..r.n_users() {
            for e in 0..r.n_eves {
                let geom = dist(r.user_xy[m], r.eve_xy[e]);
                assert_eq!(r.d.get(m, e), geom);
            }
        }
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        let cfg = SimConfig {
            n_pairs: 2,
            n_eves: 3,
            seed: 9,
            ..Default::default()
        };
        let r = generate(&cfg).unwrap();
        let mut buf = Vec::new();
        r.write_binary(&mut buf).unwrap();
        let back = NetworkRealization::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let cfg = SimConfig::default();
        let r = generate(&cfg).unwrap();
        let mut buf = Vec::new();
        r.write_binary(&mut buf).unwrap();
        buf.truncate(buf.len() / 2);
        match NetworkRealization::read_binary(&mut buf.as_slice()) {
            Err(SimError::Corrupt(_)) => {}
            other => panic!("expected corrupt, got {other:?}"),
        }
    }
}
