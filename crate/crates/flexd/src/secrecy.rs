//! SINRs, secrecy rates, and the network objective. Every optimizer and
//! baseline evaluates against this module, either directly or through the
//! tape program emitted by [`RelaxedSecrecyProgram`].
//!
//! Rates are natural-log (nats per channel use) throughout; divide by ln 2
//! for bits.

use std::sync::Arc;

use thiserror::Error;

use crate::autodiff::{NodeId, Tape, TapeError};
use crate::linalg::{herm_dot, solve_hpd, CMat};
use crate::sim::NetworkRealization;
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule length {found} does not match {expected} users")]
    WrongLength { expected: usize, found: usize },
    #[error("pair {pair} violates the one-transmitter-per-pair constraint")]
    PairConstraint { pair: usize },
    #[error("power {power} for user {user} outside [0, {pmax}]")]
    PowerOutOfRange { user: usize, power: f64, pmax: f64 },
    #[error("receiver {user} has nonzero power {power}")]
    ReceiverPower { user: usize, power: f64 },
    #[error("soft gate {gate} for user {user} outside [0, 1]")]
    GateOutOfRange { user: usize, gate: f64 },
}

/// Partner of a user under consecutive pairing: users `2k` and `2k+1` form
/// pair `k`. Panics when the index is out of range.
pub fn pair_partner(user: usize, n_users: usize) -> usize {
    assert!(
        user < n_users,
        "user index {user} out of range for {n_users} users"
    );
    user ^ 1
}

/// Binary transmit schedule: per-user direction bits and transmit powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    /// `true` where the user transmits in this resource block.
    pub tx: Vec<bool>,
    /// Transmit power in watts; zero on receivers.
    pub power_w: Vec<f64>,
}

impl Schedule {
    pub fn new(tx: Vec<bool>, power_w: Vec<f64>) -> Self {
        Schedule { tx, power_w }
    }

    pub fn n_users(&self) -> usize {
        self.tx.len()
    }

    pub fn validate(&self, real: &NetworkRealization) -> Result<(), ScheduleError> {
        let n = real.n_users();
        if self.tx.len() != n || self.power_w.len() != n {
            return Err(ScheduleError::WrongLength {
                expected: n,
                found: self.tx.len().max(self.power_w.len()),
            });
        }
        for pair in 0..real.n_pairs {
            let (a, b) = (2 * pair, 2 * pair + 1);
            if self.tx[a] == self.tx[b] {
                return Err(ScheduleError::PairConstraint { pair });
            }
        }
        for (user, &p) in self.power_w.iter().enumerate() {
            if !(0.0..=real.pmax_w).contains(&p) {
                return Err(ScheduleError::PowerOutOfRange {
                    user,
                    power: p,
                    pmax: real.pmax_w,
                });
            }
            if !self.tx[user] && p != 0.0 {
                return Err(ScheduleError::ReceiverPower { user, power: p });
            }
        }
        Ok(())
    }
}

/// Fractional schedule used inside differentiable evaluation: soft direction
/// gates in [0, 1] summing to one per pair, and per-user powers.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedSchedule {
    pub tx_soft: Vec<f64>,
    pub power_w: Vec<f64>,
}

impl RelaxedSchedule {
    pub fn validate(&self, real: &NetworkRealization) -> Result<(), ScheduleError> {
        let n = real.n_users();
        if self.tx_soft.len() != n || self.power_w.len() != n {
            return Err(ScheduleError::WrongLength {
                expected: n,
                found: self.tx_soft.len().max(self.power_w.len()),
            });
        }
        for (user, &t) in self.tx_soft.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) {
                return Err(ScheduleError::GateOutOfRange { user, gate: t });
            }
        }
        for pair in 0..real.n_pairs {
            let (a, b) = (2 * pair, 2 * pair + 1);
            if (self.tx_soft[a] + self.tx_soft[b] - 1.0).abs() > 1e-9 {
                return Err(ScheduleError::PairConstraint { pair });
            }
        }
        for (user, &p) in self.power_w.iter().enumerate() {
            if !(0.0..=real.pmax_w).contains(&p) {
                return Err(ScheduleError::PowerOutOfRange {
                    user,
                    power: p,
                    pmax: real.pmax_w,
                });
            }
        }
        Ok(())
    }
}

/// Anything that yields an effective transmit weight `t_i * p_i` per user.
pub trait TxWeights {
    fn tx_weight(&self, user: usize) -> f64;

    fn weights(&self, n_users: usize) -> Vec<f64> {
        (0..n_users).map(|u| self.tx_weight(u)).collect()
    }
}

impl TxWeights for Schedule {
    fn tx_weight(&self, user: usize) -> f64 {
        if self.tx[user] {
            self.power_w[user]
        } else {
            0.0
        }
    }
}

impl TxWeights for RelaxedSchedule {
    fn tx_weight(&self, user: usize) -> f64 {
        self.tx_soft[user] * self.power_w[user]
    }
}

pub(crate) fn flexd_sinr_w(real: &NetworkRealization, w: &[f64], receiver: usize) -> f64 {
    let n_users = real.n_users();
    let partner = receiver ^ 1;
    let num = w[partner] * real.h.get(receiver, partner).norm_sqr();
    let mut interference = 0.0;
    for (j, &wj) in w.iter().enumerate().take(n_users) {
        if j == receiver || j == partner || wj == 0.0 {
            continue;
        }
        interference += wj * real.h.get(receiver, j).norm_sqr();
    }
    num / (real.noise_w + interference)
}

pub(crate) fn eve_sinr_w(real: &NetworkRealization, w: &[f64], tx: usize) -> f64 {
    let wm = w[tx];
    if wm == 0.0 {
        return 0.0;
    }
    let partner = tx ^ 1;
    let k = real.n_eves;
    let mut gram = CMat::scaled_identity(k, real.noise_w);
    for (j, &wj) in w.iter().enumerate().take(real.n_users()) {
        if j == tx || j == partner || wj == 0.0 {
            continue;
        }
        gram.add_scaled_outer(wj, real.g.row(j));
    }
    let u = solve_hpd(&gram, real.g.row(tx))
        .expect("eavesdropper Gram matrix must be positive definite");
    wm * herm_dot(real.g.row(tx), &u).re
}

/// SINR at the receiving user of a pair (Schedule or RelaxedSchedule).
pub fn flexd_sinr(real: &NetworkRealization, s: &impl TxWeights, receiver: usize) -> f64 {
    let w = s.weights(real.n_users());
    flexd_sinr_w(real, &w, receiver)
}

/// SINR of user `tx`'s signal at the coordinated eavesdroppers, who combine
/// their K observations with an MMSE receiver. Computed through a Hermitian
/// positive-definite solve, never an explicit inverse.
pub fn eve_sinr(real: &NetworkRealization, s: &impl TxWeights, tx: usize) -> f64 {
    let w = s.weights(real.n_users());
    eve_sinr_w(real, &w, tx)
}

/// Secrecy rate of the link transmitting from `tx` to its partner, clamped
/// at zero, in nats.
pub fn secrecy_rate(real: &NetworkRealization, s: &impl TxWeights, tx: usize) -> f64 {
    let w = s.weights(real.n_users());
    let receiver = tx ^ 1;
    let rate = (flexd_sinr_w(real, &w, receiver)).ln_1p() - (eve_sinr_w(real, &w, tx)).ln_1p();
    rate.max(0.0)
}

/// Network objective: sum of clamped secrecy rates over all directed links.
/// Under a valid binary schedule exactly one direction per pair contributes.
pub fn sum_secrecy(real: &NetworkRealization, s: &impl TxWeights) -> f64 {
    let w = s.weights(real.n_users());
    sum_secrecy_w(real, &w)
}

pub(crate) fn sum_secrecy_w(real: &NetworkRealization, w: &[f64]) -> f64 {
    let mut total = 0.0;
    for receiver in 0..real.n_users() {
        let tx = receiver ^ 1;
        let term =
            flexd_sinr_w(real, w, receiver).ln_1p() - eve_sinr_w(real, w, tx).ln_1p();
        total += term.max(0.0);
    }
    total
}

/// Clamp-free variant of [`sum_secrecy`]: differentiable everywhere in the
/// interior, may be negative, equals the clamped sum whenever every active
/// link is clamp-inactive.
pub fn relaxed_sum_secrecy(real: &NetworkRealization, s: &impl TxWeights) -> f64 {
    let w = s.weights(real.n_users());
    relaxed_sum_secrecy_w(real, &w)
}

pub(crate) fn relaxed_sum_secrecy_w(real: &NetworkRealization, w: &[f64]) -> f64 {
    let mut total = 0.0;
    for receiver in 0..real.n_users() {
        let tx = receiver ^ 1;
        total +=
            flexd_sinr_w(real, w, receiver).ln_1p() - eve_sinr_w(real, w, tx).ln_1p();
    }
    total
}

/// Precomputed constants for emitting the relaxed sum secrecy rate onto a
/// tape as a function of the per-user transmit weight column `w`.
pub struct RelaxedSecrecyProgram {
    interference_gains: Tensor,
    desired_gains: Tensor,
    partner_perm: Arc<Vec<usize>>,
    eves: Arc<crate::autodiff::EveChannels>,
    noise_w: f64,
}

impl RelaxedSecrecyProgram {
    pub fn new(real: &NetworkRealization) -> Self {
        let n_users = real.n_users();
        let interference_gains = Tensor::from_fn(n_users, n_users, |n, j| {
            if j == n || j == (n ^ 1) {
                0.0
            } else {
                real.h.get(n, j).norm_sqr()
            }
        });
        let desired_gains =
            Tensor::from_fn(n_users, 1, |n, _| real.h.get(n, n ^ 1).norm_sqr());
        let partner_perm = Arc::new((0..n_users).map(|n| n ^ 1).collect());
        RelaxedSecrecyProgram {
            interference_gains,
            desired_gains,
            partner_perm,
            eves: real.eve_channels(),
            noise_w: real.noise_w,
        }
    }

    /// Emits the relaxed objective (nats, unnegated) onto the tape.
    pub fn emit(&self, tape: &mut Tape, w: NodeId) -> Result<NodeId, TapeError> {
        let gains = tape.constant(self.interference_gains.clone());
        let interference = tape.matmul(gains, w)?;
        let denom = tape.add_scalar(interference, self.noise_w);
        let w_partner = tape.gather_rows(w, self.partner_perm.clone())?;
        let desired = tape.constant(self.desired_gains.clone());
        let num = tape.mul(w_partner, desired)?;
        let gamma_f = tape.div(num, denom)?;
        let rate_f = tape.log1p(gamma_f);
        let q = tape.eve_quadform(w, self.eves.clone())?;
        let gamma_e = tape.mul(w, q)?;
        let rate_e = tape.log1p(gamma_e);
        let rate_e_at_receiver = tape.gather_rows(rate_e, self.partner_perm.clone())?;
        let per_link = tape.sub(rate_f, rate_e_at_receiver)?;
        Ok(tape.sum(per_link))
    }
}
