//! Link budget, Shannon rate with per-group interference scaling, and slot demand.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// PHY parameters. All fields are SI except the dB-valued gains and noise PSD,
/// which are converted on use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<S> {
    pub bandwidth_hz: S,
    pub tx_power_w: S,
    pub tx_gain_dbi: S,
    pub rx_gain_dbi: S,
    pub noise_psd_dbm_per_mhz: S,
    /// Interference PSD contributed per active flow in a group.
    pub interference_psd_w_per_hz: S,
    pub pathloss_exponent: S,
    pub carrier_hz: S,
    pub slot_duration_s: S,
    pub payload_bits: S,
}

/// Interference PSD per active flow relative to the noise PSD.
pub const DEFAULT_INTERFERENCE_TO_NOISE: f64 = 0.1;

impl<S: Scalar> Default for ChannelParams<S> {
    /// 7 GHz bandwidth, 0.1 mW, 12 dBi antennas, −134 dBm/MHz noise, 60 GHz carrier,
    /// 10 µs slots, 10 Mbit payloads, n = 2 and interference PSD a tenth of the noise PSD.
    fn default() -> Self {
        let mut params = ChannelParams {
            bandwidth_hz: S::lit(7.0e9),
            tx_power_w: S::lit(1.0e-4),
            tx_gain_dbi: S::lit(12.0),
            rx_gain_dbi: S::lit(12.0),
            noise_psd_dbm_per_mhz: S::lit(-134.0),
            interference_psd_w_per_hz: S::zero(),
            pathloss_exponent: S::lit(2.0),
            carrier_hz: S::lit(60.0e9),
            slot_duration_s: S::lit(10.0e-6),
            payload_bits: S::lit(1.0e7),
        };
        params.interference_psd_w_per_hz = params.noise_psd_w_per_hz() * S::lit(DEFAULT_INTERFERENCE_TO_NOISE);
        params
    }
}

impl<S: Scalar> ChannelParams<S> {
    pub fn with_pathloss(mut self, n: S) -> Self {
        self.pathloss_exponent = n;
        self
    }

    /// Same parameters with the interference term removed.
    pub fn without_interference(mut self) -> Self {
        self.interference_psd_w_per_hz = S::zero();
        self
    }

    pub fn wavelength_m(&self) -> S {
        S::lit(SPEED_OF_LIGHT_M_PER_S) / self.carrier_hz
    }

    pub fn noise_psd_w_per_hz(&self) -> S {
        dbm_per_mhz_to_w_per_hz(self.noise_psd_dbm_per_mhz)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bandwidth-hz", self.bandwidth_hz),
            ("tx-power-w", self.tx_power_w),
            ("carrier-hz", self.carrier_hz),
            ("slot-duration-s", self.slot_duration_s),
            ("payload-bits", self.payload_bits),
        ];
        for (key, v) in positive {
            if !(v > S::zero() && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.pathloss_exponent >= S::one() && self.pathloss_exponent.is_finite()) {
            return Err(Error::config(
                "pathloss",
                format!("must be >= 1, got {}", self.pathloss_exponent),
            ));
        }
        if !(self.interference_psd_w_per_hz >= S::zero() && self.interference_psd_w_per_hz.is_finite()) {
            return Err(Error::config("interference-psd-w-per-hz", "must be >= 0"));
        }
        for (key, v) in [
            ("tx-gain-dbi", self.tx_gain_dbi),
            ("rx-gain-dbi", self.rx_gain_dbi),
            ("noise-dbm-per-mhz", self.noise_psd_dbm_per_mhz),
        ] {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        Ok(())
    }
}

pub fn db_to_linear<S: Scalar>(db: S) -> S {
    S::lit(10.0).powf(db / S::lit(10.0))
}

/// dBm/MHz → W/Hz.
pub fn dbm_per_mhz_to_w_per_hz<S: Scalar>(dbm_per_mhz: S) -> S {
    db_to_linear(dbm_per_mhz) * S::lit(1.0e-3) / S::lit(1.0e6)
}

/// Achievable rate of a link, bits per second.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LinkRate<S>(pub S);

impl<S: Scalar> LinkRate<S> {
    pub fn bits_per_second(self) -> S {
        self.0
    }
}

/// Generalized Friis received power `P_t G_t G_r λ² / ((4π)² dⁿ)`, watts.
pub fn received_power<S: Scalar>(params: &ChannelParams<S>, dist: S) -> Result<S> {
    if dist.is_nan() || dist <= S::zero() {
        return Err(Error::NonPositiveDistance(dist.as_f64()));
    }
    let lambda = params.wavelength_m();
    let four_pi = S::lit(4.0) * S::PI();
    let gains = db_to_linear(params.tx_gain_dbi) * db_to_linear(params.rx_gain_dbi);
    Ok(params.tx_power_w * gains * lambda * lambda / (four_pi * four_pi * dist.powf(params.pathloss_exponent)))
}

/// Shannon rate `W log₂(1 + P_r / ((N₀ + I·NF)·W))` with `NF = active_flows`.
pub fn link_rate<S: Scalar>(params: &ChannelParams<S>, dist: S, active_flows: usize) -> Result<LinkRate<S>> {
    let pr = received_power(params, dist)?;
    let nf = S::from_count(active_flows.max(1));
    let noise = (params.noise_psd_w_per_hz() + params.interference_psd_w_per_hz * nf) * params.bandwidth_hz;
    let rate = params.bandwidth_hz * (S::one() + pr / noise).log2();
    Ok(LinkRate(rate))
}

/// Smallest slot count `k` with `k · t_ts · rate ≥ payload_bits`.
pub fn slots_for_payload<S: Scalar>(params: &ChannelParams<S>, rate: LinkRate<S>) -> Result<u64> {
    let r = rate.0;
    if !r.is_finite() || r <= S::zero() {
        return Err(Error::ZeroRate);
    }
    let per_slot = params.slot_duration_s * r;
    let exact = params.payload_bits / per_slot;
    let mut slots = exact.ceil().to_u64().unwrap_or(u64::MAX).max(1);
    // ceil of a rounded quotient can land one off in either direction
    while slots < u64::MAX && S::from_u64(slots).unwrap() * params.slot_duration_s * r < params.payload_bits {
        slots += 1;
    }
    while slots > 1 && S::from_u64(slots - 1).unwrap() * params.slot_duration_s * r >= params.payload_bits {
        slots -= 1;
    }
    Ok(slots)
}

/// Slot demand of a `dist`-metre hop inside a group of `active_flows` members.
pub fn link_slots<S: Scalar>(params: &ChannelParams<S>, dist: S, active_flows: usize) -> Result<u64> {
    slots_for_payload(params, link_rate(params, dist, active_flows)?)
}
