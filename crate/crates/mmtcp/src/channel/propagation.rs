//! Distance-dependent state probabilities, pathloss, SNR and slot capacity.

use super::{Band, LinkState, MmWaveParams, StateDistribution};
use crate::sim::SimTime;

/// Stationary LOS/NLOS/outage probabilities at distance `d` meters.
///
/// p_out(d) = max(0, 1 - exp(-d/a_out + b_out)) and
/// p_los(d) = (1 - p_out) * exp(-d/a_los); NLOS takes the remainder.
pub fn state_probabilities(d_m: f64, p: &MmWaveParams) -> StateDistribution {
    assert!(d_m > 0.0, "distance must be positive, got {d_m}");
    let p_out = (1.0 - (-d_m / p.a_out_m + p.b_out).exp()).max(0.0);
    let p_los = (1.0 - p_out) * (-d_m / p.a_los_m).exp();
    let p_nlos = (1.0 - p_out - p_los).max(0.0);
    StateDistribution {
        p_los,
        p_nlos,
        p_out,
    }
}

/// Log-distance pathloss for a non-outage state, in dB.
pub fn pathloss_db(state: LinkState, d_m: f64, band: Band, shadow_db: f64, p: &MmWaveParams) -> f64 {
    assert!(d_m > 0.0, "distance must be positive, got {d_m}");
    assert!(state != LinkState::Outage, "outage has no pathloss");
    let base = match state {
        LinkState::Los => p.los_pl0_db + p.los_exp10 * d_m.log10(),
        LinkState::Nlos => p.nlos_pl0_db + p.nlos_exp10 * d_m.log10(),
        LinkState::Outage => unreachable!(),
    };
    let band_offset = match band {
        Band::Mm28 => 0.0,
        Band::Mm73 => p.mm73_offset_db,
    };
    base + band_offset + shadow_db
}

/// Link SNR in dB for a given pathloss.
pub fn snr_db(pathloss_db: f64, p: &MmWaveParams) -> f64 {
    p.tx_power_dbm + p.beam_gain_db - pathloss_db - p.noise_floor_dbm()
}

/// Bits deliverable in one slot for one direction.
///
/// Shannon efficiency capped at `eff_cap`, scaled by the TDD duty share
/// and the PHY/MAC overhead fraction. Zero below the MCS floor.
pub fn slot_capacity(snr_db: f64, slot: SimTime, duty: f64, overhead: f64, p: &MmWaveParams) -> u64 {
    debug_assert!((0.0..=1.0).contains(&duty));
    debug_assert!((0.0..=1.0).contains(&overhead));
    if snr_db < p.mcs_floor_db {
        return 0;
    }
    let snr_lin = 10f64.powf(snr_db / 10.0);
    let eff = (1.0 + snr_lin).log2().min(p.eff_cap);
    (p.bandwidth_hz * slot.as_secs_f64() * duty * (1.0 - overhead) * eff).floor() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SimTime;

    fn p() -> MmWaveParams {
        MmWaveParams::default()
    }

    #[test]
    fn near_zero_distance_is_all_los() {
        let d = state_probabilities(1e-6, &p());
        assert!(d.p_los > 0.9999);
        assert_eq!(d.p_out, 0.0);
        assert!(d.is_valid());
    }

    #[test]
    fn los_probability_at_a_los_distance() {
        // d = a_los => p_los = e^-1, still no outage
        let d = state_probabilities(67.1, &p());
        assert!((d.p_los - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(d.p_out, 0.0);
    }

    #[test]
    fn probabilities_sum_to_one_and_outage_monotone() {
        let mut prev_out = 0.0;
        for i in 1..=400 {
            let d = state_probabilities(i as f64, &p());
            assert!(d.is_valid(), "invalid at d={i}: {d:?}");
            assert!(d.p_out >= prev_out - 1e-12, "p_out not monotone at d={i}");
            prev_out = d.p_out;
        }
    }

    #[test]
    fn pathloss_reference_points() {
        let prm = p();
        assert!((pathloss_db(LinkState::Los, 1.0, Band::Mm28, 0.0, &prm) - 61.4).abs() < 1e-9);
        let nlos100 = pathloss_db(LinkState::Nlos, 100.0, Band::Mm28, 0.0, &prm);
        assert!((nlos100 - 130.4).abs() < 1e-9, "{nlos100}");
        let mm73 = pathloss_db(LinkState::Los, 1.0, Band::Mm73, 0.0, &prm);
        assert!((mm73 - 69.7).abs() < 1e-9, "{mm73}");
    }

    #[test]
    fn pathloss_monotone_in_distance_and_nlos_above_los() {
        let prm = p();
        let mut prev_los = f64::MIN;
        let mut prev_nlos = f64::MIN;
        for i in 2..400 {
            let d = i as f64;
            let los = pathloss_db(LinkState::Los, d, Band::Mm28, 0.0, &prm);
            let nlos = pathloss_db(LinkState::Nlos, d, Band::Mm28, 0.0, &prm);
            assert!(los > prev_los && nlos > prev_nlos);
            assert!(nlos > los, "NLOS must exceed LOS at d={d}");
            prev_los = los;
            prev_nlos = nlos;
        }
    }

    #[test]
    fn snr_reference_points() {
        let prm = p();
        // noise floor: -174 + 90 + 5 = -79 dBm
        assert!((prm.noise_floor_dbm() + 79.0).abs() < 1e-9);
        assert!((snr_db(95.4, &prm) - 43.6).abs() < 1e-9);
        assert!(snr_db(139.0, &prm).abs() < 1e-9);
        // LTE-like floor: 20 MHz, zero beam gain => about -96 dBm
        let lte_like = MmWaveParams {
            bandwidth_hz: 20e6,
            beam_gain_db: 0.0,
            ..prm
        };
        assert!((lte_like.noise_floor_dbm() - (-95.99)).abs() < 0.01);
        let expected = 30.0 - 100.0 - lte_like.noise_floor_dbm();
        assert!((snr_db(100.0, &lte_like) - expected).abs() < 1e-9);
    }

    #[test]
    fn slot_capacity_reference_points() {
        let prm = p();
        assert_eq!(
            slot_capacity(-5.1, SimTime::from_micros(125), 0.5, 0.15, &prm),
            0
        );
        // SNR 0 dB => efficiency exactly 1 bit/s/Hz
        let bits = slot_capacity(0.0, SimTime::from_micros(125), 0.5, 0.15, &prm);
        assert_eq!(bits, 53_125);
        // far above the cap the efficiency saturates at 7.5
        let capped = slot_capacity(60.0, SimTime::from_micros(125), 0.5, 0.15, &prm);
        assert_eq!(capped, (1e9 * 125e-6 * 0.5 * 0.85 * 7.5) as u64);
    }

    #[test]
    fn slot_capacity_non_increasing_in_pathloss() {
        let prm = p();
        let mut prev = u64::MAX;
        for pl in 60..200 {
            let c = slot_capacity(snr_db(pl as f64, &prm), SimTime::from_micros(125), 0.5, 0.15, &prm);
            assert!(c <= prev);
            prev = c;
        }
    }
}
