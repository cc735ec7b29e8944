//! Structural checks every returned itinerary must pass.

#![allow(dead_code)]

use mmtp_core::{Itinerary, LegKind, PlanResponse};

pub fn check_itinerary(it: &Itinerary, max_walk_m: f64) -> Result<(), String> {
    let legs = &it.legs;
    if legs.is_empty() {
        return Err("no legs".into());
    }
    for (k, leg) in legs.iter().enumerate() {
        if leg.end_time < leg.start_time {
            return Err(format!("leg {k} ends before it starts"));
        }
        if leg.geometry.len() < 2 {
            return Err(format!("leg {k} has {} geometry points", leg.geometry.len()));
        }
        if leg.approximate && leg.kind != LegKind::Walk {
            return Err(format!("leg {k} approximate but not WALK"));
        }
        if leg.approximate && k != 0 && k != legs.len() - 1 {
            return Err(format!("approximate leg {k} is not at an end"));
        }
        if leg.kind == LegKind::Transit && (leg.trip_id.is_none() || leg.board_stop.is_none() || leg.alight_stop.is_none()) {
            return Err(format!("transit leg {k} lacks ids"));
        }
    }
    for (k, w) in legs.windows(2).enumerate() {
        if w[0].end_time != w[1].start_time {
            return Err(format!(
                "legs {k} and {} not contiguous: {} vs {}",
                k + 1,
                w[0].end_time,
                w[1].start_time
            ));
        }
    }
    let first = legs[0].start_time.seconds();
    let last = legs[legs.len() - 1].end_time.seconds();
    if it.duration_s != last - first || it.start_time.seconds() != first || it.end_time.seconds() != last {
        return Err("duration does not match leg times".into());
    }
    let walk: f64 = legs.iter().filter(|l| l.kind == LegKind::Walk).map(|l| l.distance_m).sum();
    if (it.walk_distance_m - walk).abs() > 1e-9 * walk.max(1.0) {
        return Err(format!("walk_distance {} vs legs {walk}", it.walk_distance_m));
    }
    let network_walk: f64 = legs
        .iter()
        .filter(|l| l.kind == LegKind::Walk && !l.approximate)
        .map(|l| l.distance_m)
        .sum();
    if network_walk > max_walk_m + 1e-6 {
        return Err(format!("walked {network_walk} m over budget {max_walk_m}"));
    }
    let total: f64 = legs.iter().map(|l| l.distance_m).sum();
    if (it.total_distance_m - total).abs() > 1e-9 * total.max(1.0) {
        return Err("total distance mismatch".into());
    }
    if it.boardings as usize != legs.iter().filter(|l| l.kind == LegKind::Transit).count() {
        return Err("boardings mismatch".into());
    }
    Ok(())
}

/// Itinerary checks plus ordering and trip-ban disjointness across a
/// response.
pub fn check_response(resp: &PlanResponse, max_walk_m: f64, limit: usize) -> Result<(), String> {
    if resp.itineraries.is_empty() || resp.itineraries.len() > limit {
        return Err(format!("{} itineraries for limit {limit}", resp.itineraries.len()));
    }
    for it in &resp.itineraries {
        check_itinerary(it, max_walk_m)?;
    }
    for w in resp.itineraries.windows(2) {
        if (w[0].end_time, w[0].boardings) > (w[1].end_time, w[1].boardings) {
            return Err("itineraries out of order".into());
        }
    }
    for (i, a) in resp.itineraries.iter().enumerate() {
        for b in &resp.itineraries[i + 1..] {
            if a.trip_ids().any(|t| b.trip_ids().any(|u| u == t)) {
                return Err("itineraries share a trip".into());
            }
        }
    }
    Ok(())
}
