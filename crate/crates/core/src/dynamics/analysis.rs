//! Extremum detection, oscillation frequency and envelope decay fits.

use super::Trajectory;
use crate::{Error, Result};

/// Hysteresis for extremum detection, relative to the series range.
const RELATIVE_DELTA: f64 = 1e-3;
/// Series whose range is below this are treated as constant.
const FLAT_RANGE: f64 = 1e-12;
const MIN_EXTREMA_FOR_FREQUENCY: usize = 3;
const MIN_MAXIMA_FOR_ENVELOPE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

/// Interior extremum with parabolically refined position and value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub index: usize,
    pub time: f64,
    pub value: f64,
}

fn refine(times: &[f64], values: &[f64], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= values.len() {
        return (times[k], values[k]);
    }
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    let h_left = times[k] - times[k - 1];
    let h_right = times[k + 1] - times[k];
    // Parabolic vertex assumes uniform spacing locally.
    if denom == 0.0 || (h_left - h_right).abs() > 1e-9 * h_left.max(h_right) {
        return (times[k], values[k]);
    }
    let offset = 0.5 * (y0 - y2) / denom;
    if offset.abs() > 1.0 {
        return (times[k], values[k]);
    }
    let t = times[k] + offset * h_left;
    let v = y1 - 0.25 * (y0 - y2) * offset;
    (t, v)
}

/// Alternating maxima and minima: a maximum is confirmed once the series has
/// dropped `delta` below it, a minimum once it has risen `delta` above it.
/// `delta` defaults to 10⁻³ of the series range. Endpoints never count.
pub fn find_extrema(times: &[f64], values: &[f64], delta: Option<f64>) -> Vec<Extremum> {
    let n = values.len().min(times.len());
    if n < 3 {
        return Vec::new();
    }
    let (lo, hi) = values[..n]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > FLAT_RANGE) {
        return Vec::new();
    }
    let delta = delta.unwrap_or(RELATIVE_DELTA * range);

    let mut out = Vec::new();
    let (mut max_i, mut min_i) = (0usize, 0usize);
    // Direction unknown until the first excursion of size delta.
    let mut looking_for_max: Option<bool> = None;
    for i in 1..n {
        let v = values[i];
        if v > values[max_i] {
            max_i = i;
        }
        if v < values[min_i] {
            min_i = i;
        }
        match looking_for_max {
            None => {
                if v > values[min_i] + delta {
                    looking_for_max = Some(true);
                    max_i = i;
                } else if v < values[max_i] - delta {
                    looking_for_max = Some(false);
                    min_i = i;
                }
            }
            Some(true) => {
                if v < values[max_i] - delta {
                    if max_i > 0 {
                        out.push((ExtremumKind::Maximum, max_i));
                    }
                    looking_for_max = Some(false);
                    min_i = i;
                }
            }
            Some(false) => {
                if v > values[min_i] + delta {
                    if min_i > 0 {
                        out.push((ExtremumKind::Minimum, min_i));
                    }
                    looking_for_max = Some(true);
                    max_i = i;
                }
            }
        }
    }
    out.into_iter()
        .map(|(kind, index)| {
            let (time, value) = refine(times, values, index);
            Extremum {
                kind,
                index,
                time,
                value,
            }
        })
        .collect()
}

/// Oscillation frequency in cycles per time unit: 1 / (2 × mean spacing of
/// consecutive extrema).
pub fn rabi_frequency_series(times: &[f64], values: &[f64], name: &str) -> Result<f64> {
    let ext = find_extrema(times, values, None);
    if ext.len() < MIN_EXTREMA_FOR_FREQUENCY {
        return Err(Error::TooFewExtrema {
            observable: name.to_string(),
            found: ext.len(),
            required: MIN_EXTREMA_FOR_FREQUENCY,
        });
    }
    let span = ext[ext.len() - 1].time - ext[0].time;
    let spacing = span / (ext.len() - 1) as f64;
    Ok(1.0 / (2.0 * spacing))
}

/// Population-oscillation frequency of `observable` in cycles/ns (GHz).
/// For one resonant atom this is g/π with g in rad/ns.
pub fn rabi_frequency(traj: &Trajectory, observable: &str) -> Result<f64> {
    rabi_frequency_series(traj.times(), traj.series(observable)?, observable)
}

/// Least-squares fit of ln Aₖ = ln A₀ − tₖ/τ over the oscillation maxima.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeFit {
    pub tau: f64,
    pub amplitude: f64,
    /// Root-mean-square residual of ln A.
    pub residual: f64,
    pub n_maxima: usize,
}

pub fn envelope_lifetime_series(times: &[f64], values: &[f64], name: &str) -> Result<EnvelopeFit> {
    let maxima: Vec<(f64, f64)> = find_extrema(times, values, None)
        .into_iter()
        .filter(|e| e.kind == ExtremumKind::Maximum && e.value > 0.0)
        .map(|e| (e.time, e.value.ln()))
        .collect();
    if maxima.len() < MIN_MAXIMA_FOR_ENVELOPE {
        return Err(Error::TooFewExtrema {
            observable: name.to_string(),
            found: maxima.len(),
            required: MIN_MAXIMA_FOR_ENVELOPE,
        });
    }
    let n = maxima.len() as f64;
    let t_mean = maxima.iter().map(|m| m.0).sum::<f64>() / n;
    let y_mean = maxima.iter().map(|m| m.1).sum::<f64>() / n;
    let sxx: f64 = maxima.iter().map(|m| (m.0 - t_mean).powi(2)).sum();
    let sxy: f64 = maxima.iter().map(|m| (m.0 - t_mean) * (m.1 - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let span = maxima[maxima.len() - 1].0 - maxima[0].0;
    if !(slope < 0.0) || -slope * span < 1e-6 {
        return Err(Error::NonDecayingEnvelope(name.to_string()));
    }
    let residual = (maxima
        .iter()
        .map(|m| (m.1 - intercept - slope * m.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(EnvelopeFit {
        tau: -1.0 / slope,
        amplitude: intercept.exp(),
        residual,
        n_maxima: maxima.len(),
    })
}

/// Exponential decay time (ns) of the maxima of `observable`.
pub fn envelope_lifetime(traj: &Trajectory, observable: &str) -> Result<EnvelopeFit> {
    envelope_lifetime_series(traj.times(), traj.series(observable)?, observable)
}
