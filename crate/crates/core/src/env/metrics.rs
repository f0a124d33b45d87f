use crate::error::{Error, Result};

/// Transient quality of a real-power response.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    /// `(max P - Pref) / Pref` in percent. Negative if P never reaches Pref.
    pub overshoot_pct: f64,
    /// Time after which P stays inside the 2 % band (s).
    pub settling_time: f64,
    /// False when the last sample is still outside the band; the settling
    /// time is then the window length.
    pub settled: bool,
    pub itae: f64,
}

/// Band used for the settling time, relative to Pref.
pub const SETTLING_BAND: f64 = 0.02;

/// Metrics of a power trace sampled every `dt` seconds after the GFL
/// connects; sample `k` sits at `t = (k + 1) * dt`.
pub fn compute_metrics(p: &[f64], dt: f64, pref: f64) -> Result<Metrics> {
    if p.is_empty() {
        return Err(Error::Usage("cannot compute metrics of an empty trace".into()));
    }
    if !(dt > 0.0) || pref == 0.0 {
        return Err(Error::Usage(format!("metrics need dt > 0 and a nonzero Pref (dt={dt}, pref={pref})")));
    }
    let band = SETTLING_BAND * pref.abs();
    let mut max_p = f64::NEG_INFINITY;
    let mut itae = 0.0;
    let mut last_outside = None;
    for (k, &pk) in p.iter().enumerate() {
        let t = (k + 1) as f64 * dt;
        let err = (pk - pref).abs();
        max_p = max_p.max(pk);
        itae += t * err * dt;
        if err >= band {
            last_outside = Some(k);
        }
    }
    let (settling_time, settled) = match last_outside {
        None => (0.0, true),
        Some(k) if k + 1 == p.len() => (p.len() as f64 * dt, false),
        Some(k) => ((k + 1) as f64 * dt, true),
    };
    Ok(Metrics {
        overshoot_pct: (max_p - pref) / pref * 100.0,
        settling_time,
        settled,
        itae,
    })
}
