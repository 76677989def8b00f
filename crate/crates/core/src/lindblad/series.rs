use serde::Serialize;

use super::LindbladError;

/// Real observable traces on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    traces: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, traces: Vec<(String, Vec<f64>)>) -> Result<Self, LindbladError> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LindbladError::InvalidSeries(
                "time grid is not strictly increasing".into(),
            ));
        }
        for (name, values) in &traces {
            if values.len() != times.len() {
                return Err(LindbladError::InvalidSeries(format!(
                    "trace {name} has {} samples for {} times",
                    values.len(),
                    times.len()
                )));
            }
        }
        Ok(Self { times, traces })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.traces.iter().map(|(n, _)| n.as_str())
    }

    pub fn traces(&self) -> &[(String, Vec<f64>)] {
        &self.traces
    }

    pub fn trace(&self, name: &str) -> Result<&[f64], LindbladError> {
        self.traces
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| LindbladError::UnknownTrace(name.to_string()))
    }

    /// Largest value of a trace.
    pub fn max_of(&self, name: &str) -> Result<f64, LindbladError> {
        Ok(self
            .trace(name)?
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Keep samples with `t >= t_min`.
    pub fn after(&self, t_min: f64) -> TimeSeries {
        let start = self.times.partition_point(|&t| t < t_min);
        TimeSeries {
            times: self.times[start..].to_vec(),
            traces: self
                .traces
                .iter()
                .map(|(n, v)| (n.clone(), v[start..].to_vec()))
                .collect(),
        }
    }

    /// Linear interpolation of a trace at `t` (clamped to the grid).
    pub fn interpolate(&self, name: &str, t: f64) -> Result<f64, LindbladError> {
        let v = self.trace(name)?;
        let ts = &self.times;
        if t <= ts[0] {
            return Ok(v[0]);
        }
        if t >= ts[ts.len() - 1] {
            return Ok(v[v.len() - 1]);
        }
        let k = ts.partition_point(|&x| x <= t);
        let (t0, t1) = (ts[k - 1], ts[k]);
        let w = (t - t0) / (t1 - t0);
        Ok(v[k - 1] * (1.0 - w) + v[k] * w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    pub period: f64,
    pub uncertainty: f64,
    pub t_extremum: f64,
    pub kind: ExtremumKind,
}

/// Period from the first interior extremum of a trace that starts at its own extremum.
///
/// A trace starting above its mean is scanned for its first minimum, otherwise
/// for its first maximum. To ignore ripples, a candidate only counts once the
/// trace has covered half its total range and then turned back by 5% of the
/// range. The extremum is refined by a three-point parabola and the period is
/// twice its time.
pub fn extract_period(
    series: &TimeSeries,
    trace_name: &str,
) -> Result<PeriodEstimate, LindbladError> {
    let y = series.trace(trace_name)?;
    let t = series.times();
    let no_osc = || LindbladError::NoOscillation(trace_name.to_string());
    if y.len() < 3 {
        return Err(no_osc());
    }
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        return Err(no_osc());
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let kind = if y[0] > mean {
        ExtremumKind::Minimum
    } else {
        ExtremumKind::Maximum
    };
    // flip so that we always look for a maximum
    let sgn = if kind == ExtremumKind::Maximum {
        1.0
    } else {
        -1.0
    };
    let start = sgn * y[0];
    let mut best = start;
    let mut best_idx = 0usize;
    let mut found = None;
    for (i, &v) in y.iter().enumerate().skip(1) {
        let v = sgn * v;
        if v > best {
            best = v;
            best_idx = i;
        }
        if best - start >= 0.5 * range && best - v >= 0.05 * range {
            found = Some(best_idx);
            break;
        }
    }
    let idx = found.ok_or_else(no_osc)?;
    if idx == 0 || idx + 1 >= y.len() {
        return Err(no_osc());
    }
    let (y0, y1, y2) = (sgn * y[idx - 1], sgn * y[idx], sgn * y[idx + 1]);
    let (t0, t1, t2) = (t[idx - 1], t[idx], t[idx + 1]);
    let t_ext = parabola_vertex(t0, y0, t1, y1, t2, y2).unwrap_or(t1);
    let spacing = 0.5 * (t2 - t0);
    Ok(PeriodEstimate {
        period: 2.0 * t_ext,
        uncertainty: spacing,
        t_extremum: t_ext,
        kind,
    })
}

fn parabola_vertex(t0: f64, y0: f64, t1: f64, y1: f64, t2: f64, y2: f64) -> Option<f64> {
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let curv = (d12 - d01) / (t2 - t0);
    if curv >= 0.0 {
        return None;
    }
    // y = y1 + d·(t − t1) + curv·(t − t1)² near t1, d = slope of the parabola at t1
    let d = d01 + curv * (t1 - t0);
    let v = t1 - d / (2.0 * curv);
    if v >= t0 && v <= t2 {
        Some(v)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn series(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> TimeSeries {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        TimeSeries::new(times, vec![("y".into(), values)]).unwrap()
    }

    #[test]
    fn sinusoid_period() {
        let period = 7.3;
        let s = series(|t| (PI * t / period).cos().powi(2), period / 200.0, 801);
        let est = extract_period(&s, "y").unwrap();
        assert!(
            (est.period - period).abs() / period < 1e-3,
            "{}",
            est.period
        );
        assert_eq!(est.kind, ExtremumKind::Minimum);
    }

    #[test]
    fn rising_trace_period() {
        let period = 3.0;
        let s = series(|t| (PI * t / period).sin().powi(2), period / 37.0, 200);
        let est = extract_period(&s, "y").unwrap();
        assert_eq!(est.kind, ExtremumKind::Maximum);
        assert!((est.period - period).abs() / period < 1e-3);
    }

    #[test]
    fn damped_cosine_period() {
        let period = 10.0;
        for damping in [0.0, 0.02, 0.05] {
            let rate = damping / period;
            let s = series(
                |t| (2.0 * PI * t / period).cos() * (-rate * t).exp(),
                period / 100.0,
                600,
            );
            // a full cosine: the first minimum sits at half a period
            let est = extract_period(&s, "y").unwrap();
            let full = 2.0 * est.t_extremum;
            assert!(
                (full - period).abs() / period < 0.01,
                "damping {damping}: {full}"
            );
        }
    }

    #[test]
    fn constant_and_monotone_traces() {
        let s = series(|_| 0.4, 0.1, 50);
        assert!(matches!(
            extract_period(&s, "y"),
            Err(LindbladError::NoOscillation(_))
        ));
        let s = series(|t| t * t, 0.1, 50);
        assert!(matches!(
            extract_period(&s, "y"),
            Err(LindbladError::NoOscillation(_))
        ));
        let s = series(|t| (-t).exp(), 0.1, 50);
        assert!(extract_period(&s, "y").is_err());
    }

    #[test]
    fn unknown_trace() {
        let s = series(|t| t, 0.1, 5);
        assert!(matches!(
            s.trace("P_e"),
            Err(LindbladError::UnknownTrace(_))
        ));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![]).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![("a".into(), vec![1.0])]).is_err());
    }

    #[test]
    fn interpolation() {
        let s = series(|t| 2.0 * t, 0.5, 5);
        assert!((s.interpolate("y", 0.75).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(s.interpolate("y", 10.0).unwrap(), 4.0);
    }
}
