use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Metrics after step `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: usize,
    /// `dist(x̂_i(t), X)` per player.
    pub distances: Vec<f64>,
    pub total_distance: f64,
    /// `max_i ‖x̂_i(t) − x̂_b(t)‖`
    pub consensus_error: f64,
    /// `t · consensus_error`
    pub scaled_error: f64,
    pub barycenter: Vec<f64>,
    /// `Σ_i dist(w_i(t−1), X)`
    pub lemma1_lhs: f64,
    /// `Σ_i dist(x̂_i(t−1), X)`
    pub lemma1_rhs: f64,
    /// Sup-norm gap between the barycenter and the reward time-average.
    #[serde(skip)]
    pub lemma3_gap: f64,
    #[serde(skip)]
    pub estimates: Vec<Vec<f64>>,
}

/// Column names: `t, dist_1..dist_n, total_dist, consensus_err, scaled_err,
/// bary_1..bary_d, lemma1_lhs, lemma1_rhs`, followed by one `xhat_i_j`
/// column per estimate coordinate (player `i`, coordinate `j`, from 1).
pub fn trace_header(n_players: usize, dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n_players).map(|i| format!("dist_{i}")));
    h.extend(["total_dist", "consensus_err", "scaled_err"].map(String::from));
    h.extend((1..=dim).map(|j| format!("bary_{j}")));
    h.extend(["lemma1_lhs", "lemma1_rhs"].map(String::from));
    for i in 1..=n_players {
        h.extend((1..=dim).map(|j| format!("xhat_{i}_{j}")));
    }
    h
}

/// 17 significant digits.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let Some(first) = records.first() else {
        return Err(Error::Config("empty trace".into()));
    };
    let n = first.distances.len();
    let dim = first.barycenter.len();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(n, dim))?;
    for r in records {
        let mut row = Vec::with_capacity(4 + n + dim + n * dim + 2);
        row.push(r.t.to_string());
        row.extend(r.distances.iter().copied().map(fmt_float));
        row.push(fmt_float(r.total_distance));
        row.push(fmt_float(r.consensus_error));
        row.push(fmt_float(r.scaled_error));
        row.extend(r.barycenter.iter().copied().map(fmt_float));
        row.push(fmt_float(r.lemma1_lhs));
        row.push(fmt_float(r.lemma1_rhs));
        for x in &r.estimates {
            row.extend(x.iter().copied().map(fmt_float));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a trace written by [`write_trace_csv`]. The barycenter-gap field
/// is not stored and comes back as `NaN`.
pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    let n = header.iter().filter(|h| h.starts_with("dist_")).count();
    let dim = header.iter().filter(|h| h.starts_with("bary_")).count();
    if header.iter().collect::<Vec<_>>() != trace_header(n, dim) {
        return Err(Error::Config("unexpected trace header".into()));
    }
    let parse = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|e| Error::Config(format!("bad float `{s}`: {e}")))
    };
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f: Vec<&str> = rec.iter().collect();
        let t = f[0]
            .parse::<usize>()
            .map_err(|e| Error::Config(format!("bad step `{}`: {e}", f[0])))?;
        let mut k = 1;
        let mut take = |count: usize| -> Result<Vec<f64>> {
            let v = f[k..k + count].iter().map(|s| parse(s)).collect();
            k += count;
            v
        };
        let distances = take(n)?;
        let scalars = take(3)?;
        let barycenter = take(dim)?;
        let lemma = take(2)?;
        let estimates = (0..n).map(|_| take(dim)).collect::<Result<Vec<_>>>()?;
        out.push(TraceRecord {
            t,
            distances,
            total_distance: scalars[0],
            consensus_error: scalars[1],
            scaled_error: scalars[2],
            barycenter,
            lemma1_lhs: lemma[0],
            lemma1_rhs: lemma[1],
            lemma3_gap: f64::NAN,
            estimates,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let h = trace_header(2, 2);
        assert_eq!(
            h,
            [
                "t",
                "dist_1",
                "dist_2",
                "total_dist",
                "consensus_err",
                "scaled_err",
                "bary_1",
                "bary_2",
                "lemma1_lhs",
                "lemma1_rhs",
                "xhat_1_1",
                "xhat_1_2",
                "xhat_2_1",
                "xhat_2_2"
            ]
        );
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn empty_trace_is_an_error() {
        assert!(write_trace_csv(&[], Vec::new()).is_err());
    }
}
