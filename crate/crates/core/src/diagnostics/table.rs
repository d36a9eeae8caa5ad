use std::io::Write;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub tau: f64,
    pub zeta: f64,
    pub eta: f64,
    /// one value per metric
    pub values: Vec<f64>,
}

/// Error metrics over a sequence of levels or rungs.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub label: String,
    pub metrics: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn new(label: impl Into<String>, metrics: &[&str]) -> Self {
        Self {
            label: label.into(),
            metrics: metrics.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == name)
    }

    pub fn column(&self, metric: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[metric]).collect()
    }

    /// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive rows.
    pub fn pairwise_orders(&self, metric: usize) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[0].values[metric] / w[1].values[metric]).ln() / (w[0].h / w[1].h).ln())
            .collect()
    }

    /// Least-squares slope of `log e` against `log h` over all rows.
    pub fn fitted_order(&self, metric: usize) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| (r.h.ln(), r.values[metric].ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    /// CSV with one row per level; order columns hold the pairwise order
    /// against the previous row (empty on the first).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["h".to_string(), "tau".into(), "zeta".into(), "eta".into()];
        header.extend(self.metrics.iter().cloned());
        header.extend(self.metrics.iter().map(|m| format!("order_{m}")));
        w.write_record(&header).map_err(|e| Error::Io(e.into()))?;
        for (i, r) in self.rows.iter().enumerate() {
            let mut rec = vec![r.h.to_string(), r.tau.to_string(), r.zeta.to_string(), r.eta.to_string()];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            for m in 0..self.metrics.len() {
                rec.push(if i == 0 {
                    String::new()
                } else {
                    let p = &self.rows[i - 1];
                    ((p.values[m] / r.values[m]).ln() / (p.h / r.h).ln()).to_string()
                });
            }
            w.write_record(&rec).map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let mut t = ConvergenceTable::new("x", &["e"]);
        for h in [0.5, 0.25, 0.125, 0.0625] {
            t.rows.push(ConvergenceRow {
                h,
                tau: h,
                zeta: 0.0,
                eta: 0.0,
                values: vec![3.0 * h * h],
            });
        }
        for o in t.pairwise_orders(0) {
            assert!((o - 2.0).abs() < 1e-12);
        }
        assert!((t.fitted_order(0) - 2.0).abs() < 1e-12);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("h,tau,zeta,eta,e,order_e\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
