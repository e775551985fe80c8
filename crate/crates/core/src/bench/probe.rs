//! Encoder and circuit outputs of a hybrid model on a uniform `(t, x)` grid.

use serde::{Deserialize, Serialize};

use crate::diffkit::ValueEval;
use crate::error::{Error, Result};
use crate::netlib::{hybrid_stages, ModelHandle, ModelSpec};
use crate::pdeset::Domain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    /// `inner[q]` is `i_q` on the grid, row-major `[t][x]`.
    pub inner: Vec<Vec<f64>>,
    /// `outer[q]` is `o_q` on the grid, row-major `[t][x]`.
    pub outer: Vec<Vec<f64>>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Evaluates `i_q` and `o_q` on a `resolution × resolution` grid over `domain`.
pub fn probe_intermediates(model: &ModelHandle, domain: &Domain, resolution: usize) -> Result<Probe> {
    let ModelSpec::Hybrid(h) = &model.spec else {
        return Err(Error::Unsupported(
            "intermediate outputs exist only for hybrid models".into(),
        ));
    };
    if resolution == 0 {
        return Err(Error::Config("probe resolution must be at least 1".into()));
    }
    let ts = linspace(0.0, domain.t_max, resolution);
    let xs = linspace(domain.x_lo, domain.x_hi, resolution);
    let nq = h.circuit.n_qubits;
    let cells = resolution * resolution;
    let mut inner = vec![Vec::with_capacity(cells); nq];
    let mut outer = vec![Vec::with_capacity(cells); nq];
    for &t in &ts {
        for &x in &xs {
            let (i, o) = hybrid_stages(h, &mut ValueEval, model.params.values(), t, x);
            for q in 0..nq {
                inner[q].push(i[q]);
                outer[q].push(o[q]);
            }
        }
    }
    Ok(Probe { ts, xs, inner, outer })
}

impl Probe {
    /// Wide CSV: `t,x,i_0..,o_0..`.
    pub fn to_csv(&self) -> String {
        let nq = self.inner.len();
        let mut wr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string(), "x".to_string()];
        header.extend((0..nq).map(|q| format!("i_{q}")));
        header.extend((0..nq).map(|q| format!("o_{q}")));
        wr.write_record(&header).expect("in-memory write");
        let nx = self.xs.len();
        for (a, t) in self.ts.iter().enumerate() {
            for (b, x) in self.xs.iter().enumerate() {
                let k = a * nx + b;
                let mut rec = vec![t.to_string(), x.to_string()];
                rec.extend(self.inner.iter().map(|s| s[k].to_string()));
                rec.extend(self.outer.iter().map(|s| s[k].to_string()));
                wr.write_record(&rec).expect("in-memory write");
            }
        }
        String::from_utf8(wr.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}
