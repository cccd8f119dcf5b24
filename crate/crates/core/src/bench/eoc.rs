//! Experimental orders of convergence on an `(h, Δt)` refinement grid.
//!
//! Every entry is `log₂(e_coarse / e_fine)` between neighbouring grid levels. Since `Δt`
//! is quartered per level while `h` is halved, `eoc_tt` and `eoc_xtt` are orders per
//! `h`-halving.

/// `log₂(coarse / fine)`.
pub fn eoc(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn pair(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(eoc(a?, b?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EocTable {
    pub hs: Vec<f64>,
    pub dts: Vec<f64>,
    /// `errors[j][i]` at `dts[j]`, `hs[i]`; `None` marks a missing run.
    pub errors: Vec<Vec<Option<f64>>>,
}

impl EocTable {
    pub fn new(hs: Vec<f64>, dts: Vec<f64>) -> Self {
        let errors = vec![vec![None; hs.len()]; dts.len()];
        Self { hs, dts, errors }
    }

    pub fn set(&mut self, h_index: usize, dt_index: usize, value: f64) {
        self.errors[dt_index][h_index] = Some(value);
    }

    pub fn get(&self, h_index: usize, dt_index: usize) -> Option<f64> {
        self.errors.get(dt_index)?.get(h_index).copied().flatten()
    }

    /// Spatial orders along the row `dt_index`: entry `i` compares `hs[i-1]` and `hs[i]`.
    pub fn eoc_x_row(&self, dt_index: usize) -> Vec<Option<f64>> {
        (0..self.hs.len())
            .map(|i| {
                if i == 0 {
                    None
                } else {
                    pair(self.get(i - 1, dt_index), self.get(i, dt_index))
                }
            })
            .collect()
    }

    /// Spatial orders on the finest time step.
    pub fn eoc_x(&self) -> Vec<Option<f64>> {
        self.eoc_x_row(self.dts.len().saturating_sub(1))
    }

    /// Temporal orders along the finest-`h` column: entry `j` compares `dts[j-1]` and `dts[j]`.
    pub fn eoc_tt(&self) -> Vec<Option<f64>> {
        let i = self.hs.len().saturating_sub(1);
        (0..self.dts.len())
            .map(|j| {
                if j == 0 {
                    None
                } else {
                    pair(self.get(i, j - 1), self.get(i, j))
                }
            })
            .collect()
    }

    /// Orders along the diagonal `(hs[k], dts[k])`.
    pub fn eoc_xtt(&self) -> Vec<Option<f64>> {
        let n = self.hs.len().min(self.dts.len());
        (0..n)
            .map(|k| {
                if k == 0 {
                    None
                } else {
                    pair(self.get(k - 1, k - 1), self.get(k, k))
                }
            })
            .collect()
    }

    /// Table layout: one row per `Δt` with the `eoc_tt` column, then `eoc_x` and `eoc_xtt` rows.
    /// Missing entries are written as `-`.
    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
        let mut s = String::from("dt\\h");
        for h in &self.hs {
            s.push_str(&format!(",{h}"));
        }
        s.push_str(",eoc_tt\n");
        let tt = self.eoc_tt();
        for (j, dt) in self.dts.iter().enumerate() {
            s.push_str(&format!("{dt:.6e}"));
            for i in 0..self.hs.len() {
                s.push(',');
                s.push_str(&fmt(self.get(i, j)));
            }
            s.push(',');
            s.push_str(&fmt(tt[j]));
            s.push('\n');
        }
        for (name, row) in [("eoc_x", self.eoc_x()), ("eoc_xtt", self.eoc_xtt())] {
            s.push_str(name);
            for i in 0..self.hs.len() {
                s.push(',');
                s.push_str(&fmt(row.get(i).copied().flatten()));
            }
            s.push_str(",\n");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definitions() {
        assert_eq!(eoc(1.0, 0.5), 1.0);
        assert_eq!(eoc(1.0, 0.25), 2.0);
        let mut t = EocTable::new(vec![0.5, 0.25], vec![0.1, 0.025]);
        t.set(0, 0, 1.0);
        t.set(1, 0, 0.5);
        t.set(0, 1, 0.25);
        t.set(1, 1, 0.125);
        assert_eq!(t.eoc_x(), vec![None, Some(1.0)]);
        assert_eq!(t.eoc_tt(), vec![None, Some(2.0)]);
        assert_eq!(t.eoc_xtt(), vec![None, Some(3.0)]);
    }

    #[test]
    fn reference_ladder_values() {
        // Finest-row spatial orders of a reference ladder.
        let mut t = EocTable::new(
            vec![0.5, 0.25, 0.125, 0.0625],
            vec![1.0, 0.25, 0.0625, 0.015625],
        );
        for (i, e) in [0.193175, 0.0982567, 0.0498987, 0.0266914]
            .iter()
            .enumerate()
        {
            t.set(i, 3, *e);
        }
        let x = t.eoc_x();
        assert!((x[1].unwrap() - 0.975281).abs() < 1e-5);
        assert!((x[3].unwrap() - 0.902627).abs() < 1e-5);
    }

    #[test]
    fn gaps_are_marked() {
        let mut t = EocTable::new(vec![0.5, 0.25], vec![0.1]);
        t.set(0, 0, 1.0);
        assert_eq!(t.eoc_x(), vec![None, None]);
        let csv = t.to_csv();
        assert!(csv.lines().nth(1).unwrap().contains(",-"));
        assert_eq!(csv.lines().count(), 4);
    }
}
