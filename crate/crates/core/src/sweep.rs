//! Bifurcation-diagram data: stable stationary branches over a grid of `r`
//! for `K_2`, complete graphs and barbell graphs.
//!
//! Stability of a detailed-balance state only depends on the sign of `r`
//! (the Jacobian is `r (Q - 3 Q_≠)`), so each family is classified once
//! at `r = 1` and the branches are scaled by `√r`.

use std::io::{self, Write};

use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::graph::generators;
use crate::io::fmt_f64;
use crate::stability::{classify, jacobian_laplacian_form, Verdict};
use crate::stationary::{realize, LinkAssignment};

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !min.is_finite() || !max.is_finite() {
        return Err(Error::OutOfDomain(format!(
            "grid needs finite bounds and at least one step, got [{min}, {max}] with {steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k == steps - 1 { max } else { min + k as f64 * h })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

const UNIT: SystemParams = SystemParams { r: 1.0 };

fn verdict_of(symbols: Vec<i8>, g: &crate::graph::Graph) -> Result<Verdict> {
    let d = realize(&LinkAssignment::new(symbols)?, g, UNIT)?;
    Ok(classify(&jacobian_laplacian_form(&d, g, UNIT), UNIT)?.verdict)
}

/// Group sizes `V` of the numerically stable two-group states on `K_N`.
pub fn stable_complete_groups(n: usize) -> Result<Vec<usize>> {
    let g = generators::complete(n);
    let mut stable = Vec::new();
    for v in 0..=n {
        let symbols = g.edges().iter().map(|&(i, j)| i8::from(i < v && j >= v)).collect();
        if verdict_of(symbols, &g)? == Verdict::Stable {
            stable.push(v);
        }
    }
    Ok(stable)
}

/// One stable barbell configuration, relative to the bridge node `i` of
/// clique A held at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarbellBranch {
    /// Level of the bridge node `j` of clique B, in units of `√r`.
    pub bridge: i8,
    /// `±V_A / N`: signed share of clique A away from `x_i`.
    pub v_a: f64,
    /// `±V_B / N`: signed share of clique B away from `x_j`.
    pub v_b: f64,
}

impl BarbellBranch {
    /// `(⟨x⟩_B - ⟨x⟩_A) / √r`.
    pub fn mean_difference(&self) -> f64 {
        f64::from(self.bridge) + self.v_b - self.v_a
    }
}

/// Numerically stable detailed-balance states of `barbell(n)` with the
/// bridge oriented upwards (`x_j ≥ x_i`).
///
/// In clique A, `V_A` nodes other than `i` sit at `σ_A √r` and the rest at
/// `x_i`; likewise for clique B around `x_j`.
pub fn stable_barbell_branches(n: usize) -> Result<Vec<BarbellBranch>> {
    let g = generators::barbell(n);
    let (bi, bj) = generators::barbell_bridge(n);
    let nf = n as f64;
    let mut out = Vec::new();
    for bridge in [0i8, 1] {
        for va in 0..n {
            for &sa in signs_for(va) {
                for vb in 0..n {
                    for &sb in signs_for(vb) {
                        // levels: clique A nodes other than i are 0..n-1 without bi = n-1
                        let mut level = vec![0i64; 2 * n];
                        for (k, node) in (0..n).filter(|&x| x != bi).enumerate() {
                            if k < va {
                                level[node] = i64::from(sa);
                            }
                        }
                        level[bj] = i64::from(bridge);
                        for (k, node) in (n..2 * n).filter(|&x| x != bj).enumerate() {
                            level[node] = i64::from(bridge) + if k < vb { i64::from(sb) } else { 0 };
                        }
                        let symbols = g
                            .edges()
                            .iter()
                            .map(|&(i, j)| (level[i] - level[j]) as i8)
                            .collect();
                        if verdict_of(symbols, &g)? == Verdict::Stable {
                            out.push(BarbellBranch {
                                bridge,
                                v_a: f64::from(sa) * va as f64 / nf,
                                v_b: f64::from(sb) * vb as f64 / nf,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn signs_for(v: usize) -> &'static [i8] {
    if v == 0 {
        &[1]
    } else {
        &[1, -1]
    }
}

/// Bifurcation data for a named family over the grid `rs`.
///
/// - `k2`: `r,difference,stable` with every stationary link difference and
///   a 0/1 stability flag.
/// - `complete`: `r,v,mean_state`, rows `±v√r` for each stable `V` of `K_n`
///   (mean state with the remaining `N - V` nodes held at 0).
/// - `barbell`: `r,v_a,v_b,mean_difference` for each stable configuration.
///
/// For `r ≤ 0` every family reports only the consensus branch.
pub fn sweep(family: &str, n: usize, rs: &[f64]) -> Result<SweepTable> {
    match family {
        "k2" => Ok(sweep_k2(rs)),
        "complete" => {
            if n < 2 {
                return Err(Error::EmptyGraph(n));
            }
            let stable = stable_complete_groups(n)?;
            let mut rows = Vec::new();
            for &r in rs {
                if r <= 0.0 {
                    rows.push(vec![r, 0.0, 0.0]);
                    continue;
                }
                for &v in &stable {
                    let share = v as f64 / n as f64;
                    for sign in [1.0, -1.0] {
                        rows.push(vec![r, share, sign * share * r.sqrt()]);
                    }
                }
            }
            Ok(SweepTable {
                columns: vec!["r", "v", "mean_state"],
                rows,
            })
        }
        "barbell" => {
            if n < 2 {
                return Err(Error::EmptyGraph(n));
            }
            let branches = stable_barbell_branches(n)?;
            let mut rows = Vec::new();
            for &r in rs {
                if r <= 0.0 {
                    rows.push(vec![r, 0.0, 0.0, 0.0]);
                    continue;
                }
                for b in &branches {
                    rows.push(vec![r, b.v_a, b.v_b, b.mean_difference() * r.sqrt()]);
                }
            }
            Ok(SweepTable {
                columns: vec!["r", "v_a", "v_b", "mean_difference"],
                rows,
            })
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

fn sweep_k2(rs: &[f64]) -> SweepTable {
    let mut rows = Vec::new();
    for &r in rs {
        if r <= 0.0 {
            rows.push(vec![r, 0.0, 1.0]);
        } else {
            rows.push(vec![r, 0.0, 0.0]);
            rows.push(vec![r, r.sqrt(), 1.0]);
            rows.push(vec![r, -r.sqrt(), 1.0]);
        }
    }
    SweepTable {
        columns: vec!["r", "difference", "stable"],
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::classify_complete;

    #[test]
    fn grid() {
        assert_eq!(linear_grid(-1.0, 1.0, 3).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(linear_grid(2.0, 5.0, 1).unwrap(), vec![2.0]);
        assert!(linear_grid(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn complete_groups_match_closed_form() {
        for n in [3, 6, 9, 10] {
            let expected: Vec<usize> = (0..=n).filter(|&v| classify_complete(n, v) == Verdict::Stable).collect();
            assert_eq!(stable_complete_groups(n).unwrap(), expected, "N={n}");
        }
    }

    #[test]
    fn k2_branches() {
        let t = sweep("k2", 0, &[-1.0, 4.0]).unwrap();
        assert_eq!(t.rows, vec![vec![-1.0, 0.0, 1.0], vec![4.0, 0.0, 0.0], vec![4.0, 2.0, 1.0], vec![4.0, -2.0, 1.0]]);
    }

    #[test]
    fn small_barbell_has_forced_bridge_dissensus() {
        let branches = stable_barbell_branches(6).unwrap();
        assert!(!branches.is_empty());
        assert!(branches.iter().all(|b| b.bridge == 1));
        let mean = branches.iter().map(BarbellBranch::mean_difference).sum::<f64>() / branches.len() as f64;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_family() {
        assert_eq!(sweep("torus", 4, &[1.0]).unwrap_err(), Error::UnknownFamily("torus".into()));
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        sweep("complete", 3, &[-0.5]).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("r,v,mean_state"));
        assert_eq!(text.lines().count(), 2);
    }
}
