//! Collocation/quadrature node tables on the reference triangle.
//!
//! The bundled table provides, for each order p, a symmetric set of
//! n = p(p+1)/2 strictly interior points that is unisolvent for total-degree
//! p-1 interpolation and whose weights form a quadrature rule exact well
//! beyond degree p (see the data file header). A different table in the same
//! format can be substituted at runtime (the `rrq` crate honors the
//! `RRQ_NODE_TABLE` environment variable).

use alloc::string::String;
use alloc::vec::Vec;

/// Node rule for one order.
#[derive(Clone, Debug)]
pub struct NodeRule {
    pub p: usize,
    pub n: usize,
    pub degree: usize,
    pub xy: Vec<[f64; 2]>,
    pub w: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct NodeTable {
    rules: Vec<NodeRule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeTableError(pub String);

const BUILTIN: &str = include_str!("../data/triangle_nodes.txt");

impl NodeTable {
    /// Parse a table in the bundled text format.
    pub fn parse(text: &str) -> Result<NodeTable, NodeTableError> {
        let mut rules: Vec<NodeRule> = Vec::new();
        let mut lines = text.lines().filter(|l| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        while let Some(header) = lines.next() {
            let mut it = header.split_whitespace();
            let bad = || NodeTableError(String::from("malformed header line"));
            if it.next() != Some("p") {
                return Err(bad());
            }
            let p: usize = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if it.next() != Some("n") {
                return Err(bad());
            }
            let n: usize = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if it.next() != Some("degree") {
                return Err(bad());
            }
            let degree: usize = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if n != p * (p + 1) / 2 {
                return Err(NodeTableError(String::from("node count is not p(p+1)/2")));
            }
            let mut xy = Vec::with_capacity(n);
            let mut w = Vec::with_capacity(n);
            for _ in 0..n {
                let row = lines
                    .next()
                    .ok_or_else(|| NodeTableError(String::from("truncated node block")))?;
                let vals: Vec<f64> = row
                    .split_whitespace()
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| NodeTableError(String::from("bad node line")))?;
                if vals.len() != 3 {
                    return Err(NodeTableError(String::from("node line needs x y w")));
                }
                let bary = 1.0 - vals[0] - vals[1];
                if vals[0] <= 0.0 || vals[1] <= 0.0 || bary <= 0.0 || vals[2] <= 0.0 {
                    return Err(NodeTableError(String::from(
                        "node not strictly interior or weight not positive",
                    )));
                }
                xy.push([vals[0], vals[1]]);
                w.push(vals[2]);
            }
            let wsum: f64 = w.iter().sum();
            if (wsum - 0.5).abs() > 1e-12 {
                return Err(NodeTableError(String::from("weights do not sum to 1/2")));
            }
            rules.push(NodeRule { p, n, degree, xy, w });
        }
        if rules.is_empty() {
            return Err(NodeTableError(String::from("empty table")));
        }
        Ok(NodeTable { rules })
    }

    /// The table compiled into the crate.
    pub fn builtin() -> NodeTable {
        NodeTable::parse(BUILTIN).expect("bundled node table is valid")
    }

    pub fn rule(&self, p: usize) -> Option<&NodeRule> {
        self.rules.iter().find(|r| r.p == p)
    }

    pub fn max_p(&self) -> usize {
        self.rules.iter().map(|r| r.p).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses_and_is_consistent() {
        let t = NodeTable::builtin();
        assert!(t.max_p() >= 10);
        let r1 = t.rule(1).unwrap();
        assert_eq!(r1.n, 1);
        assert!((r1.xy[0][0] - 1.0 / 3.0).abs() < 1e-14);
        for p in 1..=t.max_p() {
            let r = t.rule(p).unwrap();
            assert_eq!(r.n, p * (p + 1) / 2);
            assert!(r.degree >= p.saturating_sub(1));
        }
    }

    #[test]
    fn quadrature_degree_is_honored() {
        // exactness on monomials x^a y^b up to the declared degree:
        // integral over the reference triangle is a! b! / (a+b+2)!
        let t = NodeTable::builtin();
        for p in [2usize, 4, 6, 8] {
            let r = t.rule(p).unwrap();
            for a in 0..=r.degree {
                for b in 0..=(r.degree - a) {
                    let quad: f64 = r
                        .xy
                        .iter()
                        .zip(r.w.iter())
                        .map(|(xy, w)| w * libm::pow(xy[0], a as f64) * libm::pow(xy[1], b as f64))
                        .sum();
                    let mut exact = 1.0;
                    for q in 1..=a {
                        exact *= q as f64;
                    }
                    for q in 1..=b {
                        exact *= q as f64;
                    }
                    for q in 1..=(a + b + 2) {
                        exact /= q as f64;
                    }
                    assert!(
                        (quad - exact).abs() < 1e-14,
                        "p={} a={} b={} quad={} exact={}",
                        p,
                        a,
                        b,
                        quad,
                        exact
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(NodeTable::parse("").is_err());
        assert!(NodeTable::parse("p 2 n 4 degree 2\n").is_err());
        assert!(NodeTable::parse("p 1 n 1 degree 1\n0.9 0.9 0.5\n").is_err());
    }
}
