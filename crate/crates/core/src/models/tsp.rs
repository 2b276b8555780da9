//! Travelling salesman as a permutation-matrix target.
//!
//! State is an `n x n` binary matrix flattened row-major, row `t` = tour
//! position, column `c` = city. Energy is the negative closed-tour length;
//! off the lattice the matrix is read as a soft assignment.

use crate::domain::{DiscreteState, DomainSpec, EnergyModel, Structure};
use crate::error::{Error, Result};
use crate::samplers::proposal::permutation_columns;

const EIL14: &str = include_str!("../../data/eil14.tsp");

#[derive(Debug, Clone)]
pub struct TspModel {
    name: String,
    coords: Vec<(f64, f64)>,
    dist: Vec<f64>,
    spec: DomainSpec,
}

impl TspModel {
    pub fn from_coords(name: impl Into<String>, coords: Vec<(f64, f64)>) -> Result<Self> {
        let n = coords.len();
        if n < 3 {
            return Err(Error::param("coords", format!("need at least 3 cities, got {n}")));
        }
        if coords.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(Error::param("coords", "coordinates must be finite"));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
                dist[i * n + j] = dx.hypot(dy);
            }
        }
        Ok(Self {
            name: name.into(),
            coords,
            dist,
            spec: DomainSpec::binary(n * n),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_cities(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.num_cities() + b]
    }

    /// Closed-tour Euclidean length of a city ordering.
    pub fn tour_length(&self, tour: &[usize]) -> f64 {
        let n = tour.len();
        (0..n).map(|t| self.distance(tour[t], tour[(t + 1) % n])).sum()
    }

    /// City visited at each position, if the state is a permutation matrix.
    pub fn tour_from_state(&self, state: &[f64]) -> Result<Vec<usize>> {
        permutation_columns(state, self.num_cities())
            .ok_or_else(|| Error::Infeasible("not a permutation matrix".into()))
    }

    pub fn state_from_tour(&self, tour: &[usize]) -> Result<DiscreteState> {
        let n = self.num_cities();
        let mut seen = vec![false; n];
        if tour.len() != n || tour.iter().any(|&c| c >= n || std::mem::replace(&mut seen[c], true)) {
            return Err(Error::Infeasible(format!("{tour:?} is not a tour of {n} cities")));
        }
        let mut values = vec![0.0; n * n];
        for (t, &c) in tour.iter().enumerate() {
            values[t * n + c] = 1.0;
        }
        Ok(DiscreteState(values))
    }

    pub fn random_tour<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        use rand::seq::SliceRandom;
        let mut tour: Vec<usize> = (0..self.num_cities()).collect();
        tour.shuffle(rng);
        tour
    }
}

impl EnergyModel for TspModel {
    fn domain(&self) -> &DomainSpec {
        &self.spec
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let n = self.num_cities();
        assert_eq!(x.len(), n * n, "input length must match the domain");
        let mut total = 0.0;
        for t in 0..n {
            let row = &x[t * n..(t + 1) * n];
            let next = &x[((t + 1) % n) * n..((t + 1) % n + 1) * n];
            for (c, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let d = &self.dist[c * n..(c + 1) * n];
                total += p * d.iter().zip(next).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        -total
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.num_cities();
        assert_eq!(x.len(), n * n, "input length must match the domain");
        let mut grad = vec![0.0; n * n];
        for t in 0..n {
            let next = &x[((t + 1) % n) * n..((t + 1) % n + 1) * n];
            let prev = &x[((t + n - 1) % n) * n..((t + n - 1) % n + 1) * n];
            for c in 0..n {
                let d = &self.dist[c * n..(c + 1) * n];
                grad[t * n + c] = -d
                    .iter()
                    .zip(next.iter().zip(prev))
                    .map(|(dc, (a, b))| dc * (a + b))
                    .sum::<f64>();
            }
        }
        grad
    }

    fn structure(&self) -> Structure {
        Structure::Permutation {
            n: self.num_cities(),
        }
    }

    fn is_feasible(&self, x: &[f64]) -> bool {
        permutation_columns(x, self.num_cities()).is_some()
    }
}

/// Parses a TSPLIB instance with `EDGE_WEIGHT_TYPE: EUC_2D` node coordinates.
pub fn tsp_from_tsplib(text: &str) -> Result<TspModel> {
    let err = |line: usize, reason: &str| Error::Tsplib {
        line,
        reason: reason.to_string(),
    };
    let mut name = None;
    let mut dimension = None;
    let mut weight_type = None;
    let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut in_coords = false;
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(line_no, "expected `<index> <x> <y>`"));
            }
            let idx: usize = fields[0].parse().map_err(|_| err(line_no, "bad node index"))?;
            let x: f64 = fields[1].parse().map_err(|_| err(line_no, "bad x coordinate"))?;
            let y: f64 = fields[2].parse().map_err(|_| err(line_no, "bad y coordinate"))?;
            let n = coords.len();
            if idx == 0 || idx > n {
                return Err(err(line_no, &format!("node index {idx} outside 1..={n}")));
            }
            if coords[idx - 1].replace((x, y)).is_some() {
                return Err(err(line_no, &format!("node {idx} listed twice")));
            }
            continue;
        }
        if line == "NODE_COORD_SECTION" {
            let n = dimension.ok_or_else(|| err(line_no, "NODE_COORD_SECTION before DIMENSION"))?;
            match weight_type {
                Some("EUC_2D") => {}
                Some(_) => unreachable!(),
                None => return Err(err(line_no, "NODE_COORD_SECTION before EDGE_WEIGHT_TYPE")),
            }
            coords = vec![None; n];
            in_coords = true;
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err(line_no, &format!("unrecognized line `{line}`")))?;
        let value = value.trim();
        match key.trim() {
            "NAME" => name = Some(value.to_string()),
            "TYPE" => {
                if value != "TSP" {
                    return Err(err(line_no, &format!("unsupported TYPE `{value}`")));
                }
            }
            "DIMENSION" => {
                let n: usize = value.parse().map_err(|_| err(line_no, "DIMENSION is not an integer"))?;
                if n < 3 {
                    return Err(err(line_no, "DIMENSION must be at least 3"));
                }
                dimension = Some(n);
            }
            "EDGE_WEIGHT_TYPE" => {
                if value != "EUC_2D" {
                    return Err(err(line_no, &format!("unsupported EDGE_WEIGHT_TYPE `{value}`, only EUC_2D")));
                }
                weight_type = Some("EUC_2D");
            }
            "COMMENT" => {}
            other => return Err(err(line_no, &format!("unknown header field `{other}`"))),
        }
    }

    if !in_coords {
        return Err(err(last_line, "missing NODE_COORD_SECTION"));
    }
    let n = coords.len();
    let coords: Vec<(f64, f64)> = coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| err(last_line, &format!("dimension mismatch: node {} missing of {n}", i + 1))))
        .collect::<Result<_>>()?;
    let name = name.ok_or_else(|| err(last_line, "missing NAME"))?;
    TspModel::from_coords(name, coords)
}

/// The 14-city instance bundled with the crate.
pub fn eil14() -> TspModel {
    tsp_from_tsplib(EIL14).expect("bundled instance parses")
}
