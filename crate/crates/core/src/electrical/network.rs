//! Linear RLC network in the synchronous dq frame.
//!
//! One topology description feeds two realizations: a state-space model
//! (branch inductor currents and node capacitor voltages as states, ideal
//! voltage sources as inputs) for time-domain simulation, and a nodal
//! admittance model for phasor solutions and impedance scans.
//!
//! Per-unit dynamics with reactances `x` and susceptances `b` given at the
//! base frequency, frame speed `w` in pu:
//!
//! ```text
//! (x / wb) di/dt  = v_from - v_to - r i - j w x i
//! (b / wb) dvc/dt = sum(i_in) - j w b vc
//! ```
//!
//! A node may carry a resistor in series with its capacitor; its terminal
//! voltage is then `vc + rc * sum(i_in)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const J: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Node(usize),
    Source(usize),
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Grid,
    Cable,
    Transformer,
    Collector,
    /// Converter filter inductor of unit `k`.
    Filter(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub name: String,
    pub kind: BranchKind,
    pub from: Terminal,
    pub to: Terminal,
    pub r: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    /// Shunt susceptance at base frequency [pu].
    pub b: f64,
    /// Resistance in series with the shunt capacitor [pu].
    pub rc: f64,
    /// Unit whose converter filter owns the shunt, if any.
    pub owner: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub branches: Vec<Branch>,
    pub sources: Vec<String>,
}

/// How converters appear in a frequency scan.
#[derive(Debug, Clone, PartialEq)]
pub enum ConverterTermination {
    /// Filter inductor and filter capacitor removed.
    Open,
    /// Filter branch of unit `k` replaced by `z[k]` to ground, given at base
    /// frequency on the network base (reactance scales with frequency).
    Terminated(Vec<Complex64>),
}

impl Network {
    pub fn add_node(&mut self, name: impl Into<String>, b: f64, rc: f64, owner: Option<usize>) -> usize {
        self.nodes.push(Node {
            name: name.into(),
            b,
            rc,
            owner,
        });
        self.nodes.len() - 1
    }

    pub fn add_source(&mut self, name: impl Into<String>) -> usize {
        self.sources.push(name.into());
        self.sources.len() - 1
    }

    pub fn add_branch(
        &mut self,
        name: impl Into<String>,
        kind: BranchKind,
        from: Terminal,
        to: Terminal,
        r: f64,
        x: f64,
    ) -> usize {
        self.branches.push(Branch {
            name: name.into(),
            kind,
            from,
            to,
            r,
            x,
        });
        self.branches.len() - 1
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn node_names(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.name.as_str()).collect()
    }

    /// Sign of branch current entering `node`: +1 when the branch ends there.
    fn incidence(branch: &Branch, node: usize) -> f64 {
        let mut s = 0.0;
        if branch.to == Terminal::Node(node) {
            s += 1.0;
        }
        if branch.from == Terminal::Node(node) {
            s -= 1.0;
        }
        s
    }

    fn node_shunt_admittance(node: &Node, freq_ratio: f64) -> Complex64 {
        if node.b == 0.0 {
            return ZERO;
        }
        let zc = Complex64::new(node.rc, 0.0) + ONE / (J * node.b * freq_ratio);
        ONE / zc
    }

    /// Solve the phasor network at `freq_ratio` times base frequency with
    /// the given source voltages. Returns node terminal voltages and branch
    /// currents.
    pub fn solve_phasor(&self, sources: &[Complex64], freq_ratio: f64) -> Result<PhasorSolution> {
        if sources.len() != self.sources.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} source voltages, got {}",
                self.sources.len(),
                sources.len()
            )));
        }
        let n = self.nodes.len();
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        let mut inj = DVector::<Complex64>::zeros(n);
        for (k, node) in self.nodes.iter().enumerate() {
            y[(k, k)] += Self::node_shunt_admittance(node, freq_ratio);
        }
        for br in &self.branches {
            let yb = ONE / Complex64::new(br.r, br.x * freq_ratio);
            stamp_branch(&mut y, &mut inj, br, yb, sources);
        }
        let lu = y.lu();
        let v = lu
            .solve(&inj)
            .ok_or_else(|| Error::InvalidParameter("singular network admittance matrix".into()))?;
        let v: Vec<Complex64> = v.iter().copied().collect();
        let term = |t: Terminal| match t {
            Terminal::Node(k) => v[k],
            Terminal::Source(s) => sources[s],
            Terminal::Ground => ZERO,
        };
        let currents = self
            .branches
            .iter()
            .map(|br| (term(br.from) - term(br.to)) / Complex64::new(br.r, br.x * freq_ratio))
            .collect();
        Ok(PhasorSolution {
            node_voltages: v,
            branch_currents: currents,
        })
    }

    /// Driving-point impedance at `node` with all sources shorted.
    ///
    /// Returns `None` when the admittance matrix is singular at this
    /// frequency.
    pub fn driving_point_impedance(
        &self,
        node: usize,
        freq_ratio: f64,
        termination: &ConverterTermination,
    ) -> Option<Complex64> {
        let n = self.nodes.len();
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        let mut dummy = DVector::<Complex64>::zeros(n);
        let zero_sources = vec![ZERO; self.sources.len()];
        for (k, nd) in self.nodes.iter().enumerate() {
            if nd.owner.is_some() && *termination == ConverterTermination::Open {
                continue;
            }
            y[(k, k)] += Self::node_shunt_admittance(nd, freq_ratio);
        }
        for br in &self.branches {
            let (r, x) = match (br.kind, termination) {
                (BranchKind::Filter(_), ConverterTermination::Open) => continue,
                (BranchKind::Filter(u), ConverterTermination::Terminated(z)) => match z.get(u) {
                    Some(z) => (z.re, z.im),
                    None => continue,
                },
                _ => (br.r, br.x),
            };
            let yb = ONE / Complex64::new(r, x * freq_ratio);
            stamp_branch(&mut y, &mut dummy, br, yb, &zero_sources);
        }
        let mut rhs = DVector::<Complex64>::zeros(n);
        rhs[node] = ONE;
        let v = y.lu().solve(&rhs)?;
        let z = v[node];
        if z.is_finite() && z.norm() < 1e12 {
            Some(z)
        } else {
            None
        }
    }
}

fn stamp_branch(
    y: &mut DMatrix<Complex64>,
    inj: &mut DVector<Complex64>,
    br: &Branch,
    yb: Complex64,
    sources: &[Complex64],
) {
    match (br.from, br.to) {
        (Terminal::Node(a), Terminal::Node(b)) => {
            y[(a, a)] += yb;
            y[(b, b)] += yb;
            y[(a, b)] -= yb;
            y[(b, a)] -= yb;
        }
        (Terminal::Node(a), other) | (other, Terminal::Node(a)) => {
            y[(a, a)] += yb;
            if let Terminal::Source(s) = other {
                inj[a] += yb * sources[s];
            }
        }
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasorSolution {
    pub node_voltages: Vec<Complex64>,
    pub branch_currents: Vec<Complex64>,
}

/// Continuous-time state-space realization `x' = A x + B u`.
///
/// State layout: all branch currents (branch order), then all node
/// capacitor voltages (node order).
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
    /// Terminal voltage of each node as a row over the state vector.
    node_voltage: DMatrix<Complex64>,
    n_branches: usize,
    omega_base: f64,
    labels: Vec<String>,
    network: Network,
}

impl StateSpace {
    pub fn new(net: &Network, omega_base: f64, omega_frame: f64) -> Result<Self> {
        let nb = net.branches.len();
        let nn = net.nodes.len();
        let n = nb + nn;
        let m = net.sources.len();
        for node in &net.nodes {
            if !(node.b > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "node {} has no shunt capacitance; dynamic model needs b > 0",
                    node.name
                )));
            }
        }
        for br in &net.branches {
            if !(br.x > 0.0) || br.r < 0.0 {
                return Err(Error::InvalidParameter(format!("branch {} needs x > 0, r >= 0", br.name)));
            }
        }

        let mut vnode = DMatrix::<Complex64>::zeros(nn, n);
        for (k, node) in net.nodes.iter().enumerate() {
            vnode[(k, nb + k)] = ONE;
            if node.rc != 0.0 {
                for (j, br) in net.branches.iter().enumerate() {
                    let s = Network::incidence(br, k);
                    if s != 0.0 {
                        vnode[(k, j)] += Complex64::new(node.rc * s, 0.0);
                    }
                }
            }
        }

        let mut a = DMatrix::<Complex64>::zeros(n, n);
        let mut b = DMatrix::<Complex64>::zeros(n, m);
        for (j, br) in net.branches.iter().enumerate() {
            let g = omega_base / br.x;
            let mut add_terminal = |t: Terminal, sign: f64| match t {
                Terminal::Node(k) => {
                    for c in 0..n {
                        let v = vnode[(k, c)];
                        if v != ZERO {
                            a[(j, c)] += v * (sign * g);
                        }
                    }
                }
                Terminal::Source(s) => b[(j, s)] += Complex64::new(sign * g, 0.0),
                Terminal::Ground => {}
            };
            add_terminal(br.from, 1.0);
            add_terminal(br.to, -1.0);
            a[(j, j)] += Complex64::new(-g * br.r, -omega_base * omega_frame);
        }
        for (k, node) in net.nodes.iter().enumerate() {
            let row = nb + k;
            let g = omega_base / node.b;
            for (j, br) in net.branches.iter().enumerate() {
                let s = Network::incidence(br, k);
                if s != 0.0 {
                    a[(row, j)] += Complex64::new(g * s, 0.0);
                }
            }
            a[(row, row)] += Complex64::new(0.0, -omega_base * omega_frame);
        }

        let labels = net
            .branches
            .iter()
            .map(|b| format!("i[{}]", b.name))
            .chain(net.nodes.iter().map(|n| format!("v[{}]", n.name)))
            .collect();
        Ok(Self {
            a,
            b,
            node_voltage: vnode,
            n_branches: nb,
            omega_base,
            labels,
            network: net.clone(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn branch_state(&self, branch: usize) -> usize {
        branch
    }

    pub fn node_state(&self, node: usize) -> usize {
        self.n_branches + node
    }

    /// Terminal voltage of `node` for state `x`.
    pub fn node_voltage(&self, x: &[Complex64], node: usize) -> Complex64 {
        let row = self.node_voltage.row(node);
        let vc = x[self.n_branches + node];
        let nd = &self.network.nodes[node];
        if nd.rc == 0.0 {
            return vc;
        }
        let mut v = ZERO;
        for (c, coef) in row.iter().enumerate() {
            if *coef != ZERO {
                v += coef * x[c];
            }
        }
        v
    }

    /// Current flowing into the shunt of `node`.
    pub fn shunt_current(&self, x: &[Complex64], node: usize) -> Complex64 {
        self.network
            .branches
            .iter()
            .enumerate()
            .map(|(j, br)| x[j] * Network::incidence(br, node))
            .sum()
    }

    /// Steady state for constant inputs: solves `A x = -B u`.
    pub fn steady_state(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let u = DVector::from_column_slice(u);
        let rhs = -(&self.b * u);
        let x = self
            .a
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidParameter("state matrix is singular".into()))?;
        Ok(x.iter().copied().collect())
    }

    /// Magnetic plus electric stored energy [pu * s].
    pub fn stored_energy(&self, x: &[Complex64]) -> f64 {
        let net = &self.network;
        let wb = self.omega_base;
        let mag: f64 = net
            .branches
            .iter()
            .enumerate()
            .map(|(j, br)| 0.5 * br.x / wb * x[j].norm_sqr())
            .sum();
        let ele: f64 = net
            .nodes
            .iter()
            .enumerate()
            .map(|(k, nd)| 0.5 * nd.b / wb * x[self.n_branches + k].norm_sqr())
            .sum();
        mag + ele
    }

    /// Resistive losses for state `x` [pu].
    pub fn losses(&self, x: &[Complex64]) -> f64 {
        let net = &self.network;
        let series: f64 = net
            .branches
            .iter()
            .enumerate()
            .map(|(j, br)| br.r * x[j].norm_sqr())
            .sum();
        let shunt: f64 = net
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, nd)| nd.rc != 0.0)
            .map(|(k, nd)| nd.rc * self.shunt_current(x, k).norm_sqr())
            .sum();
        series + shunt
    }

    /// Power delivered by each source for state `x` and source voltages `u`.
    pub fn source_powers(&self, x: &[Complex64], u: &[Complex64]) -> Vec<f64> {
        let mut p = vec![0.0; u.len()];
        for (j, br) in self.network.branches.iter().enumerate() {
            if let Terminal::Source(s) = br.from {
                p[s] += (u[s] * x[j].conj()).re;
            }
            if let Terminal::Source(s) = br.to {
                p[s] -= (u[s] * x[j].conj()).re;
            }
        }
        p
    }

    /// Energy-balance residual of one trapezoidal step:
    /// `sum(P_sources) - losses - dE/dt`, all at step midpoint.
    pub fn step_energy_residual(&self, x0: &[Complex64], x1: &[Complex64], u_avg: &[Complex64], dt: f64) -> f64 {
        let mid: Vec<Complex64> = x0.iter().zip(x1).map(|(a, b)| 0.5 * (a + b)).collect();
        let p_in: f64 = self.source_powers(&mid, u_avg).iter().sum();
        let de = (self.stored_energy(x1) - self.stored_energy(x0)) / dt;
        p_in - self.losses(&mid) - de
    }
}

/// Trapezoidal discretization of a [`StateSpace`] at a fixed step.
#[derive(Debug, Clone)]
pub struct DiscretePlant {
    pub ss: StateSpace,
    pub dt: f64,
    m: Vec<Complex64>,
    nmat: Vec<Complex64>,
    n: usize,
    n_in: usize,
}

/// Norm beyond which a state is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e3;

impl DiscretePlant {
    pub fn new(ss: StateSpace, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt}")));
        }
        let n = ss.n_states();
        let n_in = ss.b.ncols();
        let id = DMatrix::<Complex64>::identity(n, n);
        let h2 = Complex64::new(0.5 * dt, 0.0);
        let lhs = &id - &ss.a * h2;
        let rhs = &id + &ss.a * h2;
        let lu = lhs.lu();
        let m = lu
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidParameter("singular trapezoidal matrix".into()))?;
        let nm = lu
            .solve(&(&ss.b * Complex64::new(dt, 0.0)))
            .ok_or_else(|| Error::InvalidParameter("singular trapezoidal matrix".into()))?;
        let to_rows = |mat: &DMatrix<Complex64>| {
            let mut v = Vec::with_capacity(mat.nrows() * mat.ncols());
            for r in 0..mat.nrows() {
                for c in 0..mat.ncols() {
                    v.push(mat[(r, c)]);
                }
            }
            v
        };
        Ok(Self {
            m: to_rows(&m),
            nmat: to_rows(&nm),
            n,
            n_in,
            ss,
            dt,
        })
    }

    /// Advance `x` by one step with inputs `u0` at the start and `u1` at the
    /// end of the step.
    pub fn step(&self, x: &[Complex64], u0: &[Complex64], u1: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let uavg: Vec<Complex64> = u0.iter().zip(u1).map(|(a, b)| 0.5 * (a + b)).collect();
        for (r, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.m[r * n..(r + 1) * n];
            let mut acc = ZERO;
            for (a, xv) in row.iter().zip(x) {
                acc += a * xv;
            }
            let nrow = &self.nmat[r * self.n_in..(r + 1) * self.n_in];
            for (a, uv) in nrow.iter().zip(&uavg) {
                acc += a * uv;
            }
            *o = acc;
        }
    }

    /// First state whose magnitude exceeds the divergence limit or is not finite.
    pub fn diverged_state(&self, x: &[Complex64]) -> Option<usize> {
        x.iter()
            .position(|v| !v.is_finite() || v.norm() > DIVERGENCE_LIMIT)
    }
}
