//! Sequential value networks with hand-written reverse mode.
//!
//! All weights live in one flat vector. Recurrent cells have no bias terms; the private-card
//! one-hot present in every cell plays that role.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use rand::Rng;

use crate::error::ConfigError;

use super::features::FeatureSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Rnn,
    Gru,
    Lstm,
}

impl CellKind {
    fn gates(self) -> usize {
        match self {
            CellKind::Rnn => 1,
            CellKind::Gru => 3,
            CellKind::Lstm => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// A recurrent cell per action; with `attention` the readout is `Σ_j α_j e_j` with
    /// `α_j = ReLU(w^a · e_j + b^a)`, otherwise the last embedding.
    Recurrent { cell: CellKind, attention: bool },
    /// One dense layer over the sequence zero-padded to `max_len` cells.
    Fc { max_len: usize },
}

impl Architecture {
    pub const LSTM_ATTENTION: Architecture = Architecture::Recurrent { cell: CellKind::Lstm, attention: true };
}

/// `lstm`, `gru` or `rnn` with an optional `-attention` suffix, or `fc`. The FC input length
/// is not part of the name; it is fixed by the game.
impl FromStr for Architecture {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "fc" {
            return Ok(Architecture::Fc { max_len: 0 });
        }
        let (cell, attention) = match s.strip_suffix("-attention") {
            Some(cell) => (cell, true),
            None => (s, false),
        };
        let cell = match cell {
            "rnn" => CellKind::Rnn,
            "gru" => CellKind::Gru,
            "lstm" => CellKind::Lstm,
            _ => return Err(ConfigError::invalid("arch", format!("unknown architecture `{}`", s))),
        };
        Ok(Architecture::Recurrent { cell, attention })
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Architecture::Fc { .. } => write!(f, "fc"),
            Architecture::Recurrent { cell, attention } => {
                let cell = match cell {
                    CellKind::Rnn => "rnn",
                    CellKind::Gru => "gru",
                    CellKind::Lstm => "lstm",
                };
                write!(f, "{}{}", cell, if attention { "-attention" } else { "" })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkShape {
    pub arch: Architecture,
    /// Feature width `W` of one cell.
    pub input: usize,
    /// Embedding size `E`.
    pub embed: usize,
    /// Optional hidden value layer between the readout and the output.
    pub hidden: Option<usize>,
    /// Output width, `max_I |A(I)|`.
    pub output: usize,
}

/// Offsets of each weight block inside the flat parameter vector.
#[derive(Debug, Clone, Copy)]
struct Layout {
    cell: usize,
    attention: usize,
    hidden: usize,
    head: usize,
    end: usize,
}

impl NetworkShape {
    pub fn new(arch: Architecture, input: usize, embed: usize, output: usize) -> Self {
        Self { arch, input, embed, hidden: None, output }
    }

    pub fn with_hidden(mut self, hidden: usize) -> Self {
        self.hidden = Some(hidden);
        self
    }

    fn cell_weights(&self) -> usize {
        match self.arch {
            Architecture::Recurrent { cell, .. } => cell.gates() * self.embed * (self.input + self.embed),
            Architecture::Fc { max_len } => self.embed * self.input * max_len,
        }
    }

    fn readout_width(&self) -> usize {
        self.hidden.unwrap_or(self.embed)
    }

    fn layout(&self) -> Layout {
        let attention = self.cell_weights();
        let hidden = attention
            + match self.arch {
                Architecture::Recurrent { attention: true, .. } => self.embed + 1,
                _ => 0,
            };
        let head = hidden + self.hidden.map_or(0, |h| h * self.embed);
        let end = head + self.output * self.readout_width();
        Layout { cell: 0, attention, hidden, head, end }
    }

    pub fn num_params(&self) -> usize {
        self.layout().end
    }
}

/// `out = W x` for a row-major `rows × x.len()` matrix.
fn matvec<T: Float>(w: &[T], x: &[T], out: &mut [T]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        *o = w[r * cols..(r + 1) * cols].iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    }
}

/// `out += Wᵀ dy`.
fn matvec_t_acc<T: Float>(w: &[T], dy: &[T], out: &mut [T]) {
    let cols = out.len();
    for (r, &d) in dy.iter().enumerate() {
        if d == T::zero() {
            continue;
        }
        for (o, &a) in out.iter_mut().zip(&w[r * cols..(r + 1) * cols]) {
            *o = *o + a * d;
        }
    }
}

/// `g += dy xᵀ`.
fn outer_acc<T: Float>(g: &mut [T], dy: &[T], x: &[T]) {
    let cols = x.len();
    for (r, &d) in dy.iter().enumerate() {
        if d == T::zero() {
            continue;
        }
        for (gi, &xi) in g[r * cols..(r + 1) * cols].iter_mut().zip(x) {
            *gi = *gi + d * xi;
        }
    }
}

fn sigmoid<T: Float>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

fn relu<T: Float>(x: T) -> T {
    x.max(T::zero())
}

fn step<T: Float>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// Activations of one recurrent step, kept for the backward pass.
#[derive(Debug, Clone)]
struct StepCache<T> {
    /// `[x_l, e_{l-1}]`.
    z: Vec<T>,
    /// Gate activations in gate order (LSTM: f, i, C̃, o; GRU: update, reset, candidate).
    gates: Vec<Vec<T>>,
    /// GRU only: `[x_l, r ⊙ e_{l-1}]`.
    z_reset: Vec<T>,
    /// LSTM only: `C_{l-1}`, `tanh(C_l)`.
    c_prev: Vec<T>,
    c_tanh: Vec<T>,
    e: Vec<T>,
}

/// A forward pass with everything backward needs.
#[derive(Debug, Clone)]
pub struct Forward<T> {
    pub output: Vec<T>,
    steps: Vec<StepCache<T>>,
    /// FC only: the padded input.
    flat: Vec<T>,
    /// Attention pre-activations `w^a · e_j`.
    scores: Vec<T>,
    /// Readout before the value nonlinearity (`e^a_L`).
    readout: Vec<T>,
    /// Hidden value layer pre-activation.
    hidden_pre: Vec<T>,
    /// Input to the output matrix.
    head_in: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    shape: NetworkShape,
    params: Vec<T>,
}

impl<T: Float> Network<T> {
    pub fn zeros(shape: NetworkShape) -> Self {
        Self { shape, params: vec![T::zero(); shape.num_params()] }
    }

    /// Weights uniform in `[-1/√E, 1/√E]`.
    pub fn init<R: Rng + ?Sized>(shape: NetworkShape, rng: &mut R) -> Self {
        let bound = 1.0 / (shape.embed as f64).sqrt();
        let params = (0..shape.num_params())
            .map(|_| T::from(rng.gen_range(-bound..bound)).expect("finite"))
            .collect();
        let mut net = Self { shape, params };
        // A positive attention offset keeps every α_j alive at the start.
        if let Architecture::Recurrent { attention: true, .. } = shape.arch {
            let lay = shape.layout();
            net.params[lay.hidden - 1] = T::one();
        }
        net
    }

    pub fn from_params(shape: NetworkShape, params: Vec<T>) -> Self {
        assert_eq!(params.len(), shape.num_params(), "parameter count does not match the shape");
        Self { shape, params }
    }

    pub fn shape(&self) -> &NetworkShape {
        &self.shape
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    /// The output matrix, the last block of the parameter vector.
    pub fn head(&self) -> &[T] {
        let layout = self.shape.layout();
        &self.params[layout.head..layout.end]
    }

    pub fn head_mut(&mut self) -> &mut [T] {
        let layout = self.shape.layout();
        &mut self.params[layout.head..layout.end]
    }

    pub fn forward(&self, seq: &FeatureSequence<T>) -> Vec<T> {
        self.forward_cached(seq).output
    }

    pub fn forward_cached(&self, seq: &FeatureSequence<T>) -> Forward<T> {
        let s = &self.shape;
        assert_eq!(seq.width(), s.input, "feature width does not match the network");
        let lay = s.layout();
        let p = &self.params;
        let e_dim = s.embed;
        let mut steps = Vec::new();
        let mut flat = Vec::new();
        let mut scores = Vec::new();
        let mut readout = vec![T::zero(); e_dim];
        match s.arch {
            Architecture::Fc { max_len } => {
                assert!(seq.len() <= max_len, "sequence longer than the FC input");
                flat = seq.as_slice().to_vec();
                flat.resize(max_len * s.input, T::zero());
                matvec(&p[lay.cell..lay.attention], &flat, &mut readout);
            }
            Architecture::Recurrent { cell, attention } => {
                let zw = s.input + e_dim;
                let block = e_dim * zw;
                let w = |g: usize| &p[lay.cell + g * block..lay.cell + (g + 1) * block];
                let mut e_prev = vec![T::zero(); e_dim];
                let mut c_prev = vec![T::zero(); e_dim];
                for l in 0..seq.len() {
                    let mut z = Vec::with_capacity(zw);
                    z.extend_from_slice(seq.cell(l));
                    z.extend_from_slice(&e_prev);
                    let mut cache = StepCache {
                        z,
                        gates: Vec::new(),
                        z_reset: Vec::new(),
                        c_prev: Vec::new(),
                        c_tanh: Vec::new(),
                        e: vec![T::zero(); e_dim],
                    };
                    match cell {
                        CellKind::Rnn => {
                            matvec(w(0), &cache.z, &mut cache.e);
                            cache.e.iter_mut().for_each(|v| *v = v.tanh());
                        }
                        CellKind::Lstm => {
                            let mut gates = vec![vec![T::zero(); e_dim]; 4];
                            for (g, out) in gates.iter_mut().enumerate() {
                                matvec(w(g), &cache.z, out);
                                for v in out.iter_mut() {
                                    *v = if g == 2 { v.tanh() } else { sigmoid(*v) };
                                }
                            }
                            let mut c = vec![T::zero(); e_dim];
                            let mut c_tanh = vec![T::zero(); e_dim];
                            for k in 0..e_dim {
                                c[k] = gates[0][k] * c_prev[k] + gates[1][k] * gates[2][k];
                                c_tanh[k] = c[k].tanh();
                                cache.e[k] = gates[3][k] * c_tanh[k];
                            }
                            cache.gates = gates;
                            cache.c_prev = std::mem::replace(&mut c_prev, c);
                            cache.c_tanh = c_tanh;
                        }
                        CellKind::Gru => {
                            let mut update = vec![T::zero(); e_dim];
                            let mut reset = vec![T::zero(); e_dim];
                            matvec(w(0), &cache.z, &mut update);
                            matvec(w(1), &cache.z, &mut reset);
                            update.iter_mut().for_each(|v| *v = sigmoid(*v));
                            reset.iter_mut().for_each(|v| *v = sigmoid(*v));
                            let mut z_reset = seq.cell(l).to_vec();
                            z_reset.extend(e_prev.iter().zip(&reset).map(|(&h, &r)| h * r));
                            let mut cand = vec![T::zero(); e_dim];
                            matvec(w(2), &z_reset, &mut cand);
                            cand.iter_mut().for_each(|v| *v = v.tanh());
                            for k in 0..e_dim {
                                cache.e[k] = (T::one() - update[k]) * cand[k] + update[k] * e_prev[k];
                            }
                            cache.gates = vec![update, reset, cand];
                            cache.z_reset = z_reset;
                        }
                    }
                    e_prev.clone_from(&cache.e);
                    steps.push(cache);
                }
                if attention {
                    let wa = &p[lay.attention..lay.attention + e_dim];
                    let ba = p[lay.attention + e_dim];
                    for st in &steps {
                        let score = wa.iter().zip(&st.e).fold(ba, |acc, (&a, &b)| acc + a * b);
                        scores.push(score);
                        let alpha = relu(score);
                        for (r, &v) in readout.iter_mut().zip(&st.e) {
                            *r = *r + alpha * v;
                        }
                    }
                } else {
                    readout.clone_from(&e_prev);
                }
            }
        }
        let activated: Vec<T> = readout.iter().map(|&v| relu(v)).collect();
        let (hidden_pre, head_in) = match s.hidden {
            Some(h) => {
                let mut pre = vec![T::zero(); h];
                matvec(&p[lay.hidden..lay.head], &activated, &mut pre);
                let act = pre.iter().map(|&v| relu(v)).collect();
                (pre, act)
            }
            None => (Vec::new(), activated),
        };
        let mut output = vec![T::zero(); s.output];
        matvec(&p[lay.head..lay.end], &head_in, &mut output);
        Forward { output, steps, flat, scores, readout, hidden_pre, head_in }
    }

    /// Adds `∂(dyᵀ y)/∂θ` to `grad`, where `y` is the output recorded in `fwd`.
    pub fn backward(&self, fwd: &Forward<T>, dy: &[T], grad: &mut [T]) {
        let s = &self.shape;
        let lay = s.layout();
        let p = &self.params;
        assert_eq!(grad.len(), p.len());
        assert_eq!(dy.len(), s.output);
        let e_dim = s.embed;

        outer_acc(&mut grad[lay.head..lay.end], dy, &fwd.head_in);
        let mut d_head_in = vec![T::zero(); s.readout_width()];
        matvec_t_acc(&p[lay.head..lay.end], dy, &mut d_head_in);
        let d_activated = match s.hidden {
            Some(_) => {
                let d_pre: Vec<T> = d_head_in.iter().zip(&fwd.hidden_pre).map(|(&d, &v)| d * step(v)).collect();
                let activated: Vec<T> = fwd.readout.iter().map(|&v| relu(v)).collect();
                outer_acc(&mut grad[lay.hidden..lay.head], &d_pre, &activated);
                let mut d = vec![T::zero(); e_dim];
                matvec_t_acc(&p[lay.hidden..lay.head], &d_pre, &mut d);
                d
            }
            None => d_head_in,
        };
        let d_readout: Vec<T> = d_activated.iter().zip(&fwd.readout).map(|(&d, &v)| d * step(v)).collect();

        let (cell, attention) = match s.arch {
            Architecture::Fc { .. } => {
                outer_acc(&mut grad[lay.cell..lay.attention], &d_readout, &fwd.flat);
                return;
            }
            Architecture::Recurrent { cell, attention } => (cell, attention),
        };

        // Gradient reaching each e_j directly from the readout.
        let len = fwd.steps.len();
        let mut d_e_direct = vec![vec![T::zero(); e_dim]; len];
        if attention {
            let wa: Vec<T> = p[lay.attention..lay.attention + e_dim].to_vec();
            for (j, st) in fwd.steps.iter().enumerate() {
                let alpha = relu(fwd.scores[j]);
                let d_alpha = d_readout.iter().zip(&st.e).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                let d_score = d_alpha * step(fwd.scores[j]);
                grad[lay.attention + e_dim] = grad[lay.attention + e_dim] + d_score;
                for k in 0..e_dim {
                    grad[lay.attention + k] = grad[lay.attention + k] + d_score * st.e[k];
                    d_e_direct[j][k] = alpha * d_readout[k] + d_score * wa[k];
                }
            }
        } else {
            d_e_direct[len - 1].clone_from(&d_readout);
        }

        let zw = s.input + e_dim;
        let block = e_dim * zw;
        let mut d_e_next = vec![T::zero(); e_dim];
        let mut d_c_next = vec![T::zero(); e_dim];
        for l in (0..len).rev() {
            let st = &fwd.steps[l];
            let d_e: Vec<T> = d_e_direct[l].iter().zip(&d_e_next).map(|(&a, &b)| a + b).collect();
            let mut d_z = vec![T::zero(); zw];
            match cell {
                CellKind::Rnn => {
                    let d_pre: Vec<T> = d_e.iter().zip(&st.e).map(|(&d, &h)| d * (T::one() - h * h)).collect();
                    outer_acc(&mut grad[lay.cell..lay.cell + block], &d_pre, &st.z);
                    matvec_t_acc(&p[lay.cell..lay.cell + block], &d_pre, &mut d_z);
                }
                CellKind::Lstm => {
                    let (f, i, c_bar, o) = (&st.gates[0], &st.gates[1], &st.gates[2], &st.gates[3]);
                    let mut d_pre = vec![vec![T::zero(); e_dim]; 4];
                    for k in 0..e_dim {
                        let d_o = d_e[k] * st.c_tanh[k];
                        let d_c = d_c_next[k] + d_e[k] * o[k] * (T::one() - st.c_tanh[k] * st.c_tanh[k]);
                        d_pre[0][k] = d_c * st.c_prev[k] * f[k] * (T::one() - f[k]);
                        d_pre[1][k] = d_c * c_bar[k] * i[k] * (T::one() - i[k]);
                        d_pre[2][k] = d_c * i[k] * (T::one() - c_bar[k] * c_bar[k]);
                        d_pre[3][k] = d_o * o[k] * (T::one() - o[k]);
                        d_c_next[k] = d_c * f[k];
                    }
                    for (g, d) in d_pre.iter().enumerate() {
                        let range = lay.cell + g * block..lay.cell + (g + 1) * block;
                        outer_acc(&mut grad[range.clone()], d, &st.z);
                        matvec_t_acc(&p[range], d, &mut d_z);
                    }
                }
                CellKind::Gru => {
                    let (update, reset, cand) = (&st.gates[0], &st.gates[1], &st.gates[2]);
                    let h_prev = &st.z[s.input..];
                    let mut d_pre_update = vec![T::zero(); e_dim];
                    let mut d_pre_cand = vec![T::zero(); e_dim];
                    for k in 0..e_dim {
                        let d_cand = d_e[k] * (T::one() - update[k]);
                        d_pre_cand[k] = d_cand * (T::one() - cand[k] * cand[k]);
                        d_pre_update[k] = d_e[k] * (h_prev[k] - cand[k]) * update[k] * (T::one() - update[k]);
                        d_z[s.input + k] = d_e[k] * update[k];
                    }
                    let cand_range = lay.cell + 2 * block..lay.cell + 3 * block;
                    outer_acc(&mut grad[cand_range.clone()], &d_pre_cand, &st.z_reset);
                    let mut d_z_reset = vec![T::zero(); zw];
                    matvec_t_acc(&p[cand_range], &d_pre_cand, &mut d_z_reset);
                    let mut d_pre_reset = vec![T::zero(); e_dim];
                    for k in 0..e_dim {
                        let d_hr = d_z_reset[s.input + k];
                        d_z[s.input + k] = d_z[s.input + k] + d_hr * reset[k];
                        d_pre_reset[k] = d_hr * h_prev[k] * reset[k] * (T::one() - reset[k]);
                    }
                    for (g, d) in [(0, &d_pre_update), (1, &d_pre_reset)] {
                        let range = lay.cell + g * block..lay.cell + (g + 1) * block;
                        outer_acc(&mut grad[range.clone()], d, &st.z);
                        matvec_t_acc(&p[range], d, &mut d_z);
                    }
                }
            }
            d_e_next.copy_from_slice(&d_z[s.input..]);
        }
    }
}
