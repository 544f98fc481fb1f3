//! Multi-cell outer-product engine.
//!
//! One outer product `dW = delta * x^T` uses exactly two LFSRs. Each draws `M`
//! words once; those words are shared by every element on its side of the
//! product. After the two word streams are materialized, every `(j, i)` cell
//! is an independent unit-cell multiply, so the grid is evaluated in parallel
//! for large shapes without changing results.

use rayon::prelude::*;

use crate::encoder::{fill_events, limbs_for, vector_exponent, VectorExponent};
use crate::error::{Error, Result};
use crate::lfsr::{derive_seed_pair, LfsrState};
use crate::numeric::{quantize_to_binary16, Binary16Value, PowerOfTwoScale};
use crate::unit_cell::{and_popcount, f_scale, f_scale_with_lr, shift_pack, ShiftStatus, MAX_COUNT};

/// Cells per outer product above which rows are evaluated in parallel.
const PARALLEL_CELLS: usize = 1 << 14;

/// Row-major binary16 matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix16 {
    rows: usize,
    cols: usize,
    data: Vec<Binary16Value>,
}

impl Matrix16 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Binary16Value::ZERO; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Binary16Value>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Contract(format!(
                "{} entries do not form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Quantize real entries (row-major) to binary16.
    pub fn from_f64(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, values.iter().map(|&v| quantize_to_binary16(v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Binary16Value {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Binary16Value) {
        self.data[row * self.cols + col] = v;
    }

    pub fn row(&self, row: usize) -> &[Binary16Value] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Binary16Value] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Binary16Value] {
        &mut self.data
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.to_f64()).collect()
    }

    pub fn same_shape(&self, other: &Matrix16) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// Entrywise binary16 accumulation `self += other`.
    pub fn accumulate(&mut self, other: &Matrix16) -> Result<()> {
        if !self.same_shape(other) {
            return Err(shape_error("accumulate", self, other));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
        Ok(())
    }
}

/// One `(x, delta)` pair and the parameters of its stochastic outer product.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterProductJob {
    pub x: Vec<Binary16Value>,
    pub delta: Vec<Binary16Value>,
    pub seq_len: usize,
    pub seed_x: u16,
    pub seed_delta: u16,
    /// Learning rate folded into the power-of-two scale, if any.
    pub lr: Option<f64>,
}

impl OuterProductJob {
    pub fn new(x: Vec<Binary16Value>, delta: Vec<Binary16Value>, seq_len: usize, seed_x: u16, seed_delta: u16) -> Self {
        Self { x, delta, seq_len, seed_x, seed_delta, lr: None }
    }

    pub fn with_lr(mut self, lr: f64) -> Self {
        self.lr = Some(lr);
        self
    }

    /// Same job with seeds taken from the derived schedule at `counter`.
    pub fn reseeded(&self, base: u16, counter: u64) -> Self {
        let (seed_x, seed_delta) = derive_seed_pair(base, counter);
        Self { seed_x, seed_delta, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if self.x.is_empty() || self.delta.is_empty() {
            return Err(Error::Contract("outer product operands must be nonempty".into()));
        }
        if self.seq_len == 0 || self.seq_len > MAX_COUNT as usize {
            return Err(Error::Contract(format!(
                "sequence length {} outside 1..={MAX_COUNT}",
                self.seq_len
            )));
        }
        for seed in [self.seed_x, self.seed_delta] {
            if seed == 0 {
                return Err(Error::InvalidSeed(seed));
            }
        }
        if self.seed_x == self.seed_delta {
            return Err(Error::Contract("X and delta streams need distinct seeds".into()));
        }
        if let Some(lr) = self.lr {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::Domain(format!("learning rate must be positive, got {lr}")));
            }
        }
        Ok(())
    }
}

/// Result of one stochastic outer product: `rows = len(delta)`, `cols = len(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateMatrix {
    pub matrix: Matrix16,
    /// LFSR words drawn across both streams.
    pub rng_draws: u64,
    /// Shift scale used by every cell; `None` when a zero operand short-circuited.
    pub scale: Option<PowerOfTwoScale>,
    pub exp_x: VectorExponent,
    pub exp_delta: VectorExponent,
    pub saturated: usize,
    pub underflowed: usize,
}

impl UpdateMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Binary16Value {
        self.matrix.get(row, col)
    }
}

/// Stochastic estimate of `delta * x^T` (times `lr` when folded).
pub fn outer_product(job: &OuterProductJob) -> Result<UpdateMatrix> {
    job.validate()?;
    let exp_x = vector_exponent(&job.x)?;
    let exp_delta = vector_exponent(&job.delta)?;
    let (rows, cols, m) = (job.delta.len(), job.x.len(), job.seq_len);

    if exp_x.is_zero_vector || exp_delta.is_zero_vector {
        return Ok(UpdateMatrix {
            matrix: Matrix16::zeros(rows, cols),
            rng_draws: 0,
            scale: None,
            exp_x,
            exp_delta,
            saturated: 0,
            underflowed: 0,
        });
    }

    let mut rng_x = LfsrState::seed(job.seed_x)?;
    let mut rng_delta = LfsrState::seed(job.seed_delta)?;
    let words_x = rng_x.take_words(m);
    let words_delta = rng_delta.take_words(m);

    let limbs = limbs_for(m);
    let events_x = encode_all(&job.x, exp_x.exponent, &words_x, limbs);
    let events_delta = encode_all(&job.delta, exp_delta.exponent, &words_delta, limbs);

    let scale = match job.lr {
        Some(lr) => f_scale_with_lr(exp_x.exponent, exp_delta.exponent, m, lr)?,
        None => f_scale(exp_x.exponent, exp_delta.exponent, m)?,
    };

    let mut data = vec![Binary16Value::ZERO; rows * cols];
    let fill_row = |j: usize, out: &mut [Binary16Value]| -> (usize, usize) {
        let row_events = &events_delta[j * limbs..(j + 1) * limbs];
        let sign_delta = job.delta[j].sign_bit();
        let (mut sat, mut under) = (0, 0);
        for (i, cell) in out.iter_mut().enumerate() {
            let count = and_popcount(row_events, &events_x[i * limbs..(i + 1) * limbs]);
            // count <= M <= MAX_COUNT, so shift_pack cannot fail.
            let (v, status) = shift_pack(sign_delta ^ job.x[i].sign_bit(), count, scale).expect("count within counter range");
            match status {
                ShiftStatus::Saturated => sat += 1,
                ShiftStatus::Underflow => under += 1,
                ShiftStatus::Exact => {}
            }
            *cell = v;
        }
        (sat, under)
    };

    let (saturated, underflowed) = if rows * cols >= PARALLEL_CELLS {
        data.par_chunks_mut(cols)
            .enumerate()
            .map(|(j, out)| fill_row(j, out))
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    } else {
        data.chunks_mut(cols)
            .enumerate()
            .map(|(j, out)| fill_row(j, out))
            .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    };

    Ok(UpdateMatrix {
        matrix: Matrix16 { rows, cols, data },
        rng_draws: rng_x.draws() + rng_delta.draws(),
        scale: Some(scale),
        exp_x,
        exp_delta,
        saturated,
        underflowed,
    })
}

fn encode_all(values: &[Binary16Value], exponent: i32, words: &[u16], limbs: usize) -> Vec<u64> {
    let mut events = vec![0u64; values.len() * limbs];
    for (v, out) in values.iter().zip(events.chunks_mut(limbs)) {
        fill_events(*v, exponent, words, out);
    }
    events
}

/// SGD-with-momentum hyperparameters for [`apply_update`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumSgd {
    pub lr: f64,
    /// The update already carries the learning rate (folded into its scale).
    pub lr_folded: bool,
    pub momentum: f64,
}

/// `v' = momentum * v + dW`, `W' = W - lr_eff * v'`, each rounded to binary16.
pub fn apply_update(weights: &mut Matrix16, velocity: &mut Matrix16, update: &Matrix16, rule: MomentumSgd) -> Result<()> {
    if !weights.same_shape(update) {
        return Err(shape_error("apply_update", weights, update));
    }
    if !weights.same_shape(velocity) {
        return Err(shape_error("apply_update", weights, velocity));
    }
    if !(0.0..1.0).contains(&rule.momentum) {
        return Err(Error::Domain(format!("momentum must lie in [0, 1), got {}", rule.momentum)));
    }
    if !rule.lr_folded && !(rule.lr.is_finite() && rule.lr > 0.0) {
        return Err(Error::Domain(format!("learning rate must be positive, got {}", rule.lr)));
    }
    let lr = if rule.lr_folded { 1.0 } else { rule.lr };
    for ((w, v), &g) in weights.data.iter_mut().zip(velocity.data.iter_mut()).zip(&update.data) {
        *v = quantize_to_binary16(rule.momentum * v.to_f64() + g.to_f64());
        *w = quantize_to_binary16(w.to_f64() - lr * v.to_f64());
    }
    Ok(())
}

/// Parameters for [`conv_weight_update`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvUpdateParams {
    pub seq_len: usize,
    /// Base of the per-position seed schedule; position `p` uses counter `p`.
    pub base_seed: u16,
    pub lr: Option<f64>,
}

/// Weight update of a convolution layer from unrolled patches.
///
/// `activations` is positions x (kernel * in_channels), `gradients` is
/// positions x out_channels. Each position contributes one stochastic outer
/// product with seeds from [`derive_seed_pair`]; contributions are summed in
/// binary16 in position order.
pub fn conv_weight_update(activations: &Matrix16, gradients: &Matrix16, params: ConvUpdateParams) -> Result<UpdateMatrix> {
    if activations.rows() != gradients.rows() {
        return Err(Error::Contract(format!(
            "activation patches ({}) and gradient positions ({}) differ",
            activations.rows(),
            gradients.rows()
        )));
    }
    if activations.rows() == 0 {
        return Err(Error::Contract("no patch positions".into()));
    }
    let mut total = Matrix16::zeros(gradients.cols(), activations.cols());
    let (mut draws, mut saturated, mut underflowed) = (0, 0, 0);
    let mut last = None;
    for p in 0..activations.rows() {
        let (seed_x, seed_delta) = derive_seed_pair(params.base_seed, p as u64);
        let job = OuterProductJob {
            x: activations.row(p).to_vec(),
            delta: gradients.row(p).to_vec(),
            seq_len: params.seq_len,
            seed_x,
            seed_delta,
            lr: params.lr,
        };
        let part = outer_product(&job)?;
        total.accumulate(&part.matrix)?;
        draws += part.rng_draws;
        saturated += part.saturated;
        underflowed += part.underflowed;
        last = Some((part.exp_x, part.exp_delta));
    }
    let (exp_x, exp_delta) = last.expect("at least one position");
    Ok(UpdateMatrix { matrix: total, rng_draws: draws, scale: None, exp_x, exp_delta, saturated, underflowed })
}

fn shape_error(op: &str, a: &Matrix16, b: &Matrix16) -> Error {
    Error::Contract(format!(
        "{op}: shape {}x{} does not match {}x{}",
        a.rows(),
        a.cols(),
        b.rows(),
        b.cols()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode, encode_with_words};
    use crate::lfsr::uniform_fraction;
    use crate::unit_cell::unit_cell_multiply;
    use proptest::prelude::*;

    fn h(v: f64) -> Binary16Value {
        Binary16Value::from_f64(v)
    }

    fn hv(v: &[f64]) -> Vec<Binary16Value> {
        v.iter().map(|&x| h(x)).collect()
    }

    #[test]
    fn zero_vector_short_circuits() {
        let job = OuterProductJob::new(hv(&[0.0, -0.0]), hv(&[1.0, 2.0]), 16, 1, 2);
        let r = outer_product(&job).unwrap();
        assert_eq!(r.rng_draws, 0);
        assert!(r.matrix.as_slice().iter().all(|v| v.to_bits() == 0));
        let job = OuterProductJob::new(hv(&[1.0]), hv(&[0.0]), 16, 1, 2);
        assert_eq!(outer_product(&job).unwrap().matrix.get(0, 0).to_bits(), 0);
    }

    #[test]
    fn single_cell_matches_unit_cell() {
        let (x, d) = (h(0.375), h(-0.8));
        let job = OuterProductJob::new(vec![x], vec![d], 16, 0xACE1, 0x1234);
        let r = outer_product(&job).unwrap();
        let ex = vector_exponent(&[x]).unwrap().exponent;
        let ed = vector_exponent(&[d]).unwrap().exponent;
        let sx = encode(x, ex, &mut LfsrState::seed(0xACE1).unwrap(), 16).unwrap();
        let sd = encode(d, ed, &mut LfsrState::seed(0x1234).unwrap(), 16).unwrap();
        let cell = unit_cell_multiply(&sd, &sx, f_scale(ex, ed, 16).unwrap()).unwrap();
        assert_eq!(r.get(0, 0), cell.value);
        assert_eq!(r.rng_draws, 32);
    }

    #[test]
    fn golden_two_by_one() {
        // Replay: compare each |value|/2^E against the raw fractions by hand.
        let fractions = |seed: u16| -> Vec<f64> { LfsrState::seed(seed).unwrap().take(16).map(uniform_fraction).collect() };
        let (fx, fd) = (fractions(0xACE1), fractions(0x1234));
        // E_X = -1 (max 0.5), E_delta = 0, F = 2^-1 / 16 = 2^-5.
        let bits = |p: f64, f: &[f64]| -> Vec<bool> { f.iter().map(|&t| p > t).collect() };
        let bd = bits(1.0, &fd);
        let bx = bits(1.0, &fx); // |0.5| / 2^-1 = 1 for both entries
        let count = bd.iter().zip(&bx).filter(|(a, b)| **a && **b).count();
        let expect = count as f64 * 2f64.powi(-5);

        let job = OuterProductJob::new(hv(&[0.5, -0.5]), hv(&[1.0]), 16, 0xACE1, 0x1234);
        let r = outer_product(&job).unwrap();
        assert_eq!((r.rows(), r.cols()), (1, 2));
        assert_eq!(r.get(0, 0).to_f64(), expect);
        assert_eq!(r.get(0, 1).to_f64(), -expect);
        // Both operands at full scale: every event fires, so the estimate is exact.
        assert_eq!(r.get(0, 0).to_f64(), 0.5);
        assert_eq!(r.get(0, 1).to_f64(), -0.5);
    }

    #[test]
    fn golden_partial_scale() {
        let job = OuterProductJob::new(hv(&[0.3, -0.7, 0.05]), hv(&[1.5, -0.2]), 8, 0xACE1, 0x1234);
        let r = outer_product(&job).unwrap();
        // Independent replay with float comparisons.
        let wx: Vec<u16> = LfsrState::seed(0xACE1).unwrap().take(8).collect();
        let wd: Vec<u16> = LfsrState::seed(0x1234).unwrap().take(8).collect();
        let (ex, ed) = (0, 1);
        for (j, &d) in job.delta.iter().enumerate() {
            for (i, &x) in job.x.iter().enumerate() {
                let mut count = 0;
                for k in 0..8 {
                    let bx = x.to_f64().abs() > uniform_fraction(wx[k]) * 2f64.powi(ex);
                    let bd = d.to_f64().abs() > uniform_fraction(wd[k]) * 2f64.powi(ed);
                    count += (bx && bd) as i32;
                }
                let sign = if (x.to_f64() < 0.0) ^ (d.to_f64() < 0.0) { -1.0 } else { 1.0 };
                let want = if count == 0 { 0.0 } else { sign * count as f64 * 2f64.powi(ex + ed - 3) };
                assert_eq!(r.get(j, i).to_f64(), want, "({j},{i})");
            }
        }
        let frozen: Vec<u16> = r.matrix.as_slice().iter().map(|v| v.to_bits()).collect();
        assert_eq!(frozen, GOLDEN_PARTIAL);
    }

    const GOLDEN_PARTIAL: [u16; 6] = [0x3400, 0xBD00, 0x0000, 0x0000, 0x0000, 0x0000];

    #[test]
    fn draws_are_independent_of_size() {
        for n in [1usize, 64, 256] {
            let x: Vec<_> = (0..n).map(|i| h((i as f64 + 1.0) / n as f64)).collect();
            let job = OuterProductJob::new(x.clone(), x, 8, 7, 9);
            assert_eq!(outer_product(&job).unwrap().rng_draws, 16);
        }
    }

    #[test]
    fn invalid_jobs() {
        let ok = OuterProductJob::new(hv(&[1.0]), hv(&[1.0]), 4, 1, 2);
        assert_eq!(outer_product(&OuterProductJob { seed_x: 0, ..ok.clone() }), Err(Error::InvalidSeed(0)));
        assert!(outer_product(&OuterProductJob { seed_delta: 1, ..ok.clone() }).is_err());
        assert!(outer_product(&OuterProductJob { seq_len: 0, ..ok.clone() }).is_err());
        assert!(outer_product(&OuterProductJob { x: vec![], ..ok.clone() }).is_err());
        assert!(matches!(
            outer_product(&OuterProductJob { x: vec![Binary16Value::NAN], ..ok.clone() }),
            Err(Error::Domain(_))
        ));
        assert!(outer_product(&ok.clone().with_lr(-1.0)).is_err());
    }

    #[test]
    fn lr_folding_shrinks_scale() {
        let job = OuterProductJob::new(hv(&[1.0]), hv(&[1.0]), 16, 1, 2);
        let plain = outer_product(&job).unwrap();
        let folded = outer_product(&job.clone().with_lr(0.1)).unwrap();
        assert_eq!(plain.scale, Some(PowerOfTwoScale::new(-4)));
        assert_eq!(folded.scale, Some(PowerOfTwoScale::new(-8)));
        assert_eq!(folded.get(0, 0).to_f64(), 16.0 * 2f64.powi(-8));
    }

    #[test]
    fn apply_update_examples() {
        let w0 = Matrix16::from_f64(1, 2, &[0.5, -0.25]).unwrap();
        let rule = MomentumSgd { lr: 0.1, lr_folded: true, momentum: 0.0 };
        let (mut w, mut v) = (w0.clone(), Matrix16::zeros(1, 2));
        apply_update(&mut w, &mut v, &Matrix16::zeros(1, 2), rule).unwrap();
        assert_eq!(w, w0);

        let rule = MomentumSgd { lr: 1.0, lr_folded: false, momentum: 0.0 };
        let g = Matrix16::from_f64(1, 2, &[0.125, 0.0]).unwrap();
        apply_update(&mut w, &mut v, &g, rule).unwrap();
        assert_eq!(w.to_f64(), vec![0.375, -0.25]);
    }

    #[test]
    fn momentum_two_steps() {
        // v1 = g, v2 = 0.9 g + g = 1.9 g; W2 = W0 - lr (v1 + v2).
        let g = 1.0;
        let rule = MomentumSgd { lr: 0.5, lr_folded: false, momentum: 0.9 };
        let mut w = Matrix16::from_f64(1, 1, &[8.0]).unwrap();
        let mut v = Matrix16::zeros(1, 1);
        let dw = Matrix16::from_f64(1, 1, &[g]).unwrap();
        apply_update(&mut w, &mut v, &dw, rule).unwrap();
        assert_eq!(v.get(0, 0).to_f64(), 1.0);
        assert_eq!(w.get(0, 0).to_f64(), 7.5);
        apply_update(&mut w, &mut v, &dw, rule).unwrap();
        let v2 = quantize_to_binary16(1.9 * g);
        assert_eq!(v.get(0, 0), v2);
        assert_eq!(w.get(0, 0), quantize_to_binary16(7.5 - 0.5 * v2.to_f64()));
        assert!((v2.to_f64() - 1.9).abs() < 1e-3);
    }

    #[test]
    fn apply_update_rejects_bad_shapes() {
        let mut w = Matrix16::zeros(2, 2);
        let mut v = Matrix16::zeros(2, 2);
        let rule = MomentumSgd { lr: 1.0, lr_folded: false, momentum: 0.0 };
        assert!(apply_update(&mut w, &mut v, &Matrix16::zeros(2, 3), rule).is_err());
        let mut v_bad = Matrix16::zeros(1, 2);
        assert!(apply_update(&mut w, &mut v_bad, &Matrix16::zeros(2, 2), rule).is_err());
        let rule = MomentumSgd { lr: 1.0, lr_folded: false, momentum: 1.0 };
        assert!(apply_update(&mut w, &mut v, &Matrix16::zeros(2, 2), rule).is_err());
    }

    #[test]
    fn conv_degenerates_to_outer_product() {
        let acts = Matrix16::from_f64(1, 1, &[0.75]).unwrap();
        let grads = Matrix16::from_f64(1, 1, &[-0.5]).unwrap();
        let params = ConvUpdateParams { seq_len: 16, base_seed: 0x1111, lr: None };
        let conv = conv_weight_update(&acts, &grads, params).unwrap();
        let (sx, sd) = derive_seed_pair(0x1111, 0);
        let direct = outer_product(&OuterProductJob::new(hv(&[0.75]), hv(&[-0.5]), 16, sx, sd)).unwrap();
        assert_eq!(conv.matrix, direct.matrix);
        assert_eq!(conv.rng_draws, 32);
    }

    #[test]
    fn conv_zero_gradients() {
        let acts = Matrix16::from_f64(3, 2, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let grads = Matrix16::zeros(3, 4);
        let params = ConvUpdateParams { seq_len: 8, base_seed: 5, lr: None };
        let r = conv_weight_update(&acts, &grads, params).unwrap();
        assert_eq!((r.rows(), r.cols()), (4, 2));
        assert!(r.matrix.as_slice().iter().all(|v| v.to_bits() == 0));
        assert_eq!(r.rng_draws, 0);
        assert!(conv_weight_update(&acts, &Matrix16::zeros(2, 4), params).is_err());
    }

    #[test]
    fn conv_two_identical_positions_doubles_mean() {
        let acts = Matrix16::from_f64(2, 2, &[0.6, -0.3, 0.6, -0.3]).unwrap();
        let grads = Matrix16::from_f64(2, 1, &[0.7, 0.7]).unwrap();
        let one_acts = Matrix16::from_f64(1, 2, &[0.6, -0.3]).unwrap();
        let one_grads = Matrix16::from_f64(1, 1, &[0.7]).unwrap();
        let trials = 4000;
        let mut two = [0.0; 2];
        let mut one = [0.0; 2];
        for t in 0..trials {
            let params = ConvUpdateParams { seq_len: 16, base_seed: (t % 65535 + 1) as u16, lr: None };
            let r2 = conv_weight_update(&acts, &grads, ConvUpdateParams { base_seed: params.base_seed, ..params }).unwrap();
            let r1 = conv_weight_update(&one_acts, &one_grads, ConvUpdateParams { base_seed: (params.base_seed % 60000) + 3000, ..params }).unwrap();
            for i in 0..2 {
                two[i] += r2.get(0, i).to_f64() / trials as f64;
                one[i] += r1.get(0, i).to_f64() / trials as f64;
            }
        }
        let exact = [h(0.6).to_f64() * h(0.7).to_f64(), h(-0.3).to_f64() * h(0.7).to_f64()];
        for i in 0..2 {
            assert!((two[i] - 2.0 * exact[i]).abs() < 0.02, "{two:?}");
            assert!((two[i] - 2.0 * one[i]).abs() < 0.03, "{two:?} {one:?}");
        }
    }

    #[test]
    fn parallel_path_matches_sequential_replay() {
        let n = 160; // 160 * 160 cells exceeds the parallel threshold
        let x: Vec<_> = (0..n).map(|i| h(((i * 37) % 101) as f64 / 50.0 - 1.0)).collect();
        let d: Vec<_> = (0..n).map(|i| h(((i * 53) % 97) as f64 / 200.0 - 0.2)).collect();
        let job = OuterProductJob::new(x.clone(), d.clone(), 16, 0x0F0F, 0xF0F1);
        let r = outer_product(&job).unwrap();
        let ex = vector_exponent(&x).unwrap().exponent;
        let ed = vector_exponent(&d).unwrap().exponent;
        let wx: Vec<u16> = LfsrState::seed(0x0F0F).unwrap().take(16).collect();
        let wd: Vec<u16> = LfsrState::seed(0xF0F1).unwrap().take(16).collect();
        let scale = f_scale(ex, ed, 16).unwrap();
        for j in (0..n).step_by(13) {
            let sd = encode_with_words(d[j], ed, &wd);
            for i in (0..n).step_by(7) {
                let sx = encode_with_words(x[i], ex, &wx);
                assert_eq!(r.get(j, i), unit_cell_multiply(&sd, &sx, scale).unwrap().value);
            }
        }
    }

    proptest! {
        #[test]
        fn deterministic_bounded_and_signed(
            xs in proptest::collection::vec(-4.0f64..4.0, 1..12),
            ds in proptest::collection::vec(-0.01f64..0.01, 1..12),
            m in prop::sample::select(vec![1usize, 2, 8, 16, 64, 100]),
            seed_x in 1u16..,
            seed_d in 1u16..,
        ) {
            prop_assume!(seed_x != seed_d);
            let job = OuterProductJob::new(hv(&xs), hv(&ds), m, seed_x, seed_d);
            let a = outer_product(&job).unwrap();
            let b = outer_product(&job).unwrap();
            prop_assert_eq!(&a, &b);
            if a.scale.is_none() {
                return Ok(());
            }
            prop_assert_eq!(a.rng_draws, 2 * m as u64);
            let bound = 2f64.powi(a.exp_x.exponent + a.exp_delta.exponent);
            for j in 0..ds.len() {
                for i in 0..xs.len() {
                    let v = a.get(j, i).to_f64();
                    if m.is_power_of_two() {
                        prop_assert!(v.abs() <= bound);
                    }
                    if v != 0.0 {
                        let want_neg = job.delta[j].is_sign_negative() ^ job.x[i].is_sign_negative();
                        prop_assert_eq!(v < 0.0, want_neg);
                    }
                }
            }
        }
    }
}
