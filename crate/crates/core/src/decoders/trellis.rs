//! Exact column-sweep dynamic program over X error patterns.
//!
//! Qubits are processed in `column_order`. The state records the parity of
//! every "open" Z check (touched by a processed qubit and by an unprocessed
//! one) plus the running overlap parity with `z_logical`. A check is closed
//! right after its last qubit: states whose parity disagrees with the
//! syndrome bit are dropped and the bit is squeezed out of the index.
//!
//! Instantiated with min-plus it gives exact per-class minimum weights;
//! with sum-product it gives exact coset probabilities P(s, l).

use std::marker::PhantomData;

use crate::code_model::CodeSpec;
use crate::error::{Error, Result};
use crate::noise::Syndrome;
use crate::scalar::Probability;

/// Default cap on state bits (logical bit included), i.e. 2^22 states.
pub const DEFAULT_MAX_STATE_BITS: u32 = 22;

pub trait Semiring: Send + Sync {
    type Value: Clone + Send + Sync;

    fn zero(&self) -> Self::Value;
    fn one(&self) -> Self::Value;
    fn plus(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn times(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn is_zero(&self, a: &Self::Value) -> bool;

    /// Divides out a common factor, returning its natural log.
    fn rescale(&self, _values: &mut [Self::Value]) -> f64 {
        0.0
    }
}

/// Tropical semiring on weights; `u32::MAX` is the infeasible value.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinPlus;

impl Semiring for MinPlus {
    type Value = u32;

    fn zero(&self) -> u32 {
        u32::MAX
    }
    fn one(&self) -> u32 {
        0
    }
    #[inline]
    fn plus(&self, a: &u32, b: &u32) -> u32 {
        *a.min(b)
    }
    #[inline]
    fn times(&self, a: &u32, b: &u32) -> u32 {
        a.saturating_add(*b)
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == u32::MAX
    }
}

#[derive(Debug)]
pub struct SumProduct<T>(PhantomData<T>);

impl<T> Default for SumProduct<T> {
    fn default() -> Self {
        Self(PhantomData)
    }
}

impl<T: Probability> Semiring for SumProduct<T> {
    type Value = T;

    fn zero(&self) -> T {
        T::zero()
    }
    fn one(&self) -> T {
        T::one()
    }
    #[inline]
    fn plus(&self, a: &T, b: &T) -> T {
        a.clone() + b.clone()
    }
    #[inline]
    fn times(&self, a: &T, b: &T) -> T {
        a.clone() * b.clone()
    }
    fn is_zero(&self, a: &T) -> bool {
        a.is_zero()
    }
    fn rescale(&self, values: &mut [T]) -> f64 {
        T::rescale(values)
    }
}

#[derive(Clone, Debug)]
enum Step {
    /// Toggle `mask` on flip; first open `grow` fresh slots at the top.
    Qubit { mask: usize, grow: u32 },
    /// Enforce the syndrome bit of `check`, held at state bit `bit`.
    Close { bit: u32, check: usize },
}

/// Result of a sweep: values for classes (I, X), to be multiplied by
/// `exp(ln_scale)` in the sum-product case.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult<V> {
    pub values: [V; 2],
    pub ln_scale: f64,
}

#[derive(Clone, Debug)]
pub struct Trellis {
    n: usize,
    m: usize,
    steps: Vec<Step>,
    max_bits: u32,
}

impl Trellis {
    pub fn new(code: &CodeSpec) -> Result<Self> {
        Self::with_budget(code, DEFAULT_MAX_STATE_BITS)
    }

    pub fn with_budget(code: &CodeSpec, max_state_bits: u32) -> Result<Self> {
        let m = code.num_checks();
        let incidence = code.z_incidence();
        let mut in_logical = vec![false; code.n];
        for &q in &code.z_logical {
            in_logical[q] ^= true;
        }
        if code.column_order.len() != code.n {
            return Err(Error::Dimension { expected: code.n, got: code.column_order.len() });
        }
        let mut last_touch = vec![usize::MAX; m];
        for (pos, &q) in code.column_order.iter().enumerate() {
            for &c in &incidence[q] {
                last_touch[c] = pos;
            }
        }
        if let Some(c) = last_touch.iter().position(|&t| t == usize::MAX) {
            return Err(Error::Contract(format!("Z check {c} has empty support")));
        }

        let mut live: Vec<usize> = Vec::new();
        let mut steps = Vec::with_capacity(code.n + m);
        let mut max_bits = 1u32;
        for (pos, &q) in code.column_order.iter().enumerate() {
            let mut grow = 0;
            for &c in &incidence[q] {
                if !live.contains(&c) {
                    live.push(c);
                    grow += 1;
                }
            }
            let slot = |live: &[usize], c: usize| live.iter().position(|&x| x == c).expect("live check") + 1;
            let mut mask = usize::from(in_logical[q]);
            for &c in &incidence[q] {
                mask ^= 1 << slot(&live, c);
            }
            max_bits = max_bits.max(live.len() as u32 + 1);
            if max_bits > max_state_bits {
                return Err(Error::Resource(format!("trellis frontier needs {max_bits} state bits, budget is {max_state_bits}")));
            }
            steps.push(Step::Qubit { mask, grow });
            for &c in &incidence[q] {
                if last_touch[c] == pos {
                    let s = slot(&live, c);
                    steps.push(Step::Close { bit: s as u32, check: c });
                    live.remove(s - 1);
                }
            }
        }
        debug_assert!(live.is_empty());
        Ok(Self { n: code.n, m, steps, max_bits })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_checks(&self) -> usize {
        self.m
    }

    /// Peak number of state bits (open checks plus the logical bit).
    pub fn state_bits(&self) -> u32 {
        self.max_bits
    }

    pub fn sweep<S: Semiring>(&self, alg: &S, syndrome: &Syndrome, stay: &S::Value, flip: &S::Value) -> Result<SweepResult<S::Value>> {
        if syndrome.len() != self.m {
            return Err(Error::Dimension { expected: self.m, got: syndrome.len() });
        }
        let mut v = vec![alg.one(), alg.zero()];
        let mut scratch = Vec::with_capacity(1 << self.max_bits);
        let mut ln_scale = 0.0;
        for step in &self.steps {
            match *step {
                Step::Qubit { mask, grow } => apply_qubit(alg, &mut v, mask, grow, stay, flip),
                Step::Close { bit, check } => {
                    squeeze(&v, bit, syndrome.bits[check], &mut scratch);
                    std::mem::swap(&mut v, &mut scratch);
                    ln_scale += alg.rescale(&mut v);
                }
            }
        }
        debug_assert_eq!(v.len(), 2);
        Ok(SweepResult { values: [v[0].clone(), v[1].clone()], ln_scale })
    }

    /// Exact minimum weight per logical class, `u32::MAX` if unreachable.
    pub fn class_min_weights(&self, syndrome: &Syndrome) -> Result<[u32; 2]> {
        Ok(self.sweep(&MinPlus, syndrome, &0, &1)?.values)
    }

    /// Unnormalised (P(s, I), P(s, X)) with its log scale.
    pub fn coset_weights<T: Probability>(&self, p: T, syndrome: &Syndrome) -> Result<SweepResult<T>> {
        let stay = T::one() - p.clone();
        self.sweep(&SumProduct::<T>::default(), syndrome, &stay, &p)
    }

    /// Visits every syndrome with nonzero total weight, in lexicographic
    /// order of (check closing order, bit value). Shared prefixes of the
    /// sweep are computed once.
    pub fn for_each_syndrome<S, F>(&self, alg: &S, stay: &S::Value, flip: &S::Value, mut visit: F)
    where
        S: Semiring,
        F: FnMut(&[bool], &[S::Value; 2], f64),
    {
        let closes = self.steps.iter().filter(|s| matches!(s, Step::Close { .. })).count();
        let mut pool: Vec<Vec<S::Value>> = (0..=closes).map(|_| Vec::new()).collect();
        pool[0] = vec![alg.one(), alg.zero()];
        let mut syn = vec![false; self.m];
        self.descend(alg, stay, flip, 0, 0, 0.0, &mut pool, &mut syn, &mut visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn descend<S, F>(
        &self,
        alg: &S,
        stay: &S::Value,
        flip: &S::Value,
        mut idx: usize,
        depth: usize,
        ln_scale: f64,
        pool: &mut [Vec<S::Value>],
        syn: &mut [bool],
        visit: &mut F,
    ) where
        S: Semiring,
        F: FnMut(&[bool], &[S::Value; 2], f64),
    {
        while idx < self.steps.len() {
            match self.steps[idx] {
                Step::Qubit { mask, grow } => apply_qubit(alg, &mut pool[depth], mask, grow, stay, flip),
                Step::Close { bit, check } => {
                    for value in [false, true] {
                        let (head, tail) = pool.split_at_mut(depth + 1);
                        let child = &mut tail[0];
                        squeeze(&head[depth], bit, value, child);
                        if child.iter().all(|x| alg.is_zero(x)) {
                            continue;
                        }
                        let ln = ln_scale + alg.rescale(child);
                        syn[check] = value;
                        self.descend(alg, stay, flip, idx + 1, depth + 1, ln, pool, syn, visit);
                    }
                    syn_reset(syn, check);
                    return;
                }
            }
            idx += 1;
        }
        let v = &pool[depth];
        visit(syn, &[v[0].clone(), v[1].clone()], ln_scale);
    }
}

fn syn_reset(syn: &mut [bool], check: usize) {
    syn[check] = false;
}

#[inline]
fn apply_qubit<S: Semiring>(alg: &S, v: &mut Vec<S::Value>, mask: usize, grow: u32, stay: &S::Value, flip: &S::Value) {
    if grow > 0 {
        v.resize(v.len() << grow, alg.zero());
    }
    let high = 1usize << (usize::BITS - 1 - mask.leading_zeros());
    let len = v.len();
    let mut base = 0;
    while base < len {
        for x in base..base + high {
            let y = x ^ mask;
            let a = &v[x];
            let b = &v[y];
            let nx = alg.plus(&alg.times(a, stay), &alg.times(b, flip));
            let ny = alg.plus(&alg.times(b, stay), &alg.times(a, flip));
            v[x] = nx;
            v[y] = ny;
        }
        base += 2 * high;
    }
}

#[inline]
fn squeeze<V: Clone>(v: &[V], bit: u32, value: bool, out: &mut Vec<V>) {
    let lo = 1usize << bit;
    out.clear();
    let offset = if value { lo } else { 0 };
    for chunk in v.chunks(2 * lo) {
        out.extend_from_slice(&chunk[offset..offset + lo]);
    }
}
