// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Sources of color draws.
//!
//! All randomness in the algorithms flows through [`ColorSource`], so a run
//! can be recorded to a [`RandomTape`] and later replayed draw for draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::EdgeId;

/// Colors are `1..=K`.
pub type Color = u32;

pub trait ColorSource {
    /// Marks the start of a phase. Phase 0 is the initial coloring.
    fn begin_phase(&mut self) {}

    /// A color for `edge`, uniform over `1..=palette_size`.
    fn draw(&mut self, edge: EdgeId, palette_size: u32) -> Color;
}

/// Identifies an independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub trial: u64,
}

impl Seed {
    pub fn new(master: u64, trial: u64) -> Seed {
        Seed { master, trial }
    }
}

/// ChaCha8 keyed by the master seed, one stream per trial index.
#[derive(Clone, Debug)]
pub struct TrialRng {
    inner: ChaCha8Rng,
}

impl TrialRng {
    pub fn new(seed: Seed) -> TrialRng {
        let mut inner = ChaCha8Rng::seed_from_u64(seed.master);
        inner.set_stream(seed.trial);
        TrialRng { inner }
    }
}

impl ColorSource for TrialRng {
    fn draw(&mut self, _edge: EdgeId, palette_size: u32) -> Color {
        // Uniform integer sampling in rand rejects, so there is no modulo bias.
        self.inner.random_range(1..=palette_size)
    }
}

impl rand::RngCore for TrialRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Every draw of a run, grouped by phase.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomTape {
    pub phases: Vec<Vec<(EdgeId, Color)>>,
}

impl RandomTape {
    pub fn draw_count(&self) -> usize {
        self.phases.iter().map(Vec::len).sum()
    }
}

/// Wraps a source and records what it hands out.
#[derive(Debug)]
pub struct TapeRecorder<S> {
    inner: S,
    tape: RandomTape,
}

impl<S: ColorSource> TapeRecorder<S> {
    pub fn new(inner: S) -> Self {
        TapeRecorder {
            inner,
            tape: RandomTape::default(),
        }
    }

    pub fn tape(&self) -> &RandomTape {
        &self.tape
    }

    pub fn into_tape(self) -> RandomTape {
        self.tape
    }
}

impl<S: ColorSource> ColorSource for TapeRecorder<S> {
    fn begin_phase(&mut self) {
        self.inner.begin_phase();
        self.tape.phases.push(Vec::new());
    }

    fn draw(&mut self, edge: EdgeId, palette_size: u32) -> Color {
        let c = self.inner.draw(edge, palette_size);
        if self.tape.phases.is_empty() {
            self.tape.phases.push(Vec::new());
        }
        self.tape.phases.last_mut().unwrap().push((edge, c));
        c
    }
}

/// Plays a recorded tape back positionally: the `i`-th draw of phase `p`
/// returns the `i`-th recorded color of phase `p`.
///
/// Any disagreement between the requested edge and the recorded one, or a
/// read past the end of the tape, is remembered in [`TapeReplay::mismatch`]
/// rather than panicking.
#[derive(Debug)]
pub struct TapeReplay<'a> {
    tape: &'a RandomTape,
    phase: Option<usize>,
    pos: usize,
    mismatch: Option<TapeMismatch>,
    draws: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TapeMismatch {
    pub phase: usize,
    pub position: usize,
    pub requested_edge: EdgeId,
    pub recorded_edge: Option<EdgeId>,
}

impl<'a> TapeReplay<'a> {
    pub fn new(tape: &'a RandomTape) -> Self {
        TapeReplay {
            tape,
            phase: None,
            pos: 0,
            mismatch: None,
            draws: 0,
        }
    }

    pub fn mismatch(&self) -> Option<&TapeMismatch> {
        self.mismatch.as_ref()
    }

    pub fn draws(&self) -> usize {
        self.draws
    }
}

impl ColorSource for TapeReplay<'_> {
    fn begin_phase(&mut self) {
        self.phase = Some(self.phase.map_or(0, |p| p + 1));
        self.pos = 0;
    }

    fn draw(&mut self, edge: EdgeId, _palette_size: u32) -> Color {
        let phase = self.phase.unwrap_or(0);
        let recorded = self
            .tape
            .phases
            .get(phase)
            .and_then(|p| p.get(self.pos))
            .copied();
        self.draws += 1;
        let at = self.pos;
        self.pos += 1;
        match recorded {
            Some((e, c)) if e == edge => c,
            other => {
                if self.mismatch.is_none() {
                    self.mismatch = Some(TapeMismatch {
                        phase,
                        position: at,
                        requested_edge: edge,
                        recorded_edge: other.map(|(e, _)| e),
                    });
                }
                other.map_or(1, |(_, c)| c)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draws = |seed| {
            let mut rng = TrialRng::new(seed);
            (0..32).map(|e| rng.draw(e, 7)).collect::<Vec<_>>()
        };
        assert_eq!(draws(Seed::new(3, 0)), draws(Seed::new(3, 0)));
        assert_ne!(draws(Seed::new(3, 0)), draws(Seed::new(3, 1)));
        assert_ne!(draws(Seed::new(3, 0)), draws(Seed::new(4, 0)));
        assert!(draws(Seed::new(9, 9)).iter().all(|&c| (1..=7).contains(&c)));
    }

    #[test]
    fn record_then_replay() {
        let mut rec = TapeRecorder::new(TrialRng::new(Seed::new(1, 2)));
        rec.begin_phase();
        let first: Vec<_> = (0..5).map(|e| rec.draw(e, 3)).collect();
        rec.begin_phase();
        let second: Vec<_> = [4, 1].iter().map(|&e| rec.draw(e, 3)).collect();
        let tape = rec.into_tape();
        assert_eq!(tape.phases.len(), 2);
        assert_eq!(tape.draw_count(), 7);

        let mut replay = TapeReplay::new(&tape);
        replay.begin_phase();
        let a: Vec<_> = (0..5).map(|e| replay.draw(e, 3)).collect();
        replay.begin_phase();
        let b: Vec<_> = [4, 1].iter().map(|&e| replay.draw(e, 3)).collect();
        assert_eq!((a, b), (first, second));
        assert!(replay.mismatch().is_none());

        let mut wrong = TapeReplay::new(&tape);
        wrong.begin_phase();
        wrong.draw(3, 3);
        assert_eq!(wrong.mismatch().unwrap().recorded_edge, Some(0));
    }

    #[test]
    fn uniform_over_palette() {
        let mut rng = TrialRng::new(Seed::new(11, 0));
        let mut counts = [0u32; 5];
        for _ in 0..50_000 {
            counts[(rng.draw(0, 5) - 1) as usize] += 1;
        }
        for c in counts {
            assert!((9_400..10_600).contains(&c), "{:?}", counts);
        }
    }
}
