//! Finite-state machines for the three complex-event rules.
//!
//! | class | rule |
//! |-------|------|
//! | e1 | after flushing the toilet, no hand washing before any other activity, or walking away for more than 1 minute |
//! | e2 | eating without having washed hands within the previous 2 minutes |
//! | e3 | a brushing bout shorter than 2 minutes; brushing stops after 10 s without brush windows |
//!
//! Each machine consumes one action per window and reports whether its rule
//! fired at that window. A fired rule labels exactly one window: the one at
//! which the violation is established. Earlier windows of the pattern stay
//! unlabeled.
//!
//! The machines are pure (state in, state out) so the same code produces
//! ground truth in batch ([`label_sequence`]) and runs as a causal streaming
//! detector ([`DetectorState::push`]).

use crate::{ActionClass, CeClass, CeSet, CeLabelSequence, WINDOW_SECONDS};

const fn seconds_to_windows(seconds: u32) -> u32 {
    seconds / WINDOW_SECONDS
}

/// e1: walking away from the restroom for more than this many walk windows.
pub const WALK_THRESHOLD: u32 = seconds_to_windows(60);
/// e2: longest compliant gap between washing hands and the start of a meal.
pub const WASH_TO_EAT_GAP: u32 = seconds_to_windows(120);
/// e3: bouts with fewer brush windows than this are too short.
pub const BRUSH_MINIMUM: u32 = seconds_to_windows(120);
/// e3: consecutive non-brush windows that end a bout.
pub const BRUSH_STOP_GAP: u32 = seconds_to_windows(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RestroomPhase {
    #[default]
    Idle,
    AfterRestroom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RestroomFsmState {
    pub phase: RestroomPhase,
    pub walk_count: u32,
}

impl RestroomFsmState {
    const IDLE: Self = Self {
        phase: RestroomPhase::Idle,
        walk_count: 0,
    };

    fn after_restroom(walk_count: u32) -> Self {
        Self {
            phase: RestroomPhase::AfterRestroom,
            walk_count,
        }
    }
}

pub fn e1_step(state: RestroomFsmState, action: ActionClass) -> (RestroomFsmState, bool) {
    use ActionClass::*;
    match state.phase {
        RestroomPhase::Idle => match action {
            FlushToilet => (RestroomFsmState::after_restroom(0), false),
            _ => (RestroomFsmState::IDLE, false),
        },
        RestroomPhase::AfterRestroom => match action {
            Wash => (RestroomFsmState::IDLE, false),
            FlushToilet => (RestroomFsmState::after_restroom(0), false),
            Walk => {
                let walked = state.walk_count + 1;
                if walked > WALK_THRESHOLD {
                    (RestroomFsmState::IDLE, true)
                } else {
                    (RestroomFsmState::after_restroom(walked), false)
                }
            }
            Sit | BrushTeeth | ClickMouse | Drink | Eat | Type => (RestroomFsmState::IDLE, true),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DietFsmState {
    /// Windows since the last wash window, saturating one past the gap
    /// threshold. `None` until the first wash.
    pub windows_since_wash: Option<u32>,
    pub in_eating_bout: bool,
}

pub fn e2_step(state: DietFsmState, action: ActionClass) -> (DietFsmState, bool) {
    let windows_since_wash = match action {
        ActionClass::Wash => Some(0),
        _ => state
            .windows_since_wash
            .map(|g| (g + 1).min(WASH_TO_EAT_GAP + 1)),
    };
    if action == ActionClass::Eat {
        let emit = !state.in_eating_bout && windows_since_wash.is_none_or(|g| g > WASH_TO_EAT_GAP);
        let next = DietFsmState {
            windows_since_wash,
            in_eating_bout: true,
        };
        (next, emit)
    } else {
        let next = DietFsmState {
            windows_since_wash,
            in_eating_bout: false,
        };
        (next, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BrushPhase {
    #[default]
    Idle,
    Brushing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BrushFsmState {
    pub phase: BrushPhase,
    /// Brush windows in the current bout, saturating at [`BRUSH_MINIMUM`].
    pub brush_count: u32,
    pub gap_count: u32,
}

impl BrushFsmState {
    const IDLE: Self = Self {
        phase: BrushPhase::Idle,
        brush_count: 0,
        gap_count: 0,
    };

    /// Closes an open bout, reporting whether it was too short. Used at the
    /// end of a finite sequence.
    pub fn close(self) -> (BrushFsmState, bool) {
        match self.phase {
            BrushPhase::Idle => (self, false),
            BrushPhase::Brushing => (Self::IDLE, self.brush_count < BRUSH_MINIMUM),
        }
    }
}

pub fn e3_step(state: BrushFsmState, action: ActionClass) -> (BrushFsmState, bool) {
    let brushing = action == ActionClass::BrushTeeth;
    match state.phase {
        BrushPhase::Idle if brushing => (
            BrushFsmState {
                phase: BrushPhase::Brushing,
                brush_count: 1,
                gap_count: 0,
            },
            false,
        ),
        BrushPhase::Idle => (state, false),
        BrushPhase::Brushing if brushing => (
            BrushFsmState {
                phase: BrushPhase::Brushing,
                brush_count: (state.brush_count + 1).min(BRUSH_MINIMUM),
                gap_count: 0,
            },
            false,
        ),
        BrushPhase::Brushing => {
            let gap_count = state.gap_count + 1;
            if gap_count >= BRUSH_STOP_GAP {
                (BrushFsmState::IDLE, state.brush_count < BRUSH_MINIMUM)
            } else {
                (BrushFsmState { gap_count, ..state }, false)
            }
        }
    }
}

/// Streaming detector: all three machines plus the index of the next window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DetectorState {
    pub restroom: RestroomFsmState,
    pub diet: DietFsmState,
    pub brush: BrushFsmState,
    pub t: u64,
}

impl DetectorState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds one window and returns the classes detected at it.
    pub fn push(&mut self, action: ActionClass) -> CeSet {
        let (restroom, e1) = e1_step(self.restroom, action);
        let (diet, e2) = e2_step(self.diet, action);
        let (brush, e3) = e3_step(self.brush, action);
        *self = DetectorState {
            restroom,
            diet,
            brush,
            t: self.t + 1,
        };
        let mut out = CeSet::EMPTY;
        if e1 {
            out.insert(CeClass::E1);
        }
        if e2 {
            out.insert(CeClass::E2);
        }
        if e3 {
            out.insert(CeClass::E3);
        }
        out
    }

    /// Ends the stream. A brushing bout still open is closed here; its label
    /// belongs to the last pushed window. Restroom and diet state emit
    /// nothing since their violations were never established.
    pub fn finish(&mut self) -> CeSet {
        let (brush, e3) = self.brush.close();
        self.brush = brush;
        if e3 {
            CeSet::EMPTY.with(CeClass::E3)
        } else {
            CeSet::EMPTY
        }
    }
}

/// Runs the detector over a complete example, closing the stream at its
/// last window.
pub fn detect_stream(actions: &[ActionClass]) -> CeLabelSequence {
    let mut state = DetectorState::new();
    let mut labels: CeLabelSequence = actions.iter().map(|&a| state.push(a)).collect();
    let tail = state.finish();
    if let Some(last) = labels.last_mut() {
        *last = last.union(tail);
    }
    labels
}

/// Ground-truth labels for a clean action sequence.
pub fn label_sequence(actions: &[ActionClass]) -> CeLabelSequence {
    let mut restroom = RestroomFsmState::default();
    let mut diet = DietFsmState::default();
    let mut brush = BrushFsmState::default();
    let mut labels = Vec::with_capacity(actions.len());
    for &action in actions {
        let mut set = CeSet::EMPTY;
        let (next, fired) = e1_step(restroom, action);
        restroom = next;
        if fired {
            set.insert(CeClass::E1);
        }
        let (next, fired) = e2_step(diet, action);
        diet = next;
        if fired {
            set.insert(CeClass::E2);
        }
        let (next, fired) = e3_step(brush, action);
        brush = next;
        if fired {
            set.insert(CeClass::E3);
        }
        labels.push(set);
    }
    if let (Some(last), (_, true)) = (labels.last_mut(), brush.close()) {
        last.insert(CeClass::E3);
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;
    use ActionClass::*;

    fn run<S: Copy>(init: S, step: fn(S, ActionClass) -> (S, bool), actions: &[ActionClass]) -> Vec<usize> {
        let mut state = init;
        let mut fired = Vec::new();
        for (t, &a) in actions.iter().enumerate() {
            let (next, emit) = step(state, a);
            state = next;
            if emit {
                fired.push(t);
            }
        }
        fired
    }

    fn repeat(a: ActionClass, n: usize) -> Vec<ActionClass> {
        vec![a; n]
    }

    fn seq(parts: &[(ActionClass, usize)]) -> Vec<ActionClass> {
        parts.iter().flat_map(|&(a, n)| repeat(a, n)).collect()
    }

    #[test]
    fn thresholds_in_windows() {
        assert_eq!(
            (WALK_THRESHOLD, WASH_TO_EAT_GAP, BRUSH_MINIMUM, BRUSH_STOP_GAP),
            (12, 24, 24, 2)
        );
    }

    #[test]
    fn e1_wash_is_safe() {
        let fired = run(RestroomFsmState::default(), e1_step, &[FlushToilet, Wash, Sit, Eat]);
        assert!(fired.is_empty());
    }

    #[test]
    fn e1_fires_on_thirteenth_walk() {
        let actions = seq(&[(FlushToilet, 1), (Walk, 13)]);
        assert_eq!(run(RestroomFsmState::default(), e1_step, &actions), vec![13]);
        let actions = seq(&[(FlushToilet, 1), (Walk, 12)]);
        assert!(run(RestroomFsmState::default(), e1_step, &actions).is_empty());
    }

    #[test]
    fn e1_fires_on_other_activity() {
        let actions = [FlushToilet, Walk, Walk, Eat];
        assert_eq!(run(RestroomFsmState::default(), e1_step, &actions), vec![3]);
    }

    #[test]
    fn e1_repeated_flush_resets_walks() {
        let actions = seq(&[(FlushToilet, 1), (Walk, 10), (FlushToilet, 1), (Walk, 12)]);
        assert!(run(RestroomFsmState::default(), e1_step, &actions).is_empty());
    }

    #[test]
    fn e1_only_once_per_visit() {
        let actions = [FlushToilet, Sit, Sit, Eat];
        assert_eq!(run(RestroomFsmState::default(), e1_step, &actions), vec![1]);
    }

    #[test]
    fn e2_gap_of_24_is_compliant() {
        let mut actions = seq(&[(Wash, 1), (Sit, 23)]);
        actions.push(Eat);
        assert_eq!(actions.len(), 25);
        assert!(run(DietFsmState::default(), e2_step, &actions).is_empty());
    }

    #[test]
    fn e2_gap_of_25_fires() {
        let mut actions = seq(&[(Wash, 1), (Sit, 24)]);
        actions.push(Eat);
        assert_eq!(run(DietFsmState::default(), e2_step, &actions), vec![25]);
    }

    #[test]
    fn e2_never_washed_fires_once_per_bout() {
        let actions = seq(&[(Sit, 5), (Eat, 6), (Sit, 1), (Eat, 2)]);
        assert_eq!(run(DietFsmState::default(), e2_step, &actions), vec![5, 12]);
    }

    #[test]
    fn e3_short_bout() {
        let actions = seq(&[(BrushTeeth, 10), (Sit, 2)]);
        assert_eq!(run(BrushFsmState::default(), e3_step, &actions), vec![11]);
    }

    #[test]
    fn e3_exactly_two_minutes_is_compliant() {
        let actions = seq(&[(BrushTeeth, 24), (Sit, 2)]);
        assert!(run(BrushFsmState::default(), e3_step, &actions).is_empty());
        let actions = seq(&[(BrushTeeth, 23), (Sit, 2)]);
        assert_eq!(run(BrushFsmState::default(), e3_step, &actions), vec![24]);
    }

    #[test]
    fn e3_single_gap_keeps_bout_open() {
        let actions = seq(&[(BrushTeeth, 5), (Sit, 1), (BrushTeeth, 5), (Sit, 2)]);
        assert_eq!(run(BrushFsmState::default(), e3_step, &actions), vec![12]);
    }

    #[test]
    fn pure_sit_sequence_is_all_e0() {
        assert!(label_sequence(&repeat(Sit, 60)).iter().all(|s| s.is_empty()));
    }

    #[test]
    fn flush_then_eat_is_multi_label() {
        let mut actions = vec![FlushToilet, Eat];
        actions.extend(repeat(Sit, 58));
        let labels = label_sequence(&actions);
        assert!(labels[1].contains(CeClass::E1));
        assert!(labels[1].contains(CeClass::E2));
        assert_eq!(labels.iter().filter(|s| !s.is_empty()).count(), 1);
    }

    #[test]
    fn open_bout_closed_at_end() {
        let actions = seq(&[(Sit, 50), (BrushTeeth, 10)]);
        let labels = label_sequence(&actions);
        assert_eq!(labels[59], CeSet::EMPTY.with(CeClass::E3));
        assert_eq!(labels.iter().filter(|s| !s.is_empty()).count(), 1);

        let actions = seq(&[(Sit, 35), (BrushTeeth, 24), (Sit, 1)]);
        assert!(label_sequence(&actions).iter().all(|s| s.is_empty()));
    }

    #[test]
    fn open_restroom_and_diet_state_emit_nothing_at_end() {
        let actions = seq(&[(Sit, 58), (FlushToilet, 1), (Walk, 1)]);
        assert!(label_sequence(&actions).iter().all(|s| s.is_empty()));
    }

    #[test]
    fn push_reproduces_hand_traces() {
        let cases: Vec<(Vec<ActionClass>, Vec<(usize, CeClass)>)> = vec![
            (seq(&[(FlushToilet, 1), (Walk, 13)]), vec![(13, CeClass::E1)]),
            (vec![FlushToilet, Walk, Walk, Eat], vec![(3, CeClass::E1), (3, CeClass::E2)]),
            (seq(&[(Wash, 1), (Sit, 24), (Eat, 1)]), vec![(25, CeClass::E2)]),
            (seq(&[(BrushTeeth, 10), (Sit, 2)]), vec![(11, CeClass::E3)]),
            (seq(&[(BrushTeeth, 5), (Sit, 1), (BrushTeeth, 5), (Sit, 2)]), vec![(12, CeClass::E3)]),
        ];
        for (actions, expected) in cases {
            let mut state = DetectorState::new();
            let mut got = Vec::new();
            for (t, &a) in actions.iter().enumerate() {
                for c in state.push(a).iter() {
                    got.push((t, c));
                }
                assert_eq!(state.t, t as u64 + 1);
            }
            assert_eq!(got, expected, "{actions:?}");
        }
    }

    /// Breadth-first enumeration of every reachable state; the counters
    /// saturate so the space is finite and small.
    fn reachable<S: Copy + Eq + std::hash::Hash>(init: S, step: fn(S, ActionClass) -> (S, bool)) -> HashSet<S> {
        let mut seen = HashSet::from([init]);
        let mut frontier = vec![init];
        while let Some(s) = frontier.pop() {
            for a in ActionClass::ALL {
                let (next, _) = step(s, a);
                if seen.insert(next) {
                    frontier.push(next);
                }
            }
        }
        seen
    }

    #[test]
    fn restroom_state_space() {
        let states = reachable(RestroomFsmState::default(), e1_step);
        // Idle plus AfterRestroom with 0..=12 walks.
        assert_eq!(states.len(), 1 + 13);
        for s in states {
            assert!(s.walk_count <= WALK_THRESHOLD);
            if s.phase == RestroomPhase::Idle {
                assert_eq!(s.walk_count, 0);
            }
        }
    }

    #[test]
    fn diet_state_space() {
        let states = reachable(DietFsmState::default(), e2_step);
        // (never washed | 0..=25) x in_bout, minus "just washed and eating".
        assert_eq!(states.len(), 2 * 27 - 1);
    }

    #[test]
    fn brush_state_space() {
        let states = reachable(BrushFsmState::default(), e3_step);
        for s in &states {
            assert!(s.gap_count < BRUSH_STOP_GAP);
            assert!(s.brush_count <= BRUSH_MINIMUM);
        }
        // Idle plus Brushing with 1..=24 brushes and a gap of 0 or 1.
        assert_eq!(states.len(), 1 + 24 * 2);
    }
}
